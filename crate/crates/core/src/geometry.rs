//! Point-process sampling and nearest-distance queries.

use std::f64::consts::PI;
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};

use crate::error::{Error, Result};
use crate::model::Tier;

/// Square window `[-half_width, half_width]^2`, centred on the origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window {
    half_width: f64,
}

impl Window {
    pub fn new(half_width: f64) -> Result<Self> {
        if half_width.is_finite() && half_width > 0.0 {
            Ok(Window { half_width })
        } else {
            Err(Error::InvalidParam {
                name: "half_width",
                reason: format!("must be finite and > 0, got {half_width}"),
            })
        }
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn area(&self) -> f64 {
        4.0 * self.half_width * self.half_width
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        x.abs() <= self.half_width && y.abs() <= self.half_width
    }

    /// True when the whole disk of radius `r` around `(x, y)` is inside.
    pub fn contains_disk(&self, x: f64, y: f64, r: f64) -> bool {
        x.abs() + r <= self.half_width && y.abs() + r <= self.half_width
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
    pub tier: Tier,
    /// Index of the parent in the parent pattern, for cluster daughters.
    pub parent_index: Option<usize>,
}

impl Point {
    pub fn distance_to(&self, x: f64, y: f64) -> f64 {
        (self.x - x).hypot(self.y - y)
    }
}

/// A realised set of tier-tagged points.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PointPattern {
    pub points: Vec<Point>,
}

impl PointPattern {
    pub fn new(points: Vec<Point>) -> Self {
        PointPattern { points }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Point> {
        self.points.iter()
    }

    /// Concatenates two patterns, keeping each point's tags.
    pub fn merged(&self, other: &PointPattern) -> PointPattern {
        let mut points = self.points.clone();
        points.extend_from_slice(&other.points);
        PointPattern { points }
    }

    /// CSV dump with header `x_m,y_m,tier,parent_index`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "x_m,y_m,tier,parent_index")?;
        for p in &self.points {
            let parent = p.parent_index.map(|i| i.to_string()).unwrap_or_default();
            writeln!(out, "{},{},{},{}", p.x, p.y, p.tier, parent)?;
        }
        Ok(())
    }
}

/// How many daughters each cluster receives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ClusterCountMode {
    /// Poisson with mean `c_bar`.
    Poisson,
    /// Exactly `round(c_bar)`.
    #[default]
    Fixed,
}

impl ClusterCountMode {
    pub fn as_str(self) -> &'static str {
        match self {
            ClusterCountMode::Poisson => "poisson",
            ClusterCountMode::Fixed => "fixed",
        }
    }
}

impl std::str::FromStr for ClusterCountMode {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "poisson" => Ok(ClusterCountMode::Poisson),
            "fixed" => Ok(ClusterCountMode::Fixed),
            _ => Err(format!("unknown cluster count mode `{s}`")),
        }
    }
}

/// Where the typical user is placed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum UserMode {
    /// Uniform parent among the eligible ones, then uniform in its disk.
    #[default]
    DaughterStyle,
    /// Uniform over the union of all disks (rejection from the window).
    UnionUniform,
}

impl UserMode {
    pub fn as_str(self) -> &'static str {
        match self {
            UserMode::DaughterStyle => "daughter",
            UserMode::UnionUniform => "union",
        }
    }
}

impl std::str::FromStr for UserMode {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "daughter" => Ok(UserMode::DaughterStyle),
            "union" => Ok(UserMode::UnionUniform),
            _ => Err(format!("unknown user mode `{s}`")),
        }
    }
}

/// Location of the typical user and the cluster it belongs to.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TypicalUser {
    pub x: f64,
    pub y: f64,
    pub parent_index: usize,
}

/// Independent generator for `(master_seed, stream, attempt)`.
///
/// ChaCha offers 2^64 streams per key; the key mixes the master seed with the
/// attempt counter so re-draws never reuse a stream.
pub fn stream_rng(master_seed: u64, stream: u64, attempt: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&master_seed.to_le_bytes());
    key[8..16].copy_from_slice(&attempt.to_le_bytes());
    key[16..24].copy_from_slice(b"mcphtnt1");
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(stream);
    rng
}

fn poisson_count<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> usize {
    if mean <= 0.0 {
        return 0;
    }
    let d = Poisson::new(mean).expect("finite positive Poisson mean");
    d.sample(rng) as usize
}

/// Uniform point in the disk of radius `r` around `(cx, cy)`; radius `r sqrt(u)`.
pub fn uniform_in_disk<R: Rng + ?Sized>(cx: f64, cy: f64, r: f64, rng: &mut R) -> (f64, f64) {
    let rho = r * rng.random::<f64>().sqrt();
    let theta = 2.0 * PI * rng.random::<f64>();
    (cx + rho * theta.cos(), cy + rho * theta.sin())
}

/// Homogeneous Poisson pattern of the given tier on `window`.
pub fn sample_homogeneous<R: Rng + ?Sized>(lambda: f64, window: &Window, tier: Tier, rng: &mut R) -> PointPattern {
    let n = poisson_count(lambda * window.area(), rng);
    let w = window.half_width;
    let points = (0..n)
        .map(|_| Point {
            x: rng.random_range(-w..w),
            y: rng.random_range(-w..w),
            tier,
            parent_index: None,
        })
        .collect();
    PointPattern { points }
}

/// Macro-tier Poisson point process of density `lambda` on `window`.
pub fn sample_ppp<R: Rng + ?Sized>(lambda: f64, window: &Window, rng: &mut R) -> PointPattern {
    sample_homogeneous(lambda, window, Tier::Macro, rng)
}

/// Matern cluster daughters around every point of `parents`.
pub fn sample_mcp<R: Rng + ?Sized>(
    parents: &PointPattern,
    c_bar: f64,
    r: f64,
    mode: ClusterCountMode,
    rng: &mut R,
) -> PointPattern {
    let fixed = c_bar.round().max(0.0) as usize;
    let mut points = Vec::new();
    for (i, p) in parents.points.iter().enumerate() {
        let n = match mode {
            ClusterCountMode::Poisson => poisson_count(c_bar, rng),
            ClusterCountMode::Fixed => fixed,
        };
        for _ in 0..n {
            let (x, y) = uniform_in_disk(p.x, p.y, r, rng);
            points.push(Point {
                x,
                y,
                tier: Tier::Small,
                parent_index: Some(i),
            });
        }
    }
    PointPattern { points }
}

const MAX_REJECTIONS: usize = 10_000_000;

/// Places the typical user inside a cluster disk whose parent lies in `eligible`.
///
/// In [`UserMode::DaughterStyle`] only parents whose whole disk fits inside
/// `eligible` are candidates. In [`UserMode::UnionUniform`] the user is
/// uniform over `eligible` restricted to the union of disks, and its parent
/// is the nearest one.
pub fn sample_typical_user<R: Rng + ?Sized>(
    parents: &PointPattern,
    r: f64,
    mode: UserMode,
    eligible: &Window,
    rng: &mut R,
) -> Result<TypicalUser> {
    match mode {
        UserMode::DaughterStyle => {
            let candidates: Vec<usize> = parents
                .points
                .iter()
                .enumerate()
                .filter(|(_, p)| eligible.contains_disk(p.x, p.y, r))
                .map(|(i, _)| i)
                .collect();
            if candidates.is_empty() {
                return Err(Error::EmptyPattern);
            }
            let k = candidates[rng.random_range(0..candidates.len())];
            let p = &parents.points[k];
            let (x, y) = uniform_in_disk(p.x, p.y, r, rng);
            Ok(TypicalUser { x, y, parent_index: k })
        }
        UserMode::UnionUniform => {
            let w = eligible.half_width;
            let touching = parents.points.iter().any(|p| p.x.abs() <= w + r && p.y.abs() <= w + r);
            if !touching {
                return Err(Error::EmptyPattern);
            }
            for _ in 0..MAX_REJECTIONS {
                let x = rng.random_range(-w..w);
                let y = rng.random_range(-w..w);
                if let Ok((k, d)) = nearest(x, y, parents, None) {
                    if d <= r {
                        return Ok(TypicalUser { x, y, parent_index: k });
                    }
                }
            }
            Err(Error::EmptyPattern)
        }
    }
}

/// Index and distance of the nearest point of `pattern` (optionally of one
/// tier) to `(x, y)`.
pub fn nearest(x: f64, y: f64, pattern: &PointPattern, tier_filter: Option<Tier>) -> Result<(usize, f64)> {
    pattern
        .points
        .iter()
        .enumerate()
        .filter(|(_, p)| tier_filter.is_none_or(|t| p.tier == t))
        .map(|(i, p)| (i, p.distance_to(x, y)))
        .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)))
        .ok_or(Error::EmptyPattern)
}

/// Euclidean distance from `query` to the nearest matching point.
pub fn nearest_distance(query: (f64, f64), pattern: &PointPattern, tier_filter: Option<Tier>) -> Result<f64> {
    nearest(query.0, query.1, pattern, tier_filter).map(|(_, d)| d)
}
