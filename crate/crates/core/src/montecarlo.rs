//! Monte Carlo simulation of the two-tier network.
//!
//! One replication draws a fresh macro Poisson process on a square window,
//! the small cells (clustered around the macros, or an independent Poisson
//! process for the baseline comparison), and one typical user in a cluster
//! disk away from the window edge. The user associates by maximum biased
//! power, every other base station in the window interferes with its own
//! unit-mean exponential fade, and the replication yields `ln(1 + SINR)`.
//!
//! Replication `i` draws only from the stream `(master_seed, i)`, so records
//! are bit-identical regardless of worker count or scheduling, and
//! estimates are reduced in index order.

use std::io::Write;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use rayon::prelude::*;

use crate::association::serving_tier;
use crate::error::{Error, Result};
use crate::geometry::{
    nearest, sample_homogeneous, sample_mcp, sample_ppp, sample_typical_user, stream_rng, uniform_in_disk,
    ClusterCountMode, Point, PointPattern, UserMode, Window,
};
use crate::model::{NetworkParams, Tier};

/// Expected macro count the window must hold.
pub const MIN_EXPECTED_MACROS: f64 = 400.0;
/// Replications below which the estimators refuse to run.
pub const MIN_ESTIMATE_REPLICATIONS: usize = 1000;
const MAX_REDRAWS: u64 = 1000;

/// Placement of the small-cell tier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SmallLayout {
    /// Matern clusters around each macro.
    #[default]
    Clustered,
    /// Independent Poisson process of the same mean density, with the user
    /// uniform over the window interior instead of inside a cluster disk.
    IndependentPpp,
}

/// Small-scale fading model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Fading {
    /// Unit-mean exponential power fade per link.
    #[default]
    Rayleigh,
    /// Every fade pinned to 1. Test hook.
    Unit,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub window_half_width: f64,
    /// Strip along the window edge where the user's cluster may not lie.
    pub guard_width: f64,
    pub n_replications: usize,
    pub master_seed: u64,
    pub cluster_count_mode: ClusterCountMode,
    pub user_mode: UserMode,
    pub small_layout: SmallLayout,
    pub fading: Fading,
}

impl SimConfig {
    /// Window sized for [`MIN_EXPECTED_MACROS`] macros, guard of half the
    /// window (at least `2R`), fixed cluster counts, daughter-style users.
    pub fn for_params(params: &NetworkParams, n_replications: usize, master_seed: u64) -> Self {
        let w = (MIN_EXPECTED_MACROS / (4.0 * params.lambda_m)).sqrt().ceil();
        let guard = (w / 2.0).max(2.0 * params.cluster_radius);
        let w = w.max(guard + 2.0 * params.cluster_radius);
        SimConfig {
            window_half_width: w,
            guard_width: guard,
            n_replications,
            master_seed,
            cluster_count_mode: ClusterCountMode::Fixed,
            user_mode: UserMode::DaughterStyle,
            small_layout: SmallLayout::Clustered,
            fading: Fading::Rayleigh,
        }
    }

    pub fn validate(&self, params: &NetworkParams) -> Result<()> {
        let bad = |name, reason: String| Err(Error::InvalidParam { name, reason });
        if self.n_replications < 1 {
            return bad("n_replications", "must be >= 1".into());
        }
        if self.guard_width.is_nan() || self.guard_width < 2.0 * params.cluster_radius {
            return bad(
                "guard_width",
                format!("must be >= 2 * cluster_radius = {}", 2.0 * params.cluster_radius),
            );
        }
        if self.window_half_width.is_nan() || self.window_half_width <= self.guard_width {
            return bad("window_half_width", "must exceed guard_width".into());
        }
        let expected = params.lambda_m * 4.0 * self.window_half_width * self.window_half_width;
        if expected < MIN_EXPECTED_MACROS {
            return bad(
                "window_half_width",
                format!("window holds {expected:.1} expected macros, need >= {MIN_EXPECTED_MACROS}"),
            );
        }
        Ok(())
    }

    fn window(&self) -> Window {
        Window::new(self.window_half_width).expect("validated window")
    }

    fn inner(&self) -> Window {
        Window::new(self.window_half_width - self.guard_width).expect("validated guard")
    }
}

/// Outcome of one replication.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleRecord {
    pub replication_index: u64,
    pub d_macro: f64,
    /// Absent when no small cell was drawn.
    pub d_small: Option<f64>,
    pub serving_tier: Tier,
    pub sinr: f64,
    /// `ln(1 + sinr)`, nats.
    pub rate_sample: f64,
    /// Realisations discarded because no macro was eligible for the user.
    pub redraws: u64,
}

/// Distances, association, and SINR for a user in a fixed realisation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Measurement {
    pub d_macro: f64,
    pub d_small: Option<f64>,
    pub serving_tier: Tier,
    pub sinr: f64,
}

fn fade<R: Rng + ?Sized>(fading: Fading, rng: &mut R) -> f64 {
    match fading {
        Fading::Rayleigh => Exp1.sample(rng),
        Fading::Unit => 1.0,
    }
}

/// Associates the user at `(x, y)` and computes its SINR. Fades are drawn
/// for the serving link first, then for every other BS, macros before small
/// cells, in pattern order.
pub fn measure<R: Rng + ?Sized>(
    params: &NetworkParams,
    macros: &PointPattern,
    smalls: &PointPattern,
    x: f64,
    y: f64,
    fading: Fading,
    rng: &mut R,
) -> Result<Measurement> {
    let (im, d_macro) = nearest(x, y, macros, None)?;
    let near_small = nearest(x, y, smalls, None).ok();
    let d_small = near_small.map(|(_, d)| d);
    let tier = serving_tier(d_macro, d_small, params);
    let (serving_idx, d_serv) = match tier {
        Tier::Macro => (im, d_macro),
        Tier::Small => near_small.expect("small tier wins only when present"),
    };

    let h = fade(fading, rng);
    let signal = params.power(tier) * h * d_serv.powf(-params.alpha(tier));
    let mut interference = 0.0;
    for (t, pattern) in [(Tier::Macro, macros), (Tier::Small, smalls)] {
        let p = params.power(t);
        let a = params.alpha(t);
        for (j, b) in pattern.points.iter().enumerate() {
            if t == tier && j == serving_idx {
                continue;
            }
            let g = fade(fading, rng);
            interference += p * g * b.distance_to(x, y).powf(-a);
        }
    }
    Ok(Measurement {
        d_macro,
        d_small,
        serving_tier: tier,
        sinr: signal / (interference + params.noise_power),
    })
}

/// One drawn realisation around the typical user.
#[derive(Debug, Clone, PartialEq)]
pub struct Realisation {
    pub macros: PointPattern,
    pub smalls: PointPattern,
    pub user_x: f64,
    pub user_y: f64,
    /// Realisations discarded before this one.
    pub redraws: u64,
}

fn realise(params: &NetworkParams, sim: &SimConfig, index: u64) -> Result<(Realisation, ChaCha8Rng)> {
    let window = sim.window();
    let inner = sim.inner();
    let r = params.cluster_radius;
    for attempt in 0..MAX_REDRAWS {
        let mut rng = stream_rng(sim.master_seed, index, attempt);
        let macros = sample_ppp(params.lambda_m, &window, &mut rng);
        let (smalls, user) = match sim.small_layout {
            SmallLayout::Clustered => {
                let smalls = sample_mcp(&macros, params.c_bar, r, sim.cluster_count_mode, &mut rng);
                match sample_typical_user(&macros, r, sim.user_mode, &inner, &mut rng) {
                    Ok(u) => (smalls, (u.x, u.y)),
                    Err(Error::EmptyPattern) => continue,
                    Err(e) => return Err(e),
                }
            }
            SmallLayout::IndependentPpp => {
                if macros.is_empty() {
                    continue;
                }
                let smalls = sample_homogeneous(params.lambda_s(), &window, Tier::Small, &mut rng);
                let w = inner.half_width();
                let user = (rng.random_range(-w..w), rng.random_range(-w..w));
                (smalls, user)
            }
        };
        let real = Realisation {
            macros,
            smalls,
            user_x: user.0,
            user_y: user.1,
            redraws: attempt,
        };
        return Ok((real, rng));
    }
    Err(Error::EmptyPattern)
}

/// The point patterns and user position of replication `index`.
pub fn realisation(params: &NetworkParams, sim: &SimConfig, index: u64) -> Result<Realisation> {
    realise(params, sim, index).map(|(r, _)| r)
}

/// Runs replication `index` of `sim`.
pub fn run_replication(params: &NetworkParams, sim: &SimConfig, index: u64) -> Result<SampleRecord> {
    let (real, mut rng) = realise(params, sim, index)?;
    let m = measure(
        params,
        &real.macros,
        &real.smalls,
        real.user_x,
        real.user_y,
        sim.fading,
        &mut rng,
    )?;
    Ok(SampleRecord {
        replication_index: index,
        d_macro: m.d_macro,
        d_small: m.d_small,
        serving_tier: m.serving_tier,
        sinr: m.sinr,
        rate_sample: m.sinr.ln_1p(),
        redraws: real.redraws,
    })
}

/// All replications of `sim`, in index order, run on the current rayon pool.
pub fn run_all(params: &NetworkParams, sim: &SimConfig) -> Result<Vec<SampleRecord>> {
    sim.validate(params)?;
    (0..sim.n_replications as u64)
        .into_par_iter()
        .map(|i| run_replication(params, sim, i))
        .collect()
}

/// Runs `f` on a dedicated pool of `workers` threads (0 = rayon default).
pub fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .expect("thread pool")
        .install(f)
}

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    /// Sample standard deviation over `sqrt(n)`.
    pub stderr: f64,
    pub n: usize,
    pub seed: u64,
}

impl McEstimate {
    /// Mean and standard error of `values`, summed in the given order.
    pub fn from_values(values: &[f64], seed: u64) -> Result<Self> {
        let n = values.len();
        if n < 2 {
            return Err(Error::EmptyInput);
        }
        let nf = n as f64;
        let mean = values.iter().sum::<f64>() / nf;
        let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (nf - 1.0);
        Ok(McEstimate {
            mean,
            stderr: (var / nf).sqrt(),
            n,
            seed,
        })
    }

    /// Combined standard error of the difference of two independent estimates.
    pub fn combined_stderr(&self, other: &McEstimate) -> f64 {
        self.stderr.hypot(other.stderr)
    }
}

fn require_reps(sim: &SimConfig) -> Result<()> {
    if sim.n_replications < MIN_ESTIMATE_REPLICATIONS {
        return Err(Error::InvalidParam {
            name: "n_replications",
            reason: format!(
                "estimates need >= {MIN_ESTIMATE_REPLICATIONS}, got {}",
                sim.n_replications
            ),
        });
    }
    Ok(())
}

/// Association fractions from existing records, `(macro, small)`. The small
/// fraction is counted, the macro fraction is its complement.
pub fn association_from_records(records: &[SampleRecord], seed: u64) -> Result<(McEstimate, McEstimate)> {
    let n = records.len();
    if n < 2 {
        return Err(Error::EmptyInput);
    }
    let small: Vec<f64> = records
        .iter()
        .map(|r| if r.serving_tier == Tier::Small { 1.0 } else { 0.0 })
        .collect();
    let s = McEstimate::from_values(&small, seed)?;
    let m = McEstimate {
        mean: 1.0 - s.mean,
        ..s
    };
    Ok((m, s))
}

/// Fraction of replications served by each tier, `(macro, small)`.
pub fn estimate_association(params: &NetworkParams, sim: &SimConfig) -> Result<(McEstimate, McEstimate)> {
    require_reps(sim)?;
    let records = run_all(params, sim)?;
    association_from_records(&records, sim.master_seed)
}

/// Mean of `ln(1 + SINR)` from existing records.
pub fn rate_from_records(records: &[SampleRecord], seed: u64) -> Result<McEstimate> {
    let v: Vec<f64> = records.iter().map(|r| r.rate_sample).collect();
    McEstimate::from_values(&v, seed)
}

/// Mean ergodic rate over replications.
pub fn estimate_rate(params: &NetworkParams, sim: &SimConfig) -> Result<McEstimate> {
    require_reps(sim)?;
    let records = run_all(params, sim)?;
    rate_from_records(&records, sim.master_seed)
}

/// Raw sample dump, header `replication,d_macro_m,d_small_m,serving_tier,sinr,rate_nats`.
pub fn write_samples_csv<W: Write>(records: &[SampleRecord], mut out: W) -> Result<()> {
    writeln!(out, "replication,d_macro_m,d_small_m,serving_tier,sinr,rate_nats")?;
    for r in records {
        let ds = r.d_small.map(|d| d.to_string()).unwrap_or_default();
        writeln!(
            out,
            "{},{},{},{},{},{}",
            r.replication_index, r.d_macro, ds, r.serving_tier, r.sinr, r.rate_sample
        )?;
    }
    Ok(())
}

/// Right-continuous empirical CCDF of a sample.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalCcdf {
    sorted: Vec<f64>,
}

/// Empirical CCDF, `x -> #{s > x} / n`.
pub fn empirical_ccdf(samples: &[f64]) -> Result<EmpiricalCcdf> {
    if samples.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(EmpiricalCcdf { sorted })
}

impl EmpiricalCcdf {
    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn ccdf(&self, x: f64) -> f64 {
        let at_or_below = self.sorted.partition_point(|&s| s <= x);
        (self.sorted.len() - at_or_below) as f64 / self.sorted.len() as f64
    }

    /// Kolmogorov-Smirnov distance to a continuous CDF.
    pub fn ks_distance<F: Fn(f64) -> f64>(&self, cdf: F) -> f64 {
        let n = self.sorted.len() as f64;
        self.sorted
            .iter()
            .enumerate()
            .map(|(i, &s)| {
                let f = cdf(s);
                (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
            })
            .fold(0.0, f64::max)
    }
}

/// Contact distances from the origin to a Poisson process of density
/// `lambda`, one independent realisation per sample.
pub fn sample_ppp_contact(lambda: f64, n: usize, seed: u64) -> Vec<f64> {
    // pi lambda w^2 = 30: the disk of radius w is empty with probability e^-30
    let w = (30.0 / (std::f64::consts::PI * lambda)).sqrt();
    let window = Window::new(w).expect("positive density");
    (0..n as u64)
        .into_par_iter()
        .map(|i| {
            (0..)
                .find_map(|attempt| {
                    let mut rng = stream_rng(seed, i, attempt);
                    let p = sample_ppp(lambda, &window, &mut rng);
                    match nearest(0.0, 0.0, &p, None) {
                        Ok((_, d)) if d <= w => Some(d),
                        _ => None,
                    }
                })
                .expect("unbounded attempts")
        })
        .collect()
}

/// Macro contact distances from the origin conditioned on `D_m <= R`.
pub fn sample_dm_conditional(params: &NetworkParams, n: usize, seed: u64) -> Vec<f64> {
    let r = params.cluster_radius;
    // Only macros inside the R-disk matter, and they all lie in [-R, R]^2.
    let window = Window::new(r).expect("positive radius");
    (0..n as u64)
        .into_par_iter()
        .map(|i| {
            (0..)
                .find_map(|attempt| {
                    let mut rng = stream_rng(seed, i, attempt);
                    let p = sample_ppp(params.lambda_m, &window, &mut rng);
                    match nearest(0.0, 0.0, &p, None) {
                        Ok((_, d)) if d <= r => Some(d),
                        _ => None,
                    }
                })
                .expect("unbounded attempts")
        })
        .collect()
}

/// Minimum distance from a uniform point of a disk of radius `r` to
/// `daughters` other uniform points of the same disk.
pub fn sample_intracluster_min(daughters: usize, r: f64, n: usize, seed: u64) -> Vec<f64> {
    let parent = PointPattern::new(vec![Point {
        x: 0.0,
        y: 0.0,
        tier: Tier::Macro,
        parent_index: None,
    }]);
    let c_bar = daughters as f64;
    (0..n as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(seed, i, 0);
            let d = sample_mcp(&parent, c_bar, r, ClusterCountMode::Fixed, &mut rng);
            let (x, y) = uniform_in_disk(0.0, 0.0, r, &mut rng);
            nearest(x, y, &d, None).expect("at least one daughter").1
        })
        .collect()
}
