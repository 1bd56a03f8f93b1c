//! Analytical distance laws: Poisson contact distance, the clustered-process
//! contact distance, the macro contact distance conditioned on the user lying
//! in a cluster disk, the distance between two uniform points of a disk, and
//! the minimum of `c_bar` such distances.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::model::NetworkParams;

/// `P[D > r] = exp(-pi lambda r^2)` for a Poisson process of density `lambda`.
pub fn ccdf_contact_ppp(r: f64, lambda: f64) -> f64 {
    (-PI * lambda * r * r).exp()
}

pub fn pdf_contact_ppp(r: f64, lambda: f64) -> f64 {
    if r < 0.0 {
        return 0.0;
    }
    2.0 * PI * lambda * r * (-PI * lambda * r * r).exp()
}

/// Contact distance of the whole cluster process from an arbitrary location:
/// Poisson with density `lambda_p * c_bar`.
pub fn ccdf_contact_mcp_global(r: f64, lambda_p: f64, c_bar: f64) -> f64 {
    ccdf_contact_ppp(r, lambda_p * c_bar)
}

/// Probability that an arbitrary location is covered by at least one
/// cluster disk, `1 - exp(-pi lambda_m R^2)`.
pub fn prob_user_in_disk(params: &NetworkParams) -> f64 {
    -(-params.disk_load()).exp_m1()
}

/// `P[D_m > r | D_m <= R]` in the form used by the association formulas,
/// `(1 - exp(-pi lambda_m (R^2 - r^2))) / (1 - exp(-pi lambda_m R^2))`.
///
/// This omits a factor `exp(-pi lambda_m r^2)` relative to the truncated
/// contact law ([`ccdf_dm_truncated`]); the two agree as `lambda_m R^2 -> 0`.
pub fn ccdf_dm_conditional(r: f64, params: &NetworkParams) -> f64 {
    dm_conditional_ccdf(r, params.lambda_m, params.cluster_radius)
}

/// Density of the macro contact distance conditioned on `D_m <= R`.
pub fn pdf_dm_conditional(r: f64, params: &NetworkParams) -> f64 {
    dm_conditional_pdf(r, params.lambda_m, params.cluster_radius)
}

/// Contact law of the macro tier truncated to `[0, R]`,
/// `(exp(-pi lambda_m r^2) - exp(-pi lambda_m R^2)) / (1 - exp(-pi lambda_m R^2))`.
pub fn ccdf_dm_truncated(r: f64, params: &NetworkParams) -> f64 {
    let big_r = params.cluster_radius;
    if r <= 0.0 {
        return 1.0;
    }
    if r >= big_r {
        return 0.0;
    }
    let l = PI * params.lambda_m;
    ((-l * r * r).exp() - (-l * big_r * big_r).exp()) / (-(-l * big_r * big_r).exp_m1())
}

fn dm_conditional_ccdf(r: f64, lambda_m: f64, big_r: f64) -> f64 {
    if r <= 0.0 {
        return 1.0;
    }
    if r >= big_r {
        return 0.0;
    }
    let l = PI * lambda_m;
    (-(-l * (big_r * big_r - r * r)).exp_m1()) / (-(-l * big_r * big_r).exp_m1())
}

fn dm_conditional_pdf(r: f64, lambda_m: f64, big_r: f64) -> f64 {
    if r < 0.0 || r > big_r {
        return 0.0;
    }
    let l = PI * lambda_m;
    2.0 * l * r * (-l * (big_r * big_r - r * r)).exp() / (-(-l * big_r * big_r).exp_m1())
}

#[inline]
fn half_ratio_terms(l: f64, big_r: f64) -> (f64, f64) {
    let q = (l / (2.0 * big_r)).clamp(-1.0, 1.0);
    let root = (1.0 - q * q).max(0.0).sqrt();
    (q.acos(), root)
}

/// Density of the distance between two independent uniform points of a disk
/// of radius `big_r`, supported on `(0, 2R)`.
pub fn pair_pdf(l: f64, big_r: f64) -> f64 {
    if l <= 0.0 || l >= 2.0 * big_r {
        return 0.0;
    }
    let (ac, root) = half_ratio_terms(l, big_r);
    let v = 2.0 * l / (big_r * big_r) * (2.0 / PI * ac - l / (PI * big_r) * root);
    v.max(0.0)
}

/// CDF of the pair distance, in its textbook form
/// `1 + (2/pi)(l^2/R^2 - 1) acos(l/2R) - (l/(pi R))(1 + l^2/(2R^2)) sqrt(1 - l^2/(4R^2))`.
pub fn pair_cdf(l: f64, big_r: f64) -> f64 {
    if l <= 0.0 {
        return 0.0;
    }
    if l >= 2.0 * big_r {
        return 1.0;
    }
    let (ac, root) = half_ratio_terms(l, big_r);
    let rr = l * l / (big_r * big_r);
    1.0 + 2.0 / PI * (rr - 1.0) * ac - l / (PI * big_r) * (1.0 + rr / 2.0) * root
}

/// `1 - F_L(l)` written directly, as it appears inside the intra-cluster
/// minimum-distance law. Accurate near `l = 2R` where `1 - pair_cdf` cancels.
pub fn pair_ccdf(l: f64, big_r: f64) -> f64 {
    if l <= 0.0 {
        return 1.0;
    }
    if l >= 2.0 * big_r {
        return 0.0;
    }
    let (ac, root) = half_ratio_terms(l, big_r);
    let rr = l * l / (big_r * big_r);
    let v = l / (PI * big_r) * (1.0 + rr / 2.0) * root - 2.0 / PI * (rr - 1.0) * ac;
    v.clamp(0.0, 1.0)
}

fn require_cluster(c_bar: f64) -> Result<()> {
    if c_bar >= 1.0 && c_bar.is_finite() {
        Ok(())
    } else {
        Err(Error::DegenerateCluster(c_bar))
    }
}

/// Density of the minimum distance from a uniform point of a disk to `c_bar`
/// other uniform points of the same disk, treating the `c_bar` distances as
/// independent: `c_bar [1 - F_L(r)]^(c_bar - 1) f_L(r)`.
///
/// Non-integer `c_bar >= 1` is accepted; the expression stays a density.
pub fn pdf_ds_intracluster(r: f64, c_bar: f64, big_r: f64) -> Result<f64> {
    require_cluster(c_bar)?;
    if r <= 0.0 || r >= 2.0 * big_r {
        return Ok(0.0);
    }
    Ok(c_bar * pair_ccdf(r, big_r).powf(c_bar - 1.0) * pair_pdf(r, big_r))
}

/// `[1 - F_L(r)]^c_bar`.
pub fn ccdf_ds_intracluster(r: f64, c_bar: f64, big_r: f64) -> Result<f64> {
    require_cluster(c_bar)?;
    Ok(pair_ccdf(r, big_r).powf(c_bar))
}

/// Which closed form a [`ContactLaw`] evaluates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LawKind {
    /// Poisson contact distance with the given density.
    Ppp { lambda: f64 },
    /// Macro contact distance given the user is in some cluster disk.
    MacroConditional { lambda_m: f64, radius: f64 },
    /// Distance between two uniform points of one disk.
    PairDistance { radius: f64 },
    /// Minimum over `c_bar` pair distances of one disk.
    IntraClusterMin { c_bar: f64, radius: f64 },
}

/// An analytical distance law: CCDF, density, support.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContactLaw {
    pub kind: LawKind,
    pub lo: f64,
    pub hi: f64,
}

impl ContactLaw {
    pub fn ppp(lambda: f64) -> Self {
        ContactLaw {
            kind: LawKind::Ppp { lambda },
            lo: 0.0,
            hi: f64::INFINITY,
        }
    }

    pub fn mcp_global(lambda_p: f64, c_bar: f64) -> Self {
        Self::ppp(lambda_p * c_bar)
    }

    pub fn macro_conditional(params: &NetworkParams) -> Self {
        ContactLaw {
            kind: LawKind::MacroConditional {
                lambda_m: params.lambda_m,
                radius: params.cluster_radius,
            },
            lo: 0.0,
            hi: params.cluster_radius,
        }
    }

    pub fn intra_cluster(c_bar: f64, radius: f64) -> Result<Self> {
        require_cluster(c_bar)?;
        Ok(ContactLaw {
            kind: LawKind::IntraClusterMin { c_bar, radius },
            lo: 0.0,
            hi: 2.0 * radius,
        })
    }

    pub fn support(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    pub fn ccdf(&self, r: f64) -> f64 {
        match self.kind {
            LawKind::Ppp { lambda } => {
                if r <= 0.0 {
                    1.0
                } else {
                    ccdf_contact_ppp(r, lambda)
                }
            }
            LawKind::MacroConditional { lambda_m, radius } => dm_conditional_ccdf(r, lambda_m, radius),
            LawKind::PairDistance { radius } => pair_ccdf(r, radius),
            LawKind::IntraClusterMin { c_bar, radius } => pair_ccdf(r, radius).powf(c_bar),
        }
    }

    pub fn cdf(&self, r: f64) -> f64 {
        1.0 - self.ccdf(r)
    }

    pub fn pdf(&self, r: f64) -> f64 {
        match self.kind {
            LawKind::Ppp { lambda } => pdf_contact_ppp(r, lambda),
            LawKind::MacroConditional { lambda_m, radius } => dm_conditional_pdf(r, lambda_m, radius),
            LawKind::PairDistance { radius } => pair_pdf(r, radius),
            LawKind::IntraClusterMin { c_bar, radius } => {
                if r <= 0.0 || r >= 2.0 * radius {
                    0.0
                } else {
                    c_bar * pair_ccdf(r, radius).powf(c_bar - 1.0) * pair_pdf(r, radius)
                }
            }
        }
    }

    /// Finite upper end for plotting grids: `hi`, or the point where the
    /// CCDF drops below `tail` for unbounded support.
    pub fn grid_end(&self, tail: f64) -> f64 {
        match self.kind {
            LawKind::Ppp { lambda } if !self.hi.is_finite() => {
                if lambda > 0.0 {
                    (-tail.ln() / (PI * lambda)).sqrt()
                } else {
                    0.0
                }
            }
            _ => self.hi,
        }
    }
}

/// Law of the distance between two uniform points of a disk of radius `big_r`.
pub fn disk_pair_distance_law(big_r: f64) -> Result<ContactLaw> {
    if !(big_r > 0.0 && big_r.is_finite()) {
        return Err(Error::InvalidParam {
            name: "cluster_radius",
            reason: format!("must be finite and > 0, got {big_r}"),
        });
    }
    Ok(ContactLaw {
        kind: LawKind::PairDistance { radius: big_r },
        lo: 0.0,
        hi: 2.0 * big_r,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn truncated_law_differs_by_contact_factor() {
        let p = NetworkParams {
            lambda_m: 3e-5,
            ..NetworkParams::baseline()
        };
        for r in [1.0, 30.0, 70.0, 99.0] {
            let f = (-PI * p.lambda_m * r * r).exp();
            let want = f * ccdf_dm_conditional(r, &p);
            assert!((ccdf_dm_truncated(r, &p) - want).abs() < 1e-14);
        }
        assert_eq!(ccdf_dm_truncated(0.0, &p), 1.0);
        assert_eq!(ccdf_dm_truncated(100.0, &p), 0.0);
    }
    use crate::numerics::{integrate_finite, QuadSpec};

    fn q() -> QuadSpec {
        QuadSpec::default()
    }

    #[test]
    fn ppp_ccdf_anchors() {
        assert_eq!(ccdf_contact_ppp(0.0, 3.0), 1.0);
        let lam = 1.0 / (PI * 500.0 * 500.0);
        assert!((ccdf_contact_ppp(500.0, lam) - (-1.0f64).exp()).abs() < 1e-15);
        assert!((ccdf_contact_ppp(500.0, lam) - 0.36788).abs() < 1e-5);
    }

    #[test]
    fn mcp_global_is_ppp_of_product_density() {
        for r in [0.0, 1.0, 37.0, 400.0] {
            assert_eq!(ccdf_contact_mcp_global(r, 2e-6, 5.0), ccdf_contact_ppp(r, 2e-6 * 5.0));
            assert_eq!(ccdf_contact_mcp_global(r, 2e-6, 0.0), 1.0);
        }
    }

    #[test]
    fn user_in_disk_probability() {
        let p = NetworkParams {
            cluster_radius: 500.0,
            ..NetworkParams::baseline()
        };
        assert!((prob_user_in_disk(&p) - (1.0 - (-1.0f64).exp())).abs() < 1e-15);
        assert!((prob_user_in_disk(&p) - 0.63212).abs() < 1e-5);
        let tiny = NetworkParams {
            cluster_radius: 1e-9,
            ..p
        };
        assert!(prob_user_in_disk(&tiny) < 1e-20);
    }

    #[test]
    fn conditional_macro_density_normalised() {
        let p = NetworkParams::baseline();
        assert_eq!(pdf_dm_conditional(p.cluster_radius * 1.01, &p), 0.0);
        let mass = integrate_finite(|r| pdf_dm_conditional(r, &p), 0.0, p.cluster_radius, &q()).unwrap();
        assert!((mass - 1.0).abs() < 1e-8, "{mass}");
    }

    #[test]
    fn pair_law_endpoints_and_mean() {
        let big_r = 7.0;
        assert_eq!(pair_cdf(0.0, big_r), 0.0);
        assert!((pair_cdf(2.0 * big_r, big_r) - 1.0).abs() < 1e-15);
        // cdf expression at the right edge (not the clamp shortcut)
        assert!((pair_cdf(2.0 * big_r * (1.0 - 1e-12), big_r) - 1.0).abs() < 1e-9);
        assert!(pair_cdf(1e-12, big_r).abs() < 1e-9);
        let mean = integrate_finite(|l| l * pair_pdf(l, big_r), 0.0, 2.0 * big_r, &q()).unwrap();
        let expect = 128.0 * big_r / (45.0 * PI);
        assert!((mean / big_r - 0.90541).abs() < 1e-4);
        assert!((mean - expect).abs() < 1e-9 * big_r, "{mean} vs {expect}");
    }

    #[test]
    fn pair_ccdf_matches_one_minus_cdf() {
        for big_r in [1.0, 50.0, 1000.0] {
            for i in 0..=400 {
                let l = 2.0 * big_r * i as f64 / 400.0;
                let d = (1.0 - pair_cdf(l, big_r)) - pair_ccdf(l, big_r);
                assert!(d.abs() < 1e-12, "R={big_r} l={l} diff={d}");
            }
        }
    }

    #[test]
    fn intracluster_single_daughter_is_pair_law() {
        for i in 1..100 {
            let r = 0.02 * i as f64;
            assert_eq!(pdf_ds_intracluster(r, 1.0, 1.0).unwrap(), pair_pdf(r, 1.0));
        }
    }

    #[test]
    fn intracluster_normalised() {
        for c in [1.0, 2.0, 2.5, 5.0, 10.0] {
            let mass = integrate_finite(|r| pdf_ds_intracluster(r, c, 30.0).unwrap(), 0.0, 60.0, &q()).unwrap();
            assert!((mass - 1.0).abs() < 1e-6, "c={c} mass={mass}");
        }
    }

    #[test]
    fn intracluster_needs_a_daughter() {
        assert_eq!(pdf_ds_intracluster(1.0, 0.5, 10.0), Err(Error::DegenerateCluster(0.5)));
        assert!(ContactLaw::intra_cluster(0.0, 10.0).is_err());
    }

    #[test]
    fn every_law_ccdf_matches_integrated_pdf() {
        let p = NetworkParams::baseline();
        let laws = [
            ContactLaw::ppp(p.lambda_m),
            ContactLaw::mcp_global(p.lambda_m, p.c_bar),
            ContactLaw::macro_conditional(&p),
            disk_pair_distance_law(p.cluster_radius).unwrap(),
            ContactLaw::intra_cluster(p.c_bar, p.cluster_radius).unwrap(),
            ContactLaw::intra_cluster(1.0, p.cluster_radius).unwrap(),
        ];
        for law in laws {
            let (lo, _) = law.support();
            let end = law.grid_end(1e-9);
            assert!((law.ccdf(lo) - 1.0).abs() < 1e-12, "{law:?}");
            for i in 1..=100 {
                let r = end * i as f64 / 100.0;
                assert!(law.pdf(r) >= 0.0);
                let mass = integrate_finite(|x| law.pdf(x), lo, r, &q()).unwrap();
                assert!((law.ccdf(r) - (1.0 - mass)).abs() < 1e-6, "{law:?} r={r}");
            }
            if law.hi.is_finite() {
                assert!(law.ccdf(law.hi).abs() < 1e-12);
            }
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn ppp_depends_only_on_lambda_r2(lam in 1e-7f64..1e-3, r in 0.0f64..300.0, k in 0.1f64..10.0) {
                let a = ccdf_contact_ppp(r, lam);
                let b = ccdf_contact_ppp(r / k, k * k * lam);
                prop_assert!((a - b).abs() <= 1e-12);
            }

            #[test]
            fn intracluster_stochastically_decreasing(c in 1.0f64..15.0, dc in 0.0f64..5.0, x in 0.0f64..1.0) {
                let r = 2.0 * x;
                let lo = ccdf_ds_intracluster(r, c, 1.0).unwrap();
                let hi = ccdf_ds_intracluster(r, c + dc, 1.0).unwrap();
                prop_assert!(hi <= lo + 1e-15);
            }
        }
    }
}
