//! Maximum biased-received-power association.
//!
//! A user joins the tier whose nearest base station gives the larger
//! `P_j D_j^(-alpha_j) B_j`. The macro probability integrates the small-tier
//! CCDF at the equivalent threshold against the conditional macro contact
//! density over `[0, R]`; the small-cell probability integrates the macro
//! Poisson CCDF against the intra-cluster minimum-distance density over
//! `[0, 2R]`. Both integrals are taken on a unit interval (`r = R u` and
//! `r = 2R u`), so for equal exponents they depend on `lambda_m` and `R` only
//! through `lambda_m R^2`.

use std::f64::consts::PI;
use std::fmt;

use crate::distributions::{pair_ccdf, pair_pdf, prob_user_in_disk};
use crate::error::{Error, Result};
use crate::model::{DsModel, NetworkParams, Tier};
use crate::numerics::{integrate_finite, QuadSpec};

/// `P_tier * distance^(-alpha_tier) * B_tier`.
pub fn biased_power(tier: Tier, distance: f64, params: &NetworkParams) -> Result<f64> {
    if distance <= 0.0 {
        return Err(Error::ZeroDistance);
    }
    Ok(params.power(tier) * distance.powf(-params.alpha(tier)) * params.bias(tier))
}

/// Serving tier for given nearest distances. `None` means no small cell
/// exists. Ties go to the macro tier.
pub fn serving_tier(d_macro: f64, d_small: Option<f64>, params: &NetworkParams) -> Tier {
    let Some(d_small) = d_small else {
        return Tier::Macro;
    };
    let pm = params.p_macro * d_macro.powf(-params.alpha_macro) * params.b_macro;
    let ps = params.p_small * d_small.powf(-params.alpha_small) * params.b_small;
    if ps > pm {
        Tier::Small
    } else {
        Tier::Macro
    }
}

/// Macro-favouring threshold factor `(P_m B_m / (P_s B_s))^(-2/alpha_s)`.
fn macro_threshold_factor(params: &NetworkParams) -> f64 {
    params.macro_advantage().powf(-2.0 / params.alpha_small)
}

/// Small-favouring threshold factor `(P_s B_s / (P_m B_m))^(-2/alpha_m)`.
fn small_threshold_factor(params: &NetworkParams) -> f64 {
    (1.0 / params.macro_advantage()).powf(-2.0 / params.alpha_macro)
}

/// `A_m f_Xm(x)`: the unnormalised macro serving-distance density, with the
/// clustered-process contact law standing in for `D_s`. Zero outside `[0, R]`.
pub fn macro_serving_kernel(x: f64, params: &NetworkParams) -> f64 {
    let big_r = params.cluster_radius;
    if x < 0.0 || x > big_r {
        return 0.0;
    }
    let l = PI * params.lambda_m;
    let small = if params.c_bar == 0.0 {
        0.0
    } else {
        l * params.c_bar * macro_threshold_factor(params) * x.powf(2.0 * params.alpha_macro / params.alpha_small)
    };
    2.0 * l * x * (-small - l * (big_r * big_r - x * x)).exp() / prob_user_in_disk(params)
}

/// `A_s f_Xs(x)`: the unnormalised small-cell serving-distance density.
/// Zero outside `[0, 2R]`.
pub fn small_serving_kernel(x: f64, params: &NetworkParams) -> Result<f64> {
    require_cluster(params.c_bar)?;
    let big_r = params.cluster_radius;
    if x <= 0.0 || x >= 2.0 * big_r {
        return Ok(0.0);
    }
    let macro_ccdf = (-PI
        * params.lambda_m
        * small_threshold_factor(params)
        * x.powf(2.0 * params.alpha_small / params.alpha_macro))
    .exp();
    let c = params.c_bar;
    Ok(c * macro_ccdf * pair_ccdf(x, big_r).powf(c - 1.0) * pair_pdf(x, big_r))
}

fn require_cluster(c_bar: f64) -> Result<()> {
    if c_bar >= 1.0 && c_bar.is_finite() {
        Ok(())
    } else {
        Err(Error::DegenerateCluster(c_bar))
    }
}

/// Closed-form macro association probability for equal path-loss exponents
/// and the clustered-process contact law. `None` when exponents differ.
pub fn assoc_prob_macro_closed_form(params: &NetworkParams) -> Option<f64> {
    if !params.equal_exponents() {
        return None;
    }
    if params.c_bar == 0.0 {
        return Some(1.0);
    }
    let x = params.disk_load();
    let ck = params.c_bar * macro_threshold_factor(params);
    let y = ck - 1.0;
    let denom = prob_user_in_disk(params);
    let v = if y == 0.0 {
        // limit of (1 - e^{-xy}) / y
        (-x).exp() * x / denom
    } else if y.abs() < 0.5 {
        (-x).exp() * (-(-x * y).exp_m1()) / (y * denom)
    } else {
        ((-x).exp() - (-x * ck).exp()) / (y * denom)
    };
    Some(v)
}

/// Macro association probability by quadrature, for either `D_s` law.
pub fn assoc_prob_macro_quadrature(params: &NetworkParams, ds_model: DsModel) -> Result<f64> {
    let big_r = params.cluster_radius;
    let spec = QuadSpec::default();
    match ds_model {
        DsModel::GlobalMcp => {
            if params.c_bar == 0.0 {
                return Ok(1.0);
            }
            let x = params.disk_load();
            let p = 2.0 * params.alpha_macro / params.alpha_small;
            // pi lambda_m c_bar K R^p, split so that lambda_m R^2 stays intact when p = 2
            let coeff = if p == 2.0 {
                x * params.c_bar * macro_threshold_factor(params)
            } else {
                PI * params.lambda_m * params.c_bar * macro_threshold_factor(params) * big_r.powf(p)
            };
            let pref = 2.0 * x / prob_user_in_disk(params);
            let v = integrate_finite(|u| u * (-coeff * u.powf(p) - x * (1.0 - u * u)).exp(), 0.0, 1.0, &spec)?;
            Ok(pref * v)
        }
        DsModel::IntraCluster => {
            require_cluster(params.c_bar)?;
            let scale = params.macro_advantage().powf(-1.0 / params.alpha_small);
            let e = params.alpha_macro / params.alpha_small;
            let x = params.disk_load();
            let pref = 2.0 * x / prob_user_in_disk(params);
            let c = params.c_bar;
            let v = integrate_finite(
                |u| {
                    let thr = scale * (big_r * u).powf(e);
                    u * (-x * (1.0 - u * u)).exp() * pair_ccdf(thr, big_r).powf(c)
                },
                0.0,
                1.0,
                &spec,
            )?;
            Ok(pref * v)
        }
    }
}

/// How a probability was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Closure {
    ClosedForm,
    Quadrature,
}

impl fmt::Display for Closure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(match self {
            Closure::ClosedForm => "closed_form",
            Closure::Quadrature => "quadrature",
        })
    }
}

/// Macro association probability. With equal exponents and the clustered
/// contact law this is the closed form; otherwise quadrature.
pub fn assoc_prob_macro(params: &NetworkParams, ds_model: DsModel) -> Result<f64> {
    assoc_prob_macro_with_closure(params, ds_model).map(|(v, _)| v)
}

fn assoc_prob_macro_with_closure(params: &NetworkParams, ds_model: DsModel) -> Result<(f64, Closure)> {
    if ds_model == DsModel::GlobalMcp {
        if let Some(v) = assoc_prob_macro_closed_form(params) {
            return Ok((v, Closure::ClosedForm));
        }
    }
    Ok((assoc_prob_macro_quadrature(params, ds_model)?, Closure::Quadrature))
}

/// Small-cell association probability, quadrature over `(0, 2R)` after
/// `r = 2R u`. Needs `c_bar >= 1`.
pub fn assoc_prob_small(params: &NetworkParams) -> Result<f64> {
    require_cluster(params.c_bar)?;
    let c = params.c_bar;
    let p = 2.0 * params.alpha_small / params.alpha_macro;
    let coeff = if p == 2.0 {
        4.0 * params.disk_load() * small_threshold_factor(params)
    } else {
        PI * params.lambda_m * small_threshold_factor(params) * (2.0 * params.cluster_radius).powf(p)
    };
    // unit-radius pair law on l = 2u, Jacobian 2
    integrate_finite(
        |u| {
            let l = 2.0 * u;
            c * (-coeff * u.powf(p)).exp() * pair_ccdf(l, 1.0).powf(c - 1.0) * pair_pdf(l, 1.0) * 2.0
        },
        0.0,
        1.0,
        &QuadSpec::default(),
    )
}

/// How the two tier probabilities are combined into a report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AssocMode {
    /// Each probability from its own formula, exactly as derived; their sum
    /// is reported and need not be one.
    #[default]
    PaperFaithful,
    /// Small-cell probability from its formula, macro as the complement.
    Consistent,
}

impl AssocMode {
    pub fn as_str(self) -> &'static str {
        match self {
            AssocMode::PaperFaithful => "paper_faithful",
            AssocMode::Consistent => "consistent",
        }
    }
}

impl fmt::Display for AssocMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.as_str())
    }
}

impl std::str::FromStr for AssocMode {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "paper" | "paper_faithful" => Ok(AssocMode::PaperFaithful),
            "consistent" => Ok(AssocMode::Consistent),
            _ => Err(format!("unknown association mode `{s}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AssociationReport {
    pub a_macro: f64,
    pub a_small: f64,
    pub ds_model_macro: DsModel,
    pub ds_model_small: DsModel,
    /// Mean users per macro BS.
    pub load_macro: f64,
    /// Mean users per small BS.
    pub load_small: f64,
    /// Closure of the macro-side probability.
    pub closure: Closure,
    pub mode: AssocMode,
}

impl AssociationReport {
    pub fn sum(&self) -> f64 {
        self.a_macro + self.a_small
    }

    pub fn prob(&self, tier: Tier) -> f64 {
        match tier {
            Tier::Macro => self.a_macro,
            Tier::Small => self.a_small,
        }
    }
}

/// Mean users per base station of a tier, `A_k lambda_u / lambda_k`.
pub fn mean_load(assoc_prob: f64, lambda_u: f64, lambda_tier: f64) -> f64 {
    if assoc_prob == 0.0 || lambda_tier == 0.0 {
        0.0
    } else {
        assoc_prob * lambda_u / lambda_tier
    }
}

/// Association report with the clustered-process `D_s` law on the macro side.
pub fn assoc_report(params: &NetworkParams, mode: AssocMode) -> Result<AssociationReport> {
    assoc_report_with(params, mode, DsModel::GlobalMcp)
}

/// Association report; `macro_ds` picks the `D_s` law for the macro-side
/// probability in [`AssocMode::PaperFaithful`].
pub fn assoc_report_with(params: &NetworkParams, mode: AssocMode, macro_ds: DsModel) -> Result<AssociationReport> {
    // No small cells at all: single-tier network.
    let a_small = if params.c_bar == 0.0 {
        0.0
    } else {
        assoc_prob_small(params)?
    };
    let (a_macro, ds_model_macro, closure) = match mode {
        AssocMode::PaperFaithful => {
            let (v, closure) = assoc_prob_macro_with_closure(params, macro_ds)?;
            (v, macro_ds, closure)
        }
        AssocMode::Consistent => (1.0 - a_small, DsModel::IntraCluster, Closure::Quadrature),
    };
    Ok(AssociationReport {
        a_macro,
        a_small,
        ds_model_macro,
        ds_model_small: DsModel::IntraCluster,
        load_macro: mean_load(a_macro, params.lambda_u, params.lambda_m),
        load_small: mean_load(a_small, params.lambda_u, params.lambda_s()),
        closure,
        mode,
    })
}

/// Density of the distance to the serving BS of `tier`, given the tier's
/// association probability as normaliser. Macro support `[0, R]`, small
/// support `[0, 2R]`.
pub fn pdf_serving_distance(x: f64, tier: Tier, params: &NetworkParams, assoc_prob: f64) -> Result<f64> {
    if assoc_prob == 0.0 {
        return Err(Error::DivisionByZero("association probability of the serving tier"));
    }
    let k = match tier {
        Tier::Macro => macro_serving_kernel(x, params),
        Tier::Small => small_serving_kernel(x, params)?,
    };
    Ok(k / assoc_prob)
}

/// Serving-distance law of one tier with its normaliser precomputed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ServingDistance {
    pub tier: Tier,
    pub params: NetworkParams,
    pub assoc_prob: f64,
}

impl ServingDistance {
    /// Macro side uses the clustered-process contact law, small side the
    /// intra-cluster law, matching their association probabilities.
    pub fn new(tier: Tier, params: &NetworkParams) -> Result<Self> {
        let assoc_prob = match tier {
            Tier::Macro => assoc_prob_macro(params, DsModel::GlobalMcp)?,
            Tier::Small => assoc_prob_small(params)?,
        };
        if assoc_prob == 0.0 {
            return Err(Error::DivisionByZero("association probability of the serving tier"));
        }
        Ok(ServingDistance {
            tier,
            params: *params,
            assoc_prob,
        })
    }

    pub fn support(&self) -> (f64, f64) {
        match self.tier {
            Tier::Macro => (0.0, self.params.cluster_radius),
            Tier::Small => (0.0, 2.0 * self.params.cluster_radius),
        }
    }

    pub fn pdf(&self, x: f64) -> f64 {
        pdf_serving_distance(x, self.tier, &self.params, self.assoc_prob).unwrap_or(0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::pdf_dm_conditional;

    fn base() -> NetworkParams {
        NetworkParams::baseline()
    }

    fn with_load_and_advantage(x: f64, c_bar: f64, adv: f64) -> NetworkParams {
        let b = base();
        NetworkParams {
            cluster_radius: (x / (PI * b.lambda_m)).sqrt(),
            c_bar,
            b_macro: adv * b.p_small / b.p_macro,
            b_small: 1.0,
            ..b
        }
    }

    #[test]
    fn biased_power_values() {
        let p = base();
        assert_eq!(biased_power(Tier::Macro, 1.0, &p).unwrap(), p.p_macro);
        let doubled = NetworkParams { b_macro: 2.0, ..p };
        assert_eq!(
            biased_power(Tier::Macro, 37.0, &doubled).unwrap(),
            2.0 * biased_power(Tier::Macro, 37.0, &p).unwrap()
        );
        let v = biased_power(Tier::Macro, 100.0, &p).unwrap();
        assert!((v - 1.99526e-6).abs() < 1e-10, "{v}");
        assert_eq!(biased_power(Tier::Small, 0.0, &p), Err(Error::ZeroDistance));
    }

    #[test]
    fn serving_tier_rule() {
        let p = base();
        assert_eq!(serving_tier(50.0, None, &p), Tier::Macro);
        // 20 dB power gap, alpha 4: break-even at d_m = 10^(1/2) d_s
        assert_eq!(serving_tier(100.0, Some(31.0), &p), Tier::Small);
        assert_eq!(serving_tier(100.0, Some(32.0), &p), Tier::Macro);
        let tie = NetworkParams {
            p_small: p.p_macro,
            ..p
        };
        assert_eq!(serving_tier(10.0, Some(10.0), &tie), Tier::Macro);
    }

    #[test]
    fn closed_form_matches_quadrature_on_grid() {
        for x in [0.1, 0.5, 1.0, 2.0, 5.0] {
            for c in [0.5, 1.0, 3.0, 8.0, 20.0] {
                let p = with_load_and_advantage(x, c, 100.0);
                let cf = assoc_prob_macro_closed_form(&p).unwrap();
                let qd = assoc_prob_macro_quadrature(&p, DsModel::GlobalMcp).unwrap();
                assert!((cf - qd).abs() < 1e-7, "x={x} c={c}: {cf} vs {qd}");
            }
        }
    }

    #[test]
    fn closed_form_removable_singularity() {
        // c_bar * K = 1 exactly: advantage 100, alpha 4 gives K = 0.1
        let p = with_load_and_advantage(1.0, 10.0, 100.0);
        let cf = assoc_prob_macro_closed_form(&p).unwrap();
        let qd = assoc_prob_macro_quadrature(&p, DsModel::GlobalMcp).unwrap();
        assert!(cf.is_finite());
        assert!((cf - qd).abs() < 1e-9, "{cf} vs {qd}");
        let x = p.disk_load();
        assert!((cf - x * (-x).exp() / (-(-x).exp_m1())).abs() < 1e-6);
    }

    #[test]
    fn macro_bias_limit() {
        let p = NetworkParams { b_macro: 1e6, ..base() };
        let a = assoc_prob_macro(&p, DsModel::GlobalMcp).unwrap();
        assert!((a - 1.0).abs() < 1e-3, "{a}");
    }

    #[test]
    fn no_small_cells_macro_always_wins() {
        let p = NetworkParams { c_bar: 0.0, ..base() };
        assert_eq!(assoc_prob_macro(&p, DsModel::GlobalMcp).unwrap(), 1.0);
        assert_eq!(assoc_prob_macro_quadrature(&p, DsModel::GlobalMcp).unwrap(), 1.0);
        let r = assoc_report(&p, AssocMode::PaperFaithful).unwrap();
        assert_eq!((r.a_macro, r.a_small, r.load_small), (1.0, 0.0, 0.0));
    }

    #[test]
    fn small_limits() {
        let sparse = NetworkParams {
            lambda_m: 1e-14,
            ..base()
        };
        assert!((assoc_prob_small(&sparse).unwrap() - 1.0).abs() < 1e-6);
        let biased = NetworkParams { b_small: 1e6, ..base() };
        assert!((assoc_prob_small(&biased).unwrap() - 1.0).abs() < 1e-3);
        let degenerate = NetworkParams { c_bar: 0.5, ..base() };
        assert_eq!(assoc_prob_small(&degenerate), Err(Error::DegenerateCluster(0.5)));
        assert!(assoc_prob_macro(&degenerate, DsModel::IntraCluster).is_err());
    }

    #[test]
    fn small_beats_macro_at_unit_bias_consistent() {
        let r = assoc_report(&base(), AssocMode::Consistent).unwrap();
        assert!(r.a_small > r.a_macro, "{r:?}");
        assert_eq!(r.sum(), 1.0);
    }

    #[test]
    fn report_modes_and_loads() {
        let p = base();
        let pf = assoc_report(&p, AssocMode::PaperFaithful).unwrap();
        assert_eq!(pf.closure, Closure::ClosedForm);
        assert_eq!(pf.ds_model_macro, DsModel::GlobalMcp);
        let cons = assoc_report(&p, AssocMode::Consistent).unwrap();
        assert_eq!(cons.a_small, pf.a_small);
        assert_eq!(cons.a_macro + cons.a_small, 1.0);
        assert!((pf.load_macro - pf.a_macro * p.lambda_u / p.lambda_m).abs() < 1e-9);
        assert!((pf.load_small - pf.a_small * p.lambda_u / p.lambda_s()).abs() < 1e-9);
        assert_eq!(mean_load(0.0, 1.0, 1.0), 0.0);
        let unequal = NetworkParams { alpha_small: 3.5, ..p };
        assert_eq!(
            assoc_report(&unequal, AssocMode::PaperFaithful).unwrap().closure,
            Closure::Quadrature
        );
    }

    #[test]
    fn intracluster_macro_probability_sane() {
        let p = base();
        let a = assoc_prob_macro(&p, DsModel::IntraCluster).unwrap();
        assert!((0.0..=1.0).contains(&a));
        // own-cluster daughters sit much closer than the global density suggests
        assert!(a < assoc_prob_macro(&p, DsModel::GlobalMcp).unwrap());
    }

    #[test]
    fn serving_distance_densities_normalised() {
        for c in [1.0, 2.0, 5.0, 10.0] {
            let p = NetworkParams { c_bar: c, ..base() };
            for tier in [Tier::Macro, Tier::Small] {
                let law = ServingDistance::new(tier, &p).unwrap();
                let (lo, hi) = law.support();
                let mass = integrate_finite(|x| law.pdf(x), lo, hi, &QuadSpec::default()).unwrap();
                assert!((mass - 1.0).abs() < 1e-6, "{tier} c={c}: {mass}");
            }
        }
    }

    #[test]
    fn macro_serving_law_collapses_to_contact_law_without_small_bias() {
        let p = NetworkParams { b_small: 0.0, ..base() };
        let law = ServingDistance::new(Tier::Macro, &p).unwrap();
        for i in 0..=50 {
            let x = p.cluster_radius * i as f64 / 50.0;
            assert!((law.pdf(x) - pdf_dm_conditional(x, &p)).abs() < 1e-6 * pdf_dm_conditional(x, &p).max(1e-3));
        }
    }

    #[test]
    fn serving_pdf_needs_nonzero_normaliser() {
        assert!(matches!(
            pdf_serving_distance(1.0, Tier::Macro, &base(), 0.0),
            Err(Error::DivisionByZero(_))
        ));
    }

    #[test]
    fn joint_density_radius_scaling() {
        let p = base();
        for k in [0.5, 2.0, 10.0] {
            let q = NetworkParams {
                lambda_m: p.lambda_m * k * k,
                cluster_radius: p.cluster_radius / k,
                ..p
            };
            let dm = (assoc_prob_macro(&p, DsModel::GlobalMcp).unwrap()
                - assoc_prob_macro(&q, DsModel::GlobalMcp).unwrap())
            .abs();
            let ds = (assoc_prob_small(&p).unwrap() - assoc_prob_small(&q).unwrap()).abs();
            assert!(dm < 1e-9 && ds < 1e-9, "k={k}: {dm} {ds}");
        }
    }

    #[test]
    fn macro_probability_monotone_in_bias_ratio() {
        let p = base();
        let mut prev = -1.0;
        for i in 0..20 {
            let ratio = 10f64.powf(-1.0 + 2.0 * i as f64 / 19.0);
            let q = NetworkParams {
                b_macro: ratio,
                b_small: 1.0,
                ..p
            };
            let a = assoc_prob_macro(&q, DsModel::GlobalMcp).unwrap();
            let c = assoc_report(&q, AssocMode::Consistent).unwrap().a_macro;
            assert!(a >= prev);
            assert!((0.0..=1.0).contains(&c));
            prev = a;
        }
    }
}
