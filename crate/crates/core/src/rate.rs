//! Average ergodic rate under Rayleigh fading.
//!
//! The rate of a user served by tier `k` at distance `x` is
//! `E[ln(1 + SINR)] = \int_0^\infty P[SINR > e^t - 1] dt`, and with unit-mean
//! exponential fading the coverage term factorises into the Laplace
//! transforms of the two tiers' interference. Averaging over the serving
//! distance density and mixing the tiers by their association
//! probabilities gives the network rate. All rates are in nats.

use std::f64::consts::PI;

use crate::association::{assoc_report, macro_serving_kernel, small_serving_kernel, AssocMode};
use crate::distributions::{pair_ccdf, pair_pdf, prob_user_in_disk};
use crate::error::{Error, Result};
use crate::model::{NetworkParams, Tier};
use crate::numerics::{integrate_semi_infinite, try_integrate_finite, QuadSpec};

/// Integrand level below which the `t`-axis is truncated.
pub const T_CUTOFF: f64 = 1e-12;
const T_MAX: f64 = 4096.0;

/// Outer (distance) quadrature tolerances of the nested rate integrals.
pub fn outer_spec() -> QuadSpec {
    QuadSpec::with_tol(1e-7, 1e-6)
}

/// Power, path-loss and bias ratios of each tier relative to the serving tier.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HatRatios {
    pub serving: Tier,
    p_hat: [f64; 2],
    alpha_hat: [f64; 2],
    b_hat: [f64; 2],
}

fn idx(t: Tier) -> usize {
    match t {
        Tier::Macro => 0,
        Tier::Small => 1,
    }
}

impl HatRatios {
    pub fn new(serving: Tier, params: &NetworkParams) -> Self {
        let mut h = HatRatios {
            serving,
            p_hat: [1.0; 2],
            alpha_hat: [1.0; 2],
            b_hat: [1.0; 2],
        };
        for i in [Tier::Macro, Tier::Small] {
            h.p_hat[idx(i)] = params.power(i) / params.power(serving);
            h.alpha_hat[idx(i)] = params.alpha(i) / params.alpha(serving);
            h.b_hat[idx(i)] = params.bias(i) / params.bias(serving);
        }
        h.p_hat[idx(serving)] = 1.0;
        h.alpha_hat[idx(serving)] = 1.0;
        h.b_hat[idx(serving)] = 1.0;
        h
    }

    pub fn p_hat(&self, i: Tier) -> f64 {
        self.p_hat[idx(i)]
    }

    pub fn alpha_hat(&self, i: Tier) -> f64 {
        self.alpha_hat[idx(i)]
    }

    pub fn b_hat(&self, i: Tier) -> f64 {
        self.b_hat[idx(i)]
    }
}

/// `Z(gamma, alpha, B) = gamma^(2/alpha) \int_{(B/gamma)^(2/alpha)}^\infty du / (1 + u^(alpha/2))`.
pub fn z_factor(gamma: f64, alpha: f64, b_hat: f64) -> Result<f64> {
    if !(gamma >= 0.0 && alpha > 2.0 && b_hat >= 0.0) {
        return Err(Error::InvalidParam {
            name: "z_factor",
            reason: format!("need gamma >= 0, alpha > 2, b_hat >= 0; got ({gamma}, {alpha}, {b_hat})"),
        });
    }
    if gamma == 0.0 {
        return Ok(0.0);
    }
    if b_hat.is_infinite() {
        return Ok(0.0);
    }
    let lower = (b_hat / gamma).powf(2.0 / alpha);
    let half = alpha / 2.0;
    // u = lower + scale * v keeps the decay scale near v ~ 1
    let scale = lower.max(1.0);
    let tail = integrate_semi_infinite(
        |v| {
            let u = lower + scale * v;
            scale / (1.0 + u.powf(half))
        },
        0.0,
        &QuadSpec::default(),
    )?;
    Ok(gamma.powf(2.0 / alpha) * tail)
}

/// Laplace transform of tier `interferer`'s interference at
/// `(e^t - 1) x^alpha_k / P_k`, for a user served by tier `serving` at
/// distance `x`.
pub fn laplace_interference(interferer: Tier, serving: Tier, x: f64, t: f64, params: &NetworkParams) -> Result<f64> {
    let h = HatRatios::new(serving, params);
    laplace_with(&h, interferer, x, t, params)
}

fn laplace_with(h: &HatRatios, i: Tier, x: f64, t: f64, params: &NetworkParams) -> Result<f64> {
    let lambda = params.density(i);
    if lambda == 0.0 || t == 0.0 {
        return Ok(1.0);
    }
    let alpha_i = params.alpha(i);
    let z = z_factor(t.exp_m1(), alpha_i, h.b_hat(i))?;
    let e = PI * lambda * h.p_hat(i).powf(2.0 / alpha_i) * x.powf(2.0 / h.alpha_hat(i)) * z;
    Ok((-e).exp())
}

/// `\int_0^\infty g(t) dt` for a decaying integrand, truncated where `g`
/// drops below [`T_CUTOFF`].
pub(crate) fn integrate_t_axis<G>(g: G, spec: &QuadSpec) -> Result<f64>
where
    G: Fn(f64) -> Result<f64>,
{
    let mut end = 1.0;
    while g(end)? >= T_CUTOFF {
        end *= 2.0;
        if end > T_MAX {
            return Err(Error::NonConvergence {
                estimate: f64::NAN,
                error: f64::INFINITY,
                subdivisions: 0,
            });
        }
    }
    try_integrate_finite(g, 0.0, end, spec)
}

/// `\int_0^\infty prod_i L_{I_i} dt` for a user of tier `serving` at distance `x`,
/// with the noise factor when `noise_power > 0`.
pub fn conditional_rate(serving: Tier, x: f64, params: &NetworkParams) -> Result<f64> {
    let h = HatRatios::new(serving, params);
    let alpha_k = params.alpha(serving);
    let noise_coeff = params.noise_power * x.powf(alpha_k) / params.power(serving);
    integrate_t_axis(
        |t| {
            let lm = laplace_with(&h, Tier::Macro, x, t, params)?;
            let ls = laplace_with(&h, Tier::Small, x, t, params)?;
            let noise = if noise_coeff > 0.0 {
                (-t.exp_m1() * noise_coeff).exp()
            } else {
                1.0
            };
            Ok(lm * ls * noise)
        },
        &QuadSpec::default(),
    )
}

fn integrate_outer<F>(f: F, a: f64, b: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    try_integrate_finite(f, a, b, &outer_spec())
}

/// `A_k * rate_k`: the serving-distance kernel integrated against the
/// conditional rate, before normalising by the association probability.
fn weighted_rate(tier: Tier, params: &NetworkParams) -> Result<f64> {
    let big_r = params.cluster_radius;
    match tier {
        Tier::Macro => integrate_outer(
            |x| {
                let k = macro_serving_kernel(x, params);
                if k == 0.0 {
                    return Ok(0.0);
                }
                Ok(k * conditional_rate(Tier::Macro, x, params)?)
            },
            0.0,
            big_r,
        ),
        Tier::Small => {
            if params.c_bar < 1.0 {
                return Err(Error::DegenerateCluster(params.c_bar));
            }
            integrate_outer(
                |x| {
                    let k = small_serving_kernel(x, params)?;
                    if k == 0.0 {
                        return Ok(0.0);
                    }
                    Ok(k * conditional_rate(Tier::Small, x, params)?)
                },
                0.0,
                2.0 * big_r,
            )
        }
    }
}

/// Average ergodic rate of a user associated with `tier`, in nats.
pub fn rate_tier(tier: Tier, params: &NetworkParams) -> Result<f64> {
    let report = assoc_report(params, AssocMode::PaperFaithful)?;
    let a = report.prob(tier);
    if a == 0.0 {
        return Err(Error::DivisionByZero("association probability of the serving tier"));
    }
    Ok(weighted_rate(tier, params)? / a)
}

/// How the exponent coefficients `C_j(t)` of the one-shot rate expression
/// are read.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExponentReading {
    /// `C_j(t) = lambda_j P_j^(2/alpha_j) (B_j^(2/alpha_j) + Z_j)`, alongside
    /// the explicit association-exclusion terms, exactly as typeset.
    AsPrinted,
    /// `C_j(t) = lambda_j P_j^(2/alpha_j) Z_j`: the association exclusion is
    /// carried once, by the explicit terms only.
    ExclusionOnce,
}

fn c_coeff(j: Tier, h: &HatRatios, t: f64, params: &NetworkParams, reading: ExponentReading) -> Result<f64> {
    let lambda = params.density(j);
    if lambda == 0.0 {
        return Ok(0.0);
    }
    let a = params.alpha(j);
    let z = z_factor(t.exp_m1(), a, h.b_hat(j))?;
    let bias_term = match reading {
        ExponentReading::AsPrinted => h.b_hat(j).powf(2.0 / a),
        ExponentReading::ExclusionOnce => 0.0,
    };
    Ok(lambda * h.p_hat(j).powf(2.0 / a) * (bias_term + z))
}

fn sum_c(h: &HatRatios, x: f64, t: f64, params: &NetworkParams, reading: ExponentReading) -> Result<f64> {
    let mut s = 0.0;
    for j in [Tier::Macro, Tier::Small] {
        let c = c_coeff(j, h, t, params, reading)?;
        if c != 0.0 {
            s += x.powf(2.0 / h.alpha_hat(j)) * c;
        }
    }
    Ok(s)
}

/// Network rate from the single combined double-integral expression, noise
/// neglected. Independent of the per-tier assembly: no association
/// probability is computed or divided out.
pub fn rate_total_direct(params: &NetworkParams, reading: ExponentReading) -> Result<f64> {
    let big_r = params.cluster_radius;
    let lm = params.lambda_m;
    let ls = params.lambda_s();

    let hm = HatRatios::new(Tier::Macro, params);
    let s_alpha = params.alpha_small;
    let excl_small = ls * (hm.p_hat(Tier::Small) * hm.b_hat(Tier::Small)).powf(2.0 / s_alpha);
    let pref = 2.0 * PI * lm / prob_user_in_disk(params);
    let macro_part = integrate_outer(
        |x| {
            let excl = if ls == 0.0 {
                0.0
            } else {
                excl_small * x.powf(2.0 / hm.alpha_hat(Tier::Small))
            };
            let inner = integrate_t_axis(
                |t| {
                    let e = sum_c(&hm, x, t, params, reading)? + excl - lm * x * x;
                    Ok((-PI * e - PI * lm * big_r * big_r).exp())
                },
                &QuadSpec::default(),
            )?;
            Ok(x * inner)
        },
        0.0,
        big_r,
    )? * pref;

    if params.c_bar == 0.0 {
        return Ok(macro_part);
    }
    if params.c_bar < 1.0 {
        return Err(Error::DegenerateCluster(params.c_bar));
    }
    let hs = HatRatios::new(Tier::Small, params);
    let m_alpha = params.alpha_macro;
    let excl_macro = lm * (hs.p_hat(Tier::Macro) * hs.b_hat(Tier::Macro)).powf(2.0 / m_alpha);
    let c = params.c_bar;
    let small_part = integrate_outer(
        |x| {
            let shape = pair_ccdf(x, big_r).powf(c - 1.0) * pair_pdf(x, big_r);
            if shape == 0.0 {
                return Ok(0.0);
            }
            let excl = excl_macro * x.powf(2.0 / hs.alpha_hat(Tier::Macro));
            let inner = integrate_t_axis(
                |t| {
                    let e = sum_c(&hs, x, t, params, reading)? + excl;
                    Ok((-PI * e).exp())
                },
                &QuadSpec::default(),
            )?;
            Ok(inner * shape)
        },
        0.0,
        2.0 * big_r,
    )? * c;

    Ok(macro_part + small_part)
}

/// Agreement between the per-tier assembly and the one-shot expression.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossCheck {
    /// One-shot expression with the exclusion carried once.
    pub direct: f64,
    /// One-shot expression as typeset.
    pub direct_as_printed: f64,
    /// `|assembled - direct| / assembled`.
    pub rel_diff: f64,
    pub rel_diff_as_printed: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateReport {
    pub rate_macro: f64,
    pub rate_small: f64,
    /// `a_macro * rate_macro + a_small * rate_small`.
    pub rate_total: f64,
    pub a_macro: f64,
    pub a_small: f64,
    pub cross_check: Option<CrossCheck>,
}

impl RateReport {
    /// Mixes per-tier rates by association probability.
    pub fn from_parts(rate_macro: f64, rate_small: f64, a_macro: f64, a_small: f64) -> Self {
        RateReport {
            rate_macro,
            rate_small,
            rate_total: a_macro * rate_macro + a_small * rate_small,
            a_macro,
            a_small,
            cross_check: None,
        }
    }
}

/// Per-tier rates and the network rate, without the cross-check.
pub fn rate_assembled(params: &NetworkParams) -> Result<RateReport> {
    let report = assoc_report(params, AssocMode::PaperFaithful)?;
    let rate_macro = weighted_rate(Tier::Macro, params)? / report.a_macro;
    let rate_small = if report.a_small == 0.0 {
        0.0
    } else {
        weighted_rate(Tier::Small, params)? / report.a_small
    };
    Ok(RateReport::from_parts(
        rate_macro,
        rate_small,
        report.a_macro,
        report.a_small,
    ))
}

/// Network rate by per-tier assembly, plus the one-shot expression under
/// both readings and their relative differences.
pub fn rate_total(params: &NetworkParams) -> Result<RateReport> {
    let mut r = rate_assembled(params)?;
    let direct = rate_total_direct(params, ExponentReading::ExclusionOnce)?;
    let printed = rate_total_direct(params, ExponentReading::AsPrinted)?;
    r.cross_check = Some(CrossCheck {
        direct,
        direct_as_printed: printed,
        rel_diff: (r.rate_total - direct).abs() / r.rate_total.abs(),
        rel_diff_as_printed: (r.rate_total - printed).abs() / r.rate_total.abs(),
    });
    Ok(r)
}
