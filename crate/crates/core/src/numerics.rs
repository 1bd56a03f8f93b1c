//! Adaptive 1-D quadrature.
//!
//! Globally adaptive bisection driven by a 7-point Gauss / 15-point Kronrod
//! pair. Both rules are open, so integrands with integrable endpoint
//! singularities (square-root edges, `1/sqrt(x)`) are never evaluated at the
//! endpoints.

use std::cell::RefCell;
use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

/// Tolerances and subdivision budget for one adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadSpec {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadSpec {
    fn default() -> Self {
        QuadSpec {
            abs_tol: 1e-10,
            rel_tol: 1e-9,
            max_subdivisions: 2000,
        }
    }
}

impl QuadSpec {
    pub fn with_tol(abs_tol: f64, rel_tol: f64) -> Self {
        QuadSpec {
            abs_tol,
            rel_tol,
            ..Default::default()
        }
    }

    fn check(&self) -> Result<()> {
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0) {
            return Err(Error::InvalidParam {
                name: "quad_spec",
                reason: "tolerances must be > 0".into(),
            });
        }
        if self.max_subdivisions == 0 {
            return Err(Error::InvalidParam {
                name: "quad_spec",
                reason: "max_subdivisions must be >= 1".into(),
            });
        }
        Ok(())
    }
}

/// Value, error estimate and work of a finished integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub abs_error: f64,
    pub subdivisions: usize,
}

// Kronrod abscissae on [0, 1]; the Gauss nodes are the odd-indexed entries.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    // Largest error first; ties broken by position so the order is total.
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Panel {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut res_g = fc * WG[3];
    let mut res_k = fc * WGK[7];
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = res_k * half;
    res_abs *= half.abs();
    res_asc *= half.abs();
    let mut error = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && error != 0.0 {
        error = res_asc * (200.0 * error / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * res_abs);
    }
    Panel { a, b, value, error }
}

/// Adaptive integration of `f` over `[a, b]` with the full error report.
pub fn integrate_adaptive<F>(f: F, a: f64, b: f64, spec: &QuadSpec) -> Result<QuadResult>
where
    F: Fn(f64) -> f64,
{
    spec.check()?;
    if a.is_nan() || b.is_nan() || a > b {
        return Err(Error::InvalidParam {
            name: "interval",
            reason: format!("need a <= b, got [{a}, {b}]"),
        });
    }
    if a == b {
        return Ok(QuadResult {
            value: 0.0,
            abs_error: 0.0,
            subdivisions: 0,
        });
    }

    let first = gk15(&f, a, b);
    let mut value = first.value;
    let mut error = first.error;
    let mut heap = BinaryHeap::new();
    heap.push(first);
    let mut subdivisions = 1;

    loop {
        if !value.is_finite() || !error.is_finite() {
            return Err(Error::NonConvergence {
                estimate: value,
                error,
                subdivisions,
            });
        }
        if error <= spec.abs_tol.max(spec.rel_tol * value.abs()) {
            // Re-sum so the result does not depend on update rounding.
            let value: f64 = heap.iter().map(|p| p.value).sum();
            let error: f64 = heap.iter().map(|p| p.error).sum();
            return Ok(QuadResult {
                value,
                abs_error: error,
                subdivisions,
            });
        }
        if subdivisions >= spec.max_subdivisions {
            return Err(Error::NonConvergence {
                estimate: value,
                error,
                subdivisions,
            });
        }
        let worst = heap.pop().expect("heap holds at least one panel");
        let mid = 0.5 * (worst.a + worst.b);
        if !(worst.a < mid && mid < worst.b) {
            // Panel too narrow to split in floating point.
            return Err(Error::NonConvergence {
                estimate: value,
                error,
                subdivisions,
            });
        }
        let left = gk15(&f, worst.a, mid);
        let right = gk15(&f, mid, worst.b);
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        subdivisions += 1;
    }
}

/// `\int_a^b f(x) dx`.
pub fn integrate_finite<F>(f: F, a: f64, b: f64, spec: &QuadSpec) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    integrate_adaptive(f, a, b, spec).map(|r| r.value)
}

/// [`integrate_finite`] for a fallible integrand; the first error raised by
/// `f` is returned in place of the quadrature result.
pub fn try_integrate_finite<F>(f: F, a: f64, b: f64, spec: &QuadSpec) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let failure: RefCell<Option<Error>> = RefCell::new(None);
    let v = integrate_finite(
        |x| match f(x) {
            Ok(v) => v,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                f64::NAN
            }
        },
        a,
        b,
        spec,
    );
    match failure.into_inner() {
        Some(e) => Err(e),
        None => v,
    }
}

/// `\int_a^\infty f(t) dt` via `t = a + (1 - s)/s`, `s` in `(0, 1]`.
pub fn integrate_semi_infinite<F>(f: F, a: f64, spec: &QuadSpec) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    if !a.is_finite() {
        return Err(Error::InvalidParam {
            name: "interval",
            reason: format!("lower limit must be finite, got {a}"),
        });
    }
    integrate_finite(
        |s| {
            let t = a + (1.0 - s) / s;
            let v = f(t);
            if v == 0.0 {
                0.0
            } else {
                v / (s * s)
            }
        },
        0.0,
        1.0,
        spec,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn spec() -> QuadSpec {
        QuadSpec::default()
    }

    #[test]
    fn polynomial_exact() {
        let v = integrate_finite(|x| x, 0.0, 1.0, &spec()).unwrap();
        assert!((v - 0.5).abs() < 1e-15);
    }

    #[test]
    fn sine_half_period() {
        let v = integrate_finite(f64::sin, 0.0, PI, &spec()).unwrap();
        assert!((v - 2.0).abs() < 1e-12);
    }

    #[test]
    fn inverse_sqrt_endpoint_singularity() {
        // 2 sqrt(x) antiderivative
        let v = integrate_finite(|x| 1.0 / x.sqrt(), 0.0, 1.0, &spec()).unwrap();
        assert!((v - 2.0).abs() < 1e-8, "{v}");
    }

    #[test]
    fn exponential_tail() {
        let v = integrate_semi_infinite(|t| (-t).exp(), 0.0, &spec()).unwrap();
        assert!((v - 1.0).abs() < 1e-10);
    }

    #[test]
    fn arctan_tails() {
        let v = integrate_semi_infinite(|u| 1.0 / (1.0 + u * u), 0.0, &spec()).unwrap();
        assert!((v - PI / 2.0).abs() < 1e-9);
        let v = integrate_semi_infinite(|u| 1.0 / (1.0 + u * u), 1.0, &spec()).unwrap();
        assert!((v - PI / 4.0).abs() < 1e-9);
    }

    #[test]
    fn empty_interval_is_zero() {
        assert_eq!(integrate_finite(|x| x, 2.0, 2.0, &spec()).unwrap(), 0.0);
    }

    #[test]
    fn reversed_interval_rejected() {
        assert!(integrate_finite(|x| x, 1.0, 0.0, &spec()).is_err());
    }

    #[test]
    fn budget_exhaustion_reports_nonconvergence() {
        let tight = QuadSpec {
            abs_tol: 1e-15,
            rel_tol: 1e-15,
            max_subdivisions: 3,
        };
        let err = integrate_finite(|x| (1.0 / x).sin() / x.sqrt(), 0.0, 1.0, &tight).unwrap_err();
        assert!(matches!(err, Error::NonConvergence { .. }));
    }

    #[test]
    fn bad_spec_rejected() {
        let s = QuadSpec {
            max_subdivisions: 0,
            ..QuadSpec::default()
        };
        assert!(integrate_finite(|x| x, 0.0, 1.0, &s).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]

            #[test]
            fn linearity(al in -3.0f64..3.0, be in -3.0f64..3.0, w in 0.5f64..4.0) {
                let s = spec();
                let f = |x: f64| (w * x).cos();
                let g = |x: f64| x * x * (-x).exp();
                let lhs = integrate_finite(|x| al * f(x) + be * g(x), 0.0, 3.0, &s).unwrap();
                let rhs = al * integrate_finite(f, 0.0, 3.0, &s).unwrap()
                    + be * integrate_finite(g, 0.0, 3.0, &s).unwrap();
                let tol = 10.0 * s.abs_tol.max(s.rel_tol * lhs.abs().max(rhs.abs()));
                prop_assert!((lhs - rhs).abs() <= tol, "{lhs} vs {rhs}");
            }

            #[test]
            fn interval_additivity(c in 0.01f64..0.99) {
                let s = spec();
                let f = |x: f64| 1.0 / (x.sqrt() + 0.1) + (3.0 * x).sin();
                let whole = integrate_finite(f, 0.0, 1.0, &s).unwrap();
                let split = integrate_finite(f, 0.0, c, &s).unwrap() + integrate_finite(f, c, 1.0, &s).unwrap();
                let tol = 10.0 * s.abs_tol.max(s.rel_tol * whole.abs());
                prop_assert!((whole - split).abs() <= tol, "{whole} vs {split}");
            }
        }
    }
}
