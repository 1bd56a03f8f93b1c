//! Network parameters, unit conversion, and the flat `key = value` config format.
//!
//! Powers are held in linear watts and biases as linear multipliers. The
//! config boundary speaks dBm and dB; [`Config`] keeps those raw values so a
//! run can be written back out and replayed exactly.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Base-station tier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Tier {
    Macro,
    Small,
}

impl Tier {
    pub fn other(self) -> Tier {
        match self {
            Tier::Macro => Tier::Small,
            Tier::Small => Tier::Macro,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Tier::Macro => "macro",
            Tier::Small => "small",
        }
    }
}

impl fmt::Display for Tier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.as_str())
    }
}

/// Which law stands in for the small-tier contact distance `D_s`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DsModel {
    /// Contact distance of the whole clustered process seen from an arbitrary
    /// location: `P[D_s > r] = exp(-pi lambda_m c_bar r^2)`.
    #[default]
    GlobalMcp,
    /// Minimum distance from the user to the daughters of its own cluster,
    /// `P[D_s > r] = [1 - F_L(r)]^c_bar`.
    IntraCluster,
}

impl DsModel {
    pub fn as_str(self) -> &'static str {
        match self {
            DsModel::GlobalMcp => "global_mcp",
            DsModel::IntraCluster => "intra_cluster",
        }
    }
}

impl fmt::Display for DsModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.as_str())
    }
}

impl FromStr for DsModel {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "global" | "global_mcp" | "globalmcp" => Ok(DsModel::GlobalMcp),
            "intra" | "intra_cluster" | "intracluster" => Ok(DsModel::IntraCluster),
            other => Err(format!(
                "unknown ds_model `{other}` (expected global_mcp or intra_cluster)"
            )),
        }
    }
}

/// Physical and model parameters of the two-tier network, in SI units.
///
/// The macro density doubles as the parent density of the small-cell
/// cluster process; there is no separate parent-density field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NetworkParams {
    /// Macro transmit power, W.
    pub p_macro: f64,
    /// Small-cell transmit power, W.
    pub p_small: f64,
    /// Macro association bias (linear).
    pub b_macro: f64,
    /// Small-cell association bias (linear).
    pub b_small: f64,
    pub alpha_macro: f64,
    pub alpha_small: f64,
    /// Macro density, BS per m^2.
    pub lambda_m: f64,
    /// Mean number of small cells per cluster.
    pub c_bar: f64,
    /// Cluster radius, m.
    pub cluster_radius: f64,
    /// In-cluster user density, users per m^2.
    pub lambda_u: f64,
    /// Thermal noise power, W.
    pub noise_power: f64,
}

impl NetworkParams {
    /// Baseline macro density: one macro per disk of radius 500 m.
    pub const BASELINE_LAMBDA_M: f64 = 1.0 / (PI * 500.0 * 500.0);

    /// The baseline scenario: 53/33 dBm, alpha = 4, unit biases, one macro
    /// per pi*500^2 m^2, four small cells per 100 m cluster.
    pub fn baseline() -> Self {
        Config::default().to_params().expect("baseline config is valid")
    }

    /// Small-cell density `lambda_m * c_bar`.
    pub fn lambda_s(&self) -> f64 {
        self.lambda_m * self.c_bar
    }

    pub fn density(&self, tier: Tier) -> f64 {
        match tier {
            Tier::Macro => self.lambda_m,
            Tier::Small => self.lambda_s(),
        }
    }

    pub fn power(&self, tier: Tier) -> f64 {
        match tier {
            Tier::Macro => self.p_macro,
            Tier::Small => self.p_small,
        }
    }

    pub fn bias(&self, tier: Tier) -> f64 {
        match tier {
            Tier::Macro => self.b_macro,
            Tier::Small => self.b_small,
        }
    }

    pub fn alpha(&self, tier: Tier) -> f64 {
        match tier {
            Tier::Macro => self.alpha_macro,
            Tier::Small => self.alpha_small,
        }
    }

    /// `P_m B_m / (P_s B_s)`, the biased power ratio in favour of the macro tier.
    pub fn macro_advantage(&self) -> f64 {
        (self.p_macro * self.b_macro) / (self.p_small * self.b_small)
    }

    pub fn equal_exponents(&self) -> bool {
        self.alpha_macro == self.alpha_small
    }

    /// `pi * lambda_m * R^2`: the expected number of macros in one cluster disk.
    pub fn disk_load(&self) -> f64 {
        PI * self.lambda_m * self.cluster_radius * self.cluster_radius
    }

    /// Checks every invariant and hands the parameters back unchanged.
    pub fn validate(self) -> Result<Self> {
        validate(self)
    }
}

fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParam {
        name,
        reason: reason.into(),
    }
}

fn positive(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(invalid(name, format!("must be finite and > 0, got {v}")))
    }
}

fn non_negative(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(invalid(name, format!("must be finite and >= 0, got {v}")))
    }
}

fn exponent(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v > 2.0 {
        Ok(())
    } else {
        Err(invalid(name, format!("path-loss exponent must exceed 2, got {v}")))
    }
}

/// Returns `params` unchanged iff all invariants hold, otherwise the first
/// violated one by field name.
pub fn validate(params: NetworkParams) -> Result<NetworkParams> {
    positive("p_macro", params.p_macro)?;
    positive("p_small", params.p_small)?;
    non_negative("b_macro", params.b_macro)?;
    non_negative("b_small", params.b_small)?;
    if params.b_macro == 0.0 && params.b_small == 0.0 {
        return Err(invalid("b_small", "both biases are zero"));
    }
    exponent("alpha_macro", params.alpha_macro)?;
    exponent("alpha_small", params.alpha_small)?;
    positive("lambda_m", params.lambda_m)?;
    non_negative("c_bar", params.c_bar)?;
    positive("cluster_radius", params.cluster_radius)?;
    positive("lambda_u", params.lambda_u)?;
    non_negative("noise_power", params.noise_power)?;
    Ok(params)
}

/// dBm to watts: `10^((p - 30) / 10)`.
pub fn dbm_to_watts(p_dbm: f64) -> f64 {
    10f64.powf((p_dbm - 30.0) / 10.0)
}

/// dB to a linear ratio.
pub fn db_to_linear(x_db: f64) -> f64 {
    10f64.powf(x_db / 10.0)
}

/// Recognised config keys, in file order.
pub const CONFIG_KEYS: [&str; 12] = [
    "p_macro_dbm",
    "p_small_dbm",
    "b_macro_db",
    "b_small_db",
    "alpha_macro",
    "alpha_small",
    "lambda_m",
    "c_bar",
    "cluster_radius_m",
    "lambda_u",
    "noise_w",
    "ds_model",
];

/// Raw configuration values as they appear in a params file.
///
/// Keys missing from a file keep their baseline value.
#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub p_macro_dbm: f64,
    pub p_small_dbm: f64,
    pub b_macro_db: f64,
    pub b_small_db: f64,
    pub alpha_macro: f64,
    pub alpha_small: f64,
    pub lambda_m: f64,
    pub c_bar: f64,
    pub cluster_radius_m: f64,
    pub lambda_u: f64,
    pub noise_w: f64,
    pub ds_model: DsModel,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            p_macro_dbm: 53.0,
            p_small_dbm: 33.0,
            b_macro_db: 0.0,
            b_small_db: 0.0,
            alpha_macro: 4.0,
            alpha_small: 4.0,
            lambda_m: NetworkParams::BASELINE_LAMBDA_M,
            c_bar: 4.0,
            cluster_radius_m: 100.0,
            lambda_u: 1e-4,
            noise_w: 0.0,
            ds_model: DsModel::GlobalMcp,
        }
    }
}

impl Config {
    /// Parses `key = value` lines on top of the baseline. `#` starts a comment.
    pub fn parse(text: &str) -> Result<Config> {
        let mut cfg = Config::default();
        for (i, raw) in text.lines().enumerate() {
            let line = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Config {
                line: i + 1,
                message: format!("expected `key = value`, got `{line}`"),
            })?;
            cfg.set(key.trim(), value.trim()).map_err(|e| match e {
                Error::Config { message, .. } => Error::Config { line: i + 1, message },
                other => other,
            })?;
        }
        Ok(cfg)
    }

    /// Sets one key from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        if key == "ds_model" {
            self.ds_model = value.parse().map_err(|message| Error::Config { line: 0, message })?;
            return Ok(());
        }
        let slot = match key {
            "p_macro_dbm" => &mut self.p_macro_dbm,
            "p_small_dbm" => &mut self.p_small_dbm,
            "b_macro_db" => &mut self.b_macro_db,
            "b_small_db" => &mut self.b_small_db,
            "alpha_macro" => &mut self.alpha_macro,
            "alpha_small" => &mut self.alpha_small,
            "lambda_m" => &mut self.lambda_m,
            "c_bar" => &mut self.c_bar,
            "cluster_radius_m" => &mut self.cluster_radius_m,
            "lambda_u" => &mut self.lambda_u,
            "noise_w" => &mut self.noise_w,
            _ => return Err(Error::UnknownKey(key.to_string())),
        };
        *slot = value.parse::<f64>().map_err(|_| Error::Config {
            line: 0,
            message: format!("`{key}` expects a number, got `{value}`"),
        })?;
        Ok(())
    }

    /// Textual value of one key, formatted so that parsing it back is exact.
    pub fn get(&self, key: &str) -> Option<String> {
        let v = match key {
            "p_macro_dbm" => self.p_macro_dbm,
            "p_small_dbm" => self.p_small_dbm,
            "b_macro_db" => self.b_macro_db,
            "b_small_db" => self.b_small_db,
            "alpha_macro" => self.alpha_macro,
            "alpha_small" => self.alpha_small,
            "lambda_m" => self.lambda_m,
            "c_bar" => self.c_bar,
            "cluster_radius_m" => self.cluster_radius_m,
            "lambda_u" => self.lambda_u,
            "noise_w" => self.noise_w,
            "ds_model" => return Some(self.ds_model.to_string()),
            _ => return None,
        };
        Some(fmt_f64(v))
    }

    /// Converts to SI units and validates.
    pub fn to_params(&self) -> Result<NetworkParams> {
        NetworkParams {
            p_macro: dbm_to_watts(self.p_macro_dbm),
            p_small: dbm_to_watts(self.p_small_dbm),
            b_macro: db_to_linear(self.b_macro_db),
            b_small: db_to_linear(self.b_small_db),
            alpha_macro: self.alpha_macro,
            alpha_small: self.alpha_small,
            lambda_m: self.lambda_m,
            c_bar: self.c_bar,
            cluster_radius: self.cluster_radius_m,
            lambda_u: self.lambda_u,
            noise_power: self.noise_w,
        }
        .validate()
    }

    /// All keys as `key = value` lines, in a form [`Config::parse`] accepts.
    pub fn render(&self) -> String {
        CONFIG_KEYS
            .iter()
            .map(|k| format!("{k} = {}\n", self.get(k).unwrap()))
            .collect()
    }
}

/// Shortest round-tripping decimal, switching to exponent form for very
/// small or large magnitudes.
pub fn fmt_f64(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || (1e-3..1e7).contains(&a) || !v.is_finite() {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dbm_anchors() {
        assert_eq!(dbm_to_watts(30.0), 1.0);
        assert!((dbm_to_watts(0.0) - 0.001).abs() < 1e-15);
        assert!((dbm_to_watts(53.0) - 199.526).abs() < 1e-3);
    }

    #[test]
    fn alpha_two_rejected() {
        let p = NetworkParams {
            alpha_macro: 2.0,
            ..NetworkParams::baseline()
        };
        let err = p.validate().unwrap_err();
        assert!(err.to_string().contains("path-loss exponent must exceed 2"));
        assert!(matches!(
            err,
            Error::InvalidParam {
                name: "alpha_macro",
                ..
            }
        ));
    }

    #[test]
    fn baseline_accepted() {
        let p = NetworkParams::baseline();
        assert!((p.p_macro - 199.526_231_5).abs() < 1e-6);
        assert!((p.p_small - 1.995_262_3).abs() < 1e-6);
        assert!((p.lambda_m * PI * 500.0 * 500.0 - 1.0).abs() < 1e-15);
        assert_eq!(p.lambda_s(), p.lambda_m * 4.0);
    }

    #[test]
    fn zero_cluster_size_accepted() {
        let p = NetworkParams {
            c_bar: 0.0,
            ..NetworkParams::baseline()
        };
        assert_eq!(p.validate().unwrap(), p);
    }

    #[test]
    fn first_violation_is_reported() {
        let p = NetworkParams {
            p_small: -1.0,
            lambda_m: 0.0,
            ..NetworkParams::baseline()
        };
        assert!(matches!(p.validate(), Err(Error::InvalidParam { name: "p_small", .. })));
    }

    #[test]
    fn config_parse_and_render() {
        let cfg =
            Config::parse("# comment\n  c_bar = 10  # trailing\n\nds_model = intra_cluster\nlambda_m=2e-6\n").unwrap();
        assert_eq!(cfg.c_bar, 10.0);
        assert_eq!(cfg.lambda_m, 2e-6);
        assert_eq!(cfg.ds_model, DsModel::IntraCluster);
        assert_eq!(Config::parse(&cfg.render()).unwrap(), cfg);
    }

    #[test]
    fn config_unknown_key_named() {
        let err = Config::parse("c_bar = 1\nbogus_key = 3\n").unwrap_err();
        assert_eq!(err, Error::UnknownKey("bogus_key".into()));
        assert!(err.to_string().contains("bogus_key"));
    }

    #[test]
    fn config_bad_number_has_line() {
        let err = Config::parse("\nc_bar = lots\n").unwrap_err();
        assert!(matches!(err, Error::Config { line: 2, .. }), "{err:?}");
    }

    #[test]
    fn baseline_lambda_renders_exactly() {
        let cfg = Config::default();
        let back: f64 = cfg.get("lambda_m").unwrap().parse().unwrap();
        assert_eq!(back, cfg.lambda_m);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn dbm_decade_scaling(p in -50.0f64..80.0) {
                let lo = dbm_to_watts(p);
                let hi = dbm_to_watts(p + 10.0);
                prop_assert!(hi > lo);
                prop_assert!((hi / lo - 10.0).abs() < 1e-12);
            }

            #[test]
            fn validate_idempotent(c in 0.0f64..20.0, r in 1.0f64..2000.0, a in 2.01f64..6.0) {
                let p = NetworkParams { c_bar: c, cluster_radius: r, alpha_small: a, ..NetworkParams::baseline() };
                let once = p.validate().unwrap();
                prop_assert_eq!(once.validate().unwrap(), once);
            }

            #[test]
            fn fmt_f64_round_trips(v in proptest::num::f64::NORMAL) {
                prop_assert_eq!(fmt_f64(v).parse::<f64>().unwrap(), v);
            }
        }
    }
}
