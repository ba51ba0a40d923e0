//! Instance configuration files (TOML, or JSON as an alternative) and environment overrides.

use std::fmt;
use std::path::Path;

use factorineq::coeff::{CoeffSystem, ScanSpec};
use factorineq::exprlang::{compile_str, parse, eval_scalar, Expr, ParamMap};
use factorineq::jets::{Interval, MapRef};
use factorineq::par::Execution;
use factorineq::quad::QuadOptions;
use factorineq::verify::VerifyOptions;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::CliError;

pub const ENV_TOL_SCAN: &str = "FACTORINEQ_TOL_SCAN";
pub const ENV_TOL_QUAD: &str = "FACTORINEQ_TOL_QUAD";
pub const ENV_GAP_TOL: &str = "FACTORINEQ_GAP_TOL";

/// An interval endpoint: a finite number, or `"inf"` / `"-inf"`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bound(pub f64);

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum BoundRepr {
    Num(f64),
    Text(String),
}

impl Serialize for Bound {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if self.0.is_finite() {
            BoundRepr::Num(self.0).serialize(s)
        } else {
            BoundRepr::Text(if self.0 > 0.0 { "inf" } else { "-inf" }.into()).serialize(s)
        }
    }
}

impl<'de> Deserialize<'de> for Bound {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        match BoundRepr::deserialize(d)? {
            BoundRepr::Num(v) => Ok(Bound(v)),
            BoundRepr::Text(t) => parse_bound(&t).map(Bound).map_err(serde::de::Error::custom),
        }
    }
}

fn parse_bound(s: &str) -> Result<f64, String> {
    match s.trim() {
        "inf" | "+inf" | "infinity" => Ok(f64::INFINITY),
        "-inf" | "-infinity" => Ok(f64::NEG_INFINITY),
        other => constant(other, &ParamMap::new()).map_err(|e| e.to_string()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScanConfig {
    pub points: usize,
    pub margin: f64,
    pub tol: f64,
}

impl Default for ScanConfig {
    fn default() -> Self {
        let s = ScanSpec::default();
        ScanConfig { points: s.points, margin: s.margin, tol: s.tol }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyConfig {
    pub corpus: usize,
    pub seed: u64,
    pub gap_tol: f64,
    pub residual_tol: f64,
    pub quad_tol: f64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        let v = VerifyOptions::default();
        VerifyConfig { corpus: 16, seed: 0, gap_tol: v.gap_tol, residual_tol: v.residual_tol, quad_tol: v.quad.tol }
    }
}

/// Tolerance knobs shared by every command, after environment overrides.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tolerances {
    pub scan: ScanConfig,
    pub verify: VerifyConfig,
}

impl Tolerances {
    pub fn scan_spec(&self, exec: Execution) -> ScanSpec {
        ScanSpec { points: self.scan.points, margin: self.scan.margin, tol: self.scan.tol, exec, ..ScanSpec::default() }
    }

    pub fn verify_options(&self, exec: Execution) -> VerifyOptions {
        VerifyOptions {
            quad: QuadOptions { tol: self.verify.quad_tol, ..QuadOptions::default() },
            gap_tol: self.verify.gap_tol,
            residual_tol: self.verify.residual_tol,
            exec,
        }
    }

    /// Apply `FACTORINEQ_TOL_SCAN`, `FACTORINEQ_TOL_QUAD` and `FACTORINEQ_GAP_TOL`.
    pub fn apply_env(&mut self) -> Result<(), CliError> {
        for (var, slot) in [
            (ENV_TOL_SCAN, &mut self.scan.tol),
            (ENV_TOL_QUAD, &mut self.verify.quad_tol),
            (ENV_GAP_TOL, &mut self.verify.gap_tol),
        ] {
            if let Ok(raw) = std::env::var(var) {
                *slot = raw
                    .trim()
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite() && *v >= 0.0)
                    .ok_or_else(|| CliError::Usage(format!("{var}={raw:?} is not a nonnegative number")))?;
            }
        }
        Ok(())
    }
}

/// A user-specified coefficient system `a_0 .. a_n` with scan and verification settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecConfig {
    pub n: usize,
    pub domain: [Bound; 2],
    /// Expressions for `a_0 .. a_n`.
    pub coefficients: Vec<String>,
    #[serde(default)]
    pub params: ParamMap,
    #[serde(default)]
    pub scan: ScanConfig,
    #[serde(default)]
    pub verify: VerifyConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Toml,
    Json,
}

impl SpecConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
        let format = match path.extension().and_then(|e| e.to_str()) {
            Some("json") => Format::Json,
            _ => Format::Toml,
        };
        Self::parse(&text, format).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
    }

    pub fn parse(text: &str, format: Format) -> Result<Self, ConfigError> {
        let cfg: SpecConfig = match format {
            Format::Toml => toml::from_str(text).map_err(|e| ConfigError(e.to_string()))?,
            Format::Json => serde_json::from_str(text).map_err(|e| ConfigError(e.to_string()))?,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes to TOML")
    }

    fn validate(&self) -> Result<(), ConfigError> {
        if self.coefficients.len() != self.n + 1 {
            return Err(ConfigError(format!(
                "n = {} needs {} coefficient expressions, found {}",
                self.n,
                self.n + 1,
                self.coefficients.len()
            )));
        }
        if self.n == 0 {
            return Err(ConfigError("n must be at least 1".into()));
        }
        let [a, b] = self.domain;
        if a.0.is_nan() || b.0.is_nan() || a.0 >= b.0 {
            return Err(ConfigError(format!("domain needs a < b, got [{}, {}]", a.0, b.0)));
        }
        for (k, src) in self.coefficients.iter().enumerate() {
            let e = parse(src).map_err(|e| ConfigError(format!("a_{k}: {e}")))?;
            if let Some(p) = e.free_params().into_iter().find(|p| !self.params.contains_key(p)) {
                return Err(ConfigError(format!("a_{k}: parameter `{p}` is not bound in [params]")));
            }
        }
        if self.scan.points < 2 || self.verify.corpus == 0 {
            return Err(ConfigError("scan.points must be >= 2 and verify.corpus >= 1".into()));
        }
        Ok(())
    }

    pub fn interval(&self) -> Interval {
        Interval::new(self.domain[0].0, self.domain[1].0)
    }

    pub fn system(&self) -> Result<CoeffSystem, CliError> {
        let d = self.interval();
        let maps: Vec<MapRef> = self
            .coefficients
            .iter()
            .enumerate()
            .map(|(k, src)| {
                compile_str(src, &self.params, d, &[])
                    .map(|c| std::sync::Arc::new(c) as MapRef)
                    .map_err(|e| CliError::Usage(format!("a_{k} = {src}: {e}")))
            })
            .collect::<Result<_, _>>()?;
        CoeffSystem::new(d, maps).map_err(|e| CliError::Usage(e.to_string()))
    }

    pub fn tolerances(&self) -> Result<Tolerances, CliError> {
        let mut t = Tolerances { scan: self.scan, verify: self.verify };
        t.apply_env()?;
        Ok(t)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

/// SHA-256 of the canonical JSON form of `value`.
pub fn config_hash<T: Serialize>(value: &T) -> String {
    let canonical = serde_json::to_vec(value).expect("config serializes to JSON");
    hex::encode(Sha256::digest(&canonical))
}

fn uses_x(e: &Expr) -> bool {
    match e {
        Expr::Var => true,
        Expr::Num(_) | Expr::Pi | Expr::Param(_) => false,
        Expr::Neg(a) => uses_x(a),
        Expr::Binary(_, l, r) => uses_x(l) || uses_x(r),
        Expr::Call(_, args) => args.iter().any(uses_x),
    }
}

/// A constant expression such as `-1.2`, `pi/2` or `exp(1)`.
pub fn constant(src: &str, params: &ParamMap) -> Result<f64, CliError> {
    if let Ok(v) = src.trim().parse::<f64>() {
        return Ok(v);
    }
    let e = parse(src).map_err(|e| CliError::Usage(format!("`{src}`: {e}")))?;
    if uses_x(&e) {
        return Err(CliError::Usage(format!("`{src}` must be a constant (it uses x)")));
    }
    eval_scalar(&e, params, 0.0).map_err(|e| CliError::Usage(format!("`{src}`: {e}")))
}

/// `a,b` with constant expressions on both sides (`inf` allowed).
pub fn parse_pair(src: &str, what: &str) -> Result<(f64, f64), CliError> {
    let parts: Vec<&str> = src.split(',').collect();
    if parts.len() != 2 {
        return Err(CliError::Usage(format!("{what} expects two comma-separated values, got `{src}`")));
    }
    let a = parse_bound(parts[0]).map_err(|e| CliError::Usage(format!("{what}: {e}")))?;
    let b = parse_bound(parts[1]).map_err(|e| CliError::Usage(format!("{what}: {e}")))?;
    Ok((a, b))
}

/// `k=v` pairs from repeated `--param` flags.
pub fn parse_params(items: &[String]) -> Result<ParamMap, CliError> {
    let mut out = ParamMap::new();
    for item in items {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("--param expects name=value, got `{item}`")))?;
        let v = constant(v, &ParamMap::new())?;
        if out.insert(k.trim().to_string(), v).is_some() {
            return Err(CliError::Usage(format!("parameter `{}` given twice", k.trim())));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"
n = 1
domain = [0, "inf"]
coefficients = ["alpha*x^(gamma/2-1)", "x^(gamma/2)"]

[params]
alpha = -0.5
gamma = 0.0

[scan]
points = 500
"#;

    #[test]
    fn toml_round_trip_is_idempotent() {
        let cfg = SpecConfig::parse(SAMPLE, Format::Toml).unwrap();
        assert_eq!(cfg.domain[1].0, f64::INFINITY);
        assert_eq!(cfg.scan.points, 500);
        assert_eq!(cfg.scan.tol, ScanConfig::default().tol);
        let once = cfg.to_toml();
        let back = SpecConfig::parse(&once, Format::Toml).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(back.to_toml(), once);
    }

    #[test]
    fn json_is_accepted_and_hashes_like_toml() {
        let toml_cfg = SpecConfig::parse(SAMPLE, Format::Toml).unwrap();
        let json = serde_json::to_string(&toml_cfg).unwrap();
        let json_cfg = SpecConfig::parse(&json, Format::Json).unwrap();
        assert_eq!(json_cfg, toml_cfg);
        assert_eq!(config_hash(&json_cfg), config_hash(&toml_cfg));
        assert_eq!(config_hash(&toml_cfg).len(), 64);
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let bad = [
            SAMPLE.replace("n = 1", "n = 2"),
            SAMPLE.replace("alpha = -0.5", ""),
            SAMPLE.replace("[0, \"inf\"]", "[1, 0]"),
            SAMPLE.replace("x^(gamma/2)\"", "x^(\""),
            format!("{SAMPLE}\nunknown = 3\n"),
        ];
        for text in bad {
            assert!(SpecConfig::parse(&text, Format::Toml).is_err(), "{text}");
        }
    }

    #[test]
    fn constants_and_pairs() {
        assert_eq!(constant("-1.2", &ParamMap::new()).unwrap(), -1.2);
        assert!((constant("pi/2", &ParamMap::new()).unwrap() - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
        assert!(constant("x + 1", &ParamMap::new()).is_err());
        assert_eq!(parse_pair("1, inf", "--domain").unwrap(), (1.0, f64::INFINITY));
        assert!(parse_pair("1", "--domain").is_err());
        let p = parse_params(&["alpha=-5".into(), "gamma=0".into()]).unwrap();
        assert_eq!(p["alpha"], -5.0);
        assert!(parse_params(&["alpha".into()]).is_err());
    }
}
