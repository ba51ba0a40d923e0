//! Named inequality families: their coefficient systems, the closed-form weights they are
//! expected to produce, and the one-parameter optimizations that pick their constants.
//!
//! Coefficients are written in the expression language where possible. The two Bessel
//! families build `a_0 = -a_1 u'/u` natively from jets of `u`. Expected weights are kept
//! as separate expressions and evaluated in plain floating point, so the comparison with
//! the derived weights does not share code with the jet engine.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::coeff::{derive_weights, scan_grid, scan_nonnegativity, CoeffError, CoeffSystem, ScanReport, ScanSpec, WeightSet};
use crate::exprlang::{compile_str, eval_scalar, parse, Expr, ExprError, ParamMap};
use crate::jets::{check_point, EvalError, Interval, Jet, JetError, MapRef, SmoothMap, MAX_ORDER};
use crate::par::{map_slice, Execution};
use crate::roots::{brent, golden_section_min};
use crate::specials::{bessel_j_jet, bessel_j_with_derivative, bessel_jy, bessel_zero, cylinder_jet, g_zero, iter_exp, SpecialError};
use crate::verify::{test_corpus, verify_corpus, CorpusReport, VerifyOptions};

/// Version of the default parameter manifest below.
pub const MANIFEST_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CatalogError {
    #[error("unknown catalog entry `{0}`")]
    UnknownEntry(String),
    #[error("entry `{entry}` has no parameter `{name}`")]
    UnknownParam { entry: String, name: String },
    #[error("parameter `{name}`: {message}")]
    BadParam { name: String, message: String },
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    Coeff(#[from] CoeffError),
    #[error(transparent)]
    Special(#[from] SpecialError),
    #[error(transparent)]
    Jet(#[from] JetError),
    #[error("midpoint matching system is singular (determinant {det:e})")]
    SingularMatching { det: f64 },
    #[error("optimizer failed: {0}")]
    Optimizer(String),
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ParamSpec {
    pub name: &'static str,
    /// `None` when the default is derived from the other parameters.
    pub default: Option<f64>,
    pub doc: &'static str,
}

const fn p(name: &'static str, default: f64, doc: &'static str) -> ParamSpec {
    ParamSpec { name, default: Some(default), doc }
}

const fn derived(name: &'static str, doc: &'static str) -> ParamSpec {
    ParamSpec { name, default: None, doc }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct EntryInfo {
    pub id: &'static str,
    pub title: &'static str,
    /// Order `n` of the factorization.
    pub order: usize,
    pub domain: &'static str,
    pub params: &'static [ParamSpec],
    pub admissible: &'static str,
}

pub const ENTRIES: [EntryInfo; 13] = [
    EntryInfo {
        id: "hardy_power",
        title: "Power weighted Hardy inequality",
        order: 1,
        domain: "(0, inf)",
        params: &[p("gamma", 0.0, "power of the weight"), derived("alpha", "a_0 amplitude; default (gamma-1)/2")],
        admissible: "alpha (alpha + 1 - gamma) <= 0",
    },
    EntryInfo {
        id: "hardy_interval",
        title: "Power weighted Hardy inequality on a bounded interval",
        order: 1,
        domain: "(a, b)",
        params: &[p("gamma", 0.0, "power of the weight"), p("a", 1.0, "left end, > 0"), p("b", std::f64::consts::E, "right end")],
        admissible: "0 < a < b",
    },
    EntryInfo {
        id: "hardy_log",
        title: "Power weighted Hardy inequality with iterated-log refinement",
        order: 1,
        domain: "(0, R)",
        params: &[
            p("gamma", 0.0, "power of the weight"),
            p("N", 2.0, "number of log factors, 1..=4"),
            p("R", 1.0, "right end"),
            derived("eta", "log scale; default 2 e_N R"),
        ],
        admissible: "eta >= e_N R",
    },
    EntryInfo {
        id: "hardy_bessel",
        title: "Power weighted Hardy inequality with Bessel-zero refinement",
        order: 1,
        domain: "(0, b)",
        params: &[
            p("gamma", 0.0, "power of the derivative weight"),
            p("mu", 0.0, "power of the refinement weight"),
            p("nu", 0.0, "Bessel order, >= 0"),
            p("b", 1.0, "right end"),
        ],
        admissible: "2 + mu - gamma > 0 and 0 <= nu <= |1 - gamma| / (2 + mu - gamma)",
    },
    EntryInfo {
        id: "dist_boundary",
        title: "Distance-to-the-boundary Bessel refinement",
        order: 1,
        domain: "(a, b)",
        params: &[
            p("gamma", 0.0, "power of the derivative weight"),
            p("mu", 0.0, "power of the refinement weight"),
            p("nu", 0.0, "Bessel order, >= 0"),
            p("a", 0.0, "left end"),
            p("b", 2.0, "right end"),
        ],
        admissible: "2 + mu - gamma > 0 and 0 <= nu <= |1 - gamma| / (2 + mu - gamma)",
    },
    EntryInfo {
        id: "log_weight",
        title: "Logarithmic derivative weight with Bessel refinement",
        order: 1,
        domain: "(0, R)",
        params: &[p("R", 1.0, "right end"), p("eta", 2.0, "log scale")],
        admissible: "eta >= R",
    },
    EntryInfo {
        id: "trig_hardy",
        title: "Trigonometric Hardy refinement on (0, pi)",
        order: 1,
        domain: "(0, pi)",
        params: &[p("alpha", -0.5, "a_0 = alpha cot x")],
        admissible: "-1 <= alpha <= 0",
    },
    EntryInfo {
        id: "trig_half",
        title: "Tangent/cotangent refinement on (0, pi/2)",
        order: 1,
        domain: "(0, pi/2)",
        params: &[p("alpha", 0.5, "tan amplitude"), p("beta", 0.5, "cot amplitude")],
        admissible: "alpha, beta in [0, 1]",
    },
    EntryInfo {
        id: "hyperbolic",
        title: "Hyperbolic refinement on (0, inf)",
        order: 1,
        domain: "(0, inf)",
        params: &[p("alpha", 0.5, "tanh amplitude"), p("beta", 0.5, "coth amplitude")],
        admissible: "alpha = beta in [0, 1]",
    },
    EntryInfo {
        id: "trig_weight",
        title: "Cosecant derivative weight on (0, pi)",
        order: 1,
        domain: "(0, pi)",
        params: &[p("alpha", -2.0, "a_0 = alpha cot x")],
        admissible: "alpha in [-4.1995..., 0]",
    },
    EntryInfo {
        id: "power_trig",
        title: "Power weight with cotangent a_0 on (0, 1)",
        order: 1,
        domain: "(0, 1)",
        params: &[p("alpha", -0.5, "a_0 = alpha cot x"), p("gamma", -1.0, "power of the weight")],
        admissible: "alpha in [-1, 0] and gamma <= 0",
    },
    EntryInfo {
        id: "rellich_power",
        title: "Power weighted Rellich inequality",
        order: 2,
        domain: "(0, inf)",
        params: &[
            p("gamma", 0.0, "power of the weight"),
            derived("alpha", "a_1 amplitude; default the larger maximizer"),
            derived("beta", "a_0 amplitude; default alpha (1 - alpha - gamma) / 2"),
        ],
        admissible: "both parameter inequalities of the second-order weights hold",
    },
    EntryInfo {
        id: "rellich_trig",
        title: "Second-order trigonometric inequality on (0, pi)",
        order: 2,
        domain: "(0, pi)",
        params: &[p("beta", 0.5, "a_0 = beta")],
        admissible: "0 <= beta <= 1",
    },
];

pub fn entry_info(id: &str) -> Result<&'static EntryInfo, CatalogError> {
    ENTRIES.iter().find(|e| e.id == id).ok_or_else(|| CatalogError::UnknownEntry(id.to_string()))
}

/// A built catalog entry.
#[derive(Clone)]
pub struct Instance {
    pub id: &'static str,
    /// Resolved user-facing parameters.
    pub params: ParamMap,
    /// Constants computed from the parameters (Bessel zeros, `c`, ...).
    pub derived: ParamMap,
    pub system: CoeffSystem,
    /// Human-readable description of `a_0 .. a_n`.
    pub sources: Vec<String>,
    /// Closed forms of `c_{n,0} .. c_{n,n-1}` as expressions.
    pub expected: Vec<Expr>,
    pub admissible: bool,
}

impl Instance {
    pub fn weights(&self) -> WeightSet {
        derive_weights(&self.system)
    }

    pub fn domain(&self) -> Interval {
        self.system.domain()
    }

    fn all_params(&self) -> ParamMap {
        let mut all = self.params.clone();
        all.extend(self.derived.iter().map(|(k, v)| (k.clone(), *v)));
        all
    }

    /// Expected closed-form values of every `c_{n,m}` at `x`.
    pub fn expected_values(&self, x: f64) -> Result<Vec<f64>, EvalError> {
        let all = self.all_params();
        self.expected.iter().map(|e| eval_scalar(e, &all, x)).collect()
    }
}

fn resolve(info: &EntryInfo, overrides: &ParamMap) -> Result<ParamMap, CatalogError> {
    for name in overrides.keys() {
        if !info.params.iter().any(|p| p.name == name) {
            return Err(CatalogError::UnknownParam { entry: info.id.into(), name: name.clone() });
        }
    }
    for (name, v) in overrides {
        if !v.is_finite() {
            return Err(CatalogError::BadParam { name: name.clone(), message: format!("{v} is not finite") });
        }
    }
    let mut out = ParamMap::new();
    for spec in info.params {
        if let Some(v) = overrides.get(spec.name).copied().or(spec.default) {
            out.insert(spec.name.to_string(), v);
        }
    }
    Ok(out)
}

fn bad(name: &str, message: impl Into<String>) -> CatalogError {
    CatalogError::BadParam { name: name.into(), message: message.into() }
}

fn half_line() -> Interval {
    Interval::new(0.0, f64::INFINITY)
}

/// Build an entry with default parameters overridden by `overrides`.
pub fn instantiate(id: &str, overrides: &ParamMap) -> Result<Instance, CatalogError> {
    let info = entry_info(id)?;
    let mut params = resolve(info, overrides)?;
    let get = |params: &ParamMap, k: &str| params[k];
    let mut derived = ParamMap::new();
    let (domain, coeffs, expected, admissible): (Interval, Vec<Coef>, Vec<&str>, bool);
    match info.id {
        "hardy_power" => {
            let gamma = get(&params, "gamma");
            let alpha = *params.entry("alpha".into()).or_insert((gamma - 1.0) / 2.0);
            domain = half_line();
            coeffs = vec![Coef::Expr("alpha*x^(gamma/2-1)".into()), Coef::Expr("x^(gamma/2)".into())];
            expected = vec!["alpha*(gamma-1-alpha)*x^(gamma-2)"];
            admissible = alpha * (alpha + 1.0 - gamma) <= 0.0;
        }
        "hardy_interval" => {
            let (a, b) = (get(&params, "a"), get(&params, "b"));
            if !(a > 0.0 && a < b) {
                return Err(bad("a", format!("need 0 < a < b, got a = {a}, b = {b}")));
            }
            derived.insert("s".into(), PI / (b / a).ln());
            domain = Interval::new(a, b);
            coeffs = vec![
                Coef::Expr("-x^(gamma/2-1)*((1-gamma)/2 + s*cot(s*ln(x/a)))".into()),
                Coef::Expr("x^(gamma/2)".into()),
            ];
            expected = vec!["((1-gamma)^2/4 + s^2)*x^(gamma-2)"];
            admissible = true;
        }
        "hardy_log" => {
            let (n_f, r) = (get(&params, "N"), get(&params, "R"));
            if !((1.0..=4.0).contains(&n_f) && n_f.fract() == 0.0) {
                return Err(bad("N", format!("must be an integer in 1..=4, got {n_f}")));
            }
            if !(r > 0.0) {
                return Err(bad("R", "must be positive"));
            }
            let n = n_f as u32;
            let e_n = iter_exp(n)?;
            let eta = *params.entry("eta".into()).or_insert(2.0 * e_n * r);
            domain = Interval::new(0.0, r);
            let prod = |k: u32, pow: &str| -> String {
                (1..=k).map(|p| format!("ln_p({p}, eta/x){pow}")).collect::<Vec<_>>().join("*")
            };
            let a0_terms: Vec<String> = (1..=n).map(|k| format!("1/({})", prod(k, ""))).collect();
            let w_terms: Vec<String> = (1..=n).map(|k| format!("1/({})", prod(k, "^2"))).collect();
            coeffs = vec![
                Coef::Expr(format!("x^(gamma/2-1)*((gamma-1)/2 + 0.5*({}))", a0_terms.join(" + "))),
                Coef::Expr("x^(gamma/2)".into()),
            ];
            let w = format!("0.25*x^(gamma-2)*((1-gamma)^2 + {})", w_terms.join(" + "));
            let built = build(info, params, derived, domain, coeffs, vec![w.as_str()], eta >= e_n * r)?;
            return Ok(built);
        }
        "hardy_bessel" => {
            let (gamma, mu, nu, b) = (get(&params, "gamma"), get(&params, "mu"), get(&params, "nu"), get(&params, "b"));
            let kappa = check_bessel_params(gamma, mu, nu)?;
            if !(b > 0.0) {
                return Err(bad("b", "must be positive"));
            }
            let j = bessel_zero(nu, 1)?;
            derived.insert("j".into(), j);
            derived.insert("c".into(), (kappa * j / b.powf(kappa)).powi(2));
            derived.insert("k0".into(), ((1.0 - gamma).powi(2) - 4.0 * kappa * kappa * nu * nu) / 4.0);
            domain = Interval::new(0.0, b);
            let u = move |x: f64, order: usize| -> Result<Jet, JetError> {
                let xj = Jet::variable(x, order);
                let z = (xj.scale(1.0 / b)).powf(kappa)?.scale(j);
                Ok(xj.powf((1.0 - gamma) / 2.0)? * bessel_j_jet(nu, &z)?)
            };
            coeffs = vec![
                Coef::Native(
                    format!("-x^(gamma/2) u'/u, u = x^((1-gamma)/2) J_nu(j_nu1 (x/b)^{kappa})"),
                    Arc::new(u),
                    vec![],
                ),
                Coef::Expr("x^(gamma/2)".into()),
            ];
            expected = vec!["k0*x^(gamma-2) + c*x^mu"];
            admissible = nu <= (1.0 - gamma).abs() / (2.0 + mu - gamma);
        }
        "dist_boundary" => {
            let (gamma, mu, nu, a, b) =
                (get(&params, "gamma"), get(&params, "mu"), get(&params, "nu"), get(&params, "a"), get(&params, "b"));
            let db = dist_boundary_build(gamma, mu, nu, a, b)?;
            derived.insert("lambda".into(), db.lambda);
            derived.insert("c".into(), db.c);
            derived.insert("A".into(), db.coef_a);
            derived.insert("B".into(), db.coef_b);
            derived.insert("k0".into(), ((1.0 - gamma).powi(2) - 4.0 * db.kappa * db.kappa * nu * nu) / 4.0);
            domain = Interval::new(a, b);
            let mid = 0.5 * (a + b);
            let dbc = db;
            coeffs = vec![
                Coef::Native(
                    "-d^(gamma/2) u'/u, u piecewise J / (A J + B Y) matched at the midpoint".into(),
                    Arc::new(move |x, o| dbc.u_jet(x, o)),
                    vec![mid],
                ),
                Coef::Expr("dist(a, b, x)^(gamma/2)".into()),
            ];
            expected = vec!["k0*dist(a, b, x)^(gamma-2) + c*dist(a, b, x)^mu"];
            admissible = nu <= (1.0 - gamma).abs() / (2.0 + mu - gamma);
        }
        "log_weight" => {
            let (r, eta) = (get(&params, "R"), get(&params, "eta"));
            if !(r > 0.0 && eta > 0.0) {
                return Err(bad("R", "R and eta must be positive"));
            }
            derived.insert("s".into(), bessel_zero(0.0, 1)? / r);
            domain = Interval::new(0.0, r);
            coeffs = vec![
                Coef::Expr(
                    "-ln(eta/x)^(-1/2)*(1/(2*x) - 1/(2*x*ln(eta/x)) - s*bessel_j(1, s*x)/bessel_j(0, s*x))".into(),
                ),
                Coef::Expr("ln(eta/x)^(-1/2)".into()),
            ];
            expected = vec!["(ln(eta/x)^2 - 2*ln(eta/x) + 3)/(4*x^2*ln(eta/x)^3) + s^2/ln(eta/x)"];
            admissible = eta >= r;
        }
        "trig_hardy" => {
            let alpha = get(&params, "alpha");
            domain = Interval::new(0.0, PI);
            coeffs = vec![Coef::Expr("alpha*cot(x)".into()), Coef::Expr("1".into())];
            expected = vec!["-(alpha^2 + alpha)*csc(x)^2 + alpha^2"];
            admissible = (-1.0..=0.0).contains(&alpha);
        }
        "trig_half" => {
            let (alpha, beta) = (get(&params, "alpha"), get(&params, "beta"));
            domain = Interval::new(0.0, PI / 2.0);
            coeffs = vec![Coef::Expr("alpha*tan(x) - beta*cot(x)".into()), Coef::Expr("1".into())];
            expected = vec!["(alpha + beta)^2 + (beta - beta^2)*csc(x)^2 + (alpha - alpha^2)*sec(x)^2"];
            admissible = (0.0..=1.0).contains(&alpha) && (0.0..=1.0).contains(&beta);
        }
        "hyperbolic" => {
            let (alpha, beta) = (get(&params, "alpha"), get(&params, "beta"));
            domain = half_line();
            coeffs = vec![Coef::Expr("alpha*tanh(x) - beta*coth(x)".into()), Coef::Expr("1".into())];
            // sech^2 and csch^2 written through exp(-2x) so large x does not overflow
            expected = vec![
                "-(alpha - beta)^2 + (alpha + alpha^2)*4*exp(-2*x)/(1 + exp(-2*x))^2 + (beta - beta^2)*4*exp(-2*x)/(1 - exp(-2*x))^2",
            ];
            admissible = alpha == beta && (0.0..=1.0).contains(&beta);
        }
        "trig_weight" => {
            let alpha = get(&params, "alpha");
            domain = Interval::new(0.0, PI);
            coeffs = vec![Coef::Expr("alpha*cot(x)".into()), Coef::Expr("csc(x)".into())];
            expected = vec!["-alpha*(2*csc(x)^3 + alpha*csc(x)^2 - csc(x) - alpha)"];
            admissible = (trig_alpha_closed_form()..=0.0).contains(&alpha);
        }
        "power_trig" => {
            let (alpha, gamma) = (get(&params, "alpha"), get(&params, "gamma"));
            domain = Interval::new(0.0, 1.0);
            coeffs = vec![Coef::Expr("alpha*cot(x)".into()), Coef::Expr("x^(gamma/2)".into())];
            expected = vec!["alpha^2 - alpha*(alpha + x^(gamma/2))*csc(x)^2 + alpha*gamma/2*x^(gamma/2-1)*cot(x)"];
            admissible = (-1.0..=0.0).contains(&alpha) && gamma <= 0.0;
        }
        "rellich_power" => {
            let gamma = get(&params, "gamma");
            let alpha = *params.entry("alpha".into()).or_insert_with(|| rellich_alpha_closed_form(gamma).0);
            let beta = *params.entry("beta".into()).or_insert(alpha * (1.0 - alpha - gamma) / 2.0);
            domain = half_line();
            coeffs = vec![
                Coef::Expr("beta*x^(gamma/2-2)".into()),
                Coef::Expr("alpha*x^(gamma/2-1)".into()),
                Coef::Expr("-x^(gamma/2)".into()),
            ];
            expected = vec![
                "(-beta^2 + alpha*beta*(gamma-3) + beta*(gamma-2)*(gamma-3))*x^(gamma-4)",
                "(-alpha^2 - alpha*(gamma-1) - 2*beta)*x^(gamma-2)",
            ];
            let (q1, q0) = rellich_parameter_forms(gamma, alpha, beta);
            let tol = 1e-12 * (1.0 + alpha * alpha + beta * beta);
            admissible = q1 >= -tol && q0 >= -tol;
        }
        "rellich_trig" => {
            let beta = get(&params, "beta");
            domain = Interval::new(0.0, PI);
            coeffs = vec![Coef::Expr("beta".into()), Coef::Expr("-cot(x)".into()), Coef::Expr("1".into())];
            expected = vec!["beta*csc(x)^2 - beta^2", "2*beta + 1"];
            admissible = (0.0..=1.0).contains(&beta);
        }
        other => return Err(CatalogError::UnknownEntry(other.into())),
    }
    build(info, params, derived, domain, coeffs, expected, admissible)
}

type UJet = Arc<dyn Fn(f64, usize) -> Result<Jet, JetError> + Send + Sync>;

enum Coef {
    Expr(String),
    /// `a_0 = -a_1 u'/u` from jets of `u`, with breakpoints.
    Native(String, UJet, Vec<f64>),
}

fn build(
    info: &'static EntryInfo,
    params: ParamMap,
    derived: ParamMap,
    domain: Interval,
    coeffs: Vec<Coef>,
    expected: Vec<&str>,
    admissible: bool,
) -> Result<Instance, CatalogError> {
    let mut all = params.clone();
    all.extend(derived.iter().map(|(k, v)| (k.clone(), *v)));
    // Compile the expression coefficients first; native a_0 needs a_1.
    let mut maps: Vec<Option<MapRef>> = Vec::new();
    let mut sources = Vec::new();
    for c in &coeffs {
        match c {
            Coef::Expr(src) => {
                maps.push(Some(Arc::new(compile_str(src, &all, domain, &[])?)));
                sources.push(src.clone());
            }
            Coef::Native(desc, _, _) => {
                maps.push(None);
                sources.push(desc.clone());
            }
        }
    }
    for (k, c) in coeffs.into_iter().enumerate() {
        if let Coef::Native(_, u, bps) = c {
            let a1 = maps[k + 1].clone().expect("native a_0 needs an expression a_1");
            maps[k] = Some(Arc::new(NativeA0 { domain, breakpoints: bps, u, a1 }));
        }
    }
    let system = CoeffSystem::new(domain, maps.into_iter().map(|m| m.expect("built")).collect())?;
    let expected = expected.iter().map(|s| parse(s)).collect::<Result<Vec<_>, _>>()?;
    Ok(Instance { id: info.id, params, derived, system, sources, expected, admissible })
}

/// `a_0 = -a_1 u'/u` with `u` given by its jets.
struct NativeA0 {
    domain: Interval,
    breakpoints: Vec<f64>,
    u: UJet,
    a1: MapRef,
}

impl SmoothMap for NativeA0 {
    fn domain(&self) -> Interval {
        self.domain
    }

    fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    fn eval(&self, x: f64, order: usize) -> Result<Jet, EvalError> {
        check_point(x, order, self.domain, &self.breakpoints)?;
        if order + 1 > MAX_ORDER {
            return Err(EvalError::OrderOverflow { order: order + 1, max: MAX_ORDER });
        }
        let at = |e| EvalError::at(x, e);
        let u = (self.u)(x, order + 1).map_err(at)?;
        let ratio = u.differentiate().div(&u.truncate(order)).map_err(at)?;
        let a1 = self.a1.eval(x, order)?;
        (-(a1 * ratio)).finite("a_0").map_err(at)
    }
}

fn check_bessel_params(gamma: f64, mu: f64, nu: f64) -> Result<f64, CatalogError> {
    let kappa = (2.0 + mu - gamma) / 2.0;
    if !(kappa > 0.0) {
        return Err(bad("mu", format!("need 2 + mu - gamma > 0, got {}", 2.0 * kappa)));
    }
    if !(nu >= 0.0) {
        return Err(bad("nu", "must be nonnegative"));
    }
    Ok(kappa)
}

/// The distance-to-the-boundary construction: `u` is the regular Bessel solution on the
/// left half and a `J`/`Y` combination on the right half, matched in value and slope at the
/// midpoint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DistBoundary {
    pub gamma: f64,
    pub mu: f64,
    pub nu: f64,
    pub a: f64,
    pub b: f64,
    pub kappa: f64,
    /// First positive zero of `(1-gamma) J_nu(z) + (2+mu-gamma) z J_nu'(z)`.
    pub lambda: f64,
    pub c: f64,
    pub coef_a: f64,
    pub coef_b: f64,
}

pub fn dist_boundary_build(gamma: f64, mu: f64, nu: f64, a: f64, b: f64) -> Result<DistBoundary, CatalogError> {
    let kappa = check_bessel_params(gamma, mu, nu)?;
    if !(a < b && a.is_finite() && b.is_finite()) {
        return Err(bad("a", format!("need finite a < b, got a = {a}, b = {b}")));
    }
    let h = (b - a) / 2.0;
    let lambda = g_zero(gamma, mu, nu)?;
    let c = (h.powf(-kappa) * kappa * lambda).powi(2);
    let mut db = DistBoundary { gamma, mu, nu, a, b, kappa, lambda, c, coef_a: 0.0, coef_b: 0.0 };
    // Match A uJ + B uY to the left branch in value and slope at the midpoint.
    let mid = a + h;
    let left = db.branch_jet(mid, 1, Branch::Left)?;
    let uj = db.branch_jet(mid, 1, Branch::RightJ)?;
    let uy = db.branch_jet(mid, 1, Branch::RightY)?;
    let det = uj.value() * uy.deriv(1) - uy.value() * uj.deriv(1);
    let scale = (uj.value().abs() + uj.deriv(1).abs()) * (uy.value().abs() + uy.deriv(1).abs());
    if !(det.abs() > 1e-12 * scale) {
        return Err(CatalogError::SingularMatching { det });
    }
    db.coef_a = (left.value() * uy.deriv(1) - uy.value() * left.deriv(1)) / det;
    db.coef_b = (uj.value() * left.deriv(1) - left.value() * uj.deriv(1)) / det;
    Ok(db)
}

#[derive(Clone, Copy)]
enum Branch {
    Left,
    RightJ,
    RightY,
}

fn special_jet(x: f64) -> impl Fn(SpecialError) -> JetError {
    move |_| JetError::Domain { func: "bessel", value: x }
}

impl DistBoundary {
    fn branch_jet(&self, x: f64, order: usize, branch: Branch) -> Result<Jet, JetError> {
        let xj = Jet::variable(x, order);
        let w = match branch {
            Branch::Left => xj.add_const(-self.a),
            _ => xj.scale(-1.0).add_const(self.b),
        };
        let z = w.powf(self.kappa)?.scale(self.c.sqrt() / self.kappa);
        let z0 = z.value();
        let cyl = match branch {
            Branch::Left => bessel_j_jet(self.nu, &z)?,
            Branch::RightJ => {
                let (j, dj, _) = bessel_j_with_derivative(self.nu, z0).map_err(special_jet(z0))?;
                cylinder_jet(self.nu, j, dj, &z)?
            }
            Branch::RightY => {
                let e = bessel_jy(self.nu, z0).map_err(special_jet(z0))?;
                cylinder_jet(self.nu, e.y, e.dy, &z)?
            }
        };
        Ok(w.powf((1.0 - self.gamma) / 2.0)? * cyl)
    }

    /// Jet of `u` at `x` (not at the midpoint).
    pub fn u_jet(&self, x: f64, order: usize) -> Result<Jet, JetError> {
        if x <= 0.5 * (self.a + self.b) {
            return self.branch_jet(x, order, Branch::Left);
        }
        let mut out = Jet::zero(order);
        if self.coef_a != 0.0 {
            out = out + self.branch_jet(x, order, Branch::RightJ)? * self.coef_a;
        }
        if self.coef_b != 0.0 {
            out = out + self.branch_jet(x, order, Branch::RightY)? * self.coef_b;
        }
        Ok(out)
    }

    pub fn u(&self, x: f64) -> Result<f64, JetError> {
        Ok(self.u_jet(x, 0)?.value())
    }
}

// ---------------------------------------------------------------------------------------
// Optimizers

/// `F_gamma(alpha)`, the second-order constant when `beta = alpha (1 - alpha - gamma) / 2`.
pub fn rellich_f(gamma: f64, alpha: f64) -> f64 {
    rellich_f_jet(gamma, &Jet::constant(alpha, 0)).value()
}

fn rellich_f_jet(gamma: f64, a: &Jet) -> Jet {
    let one_m = a.scale(-1.0).add_const(1.0 - gamma);
    let bracket = a.scale(gamma - 3.0) - (*a * one_m).scale(0.5);
    let bracket = bracket.add_const((gamma - 2.0) * (gamma - 3.0));
    (*a * one_m * bracket).scale(0.5)
}

/// The two parameter inequalities `(q1, q0)` for `a_2 = -x^{g/2}`, `a_1 = alpha x^{g/2-1}`,
/// `a_0 = beta x^{g/2-2}`: the coefficients of `c_{2,1}` and `c_{2,0}`.
pub fn rellich_parameter_forms(gamma: f64, alpha: f64, beta: f64) -> (f64, f64) {
    let q1 = -alpha * alpha - alpha * (gamma - 1.0) - 2.0 * beta;
    let q0 = -beta * beta + alpha * beta * (gamma - 3.0) + beta * (gamma - 2.0) * (gamma - 3.0);
    (q1, q0)
}

/// `(alpha_+, alpha_-) = 2 - gamma +- sqrt(((gamma-2)^2 + 1) / 2)`.
pub fn rellich_alpha_closed_form(gamma: f64) -> (f64, f64) {
    let r = (((gamma - 2.0).powi(2) + 1.0) / 2.0).sqrt();
    (2.0 - gamma + r, 2.0 - gamma - r)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RellichOptimum {
    pub gamma: f64,
    pub alpha_plus: f64,
    pub alpha_minus: f64,
    pub closed_plus: f64,
    pub closed_minus: f64,
    pub constant_plus: f64,
    pub constant_minus: f64,
    /// `[(gamma-1)(gamma-3)/4]^2`.
    pub closed_constant: f64,
}

/// Maximizers of `F_gamma` from the sign changes of `F_gamma'` (computed with jets).
pub fn optimize_rellich_alpha(gamma: f64) -> Result<RellichOptimum, CatalogError> {
    let dfdx = |a: f64| rellich_f_jet(gamma, &Jet::variable(a, 1)).deriv(1);
    let center = 2.0 - gamma;
    let half = (gamma - 2.0).abs() + 2.0;
    let steps = 4000;
    let mut maxima = Vec::new();
    let mut prev = (center - half, dfdx(center - half));
    for i in 1..=steps {
        let a = center - half + 2.0 * half * i as f64 / steps as f64;
        let d = dfdx(a);
        if prev.1 > 0.0 && d <= 0.0 {
            let root = if d == 0.0 {
                a
            } else {
                brent(dfdx, prev.0, a, 1e-14, 1e-15).map_err(|e| CatalogError::Optimizer(e.to_string()))?
            };
            maxima.push(root);
        }
        prev = (a, d);
    }
    if maxima.len() != 2 {
        return Err(CatalogError::Optimizer(format!("expected two maxima of F, found {}", maxima.len())));
    }
    let (closed_plus, closed_minus) = rellich_alpha_closed_form(gamma);
    Ok(RellichOptimum {
        gamma,
        alpha_plus: maxima[1],
        alpha_minus: maxima[0],
        closed_plus,
        closed_minus,
        constant_plus: rellich_f(gamma, maxima[1]),
        constant_minus: rellich_f(gamma, maxima[0]),
        closed_constant: ((gamma - 1.0) * (gamma - 3.0) / 4.0).powi(2),
    })
}

/// `F_alpha(x) = -alpha [2 csc^3 x + alpha csc^2 x - csc x - alpha]`.
pub fn trig_weight_f(alpha: f64, x: f64) -> f64 {
    let s = 1.0 / x.sin();
    -alpha * (2.0 * s * s * s + alpha * s * s - s - alpha)
}

/// Minimum of `F_alpha` over `(0, pi)` by a grid on `(0, pi/2]` (the function is symmetric
/// about `pi/2`) followed by golden-section refinement.
pub fn trig_weight_min(alpha: f64) -> (f64, f64) {
    let n = 400;
    let lo = 1e-3;
    let hi = PI / 2.0;
    let xs: Vec<f64> = (0..=n).map(|i| lo + (hi - lo) * i as f64 / n as f64).collect();
    let (mut best_i, mut best) = (0, f64::INFINITY);
    for (i, &x) in xs.iter().enumerate() {
        let v = trig_weight_f(alpha, x);
        if v < best {
            best = v;
            best_i = i;
        }
    }
    let l = xs[best_i.saturating_sub(1)];
    let r = xs[(best_i + 1).min(n)];
    let (x, v) = golden_section_min(|x| trig_weight_f(alpha, x), l, r, 1e-12);
    if v < best {
        (x, v)
    } else {
        (xs[best_i], best)
    }
}

/// `-(1/4)(4 (5 + sqrt 17)^{1/2} + (14 + 2 sqrt 17)^{1/2})`.
pub fn trig_alpha_closed_form() -> f64 {
    let r17 = 17f64.sqrt();
    -0.25 * (4.0 * (5.0 + r17).sqrt() + (14.0 + 2.0 * r17).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrigRange {
    pub closed_form: f64,
    pub numeric: f64,
    pub upper: f64,
}

/// Lower end of the `alpha` range with `F_alpha >= 0`, by bisection on the sign of the
/// inner minimum.
pub fn trig_alpha_range() -> TrigRange {
    let ok = |alpha: f64| trig_weight_min(alpha).1 >= 0.0;
    let (mut bad_end, mut good) = (-10.0, -1.0);
    debug_assert!(ok(good) && !ok(bad_end));
    for _ in 0..200 {
        let mid = 0.5 * (bad_end + good);
        if mid == bad_end || mid == good {
            break;
        }
        if ok(mid) {
            good = mid;
        } else {
            bad_end = mid;
        }
    }
    TrigRange { closed_form: trig_alpha_closed_form(), numeric: good, upper: 0.0 }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SimpleFamily {
    /// `alpha (alpha + 1 - gamma)`, minimized.
    HardyPowerAlpha,
    /// `alpha (alpha + 1)`, minimized.
    TrigHardyAlpha,
    /// `beta - beta^2`, maximized.
    HyperbolicBeta,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimpleOptimum {
    pub family: SimpleFamily,
    pub argopt: f64,
    pub value: f64,
    pub stated_argopt: f64,
}

/// Golden-section search, then one parabolic step through three nearby points; the latter is
/// exact for these quadratics.
pub fn optimize_simple(family: SimpleFamily, gamma: f64) -> SimpleOptimum {
    let (sign, f, stated): (f64, Box<dyn Fn(f64) -> f64>, f64) = match family {
        SimpleFamily::HardyPowerAlpha => (1.0, Box::new(move |a| a * (a + 1.0 - gamma)), (gamma - 1.0) / 2.0),
        SimpleFamily::TrigHardyAlpha => (1.0, Box::new(|a| a * (a + 1.0)), -0.5),
        SimpleFamily::HyperbolicBeta => (-1.0, Box::new(|b| b - b * b), 0.5),
    };
    let obj = |x: f64| sign * f(x);
    let span = 10.0 + gamma.abs();
    let (x0, _) = golden_section_min(obj, -span, span, 1e-9);
    let h = 1e-2;
    let (fm, f0, fp) = (obj(x0 - h), obj(x0), obj(x0 + h));
    let x = x0 - h * (fp - fm) / (2.0 * (fp - 2.0 * f0 + fm));
    SimpleOptimum { family, argopt: x, value: f(x), stated_argopt: stated }
}

// ---------------------------------------------------------------------------------------
// Batch checks

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckOptions {
    pub scan: ScanSpec,
    pub verify: VerifyOptions,
    pub corpus: usize,
    pub seed: u64,
    pub closed_form_points: usize,
    pub closed_form_tol: f64,
    pub exec: Execution,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions {
            scan: ScanSpec::default(),
            verify: VerifyOptions::default(),
            corpus: 16,
            seed: 0,
            closed_form_points: 500,
            closed_form_tol: 1e-9,
            exec: Execution::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClosedFormCheck {
    pub m: usize,
    /// `max |built - expected| / max(1, a_m^2, |expected|)` over the grid.
    pub max_rel_err: f64,
    pub worst_x: f64,
    pub points: usize,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntryReport {
    pub id: String,
    pub params: ParamMap,
    pub derived: ParamMap,
    pub admissible: bool,
    pub scan: ScanReport,
    pub closed_form: Vec<ClosedFormCheck>,
    pub corpus: CorpusReport,
    pub passed: bool,
}

/// Compare derived weights with the closed forms on a grid.
pub fn check_closed_forms(inst: &Instance, points: usize, margin: f64, tol: f64, exec: Execution) -> Vec<ClosedFormCheck> {
    let w = inst.weights();
    let grid = scan_grid(inst.domain(), points, margin, w.breakpoints());
    let rows = map_slice(exec, &grid, |&x| match (w.values_scaled(x), inst.expected_values(x)) {
        (Ok(b), Ok(e)) => b.iter().zip(&e).map(|(&(b, s), e)| (b - e).abs() / e.abs().max(s)).collect(),
        _ => vec![f64::INFINITY; inst.expected.len()],
    });
    (0..inst.expected.len())
        .map(|m| {
            let (mut worst, mut worst_x) = (0.0f64, f64::NAN);
            for (x, r) in grid.iter().zip(&rows) {
                if !(r[m] <= worst) {
                    worst = r[m];
                    worst_x = *x;
                }
            }
            ClosedFormCheck { m, max_rel_err: worst, worst_x, points: grid.len(), passed: worst <= tol }
        })
        .collect()
}

pub fn check_instance(inst: &Instance, opts: &CheckOptions) -> EntryReport {
    let w = inst.weights();
    let scan = scan_nonnegativity(&w, &ScanSpec { exec: opts.exec, ..opts.scan });
    let closed_form = check_closed_forms(inst, opts.closed_form_points, opts.scan.margin, opts.closed_form_tol, opts.exec);
    let corpus = test_corpus(inst.domain(), opts.seed, opts.corpus);
    let corpus = verify_corpus(&w, &corpus, &VerifyOptions { exec: opts.exec, ..opts.verify });
    let passed = scan.nonnegative && closed_form.iter().all(|c| c.passed) && corpus.passed;
    EntryReport {
        id: inst.id.to_string(),
        params: inst.params.clone(),
        derived: inst.derived.clone(),
        admissible: inst.admissible,
        scan,
        closed_form,
        corpus,
        passed,
    }
}

/// Check every entry at its default parameters, in catalog order.
pub fn check_all(opts: &CheckOptions) -> Vec<Result<EntryReport, CatalogError>> {
    map_slice(opts.exec, &ENTRIES, |e| {
        let inst = instantiate(e.id, &ParamMap::new())?;
        Ok(check_instance(&inst, opts))
    })
}
