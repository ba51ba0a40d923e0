//! Numerical verification of the weighted inequality and of the exact identity behind it,
//! on compactly supported smooth test functions.
//!
//! For a test function `f` the report holds
//! `lhs = int a_n^2 (f^(n))^2`, `rhs_m = int c_{n,m} (f^(m))^2`,
//! `residual = int (sum_k a_k f^(k))^2`, and `gap = |lhs - sum rhs - residual|`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::coeff::WeightSet;
use crate::jets::{bump, mollifier, EvalError, Interval, Jet, SmoothMap};
use crate::par::{map_slice, Execution};
use crate::quad::{integrate_vec, QuadError, QuadOptions};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum VerifyError {
    #[error("test function support [{l}, {r}] is not inside the domain {domain}")]
    SupportOutsideDomain { l: f64, r: f64, domain: Interval },
    #[error("test function is numerically zero")]
    ZeroFunction,
    #[error("quadrature failed: {0}")]
    Quadrature(#[from] QuadError),
    #[error("no member of the family has a positive right-hand side")]
    DegenerateFamily,
    #[error("invalid test function: {0}")]
    Invalid(String),
}

/// Shape of a test function on its support.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Shape {
    /// `p(s) * bump`, where `s in (-1, 1)` is the normalized position in the support and
    /// `p(s) = sum_k coeffs[k] s^k` (degree at most 12).
    Polynomial { coeffs: Vec<f64> },
    /// `x^power * mollifier(ln(x / center) / half_width)`, supported on
    /// `[center e^{-half_width}, center e^{half_width}]` (requires `x > 0`).
    LogBump {
        center: f64,
        half_width: f64,
        power: f64,
    },
}

/// A smooth function with compact support `[l, r]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestFunction {
    pub support: (f64, f64),
    pub amplitude: f64,
    pub shape: Shape,
}

impl TestFunction {
    /// Modulated bump on `[l, r]`.
    pub fn polynomial(l: f64, r: f64, coeffs: Vec<f64>) -> Result<Self, VerifyError> {
        if !(l < r) || !l.is_finite() || !r.is_finite() {
            return Err(VerifyError::Invalid(format!("support [{l}, {r}]")));
        }
        if coeffs.len() > 13 {
            return Err(VerifyError::Invalid("modulation degree exceeds 12".into()));
        }
        let f = TestFunction { support: (l, r), amplitude: 1.0, shape: Shape::Polynomial { coeffs } };
        f.check_nonzero()?;
        Ok(f)
    }

    /// Plain bump on `[l, r]`.
    pub fn bump(l: f64, r: f64) -> Result<Self, VerifyError> {
        Self::polynomial(l, r, vec![1.0])
    }

    /// `x^power` cut off by a bump in `ln x`.
    pub fn log_bump(center: f64, half_width: f64, power: f64) -> Result<Self, VerifyError> {
        if !(center > 0.0 && half_width > 0.0) {
            return Err(VerifyError::Invalid("log bump needs center > 0 and half_width > 0".into()));
        }
        let support = (center * (-half_width).exp(), center * half_width.exp());
        let f = TestFunction { support, amplitude: 1.0, shape: Shape::LogBump { center, half_width, power } };
        f.check_nonzero()?;
        Ok(f)
    }

    /// The same function multiplied by `lambda`.
    pub fn scaled(&self, lambda: f64) -> Self {
        TestFunction { amplitude: self.amplitude * lambda, ..self.clone() }
    }

    fn check_nonzero(&self) -> Result<(), VerifyError> {
        let (l, r) = self.support;
        let peak = (1..64)
            .map(|i| l + (r - l) * i as f64 / 64.0)
            .filter_map(|x| self.eval(x, 0).ok())
            .map(|j| j.value().abs())
            .fold(0.0, f64::max);
        if peak > 1e-30 {
            Ok(())
        } else {
            Err(VerifyError::ZeroFunction)
        }
    }

    fn jet(&self, x: f64, order: usize) -> Result<Jet, EvalError> {
        let (l, r) = self.support;
        if x <= l || x >= r {
            return Ok(Jet::zero(order));
        }
        let j = match &self.shape {
            Shape::Polynomial { coeffs } => {
                let s = Jet::variable(x, order).add_const(-0.5 * (l + r)).scale(2.0 / (r - l));
                let mut p = Jet::zero(order);
                for c in coeffs.iter().rev() {
                    p = (p * s).add_const(*c);
                }
                p * bump(l, r, x, order)
            }
            Shape::LogBump { center, half_width, power } => {
                let var = Jet::variable(x, order);
                let t = var
                    .ln()
                    .map_err(|e| EvalError::at(x, e))?
                    .add_const(-center.ln())
                    .scale(1.0 / half_width);
                var.powf(*power).map_err(|e| EvalError::at(x, e))? * mollifier(&t)
            }
        };
        Ok(j.scale(self.amplitude))
    }
}

impl SmoothMap for TestFunction {
    fn domain(&self) -> Interval {
        Interval::real_line()
    }

    fn eval(&self, x: f64, order: usize) -> Result<Jet, EvalError> {
        self.jet(x, order)
    }
}

/// Tolerances for verification.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyOptions {
    pub quad: QuadOptions,
    /// Identity passes if `gap <= gap_tol * (1 + residual)`.
    pub gap_tol: f64,
    /// Residual passes if `>= -residual_tol`.
    pub residual_tol: f64,
    pub exec: Execution,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            quad: QuadOptions::default(),
            gap_tol: 1e-8,
            residual_tol: 1e-12,
            exec: Execution::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Verdicts {
    /// `lhs - sum rhs` agrees with the directly integrated residual.
    pub identity: bool,
    /// `lhs >= sum rhs` (up to the identity tolerance).
    pub inequality: bool,
    pub residual_nonnegative: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub support: (f64, f64),
    pub lhs: f64,
    pub rhs: Vec<f64>,
    pub residual: f64,
    pub gap: f64,
    pub margin: f64,
    /// Largest quadrature error estimate among the integrals.
    pub quad_error: f64,
    pub verdicts: Verdicts,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.verdicts.identity && self.verdicts.inequality && self.verdicts.residual_nonnegative
    }

    pub fn rhs_total(&self) -> f64 {
        self.rhs.iter().sum()
    }
}

/// Integrate both sides of the identity for one test function.
pub fn evaluate_instance(
    w: &WeightSet,
    f: &TestFunction,
    opts: &VerifyOptions,
) -> Result<VerificationReport, VerifyError> {
    let n = w.n();
    let domain = w.domain();
    let (l, r) = f.support;
    if !(l >= domain.lo && r <= domain.hi) || (l == domain.lo && !domain.lo.is_finite()) {
        return Err(VerifyError::SupportOutsideDomain { l, r, domain });
    }
    // Open domain: the support may touch an endpoint only if f vanishes there, which a
    // bump does; the integrand is evaluated strictly inside.
    let dim = n + 2;
    let integral = integrate_vec(
        |x, out| {
            let fj = f.jet(x, n)?;
            let d = fj.derivs();
            if d.iter().all(|&v| v == 0.0) {
                out.iter_mut().for_each(|o| *o = 0.0);
                return Ok(());
            }
            let v = w.eval_all(x, 0)?;
            out[0] = v.lhs.value() * d[n] * d[n];
            for m in 0..n {
                out[1 + m] = v.c[m].value() * d[m] * d[m];
            }
            let tf: f64 = v.a.iter().zip(&d).map(|(a, dk)| a.value() * dk).sum();
            out[n + 1] = tf * tf;
            Ok(())
        },
        dim,
        l,
        r,
        w.breakpoints(),
        &opts.quad,
    )?;
    let lhs = integral.values[0];
    let rhs = integral.values[1..=n].to_vec();
    let residual = integral.values[n + 1];
    let margin = lhs - rhs.iter().sum::<f64>();
    let gap = (margin - residual).abs();
    let tol = opts.gap_tol * (1.0 + residual.abs());
    let verdicts = Verdicts {
        identity: gap <= tol,
        inequality: margin >= -opts.gap_tol * (1.0 + lhs.abs()),
        residual_nonnegative: residual >= -opts.residual_tol,
    };
    Ok(VerificationReport {
        support: f.support,
        lhs,
        rhs,
        residual,
        gap,
        margin,
        quad_error: integral.errors.iter().copied().fold(0.0, f64::max),
        verdicts,
    })
}

/// Seeded corpus of modulated bumps. Supports lie in the central 60% of finite domains and
/// in windows around `[a + 1, a + 2]` on half-lines.
pub fn test_corpus(domain: Interval, seed: u64, count: usize) -> Vec<TestFunction> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let (lo, hi) = match (domain.lo.is_finite(), domain.hi.is_finite()) {
            (true, true) => {
                let len = domain.length();
                (domain.lo + 0.2 * len, domain.hi - 0.2 * len)
            }
            (true, false) => (domain.lo + 0.5, domain.lo + 2.5),
            (false, true) => (domain.hi - 2.5, domain.hi - 0.5),
            (false, false) => (-1.5, 1.5),
        };
        let width = hi - lo;
        let l = lo + rng.random_range(0.0..0.35) * width;
        let r = hi - rng.random_range(0.0..0.35) * width;
        let degree = rng.random_range(0..=6usize);
        let coeffs: Vec<f64> = (0..=degree).map(|_| rng.random_range(-1.0..1.0)).collect();
        if let Ok(f) = TestFunction::polynomial(l, r, coeffs) {
            out.push(f);
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorpusReport {
    pub reports: Vec<VerificationReport>,
    pub failures: Vec<String>,
    pub max_gap_ratio: f64,
    pub min_margin: f64,
    pub passed: bool,
}

/// Verify every test function; results are kept in corpus order.
pub fn verify_corpus(w: &WeightSet, corpus: &[TestFunction], opts: &VerifyOptions) -> CorpusReport {
    let results = map_slice(opts.exec, corpus, |f| evaluate_instance(w, f, opts));
    let mut reports = Vec::new();
    let mut failures = Vec::new();
    for (i, r) in results.into_iter().enumerate() {
        match r {
            Ok(rep) => reports.push(rep),
            Err(e) => failures.push(format!("test function {i}: {e}")),
        }
    }
    let max_gap_ratio = reports
        .iter()
        .map(|r| r.gap / (1.0 + r.residual.abs()))
        .fold(0.0, f64::max);
    let min_margin = reports.iter().map(|r| r.margin).fold(f64::INFINITY, f64::min);
    let passed = failures.is_empty() && !reports.is_empty() && reports.iter().all(VerificationReport::passed);
    CorpusReport { reports, failures, max_gap_ratio, min_margin, passed }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RayleighReport {
    /// `lhs / sum rhs` per member, `None` where the right-hand side is not positive.
    pub ratios: Vec<Option<f64>>,
    /// Minimum over the first `i + 1` members.
    pub running_min: Vec<f64>,
    pub best: f64,
    pub best_index: usize,
    /// Margin of the best member.
    pub best_margin: f64,
}

/// Smallest `lhs / sum rhs` over a family of test functions.
pub fn rayleigh_probe(
    w: &WeightSet,
    family: &[TestFunction],
    opts: &VerifyOptions,
) -> Result<RayleighReport, VerifyError> {
    let reports: Vec<VerificationReport> = map_slice(opts.exec, family, |f| evaluate_instance(w, f, opts))
        .into_iter()
        .collect::<Result<_, _>>()?;
    let ratios: Vec<Option<f64>> = reports
        .iter()
        .map(|r| {
            let s = r.rhs_total();
            (s > 0.0).then(|| r.lhs / s)
        })
        .collect();
    let mut running_min = Vec::with_capacity(ratios.len());
    let (mut best, mut best_index) = (f64::INFINITY, usize::MAX);
    for (i, r) in ratios.iter().enumerate() {
        if let Some(v) = r {
            if *v < best {
                best = *v;
                best_index = i;
            }
        }
        running_min.push(best);
    }
    if best_index == usize::MAX {
        return Err(VerifyError::DegenerateFamily);
    }
    Ok(RayleighReport {
        ratios,
        running_min,
        best,
        best_index,
        best_margin: reports[best_index].margin,
    })
}

/// Log-bumps `x^power mollifier(ln(x / center) / w)` for the given half widths.
pub fn log_bump_family(center: f64, power: f64, half_widths: &[f64]) -> Result<Vec<TestFunction>, VerifyError> {
    half_widths.iter().map(|&w| TestFunction::log_bump(center, w, power)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bump_vanishes_outside_support() {
        let f = TestFunction::polynomial(1.0, 2.0, vec![0.5, -1.0, 0.3]).unwrap();
        for x in [0.0, 1.0, 2.0, 3.0] {
            assert!(f.eval(x, 4).unwrap().derivs().iter().all(|&v| v == 0.0));
        }
        assert!(f.value(1.5).unwrap() != 0.0);
    }

    #[test]
    fn zero_function_rejected() {
        assert_eq!(TestFunction::polynomial(0.0, 1.0, vec![0.0]), Err(VerifyError::ZeroFunction));
        assert!(TestFunction::polynomial(1.0, 0.0, vec![1.0]).is_err());
        assert!(TestFunction::polynomial(0.0, 1.0, vec![1.0; 14]).is_err());
    }

    #[test]
    fn log_bump_support() {
        let f = TestFunction::log_bump(1.0, 2.0, 0.5).unwrap();
        let (l, r) = f.support;
        assert!((l - (-2f64).exp()).abs() < 1e-15 && (r - 2f64.exp()).abs() < 1e-14);
        let v = f.value(1.0).unwrap();
        assert!((v - (-1f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn corpus_is_seeded() {
        let d = Interval::new(0.0, f64::INFINITY);
        assert_eq!(test_corpus(d, 3, 10), test_corpus(d, 3, 10));
        assert_ne!(test_corpus(d, 3, 10), test_corpus(d, 4, 10));
        let fin = Interval::new(0.0, 10.0);
        for f in test_corpus(fin, 9, 50) {
            assert!(f.support.0 >= 2.0 && f.support.1 <= 8.0 && f.support.0 < f.support.1);
        }
    }
}
