//! The integer coefficients `t_{n,k}` that express `2 f f^(n)` through derivatives of
//! squares of intermediate derivatives, and numerical checks of the derivative identities
//! built on them.
//!
//! All combinatorics here is exact (`i128` with overflow checks). Coefficients outside the
//! triangle `0 <= k <= n/2` are defined as zero so callers can sum over ranges freely.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::jets::{EvalError, FnMap, Interval, Jet, MapRef, SmoothMap};
use crate::par::{self, Execution};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LucasError {
    #[error("index l = {l} out of range 0..={n}")]
    IndexOutOfRange { n: u32, l: u32 },
}

/// Exact binomial coefficient; zero when `k > n`. Panics on `i128` overflow, which does not
/// happen for `n <= 128`.
pub fn binomial(n: u32, k: u32) -> i128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut r: i128 = 1;
    for i in 0..k {
        r = r
            .checked_mul(i128::from(n - i))
            .expect("binomial overflow")
            / i128::from(i + 1);
    }
    r
}

/// `t_{n,k}` from the closed form `(-1)^k [C(n-k,k) + C(n-k-1,k-1)]`, with `t_{0,0} = 2`,
/// `t_{n,0} = 1` for `n >= 1`, and zero for `k > n/2`.
pub fn t_coeff(n: u32, k: u32) -> i128 {
    if n == 0 {
        return if k == 0 { 2 } else { 0 };
    }
    if k == 0 {
        return 1;
    }
    if k > n / 2 {
        return 0;
    }
    let magnitude = binomial(n - k, k) + binomial(n - k - 1, k - 1);
    if k % 2 == 0 {
        magnitude
    } else {
        -magnitude
    }
}

/// Signed-index variant used by the weight formula: negative indices give zero.
pub fn t_coeff_signed(n: i64, k: i64) -> i128 {
    if n < 0 || k < 0 {
        0
    } else {
        t_coeff(n as u32, k as u32)
    }
}

/// Triangle of `t_{n,k}` generated by the recursion `t_{n+1,k} = t_{n,k} - t_{n-1,k-1}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TCoeffTable {
    max_n: u32,
    rows: Vec<Vec<i128>>,
}

impl TCoeffTable {
    pub fn build(max_n: u32) -> Self {
        let mut rows: Vec<Vec<i128>> = vec![vec![2]];
        if max_n >= 1 {
            rows.push(vec![1]);
        }
        for n in 1..max_n {
            let width = (n as usize + 1) / 2 + 1;
            let mut next = vec![0i128; width];
            next[0] = 1;
            for (k, slot) in next.iter_mut().enumerate().skip(1) {
                let a = rows[n as usize].get(k).copied().unwrap_or(0);
                let b = rows[n as usize - 1].get(k - 1).copied().unwrap_or(0);
                *slot = a.checked_sub(b).expect("t coefficient overflow");
            }
            rows.push(next);
        }
        TCoeffTable { max_n, rows }
    }

    pub fn max_n(&self) -> u32 {
        self.max_n
    }

    pub fn get(&self, n: u32, k: u32) -> i128 {
        self.rows
            .get(n as usize)
            .and_then(|row| row.get(k as usize))
            .copied()
            .unwrap_or(0)
    }

    pub fn row(&self, n: u32) -> &[i128] {
        &self.rows[n as usize]
    }

    pub fn rows(&self) -> &[Vec<i128>] {
        &self.rows
    }

    /// First `(n, k)` where recursion and closed form disagree, if any.
    pub fn first_mismatch(&self) -> Option<(u32, u32)> {
        for (n, row) in self.rows.iter().enumerate() {
            for (k, &v) in row.iter().enumerate() {
                if v != t_coeff(n as u32, k as u32) {
                    return Some((n as u32, k as u32));
                }
            }
        }
        None
    }
}

/// `sum_k (-1)^k C(n-k,k) C(n-2k, l-k)` in exact arithmetic; equals 1 for every valid `l`.
pub fn binomial_identity_sum(n: u32, l: u32) -> Result<i128, LucasError> {
    if l > n {
        return Err(LucasError::IndexOutOfRange { n, l });
    }
    let mut sum: i128 = 0;
    for k in 0..=n / 2 {
        if l < k {
            continue;
        }
        let term = binomial(n - k, k) * binomial(n - 2 * k, l - k);
        sum += if k % 2 == 0 { term } else { -term };
    }
    Ok(sum)
}

/// `D^{n-2k}[(f^{(k)})^2]` read off an order-`n` jet of `f`.
fn derivative_of_square(f: &Jet, n: usize, k: usize) -> f64 {
    let fk = f.derivative(k);
    fk.square().deriv(n - 2 * k)
}

/// Residual `|2 f f^(n) - sum_k t_{n,k} D^{n-2k}[(f^(k))^2]|` at `x`.
pub fn check_product_identity(f: &dyn SmoothMap, n: u32, x: f64) -> Result<f64, EvalError> {
    let nu = n as usize;
    let jet = f.eval(x, nu)?;
    let lhs = 2.0 * jet.value() * jet.deriv(nu);
    let rhs: f64 = (0..=nu / 2)
        .map(|k| t_coeff(n, k as u32) as f64 * derivative_of_square(&jet, nu, k))
        .sum();
    Ok((lhs - rhs).abs())
}

/// Residual of `sum_k (-1)^k C(n-k,k) D^{n-2k}[(f^(k))^2] = sum_l f^(n-l) f^(l)` at `x`.
pub fn check_symmetric_identity(f: &dyn SmoothMap, n: u32, x: f64) -> Result<f64, EvalError> {
    let nu = n as usize;
    let jet = f.eval(x, nu)?;
    let lhs: f64 = (0..=nu / 2)
        .map(|k| {
            let c = binomial(n - k as u32, k as u32) as f64;
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            sign * c * derivative_of_square(&jet, nu, k)
        })
        .sum();
    let rhs: f64 = (0..=nu).map(|l| jet.deriv(nu - l) * jet.deriv(l)).sum();
    Ok((lhs - rhs).abs())
}

/// Kinds of randomized test functions used for the identity suite.
#[derive(Debug, Clone, Serialize)]
pub enum CorpusFunction {
    /// `sum_k c_k x^k / k!` with `c_k` uniform in `[-1, 1]`.
    Polynomial { coeffs: Vec<f64> },
    /// `sin(w x + phase) * exp(b x)`.
    TrigExp { w: f64, phase: f64, b: f64 },
    /// `exp(s sin(w x))`.
    ExpSin { s: f64, w: f64 },
    /// `ln(shift + x) * cos(w x)`, with `shift > 1` so the log argument stays positive.
    LogCos { shift: f64, w: f64 },
}

impl CorpusFunction {
    pub fn to_map(&self) -> MapRef {
        let domain = Interval::real_line();
        match self.clone() {
            CorpusFunction::Polynomial { coeffs } => FnMap::new(domain, move |x| {
                // Horner in Taylor-normalized form
                let mut acc = Jet::constant(0.0, x.order());
                for (k, c) in coeffs.iter().enumerate().rev() {
                    acc = acc * *x + c / crate::jets::factorial(k.min(16));
                }
                Ok(acc)
            })
            .shared(),
            CorpusFunction::TrigExp { w, phase, b } => FnMap::new(domain, move |x| {
                Ok(x.scale(w).add_const(phase).sin()? * x.scale(b).exp()?)
            })
            .shared(),
            CorpusFunction::ExpSin { s, w } => {
                FnMap::new(domain, move |x| x.scale(w).sin()?.scale(s).exp()).shared()
            }
            CorpusFunction::LogCos { shift, w } => FnMap::new(domain, move |x| {
                Ok(x.add_const(shift).ln()? * x.scale(w).cos()?)
            })
            .shared(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct IdentityCase {
    pub function: CorpusFunction,
    pub n: u32,
    pub x: f64,
}

/// Reproducible randomized corpus of `(function, n <= max_n, point)` cases.
pub fn identity_corpus(seed: u64, count: usize, max_n: u32) -> Vec<IdentityCase> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| {
            let function = match i % 4 {
                0 => {
                    let deg = rng.random_range(0..=12usize);
                    CorpusFunction::Polynomial {
                        coeffs: (0..=deg).map(|_| rng.random_range(-1.0..=1.0)).collect(),
                    }
                }
                1 => CorpusFunction::TrigExp {
                    w: rng.random_range(-1.5..=1.5),
                    phase: rng.random_range(0.0..std::f64::consts::TAU),
                    b: rng.random_range(-0.5..=0.5),
                },
                2 => CorpusFunction::ExpSin {
                    s: rng.random_range(-1.0..=1.0),
                    w: rng.random_range(-1.2..=1.2),
                },
                _ => CorpusFunction::LogCos {
                    shift: rng.random_range(1.5..=3.0),
                    w: rng.random_range(-1.2..=1.2),
                },
            };
            IdentityCase {
                function,
                n: rng.random_range(0..=max_n),
                x: rng.random_range(-1.0..=1.0),
            }
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct IdentitySuiteReport {
    pub seed: u64,
    pub cases: usize,
    pub max_product_residual: f64,
    pub max_symmetric_residual: f64,
    /// Index of the case with the largest residual of either kind.
    pub worst_case: usize,
}

/// Run both derivative identities over a seeded corpus.
pub fn run_identity_suite(
    seed: u64,
    count: usize,
    max_n: u32,
    exec: Execution,
) -> Result<IdentitySuiteReport, EvalError> {
    let corpus = identity_corpus(seed, count, max_n);
    let results = par::map_slice(exec, &corpus, |case| {
        let map = case.function.to_map();
        let p = check_product_identity(map.as_ref(), case.n, case.x)?;
        let s = check_symmetric_identity(map.as_ref(), case.n.max(1), case.x)?;
        Ok::<_, EvalError>((p, s))
    });
    let mut report = IdentitySuiteReport {
        seed,
        cases: count,
        max_product_residual: 0.0,
        max_symmetric_residual: 0.0,
        worst_case: 0,
    };
    let mut worst = -1.0;
    for (i, r) in results.into_iter().enumerate() {
        let (p, s) = r?;
        report.max_product_residual = report.max_product_residual.max(p);
        report.max_symmetric_residual = report.max_symmetric_residual.max(s);
        if p.max(s) > worst {
            worst = p.max(s);
            report.worst_case = i;
        }
    }
    Ok(report)
}
