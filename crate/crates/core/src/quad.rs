//! Adaptive panel Gauss-Legendre quadrature (15 nodes per panel).
//!
//! Each panel is compared against the sum over its two halves; panels are split until the
//! difference falls under the local share of the tolerance. Integration limits are first cut
//! at the supplied breakpoints so that no panel straddles one. Vector-valued integrands are
//! supported so several integrals over the same points share one set of evaluations.

use std::sync::OnceLock;

use thiserror::Error;

use crate::jets::EvalError;

const NODES: usize = 15;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuadError {
    #[error("quadrature did not converge on panel [{lo}, {hi}] at depth {depth}")]
    NoConvergence { lo: f64, hi: f64, depth: u32 },
    #[error("integrand evaluation failed: {0}")]
    Eval(#[from] EvalError),
    #[error("invalid integration interval [{lo}, {hi}]")]
    BadInterval { lo: f64, hi: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadOptions {
    /// Target error, measured relative to `max(1, |integral|)` component-wise.
    pub tol: f64,
    pub max_depth: u32,
    /// Panels per breakpoint-free segment before adaptivity starts.
    pub initial_panels: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions {
            tol: 1e-10,
            max_depth: 40,
            initial_panels: 8,
        }
    }
}

/// Result of an integration: values plus an error estimate per component.
#[derive(Debug, Clone, PartialEq)]
pub struct Integral {
    pub values: Vec<f64>,
    pub errors: Vec<f64>,
    pub panels: usize,
}

struct Rule {
    nodes: [f64; NODES],
    weights: [f64; NODES],
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

fn rule() -> &'static Rule {
    static RULE: OnceLock<Rule> = OnceLock::new();
    RULE.get_or_init(|| {
        let mut nodes = [0.0; NODES];
        let mut weights = [0.0; NODES];
        for i in 0..NODES {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (NODES as f64 + 0.5)).cos();
            for _ in 0..100 {
                let (p, dp) = legendre_with_derivative(NODES, x);
                let dx = p / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, dp) = legendre_with_derivative(NODES, x);
            nodes[i] = x;
            weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
        }
        Rule { nodes, weights }
    })
}

fn panel<F>(f: &mut F, lo: f64, hi: f64, dim: usize, buf: &mut [f64]) -> Result<Vec<f64>, EvalError>
where
    F: FnMut(f64, &mut [f64]) -> Result<(), EvalError>,
{
    let r = rule();
    let half = 0.5 * (hi - lo);
    let mid = 0.5 * (hi + lo);
    let mut acc = vec![0.0; dim];
    for (x, w) in r.nodes.iter().zip(r.weights.iter()) {
        f(mid + half * x, buf)?;
        for (a, v) in acc.iter_mut().zip(buf.iter()) {
            *a += w * v;
        }
    }
    for a in &mut acc {
        *a *= half;
    }
    Ok(acc)
}

/// Integrate a vector-valued function `f(x, out)` of dimension `dim` over `[lo, hi]`.
pub fn integrate_vec<F>(
    mut f: F,
    dim: usize,
    lo: f64,
    hi: f64,
    breakpoints: &[f64],
    opts: &QuadOptions,
) -> Result<Integral, QuadError>
where
    F: FnMut(f64, &mut [f64]) -> Result<(), EvalError>,
{
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(QuadError::BadInterval { lo, hi });
    }
    let mut cuts: Vec<f64> = vec![lo];
    let mut inner: Vec<f64> = breakpoints
        .iter()
        .copied()
        .filter(|&b| b > lo && b < hi)
        .collect();
    inner.sort_by(f64::total_cmp);
    inner.dedup();
    cuts.extend(inner);
    cuts.push(hi);

    let mut buf = vec![0.0; dim];
    // Coarse pass: initial panels and their estimates.
    let mut stack: Vec<(f64, f64, Vec<f64>, u32)> = Vec::new();
    let mut scale = vec![0.0f64; dim];
    for seg in cuts.windows(2) {
        let n = opts.initial_panels.max(1);
        let h = (seg[1] - seg[0]) / n as f64;
        for i in 0..n {
            let a = seg[0] + i as f64 * h;
            let b = if i + 1 == n { seg[1] } else { a + h };
            let est = panel(&mut f, a, b, dim, &mut buf)?;
            for (s, e) in scale.iter_mut().zip(&est) {
                *s += e.abs();
            }
            stack.push((a, b, est, 0));
        }
    }
    let total_len = hi - lo;
    let mut values = vec![0.0; dim];
    let mut errors = vec![0.0; dim];
    let mut panels = 0usize;
    while let Some((a, b, whole, depth)) = stack.pop() {
        let m = 0.5 * (a + b);
        let left = panel(&mut f, a, m, dim, &mut buf)?;
        let right = panel(&mut f, m, b, dim, &mut buf)?;
        let share = (b - a) / total_len;
        let mut converged = true;
        for i in 0..dim {
            let err = (left[i] + right[i] - whole[i]).abs();
            if err > opts.tol * scale[i].max(1.0) * share.max(1e-3) {
                converged = false;
                break;
            }
        }
        if converged {
            for i in 0..dim {
                values[i] += left[i] + right[i];
                errors[i] += (left[i] + right[i] - whole[i]).abs();
            }
            panels += 2;
        } else if depth >= opts.max_depth || (b - a) <= 1e-15 * a.abs().max(b.abs()).max(1.0) {
            return Err(QuadError::NoConvergence { lo: a, hi: b, depth });
        } else {
            stack.push((m, b, right, depth + 1));
            stack.push((a, m, left, depth + 1));
        }
    }
    Ok(Integral {
        values,
        errors,
        panels,
    })
}

/// Scalar convenience wrapper; returns `(value, error_estimate)`.
pub fn integrate<F>(
    mut f: F,
    lo: f64,
    hi: f64,
    breakpoints: &[f64],
    opts: &QuadOptions,
) -> Result<(f64, f64), QuadError>
where
    F: FnMut(f64) -> Result<f64, EvalError>,
{
    let r = integrate_vec(
        |x, out| {
            out[0] = f(x)?;
            Ok(())
        },
        1,
        lo,
        hi,
        breakpoints,
        opts,
    )?;
    Ok((r.values[0], r.errors[0]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jets::bump;

    #[test]
    fn nodes_and_weights() {
        let r = rule();
        let sum: f64 = r.weights.iter().sum();
        assert!((sum - 2.0).abs() < 1e-14);
        // exact for degree 29
        let m: f64 = r.nodes.iter().zip(&r.weights).map(|(x, w)| w * x.powi(28)).sum();
        assert!((m - 2.0 / 29.0).abs() < 1e-14);
    }

    #[test]
    fn polynomial() {
        let (v, _) = integrate(|x| Ok(x * x), 0.0, 1.0, &[], &QuadOptions::default()).unwrap();
        assert!((v - 1.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn breakpoint_additivity() {
        let f = |x: f64| Ok(if x < 0.5 { x } else { 1.0 - x * x });
        let opts = QuadOptions::default();
        let (whole, _) = integrate(f, 0.0, 1.0, &[0.5], &opts).unwrap();
        let (l, _) = integrate(f, 0.0, 0.5, &[], &opts).unwrap();
        let (r, _) = integrate(f, 0.5, 1.0, &[], &opts).unwrap();
        assert!((whole - (l + r)).abs() < 1e-15);
        assert!((whole - (0.125 + 0.5 - 7.0 / 24.0)).abs() < 1e-14);
    }

    #[test]
    fn bump_integral_stable_across_tolerances() {
        let f = |x: f64| Ok(bump(-1.0, 1.0, x, 0).value());
        let mut prev: Option<(f64, f64)> = None;
        for tol in [1e-8, 1e-10, 1e-12] {
            let opts = QuadOptions { tol, ..Default::default() };
            let (v, e) = integrate(f, -1.0, 1.0, &[], &opts).unwrap();
            assert!((v - 0.443_993_816_168_079_4).abs() < 1e-12, "{v}");
            if let Some((pv, pe)) = prev {
                assert!((v - pv).abs() <= pe.max(1e-15));
            }
            prev = Some((v, e));
        }
    }

    #[test]
    fn non_convergence_is_reported() {
        let opts = QuadOptions { tol: 1e-14, max_depth: 3, initial_panels: 1 };
        let r = integrate(|x| Ok(1.0 / x.sqrt()), 0.0, 1.0, &[], &opts);
        assert!(matches!(r, Err(QuadError::NoConvergence { .. })));
    }
}
