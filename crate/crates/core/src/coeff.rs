//! Derived weights `c_{n,m}` of an operator `T = sum_k a_k D^k`, and nonnegativity scans.
//!
//! ```text
//! c_{n,m} = -a_m^2 - sum_{j=0}^{m} sum_{k=max(j+1, 2m-j)}^{n} (-1)^{k-j} t_{k-j,m-j} D^{k+j-2m}[a_j a_k]
//! ```
//!
//! For compactly supported `f`,
//! `int a_n^2 |f^(n)|^2 - sum_m int c_{n,m} |f^(m)|^2 = int |T f|^2 >= 0`.

use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::jets::{check_point, is_breakpoint, EvalError, Interval, Jet, MapRef, SmoothMap, MAX_ORDER};
use crate::lucas::t_coeff;
use crate::par::{map_slice, Execution};
use crate::roots::golden_section_min;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CoeffError {
    #[error("an operator of order n needs n + 1 >= 2 coefficients, got {0}")]
    TooFewCoefficients(usize),
    #[error("order n = {n} exceeds the supported maximum {max}")]
    OrderTooLarge { n: usize, max: usize },
    #[error("coefficient a_{index} has domain {found}, expected {expected}")]
    DomainMismatch {
        index: usize,
        expected: Interval,
        found: Interval,
    },
}

/// Which `k` range the inner sum runs over. `Full` starts at `j + 1` and relies on the
/// vanishing of `t_{k-j,m-j}` below `2m - j`; both give the same weights.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub enum SumRange {
    #[default]
    Tight,
    Full,
}

/// The coefficients `a_0 .. a_n` of `T` on a common domain.
#[derive(Clone)]
pub struct CoeffSystem {
    domain: Interval,
    coeffs: Vec<MapRef>,
    breakpoints: Vec<f64>,
}

impl CoeffSystem {
    pub fn new(domain: Interval, coeffs: Vec<MapRef>) -> Result<Self, CoeffError> {
        if coeffs.len() < 2 {
            return Err(CoeffError::TooFewCoefficients(coeffs.len()));
        }
        let n = coeffs.len() - 1;
        if n > MAX_ORDER {
            return Err(CoeffError::OrderTooLarge { n, max: MAX_ORDER });
        }
        for (index, a) in coeffs.iter().enumerate() {
            let found = a.domain();
            if found.lo > domain.lo || found.hi < domain.hi {
                return Err(CoeffError::DomainMismatch { index, expected: domain, found });
            }
        }
        let breakpoints = merge_breakpoints(domain, coeffs.iter().map(|a| a.breakpoints()));
        Ok(CoeffSystem { domain, coeffs, breakpoints })
    }

    pub fn n(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn domain(&self) -> Interval {
        self.domain
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn coeffs(&self) -> &[MapRef] {
        &self.coeffs
    }

    /// Jet of `T f = sum_k a_k f^(k)` at `x`, given a jet of `f` of order `n + order`.
    pub fn apply(&self, f: &Jet, x: f64, order: usize) -> Result<Jet, EvalError> {
        let n = self.n();
        let mut out = Jet::zero(order);
        for (k, a) in self.coeffs.iter().enumerate() {
            let ak = a.eval(x, order)?;
            out = out + ak * f.derivative(k).truncate(order);
        }
        debug_assert!(f.order() >= n + order);
        Ok(out)
    }
}

pub(crate) fn merge_breakpoints<'a>(domain: Interval, lists: impl Iterator<Item = &'a [f64]>) -> Vec<f64> {
    let mut all: Vec<f64> = lists.flatten().copied().filter(|&b| domain.contains(b)).collect();
    all.sort_by(f64::total_cmp);
    all.dedup_by(|a, b| is_breakpoint(*a, &[*b]));
    all
}

struct WeightInner {
    sys: CoeffSystem,
    range: SumRange,
    scale: f64,
}

/// The LHS weight `a_n^2` and the derived weights `c_{n,0} .. c_{n,n-1}`.
#[derive(Clone)]
pub struct WeightSet {
    inner: Arc<WeightInner>,
}

/// All weights at one point, as jets.
#[derive(Debug, Clone)]
pub struct WeightValues {
    /// `a_0 .. a_n` at the same order.
    pub a: Vec<Jet>,
    pub lhs: Jet,
    pub c: Vec<Jet>,
}

/// Build the weight set of a coefficient system.
pub fn derive_weights(sys: &CoeffSystem) -> WeightSet {
    WeightSet::with_options(sys, SumRange::Tight, 1.0)
}

impl WeightSet {
    pub fn with_options(sys: &CoeffSystem, range: SumRange, scale: f64) -> Self {
        WeightSet {
            inner: Arc::new(WeightInner { sys: sys.clone(), range, scale }),
        }
    }

    /// Same weights with every `c_{n,m}` multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        WeightSet::with_options(&self.inner.sys, self.inner.range, self.inner.scale * factor)
    }

    pub fn n(&self) -> usize {
        self.inner.sys.n()
    }

    pub fn system(&self) -> &CoeffSystem {
        &self.inner.sys
    }

    pub fn domain(&self) -> Interval {
        self.inner.sys.domain
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.inner.sys.breakpoints
    }

    /// Evaluate every weight at `x` to derivative order `order` (needs `n + order <= 16`).
    pub fn eval_all(&self, x: f64, order: usize) -> Result<WeightValues, EvalError> {
        let sys = &self.inner.sys;
        let n = sys.n();
        let top = n + order;
        check_point(x, top, sys.domain, &sys.breakpoints)?;
        let a: Vec<Jet> = sys
            .coeffs
            .iter()
            .map(|m| m.eval(x, top))
            .collect::<Result<_, _>>()?;
        let lhs = (a[n] * a[n]).truncate(order);
        let mut c = Vec::with_capacity(n);
        for m in 0..n {
            let mut sum = Jet::zero(order);
            for j in 0..=m {
                let k_start = match self.inner.range {
                    SumRange::Tight => (j + 1).max(2 * m - j),
                    SumRange::Full => j + 1,
                };
                for k in k_start..=n {
                    let t = t_coeff((k - j) as u32, (m - j) as u32);
                    if t == 0 {
                        continue;
                    }
                    let s = k + j - 2 * m;
                    let d = (a[j] * a[k]).derivative(s).truncate(order);
                    let sign = if (k - j) % 2 == 0 { 1.0 } else { -1.0 };
                    sum = sum + d * (sign * t as f64);
                }
            }
            let cm = -(a[m] * a[m]).truncate(order) - sum;
            c.push(cm * self.inner.scale);
        }
        let a = a.iter().map(|j| j.truncate(order)).collect();
        Ok(WeightValues { a, lhs, c })
    }

    /// Values of `c_{n,0} .. c_{n,n-1}` at `x`.
    pub fn values(&self, x: f64) -> Result<Vec<f64>, EvalError> {
        Ok(self.eval_all(x, 0)?.c.iter().map(Jet::value).collect())
    }

    /// Weights at `x` paired with the size of the cancelling square `max(1, a_m^2)`.
    /// Roundoff in `c_{n,m}` is proportional to this, not to `|c_{n,m}|`.
    pub fn values_scaled(&self, x: f64) -> Result<Vec<(f64, f64)>, EvalError> {
        let v = self.eval_all(x, 0)?;
        Ok(v.c
            .iter()
            .zip(&v.a)
            .map(|(c, a)| (c.value(), (a.value() * a.value() * self.inner.scale.abs()).max(1.0)))
            .collect())
    }

    /// `c_{n,m}` as a map.
    pub fn weight(&self, m: usize) -> MapRef {
        assert!(m < self.n(), "weight index {m} out of range for n = {}", self.n());
        Arc::new(WeightView { set: self.clone(), which: Some(m) })
    }

    /// `a_n^2` as a map.
    pub fn lhs_weight(&self) -> MapRef {
        Arc::new(WeightView { set: self.clone(), which: None })
    }
}

struct WeightView {
    set: WeightSet,
    which: Option<usize>,
}

impl SmoothMap for WeightView {
    fn domain(&self) -> Interval {
        self.set.domain()
    }

    fn breakpoints(&self) -> &[f64] {
        self.set.breakpoints()
    }

    fn eval(&self, x: f64, order: usize) -> Result<Jet, EvalError> {
        let v = self.set.eval_all(x, order)?;
        Ok(match self.which {
            Some(m) => v.c[m],
            None => v.lhs,
        })
    }
}

/// A map built from coefficient maps by a jet formula; shared by the small-n closed forms.
struct Formula {
    domain: Interval,
    breakpoints: Vec<f64>,
    inputs: Vec<MapRef>,
    /// Extra derivative orders the formula consumes.
    extra: usize,
    f: fn(&[Jet], usize) -> Jet,
}

impl SmoothMap for Formula {
    fn domain(&self) -> Interval {
        self.domain
    }

    fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    fn eval(&self, x: f64, order: usize) -> Result<Jet, EvalError> {
        check_point(x, order + self.extra, self.domain, &self.breakpoints)?;
        let jets: Vec<Jet> = self
            .inputs
            .iter()
            .map(|m| m.eval(x, order + self.extra))
            .collect::<Result<_, _>>()?;
        Ok((self.f)(&jets, order))
    }
}

fn common_domain(maps: &[MapRef]) -> Interval {
    let lo = maps.iter().map(|m| m.domain().lo).fold(f64::NEG_INFINITY, f64::max);
    let hi = maps.iter().map(|m| m.domain().hi).fold(f64::INFINITY, f64::min);
    Interval::new(lo, hi)
}

fn formula(inputs: Vec<MapRef>, extra: usize, f: fn(&[Jet], usize) -> Jet) -> MapRef {
    let domain = common_domain(&inputs);
    let breakpoints = merge_breakpoints(domain, inputs.iter().map(|m| m.breakpoints()));
    Arc::new(Formula { domain, breakpoints, inputs, extra, f })
}

/// `c_{1,0} = -a_0^2 + (a_0 a_1)'`.
pub fn specialize_first_order(a0: MapRef, a1: MapRef) -> MapRef {
    formula(vec![a0, a1], 1, |a, o| {
        (-(a[0] * a[0]) + (a[0] * a[1]).derivative(1)).truncate(o)
    })
}

/// `(c_{2,0}, c_{2,1})` with `c_{2,0} = -a_0^2 + (a_0 a_1)' - (a_0 a_2)''` and
/// `c_{2,1} = -a_1^2 + 2 a_0 a_2 + (a_1 a_2)'`.
pub fn specialize_second_order(a0: MapRef, a1: MapRef, a2: MapRef) -> (MapRef, MapRef) {
    let inputs = vec![a0, a1, a2];
    let c20 = formula(inputs.clone(), 2, |a, o| {
        (-(a[0] * a[0]) + (a[0] * a[1]).derivative(1).truncate(o + 1) - (a[0] * a[2]).derivative(2))
            .truncate(o)
    });
    let c21 = formula(inputs, 2, |a, o| {
        (-(a[1] * a[1]) + (a[0] * a[2]) * 2.0 + (a[1] * a[2]).derivative(1).truncate(o + 1)).truncate(o)
    });
    (c20, c21)
}

/// Grid and tolerance for a nonnegativity scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanSpec {
    pub points: usize,
    /// A weight passes if `c_{n,m} / max(1, a_m^2) >= -tol` everywhere on the grid.
    pub tol: f64,
    /// Relative endpoint margin on finite domains.
    pub margin: f64,
    pub refine: bool,
    pub exec: Execution,
}

impl Default for ScanSpec {
    fn default() -> Self {
        ScanSpec {
            points: 2000,
            tol: 1e-10,
            margin: 1e-4,
            refine: true,
            exec: Execution::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightScan {
    pub m: usize,
    /// Weight value at `argmin`.
    pub min: f64,
    /// Minimum of `c_{n,m} / max(1, a_m^2)`, the quantity compared against the tolerance.
    pub min_scaled: f64,
    pub argmin: f64,
    pub nonnegative: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanFailure {
    pub x: f64,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanReport {
    pub window: (f64, f64),
    pub points: usize,
    pub tol: f64,
    pub weights: Vec<WeightScan>,
    pub failures: Vec<ScanFailure>,
    pub nonnegative: bool,
}

/// Scan grid: uniform on finite windows, geometric in the distance to the finite endpoint
/// on half-lines. Breakpoints are removed.
pub fn scan_grid(domain: Interval, points: usize, margin: f64, breakpoints: &[f64]) -> Vec<f64> {
    let (lo, hi) = domain.scan_window(margin);
    let points = points.max(2);
    let t = |i: usize| i as f64 / (points - 1) as f64;
    let grid: Vec<f64> = match (domain.lo.is_finite(), domain.hi.is_finite()) {
        (true, false) => {
            let (d0, d1) = (lo - domain.lo, hi - domain.lo);
            (0..points).map(|i| domain.lo + d0 * (d1 / d0).powf(t(i))).collect()
        }
        (false, true) => {
            let (d0, d1) = (domain.hi - hi, domain.hi - lo);
            (0..points).rev().map(|i| domain.hi - d0 * (d1 / d0).powf(t(i))).collect()
        }
        _ => (0..points).map(|i| lo + (hi - lo) * t(i)).collect(),
    };
    grid.into_iter().filter(|&x| !is_breakpoint(x, breakpoints)).collect()
}

/// Scan every `c_{n,m}` for nonnegativity.
pub fn scan_nonnegativity(w: &WeightSet, spec: &ScanSpec) -> ScanReport {
    let n = w.n();
    let grid = scan_grid(w.domain(), spec.points, spec.margin, w.breakpoints());
    let evals = map_slice(spec.exec, &grid, |&x| w.values_scaled(x));
    let mut failures = Vec::new();
    // (scaled value, raw value, grid index)
    let mut best: Vec<(f64, f64, usize)> = vec![(f64::INFINITY, f64::INFINITY, usize::MAX); n];
    for (i, r) in evals.iter().enumerate() {
        match r {
            Ok(vals) => {
                for (m, &(v, s)) in vals.iter().enumerate() {
                    if v / s < best[m].0 {
                        best[m] = (v / s, v, i);
                    }
                }
            }
            Err(e) => failures.push(ScanFailure { x: grid[i], message: e.to_string() }),
        }
    }
    let weights: Vec<WeightScan> = best
        .iter()
        .enumerate()
        .map(|(m, &(mut scaled, mut min, i))| {
            if i == usize::MAX {
                return WeightScan { m, min: f64::NAN, min_scaled: f64::NAN, argmin: f64::NAN, nonnegative: false };
            }
            let mut argmin = grid[i];
            if spec.refine {
                let lo = if i > 0 { grid[i - 1] } else { grid[i] };
                let hi = if i + 1 < grid.len() { grid[i + 1] } else { grid[i] };
                let crosses = w.breakpoints().iter().any(|&b| b > lo && b < hi);
                if hi > lo && !crosses {
                    let f = |x: f64| w.values_scaled(x).map(|v| v[m].0 / v[m].1).unwrap_or(f64::INFINITY);
                    let (xr, sr) = golden_section_min(f, lo, hi, 1e-12 * (hi - lo).max(1e-300) + 1e-15);
                    if sr < scaled {
                        if let Ok(v) = w.values_scaled(xr) {
                            scaled = sr;
                            min = v[m].0;
                            argmin = xr;
                        }
                    }
                }
            }
            WeightScan { m, min, min_scaled: scaled, argmin, nonnegative: scaled >= -spec.tol }
        })
        .collect();
    let nonnegative = failures.is_empty() && weights.iter().all(|s| s.nonnegative);
    ScanReport {
        window: w.domain().scan_window(spec.margin),
        points: grid.len(),
        tol: spec.tol,
        weights,
        failures,
        nonnegative,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jets::{constant_map, FnMap};

    fn half_line() -> Interval {
        Interval::new(0.0, f64::INFINITY)
    }

    fn hardy(gamma: f64) -> CoeffSystem {
        let a0 = FnMap::new(half_line(), move |x| Ok(x.powf(gamma / 2.0 - 1.0)? * ((gamma - 1.0) / 2.0))).shared();
        let a1 = FnMap::new(half_line(), move |x| x.powf(gamma / 2.0)).shared();
        CoeffSystem::new(half_line(), vec![a0, a1]).unwrap()
    }

    #[test]
    fn hardy_at_two() {
        let w = derive_weights(&hardy(0.0));
        let v = w.values(2.0).unwrap();
        assert!((v[0] - 1.0 / 16.0).abs() < 1e-15);
        assert!((w.lhs_weight().value(2.0).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn zero_a0_gives_zero_weight() {
        let sys = CoeffSystem::new(
            half_line(),
            vec![constant_map(half_line(), 0.0), FnMap::new(half_line(), |x| x.sin()).shared()],
        )
        .unwrap();
        let w = derive_weights(&sys);
        for x in [0.3, 1.0, 7.0] {
            assert_eq!(w.values(x).unwrap(), vec![0.0]);
        }
    }

    #[test]
    fn rellich_equality_case() {
        let alpha = 2.0 + 2.5f64.sqrt();
        let beta = alpha * (1.0 - alpha) / 2.0;
        let sys = CoeffSystem::new(
            half_line(),
            vec![
                FnMap::new(half_line(), move |x| Ok(x.powi(-2)? * beta)).shared(),
                FnMap::new(half_line(), move |x| Ok(x.recip()? * alpha)).shared(),
                constant_map(half_line(), -1.0),
            ],
        )
        .unwrap();
        let w = derive_weights(&sys);
        for x in [0.1, 0.5, 1.0, 3.0, 10.0] {
            let v = w.values(x).unwrap();
            assert!(v[1].abs() < 1e-12 * x.powi(-2), "c21({x}) = {}", v[1]);
        }
        assert!((w.values(1.0).unwrap()[0] - 9.0 / 16.0).abs() < 1e-9);
    }

    #[test]
    fn trig_first_order_closed_form() {
        let d = Interval::new(0.0, std::f64::consts::PI);
        let c = specialize_first_order(
            FnMap::new(d, |x| Ok(x.cot()? * -0.5)).shared(),
            constant_map(d, 1.0),
        );
        for x in [0.2f64, 1.0, 2.9] {
            let expect = 0.25 + 0.25 / x.sin().powi(2);
            assert!((c.value(x).unwrap() - expect).abs() < 1e-13);
        }
    }

    #[test]
    fn trig_second_order_closed_form() {
        let d = Interval::new(0.0, std::f64::consts::PI);
        let beta = 0.5;
        let (c20, c21) = specialize_second_order(
            constant_map(d, beta),
            FnMap::new(d, |x| Ok(-x.cot()?)).shared(),
            constant_map(d, 1.0),
        );
        for x in [0.3f64, 1.5, 2.5] {
            assert!((c21.value(x).unwrap() - (2.0 * beta + 1.0)).abs() < 1e-13);
            let expect = beta / x.sin().powi(2) - beta * beta;
            assert!((c20.value(x).unwrap() - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn breakpoints_are_merged_and_rejected() {
        let d = Interval::new(0.0, 2.0);
        let sys = CoeffSystem::new(
            d,
            vec![
                FnMap::new(d, |x| Ok(*x)).with_breakpoints(vec![1.0, 5.0]).shared(),
                FnMap::new(d, |x| Ok(*x)).with_breakpoints(vec![0.5, 1.0]).shared(),
            ],
        )
        .unwrap();
        assert_eq!(sys.breakpoints(), &[0.5, 1.0]);
        let w = derive_weights(&sys);
        assert!(matches!(w.values(1.0), Err(EvalError::AtBreakpoint { .. })));
        let grid = scan_grid(d, 5, 0.0, sys.breakpoints());
        assert_eq!(grid, vec![0.0, 1.5, 2.0]);
    }

    #[test]
    fn system_validation() {
        let d = half_line();
        assert_eq!(
            CoeffSystem::new(d, vec![constant_map(d, 1.0)]).err(),
            Some(CoeffError::TooFewCoefficients(1))
        );
        let narrow = constant_map(Interval::new(1.0, 2.0), 1.0);
        assert!(matches!(
            CoeffSystem::new(d, vec![narrow, constant_map(d, 1.0)]),
            Err(CoeffError::DomainMismatch { index: 0, .. })
        ));
    }

    #[test]
    fn hardy_scan_is_positive() {
        let w = derive_weights(&hardy(0.0));
        let r = scan_nonnegativity(&w, &ScanSpec::default());
        assert!(r.nonnegative);
        let (lo, hi) = r.window;
        assert_eq!((lo, hi), (1e-3, 1e3));
        assert!((r.weights[0].min - 0.25 / (hi * hi)).abs() < 1e-15);
    }
}
