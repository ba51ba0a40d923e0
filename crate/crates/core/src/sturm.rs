//! Shooting for positive solutions of `-(p u')' - g u = 0`, and the first-order
//! coefficient constructions built on them.
//!
//! With `p = a_1^2` and a solution `u > 0`, the choice `a_0 = -a_1 u'/u` makes the derived
//! first-order weight equal to `g`. The system is integrated in the variables `(u, v = p u')`
//! with an embedded Dormand-Prince 5(4) pair.

use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::jets::{check_point, EvalError, Interval, Jet, JetError, MapRef, SmoothMap, MAX_ORDER};
use crate::quad::{integrate, QuadError, QuadOptions};
use crate::roots::brent;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SturmError {
    #[error("the interval ({a}, {b}) must be finite and non-empty")]
    BadInterval { a: f64, b: f64 },
    #[error("initial data u = {u}, u' = {du} is trivial or not finite")]
    BadInitialData { u: f64, du: f64 },
    #[error("p must be positive, found p({x}) = {p}")]
    NonPositiveP { x: f64, p: f64 },
    #[error("step size collapsed at x = {x} (singularity of the coefficients?)")]
    StepCollapse { x: f64 },
    #[error("step limit of {steps} reached at x = {x}")]
    TooManySteps { x: f64, steps: usize },
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("quadrature failed: {0}")]
    Quadrature(#[from] QuadError),
    #[error("u vanishes at x = {x} inside the working interval")]
    Vanishes { x: f64 },
    #[error("could not bracket the critical constant (tried up to c = {c})")]
    NoCriticalValue { c: f64 },
    #[error("invalid parameters: {0}")]
    Parameters(String),
}

/// How the solution is started at `x0 = a + start_offset`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Start {
    /// `u(x0) = u`, `u'(x0) = du`.
    Values { u: f64, du: f64 },
    /// `u ~ (x - a)^sigma` near `a`.
    Exponent(f64),
    /// Solution regular at `a` with `u(a+) = 1`: `v(x0) = -int_a^x0 g`, and `u(x0)` corrected
    /// to second order. Suited to `p` vanishing at `a` (radial equations).
    Regular,
}

/// `-(p u')' - g u = 0` on `(a, b)`.
#[derive(Clone)]
pub struct SturmProblem {
    pub p: MapRef,
    pub g: MapRef,
    pub a: f64,
    pub b: f64,
    pub start: Start,
    pub start_offset: f64,
    /// Distance from `b` where integration stops; 0 when `p, g` are evaluable at `b`.
    pub end_offset: f64,
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

/// `max(1e-8, 1e-6 min(1, b - a))`.
pub fn default_offset(a: f64, b: f64) -> f64 {
    1e-8f64.max(1e-6 * (b - a).min(1.0))
}

impl SturmProblem {
    pub fn new(p: MapRef, g: MapRef, a: f64, b: f64, start: Start) -> Result<Self, SturmError> {
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(SturmError::BadInterval { a, b });
        }
        let eps = default_offset(a, b);
        let at_b = p.domain().contains(b)
            && g.domain().contains(b)
            && !p.breakpoints().contains(&b)
            && !g.breakpoints().contains(&b);
        Ok(SturmProblem {
            p,
            g,
            a,
            b,
            start,
            start_offset: eps,
            end_offset: if at_b { 0.0 } else { eps },
            rtol: 1e-10,
            atol: 1e-12,
            max_steps: 1_000_000,
        })
    }

    pub fn with_start_offset(mut self, offset: f64) -> Self {
        self.start_offset = offset;
        self
    }

    pub fn with_end_offset(mut self, offset: f64) -> Self {
        self.end_offset = offset;
        self
    }

    fn breakpoints(&self) -> Vec<f64> {
        let mut bps: Vec<f64> = self
            .p
            .breakpoints()
            .iter()
            .chain(self.g.breakpoints())
            .copied()
            .filter(|&x| x > self.a && x < self.b)
            .collect();
        bps.sort_by(f64::total_cmp);
        bps.dedup();
        bps
    }

    /// `(u', v')` at `x`. `side` picks the one-sided limit when `x` is a breakpoint.
    fn rhs(&self, x: f64, u: f64, v: f64, side: f64) -> Result<(f64, f64), SturmError> {
        let eval = |m: &MapRef| match m.value(x) {
            Err(EvalError::AtBreakpoint { .. }) => m.value(x + side * 8.0 * f64::EPSILON * x.abs().max(1.0)),
            r => r,
        };
        let p = eval(&self.p)?;
        let g = eval(&self.g)?;
        if !(p > 0.0) {
            return Err(SturmError::NonPositiveP { x, p });
        }
        Ok((v / p, -g * u))
    }

    fn initial_state(&self) -> Result<(f64, f64, f64), SturmError> {
        let x0 = self.a + self.start_offset;
        let d = self.start_offset;
        let p0 = self.p.value(x0)?;
        let (u, du) = match self.start {
            Start::Values { u, du } => (u, du),
            Start::Exponent(s) => (d.powf(s), s * d.powf(s - 1.0)),
            Start::Regular => {
                let opts = QuadOptions::default();
                let (gi, _) = integrate(|x| self.g.value(x), self.a, x0, &[], &opts)?;
                let v0 = -gi;
                // u(x0) = 1 + int_a^x0 v/p, with v(s) ~ -int_a^s g
                let (corr, _) = integrate(
                    |s| {
                        let (gs, _) = integrate(|t| self.g.value(t), self.a, s, &[], &opts)
                            .map_err(|_| EvalError::Other { x: s, message: "inner quadrature".into() })?;
                        Ok(-gs / self.p.value(s)?)
                    },
                    self.a,
                    x0,
                    &[],
                    &opts,
                )?;
                return Ok((x0, 1.0 + corr, v0));
            }
        };
        if !(u.is_finite() && du.is_finite()) || (u == 0.0 && du == 0.0) {
            return Err(SturmError::BadInitialData { u, du });
        }
        Ok((x0, u, p0 * du))
    }
}

// Dormand-Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// One DP5 step; returns the 5th-order state and the error estimate.
fn dp5_step(
    prob: &SturmProblem,
    x: f64,
    (u, v): (f64, f64),
    h: f64,
    side: f64,
) -> Result<((f64, f64), (f64, f64)), SturmError> {
    let mut k = [(0.0, 0.0); 7];
    for s in 0..7 {
        let (mut us, mut vs) = (u, v);
        for (j, kj) in k.iter().enumerate().take(s) {
            us += h * A[s][j] * kj.0;
            vs += h * A[s][j] * kj.1;
        }
        // Stages landing on the segment end use the one-sided limit from inside.
        let stage_side = if C[s] == 0.0 { side } else { -side };
        k[s] = prob.rhs(x + C[s] * h, us, vs, stage_side)?;
    }
    let (mut un, mut vn, mut eu, mut ev) = (u, v, 0.0, 0.0);
    for s in 0..7 {
        un += h * B[s] * k[s].0;
        vn += h * B[s] * k[s].1;
        eu += h * E[s] * k[s].0;
        ev += h * E[s] * k[s].1;
    }
    Ok(((un, vn), (eu, ev)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolutionNode {
    pub x: f64,
    pub u: f64,
    pub v: f64,
    /// `u' = v / p`.
    pub du: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Positivity {
    /// `u > 0` on the whole working interval.
    Positive,
    /// `u > 0` inside, with `u` vanishing (to tolerance) at the right end.
    BoundaryZero,
    /// First zero of `u` inside the interval.
    SignChange { at: f64 },
}

impl Positivity {
    /// A positive solution exists on the open interval.
    pub fn is_positive(&self) -> bool {
        !matches!(self, Positivity::SignChange { .. })
    }
}

/// Accepted integration nodes plus the positivity verdict.
#[derive(Clone)]
pub struct SturmSolution {
    problem: Arc<SturmProblem>,
    pub nodes: Vec<SolutionNode>,
    pub verdict: Positivity,
}

/// Relative size below which `u` at the right end counts as a boundary zero.
const BOUNDARY_TOL: f64 = 1e-6;

pub fn solve_sturm(prob: &SturmProblem) -> Result<SturmSolution, SturmError> {
    let (x0, u0, v0) = prob.initial_state()?;
    let x_end = prob.b - prob.end_offset;
    if !(x0 < x_end) {
        return Err(SturmError::Parameters(format!("start {x0} is not below end {x_end}")));
    }
    let mut stops = prob.breakpoints();
    stops.retain(|&s| s > x0 && s < x_end);
    stops.push(x_end);

    let first_du = prob.rhs(x0, u0, v0, 1.0)?.0;
    let mut nodes = vec![SolutionNode { x: x0, u: u0, v: v0, du: first_du }];
    let (mut x, mut y) = (x0, (u0, v0));
    let mut h = (0.1 * prob.start_offset).max(1e-12 * (x_end - x0)).min(1e-2 * (x_end - x0));
    let mut steps = 0;
    for &stop in &stops {
        while x < stop {
            steps += 1;
            if steps > prob.max_steps {
                return Err(SturmError::TooManySteps { x, steps: prob.max_steps });
            }
            let last = x + h >= stop;
            let step = if last { stop - x } else { h };
            let (yn, e) = dp5_step(prob, x, y, step, 1.0)?;
            let sc = |a: f64, b: f64| prob.atol + prob.rtol * a.abs().max(b.abs());
            let err = (((e.0 / sc(y.0, yn.0)).powi(2) + (e.1 / sc(y.1, yn.1)).powi(2)) / 2.0).sqrt();
            if err <= 1.0 && err.is_finite() {
                x = if last { stop } else { x + step };
                y = yn;
                let side = if last { -1.0 } else { 1.0 };
                let du = prob.rhs(x, y.0, y.1, side)?.0;
                nodes.push(SolutionNode { x, u: y.0, v: y.1, du });
            }
            let factor = if err == 0.0 {
                5.0
            } else if err.is_finite() {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            } else {
                0.2
            };
            h = step * factor;
            if h <= f64::EPSILON * x.abs() || h < f64::MIN_POSITIVE {
                return Err(SturmError::StepCollapse { x });
            }
        }
    }
    let mut sol = SturmSolution { problem: Arc::new(prob.clone()), nodes, verdict: Positivity::Positive };
    sol.verdict = sol.classify()?;
    Ok(sol)
}

impl SturmSolution {
    pub fn problem(&self) -> &SturmProblem {
        &self.problem
    }

    pub fn start(&self) -> f64 {
        self.nodes[0].x
    }

    pub fn end(&self) -> f64 {
        self.nodes[self.nodes.len() - 1].x
    }

    /// Interval on which `u > 0`: up to the first zero when there is one.
    pub fn working_interval(&self) -> (f64, f64) {
        match self.verdict {
            Positivity::SignChange { at } => (self.start(), at),
            _ => (self.start(), self.end()),
        }
    }

    /// No zero inside and `u` strictly of the starting sign at the right end.
    pub fn strictly_positive(&self) -> bool {
        let (first, last) = (self.nodes[0].u, self.nodes[self.nodes.len() - 1].u);
        self.verdict.is_positive() && (first.signum() * last) > 0.0
    }

    fn node_index(&self, x: f64) -> usize {
        match self.nodes.binary_search_by(|n| n.x.total_cmp(&x)) {
            Ok(i) => i,
            Err(0) => 0,
            Err(i) => i - 1,
        }
    }

    /// `(u, v)` at `x` by one DP5 step from the nearest accepted node on the left.
    pub fn state_at(&self, x: f64) -> Result<(f64, f64), SturmError> {
        if x < self.start() || x > self.end() {
            return Err(SturmError::Parameters(format!(
                "x = {x} outside the solved range [{}, {}]",
                self.start(),
                self.end()
            )));
        }
        let i = self.node_index(x);
        let n = self.nodes[i];
        if n.x == x {
            return Ok((n.u, n.v));
        }
        let (y, _) = dp5_step(&self.problem, n.x, (n.u, n.v), x - n.x, 1.0)?;
        Ok(y)
    }

    /// Cubic Hermite interpolant of `u` on the accepted nodes.
    pub fn hermite(&self, x: f64) -> f64 {
        let i = self.node_index(x).min(self.nodes.len() - 2);
        let (n0, n1) = (self.nodes[i], self.nodes[i + 1]);
        let h = n1.x - n0.x;
        let t = ((x - n0.x) / h).clamp(0.0, 1.0);
        let (t2, t3) = (t * t, t * t * t);
        (2.0 * t3 - 3.0 * t2 + 1.0) * n0.u
            + (t3 - 2.0 * t2 + t) * h * n0.du
            + (-2.0 * t3 + 3.0 * t2) * n1.u
            + (t3 - t2) * h * n1.du
    }

    fn classify(&self) -> Result<Positivity, SturmError> {
        let scale = self.nodes.iter().map(|n| n.u.abs()).fold(0.0, f64::max);
        let sign0 = self.nodes[0].u.signum();
        let negate = if sign0 < 0.0 { -1.0 } else { 1.0 };
        for w in self.nodes.windows(2) {
            let (u0, u1) = (negate * w[0].u, negate * w[1].u);
            let is_last = w[1].x == self.end();
            if u1 < 0.0 && !(is_last && u1.abs() <= BOUNDARY_TOL * scale) {
                let f = |x: f64| self.state_at(x).map(|s| s.0).unwrap_or(f64::NAN);
                let at = if u0 == 0.0 { w[0].x } else { brent(f, w[0].x, w[1].x, 1e-12, 0.0).unwrap_or(w[1].x) };
                return Ok(Positivity::SignChange { at });
            }
        }
        let last = negate * self.nodes[self.nodes.len() - 1].u;
        Ok(if last <= BOUNDARY_TOL * scale {
            Positivity::BoundaryZero
        } else {
            Positivity::Positive
        })
    }

    /// Jets of `u` and `v = p u'` at `x` from the Taylor recursion of the system.
    pub fn jets_at(&self, x: f64, order: usize) -> Result<(Jet, Jet), SturmError> {
        if order > MAX_ORDER {
            return Err(EvalError::OrderOverflow { order, max: MAX_ORDER }.into());
        }
        let (u0, v0) = self.state_at(x)?;
        let p = self.problem.p.eval(x, order)?;
        let g = self.problem.g.eval(x, order)?;
        let (pc, gc) = (p.taylor_coeffs(), g.taylor_coeffs());
        let mut u = vec![0.0; order + 1];
        let mut v = vec![0.0; order + 1];
        u[0] = u0;
        v[0] = v0;
        for k in 0..order {
            // v = p u'  =>  v_k = sum_j p_j (k-j+1) u_{k-j+1}
            let mut s = v[k];
            for j in 1..=k {
                s -= pc[j] * (k - j + 1) as f64 * u[k - j + 1];
            }
            u[k + 1] = s / (pc[0] * (k + 1) as f64);
            // v' = -g u
            let conv: f64 = (0..=k).map(|j| gc[j] * u[k - j]).sum();
            v[k + 1] = -conv / (k + 1) as f64;
        }
        let uj = Jet::from_taylor(&u).map_err(|e| EvalError::at(x, e))?;
        let vj = Jet::from_taylor(&v).map_err(|e| EvalError::at(x, e))?;
        Ok((uj, vj))
    }
}

/// `a_0 = -a_1 u'/u` from a solved problem, valid where `u > 0`.
pub struct ConstructedA0 {
    sol: SturmSolution,
    a1: MapRef,
    domain: Interval,
    breakpoints: Vec<f64>,
}

impl SmoothMap for ConstructedA0 {
    fn domain(&self) -> Interval {
        self.domain
    }

    fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    fn eval(&self, x: f64, order: usize) -> Result<Jet, EvalError> {
        check_point(x, order, self.domain, &self.breakpoints)?;
        let to_eval = |e: SturmError| match e {
            SturmError::Eval(e) => e,
            other => EvalError::Other { x, message: other.to_string() },
        };
        let (u, v) = self.sol.jets_at(x, order).map_err(to_eval)?;
        if u.value() == 0.0 {
            return Err(EvalError::at(x, JetError::DivisionByZero));
        }
        let p = self.sol.problem.p.eval(x, order)?;
        let a1 = self.a1.eval(x, order)?;
        let du = v.div(&p).map_err(|e| EvalError::at(x, e))?;
        let ratio = du.div(&u).map_err(|e| EvalError::at(x, e))?;
        Ok(-(a1 * ratio))
    }
}

/// `a_0 = -a_1 u'/u` on the working interval of `sol`.
pub fn construct_a0(a1: MapRef, sol: &SturmSolution) -> Result<MapRef, SturmError> {
    let (lo, hi) = sol.working_interval();
    if let Positivity::SignChange { at } = sol.verdict {
        if at <= lo {
            return Err(SturmError::Vanishes { x: at });
        }
    }
    let bps = sol.problem.breakpoints();
    Ok(Arc::new(ConstructedA0 {
        sol: sol.clone(),
        a1,
        domain: Interval::new(lo, hi),
        breakpoints: bps,
    }))
}

/// Verdict for a radial-type check, with the solution for inspection.
#[derive(Clone)]
pub struct CheckReport {
    pub c: f64,
    pub verdict: Positivity,
    pub solution: SturmSolution,
}

/// Does `-(r y')' - c r P y = 0` have a positive solution on `(0, R)` (regular at 0)?
pub fn hi_potential_check(big_p: MapRef, c: f64, r: f64) -> Result<CheckReport, SturmError> {
    if !(c >= 0.0 && r > 0.0) {
        return Err(SturmError::Parameters(format!("need c >= 0 and R > 0, got c = {c}, R = {r}")));
    }
    let d = Interval::new(0.0, f64::INFINITY);
    let p = crate::jets::FnMap::new(d, |x| Ok(*x)).shared();
    let g = crate::jets::FnMap::new(d, move |x| {
        let px = big_p.eval(x.value(), x.order()).map_err(|_| JetError::Domain { func: "P", value: x.value() })?;
        Ok(*x * px * c)
    })
    .shared();
    let prob = SturmProblem::new(p, g, 0.0, r, Start::Regular)?;
    let solution = solve_sturm(&prob)?;
    Ok(CheckReport { c, verdict: solution.verdict, solution })
}

/// Does `-(r^{k-1} V y')' - c r^{k-1} W y = 0` have a positive solution on `(0, R)`?
pub fn bessel_pair_check(v: MapRef, w: MapRef, k: u32, c: f64, r: f64) -> Result<CheckReport, SturmError> {
    if !(c >= 0.0 && r > 0.0) {
        return Err(SturmError::Parameters(format!("need c >= 0 and R > 0, got c = {c}, R = {r}")));
    }
    let d = Interval::new(0.0, f64::INFINITY);
    let km1 = k as i32 - 1;
    let (v2, w2) = (v.clone(), w.clone());
    let p = crate::jets::FnMap::new(d, move |x| {
        let vx = v2.eval(x.value(), x.order()).map_err(|_| JetError::Domain { func: "V", value: x.value() })?;
        Ok(x.powi(km1)? * vx)
    })
    .shared();
    let g = crate::jets::FnMap::new(d, move |x| {
        let wx = w2.eval(x.value(), x.order()).map_err(|_| JetError::Domain { func: "W", value: x.value() })?;
        Ok(x.powi(km1)? * wx * c)
    })
    .shared();
    let prob = SturmProblem::new(p, g, 0.0, r, Start::Regular)?;
    let solution = solve_sturm(&prob)?;
    Ok(CheckReport { c, verdict: solution.verdict, solution })
}

/// Smallest `c` at which the first zero of the regular solution reaches `R`, by bisection on
/// the sign of `u(R)`.
pub fn critical_c(check: impl Fn(f64) -> Result<CheckReport, SturmError>, c_guess: f64) -> Result<f64, SturmError> {
    let mut lo = 0.0;
    let mut hi = c_guess.max(1e-6);
    let mut tries = 0;
    while check(hi)?.solution.strictly_positive() {
        lo = hi;
        hi *= 2.0;
        tries += 1;
        if tries > 60 {
            return Err(SturmError::NoCriticalValue { c: hi });
        }
    }
    while hi - lo > 1e-12 * hi {
        let mid = 0.5 * (lo + hi);
        if check(mid)?.solution.strictly_positive() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// `a_1 = (C + int_{x0}^x (a_0^2 + g)) / a_0`: the first-order coefficient that, together
/// with `a_0`, has weight `g`.
pub struct AltA1 {
    a0: MapRef,
    g: MapRef,
    x0: f64,
    constant: f64,
    domain: Interval,
    breakpoints: Vec<f64>,
}

pub fn alt_construct_a1(a0: MapRef, g: MapRef, x0: f64, constant: f64) -> Result<MapRef, SturmError> {
    let lo = a0.domain().lo.max(g.domain().lo);
    let hi = a0.domain().hi.min(g.domain().hi);
    let domain = Interval::new(lo, hi);
    if !domain.contains(x0) {
        return Err(SturmError::Parameters(format!("base point {x0} outside {domain}")));
    }
    let mut breakpoints: Vec<f64> = a0.breakpoints().iter().chain(g.breakpoints()).copied().collect();
    breakpoints.sort_by(f64::total_cmp);
    breakpoints.dedup();
    Ok(Arc::new(AltA1 { a0, g, x0, constant, domain, breakpoints }))
}

impl SmoothMap for AltA1 {
    fn domain(&self) -> Interval {
        self.domain
    }

    fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    fn eval(&self, x: f64, order: usize) -> Result<Jet, EvalError> {
        check_point(x, order, self.domain, &self.breakpoints)?;
        let integrand = |t: f64| -> Result<f64, EvalError> {
            let a = self.a0.value(t)?;
            Ok(a * a + self.g.value(t)?)
        };
        let (lo, hi, sign) = if x >= self.x0 { (self.x0, x, 1.0) } else { (x, self.x0, -1.0) };
        let value = if lo == hi {
            0.0
        } else {
            let opts = QuadOptions { tol: 1e-13, ..Default::default() };
            let (v, _) = integrate(integrand, lo, hi, &self.breakpoints, &opts)
                .map_err(|e| EvalError::Other { x, message: e.to_string() })?;
            sign * v
        };
        let a0 = self.a0.eval(x, order)?;
        let mut coef = vec![0.0; order + 1];
        coef[0] = self.constant + value;
        if order > 0 {
            let g = self.g.eval(x, order - 1)?;
            let a0s = a0.truncate(order - 1);
            let h = a0s * a0s + g;
            for k in 0..order {
                coef[k + 1] = h.taylor(k) / (k + 1) as f64;
            }
        }
        let big_i = Jet::from_taylor(&coef).map_err(|e| EvalError::at(x, e))?;
        big_i.div(&a0).map_err(|e| EvalError::at(x, e))
    }
}
