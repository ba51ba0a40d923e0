//! Truncated Taylor arithmetic ("jets") and the [`SmoothMap`] evaluation contract.
//!
//! A [`Jet`] of order `N` carries `f(x), f'(x), ..., f^(N)(x)` at one point. The public
//! accessors speak in derivative values, which is the notation every formula in this crate
//! uses. Internally the stack is held as normalized Taylor coefficients `f^(k)(x) / k!`,
//! because products and compositions are plain convolutions in that basis; the two views
//! differ by the factor `k!`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use thiserror::Error;

/// Largest supported jet order.
pub const MAX_ORDER: usize = 16;

const FACTORIAL: [f64; MAX_ORDER + 1] = {
    let mut f = [1.0; MAX_ORDER + 1];
    let mut k = 1;
    while k <= MAX_ORDER {
        f[k] = f[k - 1] * k as f64;
        k += 1;
    }
    f
};

/// `k!` as a float, for `k <= MAX_ORDER`.
pub fn factorial(k: usize) -> f64 {
    FACTORIAL[k]
}

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum JetError {
    #[error("division by a jet with zero value")]
    DivisionByZero,
    #[error("{func} is undefined at argument {value}")]
    Domain { func: &'static str, value: f64 },
    #[error("non-finite value produced by {func}")]
    NonFinite { func: &'static str },
}

/// Value and derivatives up to a fixed order at a single point.
#[derive(Clone, Copy, PartialEq)]
pub struct Jet {
    order: usize,
    coef: [f64; MAX_ORDER + 1],
}

impl fmt::Debug for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Jet")
            .field("order", &self.order)
            .field("derivs", &self.derivs())
            .finish()
    }
}

fn check_order(order: usize) {
    assert!(
        order <= MAX_ORDER,
        "jet order {order} exceeds the supported maximum {MAX_ORDER}"
    );
}

impl Jet {
    pub fn zero(order: usize) -> Self {
        check_order(order);
        Jet {
            order,
            coef: [0.0; MAX_ORDER + 1],
        }
    }

    pub fn constant(value: f64, order: usize) -> Self {
        let mut j = Jet::zero(order);
        j.coef[0] = value;
        j
    }

    /// The identity map `t -> t` expanded at `x`.
    pub fn variable(x: f64, order: usize) -> Self {
        let mut j = Jet::constant(x, order);
        if order >= 1 {
            j.coef[1] = 1.0;
        }
        j
    }

    /// Build from derivative values `[f, f', ..., f^(N)]`. Rejects NaN and infinities.
    pub fn from_derivs(derivs: &[f64]) -> Result<Self, JetError> {
        assert!(!derivs.is_empty(), "a jet needs at least a value");
        let mut j = Jet::zero(derivs.len() - 1);
        for (k, d) in derivs.iter().enumerate() {
            j.coef[k] = d / FACTORIAL[k];
        }
        j.finite("from_derivs")
    }

    /// Build from normalized Taylor coefficients `f^(k)/k!`.
    pub fn from_taylor(coef: &[f64]) -> Result<Self, JetError> {
        assert!(!coef.is_empty(), "a jet needs at least a value");
        let mut j = Jet::zero(coef.len() - 1);
        j.coef[..coef.len()].copy_from_slice(coef);
        j.finite("from_taylor")
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn value(&self) -> f64 {
        self.coef[0]
    }

    /// `f^(k)(x)`; zero beyond the jet's order.
    pub fn deriv(&self, k: usize) -> f64 {
        if k > self.order {
            0.0
        } else {
            self.coef[k] * FACTORIAL[k]
        }
    }

    pub fn derivs(&self) -> Vec<f64> {
        (0..=self.order).map(|k| self.deriv(k)).collect()
    }

    /// Normalized Taylor coefficient `f^(k)(x)/k!`.
    pub fn taylor(&self, k: usize) -> f64 {
        if k > self.order {
            0.0
        } else {
            self.coef[k]
        }
    }

    pub fn taylor_coeffs(&self) -> &[f64] {
        &self.coef[..=self.order]
    }

    pub fn is_finite(&self) -> bool {
        self.taylor_coeffs().iter().all(|c| c.is_finite())
    }

    pub(crate) fn finite(self, func: &'static str) -> Result<Self, JetError> {
        if self.is_finite() {
            Ok(self)
        } else {
            Err(JetError::NonFinite { func })
        }
    }

    pub fn truncate(&self, order: usize) -> Jet {
        let order = order.min(self.order);
        let mut j = Jet::zero(order);
        j.coef[..=order].copy_from_slice(&self.coef[..=order]);
        j
    }

    /// Jet of `f'`, one order lower. An order-0 jet has no derivative information, so its
    /// derivative is reported as the zero order-0 jet.
    pub fn differentiate(&self) -> Jet {
        if self.order == 0 {
            return Jet::zero(0);
        }
        let mut j = Jet::zero(self.order - 1);
        for k in 0..self.order {
            j.coef[k] = (k + 1) as f64 * self.coef[k + 1];
        }
        j
    }

    /// Jet of `f^(s)`, `s` orders lower.
    pub fn derivative(&self, s: usize) -> Jet {
        assert!(s <= self.order, "cannot take {s} derivatives of an order-{} jet", self.order);
        let mut j = Jet::zero(self.order - s);
        for k in 0..=(self.order - s) {
            j.coef[k] = self.coef[k + s] * FACTORIAL[k + s] / FACTORIAL[k];
        }
        j
    }

    pub fn scale(&self, s: f64) -> Jet {
        let mut j = *self;
        for c in &mut j.coef[..=self.order] {
            *c *= s;
        }
        j
    }

    pub fn add_const(&self, c: f64) -> Jet {
        let mut j = *self;
        j.coef[0] += c;
        j
    }

    pub fn square(&self) -> Jet {
        *self * *self
    }

    pub fn recip(&self) -> Result<Jet, JetError> {
        Jet::constant(1.0, self.order).div(self)
    }

    pub fn div(&self, other: &Jet) -> Result<Jet, JetError> {
        let n = self.order.min(other.order);
        let v0 = other.coef[0];
        if v0 == 0.0 {
            return Err(JetError::DivisionByZero);
        }
        let mut q = Jet::zero(n);
        for k in 0..=n {
            let mut s = self.coef[k];
            for j in 1..=k {
                s -= other.coef[j] * q.coef[k - j];
            }
            q.coef[k] = s / v0;
        }
        q.finite("div")
    }

    /// Integer power; negative exponents require a nonzero value.
    pub fn powi(&self, n: i32) -> Result<Jet, JetError> {
        if n < 0 {
            return self.powi(-n)?.recip();
        }
        let mut result = Jet::constant(1.0, self.order);
        let mut base = *self;
        let mut e = n as u32;
        while e > 0 {
            if e & 1 == 1 {
                result = result * base;
            }
            base = base * base;
            e >>= 1;
        }
        result.finite("powi")
    }

    /// Real power `u^p`, defined for `u > 0` (and for `u = 0` at order 0 when `p > 0`).
    pub fn powf(&self, p: f64) -> Result<Jet, JetError> {
        let u0 = self.coef[0];
        if p.fract() == 0.0 && p.abs() <= i32::MAX as f64 {
            return self.powi(p as i32);
        }
        if u0 == 0.0 && self.order == 0 && p > 0.0 {
            return Ok(Jet::zero(0));
        }
        if u0 <= 0.0 {
            return Err(JetError::Domain { func: "pow", value: u0 });
        }
        let n = self.order;
        let mut w = Jet::zero(n);
        w.coef[0] = u0.powf(p);
        for k in 1..=n {
            let mut s = 0.0;
            for j in 1..=k {
                s += ((p + 1.0) * j as f64 - k as f64) * self.coef[j] * w.coef[k - j];
            }
            w.coef[k] = s / (k as f64 * u0);
        }
        w.finite("pow")
    }

    pub fn sqrt(&self) -> Result<Jet, JetError> {
        if self.coef[0] < 0.0 {
            return Err(JetError::Domain {
                func: "sqrt",
                value: self.coef[0],
            });
        }
        self.powf(0.5)
            .map_err(|_| JetError::Domain { func: "sqrt", value: self.coef[0] })
    }

    pub fn exp(&self) -> Result<Jet, JetError> {
        let n = self.order;
        let mut e = Jet::zero(n);
        e.coef[0] = self.coef[0].exp();
        for k in 1..=n {
            let mut s = 0.0;
            for j in 1..=k {
                s += j as f64 * self.coef[j] * e.coef[k - j];
            }
            e.coef[k] = s / k as f64;
        }
        e.finite("exp")
    }

    pub fn ln(&self) -> Result<Jet, JetError> {
        let u0 = self.coef[0];
        if u0 <= 0.0 {
            return Err(JetError::Domain { func: "ln", value: u0 });
        }
        let n = self.order;
        let mut l = Jet::zero(n);
        l.coef[0] = u0.ln();
        for k in 1..=n {
            let mut s = 0.0;
            for j in 1..k {
                s += j as f64 * l.coef[j] * self.coef[k - j];
            }
            l.coef[k] = (self.coef[k] - s / k as f64) / u0;
        }
        l.finite("ln")
    }

    /// `(sin u, cos u)` from the coupled recurrences.
    pub fn sin_cos(&self) -> (Jet, Jet) {
        let n = self.order;
        let mut s = Jet::zero(n);
        let mut c = Jet::zero(n);
        s.coef[0] = self.coef[0].sin();
        c.coef[0] = self.coef[0].cos();
        for k in 1..=n {
            let (mut ds, mut dc) = (0.0, 0.0);
            for j in 1..=k {
                let ju = j as f64 * self.coef[j];
                ds += ju * c.coef[k - j];
                dc += ju * s.coef[k - j];
            }
            s.coef[k] = ds / k as f64;
            c.coef[k] = -dc / k as f64;
        }
        (s, c)
    }

    pub fn sinh_cosh(&self) -> Result<(Jet, Jet), JetError> {
        let n = self.order;
        let mut s = Jet::zero(n);
        let mut c = Jet::zero(n);
        s.coef[0] = self.coef[0].sinh();
        c.coef[0] = self.coef[0].cosh();
        for k in 1..=n {
            let (mut ds, mut dc) = (0.0, 0.0);
            for j in 1..=k {
                let ju = j as f64 * self.coef[j];
                ds += ju * c.coef[k - j];
                dc += ju * s.coef[k - j];
            }
            s.coef[k] = ds / k as f64;
            c.coef[k] = dc / k as f64;
        }
        Ok((s.finite("sinh")?, c.finite("cosh")?))
    }

    pub fn sin(&self) -> Result<Jet, JetError> {
        self.sin_cos().0.finite("sin")
    }

    pub fn cos(&self) -> Result<Jet, JetError> {
        self.sin_cos().1.finite("cos")
    }

    pub fn tan(&self) -> Result<Jet, JetError> {
        let (s, c) = self.sin_cos();
        s.div(&c).map_err(|_| JetError::Domain { func: "tan", value: self.value() })
    }

    pub fn cot(&self) -> Result<Jet, JetError> {
        let (s, c) = self.sin_cos();
        c.div(&s).map_err(|_| JetError::Domain { func: "cot", value: self.value() })
    }

    pub fn sec(&self) -> Result<Jet, JetError> {
        let c = self.sin_cos().1;
        c.recip().map_err(|_| JetError::Domain { func: "sec", value: self.value() })
    }

    pub fn csc(&self) -> Result<Jet, JetError> {
        let s = self.sin_cos().0;
        s.recip().map_err(|_| JetError::Domain { func: "csc", value: self.value() })
    }

    pub fn sinh(&self) -> Result<Jet, JetError> {
        Ok(self.sinh_cosh()?.0)
    }

    pub fn cosh(&self) -> Result<Jet, JetError> {
        Ok(self.sinh_cosh()?.1)
    }

    /// `w' = u' (1 - w^2)` is shared by tanh and coth; solving it directly avoids the
    /// overflow of sinh and cosh for large arguments.
    fn riccati_1mw2(&self, w0: f64) -> Jet {
        let n = self.order;
        let mut w = Jet::zero(n);
        w.coef[0] = w0;
        for k in 1..=n {
            let mut s = 0.0;
            for j in 1..=k {
                let m = k - j;
                let sq: f64 = (0..=m).map(|i| w.coef[i] * w.coef[m - i]).sum();
                let one = if m == 0 { 1.0 } else { 0.0 };
                s += j as f64 * self.coef[j] * (one - sq);
            }
            w.coef[k] = s / k as f64;
        }
        w
    }

    pub fn tanh(&self) -> Result<Jet, JetError> {
        self.riccati_1mw2(self.coef[0].tanh()).finite("tanh")
    }

    pub fn coth(&self) -> Result<Jet, JetError> {
        let u0 = self.coef[0];
        if u0 == 0.0 {
            return Err(JetError::Domain { func: "coth", value: u0 });
        }
        self.riccati_1mw2(1.0 / u0.tanh()).finite("coth")
    }

    /// `F(u)` where `outer[k] = F^(k)(u(x)) / k!` are the normalized Taylor coefficients of
    /// the outer function at the inner value. `outer` must cover this jet's order.
    pub fn compose_taylor(&self, outer: &[f64]) -> Result<Jet, JetError> {
        let n = self.order;
        assert!(outer.len() > n, "outer series too short for an order-{n} composition");
        let mut h = *self;
        h.coef[0] = 0.0;
        let mut result = Jet::constant(outer[0], n);
        let mut power = Jet::constant(1.0, n);
        for coef in outer.iter().take(n + 1).skip(1) {
            power = power * h;
            for k in 0..=n {
                result.coef[k] += coef * power.coef[k];
            }
        }
        result.finite("compose")
    }

    /// `F(u)` from derivative values `outer[k] = F^(k)(u(x))`.
    pub fn compose(&self, outer: &[f64]) -> Result<Jet, JetError> {
        let taylor: Vec<f64> = outer
            .iter()
            .take(self.order + 1)
            .enumerate()
            .map(|(k, d)| d / FACTORIAL[k])
            .collect();
        self.compose_taylor(&taylor)
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, rhs: Jet) -> Jet {
        let n = self.order.min(rhs.order);
        let mut j = Jet::zero(n);
        for k in 0..=n {
            j.coef[k] = self.coef[k] + rhs.coef[k];
        }
        j
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, rhs: Jet) -> Jet {
        let n = self.order.min(rhs.order);
        let mut j = Jet::zero(n);
        for k in 0..=n {
            j.coef[k] = self.coef[k] - rhs.coef[k];
        }
        j
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, rhs: Jet) -> Jet {
        let n = self.order.min(rhs.order);
        let mut j = Jet::zero(n);
        for k in 0..=n {
            let mut s = 0.0;
            for i in 0..=k {
                s += self.coef[i] * rhs.coef[k - i];
            }
            j.coef[k] = s;
        }
        j
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Add<f64> for Jet {
    type Output = Jet;
    fn add(self, rhs: f64) -> Jet {
        self.add_const(rhs)
    }
}

impl Sub<f64> for Jet {
    type Output = Jet;
    fn sub(self, rhs: f64) -> Jet {
        self.add_const(-rhs)
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(self, rhs: f64) -> Jet {
        self.scale(rhs)
    }
}

/// The standard mollifier `exp(-1/(1-t^2))` applied to a jet argument `t`.
///
/// Returns the exact zero jet once `1 - t^2 <= 1e-12`: every derivative of the mollifier
/// decays faster than any power there, and evaluating `-1/(1-t^2)` would overflow.
pub fn mollifier(t: &Jet) -> Jet {
    let q = (t.square() - 1.0).scale(-1.0);
    if q.value() <= 1e-12 {
        return Jet::zero(t.order());
    }
    let inner = match q.recip() {
        Ok(r) => -r,
        Err(_) => return Jet::zero(t.order()),
    };
    match inner.exp() {
        Ok(mut e) => {
            for c in &mut e.coef[..=t.order()] {
                if c.abs() < 1e-300 {
                    *c = 0.0;
                }
            }
            e
        }
        Err(_) => Jet::zero(t.order()),
    }
}

/// Jet at `x` of the mollifier rescaled to the support `(l, r)`; zero outside it.
pub fn bump(l: f64, r: f64, x: f64, order: usize) -> Jet {
    assert!(l < r, "bump support must satisfy l < r");
    if x <= l || x >= r {
        return Jet::zero(order);
    }
    let t = Jet::variable(x, order)
        .add_const(-0.5 * (l + r))
        .scale(2.0 / (r - l));
    mollifier(&t)
}

/// Open interval `(lo, hi)`; either end may be infinite.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        assert!(lo < hi, "interval requires lo < hi (got {lo}, {hi})");
        Interval { lo, hi }
    }

    pub fn real_line() -> Self {
        Interval {
            lo: f64::NEG_INFINITY,
            hi: f64::INFINITY,
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        x > self.lo && x < self.hi
    }

    pub fn is_finite(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }

    pub fn length(&self) -> f64 {
        self.hi - self.lo
    }

    /// Compact window used for numerical scans: a relative margin of `margin` on finite
    /// domains, and a window reaching `1e-3 .. 1e3` away from a finite endpoint otherwise.
    pub fn scan_window(&self, margin: f64) -> (f64, f64) {
        match (self.lo.is_finite(), self.hi.is_finite()) {
            (true, true) => {
                let m = margin * self.length();
                (self.lo + m, self.hi - m)
            }
            (true, false) => (self.lo + 1e-3, self.lo + 1e3),
            (false, true) => (self.hi - 1e3, self.hi - 1e-3),
            (false, false) => (-1e3, 1e3),
        }
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", fmt_endpoint(self.lo), fmt_endpoint(self.hi))
    }
}

fn fmt_endpoint(x: f64) -> String {
    if x == f64::INFINITY {
        "inf".into()
    } else if x == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{x}")
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("x = {x} lies outside the domain {domain}")]
    OutsideDomain { x: f64, domain: Interval },
    #[error("x = {x} is a breakpoint; the map is not evaluated there")]
    AtBreakpoint { x: f64 },
    #[error("at x = {x}: {source}")]
    Jet { x: f64, source: JetError },
    #[error("requested jet order {order} exceeds {max}")]
    OrderOverflow { order: usize, max: usize },
    #[error("at x = {x}: {message}")]
    Other { x: f64, message: String },
}

impl EvalError {
    pub fn at(x: f64, source: JetError) -> Self {
        EvalError::Jet { x, source }
    }
}

/// Something that yields jets of a function on an open interval, possibly with interior
/// breakpoints where it is not evaluated.
///
/// Implementations must be safe to call concurrently.
pub trait SmoothMap: Send + Sync {
    fn domain(&self) -> Interval;

    fn breakpoints(&self) -> &[f64] {
        &[]
    }

    fn eval(&self, x: f64, order: usize) -> Result<Jet, EvalError>;

    fn value(&self, x: f64) -> Result<f64, EvalError> {
        Ok(self.eval(x, 0)?.value())
    }
}

pub type MapRef = Arc<dyn SmoothMap>;

pub(crate) fn is_breakpoint(x: f64, breakpoints: &[f64]) -> bool {
    breakpoints
        .iter()
        .any(|&b| (x - b).abs() <= 4.0 * f64::EPSILON * b.abs().max(1.0))
}

pub(crate) fn check_point(
    x: f64,
    order: usize,
    domain: Interval,
    breakpoints: &[f64],
) -> Result<(), EvalError> {
    if order > MAX_ORDER {
        return Err(EvalError::OrderOverflow {
            order,
            max: MAX_ORDER,
        });
    }
    if !domain.contains(x) {
        return Err(EvalError::OutsideDomain { x, domain });
    }
    if is_breakpoint(x, breakpoints) {
        return Err(EvalError::AtBreakpoint { x });
    }
    Ok(())
}

type JetFn = dyn Fn(&Jet) -> Result<Jet, JetError> + Send + Sync;

/// A [`SmoothMap`] given by a closure over the independent-variable jet.
pub struct FnMap {
    domain: Interval,
    breakpoints: Vec<f64>,
    f: Box<JetFn>,
}

impl FnMap {
    pub fn new<F>(domain: Interval, f: F) -> Self
    where
        F: Fn(&Jet) -> Result<Jet, JetError> + Send + Sync + 'static,
    {
        FnMap {
            domain,
            breakpoints: Vec::new(),
            f: Box::new(f),
        }
    }

    pub fn with_breakpoints(mut self, mut breakpoints: Vec<f64>) -> Self {
        breakpoints.sort_by(f64::total_cmp);
        breakpoints.dedup();
        self.breakpoints = breakpoints;
        self
    }

    pub fn shared(self) -> MapRef {
        Arc::new(self)
    }
}

impl SmoothMap for FnMap {
    fn domain(&self) -> Interval {
        self.domain
    }

    fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    fn eval(&self, x: f64, order: usize) -> Result<Jet, EvalError> {
        check_point(x, order, self.domain, &self.breakpoints)?;
        let var = Jet::variable(x, order);
        (self.f)(&var)
            .and_then(|j| j.finite("map"))
            .map_err(|e| EvalError::at(x, e))
    }
}

/// Constant map on a domain.
pub fn constant_map(domain: Interval, c: f64) -> MapRef {
    FnMap::new(domain, move |x| Ok(Jet::constant(c, x.order()))).shared()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn assert_derivs(j: &Jet, expected: &[f64], tol: f64) {
        assert_eq!(j.order() + 1, expected.len());
        for (k, e) in expected.iter().enumerate() {
            assert!(
                (j.deriv(k) - e).abs() <= tol * (1.0 + e.abs()),
                "derivative {k}: got {}, expected {e}",
                j.deriv(k)
            );
        }
    }

    #[test]
    fn square_of_variable() {
        let x = Jet::variable(3.0, 2);
        assert_derivs(&(x * x), &[9.0, 6.0, 2.0], 0.0);
    }

    #[test]
    fn reciprocal_of_variable() {
        let one = Jet::constant(1.0, 2);
        let q = one.div(&Jet::variable(2.0, 2)).unwrap();
        assert_derivs(&q, &[0.5, -0.25, 0.25], 1e-15);
    }

    #[test]
    fn sqrt_power() {
        let p = Jet::variable(1.0, 1).powf(0.5).unwrap();
        assert_derivs(&p, &[1.0, 0.5], 1e-15);
    }

    #[test]
    fn sine_at_zero() {
        let s = Jet::variable(0.0, 3).sin().unwrap();
        assert_derivs(&s, &[0.0, 1.0, 0.0, -1.0], 1e-15);
    }

    #[test]
    fn cot_at_half_pi() {
        let c = Jet::variable(std::f64::consts::FRAC_PI_2, 1).cot().unwrap();
        assert_derivs(&c, &[0.0, -1.0], 1e-15);
    }

    #[test]
    fn mollifier_at_center() {
        let m = mollifier(&Jet::variable(0.0, 2));
        let e = (-1.0f64).exp();
        assert_derivs(&m, &[e, 0.0, -2.0 * e], 1e-14);
    }

    #[test]
    fn division_by_zero_is_an_error() {
        let z = Jet::zero(2);
        assert_eq!(Jet::constant(1.0, 2).div(&z), Err(JetError::DivisionByZero));
        assert!(matches!(
            Jet::variable(-1.0, 1).ln(),
            Err(JetError::Domain { func: "ln", .. })
        ));
        assert!(Jet::variable(0.0, 1).powf(0.5).is_err());
        assert!(Jet::variable(0.0, 1).cot().is_err());
    }

    #[test]
    fn non_finite_construction_rejected() {
        assert!(Jet::from_derivs(&[1.0, f64::NAN]).is_err());
        assert!(Jet::from_derivs(&[f64::INFINITY]).is_err());
        assert!(Jet::variable(800.0, 1).exp().is_err());
    }

    #[test]
    #[should_panic]
    fn order_above_max_panics() {
        let _ = Jet::zero(MAX_ORDER + 1);
    }

    #[test]
    fn bump_symmetry_and_support() {
        let mid = bump(1.0, 3.0, 2.0, 1);
        assert_relative_eq!(mid.value(), (-1.0f64).exp(), epsilon = 1e-15);
        assert_eq!(mid.deriv(1), 0.0);
        for x in [0.0, 1.0, 3.0, 4.0] {
            assert_eq!(bump(1.0, 3.0, x, 5), Jet::zero(5));
        }
    }

    #[test]
    fn bump_vanishes_near_endpoints() {
        for order in [0, 4, 8] {
            let j = bump(0.0, 1.0, 1e-9, order);
            assert!(j.taylor_coeffs().iter().all(|&c| c == 0.0));
        }
    }

    #[test]
    fn derivative_shift_matches_repeated_differentiation() {
        let j = Jet::variable(0.7, 6).exp().unwrap() * Jet::variable(0.7, 6).sin().unwrap();
        let a = j.derivative(3);
        let b = j.differentiate().differentiate().differentiate();
        for k in 0..=3 {
            assert_relative_eq!(a.deriv(k), b.deriv(k), max_relative = 1e-14);
        }
    }

    #[test]
    fn composition_matches_chain_rule() {
        // exp(sin x) built two ways
        let x = Jet::variable(0.4, 5);
        let direct = x.sin().unwrap().exp().unwrap();
        let s = x.sin().unwrap();
        let outer: Vec<f64> = vec![s.value().exp(); 6];
        let composed = s.compose(&outer).unwrap();
        for k in 0..=5 {
            assert_relative_eq!(direct.deriv(k), composed.deriv(k), max_relative = 1e-13);
        }
    }

    #[test]
    fn hyperbolic_identities() {
        let x = Jet::variable(0.9, 6);
        let (s, c) = x.sinh_cosh().unwrap();
        let one = c * c - s * s;
        assert_relative_eq!(one.value(), 1.0, epsilon = 1e-14);
        for k in 1..=6 {
            assert!(one.deriv(k).abs() < 1e-12);
        }
        let t = x.tanh().unwrap();
        let ct = x.coth().unwrap();
        let prod = t * ct;
        assert_relative_eq!(prod.value(), 1.0, epsilon = 1e-14);
        assert!(prod.deriv(3).abs() < 1e-11);
    }

    #[test]
    fn fn_map_checks_domain_and_breakpoints() {
        let m = FnMap::new(Interval::new(0.0, 1.0), |x| Ok(*x)).with_breakpoints(vec![0.5]);
        assert!(matches!(m.eval(2.0, 0), Err(EvalError::OutsideDomain { .. })));
        assert!(matches!(m.eval(0.5, 0), Err(EvalError::AtBreakpoint { .. })));
        assert!(matches!(m.eval(0.1, 17), Err(EvalError::OrderOverflow { .. })));
        assert_eq!(m.eval(0.25, 1).unwrap().derivs(), vec![0.25, 1.0]);
    }

    #[test]
    fn scan_windows() {
        assert_eq!(Interval::new(0.0, f64::INFINITY).scan_window(1e-4), (1e-3, 1e3 + 0.0));
        let (a, b) = Interval::new(0.0, 1.0).scan_window(1e-4);
        assert_relative_eq!(a, 1e-4);
        assert_relative_eq!(b, 1.0 - 1e-4);
    }
}
