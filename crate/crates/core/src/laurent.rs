//! Truncated Laurent series with complex coefficients in a local chart variable.
//!
//! A series lives in one of two charts of the Riemann sphere:
//!
//! - [`Chart::AtInfinity`]: local variable `w = 1/p`,
//! - [`Chart::AtPoint(c)`]: local variable `w = p - c`.
//!
//! Coefficients are stored on a window `[k_min, k_max]` of exponents of `w`.
//! A series is either exact (a Laurent polynomial) or known only through
//! `w^order`, in which case every coefficient above `order` is unknown and
//! dropped. Products, reciprocals and compositions propagate the order so
//! that no operation claims more accuracy than its inputs carry.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use thiserror::Error;

pub type C64 = Complex64;

/// Number of coefficients retained when an operation on exact inputs
/// produces an infinite series (reciprocal, logarithm, reversion).
pub const DEFAULT_TERMS: usize = 24;

const NEWTON_CAP: usize = 50;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LaurentError {
    #[error("chart mismatch: {0:?} vs {1:?}")]
    ChartMismatch(Chart, Chart),
    #[error("leading coefficient is zero")]
    ZeroLeadingCoefficient,
    #[error("series is not of the form 1 + O(w)")]
    NotUnitForm,
    #[error("composition ill-formed: {0}")]
    CompositionIllFormed(String),
    #[error("series not normalized for reversion: {0}")]
    NotNormalized(String),
    #[error("evaluation at the chart center")]
    EvalAtCenter,
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub enum Chart {
    AtInfinity,
    AtPoint(C64),
}

impl Chart {
    /// Local variable `w` at the global point `p`, or `None` at the center.
    pub fn local(&self, p: C64) -> Option<C64> {
        match *self {
            Chart::AtInfinity => {
                if p == C64::new(0.0, 0.0) {
                    None
                } else {
                    Some(p.inv())
                }
            }
            Chart::AtPoint(c) => Some(p - c),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Laurent {
    chart: Chart,
    k_min: i32,
    coeffs: Vec<C64>,
    order: Option<i32>,
}

fn zero() -> C64 {
    C64::new(0.0, 0.0)
}

fn one() -> C64 {
    C64::new(1.0, 0.0)
}

fn min_order(a: Option<i32>, b: Option<i32>) -> Option<i32> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (Some(x), None) | (None, Some(x)) => Some(x),
        (None, None) => None,
    }
}

impl Laurent {
    /// Exact Laurent polynomial `Σ coeffs[i] w^(k_min + i)`.
    pub fn new(chart: Chart, k_min: i32, coeffs: Vec<C64>) -> Self {
        let mut s = Laurent {
            chart,
            k_min,
            coeffs,
            order: None,
        };
        if s.coeffs.is_empty() {
            s.coeffs.push(zero());
        }
        s
    }

    pub fn zero(chart: Chart) -> Self {
        Laurent::new(chart, 0, vec![zero()])
    }

    pub fn constant(chart: Chart, c: C64) -> Self {
        Laurent::new(chart, 0, vec![c])
    }

    pub fn monomial(chart: Chart, k: i32, c: C64) -> Self {
        Laurent::new(chart, k, vec![c])
    }

    /// The global coordinate `p` written in the given chart.
    pub fn coordinate(chart: Chart) -> Self {
        match chart {
            Chart::AtInfinity => Laurent::monomial(chart, -1, one()),
            Chart::AtPoint(c) => Laurent::new(chart, 0, vec![c, one()]),
        }
    }

    /// Declares the series known only through `w^order`; higher terms are dropped.
    pub fn with_order(mut self, order: i32) -> Self {
        self.truncate_in_place(order);
        self
    }

    pub fn truncate(&self, order: i32) -> Self {
        self.clone().with_order(order)
    }

    fn truncate_in_place(&mut self, order: i32) {
        let order = self.order.map_or(order, |o| o.min(order));
        self.order = Some(order);
        let keep = order - self.k_min + 1;
        if keep <= 0 {
            self.k_min = order;
            self.coeffs = vec![zero()];
        } else if (keep as usize) < self.coeffs.len() {
            self.coeffs.truncate(keep as usize);
        }
    }

    pub fn chart(&self) -> Chart {
        self.chart
    }

    pub fn k_min(&self) -> i32 {
        self.k_min
    }

    pub fn k_max(&self) -> i32 {
        self.k_min + self.coeffs.len() as i32 - 1
    }

    /// Highest exponent known exactly, `None` for an exact polynomial.
    pub fn order(&self) -> Option<i32> {
        self.order
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn coeff(&self, k: i32) -> C64 {
        if k < self.k_min {
            return zero();
        }
        self.coeffs
            .get((k - self.k_min) as usize)
            .copied()
            .unwrap_or_else(zero)
    }

    /// Lowest exponent carrying a nonzero coefficient.
    pub fn valuation(&self) -> Option<i32> {
        self.coeffs
            .iter()
            .position(|c| *c != zero())
            .map(|i| self.k_min + i as i32)
    }

    pub fn is_zero(&self) -> bool {
        self.valuation().is_none()
    }

    fn check_chart(&self, other: &Laurent) -> Result<(), LaurentError> {
        if self.chart != other.chart {
            return Err(LaurentError::ChartMismatch(self.chart, other.chart));
        }
        Ok(())
    }

    /// Drops exact zeros at both ends of the window.
    fn trimmed(mut self) -> Self {
        match self.valuation() {
            None => {
                let k = self.order.map_or(0, |o| o.min(0));
                self.k_min = k;
                self.coeffs = vec![zero()];
            }
            Some(v) => {
                let start = (v - self.k_min) as usize;
                self.coeffs.drain(..start);
                self.k_min = v;
                while self.coeffs.len() > 1 && *self.coeffs.last().unwrap() == zero() {
                    self.coeffs.pop();
                }
            }
        }
        self
    }

    pub fn try_add(&self, other: &Laurent) -> Result<Laurent, LaurentError> {
        self.check_chart(other)?;
        let lo = self.k_min.min(other.k_min);
        let hi = self.k_max().max(other.k_max());
        let coeffs = (lo..=hi).map(|k| self.coeff(k) + other.coeff(k)).collect();
        let mut out = Laurent::new(self.chart, lo, coeffs);
        if let Some(o) = min_order(self.order, other.order) {
            out.truncate_in_place(o);
        }
        Ok(out.trimmed())
    }

    pub fn try_sub(&self, other: &Laurent) -> Result<Laurent, LaurentError> {
        self.try_add(&other.scale(-one()))
    }

    pub fn scale(&self, c: C64) -> Laurent {
        let mut out = self.clone();
        out.coeffs.iter_mut().for_each(|x| *x *= c);
        out
    }

    /// Cauchy product; the result is known through the lowest order either
    /// factor can vouch for.
    pub fn try_mul(&self, other: &Laurent) -> Result<Laurent, LaurentError> {
        self.check_chart(other)?;
        let order = match (self.valuation(), other.valuation()) {
            (Some(va), Some(vb)) => min_order(
                self.order.map(|o| o + vb),
                other.order.map(|o| o + va),
            ),
            // A zero factor known through `o` makes the product known through
            // `o` shifted by the other factor's valuation.
            (None, Some(vb)) => self.order.map(|o| o + vb),
            (Some(va), None) => other.order.map(|o| o + va),
            (None, None) => min_order(self.order, other.order),
        };
        let la = self.coeffs.len();
        let lb = other.coeffs.len();
        let k_min = self.k_min + other.k_min;
        let mut len = la + lb - 1;
        if let Some(o) = order {
            len = len.min((o - k_min + 1).max(1) as usize);
        }
        let mut coeffs = vec![zero(); len];
        for (i, a) in self.coeffs.iter().enumerate() {
            if *a == zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                if i + j >= len {
                    break;
                }
                coeffs[i + j] += a * b;
            }
        }
        let mut out = Laurent::new(self.chart, k_min, coeffs);
        if let Some(o) = order {
            out.truncate_in_place(o);
        }
        Ok(out.trimmed())
    }

    pub fn powi(&self, n: u32) -> Laurent {
        let mut acc = Laurent::constant(self.chart, one());
        for _ in 0..n {
            acc = acc.try_mul(self).expect("same chart");
        }
        acc
    }

    /// Derivative with respect to the global variable `p`.
    pub fn derivative_p(&self) -> Laurent {
        match self.chart {
            Chart::AtPoint(_) => {
                let coeffs: Vec<C64> = self
                    .coeffs
                    .iter()
                    .enumerate()
                    .map(|(i, c)| c * (self.k_min + i as i32) as f64)
                    .collect();
                let mut out = Laurent::new(self.chart, self.k_min - 1, coeffs);
                out.order = self.order.map(|o| o - 1);
                out.trimmed()
            }
            Chart::AtInfinity => {
                // d/dp w^k = -k w^(k+1) for w = 1/p
                let coeffs: Vec<C64> = self
                    .coeffs
                    .iter()
                    .enumerate()
                    .map(|(i, c)| -c * (self.k_min + i as i32) as f64)
                    .collect();
                let mut out = Laurent::new(self.chart, self.k_min + 1, coeffs);
                out.order = self.order.map(|o| o + 1);
                out.trimmed()
            }
        }
    }

    /// Multiplicative inverse, truncated at the order the input supports or,
    /// for exact input, at [`DEFAULT_TERMS`] coefficients.
    pub fn reciprocal(&self) -> Result<Laurent, LaurentError> {
        let v = self.valuation().ok_or(LaurentError::ZeroLeadingCoefficient)?;
        let order = match self.order {
            Some(o) => o - 2 * v,
            None => -v + DEFAULT_TERMS as i32 - 1,
        };
        self.reciprocal_to(order)
    }

    pub fn reciprocal_to(&self, order: i32) -> Result<Laurent, LaurentError> {
        let v = self.valuation().ok_or(LaurentError::ZeroLeadingCoefficient)?;
        let order = match self.order {
            Some(o) => order.min(o - 2 * v),
            None => order,
        };
        let n = (order + v + 1).max(1) as usize;
        let a: Vec<C64> = (0..n).map(|i| self.coeff(v + i as i32)).collect();
        let inv = ps_inverse(&a, n);
        Ok(Laurent::new(self.chart, -v, inv).with_order(order).trimmed())
    }

    /// `log s` for `s = 1 + O(w)`.
    pub fn log_unit(&self) -> Result<Laurent, LaurentError> {
        if self.k_min < 0 && self.coeffs[..(-self.k_min) as usize].iter().any(|c| *c != zero()) {
            return Err(LaurentError::NotUnitForm);
        }
        if (self.coeff(0) - one()).norm() > 1e-12 {
            return Err(LaurentError::NotUnitForm);
        }
        let order = self.order.unwrap_or(DEFAULT_TERMS as i32);
        let x = self
            .try_sub(&Laurent::constant(self.chart, one()))?
            .with_order(order);
        let mut out = Laurent::zero(self.chart).with_order(order);
        if x.is_zero() {
            return Ok(out);
        }
        let mut pow = x.clone();
        let mut k = 1;
        while pow.valuation().is_some_and(|v| v <= order) {
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            out = out.try_add(&pow.scale(C64::new(sign / k as f64, 0.0)))?;
            pow = pow.try_mul(&x)?;
            k += 1;
        }
        Ok(out)
    }

    /// `exp x` for `x = O(w)`; the inverse of [`Laurent::log_unit`].
    pub fn exp_nilpotent(&self) -> Result<Laurent, LaurentError> {
        if self.valuation().is_some_and(|v| v < 1) {
            return Err(LaurentError::NotUnitForm);
        }
        let order = self.order.unwrap_or(DEFAULT_TERMS as i32);
        let x = self.truncate(order);
        let mut out = Laurent::constant(self.chart, one()).with_order(order);
        let mut term = Laurent::constant(self.chart, one());
        let mut k = 1;
        loop {
            term = term.try_mul(&x)?.scale(C64::new(1.0 / k as f64, 0.0));
            if term.valuation().is_none_or(|v| v > order) {
                break;
            }
            out = out.try_add(&term)?;
            k += 1;
        }
        Ok(out)
    }

    /// `outer(inner(·))`: the outer series is read as a function of the
    /// global value produced by `inner`, in the outer's own chart.
    pub fn compose(outer: &Laurent, inner: &Laurent) -> Result<Laurent, LaurentError> {
        let chart = inner.chart;
        // local variable of the outer chart, as a series in the inner chart
        let (u, u_inv) = match outer.chart {
            Chart::AtInfinity => {
                let u_inv = inner.clone();
                let u = if outer.k_max() > 0 || outer.order.is_some() {
                    Some(inner.reciprocal().map_err(|_| {
                        LaurentError::CompositionIllFormed("inner series vanishes".into())
                    })?)
                } else {
                    None
                };
                (u, Some(u_inv))
            }
            Chart::AtPoint(c) => {
                let u = inner.try_sub(&Laurent::constant(chart, c))?;
                let u_inv = if outer.k_min < 0 {
                    Some(u.reciprocal().map_err(|_| {
                        LaurentError::CompositionIllFormed(
                            "inner series hits the outer center".into(),
                        )
                    })?)
                } else {
                    None
                };
                (Some(u), u_inv)
            }
        };
        let mut result_order = None;
        if let Some(o) = outer.order {
            let vu = u
                .as_ref()
                .and_then(|u| u.valuation())
                .ok_or_else(|| LaurentError::CompositionIllFormed("degenerate inner".into()))?;
            if vu < 1 {
                return Err(LaurentError::CompositionIllFormed(
                    "truncated outer series needs an inner series vanishing in the outer variable"
                        .into(),
                ));
            }
            result_order = Some((o + 1) * vu - 1);
        }
        let mut acc = Laurent::zero(chart);
        if let Some(o) = result_order {
            acc = acc.with_order(o);
        }
        // nonnegative powers
        if outer.k_max() >= 0 {
            let mut pow = Laurent::constant(chart, one());
            let start = outer.k_min.max(0);
            for k in 0..=outer.k_max() {
                if k >= start {
                    let c = outer.coeff(k);
                    if c != zero() {
                        acc = acc.try_add(&pow.scale(c))?;
                    }
                }
                if k < outer.k_max() {
                    let u = u.as_ref().ok_or_else(|| {
                        LaurentError::CompositionIllFormed("missing local variable".into())
                    })?;
                    pow = pow.try_mul(u)?;
                    if let Some(o) = result_order {
                        pow = pow.with_order(o);
                        if pow.valuation().is_none_or(|v| v > o) {
                            break;
                        }
                    }
                }
            }
        }
        // negative powers
        if outer.k_min < 0 {
            let u_inv = u_inv.as_ref().ok_or_else(|| {
                LaurentError::CompositionIllFormed("missing inverse local variable".into())
            })?;
            let mut pow = u_inv.clone();
            for k in 1..=(-outer.k_min) {
                let c = outer.coeff(-k);
                if c != zero() {
                    acc = acc.try_add(&pow.scale(c))?;
                }
                if k < -outer.k_min {
                    pow = pow.try_mul(u_inv)?;
                }
            }
        }
        Ok(acc)
    }

    /// Inverse of a normalized chart function.
    ///
    /// At infinity `z = p + O(1)` (leading coefficient nonzero) is inverted to
    /// `p(z)`; at a point `z = r w^-1 + O(1)` is inverted to `p(z) = q + O(1/z)`.
    /// Either way the result is a series in the chart at `z = ∞`.
    pub fn reversion(&self) -> Result<Laurent, LaurentError> {
        let terms = match self.order {
            Some(o) => (o + 2).max(1) as usize,
            None => DEFAULT_TERMS,
        };
        self.reversion_terms(terms)
    }

    /// [`Laurent::reversion`] with the result known through `z^{-(terms-2)}`
    /// at infinity (or `z^{-terms}` for a chart at a point), capped by the
    /// order of the input.
    pub fn reversion_terms(&self, terms: usize) -> Result<Laurent, LaurentError> {
        let v = self
            .valuation()
            .ok_or_else(|| LaurentError::NotNormalized("zero series".into()))?;
        if v != -1 {
            return Err(LaurentError::NotNormalized(format!(
                "expected a simple pole in the local variable, found valuation {v}"
            )));
        }
        let terms = match self.order {
            Some(o) => terms.min((o + 2).max(1) as usize),
            None => terms,
        };
        // y = 1/z as a power series g(w) with g(0) = 0, g'(0) != 0
        let g_series = self.reciprocal_to(terms as i32)?;
        let g: Vec<C64> = (0..=terms).map(|k| g_series.coeff(k as i32)).collect();
        let w_of_y = ps_reversion(&g, terms);
        let out_chart = Chart::AtInfinity;
        let w = Laurent::new(out_chart, 0, w_of_y).with_order(terms as i32);
        match self.chart {
            Chart::AtInfinity => {
                // p = 1/w(y); y = 1/z is the local variable at z = ∞
                let mut p = w.reciprocal()?;
                p = p.with_order(terms as i32 - 2);
                Ok(p)
            }
            Chart::AtPoint(q) => w.try_add(&Laurent::constant(out_chart, q)),
        }
    }

    /// Horner evaluation of principal and regular parts at global points `p`.
    pub fn eval(&self, points: &[C64]) -> Result<Vec<C64>, LaurentError> {
        points.iter().map(|&p| self.eval_at(p)).collect()
    }

    pub fn eval_at(&self, p: C64) -> Result<C64, LaurentError> {
        let w = match self.chart.local(p) {
            Some(w) => w,
            None => {
                return if self.k_max() > 0 {
                    Err(LaurentError::EvalAtCenter)
                } else {
                    Ok(self.coeff(0))
                }
            }
        };
        if w == zero() && self.k_min < 0 {
            return Err(LaurentError::EvalAtCenter);
        }
        Ok(self.eval_local(w))
    }

    /// Evaluation at a value of the local variable `w`.
    pub fn eval_local(&self, w: C64) -> C64 {
        let mut regular = zero();
        for k in (0.max(self.k_min)..=self.k_max()).rev() {
            regular = regular * w + self.coeff(k);
        }
        let mut principal = zero();
        if self.k_min < 0 {
            let winv = w.inv();
            for k in self.k_min..=-1 {
                principal = principal * winv + self.coeff(k);
            }
            principal *= winv;
        }
        regular + principal
    }

    /// Largest coefficient modulus.
    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Max coefficient difference over the window both series know exactly.
    pub fn max_diff(&self, other: &Laurent) -> f64 {
        let lo = self.k_min.min(other.k_min);
        let mut hi = self.k_max().max(other.k_max());
        if let Some(o) = min_order(self.order, other.order) {
            hi = hi.min(o);
        }
        (lo..=hi)
            .map(|k| (self.coeff(k) - other.coeff(k)).norm())
            .fold(0.0, f64::max)
    }
}

impl fmt::Display for Laurent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate() {
            if *c == zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({c})·w^{}", self.k_min + i as i32)?;
        }
        if first {
            write!(f, "0")?;
        }
        if let Some(o) = self.order {
            write!(f, " + O(w^{})", o + 1)?;
        }
        Ok(())
    }
}

impl Add for &Laurent {
    type Output = Laurent;
    fn add(self, rhs: &Laurent) -> Laurent {
        self.try_add(rhs).expect("chart mismatch in Laurent addition")
    }
}

impl Sub for &Laurent {
    type Output = Laurent;
    fn sub(self, rhs: &Laurent) -> Laurent {
        self.try_sub(rhs).expect("chart mismatch in Laurent subtraction")
    }
}

impl Mul for &Laurent {
    type Output = Laurent;
    fn mul(self, rhs: &Laurent) -> Laurent {
        self.try_mul(rhs).expect("chart mismatch in Laurent product")
    }
}

impl Neg for &Laurent {
    type Output = Laurent;
    fn neg(self) -> Laurent {
        self.scale(-one())
    }
}

// Power series helpers on dense coefficient vectors starting at exponent 0,
// all truncated to `n` coefficients.

fn ps_mul(a: &[C64], b: &[C64], n: usize) -> Vec<C64> {
    let mut out = vec![zero(); n];
    for (i, x) in a.iter().enumerate().take(n) {
        if *x == zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate().take(n - i) {
            out[i + j] += x * y;
        }
    }
    out
}

fn ps_inverse(a: &[C64], n: usize) -> Vec<C64> {
    let mut out = vec![zero(); n];
    let a0inv = a[0].inv();
    out[0] = a0inv;
    for k in 1..n {
        let mut s = zero();
        for j in 1..=k.min(a.len() - 1) {
            s += a[j] * out[k - j];
        }
        out[k] = -s * a0inv;
    }
    out
}

/// `g(h(y))` for `h(0) = 0`, by Horner.
fn ps_compose(g: &[C64], h: &[C64], n: usize) -> Vec<C64> {
    let mut acc = vec![zero(); n];
    for c in g.iter().take(n).rev() {
        acc = ps_mul(&acc, h, n);
        acc[0] += c;
    }
    acc
}

fn ps_derivative(g: &[C64]) -> Vec<C64> {
    g.iter()
        .enumerate()
        .skip(1)
        .map(|(k, c)| c * k as f64)
        .collect()
}

/// Compositional inverse `h` of `g` (`g(0) = 0`, `g'(0) != 0`) through `y^n`,
/// by damped Newton iteration on the coefficient vector.
fn ps_reversion(g: &[C64], n: usize) -> Vec<C64> {
    let len = n + 1;
    let dg = ps_derivative(g);
    let mut h = vec![zero(); len];
    h[1] = g[1].inv();
    let mut y = vec![zero(); len];
    y[1] = one();
    let residual = |h: &[C64]| -> Vec<C64> {
        let gh = ps_compose(g, h, len);
        gh.iter().zip(&y).map(|(a, b)| a - b).collect()
    };
    let norm = |v: &[C64]| v.iter().map(|c| c.norm()).fold(0.0, f64::max);
    // Newton on formal power series doubles the number of resolved leading
    // coefficients per step, so the first steps are taken undamped.
    let full_steps = (usize::BITS - len.leading_zeros()) as usize + 1;
    let mut res = residual(&h);
    for it in 0..NEWTON_CAP {
        let r = norm(&res);
        if r == 0.0 {
            break;
        }
        let dgh = ps_compose(&dg, &h, len);
        let step = ps_mul(&res, &ps_inverse(&dgh, len), len);
        let mut damping = 1.0;
        let mut accepted = false;
        for _ in 0..20 {
            let trial: Vec<C64> = h
                .iter()
                .zip(&step)
                .map(|(a, s)| a - s * damping)
                .collect();
            let trial_res = residual(&trial);
            if it < full_steps || norm(&trial_res) < r {
                h = trial;
                res = trial_res;
                accepted = true;
                break;
            }
            damping *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn inf(k_min: i32, coeffs: &[f64]) -> Laurent {
        Laurent::new(Chart::AtInfinity, k_min, coeffs.iter().map(|&x| c(x)).collect())
    }

    fn at(q: f64, k_min: i32, coeffs: &[f64]) -> Laurent {
        Laurent::new(
            Chart::AtPoint(c(q)),
            k_min,
            coeffs.iter().map(|&x| c(x)).collect(),
        )
    }

    #[test]
    fn add_cancels_and_extends_window() {
        // (p + 1/p) + (p - 1/p) = 2p
        let a = inf(-1, &[1.0, 0.0, 1.0]);
        let b = inf(-1, &[1.0, 0.0, -1.0]);
        let s = &a + &b;
        assert_eq!(s.coeff(-1), c(2.0));
        assert_eq!(s.coeff(1), c(0.0));
        assert_eq!(s.k_max(), -1);

        let x = at(0.0, 0, &[1.0, 2.0]);
        let y = at(0.0, 1, &[3.0, 4.0]);
        let s = &x + &y;
        assert_eq!(s.coeffs(), &[c(1.0), c(5.0), c(4.0)]);
        assert_eq!(&x + &Laurent::zero(x.chart()), x);
    }

    #[test]
    fn chart_mismatch_is_reported() {
        let a = inf(0, &[1.0]);
        let b = at(1.0, 0, &[1.0]);
        assert!(matches!(a.try_add(&b), Err(LaurentError::ChartMismatch(..))));
        assert!(matches!(a.try_mul(&b), Err(LaurentError::ChartMismatch(..))));
        let b2 = at(1.0 + 1e-15, 0, &[1.0]);
        assert!(b.try_add(&b2).is_err());
    }

    #[test]
    fn products() {
        // (p + 1/p)(p - 1/p) = p^2 - p^-2
        let a = inf(-1, &[1.0, 0.0, 1.0]);
        let b = inf(-1, &[1.0, 0.0, -1.0]);
        let prod = &a * &b;
        assert_eq!(prod.coeff(-2), c(1.0));
        assert_eq!(prod.coeff(0), c(0.0));
        assert_eq!(prod.coeff(2), c(-1.0));
        assert_eq!(&a * &Laurent::constant(a.chart(), c(1.0)), a);

        // (1 + w)(1 - w + w^2) = 1 + w^3, truncated at w^2
        let x = at(0.0, 0, &[1.0, 1.0]);
        let y = at(0.0, 0, &[1.0, -1.0, 1.0]);
        let p = (&x * &y).truncate(2);
        assert_eq!(p.coeff(0), c(1.0));
        assert_eq!(p.coeff(1), c(0.0));
        assert_eq!(p.coeff(2), c(0.0));
        assert_eq!(p.coeff(3), c(0.0));
        assert_eq!(p.order(), Some(2));
    }

    #[test]
    fn product_order_is_tracked() {
        let a = at(0.0, -1, &[1.0, 1.0, 1.0]).with_order(1);
        let b = at(0.0, 0, &[2.0, 1.0]);
        // a known through w^1, b valuation 0 -> product known through w^1
        assert_eq!((&a * &b).order(), Some(1));
        // b exact with valuation 2 shifts the order up
        let b = at(0.0, 2, &[1.0]);
        assert_eq!((&a * &b).order(), Some(3));
    }

    #[test]
    fn derivatives() {
        // d/dp r/(p-q) = -r/(p-q)^2
        let s = at(2.0, -1, &[3.0]);
        let d = s.derivative_p();
        assert_eq!(d.k_min(), -2);
        assert_eq!(d.coeff(-2), c(-3.0));
        assert!(Laurent::constant(Chart::AtInfinity, c(5.0))
            .derivative_p()
            .is_zero());
        // d/dp (p + a/p) = 1 - a/p^2
        let a = 0.7;
        let s = inf(-1, &[1.0, 0.0, a]);
        let d = s.derivative_p();
        assert_eq!(d.coeff(0), c(1.0));
        assert_eq!(d.coeff(2), c(-a));
        assert_eq!(d.coeff(1), c(0.0));
    }

    #[test]
    fn reciprocals() {
        let s = at(0.0, 0, &[1.0, 1.0]);
        let r = s.reciprocal_to(3).unwrap();
        assert_eq!(r.coeffs(), &[c(1.0), c(-1.0), c(1.0), c(-1.0)]);

        let r_mono = at(1.0, -1, &[4.0]).reciprocal().unwrap();
        assert_eq!(r_mono.valuation(), Some(1));
        assert!((r_mono.coeff(1) - c(0.25)).norm() < 1e-15);

        let s = at(0.0, 0, &[2.0, 2.0]);
        let r = s.reciprocal().unwrap();
        assert!((r.coeff(0) - c(0.5)).norm() < 1e-15);
        assert!((r.coeff(1) - c(-0.5)).norm() < 1e-15);
        assert!((r.coeff(2) - c(0.5)).norm() < 1e-15);
        let back = &s * &r;
        assert!(back.max_diff(&Laurent::constant(s.chart(), c(1.0))) < 1e-14);

        assert_eq!(
            Laurent::zero(Chart::AtInfinity).reciprocal(),
            Err(LaurentError::ZeroLeadingCoefficient)
        );
    }

    #[test]
    fn logarithms() {
        let s = at(0.0, 0, &[1.0, 1.0]).with_order(3);
        let l = s.log_unit().unwrap();
        assert!((l.coeff(1) - c(1.0)).norm() < 1e-15);
        assert!((l.coeff(2) - c(-0.5)).norm() < 1e-15);
        assert!((l.coeff(3) - c(1.0 / 3.0)).norm() < 1e-15);
        assert_eq!(l.order(), Some(3));

        assert!(Laurent::constant(Chart::AtInfinity, c(1.0))
            .log_unit()
            .unwrap()
            .is_zero());

        // log(1 + 2w) = 2w - 2w^2 + ...
        let l = at(0.0, 0, &[1.0, 2.0]).with_order(2).log_unit().unwrap();
        assert!((l.coeff(1) - c(2.0)).norm() < 1e-15);
        assert!((l.coeff(2) - c(-2.0)).norm() < 1e-15);

        assert_eq!(at(0.0, 0, &[2.0, 1.0]).log_unit(), Err(LaurentError::NotUnitForm));
        assert_eq!(at(0.0, -1, &[1.0, 1.0]).log_unit(), Err(LaurentError::NotUnitForm));
    }

    #[test]
    fn compositions() {
        // z^2 ∘ (p + 1/p) = p^2 + 2 + p^-2
        let outer = inf(-2, &[1.0]);
        let inner = inf(-1, &[1.0, 0.0, 1.0]);
        let r = Laurent::compose(&outer, &inner).unwrap();
        assert_eq!(r.coeff(-2), c(1.0));
        assert_eq!(r.coeff(0), c(2.0));
        assert_eq!(r.coeff(2), c(1.0));

        // identity outer
        let id = inf(-1, &[1.0]);
        assert!(Laurent::compose(&id, &inner).unwrap().max_diff(&inner) < 1e-15);

        // 1/z ∘ p(1 + p^-2) = p^-1 - p^-3 + p^-5 - ...
        let outer = inf(1, &[1.0]);
        let r = Laurent::compose(&outer, &inner).unwrap();
        for k in 0..8 {
            let expected = if k % 2 == 0 { 1.0 } else { -1.0 };
            assert!((r.coeff(2 * k + 1) - c(expected)).norm() < 1e-14);
        }
        let check = &r * &inner;
        assert!(check.max_diff(&Laurent::constant(Chart::AtInfinity, c(1.0))) < 1e-13);
    }

    #[test]
    fn truncated_outer_needs_small_inner() {
        let outer = at(0.0, 0, &[1.0, 1.0]).with_order(4);
        let inner = inf(0, &[1.0, 1.0]);
        assert!(matches!(
            Laurent::compose(&outer, &inner),
            Err(LaurentError::CompositionIllFormed(_))
        ));
    }

    #[test]
    fn reversions() {
        let id = inf(-1, &[1.0]);
        let r = id.reversion().unwrap();
        assert!((r.coeff(-1) - c(1.0)).norm() < 1e-15);
        assert!(r.coeffs().iter().skip(1).all(|x| x.norm() < 1e-15));

        // z = p + a/p  ->  p = z - a/z - a^2/z^3 - 2a^3/z^5 - ...
        let a = 0.3;
        let s = inf(-1, &[1.0, 0.0, a]);
        let r = s.reversion().unwrap();
        assert!((r.coeff(-1) - c(1.0)).norm() < 1e-14);
        assert!((r.coeff(1) - c(-a)).norm() < 1e-14);
        assert!((r.coeff(3) - c(-a * a)).norm() < 1e-14);
        assert!((r.coeff(5) - c(-2.0 * a * a * a)).norm() < 1e-14);
        assert!(r.coeff(2).norm() < 1e-14);

        // z = r/(p - q) -> p = q + r/z
        let (q, rr) = (2.0, 1.5);
        let s = at(q, -1, &[rr]);
        let p = s.reversion().unwrap();
        assert!((p.coeff(0) - c(q)).norm() < 1e-14);
        assert!((p.coeff(1) - c(rr)).norm() < 1e-14);
        assert!(p.coeffs().iter().skip(2).all(|x| x.norm() < 1e-14));

        assert!(matches!(
            inf(-2, &[1.0]).reversion(),
            Err(LaurentError::NotNormalized(_))
        ));
    }

    #[test]
    fn evaluation() {
        let s = inf(-1, &[1.0, 0.0, 1.0]);
        assert!((s.eval_at(c(2.0)).unwrap() - c(2.5)).norm() < 1e-15);
        let s = at(2.0, -1, &[1.0]);
        assert!((s.eval_at(c(3.0)).unwrap() - c(1.0)).norm() < 1e-15);
        assert_eq!(s.eval_at(c(2.0)), Err(LaurentError::EvalAtCenter));
        let s = at(0.0, 0, &[1.0, 1.0, 1.0]);
        assert!((s.eval_at(c(0.1)).unwrap() - c(1.11)).norm() < 1e-15);
        let s = at(0.0, -2, &[1.0, 2.0, 3.0]);
        let w = C64::new(0.3, 0.4);
        let expect = w.powi(-2) + w.inv() * 2.0 + 3.0;
        assert!((s.eval_at(w).unwrap() - expect).norm() < 1e-13);
        let s = at(0.0, -3, &[2.0]);
        assert!((s.eval_at(c(0.5)).unwrap() - c(16.0)).norm() < 1e-13);
    }
}
