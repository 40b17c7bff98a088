//! Trapezoid-rule quadrature and Cauchy splitting on circles.
//!
//! Samples are taken at `p_j = c + ρ e^{2πij/n}`. On such nodes the trapezoid
//! rule is the discrete Fourier transform, so coefficient extraction is exact
//! for Laurent polynomials in `p - c` whose exponents stay below `n/2`.

use std::cell::RefCell;
use std::f64::consts::PI;

use rustfft::FftPlanner;
use thiserror::Error;

use crate::laurent::{Laurent, LaurentError, C64};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ContourError {
    #[error("invalid circle: {0}")]
    InvalidCircle(String),
    #[error("point lies on the contour")]
    PointOnContour,
    #[error("evaluation failed on the contour: {0}")]
    EvalFailure(String),
}

impl From<LaurentError> for ContourError {
    fn from(e: LaurentError) -> Self {
        ContourError::EvalFailure(e.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Circle {
    pub center: C64,
    pub radius: f64,
    pub nodes: usize,
}

impl Circle {
    pub fn new(center: C64, radius: f64, nodes: usize) -> Result<Self, ContourError> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(ContourError::InvalidCircle(format!("radius {radius}")));
        }
        if nodes < 16 || !nodes.is_power_of_two() {
            return Err(ContourError::InvalidCircle(format!(
                "node count {nodes} must be a power of two and at least 16"
            )));
        }
        if !(center.re.is_finite() && center.im.is_finite()) {
            return Err(ContourError::InvalidCircle("center not finite".into()));
        }
        Ok(Circle {
            center,
            radius,
            nodes,
        })
    }

    /// `p_j - c` for node `j`.
    pub fn offset(&self, j: usize) -> C64 {
        C64::from_polar(self.radius, 2.0 * PI * j as f64 / self.nodes as f64)
    }

    pub fn node(&self, j: usize) -> C64 {
        self.center + self.offset(j)
    }

    pub fn points(&self) -> Vec<C64> {
        (0..self.nodes).map(|j| self.node(j)).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sampled {
    pub circle: Circle,
    pub values: Vec<C64>,
}

impl Sampled {
    pub fn from_values(circle: Circle, values: Vec<C64>) -> Self {
        assert_eq!(values.len(), circle.nodes, "sample count must match nodes");
        Sampled { circle, values }
    }

    /// Pointwise combination of two samplings on the same circle.
    pub fn zip_with(&self, other: &Sampled, f: impl Fn(C64, C64) -> C64) -> Sampled {
        assert_eq!(self.circle, other.circle, "samplings on different circles");
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| f(a, b))
            .collect();
        Sampled {
            circle: self.circle,
            values,
        }
    }

    pub fn map(&self, f: impl Fn(C64) -> C64) -> Sampled {
        Sampled {
            circle: self.circle,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

pub fn sample<E>(
    circle: &Circle,
    mut f: impl FnMut(C64) -> Result<C64, E>,
) -> Result<Sampled, ContourError>
where
    E: std::fmt::Display,
{
    let values = (0..circle.nodes)
        .map(|j| f(circle.node(j)).map_err(|e| ContourError::EvalFailure(e.to_string())))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Sampled {
        circle: *circle,
        values,
    })
}

pub fn sample_series(circle: &Circle, s: &Laurent) -> Result<Sampled, ContourError> {
    sample(circle, |p| s.eval_at(p))
}

/// `(1/2πi) ∮ f(p) (p - c)^e dp` by the trapezoid rule.
pub fn moment(f: &Sampled, exponent: i32) -> C64 {
    let c = &f.circle;
    let sum: C64 = f
        .values
        .iter()
        .enumerate()
        .map(|(j, v)| v * c.offset(j).powi(exponent + 1))
        .sum();
    sum / c.nodes as f64
}

/// `(1/2πi) ∮ f(q) / (q - p) dq`.
pub fn cauchy_transform(f: &Sampled, p: C64) -> Result<C64, ContourError> {
    let c = &f.circle;
    if ((p - c.center).norm() - c.radius).abs() <= c.radius * 1e-6 {
        return Err(ContourError::PointOnContour);
    }
    let sum: C64 = f
        .values
        .iter()
        .enumerate()
        .map(|(j, v)| v * c.offset(j) / (c.node(j) - p))
        .sum();
    Ok(sum / c.nodes as f64)
}

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn fft(values: &[C64], inverse: bool) -> Vec<C64> {
    let mut buf = values.to_vec();
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        let plan = if inverse {
            p.plan_fft_inverse(buf.len())
        } else {
            p.plan_fft_forward(buf.len())
        };
        plan.process(&mut buf);
    });
    buf
}

/// Signed frequency of DFT bin `k`; the Nyquist bin counts as negative.
fn frequency(k: usize, n: usize) -> i64 {
    if k < n / 2 {
        k as i64
    } else {
        k as i64 - n as i64
    }
}

/// Scaled Fourier coefficients: `f(p) = Σ_k a_k ((p - c)/ρ)^k`, indexed by
/// signed frequency through [`Spectrum::get`].
#[derive(Debug, Clone)]
pub struct Spectrum {
    circle: Circle,
    bins: Vec<C64>,
}

impl Spectrum {
    pub fn of(f: &Sampled) -> Spectrum {
        let n = f.circle.nodes as f64;
        let bins = fft(&f.values, false).into_iter().map(|x| x / n).collect();
        Spectrum {
            circle: f.circle,
            bins,
        }
    }

    /// Zeroes every bin smaller than `floor` times the largest one. Roundoff
    /// sits at a fixed level in the scaled bins, so this keeps it from being
    /// blown up by `ρ^{-k}` in [`Spectrum::laurent_coeff`].
    pub fn denoised(mut self, floor: f64) -> Spectrum {
        let cut = floor * self.bins.iter().map(|b| b.norm()).fold(0.0, f64::max);
        for b in &mut self.bins {
            if b.norm() < cut {
                *b = C64::new(0.0, 0.0);
            }
        }
        self
    }

    /// Largest bin with `|k| ≥ nodes/4`, relative to the largest bin. Small
    /// for a function the grid resolves.
    pub fn aliasing_level(&self) -> f64 {
        let n = self.bins.len();
        let top = self.bins.iter().map(|b| b.norm()).fold(0.0, f64::max);
        if top == 0.0 {
            return 0.0;
        }
        let band = self.bins[n / 4..n - n / 4].iter().map(|b| b.norm()).fold(0.0, f64::max);
        band / top
    }

    /// Scaled coefficient of frequency `k` (zero outside the resolved band).
    pub fn get(&self, k: i64) -> C64 {
        let n = self.bins.len() as i64;
        if k >= n / 2 || k < -n / 2 {
            return C64::new(0.0, 0.0);
        }
        self.bins[k.rem_euclid(n) as usize]
    }

    /// Coefficient of `(p - c)^k`.
    pub fn laurent_coeff(&self, k: i64) -> C64 {
        self.get(k) / self.circle.radius.powi(k as i32)
    }

    /// Sums the negative-frequency part at a point outside the circle.
    pub fn eval_outside(&self, p: C64) -> C64 {
        let x = self.circle.radius / (p - self.circle.center);
        let n = self.bins.len() as i64;
        let mut acc = C64::new(0.0, 0.0);
        for k in (1..=n / 2).rev() {
            acc = (acc + self.get(-k)) * x;
        }
        acc
    }

    /// Sums the nonnegative-frequency part at a point inside the circle.
    pub fn eval_inside(&self, p: C64) -> C64 {
        let x = (p - self.circle.center) / self.circle.radius;
        let n = self.bins.len() as i64;
        let mut acc = C64::new(0.0, 0.0);
        for k in (0..n / 2).rev() {
            acc = acc * x + self.get(k);
        }
        acc
    }
}

/// Splits boundary data into the part holomorphic inside the circle and the
/// part holomorphic outside and vanishing at infinity.
pub fn cauchy_split(f: &Sampled) -> (Sampled, Sampled) {
    let n = f.circle.nodes;
    let spectrum = fft(&f.values, false);
    let mut inside = vec![C64::new(0.0, 0.0); n];
    let mut outside = vec![C64::new(0.0, 0.0); n];
    for (k, x) in spectrum.into_iter().enumerate() {
        if frequency(k, n) >= 0 {
            inside[k] = x / n as f64;
        } else {
            outside[k] = x / n as f64;
        }
    }
    (
        Sampled::from_values(f.circle, fft(&inside, true)),
        Sampled::from_values(f.circle, fft(&outside, true)),
    )
}
