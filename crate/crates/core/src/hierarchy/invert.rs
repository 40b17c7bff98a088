//! Inverse of the period map: find the Lax tuple with prescribed times.
//!
//! A transport phase integrates the constant field `Σ Δt_{αn} ∂_{αn}` over
//! unit pseudo-time, which moves exactly the truncated times. A Newton
//! polish with a finite-difference Jacobian then removes the integration
//! error; steps are minimum-norm since there are more coefficients than
//! times.

use nalgebra::DMatrix;

use crate::laurent::C64;

use super::{
    flow, period_times, Direction, GeneratingSet, HierarchyError, LaxTuple, PeriodData, Result,
    TimeIndex,
};

/// Target values for the independent times `t_{0n}` (`n ≥ 1`) and `t_{an}`.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TimeTarget {
    pub nt: usize,
    pub indices: Vec<TimeIndex>,
    pub values: Vec<C64>,
}

impl TimeTarget {
    pub fn from_periods(p: &PeriodData) -> Self {
        TimeTarget {
            nt: p.nt,
            indices: p.time_indices(),
            values: p.time_vector(),
        }
    }

    pub fn get(&self, idx: TimeIndex) -> Option<C64> {
        self.indices.iter().position(|&i| i == idx).map(|k| self.values[k])
    }

    pub fn set(&mut self, idx: TimeIndex, value: C64) {
        if let Some(k) = self.indices.iter().position(|&i| i == idx) {
            self.values[k] = value;
        }
    }

    fn residual(&self, p: &PeriodData) -> Vec<C64> {
        self.indices
            .iter()
            .zip(&self.values)
            .map(|(&i, &v)| p.t(i) - v)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InvertOptions {
    pub tol: f64,
    pub max_newton: usize,
    pub transport_substeps: usize,
    pub max_halvings: usize,
    /// Relative finite-difference step for the Jacobian.
    pub fd_step: f64,
}

impl Default for InvertOptions {
    fn default() -> Self {
        InvertOptions {
            tol: 1e-10,
            max_newton: 40,
            transport_substeps: 4,
            max_halvings: 8,
            fd_step: 1e-6,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Inversion {
    pub lax: LaxTuple,
    pub periods: PeriodData,
    pub newton_iterations: usize,
    pub residual: f64,
}

fn max_norm(v: &[C64]) -> f64 {
    v.iter().map(|c| c.norm()).fold(0.0, f64::max)
}

fn transport(
    h: &GeneratingSet,
    target: &TimeTarget,
    guess: &LaxTuple,
    start: &PeriodData,
    opts: &InvertOptions,
) -> Result<LaxTuple> {
    let dir = Direction::new(
        target
            .indices
            .iter()
            .zip(&target.values)
            .map(|(&i, &v)| (i, v - start.t(i)))
            .collect(),
    );
    let mut substeps = opts.transport_substeps.max(1);
    let mut last = None;
    for _ in 0..=opts.max_halvings {
        match flow(guess, h, &dir, 1.0, substeps) {
            Ok(l) => return Ok(l),
            Err(e @ HierarchyError::ContourCollision(_)) | Err(e @ HierarchyError::InvalidLax(_)) => {
                last = Some(e);
                substeps *= 2;
            }
            Err(e) => return Err(e),
        }
    }
    Err(last.unwrap_or(HierarchyError::ContourCollision("transport failed".into())))
}

pub fn invert_period_map(
    h: &GeneratingSet,
    target: &TimeTarget,
    guess: &LaxTuple,
    opts: &InvertOptions,
) -> Result<Inversion> {
    let nt = target.nt;
    let start = period_times(guess, h, nt)?;
    let r0 = target.residual(&start);
    if max_norm(&r0) < opts.tol {
        return Ok(Inversion {
            lax: guess.clone(),
            periods: start,
            newton_iterations: 0,
            residual: max_norm(&r0),
        });
    }
    let mut lax = transport(h, target, guess, &start, opts)?;
    let mut periods = period_times(&lax, h, nt)?;
    let mut r = target.residual(&periods);
    let mut res = max_norm(&r);
    let mut iterations = 0;
    while res >= opts.tol {
        if iterations == opts.max_newton {
            return Err(HierarchyError::NoConvergence {
                iterations,
                residual: res,
            });
        }
        iterations += 1;
        let x = lax.coords();
        let rows = r.len();
        let mut jac = DMatrix::<C64>::zeros(rows, x.len());
        for (col, xi) in x.iter().enumerate() {
            let step = opts.fd_step * (1.0 + xi.norm());
            let mut xp = x.clone();
            xp[col] += step;
            let mut xm = x.clone();
            xm[col] -= step;
            let rp = target.residual(&period_times(&lax.with_coords(&xp)?, h, nt)?);
            let rm = target.residual(&period_times(&lax.with_coords(&xm)?, h, nt)?);
            for k in 0..rows {
                jac[(k, col)] = (rp[k] - rm[k]) / (2.0 * step);
            }
        }
        // times on circles of different radii differ in scale by many orders
        let mut rhs = DMatrix::from_column_slice(rows, 1, &r);
        for k in 0..rows {
            let norm = jac.row(k).norm();
            if norm > 0.0 {
                jac.row_mut(k).unscale_mut(norm);
                rhs[(k, 0)] /= norm;
            }
        }
        let svd = jac.svd(true, true);
        let smax = svd.singular_values.max();
        let smin = svd.singular_values.iter().take(rows.min(x.len())).fold(f64::INFINITY, |a, &b| a.min(b));
        if !(smin > 1e-12 * smax) {
            return Err(HierarchyError::JacobianSingular);
        }
        let delta = svd
            .solve(&rhs, 1e-14 * smax)
            .map_err(|_| HierarchyError::JacobianSingular)?;
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..=opts.max_halvings {
            let trial: Vec<C64> = x
                .iter()
                .zip(delta.iter())
                .map(|(a, d)| a - d * lambda)
                .collect();
            if let Ok(next) = lax.with_coords(&trial) {
                if let Ok(p) = period_times(&next, h, nt) {
                    let rn = target.residual(&p);
                    let resn = max_norm(&rn);
                    if resn < res {
                        lax = next;
                        periods = p;
                        r = rn;
                        res = resn;
                        accepted = true;
                        break;
                    }
                }
            }
            lambda *= 0.5;
        }
        if !accepted {
            return Err(HierarchyError::NoConvergence {
                iterations,
                residual: res,
            });
        }
    }
    Ok(Inversion {
        lax,
        periods,
        newton_iterations: iterations,
        residual: res,
    })
}
