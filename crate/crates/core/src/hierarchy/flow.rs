//! Integration along weighted sums of flows.

use crate::laurent::C64;

use super::{whitham_vector_field, GeneratingSet, LaxTuple, Result, Tangent, TimeIndex};

/// `Σ weight · ∂_{idx}`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Direction {
    pub terms: Vec<(TimeIndex, C64)>,
}

impl Direction {
    pub fn new(terms: Vec<(TimeIndex, C64)>) -> Self {
        Direction { terms }
    }

    pub fn single(idx: TimeIndex) -> Self {
        Direction {
            terms: vec![(idx, C64::new(1.0, 0.0))],
        }
    }

    pub fn field(&self, lax: &LaxTuple, h: &GeneratingSet) -> Result<Tangent> {
        let mut out = Tangent::zero_like(lax);
        for &(idx, w) in &self.terms {
            if w != C64::new(0.0, 0.0) {
                out.axpy(w, &whitham_vector_field(lax, h, idx)?);
            }
        }
        Ok(out)
    }
}

/// Classical RK4 over `substeps` equal steps covering pseudo-time `step`.
/// Circles move with their centers; every stage is validated.
pub fn flow(
    lax: &LaxTuple,
    h: &GeneratingSet,
    dir: &Direction,
    step: f64,
    substeps: usize,
) -> Result<LaxTuple> {
    if step == 0.0 || dir.terms.is_empty() {
        return Ok(lax.clone());
    }
    let substeps = substeps.max(1);
    let dt = step / substeps as f64;
    let mut x = lax.clone();
    for _ in 0..substeps {
        let k1 = dir.field(&x, h)?;
        let k2 = dir.field(&x.advance(&k1, dt / 2.0)?, h)?;
        let k3 = dir.field(&x.advance(&k2, dt / 2.0)?, h)?;
        let k4 = dir.field(&x.advance(&k3, dt)?, h)?;
        let mut incr = k1;
        incr.axpy(C64::new(2.0, 0.0), &k2);
        incr.axpy(C64::new(2.0, 0.0), &k3);
        incr.axpy(C64::new(1.0, 0.0), &k4);
        x = x.advance(&incr, dt / 6.0)?;
    }
    Ok(x)
}

/// Central difference `(f(flow ε) - f(flow -ε))/2ε` of a vector-valued
/// observable, with one Richardson level when requested. Each flow by `ε`
/// takes `substeps` RK4 steps.
pub fn flow_difference<F>(
    lax: &LaxTuple,
    h: &GeneratingSet,
    dir: &Direction,
    eps: f64,
    substeps: usize,
    richardson: bool,
    observe: F,
) -> Result<Vec<C64>>
where
    F: Fn(&LaxTuple) -> Result<Vec<C64>>,
{
    let central = |e: f64| -> Result<Vec<C64>> {
        let plus = observe(&flow(lax, h, dir, e, substeps)?)?;
        let minus = observe(&flow(lax, h, dir, -e, substeps)?)?;
        Ok(plus.iter().zip(&minus).map(|(a, b)| (a - b) / (2.0 * e)).collect())
    };
    let coarse = central(eps)?;
    if !richardson {
        return Ok(coarse);
    }
    let fine = central(eps / 2.0)?;
    Ok(fine
        .iter()
        .zip(&coarse)
        .map(|(f, c)| (4.0 * f - c) / 3.0)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hierarchy::Disk;

    fn instance() -> LaxTuple {
        let c = |x: f64| C64::new(x, 0.0);
        let d = Disk {
            q: c(0.05),
            radius: 0.7,
            u: vec![C64::new(0.9, 0.1), c(0.1), c(0.02)],
        };
        LaxTuple::new(vec![d], vec![vec![c(0.1), c(0.01)]], 16, 128, 4.0).unwrap()
    }

    #[test]
    fn zero_step_is_the_identity() {
        let lax = instance();
        let h = GeneratingSet::monomial(1, &[1]);
        let out = flow(&lax, &h, &Direction::single(TimeIndex::new(0, 1)), 0.0, 1).unwrap();
        assert_eq!(out, lax);
    }

    #[test]
    fn forward_then_backward_restores() {
        let lax = instance();
        let h = GeneratingSet::monomial(1, &[1]);
        let dir = Direction::single(TimeIndex::new(0, 1));
        let there = flow(&lax, &h, &dir, 1e-2, 1).unwrap();
        let back = flow(&there, &h, &dir, -1e-2, 1).unwrap();
        let err = lax
            .coords()
            .iter()
            .zip(back.coords())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-9, "{err:e}");
    }
}
