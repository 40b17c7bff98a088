//! Flows `∂_{αn}` as tangents on coefficient space.
//!
//! On each `C_b` the boundary function `W_b = Ω'/(z_0' z_b' H_{b,z_0z_b})` is
//! split into a part holomorphic in the disk and a part holomorphic outside
//! that vanishes at infinity. Then `Z_0 = -Σ_a W_{a-}` and
//! `Z_b = W_{b+} - Σ_{a≠b} W_{a-}`, and `∂z_β = Z_β z_β'` at fixed `p`.

use crate::contour::{cauchy_split, Sampled, Spectrum};
use crate::laurent::C64;

use super::{
    omega_projection, GeneratingSet, HierarchyError, LaxTuple, Result, Tangent, TimeIndex,
};

/// Relative size below which extracted chart coefficients are roundoff.
const NOISE_FLOOR: f64 = 1e-14;

fn zero() -> C64 {
    C64::new(0.0, 0.0)
}

pub fn whitham_vector_field(lax: &LaxTuple, h: &GeneratingSet, idx: TimeIndex) -> Result<Tangent> {
    h.nondegeneracy_witness(lax)?;
    let omega = omega_projection(lax, idx)?;
    let m = lax.m();
    let n = lax.trunc;
    let samples: Vec<_> = (0..m).map(|a| lax.samples(a)).collect();
    let w: Vec<Sampled> = samples
        .iter()
        .enumerate()
        .map(|(a, s)| {
            let vals = s
                .circle
                .points()
                .iter()
                .enumerate()
                .map(|(j, &p)| {
                    let hx = h.h_z0za[a].eval(s.z0[j], s.za[j]);
                    omega.derivative(p) / (s.dz0[j] * s.dza[j] * hx)
                })
                .collect();
            Sampled::from_values(s.circle, vals)
        })
        .collect();
    let splits: Vec<(Sampled, Sampled)> = w.iter().map(cauchy_split).collect();
    let outer: Vec<Spectrum> = splits.iter().map(|(_, o)| Spectrum::of(o)).collect();

    let mut tangent = Tangent::zero_like(lax);
    for b in 0..m {
        let s = &samples[b];
        let pts = s.circle.points();
        // Σ_{a≠b} W_{a-} on the nodes of C_b
        let foreign: Vec<C64> = pts
            .iter()
            .map(|&p| {
                (0..m)
                    .filter(|&a| a != b)
                    .map(|a| outer[a].eval_outside(p))
                    .sum()
            })
            .collect();
        let (inner_b, outer_b) = &splits[b];
        let zb: Vec<C64> = (0..pts.len()).map(|j| inner_b.values[j] - foreign[j]).collect();
        let z0: Vec<C64> = (0..pts.len()).map(|j| -outer_b.values[j] - foreign[j]).collect();

        let scale = w[b].max_abs().max(1.0);
        let split_err = (0..pts.len())
            .map(|j| (zb[j] - z0[j] - w[b].values[j]).norm())
            .fold(0.0, f64::max);
        if split_err > 1e-8 * scale {
            return Err(HierarchyError::SplitInconsistent(split_err));
        }

        // ∂z_b = Z_b z_b'
        let dzb = Spectrum::of(&Sampled::from_values(
            s.circle,
            zb.iter().zip(&s.dza).map(|(z, d)| z * d).collect(),
        ))
        .denoised(NOISE_FLOOR);
        let disk = &lax.disks[b];
        let r = disk.r();
        let dq = dzb.laurent_coeff(-2) / r;
        tangent.d_q[b] = dq;
        tangent.d_u[b][0] = dzb.laurent_coeff(-1);
        for j in 1..=n {
            let next = disk.u.get(j + 1).copied().unwrap_or(zero());
            tangent.d_u[b][j] = dzb.laurent_coeff(j as i64 - 1) + dq * j as f64 * next;
        }

        // ∂z_0 = Z_0 z_0': its principal part at q_b
        let dz0 = Spectrum::of(&Sampled::from_values(
            s.circle,
            z0.iter().zip(&s.dz0).map(|(z, d)| z * d).collect(),
        ))
        .denoised(NOISE_FLOOR);
        let tails = &lax.tails[b];
        for k in 1..=n {
            let prev = if k >= 2 { tails[k - 2] } else { zero() };
            tangent.d_tails[b][k - 1] = dz0.laurent_coeff(-(k as i64)) - prev * dq * (k - 1) as f64;
        }
    }
    Ok(tangent)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hierarchy::{Disk, Generating};

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn instance() -> LaxTuple {
        let d = Disk {
            q: c(0.05),
            radius: 0.7,
            u: vec![C64::new(0.9, 0.1), c(0.1), c(0.02)],
        };
        LaxTuple::new(vec![d], vec![vec![c(0.1), c(0.01)]], 16, 128, 4.0).unwrap()
    }

    #[test]
    fn doubling_h_halves_the_tangent() {
        let lax = instance();
        let h = GeneratingSet::monomial(1, &[1]);
        let h2 = GeneratingSet::new(vec![Generating::new(vec![crate::hierarchy::Term {
            j: 1,
            k: 1,
            c: c(2.0),
        }])]);
        for idx in [TimeIndex::new(0, 1), TimeIndex::new(1, 0), TimeIndex::new(1, 2)] {
            let t1 = whitham_vector_field(&lax, &h, idx).unwrap();
            let t2 = whitham_vector_field(&lax, &h2, idx).unwrap();
            let mut diff = t1.scale(c(0.5));
            diff.axpy(c(-1.0), &t2);
            assert!(diff.max_abs() < 1e-12 * t1.max_abs().max(1.0));
        }
    }

    #[test]
    fn degenerate_h_is_rejected() {
        let lax = instance();
        let h = GeneratingSet::monomial(0, &[2]);
        let err = whitham_vector_field(&lax, &h, TimeIndex::new(0, 1)).unwrap_err();
        assert_eq!(err.kind(), "DegenerateH");
    }
}
