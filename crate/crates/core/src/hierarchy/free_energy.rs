//! The free energy `F` from the J-function contour formula, and the closed
//! form for monomial generating functions.

use crate::contour::{moment, Sampled};
use crate::laurent::C64;

use super::{Generating, GeneratingSet, HierarchyError, LaxTuple, PeriodData, Result, Term};

/// Antiderivatives with `-∂_{z_a} J_1 = ∂_{z_0} J_2 = H_a H_{a,z_0 z_a}`.
#[derive(Debug, Clone, PartialEq)]
pub struct JFunctions {
    pub j1: Generating,
    pub j2: Generating,
}

pub fn j_functions(h: &GeneratingSet, a: usize) -> Result<JFunctions> {
    let product = h.h[a].mul(&h.h_z0za[a]);
    let mut j1 = Vec::with_capacity(product.terms.len());
    let mut j2 = Vec::with_capacity(product.terms.len());
    for t in &product.terms {
        if t.j == -1 || t.k == -1 {
            return Err(HierarchyError::JLogObstruction { j: t.j, k: t.k });
        }
        j2.push(Term {
            j: t.j + 1,
            k: t.k,
            c: t.c / (t.j + 1) as f64,
        });
        j1.push(Term {
            j: t.j,
            k: t.k + 1,
            c: -t.c / (t.k + 1) as f64,
        });
    }
    Ok(JFunctions {
        j1: Generating::new(j1),
        j2: Generating::new(j2),
    })
}

/// `F` together with the size of the last retained term of the `t·v` sums.
pub fn free_energy_with_tail(
    lax: &LaxTuple,
    h: &GeneratingSet,
    periods: &PeriodData,
) -> Result<(C64, f64)> {
    if periods.va0.len() != lax.m() {
        return Err(HierarchyError::InvalidLax(
            "F needs v_{a0}; compute the full period map".into(),
        ));
    }
    let nt = periods.nt;
    let mut f = C64::new(0.0, 0.0);
    let mut tail: f64 = 0.0;
    for a in 0..lax.m() {
        f += 0.5 * periods.ta[a][0] * periods.va0[a];
    }
    for n in 1..=nt {
        let term = periods.t0[n - 1] * periods.v0[n - 1];
        f += 0.5 * term;
        if n == nt {
            tail = tail.max(term.norm());
        }
        for a in 0..lax.m() {
            let term = periods.ta[a][n] * periods.va[a][n - 1];
            f += 0.5 * term;
            if n == nt {
                tail = tail.max(term.norm());
            }
        }
    }
    for a in 0..lax.m() {
        let j = j_functions(h, a)?;
        let s = lax.samples(a);
        let vals = (0..s.z0.len())
            .map(|i| {
                j.j1.eval(s.z0[i], s.za[i]) * s.dz0[i] + j.j2.eval(s.z0[i], s.za[i]) * s.dza[i]
            })
            .collect();
        f += 0.25 * moment(&Sampled::from_values(s.circle, vals), 0);
    }
    Ok((f, tail))
}

pub fn free_energy(lax: &LaxTuple, h: &GeneratingSet, periods: &PeriodData) -> Result<C64> {
    let (f, tail) = free_energy_with_tail(lax, h, periods)?;
    if tail > super::potentials::TAIL_TOLERANCE * f.norm().max(1.0) {
        return Err(HierarchyError::TruncationTooShort {
            what: "free energy".into(),
            tail,
        });
    }
    Ok(f)
}

/// `-(1/8)(t00²/ν_0 + Σ t_{a0}²/ν_a) + ½Σ t_{a0}v_{a0}
/// + ½ΣΣ (1 - n/2ν_α) t_{αn} v_{αn}` for `H_a = z_0^{ν_0} z_a^{ν_a}`.
/// `nu[0]` is `ν_0`; `nu[a]` is `ν_a`.
pub fn closed_form_f_monomial(periods: &PeriodData, nu: &[i32]) -> C64 {
    let m = periods.m();
    let nu0 = nu[0] as f64;
    let mut f = -periods.t00 * periods.t00 / (8.0 * nu0);
    for a in 0..m {
        let nua = nu[a + 1] as f64;
        let ta0 = periods.ta[a][0];
        f -= ta0 * ta0 / (8.0 * nua);
        if let Some(v) = periods.va0.get(a) {
            f += 0.5 * ta0 * v;
        }
    }
    for n in 1..=periods.nt {
        let w0 = 1.0 - n as f64 / (2.0 * nu0);
        f += 0.5 * w0 * periods.t0[n - 1] * periods.v0[n - 1];
        for a in 0..m {
            let wa = 1.0 - n as f64 / (2.0 * nu[a + 1] as f64);
            f += 0.5 * wa * periods.ta[a][n] * periods.va[a][n - 1];
        }
    }
    f
}
