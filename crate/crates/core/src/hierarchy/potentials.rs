//! Potentials attached to a solution: `φ_a`, the Orlov–Schulman series
//! `ζ_α`, the S-functions, and the string-equation residual.

use std::f64::consts::PI;

use crate::contour::{moment, Sampled};
use crate::laurent::{Chart, Laurent, C64};

use super::grunsky::grunsky_rows;
use super::{GeneratingSet, HierarchyError, LaxTuple, PeriodData, Result, TimeIndex};

/// Largest accepted size of the last retained term of a truncated time sum,
/// relative to the size of the sum.
pub const TAIL_TOLERANCE: f64 = 1e-8;

fn zero() -> C64 {
    C64::new(0.0, 0.0)
}

/// `φ_a` together with the size of the last term kept in each time sum.
pub fn phi_with_tails(
    lax: &LaxTuple,
    h: &GeneratingSet,
    periods: &PeriodData,
) -> Result<(Vec<C64>, Vec<f64>)> {
    let m = lax.m();
    let nt = periods.nt;
    let sources: Vec<TimeIndex> = (1..=m).map(|a| TimeIndex::new(a, 0)).collect();
    let (slots, rows) = grunsky_rows(lax, &sources, nt)?;
    let ipi = C64::new(0.0, PI);
    let mut phis = Vec::with_capacity(m);
    let mut tails = Vec::with_capacity(m);
    for a in 0..m {
        let qa = lax.disks[a].q;
        let mut acc = zero();
        let mut tail: f64 = 0.0;
        for (slot, b) in slots.iter().zip(&rows[a]) {
            let t = periods.t(*slot);
            let term = if slot.n == 0 { t * b } else { t * b * slot.n as f64 };
            acc += term;
            if slot.n == nt {
                tail = tail.max(term.norm());
            }
        }
        acc += (0..a).map(|b| periods.ta[b][0] * ipi).sum::<C64>();
        for b in 0..m {
            let s = lax.samples(b);
            let vals = s
                .circle
                .points()
                .iter()
                .zip(s.z0.iter().zip(&s.za))
                .map(|(&p, (&z0, &zb))| h.h[b].eval(z0, zb) / (p - qa))
                .collect();
            acc -= moment(&Sampled::from_values(s.circle, vals), 0);
        }
        phis.push(acc);
        tails.push(tail);
    }
    Ok((phis, tails))
}

/// `φ_a`, rejecting results whose time sums have not settled.
pub fn phi(lax: &LaxTuple, h: &GeneratingSet, periods: &PeriodData) -> Result<Vec<C64>> {
    let (phis, tails) = phi_with_tails(lax, h, periods)?;
    for (p, t) in phis.iter().zip(&tails) {
        if *t > TAIL_TOLERANCE * p.norm().max(1.0) {
            return Err(HierarchyError::TruncationTooShort {
                what: "phi".into(),
                tail: *t,
            });
        }
    }
    Ok(phis)
}

/// Times and duals attached to one marker: `(t_{α0}, [t_{α1}…], [v_{α1}…])`.
fn marker_data(periods: &PeriodData, marker: usize) -> (C64, &[C64], &[C64]) {
    if marker == 0 {
        (periods.t00, &periods.t0, &periods.v0)
    } else {
        (
            periods.ta[marker - 1][0],
            &periods.ta[marker - 1][1..],
            &periods.va[marker - 1],
        )
    }
}

/// `Σ n t_n z^{n-1} + t_0/z + Σ v_n z^{-n-1}` as a finite sum.
fn zeta_sum(t0: C64, t: &[C64], v: &[C64], z: C64) -> C64 {
    let mut acc = zero();
    for (i, c) in t.iter().enumerate().rev() {
        acc = acc * z + c * (i + 1) as f64;
    }
    let zi = z.inv();
    let mut dual = zero();
    for c in v.iter().rev() {
        dual = (dual + c) * zi;
    }
    acc + t0 * zi + dual * zi
}

/// `ζ_α` in powers of the chart variable `z` (chart at `z = ∞`).
fn zeta_in_z(periods: &PeriodData, marker: usize) -> Laurent {
    let (t0, t, v) = marker_data(periods, marker);
    let nt = t.len() as i32;
    // exponent of z^{-1}-chart: z^{n-1} ↦ -(n-1)
    let lo = -(nt - 1).max(0);
    let hi = v.len() as i32 + 1;
    let mut coeffs = vec![zero(); (hi - lo + 1) as usize];
    for (i, c) in t.iter().enumerate() {
        coeffs[(-(i as i32) - lo) as usize] += c * (i + 1) as f64;
    }
    coeffs[(1 - lo) as usize] += t0;
    for (i, c) in v.iter().enumerate() {
        coeffs[(i as i32 + 2 - lo) as usize] += c;
    }
    Laurent::new(Chart::AtInfinity, lo, coeffs)
}

/// Orlov–Schulman series `ζ_α` rewritten in the `p`-chart of `α`, with the
/// time sums truncated at `Nt`.
pub fn orlov(lax: &LaxTuple, periods: &PeriodData) -> Result<Vec<Laurent>> {
    if periods.nt > lax.trunc {
        return Err(HierarchyError::TruncationTooShort {
            what: format!("orlov: Nt = {} exceeds the series truncation", periods.nt),
            tail: f64::INFINITY,
        });
    }
    let mut out = Vec::with_capacity(lax.m() + 1);
    let z0 = lax.z0_series(lax.trunc);
    out.push(Laurent::compose(&zeta_in_z(periods, 0), &z0)?);
    for a in 0..lax.m() {
        let za = lax.za_series(a);
        let zeta = Laurent::compose(&zeta_in_z(periods, a + 1), &za)?;
        out.push(zeta.truncate(lax.trunc as i32));
    }
    Ok(out)
}

/// `S_α(z) = Σ t_n z^n + t_0 log z + constant − Σ v_n z^{-n}/n`.
#[derive(Debug, Clone, PartialEq)]
pub struct SFunction {
    pub powers: Laurent,
    pub log_coeff: C64,
}

impl SFunction {
    pub fn eval(&self, z: C64) -> C64 {
        self.powers.eval_at(z).expect("S evaluated at z = 0") + self.log_coeff * z.ln()
    }

    pub fn derivative(&self, z: C64) -> C64 {
        let d = self.powers.derivative_p().eval_at(z).expect("S evaluated at z = 0");
        d + self.log_coeff / z
    }
}

pub fn s_function(periods: &PeriodData, marker: usize) -> Result<SFunction> {
    if marker > periods.m() {
        return Err(HierarchyError::IndexOutOfRange(format!("marker {marker} > M")));
    }
    let (t0, t, v) = marker_data(periods, marker);
    let constant = if marker == 0 {
        zero()
    } else {
        *periods.phia.get(marker - 1).ok_or_else(|| {
            HierarchyError::InvalidLax("S_a needs φ_a; compute the full period map".into())
        })?
    };
    let nt = t.len() as i32;
    let lo = -nt;
    let hi = v.len() as i32;
    let mut coeffs = vec![zero(); (hi - lo + 1) as usize];
    for (i, c) in t.iter().enumerate() {
        coeffs[(-(i as i32 + 1) - lo) as usize] = *c;
    }
    coeffs[(-lo) as usize] = constant;
    for (i, c) in v.iter().enumerate() {
        coeffs[(i as i32 + 1 - lo) as usize] = -c / (i + 1) as f64;
    }
    Ok(SFunction {
        powers: Laurent::new(Chart::AtInfinity, lo, coeffs),
        log_coeff: t0,
    })
}

/// Per disk: `max |ζ_0 - H_{a,z_0}|` and `max |ζ_a + H_{a,z_a}|` over the
/// nodes of `C_a`, with `ζ` evaluated as truncated sums.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct StringResidual {
    pub zeta0: f64,
    pub zetaa: f64,
}

impl StringResidual {
    pub fn max(&self) -> f64 {
        self.zeta0.max(self.zetaa)
    }
}

pub fn string_residual(
    lax: &LaxTuple,
    h: &GeneratingSet,
    periods: &PeriodData,
) -> Vec<StringResidual> {
    let (t00, t0, v0) = marker_data(periods, 0);
    (0..lax.m())
        .map(|a| {
            let (ta0, ta, va) = marker_data(periods, a + 1);
            let s = lax.samples(a);
            let mut out = StringResidual {
                zeta0: 0.0,
                zetaa: 0.0,
            };
            for (&z0, &za) in s.z0.iter().zip(&s.za) {
                let r0 = zeta_sum(t00, t0, v0, z0) - h.h_z0[a].eval(z0, za);
                let ra = zeta_sum(ta0, ta, va, za) + h.h_za[a].eval(z0, za);
                out.zeta0 = out.zeta0.max(r0.norm());
                out.zetaa = out.zetaa.max(ra.norm());
            }
            out
        })
        .collect()
}
