//! The period map: times `t_{αn}` and duals `v_{αn}` as contour moments.

use crate::contour::{moment, Sampled};
use crate::laurent::C64;

use super::{potentials, GeneratingSet, HierarchyError, LaxTuple, Result, TimeIndex};

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct PeriodData {
    pub nt: usize,
    pub t00: C64,
    /// `t_{0n}`, `n = 1..=nt`.
    pub t0: Vec<C64>,
    /// `t_{an}`, `n = 0..=nt`.
    pub ta: Vec<Vec<C64>>,
    /// `v_{0n}`, `n = 1..=nt`.
    pub v0: Vec<C64>,
    /// `v_{an}`, `n = 1..=nt`.
    pub va: Vec<Vec<C64>>,
    /// `v_{a0}`; empty when the potentials were not computed.
    pub va0: Vec<C64>,
    pub phia: Vec<C64>,
    /// Size of the last retained term of each `φ_a` series.
    pub phi_tail: Vec<f64>,
}

impl PeriodData {
    pub fn m(&self) -> usize {
        self.ta.len()
    }

    pub fn t(&self, idx: TimeIndex) -> C64 {
        match (idx.marker, idx.n) {
            (0, 0) => self.t00,
            (0, n) => self.t0[n - 1],
            (a, n) => self.ta[a - 1][n],
        }
    }

    pub fn set_t(&mut self, idx: TimeIndex, value: C64) {
        match (idx.marker, idx.n) {
            (0, 0) => self.t00 = value,
            (0, n) => self.t0[n - 1] = value,
            (a, n) => self.ta[a - 1][n] = value,
        }
    }

    /// `v_{αn}`; for `n = 0` the marked-point potential `v_{a0}`.
    pub fn v(&self, idx: TimeIndex) -> C64 {
        match (idx.marker, idx.n) {
            (0, 0) => C64::new(f64::NAN, f64::NAN),
            (0, n) => self.v0[n - 1],
            (a, 0) => self.va0.get(a - 1).copied().unwrap_or(C64::new(f64::NAN, f64::NAN)),
            (a, n) => self.va[a - 1][n - 1],
        }
    }

    /// The independent times `t_{0n}` (`n ≥ 1`) and `t_{an}` (`n ≥ 0`).
    pub fn time_indices(&self) -> Vec<TimeIndex> {
        TimeIndex::all(self.m(), self.nt)
    }

    pub fn time_vector(&self) -> Vec<C64> {
        self.time_indices().iter().map(|&i| self.t(i)).collect()
    }

    /// `|t00 + Σ_a t_{a0}|`.
    pub fn t00_defect(&self) -> f64 {
        (self.t00 + self.ta.iter().map(|t| t[0]).sum::<C64>()).norm()
    }
}

/// Times and duals only; `φ_a` and `v_{a0}` are left empty.
pub fn period_times(lax: &LaxTuple, h: &GeneratingSet, nt: usize) -> Result<PeriodData> {
    h.nondegeneracy_witness(lax)?;
    let m = lax.m();
    let zero = C64::new(0.0, 0.0);
    let mut t00 = zero;
    let mut t0 = vec![zero; nt];
    let mut v0 = vec![zero; nt];
    let mut ta = vec![vec![zero; nt + 1]; m];
    let mut va = vec![vec![zero; nt]; m];
    for a in 0..m {
        let s = lax.samples(a);
        let hz0: Vec<C64> = s.z0.iter().zip(&s.za).map(|(&x, &y)| h.h_z0[a].eval(x, y)).collect();
        let hza: Vec<C64> = s.z0.iter().zip(&s.za).map(|(&x, &y)| h.h_za[a].eval(x, y)).collect();
        let integral = |vals: Vec<C64>| moment(&Sampled::from_values(s.circle, vals), 0);
        let with_power = |base: &[C64], z: &[C64], dz: &[C64], e: i32| -> C64 {
            integral(
                base.iter()
                    .zip(z)
                    .zip(dz)
                    .map(|((b, z), d)| b * z.powi(e) * d)
                    .collect(),
            )
        };
        t00 += with_power(&hz0, &s.z0, &s.dz0, 0);
        ta[a][0] = with_power(&hza, &s.za, &s.dza, 0);
        for n in 1..=nt {
            let e = n as i32;
            t0[n - 1] += with_power(&hz0, &s.z0, &s.dz0, -e) / n as f64;
            v0[n - 1] += with_power(&hz0, &s.z0, &s.dz0, e);
            ta[a][n] = with_power(&hza, &s.za, &s.dza, -e) / n as f64;
            va[a][n - 1] = with_power(&hza, &s.za, &s.dza, e);
        }
    }
    let out = PeriodData {
        nt,
        t00,
        t0,
        ta,
        v0,
        va,
        va0: Vec::new(),
        phia: Vec::new(),
        phi_tail: Vec::new(),
    };
    if !out.t00_defect().is_finite() {
        return Err(HierarchyError::InvalidLax("period integrals are not finite".into()));
    }
    Ok(out)
}

/// Full period data including `φ_a` and `v_{a0}`.
pub fn period_map(lax: &LaxTuple, h: &GeneratingSet, nt: usize) -> Result<PeriodData> {
    let mut out = period_times(lax, h, nt)?;
    let (phia, tails) = potentials::phi_with_tails(lax, h, &out)?;
    let ipi = C64::new(0.0, std::f64::consts::PI);
    out.va0 = (0..lax.m())
        .map(|a| -phia[a] + (0..a).map(|b| out.ta[b][0] * ipi).sum::<C64>())
        .collect();
    out.phia = phia;
    out.phi_tail = tails;
    Ok(out)
}
