//! Named identity checks with machine-readable reports.
//!
//! Checks that need time derivatives realize them by flowing the instance
//! forward and backward and differencing observables at fixed `p`. Flowed
//! tuples are cached per suite, so the derivative checks share their flows.

use std::cell::RefCell;
use std::collections::BTreeMap;
use std::fmt;
use std::rc::Rc;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::config::{ConfigError, Instance, RunConfig};
use crate::hierarchy::{
    closed_form_f_monomial, dtoda_reduce, dtoda_residual, faber_omega, flow, free_energy,
    grunsky::invert_chart, grunsky_table, omega_projection, period_map, period_times,
    string_residual, Direction, GeneratingSet, GrunskyTable, HierarchyError, LaxTuple, Omega,
    PeriodData, TimeIndex,
};
use crate::laurent::C64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VerifyError {
    #[error("unknown check kind {0:?}")]
    UnknownKind(String),
    #[error(transparent)]
    Config(#[from] ConfigError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CheckKind {
    T00Constraint,
    GrunskySymmetry,
    FaberConsistency,
    LocalCoords,
    DualFlow,
    PhiDerivative,
    FGradient,
    CanonicalBracket,
    ZakharovShabat,
    LaxEquation,
    MarkedPointIds,
    HamiltonJacobi,
    StringResidual,
    ClosedFormF,
    DTodaBridge,
}

impl CheckKind {
    pub const ALL: [CheckKind; 15] = [
        CheckKind::T00Constraint,
        CheckKind::GrunskySymmetry,
        CheckKind::FaberConsistency,
        CheckKind::LocalCoords,
        CheckKind::DualFlow,
        CheckKind::PhiDerivative,
        CheckKind::FGradient,
        CheckKind::CanonicalBracket,
        CheckKind::ZakharovShabat,
        CheckKind::LaxEquation,
        CheckKind::MarkedPointIds,
        CheckKind::HamiltonJacobi,
        CheckKind::StringResidual,
        CheckKind::ClosedFormF,
        CheckKind::DTodaBridge,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CheckKind::T00Constraint => "T00Constraint",
            CheckKind::GrunskySymmetry => "GrunskySymmetry",
            CheckKind::FaberConsistency => "FaberConsistency",
            CheckKind::LocalCoords => "LocalCoords",
            CheckKind::DualFlow => "DualFlow",
            CheckKind::PhiDerivative => "PhiDerivative",
            CheckKind::FGradient => "FGradient",
            CheckKind::CanonicalBracket => "CanonicalBracket",
            CheckKind::ZakharovShabat => "ZakharovShabat",
            CheckKind::LaxEquation => "LaxEquation",
            CheckKind::MarkedPointIds => "MarkedPointIds",
            CheckKind::HamiltonJacobi => "HamiltonJacobi",
            CheckKind::StringResidual => "StringResidual",
            CheckKind::ClosedFormF => "ClosedFormF",
            CheckKind::DTodaBridge => "DTodaBridge",
        }
    }

    /// Relative errors are floored at 1 in the denominator.
    pub fn default_tolerance(self) -> f64 {
        match self {
            CheckKind::T00Constraint => 1e-10,
            CheckKind::GrunskySymmetry => 1e-9,
            CheckKind::FaberConsistency => 1e-9,
            CheckKind::LocalCoords => 1e-5,
            CheckKind::DualFlow => 1e-4,
            CheckKind::PhiDerivative => 1e-4,
            CheckKind::FGradient => 1e-5,
            CheckKind::CanonicalBracket => 1e-4,
            CheckKind::ZakharovShabat => 1e-4,
            CheckKind::LaxEquation => 1e-4,
            CheckKind::MarkedPointIds => 1e-5,
            CheckKind::HamiltonJacobi => 1e-5,
            CheckKind::StringResidual => 1e-7,
            CheckKind::ClosedFormF => 1e-9,
            CheckKind::DTodaBridge => 1e-8,
        }
    }
}

impl fmt::Display for CheckKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CheckKind {
    type Err = VerifyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        CheckKind::ALL
            .iter()
            .copied()
            .find(|k| k.name() == s)
            .ok_or_else(|| VerifyError::UnknownKind(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckParams {
    pub nt: usize,
    pub nb: usize,
    pub eps: f64,
    pub richardson: bool,
    /// RK4 steps per differencing step.
    pub substeps: usize,
    /// Flows `∂_{αn}` with `n ≤ max_n` are differenced.
    pub max_n: usize,
    /// Index bound for the pairwise Zakharov–Shabat and Lax checks.
    pub bracket_n: usize,
    /// Contour nodes per circle used by pointwise checks.
    pub probes: usize,
    /// `[ν_0, ν_1, …]` for the closed-form free energy; read off `H` when absent.
    pub monomial: Option<Vec<i32>>,
    pub tolerances: BTreeMap<String, f64>,
}

impl Default for CheckParams {
    fn default() -> Self {
        CheckParams {
            nt: 12,
            nb: 12,
            eps: 1e-3,
            richardson: true,
            substeps: 4,
            max_n: 4,
            bracket_n: 3,
            probes: 16,
            monomial: None,
            tolerances: BTreeMap::new(),
        }
    }
}

impl CheckParams {
    pub fn from_config(cfg: &RunConfig) -> Self {
        CheckParams {
            nt: cfg.nt,
            nb: cfg.nb,
            eps: cfg.eps,
            richardson: cfg.richardson,
            substeps: cfg.substeps,
            tolerances: cfg.tolerances.clone(),
            ..CheckParams::default()
        }
    }

    pub fn tolerance(&self, kind: CheckKind) -> f64 {
        self.tolerances
            .get(kind.name())
            .copied()
            .unwrap_or_else(|| kind.default_tolerance())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub name: String,
    pub max_error: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub details: Vec<(String, f64)>,
    pub wall_time: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub instance: String,
    pub checks: Vec<CheckReport>,
    pub overall: bool,
}

impl SuiteReport {
    /// The report with every timing field zeroed.
    pub fn without_timing(&self) -> SuiteReport {
        let mut out = self.clone();
        out.checks.iter_mut().for_each(|c| c.wall_time = 0.0);
        out
    }
}

/// SHA-256 over the serialized tuple, generating functions and parameters.
pub fn instance_hash(lax: &LaxTuple, h: &GeneratingSet, params: &CheckParams) -> String {
    let mut hasher = Sha256::new();
    hasher.update(serde_json::to_vec(lax).expect("tuple serializes"));
    hasher.update(serde_json::to_vec(&h.h).expect("generating set serializes"));
    hasher.update(serde_json::to_vec(params).expect("params serialize"));
    hasher.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

/// Measured deviations of one check.
struct Outcome {
    max_error: f64,
    details: Vec<(String, f64)>,
}

impl Outcome {
    fn new() -> Self {
        Outcome {
            max_error: 0.0,
            details: Vec::new(),
        }
    }

    fn record(&mut self, location: impl Into<String>, err: f64) {
        let err = if err.is_nan() { f64::MAX } else { err };
        self.max_error = self.max_error.max(err);
        self.details.push((location.into(), err));
    }
}

fn relative(diff: C64, scale: C64) -> f64 {
    diff.norm() / scale.norm().max(1.0)
}

/// Flowed copies of the instance with difference weights.
type Stencil = Vec<(f64, LaxTuple)>;

struct Context<'a> {
    lax: &'a LaxTuple,
    h: &'a GeneratingSet,
    params: &'a CheckParams,
    stencils: RefCell<BTreeMap<TimeIndex, Rc<Stencil>>>,
    periods: RefCell<BTreeMap<(usize, TimeIndex), Rc<PeriodData>>>,
    grunsky: RefCell<Option<Rc<GrunskyTable>>>,
}

type Res<T> = crate::hierarchy::Result<T>;

impl<'a> Context<'a> {
    fn new(lax: &'a LaxTuple, h: &'a GeneratingSet, params: &'a CheckParams) -> Self {
        Context {
            lax,
            h,
            params,
            stencils: RefCell::new(BTreeMap::new()),
            periods: RefCell::new(BTreeMap::new()),
            grunsky: RefCell::new(None),
        }
    }

    fn stencil(&self, idx: TimeIndex) -> Res<Rc<Stencil>> {
        if let Some(s) = self.stencils.borrow().get(&idx) {
            return Ok(s.clone());
        }
        let dir = Direction::single(idx);
        let eps = self.params.eps;
        let go = |e: f64| flow(self.lax, self.h, &dir, e, self.params.substeps);
        let mut s = vec![
            (1.0 / (2.0 * eps), go(eps)?),
            (-1.0 / (2.0 * eps), go(-eps)?),
        ];
        if self.params.richardson {
            s.iter_mut().for_each(|(w, _)| *w *= -1.0 / 3.0);
            s.push((4.0 / (3.0 * eps), go(eps / 2.0)?));
            s.push((-4.0 / (3.0 * eps), go(-eps / 2.0)?));
        }
        let s = Rc::new(s);
        self.stencils.borrow_mut().insert(idx, s.clone());
        Ok(s)
    }

    /// Full period data of the `k`-th stencil member of `idx`.
    fn periods_of(&self, idx: TimeIndex, k: usize, lax: &LaxTuple) -> Res<Rc<PeriodData>> {
        if let Some(p) = self.periods.borrow().get(&(k, idx)) {
            return Ok(p.clone());
        }
        let p = Rc::new(period_map(lax, self.h, self.params.nt)?);
        self.periods.borrow_mut().insert((k, idx), p.clone());
        Ok(p)
    }

    fn base_periods(&self) -> Res<Rc<PeriodData>> {
        let marker = TimeIndex::new(usize::MAX, 0);
        self.periods_of(marker, 0, self.lax)
    }

    /// Derivative along `idx` of an observable of the period data.
    fn d_periods(&self, idx: TimeIndex, observe: impl Fn(&PeriodData) -> Vec<C64>) -> Res<Vec<C64>> {
        let s = self.stencil(idx)?;
        let mut acc: Option<Vec<C64>> = None;
        for (k, (w, lax)) in s.iter().enumerate() {
            let vals = observe(&*self.periods_of(idx, k, lax)?);
            match &mut acc {
                None => acc = Some(vals.iter().map(|v| v * w).collect()),
                Some(a) => a.iter_mut().zip(&vals).for_each(|(x, v)| *x += v * w),
            }
        }
        Ok(acc.unwrap_or_default())
    }

    /// Derivative along `idx` of a pointwise observable of the tuple.
    fn d_lax(&self, idx: TimeIndex, observe: impl Fn(&LaxTuple) -> Res<Vec<C64>>) -> Res<Vec<C64>> {
        let s = self.stencil(idx)?;
        let mut acc: Option<Vec<C64>> = None;
        for (w, lax) in s.iter() {
            let vals = observe(lax)?;
            match &mut acc {
                None => acc = Some(vals.iter().map(|v| v * w).collect()),
                Some(a) => a.iter_mut().zip(&vals).for_each(|(x, v)| *x += v * w),
            }
        }
        Ok(acc.unwrap_or_default())
    }

    fn d_free_energy(&self, idx: TimeIndex) -> Res<C64> {
        let s = self.stencil(idx)?;
        let mut acc = C64::new(0.0, 0.0);
        for (k, (w, lax)) in s.iter().enumerate() {
            acc += free_energy(lax, self.h, &*self.periods_of(idx, k, lax)?)? * w;
        }
        Ok(acc)
    }

    fn grunsky(&self) -> Res<Rc<GrunskyTable>> {
        if let Some(g) = self.grunsky.borrow().as_ref() {
            return Ok(g.clone());
        }
        let g = Rc::new(grunsky_table(self.lax, self.params.nb)?);
        *self.grunsky.borrow_mut() = Some(g.clone());
        Ok(g)
    }

    fn flows(&self, depth: usize) -> Vec<TimeIndex> {
        TimeIndex::all(self.lax.m(), depth)
    }

    /// Probe points: evenly spaced nodes of every `C_a`, tagged by disk.
    fn probes(&self) -> Vec<(usize, C64)> {
        let mut out = Vec::new();
        for a in 0..self.lax.m() {
            let c = self.lax.circle(a);
            let stride = (c.nodes / self.params.probes.max(1)).max(1);
            // half a stride off the real axis through the center
            for j in (stride / 2..c.nodes).step_by(stride) {
                out.push((a, c.node(j)));
            }
        }
        out
    }
}

/// `Ω_{αn}` at `p`; logarithms are taken relative to the base tuple so that
/// differences never straddle a branch cut.
fn omega_value(om: &Omega, base: &LaxTuple, idx: TimeIndex, p: C64) -> C64 {
    match om {
        Omega::Log { center } => {
            let q0 = base.disks[idx.marker - 1].q;
            -((p - center) / (p - q0)).ln() - (p - q0).ln()
        }
        _ => om.eval(p),
    }
}

fn omega_at(lax: &LaxTuple, base: &LaxTuple, idx: TimeIndex, pts: &[C64]) -> Res<Vec<C64>> {
    let om = omega_projection(lax, idx)?;
    Ok(pts.iter().map(|&p| omega_value(&om, base, idx, p)).collect())
}

fn chart_derivative(lax: &LaxTuple, marker: usize, p: C64) -> C64 {
    if marker == 0 {
        lax.dz0(p)
    } else {
        lax.dza(marker - 1, p)
    }
}

fn log_epsilon(a: usize, b: usize) -> C64 {
    if a > b {
        C64::new(0.0, std::f64::consts::PI)
    } else {
        C64::new(0.0, 0.0)
    }
}

fn run_kind(ctx: &Context, kind: CheckKind) -> Res<Outcome> {
    let lax = ctx.lax;
    let h = ctx.h;
    let p = ctx.params;
    let m = lax.m();
    let mut out = Outcome::new();
    let t01 = TimeIndex::new(0, 1);
    match kind {
        CheckKind::T00Constraint => {
            let pd = period_times(lax, h, p.nt)?;
            out.record("t00 + Σ t_a0", pd.t00_defect());
        }
        CheckKind::GrunskySymmetry => {
            let g = ctx.grunsky()?;
            out.record(format!("Nb = {}", g.nb), g.max_asymmetry);
        }
        CheckKind::FaberConsistency => {
            let pts: Vec<C64> = ctx.probes().into_iter().map(|(_, z)| z).collect();
            for idx in ctx.flows(p.max_n).into_iter().filter(|i| i.n > 0) {
                let om = omega_projection(lax, idx)?;
                let fab = faber_omega(lax, idx, &pts)?;
                let worst = pts
                    .iter()
                    .zip(&fab)
                    .map(|(&z, f)| relative(om.eval(z) - f, *f))
                    .fold(0.0, f64::max);
                out.record(format!("Ω{idx}"), worst);
            }
        }
        CheckKind::LocalCoords => {
            let indices = ctx.base_periods()?.time_indices();
            for idx in ctx.flows(p.max_n) {
                let d = ctx.d_periods(idx, |pd| pd.time_vector())?;
                for (j, tgt) in indices.iter().enumerate() {
                    let want = if *tgt == idx { 1.0 } else { 0.0 };
                    let e = (d[j] - want).norm();
                    if *tgt == idx || e > 0.1 * p.tolerance(kind) {
                        out.record(format!("∂{idx} t{tgt}"), e);
                    }
                }
            }
        }
        CheckKind::DualFlow => {
            let g = ctx.grunsky()?;
            let targets: Vec<TimeIndex> = ctx.flows(p.nb).into_iter().filter(|i| i.n > 0).collect();
            for idx in ctx.flows(p.max_n) {
                let d = ctx.d_periods(idx, |pd| targets.iter().map(|&t| pd.v(t)).collect())?;
                let mut worst: f64 = 0.0;
                for (j, tgt) in targets.iter().enumerate() {
                    let scale = if idx.n == 0 { 1.0 } else { idx.n as f64 } * tgt.n as f64;
                    let want = -g.b(idx, *tgt) * scale;
                    worst = worst.max(relative(d[j] - want, want));
                }
                out.record(format!("∂{idx} v"), worst);
            }
        }
        CheckKind::PhiDerivative => {
            let g = ctx.grunsky()?;
            for idx in ctx.flows(p.max_n) {
                let d = ctx.d_periods(idx, |pd| pd.phia.clone())?;
                for a in 1..=m {
                    let src = TimeIndex::new(a, 0);
                    let want = if idx.n == 0 {
                        g.b(src, idx) + log_epsilon(a, idx.marker)
                    } else {
                        g.b(src, idx) * idx.n as f64
                    };
                    out.record(format!("∂{idx} φ{a}"), relative(d[a - 1] - want, want));
                }
            }
        }
        CheckKind::FGradient => {
            let base = ctx.base_periods()?;
            for idx in ctx.flows(p.max_n) {
                let d = ctx.d_free_energy(idx)?;
                let want = base.v(idx);
                out.record(format!("∂{idx} F"), relative(d - want, want));
            }
        }
        CheckKind::MarkedPointIds => {
            let d = ctx.d_periods(t01, |pd| {
                let mut v = pd.phia.clone();
                v.extend(pd.va.iter().map(|va| va[0]));
                v
            })?;
            for a in 0..m {
                let disk = &lax.disks[a];
                out.record(format!("q{} - ∂01 φ{}", a + 1, a + 1), (disk.q - d[a]).norm());
                out.record(format!("r{} + ∂01 v{}1", a + 1, a + 1), (disk.r() + d[m + a]).norm());
            }
        }
        CheckKind::HamiltonJacobi => {
            let nt = p.nt;
            let p0 = invert_chart(lax, 0, nt)?;
            let d = ctx.d_periods(t01, |pd| pd.v0.clone())?;
            out.record("constant term", p0.coeff(0).norm());
            for mm in 1..=nt {
                let want = -d[mm - 1] / mm as f64;
                out.record(format!("z^-{mm}"), (p0.coeff(mm as i32) - want).norm());
            }
        }
        CheckKind::CanonicalBracket => {
            let probes = ctx.probes();
            let pts: Vec<C64> = probes.iter().map(|&(_, z)| z).collect();
            let hz0z0: Vec<_> = h.h_z0.iter().map(|g| g.d_z0()).collect();
            let hzaza: Vec<_> = h.h_za.iter().map(|g| g.d_za()).collect();
            // ζ_0 = H_{a,z0} and ζ_a = -H_{a,za} on C_a, at fixed p
            let zetas = |l: &LaxTuple| -> Res<Vec<C64>> {
                let mut v = Vec::with_capacity(2 * pts.len());
                for &(a, z) in &probes {
                    let (z0, za) = (l.z0(z), l.za(a, z));
                    v.push(h.h_z0[a].eval(z0, za));
                    v.push(-h.h_za[a].eval(z0, za));
                }
                Ok(v)
            };
            let charts = |l: &LaxTuple| -> Res<Vec<C64>> {
                let mut v = Vec::with_capacity(2 * pts.len());
                for &(a, z) in &probes {
                    v.push(l.z0(z));
                    v.push(l.za(a, z));
                }
                Ok(v)
            };
            let dzeta = ctx.d_lax(t01, zetas)?;
            let dz = ctx.d_lax(t01, charts)?;
            for (i, &(a, z)) in probes.iter().enumerate() {
                let (z0, za) = (lax.z0(z), lax.za(a, z));
                let (d0, da) = (lax.dz0(z), lax.dza(a, z));
                let mixed = h.h_z0za[a].eval(z0, za);
                let zeta0_p = hz0z0[a].eval(z0, za) * d0 + mixed * da;
                let zetaa_p = -(mixed * d0 + hzaza[a].eval(z0, za) * da);
                let b0 = d0 * dzeta[2 * i] - dz[2 * i] * zeta0_p;
                let ba = da * dzeta[2 * i + 1] - dz[2 * i + 1] * zetaa_p;
                out.record(format!("C{} {{z0,ζ0}}", a + 1), (b0 - 1.0).norm());
                out.record(format!("C{} {{za,ζa}}", a + 1), (ba - 1.0).norm());
            }
            compress(&mut out);
        }
        CheckKind::LaxEquation => {
            let probes = ctx.probes();
            let charts = |l: &LaxTuple| -> Res<Vec<C64>> {
                let mut v = Vec::with_capacity(2 * probes.len());
                for &(a, z) in &probes {
                    v.push(l.z0(z));
                    v.push(l.za(a, z));
                }
                Ok(v)
            };
            let pts: Vec<C64> = probes.iter().map(|&(_, z)| z).collect();
            let dz01 = ctx.d_lax(t01, charts)?;
            for idx in ctx.flows(p.bracket_n) {
                if idx == t01 {
                    continue;
                }
                let om = omega_projection(lax, idx)?;
                let dom01 = ctx.d_lax(t01, |l| omega_at(l, lax, idx, &pts))?;
                let dz = ctx.d_lax(idx, charts)?;
                let mut worst: f64 = 0.0;
                for (i, &(a, z)) in probes.iter().enumerate() {
                    let dom = om.derivative(z);
                    for (slot, marker) in [(2 * i, 0), (2 * i + 1, a + 1)] {
                        let bracket = dom * dz01[slot] - dom01[i] * chart_derivative(lax, marker, z);
                        worst = worst.max((dz[slot] - bracket).norm());
                    }
                }
                out.record(format!("∂{idx} z"), worst);
            }
        }
        CheckKind::ZakharovShabat => {
            let pts: Vec<C64> = ctx.probes().into_iter().map(|(_, z)| z).collect();
            let flows = ctx.flows(p.bracket_n);
            let mut omegas = Vec::with_capacity(flows.len());
            let mut d01 = Vec::with_capacity(flows.len());
            for &idx in &flows {
                omegas.push(omega_projection(lax, idx)?);
                d01.push(ctx.d_lax(t01, |l| omega_at(l, lax, idx, &pts))?);
            }
            for (i, &a_idx) in flows.iter().enumerate() {
                for (j, &b_idx) in flows.iter().enumerate().skip(i + 1) {
                    let da_ob = ctx.d_lax(a_idx, |l| omega_at(l, lax, b_idx, &pts))?;
                    let db_oa = ctx.d_lax(b_idx, |l| omega_at(l, lax, a_idx, &pts))?;
                    let mut worst: f64 = 0.0;
                    for (k, &z) in pts.iter().enumerate() {
                        let bracket = omegas[i].derivative(z) * d01[j][k]
                            - d01[i][k] * omegas[j].derivative(z);
                        worst = worst.max((db_oa[k] - da_ob[k] + bracket).norm());
                    }
                    out.record(format!("{a_idx}×{b_idx}"), worst);
                }
            }
        }
        CheckKind::StringResidual => {
            let pd = ctx.base_periods()?;
            for (a, r) in string_residual(lax, h, &pd).iter().enumerate() {
                out.record(format!("C{} ζ0", a + 1), r.zeta0);
                out.record(format!("C{} ζa", a + 1), r.zetaa);
            }
        }
        CheckKind::ClosedFormF => {
            let nu = match &p.monomial {
                Some(nu) => nu.clone(),
                None => monomial_exponents(h).ok_or_else(|| HierarchyError::DegenerateH {
                    disk: 0,
                    detail: "closed form needs H_a = z0^ν0 za^νa".into(),
                })?,
            };
            let pd = ctx.base_periods()?;
            let f = free_energy(lax, h, &pd)?;
            let closed = closed_form_f_monomial(&pd, &nu);
            out.record("F - F_closed", (f - closed).norm());
        }
        CheckKind::DTodaBridge => {
            let pd = ctx.base_periods()?;
            let series = dtoda_reduce(lax, &pd)?;
            let (r1, r2) = dtoda_residual(lax, h, &series)?;
            out.record("M - L H_z", r1);
            out.record("M~ + L~ H_z~", r2);
        }
    }
    Ok(out)
}

/// Keeps the worst few samples of a pointwise check.
fn compress(out: &mut Outcome) {
    out.details
        .sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap_or(std::cmp::Ordering::Equal));
    out.details.truncate(8);
}

/// `[ν_0, ν_1, …]` when every `H_a` is `z_0^{ν_0} z_a^{ν_a}` with unit coefficient.
pub fn monomial_exponents(h: &GeneratingSet) -> Option<Vec<i32>> {
    let mut nu0 = None;
    let mut out = vec![0];
    for g in &h.h {
        match g.terms.as_slice() {
            [t] if t.c == C64::new(1.0, 0.0) => {
                if nu0.is_some_and(|n| n != t.j) {
                    return None;
                }
                nu0 = Some(t.j);
                out.push(t.k);
            }
            _ => return None,
        }
    }
    out[0] = nu0?;
    Some(out)
}

fn report(kind: CheckKind, tol: f64, result: Res<Outcome>, started: Instant) -> CheckReport {
    let wall_time = started.elapsed().as_secs_f64();
    match result {
        Ok(o) => CheckReport {
            name: kind.name().into(),
            max_error: o.max_error,
            tolerance: tol,
            passed: o.max_error < tol,
            details: o.details,
            wall_time,
            error: None,
        },
        Err(e) => CheckReport {
            name: kind.name().into(),
            max_error: f64::MAX,
            tolerance: tol,
            passed: false,
            details: Vec::new(),
            wall_time,
            error: Some(format!("{}: {e}", e.kind())),
        },
    }
}

pub fn run_check(
    kind: CheckKind,
    lax: &LaxTuple,
    h: &GeneratingSet,
    params: &CheckParams,
) -> CheckReport {
    let ctx = Context::new(lax, h, params);
    let started = Instant::now();
    report(kind, params.tolerance(kind), run_kind(&ctx, kind), started)
}

/// Runs the checks in order on one instance, sharing flowed tuples.
pub fn run_checks(
    kinds: &[CheckKind],
    lax: &LaxTuple,
    h: &GeneratingSet,
    params: &CheckParams,
) -> SuiteReport {
    let ctx = Context::new(lax, h, params);
    let checks: Vec<CheckReport> = kinds
        .iter()
        .map(|&k| {
            let started = Instant::now();
            report(k, params.tolerance(k), run_kind(&ctx, k), started)
        })
        .collect();
    SuiteReport {
        instance: instance_hash(lax, h, params),
        overall: checks.iter().all(|c| c.passed),
        checks,
    }
}

/// Builds the instance named by the configuration and runs its check list.
/// A configuration whose instance cannot be built is an error; a generating
/// function that degenerates on the contours yields failed reports.
pub fn run_suite(cfg: &RunConfig) -> Result<SuiteReport, VerifyError> {
    run_suite_with(cfg, &CheckParams::from_config(cfg))
}

/// [`run_suite`] with explicit check parameters.
pub fn run_suite_with(cfg: &RunConfig, params: &CheckParams) -> Result<SuiteReport, VerifyError> {
    let kinds = cfg
        .checks
        .iter()
        .map(|s| s.parse::<CheckKind>())
        .collect::<Result<Vec<_>, _>>()?;
    match cfg.instance() {
        Ok(Instance { lax, h }) => Ok(run_checks(&kinds, &lax, &h, params)),
        Err(ConfigError::Invalid { field, message }) if field == "H" => {
            let lax = cfg.lax_tuple()?;
            let h = cfg.generating_set();
            let mut suite = run_checks(&kinds, &lax, &h, params);
            suite.checks.insert(
                0,
                CheckReport {
                    name: "Instance".into(),
                    max_error: f64::MAX,
                    tolerance: 0.0,
                    passed: false,
                    details: Vec::new(),
                    wall_time: 0.0,
                    error: Some(message),
                },
            );
            suite.overall = false;
            Ok(suite)
        }
        Err(e) => Err(e.into()),
    }
}
