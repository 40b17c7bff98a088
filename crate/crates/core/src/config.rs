//! Run configuration: a JSON document describing one instance, optional
//! target times, and the checks to run on it.
//!
//! Complex numbers are `[re, im]` pairs. An instance is either spelled out
//! in `charts`/`H`, or drawn from `seed` when `charts` is empty.

use std::collections::BTreeMap;
use std::path::Path;

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hierarchy::{
    Disk, Generating, GeneratingSet, HierarchyError, LaxTuple, Term, TimeIndex, TimeTarget,
};
use crate::laurent::C64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("config: file not found: {0}")]
    NotFound(String),
    #[error("config: {0}")]
    Parse(String),
    #[error("config: {field}: {message}")]
    Invalid { field: String, message: String },
}

fn invalid(field: impl Into<String>, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        field: field.into(),
        message: message.into(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChartConfig {
    pub q: C64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    pub r: C64,
    /// `u_{a1}, u_{a2}, …`
    #[serde(default)]
    pub u: Vec<C64>,
    /// Principal part of `z_0` at `q`: coefficients of `(p - q)^{-1}, (p - q)^{-2}, …`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub tail: Vec<C64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeEntry {
    pub marker: usize,
    pub n: usize,
    pub value: C64,
}

fn default_trunc() -> usize {
    24
}
fn default_nt() -> usize {
    12
}
fn default_nb() -> usize {
    12
}
fn default_nodes() -> usize {
    256
}
fn default_true() -> bool {
    true
}
fn default_eps() -> f64 {
    1e-3
}
fn default_substeps() -> usize {
    4
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(rename = "M")]
    pub m: usize,
    #[serde(rename = "N", default = "default_trunc")]
    pub trunc: usize,
    #[serde(rename = "Nt", default = "default_nt")]
    pub nt: usize,
    #[serde(rename = "Nb", default = "default_nb")]
    pub nb: usize,
    #[serde(default = "default_nodes")]
    pub nodes: usize,
    #[serde(default)]
    pub charts: Vec<ChartConfig>,
    /// `u_{02}, u_{03}, …` of `z_0 = p + Σ u_{0j} p^{1-j}`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub u0: Vec<C64>,
    #[serde(rename = "R", default, skip_serializing_if = "Option::is_none")]
    pub outer_radius: Option<f64>,
    #[serde(rename = "H", default)]
    pub h: Vec<Vec<Term>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub times: Option<Vec<TimeEntry>>,
    #[serde(default)]
    pub checks: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
    #[serde(default = "default_eps")]
    pub eps: f64,
    #[serde(default = "default_true")]
    pub richardson: bool,
    /// RK4 steps per differencing step `ε`.
    #[serde(default = "default_substeps")]
    pub substeps: usize,
}

/// A Lax tuple with its generating functions.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub lax: LaxTuple,
    pub h: GeneratingSet,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<RunConfig, ConfigError> {
        let cfg: RunConfig =
            serde_json::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<RunConfig, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => ConfigError::NotFound(path.display().to_string()),
            _ => ConfigError::Parse(format!("{}: {e}", path.display())),
        })?;
        RunConfig::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Structural checks that do not need the instance itself.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.m == 0 {
            return Err(invalid("M", "need at least one finite marked point"));
        }
        if self.trunc == 0 {
            return Err(invalid("N", "must be positive"));
        }
        if self.nt == 0 || self.nt > self.trunc {
            return Err(invalid("Nt", format!("must lie in 1..={}", self.trunc)));
        }
        if self.nb == 0 || 2 * self.nb > self.trunc {
            return Err(invalid("Nb", format!("must lie in 1..={}", self.trunc / 2)));
        }
        if self.nodes < 8 || !self.nodes.is_power_of_two() {
            return Err(invalid("nodes", "must be a power of two, at least 8"));
        }
        if !(self.eps > 0.0) {
            return Err(invalid("eps", "must be positive"));
        }
        if self.charts.is_empty() {
            if self.seed.is_none() {
                return Err(invalid("charts", "empty, and no seed to draw an instance from"));
            }
            return Ok(());
        }
        if self.charts.len() != self.m {
            return Err(invalid(
                "charts",
                format!("{} entries for M = {}", self.charts.len(), self.m),
            ));
        }
        if self.h.len() != self.m {
            return Err(invalid("H", format!("{} entries for M = {}", self.h.len(), self.m)));
        }
        for (a, c) in self.charts.iter().enumerate() {
            if c.r.norm() == 0.0 {
                return Err(invalid(format!("charts[{a}].r"), "leading coefficient must be nonzero"));
            }
            if c.rho.is_some_and(|r| !(r > 0.0)) {
                return Err(invalid(format!("charts[{a}].rho"), "must be positive"));
            }
            if c.u.len() > self.trunc {
                return Err(invalid(format!("charts[{a}].u"), "longer than N"));
            }
            if c.tail.len() > self.trunc {
                return Err(invalid(format!("charts[{a}].tail"), "longer than N"));
            }
        }
        if self.u0.len() > self.trunc {
            return Err(invalid("u0", "longer than N"));
        }
        if let Some(times) = &self.times {
            for (i, t) in times.iter().enumerate() {
                if t.marker > self.m || t.n > self.nt || (t.marker == 0 && t.n == 0) {
                    return Err(invalid(
                        format!("times[{i}]"),
                        format!("index ({},{}) is not an independent time up to Nt", t.marker, t.n),
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn instance(&self) -> Result<Instance, ConfigError> {
        if self.charts.is_empty() {
            let seed = self.seed.expect("validated");
            return seeded_instance(self.m, seed, self.trunc, self.nodes)
                .map_err(|e| invalid("seed", e.to_string()));
        }
        let lax = self.lax_tuple()?;
        let h = self.generating_set();
        h.nondegeneracy_witness(&lax).map_err(|e| invalid("H", e.to_string()))?;
        Ok(Instance { lax, h })
    }

    /// The Lax tuple spelled out in `charts` and `u0`.
    pub fn lax_tuple(&self) -> Result<LaxTuple, ConfigError> {
        if self.charts.is_empty() {
            return self.instance().map(|i| i.lax);
        }
        let centers: Vec<C64> = self.charts.iter().map(|c| c.q).collect();
        let defaults = LaxTuple::default_radii(&centers);
        let disks: Vec<Disk> = self
            .charts
            .iter()
            .zip(&defaults)
            .map(|(c, &d)| {
                let mut u = vec![c.r];
                u.extend_from_slice(&c.u);
                Disk {
                    q: c.q,
                    radius: c.rho.unwrap_or(d),
                    u,
                }
            })
            .collect();
        let radii: Vec<f64> = disks.iter().map(|d| d.radius).collect();
        let outer = self
            .outer_radius
            .unwrap_or_else(|| LaxTuple::default_outer_radius(&centers, &radii));
        let base = LaxTuple::from_infinity_coefficients(
            &self.u0,
            disks.clone(),
            self.trunc,
            self.nodes,
            outer,
        )
        .map_err(|e| invalid("u0", e.to_string()))?;
        let mut tails = base.tails.clone();
        for (a, c) in self.charts.iter().enumerate() {
            for (k, v) in c.tail.iter().enumerate() {
                tails[a][k] += v;
            }
        }
        LaxTuple::new(disks, tails, self.trunc, self.nodes, outer)
            .map_err(|e| invalid("charts", e.to_string()))
    }

    pub fn generating_set(&self) -> GeneratingSet {
        GeneratingSet::new(self.h.iter().map(|t| Generating::new(t.clone())).collect())
    }

    /// Target times: the listed entries, with every other independent time
    /// taken from `base`.
    pub fn target(&self, base: &TimeTarget) -> Option<TimeTarget> {
        let times = self.times.as_ref()?;
        let mut out = base.clone();
        for t in times {
            out.set(TimeIndex::new(t.marker, t.n), t.value);
        }
        Some(out)
    }
}

fn uniform_complex(rng: &mut ChaCha8Rng, scale: f64) -> C64 {
    C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * scale
}

// Larger residues on the far disks make their flows stiff; smaller ones
// let roundoff dominate the high times.
const SEPARATION: f64 = 1.2;
const FIRST_RADIUS: f64 = 0.4;
const OTHER_RADIUS: f64 = 0.3;
const RESIDUE_SCALE: f64 = 0.08;

/// A random solution of the string equations drawn deterministically from
/// `seed`.
///
/// The starting point is exact. `z_0 = p + c/(p - q_1)`, and one function
/// `g(p) = s Π_{a≥2}(p - q_a)/(p - q_1)` (plus a constant when `M = 1`)
/// serves both as `z_1` and as `ζ_0`. The other charts are `z_a = κ_a/g`,
/// with `H_1 = z_0 z_1` and `H_a = κ_a z_0/z_a`, so every `H_{a,z_0}` equals
/// `g` on its circle. The point is then moved along a random combination
/// of low flows, which keeps it a solution.
///
/// A draw whose period integrands the grid does not resolve is replaced by
/// the next draw from the same stream.
pub fn seeded_instance(
    m: usize,
    seed: u64,
    trunc: usize,
    nodes: usize,
) -> crate::hierarchy::Result<Instance> {
    if m == 0 {
        return Err(HierarchyError::InvalidLax(
            "at least one marked point needed".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut last = None;
    for _ in 0..MAX_DRAWS {
        match draw_instance(m, &mut rng, trunc, nodes) {
            Ok(inst) => {
                let level = aliasing_level(&inst);
                if level < ALIASING_LIMIT {
                    return Ok(inst);
                }
                last = Some(HierarchyError::TruncationTooShort {
                    what: "seeded instance on its contour grid".into(),
                    tail: level,
                });
            }
            Err(e) => last = Some(e),
        }
    }
    Err(last.expect("at least one draw"))
}

const MAX_DRAWS: usize = 16;
const ALIASING_LIMIT: f64 = 1e-12;

/// Worst aliasing of the charts and period integrands over all circles.
fn aliasing_level(inst: &Instance) -> f64 {
    use crate::contour::{Sampled, Spectrum};

    let mut worst: f64 = 0.0;
    for a in 0..inst.lax.m() {
        let s = inst.lax.samples(a);
        let n = s.z0.len();
        let d0: Vec<C64> = (0..n)
            .map(|j| inst.h.h_z0[a].eval(s.z0[j], s.za[j]) * s.dz0[j])
            .collect();
        let da: Vec<C64> = (0..n)
            .map(|j| inst.h.h_za[a].eval(s.z0[j], s.za[j]) * s.dza[j])
            .collect();
        for values in [d0, da, s.z0, s.za] {
            let level = Spectrum::of(&Sampled::from_values(s.circle, values)).aliasing_level();
            worst = worst.max(level);
        }
    }
    worst
}

fn draw_instance(
    m: usize,
    rng: &mut ChaCha8Rng,
    trunc: usize,
    nodes: usize,
) -> crate::hierarchy::Result<Instance> {
    use crate::contour::{Circle, Sampled, Spectrum};
    use crate::hierarchy::{flow, Direction};

    let q1 = C64::from_polar(
        0.05 * rng.gen_range(0.0f64..1.0).sqrt(),
        rng.gen_range(0.0..TAU),
    );
    let theta = rng.gen_range(0.0..TAU);
    let mut centers = vec![q1];
    for a in 1..m {
        let angle = theta + TAU * (a - 1) as f64 / (m - 1) as f64;
        centers.push(q1 + C64::from_polar(SEPARATION, angle));
    }
    let radii: Vec<f64> = (0..m)
        .map(|a| if a == 0 { FIRST_RADIUS } else { OTHER_RADIUS })
        .collect();
    let tail = uniform_complex(rng, 0.002);

    let r1 = C64::from_polar(rng.gen_range(0.6..0.8), rng.gen_range(-0.3..0.3));
    let shift = if m == 1 {
        uniform_complex(rng, 0.3)
    } else {
        C64::new(0.0, 0.0)
    };
    let others = centers[1..].to_vec();
    let s = r1 / others.iter().map(|q| q1 - q).product::<C64>();
    let g = move |p: C64| s * others.iter().map(|q| p - q).product::<C64>() / (p - q1) + shift;

    // Laurent coefficients of f at q: [r, u_1, …, u_N]
    let chart = |f: &dyn Fn(C64) -> C64, q: C64, rho: f64| -> crate::hierarchy::Result<Vec<C64>> {
        let circle = Circle::new(q, rho, nodes)?;
        let values = circle.points().into_iter().map(f).collect();
        let spectrum = Spectrum::of(&Sampled::from_values(circle, values)).denoised(1e-14);
        Ok((0..=trunc as i64).map(|j| spectrum.laurent_coeff(j - 1)).collect())
    };
    let mut disks = vec![Disk {
        q: q1,
        radius: radii[0],
        u: chart(&g, q1, radii[0])?,
    }];
    let one = C64::new(1.0, 0.0);
    let mut gens = vec![Generating::new(vec![Term { j: 1, k: 1, c: one }])];
    for a in 1..m {
        let q = centers[a];
        let unit = chart(&|p| 1.0 / g(p), q, radii[a])?;
        let target = C64::from_polar(RESIDUE_SCALE * rng.gen_range(0.9..1.1), rng.gen_range(0.0..TAU));
        let kappa = target / unit[0];
        disks.push(Disk {
            q,
            radius: radii[a],
            u: unit.iter().map(|c| c * kappa).collect(),
        });
        gens.push(Generating::new(vec![Term { j: 1, k: -1, c: kappa }]));
    }
    let mut tails = vec![Vec::new(); m];
    tails[0] = vec![tail];
    let outer = LaxTuple::default_outer_radius(&centers, &radii);
    let base = LaxTuple::new(disks, tails, trunc, nodes, outer)?;
    let h = GeneratingSet::new(gens);
    h.nondegeneracy_witness(&base)?;

    let mut terms = vec![
        (TimeIndex::new(0, 1), uniform_complex(rng, 0.02)),
        (TimeIndex::new(0, 2), uniform_complex(rng, 0.02)),
    ];
    for a in 1..=m {
        for n in 0..=2 {
            terms.push((TimeIndex::new(a, n), uniform_complex(rng, 0.02)));
        }
    }
    let lax = flow(&base, &h, &Direction::new(terms), 1.0, 16)?;
    lax.univalence_witness()?;
    Ok(Instance { lax, h })
}
