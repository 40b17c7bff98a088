//! Inverse charts, expansions of `Ω_{αn}` in each chart, and the Grunsky table.
//!
//! Expanding `Ω_{αn}(p_β(z))` in powers of `z^{-1}` gives
//! `n b_{αnβm}` as the coefficient of `z^{-m}` (and of `z^0` when `β ≥ 1`);
//! for the logarithmic Hamiltonians `Ω_{a0}` the factor `n` is absent.
//! The constants `b_{a0b0}` come straight from the generating function
//! `log((p_a(z) - p_b(w))/ε_{ab})` and its diagonal analogue.

use crate::laurent::{Chart, Laurent, C64};

use super::{omega_projection, HierarchyError, LaxTuple, Omega, Result, TimeIndex};

/// Inverse of the chart `z_β`, as a series in `1/z` known through `z^{-depth}`.
pub fn invert_chart(lax: &LaxTuple, beta: usize, depth: usize) -> Result<Laurent> {
    let s = if beta == 0 {
        lax.z0_series(depth + 2).reversion()?
    } else {
        lax.za_series(beta - 1).reversion_terms(depth + 2)?
    };
    Ok(s)
}

/// `Ω_{αn}(p_β(z)) = Σ_k positive[k-1] z^k + log_coeff·log z + constant
/// + Σ_m tail[m-1] z^{-m}`.
#[derive(Debug, Clone, PartialEq)]
pub struct OmegaExpansion {
    pub positive: Vec<C64>,
    pub log_coeff: C64,
    pub constant: C64,
    pub tail: Vec<C64>,
}

fn epsilon(a: usize, b: usize) -> f64 {
    if a <= b {
        1.0
    } else {
        -1.0
    }
}

/// `b_{a0b0}` with the declared branch: `-Log((q_a - q_b)/ε_{ab})` off the
/// diagonal, `-Log(r)` with `r` the leading coefficient of `p_a(z) - q_a`
/// on it. Markers are 1-based.
pub fn log_constant(lax: &LaxTuple, a: usize, b: usize, inverse_a: &Laurent) -> C64 {
    if a == b {
        -inverse_a.coeff(1).ln()
    } else {
        let qa = lax.disks[a - 1].q;
        let qb = lax.disks[b - 1].q;
        -((qa - qb) / epsilon(a, b)).ln()
    }
}

fn extract(s: &Laurent, n: usize, depth: usize) -> (Vec<C64>, C64, Vec<C64>) {
    let positive = (1..=n as i32).map(|k| s.coeff(-k)).collect();
    let tail = (1..=depth as i32).map(|m| s.coeff(m)).collect();
    (positive, s.coeff(0), tail)
}

/// Expansion of `Ω_{αn}` in the chart `β`, given that chart's inverse.
pub fn expand_with_inverse(
    lax: &LaxTuple,
    idx: TimeIndex,
    beta: usize,
    inverse: &Laurent,
    depth: usize,
) -> Result<OmegaExpansion> {
    let zero = C64::new(0.0, 0.0);
    let one = C64::new(1.0, 0.0);
    let y = Laurent::monomial(Chart::AtInfinity, 1, one);
    match omega_projection(lax, idx)? {
        Omega::Polynomial(s) | Omega::Principal(s) => {
            let composed = Laurent::compose(&s, inverse)?;
            let (positive, constant, tail) = extract(&composed, idx.n, depth);
            Ok(OmegaExpansion {
                positive,
                log_coeff: zero,
                constant,
                tail,
            })
        }
        Omega::Log { center } => {
            let a = idx.marker;
            let shifted = inverse - &Laurent::constant(Chart::AtInfinity, center);
            // -log(p_β(z) - q_a) = log_coeff·log z + constant - log(unit)
            let (log_coeff, constant, unit) = if beta == 0 {
                (-one, zero, &shifted * &y)
            } else if beta == a {
                let lead = shifted.coeff(1);
                (one, log_constant(lax, a, a, inverse), shifted.scale(lead.inv()).try_mul(
                    &Laurent::monomial(Chart::AtInfinity, -1, one),
                )?)
            } else {
                let gap = lax.disks[beta - 1].q - center;
                let ipi = if a < beta { C64::new(0.0, std::f64::consts::PI) } else { zero };
                (zero, log_constant(lax, a, beta, inverse) + ipi, shifted.scale(gap.inv()))
            };
            let unit = unit.truncate(depth as i32 + 1);
            let l = unit.log_unit()?;
            let (_, _, tail) = extract(&l.scale(-one), 0, depth);
            Ok(OmegaExpansion {
                positive: Vec::new(),
                log_coeff,
                constant,
                tail,
            })
        }
    }
}

pub fn expand_omega_in_chart(
    lax: &LaxTuple,
    idx: TimeIndex,
    beta: usize,
    depth: usize,
) -> Result<OmegaExpansion> {
    let inverse = invert_chart(lax, beta, depth + idx.n + 4)?;
    expand_with_inverse(lax, idx, beta, &inverse, depth)
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct GrunskyTable {
    pub nb: usize,
    pub m: usize,
    pub slots: Vec<TimeIndex>,
    /// Row `i` holds the coefficients read off the expansion of slot `i`.
    pub values: Vec<Vec<C64>>,
    pub max_asymmetry: f64,
    pub warning: Option<String>,
}

impl GrunskyTable {
    fn slot(&self, idx: TimeIndex) -> Option<usize> {
        self.slots.iter().position(|s| *s == idx)
    }

    /// `b_{αmβn}`.
    pub fn b(&self, alpha: TimeIndex, beta: TimeIndex) -> C64 {
        match (self.slot(alpha), self.slot(beta)) {
            (Some(i), Some(j)) => self.values[i][j],
            _ => C64::new(f64::NAN, f64::NAN),
        }
    }

    pub fn asymmetry(&self) -> f64 {
        let k = self.slots.len();
        let mut worst: f64 = 0.0;
        for i in 0..k {
            for j in 0..i {
                worst = worst.max((self.values[i][j] - self.values[j][i]).norm());
            }
        }
        worst
    }
}

/// Rows of the Grunsky table for the given sources, each covering every slot
/// up to depth `nb`.
pub fn grunsky_rows(
    lax: &LaxTuple,
    sources: &[TimeIndex],
    nb: usize,
) -> Result<(Vec<TimeIndex>, Vec<Vec<C64>>)> {
    let m = lax.m();
    let slots = TimeIndex::all(m, nb);
    let margin = nb + sources.iter().map(|s| s.n).max().unwrap_or(0) + 4;
    let inverses = (0..=m)
        .map(|beta| invert_chart(lax, beta, margin))
        .collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::with_capacity(sources.len());
    for &src in sources {
        let mut row = vec![C64::new(0.0, 0.0); slots.len()];
        let mut per_chart = Vec::with_capacity(m + 1);
        for (beta, inv) in inverses.iter().enumerate() {
            per_chart.push(expand_with_inverse(lax, src, beta, inv, nb)?);
        }
        let scale = if src.n == 0 { 1.0 } else { src.n as f64 };
        for (j, tgt) in slots.iter().enumerate() {
            let e = &per_chart[tgt.marker];
            row[j] = if tgt.n == 0 {
                if src.n == 0 {
                    log_constant(lax, src.marker, tgt.marker, &inverses[src.marker])
                } else {
                    e.constant / scale
                }
            } else {
                e.tail[tgt.n - 1] / scale
            };
        }
        rows.push(row);
    }
    Ok((slots, rows))
}

pub fn grunsky_table(lax: &LaxTuple, nb: usize) -> Result<GrunskyTable> {
    if nb == 0 || 2 * nb > lax.trunc {
        return Err(HierarchyError::IndexOutOfRange(format!(
            "Grunsky depth {nb} needs 1 ≤ Nb ≤ trunc/2 = {}",
            lax.trunc / 2
        )));
    }
    let slots = TimeIndex::all(lax.m(), nb);
    let (slots, values) = grunsky_rows(lax, &slots, nb).map(|(s, v)| (s, v))?;
    let mut table = GrunskyTable {
        nb,
        m: lax.m(),
        slots,
        values,
        max_asymmetry: 0.0,
        warning: None,
    };
    table.max_asymmetry = table.asymmetry();
    if table.max_asymmetry > 1e-6 {
        table.warning = Some(format!(
            "asymmetry {:e} suggests the truncation is too short",
            table.max_asymmetry
        ));
    }
    Ok(table)
}
