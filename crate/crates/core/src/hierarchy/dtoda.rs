//! Reduction of an `M = 1` solution to the dispersionless Toda hierarchy.
//!
//! With `p = P + q_1` the Lax and Orlov–Schulman pairs become
//! `𝓛(P) = z_0(p)`, `𝓛̃(P) = z_1(p)^{-1}`, `𝓜 = 𝓛 ζ_0`, `𝓜̃ = -ζ_1 𝓛̃^{-1}`,
//! and the string equations turn into `𝓜 = 𝓛 H_z(𝓛, 𝓛̃)`,
//! `𝓜̃ = -𝓛̃ H_{z̃}(𝓛, 𝓛̃)` with `H(z, z̃) = H_1(z, 1/z̃)`.

use crate::contour::Circle;
use crate::laurent::{Chart, Laurent, C64};

use super::{orlov, GeneratingSet, HierarchyError, LaxTuple, PeriodData, Result};

/// `𝓛` and `𝓜` live in the chart at `P = ∞`; `𝓛̃` and `𝓜̃` at `P = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct DTodaSeries {
    pub shift: C64,
    pub l: Laurent,
    pub l_tilde: Laurent,
    pub m: Laurent,
    pub m_tilde: Laurent,
}

pub fn dtoda_reduce(lax: &LaxTuple, periods: &PeriodData) -> Result<DTodaSeries> {
    if lax.m() != 1 {
        return Err(HierarchyError::WrongM(lax.m()));
    }
    let q = lax.disks[0].q;
    let n = lax.trunc as i32;
    // p as a series in P, in both charts
    let p_far = &Laurent::coordinate(Chart::AtInfinity) + &Laurent::constant(Chart::AtInfinity, q);
    let origin = Chart::AtPoint(C64::new(0.0, 0.0));
    let p_near = &Laurent::coordinate(origin) + &Laurent::constant(origin, q);

    // z_0 = P + q + Σ c_k P^{-k}
    let mut coeffs = vec![C64::new(1.0, 0.0), q];
    coeffs.extend_from_slice(&lax.tails[0]);
    let l = Laurent::new(Chart::AtInfinity, -1, coeffs);
    let z1 = Laurent::new(origin, -1, lax.disks[0].u.clone());
    let l_tilde = z1.reciprocal_to(n)?;

    let zeta = orlov(lax, periods)?;
    let zeta0 = Laurent::compose(&zeta[0], &p_far)?;
    let zeta1 = Laurent::compose(&zeta[1], &p_near)?;
    let m = l.try_mul(&zeta0)?;
    let m_tilde = zeta1.try_mul(&z1)?.scale(C64::new(-1.0, 0.0)).truncate(n);
    Ok(DTodaSeries {
        shift: q,
        l,
        l_tilde,
        m,
        m_tilde,
    })
}

/// Largest residuals of the two dToda string equations on `|P| = ρ_1`.
pub fn dtoda_residual(
    lax: &LaxTuple,
    h: &GeneratingSet,
    series: &DTodaSeries,
) -> Result<(f64, f64)> {
    if lax.m() != 1 {
        return Err(HierarchyError::WrongM(lax.m()));
    }
    let circle = Circle::new(C64::new(0.0, 0.0), lax.disks[0].radius, lax.nodes)?;
    let (hz0, hza) = (&h.h_z0[0], &h.h_za[0]);
    let mut worst = (0.0f64, 0.0f64);
    for pp in circle.points() {
        let p = pp + series.shift;
        let big_l = lax.z0(p);
        let z1 = lax.za(0, p);
        let lt = z1.inv();
        // H_z = H_{1,z0}; H_{z̃} = -H_{1,za}/z̃²
        let h_z = hz0.eval(big_l, z1);
        let h_zt = -hza.eval(big_l, z1) / (lt * lt);
        let m = series.m.eval_at(pp)?;
        let mt = series.m_tilde.eval_at(pp)?;
        worst.0 = worst.0.max((m - big_l * h_z).norm());
        worst.1 = worst.1.max((mt + lt * h_zt).norm());
    }
    Ok(worst)
}
