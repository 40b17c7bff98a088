//! Hamiltonians `Ω_{αn}`: projected powers of the charts.

use crate::laurent::{Chart, Laurent, C64};

use super::{HierarchyError, LaxTuple, Result, TimeIndex};

#[derive(Debug, Clone, PartialEq)]
pub enum Omega {
    /// Polynomial in `p`, stored in the chart at infinity.
    Polynomial(Laurent),
    /// Principal part at a marked point.
    Principal(Laurent),
    /// `-log(p - center)`.
    Log { center: C64 },
}

impl Omega {
    pub fn eval(&self, p: C64) -> C64 {
        match self {
            Omega::Polynomial(s) | Omega::Principal(s) => {
                s.eval_at(p).expect("Hamiltonian evaluated at its pole")
            }
            Omega::Log { center } => -(p - center).ln(),
        }
    }

    /// Derivative with respect to `p`.
    pub fn derivative(&self, p: C64) -> C64 {
        match self {
            Omega::Polynomial(s) | Omega::Principal(s) => s
                .derivative_p()
                .eval_at(p)
                .expect("Hamiltonian evaluated at its pole"),
            Omega::Log { center } => -(p - center).inv(),
        }
    }

    pub fn series(&self) -> Option<&Laurent> {
        match self {
            Omega::Polynomial(s) | Omega::Principal(s) => Some(s),
            Omega::Log { .. } => None,
        }
    }
}

/// Keeps only the coefficients whose exponents satisfy `keep`.
fn project(s: &Laurent, keep: impl Fn(i32) -> bool) -> Laurent {
    let lo = s.k_min();
    let coeffs: Vec<C64> = (lo..=s.k_max())
        .map(|k| if keep(k) { s.coeff(k) } else { C64::new(0.0, 0.0) })
        .collect();
    let zero = Laurent::zero(s.chart());
    &Laurent::new(s.chart(), lo, coeffs) + &zero
}

/// `Ω_{0n}`: polynomial part of `z_0^n`; `Ω_{an}`: principal part of `z_a^n`
/// at `q_a`; `Ω_{a0} = -log(p - q_a)`.
pub fn omega_projection(lax: &LaxTuple, idx: TimeIndex) -> Result<Omega> {
    let TimeIndex { marker, n } = idx;
    if marker > lax.m() {
        return Err(HierarchyError::IndexOutOfRange(format!("marker {marker} > M")));
    }
    if marker == 0 {
        if n == 0 {
            return Err(HierarchyError::IndexOutOfRange("Ω_{00} is not a flow".into()));
        }
        let z0 = lax.z0_series(n + 2);
        let power = z0.powi(n as u32);
        let poly = project(&power, |k| k <= 0);
        Ok(Omega::Polynomial(Laurent::new(
            Chart::AtInfinity,
            poly.k_min(),
            poly.coeffs().to_vec(),
        )))
    } else {
        let a = marker - 1;
        if n == 0 {
            return Ok(Omega::Log {
                center: lax.disks[a].q,
            });
        }
        let power = lax.za_series(a).powi(n as u32);
        Ok(Omega::Principal(project(&power, |k| k < 0)))
    }
}

/// `Ω_{αn}(q)` at the given points from the generating functions
/// `log((p_0(z) - q)/z)` and `log((q - p_a(z))/(q - q_a))`.
pub fn faber_omega(lax: &LaxTuple, idx: TimeIndex, points: &[C64]) -> Result<Vec<C64>> {
    let TimeIndex { marker, n } = idx;
    if n == 0 || marker > lax.m() {
        return Err(HierarchyError::IndexOutOfRange(format!("Faber index {idx}")));
    }
    let y = Laurent::monomial(Chart::AtInfinity, 1, C64::new(1.0, 0.0));
    let one = Laurent::constant(Chart::AtInfinity, C64::new(1.0, 0.0));
    let depth = n as i32 + 2;
    let out = if marker == 0 {
        let p0 = lax.z0_series(n + 4).reversion()?;
        let base = (&p0 * &y).truncate(depth).log_unit()?;
        let inv = p0.reciprocal()?.truncate(depth);
        points
            .iter()
            .map(|&q| {
                let l = (&base + &(&one - &inv.scale(q)).log_unit()?).truncate(depth);
                Ok(-l.coeff(n as i32) * n as f64)
            })
            .collect::<Result<Vec<_>>>()?
    } else {
        let a = marker - 1;
        let qa = lax.disks[a].q;
        let pa = lax.za_series(a).reversion_terms(n + 4)?;
        let shifted = &pa - &Laurent::constant(Chart::AtInfinity, qa);
        points
            .iter()
            .map(|&q| {
                let l = (&one - &shifted.scale((q - qa).inv())).truncate(depth).log_unit()?;
                Ok(-l.coeff(n as i32) * n as f64)
            })
            .collect::<Result<Vec<_>>>()?
    };
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hierarchy::Disk;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn identity_lax(q: f64, r: f64) -> LaxTuple {
        let d = Disk {
            q: c(q),
            radius: 0.5,
            u: vec![c(r)],
        };
        LaxTuple::new(vec![d], vec![vec![]], 8, 64, 8.0).unwrap()
    }

    #[test]
    fn identity_chart_gives_p() {
        let lax = identity_lax(2.0, 1.0);
        let om = omega_projection(&lax, TimeIndex::new(0, 1)).unwrap();
        let p = C64::new(0.3, 1.7);
        assert!((om.eval(p) - p).norm() < 1e-15);
        let om = omega_projection(&lax, TimeIndex::new(1, 1)).unwrap();
        assert!((om.eval(p) - (p - 2.0).inv()).norm() < 1e-15);
    }

    #[test]
    fn square_of_a_joukowski_map() {
        // z0 = p + a/p with the pole at 0 inside the disk
        let a = 0.3;
        let d = Disk {
            q: c(0.0),
            radius: 0.8,
            u: vec![c(1.0)],
        };
        let lax = LaxTuple::new(vec![d], vec![vec![c(a)]], 8, 64, 4.0).unwrap();
        let om = omega_projection(&lax, TimeIndex::new(0, 2)).unwrap();
        let s = om.series().unwrap();
        assert!((s.coeff(-2) - 1.0).norm() < 1e-15);
        assert!((s.coeff(0) - 2.0 * a).norm() < 1e-15);
        assert!(s.coeff(2).norm() == 0.0 && s.coeff(-1).norm() == 0.0);
    }

    #[test]
    fn faber_matches_projection() {
        let d = Disk {
            q: c(0.1),
            radius: 0.6,
            u: vec![C64::new(0.8, 0.2), c(0.1), C64::new(0.0, 0.05), c(0.02)],
        };
        let lax = LaxTuple::new(
            vec![d],
            vec![vec![c(0.05), C64::new(0.0, 0.02), c(0.01)]],
            8,
            64,
            4.0,
        )
        .unwrap();
        let pts = [C64::new(1.5, 0.3), C64::new(-0.7, 1.1)];
        for marker in 0..=1 {
            for n in 1..=4 {
                let idx = TimeIndex::new(marker, n);
                let om = omega_projection(&lax, idx).unwrap();
                let fab = faber_omega(&lax, idx, &pts).unwrap();
                for (p, f) in pts.iter().zip(&fab) {
                    assert!((om.eval(*p) - f).norm() < 1e-12, "{idx}: {} vs {f}", om.eval(*p));
                }
            }
        }
    }
}
