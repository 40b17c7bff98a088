//! Points of the space of Lax tuples.
//!
//! The chart at a finite marked point is stored as its Laurent series
//! `z_a = r_a/(p - q_a) + Σ_{j≥1} u_{aj} (p - q_a)^{j-1}`.
//!
//! The chart at infinity must be holomorphic on the whole exterior of the
//! disks, not just near `p = ∞`. It is therefore stored as
//! `z_0 = p + Σ_a Σ_{k≥1} c_{ak} (p - q_a)^{-k}`, a sum of principal parts
//! around the marked points. The coefficients `u_{0j}` of the expansion at
//! infinity follow by binomial re-expansion ([`LaxTuple::u0_coefficients`]).

use crate::contour::Circle;
use crate::laurent::{Chart, Laurent, C64};

use super::{HierarchyError, Result};

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Disk {
    pub q: C64,
    pub radius: f64,
    /// `u[0] = r_a`, `u[j] = u_{aj}` for `j = 1..=N`.
    pub u: Vec<C64>,
}

impl Disk {
    pub fn r(&self) -> C64 {
        self.u[0]
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct LaxTuple {
    pub trunc: usize,
    pub nodes: usize,
    pub outer_radius: f64,
    pub disks: Vec<Disk>,
    /// `tails[a][k-1] = c_{a,k}`: principal part of `z_0` at `q_a`.
    pub tails: Vec<Vec<C64>>,
}

/// Values of the charts on the nodes of one marked-point circle.
#[derive(Debug, Clone)]
pub struct DiskSamples {
    pub circle: Circle,
    pub z0: Vec<C64>,
    pub dz0: Vec<C64>,
    pub za: Vec<C64>,
    pub dza: Vec<C64>,
}

/// Coefficient-level time derivative of a Lax tuple.
#[derive(Debug, Clone, PartialEq)]
pub struct Tangent {
    pub d_tails: Vec<Vec<C64>>,
    pub d_q: Vec<C64>,
    /// `d_u[a][0]` is the derivative of `r_a`.
    pub d_u: Vec<Vec<C64>>,
}

fn zero() -> C64 {
    C64::new(0.0, 0.0)
}

fn binomial_rows(n: usize) -> Vec<Vec<f64>> {
    let mut rows = vec![vec![1.0]];
    for i in 1..=n {
        let prev = &rows[i - 1];
        let mut row = vec![1.0; i + 1];
        for k in 1..i {
            row[k] = prev[k - 1] + prev[k];
        }
        rows.push(row);
    }
    rows
}

impl LaxTuple {
    pub fn new(
        disks: Vec<Disk>,
        tails: Vec<Vec<C64>>,
        trunc: usize,
        nodes: usize,
        outer_radius: f64,
    ) -> Result<Self> {
        let mut lax = LaxTuple {
            trunc,
            nodes,
            outer_radius,
            disks,
            tails,
        };
        for d in &mut lax.disks {
            d.u.resize(trunc + 1, zero());
        }
        for t in &mut lax.tails {
            t.resize(trunc, zero());
        }
        lax.validate()?;
        Ok(lax)
    }

    /// Builds a tuple from the expansion of `z_0` at infinity,
    /// `z_0 = p + Σ_{j≥2} u0[j-2] p^{1-j}`. The principal part at `p = 0`
    /// is re-expanded around the marked point whose disk contains 0.
    pub fn from_infinity_coefficients(
        u0: &[C64],
        disks: Vec<Disk>,
        trunc: usize,
        nodes: usize,
        outer_radius: f64,
    ) -> Result<Self> {
        let m = disks.len();
        let mut tails = vec![vec![zero(); trunc]; m];
        if u0.iter().any(|c| *c != zero()) {
            let home = disks
                .iter()
                .position(|d| d.q.norm() < d.radius)
                .ok_or_else(|| {
                    HierarchyError::InvalidLax(
                        "u0 puts a pole at p = 0, which lies outside every disk".into(),
                    )
                })?;
            let q = disks[home].q;
            let rows = binomial_rows(2 * trunc + 2);
            // p^{-k} = w^{-k} (1 + q/w)^{-k} with w = p - q
            for (i, c) in u0.iter().enumerate() {
                let k = i + 1;
                for j in 0..trunc {
                    let e = k + j;
                    if e > trunc {
                        break;
                    }
                    let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                    let binom = rows[k + j - 1][j];
                    tails[home][e - 1] += c * q.powi(j as i32) * (sign * binom);
                }
            }
        }
        LaxTuple::new(disks, tails, trunc, nodes, outer_radius)
    }

    pub fn m(&self) -> usize {
        self.disks.len()
    }

    /// Default circle radii: 0.3 of the distance to the nearest other
    /// marked point, or for a single point half its modulus (1 at the origin).
    pub fn default_radii(centers: &[C64]) -> Vec<f64> {
        centers
            .iter()
            .enumerate()
            .map(|(a, qa)| {
                let nearest = centers
                    .iter()
                    .enumerate()
                    .filter(|(b, _)| *b != a)
                    .map(|(_, qb)| (qa - qb).norm())
                    .fold(f64::INFINITY, f64::min);
                if nearest.is_finite() {
                    0.3 * nearest
                } else if qa.norm() > 0.0 {
                    0.5 * qa.norm()
                } else {
                    1.0
                }
            })
            .collect()
    }

    pub fn default_outer_radius(centers: &[C64], radii: &[f64]) -> f64 {
        2.0 * centers
            .iter()
            .zip(radii)
            .map(|(q, r)| q.norm() + r)
            .fold(0.0, f64::max)
    }

    pub fn validate(&self) -> Result<()> {
        if self.disks.is_empty() {
            return Err(HierarchyError::InvalidLax("at least one marked point needed".into()));
        }
        if self.trunc == 0 {
            return Err(HierarchyError::InvalidLax("truncation order must be positive".into()));
        }
        if self.tails.len() != self.disks.len() {
            return Err(HierarchyError::InvalidLax("one principal part of z0 per disk".into()));
        }
        for (a, d) in self.disks.iter().enumerate() {
            if d.u[0] == zero() || !d.u[0].norm().is_finite() {
                return Err(HierarchyError::InvalidLax(format!("r_{} must be nonzero", a + 1)));
            }
            if !(d.radius > 0.0) {
                return Err(HierarchyError::InvalidLax(format!("radius of C_{} must be positive", a + 1)));
            }
            if d.q.norm() + d.radius >= self.outer_radius {
                return Err(HierarchyError::ContourOverlap(format!(
                    "C_{} reaches the outer circle",
                    a + 1
                )));
            }
            for (b, e) in self.disks.iter().enumerate().skip(a + 1) {
                if (d.q - e.q).norm() <= d.radius + e.radius {
                    return Err(HierarchyError::ContourOverlap(format!(
                        "C_{} and C_{} intersect",
                        a + 1,
                        b + 1
                    )));
                }
            }
        }
        Circle::new(C64::new(0.0, 0.0), 1.0, self.nodes)?;
        Ok(())
    }

    pub fn circle(&self, a: usize) -> Circle {
        let d = &self.disks[a];
        Circle {
            center: d.q,
            radius: d.radius,
            nodes: self.nodes,
        }
    }

    pub fn outer_circle(&self) -> Circle {
        Circle {
            center: zero(),
            radius: self.outer_radius,
            nodes: self.nodes,
        }
    }

    pub fn z0(&self, p: C64) -> C64 {
        let mut acc = p;
        for (d, tail) in self.disks.iter().zip(&self.tails) {
            let x = (p - d.q).inv();
            let mut h = zero();
            for c in tail.iter().rev() {
                h = (h + c) * x;
            }
            acc += h;
        }
        acc
    }

    pub fn dz0(&self, p: C64) -> C64 {
        let mut acc = C64::new(1.0, 0.0);
        for (d, tail) in self.disks.iter().zip(&self.tails) {
            let x = (p - d.q).inv();
            let mut h = zero();
            for (i, c) in tail.iter().enumerate().rev() {
                h = (h - c * (i + 1) as f64) * x;
            }
            acc += h * x;
        }
        acc
    }

    pub fn za(&self, a: usize, p: C64) -> C64 {
        let d = &self.disks[a];
        let w = p - d.q;
        let mut h = zero();
        for c in d.u[1..].iter().rev() {
            h = h * w + c;
        }
        d.u[0] / w + h
    }

    pub fn dza(&self, a: usize, p: C64) -> C64 {
        let d = &self.disks[a];
        let w = p - d.q;
        let mut h = zero();
        for (j, c) in d.u.iter().enumerate().skip(2).rev() {
            h = h * w + c * (j - 1) as f64;
        }
        -d.u[0] / (w * w) + h
    }

    pub fn samples(&self, a: usize) -> DiskSamples {
        let circle = self.circle(a);
        let pts = circle.points();
        DiskSamples {
            circle,
            z0: pts.iter().map(|&p| self.z0(p)).collect(),
            dz0: pts.iter().map(|&p| self.dz0(p)).collect(),
            za: pts.iter().map(|&p| self.za(a, p)).collect(),
            dza: pts.iter().map(|&p| self.dza(a, p)).collect(),
        }
    }

    /// The chart at `q_a` as an exact Laurent polynomial.
    pub fn za_series(&self, a: usize) -> Laurent {
        let d = &self.disks[a];
        Laurent::new(Chart::AtPoint(d.q), -1, d.u.clone())
    }

    /// The principal part of `z_0` at `q_a` as an exact Laurent polynomial.
    pub fn tail_series(&self, a: usize) -> Laurent {
        let mut coeffs: Vec<C64> = self.tails[a].iter().rev().copied().collect();
        coeffs.push(zero());
        Laurent::new(Chart::AtPoint(self.disks[a].q), -(self.trunc as i32), coeffs)
    }

    /// The expansion of `z_0` at infinity, known through `p^{-order}`.
    pub fn z0_series(&self, order: usize) -> Laurent {
        let mut coeffs = vec![zero(); order + 2];
        coeffs[0] = C64::new(1.0, 0.0);
        for (m, slot) in coeffs.iter_mut().enumerate().skip(2) {
            *slot = self.u0_coefficient_of(m - 1);
        }
        Laurent::new(Chart::AtInfinity, -1, coeffs).with_order(order as i32)
    }

    /// Coefficient of `p^{-m}` in `z_0` at infinity, `m ≥ 1`.
    fn u0_coefficient_of(&self, m: usize) -> C64 {
        // (p - q)^{-k} = Σ_j C(k+j-1, j) q^j p^{-k-j}
        let mut acc = zero();
        for (d, tail) in self.disks.iter().zip(&self.tails) {
            let mut binom = 1.0;
            // k runs down from m so that C(m-1, m-k) updates multiplicatively
            for k in (1..=m).rev() {
                let j = m - k;
                if j > 0 {
                    binom *= (m - j) as f64 / j as f64;
                }
                if k <= tail.len() {
                    acc += tail[k - 1] * d.q.powi(j as i32) * binom;
                }
            }
        }
        acc
    }

    /// `u_{0j}` for `j = 2..=count+1`.
    pub fn u0_coefficients(&self, count: usize) -> Vec<C64> {
        (1..=count).map(|m| self.u0_coefficient_of(m)).collect()
    }

    /// Fails unless `z_0'` is bounded away from zero on every circle and
    /// `z_a'` on `C_a`.
    pub fn univalence_witness(&self) -> Result<()> {
        let outer = self.outer_circle();
        for p in outer.points() {
            if self.dz0(p).norm() < 1e-12 {
                return Err(HierarchyError::InvalidLax("z0' vanishes on the outer circle".into()));
            }
        }
        for a in 0..self.m() {
            let s = self.samples(a);
            if s.dz0.iter().any(|v| v.norm() < 1e-12) {
                return Err(HierarchyError::InvalidLax(format!("z0' vanishes on C_{}", a + 1)));
            }
            if s.dza.iter().any(|v| v.norm() < 1e-12) {
                return Err(HierarchyError::InvalidLax(format!("z_{}' vanishes on C_{}", a + 1, a + 1)));
            }
        }
        Ok(())
    }

    /// Flat coefficient vector: per disk the principal part of `z_0`, then
    /// `q_a`, then `r_a, u_{a1}, …`.
    pub fn coords(&self) -> Vec<C64> {
        let mut out = Vec::with_capacity(self.m() * (2 * self.trunc + 2));
        for (d, tail) in self.disks.iter().zip(&self.tails) {
            out.extend_from_slice(tail);
            out.push(d.q);
            out.extend_from_slice(&d.u);
        }
        out
    }

    /// Inverse of [`LaxTuple::coords`]; circles follow their centers.
    pub fn with_coords(&self, x: &[C64]) -> Result<LaxTuple> {
        let n = self.trunc;
        let block = 2 * n + 2;
        if x.len() != block * self.m() {
            return Err(HierarchyError::InvalidLax("coordinate vector has the wrong length".into()));
        }
        let mut out = self.clone();
        for a in 0..self.m() {
            let b = &x[a * block..(a + 1) * block];
            out.tails[a].copy_from_slice(&b[..n]);
            out.disks[a].q = b[n];
            out.disks[a].u.copy_from_slice(&b[n + 1..]);
        }
        out.validate().map_err(|e| match e {
            HierarchyError::ContourOverlap(s) => HierarchyError::ContourCollision(s),
            other => other,
        })?;
        Ok(out)
    }

    /// Moves along a tangent: `self + h · t`.
    pub fn advance(&self, t: &Tangent, h: f64) -> Result<LaxTuple> {
        let x: Vec<C64> = self
            .coords()
            .iter()
            .zip(t.to_vec())
            .map(|(a, b)| a + b * h)
            .collect();
        self.with_coords(&x)
    }
}

impl Tangent {
    pub fn zero_like(lax: &LaxTuple) -> Tangent {
        Tangent {
            d_tails: vec![vec![zero(); lax.trunc]; lax.m()],
            d_q: vec![zero(); lax.m()],
            d_u: vec![vec![zero(); lax.trunc + 1]; lax.m()],
        }
    }

    pub fn to_vec(&self) -> Vec<C64> {
        let mut out = Vec::new();
        for a in 0..self.d_q.len() {
            out.extend_from_slice(&self.d_tails[a]);
            out.push(self.d_q[a]);
            out.extend_from_slice(&self.d_u[a]);
        }
        out
    }

    pub fn axpy(&mut self, c: C64, other: &Tangent) {
        for (x, y) in self.d_tails.iter_mut().flatten().zip(other.d_tails.iter().flatten()) {
            *x += c * y;
        }
        for (x, y) in self.d_q.iter_mut().zip(&other.d_q) {
            *x += c * y;
        }
        for (x, y) in self.d_u.iter_mut().flatten().zip(other.d_u.iter().flatten()) {
            *x += c * y;
        }
    }

    pub fn scale(&self, c: C64) -> Tangent {
        let mut out = self.clone();
        out.d_tails.iter_mut().flatten().for_each(|x| *x *= c);
        out.d_q.iter_mut().for_each(|x| *x *= c);
        out.d_u.iter_mut().flatten().for_each(|x| *x *= c);
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.to_vec().iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Derivatives of the expansion coefficients `u_{0j}` at infinity,
    /// `j = 2..=count+1`, induced by this tangent.
    pub fn d_u0(&self, lax: &LaxTuple, count: usize) -> Vec<C64> {
        (1..=count)
            .map(|m| {
                let mut acc = zero();
                for a in 0..lax.m() {
                    let q = lax.disks[a].q;
                    let mut binom = 1.0;
                    for k in (1..=m).rev() {
                        let j = m - k;
                        if j > 0 {
                            binom *= (m - j) as f64 / j as f64;
                        }
                        if k <= lax.trunc {
                            let c = lax.tails[a][k - 1];
                            let dc = self.d_tails[a][k - 1];
                            acc += dc * q.powi(j as i32) * binom;
                            if j > 0 {
                                acc += c * q.powi(j as i32 - 1) * self.d_q[a] * (j as f64 * binom);
                            }
                        }
                    }
                }
                acc
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn disk(q: C64, radius: f64, u: &[C64]) -> Disk {
        Disk {
            q,
            radius,
            u: u.to_vec(),
        }
    }

    #[test]
    fn infinity_coefficients_round_trip() {
        let u0 = vec![c(0.1, 0.0), c(0.0, -0.05), c(0.02, 0.01)];
        let d = disk(c(0.2, 0.1), 0.8, &[c(1.0, 0.0)]);
        let lax = LaxTuple::from_infinity_coefficients(&u0, vec![d], 24, 64, 4.0).unwrap();
        let back = lax.u0_coefficients(6);
        for (i, v) in back.iter().enumerate() {
            let expected = u0.get(i).copied().unwrap_or(zero());
            // re-expansion truncated at trunc terms, so only the leading
            // coefficients are reproduced exactly
            assert!((v - expected).norm() < 1e-12, "u0[{i}] = {v}");
        }
        // pointwise agreement far from the disk
        let p = c(3.0, -1.0);
        let direct = p + u0.iter().enumerate().map(|(i, u)| u * p.powi(-(i as i32) - 1)).sum::<C64>();
        assert!((lax.z0(p) - direct).norm() < 1e-12);
    }

    #[test]
    fn pole_outside_disks_is_rejected() {
        let d = disk(c(2.0, 0.0), 1.0, &[c(1.0, 0.0)]);
        let err = LaxTuple::from_infinity_coefficients(&[c(0.1, 0.0)], vec![d], 8, 64, 8.0);
        assert!(matches!(err, Err(HierarchyError::InvalidLax(_))));
    }

    #[test]
    fn evaluations_match_series() {
        let d = disk(c(0.5, 0.0), 0.4, &[c(0.7, 0.1), c(0.1, 0.0), c(0.05, 0.02)]);
        let mut lax = LaxTuple::new(vec![d], vec![vec![c(0.03, 0.0), c(0.01, -0.01)]], 8, 64, 3.0).unwrap();
        lax.tails[0][2] = c(0.004, 0.0);
        let p = c(0.7, 0.2);
        let s = lax.za_series(0);
        assert!((lax.za(0, p) - s.eval_at(p).unwrap()).norm() < 1e-14);
        assert!((lax.dza(0, p) - s.derivative_p().eval_at(p).unwrap()).norm() < 1e-13);
        let t = lax.tail_series(0);
        assert!((lax.z0(p) - p - t.eval_at(p).unwrap()).norm() < 1e-14);
        assert!((lax.dz0(p) - 1.0 - t.derivative_p().eval_at(p).unwrap()).norm() < 1e-13);
        let far = c(5.0, 2.0);
        let z0 = lax.z0_series(30);
        assert!((z0.eval_at(far).unwrap() - lax.z0(far)).norm() < 1e-14);
    }

    #[test]
    fn overlapping_disks_are_rejected() {
        let a = disk(c(0.0, 0.0), 1.0, &[c(1.0, 0.0)]);
        let b = disk(c(1.5, 0.0), 1.0, &[c(1.0, 0.0)]);
        let err = LaxTuple::new(vec![a, b], vec![vec![], vec![]], 4, 64, 10.0);
        assert!(matches!(err, Err(HierarchyError::ContourOverlap(_))));
        assert_eq!(LaxTuple::default_radii(&[c(2.0, 0.0)]), vec![1.0]);
        assert_eq!(LaxTuple::default_radii(&[c(0.0, 0.0), c(2.0, 0.0)]), vec![0.6, 0.6]);
    }

    #[test]
    fn coordinates_round_trip() {
        let d = disk(c(0.5, 0.0), 0.4, &[c(0.7, 0.1), c(0.1, 0.0)]);
        let lax = LaxTuple::new(vec![d], vec![vec![c(0.03, 0.0)]], 4, 64, 3.0).unwrap();
        let back = lax.with_coords(&lax.coords()).unwrap();
        assert_eq!(back, lax);
    }
}
