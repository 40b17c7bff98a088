//! Generating functions `H_a(z_0, z_a)` as Laurent polynomials in two variables.

use std::collections::BTreeMap;

use crate::laurent::C64;

use super::{HierarchyError, LaxTuple, Result};

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Term {
    pub j: i32,
    pub k: i32,
    pub c: C64,
}

/// `Σ c z_0^j z_a^k`.
#[derive(Debug, Clone, PartialEq, Default, serde::Serialize, serde::Deserialize)]
#[serde(transparent)]
pub struct Generating {
    pub terms: Vec<Term>,
}

impl Generating {
    pub fn new(terms: Vec<Term>) -> Self {
        Generating { terms }.normalized()
    }

    pub fn monomial(nu0: i32, nua: i32) -> Self {
        Generating::new(vec![Term {
            j: nu0,
            k: nua,
            c: C64::new(1.0, 0.0),
        }])
    }

    /// Merges equal exponents and drops zero coefficients; terms are sorted.
    pub fn normalized(&self) -> Self {
        let mut acc: BTreeMap<(i32, i32), C64> = BTreeMap::new();
        for t in &self.terms {
            *acc.entry((t.j, t.k)).or_insert(C64::new(0.0, 0.0)) += t.c;
        }
        Generating {
            terms: acc
                .into_iter()
                .filter(|(_, c)| *c != C64::new(0.0, 0.0))
                .map(|((j, k), c)| Term { j, k, c })
                .collect(),
        }
    }

    pub fn eval(&self, z0: C64, za: C64) -> C64 {
        self.terms
            .iter()
            .map(|t| t.c * z0.powi(t.j) * za.powi(t.k))
            .sum()
    }

    pub fn d_z0(&self) -> Self {
        Generating::new(
            self.terms
                .iter()
                .map(|t| Term {
                    j: t.j - 1,
                    k: t.k,
                    c: t.c * t.j as f64,
                })
                .collect(),
        )
    }

    pub fn d_za(&self) -> Self {
        Generating::new(
            self.terms
                .iter()
                .map(|t| Term {
                    j: t.j,
                    k: t.k - 1,
                    c: t.c * t.k as f64,
                })
                .collect(),
        )
    }

    pub fn mul(&self, other: &Generating) -> Self {
        let mut terms = Vec::new();
        for a in &self.terms {
            for b in &other.terms {
                terms.push(Term {
                    j: a.j + b.j,
                    k: a.k + b.k,
                    c: a.c * b.c,
                });
            }
        }
        Generating::new(terms)
    }

    /// True when some term depends on both variables, so that the mixed
    /// partial is not identically zero.
    pub fn has_mixed_term(&self) -> bool {
        self.terms.iter().any(|t| t.j != 0 && t.k != 0 && t.c != C64::new(0.0, 0.0))
    }

    pub fn max_abs_diff(&self, other: &Generating) -> f64 {
        let diff = Generating::new(
            self.terms
                .iter()
                .copied()
                .chain(other.terms.iter().map(|t| Term { c: -t.c, ..*t }))
                .collect(),
        );
        diff.terms.iter().map(|t| t.c.norm()).fold(0.0, f64::max)
    }
}

/// One generating function per finite marked point, with cached partials.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratingSet {
    pub h: Vec<Generating>,
    pub h_z0: Vec<Generating>,
    pub h_za: Vec<Generating>,
    pub h_z0za: Vec<Generating>,
}

impl GeneratingSet {
    pub fn new(h: Vec<Generating>) -> Self {
        let h_z0: Vec<_> = h.iter().map(|g| g.d_z0()).collect();
        let h_za: Vec<_> = h.iter().map(|g| g.d_za()).collect();
        let h_z0za = h_z0.iter().map(|g| g.d_za()).collect();
        GeneratingSet {
            h,
            h_z0,
            h_za,
            h_z0za,
        }
    }

    pub fn monomial(nu0: i32, nua: &[i32]) -> Self {
        GeneratingSet::new(nua.iter().map(|&n| Generating::monomial(nu0, n)).collect())
    }

    pub fn len(&self) -> usize {
        self.h.len()
    }

    pub fn is_empty(&self) -> bool {
        self.h.is_empty()
    }

    /// Checks the table structure and that `H_{a,z_0 z_a}` stays away from
    /// zero on the nodes of every `C_a`.
    pub fn nondegeneracy_witness(&self, lax: &LaxTuple) -> Result<()> {
        if self.len() != lax.m() {
            return Err(HierarchyError::InvalidLax(format!(
                "{} generating functions for {} marked points",
                self.len(),
                lax.m()
            )));
        }
        for a in 0..lax.m() {
            if !self.h[a].has_mixed_term() {
                return Err(HierarchyError::DegenerateH {
                    disk: a + 1,
                    detail: "no term depends on both z0 and za".into(),
                });
            }
            let s = lax.samples(a);
            let min = s
                .z0
                .iter()
                .zip(&s.za)
                .map(|(&z0, &za)| self.h_z0za[a].eval(z0, za).norm())
                .fold(f64::INFINITY, f64::min);
            if !(min > 1e-8) {
                return Err(HierarchyError::DegenerateH {
                    disk: a + 1,
                    detail: format!("mixed partial reaches {min:e} on the contour"),
                });
            }
        }
        Ok(())
    }
}
