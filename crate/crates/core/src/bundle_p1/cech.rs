//! Two-chart Čech cohomology on exponent windows.
//!
//! `h^0` is the kernel of "positive part of `T^{-1} f`" on `f` of degree at
//! most `w`. `h^1` is the quotient of the negative exponents `[-M, -1]` by the
//! truncated images of `T x^{-a} e_i`. Both are exact once `w >= max exp T`
//! and `M >= max exp T^{-1}`; the window starts at least there and is doubled
//! once to confirm the value.

use std::collections::BTreeMap;

use super::BundleP1;
use crate::error::{Error, Result};
use crate::field::{Fe, Field};
use crate::laurent::LaurentPoly;
use crate::linalg::{BlockEchelon, SparseRow};
use crate::poly::Poly;

/// Largest window tried before giving up.
pub const WINDOW_CAP: usize = 1 << 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CohomologyWindow {
    pub dim: usize,
    pub window: usize,
}

fn start_window(e: &BundleP1, i: u8) -> usize {
    let proven = match i {
        0 => e.transition().max_exp().unwrap_or(0).max(0),
        _ => e.transition_inverse().max_exp().unwrap_or(0).max(1),
    };
    ((1 + e.spread()).max(proven)).max(1) as usize
}

fn h0_system(e: &BundleP1, w: usize, f: &Field) -> BlockEchelon {
    let r = e.rank();
    let tinv = e.transition_inverse();
    let mut rows: BTreeMap<(usize, i64), SparseRow> = BTreeMap::new();
    for l in 0..=w {
        for i in 0..r {
            let col = l * r + i;
            for j in 0..r {
                for (k, c) in tinv.get(j, i).terms() {
                    let ex = l as i64 + k;
                    if ex > 0 {
                        rows.entry((j, ex)).or_default().push((col, c));
                    }
                }
            }
        }
    }
    let rows: Vec<SparseRow> = rows.into_values().collect();
    BlockEchelon::new(r * (w + 1), &rows, f)
}

fn h1_system(e: &BundleP1, m: usize, f: &Field) -> BlockEchelon {
    let r = e.rank();
    let t = e.transition();
    let top = m as i64 + t.max_exp().unwrap_or(0).max(0);
    let mut rows = Vec::new();
    for a in 0..=top {
        for i in 0..r {
            let mut row: SparseRow = Vec::new();
            for j in 0..r {
                for (k, c) in t.get(j, i).terms() {
                    let ex = k - a;
                    if ex <= -1 && ex >= -(m as i64) {
                        row.push(((-ex - 1) as usize * r + j, c));
                    }
                }
            }
            if !row.is_empty() {
                rows.push(row);
            }
        }
    }
    BlockEchelon::new(r * m, &rows, f)
}

fn dim_at(e: &BundleP1, i: u8, w: usize, f: &Field) -> usize {
    match i {
        0 => {
            let s = h0_system(e, w, f);
            s.ncols() - s.rank()
        }
        _ => {
            let s = h1_system(e, w, f);
            s.ncols() - s.rank()
        }
    }
}

fn stabilized(e: &BundleP1, i: u8, f: &Field) -> Result<CohomologyWindow> {
    let mut w = start_window(e, i);
    if w > WINDOW_CAP {
        return Err(Error::CohomologyDiverged { cap: WINDOW_CAP });
    }
    let mut prev = dim_at(e, i, w, f);
    while 2 * w <= WINDOW_CAP {
        let next = dim_at(e, i, 2 * w, f);
        if next == prev {
            return Ok(CohomologyWindow { dim: prev, window: w });
        }
        prev = next;
        w *= 2;
    }
    Err(Error::CohomologyDiverged { cap: WINDOW_CAP })
}

/// `h^i(E(t))` for `i in {0, 1}`.
pub fn cech_h(e: &BundleP1, i: u8, t: i64, f: &Field) -> Result<usize> {
    if i > 1 {
        return Err(Error::InvalidInput(format!("cohomological degree {i} on a curve; only 0 and 1 are computed")));
    }
    Ok(stabilized(&e.twist(t), i, f)?.dim)
}

/// `h^0(E(t)) - h^1(E(t))`.
pub fn euler_char(e: &BundleP1, t: i64, f: &Field) -> Result<i64> {
    Ok(cech_h(e, 0, t, f)? as i64 - cech_h(e, 1, t, f)? as i64)
}

/// Global sections with an explicit basis. Every basis vector has a 1 at its
/// own free coordinate and 0 at the others, so coordinates of a section are
/// read off at the free coordinates.
#[derive(Debug, Clone)]
pub struct H0Space {
    rank: usize,
    window: usize,
    basis: Vec<Vec<Poly>>,
    free: Vec<usize>,
}

impl H0Space {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Vec<Poly>] {
        &self.basis
    }

    /// Coordinates of a global section in the basis; `None` if `s` is not
    /// supported in the window.
    pub fn coordinates(&self, s: &[Poly]) -> Option<Vec<Fe>> {
        if s.iter().any(|a| a.degree().is_some_and(|d| d > self.window)) {
            return None;
        }
        Some(
            self.free
                .iter()
                .map(|&c| s[c % self.rank].coeff(c / self.rank))
                .collect(),
        )
    }
}

pub fn h0_space(e: &BundleP1, f: &Field) -> Result<H0Space> {
    let w = stabilized(e, 0, f)?.window;
    let r = e.rank();
    let (vecs, free) = h0_system(e, w, f).nullspace(f);
    let basis = vecs
        .iter()
        .map(|v| (0..r).map(|i| Poly::from_coeffs((0..=w).map(|l| v[l * r + i]).collect())).collect())
        .collect();
    Ok(H0Space { rank: r, window: w, basis, free })
}

/// `H^1` as the window quotient; basis vectors are classes of monomials
/// `x^{-b} e_j` at the non-pivot window coordinates.
#[derive(Debug, Clone)]
pub struct H1Space {
    rank: usize,
    window: usize,
    echelon: BlockEchelon,
    free: Vec<usize>,
}

impl H1Space {
    pub fn dim(&self) -> usize {
        self.free.len()
    }

    pub fn window(&self) -> usize {
        self.window
    }

    /// Overlap section representing basis vector `k`.
    pub fn basis_section(&self, k: usize, f: &Field) -> Vec<LaurentPoly> {
        let c = self.free[k];
        let (b, j) = (c / self.rank + 1, c % self.rank);
        let mut s = vec![LaurentPoly::zero(); self.rank];
        s[j] = LaurentPoly::monomial(f.one(), -(b as i64));
        s
    }

    /// Coordinates of the class of an overlap section.
    pub fn class(&self, s: &[LaurentPoly], f: &Field) -> Vec<Fe> {
        let mut v = vec![Fe::ZERO; self.rank * self.window];
        for (j, a) in s.iter().enumerate() {
            for (k, c) in a.terms() {
                if k <= -1 && k >= -(self.window as i64) {
                    let idx = (-k - 1) as usize * self.rank + j;
                    v[idx] = f.add(v[idx], c);
                }
            }
        }
        self.echelon.reduce(&mut v, f);
        self.free.iter().map(|&c| v[c]).collect()
    }
}

pub fn h1_space(e: &BundleP1, f: &Field) -> Result<H1Space> {
    let m = stabilized(e, 1, f)?.window;
    let echelon = h1_system(e, m, f);
    let pivots = echelon.pivot_columns();
    let mut is_pivot = vec![false; echelon.ncols()];
    for c in pivots {
        is_pivot[c] = true;
    }
    let free = (0..echelon.ncols()).filter(|&c| !is_pivot[c]).collect();
    Ok(H1Space { rank: e.rank(), window: m, echelon, free })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::laurent::LaurentMatrix;

    fn k(p: u64) -> Field {
        Field::prime(p).unwrap()
    }

    #[test]
    fn line_bundle_examples() {
        let f = k(2);
        let o3 = BundleP1::split(&[3], &f).unwrap();
        assert_eq!(cech_h(&o3, 0, 0, &f).unwrap(), 4);
        let om3 = BundleP1::split(&[-3], &f).unwrap();
        assert_eq!(cech_h(&om3, 1, 0, &f).unwrap(), 2);
        for a in -4..0 {
            assert_eq!(cech_h(&BundleP1::split(&[a], &f).unwrap(), 0, 0, &f).unwrap(), 0);
        }
    }

    #[test]
    fn euler_examples() {
        let f = k(3);
        let e = BundleP1::split(&[2, 0], &f).unwrap();
        assert_eq!(euler_char(&e, 1, &f).unwrap(), 6);
        assert_eq!(euler_char(&BundleP1::split(&[-1], &f).unwrap(), 0, &f).unwrap(), 0);
        for r in 1..4 {
            for t in -3..3 {
                assert_eq!(euler_char(&BundleP1::trivial(r, &f).unwrap(), t, &f).unwrap(), r as i64 * (t + 1));
            }
        }
    }

    #[test]
    fn unipotent_transition() {
        let f = k(5);
        let x = LaurentPoly::x_pow(1);
        let t = LaurentMatrix::from_rows(vec![vec![x.clone(), LaurentPoly::one()], vec![LaurentPoly::zero(), x]])
            .unwrap();
        let e = BundleP1::new(t, &f).unwrap();
        // O(1) + O(1)
        assert_eq!(cech_h(&e, 0, 0, &f).unwrap(), 4);
        assert_eq!(cech_h(&e, 1, -3, &f).unwrap(), 2);
    }

    #[test]
    fn explicit_spaces_match_dimensions() {
        let f = k(2);
        let e = BundleP1::split(&[2, -3], &f).unwrap();
        let h0 = h0_space(&e, &f).unwrap();
        assert_eq!(h0.dim(), 3);
        for (idx, b) in h0.basis().iter().enumerate() {
            let c = h0.coordinates(b).unwrap();
            for (j, &cj) in c.iter().enumerate() {
                assert_eq!(cj, if j == idx { Fe::ONE } else { Fe::ZERO });
            }
        }
        let h1 = h1_space(&e, &f).unwrap();
        assert_eq!(h1.dim(), 2);
        for k in 0..h1.dim() {
            let c = h1.class(&h1.basis_section(k, &f), &f);
            assert_eq!(c.iter().filter(|a| !a.is_zero()).count(), 1);
        }
    }
}
