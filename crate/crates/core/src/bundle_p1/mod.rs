//! Vector bundles on the projective line given by a Laurent transition matrix
//! between the chart with coordinate `x` and the chart with coordinate `1/x`.
//!
//! Convention: a global section is `f in k[x]^r` with `T^{-1} f` free of
//! positive exponents, so the `1x1` transition `x^a` is `O(a)`. The twist
//! `E(t)` has transition `T x^t`.

mod birkhoff;
mod cech;
mod tower;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use birkhoff::{birkhoff_split, birkhoff_factor, splitting_from_h0, BirkhoffFactors};
pub use cech::{cech_h, euler_char, h0_space, h1_space, CohomologyWindow, H0Space, H1Space, WINDOW_CAP};
pub use tower::{
    check_h0_decreasing, check_numerical_triviality, fdiv_rigidity, DegreeReport, FdivTowerP1, H0Report,
    RigidityReport,
};

use crate::error::{Error, Result};
use crate::field::Field;
use crate::laurent::{LaurentMatrix, LaurentPoly};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BundleP1 {
    transition: LaurentMatrix,
    inverse: LaurentMatrix,
    degree: i64,
}

impl BundleP1 {
    pub fn new(transition: LaurentMatrix, f: &Field) -> Result<BundleP1> {
        if transition.rows() == 0 || transition.rows() != transition.cols() {
            return Err(Error::NotATransitionMatrix("transition must be square and nonempty".into()));
        }
        let inverse = transition.inverse(f)?;
        let (_, degree) = transition.det(f).as_unit().expect("invertible transition has unit determinant");
        Ok(BundleP1 { transition, inverse, degree })
    }

    /// `O(a_1) + ... + O(a_r)`.
    pub fn split(exponents: &[i64], f: &Field) -> Result<BundleP1> {
        BundleP1::new(LaurentMatrix::diagonal_monomials(exponents), f)
    }

    pub fn trivial(rank: usize, f: &Field) -> Result<BundleP1> {
        BundleP1::split(&vec![0; rank], f)
    }

    pub fn rank(&self) -> usize {
        self.transition.rows()
    }

    pub fn transition(&self) -> &LaurentMatrix {
        &self.transition
    }

    pub fn transition_inverse(&self) -> &LaurentMatrix {
        &self.inverse
    }

    /// The exponent `m` in `det T = c x^m`.
    pub fn degree(&self) -> i64 {
        self.degree
    }

    pub fn twist(&self, t: i64) -> BundleP1 {
        BundleP1 { transition: self.transition.shift(t), inverse: self.inverse.shift(-t), degree: self.degree + t * self.rank() as i64 }
    }

    /// Largest minus smallest exponent over all entries of `T`.
    pub fn spread(&self) -> i64 {
        match (self.transition.min_exp(), self.transition.max_exp()) {
            (Some(lo), Some(hi)) => hi - lo,
            _ => 0,
        }
    }

    pub fn frobenius_pullback(&self, f: &Field) -> BundleP1 {
        BundleP1 {
            transition: self.transition.substitute_power(f, true),
            inverse: self.inverse.substitute_power(f, true),
            degree: self.degree * f.p() as i64,
        }
    }

    /// The isomorphic bundle with transition `C T C^{-1}`, `C` constant.
    pub fn conjugate(&self, c: &crate::linalg::Mat, f: &Field) -> Result<BundleP1> {
        let cinv = c.inverse(f).ok_or_else(|| Error::InvalidInput("conjugating matrix is singular".into()))?;
        let lift = |m: &crate::linalg::Mat| {
            let mut out = LaurentMatrix::zeros(m.rows(), m.cols());
            for i in 0..m.rows() {
                for j in 0..m.cols() {
                    out.set(i, j, LaurentPoly::constant(m.get(i, j)));
                }
            }
            out
        };
        BundleP1::new(lift(c).mul(&self.transition, f).mul(&lift(&cinv), f), f)
    }
}

/// Splitting type `a_1 >= ... >= a_r`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SplittingType(Vec<i64>);

impl SplittingType {
    pub fn new(mut exponents: Vec<i64>) -> SplittingType {
        exponents.sort_unstable_by(|a, b| b.cmp(a));
        SplittingType(exponents)
    }

    pub fn exponents(&self) -> &[i64] {
        &self.0
    }

    pub fn degree(&self) -> i64 {
        self.0.iter().sum()
    }

    pub fn rank(&self) -> usize {
        self.0.len()
    }

    pub fn is_trivial(&self) -> bool {
        self.0.iter().all(|&a| a == 0)
    }

    pub fn scaled(&self, k: i64) -> SplittingType {
        SplittingType::new(self.0.iter().map(|a| a * k).collect())
    }

    /// `h^0(E(t)) = sum max(a_i + t + 1, 0)`.
    pub fn bott_h0(&self, t: i64) -> usize {
        self.0.iter().map(|&a| (a + t + 1).max(0) as usize).sum()
    }

    /// `h^1(E(t)) = sum max(-a_i - t - 1, 0)`.
    pub fn bott_h1(&self, t: i64) -> usize {
        self.0.iter().map(|&a| (-a - t - 1).max(0) as usize).sum()
    }
}

impl fmt::Display for SplittingType {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|a| format!("O({a})")).collect();
        write!(out, "{}", parts.join(" + "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pullback_scales_degree_and_entries() {
        let f = Field::prime(2).unwrap();
        let o1 = BundleP1::split(&[1], &f).unwrap();
        assert_eq!(o1.frobenius_pullback(&f).transition(), &LaurentMatrix::diagonal_monomials(&[2]));
        let e = BundleP1::split(&[-1, 1], &f).unwrap();
        let pe = e.frobenius_pullback(&f);
        assert_eq!(pe.transition(), &LaurentMatrix::diagonal_monomials(&[-2, 2]));
        assert_eq!(pe.degree(), 0);

        let f4 = Field::new(crate::field::FieldSpec::extension(2, vec![1, 1, 1])).unwrap();
        let c = f4.generator_u();
        let t = LaurentMatrix::from_rows(vec![vec![LaurentPoly::monomial(c, 1)]]).unwrap();
        let b = BundleP1::new(t, &f4).unwrap().frobenius_pullback(&f4);
        assert_eq!(b.transition().get(0, 0), &LaurentPoly::monomial(f4.mul(c, c), 2));
    }

    #[test]
    fn twist_shifts_degree() {
        let f = Field::prime(3).unwrap();
        let e = BundleP1::split(&[2, 0], &f).unwrap();
        assert_eq!(e.twist(1).degree(), 4);
        assert_eq!(e.twist(-1).transition(), &LaurentMatrix::diagonal_monomials(&[1, -1]));
    }

    #[test]
    fn splitting_type_is_sorted() {
        let s = SplittingType::new(vec![-1, 3, 0]);
        assert_eq!(s.exponents(), &[3, 0, -1]);
        assert_eq!(s.degree(), 2);
        assert_eq!(s.bott_h0(0), 4 + 1);
        assert_eq!(s.bott_h1(0), 0);
    }
}
