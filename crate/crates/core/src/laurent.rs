//! Laurent polynomials `k[x, x^{-1}]` and matrices over them.
//!
//! These describe sections over the overlap of the two standard charts of the
//! projective line and carry the transition data of vector bundles.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::field::{Fe, Field};
use crate::poly::{Poly, PolyMatrix};

/// A Laurent polynomial in normal form: no zero coefficients are stored.
#[derive(Debug, Clone, PartialEq, Eq, Default, Hash)]
pub struct LaurentPoly {
    terms: BTreeMap<i64, Fe>,
}

impl LaurentPoly {
    pub fn zero() -> LaurentPoly {
        LaurentPoly::default()
    }

    pub fn one() -> LaurentPoly {
        LaurentPoly::monomial(Fe::ONE, 0)
    }

    pub fn constant(c: Fe) -> LaurentPoly {
        LaurentPoly::monomial(c, 0)
    }

    /// `c * x^k`
    pub fn monomial(c: Fe, k: i64) -> LaurentPoly {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(k, c);
        }
        LaurentPoly { terms }
    }

    /// `x^k`
    pub fn x_pow(k: i64) -> LaurentPoly {
        LaurentPoly::monomial(Fe::ONE, k)
    }

    pub fn from_terms(pairs: impl IntoIterator<Item = (i64, Fe)>, f: &Field) -> LaurentPoly {
        let mut out = LaurentPoly::zero();
        for (k, c) in pairs {
            out.add_term(k, c, f);
        }
        out
    }

    pub fn from_poly(p: &Poly) -> LaurentPoly {
        LaurentPoly {
            terms: p
                .coeffs()
                .iter()
                .enumerate()
                .filter(|(_, c)| !c.is_zero())
                .map(|(i, &c)| (i as i64, c))
                .collect(),
        }
    }

    /// The polynomial `x^{-shift} * self` when all its exponents are
    /// nonnegative, `None` otherwise.
    pub fn to_poly_shifted(&self, shift: i64) -> Option<Poly> {
        let Some(min) = self.min_exp() else { return Some(Poly::zero()) };
        if min < shift {
            return None;
        }
        let top = (self.max_exp().unwrap() - shift) as usize;
        let mut c = vec![Fe::ZERO; top + 1];
        for (&k, &v) in &self.terms {
            c[(k - shift) as usize] = v;
        }
        Some(Poly::from_coeffs(c))
    }

    pub fn to_poly(&self) -> Option<Poly> {
        self.to_poly_shifted(0)
    }

    pub fn terms(&self) -> impl Iterator<Item = (i64, Fe)> + '_ {
        self.terms.iter().map(|(&k, &c)| (k, c))
    }

    pub fn coeff(&self, k: i64) -> Fe {
        self.terms.get(&k).copied().unwrap_or(Fe::ZERO)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_empty(&self) -> bool {
        self.is_zero()
    }

    /// Smallest exponent; `None` for the zero polynomial.
    pub fn min_exp(&self) -> Option<i64> {
        self.terms.keys().next().copied()
    }

    /// Largest exponent; `None` for the zero polynomial.
    pub fn max_exp(&self) -> Option<i64> {
        self.terms.keys().next_back().copied()
    }

    /// Units of the Laurent ring are exactly the nonzero monomials.
    pub fn as_unit(&self) -> Option<(Fe, i64)> {
        if self.terms.len() == 1 {
            let (&k, &c) = self.terms.iter().next().unwrap();
            Some((c, k))
        } else {
            None
        }
    }

    pub fn add_term(&mut self, k: i64, c: Fe, f: &Field) {
        if c.is_zero() {
            return;
        }
        let v = f.add(self.coeff(k), c);
        if v.is_zero() {
            self.terms.remove(&k);
        } else {
            self.terms.insert(k, v);
        }
    }

    pub fn add(&self, other: &LaurentPoly, f: &Field) -> LaurentPoly {
        let mut out = self.clone();
        for (k, c) in other.terms() {
            out.add_term(k, c, f);
        }
        out
    }

    pub fn neg(&self, f: &Field) -> LaurentPoly {
        LaurentPoly { terms: self.terms.iter().map(|(&k, &c)| (k, f.neg(c))).collect() }
    }

    pub fn sub(&self, other: &LaurentPoly, f: &Field) -> LaurentPoly {
        self.add(&other.neg(f), f)
    }

    pub fn scale(&self, a: Fe, f: &Field) -> LaurentPoly {
        if a.is_zero() {
            return LaurentPoly::zero();
        }
        LaurentPoly { terms: self.terms.iter().map(|(&k, &c)| (k, f.mul(a, c))).collect() }
    }

    /// Multiplication by `x^k`.
    pub fn shift(&self, k: i64) -> LaurentPoly {
        LaurentPoly { terms: self.terms.iter().map(|(&e, &c)| (e + k, c)).collect() }
    }

    pub fn mul(&self, other: &LaurentPoly, f: &Field) -> LaurentPoly {
        let mut out = LaurentPoly::zero();
        for (a, ca) in self.terms() {
            for (b, cb) in other.terms() {
                out.add_term(a + b, f.mul(ca, cb), f);
            }
        }
        out
    }

    /// `x -> x^p`, with every coefficient raised to the `p`-th power when
    /// `frobenius_coeffs` is set (`p` is the field characteristic).
    pub fn substitute_power(&self, f: &Field, frobenius_coeffs: bool) -> LaurentPoly {
        let p = f.p() as i64;
        LaurentPoly {
            terms: self
                .terms
                .iter()
                .map(|(&k, &c)| (k * p, if frobenius_coeffs { f.frobenius(c, 1) } else { c }))
                .collect(),
        }
    }

    /// `n`-fold [`substitute_power`](Self::substitute_power) with coefficient Frobenius.
    pub fn frobenius_pullback(&self, n: u32, f: &Field) -> LaurentPoly {
        let q = (f.p() as i64).pow(n);
        LaurentPoly {
            terms: self.terms.iter().map(|(&k, &c)| (k * q, f.frobenius(c, n as i64))).collect(),
        }
    }

    /// Coefficientwise Frobenius power, exponents untouched.
    pub fn frobenius_coeffs(&self, n: i64, f: &Field) -> LaurentPoly {
        LaurentPoly { terms: self.terms.iter().map(|(&k, &c)| (k, f.frobenius(c, n))).collect() }
    }

    pub fn render(&self, f: &Field) -> String {
        if self.is_zero() {
            return "0".into();
        }
        self.terms
            .iter()
            .rev()
            .map(|(&k, &c)| {
                let coeff = f.render(c);
                match k {
                    0 => coeff,
                    1 if c == Fe::ONE => "x".into(),
                    _ if c == Fe::ONE => format!("x^{k}"),
                    1 => format!("{coeff}*x"),
                    _ => format!("{coeff}*x^{k}"),
                }
            })
            .collect::<Vec<_>>()
            .join(" + ")
    }
}

/// Matrix with Laurent polynomial entries, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LaurentMatrix {
    rows: usize,
    cols: usize,
    data: Vec<LaurentPoly>,
}

impl LaurentMatrix {
    pub fn zeros(rows: usize, cols: usize) -> LaurentMatrix {
        LaurentMatrix { rows, cols, data: vec![LaurentPoly::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> LaurentMatrix {
        LaurentMatrix::diagonal_monomials(&vec![0; n])
    }

    /// `diag(x^{a_1}, ..., x^{a_r})`
    pub fn diagonal_monomials(exps: &[i64]) -> LaurentMatrix {
        let n = exps.len();
        let mut m = LaurentMatrix::zeros(n, n);
        for (i, &a) in exps.iter().enumerate() {
            m.set(i, i, LaurentPoly::x_pow(a));
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<LaurentPoly>>) -> Result<LaurentMatrix> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        if r == 0 || c == 0 {
            return Err(Error::InvalidInput("matrix must have positive dimensions".into()));
        }
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::InvalidInput("ragged matrix".into()));
        }
        Ok(LaurentMatrix { rows: r, cols: c, data: rows.into_iter().flatten().collect() })
    }

    pub fn from_poly_matrix(m: &PolyMatrix) -> LaurentMatrix {
        let mut out = LaurentMatrix::zeros(m.rows(), m.cols());
        for i in 0..m.rows() {
            for j in 0..m.cols() {
                out.set(i, j, LaurentPoly::from_poly(m.get(i, j)));
            }
        }
        out
    }

    /// `x^{-shift} * self` as a polynomial matrix, if all exponents allow it.
    pub fn to_poly_matrix_shifted(&self, shift: i64) -> Option<PolyMatrix> {
        let mut out = PolyMatrix::zeros(self.rows, self.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(i, j, self.get(i, j).to_poly_shifted(shift)?);
            }
        }
        Some(out)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &LaurentPoly {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: LaurentPoly) {
        self.data[i * self.cols + j] = v;
    }

    pub fn entries(&self) -> impl Iterator<Item = &LaurentPoly> {
        self.data.iter()
    }

    pub fn row(&self, i: usize) -> &[LaurentPoly] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn map(&self, g: impl FnMut(&LaurentPoly) -> LaurentPoly) -> LaurentMatrix {
        LaurentMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(g).collect() }
    }

    /// Smallest exponent over all entries; `None` for the zero matrix.
    pub fn min_exp(&self) -> Option<i64> {
        self.data.iter().filter_map(LaurentPoly::min_exp).min()
    }

    /// Largest exponent over all entries; `None` for the zero matrix.
    pub fn max_exp(&self) -> Option<i64> {
        self.data.iter().filter_map(LaurentPoly::max_exp).max()
    }

    pub fn add(&self, other: &LaurentMatrix, f: &Field) -> LaurentMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        LaurentMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a.add(b, f)).collect(),
        }
    }

    pub fn sub(&self, other: &LaurentMatrix, f: &Field) -> LaurentMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        LaurentMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a.sub(b, f)).collect(),
        }
    }

    pub fn mul(&self, other: &LaurentMatrix, f: &Field) -> LaurentMatrix {
        assert_eq!(self.cols, other.rows, "matrix shape mismatch");
        let mut out = LaurentMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let mut acc = LaurentPoly::zero();
                for k in 0..self.cols {
                    let a = self.get(i, k);
                    if a.is_zero() {
                        continue;
                    }
                    acc = acc.add(&a.mul(other.get(k, j), f), f);
                }
                out.set(i, j, acc);
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[LaurentPoly], f: &Field) -> Vec<LaurentPoly> {
        (0..self.rows)
            .map(|i| {
                (0..self.cols)
                    .fold(LaurentPoly::zero(), |acc, k| acc.add(&self.get(i, k).mul(&v[k], f), f))
            })
            .collect()
    }

    /// Multiplication of every entry by `x^k`.
    pub fn shift(&self, k: i64) -> LaurentMatrix {
        self.map(|p| p.shift(k))
    }

    pub fn scale(&self, a: Fe, f: &Field) -> LaurentMatrix {
        self.map(|p| p.scale(a, f))
    }

    pub fn is_identity(&self) -> bool {
        *self == LaurentMatrix::identity(self.rows)
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(LaurentPoly::is_zero)
    }

    fn shift_to_poly(&self) -> (PolyMatrix, i64) {
        let s = self.min_exp().unwrap_or(0).min(0);
        (self.to_poly_matrix_shifted(s).expect("shift makes entries polynomial"), s)
    }

    /// Determinant, computed on a shifted polynomial copy.
    pub fn det(&self, f: &Field) -> LaurentPoly {
        assert_eq!(self.rows, self.cols, "determinant of a non-square matrix");
        let (p, s) = self.shift_to_poly();
        LaurentPoly::from_poly(&p.det(f)).shift(s * self.rows as i64)
    }

    /// Inverse over the Laurent ring; the determinant must be a unit `c x^m`.
    pub fn inverse(&self, f: &Field) -> Result<LaurentMatrix> {
        laurent_matrix_inverse(self, f)
    }

    /// Entrywise [`LaurentPoly::substitute_power`].
    pub fn substitute_power(&self, f: &Field, frobenius_coeffs: bool) -> LaurentMatrix {
        self.map(|p| p.substitute_power(f, frobenius_coeffs))
    }

    pub fn frobenius_coeffs(&self, n: i64, f: &Field) -> LaurentMatrix {
        self.map(|p| p.frobenius_coeffs(n, f))
    }

    pub fn transpose(&self) -> LaurentMatrix {
        let mut out = LaurentMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(j, i, self.get(i, j).clone());
            }
        }
        out
    }
}

/// Inverse of a Laurent matrix whose determinant is a unit `c x^m`.
pub fn laurent_matrix_inverse(t: &LaurentMatrix, f: &Field) -> Result<LaurentMatrix> {
    if t.rows != t.cols {
        return Err(Error::NotATransitionMatrix("matrix is not square".into()));
    }
    let (p, s) = t.shift_to_poly();
    let d = LaurentPoly::from_poly(&p.det(f));
    let Some((c, m)) = d.as_unit() else {
        return Err(Error::NotATransitionMatrix(format!(
            "determinant {} is not a unit of the Laurent ring",
            d.shift(s * t.rows as i64).render(f)
        )));
    };
    // T = x^s P, so T^{-1} = x^{-s} adj(P) / (c x^m)
    let cinv = f.inv(c).unwrap();
    let adj = LaurentMatrix::from_poly_matrix(&p.adjugate(f));
    Ok(adj.map(|e| e.scale(cinv, f).shift(-m - s)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FieldSpec;

    fn lp(f: &Field, terms: &[(i64, i64)]) -> LaurentPoly {
        LaurentPoly::from_terms(terms.iter().map(|&(k, c)| (k, f.from_int(c))), f)
    }

    #[test]
    fn normal_form_drops_zeros() {
        let f = Field::prime(3).unwrap();
        let a = lp(&f, &[(1, 1), (2, 2)]);
        let b = lp(&f, &[(1, 2)]);
        assert_eq!(a.add(&b, &f), lp(&f, &[(2, 2)]));
        assert_eq!(LaurentPoly::zero().min_exp(), None);
        assert_eq!(LaurentPoly::zero().max_exp(), None);
    }

    #[test]
    fn substitute_power_examples() {
        let f2 = Field::prime(2).unwrap();
        let x1 = lp(&f2, &[(1, 1), (0, 1)]);
        assert_eq!(x1.substitute_power(&f2, true), lp(&f2, &[(2, 1), (0, 1)]));

        let f4 = Field::new(FieldSpec::extension(2, vec![1, 1, 1])).unwrap();
        let c = f4.generator_u();
        let g = LaurentPoly::monomial(c, -1);
        let img = g.substitute_power(&f4, true);
        assert_eq!(img, LaurentPoly::monomial(f4.mul(c, c), -2));
        let k = LaurentPoly::constant(c);
        assert_eq!(k.substitute_power(&f4, true), LaurentPoly::constant(f4.frobenius(c, 1)));
    }

    #[test]
    fn inverse_examples() {
        let f = Field::prime(5).unwrap();
        let d = LaurentMatrix::diagonal_monomials(&[2, -1]);
        assert_eq!(d.inverse(&f).unwrap(), LaurentMatrix::diagonal_monomials(&[-2, 1]));

        let t = LaurentMatrix::from_rows(vec![
            vec![lp(&f, &[(1, 1)]), LaurentPoly::one()],
            vec![LaurentPoly::zero(), lp(&f, &[(1, 1)])],
        ])
        .unwrap();
        let inv = t.inverse(&f).unwrap();
        let expected = LaurentMatrix::from_rows(vec![
            vec![lp(&f, &[(-1, 1)]), lp(&f, &[(-2, -1)])],
            vec![LaurentPoly::zero(), lp(&f, &[(-1, 1)])],
        ])
        .unwrap();
        assert_eq!(inv, expected);
        assert!(t.mul(&inv, &f).is_identity());

        let bad = LaurentMatrix::from_rows(vec![vec![lp(&f, &[(1, 1), (0, 1)])]]).unwrap();
        assert!(matches!(bad.inverse(&f), Err(Error::NotATransitionMatrix(_))));
    }

    #[test]
    fn det_of_shifted_matrix() {
        let f = Field::prime(2).unwrap();
        let t = LaurentMatrix::from_rows(vec![
            vec![lp(&f, &[(-3, 1)]), lp(&f, &[(2, 1)])],
            vec![LaurentPoly::zero(), lp(&f, &[(1, 1)])],
        ])
        .unwrap();
        assert_eq!(t.det(&f), lp(&f, &[(-2, 1)]));
    }
}
