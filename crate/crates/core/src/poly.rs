//! Dense univariate polynomials and polynomial matrices over a [`Field`].
//!
//! The Laurent types in [`crate::laurent`] are the public exchange format;
//! this module is the fast path used by the D-module and Smith-form code.

use crate::arith::binom_mod_p;
use crate::error::{Error, Result};
use crate::field::{Fe, Field};

/// Polynomial with coefficients little-endian, no trailing zeros.
#[derive(Debug, Clone, PartialEq, Eq, Default, Hash)]
pub struct Poly {
    c: Vec<Fe>,
}

impl Poly {
    pub fn zero() -> Poly {
        Poly { c: Vec::new() }
    }

    pub fn one() -> Poly {
        Poly { c: vec![Fe::ONE] }
    }

    pub fn constant(a: Fe) -> Poly {
        Poly::from_coeffs(vec![a])
    }

    pub fn monomial(a: Fe, k: usize) -> Poly {
        if a.is_zero() {
            return Poly::zero();
        }
        let mut c = vec![Fe::ZERO; k + 1];
        c[k] = a;
        Poly { c }
    }

    pub fn x() -> Poly {
        Poly::monomial(Fe::ONE, 1)
    }

    pub fn from_coeffs(mut c: Vec<Fe>) -> Poly {
        while c.last().is_some_and(|a| a.is_zero()) {
            c.pop();
        }
        Poly { c }
    }

    pub fn coeffs(&self) -> &[Fe] {
        &self.c
    }

    pub fn coeff(&self, i: usize) -> Fe {
        self.c.get(i).copied().unwrap_or(Fe::ZERO)
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.c.len().checked_sub(1)
    }

    pub fn is_constant(&self) -> bool {
        self.c.len() <= 1
    }

    pub fn lead(&self) -> Fe {
        self.c.last().copied().unwrap_or(Fe::ZERO)
    }

    pub fn add(&self, other: &Poly, f: &Field) -> Poly {
        let n = self.c.len().max(other.c.len());
        Poly::from_coeffs((0..n).map(|i| f.add(self.coeff(i), other.coeff(i))).collect())
    }

    pub fn sub(&self, other: &Poly, f: &Field) -> Poly {
        let n = self.c.len().max(other.c.len());
        Poly::from_coeffs((0..n).map(|i| f.sub(self.coeff(i), other.coeff(i))).collect())
    }

    pub fn neg(&self, f: &Field) -> Poly {
        Poly { c: self.c.iter().map(|&a| f.neg(a)).collect() }
    }

    pub fn scale(&self, a: Fe, f: &Field) -> Poly {
        if a.is_zero() {
            return Poly::zero();
        }
        Poly { c: self.c.iter().map(|&b| f.mul(a, b)).collect() }
    }

    /// Multiplication by `x^k`.
    pub fn shift(&self, k: usize) -> Poly {
        if self.is_zero() {
            return Poly::zero();
        }
        let mut c = vec![Fe::ZERO; k];
        c.extend_from_slice(&self.c);
        Poly { c }
    }

    pub fn mul(&self, other: &Poly, f: &Field) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::zero();
        }
        let mut c = vec![Fe::ZERO; self.c.len() + other.c.len() - 1];
        for (i, &a) in self.c.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, &b) in other.c.iter().enumerate() {
                c[i + j] = f.mul_add(a, b, c[i + j]);
            }
        }
        Poly::from_coeffs(c)
    }

    /// `self += a * x^k * other`
    pub fn add_scaled_shifted(&mut self, a: Fe, k: usize, other: &Poly, f: &Field) {
        if a.is_zero() || other.is_zero() {
            return;
        }
        if self.c.len() < other.c.len() + k {
            self.c.resize(other.c.len() + k, Fe::ZERO);
        }
        for (j, &b) in other.c.iter().enumerate() {
            self.c[j + k] = f.mul_add(a, b, self.c[j + k]);
        }
        while self.c.last().is_some_and(|a| a.is_zero()) {
            self.c.pop();
        }
    }

    /// Euclidean division; panics if `d` is zero.
    pub fn divrem(&self, d: &Poly, f: &Field) -> (Poly, Poly) {
        let dd = d.degree().expect("polynomial division by zero");
        let inv = f.inv(d.lead()).unwrap();
        let mut r = self.c.clone();
        if r.len() <= dd {
            return (Poly::zero(), self.clone());
        }
        let mut q = vec![Fe::ZERO; r.len() - dd];
        for i in (dd..r.len()).rev() {
            let top = r[i];
            if top.is_zero() {
                continue;
            }
            let c = f.mul(top, inv);
            q[i - dd] = c;
            let nc = f.neg(c);
            for (j, &b) in d.c.iter().enumerate() {
                r[i - dd + j] = f.mul_add(nc, b, r[i - dd + j]);
            }
        }
        r.truncate(dd);
        (Poly::from_coeffs(q), Poly::from_coeffs(r))
    }

    /// Exact quotient; `None` if `d` does not divide `self`.
    pub fn exact_div(&self, d: &Poly, f: &Field) -> Option<Poly> {
        let (q, r) = self.divrem(d, f);
        r.is_zero().then_some(q)
    }

    pub fn monic(&self, f: &Field) -> Poly {
        if self.is_zero() {
            return Poly::zero();
        }
        self.scale(f.inv(self.lead()).unwrap(), f)
    }

    /// Divided-power derivative `D_k`, with `D_k(x^l) = C(l, k) x^{l-k}`.
    pub fn divided_derivative(&self, k: usize, f: &Field) -> Poly {
        if k == 0 {
            return self.clone();
        }
        let p = f.p();
        if self.c.len() <= k {
            return Poly::zero();
        }
        let c = (k..self.c.len())
            .map(|l| {
                let b = binom_mod_p(l as u64, k as u64, p);
                if b == 0 {
                    Fe::ZERO
                } else {
                    f.mul(f.from_int(b as i64), self.c[l])
                }
            })
            .collect();
        Poly::from_coeffs(c)
    }

    /// `f(x) -> f(x^q)`, coefficients untouched.
    pub fn substitute_power(&self, q: usize) -> Poly {
        if self.is_zero() {
            return Poly::zero();
        }
        let mut c = vec![Fe::ZERO; (self.c.len() - 1) * q + 1];
        for (i, &a) in self.c.iter().enumerate() {
            c[i * q] = a;
        }
        Poly { c }
    }

    /// Coefficientwise `a -> a^{p^n}`.
    pub fn frobenius_coeffs(&self, n: i64, f: &Field) -> Poly {
        Poly { c: self.c.iter().map(|&a| f.frobenius(a, n)).collect() }
    }

    /// `f(x)^{p^n}` as a polynomial: `x -> x^{p^n}` together with the
    /// coefficient Frobenius.
    pub fn frobenius_power(&self, n: u32, f: &Field) -> Poly {
        let q = (f.p() as usize).pow(n);
        self.frobenius_coeffs(n as i64, f).substitute_power(q)
    }

    /// If every exponent is divisible by `q`, returns `g` with `self = g(x^q)`.
    pub fn unsubstitute_power(&self, q: usize) -> Option<Poly> {
        if self.c.iter().enumerate().any(|(i, a)| i % q != 0 && !a.is_zero()) {
            return None;
        }
        Some(Poly::from_coeffs(self.c.iter().step_by(q).copied().collect()))
    }

    pub fn eval(&self, x: Fe, f: &Field) -> Fe {
        self.c.iter().rev().fold(Fe::ZERO, |acc, &a| f.mul_add(acc, x, a))
    }
}

/// Dense matrix of polynomials.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolyMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Poly>,
}

impl PolyMatrix {
    pub fn zeros(rows: usize, cols: usize) -> PolyMatrix {
        PolyMatrix { rows, cols, data: vec![Poly::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> PolyMatrix {
        let mut m = PolyMatrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Poly::one());
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Poly>>) -> Result<PolyMatrix> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::InvalidInput("ragged polynomial matrix".into()));
        }
        Ok(PolyMatrix { rows: r, cols: c, data: rows.into_iter().flatten().collect() })
    }

    pub fn from_columns(cols: &[Vec<Poly>]) -> PolyMatrix {
        let c = cols.len();
        let r = cols.first().map_or(0, |col| col.len());
        let mut m = PolyMatrix::zeros(r, c);
        for (j, col) in cols.iter().enumerate() {
            for (i, p) in col.iter().enumerate() {
                m.set(i, j, p.clone());
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Poly {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, p: Poly) {
        self.data[i * self.cols + j] = p;
    }

    pub fn column(&self, j: usize) -> Vec<Poly> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn map(&self, mut g: impl FnMut(&Poly) -> Poly) -> PolyMatrix {
        PolyMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(&mut g).collect() }
    }

    pub fn mul(&self, other: &PolyMatrix, f: &Field) -> PolyMatrix {
        assert_eq!(self.cols, other.rows, "matrix shape mismatch");
        let mut out = PolyMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let mut acc = Poly::zero();
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

    pub fn mul_vec(&self, v: &[Poly], f: &Field) -> Vec<Poly> {
        (0..self.rows)
            .map(|i| {
                (0..self.cols).fold(Poly::zero(), |acc, k| acc.add(&self.get(i, k).mul(&v[k], f), f))
            })
            .collect()
    }

    pub fn is_identity(&self) -> bool {
        self.rows == self.cols
            && (0..self.rows).all(|i| {
                (0..self.cols).all(|j| {
                    let p = self.get(i, j);
                    if i == j {
                        *p == Poly::one()
                    } else {
                        p.is_zero()
                    }
                })
            })
    }

    /// Largest entry degree; `None` if the matrix is zero.
    pub fn max_degree(&self) -> Option<usize> {
        self.data.iter().filter_map(Poly::degree).max()
    }

    /// Determinant by fraction-free (Bareiss) elimination.
    pub fn det(&self, f: &Field) -> Poly {
        assert_eq!(self.rows, self.cols, "determinant of a non-square matrix");
        let n = self.rows;
        if n == 0 {
            return Poly::one();
        }
        let mut m: Vec<Vec<Poly>> =
            (0..n).map(|i| (0..n).map(|j| self.get(i, j).clone()).collect()).collect();
        let mut negate = false;
        let mut prev = Poly::one();
        for k in 0..n - 1 {
            if m[k][k].is_zero() {
                match (k + 1..n).find(|&i| !m[i][k].is_zero()) {
                    Some(i) => {
                        m.swap(i, k);
                        negate = !negate;
                    }
                    None => return Poly::zero(),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let num = m[k][k].mul(&m[i][j], f).sub(&m[i][k].mul(&m[k][j], f), f);
                    m[i][j] = num.exact_div(&prev, f).expect("Bareiss division is exact");
                }
            }
            prev = m[k][k].clone();
        }
        let d = m[n - 1][n - 1].clone();
        if negate {
            d.neg(f)
        } else {
            d
        }
    }

    fn minor(&self, skip_row: usize, skip_col: usize) -> PolyMatrix {
        let mut out = PolyMatrix::zeros(self.rows - 1, self.cols - 1);
        for (oi, i) in (0..self.rows).filter(|&i| i != skip_row).enumerate() {
            for (oj, j) in (0..self.cols).filter(|&j| j != skip_col).enumerate() {
                out.set(oi, oj, self.get(i, j).clone());
            }
        }
        out
    }

    pub fn adjugate(&self, f: &Field) -> PolyMatrix {
        let n = self.rows;
        let mut adj = PolyMatrix::zeros(n, n);
        if n == 1 {
            adj.set(0, 0, Poly::one());
            return adj;
        }
        for i in 0..n {
            for j in 0..n {
                let d = self.minor(j, i).det(f);
                adj.set(i, j, if (i + j) % 2 == 1 { d.neg(f) } else { d });
            }
        }
        adj
    }

    /// Inverse over `k[x]`; exists iff the determinant is a nonzero constant.
    pub fn inverse(&self, f: &Field) -> Result<PolyMatrix> {
        if self.rows != self.cols {
            return Err(Error::NotATransitionMatrix("matrix is not square".into()));
        }
        let d = self.det(f);
        if d.is_zero() || !d.is_constant() {
            return Err(Error::NotATransitionMatrix(format!(
                "determinant has degree {:?}, expected a nonzero constant",
                d.degree()
            )));
        }
        let inv = f.inv(d.coeff(0)).unwrap();
        Ok(self.adjugate(f).map(|p| p.scale(inv, f)))
    }

    /// Entrywise `p -> p(x)^{p^n}`.
    pub fn frobenius_power(&self, n: u32, f: &Field) -> PolyMatrix {
        self.map(|p| p.frobenius_power(n, f))
    }
}

/// Nonzero invariant factors (monic, each dividing the next) of a polynomial
/// matrix, computed by Smith reduction over the principal ideal domain `k[y]`.
pub fn smith_invariant_factors(m: &PolyMatrix, f: &Field) -> Vec<Poly> {
    let mut a: Vec<Vec<Poly>> =
        (0..m.rows()).map(|i| (0..m.cols()).map(|j| m.get(i, j).clone()).collect()).collect();
    let (rows, cols) = (m.rows(), m.cols());
    let mut diag = Vec::new();
    let mut t = 0;
    while t < rows.min(cols) {
        // pivot: nonzero entry of least degree in the trailing block
        let mut best: Option<(usize, usize, usize)> = None;
        for (i, row) in a.iter().enumerate().skip(t) {
            for (j, p) in row.iter().enumerate().skip(t) {
                if let Some(d) = p.degree() {
                    if best.is_none_or(|(_, _, bd)| d < bd) {
                        best = Some((i, j, d));
                    }
                }
            }
        }
        let Some((pi, pj, _)) = best else { break };
        a.swap(t, pi);
        for row in a.iter_mut() {
            row.swap(t, pj);
        }
        loop {
            let mut dirty = false;
            for i in t + 1..rows {
                if a[i][t].is_zero() {
                    continue;
                }
                let (q, r) = a[i][t].divrem(&a[t][t], f);
                for j in t..cols {
                    let v = a[i][j].sub(&q.mul(&a[t][j], f), f);
                    a[i][j] = v;
                }
                if !r.is_zero() {
                    a.swap(t, i);
                    dirty = true;
                }
            }
            for j in t + 1..cols {
                if a[t][j].is_zero() {
                    continue;
                }
                let (q, r) = a[t][j].divrem(&a[t][t], f);
                for row in a.iter_mut().skip(t) {
                    let v = row[j].sub(&q.mul(&row[t], f), f);
                    row[j] = v;
                }
                if !r.is_zero() {
                    for row in a.iter_mut() {
                        row.swap(t, j);
                    }
                    dirty = true;
                }
            }
            if dirty {
                continue;
            }
            // divisibility: pivot must divide the whole trailing block
            let mut fixed = true;
            'outer: for i in t + 1..rows {
                for j in t + 1..cols {
                    if !a[i][j].divrem(&a[t][t], f).1.is_zero() {
                        // add row i to row t and redo the elimination
                        for c in t..cols {
                            let v = a[t][c].add(&a[i][c], f);
                            a[t][c] = v;
                        }
                        fixed = false;
                        break 'outer;
                    }
                }
            }
            if fixed {
                break;
            }
        }
        diag.push(a[t][t].monic(f));
        t += 1;
    }
    diag
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(p: u64) -> Field {
        Field::prime(p).unwrap()
    }

    fn poly(field: &Field, c: &[i64]) -> Poly {
        Poly::from_coeffs(c.iter().map(|&a| field.from_int(a)).collect())
    }

    #[test]
    fn divrem_reconstructs() {
        let k = f(5);
        let a = poly(&k, &[1, 2, 3, 4, 1]);
        let d = poly(&k, &[2, 0, 1]);
        let (q, r) = a.divrem(&d, &k);
        assert_eq!(q.mul(&d, &k).add(&r, &k), a);
        assert!(r.degree().unwrap_or(0) < 2);
    }

    #[test]
    fn divided_derivative_matches_binomials() {
        let k = f(3);
        let x5 = Poly::monomial(Fe::ONE, 5);
        assert_eq!(x5.divided_derivative(2, &k), Poly::monomial(Fe::ONE, 3));
        let x3 = Poly::monomial(Fe::ONE, 3);
        assert_eq!(x3.divided_derivative(3, &k), Poly::one());
    }

    #[test]
    fn det_and_inverse_of_unimodular() {
        let k = f(3);
        let m = PolyMatrix::from_rows(vec![
            vec![Poly::one(), poly(&k, &[0, 1, 1])],
            vec![Poly::zero(), Poly::one()],
        ])
        .unwrap();
        let e = PolyMatrix::from_rows(vec![
            vec![Poly::one(), Poly::zero()],
            vec![poly(&k, &[2, 1]), Poly::one()],
        ])
        .unwrap();
        let u = m.mul(&e, &k);
        assert_eq!(u.det(&k), Poly::one());
        let inv = u.inverse(&k).unwrap();
        assert!(u.mul(&inv, &k).is_identity());
        assert!(inv.mul(&u, &k).is_identity());
    }

    #[test]
    fn non_unimodular_rejected() {
        let k = f(2);
        let m = PolyMatrix::from_rows(vec![
            vec![Poly::one(), Poly::zero()],
            vec![Poly::zero(), poly(&k, &[1, 1])],
        ])
        .unwrap();
        assert!(matches!(m.inverse(&k), Err(Error::NotATransitionMatrix(_))));
    }

    #[test]
    fn smith_of_diagonal_and_mixed() {
        let k = f(2);
        let x = Poly::x();
        let m = PolyMatrix::from_rows(vec![
            vec![x.mul(&x, &k), Poly::zero()],
            vec![Poly::zero(), x.clone()],
        ])
        .unwrap();
        let inv = smith_invariant_factors(&m, &k);
        assert_eq!(inv, vec![x.clone(), x.mul(&x, &k)]);
        let m2 = PolyMatrix::from_rows(vec![
            vec![poly(&k, &[1, 1]), Poly::zero()],
            vec![Poly::zero(), x.clone()],
        ])
        .unwrap();
        // gcd 1, product x(x+1)
        assert_eq!(smith_invariant_factors(&m2, &k), vec![Poly::one(), x.mul(&poly(&k, &[1, 1]), &k)]);
    }

    #[test]
    fn smith_rank_deficient() {
        let k = f(3);
        let a = poly(&k, &[1, 1]);
        let m = PolyMatrix::from_rows(vec![
            vec![a.clone(), a.mul(&a, &k)],
            vec![a.mul(&a, &k), a.mul(&a, &k).mul(&a, &k)],
        ])
        .unwrap();
        assert_eq!(smith_invariant_factors(&m, &k).len(), 1);
    }
}
