//! Divided-power differential operators `sum_k f_k(x) D_k` on the affine line.

use std::collections::BTreeMap;

use crate::arith::{base_p_digits, binom_mod_p, multinomial_unit};
use crate::error::{Error, Result};
use crate::field::{Fe, Field};
use crate::laurent::LaurentPoly;
use crate::poly::Poly;

/// An operator in normal form: polynomial coefficients to the left of `D_k`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DividedOperator {
    terms: BTreeMap<usize, Poly>,
}

impl DividedOperator {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn identity() -> Self {
        Self::d(0)
    }

    /// The basis operator `D_k`.
    pub fn d(k: usize) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(k, Poly::one());
        DividedOperator { terms }
    }

    /// Multiplication by `g`.
    pub fn mult(g: Poly) -> Self {
        Self::from_terms([(0, g)])
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (usize, Poly)>) -> Self {
        let mut out = BTreeMap::new();
        for (k, g) in terms {
            if !g.is_zero() {
                out.insert(k, g);
            }
        }
        DividedOperator { terms: out }
    }

    pub fn terms(&self) -> impl Iterator<Item = (usize, &Poly)> {
        self.terms.iter().map(|(&k, g)| (k, g))
    }

    pub fn coeff(&self, k: usize) -> Poly {
        self.terms.get(&k).cloned().unwrap_or_else(Poly::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Largest `k` with a nonzero coefficient; `None` for the zero operator.
    pub fn order(&self) -> Option<usize> {
        self.terms.keys().next_back().copied()
    }

    fn add_term(&mut self, k: usize, g: &Poly, f: &Field) {
        if g.is_zero() {
            return;
        }
        let sum = match self.terms.get(&k) {
            Some(h) => h.add(g, f),
            None => g.clone(),
        };
        if sum.is_zero() {
            self.terms.remove(&k);
        } else {
            self.terms.insert(k, sum);
        }
    }

    pub fn add(&self, other: &Self, f: &Field) -> Self {
        let mut out = self.clone();
        for (k, g) in other.terms() {
            out.add_term(k, g, f);
        }
        out
    }

    pub fn sub(&self, other: &Self, f: &Field) -> Self {
        let mut out = self.clone();
        for (k, g) in other.terms() {
            out.add_term(k, &g.neg(f), f);
        }
        out
    }

    pub fn scale(&self, a: Fe, f: &Field) -> Self {
        Self::from_terms(self.terms.iter().map(|(&k, g)| (k, g.scale(a, f))))
    }

    /// Apply to a polynomial.
    pub fn apply(&self, g: &Poly, f: &Field) -> Poly {
        let mut out = Poly::zero();
        for (&k, c) in &self.terms {
            let dg = g.divided_derivative(k, f);
            if !dg.is_zero() {
                out = out.add(&c.mul(&dg, f), f);
            }
        }
        out
    }

    /// Apply to a Laurent polynomial, which must have no negative exponents.
    pub fn apply_laurent(&self, g: &LaurentPoly, f: &Field) -> Result<Poly> {
        let p = g.to_poly().ok_or_else(|| {
            Error::InvalidInput("operators act on polynomials; input has negative exponents".into())
        })?;
        Ok(self.apply(&p, f))
    }

    /// Normal form of `self ∘ other`. Uses `D_k ∘ g = sum_{i+j=k} D_i(g) D_j`
    /// and `D_j D_l = C(j+l, j) D_{j+l}`.
    pub fn compose(&self, other: &Self, f: &Field) -> Self {
        let p = f.p();
        let mut out = DividedOperator::zero();
        for (&k, fk) in &self.terms {
            for (&l, gl) in &other.terms {
                for i in 0..=k {
                    let dg = gl.divided_derivative(i, f);
                    if dg.is_zero() {
                        continue;
                    }
                    let j = k - i;
                    let b = binom_mod_p((j + l) as u64, j as u64, p);
                    if b == 0 {
                        continue;
                    }
                    let c = fk.mul(&dg, f).scale(f.from_int(b as i64), f);
                    out.add_term(j + l, &c, f);
                }
            }
        }
        out
    }

    /// [`compose`](Self::compose), then check the result against applying
    /// both factors to every monomial `x^m`, `m <= test_degree`. The default
    /// test degree is `2 * (order(a) + order(b))`.
    pub fn compose_verified(&self, other: &Self, f: &Field, test_degree: Option<usize>) -> Result<Self> {
        let c = self.compose(other, f);
        let deg = test_degree.unwrap_or(2 * (self.order().unwrap_or(0) + other.order().unwrap_or(0)));
        for m in 0..=deg {
            let xm = Poly::monomial(Fe::ONE, m);
            let lhs = c.apply(&xm, f);
            let rhs = self.apply(&other.apply(&xm, f), f);
            if lhs != rhs {
                return Err(Error::CompositionMismatch {
                    degree: m as u64,
                    detail: "composed operator disagrees with successive application".into(),
                });
            }
        }
        Ok(c)
    }

    /// `D(1) = 0`, i.e. no order-0 part.
    pub fn kills_constants(&self) -> bool {
        self.coeff(0).is_zero()
    }

    pub fn render(&self, f: &Field) -> String {
        if self.is_zero() {
            return "0".into();
        }
        self.terms
            .iter()
            .rev()
            .map(|(k, g)| format!("({})·D_{k}", LaurentPoly::from_poly(g).render(f)))
            .collect::<Vec<_>>()
            .join(" + ")
    }
}

/// `D_{p^0}^{c_0} ∘ ... ∘ D_{p^m}^{c_m} = unit · D_j`, where `j = sum c_m p^m`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratorProduct {
    /// `(m, c_m)` for each nonzero base-`p` digit of `j`.
    pub factors: Vec<(u32, u64)>,
    /// The nonzero scalar `unit` (an element of the prime field).
    pub unit: u64,
}

impl GeneratorProduct {
    /// `D_j` rebuilt as `unit^{-1}` times the product of generators.
    pub fn recompose(&self, f: &Field) -> DividedOperator {
        let p = f.p() as usize;
        let mut acc = DividedOperator::identity();
        for &(m, c) in &self.factors {
            let g = DividedOperator::d(p.pow(m));
            for _ in 0..c {
                acc = acc.compose(&g, f);
            }
        }
        let inv = f.inv(f.from_int(self.unit as i64)).expect("unit is nonzero");
        acc.scale(inv, f)
    }
}

pub fn decompose_generator_product(j: u64, p: u64) -> GeneratorProduct {
    let factors = base_p_digits(j, p)
        .into_iter()
        .enumerate()
        .filter(|&(_, d)| d > 0)
        .map(|(m, d)| (m as u32, d))
        .collect();
    GeneratorProduct { factors, unit: multinomial_unit(j, p) }
}
