//! Birkhoff factorization `T = U · diag(x^{a_i}) · V`, with `U` invertible over
//! `k[x]` and `V` invertible over `k[1/x]`, and the cohomological oracle that
//! reads the same exponents off `h^0` of twists.

use super::cech::cech_h;
use super::{BundleP1, SplittingType};
use crate::error::{Error, Result};
use crate::field::{Fe, Field};
use crate::laurent::{LaurentMatrix, LaurentPoly};
use crate::linalg::Mat;

/// Iteration cap for the row reduction.
pub const BIRKHOFF_CAP: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BirkhoffFactors {
    pub u: LaurentMatrix,
    /// Diagonal exponents, aligned with the rows of `v`.
    pub exponents: Vec<i64>,
    pub v: LaurentMatrix,
}

impl BirkhoffFactors {
    pub fn splitting(&self) -> SplittingType {
        SplittingType::new(self.exponents.clone())
    }

    pub fn product(&self, f: &Field) -> LaurentMatrix {
        self.u.mul(&LaurentMatrix::diagonal_monomials(&self.exponents), f).mul(&self.v, f)
    }
}

fn row_degree(m: &LaurentMatrix, i: usize) -> i64 {
    m.row(i).iter().filter_map(|a| a.max_exp()).max().expect("invertible matrix has no zero row")
}

/// Row-reduce `x^c T` over `k[x]` until its leading row coefficients are
/// nonsingular. Each step lowers the degree of the highest-degree row in the
/// support of a dependency among leading rows (ties: lowest index).
pub fn birkhoff_factor(e: &BundleP1, f: &Field) -> Result<BirkhoffFactors> {
    let t = e.transition();
    let r = t.rows();
    let c = -t.min_exp().unwrap_or(0).min(0);
    let mut p = t.shift(c);
    let mut u = LaurentMatrix::identity(r);
    for _ in 0..BIRKHOFF_CAP {
        let deg: Vec<i64> = (0..r).map(|i| row_degree(&p, i)).collect();
        let mut lead = Mat::zeros(r, r);
        for i in 0..r {
            for j in 0..r {
                lead.set(i, j, p.get(i, j).coeff(deg[i]));
            }
        }
        let deps = lead.transpose().nullspace(f);
        let Some(alpha) = deps.first() else {
            let exponents: Vec<i64> = deg.iter().map(|d| d - c).collect();
            let mut v = LaurentMatrix::zeros(r, r);
            for i in 0..r {
                for j in 0..r {
                    v.set(i, j, p.get(i, j).shift(-deg[i]));
                }
            }
            let out = BirkhoffFactors { u, exponents, v };
            if out.product(f) != *t {
                return Err(Error::FactorizationFailed { cap: BIRKHOFF_CAP });
            }
            return Ok(out);
        };
        let k = (0..r)
            .filter(|&i| !alpha[i].is_zero())
            .max_by(|&a, &b| deg[a].cmp(&deg[b]).then(b.cmp(&a)))
            .unwrap();
        let ak_inv = f.inv(alpha[k]).unwrap();
        // row_k += sum_i beta_i x^{deg_k - deg_i} row_i, and U absorbs the inverse
        let mut new_row: Vec<LaurentPoly> = p.row(k).to_vec();
        for i in (0..r).filter(|&i| i != k && !alpha[i].is_zero()) {
            let beta: Fe = f.mul(alpha[i], ak_inv);
            let sh = deg[k] - deg[i];
            for (j, slot) in new_row.iter_mut().enumerate() {
                *slot = slot.add(&p.get(i, j).scale(beta, f).shift(sh), f);
            }
            for row in 0..r {
                let delta = u.get(row, k).scale(f.neg(beta), f).shift(sh);
                let val = u.get(row, i).add(&delta, f);
                u.set(row, i, val);
            }
        }
        for (j, a) in new_row.into_iter().enumerate() {
            p.set(k, j, a);
        }
    }
    Err(Error::FactorizationFailed { cap: BIRKHOFF_CAP })
}

pub fn birkhoff_split(e: &BundleP1, f: &Field) -> Result<SplittingType> {
    Ok(birkhoff_factor(e, f)?.splitting())
}

/// Splitting type from the first differences of `t -> h^0(E(t))`, which count
/// `#{i : a_i >= -t}`. The window doubles until the count is 0 at the low end
/// and `r` at the high end.
pub fn splitting_from_h0(e: &BundleP1, f: &Field) -> Result<SplittingType> {
    let r = e.rank();
    let mut w = 1 + e.spread().max(e.transition().max_exp().unwrap_or(0).abs());
    loop {
        if w as usize > super::cech::WINDOW_CAP {
            return Err(Error::OracleDiverged { window: w });
        }
        let h: Vec<usize> = (-w - 1..=w).map(|t| cech_h(e, 0, t, f)).collect::<Result<_>>()?;
        let counts: Vec<usize> = h.windows(2).map(|p| p[1] - p[0]).collect();
        if counts.first() == Some(&0) && counts.last() == Some(&r) {
            // counts[k] belongs to t = -w + k and equals #{a_i >= -t}
            let mut exps = Vec::with_capacity(r);
            let mut prev = 0;
            for (k, &cnt) in counts.iter().enumerate() {
                let t = -w + k as i64;
                for _ in prev..cnt {
                    exps.push(-t);
                }
                prev = cnt;
            }
            return Ok(SplittingType::new(exps));
        }
        w *= 2;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn k(p: u64) -> Field {
        Field::prime(p).unwrap()
    }

    #[test]
    fn diagonal_and_unipotent() {
        let f = k(3);
        let d = BundleP1::split(&[2, -1], &f).unwrap();
        assert_eq!(birkhoff_split(&d, &f).unwrap().exponents(), &[2, -1]);
        assert_eq!(splitting_from_h0(&d, &f).unwrap().exponents(), &[2, -1]);

        let x = LaurentPoly::x_pow(1);
        let t = LaurentMatrix::from_rows(vec![vec![x.clone(), LaurentPoly::one()], vec![LaurentPoly::zero(), x]])
            .unwrap();
        let e = BundleP1::new(t.clone(), &f).unwrap();
        let fac = birkhoff_factor(&e, &f).unwrap();
        assert_eq!(fac.splitting().exponents(), &[1, 1]);
        assert_eq!(fac.product(&f), t);
        assert_eq!(splitting_from_h0(&e, &f).unwrap().exponents(), &[1, 1]);
    }

    #[test]
    fn hidden_splitting() {
        // degree 0 with a coupling entry; the splitting is O(2) + O(-2)
        let f = k(2);
        let t = LaurentMatrix::from_rows(vec![
            vec![LaurentPoly::x_pow(2), LaurentPoly::one()],
            vec![LaurentPoly::zero(), LaurentPoly::x_pow(-2)],
        ])
        .unwrap();
        let e = BundleP1::new(t.clone(), &f).unwrap();
        let fac = birkhoff_factor(&e, &f).unwrap();
        assert_eq!(fac.product(&f), t);
        assert_eq!(fac.splitting().exponents(), &[2, -2]);
        assert_eq!(fac.splitting(), splitting_from_h0(&e, &f).unwrap());
    }

    #[test]
    fn trivial_rank_three() {
        let f = k(5);
        let e = BundleP1::trivial(3, &f).unwrap();
        assert_eq!(splitting_from_h0(&e, &f).unwrap().exponents(), &[0, 0, 0]);
        assert_eq!(birkhoff_split(&e, &f).unwrap().exponents(), &[0, 0, 0]);
    }
}
