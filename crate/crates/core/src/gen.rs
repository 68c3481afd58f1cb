//! Seeded random instances: unimodular tower matrices, Laurent transition
//! matrices, twisted towers.

use rand::Rng;

use crate::bundle_p1::BundleP1;
use crate::field::{Fe, Field};
use crate::laurent::{LaurentMatrix, LaurentPoly};
use crate::linalg::Mat;
use crate::poly::{Poly, PolyMatrix};
use crate::towers::{SemilinearMap, TwistedTower};

pub fn random_element(rng: &mut impl Rng, f: &Field) -> Fe {
    f.from_index(rng.gen_range(0..f.order() as u32)).unwrap()
}

pub fn random_unit(rng: &mut impl Rng, f: &Field) -> Fe {
    f.from_index(rng.gen_range(1..f.order() as u32)).unwrap()
}

pub fn random_poly(rng: &mut impl Rng, max_deg: usize, f: &Field) -> Poly {
    Poly::from_coeffs((0..=max_deg).map(|_| random_element(rng, f)).collect())
}

/// Product of a diagonal of units and `steps` elementary matrices with entries
/// of degree `<= max_deg`; the determinant is a nonzero constant.
pub fn random_unimodular(rng: &mut impl Rng, r: usize, steps: usize, max_deg: usize, f: &Field) -> PolyMatrix {
    let mut m = PolyMatrix::zeros(r, r);
    for i in 0..r {
        m.set(i, i, Poly::constant(random_unit(rng, f)));
    }
    if r < 2 {
        return m;
    }
    for _ in 0..steps {
        let i = rng.gen_range(0..r);
        let mut j = rng.gen_range(0..r - 1);
        if j >= i {
            j += 1;
        }
        let mut e = PolyMatrix::identity(r);
        e.set(i, j, random_poly(rng, max_deg, f));
        m = m.mul(&e, f);
    }
    m
}

fn random_laurent(rng: &mut impl Rng, lo: i64, hi: i64, f: &Field) -> LaurentPoly {
    let terms = rng.gen_range(0..=2);
    LaurentPoly::from_terms((0..terms).map(|_| (rng.gen_range(lo..=hi), random_element(rng, f))), f)
}

/// `diag(x^{a_i})` with `a_i` in `[lo, hi]`, conjugated by random elementary
/// Laurent matrices on both sides so the splitting is hidden.
pub fn random_transition(rng: &mut impl Rng, r: usize, lo: i64, hi: i64, steps: usize, f: &Field) -> LaurentMatrix {
    let exps: Vec<i64> = (0..r).map(|_| rng.gen_range(lo..=hi)).collect();
    let mut t = LaurentMatrix::diagonal_monomials(&exps).scale(random_unit(rng, f), f);
    if r < 2 {
        return t;
    }
    for _ in 0..steps {
        let i = rng.gen_range(0..r);
        let mut j = rng.gen_range(0..r - 1);
        if j >= i {
            j += 1;
        }
        let mut e = LaurentMatrix::identity(r);
        e.set(i, j, random_laurent(rng, lo, hi, f));
        t = if rng.gen_bool(0.5) { e.mul(&t, f) } else { t.mul(&e, f) };
    }
    t
}

pub fn random_bundle(rng: &mut impl Rng, r: usize, lo: i64, hi: i64, f: &Field) -> BundleP1 {
    BundleP1::new(random_transition(rng, r, lo, hi, 2, f), f).expect("elementary products are invertible")
}

pub fn random_mat(rng: &mut impl Rng, rows: usize, cols: usize, f: &Field) -> Mat {
    let mut m = Mat::zeros(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            // bias towards zero so that low ranks occur
            if rng.gen_bool(0.6) {
                m.set(i, j, random_element(rng, f));
            }
        }
    }
    m
}

/// Random truncated or periodic tower with dimensions `<= max_dim`.
pub fn random_twisted_tower(rng: &mut impl Rng, max_dim: usize, f: &Field) -> TwistedTower {
    let periodic = rng.gen_bool(0.5);
    let len = rng.gen_range(1..=4);
    let dims: Vec<usize> = (0..len + usize::from(!periodic)).map(|_| rng.gen_range(0..=max_dim)).collect();
    if periodic {
        let period = rng.gen_range(1..=len);
        let maps = (0..len)
            .map(|i| {
                let src = if i + 1 < len { dims[i + 1] } else { dims[len - period] };
                SemilinearMap::new(random_mat(rng, dims[i], src, f), rng.gen_range(0..=1))
            })
            .collect();
        TwistedTower::periodic(dims, maps, period).expect("shapes agree")
    } else {
        let maps = (0..len)
            .map(|i| SemilinearMap::new(random_mat(rng, dims[i], dims[i + 1], f), rng.gen_range(0..=1)))
            .collect();
        TwistedTower::truncated(dims, maps).expect("shapes agree")
    }
}

/// Random invertible constant matrix.
pub fn random_invertible(rng: &mut impl Rng, r: usize, f: &Field) -> Mat {
    loop {
        let mut m = Mat::zeros(r, r);
        for i in 0..r {
            for j in 0..r {
                m.set(i, j, random_element(rng, f));
            }
        }
        if m.inverse(f).is_some() {
            return m;
        }
    }
}

/// Degree-zero bundle with exponents in `[-bound, bound]` and a hidden splitting.
pub fn random_degree_zero_bundle(rng: &mut impl Rng, r: usize, bound: i64, f: &Field) -> BundleP1 {
    let mut exps: Vec<i64> = (0..r).map(|_| rng.gen_range(-bound..=bound)).collect();
    let total: i64 = exps.iter().sum();
    let mut excess = total;
    for a in exps.iter_mut() {
        let room = if excess > 0 { (*a + bound).min(excess) } else { (*a - bound).max(excess) };
        *a -= room;
        excess -= room;
    }
    let base = LaurentMatrix::diagonal_monomials(&exps);
    let mut left = LaurentMatrix::identity(r);
    let mut right = LaurentMatrix::identity(r);
    if r >= 2 {
        let i = rng.gen_range(0..r);
        let j = (i + 1 + rng.gen_range(0..r - 1)) % r;
        left.set(i, j, random_laurent(rng, 0, 2, f));
        right.set(j, i, random_laurent(rng, -2, 0, f));
    }
    BundleP1::new(left.mul(&base, f).mul(&right, f), f).expect("unimodular factors")
}

/// Periodic tower of constant transitions `M_i` with isomorphisms
/// `M_i = C_i Frob(M_{i+1}) C_i^{-1}`. `M_0` has prime-field entries so the
/// cycle closes: with `S_m = I`, `S_i = C_i Frob(S_{i+1})` and
/// `M_i = S_i M_0 S_i^{-1}`, the last isomorphism is `C_0 = M_0^k Frob(S_1)^{-1}`.
pub fn random_periodic_p1_tower(rng: &mut impl Rng, r: usize, period: usize, f: &Field) -> crate::bundle_p1::FdivTowerP1 {
    let prime = Field::prime(f.p()).unwrap();
    let small = random_invertible(rng, r, &prime);
    let mut m0 = Mat::zeros(r, r);
    for i in 0..r {
        for j in 0..r {
            m0.set(i, j, f.from_int(small.get(i, j).index() as i64));
        }
    }
    let mut isos = vec![Mat::identity(r); period];
    let mut s = Mat::identity(r);
    let mut ms = vec![m0.clone(); period];
    for i in (1..period).rev() {
        isos[i] = random_invertible(rng, r, f);
        s = isos[i].mul(&s.frobenius(1, f), f);
        ms[i] = s.mul(&m0, f).mul(&s.inverse(f).unwrap(), f);
    }
    let mut k = Mat::identity(r);
    for _ in 0..rng.gen_range(0..3) {
        k = k.mul(&m0, f);
    }
    isos[0] = k.mul(&s.frobenius(1, f).inverse(f).unwrap(), f);
    let bundles = ms
        .iter()
        .map(|m| {
            let mut t = LaurentMatrix::zeros(r, r);
            for i in 0..r {
                for j in 0..r {
                    t.set(i, j, LaurentPoly::constant(m.get(i, j)));
                }
            }
            BundleP1::new(t, f).unwrap()
        })
        .collect();
    crate::bundle_p1::FdivTowerP1::periodic(bundles, isos, f).expect("constructed to be periodic")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn unimodular_has_constant_det() {
        let f = Field::prime(3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            let m = random_unimodular(&mut rng, 2, 2, 1, &f);
            let d = m.det(&f);
            assert!(d.is_constant() && !d.is_zero());
        }
    }

    #[test]
    fn random_towers_are_well_formed() {
        let f = Field::prime(2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..50 {
            let t = random_twisted_tower(&mut rng, 4, &f);
            assert!(t.max_dim() <= 4);
        }
    }

    #[test]
    fn periodic_and_degree_zero_generators() {
        let f = Field::new(crate::field::FieldSpec::extension(2, vec![1, 1, 1])).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for period in 1..=3 {
            let t = random_periodic_p1_tower(&mut rng, 2, period, &f);
            assert_eq!(t.bundles().len(), period);
        }
        for _ in 0..20 {
            assert_eq!(random_degree_zero_bundle(&mut rng, 3, 3, &f).degree(), 0);
        }
    }
}
