//! F-divided towers on the projective line: truncated (`E_n = F^* E_{n+1}`
//! literally) or periodic (`B_i ≅ F^* B_{i+1 mod m}` through constant matrices).

use super::birkhoff::{birkhoff_factor, BirkhoffFactors};
use super::cech::cech_h;
use super::{BundleP1, SplittingType};
use crate::error::{Error, Result};
use crate::field::Field;
use crate::linalg::Mat;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FdivTowerP1 {
    /// `bundles[n] = E_n` for `n = 0..=N`.
    Truncated { bundles: Vec<BundleP1> },
    /// `isos[i]` identifies `F^* B_{i+1 mod m}` with `B_i`: `T_i = C_i · F^*T_{i+1} · C_i^{-1}`.
    Periodic { bundles: Vec<BundleP1>, isos: Vec<Mat> },
}

impl FdivTowerP1 {
    /// `E_n = F^{*(N-n)} E_N` for `n = 0..=N`.
    pub fn from_top(top: BundleP1, depth: usize, f: &Field) -> FdivTowerP1 {
        let mut bundles = vec![top];
        for _ in 0..depth {
            let next = bundles.last().unwrap().frobenius_pullback(f);
            bundles.push(next);
        }
        bundles.reverse();
        FdivTowerP1::Truncated { bundles }
    }

    pub fn truncated(bundles: Vec<BundleP1>, f: &Field) -> Result<FdivTowerP1> {
        if bundles.is_empty() {
            return Err(Error::InvalidTower("a tower needs at least one level".into()));
        }
        for n in 0..bundles.len() - 1 {
            if bundles[n].transition() != bundles[n + 1].frobenius_pullback(f).transition() {
                return Err(Error::InvalidTower(format!("level {n} is not the Frobenius pullback of level {}", n + 1)));
            }
        }
        Ok(FdivTowerP1::Truncated { bundles })
    }

    pub fn periodic(bundles: Vec<BundleP1>, isos: Vec<Mat>, f: &Field) -> Result<FdivTowerP1> {
        let m = bundles.len();
        if m == 0 || isos.len() != m {
            return Err(Error::InvalidTower(format!("{m} bundles need {m} isomorphisms, got {}", isos.len())));
        }
        for i in 0..m {
            let c = &isos[i];
            let r = bundles[i].rank();
            if c.rows() != r || c.cols() != r || bundles[(i + 1) % m].rank() != r {
                return Err(Error::InvalidTower(format!("isomorphism {i} has the wrong shape")));
            }
            if c.inverse(f).is_none() {
                return Err(Error::InvalidTower(format!("isomorphism {i} is singular")));
            }
            let pulled = bundles[(i + 1) % m].frobenius_pullback(f);
            if pulled.conjugate(c, f)?.transition() != bundles[i].transition() {
                return Err(Error::InvalidTower(format!(
                    "isomorphism {i} does not carry F^*B_{} onto B_{i}",
                    (i + 1) % m
                )));
            }
        }
        Ok(FdivTowerP1::Periodic { bundles, isos })
    }

    /// No compatibility checks; for exercising the report paths on bad input.
    pub fn periodic_unchecked(bundles: Vec<BundleP1>, isos: Vec<Mat>) -> FdivTowerP1 {
        FdivTowerP1::Periodic { bundles, isos }
    }

    pub fn bundles(&self) -> &[BundleP1] {
        match self {
            FdivTowerP1::Truncated { bundles } | FdivTowerP1::Periodic { bundles, .. } => bundles,
        }
    }

    pub fn is_periodic(&self) -> bool {
        matches!(self, FdivTowerP1::Periodic { .. })
    }

    pub fn rank(&self) -> usize {
        self.bundles()[0].rank()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct H0Report {
    pub values: Vec<usize>,
    pub passed: bool,
}

/// `h^0(E_0) >= h^0(E_1) >= ...`; periodic towers must be constant.
pub fn check_h0_decreasing(tower: &FdivTowerP1, f: &Field) -> Result<H0Report> {
    let values: Vec<usize> = tower.bundles().iter().map(|b| cech_h(b, 0, 0, f)).collect::<Result<_>>()?;
    let passed = if tower.is_periodic() {
        values.windows(2).all(|w| w[0] == w[1])
    } else {
        values.windows(2).all(|w| w[0] >= w[1])
    };
    Ok(H0Report { values, passed })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DegreeReport {
    pub degrees: Vec<i64>,
    /// `p^N`, which must divide `deg E_0` (truncated towers).
    pub forced_divisor: Option<i64>,
    pub passed: bool,
}

pub fn check_numerical_triviality(tower: &FdivTowerP1, f: &Field) -> Result<DegreeReport> {
    let degrees: Vec<i64> = tower.bundles().iter().map(BundleP1::degree).collect();
    let p = f.p() as i64;
    match tower {
        FdivTowerP1::Truncated { .. } => {
            let steps_ok = degrees.windows(2).all(|w| w[0] == p * w[1]);
            let divisor = p.pow(degrees.len() as u32 - 1);
            let passed = steps_ok && degrees[0] % divisor == 0;
            Ok(DegreeReport { degrees, forced_divisor: Some(divisor), passed })
        }
        FdivTowerP1::Periodic { .. } => {
            if let Some(i) = degrees.iter().position(|&d| d != 0) {
                return Err(Error::InvalidTower(format!(
                    "periodic level {i} has degree {}; only degree 0 is infinitely p-divisible",
                    degrees[i]
                )));
            }
            Ok(DegreeReport { degrees, forced_divisor: None, passed: true })
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RigidityReport {
    pub splittings: Vec<SplittingType>,
    /// `p^N` dividing every exponent of `E_0` (truncated towers).
    pub divisor: Option<i64>,
    /// Trivializations `T_i = U_i V_i` (periodic towers).
    pub trivializations: Vec<BirkhoffFactors>,
}

pub fn fdiv_rigidity(tower: &FdivTowerP1, f: &Field) -> Result<RigidityReport> {
    let factors: Vec<BirkhoffFactors> = tower.bundles().iter().map(|b| birkhoff_factor(b, f)).collect::<Result<_>>()?;
    let splittings: Vec<SplittingType> = factors.iter().map(BirkhoffFactors::splitting).collect();
    match tower {
        FdivTowerP1::Truncated { bundles } => {
            let divisor = (f.p() as i64).pow(bundles.len() as u32 - 1);
            if let Some(a) = splittings[0].exponents().iter().find(|&&a| a % divisor != 0) {
                return Err(Error::InvalidTower(format!("exponent {a} of E_0 is not divisible by {divisor}")));
            }
            Ok(RigidityReport { splittings, divisor: Some(divisor), trivializations: vec![] })
        }
        FdivTowerP1::Periodic { .. } => {
            if let Some(i) = splittings.iter().position(|s| !s.is_trivial()) {
                return Err(Error::InvalidTower(format!("periodic level {i} splits as {}", splittings[i])));
            }
            Ok(RigidityReport { splittings, divisor: None, trivializations: factors })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn k(p: u64) -> Field {
        Field::prime(p).unwrap()
    }

    #[test]
    fn pullback_tower_h0_values() {
        let f = k(2);
        let top = BundleP1::split(&[-1, 1], &f).unwrap();
        let t = FdivTowerP1::from_top(top, 2, &f);
        let rep = check_h0_decreasing(&t, &f).unwrap();
        assert_eq!(rep.values, vec![5, 3, 2]);
        assert!(rep.passed);
        let deg = check_numerical_triviality(&t, &f).unwrap();
        assert!(deg.passed);
        assert_eq!(deg.degrees, vec![0, 0, 0]);
        let rig = fdiv_rigidity(&t, &f).unwrap();
        assert_eq!(rig.splittings[0].exponents(), &[4, -4]);
    }

    #[test]
    fn line_bundle_tower() {
        let f = k(2);
        let t = FdivTowerP1::from_top(BundleP1::split(&[1], &f).unwrap(), 2, &f);
        let rig = fdiv_rigidity(&t, &f).unwrap();
        assert_eq!(rig.splittings[0].exponents(), &[4]);
        assert_eq!(rig.divisor, Some(4));
        let single = FdivTowerP1::truncated(vec![BundleP1::split(&[3], &f).unwrap()], &f).unwrap();
        assert!(check_h0_decreasing(&single, &f).unwrap().passed);
    }

    #[test]
    fn periodic_trivial_and_rejected() {
        let f = k(3);
        let triv = BundleP1::trivial(2, &f).unwrap();
        let t = FdivTowerP1::periodic(vec![triv.clone()], vec![Mat::identity(2)], &f).unwrap();
        assert!(check_numerical_triviality(&t, &f).unwrap().passed);
        assert!(check_h0_decreasing(&t, &f).unwrap().passed);
        assert_eq!(fdiv_rigidity(&t, &f).unwrap().trivializations.len(), 1);

        let o1 = BundleP1::split(&[1], &f).unwrap();
        assert!(matches!(FdivTowerP1::periodic(vec![o1.clone()], vec![Mat::identity(1)], &f), Err(Error::InvalidTower(_))));
        let bad = FdivTowerP1::periodic_unchecked(vec![o1], vec![Mat::identity(1)]);
        assert!(matches!(check_numerical_triviality(&bad, &f), Err(Error::InvalidTower(_))));
        assert!(matches!(fdiv_rigidity(&bad, &f), Err(Error::InvalidTower(_))));
        let split = BundleP1::split(&[1, -1], &f).unwrap();
        let bad = FdivTowerP1::periodic_unchecked(vec![split], vec![Mat::identity(2)]);
        assert!(matches!(fdiv_rigidity(&bad, &f), Err(Error::InvalidTower(_))));
    }

    #[test]
    fn truncated_rejects_non_pullbacks() {
        let f = k(2);
        let a = BundleP1::split(&[1], &f).unwrap();
        let b = BundleP1::split(&[1], &f).unwrap();
        assert!(matches!(FdivTowerP1::truncated(vec![a, b], &f), Err(Error::InvalidTower(_))));
    }
}
