//! D-module cohomology from towers of coherent cohomology:
//! `0 -> R^1 lim H^{i-1} -> H^i_D -> lim H^i -> 0`.

use crate::bundle_p1::{fdiv_rigidity, h0_space, h1_space, FdivTowerP1};
use crate::dmod::{affine_witness_module, horizontal_sections_dim, DModulePresentation};
use crate::error::{Error, Result};
use crate::field::{Fe, Field};
use crate::laurent::LaurentMatrix;
use crate::linalg::Mat;
use crate::poly::Poly;
use crate::towers::{lim_dim, r1lim_dim, MlReport, SemilinearMap, TwistedTower};

/// Highest D-module cohomological degree reported by default.
pub const DEFAULT_DEGREE_CAP: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    P1Tower,
    AffineTruncation,
    UserSupplied,
}

impl Provenance {
    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::P1Tower => "built-from-p1-tower",
            Provenance::AffineTruncation => "built-from-affine-truncation",
            Provenance::UserSupplied => "user-supplied",
        }
    }
}

/// `towers[i]` stands for `{H^i(E_n) twisted by F^n}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CohomologyTowerSet {
    pub towers: Vec<TwistedTower>,
    pub provenance: Provenance,
}

fn zero_tower(like_periodic: Option<usize>, levels: usize) -> TwistedTower {
    match like_periodic {
        Some(m) => TwistedTower::periodic(vec![0; m], vec![SemilinearMap::new(Mat::zeros(0, 0), 1); m], m),
        None => TwistedTower::truncated(vec![0; levels], vec![SemilinearMap::new(Mat::zeros(0, 0), 1); levels - 1]),
    }
    .expect("zero tower is well formed")
}

fn constant_matrix(m: &LaurentMatrix) -> Option<Mat> {
    let mut out = Mat::zeros(m.rows(), m.cols());
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            let e = m.get(i, j);
            if e.terms().any(|(k, _)| k != 0) {
                return None;
            }
            out.set(i, j, e.coeff(0));
        }
    }
    Some(out)
}

fn lift_constant(c: &Mat) -> LaurentMatrix {
    let mut out = LaurentMatrix::zeros(c.rows(), c.cols());
    for i in 0..c.rows() {
        for j in 0..c.cols() {
            out.set(i, j, crate::laurent::LaurentPoly::constant(c.get(i, j)));
        }
    }
    out
}

/// Towers for degrees `0..=cap`. Periodic input: each level is trivial, its
/// sections are the columns of the Birkhoff factor `U_i`, and the transition
/// `c -> C_i F^*(U_{i+1} c)` reads `c -> M_i Frob(c)` with the constant matrix
/// `M_i = U_i^{-1} C_i F^*(U_{i+1})`. Truncated input uses explicit Čech bases
/// and the literal pullback.
pub fn build_towers_p1(tower: &FdivTowerP1, cap: usize, f: &Field) -> Result<CohomologyTowerSet> {
    let mut towers = Vec::new();
    match tower {
        FdivTowerP1::Periodic { bundles, isos } => {
            let rig = fdiv_rigidity(tower, f)?;
            let m = bundles.len();
            let r = tower.rank();
            let mut maps = Vec::with_capacity(m);
            for i in 0..m {
                let ui = &rig.trivializations[i].u;
                let uj = &rig.trivializations[(i + 1) % m].u;
                let prod = ui.inverse(f)?.mul(&lift_constant(&isos[i]), f).mul(&uj.substitute_power(f, true), f);
                let mi = constant_matrix(&prod).ok_or_else(|| {
                    Error::InvalidTower(format!("isomorphism {i} does not act on sections by a constant matrix"))
                })?;
                maps.push(SemilinearMap::new(mi, 1));
            }
            towers.push(TwistedTower::periodic(vec![r; m], maps, m)?);
            for b in bundles {
                let h1 = h1_space(b, f)?;
                if h1.dim() != 0 {
                    return Err(Error::InvalidTower("periodic level has nonzero h^1".into()));
                }
            }
            while towers.len() <= cap {
                towers.push(zero_tower(Some(m), 0));
            }
        }
        FdivTowerP1::Truncated { bundles } => {
            let levels = bundles.len();
            let h0: Vec<_> = bundles.iter().map(|b| h0_space(b, f)).collect::<Result<_>>()?;
            let h1: Vec<_> = bundles.iter().map(|b| h1_space(b, f)).collect::<Result<_>>()?;
            let mut maps0 = Vec::new();
            let mut maps1 = Vec::new();
            for n in 0..levels - 1 {
                let cols: Vec<Vec<Fe>> = h0[n + 1]
                    .basis()
                    .iter()
                    .map(|s| {
                        let pulled: Vec<Poly> = s.iter().map(|a| a.frobenius_power(1, f)).collect();
                        h0[n].coordinates(&pulled).ok_or_else(|| Error::InvalidTower("pulled-back section left the window".into()))
                    })
                    .collect::<Result<_>>()?;
                maps0.push(SemilinearMap::new(Mat::from_columns(h0[n].dim(), &cols), 1));
                let cols: Vec<Vec<Fe>> = (0..h1[n + 1].dim())
                    .map(|k| {
                        let s = h1[n + 1].basis_section(k, f);
                        let pulled: Vec<_> = s.iter().map(|a| a.frobenius_pullback(1, f)).collect();
                        h1[n].class(&pulled, f)
                    })
                    .collect();
                maps1.push(SemilinearMap::new(Mat::from_columns(h1[n].dim(), &cols), 1));
            }
            towers.push(TwistedTower::truncated(h0.iter().map(|h| h.dim()).collect(), maps0)?);
            towers.push(TwistedTower::truncated(h1.iter().map(|h| h.dim()).collect(), maps1)?);
            while towers.len() <= cap {
                towers.push(zero_tower(None, levels));
            }
            towers.truncate(cap + 1);
        }
    }
    Ok(CohomologyTowerSet { towers, provenance: Provenance::P1Tower })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DcohDegree {
    pub degree: usize,
    pub lim: usize,
    pub r1lim: usize,
    pub dim: usize,
    pub exact: bool,
    /// Mittag-Leffler certificate for the tower one degree down.
    pub certificate: Option<MlReport>,
}

/// `dim H^i_D = dim R^1 lim(tower_{i-1}) + dim lim(tower_i)`.
pub fn dcoh_dims(set: &CohomologyTowerSet, f: &Field) -> Result<Vec<DcohDegree>> {
    let mut out = Vec::new();
    for (i, t) in set.towers.iter().enumerate() {
        let l = lim_dim(t, f)?;
        let (r1, cert, exact_below) = if i == 0 {
            (0, None, true)
        } else {
            let below = &set.towers[i - 1];
            let r = r1lim_dim(below, f)?;
            (r.dim, Some(r.certificate), below.is_exact())
        };
        out.push(DcohDegree { degree: i, lim: l.dim, r1lim: r1, dim: r1 + l.dim, exact: l.exact && exact_below, certificate: cert });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AffineTruncation {
    pub degree: usize,
    /// Dimension of the degree-bounded horizontal sections.
    pub h0: usize,
    /// False if the truncation reached past the level bound of the module.
    pub h0_complete: bool,
    /// Lower-bound witness for the degree-1 term.
    pub witness: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FinitenessReport {
    P1 { rank: usize, degrees: Vec<DcohDegree> },
    Affine { truncations: Vec<AffineTruncation>, growth_observed: bool },
}

impl FinitenessReport {
    pub fn label(&self) -> String {
        match self {
            FinitenessReport::P1 { degrees, .. } => {
                if degrees.iter().all(|d| d.exact) {
                    "finite dimensions with Mittag-Leffler certificates".into()
                } else {
                    "finite dimensions; truncation only".into()
                }
            }
            FinitenessReport::Affine { truncations, growth_observed } => {
                let top = truncations.last().map_or(0, |t| t.degree);
                if *growth_observed {
                    format!("lower-bound witnesses, unbounded growth observed through degree {top}")
                } else {
                    format!("lower-bound witnesses, no growth observed through degree {top}")
                }
            }
        }
    }
}

pub fn finiteness_report_p1(tower: &FdivTowerP1, cap: usize, f: &Field) -> Result<FinitenessReport> {
    let set = build_towers_p1(tower, cap, f)?;
    Ok(FinitenessReport::P1 { rank: tower.rank(), degrees: dcoh_dims(&set, f)? })
}

pub fn finiteness_report_affine(m: &DModulePresentation, truncations: &[usize]) -> Result<FinitenessReport> {
    if truncations.is_empty() {
        return Err(Error::InvalidInput("no truncation degrees given".into()));
    }
    let mut rows = Vec::new();
    for &d in truncations {
        let (h0, complete) = horizontal_sections_dim(m, d);
        rows.push(AffineTruncation { degree: d, h0, h0_complete: complete, witness: affine_witness_module(m, d) });
    }
    let growth_observed = rows.windows(2).all(|w| w[1].witness > w[0].witness) && rows.len() > 1;
    Ok(FinitenessReport::Affine { truncations: rows, growth_observed })
}
