//! Inverse systems `... -> V_2 -> V_1 -> V_0` of finite-dimensional spaces
//! with Frobenius-semilinear transition maps.
//!
//! A map `(M, t)` sends `v` to `M · Frob^t(v)`. Frobenius is bijective on a
//! finite field, so images and preimages are computed by twisting a basis and
//! row reducing.

use crate::error::{Error, Result};
use crate::field::{Fe, Field};
use crate::linalg::{Mat, Subspace};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SemilinearMap {
    pub matrix: Mat,
    pub twist: i64,
}

impl SemilinearMap {
    pub fn new(matrix: Mat, twist: i64) -> Self {
        SemilinearMap { matrix, twist }
    }

    pub fn identity(n: usize) -> Self {
        SemilinearMap { matrix: Mat::identity(n), twist: 0 }
    }

    pub fn source_dim(&self) -> usize {
        self.matrix.cols()
    }

    pub fn target_dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn apply(&self, v: &[Fe], f: &Field) -> Vec<Fe> {
        let tv: Vec<Fe> = v.iter().map(|&a| f.frobenius(a, self.twist)).collect();
        self.matrix.mul_vec(&tv, f)
    }

    /// `self ∘ other` = `(M_1 · Frob^{t_1}(M_2), t_1 + t_2)`.
    pub fn compose(&self, other: &SemilinearMap, f: &Field) -> SemilinearMap {
        SemilinearMap {
            matrix: self.matrix.mul(&other.matrix.frobenius(self.twist, f), f),
            twist: self.twist + other.twist,
        }
    }

    pub fn image(&self, s: &Subspace, f: &Field) -> Subspace {
        s.semilinear_image(&self.matrix, self.twist, f)
    }

    /// Some `v` in `within` with `self(v) = w`.
    pub fn preimage_in(&self, w: &[Fe], within: &Subspace, f: &Field) -> Option<Vec<Fe>> {
        let basis = within.basis();
        let cols: Vec<Vec<Fe>> = basis.iter().map(|b| self.apply(b, f)).collect();
        let m = Mat::from_columns(self.target_dim(), &cols);
        let u = m.solve(w, f)?;
        // self is additive and semilinear: self(sum c_k b_k) = sum Frob^t(c_k) self(b_k)
        let mut v = vec![Fe::ZERO; self.source_dim()];
        for (uk, b) in u.iter().zip(&basis) {
            let c = f.frobenius(*uk, -self.twist);
            for (slot, &bi) in v.iter_mut().zip(b) {
                *slot = f.mul_add(c, bi, *slot);
            }
        }
        Some(v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TowerShape {
    /// Levels `0..=N`, nothing above `N`.
    Truncated,
    /// Levels `n >= preamble` repeat with the given period.
    Periodic { preamble: usize, period: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TwistedTower {
    dims: Vec<usize>,
    maps: Vec<SemilinearMap>,
    shape: TowerShape,
}

impl TwistedTower {
    /// `dims[n] = dim V_n` for `n = 0..=N` and `maps[n]: V_{n+1} -> V_n`.
    pub fn truncated(dims: Vec<usize>, maps: Vec<SemilinearMap>) -> Result<Self> {
        if dims.is_empty() || maps.len() + 1 != dims.len() {
            return Err(Error::InvalidInput(format!("{} levels need {} maps", dims.len(), dims.len().saturating_sub(1))));
        }
        let t = TwistedTower { dims, maps, shape: TowerShape::Truncated };
        t.check_shapes()?;
        Ok(t)
    }

    /// `dims` lists levels `0..preamble+period`; `maps[n]: V_{n+1} -> V_n` for
    /// the same range, the last one landing from `V_{preamble+period} = V_preamble`.
    pub fn periodic(dims: Vec<usize>, maps: Vec<SemilinearMap>, period: usize) -> Result<Self> {
        if period == 0 || period > dims.len() || maps.len() != dims.len() {
            return Err(Error::InvalidInput(format!(
                "periodic tower with {} levels and period {period} needs {} maps, got {}",
                dims.len(),
                dims.len(),
                maps.len()
            )));
        }
        let preamble = dims.len() - period;
        let t = TwistedTower { dims, maps, shape: TowerShape::Periodic { preamble, period } };
        t.check_shapes()?;
        Ok(t)
    }

    /// Constant tower: every level `V`, every map `m`.
    pub fn constant(map: SemilinearMap) -> Result<Self> {
        let d = map.source_dim();
        if map.target_dim() != d {
            return Err(Error::InvalidInput("a constant tower needs a square map".into()));
        }
        TwistedTower::periodic(vec![d], vec![map], 1)
    }

    fn check_shapes(&self) -> Result<()> {
        for (n, m) in self.maps.iter().enumerate() {
            if m.target_dim() != self.dim(n) || m.source_dim() != self.dim(n + 1) {
                return Err(Error::InvalidInput(format!(
                    "map {n} is {}x{}, expected {}x{}",
                    m.target_dim(),
                    m.source_dim(),
                    self.dim(n),
                    self.dim(n + 1)
                )));
            }
        }
        Ok(())
    }

    pub fn shape(&self) -> TowerShape {
        self.shape
    }

    pub fn is_exact(&self) -> bool {
        matches!(self.shape, TowerShape::Periodic { .. })
    }

    /// Number of explicitly listed levels.
    pub fn listed_levels(&self) -> usize {
        self.dims.len()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn maps(&self) -> &[SemilinearMap] {
        &self.maps
    }

    /// The same tower with every twist replaced by `twist`.
    pub fn with_twists(&self, twist: i64) -> TwistedTower {
        let maps = self.maps.iter().map(|m| SemilinearMap::new(m.matrix.clone(), twist)).collect();
        TwistedTower { dims: self.dims.clone(), maps, shape: self.shape }
    }

    fn wrap(&self, n: usize) -> usize {
        match self.shape {
            TowerShape::Truncated => n,
            TowerShape::Periodic { preamble, period } => {
                if n < preamble {
                    n
                } else {
                    preamble + (n - preamble) % period
                }
            }
        }
    }

    /// Top level, if the tower is truncated.
    pub fn top(&self) -> Option<usize> {
        match self.shape {
            TowerShape::Truncated => Some(self.dims.len() - 1),
            TowerShape::Periodic { .. } => None,
        }
    }

    pub fn dim(&self, n: usize) -> usize {
        self.dims[self.wrap(n)]
    }

    /// `f_n: V_{n+1} -> V_n`.
    pub fn map(&self, n: usize) -> &SemilinearMap {
        &self.maps[self.wrap(n)]
    }

    pub fn max_dim(&self) -> usize {
        self.dims.iter().copied().max().unwrap_or(0)
    }

    /// `f_{j,i}: V_j -> V_i`, the composite of `f_i, ..., f_{j-1}`.
    pub fn composite(&self, j: usize, i: usize, f: &Field) -> SemilinearMap {
        assert!(j >= i);
        let mut acc = SemilinearMap::identity(self.dim(i));
        for n in i..j {
            acc = acc.compose(self.map(n), f);
        }
        acc
    }

    /// First level `>= i` where periodic behaviour has begun, aligned to the start of a period.
    fn aligned_level(&self, i: usize) -> Option<(usize, usize)> {
        match self.shape {
            TowerShape::Truncated => None,
            TowerShape::Periodic { preamble, period } => {
                let mut a = preamble;
                while a < i {
                    a += period;
                }
                Some((a, period))
            }
        }
    }
}

/// Stable subspace of one level with its certificate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StableLevel {
    pub level: usize,
    pub subspace: Subspace,
    /// Smallest `d` with `Im f_{i+d, i} = V_i^s`.
    pub depth: usize,
    /// True when computed from the full periodic tower, false for a truncation.
    pub exact: bool,
}

impl StableLevel {
    pub fn stable_from(&self) -> usize {
        self.level + self.depth
    }
}

fn image_chain_depth(t: &TwistedTower, i: usize, target: &Subspace, f: &Field) -> usize {
    let mut d = 0;
    loop {
        let img = t.composite(i + d, i, f).image(&Subspace::full(t.dim(i + d)), f);
        if img == *target {
            return d;
        }
        d += 1;
    }
}

/// `V_i^s = ∩_{j > i} Im f_{j,i}`. For periodic towers the full-period
/// endomorphism of an aligned level is iterated until its image stops
/// shrinking, then pushed down to level `i`. Truncated towers use the image
/// from the top level.
pub fn stable_subspace(t: &TwistedTower, i: usize, f: &Field) -> Result<StableLevel> {
    match t.aligned_level(i) {
        None => {
            let top = t.top().unwrap();
            if i > top {
                return Err(Error::InvalidInput(format!("level {i} is above the top level {top}")));
            }
            let sub = t.composite(top, i, f).image(&Subspace::full(t.dim(top)), f);
            let depth = image_chain_depth(t, i, &sub, f);
            Ok(StableLevel { level: i, subspace: sub, depth, exact: false })
        }
        Some((a, period)) => {
            let phi = t.composite(a + period, a, f);
            let mut img = Subspace::full(t.dim(a));
            loop {
                let next = phi.image(&img, f);
                if next == img {
                    break;
                }
                img = next;
            }
            let sub = t.composite(a, i, f).image(&img, f);
            let depth = image_chain_depth(t, i, &sub, f);
            Ok(StableLevel { level: i, subspace: sub, depth, exact: true })
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MlReport {
    pub levels: Vec<StableLevel>,
    /// Mittag-Leffler holds: every image chain stabilized at a recorded depth.
    pub holds: bool,
    pub exact: bool,
}

/// Stabilization certificates for every listed level.
pub fn check_ml(t: &TwistedTower, f: &Field) -> Result<MlReport> {
    let levels: Vec<StableLevel> = (0..t.listed_levels()).map(|i| stable_subspace(t, i, f)).collect::<Result<_>>()?;
    Ok(MlReport { holds: true, exact: t.is_exact(), levels })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LimitDim {
    pub dim: usize,
    pub exact: bool,
    /// Level at which the restricted transition maps have become isomorphisms.
    pub from_level: usize,
}

/// Dimension of the inverse limit. Exact for periodic towers, where the
/// restricted maps between stable subspaces are eventually bijective; for a
/// truncation this is the stable dimension at level 0.
pub fn lim_dim(t: &TwistedTower, f: &Field) -> Result<LimitDim> {
    match t.aligned_level(0) {
        None => Ok(LimitDim { dim: stable_subspace(t, 0, f)?.subspace.dim(), exact: false, from_level: 0 }),
        Some((a, period)) => {
            let sa = stable_subspace(t, a, f)?;
            // the full-period map restricted to V_a^s must be a bijection
            let phi = t.composite(a + period, a, f);
            if phi.image(&sa.subspace, f) != sa.subspace {
                return Err(Error::InvalidInput("stable subspace is not carried onto itself".into()));
            }
            Ok(LimitDim { dim: sa.subspace.dim(), exact: true, from_level: a })
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct R1Lim {
    pub dim: usize,
    pub certificate: MlReport,
}

/// `R^1 lim` vanishes for towers of finite-dimensional spaces because the
/// Mittag-Leffler condition holds; the certificate records where each image
/// chain stabilized.
pub fn r1lim_dim(t: &TwistedTower, f: &Field) -> Result<R1Lim> {
    let certificate = check_ml(t, f)?;
    Ok(R1Lim { dim: if certificate.holds { 0 } else { usize::MAX }, certificate })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundReport {
    pub lim: usize,
    pub sup: usize,
    pub passed: bool,
}

/// `dim lim <= sup_i dim V_i`.
pub fn bound_check(t: &TwistedTower, f: &Field) -> Result<BoundReport> {
    let lim = lim_dim(t, f)?.dim;
    let sup = t.max_dim();
    Ok(BoundReport { lim, sup, passed: lim <= sup })
}

/// For each basis vector of the limit, the compatible sequence `v_0, ..., v_{a+m}`
/// on levels up to one full period above the aligned level `a`.
pub fn limit_elements(t: &TwistedTower, f: &Field) -> Result<Vec<Vec<Vec<Fe>>>> {
    let Some((a, period)) = t.aligned_level(0) else {
        return Err(Error::InvalidInput("limit elements need a periodic tower".into()));
    };
    let sa = stable_subspace(t, a, f)?.subspace;
    let phi = t.composite(a + period, a, f);
    let mut out = Vec::new();
    for b in sa.basis() {
        let top = phi
            .preimage_in(&b, &sa, f)
            .ok_or_else(|| Error::InvalidInput("full-period map is not onto the stable subspace".into()))?;
        let mut seq = vec![Vec::new(); a + period + 1];
        seq[a + period] = top;
        for n in (0..a + period).rev() {
            seq[n] = t.map(n).apply(&seq[n + 1], f);
        }
        out.push(seq);
    }
    Ok(out)
}

/// Check that `f_n(v_{n+1}) = v_n` along the sequence and that its top entry
/// lies in the stable subspace of the aligned level, where the full-period map
/// is bijective, so the sequence lifts one more period indefinitely.
pub fn is_compatible_sequence(t: &TwistedTower, seq: &[Vec<Fe>], f: &Field) -> bool {
    let Some((a, period)) = t.aligned_level(0) else { return false };
    if seq.len() != a + period + 1 {
        return false;
    }
    let steps_ok = (0..a + period).all(|n| t.map(n).apply(&seq[n + 1], f) == seq[n]);
    steps_ok && stable_subspace(t, a, f).is_ok_and(|s| s.subspace.contains(&seq[a + period], f))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn k(p: u64) -> Field {
        Field::prime(p).unwrap()
    }

    fn mat(f: &Field, rows: &[&[i64]]) -> Mat {
        let c = rows[0].len();
        Mat::from_rows(c, rows.iter().map(|r| r.iter().map(|&a| f.from_int(a)).collect()).collect())
    }

    #[test]
    fn identity_tower() {
        let f = k(2);
        let t = TwistedTower::constant(SemilinearMap::identity(3)).unwrap();
        let s = stable_subspace(&t, 0, &f).unwrap();
        assert_eq!(s.subspace.dim(), 3);
        assert_eq!(s.depth, 0);
        assert_eq!(lim_dim(&t, &f).unwrap(), LimitDim { dim: 3, exact: true, from_level: 0 });
        assert_eq!(r1lim_dim(&t, &f).unwrap().dim, 0);
        assert!(bound_check(&t, &f).unwrap().passed);
    }

    #[test]
    fn zero_tower() {
        let f = k(3);
        let t = TwistedTower::constant(SemilinearMap::new(Mat::zeros(2, 2), 1)).unwrap();
        assert_eq!(stable_subspace(&t, 0, &f).unwrap().subspace.dim(), 0);
        let l = lim_dim(&t, &f).unwrap();
        assert_eq!((l.dim, l.exact), (0, true));
        let b = bound_check(&t, &f).unwrap();
        assert_eq!((b.lim, b.sup), (0, 2));
    }

    #[test]
    fn projection_tower() {
        let f = k(2);
        let t = TwistedTower::constant(SemilinearMap::new(mat(&f, &[&[1, 0], &[0, 0]]), 0)).unwrap();
        let s = stable_subspace(&t, 0, &f).unwrap();
        assert_eq!(s.subspace.dim(), 1);
        assert!(s.subspace.contains(&[Fe::ONE, Fe::ZERO], &f));
        assert_eq!(s.depth, 1);
        assert_eq!(lim_dim(&t, &f).unwrap().dim, 1);
    }

    #[test]
    fn shrinking_truncated_tower() {
        let f = k(3);
        // nilpotent shift twice: composites of rank 2, then rank 1
        let b = mat(&f, &[&[0, 1, 0], &[0, 0, 1], &[0, 0, 0]]);
        let t = TwistedTower::truncated(vec![3, 3, 3], vec![SemilinearMap::new(b.clone(), 0), SemilinearMap::new(b, 0)])
            .unwrap();
        let rep = check_ml(&t, &f).unwrap();
        assert!(!rep.exact);
        assert_eq!(rep.levels[0].subspace.dim(), 1);
        assert_eq!(rep.levels[0].depth, 2);
        assert_eq!(rep.levels[1].depth, 1);
        assert_eq!(rep.levels[2].depth, 0);
    }

    #[test]
    fn periodic_with_preamble_and_limit_elements() {
        let f = Field::new(crate::field::FieldSpec::extension(2, vec![1, 1, 1])).unwrap();
        let u = f.generator_u();
        let pre = SemilinearMap::new(Mat::from_rows(2, vec![vec![Fe::ONE, Fe::ZERO], vec![Fe::ZERO, Fe::ZERO]]), 1);
        let cyc = SemilinearMap::new(Mat::from_rows(2, vec![vec![u, Fe::ZERO], vec![Fe::ZERO, Fe::ONE]]), 1);
        let t = TwistedTower::periodic(vec![2, 2], vec![pre, cyc], 1).unwrap();
        let l = lim_dim(&t, &f).unwrap();
        assert_eq!(l.dim, 2);
        assert_eq!(stable_subspace(&t, 0, &f).unwrap().subspace.dim(), 1);
        let elems = limit_elements(&t, &f).unwrap();
        assert_eq!(elems.len(), 2);
        for seq in &elems {
            assert!(is_compatible_sequence(&t, seq, &f));
        }
    }

    #[test]
    fn composition_law() {
        let f = Field::new(crate::field::FieldSpec::extension(3, vec![1, 0, 1])).unwrap();
        let u = f.generator_u();
        let a = SemilinearMap::new(Mat::from_rows(1, vec![vec![u]]), 1);
        let b = SemilinearMap::new(Mat::from_rows(1, vec![vec![f.add(u, Fe::ONE)]]), 1);
        let ab = a.compose(&b, &f);
        for v in f.elements() {
            assert_eq!(ab.apply(&[v], &f), a.apply(&b.apply(&[v], &f), &f));
        }
    }
}
