//! Exact dense linear algebra over a [`Field`], plus a block solver that
//! splits sparse systems into independent components before eliminating.

use crate::field::{Fe, Field};

/// Dense row-major matrix over a finite field.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<Fe>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Mat {
        Mat { rows, cols, data: vec![Fe::ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Mat {
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Fe::ONE);
        }
        m
    }

    /// From row vectors; all rows must have length `cols`.
    pub fn from_rows(cols: usize, rows: Vec<Vec<Fe>>) -> Mat {
        let r = rows.len();
        let mut data = Vec::with_capacity(r * cols);
        for row in rows {
            assert_eq!(row.len(), cols, "ragged matrix");
            data.extend(row);
        }
        Mat { rows: r, cols, data }
    }

    pub fn from_columns(rows: usize, cols: &[Vec<Fe>]) -> Mat {
        let mut m = Mat::zeros(rows, cols.len());
        for (j, c) in cols.iter().enumerate() {
            assert_eq!(c.len(), rows, "ragged matrix");
            for (i, &v) in c.iter().enumerate() {
                m.set(i, j, v);
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

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Fe {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Fe) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[Fe] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_vecs(&self) -> Vec<Vec<Fe>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn column(&self, j: usize) -> Vec<Fe> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn transpose(&self) -> Mat {
        let mut t = Mat::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|a| a.is_zero())
    }

    pub fn mul(&self, other: &Mat, f: &Field) -> Mat {
        assert_eq!(self.cols, other.rows, "matrix shape mismatch");
        let mut out = Mat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let v = f.mul_add(a, other.get(k, j), out.get(i, j));
                    out.set(i, j, v);
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[Fe], f: &Field) -> Vec<Fe> {
        assert_eq!(self.cols, v.len(), "vector length mismatch");
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).fold(Fe::ZERO, |acc, (&a, &b)| f.mul_add(a, b, acc)))
            .collect()
    }

    /// Entrywise Frobenius power.
    pub fn frobenius(&self, n: i64, f: &Field) -> Mat {
        Mat { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&a| f.frobenius(a, n)).collect() }
    }

    /// Reduced row echelon form and pivot columns.
    pub fn rref(&self, f: &Field) -> (Mat, Vec<usize>) {
        let mut m = self.clone();
        let pivots = m.rref_in_place(f);
        (m, pivots)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    pub(crate) fn rref_in_place(&mut self, f: &Field) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..self.cols {
            if r == self.rows {
                break;
            }
            let Some(pr) = (r..self.rows).find(|&i| !self.get(i, c).is_zero()) else { continue };
            self.swap_rows(r, pr);
            let inv = f.inv(self.get(r, c)).unwrap();
            for j in c..self.cols {
                let v = f.mul(self.get(r, j), inv);
                self.set(r, j, v);
            }
            for i in 0..self.rows {
                if i == r {
                    continue;
                }
                let factor = self.get(i, c);
                if factor.is_zero() {
                    continue;
                }
                let nf = f.neg(factor);
                for j in c..self.cols {
                    let v = f.mul_add(nf, self.get(r, j), self.get(i, j));
                    self.set(i, j, v);
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    pub fn rank(&self, f: &Field) -> usize {
        self.rref(f).1.len()
    }

    /// Basis of `{v : self * v = 0}`.
    pub fn nullspace(&self, f: &Field) -> Vec<Vec<Fe>> {
        let (r, pivots) = self.rref(f);
        nullspace_from_rref(&r, &pivots, f)
    }

    /// Some `v` with `self * v = b`, or `None` if the system is inconsistent.
    pub fn solve(&self, b: &[Fe], f: &Field) -> Option<Vec<Fe>> {
        assert_eq!(b.len(), self.rows);
        let mut aug = Mat::zeros(self.rows, self.cols + 1);
        for i in 0..self.rows {
            for j in 0..self.cols {
                aug.set(i, j, self.get(i, j));
            }
            aug.set(i, self.cols, b[i]);
        }
        let pivots = aug.rref_in_place(f);
        if pivots.last() == Some(&self.cols) {
            return None;
        }
        let mut x = vec![Fe::ZERO; self.cols];
        for (i, &c) in pivots.iter().enumerate() {
            x[c] = aug.get(i, self.cols);
        }
        Some(x)
    }

    pub fn inverse(&self, f: &Field) -> Option<Mat> {
        if self.rows != self.cols {
            return None;
        }
        let n = self.rows;
        let mut aug = Mat::zeros(n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                aug.set(i, j, self.get(i, j));
            }
            aug.set(i, n + i, Fe::ONE);
        }
        let pivots = aug.rref_in_place(f);
        if pivots.len() < n || pivots[n - 1] >= n {
            return None;
        }
        let mut inv = Mat::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                inv.set(i, j, aug.get(i, n + j));
            }
        }
        Some(inv)
    }
}

fn nullspace_from_rref(r: &Mat, pivots: &[usize], f: &Field) -> Vec<Vec<Fe>> {
    let mut is_pivot = vec![false; r.cols];
    for &c in pivots {
        is_pivot[c] = true;
    }
    (0..r.cols)
        .filter(|&c| !is_pivot[c])
        .map(|free| {
            let mut v = vec![Fe::ZERO; r.cols];
            v[free] = Fe::ONE;
            for (i, &pc) in pivots.iter().enumerate() {
                v[pc] = f.neg(r.get(i, free));
            }
            v
        })
        .collect()
}

/// A subspace of `k^n`, stored as a reduced row echelon basis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Subspace {
    ambient: usize,
    basis: Mat,
    pivots: Vec<usize>,
}

impl Subspace {
    pub fn zero(ambient: usize) -> Subspace {
        Subspace { ambient, basis: Mat::zeros(0, ambient), pivots: vec![] }
    }

    pub fn full(ambient: usize) -> Subspace {
        Subspace { ambient, basis: Mat::identity(ambient), pivots: (0..ambient).collect() }
    }

    pub fn span(ambient: usize, vectors: &[Vec<Fe>], f: &Field) -> Subspace {
        let m = Mat::from_rows(ambient, vectors.to_vec());
        let (r, pivots) = m.rref(f);
        let basis = Mat::from_rows(ambient, (0..pivots.len()).map(|i| r.row(i).to_vec()).collect());
        Subspace { ambient, basis, pivots }
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn dim(&self) -> usize {
        self.pivots.len()
    }

    pub fn basis(&self) -> Vec<Vec<Fe>> {
        self.basis.row_vecs()
    }

    pub fn basis_matrix(&self) -> &Mat {
        &self.basis
    }

    /// Residue of `v` after clearing the pivot coordinates with the basis.
    pub fn reduce(&self, v: &[Fe], f: &Field) -> Vec<Fe> {
        let mut out = v.to_vec();
        for (i, &c) in self.pivots.iter().enumerate() {
            let a = out[c];
            if a.is_zero() {
                continue;
            }
            let na = f.neg(a);
            for (slot, &b) in out.iter_mut().zip(self.basis.row(i)) {
                *slot = f.mul_add(na, b, *slot);
            }
        }
        out
    }

    pub fn contains(&self, v: &[Fe], f: &Field) -> bool {
        self.reduce(v, f).iter().all(|a| a.is_zero())
    }

    pub fn contains_subspace(&self, other: &Subspace, f: &Field) -> bool {
        other.basis.row_vecs().iter().all(|v| self.contains(v, f))
    }

    /// Coordinates of `v` in the echelon basis, if `v` lies in the subspace.
    pub fn coordinates(&self, v: &[Fe], f: &Field) -> Option<Vec<Fe>> {
        if !self.contains(v, f) {
            return None;
        }
        Some(self.pivots.iter().map(|&c| v[c]).collect())
    }

    pub fn intersect(&self, other: &Subspace, f: &Field) -> Subspace {
        assert_eq!(self.ambient, other.ambient);
        if self.dim() == 0 || other.dim() == 0 {
            return Subspace::zero(self.ambient);
        }
        // a in ker [U^T | -W^T] gives sum a_i u_i in both
        let (du, dw) = (self.dim(), other.dim());
        let mut m = Mat::zeros(self.ambient, du + dw);
        for i in 0..du {
            for c in 0..self.ambient {
                m.set(c, i, self.basis.get(i, c));
            }
        }
        for j in 0..dw {
            for c in 0..self.ambient {
                m.set(c, du + j, f.neg(other.basis.get(j, c)));
            }
        }
        let vecs: Vec<Vec<Fe>> = m
            .nullspace(f)
            .into_iter()
            .map(|a| {
                let mut v = vec![Fe::ZERO; self.ambient];
                for (i, &ai) in a.iter().take(du).enumerate() {
                    if ai.is_zero() {
                        continue;
                    }
                    for (slot, &b) in v.iter_mut().zip(self.basis.row(i)) {
                        *slot = f.mul_add(ai, b, *slot);
                    }
                }
                v
            })
            .collect();
        Subspace::span(self.ambient, &vecs, f)
    }

    /// Image under `v -> m * Frob^twist(v)`. Frobenius is bijective on a
    /// finite field, so the image of the span is the span of the images.
    pub fn semilinear_image(&self, m: &Mat, twist: i64, f: &Field) -> Subspace {
        assert_eq!(m.cols(), self.ambient, "map does not start at this space");
        let imgs: Vec<Vec<Fe>> = self
            .basis
            .row_vecs()
            .into_iter()
            .map(|v| {
                let tv: Vec<Fe> = v.iter().map(|&a| f.frobenius(a, twist)).collect();
                m.mul_vec(&tv, f)
            })
            .collect();
        Subspace::span(m.rows(), &imgs, f)
    }
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// A sparse row: `(column, value)` pairs.
pub type SparseRow = Vec<(usize, Fe)>;

/// Row space of a sparse system, eliminated block by block. Columns that never
/// share a row live in different blocks and are solved independently.
#[derive(Debug, Clone)]
pub struct BlockEchelon {
    ncols: usize,
    blocks: Vec<Block>,
    // block index and local column for every global column that occurs in a row
    locate: Vec<Option<(usize, usize)>>,
}

#[derive(Debug, Clone)]
struct Block {
    columns: Vec<usize>,
    rref: Mat,
    pivots: Vec<usize>,
}

impl BlockEchelon {
    pub fn new(ncols: usize, rows: &[SparseRow], f: &Field) -> BlockEchelon {
        let mut uf = UnionFind::new(ncols);
        let mut used = vec![false; ncols];
        for row in rows {
            for &(c, _) in row {
                used[c] = true;
            }
            for w in row.windows(2) {
                uf.union(w[0].0, w[1].0);
            }
        }
        let mut block_of_root = vec![usize::MAX; ncols];
        let mut blocks: Vec<Block> = Vec::new();
        let mut locate = vec![None; ncols];
        for c in 0..ncols {
            if !used[c] {
                continue;
            }
            let root = uf.find(c);
            if block_of_root[root] == usize::MAX {
                block_of_root[root] = blocks.len();
                blocks.push(Block { columns: vec![], rref: Mat::zeros(0, 0), pivots: vec![] });
            }
            let b = block_of_root[root];
            locate[c] = Some((b, blocks[b].columns.len()));
            blocks[b].columns.push(c);
        }
        let mut block_rows: Vec<Vec<Vec<Fe>>> = vec![Vec::new(); blocks.len()];
        for row in rows {
            let Some(&(c0, _)) = row.iter().find(|(_, v)| !v.is_zero()) else { continue };
            let (b, _) = locate[c0].unwrap();
            let mut dense = vec![Fe::ZERO; blocks[b].columns.len()];
            for &(c, v) in row {
                let (_, lc) = locate[c].unwrap();
                dense[lc] = f.add(dense[lc], v);
            }
            block_rows[b].push(dense);
        }
        for (block, rows) in blocks.iter_mut().zip(block_rows) {
            let m = Mat::from_rows(block.columns.len(), rows);
            let (r, pivots) = m.rref(f);
            block.rref = r;
            block.pivots = pivots;
        }
        BlockEchelon { ncols, blocks, locate }
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn rank(&self) -> usize {
        self.blocks.iter().map(|b| b.pivots.len()).sum()
    }

    /// Global pivot columns (sorted).
    pub fn pivot_columns(&self) -> Vec<usize> {
        let mut out: Vec<usize> =
            self.blocks.iter().flat_map(|b| b.pivots.iter().map(|&lc| b.columns[lc])).collect();
        out.sort_unstable();
        out
    }

    /// Kernel basis of the system (`row . v = 0` for every row). The basis
    /// vector for a free column has a 1 there and 0 at every other free column.
    pub fn nullspace(&self, f: &Field) -> (Vec<Vec<Fe>>, Vec<usize>) {
        let mut basis = Vec::new();
        let mut free_cols = Vec::new();
        for c in 0..self.ncols {
            if self.locate[c].is_none() {
                let mut v = vec![Fe::ZERO; self.ncols];
                v[c] = Fe::ONE;
                basis.push(v);
                free_cols.push(c);
            }
        }
        for block in &self.blocks {
            let local = nullspace_from_rref(&block.rref, &block.pivots, f);
            let mut is_pivot = vec![false; block.columns.len()];
            for &p in &block.pivots {
                is_pivot[p] = true;
            }
            let frees: Vec<usize> = (0..block.columns.len()).filter(|&c| !is_pivot[c]).collect();
            for (lv, &free) in local.into_iter().zip(&frees) {
                let mut v = vec![Fe::ZERO; self.ncols];
                for (lc, a) in lv.into_iter().enumerate() {
                    v[block.columns[lc]] = a;
                }
                basis.push(v);
                free_cols.push(block.columns[free]);
            }
        }
        // deterministic order by free column
        let mut idx: Vec<usize> = (0..basis.len()).collect();
        idx.sort_by_key(|&i| free_cols[i]);
        let basis = idx.iter().map(|&i| basis[i].clone()).collect();
        let free_cols = idx.iter().map(|&i| free_cols[i]).collect();
        (basis, free_cols)
    }

    /// Reduce `v` modulo the row space: afterwards `v` vanishes at every pivot column.
    pub fn reduce(&self, v: &mut [Fe], f: &Field) {
        for block in &self.blocks {
            for (i, &pc) in block.pivots.iter().enumerate() {
                let a = v[block.columns[pc]];
                if a.is_zero() {
                    continue;
                }
                let na = f.neg(a);
                for (lc, &gc) in block.columns.iter().enumerate() {
                    let b = block.rref.get(i, lc);
                    if !b.is_zero() {
                        v[gc] = f.mul_add(na, b, v[gc]);
                    }
                }
            }
        }
    }
}
