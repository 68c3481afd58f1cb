//! Coherent D-modules on the affine line, presented as free modules `k[x]^r`
//! with the action of the generators `D_{p^m}` on the standard basis.
//!
//! Convention: column `i` of an action matrix is the image of `e_i`. A section
//! is a vector of polynomials `s = sum_i s_i e_i`.

use crate::arith::binom_mod_p;
use crate::diffops::decompose_generator_product;
use crate::error::{Error, Result};
use crate::field::{Fe, Field};
use crate::linalg::Mat;
use crate::poly::{smith_invariant_factors, Poly, PolyMatrix};

/// Largest `p^L` for which basis action tables are built.
pub const MAX_ACTION_TABLE: usize = 4096;

pub type Section = Vec<Poly>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DModulePresentation {
    field: Field,
    rank: usize,
    actions: Vec<PolyMatrix>,
}

impl DModulePresentation {
    /// `actions[m]` is the action of `D_{p^m}`; the level bound is `actions.len()`.
    pub fn new(field: Field, actions: Vec<PolyMatrix>) -> Result<Self> {
        let Some(first) = actions.first() else {
            return Err(Error::InvalidInput("a presentation needs at least one level".into()));
        };
        let rank = first.rows();
        if rank == 0 {
            return Err(Error::InvalidInput("rank must be positive".into()));
        }
        for (m, a) in actions.iter().enumerate() {
            if a.rows() != rank || a.cols() != rank {
                return Err(Error::InvalidInput(format!("action {m} is not {rank}x{rank}")));
            }
        }
        let levels = actions.len() as u32;
        if (field.p() as usize).checked_pow(levels).map_or(true, |q| q > MAX_ACTION_TABLE) {
            return Err(Error::InvalidInput(format!("p^L exceeds {MAX_ACTION_TABLE}")));
        }
        Ok(DModulePresentation { field, rank, actions })
    }

    /// `O^r` with every generator acting by the coefficient rule.
    pub fn trivial(field: Field, rank: usize, levels: u32) -> Result<Self> {
        Self::new(field, vec![PolyMatrix::zeros(rank, rank); levels as usize])
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn levels(&self) -> u32 {
        self.actions.len() as u32
    }

    pub fn actions(&self) -> &[PolyMatrix] {
        &self.actions
    }

    pub fn action_table(&self) -> ActionTable {
        ActionTable::build(self)
    }
}

/// `D_v(e_i)` for every `v < p^L`, obtained by composing generator actions.
#[derive(Debug, Clone)]
pub struct ActionTable {
    field: Field,
    rank: usize,
    levels: u32,
    basis: Vec<PolyMatrix>,
}

impl ActionTable {
    fn build(m: &DModulePresentation) -> ActionTable {
        let f = m.field.clone();
        let p = f.p() as usize;
        let size = p.pow(m.levels());
        let mut t =
            ActionTable { field: f, rank: m.rank, levels: m.levels(), basis: vec![PolyMatrix::identity(m.rank)] };
        for v in 1..size {
            let col = if is_power_of(v, p) {
                m.actions[log_p(v, p) as usize].clone()
            } else {
                let cols: Vec<Section> = (0..m.rank).map(|i| t.apply_basis_op(v, &unit_section(m.rank, i))).collect();
                PolyMatrix::from_columns(&cols)
            };
            t.basis.push(col);
        }
        t
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// `p^L`: one past the largest operator index covered.
    pub fn size(&self) -> usize {
        self.basis.len()
    }

    pub fn levels(&self) -> u32 {
        self.levels
    }

    /// `D_v(e_i)` as the columns of a matrix.
    pub fn basis_action(&self, v: usize) -> &PolyMatrix {
        &self.basis[v]
    }

    /// `D_{p^m}(s)` by Leibniz on `s = sum s_i e_i`.
    pub fn apply_generator(&self, m: u32, s: &[Poly]) -> Section {
        let f = &self.field;
        let q = (f.p() as usize).pow(m);
        let mut out = vec![Poly::zero(); self.rank];
        for (i, si) in s.iter().enumerate() {
            if si.is_zero() {
                continue;
            }
            for u in 0..=q {
                let du = si.divided_derivative(u, f);
                if du.is_zero() {
                    continue;
                }
                let b = &self.basis[q - u];
                for (k, slot) in out.iter_mut().enumerate() {
                    let c = b.get(k, i);
                    if !c.is_zero() {
                        *slot = slot.add(&du.mul(c, f), f);
                    }
                }
            }
        }
        out
    }

    /// `D_j(s)` as `unit^{-1}` times the generator product, highest generator first.
    pub fn apply_basis_op(&self, j: usize, s: &[Poly]) -> Section {
        let f = &self.field;
        let gp = decompose_generator_product(j as u64, f.p());
        let mut cur = s.to_vec();
        for &(m, c) in gp.factors.iter().rev() {
            for _ in 0..c {
                cur = self.apply_generator(m, &cur);
            }
        }
        let inv = f.inv(f.from_int(gp.unit as i64)).unwrap();
        cur.iter().map(|a| a.scale(inv, f)).collect()
    }
}

fn is_power_of(mut v: usize, p: usize) -> bool {
    if v == 0 {
        return false;
    }
    while v % p == 0 {
        v /= p;
    }
    v == 1
}

fn log_p(mut v: usize, p: usize) -> u32 {
    let mut k = 0;
    while v > 1 {
        v /= p;
        k += 1;
    }
    k
}

fn unit_section(r: usize, i: usize) -> Section {
    let mut s = vec![Poly::zero(); r];
    s[i] = Poly::one();
    s
}

fn monomial_section(r: usize, l: usize, i: usize) -> Section {
    let mut s = vec![Poly::zero(); r];
    s[i] = Poly::monomial(Fe::ONE, l);
    s
}

fn section_is_zero(s: &[Poly]) -> bool {
    s.iter().all(|a| a.is_zero())
}

fn add_sections(a: &mut [Poly], b: &[Poly], f: &Field) {
    for (x, y) in a.iter_mut().zip(b) {
        *x = x.add(y, f);
    }
}

/// Which defining identity failed first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub identity: String,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationReport {
    pub checks: usize,
    pub violation: Option<Violation>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.violation.is_none()
    }
}

/// Check the action data on `x^l e_i`, `l <= test_degree`: the Leibniz rule for
/// every composed `D_j` with `1 <= j < p^L`, commutation of the generators,
/// and `D_{p^m}^p = 0`. Stops at the first violation.
pub fn validate_dmodule(m: &DModulePresentation, test_degree: usize) -> ValidationReport {
    let t = m.action_table();
    let f = &m.field;
    let p = f.p() as usize;
    let r = m.rank;
    let size = t.size();
    let mut checks = 0;

    // D_j(x^l e_i) for l up to twice the test degree
    let top = 2 * test_degree;
    let act: Vec<Vec<Vec<Section>>> = (0..size)
        .map(|j| {
            (0..=top)
                .map(|l| (0..r).map(|i| t.apply_basis_op(j, &monomial_section(r, l, i))).collect())
                .collect()
        })
        .collect();

    for j in 1..size {
        for i in 0..r {
            for l in 0..=test_degree {
                for la in 0..=test_degree {
                    checks += 1;
                    let lhs = &act[j][l + la][i];
                    let mut rhs = vec![Poly::zero(); r];
                    for u in 0..=j.min(la) {
                        let b = binom_mod_p(la as u64, u as u64, p as u64);
                        if b == 0 {
                            continue;
                        }
                        let coef = Poly::monomial(f.from_int(b as i64), la - u);
                        let term: Section = act[j - u][l][i].iter().map(|a| a.mul(&coef, f)).collect();
                        add_sections(&mut rhs, &term, f);
                    }
                    if *lhs != rhs {
                        return ValidationReport {
                            checks,
                            violation: Some(Violation {
                                identity: "leibniz".into(),
                                detail: format!("D_{j}(a·s) with a = x^{la}, s = x^{l}·e_{i}"),
                            }),
                        };
                    }
                }
            }
        }
    }

    let levels = m.levels();
    for a in 0..levels {
        for b in (a + 1)..levels {
            for i in 0..r {
                for l in 0..=test_degree {
                    checks += 1;
                    let s = monomial_section(r, l, i);
                    let ab = t.apply_generator(a, &t.apply_generator(b, &s));
                    let ba = t.apply_generator(b, &t.apply_generator(a, &s));
                    if ab != ba {
                        return ValidationReport {
                            checks,
                            violation: Some(Violation {
                                identity: "commutation".into(),
                                detail: format!("D_{{p^{a}}} and D_{{p^{b}}} on x^{l}·e_{i}"),
                            }),
                        };
                    }
                }
            }
        }
    }

    for mm in 0..levels {
        for i in 0..r {
            for l in 0..=test_degree {
                checks += 1;
                let mut s = monomial_section(r, l, i);
                for _ in 0..p {
                    s = t.apply_generator(mm, &s);
                }
                if !section_is_zero(&s) {
                    return ValidationReport {
                        checks,
                        violation: Some(Violation {
                            identity: "nilpotence".into(),
                            detail: format!("D_{{p^{mm}}}^p on x^{l}·e_{i}"),
                        }),
                    };
                }
            }
        }
    }
    ValidationReport { checks, violation: None }
}

/// `A^{(p^k)}`: coefficient Frobenius `k` times and `x -> x^{p^k}`.
pub fn twisted(a: &PolyMatrix, k: u32, f: &Field) -> PolyMatrix {
    a.frobenius_power(k, f)
}

/// `A_0 · A_1^{(p)} ··· A_{n-1}^{(p^{n-1})}`.
pub fn cumulative_product(tower: &[PolyMatrix], n: usize, f: &Field) -> PolyMatrix {
    let r = tower.first().map_or(0, |a| a.rows());
    let mut acc = PolyMatrix::identity(r);
    for (k, a) in tower.iter().take(n).enumerate() {
        acc = acc.mul(&twisted(a, k as u32, f), f);
    }
    acc
}

fn check_tower(tower: &[PolyMatrix], f: &Field) -> Result<usize> {
    let Some(first) = tower.first() else {
        return Err(Error::InvalidInput("empty tower".into()));
    };
    let r = first.rows();
    for (n, a) in tower.iter().enumerate() {
        if a.rows() != r || a.cols() != r {
            return Err(Error::InvalidInput(format!("tower matrix {n} is not {r}x{r}")));
        }
        let d = a.det(f);
        if !d.is_constant() || d.is_zero() {
            return Err(Error::NotATransitionMatrix(format!(
                "tower matrix {n} has non-constant determinant over k[x]"
            )));
        }
    }
    Ok(r)
}

/// The D-module on `O^r` whose level-`n` flat sections are the columns of the
/// cumulative twisted products: with `P = P_N`, `D_{p^m}` acts on the basis by
/// `P · D_{p^m}[P^{-1}]`.
pub fn dmod_from_tower(tower: &[PolyMatrix], f: &Field) -> Result<DModulePresentation> {
    check_tower(tower, f)?;
    let n = tower.len();
    let pn = cumulative_product(tower, n, f);
    let pinv = pn.inverse(f)?;
    let p = f.p() as usize;
    let actions = (0..n as u32)
        .map(|m| {
            let q = p.pow(m);
            pn.mul(&pinv.map(|a| a.divided_derivative(q, f)), f)
        })
        .collect();
    DModulePresentation::new(f.clone(), actions)
}

/// Certificate that a set of `r` generators freely spans a rank-`r` direct
/// summand: Smith invariant factors over `k[y]`, `y = x^{p^n}`, all equal to 1,
/// and determinant over `k[x]` a nonzero constant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FreenessCertificate {
    pub rank: usize,
    pub invariant_factors: Vec<Poly>,
    pub det: Fe,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtractedLevel {
    pub n: u32,
    /// Scalars act by `a·s = a^{scalar_power} s`.
    pub scalar_power: usize,
    /// Generators as columns.
    pub generators: PolyMatrix,
    /// Leading `(degree, index)` of each generator.
    pub leads: Vec<(usize, usize)>,
    /// Degree bound at which the answer stabilized.
    pub degree_bound: usize,
    pub certificate: FreenessCertificate,
}

/// Basis of `{s in (k[x]_{<=d})^r : D_{p^m} s = 0 for m < n}`, as coordinate
/// vectors with index `l*r + i` for `x^l e_i`.
pub fn kernel_slice(t: &ActionTable, n: u32, d: usize) -> Vec<Vec<Fe>> {
    let f = t.field();
    let r = t.rank();
    let ncols = r * (d + 1);
    if n == 0 {
        return (0..ncols)
            .map(|c| {
                let mut v = vec![Fe::ZERO; ncols];
                v[c] = Fe::ONE;
                v
            })
            .collect();
    }
    let mut images: Vec<Vec<Section>> = Vec::new();
    let mut out_deg = 0;
    for l in 0..=d {
        for i in 0..r {
            let s = monomial_section(r, l, i);
            let imgs: Vec<Section> = (0..n).map(|m| t.apply_generator(m, &s)).collect();
            for img in &imgs {
                for a in img {
                    out_deg = out_deg.max(a.degree().unwrap_or(0));
                }
            }
            images.push(imgs);
        }
    }
    let block = r * (out_deg + 1);
    let mut mat = Mat::zeros(n as usize * block, ncols);
    for (c, imgs) in images.iter().enumerate() {
        for (m, img) in imgs.iter().enumerate() {
            for (k, a) in img.iter().enumerate() {
                for (l, &v) in a.coeffs().iter().enumerate() {
                    mat.set(m * block + l * r + k, c, v);
                }
            }
        }
    }
    mat.nullspace(f)
}

fn coords_to_section(v: &[Fe], r: usize) -> Section {
    let d = v.len() / r;
    (0..r).map(|i| Poly::from_coeffs((0..d).map(|l| v[l * r + i]).collect())).collect()
}

struct SliceGenerators {
    leads: Vec<(usize, usize)>,
    generators: Vec<Section>,
}

fn slice_generators(kernel: &[Vec<Fe>], r: usize, d: usize, q: usize, f: &Field) -> SliceGenerators {
    let ncols = r * (d + 1);
    // reversed column order so that pivots are leading terms
    let rows: Vec<Vec<Fe>> = kernel.iter().map(|v| v.iter().rev().copied().collect()).collect();
    let (rr, pivots) = Mat::from_rows(ncols, rows).rref(f);
    let lead_of = |pc: usize| {
        let c = ncols - 1 - pc;
        (c / r, c % r)
    };
    let lead_set: std::collections::HashSet<(usize, usize)> = pivots.iter().map(|&pc| lead_of(pc)).collect();
    let mut found: Vec<((usize, usize), Section)> = Vec::new();
    for (row, &pc) in pivots.iter().enumerate() {
        let (l, i) = lead_of(pc);
        if l >= q && lead_set.contains(&(l - q, i)) {
            continue;
        }
        let v: Vec<Fe> = rr.row(row).iter().rev().copied().collect();
        found.push(((l, i), coords_to_section(&v, r)));
    }
    found.sort_by_key(|&((l, i), _)| (i, l));
    SliceGenerators {
        leads: found.iter().map(|(ld, _)| *ld).collect(),
        generators: found.into_iter().map(|(_, s)| s).collect(),
    }
}

/// Express generator columns in `k[y]`-coordinates, `y = x^q`: row `(i, rho)`
/// holds the polynomial in `y` collecting the exponents `rho + q t` of entry `i`.
fn expand_over_frobenius_ring(g: &PolyMatrix, q: usize) -> PolyMatrix {
    let r = g.rows();
    let mut out = PolyMatrix::zeros(r * q, g.cols());
    for j in 0..g.cols() {
        for i in 0..r {
            let a = g.get(i, j);
            for rho in 0..q {
                let c: Vec<Fe> = a.coeffs().iter().skip(rho).step_by(q).copied().collect();
                out.set(i * q + rho, j, Poly::from_coeffs(c));
            }
        }
    }
    out
}

fn certify(g: &PolyMatrix, q: usize, f: &Field) -> Option<FreenessCertificate> {
    let det = g.det(f);
    if !det.is_constant() || det.is_zero() {
        return None;
    }
    let factors = smith_invariant_factors(&expand_over_frobenius_ring(g, q), f);
    if factors.len() != g.cols() || factors.iter().any(|a| *a != Poly::one()) {
        return None;
    }
    Some(FreenessCertificate { rank: g.cols(), invariant_factors: factors, det: det.coeff(0) })
}

/// Default number of doublings before extraction gives up.
pub const EXTRACTION_DOUBLINGS: u32 = 7;

/// Generators of `E_n`, the sections killed by every `D_j`, `1 <= j < p^n`.
pub fn extract_level(m: &DModulePresentation, n: u32, degree_bound: usize) -> Result<ExtractedLevel> {
    extract_level_with_cap(m, &m.action_table(), n, degree_bound, EXTRACTION_DOUBLINGS)
}

pub fn extract_level_with_cap(
    m: &DModulePresentation,
    t: &ActionTable,
    n: u32,
    degree_bound: usize,
    doublings: u32,
) -> Result<ExtractedLevel> {
    if n > m.levels() {
        return Err(Error::InvalidInput(format!("level {n} exceeds the level bound {}", m.levels())));
    }
    if degree_bound == 0 {
        return Err(Error::InvalidInput("degree bound must be at least 1".into()));
    }
    let f = &m.field;
    let r = m.rank;
    let q = (f.p() as usize).pow(n);
    let mut d = degree_bound;
    let mut previous: Option<Vec<(usize, usize)>> = None;
    for _ in 0..=doublings {
        let kernel = kernel_slice(t, n, d);
        let sg = slice_generators(&kernel, r, d, q, f);
        let mut accepted = None;
        if sg.leads.len() == r {
            let g = PolyMatrix::from_columns(&sg.generators);
            if let Some(cert) = certify(&g, q, f) {
                accepted = Some((g, cert));
            }
        }
        match accepted {
            Some((g, cert)) if previous.as_ref() == Some(&sg.leads) => {
                check_flat(t, &g, q, n)?;
                return Ok(ExtractedLevel {
                    n,
                    scalar_power: q,
                    generators: g,
                    leads: sg.leads,
                    degree_bound: d,
                    certificate: cert,
                });
            }
            Some(_) => previous = Some(sg.leads),
            None => previous = None,
        }
        d *= 2;
    }
    Err(Error::ExtractionDiverged { level: n, detail: format!("no free rank-{r} answer up to degree {}", d / 2) })
}

fn check_flat(t: &ActionTable, g: &PolyMatrix, q: usize, n: u32) -> Result<()> {
    for j in 1..q {
        for c in 0..g.cols() {
            if !section_is_zero(&t.apply_basis_op(j, &g.column(c))) {
                return Err(Error::ExtractionDiverged {
                    level: n,
                    detail: format!("generator {c} is not killed by D_{j}"),
                });
            }
        }
    }
    Ok(())
}

/// The comparison `F^* E_{n+1} ≅ E_n` in extracted bases.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FdivIso {
    pub n: u32,
    /// `G_n^{-1} G_{n+1}`, entries in `k[x^{p^n}]`.
    pub change_of_basis: PolyMatrix,
    /// The same matrix read in the twisted scalars of `E_n`.
    pub matrix: PolyMatrix,
    pub det: Fe,
}

pub fn verify_fdiv_iso(m: &DModulePresentation, upper: &ExtractedLevel, lower: &ExtractedLevel) -> Result<FdivIso> {
    let f = &m.field;
    if upper.n != lower.n + 1 {
        return Err(Error::InvalidInput(format!("levels {} and {} are not adjacent", upper.n, lower.n)));
    }
    let n = lower.n;
    let q = lower.scalar_power;
    let ginv = lower.generators.inverse(f).map_err(|e| Error::IsoFailed(e.to_string()))?;
    let cob = ginv.mul(&upper.generators, f);
    let mut matrix = PolyMatrix::zeros(cob.rows(), cob.cols());
    for i in 0..cob.rows() {
        for j in 0..cob.cols() {
            let a = cob.get(i, j).unsubstitute_power(q).ok_or_else(|| {
                Error::IsoFailed(format!("entry ({i},{j}) is not a polynomial in x^{q}"))
            })?;
            matrix.set(i, j, a.frobenius_coeffs(-(n as i64), f));
        }
    }
    let det = matrix.det(f);
    if !det.is_constant() || det.is_zero() {
        return Err(Error::IsoFailed("comparison matrix is not invertible".into()));
    }
    Ok(FdivIso { n, change_of_basis: cob, matrix, det: det.coeff(0) })
}

/// Check that extracted levels `0..=N` reproduce the input tower up to units:
/// `U_n = P_n^{-1} G_n` is invertible over `k[x^{p^n}]` and
/// `U_n · Q_n · U_{n+1}^{-1} = A_n^{(p^n)}`.
pub fn check_tower_up_to_units(
    tower: &[PolyMatrix],
    levels: &[ExtractedLevel],
    isos: &[FdivIso],
    f: &Field,
) -> Result<()> {
    let p = f.p() as usize;
    let mut units = Vec::new();
    for lv in levels {
        let pn = cumulative_product(tower, lv.n as usize, f);
        let u = pn.inverse(f)?.mul(&lv.generators, f);
        let q = p.pow(lv.n);
        for i in 0..u.rows() {
            for j in 0..u.cols() {
                if u.get(i, j).unsubstitute_power(q).is_none() {
                    return Err(Error::IsoFailed(format!("level {} differs from the tower by a non-unit", lv.n)));
                }
            }
        }
        units.push(u);
    }
    for iso in isos {
        let n = iso.n as usize;
        let (Some(un), Some(un1)) = (units.get(n), units.get(n + 1)) else {
            return Err(Error::InvalidInput(format!("missing level for comparison {n}")));
        };
        let lhs = un.mul(&iso.change_of_basis, f).mul(&un1.inverse(f)?, f);
        if lhs != twisted(&tower[n], n as u32, f) {
            return Err(Error::IsoFailed(format!("comparison {n} does not match tower matrix {n}")));
        }
    }
    Ok(())
}

/// `dim k[x]_{<=d} / (image of f -> f(x^p) from k[x]_{<=d/p})`, by elimination
/// on monomial coordinates.
pub fn h1d_affine_witness(p: u64, d: usize) -> Result<usize> {
    let f = Field::prime(p)?;
    let p = p as usize;
    let cols: Vec<Vec<Fe>> = (0..=d / p)
        .map(|j| {
            let mut v = vec![Fe::ZERO; d + 1];
            v[p * j] = Fe::ONE;
            v
        })
        .collect();
    let m = Mat::from_columns(d + 1, &cols);
    Ok(d + 1 - m.rank(&f))
}

/// The same cokernel for a module: `dim (E_0)_{<=d} - dim (E_1)_{<=d}`.
pub fn affine_witness_module(m: &DModulePresentation, d: usize) -> usize {
    let t = m.action_table();
    let total = m.rank * (d + 1);
    total - kernel_slice(&t, 1, d).len()
}

/// Dimension of the sections of degree `<= d` killed by every `D_j`,
/// `1 <= j <= d`. The flag is false when `d` reaches past the level bound and
/// only `D_j` with `j < p^L` were imposed.
pub fn horizontal_sections_dim(m: &DModulePresentation, d: usize) -> (usize, bool) {
    let p = m.field.p() as usize;
    let mut n = 0u32;
    while p.pow(n) <= d {
        n += 1;
    }
    let complete = n <= m.levels();
    let n = n.min(m.levels());
    (kernel_slice(&m.action_table(), n, d).len(), complete)
}
