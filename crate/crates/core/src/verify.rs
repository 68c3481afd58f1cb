//! The named check suite behind `fdiv verify-paper`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::arith::binom_mod_p;
use crate::bundle_p1::{
    birkhoff_factor, check_h0_decreasing, check_numerical_triviality, euler_char, fdiv_rigidity, splitting_from_h0,
    BundleP1, FdivTowerP1,
};
use crate::dcoh::{build_towers_p1, dcoh_dims, finiteness_report_affine, FinitenessReport};
use crate::diffops::DividedOperator;
use crate::dmod::{
    check_tower_up_to_units, dmod_from_tower, extract_level, h1d_affine_witness, validate_dmodule, verify_fdiv_iso,
    DModulePresentation,
};
use crate::field::{Field, FieldSpec};
use crate::gen;
use crate::json::{encode_page, encode_poly_matrix, envelope};
use crate::linalg::{Mat, Subspace};
use crate::poly::Poly;
use crate::spectral::{bound_edge, bound_upper, random_page, simulate};
use crate::towers::{check_ml, lim_dim, limit_elements, bound_check, is_compatible_sequence, TowerShape};

/// Deliberate corruption used to confirm that the suite can fail.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fault {
    /// Perturb one entry of the binomial relation table used by `operator-algebra`.
    CorruptRelationTable,
}

#[derive(Debug, Clone, Default)]
pub struct VerifyConfig {
    pub seed: u64,
    pub only: Option<String>,
    /// Extra field for the field-generic checks.
    pub extra_field: Option<FieldSpec>,
    pub fault: Option<Fault>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub statement: &'static str,
    pub cases: usize,
    pub passed: bool,
    pub failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn first_failure(&self) -> Option<&CheckResult> {
        self.checks.iter().find(|c| !c.passed)
    }

    pub fn to_json(&self) -> Value {
        envelope(self.seed, json!({"passed": self.passed(), "checks": self.checks}))
    }

    pub fn render_table(&self) -> String {
        let mut out = format!("seed {}\n", self.seed);
        for c in &self.checks {
            let status = if c.passed { "PASS" } else { "FAIL" };
            out.push_str(&format!("{status}  {:<24} {:>6} cases  {}\n", c.name, c.cases, c.statement));
            if let Some(why) = &c.failure {
                out.push_str(&format!("      first failure: {why}\n"));
            }
        }
        out
    }
}

type Outcome = std::result::Result<usize, String>;

struct Ctx {
    seed: u64,
    stream: u64,
    extra: Option<Field>,
    fault: Option<Fault>,
}

impl Ctx {
    fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }

    fn fields(&self, base: &[FieldSpec]) -> Vec<Field> {
        let mut out: Vec<Field> = base.iter().map(|s| Field::new(s.clone()).expect("built-in field")).collect();
        out.extend(self.extra.clone());
        out
    }
}

struct CheckDef {
    name: &'static str,
    statement: &'static str,
    run: fn(&Ctx) -> Outcome,
}

const CHECKS: &[CheckDef] = &[
    CheckDef { name: "operator-algebra", statement: "D_k D_l = C(k+l,k) D_{k+l}", run: operator_algebra },
    CheckDef { name: "lucas-binomials", statement: "C(l,k) mod p is the product of digit binomials", run: lucas_binomials },
    CheckDef {
        name: "dmodule-fdiv-roundtrip",
        statement: "O-coherent D-modules on A^1 and F-divided towers determine each other",
        run: dmodule_roundtrip,
    },
    CheckDef { name: "h0-monotone", statement: "h^0(E_n) is nonincreasing along an F-divided tower", run: h0_monotone },
    CheckDef {
        name: "fdiv-rigidity",
        statement: "p^N divides deg and splitting of E_0; periodic towers are trivial",
        run: fdiv_rigidity_check,
    },
    CheckDef {
        name: "hilbert-polynomial",
        statement: "chi(E_n(t)) = rk (t+1) on numerically trivial towers",
        run: hilbert_polynomial,
    },
    CheckDef { name: "splitting-oracle", statement: "Birkhoff splitting equals the h^0-of-twists splitting", run: splitting_oracle },
    CheckDef { name: "spectral-bounds", statement: "E_2 upper bound and edge bound on H^n", run: spectral_bounds },
    CheckDef {
        name: "inverse-limit-bound",
        statement: "dim lim V_i <= sup dim V_i with certified stable subspaces",
        run: inverse_limit_bound,
    },
    CheckDef {
        name: "dcoh-finiteness",
        statement: "F-divided bundles on P^1: H^0_D <= rk and H^i_D = 0 for i >= 1",
        run: dcoh_finiteness,
    },
    CheckDef {
        name: "affine-pathology",
        statement: "degree-1 witness on A^1 is d - floor(d/p) and grows without bound",
        run: affine_pathology,
    },
    CheckDef { name: "determinism", statement: "seeded instances and simulations are reproducible", run: determinism },
];

pub fn check_names() -> Vec<&'static str> {
    CHECKS.iter().map(|c| c.name).collect()
}

/// Run the selected checks concurrently; results are sorted by name.
pub fn run_checks(config: &VerifyConfig) -> crate::Result<VerifyReport> {
    let extra = config.extra_field.clone().map(Field::new).transpose()?;
    let selected: Vec<(usize, &CheckDef)> = CHECKS
        .iter()
        .enumerate()
        .filter(|(_, c)| config.only.as_deref().is_none_or(|o| o == c.name))
        .collect();
    if selected.is_empty() {
        return Err(crate::Error::InvalidInput(format!(
            "unknown check {:?}; known checks: {}",
            config.only.as_deref().unwrap_or(""),
            check_names().join(", ")
        )));
    }
    let mut checks: Vec<CheckResult> = std::thread::scope(|s| {
        let handles: Vec<_> = selected
            .iter()
            .map(|&(i, def)| {
                let ctx = Ctx { seed: config.seed, stream: i as u64, extra: extra.clone(), fault: config.fault };
                s.spawn(move || {
                    let outcome = (def.run)(&ctx);
                    CheckResult {
                        name: def.name,
                        statement: def.statement,
                        cases: *outcome.as_ref().unwrap_or(&0),
                        passed: outcome.is_ok(),
                        failure: outcome.err(),
                    }
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("check thread panicked")).collect()
    });
    checks.sort_by_key(|c| c.name);
    Ok(VerifyReport { seed: config.seed, checks })
}

fn pascal_mod(n: usize, p: u64) -> Vec<Vec<u64>> {
    let mut t = vec![vec![0u64; n + 1]; n + 1];
    for l in 0..=n {
        t[l][0] = 1;
        for k in 1..=l {
            t[l][k] = (t[l - 1][k - 1] + t[l - 1][k]) % p;
        }
    }
    t
}

fn operator_algebra(ctx: &Ctx) -> Outcome {
    let mut cases = 0;
    for p in [2u64, 3, 5] {
        let f = Field::prime(p).unwrap();
        let mut table = pascal_mod(50, p);
        if ctx.fault == Some(Fault::CorruptRelationTable) {
            table[2][1] = (table[2][1] + 1) % p;
        }
        for k in 0..=25 {
            for l in 0..=25 {
                let c = DividedOperator::d(k).compose(&DividedOperator::d(l), &f);
                let expected = DividedOperator::d(k + l).scale(f.from_int(table[k + l][k] as i64), &f);
                if c != expected {
                    return Err(format!("p = {p}: D_{k} D_{l} = {} but the relation table gives {}", c.render(&f), expected.render(&f)));
                }
                for m in 0..=60 {
                    cases += 1;
                    let xm = Poly::monomial(f.one(), m);
                    let direct = xm.divided_derivative(l, &f).divided_derivative(k, &f);
                    if c.apply(&xm, &f) != direct {
                        return Err(format!("p = {p}: D_{k} D_{l} disagrees with D_{k}(D_{l}(x^{m}))"));
                    }
                }
            }
        }
    }
    Ok(cases)
}

fn lucas_binomials(_: &Ctx) -> Outcome {
    let mut cases = 0;
    for p in [2u64, 3, 5, 7] {
        let table = pascal_mod(200, p);
        for l in 0..=200u64 {
            for k in 0..=200u64 {
                cases += 1;
                let expected = if k <= l { table[l as usize][k as usize] } else { 0 };
                let got = binom_mod_p(l, k, p);
                if got != expected {
                    return Err(format!("C({l},{k}) mod {p}: digits give {got}, Pascal gives {expected}"));
                }
            }
        }
    }
    Ok(cases)
}

fn dmodule_roundtrip(ctx: &Ctx) -> Outcome {
    let mut rng = ctx.rng();
    let mut cases = 0;
    for case in 0..50 {
        let p = [2u64, 3][case % 2];
        let f = Field::prime(p).unwrap();
        let r = 1 + (case / 2) % 2;
        let n_levels = rng.gen_range(1..=3usize);
        let tower: Vec<_> = (0..n_levels).map(|_| gen::random_unimodular(&mut rng, r, 2, 1, &f)).collect();
        let fail = |what: String| format!("case {case} (p = {p}, r = {r}, N = {n_levels}): {what}");
        let m = dmod_from_tower(&tower, &f).map_err(|e| fail(e.to_string()))?;
        let report = validate_dmodule(&m, (p as usize).pow(n_levels as u32).min(8));
        if let Some(v) = report.violation {
            return Err(fail(format!("{} fails: {}", v.identity, v.detail)));
        }
        let levels: Vec<_> = (0..=n_levels as u32)
            .map(|n| extract_level(&m, n, 1))
            .collect::<crate::Result<_>>()
            .map_err(|e| fail(e.to_string()))?;
        for lv in &levels {
            let free = lv.certificate.rank == r && lv.certificate.invariant_factors.iter().all(|a| *a == Poly::one());
            if !free {
                return Err(fail(format!("level {} lacks a rank-{r} freeness certificate", lv.n)));
            }
        }
        let isos: Vec<_> = (0..n_levels)
            .map(|n| verify_fdiv_iso(&m, &levels[n + 1], &levels[n]))
            .collect::<crate::Result<_>>()
            .map_err(|e| fail(e.to_string()))?;
        check_tower_up_to_units(&tower, &levels, &isos, &f).map_err(|e| fail(e.to_string()))?;
        cases += 1;
    }
    Ok(cases)
}

fn h0_monotone(ctx: &Ctx) -> Outcome {
    let mut rng = ctx.rng();
    for case in 0..50 {
        let f = Field::prime([2u64, 3][case % 2]).unwrap();
        let r = rng.gen_range(1..=3);
        let top = gen::random_bundle(&mut rng, r, -3, 3, &f);
        let tower = FdivTowerP1::from_top(top, 2, &f);
        let rep = check_h0_decreasing(&tower, &f).map_err(|e| e.to_string())?;
        if !rep.passed {
            return Err(format!("case {case}: h^0 along the tower is {:?}", rep.values));
        }
        for (b, &h) in tower.bundles().iter().zip(&rep.values) {
            let bott = birkhoff_factor(b, &f).map_err(|e| e.to_string())?.splitting().bott_h0(0);
            if bott != h {
                return Err(format!("case {case}: Cech h^0 = {h} but the splitting gives {bott}"));
            }
        }
    }
    Ok(50)
}

fn fdiv_rigidity_check(ctx: &Ctx) -> Outcome {
    let mut rng = ctx.rng();
    let mut cases = 0;
    for case in 0..30 {
        let p = [2u64, 3][case % 2];
        let f = Field::prime(p).unwrap();
        let r = rng.gen_range(1..=3);
        let depth = rng.gen_range(1..=3usize);
        let tower = FdivTowerP1::from_top(gen::random_bundle(&mut rng, r, -3, 3, &f), depth, &f);
        let divisor = (p as i64).pow(depth as u32);
        let rig = fdiv_rigidity(&tower, &f).map_err(|e| format!("truncated case {case}: {e}"))?;
        let deg = check_numerical_triviality(&tower, &f).map_err(|e| e.to_string())?;
        let exps_ok = rig.splittings[0].exponents().iter().all(|a| a % divisor == 0);
        if !deg.passed || deg.degrees[0] % divisor != 0 || !exps_ok || rig.divisor != Some(divisor) {
            return Err(format!("truncated case {case}: E_0 splits as {} with p^N = {divisor}", rig.splittings[0]));
        }
        cases += 1;
    }
    let fields = ctx.fields(&[FieldSpec::prime(2), FieldSpec::prime(3), FieldSpec::extension(2, vec![1, 1, 1])]);
    for case in 0..20 {
        let f = &fields[case % fields.len()];
        let (r, period) = (rng.gen_range(1..=3), rng.gen_range(1..=3));
        let tower = gen::random_periodic_p1_tower(&mut rng, r, period, f);
        let deg = check_numerical_triviality(&tower, f).map_err(|e| format!("periodic case {case}: {e}"))?;
        let rig = fdiv_rigidity(&tower, f).map_err(|e| format!("periodic case {case}: {e}"))?;
        if !deg.passed || !rig.splittings.iter().all(|s| s.is_trivial()) {
            return Err(format!("periodic case {case}: nontrivial level"));
        }
        cases += 1;
    }
    let f = Field::prime(2).unwrap();
    for a in [1i64, -2] {
        let b = BundleP1::split(&[a], &f).unwrap();
        if FdivTowerP1::periodic(vec![b.clone()], vec![Mat::identity(1)], &f).is_ok() {
            return Err(format!("a periodic tower on O({a}) was accepted"));
        }
        if check_numerical_triviality(&FdivTowerP1::periodic_unchecked(vec![b], vec![Mat::identity(1)]), &f).is_ok() {
            return Err(format!("degree check accepted a periodic tower on O({a})"));
        }
        cases += 1;
    }
    Ok(cases)
}

fn hilbert_polynomial(ctx: &Ctx) -> Outcome {
    let mut rng = ctx.rng();
    let fields = ctx.fields(&[FieldSpec::prime(2), FieldSpec::prime(3), FieldSpec::extension(2, vec![1, 1, 1])]);
    let mut cases = 0;
    for case in 0..30 {
        let f = &fields[case % fields.len()];
        let r = rng.gen_range(1..=3);
        let tower = if case % 3 == 2 {
            let period = rng.gen_range(1..=3);
            gen::random_periodic_p1_tower(&mut rng, r, period, f)
        } else {
            FdivTowerP1::from_top(gen::random_degree_zero_bundle(&mut rng, r, 3, f), 2, f)
        };
        for (n, b) in tower.bundles().iter().enumerate() {
            for t in -5..=5 {
                cases += 1;
                let chi = euler_char(b, t, f).map_err(|e| e.to_string())?;
                if chi != r as i64 * (t + 1) {
                    return Err(format!("case {case}, level {n}: chi(E({t})) = {chi}, expected {}", r as i64 * (t + 1)));
                }
            }
        }
    }
    Ok(cases)
}

fn splitting_oracle(ctx: &Ctx) -> Outcome {
    let mut rng = ctx.rng();
    for case in 0..100 {
        let f = Field::prime([2u64, 3, 5][case % 3]).unwrap();
        let r = rng.gen_range(1..=3);
        let e = gen::random_bundle(&mut rng, r, -3, 3, &f);
        let fac = birkhoff_factor(&e, &f).map_err(|e| format!("case {case}: {e}"))?;
        if fac.product(&f) != *e.transition() {
            return Err(format!("case {case}: U diag V differs from T"));
        }
        let oracle = splitting_from_h0(&e, &f).map_err(|e| format!("case {case}: {e}"))?;
        if oracle != fac.splitting() {
            return Err(format!("case {case}: Birkhoff gives {}, h^0 gives {oracle}", fac.splitting()));
        }
    }
    Ok(100)
}

fn signed_sum(v: impl IntoIterator<Item = (usize, usize)>) -> i64 {
    v.into_iter().map(|(deg, d)| if deg % 2 == 0 { d as i64 } else { -(d as i64) }).sum()
}

fn spectral_bounds(ctx: &Ctx) -> Outcome {
    let mut rng = ctx.rng();
    for case in 0..1000 {
        let page = random_page(&mut rng, 5, 4);
        let seed = rng.gen();
        let sim = simulate(&page, seed);
        for (n, &h) in sim.abutment.iter().enumerate() {
            if h > bound_upper(&page, n) {
                return Err(format!("case {case}: H^{n} = {h} exceeds {}", bound_upper(&page, n)));
            }
            let edge = bound_edge(&page, n, h);
            if !edge.passed {
                return Err(format!("case {case}: E_2^({n},0) = {} exceeds {}", edge.edge, edge.bound));
            }
        }
        let chi = page.euler_characteristic();
        if signed_sum(sim.abutment.iter().copied().enumerate()) != chi {
            return Err(format!("case {case}: Euler characteristic of the abutment differs from E_2"));
        }
        for (k, pg) in sim.pages.iter().enumerate() {
            if signed_sum(pg.iter().map(|(&(s, t), &d)| (s + t, d))) != chi {
                return Err(format!("case {case}: Euler characteristic changed on page {}", k + 2));
            }
        }
    }
    Ok(1000)
}

fn inverse_limit_bound(ctx: &Ctx) -> Outcome {
    let mut rng = ctx.rng();
    let fields = ctx.fields(&[FieldSpec::prime(2), FieldSpec::prime(3), FieldSpec::extension(2, vec![1, 1, 1])]);
    for case in 0..200 {
        let f = &fields[case % fields.len()];
        let t = gen::random_twisted_tower(&mut rng, 6, f);
        let fail = |what: String| format!("case {case}: {what}");
        let b = bound_check(&t, f).map_err(|e| fail(e.to_string()))?;
        if !b.passed {
            return Err(fail(format!("dim lim = {} > sup = {}", b.lim, b.sup)));
        }
        let ml = check_ml(&t, f).map_err(|e| fail(e.to_string()))?;
        for st in &ml.levels {
            let i = st.level;
            let img = |j: usize| t.composite(j, i, f).image(&Subspace::full(t.dim(j)), f);
            if img(st.stable_from()) != st.subspace || (st.depth > 0 && img(st.stable_from() - 1) == st.subspace) {
                return Err(fail(format!("level {i}: stabilization depth {} is wrong", st.depth)));
            }
            if let TowerShape::Periodic { period, .. } = t.shape() {
                if img(st.stable_from() + period) != st.subspace {
                    return Err(fail(format!("level {i}: image keeps shrinking past depth {}", st.depth)));
                }
            }
        }
        if t.is_exact() {
            let lim = lim_dim(&t, f).map_err(|e| fail(e.to_string()))?;
            let elems = limit_elements(&t, f).map_err(|e| fail(e.to_string()))?;
            if elems.len() != lim.dim || !elems.iter().all(|s| is_compatible_sequence(&t, s, f)) {
                return Err(fail("limit elements do not form compatible sequences".into()));
            }
        }
    }
    Ok(200)
}

fn dcoh_finiteness(ctx: &Ctx) -> Outcome {
    let mut rng = ctx.rng();
    let fields = ctx.fields(&[
        FieldSpec::prime(2),
        FieldSpec::prime(3),
        FieldSpec::prime(5),
        FieldSpec::extension(2, vec![1, 1, 1]),
    ]);
    let mut cases = 0;
    for case in 0..40 {
        let f = &fields[case % fields.len()];
        let r = rng.gen_range(1..=3);
        let period = rng.gen_range(1..=3);
        let tower = gen::random_periodic_p1_tower(&mut rng, r, period, f);
        let fail = |what: String| format!("case {case} (rank {r}): {what}");
        let set = build_towers_p1(&tower, 2, f).map_err(|e| fail(e.to_string()))?;
        let dims = dcoh_dims(&set, f).map_err(|e| fail(e.to_string()))?;
        for d in &dims {
            let bound_ok = if d.degree == 0 { d.dim <= r } else { d.dim == 0 };
            let ml_ok = d.r1lim == 0 && d.certificate.as_ref().is_none_or(|c| c.holds);
            if !bound_ok || !ml_ok || !d.exact {
                return Err(fail(format!("H^{}_D = {} (lim {}, R^1 lim {})", d.degree, d.dim, d.lim, d.r1lim)));
            }
        }
        cases += 1;
    }
    // gauge invariance: C and A C Frob(A)^{-1} on the trivial bundle
    for case in 0..10 {
        let f = &fields[case % fields.len()];
        let r = rng.gen_range(1..=3);
        let c = gen::random_invertible(&mut rng, r, f);
        let a = gen::random_invertible(&mut rng, r, f);
        let gauged = a.mul(&c, f).mul(&a.frobenius(1, f).inverse(f).unwrap(), f);
        let triv = BundleP1::trivial(r, f).unwrap();
        let lim_of = |iso: Mat| -> crate::Result<usize> {
            let t = FdivTowerP1::periodic(vec![triv.clone()], vec![iso], f)?;
            Ok(lim_dim(&build_towers_p1(&t, 0, f)?.towers[0], f)?.dim)
        };
        let (x, y) = (lim_of(c).map_err(|e| e.to_string())?, lim_of(gauged).map_err(|e| e.to_string())?);
        if x != y {
            return Err(format!("gauge case {case}: lim dims {x} and {y} differ"));
        }
        cases += 1;
    }
    Ok(cases)
}

fn affine_pathology(_: &Ctx) -> Outcome {
    let mut cases = 0;
    for p in [2u64, 3] {
        let ladder: Vec<usize> = (1..=4).map(|j| (p as usize).pow(j)).collect();
        let mut prev = None;
        for &d in &ladder {
            cases += 1;
            let w = h1d_affine_witness(p, d).map_err(|e| e.to_string())?;
            if w != d - d / p as usize {
                return Err(format!("p = {p}, d = {d}: witness {w}, expected {}", d - d / p as usize));
            }
            if prev.is_some_and(|q| w <= q) {
                return Err(format!("p = {p}: witness stops growing at d = {d}"));
            }
            prev = Some(w);
        }
        let m = DModulePresentation::trivial(Field::prime(p).unwrap(), 1, 4).map_err(|e| e.to_string())?;
        match finiteness_report_affine(&m, &ladder).map_err(|e| e.to_string())? {
            FinitenessReport::Affine { truncations, growth_observed } => {
                let same = truncations.iter().all(|t| t.witness == t.degree - t.degree / p as usize);
                if !growth_observed || !same {
                    return Err(format!("p = {p}: module witnesses disagree with the monomial count"));
                }
            }
            FinitenessReport::P1 { .. } => unreachable!(),
        }
        cases += 1;
    }
    Ok(cases)
}

fn determinism(ctx: &Ctx) -> Outcome {
    let sample = || {
        let mut rng = ctx.rng();
        let f = Field::prime(3).unwrap();
        let mut out = Vec::new();
        for _ in 0..20 {
            let page = random_page(&mut rng, 5, 4);
            let seed = rng.gen();
            let sim = simulate(&page, seed);
            out.push(json!({"page": encode_page(&page), "abutment": sim.abutment}));
            out.push(encode_poly_matrix(&gen::random_unimodular(&mut rng, 2, 2, 1, &f), &f));
        }
        serde_json::to_string(&out).unwrap()
    };
    if sample() != sample() {
        return Err("two runs with the same seed differ".into());
    }
    Ok(20)
}
