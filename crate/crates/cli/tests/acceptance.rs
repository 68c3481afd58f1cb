//! Acceptance suite: twelve criteria, one PASS/FAIL line each. Every check
//! compares library output against an oracle computed here by other means.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command;
use std::time::Instant;

use fdiv_core::arith::binom_mod_p;
use fdiv_core::bundle_p1::{
    birkhoff_factor, birkhoff_split, cech_h, check_numerical_triviality, fdiv_rigidity, splitting_from_h0, BundleP1,
    FdivTowerP1,
};
use fdiv_core::dcoh::{build_towers_p1, finiteness_report_p1, FinitenessReport};
use fdiv_core::diffops::DividedOperator;
use fdiv_core::dmod::{dmod_from_tower, extract_level, h1d_affine_witness, validate_dmodule, verify_fdiv_iso};
use fdiv_core::gen;
use fdiv_core::laurent::{LaurentMatrix, LaurentPoly};
use fdiv_core::linalg::{Mat, Subspace};
use fdiv_core::poly::{Poly, PolyMatrix};
use fdiv_core::spectral::{random_page, simulate};
use fdiv_core::towers::{check_ml, lim_dim, TowerShape, TwistedTower};
use fdiv_core::{Fe, Field, FieldSpec};
use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn rng(stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(0xacce_97);
    r.set_stream(stream);
    r
}

fn gf(p: u64) -> Field {
    Field::prime(p).unwrap()
}

fn f4() -> Field {
    Field::new(FieldSpec::extension(2, vec![1, 1, 1])).unwrap()
}

fn big_binom(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::from(0u32);
    }
    let mut acc = BigUint::from(1u32);
    for i in 0..k {
        acc = acc * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    acc
}

fn big_mod(n: u64, k: u64, p: u64) -> u64 {
    (big_binom(n, k) % BigUint::from(p)).try_into().unwrap()
}

fn xpow(m: usize) -> Poly {
    Poly::monomial(Fe::ONE, m)
}

fn operator_algebra() -> Outcome {
    let mut cases = 0;
    for p in [2u64, 3, 5] {
        let f = gf(p);
        for k in 0..=25usize {
            for l in 0..=25usize {
                let c = DividedOperator::d(k).compose(&DividedOperator::d(l), &f);
                let coef = big_mod((k + l) as u64, k as u64, p);
                let expected = DividedOperator::d(k + l).scale(f.from_int(coef as i64), &f);
                ensure(c == expected, || format!("p={p}: D_{k} D_{l} = {}", c.render(&f)))?;
                for m in 0..=60usize {
                    // D_k D_l x^m = C(m,l) C(m-l,k) x^{m-k-l}
                    let want = if k + l <= m {
                        let a = big_binom(m as u64, l as u64) * big_binom((m - l) as u64, k as u64) % BigUint::from(p);
                        let a: u64 = a.try_into().unwrap();
                        Poly::monomial(f.from_int(a as i64), m - k - l)
                    } else {
                        Poly::zero()
                    };
                    ensure(c.apply(&xpow(m), &f) == want, || format!("p={p}: D_{k} D_{l} on x^{m}"))?;
                    cases += 1;
                }
            }
        }
    }
    Ok(format!("{cases} operator/monomial checks"))
}

fn lucas() -> Outcome {
    let mut cases = 0;
    for p in [2u64, 3, 5, 7] {
        for l in 0..=200u64 {
            for k in 0..=200u64 {
                let want = big_mod(l, k, p);
                ensure(binom_mod_p(l, k, p) == want, || format!("C({l},{k}) mod {p}"))?;
                cases += 1;
            }
        }
    }
    Ok(format!("{cases} binomials"))
}

fn pow_poly(a: &Poly, e: usize, f: &Field) -> Poly {
    (0..e).fold(Poly::one(), |acc, _| acc.mul(a, f))
}

/// `A_0 A_1^{(p)} ... A_{n-1}^{(p^{n-1})}` with each entry raised to the
/// power by repeated multiplication.
fn twisted_product(tower: &[PolyMatrix], n: usize, f: &Field) -> PolyMatrix {
    let r = tower[0].rows();
    let p = f.p() as usize;
    let mut acc = PolyMatrix::identity(r);
    for (k, a) in tower.iter().take(n).enumerate() {
        acc = acc.mul(&a.map(|e| pow_poly(e, p.pow(k as u32), f)), f);
    }
    acc
}

fn in_subring(m: &PolyMatrix, q: usize) -> bool {
    (0..m.rows()).all(|i| (0..m.cols()).all(|j| m.get(i, j).coeffs().iter().enumerate().all(|(e, a)| a.is_zero() || e % q == 0)))
}

fn roundtrip() -> Outcome {
    let mut rng = rng(3);
    let mut cases = 0;
    for case in 0..60 {
        let p = [2u64, 3][case % 2];
        let f = gf(p);
        let r = 1 + (case / 2) % 2;
        let big_n = 1 + (case / 4) % 3;
        let tower: Vec<PolyMatrix> = (0..big_n).map(|_| gen::random_unimodular(&mut rng, r, 2, 1, &f)).collect();
        let tag = format!("case {case} (p={p}, r={r}, N={big_n})");
        let m = dmod_from_tower(&tower, &f).map_err(|e| format!("{tag}: {e}"))?;
        ensure(validate_dmodule(&m, 4).passed(), || format!("{tag}: validation failed"))?;
        let mut units = Vec::new();
        let mut levels = Vec::new();
        for n in 0..=big_n {
            let lv = extract_level(&m, n as u32, 1).map_err(|e| format!("{tag}: level {n}: {e}"))?;
            let cert = &lv.certificate;
            ensure(cert.rank == r && cert.invariant_factors.iter().all(|a| *a == Poly::one()), || {
                format!("{tag}: level {n} freeness certificate")
            })?;
            let det = lv.generators.det(&f);
            ensure(det.is_constant() && !det.is_zero(), || format!("{tag}: level {n} generators not a basis"))?;
            // same k[x^{p^n}]-span as the twisted product
            let q = (p as usize).pow(n as u32);
            let u = twisted_product(&tower, n, &f).inverse(&f).unwrap().mul(&lv.generators, &f);
            ensure(in_subring(&u, q), || format!("{tag}: level {n} differs from the tower columns"))?;
            units.push(u);
            levels.push(lv);
        }
        for n in 0..big_n {
            let iso = verify_fdiv_iso(&m, &levels[n + 1], &levels[n]).map_err(|e| format!("{tag}: {e}"))?;
            let q = (p as usize).pow(n as u32);
            let lhs = units[n].mul(&iso.change_of_basis, &f).mul(&units[n + 1].inverse(&f).unwrap(), &f);
            let want = tower[n].map(|e| pow_poly(e, q, &f));
            ensure(lhs == want, || format!("{tag}: comparison {n} does not reproduce A_{n}"))?;
        }
        cases += 1;
    }
    Ok(format!("{cases} towers"))
}

/// `A(x) diag(x^a) B(1/x)` with random unipotent `A`, `B`: splitting `a`.
fn hidden_bundle(rng: &mut ChaCha8Rng, exps: &[i64], f: &Field) -> BundleP1 {
    let r = exps.len();
    let mut a = LaurentMatrix::identity(r);
    let mut b = LaurentMatrix::identity(r);
    if r >= 2 {
        for _ in 0..2 {
            let i = rng.gen_range(0..r);
            let j = (i + rng.gen_range(1..r)) % r;
            let pa = LaurentPoly::from_terms((0..=2).map(|e| (e, gen::random_element(rng, f))), f);
            let pb = LaurentPoly::from_terms((-2..=0).map(|e| (e, gen::random_element(rng, f))), f);
            let mut ea = LaurentMatrix::identity(r);
            ea.set(i, j, pa);
            let mut eb = LaurentMatrix::identity(r);
            eb.set(j, i, pb);
            a = a.mul(&ea, f);
            b = eb.mul(&b, f);
        }
    }
    let t = a.mul(&LaurentMatrix::diagonal_monomials(exps), f).mul(&b, f);
    BundleP1::new(t, f).unwrap()
}

fn sorted_desc(mut v: Vec<i64>) -> Vec<i64> {
    v.sort_unstable_by(|a, b| b.cmp(a));
    v
}

fn bott_h0(exps: &[i64], t: i64) -> usize {
    exps.iter().map(|&a| (a + t + 1).max(0) as usize).sum()
}

fn random_exps(rng: &mut ChaCha8Rng, r: usize) -> Vec<i64> {
    (0..r).map(|_| rng.gen_range(-3..=3)).collect()
}

fn h0_monotone() -> Outcome {
    let mut rng = rng(4);
    for case in 0..60 {
        let p = [2u64, 3][case % 2];
        let f = gf(p);
        let r = rng.gen_range(1..=3);
        let exps = random_exps(&mut rng, r);
        let top = hidden_bundle(&mut rng, &exps, &f);
        let tower = FdivTowerP1::from_top(top, 2, &f);
        let mut prev = usize::MAX;
        for (n, e) in tower.bundles().iter().enumerate() {
            let h = cech_h(e, 0, 0, &f).map_err(|e| e.to_string())?;
            let scale = (p as i64).pow(2 - n as u32);
            let level_exps: Vec<i64> = exps.iter().map(|a| a * scale).collect();
            ensure(h == bott_h0(&level_exps, 0), || format!("case {case}: h^0(E_{n}) = {h}"))?;
            ensure(h <= prev, || format!("case {case}: h^0 increases at level {n}"))?;
            prev = h;
        }
    }
    Ok("60 towers of length 3".into())
}

fn rigidity() -> Outcome {
    let mut rng = rng(5);
    for case in 0..45 {
        let p = [2u64, 3, 5][case % 3];
        let f = gf(p);
        let r = rng.gen_range(1..=3);
        let big_n = 1 + case % 3;
        let exps = random_exps(&mut rng, r);
        let tower = FdivTowerP1::from_top(hidden_bundle(&mut rng, &exps, &f), big_n, &f);
        let d = (p as i64).pow(big_n as u32);
        let e0 = &tower.bundles()[0];
        let split = birkhoff_split(e0, &f).map_err(|e| e.to_string())?;
        ensure(split.exponents() == sorted_desc(exps.iter().map(|a| a * d).collect()), || format!("case {case}: E_0 splits as {split}"))?;
        ensure(split.exponents().iter().all(|a| a % d == 0) && e0.degree() % d == 0, || format!("case {case}: not divisible by {d}"))?;
        let rig = fdiv_rigidity(&tower, &f).map_err(|e| e.to_string())?;
        ensure(rig.divisor == Some(d) && check_numerical_triviality(&tower, &f).unwrap().passed, || format!("case {case}: report"))?;
    }
    let fields = [gf(2), gf(3), f4()];
    for case in 0..30 {
        let f = &fields[case % 3];
        let r = rng.gen_range(1..=3);
        let period = rng.gen_range(1..=3);
        let tower = gen::random_periodic_p1_tower(&mut rng, r, period, f);
        for b in tower.bundles() {
            // trivial iff h^0(E) = r and h^0(E(-1)) = 0
            let trivial = cech_h(b, 0, 0, f).unwrap() == r && cech_h(b, 0, -1, f).unwrap() == 0;
            ensure(b.degree() == 0 && trivial, || format!("periodic case {case}: nontrivial level"))?;
        }
        ensure(fdiv_rigidity(&tower, f).is_ok(), || format!("periodic case {case}: rigidity report failed"))?;
    }
    let f = gf(3);
    for exps in [vec![1], vec![-1], vec![2, 0], vec![1, -1]] {
        let b = BundleP1::split(&exps, &f).unwrap();
        let r = exps.len();
        ensure(FdivTowerP1::periodic(vec![b], vec![Mat::identity(r)], &f).is_err(), || format!("periodic tower on {exps:?} accepted"))?;
    }
    Ok("45 truncated, 30 periodic, 4 rejections".into())
}

fn hilbert() -> Outcome {
    let mut rng = rng(6);
    let fields = [gf(2), gf(3), f4()];
    let mut levels = 0;
    for case in 0..45 {
        let f = &fields[case % 3];
        let r = rng.gen_range(1..=3);
        let tower = if case % 3 == 0 {
            let period = rng.gen_range(1..=3);
            gen::random_periodic_p1_tower(&mut rng, r, period, f)
        } else {
            let mut exps = random_exps(&mut rng, r);
            let s: i64 = exps.iter().sum();
            exps.push(-s);
            FdivTowerP1::from_top(hidden_bundle(&mut rng, &exps, f), 2, f)
        };
        for (n, b) in tower.bundles().iter().enumerate() {
            let rk = b.rank() as i64;
            for t in -5..=5 {
                let chi = cech_h(b, 0, t, f).unwrap() as i64 - cech_h(b, 1, t, f).unwrap() as i64;
                ensure(chi == rk * (t + 1), || format!("case {case}, level {n}, t = {t}: chi = {chi}"))?;
            }
            levels += 1;
        }
    }
    Ok(format!("{levels} levels, t in [-5,5]"))
}

fn splitting_oracle() -> Outcome {
    let mut rng = rng(7);
    for case in 0..120 {
        let f = gf([2u64, 3, 5][case % 3]);
        let r = rng.gen_range(1..=3);
        let exps = random_exps(&mut rng, r);
        let e = hidden_bundle(&mut rng, &exps, &f);
        let fac = birkhoff_factor(&e, &f).map_err(|e| e.to_string())?;
        ensure(fac.product(&f).sub(e.transition(), &f).is_zero(), || format!("case {case}: nonzero residual"))?;
        let oracle = splitting_from_h0(&e, &f).map_err(|e| e.to_string())?;
        ensure(fac.splitting() == oracle, || format!("case {case}: {} vs {oracle}", fac.splitting()))?;
        ensure(oracle.exponents() == sorted_desc(exps), || format!("case {case}: hidden splitting not recovered"))?;
    }
    Ok("120 transition matrices".into())
}

fn spectral() -> Outcome {
    let mut rng = rng(8);
    for case in 0..1000 {
        let page = random_page(&mut rng, 5, 4);
        let seed: u64 = rng.gen();
        let sim = simulate(&page, seed);
        let e2 = |s: i64, t: i64| page.get(s, t) as i64;
        let big_n = page.n() as i64;
        // replay every page from the recorded ranks
        let mut cur: std::collections::BTreeMap<(usize, usize), i64> = page.entries().map(|(k, d)| (k, d as i64)).collect();
        for (idx, r) in (2..=page.n() + 1).enumerate() {
            for (&(rr, s, t), &k) in &sim.ranks {
                if rr == r {
                    *cur.entry((s, t)).or_default() -= k as i64;
                    *cur.entry((s + r, t + 1 - r)).or_default() -= k as i64;
                }
            }
            cur.retain(|_, d| *d != 0);
            ensure(cur.values().all(|&d| d > 0), || format!("case {case}: negative dimension on page {}", r + 1))?;
            let got: std::collections::BTreeMap<(usize, usize), i64> = sim.pages[idx + 1].iter().map(|(&k, &d)| (k, d as i64)).collect();
            ensure(got == cur, || format!("case {case}: page {} disagrees with the ranks", r + 1))?;
        }
        let mut chi_h = 0;
        for (n, &h) in sim.abutment.iter().enumerate() {
            let n = n as i64;
            let h = h as i64;
            let upper: i64 = (0..=n).map(|s| e2(s, n - s)).sum();
            let edge_rhs = h + (2..=big_n + 1).map(|i| e2(n - i, i - 1)).sum::<i64>();
            ensure(h <= upper, || format!("case {case}: H^{n} = {h} > {upper}"))?;
            ensure(e2(n, 0) <= edge_rhs, || format!("case {case}: edge bound fails at n = {n}"))?;
            chi_h += if n % 2 == 0 { h } else { -h };
        }
        let chi_e2: i64 = page.entries().map(|((s, t), d)| if (s + t) % 2 == 0 { d as i64 } else { -(d as i64) }).sum();
        ensure(chi_h == chi_e2, || format!("case {case}: Euler characteristic {chi_h} vs {chi_e2}"))?;
    }
    Ok("1000 simulations".into())
}

/// Image of `f_{j,i}` by applying the maps one at a time.
fn image_by_steps(t: &TwistedTower, j: usize, i: usize, f: &Field) -> Subspace {
    let mut vecs: Vec<Vec<Fe>> = (0..t.dim(j)).map(|k| (0..t.dim(j)).map(|l| if l == k { Fe::ONE } else { Fe::ZERO }).collect()).collect();
    for n in (i..j).rev() {
        vecs = vecs.iter().map(|v| t.map(n).apply(v, f)).collect();
    }
    Subspace::span(t.dim(i), &vecs, f)
}

fn inverse_limit() -> Outcome {
    let mut rng = rng(9);
    let fields = [gf(2), gf(3), f4()];
    for case in 0..210 {
        let f = &fields[case % 3];
        let t = gen::random_twisted_tower(&mut rng, 6, f);
        let lim = lim_dim(&t, f).map_err(|e| format!("case {case}: {e}"))?;
        let sup = t.dims().iter().copied().max().unwrap();
        ensure(lim.dim <= sup, || format!("case {case}: lim {} > sup {sup}", lim.dim))?;
        let ml = check_ml(&t, f).map_err(|e| e.to_string())?;
        let period = match t.shape() {
            TowerShape::Periodic { period, .. } => Some(period),
            TowerShape::Truncated => None,
        };
        for st in &ml.levels {
            let i = st.level;
            let at = st.level + st.depth;
            ensure(image_by_steps(&t, at, i, f) == st.subspace, || format!("case {case}: level {i} certificate"))?;
            if st.depth > 0 {
                ensure(image_by_steps(&t, at - 1, i, f) != st.subspace, || format!("case {case}: level {i} depth not minimal"))?;
            }
            if let Some(m) = period {
                for k in 1..=2 {
                    ensure(image_by_steps(&t, at + k * m, i, f) == st.subspace, || format!("case {case}: level {i} keeps shrinking"))?;
                }
            }
        }
    }
    Ok("210 towers".into())
}

fn dcoh_finiteness() -> Outcome {
    let mut rng = rng(10);
    let fields = [gf(2), gf(3), gf(5), f4(), Field::new(FieldSpec::extension(3, vec![1, 0, 1])).unwrap()];
    for case in 0..60 {
        let f = &fields[case % fields.len()];
        let r = rng.gen_range(1..=3);
        let period = rng.gen_range(1..=3);
        let tower = gen::random_periodic_p1_tower(&mut rng, r, period, f);
        let set = build_towers_p1(&tower, 2, f).map_err(|e| format!("case {case}: {e}"))?;
        // every degree-0 transition is an invertible semilinear map, so the limit is all of k^r
        let bijective = set.towers[0].maps().iter().all(|m| m.matrix.rows() == r && m.matrix.inverse(f).is_some());
        let FinitenessReport::P1 { degrees, .. } = finiteness_report_p1(&tower, 2, f).map_err(|e| e.to_string())? else {
            unreachable!()
        };
        for d in &degrees {
            ensure(d.dim == d.lim + d.r1lim && d.exact, || format!("case {case}: degree {} not assembled exactly", d.degree))?;
            ensure(d.r1lim == 0 && d.certificate.as_ref().is_none_or(|c| c.holds && !c.levels.is_empty()), || {
                format!("case {case}: R^1 lim not certified zero")
            })?;
            let want = if d.degree == 0 { r } else { 0 };
            ensure(d.dim <= r && (d.degree == 0 || d.dim == 0), || format!("case {case}: H^{}_D = {}", d.degree, d.dim))?;
            ensure(!bijective || d.dim == want, || format!("case {case}: H^{}_D = {}, expected {want}", d.degree, d.dim))?;
        }
        ensure(bijective, || format!("case {case}: degree-0 transitions not invertible"))?;
        for b in tower.bundles() {
            ensure(cech_h(b, 1, 0, f).unwrap() == 0, || format!("case {case}: h^1 of a level is nonzero"))?;
        }
    }
    Ok("60 periodic towers".into())
}

fn affine_pathology() -> Outcome {
    for p in [2u64, 3] {
        let mut prev = 0;
        for j in 1..=4 {
            let d = (p as usize).pow(j);
            let w = h1d_affine_witness(p, d).map_err(|e| e.to_string())?;
            let monomials_off_subring = (0..=d).filter(|l| l % p as usize != 0).count();
            ensure(w == monomials_off_subring && w == d - d / p as usize, || format!("p={p}, d={d}: witness {w}"))?;
            ensure(w > prev, || format!("p={p}: not strictly increasing at d={d}"))?;
            prev = w;
        }
    }
    Ok("p in {2,3}, d in {p..p^4}".into())
}

fn determinism() -> Outcome {
    let run = || {
        Command::new(env!("CARGO_BIN_EXE_fdiv")).args(["verify-paper", "--seed", "42"]).output().expect("binary runs")
    };
    let (a, b) = (run(), run());
    ensure(a.status.success() && b.status.success(), || format!("exit codes {:?} {:?}", a.status.code(), b.status.code()))?;
    ensure(a.stdout == b.stdout && !a.stdout.is_empty(), || "reports differ".into())?;
    Ok(format!("{} identical bytes", a.stdout.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 12] = [
        ("operator algebra", operator_algebra),
        ("lucas binomials", lucas),
        ("d-module / tower roundtrip", roundtrip),
        ("h0 monotone on P^1", h0_monotone),
        ("rigidity", rigidity),
        ("hilbert polynomial", hilbert),
        ("splitting oracle agreement", splitting_oracle),
        ("spectral sequence bounds", spectral),
        ("inverse limit bound", inverse_limit),
        ("d-cohomology finiteness", dcoh_finiteness),
        ("affine pathology", affine_pathology),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {:>2}  PASS  {name:<28} {detail} ({secs:.2}s)", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2}  FAIL  {name:<28} {why} ({secs:.2}s)", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
