use std::path::Path;

use fdiv_core::bundle_p1::{
    birkhoff_factor, cech_h, check_h0_decreasing, check_numerical_triviality, euler_char, fdiv_rigidity,
    splitting_from_h0,
};
use fdiv_core::dcoh::{
    dcoh_dims, finiteness_report_affine, finiteness_report_p1, CohomologyTowerSet, DcohDegree, FinitenessReport,
    Provenance, DEFAULT_DEGREE_CAP,
};
use fdiv_core::diffops::DividedOperator;
use fdiv_core::dmod::{dmod_from_tower, extract_level_with_cap, validate_dmodule, EXTRACTION_DOUBLINGS};
use fdiv_core::json::{self as js, envelope};
use fdiv_core::spectral::{bound_edge, bound_upper, random_page, simulate, SpectralPage};
use fdiv_core::towers::{bound_check, check_ml, lim_dim, r1lim_dim, stable_subspace, MlReport};
use fdiv_core::verify::{run_checks, Fault, VerifyConfig};
use fdiv_core::{arith::binom_mod_p, Field, FieldSpec};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::{Cli, CliError, Command, DcohCmd, DiffopCmd, DmodCmd, FaultArg, P1Cmd, SpectralCmd, TowerCmd};

pub struct Output {
    pub value: Value,
    /// Replacement for the generic table rendering.
    pub table: Option<String>,
    /// Set when a check ran and failed.
    pub failure: Option<String>,
}

type Res = Result<Output, CliError>;

fn ok(seed: u64, body: Value) -> Res {
    Ok(Output { value: envelope(seed, body), table: None, failure: None })
}

fn checked(seed: u64, body: Value, failure: Option<String>) -> Res {
    Ok(Output { value: envelope(seed, body), table: None, failure })
}

/// Inline JSON if the argument starts with `{` or `[`, else a file path
/// (optionally prefixed with `@`).
fn load(arg: &str) -> Result<Value, CliError> {
    let trimmed = arg.trim_start();
    let (text, source) = if trimmed.starts_with('{') || trimmed.starts_with('[') {
        (arg.to_string(), "inline JSON".to_string())
    } else {
        let path = Path::new(arg.strip_prefix('@').unwrap_or(arg));
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
        (text, path.display().to_string())
    };
    js::parse(&text).map_err(|e| CliError::Usage(format!("{source}: {e}")))
}

fn field(cli: &Cli, p: Option<u64>) -> Result<Field, CliError> {
    if let Some(p) = p {
        return Ok(Field::prime(p)?);
    }
    match &cli.field {
        Some(s) => Ok(js::decode_field(&js::parse(s)?)?),
        None => Ok(Field::prime(2)?),
    }
}

/// A module file may name its field; it must agree with `--field` if both are given.
fn module_field(cli: &Cli, v: &Value) -> Result<Field, CliError> {
    match (v.get("field"), &cli.field) {
        (Some(fv), None) => Ok(js::decode_field(fv)?),
        (Some(fv), Some(_)) => {
            let f = field(cli, None)?;
            if js::decode_field(fv)?.spec() != f.spec() {
                return Err(CliError::Usage("module field differs from --field".into()));
            }
            Ok(f)
        }
        (None, _) => field(cli, None),
    }
}

fn load_module(cli: &Cli, arg: &str) -> Result<fdiv_core::dmod::DModulePresentation, CliError> {
    let v = load(arg)?;
    let f = module_field(cli, &v)?;
    Ok(js::decode_module(&v, &f)?)
}

pub fn run(cli: &Cli) -> Res {
    match &cli.command {
        Command::Diffop(c) => diffop(cli, c),
        Command::Dmod(c) => dmod(cli, c),
        Command::P1(c) => p1(cli, c),
        Command::Tower(c) => tower(cli, c),
        Command::Spectral(c) => spectral(cli, c),
        Command::Dcoh(c) => dcoh(cli, c),
        Command::VerifyPaper(a) => {
            let extra_field = match &cli.field {
                Some(s) => Some(serde_json::from_value::<FieldSpec>(js::parse(s)?).map_err(|e| CliError::Usage(e.to_string()))?),
                None => None,
            };
            let config = VerifyConfig {
                seed: cli.seed,
                only: a.only.clone(),
                extra_field,
                fault: a.inject_fault.map(|FaultArg::CorruptRelationTable| Fault::CorruptRelationTable),
            };
            let report = run_checks(&config)?;
            let failure = report.first_failure().map(|c| format!("{}: {}", c.name, c.failure.clone().unwrap_or_default()));
            Ok(Output { value: report.to_json(), table: Some(report.render_table()), failure })
        }
    }
}

fn diffop(cli: &Cli, c: &DiffopCmd) -> Res {
    match c {
        DiffopCmd::Apply { op, poly, p } => {
            let f = field(cli, *p)?;
            let d = js::decode_operator(&load(op)?, &f, "op")?;
            let g = js::decode_laurent(&load(poly)?, &f, "poly")?;
            let out = d.apply_laurent(&g, &f)?;
            ok(cli.seed, json!({"field": js::encode_field(&f), "result": js::encode_poly(&out, &f)}))
        }
        DiffopCmd::Compose { a, b, p, max_degree } => {
            let f = field(cli, *p)?;
            let a = js::decode_operator(&load(a)?, &f, "a")?;
            let b = js::decode_operator(&load(b)?, &f, "b")?;
            let c = a.compose_verified(&b, &f, *max_degree)?;
            ok(cli.seed, json!({"field": js::encode_field(&f), "result": js::encode_operator(&c, &f), "rendered": c.render(&f)}))
        }
        DiffopCmd::CheckRelations { p, max_order, max_degree } => {
            let f = field(cli, *p)?;
            let pp = f.p();
            let mut pairs = 0usize;
            let mut failure = None;
            'outer: for k in 0..=*max_order {
                for l in 0..=*max_order {
                    let c = DividedOperator::d(k).compose(&DividedOperator::d(l), &f);
                    let b = binom_mod_p((k + l) as u64, k as u64, pp);
                    if c != DividedOperator::d(k + l).scale(f.from_int(b as i64), &f) {
                        failure = Some(format!("D_{k} D_{l} = {}", c.render(&f)));
                        break 'outer;
                    }
                    if let Err(e) = DividedOperator::d(k).compose_verified(&DividedOperator::d(l), &f, Some(*max_degree)) {
                        failure = Some(format!("D_{k} D_{l}: {e}"));
                        break 'outer;
                    }
                    pairs += 1;
                }
            }
            checked(cli.seed, json!({"p": pp, "max_order": max_order, "max_degree": max_degree, "pairs_checked": pairs, "passed": failure.is_none()}), failure)
        }
    }
}

fn dmod(cli: &Cli, c: &DmodCmd) -> Res {
    match c {
        DmodCmd::Validate { module, degree } => {
            let m = load_module(cli, module)?;
            let rep = validate_dmodule(&m, *degree);
            let violation = rep.violation.as_ref().map(|v| json!({"identity": v.identity, "detail": v.detail}));
            let failure = rep.violation.map(|v| format!("{}: {}", v.identity, v.detail));
            checked(cli.seed, json!({"passed": failure.is_none(), "checks": rep.checks, "violation": violation}), failure)
        }
        DmodCmd::Extract { module, level, degree } => {
            let m = load_module(cli, module)?;
            let f = m.field().clone();
            let doublings = cli.cap.unwrap_or(EXTRACTION_DOUBLINGS);
            let lv = extract_level_with_cap(&m, &m.action_table(), *level, *degree, doublings)?;
            let cert = &lv.certificate;
            ok(
                cli.seed,
                json!({
                    "level": lv.n,
                    "scalar_power": lv.scalar_power,
                    "generators": js::encode_poly_matrix(&lv.generators, &f),
                    "leads": lv.leads,
                    "degree_bound": lv.degree_bound,
                    "certificate": {
                        "rank": cert.rank,
                        "invariant_factors": cert.invariant_factors.iter().map(|a| js::encode_poly(a, &f)).collect::<Vec<_>>(),
                        "det": js::encode_fe(cert.det, &f),
                    },
                }),
            )
        }
        DmodCmd::FromTower { tower } => {
            let f = field(cli, None)?;
            let t = js::decode_poly_tower(&load(tower)?, &f)?;
            let m = dmod_from_tower(&t, &f)?;
            ok(cli.seed, js::encode_module(&m))
        }
        DmodCmd::Witness { p, degree } => {
            let w = fdiv_core::dmod::h1d_affine_witness(*p, *degree)?;
            ok(cli.seed, json!({"p": p, "degree": degree, "witness": w}))
        }
    }
}

fn splitting_json(s: &fdiv_core::bundle_p1::SplittingType) -> Value {
    json!(s.exponents())
}

fn p1(cli: &Cli, c: &P1Cmd) -> Res {
    let f = field(cli, None)?;
    match c {
        P1Cmd::Split { bundle } => {
            let e = js::decode_bundle(&load(bundle)?, &f, "bundle")?;
            let fac = birkhoff_factor(&e, &f)?;
            let oracle = splitting_from_h0(&e, &f)?;
            let failure = (oracle != fac.splitting())
                .then(|| format!("Birkhoff gives {}, h^0 of twists gives {oracle}", fac.splitting()));
            checked(
                cli.seed,
                json!({
                    "splitting": splitting_json(&fac.splitting()),
                    "h0_oracle": splitting_json(&oracle),
                    "rank": e.rank(),
                    "degree": e.degree(),
                    "factors": {
                        "u": js::encode_laurent_matrix(&fac.u, &f),
                        "exponents": fac.exponents,
                        "v": js::encode_laurent_matrix(&fac.v, &f),
                    },
                }),
                failure,
            )
        }
        P1Cmd::Cohomology { bundle, i, twist } => {
            let e = js::decode_bundle(&load(bundle)?, &f, "bundle")?;
            ok(cli.seed, json!({"i": i, "twist": twist, "dim": cech_h(&e, *i, *twist, &f)?}))
        }
        P1Cmd::Pullback { bundle } => {
            let e = js::decode_bundle(&load(bundle)?, &f, "bundle")?;
            ok(cli.seed, json!({"bundle": js::encode_laurent_matrix(e.frobenius_pullback(&f).transition(), &f)}))
        }
        P1Cmd::CheckTower { tower } => {
            let t = js::decode_p1_tower(&load(tower)?, &f)?;
            let h0 = check_h0_decreasing(&t, &f)?;
            let deg = check_numerical_triviality(&t, &f)?;
            let rig = fdiv_rigidity(&t, &f)?;
            let failure = if !h0.passed {
                Some(format!("h^0 along the tower is {:?}", h0.values))
            } else if !deg.passed {
                Some(format!("degrees {:?} are not compatible with pullbacks", deg.degrees))
            } else {
                None
            };
            checked(
                cli.seed,
                json!({
                    "kind": if t.is_periodic() { "periodic" } else { "truncated" },
                    "h0": {"values": h0.values, "passed": h0.passed},
                    "degrees": {"values": deg.degrees, "forced_divisor": deg.forced_divisor, "passed": deg.passed},
                    "splittings": rig.splittings.iter().map(splitting_json).collect::<Vec<_>>(),
                    "divisor": rig.divisor,
                    "passed": failure.is_none(),
                }),
                failure,
            )
        }
        P1Cmd::Euler { bundle, twist } => {
            let e = js::decode_bundle(&load(bundle)?, &f, "bundle")?;
            ok(cli.seed, json!({"twist": twist, "euler": euler_char(&e, *twist, &f)?}))
        }
    }
}

fn ml_json(ml: &MlReport) -> Value {
    json!({
        "holds": ml.holds,
        "exact": ml.exact,
        "levels": ml.levels.iter().map(|s| json!({"level": s.level, "stable_dim": s.subspace.dim(), "depth": s.depth})).collect::<Vec<_>>(),
    })
}

fn tower(cli: &Cli, c: &TowerCmd) -> Res {
    let f = field(cli, None)?;
    let arg = match c {
        TowerCmd::Stable(a) | TowerCmd::Ml(a) | TowerCmd::Lim(a) | TowerCmd::R1lim(a) | TowerCmd::Bound(a) => a,
    };
    let t = js::decode_twisted_tower(&load(&arg.tower)?, &f, "tower")?;
    match c {
        TowerCmd::Stable(_) => {
            let levels: Vec<Value> = (0..t.listed_levels())
                .map(|i| {
                    let s = stable_subspace(&t, i, &f)?;
                    let basis: Vec<Value> = s.subspace.basis().iter().map(|v| json!(v.iter().map(|&a| js::encode_fe(a, &f)).collect::<Vec<_>>())).collect();
                    Ok(json!({"level": i, "dim": s.subspace.dim(), "basis": basis, "depth": s.depth, "exact": s.exact}))
                })
                .collect::<fdiv_core::Result<_>>()?;
            ok(cli.seed, json!({"levels": levels}))
        }
        TowerCmd::Ml(_) => ok(cli.seed, ml_json(&check_ml(&t, &f)?)),
        TowerCmd::Lim(_) => {
            let l = lim_dim(&t, &f)?;
            ok(cli.seed, json!({"dim": l.dim, "exact": l.exact, "from_level": l.from_level}))
        }
        TowerCmd::R1lim(_) => {
            let r = r1lim_dim(&t, &f)?;
            ok(cli.seed, json!({"dim": r.dim, "exact": t.is_exact(), "certificate": ml_json(&r.certificate)}))
        }
        TowerCmd::Bound(_) => {
            let b = bound_check(&t, &f)?;
            let failure = (!b.passed).then(|| format!("dim lim = {} exceeds sup dim = {}", b.lim, b.sup));
            checked(cli.seed, json!({"lim": b.lim, "sup": b.sup, "passed": b.passed}), failure)
        }
    }
}

fn spectral(cli: &Cli, c: &SpectralCmd) -> Res {
    match c {
        SpectralCmd::Bounds { page, n, abutment } => {
            let page = js::decode_page(&load(page)?)?;
            let upper = bound_upper(&page, *n);
            let mut body = json!({"n": n, "upper": upper});
            let mut failure = None;
            if let Some(a) = abutment {
                let h: Vec<usize> = serde_json::from_value(load(a)?)
                    .map_err(|e| CliError::Usage(format!("abutment must be a list of dimensions: {e}")))?;
                let hn = h.get(*n).copied().unwrap_or(0);
                let edge = bound_edge(&page, *n, hn);
                if hn > upper {
                    failure = Some(format!("H^{n} = {hn} exceeds the upper bound {upper}"));
                } else if !edge.passed {
                    failure = Some(format!("E_2^({n},0) = {} exceeds the edge bound {}", edge.edge, edge.bound));
                }
                body["h"] = json!(hn);
                body["edge"] = json!({"edge": edge.edge, "bound": edge.bound, "slack": edge.slack, "passed": edge.passed});
                body["passed"] = json!(failure.is_none());
            }
            checked(cli.seed, body, failure)
        }
        SpectralCmd::Simulate { page } => {
            let page: SpectralPage = match page {
                Some(p) => js::decode_page(&load(p)?)?,
                None => random_page(&mut ChaCha8Rng::seed_from_u64(cli.seed), 5, 4),
            };
            let sim = simulate(&page, cli.seed);
            let pages: Vec<Value> = sim
                .pages
                .iter()
                .map(|pg| json!(pg.iter().map(|(&(s, t), &d)| (format!("{s},{t}"), d)).collect::<std::collections::BTreeMap<_, _>>()))
                .collect();
            let ranks: Vec<Value> = sim.ranks.iter().map(|(&(r, s, t), &k)| json!({"r": r, "s": s, "t": t, "rank": k})).collect();
            ok(cli.seed, json!({"page": js::encode_page(&page), "ranks": ranks, "pages": pages, "abutment": sim.abutment}))
        }
    }
}

fn degrees_json(ds: &[DcohDegree]) -> Value {
    json!(ds
        .iter()
        .map(|d| json!({"degree": d.degree, "lim": d.lim, "r1lim": d.r1lim, "dim": d.dim, "exact": d.exact}))
        .collect::<Vec<_>>())
}

fn dcoh(cli: &Cli, c: &DcohCmd) -> Res {
    let f = field(cli, None)?;
    let cap = cli.cap.map_or(DEFAULT_DEGREE_CAP, |c| c as usize);
    match c {
        DcohCmd::P1 { tower } => {
            let t = js::decode_p1_tower(&load(tower)?, &f)?;
            let rep = finiteness_report_p1(&t, cap, &f)?;
            let FinitenessReport::P1 { rank, degrees } = &rep else { unreachable!() };
            ok(
                cli.seed,
                json!({"provenance": Provenance::P1Tower.as_str(), "rank": rank, "label": rep.label(), "degrees": degrees_json(degrees)}),
            )
        }
        DcohCmd::Affine { module, truncations } => {
            let m = load_module(cli, module)?;
            let rep = finiteness_report_affine(&m, truncations)?;
            let FinitenessReport::Affine { truncations, growth_observed } = &rep else { unreachable!() };
            let rows: Vec<Value> = truncations
                .iter()
                .map(|t| json!({"degree": t.degree, "h0": t.h0, "h0_complete": t.h0_complete, "witness": t.witness}))
                .collect();
            ok(
                cli.seed,
                json!({"provenance": Provenance::AffineTruncation.as_str(), "label": rep.label(), "growth_observed": growth_observed, "truncations": rows}),
            )
        }
        DcohCmd::FromTowers { towers } => {
            let towers = js::decode_tower_set(&load(towers)?, &f)?;
            let set = CohomologyTowerSet { towers, provenance: Provenance::UserSupplied };
            ok(cli.seed, json!({"provenance": set.provenance.as_str(), "degrees": degrees_json(&dcoh_dims(&set, &f)?)}))
        }
    }
}
