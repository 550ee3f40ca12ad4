//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

mod common;

use std::collections::{BTreeSet, HashSet};
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use egqel::egraph::EGraph;
use egqel::error::Error;
use egqel::extraction::{is_admissible, to_formula, Extractor, ReprFn};
use egqel::mbp::{mbp_qel, Rule, DEFAULT_BUDGET};
use egqel::model::{parse_model, Model};
use egqel::oracle::{complete_model, equiv_exists, implies_exists, Bounds, Verdict};
use egqel::qel::{check_maximally_ground, compute_cground, find_defs, qel, refine_defs};
use egqel::terms::{parse_formula, parse_literals, Context, Formula, FuncId, FuncKind, Literal, SortKind};

const EGRAPH_CASES: usize = 1000;
const EGRAPH_MAX_NODES: usize = 8;
const FORMULA_CASES: usize = 1000;
const MBP_CASES: usize = 200;
const UNIVERSE: u32 = 3;
const GOLDEN_TIME_LIMIT: Duration = Duration::from_secs(1);
const EGRAPH_TIME_LIMIT: Duration = Duration::from_secs(300);
const MBP_TIME_LIMIT: Duration = Duration::from_secs(600);
const PHI_MBP_WINDOW: (i64, i64) = (0, 1);
const PHI_MBP_EXTRA_MODELS: usize = 20;

const PHI1: &str = include_str!("../examples/phi1.smt2");
const PHI4: &str = include_str!("../examples/phi4.smt2");
const PHI5: &str = include_str!("../examples/phi5.smt2");
const PSI: &str = include_str!("../examples/psi_cong.smt2");
const PHI_MBP: &str = include_str!("../examples/phi_mbp.smt2");
const PHI_MBP_MODELS: [&str; 2] =
    [include_str!("../examples/phi_mbp.model"), include_str!("../examples/phi_mbp_alt.model")];

const PHI_MBP_CUBE: &str = "(= (read (fst (read p2 j)) i) i)
    (= (snd (read p2 j)) l)
    (= (read p2 j) (pair (fst (read p2 j)) l))
    (= p2 (write p1 j (read p2 j)))
    (distinct (read p2 j) pp)";

struct Outcome {
    pass: bool,
    detail: String,
}

fn report(n: usize, title: &str, o: &Outcome) {
    let status = if o.pass { "PASS" } else { "FAIL" };
    println!("criterion {n} ({title}): {status} {}", o.detail);
}

/// Literal identity up to order and orientation.
fn normalize(ctx: &Context, l: &Literal) -> (u8, u32, u32) {
    let (a, b) = l.sides();
    let key = |x: egqel::terms::TermId| x.0;
    let (lo, hi) = (key(a).min(key(b)), key(a).max(key(b)));
    match l {
        Literal::Eq(..) if ctx.is_bool_const(b) => (0, key(a), key(b)),
        Literal::Eq(..) | Literal::ExplicitEq(..) => (1, lo, hi),
        Literal::Diseq(..) => (2, lo, hi),
    }
}

fn same_literals(ctx: &mut Context, got: &Formula, expected: &str) -> bool {
    let want = parse_literals(ctx, expected).expect("expected literals parse");
    let a: BTreeSet<_> = got.literals.iter().map(|l| normalize(ctx, l)).collect();
    let b: BTreeSet<_> = want.iter().map(|l| normalize(ctx, l)).collect();
    a == b && got.literals.len() == want.len()
}

fn golden_qel(text: &str, expected: &str, eliminated: &[&str], retained: &[&str]) -> Result<Duration, String> {
    let start = Instant::now();
    let mut p = parse_formula(text).map_err(|e| e.to_string())?;
    let out = qel(&mut p.ctx, &p.formula).map_err(|e| e.to_string())?;
    let took = start.elapsed();
    if !same_literals(&mut p.ctx, &out, expected) {
        return Err(format!("unexpected output {}", egqel::terms::print_formula(&p.ctx, &out)));
    }
    let left: BTreeSet<String> = out.occurring_vars(&p.ctx).iter().map(|&v| p.ctx.func(v).name.clone()).collect();
    if eliminated.iter().any(|v| left.contains(*v)) || retained.iter().any(|v| !left.contains(*v)) {
        return Err(format!("wrong variables remain: {left:?}"));
    }
    Ok(took)
}

fn phi_mbp_models(rng: &mut ChaCha8Rng) -> Vec<Model> {
    let p = parse_formula(PHI_MBP).unwrap();
    let mut models: Vec<Model> = PHI_MBP_MODELS.iter().map(|m| parse_model(&p.ctx, m).unwrap()).collect();
    let bounds = Bounds { int_window: Some(PHI_MBP_WINDOW), ..Bounds::default() };
    let base = Model::new().with_int_window(PHI_MBP_WINDOW.0, PHI_MBP_WINDOW.1);
    let mut found = 0;
    for _ in 0..100_000 {
        if found == PHI_MBP_EXTRA_MODELS {
            break;
        }
        let m = random_constants(rng, &p.ctx, &base);
        if let Some(m) = complete_model(&p.ctx, &p.formula, &m, &bounds).unwrap() {
            models.push(m);
            found += 1;
        }
    }
    models
}

/// Random values for every constant that is not a variable.
fn random_constants(rng: &mut ChaCha8Rng, ctx: &Context, base: &Model) -> Model {
    let mut m = base.clone();
    for f in ctx.funcs() {
        let d = ctx.func(f);
        if d.kind == FuncKind::Uninterpreted && d.args.is_empty() {
            let dom = m.domain(ctx, d.ret, 100_000).expect("finite sort");
            let v = dom.choose(rng).unwrap().clone();
            m.set_const(f, v);
        }
    }
    m
}

/// Name, input, expected literals, eliminated and retained variables.
type Golden = (&'static str, &'static str, &'static str, &'static [&'static str], &'static [&'static str]);

fn criterion_1(rng: &mut ChaCha8Rng) -> Outcome {
    let mut errors = Vec::new();
    let mut slowest = Duration::ZERO;
    let cases: [Golden; 4] = [
        ("phi1", PHI1, "(= (+ k 1) (read a x)) (> 3 (+ k 1))", &["z", "y"], &["x"]),
        ("phi4", PHI4, "(= 6 (f (g 6)))", &["x", "y"], &[]),
        ("phi5", PHI5, "(= y (h (f y))) (= (f (g (f y))) (f y))", &["x"], &["y"]),
        ("psi", PSI, "", &["x", "y"], &[]),
    ];
    for (name, text, expected, elim, kept) in cases {
        match golden_qel(text, expected, elim, kept) {
            Ok(t) => slowest = slowest.max(t),
            Err(e) => errors.push(format!("{name}: {e}")),
        }
    }
    let models = phi_mbp_models(rng);
    for (k, m) in models.iter().enumerate() {
        let start = Instant::now();
        let mut p = parse_formula(PHI_MBP).unwrap();
        match mbp_qel(&mut p.ctx, &p.formula, m, DEFAULT_BUDGET) {
            Ok(run) => {
                slowest = slowest.max(start.elapsed());
                if !same_literals(&mut p.ctx, &run.formula, PHI_MBP_CUBE) {
                    errors.push(format!(
                        "phi_mbp under model {k}: {}",
                        egqel::terms::print_formula(&p.ctx, &run.formula)
                    ));
                }
            }
            Err(e) => errors.push(format!("phi_mbp under model {k}: {e}")),
        }
    }
    if slowest > GOLDEN_TIME_LIMIT {
        errors.push(format!("slowest example took {slowest:?}"));
    }
    Outcome {
        pass: errors.is_empty(),
        detail: format!(
            "(4 qel examples, phi_mbp under {} models, slowest {:?}){}",
            models.len(),
            slowest,
            if errors.is_empty() { String::new() } else { format!(": {}", errors.join("; ")) }
        ),
    }
}

fn criterion_2(rng: &mut ChaCha8Rng) -> Outcome {
    let start = Instant::now();
    let bounds = Bounds { universe: UNIVERSE, ..Bounds::default() };
    let (mut cases, mut admissible, mut discrepancies) = (0, 0, Vec::new());
    while cases < EGRAPH_CASES {
        let Some((p, g)) = common::random_egraph(rng, EGRAPH_MAX_NODES) else { continue };
        cases += 1;
        let reps: Vec<_> = g.classes().map(|root| *g.class_of(root).choose(rng).unwrap()).collect();
        let r = ReprFn::from_reps(&g, &reps);
        let adm = is_admissible(&g, &r);
        admissible += usize::from(adm);
        let mut ctx = p.ctx.clone();
        let certified = match to_formula(&mut ctx, &g, &r, &HashSet::new()) {
            Ok(psi) => {
                let psi = Formula::new(psi.literals, p.formula.vars.clone());
                match equiv_exists(&ctx, &p.formula, &psi, &bounds) {
                    Ok(v) => v.holds(),
                    Err(e) => {
                        discrepancies.push(format!("oracle: {e}"));
                        continue;
                    }
                }
            }
            Err(Error::ExtractionBudget { .. }) => false,
            Err(e) => {
                discrepancies.push(e.to_string());
                continue;
            }
        };
        if adm != certified {
            discrepancies.push(format!(
                "admissible={adm} certified={certified} on {}",
                egqel::terms::print_formula(&p.ctx, &p.formula)
            ));
        }
    }
    let took = start.elapsed();
    let pass = discrepancies.is_empty() && took <= EGRAPH_TIME_LIMIT && admissible > 0 && admissible < cases;
    Outcome {
        pass,
        detail: format!(
            "({cases} egraphs, {admissible} admissible, {} discrepancies, {took:?}){}",
            discrepancies.len(),
            discrepancies.first().map(|d| format!(": {d}")).unwrap_or_default()
        ),
    }
}

struct GroundSuite {
    cases: usize,
    ground_failures: Vec<String>,
    admissibility_failures: Vec<String>,
}

fn ground_suite(rng: &mut ChaCha8Rng) -> GroundSuite {
    let mut s = GroundSuite { cases: 0, ground_failures: Vec::new(), admissibility_failures: Vec::new() };
    while s.cases < FORMULA_CASES {
        let (mut p, v) = common::formula_with_ground_var(rng);
        let Ok(g) = EGraph::from_formula(&mut p.ctx, &p.formula) else { continue };
        s.cases += 1;
        let shown = egqel::terms::print_formula(&p.ctx, &p.formula);
        let vars: BTreeSet<FuncId> = p.formula.vars.iter().copied().collect();
        let vf = p.ctx.lookup(v).unwrap();
        let vt = p.ctx.mk_const(vf);
        let node = g.node_of(vt).expect("variable has a node");
        let info = compute_cground(&g, &vars);
        let defs = find_defs(&g, &vars);
        let refined = refine_defs(&g, &defs, &vars);

        let ground = (|| {
            if !info.class_is_ground(&g, node) {
                return Err("class is not ground".to_string());
            }
            let rep = defs.get(node).ok_or("no representative")?;
            if !info.is_cground(rep) {
                return Err("representative is not c-ground".to_string());
            }
            let t = Extractor::new(&g, &defs).to_expr(&mut p.ctx, rep).map_err(|e| e.to_string())?;
            if !p.ctx.free_vars(t).is_empty() {
                return Err("extraction is not ground".to_string());
            }
            let out = qel(&mut p.ctx, &p.formula).map_err(|e| e.to_string())?;
            if out.occurring_vars(&p.ctx).contains(&vf) {
                return Err("variable remains in the output".to_string());
            }
            Ok(())
        })();
        if let Err(e) = ground {
            s.ground_failures.push(format!("{v} in {shown}: {e}"));
        }

        for (stage, r) in [("find_defs", &defs), ("refine_defs", &refined)] {
            if !is_admissible(&g, r) {
                s.admissibility_failures.push(format!("{stage} not admissible on {shown}"));
            } else if let Err(n) = check_maximally_ground(&mut p.ctx, &g, r, &vars) {
                s.admissibility_failures.push(format!("{stage} not maximally ground at node {n} on {shown}"));
            }
        }
    }
    s
}

fn criterion_5(rng: &mut ChaCha8Rng) -> Outcome {
    let start = Instant::now();
    let bounds = Bounds { universe: UNIVERSE, ..Bounds::default() };
    let (mut cases, mut unsat, mut failures) = (0, 0, Vec::new());
    let mut rules: BTreeSet<Rule> = BTreeSet::new();
    while cases < MBP_CASES {
        let text = common::mbp_instance(rng);
        let mut p = parse_formula(&text).expect("instance parses");
        let mut base = Model::new();
        for s in p.ctx.sorts() {
            if p.ctx.sort(s).kind == SortKind::Uninterpreted {
                base.set_universe(s, UNIVERSE);
            }
        }
        let mut model = None;
        for _ in 0..200 {
            let m = random_constants(rng, &p.ctx, &base);
            if let Some(m) = complete_model(&p.ctx, &p.formula, &m, &bounds).unwrap() {
                model = Some(m);
                break;
            }
        }
        let Some(m) = model else {
            unsat += 1;
            continue;
        };
        cases += 1;
        let first_fresh = p.ctx.funcs().count();
        let run = match mbp_qel(&mut p.ctx, &p.formula, &m, DEFAULT_BUDGET) {
            Ok(r) => r,
            Err(e) => {
                failures.push(format!("{e} on\n{text}"));
                continue;
            }
        };
        rules.extend(run.stats.applications.keys());
        let fresh: Vec<FuncId> = p
            .ctx
            .funcs()
            .skip(first_fresh)
            .filter(|&f| matches!(p.ctx.func(f).kind, FuncKind::Var | FuncKind::Uninterpreted))
            .collect();
        let shown = egqel::terms::print_formula(&p.ctx, &run.formula);
        let projected: BTreeSet<FuncId> = p
            .formula
            .vars
            .iter()
            .chain(&fresh)
            .copied()
            .filter(|&v| {
                let s = p.ctx.func(v).ret;
                p.ctx.is_array(s) || p.ctx.is_adt(s)
            })
            .collect();
        if run.formula.literals.iter().any(|l| {
            let (a, b) = l.sides();
            p.ctx.mentions(a, &projected) || p.ctx.mentions(b, &projected)
        }) {
            failures.push(format!("projected variable remains in {shown} from\n{text}"));
            continue;
        }
        match run.model.first_violated(&p.ctx, &run.formula.literals) {
            Ok(None) => {}
            Ok(Some(_)) | Err(_) => {
                failures.push(format!("model violates {shown} from\n{text}"));
                continue;
            }
        }
        let mut quantified: Vec<FuncId> = run.formula.occurring_vars(&p.ctx).into_iter().collect();
        quantified.extend(&fresh);
        let out = Formula::new(run.formula.literals.clone(), quantified);
        match implies_exists(&p.ctx, &out, &p.formula, &bounds) {
            Ok(Verdict::Holds { .. }) => {}
            Ok(Verdict::Counterexample(_)) => failures.push(format!("{shown} does not imply\n{text}")),
            Err(e) => failures.push(format!("oracle: {e} on\n{text}")),
        }
    }
    let took = start.elapsed();
    for f in &failures {
        eprintln!("projection failure: {f}");
    }
    let names: Vec<&str> = rules.iter().map(|r| r.name()).collect();
    Outcome {
        pass: failures.is_empty() && took <= MBP_TIME_LIMIT,
        detail: format!(
            "({cases} instances, {unsat} unsatisfiable skipped, {} failures, rules fired: {}, {took:?}){}",
            failures.len(),
            names.join(" "),
            failures.first().map(|d| format!(": {d}")).unwrap_or_default()
        ),
    }
}

fn criterion_6() -> Outcome {
    let mut p = parse_formula(PHI_MBP).unwrap();
    let m = parse_model(&p.ctx, PHI_MBP_MODELS[0]).unwrap();
    match mbp_qel(&mut p.ctx, &p.formula, &m, DEFAULT_BUDGET) {
        Ok(run) => {
            let n = run.stats.count(Rule::AdtSplitDiseq);
            Outcome { pass: n == 0, detail: format!("(disequality splits on phi_mbp: {n})") }
        }
        Err(e) => Outcome { pass: false, detail: format!("({e})") },
    }
}

fn rng_for(criterion: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(0x5eed + criterion)
}

fn main() {
    // criterion numbers on the command line restrict the run
    let only: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let wanted = |n: usize| only.is_empty() || only.contains(&n);
    let mut all = true;

    if wanted(1) {
        let o = criterion_1(&mut rng_for(1));
        report(1, "golden examples", &o);
        all &= o.pass;
    }
    if wanted(2) {
        let o = criterion_2(&mut rng_for(2));
        report(2, "admissibility iff sound extraction", &o);
        all &= o.pass;
    }
    if wanted(3) || wanted(4) {
        let s = ground_suite(&mut rng_for(3));
        let o = Outcome {
            pass: s.ground_failures.is_empty(),
            detail: format!(
                "({} formulas, {} failures){}",
                s.cases,
                s.ground_failures.len(),
                s.ground_failures.first().map(|d| format!(": {d}")).unwrap_or_default()
            ),
        };
        report(3, "ground variables get ground definitions", &o);
        all &= o.pass;
        let o = Outcome {
            pass: s.admissibility_failures.is_empty(),
            detail: format!(
                "({} formulas, {} failures){}",
                s.cases,
                s.admissibility_failures.len(),
                s.admissibility_failures.first().map(|d| format!(": {d}")).unwrap_or_default()
            ),
        };
        report(4, "admissible and maximally ground representatives", &o);
        all &= o.pass;
    }
    if wanted(5) {
        let o = criterion_5(&mut rng_for(5));
        report(5, "projection contract", &o);
        all &= o.pass;
    }
    if wanted(6) {
        let o = criterion_6();
        report(6, "no split on c-ground disequality", &o);
        all &= o.pass;
    }
    if !all {
        std::process::exit(1);
    }
}
