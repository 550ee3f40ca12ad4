#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::Rng;

use egqel::egraph::EGraph;
use egqel::terms::{parse_formula, Problem};

/// Uninterpreted signature small enough for exhaustive checking at
/// universe size 3.
pub const EUF_SMALL: &str = "(declare-sort S 0)
(declare-const a S) (declare-const b S)
(declare-fun f (S) S)
(declare-var x S) (declare-var y S)";

pub const EUF: &str = "(declare-sort S 0)
(declare-const a S) (declare-const b S) (declare-const c S)
(declare-fun f (S) S) (declare-fun g (S S) S)
(declare-var x S) (declare-var y S) (declare-var z S)";

pub fn problem(prelude: &str, asserts: &[String]) -> Problem {
    let mut text = prelude.to_string();
    for a in asserts {
        text.push_str(&format!("\n(assert {a})"));
    }
    parse_formula(&text).expect("generated input parses")
}

fn leaf(rng: &mut impl Rng, leaves: &[&str]) -> String {
    leaves.choose(rng).unwrap().to_string()
}

/// A term over `f` (and `g` when `binary`) of depth at most `depth`.
pub fn term(rng: &mut impl Rng, leaves: &[&str], binary: bool, depth: u32) -> String {
    if depth == 0 || rng.gen_bool(0.45) {
        return leaf(rng, leaves);
    }
    if binary && rng.gen_bool(0.4) {
        format!("(g {} {})", term(rng, leaves, binary, depth - 1), term(rng, leaves, binary, depth - 1))
    } else {
        format!("(f {})", term(rng, leaves, binary, depth - 1))
    }
}

pub fn literal(rng: &mut impl Rng, leaves: &[&str], binary: bool, depth: u32, diseq: f64) -> String {
    let l = term(rng, leaves, binary, depth);
    let r = term(rng, leaves, binary, depth);
    if rng.gen_bool(diseq) {
        format!("(distinct {l} {r})")
    } else {
        format!("(= {l} {r})")
    }
}

/// A random egraph of at most `max_nodes` nodes over [`EUF_SMALL`], with
/// the literals whose conjunction it represents.
pub fn random_egraph(rng: &mut impl Rng, max_nodes: usize) -> Option<(Problem, EGraph)> {
    let leaves = ["a", "b", "x", "y"];
    let n = rng.gen_range(1..=4);
    let asserts: Vec<String> = (0..n).map(|_| literal(rng, &leaves, false, 2, 0.2)).collect();
    let mut p = problem(EUF_SMALL, &asserts);
    let g = EGraph::from_formula(&mut p.ctx, &p.formula).ok()?;
    (g.num_nodes() <= max_nodes).then_some((p, g))
}

/// A random formula over [`EUF`] in which one variable is made equal to a
/// ground term through a chain of equalities, possibly under `f` or `g`.
/// Returns the problem and the name of that variable.
pub fn formula_with_ground_var(rng: &mut impl Rng) -> (Problem, &'static str) {
    let vars = ["x", "y", "z"];
    let v = *vars.choose(rng).unwrap();
    let others: Vec<&str> = vars.iter().copied().filter(|&w| w != v).collect();
    let ground = term(rng, &["a", "b", "c"], true, 2);
    let mut asserts = Vec::new();
    match rng.gen_range(0..4) {
        0 => asserts.push(format!("(= {v} {ground})")),
        1 => {
            let w = others[0];
            asserts.push(format!("(= {v} {w})"));
            asserts.push(format!("(= {w} {ground})"));
        }
        2 => {
            let w = others[0];
            asserts.push(format!("(= {v} (f {w}))"));
            asserts.push(format!("(= {ground} {w})"));
        }
        _ => {
            let (w, u) = (others[0], others[1]);
            asserts.push(format!("(= (g {w} a) {v})"));
            asserts.push(format!("(= {w} (f {u}))"));
            asserts.push(format!("(= {u} {ground})"));
        }
    }
    let leaves = ["a", "b", "c", "x", "y", "z"];
    for _ in 0..rng.gen_range(0..4) {
        asserts.push(literal(rng, &leaves, true, 2, 0.15));
    }
    asserts.shuffle(rng);
    (problem(EUF, &asserts), v)
}

/// Array and datatype signature for projection instances: arrays from I to
/// V and pairs of V, with I and V of size 3.
pub const MBP_PRELUDE: &str = "(declare-sort I 0) (declare-sort V 0)
(declare-datatype D ((mk (fst V) (snd V)) (none)))
(declare-const i I) (declare-const j I)
(declare-const u V) (declare-const w V)
(declare-const c (Array I V)) (declare-const e D)";

pub const MBP_ARRAY_VARS: [&str; 2] = ["v1", "v2"];
pub const MBP_ADT_VARS: [&str; 2] = ["q1", "q2"];

fn mbp_array_term(rng: &mut impl Rng, arrays: &[&str], depth: u32) -> String {
    if depth == 0 || rng.gen_bool(0.5) {
        return leaf(rng, arrays);
    }
    format!(
        "(write {} {} {})",
        mbp_array_term(rng, arrays, depth - 1),
        leaf(rng, &["i", "j"]),
        mbp_value_term(rng, arrays, depth - 1)
    )
}

fn mbp_value_term(rng: &mut impl Rng, arrays: &[&str], depth: u32) -> String {
    if depth == 0 || rng.gen_bool(0.5) {
        return leaf(rng, &["u", "w"]);
    }
    format!("(read {} {})", mbp_array_term(rng, arrays, depth - 1), leaf(rng, &["i", "j"]))
}


fn mbp_adt_term(rng: &mut impl Rng, adts: &[&str], arrays: &[&str]) -> String {
    match rng.gen_range(0..3) {
        0 => format!("(mk {} {})", mbp_value_term(rng, arrays, 1), mbp_value_term(rng, arrays, 1)),
        _ => leaf(rng, adts),
    }
}

/// A random projection instance with up to two array and two datatype
/// variables.
pub fn mbp_instance(rng: &mut impl Rng) -> String {
    let na = rng.gen_range(0..=2);
    let nd = rng.gen_range(usize::from(na == 0)..=2);
    let mut text = MBP_PRELUDE.to_string();
    for v in &MBP_ARRAY_VARS[..na] {
        text.push_str(&format!("\n(declare-var {v} (Array I V))"));
    }
    for v in &MBP_ADT_VARS[..nd] {
        text.push_str(&format!("\n(declare-var {v} D)"));
    }
    let mut arrays = vec!["c"];
    arrays.extend(&MBP_ARRAY_VARS[..na]);
    let mut adts = vec!["e"];
    adts.extend(&MBP_ADT_VARS[..nd]);
    let n = rng.gen_range(1..=4);
    for _ in 0..n {
        let lit = match rng.gen_range(0..6) {
            0 | 1 => format!("(= {} {})", mbp_array_term(rng, &arrays, 2), mbp_array_term(rng, &arrays, 2)),
            2 => format!("(= {} {})", mbp_value_term(rng, &arrays, 2), mbp_value_term(rng, &arrays, 2)),
            3 => format!("(distinct {} {})", mbp_value_term(rng, &arrays, 2), mbp_value_term(rng, &arrays, 1)),
            4 => format!("(= {} {})", mbp_adt_term(rng, &adts, &arrays), mbp_adt_term(rng, &adts, &arrays)),
            _ => format!("(distinct {} {})", mbp_adt_term(rng, &adts, &arrays), mbp_adt_term(rng, &adts, &arrays)),
        };
        text.push_str(&format!("\n(assert {lit})"));
    }
    text
}
