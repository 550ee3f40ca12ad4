//! Brute-force semantic checks over bounded interpretations.
//!
//! Uninterpreted sorts get a fixed universe and Int a window, so every sort
//! in use is finite. Free symbols are enumerated exhaustively; the
//! quantified variables of each formula are searched by backtracking, with
//! each literal checked as soon as its variables are assigned. An
//! interpretation under which some term leaves the Int window is skipped
//! and counted.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::model::{FuncTable, Model, Value};
use crate::terms::{Context, Formula, FuncId, FuncKind, Literal, SortKind, TermId};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bounds {
    /// Size of every uninterpreted sort.
    pub universe: u32,
    /// When unset, the numerals of the formulas widened by 2 on each side.
    pub int_window: Option<(i64, i64)>,
    /// Largest number of free-symbol interpretations to enumerate.
    pub max_interpretations: u128,
    /// Largest domain of a single sort.
    pub domain_cap: usize,
}

impl Default for Bounds {
    fn default() -> Bounds {
        Bounds { universe: 3, int_window: None, max_interpretations: 2_000_000, domain_cap: 4096 }
    }
}

#[derive(Debug, Clone)]
pub enum Verdict {
    /// `skipped` interpretations were left out because of Int overflow.
    Holds { skipped: u64 },
    /// An interpretation of the free symbols on which the check fails.
    Counterexample(Model),
}

impl Verdict {
    pub fn holds(&self) -> bool {
        matches!(self, Verdict::Holds { .. })
    }
}

/// Does `∃ f.vars. f` agree with `∃ g.vars. g` on every bounded
/// interpretation of the remaining symbols?
pub fn equiv_exists(ctx: &Context, f: &Formula, g: &Formula, bounds: &Bounds) -> Result<Verdict> {
    compare(ctx, f, g, bounds, false)
}

/// Does `∃ f.vars. f` imply `∃ g.vars. g` on every bounded interpretation?
pub fn implies_exists(ctx: &Context, f: &Formula, g: &Formula, bounds: &Bounds) -> Result<Verdict> {
    compare(ctx, f, g, bounds, true)
}

/// Up to `limit` models of `f` that interpret every symbol of `f`,
/// variables included, in enumeration order.
pub fn find_models(ctx: &Context, f: &Formula, bounds: &Bounds, limit: usize) -> Result<Vec<Model>> {
    let space = Space::new(ctx, &[f], bounds)?;
    let inner = inner_vars(ctx, f, &space.outer);
    let search = Search::new(ctx, f, &inner, &space.base, bounds)?;
    let mut out = Vec::new();
    let mut digits = vec![0usize; space.slots.len()];
    loop {
        let mut m = space.assign(&digits);
        if skip_overflow(search.sat(ctx, &mut m))? == Some(true) {
            out.push(m);
            if out.len() >= limit {
                return Ok(out);
            }
        }
        if !space.next(&mut digits) {
            return Ok(out);
        }
    }
}

/// Extends `m`, which interprets the free symbols of `f`, with values for
/// the variables of `f` that satisfy it.
pub fn complete_model(ctx: &Context, f: &Formula, m: &Model, bounds: &Bounds) -> Result<Option<Model>> {
    let vars: Vec<FuncId> = occurring(ctx, f).into_iter().filter(|&s| !m.interprets(s)).collect();
    let search = Search::new(ctx, f, &vars, m, bounds)?;
    let mut m = m.clone();
    Ok(if search.sat(ctx, &mut m)? { Some(m) } else { None })
}

pub fn find_model(ctx: &Context, f: &Formula, bounds: &Bounds) -> Result<Option<Model>> {
    Ok(find_models(ctx, f, bounds, 1)?.pop())
}

fn compare(
    ctx: &Context,
    f: &Formula,
    g: &Formula,
    bounds: &Bounds,
    one_way: bool,
) -> Result<Verdict> {
    let space = Space::new(ctx, &[f, g], bounds)?;
    let sf = Search::new(ctx, f, &inner_vars(ctx, f, &space.outer), &space.base, bounds)?;
    let sg = Search::new(ctx, g, &inner_vars(ctx, g, &space.outer), &space.base, bounds)?;
    let mut digits = vec![0usize; space.slots.len()];
    let mut skipped = 0;
    loop {
        let m = space.assign(&digits);
        let a = skip_overflow(sf.sat(ctx, &mut m.clone()))?;
        let b = if one_way && a == Some(false) { Some(true) } else { skip_overflow(sg.sat(ctx, &mut m.clone()))? };
        match (a, b) {
            (Some(a), Some(b)) if a != b && (a || !one_way) => return Ok(Verdict::Counterexample(m)),
            (Some(_), Some(_)) => {}
            _ => skipped += 1,
        }
        if !space.next(&mut digits) {
            return Ok(Verdict::Holds { skipped });
        }
    }
}

fn skip_overflow(r: Result<bool>) -> Result<Option<bool>> {
    match r {
        Ok(b) => Ok(Some(b)),
        Err(Error::OutOfWindow(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

fn collect_funcs(ctx: &Context, t: TermId, out: &mut BTreeSet<FuncId>) {
    out.insert(ctx.func_of(t));
    for &a in ctx.args(t) {
        collect_funcs(ctx, a, out);
    }
}

fn occurring(ctx: &Context, f: &Formula) -> BTreeSet<FuncId> {
    let mut out = BTreeSet::new();
    for l in &f.literals {
        let (a, b) = l.sides();
        collect_funcs(ctx, a, &mut out);
        collect_funcs(ctx, b, &mut out);
    }
    out.retain(|&s| matches!(ctx.func(s).kind, FuncKind::Uninterpreted | FuncKind::Var));
    out
}

fn inner_vars(ctx: &Context, f: &Formula, outer: &BTreeSet<FuncId>) -> Vec<FuncId> {
    occurring(ctx, f).into_iter().filter(|s| !outer.contains(s)).collect()
}

fn numerals(ctx: &Context, t: TermId, out: &mut Vec<i64>) {
    if let FuncKind::Numeral(n) = ctx.func(ctx.func_of(t)).kind {
        out.push(n);
    }
    for &a in ctx.args(t) {
        numerals(ctx, a, out);
    }
}

/// One unknown of the free-symbol interpretation: a constant, or one
/// argument tuple of a function.
struct Slot {
    func: FuncId,
    args: Option<Vec<Value>>,
    domain: Vec<Value>,
}

struct Space {
    outer: BTreeSet<FuncId>,
    base: Model,
    slots: Vec<Slot>,
}

impl Space {
    fn new(ctx: &Context, fs: &[&Formula], bounds: &Bounds) -> Result<Space> {
        let mut base = Model::new();
        for s in ctx.sorts() {
            if ctx.sort(s).kind == SortKind::Uninterpreted {
                base.set_universe(s, bounds.universe);
            }
        }
        let (lo, hi) = match bounds.int_window {
            Some(w) => w,
            None => {
                let mut ns = Vec::new();
                for f in fs {
                    for l in &f.literals {
                        let (a, b) = l.sides();
                        numerals(ctx, a, &mut ns);
                        numerals(ctx, b, &mut ns);
                    }
                }
                let lo = ns.iter().copied().min().unwrap_or(0);
                let hi = ns.iter().copied().max().unwrap_or(0);
                (lo - 2, hi + 2)
            }
        };
        base = base.with_int_window(lo, hi);
        let quantified: BTreeSet<FuncId> = fs.iter().flat_map(|f| f.vars.iter().copied()).collect();
        let outer: BTreeSet<FuncId> =
            fs.iter().flat_map(|f| occurring(ctx, f)).filter(|s| !quantified.contains(s)).collect();
        let dom = |s| base.domain(ctx, s, bounds.domain_cap).ok_or(Error::SearchSpaceTooLarge(u128::MAX));
        let mut slots = Vec::new();
        let mut total: u128 = 1;
        for &f in &outer {
            let decl = ctx.func(f);
            let values = dom(decl.ret)?;
            let mut tuples: Vec<Vec<Value>> = vec![Vec::new()];
            for &a in &decl.args {
                let d = dom(a)?;
                tuples = tuples
                    .into_iter()
                    .flat_map(|t| d.iter().map(move |v| [t.clone(), vec![v.clone()]].concat()))
                    .collect();
                if tuples.len() > bounds.domain_cap {
                    return Err(Error::SearchSpaceTooLarge(u128::MAX));
                }
            }
            for t in tuples {
                total = total.saturating_mul(values.len() as u128);
                let args = if decl.args.is_empty() { None } else { Some(t) };
                slots.push(Slot { func: f, args, domain: values.clone() });
            }
        }
        if total > bounds.max_interpretations {
            return Err(Error::SearchSpaceTooLarge(total));
        }
        Ok(Space { outer, base, slots })
    }

    fn assign(&self, digits: &[usize]) -> Model {
        let mut m = self.base.clone();
        let mut tables: BTreeMap<FuncId, FuncTable> = BTreeMap::new();
        for (slot, &d) in self.slots.iter().zip(digits) {
            let v = slot.domain[d].clone();
            match &slot.args {
                None => m.set_const(slot.func, v),
                Some(args) => {
                    let t = tables
                        .entry(slot.func)
                        .or_insert_with(|| FuncTable { default: v.clone(), entries: BTreeMap::new() });
                    t.entries.insert(args.clone(), v);
                }
            }
        }
        for (f, t) in tables {
            m.set_func(f, t);
        }
        m
    }

    /// Odometer step; false after the last assignment.
    fn next(&self, digits: &mut [usize]) -> bool {
        for (k, d) in digits.iter_mut().enumerate() {
            *d += 1;
            if *d < self.slots[k].domain.len() {
                return true;
            }
            *d = 0;
        }
        false
    }
}

/// Backtracking search for values of the variables of one formula.
struct Search {
    vars: Vec<FuncId>,
    domains: Vec<Vec<Value>>,
    /// `levels[k]`: literals whose last variable is `vars[k - 1]`; level 0
    /// holds the variable-free ones.
    levels: Vec<Vec<Literal>>,
}

impl Search {
    fn new(ctx: &Context, f: &Formula, vars: &[FuncId], base: &Model, bounds: &Bounds) -> Result<Search> {
        let mentioned: Vec<BTreeSet<FuncId>> = f
            .literals
            .iter()
            .map(|l| {
                let (a, b) = l.sides();
                let mut syms = BTreeSet::new();
                collect_funcs(ctx, a, &mut syms);
                collect_funcs(ctx, b, &mut syms);
                syms.retain(|s| vars.contains(s));
                syms
            })
            .collect();
        // greedy order: next the variable that completes the most literals
        let mut order: Vec<FuncId> = Vec::new();
        while order.len() < vars.len() {
            let best = vars
                .iter()
                .copied()
                .filter(|v| !order.contains(v))
                .max_by_key(|v| {
                    let done = mentioned
                        .iter()
                        .filter(|m| m.contains(v) && m.iter().all(|w| w == v || order.contains(w)))
                        .count();
                    (done, std::cmp::Reverse(*v))
                })
                .unwrap();
            order.push(best);
        }
        let vars = &order[..];
        let mut domains = Vec::new();
        for &v in vars {
            let decl = ctx.func(v);
            if !decl.args.is_empty() {
                return Err(Error::Sort(format!("variable `{}` takes arguments", decl.name)));
            }
            domains.push(base.domain(ctx, decl.ret, bounds.domain_cap).ok_or(Error::SearchSpaceTooLarge(u128::MAX))?);
        }
        let mut levels = vec![Vec::new(); vars.len() + 1];
        for (l, syms) in f.literals.iter().zip(&mentioned) {
            let level = vars.iter().rposition(|v| syms.contains(v)).map_or(0, |k| k + 1);
            levels[level].push(*l);
        }
        Ok(Search { vars: vars.to_vec(), domains, levels })
    }

    /// Extends `m` with satisfying values for the variables if there are any.
    fn sat(&self, ctx: &Context, m: &mut Model) -> Result<bool> {
        if !self.level_holds(ctx, m, 0)? {
            return Ok(false);
        }
        self.extend(ctx, m, 0)
    }

    fn extend(&self, ctx: &Context, m: &mut Model, k: usize) -> Result<bool> {
        if k == self.vars.len() {
            return Ok(true);
        }
        for v in &self.domains[k] {
            m.set_const(self.vars[k], v.clone());
            if self.level_holds(ctx, m, k + 1)? && self.extend(ctx, m, k + 1)? {
                return Ok(true);
            }
        }
        Ok(false)
    }

    fn level_holds(&self, ctx: &Context, m: &Model, level: usize) -> Result<bool> {
        for l in &self.levels[level] {
            if !m.holds(ctx, l)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::terms::{parse_formula, parse_literals};

    fn formula(ctx: &mut Context, text: &str) -> Formula {
        Formula::new(parse_literals(ctx, text).unwrap(), Vec::new())
    }

    #[test]
    fn eliminating_a_defined_variable() {
        let p = parse_formula(
            "(declare-sort S 0) (declare-fun f (S) S) (declare-const a S) (declare-const b S) (declare-var x S)
             (assert (= (f x) a)) (assert (= x b))",
        )
        .unwrap();
        let mut ctx = p.ctx.clone();
        let g = formula(&mut ctx, "(= (f b) a)");
        assert!(equiv_exists(&ctx, &p.formula, &g, &Bounds::default()).unwrap().holds());
        let t = Formula::new(Vec::new(), Vec::new());
        assert!(implies_exists(&ctx, &p.formula, &t, &Bounds::default()).unwrap().holds());
        match equiv_exists(&ctx, &p.formula, &t, &Bounds::default()).unwrap() {
            Verdict::Counterexample(m) => assert!(!m.holds(&ctx, &g.literals[0]).unwrap()),
            Verdict::Holds { .. } => panic!("f(b) = a is not valid"),
        }
    }

    #[test]
    fn a_lone_variable_is_unconstrained() {
        let p = parse_formula("(declare-sort S 0) (declare-const a S) (declare-var x S) (assert (distinct x a))").unwrap();
        let t = Formula::new(Vec::new(), Vec::new());
        assert!(equiv_exists(&p.ctx, &p.formula, &t, &Bounds::default()).unwrap().holds());
        let one = Bounds { universe: 1, ..Bounds::default() };
        assert!(!equiv_exists(&p.ctx, &p.formula, &t, &one).unwrap().holds());
    }

    #[test]
    fn arithmetic_window_follows_numerals() {
        let p = parse_formula("(declare-const k Int) (declare-var x Int) (assert (= x (+ k 1))) (assert (> 3 x))").unwrap();
        let mut ctx = p.ctx.clone();
        let g = formula(&mut ctx, "(> 3 (+ k 1))");
        match equiv_exists(&ctx, &p.formula, &g, &Bounds::default()).unwrap() {
            Verdict::Holds { skipped } => assert_eq!(skipped, 1),
            v => panic!("{v:?}"),
        }
    }

    #[test]
    fn models_interpret_variables() {
        let p = parse_formula(
            "(declare-const i Int) (declare-var v (Array Int Int)) (assert (= (read v i) i))",
        )
        .unwrap();
        let b = Bounds { int_window: Some((0, 1)), ..Bounds::default() };
        let ms = find_models(&p.ctx, &p.formula, &b, 100).unwrap();
        assert_eq!(ms.len(), 2);
        for m in &ms {
            assert_eq!(m.first_violated(&p.ctx, &p.formula.literals).unwrap(), None);
        }
    }

    #[test]
    fn search_space_guard() {
        let p = parse_formula(
            "(declare-sort S 0) (declare-fun f (S S) S) (declare-fun g (S S) S) (declare-var x S) (assert (= (f x x) (g x x)))",
        )
        .unwrap();
        let t = Formula::new(Vec::new(), Vec::new());
        let b = Bounds { universe: 4, ..Bounds::default() };
        assert!(matches!(equiv_exists(&p.ctx, &p.formula, &t, &b), Err(Error::SearchSpaceTooLarge(_))));
    }
}
