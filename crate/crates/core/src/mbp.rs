//! Model-based projection of array and datatype variables on top of QEL.
//!
//! Rules never rewrite: they assert new equalities and disequalities into
//! the egraph, guided by the model. After saturation the QEL tail picks
//! representatives over all variables and drops every core node whose
//! extraction still mentions an array or datatype variable.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use crate::egraph::{EGraph, NodeId};
use crate::error::{Error, Result};
use crate::extraction::{to_formula, Extractor, ReprFn};
use crate::model::Model;
use crate::qel::{compute_cground, find_core, find_defs, refine_defs, CGroundInfo};
use crate::terms::{print_literal, print_term, Builtin, Context, Formula, FuncId, FuncKind, Literal, TermId};

pub const DEFAULT_BUDGET: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Rule {
    ElimWrRd,
    PartialEq,
    ElimWr,
    ElimEq,
    Ackermann,
    AdtDeconstructEq,
    AdtSplitDiseq,
}

impl Rule {
    pub const ARRAY: [Rule; 5] = [Rule::ElimWrRd, Rule::PartialEq, Rule::ElimWr, Rule::ElimEq, Rule::Ackermann];
    pub const ADT: [Rule; 2] = [Rule::AdtDeconstructEq, Rule::AdtSplitDiseq];

    pub fn name(self) -> &'static str {
        match self {
            Rule::ElimWrRd => "ElimWrRd",
            Rule::PartialEq => "PartialEq",
            Rule::ElimWr => "ElimWr",
            Rule::ElimEq => "ElimEq",
            Rule::Ackermann => "Ackermann",
            Rule::AdtDeconstructEq => "AdtDeconstructEq",
            Rule::AdtSplitDiseq => "AdtSplitDiseq",
        }
    }
}

/// Number of applications of each rule.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MbpStats {
    pub applications: BTreeMap<Rule, usize>,
}

impl MbpStats {
    pub fn count(&self, r: Rule) -> usize {
        self.applications.get(&r).copied().unwrap_or(0)
    }

    pub fn total(&self) -> usize {
        self.applications.values().sum()
    }
}

#[derive(Debug, Clone)]
pub struct MbpRun {
    pub formula: Formula,
    /// The input model extended with the fresh symbols.
    pub model: Model,
    pub initial: EGraph,
    pub egraph: EGraph,
    pub repr: ReprFn,
    pub core: BTreeSet<NodeId>,
    pub stats: MbpStats,
}

/// Projects the variables of `f` guided by `model`, which must satisfy `f`.
pub fn mbp_qel(ctx: &mut Context, f: &Formula, model: &Model, budget: usize) -> Result<MbpRun> {
    if let Some(l) = model.first_violated(ctx, &f.literals)? {
        return Err(Error::ModelMismatch(print_literal(ctx, l)));
    }
    // Equalities become explicit so that rules can match them as terms.
    let lits: Vec<Literal> = f
        .literals
        .iter()
        .map(|&l| match l {
            Literal::Eq(a, b) if !ctx.is_bool_const(a) && !ctx.is_bool_const(b) && a != b => Literal::ExplicitEq(a, b),
            other => other,
        })
        .collect();
    let g = EGraph::from_formula(ctx, &Formula::new(lits, f.vars.clone()))?;
    let initial = g.clone();
    let mut engine = Engine {
        ctx,
        g,
        m: model.clone(),
        proj: f.vars.iter().copied().collect(),
        fired: HashSet::new(),
        budget,
        stats: MbpStats::default(),
        cground: None,
    };
    loop {
        let p1 = engine.apply_rules(&Rule::ARRAY)?;
        let p2 = engine.apply_rules(&Rule::ADT)?;
        if !p1 && !p2 {
            break;
        }
    }
    let Engine { ctx, g, m, stats, .. } = engine;

    let all_vars: BTreeSet<FuncId> = g.nodes().map(|n| g.func(n)).filter(|&f| ctx.is_var(f)).collect();
    let repr = refine_defs(&g, &find_defs(&g, &all_vars), &all_vars);
    let core = find_core(&g, &repr, &all_vars);
    let elim: BTreeSet<FuncId> = all_vars
        .iter()
        .copied()
        .filter(|&v| {
            let s = ctx.func(v).ret;
            ctx.is_array(s) || ctx.is_adt(s)
        })
        .collect();
    let mut ex = Extractor::new(&g, &repr);
    let mut core_e = BTreeSet::new();
    for &n in &core {
        let t = ex.to_expr(ctx, n)?;
        if !ctx.mentions(t, &elim) {
            core_e.insert(n);
        }
    }
    let exclude: HashSet<NodeId> = g.nodes().filter(|n| !core_e.contains(n)).collect();
    let formula = to_formula(ctx, &g, &repr, &exclude)?;
    Ok(MbpRun { formula, model: m, initial, egraph: g, repr, core: core_e, stats })
}

struct Engine<'a> {
    ctx: &'a mut Context,
    g: EGraph,
    m: Model,
    /// Variables rules try to eliminate: the input variables plus fresh
    /// array and datatype symbols.
    proj: BTreeSet<FuncId>,
    fired: HashSet<(Rule, NodeId, NodeId)>,
    budget: usize,
    stats: MbpStats,
    cground: Option<(u64, CGroundInfo)>,
}

impl Engine<'_> {
    /// Offers every node (including the ones created meanwhile) to the
    /// rules. Equality-shaped nodes are always offered; other nodes only
    /// while they are not c-ground.
    fn apply_rules(&mut self, rules: &[Rule]) -> Result<bool> {
        let mut progress = false;
        let mut n = 0;
        while n < self.g.num_nodes() {
            if self.is_eq(n) || !self.is_cground(n) {
                for &r in rules {
                    progress |= self.try_rule(r, n)?;
                }
            }
            n += 1;
        }
        Ok(progress)
    }

    fn is_cground(&mut self, n: NodeId) -> bool {
        let v = self.g.version();
        if self.cground.as_ref().map(|(ver, _)| *ver) != Some(v) {
            let vars: BTreeSet<FuncId> =
                self.g.nodes().map(|k| self.g.func(k)).filter(|&f| self.ctx.is_var(f)).collect();
            self.cground = Some((v, compute_cground(&self.g, &vars)));
        }
        self.cground.as_ref().unwrap().1.is_cground(n)
    }

    fn class_is_ground(&mut self, n: NodeId) -> bool {
        self.is_cground(n);
        self.cground.as_ref().unwrap().1.class_is_ground(&self.g, n)
    }

    /// The `k`-th field of `n` as a constructor-`ctor` value: the argument
    /// itself when `n` is an application of `ctor`, else a selector term.
    fn field(&mut self, n: NodeId, ctor: FuncId, k: usize) -> Result<TermId> {
        if self.g.func(n) == ctor {
            return Ok(self.term(self.g.children(n)[k]));
        }
        let sel = self.ctx.selector(ctor, k);
        let t = self.term(n);
        self.ctx.mk_app(sel, &[t])
    }

    fn is_ctor_app(&self, n: NodeId) -> bool {
        matches!(self.ctx.func(self.g.func(n)).kind, FuncKind::Constructor { .. })
    }

    fn builtin(&self, n: NodeId) -> Option<Builtin> {
        self.ctx.builtin_of(self.g.func(n))
    }

    fn is_eq(&self, n: NodeId) -> bool {
        matches!(self.builtin(n), Some(Builtin::ExplicitEq | Builtin::PartialEq(_)))
    }

    fn has_proj(&self, n: NodeId) -> bool {
        self.ctx.mentions(self.g.term(n), &self.proj)
    }

    fn is_proj_var(&self, n: NodeId) -> bool {
        self.g.is_leaf(n) && self.proj.contains(&self.g.func(n))
    }

    fn value(&self, n: NodeId) -> Result<crate::model::Value> {
        self.m.eval(self.ctx, self.g.term(n))
    }

    fn term(&self, n: NodeId) -> TermId {
        self.g.term(n)
    }

    fn fire(&mut self, r: Rule, a: NodeId, b: NodeId) -> Result<()> {
        self.fired.insert((r, a, b));
        *self.stats.applications.entry(r).or_default() += 1;
        if self.stats.total() > self.budget {
            return Err(Error::SaturationBudget(self.budget));
        }
        Ok(())
    }

    fn eq(&mut self, a: TermId, b: TermId) -> Result<()> {
        self.g.assert_eq(self.ctx, a, b)
    }

    fn diseq(&mut self, a: TermId, b: TermId) -> Result<()> {
        self.g.assert_diseq(self.ctx, a, b)
    }

    fn app(&mut self, op: Builtin, args: &[TermId]) -> Result<TermId> {
        self.ctx.mk_builtin(op, args)
    }

    fn assert_true(&mut self, t: TermId) -> Result<()> {
        let tt = self.ctx.true_term();
        self.eq(t, tt)
    }

    fn try_rule(&mut self, r: Rule, n: NodeId) -> Result<bool> {
        match r {
            Rule::ElimWrRd => self.elim_wr_rd(n),
            Rule::PartialEq => self.partial_eq(n),
            Rule::ElimWr => self.elim_wr(n),
            Rule::ElimEq => self.elim_eq(n),
            Rule::Ackermann => self.ackermann(n),
            Rule::AdtDeconstructEq => self.adt_deconstruct(n),
            Rule::AdtSplitDiseq => self.adt_split(n),
        }
    }

    /// `t = read(A, j)` with `write(s, i, v)` in the class of `A`, where the
    /// write mentions a projected variable.
    fn elim_wr_rd(&mut self, n: NodeId) -> Result<bool> {
        if self.builtin(n) != Some(Builtin::Read) {
            return Ok(false);
        }
        let (arr, j) = (self.g.children(n)[0], self.g.children(n)[1]);
        let writes: Vec<NodeId> = self
            .g
            .class_of(arr)
            .iter()
            .copied()
            .filter(|&w| self.builtin(w) == Some(Builtin::Write) && self.has_proj(w))
            .collect();
        let mut progress = false;
        for w in writes {
            if self.fired.contains(&(Rule::ElimWrRd, n, w)) {
                continue;
            }
            self.fire(Rule::ElimWrRd, n, w)?;
            progress = true;
            let (s, i, v) = (self.g.children(w)[0], self.g.children(w)[1], self.g.children(w)[2]);
            let (t, ti, tj, ts, tv) = (self.term(n), self.term(i), self.term(j), self.term(s), self.term(v));
            if self.value(i)? == self.value(j)? {
                self.eq(ti, tj)?;
                self.eq(t, tv)?;
            } else {
                self.diseq(ti, tj)?;
                let r = self.app(Builtin::Read, &[ts, tj])?;
                self.eq(t, r)?;
            }
        }
        Ok(progress)
    }

    /// An array equality mentioning a projected variable becomes a partial
    /// equality with no exceptions.
    fn partial_eq(&mut self, n: NodeId) -> Result<bool> {
        if self.builtin(n) != Some(Builtin::ExplicitEq) || self.fired.contains(&(Rule::PartialEq, n, n)) {
            return Ok(false);
        }
        let a = self.g.children(n)[0];
        if !self.ctx.is_array(self.ctx.sort_of(self.term(a))) || !self.has_proj(n) {
            return Ok(false);
        }
        self.fire(Rule::PartialEq, n, n)?;
        let (ta, tb) = (self.term(a), self.term(self.g.children(n)[1]));
        let p = self.app(Builtin::PartialEq(0), &[ta, tb])?;
        self.assert_true(p)?;
        Ok(true)
    }

    /// Splits `peq(s, write(u, i, v), I)` into `read(s, i) ≈ v` and
    /// `peq(s, u, I·i)`, or just drops the write when `i` is already in `I`
    /// under the model.
    fn elim_wr(&mut self, n: NodeId) -> Result<bool> {
        let Some(Builtin::PartialEq(_)) = self.builtin(n) else { return Ok(false) };
        let ch = self.g.children(n).to_vec();
        let mut progress = false;
        // either side may be the write; when both are, each one is split
        for (s, w) in [(ch[0], ch[1]), (ch[1], ch[0])] {
            if self.builtin(w) != Some(Builtin::Write) || !self.has_proj(w) || self.fired.contains(&(Rule::ElimWr, n, w)) {
                continue;
            }
            self.fire(Rule::ElimWr, n, w)?;
            progress = true;
            let (u, i, v) = (self.g.children(w)[0], self.g.children(w)[1], self.g.children(w)[2]);
            let vi = self.value(i)?;
            let mut covered = None;
            for &k in &ch[2..] {
                if self.value(k)? == vi {
                    covered = Some(k);
                    break;
                }
            }
            let (ts, tu, ti, tv) = (self.term(s), self.term(u), self.term(i), self.term(v));
            let mut idx: Vec<TermId> = ch[2..].iter().map(|&k| self.term(k)).collect();
            match covered {
                None => {
                    let r = self.app(Builtin::Read, &[ts, ti])?;
                    self.eq(r, tv)?;
                    idx.push(ti);
                }
                Some(k) => {
                    let tk = self.term(k);
                    self.eq(ti, tk)?;
                }
            }
            let mut args = vec![ts, tu];
            args.extend(idx);
            let p = self.app(Builtin::PartialEq(args.len() - 2), &args)?;
            self.assert_true(p)?;
        }
        Ok(progress)
    }

    /// `peq(v, e, I)` with `v` a projected array variable not occurring in
    /// `e`: `v ≈ write(e, I, d)` for fresh `d` taking `v`'s values at `I`.
    fn elim_eq(&mut self, n: NodeId) -> Result<bool> {
        let Some(Builtin::PartialEq(_)) = self.builtin(n) else { return Ok(false) };
        if self.fired.contains(&(Rule::ElimEq, n, n)) {
            return Ok(false);
        }
        let ch = self.g.children(n).to_vec();
        let free_of = |e: &Self, v: NodeId, other: NodeId| {
            let vs = BTreeSet::from([e.g.func(v)]);
            !e.ctx.mentions(e.term(other), &vs)
        };
        // a variable with a ground definition already needs no other
        let Some((v, e)) = [(ch[0], ch[1]), (ch[1], ch[0])]
            .into_iter()
            .find(|&(v, e)| self.is_proj_var(v) && free_of(self, v, e) && !self.class_is_ground(v))
        else {
            return Ok(false);
        };
        self.fire(Rule::ElimEq, n, n)?;
        let mut idx: Vec<NodeId> = Vec::new();
        let mut seen = Vec::new();
        for &k in &ch[2..] {
            let val = self.value(k)?;
            if !seen.contains(&val) {
                seen.push(val);
                idx.push(k);
            }
        }
        let tv = self.term(v);
        let (_, value_sort) = self.ctx.array_parts(self.ctx.sort_of(tv)).expect("array variable");
        let fresh_var = self.ctx.is_array(value_sort) || self.ctx.is_adt(value_sort);
        let mut w = self.term(e);
        for k in idx {
            let tk = self.term(k);
            let d = self.ctx.fresh("d!", value_sort, fresh_var);
            if fresh_var {
                self.proj.insert(d);
            }
            let rd = self.app(Builtin::Read, &[tv, tk])?;
            let val = self.m.eval(self.ctx, rd)?;
            self.m = self.m.extend(self.ctx, d, val)?;
            let td = self.ctx.mk_const(d);
            w = self.app(Builtin::Write, &[w, tk, td])?;
        }
        self.eq(tv, w)?;
        let tn = self.term(n);
        self.assert_true(tn)?;
        Ok(true)
    }

    /// Two reads of the same class of arrays containing a projected variable,
    /// at indices that are not yet known to be equal.
    fn ackermann(&mut self, n: NodeId) -> Result<bool> {
        if self.builtin(n) != Some(Builtin::Read) {
            return Ok(false);
        }
        let arr = self.g.children(n)[0];
        if !self.g.class_of(arr).iter().any(|&m| self.is_proj_var(m)) || self.is_cground(arr) {
            return Ok(false);
        }
        let root = self.g.root(arr);
        let partners: Vec<NodeId> = self
            .g
            .nodes()
            .filter(|&m| m != n && self.builtin(m) == Some(Builtin::Read) && self.g.root(self.g.children(m)[0]) == root)
            .collect();
        let mut progress = false;
        for m in partners {
            let key = (Rule::Ackermann, n.min(m), n.max(m));
            let (e1, e2) = (self.g.children(n)[1], self.g.children(m)[1]);
            if self.fired.contains(&key) || self.g.same_class(e1, e2) {
                continue;
            }
            self.fire(key.0, key.1, key.2)?;
            progress = true;
            let (t1, t2) = (self.term(e1), self.term(e2));
            if self.value(e1)? == self.value(e2)? {
                self.eq(t1, t2)?;
            } else {
                self.diseq(t1, t2)?;
            }
        }
        Ok(progress)
    }

    /// `x ≈ c(t1..tk)` mentioning a projected variable gives `sel_i(x) ≈ t_i`,
    /// and `is-c(x)` when the datatype has several constructors. When `x`
    /// is itself `c(s1..sk)` the arguments are equated instead.
    fn adt_deconstruct(&mut self, n: NodeId) -> Result<bool> {
        if self.builtin(n) != Some(Builtin::ExplicitEq) || self.fired.contains(&(Rule::AdtDeconstructEq, n, n)) {
            return Ok(false);
        }
        let ch = self.g.children(n).to_vec();
        let is_ctor = |e: &Self, k: NodeId| matches!(e.ctx.func(e.g.func(k)).kind, FuncKind::Constructor { .. });
        let (x, c) = if is_ctor(self, ch[1]) {
            (ch[0], ch[1])
        } else if is_ctor(self, ch[0]) {
            (ch[1], ch[0])
        } else {
            return Ok(false);
        };
        if !self.has_proj(n) {
            return Ok(false);
        }
        self.fire(Rule::AdtDeconstructEq, n, n)?;
        let ctor = self.g.func(c);
        if is_ctor(self, x) {
            if self.g.func(x) != ctor {
                return Err(Error::ModelMismatch("distinct constructors are equated".to_string()));
            }
            for (&a, &b) in self.g.children(x).to_vec().iter().zip(self.g.children(c).to_vec().iter()) {
                let (ta, tb) = (self.term(a), self.term(b));
                self.eq(ta, tb)?;
            }
            return Ok(true);
        }
        let tx = self.term(x);
        for (k, &a) in self.g.children(c).to_vec().iter().enumerate() {
            let sel = self.ctx.selector(ctor, k);
            let s = self.ctx.mk_app(sel, &[tx])?;
            let ta = self.term(a);
            self.eq(s, ta)?;
        }
        let adt = self.ctx.sort_of(tx);
        if self.ctx.constructors(adt).len() > 1 {
            let tester = self.ctx.tester(ctor);
            let t = self.ctx.mk_app(tester, &[tx])?;
            self.assert_true(t)?;
        }
        Ok(true)
    }

    /// A datatype disequality mentioning a projected variable is split by
    /// the model: on constructors if they differ, else on the first field
    /// where the values differ.
    fn adt_split(&mut self, n: NodeId) -> Result<bool> {
        if self.builtin(n) != Some(Builtin::Distinct) || self.fired.contains(&(Rule::AdtSplitDiseq, n, n)) {
            return Ok(false);
        }
        let ch = self.g.children(n).to_vec();
        if !self.ctx.is_adt(self.ctx.sort_of(self.term(ch[0]))) || !self.has_proj(n) {
            return Ok(false);
        }
        let (v, t) = if self.has_proj(ch[0]) { (ch[0], ch[1]) } else { (ch[1], ch[0]) };
        self.fire(Rule::AdtSplitDiseq, n, n)?;
        let (vv, vt) = (self.value(v)?, self.value(t)?);
        let (crate::model::Value::Adt(cv, fv), crate::model::Value::Adt(ct, ft)) = (&vv, &vt) else {
            return Err(Error::Model("datatype term without a datatype value".to_string()));
        };
        let (tv, tt) = (self.term(v), self.term(t));
        if cv != ct {
            let is_c = self.ctx.tester(*cv);
            if !self.is_ctor_app(v) {
                let a = self.ctx.mk_app(is_c, &[tv])?;
                self.assert_true(a)?;
            }
            if !self.is_ctor_app(t) {
                let b = self.ctx.mk_app(is_c, &[tt])?;
                let f = self.ctx.false_term();
                self.eq(b, f)?;
            }
        } else {
            let Some(k) = fv.iter().zip(ft).position(|(a, b)| a != b) else {
                return Err(Error::ModelMismatch(format!(
                    "{} and {} are equal in the model",
                    print_term(self.ctx, tv),
                    print_term(self.ctx, tt)
                )));
            };
            let cv = *cv;
            let a = self.field(v, cv, k)?;
            let b = self.field(t, cv, k)?;
            self.diseq(a, b)?;
        }
        Ok(true)
    }
}
