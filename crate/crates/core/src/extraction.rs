//! Representative functions, admissibility, and extraction of terms and
//! formulas from an egraph.

use std::collections::{BTreeSet, HashMap, HashSet};

use crate::egraph::{EGraph, NodeId};
use crate::error::{Error, Result};
use crate::terms::{Builtin, Context, Formula, Literal, TermId};

/// A possibly partial map from nodes to their class representative.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ReprFn {
    map: Vec<Option<NodeId>>,
}

impl ReprFn {
    /// The everywhere-undefined function.
    pub fn partial(num_nodes: usize) -> ReprFn {
        ReprFn { map: vec![None; num_nodes] }
    }

    /// The total function with the given representatives: every listed node
    /// represents its class; other classes are represented by `true`/`false`
    /// when they contain them, and by their smallest node otherwise.
    pub fn from_reps(g: &EGraph, reps: &[NodeId]) -> ReprFn {
        let mut r = ReprFn::partial(g.num_nodes());
        for &n in reps {
            r.set_class(g, n, n);
        }
        for root in g.classes() {
            if r.get(root).is_none() {
                let class = g.class_of(root);
                let rep = [g.true_node(), g.false_node()]
                    .into_iter()
                    .find(|b| class.contains(b))
                    .unwrap_or(class[0]);
                r.set_class(g, root, rep);
            }
        }
        r
    }

    /// Builds a function from an explicit per-node table (which need not be
    /// admissible, or even uniform on classes).
    pub fn from_table(map: Vec<Option<NodeId>>) -> ReprFn {
        ReprFn { map }
    }

    pub fn get(&self, n: NodeId) -> Option<NodeId> {
        self.map.get(n).copied().flatten()
    }

    pub fn set(&mut self, n: NodeId, rep: Option<NodeId>) {
        if self.map.len() <= n {
            self.map.resize(n + 1, None);
        }
        self.map[n] = rep;
    }

    /// Sets the representative of every member of `n`'s class.
    pub fn set_class(&mut self, g: &EGraph, n: NodeId, rep: NodeId) {
        for &m in g.class_of(n) {
            self.set(m, Some(rep));
        }
    }

    pub fn is_total(&self, g: &EGraph) -> bool {
        g.nodes().all(|n| self.get(n).is_some())
    }

    /// Representatives in id order.
    pub fn reps(&self) -> BTreeSet<NodeId> {
        self.map.iter().flatten().copied().collect()
    }

    pub fn table(&self) -> &[Option<NodeId>] {
        &self.map
    }
}

/// Edges `(n, repr(c))` for every child `c` of `n` with a representative.
pub fn repr_edges(g: &EGraph, r: &ReprFn) -> Vec<(NodeId, NodeId)> {
    let mut out = Vec::new();
    for n in g.nodes() {
        for &c in g.children(n) {
            if let Some(t) = r.get(c) {
                if !out.contains(&(n, t)) {
                    out.push((n, t));
                }
            }
        }
    }
    out
}

fn successors(g: &EGraph, r: &ReprFn) -> Vec<Vec<NodeId>> {
    let mut succ = vec![Vec::new(); g.num_nodes()];
    for (n, t) in repr_edges(g, r) {
        succ[n].push(t);
    }
    succ
}

/// Length in edges of the longest path of `G_repr`, or `None` if it has a
/// cycle.
pub fn longest_path(g: &EGraph, r: &ReprFn) -> Option<usize> {
    let succ = successors(g, r);
    // 0 = unvisited, 1 = on stack, 2 = done
    let mut state = vec![0u8; g.num_nodes()];
    let mut depth = vec![0usize; g.num_nodes()];
    for start in g.nodes() {
        if state[start] != 0 {
            continue;
        }
        let mut stack = vec![(start, 0usize)];
        state[start] = 1;
        while let Some(&mut (n, ref mut i)) = stack.last_mut() {
            if *i < succ[n].len() {
                let m = succ[n][*i];
                *i += 1;
                match state[m] {
                    0 => {
                        state[m] = 1;
                        stack.push((m, 0));
                    }
                    1 => return None,
                    _ => {}
                }
            } else {
                depth[n] = succ[n].iter().map(|&m| depth[m] + 1).max().unwrap_or(0);
                state[n] = 2;
                stack.pop();
            }
        }
    }
    Some(depth.into_iter().max().unwrap_or(0))
}

/// True iff `G_repr` has a cycle through a node reachable from `start`.
pub fn reaches_cycle(g: &EGraph, r: &ReprFn, start: NodeId) -> bool {
    let succ = successors(g, r);
    let mut state = vec![0u8; g.num_nodes()];
    let mut stack = vec![(start, 0usize)];
    state[start] = 1;
    while let Some(&mut (n, ref mut i)) = stack.last_mut() {
        if *i < succ[n].len() {
            let m = succ[n][*i];
            *i += 1;
            match state[m] {
                0 => {
                    state[m] = 1;
                    stack.push((m, 0));
                }
                1 => return true,
                _ => {}
            }
        } else {
            state[n] = 2;
            stack.pop();
        }
    }
    false
}

/// Which admissibility condition a representative function violates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Violation {
    Undefined(NodeId),
    /// Two members of a class have different representatives.
    NotUniform(NodeId, NodeId),
    /// A representative outside its node's class.
    OutsideClass(NodeId),
    Cyclic,
    /// A representative whose child has no representative.
    UndefinedChild(NodeId),
}

/// Checks that `r` is total, uniform on classes, maps each node into its own
/// class, and induces an acyclic `G_repr`.
pub fn check_admissible(g: &EGraph, r: &ReprFn) -> std::result::Result<(), Violation> {
    for n in g.nodes() {
        let Some(rep) = r.get(n) else {
            return Err(Violation::Undefined(n));
        };
        let root = g.root(n);
        if r.get(root) != Some(rep) {
            return Err(Violation::NotUniform(n, root));
        }
        if rep >= g.num_nodes() || !g.same_class(rep, n) {
            return Err(Violation::OutsideClass(n));
        }
    }
    longest_path(g, r).map(|_| ()).ok_or(Violation::Cyclic)
}

pub fn is_admissible(g: &EGraph, r: &ReprFn) -> bool {
    check_admissible(g, r).is_ok()
}

/// Admissibility of a partial function: where defined it is uniform and
/// stays inside the class, `G_repr` is acyclic, and the children of every
/// representative have representatives.
pub fn check_partial_admissible(g: &EGraph, r: &ReprFn) -> std::result::Result<(), Violation> {
    for n in g.nodes() {
        let root = g.root(n);
        if r.get(n) != r.get(root) {
            return Err(Violation::NotUniform(n, root));
        }
        if let Some(rep) = r.get(n) {
            if rep >= g.num_nodes() || !g.same_class(rep, n) {
                return Err(Violation::OutsideClass(n));
            }
            if let Some(&c) = g.children(rep).iter().find(|&&c| r.get(c).is_none()) {
                return Err(Violation::UndefinedChild(c));
            }
        }
    }
    longest_path(g, r).map(|_| ()).ok_or(Violation::Cyclic)
}

/// Memoizing extractor for one egraph and representative function.
pub struct Extractor<'a> {
    g: &'a EGraph,
    r: &'a ReprFn,
    memo: HashMap<NodeId, TermId>,
    budget: usize,
}

impl<'a> Extractor<'a> {
    /// The recursion budget is one more than the number of classes, which
    /// bounds every path of an acyclic `G_repr`.
    pub fn new(g: &'a EGraph, r: &'a ReprFn) -> Extractor<'a> {
        Extractor { g, r, memo: HashMap::new(), budget: g.num_classes() + 1 }
    }

    pub fn budget(&self) -> usize {
        self.budget
    }

    /// The term of `n` with every child replaced by the extraction of its
    /// representative.
    pub fn to_expr(&mut self, ctx: &mut Context, n: NodeId) -> Result<TermId> {
        self.go(ctx, n, 0)
    }

    fn go(&mut self, ctx: &mut Context, n: NodeId, depth: usize) -> Result<TermId> {
        if let Some(&t) = self.memo.get(&n) {
            return Ok(t);
        }
        if depth > self.budget {
            return Err(Error::ExtractionBudget { budget: self.budget });
        }
        let mut args = Vec::with_capacity(self.g.children(n).len());
        for &c in self.g.children(n) {
            let rep = self.r.get(c).unwrap_or(c);
            args.push(self.go(ctx, rep, depth + 1)?);
        }
        let t = ctx.mk_app(self.g.func(n), &args)?;
        self.memo.insert(n, t);
        Ok(t)
    }
}

pub fn to_expr(ctx: &mut Context, g: &EGraph, r: &ReprFn, n: NodeId) -> Result<TermId> {
    Extractor::new(g, r).to_expr(ctx, n)
}

/// Nodes that only encode literals (`ueq`, `distinct`, `peq`); they never
/// produce output literals of their own.
pub fn is_internal(ctx: &Context, g: &EGraph, n: NodeId) -> bool {
    matches!(
        ctx.builtin_of(g.func(n)),
        Some(Builtin::ExplicitEq | Builtin::Distinct | Builtin::PartialEq(_))
    )
}

/// Emits `to_expr(rep) ≈ to_expr(n)` for every non-representative `n`
/// such that neither `n` nor `rep` is in `exclude`, plus the recorded disequalities whose endpoint
/// representatives are both outside `exclude`. Trivial and duplicate
/// literals are dropped.
pub fn to_formula(
    ctx: &mut Context,
    g: &EGraph,
    r: &ReprFn,
    exclude: &HashSet<NodeId>,
) -> Result<Formula> {
    let mut ex = Extractor::new(g, r);
    let mut literals = Vec::new();
    let mut seen = HashSet::new();
    for root in g.classes() {
        let rep = r.get(root).unwrap_or(root);
        for &n in g.class_of(root) {
            if n == rep || exclude.contains(&n) || exclude.contains(&rep) || is_internal(ctx, g, n) {
                continue;
            }
            let lhs = ex.to_expr(ctx, rep)?;
            let rhs = ex.to_expr(ctx, n)?;
            if lhs == rhs {
                continue;
            }
            let lit = Literal::eq(ctx, lhs, rhs);
            if seen.insert(lit) {
                literals.push(lit);
            }
        }
    }
    for &(a, b) in g.diseqs() {
        let (ra, rb) = (r.get(a).unwrap_or(a), r.get(b).unwrap_or(b));
        if exclude.contains(&ra) || exclude.contains(&rb) {
            continue;
        }
        let (ta, tb) = (ex.to_expr(ctx, ra)?, ex.to_expr(ctx, rb)?);
        if seen.insert(Literal::Diseq(ta, tb)) && seen.insert(Literal::Diseq(tb, ta)) {
            literals.push(Literal::Diseq(ta, tb));
        }
    }
    let mut f = Formula::new(literals, Vec::new());
    f.vars = f.occurring_vars(ctx).into_iter().collect();
    Ok(f)
}
