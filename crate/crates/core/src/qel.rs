//! Quantifier reduction over egraphs: c-groundness, choice of
//! representatives, refinement, core computation and the QEL driver.

use std::collections::{BTreeSet, HashMap, HashSet};

use crate::egraph::{EGraph, NodeId};
use crate::error::Result;
use crate::extraction::{reaches_cycle, repr_edges, to_formula, Extractor, ReprFn};
use crate::terms::{Context, Formula, FuncId};

/// Constructively ground nodes and the classes containing one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CGroundInfo {
    pub cground: Vec<bool>,
    /// Indexed by class root.
    pub ground_class: Vec<bool>,
}

impl CGroundInfo {
    pub fn is_cground(&self, n: NodeId) -> bool {
        self.cground[n]
    }

    pub fn class_is_ground(&self, g: &EGraph, n: NodeId) -> bool {
        self.ground_class[g.root(n)]
    }
}

fn is_var(g: &EGraph, vars: &BTreeSet<FuncId>, n: NodeId) -> bool {
    vars.contains(&g.func(n))
}

/// Least fixpoint: a node is c-ground if its term has no variable of
/// `vars`, or it has children and all of their classes are ground; a class
/// is ground if it has a c-ground member.
pub fn compute_cground(g: &EGraph, vars: &BTreeSet<FuncId>) -> CGroundInfo {
    let n = g.num_nodes();
    let mut syntactic = vec![false; n];
    for m in g.nodes() {
        syntactic[m] = !is_var(g, vars, m) && g.children(m).iter().all(|&c| syntactic[c]);
    }
    let mut cground = syntactic;
    let mut ground_class = vec![false; n];
    for m in g.nodes() {
        if cground[m] {
            ground_class[g.root(m)] = true;
        }
    }
    let mut todo: Vec<NodeId> = g.nodes().filter(|&m| cground[m]).collect();
    while let Some(m) = todo.pop() {
        for &c in g.class_of(m) {
            for &p in g.parents(c) {
                if cground[p] || is_var(g, vars, p) {
                    continue;
                }
                if g.children(p).iter().all(|&k| ground_class[g.root(k)]) {
                    cground[p] = true;
                    if !ground_class[g.root(p)] {
                        ground_class[g.root(p)] = true;
                        todo.push(p);
                    }
                }
            }
        }
    }
    CGroundInfo { cground, ground_class }
}

/// Extends a partial representative function from a stack of nodes whose
/// children all have representatives. A popped node whose class is still
/// unassigned decides the class: a leaf hands the choice to the best leaf
/// of its class (`true`/`false`, then ground leaves, then the smallest id),
/// other nodes represent the class themselves. Classes of `true`/`false`
/// are always represented by the constant.
pub fn process(g: &EGraph, vars: &BTreeSet<FuncId>, r: &mut ReprFn, mut todo: Vec<NodeId>) {
    while let Some(n) = todo.pop() {
        if r.get(n).is_some() {
            continue;
        }
        let class = g.class_of(n);
        let ground_leaf = class.iter().any(|&m| g.is_leaf(m) && !is_var(g, vars, m));
        let rep = if g.is_leaf(n) || ground_leaf { leaf_rep(g, vars, n) } else { n };
        r.set_class(g, n, rep);
        for &m in g.class_of(n) {
            for &p in g.parents(m) {
                if r.get(p).is_none() && g.children(p).iter().all(|&c| r.get(c).is_some()) {
                    todo.push(p);
                }
            }
        }
    }
}

fn leaf_rep(g: &EGraph, vars: &BTreeSet<FuncId>, n: NodeId) -> NodeId {
    let class = g.class_of(n);
    if let Some(&b) = class.iter().find(|&&m| m == g.true_node() || m == g.false_node()) {
        return b;
    }
    let mut leaves = class.iter().copied().filter(|&m| g.is_leaf(m));
    let ground = leaves.clone().find(|&m| !is_var(g, vars, m));
    ground.unwrap_or_else(|| leaves.next().unwrap_or(n))
}

/// Chooses representatives preferring c-ground ones: first from the ground
/// leaves, then from all leaves.
pub fn find_defs(g: &EGraph, vars: &BTreeSet<FuncId>) -> ReprFn {
    let mut r = ReprFn::partial(g.num_nodes());
    let ground_leaves = g.nodes().filter(|&n| g.is_leaf(n) && !is_var(g, vars, n)).collect();
    process(g, vars, &mut r, ground_leaves);
    let leaves = g.nodes().filter(|&n| g.is_leaf(n)).collect();
    process(g, vars, &mut r, leaves);
    r
}

/// Replaces variable representatives by non-variable class members when
/// that keeps `G_repr` acyclic. Classes are visited in id order.
pub fn refine_defs(g: &EGraph, r: &ReprFn, vars: &BTreeSet<FuncId>) -> ReprFn {
    let mut r = r.clone();
    let roots: Vec<NodeId> = g.classes().collect();
    for root in roots {
        let Some(rep) = r.get(root) else { continue };
        if !is_var(g, vars, rep) {
            continue;
        }
        for &cand in g.class_of(root) {
            if is_var(g, vars, cand) {
                continue;
            }
            r.set_class(g, root, cand);
            if !reaches_cycle(g, &r, cand) {
                break;
            }
            r.set_class(g, root, rep);
        }
    }
    r
}

/// Representatives plus every node that is neither a variable nor
/// congruent to a node already kept, in id order.
pub fn find_core(g: &EGraph, r: &ReprFn, vars: &BTreeSet<FuncId>) -> BTreeSet<NodeId> {
    let mut core: BTreeSet<NodeId> = g.nodes().filter(|&n| r.get(n) == Some(n)).collect();
    let key = |n: NodeId| (g.func(n), g.children(n).iter().map(|&c| g.root(c)).collect::<Vec<_>>());
    let mut keys: HashSet<_> = core.iter().map(|&n| key(n)).collect();
    for n in g.nodes() {
        if core.contains(&n) || is_var(g, vars, n) {
            continue;
        }
        if !g.is_leaf(n) && !keys.insert(key(n)) {
            continue;
        }
        core.insert(n);
    }
    core
}

/// Everything QEL computed, for inspection.
#[derive(Debug, Clone)]
pub struct QelRun {
    pub formula: Formula,
    pub egraph: EGraph,
    pub repr: ReprFn,
    pub core: BTreeSet<NodeId>,
}

/// Runs QEL on `f`, eliminating the variables `f.vars`.
pub fn qel(ctx: &mut Context, f: &Formula) -> Result<Formula> {
    Ok(qel_run(ctx, f)?.formula)
}

pub fn qel_run(ctx: &mut Context, f: &Formula) -> Result<QelRun> {
    let g = EGraph::from_formula(ctx, f)?;
    let vars: BTreeSet<FuncId> = f.vars.iter().copied().collect();
    qel_tail(ctx, g, &vars)
}

/// Representatives, refinement, core and extraction on a built egraph.
pub fn qel_tail(ctx: &mut Context, g: EGraph, vars: &BTreeSet<FuncId>) -> Result<QelRun> {
    let repr = refine_defs(&g, &find_defs(&g, vars), vars);
    let core = find_core(&g, &repr, vars);
    let exclude: HashSet<NodeId> = g.nodes().filter(|n| !core.contains(n)).collect();
    let formula = to_formula(ctx, &g, &repr, &exclude)?;
    Ok(QelRun { formula, egraph: g, repr, core })
}

/// Checks that every ground class has a c-ground representative whose
/// extraction is a ground term. Returns the first offending node.
pub fn check_maximally_ground(
    ctx: &mut Context,
    g: &EGraph,
    r: &ReprFn,
    vars: &BTreeSet<FuncId>,
) -> std::result::Result<(), NodeId> {
    let info = compute_cground(g, vars);
    let mut ex = Extractor::new(g, r);
    for n in g.nodes() {
        if !info.class_is_ground(g, n) {
            continue;
        }
        let Some(rep) = r.get(n) else { return Err(n) };
        if !info.is_cground(rep) {
            return Err(n);
        }
        match ex.to_expr(ctx, rep) {
            Ok(t) if !ctx.mentions(t, vars) => {}
            _ => return Err(n),
        }
    }
    Ok(())
}

/// Variables that may appear in QEL's output: those whose nodes are
/// reachable in `G_repr` (or through child edges of the starting nodes) from
/// core nodes of classes with more than one core node, or from the
/// representatives of recorded disequalities.
pub fn reachable_vars(g: &EGraph, r: &ReprFn, core: &BTreeSet<NodeId>, vars: &BTreeSet<FuncId>) -> BTreeSet<FuncId> {
    let mut per_class: HashMap<NodeId, usize> = HashMap::new();
    for &n in core {
        *per_class.entry(g.root(n)).or_default() += 1;
    }
    let mut start: Vec<NodeId> = core.iter().copied().filter(|&n| per_class[&g.root(n)] > 1).collect();
    for &(a, b) in g.diseqs() {
        start.extend(r.get(a));
        start.extend(r.get(b));
    }
    let mut succ: HashMap<NodeId, Vec<NodeId>> = HashMap::new();
    for (n, t) in repr_edges(g, r) {
        succ.entry(n).or_default().push(t);
    }
    let mut seen: HashSet<NodeId> = HashSet::new();
    let mut out = BTreeSet::new();
    while let Some(n) = start.pop() {
        if !seen.insert(n) {
            continue;
        }
        if is_var(g, vars, n) {
            out.insert(g.func(n));
        }
        start.extend(succ.get(&n).into_iter().flatten().copied());
    }
    out
}
