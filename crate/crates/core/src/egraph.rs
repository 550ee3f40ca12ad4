//! Egraphs: hash-consed nodes over terms, a root map closed under
//! congruence, parent lists and recorded disequalities.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write;

use crate::error::{Error, Result};
use crate::extraction::ReprFn;
use crate::terms::{print_term, Builtin, Context, Formula, FuncId, Literal, TermId};

pub type NodeId = usize;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ENode {
    pub func: FuncId,
    pub children: Vec<NodeId>,
    pub term: TermId,
}

#[derive(Debug, Clone)]
pub struct EGraph {
    nodes: Vec<ENode>,
    root: Vec<NodeId>,
    /// Sorted members, indexed by root.
    members: Vec<Vec<NodeId>>,
    /// Nodes with an edge to the node, in creation order.
    parents: Vec<Vec<NodeId>>,
    /// Parents of every member, indexed by root.
    class_parents: Vec<Vec<NodeId>>,
    term_node: HashMap<TermId, NodeId>,
    hashcons: HashMap<(FuncId, Vec<NodeId>), NodeId>,
    diseqs: BTreeSet<(NodeId, NodeId)>,
    true_node: NodeId,
    false_node: NodeId,
    version: u64,
}

impl EGraph {
    pub fn new(ctx: &Context) -> EGraph {
        let mut g = EGraph {
            nodes: Vec::new(),
            root: Vec::new(),
            members: Vec::new(),
            parents: Vec::new(),
            class_parents: Vec::new(),
            term_node: HashMap::new(),
            hashcons: HashMap::new(),
            diseqs: BTreeSet::new(),
            true_node: 0,
            false_node: 0,
            version: 0,
        };
        g.true_node = g.add_term(ctx, ctx.true_term());
        g.false_node = g.add_term(ctx, ctx.false_term());
        g
    }

    /// Builds the egraph of a conjunction. Literals are processed in order;
    /// `ueq(a, b)` literals get their own node (equal to `true`) and also
    /// merge `a` with `b`, while disequalities are recorded and get a
    /// `distinct` node equal to `true`.
    pub fn from_formula(ctx: &mut Context, f: &Formula) -> Result<EGraph> {
        let mut g = EGraph::new(ctx);
        for lit in &f.literals {
            g.assert_literal(ctx, lit)?;
        }
        Ok(g)
    }

    pub fn assert_literal(&mut self, ctx: &mut Context, lit: &Literal) -> Result<()> {
        match *lit {
            Literal::Eq(a, b) => self.assert_eq(ctx, a, b),
            Literal::Diseq(a, b) => self.assert_diseq(ctx, a, b),
            Literal::ExplicitEq(a, b) => {
                let a_node = self.add_term(ctx, a);
                let b_node = self.add_term(ctx, b);
                let u = ctx.mk_builtin(Builtin::ExplicitEq, &[a, b])?;
                let u = self.add_term(ctx, u);
                self.merge(u, self.true_node)?;
                self.merge(a_node, b_node)
            }
        }
    }

    /// Returns the node of `t`, creating nodes for `t` and its subterms as
    /// needed and restoring congruence closure.
    pub fn add_term(&mut self, ctx: &Context, t: TermId) -> NodeId {
        if let Some(&n) = self.term_node.get(&t) {
            return n;
        }
        let children: Vec<NodeId> = ctx.args(t).iter().map(|&a| self.add_term(ctx, a)).collect();
        let func = ctx.func_of(t);
        let n = self.nodes.len();
        self.nodes.push(ENode { func, children: children.clone(), term: t });
        self.root.push(n);
        self.members.push(vec![n]);
        self.parents.push(Vec::new());
        self.class_parents.push(Vec::new());
        self.term_node.insert(t, n);
        self.version += 1;
        for &c in &children {
            if !self.parents[c].contains(&n) {
                self.parents[c].push(n);
                let r = self.root[c];
                self.class_parents[r].push(n);
            }
        }
        let key = (func, children.iter().map(|&c| self.root[c]).collect());
        match self.hashcons.get(&key) {
            Some(&q) => {
                // n has no parents yet, so this cannot collapse anything new.
                let _ = self.merge(n, q);
            }
            None => {
                self.hashcons.insert(key, n);
            }
        }
        n
    }

    pub fn assert_eq(&mut self, ctx: &Context, t1: TermId, t2: TermId) -> Result<()> {
        let a = self.add_term(ctx, t1);
        let b = self.add_term(ctx, t2);
        self.merge(a, b)
    }

    pub fn assert_diseq(&mut self, ctx: &mut Context, t1: TermId, t2: TermId) -> Result<()> {
        let a = self.add_term(ctx, t1);
        let b = self.add_term(ctx, t2);
        if self.root[a] == self.root[b] {
            return Err(Error::Inconsistent(format!(
                "{} and {} are both equal and distinct",
                print_term(ctx, t1),
                print_term(ctx, t2)
            )));
        }
        let d = ctx.mk_builtin(Builtin::Distinct, &[t1, t2])?;
        let d = self.add_term(ctx, d);
        if self.diseqs.insert((a.min(b), a.max(b))) {
            self.version += 1;
        }
        self.merge(d, self.true_node)
    }

    /// Merges the classes of `a` and `b` and restores congruence closure.
    pub fn merge(&mut self, a: NodeId, b: NodeId) -> Result<()> {
        let mut pending = vec![(a, b)];
        while let Some((a, b)) = pending.pop() {
            let (ra, rb) = (self.root[a], self.root[b]);
            if ra == rb {
                continue;
            }
            self.version += 1;
            let (keep, gone) = (ra.min(rb), ra.max(rb));
            let moved = std::mem::take(&mut self.members[gone]);
            for &m in &moved {
                self.root[m] = keep;
            }
            let mut merged = std::mem::take(&mut self.members[keep]);
            merged.extend(moved);
            merged.sort_unstable();
            self.members[keep] = merged;
            let gone_parents = std::mem::take(&mut self.class_parents[gone]);
            for &p in &gone_parents {
                let key = self.key(p);
                match self.hashcons.get(&key) {
                    Some(&q) if self.root[q] != self.root[p] => pending.push((p, q)),
                    Some(_) => {}
                    None => {
                        self.hashcons.insert(key, p);
                    }
                }
            }
            self.class_parents[keep].extend(gone_parents);
        }
        self.check_consistent()
    }

    fn key(&self, n: NodeId) -> (FuncId, Vec<NodeId>) {
        let node = &self.nodes[n];
        (node.func, node.children.iter().map(|&c| self.root[c]).collect())
    }

    fn check_consistent(&self) -> Result<()> {
        if self.root[self.true_node] == self.root[self.false_node] {
            return Err(Error::Inconsistent("true is equal to false".to_string()));
        }
        if let Some(&(a, b)) = self.diseqs.iter().find(|&&(a, b)| self.root[a] == self.root[b]) {
            return Err(Error::Inconsistent(format!("disequal nodes {a} and {b} were merged")));
        }
        Ok(())
    }

    // ---- views -------------------------------------------------------------

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> std::ops::Range<NodeId> {
        0..self.nodes.len()
    }

    pub fn node(&self, n: NodeId) -> &ENode {
        &self.nodes[n]
    }

    pub fn children(&self, n: NodeId) -> &[NodeId] {
        &self.nodes[n].children
    }

    pub fn term(&self, n: NodeId) -> TermId {
        self.nodes[n].term
    }

    pub fn func(&self, n: NodeId) -> FuncId {
        self.nodes[n].func
    }

    pub fn is_leaf(&self, n: NodeId) -> bool {
        self.nodes[n].children.is_empty()
    }

    pub fn root(&self, n: NodeId) -> NodeId {
        self.root[n]
    }

    pub fn same_class(&self, a: NodeId, b: NodeId) -> bool {
        self.root[a] == self.root[b]
    }

    /// Members of `n`'s class, in id order.
    pub fn class_of(&self, n: NodeId) -> &[NodeId] {
        &self.members[self.root[n]]
    }

    /// Class roots in id order.
    pub fn classes(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.nodes().filter(|&n| self.root[n] == n)
    }

    pub fn num_classes(&self) -> usize {
        self.classes().count()
    }

    pub fn parents(&self, n: NodeId) -> &[NodeId] {
        &self.parents[n]
    }

    pub fn node_of(&self, t: TermId) -> Option<NodeId> {
        self.term_node.get(&t).copied()
    }

    pub fn true_node(&self) -> NodeId {
        self.true_node
    }

    pub fn false_node(&self) -> NodeId {
        self.false_node
    }

    /// Recorded disequalities as node pairs (smaller id first).
    pub fn diseqs(&self) -> &BTreeSet<(NodeId, NodeId)> {
        &self.diseqs
    }

    /// Bumped by every change; lets callers cache derived data.
    pub fn version(&self) -> u64 {
        self.version
    }

    /// True iff `n` is labeled by a variable.
    pub fn is_var_node(&self, ctx: &Context, n: NodeId) -> bool {
        ctx.is_var(self.nodes[n].func)
    }

    /// True iff `n` and `m` have the same label, arity and pairwise
    /// root-equal children.
    pub fn congruent(&self, n: NodeId, m: NodeId) -> bool {
        let (a, b) = (&self.nodes[n], &self.nodes[m]);
        a.func == b.func
            && a.children.len() == b.children.len()
            && a.children.iter().zip(&b.children).all(|(&x, &y)| self.root[x] == self.root[y])
    }

    /// Exhaustive check of congruence closure and root idempotence.
    pub fn check_invariants(&self) -> std::result::Result<(), String> {
        for n in self.nodes() {
            if self.root[self.root[n]] != self.root[n] {
                return Err(format!("root of {n} is not a root"));
            }
            if !self.members[self.root[n]].contains(&n) {
                return Err(format!("{n} missing from its class"));
            }
        }
        for n in self.nodes() {
            for m in n + 1..self.nodes.len() {
                if !self.nodes[n].children.is_empty() && self.congruent(n, m) && !self.same_class(n, m) {
                    return Err(format!("congruent nodes {n} and {m} are in different classes"));
                }
            }
        }
        Ok(())
    }

    /// Renders the egraph in DOT: solid child edges, dashed red edges to the
    /// root, and dotted blue representative edges when `repr` is given.
    pub fn dump_dot(&self, ctx: &Context, repr: Option<&ReprFn>) -> String {
        let mut out = String::from("digraph egraph {\n  node [shape=box];\n");
        for n in self.nodes() {
            let label = ctx.func(self.nodes[n].func).name.replace('"', "\\\"");
            let _ = writeln!(out, "  n{n} [label=\"{n}: {label}\"];");
        }
        for n in self.nodes() {
            for (i, &c) in self.nodes[n].children.iter().enumerate() {
                let _ = writeln!(out, "  n{n} -> n{c} [label=\"{i}\"];");
            }
            if self.root[n] != n {
                let _ = writeln!(out, "  n{n} -> n{} [style=dashed, color=red];", self.root[n]);
            }
        }
        if let Some(r) = repr {
            for (n, target) in crate::extraction::repr_edges(self, r) {
                let _ = writeln!(out, "  n{n} -> n{target} [style=dotted, color=blue];");
            }
        }
        out.push_str("}\n");
        out
    }
}
