//! Sorts, signatures and hash-consed terms.
//!
//! Everything lives in a [`Context`]: sorts, function symbols (including
//! variables, numerals and the instantiations of polymorphic builtins such as
//! `read`/`write`) and the term store. Terms are hash-consed, so two terms are
//! structurally equal iff their [`TermId`]s are equal. A context only ever
//! grows; ids handed out stay valid.
//!
//! Predicates are Bool-valued functions: `P(a)` is the literal `P(a) ≈ true`.

mod parse;
mod print;
pub mod sexp;

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use crate::error::{Error, Result};

pub use parse::{parse_formula, parse_literals, parse_sort, Command, Problem};
pub use print::{print_formula, print_literal, print_problem, print_sort, print_term};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SortId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FuncId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TermId(pub u32);

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SortKind {
    Uninterpreted,
    Bool,
    Int,
    Array { index: SortId, value: SortId },
    /// Constructor symbols, in declaration order.
    Adt { constructors: Vec<FuncId> },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sort {
    pub name: String,
    pub kind: SortKind,
}

/// Interpreted (or otherwise special) function symbols.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Builtin {
    Add,
    Sub,
    Gt,
    Ge,
    Lt,
    Le,
    Read,
    Write,
    /// The explicit equality `ueq(a, b)`: a Bool application that is also
    /// read as `a ≈ b`.
    ExplicitEq,
    Distinct,
    /// Partial equality `peq(a, b, i1..ik)`: `a` and `b` agree outside
    /// the `k` listed indices.
    PartialEq(usize),
}

impl Builtin {
    pub fn name(self) -> &'static str {
        match self {
            Builtin::Add => "+",
            Builtin::Sub => "-",
            Builtin::Gt => ">",
            Builtin::Ge => ">=",
            Builtin::Lt => "<",
            Builtin::Le => "<=",
            Builtin::Read => "read",
            Builtin::Write => "write",
            Builtin::ExplicitEq => "ueq",
            Builtin::Distinct => "distinct",
            Builtin::PartialEq(_) => "peq",
        }
    }

    fn from_name(name: &str) -> Option<Builtin> {
        Some(match name {
            "+" => Builtin::Add,
            "-" => Builtin::Sub,
            ">" => Builtin::Gt,
            ">=" => Builtin::Ge,
            "<" => Builtin::Lt,
            "<=" => Builtin::Le,
            "read" | "select" => Builtin::Read,
            "write" | "store" => Builtin::Write,
            "ueq" => Builtin::ExplicitEq,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FuncKind {
    /// Uninterpreted function or constant to keep.
    Uninterpreted,
    /// Free variable to eliminate.
    Var,
    True,
    False,
    Numeral(i64),
    Builtin(Builtin),
    Constructor { adt: SortId, index: usize },
    Selector { constructor: FuncId, field: usize },
    Tester { constructor: FuncId },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FuncDecl {
    pub name: String,
    pub args: Vec<SortId>,
    pub ret: SortId,
    pub kind: FuncKind,
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct TermData {
    func: FuncId,
    args: Vec<TermId>,
    sort: SortId,
    ground: bool,
}

/// User-visible declarations, in source order (used for printing).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decl {
    Sort(SortId),
    Datatype(SortId),
    Func(FuncId),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Literal {
    Eq(TermId, TermId),
    Diseq(TermId, TermId),
    ExplicitEq(TermId, TermId),
}

impl Literal {
    /// Builds `lhs ≈ rhs`, keeping a Bool constant on the right so that
    /// predicate literals have the canonical shape `P(a) ≈ true`.
    pub fn eq(ctx: &Context, lhs: TermId, rhs: TermId) -> Literal {
        if ctx.is_bool_const(lhs) && !ctx.is_bool_const(rhs) {
            Literal::Eq(rhs, lhs)
        } else {
            Literal::Eq(lhs, rhs)
        }
    }

    pub fn sides(&self) -> (TermId, TermId) {
        match *self {
            Literal::Eq(a, b) | Literal::Diseq(a, b) | Literal::ExplicitEq(a, b) => (a, b),
        }
    }
}

/// A conjunction of literals together with the variables it quantifies.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Formula {
    pub literals: Vec<Literal>,
    pub vars: Vec<FuncId>,
}

impl Formula {
    pub fn new(literals: Vec<Literal>, vars: Vec<FuncId>) -> Formula {
        Formula { literals, vars }
    }

    pub fn is_true(&self) -> bool {
        self.literals.is_empty()
    }

    /// Variables (symbols of kind [`FuncKind::Var`]) that occur in the literals.
    pub fn occurring_vars(&self, ctx: &Context) -> BTreeSet<FuncId> {
        let mut out = BTreeSet::new();
        for lit in &self.literals {
            let (a, b) = lit.sides();
            ctx.collect_vars(a, &mut out);
            ctx.collect_vars(b, &mut out);
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct Context {
    sorts: Vec<Sort>,
    sort_names: HashMap<String, SortId>,
    array_sorts: HashMap<(SortId, SortId), SortId>,
    funcs: Vec<FuncDecl>,
    names: HashMap<String, FuncId>,
    builtins: HashMap<(Builtin, Vec<SortId>), FuncId>,
    numerals: HashMap<i64, FuncId>,
    terms: Vec<TermData>,
    hashcons: HashMap<(FuncId, Vec<TermId>), TermId>,
    decls: Vec<Decl>,
    bool_sort: SortId,
    int_sort: SortId,
    true_term: TermId,
    false_term: TermId,
}

impl Default for Context {
    fn default() -> Self {
        Self::new()
    }
}

impl Context {
    pub fn new() -> Context {
        let mut ctx = Context {
            sorts: Vec::new(),
            sort_names: HashMap::new(),
            array_sorts: HashMap::new(),
            funcs: Vec::new(),
            names: HashMap::new(),
            builtins: HashMap::new(),
            numerals: HashMap::new(),
            terms: Vec::new(),
            hashcons: HashMap::new(),
            decls: Vec::new(),
            bool_sort: SortId(0),
            int_sort: SortId(1),
            true_term: TermId(0),
            false_term: TermId(1),
        };
        ctx.bool_sort = ctx.push_sort("Bool", SortKind::Bool);
        ctx.int_sort = ctx.push_sort("Int", SortKind::Int);
        let t = ctx.push_func("true", vec![], ctx.bool_sort, FuncKind::True);
        let f = ctx.push_func("false", vec![], ctx.bool_sort, FuncKind::False);
        ctx.true_term = ctx.mk_app(t, &[]).expect("true is well sorted");
        ctx.false_term = ctx.mk_app(f, &[]).expect("false is well sorted");
        ctx
    }

    fn push_sort(&mut self, name: &str, kind: SortKind) -> SortId {
        let id = SortId(self.sorts.len() as u32);
        self.sorts.push(Sort { name: name.to_string(), kind });
        self.sort_names.insert(name.to_string(), id);
        id
    }

    fn push_func(&mut self, name: &str, args: Vec<SortId>, ret: SortId, kind: FuncKind) -> FuncId {
        let id = FuncId(self.funcs.len() as u32);
        let registered = matches!(
            kind,
            FuncKind::Uninterpreted
                | FuncKind::Var
                | FuncKind::True
                | FuncKind::False
                | FuncKind::Constructor { .. }
                | FuncKind::Selector { .. }
                | FuncKind::Tester { .. }
        );
        self.funcs.push(FuncDecl { name: name.to_string(), args, ret, kind });
        if registered {
            self.names.insert(name.to_string(), id);
        }
        id
    }

    fn check_fresh_name(&self, name: &str) -> Result<()> {
        if self.names.contains_key(name)
            || Builtin::from_name(name).is_some()
            || matches!(name, "distinct" | "peq" | "=" | "not" | "and")
            || name.parse::<i64>().is_ok()
        {
            return Err(Error::Duplicate(name.to_string()));
        }
        Ok(())
    }

    // ---- sorts -------------------------------------------------------------

    pub fn bool_sort(&self) -> SortId {
        self.bool_sort
    }

    pub fn int_sort(&self) -> SortId {
        self.int_sort
    }

    pub fn sort(&self, s: SortId) -> &Sort {
        &self.sorts[s.0 as usize]
    }

    pub fn sorts(&self) -> impl Iterator<Item = SortId> + '_ {
        (0..self.sorts.len() as u32).map(SortId)
    }

    pub fn sort_by_name(&self, name: &str) -> Option<SortId> {
        self.sort_names.get(name).copied()
    }

    pub fn declare_sort(&mut self, name: &str) -> Result<SortId> {
        if self.sort_names.contains_key(name) {
            return Err(Error::Duplicate(name.to_string()));
        }
        let id = self.push_sort(name, SortKind::Uninterpreted);
        self.decls.push(Decl::Sort(id));
        Ok(id)
    }

    pub fn array_sort(&mut self, index: SortId, value: SortId) -> SortId {
        if let Some(&s) = self.array_sorts.get(&(index, value)) {
            return s;
        }
        let id = SortId(self.sorts.len() as u32);
        let name = format!("(Array {} {})", self.sort(index).name, self.sort(value).name);
        self.sorts.push(Sort { name, kind: SortKind::Array { index, value } });
        self.array_sorts.insert((index, value), id);
        id
    }

    pub fn is_array(&self, s: SortId) -> bool {
        matches!(self.sort(s).kind, SortKind::Array { .. })
    }

    pub fn is_adt(&self, s: SortId) -> bool {
        matches!(self.sort(s).kind, SortKind::Adt { .. })
    }

    pub fn array_parts(&self, s: SortId) -> Option<(SortId, SortId)> {
        match self.sort(s).kind {
            SortKind::Array { index, value } => Some((index, value)),
            _ => None,
        }
    }

    pub fn constructors(&self, s: SortId) -> &[FuncId] {
        match &self.sort(s).kind {
            SortKind::Adt { constructors } => constructors,
            _ => &[],
        }
    }

    /// Declares a (non-recursive) datatype. Each constructor is given as its
    /// name and its `(selector, sort)` fields. Testers are named `is-<ctor>`.
    pub fn declare_datatype(
        &mut self,
        name: &str,
        constructors: &[(String, Vec<(String, SortId)>)],
    ) -> Result<SortId> {
        if self.sort_names.contains_key(name) {
            return Err(Error::Duplicate(name.to_string()));
        }
        if constructors.is_empty() {
            return Err(Error::Sort(format!("datatype `{name}` has no constructors")));
        }
        let id = self.push_sort(name, SortKind::Adt { constructors: Vec::new() });
        let mut ctor_ids = Vec::new();
        for (index, (cname, fields)) in constructors.iter().enumerate() {
            self.check_fresh_name(cname)?;
            for (_, fs) in fields {
                if *fs == id {
                    return Err(Error::Sort(format!("recursive datatype `{name}` is not supported")));
                }
            }
            let args = fields.iter().map(|(_, s)| *s).collect();
            let c = self.push_func(cname, args, id, FuncKind::Constructor { adt: id, index });
            ctor_ids.push(c);
            for (field, (sname, fsort)) in fields.iter().enumerate() {
                self.check_fresh_name(sname)?;
                self.push_func(sname, vec![id], *fsort, FuncKind::Selector { constructor: c, field });
            }
            let tester = format!("is-{cname}");
            self.check_fresh_name(&tester)?;
            let b = self.bool_sort;
            self.push_func(&tester, vec![id], b, FuncKind::Tester { constructor: c });
        }
        self.sorts[id.0 as usize].kind = SortKind::Adt { constructors: ctor_ids };
        self.decls.push(Decl::Datatype(id));
        Ok(id)
    }

    // ---- function symbols --------------------------------------------------

    pub fn func(&self, f: FuncId) -> &FuncDecl {
        &self.funcs[f.0 as usize]
    }

    pub fn funcs(&self) -> impl Iterator<Item = FuncId> + '_ {
        (0..self.funcs.len() as u32).map(FuncId)
    }

    pub fn lookup(&self, name: &str) -> Option<FuncId> {
        self.names.get(name).copied()
    }

    pub fn decls(&self) -> &[Decl] {
        &self.decls
    }

    pub fn declare_fun(&mut self, name: &str, args: &[SortId], ret: SortId) -> Result<FuncId> {
        self.check_fresh_name(name)?;
        let f = self.push_func(name, args.to_vec(), ret, FuncKind::Uninterpreted);
        self.decls.push(Decl::Func(f));
        Ok(f)
    }

    /// Declares a free variable (a symbol to eliminate).
    pub fn declare_var(&mut self, name: &str, sort: SortId) -> Result<FuncId> {
        self.check_fresh_name(name)?;
        let f = self.push_func(name, vec![], sort, FuncKind::Var);
        self.decls.push(Decl::Func(f));
        Ok(f)
    }

    /// Declares a symbol `<prefix><n>` for the smallest `n` not yet taken.
    pub fn fresh(&mut self, prefix: &str, sort: SortId, var: bool) -> FuncId {
        let mut n = 0usize;
        loop {
            let name = format!("{prefix}{n}");
            if self.check_fresh_name(&name).is_ok() {
                return if var {
                    self.declare_var(&name, sort).expect("fresh name")
                } else {
                    self.declare_fun(&name, &[], sort).expect("fresh name")
                };
            }
            n += 1;
        }
    }

    pub fn is_var(&self, f: FuncId) -> bool {
        self.func(f).kind == FuncKind::Var
    }

    pub fn numeral(&mut self, n: i64) -> FuncId {
        if let Some(&f) = self.numerals.get(&n) {
            return f;
        }
        let int = self.int_sort;
        let f = self.push_func(&n.to_string(), vec![], int, FuncKind::Numeral(n));
        self.numerals.insert(n, f);
        f
    }

    pub fn builtin_name(name: &str) -> Option<Builtin> {
        Builtin::from_name(name)
    }

    /// Instantiates a polymorphic builtin at the given argument sorts,
    /// checking them.
    pub fn builtin(&mut self, op: Builtin, args: &[SortId]) -> Result<FuncId> {
        if let Some(&f) = self.builtins.get(&(op, args.to_vec())) {
            return Ok(f);
        }
        let int = self.int_sort;
        let b = self.bool_sort;
        let arity_err = |n: usize| {
            Error::Sort(format!("`{}` expects {n} arguments, got {}", op.name(), args.len()))
        };
        let ret = match op {
            Builtin::Add | Builtin::Sub => {
                if args.len() != 2 {
                    return Err(arity_err(2));
                }
                if args.iter().any(|&s| s != int) {
                    return Err(Error::Sort(format!("`{}` expects Int arguments", op.name())));
                }
                int
            }
            Builtin::Gt | Builtin::Ge | Builtin::Lt | Builtin::Le => {
                if args.len() != 2 {
                    return Err(arity_err(2));
                }
                if args.iter().any(|&s| s != int) {
                    return Err(Error::Sort(format!("`{}` expects Int arguments", op.name())));
                }
                b
            }
            Builtin::Read => {
                if args.len() != 2 {
                    return Err(arity_err(2));
                }
                match self.array_parts(args[0]) {
                    Some((i, v)) if i == args[1] => v,
                    _ => return Err(Error::Sort("ill-sorted `read`".to_string())),
                }
            }
            Builtin::Write => {
                if args.len() != 3 {
                    return Err(arity_err(3));
                }
                match self.array_parts(args[0]) {
                    Some((i, v)) if i == args[1] && v == args[2] => args[0],
                    _ => return Err(Error::Sort("ill-sorted `write`".to_string())),
                }
            }
            Builtin::ExplicitEq | Builtin::Distinct => {
                if args.len() != 2 {
                    return Err(arity_err(2));
                }
                if args[0] != args[1] {
                    return Err(Error::Sort(format!("`{}` between different sorts", op.name())));
                }
                b
            }
            Builtin::PartialEq(k) => {
                if args.len() != k + 2 {
                    return Err(arity_err(k + 2));
                }
                match self.array_parts(args[0]) {
                    Some((i, _)) if args[1] == args[0] && args[2..].iter().all(|&s| s == i) => b,
                    _ => return Err(Error::Sort("ill-sorted `peq`".to_string())),
                }
            }
        };
        let f = self.push_func(op.name(), args.to_vec(), ret, FuncKind::Builtin(op));
        self.builtins.insert((op, args.to_vec()), f);
        Ok(f)
    }

    pub fn builtin_of(&self, f: FuncId) -> Option<Builtin> {
        match self.func(f).kind {
            FuncKind::Builtin(b) => Some(b),
            _ => None,
        }
    }

    pub fn selector(&self, constructor: FuncId, field: usize) -> FuncId {
        self.funcs()
            .find(|&f| {
                self.func(f).kind == FuncKind::Selector { constructor, field }
            })
            .expect("every constructor field has a selector")
    }

    pub fn tester(&self, constructor: FuncId) -> FuncId {
        self.funcs()
            .find(|&f| self.func(f).kind == FuncKind::Tester { constructor })
            .expect("every constructor has a tester")
    }

    // ---- terms -------------------------------------------------------------

    pub fn true_term(&self) -> TermId {
        self.true_term
    }

    pub fn false_term(&self) -> TermId {
        self.false_term
    }

    pub fn is_bool_const(&self, t: TermId) -> bool {
        t == self.true_term || t == self.false_term
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Returns the unique term `f(args)`.
    pub fn mk_app(&mut self, f: FuncId, args: &[TermId]) -> Result<TermId> {
        let key = (f, args.to_vec());
        if let Some(&t) = self.hashcons.get(&key) {
            return Ok(t);
        }
        let decl = self.funcs.get(f.0 as usize).ok_or_else(|| Error::UnknownSymbol(format!("#{}", f.0)))?;
        if decl.args.len() != args.len() {
            return Err(Error::Sort(format!(
                "`{}` expects {} arguments, got {}",
                decl.name,
                decl.args.len(),
                args.len()
            )));
        }
        for (i, (&a, &s)) in args.iter().zip(&decl.args).enumerate() {
            if self.sort_of(a) != s {
                return Err(Error::Sort(format!(
                    "argument {} of `{}` has sort {}, expected {}",
                    i + 1,
                    decl.name,
                    self.sort(self.sort_of(a)).name,
                    self.sort(s).name
                )));
            }
        }
        let ground = decl.kind != FuncKind::Var && args.iter().all(|&a| self.is_ground(a));
        let sort = decl.ret;
        let id = TermId(self.terms.len() as u32);
        self.terms.push(TermData { func: f, args: key.1.clone(), sort, ground });
        self.hashcons.insert(key, id);
        Ok(id)
    }

    /// Builds an application of a symbol known by name: user symbols, the
    /// polymorphic builtins, and numerals.
    pub fn apply(&mut self, name: &str, args: &[TermId]) -> Result<TermId> {
        if let Some(f) = self.lookup(name) {
            return self.mk_app(f, args);
        }
        if let Some(op) = Builtin::from_name(name) {
            let sorts: Vec<SortId> = args.iter().map(|&a| self.sort_of(a)).collect();
            let f = self.builtin(op, &sorts)?;
            return self.mk_app(f, args);
        }
        if name == "distinct" {
            let sorts: Vec<SortId> = args.iter().map(|&a| self.sort_of(a)).collect();
            let f = self.builtin(Builtin::Distinct, &sorts)?;
            return self.mk_app(f, args);
        }
        if args.is_empty() {
            if let Ok(n) = name.parse::<i64>() {
                let f = self.numeral(n);
                return self.mk_app(f, &[]);
            }
        }
        Err(Error::UnknownSymbol(name.to_string()))
    }

    pub fn mk_builtin(&mut self, op: Builtin, args: &[TermId]) -> Result<TermId> {
        let sorts: Vec<SortId> = args.iter().map(|&a| self.sort_of(a)).collect();
        let f = self.builtin(op, &sorts)?;
        self.mk_app(f, args)
    }

    pub fn mk_const(&mut self, f: FuncId) -> TermId {
        self.mk_app(f, &[]).expect("nullary symbol")
    }

    pub fn func_of(&self, t: TermId) -> FuncId {
        self.terms[t.0 as usize].func
    }

    pub fn args(&self, t: TermId) -> &[TermId] {
        &self.terms[t.0 as usize].args
    }

    pub fn sort_of(&self, t: TermId) -> SortId {
        self.terms[t.0 as usize].sort
    }

    /// True iff no variable occurs in `t`.
    pub fn is_ground(&self, t: TermId) -> bool {
        self.terms[t.0 as usize].ground
    }

    pub fn builtin_of_term(&self, t: TermId) -> Option<Builtin> {
        self.builtin_of(self.func_of(t))
    }

    pub fn free_vars(&self, t: TermId) -> BTreeSet<FuncId> {
        let mut out = BTreeSet::new();
        self.collect_vars(t, &mut out);
        out
    }

    fn collect_vars(&self, t: TermId, out: &mut BTreeSet<FuncId>) {
        if self.is_ground(t) {
            return;
        }
        let f = self.func_of(t);
        if self.is_var(f) {
            out.insert(f);
        }
        for &a in self.args(t) {
            self.collect_vars(a, out);
        }
    }

    /// True iff some symbol of `syms` occurs in `t`.
    pub fn mentions(&self, t: TermId, syms: &BTreeSet<FuncId>) -> bool {
        if syms.is_empty() {
            return false;
        }
        syms.contains(&self.func_of(t)) || self.args(t).iter().any(|&a| self.mentions(a, syms))
    }

    /// True iff `sub` occurs in `t`.
    pub fn contains_term(&self, t: TermId, sub: TermId) -> bool {
        t == sub || self.args(t).iter().any(|&a| self.contains_term(a, sub))
    }

    pub fn display(&self, t: TermId) -> TermDisplay<'_> {
        TermDisplay { ctx: self, term: t }
    }
}

pub struct TermDisplay<'a> {
    ctx: &'a Context,
    term: TermId,
}

impl fmt::Display for TermDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print_term(self.ctx, self.term))
    }
}
