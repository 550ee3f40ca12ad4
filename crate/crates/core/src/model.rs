//! Finite models: values, evaluation of terms and literals, and the model
//! file format.

use std::collections::BTreeMap;
use std::fmt::Write;

use crate::error::{Error, Result};
use crate::terms::sexp::{read_all, Sexp};
use crate::terms::{parse_sort, Builtin, Context, FuncId, FuncKind, Literal, SortId, SortKind, TermId};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Value {
    Int(i64),
    Bool(bool),
    /// The `k`-th element of a finite uninterpreted sort.
    Elem(SortId, u32),
    Array(ArrayValue),
    Adt(FuncId, Vec<Value>),
}

/// An array as a default value plus the finitely many indices where it
/// differs from the default. Kept canonical, so structural equality is
/// extensional equality.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ArrayValue {
    pub default: Box<Value>,
    pub entries: BTreeMap<Value, Value>,
}

impl Value {
    pub fn as_int(&self) -> Option<i64> {
        match self {
            Value::Int(n) => Some(*n),
            _ => None,
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Value::Bool(b) => Some(*b),
            _ => None,
        }
    }
}

/// Interpretation of a function symbol: a finite table plus a default.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FuncTable {
    pub default: Value,
    pub entries: BTreeMap<Vec<Value>, Value>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Model {
    consts: BTreeMap<FuncId, Value>,
    funcs: BTreeMap<FuncId, FuncTable>,
    universes: BTreeMap<SortId, u32>,
    /// When set, Int is the finite window `[lo, hi]`: values outside it are
    /// errors, and Int-indexed arrays are functions on the window.
    int_window: Option<(i64, i64)>,
}

impl Model {
    pub fn new() -> Model {
        Model::default()
    }

    pub fn with_int_window(mut self, lo: i64, hi: i64) -> Model {
        self.int_window = Some((lo, hi));
        self
    }

    pub fn int_window(&self) -> Option<(i64, i64)> {
        self.int_window
    }

    pub fn set_universe(&mut self, sort: SortId, size: u32) {
        self.universes.insert(sort, size);
    }

    pub fn universe(&self, sort: SortId) -> Option<u32> {
        self.universes.get(&sort).copied()
    }

    pub fn set_const(&mut self, f: FuncId, v: Value) {
        self.consts.insert(f, v);
    }

    pub fn set_func(&mut self, f: FuncId, table: FuncTable) {
        self.funcs.insert(f, table);
    }

    pub fn get_const(&self, f: FuncId) -> Option<&Value> {
        self.consts.get(&f)
    }

    pub fn get_func(&self, f: FuncId) -> Option<&FuncTable> {
        self.funcs.get(&f)
    }

    pub fn interprets(&self, f: FuncId) -> bool {
        self.consts.contains_key(&f) || self.funcs.contains_key(&f)
    }

    /// A copy with one more constant. The name must be fresh.
    pub fn extend(&self, ctx: &Context, f: FuncId, v: Value) -> Result<Model> {
        if self.interprets(f) {
            return Err(Error::Model(format!("`{}` is already interpreted", ctx.func(f).name)));
        }
        let mut m = self.clone();
        m.consts.insert(f, v);
        Ok(m)
    }

    /// All values of a sort, when there are finitely many (Int only under a
    /// window) and at most `cap` of them.
    pub fn domain(&self, ctx: &Context, sort: SortId, cap: usize) -> Option<Vec<Value>> {
        let out = match &ctx.sort(sort).kind {
            SortKind::Bool => vec![Value::Bool(false), Value::Bool(true)],
            SortKind::Int => {
                let (lo, hi) = self.int_window?;
                if (hi - lo + 1) as usize > cap {
                    return None;
                }
                (lo..=hi).map(Value::Int).collect()
            }
            SortKind::Uninterpreted => {
                let n = self.universe(sort)?;
                if n as usize > cap {
                    return None;
                }
                (0..n).map(|k| Value::Elem(sort, k)).collect()
            }
            SortKind::Adt { constructors } => {
                let mut out = Vec::new();
                for &c in constructors {
                    let mut tuples: Vec<Vec<Value>> = vec![Vec::new()];
                    for &s in &ctx.func(c).args {
                        let dom = self.domain(ctx, s, cap)?;
                        if tuples.len().checked_mul(dom.len())? > cap {
                            return None;
                        }
                        tuples = tuples
                            .into_iter()
                            .flat_map(|t| {
                                dom.iter().map(move |v| {
                                    let mut t = t.clone();
                                    t.push(v.clone());
                                    t
                                })
                            })
                            .collect();
                    }
                    out.extend(tuples.into_iter().map(|args| Value::Adt(c, args)));
                    if out.len() > cap {
                        return None;
                    }
                }
                out
            }
            SortKind::Array { index, value } => {
                let keys = self.domain(ctx, *index, cap)?;
                let vals = self.domain(ctx, *value, cap)?;
                let total = (vals.len() as u128).checked_pow(keys.len() as u32)?;
                if total > cap as u128 {
                    return None;
                }
                let mut out = Vec::with_capacity(total as usize);
                let mut digits = vec![0usize; keys.len()];
                loop {
                    let entries = keys.iter().cloned().zip(digits.iter().map(|&d| vals[d].clone())).collect();
                    out.push(Value::Array(self.canonical_array(ctx, *index, Value::Bool(false), entries)));
                    let mut i = 0;
                    loop {
                        if i == digits.len() {
                            return Some(out);
                        }
                        digits[i] += 1;
                        if digits[i] < vals.len() {
                            break;
                        }
                        digits[i] = 0;
                        i += 1;
                    }
                }
            }
        };
        Some(out)
    }

    /// Normal form of an array: over a finite index domain the default is
    /// the value at the first index; entries equal to the default are
    /// dropped.
    pub fn canonical_array(
        &self,
        ctx: &Context,
        index: SortId,
        default: Value,
        entries: BTreeMap<Value, Value>,
    ) -> ArrayValue {
        let mut default = default;
        let mut entries = entries;
        if let Some(keys) = self.domain(ctx, index, 4096) {
            let full: BTreeMap<Value, Value> = keys
                .iter()
                .map(|k| (k.clone(), entries.get(k).cloned().unwrap_or_else(|| default.clone())))
                .collect();
            if let Some(first) = keys.first() {
                default = full[first].clone();
            }
            entries = full;
        }
        entries.retain(|_, v| *v != default);
        ArrayValue { default: Box::new(default), entries }
    }

    pub fn default_value(&self, ctx: &Context, sort: SortId) -> Value {
        match &ctx.sort(sort).kind {
            SortKind::Bool => Value::Bool(false),
            SortKind::Int => Value::Int(self.int_window.map_or(0, |(lo, hi)| 0.clamp(lo, hi))),
            SortKind::Uninterpreted => Value::Elem(sort, 0),
            SortKind::Array { index, value } => {
                let d = self.default_value(ctx, *value);
                Value::Array(self.canonical_array(ctx, *index, d, BTreeMap::new()))
            }
            SortKind::Adt { constructors } => {
                let c = constructors[0];
                let args = ctx.func(c).args.iter().map(|&s| self.default_value(ctx, s)).collect();
                Value::Adt(c, args)
            }
        }
    }

    fn check_int(&self, n: i64) -> Result<Value> {
        match self.int_window {
            Some((lo, hi)) if n < lo || n > hi => Err(Error::OutOfWindow(n)),
            _ => Ok(Value::Int(n)),
        }
    }

    pub fn read(&self, a: &Value, i: &Value) -> Result<Value> {
        match a {
            Value::Array(arr) => Ok(arr.entries.get(i).cloned().unwrap_or_else(|| (*arr.default).clone())),
            _ => Err(Error::Model("read from a non-array value".to_string())),
        }
    }

    pub fn write(&self, ctx: &Context, sort: SortId, a: &Value, i: Value, v: Value) -> Result<Value> {
        let Value::Array(arr) = a else {
            return Err(Error::Model("write to a non-array value".to_string()));
        };
        let (index, _) = ctx.array_parts(sort).ok_or_else(|| Error::Model("write at non-array sort".to_string()))?;
        let mut entries = arr.entries.clone();
        entries.insert(i, v);
        Ok(Value::Array(self.canonical_array(ctx, index, (*arr.default).clone(), entries)))
    }

    pub fn eval(&self, ctx: &Context, t: TermId) -> Result<Value> {
        let f = ctx.func_of(t);
        let decl = ctx.func(f);
        let args = ctx.args(t).iter().map(|&a| self.eval(ctx, a)).collect::<Result<Vec<_>>>()?;
        let int = |k: usize| args[k].as_int().ok_or_else(|| Error::Model("expected an Int".to_string()));
        match &decl.kind {
            FuncKind::True => Ok(Value::Bool(true)),
            FuncKind::False => Ok(Value::Bool(false)),
            FuncKind::Numeral(n) => self.check_int(*n),
            FuncKind::Uninterpreted | FuncKind::Var => {
                if args.is_empty() {
                    if let Some(v) = self.consts.get(&f) {
                        return Ok(v.clone());
                    }
                }
                let table = self.funcs.get(&f).ok_or_else(|| Error::MissingInterpretation(decl.name.clone()))?;
                Ok(table.entries.get(&args).cloned().unwrap_or_else(|| table.default.clone()))
            }
            FuncKind::Builtin(b) => match b {
                Builtin::Add => self.check_int(int(0)?.checked_add(int(1)?).ok_or_else(overflow)?),
                Builtin::Sub => self.check_int(int(0)?.checked_sub(int(1)?).ok_or_else(overflow)?),
                Builtin::Gt => Ok(Value::Bool(int(0)? > int(1)?)),
                Builtin::Ge => Ok(Value::Bool(int(0)? >= int(1)?)),
                Builtin::Lt => Ok(Value::Bool(int(0)? < int(1)?)),
                Builtin::Le => Ok(Value::Bool(int(0)? <= int(1)?)),
                Builtin::Read => self.read(&args[0], &args[1]),
                Builtin::Write => {
                    let mut it = args.into_iter();
                    let (a, i, v) = (it.next().unwrap(), it.next().unwrap(), it.next().unwrap());
                    self.write(ctx, decl.ret, &a, i, v)
                }
                Builtin::ExplicitEq => Ok(Value::Bool(args[0] == args[1])),
                Builtin::Distinct => Ok(Value::Bool(args[0] != args[1])),
                Builtin::PartialEq(_) => {
                    let sort = decl.args[0];
                    let mut a = args[0].clone();
                    for i in &args[2..] {
                        let v = self.read(&args[1], i)?;
                        a = self.write(ctx, sort, &a, i.clone(), v)?;
                    }
                    Ok(Value::Bool(a == args[1]))
                }
            },
            FuncKind::Constructor { .. } => Ok(Value::Adt(f, args)),
            FuncKind::Selector { constructor, field } => match &args[0] {
                Value::Adt(c, fields) if c == constructor => Ok(fields[*field].clone()),
                Value::Adt(..) => Ok(self.default_value(ctx, decl.ret)),
                _ => Err(Error::Model("selector applied to a non-datatype value".to_string())),
            },
            FuncKind::Tester { constructor } => match &args[0] {
                Value::Adt(c, _) => Ok(Value::Bool(c == constructor)),
                _ => Err(Error::Model("tester applied to a non-datatype value".to_string())),
            },
        }
    }

    pub fn holds(&self, ctx: &Context, lit: &Literal) -> Result<bool> {
        Ok(match *lit {
            Literal::Eq(a, b) | Literal::ExplicitEq(a, b) => self.eval(ctx, a)? == self.eval(ctx, b)?,
            Literal::Diseq(a, b) => self.eval(ctx, a)? != self.eval(ctx, b)?,
        })
    }

    /// The first literal of `lits` that does not hold.
    pub fn first_violated<'a>(&self, ctx: &Context, lits: &'a [Literal]) -> Result<Option<&'a Literal>> {
        for l in lits {
            if !self.holds(ctx, l)? {
                return Ok(Some(l));
            }
        }
        Ok(None)
    }
}

fn overflow() -> Error {
    Error::Model("integer overflow".to_string())
}

/// Parses a model file against the signature in `ctx`.
pub fn parse_model(ctx: &Context, text: &str) -> Result<Model> {
    let mut m = Model::new();
    let cmds = read_all(text)?;
    // universes first, so values can be range-checked wherever they appear
    for cmd in &cmds {
        if cmd.head() == Some("universe") {
            let items = cmd.expect_list()?;
            if items.len() != 3 {
                return Err(cmd.error("expected (universe <sort> <size>)"));
            }
            let sort = sort_of_name(ctx, &items[1])?;
            if ctx.sort(sort).kind != SortKind::Uninterpreted {
                return Err(items[1].error("universes are only given for uninterpreted sorts"));
            }
            let size: u32 = items[2].expect_atom()?.parse().map_err(|_| items[2].error("expected a size"))?;
            if size == 0 {
                return Err(items[2].error("universes are non-empty"));
            }
            m.set_universe(sort, size);
        }
    }
    for cmd in &cmds {
        let items = cmd.expect_list()?;
        match cmd.head() {
            Some("universe") => {}
            Some("define-value") => {
                if items.len() != 3 {
                    return Err(cmd.error("expected (define-value <name> <value>)"));
                }
                let f = symbol(ctx, &items[1])?;
                let decl = ctx.func(f);
                if !decl.args.is_empty() {
                    return Err(items[1].error(format!("`{}` is not a constant", decl.name)));
                }
                if m.interprets(f) {
                    return Err(items[1].error(format!("`{}` is defined twice", decl.name)));
                }
                let v = parse_value(ctx, &m, &items[2], decl.ret)?;
                m.set_const(f, v);
            }
            Some("define-fun-values") => {
                if items.len() < 3 {
                    return Err(cmd.error("expected (define-fun-values <name> (default <value>) ...)"));
                }
                let f = symbol(ctx, &items[1])?;
                if m.interprets(f) {
                    return Err(items[1].error(format!("`{}` is defined twice", ctx.func(f).name)));
                }
                let decl = ctx.func(f).clone();
                let default = parse_default(ctx, &m, &items[2], decl.ret)?;
                let mut entries = BTreeMap::new();
                for e in &items[3..] {
                    let parts = e.expect_list()?;
                    if parts.len() != 2 {
                        return Err(e.error("expected ((<arg>*) <value>)"));
                    }
                    let args = parts[0].expect_list()?;
                    if args.len() != decl.args.len() {
                        return Err(parts[0].error("wrong number of arguments"));
                    }
                    let key = args
                        .iter()
                        .zip(&decl.args)
                        .map(|(a, &s)| parse_value(ctx, &m, a, s))
                        .collect::<Result<Vec<_>>>()?;
                    let v = parse_value(ctx, &m, &parts[1], decl.ret)?;
                    if entries.insert(key, v).is_some() {
                        return Err(e.error("duplicate argument tuple"));
                    }
                }
                m.set_func(f, FuncTable { default, entries });
            }
            _ => return Err(cmd.error("expected define-value, define-fun-values or universe")),
        }
    }
    Ok(m)
}

fn sort_of_name(ctx: &Context, s: &Sexp) -> Result<SortId> {
    let name = s.expect_atom()?;
    ctx.sort_by_name(name).ok_or_else(|| s.error(format!("unknown sort `{name}`")))
}

fn symbol(ctx: &Context, s: &Sexp) -> Result<FuncId> {
    let name = s.expect_atom()?;
    ctx.lookup(name).ok_or_else(|| s.error(format!("unknown symbol `{name}`")))
}

fn parse_default(ctx: &Context, m: &Model, s: &Sexp, sort: SortId) -> Result<Value> {
    match s.list() {
        Some([head, v]) if head.atom() == Some("default") => parse_value(ctx, m, v, sort),
        _ => Err(s.error("expected (default <value>)")),
    }
}

pub fn parse_value(ctx: &Context, m: &Model, s: &Sexp, sort: SortId) -> Result<Value> {
    match &ctx.sort(sort).kind {
        SortKind::Bool => match s.atom() {
            Some("true") => Ok(Value::Bool(true)),
            Some("false") => Ok(Value::Bool(false)),
            _ => Err(s.error("expected true or false")),
        },
        SortKind::Int => {
            let n = match s {
                Sexp::Atom { text, .. } => text.parse::<i64>().ok(),
                Sexp::List { items, .. } if items.len() == 2 && items[0].atom() == Some("-") => {
                    items[1].atom().and_then(|t| t.parse::<i64>().ok()).map(|n| -n)
                }
                _ => None,
            };
            n.map(Value::Int).ok_or_else(|| s.error("expected an integer"))
        }
        SortKind::Uninterpreted => match s.list() {
            Some([head, so, k]) if head.atom() == Some("elem") => {
                if sort_of_name(ctx, so)? != sort {
                    return Err(so.error(format!("expected an element of {}", ctx.sort(sort).name)));
                }
                let k: u32 = k.expect_atom()?.parse().map_err(|_| k.error("expected an index"))?;
                match m.universe(sort) {
                    Some(n) if k < n => Ok(Value::Elem(sort, k)),
                    Some(_) => Err(s.error("element index outside the universe")),
                    None => Err(s.error(format!("no universe declared for {}", ctx.sort(sort).name))),
                }
            }
            _ => Err(s.error("expected (elem <sort> <k>)")),
        },
        SortKind::Array { index, value } => {
            let items = s.list().filter(|i| i.first().and_then(Sexp::atom) == Some("array"));
            let Some(items) = items else {
                return Err(s.error("expected (array (default <value>) (<key> <value>)*)"));
            };
            let default = parse_default(ctx, m, items.get(1).ok_or_else(|| s.error("missing default"))?, *value)?;
            let mut entries = BTreeMap::new();
            for e in &items[2..] {
                let parts = e.expect_list()?;
                if parts.len() != 2 {
                    return Err(e.error("expected (<key> <value>)"));
                }
                let k = parse_value(ctx, m, &parts[0], *index)?;
                let v = parse_value(ctx, m, &parts[1], *value)?;
                if entries.insert(k, v).is_some() {
                    return Err(e.error("duplicate array key"));
                }
            }
            Ok(Value::Array(m.canonical_array(ctx, *index, default, entries)))
        }
        SortKind::Adt { constructors } => {
            let (name, args) = match s {
                Sexp::Atom { text, .. } => (text.as_str(), &[][..]),
                Sexp::List { items, .. } => (
                    items.first().ok_or_else(|| s.error("empty value"))?.expect_atom()?,
                    &items[1..],
                ),
            };
            let c = constructors
                .iter()
                .copied()
                .find(|&c| ctx.func(c).name == name)
                .ok_or_else(|| s.error(format!("`{name}` is not a constructor of {}", ctx.sort(sort).name)))?;
            let sorts = &ctx.func(c).args;
            if sorts.len() != args.len() {
                return Err(s.error(format!("`{name}` expects {} arguments", sorts.len())));
            }
            let vals = args.iter().zip(sorts).map(|(a, &so)| parse_value(ctx, m, a, so)).collect::<Result<_>>()?;
            Ok(Value::Adt(c, vals))
        }
    }
}

/// Prints a value in the model file syntax.
pub fn format_value(ctx: &Context, v: &Value) -> String {
    let mut out = String::new();
    write_value(ctx, v, &mut out);
    out
}

fn write_value(ctx: &Context, v: &Value, out: &mut String) {
    match v {
        Value::Int(n) if *n < 0 => {
            let _ = write!(out, "(- {})", n.unsigned_abs());
        }
        Value::Int(n) => {
            let _ = write!(out, "{n}");
        }
        Value::Bool(b) => {
            let _ = write!(out, "{b}");
        }
        Value::Elem(s, k) => {
            let _ = write!(out, "(elem {} {k})", ctx.sort(*s).name);
        }
        Value::Array(a) => {
            out.push_str("(array (default ");
            write_value(ctx, &a.default, out);
            out.push(')');
            for (k, x) in &a.entries {
                out.push_str(" (");
                write_value(ctx, k, out);
                out.push(' ');
                write_value(ctx, x, out);
                out.push(')');
            }
            out.push(')');
        }
        Value::Adt(c, args) if args.is_empty() => out.push_str(&ctx.func(*c).name),
        Value::Adt(c, args) => {
            let _ = write!(out, "({}", ctx.func(*c).name);
            for a in args {
                out.push(' ');
                write_value(ctx, a, out);
            }
            out.push(')');
        }
    }
}

/// Prints a model in the model file syntax.
pub fn format_model(ctx: &Context, m: &Model) -> String {
    let mut out = String::new();
    for (&s, &n) in &m.universes {
        let _ = writeln!(out, "(universe {} {n})", ctx.sort(s).name);
    }
    for (&f, v) in &m.consts {
        let _ = writeln!(out, "(define-value {} {})", ctx.func(f).name, format_value(ctx, v));
    }
    for (&f, t) in &m.funcs {
        let _ = write!(out, "(define-fun-values {} (default {})", ctx.func(f).name, format_value(ctx, &t.default));
        for (args, v) in &t.entries {
            let args: Vec<String> = args.iter().map(|a| format_value(ctx, a)).collect();
            let _ = write!(out, " (({}) {})", args.join(" "), format_value(ctx, v));
        }
        out.push_str(")\n");
    }
    out
}

/// Parses a sort written in problem syntax, for callers building models by
/// hand.
pub fn sort_from_text(ctx: &mut Context, text: &str) -> Result<SortId> {
    let s = read_all(text)?;
    match s.as_slice() {
        [one] => parse_sort(ctx, one),
        _ => Err(Error::Model("expected one sort".to_string())),
    }
}
