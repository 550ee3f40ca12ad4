use super::sexp::{read_all, Sexp};
use super::{Context, Formula, FuncKind, Literal, SortId, TermId};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Qel,
    Mbp,
}

/// A parsed input file: the context holding its signature, the asserted
/// conjunction, and the trailing command, if any.
#[derive(Debug, Clone)]
pub struct Problem {
    pub ctx: Context,
    pub formula: Formula,
    pub command: Option<Command>,
}

/// Parses a problem in the SMT-LIB subset.
pub fn parse_formula(text: &str) -> Result<Problem> {
    let mut ctx = Context::new();
    let mut literals = Vec::new();
    let mut command = None;
    for cmd in read_all(text)? {
        let items = cmd.expect_list()?;
        let head = cmd.head().ok_or_else(|| cmd.error("expected a command"))?;
        match head {
            "set-logic" | "set-info" | "set-option" | "check-sat" | "exit" => {}
            "declare-sort" => {
                let name = arg(&cmd, items, 1)?.expect_atom()?;
                if items.len() == 3 && items[2].atom() != Some("0") {
                    return Err(items[2].error("only sorts of arity 0 are supported"));
                }
                ctx.declare_sort(name).map_err(|e| at(&cmd, e))?;
            }
            "declare-datatype" => {
                if items.len() != 3 {
                    return Err(cmd.error("expected (declare-datatype <name> (<constructor>+))"));
                }
                let name = items[1].expect_atom()?;
                declare_datatype(&mut ctx, name, &items[2])?;
            }
            "declare-datatypes" => {
                if items.len() != 3 {
                    return Err(cmd.error("expected (declare-datatypes (<sort>+) (<constructors>+))"));
                }
                let names = items[1].expect_list()?;
                let bodies = items[2].expect_list()?;
                if names.len() != bodies.len() {
                    return Err(cmd.error("datatype names and bodies differ in number"));
                }
                for (n, body) in names.iter().zip(bodies) {
                    let name = match n {
                        Sexp::List { items, .. } if items.len() == 2 => items[0].expect_atom()?,
                        other => other.expect_atom()?,
                    };
                    declare_datatype(&mut ctx, name, body)?;
                }
            }
            "declare-fun" => {
                if items.len() != 4 {
                    return Err(cmd.error("expected (declare-fun <name> (<sort>*) <sort>)"));
                }
                let name = items[1].expect_atom()?;
                let args = items[2]
                    .expect_list()?
                    .iter()
                    .map(|s| parse_sort(&mut ctx, s))
                    .collect::<Result<Vec<_>>>()?;
                let ret = parse_sort(&mut ctx, &items[3])?;
                ctx.declare_fun(name, &args, ret).map_err(|e| at(&cmd, e))?;
            }
            "declare-const" | "declare-var" => {
                if items.len() != 3 {
                    return Err(cmd.error(format!("expected ({head} <name> <sort>)")));
                }
                let name = items[1].expect_atom()?;
                let sort = parse_sort(&mut ctx, &items[2])?;
                if head == "declare-var" {
                    ctx.declare_var(name, sort)
                } else {
                    ctx.declare_fun(name, &[], sort)
                }
                .map_err(|e| at(&cmd, e))?;
            }
            "assert" => {
                if items.len() != 2 {
                    return Err(cmd.error("expected (assert <literal>)"));
                }
                parse_conjunction(&mut ctx, &items[1], &mut literals)?;
            }
            "qel" => command = Some(Command::Qel),
            "mbp" => command = Some(Command::Mbp),
            other => return Err(cmd.error(format!("unsupported command `{other}`"))),
        }
    }
    let vars = ctx.funcs().filter(|&f| ctx.is_var(f)).collect();
    Ok(Problem { ctx, formula: Formula::new(literals, vars), command })
}

/// Parses a conjunction of literals (`true`, a literal, or `(and ...)`)
/// over an existing signature.
pub fn parse_literals(ctx: &mut Context, text: &str) -> Result<Vec<Literal>> {
    let mut out = Vec::new();
    for s in read_all(text)? {
        parse_conjunction(ctx, &s, &mut out)?;
    }
    Ok(out)
}

fn arg<'a>(cmd: &Sexp, items: &'a [Sexp], i: usize) -> Result<&'a Sexp> {
    items.get(i).ok_or_else(|| cmd.error("missing argument"))
}

/// Attaches a source position to errors that lack one.
fn at(s: &Sexp, e: Error) -> Error {
    match e {
        Error::Syntax { .. } => e,
        other => s.error(other.to_string()),
    }
}

pub fn parse_sort(ctx: &mut Context, s: &Sexp) -> Result<SortId> {
    match s {
        Sexp::Atom { text, .. } => {
            ctx.sort_by_name(text).ok_or_else(|| s.error(format!("unknown sort `{text}`")))
        }
        Sexp::List { items, .. } => {
            if items.len() == 3 && items[0].atom() == Some("Array") {
                let i = parse_sort(ctx, &items[1])?;
                let v = parse_sort(ctx, &items[2])?;
                Ok(ctx.array_sort(i, v))
            } else {
                Err(s.error("unsupported sort"))
            }
        }
    }
}

fn declare_datatype(ctx: &mut Context, name: &str, body: &Sexp) -> Result<()> {
    let mut ctors = Vec::new();
    for c in body.expect_list()? {
        match c {
            Sexp::Atom { text, .. } => ctors.push((text.clone(), Vec::new())),
            Sexp::List { items, .. } => {
                let cname = items.first().ok_or_else(|| c.error("empty constructor"))?.expect_atom()?;
                let mut fields = Vec::new();
                for f in &items[1..] {
                    let parts = f.expect_list()?;
                    if parts.len() != 2 {
                        return Err(f.error("expected (<selector> <sort>)"));
                    }
                    fields.push((parts[0].expect_atom()?.to_string(), parse_sort(ctx, &parts[1])?));
                }
                ctors.push((cname.to_string(), fields));
            }
        }
    }
    ctx.declare_datatype(name, &ctors).map_err(|e| at(body, e))?;
    Ok(())
}

fn parse_conjunction(ctx: &mut Context, s: &Sexp, out: &mut Vec<Literal>) -> Result<()> {
    match s.head() {
        Some("and") => {
            for c in &s.list().unwrap()[1..] {
                parse_conjunction(ctx, c, out)?;
            }
            Ok(())
        }
        _ if s.atom() == Some("true") => Ok(()),
        _ => {
            out.extend(parse_literal(ctx, s)?);
            Ok(())
        }
    }
}

fn parse_literal(ctx: &mut Context, s: &Sexp) -> Result<Vec<Literal>> {
    let items = s.list().unwrap_or(&[]);
    match s.head() {
        Some("=") => {
            let ts = parse_args(ctx, s, &items[1..], 2)?;
            let mut out = Vec::new();
            for w in ts.windows(2) {
                same_sort(ctx, s, w[0], w[1])?;
                out.push(Literal::eq(ctx, w[0], w[1]));
            }
            Ok(out)
        }
        Some("distinct") => {
            let ts = parse_args(ctx, s, &items[1..], 2)?;
            let mut out = Vec::new();
            for (k, &a) in ts.iter().enumerate() {
                for &b in &ts[k + 1..] {
                    same_sort(ctx, s, a, b)?;
                    out.push(Literal::Diseq(a, b));
                }
            }
            Ok(out)
        }
        Some("ueq") => {
            let ts = parse_args(ctx, s, &items[1..], 2)?;
            if ts.len() != 2 {
                return Err(s.error("`ueq` takes two arguments"));
            }
            same_sort(ctx, s, ts[0], ts[1])?;
            Ok(vec![Literal::ExplicitEq(ts[0], ts[1])])
        }
        Some("not") => {
            if items.len() != 2 {
                return Err(s.error("`not` takes one argument"));
            }
            let inner = &items[1];
            match inner.head() {
                Some("=") => {
                    let ts = parse_args(ctx, inner, &inner.list().unwrap()[1..], 2)?;
                    if ts.len() != 2 {
                        return Err(inner.error("negated equality must be binary"));
                    }
                    same_sort(ctx, s, ts[0], ts[1])?;
                    Ok(vec![Literal::Diseq(ts[0], ts[1])])
                }
                Some("distinct") => {
                    let ts = parse_args(ctx, inner, &inner.list().unwrap()[1..], 2)?;
                    if ts.len() != 2 {
                        return Err(inner.error("negated distinct must be binary"));
                    }
                    same_sort(ctx, s, ts[0], ts[1])?;
                    Ok(vec![Literal::eq(ctx, ts[0], ts[1])])
                }
                _ => {
                    let t = parse_bool_term(ctx, inner)?;
                    Ok(vec![Literal::eq(ctx, t, ctx.false_term())])
                }
            }
        }
        _ => {
            let t = parse_bool_term(ctx, s)?;
            Ok(vec![Literal::eq(ctx, t, ctx.true_term())])
        }
    }
}

fn parse_bool_term(ctx: &mut Context, s: &Sexp) -> Result<TermId> {
    let t = parse_term(ctx, s)?;
    if ctx.sort_of(t) != ctx.bool_sort() {
        return Err(s.error("expected a Bool-valued literal"));
    }
    Ok(t)
}

fn same_sort(ctx: &Context, s: &Sexp, a: TermId, b: TermId) -> Result<()> {
    if ctx.sort_of(a) != ctx.sort_of(b) {
        return Err(s.error(format!(
            "sort error: equality between {} and {}",
            ctx.sort(ctx.sort_of(a)).name,
            ctx.sort(ctx.sort_of(b)).name
        )));
    }
    Ok(())
}

fn parse_args(ctx: &mut Context, s: &Sexp, args: &[Sexp], min: usize) -> Result<Vec<TermId>> {
    if args.len() < min {
        return Err(s.error(format!("expected at least {min} arguments")));
    }
    args.iter().map(|a| parse_term(ctx, a)).collect()
}

fn parse_term(ctx: &mut Context, s: &Sexp) -> Result<TermId> {
    match s {
        Sexp::Atom { text, .. } => ctx.apply(text, &[]).map_err(|e| at(s, e)),
        Sexp::List { items, .. } => {
            let Some(first) = items.first() else {
                return Err(s.error("empty application"));
            };
            if let Some(name) = tester_name(first) {
                let f = ctx
                    .lookup(&format!("is-{name}"))
                    .ok_or_else(|| first.error(format!("unknown constructor `{name}`")))?;
                let args = parse_args(ctx, s, &items[1..], 1)?;
                return ctx.mk_app(f, &args).map_err(|e| at(s, e));
            }
            let head = first.expect_atom()?;
            if head == "-" && items.len() == 2 {
                if let Some(Ok(n)) = items[1].atom().map(str::parse::<i64>) {
                    return ctx.apply(&(-n).to_string(), &[]).map_err(|e| at(s, e));
                }
            }
            if matches!(head, "and" | "not" | "=") {
                return Err(s.error(format!("`{head}` is only supported at literal level")));
            }
            let args = items[1..].iter().map(|a| parse_term(ctx, a)).collect::<Result<Vec<_>>>()?;
            let t = ctx.apply(head, &args).map_err(|e| at(s, e))?;
            if matches!(ctx.func(ctx.func_of(t)).kind, FuncKind::Numeral(_)) && !args.is_empty() {
                return Err(s.error("numerals take no arguments"));
            }
            Ok(t)
        }
    }
}

/// `(_ is c)` yields `c`.
fn tester_name(s: &Sexp) -> Option<&str> {
    let items = s.list()?;
    if items.len() == 3 && items[0].atom() == Some("_") && items[1].atom() == Some("is") {
        items[2].atom()
    } else {
        None
    }
}
