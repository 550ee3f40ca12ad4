use std::fmt::Write;

use super::{Context, Decl, Formula, FuncKind, Literal, SortId, SortKind, TermId};

pub fn print_sort(ctx: &Context, s: SortId) -> String {
    ctx.sort(s).name.clone()
}

pub fn print_term(ctx: &Context, t: TermId) -> String {
    let mut out = String::new();
    write_term(ctx, t, &mut out);
    out
}

fn write_term(ctx: &Context, t: TermId, out: &mut String) {
    let decl = ctx.func(ctx.func_of(t));
    let args = ctx.args(t);
    match decl.kind {
        FuncKind::Numeral(n) if n < 0 => {
            let _ = write!(out, "(- {})", n.unsigned_abs());
            return;
        }
        FuncKind::Tester { constructor } if !args.is_empty() => {
            let _ = write!(out, "((_ is {})", ctx.func(constructor).name);
        }
        _ if args.is_empty() => {
            out.push_str(&symbol(&decl.name));
            return;
        }
        _ => {
            out.push('(');
            out.push_str(&symbol(&decl.name));
        }
    }
    for &a in args {
        out.push(' ');
        write_term(ctx, a, out);
    }
    out.push(')');
}

fn symbol(name: &str) -> String {
    let plain = !name.is_empty()
        && name
            .chars()
            .all(|c| !c.is_whitespace() && !matches!(c, '(' | ')' | '|' | ';' | '"'));
    if plain {
        name.to_string()
    } else {
        format!("|{name}|")
    }
}

pub fn print_literal(ctx: &Context, lit: &Literal) -> String {
    match *lit {
        Literal::Eq(a, b) if b == ctx.true_term() && a != b => print_term(ctx, a),
        Literal::Eq(a, b) if b == ctx.false_term() && !ctx.is_bool_const(a) => {
            format!("(not {})", print_term(ctx, a))
        }
        Literal::Eq(a, b) => format!("(= {} {})", print_term(ctx, a), print_term(ctx, b)),
        Literal::Diseq(a, b) => format!("(not (= {} {}))", print_term(ctx, a), print_term(ctx, b)),
        Literal::ExplicitEq(a, b) => format!("(ueq {} {})", print_term(ctx, a), print_term(ctx, b)),
    }
}

/// Prints a conjunction as `true`, a single literal, or `(and ...)`.
pub fn print_formula(ctx: &Context, f: &Formula) -> String {
    match f.literals.as_slice() {
        [] => "true".to_string(),
        [l] => print_literal(ctx, l),
        lits => {
            let parts: Vec<String> = lits.iter().map(|l| print_literal(ctx, l)).collect();
            format!("(and {})", parts.join(" "))
        }
    }
}

/// Prints declarations, one `assert` per literal, and the optional command,
/// in a form [`super::parse_formula`] reads back.
pub fn print_problem(ctx: &Context, f: &Formula, command: Option<super::Command>) -> String {
    let mut out = String::new();
    for d in ctx.decls() {
        match *d {
            Decl::Sort(s) => {
                let _ = writeln!(out, "(declare-sort {} 0)", symbol(&ctx.sort(s).name));
            }
            Decl::Datatype(s) => {
                let _ = write!(out, "(declare-datatype {} (", symbol(&ctx.sort(s).name));
                let SortKind::Adt { constructors } = &ctx.sort(s).kind else { unreachable!() };
                for (k, &c) in constructors.iter().enumerate() {
                    if k > 0 {
                        out.push(' ');
                    }
                    let _ = write!(out, "({}", symbol(&ctx.func(c).name));
                    for field in 0..ctx.func(c).args.len() {
                        let sel = ctx.selector(c, field);
                        let _ = write!(
                            out,
                            " ({} {})",
                            symbol(&ctx.func(sel).name),
                            print_sort(ctx, ctx.func(sel).ret)
                        );
                    }
                    out.push(')');
                }
                out.push_str("))\n");
            }
            Decl::Func(fid) => {
                let decl = ctx.func(fid);
                let name = symbol(&decl.name);
                let ret = print_sort(ctx, decl.ret);
                if decl.kind == FuncKind::Var {
                    let _ = writeln!(out, "(declare-var {name} {ret})");
                } else if decl.args.is_empty() {
                    let _ = writeln!(out, "(declare-const {name} {ret})");
                } else {
                    let args: Vec<String> = decl.args.iter().map(|&s| print_sort(ctx, s)).collect();
                    let _ = writeln!(out, "(declare-fun {name} ({}) {ret})", args.join(" "));
                }
            }
        }
    }
    for lit in &f.literals {
        let _ = writeln!(out, "(assert {})", print_literal(ctx, lit));
    }
    match command {
        Some(super::Command::Qel) => out.push_str("(qel)\n"),
        Some(super::Command::Mbp) => out.push_str("(mbp)\n"),
        None => {}
    }
    out
}
