//! Command-line front end.
//!
//! Exit codes: 0 success, 2 bad input, 3 a `--check` failed, 4 a budget was
//! exceeded.

use std::collections::BTreeSet;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::egraph::EGraph;
use crate::error::Error;
use crate::extraction::{check_admissible, ReprFn};
use crate::mbp::{mbp_qel, DEFAULT_BUDGET};
use crate::model::{format_model, parse_model};
use crate::oracle::{equiv_exists, implies_exists, Bounds, Verdict};
use crate::qel::{check_maximally_ground, find_defs, qel_run};
use crate::terms::{parse_formula, print_formula, Context, Formula, FuncId, FuncKind};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_CHECK: i32 = 3;
pub const EXIT_BUDGET: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "egqel", version, about = "Quantifier reduction and model-based projection with egraphs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Cmd,
}

#[derive(Debug, Subcommand)]
pub enum Cmd {
    /// Eliminate the declared variables as far as equalities allow.
    Qel {
        file: PathBuf,
        #[command(flatten)]
        opts: Opts,
    },
    /// Project the declared variables under a model of the input.
    Mbp {
        file: PathBuf,
        #[arg(long)]
        model: PathBuf,
        /// Maximum number of rule applications.
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: usize,
        #[command(flatten)]
        opts: Opts,
    },
}

#[derive(Debug, clap::Args)]
pub struct Opts {
    /// Verify the result, with a bounded brute-force search where needed.
    #[arg(long)]
    pub check: bool,
    /// Write one Graphviz file per stage into this directory.
    #[arg(long, value_name = "DIR")]
    pub dot: Option<PathBuf>,
    /// Order in which leaves seed the definition search.
    #[arg(long, value_enum, default_value_t = SeedOrder::Id)]
    pub seed_order: SeedOrder,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum SeedOrder {
    /// Node creation order.
    Id,
}

enum Failure {
    Input(String),
    Check(String),
    Budget(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        match e {
            Error::SaturationBudget(_) | Error::ExtractionBudget { .. } => Failure::Budget(e.to_string()),
            _ => Failure::Input(e.to_string()),
        }
    }
}

pub fn main() -> i32 {
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run(std::env::args_os(), &mut stdout.lock(), &mut stderr.lock())
}

/// Runs the tool on `args` (program name first) and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { write!(err, "{text}") } else { write!(out, "{text}") };
            return code;
        }
    };
    let res = match &cli.command {
        Cmd::Qel { file, opts } => run_qel(file, opts, out, err),
        Cmd::Mbp { file, model, budget, opts } => run_mbp(file, model, *budget, opts, out, err),
    };
    match res {
        Ok(()) => EXIT_OK,
        Err(Failure::Input(m)) => {
            let _ = writeln!(err, "error: {m}");
            EXIT_INPUT
        }
        Err(Failure::Check(m)) => {
            let _ = writeln!(err, "check failed: {m}");
            EXIT_CHECK
        }
        Err(Failure::Budget(m)) => {
            let _ = writeln!(err, "error: {m}");
            EXIT_BUDGET
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn write_dot(dir: &Option<PathBuf>, stage: &str, ctx: &Context, g: &EGraph, r: Option<&ReprFn>) -> Result<(), Failure> {
    let Some(dir) = dir else { return Ok(()) };
    let io = |e: std::io::Error| Failure::Input(format!("{}: {e}", dir.display()));
    std::fs::create_dir_all(dir).map_err(io)?;
    std::fs::write(dir.join(format!("{stage}.dot")), g.dump_dot(ctx, r)).map_err(io)
}

fn report_vars(ctx: &Context, input: &[FuncId], result: &Formula, err: &mut dyn Write) {
    let left = result.occurring_vars(ctx);
    let names = |keep: bool| {
        input.iter().filter(|v| left.contains(v) == keep).map(|&v| ctx.func(v).name.clone()).collect::<Vec<_>>().join(" ")
    };
    let _ = writeln!(err, "eliminated: {}", names(false));
    let _ = writeln!(err, "remaining: {}", names(true));
}

fn oracle_note(ctx: &Context, err: &mut dyn Write, v: crate::error::Result<Verdict>, what: &str) -> Result<(), Failure> {
    match v {
        Ok(Verdict::Holds { skipped }) => {
            let _ = writeln!(err, "check: {what} holds on all bounded interpretations");
            if skipped > 0 {
                let _ = writeln!(err, "note: {skipped} interpretations skipped for leaving the Int window");
            }
            Ok(())
        }
        Ok(Verdict::Counterexample(m)) => {
            Err(Failure::Check(format!("{what} fails on\n{}", format_model(ctx, &m))))
        }
        Err(Error::SearchSpaceTooLarge(n)) => {
            if n == u128::MAX {
                let _ = writeln!(err, "check: {what} skipped, a sort has too many values");
            } else {
                let _ = writeln!(err, "check: {what} skipped, {n} interpretations to enumerate");
            }
            Ok(())
        }
        Err(e) => Err(e.into()),
    }
}

fn run_qel(file: &Path, opts: &Opts, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), Failure> {
    let mut p = parse_formula(&read(file)?)?;
    let vars: BTreeSet<FuncId> = p.formula.vars.iter().copied().collect();
    let run = qel_run(&mut p.ctx, &p.formula)?;
    write_dot(&opts.dot, "egraph", &p.ctx, &run.egraph, None)?;
    let defs = find_defs(&run.egraph, &vars);
    write_dot(&opts.dot, "find_defs", &p.ctx, &run.egraph, Some(&defs))?;
    write_dot(&opts.dot, "refine_defs", &p.ctx, &run.egraph, Some(&run.repr))?;
    let _ = writeln!(out, "{}", print_formula(&p.ctx, &run.formula));
    report_vars(&p.ctx, &p.formula.vars, &run.formula, err);
    if opts.check {
        run.egraph.check_invariants().map_err(Failure::Check)?;
        check_admissible(&run.egraph, &run.repr).map_err(|v| Failure::Check(format!("{v:?}")))?;
        check_maximally_ground(&mut p.ctx, &run.egraph, &run.repr, &vars)
            .map_err(|n| Failure::Check(format!("class of node {n} has a non-ground representative")))?;
        let result = Formula::new(run.formula.literals.clone(), p.formula.vars.clone());
        oracle_note(&p.ctx, err, equiv_exists(&p.ctx, &p.formula, &result, &Bounds::default()), "equivalence")?;
    }
    Ok(())
}

fn run_mbp(
    file: &Path,
    model: &Path,
    budget: usize,
    opts: &Opts,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<(), Failure> {
    let mut p = parse_formula(&read(file)?)?;
    let m = parse_model(&p.ctx, &read(model)?)?;
    let first_fresh = p.ctx.funcs().count();
    let run = mbp_qel(&mut p.ctx, &p.formula, &m, budget)?;
    write_dot(&opts.dot, "egraph", &p.ctx, &run.initial, None)?;
    write_dot(&opts.dot, "saturated", &p.ctx, &run.egraph, None)?;
    write_dot(&opts.dot, "refine_defs", &p.ctx, &run.egraph, Some(&run.repr))?;
    let _ = writeln!(out, "{}", print_formula(&p.ctx, &run.formula));
    report_vars(&p.ctx, &p.formula.vars, &run.formula, err);
    for (rule, n) in &run.stats.applications {
        let _ = writeln!(err, "{}: {n}", rule.name());
    }
    if opts.check {
        if let Some(l) = run.model.first_violated(&p.ctx, &run.formula.literals)? {
            return Err(Failure::Check(format!("the model violates {}", crate::terms::print_literal(&p.ctx, l))));
        }
        let fresh: Vec<FuncId> = p
            .ctx
            .funcs()
            .skip(first_fresh)
            .filter(|&f| matches!(p.ctx.func(f).kind, FuncKind::Var | FuncKind::Uninterpreted))
            .collect();
        let projected = p.formula.vars.iter().chain(&fresh).filter(|&&v| {
            let s = p.ctx.func(v).ret;
            p.ctx.is_array(s) || p.ctx.is_adt(s)
        });
        let syms: BTreeSet<FuncId> = projected.copied().collect();
        for l in &run.formula.literals {
            let (a, b) = l.sides();
            if p.ctx.mentions(a, &syms) || p.ctx.mentions(b, &syms) {
                return Err(Failure::Check("an array or datatype variable remains".to_string()));
            }
        }
        let mut quantified = run.formula.occurring_vars(&p.ctx).into_iter().collect::<Vec<_>>();
        quantified.extend(fresh);
        let result = Formula::new(run.formula.literals.clone(), quantified);
        oracle_note(&p.ctx, err, implies_exists(&p.ctx, &result, &p.formula, &Bounds::default()), "implication")?;
    }
    Ok(())
}
