//! Command line front end. `run_cli` returns the process exit code.

use std::collections::BTreeSet;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::automaton::{export_dot, prune, translate};
use crate::decomposition::{check_separable, export_graph_dot, export_graph_text, DecompGraph};
use crate::ltl::{eval_lasso, parse_ltl, AtomicPredicate, LassoWord, Symbol};
use crate::sim::{compile, load_scenario, run, CompileError, Outcome, RunOptions, Scenario};
use crate::trace::render;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_COMPILE_INFEASIBLE: i32 = 2;
pub const EXIT_RUNTIME_INFEASIBLE: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "rltl", version, about = "Reactive multi-robot LTL missions on unknown grid maps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build the automaton and the transition graph, print statistics.
    Compile {
        scenario: PathBuf,
        /// Write nba.dot, graph.dot and graph.txt here.
        #[arg(long)]
        dot: Option<PathBuf>,
        #[arg(long)]
        hop_cap: Option<usize>,
    },
    /// Report whether every guard splits into per-robot conjuncts.
    Check { formula: String },
    /// Simulate a scenario.
    Run {
        scenario: PathBuf,
        #[arg(long)]
        budget: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        trace: Option<PathBuf>,
        #[arg(long)]
        metrics: Option<PathBuf>,
        #[arg(long)]
        hop_cap: Option<usize>,
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// Compare automaton acceptance with direct evaluation on random lasso words.
    Oracle {
        formula: String,
        #[arg(long, default_value_t = 200)]
        words: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

struct Failure(i32, String);

fn usage(e: impl std::fmt::Display) -> Failure {
    Failure(EXIT_USAGE, e.to_string())
}

pub fn run_cli<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = if e.use_stderr() { write!(err, "{e}") } else { write!(out, "{e}") };
            return code;
        }
    };
    let result = match cli.command {
        Command::Compile { scenario, dot, hop_cap } => cmd_compile(&scenario, dot.as_deref(), hop_cap, out),
        Command::Check { formula } => cmd_check(&formula, out),
        Command::Run { scenario, budget, seed, trace, metrics, hop_cap, dot } => {
            cmd_run(&scenario, budget, seed, trace.as_deref(), metrics.as_deref(), hop_cap, dot.as_deref(), out)
        }
        Command::Oracle { formula, words, seed } => cmd_oracle(&formula, words, seed, out),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(Failure(code, msg)) => {
            let _ = writeln!(err, "error: {msg}");
            code
        }
    }
}

fn load(path: &Path, hop_cap: Option<usize>) -> Result<Scenario, Failure> {
    let mut s = load_scenario(path).map_err(usage)?;
    if let Some(k) = hop_cap {
        s.hop_cap = k;
    }
    Ok(s)
}

fn write_exports(dir: &Path, nba: Option<&crate::automaton::Nba>, g: &DecompGraph) -> Result<(), Failure> {
    std::fs::create_dir_all(dir).map_err(|e| usage(format!("{}: {e}", dir.display())))?;
    let mut files = vec![("graph.dot", export_graph_dot(g)), ("graph.txt", export_graph_text(g))];
    if let Some(a) = nba {
        files.push(("nba.dot", export_dot(a)));
    }
    for (name, text) in files {
        let p = dir.join(name);
        std::fs::write(&p, text).map_err(|e| usage(format!("{}: {e}", p.display())))?;
    }
    Ok(())
}

fn compile_or_fail(s: &Scenario, dot: Option<&Path>, out: &mut dyn Write) -> Result<crate::sim::Compiled, Failure> {
    match compile(s) {
        Ok(c) => Ok(c),
        Err(CompileError::Disconnected { nodes, graph }) => {
            if let Some(dir) = dot {
                write_exports(dir, None, &graph)?;
            }
            let _ = writeln!(out, "graph nodes={nodes} edges={} vf={{}}", graph.edges.len());
            Err(Failure(EXIT_COMPILE_INFEASIBLE, CompileError::Disconnected { nodes, graph }.to_string()))
        }
        Err(e) => Err(Failure(EXIT_COMPILE_INFEASIBLE, e.to_string())),
    }
}

fn cmd_compile(path: &Path, dot: Option<&Path>, hop_cap: Option<usize>, out: &mut dyn Write) -> Result<(), Failure> {
    let s = load(path, hop_cap)?;
    let c = compile_or_fail(&s, dot, out)?;
    if let Some(dir) = dot {
        write_exports(dir, Some(&c.pruned), &c.graph)?;
    }
    write!(out, "{}", c.stats()).map_err(usage)
}

fn cmd_check(text: &str, out: &mut dyn Write) -> Result<(), Failure> {
    let f = parse_ltl(text).map_err(usage)?;
    if f.is_propositional() {
        let s = check_separable(&f).map_err(usage)?;
        return writeln!(out, "{s}").map_err(usage);
    }
    let a = prune(&translate(&f));
    let mut bad = 0;
    for (p, q, guard) in a.transitions() {
        let s = check_separable(guard).map_err(usage)?;
        bad += usize::from(!s.holds());
        writeln!(out, "{} -> {}: {s}", a.name(p), a.name(q)).map_err(usage)?;
    }
    writeln!(out, "guards={} violations={bad}", a.num_transitions()).map_err(usage)
}

#[allow(clippy::too_many_arguments)]
fn cmd_run(
    path: &Path,
    budget: Option<u64>,
    seed: Option<u64>,
    trace: Option<&Path>,
    metrics: Option<&Path>,
    hop_cap: Option<usize>,
    dot: Option<&Path>,
    out: &mut dyn Write,
) -> Result<(), Failure> {
    let s = load(path, hop_cap)?;
    let c = compile_or_fail(&s, dot, out)?;
    if let Some(dir) = dot {
        write_exports(dir, Some(&c.pruned), &c.graph)?;
    }
    let mut opts = RunOptions::from_scenario(&s);
    opts.budget = budget.unwrap_or(opts.budget);
    opts.seed = seed.unwrap_or(opts.seed);
    let r = run(&s, &c.graph, opts);
    let save = |p: &Path, text: String| std::fs::write(p, text).map_err(|e| usage(format!("{}: {e}", p.display())));
    if let Some(p) = trace {
        save(p, render(&r.trace))?;
    }
    let m = r.metrics.render();
    if let Some(p) = metrics {
        save(p, m.clone())?;
    }
    let outcome = match r.outcome {
        Outcome::Satisfied => "satisfied",
        Outcome::BudgetExhausted => "budget-exhausted",
        Outcome::Infeasible => "infeasible",
    };
    writeln!(out, "outcome={outcome}").map_err(usage)?;
    write!(out, "{m}").map_err(usage)?;
    for f in &r.audit_failures {
        writeln!(out, "audit: {f}").map_err(usage)?;
    }
    match r.outcome {
        Outcome::Satisfied => Ok(()),
        _ => Err(Failure(EXIT_RUNTIME_INFEASIBLE, format!("mission not satisfied ({outcome})"))),
    }
}

/// A uniformly drawn feasible symbol over `atoms`: each robot sits in at
/// most one region, and obstacle atoms are set independently.
fn random_feasible(rng: &mut impl Rng, atoms: &BTreeSet<AtomicPredicate>) -> Symbol {
    let mut out = BTreeSet::new();
    let robots: BTreeSet<_> = atoms.iter().map(|p| p.robot).collect();
    for j in robots {
        let regions: Vec<&AtomicPredicate> = atoms.iter().filter(|p| p.robot == j && !p.is_obstacle()).collect();
        let k = rng.gen_range(0..=regions.len());
        if k < regions.len() {
            out.insert(regions[k].clone());
        }
        let obstacle = AtomicPredicate::obstacle(j);
        if atoms.contains(&obstacle) && rng.gen_bool(0.5) {
            out.insert(obstacle);
        }
    }
    Symbol(out)
}

fn cmd_oracle(text: &str, words: usize, seed: u64, out: &mut dyn Write) -> Result<(), Failure> {
    let f = parse_ltl(text).map_err(usage)?;
    let full = translate(&f);
    let pruned = prune(&full);
    let atoms = f.atoms();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut mismatches = 0;
    let mut accepted = 0;
    for _ in 0..words {
        let prefix = (0..rng.gen_range(0..4)).map(|_| random_feasible(&mut rng, &atoms)).collect();
        let cycle = (0..rng.gen_range(1..4)).map(|_| random_feasible(&mut rng, &atoms)).collect();
        let w = LassoWord::new(prefix, cycle);
        let expected = eval_lasso(&f, &w);
        accepted += usize::from(expected);
        if full.accepts_lasso(&w) != expected || pruned.accepts_lasso(&w) != expected {
            mismatches += 1;
            writeln!(out, "mismatch: {w:?} expected={expected}").map_err(usage)?;
        }
    }
    writeln!(
        out,
        "nba states={} transitions={} pruned={} words={words} accepted={accepted} mismatches={mismatches}",
        full.len(),
        full.num_transitions(),
        pruned.num_transitions()
    )
    .map_err(usage)?;
    if mismatches > 0 {
        return Err(Failure(EXIT_USAGE, format!("{mismatches} words disagree")));
    }
    Ok(())
}
