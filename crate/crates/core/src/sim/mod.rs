//! Scenario compilation and the end-to-end run driver.

mod scenario;

pub use scenario::{load_scenario, parse_scenario, Mission, Scenario, ScenarioError, DEFAULT_BUDGET};

use std::fmt::Write as _;
use std::time::{Duration, Instant};

use crate::automaton::{prune, translate, Nba};
use crate::decomposition::{add_aux_state, build_graph, Config, DecompError, DecompGraph};
use crate::executive::{Executive, Status};
use crate::trace::TraceEvent;

#[derive(Debug, thiserror::Error)]
pub enum CompileError {
    #[error("the formula places a robot on an obstacle; only `!pi_j_O` may appear")]
    PositiveObstacle,
    #[error(transparent)]
    Decomposition(#[from] DecompError),
    #[error("disconnected graph G: no accepting node is reachable from the initial state ({nodes} nodes explored)")]
    Disconnected { nodes: usize, graph: Box<DecompGraph> },
}

/// Pipeline products kept for reporting.
#[derive(Clone, Debug)]
pub struct Compiled {
    pub nba: Nba,
    pub pruned: Nba,
    pub graph: DecompGraph,
    pub elapsed: Duration,
}

impl Compiled {
    pub fn stats(&self) -> String {
        let g = &self.graph;
        let vf: Vec<&str> = g.vf.iter().map(|&q| g.name(q)).collect();
        let mut out = String::new();
        writeln!(out, "nba states={} transitions={}", self.nba.len(), self.nba.num_transitions()).unwrap();
        writeln!(out, "pruned transitions={}", self.pruned.num_transitions()).unwrap();
        writeln!(out, "graph nodes={} edges={} truncated_runs={}", g.nodes.len(), g.edges.len(), g.truncated_runs)
            .unwrap();
        writeln!(out, "vf={{{}}}", vf.join(",")).unwrap();
        writeln!(out, "d(aux)={}", g.distance(g.aux)).unwrap();
        writeln!(out, "compile_ms={:.3}", self.elapsed.as_secs_f64() * 1e3).unwrap();
        out
    }
}

/// translate, prune, add the start state for the initial label, build G.
pub fn compile(s: &Scenario) -> Result<Compiled, CompileError> {
    let start = Instant::now();
    let nba = match &s.mission {
        Mission::Formula(f) => {
            if f.has_positive_obstacle() {
                return Err(CompileError::PositiveObstacle);
            }
            translate(f)
        }
        Mission::Automaton(a) => a.clone(),
    };
    let pruned = prune(&nba);
    let initial = s.world().label();
    let graph = build_graph(&add_aux_state(&pruned, &initial), &Config { hop_cap: s.hop_cap })?;
    if !graph.is_connected() {
        return Err(CompileError::Disconnected { nodes: graph.nodes.len(), graph: Box::new(graph) });
    }
    Ok(Compiled { nba, pruned, graph, elapsed: start.elapsed() })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Satisfied,
    BudgetExhausted,
    Infeasible,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Metrics {
    pub ticks: u64,
    /// Ticks at which an accepting edge was taken the first and second time.
    pub t_f1: Option<u64>,
    pub t_f2: Option<u64>,
    pub replans: usize,
    pub replan_times: Vec<Duration>,
    pub plan_times: Vec<Duration>,
    pub messages: usize,
    pub transitions: usize,
    pub accept_count: usize,
}

fn mean_ms(ds: &[Duration]) -> f64 {
    if ds.is_empty() {
        return 0.0;
    }
    ds.iter().map(Duration::as_secs_f64).sum::<f64>() * 1e3 / ds.len() as f64
}

impl Metrics {
    pub fn mean_replan_ms(&self) -> f64 {
        mean_ms(&self.replan_times)
    }

    /// `key=value` lines. Timing lines carry wall-clock values.
    pub fn render(&self) -> String {
        let opt = |v: Option<u64>| v.map_or("none".to_string(), |t| t.to_string());
        let mut out = String::new();
        writeln!(out, "ticks={}", self.ticks).unwrap();
        writeln!(out, "t_f1={}", opt(self.t_f1)).unwrap();
        writeln!(out, "t_f2={}", opt(self.t_f2)).unwrap();
        writeln!(out, "accept_count={}", self.accept_count).unwrap();
        writeln!(out, "transitions={}", self.transitions).unwrap();
        writeln!(out, "messages={}", self.messages).unwrap();
        writeln!(out, "replans={}", self.replans).unwrap();
        let each: Vec<String> = self.replan_times.iter().map(|d| format!("{:.4}", d.as_secs_f64() * 1e3)).collect();
        writeln!(out, "replan_ms=[{}]", each.join(",")).unwrap();
        writeln!(out, "replan_ms_mean={:.4}", self.mean_replan_ms()).unwrap();
        writeln!(out, "plan_ms_mean={:.4}", mean_ms(&self.plan_times)).unwrap();
        out
    }
}

#[derive(Clone, Debug)]
pub struct RunResult {
    pub outcome: Outcome,
    pub trace: Vec<TraceEvent>,
    pub metrics: Metrics,
    pub audit_failures: Vec<String>,
    /// Names of the automaton states entered, in order.
    pub visited: Vec<String>,
}

#[derive(Clone, Copy, Debug)]
pub struct RunOptions {
    pub budget: u64,
    pub seed: u64,
    /// Check the sustained self-loop and the automaton state every tick.
    pub audit: bool,
}

impl RunOptions {
    pub fn from_scenario(s: &Scenario) -> Self {
        RunOptions { budget: s.budget, seed: s.seed, audit: true }
    }
}

/// Runs until two accepting edges are taken, the mission is reported
/// infeasible, or `budget` ticks have passed. Tick 0 is the initial sensing
/// and selection step and the robots first move at tick 1.
pub fn run(s: &Scenario, g: &DecompGraph, opts: RunOptions) -> RunResult {
    let mut world = s.world();
    if opts.budget == 0 {
        return RunResult {
            outcome: Outcome::BudgetExhausted,
            trace: Vec::new(),
            metrics: Metrics::default(),
            audit_failures: Vec::new(),
            visited: vec![g.name(g.aux).to_string()],
        };
    }
    let mut ex = Executive::new(g, s.selection, opts.seed, opts.audit);
    let mut trace = ex.start(&mut world);
    let mut t = 0;
    while ex.status == Status::Running && t + 1 < opts.budget {
        t += 1;
        trace.extend(ex.tick(&mut world, t));
    }
    let outcome = match ex.status {
        Status::Satisfied => Outcome::Satisfied,
        Status::Infeasible => Outcome::Infeasible,
        Status::Running => Outcome::BudgetExhausted,
    };
    let st = ex.stats.clone();
    let metrics = Metrics {
        ticks: t,
        t_f1: st.first_accept,
        t_f2: st.second_accept,
        replans: st.replans,
        replan_times: st.replan_times,
        plan_times: st.plan_times,
        messages: st.messages,
        transitions: st.transitions,
        accept_count: ex.accept_count,
    };
    RunResult {
        outcome,
        trace,
        metrics,
        audit_failures: ex.audit_failures,
        visited: ex.visited.iter().map(|&q| g.name(q).to_string()).collect(),
    }
}
