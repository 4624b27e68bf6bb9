//! Turns a pruned automaton into the graph of transitions that robots can
//! enable by independent reach-and-avoid tasks.
//!
//! A node is an automaton state whose self-loop robots can hold. An edge
//! `(q, q')` exists when some run `q q1 .. qK qK` can be driven by repeating
//! one feasible symbol, and for every symbol that may be holding `q` there is
//! such a target symbol that never asks a robot to leave the region it is
//! currently sustaining.

mod export;
mod separable;

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::automaton::{
    enumerate_feasible_symbols, first_feasible_symbol, Aux, EnumerationError, Nba, StateId, SymbolSet,
};
use crate::ltl::{AtomicPredicate, Formula, RobotId, Symbol};

pub use export::{export_graph_dot, export_graph_text};
pub use separable::{check_separable, Separability};

pub const DEFAULT_HOP_CAP: usize = 6;

/// Where one robot has to be for a target symbol to hold.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Goal {
    Region(String),
    /// Outside every listed region. The robot may stay in any other region
    /// it already occupies; otherwise it heads for a cell outside all regions.
    PredicateFree {
        avoid: BTreeSet<String>,
    },
}

impl Goal {
    /// Whether a robot standing in `region` (None when outside all regions)
    /// satisfies the goal.
    pub fn satisfied_by(&self, region: Option<&str>) -> bool {
        match self {
            Goal::Region(r) => region == Some(r.as_str()),
            Goal::PredicateFree { avoid } => region.is_none_or(|r| !avoid.contains(r)),
        }
    }
}

impl std::fmt::Display for Goal {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Goal::Region(r) => f.write_str(r),
            Goal::PredicateFree { avoid } => {
                f.write_str("free")?;
                if !avoid.is_empty() {
                    write!(f, "!{}", avoid.iter().cloned().collect::<Vec<_>>().join("!"))?;
                }
                Ok(())
            }
        }
    }
}

/// A run `q q1 .. qK` whose last state is held by its self-loop.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RunCandidate {
    pub states: Vec<StateId>,
}

impl RunCandidate {
    /// Number of hops K; 0 for a pure self-loop run.
    pub fn hops(&self) -> usize {
        self.states.len() - 1
    }

    pub fn source(&self) -> StateId {
        self.states[0]
    }

    pub fn target(&self) -> StateId {
        *self.states.last().unwrap()
    }

    pub fn intermediates(&self) -> &[StateId] {
        if self.states.len() <= 2 {
            &[]
        } else {
            &self.states[1..self.states.len() - 1]
        }
    }
}

/// One way of enabling an edge.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymbolAssignment {
    pub symbol: Symbol,
    /// Atoms the symbol is read over. Predicates outside this set are free.
    pub atoms: BTreeSet<AtomicPredicate>,
    /// Robots placed in a region by the symbol.
    pub involved: BTreeSet<RobotId>,
    /// Robots the run condition mentions at all.
    pub constrained: BTreeSet<RobotId>,
    pub goals: BTreeMap<RobotId, Goal>,
    /// Self-loop symbols of the source this assignment may follow. Sorted.
    pub admissible_for: Vec<Symbol>,
    /// Index into the owning edge's `runs`.
    pub run: usize,
}

impl SymbolAssignment {
    pub fn admissible(&self, sustaining: &Symbol) -> bool {
        self.admissible_for.binary_search(sustaining).is_ok()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunInfo {
    pub run: RunCandidate,
    /// Conjunction of the hop guards and the terminal self-loop.
    pub guard: Formula,
    pub accepting: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GraphEdge {
    pub source: StateId,
    pub target: StateId,
    /// Decomposable runs, fewest hops first, then by state ids.
    pub runs: Vec<RunInfo>,
    pub assignments: Vec<SymbolAssignment>,
    /// Some run passes through a final state.
    pub accepting: bool,
}

impl GraphEdge {
    pub fn representative(&self) -> &RunInfo {
        &self.runs[0]
    }
}

/// Hop distance to the accepting nodes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Distance {
    Finite(usize),
    Unreachable,
}

impl Distance {
    pub fn finite(self) -> Option<usize> {
        match self {
            Distance::Finite(d) => Some(d),
            Distance::Unreachable => None,
        }
    }
}

impl std::fmt::Display for Distance {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Distance::Finite(d) => write!(f, "{d}"),
            Distance::Unreachable => f.write_str("inf"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecompGraph {
    /// The pruned automaton with its aux state.
    pub nba: Nba,
    pub aux: StateId,
    pub nodes: BTreeSet<StateId>,
    pub edges: BTreeMap<(StateId, StateId), GraphEdge>,
    /// Feasible, obstacle-free self-loop symbols per node.
    pub loop_symbols: BTreeMap<StateId, SymbolSet>,
    /// Nodes with an accepting out-edge.
    pub vf: BTreeSet<StateId>,
    pub dist: BTreeMap<StateId, Distance>,
    /// Paths cut off by the hop cap while still feasible.
    pub truncated_runs: usize,
}

impl DecompGraph {
    pub fn distance(&self, q: StateId) -> Distance {
        self.dist.get(&q).copied().unwrap_or(Distance::Unreachable)
    }

    pub fn out_edges(&self, q: StateId) -> impl Iterator<Item = &GraphEdge> {
        self.edges.range((q, 0)..(q + 1, 0)).map(|(_, e)| e)
    }

    /// Accepting nodes can be reached from aux.
    pub fn is_connected(&self) -> bool {
        self.distance(self.aux) != Distance::Unreachable
    }

    pub fn name(&self, q: StateId) -> &str {
        self.nba.name(q)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DecompError {
    #[error("automaton has no aux state")]
    MissingAux,
    #[error(transparent)]
    Enumeration(#[from] EnumerationError),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Config {
    pub hop_cap: usize,
}

impl Default for Config {
    fn default() -> Self {
        Config { hop_cap: DEFAULT_HOP_CAP }
    }
}

/// Adds a start state with a `true` self-loop and one edge per initial state,
/// guarded by the exact initial label over the automaton's atoms. The new
/// state becomes the only initial state.
pub fn add_aux_state(a: &Nba, initial_symbol: &Symbol) -> Nba {
    let atoms = a.atoms();
    let label = initial_symbol.restrict(&atoms);
    let mut out = a.clone();
    let aux = out.add_state("aux");
    out.add_transition(aux, aux, Formula::True);
    let guard = Formula::cube(&atoms, &label);
    for &q in &a.initial {
        out.add_transition(aux, q, guard.clone());
    }
    out.initial = BTreeSet::from([aux]);
    out.aux = Some(Aux { state: aux, label });
    out
}

/// Conjunction of the hop guards along the run and the self-loop of its end.
pub fn build_guard(a: &Nba, run: &RunCandidate) -> Formula {
    let hops = run.states.windows(2).map(|w| a.guard(w[0], w[1]).expect("run follows transitions").clone());
    let hold = a.self_loop(run.target()).expect("run ends on a self-loop").clone();
    Formula::conj(hops.chain(std::iter::once(hold)))
}

/// The guard plus the side conditions on the repeated symbol: no
/// intermediate self-loop may fire and no robot may stand on an obstacle.
pub fn run_condition(a: &Nba, run: &RunCandidate) -> Formula {
    let blocked = run.intermediates().iter().filter_map(|&q| a.self_loop(q)).map(|g| Formula::not(g.clone()));
    obstacle_free(Formula::conj(std::iter::once(build_guard(a, run)).chain(blocked)))
}

fn obstacle_free(f: Formula) -> Formula {
    let obstacles: Vec<_> = f.atoms().into_iter().filter(AtomicPredicate::is_obstacle).collect();
    Formula::conj(std::iter::once(f).chain(obstacles.into_iter().map(|p| Formula::not(Formula::Atom(p)))))
}

fn feasible(f: &Formula) -> bool {
    first_feasible_symbol(f).is_some()
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RunEnumeration {
    /// Runs with a satisfiable condition, fewest hops first.
    pub runs: Vec<RunCandidate>,
    pub truncated: usize,
}

/// Simple paths from `q` to any state with a self-loop, at most `hop_cap`
/// hops, that some single repeated feasible symbol can drive. Intermediates
/// are pairwise distinct and differ from `q`; the end may be `q` again.
pub fn enumerate_runs(a: &Nba, q: StateId, hop_cap: usize) -> RunEnumeration {
    let mut out = RunEnumeration::default();
    if let Some(g) = a.self_loop(q) {
        if feasible(&obstacle_free(g.clone())) {
            out.runs.push(RunCandidate { states: vec![q] });
        }
    }
    let mut path = vec![q];
    extend(a, &mut path, &[], hop_cap, &mut out);
    out.runs.sort_by(|x, y| (x.hops(), &x.states).cmp(&(y.hops(), &y.states)));
    out
}

fn extend(a: &Nba, path: &mut Vec<StateId>, conds: &[Formula], cap: usize, out: &mut RunEnumeration) {
    let u = *path.last().unwrap();
    let succ: Vec<(StateId, Formula)> = a.successors(u).map(|(v, g)| (v, g.clone())).collect();
    for (v, g) in succ {
        if v == u || path[1..].contains(&v) {
            continue;
        }
        let mut hop: Vec<Formula> = conds.to_vec();
        hop.push(g);
        if !feasible(&obstacle_free(Formula::conj(hop.iter().cloned()))) {
            continue;
        }
        let hold = a.self_loop(v).cloned();
        if let Some(l) = &hold {
            let whole = Formula::conj(hop.iter().cloned().chain(std::iter::once(l.clone())));
            if feasible(&obstacle_free(whole)) {
                let mut states = path.clone();
                states.push(v);
                out.runs.push(RunCandidate { states });
            }
        }
        if v == path[0] {
            continue;
        }
        let mut inner = hop;
        if let Some(l) = hold {
            inner.push(Formula::not(l));
        }
        if !feasible(&obstacle_free(Formula::conj(inner.iter().cloned()))) {
            continue;
        }
        if path.len() < cap {
            path.push(v);
            extend(a, path, &inner, cap, out);
            path.pop();
        } else if a.successors(v).any(|(w, _)| w != v) {
            out.truncated += 1;
        }
    }
}

/// May `target` follow the sustaining symbol `held` without a robot leaving
/// a region it is holding? Robots the condition does not mention stay put.
/// A mentioned robot must either keep its region or be free to stay in it.
pub fn admissible(held: &Symbol, target: &Symbol, atoms: &BTreeSet<AtomicPredicate>) -> bool {
    let constrained: BTreeSet<RobotId> = atoms.iter().map(|p| p.robot).collect();
    held.involved().into_iter().all(|j| {
        if !constrained.contains(&j) {
            return true;
        }
        let here = held.region_of(j).expect("involved robot has a region");
        match target.region_of(j) {
            Some(r) => r == here,
            None => !atoms.contains(&AtomicPredicate::region(j, here)),
        }
    })
}

/// Target symbols of one run, each tagged with the held symbols it may
/// follow. `None` when some held symbol has no admissible target.
pub fn check_decomposable(
    condition: &Formula,
    loop_symbols: &[Symbol],
    run: usize,
) -> Result<Option<Vec<SymbolAssignment>>, EnumerationError> {
    let targets = enumerate_feasible_symbols(condition)?;
    let atoms = targets.atoms.clone();
    let constrained: BTreeSet<RobotId> = atoms.iter().map(|p| p.robot).collect();
    let mut covered = vec![false; loop_symbols.len()];
    let mut out = Vec::new();
    for sym in targets.iter() {
        let admissible_for: Vec<Symbol> = loop_symbols
            .iter()
            .enumerate()
            .filter(|(_, held)| admissible(held, sym, &atoms))
            .map(|(i, held)| {
                covered[i] = true;
                held.clone()
            })
            .collect();
        if admissible_for.is_empty() {
            continue;
        }
        let goals = constrained
            .iter()
            .map(|&j| {
                let goal = match sym.region_of(j) {
                    Some(r) => Goal::Region(r.to_string()),
                    None => Goal::PredicateFree {
                        avoid: atoms
                            .iter()
                            .filter(|p| p.robot == j)
                            .filter_map(|p| p.region_name().map(str::to_string))
                            .collect(),
                    },
                };
                (j, goal)
            })
            .collect();
        out.push(SymbolAssignment {
            symbol: sym.clone(),
            atoms: atoms.clone(),
            involved: sym.involved(),
            constrained: constrained.clone(),
            goals,
            admissible_for,
            run,
        });
    }
    Ok(covered.iter().all(|&c| c).then_some(out))
}

/// Self-loop symbols a node may be held by. For aux that is only the
/// initial label.
fn loop_symbols(a: &Nba, q: StateId) -> Result<SymbolSet, EnumerationError> {
    if let Some(aux) = a.aux.as_ref().filter(|x| x.state == q) {
        return Ok(SymbolSet { atoms: a.atoms(), symbols: vec![aux.label.clone()] });
    }
    match a.self_loop(q) {
        Some(g) => enumerate_feasible_symbols(&obstacle_free(g.clone())),
        None => Ok(SymbolSet::default()),
    }
}

/// Builds the graph by breadth-first search from aux over decomposable runs.
pub fn build_graph(a: &Nba, config: &Config) -> Result<DecompGraph, DecompError> {
    let aux = a.aux.as_ref().ok_or(DecompError::MissingAux)?.state;
    let mut nodes = BTreeSet::from([aux]);
    let mut edges: BTreeMap<(StateId, StateId), GraphEdge> = BTreeMap::new();
    let mut loops = BTreeMap::new();
    let mut truncated = 0;
    let mut queue = VecDeque::from([aux]);
    while let Some(q) = queue.pop_front() {
        let held = loop_symbols(a, q)?;
        let runs = enumerate_runs(a, q, config.hop_cap);
        truncated += runs.truncated;
        for run in runs.runs {
            let condition = run_condition(a, &run);
            let dst = run.target();
            let index = edges.get(&(q, dst)).map_or(0, |e| e.runs.len());
            let Some(assignments) = check_decomposable(&condition, &held.symbols, index)? else {
                continue;
            };
            let accepting = run.states.iter().any(|&s| a.is_final(s));
            let edge = edges.entry((q, dst)).or_insert_with(|| GraphEdge {
                source: q,
                target: dst,
                runs: Vec::new(),
                assignments: Vec::new(),
                accepting: false,
            });
            edge.accepting |= accepting;
            edge.runs.push(RunInfo { guard: build_guard(a, &run), run, accepting });
            edge.assignments.extend(assignments);
            if nodes.insert(dst) {
                queue.push_back(dst);
            }
        }
        loops.insert(q, held);
    }
    let vf = accepting_nodes(edges.values().map(|e| (e.source, e.accepting)));
    let dist = distances(&nodes, edges.keys().copied(), &vf);
    Ok(DecompGraph { nba: a.clone(), aux, nodes, edges, loop_symbols: loops, vf, dist, truncated_runs: truncated })
}

/// Reachable set: every node of the graph, aux included.
pub fn reachable_set(a: &Nba, config: &Config) -> Result<BTreeSet<StateId>, DecompError> {
    Ok(build_graph(a, config)?.nodes)
}

/// Sources of accepting edges.
pub fn accepting_nodes(edges: impl IntoIterator<Item = (StateId, bool)>) -> BTreeSet<StateId> {
    edges.into_iter().filter(|&(_, acc)| acc).map(|(s, _)| s).collect()
}

/// Hop distance from every node to `vf` by breadth-first search over
/// reversed edges.
pub fn distances(
    nodes: &BTreeSet<StateId>,
    edges: impl IntoIterator<Item = (StateId, StateId)>,
    vf: &BTreeSet<StateId>,
) -> BTreeMap<StateId, Distance> {
    let mut pred: BTreeMap<StateId, Vec<StateId>> = BTreeMap::new();
    for (s, d) in edges {
        pred.entry(d).or_default().push(s);
    }
    let mut dist: BTreeMap<StateId, Distance> = nodes.iter().map(|&q| (q, Distance::Unreachable)).collect();
    let mut queue = VecDeque::new();
    for &q in vf {
        dist.insert(q, Distance::Finite(0));
        queue.push_back((q, 0));
    }
    while let Some((q, d)) = queue.pop_front() {
        for &p in pred.get(&q).into_iter().flatten() {
            if dist.get(&p) == Some(&Distance::Unreachable) {
                dist.insert(p, Distance::Finite(d + 1));
                queue.push_back((p, d + 1));
            }
        }
    }
    dist
}
