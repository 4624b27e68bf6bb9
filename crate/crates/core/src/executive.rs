//! The reactive control loop.
//!
//! The executive holds the current automaton state and the symbol that keeps
//! its self-loop enabled. It picks the next state one hop closer to the
//! accepting nodes (or an accepting edge once there), chooses a target symbol
//! whose goals are reachable on the known map, and dispatches one local
//! problem per constrained robot. Robots holding the current state stay put.
//! A move that would change the held symbol is deferred until it completes
//! the target symbol, so the self-loop holds at every tick until the
//! transition fires.

use std::collections::{BTreeMap, BTreeSet};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::automaton::StateId;
use crate::decomposition::{accepting_nodes, distances, DecompGraph, Distance, Goal, GraphEdge};
use crate::ltl::{AtomicPredicate, RobotId, Symbol};
use crate::planner::{path_blocked, plan, LocalProblem, Path, PathCost};
use crate::trace::{EventKind, TraceEvent};
use crate::world::{contact, sense, update_map, Cell, Environment, OccupancyGrid, World};

/// The decomposition graph minus the edges removed during this run.
#[derive(Clone, Debug)]
pub struct LiveGraph<'g> {
    pub graph: &'g DecompGraph,
    removed: BTreeSet<(StateId, StateId)>,
    vf: BTreeSet<StateId>,
    dist: BTreeMap<StateId, Distance>,
}

impl<'g> LiveGraph<'g> {
    pub fn new(graph: &'g DecompGraph) -> Self {
        LiveGraph { graph, removed: BTreeSet::new(), vf: graph.vf.clone(), dist: graph.dist.clone() }
    }

    pub fn edges(&self) -> impl Iterator<Item = &'g GraphEdge> + '_ {
        self.graph.edges.values().filter(|e| !self.removed.contains(&(e.source, e.target)))
    }

    pub fn out_edges(&self, q: StateId) -> impl Iterator<Item = &'g GraphEdge> + '_ {
        self.graph.out_edges(q).filter(|e| !self.removed.contains(&(e.source, e.target)))
    }

    /// Removes an edge for the rest of the run and recomputes distances.
    pub fn remove(&mut self, edge: (StateId, StateId)) {
        self.removed.insert(edge);
        self.vf = accepting_nodes(self.edges().map(|e| (e.source, e.accepting)));
        let keys: Vec<_> = self.edges().map(|e| (e.source, e.target)).collect();
        self.dist = distances(&self.graph.nodes, keys, &self.vf);
    }

    pub fn removed(&self) -> &BTreeSet<(StateId, StateId)> {
        &self.removed
    }

    pub fn in_vf(&self, q: StateId) -> bool {
        self.vf.contains(&q)
    }

    pub fn distance(&self, q: StateId) -> Distance {
        self.dist.get(&q).copied().unwrap_or(Distance::Unreachable)
    }
}

/// From an accepting node: the first accepting out-edge. Otherwise: the first
/// successor one hop closer to the accepting nodes.
pub fn select_next_state(g: &LiveGraph<'_>, current: StateId) -> Option<StateId> {
    if g.in_vf(current) {
        return g.out_edges(current).find(|e| e.accepting).map(|e| e.target);
    }
    let d = g.distance(current).finite()?;
    g.out_edges(current).find(|e| d > 0 && g.distance(e.target) == Distance::Finite(d - 1)).map(|e| e.target)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum SelectionRule {
    /// Smallest total planned path length, then assignment order.
    #[default]
    MinCost,
    /// Uniform among reachable assignments, drawn from the run's generator.
    Random,
}

/// A chosen assignment with the path each constrained robot will follow.
#[derive(Clone, Debug, PartialEq)]
pub struct Choice {
    pub assignment: usize,
    pub paths: BTreeMap<RobotId, Path>,
    pub cost: PathCost,
}

/// Inputs to symbol selection that describe the current situation.
pub struct Situation<'a> {
    pub env: &'a Environment,
    pub map: &'a OccupancyGrid,
    pub positions: &'a BTreeMap<RobotId, Cell>,
    pub sustaining: &'a Symbol,
}

/// Picks an assignment of `edge` that may follow the sustaining symbol and
/// whose every goal is reachable on the known map. With `accepting_only`,
/// only assignments of accepting runs qualify. Planning time for every call
/// is appended to `timings`.
pub fn select_symbol(
    edge: &GraphEdge,
    s: &Situation<'_>,
    accepting_only: bool,
    rule: SelectionRule,
    rng: &mut impl Rng,
    timings: &mut Vec<Duration>,
) -> Option<Choice> {
    let mut cache: BTreeMap<(RobotId, &Goal), Option<Path>> = BTreeMap::new();
    let mut options = Vec::new();
    'next: for (i, a) in edge.assignments.iter().enumerate() {
        if !a.admissible(s.sustaining) || (accepting_only && !edge.runs[a.run].accepting) {
            continue;
        }
        let mut paths = BTreeMap::new();
        for (&j, goal) in &a.goals {
            let path = cache.entry((j, goal)).or_insert_with(|| {
                let start = Instant::now();
                let p = s
                    .positions
                    .get(&j)
                    .and_then(|&cell| plan(&LocalProblem { start: cell, goal, env: s.env }, s.map).ok().flatten());
                timings.push(start.elapsed());
                p
            });
            match path {
                Some(p) => paths.insert(j, p.clone()),
                None => continue 'next,
            };
        }
        let cost = paths.values().map(Path::cost).sum();
        options.push(Choice { assignment: i, paths, cost });
    }
    match rule {
        SelectionRule::MinCost => options.into_iter().min_by(|a, b| a.cost.cmp(&b.cost)),
        SelectionRule::Random if options.is_empty() => None,
        SelectionRule::Random => {
            let k = rng.gen_range(0..options.len());
            Some(options.swap_remove(k))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Running,
    Satisfied,
    Infeasible,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Phase {
    Moving,
    /// Next step would change the held symbol too early.
    Gated,
    AtGoal,
}

#[derive(Clone, Debug)]
struct Task {
    goal: Goal,
    path: Path,
    cursor: usize,
    phase: Phase,
}

impl Task {
    fn active(&self) -> bool {
        self.cursor + 1 < self.path.cells.len()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Target {
    edge: (StateId, StateId),
    assignment: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Pending {
    started: u64,
    fire_at: u64,
}

/// Counters collected while running.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Stats {
    pub replans: usize,
    pub replan_times: Vec<Duration>,
    pub plan_times: Vec<Duration>,
    pub messages: usize,
    pub transitions: usize,
    pub first_accept: Option<u64>,
    pub second_accept: Option<u64>,
}

pub struct Executive<'g> {
    live: LiveGraph<'g>,
    pub current: StateId,
    pub sustaining: Symbol,
    target: Option<Target>,
    pending: Option<Pending>,
    tasks: BTreeMap<RobotId, Task>,
    pub accept_count: usize,
    pub status: Status,
    pub stats: Stats,
    /// Automaton states entered, starting with aux.
    pub visited: Vec<StateId>,
    tracked: Option<BTreeSet<StateId>>,
    pub audit_failures: Vec<String>,
    rule: SelectionRule,
    rng: ChaCha8Rng,
}

impl<'g> Executive<'g> {
    /// With `audit`, the executive also follows every automaton run on the
    /// actual label sequence and records a failure whenever the state it
    /// claims is not among them, or the claimed state's self-loop is off.
    pub fn new(graph: &'g DecompGraph, rule: SelectionRule, seed: u64, audit: bool) -> Self {
        let aux = graph.aux;
        let sustaining = graph.nba.aux.as_ref().map(|a| a.label.clone()).unwrap_or_default();
        Executive {
            live: LiveGraph::new(graph),
            current: aux,
            sustaining,
            target: None,
            pending: None,
            tasks: BTreeMap::new(),
            accept_count: 0,
            status: Status::Running,
            stats: Stats::default(),
            visited: vec![aux],
            tracked: audit.then(|| BTreeSet::from([aux])),
            audit_failures: Vec::new(),
            rule,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn live(&self) -> &LiveGraph<'g> {
        &self.live
    }

    pub fn target_state(&self) -> Option<StateId> {
        self.target.map(|t| t.edge.1)
    }

    pub fn phase(&self, robot: RobotId) -> Option<Phase> {
        self.tasks.get(&robot).map(|t| t.phase)
    }

    fn graph(&self) -> &'g DecompGraph {
        self.live.graph
    }

    /// Tick 0: sense, choose the first target, maybe fire at once.
    pub fn start(&mut self, world: &mut World) -> Vec<TraceEvent> {
        let mut ev = Vec::new();
        self.sense_all(world, 0, &mut ev);
        let label = world.label();
        self.check_safety(world, 0, &mut ev);
        self.track(&label);
        self.choose(world, 0, "initial", &mut ev);
        self.try_fire(world, 0, &label, &mut ev);
        self.audit(0, &label);
        ev
    }

    /// One tick: move, sense, replan, maybe fire.
    pub fn tick(&mut self, world: &mut World, t: u64) -> Vec<TraceEvent> {
        let mut ev = Vec::new();
        if self.status != Status::Running {
            return ev;
        }
        if self.pending.is_none() {
            self.advance(world, t, &mut ev);
        }
        self.sense_all(world, t, &mut ev);
        let label = world.label();
        self.check_safety(world, t, &mut ev);
        self.track(&label);
        if self.pending.is_none() {
            self.replan_blocked(world, t, &mut ev);
        }
        if self.status == Status::Running {
            self.try_fire(world, t, &label, &mut ev);
        }
        self.audit(t, &label);
        ev
    }

    fn sense_all(&mut self, world: &mut World, t: u64, ev: &mut Vec<TraceEvent>) {
        let mut added = Vec::new();
        for r in &world.robots {
            let fresh = update_map(&mut world.map, sense(&world.env, r.cell, r.sensing_range));
            world.map.mark_explored(r.cell, r.sensing_range);
            if !fresh.is_empty() {
                ev.push(TraceEvent::new(t, EventKind::Sense).with("robot", r.id).with("new", fresh.len()));
                added.extend(fresh);
            }
        }
        if !added.is_empty() {
            added.sort();
            let cells: Vec<String> = added.iter().map(Cell::to_string).collect();
            ev.push(TraceEvent::new(t, EventKind::MapDelta).with("added", added.len()).with("cells", cells.join(";")));
        }
    }

    fn check_safety(&mut self, world: &World, t: u64, ev: &mut Vec<TraceEvent>) {
        for r in &world.robots {
            if world.env.is_obstacle(r.cell) {
                ev.push(TraceEvent::new(t, EventKind::SafetyViolation).with("robot", r.id).with("cell", r.cell));
            }
        }
    }

    fn track(&mut self, label: &Symbol) {
        if let Some(s) = &self.tracked {
            self.tracked = Some(self.graph().nba.step(s, label));
        }
    }

    fn audit(&mut self, t: u64, label: &Symbol) {
        let Some(tracked) = &self.tracked else { return };
        let g = self.graph();
        let expected = match (self.pending, self.target) {
            (Some(p), Some(target)) => {
                let edge = &g.edges[&target.edge];
                let run = &edge.runs[edge.assignments[target.assignment].run].run;
                run.states[(t - p.started) as usize + 1]
            }
            _ => {
                let holds = g.nba.self_loop(self.current).is_some_and(|l| l.holds(label));
                if !holds {
                    self.audit_failures.push(format!("tick {t}: self-loop of {} is off", g.name(self.current)));
                }
                self.current
            }
        };
        if !tracked.contains(&expected) {
            self.audit_failures.push(format!("tick {t}: automaton cannot be in {}", g.name(expected)));
        }
    }

    fn situation_choice(&mut self, world: &World, edge: &GraphEdge, accepting_only: bool) -> Option<Choice> {
        let positions = world.positions();
        let s = Situation { env: &world.env, map: &world.map, positions: &positions, sustaining: &self.sustaining };
        select_symbol(edge, &s, accepting_only, self.rule, &mut self.rng, &mut self.stats.plan_times)
    }

    /// Picks the next state and a reachable assignment, removing edges that
    /// have none left.
    fn choose(&mut self, world: &World, t: u64, reason: &str, ev: &mut Vec<TraceEvent>) {
        let g = self.graph();
        loop {
            let Some(next) = select_next_state(&self.live, self.current) else {
                ev.push(
                    TraceEvent::new(t, EventKind::MissionInfeasible)
                        .with("state", g.name(self.current))
                        .with("dist", self.live.distance(self.current)),
                );
                self.status = Status::Infeasible;
                self.target = None;
                self.tasks.clear();
                return;
            };
            let edge = &g.edges[&(self.current, next)];
            let accepting_only = self.live.in_vf(self.current);
            if let Some(choice) = self.situation_choice(world, edge, accepting_only) {
                self.adopt(edge, choice, t, reason, ev);
                return;
            }
            ev.push(
                TraceEvent::new(t, EventKind::EdgeRemoved).with("from", g.name(self.current)).with("to", g.name(next)),
            );
            self.live.remove((self.current, next));
        }
    }

    fn adopt(&mut self, edge: &GraphEdge, choice: Choice, t: u64, reason: &str, ev: &mut Vec<TraceEvent>) {
        let g = self.graph();
        let a = &edge.assignments[choice.assignment];
        self.target = Some(Target { edge: (edge.source, edge.target), assignment: choice.assignment });
        self.tasks = choice
            .paths
            .into_iter()
            .map(|(j, path)| {
                let phase = if path.cells.len() > 1 { Phase::Moving } else { Phase::AtGoal };
                (j, Task { goal: a.goals[&j].clone(), path, cursor: 0, phase })
            })
            .collect();
        let goals: Vec<String> = a.goals.iter().map(|(j, goal)| format!("{j}:{goal}")).collect();
        ev.push(
            TraceEvent::new(t, EventKind::SymbolSelected)
                .with("from", g.name(edge.source))
                .with("to", g.name(edge.target))
                .with("symbol", &a.symbol)
                .with("goals", goals.join(","))
                .with("cost", choice.cost)
                .with("reason", reason),
        );
        self.message(t, "assign", ev);
    }

    fn message(&mut self, t: u64, what: &str, ev: &mut Vec<TraceEvent>) {
        self.stats.messages += 1;
        ev.push(TraceEvent::new(t, EventKind::Message).with("what", what));
    }

    /// Moves every robot due this tick one cell along its path, holding back
    /// moves that would change the held symbol before the target is complete.
    fn advance(&mut self, world: &mut World, t: u64, ev: &mut Vec<TraceEvent>) {
        let Some(target) = self.target else { return };
        let g = self.graph();
        let a = &g.edges[&target.edge].assignments[target.assignment];
        let loop_atoms: &BTreeSet<AtomicPredicate> = &g.loop_symbols[&self.current].atoms;
        let mut moves: BTreeMap<RobotId, Cell> = BTreeMap::new();
        for (&j, task) in &self.tasks {
            let period = world.robot(j).map_or(1, |r| r.step_period.max(1));
            if task.active() && t.is_multiple_of(u64::from(period)) {
                moves.insert(j, task.path.cells[task.cursor + 1]);
            }
        }
        if moves.is_empty() {
            return;
        }
        let mut trial = world.positions();
        trial.extend(moves.iter().map(|(&j, &c)| (j, c)));
        let after = crate::world::label(&trial, &world.env);
        if after.restrict(loop_atoms) != self.sustaining && after.restrict(&a.atoms) != a.symbol {
            moves.retain(|&j, &mut c| {
                let enters =
                    world.env.region_at(c).is_some_and(|r| loop_atoms.contains(&AtomicPredicate::region(j, r)));
                if enters {
                    let task = self.tasks.get_mut(&j).unwrap();
                    if task.phase != Phase::Gated {
                        task.phase = Phase::Gated;
                        ev.push(TraceEvent::new(t, EventKind::Waiting).with("robot", j).with("reason", "gate"));
                    }
                }
                !enters
            });
        }
        let mut arrived = Vec::new();
        for (j, to) in moves {
            let hit = contact(&world.env, world.robot(j).unwrap().cell, to);
            if !hit.is_empty() {
                let fresh = update_map(&mut world.map, hit);
                ev.push(
                    TraceEvent::new(t, EventKind::Sense).with("robot", j).with("new", fresh.len()).with("contact", to),
                );
                continue;
            }
            let robot = world.robot_mut(j).unwrap();
            ev.push(TraceEvent::new(t, EventKind::Move).with("robot", j).with("from", robot.cell).with("to", to));
            robot.cell = to;
            let task = self.tasks.get_mut(&j).unwrap();
            task.cursor += 1;
            task.phase = if task.active() { Phase::Moving } else { Phase::AtGoal };
            if !task.active() {
                arrived.push(j);
            }
        }
        for j in arrived {
            ev.push(TraceEvent::new(t, EventKind::GoalReached).with("robot", j).with("goal", &self.tasks[&j].goal));
            self.message(t, "arrived", ev);
            if self.tasks.values().any(Task::active) {
                ev.push(TraceEvent::new(t, EventKind::Waiting).with("robot", j).with("reason", "others"));
            }
        }
    }

    fn replan_blocked(&mut self, world: &World, t: u64, ev: &mut Vec<TraceEvent>) {
        let mut unreachable = false;
        let ids: Vec<RobotId> = self.tasks.keys().copied().collect();
        for j in ids {
            let task = &self.tasks[&j];
            if !task.active() || !path_blocked(&task.path, &world.map, task.cursor) {
                continue;
            }
            let start = world.robot(j).unwrap().cell;
            let clock = Instant::now();
            let fresh = plan(&LocalProblem { start, goal: &task.goal, env: &world.env }, &world.map).ok().flatten();
            let took = clock.elapsed();
            self.stats.replans += 1;
            self.stats.replan_times.push(took);
            self.stats.plan_times.push(took);
            let e = TraceEvent::new(t, EventKind::Replan).with("robot", j).with("goal", &task.goal);
            match fresh {
                Some(path) => {
                    ev.push(e.with("outcome", "ok").with("cost", path.cost()));
                    let task = self.tasks.get_mut(&j).unwrap();
                    task.phase = if path.cells.len() > 1 { Phase::Moving } else { Phase::AtGoal };
                    task.path = path;
                    task.cursor = 0;
                }
                None => {
                    ev.push(e.with("outcome", "unreachable"));
                    unreachable = true;
                }
            }
        }
        if !unreachable {
            return;
        }
        let g = self.graph();
        let target = self.target.expect("tasks imply a target");
        let edge = &g.edges[&target.edge];
        let accepting_only = self.live.in_vf(self.current);
        match self.situation_choice(world, edge, accepting_only) {
            Some(choice) => self.adopt(edge, choice, t, "revision", ev),
            None => {
                ev.push(
                    TraceEvent::new(t, EventKind::EdgeRemoved)
                        .with("from", g.name(target.edge.0))
                        .with("to", g.name(target.edge.1)),
                );
                self.live.remove(target.edge);
                self.choose(world, t, "removal", ev);
            }
        }
    }

    fn try_fire(&mut self, world: &World, t: u64, label: &Symbol, ev: &mut Vec<TraceEvent>) {
        let Some(target) = self.target else { return };
        if let Some(p) = self.pending {
            if t >= p.fire_at {
                self.fire(world, t, label, ev);
            }
            return;
        }
        let edge = &self.graph().edges[&target.edge];
        let a = &edge.assignments[target.assignment];
        if label.restrict(&a.atoms) != a.symbol {
            return;
        }
        let k = edge.runs[a.run].run.hops() as u64;
        if k <= 1 {
            self.fire(world, t, label, ev);
        } else {
            self.pending = Some(Pending { started: t, fire_at: t + k - 1 });
        }
    }

    fn fire(&mut self, world: &World, t: u64, label: &Symbol, ev: &mut Vec<TraceEvent>) {
        let g = self.graph();
        let target = self.target.take().unwrap();
        let edge = &g.edges[&target.edge];
        let run = &edge.runs[edge.assignments[target.assignment].run];
        let states: Vec<&str> = run.run.states.iter().map(|&q| g.name(q)).collect();
        ev.push(
            TraceEvent::new(t, EventKind::Transition)
                .with("from", g.name(edge.source))
                .with("to", g.name(edge.target))
                .with("k", run.run.hops())
                .with("run", states.join(",")),
        );
        self.stats.transitions += 1;
        if run.accepting {
            self.accept_count += 1;
            match self.accept_count {
                1 => self.stats.first_accept = Some(t),
                2 => self.stats.second_accept = Some(t),
                _ => {}
            }
            ev.push(
                TraceEvent::new(t, EventKind::AcceptingEdge)
                    .with("from", g.name(edge.source))
                    .with("to", g.name(edge.target))
                    .with("count", self.accept_count),
            );
        }
        self.current = edge.target;
        self.visited.push(edge.target);
        self.sustaining = label.restrict(&g.loop_symbols[&edge.target].atoms);
        self.pending = None;
        self.tasks.clear();
        if self.accept_count >= 2 {
            self.status = Status::Satisfied;
            return;
        }
        self.choose(world, t, "transition", ev);
    }
}
