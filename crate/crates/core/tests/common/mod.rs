#![allow(dead_code)]

use proptest::prelude::*;
use rand::Rng;
use std::collections::BTreeSet;

use reactive_ltl::ltl::{parse_ltl, AtomicPredicate, Formula, LassoWord, Symbol};

pub fn atoms() -> Vec<AtomicPredicate> {
    vec![
        AtomicPredicate::region(1, "a"),
        AtomicPredicate::region(1, "b"),
        AtomicPredicate::region(2, "a"),
        AtomicPredicate::obstacle(1),
    ]
}

pub fn formula(depth: u32) -> impl Strategy<Value = Formula> {
    let leaf = prop_oneof![
        1 => Just(Formula::True),
        1 => Just(Formula::falsity()),
        8 => proptest::sample::select(atoms()).prop_map(Formula::Atom),
    ];
    leaf.prop_recursive(depth, 24, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(Formula::not),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::and(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::or(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::until(a, b)),
            inner.clone().prop_map(Formula::always),
            inner.clone().prop_map(Formula::eventually),
            (inner.clone(), inner).prop_map(|(a, b)| Formula::implies(a, b)),
        ]
    })
}

/// Random symbol over `atoms`, optionally restricted to feasible ones.
pub fn random_symbol(rng: &mut impl Rng, atoms: &[AtomicPredicate], feasible: bool) -> Symbol {
    loop {
        let s: Symbol = atoms.iter().filter(|_| rng.gen_bool(0.4)).cloned().collect();
        if !feasible || s.is_feasible() {
            return s;
        }
    }
}

pub fn random_lasso(rng: &mut impl Rng, atoms: &[AtomicPredicate], feasible: bool) -> LassoWord {
    let p = rng.gen_range(0..4);
    let c = rng.gen_range(1..4);
    LassoWord::new(
        (0..p).map(|_| random_symbol(rng, atoms, feasible)).collect(),
        (0..c).map(|_| random_symbol(rng, atoms, feasible)).collect(),
    )
}

pub fn lasso_strategy(feasible: bool) -> impl Strategy<Value = LassoWord> {
    any::<u64>().prop_map(move |seed| {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        random_lasso(&mut rng, &atoms(), feasible)
    })
}

/// Each robot in at most one region, obstacle atoms drawn independently.
pub fn structured_symbol(rng: &mut impl Rng, atoms: &[AtomicPredicate]) -> Symbol {
    let robots: BTreeSet<_> = atoms.iter().map(|p| p.robot).collect();
    let mut out = BTreeSet::new();
    for j in robots {
        let regions: Vec<_> = atoms.iter().filter(|p| p.robot == j && !p.is_obstacle()).collect();
        let k = rng.gen_range(0..=regions.len());
        if k < regions.len() {
            out.insert(regions[k].clone());
        }
        let o = AtomicPredicate::obstacle(j);
        if atoms.contains(&o) && rng.gen_bool(0.2) {
            out.insert(o);
        }
    }
    Symbol(out)
}

pub fn structured_lasso(rng: &mut impl Rng, atoms: &[AtomicPredicate]) -> LassoWord {
    let p = rng.gen_range(0..5);
    let c = rng.gen_range(1..5);
    LassoWord::new(
        (0..p).map(|_| structured_symbol(rng, atoms)).collect(),
        (0..c).map(|_| structured_symbol(rng, atoms)).collect(),
    )
}

/// Mission-shaped formulas, including every conjunct of the single-robot
/// benchmark tasks and their two-robot variants.
pub const MISSION_CORPUS: &[&str] = &[
    // First benchmark task and its conjuncts.
    "G F (pi_1_l6 | pi_1_l3) & G F pi_1_l1 & F pi_1_l2 & F (pi_1_l5 | pi_1_l4) & F pi_1_l8 & F pi_1_l9 & (!pi_1_l2 U (pi_1_l5 | pi_1_l4)) & G !pi_1_O",
    "G F (pi_1_l6 | pi_1_l3)",
    "G F pi_1_l1",
    "F pi_1_l2",
    "F (pi_1_l5 | pi_1_l4)",
    "!pi_1_l2 U (pi_1_l5 | pi_1_l4)",
    "G F (pi_1_l6 | pi_1_l3) & G F pi_1_l1 & G !pi_1_O",
    // Two-robot variants of the same conjuncts.
    "G F ((pi_1_l6 | pi_1_l3) & (pi_2_l6 | pi_2_l3)) & G F (pi_1_l1 & pi_2_l1)",
    "!(pi_1_l2 & pi_2_l2) U ((pi_1_l5 | pi_1_l4) & (pi_2_l5 | pi_2_l4))",
    "F (pi_1_l8 & pi_2_l8) & F (pi_1_l9 & pi_2_l9) & G !pi_1_O & G !pi_2_O",
    // Second benchmark task and its conjuncts.
    "F ((pi_1_l8 | pi_1_l5) & F (pi_1_l7 & F (pi_1_l4 & (F (pi_1_l1 | pi_1_l2) & F pi_1_l6)))) & G !pi_1_l3 & G !pi_1_O & F G pi_1_exit",
    "F ((pi_1_l8 | pi_1_l5) & F pi_1_l7)",
    "F (pi_1_l4 & (F (pi_1_l1 | pi_1_l2) & F pi_1_l6))",
    "G !pi_1_l3 & F G pi_1_exit",
    "F ((pi_1_l8 | pi_1_l5) & (pi_2_l8 | pi_2_l5) & F (pi_1_l7 & pi_2_l7)) & G !pi_2_l3",
    "F G (pi_1_exit & pi_2_exit) & G !pi_1_O & G !pi_2_O",
    // Other mission shapes.
    "F pi_1_l4 & F pi_1_r1 & F (pi_1_r2 | pi_1_r5) & (!pi_1_r1 U pi_1_r3) & G !pi_1_O",
    "F pi_2_l2 & F (pi_1_l1 & F (pi_1_l3 & pi_2_l3)) & F G pi_1_l4 & F G pi_2_l4",
    "G F pi_1_l1 & G F pi_1_l2",
    "pi_1_l1 U pi_1_l2",
    "G (pi_1_l0 | pi_2_l0) & F pi_1_l1 & F pi_2_l1",
    "F (pi_1_l1 & F pi_1_l2) & G !pi_1_O",
    "G F pi_1_l1 & G F pi_2_l2",
    "F (pi_1_l1 & pi_2_l2) & G !(pi_1_l3 & pi_2_l3)",
    "(!pi_1_l2 U pi_1_l1) & F pi_1_l2",
    "G (pi_1_l1 -> F pi_2_l1)",
    "G F (pi_1_l1 & F (pi_2_l2 & F pi_3_l3))",
    "F G pi_1_l1 | G F pi_2_l1",
    "G (pi_1_l1 | pi_2_l1) & F pi_1_l2",
    "(pi_1_l1 U pi_2_l2) U pi_3_l3",
    "G (F pi_1_l1 & F pi_1_l2) & G !(pi_1_l1 & pi_2_l1)",
    "G F (pi_1_A | pi_1_B) & G F pi_1_C & G !pi_1_O",
];

pub fn mission_corpus() -> Vec<Formula> {
    MISSION_CORPUS.iter().map(|s| parse_ltl(s).unwrap()).collect()
}

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use reactive_ltl::decomposition::Goal;
use reactive_ltl::world::{Cell, Environment, OccupancyGrid};

/// Textbook Dijkstra over the 8-connected grid, used to check the planner.
/// Returns the optimal cost, or `None` when no goal cell can be reached.
pub fn dijkstra_cost(env: &Environment, map: &OccupancyGrid, start: Cell, goal: &Goal) -> Option<f64> {
    let (w, h) = (env.width(), env.height());
    let blocked = |x: i32, y: i32| x < 0 || y < 0 || x >= w || y >= h || map.is_occupied(Cell::new(x, y));
    let home = env.region_at(start).map(str::to_string);
    let accepts = |c: Cell| match goal {
        Goal::Region(r) => env.region_at(c) == Some(r.as_str()),
        Goal::PredicateFree { .. } => env.region_at(c).is_none(),
    };
    let enterable = |c: Cell| match env.region_at(c) {
        None => true,
        Some(r) => home.as_deref() == Some(r) || matches!(goal, Goal::Region(g) if g == r),
    };
    if goal.satisfied_by(home.as_deref()) {
        return Some(0.0);
    }
    let idx = |c: Cell| (c.y * w + c.x) as usize;
    let mut dist = vec![f64::INFINITY; (w * h) as usize];
    let mut heap = BinaryHeap::new();
    dist[idx(start)] = 0.0;
    // Non-negative floats order like their bit patterns.
    heap.push(Reverse((0f64.to_bits(), start.x, start.y)));
    while let Some(Reverse((bits, x, y))) = heap.pop() {
        let d = f64::from_bits(bits);
        let c = Cell::new(x, y);
        if d > dist[idx(c)] {
            continue;
        }
        if accepts(c) {
            return Some(d);
        }
        for (dx, dy) in [(-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1)] {
            let (nx, ny) = (x + dx, y + dy);
            if blocked(nx, ny) || (dx != 0 && dy != 0 && (blocked(x + dx, y) || blocked(x, y + dy))) {
                continue;
            }
            let n = Cell::new(nx, ny);
            if !enterable(n) {
                continue;
            }
            let nd = d + if dx != 0 && dy != 0 { std::f64::consts::SQRT_2 } else { 1.0 };
            if nd < dist[idx(n)] - 1e-12 {
                dist[idx(n)] = nd;
                heap.push(Reverse((nd.to_bits(), nx, ny)));
            }
        }
    }
    None
}

/// A random 20x20 instance: scattered obstacles, a few square regions, a
/// free start cell, fully known map.
pub fn random_instance(rng: &mut impl Rng) -> (Environment, Cell, Goal) {
    use std::collections::BTreeMap;
    let (w, h) = (20, 20);
    let density = rng.gen_range(0.05..0.4);
    let mut obstacles = BTreeSet::new();
    for x in 0..w {
        for y in 0..h {
            if rng.gen_bool(density) {
                obstacles.insert(Cell::new(x, y));
            }
        }
    }
    let mut regions: BTreeMap<String, BTreeSet<Cell>> = BTreeMap::new();
    let mut used = BTreeSet::new();
    for k in 0..rng.gen_range(1..5) {
        let (x0, y0, s) = (rng.gen_range(0..18), rng.gen_range(0..18), rng.gen_range(1..3));
        let cells: BTreeSet<Cell> = (x0..x0 + s)
            .flat_map(|x| (y0..y0 + s).map(move |y| Cell::new(x, y)))
            .filter(|c| !used.contains(c))
            .collect();
        if cells.is_empty() {
            continue;
        }
        for c in &cells {
            obstacles.remove(c);
        }
        used.extend(cells.iter().copied());
        regions.insert(format!("r{k}"), cells);
    }
    let env = Environment::new(w, h, obstacles, regions).unwrap();
    let free: Vec<Cell> = env.cells().filter(|&c| !env.is_obstacle(c)).collect();
    let start = free[rng.gen_range(0..free.len())];
    let names: Vec<&String> = env.regions().keys().collect();
    let goal = if rng.gen_bool(0.8) {
        Goal::Region(names[rng.gen_range(0..names.len())].clone())
    } else {
        Goal::PredicateFree { avoid: env.regions().keys().cloned().collect() }
    };
    (env, start, goal)
}
