//! Single-robot reach-and-avoid planning on the known map.
//!
//! Moves are the eight grid neighbours. A diagonal step is allowed only when
//! both orthogonal cells it passes are believed free. Cells of regions other
//! than the robot's current region and its goal region are never entered.

use std::cmp::{Ordering, Reverse};
use std::collections::{BinaryHeap, HashMap};

use crate::decomposition::Goal;
use crate::world::{Cell, Environment, OccupancyGrid};

/// Exact path length `straight + diagonal * sqrt(2)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct PathCost {
    pub straight: u32,
    pub diagonal: u32,
}

impl PathCost {
    pub const ZERO: PathCost = PathCost { straight: 0, diagonal: 0 };

    pub fn value(self) -> f64 {
        f64::from(self.straight) + f64::from(self.diagonal) * std::f64::consts::SQRT_2
    }

    pub fn steps(self) -> u32 {
        self.straight + self.diagonal
    }
}

impl std::ops::Add for PathCost {
    type Output = PathCost;
    fn add(self, o: PathCost) -> PathCost {
        PathCost { straight: self.straight + o.straight, diagonal: self.diagonal + o.diagonal }
    }
}

impl std::iter::Sum for PathCost {
    fn sum<I: Iterator<Item = PathCost>>(iter: I) -> PathCost {
        iter.fold(PathCost::ZERO, |a, b| a + b)
    }
}

impl Ord for PathCost {
    fn cmp(&self, o: &Self) -> Ordering {
        // compare da with db * sqrt 2
        let da = i64::from(self.straight) - i64::from(o.straight);
        let db = i64::from(o.diagonal) - i64::from(self.diagonal);
        match (da.signum(), db.signum()) {
            (0, 0) => Ordering::Equal,
            (a, b) if a >= 0 && b <= 0 => Ordering::Greater,
            (a, b) if a <= 0 && b >= 0 => Ordering::Less,
            (1, 1) => (da * da).cmp(&(2 * db * db)),
            _ => (2 * db * db).cmp(&(da * da)),
        }
    }
}

impl PartialOrd for PathCost {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

impl std::fmt::Display for PathCost {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:.4}", self.value())
    }
}

/// Octile distance between two cells.
pub fn octile(a: Cell, b: Cell) -> PathCost {
    let dx = a.x.abs_diff(b.x);
    let dy = a.y.abs_diff(b.y);
    PathCost { straight: dx.max(dy) - dx.min(dy), diagonal: dx.min(dy) }
}

fn step_cost(a: Cell, b: Cell) -> PathCost {
    if a.x != b.x && a.y != b.y {
        PathCost { straight: 0, diagonal: 1 }
    } else {
        PathCost { straight: 1, diagonal: 0 }
    }
}

/// Sequence of cells from the robot's position to a goal cell.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Path {
    pub cells: Vec<Cell>,
}

impl Path {
    pub fn cost(&self) -> PathCost {
        self.cells.windows(2).map(|w| step_cost(w[0], w[1])).sum()
    }

    pub fn goal(&self) -> Cell {
        *self.cells.last().unwrap()
    }
}

#[derive(Clone, Debug)]
pub struct LocalProblem<'a> {
    pub start: Cell,
    pub goal: &'a Goal,
    pub env: &'a Environment,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PlanError {
    #[error("start {0} is outside the map")]
    StartOutOfBounds(Cell),
    #[error("start {0} is believed occupied")]
    StartOccupied(Cell),
    #[error("unknown goal region {0}")]
    UnknownRegion(String),
}

/// Eight neighbours of `c` a robot may move to on `map`, in cell order.
pub fn neighbours(c: Cell, map: &OccupancyGrid) -> impl Iterator<Item = Cell> + '_ {
    let mut out = Vec::with_capacity(8);
    for dx in -1..=1 {
        for dy in -1..=1 {
            if dx == 0 && dy == 0 {
                continue;
            }
            let n = Cell::new(c.x + dx, c.y + dy);
            if map.is_occupied(n) {
                continue;
            }
            if dx != 0
                && dy != 0
                && (map.is_occupied(Cell::new(c.x + dx, c.y)) || map.is_occupied(Cell::new(c.x, c.y + dy)))
            {
                continue;
            }
            out.push(n);
        }
    }
    out.into_iter()
}

/// Shortest path to the goal avoiding known obstacles and other regions, or
/// `None` when the known map leaves no way through.
pub fn plan(problem: &LocalProblem<'_>, map: &OccupancyGrid) -> Result<Option<Path>, PlanError> {
    let LocalProblem { start, goal, env } = *problem;
    if !map.in_bounds(start) || !env.in_bounds(start) {
        return Err(PlanError::StartOutOfBounds(start));
    }
    if map.is_occupied(start) {
        return Err(PlanError::StartOccupied(start));
    }
    let here = env.region_at(start);
    if goal.satisfied_by(here) {
        return Ok(Some(Path { cells: vec![start] }));
    }
    let target = match goal {
        Goal::Region(r) => {
            let cells = env.region(r).ok_or_else(|| PlanError::UnknownRegion(r.clone()))?;
            let (x0, x1) = (cells.iter().map(|c| c.x).min().unwrap(), cells.iter().map(|c| c.x).max().unwrap());
            let (y0, y1) = (cells.iter().map(|c| c.y).min().unwrap(), cells.iter().map(|c| c.y).max().unwrap());
            Some((r.as_str(), (x0, y0, x1, y1)))
        }
        Goal::PredicateFree { .. } => None,
    };
    let heuristic = |c: Cell| match target {
        Some((_, (x0, y0, x1, y1))) => octile(c, Cell::new(c.x.clamp(x0, x1), c.y.clamp(y0, y1))),
        None => PathCost::ZERO,
    };
    let is_goal = |c: Cell| match target {
        Some((r, _)) => env.region_at(c) == Some(r),
        None => env.region_at(c).is_none(),
    };
    let passable = |c: Cell| match env.region_at(c) {
        None => true,
        Some(r) => Some(r) == here || target.is_some_and(|(t, _)| t == r),
    };

    let mut best: HashMap<Cell, (PathCost, Option<Cell>)> = HashMap::new();
    let mut open = BinaryHeap::new();
    best.insert(start, (PathCost::ZERO, None));
    open.push(Reverse((heuristic(start), start, PathCost::ZERO)));
    while let Some(Reverse((_, c, g))) = open.pop() {
        if best[&c].0 != g {
            continue;
        }
        if is_goal(c) {
            let mut cells = vec![c];
            let mut cur = c;
            while let Some(p) = best[&cur].1 {
                cells.push(p);
                cur = p;
            }
            cells.reverse();
            return Ok(Some(Path { cells }));
        }
        for n in neighbours(c, map) {
            if !passable(n) {
                continue;
            }
            let ng = g + step_cost(c, n);
            let better = best.get(&n).is_none_or(|&(old, _)| ng < old);
            if better {
                best.insert(n, (ng, Some(c)));
                open.push(Reverse((ng + heuristic(n), n, ng)));
            }
        }
    }
    Ok(None)
}

/// Whether the part of `path` from `cursor` on now crosses a believed
/// obstacle, including corners cut by a remaining diagonal step.
pub fn path_blocked(path: &Path, map: &OccupancyGrid, cursor: usize) -> bool {
    let rest = &path.cells[cursor.min(path.cells.len() - 1)..];
    rest.iter().any(|&c| map.is_occupied(c))
        || rest.windows(2).any(|w| {
            let (a, b) = (w[0], w[1]);
            a.x != b.x && a.y != b.y && (map.is_occupied(Cell::new(b.x, a.y)) || map.is_occupied(Cell::new(a.x, b.y)))
        })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world::update_map;
    use std::collections::{BTreeMap, BTreeSet};

    fn env_with(w: i32, h: i32, obstacles: &[(i32, i32)], regions: &[(&str, &[(i32, i32)])]) -> Environment {
        let regions = regions
            .iter()
            .map(|(n, cs)| (n.to_string(), cs.iter().map(|&(x, y)| Cell::new(x, y)).collect::<BTreeSet<_>>()))
            .collect::<BTreeMap<_, _>>();
        Environment::new(w, h, obstacles.iter().map(|&(x, y)| Cell::new(x, y)), regions).unwrap()
    }

    #[test]
    fn exact_cost_order() {
        let c = |s, d| PathCost { straight: s, diagonal: d };
        assert!(c(2, 0) > c(0, 1));
        assert!(c(1, 0) < c(0, 1));
        assert!(c(3, 0) > c(0, 2));
        assert!(c(0, 5) > c(7, 0));
        assert!(c(0, 5) < c(8, 0));
        assert_eq!(c(4, 2).cmp(&c(4, 2)), Ordering::Equal);
        assert!(c(10, 1) < c(3, 6));
        assert!(c(11, 1) > c(3, 6));
    }

    #[test]
    fn already_in_goal() {
        let env = env_with(3, 3, &[], &[("g", &[(0, 0)])]);
        let goal = Goal::Region("g".into());
        let p = plan(&LocalProblem { start: Cell::new(0, 0), goal: &goal, env: &env }, &OccupancyGrid::for_env(&env));
        assert_eq!(p.unwrap().unwrap().cells, vec![Cell::new(0, 0)]);
    }

    #[test]
    fn diagonal_route() {
        let env = env_with(3, 3, &[], &[("g", &[(2, 2)])]);
        let goal = Goal::Region("g".into());
        let p = plan(&LocalProblem { start: Cell::new(0, 0), goal: &goal, env: &env }, &OccupancyGrid::for_env(&env))
            .unwrap()
            .unwrap();
        assert_eq!(p.cost(), PathCost { straight: 0, diagonal: 2 });
    }

    #[test]
    fn walled_goal_unreachable() {
        let walls = [(1, 1), (2, 1), (3, 1), (1, 2), (3, 2), (1, 3), (2, 3), (3, 3)];
        let env = env_with(5, 5, &walls, &[("g", &[(2, 2)])]);
        let goal = Goal::Region("g".into());
        let map = OccupancyGrid::full_knowledge(&env);
        assert_eq!(plan(&LocalProblem { start: Cell::new(0, 0), goal: &goal, env: &env }, &map).unwrap(), None);
        // unknown walls read free
        let blind = OccupancyGrid::for_env(&env);
        assert!(plan(&LocalProblem { start: Cell::new(0, 0), goal: &goal, env: &env }, &blind).unwrap().is_some());
    }

    #[test]
    fn no_corner_cutting() {
        let env = env_with(2, 2, &[(1, 0), (0, 1)], &[("g", &[(1, 1)])]);
        let goal = Goal::Region("g".into());
        let map = OccupancyGrid::full_knowledge(&env);
        assert_eq!(plan(&LocalProblem { start: Cell::new(0, 0), goal: &goal, env: &env }, &map).unwrap(), None);
    }

    #[test]
    fn other_regions_avoided() {
        // a wall of region b blocks the direct line
        let env = env_with(5, 3, &[], &[("b", &[(2, 0), (2, 1)]), ("g", &[(4, 0)])]);
        let goal = Goal::Region("g".into());
        let p = plan(&LocalProblem { start: Cell::new(0, 0), goal: &goal, env: &env }, &OccupancyGrid::for_env(&env))
            .unwrap()
            .unwrap();
        assert!(p.cells.iter().all(|&c| env.region_at(c) != Some("b")));
        assert!(p.cells.contains(&Cell::new(2, 2)));
    }

    #[test]
    fn leaving_a_region() {
        let env = env_with(4, 1, &[], &[("a", &[(0, 0), (1, 0)])]);
        let goal = Goal::PredicateFree { avoid: BTreeSet::from(["a".to_string()]) };
        let map = OccupancyGrid::for_env(&env);
        let p = plan(&LocalProblem { start: Cell::new(0, 0), goal: &goal, env: &env }, &map).unwrap().unwrap();
        assert_eq!(p.goal(), Cell::new(2, 0));
        let stay = Goal::PredicateFree { avoid: BTreeSet::new() };
        let p = plan(&LocalProblem { start: Cell::new(0, 0), goal: &stay, env: &env }, &map).unwrap().unwrap();
        assert_eq!(p.cells.len(), 1);
    }

    #[test]
    fn blocked_suffix_only() {
        let path = Path { cells: vec![Cell::new(0, 0), Cell::new(1, 0), Cell::new(2, 0)] };
        let mut map = OccupancyGrid::new(3, 3);
        assert!(!path_blocked(&path, &map, 1));
        update_map(&mut map, [Cell::new(0, 0)]);
        assert!(!path_blocked(&path, &map, 1));
        update_map(&mut map, [Cell::new(2, 0)]);
        assert!(path_blocked(&path, &map, 1));
    }

    #[test]
    fn bad_start() {
        let env = env_with(2, 2, &[], &[]);
        let goal = Goal::PredicateFree { avoid: BTreeSet::new() };
        let map = OccupancyGrid::for_env(&env);
        assert!(plan(&LocalProblem { start: Cell::new(5, 5), goal: &goal, env: &env }, &map).is_err());
    }
}
