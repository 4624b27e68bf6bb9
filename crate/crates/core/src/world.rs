//! Ground truth, the shared occupancy map, range sensing and labels.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write;

use crate::ltl::{AtomicPredicate, RobotId, Symbol};

/// Grid cell. Ordered by `x`, then `y`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Cell {
    pub x: i32,
    pub y: i32,
}

impl Cell {
    pub const fn new(x: i32, y: i32) -> Self {
        Cell { x, y }
    }

    /// Euclidean distance between cell centers squared.
    pub fn dist2(self, other: Cell) -> i64 {
        let dx = i64::from(self.x - other.x);
        let dy = i64::from(self.y - other.y);
        dx * dx + dy * dy
    }
}

impl std::fmt::Display for Cell {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{})", self.x, self.y)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum WorldError {
    #[error("cell {0} is outside the {1}x{2} grid")]
    OutOfBounds(Cell, i32, i32),
    #[error("regions {0} and {1} overlap at {2}")]
    RegionOverlap(String, String, Cell),
    #[error("region/obstacle overlap: region {0} contains obstacle {1}")]
    RegionObstacle(String, Cell),
    #[error("region {0} is empty")]
    EmptyRegion(String),
}

/// Static ground truth: bounds, obstacles and disjoint regions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Environment {
    width: i32,
    height: i32,
    obstacles: Vec<bool>,
    regions: BTreeMap<String, BTreeSet<Cell>>,
    region_at: Vec<Option<u32>>,
    region_names: Vec<String>,
}

impl Environment {
    pub fn new(
        width: i32,
        height: i32,
        obstacles: impl IntoIterator<Item = Cell>,
        regions: BTreeMap<String, BTreeSet<Cell>>,
    ) -> Result<Self, WorldError> {
        let n = (width.max(0) * height.max(0)) as usize;
        let mut env = Environment {
            width,
            height,
            obstacles: vec![false; n],
            regions: BTreeMap::new(),
            region_at: vec![None; n],
            region_names: Vec::new(),
        };
        for c in obstacles {
            let i = env.index(c).ok_or(WorldError::OutOfBounds(c, width, height))?;
            env.obstacles[i] = true;
        }
        for (k, (name, cells)) in regions.iter().enumerate() {
            if cells.is_empty() {
                return Err(WorldError::EmptyRegion(name.clone()));
            }
            for &c in cells {
                let i = env.index(c).ok_or(WorldError::OutOfBounds(c, width, height))?;
                if env.obstacles[i] {
                    return Err(WorldError::RegionObstacle(name.clone(), c));
                }
                if let Some(other) = env.region_at[i] {
                    return Err(WorldError::RegionOverlap(env.region_names[other as usize].clone(), name.clone(), c));
                }
                env.region_at[i] = Some(k as u32);
            }
            env.region_names.push(name.clone());
        }
        env.regions = regions;
        Ok(env)
    }

    pub fn width(&self) -> i32 {
        self.width
    }

    pub fn height(&self) -> i32 {
        self.height
    }

    pub fn in_bounds(&self, c: Cell) -> bool {
        c.x >= 0 && c.y >= 0 && c.x < self.width && c.y < self.height
    }

    pub fn index(&self, c: Cell) -> Option<usize> {
        self.in_bounds(c).then(|| (c.y * self.width + c.x) as usize)
    }

    pub fn is_obstacle(&self, c: Cell) -> bool {
        self.index(c).is_some_and(|i| self.obstacles[i])
    }

    pub fn obstacles(&self) -> impl Iterator<Item = Cell> + '_ {
        self.cells().filter(|&c| self.is_obstacle(c))
    }

    pub fn obstacle_count(&self) -> usize {
        self.obstacles.iter().filter(|&&b| b).count()
    }

    /// Region containing `c`, if any.
    pub fn region_at(&self, c: Cell) -> Option<&str> {
        let i = self.index(c)?;
        self.region_at[i].map(|k| self.region_names[k as usize].as_str())
    }

    pub fn region(&self, name: &str) -> Option<&BTreeSet<Cell>> {
        self.regions.get(name)
    }

    pub fn regions(&self) -> &BTreeMap<String, BTreeSet<Cell>> {
        &self.regions
    }

    /// All cells in row-major order.
    pub fn cells(&self) -> impl Iterator<Item = Cell> + '_ {
        (0..self.height).flat_map(move |y| (0..self.width).map(move |x| Cell::new(x, y)))
    }
}

/// Shared binary belief map. Unexplored cells read free.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OccupancyGrid {
    width: i32,
    height: i32,
    occupied: Vec<bool>,
    explored: Vec<bool>,
}

impl OccupancyGrid {
    pub fn new(width: i32, height: i32) -> Self {
        let n = (width.max(0) * height.max(0)) as usize;
        OccupancyGrid { width, height, occupied: vec![false; n], explored: vec![false; n] }
    }

    pub fn for_env(env: &Environment) -> Self {
        Self::new(env.width, env.height)
    }

    /// A map that already knows every obstacle of `env`.
    pub fn full_knowledge(env: &Environment) -> Self {
        let mut m = Self::for_env(env);
        update_map(&mut m, env.obstacles());
        m
    }

    pub fn width(&self) -> i32 {
        self.width
    }

    pub fn height(&self) -> i32 {
        self.height
    }

    pub fn in_bounds(&self, c: Cell) -> bool {
        c.x >= 0 && c.y >= 0 && c.x < self.width && c.y < self.height
    }

    fn index(&self, c: Cell) -> Option<usize> {
        self.in_bounds(c).then(|| (c.y * self.width + c.x) as usize)
    }

    /// Believed occupied. Out-of-bounds cells count as occupied.
    pub fn is_occupied(&self, c: Cell) -> bool {
        self.index(c).is_none_or(|i| self.occupied[i])
    }

    pub fn is_explored(&self, c: Cell) -> bool {
        self.index(c).is_some_and(|i| self.explored[i])
    }

    pub fn occupied_cells(&self) -> impl Iterator<Item = Cell> + '_ {
        (0..self.height)
            .flat_map(move |y| (0..self.width).map(move |x| Cell::new(x, y)))
            .filter(move |&c| self.is_occupied(c))
    }

    /// Marks every in-bounds cell within `range` of `pos` as explored.
    pub fn mark_explored(&mut self, pos: Cell, range: f64) {
        for c in disc(pos, range) {
            if let Some(i) = self.index(c) {
                self.explored[i] = true;
            }
        }
    }

    /// PGM (P2) rendering: 255 for occupied, 0 for free.
    pub fn to_pgm(&self) -> String {
        let mut out = format!("P2\n{} {}\n255\n", self.width, self.height);
        for y in 0..self.height {
            let row: Vec<&str> =
                (0..self.width).map(|x| if self.is_occupied(Cell::new(x, y)) { "255" } else { "0" }).collect();
            let _ = writeln!(out, "{}", row.join(" "));
        }
        out
    }
}

fn disc(pos: Cell, range: f64) -> impl Iterator<Item = Cell> {
    let r = range.max(0.0);
    let reach = r.floor() as i32;
    let r2 = r * r;
    (pos.y - reach..=pos.y + reach).flat_map(move |y| {
        (pos.x - reach..=pos.x + reach).map(move |x| Cell::new(x, y)).filter(move |&c| (c.dist2(pos) as f64) <= r2)
    })
}

/// Ground-truth obstacles whose center lies within `range` of `pos`'s center.
pub fn sense(env: &Environment, pos: Cell, range: f64) -> BTreeSet<Cell> {
    disc(pos, range).filter(|&c| env.is_obstacle(c)).collect()
}

/// Adds readings to the map. Returns the cells that were not yet occupied.
pub fn update_map(m: &mut OccupancyGrid, readings: impl IntoIterator<Item = Cell>) -> Vec<Cell> {
    let mut fresh = Vec::new();
    for c in readings {
        if let Some(i) = m.index(c) {
            if !m.occupied[i] {
                m.occupied[i] = true;
                fresh.push(c);
            }
        }
    }
    fresh.sort();
    fresh
}

/// Predicates that hold for the given robot positions.
pub fn label(positions: &BTreeMap<RobotId, Cell>, env: &Environment) -> Symbol {
    let mut out = BTreeSet::new();
    for (&j, &c) in positions {
        if let Some(r) = env.region_at(c) {
            out.insert(AtomicPredicate::region(j, r));
        }
        if env.is_obstacle(c) {
            out.insert(AtomicPredicate::obstacle(j));
        }
    }
    Symbol(out)
}

/// Obstacles a one-cell move from `from` to `to` would run into: the
/// destination and, for a diagonal step, either corner. A robot that finds
/// any refuses the move and records them.
pub fn contact(env: &Environment, from: Cell, to: Cell) -> Vec<Cell> {
    let mut hit = vec![to];
    if from.x != to.x && from.y != to.y {
        hit.push(Cell::new(to.x, from.y));
        hit.push(Cell::new(from.x, to.y));
    }
    hit.retain(|&c| env.is_obstacle(c));
    hit.sort();
    hit
}

/// One robot's pose and capabilities.
#[derive(Clone, Debug, PartialEq)]
pub struct RobotState {
    pub id: RobotId,
    pub cell: Cell,
    /// The robot may move on ticks divisible by this.
    pub step_period: u32,
    pub sensing_range: f64,
}

/// Everything the simulation driver mutates.
#[derive(Clone, Debug)]
pub struct World {
    pub env: Environment,
    pub map: OccupancyGrid,
    /// Sorted by id.
    pub robots: Vec<RobotState>,
}

impl World {
    pub fn new(env: Environment, mut robots: Vec<RobotState>) -> Self {
        robots.sort_by_key(|r| r.id);
        let map = OccupancyGrid::for_env(&env);
        World { env, map, robots }
    }

    pub fn positions(&self) -> BTreeMap<RobotId, Cell> {
        self.robots.iter().map(|r| (r.id, r.cell)).collect()
    }

    pub fn label(&self) -> Symbol {
        label(&self.positions(), &self.env)
    }

    pub fn robot(&self, id: RobotId) -> Option<&RobotState> {
        self.robots.iter().find(|r| r.id == id)
    }

    pub fn robot_mut(&mut self, id: RobotId) -> Option<&mut RobotState> {
        self.robots.iter_mut().find(|r| r.id == id)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn regions(list: &[(&str, &[(i32, i32)])]) -> BTreeMap<String, BTreeSet<Cell>> {
        list.iter().map(|(n, cs)| (n.to_string(), cs.iter().map(|&(x, y)| Cell::new(x, y)).collect())).collect()
    }

    #[test]
    fn empty_world_senses_nothing() {
        let env = Environment::new(5, 5, [], BTreeMap::new()).unwrap();
        assert!(sense(&env, Cell::new(2, 2), 10.0).is_empty());
    }

    #[test]
    fn adjacent_obstacle_detected() {
        let env = Environment::new(5, 5, [Cell::new(3, 2)], BTreeMap::new()).unwrap();
        assert_eq!(sense(&env, Cell::new(2, 2), 1.0), BTreeSet::from([Cell::new(3, 2)]));
    }

    #[test]
    fn range_cuts_by_center_distance() {
        let obs = [Cell::new(1, 0), Cell::new(2, 0), Cell::new(3, 0)];
        let env = Environment::new(5, 5, obs, BTreeMap::new()).unwrap();
        let seen = sense(&env, Cell::new(0, 0), 2.0);
        assert_eq!(seen, BTreeSet::from([Cell::new(1, 0), Cell::new(2, 0)]));
        // (1,1) diagonal is at sqrt 2; a range of 1 misses it
        let env = Environment::new(5, 5, [Cell::new(1, 1)], BTreeMap::new()).unwrap();
        assert!(sense(&env, Cell::new(0, 0), 1.0).is_empty());
        assert_eq!(sense(&env, Cell::new(0, 0), 1.5).len(), 1);
    }

    #[test]
    fn map_is_a_monotone_union() {
        let mut m = OccupancyGrid::new(4, 4);
        assert!(update_map(&mut m, []).is_empty());
        assert_eq!(update_map(&mut m, [Cell::new(1, 1), Cell::new(1, 1)]), vec![Cell::new(1, 1)]);
        assert!(update_map(&mut m, [Cell::new(1, 1)]).is_empty());
        update_map(&mut m, [Cell::new(2, 1)]);
        assert_eq!(m.occupied_cells().count(), 2);
    }

    #[test]
    fn labels() {
        let env = Environment::new(5, 5, [Cell::new(4, 4)], regions(&[("l1", &[(0, 0)])])).unwrap();
        let mut pos = BTreeMap::from([(1, Cell::new(0, 0)), (2, Cell::new(2, 2))]);
        assert_eq!(label(&pos, &env), Symbol::from_iter([AtomicPredicate::region(1, "l1")]));
        pos.insert(1, Cell::new(1, 0));
        assert!(label(&pos, &env).is_empty());
        pos.insert(2, Cell::new(4, 4));
        assert!(label(&pos, &env).has_obstacle());
    }

    #[test]
    fn validation() {
        let overlap = regions(&[("a", &[(0, 0)]), ("b", &[(0, 0)])]);
        assert!(matches!(Environment::new(3, 3, [], overlap), Err(WorldError::RegionOverlap(..))));
        let on_obstacle = regions(&[("a", &[(1, 1)])]);
        let err = Environment::new(3, 3, [Cell::new(1, 1)], on_obstacle).unwrap_err();
        assert!(err.to_string().contains("region/obstacle overlap"));
        assert!(Environment::new(3, 3, [Cell::new(3, 0)], BTreeMap::new()).is_err());
    }

    #[test]
    fn pgm_layout() {
        let mut m = OccupancyGrid::new(2, 2);
        update_map(&mut m, [Cell::new(1, 0)]);
        assert_eq!(m.to_pgm(), "P2\n2 2\n255\n0 255\n0 0\n");
    }
}
