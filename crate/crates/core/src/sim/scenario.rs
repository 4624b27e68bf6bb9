//! Scenario files.
//!
//! A scenario is a TOML document:
//!
//! ```toml
//! name = "corridor"
//! width = 10
//! height = 10
//! formula = "F (pi_1_a & F pi_1_b) & G !pi_1_O"   # or: hoa = "m.hoa", atoms = "m.atoms"
//! budget = 500          # ticks, default 1000
//! seed = 7              # default 0
//! hop_cap = 6           # default 6
//! selection = "min-cost"  # or "random"
//! obstacles = [[3, 4], [3, 5]]
//! walls = [[5, 0, 5, 7]]  # inclusive rectangles x0, y0, x1, y1
//! map = ["..a.", ".##.", "...b"]  # optional; row k is y = k
//!
//! [legend]
//! a = "a"               # map character -> region name
//! b = "b"
//!
//! [[regions]]
//! name = "c"
//! cells = [[9, 9]]
//! rects = [[7, 7, 8, 8]]
//!
//! [[robots]]             # robot ids are 1, 2, ... in file order
//! start = [0, 0]
//! range = 2.0            # default 1.0
//! period = 1             # default 1
//! ```
//!
//! In `map`, `#` is an obstacle, `.` is free, and any legend character
//! marks a region cell. `hoa` and `atoms` paths are relative to the file.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::automaton::{import_hoa, parse_atom_table, Nba};
use crate::executive::SelectionRule;
use crate::ltl::{parse_ltl_with, Formula, RobotId, Vocabulary};
use crate::world::{Cell, Environment, RobotState, World, WorldError};

pub const DEFAULT_BUDGET: u64 = 1000;

#[derive(Debug, thiserror::Error)]
pub enum ScenarioError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Schema(String),
    #[error("{field}: {message}")]
    Invalid { field: String, message: String },
}

fn invalid(field: impl Into<String>, message: impl ToString) -> ScenarioError {
    ScenarioError::Invalid { field: field.into(), message: message.to_string() }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Raw {
    name: Option<String>,
    width: i32,
    height: i32,
    formula: Option<String>,
    hoa: Option<String>,
    atoms: Option<String>,
    budget: Option<u64>,
    seed: Option<u64>,
    hop_cap: Option<usize>,
    selection: Option<String>,
    #[serde(default)]
    obstacles: Vec<[i32; 2]>,
    #[serde(default)]
    walls: Vec<[i32; 4]>,
    #[serde(default)]
    map: Vec<String>,
    #[serde(default)]
    legend: BTreeMap<String, String>,
    #[serde(default)]
    regions: Vec<RawRegion>,
    robots: Vec<RawRobot>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRegion {
    name: String,
    #[serde(default)]
    cells: Vec<[i32; 2]>,
    #[serde(default)]
    rects: Vec<[i32; 4]>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRobot {
    start: [i32; 2],
    range: Option<f64>,
    period: Option<u32>,
}

/// What the robots must achieve.
#[derive(Clone, Debug)]
pub enum Mission {
    Formula(Formula),
    /// An automaton supplied directly.
    Automaton(Nba),
}

#[derive(Clone, Debug)]
pub struct Scenario {
    pub name: String,
    pub env: Environment,
    pub robots: Vec<RobotState>,
    pub mission: Mission,
    pub budget: u64,
    pub seed: u64,
    pub hop_cap: usize,
    pub selection: SelectionRule,
}

impl Scenario {
    pub fn world(&self) -> World {
        World::new(self.env.clone(), self.robots.clone())
    }

    pub fn with_range(mut self, range: f64) -> Self {
        for r in &mut self.robots {
            r.sensing_range = range;
        }
        self
    }

    pub fn with_periods(mut self, periods: &[u32]) -> Self {
        for (r, &p) in self.robots.iter_mut().zip(periods) {
            r.step_period = p;
        }
        self
    }
}

fn rect(r: [i32; 4]) -> impl Iterator<Item = Cell> {
    let [x0, y0, x1, y1] = r;
    (x0.min(x1)..=x0.max(x1)).flat_map(move |x| (y0.min(y1)..=y0.max(y1)).map(move |y| Cell::new(x, y)))
}

pub fn load_scenario(path: &Path) -> Result<Scenario, ScenarioError> {
    let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io { path: path.into(), source })?;
    parse_scenario(&text, path.parent().unwrap_or(Path::new(".")))
}

/// Parses and validates scenario text. External files resolve against `base`.
pub fn parse_scenario(text: &str, base: &Path) -> Result<Scenario, ScenarioError> {
    let raw: Raw = toml::from_str(text).map_err(|e| ScenarioError::Schema(e.to_string()))?;
    if raw.width <= 0 || raw.height <= 0 {
        return Err(invalid("width", "grid dimensions must be positive"));
    }

    let mut obstacles: BTreeSet<Cell> = raw.obstacles.iter().map(|&[x, y]| Cell::new(x, y)).collect();
    obstacles.extend(raw.walls.iter().flat_map(|&w| rect(w)));
    let mut regions: BTreeMap<String, BTreeSet<Cell>> = BTreeMap::new();
    for (key, name) in &raw.legend {
        if key.chars().count() != 1 || key == "#" || key == "." {
            return Err(invalid(format!("legend.{key}"), "keys must be single characters other than `#` and `.`"));
        }
        regions.entry(name.clone()).or_default();
    }
    if raw.map.len() > raw.height as usize {
        return Err(invalid("map", "more rows than the grid height"));
    }
    for (y, row) in raw.map.iter().enumerate() {
        if row.chars().count() > raw.width as usize {
            return Err(invalid(format!("map[{y}]"), "row longer than the grid width"));
        }
        for (x, ch) in row.chars().enumerate() {
            let c = Cell::new(x as i32, y as i32);
            match ch {
                '.' => {}
                '#' => {
                    obstacles.insert(c);
                }
                _ => match raw.legend.get(&ch.to_string()) {
                    Some(name) => {
                        regions.get_mut(name).unwrap().insert(c);
                    }
                    None => return Err(invalid(format!("map[{y}]"), format!("character `{ch}` is not in the legend"))),
                },
            }
        }
    }
    for r in &raw.regions {
        let cells = regions.entry(r.name.clone()).or_default();
        cells.extend(r.cells.iter().map(|&[x, y]| Cell::new(x, y)));
        cells.extend(r.rects.iter().flat_map(|&q| rect(q)));
    }
    let env = Environment::new(raw.width, raw.height, obstacles, regions).map_err(|e| {
        let field = match &e {
            WorldError::OutOfBounds(..) => "obstacles",
            _ => "regions",
        };
        invalid(field, e)
    })?;

    if raw.robots.is_empty() {
        return Err(invalid("robots", "at least one robot is required"));
    }
    let mut robots = Vec::new();
    for (i, r) in raw.robots.iter().enumerate() {
        let field = format!("robots[{i}]");
        let cell = Cell::new(r.start[0], r.start[1]);
        if !env.in_bounds(cell) {
            return Err(invalid(format!("{field}.start"), format!("{cell} is outside the grid")));
        }
        if env.is_obstacle(cell) {
            return Err(invalid(format!("{field}.start"), format!("start {cell} is on an obstacle")));
        }
        let range = r.range.unwrap_or(1.0);
        if !(range >= 0.0 && range.is_finite()) {
            return Err(invalid(format!("{field}.range"), "sensing range must be a finite non-negative number"));
        }
        let period = r.period.unwrap_or(1);
        if period == 0 {
            return Err(invalid(format!("{field}.period"), "step period must be at least 1"));
        }
        robots.push(RobotState { id: i as RobotId + 1, cell, step_period: period, sensing_range: range });
    }

    let vocab = Vocabulary { robots: robots.len() as RobotId, regions: env.regions().keys().cloned().collect() };
    let mission = match (&raw.formula, &raw.hoa, &raw.atoms) {
        (Some(text), None, None) => Mission::Formula(parse_ltl_with(text, &vocab).map_err(|e| invalid("formula", e))?),
        (None, Some(hoa), Some(atoms)) => {
            let read = |field: &str, p: &str| {
                let p = base.join(p);
                std::fs::read_to_string(&p).map_err(|e| invalid(field, format!("{}: {e}", p.display())))
            };
            let table = parse_atom_table(&read("atoms", atoms)?).map_err(|e| invalid("atoms", e))?;
            for (name, p) in &table {
                if !(1..=vocab.robots).contains(&p.robot) || p.region_name().is_some_and(|r| !vocab.regions.contains(r))
                {
                    return Err(invalid("atoms", format!("atom {name} = {p} names an undeclared robot or region")));
                }
            }
            Mission::Automaton(import_hoa(&read("hoa", hoa)?, &table).map_err(|e| invalid("hoa", e))?)
        }
        _ => return Err(invalid("formula", "give either `formula` or both `hoa` and `atoms`")),
    };

    let selection = match raw.selection.as_deref() {
        None | Some("min-cost") => SelectionRule::MinCost,
        Some("random") => SelectionRule::Random,
        Some(other) => return Err(invalid("selection", format!("unknown rule `{other}`"))),
    };
    Ok(Scenario {
        name: raw.name.unwrap_or_else(|| "scenario".into()),
        env,
        robots,
        mission,
        budget: raw.budget.unwrap_or(DEFAULT_BUDGET),
        seed: raw.seed.unwrap_or(0),
        hop_cap: raw.hop_cap.unwrap_or(crate::decomposition::DEFAULT_HOP_CAP),
        selection,
    })
}
