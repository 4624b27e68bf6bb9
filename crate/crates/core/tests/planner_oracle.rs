mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use reactive_ltl::planner::{path_blocked, plan, LocalProblem};
use reactive_ltl::world::{contact, sense, update_map, Cell, OccupancyGrid};

#[test]
fn fifty_maps_match_dijkstra() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut reachable = 0;
    for i in 0..50 {
        let (env, start, goal) = common::random_instance(&mut rng);
        let map = OccupancyGrid::full_knowledge(&env);
        let got = plan(&LocalProblem { start, goal: &goal, env: &env }, &map).unwrap();
        let want = common::dijkstra_cost(&env, &map, start, &goal);
        match (got, want) {
            (Some(p), Some(c)) => {
                reachable += 1;
                assert!((p.cost().value() - c).abs() < 1e-9, "instance {i}: {} vs {c}", p.cost());
            }
            (None, None) => {}
            (got, want) => panic!("instance {i}: planner {got:?}, oracle {want:?}"),
        }
    }
    assert!(reachable > 10, "too few reachable instances to be informative");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    /// Every planned path is a legal walk: adjacent steps, known-free cells,
    /// no corner cutting, no foreign regions, ending at the goal.
    #[test]
    fn paths_respect_constraints(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (env, start, goal) = common::random_instance(&mut rng);
        let map = OccupancyGrid::full_knowledge(&env);
        let Some(path) = plan(&LocalProblem { start, goal: &goal, env: &env }, &map).unwrap() else {
            return Ok(());
        };
        let cells = &path.cells;
        prop_assert_eq!(cells[0], start);
        let home = env.region_at(start);
        for &c in cells {
            prop_assert!(!map.is_occupied(c));
            let r = env.region_at(c);
            let allowed = r.is_none() || r == home || matches!(&goal, reactive_ltl::decomposition::Goal::Region(g) if Some(g.as_str()) == r);
            prop_assert!(allowed, "{} enters region {:?}", c, r);
        }
        for w in cells.windows(2) {
            let (a, b) = (w[0], w[1]);
            prop_assert!((a.x - b.x).abs() <= 1 && (a.y - b.y).abs() <= 1);
            if a.x != b.x && a.y != b.y {
                prop_assert!(!map.is_occupied(Cell::new(a.x, b.y)) && !map.is_occupied(Cell::new(b.x, a.y)));
            }
        }
        prop_assert!(goal.satisfied_by(env.region_at(*cells.last().unwrap())));
        prop_assert!(!path_blocked(&path, &map, 0));
    }

    /// Follow, sense, replan on a static world: ends at the goal or with an
    /// unreachable verdict, after at most one replan per obstacle cell.
    #[test]
    fn replanning_converges(seed in any::<u64>(), range in 0.0f64..3.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (env, start, goal) = common::random_instance(&mut rng);
        let mut map = OccupancyGrid::for_env(&env);
        update_map(&mut map, sense(&env, start, range));
        let problem = |s| LocalProblem { start: s, goal: &goal, env: &env };
        let mut pos = start;
        let mut replans = 0;
        let Some(mut path) = plan(&problem(pos), &map).unwrap() else { return Ok(()); };
        let mut cursor = 0;
        loop {
            if cursor + 1 == path.cells.len() {
                prop_assert!(goal.satisfied_by(env.region_at(pos)));
                break;
            }
            let next = path.cells[cursor + 1];
            let hit = contact(&env, pos, next);
            let fresh = if hit.is_empty() {
                pos = next;
                cursor += 1;
                update_map(&mut map, sense(&env, pos, range))
            } else {
                update_map(&mut map, hit)
            };
            prop_assert!(!env.is_obstacle(pos));
            if path_blocked(&path, &map, cursor) {
                prop_assert!(!fresh.is_empty());
                replans += 1;
                match plan(&problem(pos), &map).unwrap() {
                    Some(p) => { path = p; cursor = 0; }
                    None => break,
                }
            }
        }
        prop_assert!(replans <= env.obstacle_count() + 1);
    }
}
