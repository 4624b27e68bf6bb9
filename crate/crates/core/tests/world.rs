use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;
use reactive_ltl::ltl::AtomicPredicate;
use reactive_ltl::world::{label, sense, update_map, Cell, Environment, OccupancyGrid};

fn env_strategy() -> impl Strategy<Value = Environment> {
    (3i32..12, 3i32..12, proptest::collection::vec((0i32..12, 0i32..12), 0..30)).prop_map(|(w, h, obs)| {
        let obstacles: BTreeSet<Cell> = obs.into_iter().map(|(x, y)| Cell::new(x % w, y % h)).collect();
        let goal = Cell::new(w - 1, h - 1);
        let obstacles: BTreeSet<Cell> = obstacles.into_iter().filter(|&c| c != goal).collect();
        Environment::new(w, h, obstacles, BTreeMap::from([("g".to_string(), BTreeSet::from([goal]))])).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn sensing_is_a_distance_scan(env in env_strategy(), x in 0i32..12, y in 0i32..12, r in 0.0f64..6.0) {
        let pos = Cell::new(x % env.width(), y % env.height());
        let want: BTreeSet<Cell> = env
            .obstacles()
            .filter(|c| (((c.x - pos.x).pow(2) + (c.y - pos.y).pow(2)) as f64).sqrt() <= r)
            .collect();
        prop_assert_eq!(sense(&env, pos, r), want);
    }

    #[test]
    fn larger_range_sees_more(env in env_strategy(), x in 0i32..12, y in 0i32..12, r1 in 0.0f64..5.0, extra in 0.0f64..5.0) {
        let pos = Cell::new(x % env.width(), y % env.height());
        prop_assert!(sense(&env, pos, r1).is_subset(&sense(&env, pos, r1 + extra)));
    }

    /// The shared map only grows and never marks a free cell.
    #[test]
    fn map_is_monotone_and_sound(env in env_strategy(), walk in proptest::collection::vec((0i32..12, 0i32..12), 1..20), r in 0.0f64..4.0) {
        let mut map = OccupancyGrid::for_env(&env);
        let mut before: BTreeSet<Cell> = BTreeSet::new();
        for (x, y) in walk {
            let pos = Cell::new(x % env.width(), y % env.height());
            let fresh = update_map(&mut map, sense(&env, pos, r));
            let now: BTreeSet<Cell> = map.occupied_cells().collect();
            prop_assert!(before.is_subset(&now));
            prop_assert!(now.iter().all(|&c| env.is_obstacle(c)));
            prop_assert_eq!(now.len(), before.len() + fresh.len());
            before = now;
        }
    }

    #[test]
    fn labels_are_feasible(env in env_strategy(), x in 0i32..12, y in 0i32..12) {
        let pos = Cell::new(x % env.width(), y % env.height());
        let s = label(&BTreeMap::from([(1, pos)]), &env);
        prop_assert!(s.is_feasible());
        prop_assert_eq!(s.contains(&AtomicPredicate::obstacle(1)), env.is_obstacle(pos));
        prop_assert_eq!(s.contains(&AtomicPredicate::region(1, "g")), env.region_at(pos) == Some("g"));
    }
}
