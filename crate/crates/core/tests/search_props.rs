use blowdown::config::search::{search_programs, SearchOptions};
use blowdown::config::{find_chains, run_program, Configuration, Curve, InvariantSet};
use blowdown::hjcf::Chain;
use proptest::prelude::*;

const TARGETS: [&[u64]; 5] = [&[4], &[5, 2], &[2, 5], &[6, 2, 2], &[3, 3]];

/// Three rational curves, the last possibly nodal, with small self-intersections
/// and pairings.
fn small_config() -> impl Strategy<Value = Configuration> {
    (prop::collection::vec(-2i64..=0, 3), any::<bool>(), prop::collection::vec(0i64..=2, 3)).prop_map(|(s, nodal, p)| {
        let mut c = Configuration::empty(InvariantSet::from_basic(12, -8, 0, 0), Some(2));
        for (i, &si) in s.iter().enumerate() {
            let node = (nodal && i == 2) as i64;
            let k = -2 - si + 2 * node;
            c.add_curve(Curve::new(&format!("X{i}"), si, 0, k, node)).unwrap();
        }
        c.set_pairing("X0", "X1", p[0]).unwrap();
        c.set_pairing("X1", "X2", p[1]).unwrap();
        c.set_pairing("X0", "X2", p[2]).unwrap();
        c
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn pruning_keeps_existence(c in small_config(), t in 0usize..TARGETS.len(), free in any::<bool>()) {
        let target = [Chain::new(TARGETS[t].to_vec()).unwrap()];
        let base = SearchOptions { max_steps: 3, free_points: free, limit: 1, prune_commuting: true };
        let pruned = search_programs(&c, &target, &base, &mut |_, _| true);
        let naive = search_programs(&c, &target, &SearchOptions { prune_commuting: false, ..base }, &mut |_, _| true);
        prop_assert_eq!(pruned.is_empty(), naive.is_empty());
    }

    #[test]
    fn found_programs_replay(c in small_config(), t in 0usize..TARGETS.len()) {
        let target = [Chain::new(TARGETS[t].to_vec()).unwrap()];
        let opts = SearchOptions { max_steps: 3, free_points: true, limit: 20, prune_commuting: true };
        for f in search_programs(&c, &target, &opts, &mut |_, _| true) {
            let end = run_program(&c, &f.steps).unwrap();
            prop_assert_eq!(&end, &f.config);
            prop_assert!(f.steps.len() <= 3);
            prop_assert_eq!(find_chains(&end, &target).unwrap(), f.chains);
        }
    }
}
