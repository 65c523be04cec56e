mod common;

use proptest::prelude::*;
use rand::Rng;
use sublex::lln::{simulate_paths, SimulationConfig, ScenarioStrategy};
use sublex::testing::*;
use sublex::{Event, StoppingTime};

fn ok(r: common::Check) -> Result<(), TestCaseError> {
    r.map_err(TestCaseError::fail)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn atoms_partition_leaves(seed in any::<u64>()) {
        let m = random_model(&mut rng(seed), &ModelShape::default());
        let sp = m.space();
        for t in 0..=sp.depth() {
            let mut seen = vec![0u32; sp.leaf_count()];
            for node in sp.level(t) {
                for leaf in sp.leaf_span(node) {
                    seen[leaf] += 1;
                }
            }
            prop_assert!(seen.iter().all(|&c| c == 1));
        }
    }

    #[test]
    fn complement_keeps_level(seed in any::<u64>()) {
        let mut r = rng(seed);
        let m = random_model(&mut r, &ModelShape::default());
        let e = random_event(&mut r, m.space());
        prop_assert_eq!(e.level(), e.complement().level());
        let t = r.gen_range(0..=m.space().depth());
        let a = random_measurable_event(&mut r, m.space(), t);
        prop_assert!(a.level() <= t);
    }

    #[test]
    fn antichain_round_trip(seed in any::<u64>()) {
        let mut r = rng(seed);
        let m = random_model(&mut r, &ModelShape::default());
        let tau = random_stopping_time(&mut r, m.space());
        let back = StoppingTime::from_values(m.space(), tau.values()).unwrap().unwrap();
        prop_assert_eq!(back.nodes(), tau.nodes());
        for t in 0..=m.space().depth() {
            let ev = Event::from_predicate(m.space(), |leaf, _| tau.at(leaf) <= t);
            prop_assert!(ev.level() <= t);
        }
    }

    #[test]
    fn oracle_equivalence(seed in any::<u64>()) { ok(common::oracle_equivalence(seed))?; }

    #[test]
    fn expectation_axioms(seed in any::<u64>()) { ok(common::axioms(seed))?; }

    #[test]
    fn conditional_axioms(seed in any::<u64>()) { ok(common::conditional(seed))?; }

    #[test]
    fn doob_submartingale_chains(seed in any::<u64>()) { ok(common::doob_submartingale(seed))?; }

    #[test]
    fn doob_martingale_corollary(seed in any::<u64>()) { ok(common::doob_mart(seed))?; }

    #[test]
    fn optional_sampling(seed in any::<u64>()) { ok(common::optional_sampling(seed).map(|_| ()))?; }

    #[test]
    fn kolmogorov_bound_one(seed in any::<u64>()) { ok(common::kolmogorov_iid(seed))?; }

    #[test]
    fn kolmogorov_mean_certain(seed in any::<u64>()) { ok(common::kolmogorov_mean_certain(seed))?; }

    #[test]
    fn centred_sums_are_martingales(seed in any::<u64>()) { ok(common::centred_sums_martingale(seed))?; }

    #[test]
    fn iid_batteries(seed in any::<u64>()) { ok(common::distribution(seed))?; }

    #[test]
    fn lemma_4_3(seed in any::<u64>()) { ok(common::lemma_4_3(seed))?; }

    #[test]
    fn uniform_integrability(seed in any::<u64>()) { ok(common::uniform_integrability(seed))?; }

    #[test]
    fn seminorms(seed in any::<u64>()) { ok(common::seminorms(seed))?; }

    #[test]
    fn dominated_convergence(seed in any::<u64>()) { ok(common::dominated(seed).map(|_| ()))?; }

    #[test]
    fn event_approximation(seed in any::<u64>()) { ok(common::event_approximation(seed))?; }

    #[test]
    fn borel_cantelli(seed in any::<u64>()) { ok(common::borel_cantelli(seed))?; }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn simulation_is_deterministic(seed in any::<u64>(), threads in 1usize..4) {
        let t = random_template(&mut rng(seed));
        let cfg = SimulationConfig {
            steps: 500,
            replications: 3,
            burn_in: 50,
            seed,
            trajectory_points: 5,
            ..Default::default()
        };
        let a = simulate_paths(&t, &cfg).unwrap();
        let b = simulate_paths(&t, &SimulationConfig { threads: Some(threads), ..cfg.clone() }).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn strategies_index_valid_kernels(seed in any::<u64>()) {
        let t = random_template(&mut rng(seed));
        for s in ScenarioStrategy::default_battery(t.kernels().len()) {
            let cfg = SimulationConfig {
                steps: 50,
                replications: 1,
                burn_in: 1,
                strategies: Some(vec![s]),
                ..Default::default()
            };
            prop_assert!(simulate_paths(&t, &cfg).is_ok());
        }
    }
}

