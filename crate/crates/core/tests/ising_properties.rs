mod common;

use allatonce_core::ising::{
    joint_distribution, Configuration, Distribution, Evidence, InverseTemperature, Probability,
    Site, Spin,
};
use num_rational::BigRational;
use num_traits::One;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{brute_force_joint, max_abs_diff, random_case};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn assert_close(a: &Distribution, b: &Distribution, tol: f64) {
    assert_eq!(a.scope(), b.scope());
    if a.is_exact() && b.is_exact() {
        assert_eq!(a.exact_values(), b.exact_values());
    } else {
        let d = max_abs_diff(&a.to_f64_vec(), &b.to_f64_vec());
        assert!(d <= tol, "entrywise difference {d:e}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn normalization(seed in any::<u64>()) {
        let case = random_case(&mut rng(seed), 10);
        let d = joint_distribution(&case.graph, case.beta, &case.evidence).unwrap();
        prop_assert_eq!(d.len(), 1 << d.scope().len());
        match d.total() {
            Probability::Exact(t) => prop_assert!(t.is_one()),
            Probability::Float(t) => prop_assert!((t - 1.0).abs() <= 1e-12),
        }
        prop_assert!(d.to_f64_vec().iter().all(|&p| p >= 0.0));
    }

    #[test]
    fn matches_brute_force_oracle(seed in any::<u64>()) {
        let case = random_case(&mut rng(seed), 12);
        let d = joint_distribution(&case.graph, case.beta, &case.evidence).unwrap();
        let oracle = brute_force_joint(&case.graph, case.beta.value(), &case.evidence);
        prop_assert!(max_abs_diff(&d.to_f64_vec(), &oracle) <= 1e-12);
    }

    #[test]
    fn clamping_equals_conditioning(seed in any::<u64>()) {
        let mut r = rng(seed);
        let case = random_case(&mut r, 10);
        let free = case.graph.free_sites(&case.evidence);
        prop_assume!(free.len() >= 2);
        let site = free[r.gen_range(0..free.len())];
        let spin = if r.gen_bool(0.5) { Spin::Up } else { Spin::Down };
        let clamped = joint_distribution(
            &case.graph,
            case.beta,
            &case.evidence.clone().with(site, spin).unwrap(),
        )
        .unwrap();
        let conditioned = joint_distribution(&case.graph, case.beta, &case.evidence)
            .unwrap()
            .condition(site, spin)
            .unwrap();
        assert_close(&clamped, &conditioned, 1e-12);
    }

    #[test]
    fn marginalizing_in_steps(seed in any::<u64>()) {
        let mut r = rng(seed);
        let case = random_case(&mut r, 10);
        let d = joint_distribution(&case.graph, case.beta, &case.evidence).unwrap();
        let scope = d.scope().to_vec();
        let middle: Vec<Site> = scope.iter().copied().filter(|_| r.gen_bool(0.7)).collect();
        prop_assume!(!middle.is_empty());
        let inner: Vec<Site> = middle.iter().copied().filter(|_| r.gen_bool(0.6)).collect();
        prop_assume!(!inner.is_empty());
        let two_step = d.marginal(&middle).unwrap().marginal(&inner).unwrap();
        let one_step = d.marginal(&inner).unwrap();
        assert_close(&two_step, &one_step, 1e-12);
    }

    #[test]
    fn global_flip_symmetry_without_clamps(seed in any::<u64>()) {
        let case = random_case(&mut rng(seed), 10);
        let d = joint_distribution(&case.graph, case.beta, &Evidence::new()).unwrap();
        for (config, p) in d.iter() {
            let q = d.get(&config.flipped()).unwrap();
            match (&p, &q) {
                (Probability::Exact(a), Probability::Exact(b)) => prop_assert_eq!(a, b),
                _ => prop_assert!((p.to_f64() - q.to_f64()).abs() <= 1e-15),
            }
        }
    }

    #[test]
    fn zero_beta_is_uniform(seed in any::<u64>()) {
        let case = random_case(&mut rng(seed), 10);
        let beta = InverseTemperature::new(0.0).unwrap();
        let d = joint_distribution(&case.graph, beta, &case.evidence).unwrap();
        let n = d.len() as i64;
        let expected = BigRational::new(1.into(), n.into());
        prop_assert!(d.exact_values().unwrap().iter().all(|p| *p == expected));
    }

    #[test]
    fn energy_parity_matches_edge_count(seed in any::<u64>()) {
        let mut r = rng(seed);
        let case = random_case(&mut r, 12);
        let config = Configuration::new(
            case.graph
                .sites()
                .iter()
                .map(|&s| (s, if r.gen_bool(0.5) { Spin::Up } else { Spin::Down })),
        )
        .unwrap();
        let h = case.graph.energy(&config).unwrap();
        prop_assert_eq!(h.rem_euclid(2), (case.graph.edge_count() % 2) as i64);
    }
}
