use proptest::prelude::*;
use qlsearch::engine::{init_uniform, step, Trial};
use qlsearch::fwht::{fwht, fwht_par};
use qlsearch::gen::gen_max_constrained_1sat;
use qlsearch::phase::{neighborhood_phases, simple_phases};
use qlsearch::sat::{hamming, n_better_vector};
use qlsearch::*;
use std::collections::HashMap;

fn problem_strategy(max_n: usize) -> impl Strategy<Value = SatProblem> {
    (2..=max_n, 1usize..=3, any::<u64>(), 0.5f64..6.0).prop_filter_map("ensemble too small", |(n, k, seed, ratio)| {
        let k = k.min(n);
        let m = ((ratio * n as f64) as usize).max(1);
        let spec = EnsembleSpec { n, k, m, kind: EnsembleKind::PrespecifiedSolution, seed };
        generate(&spec, &GenOptions::default()).ok().map(|i| i.problem)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn conflict_total_is_m_times_free_assignments(p in problem_strategy(10)) {
        let v = p.conflict_vector(26).unwrap();
        let total: u64 = v.iter().map(|&c| u64::from(c)).sum();
        prop_assert_eq!(total, (p.m() as u64) << (p.n() - p.k()));
        for (s, &c) in v.iter().enumerate() {
            prop_assert_eq!(c, p.count_conflicts(s as u64));
        }
    }

    #[test]
    fn norm_is_preserved_every_step(p in problem_strategy(12), neighborhood in any::<bool>()) {
        let policy = if neighborhood { PolicySpec::neighborhood_default(p.n()) } else { PolicySpec::simple_default(&p) };
        let res = run_trial(&p, &policy, &MixerSpec::new(p.n()), &TrialOptions::default()).unwrap();
        prop_assert!(res.max_norm_drift < 1e-10);
        if let Some(cost) = res.best_cost {
            for (j, pj) in res.p_soln_by_step.iter().enumerate().skip(1) {
                if *pj > 0.0 {
                    prop_assert!(cost <= j as f64 / pj * (1.0 + 1e-12));
                }
            }
        }
    }

    #[test]
    fn step_with_all_positive_phases_is_plain_mixing(n in 1usize..=10, seed in any::<u64>()) {
        let mixer = Mixer::new(MixerSpec::new(n));
        let mut x = init_uniform(n, 26).unwrap();
        x.as_mut_slice()[(seed as usize) & ((1 << n) - 1)] = 0.3;
        let mut y = x.clone();
        step(&mut x, &simple_phases(&vec![0; 1 << n], 1, Rational::integer(0)), &mixer).unwrap();
        mixer.apply(y.as_mut_slice()).unwrap();
        prop_assert_eq!(x, y);
    }

    #[test]
    fn walsh_transform_is_an_involution_up_to_scale(n in 0usize..=12, seed in any::<u64>()) {
        let len = 1usize << n;
        let x: Vec<f64> = (0..len).map(|i| ((i as u64).wrapping_mul(seed | 1) % 1000) as f64 / 500.0 - 1.0).collect();
        let mut y = x.clone();
        fwht(&mut y).unwrap();
        let mut z = y.clone();
        fwht_par(&mut z).unwrap();
        for (a, b) in z.iter().zip(&x) {
            prop_assert!((a / len as f64 - b).abs() < 1e-12);
        }
    }

    #[test]
    fn simple_inversions_grow_with_j(conflicts in prop::collection::vec(0u32..20, 1..64), num in 0i128..40, den in 1i128..4) {
        let c_start = Rational::new(num, den);
        let cap = c_start.floor() as usize + 1;
        let count = |j| simple_phases(&conflicts, j, c_start).signs().iter().filter(|&&s| s < 0).count();
        for j in 1..cap {
            prop_assert!(count(j + 1) >= count(j));
        }
        prop_assert_eq!(count(cap), conflicts.iter().filter(|&&c| c > 0).count());
    }

    #[test]
    fn better_neighbors_bounded_by_n(p in problem_strategy(10)) {
        let v = p.conflict_vector(26).unwrap();
        for (s, nb) in n_better_vector(&v).iter().enumerate() {
            prop_assert!(*nb as usize <= p.n());
            prop_assert_eq!(*nb, p.n_better(s as u64));
        }
    }

    #[test]
    fn max_constrained_amplitudes_depend_only_on_distance(n in 2usize..=10, planted in any::<u64>(), neighborhood in any::<bool>()) {
        let planted = planted & ((1 << n) - 1);
        let p = gen_max_constrained_1sat(n, planted).unwrap().problem;
        let v = p.conflict_vector(26).unwrap();
        prop_assert_eq!(n_better_vector(&v), v.clone());
        let policy = if neighborhood { PolicySpec::neighborhood_default(n) } else { PolicySpec::simple_default(&p) };
        let mut trial = Trial::new(&p, policy, MixerSpec::new(n), 26).unwrap();
        for _ in 0..policy.max_steps {
            trial.advance().unwrap();
            let mut shell: HashMap<u32, f64> = HashMap::new();
            for (s, a) in trial.state().as_slice().iter().enumerate() {
                let c = hamming(s as u64, planted);
                let first = *shell.entry(c).or_insert(*a);
                prop_assert!((first - a).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn neighborhood_phases_are_signs(nb in prop::collection::vec(0u32..12, 1..32), j in 1usize..8, n_start in 0usize..12) {
        prop_assert!(neighborhood_phases(&nb, j, n_start).signs().iter().all(|s| *s == 1 || *s == -1));
    }
}
