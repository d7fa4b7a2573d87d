use qlsearch::compact::CompactTrial;
use qlsearch::engine::Trial;
use qlsearch::gen::{gen_max_constrained_1sat, planted_1sat};
use qlsearch::mixer::dense_u;
use qlsearch::oracle::{dense_step, dense_trajectory, exhaustive_solutions, shell_aggregate};
use qlsearch::phase::{simple_phases, PhaseSchedule};
use qlsearch::sat::hamming;
use qlsearch::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn policies(p: &SatProblem) -> [PolicySpec; 2] {
    [PolicySpec::simple_default(p), PolicySpec::neighborhood_default(p.n())]
}

#[test]
fn fast_step_matches_dense_matrix() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst = 0.0f64;
    for trial in 0..100 {
        let n = 1 + trial % 8;
        let len = 1usize << n;
        let mixer = MixerSpec::new(n);
        let u = dense_u(&mixer, 8).unwrap();
        let mut x: Vec<f64> = (0..len).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        x.iter_mut().for_each(|v| *v /= norm);
        let signs: Vec<i8> = (0..len).map(|_| if rng.gen_bool(0.5) { 1 } else { -1 }).collect();
        let expect = dense_step(&u, &signs, &x).unwrap();
        let mut got: Vec<f64> = x.iter().zip(&signs).map(|(a, s)| a * f64::from(*s)).collect();
        Mixer::new(mixer).apply(&mut got).unwrap();
        for (a, b) in got.iter().zip(&expect) {
            worst = worst.max((a - b).abs());
        }
    }
    assert!(worst < 1e-10, "{worst}");
}

#[test]
fn full_trials_match_dense_trajectories() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for n in 3..=8 {
        let spec = EnsembleSpec { n, k: 2, m: 2 * n, kind: EnsembleKind::PrespecifiedSolution, seed: rng.gen() };
        let problem = generate(&spec, &GenOptions::default()).unwrap().problem;
        let mixer = MixerSpec::new(n);
        for policy in policies(&problem) {
            let dense = dense_trajectory(&problem, &policy, &mixer, usize::MAX, 8).unwrap();
            let mut trial = Trial::new(&problem, policy, mixer, 26).unwrap();
            for x in dense.iter().skip(1) {
                trial.advance().unwrap();
                for (a, b) in trial.state().as_slice().iter().zip(x) {
                    assert!((a - b).abs() < 1e-10);
                }
            }
        }
    }
}

#[test]
fn compact_matches_full_engine_max_constrained() {
    for n in 2..=10 {
        let planted = (0x2b5u64 * n as u64) & ((1 << n) - 1);
        let problem = gen_max_constrained_1sat(n, planted).unwrap().problem;
        let cp = CompactProblem::max_constrained(n);
        let mixer = MixerSpec::new(n);
        for (policy, cpolicy) in policies(&problem).into_iter().zip([cp.simple_policy(), cp.neighborhood_policy()]) {
            assert_eq!(policy, cpolicy);
            let mut full = Trial::new(&problem, policy, mixer, 26).unwrap();
            let mut compact = CompactTrial::new(cp, cpolicy, &mixer).unwrap();
            for _ in 0..policy.max_steps {
                full.advance().unwrap();
                compact.advance().unwrap();
                let amps = compact.state().amps();
                for (s, a) in full.state().as_slice().iter().enumerate() {
                    let c = hamming(s as u64, planted) as usize;
                    assert!((a - amps[c]).abs() < 1e-10, "n={n} s={s}");
                }
            }
        }
    }
}

#[test]
fn compact_matches_full_engine_sub_maximal() {
    let n = 9;
    for constrained in [0b1u64, 0b1010_0110, 0b1_1111_0000] {
        let planted = 0b0_0110_1001 & constrained;
        let problem = planted_1sat(n, constrained, planted).unwrap().problem;
        let bad = constrained.count_ones() as usize;
        let cp = CompactProblem::new(n, bad).unwrap();
        let mixer = MixerSpec::new(n);
        let policy = PolicySpec::neighborhood_default(n);
        let mut full = Trial::new(&problem, policy, mixer, 26).unwrap();
        let mut compact = CompactTrial::new(cp, policy, &mixer).unwrap();
        for _ in 0..policy.max_steps {
            full.advance().unwrap();
            compact.advance().unwrap();
            let amps = compact.state().amps();
            for (s, a) in full.state().as_slice().iter().enumerate() {
                let c = hamming(s as u64 & constrained, planted) as usize;
                assert!((a - amps[c]).abs() < 1e-10);
            }
            assert!((full.p_soln() - compact.state().p_soln()).abs() < 1e-10);
        }
    }
}

#[test]
fn v_max_is_the_shell_image_of_dense_u() {
    for n in [2, 4, 6, 8] {
        let mixer = MixerSpec::new(n);
        let problem = gen_max_constrained_1sat(n, 0).unwrap().problem;
        let conflicts: Vec<u32> = (0..1u64 << n).map(|s| problem.count_conflicts(s)).collect();
        let agg = shell_aggregate(&dense_u(&mixer, 8).unwrap(), &conflicts, n + 1).unwrap();
        let v = compact::build_v_max(n, &mixer).unwrap();
        assert!((agg - v).amax() < 1e-12, "n={n}");
    }
}

#[test]
fn backtrack_counts_match_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..100 {
        let n = rng.gen_range(3..=8);
        let k = rng.gen_range(1..=3.min(n));
        let m = rng.gen_range(0..=4 * n);
        let spec = EnsembleSpec { n, k, m, kind: EnsembleKind::Random, seed: rng.gen() };
        let problem = match generate(&spec, &GenOptions::default()) {
            Ok(inst) => inst.problem,
            Err(_) => continue,
        };
        let expect = exhaustive_solutions(&problem, 8).unwrap();
        assert_eq!(backtrack_solve(&problem, SolveMode::Count).count(), Some(expect.len() as u128));
        match backtrack_solve(&problem, SolveMode::First).witness() {
            Some(w) => assert!(expect.contains(&w)),
            None => assert!(expect.is_empty()),
        }
    }
}

#[test]
fn schedule_phases_match_direct_rule() {
    let spec = EnsembleSpec { n: 6, k: 2, m: 9, kind: EnsembleKind::PrespecifiedSolution, seed: 4 };
    let problem = generate(&spec, &GenOptions::default()).unwrap().problem;
    let policy = PolicySpec::simple_default(&problem);
    let conflicts = problem.conflict_vector(26).unwrap();
    let schedule = PhaseSchedule::from_conflicts(&conflicts, policy);
    let PolicyKind::SimpleThreshold { c_start } = policy.kind else { unreachable!() };
    for j in 1..=schedule.steps() {
        assert_eq!(schedule.phases(j), simple_phases(&conflicts, j, c_start));
    }
}
