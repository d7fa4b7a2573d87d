//! Self-checks run by `qlsearch verify`.

use std::io::Write;

use nalgebra::DMatrix;
use num_bigint::BigInt;
use qlsearch::combinatorics::binomial_big;
use qlsearch::compact::{build_v_max_normalized, compact_run, CompactOperators, CompactProblem, CompactTrial};
use qlsearch::engine::Trial;
use qlsearch::gen::{gen_max_constrained_1sat, max_clauses};
use qlsearch::mixer::{dense_u, sign_pattern_holds, u_coefficients, u_numerators, Mixer};
use qlsearch::oracle::{dense_step, exhaustive_solutions};
use qlsearch::sat::hamming;
use qlsearch::{
    backtrack_solve, generate, run_trial, ConflictPattern, EnsembleKind, EnsembleSpec, GenOptions, MixerSpec, PolicySpec,
    SatProblem, SolveMode, TrialOptions,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::args::{AlphaArg, VerifyArgs};
use crate::config::ExperimentConfig;
use crate::output::{CheckRecord, Sink};
use crate::{with_pool, CliError, CliResult};

/// Result of one check before the config is attached.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub measured: f64,
    pub tolerance: f64,
    pub detail: String,
}

impl Check {
    fn within(name: &'static str, measured: f64, tolerance: f64, detail: impl Into<String>) -> Self {
        Check { name, passed: measured <= tolerance, measured, tolerance, detail: detail.into() }
    }
}

fn mixer_for(alpha: AlphaArg, n: usize) -> MixerSpec {
    MixerSpec::with_alpha(n, alpha.resolve(n).min(n)).expect("alpha clamped to n")
}

fn worked_example() -> SatProblem {
    let clauses = vec![ConflictPattern::new(1, 1).unwrap(), ConflictPattern::new(2, 2).unwrap()];
    SatProblem::new(2, 1, clauses).unwrap()
}

fn unitarity(alpha: AlphaArg, dense_limit: usize) -> Check {
    let top = dense_limit.min(8);
    let worst = (1..=top)
        .map(|n| {
            let u = dense_u(&mixer_for(alpha, n), dense_limit).unwrap();
            let len = u.nrows();
            (u.transpose() * &u - DMatrix::<f64>::identity(len, len)).amax()
        })
        .fold(0.0, f64::max);
    Check::within("unitarity", worst, 1e-10, format!("max |U^T U - I| over n = 1..={top}"))
}

fn u2_matrix(alpha: AlphaArg) -> Check {
    #[rustfmt::skip]
    let printed = DMatrix::from_row_slice(4, 4, &[
        0.5, 0.5, 0.5, -0.5,
        0.5, 0.5, -0.5, 0.5,
        0.5, -0.5, 0.5, 0.5,
        -0.5, 0.5, 0.5, 0.5,
    ]);
    let u = dense_u(&mixer_for(alpha, 2), 2).unwrap();
    Check::within("u2-matrix", (u - printed).amax(), 1e-12, "max entry error of the n = 2 mixing matrix")
}

fn u1_value(alpha: AlphaArg, n: usize, target: f64) -> Check {
    let u1 = u_coefficients(&mixer_for(alpha, n))[1];
    let name = if n == 8 { "u1-n8" } else { "u1-n20" };
    let mut c = Check::within(name, (u1 - target).abs(), 0.005, format!("u1({n}) = {u1:.6}, target {target}"));
    c.measured = u1;
    c.passed = (u1 - target).abs() <= 0.005;
    c
}

fn u1_closed_form(alpha: AlphaArg) -> Check {
    let bad = (1..=30usize)
        .filter(|&n| u_numerators(&mixer_for(alpha, n))[1] != BigInt::from(2) * binomial_big(n - 1, n / 2))
        .count();
    Check::within("u1-closed-form", bad as f64, 0.0, "n <= 30 where 2^n u1 != 2 C(n-1, floor(n/2))")
}

fn sign_patterns(alpha: AlphaArg) -> Check {
    let bad = (1..=20usize).filter(|&n| !sign_pattern_holds(&mixer_for(alpha, n))).count();
    Check::within("sign-patterns", bad as f64, 0.0, "n <= 20 whose u_d signs break the even/odd pattern")
}

fn dense_oracle(alpha: AlphaArg, dense_limit: usize) -> Check {
    let top = dense_limit.clamp(1, 8);
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut worst = 0.0f64;
    for trial in 0..100 {
        let n = 1 + trial % top;
        let spec = mixer_for(alpha, n);
        let u = dense_u(&spec, dense_limit).unwrap();
        let len = 1usize << n;
        let x: Vec<f64> = (0..len).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        let x: Vec<f64> = x.iter().map(|v| v / norm).collect();
        let signs: Vec<i8> = (0..len).map(|_| if rng.gen_bool(0.5) { 1 } else { -1 }).collect();
        let expect = dense_step(&u, &signs, &x).unwrap();
        let mut got: Vec<f64> = x.iter().zip(&signs).map(|(a, s)| a * f64::from(*s)).collect();
        Mixer::new(spec).apply(&mut got).unwrap();
        worst = got.iter().zip(&expect).map(|(a, b)| (a - b).abs()).fold(worst, f64::max);
    }
    Check::within("dense-step-oracle", worst, 1e-10, format!("100 random states, n <= {top}"))
}

fn norm_drift(alpha: AlphaArg) -> Check {
    let mut worst = 0.0f64;
    for n in 2..=14usize {
        let k = n.min(3);
        let m = (4 * n).min(max_clauses(n, k).unwrap_or(0) as usize);
        let spec = EnsembleSpec { n, k, m, kind: EnsembleKind::PrespecifiedSolution, seed: n as u64 };
        let problem = generate(&spec, &GenOptions::default()).unwrap().problem;
        let mixer = mixer_for(alpha, n);
        for policy in [PolicySpec::simple_default(&problem), PolicySpec::neighborhood_default(n)] {
            let res = run_trial(&problem, &policy, &mixer, &TrialOptions::default()).unwrap();
            worst = worst.max(res.max_norm_drift);
        }
        let cp = CompactProblem::max_constrained(n);
        for policy in [cp.simple_policy(), cp.neighborhood_policy()] {
            worst = worst.max(compact_run(cp, &policy, &mixer, None, false).unwrap().max_norm_drift);
        }
    }
    Check::within("norm-drift", worst, 1e-10, "max |norm^2 - 1| per step, both engines and policies, n <= 14")
}

fn compact_oracle(alpha: AlphaArg) -> Check {
    let mut worst = 0.0f64;
    for n in 2..=10usize {
        let planted = (0x2d3u64 * n as u64) & ((1 << n) - 1);
        let problem = gen_max_constrained_1sat(n, planted).unwrap().problem;
        let cp = CompactProblem::max_constrained(n);
        let mixer = mixer_for(alpha, n);
        for policy in [cp.simple_policy(), cp.neighborhood_policy()] {
            let mut full = Trial::new(&problem, policy, mixer, 26).unwrap();
            let mut compact = CompactTrial::new(cp, policy, &mixer).unwrap();
            for _ in 0..policy.max_steps {
                full.advance().unwrap();
                compact.advance().unwrap();
                let amps = compact.state().amps();
                for (s, a) in full.state().as_slice().iter().enumerate() {
                    worst = worst.max((a - amps[hamming(s as u64, planted) as usize]).abs());
                }
            }
        }
    }
    Check::within("compact-oracle", worst, 1e-10, "max amplitude difference, compact vs full engine, n <= 10, every step")
}

fn v_max_identity(alpha: AlphaArg) -> Check {
    let mut worst = 0.0f64;
    for n in [2usize, 10, 50] {
        let mixer = mixer_for(alpha, n);
        let ops = CompactOperators::new(CompactProblem::max_constrained(n), &mixer).unwrap();
        let v = build_v_max_normalized(n, &mixer).unwrap();
        worst = worst.max((ops.mixing_matrix() - v).amax());
    }
    Check::within("v-max-identity", worst, 1e-10, "W D W vs V^max (orthonormal shell form), n in {2, 10, 50}")
}

fn backtrack_oracle() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let mut bad = 0;
    let mut total = 0;
    while total < 100 {
        let n = rng.gen_range(3..=8);
        let k = rng.gen_range(1..=3);
        let m = rng.gen_range(0..=4 * n);
        let spec = EnsembleSpec { n, k, m, kind: EnsembleKind::Random, seed: rng.gen() };
        let Ok(inst) = generate(&spec, &GenOptions::default()) else { continue };
        total += 1;
        let expect = exhaustive_solutions(&inst.problem, 8).unwrap().len() as u128;
        if backtrack_solve(&inst.problem, SolveMode::Count).count() != Some(expect) {
            bad += 1;
        }
    }
    Check::within("backtrack-oracle", f64::from(bad), 0.0, "solution-count mismatches on 100 random instances, n <= 8")
}

fn worked_example_check(alpha: AlphaArg) -> Check {
    let problem = worked_example();
    let mixer = mixer_for(alpha, 2);
    let simple = PolicySpec::simple_default(&problem);
    let mut trial = Trial::new(&problem, simple, mixer, 26).unwrap();
    trial.advance().unwrap();
    let mut err: f64 =
        trial.state().as_slice().iter().zip([1.0, 0.0, 0.0, 0.0]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let cost = |p: &PolicySpec| run_trial(&problem, p, &mixer, &TrialOptions::default()).unwrap().cost();
    let c_simple = cost(&simple);
    let c_nb = cost(&PolicySpec::neighborhood_default(2));
    err = err.max((c_simple - 1.0).abs()).max((c_nb - 2.0).abs());
    let err = if err.is_nan() { f64::INFINITY } else { err };
    Check::within("worked-example", err, 1e-10, format!("n = 2: simple cost {c_simple}, neighborhood cost {c_nb}"))
}

fn figure3(alpha: AlphaArg) -> Check {
    let cp = CompactProblem::max_constrained(100);
    let res = compact_run(cp, &cp.neighborhood_policy(), &mixer_for(alpha, 100), None, true).unwrap();
    let h = res.conflict_histograms.as_ref().unwrap();
    let p51 = res.p_soln_by_step.get(51).copied().unwrap_or(0.0);
    let cost = res.p_soln_by_step.get(51).map_or(f64::INFINITY, |p| 51.0 / p);
    let (h0, h1) = (h[0][50], h[1][50]);
    let passed = (0.25..=0.35).contains(&p51)
        && (150.0..=190.0).contains(&cost)
        && (0.37..=0.41).contains(&h1)
        && (h0 - 0.08).abs() <= 0.005;
    Check {
        name: "figure-3",
        passed,
        measured: p51,
        tolerance: 0.05,
        detail: format!("n = 100 neighborhood: P(51) = {p51:.4}, cost {cost:.1}, c = 50 mass {h0:.4} -> {h1:.4}"),
    }
}

pub fn run_checks(alpha: AlphaArg, dense_limit: usize) -> Vec<Check> {
    type CheckFn = Box<dyn Fn() -> Check + Send + Sync>;
    let checks: Vec<CheckFn> = vec![
        Box::new(move || unitarity(alpha, dense_limit)),
        Box::new(move || u2_matrix(alpha)),
        Box::new(move || u1_value(alpha, 8, 0.27)),
        Box::new(move || u1_value(alpha, 20, 0.18)),
        Box::new(move || u1_closed_form(alpha)),
        Box::new(move || sign_patterns(alpha)),
        Box::new(move || dense_oracle(alpha, dense_limit)),
        Box::new(move || norm_drift(alpha)),
        Box::new(move || compact_oracle(alpha)),
        Box::new(move || v_max_identity(alpha)),
        Box::new(backtrack_oracle),
        Box::new(move || worked_example_check(alpha)),
        Box::new(move || figure3(alpha)),
    ];
    use rayon::prelude::*;
    checks.par_iter().map(|f| f()).collect()
}

pub fn cmd_verify(args: &VerifyArgs, stdout: &mut dyn Write) -> CliResult<()> {
    if args.dense_limit < 2 {
        return Err(CliError::Usage("--dense-limit must be at least 2".into()));
    }
    let config = ExperimentConfig {
        command: "verify".into(),
        alpha: Some(args.alpha),
        dense_limit: Some(args.dense_limit),
        threads: args.output.threads,
        format: args.output.format,
        ..Default::default()
    };
    let checks = with_pool(args.output.threads, || run_checks(args.alpha, args.dense_limit))?;
    let mut sink = Sink::new(args.output.format, args.output.out.as_deref(), stdout)?;
    for c in &checks {
        sink.emit(&CheckRecord {
            check: c.name.into(),
            passed: c.passed,
            measured: c.measured,
            tolerance: c.tolerance,
            detail: c.detail.clone(),
            config: config.clone(),
        })?;
    }
    sink.finish()?;
    let failed: Vec<&str> = checks.iter().filter(|c| !c.passed).map(|c| c.name).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Verification(format!("failed checks: {}", failed.join(", "))))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_build_passes_every_check() {
        let checks = run_checks(AlphaArg::Default, 8);
        let failed: Vec<_> = checks.iter().filter(|c| !c.passed).collect();
        assert!(failed.is_empty(), "{failed:?}");
    }

    #[test]
    fn identity_mixer_is_unitary_but_breaks_u2() {
        assert!(unitarity(AlphaArg::Full, 8).passed);
        assert!(!u2_matrix(AlphaArg::Full).passed);
    }

    #[test]
    fn u1_report_values() {
        let c = u1_value(AlphaArg::Default, 8, 0.27);
        assert!(c.passed && (c.measured - 0.2734375).abs() < 1e-15);
        assert!(u1_value(AlphaArg::Default, 20, 0.18).passed);
    }
}
