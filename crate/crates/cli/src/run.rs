use std::fs;
use std::io::Write;

use qlsearch::compact::{compact_run, CompactProblem};
use qlsearch::dimacs;
use qlsearch::gen::split_seed;
use qlsearch::phase::PolicySpec;
use qlsearch::{generate, run_trial, EnsembleKind, GenOptions, RunResult, SatProblem, TrialOptions};
use rayon::prelude::*;

use crate::args::{Axis, Engine, EngineArgs, PolicyArgs, PolicyChoice, RunArgs, SweepArgs};
use crate::config::{base_config, ensemble_spec, mixer, parse_axis, policy_for, require_n, resolve_km, ExperimentConfig};
use crate::output::{RunRecord, Sink, SweepRecord};
use crate::{with_pool, CliError, CliResult};

/// A finished trial: the resolved policy, the mixer threshold and the result.
pub type TrialOutcome = CliResult<(PolicySpec, usize, RunResult)>;

pub fn run_full(problem: &SatProblem, choice: PolicyChoice, pol: &PolicyArgs, eng: &EngineArgs) -> TrialOutcome {
    let n = problem.n();
    let mixer = mixer(pol.alpha, n)?;
    let policy = policy_for(choice, pol, n, problem.avg_conflicts().into())?;
    let opts = TrialOptions { j_max: pol.j_max, histograms: eng.histograms, max_n: eng.max_n };
    let res = run_trial(problem, &policy, &mixer, &opts)?;
    Ok((policy, mixer.alpha, res))
}

pub fn run_compact(problem: CompactProblem, choice: PolicyChoice, pol: &PolicyArgs, eng: &EngineArgs) -> TrialOutcome {
    let mixer = mixer(pol.alpha, problem.n)?;
    let policy = policy_for(choice, pol, problem.n, problem.avg_conflicts())?;
    let res = compact_run(problem, &policy, &mixer, pol.j_max, eng.histograms)?;
    Ok((policy, mixer.alpha, res))
}

/// Where an instance came from.
#[derive(Debug, Clone)]
pub struct InstanceInfo {
    pub index: usize,
    pub source: String,
    pub seed: Option<u64>,
    pub n: usize,
    pub k: usize,
    pub m: usize,
}

pub fn make_record(engine: Engine, info: &InstanceInfo, outcome: TrialOutcome, solutions: Option<String>, j_max: Option<usize>, config: &ExperimentConfig) -> RunRecord {
    let mut record = RunRecord {
        engine: engine_name(engine).into(),
        instance: info.index,
        source: info.source.clone(),
        n: info.n,
        k: info.k,
        m: info.m,
        seed: info.seed,
        policy: None,
        mixer_alpha: None,
        j_max,
        solutions,
        best_j: None,
        best_cost: None,
        p_best: None,
        max_norm_drift: None,
        p_soln_by_step: Vec::new(),
        histograms: None,
        caveat: None,
        error: None,
        config: config.clone(),
    };
    match outcome {
        Ok((policy, alpha, res)) => {
            record.policy = Some(policy);
            record.mixer_alpha = Some(alpha);
            record.best_j = res.best_j;
            record.best_cost = res.best_cost;
            record.p_best = res.best_j.map(|j| res.p_soln_by_step[j]);
            record.max_norm_drift = Some(res.max_norm_drift);
            record.caveat = policy.caveat(info.n).map(str::to_string);
            if engine == Engine::Full && record.solutions.is_none() {
                record.solutions = Some(((res.p_soln_by_step[0] * 2f64.powi(info.n as i32)).round() as u64).to_string());
            }
            record.p_soln_by_step = res.p_soln_by_step;
            record.histograms = res.conflict_histograms;
        }
        Err(e) => record.error = Some(e.to_string()),
    }
    record
}

pub fn engine_name(engine: Engine) -> &'static str {
    match engine {
        Engine::Full => "full",
        Engine::Compact => "compact",
    }
}

fn is_capacity(r: &RunRecord) -> bool {
    r.error.as_deref().is_some_and(|e| e.starts_with("capacity exceeded"))
}

enum Job {
    Problem(InstanceInfo, CliResult<SatProblem>),
    Compact(InstanceInfo, CompactProblem),
}

pub fn cmd_run(args: &RunArgs, stdout: &mut dyn Write) -> CliResult<()> {
    let ens = &args.ensemble;
    let eng = &args.engine;
    let mut config = base_config("run", ens, &args.policy, args.output.format, args.output.threads);
    config.engine = Some(eng.engine);
    config.max_n = Some(eng.max_n);
    config.histograms = Some(eng.histograms);
    config.input = args.input.iter().map(|p| p.display().to_string()).collect();

    let jobs: Vec<Job> = if !args.input.is_empty() {
        if eng.engine == Engine::Compact {
            return Err(CliError::Usage("--input requires the full engine".into()));
        }
        config.ensemble = None;
        config.trials = None;
        args.input
            .iter()
            .enumerate()
            .map(|(index, path)| {
                let problem = fs::read_to_string(path).map_err(CliError::from).and_then(|t| Ok(dimacs::parse(&t, 1)?));
                let (n, k, m) = problem.as_ref().map_or((0, 0, 0), |p| (p.n(), p.k(), p.m()));
                let info = InstanceInfo { index, source: path.display().to_string(), seed: None, n, k, m };
                Job::Problem(info, problem)
            })
            .collect()
    } else {
        let n = require_n(ens)?;
        match eng.engine {
            Engine::Compact => {
                let bad = ens.m.unwrap_or(n);
                let problem = CompactProblem::new(n, bad)?;
                config.ensemble = Some(EnsembleKind::MaxConstrained1Sat);
                config.trials = None;
                config.n = Some(n);
                config.k = Some(1);
                config.m = Some(bad);
                let source = if bad == n { "max-constrained-1sat" } else { "planted-1sat" };
                let info = InstanceInfo { index: 0, source: source.into(), seed: None, n, k: 1, m: bad };
                vec![Job::Compact(info, problem)]
            }
            Engine::Full => {
                if n > eng.max_n {
                    return Err(CliError::Capacity(format!("n = {n} exceeds --max-n {}", eng.max_n)));
                }
                let (k, m) = resolve_km(ens, n)?;
                config.n = Some(n);
                config.k = Some(k);
                config.m = Some(m);
                let opts = GenOptions { planted: ens.planted, ..GenOptions::default() };
                (0..ens.trials)
                    .into_par_iter()
                    .map(|index| {
                        let seed = split_seed(ens.seed, index as u64);
                        let problem = generate(&ensemble_spec(ens, n, k, m, seed), &opts).map(|i| i.problem).map_err(CliError::from);
                        let info = InstanceInfo { index, source: ens.ensemble.to_string(), seed: Some(seed), n, k, m };
                        Job::Problem(info, problem)
                    })
                    .collect()
            }
        }
    };

    let choices = args.policy.policy.expand();
    let tasks: Vec<(usize, PolicyChoice)> = (0..jobs.len()).flat_map(|j| choices.iter().map(move |&c| (j, c))).collect();
    let records: Vec<RunRecord> = with_pool(args.output.threads, || {
        tasks
            .par_iter()
            .map(|&(j, choice)| match &jobs[j] {
                Job::Problem(info, problem) => {
                    let outcome = match problem {
                        Ok(p) => run_full(p, choice, &args.policy, eng),
                        Err(e) => Err(CliError::Usage(e.to_string())),
                    };
                    make_record(Engine::Full, info, outcome, None, args.policy.j_max, &config)
                }
                Job::Compact(info, problem) => {
                    let outcome = run_compact(*problem, choice, &args.policy, eng);
                    let solutions = (num_bigint::BigUint::from(1u8) << (problem.n - problem.bad_bits)).to_string();
                    make_record(Engine::Compact, info, outcome, Some(solutions), args.policy.j_max, &config)
                }
            })
            .collect()
    })?;

    let mut sink = Sink::new(args.output.format, args.output.out.as_deref(), stdout)?;
    for r in &records {
        sink.emit(r)?;
    }
    sink.finish()?;
    match records.iter().find(|r| is_capacity(r)) {
        Some(r) => Err(CliError::Capacity(r.error.clone().unwrap_or_default())),
        None => Ok(()),
    }
}

/// Mean and standard error of the mean.
pub fn mean_sem(values: &[f64]) -> (Option<f64>, Option<f64>) {
    if values.is_empty() {
        return (None, None);
    }
    let len = values.len() as f64;
    let mean = values.iter().sum::<f64>() / len;
    if values.len() < 2 {
        return (Some(mean), None);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (len - 1.0);
    (Some(mean), Some((var / len).sqrt()))
}

struct Point {
    value: f64,
    n: usize,
    k: usize,
    m: usize,
}

/// Per-instance `(cost, best_j)` or an error message.
type Cell = Result<(Option<f64>, Option<usize>, usize), String>;

fn aggregate(
    engine: Engine,
    axis: Axis,
    point: &Point,
    choice: PolicyChoice,
    cells: &[Cell],
    config: &ExperimentConfig,
    default_alpha: usize,
) -> SweepRecord {
    let costs: Vec<Option<f64>> = cells.iter().map(|c| c.as_ref().ok().and_then(|v| v.0)).collect();
    let best_js: Vec<Option<usize>> = cells.iter().map(|c| c.as_ref().ok().and_then(|v| v.1)).collect();
    let errors: Vec<String> = cells.iter().filter_map(|c| c.as_ref().err().cloned()).collect();
    let finite: Vec<f64> = costs.iter().flatten().copied().collect();
    let (mean_cost, sem) = mean_sem(&finite);
    let js: Vec<f64> = best_js.iter().flatten().map(|&j| j as f64).collect();
    let alpha = cells.iter().find_map(|c| c.as_ref().ok().map(|v| v.2)).unwrap_or(default_alpha);
    SweepRecord {
        engine: engine_name(engine).into(),
        axis: match axis {
            Axis::N => "n".into(),
            Axis::Ratio => "ratio".into(),
        },
        value: point.value,
        n: point.n,
        k: point.k,
        m: point.m,
        policy: match choice {
            PolicyChoice::Simple => "simple-threshold".into(),
            _ => "neighborhood".into(),
        },
        mixer_alpha: alpha,
        mean_cost,
        sem,
        trials: cells.len(),
        infinite: cells.len() - errors.len() - finite.len(),
        failures: errors.len(),
        mean_best_j: mean_sem(&js).0,
        costs,
        best_js,
        errors,
        config: config.clone(),
    }
}

fn cell(outcome: TrialOutcome) -> Cell {
    outcome.map(|(_, alpha, r)| (r.best_cost, r.best_j, alpha)).map_err(|e| e.to_string())
}

/// Instance `i` at every point uses seed `split_seed(seed, i)`, as in `run`.
pub fn cmd_sweep(args: &SweepArgs, stdout: &mut dyn Write) -> CliResult<()> {
    let ens = &args.ensemble;
    let eng = &args.engine;
    let values = parse_axis(&args.values)?;
    let mut config = base_config("sweep", ens, &args.policy, args.output.format, args.output.threads);
    config.engine = Some(eng.engine);
    config.max_n = Some(eng.max_n);
    config.axis = Some(args.axis);
    config.values = Some(values.clone());

    let as_n = |v: f64| -> CliResult<usize> {
        if v.fract() != 0.0 || v < 1.0 {
            return Err(CliError::Usage(format!("n must be a positive integer, got {v}")));
        }
        Ok(v as usize)
    };
    let choices = args.policy.policy.expand();
    let mut points = Vec::with_capacity(values.len());
    let records: Vec<SweepRecord> = match eng.engine {
        Engine::Compact => {
            if args.axis != Axis::N {
                return Err(CliError::Usage("the compact engine sweeps over n only".into()));
            }
            config.ensemble = Some(EnsembleKind::MaxConstrained1Sat);
            config.trials = None;
            for &v in &values {
                let n = as_n(v)?;
                points.push(Point { value: v, n, k: 1, m: n });
            }
            let tasks: Vec<(usize, PolicyChoice)> = (0..points.len()).flat_map(|p| choices.iter().map(move |&c| (p, c))).collect();
            with_pool(args.output.threads, || {
                tasks
                    .par_iter()
                    .map(|&(p, choice)| {
                        let pt = &points[p];
                        let outcome = run_compact(CompactProblem::max_constrained(pt.n), choice, &args.policy, eng);
                        aggregate(Engine::Compact, Axis::N, pt, choice, &[cell(outcome)], &config, args.policy.alpha.resolve(pt.n))
                    })
                    .collect()
            })?
        }
        Engine::Full => {
            config.ratio = (args.axis == Axis::N && ens.ensemble != EnsembleKind::MaxConstrained1Sat).then_some(args.ratio);
            for &v in &values {
                let (n, m) = match args.axis {
                    Axis::N => {
                        let n = as_n(v)?;
                        let m = match ens.ensemble {
                            EnsembleKind::MaxConstrained1Sat => n,
                            _ => (args.ratio * n as f64).round() as usize,
                        };
                        (n, m)
                    }
                    Axis::Ratio => {
                        let n = require_n(ens)?;
                        (n, (v * n as f64).round() as usize)
                    }
                };
                if n > eng.max_n {
                    return Err(CliError::Capacity(format!("n = {n} exceeds --max-n {}", eng.max_n)));
                }
                let k = match ens.ensemble {
                    EnsembleKind::MaxConstrained1Sat => ens.k.unwrap_or(1),
                    _ => ens.k.unwrap_or(3),
                };
                points.push(Point { value: v, n, k, m });
            }
            if args.axis == Axis::Ratio {
                config.n = ens.n;
            }
            let opts = GenOptions { planted: ens.planted, ..GenOptions::default() };
            let tasks: Vec<(usize, usize)> = (0..points.len()).flat_map(|p| (0..ens.trials).map(move |i| (p, i))).collect();
            let cells: Vec<Vec<Cell>> = with_pool(args.output.threads, || {
                tasks
                    .par_iter()
                    .map(|&(p, i)| {
                        let pt = &points[p];
                        let spec = ensemble_spec(ens, pt.n, pt.k, pt.m, split_seed(ens.seed, i as u64));
                        match generate(&spec, &opts) {
                            Ok(inst) => choices.iter().map(|&c| cell(run_full(&inst.problem, c, &args.policy, eng))).collect(),
                            Err(e) => choices.iter().map(|_| Err(e.to_string())).collect(),
                        }
                    })
                    .collect()
            })?;
            let mut out = Vec::new();
            for (p, pt) in points.iter().enumerate() {
                let rows = &cells[p * ens.trials..(p + 1) * ens.trials];
                for (ci, &choice) in choices.iter().enumerate() {
                    let column: Vec<Cell> = rows.iter().map(|r| r[ci].clone()).collect();
                    out.push(aggregate(Engine::Full, args.axis, pt, choice, &column, &config, args.policy.alpha.resolve(pt.n)));
                }
            }
            out
        }
    };

    let mut sink = Sink::new(args.output.format, args.output.out.as_deref(), stdout)?;
    for r in &records {
        sink.emit(r)?;
    }
    sink.finish()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mean_and_sem() {
        assert_eq!(mean_sem(&[]), (None, None));
        assert_eq!(mean_sem(&[2.0]), (Some(2.0), None));
        let (m, s) = mean_sem(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, Some(2.5));
        assert!((s.unwrap() - (5.0f64 / 3.0 / 4.0).sqrt()).abs() < 1e-15);
    }
}
