use std::fs;
use std::io::Write;

use qlsearch::dimacs;
use qlsearch::gen::{split_seed, InstanceMeta};
use qlsearch::{backtrack_solve, generate, GenOptions, SolveMode};

use crate::args::GenerateArgs;
use crate::config::{ensemble_spec, require_n, resolve_km, ExperimentConfig};
use crate::output::{GenerateRecord, Sink};
use crate::{CliError, CliResult};

/// Instance `index` of a batch uses seed `split_seed(seed, index)`.
pub fn cmd_generate(args: &GenerateArgs, stdout: &mut dyn Write) -> CliResult<()> {
    let ens = &args.ensemble;
    let n = require_n(ens)?;
    let (k, m) = resolve_km(ens, n)?;
    let config = ExperimentConfig {
        command: "generate".into(),
        n: Some(n),
        k: Some(k),
        m: Some(m),
        ensemble: Some(ens.ensemble),
        seed: ens.seed,
        planted: ens.planted,
        trials: Some(ens.trials),
        format: args.format,
        ..Default::default()
    };
    fs::create_dir_all(&args.out)?;
    let opts = GenOptions { planted: ens.planted, ..GenOptions::default() };
    let mut sink = Sink::new(args.format, None, stdout)?;
    let mut capacity = None;
    for index in 0..ens.trials {
        let seed = split_seed(ens.seed, index as u64);
        let spec = ensemble_spec(ens, n, k, m, seed);
        let mut record = GenerateRecord {
            index,
            n,
            k,
            m,
            ensemble: ens.ensemble.to_string(),
            seed,
            planted: None,
            soluble: None,
            solutions: None,
            attempts: None,
            file: None,
            error: None,
            config: config.clone(),
        };
        match generate(&spec, &opts) {
            Ok(mut inst) => {
                if inst.solution_count.is_none() {
                    inst.solution_count = backtrack_solve(&inst.problem, SolveMode::Count).count();
                }
                let stem = format!("{}-n{n}-k{k}-m{m}-s{}-{index:04}", ens.ensemble, ens.seed);
                let cnf = args.out.join(format!("{stem}.cnf"));
                fs::write(&cnf, dimacs::write(&inst.problem))?;
                let meta = InstanceMeta::new(&spec, &inst);
                fs::write(args.out.join(format!("{stem}.json")), serde_json::to_string_pretty(&meta)? + "\n")?;
                record.planted = inst.planted_solution;
                record.solutions = inst.solution_count.map(|c| c.to_string());
                record.soluble = inst.solution_count.map(|c| c > 0);
                record.attempts = Some(inst.attempts);
                record.file = Some(cnf.display().to_string());
            }
            Err(e) => {
                if matches!(e, qlsearch::Error::Capacity { .. }) {
                    capacity = Some(e.to_string());
                }
                record.error = Some(e.to_string());
            }
        }
        sink.emit(&record)?;
    }
    sink.finish()?;
    match capacity {
        Some(msg) => Err(CliError::Capacity(msg)),
        None => Ok(()),
    }
}
