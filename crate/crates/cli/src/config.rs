//! Resolved experiment settings embedded in every output record.

use qlsearch::phase::{PolicyKind, PolicySpec};
use qlsearch::{EnsembleKind, EnsembleSpec, MixerSpec, Rational};
use serde::Serialize;

use crate::args::{AlphaArg, Axis, Engine, EnsembleArgs, Format, PolicyArgs, PolicyChoice};
use crate::{CliError, CliResult};

/// Every setting that influences a record, after defaults are applied.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub command: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ensemble: Option<EnsembleKind>,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub planted: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub policy: Option<PolicyChoice>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c_start: Option<Rational>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_start: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<AlphaArg>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub j_max: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub engine: Option<Engine>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub histograms: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub axis: Option<Axis>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ratio: Option<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub input: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dense_limit: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    pub format: Format,
}

impl ExperimentConfig {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).unwrap_or_default()
    }
}

/// `k` and `m` after ensemble-specific defaults.
pub fn resolve_km(args: &EnsembleArgs, n: usize) -> CliResult<(usize, usize)> {
    if args.ensemble == EnsembleKind::MaxConstrained1Sat {
        return Ok((args.k.unwrap_or(1), args.m.unwrap_or(n)));
    }
    let k = args.k.unwrap_or(3);
    let m = args.m.ok_or_else(|| CliError::Usage(format!("--m is required for the {} ensemble", args.ensemble)))?;
    Ok((k, m))
}

pub fn require_n(args: &EnsembleArgs) -> CliResult<usize> {
    args.n.ok_or_else(|| CliError::Usage("--n is required".into()))
}

pub fn ensemble_spec(args: &EnsembleArgs, n: usize, k: usize, m: usize, seed: u64) -> EnsembleSpec {
    EnsembleSpec { n, k, m, kind: args.ensemble, seed }
}

pub fn mixer(alpha: AlphaArg, n: usize) -> qlsearch::Result<MixerSpec> {
    MixerSpec::with_alpha(n, alpha.resolve(n))
}

/// Builds the policy for one problem; `avg_conflicts` is `m / 2^k`.
pub fn policy_for(choice: PolicyChoice, args: &PolicyArgs, n: usize, avg_conflicts: Rational) -> CliResult<PolicySpec> {
    let kind = match choice {
        PolicyChoice::Simple => PolicyKind::SimpleThreshold { c_start: args.c_start.unwrap_or(avg_conflicts) },
        PolicyChoice::Neighborhood => PolicyKind::Neighborhood { n_start: args.n_start.unwrap_or(n / 2) },
        PolicyChoice::Both => return Err(CliError::Usage("policy must be expanded before use".into())),
    };
    if args.j_max == Some(0) {
        return Err(CliError::Usage("--j-max must be positive".into()));
    }
    let steps = args.j_max.map(|j| j.min(kind.step_cap()));
    Ok(PolicySpec::new(kind, steps)?)
}

pub fn parse_axis(values: &str) -> CliResult<Vec<f64>> {
    let v = crate::args::parse_values(values).map_err(CliError::Usage)?;
    if v.is_empty() {
        return Err(CliError::Usage("--values is empty".into()));
    }
    Ok(v)
}

/// Base config shared by run and sweep.
pub fn base_config(command: &str, ens: &EnsembleArgs, pol: &PolicyArgs, format: Format, threads: Option<usize>) -> ExperimentConfig {
    ExperimentConfig {
        command: command.to_string(),
        ensemble: Some(ens.ensemble),
        seed: ens.seed,
        planted: ens.planted,
        trials: Some(ens.trials),
        policy: Some(pol.policy),
        c_start: pol.c_start,
        n_start: pol.n_start,
        alpha: Some(pol.alpha),
        j_max: pol.j_max,
        threads,
        format,
        ..Default::default()
    }
}
