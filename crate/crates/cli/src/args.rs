use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qlsearch::{EnsembleKind, Rational};
use serde::{Deserialize, Serialize};

/// Quantum local search simulator for k-SAT.
///
/// Every flag can also be set through an environment variable named
/// `QLS_<FLAG>` with dashes replaced by underscores, e.g. `QLS_J_MAX`.
#[derive(Debug, Parser)]
#[command(name = "qlsearch", version, about)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write instances as DIMACS CNF with JSON metadata sidecars.
    Generate(GenerateArgs),
    /// Run trials on generated or loaded instances, one record per instance and policy.
    Run(RunArgs),
    /// Mean expected cost across a range of n or m/n.
    Sweep(SweepArgs),
    /// Self-checks of the simulator: unitarity, norms, oracles, paper values.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Args)]
pub struct EnsembleArgs {
    /// Number of variables.
    #[arg(long, env = "QLS_N")]
    pub n: Option<usize>,
    /// Clause size; defaults to 3, or 1 for max-constrained-1sat.
    #[arg(long, env = "QLS_K")]
    pub k: Option<usize>,
    /// Number of clauses; defaults to n for max-constrained-1sat.
    #[arg(long, env = "QLS_M")]
    pub m: Option<usize>,
    /// random, random-soluble, prespecified-solution or max-constrained-1sat.
    #[arg(long, env = "QLS_ENSEMBLE", default_value = "random-soluble")]
    pub ensemble: EnsembleKind,
    #[arg(long, env = "QLS_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Solution to plant, as an integer with V_i in bit i-1.
    #[arg(long, env = "QLS_PLANTED")]
    pub planted: Option<u64>,
    /// Number of instances.
    #[arg(long, env = "QLS_TRIALS", default_value_t = 1)]
    pub trials: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PolicyChoice {
    Simple,
    Neighborhood,
    Both,
}

impl PolicyChoice {
    pub fn expand(self) -> Vec<PolicyChoice> {
        match self {
            PolicyChoice::Both => vec![PolicyChoice::Simple, PolicyChoice::Neighborhood],
            p => vec![p],
        }
    }
}

/// Threshold `alpha` of the mixing diagonal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AlphaArg {
    /// `floor(n / 2)`.
    Default,
    /// `alpha = n`, which makes the mixer the identity.
    Full,
    Value(usize),
}

impl AlphaArg {
    pub fn resolve(self, n: usize) -> usize {
        match self {
            AlphaArg::Default => n / 2,
            AlphaArg::Full => n,
            AlphaArg::Value(a) => a,
        }
    }
}

impl FromStr for AlphaArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "default" => Ok(AlphaArg::Default),
            "n" | "full" => Ok(AlphaArg::Full),
            v => v.parse().map(AlphaArg::Value).map_err(|_| format!("expected an integer, 'n' or 'default', got {v:?}")),
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct PolicyArgs {
    #[arg(long, env = "QLS_POLICY", value_enum, default_value_t = PolicyChoice::Both)]
    pub policy: PolicyChoice,
    /// Initial conflict threshold of the simple policy (default m / 2^k).
    #[arg(long, env = "QLS_C_START")]
    pub c_start: Option<Rational>,
    /// Initial better-neighbor count of the neighborhood policy (default n / 2).
    #[arg(long, env = "QLS_N_START")]
    pub n_start: Option<usize>,
    /// Mixer threshold: an integer, 'n', or 'default' (n / 2).
    #[arg(long, env = "QLS_ALPHA", default_value = "default")]
    pub alpha: AlphaArg,
    /// Most steps per trial; the policy's own cap also applies.
    #[arg(long, env = "QLS_J_MAX", value_parser = clap::builder::RangedU64ValueParser::<usize>::new().range(1..))]
    pub j_max: Option<usize>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    #[default]
    Jsonl,
    Csv,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    #[arg(long, env = "QLS_FORMAT", value_enum, default_value_t = Format::Jsonl)]
    pub format: Format,
    /// Output file; standard output when absent.
    #[arg(long, env = "QLS_OUT")]
    pub out: Option<PathBuf>,
    /// Worker threads; all cores when absent.
    #[arg(long, env = "QLS_THREADS")]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Engine {
    /// State vector over all 2^n assignments.
    Full,
    /// Conflict shells of planted 1-SAT.
    Compact,
}

#[derive(Debug, Clone, Args)]
pub struct EngineArgs {
    #[arg(long, env = "QLS_ENGINE", value_enum, default_value_t = Engine::Full)]
    pub engine: Engine,
    /// Largest n for the full engine.
    #[arg(long, env = "QLS_MAX_N", default_value_t = qlsearch::engine::DEFAULT_MAX_N)]
    pub max_n: usize,
    /// Include per-step conflict histograms (JSON output only).
    #[arg(long, env = "QLS_HISTOGRAMS")]
    pub histograms: bool,
}

#[derive(Debug, Clone, Args)]
pub struct GenerateArgs {
    #[command(flatten)]
    pub ensemble: EnsembleArgs,
    /// Directory for the .cnf and .json files.
    #[arg(long, env = "QLS_OUT", default_value = ".")]
    pub out: PathBuf,
    /// Format of the summary printed to standard output.
    #[arg(long, env = "QLS_FORMAT", value_enum, default_value_t = Format::Jsonl)]
    pub format: Format,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub ensemble: EnsembleArgs,
    #[command(flatten)]
    pub policy: PolicyArgs,
    #[command(flatten)]
    pub engine: EngineArgs,
    #[command(flatten)]
    pub output: OutputArgs,
    /// DIMACS files to run instead of generating instances.
    #[arg(long, num_args = 0..)]
    pub input: Vec<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Axis {
    /// Number of variables, with m = ratio * n.
    N,
    /// Clauses per variable m/n at fixed n.
    Ratio,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub ensemble: EnsembleArgs,
    #[command(flatten)]
    pub policy: PolicyArgs,
    #[command(flatten)]
    pub engine: EngineArgs,
    #[command(flatten)]
    pub output: OutputArgs,
    #[arg(long, env = "QLS_AXIS", value_enum, default_value_t = Axis::N)]
    pub axis: Axis,
    /// Axis points: a comma list ("8,10,12") or an inclusive range "start:end:step".
    #[arg(long, env = "QLS_VALUES")]
    pub values: String,
    /// m/n on the n axis for ensembles with free m.
    #[arg(long, env = "QLS_RATIO", default_value_t = 4.0)]
    pub ratio: f64,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    /// Mixer threshold used by every check; 'n' injects a fault.
    #[arg(long, env = "QLS_ALPHA", default_value = "default")]
    pub alpha: AlphaArg,
    /// Largest n for checks that build dense 2^n x 2^n matrices.
    #[arg(long, env = "QLS_DENSE_LIMIT", default_value_t = 8)]
    pub dense_limit: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

/// Parses `--values`.
pub fn parse_values(s: &str) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() == 3 {
        let nums: Result<Vec<f64>, _> = parts.iter().map(|p| p.trim().parse::<f64>()).collect();
        let nums = nums.map_err(|e| format!("bad range {s:?}: {e}"))?;
        let (start, end, step) = (nums[0], nums[1], nums[2]);
        if step <= 0.0 || end < start {
            return Err(format!("bad range {s:?}"));
        }
        let count = ((end - start) / step + 1e-9).floor() as usize;
        return Ok((0..=count).map(|i| start + step * i as f64).collect());
    }
    s.split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("bad value {p:?}: {e}")))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn values() {
        assert_eq!(parse_values("8,10, 12").unwrap(), vec![8.0, 10.0, 12.0]);
        assert_eq!(parse_values("20:26:2").unwrap(), vec![20.0, 22.0, 24.0, 26.0]);
        assert_eq!(parse_values("1:2:0.5").unwrap(), vec![1.0, 1.5, 2.0]);
        assert!(parse_values("3:1:1").is_err());
        assert!(parse_values("x").is_err());
    }

    #[test]
    fn alpha() {
        assert_eq!("n".parse::<AlphaArg>().unwrap().resolve(7), 7);
        assert_eq!("default".parse::<AlphaArg>().unwrap().resolve(7), 3);
        assert_eq!("2".parse::<AlphaArg>().unwrap(), AlphaArg::Value(2));
        assert!("-1".parse::<AlphaArg>().is_err());
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
