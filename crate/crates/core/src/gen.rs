//! Instance ensembles: random k-SAT with distinct clauses, random soluble
//! k-SAT (rejection on a backtracking check), random k-SAT with a planted
//! solution, and the maximally constrained soluble 1-SAT problem.
//!
//! Clauses are drawn by index from the clause universe without
//! materializing it. Clause index `c` decodes as variable-set rank
//! `c / patterns` (colex order over `k`-subsets) and sign pattern
//! `c % patterns`.
//!
//! Randomness comes from [`ChaCha8Rng`] seeded through
//! `SeedableRng::seed_from_u64`. Independent streams (batch items, rejection
//! attempts) use [`split_seed`].

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::combinatorics::{binomial_u128, unrank_combination};
use crate::error::{Error, Result};
use crate::sat::{full_mask, Assignment, ConflictPattern, SatProblem};
use crate::solver::{backtrack_solve, SolveMode};

/// Name of the generator recorded in output metadata.
pub const RNG_NAME: &str = "chacha8/seed_from_u64";

/// Default number of draws before the random-soluble ensemble gives up.
pub const DEFAULT_REJECTION_BUDGET: u64 = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EnsembleKind {
    Random,
    RandomSoluble,
    PrespecifiedSolution,
    #[serde(rename = "max-constrained-1sat")]
    MaxConstrained1Sat,
}

impl EnsembleKind {
    pub fn name(self) -> &'static str {
        match self {
            EnsembleKind::Random => "random",
            EnsembleKind::RandomSoluble => "random-soluble",
            EnsembleKind::PrespecifiedSolution => "prespecified-solution",
            EnsembleKind::MaxConstrained1Sat => "max-constrained-1sat",
        }
    }
}

impl std::str::FromStr for EnsembleKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random" => Ok(EnsembleKind::Random),
            "random-soluble" | "soluble" => Ok(EnsembleKind::RandomSoluble),
            "prespecified-solution" | "prespecified" | "planted" => Ok(EnsembleKind::PrespecifiedSolution),
            "max-constrained-1sat" | "max-1sat" => Ok(EnsembleKind::MaxConstrained1Sat),
            other => Err(Error::param(format!("unknown ensemble {other:?}"))),
        }
    }
}

impl std::fmt::Display for EnsembleKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    pub n: usize,
    pub k: usize,
    pub m: usize,
    pub kind: EnsembleKind,
    pub seed: u64,
}

/// Knobs that do not change the ensemble's distribution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GenOptions {
    pub rejection_budget: u64,
    /// Count all solutions with the backtracking solver.
    pub count_solutions: bool,
    /// Fixed solution for the planted ensembles instead of a random one.
    pub planted: Option<Assignment>,
}

impl Default for GenOptions {
    fn default() -> Self {
        GenOptions { rejection_budget: DEFAULT_REJECTION_BUDGET, count_solutions: false, planted: None }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratedInstance {
    pub problem: SatProblem,
    pub planted_solution: Option<Assignment>,
    /// A solution found by the backtracking solver (random-soluble only).
    pub witness: Option<Assignment>,
    pub solution_count: Option<u128>,
    /// Draws consumed, 1 unless rejection sampling was needed.
    pub attempts: u64,
}

/// Sidecar record stored next to a DIMACS file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceMeta {
    pub n: usize,
    pub k: usize,
    pub m: usize,
    pub kind: EnsembleKind,
    pub seed: u64,
    pub rng: String,
    pub planted: Option<Assignment>,
    pub solution_count: Option<u128>,
}

impl InstanceMeta {
    pub fn new(spec: &EnsembleSpec, instance: &GeneratedInstance) -> Self {
        InstanceMeta {
            n: instance.problem.n(),
            k: instance.problem.k(),
            m: instance.problem.m(),
            kind: spec.kind,
            seed: spec.seed,
            rng: RNG_NAME.to_string(),
            planted: instance.planted_solution,
            solution_count: instance.solution_count,
        }
    }
}

/// Derives the seed of stream `index` from a parent seed with the
/// SplitMix64 finalizer applied to `seed + (index + 1) * 0x9E3779B97F4A7C15`.
pub fn split_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Number of clauses compatible with a fixed solution, `C(n,k) (2^k - 1)`.
pub fn max_clauses(n: usize, k: usize) -> Result<u128> {
    if k == 0 || k > n {
        return Err(Error::param(format!("need 1 <= k <= n, got k = {k}, n = {n}")));
    }
    let sets = binomial_u128(n as u64, k as u64).ok_or_else(|| Error::param("C(n, k) overflows 128 bits"))?;
    pattern_count(k)
        .and_then(|p| sets.checked_mul(p - 1))
        .ok_or_else(|| Error::param("m_max overflows 128 bits"))
}

/// Size of the full clause universe, `C(n,k) 2^k`.
pub fn clause_universe(n: usize, k: usize) -> Result<u128> {
    if k == 0 || k > n {
        return Err(Error::param(format!("need 1 <= k <= n, got k = {k}, n = {n}")));
    }
    let sets = binomial_u128(n as u64, k as u64).ok_or_else(|| Error::param("C(n, k) overflows 128 bits"))?;
    pattern_count(k)
        .and_then(|p| sets.checked_mul(p))
        .ok_or_else(|| Error::param("clause universe overflows 128 bits"))
}

fn pattern_count(k: usize) -> Option<u128> {
    1u128.checked_shl(k as u32)
}

/// Scatters the low bits of `bits` into the positions of `mask`.
fn deposit(bits: u64, mask: u64) -> u64 {
    let mut out = 0;
    let mut rest = mask;
    let mut i = 0;
    while rest != 0 {
        let low = rest & rest.wrapping_neg();
        if bits >> i & 1 == 1 {
            out |= low;
        }
        rest &= rest - 1;
        i += 1;
    }
    out
}

/// Gathers the bits of `s` at the positions of `mask` into the low bits.
fn extract(s: u64, mask: u64) -> u64 {
    let mut out = 0;
    let mut rest = mask;
    let mut i = 0;
    while rest != 0 {
        let low = rest & rest.wrapping_neg();
        if s & low != 0 {
            out |= 1 << i;
        }
        rest &= rest - 1;
        i += 1;
    }
    out
}

fn sample_indices(rng: &mut ChaCha8Rng, universe: u128, m: usize) -> Result<Vec<u128>> {
    if m as u128 > universe {
        return Err(Error::param(format!("m = {m} exceeds the {universe} available clauses")));
    }
    let length = usize::try_from(universe).map_err(|_| Error::param("clause universe too large to sample"))?;
    let mut picked: Vec<u128> = index::sample(rng, length, m).into_iter().map(|i| i as u128).collect();
    picked.sort_unstable();
    Ok(picked)
}

fn check_shape(spec: &EnsembleSpec) -> Result<()> {
    if spec.n > crate::sat::MAX_VARIABLES {
        return Err(Error::Capacity { n: spec.n, limit: crate::sat::MAX_VARIABLES });
    }
    if spec.k == 0 || spec.k > spec.n {
        return Err(Error::param(format!("need 1 <= k <= n, got k = {}, n = {}", spec.k, spec.n)));
    }
    Ok(())
}

fn random_problem(n: usize, k: usize, m: usize, rng: &mut ChaCha8Rng) -> Result<SatProblem> {
    let patterns = 1u128 << k;
    let picked = sample_indices(rng, clause_universe(n, k)?, m)?;
    let clauses = picked
        .into_iter()
        .map(|idx| {
            let mask = unrank_combination(n as u32, k as u32, idx / patterns);
            ConflictPattern::new(mask, deposit((idx % patterns) as u64, mask))
        })
        .collect::<Result<Vec<_>>>()?;
    SatProblem::new(n, k, clauses)
}

/// `m` distinct clauses drawn uniformly from all `C(n,k) 2^k` clauses.
pub fn gen_random(spec: &EnsembleSpec) -> Result<GeneratedInstance> {
    check_shape(spec)?;
    let mut rng = rng_from_seed(spec.seed);
    let problem = random_problem(spec.n, spec.k, spec.m, &mut rng)?;
    Ok(GeneratedInstance { problem, planted_solution: None, witness: None, solution_count: None, attempts: 1 })
}

/// Random instances redrawn (attempt `a` uses `split_seed(seed, a)`) until
/// the backtracking solver finds a solution.
pub fn gen_random_soluble(spec: &EnsembleSpec, opts: &GenOptions) -> Result<GeneratedInstance> {
    check_shape(spec)?;
    // fail fast on impossible parameters instead of burning the budget
    clause_universe(spec.n, spec.k).and_then(|u| {
        if spec.m as u128 > u {
            Err(Error::param(format!("m = {} exceeds the {u} available clauses", spec.m)))
        } else {
            Ok(())
        }
    })?;
    for attempt in 0..opts.rejection_budget {
        let mut rng = rng_from_seed(split_seed(spec.seed, attempt));
        let problem = random_problem(spec.n, spec.k, spec.m, &mut rng)?;
        if let Some(witness) = backtrack_solve(&problem, SolveMode::First).witness() {
            let solution_count =
                opts.count_solutions.then(|| backtrack_solve(&problem, SolveMode::Count).count().unwrap_or(0));
            return Ok(GeneratedInstance {
                problem,
                planted_solution: None,
                witness: Some(witness),
                solution_count,
                attempts: attempt + 1,
            });
        }
    }
    Err(Error::RejectionBudget { attempts: opts.rejection_budget })
}

/// A uniformly random solution, then `m` distinct clauses drawn from the
/// `m_max` clauses it satisfies.
pub fn gen_prespecified(spec: &EnsembleSpec, opts: &GenOptions) -> Result<GeneratedInstance> {
    check_shape(spec)?;
    let (n, k) = (spec.n, spec.k);
    let mut rng = rng_from_seed(spec.seed);
    let drawn: u64 = rng.gen::<u64>() & full_mask(n);
    let planted = opts.planted.unwrap_or(drawn);
    if planted & !full_mask(n) != 0 {
        return Err(Error::param(format!("planted solution {planted} does not fit n = {n}")));
    }
    let allowed = (1u128 << k) - 1;
    let picked = sample_indices(&mut rng, max_clauses(n, k)?, spec.m)?;
    let clauses = picked
        .into_iter()
        .map(|idx| {
            let mask = unrank_combination(n as u32, k as u32, idx / allowed);
            let excluded = extract(planted, mask) as u128;
            let r = idx % allowed;
            let pattern = if r < excluded { r } else { r + 1 };
            ConflictPattern::new(mask, deposit(pattern as u64, mask))
        })
        .collect::<Result<Vec<_>>>()?;
    let problem = SatProblem::new(n, k, clauses)?;
    let solution_count = opts.count_solutions.then(|| backtrack_solve(&problem, SolveMode::Count).count().unwrap_or(0));
    Ok(GeneratedInstance { problem, planted_solution: Some(planted), witness: None, solution_count, attempts: 1 })
}

/// 1-SAT with one clause per variable in `constrained`, each falsified by the
/// bit opposite to `planted`'s.
pub fn planted_1sat(n: usize, constrained: u64, planted: Assignment) -> Result<GeneratedInstance> {
    if n > crate::sat::MAX_VARIABLES {
        return Err(Error::Capacity { n, limit: crate::sat::MAX_VARIABLES });
    }
    if (constrained | planted) & !full_mask(n) != 0 {
        return Err(Error::param(format!("assignment does not fit n = {n}")));
    }
    let mut clauses = Vec::with_capacity(constrained.count_ones() as usize);
    let mut rest = constrained;
    while rest != 0 {
        let bit = rest & rest.wrapping_neg();
        clauses.push(ConflictPattern::new(bit, !planted & bit)?);
        rest &= rest - 1;
    }
    let k = usize::from(constrained != 0);
    let problem = SatProblem::new(n, k, clauses)?;
    let free = n - constrained.count_ones() as usize;
    Ok(GeneratedInstance {
        problem,
        planted_solution: Some(planted),
        witness: None,
        solution_count: Some(1u128 << free),
        attempts: 1,
    })
}

/// The soluble 1-SAT instance with the maximum `n` clauses; its conflict
/// count is the Hamming distance to `planted`.
pub fn gen_max_constrained_1sat(n: usize, planted: Assignment) -> Result<GeneratedInstance> {
    planted_1sat(n, full_mask(n), planted)
}

/// Dispatches on `spec.kind`.
pub fn generate(spec: &EnsembleSpec, opts: &GenOptions) -> Result<GeneratedInstance> {
    let mut inst = match spec.kind {
        EnsembleKind::Random => gen_random(spec)?,
        EnsembleKind::RandomSoluble => gen_random_soluble(spec, opts)?,
        EnsembleKind::PrespecifiedSolution => gen_prespecified(spec, opts)?,
        EnsembleKind::MaxConstrained1Sat => {
            if spec.k != 1 || spec.m != spec.n {
                return Err(Error::param("max-constrained-1sat requires k = 1 and m = n"));
            }
            let planted = match opts.planted {
                Some(p) => p,
                None => rng_from_seed(spec.seed).gen::<u64>() & full_mask(spec.n),
            };
            gen_max_constrained_1sat(spec.n, planted)?
        }
    };
    if spec.kind == EnsembleKind::Random && opts.count_solutions {
        inst.solution_count = backtrack_solve(&inst.problem, SolveMode::Count).count();
    }
    Ok(inst)
}
