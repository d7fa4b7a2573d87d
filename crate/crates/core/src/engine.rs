//! Full state-vector trials.
//!
//! One trial starts from the uniform superposition and applies
//! `psi <- U (rho_j . psi)` for `j = 1..=J`. Solution probabilities are read
//! off the state exactly after every step and the step count with the
//! lowest expected cost `j / P_soln(j)` is reported.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gen::rng_from_seed;
use crate::mixer::{Mixer, MixerSpec};
use crate::phase::{PhaseSchedule, PhaseVector, PolicySpec};
use crate::sat::{Assignment, SatProblem};

/// Default largest `n` for the full engine (`2^26` doubles is 512 MiB).
pub const DEFAULT_MAX_N: usize = 26;

/// Real amplitudes of a `2^n` state, indexed by assignment.
///
/// Every operator used by the search is real, so this holds the real part
/// of the complex amplitudes; the imaginary part is identically zero.
#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeVector(Vec<f64>);

impl AmplitudeVector {
    pub fn from_vec(amplitudes: Vec<f64>) -> Result<Self> {
        if !amplitudes.len().is_power_of_two() {
            return Err(Error::NotPowerOfTwo(amplitudes.len()));
        }
        Ok(AmplitudeVector(amplitudes))
    }

    pub fn n(&self) -> usize {
        self.0.len().trailing_zeros() as usize
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().map(|v| v * v).sum()
    }
}

/// Equal amplitude `1/sqrt(N)` on every assignment.
pub fn init_uniform(n: usize, max_n: usize) -> Result<AmplitudeVector> {
    if n > max_n {
        return Err(Error::Capacity { n, limit: max_n });
    }
    let len = 1usize << n;
    Ok(AmplitudeVector(vec![1.0 / (len as f64).sqrt(); len]))
}

/// One step in place: flip signs, then mix.
pub fn step(x: &mut AmplitudeVector, phases: &PhaseVector, mixer: &Mixer) -> Result<()> {
    if phases.len() != x.0.len() {
        return Err(Error::LengthMismatch { expected: x.0.len(), actual: phases.len() });
    }
    phases.apply(&mut x.0);
    mixer.apply(&mut x.0)
}

/// Total probability on the given solutions.
pub fn p_soln(x: &[f64], solutions: &[Assignment]) -> f64 {
    solutions.iter().map(|&s| x[s as usize] * x[s as usize]).sum()
}

/// Probability mass per conflict count; entry `c` sums `|x_s|^2` over
/// assignments with `c` conflicts.
pub fn conflict_histogram(x: &[f64], conflicts: &[u32]) -> Result<Vec<f64>> {
    if x.len() != conflicts.len() {
        return Err(Error::LengthMismatch { expected: x.len(), actual: conflicts.len() });
    }
    let top = conflicts.iter().copied().max().unwrap_or(0) as usize;
    let mut hist = vec![0.0; top + 1];
    for (v, &c) in x.iter().zip(conflicts) {
        hist[c as usize] += v * v;
    }
    Ok(hist)
}

/// Draws one assignment with probability `|x_s|^2`.
pub fn measure_sample(x: &[f64], seed: u64) -> Result<Assignment> {
    let norm_sqr: f64 = x.iter().map(|v| v * v).sum();
    if (norm_sqr - 1.0).abs() > 1e-6 {
        return Err(Error::NormViolation { norm_sqr, tolerance: 1e-6 });
    }
    let target = rng_from_seed(seed).gen::<f64>() * norm_sqr;
    let mut acc = 0.0;
    let mut last_nonzero = 0;
    for (s, v) in x.iter().enumerate() {
        let p = v * v;
        if p > 0.0 {
            acc += p;
            last_nonzero = s;
            if target < acc {
                return Ok(s as Assignment);
            }
        }
    }
    // rounding left target just above the accumulated sum
    Ok(last_nonzero as Assignment)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    /// Entry `j` is `P_soln` after step `j`; entry 0 is the initial state.
    pub p_soln_by_step: Vec<f64>,
    /// `None` when no step puts amplitude on a solution.
    pub best_j: Option<usize>,
    /// `best_j / P_soln(best_j)`; `None` stands for infinite cost.
    pub best_cost: Option<f64>,
    /// Largest `|norm^2 - 1|` seen after any step.
    pub max_norm_drift: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub conflict_histograms: Option<Vec<Vec<f64>>>,
}

impl RunResult {
    pub fn new(p_soln_by_step: Vec<f64>, max_norm_drift: f64, conflict_histograms: Option<Vec<Vec<f64>>>) -> Self {
        let (best_j, best_cost) = best_step(&p_soln_by_step);
        RunResult { p_soln_by_step, best_j, best_cost, max_norm_drift, conflict_histograms }
    }

    /// Expected cost as a float, infinite when no solution is ever reached.
    pub fn cost(&self) -> f64 {
        self.best_cost.unwrap_or(f64::INFINITY)
    }

    pub fn steps(&self) -> usize {
        self.p_soln_by_step.len().saturating_sub(1)
    }
}

/// `argmin_j j / p[j]` over `j >= 1`; ties go to the smaller `j`.
pub fn best_step(p_soln_by_step: &[f64]) -> (Option<usize>, Option<f64>) {
    let mut best: Option<(usize, f64)> = None;
    for (j, &p) in p_soln_by_step.iter().enumerate().skip(1) {
        if p <= 0.0 {
            continue;
        }
        let cost = j as f64 / p;
        if best.is_none_or(|(_, c)| cost < c) {
            best = Some((j, cost));
        }
    }
    (best.map(|b| b.0), best.map(|b| b.1))
}

/// Knobs for [`run_trial`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrialOptions {
    /// Upper bound on steps; the policy's own cap also applies.
    pub j_max: Option<usize>,
    pub histograms: bool,
    pub max_n: usize,
}

impl Default for TrialOptions {
    fn default() -> Self {
        TrialOptions { j_max: None, histograms: false, max_n: DEFAULT_MAX_N }
    }
}

/// Step-by-step evolution of one trial, exposing the state between steps.
pub struct Trial {
    schedule: PhaseSchedule,
    mixer: Mixer,
    conflicts: Vec<u32>,
    solutions: Vec<Assignment>,
    state: AmplitudeVector,
    j: usize,
}

impl Trial {
    pub fn new(problem: &SatProblem, policy: PolicySpec, mixer: MixerSpec, max_n: usize) -> Result<Self> {
        if mixer.n != problem.n() {
            return Err(Error::param(format!("mixer is for n = {}, problem has n = {}", mixer.n, problem.n())));
        }
        let state = init_uniform(problem.n(), max_n)?;
        let conflicts = problem.conflict_vector(max_n)?;
        let solutions = conflicts.iter().enumerate().filter(|(_, &c)| c == 0).map(|(s, _)| s as Assignment).collect();
        let schedule = PhaseSchedule::from_conflicts(&conflicts, policy);
        Ok(Trial { schedule, mixer: Mixer::new(mixer), conflicts, solutions, state, j: 0 })
    }

    pub fn state(&self) -> &AmplitudeVector {
        &self.state
    }

    pub fn conflicts(&self) -> &[u32] {
        &self.conflicts
    }

    pub fn solutions(&self) -> &[Assignment] {
        &self.solutions
    }

    /// Steps taken so far.
    pub fn steps_taken(&self) -> usize {
        self.j
    }

    pub fn p_soln(&self) -> f64 {
        p_soln(self.state.as_slice(), &self.solutions)
    }

    /// Advances one step; fails past the policy's step count.
    pub fn advance(&mut self) -> Result<()> {
        let j = self.j + 1;
        if j > self.schedule.steps() {
            return Err(Error::StepCap { cap: self.schedule.steps(), requested: j });
        }
        self.schedule.apply(j, self.state.as_mut_slice());
        self.mixer.apply(self.state.as_mut_slice())?;
        self.j = j;
        Ok(())
    }
}

/// Runs steps `1..=min(j_max, policy steps)` and picks the cheapest stop.
pub fn run_trial(problem: &SatProblem, policy: &PolicySpec, mixer: &MixerSpec, opts: &TrialOptions) -> Result<RunResult> {
    let mut trial = Trial::new(problem, *policy, *mixer, opts.max_n)?;
    let steps = opts.j_max.map_or(policy.max_steps, |cap| cap.min(policy.max_steps));
    let mut probs = Vec::with_capacity(steps + 1);
    let mut hists = opts.histograms.then(Vec::new);
    probs.push(trial.p_soln());
    if let Some(h) = hists.as_mut() {
        h.push(conflict_histogram(trial.state().as_slice(), trial.conflicts())?);
    }
    let mut drift = 0.0f64;
    for _ in 0..steps {
        trial.advance()?;
        probs.push(trial.p_soln());
        drift = drift.max((trial.state().norm_sqr() - 1.0).abs());
        if let Some(h) = hists.as_mut() {
            h.push(conflict_histogram(trial.state().as_slice(), trial.conflicts())?);
        }
    }
    Ok(RunResult::new(probs, drift, hists))
}
