//! Conflict-shell simulation of planted 1-SAT.
//!
//! For 1-SAT with one clause on each of `m` variables (the maximally
//! constrained case is `m = n`), every assignment with `c` conflicts has
//! `c` strictly better neighbors, and by symmetry all assignments with the
//! same conflict count carry the same amplitude `psi_c`. The search then
//! lives on `m + 1` shells and one step costs `O(m^2)`.
//!
//! The state is kept in the orthonormal shell basis, `a_c = sqrt(|shell c|)
//! psi_c` with `|shell c| = C(m, c) 2^(n - m)`. In that basis the mixing
//! operator is `T D T` where `T` is the symmetric orthogonal matrix
//!
//! ```text
//! T[b][c] = sqrt(C(m, b) / C(m, c)) S_m(c, b) / sqrt(2^m)
//! ```
//!
//! and `D[a][a] = tau(a)` from the `n`-variable mixer. `S_m` is built with
//! exact integers, so entries are accurate to a few ulps even where the
//! alternating binomial sums cancel catastrophically in floating point.
//!
//! The per-assignment matrices `V^max`, `W^max` and `D^max` are also
//! available for inspection and for cross-checking.

use nalgebra::{DMatrix, DVector};
use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::combinatorics::{binomial_big, binomial_row, ratio_to_f64};
use crate::engine::RunResult;
use crate::error::{Error, Result};
use crate::mixer::{s_table, u_numerators, MixerSpec};
use crate::phase::{neighborhood_sign, simple_sign, PolicyKind, PolicySpec, Rational};

/// Planted 1-SAT on `n` variables with `bad_bits` constrained variables.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CompactProblem {
    pub n: usize,
    pub bad_bits: usize,
}

impl CompactProblem {
    /// The maximally constrained soluble 1-SAT problem.
    pub fn max_constrained(n: usize) -> Self {
        CompactProblem { n, bad_bits: n }
    }

    pub fn new(n: usize, bad_bits: usize) -> Result<Self> {
        if bad_bits > n {
            return Err(Error::param(format!("bad_bits = {bad_bits} exceeds n = {n}")));
        }
        Ok(CompactProblem { n, bad_bits })
    }

    /// Average conflicts `m / 2`, the simple policy's default `c_start`.
    pub fn avg_conflicts(&self) -> Rational {
        Rational::new(self.bad_bits as i128, 2)
    }

    pub fn simple_policy(&self) -> PolicySpec {
        let kind = PolicyKind::SimpleThreshold { c_start: self.avg_conflicts() };
        PolicySpec { kind, max_steps: kind.step_cap() }
    }

    pub fn neighborhood_policy(&self) -> PolicySpec {
        PolicySpec::neighborhood_default(self.n)
    }
}

/// `ln |x|` for integers too large for `f64`.
fn ln_abs(x: &BigInt) -> f64 {
    let bits = x.bits();
    if bits < 1000 {
        return x.abs().to_f64().unwrap_or(f64::INFINITY).ln();
    }
    let drop = bits - 64;
    ((x.abs() >> drop).to_f64().unwrap_or(f64::INFINITY)).ln() + drop as f64 * std::f64::consts::LN_2
}

/// Orthonormal shell transform `T` for `m` shells-minus-one.
fn shell_transform(m: usize) -> DMatrix<f64> {
    let s = s_table(m);
    let binom = binomial_row(m);
    if m <= 1000 {
        let binom_f: Vec<f64> = binom.iter().map(|b| b.to_f64().unwrap_or(f64::INFINITY)).collect();
        let half_pow = 0.5f64.powi((m / 2) as i32) * if m % 2 == 1 { std::f64::consts::FRAC_1_SQRT_2 } else { 1.0 };
        DMatrix::from_fn(m + 1, m + 1, |b, c| {
            let sv = s[c][b].to_f64().unwrap_or(f64::INFINITY);
            sv * half_pow * (binom_f[b] / binom_f[c]).sqrt()
        })
    } else {
        let ln_binom: Vec<f64> = binom.iter().map(ln_abs).collect();
        let ln_half = 0.5 * m as f64 * std::f64::consts::LN_2;
        DMatrix::from_fn(m + 1, m + 1, |b, c| {
            let sv = &s[c][b];
            if sv.is_zero() {
                return 0.0;
            }
            let magnitude = (ln_abs(sv) + 0.5 * (ln_binom[b] - ln_binom[c]) - ln_half).exp();
            if sv.is_negative() {
                -magnitude
            } else {
                magnitude
            }
        })
    }
}

/// Shell-basis operators for one problem and mixer.
#[derive(Debug, Clone)]
pub struct CompactOperators {
    problem: CompactProblem,
    transform: DMatrix<f64>,
    taus: Vec<f64>,
}

impl CompactOperators {
    pub fn new(problem: CompactProblem, mixer: &MixerSpec) -> Result<Self> {
        if mixer.n != problem.n {
            return Err(Error::param(format!("mixer is for n = {}, problem has n = {}", mixer.n, problem.n)));
        }
        let m = problem.bad_bits;
        let taus = (0..=m).map(|a| mixer.tau(a)).collect();
        Ok(CompactOperators { problem, transform: shell_transform(m), taus })
    }

    pub fn problem(&self) -> &CompactProblem {
        &self.problem
    }

    /// The symmetric orthogonal shell transform `T`.
    pub fn transform(&self) -> &DMatrix<f64> {
        &self.transform
    }

    /// Mixing operator in the orthonormal shell basis, `T D T`.
    pub fn mixing_matrix(&self) -> DMatrix<f64> {
        let d = DMatrix::from_diagonal(&DVector::from_vec(self.taus.clone()));
        &self.transform * d * &self.transform
    }

    /// `a <- T D T a`.
    pub fn apply(&self, shells: &mut DVector<f64>) {
        let mut mid = &self.transform * &*shells;
        for (v, t) in mid.iter_mut().zip(&self.taus) {
            *v *= t;
        }
        self.transform.mul_to(&mid, shells);
    }
}

/// Shell amplitudes in the orthonormal basis.
#[derive(Debug, Clone, PartialEq)]
pub struct CompactState {
    problem: CompactProblem,
    shells: DVector<f64>,
}

impl CompactState {
    /// The uniform superposition.
    pub fn uniform(problem: CompactProblem) -> Self {
        let m = problem.bad_bits;
        let scale = BigInt::one() << m;
        let shells = binomial_row(m).iter().map(|b| ratio_to_f64(b, &scale).sqrt()).collect::<Vec<_>>();
        CompactState { problem, shells: DVector::from_vec(shells) }
    }

    /// Builds a state from per-assignment amplitudes `psi_c`.
    pub fn from_amplitudes(problem: CompactProblem, amps: &[f64]) -> Result<Self> {
        let sizes = shell_sizes_sqrt(&problem);
        if amps.len() != sizes.len() {
            return Err(Error::LengthMismatch { expected: sizes.len(), actual: amps.len() });
        }
        let shells = amps.iter().zip(&sizes).map(|(a, s)| a * s).collect::<Vec<_>>();
        Ok(CompactState { problem, shells: DVector::from_vec(shells) })
    }

    pub fn problem(&self) -> &CompactProblem {
        &self.problem
    }

    /// Orthonormal-basis amplitudes `sqrt(|shell c|) psi_c`.
    pub fn shells(&self) -> &DVector<f64> {
        &self.shells
    }

    /// Amplitude `psi_c` of any single assignment with `c` conflicts.
    pub fn amps(&self) -> Vec<f64> {
        self.shells.iter().zip(shell_sizes_sqrt(&self.problem)).map(|(a, s)| a / s).collect()
    }

    /// `sum_c |shell c| psi_c^2`.
    pub fn norm_sqr(&self) -> f64 {
        self.shells.norm_squared()
    }

    /// Probability of measuring a solution.
    pub fn p_soln(&self) -> f64 {
        self.shells[0] * self.shells[0]
    }
}

/// `sqrt(C(m, c) 2^(n - m))` for each shell, computed through logarithms.
fn shell_sizes_sqrt(problem: &CompactProblem) -> Vec<f64> {
    let free = (problem.n - problem.bad_bits) as f64 * std::f64::consts::LN_2;
    binomial_row(problem.bad_bits).iter().map(|b| (0.5 * (ln_abs(b) + free)).exp()).collect()
}

/// Probability per conflict count, `|shell c| psi_c^2`.
pub fn compact_histogram(state: &CompactState) -> Vec<f64> {
    state.shells.iter().map(|a| a * a).collect()
}

fn shell_sign(policy: &PolicySpec, c: usize, j: usize) -> f64 {
    let sign = match policy.kind {
        PolicyKind::SimpleThreshold { c_start } => simple_sign(c as u32, j, c_start),
        PolicyKind::Neighborhood { n_start } => neighborhood_sign(c as u32, j, n_start),
    };
    f64::from(sign)
}

/// Step-by-step shell evolution.
pub struct CompactTrial {
    ops: CompactOperators,
    policy: PolicySpec,
    state: CompactState,
    j: usize,
}

impl CompactTrial {
    pub fn new(problem: CompactProblem, policy: PolicySpec, mixer: &MixerSpec) -> Result<Self> {
        let ops = CompactOperators::new(problem, mixer)?;
        Ok(CompactTrial { ops, policy, state: CompactState::uniform(problem), j: 0 })
    }

    pub fn state(&self) -> &CompactState {
        &self.state
    }

    pub fn advance(&mut self) -> Result<()> {
        let j = self.j + 1;
        if j > self.policy.max_steps {
            return Err(Error::StepCap { cap: self.policy.max_steps, requested: j });
        }
        for (c, v) in self.state.shells.iter_mut().enumerate() {
            *v *= shell_sign(&self.policy, c, j);
        }
        self.ops.apply(&mut self.state.shells);
        self.j = j;
        Ok(())
    }
}

/// Shell-engine counterpart of [`crate::engine::run_trial`].
pub fn compact_run(
    problem: CompactProblem,
    policy: &PolicySpec,
    mixer: &MixerSpec,
    j_max: Option<usize>,
    histograms: bool,
) -> Result<RunResult> {
    let mut trial = CompactTrial::new(problem, *policy, mixer)?;
    let steps = j_max.map_or(policy.max_steps, |cap| cap.min(policy.max_steps));
    let mut probs = vec![trial.state().p_soln()];
    let mut hists = histograms.then(|| vec![compact_histogram(trial.state())]);
    let mut drift = 0.0f64;
    for _ in 0..steps {
        trial.advance()?;
        probs.push(trial.state().p_soln());
        drift = drift.max((trial.state().norm_sqr() - 1.0).abs());
        if let Some(h) = hists.as_mut() {
            h.push(compact_histogram(trial.state()));
        }
    }
    Ok(RunResult::new(probs, drift, hists))
}

/// `V^max` acting on per-assignment shell amplitudes, from the distance
/// coefficients: `V[b][c] = sum_d u_d C(b, (c+b-d)/2) C(n-b, (c-b+d)/2)`,
/// evaluated exactly and rounded once per entry.
pub fn build_v_max(n: usize, mixer: &MixerSpec) -> Result<DMatrix<f64>> {
    let scale = BigInt::one() << n;
    Ok(v_max_exact(n, mixer)?.map(|num| ratio_to_f64(&num, &scale)))
}

/// `V^max` conjugated into the orthonormal shell basis,
/// `sqrt(C(n,b) / C(n,c)) V[b][c]`, from the same exact sums.
pub fn build_v_max_normalized(n: usize, mixer: &MixerSpec) -> Result<DMatrix<f64>> {
    let exact = v_max_exact(n, mixer)?;
    let binom = binomial_row(n);
    let n_sq = BigInt::one() << (2 * n);
    Ok(DMatrix::from_fn(n + 1, n + 1, |b, c| {
        let v = &exact[(b, c)];
        let magnitude = ratio_to_f64(&(v * v * &binom[b]), &(&n_sq * &binom[c])).sqrt();
        if v.is_negative() {
            -magnitude
        } else {
            magnitude
        }
    }))
}

/// `2^n V^max` as exact integers.
fn v_max_exact(n: usize, mixer: &MixerSpec) -> Result<DMatrix<BigInt>> {
    if mixer.n != n {
        return Err(Error::param(format!("mixer is for n = {}, expected {n}", mixer.n)));
    }
    let u = u_numerators(mixer);
    let binom: Vec<Vec<BigInt>> = (0..=n).map(binomial_row).collect();
    let choose = |top: usize, k: i64| -> Option<&BigInt> {
        if k < 0 || k as usize > top {
            None
        } else {
            Some(&binom[top][k as usize])
        }
    };
    Ok(DMatrix::from_fn(n + 1, n + 1, |b, c| {
        let mut acc = BigInt::zero();
        let (bi, ci) = (b as i64, c as i64);
        for (d, ud) in u.iter().enumerate() {
            let di = d as i64;
            if (ci + bi - di) % 2 != 0 || ud.is_zero() {
                continue;
            }
            let shared = (ci + bi - di) / 2;
            let fresh = (ci - bi + di) / 2;
            if let (Some(x), Some(y)) = (choose(b, shared), choose(n - b, fresh)) {
                acc += ud * x * y;
            }
        }
        acc
    }))
}

/// `W^max[b][c] = S(c, b) / sqrt(N)`.
pub fn build_w_max(n: usize) -> DMatrix<f64> {
    let s = s_table(n);
    let scale = BigInt::one() << n;
    DMatrix::from_fn(n + 1, n + 1, |b, c| {
        let sv = &s[c][b];
        let magnitude = ratio_to_f64(&(sv * sv), &scale).sqrt();
        if sv.is_negative() {
            -magnitude
        } else {
            magnitude
        }
    })
}

/// `D^max[b] = tau(b)`.
pub fn build_d_max(mixer: &MixerSpec) -> Vec<f64> {
    mixer.taus()
}

/// Exact `C(n, c)` as `f64`, for callers converting histograms.
pub fn shell_size(n: usize, c: usize) -> f64 {
    ratio_to_f64(&binomial_big(n, c), &BigInt::one())
}
