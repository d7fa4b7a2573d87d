//! Per-step phase rules.
//!
//! Both rules read only problem statistics (conflict counts, or the number
//! of strictly better neighbors) and the step index `j >= 1`, never
//! amplitudes.
//!
//! * simple threshold: invert `s` iff `conflicts(s) > c_start - (j - 1)`,
//!   compared against the exact rational threshold.
//! * neighborhood: at `j = 1` invert iff `|n_start - nbetter(s)| mod 4` is 2
//!   or 3; at `j > 1` keep the sign iff `n_start - nbetter(s)` is `j - 1` or
//!   `j - 2`, otherwise invert. Derived for even `n` only.

use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use num_traits::{Signed, ToPrimitive};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::sat::{n_better_vector, SatProblem};

/// Exact rational number, written as `p/q` or an integer (decimals such as
/// `6.25` are also accepted on input).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rational(pub Ratio<i128>);

impl Rational {
    pub fn integer(v: i128) -> Self {
        Rational(Ratio::from_integer(v))
    }

    pub fn new(num: i128, den: i128) -> Self {
        Rational(Ratio::new(num, den))
    }

    pub fn floor(&self) -> i128 {
        self.0.floor().to_integer()
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }
}

impl From<Ratio<i128>> for Rational {
    fn from(r: Ratio<i128>) -> Self {
        Rational(r)
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl FromStr for Rational {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::param(format!("not a rational number: {s:?}"));
        let s = s.trim();
        if let Some((num, den)) = s.split_once('/') {
            let num: i128 = num.trim().parse().map_err(|_| bad())?;
            let den: i128 = den.trim().parse().map_err(|_| bad())?;
            if den == 0 {
                return Err(bad());
            }
            return Ok(Rational::new(num, den));
        }
        if let Some((int, frac)) = s.split_once('.') {
            if frac.is_empty() || frac.len() > 30 || !frac.bytes().all(|b| b.is_ascii_digit()) {
                return Err(bad());
            }
            let negative = int.starts_with('-');
            let int: i128 = if int.is_empty() || int == "-" { 0 } else { int.parse().map_err(|_| bad())? };
            let scale = 10i128.pow(frac.len() as u32);
            let frac: i128 = frac.parse().map_err(|_| bad())?;
            let magnitude = int.abs() * scale + frac;
            return Ok(Rational::new(if negative { -magnitude } else { magnitude }, scale));
        }
        s.parse::<i128>().map(Rational::integer).map_err(|_| bad())
    }
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PolicyKind {
    SimpleThreshold { c_start: Rational },
    Neighborhood { n_start: usize },
}

impl PolicyKind {
    pub fn name(&self) -> &'static str {
        match self {
            PolicyKind::SimpleThreshold { .. } => "simple-threshold",
            PolicyKind::Neighborhood { .. } => "neighborhood",
        }
    }

    /// Most steps before the rule stops changing relative amplitudes.
    pub fn step_cap(&self) -> usize {
        match self {
            PolicyKind::SimpleThreshold { c_start } => (c_start.floor().max(0) as usize) + 1,
            PolicyKind::Neighborhood { n_start } => n_start + 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolicySpec {
    #[serde(flatten)]
    pub kind: PolicyKind,
    pub max_steps: usize,
}

impl PolicySpec {
    /// `max_steps` defaults to the policy's step cap.
    pub fn new(kind: PolicyKind, max_steps: Option<usize>) -> Result<Self> {
        if let PolicyKind::SimpleThreshold { c_start } = kind {
            if c_start.0.is_negative() {
                return Err(Error::param(format!("c_start = {c_start} must be non-negative")));
            }
        }
        let cap = kind.step_cap();
        let max_steps = max_steps.unwrap_or(cap);
        if max_steps == 0 {
            return Err(Error::param("max_steps must be positive"));
        }
        if max_steps > cap {
            return Err(Error::StepCap { cap, requested: max_steps });
        }
        Ok(PolicySpec { kind, max_steps })
    }

    /// Simple threshold with `c_start = m / 2^k`.
    pub fn simple_default(problem: &SatProblem) -> Self {
        let kind = PolicyKind::SimpleThreshold { c_start: problem.avg_conflicts().into() };
        PolicySpec { kind, max_steps: kind.step_cap() }
    }

    /// Neighborhood rule with `n_start = floor(n / 2)`.
    pub fn neighborhood_default(n: usize) -> Self {
        let kind = PolicyKind::Neighborhood { n_start: n / 2 };
        PolicySpec { kind, max_steps: kind.step_cap() }
    }

    /// Caveat to surface alongside results, if any.
    pub fn caveat(&self, n: usize) -> Option<&'static str> {
        match self.kind {
            PolicyKind::Neighborhood { .. } if n % 2 == 1 => Some("neighborhood policy is derived for even n only"),
            _ => None,
        }
    }
}

/// Signs `+1` / `-1`, one per assignment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhaseVector(Vec<i8>);

impl PhaseVector {
    pub fn signs(&self) -> &[i8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Multiplies `x` elementwise by the signs.
    pub fn apply(&self, x: &mut [f64]) {
        for (v, &s) in x.iter_mut().zip(&self.0) {
            if s < 0 {
                *v = -*v;
            }
        }
    }
}

/// Sign of the simple threshold rule for an assignment with `conflicts`.
#[inline]
pub fn simple_sign(conflicts: u32, j: usize, c_start: Rational) -> i8 {
    // integer c exceeds rational t iff c > floor(t)
    let threshold = (c_start.0 - Ratio::from_integer(j as i128 - 1)).floor().to_integer();
    if i128::from(conflicts) > threshold {
        -1
    } else {
        1
    }
}

/// Sign of the neighborhood rule for an assignment with `nbetter` strictly
/// better neighbors.
#[inline]
pub fn neighborhood_sign(nbetter: u32, j: usize, n_start: usize) -> i8 {
    let offset = n_start as i64 - i64::from(nbetter);
    if j <= 1 {
        if offset.abs() % 4 >= 2 {
            -1
        } else {
            1
        }
    } else if offset == j as i64 - 1 || offset == j as i64 - 2 {
        1
    } else {
        -1
    }
}

pub fn simple_phases(conflicts: &[u32], j: usize, c_start: Rational) -> PhaseVector {
    assert!(j >= 1, "steps are numbered from 1");
    let threshold = (c_start.0 - Ratio::from_integer(j as i128 - 1)).floor().to_integer();
    PhaseVector(conflicts.iter().map(|&c| if i128::from(c) > threshold { -1 } else { 1 }).collect())
}

pub fn neighborhood_phases(nbetter: &[u32], j: usize, n_start: usize) -> PhaseVector {
    assert!(j >= 1, "steps are numbered from 1");
    PhaseVector(nbetter.iter().map(|&b| neighborhood_sign(b, j, n_start)).collect())
}

/// Precomputed statistics for one problem and policy; yields the phase
/// vector of any step without touching amplitudes.
#[derive(Debug, Clone)]
pub struct PhaseSchedule {
    spec: PolicySpec,
    /// conflict counts (simple) or better-neighbor counts (neighborhood)
    stats: Vec<u32>,
}

impl PhaseSchedule {
    pub fn new(problem: &SatProblem, spec: PolicySpec, max_n: usize) -> Result<Self> {
        let conflicts = problem.conflict_vector(max_n)?;
        Ok(Self::from_conflicts(&conflicts, spec))
    }

    pub fn from_conflicts(conflicts: &[u32], spec: PolicySpec) -> Self {
        let stats = match spec.kind {
            PolicyKind::SimpleThreshold { .. } => conflicts.to_vec(),
            PolicyKind::Neighborhood { .. } => n_better_vector(conflicts),
        };
        PhaseSchedule { spec, stats }
    }

    pub fn spec(&self) -> &PolicySpec {
        &self.spec
    }

    /// Number of steps.
    pub fn steps(&self) -> usize {
        self.spec.max_steps
    }

    pub fn phases(&self, j: usize) -> PhaseVector {
        match self.spec.kind {
            PolicyKind::SimpleThreshold { c_start } => simple_phases(&self.stats, j, c_start),
            PolicyKind::Neighborhood { n_start } => neighborhood_phases(&self.stats, j, n_start),
        }
    }

    /// Applies the step-`j` signs to `x` in place.
    pub fn apply(&self, j: usize, x: &mut [f64]) {
        match self.spec.kind {
            PolicyKind::SimpleThreshold { c_start } => {
                let threshold = (c_start.0 - Ratio::from_integer(j as i128 - 1)).floor().to_integer();
                for (v, &c) in x.iter_mut().zip(&self.stats) {
                    if i128::from(c) > threshold {
                        *v = -*v;
                    }
                }
            }
            PolicyKind::Neighborhood { n_start } => {
                for (v, &b) in x.iter_mut().zip(&self.stats) {
                    if neighborhood_sign(b, j, n_start) < 0 {
                        *v = -*v;
                    }
                }
            }
        }
    }
}

/// Phase vectors for steps `1..=max_steps`.
pub fn phase_schedule(problem: &SatProblem, spec: PolicySpec, max_n: usize) -> Result<Vec<PhaseVector>> {
    let schedule = PhaseSchedule::new(problem, spec, max_n)?;
    Ok((1..=schedule.steps()).map(|j| schedule.phases(j)).collect())
}
