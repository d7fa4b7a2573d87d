//! Slow reference implementations used to cross-check the fast paths.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::mixer::{dense_u, MixerSpec};
use crate::phase::{PhaseSchedule, PolicySpec};
use crate::sat::{Assignment, SatProblem};

/// One step `psi' = U (rho . psi)` by dense matrix multiplication.
pub fn dense_step(u: &DMatrix<f64>, phases: &[i8], x: &[f64]) -> Result<Vec<f64>> {
    if phases.len() != x.len() {
        return Err(Error::LengthMismatch { expected: x.len(), actual: phases.len() });
    }
    if u.ncols() != x.len() {
        return Err(Error::LengthMismatch { expected: u.ncols(), actual: x.len() });
    }
    let v = DVector::from_iterator(x.len(), x.iter().zip(phases).map(|(a, p)| a * f64::from(*p)));
    Ok((u * v).iter().copied().collect())
}

/// Every state of a trial, `psi^(0)..=psi^(steps)`, via dense matrices.
pub fn dense_trajectory(
    problem: &SatProblem,
    policy: &PolicySpec,
    mixer: &MixerSpec,
    steps: usize,
    dense_limit: usize,
) -> Result<Vec<Vec<f64>>> {
    let u = dense_u(mixer, dense_limit)?;
    let conflicts = exhaustive_conflicts(problem, dense_limit)?;
    let schedule = PhaseSchedule::from_conflicts(&conflicts, *policy);
    let len = conflicts.len();
    let mut x = vec![1.0 / (len as f64).sqrt(); len];
    let mut out = vec![x.clone()];
    for j in 1..=steps.min(schedule.steps()) {
        x = dense_step(&u, schedule.phases(j).signs(), &x)?;
        out.push(x.clone());
    }
    Ok(out)
}

/// Conflict counts by checking every clause against every assignment.
pub fn exhaustive_conflicts(problem: &SatProblem, max_n: usize) -> Result<Vec<u32>> {
    if problem.n() > max_n {
        return Err(Error::Capacity { n: problem.n(), limit: max_n });
    }
    Ok((0..1u64 << problem.n()).map(|s| problem.count_conflicts(s)).collect())
}

/// Every solution, by enumeration.
pub fn exhaustive_solutions(problem: &SatProblem, max_n: usize) -> Result<Vec<Assignment>> {
    Ok(exhaustive_conflicts(problem, max_n)?
        .iter()
        .enumerate()
        .filter(|(_, &c)| c == 0)
        .map(|(s, _)| s as Assignment)
        .collect())
}

/// Aggregates a dense operator onto conflict shells: entry `(b, c)` is
/// `U[r][s]` summed over `s` with `c` conflicts, for a fixed `r` with `b`.
pub fn shell_aggregate(u: &DMatrix<f64>, conflicts: &[u32], shells: usize) -> Result<DMatrix<f64>> {
    if u.ncols() != conflicts.len() {
        return Err(Error::LengthMismatch { expected: u.ncols(), actual: conflicts.len() });
    }
    let mut out = DMatrix::zeros(shells, shells);
    for b in 0..shells {
        let Some(r) = conflicts.iter().position(|&c| c as usize == b) else { continue };
        for (s, &c) in conflicts.iter().enumerate() {
            out[(b, c as usize)] += u[(r, s)];
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{run_trial, TrialOptions};
    use crate::gen::gen_max_constrained_1sat;
    use crate::sat::ConflictPattern;

    #[test]
    fn dense_trajectory_of_worked_example() {
        let clauses = vec![ConflictPattern::new(1, 1).unwrap(), ConflictPattern::new(2, 2).unwrap()];
        let problem = SatProblem::new(2, 1, clauses).unwrap();
        let traj = dense_trajectory(&problem, &PolicySpec::simple_default(&problem), &MixerSpec::new(2), 1, 8).unwrap();
        assert_eq!(traj.len(), 2);
        for (a, b) in traj[1].iter().zip([1.0, 0.0, 0.0, 0.0]) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn dense_agrees_with_fast_engine() {
        let problem = gen_max_constrained_1sat(6, 0b101100).unwrap().problem;
        let policy = PolicySpec::neighborhood_default(6);
        let mixer = MixerSpec::new(6);
        let traj = dense_trajectory(&problem, &policy, &mixer, 10, 8).unwrap();
        let res = run_trial(&problem, &policy, &mixer, &TrialOptions::default()).unwrap();
        for (j, x) in traj.iter().enumerate() {
            assert!((x[0b101100] * x[0b101100] - res.p_soln_by_step[j]).abs() < 1e-12);
        }
    }

    #[test]
    fn exhaustive_helpers() {
        let problem = gen_max_constrained_1sat(4, 3).unwrap().problem;
        assert_eq!(exhaustive_solutions(&problem, 8).unwrap(), vec![3]);
        assert!(exhaustive_conflicts(&problem, 3).is_err());
    }

    #[test]
    fn length_checks() {
        let u = DMatrix::<f64>::identity(4, 4);
        assert!(dense_step(&u, &[1, 1], &[0.0; 4]).is_err());
        assert!(shell_aggregate(&u, &[0, 1], 2).is_err());
    }
}
