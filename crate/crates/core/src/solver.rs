//! Complete depth-first backtracking over variables `V_1..V_n`.
//!
//! Variables are assigned in index order. After assigning `V_i` every clause
//! whose highest variable is `V_i` becomes decidable and is checked; a
//! falsified clause prunes the subtree. When no clause mentions the remaining
//! variables, the subtree is counted in closed form.

use crate::sat::{Assignment, ConflictPattern, SatProblem};

/// Search mode for [`backtrack_solve`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveMode {
    First,
    Count,
}

/// Outcome of a backtracking search.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveOutcome {
    /// A witness, or `None` if the problem is insoluble.
    Witness(Option<Assignment>),
    /// Exact number of solutions.
    Count(u128),
}

impl SolveOutcome {
    pub fn witness(self) -> Option<Assignment> {
        match self {
            SolveOutcome::Witness(w) => w,
            SolveOutcome::Count(_) => None,
        }
    }

    pub fn count(self) -> Option<u128> {
        match self {
            SolveOutcome::Count(c) => Some(c),
            SolveOutcome::Witness(_) => None,
        }
    }
}

struct Search<'a> {
    n: usize,
    /// clauses grouped by their highest variable
    closing: Vec<Vec<&'a ConflictPattern>>,
    /// highest variable index used by any clause, plus one
    depth_needed: usize,
}

impl Search<'_> {
    fn first(&self, depth: usize, partial: Assignment) -> Option<Assignment> {
        if depth >= self.depth_needed {
            return Some(partial);
        }
        for bit in [0u64, 1] {
            let next = partial | (bit << depth);
            if self.closing[depth].iter().all(|c| !c.conflicts_with(next)) {
                if let Some(found) = self.first(depth + 1, next) {
                    return Some(found);
                }
            }
        }
        None
    }

    fn count(&self, depth: usize, partial: Assignment) -> u128 {
        if depth >= self.depth_needed {
            return 1u128 << (self.n - depth);
        }
        let mut total = 0;
        for bit in [0u64, 1] {
            let next = partial | (bit << depth);
            if self.closing[depth].iter().all(|c| !c.conflicts_with(next)) {
                total += self.count(depth + 1, next);
            }
        }
        total
    }
}

/// Finds a solution or counts all solutions.
pub fn backtrack_solve(problem: &SatProblem, mode: SolveMode) -> SolveOutcome {
    let n = problem.n();
    let mut closing: Vec<Vec<&ConflictPattern>> = vec![Vec::new(); n.max(1)];
    let mut depth_needed = 0;
    for c in problem.clauses() {
        let top = 63 - c.mask().leading_zeros() as usize;
        closing[top].push(c);
        depth_needed = depth_needed.max(top + 1);
    }
    let search = Search { n, closing, depth_needed };
    match mode {
        SolveMode::First => SolveOutcome::Witness(search.first(0, 0)),
        SolveMode::Count => SolveOutcome::Count(search.count(0, 0)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sat::ConflictPattern;

    #[test]
    fn two_variable_example() {
        let clauses = vec![ConflictPattern::new(0b01, 0b01).unwrap(), ConflictPattern::new(0b10, 0b10).unwrap()];
        let p = SatProblem::new(2, 1, clauses).unwrap();
        assert_eq!(backtrack_solve(&p, SolveMode::First), SolveOutcome::Witness(Some(0)));
        assert_eq!(backtrack_solve(&p, SolveMode::Count), SolveOutcome::Count(1));
    }

    #[test]
    fn empty_problem_counts_everything() {
        let p = SatProblem::new(7, 3, vec![]).unwrap();
        assert_eq!(backtrack_solve(&p, SolveMode::Count).count(), Some(128));
        assert_eq!(backtrack_solve(&p, SolveMode::First).witness(), Some(0));
        let p = SatProblem::new(0, 0, vec![]).unwrap();
        assert_eq!(backtrack_solve(&p, SolveMode::Count).count(), Some(1));
    }

    #[test]
    fn insoluble_problem() {
        // all four sign patterns on V1, V3
        let clauses = (0..4u64)
            .map(|v| ConflictPattern::new(0b101, (v & 1) | ((v >> 1) << 2)).unwrap())
            .collect();
        let p = SatProblem::new(4, 2, clauses).unwrap();
        assert_eq!(backtrack_solve(&p, SolveMode::First).witness(), None);
        assert_eq!(backtrack_solve(&p, SolveMode::Count).count(), Some(0));
    }
}
