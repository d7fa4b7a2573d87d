//! Bit-level k-SAT problems.
//!
//! Variable `V_i` (1-based) lives in bit `i - 1` of an assignment, so `V_1` is
//! the least significant bit. A clause is stored as the unique pattern of
//! values that falsifies it: an assignment `s` conflicts with a clause iff
//! `s & mask == value`.

use std::collections::HashSet;

use num_rational::Ratio;

use crate::error::{Error, Result};

/// A complete assignment of `n <= 64` variables, one bit per variable.
pub type Assignment = u64;

/// Largest variable count a [`SatProblem`] can represent.
pub const MAX_VARIABLES: usize = 64;

/// Number of 1-bits in `s`.
#[inline]
pub fn ones(s: Assignment) -> u32 {
    s.count_ones()
}

/// Hamming distance between two assignments.
#[inline]
pub fn hamming(r: Assignment, s: Assignment) -> u32 {
    (r ^ s).count_ones()
}

/// Mask with the low `n` bits set.
#[inline]
pub fn full_mask(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

/// The falsifying pattern of one clause.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ConflictPattern {
    mask: u64,
    value: u64,
}

impl ConflictPattern {
    pub fn new(mask: u64, value: u64) -> Result<Self> {
        if value & !mask != 0 {
            return Err(Error::Clause(format!("value {value:#b} has bits outside mask {mask:#b}")));
        }
        Ok(ConflictPattern { mask, value })
    }

    /// Builds the pattern from signed 1-based literals (DIMACS style).
    ///
    /// A positive literal `v` is falsified by `V_v = 0`, a negative one by
    /// `V_v = 1`.
    pub fn from_literals(literals: &[i64]) -> Result<Self> {
        let mut mask = 0u64;
        let mut value = 0u64;
        for &lit in literals {
            let var = lit.unsigned_abs();
            if lit == 0 || var > MAX_VARIABLES as u64 {
                return Err(Error::Clause(format!("literal {lit} out of range")));
            }
            let bit = 1u64 << (var - 1);
            if mask & bit != 0 {
                return Err(Error::Clause(format!("variable {var} appears twice in one clause")));
            }
            mask |= bit;
            if lit < 0 {
                value |= bit;
            }
        }
        Ok(ConflictPattern { mask, value })
    }

    /// Signed 1-based literals in ascending variable order.
    pub fn to_literals(&self) -> Vec<i64> {
        let mut out = Vec::with_capacity(self.mask.count_ones() as usize);
        let mut rest = self.mask;
        while rest != 0 {
            let bit = rest.trailing_zeros();
            let var = i64::from(bit) + 1;
            out.push(if self.value >> bit & 1 == 1 { -var } else { var });
            rest &= rest - 1;
        }
        out
    }

    #[inline]
    pub fn mask(&self) -> u64 {
        self.mask
    }

    #[inline]
    pub fn value(&self) -> u64 {
        self.value
    }

    #[inline]
    pub fn size(&self) -> u32 {
        self.mask.count_ones()
    }

    #[inline]
    pub fn conflicts_with(&self, s: Assignment) -> bool {
        s & self.mask == self.value
    }
}

/// A k-SAT instance: `n` variables and `m` distinct clauses of size `k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SatProblem {
    n: usize,
    k: usize,
    clauses: Vec<ConflictPattern>,
}

impl SatProblem {
    pub fn new(n: usize, k: usize, clauses: Vec<ConflictPattern>) -> Result<Self> {
        if n > MAX_VARIABLES {
            return Err(Error::Capacity { n, limit: MAX_VARIABLES });
        }
        if k > n || (k == 0 && !clauses.is_empty()) {
            return Err(Error::param(format!("clause size k = {k} invalid for n = {n}")));
        }
        let outside = !full_mask(n);
        let mut seen = HashSet::with_capacity(clauses.len());
        for (index, c) in clauses.iter().enumerate() {
            if c.mask & outside != 0 {
                return Err(Error::Clause(format!("clause {index} uses a variable above n = {n}")));
            }
            if c.size() as usize != k {
                return Err(Error::Clause(format!("clause {index} has {} literals, expected {k}", c.size())));
            }
            if !seen.insert(*c) {
                return Err(Error::DuplicateClause { index });
            }
        }
        Ok(SatProblem { n, k, clauses })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn k(&self) -> usize {
        self.k
    }

    /// Number of clauses.
    #[inline]
    pub fn m(&self) -> usize {
        self.clauses.len()
    }

    pub fn clauses(&self) -> &[ConflictPattern] {
        &self.clauses
    }

    pub fn count_conflicts(&self, s: Assignment) -> u32 {
        self.clauses.iter().filter(|c| c.conflicts_with(s)).count() as u32
    }

    pub fn is_solution(&self, s: Assignment) -> bool {
        self.clauses.iter().all(|c| !c.conflicts_with(s))
    }

    /// Conflict count of every assignment, indexed by assignment.
    ///
    /// Each clause touches exactly the `2^(n-k)` assignments extending its
    /// falsifying pattern, so the cost is `m * 2^(n-k)` increments.
    pub fn conflict_vector(&self, max_n: usize) -> Result<Vec<u32>> {
        if self.n > max_n {
            return Err(Error::Capacity { n: self.n, limit: max_n });
        }
        let mut counts = vec![0u32; 1usize << self.n];
        let full = full_mask(self.n);
        for c in &self.clauses {
            let free = full & !c.mask;
            let mut sub = 0u64;
            loop {
                counts[(c.value | sub) as usize] += 1;
                if sub == free {
                    break;
                }
                sub = sub.wrapping_sub(free) & free;
            }
        }
        Ok(counts)
    }

    /// Average conflicts per assignment, `m / 2^k`, exactly.
    pub fn avg_conflicts(&self) -> Ratio<i128> {
        Ratio::new(self.m() as i128, 1i128 << self.k)
    }

    /// Number of single-bit-flip neighbors of `s` with strictly fewer conflicts.
    pub fn n_better(&self, s: Assignment) -> u32 {
        let own = self.count_conflicts(s);
        (0..self.n).filter(|&i| self.count_conflicts(s ^ (1u64 << i)) < own).count() as u32
    }
}

/// Batch form of [`SatProblem::n_better`] over a precomputed conflict vector.
pub fn n_better_vector(conflicts: &[u32]) -> Vec<u32> {
    let n = conflicts.len().trailing_zeros() as usize;
    debug_assert!(conflicts.len().is_power_of_two());
    conflicts
        .iter()
        .enumerate()
        .map(|(s, &own)| (0..n).filter(|&i| conflicts[s ^ (1usize << i)] < own).count() as u32)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn two_variable_example() -> SatProblem {
        // V1 != 1 and V2 != 1
        let clauses = vec![ConflictPattern::new(0b01, 0b01).unwrap(), ConflictPattern::new(0b10, 0b10).unwrap()];
        SatProblem::new(2, 1, clauses).unwrap()
    }

    #[test]
    fn ones_cases() {
        assert_eq!(ones(0), 0);
        assert_eq!(ones(0b101), 2);
        assert_eq!(ones(full_mask(13)), 13);
    }

    #[test]
    fn hamming_cases() {
        assert_eq!(hamming(0b1011, 0b1011), 0);
        assert_eq!(hamming(0b00, 0b11), 2);
    }

    #[test]
    fn hamming_identity_exhaustive_n4() {
        for r in 0u64..16 {
            for s in 0u64..16 {
                let lhs = hamming(r, s) as i64;
                let rhs = ones(r) as i64 + ones(s) as i64 - 2 * ones(r & s) as i64;
                assert_eq!(lhs, rhs);
            }
        }
    }

    #[test]
    fn example_conflicts() {
        let p = two_variable_example();
        let counts: Vec<u32> = (0..4).map(|s| p.count_conflicts(s)).collect();
        assert_eq!(counts, vec![0, 1, 1, 2]);
        assert_eq!(p.conflict_vector(26).unwrap(), vec![0, 1, 1, 2]);
        assert!(p.is_solution(0b00));
        assert!(!p.is_solution(0b11));
        let nb: Vec<u32> = (0..4).map(|s| p.n_better(s)).collect();
        assert_eq!(nb, vec![0, 1, 1, 2]);
        assert_eq!(n_better_vector(&counts), nb);
        assert_eq!(p.avg_conflicts(), Ratio::from_integer(1));
    }

    #[test]
    fn clause_ending_in_100() {
        // V1 OR V2 OR NOT V3
        let c = ConflictPattern::from_literals(&[1, 2, -3]).unwrap();
        let p = SatProblem::new(5, 3, vec![c]).unwrap();
        for s in 0u64..32 {
            assert_eq!(p.count_conflicts(s) == 1, s & 0b111 == 0b100, "s = {s:05b}");
        }
        assert_eq!(c.to_literals(), vec![1, 2, -3]);
    }

    #[test]
    fn empty_problem() {
        let p = SatProblem::new(5, 3, vec![]).unwrap();
        assert!(p.conflict_vector(26).unwrap().iter().all(|&c| c == 0));
        assert!((0..32).all(|s| p.is_solution(s)));
        assert_eq!(p.avg_conflicts(), Ratio::from_integer(0));
    }

    #[test]
    fn avg_conflicts_is_exact() {
        let mut clauses = Vec::new();
        for mask in (0u64..1 << 12).filter(|m| m.count_ones() == 3).take(6) {
            for v in 0..8u64 {
                let value = pdep(v, mask);
                clauses.push(ConflictPattern::new(mask, value).unwrap());
            }
        }
        let p = SatProblem::new(12, 3, clauses).unwrap();
        assert_eq!(p.m(), 48);
        assert_eq!(p.avg_conflicts(), Ratio::from_integer(6));
        let p = SatProblem::new(12, 3, p.clauses()[..13].to_vec()).unwrap();
        assert_eq!(p.avg_conflicts(), Ratio::new(13, 8));
    }

    fn pdep(bits: u64, mask: u64) -> u64 {
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

    #[test]
    fn rejects_bad_clauses() {
        assert!(ConflictPattern::new(0b01, 0b10).is_err());
        assert!(ConflictPattern::from_literals(&[1, -1]).is_err());
        let c = ConflictPattern::new(0b01, 0).unwrap();
        assert_eq!(SatProblem::new(2, 1, vec![c, c]), Err(Error::DuplicateClause { index: 1 }));
        let wide = ConflictPattern::new(0b100, 0).unwrap();
        assert!(SatProblem::new(2, 1, vec![wide]).is_err());
        let pair = ConflictPattern::new(0b11, 0).unwrap();
        assert!(SatProblem::new(2, 1, vec![pair]).is_err());
    }

    #[test]
    fn conflict_vector_capacity() {
        let p = SatProblem::new(30, 3, vec![]).unwrap();
        assert_eq!(p.conflict_vector(26), Err(Error::Capacity { n: 30, limit: 26 }));
    }
}
