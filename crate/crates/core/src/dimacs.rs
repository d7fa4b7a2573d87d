//! DIMACS CNF import and export.
//!
//! Variable `i` in the file is `V_i`, i.e. bit `i - 1` of an assignment.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::sat::{ConflictPattern, SatProblem};

/// Parses a DIMACS CNF document.
///
/// All clauses must have the same size. `k_if_empty` supplies the clause
/// size for a formula without clauses (DIMACS cannot express it).
pub fn parse(text: &str, k_if_empty: usize) -> Result<SatProblem> {
    let mut header: Option<(usize, usize)> = None;
    let mut clauses = Vec::new();
    let mut current: Vec<i64> = Vec::new();
    let mut clause_line = 0;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('c') {
            continue;
        }
        if line.starts_with('%') {
            // SATLIB end marker
            break;
        }
        if line.starts_with('p') {
            if header.is_some() {
                return Err(Error::Dimacs { line: line_no, msg: "second problem line".into() });
            }
            let parts: Vec<&str> = line.split_whitespace().collect();
            if parts.len() != 4 || parts[1] != "cnf" {
                return Err(Error::Dimacs { line: line_no, msg: format!("malformed problem line {line:?}") });
            }
            let n = parse_usize(parts[2], line_no)?;
            let m = parse_usize(parts[3], line_no)?;
            header = Some((n, m));
            continue;
        }
        let (n, _) = header.ok_or(Error::Dimacs { line: line_no, msg: "clause before problem line".into() })?;
        for token in line.split_whitespace() {
            let lit: i64 = token
                .parse()
                .map_err(|_| Error::Dimacs { line: line_no, msg: format!("bad literal {token:?}") })?;
            if lit == 0 {
                let pattern = ConflictPattern::from_literals(&current)
                    .map_err(|e| Error::Dimacs { line: line_no, msg: e.to_string() })?;
                clauses.push((pattern, line_no));
                current.clear();
                continue;
            }
            if lit.unsigned_abs() as usize > n {
                return Err(Error::Dimacs { line: line_no, msg: format!("literal {lit} exceeds n = {n}") });
            }
            if current.is_empty() {
                clause_line = line_no;
            }
            current.push(lit);
        }
    }

    let (n, m) = header.ok_or(Error::Dimacs { line: 0, msg: "missing problem line".into() })?;
    if !current.is_empty() {
        return Err(Error::Dimacs { line: clause_line, msg: "clause not terminated by 0".into() });
    }
    if clauses.len() != m {
        return Err(Error::Dimacs { line: 0, msg: format!("header declares {m} clauses, found {}", clauses.len()) });
    }
    let k = clauses.first().map_or(k_if_empty, |(c, _)| c.size() as usize);
    if let Some((c, line)) = clauses.iter().find(|(c, _)| c.size() as usize != k) {
        return Err(Error::Dimacs { line: *line, msg: format!("clause of size {} in a {k}-SAT formula", c.size()) });
    }
    SatProblem::new(n, k, clauses.into_iter().map(|(c, _)| c).collect())
}

fn parse_usize(token: &str, line: usize) -> Result<usize> {
    token.parse().map_err(|_| Error::Dimacs { line, msg: format!("bad integer {token:?}") })
}

/// Serializes a problem in DIMACS CNF, literals in ascending variable order.
pub fn write(problem: &SatProblem) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "p cnf {} {}", problem.n(), problem.m());
    for clause in problem.clauses() {
        for lit in clause.to_literals() {
            let _ = write!(out, "{lit} ");
        }
        out.push_str("0\n");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_variable_example_round_trip() {
        let text = "c example\np cnf 2 2\n-1 0\n-2 0\n";
        let p = parse(text, 1).unwrap();
        assert_eq!(p.n(), 2);
        assert_eq!(p.k(), 1);
        let counts: Vec<u32> = (0..4).map(|s| p.count_conflicts(s)).collect();
        assert_eq!(counts, vec![0, 1, 1, 2]);
        assert_eq!(write(&p), "p cnf 2 2\n-1 0\n-2 0\n");
    }

    #[test]
    fn clauses_may_span_lines() {
        let p = parse("p cnf 3 2\n1 2\n-3 0 -1\n2 3 0\n%\n0\n", 3).unwrap();
        assert_eq!(p.m(), 2);
        assert_eq!(p.clauses()[0].to_literals(), vec![1, 2, -3]);
        assert_eq!(p.clauses()[1].to_literals(), vec![-1, 2, 3]);
    }

    #[test]
    fn duplicate_clause_is_an_error() {
        let err = parse("p cnf 3 2\n1 -2 0\n-2 1 0\n", 2).unwrap_err();
        assert_eq!(err, Error::DuplicateClause { index: 1 });
    }

    #[test]
    fn malformed_inputs() {
        assert!(parse("1 2 0\n", 2).is_err());
        assert!(parse("p cnf 3 1\n1 2\n", 2).is_err());
        assert!(parse("p cnf 3 2\n1 2 0\n", 2).is_err());
        assert!(parse("p cnf 3 2\n1 2 0\n1 2 3 0\n", 2).is_err());
        assert!(parse("p cnf 2 1\n1 3 0\n", 2).is_err());
        assert!(parse("p cnf 2 1\n1 -1 0\n", 2).is_err());
        assert!(parse("p cnf 2 1\n1 x 0\n", 2).is_err());
    }

    #[test]
    fn empty_formula_takes_hint() {
        let p = parse("p cnf 4 0\n", 3).unwrap();
        assert_eq!((p.n(), p.k(), p.m()), (4, 3, 0));
    }
}
