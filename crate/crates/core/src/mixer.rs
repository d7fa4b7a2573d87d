//! The Hamming-distance mixing operator `U = W D W`.
//!
//! `W = Ŵ / sqrt(N)` is the normalized Walsh-Hadamard matrix and `D` is
//! diagonal with `D[r][r] = tau(ones(r))`, where `tau(h) = +1` for
//! `h <= alpha` and `-1` above. `U[r][s]` depends only on `d = hamming(r, s)`
//! and equals `u_d = (1/N) sum_h tau(h) S(h, d)` with the Krawtchouk-type
//! coefficients `S(h, d) = sum_z (-1)^z C(d, z) C(n - d, h - z)`.
//!
//! The default `alpha = floor(n / 2)` maximizes the neighbor coefficient `u_1`.

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::combinatorics::{binomial_big, ratio_to_f64};
use crate::error::{Error, Result};
use crate::fwht::{fwht, fwht_par};
use crate::sat::hamming;

/// Largest `n` for which dense `2^n x 2^n` matrices are built by default.
pub const DEFAULT_DENSE_LIMIT: usize = 12;

/// Vectors at least this long use the parallel transform.
const PAR_THRESHOLD: usize = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MixerSpec {
    pub n: usize,
    /// `tau(h) = +1` for `h <= alpha`, else `-1`.
    pub alpha: usize,
}

impl MixerSpec {
    /// The maximum-neighbor mixer, `alpha = floor(n / 2)`.
    pub fn new(n: usize) -> Self {
        MixerSpec { n, alpha: n / 2 }
    }

    pub fn with_alpha(n: usize, alpha: usize) -> Result<Self> {
        if alpha > n {
            return Err(Error::param(format!("alpha = {alpha} must lie in [0, {n}]")));
        }
        Ok(MixerSpec { n, alpha })
    }

    #[inline]
    pub fn tau(&self, h: usize) -> f64 {
        if h <= self.alpha {
            1.0
        } else {
            -1.0
        }
    }

    pub fn taus(&self) -> Vec<f64> {
        (0..=self.n).map(|h| self.tau(h)).collect()
    }
}

/// `S(h, d)` for `n` variables by direct summation.
pub fn s_coefficient(n: usize, h: usize, d: usize) -> BigInt {
    assert!(h <= n && d <= n, "h and d must lie in [0, n]");
    let mut acc = BigInt::zero();
    for z in 0..=d.min(h) {
        let term = binomial_big(d, z) * binomial_big(n - d, h - z);
        if z % 2 == 0 {
            acc += term;
        } else {
            acc -= term;
        }
    }
    acc
}

/// All `S(h, d)` as `table[h][d]`.
///
/// Column `d` holds the coefficients of `(1 - x)^d (1 + x)^(n - d)`; moving
/// from `d` to `d + 1` multiplies by `(1 - x) / (1 + x)`, which gives
/// `S(h, d+1) = S(h, d) - S(h-1, d) - S(h-1, d+1)` in exact arithmetic.
pub fn s_table(n: usize) -> Vec<Vec<BigInt>> {
    let mut table = vec![vec![BigInt::zero(); n + 1]; n + 1];
    for (h, row) in table.iter_mut().enumerate() {
        row[0] = binomial_big(n, h);
    }
    for d in 0..n {
        table[0][d + 1] = BigInt::one();
        for h in 1..=n {
            let next = &table[h][d] - &table[h - 1][d] - &table[h - 1][d + 1];
            table[h][d + 1] = next;
        }
    }
    table
}

/// `N u_d` for `d = 0..=n` as exact integers.
pub fn u_numerators(spec: &MixerSpec) -> Vec<BigInt> {
    let table = s_table(spec.n);
    (0..=spec.n)
        .map(|d| {
            let mut acc = BigInt::zero();
            for (h, row) in table.iter().enumerate() {
                if h <= spec.alpha {
                    acc += &row[d];
                } else {
                    acc -= &row[d];
                }
            }
            acc
        })
        .collect()
}

/// Distance coefficients `u_0..=u_n`, computed exactly then divided once.
pub fn u_coefficients(spec: &MixerSpec) -> Vec<f64> {
    let scale = BigInt::one() << spec.n;
    u_numerators(spec).iter().map(|num| ratio_to_f64(num, &scale)).collect()
}

/// `(2 / N) C(n - 1, floor(n / 2))`, the largest achievable `u_1`.
pub fn u1_closed_form(n: usize) -> f64 {
    assert!(n >= 1);
    ratio_to_f64(&(binomial_big(n - 1, n / 2) * 2u32), &(BigInt::one() << n))
}

/// Checks the sign structure of the exact `u_d` at default `alpha`: for even
/// `n`, `u_d < 0` iff `d mod 4` is 2 or 3; for odd `n`, `u_d` vanishes at
/// even `d`, is positive at `d = 1 mod 4` and negative at `d = 3 mod 4`.
pub fn sign_pattern_holds(spec: &MixerSpec) -> bool {
    let odd = spec.n % 2 == 1;
    u_numerators(spec).iter().enumerate().all(|(d, u)| match (odd, d % 4) {
        (false, 2 | 3) | (true, 3) => u < &BigInt::zero(),
        (false, _) | (true, 1) => u > &BigInt::zero(),
        (true, _) => u.is_zero(),
    })
}

/// Fast application of the mixing operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Mixer {
    spec: MixerSpec,
}

impl Mixer {
    pub fn new(spec: MixerSpec) -> Self {
        Mixer { spec }
    }

    pub fn spec(&self) -> &MixerSpec {
        &self.spec
    }

    /// `x <- (1/N) Ŵ D Ŵ x` in `O(n 2^n)`.
    pub fn apply(&self, x: &mut [f64]) -> Result<()> {
        let len = 1usize << self.spec.n;
        if x.len() != len {
            return Err(Error::LengthMismatch { expected: len, actual: x.len() });
        }
        let transform = if len >= PAR_THRESHOLD { fwht_par } else { fwht };
        transform(x)?;
        let inv_n = 1.0 / len as f64;
        let alpha = self.spec.alpha as u32;
        for (r, v) in x.iter_mut().enumerate() {
            if (r as u64).count_ones() > alpha {
                *v *= -inv_n;
            } else {
                *v *= inv_n;
            }
        }
        transform(x)
    }
}

/// Returns `U x` for a borrowed input.
pub fn apply_u(spec: &MixerSpec, x: &[f64]) -> Result<Vec<f64>> {
    let mut out = x.to_vec();
    Mixer::new(*spec).apply(&mut out)?;
    Ok(out)
}

fn check_dense(n: usize, dense_limit: usize) -> Result<()> {
    if n > dense_limit {
        return Err(Error::Capacity { n, limit: dense_limit });
    }
    Ok(())
}

/// The full `2^n x 2^n` mixing matrix in binary order, `U[r][s] = u_{d(r,s)}`.
pub fn dense_u(spec: &MixerSpec, dense_limit: usize) -> Result<DMatrix<f64>> {
    check_dense(spec.n, dense_limit)?;
    let u = u_coefficients(spec);
    let len = 1usize << spec.n;
    Ok(DMatrix::from_fn(len, len, |r, s| u[hamming(r as u64, s as u64) as usize]))
}

/// Dense unnormalized Walsh-Hadamard matrix `Ŵ`.
pub fn dense_walsh(n: usize, dense_limit: usize) -> Result<DMatrix<f64>> {
    check_dense(n, dense_limit)?;
    let len = 1usize << n;
    Ok(DMatrix::from_fn(len, len, |r, s| if (r & s).count_ones() % 2 == 0 { 1.0 } else { -1.0 }))
}

/// Dense `D` with `D[r][r] = tau(ones(r))`.
pub fn dense_diagonal(spec: &MixerSpec, dense_limit: usize) -> Result<DMatrix<f64>> {
    check_dense(spec.n, dense_limit)?;
    let len = 1usize << spec.n;
    Ok(DMatrix::from_fn(len, len, |r, s| if r == s { spec.tau(r.count_ones() as usize) } else { 0.0 }))
}

/// Renders a matrix as CSV, one row per line.
pub fn matrix_to_csv(m: &DMatrix<f64>) -> String {
    let mut out = String::new();
    for r in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|c| format!("{}", m[(r, c)])).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// `S_h(r, s)` straight from its definition: a sum over all `t` with
    /// `h` one-bits.
    fn s_by_enumeration(n: usize, h: usize, r: u64, s: u64) -> i64 {
        (0u64..1 << n)
            .filter(|t| t.count_ones() as usize == h)
            .map(|t| if ((r & t).count_ones() + (s & t).count_ones()).is_multiple_of(2) { 1 } else { -1 })
            .sum()
    }

    #[test]
    fn s_coefficient_small_cases() {
        for n in 1..=10 {
            assert_eq!(s_coefficient(n, 0, 1), BigInt::one());
            for h in 0..=n {
                assert_eq!(s_coefficient(n, h, 0), binomial_big(n, h));
            }
        }
        // n = 2, d = 1 via r = 00, s = 01; d = 2 via r = 00, s = 11
        let expect = [((1, 1), 0), ((2, 1), -1), ((1, 2), -2), ((2, 2), 1)];
        for ((h, d), v) in expect {
            let s = if d == 1 { 0b01 } else { 0b11 };
            assert_eq!(s_by_enumeration(2, h, 0, s), v);
            assert_eq!(s_coefficient(2, h, d), BigInt::from(v));
        }
    }

    #[test]
    fn s_coefficient_matches_enumeration() {
        for n in 1..=6 {
            for h in 0..=n {
                for r in 0u64..1 << n {
                    for s in 0u64..1 << n {
                        let d = hamming(r, s) as usize;
                        assert_eq!(s_coefficient(n, h, d), BigInt::from(s_by_enumeration(n, h, r, s)));
                    }
                }
            }
        }
    }

    #[test]
    fn s_table_matches_direct_sum() {
        for n in [0, 1, 2, 5, 13, 40] {
            let table = s_table(n);
            for h in 0..=n {
                for d in 0..=n {
                    assert_eq!(table[h][d], s_coefficient(n, h, d), "n={n} h={h} d={d}");
                }
            }
        }
    }

    #[test]
    fn two_variable_coefficients() {
        assert_eq!(u_coefficients(&MixerSpec::new(2)), vec![0.5, 0.5, -0.5]);
    }

    #[test]
    fn fig1_neighbor_values() {
        let u8 = u_coefficients(&MixerSpec::new(8))[1];
        let u20 = u_coefficients(&MixerSpec::new(20))[1];
        assert!((u8 - 0.27).abs() < 0.005, "{u8}");
        assert!((u20 - 0.18).abs() < 0.005, "{u20}");
    }

    #[test]
    fn closed_form_u1_exact() {
        for n in 1..=30 {
            let nu1 = &u_numerators(&MixerSpec::new(n))[1];
            assert_eq!(*nu1, binomial_big(n - 1, n / 2) * 2u32, "n={n}");
            assert_eq!(u_coefficients(&MixerSpec::new(n))[1], u1_closed_form(n));
        }
    }

    #[test]
    fn sign_patterns() {
        for n in (4..=20).step_by(2) {
            for (d, u) in u_coefficients(&MixerSpec::new(n)).into_iter().enumerate() {
                if d % 4 >= 2 {
                    assert!(u < 0.0, "n={n} d={d} u={u}");
                } else {
                    assert!(u > 0.0, "n={n} d={d} u={u}");
                }
            }
        }
        for n in (3..=19).step_by(2) {
            for (d, num) in u_numerators(&MixerSpec::new(n)).into_iter().enumerate() {
                match d % 4 {
                    1 => assert!(num > BigInt::zero()),
                    3 => assert!(num < BigInt::zero()),
                    _ => assert!(num.is_zero(), "n={n} d={d}"),
                }
            }
        }
    }

    #[test]
    fn sign_pattern_check() {
        assert!((1..=20).all(|n| sign_pattern_holds(&MixerSpec::new(n))));
        assert!(!sign_pattern_holds(&MixerSpec::with_alpha(6, 6).unwrap()));
    }

    #[test]
    fn alpha_zero_is_diffusion() {
        for n in 1..=6 {
            let spec = MixerSpec::with_alpha(n, 0).unwrap();
            let u = u_coefficients(&spec);
            assert!(u[1..].iter().all(|&v| (v - u[1]).abs() < 1e-15));
            assert!((u[1].abs() - 2.0 / (1u64 << n) as f64).abs() < 1e-15);
            // W diag(-1, 1, .., 1) W
            let w = dense_walsh(n, 12).unwrap() / ((1u64 << n) as f64).sqrt();
            let len = 1usize << n;
            let d = DMatrix::from_fn(len, len, |r, s| if r == s { if r == 0 { -1.0 } else { 1.0 } } else { 0.0 });
            let diffusion = &w * d * &w;
            let ours = dense_u(&spec, 12).unwrap();
            assert!((ours + diffusion).amax() < 1e-12);
        }
        assert!(MixerSpec::with_alpha(3, 4).is_err());
    }

    #[test]
    fn two_variable_dense_matrix() {
        let u = dense_u(&MixerSpec::new(2), 12).unwrap();
        let printed = DMatrix::from_row_slice(
            4,
            4,
            &[1.0, 1.0, 1.0, -1.0, 1.0, 1.0, -1.0, 1.0, 1.0, -1.0, 1.0, 1.0, -1.0, 1.0, 1.0, 1.0],
        ) * 0.5;
        assert!((u - printed).amax() < 1e-12);
    }

    #[test]
    fn dense_u_equals_walsh_product_and_is_orthogonal() {
        for n in 1..=8 {
            let spec = MixerSpec::new(n);
            let u = dense_u(&spec, 12).unwrap();
            let w = dense_walsh(n, 12).unwrap();
            let product = &w * dense_diagonal(&spec, 12).unwrap() * &w / (1u64 << n) as f64;
            assert!((&u - product).amax() < 1e-12, "n={n}");
            let eye = DMatrix::<f64>::identity(1 << n, 1 << n);
            assert!((u.transpose() * &u - eye).amax() < 1e-10, "n={n}");
        }
    }

    #[test]
    fn dense_capacity() {
        assert_eq!(dense_u(&MixerSpec::new(13), 12).unwrap_err(), Error::Capacity { n: 13, limit: 12 });
    }

    #[test]
    fn fast_apply_matches_dense() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in 1..=10 {
            let spec = MixerSpec::new(n);
            let u = dense_u(&spec, 12).unwrap();
            let mut x: Vec<f64> = (0..1 << n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            x.iter_mut().for_each(|v| *v /= norm);
            let fast = apply_u(&spec, &x).unwrap();
            let dense = &u * nalgebra::DVector::from_vec(x.clone());
            for (a, b) in fast.iter().zip(dense.iter()) {
                assert!((a - b).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn worked_example_step() {
        let out = apply_u(&MixerSpec::new(2), &[0.5, 0.5, 0.5, -0.5]).unwrap();
        for (a, b) in out.iter().zip([1.0, 0.0, 0.0, 0.0]) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn uniform_input_gives_constant_output() {
        for n in [2, 4, 6, 7] {
            let x = vec![1.0; 1 << n];
            let out = apply_u(&MixerSpec::new(n), &x).unwrap();
            assert!(out.iter().all(|v| (v - out[0]).abs() < 1e-12));
        }
    }

    #[test]
    fn apply_rejects_wrong_length() {
        let mixer = Mixer::new(MixerSpec::new(3));
        assert!(mixer.apply(&mut [0.0; 4]).is_err());
    }

    #[test]
    fn csv_export() {
        let csv = matrix_to_csv(&dense_u(&MixerSpec::new(1), 12).unwrap());
        assert_eq!(csv, "0,1\n1,0\n");
    }
}
