//! Unnormalized fast Walsh-Hadamard transform, `x <- W x` with
//! `W[r][s] = (-1)^ones(r & s)`.

use crate::error::{Error, Result};

/// Below this length the parallel transform runs serially.
const PAR_BLOCK: usize = 1 << 14;

/// In-place transform with the iterative radix-2 butterfly.
pub fn fwht(x: &mut [f64]) -> Result<()> {
    if !x.len().is_power_of_two() {
        return Err(Error::NotPowerOfTwo(x.len()));
    }
    fwht_serial(x);
    Ok(())
}

/// In-place transform that splits work across the current rayon pool.
///
/// Every output is produced by the same sequence of additions as in
/// [`fwht`], so results are bitwise identical for any worker count.
pub fn fwht_par(x: &mut [f64]) -> Result<()> {
    if !x.len().is_power_of_two() {
        return Err(Error::NotPowerOfTwo(x.len()));
    }
    fwht_split(x);
    Ok(())
}

fn fwht_serial(x: &mut [f64]) {
    let len = x.len();
    let mut half = 1;
    while half < len {
        for block in x.chunks_exact_mut(2 * half) {
            let (lo, hi) = block.split_at_mut(half);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (u, v) = (*a, *b);
                *a = u + v;
                *b = u - v;
            }
        }
        half *= 2;
    }
}

fn fwht_split(x: &mut [f64]) {
    if x.len() <= PAR_BLOCK {
        fwht_serial(x);
        return;
    }
    let half = x.len() / 2;
    let (lo, hi) = x.split_at_mut(half);
    rayon::join(|| fwht_split(lo), || fwht_split(hi));
    use rayon::prelude::*;
    lo.par_chunks_mut(PAR_BLOCK).zip(hi.par_chunks_mut(PAR_BLOCK)).for_each(|(a, b)| {
        for (u, v) in a.iter_mut().zip(b.iter_mut()) {
            let (p, q) = (*u, *v);
            *u = p + q;
            *v = p - q;
        }
    });
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn dense_transform(x: &[f64]) -> Vec<f64> {
        (0..x.len())
            .map(|r| {
                x.iter()
                    .enumerate()
                    .map(|(s, v)| if (r & s).count_ones() % 2 == 0 { *v } else { -*v })
                    .sum()
            })
            .collect()
    }

    #[test]
    fn single_bit() {
        let mut x = vec![1.0, 0.0];
        fwht(&mut x).unwrap();
        assert_eq!(x, vec![1.0, 1.0]);
    }

    #[test]
    fn rejects_bad_length() {
        assert_eq!(fwht(&mut [0.0; 3]), Err(Error::NotPowerOfTwo(3)));
        assert_eq!(fwht_par(&mut [0.0; 6]), Err(Error::NotPowerOfTwo(6)));
    }

    #[test]
    fn matches_dense_matrix() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for n in 0..=8 {
            let x: Vec<f64> = (0..1 << n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let expect = dense_transform(&x);
            let mut got = x.clone();
            fwht(&mut got).unwrap();
            for (a, b) in got.iter().zip(&expect) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn applying_twice_scales_by_length() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let x: Vec<f64> = (0..1 << 10).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mut y = x.clone();
        fwht(&mut y).unwrap();
        fwht(&mut y).unwrap();
        for (a, b) in y.iter().zip(&x) {
            assert!((a / 1024.0 - b).abs() < 1e-12);
        }
    }

    #[test]
    fn parallel_is_bitwise_identical() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x: Vec<f64> = (0..1 << 17).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mut a = x.clone();
        let mut b = x;
        fwht(&mut a).unwrap();
        fwht_par(&mut b).unwrap();
        assert!(a.iter().zip(&b).all(|(p, q)| p.to_bits() == q.to_bits()));
    }
}
