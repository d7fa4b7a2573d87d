//! Exact and log-space binomial coefficients, combination unranking, and
//! big-integer to float conversion.

use num_bigint::{BigInt, Sign};
use num_traits::{One, Signed, ToPrimitive, Zero};

/// `C(n, k)` in 128-bit arithmetic, `None` on overflow.
pub fn binomial_u128(n: u64, k: u64) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) is divisible by (i + 1) after the multiply
        acc = acc.checked_mul(u128::from(n - i))? / u128::from(i + 1);
    }
    Some(acc)
}

/// Exact `C(n, k)`; zero when `k > n`.
pub fn binomial_big(n: usize, k: usize) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

/// Row `n` of Pascal's triangle as exact integers.
pub fn binomial_row(n: usize) -> Vec<BigInt> {
    let mut row = Vec::with_capacity(n + 1);
    let mut acc = BigInt::one();
    row.push(acc.clone());
    for i in 0..n {
        acc = acc * (n - i) / (i + 1);
        row.push(acc.clone());
    }
    row
}

/// Table of `ln(i!)` for `i = 0..=n`, for log-space binomials.
#[derive(Debug, Clone)]
pub struct LnFactorials(Vec<f64>);

impl LnFactorials {
    pub fn new(n: usize) -> Self {
        let mut table = Vec::with_capacity(n + 1);
        let mut acc = 0.0f64;
        table.push(0.0);
        for i in 1..=n {
            acc += (i as f64).ln();
            table.push(acc);
        }
        LnFactorials(table)
    }

    /// `ln C(n, k)`, or `-inf` when `k > n`.
    pub fn ln_binomial(&self, n: usize, k: usize) -> f64 {
        if k > n {
            return f64::NEG_INFINITY;
        }
        self.0[n] - self.0[k] - self.0[n - k]
    }
}

/// Unranks the `rank`-th `k`-subset of `{0, .., n-1}` in colexicographic
/// order and returns it as a bit mask.
///
/// Colex order means the subsets are sorted by their largest element first,
/// which matches the natural order of the masks as integers.
pub fn unrank_combination(n: u32, k: u32, mut rank: u128) -> u64 {
    debug_assert!(n <= 64 && k <= n);
    let mut mask = 0u64;
    let mut top = n;
    for slots in (1..=k).rev() {
        // largest c with C(c, slots) <= rank
        let mut c = slots - 1;
        while c + 1 < top && binomial_u128(u64::from(c + 1), u64::from(slots)).unwrap_or(u128::MAX) <= rank {
            c += 1;
        }
        rank -= binomial_u128(u64::from(c), u64::from(slots)).unwrap_or(0);
        mask |= 1u64 << c;
        top = c;
    }
    mask
}

/// Rank of a `k`-subset mask in colexicographic order; inverse of
/// [`unrank_combination`].
pub fn rank_combination(mask: u64) -> u128 {
    let mut rank = 0u128;
    let mut slot = 0u64;
    let mut rest = mask;
    while rest != 0 {
        let bit = u64::from(rest.trailing_zeros());
        slot += 1;
        rank += binomial_u128(bit, slot).unwrap_or(0);
        rest &= rest - 1;
    }
    rank
}

/// Converts `num / den` to the nearest `f64` (to within one ulp) without
/// overflowing intermediates, for arbitrarily large integers.
pub fn ratio_to_f64(num: &BigInt, den: &BigInt) -> f64 {
    assert!(!den.is_zero(), "zero denominator");
    if num.is_zero() {
        return 0.0;
    }
    let negative = (num.sign() == Sign::Minus) != (den.sign() == Sign::Minus);
    let num = num.abs();
    let den = den.abs();
    // keep 64 significant bits in the integer quotient
    let shift = 64i64 - (num.bits() as i64 - den.bits() as i64);
    let quotient = if shift >= 0 {
        (num << shift as usize) / den
    } else {
        num / (den << (-shift) as usize)
    };
    let mantissa = quotient.to_f64().unwrap_or(f64::INFINITY);
    let value = scale_by_pow2(mantissa, -shift);
    if negative {
        -value
    } else {
        value
    }
}

fn scale_by_pow2(mut x: f64, mut exp: i64) -> f64 {
    // apply in chunks so the factor itself never over- or underflows
    while exp > 1000 {
        x *= 2f64.powi(1000);
        exp -= 1000;
    }
    while exp < -1000 {
        x *= 2f64.powi(-1000);
        exp += 1000;
    }
    x * 2f64.powi(exp as i32)
}
