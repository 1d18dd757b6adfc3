//! Independent oracles for the acceptance suite: brute-force matching
//! enumeration, chi-square tests, and exact rational arithmetic.
#![allow(dead_code)] // each test target uses a subset

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Enumerates every perfect matching of `m` balls as a sorted pair list.
pub fn enumerate_matchings(m: usize) -> Vec<Vec<(usize, usize)>> {
    assert!(m.is_multiple_of(2));
    let mut out = Vec::new();
    let mut used = vec![false; m];
    let mut current = Vec::new();
    fn recurse(
        used: &mut [bool],
        current: &mut Vec<(usize, usize)>,
        out: &mut Vec<Vec<(usize, usize)>>,
    ) {
        let first = match used.iter().position(|&u| !u) {
            Some(b) => b,
            None => {
                out.push(current.clone());
                return;
            }
        };
        used[first] = true;
        for second in (first + 1)..used.len() {
            if used[second] {
                continue;
            }
            used[second] = true;
            current.push((first, second));
            recurse(used, current, out);
            current.pop();
            used[second] = false;
        }
        used[first] = false;
    }
    recurse(&mut used, &mut current, &mut out);
    out
}

pub fn matching_index(reference: &[Vec<(usize, usize)>], pairs: &[(usize, usize)]) -> usize {
    reference
        .iter()
        .position(|m| m.as_slice() == pairs)
        .expect("sampled matching must be enumerable")
}

/// Upper-tail p-value of a chi-square statistic.
pub fn chi_square_p(statistic: f64, dof: usize) -> f64 {
    if dof == 0 {
        return 1.0;
    }
    let dist = ChiSquared::new(dof as f64).expect("positive dof");
    1.0 - dist.cdf(statistic)
}

/// Goodness-of-fit p-value against the uniform law on `categories` cells.
pub fn uniform_fit_p(counts: &[usize], categories: usize) -> f64 {
    let total: usize = counts.iter().sum();
    let expected = total as f64 / categories as f64;
    let mut chi2: f64 = counts
        .iter()
        .map(|&c| {
            let d = c as f64 - expected;
            d * d / expected
        })
        .sum();
    chi2 += (categories - counts.len()) as f64 * expected;
    chi_square_p(chi2, categories - 1)
}

/// Independence p-value for a contingency table of counts.
pub fn contingency_p(table: &[Vec<usize>]) -> f64 {
    let cols = table[0].len();
    let total: usize = table.iter().flatten().sum();
    let row_sums: Vec<usize> = table.iter().map(|r| r.iter().sum()).collect();
    let col_sums: Vec<usize> = (0..cols).map(|j| table.iter().map(|r| r[j]).sum()).collect();
    let mut chi2 = 0.0;
    for (i, row) in table.iter().enumerate() {
        for (j, &cell) in row.iter().enumerate() {
            let expected = row_sums[i] as f64 * col_sums[j] as f64 / total as f64;
            if expected > 0.0 {
                let d = cell as f64 - expected;
                chi2 += d * d / expected;
            }
        }
    }
    let live_rows = row_sums.iter().filter(|&&s| s > 0).count();
    let live_cols = col_sums.iter().filter(|&&s| s > 0).count();
    if live_rows < 2 || live_cols < 2 {
        return 1.0;
    }
    chi_square_p(chi2, (live_rows - 1) * (live_cols - 1))
}

/// Accurate conversion of a nonnegative rational to f64.
pub fn rational_to_f64(r: &BigRational) -> f64 {
    if r.is_zero() {
        return 0.0;
    }
    assert!(r.is_positive());
    let nbits = r.numer().bits() as i64;
    let dbits = r.denom().bits() as i64;
    let shift = 64 - (nbits - dbits);
    let (numer, denom) = if shift >= 0 {
        (r.numer() << shift as u64, r.denom().clone())
    } else {
        (r.numer().clone(), r.denom() << (-shift) as u64)
    };
    let quotient: BigInt = numer / denom;
    quotient.to_f64().expect("quotient fits f64") * 2f64.powi(-shift as i32)
}

pub fn big(x: usize) -> BigInt {
    BigInt::from(x)
}

pub fn big_pow(base: usize, exp: u32) -> BigInt {
    big(base).pow(exp)
}

pub fn factorial(k: usize) -> BigInt {
    (1..=k).fold(BigInt::one(), |acc, i| acc * big(i))
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
    }
}

/// Tiny xorshift for reproducible test-input generation, independent of the
/// library's stream machinery.
pub struct XorShift(pub u64);

impl XorShift {
    pub fn next(&mut self, range: usize) -> usize {
        self.0 ^= self.0 << 13;
        self.0 ^= self.0 >> 7;
        self.0 ^= self.0 << 17;
        (self.0 % range as u64) as usize
    }
}
