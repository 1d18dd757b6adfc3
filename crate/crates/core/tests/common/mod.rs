//! Brute-force oracles and statistical test helpers shared by the
//! integration tests. Everything here is independent of the library's own
//! sampling and bound-evaluation code paths.
#![allow(dead_code)] // each test target uses a subset

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

/// Upper-tail p-value of a chi-square statistic.
pub fn chi_square_p(statistic: f64, dof: usize) -> f64 {
    if dof == 0 {
        return 1.0;
    }
    let dist = ChiSquared::new(dof as f64).expect("positive dof");
    1.0 - dist.cdf(statistic)
}

/// Goodness-of-fit p-value for observed counts against a uniform law over
/// `categories` cells (absent categories count zero).
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

/// Independence test for a contingency table (rows x columns of counts).
pub fn contingency_p(table: &[Vec<usize>]) -> f64 {
    let rows = table.len();
    let cols = table[0].len();
    let total: usize = table.iter().flatten().sum();
    let row_sums: Vec<usize> = table.iter().map(|r| r.iter().sum()).collect();
    let col_sums: Vec<usize> = (0..cols)
        .map(|j| table.iter().map(|r| r[j]).sum())
        .collect();
    let mut chi2 = 0.0;
    for i in 0..rows {
        for j in 0..cols {
            let expected = row_sums[i] as f64 * col_sums[j] as f64 / total as f64;
            if expected > 0.0 {
                let d = table[i][j] as f64 - expected;
                chi2 += d * d / expected;
            }
        }
    }
    // Rows or columns that never occur carry no information.
    let live_rows = row_sums.iter().filter(|&&s| s > 0).count();
    let live_cols = col_sums.iter().filter(|&&s| s > 0).count();
    if live_rows < 2 || live_cols < 2 {
        return 1.0;
    }
    chi_square_p(chi2, (live_rows - 1) * (live_cols - 1))
}
