//! Log-space combinatorics.

/// `ln(n!)` as a sum of logarithms; exact integer arguments keep this free of
/// the approximation error of a general log-gamma.
pub fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|j| (j as f64).ln()).sum()
}

/// `ln C(n, k)` for every `k in 0..=n`.
pub fn ln_binomial_row(n: usize) -> Vec<f64> {
    let mut row = Vec::with_capacity(n + 1);
    let mut acc = 0.0;
    row.push(0.0);
    for k in 1..=n {
        acc += ((n - k + 1) as f64 / k as f64).ln();
        row.push(acc);
    }
    // symmetric fix-up keeps the two halves bit-identical
    for k in 0..=n / 2 {
        row[n - k] = row[k];
    }
    row
}
