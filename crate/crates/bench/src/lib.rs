//! Shared fixtures for the benchmarks under `benches/`.

use gbs_core::{GbsParams, C64};

/// Truncations used across benchmark groups.
pub const SIZES: [usize; 4] = [4, 16, 64, 128];

/// A generic (non-Hermitian, non-defective) parameter set at truncation `m`.
pub fn generic_params(m: usize) -> GbsParams {
    GbsParams::new(C64::from_polar(1.1, 0.4), C64::from_polar(0.6, -1.3), 0.35, m).expect("fixed parameters are valid")
}

/// `mu = nu^*`, the degenerate branch.
pub fn hermitian_params(m: usize) -> GbsParams {
    let mu = C64::from_polar(0.9, 0.7);
    GbsParams::new(mu, mu.conj(), 0.35, m).expect("fixed parameters are valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use gbs_core::gbs::solve;
    use gbs_core::{RootPolicy, SolutionKind};

    #[test]
    fn fixtures_hit_intended_branches() {
        assert_eq!(
            solve(&generic_params(4), RootPolicy::Principal).unwrap().kind,
            SolutionKind::Generic
        );
        assert_eq!(
            solve(&hermitian_params(4), RootPolicy::Principal).unwrap().kind,
            SolutionKind::DegenerateAPlusZero
        );
    }
}
