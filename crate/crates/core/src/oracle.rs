//! Independent verification path: a dense complex eigensolver and residual
//! tooling that never touches the closed-form pipeline.
//!
//! Eigenvalues come from a Householder reduction to upper Hessenberg form
//! followed by single-shift complex QR sweeps (Wilkinson shifts from the
//! trailing 2x2 block, exceptional shifts every tenth sweep of a stalled
//! window) with deflation on negligible subdiagonal entries. No balancing.

use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, GbsError, Result};
use crate::fock::{eigen_residual, Operator, StateVector, C64};
use crate::gbs::{build_operator, GbsParams, GbsSolution, SolutionKind};

const INVERSE_ITERATIONS: usize = 3;
const INVERSE_SEED: u64 = 0x05EE_D0F0_AC1E;

fn hessenberg(l: &Operator) -> Array2<C64> {
    let mut h = l.entries().clone();
    let n = h.nrows();
    for k in 0..n.saturating_sub(2) {
        let len = n - k - 1;
        let mut v: Vec<C64> = (0..len).map(|i| h[[k + 1 + i, k]]).collect();
        let xnorm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if xnorm == 0.0 {
            continue;
        }
        let phase = if v[0].norm() == 0.0 {
            C64::new(1.0, 0.0)
        } else {
            v[0] / v[0].norm()
        };
        let alpha = -phase * xnorm;
        v[0] -= alpha;
        let vnorm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if vnorm == 0.0 {
            continue;
        }
        v.iter_mut().for_each(|z| *z /= vnorm);

        // H <- (I - 2vv*) H (I - 2vv*) on the trailing block
        for j in k..n {
            let s: C64 = (0..len).map(|i| v[i].conj() * h[[k + 1 + i, j]]).sum();
            for i in 0..len {
                h[[k + 1 + i, j]] -= v[i] * s * 2.0;
            }
        }
        for i in 0..n {
            let s: C64 = (0..len).map(|j| h[[i, k + 1 + j]] * v[j]).sum();
            for j in 0..len {
                h[[i, k + 1 + j]] -= s * v[j].conj() * 2.0;
            }
        }
        h[[k + 1, k]] = alpha;
        for i in k + 2..n {
            h[[i, k]] = C64::new(0.0, 0.0);
        }
    }
    h
}

/// Rotation `G = [[c, s], [-conj(s), c]]` with `G [a; b] = [rho; 0]`.
fn givens(a: C64, b: C64) -> (f64, C64) {
    let (na, nb) = (a.norm(), b.norm());
    if nb == 0.0 {
        return (1.0, C64::new(0.0, 0.0));
    }
    if na == 0.0 {
        return (0.0, b.conj() / nb);
    }
    let r = na.hypot(nb);
    (na / r, a / na * b.conj() / r)
}

/// Eigenvalues of `[[a, b], [c, d]]`, the one nearer `d` first.
fn eig2x2(a: C64, b: C64, c: C64, d: C64) -> (C64, C64) {
    let p = (a - d) * 0.5;
    let disc = (p * p + b * c).sqrt();
    let (plus, minus) = (p + disc, p - disc);
    let den = if plus.norm() >= minus.norm() { plus } else { minus };
    let near = if den.norm() == 0.0 { d } else { d - b * c / den };
    (near, a + d - near)
}

fn qr_sweep(h: &mut Array2<C64>, lo: usize, hi: usize, shift: C64) {
    for i in lo..=hi {
        h[[i, i]] -= shift;
    }
    let mut rotations = Vec::with_capacity(hi - lo);
    for j in lo..hi {
        let (c, s) = givens(h[[j, j]], h[[j + 1, j]]);
        for col in j..=hi {
            let (x, y) = (h[[j, col]], h[[j + 1, col]]);
            h[[j, col]] = x * c + s * y;
            h[[j + 1, col]] = -s.conj() * x + y * c;
        }
        rotations.push((c, s));
    }
    for (offset, &(c, s)) in rotations.iter().enumerate() {
        let j = lo + offset;
        for row in lo..=(j + 2).min(hi) {
            let (x, y) = (h[[row, j]], h[[row, j + 1]]);
            h[[row, j]] = x * c + y * s.conj();
            h[[row, j + 1]] = -x * s + y * c;
        }
    }
    for i in lo..=hi {
        h[[i, i]] += shift;
    }
}

/// All eigenvalues of `l`, with algebraic multiplicity, in deflation order.
pub fn dense_spectrum(l: &Operator) -> Result<Vec<C64>> {
    let n = l.dim();
    let mut h = hessenberg(l);
    let fro = l.frobenius_norm();
    let eps = f64::EPSILON;
    let cap = 100 * n;
    let mut eig = vec![C64::new(0.0, 0.0); n];
    let mut sweeps = 0;
    let mut stalled = 0;
    let mut hi = n - 1;
    loop {
        if hi == 0 {
            eig[0] = h[[0, 0]];
            break;
        }
        let mut lo = hi;
        while lo > 0 {
            let sub = h[[lo, lo - 1]].norm();
            let mut diag = h[[lo - 1, lo - 1]].norm() + h[[lo, lo]].norm();
            if diag == 0.0 {
                diag = fro;
            }
            if sub <= eps * diag {
                h[[lo, lo - 1]] = C64::new(0.0, 0.0);
                break;
            }
            lo -= 1;
        }
        if lo == hi {
            eig[hi] = h[[hi, hi]];
            hi -= 1;
            stalled = 0;
            continue;
        }
        if lo + 1 == hi {
            let (near, far) = eig2x2(h[[lo, lo]], h[[lo, hi]], h[[hi, lo]], h[[hi, hi]]);
            eig[hi] = near;
            eig[lo] = far;
            if lo == 0 {
                break;
            }
            hi = lo - 1;
            stalled = 0;
            continue;
        }
        sweeps += 1;
        stalled += 1;
        if sweeps > cap {
            return Err(GbsError::NoConvergence { iterations: cap });
        }
        let shift = if stalled % 10 == 0 {
            h[[hi, hi]] + C64::new(0.75 * h[[hi, hi - 1]].norm(), 0.0)
        } else {
            eig2x2(h[[hi - 1, hi - 1]], h[[hi - 1, hi]], h[[hi, hi - 1]], h[[hi, hi]]).0
        };
        qr_sweep(&mut h, lo, hi, shift);
    }
    Ok(eig)
}

/// LU factorization with partial pivoting; zero pivots are replaced by
/// `floor` so shifted systems at an exact eigenvalue stay solvable.
struct Lu {
    lu: Array2<C64>,
    perm: Vec<usize>,
    sign: f64,
}

impl Lu {
    fn new(a: &Array2<C64>, floor: f64) -> Self {
        let n = a.nrows();
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sign = 1.0;
        for k in 0..n {
            let p = (k..n)
                .max_by(|&i, &j| lu[[i, k]].norm().total_cmp(&lu[[j, k]].norm()))
                .unwrap();
            if p != k {
                for j in 0..n {
                    lu.swap([k, j], [p, j]);
                }
                perm.swap(k, p);
                sign = -sign;
            }
            if lu[[k, k]].norm() == 0.0 {
                lu[[k, k]] = C64::new(floor, 0.0);
            }
            let pivot = lu[[k, k]];
            for i in k + 1..n {
                let f = lu[[i, k]] / pivot;
                lu[[i, k]] = f;
                for j in k + 1..n {
                    let u = lu[[k, j]];
                    lu[[i, j]] -= f * u;
                }
            }
        }
        Self { lu, perm, sign }
    }

    fn solve(&self, b: &Array1<C64>) -> Array1<C64> {
        let n = b.len();
        let mut x: Array1<C64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            for j in 0..i {
                let t = self.lu[[i, j]] * x[j];
                x[i] -= t;
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                let t = self.lu[[i, j]] * x[j];
                x[i] -= t;
            }
            x[i] /= self.lu[[i, i]];
        }
        x
    }

    fn determinant(&self) -> C64 {
        self.lu.diag().iter().fold(C64::new(self.sign, 0.0), |acc, z| acc * z)
    }
}

/// `det(l)` by LU decomposition.
pub fn determinant(l: &Operator) -> C64 {
    Lu::new(l.entries(), 0.0).determinant()
}

/// Unit eigenvector for an eigenvalue estimate, by shifted inverse iteration.
pub fn null_eigenvector(l: &Operator, lambda: C64) -> Result<StateVector> {
    let n = l.dim();
    let fro = l.frobenius_norm();
    let scale = fro.max(1.0);
    let shift = lambda + C64::new(1e-12 * scale, 0.0);
    let shifted = l.entries() - &Array2::from_diag(&Array1::from_elem(n, shift));
    let lu = Lu::new(&shifted, f64::EPSILON * scale);

    let mut rng = ChaCha8Rng::seed_from_u64(INVERSE_SEED);
    let mut x: Array1<C64> = (0..n)
        .map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    for _ in 0..INVERSE_ITERATIONS {
        let y = lu.solve(&x);
        let norm = y.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !norm.is_finite() || norm == 0.0 {
            return Err(GbsError::NonFinite);
        }
        x = y.mapv(|z| z / norm);
    }
    let v = StateVector::from_array(x)?.with_phase_convention();
    let residual = eigen_residual(l, lambda, &v)?;
    let bound = 1e-9 * fro;
    if residual > bound {
        return Err(GbsError::InverseIterationStalled { residual, bound });
    }
    Ok(v)
}

/// Oracle-versus-closed-form comparison of one solve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub oracle_eigenvalues: Vec<C64>,
    pub closed_form_eigenvalues: Vec<C64>,
    /// `(oracle index, closed-form index)`
    pub pairing: Vec<(usize, usize)>,
    pub max_pair_error: f64,
    /// Largest `||L v - delta v||` over the returned eigenstates.
    pub max_residual: f64,
    pub operator_norm: f64,
    /// Set for the defective branch, where every closed-form eigenvalue is
    /// zero and the oracle returns a perturbed cluster instead.
    pub multiplicity_collapse: bool,
}

impl SpectrumReport {
    /// Pair error `<= 1e-9 (1 + max|delta|)` and residual `<= 1e-10 ||L||_F`,
    /// both scaled by `tol_scale`. Defective reports never pass.
    pub fn within_tolerance(&self, tol_scale: f64) -> bool {
        !self.multiplicity_collapse
            && self.max_pair_error <= tol_scale * self.pair_tolerance()
            && self.max_residual <= tol_scale * 1e-10 * self.operator_norm
    }

    pub fn pair_tolerance(&self) -> f64 {
        1e-9 * self.eigenvalue_scale()
    }

    /// `1 + max|delta|`
    pub fn eigenvalue_scale(&self) -> f64 {
        1.0 + self
            .closed_form_eigenvalues
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    pub fn relative_pair_error(&self) -> f64 {
        self.max_pair_error / self.eigenvalue_scale()
    }

    pub fn relative_residual(&self) -> f64 {
        if self.operator_norm == 0.0 {
            self.max_residual
        } else {
            self.max_residual / self.operator_norm
        }
    }
}

/// Greedy nearest-neighbour pairing, oracle values visited by ascending real
/// part.
pub fn pair_spectra(oracle: &[C64], closed: &[C64]) -> Result<(Vec<(usize, usize)>, f64)> {
    if oracle.len() != closed.len() {
        return Err(GbsError::DimensionMismatch {
            expected: closed.len(),
            found: oracle.len(),
        });
    }
    let mut order: Vec<usize> = (0..oracle.len()).collect();
    order.sort_by(|&i, &j| oracle[i].re.total_cmp(&oracle[j].re));
    let mut used = vec![false; closed.len()];
    let mut pairing = Vec::with_capacity(oracle.len());
    let mut worst: f64 = 0.0;
    for i in order {
        let (j, err) = closed
            .iter()
            .enumerate()
            .filter(|(j, _)| !used[*j])
            .map(|(j, z)| (j, (oracle[i] - z).norm()))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("sizes match");
        used[j] = true;
        pairing.push((i, j));
        worst = worst.max(err);
    }
    Ok((pairing, worst))
}

pub fn compare(p: &GbsParams, solution: &GbsSolution) -> Result<SpectrumReport> {
    if solution.params != *p {
        return Err(invalid("solution", "was not produced from these parameters"));
    }
    let l = build_operator(p);
    let oracle_eigenvalues = dense_spectrum(&l)?;
    let (pairing, max_pair_error) = pair_spectra(&oracle_eigenvalues, &solution.eigenvalues)?;
    let mut max_residual: f64 = 0.0;
    for (v, d) in solution.eigenstates.iter().zip(&solution.eigenvalues) {
        max_residual = max_residual.max(eigen_residual(&l, *d, v)?);
    }
    Ok(SpectrumReport {
        oracle_eigenvalues,
        closed_form_eigenvalues: solution.eigenvalues.clone(),
        pairing,
        max_pair_error,
        max_residual,
        operator_norm: l.frobenius_norm(),
        multiplicity_collapse: solution.kind == SolutionKind::DefectiveAZeroZero,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{fidelity, hp_generators, number_operator};
    use crate::gbs::{eigenstate_sum, solve, RootPolicy};
    use proptest::prelude::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn sorted(mut v: Vec<C64>) -> Vec<C64> {
        v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        v
    }

    #[test]
    fn diagonal_spectrum() {
        let l = Operator::from_diagonal([c(1.0), c(2.0), c(3.0)]);
        let e = sorted(dense_spectrum(&l).unwrap());
        for (a, b) in e.iter().zip([1.0, 2.0, 3.0]) {
            assert!((a - c(b)).norm() < 1e-14);
        }
    }

    #[test]
    fn rotation_generator() {
        let l = Operator::new(ndarray::array![[c(0.0), c(1.0)], [c(-1.0), c(0.0)]]).unwrap();
        let e = sorted(dense_spectrum(&l).unwrap());
        assert!((e[0] - C64::new(0.0, -1.0)).norm() < 1e-14 || (e[0] - C64::new(0.0, 1.0)).norm() < 1e-14);
        assert!((e[0] + e[1]).norm() < 1e-14);
        assert!((e[0] * e[1] - c(1.0)).norm() < 1e-14);
    }

    #[test]
    fn triangular_operator_gives_diagonal() {
        let p = GbsParams::new(c(1.0), c(0.0), 0.25, 6).unwrap();
        let l = build_operator(&p);
        let got = dense_spectrum(&l).unwrap();
        let (_, err) = pair_spectra(&got, &l.diagonal()).unwrap();
        assert!(err < 1e-14);
    }

    #[test]
    fn one_by_one() {
        let l = Operator::from_diagonal([C64::new(0.3, -2.0)]);
        assert_eq!(dense_spectrum(&l).unwrap(), vec![C64::new(0.3, -2.0)]);
    }

    #[test]
    fn null_vector_examples() {
        let v = null_eigenvector(&number_operator(3), c(2.0)).unwrap();
        assert!(fidelity(&v, &StateVector::basis(4, 2)).unwrap() > 1.0 - 1e-15);

        let p = GbsParams::new(c(1.0), c(0.0), 0.25, 2).unwrap();
        let l = build_operator(&p);
        let v = null_eigenvector(&l, c(0.5)).unwrap();
        let w = eigenstate_sum(&p, 2, RootPolicy::Principal).unwrap();
        assert!(fidelity(&v, &w).unwrap() >= 1.0 - 1e-9);
    }

    #[test]
    fn null_vector_far_from_spectrum_fails() {
        let err = null_eigenvector(&number_operator(3), c(1.5)).unwrap_err();
        assert!(matches!(err, GbsError::InverseIterationStalled { .. }));
    }

    #[test]
    fn compare_zero_nu() {
        for (eta, m) in [(0.25, 2), (0.6, 9), (0.1, 12)] {
            let p = GbsParams::new(C64::from_polar(1.3, 0.4), c(0.0), eta, m).unwrap();
            let sol = solve(&p, RootPolicy::Principal).unwrap();
            let r = compare(&p, &sol).unwrap();
            assert!(r.max_pair_error <= 1e-12, "{}", r.max_pair_error);
            assert!(r.within_tolerance(1.0));
            assert_eq!(r.pairing.len(), m + 1);
        }
    }

    #[test]
    fn compare_flags_defective() {
        let eta = 0.3;
        let p = GbsParams::new(c(2.0), c(-eta / (8.0 * (1.0 - eta))), eta, 5).unwrap();
        let sol = solve(&p, RootPolicy::Principal).unwrap();
        let r = compare(&p, &sol).unwrap();
        assert!(r.multiplicity_collapse);
        assert!(!r.within_tolerance(1.0));
    }

    #[test]
    fn compare_rejects_foreign_solution() {
        let p = GbsParams::new(c(1.0), c(0.2), 0.3, 3).unwrap();
        let q = GbsParams::new(c(1.0), c(0.2), 0.4, 3).unwrap();
        let sol = solve(&q, RootPolicy::Principal).unwrap();
        assert!(compare(&p, &sol).is_err());
    }

    fn arb_operator(dim: usize) -> impl Strategy<Value = Operator> {
        proptest::collection::vec((-2.0..2.0f64, -2.0..2.0f64), dim * dim).prop_map(move |xs| {
            let data: Vec<C64> = xs.into_iter().map(|(a, b)| C64::new(a, b)).collect();
            Operator::new(Array2::from_shape_vec((dim, dim), data).unwrap()).unwrap()
        })
    }

    proptest! {
        #[test]
        fn trace_and_determinant(l in (1usize..=8).prop_flat_map(arb_operator)) {
            let e = dense_spectrum(&l).unwrap();
            let sum: C64 = e.iter().sum();
            let prod: C64 = e.iter().product();
            let det = determinant(&l);
            prop_assert!((sum - l.trace()).norm() <= 1e-11 * (1.0 + l.frobenius_norm()));
            prop_assert!((prod - det).norm() <= 1e-9 * det.norm().max(1e-300) + 1e-12);
        }

        #[test]
        fn hermitian_spectrum_is_real(m in 1usize..=20, x in -2.0..2.0f64, y in -2.0..2.0f64, z in -2.0..2.0f64) {
            let g = hp_generators(m);
            let w = C64::new(x, y);
            let l = &(&g.jp.scale(w) + &g.jm.scale(w.conj())) + &g.j0.scale(c(z));
            for ev in dense_spectrum(&l).unwrap() {
                prop_assert!(ev.im.abs() <= 1e-11 * l.frobenius_norm());
            }
        }
    }
}
