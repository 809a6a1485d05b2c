//! Truncated Fock-space kernel.
//!
//! States are dense complex amplitude vectors over `|0>, ..., |D-1>` and
//! operators are dense `D x D` complex matrices. Everything here is a pure
//! function of its inputs.
//!
//! The truncated bosonic operators carry the usual defect: `[a, a+]` equals
//! the identity except in the last diagonal slot, where it is `-M`. The
//! Holstein-Primakoff generators built from them are exact at every `M`.

use std::ops::{Add, Mul, Sub};

use ndarray::{Array1, Array2, Axis};
use num_complex::Complex64;

use crate::error::{GbsError, Result};

pub type C64 = Complex64;

pub const NORMALIZATION_TOL: f64 = 1e-12;
pub const DEFAULT_EXP_TOL: f64 = 1e-14;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Complex amplitudes over the Fock basis `|0>, ..., |dim-1>`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amps: Array1<C64>,
}

impl StateVector {
    pub fn new(amps: Vec<C64>) -> Result<Self> {
        Self::from_array(Array1::from(amps))
    }

    pub fn from_array(amps: Array1<C64>) -> Result<Self> {
        if amps.is_empty() {
            return Err(GbsError::EmptyState);
        }
        if amps.iter().any(|z| !z.is_finite()) {
            return Err(GbsError::NonFinite);
        }
        Ok(Self { amps })
    }

    pub fn from_real(amps: &[f64]) -> Result<Self> {
        Self::new(amps.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    /// Number state `|n>` in a space of dimension `dim`.
    pub fn basis(dim: usize, n: usize) -> Self {
        assert!(n < dim, "basis index {n} outside dimension {dim}");
        let mut amps = Array1::from_elem(dim, ZERO);
        amps[n] = ONE;
        Self { amps }
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amps(&self) -> &Array1<C64> {
        &self.amps
    }

    pub fn as_slice(&self) -> &[C64] {
        self.amps.as_slice().expect("state amplitudes are contiguous")
    }

    pub fn into_array(self) -> Array1<C64> {
        self.amps
    }

    pub fn norm(&self) -> f64 {
        norm(self)
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm() - 1.0).abs() <= NORMALIZATION_TOL
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if n == 0.0 {
            return Err(GbsError::ZeroVector);
        }
        Ok(Self {
            amps: self.amps.mapv(|z| z / n),
        })
    }

    /// Rotates the global phase so the first non-negligible amplitude is real
    /// and positive.
    pub fn with_phase_convention(mut self) -> Self {
        let max = self.amps.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if max == 0.0 {
            return self;
        }
        if let Some(first) = self.amps.iter().find(|z| z.norm() > 1e-12 * max) {
            let phase = first.conj() / first.norm();
            self.amps.mapv_inplace(|z| z * phase);
        }
        self
    }

    /// Zero-pads (or returns a copy when `dim` equals the current dimension).
    pub fn padded(&self, dim: usize) -> Result<Self> {
        if dim < self.dim() {
            return Err(GbsError::DimensionMismatch {
                expected: self.dim(),
                found: dim,
            });
        }
        let mut amps = Array1::from_elem(dim, ZERO);
        amps.slice_mut(ndarray::s![..self.dim()]).assign(&self.amps);
        Ok(Self { amps })
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|z| z.norm_sqr()).collect()
    }

    pub fn scaled(&self, factor: C64) -> Self {
        Self {
            amps: self.amps.mapv(|z| z * factor),
        }
    }
}

/// Dense square complex matrix acting on the truncated Fock space.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    entries: Array2<C64>,
}

impl Operator {
    pub fn new(entries: Array2<C64>) -> Result<Self> {
        let (rows, cols) = entries.dim();
        if rows != cols {
            return Err(GbsError::NotSquare { rows, cols });
        }
        if rows == 0 {
            return Err(GbsError::EmptyState);
        }
        if entries.iter().any(|z| !z.is_finite()) {
            return Err(GbsError::NonFinite);
        }
        Ok(Self { entries })
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            entries: Array2::from_elem((dim, dim), ZERO),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            entries: Array2::eye(dim),
        }
    }

    pub fn from_diagonal(diag: impl IntoIterator<Item = C64>) -> Self {
        let diag: Array1<C64> = diag.into_iter().collect();
        Self {
            entries: Array2::from_diag(&diag),
        }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &Array2<C64> {
        &self.entries
    }

    pub fn into_entries(self) -> Array2<C64> {
        self.entries
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.entries[[row, col]]
    }

    pub fn dagger(&self) -> Self {
        Self {
            entries: self.entries.t().mapv(|z| z.conj()),
        }
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self {
            entries: self.entries.mapv(|z| z * factor),
        }
    }

    pub fn diagonal(&self) -> Vec<C64> {
        self.entries.diag().to_vec()
    }

    pub fn trace(&self) -> C64 {
        self.entries.diag().sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Maximum absolute column sum.
    pub fn one_norm(&self) -> f64 {
        self.entries
            .axis_iter(Axis(1))
            .map(|col| col.iter().map(|z| z.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// `||U+ U - I||_F <= 1e-11 * D`.
    pub fn is_unitary(&self) -> bool {
        let prod = &self.dagger() * self;
        (&prod - &Operator::identity(self.dim())).frobenius_norm() <= 1e-11 * self.dim() as f64
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        (self - &self.dagger()).frobenius_norm() <= tol
    }

    pub fn column(&self, col: usize) -> StateVector {
        StateVector {
            amps: self.entries.column(col).to_owned(),
        }
    }

    pub fn powi(&self, exp: u32) -> Self {
        let mut out = Operator::identity(self.dim());
        for _ in 0..exp {
            out = &out * self;
        }
        out
    }
}

// The arithmetic impls panic on dimension mismatch, like ndarray's own
// operators. The fallible entry points are `commutator` and `apply`.
impl Add for &Operator {
    type Output = Operator;
    fn add(self, rhs: &Operator) -> Operator {
        Operator {
            entries: &self.entries + &rhs.entries,
        }
    }
}

impl Sub for &Operator {
    type Output = Operator;
    fn sub(self, rhs: &Operator) -> Operator {
        Operator {
            entries: &self.entries - &rhs.entries,
        }
    }
}

impl Mul for &Operator {
    type Output = Operator;
    fn mul(self, rhs: &Operator) -> Operator {
        Operator {
            entries: self.entries.dot(&rhs.entries),
        }
    }
}

impl Mul<C64> for &Operator {
    type Output = Operator;
    fn mul(self, rhs: C64) -> Operator {
        self.scale(rhs)
    }
}

impl Mul<f64> for &Operator {
    type Output = Operator;
    fn mul(self, rhs: f64) -> Operator {
        self.scale(C64::new(rhs, 0.0))
    }
}

/// Truncated annihilation operator on dimension `m + 1`: `a|n> = sqrt(n)|n-1>`.
pub fn annihilation_operator(m: usize) -> Operator {
    let mut op = Operator::zeros(m + 1);
    for n in 1..=m {
        op.entries[[n - 1, n]] = C64::new((n as f64).sqrt(), 0.0);
    }
    op
}

pub fn creation_operator(m: usize) -> Operator {
    annihilation_operator(m).dagger()
}

pub fn number_operator(m: usize) -> Operator {
    Operator::from_diagonal((0..=m).map(|n| C64::new(n as f64, 0.0)))
}

/// Holstein-Primakoff realization of su(2) on the `(M+1)`-dimensional space.
#[derive(Debug, Clone, PartialEq)]
pub struct HpGenerators {
    /// `J0 = M/2 - N`
    pub j0: Operator,
    /// `J+ = sqrt(M - N) a`, a photon-lowering operator.
    pub jp: Operator,
    /// `J- = a+ sqrt(M - N)`
    pub jm: Operator,
}

pub fn hp_generators(m: usize) -> HpGenerators {
    let half = m as f64 / 2.0;
    let j0 = Operator::from_diagonal((0..=m).map(|n| C64::new(half - n as f64, 0.0)));
    let mut jp = Operator::zeros(m + 1);
    for n in 0..m {
        jp.entries[[n, n + 1]] = C64::new((((n + 1) * (m - n)) as f64).sqrt(), 0.0);
    }
    let jm = jp.dagger();
    HpGenerators { j0, jp, jm }
}

/// Matrix exponential by scaling and squaring with a truncated Taylor series.
///
/// The argument is scaled by `2^-s` until its 1-norm is at most 0.5; the
/// series stops once a term's Frobenius norm drops below `tol` times the
/// running sum.
pub fn matrix_exp(a: &Operator, tol: f64) -> Result<Operator> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(crate::error::invalid("tol", "must be positive"));
    }
    let dim = a.dim();
    let norm = a.one_norm();
    let squarings = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as i32
    } else {
        0
    };
    let scaled = a.scale(C64::new(2f64.powi(-squarings), 0.0));

    let mut result = Operator::identity(dim);
    let mut term = Operator::identity(dim);
    for j in 1..=64 {
        term = (&term * &scaled).scale(C64::new(1.0 / j as f64, 0.0));
        result = &result + &term;
        if term.frobenius_norm() < tol * result.frobenius_norm() {
            break;
        }
    }
    for _ in 0..squarings {
        result = &result * &result;
    }
    if result.entries.iter().any(|z| !z.is_finite()) {
        return Err(GbsError::NonFinite);
    }
    Ok(result)
}

fn check_dims(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(GbsError::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// `<u|v>`, conjugate-linear in `u`.
pub fn inner(u: &StateVector, v: &StateVector) -> Result<C64> {
    check_dims(u.dim(), v.dim())?;
    Ok(u.amps.iter().zip(v.amps.iter()).map(|(a, b)| a.conj() * b).sum())
}

pub fn norm(u: &StateVector) -> f64 {
    u.amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `|<u|v>|^2 / (||u||^2 ||v||^2)`.
pub fn fidelity(u: &StateVector, v: &StateVector) -> Result<f64> {
    let overlap = inner(u, v)?;
    let nu = u.amps.iter().map(|z| z.norm_sqr()).sum::<f64>();
    let nv = v.amps.iter().map(|z| z.norm_sqr()).sum::<f64>();
    if nu == 0.0 || nv == 0.0 {
        return Err(GbsError::ZeroVector);
    }
    Ok((overlap.norm_sqr() / (nu * nv)).min(1.0))
}

pub fn commutator(a: &Operator, b: &Operator) -> Result<Operator> {
    check_dims(a.dim(), b.dim())?;
    Ok(&(a * b) - &(b * a))
}

pub fn apply(a: &Operator, u: &StateVector) -> Result<StateVector> {
    check_dims(a.dim(), u.dim())?;
    Ok(StateVector {
        amps: a.entries.dot(&u.amps),
    })
}

/// `||A u - lambda u||_2`
pub fn eigen_residual(a: &Operator, lambda: C64, u: &StateVector) -> Result<f64> {
    let au = apply(a, u)?;
    Ok(au
        .amps
        .iter()
        .zip(u.amps.iter())
        .map(|(x, y)| (x - lambda * y).norm_sqr())
        .sum::<f64>()
        .sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn annihilation_small_cases() {
        let a0 = annihilation_operator(0);
        assert_eq!(a0.dim(), 1);
        assert_eq!(a0.get(0, 0), ZERO);

        let a2 = annihilation_operator(2);
        for i in 0..3 {
            for j in 0..3 {
                let expected = match (i, j) {
                    (0, 1) => c(1.0),
                    (1, 2) => c(2f64.sqrt()),
                    _ => ZERO,
                };
                assert_eq!(a2.get(i, j), expected, "({i},{j})");
            }
        }
    }

    #[test]
    fn number_operator_from_ladder() {
        for m in [1, 2, 3, 7] {
            let n = &creation_operator(m) * &annihilation_operator(m);
            assert!((&n - &number_operator(m)).frobenius_norm() < 1e-14);
        }
        let cr = creation_operator(1);
        assert_eq!(cr.get(1, 0), c(1.0));
        assert_eq!(cr.get(0, 1), ZERO);
        assert_eq!(number_operator(2).diagonal(), vec![c(0.0), c(1.0), c(2.0)]);
    }

    #[test]
    fn truncation_defect_of_canonical_commutator() {
        let m = 4;
        let comm = commutator(&annihilation_operator(m), &creation_operator(m)).unwrap();
        let mut expected = Operator::identity(m + 1);
        expected.entries[[m, m]] = c(1.0 - (m as f64 + 1.0));
        assert!((&comm - &expected).frobenius_norm() < 1e-13);
    }

    #[test]
    fn hp_spin_half_and_spin_one() {
        let g = hp_generators(1);
        assert_eq!(g.j0.diagonal(), vec![c(0.5), c(-0.5)]);
        assert_eq!(g.jp.get(0, 1), c(1.0));
        assert_eq!(g.jp.get(1, 0), ZERO);

        let g = hp_generators(2);
        assert!((g.jp.get(0, 1) - c(2f64.sqrt())).norm() < 1e-15);
        assert!((g.jp.get(1, 2) - c(2f64.sqrt())).norm() < 1e-15);
        assert_eq!(g.jm, g.jp.dagger());
    }

    #[test]
    fn hp_matches_operator_definition() {
        // J+ = sqrt(M - N) a built from the bosonic pieces.
        let m = 6;
        let root = Operator::from_diagonal((0..=m).map(|n| c(((m - n) as f64).sqrt())));
        let jp = &root * &annihilation_operator(m);
        assert!((&jp - &hp_generators(m).jp).frobenius_norm() < 1e-13);
    }

    #[test]
    fn su2_relations_up_to_forty() {
        for m in 0..=40 {
            let HpGenerators { j0, jp, jm } = hp_generators(m);
            let e1 = &commutator(&j0, &jp).unwrap() - &jp;
            let e2 = &commutator(&j0, &jm).unwrap() + &jm;
            let e3 = &commutator(&jp, &jm).unwrap() - &j0.scale(c(2.0));
            for e in [e1, e2, e3] {
                assert!(e.frobenius_norm() <= 1e-12, "M={m}: {}", e.frobenius_norm());
            }
        }
    }

    #[test]
    fn raising_generator_is_nilpotent() {
        for m in [0, 1, 5, 12] {
            let p = hp_generators(m).jp.powi(m as u32 + 1);
            assert_eq!(p.frobenius_norm(), 0.0);
        }
    }

    #[test]
    fn exp_of_zero_and_diagonal() {
        let e = matrix_exp(&Operator::zeros(3), DEFAULT_EXP_TOL).unwrap();
        assert_eq!(e, Operator::identity(3));

        let a = Operator::from_diagonal([C64::new(0.0, PI), ZERO]);
        let e = matrix_exp(&a, DEFAULT_EXP_TOL).unwrap();
        let expected = Operator::from_diagonal([c(-1.0), c(1.0)]);
        assert!((&e - &expected).frobenius_norm() < 1e-13);
    }

    #[test]
    fn exp_of_spin_half_rotation_generator() {
        let r = PI / 4.0;
        let g = hp_generators(1);
        let a = (&g.jm - &g.jp).scale(c(r));
        let e = matrix_exp(&a, DEFAULT_EXP_TOL).unwrap();
        // Closed-form 2x2: cos r I + sin r (J- - J+) since (J- - J+)^2 = -I.
        let expected = Operator::new(ndarray::array![[c(r.cos()), c(-r.sin())], [c(r.sin()), c(r.cos())]]).unwrap();
        assert!((&e - &expected).frobenius_norm() < 1e-14);
    }

    #[test]
    fn exp_of_large_argument_uses_squaring() {
        // exp(diag(10, -3)) checked against the scalar exponential.
        let a = Operator::from_diagonal([c(10.0), c(-3.0)]);
        let e = matrix_exp(&a, DEFAULT_EXP_TOL).unwrap();
        assert!(((e.get(0, 0).re - 10f64.exp()) / 10f64.exp()).abs() < 1e-13);
        assert!(((e.get(1, 1).re - (-3f64).exp()) / (-3f64).exp()).abs() < 1e-13);
    }

    #[test]
    fn operator_rejects_non_square() {
        let err = Operator::new(Array2::from_elem((2, 3), ZERO)).unwrap_err();
        assert_eq!(err, GbsError::NotSquare { rows: 2, cols: 3 });
        let err = Operator::new(ndarray::array![[C64::new(f64::NAN, 0.0)]]).unwrap_err();
        assert_eq!(err, GbsError::NonFinite);
    }

    #[test]
    fn fidelity_basics() {
        let v0 = StateVector::basis(3, 0);
        let v1 = StateVector::basis(3, 1);
        assert_eq!(fidelity(&v0, &v0).unwrap(), 1.0);
        assert_eq!(fidelity(&v0, &v1).unwrap(), 0.0);
        assert!(matches!(
            fidelity(&v0, &StateVector::basis(2, 0)),
            Err(GbsError::DimensionMismatch { .. })
        ));
        let zero = StateVector::new(vec![ZERO; 3]).unwrap();
        assert_eq!(fidelity(&v0, &zero), Err(GbsError::ZeroVector));
        assert!(StateVector::new(vec![]).is_err());
    }

    #[test]
    fn inner_is_conjugate_linear_in_first_slot() {
        let u = StateVector::new(vec![C64::new(0.0, 1.0), c(1.0)]).unwrap();
        let v = StateVector::basis(2, 0);
        assert_eq!(inner(&u, &v).unwrap(), C64::new(0.0, -1.0));
        assert_eq!(inner(&v, &u).unwrap(), C64::new(0.0, 1.0));
    }

    #[test]
    fn commutator_and_apply() {
        let n = number_operator(3);
        assert_eq!(commutator(&n, &n).unwrap().frobenius_norm(), 0.0);
        let out = apply(&n, &StateVector::basis(4, 2)).unwrap();
        assert_eq!(out, StateVector::basis(4, 2).scaled(c(2.0)));
        assert!(apply(&n, &StateVector::basis(3, 0)).is_err());
        assert!(commutator(&n, &number_operator(2)).is_err());
    }

    #[test]
    fn phase_convention_and_padding() {
        let v = StateVector::new(vec![ZERO, C64::new(0.0, -2.0), c(1.0)]).unwrap();
        let v = v.with_phase_convention();
        assert!((v.amps()[1] - c(2.0)).norm() < 1e-15);
        let p = v.padded(5).unwrap();
        assert_eq!(p.dim(), 5);
        assert_eq!(p.amps()[4], ZERO);
        assert!(v.padded(2).is_err());
    }

    fn arb_state(dim: usize) -> impl Strategy<Value = StateVector> {
        proptest::collection::vec((-1.0..1.0f64, -1.0..1.0f64), dim).prop_filter_map("nonzero", |pairs| {
            let v = StateVector::new(pairs.into_iter().map(|(a, b)| C64::new(a, b)).collect()).ok()?;
            (v.norm() > 1e-3).then_some(v)
        })
    }

    fn arb_operator(dim: usize, scale: f64) -> impl Strategy<Value = Operator> {
        proptest::collection::vec((-scale..scale, -scale..scale), dim * dim).prop_map(move |xs| {
            let data: Vec<C64> = xs.into_iter().map(|(a, b)| C64::new(a, b)).collect();
            Operator::new(Array2::from_shape_vec((dim, dim), data).unwrap()).unwrap()
        })
    }

    proptest! {
        #[test]
        fn fidelity_symmetric_and_phase_invariant(
            u in arb_state(6), v in arb_state(6), phi in -PI..PI
        ) {
            let f = fidelity(&u, &v).unwrap();
            prop_assert!((0.0..=1.0).contains(&f));
            prop_assert!((f - fidelity(&v, &u).unwrap()).abs() < 1e-14);
            let rotated = u.scaled(C64::from_polar(1.0, phi));
            prop_assert!((fidelity(&u, &rotated).unwrap() - 1.0).abs() < 1e-13);
        }

        #[test]
        fn exp_inverse_pair_unitary(a in arb_operator(5, 2.5)) {
            // Anti-Hermitian part of entries below 2.5*sqrt(2) keeps ||A||_F under 50.
            let skew = (&a - &a.dagger()).scale(c(0.5));
            prop_assume!(skew.frobenius_norm() <= 50.0);
            let e = matrix_exp(&skew, DEFAULT_EXP_TOL).unwrap();
            let einv = matrix_exp(&skew.scale(c(-1.0)), DEFAULT_EXP_TOL).unwrap();
            let err = (&(&e * &einv) - &Operator::identity(5)).frobenius_norm();
            prop_assert!(err <= 1e-11, "err {err}");
            prop_assert!(e.is_unitary());
        }

        #[test]
        fn exp_inverse_pair_general(a in arb_operator(5, 2.5)) {
            // Non-normal inputs lose accuracy in proportion to the growth of
            // both factors, so the bound is relative to it.
            let e = matrix_exp(&a, DEFAULT_EXP_TOL).unwrap();
            let einv = matrix_exp(&a.scale(c(-1.0)), DEFAULT_EXP_TOL).unwrap();
            let err = (&(&e * &einv) - &Operator::identity(5)).frobenius_norm();
            let growth = e.frobenius_norm() * einv.frobenius_norm();
            prop_assert!(err <= 1e-13 * growth, "err {err} growth {growth}");
        }
    }
}
