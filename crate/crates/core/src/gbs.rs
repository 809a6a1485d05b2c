//! Closed-form solution of the generalized binomial state (GBS) eigenproblem
//!
//! ```text
//! L = sqrt(1-eta) (mu J+ + nu J-) - sqrt(eta) J0,     L |v_k> = delta_k |v_k>
//! ```
//!
//! on the `(M+1)`-dimensional Holstein-Primakoff space. The pipeline:
//!
//! 1. pick a root `Delta` of `mu sqrt(1-eta) Delta^2 + sqrt(eta) Delta - sqrt(1-eta) nu = 0`;
//! 2. set `zeta = r e^{i theta}` with `Delta = e^{-i theta} tan r`;
//! 3. conjugating by `D(zeta)` turns `L` into `A+ J+ - A0 J0` (the `J-`
//!    coefficient `A-` vanishes by the choice of root), an upper-triangular
//!    matrix with diagonal `A0 (n - M/2)`;
//! 4. its eigenvalues are `delta_k = A0 (2k - M) / 2` and its eigenvectors
//!    follow from a two-term recursion, supported on `n <= k`;
//! 5. displace back: `|v_k> = D(zeta) ||v_k>`.
//!
//! When `mu = nu*` the operator is Hermitian and `A+` vanishes as well, so
//! the undisplaced eigenvectors are number states. When `A0 = 0` (that is,
//! `eta + 4 (1-eta) mu nu = 0`) all eigenvalues collapse to zero and the
//! operator is a single Jordan chain; this is reported rather than hidden.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, GbsError, Result};
use crate::fock::{apply, creation_operator, hp_generators, norm, Operator, StateVector, C64};
use crate::special::ln_binomial_row;
use crate::su2::{delta_to_zeta, displacement, DisplacementParams};

/// `|A+| <= DEGENERATE_TOL * (|mu| + |nu| + 1)` selects the number-state branch.
pub const DEGENERATE_TOL: f64 = 1e-10;
/// `|A0| <= DEFECTIVE_TOL * (|mu| + |nu| + 1)` flags the collapsed spectrum.
pub const DEFECTIVE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GbsParams {
    pub mu: C64,
    pub nu: C64,
    pub eta: f64,
    pub m: usize,
}

impl GbsParams {
    pub fn new(mu: C64, nu: C64, eta: f64, m: usize) -> Result<Self> {
        if !mu.is_finite() || mu.norm() == 0.0 {
            return Err(invalid("mu", "must be finite and nonzero"));
        }
        if !nu.is_finite() {
            return Err(invalid("nu", "must be finite"));
        }
        if !(eta > 0.0 && eta < 1.0) {
            return Err(invalid("eta", format!("{eta} is outside the open interval (0, 1)")));
        }
        Ok(Self { mu, nu, eta, m })
    }

    pub fn dim(&self) -> usize {
        self.m + 1
    }

    /// `|mu| + |nu| + 1`, the reference magnitude for branch thresholds.
    pub fn scale(&self) -> f64 {
        self.mu.norm() + self.nu.norm() + 1.0
    }

    fn sqrt_eta(&self) -> f64 {
        self.eta.sqrt()
    }

    fn sqrt_rest(&self) -> f64 {
        (1.0 - self.eta).sqrt()
    }
}

/// Which root of the constraint quadratic fixes the rotation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RootPolicy {
    /// Smaller `|Delta|`; ties go to the root with nonnegative real part.
    #[default]
    Principal,
    Secondary,
}

impl FromStr for RootPolicy {
    type Err = GbsError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "principal" => Ok(Self::Principal),
            "secondary" => Ok(Self::Secondary),
            other => Err(invalid("root", format!("unknown root policy `{other}`"))),
        }
    }
}

impl fmt::Display for RootPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Principal => "principal",
            Self::Secondary => "secondary",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolutionKind {
    Generic,
    DegenerateAPlusZero,
    DefectiveAZeroZero,
}

impl fmt::Display for SolutionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Generic => "generic",
            Self::DegenerateAPlusZero => "degenerate-a-plus-zero",
            Self::DefectiveAZeroZero => "defective-a-zero-zero",
        })
    }
}

/// Coefficients of `J+`, `J-` and `-J0` in `D^-1 L D`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoefficientTriple {
    pub a_plus: C64,
    pub a_minus: C64,
    pub a_zero: C64,
}

impl CoefficientTriple {
    pub fn eigenvalue(&self, m: usize, k: usize) -> C64 {
        self.a_zero * (0.5 * (2.0 * k as f64 - m as f64))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GbsSolution {
    pub params: GbsParams,
    pub root_policy: RootPolicy,
    pub delta_root: C64,
    pub zeta: DisplacementParams,
    pub triple: CoefficientTriple,
    /// `delta_k` for `k = 0..=M`, ascending in `k`.
    pub eigenvalues: Vec<C64>,
    /// One normalized eigenstate per eigenvalue, except for the defective
    /// kind, which carries only the single genuine eigenvector (`k = 0`).
    pub eigenstates: Vec<StateVector>,
    pub kind: SolutionKind,
}

/// `sqrt(1-eta) (mu J+ + nu J-) - sqrt(eta) J0`.
pub fn build_operator(p: &GbsParams) -> Operator {
    let g = hp_generators(p.m);
    let s = C64::new(p.sqrt_rest(), 0.0);
    let ladder = &g.jp.scale(p.mu * s) + &g.jm.scale(p.nu * s);
    &ladder - &g.j0.scale(C64::new(p.sqrt_eta(), 0.0))
}

/// Both roots of `mu sqrt(1-eta) D^2 + sqrt(eta) D - sqrt(1-eta) nu = 0`,
/// ordered as `(-b + s) / 2a` then `(-b - s) / 2a` with `s` the principal
/// square root of the discriminant.
pub fn constraint_roots(p: &GbsParams) -> (C64, C64) {
    let a = p.mu * p.sqrt_rest();
    let b = p.sqrt_eta();
    let c = -p.nu * p.sqrt_rest();
    let disc = C64::new(b * b, 0.0) - a * c * 4.0;
    let s = disc.sqrt();
    // b > 0 and Re(s) >= 0, so b + s never cancels.
    let q = -(s + b) * 0.5;
    (c / q, q / a)
}

pub fn select_root(p: &GbsParams, policy: RootPolicy) -> C64 {
    let (r1, r2) = constraint_roots(p);
    let (n1, n2) = (r1.norm(), r2.norm());
    let tie = (n1 - n2).abs() <= 1e-14 * n1.max(n2);
    let principal_first = if tie { r1.re >= 0.0 || r2.re < 0.0 } else { n1 < n2 };
    match (policy, principal_first) {
        (RootPolicy::Principal, true) | (RootPolicy::Secondary, false) => r1,
        _ => r2,
    }
}

/// `(A+, A-, A0)` for the rotation fixed by `delta`.
pub fn coefficient_triple(p: &GbsParams, delta: C64) -> CoefficientTriple {
    let z = delta_to_zeta(delta, p.m);
    triple_from_rotation(p, z.r, z.theta)
}

fn triple_from_rotation(p: &GbsParams, r: f64, theta: f64) -> CoefficientTriple {
    let (se, sr) = (p.sqrt_eta(), p.sqrt_rest());
    let cos_sq = r.cos().powi(2);
    let sin_sq = r.sin().powi(2);
    let sin_2r = (2.0 * r).sin();
    let e = C64::from_polar(1.0, theta);
    let e_inv = e.conj();

    let a_plus = (p.mu * cos_sq - p.nu * sin_sq * e * e) * sr - e * (0.5 * se * sin_2r);
    let a_minus = (p.nu * cos_sq - p.mu * sin_sq * e_inv * e_inv) * sr - e_inv * (0.5 * se * sin_2r);
    let a_zero = (p.mu * e_inv + p.nu * e) * (sr * sin_2r) + se * (2.0 * r).cos();
    CoefficientTriple {
        a_plus,
        a_minus,
        a_zero,
    }
}

pub fn classify(p: &GbsParams, triple: &CoefficientTriple) -> SolutionKind {
    let scale = p.scale();
    if triple.a_zero.norm() <= DEFECTIVE_TOL * scale || discriminant_vanishes(p) {
        SolutionKind::DefectiveAZeroZero
    } else if triple.a_plus.norm() <= DEGENERATE_TOL * scale {
        SolutionKind::DegenerateAPlusZero
    } else {
        SolutionKind::Generic
    }
}

/// `A0^2` equals `eta + 4(1-eta) mu nu`, so a discriminant that is zero up to
/// its own rounding marks the defective case even when the computed `A0`
/// (a square root of that rounding) is far above `DEFECTIVE_TOL`.
fn discriminant_vanishes(p: &GbsParams) -> bool {
    let prod = p.mu * p.nu;
    let disc = p.eta + 4.0 * (1.0 - p.eta) * prod;
    let magnitude = p.eta + 4.0 * (1.0 - p.eta) * prod.norm();
    disc.norm() <= 8.0 * f64::EPSILON * magnitude
}

struct Reduction {
    delta: C64,
    zeta: DisplacementParams,
    triple: CoefficientTriple,
    kind: SolutionKind,
}

fn reduce(p: &GbsParams, policy: RootPolicy) -> Reduction {
    let delta = select_root(p, policy);
    let zeta = delta_to_zeta(delta, p.m);
    let triple = triple_from_rotation(p, zeta.r, zeta.theta);
    let kind = classify(p, &triple);
    Reduction {
        delta,
        zeta,
        triple,
        kind,
    }
}

fn eigenvalues(triple: &CoefficientTriple, m: usize) -> Vec<C64> {
    (0..=m).map(|k| triple.eigenvalue(m, k)).collect()
}

/// `delta_k = A0 (2k - M) / 2` for `k = 0..=M`.
pub fn spectrum(p: &GbsParams, policy: RootPolicy) -> Result<Vec<C64>> {
    let red = reduce(p, policy);
    if red.kind == SolutionKind::DefectiveAZeroZero {
        return Err(GbsError::DefectiveSpectrum);
    }
    Ok(eigenvalues(&red.triple, p.m))
}

fn check_index(k: usize, m: usize) -> Result<()> {
    if k > m {
        return Err(GbsError::IndexOutOfRange { k, max: m });
    }
    Ok(())
}

/// Eigenvector of `A+ J+ - A0 J0` for `delta_k`, from the binomial sum
/// `C_n ~ C(k,n) C(M,n)^(-1/2) (A0/A+)^n`, evaluated in log space.
pub fn undisplaced_eigenstate_sum(triple: &CoefficientTriple, m: usize, k: usize) -> Result<StateVector> {
    check_index(k, m)?;
    if triple.a_plus.norm() == 0.0 {
        return Ok(StateVector::basis(m + 1, k));
    }
    let ratio = triple.a_zero / triple.a_plus;
    if ratio.norm() == 0.0 {
        return Ok(StateVector::basis(m + 1, 0));
    }
    let (ln_ratio, phase) = (ratio.norm().ln(), ratio.arg());
    let row_k = ln_binomial_row(k);
    let row_m = ln_binomial_row(m);
    let logs: Vec<f64> = (0..=k)
        .map(|n| row_k[n] - 0.5 * row_m[n] + n as f64 * ln_ratio)
        .collect();
    let peak = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut amps = vec![C64::new(0.0, 0.0); m + 1];
    for (n, l) in logs.into_iter().enumerate() {
        amps[n] = C64::from_polar((l - peak).exp(), n as f64 * phase);
    }
    Ok(StateVector::new(amps)?.normalized()?.with_phase_convention())
}

/// Same eigenvector as [`undisplaced_eigenstate_sum`], built as
/// `exp{(A0/A+) sqrt((k-N+1)/(M-N+1)) J-_k} |0>` with `J-_k = a+ sqrt(k-N)`.
pub fn undisplaced_eigenstate_exponential(triple: &CoefficientTriple, m: usize, k: usize) -> Result<StateVector> {
    check_index(k, m)?;
    if triple.a_plus.norm() == 0.0 {
        return Ok(StateVector::basis(m + 1, k));
    }
    let ratio = triple.a_zero / triple.a_plus;
    let dim = m + 1;
    let weight = |n: usize| -> C64 {
        // square roots of negative arguments only act on states beyond |k+1>,
        // which the series never reaches
        C64::new(((k as f64 - n as f64).max(0.0)).sqrt(), 0.0)
    };
    let root_k = Operator::from_diagonal((0..dim).map(weight));
    let lowering_k = &creation_operator(m) * &root_k;
    let f = Operator::from_diagonal((0..dim).map(|n| {
        let num = (k as f64 - n as f64 + 1.0).max(0.0);
        C64::new((num / (m as f64 - n as f64 + 1.0)).sqrt(), 0.0)
    }));
    let generator = (&f * &lowering_k).scale(ratio);

    // X is nilpotent and raises n by one, so the series ends after k terms.
    let mut term = StateVector::basis(dim, 0);
    let mut sum = term.clone();
    for j in 1..=k {
        term = apply(&generator, &term)?.scaled(C64::new(1.0 / j as f64, 0.0));
        let t = norm(&term);
        if t > 1e100 {
            let s = C64::new(1.0 / t, 0.0);
            term = term.scaled(s);
            sum = sum.scaled(s);
        }
        sum = StateVector::from_array(sum.amps() + term.amps())?;
    }
    Ok(sum.normalized()?.with_phase_convention())
}

fn displaced(d: &Operator, v: &StateVector) -> Result<StateVector> {
    Ok(apply(d, v)?.normalized()?.with_phase_convention())
}

fn require_kind(found: SolutionKind, expected: SolutionKind) -> Result<()> {
    if found != expected {
        return Err(GbsError::WrongBranch {
            expected: match expected {
                SolutionKind::Generic => "generic",
                SolutionKind::DegenerateAPlusZero => "degenerate-a-plus-zero",
                SolutionKind::DefectiveAZeroZero => "defective-a-zero-zero",
            },
            found,
        });
    }
    Ok(())
}

/// `D(zeta)` applied to the binomial-sum eigenvector of the reduced operator.
pub fn eigenstate_sum(p: &GbsParams, k: usize, policy: RootPolicy) -> Result<StateVector> {
    check_index(k, p.m)?;
    let red = reduce(p, policy);
    require_kind(red.kind, SolutionKind::Generic)?;
    let d = displacement(&red.zeta)?;
    displaced(&d, &undisplaced_eigenstate_sum(&red.triple, p.m, k)?)
}

/// `D(zeta)` applied to the exponential-form eigenvector of the reduced operator.
pub fn eigenstate_exponential(p: &GbsParams, k: usize, policy: RootPolicy) -> Result<StateVector> {
    check_index(k, p.m)?;
    let red = reduce(p, policy);
    require_kind(red.kind, SolutionKind::Generic)?;
    let d = displacement(&red.zeta)?;
    displaced(&d, &undisplaced_eigenstate_exponential(&red.triple, p.m, k)?)
}

/// Displaced number states `D(zeta)|k>` for the `A+ = 0` branch.
pub fn degenerate_eigenstates(p: &GbsParams, policy: RootPolicy) -> Result<Vec<StateVector>> {
    let red = reduce(p, policy);
    require_kind(red.kind, SolutionKind::DegenerateAPlusZero)?;
    let d = displacement(&red.zeta)?;
    (0..=p.m)
        .map(|k| Ok(d.column(k).normalized()?.with_phase_convention()))
        .collect()
}

pub fn solve(p: &GbsParams, policy: RootPolicy) -> Result<GbsSolution> {
    let red = reduce(p, policy);
    let d = displacement(&red.zeta)?;
    let m = p.m;
    let eigenstates = match red.kind {
        SolutionKind::Generic => (0..=m)
            .map(|k| displaced(&d, &undisplaced_eigenstate_sum(&red.triple, m, k)?))
            .collect::<Result<Vec<_>>>()?,
        SolutionKind::DegenerateAPlusZero => (0..=m)
            .map(|k| Ok(d.column(k).normalized()?.with_phase_convention()))
            .collect::<Result<Vec<_>>>()?,
        SolutionKind::DefectiveAZeroZero => vec![d.column(0).normalized()?.with_phase_convention()],
    };
    let eigenvalues = match red.kind {
        SolutionKind::DefectiveAZeroZero => vec![C64::new(0.0, 0.0); m + 1],
        _ => eigenvalues(&red.triple, m),
    };
    Ok(GbsSolution {
        params: *p,
        root_policy: policy,
        delta_root: red.delta,
        zeta: red.zeta,
        triple: red.triple,
        eigenvalues,
        eigenstates,
        kind: red.kind,
    })
}

/// Parameters of the phased binomial state that the `k = M` undisplaced
/// eigenvector reduces to.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinomialPhase {
    /// `|A0|^2 / (|A0|^2 + |A+|^2)`
    pub eta_prime: f64,
    pub theta_zero: f64,
    pub theta_plus: f64,
}

impl BinomialPhase {
    /// `sum_n beta_n^M(eta') e^{i n (theta0 - theta+)} |n>`
    pub fn state(&self, m: usize) -> StateVector {
        let base = crate::binomial::binomial_distribution(&crate::binomial::BinomialParams { eta: self.eta_prime, m });
        let dphi = self.theta_zero - self.theta_plus;
        let amps = base
            .into_iter()
            .enumerate()
            .map(|(n, pr)| C64::from_polar(pr.sqrt(), n as f64 * dphi))
            .collect();
        StateVector::new(amps).expect("binomial amplitudes are finite")
    }
}

pub fn binomial_phase_parameters(p: &GbsParams, policy: RootPolicy) -> Result<BinomialPhase> {
    let red = reduce(p, policy);
    require_kind(red.kind, SolutionKind::Generic)?;
    let (a0, ap) = (red.triple.a_zero, red.triple.a_plus);
    Ok(BinomialPhase {
        eta_prime: a0.norm_sqr() / (a0.norm_sqr() + ap.norm_sqr()),
        theta_zero: a0.arg(),
        theta_plus: ap.arg(),
    })
}
