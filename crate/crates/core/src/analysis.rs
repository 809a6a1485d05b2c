//! Reference states, photon statistics, limit scans and free evolution.
//!
//! The scans embed a dimension-`(M+1)` eigenstate into a larger truncated
//! Fock space (zero padding) before comparing it with a reference state, and
//! build the ladder operators used in residuals at that padded dimension.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, GbsError, Result};
use crate::fock::{
    annihilation_operator, apply, creation_operator, eigen_residual, fidelity, number_operator, StateVector, C64,
};
use crate::gbs::{eigenstate_sum, solve, GbsParams, RootPolicy};
use crate::special::ln_factorial;
use crate::su2::{displacement, DisplacementParams};

/// Largest probability mass a reference state may leave beyond its
/// truncation.
pub const REFERENCE_TAIL_BOUND: f64 = 1e-12;

/// Which eigenstate index `k` a limit scan follows as `M` grows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "rule", content = "offset", rename_all = "kebab-case")]
pub enum KRule {
    /// `k = floor(M/2) + p`
    Center(i64),
    /// `k = M - p`
    TopOffset(usize),
    /// `k = p`
    Bottom(usize),
}

impl KRule {
    pub fn index(&self, m: usize) -> Result<usize> {
        let k = match *self {
            KRule::Center(p) => (m / 2) as i64 + p,
            KRule::TopOffset(p) => m as i64 - p as i64,
            KRule::Bottom(p) => p as i64,
        };
        if k < 0 || k > m as i64 {
            return Err(invalid("k_rule", format!("{self:?} gives k = {k} outside 0..={m}")));
        }
        Ok(k as usize)
    }
}

/// Fixed `alpha = sqrt(eta M)` followed along ascending `M`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitSchedule {
    pub alpha: f64,
    pub m_values: Vec<usize>,
    pub k_rule: KRule,
}

impl LimitSchedule {
    pub fn new(alpha: f64, m_values: Vec<usize>, k_rule: KRule) -> Result<Self> {
        let s = Self {
            alpha,
            m_values,
            k_rule,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha.is_finite() && self.alpha > 0.0) {
            return Err(invalid("alpha", format!("{} must be finite and positive", self.alpha)));
        }
        if self.m_values.is_empty() {
            return Err(invalid("m_values", "schedule is empty"));
        }
        if self.m_values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(invalid("m_values", "must be strictly ascending"));
        }
        for &m in &self.m_values {
            let eta = self.eta(m);
            if !(eta > 0.0 && eta < 1.0) {
                return Err(invalid(
                    "m_values",
                    format!("eta = alpha^2/M = {eta} at M = {m} is outside (0, 1)"),
                ));
            }
            self.k_rule.index(m)?;
        }
        Ok(())
    }

    pub fn eta(&self, m: usize) -> f64 {
        self.alpha * self.alpha / m as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhotonStatistics {
    pub mean: f64,
    pub variance: f64,
    /// `None` when the mean photon number is at or below `1e-14`.
    pub mandel_q: Option<f64>,
    pub distribution: Vec<f64>,
}

/// Truncation used for reference states of amplitude `amplitude`.
pub fn reference_dim(amplitude: f64, requested: usize) -> usize {
    let a2 = (amplitude * amplitude).ceil() as usize;
    (4 * a2 + 60).max(requested)
}

/// `e^{-|alpha|^2/2} sum_n alpha^n / sqrt(n!) |n>` truncated to `dim`.
pub fn coherent_state(alpha: C64, dim: usize) -> Result<StateVector> {
    if !alpha.is_finite() {
        return Err(GbsError::NonFinite);
    }
    if dim == 0 {
        return Err(GbsError::EmptyState);
    }
    if alpha.norm() == 0.0 {
        return Ok(StateVector::basis(dim, 0));
    }
    let a2 = alpha.norm_sqr();
    let ln_a = alpha.norm().ln();
    let phase = alpha.arg();
    let ln_p = |n: usize, ln_fact: f64| -a2 + 2.0 * n as f64 * ln_a - ln_fact;

    let mut amps = Vec::with_capacity(dim);
    let mut ln_fact = 0.0;
    for n in 0..dim {
        if n > 0 {
            ln_fact += (n as f64).ln();
        }
        amps.push(C64::from_polar((0.5 * ln_p(n, ln_fact)).exp(), n as f64 * phase));
    }

    let mut tail = 0.0;
    let mut ln_fact = ln_factorial(dim);
    let mut n = dim;
    loop {
        let term = ln_p(n, ln_fact).exp();
        tail += term;
        if n as f64 > a2 && term <= tail * 1e-17 {
            break;
        }
        n += 1;
        ln_fact += (n as f64).ln();
    }
    if tail > REFERENCE_TAIL_BOUND {
        return Err(GbsError::TruncationTooSmall {
            dim,
            tail,
            bound: REFERENCE_TAIL_BOUND,
        });
    }
    StateVector::new(amps)?.normalized()
}

/// Eigenstate of `mu a + nu a^dagger` with eigenvalue `lambda`, from the
/// recursion `mu sqrt(n+1) C_{n+1} = lambda C_n - nu sqrt(n) C_{n-1}`.
pub fn squeezed_eigenstate(mu: C64, nu: C64, lambda: C64, dim: usize) -> Result<StateVector> {
    if !(mu.is_finite() && nu.is_finite() && lambda.is_finite()) {
        return Err(GbsError::NonFinite);
    }
    if dim == 0 {
        return Err(GbsError::EmptyState);
    }
    if mu.norm() == 0.0 || nu.norm() >= mu.norm() {
        return Err(invalid("nu", format!("|nu/mu| must be below 1 (mu = {mu}, nu = {nu})")));
    }
    // Run past `dim` to measure the discarded tail.
    let len = 2 * dim + 64;
    let mut c = vec![C64::new(0.0, 0.0); len];
    c[0] = C64::new(1.0, 0.0);
    for n in 0..len - 1 {
        let prev = if n > 0 {
            nu * (n as f64).sqrt() * c[n - 1]
        } else {
            C64::new(0.0, 0.0)
        };
        c[n + 1] = (lambda * c[n] - prev) / (mu * ((n + 1) as f64).sqrt());
        if c[n + 1].norm() > 1e150 {
            c.iter_mut().take(n + 2).for_each(|z| *z *= 1e-150);
        }
    }
    let total: f64 = c.iter().map(|z| z.norm_sqr()).sum();
    let tail: f64 = c[dim..].iter().map(|z| z.norm_sqr()).sum::<f64>() / total;
    if !tail.is_finite() || tail > REFERENCE_TAIL_BOUND {
        return Err(GbsError::TruncationTooSmall {
            dim,
            tail,
            bound: REFERENCE_TAIL_BOUND,
        });
    }
    c.truncate(dim);
    StateVector::new(c)?.normalized()
}

pub fn photon_statistics(v: &StateVector) -> Result<PhotonStatistics> {
    let norm_sqr = v.norm().powi(2);
    if norm_sqr == 0.0 {
        return Err(GbsError::ZeroVector);
    }
    let distribution: Vec<f64> = v.probabilities().into_iter().map(|p| p / norm_sqr).collect();
    let mean: f64 = distribution.iter().enumerate().map(|(n, p)| n as f64 * p).sum();
    let second: f64 = distribution.iter().enumerate().map(|(n, p)| (n * n) as f64 * p).sum();
    let variance = second - mean * mean;
    let mandel_q = (mean > 1e-14).then(|| (variance - mean) / mean);
    Ok(PhotonStatistics {
        mean,
        variance,
        mandel_q,
        distribution,
    })
}

/// Eigenstate `k` of any branch that provides it.
pub fn gbs_eigenstate(p: &GbsParams, k: usize) -> Result<StateVector> {
    match eigenstate_sum(p, k, RootPolicy::Principal) {
        Err(GbsError::WrongBranch { .. }) => {
            let sol = solve(p, RootPolicy::Principal)?;
            let max = sol.eigenstates.len() - 1;
            sol.eigenstates
                .into_iter()
                .nth(k)
                .ok_or(GbsError::IndexOutOfRange { k, max })
        }
        other => other,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NumberLimitPoint {
    pub eta: f64,
    /// Fidelity with `|k>`.
    pub fidelity: f64,
    /// `||(N - k) v||`
    pub residual: f64,
}

pub fn number_limit_scan(mu: C64, nu: C64, m: usize, k: usize, etas: &[f64]) -> Result<Vec<NumberLimitPoint>> {
    if k > m {
        return Err(GbsError::IndexOutOfRange { k, max: m });
    }
    let params = etas
        .iter()
        .map(|&eta| GbsParams::new(mu, nu, eta, m))
        .collect::<Result<Vec<_>>>()?;
    let n_op = number_operator(m);
    params
        .par_iter()
        .map(|p| {
            let v = gbs_eigenstate(p, k)?;
            Ok(NumberLimitPoint {
                eta: p.eta,
                fidelity: fidelity(&v, &StateVector::basis(m + 1, k))?,
                residual: eigen_residual(&n_op, C64::new(k as f64, 0.0), &v)?,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SqueezedLimitPoint {
    pub m: usize,
    pub eta: f64,
    pub k: usize,
    /// `||(mu a + nu a^dagger - alpha/2) v||`
    pub residual: f64,
    /// Fidelity with the squeezed eigenstate of eigenvalue `alpha/2`.
    pub fidelity: f64,
    /// Fidelity with the squeezed eigenstate of eigenvalue `alpha/sqrt(2)`.
    pub fidelity_alt: f64,
}

/// Which limiting eigenvalue of `mu a + nu a^dagger` the scan converges to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AmplitudeVerdict {
    /// `alpha / 2`
    Half,
    /// `alpha / sqrt(2)`
    InverseSqrt2,
    Neither,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SqueezedLimitScan {
    pub points: Vec<SqueezedLimitPoint>,
    pub verdict: AmplitudeVerdict,
}

/// Verdict from the largest-`M` point: the candidate whose fidelity is at
/// least `0.99` and higher than the other.
pub fn amplitude_verdict(points: &[SqueezedLimitPoint]) -> AmplitudeVerdict {
    match points.last() {
        Some(p) if p.fidelity >= 0.99 && p.fidelity >= p.fidelity_alt => AmplitudeVerdict::Half,
        Some(p) if p.fidelity_alt >= 0.99 => AmplitudeVerdict::InverseSqrt2,
        _ => AmplitudeVerdict::Neither,
    }
}

pub fn squeezed_limit_scan(mu: C64, nu: C64, schedule: &LimitSchedule) -> Result<SqueezedLimitScan> {
    schedule.validate()?;
    if !matches!(schedule.k_rule, KRule::Center(_)) {
        return Err(invalid("k_rule", "the squeezed limit follows the Center rule"));
    }
    if mu.norm() == 0.0 || nu.norm() >= mu.norm() {
        return Err(invalid("nu", format!("|nu/mu| must be below 1 (mu = {mu}, nu = {nu})")));
    }
    let alpha = schedule.alpha;
    let points = schedule
        .m_values
        .par_iter()
        .map(|&m| {
            let eta = schedule.eta(m);
            let k = schedule.k_rule.index(m)?;
            let dim = reference_dim(alpha, m + 1);
            let v = gbs_eigenstate(&GbsParams::new(mu, nu, eta, m)?, k)?.padded(dim)?;
            let op = &annihilation_operator(dim - 1).scale(mu) + &creation_operator(dim - 1).scale(nu);
            let half = C64::new(alpha / 2.0, 0.0);
            let alt = C64::new(alpha * FRAC_1_SQRT_2, 0.0);
            Ok(SqueezedLimitPoint {
                m,
                eta,
                k,
                residual: eigen_residual(&op, half, &v)?,
                fidelity: fidelity(&v, &squeezed_eigenstate(mu, nu, half, dim)?)?,
                fidelity_alt: fidelity(&v, &squeezed_eigenstate(mu, nu, alt, dim)?)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let verdict = amplitude_verdict(&points);
    Ok(SqueezedLimitScan { points, verdict })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoherentLimitPoint {
    pub m: usize,
    pub eta: f64,
    pub k: usize,
    /// `||(a - beta) v||` for the reference amplitude `beta`.
    pub residual: f64,
    pub fidelity: f64,
}

/// `nu = 0`, `mu = e^{i phi}`. `TopOffset` states tend to the coherent state
/// `|alpha e^{-i phi}>`, `Bottom` states to the vacuum.
pub fn coherent_limit_scan(phi: f64, schedule: &LimitSchedule) -> Result<Vec<CoherentLimitPoint>> {
    schedule.validate()?;
    let beta = match schedule.k_rule {
        KRule::TopOffset(_) => C64::from_polar(schedule.alpha, -phi),
        KRule::Bottom(_) => C64::new(0.0, 0.0),
        KRule::Center(_) => return Err(invalid("k_rule", "the coherent limit follows TopOffset or Bottom")),
    };
    let mu = C64::from_polar(1.0, phi);
    schedule
        .m_values
        .par_iter()
        .map(|&m| {
            let eta = schedule.eta(m);
            let k = schedule.k_rule.index(m)?;
            let dim = reference_dim(schedule.alpha, m + 1);
            let v = gbs_eigenstate(&GbsParams::new(mu, C64::new(0.0, 0.0), eta, m)?, k)?.padded(dim)?;
            Ok(CoherentLimitPoint {
                m,
                eta,
                k,
                residual: eigen_residual(&annihilation_operator(dim - 1), beta, &v)?,
                fidelity: fidelity(&v, &coherent_state(beta, dim)?)?,
            })
        })
        .collect()
}

/// Free evolution under `omega (N + 1/2)`: `C_n -> e^{-i omega t (n + 1/2)} C_n`.
pub fn time_evolve(v: &StateVector, omega: f64, t: f64) -> StateVector {
    let wt = omega * t;
    let amps = v
        .as_slice()
        .iter()
        .enumerate()
        .map(|(n, z)| z * C64::from_polar(1.0, -wt * (n as f64 + 0.5)))
        .collect();
    StateVector::new(amps).expect("evolution preserves dimension and finiteness")
}

/// Eigenstate `k` for `mu = e^{i phi}`, `nu = 0`.
pub fn phased_eigenstate(eta: f64, phi: f64, m: usize, k: usize) -> Result<StateVector> {
    gbs_eigenstate(
        &GbsParams::new(C64::from_polar(1.0, phi), C64::new(0.0, 0.0), eta, m)?,
        k,
    )
}

/// Fidelity between the evolved `phi` state and the state rebuilt at
/// `phi + omega t`.
pub fn time_shift_fidelity(eta: f64, m: usize, k: usize, phi: f64, omega: f64, t: f64) -> Result<f64> {
    let evolved = time_evolve(&phased_eigenstate(eta, phi, m, k)?, omega, t);
    fidelity(&evolved, &phased_eigenstate(eta, phi + omega * t, m, k)?)
}

/// `exp(xi' J+ - xi'^* J-) |0>` with `xi' = -atan(sqrt(eta/(1-eta))) e^{i phi}`.
pub fn su2_coherent_form(eta: f64, phi: f64, m: usize) -> Result<StateVector> {
    if !(eta > 0.0 && eta < 1.0) {
        return Err(invalid("eta", format!("{eta} is outside the open interval (0, 1)")));
    }
    let r = (eta / (1.0 - eta)).sqrt().atan();
    let d = displacement(&DisplacementParams::new(r, phi + PI, m)?)?;
    apply(&d, &StateVector::basis(m + 1, 0))
}
