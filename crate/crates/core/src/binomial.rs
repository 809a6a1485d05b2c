//! Binomial states `|eta, M> = sum_n [C(M,n) eta^n (1-eta)^(M-n)]^(1/2) |n>`,
//! their ladder-operator characterization and their SU(2) displacement form.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::fock::{apply, eigen_residual, hp_generators, number_operator, Operator, StateVector, C64};
use crate::special::ln_binomial_row;
use crate::su2::{displacement, DisplacementParams};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinomialParams {
    pub eta: f64,
    pub m: usize,
}

impl BinomialParams {
    /// Accepts the closed interval `0 <= eta <= 1`.
    pub fn new(eta: f64, m: usize) -> Result<Self> {
        if !(0.0..=1.0).contains(&eta) {
            return Err(invalid("eta", format!("{eta} is outside [0, 1]")));
        }
        Ok(Self { eta, m })
    }

    fn require_open(&self) -> Result<()> {
        if !(self.eta > 0.0 && self.eta < 1.0) {
            return Err(invalid(
                "eta",
                format!("{} is outside the open interval (0, 1)", self.eta),
            ));
        }
        Ok(())
    }

    /// `r` with `sin r = sqrt(eta)`, `cos r = sqrt(1 - eta)`.
    pub fn rotation_angle(&self) -> f64 {
        self.eta.sqrt().asin()
    }
}

/// Binomial photon distribution `C(M,n) eta^n (1-eta)^(M-n)` evaluated in
/// log space.
pub fn binomial_distribution(p: &BinomialParams) -> Vec<f64> {
    let m = p.m;
    if p.eta == 0.0 || p.eta == 1.0 {
        let hit = if p.eta == 0.0 { 0 } else { m };
        return (0..=m).map(|n| if n == hit { 1.0 } else { 0.0 }).collect();
    }
    let ln_eta = p.eta.ln();
    let ln_rest = (-p.eta).ln_1p();
    ln_binomial_row(m)
        .into_iter()
        .enumerate()
        .map(|(n, lc)| (lc + n as f64 * ln_eta + (m - n) as f64 * ln_rest).exp())
        .collect()
}

pub fn binomial_amplitudes(p: &BinomialParams) -> StateVector {
    let amps: Vec<f64> = binomial_distribution(p).into_iter().map(f64::sqrt).collect();
    StateVector::from_real(&amps).expect("binomial amplitudes are finite and non-empty")
}

/// `|| (sqrt(eta) N + sqrt(1-eta) J+ - sqrt(eta) M) |eta,M> ||`.
pub fn ladder_residual(p: &BinomialParams) -> Result<f64> {
    p.require_open()?;
    let g = hp_generators(p.m);
    let op =
        &number_operator(p.m).scale(C64::new(p.eta.sqrt(), 0.0)) + &g.jp.scale(C64::new((1.0 - p.eta).sqrt(), 0.0));
    let eigenvalue = C64::new(p.eta.sqrt() * p.m as f64, 0.0);
    eigen_residual(&op, eigenvalue, &binomial_amplitudes(p))
}

/// Same check written with `J0`:
/// `|| (sqrt(eta) J0 - sqrt(1-eta) J+ + sqrt(eta) M/2) |eta,M> ||`.
pub fn ladder_residual_su2(p: &BinomialParams) -> Result<f64> {
    p.require_open()?;
    let g = hp_generators(p.m);
    let op: Operator = &g.j0.scale(C64::new(p.eta.sqrt(), 0.0)) - &g.jp.scale(C64::new((1.0 - p.eta).sqrt(), 0.0));
    let eigenvalue = C64::new(-p.eta.sqrt() * p.m as f64 / 2.0, 0.0);
    eigen_residual(&op, eigenvalue, &binomial_amplitudes(p))
}

/// `exp(-r (J+ - J-)) |0>`, i.e. `D(zeta)` with `zeta = r e^{i pi}`.
pub fn binomial_displacement_form(p: &BinomialParams) -> Result<StateVector> {
    p.require_open()?;
    let d = displacement(&DisplacementParams::new(p.rotation_angle(), PI, p.m)?)?;
    apply(&d, &StateVector::basis(p.m + 1, 0))
}
