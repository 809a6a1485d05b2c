//! SU(2) displacement operators `D(zeta) = exp(zeta J+ - zeta* J-)` on the
//! Holstein-Primakoff space, their disentangled product form, and the
//! adjoint action `D^-1 J D` in closed form.

use std::f64::consts::{FRAC_PI_2, PI};

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::ddouble::{Dd, DdComplex};
use crate::error::{GbsError, Result};
use crate::fock::{hp_generators, matrix_exp, Operator, C64, DEFAULT_EXP_TOL};

/// `zeta = r e^{i theta}` acting on the `(M+1)`-dimensional space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DisplacementParams {
    pub r: f64,
    pub theta: f64,
    pub m: usize,
}

impl DisplacementParams {
    pub fn new(r: f64, theta: f64, m: usize) -> Result<Self> {
        if !r.is_finite() || r < 0.0 {
            return Err(crate::error::invalid("r", format!("{r} must be finite and >= 0")));
        }
        if !theta.is_finite() {
            return Err(crate::error::invalid("theta", "must be finite"));
        }
        Ok(Self {
            r,
            theta: wrap_phase(theta),
            m,
        })
    }

    pub fn zeta(&self) -> C64 {
        C64::from_polar(self.r, self.theta)
    }
}

/// Maps an angle into `(-pi, pi]`.
pub(crate) fn wrap_phase(theta: f64) -> f64 {
    let mut t = theta % (2.0 * PI);
    if t <= -PI {
        t += 2.0 * PI;
    } else if t > PI {
        t -= 2.0 * PI;
    }
    t
}

/// Inverts `delta = e^{-i theta} tan r` on the branch `r in [0, pi/2)`.
///
/// `delta = 0` maps to `theta = 0`.
pub fn delta_to_zeta(delta: C64, m: usize) -> DisplacementParams {
    let r = delta.norm().atan();
    let theta = if delta.norm() == 0.0 {
        0.0
    } else {
        wrap_phase(-delta.arg())
    };
    DisplacementParams { r, theta, m }
}

/// `D(zeta)` via the generic matrix exponential.
pub fn displacement(p: &DisplacementParams) -> Result<Operator> {
    let g = hp_generators(p.m);
    let zeta = p.zeta();
    let generator = &g.jp.scale(zeta) - &g.jm.scale(zeta.conj());
    matrix_exp(&generator, DEFAULT_EXP_TOL)
}

/// `exp(t J+)` as an exact polynomial: entry `(k, k+j)` is
/// `t^j / j! * prod_{n=k}^{k+j-1} sqrt((n+1)(M-n))`. `exp(t J-)` is the
/// transpose pattern with the same weights.
fn raising_exp_dd(m: usize, t: DdComplex) -> Vec<Vec<DdComplex>> {
    let dim = m + 1;
    let mut out = vec![vec![DdComplex::ZERO; dim]; dim];
    for k in 0..dim {
        let mut entry = DdComplex::from_real(Dd::ONE);
        out[k][k] = entry;
        for j in 1..dim - k {
            let n = k + j - 1;
            let weight = Dd::from_f64(((n + 1) * (m - n)) as f64).sqrt() / Dd::from_f64(j as f64);
            entry = (entry * t).scale(weight);
            out[k][k + j] = entry;
        }
    }
    out
}

/// `D(xi)` as the product `exp(-tau* J-) exp(-ln(1+|tau|^2) J0) exp(tau J+)`
/// with `tau = (xi/|xi|) tan|xi|`.
///
/// The three factors carry entries of order `|tau|^M` that cancel in the
/// product, so factors and product are evaluated in double-double
/// arithmetic. The bare product reproduces `D(xi)` only while
/// `cos|xi| > 0`; past that it lands on `-1` in SU(2), which the
/// spin-`M/2` representation maps to `(-1)^M`. That sign is applied so the
/// result equals `D(xi)` on the whole domain.
pub fn disentangled_displacement(xi: C64, m: usize) -> Result<Operator> {
    let magnitude = xi.norm();
    // distance from the nearest pi/2 + k pi
    let offset = (magnitude - FRAC_PI_2).rem_euclid(PI);
    if offset.min(PI - offset) < 1e-8 {
        return Err(GbsError::DisentanglingSingular { magnitude });
    }
    let tau = if magnitude == 0.0 {
        C64::new(0.0, 0.0)
    } else {
        xi / magnitude * magnitude.tan()
    };
    let tau = DdComplex::from_c64(tau);
    let dim = m + 1;

    // exp(-ln(w) J0) = diag(w^{n - M/2}) = diag(sqrt(w)^{2n - M})
    let root_w = (Dd::ONE + tau.norm_sqr()).sqrt();
    let inv_root_w = root_w.recip();
    let mut middle = vec![Dd::ONE; dim];
    for (n, slot) in middle.iter_mut().enumerate() {
        let p = 2 * n as i64 - m as i64;
        let base = if p >= 0 { root_w } else { inv_root_w };
        for _ in 0..p.unsigned_abs() {
            *slot = *slot * base;
        }
    }
    let minus_tau_conj = tau.conj().scale(-Dd::ONE);
    let lower = raising_exp_dd(m, minus_tau_conj); // transposed: lower[k][i] = exp(-tau* J-)[i][k]
    let upper = raising_exp_dd(m, tau);

    let sign = if magnitude.cos() < 0.0 && m % 2 == 1 { -1.0 } else { 1.0 };
    let mut entries = Array2::from_elem((dim, dim), C64::new(0.0, 0.0));
    for i in 0..dim {
        for j in 0..dim {
            let mut acc = DdComplex::ZERO;
            for k in 0..=i.min(j) {
                acc = acc + (lower[k][i] * upper[k][j]).scale(middle[k]);
            }
            entries[[i, j]] = acc.to_c64() * sign;
        }
    }
    Operator::new(entries)
}

/// Closed forms of `(D^-1 J+ D, D^-1 J- D, D^-1 J0 D)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConjugatedGenerators {
    pub jp: Operator,
    pub jm: Operator,
    pub j0: Operator,
}

pub fn conjugated_generators(p: &DisplacementParams) -> ConjugatedGenerators {
    let g = hp_generators(p.m);
    let (r, theta) = (p.r, p.theta);
    let cos_sq = C64::new(r.cos().powi(2), 0.0);
    let sin_sq = r.sin().powi(2);
    let sin_2r = (2.0 * r).sin();
    let phase = C64::from_polar(1.0, theta);

    let jp = &(&g.jp.scale(cos_sq) - &g.jm.scale(phase.powi(-2) * sin_sq)) - &g.j0.scale(phase.inv() * sin_2r);
    let jm = &(&g.jm.scale(cos_sq) - &g.jp.scale(phase.powi(2) * sin_sq)) - &g.j0.scale(phase * sin_2r);
    let j0 = &(&g.jp.scale(phase * (0.5 * sin_2r)) + &g.jm.scale(phase.inv() * (0.5 * sin_2r)))
        + &g.j0.scale(C64::new((2.0 * r).cos(), 0.0));
    ConjugatedGenerators { jp, jm, j0 }
}
