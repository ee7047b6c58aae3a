//! Independent recomputations of the closed forms: Matsubara sums, the
//! definition of purity as `Z(2p)/Z(p)^2`, the entropy as `ln Z + <F>`,
//! and the Wigner function of a Gaussian state.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::observables::ln_z_per_dof;
use crate::statemap::{
    params_from_moments, reduced_from_params, GaussianMoments, OperatorParams, ReducedState,
};

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TailCorrection {
    None,
    Integral,
}

/// Sums run over `|n| <= n_max`; the remainder is optionally estimated by an integral.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MatsubaraTruncation {
    pub n_max: u64,
    pub tail: TailCorrection,
}

impl MatsubaraTruncation {
    pub fn new(n_max: u64, tail: TailCorrection) -> Result<Self> {
        if n_max == 0 {
            return Err(Error::InvalidConfig("n_max must be at least 1".into()));
        }
        Ok(MatsubaraTruncation { n_max, tail })
    }
}

impl Default for MatsubaraTruncation {
    fn default() -> Self {
        MatsubaraTruncation {
            n_max: 1_000_000,
            tail: TailCorrection::Integral,
        }
    }
}

/// `g_n(z) = 1 / (omega_n^2 + z^2)`, `omega_n = 2 pi n`.
pub fn g(n: u64, z: f64) -> f64 {
    let w = TWO_PI * n as f64;
    1.0 / (w * w + z * z)
}

/// Neumaier-compensated sum of `f(n)` for `n = n_max, ..., 1`.
fn sum_desc(n_max: u64, f: impl Fn(u64) -> f64) -> f64 {
    let (mut s, mut c) = (0.0_f64, 0.0_f64);
    for n in (1..=n_max).rev() {
        let v = f(n);
        let t = s + v;
        c += if s.abs() >= v.abs() {
            (s - t) + v
        } else {
            (v - t) + s
        };
        s = t;
    }
    s + c
}

/// `2 sum_{n > M} g_n(z)` by the midpoint integral.
fn tail_single(m: u64, z: f64) -> f64 {
    let lo = TWO_PI * (m as f64 + 0.5);
    if z == 0.0 {
        return 2.0 / (TWO_PI * lo);
    }
    (z / lo).atan() / (std::f64::consts::PI * z)
}

/// `2 sum_{n > M} g_n(a) g_n(b)` by the midpoint integral, to relative order `1/M^2`.
fn tail_pair(m: u64, a: f64, b: f64) -> f64 {
    let lo = TWO_PI * (m as f64 + 0.5);
    let l2 = lo * lo;
    2.0 / (3.0 * TWO_PI * lo * l2) * (1.0 - 0.6 * (a * a + b * b) / l2)
}

/// `sum_{n in Z} g_n(z)`; closed form `1/(2 z tanh(z/2))`.
pub fn trace_g_sum(z_sq: f64, trunc: MatsubaraTruncation) -> Result<f64> {
    if !(z_sq > 0.0) || !z_sq.is_finite() {
        return Err(Error::Domain {
            what: "z^2",
            value: z_sq,
        });
    }
    let z = z_sq.sqrt();
    let mut s = 2.0 * sum_desc(trunc.n_max, |n| g(n, z));
    if trunc.tail == TailCorrection::Integral {
        s += tail_single(trunc.n_max, z);
    }
    Ok(s + 1.0 / z_sq)
}

/// `1/(2 z tanh(z/2)) = h(z)/z` with `h = coth(z/2)/2`.
pub fn trace_g_closed(z: f64) -> f64 {
    0.5 / (z * (0.5 * z).tanh())
}

/// `sum_{n != 0} g_n(a) g_n(b)`.
pub fn pair_sum_nonzero(a: f64, b: f64, trunc: MatsubaraTruncation) -> f64 {
    let mut s = 2.0 * sum_desc(trunc.n_max, |n| g(n, a) * g(n, b));
    if trunc.tail == TailCorrection::Integral {
        s += tail_pair(trunc.n_max, a, b);
    }
    s
}

/// `sum_{n in Z} g_n(a) g_n(b) = (h(a)/a - h(b)/b) / (b^2 - a^2)` for `a != b`.
pub fn pair_sum_closed(a: f64, b: f64) -> f64 {
    (trace_g_closed(a) - trace_g_closed(b)) / (b * b - a * a)
}

/// `C4 / 2F^2` from the Matsubara representation:
/// `-64 x kappa^3 (n+1/2)^2 { sum_{n != 0} g_n(2L) g_n(2L sqrt(1+x)) + zeta^2 g_0(2L) g_0(2L sqrt(1+zeta x)) }`.
pub fn c4_sum(state: &ReducedState, trunc: MatsubaraTruncation) -> f64 {
    let x = state.x();
    if x == 0.0 {
        return 0.0;
    }
    let z = 2.0 * state.log_ratio();
    let zeta = state.zeta();
    // g_0(z) g_0(z sqrt(1 + zeta x)) = 1 / (z^4 (1 + zeta x))
    let zero_mode = zeta * zeta / (z.powi(4) * (1.0 + zeta * x));
    let braces = pair_sum_nonzero(z, z * (1.0 + x).sqrt(), trunc) + zero_mode;
    let half = state.n() + 0.5;
    -64.0 * x * state.kappa().powi(3) * half * half * braces
}

/// `Z(2p) / Z(p)^2` per degree of freedom, each `Z` from its own gap equation.
pub fn purity_by_definition(p: &OperatorParams) -> Result<f64> {
    let single = reduced_from_params(p)?;
    let double = reduced_from_params(&p.scaled(2.0))?;
    Ok((ln_z_per_dof(&double) - 2.0 * ln_z_per_dof(&single)).exp())
}

/// `ln Z + A K + B F + 2 C R + eta F^2` per degree of freedom for the operator built from `moments`.
pub fn entropy_by_definition_with(moments: &GaussianMoments, x: f64) -> Result<f64> {
    let p = params_from_moments(moments, x)?;
    let state = reduced_from_params(&p)?;
    let (f, k, r) = (moments.f, moments.k, moments.r);
    Ok(ln_z_per_dof(&state) + p.a * k + p.b * f + 2.0 * p.c * r + p.eta * f * f)
}

/// [`entropy_by_definition_with`] for the thermal moments of `state`.
pub fn entropy_by_definition(state: &ReducedState) -> Result<f64> {
    entropy_by_definition_with(&GaussianMoments::thermal(state.n())?, state.x())
}

/// Wigner function of the Gaussian state with covariance `[[F, R], [R, K]]` per
/// component, normalised like the large-N `ln w`:
/// `-ln sqrt(FK - R^2) - (K phi^2 - 2 R phi pi + F pi^2) / (2 (FK - R^2))`.
pub fn gaussian_wigner_ln(m: &GaussianMoments, phi: f64, pi: f64) -> f64 {
    let det = m.f * m.k - m.r * m.r;
    -0.5 * det.ln() - (m.k * phi * phi - 2.0 * m.r * phi * pi + m.f * pi * pi) / (2.0 * det)
}
