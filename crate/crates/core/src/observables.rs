//! Global observables: partition function, entropy, the C4 ratio and purity.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::saddle::solve_gap_tilde;
use crate::specfun::h_trace;
use crate::statemap::{kappa, ReducedState};

/// Below this occupation the pure-state limit of the C4 ratio is used.
pub const SMALL_N: f64 = 1e-8;
/// Below this `x` the linear form of the C4 ratio is used.
pub const SMALL_X: f64 = 1e-6;

/// `ln Z / N = ln sqrt(n(n+1)) + (x/4) kappa (2n+1)^2`.
pub fn ln_z_per_dof(state: &ReducedState) -> f64 {
    let n = state.n();
    let w = 2.0 * n + 1.0;
    0.5 * (n * (n + 1.0)).ln() + 0.25 * state.x() * state.kappa() * w * w
}

/// `S / N = (n+1) ln(n+1) - n ln n`.
pub fn entropy_per_dof(n: f64) -> Result<f64> {
    if !(n >= 0.0) || !n.is_finite() {
        return Err(Error::Domain {
            what: "occupation n",
            value: n,
        });
    }
    if n == 0.0 {
        return Ok(0.0);
    }
    Ok((n + 1.0) * n.ln_1p() - n * n.ln())
}

/// `C4 / 2F^2` for a reduced state.
pub fn c4_ratio(state: &ReducedState) -> f64 {
    c4_ratio_nx(state.n(), state.x()).expect("reduced state has a valid domain")
}

/// `C4 / 2F^2` as a function of `(n, x)`, including `n = 0`.
pub fn c4_ratio_nx(n: f64, x: f64) -> Result<f64> {
    if !(n >= 0.0) || !n.is_finite() {
        return Err(Error::Domain {
            what: "occupation n",
            value: n,
        });
    }
    if !(x >= 0.0) || x.is_nan() {
        return Err(Error::Domain {
            what: "nongaussianity x",
            value: x,
        });
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x.is_infinite() {
        return Ok(-1.0);
    }
    if n < SMALL_N {
        return Ok(c4_small_n_limit(x));
    }
    if x < SMALL_X {
        return Ok(c4_perturbative(n, x));
    }
    let l = (1.0 / n).ln_1p();
    let w = 2.0 * n + 1.0;
    let zeta = 1.0 + 2.0 * kappa(n) * n * (n + 1.0);
    let zeta_m1 = 2.0 * kappa(n) * n * (n + 1.0);
    let f = |y: f64| 0.5 / (y * (y * l).tanh());
    let first = (2.0 / x) * (f(1.0) - f((1.0 + x).sqrt()));
    let second = zeta_m1 * (zeta + 1.0 + zeta * x) / ((1.0 + zeta * x) * (1.0 + x) * l);
    Ok((-x / w * (first + second)).clamp(-1.0, 0.0))
}

/// Linear response `-x (1 + 2n(n+1)(3 zeta + 2)) / (2 (2n+1)^2)` valid for `x << 1`.
pub fn c4_perturbative(n: f64, x: f64) -> f64 {
    let w = 2.0 * n + 1.0;
    let zeta = 1.0 + 2.0 * kappa(n) * n * (n + 1.0);
    -x * (1.0 + 2.0 * n * (n + 1.0) * (3.0 * zeta + 2.0)) / (2.0 * w * w)
}

/// Large-occupation limit `-2x / (1 + 2x)`, a lower bound on the ratio.
pub fn c4_large_n_limit(x: f64) -> f64 {
    -2.0 * x / (1.0 + 2.0 * x)
}

/// Pure-state limit `-x / (1 + x + sqrt(1+x))`, an upper bound on the ratio.
pub fn c4_small_n_limit(x: f64) -> f64 {
    -x / (1.0 + x + (1.0 + x).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PurityReport {
    /// Purity per degree of freedom; the total purity is `p^N`.
    pub p: f64,
    pub ln_p: f64,
    /// Gaussian purity `1/(2n+1)`.
    pub p_gaussian: f64,
    pub ratio: f64,
    pub n_tilde: f64,
    pub kappa_tilde: f64,
}

/// Purity per degree of freedom from the doubled-parameter gap equation.
pub fn purity(state: &ReducedState) -> Result<PurityReport> {
    let n = state.n();
    let w = 2.0 * n + 1.0;
    let ln_p0 = -w.ln();
    if state.x() == 0.0 {
        return Ok(PurityReport {
            p: 1.0 / w,
            ln_p: ln_p0,
            p_gaussian: 1.0 / w,
            ratio: 1.0,
            n_tilde: n,
            kappa_tilde: state.kappa(),
        });
    }
    let sol = solve_gap_tilde(state)?;
    let zt = sol.s.sqrt();
    let nt = 1.0 / zt.exp_m1();
    let kt = h_trace(sol.s)?;
    let q = nt * (nt + 1.0);
    let bracket = (1.0 + 2.0 * q) / (1.0 + 4.0 * q);
    let k_ratio = state.kappa() / kt;
    let exponent = -0.5 * state.x() * state.kappa() * w * w * (1.0 - (k_ratio * bracket).powi(2));
    // ln(n~(n~+1)) - ln(n(n+1)) without overflow for tiny n
    let ln_q_ratio = (nt / n).ln() + ((nt + 1.0) / (n + 1.0)).ln();
    let ln_p = -(2.0 * nt + 1.0).ln() + ln_q_ratio + exponent;
    let ln_ratio = (ln_p - ln_p0).min(0.0);
    Ok(PurityReport {
        p: ln_p.exp(),
        ln_p,
        p_gaussian: 1.0 / w,
        ratio: ln_ratio.exp(),
        n_tilde: nt,
        kappa_tilde: kt,
    })
}

/// `p/p0` for any `n >= 0`; the pure state `n = 0` stays pure.
pub fn purity_ratio_nx(n: f64, x: f64) -> Result<f64> {
    if n == 0.0 {
        return Ok(1.0);
    }
    Ok(purity(&ReducedState::new(n, x)?)?.ratio)
}

/// Large-occupation purity: `(n~/n, p/p0)` with
/// `n~^2/n^2 = 2/(1 - 2x + sqrt(1+4x^2))`, `p/p0 = (n~/n) exp(-x (1 - n~^4/4n^4))`.
pub fn purity_limit_large_n(x: f64) -> Result<(f64, f64)> {
    if !(x >= 0.0) {
        return Err(Error::Domain {
            what: "nongaussianity x",
            value: x,
        });
    }
    if x.is_infinite() {
        return Ok((f64::INFINITY, (2.0 / std::f64::consts::E).sqrt()));
    }
    // 1 - 2x + sqrt(1 + 4x^2), with the difference rationalised
    let denom = 1.0 + 1.0 / (2.0 * x + (1.0 + 4.0 * x * x).sqrt());
    let r_sq = 2.0 / denom;
    let r = r_sq.sqrt();
    Ok((r, r * (-x * (1.0 - 0.25 * r_sq * r_sq)).exp()))
}
