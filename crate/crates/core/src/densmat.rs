//! Position-basis matrix elements at large N.
//!
//! `<phi|D|phi'> ~ exp(N ln d(u^2, v^2) - 2iNCw)` with
//! `u^2 = phi^2/NA`, `v^2 = s^2/4NA`, `w = phi.s/2NA`, where `phi` is the
//! centre and `s` the separation of the two positions.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{csv_string, Axis};
use crate::observables::ln_z_per_dof;
use crate::saddle::{solve_saddle_uv, SaddleSolution};
use crate::specfun::{big_f, small_f};
use crate::statemap::{DensityOperator, ReducedState};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhasePoint {
    pub u_sq: f64,
    pub v_sq: f64,
    pub w: f64,
}

impl PhasePoint {
    /// Checks `u^2, v^2 >= 0` and the Cauchy-Schwarz bound `w^2 <= u^2 v^2`.
    pub fn new(u_sq: f64, v_sq: f64, w: f64) -> Result<Self> {
        if !(u_sq >= 0.0) || !(v_sq >= 0.0) || !u_sq.is_finite() || !v_sq.is_finite() {
            return Err(Error::Domain {
                what: "squared phase-space coordinate",
                value: if u_sq >= 0.0 { v_sq } else { u_sq },
            });
        }
        if !w.is_finite() || w * w > u_sq * v_sq * (1.0 + 1e-12) {
            return Err(Error::Domain {
                what: "w (violates w^2 <= u^2 v^2)",
                value: w,
            });
        }
        Ok(PhasePoint { u_sq, v_sq, w })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MatrixElementValue {
    /// `(1/N) ln` of the matrix element magnitude, including `-ln Z/N`.
    pub ln_d: f64,
    /// `-2 C w`.
    pub phase_per_n: f64,
    pub saddle: SaddleSolution,
}

/// `ln d(u^2, v^2)` and the saddle it was evaluated at.
pub fn ln_d(state: &ReducedState, u_sq: f64, v_sq: f64) -> Result<(f64, SaddleSolution)> {
    let sol = solve_saddle_uv(state, u_sq, v_sq)?;
    let s = sol.s;
    let b = big_f(s)?;
    let mut exponent = b.f0 + b.fu * u_sq + b.fv * v_sq;
    if state.xi() > 0.0 {
        // (s - z0^2)^2 / 8 xi written so that it stays stationary in s and never divides by xi
        let rhs = small_f(s)?.combine(u_sq, v_sq);
        let t = s - state.z0_sq();
        exponent -= 0.25 * t * rhs - 0.125 * state.xi() * rhs * rhs;
    }
    Ok((-exponent - ln_z_per_dof(state), sol))
}

/// Full matrix element, including the phase, of a specified operator.
pub fn matrix_element(op: &DensityOperator, pt: &PhasePoint) -> Result<MatrixElementValue> {
    let (value, saddle) = ln_d(&op.state, pt.u_sq, pt.v_sq)?;
    Ok(MatrixElementValue {
        ln_d: value,
        phase_per_n: -2.0 * op.params.c * pt.w,
        saddle,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Regime {
    /// `d` decreases away from the origin.
    Monotone,
    /// `d` has a ridge at `u = u_c(v^2) > 0`.
    Peaked,
}

/// `1/(2(1 - kappa/3))`; infinite when `kappa >= 3`.
pub fn peak_threshold(state: &ReducedState) -> f64 {
    let k = state.kappa();
    if k >= 3.0 {
        f64::INFINITY
    } else {
        0.5 / (1.0 - k / 3.0)
    }
}

/// Peaked iff `kappa < 3` and `x > 1/(2(1 - kappa/3))`.
pub fn classify_regime(state: &ReducedState) -> Regime {
    if state.x() > peak_threshold(state) {
        Regime::Peaked
    } else {
        Regime::Monotone
    }
}

/// Ridge location `u_c^2 = -z0^2/xi - 1/3 - v^2/3`, `None` where the ridge has ended.
pub fn u_c_sq(state: &ReducedState, v_sq: f64) -> Result<Option<f64>> {
    if classify_regime(state) != Regime::Peaked {
        return Err(Error::Regime);
    }
    let base = state.minus_z0_sq_over_xi() - 1.0 / 3.0;
    let value = base - v_sq / 3.0;
    // the ridge end v^2 = 3 base is reached up to rounding
    let slack = 8.0 * f64::EPSILON * base.abs().max(v_sq / 3.0);
    Ok(if value >= -slack {
        Some(value.max(0.0))
    } else {
        None
    })
}

/// Local expansion of `ln d` around its peak at `(u0, 0)`.
/// Derivatives are taken with respect to `u` and `v`, not their squares.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PeakFit {
    pub u0: f64,
    pub delta_u_sq: f64,
    pub delta_v_sq: f64,
    /// `d^3 ln d / du^3`.
    pub third_u: f64,
    /// `d^4 ln d / du^2 dv^2`.
    pub cross_uv: f64,
    /// `d^4 ln d / dv^4`.
    pub fourth_v: f64,
    /// Large-occupation form `n^2/(2x - 1) + 1/6` of `delta_u_sq`.
    pub delta_u_sq_large_n: f64,
}

/// Exact peak expansion from implicit differentiation of the saddle at `s = 0`.
pub fn peak_fit(state: &ReducedState) -> Result<PeakFit> {
    let uc = u_c_sq(state, 0.0)?.ok_or(Error::Regime)?;
    let big_u = uc;
    let u0 = big_u.sqrt();
    // d/ds of (f0 + fu U) at s = 0 is -1/45 - U/6; the second derivative of the
    // same combination gives the s-curvature term below
    let delta = 1.0 / state.xi() + 1.0 / 45.0 + big_u / 6.0;
    let delta_s = -4.0 / 945.0 - big_u / 20.0;
    let u3 = u0 * big_u;
    let third_u = -3.0 * u0 / delta + u3 / (delta * delta) + 2.0 * u3 * delta_s / delta.powi(3);
    let cross_uv = -1.0 / (3.0 * delta)
        + 2.0 * big_u * (11.0 / (90.0 * delta * delta) + delta_s / (3.0 * delta.powi(3)));
    let n = state.n();
    Ok(PeakFit {
        u0,
        delta_u_sq: delta / big_u,
        delta_v_sq: 0.5,
        third_u,
        cross_uv,
        fourth_v: -1.0 / (3.0 * delta),
        delta_u_sq_large_n: n * n / (2.0 * state.x() - 1.0) + 1.0 / 6.0,
    })
}

/// `ln d` on a rectangular `(u, v)` grid, shifted so that its maximum is 0.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DSurface {
    pub u: Axis,
    pub v: Axis,
    /// Row-major: index `i * v.count + j` holds `(u_i, v_j)`.
    pub ln_d_norm: Vec<f64>,
    pub max_ln_d: f64,
    pub argmax: (usize, usize),
}

impl DSurface {
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.ln_d_norm[i * self.v.count + j]
    }

    pub fn to_csv(&self) -> String {
        let rows = (0..self.u.count).flat_map(|i| {
            (0..self.v.count).map(move |j| vec![self.u.value(i), self.v.value(j), self.at(i, j)])
        });
        csv_string(&["u", "v", "ln_d_norm"], rows)
    }
}

/// Evaluate `ln d` on the grid; rows are computed in parallel and assembled in index order.
pub fn d_surface(state: &ReducedState, u: Axis, v: Axis) -> Result<DSurface> {
    if u.lo < 0.0 || v.lo < 0.0 {
        return Err(Error::InvalidConfig(
            "grid coordinates must be non-negative".into(),
        ));
    }
    let rows: Vec<Vec<f64>> = (0..u.count)
        .into_par_iter()
        .map(|i| {
            let uu = u.value(i);
            (0..v.count)
                .map(|j| {
                    let vv = v.value(j);
                    ln_d(state, uu * uu, vv * vv).map(|(l, _)| l)
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let mut values: Vec<f64> = rows.into_iter().flatten().collect();
    let (mut best, mut argmax) = (f64::NEG_INFINITY, (0, 0));
    for (k, &val) in values.iter().enumerate() {
        if val > best {
            best = val;
            argmax = (k / v.count, k % v.count);
        }
    }
    for val in values.iter_mut() {
        *val -= best;
    }
    Ok(DSurface {
        u,
        v,
        ln_d_norm: values,
        max_ln_d: best,
        argmax,
    })
}

/// Natural `u` range: past the ridge when peaked, past the Gaussian width otherwise.
pub fn default_u_max(state: &ReducedState) -> f64 {
    let scale = match u_c_sq(state, 0.0) {
        Ok(Some(uc)) => uc.sqrt(),
        _ => 1.0 / state.kappa().sqrt(),
    };
    1.5 * scale.max(1.0)
}
