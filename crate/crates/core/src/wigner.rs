//! The O(N) Wigner function at finite N and its large-N limit.
//!
//! After the angular integrations the per-degree-of-freedom Wigner function is
//!
//! ```text
//! W_N = N (8 pi)^{N/2} (N/2)^nu / nu! * int_0^inf v^{N-1} L_nu(N r v) d(u^2, v^2)^N dv
//! ```
//!
//! with `nu = N/2 - 1` and `L_nu` the reduced Bessel function
//! ([`reduced_bessel`]). `ln w = (1/N) ln W_N` is then extrapolated in `1/N`.

use rayon::prelude::*;
use serde::Serialize;

use crate::densmat::{default_u_max, ln_d};
use crate::error::{Error, Result};
use crate::grid::{csv_string, Axis};
use crate::specfun::{big_f, ln_factorial, reduced_bessel};
use crate::statemap::{params_from_moments, GaussianMoments, ReducedState};

/// Nodes whose log-envelope lies this far below the maximum are dropped.
const ENVELOPE_WINDOW: f64 = 50.0;
/// Step of the coarse scan that locates the end of the envelope.
const SCAN_STEP: f64 = 0.25;
const SCAN_LIMIT: f64 = 80.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Extrapolation {
    LastValue,
    RichardsonIn1OverN,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WignerSettings {
    /// Ascending even values of N.
    pub n_list: Vec<u32>,
    /// Gauss-Legendre nodes per panel.
    pub quad_points: usize,
    /// Upper end of the `v` integral; located automatically when `None`.
    pub v_max: Option<f64>,
    pub extrapolation: Extrapolation,
    /// Largest acceptable spread of the extrapolation.
    pub tol: f64,
    /// An N is used only while `int |f| / |int f|` stays below this.
    pub max_condition: f64,
}

impl Default for WignerSettings {
    fn default() -> Self {
        WignerSettings {
            n_list: (1..=10).map(|k| 4 * k).collect(),
            quad_points: 16,
            v_max: None,
            extrapolation: Extrapolation::RichardsonIn1OverN,
            tol: 1e-3,
            max_condition: 1e9,
        }
    }
}

impl WignerSettings {
    pub fn validate(&self) -> Result<()> {
        if self.n_list.len() < 3 {
            return Err(Error::InvalidConfig(
                "N list needs at least 3 entries".into(),
            ));
        }
        self.validate_entries()
    }

    fn validate_entries(&self) -> Result<()> {
        if self.n_list.is_empty() {
            return Err(Error::InvalidConfig("N list is empty".into()));
        }
        if self.n_list.iter().any(|&n| n == 0 || n % 2 == 1) {
            return Err(Error::InvalidConfig(
                "every N must be even and positive".into(),
            ));
        }
        if self.n_list.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidConfig(
                "N list must be strictly ascending".into(),
            ));
        }
        if *self.n_list.last().unwrap() > 130 {
            return Err(Error::InvalidConfig(
                "N above 130 exceeds the Bessel order range".into(),
            ));
        }
        if !(2..=64).contains(&self.quad_points) {
            return Err(Error::InvalidConfig(
                "quad_points must lie in 2..=64".into(),
            ));
        }
        if let Some(v) = self.v_max {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidConfig("v_max must be positive".into()));
            }
        }
        if !(self.tol > 0.0) || !(self.max_condition > 1.0) {
            return Err(Error::InvalidConfig("tolerances must be positive".into()));
        }
        Ok(())
    }
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    let n = order;
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 1 { x } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * p - pm) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// One N of the sequence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NValue {
    pub n: u32,
    pub ln_w: f64,
    /// `int |f| / |int f|`, the cancellation factor of the oscillatory integral.
    pub condition: f64,
    pub reliable: bool,
}

/// Extrapolated `ln w` with its diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WignerValue {
    pub value: f64,
    pub spread: f64,
    pub converged: bool,
    pub per_n: Vec<NValue>,
}

/// The `v` quadrature for one `u^2`, reusable for every `r` and `N`.
#[derive(Debug, Clone)]
pub struct WignerSlice {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    ln_v: Vec<f64>,
    ln_d: Vec<f64>,
    n_list: Vec<u32>,
    max_condition: f64,
    r_resolved: f64,
}

impl WignerSlice {
    /// Prepare the quadrature for `r` up to `r_resolved`.
    pub fn new(
        state: &ReducedState,
        u_sq: f64,
        settings: &WignerSettings,
        r_resolved: f64,
    ) -> Result<Self> {
        settings.validate_entries()?;
        if !(u_sq >= 0.0) || !u_sq.is_finite() {
            return Err(Error::Domain {
                what: "u^2",
                value: u_sq,
            });
        }
        let r_resolved = r_resolved.max(1.0);
        let n_min = settings.n_list[0] as f64;
        let n_max = *settings.n_list.last().unwrap() as f64;
        let v_max = match settings.v_max {
            Some(v) => v,
            None => {
                let envelope = |v: f64| -> Result<f64> {
                    Ok((n_min - 1.0) * v.ln() + n_min * ln_d(state, u_sq, v * v)?.0)
                };
                let mut best = f64::NEG_INFINITY;
                let mut v = SCAN_STEP;
                loop {
                    let e = envelope(v)?;
                    best = best.max(e);
                    if (e < best - ENVELOPE_WINDOW - 10.0) || v >= SCAN_LIMIT {
                        break v;
                    }
                    v += SCAN_STEP;
                }
            }
        };
        let width = (0.1_f64).min(std::f64::consts::PI / (n_max * r_resolved + 1.0));
        let panels = (v_max / width).ceil().max(1.0) as usize;
        let width = v_max / panels as f64;
        let (gx, gw) = gauss_legendre(settings.quad_points);
        let mut nodes = Vec::with_capacity(panels * gx.len());
        let mut weights = Vec::with_capacity(panels * gx.len());
        for p in 0..panels {
            let mid = (p as f64 + 0.5) * width;
            for (x, w) in gx.iter().zip(&gw) {
                nodes.push(mid + 0.5 * width * x);
                weights.push(0.5 * width * w);
            }
        }
        let ln_d = nodes
            .iter()
            .map(|&v| ln_d(state, u_sq, v * v).map(|(l, _)| l))
            .collect::<Result<Vec<f64>>>()?;
        Ok(WignerSlice {
            ln_v: nodes.iter().map(|v| v.ln()).collect(),
            nodes,
            weights,
            ln_d,
            n_list: settings.n_list.clone(),
            max_condition: settings.max_condition,
            r_resolved,
        })
    }

    pub fn r_resolved(&self) -> f64 {
        self.r_resolved
    }

    /// `(1/N) ln W_N` at squared radius `r_sq`.
    #[allow(clippy::needless_range_loop)]
    pub fn ln_w_at_n(&self, r_sq: f64, n: u32) -> Result<NValue> {
        if n == 0 || n % 2 == 1 {
            return Err(Error::InvalidConfig(format!(
                "N = {n} must be even and positive"
            )));
        }
        if !(r_sq >= 0.0) {
            return Err(Error::Domain {
                what: "r^2",
                value: r_sq,
            });
        }
        let r = r_sq.sqrt();
        let nf = n as f64;
        let nu = n / 2 - 1;
        let env: Vec<f64> = self
            .ln_v
            .iter()
            .zip(&self.ln_d)
            .map(|(lv, ld)| (nf - 1.0) * lv + nf * ld)
            .collect();
        let top = env.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let (mut sum, mut abs) = (0.0_f64, 0.0_f64);
        for k in 0..self.nodes.len() {
            let e = env[k] - top;
            if e < -ENVELOPE_WINDOW {
                continue;
            }
            let weight = self.weights[k] * e.exp();
            let bessel = if r == 0.0 {
                1.0
            } else {
                reduced_bessel(nu, nf * r * self.nodes[k])
            };
            sum += weight * bessel;
            abs += weight * bessel.abs();
        }
        let prefactor =
            nf.ln() + 0.5 * nf * (8.0 * std::f64::consts::PI).ln() + nu as f64 * (0.5 * nf).ln()
                - ln_factorial(nu);
        let noise = 1e-13 * abs;
        if sum <= noise {
            if sum < -noise * self.max_condition.sqrt() {
                return Err(Error::QuadratureNonPositive {
                    value: sum / abs,
                    n,
                });
            }
            return Ok(NValue {
                n,
                ln_w: f64::NAN,
                condition: f64::INFINITY,
                reliable: false,
            });
        }
        let condition = abs / sum;
        Ok(NValue {
            n,
            ln_w: (prefactor + top + sum.ln()) / nf,
            condition,
            reliable: condition <= self.max_condition,
        })
    }

    /// The full N sequence and its extrapolation.
    pub fn ln_w(&self, r_sq: f64, extrapolation: Extrapolation, tol: f64) -> Result<WignerValue> {
        if self.n_list.len() < 2 {
            return Err(Error::InvalidConfig(
                "N list needs at least 2 entries".into(),
            ));
        }
        let per_n = self
            .n_list
            .iter()
            .map(|&n| self.ln_w_at_n(r_sq, n))
            .collect::<Result<Vec<_>>>()?;
        let pts: Vec<(f64, f64)> = per_n
            .iter()
            .filter(|v| v.reliable)
            .map(|v| (1.0 / v.n as f64, v.ln_w))
            .collect();
        let (value, spread) = extrapolate(&pts, extrapolation);
        Ok(WignerValue {
            value,
            spread,
            converged: spread <= tol,
            per_n,
        })
    }
}

/// Polynomial through `pts` evaluated at 0 (Neville).
fn neville_at_zero(pts: &[(f64, f64)]) -> f64 {
    let mut p: Vec<f64> = pts.iter().map(|&(_, y)| y).collect();
    let m = pts.len();
    for level in 1..m {
        for i in 0..m - level {
            let (xi, xj) = (pts[i].0, pts[i + level].0);
            p[i] = (xj * p[i] - xi * p[i + 1]) / (xj - xi);
        }
    }
    p[0]
}

/// Extrapolated value and spread from `(1/N, ln w_N)` pairs in ascending N.
///
/// Richardson evaluates the polynomial in `1/N` through the last three
/// points at `1/N = 0`; LastValue reports the largest N. The spread is
/// `|last - secondlast|` in both cases.
pub fn extrapolate(pts: &[(f64, f64)], method: Extrapolation) -> (f64, f64) {
    let m = pts.len();
    if m == 0 {
        return (f64::NAN, f64::INFINITY);
    }
    let spread = if m == 1 {
        f64::INFINITY
    } else {
        (pts[m - 1].1 - pts[m - 2].1).abs()
    };
    let value = match method {
        Extrapolation::LastValue => pts[m - 1].1,
        Extrapolation::RichardsonIn1OverN => neville_at_zero(&pts[m - m.min(3)..]),
    };
    (value, spread)
}

/// `ln w_N` at a single point.
pub fn ln_w_at_n(
    state: &ReducedState,
    u_sq: f64,
    r_sq: f64,
    n: u32,
    settings: &WignerSettings,
) -> Result<NValue> {
    let single = WignerSettings {
        n_list: vec![n],
        ..settings.clone()
    };
    WignerSlice::new(state, u_sq, &single, r_sq.sqrt())?.ln_w_at_n(r_sq, n)
}

/// Large-N `ln w` at one point; fails with `NotConverged` when the spread exceeds the tolerance.
pub fn ln_w(
    state: &ReducedState,
    u_sq: f64,
    r_sq: f64,
    settings: &WignerSettings,
) -> Result<WignerValue> {
    let slice = WignerSlice::new(state, u_sq, settings, r_sq.sqrt())?;
    let val = slice.ln_w(r_sq, settings.extrapolation, settings.tol)?;
    if !val.converged {
        return Err(Error::NotConverged {
            value: val.value,
            spread: val.spread,
            tol: settings.tol,
        });
    }
    Ok(val)
}

/// Analytic large-N Wigner function of the Gaussian operator (`x = 0`):
/// `-ln(n + 1/2) - Fu(z0) u^2 - r^2 / (4 Fv(z0))`.
pub fn gaussian_ln_w(state: &ReducedState, u_sq: f64, r_sq: f64) -> Result<f64> {
    let b = big_f(state.log_ratio().powi(2))?;
    Ok(-(state.n() + 0.5).ln() - b.fu * u_sq - r_sq / (4.0 * b.fv))
}

/// `ln w` on a `(u, r)` grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WignerGrid {
    pub u: Axis,
    pub r: Axis,
    /// Row-major, `u` outer.
    pub ln_w: Vec<f64>,
    pub ln_w_norm: Vec<f64>,
    pub spread: Vec<f64>,
    pub not_converged: usize,
}

impl WignerGrid {
    pub fn to_csv(&self) -> String {
        let rows = (0..self.u.count).flat_map(|i| {
            (0..self.r.count).map(move |j| {
                let k = i * self.r.count + j;
                vec![
                    self.u.value(i),
                    self.r.value(j),
                    self.ln_w_norm[k],
                    self.spread[k],
                ]
            })
        });
        csv_string(&["u", "r", "ln_w_norm", "spread"], rows)
    }
}

fn normalise(values: &[f64]) -> Vec<f64> {
    let top = values
        .iter()
        .cloned()
        .filter(|v| v.is_finite())
        .fold(f64::NEG_INFINITY, f64::max);
    values.iter().map(|v| v - top).collect()
}

/// Evaluate the extrapolated `ln w` on every `(u, r)` grid point.
/// Rows in `u` run in parallel; non-converged points are counted, not fatal.
pub fn wigner_grid(
    state: &ReducedState,
    u: Axis,
    r: Axis,
    settings: &WignerSettings,
) -> Result<WignerGrid> {
    settings.validate()?;
    if u.lo < 0.0 || r.lo < 0.0 {
        return Err(Error::InvalidConfig(
            "grid coordinates must be non-negative".into(),
        ));
    }
    let rows: Vec<Vec<WignerValue>> = (0..u.count)
        .into_par_iter()
        .map(|i| {
            let uu = u.value(i);
            let slice = WignerSlice::new(state, uu * uu, settings, r.hi)?;
            (0..r.count)
                .map(|j| {
                    let rr = r.value(j);
                    slice.ln_w(rr * rr, settings.extrapolation, settings.tol)
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let flat: Vec<WignerValue> = rows.into_iter().flatten().collect();
    let ln_w: Vec<f64> = flat.iter().map(|v| v.value).collect();
    Ok(WignerGrid {
        u,
        r,
        ln_w_norm: normalise(&ln_w),
        spread: flat.iter().map(|v| v.spread).collect(),
        not_converged: flat.iter().filter(|v| !v.converged).count(),
        ln_w,
    })
}

/// Gaussian correlators at fixed occupation in polar form:
/// `F = a(1 + g cos phi)`, `K = a(1 - g cos phi)`, `R = a g sin phi`, `a = (n + 1/2)/sqrt(1 - g^2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SqueezeParams {
    pub n: f64,
    pub gamma: f64,
    pub phi: f64,
}

impl SqueezeParams {
    pub fn new(n: f64, gamma: f64, phi: f64) -> Result<Self> {
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::Domain {
                what: "occupation n",
                value: n,
            });
        }
        if !(0.0..1.0).contains(&gamma) {
            return Err(Error::Domain {
                what: "squeezing gamma",
                value: gamma,
            });
        }
        if !(0.0..std::f64::consts::TAU).contains(&phi) {
            return Err(Error::Domain {
                what: "squeeze angle phi",
                value: phi,
            });
        }
        Ok(SqueezeParams { n, gamma, phi })
    }

    pub fn moments(&self) -> Result<GaussianMoments> {
        let a = (self.n + 0.5) / (1.0 - self.gamma * self.gamma).sqrt();
        let (s, c) = self.phi.sin_cos();
        GaussianMoments::new(
            a * (1.0 + self.gamma * c),
            a * (1.0 - self.gamma * c),
            a * self.gamma * s,
        )
    }
}

/// Relative orientation of the field and momentum vectors in O(N) space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Mode {
    Para,
    Perp,
}

/// Scaled coordinates `(u^2, r^2)` of the physical point `(phi, pi)` given per
/// component (`phi^2 = N phi_hat^2`).
pub fn physical_to_scaled(
    moments: &GaussianMoments,
    a: f64,
    mode: Mode,
    phi: f64,
    pi: f64,
) -> (f64, f64) {
    let k = moments.r / moments.f;
    let u_sq = phi * phi / a;
    let r_sq = match mode {
        Mode::Para => 4.0 * a * (pi - k * phi).powi(2),
        Mode::Perp => 4.0 * a * (pi * pi + k * k * phi * phi),
    };
    (u_sq, r_sq)
}

/// `ln w` on a grid of physical per-component coordinates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProjectionGrid {
    pub phi: Axis,
    pub pi: Axis,
    pub mode: Mode,
    /// Row-major, `phi` outer; `NaN` where `r` exceeds the resolved range.
    pub ln_w_norm: Vec<f64>,
    pub spread: Vec<f64>,
    pub masked: usize,
    pub not_converged: usize,
}

impl ProjectionGrid {
    pub fn to_csv(&self) -> String {
        let rows = (0..self.phi.count).flat_map(|i| {
            (0..self.pi.count).map(move |j| {
                vec![
                    self.phi.value(i),
                    self.pi.value(j),
                    self.ln_w_norm[i * self.pi.count + j],
                ]
            })
        });
        csv_string(&["phi", "pi", "ln_w_norm"], rows)
    }
}

/// Default physical window: the `u` range of the matrix elements and the `r <= r_max` band.
pub fn default_projection_axes(
    sq: &SqueezeParams,
    x: f64,
    mode: Mode,
    r_max: f64,
    grid: (usize, usize),
) -> Result<(Axis, Axis)> {
    let m = sq.moments()?;
    let state = ReducedState::new(sq.n, x)?;
    let a = params_from_moments(&m, x)?.a;
    let phi_max = a.sqrt() * default_u_max(&state);
    let k = m.r / m.f;
    let mut pi_max = r_max / (2.0 * a.sqrt());
    if mode == Mode::Para {
        pi_max += k.abs() * phi_max;
    }
    Ok((
        Axis::new(-phi_max, phi_max, grid.0)?,
        Axis::new(-pi_max, pi_max, grid.1)?,
    ))
}

pub fn project_physical(
    sq: &SqueezeParams,
    x: f64,
    mode: Mode,
    phi: Axis,
    pi: Axis,
    r_max: f64,
    settings: &WignerSettings,
) -> Result<ProjectionGrid> {
    settings.validate()?;
    let m = sq.moments()?;
    let state = ReducedState::new(sq.n, x)?;
    let a = params_from_moments(&m, x)?.a;
    let rows: Vec<Vec<Option<WignerValue>>> = (0..phi.count)
        .into_par_iter()
        .map(|i| {
            let ph = phi.value(i);
            let u_sq = ph * ph / a;
            let slice = WignerSlice::new(&state, u_sq, settings, r_max)?;
            (0..pi.count)
                .map(|j| {
                    let (_, r_sq) = physical_to_scaled(&m, a, mode, ph, pi.value(j));
                    if r_sq > r_max * r_max * (1.0 + 1e-12) {
                        Ok(None)
                    } else {
                        slice
                            .ln_w(r_sq, settings.extrapolation, settings.tol)
                            .map(Some)
                    }
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let flat: Vec<Option<WignerValue>> = rows.into_iter().flatten().collect();
    let raw: Vec<f64> = flat
        .iter()
        .map(|v| v.as_ref().map_or(f64::NAN, |w| w.value))
        .collect();
    Ok(ProjectionGrid {
        phi,
        pi,
        mode,
        ln_w_norm: normalise(&raw),
        spread: flat
            .iter()
            .map(|v| v.as_ref().map_or(f64::NAN, |w| w.spread))
            .collect(),
        masked: flat.iter().filter(|v| v.is_none()).count(),
        not_converged: flat
            .iter()
            .filter(|v| v.as_ref().is_some_and(|w| !w.converged))
            .count(),
    })
}

/// Least-squares parabola `c0 + c1 x + c2 x^2`.
pub fn quadratic_fit(xs: &[f64], ys: &[f64]) -> [f64; 3] {
    let mut s = [0.0; 5];
    let mut t = [0.0; 3];
    for (&x, &y) in xs.iter().zip(ys) {
        let mut p = 1.0;
        for (k, sk) in s.iter_mut().enumerate() {
            *sk += p;
            if k < 3 {
                t[k] += p * y;
            }
            p *= x;
        }
    }
    let m = [[s[0], s[1], s[2]], [s[1], s[2], s[3]], [s[2], s[3], s[4]]];
    let det = |a: &[[f64; 3]; 3]| {
        a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1])
            - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
            + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
    };
    let d = det(&m);
    let mut out = [0.0; 3];
    for (c, o) in out.iter_mut().enumerate() {
        let mut mc = m;
        for row in 0..3 {
            mc[row][c] = t[row];
        }
        *o = det(&mc) / d;
    }
    out
}
