//! Solvers for the three saddle-point equations
//!
//! ```text
//! (s - z0^2) / xi = R(s)
//! ```
//!
//! with `R = 1/h_trace` (trace), `R = 1/h2` (doubled parameters) and
//! `R = f0 + fu u^2 + fv v^2` (matrix elements). In every case
//! `G(s) = s - z0^2 - xi R(s)` is strictly increasing on the allowed domain,
//! so a sign change brackets the unique root.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::specfun::{h2, h_trace, small_f, Branch};
use crate::statemap::ReducedState;

const PI_SQ: f64 = PI * PI;
const REL_TOL: f64 = 1e-14;
const ABS_TOL: f64 = 1e-16;
const MAX_ITER: u32 = 200;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SaddleSolution {
    /// The squared frequency `z^2`.
    pub s: f64,
    pub branch: Branch,
    /// `|s - z0^2 - xi R(s)|` divided by the largest of its three terms.
    pub residual: f64,
    pub iterations: u32,
}

impl SaddleSolution {
    fn closed_form(s: f64) -> SaddleSolution {
        SaddleSolution {
            s,
            branch: Branch::of(s),
            residual: 0.0,
            iterations: 0,
        }
    }
}

/// Brent's method on a bracket with `f(a) < 0 < f(b)`.
pub fn brent<F>(mut f: F, mut a: f64, mut b: f64, mut fa: f64, mut fb: f64) -> Result<(f64, u32)>
where
    F: FnMut(f64) -> Result<f64>,
{
    if fa == 0.0 {
        return Ok((a, 0));
    }
    if fb == 0.0 {
        return Ok((b, 0));
    }
    if fa.signum() == fb.signum() {
        return Err(Error::NoRoot("bracket has no sign change"));
    }
    let (mut c, mut fc) = (b, fb);
    let (mut d, mut e) = (b - a, b - a);
    for iter in 1..=MAX_ITER {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = 2.0 * f64::EPSILON * b.abs() + 0.5 * (REL_TOL * b.abs() + ABS_TOL);
        let m = 0.5 * (c - b);
        if m.abs() <= tol || fb == 0.0 {
            return Ok((b, iter));
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                let qq = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * m * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * m * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol { d } else { tol.copysign(m) };
        fb = f(b)?;
    }
    Err(Error::NoRoot("iteration limit reached"))
}

/// Solve `s - z0^2 - xi R(s) = 0` given a lower end where `G < 0` can be found
/// by moving towards `floor`.
fn solve_monotone<R>(
    z0_sq: f64,
    xi: f64,
    lo_start: f64,
    floor: f64,
    rhs: R,
) -> Result<SaddleSolution>
where
    R: Fn(f64) -> Result<f64>,
{
    let g = |s: f64| -> Result<f64> { Ok(s - z0_sq - xi * rhs(s)?) };

    let mut lo = lo_start;
    let mut g_lo = g(lo)?;
    let mut shrink = 0;
    while g_lo > 0.0 {
        // move closer to the singular end of the domain
        lo = floor + 1e-3 * (lo - floor);
        g_lo = g(lo)?;
        shrink += 1;
        if shrink > 100 || lo == floor {
            return Err(Error::NoRoot("no lower bracket"));
        }
    }
    let mut hi = z0_sq.abs().max(1.0);
    if hi <= lo {
        hi = lo.abs().max(1.0) * 2.0;
    }
    let mut g_hi = g(hi)?;
    let mut grow = 0;
    while g_hi < 0.0 {
        lo = hi;
        g_lo = g_hi;
        hi *= 2.0;
        g_hi = g(hi)?;
        grow += 1;
        if grow > 2000 || !hi.is_finite() {
            return Err(Error::NoRoot("no upper bracket"));
        }
    }
    let (s, iterations) = brent(g, lo, hi, g_lo, g_hi)?;
    let r = rhs(s)?;
    let scale = s
        .abs()
        .max(z0_sq.abs())
        .max((xi * r).abs())
        .max(f64::MIN_POSITIVE);
    Ok(SaddleSolution {
        s,
        branch: Branch::of(s),
        residual: (s - z0_sq - xi * r).abs() / scale,
        iterations,
    })
}

/// Trace gap equation `(s - z0^2)/xi = 1/(z tanh(z/2))` for raw coefficients.
pub fn solve_gap_raw(z0_sq: f64, xi: f64) -> Result<SaddleSolution> {
    if xi == 0.0 {
        if z0_sq <= 0.0 {
            return Err(Error::Domain {
                what: "Gaussian squared frequency z0^2",
                value: z0_sq,
            });
        }
        return Ok(SaddleSolution::closed_form(z0_sq));
    }
    if !(xi > 0.0) || !z0_sq.is_finite() {
        return Err(Error::Domain {
            what: "quartic coefficient xi",
            value: xi,
        });
    }
    let lo = if z0_sq > 0.0 { z0_sq } else { 1e-12 };
    solve_monotone(z0_sq, xi, lo, 0.0, |s| Ok(1.0 / h_trace(s)?))
}

/// Doubled-parameter gap equation `(s - z0^2)/xi = 1/(z tanh z)` for raw coefficients.
pub fn solve_gap_tilde_raw(z0_sq: f64, xi: f64) -> Result<SaddleSolution> {
    if xi == 0.0 {
        if z0_sq <= 0.0 {
            return Err(Error::Domain {
                what: "Gaussian squared frequency z0^2",
                value: z0_sq,
            });
        }
        return Ok(SaddleSolution::closed_form(z0_sq));
    }
    let lo = if z0_sq > 0.0 { z0_sq } else { 1e-12 };
    solve_monotone(z0_sq, xi, lo, 0.0, |s| Ok(1.0 / h2(s)?))
}

/// Matrix-element saddle `(s - z0^2)/xi = f0 + fu u^2 + fv v^2` for raw coefficients.
pub fn solve_saddle_uv_raw(z0_sq: f64, xi: f64, u_sq: f64, v_sq: f64) -> Result<SaddleSolution> {
    if !(u_sq >= 0.0) || !(v_sq >= 0.0) {
        return Err(Error::Domain {
            what: "squared phase-space coordinate",
            value: if u_sq >= 0.0 { v_sq } else { u_sq },
        });
    }
    if xi == 0.0 {
        return Ok(SaddleSolution::closed_form(z0_sq));
    }
    let floor = -PI_SQ;
    let lo = if z0_sq > floor {
        z0_sq.min(0.0)
    } else {
        floor + 1e-9
    };
    let lo = if lo <= floor { floor + 1e-9 } else { lo };
    solve_monotone(
        z0_sq,
        xi,
        lo,
        floor,
        |s| Ok(small_f(s)?.combine(u_sq, v_sq)),
    )
}

/// Solve the trace gap equation for a reduced state.
pub fn solve_gap(state: &ReducedState) -> Result<SaddleSolution> {
    solve_gap_raw(state.z0_sq(), state.xi())
}

/// Solve the gap equation of the doubled operator, which defines `z~`.
pub fn solve_gap_tilde(state: &ReducedState) -> Result<SaddleSolution> {
    solve_gap_tilde_raw(state.z0_sq(), state.xi())
}

/// Solve the matrix-element saddle at `(u^2, v^2)`.
pub fn solve_saddle_uv(state: &ReducedState, u_sq: f64, v_sq: f64) -> Result<SaddleSolution> {
    solve_saddle_uv_raw(state.z0_sq(), state.xi(), u_sq, v_sq)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    const LN2: f64 = std::f64::consts::LN_2;

    fn state(n: f64, x: f64) -> ReducedState {
        ReducedState::new(n, x).unwrap()
    }

    #[test]
    fn gap_recovers_occupation() {
        assert_eq!(solve_gap(&state(1.0, 0.0)).unwrap().s, LN2 * LN2);
        for x in [0.1, 0.5, 5.0, 50.0] {
            let sol = solve_gap(&state(1.0, x)).unwrap();
            assert_relative_eq!(sol.s, LN2 * LN2, max_relative = 1e-13);
            assert!(sol.residual < 1e-12);
            assert_eq!(sol.branch, Branch::Real);
        }
        let st = state(3.0, 2.0);
        assert!(st.z0_sq() < 0.0);
        assert!(solve_gap(&st).unwrap().s > 0.0);
    }

    #[test]
    fn gap_at_large_occupation() {
        for n in [1e3, 1e6] {
            let st = state(n, 2.0);
            let l = (1.0 / n).ln_1p();
            assert_relative_eq!(solve_gap(&st).unwrap().s, l * l, max_relative = 1e-11);
        }
    }

    #[test]
    fn tilde_gap() {
        let st = state(1.0, 0.0);
        assert_eq!(solve_gap_tilde(&st).unwrap().s, LN2 * LN2);
        let st = state(100.0, 1.0);
        let zt = solve_gap_tilde(&st).unwrap().s.sqrt();
        let n_tilde = 1.0 / zt.exp_m1();
        let limit = (2.0 / (5.0_f64.sqrt() - 1.0)).sqrt();
        assert_relative_eq!(n_tilde / 100.0, limit, max_relative = 5e-3);
        for n in [0.1, 1.0, 10.0] {
            for x in [0.01, 1.0, 20.0] {
                let st = state(n, x);
                let z = solve_gap(&st).unwrap().s.sqrt();
                let zt = solve_gap_tilde(&st).unwrap().s.sqrt();
                assert!(zt < z);
            }
        }
    }

    #[test]
    fn matrix_saddle_examples() {
        let st = state(10.0, 15.0);
        let sol = solve_saddle_uv(&st, 0.0, 0.0).unwrap();
        assert!(sol.s < 0.0);
        assert_eq!(sol.branch, Branch::ImaginaryContinued);
        let uc = -st.z0_sq() / st.xi() - 1.0 / 3.0;
        assert!(solve_saddle_uv(&st, uc, 0.0).unwrap().s.abs() < 1e-10);
        let v_sq = 2.0;
        let uc = uc - v_sq / 3.0;
        assert!(solve_saddle_uv(&st, uc - 1e-6, v_sq).unwrap().s < 0.0);
        assert!(solve_saddle_uv(&st, uc + 1e-6, v_sq).unwrap().s > 0.0);
        let tiny = state(10.0, 1e-12);
        let sol = solve_saddle_uv(&tiny, 3.0, 1.0).unwrap();
        assert_relative_eq!(sol.s, tiny.z0_sq(), max_relative = 1e-9);
    }

    #[test]
    fn brent_reports_missing_bracket() {
        assert!(brent(|x| Ok(x + 2.0), 0.0, 1.0, 2.0, 3.0).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn unique_sign_change(n in 0.01..50.0f64, x in 0.01..100.0f64, u_sq in 0.0..400.0f64, v_sq in 0.0..20.0f64) {
            let st = state(n, x);
            let sol = solve_saddle_uv(&st, u_sq, v_sq).unwrap();
            prop_assert!(sol.residual < 1e-12);
            prop_assert!(sol.s > -PI_SQ);
            let g = |s: f64| s - st.z0_sq() - st.xi() * small_f(s).unwrap().combine(u_sq, v_sq);
            let hi = 4.0 * sol.s.abs().max(1.0) + st.z0_sq().abs();
            let lo = -PI_SQ + 1e-6;
            let mut changes = 0;
            let mut prev = g(lo);
            for k in 1..=2000 {
                let s = lo + (hi - lo) * k as f64 / 2000.0;
                let cur = g(s);
                if prev.signum() != cur.signum() { changes += 1; }
                prev = cur;
            }
            prop_assert_eq!(changes, 1);
        }

        #[test]
        fn solution_flow_is_monotone(n in 0.1..20.0f64, x in 0.1..50.0f64, u_sq in 0.0..300.0f64, v_sq in 0.0..10.0f64, du in 0.01..5.0f64) {
            let st = state(n, x);
            let base = solve_saddle_uv(&st, u_sq, v_sq).unwrap().s;
            prop_assert!(solve_saddle_uv(&st, u_sq + du, v_sq).unwrap().s >= base);
            prop_assert!(solve_saddle_uv(&st, u_sq, v_sq + du).unwrap().s >= base);
        }

        #[test]
        fn branch_condition(n in 0.1..20.0f64, x in 0.1..50.0f64, u_sq in 0.0..300.0f64, v_sq in 0.0..10.0f64) {
            let st = state(n, x);
            let sol = solve_saddle_uv(&st, u_sq, v_sq).unwrap();
            let real = 1.0 / 3.0 + u_sq + v_sq / 3.0 >= -st.z0_sq() / st.xi();
            let margin = (1.0 / 3.0 + u_sq + v_sq / 3.0 + st.z0_sq() / st.xi()).abs();
            if margin > 1e-8 {
                prop_assert_eq!(sol.branch == Branch::Real, real);
            }
        }
    }
}
