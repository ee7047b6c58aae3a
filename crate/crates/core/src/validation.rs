//! The invariant suite behind `ngstate validate`: every closed form against
//! its definitional counterpart.

use serde::Serialize;

use crate::error::Result;
use crate::grid::fmt9;
use crate::observables::{c4_ratio, entropy_per_dof, purity};
use crate::oracle::{
    c4_sum, entropy_by_definition, gaussian_wigner_ln, pair_sum_closed, pair_sum_nonzero,
    purity_by_definition, trace_g_closed, trace_g_sum, MatsubaraTruncation, TailCorrection,
};
use crate::specfun::{big_f, small_f};
use crate::statemap::{moments_from_params, params_with_kappa, GaussianMoments, ReducedState};
use crate::wigner::{physical_to_scaled, WignerSettings, WignerSlice};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub reference: f64,
    pub abs_err: f64,
    pub rel_err: f64,
    pub tol: f64,
    /// Whether `tol` bounds the relative or the absolute error.
    pub relative: bool,
    pub pass: bool,
}

impl Check {
    fn new(name: String, value: f64, reference: f64, tol: f64, relative: bool) -> Self {
        let abs_err = (value - reference).abs();
        let rel_err = if reference == 0.0 {
            abs_err
        } else {
            abs_err / reference.abs()
        };
        let err = if relative { rel_err } else { abs_err };
        Check {
            name,
            value,
            reference,
            abs_err,
            rel_err,
            tol,
            relative,
            pass: err <= tol,
        }
    }

    pub fn line(&self) -> String {
        format!(
            "{} value={} reference={} abs_err={} rel_err={} {}",
            self.name,
            fmt9(self.value),
            fmt9(self.reference),
            fmt9(self.abs_err),
            fmt9(self.rel_err),
            if self.pass { "PASS" } else { "FAIL" }
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub quick: bool,
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn first_failure(&self) -> Option<&Check> {
        self.checks.iter().find(|c| !c.pass)
    }

    pub fn lines(&self) -> String {
        self.checks.iter().map(|c| c.line() + "\n").collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ValidationOptions {
    pub quick: bool,
    /// Multiplies `kappa` in the forward parameter map; anything but 1 must make the suite fail.
    pub kappa_scale: f64,
}

impl Default for ValidationOptions {
    fn default() -> Self {
        ValidationOptions {
            quick: false,
            kappa_scale: 1.0,
        }
    }
}

const N_GRID: [f64; 3] = [0.1, 1.0, 10.0];
const X_GRID: [f64; 5] = [0.0, 0.5, 1.0, 5.0, 15.0];

pub fn run_validation(opts: ValidationOptions) -> Result<ValidationReport> {
    let mut checks = Vec::new();
    let trunc = MatsubaraTruncation::new(
        if opts.quick { 100_000 } else { 1_000_000 },
        TailCorrection::Integral,
    )?;

    for &n in &N_GRID {
        for x in [0.0, 0.5, 5.0] {
            let (h, f, r) = (n + 0.5, 1.3 * (n + 0.5), 0.3 * (n + 0.5));
            let m = GaussianMoments::new(f, (h * h + r * r) / f, r)?;
            let p = params_with_kappa(&m, x, opts.kappa_scale)?;
            let (back, _) = moments_from_params(&p)?;
            for (what, v, r) in [("F", back.f, m.f), ("K", back.k, m.k), ("R", back.r, m.r)] {
                checks.push(Check::new(
                    format!("roundtrip_{what}(n={n},x={x})"),
                    v,
                    r,
                    1e-10,
                    true,
                ));
            }
        }
    }

    for &n in &N_GRID {
        for &x in &X_GRID {
            let st = ReducedState::new(n, x)?;
            checks.push(Check::new(
                format!("entropy(n={n},x={x})"),
                entropy_by_definition(&st)?,
                entropy_per_dof(n)?,
                1e-8,
                false,
            ));
            let p = params_with_kappa(&GaussianMoments::thermal(n)?, x, opts.kappa_scale)?;
            checks.push(Check::new(
                format!("purity(n={n},x={x})"),
                purity_by_definition(&p)?,
                purity(&st)?.p,
                1e-10,
                true,
            ));
            if x > 0.0 {
                checks.push(Check::new(
                    format!("c4_matsubara(n={n},x={x})"),
                    c4_sum(&st, trunc),
                    c4_ratio(&st),
                    1e-8,
                    true,
                ));
            }
        }
    }

    for z in [0.1, 2f64.ln(), 1.0, 5.0] {
        checks.push(Check::new(
            format!("trace_g(z={z:.4})"),
            trace_g_sum(z * z, trunc)?,
            trace_g_closed(z),
            1e-8,
            true,
        ));
    }
    checks.push(Check::new(
        "pair_sum(a=1,b=2)".into(),
        pair_sum_nonzero(1.0, 2.0, trunc),
        pair_sum_closed(1.0, 2.0) - 0.25,
        1e-8,
        true,
    ));

    for s in [-4.0, -0.5, 0.0, 0.5, 4.0] {
        let h = 1e-5;
        let dfu = (big_f(s + h)?.fu - big_f(s - h)?.fu) / (2.0 * h);
        checks.push(Check::new(
            format!("dFu/ds(s={s})"),
            dfu,
            small_f(s)?.fu / 4.0,
            1e-7,
            false,
        ));
    }

    let m = GaussianMoments::new(12.0, 11.0, 3.0)?;
    let n = m.occupation()?;
    let st = ReducedState::new(n, 0.0)?;
    let a = params_with_kappa(&m, 0.0, opts.kappa_scale)?.a;
    let settings = WignerSettings::default();
    let points: &[(f64, f64)] = if opts.quick {
        &[(0.0, 0.0), (2.0, 0.4)]
    } else {
        &[(0.0, 0.0), (2.0, 0.4), (-3.0, 0.1), (5.0, -0.2)]
    };
    for &(phi, pi) in points {
        let (u_sq, r_sq) = physical_to_scaled(&m, a, crate::wigner::Mode::Para, phi, pi);
        let slice = WignerSlice::new(&st, u_sq, &settings, r_sq.sqrt())?;
        let w = slice.ln_w(r_sq, settings.extrapolation, settings.tol)?;
        checks.push(Check::new(
            format!("gaussian_wigner(phi={phi},pi={pi})"),
            w.value,
            gaussian_wigner_ln(&m, phi, pi),
            1e-6,
            false,
        ));
    }

    Ok(ValidationReport {
        quick: opts.quick,
        checks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quick_suite_passes() {
        let r = run_validation(ValidationOptions {
            quick: true,
            kappa_scale: 1.0,
        })
        .unwrap();
        assert!(r.passed(), "{}", r.lines());
        assert!(r.lines().lines().all(|l| l.ends_with("PASS")));
    }

    #[test]
    fn wrong_kappa_fails_roundtrip() {
        let r = run_validation(ValidationOptions {
            quick: true,
            kappa_scale: 1.01,
        })
        .unwrap();
        assert!(!r.passed());
        assert!(r.first_failure().unwrap().name.starts_with("roundtrip"));
    }
}
