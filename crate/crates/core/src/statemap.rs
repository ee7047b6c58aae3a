//! Correlators, operator coefficients and the reduced coordinates `(n, x)`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::observables::c4_ratio_nx;
use crate::saddle::{brent, solve_gap_raw};
use crate::specfun::h_trace;

/// Measured two-point data per field component: `F = <phi phi>`,
/// `K = <pi pi>` and the symmetrised `R = <phi pi>`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GaussianMoments {
    pub f: f64,
    pub k: f64,
    pub r: f64,
}

impl GaussianMoments {
    pub fn new(f: f64, k: f64, r: f64) -> Result<Self> {
        if !(f > 0.0) || !f.is_finite() {
            return Err(Error::Domain {
                what: "F",
                value: f,
            });
        }
        if !(k > 0.0) || !k.is_finite() {
            return Err(Error::Domain {
                what: "K",
                value: k,
            });
        }
        if !r.is_finite() {
            return Err(Error::Domain {
                what: "R",
                value: r,
            });
        }
        Ok(GaussianMoments { f, k, r })
    }

    /// Isotropic moments `F = K = n + 1/2`, `R = 0` with occupation `n`.
    pub fn thermal(n: f64) -> Result<Self> {
        if !(n >= 0.0) {
            return Err(Error::Domain {
                what: "occupation n",
                value: n,
            });
        }
        GaussianMoments::new(n + 0.5, n + 0.5, 0.0)
    }

    /// `n = sqrt(FK - R^2) - 1/2`.
    pub fn occupation(&self) -> Result<f64> {
        let product = self.f * self.k - self.r * self.r;
        if product < 0.25 {
            return Err(Error::HeisenbergViolation { product });
        }
        Ok((product.sqrt() - 0.5).max(0.0))
    }
}

/// Free function form of [`GaussianMoments::occupation`].
pub fn occupation(m: &GaussianMoments) -> Result<f64> {
    m.occupation()
}

/// The pair `(C4/2F^2, x)` describing how far the state is from Gaussian.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NonGaussianity {
    pub c4_half_ratio: f64,
    pub x: f64,
}

impl NonGaussianity {
    pub fn from_x(n: f64, x: f64) -> Result<Self> {
        Ok(NonGaussianity {
            c4_half_ratio: c4_ratio_nx(n, x)?,
            x,
        })
    }

    pub fn from_c4(n: f64, c4_half_ratio: f64) -> Result<Self> {
        Ok(NonGaussianity {
            c4_half_ratio,
            x: x_from_c4(n, c4_half_ratio)?,
        })
    }
}

/// Coefficients of the exponent
/// `A pi^2 + B phi^2 + C {phi, pi} + eta (phi^2)^2 / N` of the density operator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OperatorParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub eta: f64,
}

impl OperatorParams {
    /// `B' = B - C^2/A`.
    pub fn b_prime(&self) -> f64 {
        self.b - self.c * self.c / self.a
    }

    /// `z0^2 = 4 A B'`.
    pub fn z0_sq(&self) -> f64 {
        4.0 * self.a * self.b_prime()
    }

    /// `xi = 8 A^2 eta`.
    pub fn xi(&self) -> f64 {
        8.0 * self.a * self.a * self.eta
    }

    /// Every coefficient multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> OperatorParams {
        OperatorParams {
            a: factor * self.a,
            b: factor * self.b,
            c: factor * self.c,
            eta: factor * self.eta,
        }
    }
}

/// The intrinsic coordinates `(n, x)` with their derived constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReducedState {
    n: f64,
    x: f64,
    log_ratio: f64,
    kappa: f64,
    zeta: f64,
    z0_sq: f64,
    xi: f64,
}

impl ReducedState {
    pub fn new(n: f64, x: f64) -> Result<Self> {
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::Domain {
                what: "occupation n",
                value: n,
            });
        }
        if !(x >= 0.0) || !x.is_finite() {
            return Err(Error::Domain {
                what: "nongaussianity x",
                value: x,
            });
        }
        let log_ratio = (1.0 / n).ln_1p();
        let kappa = log_ratio / (2.0 * n + 1.0);
        let half = n + 0.5;
        Ok(ReducedState {
            n,
            x,
            log_ratio,
            kappa,
            zeta: 1.0 + 2.0 * kappa * n * (n + 1.0),
            z0_sq: log_ratio * log_ratio * (1.0 - 2.0 * x),
            xi: 8.0 * x * kappa.powi(3) * half * half,
        })
    }

    pub fn n(&self) -> f64 {
        self.n
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    /// `L = ln(1 + 1/n)`, the solution `z` of the trace gap equation.
    pub fn log_ratio(&self) -> f64 {
        self.log_ratio
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn zeta(&self) -> f64 {
        self.zeta
    }

    pub fn z0_sq(&self) -> f64 {
        self.z0_sq
    }

    pub fn xi(&self) -> f64 {
        self.xi
    }

    /// `-z0^2 / xi = (1/kappa)(1 - 1/(2x))`, finite for `x > 0`.
    pub fn minus_z0_sq_over_xi(&self) -> f64 {
        (1.0 - 0.5 / self.x) / self.kappa
    }
}

/// `kappa(n) = ln(1 + 1/n) / (2n + 1)`.
pub fn kappa(n: f64) -> f64 {
    (1.0 / n).ln_1p() / (2.0 * n + 1.0)
}

/// `A = kappa F`, `B = kappa K - 2 eta F`, `C = -kappa R`, `eta = x kappa (n+1/2)^2 / F^2`.
pub fn params_from_moments(m: &GaussianMoments, x: f64) -> Result<OperatorParams> {
    params_with_kappa(m, x, 1.0)
}

/// Like [`params_from_moments`] with `kappa` multiplied by `kappa_scale`.
/// Used by the validation suite to inject a deliberate error.
pub fn params_with_kappa(m: &GaussianMoments, x: f64, kappa_scale: f64) -> Result<OperatorParams> {
    let n = m.occupation()?;
    if !(x >= 0.0) || !x.is_finite() {
        return Err(Error::Domain {
            what: "nongaussianity x",
            value: x,
        });
    }
    if n == 0.0 {
        return Err(Error::Domain {
            what: "occupation n (pure state has no finite operator)",
            value: n,
        });
    }
    let k = kappa(n) * kappa_scale;
    let half = n + 0.5;
    let eta = x * k * half * half / (m.f * m.f);
    Ok(OperatorParams {
        a: k * m.f,
        b: k * m.k - 2.0 * eta * m.f,
        c: -k * m.r,
        eta,
    })
}

/// Reduced coordinates of the operator `p`, obtained from its gap equation.
pub fn reduced_from_params(p: &OperatorParams) -> Result<ReducedState> {
    if !(p.a > 0.0) {
        return Err(Error::NonPositiveA { a: p.a });
    }
    if !(p.eta >= 0.0) {
        return Err(Error::Domain {
            what: "eta",
            value: p.eta,
        });
    }
    let sol = solve_gap_raw(p.z0_sq(), p.xi())?;
    let z = sol.s.sqrt();
    let n = 1.0 / z.exp_m1();
    let k = h_trace(sol.s)?;
    let f = p.a / k;
    let half = n + 0.5;
    let x = p.eta * f * f / (k * half * half);
    ReducedState::new(n, x)
}

/// Moments and `C4/2F^2` implied by the operator coefficients.
pub fn moments_from_params(p: &OperatorParams) -> Result<(GaussianMoments, f64)> {
    let state = reduced_from_params(p)?;
    let k = h_trace(state.log_ratio() * state.log_ratio())?;
    let f = p.a / k;
    let moments = GaussianMoments::new(f, (p.b + 2.0 * p.eta * f) / k, -p.c / k)?;
    let c4 = if p.eta == 0.0 {
        0.0
    } else {
        c4_ratio_nx(state.n(), state.x())?
    };
    Ok((moments, c4))
}

/// Largest `x` tried before a target is declared unreachable.
const X_SEARCH_LIMIT: f64 = 1e15;

/// Invert `C4/2F^2 = c4_ratio(n, x)` for `x`. The ratio decreases from 0
/// towards its infimum -1 as `x` grows.
pub fn x_from_c4(n: f64, c4_half_ratio: f64) -> Result<f64> {
    if !(c4_half_ratio <= 0.0) {
        return Err(Error::Domain {
            what: "C4/2F^2 (must be <= 0)",
            value: c4_half_ratio,
        });
    }
    if !(n >= 0.0) || !n.is_finite() {
        return Err(Error::Domain {
            what: "occupation n",
            value: n,
        });
    }
    if c4_half_ratio == 0.0 {
        return Ok(0.0);
    }
    let unreachable = Error::Unreachable {
        target: c4_half_ratio,
        infimum: -1.0,
    };
    if c4_half_ratio <= -1.0 {
        return Err(unreachable);
    }
    let g = |x: f64| -> Result<f64> { Ok(c4_half_ratio - c4_ratio_nx(n, x)?) };
    let mut hi = 1.0;
    let mut g_hi = g(hi)?;
    while g_hi < 0.0 {
        hi *= 4.0;
        if hi > X_SEARCH_LIMIT {
            return Err(unreachable);
        }
        g_hi = g(hi)?;
    }
    let (x, _) = brent(g, 0.0, hi, c4_half_ratio, g_hi)?;
    Ok(x)
}

/// Fully specified operator: moments, coefficients and reduced coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DensityOperator {
    pub moments: GaussianMoments,
    pub params: OperatorParams,
    pub state: ReducedState,
    pub c4_half_ratio: f64,
}

impl DensityOperator {
    pub fn from_moments(moments: GaussianMoments, x: f64) -> Result<Self> {
        let n = moments.occupation()?;
        let params = params_from_moments(&moments, x)?;
        Ok(DensityOperator {
            moments,
            params,
            state: ReducedState::new(n, x)?,
            c4_half_ratio: c4_ratio_nx(n, x)?,
        })
    }

    pub fn from_c4(moments: GaussianMoments, c4_half_ratio: f64) -> Result<Self> {
        let n = moments.occupation()?;
        DensityOperator::from_moments(moments, x_from_c4(n, c4_half_ratio)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn occupation_examples() {
        assert_eq!(
            GaussianMoments::new(1.0, 1.0, 0.0)
                .unwrap()
                .occupation()
                .unwrap(),
            0.5
        );
        assert_eq!(
            GaussianMoments::new(0.5, 0.5, 0.0)
                .unwrap()
                .occupation()
                .unwrap(),
            0.0
        );
        assert!(matches!(
            GaussianMoments::new(1.0, 0.2, 0.0).unwrap().occupation(),
            Err(Error::HeisenbergViolation { .. })
        ));
        assert!(GaussianMoments::new(-1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn params_examples() {
        let p = params_from_moments(&GaussianMoments::new(1.0, 1.0, 0.0).unwrap(), 0.0).unwrap();
        let ln3_2 = 0.5 * 3.0_f64.ln();
        assert_relative_eq!(p.a, ln3_2, max_relative = 1e-15);
        assert_relative_eq!(p.b, ln3_2, max_relative = 1e-15);
        assert_eq!((p.c, p.eta), (0.0, 0.0));
        assert_relative_eq!(p.z0_sq(), 3.0_f64.ln().powi(2), max_relative = 1e-15);

        let p = params_from_moments(&GaussianMoments::thermal(10.0).unwrap(), 15.0).unwrap();
        assert_relative_eq!(p.eta, 15.0 * 1.1_f64.ln() / 21.0, max_relative = 1e-14);
        assert_relative_eq!(p.eta, 0.068_078_7, max_relative = 1e-6);
    }

    #[test]
    fn reduced_state_identities() {
        for n in [0.01, 0.1, 1.0, 10.0, 100.0] {
            for x in [0.1, 0.5, 1.0, 15.0] {
                let st = ReducedState::new(n, x).unwrap();
                let l = (1.0 / n).ln_1p();
                assert_relative_eq!(
                    st.z0_sq(),
                    l * l * (1.0 - 2.0 * x),
                    max_relative = 1e-12,
                    epsilon = 1e-300
                );
                let ratio = (1.0 / st.kappa()) * (0.5 / x - 1.0);
                assert_relative_eq!(st.z0_sq() / st.xi(), ratio, max_relative = 1e-12);
                assert_relative_eq!(-st.minus_z0_sq_over_xi(), ratio, max_relative = 1e-12);
                assert_relative_eq!(h_trace(l * l).unwrap(), st.kappa(), max_relative = 1e-12);
            }
        }
        assert!(ReducedState::new(0.0, 1.0).is_err());
        assert!(ReducedState::new(1.0, -1.0).is_err());
    }

    #[test]
    fn roundtrip_grid() {
        for n in [0.1_f64, 1.0, 10.0] {
            for x in [0.0, 0.5, 5.0] {
                for (f, r) in [(n + 0.5, 0.0), (2.0 * (n + 0.5), 0.3 * (n + 0.5))] {
                    let k = ((n + 0.5).powi(2) + r * r) / f;
                    let m = GaussianMoments::new(f, k, r).unwrap();
                    let p = params_from_moments(&m, x).unwrap();
                    let (back, c4) = moments_from_params(&p).unwrap();
                    assert_relative_eq!(back.f, m.f, max_relative = 1e-10);
                    assert_relative_eq!(back.k, m.k, max_relative = 1e-10);
                    assert_relative_eq!(back.r, m.r, max_relative = 1e-10, epsilon = 1e-12);
                    if x == 0.0 {
                        assert_eq!(c4, 0.0);
                    }
                }
            }
        }
        let p = params_from_moments(&GaussianMoments::thermal(1.0).unwrap(), 1.0).unwrap();
        assert_relative_eq!(
            reduced_from_params(&p).unwrap().n(),
            1.0,
            max_relative = 1e-10
        );
        let bad = OperatorParams {
            a: 0.0,
            b: 1.0,
            c: 0.0,
            eta: 0.0,
        };
        assert!(matches!(
            moments_from_params(&bad),
            Err(Error::NonPositiveA { .. })
        ));
    }

    #[test]
    fn inversion_examples() {
        assert_eq!(x_from_c4(3.0, 0.0).unwrap(), 0.0);
        let x = x_from_c4(10.0, -30.0 / 31.0).unwrap();
        // the large-n form gives exactly 15; the finite-n curve lies above it
        assert!(x > 15.0 && x < 17.0, "{x}");
        assert!((c4_ratio_nx(10.0, x).unwrap() + 30.0 / 31.0).abs() < 1e-10);
        assert!(matches!(
            x_from_c4(10.0, -1.0),
            Err(Error::Unreachable { .. })
        ));
        assert!(x_from_c4(10.0, 0.1).is_err());
        let x = x_from_c4(10.0, -0.999).unwrap();
        assert!((c4_ratio_nx(10.0, x).unwrap() + 0.999).abs() < 1e-10);
        assert!(matches!(
            x_from_c4(10.0, -1.0 + 1e-17),
            Err(Error::Unreachable { .. })
        ));
    }

    proptest! {
        #[test]
        fn inversion_roundtrip(n in 0.0..200.0f64, x in 0.0..1e3f64) {
            let c4 = c4_ratio_nx(n, x).unwrap();
            prop_assume!(c4 > -1.0 + 1e-9);
            let back = x_from_c4(n, c4).unwrap();
            prop_assert!((c4_ratio_nx(n, back).unwrap() - c4).abs() < 1e-10);
        }

        #[test]
        fn heisenberg(f in 0.01..10.0f64, k in 0.01..10.0f64, r in -3.0..3.0f64) {
            let m = GaussianMoments::new(f, k, r).unwrap();
            prop_assert_eq!(m.occupation().is_ok(), f * k - r * r >= 0.25);
        }
    }
}
