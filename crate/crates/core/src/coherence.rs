//! Coherent-state overlaps `|<alpha|D|alpha'>|` of a Gaussian-shaped Wigner function.
//!
//! With `alpha = a + i b`, the magnitude depends only on the lengths of
//! `a + a'`, `a - a'`, `b + b'`, `b - b'` and, for the displaced case,
//! on the dot product `(a + a') . (b' - b)`.

use num_complex::Complex64;
use serde::Serialize;

use crate::densmat::peak_fit;
use crate::error::{Error, Result};
use crate::statemap::{params_from_moments, GaussianMoments, ReducedState};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoherencePair {
    pub a_sum: f64,
    pub a_diff: f64,
    pub b_sum: f64,
    pub b_diff: f64,
    /// `(a + a') . (b' - b)`; zero when the two are orthogonal.
    pub cross: f64,
}

impl CoherencePair {
    pub fn new(a_sum: f64, a_diff: f64, b_sum: f64, b_diff: f64) -> Result<Self> {
        for (what, v) in [
            ("|a+a'|", a_sum),
            ("|a-a'|", a_diff),
            ("|b+b'|", b_sum),
            ("|b-b'|", b_diff),
        ] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::Domain { what, value: v });
            }
        }
        Ok(CoherencePair {
            a_sum,
            a_diff,
            b_sum,
            b_diff,
            cross: 0.0,
        })
    }

    /// From the real and imaginary parts of `alpha` and `alpha'`.
    pub fn from_vectors(a: &[f64], a_prime: &[f64], b: &[f64], b_prime: &[f64]) -> Result<Self> {
        let n = a.len();
        if a_prime.len() != n || b.len() != n || b_prime.len() != n {
            return Err(Error::InvalidConfig(
                "coherent-state vectors differ in length".into(),
            ));
        }
        let norm = |f: &dyn Fn(usize) -> f64| (0..n).map(|i| f(i).powi(2)).sum::<f64>().sqrt();
        let mut pair = CoherencePair::new(
            norm(&|i| a[i] + a_prime[i]),
            norm(&|i| a[i] - a_prime[i]),
            norm(&|i| b[i] + b_prime[i]),
            norm(&|i| b[i] - b_prime[i]),
        )?;
        pair.cross = (0..n)
            .map(|i| (a[i] + a_prime[i]) * (b_prime[i] - b[i]))
            .sum();
        Ok(pair)
    }

    /// The pair `alpha = alpha'^* = (phi0 e + i x)/sqrt 2` with `x` orthogonal to `e`.
    pub fn conjugate_cells(phi0: f64, x: f64) -> Result<Self> {
        let s = std::f64::consts::SQRT_2;
        CoherencePair::new(s * phi0.abs(), 0.0, 0.0, s * x.abs())
    }

    /// `beta_phi . beta_phi` with `beta_phi = (alpha' + alpha^*)/sqrt 2`.
    pub fn beta_phi_sq(&self) -> Complex64 {
        Complex64::new(0.5 * (self.a_sum.powi(2) - self.b_diff.powi(2)), self.cross)
    }

    /// `|beta_phi|^2 = beta_phi . beta_phi^*`.
    pub fn beta_phi_abs_sq(&self) -> f64 {
        0.5 * (self.a_sum.powi(2) + self.b_diff.powi(2))
    }
}

/// Per-component Wigner widths `Delta_phi^2`, `Delta_pi^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WignerWidths {
    pub delta_phi_sq: f64,
    pub delta_pi_sq: f64,
}

impl WignerWidths {
    pub fn new(delta_phi_sq: f64, delta_pi_sq: f64) -> Result<Self> {
        if !(delta_phi_sq > 0.0) || !delta_phi_sq.is_finite() {
            return Err(Error::Domain {
                what: "Delta_phi^2",
                value: delta_phi_sq,
            });
        }
        if !(delta_pi_sq > 0.0) || !delta_pi_sq.is_finite() {
            return Err(Error::Domain {
                what: "Delta_pi^2",
                value: delta_pi_sq,
            });
        }
        Ok(WignerWidths {
            delta_phi_sq,
            delta_pi_sq,
        })
    }

    pub fn vacuum() -> Self {
        WignerWidths {
            delta_phi_sq: 0.5,
            delta_pi_sq: 0.5,
        }
    }

    /// Widths of the Gaussian observer (`R = 0`): `F` and `K`.
    pub fn gaussian(m: &GaussianMoments) -> Result<Self> {
        WignerWidths::new(m.f, m.k)
    }

    /// Widths of the peaked Wigner function: `A delta_u^2` and `delta_r^2 / 4A` with `delta_r^2 = 2`.
    pub fn peak(m: &GaussianMoments, x: f64) -> Result<Self> {
        let a = params_from_moments(m, x)?.a;
        let fit = peak_fit(&ReducedState::new(m.occupation()?, x)?)?;
        WignerWidths::new(a * fit.delta_u_sq, 2.0 / (4.0 * a))
    }

    /// Decay rates of the log-magnitude in `(a - a')^2` and `(b - b')^2`.
    pub fn decay_rates(&self) -> (f64, f64) {
        (
            self.delta_pi_sq / (1.0 + 2.0 * self.delta_pi_sq),
            self.delta_phi_sq / (1.0 + 2.0 * self.delta_phi_sq),
        )
    }

    /// Distances along the real and imaginary axes over which the overlap drops by `1/e`.
    pub fn coherence_lengths(&self) -> (f64, f64) {
        let (ra, rb) = self.decay_rates();
        (ra.recip().sqrt(), rb.recip().sqrt())
    }
}

/// Log-magnitude for a Wigner function centred at the origin, up to normalization.
pub fn overlap_centered(pair: &CoherencePair, w: &WignerWidths) -> f64 {
    let (p, q) = (1.0 + 2.0 * w.delta_phi_sq, 1.0 + 2.0 * w.delta_pi_sq);
    -pair.a_sum.powi(2) / (2.0 * p)
        - pair.b_sum.powi(2) / (2.0 * q)
        - w.delta_pi_sq * pair.a_diff.powi(2) / q
        - w.delta_phi_sq * pair.b_diff.powi(2) / p
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DisplacedOverlap {
    /// Radial factor plus Gaussian factors, without the cosine.
    pub ln_magnitude: f64,
    /// `ln |cos(2 i beta_phi phi0 - N pi/4)|`.
    pub ln_cos: f64,
    /// `ln cosh(Im w)`, the upper envelope of `ln |cos w|`.
    pub ln_cos_envelope: f64,
    /// Set when `|Im w| < 1`, where the cosine can approach zero and the envelope is not representative.
    pub oscillatory: bool,
}

/// Default for the ratio `|beta_phi| phi0 / (N/2)` below which the asymptotic form is refused.
pub const DEFAULT_MIN_RATIO: f64 = 2.0;

/// Log-magnitude for a Wigner function peaked on the sphere `|phi| = phi0`.
pub fn overlap_displaced(
    pair: &CoherencePair,
    w: &WignerWidths,
    phi0: f64,
    n: u32,
    min_ratio: f64,
) -> Result<DisplacedOverlap> {
    if n == 0 || n % 2 == 1 {
        return Err(Error::InvalidConfig(format!(
            "N = {n} must be even and positive"
        )));
    }
    if !(phi0 > 0.0) || !phi0.is_finite() {
        return Err(Error::Domain {
            what: "phi0",
            value: phi0,
        });
    }
    let half_n = 0.5 * n as f64;
    let beta_abs = pair.beta_phi_abs_sq().sqrt();
    let product = beta_abs * phi0;
    if product < min_ratio * half_n {
        return Err(Error::AsymptoticRegimeViolation { product, half_n });
    }
    let radial = half_n * (phi0 / beta_abs).ln();
    let arg = Complex64::new(0.0, 2.0 * phi0) * pair.beta_phi_sq().sqrt()
        - Complex64::new(half_n * std::f64::consts::FRAC_PI_2, 0.0);
    let im = arg.im.abs();
    // |cos w|^2 = cos^2(Re w) + sinh^2(Im w)
    let ln_cos = 0.5 * (arg.re.cos().powi(2) + im.sinh().powi(2)).ln();
    let ln_cos_envelope = im + (0.5 * (1.0 + (-2.0 * im).exp())).ln();
    Ok(DisplacedOverlap {
        ln_magnitude: radial + overlap_centered(pair, w),
        ln_cos,
        ln_cos_envelope,
        oscillatory: im < 1.0,
    })
}

/// `(N/4) ln(phi0^2 / (phi0^2 + x^2)) - 2 Delta_phi^2 x^2 / (1 + 2 Delta_phi^2)`.
pub fn overlap_conjugate_cells(w: &WignerWidths, phi0: f64, x: f64, n: u32) -> f64 {
    let (p2, x2) = (phi0 * phi0, x * x);
    0.25 * n as f64 * (p2 / (p2 + x2)).ln()
        - 2.0 * w.delta_phi_sq * x2 / (1.0 + 2.0 * w.delta_phi_sq)
}
