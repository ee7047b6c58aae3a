//! Special-function kernels written as functions of `s = z^2`.
//!
//! For `s < 0` the frequency is imaginary, `z = i y` with `y = sqrt(-s)`, and
//! every function below is continued analytically into real arithmetic.
//! Close to `s = 0` truncated Taylor series replace the closed forms.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Below this `|s|` the Taylor polynomials are used.
pub const SERIES_THRESHOLD: f64 = 1e-3;

/// `ln(4 pi) / 2`, the value of `F0` at `s = 0`.
pub const HALF_LN_4PI: f64 = 1.265_512_123_484_645_3;

const PI_SQ: f64 = PI * PI;

fn poly(c: &[f64], s: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &ci| acc * s + ci)
}

const H_TRACE_SERIES: [f64; 5] = [0.0, 0.5, -1.0 / 24.0, 1.0 / 240.0, -17.0 / 40320.0];
const H2_SERIES: [f64; 5] = [0.0, 1.0, -1.0 / 3.0, 2.0 / 15.0, -17.0 / 315.0];
const LN_SINHC_SERIES: [f64; 5] = [0.0, 1.0 / 6.0, -1.0 / 180.0, 1.0 / 2835.0, -1.0 / 37800.0];
const FV_SERIES: [f64; 5] = [
    1.0,
    1.0 / 12.0,
    -1.0 / 720.0,
    1.0 / 30240.0,
    -1.0 / 1_209_600.0,
];
const F0_SMALL_SERIES: [f64; 5] = [
    1.0 / 3.0,
    -1.0 / 45.0,
    2.0 / 945.0,
    -1.0 / 4725.0,
    2.0 / 93555.0,
];
const FU_SMALL_SERIES: [f64; 5] = [1.0, -1.0 / 6.0, 1.0 / 40.0, -17.0 / 5040.0, 31.0 / 72576.0];
const FV_SMALL_SERIES: [f64; 5] = [
    1.0 / 3.0,
    -1.0 / 90.0,
    1.0 / 2520.0,
    -1.0 / 75600.0,
    1.0 / 2_395_008.0,
];

/// Which side of the branch point a squared frequency lies on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum Branch {
    Real,
    ImaginaryContinued,
}

impl Branch {
    pub fn of(s: f64) -> Branch {
        if s >= 0.0 {
            Branch::Real
        } else {
            Branch::ImaginaryContinued
        }
    }
}

fn check_matrix_domain(s: f64, what: &'static str) -> Result<()> {
    if s.is_nan() || s <= -PI_SQ {
        return Err(Error::Domain { what, value: s });
    }
    Ok(())
}

/// `z tanh(z/2)`; the reciprocal of the trace gap-equation right-hand side.
pub fn h_trace(s: f64) -> Result<f64> {
    check_matrix_domain(s, "h_trace argument s")?;
    if s.abs() < SERIES_THRESHOLD {
        return Ok(poly(&H_TRACE_SERIES, s));
    }
    if s > 0.0 {
        let z = s.sqrt();
        Ok(z * (0.5 * z).tanh())
    } else {
        let y = (-s).sqrt();
        Ok(-y * (0.5 * y).tan())
    }
}

/// `z tanh(z)`, the doubled-parameter counterpart of [`h_trace`].
pub fn h2(s: f64) -> Result<f64> {
    if s.is_nan() || s <= -0.25 * PI_SQ {
        return Err(Error::Domain {
            what: "h2 argument s",
            value: s,
        });
    }
    if s.abs() < SERIES_THRESHOLD {
        return Ok(poly(&H2_SERIES, s));
    }
    if s > 0.0 {
        let z = s.sqrt();
        Ok(z * z.tanh())
    } else {
        let y = (-s).sqrt();
        Ok(-y * y.tan())
    }
}

/// The triple `(F0, Fu, Fv)` entering the matrix-element exponent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BigF {
    pub f0: f64,
    pub fu: f64,
    pub fv: f64,
}

/// The triple `(f0, fu, fv)` on the right-hand side of the matrix-element saddle equation.
/// Each is `4 dF/ds` of its [`BigF`] partner.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmallF {
    pub f0: f64,
    pub fu: f64,
    pub fv: f64,
}

impl SmallF {
    /// `f0 + fu u^2 + fv v^2`.
    pub fn combine(&self, u_sq: f64, v_sq: f64) -> f64 {
        self.f0 + self.fu * u_sq + self.fv * v_sq
    }
}

/// Below this `|s|` the power series in `s` of `sinh z / z` is summed directly.
const SINHC_SERIES_LIMIT: f64 = 1.0;

/// `sinh z / z - 1 = sum_{k>=1} s^k / (2k+1)!`, accurate for `|s| < 1`.
fn sinhc_m1_series(s: f64) -> f64 {
    let mut term = 1.0;
    let mut sum = 0.0;
    for k in 1..16 {
        term *= s / ((2 * k) as f64 * (2 * k + 1) as f64);
        sum += term;
    }
    sum
}

/// `(z cosh z - sinh z) / z = sum_{k>=1} 2k s^k / (2k+1)!`, accurate for `|s| < 1`.
fn zcosh_minus_sinh_series(s: f64) -> f64 {
    let mut term = 1.0;
    let mut sum = 0.0;
    for k in 1..16 {
        term *= s / ((2 * k) as f64 * (2 * k + 1) as f64);
        sum += (2 * k) as f64 * term;
    }
    sum
}

/// `ln(sinh z / z)`, continued to `ln(sin y / y)`.
fn ln_sinhc(s: f64) -> f64 {
    if s.abs() < SERIES_THRESHOLD {
        return poly(&LN_SINHC_SERIES, s);
    }
    if s.abs() < SINHC_SERIES_LIMIT {
        return sinhc_m1_series(s).ln_1p();
    }
    if s > 0.0 {
        let z = s.sqrt();
        if z > 20.0 {
            z + (-(-2.0 * z).exp()).ln_1p() - std::f64::consts::LN_2 - z.ln()
        } else {
            (z.sinh() / z).ln()
        }
    } else {
        let y = (-s).sqrt();
        (y.sin() / y).ln()
    }
}

pub fn big_f(s: f64) -> Result<BigF> {
    check_matrix_domain(s, "big_f argument s")?;
    let fu = 0.5 * h_trace(s)?;
    let fv = if s.abs() < SERIES_THRESHOLD {
        poly(&FV_SERIES, s)
    } else if s > 0.0 {
        let h = 0.5 * s.sqrt();
        h / h.tanh()
    } else {
        let h = 0.5 * (-s).sqrt();
        h / h.tan()
    };
    Ok(BigF {
        f0: HALF_LN_4PI + 0.5 * ln_sinhc(s),
        fu,
        fv,
    })
}

pub fn small_f(s: f64) -> Result<SmallF> {
    check_matrix_domain(s, "small_f argument s")?;
    if s.abs() < SERIES_THRESHOLD {
        return Ok(SmallF {
            f0: poly(&F0_SMALL_SERIES, s),
            fu: poly(&FU_SMALL_SERIES, s),
            fv: poly(&FV_SMALL_SERIES, s),
        });
    }
    if s.abs() < SINHC_SERIES_LIMIT {
        let sinhc = 1.0 + sinhc_m1_series(s);
        let (fu, half_sin_sq) = if s > 0.0 {
            let h = 0.5 * s.sqrt();
            let sech = 1.0 / h.cosh();
            (h.tanh() / (2.0 * h) + 0.5 * sech * sech, h.sinh().powi(2))
        } else {
            let h = 0.5 * (-s).sqrt();
            let c = h.cos();
            ((sinhc + 1.0) / (2.0 * c * c), -h.sin().powi(2))
        };
        return Ok(SmallF {
            f0: zcosh_minus_sinh_series(s) / (s * sinhc),
            fu,
            fv: sinhc_m1_series(s) / (2.0 * half_sin_sq),
        });
    }
    if s > 0.0 {
        let z = s.sqrt();
        let h = 0.5 * z;
        let th = h.tanh();
        let sh = h.sinh();
        let sech = 1.0 / h.cosh();
        // sinh z / z - 1 written through the half angle so large z cannot overflow
        let fv = if z > 40.0 {
            1.0 / (th * z)
        } else {
            1.0 / (th * z) - 0.5 / (sh * sh)
        };
        Ok(SmallF {
            f0: (z / z.tanh() - 1.0) / s,
            fu: th / z + 0.5 * sech * sech,
            fv,
        })
    } else {
        let y = (-s).sqrt();
        let sinc = y.sin() / y;
        let ch = (0.5 * y).cos();
        let sh = (0.5 * y).sin();
        Ok(SmallF {
            f0: (1.0 - y / y.tan()) / (y * y),
            fu: (sinc + 1.0) / (2.0 * ch * ch),
            fv: (1.0 - sinc) / (2.0 * sh * sh),
        })
    }
}

/// `ln(k!)` for the small integer orders used by the Bessel quadrature.
pub fn ln_factorial(k: u32) -> f64 {
    (2..=k).map(|j| (j as f64).ln()).sum()
}

/// Integer-order Bessel function of the first kind, `J_order(x)` for `x >= 0`.
///
/// Miller's backward recurrence normalised by `J0 + 2 sum J_2k = 1` when the
/// order exceeds the argument or the argument is moderate, otherwise the
/// Hankel expansion for `J0`, `J1` followed by upward recurrence.
pub fn bessel_j(order: u32, x: f64) -> f64 {
    if x == 0.0 {
        return if order == 0 { 1.0 } else { 0.0 };
    }
    let x = x.abs();
    if x < 25.0 || (order as f64) >= x {
        bessel_j_miller(order, x)
    } else {
        let (j0, j1) = hankel_j01(x);
        if order == 0 {
            return j0;
        }
        let (mut jm, mut j) = (j0, j1);
        for k in 1..order {
            let jp = (2.0 * k as f64 / x) * j - jm;
            jm = j;
            j = jp;
        }
        j
    }
}

fn bessel_j_miller(order: u32, x: f64) -> f64 {
    let top = (order as f64).max(x);
    let mut m = (top + 20.0 + 8.0 * top.cbrt()).ceil() as u32;
    if m % 2 == 1 {
        m += 1;
    }
    let mut jp = 0.0_f64;
    let mut j = 1e-300_f64;
    let mut norm = 0.0_f64;
    let mut result = 0.0_f64;
    let mut k = m;
    while k > 0 {
        let jm = (2.0 * k as f64 / x) * j - jp;
        jp = j;
        j = jm;
        // j now holds J_{k-1}
        if (k - 1).is_multiple_of(2) && k > 1 {
            norm += 2.0 * j;
        }
        if k - 1 == order {
            result = j;
        }
        if j.abs() > 1e250 {
            j *= 1e-250;
            jp *= 1e-250;
            norm *= 1e-250;
            result *= 1e-250;
        }
        k -= 1;
    }
    norm += j;
    result / norm
}

fn hankel_j01(x: f64) -> (f64, f64) {
    let hankel_pq = |mu: f64| {
        let (mut p, mut q) = (1.0, 0.0);
        let mut term = 1.0_f64;
        let mut last = f64::INFINITY;
        for k in 1..200 {
            let kk = k as f64;
            term *= (mu - (2.0 * kk - 1.0).powi(2)) / (kk * 8.0 * x);
            if term.abs() > last || term.abs() < 1e-17 {
                break;
            }
            last = term.abs();
            // terms alternate sign pairwise: +P0, +Q1, -P2, -Q3, +P4, ...
            let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
            if k % 2 == 0 {
                p += sign * term;
            } else {
                q += sign * term;
            }
        }
        (p, q)
    };
    let amp = (2.0 / (PI * x)).sqrt();
    let (c, sn) = (x.cos(), x.sin());
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let (p0, q0) = hankel_pq(0.0);
    // chi = x - pi/4
    let j0 = amp * (p0 * (c + sn) * r - q0 * (sn - c) * r);
    let (p1, q1) = hankel_pq(4.0);
    // chi = x - 3 pi/4
    let j1 = amp * (p1 * (sn - c) * r + q1 * (sn + c) * r);
    (j0, j1)
}

/// Reduced Bessel function `Gamma(nu+1) (2/t)^nu J_nu(t)`, equal to 1 at `t = 0`
/// and bounded by 1 in magnitude.
pub fn reduced_bessel(nu: u32, t: f64) -> f64 {
    let nuf = nu as f64;
    if t * t < 4.0 * (nuf + 1.0) {
        let q = -0.25 * t * t;
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..200 {
            let kf = k as f64;
            term *= q / (kf * (nuf + kf));
            sum += term;
            if term.abs() < 1e-17 * sum.abs() {
                break;
            }
        }
        sum
    } else {
        bessel_j(nu, t) * (ln_factorial(nu) + nuf * (2.0 / t).ln()).exp()
    }
}
