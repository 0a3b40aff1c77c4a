//! Polynomials with coefficients stored as `(log |a_k|, arg a_k)` and their
//! zeros.
//!
//! Evaluation rescales every term by the largest `|a_k| |z|^k` before the
//! Horner pass, so coefficients spanning thousands of orders of magnitude
//! never overflow.

mod aberth;
mod argument;
mod partial_exp;
mod vieta;
mod zeros;

pub use aberth::{aberth_iterate, find_zeros, newton_polygon_roots, AberthOptions, NewtonStep};
pub use argument::count_zeros_argument;
pub use partial_exp::exp_partial_sum_zeros;
pub use vieta::{vieta_check, VietaReport};
pub use zeros::{Zero, ZeroMeasure};

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Terms smaller than `e^-SKIP` times the largest term are ignored.
const SKIP: f64 = 50.0;

/// A complex number in log-polar form.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogComplex {
    pub log_mag: f64,
    pub phase: f64,
}

impl LogComplex {
    pub const ZERO: LogComplex = LogComplex {
        log_mag: f64::NEG_INFINITY,
        phase: 0.0,
    };

    pub fn from_complex(z: Complex64) -> Self {
        if z == Complex64::new(0.0, 0.0) {
            Self::ZERO
        } else {
            Self {
                log_mag: z.norm().ln(),
                phase: z.arg(),
            }
        }
    }

    pub fn to_complex(self) -> Complex64 {
        if self.log_mag == f64::NEG_INFINITY {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::from_polar(self.log_mag.exp(), self.phase)
        }
    }

    pub fn is_zero(&self) -> bool {
        self.log_mag == f64::NEG_INFINITY
    }
}

/// Wraps an angle into `(-pi, pi]`.
pub(crate) fn wrap_phase(x: f64) -> f64 {
    let y = x.rem_euclid(2.0 * PI);
    if y > PI {
        y - 2.0 * PI
    } else {
        y
    }
}

/// A polynomial `sum_k a_k z^k` with log-polar coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct LogPoly {
    coeffs: Vec<LogComplex>,
    units: Vec<Complex64>,
    trust_radius: f64,
}

/// Output of one scaled Horner pass at `z`, with `w = z / |z|`:
/// `p(z) = e^scale * s0` and `z p'(z) = e^scale * s1`.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Scaled {
    pub s0: Complex64,
    pub s1: Complex64,
    pub scale: f64,
    /// `sum_k |a_k| |z|^k / e^scale`.
    pub abs_sum: f64,
}

impl Scaled {
    /// `log |p(z)| - log sum_k |a_k z^k|`: how far below the coefficient
    /// scale at `|z|` the computed value lies.
    pub fn certificate(&self) -> f64 {
        self.s0.norm().ln() - self.abs_sum.ln()
    }
}

impl LogPoly {
    /// Builds a polynomial, dropping vanishing leading coefficients.
    pub fn new(mut coeffs: Vec<LogComplex>, trust_radius: f64) -> Result<Self> {
        if coeffs
            .iter()
            .any(|c| c.log_mag.is_nan() || c.log_mag == f64::INFINITY || !c.phase.is_finite())
        {
            return Err(Error::InvalidInput(
                "coefficients must be finite or exactly zero".into(),
            ));
        }
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            return Err(Error::Degenerate("all coefficients vanish".into()));
        }
        for c in &mut coeffs {
            c.phase = wrap_phase(c.phase);
        }
        let units = coeffs
            .iter()
            .map(|c| Complex64::from_polar(1.0, c.phase))
            .collect();
        Ok(Self {
            coeffs,
            units,
            trust_radius,
        })
    }

    pub fn from_complex(coeffs: &[Complex64]) -> Result<Self> {
        Self::new(
            coeffs
                .iter()
                .map(|&c| LogComplex::from_complex(c))
                .collect(),
            f64::INFINITY,
        )
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[LogComplex] {
        &self.coeffs
    }

    pub fn trust_radius(&self) -> f64 {
        self.trust_radius
    }

    pub fn with_trust_radius(mut self, r: f64) -> Self {
        self.trust_radius = r;
        self
    }

    /// Number of vanishing low-order coefficients, i.e. zeros at the origin.
    pub fn zero_order(&self) -> usize {
        self.coeffs.iter().take_while(|c| c.is_zero()).count()
    }

    /// The polynomial `z -> p(c z)`; its zeros are those of `p` divided by `c`.
    pub fn compose_scale(&self, c: Complex64) -> Result<Self> {
        let (lc, ac) = (c.norm().ln(), c.arg());
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(k, a)| {
                if a.is_zero() {
                    *a
                } else {
                    LogComplex {
                        log_mag: a.log_mag + k as f64 * lc,
                        phase: a.phase + k as f64 * ac,
                    }
                }
            })
            .collect();
        Self::new(coeffs, self.trust_radius / c.norm())
    }

    /// `p(z) / z^m`, the polynomial with `m` zeros at the origin removed.
    pub(crate) fn deflate_origin(&self, m: usize) -> Result<Self> {
        Self::new(self.coeffs[m..].to_vec(), self.trust_radius)
    }

    pub(crate) fn eval_scaled(&self, z: Complex64, derivative: bool) -> Scaled {
        let r = z.norm();
        if r == 0.0 {
            let c = self.coeffs[0];
            let (s0, scale, abs_sum) = if c.is_zero() {
                (Complex64::new(0.0, 0.0), 0.0, 0.0)
            } else {
                (self.units[0], c.log_mag, 1.0)
            };
            return Scaled {
                s0,
                s1: Complex64::new(0.0, 0.0),
                scale,
                abs_sum,
            };
        }
        let lr = r.ln();
        let w = z / r;
        let mut m = f64::NEG_INFINITY;
        for (k, c) in self.coeffs.iter().enumerate() {
            let l = c.log_mag + k as f64 * lr;
            if l > m {
                m = l;
            }
        }
        let mut b0 = Complex64::new(0.0, 0.0);
        let mut b1 = Complex64::new(0.0, 0.0);
        let mut abs_sum = 0.0;
        for k in (0..self.coeffs.len()).rev() {
            let e = self.coeffs[k].log_mag + k as f64 * lr - m;
            let c = if e > -SKIP {
                let mag = e.exp();
                abs_sum += mag;
                self.units[k] * mag
            } else {
                Complex64::new(0.0, 0.0)
            };
            b0 = b0 * w + c;
            if derivative {
                b1 = b1 * w + c * k as f64;
            }
        }
        Scaled {
            s0: b0,
            s1: b1,
            scale: m,
            abs_sum,
        }
    }

    /// `(log |p(z)|, arg p(z))`, computed without overflow for any `z`.
    pub fn eval_log(&self, z: Complex64) -> (f64, f64) {
        let s = self.eval_scaled(z, false);
        let mag = s.s0.norm();
        if mag == 0.0 {
            return (f64::NEG_INFINITY, 0.0);
        }
        (s.scale + mag.ln(), s.s0.arg())
    }
}
