//! Catalog of coefficient schedules `f_{k,n}`, in log-magnitude form.
//!
//! Every named family has positive real coefficients, so phases are zero and
//! only `log |f_{k,n}|` is stored. Magnitudes go through `ln Gamma`; nothing is
//! ever formed in linear scale.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fenchel::{limit_measure, sample_adaptive, LimitMeasure, PiecewiseFn, Tail};

/// Interpolation tolerance of sampled profiles at `t >= 1`; it shrinks
/// linearly towards `t = 0` down to a floor at `t = 1e-4`.
pub const PROFILE_TOL: f64 = 4e-7;

/// Largest `log r` resolved by sampled profiles of families with `R0 = inf`.
pub const PROFILE_MAX_LOG_RADIUS: f64 = 5.05;

/// Gap kept below `log R0` by sampled profiles of families with finite `R0`.
pub const PROFILE_EDGE_GAP: f64 = 1e-3;

/// Terms scanned by [`EnsembleSpec::truncation_index`] before giving up.
pub const TRUNCATION_BUDGET: usize = 20_000_000;

const LOOKAHEAD: usize = 64;

fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

/// Exact forms of the Littlewood-Offord weights `w_k`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LoVariant {
    /// `w_k = (k!)^{-alpha}`
    Factorial,
    /// `w_k = k^{-alpha k}`
    KPowerK,
    /// `w_k = 1 / Gamma(alpha k + 1)`
    Gamma,
}

impl LoVariant {
    /// `log w_k` of the unshifted weight.
    fn base(self, alpha: f64, k: usize) -> f64 {
        let kf = k as f64;
        match self {
            LoVariant::Factorial => -alpha * ln_gamma(kf + 1.0),
            LoVariant::KPowerK if k == 0 => 0.0,
            LoVariant::KPowerK => -alpha * kf * kf.ln(),
            LoVariant::Gamma => -ln_gamma(alpha * kf + 1.0),
        }
    }

    /// The `beta` for which the unshifted weight satisfies
    /// `log w_k = -alpha (k log k - k) - beta k + o(k)`.
    fn native_beta(self, alpha: f64) -> f64 {
        match self {
            LoVariant::Factorial => 0.0,
            LoVariant::KPowerK => alpha,
            LoVariant::Gamma => alpha * alpha.ln(),
        }
    }
}

/// A coefficient schedule `f_{k,n}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EnsembleSpec {
    /// `f_{k,n} = 1` for `k <= n`.
    Kac,
    /// `binom(n, k)^alpha`, degree `n`.
    Elliptic { alpha: f64 },
    /// `(n^k / k!)^alpha`, entire.
    Flat { alpha: f64 },
    /// `(n (n+1) ... (n+k-1) / k!)^alpha`, analytic in the unit disk.
    Hyperbolic { alpha: f64 },
    /// Littlewood-Offord weights `w_k` for `k <= n`, with
    /// `log w_k = -alpha (k log k - k) - beta k + o(k)` exactly.
    LoPoly {
        variant: LoVariant,
        alpha: f64,
        beta: f64,
    },
    /// The same weights for all `k`: a random entire function.
    LoEntire {
        variant: LoVariant,
        alpha: f64,
        beta: f64,
    },
    /// `exp(-sigma n^{1-alpha} k^alpha)` with `sigma = sign(alpha - 1)`.
    Theta { alpha: f64 },
    /// Three blocks of `n` coefficients with zeros near radii 1, 2 and 3.
    ThreeCircles,
    /// `f_{k,n} = exp(-n u(k/n))` for a user-supplied profile.
    Custom { u: PiecewiseFn },
}

/// Map from raw zeros to normalized zeros: `z -> factor * z`.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalingMap {
    pub factor: f64,
    pub description: String,
}

impl ScalingMap {
    pub fn identity() -> Self {
        Self {
            factor: 1.0,
            description: "identity".into(),
        }
    }
}

/// Families with closed-form Gaussian zero intensities (`alpha = 1/2`).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GaussianKind {
    Elliptic,
    Flat,
    Hyperbolic,
}

impl EnsembleSpec {
    pub fn custom(u: PiecewiseFn) -> Result<Self> {
        let spec = EnsembleSpec::Custom { u };
        spec.validate()?;
        Ok(spec)
    }

    pub fn name(&self) -> &'static str {
        match self {
            EnsembleSpec::Kac => "kac",
            EnsembleSpec::Elliptic { .. } => "elliptic",
            EnsembleSpec::Flat { .. } => "flat",
            EnsembleSpec::Hyperbolic { .. } => "hyperbolic",
            EnsembleSpec::LoPoly { .. } => "lo_poly",
            EnsembleSpec::LoEntire { .. } => "lo_entire",
            EnsembleSpec::Theta { .. } => "theta",
            EnsembleSpec::ThreeCircles => "three_circles",
            EnsembleSpec::Custom { .. } => "custom",
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |alpha: f64| {
            if alpha > 0.0 && alpha.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidInput(format!(
                    "alpha must be positive, got {alpha}"
                )))
            }
        };
        match self {
            EnsembleSpec::Kac | EnsembleSpec::ThreeCircles => Ok(()),
            EnsembleSpec::Elliptic { alpha }
            | EnsembleSpec::Flat { alpha }
            | EnsembleSpec::Hyperbolic { alpha } => positive(*alpha),
            EnsembleSpec::LoPoly { alpha, beta, .. }
            | EnsembleSpec::LoEntire { alpha, beta, .. } => {
                positive(*alpha)?;
                if beta.is_finite() {
                    Ok(())
                } else {
                    Err(Error::InvalidInput("beta must be finite".into()))
                }
            }
            EnsembleSpec::Theta { alpha } => {
                positive(*alpha)?;
                if *alpha == 1.0 {
                    return Err(Error::InvalidInput("theta needs alpha != 1".into()));
                }
                Ok(())
            }
            EnsembleSpec::Custom { u } => {
                if u.head() != Tail::Infinite || u.first_x() != 0.0 {
                    return Err(Error::InvalidInput(
                        "custom profile must start at t = 0".into(),
                    ));
                }
                Ok(())
            }
        }
    }

    /// True for families whose `G_n` is a polynomial.
    pub fn is_polynomial(&self) -> bool {
        match self {
            EnsembleSpec::Kac
            | EnsembleSpec::Elliptic { .. }
            | EnsembleSpec::LoPoly { .. }
            | EnsembleSpec::ThreeCircles => true,
            EnsembleSpec::Custom { u } => u.tail() == Tail::Infinite,
            _ => false,
        }
    }

    /// Degree of `G_n` for polynomial families.
    pub fn degree(&self, n: usize) -> Option<usize> {
        match self {
            EnsembleSpec::Kac | EnsembleSpec::Elliptic { .. } | EnsembleSpec::LoPoly { .. } => {
                Some(n)
            }
            EnsembleSpec::ThreeCircles => Some(3 * n),
            EnsembleSpec::Custom { u } if u.tail() == Tail::Infinite => {
                let d = (n as f64 * u.last_x() * (1.0 + 1e-12)).floor() as usize;
                (0..=d).rev().find(|&k| self.log_coeff(k, n).is_finite())
            }
            _ => None,
        }
    }

    /// `log |f_{k,n}|`, `-inf` for structurally zero coefficients.
    pub fn log_coeff(&self, k: usize, n: usize) -> f64 {
        let kf = k as f64;
        let nf = n as f64;
        match self {
            EnsembleSpec::Kac if k <= n => 0.0,
            EnsembleSpec::Elliptic { alpha } if k <= n => {
                alpha * (ln_gamma(nf + 1.0) - ln_gamma(kf + 1.0) - ln_gamma(nf - kf + 1.0))
            }
            EnsembleSpec::Flat { alpha } => alpha * (kf * nf.ln() - ln_gamma(kf + 1.0)),
            EnsembleSpec::Hyperbolic { alpha } => {
                alpha * (ln_gamma(nf + kf) - ln_gamma(nf) - ln_gamma(kf + 1.0))
            }
            EnsembleSpec::LoPoly {
                variant,
                alpha,
                beta,
            } if k <= n => variant.base(*alpha, k) - (beta - variant.native_beta(*alpha)) * kf,
            EnsembleSpec::LoEntire {
                variant,
                alpha,
                beta,
            } => variant.base(*alpha, k) - (beta - variant.native_beta(*alpha)) * kf,
            EnsembleSpec::Theta { alpha } => {
                let mag = nf.powf(1.0 - alpha) * kf.powf(*alpha);
                if *alpha > 1.0 {
                    -mag
                } else {
                    mag
                }
            }
            EnsembleSpec::ThreeCircles if k <= n => 0.0,
            EnsembleSpec::ThreeCircles if k <= 2 * n => (nf - kf) * 2f64.ln(),
            EnsembleSpec::ThreeCircles if k <= 3 * n => nf * 4.5f64.ln() - kf * 3f64.ln(),
            EnsembleSpec::Custom { u } => {
                let v = u.eval(kf / nf);
                if v.is_finite() {
                    -nf * v
                } else {
                    f64::NEG_INFINITY
                }
            }
            _ => f64::NEG_INFINITY,
        }
    }

    /// Coefficients of the normalized function `G_n(z / factor)`, whose
    /// zeros are the normalized zeros.
    pub fn normalized_log_coeff(&self, k: usize, n: usize) -> f64 {
        self.log_coeff(k, n) - k as f64 * self.scaling(n).factor.ln()
    }

    pub fn scaling(&self, n: usize) -> ScalingMap {
        match self {
            EnsembleSpec::LoPoly { alpha, beta, .. }
            | EnsembleSpec::LoEntire { alpha, beta, .. } => ScalingMap {
                factor: (-beta - alpha * (n as f64).ln()).exp(),
                description: format!("z -> e^(-{beta}) n^(-{alpha}) z"),
            },
            _ => ScalingMap::identity(),
        }
    }

    /// `R0` of the normalized family.
    pub fn validity_radius(&self) -> f64 {
        match self {
            EnsembleSpec::Hyperbolic { .. } => 1.0,
            EnsembleSpec::Theta { alpha } if *alpha < 1.0 => 1.0,
            EnsembleSpec::Custom { u } => match u.tail() {
                Tail::Linear(c) => c.exp(),
                Tail::Infinite => f64::INFINITY,
            },
            _ => f64::INFINITY,
        }
    }

    /// The profile `u(t) = -lim (1/n) log |f_{tn,n}|` of the normalized
    /// family, sampled on an adaptive grid.
    ///
    /// Entire families are sampled up to the `t` where `u'` reaches
    /// `min(5.05, log R0 - 1e-3)` and continued linearly with that slope.
    pub fn u_profile(&self) -> PiecewiseFn {
        let tol = |t: f64| PROFILE_TOL * t.clamp(1e-4, 1.0);
        let end_slope = if self.validity_radius().is_finite() {
            self.validity_radius().ln() - PROFILE_EDGE_GAP
        } else {
            PROFILE_MAX_LOG_RADIUS
        };
        let build = |f: &dyn Fn(f64) -> f64, t_end: f64, tail: Tail| {
            let nodes = sample_adaptive(f, &[0.0, t_end], tol, 64);
            PiecewiseFn::new(nodes, tail).expect("closed-form profile is finite")
        };
        let xlogx = |t: f64| if t > 0.0 { t * t.ln() } else { 0.0 };
        match self {
            EnsembleSpec::Kac => {
                PiecewiseFn::new(vec![(0.0, 0.0), (1.0, 0.0)], Tail::Infinite).expect("static")
            }
            EnsembleSpec::ThreeCircles => PiecewiseFn::new(
                vec![(0.0, 0.0), (1.0, 0.0), (2.0, 2f64.ln()), (3.0, 6f64.ln())],
                Tail::Infinite,
            )
            .expect("static"),
            EnsembleSpec::Elliptic { alpha } => {
                let a = *alpha;
                build(&|t| a * (xlogx(t) + xlogx(1.0 - t)), 1.0, Tail::Infinite)
            }
            EnsembleSpec::LoPoly { alpha, .. } => {
                let a = *alpha;
                build(&|t| a * (xlogx(t) - t), 1.0, Tail::Infinite)
            }
            EnsembleSpec::Flat { alpha } | EnsembleSpec::LoEntire { alpha, .. } => {
                let a = *alpha;
                let t_end = (end_slope / a).exp();
                build(&|t| a * (xlogx(t) - t), t_end, Tail::Linear(end_slope))
            }
            EnsembleSpec::Hyperbolic { alpha } => {
                let a = *alpha;
                let q = (end_slope / a).exp();
                let t_end = q / (1.0 - q);
                build(
                    &|t| a * (xlogx(t) - xlogx(1.0 + t)),
                    t_end,
                    Tail::Linear(end_slope),
                )
            }
            EnsembleSpec::Theta { alpha } => {
                let a = *alpha;
                let sigma = if a > 1.0 { 1.0 } else { -1.0 };
                let t_end = (sigma * end_slope / a).powf(1.0 / (a - 1.0));
                build(&|t| sigma * t.powf(a), t_end, Tail::Linear(end_slope))
            }
            EnsembleSpec::Custom { u } => u.clone(),
        }
    }

    /// Limit of the normalized zero measures, from the sampled profile.
    pub fn limit_measure(&self) -> Result<LimitMeasure> {
        limit_measure(&self.u_profile())
    }

    /// Smallest `K` with `sum_{k > K} |f_{k,n}| R^k < tol`, for entire
    /// families. `R` is a radius for the raw (unnormalized) series.
    ///
    /// The tail is bounded by a geometric series once the ratio of
    /// consecutive terms stays below one over a lookahead window; every
    /// named family has log-concave terms, so the ratio is then nonincreasing.
    pub fn truncation_index(&self, n: usize, r: f64, tol: f64) -> Result<usize> {
        if !(tol > 0.0) {
            return Err(Error::InvalidInput(format!(
                "tolerance must be positive, got {tol}"
            )));
        }
        self.truncation_index_log(n, r, tol.ln())
    }

    /// [`truncation_index`](Self::truncation_index) with the tolerance given
    /// as a natural logarithm.
    pub fn truncation_index_log(&self, n: usize, r: f64, log_tol: f64) -> Result<usize> {
        if self.is_polynomial() {
            return Err(Error::NotEntire(self.name().into()));
        }
        if n == 0 {
            return Err(Error::InvalidInput("n must be positive".into()));
        }
        let raw_r0 = self.validity_radius() / self.scaling(n).factor;
        if !(r >= 0.0 && r < raw_r0) {
            return Err(Error::OutOfDomain {
                radius: r,
                limit: raw_r0,
            });
        }
        let k_floor = match self {
            EnsembleSpec::Custom { u } => (n as f64 * u.last_x()).ceil() as usize,
            _ => 0,
        };
        if r == 0.0 {
            return Ok(k_floor);
        }
        let lr = r.ln();
        let term = |k: usize| self.log_coeff(k, n) + k as f64 * lr;
        // ring buffer of the next LOOKAHEAD + 1 terms
        let mut window: std::collections::VecDeque<f64> = (0..=LOOKAHEAD + 1).map(term).collect();
        let mut k = 0;
        while k < TRUNCATION_BUDGET {
            // window[j] = term(k + 1 + j - 1) = term(k + j)
            let first = window[1];
            let max_log_ratio = (1..window.len() - 1)
                .map(|j| window[j + 1] - window[j])
                .fold(f64::MIN, f64::max);
            if k >= k_floor {
                if first == f64::NEG_INFINITY {
                    return Ok(k);
                }
                if max_log_ratio < 0.0 {
                    let log_bound = first - (-(max_log_ratio.exp_m1())).ln();
                    if log_bound < log_tol {
                        return Ok(k);
                    }
                }
            }
            window.pop_front();
            window.push_back(term(k + LOOKAHEAD + 2));
            k += 1;
        }
        Err(Error::TailNotGeometric {
            budget: TRUNCATION_BUDGET,
        })
    }
}

/// `E[#zeros of F_n in D_r]` for `alpha = 1/2` with standard complex
/// Gaussian coefficients.
pub fn gaussian_expected_count(kind: GaussianKind, n: f64, r: f64) -> Result<f64> {
    let r2 = r * r;
    match kind {
        GaussianKind::Elliptic => Ok(n * r2 / (1.0 + r2)),
        GaussianKind::Flat => Ok(n * r2),
        GaussianKind::Hyperbolic if r < 1.0 => Ok(n * r2 / (1.0 - r2)),
        GaussianKind::Hyperbolic => Err(Error::OutOfDomain {
            radius: r,
            limit: 1.0,
        }),
    }
}
