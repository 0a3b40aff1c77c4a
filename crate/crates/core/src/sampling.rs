//! Seeded coefficient laws and sampled series.
//!
//! Draws are addressed by `(seed, k)`: coefficient `k` comes from its own
//! ChaCha stream, so the value does not depend on which other indices were
//! drawn or in what order.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::ensembles::{EnsembleSpec, TRUNCATION_BUDGET};
use crate::error::{Error, Result};
use crate::polyzero::{LogComplex, LogPoly};

/// Fraction of the truncation radius inside which zeros are trusted.
pub const TRUST_FRACTION: f64 = 0.9;

/// Longest truncated series handed to the root finder.
pub const MAX_SERIES_TERMS: usize = 200_000;

/// Law of the i.i.d. coefficients `xi_k`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case")]
pub enum CoeffLaw {
    /// Standard complex Gaussian, density `exp(-|z|^2) / pi`.
    ComplexGaussian,
    /// `+1` or `-1` with equal probability.
    Rademacher,
    /// Uniform on the unit disk.
    UniformDisk,
    /// Positive reals with `P[log xi > t] = t^(-exponent)` for `t > 1`.
    LogPareto { exponent: f64 },
    /// Positive reals with `P[log(1 + xi) > t] = 1 / (1 + t)`.
    HeavyNoLogMoment,
}

impl CoeffLaw {
    /// Whether `E log(1 + |xi|)` is finite.
    pub fn log_moment_finite(&self) -> bool {
        match self {
            CoeffLaw::LogPareto { exponent } => *exponent > 1.0,
            CoeffLaw::HeavyNoLogMoment => false,
            _ => true,
        }
    }

    /// True when every draw is real, so zero sets are conjugation symmetric.
    pub fn is_real(&self) -> bool {
        !matches!(self, CoeffLaw::ComplexGaussian | CoeffLaw::UniformDisk)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            CoeffLaw::LogPareto { exponent } if !(*exponent > 0.0 && exponent.is_finite()) => {
                Err(Error::InvalidInput(format!(
                    "log-Pareto exponent must be positive, got {exponent}"
                )))
            }
            _ => Ok(()),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            CoeffLaw::ComplexGaussian => "complex_gaussian",
            CoeffLaw::Rademacher => "rademacher",
            CoeffLaw::UniformDisk => "uniform_disk",
            CoeffLaw::LogPareto { .. } => "log_pareto",
            CoeffLaw::HeavyNoLogMoment => "heavy_no_logmoment",
        }
    }
}

/// Index-addressable stream of draws for one seed.
#[derive(Clone, Debug)]
pub struct SampleStream {
    seed: u64,
    key: [u8; 32],
}

impl SampleStream {
    pub fn new(seed: u64) -> Self {
        let mut key = [0u8; 32];
        // spread the 64-bit seed over a full ChaCha key
        ChaCha8Rng::seed_from_u64(seed).fill(&mut key);
        Self { seed, key }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Generator dedicated to index `k`.
    pub fn rng(&self, k: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::from_seed(self.key);
        rng.set_stream(k);
        rng
    }
}

/// Open-interval uniform draw on `(0, 1)`.
fn open01(rng: &mut ChaCha8Rng) -> f64 {
    loop {
        let u: f64 = rng.random();
        if u > 0.0 {
            return u;
        }
    }
}

/// Draws `xi_k` in log-polar form.
pub fn sample_coeff_log(law: &CoeffLaw, stream: &SampleStream, k: u64) -> LogComplex {
    let mut rng = stream.rng(k);
    match *law {
        CoeffLaw::ComplexGaussian => {
            let re: f64 = rng.sample::<f64, _>(StandardNormal) * FRAC_1_SQRT_2;
            let im: f64 = rng.sample::<f64, _>(StandardNormal) * FRAC_1_SQRT_2;
            LogComplex {
                log_mag: re.hypot(im).ln(),
                phase: im.atan2(re),
            }
        }
        CoeffLaw::Rademacher => {
            let phase = if rng.random::<bool>() { 0.0 } else { PI };
            LogComplex {
                log_mag: 0.0,
                phase,
            }
        }
        CoeffLaw::UniformDisk => {
            let u = open01(&mut rng);
            let theta = 2.0 * PI * rng.random::<f64>() - PI;
            LogComplex {
                log_mag: 0.5 * u.ln(),
                phase: theta,
            }
        }
        CoeffLaw::LogPareto { exponent } => {
            // log xi = U^(-1/exponent) has the required tail
            let u = open01(&mut rng);
            LogComplex {
                log_mag: u.powf(-1.0 / exponent),
                phase: 0.0,
            }
        }
        CoeffLaw::HeavyNoLogMoment => {
            // t = log(1 + xi) with P[t > x] = 1/(1 + x); log xi = t + log(1 - e^-t)
            let u = open01(&mut rng);
            let t = 1.0 / u - 1.0;
            let log_mag = if t > 0.0 {
                t + (-(-t).exp_m1()).ln()
            } else {
                f64::NEG_INFINITY
            };
            LogComplex {
                log_mag,
                phase: 0.0,
            }
        }
    }
}

/// Draws `xi_k` as a complex number (may overflow for heavy-tailed laws).
pub fn sample_coeff(law: &CoeffLaw, stream: &SampleStream, k: u64) -> num_complex::Complex64 {
    let c = sample_coeff_log(law, stream, k);
    num_complex::Complex64::from_polar(c.log_mag.exp(), c.phase)
}

/// Samples `G_n(z) = sum_k xi_k f_{k,n} z^k`.
///
/// Polynomial families are sampled in full. Entire families are truncated
/// so the neglected tail at raw radius `R / factor` is below `tol` relative
/// to the largest term there; zeros are then trusted in the raw disk of
/// radius `0.9 R / factor`. `radius` is given in normalized coordinates.
pub fn sample_series(
    spec: &EnsembleSpec,
    law: &CoeffLaw,
    n: usize,
    radius: f64,
    tol: f64,
    stream: &SampleStream,
) -> Result<LogPoly> {
    spec.validate()?;
    law.validate()?;
    if n == 0 {
        return Err(Error::InvalidInput("n must be positive".into()));
    }
    let (degree, trust) = match spec.degree(n) {
        Some(d) => (d, f64::INFINITY),
        None => {
            if !(tol > 0.0 && tol < 1.0) {
                return Err(Error::InvalidInput(format!(
                    "tolerance must be in (0, 1), got {tol}"
                )));
            }
            let raw_r = radius / spec.scaling(n).factor;
            let raw_r0 = spec.validity_radius() / spec.scaling(n).factor;
            if !(raw_r >= 0.0 && raw_r < raw_r0) {
                return Err(Error::OutOfDomain {
                    radius: raw_r,
                    limit: raw_r0,
                });
            }
            let peak = peak_log_term(spec, n, raw_r)?;
            let k = spec.truncation_index_log(n, raw_r, tol.ln() + peak)?;
            if k > MAX_SERIES_TERMS {
                return Err(Error::SeriesTooLong {
                    terms: k,
                    limit: MAX_SERIES_TERMS,
                });
            }
            (k, TRUST_FRACTION * raw_r)
        }
    };
    let coeffs = (0..=degree)
        .map(|k| {
            let f = spec.log_coeff(k, n);
            if f == f64::NEG_INFINITY {
                return LogComplex::ZERO;
            }
            let xi = sample_coeff_log(law, stream, k as u64);
            LogComplex {
                log_mag: xi.log_mag + f,
                phase: xi.phase,
            }
        })
        .collect();
    LogPoly::new(coeffs, trust)
}

/// The series with every `xi_k = 1` (e.g. the partial sums of `exp`).
pub fn deterministic_poly(spec: &EnsembleSpec, n: usize) -> Result<LogPoly> {
    let degree = spec.degree(n).ok_or_else(|| {
        Error::InvalidInput(format!("{} is not a polynomial family", spec.name()))
    })?;
    let coeffs = (0..=degree)
        .map(|k| LogComplex {
            log_mag: spec.log_coeff(k, n),
            phase: 0.0,
        })
        .collect();
    LogPoly::new(coeffs, f64::INFINITY)
}

/// `max_k log (f_{k,n} r^k)`, scanning until terms have clearly peaked.
fn peak_log_term(spec: &EnsembleSpec, n: usize, r: f64) -> Result<f64> {
    let lr = r.ln();
    let mut best = f64::NEG_INFINITY;
    let mut since_best = 0usize;
    let mut k = 0usize;
    while since_best < 64 + k / 8 {
        if k >= TRUNCATION_BUDGET {
            return Err(Error::TailNotGeometric {
                budget: TRUNCATION_BUDGET,
            });
        }
        let t = spec.log_coeff(k, n) + k as f64 * lr;
        if t > best {
            best = t;
            since_best = 0;
        } else {
            since_best += 1;
        }
        k += 1;
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn draws_are_order_independent() {
        let s = SampleStream::new(99);
        let law = CoeffLaw::ComplexGaussian;
        let forward: Vec<_> = (0..50).map(|k| sample_coeff_log(&law, &s, k)).collect();
        let backward: Vec<_> = (0..50)
            .rev()
            .map(|k| sample_coeff_log(&law, &s, k))
            .collect();
        for (a, b) in forward.iter().zip(backward.iter().rev()) {
            assert_eq!(a, b);
        }
        assert_ne!(
            forward[0],
            sample_coeff_log(&law, &SampleStream::new(100), 0)
        );
    }

    #[test]
    fn rademacher_is_symmetric_sign() {
        let s = SampleStream::new(1);
        let law = CoeffLaw::Rademacher;
        let draws: Vec<_> = (0..100_000).map(|k| sample_coeff(&law, &s, k)).collect();
        assert!(draws
            .iter()
            .all(|z| (z.re.abs() - 1.0).abs() < 1e-15 && z.im.abs() < 1e-15));
        let mean: f64 = draws.iter().map(|z| z.re).sum::<f64>() / draws.len() as f64;
        assert!(mean.abs() < 0.02, "{mean}");
    }

    #[test]
    fn gaussian_second_moment() {
        let s = SampleStream::new(2);
        let law = CoeffLaw::ComplexGaussian;
        let m2: f64 = (0..100_000)
            .map(|k| sample_coeff(&law, &s, k).norm_sqr())
            .sum::<f64>()
            / 1e5;
        assert_relative_eq!(m2, 1.0, max_relative = 0.02);
    }

    #[test]
    fn log_pareto_tail() {
        let s = SampleStream::new(3);
        let law = CoeffLaw::LogPareto { exponent: 4.0 };
        let n = 1_000_000u64;
        let hits = (0..n)
            .filter(|&k| sample_coeff_log(&law, &s, k).log_mag > 2.0)
            .count();
        let p = 2f64.powi(-4);
        let sigma = (p * (1.0 - p) / n as f64).sqrt();
        let frac = hits as f64 / n as f64;
        assert!((frac - p).abs() <= 3.0 * sigma, "{frac} vs {p}");
    }

    #[test]
    fn heavy_law_tail() {
        let s = SampleStream::new(4);
        let law = CoeffLaw::HeavyNoLogMoment;
        let n = 200_000u64;
        // P[log(1 + xi) > 3] = 1/4
        let hits = (0..n)
            .filter(|&k| {
                let l = sample_coeff_log(&law, &s, k).log_mag;
                l.exp().ln_1p() > 3.0 || l > 30.0
            })
            .count();
        assert_relative_eq!(hits as f64 / n as f64, 0.25, epsilon = 0.005);
        assert!(!law.log_moment_finite());
    }

    #[test]
    fn uniform_disk_radius() {
        let s = SampleStream::new(5);
        let law = CoeffLaw::UniformDisk;
        let inside = (0..100_000)
            .filter(|&k| sample_coeff(&law, &s, k).norm() < 0.5)
            .count();
        assert_relative_eq!(inside as f64 / 1e5, 0.25, epsilon = 0.01);
    }

    #[test]
    fn kac_rademacher_small() {
        let p = sample_series(
            &EnsembleSpec::Kac,
            &CoeffLaw::Rademacher,
            3,
            1.0,
            1e-12,
            &SampleStream::new(7),
        )
        .unwrap();
        assert_eq!(p.degree(), 3);
        for c in p.coeffs() {
            assert_eq!(c.log_mag, 0.0);
            assert!(c.phase == 0.0 || c.phase == PI);
        }
    }

    #[test]
    fn entire_series_truncated_and_trusted() {
        let spec = EnsembleSpec::Flat { alpha: 0.5 };
        let p = sample_series(
            &spec,
            &CoeffLaw::ComplexGaussian,
            200,
            3.0,
            1e-14,
            &SampleStream::new(1),
        )
        .unwrap();
        assert!(p.degree() > 1800, "{}", p.degree());
        assert!(p.coeffs().iter().all(|c| c.log_mag.is_finite()));
        assert_relative_eq!(p.trust_radius(), 2.7, max_relative = 1e-12);
    }

    #[test]
    fn sampling_is_reproducible() {
        let spec = EnsembleSpec::Elliptic { alpha: 0.5 };
        let a = sample_series(
            &spec,
            &CoeffLaw::UniformDisk,
            40,
            1.0,
            1e-12,
            &SampleStream::new(8),
        )
        .unwrap();
        let b = sample_series(
            &spec,
            &CoeffLaw::UniformDisk,
            40,
            1.0,
            1e-12,
            &SampleStream::new(8),
        )
        .unwrap();
        assert_eq!(a, b);
    }
}
