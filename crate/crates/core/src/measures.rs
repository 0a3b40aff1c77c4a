//! Statistics of empirical zero measures and their comparison with limit
//! measures. All masses are divided by `n`, not by the number of zeros.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;
use serde_json::Value;

use crate::ensembles::{EnsembleSpec, ScalingMap};
use crate::error::{Error, Result};
use crate::fenchel::LimitMeasure;
use crate::polyzero::{find_zeros, AberthOptions, LogPoly, ZeroMeasure};
use crate::sampling::{sample_series, CoeffLaw, SampleStream, TRUST_FRACTION};

/// Points of the radial grid used by [`ks_radial`] and [`w1_radial`].
pub const RADIAL_GRID: usize = 2048;

/// Fewest zeros accepted by [`ks_angular`].
pub const MIN_ANGULAR_ZEROS: usize = 10;

/// Multiplies every zero by the map's factor.
pub fn normalize_zeros(zm: &ZeroMeasure, s: &ScalingMap) -> ZeroMeasure {
    zm.scaled(s.factor)
}

fn check_trust(zm: &ZeroMeasure, r: f64) -> Result<()> {
    if r > zm.trust_radius() {
        return Err(Error::OutOfDomain {
            radius: r,
            limit: zm.trust_radius(),
        });
    }
    Ok(())
}

/// `(1/n) * #{zeros with |z| < r}`, counted with multiplicity.
pub fn empirical_radial_mass(zm: &ZeroMeasure, r: f64) -> Result<f64> {
    check_trust(zm, r)?;
    Ok(zm.count_below(r) as f64 / zm.n_normalizer() as f64)
}

/// Empirical and predicted radial distribution functions on `D_R`, both
/// renormalized to probabilities.
struct RadialCdfs<'a> {
    moduli: Vec<f64>,
    inside: f64,
    mu: &'a LimitMeasure,
    mu_mass: f64,
}

impl<'a> RadialCdfs<'a> {
    fn new(zm: &ZeroMeasure, mu: &'a LimitMeasure, r_max: f64) -> Result<Self> {
        check_trust(zm, r_max)?;
        let moduli: Vec<f64> = zm
            .sorted_moduli()
            .into_iter()
            .filter(|&m| m < r_max)
            .collect();
        if moduli.is_empty() {
            return Err(Error::EmptyMass);
        }
        let mu_mass = mu.radial_mass(r_max);
        if !(mu_mass > 0.0 && mu_mass.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "limit measure has mass {mu_mass} in the disk"
            )));
        }
        let inside = moduli.len() as f64;
        Ok(Self {
            moduli,
            inside,
            mu,
            mu_mass,
        })
    }

    fn emp_open(&self, r: f64) -> f64 {
        self.moduli.partition_point(|&m| m < r) as f64 / self.inside
    }

    fn emp_closed(&self, r: f64) -> f64 {
        self.moduli.partition_point(|&m| m <= r) as f64 / self.inside
    }

    fn mu_open(&self, r: f64) -> f64 {
        self.mu.radial_mass(r) / self.mu_mass
    }
}

/// Kolmogorov-Smirnov distance between the radial distributions of `zm`
/// and `mu` on `D_R`, each renormalized to a probability.
///
/// The supremum runs over a 2048-point grid on `(0, R]`; at every atom of
/// `mu` inside the disk both one-sided gaps are checked as well.
pub fn ks_radial(zm: &ZeroMeasure, mu: &LimitMeasure, r_max: f64) -> Result<f64> {
    let cdf = RadialCdfs::new(zm, mu, r_max)?;
    let mut d: f64 = 0.0;
    for i in 1..=RADIAL_GRID {
        let r = r_max * i as f64 / RADIAL_GRID as f64;
        d = d.max((cdf.emp_open(r) - cdf.mu_open(r)).abs());
    }
    for a in mu.atoms().iter().filter(|a| a.radius < r_max) {
        d = d.max((cdf.emp_open(a.radius) - cdf.mu_open(a.radius)).abs());
        let closed = mu.radial_mass_closed(a.radius) / cdf.mu_mass;
        d = d.max((cdf.emp_closed(a.radius) - closed).abs());
    }
    Ok(d)
}

/// `integral_0^R |F_emp(r) - F_mu(r)| dr` for the renormalized radial
/// distribution functions, on the same grid as [`ks_radial`].
pub fn w1_radial(zm: &ZeroMeasure, mu: &LimitMeasure, r_max: f64) -> Result<f64> {
    let cdf = RadialCdfs::new(zm, mu, r_max)?;
    let h = r_max / RADIAL_GRID as f64;
    let total: f64 = (0..RADIAL_GRID)
        .map(|i| {
            let r = h * (i as f64 + 0.5);
            (cdf.emp_open(r) - cdf.mu_open(r)).abs()
        })
        .sum();
    Ok(total * h)
}

/// Distance of the arguments of the zeros in `r_lo <= |z| < r_hi` from the
/// uniform law, minimized over rotations: half the Kuiper statistic.
pub fn ks_angular(zm: &ZeroMeasure, annulus: (f64, f64)) -> Result<f64> {
    let (r_lo, r_hi) = annulus;
    check_trust(zm, r_hi)?;
    let mut x: Vec<f64> = zm
        .zeros()
        .iter()
        .filter(|z| {
            let m = z.z.norm();
            m >= r_lo && m < r_hi
        })
        .flat_map(|z| {
            std::iter::repeat_n(z.z.arg().rem_euclid(2.0 * PI) / (2.0 * PI), z.multiplicity)
        })
        .collect();
    if x.len() < MIN_ANGULAR_ZEROS {
        return Err(Error::TooFewZeros {
            found: x.len(),
            required: MIN_ANGULAR_ZEROS,
        });
    }
    x.sort_by(f64::total_cmp);
    let n = x.len() as f64;
    let mut d_plus: f64 = 0.0;
    let mut d_minus: f64 = 0.0;
    for (j, &xj) in x.iter().enumerate() {
        d_plus = d_plus.max((j + 1) as f64 / n - xj);
        d_minus = d_minus.max(xj - j as f64 / n);
    }
    Ok(0.5 * (d_plus + d_minus))
}

/// Two-sample Kolmogorov-Smirnov statistic.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// `p_n(z) = (1/n) log |G_n(z)|` at each point.
pub fn potential_profile(p: &LogPoly, n: usize, zs: &[Complex64]) -> Result<Vec<f64>> {
    zs.iter()
        .map(|&z| {
            if z.norm() == 0.0 || z.norm() >= p.trust_radius() {
                return Err(Error::OutOfDomain {
                    radius: z.norm(),
                    limit: p.trust_radius(),
                });
            }
            Ok(p.eval_log(z).0 / n as f64)
        })
        .collect()
}

/// Mean of `| |z e^{1-z}| - 1 |` over the zeros, with multiplicity.
pub fn szego_curve_distance(zm: &ZeroMeasure) -> f64 {
    let (mut sum, mut count) = (0.0, 0usize);
    for z in zm.zeros() {
        let v = z.z.norm() * (1.0 - z.z.re).exp();
        sum += (v - 1.0).abs() * z.multiplicity as f64;
        count += z.multiplicity;
    }
    if count == 0 {
        0.0
    } else {
        sum / count as f64
    }
}

/// Raw zero counts `N(r)` of one sampled entire function in the disks
/// `|z| < r`, for increasing `r_list`.
pub fn zero_count_lln(
    spec: &EnsembleSpec,
    law: &CoeffLaw,
    r_list: &[f64],
    seed: u64,
    tol: f64,
) -> Result<Vec<(f64, usize)>> {
    if spec.is_polynomial() {
        return Err(Error::NotEntire(spec.name().into()));
    }
    let Some(&r_max) = r_list.last() else {
        return Ok(Vec::new());
    };
    if r_list.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidInput("radii must be increasing".into()));
    }
    let n = 1;
    let factor = spec.scaling(n).factor;
    let raw = r_max / TRUST_FRACTION * (1.0 + 1e-9);
    let p = sample_series(spec, law, n, raw * factor, tol, &SampleStream::new(seed))?;
    let zm = find_zeros(
        &p,
        &AberthOptions {
            seed,
            ..Default::default()
        },
    )?;
    Ok(r_list.iter().map(|&r| (r, zm.count_below(r))).collect())
}

/// Empirical versus predicted mass of one annulus `r_lo <= |z| < r_hi`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AnnulusMass {
    pub r_lo: f64,
    pub r_hi: f64,
    pub empirical: f64,
    pub predicted: f64,
}

/// Summary of one empirical zero measure against its predicted limit.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub ks_radial: f64,
    pub w1_radial: f64,
    /// `None` when the angular annulus holds too few zeros.
    pub ks_angular: Option<f64>,
    pub angular_annulus: (f64, f64),
    pub annulus_masses: Vec<AnnulusMass>,
    pub radius: f64,
    pub n: usize,
    pub zeros_inside: usize,
    #[serde(serialize_with = "crate::serde_inf::serialize")]
    pub trust_radius: f64,
    pub seeds: Vec<u64>,
    pub tool_version: String,
    pub parameters: Value,
}

impl ComparisonReport {
    /// Pretty JSON with keys in sorted order.
    pub fn to_json(&self) -> Result<String> {
        let v = crate::sorted_json(serde_json::to_value(self)?);
        Ok(serde_json::to_string_pretty(&v)?)
    }
}

/// Compares `zm` with `mu` on `D_R`: radial KS and W1 distances, angular KS
/// on `angular`, and the masses of the given annuli.
pub fn compare(
    zm: &ZeroMeasure,
    mu: &LimitMeasure,
    radius: f64,
    angular: (f64, f64),
    annuli: &[(f64, f64)],
) -> Result<ComparisonReport> {
    let ks = ks_radial(zm, mu, radius)?;
    let w1 = w1_radial(zm, mu, radius)?;
    let ks_ang = match ks_angular(zm, angular) {
        Ok(v) => Some(v),
        Err(Error::TooFewZeros { .. }) => None,
        Err(e) => return Err(e),
    };
    let n = zm.n_normalizer() as f64;
    let annulus_masses = annuli
        .iter()
        .map(|&(r_lo, r_hi)| {
            check_trust(zm, r_hi)?;
            Ok(AnnulusMass {
                r_lo,
                r_hi,
                empirical: (zm.count_below(r_hi) - zm.count_below(r_lo)) as f64 / n,
                predicted: mu.radial_mass(r_hi) - mu.radial_mass(r_lo),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ComparisonReport {
        ks_radial: ks,
        w1_radial: w1,
        ks_angular: ks_ang,
        angular_annulus: angular,
        annulus_masses,
        radius,
        n: zm.n_normalizer(),
        zeros_inside: zm.count_below(radius),
        trust_radius: zm.trust_radius(),
        seeds: Vec::new(),
        tool_version: crate::VERSION.to_string(),
        parameters: Value::Null,
    })
}
