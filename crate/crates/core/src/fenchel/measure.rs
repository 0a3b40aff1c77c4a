use serde::{Deserialize, Serialize};

use super::{conjugate, conjugate_on, fenchel_transform, left_derivative, sample_adaptive};
use super::{PiecewiseFn, Tail};
use crate::ensembles::EnsembleSpec;
use crate::error::{Error, Result};

/// Half-width in `s = log r` of the central difference used for densities.
pub const DENSITY_STEP: f64 = 5e-3;

/// Smallest power-law exponent of `mu(D_r)` near zero accepted by
/// [`construct_ensemble`].
pub const MIN_EXPONENT: f64 = 0.05;

/// Largest `s`-step of the integration grid in [`construct_ensemble`].
const CONSTRUCT_DS: f64 = 2e-3;

/// A circle of radius `radius` carrying mass `mass`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub radius: f64,
    pub mass: f64,
}

/// A rotationally invariant measure on the plane, described by its radial
/// mass function `r -> mu(D_r)`.
///
/// The absolutely continuous part is stored as a function of `s = log r`;
/// circle atoms are kept separately so the radial mass is exactly
/// left-continuous at their radii.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LimitMeasure {
    radial_mass: PiecewiseFn,
    atoms: Vec<Atom>,
    #[serde(rename = "R0", with = "crate::serde_inf")]
    r0: f64,
}

impl LimitMeasure {
    pub fn new(radial_mass: PiecewiseFn, mut atoms: Vec<Atom>, r0: f64) -> Result<Self> {
        if !(r0 > 0.0) {
            return Err(Error::InvalidInput(format!(
                "R0 must be positive, got {r0}"
            )));
        }
        let vs = radial_mass.values();
        for w in vs.windows(2) {
            if w[1] < w[0] - 1e-12 * w[0].abs().max(1.0) {
                return Err(Error::InvalidInput(
                    "radial mass must be nondecreasing".into(),
                ));
            }
        }
        if vs[0] < -1e-12 {
            return Err(Error::InvalidInput(
                "radial mass must be nonnegative".into(),
            ));
        }
        let slopes_ok = [radial_mass.head(), radial_mass.tail()]
            .iter()
            .all(|t| t.slope().is_none_or(|s| s >= 0.0));
        if !slopes_ok {
            return Err(Error::InvalidInput(
                "radial mass tails must be nondecreasing".into(),
            ));
        }
        for a in &atoms {
            if !(a.radius > 0.0 && a.radius.is_finite() && a.mass > 0.0 && a.mass.is_finite()) {
                return Err(Error::InvalidInput(format!("invalid atom {a:?}")));
            }
        }
        atoms.sort_by(|a, b| a.radius.total_cmp(&b.radius));
        Ok(Self {
            radial_mass,
            atoms,
            r0,
        })
    }

    /// Uniform probability measure on the unit disk: `mu(D_r) = min(r^2, 1)`.
    pub fn uniform_disk() -> Self {
        Self::from_radial_fn(|r| r * r, 1e-13, 1.0, 1e-9)
            .expect("closed form is valid")
            .with_tail_constant()
    }

    /// Point masses on circles, given as `(radius, mass)` pairs.
    pub fn circles(atoms: &[(f64, f64)]) -> Result<Self> {
        let s0 = atoms.iter().map(|a| a.0.ln()).fold(0.0, f64::min) - 1.0;
        let zero = PiecewiseFn::with_head(vec![(s0, 0.0)], Tail::Linear(0.0), Tail::Linear(0.0))?;
        let atoms = atoms
            .iter()
            .map(|&(radius, mass)| Atom { radius, mass })
            .collect();
        Self::new(zero, atoms, f64::INFINITY)
    }

    /// Samples a continuous radial mass function `m(r)` on `[r_lo, r_hi]`
    /// (uniformly in `log r`, adaptively to absolute accuracy `tol`). The
    /// result is `+inf` beyond `r_hi`, which becomes `R0`.
    pub fn from_radial_fn(m: impl Fn(f64) -> f64, r_lo: f64, r_hi: f64, tol: f64) -> Result<Self> {
        if !(r_lo > 0.0 && r_hi > r_lo) {
            return Err(Error::InvalidInput("need 0 < r_lo < r_hi".into()));
        }
        let nodes = sample_adaptive(|s| m(s.exp()), &[r_lo.ln(), r_hi.ln()], |_| tol, 64);
        let c = PiecewiseFn::with_head(nodes, Tail::Linear(0.0), Tail::Infinite)?;
        Self::new(c, Vec::new(), r_hi)
    }

    /// Replaces an infinite tail by a constant one, so no mass lies beyond
    /// the sampled range and `R0 = +inf`.
    pub fn with_tail_constant(self) -> Self {
        let c = &self.radial_mass;
        let c = PiecewiseFn::with_head(c.nodes().collect(), c.head(), Tail::Linear(0.0))
            .expect("nodes already validated");
        Self {
            radial_mass: c,
            atoms: self.atoms,
            r0: f64::INFINITY,
        }
    }

    /// Continuous part of the radial mass as a function of `s = log r`.
    pub fn continuous_part(&self) -> &PiecewiseFn {
        &self.radial_mass
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn r0(&self) -> f64 {
        self.r0
    }

    /// Atom mass on circles of radius strictly less than `r`.
    pub fn atom_mass_below(&self, r: f64) -> f64 {
        self.atoms
            .iter()
            .take_while(|a| a.radius < r)
            .map(|a| a.mass)
            .sum()
    }

    /// `mu(D_r)`, left-continuous in `r`; `+inf` beyond `R0`.
    pub fn radial_mass(&self, r: f64) -> f64 {
        if r <= 0.0 {
            return 0.0;
        }
        if r > self.r0 {
            return f64::INFINITY;
        }
        self.radial_mass.eval(r.ln()).max(0.0) + self.atom_mass_below(r)
    }

    /// `mu(D_r)` including any atom at radius exactly `r`.
    pub fn radial_mass_closed(&self, r: f64) -> f64 {
        self.radial_mass(r)
            + self
                .atoms
                .iter()
                .filter(|a| a.radius == r)
                .map(|a| a.mass)
                .sum::<f64>()
    }

    /// `lim_{r -> R0} mu(D_r)`; `+inf` if the mass is unbounded.
    pub fn total_mass(&self) -> f64 {
        let atoms: f64 = self.atoms.iter().map(|a| a.mass).sum();
        match self.radial_mass.tail() {
            Tail::Linear(s) if s == 0.0 && self.r0.is_infinite() => {
                self.radial_mass.values()[self.radial_mass.len() - 1] + atoms
            }
            _ => f64::INFINITY,
        }
    }

    /// Density of the measure at modulus `r`: `I''(log r) / (2 pi r^2)`.
    pub fn density(&self, r: f64) -> Result<f64> {
        if !(r > 0.0) {
            return Err(Error::InvalidInput(format!(
                "modulus must be positive, got {r}"
            )));
        }
        let s = r.ln();
        let h = DENSITY_STEP;
        let end = self.radial_mass.domain_end().min(self.r0.ln());
        if s + h > end {
            return Err(Error::OutOfDomain {
                radius: r,
                limit: end.exp(),
            });
        }
        let near = self.atoms.iter().any(|a| (a.radius.ln() - s).abs() <= h);
        if near {
            return Err(Error::AtomRadius { radius: r });
        }
        let d = (self.radial_mass.eval(s + h) - self.radial_mass.eval(s - h)) / (2.0 * h);
        Ok(d.max(0.0) / (2.0 * std::f64::consts::PI * r * r))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let raw: LimitMeasure = serde_json::from_str(s)?;
        Self::new(raw.radial_mass, raw.atoms, raw.r0)
    }
}

/// The limit measure of a coefficient profile: `mu(D_r) = I'(log r)` with
/// `I` the conjugate of `u`. Jumps of `I'` become circle atoms.
///
/// `R0` is where `I` becomes infinite; for profiles sampled up to a finite
/// slope this is the horizon of the sampled grid.
pub fn limit_measure(u: &PiecewiseFn) -> Result<LimitMeasure> {
    let i_fn = fenchel_transform(u)?;
    let r0 = i_fn.domain_end().exp();
    let (c, jumps) = left_derivative(&i_fn)?.into_parts();
    let atoms = jumps
        .into_iter()
        .map(|(s, mass)| Atom {
            radius: s.exp(),
            mass,
        })
        .collect();
    LimitMeasure::new(c, atoms, r0)
}

/// Density `rho(|z|)` of the limit measure of `u` at modulus `z_mod`.
pub fn limit_density(u: &PiecewiseFn, z_mod: f64) -> Result<f64> {
    limit_measure(u)?.density(z_mod)
}

/// Builds the custom ensemble `f_{k,n} = exp(-n u(k/n))` whose zeros
/// converge to `mu`, with `u` the conjugate of
/// `I(s) = integral_{-inf}^{s} mu(D_{e^r}) dr`.
///
/// The integral below the first `s` with positive mass is taken from a
/// power-law fit over the lowest decade of radii.
pub fn construct_ensemble(mu: &LimitMeasure, n: usize) -> Result<EnsembleSpec> {
    EnsembleSpec::custom(construct_profile(mu, n)?)
}

/// The profile `u` used by [`construct_ensemble`], sampled at `t = k/n`.
pub fn construct_profile(mu: &LimitMeasure, n: usize) -> Result<PiecewiseFn> {
    if n == 0 {
        return Err(Error::InvalidInput("n must be positive".into()));
    }
    let c = mu.continuous_part();
    let log_r0 = mu.r0().ln();
    if let Some(a) = mu.atoms().iter().find(|a| a.radius >= mu.r0()) {
        return Err(Error::MassBeyondR0 {
            mass: a.mass,
            r0: mu.r0(),
        });
    }
    if mu.r0().is_finite() {
        let at_r0 = c.eval(log_r0);
        let beyond = c
            .nodes()
            .filter(|&(s, _)| s > log_r0)
            .map(|(_, v)| v)
            .fold(at_r0, f64::max);
        if beyond > at_r0 + 1e-12 || (c.tail().slope().is_some_and(|s| s > 0.0)) {
            return Err(Error::MassBeyondR0 {
                mass: beyond - at_r0,
                r0: mu.r0(),
            });
        }
    }

    // where the mass starts
    let first_pos = c.nodes().position(|(_, v)| v > 0.0);
    let first_atom = mu.atoms().first().map(|a| a.radius.ln());
    let (s_min, c_min) = match first_pos {
        Some(0) => (c.first_x(), c.values()[0]),
        Some(i) => (c.xs()[i - 1], 0.0),
        None => match first_atom {
            Some(s) => (s, 0.0),
            None => match c.tail().slope() {
                Some(_) => return Err(Error::InvalidInput("measure has no mass".into())),
                None => (c.last_x(), 0.0),
            },
        },
    };
    let s_min = first_atom.map_or(s_min, |a| a.min(s_min));
    let c_min = if s_min < c.first_x() { 0.0 } else { c_min };
    let lower = if c_min > 0.0 {
        let s_hi = s_min + std::f64::consts::LN_10;
        let hi = c.eval(s_hi.min(c.domain_end()));
        let span = s_hi.min(c.domain_end()) - s_min;
        let exponent = if hi > c_min && span > 0.0 {
            (hi / c_min).ln() / span
        } else {
            0.0
        };
        if exponent < MIN_EXPONENT {
            return Err(Error::IntegrabilityViolated { exponent });
        }
        c_min / exponent
    } else {
        0.0
    };

    // integration grid: nodes of the continuous part, atoms, and the R0 edge
    let s_top = if mu.r0().is_finite() {
        log_r0.min(c.domain_end())
    } else {
        c.domain_end()
    };
    let mut knots: Vec<f64> = c
        .xs()
        .iter()
        .copied()
        .filter(|&s| s >= s_min && s <= s_top)
        .collect();
    knots.extend(mu.atoms().iter().map(|a| a.radius.ln()));
    knots.push(s_min);
    if s_top.is_finite() {
        knots.push(s_top);
    }
    knots.sort_by(f64::total_cmp);
    knots.dedup();
    let mut grid = Vec::with_capacity(knots.len());
    for w in knots.windows(2) {
        let steps = ((w[1] - w[0]) / CONSTRUCT_DS).ceil().max(1.0) as usize;
        for k in 0..steps {
            grid.push(w[0] + (w[1] - w[0]) * k as f64 / steps as f64);
        }
    }
    grid.push(*knots.last().expect("grid contains s_min"));
    if s_top.is_infinite() {
        // one step past the last knot so the linear tail starts beyond all mass
        grid.push(grid[grid.len() - 1] + 1.0);
    }

    let atom_s: Vec<(f64, f64)> = mu.atoms().iter().map(|a| (a.radius.ln(), a.mass)).collect();
    let atoms_upto = |s: f64| atom_s.iter().filter(|a| a.0 <= s).map(|a| a.1).sum::<f64>();
    let mut nodes = Vec::with_capacity(grid.len());
    let mut value = lower;
    nodes.push((grid[0], value));
    for w in grid.windows(2) {
        let ds = w[1] - w[0];
        let cont = 0.5 * (c.eval(w[0]).max(0.0) + c.eval(w[1]).max(0.0)) * ds;
        value += cont + atoms_upto(w[0]) * ds;
        nodes.push((w[1], value));
    }
    let last = grid[grid.len() - 1];
    let i_tail = if s_top.is_finite() {
        Tail::Infinite
    } else {
        Tail::Linear(c.eval(last) + atoms_upto(last))
    };
    let i_fn = PiecewiseFn::with_head(nodes, Tail::Linear(0.0), i_tail)?;

    let u_exact = conjugate(&i_fn)?;
    let t_end = u_exact.last_x();
    let k_max = (n as f64 * t_end).floor() as usize;
    let mut ts: Vec<f64> = (0..=k_max).map(|k| k as f64 / n as f64).collect();
    if t_end > ts[ts.len() - 1] {
        ts.push(t_end);
    }
    conjugate_on(&i_fn, &ts)
}
