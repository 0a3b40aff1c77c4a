//! Convex-analysis engine: piecewise-linear functions on a half-line, their
//! Legendre-Fenchel conjugates, convex minorants and left derivatives.
//!
//! All conjugates here are exact for piecewise-linear input: the supremum of
//! `p x - g(x)` over a linear piece is attained at one of its endpoints, so
//! only the vertices of the lower convex hull matter.

mod measure;
mod piecewise;

pub use measure::{
    construct_ensemble, limit_density, limit_measure, Atom, LimitMeasure, DENSITY_STEP,
};
pub use piecewise::{PiecewiseFn, Tail};

use crate::error::{Error, Result};
use piecewise::cross;

/// Relative tolerance used when deciding convexity.
pub const CONVEXITY_TOL: f64 = 1e-10;

/// Near-collinear hull vertices closer than this (relative) are dropped.
const HULL_EPS: f64 = 1e-13;

/// Minimum jump of `I'` reported as an atom.
pub const ATOM_MIN_MASS: f64 = 1e-6;

/// A jump is an atom when it exceeds this multiple of the neighbouring mass.
pub const ATOM_DOMINANCE: f64 = 10.0;

/// Half-width (in `s = log r`) of the neighbourhood compared against a jump.
pub const ATOM_WINDOW: f64 = 0.01;

/// Lower convex hull of a piecewise-linear function together with the slopes
/// of its linear extensions (`None` where the function is `+inf`).
#[derive(Clone, Debug)]
pub(crate) struct Hull {
    xs: Vec<f64>,
    ys: Vec<f64>,
    slopes: Vec<f64>,
    head: Option<f64>,
    tail: Option<f64>,
}

impl Hull {
    pub(crate) fn of(f: &PiecewiseFn) -> Result<Self> {
        let head = f.head().slope();
        let tail = f.tail().slope();
        if let (Some(a), Some(b)) = (head, tail) {
            if a > b {
                return Err(Error::InvalidInput(format!(
                    "head slope {a} exceeds tail slope {b}: function is unbounded below"
                )));
            }
        }
        let mut h: Vec<(f64, f64)> = Vec::with_capacity(f.len());
        for p in f.nodes() {
            while h.len() >= 2 {
                let a = h[h.len() - 2];
                let b = h[h.len() - 1];
                let scale = ((b.0 - a.0) * (p.1 - a.1)).abs() + ((b.1 - a.1) * (p.0 - a.0)).abs();
                if cross(a, b, p) <= HULL_EPS * scale {
                    h.pop();
                } else {
                    break;
                }
            }
            h.push(p);
        }
        if let Some(b) = tail {
            while h.len() >= 2 && slope(h[h.len() - 2], h[h.len() - 1]) > b {
                h.pop();
            }
        }
        if let Some(a) = head {
            let mut start = 0;
            while h.len() - start >= 2 && slope(h[start], h[start + 1]) < a {
                start += 1;
            }
            h.drain(..start);
        }
        let slopes = h.windows(2).map(|w| slope(w[0], w[1])).collect();
        let (xs, ys) = h.into_iter().unzip();
        Ok(Self {
            xs,
            ys,
            slopes,
            head,
            tail,
        })
    }

    /// Index of the hull vertex maximizing `p x - y`.
    fn argmax(&self, p: f64) -> usize {
        self.slopes.partition_point(|&m| m < p)
    }

    pub(crate) fn conjugate_at(&self, p: f64) -> f64 {
        if self.head.is_some_and(|a| p < a) || self.tail.is_some_and(|b| p > b) {
            return f64::INFINITY;
        }
        let j = self.argmax(p);
        p * self.xs[j] - self.ys[j]
    }

    /// The hull evaluated at `x`, continued by the head and tail slopes.
    fn eval(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if x < self.xs[0] {
            return match self.head {
                Some(a) => self.ys[0] + a * (x - self.xs[0]),
                None => f64::INFINITY,
            };
        }
        if x > self.xs[n - 1] {
            return match self.tail {
                Some(b) => self.ys[n - 1] + b * (x - self.xs[n - 1]),
                None => f64::INFINITY,
            };
        }
        let i = self.xs.partition_point(|&t| t <= x);
        if i == 0 || i == n {
            return self.ys[i.saturating_sub(1)];
        }
        let w = (x - self.xs[i - 1]) / (self.xs[i] - self.xs[i - 1]);
        self.ys[i - 1] + w * (self.ys[i] - self.ys[i - 1])
    }

    fn conjugate(&self) -> PiecewiseFn {
        let last = self.xs.len() - 1;
        let mut nodes: Vec<(f64, f64)> = Vec::with_capacity(self.slopes.len() + 2);
        let mut push = |p: f64, v: f64| {
            if nodes.last().is_none_or(|&(q, _)| p > q) {
                nodes.push((p, v));
            }
        };
        if let Some(a) = self.head {
            push(a, a * self.xs[0] - self.ys[0]);
        }
        for (k, &m) in self.slopes.iter().enumerate() {
            let inside = self.head.is_none_or(|a| m > a) && self.tail.is_none_or(|b| m < b);
            if inside {
                push(m, m * self.xs[k] - self.ys[k]);
            }
        }
        if let Some(b) = self.tail {
            push(b, b * self.xs[last] - self.ys[last]);
        }
        if nodes.is_empty() {
            nodes.push((0.0, -self.ys[0]));
        }
        let head = match self.head {
            Some(_) => Tail::Infinite,
            None => Tail::Linear(self.xs[0]),
        };
        let tail = match self.tail {
            Some(_) => Tail::Infinite,
            None => Tail::Linear(self.xs[last]),
        };
        PiecewiseFn::with_head(nodes, head, tail).expect("conjugate nodes are finite and sorted")
    }
}

fn slope(a: (f64, f64), b: (f64, f64)) -> f64 {
    (b.1 - a.1) / (b.0 - a.0)
}

/// Convex conjugate `g*(p) = sup_x (p x - g(x))`, represented exactly on the
/// slopes of the lower hull of `g`.
pub fn conjugate(g: &PiecewiseFn) -> Result<PiecewiseFn> {
    Ok(Hull::of(g)?.conjugate())
}

/// Convex conjugate evaluated exactly at the given increasing points and
/// interpolated linearly between them. Points where the conjugate is `+inf`
/// are dropped.
pub fn conjugate_on(g: &PiecewiseFn, ps: &[f64]) -> Result<PiecewiseFn> {
    let hull = Hull::of(g)?;
    let kept: Vec<(f64, f64)> = ps
        .iter()
        .map(|&p| (p, hull.conjugate_at(p)))
        .filter(|(_, v)| v.is_finite())
        .collect();
    let (Some(&(p0, _)), Some(&(p1, _))) = (kept.first(), kept.last()) else {
        return Err(Error::InvalidInput(
            "conjugate is +inf on every requested point".into(),
        ));
    };
    let head = match hull.head {
        Some(_) => Tail::Infinite,
        None => Tail::Linear(hull.xs[hull.argmax(p0)]),
    };
    let tail = match hull.tail {
        Some(_) => Tail::Infinite,
        None => Tail::Linear(hull.xs[hull.argmax(p1)]),
    };
    PiecewiseFn::with_head(kept, head, tail)
}

fn check_profile(u: &PiecewiseFn) -> Result<()> {
    if u.head() != Tail::Infinite || u.first_x() != 0.0 {
        return Err(Error::InvalidInput(
            "a u-profile must start at t = 0 and be +inf for t < 0".into(),
        ));
    }
    Ok(())
}

/// `I(s) = sup_{t >= 0} (s t - u(t))` on the auto-chosen grid of hull slopes.
///
/// `I` is `+inf` beyond the slope of a linear `u` tail, so the tail slope `c`
/// of `u` sets `R0 = e^c`.
pub fn fenchel_transform(u: &PiecewiseFn) -> Result<PiecewiseFn> {
    check_profile(u)?;
    conjugate(u)
}

/// [`fenchel_transform`] evaluated on a caller-supplied `s`-grid.
pub fn fenchel_transform_on(u: &PiecewiseFn, s_grid: &[f64]) -> Result<PiecewiseFn> {
    check_profile(u)?;
    conjugate_on(u, s_grid)
}

/// Greatest convex minorant, evaluated on the original nodes.
pub fn convex_hull(u: &PiecewiseFn) -> Result<PiecewiseFn> {
    let hull = Hull::of(u)?;
    let vs = u.xs().iter().map(|&x| hull.eval(x)).collect();
    PiecewiseFn::from_parts(u.xs().to_vec(), vs, u.head(), u.tail())
}

/// Left derivative of a convex piecewise-linear function, split into an
/// absolutely continuous part and explicit jumps.
#[derive(Clone, Debug)]
pub struct LeftDerivative {
    continuous: PiecewiseFn,
    jumps: Vec<(f64, f64)>,
    cumulative: Vec<f64>,
}

impl LeftDerivative {
    pub fn continuous(&self) -> &PiecewiseFn {
        &self.continuous
    }

    /// `(position, size)` of every jump classified as an atom.
    pub fn jumps(&self) -> &[(f64, f64)] {
        &self.jumps
    }

    /// Jump mass strictly left of `s`.
    pub fn jump_mass_below(&self, s: f64) -> f64 {
        let k = self.jumps.partition_point(|&(x, _)| x < s);
        if k == 0 {
            0.0
        } else {
            self.cumulative[k - 1]
        }
    }

    /// Left-continuous value of `I'` at `s`.
    pub fn eval(&self, s: f64) -> f64 {
        self.continuous.eval(s) + self.jump_mass_below(s)
    }

    pub fn domain_end(&self) -> f64 {
        self.continuous.domain_end()
    }

    fn into_parts(self) -> (PiecewiseFn, Vec<(f64, f64)>) {
        (self.continuous, self.jumps)
    }
}

/// Computes `I'` for a convex `I`.
///
/// Every kink of a piecewise-linear `I` is a jump of `I'`. A kink counts as an
/// atom when its jump is at least [`ATOM_MIN_MASS`] and more than
/// [`ATOM_DOMINANCE`] times the total jump of the other kinks within
/// [`ATOM_WINDOW`] on either side. The remaining kinks are a discretization of
/// a continuous increase and are smoothed through the jump midpoints.
pub fn left_derivative(i_fn: &PiecewiseFn) -> Result<LeftDerivative> {
    i_fn.check_convex(CONVEXITY_TOL)?;
    let n = i_fn.len();
    let xs = i_fn.xs();
    let seg: Vec<f64> = (0..n.saturating_sub(1))
        .map(|i| i_fn.segment_slope(i))
        .collect();

    // (position, left slope, right slope) at each kink
    let mut kinks: Vec<(f64, f64, f64)> = Vec::with_capacity(n);
    for j in 0..n {
        let right = if j + 1 < n {
            Some(seg[j])
        } else {
            i_fn.tail().slope()
        };
        let left = if j > 0 {
            Some(seg[j - 1])
        } else {
            i_fn.head().slope()
        };
        let (l, r) = match (left, right) {
            (Some(l), Some(r)) => (l, r.max(l)),
            (Some(l), None) => (l, l),
            (None, Some(r)) => (r, r),
            (None, None) => (0.0, 0.0),
        };
        match kinks.last_mut() {
            Some(last) if xs[j] - last.0 <= 1e-9 * (1.0 + xs[j].abs()) => last.2 = r,
            _ => kinks.push((xs[j], l, r)),
        }
    }

    let pos: Vec<f64> = kinks.iter().map(|k| k.0).collect();
    let size: Vec<f64> = kinks.iter().map(|k| k.2 - k.1).collect();
    let mut prefix = vec![0.0; size.len() + 1];
    for (i, d) in size.iter().enumerate() {
        prefix[i + 1] = prefix[i] + d;
    }
    let is_atom: Vec<bool> = (0..kinks.len())
        .map(|j| {
            let d = size[j];
            if d < ATOM_MIN_MASS {
                return false;
            }
            let lo = pos.partition_point(|&x| x < pos[j] - ATOM_WINDOW);
            let hi = pos.partition_point(|&x| x <= pos[j] + ATOM_WINDOW);
            let left = prefix[j] - prefix[lo];
            let right = prefix[hi] - prefix[j + 1];
            d > ATOM_DOMINANCE * left.max(right)
        })
        .collect();

    let mut nodes = Vec::with_capacity(kinks.len());
    let mut jumps = Vec::new();
    let mut cumulative = Vec::new();
    let mut atoms_below = 0.0;
    for (j, &(x, l, r)) in kinks.iter().enumerate() {
        if is_atom[j] {
            nodes.push((x, l - atoms_below));
            atoms_below += r - l;
            jumps.push((x, r - l));
            cumulative.push(atoms_below);
        } else {
            let v = if j + 1 == kinks.len() && i_fn.tail().slope().is_some() {
                r
            } else if j == 0 && i_fn.head().slope().is_some() {
                l
            } else {
                0.5 * (l + r)
            };
            nodes.push((x, v - atoms_below));
        }
    }
    let head = match i_fn.head() {
        Tail::Infinite => Tail::Infinite,
        Tail::Linear(_) => Tail::Linear(0.0),
    };
    let tail = match i_fn.tail() {
        Tail::Infinite => Tail::Infinite,
        Tail::Linear(_) => Tail::Linear(0.0),
    };
    let continuous = PiecewiseFn::with_head(nodes, head, tail)?;
    Ok(LeftDerivative {
        continuous,
        jumps,
        cumulative,
    })
}

/// Samples a function on `[a, b]` so that linear interpolation deviates from
/// it by at most `tol(x)` at every segment midpoint. `breaks` are always kept
/// as nodes.
pub fn sample_adaptive(
    f: impl Fn(f64) -> f64,
    breaks: &[f64],
    tol: impl Fn(f64) -> f64,
    seed_panels: usize,
) -> Vec<(f64, f64)> {
    let mut out: Vec<(f64, f64)> = Vec::new();
    for w in breaks.windows(2) {
        let (a, b) = (w[0], w[1]);
        let panels = seed_panels.max(1);
        for p in 0..panels {
            let x0 = a + (b - a) * p as f64 / panels as f64;
            let x1 = if p + 1 == panels {
                b
            } else {
                a + (b - a) * (p + 1) as f64 / panels as f64
            };
            let (f0, f1) = (f(x0), f(x1));
            if out.is_empty() {
                out.push((x0, f0));
            }
            let mut stack = vec![(x1, f1)];
            let mut left = (x0, f0);
            while let Some(&(xr, fr)) = stack.last() {
                let xm = 0.5 * (left.0 + xr);
                let fm = f(xm);
                let dev = (fm - 0.5 * (left.1 + fr)).abs();
                let small = xr - left.0 <= 1e-12 * (1.0 + xm.abs());
                if dev <= tol(xm) || small {
                    out.push((xr, fr));
                    left = (xr, fr);
                    stack.pop();
                } else {
                    stack.push((xm, fm));
                }
            }
        }
    }
    out
}
