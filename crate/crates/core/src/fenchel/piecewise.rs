use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Behaviour of a [`PiecewiseFn`] outside its grid.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Tail {
    /// The function is `+inf` beyond the last (or before the first) node.
    Infinite,
    /// Linear continuation with the given slope.
    Linear(f64),
}

impl Tail {
    pub fn slope(self) -> Option<f64> {
        match self {
            Tail::Infinite => None,
            Tail::Linear(s) => Some(s),
        }
    }
}

/// A real function given by its values on a strictly increasing grid,
/// interpolated linearly between nodes and extended by `head` / `tail`.
///
/// Used for both the coefficient profile `u(t)` (head infinite, grid
/// starting at `t = 0`) and its conjugate `I(s)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPiecewise", into = "RawPiecewise")]
pub struct PiecewiseFn {
    xs: Vec<f64>,
    vs: Vec<f64>,
    head: Tail,
    tail: Tail,
}

impl PiecewiseFn {
    /// Builds a function that is `+inf` left of the first node.
    pub fn new(grid: Vec<(f64, f64)>, tail: Tail) -> Result<Self> {
        Self::with_head(grid, Tail::Infinite, tail)
    }

    pub fn with_head(grid: Vec<(f64, f64)>, head: Tail, tail: Tail) -> Result<Self> {
        let (xs, vs): (Vec<f64>, Vec<f64>) = grid.into_iter().unzip();
        Self::from_parts(xs, vs, head, tail)
    }

    pub fn from_parts(xs: Vec<f64>, vs: Vec<f64>, head: Tail, tail: Tail) -> Result<Self> {
        if xs.is_empty() {
            return Err(Error::InvalidInput("empty grid".into()));
        }
        if xs.len() != vs.len() {
            return Err(Error::InvalidInput("grid and value lengths differ".into()));
        }
        for (i, (&x, &v)) in xs.iter().zip(&vs).enumerate() {
            if !x.is_finite() || !v.is_finite() {
                return Err(Error::InvalidInput(format!(
                    "non-finite node {i}: ({x}, {v})"
                )));
            }
            if i > 0 && x <= xs[i - 1] {
                return Err(Error::InvalidInput(format!(
                    "grid not strictly increasing at node {i}"
                )));
            }
        }
        for t in [head, tail] {
            if let Tail::Linear(s) = t {
                if !s.is_finite() {
                    return Err(Error::InvalidInput("non-finite tail slope".into()));
                }
            }
        }
        Ok(Self { xs, vs, head, tail })
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn values(&self) -> &[f64] {
        &self.vs
    }

    pub fn nodes(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.xs.iter().copied().zip(self.vs.iter().copied())
    }

    pub fn head(&self) -> Tail {
        self.head
    }

    pub fn tail(&self) -> Tail {
        self.tail
    }

    pub fn first_x(&self) -> f64 {
        self.xs[0]
    }

    pub fn last_x(&self) -> f64 {
        self.xs[self.xs.len() - 1]
    }

    /// `T0`: the last grid point when the tail is infinite, otherwise `+inf`.
    pub fn domain_end(&self) -> f64 {
        match self.tail {
            Tail::Infinite => self.last_x(),
            Tail::Linear(_) => f64::INFINITY,
        }
    }

    pub fn domain_start(&self) -> f64 {
        match self.head {
            Tail::Infinite => self.first_x(),
            Tail::Linear(_) => f64::NEG_INFINITY,
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if x.is_nan() {
            return f64::NAN;
        }
        if x < self.xs[0] {
            return match self.head {
                Tail::Infinite => f64::INFINITY,
                Tail::Linear(a) => self.vs[0] + a * (x - self.xs[0]),
            };
        }
        if x > self.xs[n - 1] {
            return match self.tail {
                Tail::Infinite => f64::INFINITY,
                Tail::Linear(b) => self.vs[n - 1] + b * (x - self.xs[n - 1]),
            };
        }
        let i = self.xs.partition_point(|&t| t <= x);
        if i == 0 {
            return self.vs[0];
        }
        if i == n {
            return self.vs[n - 1];
        }
        let (x0, x1) = (self.xs[i - 1], self.xs[i]);
        let (v0, v1) = (self.vs[i - 1], self.vs[i]);
        let w = (x - x0) / (x1 - x0);
        v0 + w * (v1 - v0)
    }

    /// Slope of the segment between nodes `i` and `i + 1`.
    pub fn segment_slope(&self, i: usize) -> f64 {
        (self.vs[i + 1] - self.vs[i]) / (self.xs[i + 1] - self.xs[i])
    }

    /// Checks convexity with a relative tolerance on every turn of the graph,
    /// including the joins with linear head and tail.
    pub fn check_convex(&self, rel_tol: f64) -> Result<()> {
        let n = self.xs.len();
        for i in 1..n.saturating_sub(1) {
            let a = (self.xs[i - 1], self.vs[i - 1]);
            let b = (self.xs[i], self.vs[i]);
            let c = (self.xs[i + 1], self.vs[i + 1]);
            if !turn_ok(a, b, c, rel_tol) {
                return Err(Error::NotConvex { at: b.0 });
            }
        }
        if n >= 2 {
            if let Tail::Linear(a) = self.head {
                let s = self.segment_slope(0);
                if s < a - rel_tol * a.abs().max(s.abs()).max(1.0) {
                    return Err(Error::NotConvex { at: self.xs[0] });
                }
            }
            if let Tail::Linear(b) = self.tail {
                let s = self.segment_slope(n - 2);
                if s > b + rel_tol * b.abs().max(s.abs()).max(1.0) {
                    return Err(Error::NotConvex { at: self.xs[n - 1] });
                }
            }
        } else if let (Tail::Linear(a), Tail::Linear(b)) = (self.head, self.tail) {
            if a > b + rel_tol * a.abs().max(b.abs()).max(1.0) {
                return Err(Error::NotConvex { at: self.xs[0] });
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// Orientation test for three points: `b` must not lie above the chord `a`-`c`
/// beyond rounding-level noise.
pub(crate) fn turn_ok(a: (f64, f64), b: (f64, f64), c: (f64, f64), rel_tol: f64) -> bool {
    let cross = cross(a, b, c);
    let scale = ((b.0 - a.0) * (c.1 - a.1)).abs() + ((b.1 - a.1) * (c.0 - a.0)).abs();
    cross >= -rel_tol * scale
}

/// `(b - a) x (c - a)`; positive when `a, b, c` turn counter-clockwise.
pub(crate) fn cross(a: (f64, f64), b: (f64, f64), c: (f64, f64)) -> f64 {
    (b.0 - a.0) * (c.1 - a.1) - (b.1 - a.1) * (c.0 - a.0)
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum RawBound {
    Num(f64),
    Tag(String),
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum RawTail {
    Tag(String),
    Slope { slope: f64 },
}

#[derive(Serialize, Deserialize)]
struct RawPiecewise {
    grid: Vec<[f64; 2]>,
    #[serde(rename = "T0")]
    t0: RawBound,
    tail: RawTail,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    head: Option<RawTail>,
}

fn tail_from_raw(raw: RawTail) -> std::result::Result<Tail, String> {
    match raw {
        RawTail::Tag(t) if t == "infinite" => Ok(Tail::Infinite),
        RawTail::Tag(t) => Err(format!("unknown tail tag {t:?}")),
        RawTail::Slope { slope } => Ok(Tail::Linear(slope)),
    }
}

fn tail_to_raw(t: Tail) -> RawTail {
    match t {
        Tail::Infinite => RawTail::Tag("infinite".into()),
        Tail::Linear(slope) => RawTail::Slope { slope },
    }
}

impl TryFrom<RawPiecewise> for PiecewiseFn {
    type Error = String;

    fn try_from(raw: RawPiecewise) -> std::result::Result<Self, String> {
        let tail = tail_from_raw(raw.tail)?;
        let head = match raw.head {
            Some(h) => tail_from_raw(h)?,
            None => Tail::Infinite,
        };
        let grid = raw.grid.into_iter().map(|[x, v]| (x, v)).collect();
        let f = PiecewiseFn::with_head(grid, head, tail).map_err(|e| e.to_string())?;
        let t0 = match raw.t0 {
            RawBound::Num(x) => x,
            RawBound::Tag(t) if t == "inf" => f64::INFINITY,
            RawBound::Tag(t) => return Err(format!("unknown T0 tag {t:?}")),
        };
        let end = f.domain_end();
        let consistent = if end.is_infinite() {
            t0.is_infinite()
        } else {
            (t0 - end).abs() <= 1e-12 * end.abs().max(1.0)
        };
        if !consistent {
            return Err(format!(
                "T0 = {t0} does not match the grid and tail (expected {end})"
            ));
        }
        Ok(f)
    }
}

impl From<PiecewiseFn> for RawPiecewise {
    fn from(f: PiecewiseFn) -> Self {
        let end = f.domain_end();
        RawPiecewise {
            t0: if end.is_finite() {
                RawBound::Num(end)
            } else {
                RawBound::Tag("inf".into())
            },
            tail: tail_to_raw(f.tail),
            head: match f.head {
                Tail::Infinite => None,
                h => Some(tail_to_raw(h)),
            },
            grid: f.xs.into_iter().zip(f.vs).map(|(x, v)| [x, v]).collect(),
        }
    }
}
