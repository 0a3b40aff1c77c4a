use std::f64::consts::PI;

use num_complex::Complex64;

use super::{wrap_phase, LogPoly};
use crate::error::{Error, Result};

/// Deepest bisection of one arc before the contour is declared unsafe.
const MAX_DEPTH: u32 = 48;

/// Radius multipliers tried when a zero sits too close to the contour.
const JITTER: [f64; 4] = [0.0, 1e-9, -3e-9, 1e-8];

/// Number of zeros of `p` inside `|z - center| < radius`, as the winding
/// number of `p` along the circle.
///
/// Starts from `max(samples, 4 (deg + 1))` equispaced points and bisects
/// every arc whose phase increment exceeds `pi / 2`. If a value on the
/// contour is within rounding of zero, or an arc cannot be resolved, the
/// radius is jittered; after three jitters the call fails.
pub fn count_zeros_argument(
    p: &LogPoly,
    center: Complex64,
    radius: f64,
    samples: usize,
) -> Result<usize> {
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "radius must be positive, got {radius}"
        )));
    }
    let base = samples.max(4 * (p.degree() + 1));
    for j in JITTER {
        let r = radius * (1.0 + j);
        if let Some(w) = winding(p, center, r, base) {
            return Ok(w);
        }
    }
    Err(Error::ZeroOnContour { radius })
}

fn winding(p: &LogPoly, center: Complex64, r: f64, base: usize) -> Option<usize> {
    let eta = 16.0 * (p.degree() + 1) as f64 * f64::EPSILON;
    let phase_at = |theta: f64| -> Option<f64> {
        let z = center + Complex64::from_polar(r, theta);
        let s = p.eval_scaled(z, false);
        let mag = s.s0.norm();
        if !(mag > eta * s.abs_sum) {
            return None;
        }
        Some(s.s0.arg())
    };
    let step = 2.0 * PI / base as f64;
    let mut total = 0.0;
    let mut prev = phase_at(0.0)?;
    let first = prev;
    for k in 0..base {
        let t0 = k as f64 * step;
        let t1 = if k + 1 == base {
            2.0 * PI
        } else {
            (k + 1) as f64 * step
        };
        let end = if k + 1 == base { first } else { phase_at(t1)? };
        total += arc_increment(&phase_at, t0, prev, t1, end, 0)?;
        prev = end;
    }
    let turns = total / (2.0 * PI);
    let rounded = turns.round();
    if (turns - rounded).abs() > 0.25 || rounded < 0.0 {
        return None;
    }
    Some(rounded as usize)
}

fn arc_increment(
    phase_at: &dyn Fn(f64) -> Option<f64>,
    t0: f64,
    p0: f64,
    t1: f64,
    p1: f64,
    depth: u32,
) -> Option<f64> {
    let d = wrap_phase(p1 - p0);
    if d.abs() < PI / 2.0 {
        return Some(d);
    }
    if depth >= MAX_DEPTH {
        return None;
    }
    let tm = 0.5 * (t0 + t1);
    let pm = phase_at(tm)?;
    Some(
        arc_increment(phase_at, t0, p0, tm, pm, depth + 1)?
            + arc_increment(phase_at, tm, pm, t1, p1, depth + 1)?,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly(coeffs: &[f64]) -> LogPoly {
        let c: Vec<Complex64> = coeffs.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        LogPoly::from_complex(&c).unwrap()
    }

    #[test]
    fn monomial() {
        let origin = Complex64::new(0.0, 0.0);
        assert_eq!(
            count_zeros_argument(&poly(&[0.0, 0.0, 0.0, 1.0]), origin, 1.0, 16).unwrap(),
            3
        );
    }

    #[test]
    fn unit_quadratic() {
        let p = poly(&[1.0, 0.0, 1.0]);
        let origin = Complex64::new(0.0, 0.0);
        assert_eq!(count_zeros_argument(&p, origin, 2.0, 16).unwrap(), 2);
        assert_eq!(count_zeros_argument(&p, origin, 0.5, 16).unwrap(), 0);
        assert_eq!(
            count_zeros_argument(&p, Complex64::new(0.0, 1.0), 0.5, 16).unwrap(),
            1
        );
    }

    #[test]
    fn zero_on_contour_is_jittered_away() {
        // root exactly at radius 1 on the real axis, hit by the first sample
        let p = poly(&[-1.0, 1.0]);
        let n = count_zeros_argument(&p, Complex64::new(0.0, 0.0), 1.0, 8).unwrap();
        assert!(n <= 1);
    }

    #[test]
    fn rejects_bad_radius() {
        assert!(
            count_zeros_argument(&poly(&[1.0, 1.0]), Complex64::new(0.0, 0.0), 0.0, 8).is_err()
        );
    }
}
