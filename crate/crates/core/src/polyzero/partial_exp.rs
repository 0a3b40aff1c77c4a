use num_complex::Complex64;

use super::aberth::{
    aberth_iterate, merge_clusters, newton_polygon_roots, AberthOptions, NewtonStep,
};
use super::{LogComplex, LogPoly, ZeroMeasure};
use crate::error::{Error, Result};

/// Above this value of `n (|z| - Re z)` the coefficient form is replaced by
/// the tail form.
const CONDITION_SWITCH: f64 = 5.0;

const MAX_TAIL_TERMS: usize = 1_000_000;

/// Zeros of `P(z) = s_n(nz) = sum_{k<=n} (nz)^k / k!`, the rescaled partial
/// sums of the exponential.
///
/// Where `|e^{nz}|` is tiny against `sum |nz|^k / k!` the coefficients
/// cannot resolve `P` in floating point (about `n (|z| - Re z) / ln 10`
/// digits are lost). There `P` is evaluated as `e^{nz} (1 - e^{-nz} R_n(nz))`
/// with `R_n(w) = sum_{k>n} w^k / k!` summed directly, which is accurate
/// inside the unit disk. Elsewhere the coefficient form is used.
pub fn exp_partial_sum_zeros(n: usize, opts: &AberthOptions) -> Result<ZeroMeasure> {
    if n == 0 {
        return Err(Error::Degenerate("s_0 = 1 has no zeros".into()));
    }
    let nf = n as f64;
    let coeffs = (0..=n)
        .map(|k| LogComplex {
            log_mag: k as f64 * nf.ln() - libm::lgamma(k as f64 + 1.0),
            phase: 0.0,
        })
        .collect();
    let p = LogPoly::new(coeffs, f64::INFINITY)?;
    let eta = 2.0 * (n + 1) as f64 * f64::EPSILON;
    let tail_form = |z: Complex64| z.norm() < 1.0 && nf * (z.norm() - z.re) > CONDITION_SWITCH;

    let newton = |z: Complex64| -> Option<NewtonStep> {
        if tail_form(z) {
            let t = tail_parts(n, z);
            if t.log_a.re == f64::NEG_INFINITY {
                return None;
            }
            let step = 1.0 / (nf * (1.0 - (t.log_b - t.log_a).exp()));
            Some(NewtonStep {
                step,
                at_rounding: t.log_a.re <= (8.0 * f64::EPSILON).ln() + t.log_scale,
            })
        } else {
            let ev = p.eval_scaled(z, true);
            let s0_abs = ev.s0.norm();
            (s0_abs > 0.0).then(|| NewtonStep {
                step: z * ev.s0 / ev.s1,
                at_rounding: s0_abs <= eta * ev.abs_sum,
            })
        }
    };
    let certificate = |z: Complex64| {
        if tail_form(z) {
            let t = tail_parts(n, z);
            t.log_a.re - t.log_scale
        } else {
            p.eval_scaled(z, false).certificate()
        }
    };

    let (roots, unconverged) = aberth_iterate(&newton_polygon_roots(&p)?, opts, newton)?;
    let zm = ZeroMeasure::new(
        merge_clusters(&roots, opts.tol_cluster, certificate),
        n,
        f64::INFINITY,
    );
    if unconverged.is_empty() {
        Ok(zm)
    } else {
        Err(Error::NotConverged {
            partial: Box::new(zm),
            unconverged,
            degree: n,
        })
    }
}

/// Logarithms of `A = e^{-w} s_n(w)` and `B = e^{-w} w^n / n!`, and of
/// `1 + |e^{-w} R_n(w)|`, the magnitude `A` is computed against.
#[derive(Clone, Copy, Debug)]
struct TailParts {
    log_a: Complex64,
    log_b: Complex64,
    log_scale: f64,
}

/// Evaluates [`TailParts`] at `w = nz`, `|z| < 1`, without overflow.
fn tail_parts(n: usize, z: Complex64) -> TailParts {
    let nf = n as f64;
    let w = z * nf;
    let lw = w.ln();
    let mut sum = Complex64::new(1.0, 0.0);
    let mut term = Complex64::new(1.0, 0.0);
    for j in 1..MAX_TAIL_TERMS {
        term *= w / (nf + 1.0 + j as f64);
        sum += term;
        if term.norm() < 1e-18 * sum.norm() {
            break;
        }
    }
    let one = Complex64::new(1.0, 0.0);
    let log_t = lw * (nf + 1.0) - w - libm::lgamma(nf + 2.0) + sum.ln();
    let (log_a, log_scale) = if log_t.re > 0.0 {
        // A = -T (1 - 1/T)
        (
            log_t + Complex64::new(0.0, std::f64::consts::PI) + (one - (-log_t).exp()).ln(),
            log_t.re + (-log_t.re).exp().ln_1p(),
        )
    } else {
        ((one - log_t.exp()).ln(), log_t.re.exp().ln_1p())
    };
    TailParts {
        log_a,
        log_b: lw * nf - w - libm::lgamma(nf + 1.0),
        log_scale,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_degree_matches_closed_form() {
        // s_2(2z) = 1 + 2z + 2z^2, zeros (-1 +- i) / 2
        let zm = exp_partial_sum_zeros(2, &AberthOptions::default()).unwrap();
        let mut z: Vec<Complex64> = zm.zeros().iter().map(|z| z.z).collect();
        z.sort_by(|a, b| a.im.total_cmp(&b.im));
        assert!((z[0] - Complex64::new(-0.5, -0.5)).norm() < 1e-12);
        assert!((z[1] - Complex64::new(-0.5, 0.5)).norm() < 1e-12);
    }

    #[test]
    fn tail_form_agrees_with_coefficients_where_both_are_accurate() {
        let n = 20;
        let z = Complex64::new(0.3, 0.2);
        let a = tail_parts(n, z).log_a.exp();
        let direct: Complex64 = (0..=n)
            .map(|k| (z * n as f64).powu(k as u32) / libm::tgamma(k as f64 + 1.0))
            .sum::<Complex64>()
            * (-(z * n as f64)).exp();
        assert!((a - direct).norm() < 1e-12);
    }

    #[test]
    fn full_zero_set_is_found() {
        let zm = exp_partial_sum_zeros(120, &AberthOptions::default()).unwrap();
        assert_eq!(zm.total_multiplicity(), 120);
        assert!(zm.zeros().iter().all(|z| z.z.norm() < 1.0));
    }

    #[test]
    fn no_overflow_far_outside_the_curve() {
        // |z e^{1-z}|^n overflows f64 here
        let t = tail_parts(600, Complex64::new(-0.9, 0.3));
        assert!(t.log_a.re > 709.0 && t.log_a.is_finite() && t.log_scale.is_finite());
    }
}
