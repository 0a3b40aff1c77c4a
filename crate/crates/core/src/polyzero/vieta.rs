use num_complex::Complex64;

use super::{LogPoly, ZeroMeasure};
use crate::error::{Error, Result};

/// Relative discrepancies of the Vieta identities for a computed zero set.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VietaReport {
    /// `|sum log|z_i| - (log|a_m| - log|a_D|)| / max(1, |log|a_m| - log|a_D||)`
    /// over the nonzero zeros, with `a_m` the lowest nonvanishing coefficient.
    pub log_product_discrepancy: f64,
    /// `|sum z_i + a_{D-1}/a_D| / sum |z_i|`.
    pub sum_discrepancy: f64,
}

/// Checks the product and sum identities between `p` and its zeros.
pub fn vieta_check(p: &LogPoly, zm: &ZeroMeasure) -> Result<VietaReport> {
    let d = p.degree();
    let found = zm.total_multiplicity();
    if found != d {
        return Err(Error::IncompleteZeroSet { found, degree: d });
    }
    let c = p.coeffs();
    let m = p.zero_order();
    let target = c[m].log_mag - c[d].log_mag;
    let mut log_prod = 0.0;
    let mut sum = Complex64::new(0.0, 0.0);
    let mut abs_sum = 0.0;
    for z in zm.zeros() {
        let k = z.multiplicity as f64;
        if z.z.norm() > 0.0 {
            log_prod += k * z.z.norm().ln();
        }
        sum += z.z * k;
        abs_sum += z.z.norm() * k;
    }
    let log_product_discrepancy = (log_prod - target).abs() / target.abs().max(1.0);
    let expected_sum = if d >= 1 && !c[d - 1].is_zero() {
        -Complex64::from_polar(
            (c[d - 1].log_mag - c[d].log_mag).exp(),
            c[d - 1].phase - c[d].phase,
        )
    } else {
        Complex64::new(0.0, 0.0)
    };
    let sum_discrepancy = if abs_sum > 0.0 {
        (sum - expected_sum).norm() / abs_sum
    } else {
        0.0
    };
    Ok(VietaReport {
        log_product_discrepancy,
        sum_discrepancy,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polyzero::{find_zeros, AberthOptions};

    fn quadratic() -> LogPoly {
        let c = [2.0, -3.0, 1.0].map(|x| Complex64::new(x, 0.0));
        LogPoly::from_complex(&c).unwrap()
    }

    #[test]
    fn exact_zeros_have_no_discrepancy() {
        let zm = ZeroMeasure::from_points(
            &[Complex64::new(1.0, 0.0), Complex64::new(2.0, 0.0)],
            2,
            f64::INFINITY,
        );
        let r = vieta_check(&quadratic(), &zm).unwrap();
        assert!(r.log_product_discrepancy < 1e-15);
        assert!(r.sum_discrepancy < 1e-15);
    }

    #[test]
    fn discrepancy_grows_with_perturbation() {
        let p = quadratic();
        let mut last = (0.0, 0.0);
        for eps in [1e-8, 1e-6, 1e-4, 1e-2] {
            let zm = ZeroMeasure::from_points(
                &[
                    Complex64::new(1.0 + eps, 0.0),
                    Complex64::new(2.0 + eps, 0.0),
                ],
                2,
                f64::INFINITY,
            );
            let r = vieta_check(&p, &zm).unwrap();
            assert!(r.log_product_discrepancy > last.0 && r.sum_discrepancy > last.1);
            last = (r.log_product_discrepancy, r.sum_discrepancy);
        }
    }

    #[test]
    fn incomplete_set_is_an_error() {
        let zm = ZeroMeasure::from_points(&[Complex64::new(1.0, 0.0)], 2, f64::INFINITY);
        assert!(matches!(
            vieta_check(&quadratic(), &zm),
            Err(Error::IncompleteZeroSet { .. })
        ));
    }

    #[test]
    fn solver_output_passes() {
        let zm = find_zeros(&quadratic(), &AberthOptions::default()).unwrap();
        let r = vieta_check(&quadratic(), &zm).unwrap();
        assert!(r.log_product_discrepancy < 1e-12 && r.sum_discrepancy < 1e-12);
    }
}
