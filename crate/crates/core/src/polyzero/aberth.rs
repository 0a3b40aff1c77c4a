use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{LogPoly, Zero, ZeroMeasure};
use crate::error::{Error, Result};

/// Settings for [`find_zeros`].
#[derive(Clone, Debug)]
pub struct AberthOptions {
    pub max_iter: usize,
    /// A root is accepted once its correction is below `tol * |root|`.
    pub tol: f64,
    /// Roots closer than `tol_cluster * |root|` are merged into one zero.
    pub tol_cluster: f64,
    /// Seeds the random rotation of the initial guesses.
    pub seed: u64,
}

impl Default for AberthOptions {
    fn default() -> Self {
        Self {
            max_iter: 400,
            tol: 1e-12,
            tol_cluster: 1e-6,
            seed: 0,
        }
    }
}

/// Tropical root radii: one `(radius, count)` per edge of the upper convex
/// hull of `(k, log |a_k|)`. Vanishing low-order coefficients give a
/// `(0, m)` entry first.
pub fn newton_polygon_roots(p: &LogPoly) -> Result<Vec<(f64, usize)>> {
    if p.degree() == 0 {
        return Err(Error::Degenerate("constant polynomial has no roots".into()));
    }
    let pts: Vec<(f64, f64)> = p
        .coeffs()
        .iter()
        .enumerate()
        .filter(|(_, c)| !c.is_zero())
        .map(|(k, c)| (k as f64, c.log_mag))
        .collect();
    let mut hull: Vec<(f64, f64)> = Vec::with_capacity(pts.len());
    for &q in &pts {
        while hull.len() >= 2 {
            let a = hull[hull.len() - 2];
            let b = hull[hull.len() - 1];
            // pop b unless it lies strictly above the chord a-q
            if (b.0 - a.0) * (q.1 - a.1) - (b.1 - a.1) * (q.0 - a.0) >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(q);
    }
    let mut out = Vec::with_capacity(hull.len());
    let origin = p.zero_order();
    if origin > 0 {
        out.push((0.0, origin));
    }
    for w in hull.windows(2) {
        let slope = (w[1].1 - w[0].1) / (w[1].0 - w[0].0);
        out.push(((-slope).exp(), (w[1].0 - w[0].0) as usize));
    }
    Ok(out)
}

/// All zeros of `p` by the Aberth-Ehrlich iteration, started from the
/// Newton-polygon radii with randomly rotated equispaced angles.
///
/// Each sweep computes every correction from the previous iterate. Roots
/// freeze individually once their correction is below `tol * |root|` or the
/// computed value is within rounding of zero. Roots still moving at half
/// the budget are restarted once. Zeros beyond `p.trust_radius()` are
/// dropped.
pub fn find_zeros(p: &LogPoly, opts: &AberthOptions) -> Result<ZeroMeasure> {
    if p.degree() == 0 {
        return Err(Error::Degenerate("constant polynomial has no roots".into()));
    }
    let origin = p.zero_order();
    let q = p.deflate_origin(origin)?;
    let (roots, unconverged) = match q.degree() {
        0 => (Vec::new(), Vec::new()),
        1 => {
            let (a0, a1) = (q.coeffs()[0], q.coeffs()[1]);
            let r =
                Complex64::from_polar((a0.log_mag - a1.log_mag).exp(), a0.phase - a1.phase + PI);
            (vec![r], Vec::new())
        }
        _ => aberth(&q, opts)?,
    };
    let mut zeros = merge_clusters(&roots, opts.tol_cluster, |z| {
        q.eval_scaled(z, false).certificate()
    });
    if origin > 0 {
        zeros.insert(
            0,
            Zero {
                z: Complex64::new(0.0, 0.0),
                multiplicity: origin,
                certificate: f64::NEG_INFINITY,
            },
        );
    }
    let trust = p.trust_radius();
    zeros.retain(|z| z.z.norm() < trust);
    let zm = ZeroMeasure::new(zeros, p.degree(), trust);
    if unconverged.is_empty() {
        Ok(zm)
    } else {
        Err(Error::NotConverged {
            partial: Box::new(zm),
            unconverged,
            degree: p.degree(),
        })
    }
}

type Split = (Vec<Complex64>, Vec<Complex64>);

/// One Newton quotient `p(z) / p'(z)` from a caller-supplied evaluator.
#[derive(Clone, Copy, Debug)]
pub struct NewtonStep {
    pub step: Complex64,
    /// `p(z)` is below the evaluator's own rounding level, so `z` is a
    /// zero to working accuracy.
    pub at_rounding: bool,
}

fn aberth(q: &LogPoly, opts: &AberthOptions) -> Result<Split> {
    let d = q.degree();
    let eta = 2.0 * (d + 1) as f64 * f64::EPSILON;
    let radii = newton_polygon_roots(q)?;
    aberth_iterate(&radii, opts, |z| {
        let ev = q.eval_scaled(z, true);
        let s0_abs = ev.s0.norm();
        (s0_abs > 0.0).then(|| NewtonStep {
            step: z * ev.s0 / ev.s1,
            at_rounding: s0_abs <= eta * ev.abs_sum,
        })
    })
}

/// Aberth-Ehrlich iteration for a function with one zero per unit of
/// `count` in `radii`, given by its Newton quotient. `newton` returns
/// `None` where the function vanishes exactly.
///
/// Returns the converged roots and, separately, those still moving when
/// the budget ran out.
pub fn aberth_iterate(
    radii: &[(f64, usize)],
    opts: &AberthOptions,
    newton: impl Fn(Complex64) -> Option<NewtonStep>,
) -> Result<Split> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let d: usize = radii.iter().map(|r| r.1).sum();
    let mut z = Vec::with_capacity(d);
    let mut home = Vec::with_capacity(d);
    for &(r, count) in radii {
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::Degenerate(format!(
                "root radius {r} is not representable"
            )));
        }
        let theta0 = 2.0 * PI * rng.random::<f64>();
        for j in 0..count {
            z.push(Complex64::from_polar(
                r,
                theta0 + 2.0 * PI * j as f64 / count as f64,
            ));
            home.push(r);
        }
    }
    let mut done = vec![false; d];
    let mut accept = vec![false; d];
    let mut corr = vec![Complex64::new(0.0, 0.0); d];
    let mut restarted = false;
    for iter in 0..opts.max_iter {
        if done.iter().all(|&c| c) {
            break;
        }
        if !restarted && iter >= opts.max_iter / 2 {
            restarted = true;
            for i in (0..d).filter(|&i| !done[i]) {
                let r = home[i] * (1.0 + 0.1 * (rng.random::<f64>() - 0.5));
                z[i] = Complex64::from_polar(r, 2.0 * PI * rng.random::<f64>());
            }
        }
        for i in 0..d {
            if done[i] {
                continue;
            }
            let zi = z[i];
            let Some(ns) = newton(zi) else {
                corr[i] = Complex64::new(0.0, 0.0);
                accept[i] = true;
                continue;
            };
            if !ns.step.is_finite() {
                // critical point: nudge off it
                corr[i] = zi * Complex64::from_polar(1e-3, 2.0 * PI * rng.random::<f64>());
                accept[i] = false;
                continue;
            }
            let mut repulsion = Complex64::new(0.0, 0.0);
            for (j, &zj) in z.iter().enumerate() {
                if j != i {
                    let diff = zi - zj;
                    if diff.re != 0.0 || diff.im != 0.0 {
                        repulsion += diff.inv();
                    }
                }
            }
            let mut w = ns.step / (Complex64::new(1.0, 0.0) - ns.step * repulsion);
            if !w.is_finite() {
                w = ns.step;
            }
            corr[i] = w;
            accept[i] = ns.at_rounding || w.norm() <= opts.tol * zi.norm();
        }
        for i in 0..d {
            if !done[i] {
                z[i] -= corr[i];
                done[i] = accept[i];
            }
        }
    }
    let mut roots = Vec::with_capacity(d);
    let mut left = Vec::new();
    for i in 0..d {
        if done[i] && z[i].is_finite() {
            roots.push(z[i]);
        } else {
            left.push(z[i]);
        }
    }
    Ok((roots, left))
}

/// Groups roots within `tol * max(|a|, |b|)` of each other; each group
/// becomes one zero at its mean with the group size as multiplicity.
pub(crate) fn merge_clusters(
    roots: &[Complex64],
    tol: f64,
    certificate: impl Fn(Complex64) -> f64,
) -> Vec<Zero> {
    let n = roots.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| roots[a].norm().total_cmp(&roots[b].norm()));
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for a in 0..n {
        let za = roots[order[a]];
        let ra = za.norm();
        for &ib in &order[a + 1..] {
            let zb = roots[ib];
            let rb = zb.norm();
            if rb * (1.0 - tol) > ra {
                break;
            }
            if (za - zb).norm() <= tol * ra.max(rb) {
                let (x, y) = (find(&mut parent, order[a]), find(&mut parent, ib));
                parent[x] = y;
            }
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for i in 0..n {
        let root = find(&mut parent, i);
        groups.entry(root).or_default().push(i);
    }
    let mut zeros: Vec<Zero> = groups
        .into_values()
        .map(|members| {
            let sum: Complex64 = members.iter().map(|&i| roots[i]).sum();
            let z = sum / members.len() as f64;
            Zero {
                z,
                multiplicity: members.len(),
                certificate: certificate(z),
            }
        })
        .collect();
    zeros.sort_by(|a, b| {
        a.z.norm()
            .total_cmp(&b.z.norm())
            .then(a.z.arg().total_cmp(&b.z.arg()))
    });
    zeros
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polyzero::LogComplex;
    use approx::assert_relative_eq;

    fn poly(coeffs: &[f64]) -> LogPoly {
        let c: Vec<Complex64> = coeffs.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        LogPoly::from_complex(&c).unwrap()
    }

    #[test]
    fn newton_polygon_simple() {
        assert_eq!(
            newton_polygon_roots(&poly(&[1.0, 0.0, 1.0])).unwrap(),
            vec![(1.0, 2)]
        );
        let eps = (-100f64).exp();
        let p = LogPoly::new(
            vec![
                LogComplex {
                    log_mag: 0.0,
                    phase: 0.0,
                },
                LogComplex {
                    log_mag: 100.0,
                    phase: 0.0,
                },
            ],
            f64::INFINITY,
        )
        .unwrap();
        let np = newton_polygon_roots(&p).unwrap();
        assert_eq!(np.len(), 1);
        assert_relative_eq!(np[0].0, eps, max_relative = 1e-12);
        assert_eq!(np[0].1, 1);
    }

    #[test]
    fn newton_polygon_counts_origin() {
        let p = poly(&[0.0, 0.0, 2.0, 1.0]);
        let np = newton_polygon_roots(&p).unwrap();
        assert_eq!(np[0], (0.0, 2));
        assert_eq!(np.iter().map(|x| x.1).sum::<usize>(), 3);
    }

    #[test]
    fn unit_quadratic() {
        let zm = find_zeros(&poly(&[1.0, 0.0, 1.0]), &AberthOptions::default()).unwrap();
        let mut z: Vec<Complex64> = zm.zeros().iter().map(|z| z.z).collect();
        z.sort_by(|a, b| a.im.total_cmp(&b.im));
        assert!((z[0] - Complex64::new(0.0, -1.0)).norm() < 1e-12);
        assert!((z[1] - Complex64::new(0.0, 1.0)).norm() < 1e-12);
    }

    #[test]
    fn double_root_is_merged() {
        // (z - 1)^2 (z + 2)
        let zm = find_zeros(&poly(&[2.0, -3.0, 0.0, 1.0]), &AberthOptions::default()).unwrap();
        assert_eq!(zm.total_multiplicity(), 3);
        let double = zm
            .zeros()
            .iter()
            .find(|z| z.multiplicity == 2)
            .expect("double root");
        assert!((double.z - Complex64::new(1.0, 0.0)).norm() < 1e-6);
    }

    #[test]
    fn origin_roots_and_linear_factor() {
        // z^3 (z - 5)
        let zm = find_zeros(
            &poly(&[0.0, 0.0, 0.0, -5.0, 1.0]),
            &AberthOptions::default(),
        )
        .unwrap();
        assert_eq!(zm.zeros()[0].multiplicity, 3);
        assert_eq!(zm.zeros()[0].z, Complex64::new(0.0, 0.0));
        assert!((zm.zeros()[1].z - Complex64::new(5.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn extreme_dynamic_range() {
        // roots at e^-300, 1, e^300 multiplied out in log form
        let coeffs: Vec<LogComplex> = [0.0, 300.0, 300.0, 0.0]
            .iter()
            .enumerate()
            .map(|(k, &l)| LogComplex {
                log_mag: l,
                phase: if k % 2 == 1 { PI } else { 0.0 },
            })
            .collect();
        let p = LogPoly::new(coeffs, f64::INFINITY).unwrap();
        let zm = find_zeros(&p, &AberthOptions::default()).unwrap();
        assert_eq!(zm.total_multiplicity(), 3);
        let mut logs: Vec<f64> = zm.zeros().iter().map(|z| z.z.norm().ln()).collect();
        logs.sort_by(f64::total_cmp);
        for (got, want) in logs.iter().zip([-300.0, 0.0, 300.0]) {
            assert_relative_eq!(*got, want, epsilon = 1e-9);
        }
    }

    #[test]
    fn trust_radius_filters() {
        let p = poly(&[-6.0, 11.0, -6.0, 1.0]).with_trust_radius(2.5);
        let zm = find_zeros(&p, &AberthOptions::default()).unwrap();
        assert_eq!(zm.total_multiplicity(), 2);
    }

    #[test]
    fn budget_exhaustion_reports_unconverged() {
        let p = poly(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0]);
        let opts = AberthOptions {
            max_iter: 1,
            ..Default::default()
        };
        match find_zeros(&p, &opts) {
            Err(Error::NotConverged {
                unconverged,
                degree,
                partial,
            }) => {
                assert_eq!(degree, 6);
                assert_eq!(unconverged.len() + partial.total_multiplicity(), 6);
                assert!(!unconverged.is_empty());
            }
            other => panic!("expected NotConverged, got {other:?}"),
        }
    }

    #[test]
    fn constant_is_degenerate() {
        assert!(matches!(
            find_zeros(&poly(&[3.0]), &AberthOptions::default()),
            Err(Error::Degenerate(_))
        ));
    }
}
