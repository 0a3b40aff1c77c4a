//! Library results against independent oracles: brute-force suprema and
//! exact rational arithmetic.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use raf_core::fenchel::fenchel_transform;
use raf_core::polyzero::exp_partial_sum_zeros;
use raf_core::{AberthOptions, Complex64, LogComplex, LogPoly, PiecewiseFn, Tail};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Exact complex rational.
#[derive(Clone)]
struct Cq {
    re: BigRational,
    im: BigRational,
}

impl Cq {
    fn zero() -> Self {
        Cq {
            re: BigRational::zero(),
            im: BigRational::zero(),
        }
    }

    fn from_f64(z: Complex64) -> Self {
        Cq {
            re: BigRational::from_float(z.re).unwrap(),
            im: BigRational::from_float(z.im).unwrap(),
        }
    }

    fn mul(&self, o: &Cq) -> Cq {
        Cq {
            re: &self.re * &o.re - &self.im * &o.im,
            im: &self.re * &o.im + &self.im * &o.re,
        }
    }

    fn add(&self, o: &Cq) -> Cq {
        Cq {
            re: &self.re + &o.re,
            im: &self.im + &o.im,
        }
    }

    fn scale(&self, r: &BigRational) -> Cq {
        Cq {
            re: &self.re * r,
            im: &self.im * r,
        }
    }

    fn ln_abs(&self) -> f64 {
        0.5 * ln_rational(&(&self.re * &self.re + &self.im * &self.im))
    }
}

fn ln_bigint(x: &BigInt) -> f64 {
    let x = x.abs();
    let shift = x.bits().saturating_sub(62);
    let top: BigInt = &x >> shift;
    top.to_f64().unwrap().ln() + shift as f64 * std::f64::consts::LN_2
}

fn ln_rational(r: &BigRational) -> f64 {
    ln_bigint(r.numer()) - ln_bigint(r.denom())
}

fn pow2(e: i64) -> BigRational {
    let one = BigInt::one();
    if e >= 0 {
        BigRational::from_integer(one << e as u64)
    } else {
        BigRational::new(one.clone(), one << (-e) as u64)
    }
}

#[test]
fn fenchel_transform_matches_dense_grid_supremum() {
    const GRID: usize = 1_000_000;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..4 {
        let mut idx: Vec<usize> = (0..62).map(|_| rng.random_range(1..GRID)).collect();
        idx.push(0);
        idx.push(GRID);
        idx.sort_unstable();
        idx.dedup();
        let nodes: Vec<(f64, f64)> = idx
            .iter()
            .map(|&j| (j as f64 / GRID as f64, rng.random_range(-1.0..1.0)))
            .collect();
        let u = PiecewiseFn::new(nodes, Tail::Infinite).unwrap();
        let i_fn = fenchel_transform(&u).unwrap();
        let dense: Vec<(f64, f64)> = (0..=GRID)
            .map(|j| (j as f64 / GRID as f64, u.eval(j as f64 / GRID as f64)))
            .collect();
        for (s, v) in i_fn.nodes() {
            let brute = dense
                .iter()
                .map(|&(t, ut)| s * t - ut)
                .fold(f64::NEG_INFINITY, f64::max);
            assert!((v - brute).abs() <= 1e-8, "s={s}: {v} vs {brute}");
        }
    }
}

#[test]
fn log_evaluation_matches_exact_arithmetic() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..20 {
        let degree = rng.random_range(3..9);
        let mut logs = Vec::new();
        let mut exact = Vec::new();
        for _ in 0..=degree {
            let m: i64 = rng.random_range(1..1000) * if rng.random_bool(0.5) { 1 } else { -1 };
            let e: i64 = rng.random_range(-7000..=7000);
            logs.push(LogComplex {
                log_mag: (m.abs() as f64).ln() + e as f64 * std::f64::consts::LN_2,
                phase: if m < 0 { std::f64::consts::PI } else { 0.0 },
            });
            exact.push(BigRational::from_integer(m.into()) * pow2(e));
        }
        let p = LogPoly::new(logs, f64::INFINITY).unwrap();
        let z = Complex64::new(rng.random_range(-4.0..4.0), rng.random_range(-4.0..4.0));
        let zq = Cq::from_f64(z);
        let mut acc = Cq::zero();
        for c in exact.iter().rev() {
            acc = acc.mul(&zq);
            acc.re += c;
        }
        let want = acc.ln_abs();
        let (got, _) = p.eval_log(z);
        assert!(
            (got - want).abs() <= 1e-10 * want.abs().max(1.0),
            "{got} vs {want}"
        );
    }
}

#[test]
fn exponential_partial_sum_zeros_pass_exact_newton_test() {
    let n = 60;
    let zm = exp_partial_sum_zeros(n, &AberthOptions::default()).unwrap();
    assert_eq!(zm.total_multiplicity(), n);
    let nq = BigRational::from_integer(n.into());
    // a_k = n^k / k!
    let mut coeffs = vec![BigRational::one()];
    for k in 1..=n {
        let prev = coeffs[k - 1].clone();
        coeffs.push(prev * &nq / BigRational::from_integer(k.into()));
    }
    let mut min_gap = f64::INFINITY;
    for (i, a) in zm.zeros().iter().enumerate() {
        for b in &zm.zeros()[i + 1..] {
            min_gap = min_gap.min((a.z - b.z).norm());
        }
        let zq = Cq::from_f64(a.z);
        let (mut p, mut dp) = (Cq::zero(), Cq::zero());
        let mut power = Cq {
            re: BigRational::one(),
            im: BigRational::zero(),
        };
        for (k, c) in coeffs.iter().enumerate() {
            if k > 0 {
                dp = dp.add(&power.scale(&(c * BigRational::from_integer(k.into()))));
                power = power.mul(&zq);
            }
            p = p.add(&power.scale(c));
        }
        // Newton step |p / p'| bounds the distance to the nearest zero up
        // to a factor near one for simple zeros
        let step = (p.ln_abs() - dp.ln_abs()).exp();
        assert!(step < 1e-12, "zero {} has Newton step {step:e}", a.z);
    }
    assert!(min_gap > 1e-6, "zeros must be distinct, gap {min_gap}");
}
