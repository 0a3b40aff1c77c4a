//! Random analytic functions `G_n(z) = sum_k xi_k f_{k,n} z^k`, their zeros
//! at high degree, and the limiting zero distributions predicted by the
//! Legendre-Fenchel transform of the coefficient profile.
//!
//! * [`fenchel`]: conjugates, left derivatives, limit measures and the
//!   inverse construction of an ensemble from a target measure.
//! * [`ensembles`]: the coefficient families and their profiles.
//! * [`sampling`]: reproducible coefficient sampling in log-magnitude form.
//! * [`polyzero`]: zeros of high-degree polynomials with extreme dynamic
//!   range.
//! * [`measures`]: distances between empirical and limit measures.

// `!(x > 0.0)` is how NaN inputs get rejected
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod ensembles;
pub mod error;
pub mod fenchel;
pub mod measures;
pub mod polyzero;
pub mod sampling;

pub use ensembles::{EnsembleSpec, LoVariant, ScalingMap};
pub use error::{Error, Result};
pub use fenchel::{
    conjugate, construct_ensemble, convex_hull, fenchel_transform, left_derivative, limit_density,
    limit_measure, Atom, LimitMeasure, PiecewiseFn, Tail,
};
pub use measures::{compare, ks_angular, ks_radial, ComparisonReport};
pub use num_complex::Complex64;
pub use polyzero::{
    count_zeros_argument, find_zeros, AberthOptions, LogComplex, LogPoly, Zero, ZeroMeasure,
};
pub use sampling::{sample_series, CoeffLaw, SampleStream};

/// Version string embedded in reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Re-collects every object in `v` so keys come out sorted.
pub fn sorted_json(v: serde_json::Value) -> serde_json::Value {
    use serde_json::Value;
    match v {
        Value::Object(m) => {
            let sorted: std::collections::BTreeMap<String, Value> =
                m.into_iter().map(|(k, v)| (k, sorted_json(v))).collect();
            Value::Object(sorted.into_iter().collect())
        }
        Value::Array(a) => Value::Array(a.into_iter().map(sorted_json).collect()),
        other => other,
    }
}

/// `f64` fields that may be infinite, written as `"inf"` / `"-inf"` in JSON.
pub(crate) mod serde_inf {
    use serde::{de::Error as _, Deserialize, Deserializer, Serializer};
    use serde_json::Value;

    pub fn to_value(x: f64) -> Value {
        if x == f64::INFINITY {
            Value::from("inf")
        } else if x == f64::NEG_INFINITY {
            Value::from("-inf")
        } else if x.is_nan() {
            Value::Null
        } else {
            Value::from(x)
        }
    }

    pub fn from_value(v: &Value) -> Option<f64> {
        match v {
            Value::Number(n) => n.as_f64(),
            Value::String(s) => match s.as_str() {
                "inf" | "+inf" | "infinity" => Some(f64::INFINITY),
                "-inf" | "-infinity" => Some(f64::NEG_INFINITY),
                _ => None,
            },
            _ => None,
        }
    }

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        if x.is_infinite() {
            s.serialize_str(if *x > 0.0 { "inf" } else { "-inf" })
        } else {
            s.serialize_f64(*x)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        let v = Value::deserialize(d)?;
        from_value(&v)
            .ok_or_else(|| D::Error::custom(format!("expected a number or \"inf\", got {v}")))
    }
}
