use std::io::{BufRead, Write};

use num_complex::Complex64;
use serde::Deserialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};

/// One distinct zero with its multiplicity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Zero {
    pub z: Complex64,
    pub multiplicity: usize,
    /// `log |p(z)| - log sum_k |a_k z^k|`; `-inf` for exact zeros.
    pub certificate: f64,
}

/// The empirical zero measure `mu_n` of a sampled function, restricted to
/// the disk `|z| < trust_radius` where its zeros are reliable.
#[derive(Clone, Debug, PartialEq)]
pub struct ZeroMeasure {
    zeros: Vec<Zero>,
    n_normalizer: usize,
    trust_radius: f64,
}

#[derive(Deserialize)]
struct CsvRow {
    re: f64,
    im: f64,
    multiplicity: usize,
}

impl ZeroMeasure {
    pub fn new(zeros: Vec<Zero>, n_normalizer: usize, trust_radius: f64) -> Self {
        Self {
            zeros,
            n_normalizer: n_normalizer.max(1),
            trust_radius,
        }
    }

    /// Zeros with unit multiplicity and no certificate, e.g. synthetic sets.
    pub fn from_points(points: &[Complex64], n_normalizer: usize, trust_radius: f64) -> Self {
        let zeros = points
            .iter()
            .map(|&z| Zero {
                z,
                multiplicity: 1,
                certificate: f64::NAN,
            })
            .collect();
        Self::new(zeros, n_normalizer, trust_radius)
    }

    pub fn zeros(&self) -> &[Zero] {
        &self.zeros
    }

    pub fn n_normalizer(&self) -> usize {
        self.n_normalizer
    }

    pub fn trust_radius(&self) -> f64 {
        self.trust_radius
    }

    pub fn with_normalizer(mut self, n: usize) -> Self {
        self.n_normalizer = n.max(1);
        self
    }

    pub fn total_multiplicity(&self) -> usize {
        self.zeros.iter().map(|z| z.multiplicity).sum()
    }

    /// Multiplicity-weighted count of zeros with `|z| < r`.
    pub fn count_below(&self, r: f64) -> usize {
        self.zeros
            .iter()
            .filter(|z| z.z.norm() < r)
            .map(|z| z.multiplicity)
            .sum()
    }

    /// Multiplies every zero and the trust radius by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        let zeros = self
            .zeros
            .iter()
            .map(|z| Zero {
                z: z.z * factor,
                ..*z
            })
            .collect();
        Self {
            zeros,
            n_normalizer: self.n_normalizer,
            trust_radius: self.trust_radius * factor,
        }
    }

    /// Moduli repeated according to multiplicity, ascending.
    pub fn sorted_moduli(&self) -> Vec<f64> {
        let mut out: Vec<f64> = self
            .zeros
            .iter()
            .flat_map(|z| std::iter::repeat_n(z.z.norm(), z.multiplicity))
            .collect();
        out.sort_by(f64::total_cmp);
        out
    }

    /// Writes `re,im,multiplicity` rows after a `#`-comment line holding
    /// `meta` merged with the normalizer and trust radius.
    pub fn write_csv<W: Write>(&self, mut w: W, meta: &Value) -> Result<()> {
        let mut header = match meta {
            Value::Object(m) => m.clone(),
            Value::Null => serde_json::Map::new(),
            other => {
                let mut m = serde_json::Map::new();
                m.insert("meta".into(), other.clone());
                m
            }
        };
        header.insert("n_normalizer".into(), json!(self.n_normalizer));
        header.insert(
            "trust_radius".into(),
            crate::serde_inf::to_value(self.trust_radius),
        );
        let line = serde_json::to_string(&crate::sorted_json(Value::Object(header)))?;
        let io = |e: std::io::Error| Error::InvalidInput(format!("write failed: {e}"));
        writeln!(w, "# {line}").map_err(io)?;
        writeln!(w, "re,im,multiplicity").map_err(io)?;
        for z in &self.zeros {
            writeln!(w, "{:.16e},{:.16e},{}", z.z.re, z.z.im, z.multiplicity).map_err(io)?;
        }
        Ok(())
    }

    /// Reads a file written by [`write_csv`](Self::write_csv). Returns the
    /// metadata of the first comment line (or `Null`). Files without
    /// metadata get `n_normalizer = ` total multiplicity and an infinite
    /// trust radius.
    pub fn read_csv<R: BufRead>(r: R) -> Result<(Self, Value)> {
        let mut meta = Value::Null;
        let mut body = String::new();
        for line in r.lines() {
            let line = line.map_err(|e| Error::InvalidInput(format!("read failed: {e}")))?;
            if let Some(c) = line.trim_start().strip_prefix('#') {
                if meta.is_null() {
                    meta = serde_json::from_str(c.trim()).unwrap_or(Value::Null);
                }
                continue;
            }
            body.push_str(&line);
            body.push('\n');
        }
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(body.as_bytes());
        let mut zeros = Vec::new();
        for row in rdr.deserialize::<CsvRow>() {
            let row = row.map_err(|e| Error::InvalidInput(format!("bad zero row: {e}")))?;
            zeros.push(Zero {
                z: Complex64::new(row.re, row.im),
                multiplicity: row.multiplicity,
                certificate: f64::NAN,
            });
        }
        let total: usize = zeros.iter().map(|z| z.multiplicity).sum();
        let n = meta
            .get("n_normalizer")
            .and_then(Value::as_u64)
            .map_or(total, |n| n as usize);
        let trust = meta
            .get("trust_radius")
            .and_then(crate::serde_inf::from_value)
            .unwrap_or(f64::INFINITY);
        Ok((Self::new(zeros, n, trust), meta))
    }

    /// Per-zero certificates as JSON, for the sidecar file.
    pub fn certificates_json(&self) -> Value {
        let rows: Vec<Value> = self
            .zeros
            .iter()
            .map(|z| {
                json!({
                    "re": z.z.re,
                    "im": z.z.im,
                    "multiplicity": z.multiplicity,
                    "certificate": crate::serde_inf::to_value(z.certificate),
                })
            })
            .collect();
        let worst = self
            .zeros
            .iter()
            .map(|z| z.certificate)
            .filter(|c| !c.is_nan())
            .fold(f64::NEG_INFINITY, f64::max);
        json!({ "max_certificate": crate::serde_inf::to_value(worst), "zeros": rows })
    }
}
