use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, ValueEnum};
use raf_core::{CoeffLaw, EnsembleSpec, LimitMeasure, LoVariant, PiecewiseFn};
use serde::Serialize;
use serde_json::{json, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    Kac,
    Elliptic,
    Flat,
    Hyperbolic,
    LoPoly,
    LoEntire,
    Theta,
    ThreeCircles,
    Custom,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    Factorial,
    KPowerK,
    Gamma,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Dist {
    Gaussian,
    Rademacher,
    UniformDisk,
    LogPareto,
    Heavy,
}

/// Selects a coefficient schedule.
#[derive(Args, Clone, Debug, Serialize)]
pub struct EnsembleArgs {
    /// Named family; `custom` reads its profile from `--profile`.
    #[arg(long, value_enum)]
    pub ensemble: Option<Kind>,
    #[arg(long, default_value_t = 0.5, allow_hyphen_values = true)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub beta: f64,
    /// Weight variant of the Littlewood-Offord families.
    #[arg(long, value_enum, default_value_t = Variant::Factorial)]
    pub variant: Variant,
    /// Profile `u` as piecewise-linear JSON, for `--ensemble custom`.
    #[arg(long)]
    pub profile: Option<PathBuf>,
    /// Ensemble JSON as written by `raf construct`; overrides `--ensemble`.
    #[arg(long, conflicts_with = "ensemble")]
    pub spec: Option<PathBuf>,
}

impl EnsembleArgs {
    pub fn resolve(&self) -> Result<EnsembleSpec> {
        if let Some(path) = &self.spec {
            return load_spec(path);
        }
        let Some(kind) = self.ensemble else {
            bail!("one of --ensemble or --spec is required");
        };
        let (alpha, beta) = (self.alpha, self.beta);
        let variant = match self.variant {
            Variant::Factorial => LoVariant::Factorial,
            Variant::KPowerK => LoVariant::KPowerK,
            Variant::Gamma => LoVariant::Gamma,
        };
        let spec = match kind {
            Kind::Kac => EnsembleSpec::Kac,
            Kind::Elliptic => EnsembleSpec::Elliptic { alpha },
            Kind::Flat => EnsembleSpec::Flat { alpha },
            Kind::Hyperbolic => EnsembleSpec::Hyperbolic { alpha },
            Kind::LoPoly => EnsembleSpec::LoPoly {
                variant,
                alpha,
                beta,
            },
            Kind::LoEntire => EnsembleSpec::LoEntire {
                variant,
                alpha,
                beta,
            },
            Kind::Theta => EnsembleSpec::Theta { alpha },
            Kind::ThreeCircles => EnsembleSpec::ThreeCircles,
            Kind::Custom => {
                let Some(path) = &self.profile else {
                    bail!("--ensemble custom needs --profile");
                };
                EnsembleSpec::Custom {
                    u: PiecewiseFn::from_json(&read(path)?)?,
                }
            }
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// Selects the law of the coefficients `xi_k`.
#[derive(Args, Clone, Debug, Serialize)]
pub struct LawArgs {
    #[arg(long, value_enum, default_value_t = Dist::Gaussian)]
    pub dist: Dist,
    /// Tail exponent of `log-pareto`.
    #[arg(long)]
    pub dist_param: Option<f64>,
}

impl LawArgs {
    pub fn resolve(&self) -> Result<CoeffLaw> {
        let law = match self.dist {
            Dist::Gaussian => CoeffLaw::ComplexGaussian,
            Dist::Rademacher => CoeffLaw::Rademacher,
            Dist::UniformDisk => CoeffLaw::UniformDisk,
            Dist::LogPareto => CoeffLaw::LogPareto {
                exponent: self.dist_param.unwrap_or(4.0),
            },
            Dist::Heavy => CoeffLaw::HeavyNoLogMoment,
        };
        if self.dist_param.is_some() && !matches!(law, CoeffLaw::LogPareto { .. }) {
            bail!("--dist-param only applies to --dist log-pareto");
        }
        law.validate()?;
        Ok(law)
    }
}

/// The parsed command line, echoed into every output.
#[derive(Clone, Debug, Serialize)]
pub struct RunConfig {
    pub command: String,
    pub args: Value,
    pub tool_version: &'static str,
}

impl RunConfig {
    pub fn new(command: &str, args: &impl Serialize) -> Self {
        Self {
            command: command.into(),
            args: serde_json::to_value(args).expect("arguments serialize"),
            tool_version: raf_core::VERSION,
        }
    }

    /// Metadata object with the config and the resolved inputs.
    pub fn meta(&self, extra: Value) -> Value {
        let mut m = json!({ "config": self });
        if let (Value::Object(dst), Value::Object(src)) = (&mut m, extra) {
            dst.extend(src);
        }
        raf_core::sorted_json(m)
    }
}

pub fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

/// Reads an ensemble, either bare or wrapped under a `spec` key.
pub fn load_spec(path: &Path) -> Result<EnsembleSpec> {
    let v: Value = serde_json::from_str(&read(path)?)
        .with_context(|| format!("{} is not JSON", path.display()))?;
    let inner = v.get("spec").cloned().unwrap_or(v);
    let spec: EnsembleSpec = serde_json::from_value(inner)
        .with_context(|| format!("{} is not an ensemble", path.display()))?;
    spec.validate()?;
    Ok(spec)
}

/// A measure file, or the keyword `uniform-disk`.
pub fn load_measure(source: &str) -> Result<LimitMeasure> {
    if source == "uniform-disk" {
        return Ok(LimitMeasure::uniform_disk());
    }
    Ok(LimitMeasure::from_json(&read(Path::new(source))?)?)
}

/// Default radius of trusted zeros for entire families: the unit disk,
/// pulled inside the validity radius when that is smaller. The series
/// itself is truncated at a radius larger by `1 / TRUST_FRACTION`.
pub fn default_radius(spec: &EnsembleSpec) -> f64 {
    1f64.min(0.85 * spec.validity_radius())
}
