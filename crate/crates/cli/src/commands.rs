use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, ValueEnum};
use raf_core::measures::{normalize_zeros, szego_curve_distance};
use raf_core::polyzero::exp_partial_sum_zeros;
use raf_core::sampling::TRUST_FRACTION;
use raf_core::{
    compare, construct_ensemble, find_zeros, sample_series, AberthOptions, CoeffLaw,
    ComparisonReport, EnsembleSpec, LimitMeasure, LoVariant, SampleStream, ZeroMeasure,
};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{default_radius, load_measure, EnsembleArgs, LawArgs, RunConfig};

#[derive(Args, Debug, Serialize)]
pub struct SampleArgs {
    #[command(flatten)]
    pub ensemble: EnsembleArgs,
    #[command(flatten)]
    pub law: LawArgs,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Number of consecutive seeds; each gets its own file.
    #[arg(long, default_value_t = 1)]
    pub seeds: u64,
    /// Normalized radius of the disk of trusted zeros (entire families).
    #[arg(long)]
    pub radius: Option<f64>,
    /// Relative size of the neglected series tail.
    #[arg(long, default_value_t = 1e-16)]
    pub tol: f64,
    #[arg(long, default_value = "zeros.csv")]
    pub out: PathBuf,
    /// Certificate sidecar; defaults to the output with `.cert.json`.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct PredictArgs {
    #[command(flatten)]
    pub ensemble: EnsembleArgs,
    /// Largest modulus of the grid.
    #[arg(long, default_value_t = 1.0)]
    pub radius: f64,
    #[arg(long, default_value_t = 256)]
    pub points: usize,
    #[arg(long, default_value = "prediction.csv")]
    pub out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
pub struct CompareArgs {
    #[command(flatten)]
    pub ensemble: EnsembleArgs,
    /// Limit to compare against, as measure JSON or `uniform-disk`,
    /// instead of the limit of the ensemble.
    #[arg(long)]
    pub measure: Option<String>,
    /// Zero files written by `raf sample`; several files are pooled.
    #[arg(long, required = true, num_args = 1..)]
    pub zeros: Vec<PathBuf>,
    /// Radius of the comparison disk.
    #[arg(long, default_value_t = 1.0)]
    pub radius: f64,
    /// Annulus for the angular statistic; defaults to `R/2 < |z| < R`.
    #[arg(long, num_args = 2, value_names = ["R_LO", "R_HI"])]
    pub annulus: Option<Vec<f64>>,
    #[arg(long, default_value = "report.json")]
    pub report: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DemoName {
    /// Exponential partial sums against their randomized version.
    Szego,
    /// Heavy-tailed coefficients without a finite log-moment.
    Converse,
    /// The Weyl ensemble under Gaussian and log-Pareto coefficients.
    Universality,
}

#[derive(Args, Debug, Serialize)]
pub struct DemoArgs {
    #[arg(value_enum)]
    pub name: DemoName,
    /// Degree (szego, universality) or largest degree (converse).
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Weight exponent of the converse demo.
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub beta: f64,
    /// Output directory.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
pub struct ConstructArgs {
    /// Measure JSON, or `uniform-disk`.
    #[arg(long)]
    pub measure: String,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value = "ensemble.json")]
    pub out: PathBuf,
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    }
    Ok(BufWriter::new(File::create(path).with_context(|| {
        format!("cannot create {}", path.display())
    })?))
}

fn write_json(path: &Path, v: &Value) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, &raf_core::sorted_json(v.clone()))?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn write_zeros(path: &Path, zm: &ZeroMeasure, meta: &Value) -> Result<()> {
    let mut w = create(path)?;
    zm.write_csv(&mut w, meta)?;
    w.flush()?;
    Ok(())
}

fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let ext = path
        .extension()
        .map(|e| format!(".{}", e.to_string_lossy()))
        .unwrap_or_default();
    path.with_file_name(format!("{stem}{suffix}{ext}"))
}

/// Normalized zeros of one sample, trusted inside `radius`.
fn sample_zeros(
    spec: &EnsembleSpec,
    law: &CoeffLaw,
    n: usize,
    radius: f64,
    tol: f64,
    seed: u64,
) -> Result<ZeroMeasure> {
    let sample_radius = radius / TRUST_FRACTION * (1.0 + 1e-9);
    let p = sample_series(spec, law, n, sample_radius, tol, &SampleStream::new(seed))?;
    let zm = find_zeros(
        &p,
        &AberthOptions {
            seed,
            ..Default::default()
        },
    )?
    .with_normalizer(n);
    Ok(normalize_zeros(&zm, &spec.scaling(n)))
}

pub fn sample(args: &SampleArgs) -> Result<()> {
    let config = RunConfig::new("sample", args);
    let spec = args.ensemble.resolve()?;
    let law = args.law.resolve()?;
    if args.n == 0 || args.seeds == 0 {
        bail!("--n and --seeds must be positive");
    }
    let radius = args.radius.unwrap_or_else(|| default_radius(&spec));
    for seed in args.seed..args.seed + args.seeds {
        let out = if args.seeds == 1 {
            args.out.clone()
        } else {
            with_suffix(&args.out, &format!("-seed{seed}"))
        };
        let zm = sample_zeros(&spec, &law, args.n, radius, args.tol, seed)?;
        let meta = config.meta(json!({
            "ensemble": spec,
            "law": law,
            "seed": seed,
            "scaling": spec.scaling(args.n).description,
        }));
        write_zeros(&out, &zm, &meta)?;
        let sidecar = match (&args.report, args.seeds) {
            (Some(r), 1) => r.clone(),
            (Some(r), _) => with_suffix(r, &format!("-seed{seed}")),
            (None, _) => out.with_extension("cert.json"),
        };
        let mut cert = zm.certificates_json();
        cert["meta"] = meta;
        write_json(&sidecar, &cert)?;
        println!(
            "{}: {} zeros (seed {seed})",
            out.display(),
            zm.total_multiplicity()
        );
    }
    Ok(())
}

pub fn predict(args: &PredictArgs) -> Result<()> {
    let config = RunConfig::new("predict", args);
    let spec = args.ensemble.resolve()?;
    let r0 = spec.validity_radius();
    if !(args.radius > 0.0 && args.radius < r0) {
        bail!(raf_core::Error::OutOfDomain {
            radius: args.radius,
            limit: r0
        });
    }
    if args.points == 0 {
        bail!("--points must be positive");
    }
    let mu = spec.limit_measure()?;
    let meta = config.meta(json!({ "ensemble": spec }));
    let mut w = create(&args.out)?;
    writeln!(w, "# {}", serde_json::to_string(&meta)?)?;
    writeln!(w, "r,radial_mass,density")?;
    for i in 1..=args.points {
        let r = args.radius * i as f64 / args.points as f64;
        // undefined on circle atoms and at the edge of the profile
        let density = mu
            .density(r)
            .map_or_else(|_| "nan".to_string(), |d| format!("{d:.16e}"));
        writeln!(w, "{r:.16e},{:.16e},{density}", mu.radial_mass(r))?;
    }
    w.flush()?;
    println!("{}: {} rows", args.out.display(), args.points);
    Ok(())
}

/// Pools zero files into one measure with summed normalizer.
fn pool(paths: &[PathBuf]) -> Result<(ZeroMeasure, Vec<u64>, Vec<Value>)> {
    let (mut zeros, mut n, mut trust) = (Vec::new(), 0usize, f64::INFINITY);
    let (mut seeds, mut metas) = (Vec::new(), Vec::new());
    for path in paths {
        let file = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
        let (zm, meta) = ZeroMeasure::read_csv(BufReader::new(file))?;
        if zm.zeros().is_empty() {
            bail!("{} holds no zeros", path.display());
        }
        zeros.extend_from_slice(zm.zeros());
        n += zm.n_normalizer();
        trust = trust.min(zm.trust_radius());
        seeds.extend(meta.get("seed").and_then(Value::as_u64));
        metas.push(meta);
    }
    Ok((ZeroMeasure::new(zeros, n, trust), seeds, metas))
}

fn report(
    zm: &ZeroMeasure,
    mu: &LimitMeasure,
    radius: f64,
    annulus: (f64, f64),
) -> Result<ComparisonReport> {
    let annuli: Vec<(f64, f64)> = (0..4)
        .map(|i| (radius * i as f64 / 4.0, radius * (i + 1) as f64 / 4.0))
        .collect();
    Ok(compare(zm, mu, radius, annulus, &annuli)?)
}

pub fn compare_cmd(args: &CompareArgs) -> Result<()> {
    let config = RunConfig::new("compare", args);
    let (mu, limit) = match &args.measure {
        Some(source) => (load_measure(source)?, json!({ "measure": source })),
        None => {
            let spec = args.ensemble.resolve()?;
            (spec.limit_measure()?, json!({ "ensemble": spec }))
        }
    };
    let annulus = match args.annulus.as_deref() {
        Some(&[lo, hi]) => (lo, hi),
        _ => (0.5 * args.radius, args.radius),
    };
    let (zm, seeds, inputs) = pool(&args.zeros)?;
    let mut rep = report(&zm, &mu, args.radius, annulus)?;
    rep.seeds = seeds;
    rep.parameters = config.meta(json!({ "limit": limit, "inputs": inputs }));
    let mut w = create(&args.report)?;
    writeln!(w, "{}", rep.to_json()?)?;
    w.flush()?;
    println!("{}: ks_radial {:.4}", args.report.display(), rep.ks_radial);
    Ok(())
}

pub fn demo(args: &DemoArgs) -> Result<()> {
    let config = RunConfig::new("demo", args);
    match args.name {
        DemoName::Szego => szego(args, &config),
        DemoName::Converse => converse(args, &config),
        DemoName::Universality => universality(args, &config),
    }
}

fn szego(args: &DemoArgs, config: &RunConfig) -> Result<()> {
    let n = args.n.unwrap_or(200);
    let deterministic = exp_partial_sum_zeros(n, &AberthOptions::default())?;
    let spec = EnsembleSpec::LoPoly {
        variant: LoVariant::Factorial,
        alpha: 1.0,
        beta: 0.0,
    };
    let randomized = sample_zeros(
        &spec,
        &CoeffLaw::ComplexGaussian,
        n,
        f64::INFINITY,
        1e-16,
        args.seed,
    )?;
    let (d_det, d_rand) = (
        szego_curve_distance(&deterministic),
        szego_curve_distance(&randomized),
    );
    let meta = config.meta(json!({ "n": n }));
    write_zeros(
        &args.out.join("szego_deterministic.csv"),
        &deterministic,
        &meta,
    )?;
    write_zeros(&args.out.join("szego_randomized.csv"), &randomized, &meta)?;
    write_json(
        &args.out.join("szego.json"),
        &json!({ "deterministic_distance": d_det, "randomized_distance": d_rand, "meta": meta }),
    )?;
    println!("mean distance to the Szego curve: deterministic {d_det:.4}, randomized {d_rand:.4}");
    Ok(())
}

fn converse(args: &DemoArgs, config: &RunConfig) -> Result<()> {
    let big_n = args.n.unwrap_or(200);
    let spec = EnsembleSpec::LoPoly {
        variant: LoVariant::Factorial,
        alpha: args.alpha,
        beta: args.beta,
    };
    spec.validate()?;
    let meta = config.meta(json!({ "ensemble": spec, "law": CoeffLaw::HeavyNoLogMoment }));
    let path = args.out.join("converse.csv");
    let mut w = create(&path)?;
    writeln!(w, "# {}", serde_json::to_string(&meta)?)?;
    writeln!(w, "n,max_modulus")?;
    let mut inside_half = Vec::new();
    for n in 1..=big_n {
        // one coefficient sequence shared by every degree
        let zm = sample_zeros(
            &spec,
            &CoeffLaw::HeavyNoLogMoment,
            n,
            f64::INFINITY,
            1e-16,
            args.seed,
        )?;
        let max = zm.zeros().iter().map(|z| z.z.norm()).fold(0.0, f64::max);
        writeln!(w, "{n},{max:.16e}")?;
        if max < 0.5 {
            inside_half.push(n);
        }
    }
    w.flush()?;
    write_json(
        &args.out.join("converse.json"),
        &json!({ "degrees_inside_half_disk": inside_half, "meta": meta }),
    )?;
    println!(
        "{}: {} of {big_n} degrees have every scaled zero in |z| < 0.5",
        path.display(),
        inside_half.len()
    );
    Ok(())
}

fn universality(args: &DemoArgs, config: &RunConfig) -> Result<()> {
    let n = args.n.unwrap_or(2000);
    let spec = EnsembleSpec::Flat { alpha: 0.5 };
    let mu = spec.limit_measure()?;
    for (tag, law) in [
        ("gaussian", CoeffLaw::ComplexGaussian),
        ("log_pareto", CoeffLaw::LogPareto { exponent: 4.0 }),
    ] {
        let zm = sample_zeros(&spec, &law, n, 1.0, 1e-16, args.seed)?;
        let meta = config.meta(json!({ "ensemble": spec, "law": law, "seed": args.seed }));
        write_zeros(
            &args.out.join(format!("universality_{tag}.csv")),
            &zm,
            &meta,
        )?;
        let mut rep = report(&zm, &mu, 1.0, (0.5, 1.0))?;
        rep.seeds = vec![args.seed];
        rep.parameters = meta;
        let path = args.out.join(format!("universality_{tag}.json"));
        let mut w = create(&path)?;
        writeln!(w, "{}", rep.to_json()?)?;
        w.flush()?;
        println!("{}: ks_radial {:.4}", path.display(), rep.ks_radial);
    }
    Ok(())
}

pub fn construct(args: &ConstructArgs) -> Result<()> {
    let config = RunConfig::new("construct", args);
    let mu = load_measure(&args.measure)?;
    let spec = construct_ensemble(&mu, args.n)?;
    write_json(
        &args.out,
        &json!({ "spec": spec, "meta": config.meta(json!({})) }),
    )?;
    println!(
        "{}: custom ensemble from {}",
        args.out.display(),
        args.measure
    );
    Ok(())
}
