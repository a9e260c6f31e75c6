//! Command-line front end: pattern laboratory sweeps, filtering audits,
//! edge detection, phantom generation and figure-of-merit scoring.

use std::fs;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use wavedge::{
    canny_with_ratios, detect_2d, falseconn_experiment, fom, generate_phantom, load_raster,
    q_values, run_table_experiment, write_raster, DecisionMode, DecisionParams, DetectorParams,
    EdgeMap, FomParams, Image2D, PatternKind, PatternSpec, PhantomLayout, PhantomSpec,
    QSweepConfig, ScaleSchedule, ScheduleKind, TableConfig, TableReport, Threshold,
};

#[derive(Parser)]
#[command(
    name = "wavedge",
    version,
    about = "Multi-scale wavelet edge detection"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Reliability sweep of the decision function on the model patterns
    PatternLab(PatternLabArgs),
    /// Audit sparse scale filtering against dense edge focusing, per row
    FilterEval(FilterEvalArgs),
    /// Multi-scale edge detection on a raster image
    Detect(DetectArgs),
    /// Single-scale hysteresis baseline
    Canny(CannyArgs),
    /// Generate a speckle phantom and its ground-truth edges
    Phantom(PhantomArgs),
    /// Pratt figure of merit between a detected and a truth edge map
    Fom(FomArgs),
    /// Run a table experiment described by a JSON config
    Table(TableArgs),
}

#[derive(Args)]
struct PatternLabArgs {
    /// Pattern kind, 3 through 6
    #[arg(long)]
    kind: u8,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    alpha: f64,
    /// Decision function variant: full, distance, decay
    #[arg(long, default_value = "full")]
    mode: String,
    #[arg(long, default_value_t = 1.01)]
    a_min: f64,
    #[arg(long, default_value_t = 1.5)]
    a_max: f64,
    #[arg(long, default_value_t = 50)]
    a_steps: usize,
    /// Fixed B (patterns 4-6)
    #[arg(long, default_value_t = 0.5)]
    b: f64,
    /// Fixed beta (patterns 4-6)
    #[arg(long, default_value_t = 1.6)]
    beta: f64,
    /// Scale points per sweep
    #[arg(long, default_value_t = 50)]
    scale_steps: usize,
    /// Output CSV (stdout when omitted)
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Also trace the Q = 0 level curve over beta into this CSV
    #[arg(long)]
    level_curves: Option<PathBuf>,
    #[arg(long, default_value_t = 1.1)]
    beta_min: f64,
    #[arg(long, default_value_t = 2.0)]
    beta_max: f64,
    #[arg(long, default_value_t = 10)]
    beta_steps: usize,
}

#[derive(Args)]
struct FilterEvalArgs {
    /// Input raster (PGM or PNG)
    #[arg(long)]
    input: PathBuf,
    /// Dyadic scale schedule, coarse to fine
    #[arg(long, value_delimiter = ',', default_values_t = [32.0, 16.0, 8.0, 4.0])]
    scales: Vec<f64>,
    /// Control parameters to evaluate
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true,
          default_values_t = [-0.5, 0.0, 0.5])]
    alpha: Vec<f64>,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct DetectArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_delimiter = ',', default_values_t = [32.0, 16.0, 8.0, 4.0])]
    scales: Vec<f64>,
    #[arg(long, default_value_t = 0.5, allow_negative_numbers = true)]
    alpha: f64,
    /// Acceptance threshold: a number or "auto"
    #[arg(long, default_value = "auto")]
    threshold: String,
    /// Fraction of curve points traced to their maxima-lines
    #[arg(long, default_value_t = 0.1)]
    fraction: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Edge map output (PGM)
    #[arg(long)]
    out_edges: PathBuf,
    /// Curve scores output (CSV)
    #[arg(long)]
    out_scores: Option<PathBuf>,
}

#[derive(Args)]
struct CannyArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value_t = 4.0)]
    scale: f64,
    /// Low hysteresis threshold as a fraction of the peak modulus
    #[arg(long, default_value_t = 0.1)]
    low: f64,
    /// High hysteresis threshold as a fraction of the peak modulus
    #[arg(long, default_value_t = 0.3)]
    high: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct PhantomArgs {
    /// Phantom description (JSON)
    #[arg(long)]
    spec: PathBuf,
    /// Speckle image output (PGM, min-max normalized)
    #[arg(long)]
    out_image: PathBuf,
    /// Ground-truth edge map output (PGM)
    #[arg(long)]
    out_truth: PathBuf,
}

#[derive(Args)]
struct FomArgs {
    #[arg(long)]
    detected: PathBuf,
    #[arg(long)]
    truth: PathBuf,
    #[arg(long, default_value_t = 0.11)]
    gamma: f64,
}

#[derive(Args)]
struct TableArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

/// Phantom file format: a region layout plus acquisition parameters.
#[derive(Deserialize)]
struct PhantomFile {
    #[serde(flatten)]
    layout: PhantomLayout,
    #[serde(default = "default_psf")]
    psf: (f64, f64),
    #[serde(default = "default_noise")]
    noise_sigma: f64,
    #[serde(default)]
    seed: u64,
}

fn default_psf() -> (f64, f64) {
    (2.0, 4.0)
}

fn default_noise() -> f64 {
    0.05
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::PatternLab(args) => pattern_lab(args),
        Command::FilterEval(args) => filter_eval(args),
        Command::Detect(args) => detect(args),
        Command::Canny(args) => canny(args),
        Command::Phantom(args) => phantom(args),
        Command::Fom(args) => fom_cmd(args),
        Command::Table(args) => table(args),
    }
}

fn emit(path: &Option<PathBuf>, content: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, content).with_context(|| format!("writing {}", p.display()))?,
        None => print!("{content}"),
    }
    Ok(())
}

fn parse_mode(mode: &str) -> Result<DecisionMode> {
    Ok(match mode {
        "full" => DecisionMode::Full,
        "distance" => DecisionMode::DistanceOnly,
        "decay" => DecisionMode::DecayOnly,
        other => bail!("unknown mode {other:?}; use full, distance or decay"),
    })
}

fn parse_threshold(t: &str) -> Result<Threshold> {
    if t == "auto" {
        Ok(Threshold::Auto)
    } else if let Some(frac) = t.strip_prefix("max:") {
        Ok(Threshold::MaxRelative(frac.parse().context("threshold")?))
    } else {
        Ok(Threshold::Manual(t.parse().context("threshold")?))
    }
}

fn make_spec(kind: PatternKind, a: f64, b: f64, beta: f64) -> Result<PatternSpec> {
    Ok(match kind {
        PatternKind::Staircase => PatternSpec::staircase(a)?,
        PatternKind::Triplet => PatternSpec::triplet(a, b, beta)?,
        PatternKind::WeakTriplet => PatternSpec::weak_triplet(a, b, beta)?,
        PatternKind::Notch => PatternSpec::notch(a, b, beta)?,
        _ => bail!("pattern-lab expects kinds 3 through 6"),
    })
}

fn pattern_lab(args: PatternLabArgs) -> Result<()> {
    let kind = PatternKind::from_index(args.kind)
        .with_context(|| format!("bad pattern kind {}", args.kind))?;
    let cfg = QSweepConfig {
        alpha: args.alpha,
        mode: parse_mode(&args.mode)?,
        n_scales: args.scale_steps,
        ..QSweepConfig::default()
    };

    let mut csv = String::from("kind,alpha,A,B,beta,Q1,Q0\n");
    for i in 0..args.a_steps {
        let a =
            args.a_min + (args.a_max - args.a_min) * i as f64 / (args.a_steps - 1).max(1) as f64;
        let spec = match make_spec(kind, a, args.b, args.beta) {
            Ok(s) => s,
            Err(_) => continue, // outside the validity range
        };
        match q_values(&spec, &cfg) {
            Ok(q) => csv.push_str(&format!(
                "{},{},{:.6},{:.6},{:.6},{:.6},{:.6}\n",
                args.kind, args.alpha, a, args.b, args.beta, q.q1, q.q0
            )),
            Err(_) => continue,
        }
    }
    emit(&args.output, &csv)?;

    if let Some(path) = args.level_curves {
        // for each beta, bisect the amplitude where min(Q1, Q0) crosses 0
        let mut csv = String::from("kind,alpha,beta,B,amp_at_zero\n");
        for i in 0..args.beta_steps {
            let beta = args.beta_min
                + (args.beta_max - args.beta_min) * i as f64 / (args.beta_steps - 1).max(1) as f64;
            let q_of = |amp: f64| -> Option<f64> {
                let spec = match kind {
                    PatternKind::Staircase => PatternSpec::staircase(amp).ok()?,
                    PatternKind::Triplet => PatternSpec::triplet(args.a_max, amp, beta).ok()?,
                    _ => make_spec(kind, amp, args.b, beta).ok()?,
                };
                q_values(&spec, &cfg).ok().map(|q| q.min())
            };
            if let Some(amp) = bisect_zero(q_of) {
                csv.push_str(&format!(
                    "{},{},{:.4},{:.4},{:.6}\n",
                    args.kind, args.alpha, beta, args.b, amp
                ));
            }
        }
        fs::write(&path, csv)?;
    }
    Ok(())
}

/// Largest amplitude below which the margin stays positive.
fn bisect_zero(q_of: impl Fn(f64) -> Option<f64>) -> Option<f64> {
    let mut lo: Option<f64> = None;
    let mut hi: Option<f64> = None;
    let mut amp = 0.05;
    while amp < 30.0 {
        match q_of(amp) {
            Some(v) if v > 0.0 => lo = Some(amp),
            Some(_) if lo.is_some() => {
                hi = Some(amp);
                break;
            }
            _ => {}
        }
        amp *= 1.25;
    }
    let (mut lo, mut hi) = (lo?, hi?);
    for _ in 0..30 {
        let mid = 0.5 * (lo + hi);
        match q_of(mid) {
            Some(v) if v > 0.0 => lo = mid,
            _ => hi = mid,
        }
    }
    Some(0.5 * (lo + hi))
}

fn filter_eval(args: FilterEvalArgs) -> Result<()> {
    let img = load_raster(&args.input)?;
    let sched = ScaleSchedule::from_scales(args.scales, ScheduleKind::Dyadic)?;
    let rows = falseconn_experiment(&img, &sched, &args.alpha)?;
    let report = TableReport::FalseConn(rows);
    emit(&args.output, &report.to_csv())
}

fn detect(args: DetectArgs) -> Result<()> {
    let img = load_raster(&args.input)?;
    let sched = ScaleSchedule::from_scales(args.scales, ScheduleKind::Dyadic)?;
    let filter = DecisionParams::for_2d(args.alpha);
    let det = DetectorParams::new(parse_threshold(&args.threshold)?)
        .with_subsampling(args.fraction, args.seed)?;
    let map = detect_2d(&img, &sched, &filter, &det)?;
    write_raster(&map.to_image()?, &args.out_edges)?;
    if let Some(path) = args.out_scores {
        let mut csv = String::from("curve_id,score\n");
        for (id, s) in map.provenance() {
            csv.push_str(&format!("{id},{s:.4}\n"));
        }
        fs::write(path, csv)?;
    }
    eprintln!(
        "{} edge pixels in {} curves",
        map.count(),
        map.provenance().len()
    );
    Ok(())
}

fn canny(args: CannyArgs) -> Result<()> {
    let img = load_raster(&args.input)?;
    let map = canny_with_ratios(&img, args.scale, args.low, args.high)?;
    write_raster(&map.to_image()?, &args.out)?;
    eprintln!("{} edge pixels", map.count());
    Ok(())
}

fn phantom(args: PhantomArgs) -> Result<()> {
    let text = fs::read_to_string(&args.spec)
        .with_context(|| format!("reading {}", args.spec.display()))?;
    let file: PhantomFile = serde_json::from_str(&text).context("parsing phantom spec")?;
    let spec = PhantomSpec {
        region: file.layout.build_region()?,
        psf_axial: file.psf.0,
        psf_lateral: file.psf.1,
        noise_sigma: file.noise_sigma,
        seed: file.seed,
    };
    let (img, truth) = generate_phantom(&spec)?;
    write_raster(&normalize(&img)?, &args.out_image)?;
    write_raster(&truth.to_image()?, &args.out_truth)?;
    Ok(())
}

/// Min-max normalize to [0, 1] for export.
fn normalize(img: &Image2D) -> Result<Image2D> {
    let lo = img.pixels().iter().copied().fold(f64::INFINITY, f64::min);
    let hi = img
        .pixels()
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    let range = (hi - lo).max(f64::MIN_POSITIVE);
    Image2D::new(
        img.rows(),
        img.cols(),
        img.pixels().iter().map(|v| (v - lo) / range).collect(),
    )
    .map_err(Into::into)
}

/// Read a PGM/PNG edge map: pixels above one half count as edges.
fn mask_from_raster(path: &PathBuf) -> Result<EdgeMap> {
    let img = load_raster(path)?;
    let pixels = (0..img.rows())
        .flat_map(|r| (0..img.cols()).map(move |c| (r, c)))
        .filter(|&(r, c)| img.get(r, c) > 0.5);
    Ok(EdgeMap::from_pixels(img.rows(), img.cols(), pixels))
}

fn fom_cmd(args: FomArgs) -> Result<()> {
    let detected = mask_from_raster(&args.detected)?;
    let truth = mask_from_raster(&args.truth)?;
    let v = fom(&detected, &truth, &FomParams { gamma: args.gamma })?;
    println!("{v:.4}");
    Ok(())
}

fn table(args: TableArgs) -> Result<()> {
    let text = fs::read_to_string(&args.config)
        .with_context(|| format!("reading {}", args.config.display()))?;
    let cfg = TableConfig::parse(&text)?;
    let report = run_table_experiment(&cfg)?;
    emit(&args.output, &report.to_csv())
}
