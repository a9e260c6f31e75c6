//! Evaluation harness: speckle phantoms, the Pratt figure of merit, and the
//! table experiments that drive the CLI.
//!
//! Phantoms follow the variance-field recipe: a region image sets the local
//! scattering strength, each pixel draws an independent normal scaled by its
//! region level, the field is blurred with an anisotropic Gaussian
//! point-spread function, rectified, and white noise is added. The region
//! boundaries are the ground truth for scoring detectors.

use std::path::PathBuf;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Deserialize;

use crate::detector::{canny_baseline, detect_2d, DetectorParams, EdgeMap, Threshold};
use crate::error::{Error, Result};
use crate::raster::load_raster;
use crate::scale_filter::{
    audit, edge_focusing_oracle, filter_schedule, ConnectionReport, DecisionParams,
};
use crate::signal::{Image2D, ScaleSchedule, ScheduleKind};

/// Speckle phantom description.
#[derive(Debug, Clone)]
pub struct PhantomSpec {
    /// Region image: pixel value = scattering level of the region.
    pub region: Image2D,
    /// Point-spread widths in pixels: along rows (axial) and columns.
    pub psf_axial: f64,
    pub psf_lateral: f64,
    /// Additive white-noise standard deviation.
    pub noise_sigma: f64,
    pub seed: u64,
}

impl PhantomSpec {
    pub fn new(region: Image2D, seed: u64) -> Self {
        PhantomSpec {
            region,
            psf_axial: 2.0,
            psf_lateral: 4.0,
            noise_sigma: 0.05,
            seed,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.psf_axial > 0.0 && self.psf_lateral > 0.0) {
            return Err(Error::arg("point-spread widths must be positive"));
        }
        if !(self.noise_sigma >= 0.0) {
            return Err(Error::arg("noise sigma must be non-negative"));
        }
        Ok(())
    }
}

/// Diffuse scattering stage: region level times a circular complex
/// standard-normal draw per pixel, returned as (re, im) fields. The complex
/// variance `E|z|^2` of each pixel equals the squared region level; the
/// envelope after blurring is Rayleigh, the standard diffuse-speckle model.
fn scatter_field(region: &Image2D, rng: &mut ChaCha8Rng) -> (Vec<f64>, Vec<f64>) {
    let n = region.pixels().len();
    let mut re = Vec::with_capacity(n);
    let mut im = Vec::with_capacity(n);
    for &level in region.pixels() {
        let a: f64 = StandardNormal.sample(rng);
        let b: f64 = StandardNormal.sample(rng);
        re.push(level * a / std::f64::consts::SQRT_2);
        im.push(level * b / std::f64::consts::SQRT_2);
    }
    (re, im)
}

/// Separable Gaussian point-spread blur with mirror boundaries. Kernels are
/// normalized to unit energy, which preserves the variance of white input
/// fields, so region levels survive the blur as local speckle amplitudes.
fn gaussian_blur(data: &[f64], rows: usize, cols: usize, sr: f64, sc: f64) -> Vec<f64> {
    let kernel = |sigma: f64| -> Vec<f64> {
        let r = (4.0 * sigma).ceil() as i64;
        let mut k: Vec<f64> = (-r..=r)
            .map(|j| (-0.5 * (j as f64 / sigma).powi(2)).exp())
            .collect();
        let energy: f64 = k.iter().map(|v| v * v).sum::<f64>().sqrt();
        for v in &mut k {
            *v /= energy;
        }
        k
    };
    let mirror = |i: i64, n: usize| -> usize {
        let n = n as i64;
        let mut j = i;
        if j < 0 {
            j = -j;
        }
        if j >= n {
            j = 2 * n - 2 - j;
        }
        j as usize
    };
    let kc = kernel(sc);
    let rc = (kc.len() / 2) as i64;
    let mut tmp = vec![0.0; rows * cols];
    for r in 0..rows {
        for c in 0..cols {
            let mut acc = 0.0;
            for (off, &kv) in kc.iter().enumerate() {
                let src = mirror(c as i64 + off as i64 - rc, cols);
                acc += data[r * cols + src] * kv;
            }
            tmp[r * cols + c] = acc;
        }
    }
    let kr = kernel(sr);
    let rr = (kr.len() / 2) as i64;
    let mut out = vec![0.0; rows * cols];
    for r in 0..rows {
        for c in 0..cols {
            let mut acc = 0.0;
            for (off, &kv) in kr.iter().enumerate() {
                let src = mirror(r as i64 + off as i64 - rr, rows);
                acc += tmp[src * cols + c] * kv;
            }
            out[r * cols + c] = acc;
        }
    }
    out
}

/// Ground truth: single-sided region boundary, marking pixels whose right
/// or lower neighbor carries a different region level. This keeps the truth
/// one pixel thin, the usual convention for figure-of-merit scoring; a
/// double-sided marking would count every boundary twice and cap the merit
/// of a thin detector near one half.
fn region_boundaries(region: &Image2D) -> EdgeMap {
    let (rows, cols) = (region.rows(), region.cols());
    let mut pixels = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            let v = region.get(r, c);
            if (c + 1 < cols && region.get(r, c + 1) != v)
                || (r + 1 < rows && region.get(r + 1, c) != v)
            {
                pixels.push((r, c));
            }
        }
    }
    EdgeMap::from_pixels(rows, cols, pixels)
}

/// Generate a speckle phantom and its ground-truth edge map. Deterministic
/// for a given seed.
///
/// The image is `|scattering (*) PSF| + white noise`: the complex scattering
/// field is blurred per quadrature, rectified to its envelope, and white
/// Gaussian noise is added.
pub fn generate_phantom(spec: &PhantomSpec) -> Result<(Image2D, EdgeMap)> {
    spec.validate()?;
    let (rows, cols) = (spec.region.rows(), spec.region.cols());
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let (re, im) = scatter_field(&spec.region, &mut rng);
    let re = gaussian_blur(&re, rows, cols, spec.psf_axial, spec.psf_lateral);
    let im = gaussian_blur(&im, rows, cols, spec.psf_axial, spec.psf_lateral);
    let pixels: Vec<f64> = re
        .iter()
        .zip(&im)
        .map(|(&a, &b)| {
            let z: f64 = StandardNormal.sample(&mut rng);
            a.hypot(b) + spec.noise_sigma * z
        })
        .collect();
    Ok((
        Image2D::new(rows, cols, pixels)?,
        region_boundaries(&spec.region),
    ))
}

/// Map an envelope image to display form: logarithmic compression with a
/// dynamic-range floor at `floor_frac` of the peak, min-max normalized to
/// [0, 1]. Speckle contrast becomes level-independent under this transform,
/// which is how envelope images are normally rendered and analyzed.
pub fn log_compress(img: &Image2D, floor_frac: f64) -> Result<Image2D> {
    if !(floor_frac > 0.0) {
        return Err(Error::arg("log compression needs a positive floor"));
    }
    let peak = img
        .pixels()
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    if !(peak > 0.0) {
        return Err(Error::arg("image has no positive values to compress"));
    }
    let floor = floor_frac * peak;
    let vals: Vec<f64> = img
        .pixels()
        .iter()
        .map(|&v| (v.max(0.0) + floor).ln())
        .collect();
    let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let range = (hi - lo).max(f64::MIN_POSITIVE);
    Image2D::new(
        img.rows(),
        img.cols(),
        vals.iter().map(|v| (v - lo) / range).collect(),
    )
}

/// Pratt figure-of-merit parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FomParams {
    /// Displacement penalty; 0.11 keeps scores comparable across the
    /// literature.
    pub gamma: f64,
}

impl Default for FomParams {
    fn default() -> Self {
        FomParams { gamma: 0.11 }
    }
}

/// Squared Euclidean distance transform of a mask (distance to the nearest
/// set pixel), exact two-pass parabolic envelope.
fn squared_edt(mask: &[bool], rows: usize, cols: usize) -> Vec<f64> {
    const INF: f64 = 1e20;
    let mut grid: Vec<f64> = mask.iter().map(|&b| if b { 0.0 } else { INF }).collect();

    // 1-D squared-distance transform along one axis
    #[allow(clippy::needless_range_loop)]
    fn dt1d(f: &[f64], out: &mut Vec<f64>) {
        let n = f.len();
        out.clear();
        out.resize(n, 0.0);
        let mut v = vec![0usize; n];
        let mut z = vec![0.0f64; n + 1];
        let mut k = 0usize;
        v[0] = 0;
        z[0] = -1e30;
        z[1] = 1e30;
        for q in 1..n {
            let mut s;
            loop {
                let p = v[k];
                s = ((f[q] + (q * q) as f64) - (f[p] + (p * p) as f64)) / (2.0 * (q - p) as f64);
                if s <= z[k] {
                    if k == 0 {
                        break;
                    }
                    k -= 1;
                } else {
                    break;
                }
            }
            if s <= z[k] {
                // q dominates everywhere
                v[k] = q;
                z[k + 1] = 1e30;
            } else {
                k += 1;
                v[k] = q;
                z[k] = s;
                z[k + 1] = 1e30;
            }
        }
        let mut k = 0usize;
        for q in 0..n {
            while z[k + 1] < q as f64 {
                k += 1;
            }
            let p = v[k];
            let d = q as f64 - p as f64;
            out[q] = d * d + f[p];
        }
    }

    let mut buf_in = vec![0.0; rows.max(cols)];
    let mut buf_out = Vec::with_capacity(rows.max(cols));
    // columns
    for c in 0..cols {
        buf_in.resize(rows, 0.0);
        for r in 0..rows {
            buf_in[r] = grid[r * cols + c];
        }
        dt1d(&buf_in[..rows], &mut buf_out);
        for r in 0..rows {
            grid[r * cols + c] = buf_out[r];
        }
    }
    // rows
    for r in 0..rows {
        buf_in.resize(cols, 0.0);
        buf_in[..cols].copy_from_slice(&grid[r * cols..(r + 1) * cols]);
        dt1d(&buf_in[..cols], &mut buf_out);
        grid[r * cols..(r + 1) * cols].copy_from_slice(&buf_out[..cols]);
    }
    grid
}

/// Pratt figure of merit: `(1/max(n_p, n_d)) sum_i 1/(1 + gamma d_i^2)`
/// where `d_i` is the exact Euclidean distance from each detected pixel to
/// the nearest truth pixel.
pub fn fom(detected: &EdgeMap, truth: &EdgeMap, p: &FomParams) -> Result<f64> {
    if detected.rows() != truth.rows() || detected.cols() != truth.cols() {
        return Err(Error::arg("edge maps must share a shape"));
    }
    if !(p.gamma > 0.0) {
        return Err(Error::arg("gamma must be positive"));
    }
    let n_p = truth.count();
    if n_p == 0 {
        return Err(Error::arg("ground truth has no edge pixels"));
    }
    let n_d = detected.count();
    if n_d == 0 {
        return Ok(0.0);
    }
    let d2 = squared_edt(truth.mask(), truth.rows(), truth.cols());
    let sum: f64 = detected
        .pixels()
        .map(|(r, c)| 1.0 / (1.0 + p.gamma * d2[r * truth.cols() + c]))
        .sum();
    Ok(sum / n_p.max(n_d) as f64)
}

/// Shapes for building region images from a config file.
#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ShapeSpec {
    Disk {
        cx: f64,
        cy: f64,
        r: f64,
        level: f64,
    },
    Rect {
        x0: usize,
        y0: usize,
        x1: usize,
        y1: usize,
        level: f64,
    },
}

/// Region image description: a background level plus shapes painted in
/// order.
#[derive(Debug, Clone, Deserialize)]
pub struct PhantomLayout {
    pub width: usize,
    pub height: usize,
    pub background: f64,
    #[serde(default)]
    pub shapes: Vec<ShapeSpec>,
}

impl PhantomLayout {
    pub fn build_region(&self) -> Result<Image2D> {
        let mut px = vec![self.background; self.width * self.height];
        for shape in &self.shapes {
            match *shape {
                ShapeSpec::Disk { cx, cy, r, level } => {
                    for row in 0..self.height {
                        for col in 0..self.width {
                            let d = (row as f64 - cy).hypot(col as f64 - cx);
                            if d <= r {
                                px[row * self.width + col] = level;
                            }
                        }
                    }
                }
                ShapeSpec::Rect {
                    x0,
                    y0,
                    x1,
                    y1,
                    level,
                } => {
                    for row in y0..y1.min(self.height) {
                        for col in x0..x1.min(self.width) {
                            px[row * self.width + col] = level;
                        }
                    }
                }
            }
        }
        Image2D::new(self.height, self.width, px)
    }
}

fn default_alphas() -> Vec<f64> {
    vec![-0.5, 0.0, 0.5]
}

fn default_fraction() -> f64 {
    1.0
}

fn default_phantom_count() -> usize {
    2
}

fn default_psf() -> (f64, f64) {
    (2.0, 4.0)
}

fn default_noise() -> f64 {
    0.05
}

/// Threshold field of a config file: a number or the string "auto".
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum ThresholdField {
    Value(f64),
    Name(String),
}

fn default_threshold() -> ThresholdField {
    ThresholdField::Name("auto".into())
}

impl ThresholdField {
    fn resolve(&self) -> Result<Threshold> {
        match self {
            ThresholdField::Value(v) => Ok(Threshold::Manual(*v)),
            ThresholdField::Name(s) if s == "auto" => Ok(Threshold::Auto),
            ThresholdField::Name(s) => match s.strip_prefix("max:") {
                Some(frac) => frac
                    .parse()
                    .map(Threshold::MaxRelative)
                    .map_err(|_| Error::arg(format!("bad max-relative threshold {s:?}"))),
                None => Err(Error::arg(format!(
                    "threshold must be a number, \"auto\" or \"max:<frac>\", got {s:?}"
                ))),
            },
        }
    }
}

/// Which experiment a config file describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TableKind {
    /// False-connection audit over every horizontal cross-section.
    FalseConn,
    /// Figure of merit of the proposed detector against the baseline.
    Fom,
}

/// Experiment configuration (JSON).
#[derive(Debug, Clone, Deserialize)]
pub struct TableConfig {
    pub kind: TableKind,
    pub scales: Vec<f64>,
    /// Control parameters to evaluate; `alpha` with a single number is
    /// accepted too.
    #[serde(default = "default_alphas")]
    pub alphas: Vec<f64>,
    #[serde(default)]
    alpha: Option<f64>,
    #[serde(default = "default_threshold")]
    threshold: ThresholdField,
    #[serde(default = "default_fraction")]
    pub fraction: f64,
    pub seed: u64,
    #[serde(default = "default_psf")]
    pub psf: (f64, f64),
    #[serde(default = "default_noise")]
    pub noise_sigma: f64,
    /// Phantom layout; ignored when `input` points at a raster file.
    pub phantom: Option<PhantomLayout>,
    pub input: Option<PathBuf>,
    #[serde(default = "default_phantom_count")]
    pub phantom_count: usize,
    /// Display compression floor applied to generated phantoms before
    /// analysis (fraction of the envelope peak); `null` disables it.
    #[serde(default = "default_log_floor")]
    pub log_floor: Option<f64>,
}

fn default_log_floor() -> Option<f64> {
    Some(0.08)
}

impl TableConfig {
    pub fn parse(json: &str) -> Result<Self> {
        serde_json::from_str(json).map_err(|e| Error::arg(format!("bad config: {e}")))
    }

    fn schedule(&self) -> Result<ScaleSchedule> {
        ScaleSchedule::from_scales(self.scales.clone(), ScheduleKind::Dyadic)
    }

    /// The alpha sweep: a scalar `alpha` key overrides the `alphas` list.
    pub fn effective_alphas(&self) -> Vec<f64> {
        match self.alpha {
            Some(a) => vec![a],
            None => self.alphas.clone(),
        }
    }

    fn phantom_spec(&self, seed: u64) -> Result<PhantomSpec> {
        let layout = self
            .phantom
            .as_ref()
            .ok_or_else(|| Error::arg("experiment needs a phantom layout"))?;
        Ok(PhantomSpec {
            region: layout.build_region()?,
            psf_axial: self.psf.0,
            psf_lateral: self.psf.1,
            noise_sigma: self.noise_sigma,
            seed,
        })
    }

    fn display(&self, img: Image2D) -> Result<Image2D> {
        match self.log_floor {
            Some(floor) => log_compress(&img, floor),
            None => Ok(img),
        }
    }
}

/// One figure-of-merit comparison row.
#[derive(Debug, Clone, PartialEq)]
pub struct FomRow {
    pub phantom_seed: u64,
    pub proposed: f64,
    pub baseline: f64,
}

/// Result of a table experiment.
#[derive(Debug, Clone)]
pub enum TableReport {
    FalseConn(Vec<(f64, ConnectionReport)>),
    Fom(Vec<FomRow>),
}

impl TableReport {
    /// Render as CSV, metrics as rows and one column per parameter choice.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        match self {
            TableReport::FalseConn(rows) => {
                out.push_str("metric");
                for (alpha, _) in rows {
                    out.push_str(&format!(",alpha={alpha}"));
                }
                out.push('\n');
                out.push_str("false_connections_pct");
                for (_, rep) in rows {
                    out.push_str(&format!(",{:.2}", rep.false_pct()));
                }
                out.push('\n');
                out.push_str("spatial_error_px");
                for (_, rep) in rows {
                    out.push_str(&format!(",{:.2}", rep.mean_displacement()));
                }
                out.push('\n');
                if let Some((_, first)) = rows.first() {
                    for (i, pair) in first.pairs.iter().enumerate() {
                        out.push_str(&format!(
                            "false_connections_{}_{}",
                            pair.coarse_scale, pair.fine_scale
                        ));
                        for (_, rep) in rows {
                            out.push_str(&format!(",{:.2}", rep.pairs[i].false_pct()));
                        }
                        out.push('\n');
                    }
                }
            }
            TableReport::Fom(rows) => {
                out.push_str("phantom_seed,proposed,baseline\n");
                for row in rows {
                    out.push_str(&format!(
                        "{},{:.4},{:.4}\n",
                        row.phantom_seed, row.proposed, row.baseline
                    ));
                }
            }
        }
        out
    }
}

/// Audit the sparse filtering of every horizontal cross-section of `img`
/// against the dense edge-focusing reference, pooled over rows.
pub fn falseconn_experiment(
    img: &Image2D,
    sched: &ScaleSchedule,
    alphas: &[f64],
) -> Result<Vec<(f64, ConnectionReport)>> {
    let mut out = Vec::with_capacity(alphas.len());
    for &alpha in alphas {
        let params = DecisionParams::for_1d(alpha);
        let mut pooled: Option<ConnectionReport> = None;
        for r in 0..img.rows() {
            let row = img.extract_row(r)?;
            let truth = edge_focusing_oracle(&row, sched.coarsest(), sched.finest())?;
            let sparse = filter_schedule(&row, sched, &params)?;
            let report = audit(&sparse, &truth, sched)?;
            match &mut pooled {
                Some(p) => p.merge(&report)?,
                None => pooled = Some(report),
            }
        }
        out.push((
            alpha,
            pooled.ok_or_else(|| Error::arg("image has no rows"))?,
        ));
    }
    Ok(out)
}

/// Run the experiment described by a config file.
pub fn run_table_experiment(cfg: &TableConfig) -> Result<TableReport> {
    let sched = cfg.schedule()?;
    match cfg.kind {
        TableKind::FalseConn => {
            let img = match &cfg.input {
                Some(path) => load_raster(path)?,
                None => cfg.display(generate_phantom(&cfg.phantom_spec(cfg.seed)?)?.0)?,
            };
            Ok(TableReport::FalseConn(falseconn_experiment(
                &img,
                &sched,
                &cfg.effective_alphas(),
            )?))
        }
        TableKind::Fom => {
            let alpha = cfg.effective_alphas().first().copied().unwrap_or(0.5);
            let filter = DecisionParams::for_2d(alpha);
            let det = DetectorParams::new(cfg.threshold.resolve()?)
                .with_subsampling(cfg.fraction, cfg.seed)?;
            let mut rows = Vec::new();
            for i in 0..cfg.phantom_count {
                let seed = cfg.seed + i as u64;
                let (raw, truth) = generate_phantom(&cfg.phantom_spec(seed)?)?;
                let img = cfg.display(raw)?;
                let proposed = detect_2d(&img, &sched, &filter, &det)?;
                let baseline = canny_baseline(&img, sched.finest())?;
                rows.push(FomRow {
                    phantom_seed: seed,
                    proposed: fom(&proposed, &truth, &FomParams::default())?,
                    baseline: fom(&baseline, &truth, &FomParams::default())?,
                });
            }
            Ok(TableReport::Fom(rows))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn disk_layout(n: usize, r: f64, inner: f64, outer: f64) -> PhantomLayout {
        PhantomLayout {
            width: n,
            height: n,
            background: outer,
            shapes: vec![ShapeSpec::Disk {
                cx: n as f64 / 2.0,
                cy: n as f64 / 2.0,
                r,
                level: inner,
            }],
        }
    }

    #[test]
    fn scatter_variance_tracks_region_levels() {
        let region = disk_layout(128, 40.0, 0.8, 0.2).build_region().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let (re, im) = scatter_field(&region, &mut rng);
        let mut inside = Vec::new();
        let mut outside = Vec::new();
        for r in 0..128 {
            for c in 0..128 {
                let d = (r as f64 - 64.0).hypot(c as f64 - 64.0);
                let v2 = re[r * 128 + c].powi(2) + im[r * 128 + c].powi(2);
                if d < 34.0 {
                    inside.push(v2);
                } else if d > 46.0 {
                    outside.push(v2);
                }
            }
        }
        let var = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        assert!(
            (var(&inside) - 0.64).abs() < 0.05 * 0.64 + 0.01,
            "{}",
            var(&inside)
        );
        assert!(
            (var(&outside) - 0.04).abs() < 0.05 * 0.04 + 0.003,
            "{}",
            var(&outside)
        );
    }

    #[test]
    fn phantom_is_seed_deterministic() {
        let spec = PhantomSpec::new(disk_layout(64, 20.0, 0.8, 0.2).build_region().unwrap(), 5);
        let (a, ta) = generate_phantom(&spec).unwrap();
        let (b, tb) = generate_phantom(&spec).unwrap();
        assert_eq!(a, b);
        assert_eq!(ta.mask(), tb.mask());

        let spec2 = PhantomSpec { seed: 6, ..spec };
        let (c, _) = generate_phantom(&spec2).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn constant_region_has_empty_truth() {
        let region = Image2D::filled(32, 32, 0.5).unwrap();
        let spec = PhantomSpec {
            noise_sigma: 0.0,
            ..PhantomSpec::new(region, 1)
        };
        let (_, truth) = generate_phantom(&spec).unwrap();
        assert_eq!(truth.count(), 0);
    }

    #[test]
    fn fom_of_identical_maps_is_one() {
        let truth = EdgeMap::from_pixels(32, 32, [(4, 5), (10, 20), (31, 0)]);
        let v = fom(&truth, &truth, &FomParams::default()).unwrap();
        assert_eq!(v, 1.0);
    }

    #[test]
    fn fom_single_pixel_distance_formula() {
        let truth = EdgeMap::from_pixels(32, 32, [(10, 10)]);
        for (pos, d2) in [((10usize, 13usize), 9.0), ((14, 13), 25.0)] {
            let detected = EdgeMap::from_pixels(32, 32, [pos]);
            let v = fom(&detected, &truth, &FomParams::default()).unwrap();
            let want = 1.0 / (1.0 + 0.11 * d2);
            assert!((v - want).abs() < 1e-12, "{v} vs {want}");
        }
    }

    #[test]
    fn spurious_detection_decreases_fom() {
        let truth = EdgeMap::from_pixels(32, 32, [(10, 10), (10, 11), (10, 12)]);
        let exact = fom(&truth, &truth, &FomParams::default()).unwrap();
        let padded = EdgeMap::from_pixels(32, 32, [(10, 10), (10, 11), (10, 12), (25, 25)]);
        let worse = fom(&padded, &truth, &FomParams::default()).unwrap();
        assert!(worse < exact);
    }

    #[test]
    fn fom_rejects_empty_truth_and_shape_mismatch() {
        let empty = EdgeMap::new(16, 16);
        let some = EdgeMap::from_pixels(16, 16, [(1, 1)]);
        assert!(fom(&some, &empty, &FomParams::default()).is_err());
        let other = EdgeMap::new(16, 17);
        assert!(fom(&other, &some, &FomParams::default()).is_err());
    }

    #[test]
    fn edt_matches_brute_force() {
        let mask_pts = [(3usize, 4usize), (17, 2), (9, 25), (30, 30)];
        let truth = EdgeMap::from_pixels(32, 32, mask_pts);
        let d2 = squared_edt(truth.mask(), 32, 32);
        for r in (0..32).step_by(3) {
            for c in (0..32).step_by(3) {
                let brute = mask_pts
                    .iter()
                    .map(|&(mr, mc)| {
                        let dr = r as f64 - mr as f64;
                        let dc = c as f64 - mc as f64;
                        dr * dr + dc * dc
                    })
                    .fold(f64::INFINITY, f64::min);
                assert_eq!(d2[r * 32 + c], brute, "at ({r},{c})");
            }
        }
    }

    #[test]
    fn config_accepts_scalar_alpha() {
        let cfg = TableConfig::parse(
            r#"{"kind": "falseconn", "scales": [8, 4], "alpha": 0.25, "seed": 1}"#,
        )
        .unwrap();
        assert_eq!(cfg.effective_alphas(), vec![0.25]);
    }

    #[test]
    fn config_parses_with_defaults() {
        let cfg = TableConfig::parse(
            r#"{
                "kind": "fom",
                "scales": [32, 16, 8, 4],
                "seed": 7,
                "phantom": {
                    "width": 64, "height": 64, "background": 0.2,
                    "shapes": [{"kind": "disk", "cx": 32, "cy": 32, "r": 20, "level": 0.8}]
                }
            }"#,
        )
        .unwrap();
        assert_eq!(cfg.kind, TableKind::Fom);
        assert_eq!(cfg.alphas, vec![-0.5, 0.0, 0.5]);
        assert_eq!(cfg.fraction, 1.0);
        assert!(matches!(cfg.threshold.resolve().unwrap(), Threshold::Auto));
        let region = cfg.phantom.as_ref().unwrap().build_region().unwrap();
        assert_eq!(region.get(32, 32), 0.8);
        assert_eq!(region.get(0, 0), 0.2);
    }

    #[test]
    fn falseconn_on_clean_steps_is_zero() {
        // vertically constant rows, each a two-step staircase well inside
        // the reliable region
        let (rows, cols) = (8, 512);
        let mut px = vec![0.0; rows * cols];
        for r in 0..rows {
            for c in 0..cols {
                let mut v = 0.0;
                if c >= 200 {
                    v += 1.0;
                }
                if c >= 328 {
                    v += 2.0;
                }
                px[r * cols + c] = v;
            }
        }
        let img = Image2D::new(rows, cols, px).unwrap();
        let sched = ScaleSchedule::dyadic(4.0, 4).unwrap();
        let rows = falseconn_experiment(&img, &sched, &[0.5]).unwrap();
        assert_eq!(rows[0].1.total_false(), 0);
        assert!(rows[0].1.total_connections() > 0);
    }
}
