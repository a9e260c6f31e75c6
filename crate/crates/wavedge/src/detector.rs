//! Edge detection on top of maxima-lines.
//!
//! Every maxima-line gets a relevance `R = sum mu(s) |W|` over its entries;
//! an edge is significant when the line behind it scores high across the
//! whole scale range, which separates real structure from noise that only
//! lives at fine scales. In 2-D the finest-scale maxima are chained into
//! boundary curves and each curve scores
//! `S = (curve length) * average(R over its points)`; the average may be
//! taken over a small random subset of the points, which barely moves `S`
//! but skips most of the line tracing work.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::cwt::cwt2d;
use crate::error::{Error, Result};
use crate::modmax::{chain_curves, detect2d, BoundaryCurve, ModMax2d};
use crate::scale_filter::{
    decision_2d, filter_schedule, DecisionParams, MaximaLine1d, MaximaLine2d,
};
use crate::signal::{Image2D, ScaleSchedule, Signal1D};

/// Acceptance threshold for relevance/curve scores.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Threshold {
    Manual(f64),
    /// Accept everything above the largest gap in the sorted log-scores;
    /// scores of noise cluster low, real edges sit isolated above them.
    Auto,
    /// Accept scores above this fraction of the maximum score; the same
    /// peak-relative convention the hysteresis baseline uses.
    MaxRelative(f64),
}

/// Optional scale weight for the relevance sum.
pub type ScaleWeight = fn(f64) -> f64;

/// Detector configuration.
#[derive(Debug, Clone, Copy)]
pub struct DetectorParams {
    pub threshold: Threshold,
    /// Fraction of curve points traced to their maxima-line, in (0, 1].
    pub subsample_fraction: f64,
    pub seed: u64,
    /// Scale weight `mu(s)`; `None` means constant 1.
    pub weight: Option<ScaleWeight>,
}

impl DetectorParams {
    pub fn new(threshold: Threshold) -> Self {
        DetectorParams {
            threshold,
            subsample_fraction: 1.0,
            seed: 0,
            weight: None,
        }
    }

    pub fn with_subsampling(mut self, fraction: f64, seed: u64) -> Result<Self> {
        if !(fraction > 0.0 && fraction <= 1.0) {
            return Err(Error::arg("subsample fraction must lie in (0, 1]"));
        }
        self.subsample_fraction = fraction;
        self.seed = seed;
        Ok(self)
    }
}

/// A binary edge map plus the scores of the items that produced it.
#[derive(Debug, Clone)]
pub struct EdgeMap {
    rows: usize,
    cols: usize,
    mask: Vec<bool>,
    /// Accepted (id, score) pairs: line ids in 1-D, curve ids in 2-D,
    /// component ids for the hysteresis baseline.
    provenance: Vec<(u32, f64)>,
}

impl EdgeMap {
    pub fn new(rows: usize, cols: usize) -> Self {
        EdgeMap {
            rows,
            cols,
            mask: vec![false; rows * cols],
            provenance: Vec::new(),
        }
    }

    /// Build from an explicit pixel set (used for ground-truth masks).
    pub fn from_pixels(
        rows: usize,
        cols: usize,
        pixels: impl IntoIterator<Item = (usize, usize)>,
    ) -> Self {
        let mut map = EdgeMap::new(rows, cols);
        for (r, c) in pixels {
            map.set(r, c);
        }
        map
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn provenance(&self) -> &[(u32, f64)] {
        &self.provenance
    }

    #[inline]
    pub fn contains(&self, r: usize, c: usize) -> bool {
        self.mask[r * self.cols + c]
    }

    fn set(&mut self, r: usize, c: usize) {
        self.mask[r * self.cols + c] = true;
    }

    /// Number of marked pixels.
    pub fn count(&self) -> usize {
        self.mask.iter().filter(|&&b| b).count()
    }

    /// Marked pixels as (row, col).
    pub fn pixels(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.mask
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(i, _)| (i / self.cols, i % self.cols))
    }

    /// Render as a black/white image (edges white).
    pub fn to_image(&self) -> Result<Image2D> {
        Image2D::new(
            self.rows,
            self.cols,
            self.mask
                .iter()
                .map(|&b| if b { 1.0 } else { 0.0 })
                .collect(),
        )
    }
}

/// Relevance of a 1-D maxima-line: `sum mu(s) |W|` over its entries.
pub fn relevance(line: &MaximaLine1d, weight: Option<ScaleWeight>) -> f64 {
    line.entries
        .iter()
        .map(|e| weight.map_or(1.0, |w| w(e.scale)) * e.value.abs())
        .sum()
}

/// Relevance of a 2-D maxima-line.
pub fn relevance_2d(line: &MaximaLine2d, weight: Option<ScaleWeight>) -> f64 {
    line.entries
        .iter()
        .map(|e| weight.map_or(1.0, |w| w(e.scale)) * e.value)
        .sum()
}

/// Curve score: point count times the mean relevance of the sampled points.
pub fn curve_score(curve: &BoundaryCurve, sampled_relevance: &[f64]) -> Result<f64> {
    if curve.is_empty() || sampled_relevance.is_empty() {
        return Err(Error::arg("curve score needs a non-empty sample"));
    }
    let mean = sampled_relevance.iter().sum::<f64>() / sampled_relevance.len() as f64;
    Ok(curve.len() as f64 * mean)
}

/// Pick the acceptance threshold from scores (manual, or largest log-gap).
fn resolve_threshold(threshold: Threshold, scores: &[f64]) -> f64 {
    match threshold {
        Threshold::Manual(t) => t,
        Threshold::MaxRelative(frac) => frac * scores.iter().copied().fold(0.0f64, f64::max),
        Threshold::Auto => {
            let mut sorted: Vec<f64> = scores.iter().copied().filter(|s| *s > 0.0).collect();
            sorted.sort_by(|a, b| b.total_cmp(a));
            if sorted.len() < 2 {
                return 0.0; // accept whatever exists
            }
            let logs: Vec<f64> = sorted.iter().map(|s| s.ln()).collect();
            let mut best_gap = f64::NEG_INFINITY;
            let mut cut = 0.0;
            for w in logs.windows(2) {
                let gap = w[0] - w[1];
                if gap > best_gap {
                    best_gap = gap;
                    cut = 0.5 * (w[0] + w[1]);
                }
            }
            cut.exp()
        }
    }
}

/// 1-D detection: lines reaching the finest scale with `R > T` mark their
/// finest-scale position.
pub fn detect_1d(
    f: &Signal1D,
    sched: &ScaleSchedule,
    filter: &DecisionParams,
    det: &DetectorParams,
) -> Result<EdgeMap> {
    let lines = filter_schedule(f, sched, filter)?;
    let finest = sched.finest();
    let complete: Vec<&MaximaLine1d> = lines.iter().filter(|l| l.tip().scale == finest).collect();
    let scores: Vec<f64> = complete.iter().map(|l| relevance(l, det.weight)).collect();
    let t = resolve_threshold(det.threshold, &scores);
    let mut map = EdgeMap::new(1, f.len());
    for (line, &r) in complete.iter().zip(&scores) {
        if r > t {
            map.set(0, line.tip().pos);
            map.provenance.push((line.id, r));
        }
    }
    Ok(map)
}

/// Trace one finest-scale maximum up through the coarser levels, picking at
/// each step the windowed coarse candidate that maximizes the decision
/// function. Returns the line coarse-to-fine; it ends early (on the coarse
/// side) when no admissible parent exists.
fn trace_up(
    levels: &[Vec<ModMax2d>],
    seed_level: usize,
    seed_idx: usize,
    p: &DecisionParams,
) -> MaximaLine2d {
    let mut chain = vec![levels[seed_level][seed_idx]];
    for coarse_level in (0..seed_level).rev() {
        let current = *chain.last().unwrap();
        let window = p.window_factor * current.scale;
        let coarse = &levels[coarse_level];
        let win_rows = window.ceil() as i64;
        let r_lo = (current.row as i64 - win_rows).max(0) as usize;
        let r_hi = current.row + win_rows as usize + 1;
        let lo = coarse.partition_point(|m| m.row < r_lo);
        let hi = coarse.partition_point(|m| m.row < r_hi);
        let mut best: Option<(f64, f64, usize)> = None;
        for (idx, n) in coarse[lo..hi].iter().enumerate().map(|(i, m)| (lo + i, m)) {
            let dist = n.distance_to(&current);
            if dist > window {
                continue;
            }
            let score = decision_2d(n, &current, p);
            if score <= 0.0 {
                continue;
            }
            let better = match &best {
                None => true,
                Some((bs, bd, bi)) => {
                    score > *bs || (score == *bs && (dist < *bd || (dist == *bd && idx < *bi)))
                }
            };
            if better {
                best = Some((score, dist, idx));
            }
        }
        match best {
            Some((_, _, idx)) => chain.push(coarse[idx]),
            None => break,
        }
    }
    chain.reverse();
    MaximaLine2d {
        id: 0,
        entries: chain,
    }
}

/// 2-D detection: chain the finest-scale maxima into boundary curves, score
/// each curve from a seeded random subset of its points, and keep curves
/// with `S > T`.
pub fn detect_2d(
    img: &Image2D,
    sched: &ScaleSchedule,
    filter: &DecisionParams,
    det: &DetectorParams,
) -> Result<EdgeMap> {
    let levels: Vec<Vec<ModMax2d>> = sched
        .scales()
        .iter()
        .map(|&s| Ok(detect2d(&cwt2d(img, s)?)))
        .collect::<Result<_>>()?;
    let finest_level = levels.len() - 1;
    let curves = chain_curves(&levels[finest_level]);

    // index of each finest-scale maximum for seed lookup
    use std::collections::HashMap;
    let index_of: HashMap<(usize, usize), usize> = levels[finest_level]
        .iter()
        .enumerate()
        .map(|(i, m)| ((m.row, m.col), i))
        .collect();

    let mut scores = Vec::with_capacity(curves.len());
    for curve in &curves {
        let k = (det.subsample_fraction * curve.len() as f64).ceil() as usize;
        let k = k.clamp(1, curve.len());
        let mut rng = ChaCha8Rng::seed_from_u64(det.seed);
        rng.set_stream(curve.id as u64);
        let picks = rand::seq::index::sample(&mut rng, curve.len(), k);
        let sampled: Vec<f64> = picks
            .iter()
            .map(|pi| {
                let m = &curve.points[pi];
                let idx = index_of[&(m.row, m.col)];
                let line = trace_up(&levels, finest_level, idx, filter);
                relevance_2d(&line, det.weight)
            })
            .collect();
        scores.push(curve_score(curve, &sampled)?);
    }

    let t = resolve_threshold(det.threshold, &scores);
    let mut map = EdgeMap::new(img.rows(), img.cols());
    for (curve, &s) in curves.iter().zip(&scores) {
        if s > t {
            for m in &curve.points {
                map.set(m.row, m.col);
            }
            map.provenance.push((curve.id, s));
        }
    }
    Ok(map)
}

/// Single-scale baseline: modulus maxima at scale `s`, kept by hysteresis
/// with `T_low = 0.1 max|Wf|` and `T_high = 0.3 max|Wf|`.
pub fn canny_baseline(img: &Image2D, s: f64) -> Result<EdgeMap> {
    canny_with_ratios(img, s, 0.1, 0.3)
}

/// Hysteresis baseline with explicit threshold ratios relative to the
/// maximum modulus of the plane.
pub fn canny_with_ratios(img: &Image2D, s: f64, low: f64, high: f64) -> Result<EdgeMap> {
    if !(0.0 <= low && low <= high) {
        return Err(Error::arg("need 0 <= low <= high"));
    }
    let plane = cwt2d(img, s)?;
    let maxima = detect2d(&plane);
    let peak = plane.modulus().iter().fold(0.0f64, |m, v| m.max(*v));
    let t_low = low * peak;
    let t_high = high * peak;

    use std::collections::HashMap;
    let candidates: Vec<&ModMax2d> = maxima.iter().filter(|m| m.value >= t_low).collect();
    let by_pos: HashMap<(usize, usize), usize> = candidates
        .iter()
        .enumerate()
        .map(|(i, m)| ((m.row, m.col), i))
        .collect();

    // 8-connected components over the low-threshold survivors
    let mut comp = vec![usize::MAX; candidates.len()];
    let mut n_comp = 0;
    for start in 0..candidates.len() {
        if comp[start] != usize::MAX {
            continue;
        }
        let mut stack = vec![start];
        comp[start] = n_comp;
        while let Some(i) = stack.pop() {
            let m = candidates[i];
            for dr in -1i64..=1 {
                for dc in -1i64..=1 {
                    let (r, c) = (m.row as i64 + dr, m.col as i64 + dc);
                    if r < 0 || c < 0 {
                        continue;
                    }
                    if let Some(&j) = by_pos.get(&(r as usize, c as usize)) {
                        if comp[j] == usize::MAX {
                            comp[j] = n_comp;
                            stack.push(j);
                        }
                    }
                }
            }
        }
        n_comp += 1;
    }

    let mut keep = vec![false; n_comp];
    let mut strength = vec![0.0f64; n_comp];
    for (i, m) in candidates.iter().enumerate() {
        strength[comp[i]] = strength[comp[i]].max(m.value);
        if m.value >= t_high {
            keep[comp[i]] = true;
        }
    }

    let mut map = EdgeMap::new(img.rows(), img.cols());
    for (i, m) in candidates.iter().enumerate() {
        if keep[comp[i]] {
            map.set(m.row, m.col);
        }
    }
    for c in 0..n_comp {
        if keep[c] {
            map.provenance.push((c as u32, strength[c]));
        }
    }
    Ok(map)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cwt::PI_QUARTER_INV;
    use crate::modmax::ModMax2d;

    fn step_signal(n: usize, at: usize) -> Signal1D {
        Signal1D::new((0..n).map(|i| if i >= at { 1.0 } else { 0.0 }).collect()).unwrap()
    }

    #[test]
    fn curve_score_is_length_times_mean() {
        let curve = BoundaryCurve {
            id: 0,
            points: (0..10)
                .map(|i| ModMax2d {
                    row: 5,
                    col: i,
                    scale: 4.0,
                    value: 1.0,
                    angle: 0.0,
                })
                .collect(),
        };
        assert_eq!(curve_score(&curve, &[2.0, 2.0, 2.0]).unwrap(), 20.0);
        assert!(curve_score(&curve, &[]).is_err());
    }

    #[test]
    fn relevance_sums_weighted_values() {
        use crate::modmax::ModMax1d;
        let line = MaximaLine1d {
            id: 0,
            entries: vec![ModMax1d {
                pos: 5,
                scale: 8.0,
                value: -3.0,
            }],
        };
        assert_eq!(relevance(&line, None), 3.0);
        assert_eq!(relevance(&line, Some(|_s| 0.0)), 0.0);
        assert_eq!(relevance(&line, Some(|s| s)), 24.0);
    }

    #[test]
    fn step_relevance_matches_closed_form() {
        // R over {32,16,8,4} for a unit step: sum of sqrt(2 s) pi^(-1/4)
        let f = step_signal(1024, 512);
        let sched = ScaleSchedule::dyadic(4.0, 4).unwrap();
        let lines = filter_schedule(&f, &sched, &DecisionParams::for_1d(0.5)).unwrap();
        assert_eq!(lines.len(), 1);
        let r = relevance(&lines[0], None);
        let want: f64 = [32.0f64, 16.0, 8.0, 4.0]
            .iter()
            .map(|s| (2.0 * s).sqrt() * PI_QUARTER_INV)
            .sum();
        assert!(
            (r - want).abs() / want < 0.01,
            "R = {r}, closed form {want}"
        );
    }

    #[test]
    fn detect_1d_thresholds_the_step() {
        let f = step_signal(1024, 512);
        let sched = ScaleSchedule::dyadic(4.0, 4).unwrap();
        let filter = DecisionParams::for_1d(0.5);
        // R ~ 10.2; a threshold below accepts, above rejects
        let map = detect_1d(
            &f,
            &sched,
            &filter,
            &DetectorParams::new(Threshold::Manual(5.0)),
        )
        .unwrap();
        assert_eq!(map.count(), 1);
        let (r, c) = map.pixels().next().unwrap();
        assert_eq!(r, 0);
        assert!(c == 511 || c == 512);

        let map = detect_1d(
            &f,
            &sched,
            &filter,
            &DetectorParams::new(Threshold::Manual(50.0)),
        )
        .unwrap();
        assert_eq!(map.count(), 0);
    }

    #[test]
    fn threshold_monotonicity() {
        // staircase signal with two edges of different strength
        let f = Signal1D::new(
            (0..1024)
                .map(|i| {
                    let mut v = 0.0;
                    if i >= 400 {
                        v += 0.3;
                    }
                    if i >= 620 {
                        v += 1.0;
                    }
                    v
                })
                .collect(),
        )
        .unwrap();
        let sched = ScaleSchedule::dyadic(4.0, 4).unwrap();
        let filter = DecisionParams::for_1d(0.5);
        let count_at = |t: f64| {
            detect_1d(
                &f,
                &sched,
                &filter,
                &DetectorParams::new(Threshold::Manual(t)),
            )
            .unwrap()
            .count()
        };
        let (lo, mid, hi) = (count_at(1.0), count_at(5.0), count_at(50.0));
        assert!(lo >= mid && mid >= hi, "{lo} >= {mid} >= {hi}");
        assert_eq!(lo, 2);
        assert_eq!(hi, 0);
    }

    fn disk_image(n: usize, r: f64) -> Image2D {
        let ctr = n as f64 / 2.0;
        let px = (0..n * n)
            .map(|i| {
                let (row, col) = (i / n, i % n);
                let d = ((row as f64 - ctr).powi(2) + (col as f64 - ctr).powi(2)).sqrt();
                if d <= r {
                    1.0
                } else {
                    0.0
                }
            })
            .collect();
        Image2D::new(n, n, px).unwrap()
    }

    #[test]
    fn noise_free_disk_detects_one_curve() {
        let img = disk_image(160, 50.0);
        let sched = ScaleSchedule::dyadic(4.0, 3).unwrap();
        let filter = DecisionParams::for_2d(0.5);
        // chaining may leave short fragments of the ring; a threshold above
        // their scores keeps exactly the dominant circle curve
        let det = DetectorParams::new(Threshold::Manual(1500.0));
        let map = detect_2d(&img, &sched, &filter, &det).unwrap();
        assert_eq!(map.provenance().len(), 1, "one dominant curve accepted");
        assert!(map.count() > 200);

        // the auto threshold lands in the same gap
        let auto = detect_2d(&img, &sched, &filter, &DetectorParams::new(Threshold::Auto)).unwrap();
        assert_eq!(auto.provenance().len(), 1);
        // every marked pixel is a finest-scale modulus maximum
        let finest = detect2d(&cwt2d(&img, 4.0).unwrap());
        let set: std::collections::HashSet<(usize, usize)> =
            finest.iter().map(|m| (m.row, m.col)).collect();
        for px in map.pixels() {
            assert!(set.contains(&px));
        }
    }

    #[test]
    fn blank_image_detects_nothing() {
        let img = Image2D::filled(128, 128, 0.5).unwrap();
        let sched = ScaleSchedule::dyadic(4.0, 3).unwrap();
        let map = detect_2d(
            &img,
            &sched,
            &DecisionParams::for_2d(0.5),
            &DetectorParams::new(Threshold::Auto),
        )
        .unwrap();
        assert_eq!(map.count(), 0);
        let map = canny_baseline(&img, 4.0).unwrap();
        assert_eq!(map.count(), 0);
    }

    #[test]
    fn subsampling_is_seed_deterministic() {
        let img = disk_image(128, 40.0);
        let sched = ScaleSchedule::dyadic(4.0, 3).unwrap();
        let filter = DecisionParams::for_2d(0.5);
        let det = DetectorParams::new(Threshold::Auto)
            .with_subsampling(0.25, 7)
            .unwrap();
        let a = detect_2d(&img, &sched, &filter, &det).unwrap();
        let b = detect_2d(&img, &sched, &filter, &det).unwrap();
        assert_eq!(a.provenance(), b.provenance());
        assert_eq!(a.mask(), b.mask());
    }

    #[test]
    fn auto_threshold_picks_largest_log_gap() {
        let scores = [100.0, 90.0, 0.5, 0.4, 0.3];
        let t = resolve_threshold(Threshold::Auto, &scores);
        assert!(t > 0.5 && t < 90.0, "cut at {t}");

        // a single curve is always accepted
        assert_eq!(resolve_threshold(Threshold::Auto, &[42.0]), 0.0);
    }

    #[test]
    fn canny_keeps_uniform_step_edge() {
        let (rows, cols, at) = (64, 128, 64);
        let mut px = vec![0.0; rows * cols];
        for r in 0..rows {
            for c in at..cols {
                px[r * cols + c] = 1.0;
            }
        }
        let img = Image2D::new(rows, cols, px).unwrap();
        let map = canny_baseline(&img, 4.0).unwrap();
        let nms = detect2d(&cwt2d(&img, 4.0).unwrap());
        // uniform modulus along the edge: hysteresis keeps all of it
        assert_eq!(map.count(), nms.len());
    }
}
