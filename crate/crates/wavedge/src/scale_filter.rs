//! Sparse-scale connection of modulus maxima across the time-scale plane.
//!
//! Two mod-max at scales `s2 > s1` are scored by the decision function
//! `P(n,m) = Delta(n,m) * D(n,m) * Sign(n,m)` where
//!
//! - `Delta(n,m) = exp(-|n-m| * s1^(-alpha))` is the distance criterion,
//! - `D(n,m) = exp(-|ln(|W(n)|/|W(m)|)/ln(s2/s1) - c| * s1^alpha)` is the
//!   decay criterion with center `c` (1/2 in 1-D, 1 in 2-D),
//! - `Sign(n,m)` is 1 when the transform values share a sign, else 0
//!   (replaced by an angle-difference factor in 2-D).
//!
//! The control parameter `alpha` sets the mutual weighting of distance and
//! decay. Note the flip around scale 1: for schedules with `s1 > 1` a larger
//! `alpha` shrinks the distance exponent and grows the decay exponent, so it
//! favors the decay criterion; in normalized coordinates with `s1 < 1` the
//! roles reverse.
//!
//! Each coarse mod-max connects to the windowed fine candidate maximizing
//! `P`; unchosen fine maxima start new lines. A dense edge-focusing tracker
//! provides reference maxima-lines, and [`audit`] measures how often the
//! sparse procedure picks a fine mod-max from the wrong reference line.

use std::collections::HashMap;

use crate::cwt::cwt1d;
use crate::error::{Error, Result};
use crate::modmax::{detect1d, detect2d, ModMax1d, ModMax2d};
use crate::signal::{Image2D, ScaleSchedule, Signal1D};

/// Parameters of the decision function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecisionParams {
    /// Control parameter weighting distance against decay.
    pub alpha: f64,
    /// Center of the decay criterion: the expected log-decay slope along a
    /// maxima-line (1/2 for the 1-D normalization, 1 for the 2-D one).
    pub decay_center: f64,
    /// Candidate window radius in units of the fine scale.
    pub window_factor: f64,
}

impl DecisionParams {
    /// 1-D defaults: decay center 1/2, window factor 4.
    pub fn for_1d(alpha: f64) -> Self {
        Self {
            alpha,
            decay_center: 0.5,
            window_factor: 4.0,
        }
    }

    /// 2-D defaults: decay center 1, window factor 4.
    pub fn for_2d(alpha: f64) -> Self {
        Self {
            alpha,
            decay_center: 1.0,
            window_factor: 4.0,
        }
    }

    /// Decay center for a sigma-adjusted scale pair: shifts 1/2 by
    /// `ln(s2/(2 s1))/ln 2`, which vanishes for a dyadic pair.
    pub fn sigma_adjusted_center(s2: f64, s1: f64) -> f64 {
        0.5 + (s2 / (2.0 * s1)).ln() / std::f64::consts::LN_2
    }
}

/// The three factors of the decision function for a candidate pair with
/// spatial distance `dist` and transform values `n_val` at `s2`, `m_val`
/// at `s1`. Returns `(delta, decay, sign)`.
pub(crate) fn p_factors(
    dist: f64,
    n_val: f64,
    m_val: f64,
    s2: f64,
    s1: f64,
    p: &DecisionParams,
) -> (f64, f64, f64) {
    debug_assert!(s2 > s1 && s1 > 0.0);
    debug_assert!(n_val != 0.0 && m_val != 0.0);
    let sign = if n_val * m_val > 0.0 { 1.0 } else { 0.0 };
    let delta = (-dist * s1.powf(-p.alpha)).exp();
    let slope = (n_val.abs() / m_val.abs()).ln() / (s2 / s1).ln();
    let decay = (-(slope - p.decay_center).abs() * s1.powf(p.alpha)).exp();
    (delta, decay, sign)
}

/// 1-D decision score for connecting `n` at the coarser scale to `m`.
pub fn decision_1d(n: &ModMax1d, m: &ModMax1d, p: &DecisionParams) -> f64 {
    let dist = (n.pos as f64 - m.pos as f64).abs();
    let (delta, decay, sign) = p_factors(dist, n.value, m.value, n.scale, m.scale, p);
    delta * decay * sign
}

/// Absolute angular difference wrapped to `[0, pi]`.
fn angle_gap(a: f64, b: f64) -> f64 {
    use std::f64::consts::PI;
    let d = (a - b).rem_euclid(2.0 * PI);
    d.min(2.0 * PI - d)
}

/// 2-D decision score: distance and decay as in 1-D (decay center 1), and
/// the sign factor replaced by `exp(-|Af(n) - Af(m)|)` on wrapped angles.
pub fn decision_2d(n: &ModMax2d, m: &ModMax2d, p: &DecisionParams) -> f64 {
    let dist = n.distance_to(m);
    let (delta, decay, _) = p_factors(dist, n.value, m.value, n.scale, m.scale, p);
    let angle = (-angle_gap(n.angle, m.angle)).exp();
    delta * decay * angle
}

/// Connect each coarse mod-max to the windowed fine candidate maximizing the
/// decision function. Returns, per coarse index, the chosen fine index.
///
/// Ties are broken by smaller spatial distance, then smaller index. A coarse
/// mod-max with no candidate in the window, or whose every candidate scores
/// zero, is left unconnected (its line terminates). Several coarse maxima
/// may select the same fine one; exclusivity is deliberately not enforced.
pub fn connect(coarse: &[ModMax1d], fine: &[ModMax1d], p: &DecisionParams) -> Vec<Option<usize>> {
    if fine.is_empty() {
        return vec![None; coarse.len()];
    }
    debug_assert!(fine.windows(2).all(|w| w[0].pos <= w[1].pos));
    let s1 = fine[0].scale;
    let window = p.window_factor * s1;
    coarse
        .iter()
        .map(|n| {
            let lo = fine.partition_point(|m| (m.pos as f64) < n.pos as f64 - window);
            let hi = fine.partition_point(|m| m.pos as f64 <= n.pos as f64 + window);
            let mut best: Option<(f64, f64, usize)> = None;
            for (idx, m) in fine[lo..hi].iter().enumerate().map(|(i, m)| (lo + i, m)) {
                let score = decision_1d(n, m, p);
                if score <= 0.0 {
                    continue;
                }
                let dist = (n.pos as f64 - m.pos as f64).abs();
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
            best.map(|(_, _, i)| i)
        })
        .collect()
}

/// 2-D variant of [`connect`] with a Euclidean window.
pub fn connect_2d(
    coarse: &[ModMax2d],
    fine: &[ModMax2d],
    p: &DecisionParams,
) -> Vec<Option<usize>> {
    if fine.is_empty() {
        return vec![None; coarse.len()];
    }
    let s1 = fine[0].scale;
    let window = p.window_factor * s1;
    // fine maxima come row-major from detection; prune candidates by row
    debug_assert!(fine
        .windows(2)
        .all(|w| (w[0].row, w[0].col) <= (w[1].row, w[1].col)));
    let win_rows = window.ceil() as i64;
    coarse
        .iter()
        .map(|n| {
            let r_lo = (n.row as i64 - win_rows).max(0) as usize;
            let r_hi = n.row + win_rows as usize + 1;
            let lo = fine.partition_point(|m| m.row < r_lo);
            let hi = fine.partition_point(|m| m.row < r_hi);
            let mut best: Option<(f64, f64, usize)> = None;
            for (idx, m) in fine[lo..hi].iter().enumerate().map(|(i, m)| (lo + i, m)) {
                let dist = n.distance_to(m);
                if dist > window {
                    continue;
                }
                let score = decision_2d(n, m, p);
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
            best.map(|(_, _, i)| i)
        })
        .collect()
}

/// A chain of 1-D mod-max across scales, ordered coarse to fine.
///
/// A line normally extends from its appearance scale down to the finest
/// schedule scale; a line whose coarse mod-max found no admissible
/// continuation ends early.
#[derive(Debug, Clone)]
pub struct MaximaLine1d {
    pub id: u32,
    pub entries: Vec<ModMax1d>,
}

impl MaximaLine1d {
    /// Position of the finest-scale entry.
    pub fn tip(&self) -> &ModMax1d {
        self.entries.last().expect("lines are never empty")
    }
}

/// A chain of 2-D mod-max across scales, ordered coarse to fine.
#[derive(Debug, Clone)]
pub struct MaximaLine2d {
    pub id: u32,
    pub entries: Vec<ModMax2d>,
}

impl MaximaLine2d {
    pub fn tip(&self) -> &ModMax2d {
        self.entries.last().expect("lines are never empty")
    }
}

/// Run the sparse connection procedure over a whole schedule.
///
/// Mod-max are extracted at every schedule scale; consecutive scales are
/// linked with [`connect`]. Fine maxima never chosen by a coarse one start
/// new lines at their scale. Deterministic: no randomness enters anywhere.
pub fn filter_schedule(
    f: &Signal1D,
    sched: &ScaleSchedule,
    p: &DecisionParams,
) -> Result<Vec<MaximaLine1d>> {
    let per_scale: Vec<Vec<ModMax1d>> = sched
        .scales()
        .iter()
        .map(|&s| Ok(detect1d(&cwt1d(f, s)?)))
        .collect::<Result<_>>()?;
    Ok(assemble_lines(&per_scale, |c, f| connect(c, f, p)))
}

/// 2-D counterpart of [`filter_schedule`].
pub fn filter_schedule_2d(
    img: &Image2D,
    sched: &ScaleSchedule,
    p: &DecisionParams,
) -> Result<Vec<MaximaLine2d>> {
    let per_scale: Vec<Vec<ModMax2d>> = sched
        .scales()
        .iter()
        .map(|&s| Ok(detect2d(&crate::cwt::cwt2d(img, s)?)))
        .collect::<Result<_>>()?;
    Ok(assemble_lines(&per_scale, |c, f| connect_2d(c, f, p)))
}

/// Shared line assembly: walk scale levels coarse to fine, applying a
/// pairwise connector, starting new lines at unchosen fine maxima.
fn assemble_lines<M: Copy, L: FromEntries<M>>(
    per_scale: &[Vec<M>],
    connector: impl Fn(&[M], &[M]) -> Vec<Option<usize>>,
) -> Vec<L> {
    let mut lines: Vec<Vec<M>> = Vec::new();
    // line index -> index of its tail inside the current level
    let mut active: Vec<(usize, usize)> = Vec::new();
    for (line_id, _) in per_scale
        .first()
        .map(|l| l.as_slice())
        .unwrap_or(&[])
        .iter()
        .enumerate()
    {
        lines.push(vec![per_scale[0][line_id]]);
        active.push((line_id, line_id));
    }
    for level in 1..per_scale.len() {
        let coarse = &per_scale[level - 1];
        let fine = &per_scale[level];
        let choice = connector(coarse, fine);
        let mut chosen = vec![false; fine.len()];
        let mut next_active = Vec::with_capacity(active.len());
        for &(line, tail) in &active {
            if let Some(m) = choice[tail] {
                lines[line].push(fine[m]);
                chosen[m] = true;
                next_active.push((line, m));
            }
        }
        for (m, taken) in chosen.iter().enumerate() {
            if !taken {
                lines.push(vec![fine[m]]);
                next_active.push((lines.len() - 1, m));
            }
        }
        active = next_active;
    }
    lines
        .into_iter()
        .enumerate()
        .map(|(id, entries)| L::from_entries(id as u32, entries))
        .collect()
}

trait FromEntries<M> {
    fn from_entries(id: u32, entries: Vec<M>) -> Self;
}

impl FromEntries<ModMax1d> for MaximaLine1d {
    fn from_entries(id: u32, entries: Vec<ModMax1d>) -> Self {
        MaximaLine1d { id, entries }
    }
}

impl FromEntries<ModMax2d> for MaximaLine2d {
    fn from_entries(id: u32, entries: Vec<ModMax2d>) -> Self {
        MaximaLine2d { id, entries }
    }
}

/// Dense coarse-to-fine tracking in half-scale steps; the reference truth
/// for auditing the sparse procedure.
///
/// Every mod-max at the top scale starts a line. Stepping from `s` to
/// `s - 1/2`, each line continues to the nearest same-sign mod-max within
/// `max(2, ceil(s/4))` pixels; an exact distance tie goes to the larger
/// modulus. Lines that cannot be tracked terminate; mod-max left unclaimed
/// at the new scale start new lines there.
pub fn edge_focusing_oracle(f: &Signal1D, s_max: f64, s_min: f64) -> Result<Vec<MaximaLine1d>> {
    if !(s_max > s_min && s_min >= 1.0) {
        return Err(Error::arg(format!(
            "edge focusing needs s_max > s_min >= 1, got {s_max}, {s_min}"
        )));
    }
    let mut scales = Vec::new();
    let mut s = s_max;
    while s > s_min - 1e-9 {
        scales.push(s);
        s -= 0.5;
    }
    let per_scale: Vec<Vec<ModMax1d>> = scales
        .iter()
        .map(|&s| Ok(detect1d(&cwt1d(f, s)?)))
        .collect::<Result<_>>()?;

    Ok(assemble_lines(&per_scale, |coarse, fine| {
        track_nearest(coarse, fine)
    }))
}

/// Nearest-neighbor tracker used by the edge-focusing oracle.
fn track_nearest(coarse: &[ModMax1d], fine: &[ModMax1d]) -> Vec<Option<usize>> {
    if fine.is_empty() {
        return vec![None; coarse.len()];
    }
    coarse
        .iter()
        .map(|n| {
            let window = (n.scale / 4.0).ceil().max(2.0);
            let lo = fine.partition_point(|m| (m.pos as f64) < n.pos as f64 - window);
            let hi = fine.partition_point(|m| m.pos as f64 <= n.pos as f64 + window);
            let mut best: Option<(f64, f64, usize)> = None;
            for (idx, m) in fine[lo..hi].iter().enumerate().map(|(i, m)| (lo + i, m)) {
                if m.sign() != n.sign() {
                    continue;
                }
                let dist = (n.pos as f64 - m.pos as f64).abs();
                let strength = m.value.abs();
                let better = match &best {
                    None => true,
                    Some((bd, bv, _)) => dist < *bd || (dist == *bd && strength > *bv),
                };
                if better {
                    best = Some((dist, strength, idx));
                }
            }
            best.map(|(_, _, i)| i)
        })
        .collect()
}

/// Per-scale-pair audit counters.
#[derive(Debug, Clone, PartialEq)]
pub struct PairReport {
    pub coarse_scale: f64,
    pub fine_scale: f64,
    pub connections: usize,
    pub false_connections: usize,
}

impl PairReport {
    pub fn false_pct(&self) -> f64 {
        if self.connections == 0 {
            0.0
        } else {
            100.0 * self.false_connections as f64 / self.connections as f64
        }
    }
}

/// Outcome of comparing sparse connections against the reference lines.
#[derive(Debug, Clone, PartialEq)]
pub struct ConnectionReport {
    pub pairs: Vec<PairReport>,
    /// Sum of |displacement| at the fine end over false connections.
    displacement_sum: f64,
    displacement_count: usize,
}

impl ConnectionReport {
    pub fn total_connections(&self) -> usize {
        self.pairs.iter().map(|p| p.connections).sum()
    }

    pub fn total_false(&self) -> usize {
        self.pairs.iter().map(|p| p.false_connections).sum()
    }

    /// Overall false-connection percentage.
    pub fn false_pct(&self) -> f64 {
        let total = self.total_connections();
        if total == 0 {
            0.0
        } else {
            100.0 * self.total_false() as f64 / total as f64
        }
    }

    /// Mean |pixel displacement| of false connections, measured at the fine
    /// end against the position the reference line reaches there.
    pub fn mean_displacement(&self) -> f64 {
        if self.displacement_count == 0 {
            0.0
        } else {
            self.displacement_sum / self.displacement_count as f64
        }
    }

    /// Pool counts with another report (e.g. across image rows).
    pub fn merge(&mut self, other: &ConnectionReport) -> Result<()> {
        if self.pairs.len() != other.pairs.len() {
            return Err(Error::arg("cannot merge reports over different schedules"));
        }
        for (a, b) in self.pairs.iter_mut().zip(&other.pairs) {
            if a.coarse_scale != b.coarse_scale || a.fine_scale != b.fine_scale {
                return Err(Error::arg("cannot merge reports over different schedules"));
            }
            a.connections += b.connections;
            a.false_connections += b.false_connections;
        }
        self.displacement_sum += other.displacement_sum;
        self.displacement_count += other.displacement_count;
        Ok(())
    }
}

/// Compare sparse maxima-lines against reference (edge-focusing) lines.
///
/// A sparse connection `n at s2 -> m at s1` is false when no reference line
/// contains both nodes. Node identity is (scale, position); the reference
/// must have been computed on the same signal with the schedule scales on
/// its dense grid.
pub fn audit(
    sparse: &[MaximaLine1d],
    truth: &[MaximaLine1d],
    sched: &ScaleSchedule,
) -> Result<ConnectionReport> {
    // node -> ids of reference lines through it
    let mut node_lines: HashMap<(u64, usize), Vec<u32>> = HashMap::new();
    // (line id, scale) -> position, for displacement measurement
    let mut line_pos: HashMap<(u32, u64), usize> = HashMap::new();
    for line in truth {
        for e in &line.entries {
            node_lines
                .entry((e.scale.to_bits(), e.pos))
                .or_default()
                .push(line.id);
            line_pos.insert((line.id, e.scale.to_bits()), e.pos);
        }
    }

    let mut pairs: Vec<PairReport> = sched
        .scales()
        .windows(2)
        .map(|w| PairReport {
            coarse_scale: w[0],
            fine_scale: w[1],
            connections: 0,
            false_connections: 0,
        })
        .collect();
    let mut displacement_sum = 0.0;
    let mut displacement_count = 0usize;

    for line in sparse {
        for pair in line.entries.windows(2) {
            let (n, m) = (&pair[0], &pair[1]);
            let slot = pairs
                .iter_mut()
                .find(|p| p.coarse_scale == n.scale && p.fine_scale == m.scale)
                .ok_or_else(|| {
                    Error::arg("sparse line scales do not match the schedule".to_string())
                })?;
            slot.connections += 1;
            let n_lines = node_lines.get(&(n.scale.to_bits(), n.pos));
            let m_lines = node_lines.get(&(m.scale.to_bits(), m.pos));
            let same_line = match (n_lines, m_lines) {
                (Some(a), Some(b)) => a.iter().any(|id| b.contains(id)),
                _ => false,
            };
            if !same_line {
                slot.false_connections += 1;
                // where the reference says n's line continues at s1
                let truth_pos = n_lines
                    .and_then(|ids| {
                        ids.iter()
                            .filter_map(|id| line_pos.get(&(*id, m.scale.to_bits())))
                            .map(|&p| (p as f64 - m.pos as f64).abs())
                            .min_by(|a, b| a.total_cmp(b))
                    })
                    .unwrap_or_else(|| (n.pos as f64 - m.pos as f64).abs());
                displacement_sum += truth_pos;
                displacement_count += 1;
            }
        }
    }
    Ok(ConnectionReport {
        pairs,
        displacement_sum,
        displacement_count,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::ScaleSchedule;

    fn mm(pos: usize, scale: f64, value: f64) -> ModMax1d {
        ModMax1d { pos, scale, value }
    }

    #[test]
    fn perfect_continuation_scores_one() {
        // same position, |W| ratio exactly (s2/s1)^(1/2), same sign
        let n = mm(100, 8.0, 2.0_f64.sqrt());
        let m = mm(100, 4.0, 1.0);
        let p = DecisionParams::for_1d(0.7);
        assert!((decision_1d(&n, &m, &p) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn opposite_signs_score_zero() {
        let n = mm(100, 8.0, 1.0);
        let m = mm(100, 4.0, -1.0);
        for alpha in [-0.5, 0.0, 0.5] {
            assert_eq!(decision_1d(&n, &m, &DecisionParams::for_1d(alpha)), 0.0);
        }
    }

    #[test]
    fn alpha_shifts_criterion_weights_for_scales_above_one() {
        // at s1 = 4 > 1, raising alpha shrinks Delta's exponent weight
        // s1^(-alpha) and grows D's weight s1^alpha
        let s1: f64 = 4.0;
        let mut prev_delta_w = f64::INFINITY;
        let mut prev_decay_w = 0.0;
        for alpha in [-0.5, 0.0, 0.5] {
            let delta_w = s1.powf(-alpha);
            let decay_w = s1.powf(alpha);
            assert!(delta_w < prev_delta_w);
            assert!(decay_w > prev_decay_w);
            prev_delta_w = delta_w;
            prev_decay_w = decay_w;
        }
    }

    #[test]
    fn two_d_scoring() {
        let n = ModMax2d {
            row: 30,
            col: 40,
            scale: 8.0,
            value: 2.0,
            angle: 0.3,
        };
        let m = ModMax2d {
            row: 30,
            col: 40,
            scale: 4.0,
            value: 1.0,
            angle: 0.3,
        };
        let p = DecisionParams::for_2d(0.0);
        // ratio 2 = (s2/s1)^1 and identical angle: perfect score
        assert!((decision_2d(&n, &m, &p) - 1.0).abs() < 1e-15);

        // an angle gap of pi/2 multiplies in exp(-pi/2)
        let m_rot = ModMax2d {
            angle: 0.3 + std::f64::consts::FRAC_PI_2,
            ..m
        };
        let want = (-std::f64::consts::FRAC_PI_2).exp();
        assert!((decision_2d(&n, &m_rot, &p) - want).abs() < 1e-12);
    }

    #[test]
    fn angle_gap_wraps() {
        use std::f64::consts::PI;
        assert!((angle_gap(3.0 * PI / 2.0, -PI / 2.0 + 0.01) - 0.01).abs() < 1e-12);
        assert!((angle_gap(0.1, 2.0 * PI - 0.1) - 0.2).abs() < 1e-12);
    }

    #[test]
    fn connect_prefers_own_continuation() {
        let p = DecisionParams::for_1d(0.0);
        // a coarse step line at 100 with the right decay, plus a decoy
        let coarse = vec![mm(100, 8.0, 1.4)];
        let fine = vec![mm(97, 4.0, 3.0), mm(100, 4.0, 0.99)];
        let choice = connect(&coarse, &fine, &p);
        assert_eq!(choice, vec![Some(1)]);
    }

    #[test]
    fn connect_outside_window_terminates() {
        let p = DecisionParams::for_1d(0.0);
        let coarse = vec![mm(100, 8.0, 1.0)];
        let fine = vec![mm(200, 4.0, 1.0)];
        assert_eq!(connect(&coarse, &fine, &p), vec![None]);
    }

    #[test]
    fn sparse_filter_tracks_an_isolated_step() {
        let f =
            Signal1D::new((0..512).map(|i| if i >= 256 { 1.0 } else { 0.0 }).collect()).unwrap();
        let sched = ScaleSchedule::dyadic(4.0, 4).unwrap();
        let lines = filter_schedule(&f, &sched, &DecisionParams::for_1d(0.5)).unwrap();
        assert_eq!(lines.len(), 1);
        assert_eq!(lines[0].entries.len(), 4);
        let pos0 = lines[0].entries[0].pos;
        for e in &lines[0].entries {
            assert!((e.pos as i64 - pos0 as i64).abs() <= 1);
            assert_eq!(e.sign(), 1);
        }
    }

    #[test]
    fn sparse_filter_on_constant_is_empty() {
        let f = Signal1D::new(vec![0.5; 512]).unwrap();
        let sched = ScaleSchedule::dyadic(4.0, 4).unwrap();
        let lines = filter_schedule(&f, &sched, &DecisionParams::for_1d(0.0)).unwrap();
        assert!(lines.is_empty());
    }

    #[test]
    fn oracle_tracks_step_without_drift() {
        let f =
            Signal1D::new((0..512).map(|i| if i >= 256 { 1.0 } else { 0.0 }).collect()).unwrap();
        let lines = edge_focusing_oracle(&f, 32.0, 4.0).unwrap();
        assert_eq!(lines.len(), 1);
        assert_eq!(lines[0].entries.len(), 57); // 32 down to 4 in halves
        let pos0 = lines[0].entries[0].pos;
        for e in &lines[0].entries {
            assert!(
                (e.pos as i64 - pos0 as i64).abs() <= 1,
                "drift at {}",
                e.scale
            );
        }
    }

    #[test]
    fn oracle_lines_never_change_sign() {
        // impulse: one positive and one negative line
        let mut v = vec![0.0; 512];
        for x in v.iter_mut().take(280).skip(240) {
            *x = 1.0;
        }
        let f = Signal1D::new(v).unwrap();
        let lines = edge_focusing_oracle(&f, 16.0, 2.0).unwrap();
        assert!(!lines.is_empty());
        for line in &lines {
            let s0 = line.entries[0].sign();
            assert!(line.entries.iter().all(|e| e.sign() == s0));
        }
    }

    #[test]
    fn oracle_rejects_bad_scale_range() {
        let f = Signal1D::new(vec![0.0; 64]).unwrap();
        assert!(edge_focusing_oracle(&f, 4.0, 4.0).is_err());
        assert!(edge_focusing_oracle(&f, 4.0, 0.5).is_err());
    }

    #[allow(clippy::type_complexity)]
    fn toy_lines(pairs: &[((usize, f64), (usize, f64))]) -> Vec<MaximaLine1d> {
        pairs
            .iter()
            .enumerate()
            .map(|(i, ((p2, s2), (p1, s1)))| MaximaLine1d {
                id: i as u32,
                entries: vec![mm(*p2, *s2, 1.0), mm(*p1, *s1, 1.0)],
            })
            .collect()
    }

    #[test]
    fn audit_counts_false_connections() {
        let sched = ScaleSchedule::from_scales(vec![8.0, 4.0], crate::signal::ScheduleKind::Dyadic)
            .unwrap();
        // truth: 20 straight lines at positions 10k
        let truth: Vec<((usize, f64), (usize, f64))> =
            (1..=20).map(|k| ((10 * k, 8.0), (10 * k, 4.0))).collect();
        let truth = toy_lines(&truth);

        // sparse equal to truth: 0 false
        let report = audit(&truth, &truth, &sched).unwrap();
        assert_eq!(report.total_connections(), 20);
        assert_eq!(report.total_false(), 0);
        assert_eq!(report.false_pct(), 0.0);

        // corrupt one pairing out of 20: line 0 now ends on line 1's node
        let mut sparse = truth.clone();
        sparse[0].entries[1].pos = 20;
        let report = audit(&sparse, &truth, &sched).unwrap();
        assert_eq!(report.total_false(), 1);
        assert!((report.false_pct() - 5.0).abs() < 1e-12);
        // displacement: truth line of node (8,10) reaches 10 at scale 4,
        // the sparse pick is 20
        assert!((report.mean_displacement() - 10.0).abs() < 1e-12);
    }

    #[test]
    fn merged_reports_pool_counts() {
        let sched = ScaleSchedule::from_scales(vec![8.0, 4.0], crate::signal::ScheduleKind::Dyadic)
            .unwrap();
        let truth = toy_lines(&[((10, 8.0), (10, 4.0))]);
        let mut a = audit(&truth, &truth, &sched).unwrap();
        let b = audit(&truth, &truth, &sched).unwrap();
        a.merge(&b).unwrap();
        assert_eq!(a.total_connections(), 2);
    }
}
