//! The model-edge laboratory.
//!
//! Six Heaviside-sum patterns model the intensity transitions found in noisy
//! low-contrast imagery: a lone step, an impulse, a staircase and three
//! triplet variants. Because the wavelet is a Gaussian derivative, the
//! transform of any such pattern is a sum of Gaussian bumps in closed form,
//! which makes maxima positions, the scale `s*` at which a short maxima-line
//! appears (a fold of the transform), and the amplitude `A*`/`B*` at which
//! one pattern's line topology transforms into another's (a degenerate fold)
//! all solvable to machine precision.
//!
//! On top of that sits the reliability analysis of the connection rule: for
//! a pattern and a control parameter `alpha`, `Q1`/`Q0` are the worst-case
//! margins by which the decision function prefers the true continuation of
//! the long/short line over the competing one, minimized over dyadic scale
//! pairs up to `s*`. A positive margin certifies the sparse procedure on
//! that pattern.
//!
//! Positions and scales are expressed in units of [`PatternSpec::unit`]
//! pixels per model unit; with `unit = 1` they coincide with the normalized
//! coordinates in which every pattern has an edge of intensity 1 at 0 and
//! the second edge at 1.

use std::f64::consts::SQRT_2;

use crate::cwt::PI_QUARTER_INV;
use crate::error::{Error, Result};
use crate::scale_filter::{p_factors, DecisionParams};
use crate::signal::Signal1D;

/// The six model edges.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PatternKind {
    /// 1: isolated step of intensity 1 at 0.
    Step,
    /// 2: impulse; up 1 at 0, down `B` at `beta > 0`.
    Impulse,
    /// 3: staircase; up 1 at 0, up `A > 1` at 1.
    Staircase,
    /// 4: staircase followed by a drop `B` at `beta > 1`, `B < B*`; the
    /// long maxima-line approaches the edge at 1.
    Triplet,
    /// 5: same shape as 4 but `A < A*`; the long line approaches 0.
    WeakTriplet,
    /// 6: step with a notch: down `B` at `0 < beta < 1`, up `A` at 1.
    Notch,
}

impl PatternKind {
    /// Numeric index, 1 through 6.
    pub fn index(self) -> u8 {
        match self {
            PatternKind::Step => 1,
            PatternKind::Impulse => 2,
            PatternKind::Staircase => 3,
            PatternKind::Triplet => 4,
            PatternKind::WeakTriplet => 5,
            PatternKind::Notch => 6,
        }
    }

    pub fn from_index(i: u8) -> Option<Self> {
        Some(match i {
            1 => PatternKind::Step,
            2 => PatternKind::Impulse,
            3 => PatternKind::Staircase,
            4 => PatternKind::Triplet,
            5 => PatternKind::WeakTriplet,
            6 => PatternKind::Notch,
            _ => return None,
        })
    }

    /// Which maxima-line is the short one appearing at `s*`.
    fn short_line(self) -> Label {
        match self {
            PatternKind::WeakTriplet => Label::L1,
            _ => Label::L0,
        }
    }
}

/// A model-edge descriptor.
///
/// Unused amplitude fields are 0. `sigma` is the Gaussian smoothing width
/// and `unit` the pixel extent of one model unit; both default to `0`/`1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PatternSpec {
    pub kind: PatternKind,
    pub a: f64,
    pub b: f64,
    pub beta: f64,
    pub sigma: f64,
    pub unit: f64,
}

impl PatternSpec {
    pub fn step() -> Self {
        Self::raw(PatternKind::Step, 0.0, 0.0, 0.0)
    }

    pub fn impulse(b: f64, beta: f64) -> Result<Self> {
        Self::raw(PatternKind::Impulse, 0.0, b, beta).validated()
    }

    /// `a = 1` is the degenerate boundary where the two maxima-lines
    /// bifurcate instead of merging.
    pub fn staircase(a: f64) -> Result<Self> {
        Self::raw(PatternKind::Staircase, a, 0.0, 0.0).validated()
    }

    pub fn triplet(a: f64, b: f64, beta: f64) -> Result<Self> {
        Self::raw(PatternKind::Triplet, a, b, beta).validated()
    }

    pub fn weak_triplet(a: f64, b: f64, beta: f64) -> Result<Self> {
        Self::raw(PatternKind::WeakTriplet, a, b, beta).validated()
    }

    pub fn notch(a: f64, b: f64, beta: f64) -> Result<Self> {
        Self::raw(PatternKind::Notch, a, b, beta).validated()
    }

    fn raw(kind: PatternKind, a: f64, b: f64, beta: f64) -> Self {
        PatternSpec {
            kind,
            a,
            b,
            beta,
            sigma: 0.0,
            unit: 1.0,
        }
    }

    pub fn with_sigma(mut self, sigma: f64) -> Result<Self> {
        self.sigma = sigma;
        self.validated()
    }

    pub fn with_unit(mut self, unit: f64) -> Result<Self> {
        self.unit = unit;
        self.validated()
    }

    fn validated(self) -> Result<Self> {
        let PatternSpec {
            kind,
            a,
            b,
            beta,
            sigma,
            unit,
        } = self;
        let ok = match kind {
            PatternKind::Step => true,
            PatternKind::Impulse => b > 0.0 && beta > 0.0,
            PatternKind::Staircase => a >= 1.0,
            PatternKind::Triplet => a > 1.0 && beta > 1.0 && b > 0.0,
            PatternKind::WeakTriplet => a > 0.0 && beta > 1.0 && b > 0.0,
            PatternKind::Notch => a > 0.0 && b > 0.0 && beta > 0.0 && beta < 1.0,
        };
        if !ok {
            return Err(Error::arg(format!(
                "parameters (A={a}, B={b}, beta={beta}) outside the validity range of pattern {}",
                kind.index()
            )));
        }
        if !(sigma >= 0.0) || !(unit > 0.0) {
            return Err(Error::arg("need sigma >= 0 and unit > 0"));
        }
        Ok(self)
    }

    /// Signed jumps as (position, amplitude) in pixels (model positions
    /// scaled by `unit`), smoothing width included.
    pub(crate) fn edge_sum(&self) -> EdgeSum {
        let mut edges = vec![(0.0, 1.0)];
        match self.kind {
            PatternKind::Step => {}
            PatternKind::Impulse => edges.push((self.beta, -self.b)),
            PatternKind::Staircase => edges.push((1.0, self.a)),
            PatternKind::Triplet | PatternKind::WeakTriplet => {
                edges.push((1.0, self.a));
                edges.push((self.beta, -self.b));
            }
            PatternKind::Notch => {
                edges.push((self.beta, -self.b));
                edges.push((1.0, self.a));
            }
        }
        for e in &mut edges {
            e.0 *= self.unit;
        }
        EdgeSum {
            edges,
            sigma: self.sigma * self.unit,
        }
    }
}

/// A sum of (optionally Gaussian-smoothed) Heaviside edges, with the closed
/// form of its wavelet transform and enough derivatives for fold solving.
///
/// The transform of `sum_i c_i * rho_(x_i) (*) g_sigma` is
/// `W(u,s) = sqrt(2 s) * pi^(-1/4) * (s/s') * sum_i c_i exp(-(u-x_i)^2/(2 s'^2))`
/// with `s' = sqrt(s^2 + sigma^2)`; all position derivatives act on the
/// Gaussian-bump sum `g` only.
#[derive(Debug, Clone)]
pub(crate) struct EdgeSum {
    pub edges: Vec<(f64, f64)>,
    pub sigma: f64,
}

impl EdgeSum {
    pub fn effective(&self, s: f64) -> f64 {
        (s * s + self.sigma * self.sigma).sqrt()
    }

    /// Prefactor of the closed form at scale `s`.
    pub fn prefactor(&self, s: f64) -> f64 {
        let sp = self.effective(s);
        (2.0 * s).sqrt() * PI_QUARTER_INV * (s / sp)
    }

    /// Full transform value at pixel `u`, scale `s`.
    pub fn wt(&self, u: f64, s: f64) -> f64 {
        self.prefactor(s) * self.g(u, self.effective(s), 0)
    }

    /// `d^order/du^order` of the Gaussian-bump sum at effective width `sp`,
    /// orders 0..=4.
    pub fn g(&self, u: f64, sp: f64, order: usize) -> f64 {
        self.edges
            .iter()
            .map(|&(x, c)| c * bump(u - x, sp, order))
            .sum()
    }

    /// `d/dsp` of `d^order/du^order g`, orders 1..=3.
    pub fn g_dsp(&self, u: f64, sp: f64, order: usize) -> f64 {
        self.edges
            .iter()
            .map(|&(x, c)| c * bump_dsp(u - x, sp, order))
            .sum()
    }

    pub fn span(&self) -> (f64, f64) {
        let lo = self.edges.iter().map(|e| e.0).fold(f64::INFINITY, f64::min);
        let hi = self
            .edges
            .iter()
            .map(|e| e.0)
            .fold(f64::NEG_INFINITY, f64::max);
        (lo, hi)
    }

    /// Amplitude scale, used to normalize solver residuals.
    pub fn amp_norm(&self) -> f64 {
        self.edges.iter().map(|e| e.1.abs()).sum::<f64>().max(1.0)
    }
}

/// Derivatives of `exp(-d^2/(2 sp^2))` with respect to position.
fn bump(d: f64, sp: f64, order: usize) -> f64 {
    let z = d / sp;
    let phi = (-0.5 * z * z).exp();
    match order {
        0 => phi,
        1 => -z / sp * phi,
        2 => (z * z - 1.0) / (sp * sp) * phi,
        3 => (3.0 * z - z.powi(3)) / sp.powi(3) * phi,
        4 => (3.0 - 6.0 * z * z + z.powi(4)) / sp.powi(4) * phi,
        _ => unreachable!("bump derivatives implemented up to order 4"),
    }
}

/// `d/dsp` of `bump(d, sp, order)` for orders 1..=3.
fn bump_dsp(d: f64, sp: f64, order: usize) -> f64 {
    let z = d / sp;
    let phi = (-0.5 * z * z).exp();
    match order {
        1 => (2.0 * z - z.powi(3)) / (sp * sp) * phi,
        2 => (z.powi(4) - 5.0 * z * z + 2.0) / sp.powi(3) * phi,
        3 => (-z.powi(5) + 9.0 * z.powi(3) - 12.0 * z) / sp.powi(4) * phi,
        _ => unreachable!("sp-derivatives implemented for orders 1 to 3"),
    }
}

/// Closed-form wavelet transform of the pattern at position `u`, scale `s`
/// (both in the spec's pixel coordinates).
pub fn analytic_wt(spec: &PatternSpec, u: f64, s: f64) -> f64 {
    spec.edge_sum().wt(u, s)
}

/// Sample the pattern on a pixel grid: exact Heaviside sums for `sigma = 0`
/// (a sample at the jump position takes the upper value), error-function
/// profiles for `sigma > 0`.
pub fn synthesize(spec: &PatternSpec, length: usize, origin: f64) -> Result<Signal1D> {
    let es = spec.edge_sum();
    for &(x, _) in &es.edges {
        let p = origin + x;
        if !(p > 0.0 && p < (length - 1) as f64) {
            return Err(Error::arg(format!(
                "edge at pixel {p:.1} falls outside the interior of [0, {length})"
            )));
        }
    }
    let samples = (0..length)
        .map(|t| {
            es.edges
                .iter()
                .map(|&(x, c)| {
                    let d = t as f64 - (origin + x);
                    if es.sigma == 0.0 {
                        if d >= 0.0 {
                            c
                        } else {
                            0.0
                        }
                    } else {
                        c * 0.5 * (1.0 + libm::erf(d / (es.sigma * SQRT_2)))
                    }
                })
                .sum()
        })
        .collect();
    Signal1D::new(samples)
}

/// All modulus maxima of the analytic transform at scale `s`: positions and
/// signed transform values, in position order.
///
/// Roots of `dW/du` are located by sign scanning on a grid of step `s/50`
/// and refined by bisection below 1e-9; a root is a modulus maximum when
/// `W * d2W/du2 < 0` there.
pub fn find_modmax(spec: &PatternSpec, s: f64) -> Result<Vec<(f64, f64)>> {
    if !(s > 0.0) {
        return Err(Error::arg("scale must be positive"));
    }
    let es = spec.edge_sum();
    Ok(modmax_of(&es, s))
}

/// Relative floor below which a maximum counts as numerical dust (an edge
/// with a tiny amplitude leaves vanishing micro-maxima deep in the tails).
const SIGNIFICANCE_REL: f64 = 1e-6;

fn modmax_of(es: &EdgeSum, s: f64) -> Vec<(f64, f64)> {
    let sp = es.effective(s);
    let pre = es.prefactor(s);
    let raw: Vec<(f64, f64)> = roots_of_g1(es, s)
        .into_iter()
        .filter(|&u| es.g(u, sp, 0) * es.g(u, sp, 2) < 0.0)
        .map(|u| (u, pre * es.g(u, sp, 0)))
        .collect();
    let peak = raw.iter().fold(0.0f64, |m, r| m.max(r.1.abs()));
    raw.into_iter()
        .filter(|r| r.1.abs() > SIGNIFICANCE_REL * peak)
        .collect()
}

/// Sign-scanned, bisection-refined roots of `dg/du` at scale `s`.
fn roots_of_g1(es: &EdgeSum, s: f64) -> Vec<f64> {
    let sp = es.effective(s);
    let (lo_edge, hi_edge) = es.span();
    let lo = lo_edge - 8.0 * sp;
    let hi = hi_edge + 8.0 * sp;
    let step = s / 50.0;
    let n = ((hi - lo) / step).ceil() as usize;
    let mut roots = Vec::new();
    let mut prev_u = lo;
    let mut prev_v = es.g(prev_u, sp, 1);
    for i in 1..=n {
        let u = lo + (hi - lo) * i as f64 / n as f64;
        let v = es.g(u, sp, 1);
        if prev_v == 0.0 {
            roots.push(prev_u);
        } else if prev_v * v < 0.0 {
            roots.push(bisect(|x| es.g(x, sp, 1), prev_u, u));
        }
        prev_u = u;
        prev_v = v;
    }
    if prev_v == 0.0 {
        roots.push(prev_u);
    }
    roots
}

fn bisect(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let mut fa = f(a);
    for _ in 0..200 {
        if (b - a).abs() < 1e-9 {
            break;
        }
        let mid = 0.5 * (a + b);
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if fa * fm < 0.0 {
            b = mid;
        } else {
            a = mid;
            fa = fm;
        }
    }
    0.5 * (a + b)
}

/// Appearance point of the short maxima-line: the solution of
/// `dW/du = 0`, `d2W/du2 = 0` with the largest scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalScale {
    pub s_star: f64,
    pub u_star: f64,
}

/// Solve the two-equation fold system for patterns 3 through 6.
///
/// Seeds come from a bisection on the root count of `dW/du` over scale;
/// a damped Newton iteration polishes the fold to machine precision.
pub fn critical_scale(spec: &PatternSpec) -> Result<CriticalScale> {
    if matches!(spec.kind, PatternKind::Step | PatternKind::Impulse) {
        return Err(Error::arg(
            "critical scale is defined for patterns 3 through 6",
        ));
    }
    let es = spec.edge_sum();
    let fold = largest_fold(&es)?;
    to_real_scale(&es, fold)
}

fn to_real_scale(es: &EdgeSum, (u, sp): (f64, f64)) -> Result<CriticalScale> {
    let s2 = sp * sp - es.sigma * es.sigma;
    if s2 <= 0.0 {
        return Err(Error::NonConvergence(format!(
            "fold at effective width {sp:.4} is below the smoothing width {}",
            es.sigma
        )));
    }
    Ok(CriticalScale {
        s_star: s2.sqrt(),
        u_star: u,
    })
}

/// Locate the largest-scale fold `(u, sp)` of the bump sum.
///
/// Scanning the effective width down from coarse, every increase of the
/// significant-maxima count is bisected and handed to a Newton polish of
/// `(g', g'') = 0`. Count increases that are not folds (a tail maximum
/// crossing the significance floor) fail the polish and the scan resumes
/// below them.
fn largest_fold(es: &EdgeSum) -> Result<(f64, f64)> {
    let (lo_edge, hi_edge) = es.span();
    let span = (hi_edge - lo_edge).max(es.sigma).max(1e-6);
    let s_hi = 2.5 * span;
    let s_lo = span / 400.0;

    // count maxima as a function of the *effective* width; a sigma-free
    // copy makes scale and width coincide during the scan
    let flat = EdgeSum {
        edges: es.edges.clone(),
        sigma: 0.0,
    };
    let count = |s: f64| modmax_of(&flat, s).len();

    let steps = 200;
    let ratio = (s_lo / s_hi).powf(1.0 / (steps - 1) as f64);
    let mut prev_s = s_hi;
    let mut prev_n = count(prev_s);
    for i in 1..steps {
        let s = s_hi * ratio.powi(i);
        let n = count(s);
        if n > prev_n {
            // bisect the count boundary inside (s, prev_s)
            let (mut lo, mut hi) = (s, prev_s);
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                if count(mid) >= n {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            // the newborn maximum: farthest from the coarse-side set
            let below = modmax_of(&flat, lo);
            let above = modmax_of(&flat, hi);
            let u0 = below.iter().map(|m| m.0).max_by(|&a, &b| {
                let da = above
                    .iter()
                    .map(|r| (r.0 - a).abs())
                    .fold(f64::INFINITY, f64::min);
                let db = above
                    .iter()
                    .map(|r| (r.0 - b).abs())
                    .fold(f64::INFINITY, f64::min);
                da.total_cmp(&db)
            });
            if let Some(u0) = u0 {
                if let Some(fold) = newton_fold(es, (u0, 0.5 * (lo + hi))) {
                    return Ok(fold);
                }
            }
            // not a fold (e.g. a maximum surfacing through the noise
            // floor): keep scanning below it
        }
        prev_s = s;
        prev_n = n;
    }
    Err(Error::NonConvergence(
        "no fold found in the scanned range".into(),
    ))
}

/// Damped Newton on `(g'(u), g''(u)) = 0` in `(u, sp)`.
fn newton_fold(es: &EdgeSum, seed: (f64, f64)) -> Option<(f64, f64)> {
    let norm = es.amp_norm();
    let (mut u, mut sp) = seed;
    let res = |u: f64, sp: f64| -> f64 {
        // balance the two equations' scales with powers of sp
        let r1 = es.g(u, sp, 1) * sp;
        let r2 = es.g(u, sp, 2) * sp * sp;
        (r1 * r1 + r2 * r2).sqrt() / norm
    };
    let mut r = res(u, sp);
    for _ in 0..80 {
        if r < 1e-14 {
            break;
        }
        let f1 = es.g(u, sp, 1);
        let f2 = es.g(u, sp, 2);
        let j = [
            [es.g(u, sp, 2), es.g_dsp(u, sp, 1)],
            [es.g(u, sp, 3), es.g_dsp(u, sp, 2)],
        ];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if det.abs() < 1e-300 {
            return None;
        }
        let du = (f1 * j[1][1] - f2 * j[0][1]) / det;
        let dsp = (f2 * j[0][0] - f1 * j[1][0]) / det;
        let mut step = 1.0;
        let mut improved = false;
        for _ in 0..30 {
            let (nu, nsp) = (u - step * du, sp - step * dsp);
            if nsp > 0.0 {
                let nr = res(nu, nsp);
                if nr < r {
                    u = nu;
                    sp = nsp;
                    r = nr;
                    improved = true;
                    break;
                }
            }
            step *= 0.5;
        }
        if !improved {
            break;
        }
    }
    // a vanishing residual deep in the tails is not a fold
    let significant = es.g(u, sp, 0).abs() > SIGNIFICANCE_REL * es.amp_norm();
    (r < 1e-10 && significant).then_some((u, sp))
}

/// Transformation amplitude: the `B*` (pattern 4) or `A*` (5, 6) where the
/// fold degenerates (`dW/du = d2W/du2 = d3W/du3 = 0`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalAmplitude {
    pub amp_star: f64,
    pub s_star: f64,
    pub u_star: f64,
}

/// Solve the three-equation system for the transformation amplitude, the
/// other two parameters held fixed. The amplitude field of `spec` being
/// solved for (`b` for pattern 4, `a` for 5 and 6) is ignored on input.
pub fn critical_amplitude(spec: &PatternSpec) -> Result<CriticalAmplitude> {
    let amp_edge = match spec.kind {
        PatternKind::Triplet => 2, // edge list order: 0, 1, beta
        PatternKind::WeakTriplet => 1,
        PatternKind::Notch => 2, // edge list order: 0, beta, 1
        _ => {
            return Err(Error::arg(
                "transformation amplitude is defined for patterns 4 through 6",
            ))
        }
    };
    let base = spec.edge_sum();
    let with_amp = |amp: f64| -> EdgeSum {
        let mut es = base.clone();
        let sign = if spec.kind == PatternKind::Triplet {
            -1.0
        } else {
            1.0
        };
        es.edges[amp_edge].1 = sign * amp;
        es
    };

    // follow one fold branch by continuation in the amplitude: the third
    // derivative along the branch changes sign at the transformation
    let fold_near = |amp: f64, seed: Option<(f64, f64)>| -> Option<(f64, f64)> {
        let es = with_amp(amp);
        match seed.and_then(|s| newton_fold(&es, s)) {
            Some(fold) => Some(fold),
            None => largest_fold(&es).ok(),
        }
    };
    let g3_of = |amp: f64, fold: (f64, f64)| -> f64 {
        let es = with_amp(amp);
        es.g(fold.0, fold.1, 3) * fold.1.powi(3) / es.amp_norm()
    };

    let steps = 240;
    let (amp_lo, amp_hi) = (0.02f64, 60.0f64);
    let ratio = (amp_hi / amp_lo).powf(1.0 / (steps - 1) as f64);
    let mut prev: Option<(f64, f64, (f64, f64))> = None; // amp, g3, fold
    let mut bracket = None;
    for i in 0..steps {
        let amp = amp_lo * ratio.powi(i);
        let Some(fold) = fold_near(amp, prev.map(|p| p.2)) else {
            prev = None;
            continue;
        };
        let v = g3_of(amp, fold);
        if let Some((pa, pv, pf)) = prev {
            if pv * v < 0.0 {
                bracket = Some((pa, amp, pf));
                break;
            }
        }
        prev = Some((amp, v, fold));
    }
    let (mut lo, mut hi, mut fold) = bracket.ok_or_else(|| {
        Error::NonConvergence("no transformation amplitude in the scanned range".into())
    })?;
    let mut v_lo = g3_of(lo, fold);
    for _ in 0..70 {
        let mid = 0.5 * (lo + hi);
        let Some(f_mid) = fold_near(mid, Some(fold)) else {
            hi = mid;
            continue;
        };
        let v = g3_of(mid, f_mid);
        if v * v_lo > 0.0 {
            lo = mid;
            v_lo = v;
        } else {
            hi = mid;
        }
        fold = f_mid;
    }
    let amp = 0.5 * (lo + hi);
    let es = with_amp(amp);
    let (u, sp) =
        fold_near(amp, Some(fold)).ok_or_else(|| Error::NonConvergence("fold lost".into()))?;
    let crit = to_real_scale(&es, (u, sp))?;
    Ok(CriticalAmplitude {
        amp_star: amp,
        s_star: crit.s_star,
        u_star: crit.u_star,
    })
}

/// Which maxima-line a labeled modulus maximum belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Label {
    L0,
    L1,
}

#[derive(Debug, Clone, Copy, Default)]
struct Labeled {
    l0: Option<(f64, f64)>,
    l1: Option<(f64, f64)>,
    lb: Option<(f64, f64)>,
}

impl Labeled {
    fn get(&self, label: Label) -> Option<(f64, f64)> {
        match label {
            Label::L0 => self.l0,
            Label::L1 => self.l1,
        }
    }
}

/// Assign line labels to the maxima of one scale: the negative maximum (if
/// any) is `l_beta`; two positive maxima are `l0`, `l1` in position order;
/// a lone positive maximum is the pattern's long line.
fn label_modmax(kind: PatternKind, mm: &[(f64, f64)]) -> Labeled {
    let mut out = Labeled::default();
    let mut pos: Vec<(f64, f64)> = mm.iter().copied().filter(|m| m.1 > 0.0).collect();
    pos.sort_by(|a, b| a.0.total_cmp(&b.0));
    out.lb = mm
        .iter()
        .copied()
        .filter(|m| m.1 < 0.0)
        .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()));
    match pos.len() {
        0 => {}
        1 => match kind.short_line() {
            Label::L1 => out.l0 = Some(pos[0]),
            _ => out.l1 = Some(pos[0]),
        },
        _ => {
            out.l0 = Some(pos[0]);
            out.l1 = Some(*pos.last().unwrap());
        }
    }
    out
}

/// Which factors of the decision function participate in a Q sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DecisionMode {
    #[default]
    Full,
    /// Distance and sign factors only.
    DistanceOnly,
    /// Decay and sign factors only.
    DecayOnly,
}

/// Configuration of a reliability sweep.
#[derive(Debug, Clone, Copy)]
pub struct QSweepConfig {
    pub alpha: f64,
    pub mode: DecisionMode,
    /// Scale points per sweep (log-spaced).
    pub n_scales: usize,
    /// Lower end of the sweep as a fraction of `s*`.
    pub scale_floor: f64,
}

impl Default for QSweepConfig {
    fn default() -> Self {
        QSweepConfig {
            alpha: 0.0,
            mode: DecisionMode::Full,
            n_scales: 50,
            scale_floor: 0.02,
        }
    }
}

/// Worst-case connection margins for the long (`q1`) and short (`q0`) line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QValues {
    pub q1: f64,
    pub q0: f64,
}

impl QValues {
    pub fn min(&self) -> f64 {
        self.q1.min(self.q0)
    }
}

/// Reliability margins of the decision function on one pattern.
///
/// `q1` is the minimum over dyadic scale pairs of
/// `P(l1(s2), l1(s1)) - P(l1(s2), l0(s1))`, `q0` the analogous margin for
/// the `l0` pairs against `j = 1`. The constrained scale sweeps `(0, s*]`
/// on the side required by the pattern's line topology; at the endpoint the
/// newborn short line is represented by the fold point itself. Cross pairs
/// against `l_beta` are omitted: the sign factor makes them score zero.
pub fn q_values(spec: &PatternSpec, cfg: &QSweepConfig) -> Result<QValues> {
    if matches!(spec.kind, PatternKind::Step | PatternKind::Impulse) {
        return Err(Error::arg(
            "the reliability sweep is defined for patterns 3 through 6",
        ));
    }
    let crit = critical_scale(spec)?;
    q_values_at(spec, cfg, &crit)
}

/// As [`q_values`] with a precomputed critical scale (saves the fold solve
/// when sweeping a parameter grid).
pub fn q_values_at(
    spec: &PatternSpec,
    cfg: &QSweepConfig,
    crit: &CriticalScale,
) -> Result<QValues> {
    let es = spec.edge_sum();
    let s_star = crit.s_star;
    let birth = (crit.u_star, es.wt(crit.u_star, s_star));
    let short = spec.kind.short_line();

    let labeled_at = |s: f64| -> Labeled {
        let mut lab = label_modmax(spec.kind, &modmax_of(&es, s));
        if lab.get(short).is_none() && s >= 0.999 * s_star {
            match short {
                Label::L1 => lab.l1 = Some((birth.0, es.wt(birth.0, s))),
                _ => lab.l0 = Some((birth.0, es.wt(birth.0, s))),
            }
        }
        lab
    };

    // pair a constrained scale with its dyadic partner; for smoothed
    // patterns the pairing doubles the effective width instead and the
    // decay center shifts accordingly
    let pair_up = |s1: f64| -> f64 {
        if es.sigma == 0.0 {
            2.0 * s1
        } else {
            (4.0 * s1 * s1 + 3.0 * es.sigma * es.sigma).sqrt()
        }
    };
    let pair_down = |s2: f64| -> f64 {
        if es.sigma == 0.0 {
            s2 / 2.0
        } else {
            (0.25 * (s2 * s2 - 3.0 * es.sigma * es.sigma))
                .max(1e-12)
                .sqrt()
        }
    };

    let score = |n: (f64, f64), m: (f64, f64), s2: f64, s1: f64| -> f64 {
        let center = if es.sigma == 0.0 {
            0.5
        } else {
            DecisionParams::sigma_adjusted_center(s2, s1)
        };
        let params = DecisionParams {
            alpha: cfg.alpha,
            decay_center: center,
            window_factor: 4.0,
        };
        let (delta, decay, sign) = p_factors((n.0 - m.0).abs(), n.1, m.1, s2, s1, &params);
        match cfg.mode {
            DecisionMode::Full => delta * decay * sign,
            DecisionMode::DistanceOnly => delta * sign,
            DecisionMode::DecayOnly => decay * sign,
        }
    };

    let sweep: Vec<f64> = (0..cfg.n_scales)
        .map(|i| {
            let t = i as f64 / (cfg.n_scales - 1).max(1) as f64;
            cfg.scale_floor * s_star * (1.0 / cfg.scale_floor).powf(t)
        })
        .collect();

    // (P1): own vs cross continuation of the long line l1, j = 0
    let mut q1 = f64::INFINITY;
    // (P0): own vs cross continuation of l0, j = 1
    let mut q0 = f64::INFINITY;
    for &sc in &sweep {
        // the constraint side depends on which line is short
        let (s1, s2) = match short {
            Label::L1 => (pair_down(sc), sc), // l1 short: s2 in (0, s*]
            _ => (sc, pair_up(sc)),           // l0 short: s1 in (0, s*]
        };
        let (m2, m1) = (labeled_at(s2), labeled_at(s1));
        if let (Some(n), Some(own), Some(cross)) = (m2.l1, m1.l1, m1.l0) {
            q1 = q1.min(score(n, own, s2, s1) - score(n, cross, s2, s1));
        }

        let (s1, s2) = match short {
            Label::L1 => (sc, pair_up(sc)), // l1 enters as the cross item at s1
            _ => (pair_down(sc), sc),       // l0 short: s2 in (0, s*]
        };
        let (m2, m1) = (labeled_at(s2), labeled_at(s1));
        if let (Some(n), Some(own), Some(cross)) = (m2.l0, m1.l0, m1.l1) {
            q0 = q0.min(score(n, own, s2, s1) - score(n, cross, s2, s1));
        }
    }
    if !q1.is_finite() || !q0.is_finite() {
        return Err(Error::NonConvergence(
            "reliability sweep found no scale with both lines present".into(),
        ));
    }
    Ok(QValues { q1, q0 })
}

/// Evaluate the reliability margins over a parameter grid; the result is
/// aligned with the input specs.
pub fn q_surface(specs: &[PatternSpec], cfg: &QSweepConfig) -> Result<Vec<QValues>> {
    specs.iter().map(|s| q_values(s, cfg)).collect()
}
