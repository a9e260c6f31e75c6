//! Core numeric containers: 1-D signals, 2-D images and scale schedules.
//!
//! All containers are immutable after construction and safe to share across
//! concurrent readers. Intensities are plain `f64` in pixel units with unit
//! sample spacing; raster loading normalizes to [0, 1] (see [`crate::raster`]).

use crate::error::{Error, Result};

/// A 1-D signal: finite real samples at unit spacing.
#[derive(Debug, Clone, PartialEq)]
pub struct Signal1D {
    samples: Vec<f64>,
}

impl Signal1D {
    /// Minimum number of samples accepted.
    pub const MIN_LEN: usize = 4;

    pub fn new(samples: Vec<f64>) -> Result<Self> {
        if samples.len() < Self::MIN_LEN {
            return Err(Error::arg(format!(
                "signal needs at least {} samples, got {}",
                Self::MIN_LEN,
                samples.len()
            )));
        }
        if !samples.iter().all(|v| v.is_finite()) {
            return Err(Error::arg("signal contains non-finite samples"));
        }
        Ok(Self { samples })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }
}

/// A 2-D grayscale image stored row-major; row index is image y, column is x.
#[derive(Debug, Clone, PartialEq)]
pub struct Image2D {
    rows: usize,
    cols: usize,
    pixels: Vec<f64>,
}

impl Image2D {
    /// Minimum rows/cols accepted.
    pub const MIN_DIM: usize = 4;

    pub fn new(rows: usize, cols: usize, pixels: Vec<f64>) -> Result<Self> {
        if rows < Self::MIN_DIM || cols < Self::MIN_DIM {
            return Err(Error::arg(format!(
                "image must be at least {0}x{0}, got {rows}x{cols}",
                Self::MIN_DIM
            )));
        }
        if pixels.len() != rows * cols {
            return Err(Error::arg(format!(
                "pixel buffer has {} values, expected {}",
                pixels.len(),
                rows * cols
            )));
        }
        if !pixels.iter().all(|v| v.is_finite()) {
            return Err(Error::arg("image contains non-finite pixels"));
        }
        Ok(Self { rows, cols, pixels })
    }

    /// Constant-valued image, mainly for tests and phantom backgrounds.
    pub fn filled(rows: usize, cols: usize, value: f64) -> Result<Self> {
        Self::new(rows, cols, vec![value; rows * cols])
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn pixels(&self) -> &[f64] {
        &self.pixels
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        debug_assert!(r < self.rows && c < self.cols);
        self.pixels[r * self.cols + c]
    }

    /// Row `r` as a slice of length `cols`.
    pub fn row(&self, r: usize) -> &[f64] {
        &self.pixels[r * self.cols..(r + 1) * self.cols]
    }

    /// Extract row `r` as a standalone 1-D cross-section.
    pub fn extract_row(&self, r: usize) -> Result<Signal1D> {
        if r >= self.rows {
            return Err(Error::arg(format!(
                "row {r} out of range for {} rows",
                self.rows
            )));
        }
        Signal1D::new(self.row(r).to_vec())
    }

    /// Transposed copy (used by symmetry tests and column-direction passes).
    pub fn transposed(&self) -> Image2D {
        let mut out = vec![0.0; self.pixels.len()];
        for r in 0..self.rows {
            for c in 0..self.cols {
                out[c * self.rows + r] = self.pixels[r * self.cols + c];
            }
        }
        Image2D {
            rows: self.cols,
            cols: self.rows,
            pixels: out,
        }
    }
}

/// How a schedule's consecutive scales relate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScheduleKind {
    /// s_{j+1} = 2 s_j.
    Dyadic,
    /// sqrt(s_{j+1}^2 + sigma^2) = 2 sqrt(s_j^2 + sigma^2); used for
    /// Gaussian-smoothed edges of width `sigma`.
    SigmaAdjusted(f64),
}

/// A descending list of analysis scales s_J > ... > s_1.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaleSchedule {
    scales: Vec<f64>,
    kind: ScheduleKind,
}

impl ScaleSchedule {
    /// Build a dyadic schedule ending at `finest`, e.g. `dyadic(4.0, 4)`
    /// gives [32, 16, 8, 4].
    pub fn dyadic(finest: f64, levels: usize) -> Result<Self> {
        if !(finest > 0.0) || levels == 0 {
            return Err(Error::arg("dyadic schedule needs finest > 0, levels > 0"));
        }
        let scales = (0..levels)
            .rev()
            .map(|j| finest * f64::powi(2.0, j as i32))
            .collect();
        Ok(Self {
            scales,
            kind: ScheduleKind::Dyadic,
        })
    }

    /// Build a sigma-adjusted schedule: s_{j+1} = sqrt(4 s_j^2 + 3 sigma^2),
    /// which doubles the effective width sqrt(s^2 + sigma^2) per level.
    pub fn sigma_adjusted(finest: f64, levels: usize, sigma: f64) -> Result<Self> {
        if !(finest > 0.0) || levels == 0 || !(sigma >= 0.0) {
            return Err(Error::arg(
                "sigma-adjusted schedule needs finest > 0, levels > 0, sigma >= 0",
            ));
        }
        let mut up = vec![finest];
        for _ in 1..levels {
            let s = *up.last().unwrap();
            up.push((4.0 * s * s + 3.0 * sigma * sigma).sqrt());
        }
        up.reverse();
        Ok(Self {
            scales: up,
            kind: ScheduleKind::SigmaAdjusted(sigma),
        })
    }

    /// Validate an explicit descending scale list against a schedule kind.
    pub fn from_scales(scales: Vec<f64>, kind: ScheduleKind) -> Result<Self> {
        if scales.is_empty() {
            return Err(Error::arg("empty scale schedule"));
        }
        if !scales.iter().all(|s| s.is_finite() && *s > 0.0) {
            return Err(Error::arg("scales must be positive and finite"));
        }
        for w in scales.windows(2) {
            if !(w[1] < w[0]) {
                return Err(Error::arg("scales must be strictly decreasing"));
            }
            let (coarse, fine) = (w[0], w[1]);
            let expected = match kind {
                ScheduleKind::Dyadic => 2.0 * fine,
                ScheduleKind::SigmaAdjusted(sig) => {
                    (4.0 * (fine * fine + sig * sig) - sig * sig).sqrt()
                }
            };
            if (coarse - expected).abs() > 1e-9 * coarse.max(1.0) {
                return Err(Error::arg(format!(
                    "scale step {fine} -> {coarse} violates the schedule kind"
                )));
            }
        }
        Ok(Self { scales, kind })
    }

    /// Scales, coarse to fine.
    pub fn scales(&self) -> &[f64] {
        &self.scales
    }

    pub fn kind(&self) -> ScheduleKind {
        self.kind
    }

    pub fn coarsest(&self) -> f64 {
        self.scales[0]
    }

    pub fn finest(&self) -> f64 {
        *self.scales.last().unwrap()
    }

    pub fn len(&self) -> usize {
        self.scales.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scales.is_empty()
    }
}
