//! Continuous wavelet transform of 1-D signals and 2-D images.
//!
//! The wavelet is the first derivative of a Gaussian,
//! `psi(t) = sqrt(2) * pi^(-1/4) * t * exp(-t^2/2)`, with the L2-style
//! normalization `Wf(u,s) = integral f(t) (1/sqrt(s)) psi((t-u)/s) dt`.
//! For images the transform is the scaled gradient of the Gaussian-smoothed
//! image, `s * grad(f * theta_s)`; its modulus peaks along edges and its
//! direction is the direction of maximal change.
//!
//! Discretization: kernels are sampled on the integer grid, truncated at
//! radius `6 s` and corrected to exact zero mean (derivative kernels only);
//! signals are extended by mirror reflection without edge repeat. Transforms
//! are evaluated on the integer pixel grid only. Convolutions run in the
//! frequency domain, with a direct path for short signals.

use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::signal::{Image2D, Signal1D};

/// Signals shorter than this are correlated directly rather than via FFT.
const DIRECT_CONV_LIMIT: usize = 64;

/// pi^(-1/4), the Gaussian normalization used throughout.
pub(crate) const PI_QUARTER_INV: f64 = 0.7511255444649425; // pi^(-0.25)

/// One scale of the 1-D transform: `coeffs[u]` approximates `Wf(u, s)`.
#[derive(Debug, Clone)]
pub struct WaveletPlane1D {
    scale: f64,
    coeffs: Vec<f64>,
}

impl WaveletPlane1D {
    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }
}

/// One scale of the 2-D transform: gradient components, modulus and angle.
///
/// `angle` holds the gradient direction `Af` in `(-pi/2, 3*pi/2]`; where the
/// modulus vanishes the stored angle is 0 and must not be read (such pixels
/// never pass the mod-max floor).
#[derive(Debug, Clone)]
pub struct WaveletPlane2D {
    scale: f64,
    rows: usize,
    cols: usize,
    wx: Vec<f64>,
    wy: Vec<f64>,
    modulus: Vec<f64>,
    angle: Vec<f64>,
}

impl WaveletPlane2D {
    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn wx(&self) -> &[f64] {
        &self.wx
    }

    pub fn wy(&self) -> &[f64] {
        &self.wy
    }

    pub fn modulus(&self) -> &[f64] {
        &self.modulus
    }

    pub fn angle(&self) -> &[f64] {
        &self.angle
    }

    #[inline]
    pub fn idx(&self, r: usize, c: usize) -> usize {
        r * self.cols + c
    }
}

#[cfg(test)]
pub(crate) fn test_plane(coeffs: Vec<f64>, scale: f64) -> WaveletPlane1D {
    WaveletPlane1D { scale, coeffs }
}

/// Direction of the wavelet transform vector, in `(-pi/2, 3*pi/2]`:
/// `arctan(wy/wx)` for `wx >= 0`, `pi + arctan(wy/wx)` for `wx < 0`.
pub fn angle_of(wx: f64, wy: f64) -> Result<f64> {
    if wx == 0.0 && wy == 0.0 {
        return Err(Error::arg("angle undefined for zero gradient"));
    }
    Ok(if wx > 0.0 {
        (wy / wx).atan()
    } else if wx < 0.0 {
        PI + (wy / wx).atan()
    } else if wy > 0.0 {
        PI / 2.0
    } else {
        // wy < 0: -pi/2 is excluded from the range, map to 3*pi/2
        3.0 * PI / 2.0
    })
}

/// Truncation radius of the sampled kernels at scale `s`.
pub fn kernel_radius(s: f64) -> usize {
    (6.0 * s).ceil() as usize
}

/// Sampled 1-D wavelet correlation kernel `g[j] = psi(j/s)/sqrt(s)`,
/// `j in [-R, R]`. The samples are exactly antisymmetric, so the truncated
/// kernel is exactly zero-mean and constant signals transform to zero.
pub fn wavelet_kernel(s: f64) -> Vec<f64> {
    let r = kernel_radius(s) as i64;
    (-r..=r)
        .map(|j| {
            let t = j as f64 / s;
            std::f64::consts::SQRT_2 * PI_QUARTER_INV * t * (-0.5 * t * t).exp() / s.sqrt()
        })
        .collect()
}

/// Sampled 2-D derivative correlation kernel `(j/s^2) * theta(j/s)`; the
/// correlation of a row with this kernel gives `s * d/dx (f * theta_s)`
/// once the cross direction is smoothed with [`smoothing_kernel`].
fn derivative_kernel(s: f64) -> Vec<f64> {
    let r = kernel_radius(s) as i64;
    (-r..=r)
        .map(|j| {
            let t = j as f64 / s;
            (j as f64 / (s * s)) * PI_QUARTER_INV * (-0.5 * t * t).exp()
        })
        .collect()
}

/// Sampled smoothing kernel `theta(j/s)`; deliberately not normalized to
/// unit sum, the continuum constants are part of the transform definition.
fn smoothing_kernel(s: f64) -> Vec<f64> {
    let r = kernel_radius(s) as i64;
    (-r..=r)
        .map(|j| {
            let t = j as f64 / s;
            PI_QUARTER_INV * (-0.5 * t * t).exp()
        })
        .collect()
}

fn check_scale(s: f64, n: usize) -> Result<usize> {
    if !(s >= 1.0) {
        return Err(Error::arg(format!(
            "scale {s} below the discrete minimum 1"
        )));
    }
    let r = kernel_radius(s);
    if r >= n {
        return Err(Error::arg(format!(
            "signal of length {n} too short for kernel radius {r} after mirroring"
        )));
    }
    Ok(r)
}

/// 1-D wavelet transform at scale `s >= 1`.
pub fn cwt1d(f: &Signal1D, s: f64) -> Result<WaveletPlane1D> {
    let r = check_scale(s, f.len())?;
    let kernel = wavelet_kernel(s);
    let coeffs = Correlator::new(f.len(), r, &[kernel])
        .apply(f.samples())
        .pop()
        .unwrap();
    Ok(WaveletPlane1D { scale: s, coeffs })
}

/// 2-D wavelet transform at scale `s >= 1`: `wx`, `wy` are the components of
/// `s * grad(f * theta_s)`, plus derived modulus and angle grids.
pub fn cwt2d(f: &Image2D, s: f64) -> Result<WaveletPlane2D> {
    let r = check_scale(s, f.cols().min(f.rows()))?;
    let (rows, cols) = (f.rows(), f.cols());
    let deriv = derivative_kernel(s);
    let smooth = smoothing_kernel(s);

    // row pass: correlate every row with both kernels
    let row_corr = Correlator::new(cols, r, &[deriv.clone(), smooth.clone()]);
    let mut dx = vec![0.0; rows * cols]; // derivative along x
    let mut sx = vec![0.0; rows * cols]; // smoothed along x
    for row in 0..rows {
        let out = row_corr.apply(f.row(row));
        dx[row * cols..(row + 1) * cols].copy_from_slice(&out[0]);
        sx[row * cols..(row + 1) * cols].copy_from_slice(&out[1]);
    }

    // column pass on the transposed grids
    let col_corr = Correlator::new(rows, r, &[smooth, deriv]);
    let dx_t = transpose(&dx, rows, cols);
    let sx_t = transpose(&sx, rows, cols);
    let mut wx_t = vec![0.0; rows * cols];
    let mut wy_t = vec![0.0; rows * cols];
    for col in 0..cols {
        let out = col_corr.apply(&dx_t[col * rows..(col + 1) * rows]);
        wx_t[col * rows..(col + 1) * rows].copy_from_slice(&out[0]);
        let out = col_corr.apply_one(&sx_t[col * rows..(col + 1) * rows], 1);
        wy_t[col * rows..(col + 1) * rows].copy_from_slice(&out);
    }
    let wx = transpose(&wx_t, cols, rows);
    let wy = transpose(&wy_t, cols, rows);

    let mut modulus = vec![0.0; rows * cols];
    let mut angle = vec![0.0; rows * cols];
    for i in 0..rows * cols {
        modulus[i] = wx[i].hypot(wy[i]);
        if modulus[i] > 0.0 {
            angle[i] = angle_of(wx[i], wy[i]).expect("nonzero gradient");
        }
    }
    Ok(WaveletPlane2D {
        scale: s,
        rows,
        cols,
        wx,
        wy,
        modulus,
        angle,
    })
}

fn transpose(data: &[f64], rows: usize, cols: usize) -> Vec<f64> {
    let mut out = vec![0.0; data.len()];
    for r in 0..rows {
        for c in 0..cols {
            out[c * rows + r] = data[r * cols + c];
        }
    }
    out
}

/// Cross-correlation of a mirror-extended signal with one or more centered
/// kernels of equal radius. Frequency-domain for long signals, direct below
/// [`DIRECT_CONV_LIMIT`].
struct Correlator {
    n: usize,
    radius: usize,
    kernels: Vec<Vec<f64>>,
    fft: Option<FftPass>,
}

struct FftPass {
    len: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    spectra: Vec<Vec<Complex<f64>>>,
}

impl Correlator {
    fn new(n: usize, radius: usize, kernels: &[Vec<f64>]) -> Self {
        assert!(kernels.iter().all(|k| k.len() == 2 * radius + 1));
        assert!(radius < n, "mirror extension needs radius below the signal length");
        let fft = if n >= DIRECT_CONV_LIMIT {
            let len = next_fast_len(n + 2 * radius);
            let mut planner = FftPlanner::new();
            let forward = planner.plan_fft_forward(len);
            let inverse = planner.plan_fft_inverse(len);
            let spectra = kernels
                .iter()
                .map(|k| {
                    let mut buf = vec![Complex::new(0.0, 0.0); len];
                    for (off, &v) in k.iter().enumerate() {
                        let j = off as i64 - radius as i64;
                        buf[(j.rem_euclid(len as i64)) as usize] = Complex::new(v, 0.0);
                    }
                    forward.process(&mut buf);
                    buf
                })
                .collect();
            Some(FftPass {
                len,
                forward,
                inverse,
                spectra,
            })
        } else {
            None
        };
        Correlator {
            n,
            radius,
            kernels: kernels.to_vec(),
            fft,
        }
    }

    /// Mirror-extend `signal` (no edge repeat) into a buffer of length
    /// `n + 2 radius`.
    fn extend(&self, signal: &[f64]) -> Vec<f64> {
        let (n, r) = (self.n, self.radius);
        let mut ext = Vec::with_capacity(n + 2 * r);
        for i in 0..n + 2 * r {
            let j = i as i64 - r as i64;
            let src = if j < 0 {
                (-j) as usize
            } else if j as usize >= n {
                2 * n - 2 - j as usize
            } else {
                j as usize
            };
            ext.push(signal[src]);
        }
        ext
    }

    fn apply(&self, signal: &[f64]) -> Vec<Vec<f64>> {
        (0..self.kernels.len())
            .map(|k| self.apply_one(signal, k))
            .collect()
    }

    fn apply_one(&self, signal: &[f64], which: usize) -> Vec<f64> {
        debug_assert_eq!(signal.len(), self.n);
        let ext = self.extend(signal);
        let (n, r) = (self.n, self.radius);
        match &self.fft {
            Some(pass) => {
                let mut buf = vec![Complex::new(0.0, 0.0); pass.len];
                for (i, &v) in ext.iter().enumerate() {
                    buf[i] = Complex::new(v, 0.0);
                }
                pass.forward.process(&mut buf);
                let spec = &pass.spectra[which];
                for (b, k) in buf.iter_mut().zip(spec) {
                    *b *= k.conj();
                }
                pass.inverse.process(&mut buf);
                let norm = 1.0 / pass.len as f64;
                (r..r + n).map(|u| buf[u].re * norm).collect()
            }
            None => {
                let kernel = &self.kernels[which];
                (0..n)
                    .map(|u| {
                        kernel
                            .iter()
                            .enumerate()
                            .map(|(off, &kv)| ext[u + off] * kv)
                            .sum()
                    })
                    .collect()
            }
        }
    }
}

/// Smallest 2^a * 3^b >= n; keeps rustfft on fast mixed-radix paths.
fn next_fast_len(n: usize) -> usize {
    let mut best = usize::MAX;
    let mut p2 = 1usize;
    while p2 < best {
        let mut v = p2;
        while v < n {
            v *= 3;
        }
        best = best.min(v);
        match p2.checked_mul(2) {
            Some(next) if next <= 2 * n => p2 = next,
            _ => break,
        }
    }
    best.max(n)
}
