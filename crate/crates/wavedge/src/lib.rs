//! Fast multi-scale wavelet edge detection for noisy 1-D signals and images.
//!
//! The library computes the continuous wavelet transform at a sparse set of
//! scales, extracts modulus maxima, and connects them across scales with a
//! decision function combining a distance, a decay and a sign (1-D) or angle
//! (2-D) criterion. Connected maxima-lines drive an edge detector that scores
//! candidate edges by their behavior across the whole scale range, which keeps
//! low-contrast edges while rejecting speckle-like noise.
//!
//! Module map:
//! - [`signal`], [`raster`]: containers, cross-sections and PGM/PNG I/O.
//! - [`cwt`]: 1-D and 2-D transforms at arbitrary scales.
//! - [`modmax`]: modulus-maxima extraction and boundary-curve chaining.
//! - [`patterns`]: the model-edge laboratory (analytic transforms, critical
//!   scales, reliability surfaces).
//! - [`scale_filter`]: the sparse-scale connection procedure, the dense
//!   edge-focusing oracle and the false-connection audit.
//! - [`detector`]: relevance/curve scoring, thresholding and a Canny baseline.
//! - [`eval`]: speckle phantoms, Pratt figure of merit and table experiments.

// validation guards use negated comparisons (`!(x > 0.0)`) on purpose:
// they reject NaN along with the out-of-range values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cwt;
pub mod detector;
pub mod error;
pub mod eval;
pub mod modmax;
pub mod patterns;
pub mod raster;
pub mod scale_filter;
pub mod signal;

pub use cwt::{angle_of, cwt1d, cwt2d, WaveletPlane1D, WaveletPlane2D};
pub use detector::{
    canny_baseline, canny_with_ratios, curve_score, detect_1d, detect_2d, relevance, relevance_2d,
    DetectorParams, EdgeMap, ScaleWeight, Threshold,
};
pub use error::{Error, Result};
pub use eval::{
    falseconn_experiment, fom, generate_phantom, log_compress, run_table_experiment, FomParams,
    FomRow, PhantomLayout, PhantomSpec, ShapeSpec, TableConfig, TableKind, TableReport,
};
pub use modmax::{chain_curves, detect1d, detect2d, BoundaryCurve, ModMax1d, ModMax2d};
pub use patterns::{
    analytic_wt, critical_amplitude, critical_scale, find_modmax, q_surface, q_values, q_values_at,
    synthesize, CriticalAmplitude, CriticalScale, DecisionMode, PatternKind, PatternSpec,
    QSweepConfig, QValues,
};
pub use raster::{load_raster, write_raster};
pub use scale_filter::{
    audit, connect, decision_1d, decision_2d, edge_focusing_oracle, filter_schedule,
    filter_schedule_2d, ConnectionReport, DecisionParams, MaximaLine1d, MaximaLine2d,
};
pub use signal::{Image2D, ScaleSchedule, ScheduleKind, Signal1D};
