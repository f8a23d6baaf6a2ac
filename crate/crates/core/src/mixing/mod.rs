//! Total variation, worst-case mixing curves and parameter sweeps.

mod curve;
mod diagnostics;
mod exact;
mod sweep;
mod tv;

pub use curve::{
    default_cap, mixing_time, worst_case_curve, MixingCurve, MixingOptions, MixingOutcome, StartSet,
    CROSSING_TOL, DEFAULT_CAP,
};
pub use diagnostics::{
    bounded_regime_check, cutoff_diagnostics, BoundedReport, BoundedRow, CutoffReport, CutoffRow,
};
pub use exact::worst_case_curve_exact;
pub use sweep::{table_ns, table_ratios, run_cell, sweep, Axis, Cell, SweepGrid, SweepTable};
pub use tv::{evolve, tv_distance};
