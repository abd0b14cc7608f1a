//! Experiment runner, JSON/CSV formats and the `lpcont` command line for
//! [`lpcont_core`].
//!
//! The runner sweeps an exponent grid around a centre `p*` and reports, for
//! every `p`, whether `p` lies in the certified continuity window, a sampled
//! lower bound of the `L₁` Hausdorff distance to the centre ball (or to the
//! centre output set of an integral operator), the analytic upper bound when
//! one applies, and the largest distance moved by the explicit witness map.

pub mod cli;
mod error;
pub mod experiment;
pub mod io;

pub use error::RunError;
pub use experiment::{
    check_sandwich, run_experiment, write_csv, write_json, write_report, ExperimentConfig,
    ExperimentReport, Format, Mode, Row,
};
