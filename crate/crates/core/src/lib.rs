//! Certified continuity windows for the set-valued map `p ↦ B_p(r)`, the
//! closed `L_p` ball on a finite atomic measure space, measured in the `L₁`
//! Hausdorff pseudometric.
//!
//! The crate is `no_std` and only needs `alloc`. It provides:
//!
//! * [`lp`]: measure spaces, vector-valued simple functions, weighted norms
//!   and ball membership;
//! * [`bounds`]: the closed-form constant ledger ending in the window `δ₀(ε)`;
//! * [`witness`]: the truncation and power-rescaling maps that carry a point
//!   of one ball close to a point of another;
//! * [`hausdorff`]: exact `L₁` distance to a ball, sampled Hausdorff lower
//!   bounds with analytic upper certificates, and a grid oracle;
//! * [`urysohn`]: the Urysohn integral input-output system built on top.
//!
//! File formats, the experiment runner and the CLI live in the `lpcont`
//! companion crate.
#![no_std]
// Parameter checks use `!(x > 0.0)` on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![deny(unsafe_code)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod bounds;
mod error;
pub mod hausdorff;
pub mod lp;
mod math;
pub mod sampling;
pub mod urysohn;
pub mod witness;

pub use bounds::{
    base_constants, delta_window, gamma1, gamma2, gamma3, gamma4, BaseConstants, BoundLedger,
    ProblemParams,
};
pub use error::{Error, Result};
pub use hausdorff::{
    brute_force_hausdorff, directed_distance_lower, dist_to_ball, hausdorff_estimate,
    CertificateSource, HausdorffEstimate,
};
pub use lp::{ball_contains, combine, lp_norm, make_space, BallSpec, MeasureSpace, SimpleFunction};
pub use sampling::SamplerConfig;
pub use urysohn::{
    apply_operator, output_bound_check, output_set_distance, system_constants, validate_kernel,
    Kernel, KernelConfig, KernelFamily, KernelSpec, OutputBoundReport, SystemConstants,
    ValidationReport,
};
pub use witness::{
    partition_diagnostics, rescale, truncate, truncation_defect_bound, witness_into_ball,
    PartitionDiagnostics, WitnessChain, WitnessResult,
};

/// Membership tolerance used when callers do not supply one.
pub const DEFAULT_TOL: f64 = 1e-9;
