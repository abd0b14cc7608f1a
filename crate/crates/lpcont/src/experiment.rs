//! Sweeps of `p` around `p*`: certified window, sampled Hausdorff lower bound
//! and measured witness distances side by side.

use std::io::Write;
use std::sync::Arc;

use lpcont_core::sampling::{sphere_point, spikes};
use lpcont_core::urysohn::{KernelConfig, OutputBoundReport, ValidationReport};
use lpcont_core::{
    apply_operator, delta_window, hausdorff_estimate, output_bound_check, output_set_distance,
    system_constants, validate_kernel, witness_into_ball, BallSpec, BoundLedger, HausdorffEstimate,
    KernelSpec, MeasureSpace, ProblemParams, SamplerConfig, SystemConstants,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{config_error, invariant_error, RunError};

/// Slack allowed between a measured quantity and its analytic bound.
pub const REPORT_TOL: f64 = 1e-9;

/// Number of random argument pairs used to check a kernel's `ψ` field.
pub const KERNEL_PROBES: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Distances between the balls themselves.
    #[value(name = "ball_continuity", alias = "ball-continuity")]
    BallContinuity,
    /// Distances between the output sets of an integral operator.
    #[value(name = "urysohn")]
    Urysohn,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

/// A complete, self-describing experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub mode: Mode,
    pub params: ProblemParams,
    pub space: MeasureSpace,
    pub p_grid: Vec<f64>,
    pub sampler: SamplerConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernel: Option<KernelConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_path: Option<String>,
    pub format: Format,
}

/// One line of the sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub p: f64,
    /// `|p − p*| < δ₀`.
    pub in_window: bool,
    pub delta0: f64,
    /// Sampled lower bound of the Hausdorff distance to the `p*` set.
    pub h1_lower: f64,
    /// Analytic upper bound when the window applies.
    pub certified_upper: Option<f64>,
    /// Largest `L₁` distance between a sampled point and its witness.
    pub witness_max_l1: f64,
    pub samples: usize,
    pub seed: u64,
}

/// Diagnostics of the integral-operator checks run before the sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemReport {
    pub constants: SystemConstants,
    pub kernel_validation: ValidationReport,
    pub output_bound: OutputBoundReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub ledger: BoundLedger,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub system: Option<SystemReport>,
    pub rows: Vec<Row>,
}

fn same_measure(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs())
}

impl ExperimentConfig {
    /// Checks every field and returns the ledger the run will use.
    pub fn validate(&self) -> Result<BoundLedger, RunError> {
        self.params
            .validate()
            .map_err(|e| config_error("params", e))?;
        if self.p_grid.is_empty() {
            return Err(RunError::config("p-grid", "the p grid is empty"));
        }
        if let Some(p) = self.p_grid.iter().find(|p| !(p.is_finite() && **p > 1.0)) {
            return Err(RunError::config(
                "p-grid",
                format!("every p must be finite and > 1, got {p}"),
            ));
        }
        if self.sampler.n_samples == 0 {
            return Err(RunError::config(
                "samples",
                "at least one sample is required",
            ));
        }
        if !same_measure(self.space.total_measure(), self.params.mu_total) {
            return Err(RunError::config(
                "weights",
                format!(
                    "total measure of the space ({}) differs from mu_total ({})",
                    self.space.total_measure(),
                    self.params.mu_total
                ),
            ));
        }
        match (self.mode, &self.kernel) {
            (Mode::Urysohn, None) => {
                return Err(RunError::config("kernel", "urysohn mode requires a kernel"))
            }
            (Mode::Urysohn, Some(k)) if k.input_space != self.space => {
                return Err(RunError::config(
                    "weights",
                    "the space must be the kernel's input space",
                ));
            }
            _ => {}
        }
        delta_window(&self.params).map_err(|e| config_error("epsilon", e))
    }
}

/// What a row measures: the balls themselves, or their images.
enum Target<'a> {
    Balls,
    Outputs {
        kernel: &'a KernelSpec,
        psi_star: f64,
    },
}

fn compute_row(
    config: &ExperimentConfig,
    space: &Arc<MeasureSpace>,
    ledger: &BoundLedger,
    target: &Target<'_>,
    p: f64,
) -> Result<Row, RunError> {
    let params = &config.params;
    let (ps, r) = (params.p_star, params.r);
    let ball = BallSpec::new(p, r).map_err(|e| config_error("p-grid", e))?;
    let centre = BallSpec::new(ps, r).map_err(|e| config_error("pstar", e))?;

    let estimate: HausdorffEstimate = match target {
        Target::Balls => hausdorff_estimate(&ball, &centre, space, Some(ledger), &config.sampler),
        Target::Outputs { kernel, .. } => {
            output_set_distance(*kernel, p, ps, r, ledger, &config.sampler)
        }
    }
    .map_err(invariant_error)?;

    // Carry sampled points of B_p into B_{p*} and measure how far they moved.
    let mut rng = config.sampler.rng();
    let random = (0..config.sampler.n_samples).map(|_| sphere_point(&mut rng, space, &ball));
    let mut witness_max_l1 = 0.0f64;
    for f in spikes(space, &ball).into_iter().chain(random) {
        let w = witness_into_ball(&f, p, ps, params, ledger).map_err(invariant_error)?;
        let (moved, bound) = match target {
            Target::Balls => (w.l1_distance, w.certified_bound),
            Target::Outputs { kernel, psi_star } => {
                let fx = apply_operator(*kernel, &f).map_err(invariant_error)?;
                let fw = apply_operator(*kernel, &w.witness).map_err(invariant_error)?;
                (
                    fx.l1_distance(&fw).map_err(invariant_error)?,
                    w.certified_bound.map(|b| b * psi_star),
                )
            }
        };
        if let Some(b) = bound {
            if moved > b + REPORT_TOL {
                return Err(RunError::Invariant(format!(
                    "witness moved {moved} at p = {p}, above its certified bound {b}"
                )));
            }
        }
        witness_max_l1 = witness_max_l1.max(moved);
    }

    Ok(Row {
        p,
        in_window: ledger.in_window(p),
        delta0: ledger.delta0,
        h1_lower: estimate.lower,
        certified_upper: estimate.upper,
        witness_max_l1,
        samples: estimate.samples_used,
        seed: estimate.seed,
    })
}

/// Re-asserts `h1_lower ≤ certified_upper` on finished rows.
pub fn check_sandwich(rows: &[Row]) -> Result<(), RunError> {
    for row in rows {
        if let Some(upper) = row.certified_upper {
            if row.h1_lower > upper + REPORT_TOL {
                return Err(RunError::Invariant(format!(
                    "row p = {}: lower bound {} exceeds certified upper bound {upper}",
                    row.p, row.h1_lower
                )));
            }
        }
    }
    Ok(())
}

/// Runs the sweep. Rows are computed in parallel and returned sorted by `p`;
/// the result depends only on the configuration.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport, RunError> {
    let ledger = config.validate()?;
    let space = Arc::new(config.space.clone());

    let kernel = match (&config.mode, &config.kernel) {
        (Mode::Urysohn, Some(k)) => Some(k.build().map_err(|e| config_error("kernel", e))?),
        _ => None,
    };
    let system = match &kernel {
        Some(k) => {
            let probes = SamplerConfig::new(config.sampler.seed, KERNEL_PROBES);
            let kernel_validation =
                validate_kernel(k, &probes).map_err(|e| config_error("kernel", e))?;
            if !kernel_validation.passed {
                return Err(RunError::config(
                    "kernel",
                    format!(
                        "psi does not bound the kernel's Lipschitz ratio (observed ratio {})",
                        kernel_validation.max_ratio
                    ),
                ));
            }
            let constants = system_constants(k, config.params.r).map_err(invariant_error)?;
            let output_bound =
                output_bound_check(k, config.params.p_star, config.params.r, &config.sampler)
                    .map_err(invariant_error)?;
            Some(SystemReport {
                constants,
                kernel_validation,
                output_bound,
            })
        }
        None => None,
    };
    let target = match (&kernel, &system) {
        (Some(kernel), Some(s)) => Target::Outputs {
            kernel,
            psi_star: s.constants.psi_star,
        },
        _ => Target::Balls,
    };

    let mut rows = config
        .p_grid
        .par_iter()
        .map(|&p| compute_row(config, &space, &ledger, &target, p))
        .collect::<Result<Vec<_>, _>>()?;
    rows.sort_by(|a, b| a.p.total_cmp(&b.p));
    check_sandwich(&rows)?;
    Ok(ExperimentReport {
        config: config.clone(),
        ledger,
        system,
        rows,
    })
}

/// Fixed CSV header.
pub const CSV_COLUMNS: [&str; 8] = [
    "p",
    "in_window",
    "delta0",
    "h1_lower",
    "certified_upper",
    "witness_max_l1",
    "samples",
    "seed",
];

/// Writes the rows as CSV. Reals use the shortest representation that reads
/// back exactly; a missing upper bound is an empty field.
pub fn write_csv<W: Write>(rows: &[Row], out: W) -> Result<(), RunError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_COLUMNS)?;
    for row in rows {
        w.write_record([
            row.p.to_string(),
            row.in_window.to_string(),
            row.delta0.to_string(),
            row.h1_lower.to_string(),
            row.certified_upper
                .map(|u| u.to_string())
                .unwrap_or_default(),
            row.witness_max_l1.to_string(),
            row.samples.to_string(),
            row.seed.to_string(),
        ])?;
    }
    w.flush().map_err(|source| RunError::Io {
        path: "<csv>".into(),
        source,
    })?;
    Ok(())
}

/// Writes the whole report as JSON `{config, ledger, system?, rows}`.
pub fn write_json<W: Write>(report: &ExperimentReport, mut out: W) -> Result<(), RunError> {
    serde_json::to_writer_pretty(&mut out, report)?;
    out.write_all(b"\n").map_err(|source| RunError::Io {
        path: "<json>".into(),
        source,
    })?;
    Ok(())
}

pub fn write_report<W: Write>(
    report: &ExperimentReport,
    format: Format,
    out: W,
) -> Result<(), RunError> {
    match format {
        Format::Csv => write_csv(&report.rows, out),
        Format::Json => write_json(report, out),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(mode: Mode, p_grid: Vec<f64>) -> ExperimentConfig {
        ExperimentConfig {
            mode,
            params: ProblemParams {
                p_star: 2.0,
                r: 1.0,
                mu_total: 2.0,
                epsilon: 0.4,
            },
            space: MeasureSpace::new(vec![1.0, 1.0], 1).unwrap(),
            p_grid,
            sampler: SamplerConfig::new(5, 200),
            kernel: None,
            output_path: None,
            format: Format::Csv,
        }
    }

    #[test]
    fn ball_sweep_rows() {
        let report = run_experiment(&config(Mode::BallContinuity, vec![2.1, 1.9, 2.0])).unwrap();
        let ps: Vec<f64> = report.rows.iter().map(|r| r.p).collect();
        assert_eq!(ps, vec![1.9, 2.0, 2.1]);
        let centre = &report.rows[1];
        assert_eq!(centre.h1_lower, 0.0);
        assert!(centre.in_window);
        assert_eq!(centre.certified_upper, Some(0.4));
        assert!(!report.rows[0].in_window && report.rows[0].certified_upper.is_none());
        assert!(report.rows[0].h1_lower > 0.0);
    }

    #[test]
    fn in_window_row_is_certified() {
        let ledger = delta_window(&config(Mode::BallContinuity, vec![2.0]).params).unwrap();
        let p = 2.0 + ledger.delta0 / 2.0;
        let report = run_experiment(&config(Mode::BallContinuity, vec![p])).unwrap();
        let row = &report.rows[0];
        assert!(row.in_window);
        assert_eq!(row.certified_upper, Some(0.4));
        assert!(row.h1_lower <= 0.4 && row.witness_max_l1 <= 0.4);
    }

    #[test]
    fn config_errors() {
        let err = run_experiment(&config(Mode::Urysohn, vec![2.0])).unwrap_err();
        assert_eq!((err.code(), err.exit_code()), ("invalid_config", 2));
        assert!(err.to_json_line().contains("\"field\":\"kernel\""));

        let err = run_experiment(&config(Mode::BallContinuity, vec![1.0])).unwrap_err();
        assert!(err.to_json_line().contains("p-grid"));

        let mut c = config(Mode::BallContinuity, vec![2.0]);
        c.params.epsilon = 0.6;
        let err = run_experiment(&c).unwrap_err();
        assert!(
            err.to_json_line().contains("\"field\":\"epsilon\""),
            "{}",
            err.to_json_line()
        );

        let mut c = config(Mode::BallContinuity, vec![2.0]);
        c.params.mu_total = 3.0;
        assert!(run_experiment(&c)
            .unwrap_err()
            .to_json_line()
            .contains("weights"));
    }

    #[test]
    fn sandwich_recheck_flags_bad_rows() {
        let row = Row {
            p: 2.0,
            in_window: true,
            delta0: 1e-5,
            h1_lower: 0.5,
            certified_upper: Some(0.4),
            witness_max_l1: 0.0,
            samples: 1,
            seed: 0,
        };
        let err = check_sandwich(&[row]).unwrap_err();
        assert_eq!((err.code(), err.exit_code()), ("invariant_violation", 1));
    }

    #[test]
    fn csv_layout() {
        let report = run_experiment(&config(Mode::BallContinuity, vec![3.0, 2.0])).unwrap();
        let mut buf = Vec::new();
        write_csv(&report.rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(
            lines[0],
            "p,in_window,delta0,h1_lower,certified_upper,witness_max_l1,samples,seed"
        );
        assert!(lines[1].starts_with("2,true,") && lines[1].contains(",0.4,"));
        assert!(lines[2].starts_with("3,false,") && lines[2].contains(",,"));
    }

    #[test]
    fn json_report_round_trips() {
        let report = run_experiment(&config(Mode::BallContinuity, vec![2.0, 2.5])).unwrap();
        let mut buf = Vec::new();
        write_json(&report, &mut buf).unwrap();
        let value: serde_json::Value = serde_json::from_slice(&buf).unwrap();
        assert!(value["rows"][1]["certified_upper"].is_null());
        assert!(value["ledger"]["delta0"].is_number());
        let back: ExperimentReport = serde_json::from_slice(&buf).unwrap();
        assert_eq!(back, report);
    }
}
