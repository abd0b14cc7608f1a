//! Command-line front end.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::error::{ContextKind, ContextValue, ErrorKind};
use clap::Parser;
use lpcont_core::{MeasureSpace, ProblemParams, SamplerConfig};

use crate::error::{config_error, RunError};
use crate::experiment::{run_experiment, write_report, ExperimentConfig, Format, Mode};
use crate::io::{load_kernel, parse_list};

/// Sweep p around p* and compare the certified continuity window of the
/// L_p balls with sampled Hausdorff distances.
#[derive(Debug, Parser)]
#[command(name = "lpcont", version, about)]
pub struct Cli {
    /// What to measure.
    #[arg(long, value_enum, default_value = "ball_continuity")]
    pub mode: Mode,
    /// Centre exponent p* (> 1).
    #[arg(long)]
    pub pstar: f64,
    /// Ball radius.
    #[arg(long, default_value_t = 1.0)]
    pub r: f64,
    /// Target accuracy, in (0, sigma*).
    #[arg(long)]
    pub epsilon: f64,
    /// Atom weights as a comma list; in urysohn mode defaults to the
    /// kernel's input space.
    #[arg(long)]
    pub weights: Option<String>,
    /// Dimension of the value space.
    #[arg(long, default_value_t = 1)]
    pub dim: usize,
    /// Exponents to evaluate, as a comma list.
    #[arg(long = "p-grid")]
    pub p_grid: String,
    /// Random candidates per estimate.
    #[arg(long, default_value_t = 1000)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Kernel JSON file (urysohn mode).
    #[arg(long)]
    pub kernel: Option<PathBuf>,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
}

impl Cli {
    /// Turns the flags into a validated-shape configuration.
    pub fn into_config(self) -> Result<ExperimentConfig, RunError> {
        let kernel = match &self.kernel {
            Some(path) => Some(load_kernel(path)?),
            None => None,
        };
        let space = match (&self.weights, &kernel) {
            (Some(w), _) => {
                let weights = parse_list("weights", w)?;
                MeasureSpace::new(weights, self.dim).map_err(|e| config_error("weights", e))?
            }
            (None, Some(k)) if self.mode == Mode::Urysohn => k.input_space.clone(),
            (None, _) => return Err(RunError::config("weights", "--weights is required")),
        };
        let p_grid = parse_list("p-grid", &self.p_grid)?;
        let params = ProblemParams {
            p_star: self.pstar,
            r: self.r,
            mu_total: space.total_measure(),
            epsilon: self.epsilon,
        };
        Ok(ExperimentConfig {
            mode: self.mode,
            params,
            space,
            p_grid,
            sampler: SamplerConfig::new(self.seed, self.samples),
            kernel,
            output_path: self.out.map(|p| p.display().to_string()),
            format: self.format,
        })
    }
}

/// Converts a clap parse failure into the JSON error shape.
fn usage_error(err: &clap::Error) -> RunError {
    let field = match err.get(ContextKind::InvalidArg) {
        Some(ContextValue::String(s)) => Some(s.clone()),
        Some(ContextValue::Strings(v)) => v.first().cloned(),
        _ => None,
    }
    .map(|s| {
        s.trim_start_matches('-')
            .split([' ', '='])
            .next()
            .unwrap_or_default()
            .to_owned()
    });
    let message = err
        .to_string()
        .lines()
        .next()
        .unwrap_or_default()
        .trim_start_matches("error: ")
        .to_owned();
    // Field names are a closed set; map back to the static flag names.
    const FLAGS: [&str; 12] = [
        "mode", "pstar", "r", "epsilon", "weights", "dim", "p-grid", "samples", "seed", "kernel",
        "out", "format",
    ];
    let field = field.and_then(|f| FLAGS.iter().copied().find(|flag| *flag == f));
    RunError::Config { field, message }
}

/// Parses `args`, runs the experiment and writes the report. Help and
/// version requests print to stdout and count as success.
pub fn run<I, T>(args: I) -> Result<(), RunError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            print!("{e}");
            return Ok(());
        }
        Err(e) => return Err(usage_error(&e)),
    };
    let out = cli.out.clone();
    let config = cli.into_config()?;
    let report = run_experiment(&config)?;
    match out {
        Some(path) => {
            let file = File::create(&path).map_err(|source| RunError::Io {
                path: path.clone(),
                source,
            })?;
            let mut w = BufWriter::new(file);
            write_report(&report, config.format, &mut w)?;
            w.flush().map_err(|source| RunError::Io { path, source })
        }
        None => {
            let stdout = io::stdout();
            write_report(&report, config.format, stdout.lock())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn missing_flag_is_a_json_config_error() {
        let err = run(["lpcont", "--epsilon", "0.4", "--p-grid", "2"]).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        let line = err.to_json_line();
        assert!(line.contains("\"field\":\"pstar\""), "{line}");
        assert!(!line.contains('\n'));
    }

    #[test]
    fn bad_value_names_the_field() {
        let err = run([
            "lpcont",
            "--pstar",
            "two",
            "--epsilon",
            "0.4",
            "--p-grid",
            "2",
        ])
        .unwrap_err();
        assert!(
            err.to_json_line().contains("\"field\":\"pstar\""),
            "{}",
            err.to_json_line()
        );
    }

    #[test]
    fn weights_are_required_for_balls() {
        let err = run([
            "lpcont",
            "--pstar",
            "2",
            "--epsilon",
            "0.4",
            "--p-grid",
            "2",
        ])
        .unwrap_err();
        assert!(err.to_json_line().contains("\"field\":\"weights\""));
    }
}
