//! JSON file formats.
//!
//! * measure space: `{"weights": [...], "dim": n}`;
//! * simple function: array of per-atom rows, `[[x₀₀, x₀₁], [x₁₀, x₁₁], ...]`;
//! * kernel: `{"family": "linear|affine|saturating", "A": [...], "b": [...],
//!   "psi": [[...]], "input_space": {...}, "output_space": {...}}` with `A`
//!   indexed `[output atom][input atom][row][col]`.

use std::fs;
use std::path::Path;
use std::sync::Arc;

use lpcont_core::urysohn::KernelConfig;
use lpcont_core::{MeasureSpace, SimpleFunction};
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{config_error, RunError};

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, RunError> {
    let text = fs::read_to_string(path).map_err(|source| RunError::Io {
        path: path.to_owned(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|source| RunError::Parse {
        path: path.to_owned(),
        source,
    })
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), RunError> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).map_err(|source| RunError::Io {
        path: path.to_owned(),
        source,
    })
}

pub fn load_space(path: &Path) -> Result<MeasureSpace, RunError> {
    read_json(path)
}

pub fn load_kernel(path: &Path) -> Result<KernelConfig, RunError> {
    read_json(path)
}

/// Reads a simple function on `space` from its array-of-rows form.
pub fn load_function(path: &Path, space: Arc<MeasureSpace>) -> Result<SimpleFunction, RunError> {
    let rows: Vec<Vec<f64>> = read_json(path)?;
    SimpleFunction::from_rows(space, &rows).map_err(|e| config_error("function", e))
}

/// Parses a comma-separated list of reals, e.g. `1.9,2,2.1`.
pub fn parse_list(field: &'static str, text: &str) -> Result<Vec<f64>, RunError> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<f64>()
                .map_err(|_| RunError::config(field, format!("`{s}` is not a number in --{field}")))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use lpcont_core::make_space;

    #[test]
    fn list_parsing() {
        assert_eq!(
            parse_list("p-grid", "1.9, 2,2.1").unwrap(),
            vec![1.9, 2.0, 2.1]
        );
        let err = parse_list("weights", "1,x").unwrap_err();
        assert_eq!(err.code(), "invalid_config");
        assert!(err.to_json_line().contains("\"field\":\"weights\""));
    }

    #[test]
    fn file_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let space = make_space(vec![0.5, 2.0], 2).unwrap();
        let path = dir.path().join("space.json");
        write_json(&path, &*space).unwrap();
        assert_eq!(load_space(&path).unwrap(), *space);

        let f = SimpleFunction::from_rows(space.clone(), &[[1.0, -2.0], [0.25, 0.0]]).unwrap();
        let fpath = dir.path().join("f.json");
        write_json(&fpath, &f).unwrap();
        assert_eq!(load_function(&fpath, space.clone()).unwrap(), f);

        let bad = dir.path().join("bad.json");
        fs::write(&bad, "[[1.0]]").unwrap();
        assert_eq!(
            load_function(&bad, space).unwrap_err().code(),
            "invalid_config"
        );
        assert_eq!(
            load_space(&dir.path().join("missing.json"))
                .unwrap_err()
                .code(),
            "io_error"
        );
    }

    #[test]
    fn kernel_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("k.json");
        fs::write(
            &path,
            r#"{"family": "affine", "A": [[[[1.0]], [[0.5]]]], "b": [[[0.1], [0.2]]],
                "input_space": {"weights": [1, 1], "dim": 1},
                "output_space": {"weights": [2], "dim": 1}}"#,
        )
        .unwrap();
        let cfg = load_kernel(&path).unwrap();
        let k = cfg.build().unwrap();
        let c = lpcont_core::system_constants(&k, 1.0).unwrap();
        assert!((c.psi_star - 2.0).abs() < 1e-15);
        assert!((c.k_star - 0.6).abs() < 1e-15);
    }
}
