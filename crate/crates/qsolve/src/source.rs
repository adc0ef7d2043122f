//! Potential sources for the command line: `builtin:name[?key=value,...]`
//! specs and JSON files.
//!
//! A potential file is a JSON object in one of three forms:
//!
//! - `{"breakpoints": [b0, ..., bn], "values": [v1, ..., vn]}` — a step
//!   profile given directly;
//! - `{"builtin": "name", "params": {"key": value, ...}}` — a named model;
//! - `{"expr": "<arithmetic in x>", "support": [lo, hi]}` — a smooth
//!   potential from an expression, zero outside the support.

use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;

use qsolve_core::profile::{builtin, Potential, SmoothPotential, StepProfile};
use serde::Deserialize;
use thiserror::Error;

use crate::expr;

/// Why a potential source could not be loaded. `Io` is a filesystem failure;
/// `Content` means the spec or file text itself is invalid.
#[derive(Debug, Error)]
pub enum SourceError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{0}")]
    Content(String),
}

fn content(msg: impl Into<String>) -> SourceError {
    SourceError::Content(msg.into())
}

/// Loads a potential from a `--potential` value: either `builtin:...` or a
/// path to a JSON file.
pub fn load(spec: &str) -> Result<Potential, SourceError> {
    match spec.strip_prefix("builtin:") {
        Some(rest) => parse_builtin_spec(rest),
        None => {
            let path = PathBuf::from(spec);
            let text = fs::read_to_string(&path).map_err(|source| SourceError::Io {
                path: path.clone(),
                source,
            })?;
            parse_file(&path, &text)
        }
    }
}

fn parse_builtin_spec(rest: &str) -> Result<Potential, SourceError> {
    let (name, query) = rest.split_once('?').unwrap_or((rest, ""));
    let mut params: Vec<(&str, f64)> = Vec::new();
    if !query.is_empty() {
        for pair in query.split(',') {
            let (k, v) = pair
                .split_once('=')
                .ok_or_else(|| content(format!("malformed parameter '{pair}' (expected key=value)")))?;
            let value: f64 = v
                .parse()
                .map_err(|_| content(format!("parameter '{k}': invalid number '{v}'")))?;
            params.push((k, value));
        }
    }
    builtin(name, &params).map_err(|e| content(e.to_string()))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct StepFile {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct BuiltinFile {
    builtin: String,
    #[serde(default)]
    params: BTreeMap<String, f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ExprFile {
    expr: String,
    support: (f64, f64),
}

fn parse_file(path: &std::path::Path, text: &str) -> Result<Potential, SourceError> {
    let shown = path.display();
    let value: serde_json::Value = serde_json::from_str(text)
        .map_err(|e| content(format!("{shown}: invalid JSON: {e}")))?;
    let obj = value
        .as_object()
        .ok_or_else(|| content(format!("{shown}: potential file must hold a JSON object")))?;

    if obj.contains_key("breakpoints") || obj.contains_key("values") {
        let f: StepFile = serde_json::from_value(value.clone())
            .map_err(|e| content(format!("{shown}: {e}")))?;
        let profile = StepProfile::new(f.breakpoints, f.values)
            .map_err(|e| content(format!("{shown}: {e}")))?;
        Ok(Potential::Step(profile))
    } else if obj.contains_key("builtin") {
        let f: BuiltinFile = serde_json::from_value(value.clone())
            .map_err(|e| content(format!("{shown}: {e}")))?;
        let params: Vec<(&str, f64)> = f.params.iter().map(|(k, &v)| (k.as_str(), v)).collect();
        builtin(&f.builtin, &params).map_err(|e| content(e.to_string()))
    } else if obj.contains_key("expr") {
        let f: ExprFile = serde_json::from_value(value.clone())
            .map_err(|e| content(format!("{shown}: {e}")))?;
        let ast = expr::parse(&f.expr).map_err(|e| content(format!("{shown}: expr: {e}")))?;
        let smooth = SmoothPotential::new(f.support, move |x| ast.eval(x))
            .map_err(|e| content(format!("{shown}: {e}")))?;
        Ok(Potential::Smooth(smooth))
    } else {
        Err(content(format!(
            "{shown}: potential object needs breakpoints/values, builtin, or expr/support"
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write as _;

    fn write_temp(text: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(text.as_bytes()).unwrap();
        f
    }

    #[test]
    fn builtin_spec_with_params() {
        let p = load("builtin:rect_double_barrier?height=30,gap=1,width=0.5").unwrap();
        let Potential::Step(profile) = p else {
            panic!("rectangular builtin is a step profile")
        };
        assert_eq!(profile.layer_count(), 3);
        assert_eq!(profile.max_value(), 30.0);
        assert_eq!(profile.right_edge(), 2.0);
    }

    #[test]
    fn unknown_builtin_lists_the_available_names() {
        let err = load("builtin:nope").unwrap_err().to_string();
        assert!(err.contains("harmonic_model"), "{err}");
    }

    #[test]
    fn malformed_builtin_params_are_content_errors() {
        assert!(matches!(
            load("builtin:harmonic_model?a"),
            Err(SourceError::Content(_))
        ));
        assert!(matches!(
            load("builtin:harmonic_model?a=two"),
            Err(SourceError::Content(_))
        ));
        assert!(matches!(
            load("builtin:harmonic_model?b=2"),
            Err(SourceError::Content(_))
        ));
    }

    #[test]
    fn missing_file_is_an_io_error() {
        assert!(matches!(
            load("/no/such/file.json"),
            Err(SourceError::Io { .. })
        ));
    }

    #[test]
    fn step_file_loads() {
        let f = write_temp(r#"{"breakpoints": [0.0, 1.0, 2.0], "values": [3.0, -1.0]}"#);
        let p = load(f.path().to_str().unwrap()).unwrap();
        let Potential::Step(profile) = p else {
            panic!("expected a step profile")
        };
        assert_eq!(profile.values(), &[3.0, -1.0]);
    }

    #[test]
    fn builtin_file_loads() {
        let f = write_temp(r#"{"builtin": "harmonic_model", "params": {"a": 3.0}}"#);
        let p = load(f.path().to_str().unwrap()).unwrap();
        let Potential::Smooth(s) = p else {
            panic!("expected a smooth potential")
        };
        assert_eq!(s.well_region(), Some((-3.0, 3.0)));
    }

    #[test]
    fn expr_file_loads_and_evaluates() {
        let f = write_temp(r#"{"expr": "x^2", "support": [-4.0, 4.0]}"#);
        let p = load(f.path().to_str().unwrap()).unwrap();
        let Potential::Smooth(s) = p else {
            panic!("expected a smooth potential")
        };
        assert_eq!(s.eval(3.0), 9.0);
        assert_eq!(s.eval(5.0), 0.0, "zero outside the support");
    }

    #[test]
    fn expr_errors_keep_the_position() {
        let f = write_temp(r#"{"expr": "x^*2", "support": [-4.0, 4.0]}"#);
        let err = load(f.path().to_str().unwrap()).unwrap_err().to_string();
        assert!(err.contains("position 3"), "{err}");
    }

    #[test]
    fn unrecognized_shape_is_rejected() {
        let f = write_temp(r#"{"wat": 1}"#);
        let err = load(f.path().to_str().unwrap()).unwrap_err().to_string();
        assert!(err.contains("breakpoints"), "{err}");
    }
}
