//! Scenario loading, overrides, presets and the `indilab` commands.
//!
//! Every command returns a [`CliError`] on failure; its
//! [`exit_code`](CliError::exit_code) is 2 for configuration problems and 3
//! for failures while running or writing artifacts.

mod commands;
mod presets;

pub use commands::{
    cmd_compare, cmd_gainmap, cmd_run, cmd_sweep, CompareConfig, GainTable, RunConfig, RunReport,
    SweepKind, SweepReport,
};
pub use presets::{preset, preset_names, PRESETS};

use std::path::Path;

use serde_json::Value;
use thiserror::Error;

use crate::sim::{Scenario, SimError};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "INDILAB_OUT_DIR";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("runtime error: {0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        if e.is_config_error() {
            CliError::Config(e.to_string())
        } else {
            CliError::Runtime(e.to_string())
        }
    }
}

pub(crate) fn io_error(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Runtime(format!("{}: {e}", path.display()))
}

/// Raw scenario JSON from a file path or, failing that, a preset name.
pub fn load_source(source: &str) -> Result<Value, CliError> {
    let path = Path::new(source);
    if path.exists() {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{source}: {e}")))?;
        return serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{source}: {e}")));
    }
    match preset(source) {
        Some(text) => Ok(serde_json::from_str(text).expect("presets are valid JSON")),
        None => Err(CliError::Config(format!(
            "`{source}` is neither a file nor a preset (presets: {})",
            preset_names().join(", ")
        ))),
    }
}

/// Applies one `dotted.path=value` override. The value is parsed as JSON and
/// falls back to a plain string. `controller=NAME` sets the controller kind.
pub fn apply_override(doc: &mut Value, spec: &str) -> Result<(), CliError> {
    let (path, raw) = spec
        .split_once('=')
        .ok_or_else(|| CliError::Config(format!("override `{spec}` is not key=value")))?;
    let value: Value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let keys: Vec<&str> = match (path, &value) {
        ("controller", Value::String(_)) => vec!["controller", "kind"],
        ("seed", _) => vec!["noise", "seed"],
        _ => path.split('.').collect(),
    };
    if keys.iter().any(|k| k.is_empty()) {
        return Err(CliError::Config(format!("override `{spec}` has an empty key")));
    }
    let mut node = doc;
    for (depth, key) in keys.iter().enumerate() {
        let last = depth + 1 == keys.len();
        let here = keys[..depth].join(".");
        node = match node {
            Value::Object(map) => {
                if last {
                    map.insert(key.to_string(), value);
                    return Ok(());
                }
                map.entry(key.to_string()).or_insert_with(|| Value::Object(Default::default()))
            }
            Value::Array(items) => {
                let i: usize = key
                    .parse()
                    .map_err(|_| CliError::Config(format!("`{here}` is a list; `{key}` is not an index")))?;
                let len = items.len();
                let slot = items
                    .get_mut(i)
                    .ok_or_else(|| CliError::Config(format!("`{here}` has {len} entries, no index {i}")))?;
                if last {
                    *slot = value;
                    return Ok(());
                }
                slot
            }
            Value::Null => {
                *node = Value::Object(Default::default());
                let Value::Object(map) = node else { unreachable!() };
                if last {
                    map.insert(key.to_string(), value);
                    return Ok(());
                }
                map.entry(key.to_string()).or_insert_with(|| Value::Object(Default::default()))
            }
            _ => return Err(CliError::Config(format!("`{here}` is a value, cannot set `{path}`"))),
        };
    }
    Ok(())
}

/// Strict parse; the error names the offending key path.
pub fn parse_scenario(doc: Value) -> Result<Scenario, CliError> {
    let s: Scenario = serde_path_to_error::deserialize(doc).map_err(|e| {
        let path = e.path().to_string();
        CliError::Config(format!("at `{path}`: {}", e.inner()))
    })?;
    s.sample_count()?;
    Ok(s)
}

/// Loads a scenario, applies overrides and a seed, and validates it.
pub fn resolve_scenario(source: &str, overrides: &[String], seed: Option<u64>) -> Result<Scenario, CliError> {
    let mut doc = load_source(source)?;
    for o in overrides {
        apply_override(&mut doc, o)?;
    }
    if let Some(seed) = seed {
        apply_override(&mut doc, &format!("noise.seed={seed}"))?;
    }
    let s = parse_scenario(doc)?;
    s.validate()?;
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn overrides_set_nested_values() {
        let mut v = json!({"controller": {"kind": "INDI_GBAR", "k_p": [50.0]}, "noise": null});
        apply_override(&mut v, "controller.k_p.0=20").unwrap();
        apply_override(&mut v, "controller=NDI").unwrap();
        apply_override(&mut v, "seed=9").unwrap();
        assert_eq!(v, json!({"controller": {"kind": "NDI", "k_p": [20]}, "noise": {"seed": 9}}));
    }

    #[test]
    fn bad_overrides_are_config_errors() {
        let mut v = json!({"duration": 1.0, "k": [1.0]});
        for bad in ["duration", "duration.x=1", "k.3=1", "k.a=1", ".=1"] {
            assert_eq!(apply_override(&mut v, bad).unwrap_err().exit_code(), 2, "{bad}");
        }
    }

    #[test]
    fn unknown_key_is_reported_with_path() {
        let mut doc = load_source("fig2_nominal").unwrap();
        apply_override(&mut doc, "controller.kp=3").unwrap();
        let err = parse_scenario(doc).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains("controller"), "{err}");
        assert!(err.to_string().contains("kp"), "{err}");
    }

    #[test]
    fn zero_duration_is_a_config_error() {
        let err = resolve_scenario("fig2_nominal", &["duration=0".into()], None).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn unknown_source_lists_presets() {
        let err = load_source("no_such_thing").unwrap_err();
        assert!(err.to_string().contains("fig2_nominal"));
    }

    #[test]
    fn presets_round_trip() {
        for name in preset_names() {
            let s = resolve_scenario(name, &[], None).unwrap();
            let text = serde_json::to_string(&s).unwrap();
            let back: Scenario = serde_json::from_str(&text).unwrap();
            assert_eq!(back, s, "{name}");
        }
    }
}
