//! Bundled device and scenario files, and name-or-path resolution.
//!
//! A device or scenario argument resolves in three steps: an existing file
//! path wins, then `<name>.toml` under the directory named by the
//! `ACCELPERF_SPEC_DIR` environment variable, then the builtin of that
//! name. The bundled files are compiled in, so a `list-presets` binary works
//! from any directory.

use std::path::{Path, PathBuf};

use crate::device::DeviceSpec;
use crate::error::{Error, Result};
use crate::scenario::ScenarioSpec;

/// Name of the environment variable overriding the spec search directory.
pub const SPEC_DIR_ENV: &str = "ACCELPERF_SPEC_DIR";

const DEVICES: &[(&str, &str)] = &[
    ("gaudi2", include_str!("../data/devices/gaudi2.toml")),
    ("a100", include_str!("../data/devices/a100.toml")),
];

const SCENARIOS: &[(&str, &str)] = &[
    ("fig4", include_str!("../data/scenarios/fig4.toml")),
    ("fig5", include_str!("../data/scenarios/fig5.toml")),
    ("fig7c", include_str!("../data/scenarios/fig7c.toml")),
    ("fig8a", include_str!("../data/scenarios/fig8a.toml")),
    ("fig8b", include_str!("../data/scenarios/fig8b.toml")),
    ("fig8c", include_str!("../data/scenarios/fig8c.toml")),
    ("fig8def", include_str!("../data/scenarios/fig8def.toml")),
    ("fig9", include_str!("../data/scenarios/fig9.toml")),
    ("fig10", include_str!("../data/scenarios/fig10.toml")),
    ("fig15", include_str!("../data/scenarios/fig15.toml")),
    ("fig15a", include_str!("../data/scenarios/fig15a.toml")),
    ("fig17a", include_str!("../data/scenarios/fig17a.toml")),
    ("fig17b", include_str!("../data/scenarios/fig17b.toml")),
    ("fig17c", include_str!("../data/scenarios/fig17c.toml")),
    ("rm1", include_str!("../data/scenarios/rm1.toml")),
    ("rm2", include_str!("../data/scenarios/rm2.toml")),
    ("llama31-8b-attn", include_str!("../data/scenarios/llama31-8b-attn.toml")),
];

pub fn builtin_devices() -> Vec<&'static str> {
    DEVICES.iter().map(|(name, _)| *name).collect()
}

pub fn builtin_scenarios() -> Vec<&'static str> {
    SCENARIOS.iter().map(|(name, _)| *name).collect()
}

pub fn builtin_device_text(name: &str) -> Result<&'static str> {
    DEVICES
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, text)| *text)
        .ok_or_else(|| Error::unknown("device", name))
}

pub fn builtin_scenario_text(name: &str) -> Result<&'static str> {
    SCENARIOS
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, text)| *text)
        .ok_or_else(|| Error::unknown("scenario", name))
}

pub fn builtin_device(name: &str) -> Result<DeviceSpec> {
    DeviceSpec::from_toml_str(builtin_device_text(name)?, name)
}

pub fn builtin_scenario(name: &str) -> Result<ScenarioSpec> {
    ScenarioSpec::from_toml_str(builtin_scenario_text(name)?, name)
}

/// `<dir>/<name>.toml` when the override directory holds one.
fn spec_dir_file(name: &str) -> Option<PathBuf> {
    let dir = std::env::var_os(SPEC_DIR_ENV)?;
    let candidate = PathBuf::from(dir).join(format!("{name}.toml"));
    candidate.is_file().then_some(candidate)
}

pub fn resolve_device(name_or_path: &str) -> Result<DeviceSpec> {
    let path = Path::new(name_or_path);
    if path.is_file() {
        return DeviceSpec::load(path);
    }
    if let Some(candidate) = spec_dir_file(name_or_path) {
        return DeviceSpec::load(&candidate);
    }
    builtin_device(name_or_path)
}

pub fn resolve_scenario(name_or_path: &str) -> Result<ScenarioSpec> {
    let path = Path::new(name_or_path);
    if path.is_file() {
        return ScenarioSpec::load(path);
    }
    if let Some(candidate) = spec_dir_file(name_or_path) {
        return ScenarioSpec::load(&candidate);
    }
    builtin_scenario(name_or_path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_builtin_device_parses_and_validates() {
        for name in builtin_devices() {
            let spec = builtin_device(name).unwrap();
            assert_eq!(spec.name, name);
        }
    }

    #[test]
    fn every_builtin_scenario_parses() {
        for name in builtin_scenarios() {
            let spec = builtin_scenario(name).unwrap();
            assert_eq!(spec.name, name);
            assert!(spec.device.is_some(), "{name} lacks a default device");
        }
    }

    #[test]
    fn unknown_names_are_reported() {
        assert!(builtin_device("h200").is_err());
        assert!(builtin_scenario("fig99").is_err());
    }

    #[test]
    fn resolve_prefers_explicit_paths() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("custom.toml");
        let mut text = builtin_device_text("gaudi2").unwrap().to_string();
        text = text.replace("name = \"gaudi2\"", "name = \"custom\"");
        std::fs::write(&path, text).unwrap();
        let spec = resolve_device(path.to_str().unwrap()).unwrap();
        assert_eq!(spec.name, "custom");
    }
}
