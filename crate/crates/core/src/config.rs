//! Scenario configuration files.
//!
//! A config file is TOML: flat `key = value` pairs for scalars plus one
//! table per section (`[gains]`, `[reference]`, `[d_init]`, `[d_min]`,
//! `[d_max]`). An optional top-level `scenario = "..."` names the preset the
//! file is layered onto; any key not present keeps the preset value.
//!
//! ```toml
//! scenario = "heterogeneous"
//! seed = 7
//! duration = 60.0
//!
//! [gains]
//! k_d = 0.3
//!
//! [d_min]
//! low = 5.5
//! high = 6.5
//! ```

use std::path::Path;

use sha2::{Digest, Sha256};
use toml::Table;

use crate::error::{Error, Result};
use crate::model::ScenarioConfig;

fn merge(base: &mut Table, overlay: Table) {
    for (key, value) in overlay {
        match (base.get_mut(&key), value) {
            // distributions switch shape (fixed <-> uniform), so replace those wholesale
            (Some(toml::Value::Table(b)), toml::Value::Table(o)) if !is_distribution(&key) => {
                merge(b, o)
            }
            (_, value) => {
                base.insert(key, value);
            }
        }
    }
}

fn is_distribution(key: &str) -> bool {
    matches!(key, "d_init" | "d_min" | "d_max")
}

/// Parses a config document, layering it onto `default_scenario` unless the
/// document names its own base preset.
pub fn parse(text: &str, default_scenario: &str) -> Result<ScenarioConfig> {
    let mut overlay: Table = text.parse()?;
    let scenario = match overlay.remove("scenario") {
        Some(toml::Value::String(s)) => s,
        Some(_) => return Err(Error::invalid("scenario", "must be a string")),
        None => default_scenario.to_string(),
    };
    let base = ScenarioConfig::preset(&scenario)?;
    let mut table = Table::try_from(&base)?;
    merge(&mut table, overlay);
    Ok(table.try_into()?)
}

pub fn load(path: &Path, default_scenario: &str) -> Result<ScenarioConfig> {
    parse(&std::fs::read_to_string(path)?, default_scenario)
}

/// Full resolved config; parsing it back yields an identical config.
pub fn to_toml(cfg: &ScenarioConfig) -> Result<String> {
    Ok(toml::to_string(cfg)?)
}

/// SHA-256 of the resolved config with execution-only knobs normalised, so
/// runs that must agree carry the same hash.
pub fn config_hash(cfg: &ScenarioConfig) -> Result<String> {
    let canonical = ScenarioConfig {
        workers: 1,
        ..cfg.clone()
    };
    Ok(hex::encode(Sha256::digest(to_toml(&canonical)?.as_bytes())))
}
