//! Scenario file format: one pretty-printed JSON document per scenario.
//!
//! ```text
//! {
//!   "version": 1,
//!   "dt": 0.5, "n_history": 2, "n_future": 10,
//!   "map": { "lanes": [{ "centerline": [{"x":..,"y":..}, ..], "width": 3.0 }],
//!            "obstacles": [{ "points": [{"x":..,"y":..}, ..] }] },
//!   "sdv_footprint": { "length": 4.5, "width": 2.0 },
//!   "sdv_expert": { "states": [{"x":..,"y":..,"theta":..,"v":..,"kappa":..,"a":..}, ..] },
//!   "actors": [{ "id": 1, "footprint": {..}, "trajectory": {..}, "is_perturbable": true }]
//! }
//! ```
//!
//! Angles are radians, distances meters, speeds m/s. `version` is required;
//! `sdv_footprint`, `obstacles` and `is_perturbable` have defaults.

use super::Scenario;
use crate::error::{Error, Result};
use std::path::Path;

pub const FORMAT_VERSION: u64 = 1;

pub fn parse_scenario(text: &str) -> Result<Scenario> {
    let mut value: serde_json::Value = serde_json::from_str(text).map_err(|e| Error::Parse {
        field: "<document>".into(),
        message: e.to_string(),
    })?;
    let obj = value.as_object_mut().ok_or_else(|| Error::Parse {
        field: "<document>".into(),
        message: "expected a JSON object".into(),
    })?;
    match obj.remove("version") {
        None => {
            return Err(Error::Parse {
                field: "version".into(),
                message: "missing mandatory field".into(),
            })
        }
        Some(v) if v.as_u64() == Some(FORMAT_VERSION) => {}
        Some(v) => {
            return Err(Error::Parse {
                field: "version".into(),
                message: format!("unsupported version {v}, expected {FORMAT_VERSION}"),
            })
        }
    }
    let scenario: Scenario = serde_path_to_error::deserialize(value).map_err(|e| Error::Parse {
        field: e.path().to_string(),
        message: e.inner().to_string(),
    })?;
    scenario.validate()?;
    Ok(scenario)
}

pub fn scenario_to_string(scenario: &Scenario) -> String {
    let mut value = serde_json::to_value(scenario).expect("scenario serializes");
    if let Some(obj) = value.as_object_mut() {
        obj.insert("version".into(), FORMAT_VERSION.into());
    }
    serde_json::to_string_pretty(&value).expect("value serializes")
}

pub fn load_scenario(path: &Path) -> Result<Scenario> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_scenario(&text)
}

pub fn save_scenario(scenario: &Scenario, path: &Path) -> Result<()> {
    std::fs::write(path, scenario_to_string(scenario)).map_err(|e| Error::io(path, e))
}
