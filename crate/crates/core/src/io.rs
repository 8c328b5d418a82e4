//! Versioned JSON documents for scenarios and transmission logs.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Result, RsncError};
use crate::model::{Algorithm, DestinationState, RequestOutcome, Scenario, Transmission, TransmissionLog};

pub const SCENARIO_VERSION: &str = "rsnc-scenario/1";
pub const LOG_VERSION: &str = "rsnc-log/1";

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioDoc {
    version: String,
    packet_size: f64,
    benefits: Vec<f64>,
    destinations: Vec<DestinationState>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LogDoc {
    version: String,
    algorithm: Algorithm,
    transmissions: Vec<Transmission>,
    outcomes: Vec<RequestOutcome>,
}

fn check_version(found: String, expected: &'static str) -> Result<()> {
    if found == expected {
        Ok(())
    } else {
        Err(RsncError::Version { found, expected })
    }
}

pub fn scenario_to_json(scenario: &Scenario) -> Result<String> {
    let doc = ScenarioDoc {
        version: SCENARIO_VERSION.into(),
        packet_size: scenario.packet_size,
        benefits: scenario.benefits.clone(),
        destinations: scenario.destinations.clone(),
    };
    Ok(serde_json::to_string_pretty(&doc)?)
}

/// Parses and validates a scenario document.
pub fn scenario_from_json(text: &str) -> Result<Scenario> {
    let doc: ScenarioDoc = serde_json::from_str(text)?;
    check_version(doc.version, SCENARIO_VERSION)?;
    Scenario::with_benefits(doc.packet_size, doc.benefits, doc.destinations)
}

pub fn log_to_json(log: &TransmissionLog) -> Result<String> {
    let doc = LogDoc {
        version: LOG_VERSION.into(),
        algorithm: log.algorithm,
        transmissions: log.transmissions.clone(),
        outcomes: log.outcomes.clone(),
    };
    Ok(serde_json::to_string_pretty(&doc)?)
}

pub fn log_from_json(text: &str) -> Result<TransmissionLog> {
    let doc: LogDoc = serde_json::from_str(text)?;
    check_version(doc.version, LOG_VERSION)?;
    Ok(TransmissionLog { algorithm: doc.algorithm, transmissions: doc.transmissions, outcomes: doc.outcomes })
}

pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario> {
    scenario_from_json(&fs::read_to_string(path)?)
}

pub fn save_scenario(path: impl AsRef<Path>, scenario: &Scenario) -> Result<()> {
    Ok(fs::write(path, scenario_to_json(scenario)? + "\n")?)
}

pub fn load_log(path: impl AsRef<Path>) -> Result<TransmissionLog> {
    log_from_json(&fs::read_to_string(path)?)
}

pub fn save_log(path: impl AsRef<Path>, log: &TransmissionLog) -> Result<()> {
    Ok(fs::write(path, log_to_json(log)? + "\n")?)
}
