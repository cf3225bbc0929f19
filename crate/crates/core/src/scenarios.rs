//! The bundled synthetic town: an upper town and an old town joined by a
//! one-way loop, with three flexible branches into the outlying quarters.
//! Geometry and populations are illustrative, not survey data.

use crate::demand::CensusTract;
use crate::io::{network_from_str, scenario_from_str, sweep_from_str, tracts_from_str};
use crate::net::RouteNetwork;
use crate::sim::ScenarioConfig;
use crate::sweep::SweepSpec;

pub const NETWORK_JSON: &str = include_str!("../../../scenarios/ragusa_network.json");
pub const TRACTS_JSON: &str = include_str!("../../../scenarios/ragusa_tracts.json");
pub const DEFAULT_SCENARIO_JSON: &str = include_str!("../../../scenarios/default.json");
pub const FLEET_SWEEP_JSON: &str = include_str!("../../../scenarios/sweep_fleet.json");
pub const RANDOMNESS_SWEEP_JSON: &str = include_str!("../../../scenarios/sweep_randomness.json");

pub fn network() -> RouteNetwork {
    network_from_str(NETWORK_JSON, "ragusa_network.json").expect("bundled network is valid")
}

pub fn tracts() -> Vec<CensusTract> {
    tracts_from_str(TRACTS_JSON, "ragusa_tracts.json").expect("bundled tracts are valid")
}

pub fn default_scenario() -> ScenarioConfig {
    scenario_from_str(DEFAULT_SCENARIO_JSON, "default.json").expect("bundled scenario is valid")
}

/// Fleet size at 30 total seats, EVAR with 30% randomness, groups up to 3.
pub fn fleet_sweep() -> SweepSpec {
    sweep_from_str(FLEET_SWEEP_JSON, "sweep_fleet.json").expect("bundled sweep is valid")
}

/// EVAR and AVAR over randomness 0..1, 5 vehicles of 8 seats, single riders.
pub fn randomness_sweep() -> SweepSpec {
    sweep_from_str(RANDOMNESS_SWEEP_JSON, "sweep_randomness.json").expect("bundled sweep is valid")
}
