//! Experiment grids: one axis (fleet size at fixed total seats, or the
//! randomness fraction), optionally crossed with several strategies, with
//! independent replications per point.
//!
//! Replication `i` always runs with seed `seed_base + i`, whatever the axis
//! value or strategy, so the points of a grid share their demand streams.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::demand::CensusTract;
use crate::metrics::Indicators;
use crate::net::RouteNetwork;
use crate::sim::events::SimEvent;
use crate::sim::{run, ScenarioConfig, SimError};
use crate::strategy::StrategyKind;
use crate::ValidationError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    /// Values are fleet sizes; capacity = total_seats / fleet size.
    FleetSizeAtFixedTotalSeats,
    /// Values are randomness fractions.
    RandomnessP,
}

impl SweepAxis {
    pub fn as_str(self) -> &'static str {
        match self {
            SweepAxis::FleetSizeAtFixedTotalSeats => "fleet_size_at_fixed_total_seats",
            SweepAxis::RandomnessP => "randomness_p",
        }
    }
}

fn one() -> u32 {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    #[serde(default)]
    pub base: ScenarioConfig,
    pub axis: SweepAxis,
    /// Required for the fleet-size axis.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub total_seats: Option<u32>,
    pub values: Vec<f64>,
    /// Strategies to cross with the axis; empty means the base strategy.
    #[serde(default)]
    pub strategies: Vec<StrategyKind>,
    #[serde(default = "one")]
    pub replications: u32,
    #[serde(default)]
    pub seed_base: u64,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<(), ValidationError> {
        if self.values.is_empty() {
            return Err(ValidationError::new("values", "need at least one axis value"));
        }
        if self.replications < 1 {
            return Err(ValidationError::new("replications", "must be >= 1"));
        }
        self.points()?
            .iter()
            .try_for_each(|p| p.config.validate().map_err(|e| ValidationError::new(
                format!("base.{}", e.field),
                format!("at {} = {}: {}", self.axis.as_str(), p.axis_value, e.message),
            )))
    }

    fn strategies(&self) -> Vec<StrategyKind> {
        if self.strategies.is_empty() {
            vec![self.base.strategy]
        } else {
            self.strategies.clone()
        }
    }

    fn configure(&self, value: f64) -> Result<ScenarioConfig, ValidationError> {
        let mut config = self.base.clone();
        match self.axis {
            SweepAxis::RandomnessP => config.randomness_p = value,
            SweepAxis::FleetSizeAtFixedTotalSeats => {
                let total = self.total_seats.ok_or_else(|| {
                    ValidationError::new("total_seats", "required for the fleet-size axis")
                })?;
                if value.fract() != 0.0 || value < 1.0 {
                    return Err(ValidationError::new(
                        "values",
                        format!("fleet size {value} is not a positive integer"),
                    ));
                }
                let fleet = value as u32;
                if total % fleet != 0 {
                    return Err(ValidationError::new(
                        "values",
                        format!("fleet size {fleet} does not divide {total} seats"),
                    ));
                }
                config.n_vehicles = fleet;
                config.capacity = total / fleet;
            }
        }
        Ok(config)
    }

    /// Every run of the grid, in output order: strategy, then axis value,
    /// then replication.
    pub fn points(&self) -> Result<Vec<SweepPoint>, ValidationError> {
        let mut points = Vec::new();
        for strategy in self.strategies() {
            for &axis_value in &self.values {
                let mut config = self.configure(axis_value)?;
                config.strategy = strategy;
                for replication in 0..self.replications {
                    let mut config = config.clone();
                    config.seed = self.seed_base + u64::from(replication);
                    points.push(SweepPoint {
                        axis_value,
                        replication,
                        config,
                    });
                }
            }
        }
        Ok(points)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub axis_value: f64,
    pub replication: u32,
    pub config: ScenarioConfig,
}

/// One finished run of a grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub axis: SweepAxis,
    pub axis_value: f64,
    pub replication: u32,
    pub seed: u64,
    pub strategy: StrategyKind,
    pub randomness_p: f64,
    pub n_vehicles: u32,
    pub capacity: u32,
    pub indicators: Indicators,
    pub requested_passengers: u64,
    pub rejected_passengers: u64,
    pub unsatisfied_passengers: u64,
    pub in_transit_groups: u64,
    #[serde(skip)]
    pub log: Option<Vec<SimEvent>>,
}

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("invalid sweep: {0}")]
    Spec(#[from] ValidationError),
    #[error("run {strategy} at {axis} = {axis_value}, replication {replication}: {source}")]
    Run {
        axis: &'static str,
        axis_value: f64,
        strategy: StrategyKind,
        replication: u32,
        #[source]
        source: SimError,
    },
    #[error("worker pool: {0}")]
    Pool(String),
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SweepOptions {
    /// Worker threads; `None` uses rayon's default.
    pub workers: Option<usize>,
    pub keep_logs: bool,
}

pub fn run_point(
    axis: SweepAxis,
    point: &SweepPoint,
    network: &RouteNetwork,
    tracts: &[CensusTract],
    keep_logs: bool,
) -> Result<SweepRow, SweepError> {
    let config = &point.config;
    let out = run(config, network, tracts).map_err(|source| SweepError::Run {
        axis: axis.as_str(),
        axis_value: point.axis_value,
        strategy: config.strategy,
        replication: point.replication,
        source,
    })?;
    Ok(SweepRow {
        axis,
        axis_value: point.axis_value,
        replication: point.replication,
        seed: config.seed,
        strategy: config.strategy,
        randomness_p: config.randomness_p,
        n_vehicles: config.n_vehicles,
        capacity: config.capacity,
        indicators: out.indicators,
        requested_passengers: out.totals.requested_passengers,
        rejected_passengers: out.totals.rejected_passengers,
        unsatisfied_passengers: out.totals.unsatisfied_passengers,
        in_transit_groups: out.totals.in_transit_groups,
        log: keep_logs.then_some(out.log),
    })
}

/// Runs the whole grid. Rows come back in [`SweepSpec::points`] order no
/// matter how many workers run them.
pub fn run_sweep(
    spec: &SweepSpec,
    network: &RouteNetwork,
    tracts: &[CensusTract],
    options: SweepOptions,
) -> Result<Vec<SweepRow>, SweepError> {
    spec.validate()?;
    let points = spec.points()?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = options.workers {
        builder = builder.num_threads(n.max(1));
    }
    let pool = builder.build().map_err(|e| SweepError::Pool(e.to_string()))?;
    pool.install(|| {
        points
            .par_iter()
            .map(|p| run_point(spec.axis, p, network, tracts, options.keep_logs))
            .collect()
    })
}
