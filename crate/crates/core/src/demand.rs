//! Stochastic trip requests.
//!
//! Requests arrive as a Poisson process, origins are drawn in proportion to
//! tract population (or density), destinations by a power-law gravity kernel,
//! and group sizes uniformly up to the configured maximum. Every sampler takes
//! the caller's rng; nothing here holds state between calls.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::net::{nearest_stop, NetError, NodeId, Point, RouteNetwork};
use crate::ValidationError;

pub type TractId = u32;
pub type GroupId = u64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CensusTract {
    pub id: TractId,
    pub centroid: Point,
    pub area_km2: f64,
    pub population: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OriginWeighting {
    /// Weight = population count.
    #[default]
    Population,
    /// Weight = population / area.
    Density,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DemandConfig {
    /// Requests per hour.
    pub rate: f64,
    pub max_group_size: u32,
    /// Minutes a group waits at its stop before giving up.
    pub max_wait: f64,
    /// Longest acceptable walk to or from a stop, km.
    pub max_walk: f64,
    /// km/h.
    pub walk_speed: f64,
    pub gravity_exponent: f64,
    pub origin_weighting: OriginWeighting,
}

impl Default for DemandConfig {
    fn default() -> Self {
        Self {
            rate: 30.0,
            max_group_size: 3,
            max_wait: 15.0,
            max_walk: 0.8,
            walk_speed: 5.0,
            gravity_exponent: 2.0,
            origin_weighting: OriginWeighting::Population,
        }
    }
}

impl DemandConfig {
    pub fn validate(&self) -> Result<(), ValidationError> {
        let positive = [
            ("demand.rate", self.rate),
            ("demand.max_wait", self.max_wait),
            ("demand.max_walk", self.max_walk),
            ("demand.walk_speed", self.walk_speed),
            ("demand.gravity_exponent", self.gravity_exponent),
        ];
        for (field, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(ValidationError::new(field, format!("must be > 0, got {value}")));
            }
        }
        if self.max_group_size < 1 {
            return Err(ValidationError::new("demand.max_group_size", "must be >= 1"));
        }
        Ok(())
    }

    /// Longest possible walk to a stop for an accepted request, minutes.
    pub fn max_walk_minutes(&self) -> f64 {
        self.max_walk / self.walk_speed * 60.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroupState {
    Walking,
    Waiting,
    Onboard,
    Satisfied,
    Unsatisfied,
    Rejected,
}

impl GroupState {
    pub fn can_become(self, next: GroupState) -> bool {
        use GroupState::*;
        matches!(
            (self, next),
            (Walking, Waiting)
                | (Walking, Rejected)
                | (Waiting, Onboard)
                | (Waiting, Unsatisfied)
                | (Onboard, Satisfied)
        )
    }

    pub fn is_terminal(self) -> bool {
        matches!(
            self,
            GroupState::Satisfied | GroupState::Unsatisfied | GroupState::Rejected
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PassengerGroup {
    pub id: GroupId,
    pub size: u32,
    pub origin_tract: TractId,
    pub destination_tract: TractId,
    pub origin: Point,
    pub destination: Point,
    pub origin_stop: NodeId,
    pub destination_stop: NodeId,
    /// Straight-line walk from origin to `origin_stop`, km.
    pub access_walk: f64,
    /// Straight-line walk from `destination_stop` to destination, km.
    pub egress_walk: f64,
    /// All times in minutes since simulation start.
    pub t_request: f64,
    pub t_arrive_stop: f64,
    pub t_board: Option<f64>,
    pub t_alight: Option<f64>,
    pub state: GroupState,
}

impl PassengerGroup {
    pub fn set_state(&mut self, next: GroupState) -> Result<(), DemandError> {
        if !self.state.can_become(next) {
            return Err(DemandError::InvalidTransition {
                group: self.id,
                from: self.state,
                to: next,
            });
        }
        self.state = next;
        Ok(())
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DemandError {
    #[error("request rate must be positive, got {0}")]
    NonPositiveRate(f64),
    #[error("tract set has zero total weight")]
    EmptyPopulation,
    #[error("no destination candidate for origin tract {0}")]
    NoCandidate(TractId),
    #[error("unknown tract {0}")]
    UnknownTract(TractId),
    #[error("tracts {0} and {1} share a centroid")]
    CoincidentCentroids(TractId, TractId),
    #[error("invalid tract {id}: {reason}")]
    InvalidTract { id: TractId, reason: String },
    #[error("group {group}: illegal transition {from:?} -> {to:?}")]
    InvalidTransition {
        group: GroupId,
        from: GroupState,
        to: GroupState,
    },
    #[error(transparent)]
    Network(#[from] NetError),
}

pub fn validate_tracts(tracts: &[CensusTract]) -> Result<(), DemandError> {
    let mut ids: Vec<TractId> = tracts.iter().map(|t| t.id).collect();
    ids.sort_unstable();
    if let Some(w) = ids.windows(2).find(|w| w[0] == w[1]) {
        return Err(DemandError::InvalidTract {
            id: w[0],
            reason: "duplicate id".into(),
        });
    }
    for t in tracts {
        if !(t.area_km2.is_finite() && t.area_km2 > 0.0) {
            return Err(DemandError::InvalidTract {
                id: t.id,
                reason: format!("area must be > 0, got {}", t.area_km2),
            });
        }
    }
    for (i, a) in tracts.iter().enumerate() {
        for b in &tracts[i + 1..] {
            if a.centroid == b.centroid {
                return Err(DemandError::CoincidentCentroids(a.id, b.id));
            }
        }
    }
    if tracts.iter().map(|t| t.population).sum::<u64>() == 0 {
        return Err(DemandError::EmptyPopulation);
    }
    Ok(())
}

/// Picks an index with probability proportional to `weights`, using one
/// uniform draw.
fn pick_weighted<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> Option<usize> {
    let total: f64 = weights.iter().sum();
    if !(total > 0.0 && total.is_finite()) {
        return None;
    }
    let target = rng.gen::<f64>() * total;
    let mut acc = 0.0;
    let mut last_positive = None;
    for (i, &w) in weights.iter().enumerate() {
        if w <= 0.0 {
            continue;
        }
        acc += w;
        last_positive = Some(i);
        if target < acc {
            return Some(i);
        }
    }
    // rounding: target landed on the accumulated total
    last_positive
}

/// Minutes until the next request, Exp(mean = 60 / rate). Uses exactly one
/// uniform draw (inverse transform).
pub fn next_interarrival<R: Rng + ?Sized>(rate: f64, rng: &mut R) -> Result<f64, DemandError> {
    if !(rate > 0.0 && rate.is_finite()) {
        return Err(DemandError::NonPositiveRate(rate));
    }
    let u: f64 = rng.gen();
    Ok(-(1.0 - u).ln() * 60.0 / rate)
}

pub fn origin_weights(tracts: &[CensusTract], weighting: OriginWeighting) -> Vec<f64> {
    tracts
        .iter()
        .map(|t| match weighting {
            OriginWeighting::Population => t.population as f64,
            OriginWeighting::Density => t.population as f64 / t.area_km2,
        })
        .collect()
}

pub fn sample_origin<R: Rng + ?Sized>(
    tracts: &[CensusTract],
    weighting: OriginWeighting,
    rng: &mut R,
) -> Result<(TractId, Point), DemandError> {
    let weights = origin_weights(tracts, weighting);
    let i = pick_weighted(&weights, rng).ok_or(DemandError::EmptyPopulation)?;
    Ok((tracts[i].id, tracts[i].centroid))
}

/// Gravity weights `population_j / d_ij^alpha` for every tract; the origin
/// itself gets weight 0.
pub fn gravity_weights(
    origin: TractId,
    tracts: &[CensusTract],
    alpha: f64,
) -> Result<Vec<f64>, DemandError> {
    let from = tracts
        .iter()
        .find(|t| t.id == origin)
        .ok_or(DemandError::UnknownTract(origin))?;
    tracts
        .iter()
        .map(|t| {
            if t.id == origin {
                return Ok(0.0);
            }
            let d = from.centroid.distance(&t.centroid);
            if d == 0.0 {
                return Err(DemandError::CoincidentCentroids(origin, t.id));
            }
            Ok(t.population as f64 / d.powf(alpha))
        })
        .collect()
}

pub fn sample_destination<R: Rng + ?Sized>(
    origin: TractId,
    tracts: &[CensusTract],
    alpha: f64,
    rng: &mut R,
) -> Result<(TractId, Point), DemandError> {
    let weights = gravity_weights(origin, tracts, alpha)?;
    let i = pick_weighted(&weights, rng).ok_or(DemandError::NoCandidate(origin))?;
    Ok((tracts[i].id, tracts[i].centroid))
}

/// Uniform on `1..=max_group_size`.
pub fn sample_group_size<R: Rng + ?Sized>(max_group_size: u32, rng: &mut R) -> u32 {
    rng.gen_range(1..=max_group_size.max(1))
}

/// Draws one trip request at `t_now`. Draw order: origin, destination, size.
pub fn generate_request<R: Rng + ?Sized>(
    id: GroupId,
    t_now: f64,
    config: &DemandConfig,
    tracts: &[CensusTract],
    network: &RouteNetwork,
    rng: &mut R,
) -> Result<PassengerGroup, DemandError> {
    let (origin_tract, origin) = sample_origin(tracts, config.origin_weighting, rng)?;
    let (destination_tract, destination) =
        sample_destination(origin_tract, tracts, config.gravity_exponent, rng)?;
    let size = sample_group_size(config.max_group_size, rng);
    let (origin_stop, access_walk) = nearest_stop(network, origin)?;
    let (destination_stop, egress_walk) = nearest_stop(network, destination)?;
    Ok(PassengerGroup {
        id,
        size,
        origin_tract,
        destination_tract,
        origin,
        destination,
        origin_stop,
        destination_stop,
        access_walk,
        egress_walk,
        t_request: t_now,
        t_arrive_stop: t_now + access_walk / config.walk_speed * 60.0,
        t_board: None,
        t_alight: None,
        state: GroupState::Walking,
    })
}
