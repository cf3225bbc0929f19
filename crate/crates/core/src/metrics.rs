//! Performance indicators and the cost model.
//!
//! Raw totals can be gathered two ways: by the engine from its own state, or
//! by replaying an event log with [`accumulate`]. Both feed the same
//! [`compute_indicators`].

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::demand::GroupId;
use crate::sim::events::{EventKind, SimEvent};
use crate::strategy::VehicleId;
use crate::ValidationError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CostParams {
    /// Value of passenger time, €/h.
    pub value_of_time: f64,
    /// €/h per vehicle.
    pub driver_cost: f64,
    /// €/km for a vehicle of `capacity_min` seats.
    pub veh_km_cost_min: f64,
    /// €/km for a vehicle of `capacity_max` seats.
    pub veh_km_cost_max: f64,
    /// Minutes charged for each user who gave up waiting.
    pub penalty_unsatisfied: f64,
    pub capacity_min: u32,
    pub capacity_max: u32,
}

impl Default for CostParams {
    fn default() -> Self {
        Self {
            value_of_time: 10.0,
            driver_cost: 20.0,
            veh_km_cost_min: 0.5,
            veh_km_cost_max: 1.0,
            penalty_unsatisfied: 60.0,
            capacity_min: 1,
            capacity_max: 10,
        }
    }
}

impl CostParams {
    pub fn validate(&self) -> Result<(), ValidationError> {
        let nonneg = [
            ("costs.value_of_time", self.value_of_time),
            ("costs.driver_cost", self.driver_cost),
            ("costs.veh_km_cost_min", self.veh_km_cost_min),
            ("costs.veh_km_cost_max", self.veh_km_cost_max),
            ("costs.penalty_unsatisfied", self.penalty_unsatisfied),
        ];
        for (field, v) in nonneg {
            if !(v.is_finite() && v >= 0.0) {
                return Err(ValidationError::new(field, format!("must be >= 0, got {v}")));
            }
        }
        if self.capacity_min < 1 || self.capacity_max < self.capacity_min {
            return Err(ValidationError::new(
                "costs.capacity_max",
                "need 1 <= capacity_min <= capacity_max",
            ));
        }
        Ok(())
    }

    /// €/km for a vehicle with `capacity` seats, linear between the two
    /// configured endpoints.
    pub fn unit_cost(&self, capacity: u32) -> Result<f64, MetricsError> {
        if capacity < self.capacity_min || capacity > self.capacity_max {
            return Err(MetricsError::CapacityOutOfRange {
                capacity,
                min: self.capacity_min,
                max: self.capacity_max,
            });
        }
        if self.capacity_max == self.capacity_min {
            return Ok(self.veh_km_cost_min);
        }
        let frac = f64::from(capacity - self.capacity_min)
            / f64::from(self.capacity_max - self.capacity_min);
        Ok(self.veh_km_cost_min + frac * (self.veh_km_cost_max - self.veh_km_cost_min))
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricsError {
    #[error("no passengers transported")]
    NoPassengers,
    #[error("vehicle capacity {capacity} outside cost range [{min}, {max}]")]
    CapacityOutOfRange { capacity: u32, min: u32, max: u32 },
    #[error("malformed log: {0}")]
    MalformedLog(String),
}

/// Static description of a vehicle needed to interpret a log.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct VehicleTrace {
    pub id: VehicleId,
    pub capacity: u32,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct VehicleTotals {
    pub id: VehicleId,
    pub capacity: u32,
    /// Driven distance, km.
    pub km: f64,
    /// Passenger-km carried.
    pub load_km: f64,
    /// Staffed hours.
    pub busy_h: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RawTotals {
    pub requested_groups: u64,
    pub requested_passengers: u64,
    pub satisfied_groups: u64,
    pub satisfied_passengers: u64,
    /// Satisfied groups forced off at the drain cap.
    pub in_transit_groups: u64,
    pub unsatisfied_groups: u64,
    pub unsatisfied_passengers: u64,
    pub rejected_groups: u64,
    pub rejected_passengers: u64,
    /// Passenger-weighted sums over satisfied passengers, minutes.
    pub walk_min: f64,
    pub wait_min: f64,
    pub onboard_min: f64,
    pub vehicles: Vec<VehicleTotals>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[allow(non_snake_case)]
pub struct Indicators {
    /// Passengers transported.
    pub NP: u64,
    /// Total driven distance, km.
    pub TDD: f64,
    /// Average passenger in-vehicle distance, km.
    pub APTD: f64,
    /// Distance-weighted average load factor.
    pub ALF: f64,
    /// Average wait at the stop, min.
    pub AWT: f64,
    /// Average on-board time, min.
    pub AoBT: f64,
    /// Average total travel time (access walk + wait + on board), min.
    pub APTT: f64,
    /// Average vehicle speed, km/h.
    pub AVS: f64,
    /// Transport intensity, km/pax. Absent when NP = 0.
    pub CI: Option<f64>,
    /// Total passenger travel time incl. give-up penalties, h.
    pub TPTT: f64,
    /// Operation cost, €.
    pub OC: f64,
    /// Total unit cost, €/pax. Absent when NP = 0.
    pub TUC: Option<f64>,
}

impl Indicators {
    pub const NAMES: [&'static str; 12] = [
        "NP", "TDD", "APTD", "ALF", "AWT", "AoBT", "APTT", "AVS", "CI", "TPTT", "OC", "TUC",
    ];

    /// Values in [`Indicators::NAMES`] order.
    pub fn values(&self) -> [Option<f64>; 12] {
        [
            Some(self.NP as f64),
            Some(self.TDD),
            Some(self.APTD),
            Some(self.ALF),
            Some(self.AWT),
            Some(self.AoBT),
            Some(self.APTT),
            Some(self.AVS),
            self.CI,
            Some(self.TPTT),
            Some(self.OC),
            self.TUC,
        ]
    }

    pub fn tuc(&self) -> Result<f64, MetricsError> {
        self.TUC.ok_or(MetricsError::NoPassengers)
    }
}

/// `(TPTT * VOT + OC) / NP`.
pub fn total_unit_cost(tptt_h: f64, vot: f64, oc: f64, np: u64) -> Result<f64, MetricsError> {
    if np == 0 {
        return Err(MetricsError::NoPassengers);
    }
    Ok((tptt_h * vot + oc) / np as f64)
}

/// Distance cost at a capacity-dependent rate plus driver hours.
pub fn operation_cost(fleet: &[VehicleTotals], costs: &CostParams) -> Result<f64, MetricsError> {
    let mut km_cost = 0.0;
    let mut hours = 0.0;
    for v in fleet {
        km_cost += v.km * costs.unit_cost(v.capacity)?;
        hours += v.busy_h;
    }
    Ok(km_cost + hours * costs.driver_cost)
}

pub fn compute_indicators(totals: &RawTotals, costs: &CostParams) -> Result<Indicators, MetricsError> {
    let np = totals.satisfied_passengers;
    let tdd: f64 = totals.vehicles.iter().map(|v| v.km).sum();
    let load_km: f64 = totals.vehicles.iter().map(|v| v.load_km).sum();
    let seat_km: f64 = totals.vehicles.iter().map(|v| v.km * f64::from(v.capacity)).sum();
    let busy_h: f64 = totals.vehicles.iter().map(|v| v.busy_h).sum();
    let per_pax = |x: f64| if np > 0 { x / np as f64 } else { 0.0 };
    let travel_min = totals.walk_min + totals.wait_min + totals.onboard_min;
    let tptt = travel_min / 60.0
        + totals.unsatisfied_passengers as f64 * costs.penalty_unsatisfied / 60.0;
    let oc = operation_cost(&totals.vehicles, costs)?;
    let tuc = match total_unit_cost(tptt, costs.value_of_time, oc, np) {
        Ok(v) => Some(v),
        Err(MetricsError::NoPassengers) => None,
        Err(e) => return Err(e),
    };
    Ok(Indicators {
        NP: np,
        TDD: tdd,
        APTD: per_pax(load_km),
        ALF: if seat_km > 0.0 { load_km / seat_km } else { 0.0 },
        AWT: per_pax(totals.wait_min),
        AoBT: per_pax(totals.onboard_min),
        APTT: per_pax(travel_min),
        AVS: if busy_h > 0.0 { tdd / busy_h } else { 0.0 },
        CI: (np > 0).then(|| tdd / np as f64),
        TPTT: tptt,
        OC: oc,
        TUC: tuc,
    })
}

#[derive(Debug, Default)]
struct GroupReplay {
    size: u32,
    t_request: f64,
    t_arrive: Option<f64>,
    t_board: Option<f64>,
    vehicle: Option<VehicleId>,
    done: bool,
}

fn live_group(
    groups: &mut BTreeMap<GroupId, GroupReplay>,
    id: GroupId,
    seq: u64,
) -> Result<&mut GroupReplay, MetricsError> {
    groups
        .get_mut(&id)
        .filter(|g| !g.done)
        .ok_or_else(|| MetricsError::MalformedLog(format!("seq {seq}: orphaned event for group {id}")))
}

/// Rebuilds [`RawTotals`] from a time-ordered event log.
pub fn accumulate(log: &[SimEvent], fleet: &[VehicleTrace]) -> Result<RawTotals, MetricsError> {
    let malformed = |msg: String| MetricsError::MalformedLog(msg);
    let mut vehicles: BTreeMap<VehicleId, VehicleTotals> = fleet
        .iter()
        .map(|v| {
            (
                v.id,
                VehicleTotals {
                    id: v.id,
                    capacity: v.capacity,
                    ..Default::default()
                },
            )
        })
        .collect();
    let mut groups: BTreeMap<GroupId, GroupReplay> = BTreeMap::new();
    let mut totals = RawTotals::default();

    let mut prev: Option<(u64, f64)> = None;
    for ev in log {
        if let Some((seq, t)) = prev {
            if ev.seq <= seq || ev.t < t {
                return Err(malformed(format!(
                    "event seq {} at t={} follows seq {} at t={}",
                    ev.seq, ev.t, seq, t
                )));
            }
        }
        prev = Some((ev.seq, ev.t));

        let seq = ev.seq;

        match ev.kind {
            EventKind::Request { group: id, size, .. } => {
                if groups.contains_key(&id) {
                    return Err(malformed(format!("duplicate request for group {id}")));
                }
                groups.insert(
                    id,
                    GroupReplay {
                        size,
                        t_request: ev.t,
                        ..Default::default()
                    },
                );
                totals.requested_groups += 1;
                totals.requested_passengers += u64::from(size);
            }
            EventKind::Reject { group: id, .. } => {
                let g = live_group(&mut groups, id, seq)?;
                if g.t_arrive.is_some() {
                    return Err(malformed(format!("group {id} rejected after reaching a stop")));
                }
                g.done = true;
                totals.rejected_groups += 1;
                totals.rejected_passengers += u64::from(g.size);
            }
            EventKind::ArriveStop { group: id, .. } => {
                let g = live_group(&mut groups, id, seq)?;
                if g.t_arrive.is_some() {
                    return Err(malformed(format!("group {id} arrived twice")));
                }
                g.t_arrive = Some(ev.t);
            }
            EventKind::Board { group: id, vehicle, .. } => {
                let g = live_group(&mut groups, id, seq)?;
                if g.t_arrive.is_none() || g.t_board.is_some() {
                    return Err(malformed(format!("group {id} boarded out of sequence")));
                }
                g.t_board = Some(ev.t);
                g.vehicle = Some(vehicle);
            }
            EventKind::Alight {
                group: id,
                vehicle,
                in_transit,
                ..
            } => {
                let g = live_group(&mut groups, id, seq)?;
                let (Some(t_arrive), Some(t_board)) = (g.t_arrive, g.t_board) else {
                    return Err(malformed(format!("group {id} alighted without boarding")));
                };
                if g.vehicle != Some(vehicle) {
                    return Err(malformed(format!("group {id} alighted from the wrong vehicle")));
                }
                g.done = true;
                let size = f64::from(g.size);
                totals.satisfied_groups += 1;
                totals.satisfied_passengers += u64::from(g.size);
                totals.walk_min += size * (t_arrive - g.t_request);
                totals.wait_min += size * (t_board - t_arrive);
                totals.onboard_min += size * (ev.t - t_board);
                if in_transit {
                    totals.in_transit_groups += 1;
                }
            }
            EventKind::GiveUp { group: id, .. } => {
                let g = live_group(&mut groups, id, seq)?;
                if g.t_arrive.is_none() || g.t_board.is_some() {
                    return Err(malformed(format!("group {id} gave up while not waiting")));
                }
                g.done = true;
                totals.unsatisfied_groups += 1;
                totals.unsatisfied_passengers += u64::from(g.size);
            }
            EventKind::VehicleMove {
                vehicle,
                capacity,
                km,
                load,
                hours,
                ..
            } => {
                let v = vehicles
                    .get_mut(&vehicle)
                    .ok_or_else(|| malformed(format!("move of unknown vehicle {vehicle}")))?;
                if v.capacity != capacity {
                    return Err(malformed(format!("vehicle {vehicle} capacity mismatch")));
                }
                if load > capacity {
                    return Err(malformed(format!("vehicle {vehicle} over capacity")));
                }
                v.km += km;
                v.load_km += f64::from(load) * km;
                v.busy_h += hours;
            }
            EventKind::Divert { vehicle, .. } | EventKind::Rejoin { vehicle, .. } => {
                if !vehicles.contains_key(&vehicle) {
                    return Err(malformed(format!("unknown vehicle {vehicle}")));
                }
            }
        }
    }
    totals.vehicles = vehicles.into_values().collect();
    Ok(totals)
}
