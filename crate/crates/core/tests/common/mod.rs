//! Test-side oracles that read nothing but the persisted event log.

#![allow(dead_code)]

use std::collections::BTreeMap;

use drst::metrics::CostParams;
use drst::sim::events::{EventKind, SimEvent};

#[derive(Debug, Default, Clone, Copy)]
struct Trip {
    size: u32,
    t_request: f64,
    t_arrive: Option<f64>,
    t_board: Option<f64>,
    t_alight: Option<f64>,
    gave_up: bool,
    rejected: bool,
}

#[derive(Debug, Default, Clone, Copy)]
struct Odometer {
    capacity: u32,
    km: f64,
    load_km: f64,
    hours: f64,
}

/// Indicator values straight from the log, in the usual
/// NP, TDD, APTD, ALF, AWT, AoBT, APTT, AVS, CI, TPTT, OC, TUC order.
pub fn indicators_from_log(log: &[SimEvent], costs: &CostParams) -> [Option<f64>; 12] {
    let mut trips: BTreeMap<u64, Trip> = BTreeMap::new();
    let mut fleet: BTreeMap<u32, Odometer> = BTreeMap::new();
    for ev in log {
        match ev.kind {
            EventKind::Request { group, size, .. } => {
                trips.insert(
                    group,
                    Trip {
                        size,
                        t_request: ev.t,
                        ..Trip::default()
                    },
                );
            }
            EventKind::Reject { group, .. } => trips.get_mut(&group).unwrap().rejected = true,
            EventKind::ArriveStop { group, .. } => trips.get_mut(&group).unwrap().t_arrive = Some(ev.t),
            EventKind::Board { group, .. } => trips.get_mut(&group).unwrap().t_board = Some(ev.t),
            EventKind::Alight { group, .. } => trips.get_mut(&group).unwrap().t_alight = Some(ev.t),
            EventKind::GiveUp { group, .. } => trips.get_mut(&group).unwrap().gave_up = true,
            EventKind::VehicleMove {
                vehicle,
                capacity,
                km,
                load,
                hours,
                ..
            } => {
                let o = fleet.entry(vehicle).or_default();
                o.capacity = capacity;
                o.km += km;
                o.load_km += f64::from(load) * km;
                o.hours += hours;
            }
            EventKind::Divert { .. } | EventKind::Rejoin { .. } => {}
        }
    }

    let (mut np, mut walk, mut wait, mut ride, mut lost) = (0u64, 0.0, 0.0, 0.0, 0u64);
    for trip in trips.values() {
        let s = f64::from(trip.size);
        if let (Some(a), Some(b), Some(c)) = (trip.t_arrive, trip.t_board, trip.t_alight) {
            np += u64::from(trip.size);
            walk += s * (a - trip.t_request);
            wait += s * (b - a);
            ride += s * (c - b);
        } else if trip.gave_up {
            lost += u64::from(trip.size);
        }
    }

    let tdd: f64 = fleet.values().map(|o| o.km).sum();
    let load_km: f64 = fleet.values().map(|o| o.load_km).sum();
    let seat_km: f64 = fleet.values().map(|o| o.km * f64::from(o.capacity)).sum();
    let hours: f64 = fleet.values().map(|o| o.hours).sum();
    let rate = |cap: u32| {
        costs.veh_km_cost_min
            + (costs.veh_km_cost_max - costs.veh_km_cost_min)
                * f64::from(cap - costs.capacity_min)
                / f64::from(costs.capacity_max - costs.capacity_min)
    };
    let oc: f64 = fleet.values().map(|o| o.km * rate(o.capacity)).sum::<f64>() + hours * costs.driver_cost;
    let tptt = (walk + wait + ride) / 60.0 + lost as f64 * costs.penalty_unsatisfied / 60.0;
    let n = np as f64;
    let avg = |x: f64| if np > 0 { x / n } else { 0.0 };
    [
        Some(n),
        Some(tdd),
        Some(avg(load_km)),
        Some(if seat_km > 0.0 { load_km / seat_km } else { 0.0 }),
        Some(avg(wait)),
        Some(avg(ride)),
        Some(avg(walk + wait + ride)),
        Some(if hours > 0.0 { tdd / hours } else { 0.0 }),
        (np > 0).then(|| tdd / n),
        Some(tptt),
        Some(oc),
        (np > 0).then(|| (tptt * costs.value_of_time + oc) / n),
    ]
}

pub fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1.0)
}

/// Compares two indicator vectors; returns the first mismatch by name.
pub fn first_mismatch(a: &[Option<f64>; 12], b: &[Option<f64>; 12], rel: f64) -> Option<String> {
    const NAMES: [&str; 12] = [
        "NP", "TDD", "APTD", "ALF", "AWT", "AoBT", "APTT", "AVS", "CI", "TPTT", "OC", "TUC",
    ];
    for i in 0..12 {
        let ok = match (a[i], b[i]) {
            (Some(x), Some(y)) => close(x, y, rel),
            (None, None) => true,
            _ => false,
        };
        if !ok {
            return Some(format!("{}: {:?} vs {:?}", NAMES[i], a[i], b[i]));
        }
    }
    None
}

/// Checks lifecycle and seat bookkeeping against the log alone: every group
/// ends in exactly one terminal record and no vehicle ever carries more than
/// its capacity. Returns the list of violations.
pub fn log_violations(log: &[SimEvent], capacity: u32) -> Vec<String> {
    let mut bad = Vec::new();
    let mut sizes: BTreeMap<u64, u32> = BTreeMap::new();
    let mut endings: BTreeMap<u64, u32> = BTreeMap::new();
    let mut load: BTreeMap<u32, u32> = BTreeMap::new();
    for ev in log {
        match ev.kind {
            EventKind::Request { group, size, .. } => {
                sizes.insert(group, size);
                endings.insert(group, 0);
            }
            EventKind::Reject { group, .. } | EventKind::GiveUp { group, .. } => {
                *endings.entry(group).or_default() += 1;
            }
            EventKind::Board { group, vehicle, size, .. } => {
                let l = load.entry(vehicle).or_default();
                *l += size;
                if *l > capacity {
                    bad.push(format!("seq {}: vehicle {vehicle} load {} > {capacity}", ev.seq, *l));
                }
                if sizes.get(&group) != Some(&size) {
                    bad.push(format!("seq {}: group {group} boarded with wrong size", ev.seq));
                }
            }
            EventKind::Alight { group, vehicle, size, .. } => {
                *load.entry(vehicle).or_default() -= size;
                *endings.entry(group).or_default() += 1;
            }
            EventKind::VehicleMove { vehicle, load: l, .. }
                if l != load.get(&vehicle).copied().unwrap_or(0) =>
            {
                bad.push(format!("seq {}: vehicle {vehicle} move record load mismatch", ev.seq));
            }
            _ => {}
        }
    }
    for (group, n) in endings {
        if n != 1 {
            bad.push(format!("group {group} has {n} terminal records"));
        }
    }
    bad
}
