//! Event log records and their newline-delimited JSON encoding.
//!
//! One record per line, e.g.
//!
//! ```text
//! {"seq":12,"t":34.5,"kind":"board","group":7,"vehicle":2,"stop":3,"size":1}
//! ```
//!
//! `t` is in minutes since simulation start. Records are ordered by `(t, seq)`
//! and `seq` increases by one per record.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::demand::{GroupId, TractId};
use crate::net::{NodeId, RouteId};
use crate::strategy::VehicleId;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimEvent {
    pub seq: u64,
    pub t: f64,
    #[serde(flatten)]
    pub kind: EventKind,
}

fn is_false(b: &bool) -> bool {
    !*b
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EventKind {
    Request {
        group: GroupId,
        size: u32,
        origin_tract: TractId,
        destination_tract: TractId,
        origin_stop: NodeId,
        destination_stop: NodeId,
    },
    Reject {
        group: GroupId,
        size: u32,
    },
    ArriveStop {
        group: GroupId,
        stop: NodeId,
    },
    Board {
        group: GroupId,
        vehicle: VehicleId,
        stop: NodeId,
        size: u32,
    },
    Alight {
        group: GroupId,
        vehicle: VehicleId,
        stop: NodeId,
        size: u32,
        /// Forced off at the drain cap before reaching its stop.
        #[serde(default, skip_serializing_if = "is_false")]
        in_transit: bool,
    },
    GiveUp {
        group: GroupId,
        stop: NodeId,
        size: u32,
    },
    Divert {
        vehicle: VehicleId,
        node: NodeId,
        route: RouteId,
    },
    Rejoin {
        vehicle: VehicleId,
        node: NodeId,
        route: RouteId,
    },
    /// Distance driven since the vehicle's previous move record. `from` is the
    /// last node passed, `to` the node reached (or being approached, for the
    /// closing record of a run).
    VehicleMove {
        vehicle: VehicleId,
        capacity: u32,
        from: NodeId,
        to: NodeId,
        km: f64,
        /// Passengers on board over the whole stretch.
        load: u32,
        hours: f64,
    },
}

impl EventKind {
    pub fn name(&self) -> &'static str {
        match self {
            EventKind::Request { .. } => "request",
            EventKind::Reject { .. } => "reject",
            EventKind::ArriveStop { .. } => "arrive_stop",
            EventKind::Board { .. } => "board",
            EventKind::Alight { .. } => "alight",
            EventKind::GiveUp { .. } => "give_up",
            EventKind::Divert { .. } => "divert",
            EventKind::Rejoin { .. } => "rejoin",
            EventKind::VehicleMove { .. } => "vehicle_move",
        }
    }
}

pub fn write_log<W: Write>(log: &[SimEvent], mut out: W) -> std::io::Result<()> {
    for ev in log {
        serde_json::to_writer(&mut out, ev)?;
        out.write_all(b"\n")?;
    }
    out.flush()
}

pub fn read_log<R: BufRead>(input: R) -> std::io::Result<Vec<SimEvent>> {
    let mut log = Vec::new();
    for line in input.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        log.push(serde_json::from_str(&line)?);
    }
    Ok(log)
}
