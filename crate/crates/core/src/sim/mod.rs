//! Discrete-time engine.
//!
//! Each tick runs, in order:
//!
//! 1. generate the requests falling due (demand rng)
//! 2. reject requests whose origin or destination is too far from a stop
//! 3. enqueue groups whose walk to the stop has ended
//! 4. advance vehicles in ascending id order; every node crossed is handled in
//!    route order: at a stop, alight then board; at a diversion node, ask the
//!    strategy (fleet rng)
//! 5. expire groups that waited longer than `max_wait`
//! 6. add the tick to every vehicle's staffed time
//!
//! Requests, rejections and stop arrivals are stamped with their exact time;
//! everything else is stamped at the end of the tick. After the demand
//! horizon the engine keeps running until every group has reached a terminal
//! state, for at most [`DRAIN_CAP_MIN`] minutes.

pub mod events;

use std::collections::{BTreeMap, VecDeque};
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::demand::{
    generate_request, next_interarrival, CensusTract, DemandConfig, DemandError, GroupId,
    GroupState, PassengerGroup,
};
use crate::metrics::{
    compute_indicators, CostParams, Indicators, MetricsError, RawTotals, VehicleTotals,
    VehicleTrace,
};
use crate::net::{nearest_stop, NetError, NodeId, Plan, PlanKind, RouteNetwork, StopRoute};
use crate::strategy::{
    assign_vehicles, decide_diversion, BranchDemand, Decision, DiversionView, StrategyConfig,
    StrategyError, StrategyKind, VehicleAssignment, VehicleId,
};
use crate::ValidationError;
use events::{EventKind, SimEvent};

/// Longest drain phase after the demand horizon, minutes.
pub const DRAIN_CAP_MIN: f64 = 120.0;

const DEMAND_STREAM: u64 = 0;
const FLEET_STREAM: u64 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    /// Demand horizon, h.
    pub total_time: f64,
    pub n_vehicles: u32,
    /// Seats per vehicle.
    pub capacity: u32,
    /// km/h.
    pub speed: f64,
    /// Tick length, min.
    pub tick: f64,
    pub seed: u64,
    pub strategy: StrategyKind,
    pub randomness_p: f64,
    pub demand: DemandConfig,
    pub costs: CostParams,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            total_time: 8.0,
            n_vehicles: 5,
            capacity: 8,
            speed: 20.0,
            tick: 0.1,
            seed: 1,
            strategy: StrategyKind::Evar,
            randomness_p: 0.0,
            demand: DemandConfig::default(),
            costs: CostParams::default(),
        }
    }
}

impl ScenarioConfig {
    pub fn strategy(&self) -> StrategyConfig {
        StrategyConfig::new(self.strategy, self.randomness_p)
    }

    pub fn validate(&self) -> Result<(), ValidationError> {
        if !(self.total_time.is_finite() && self.total_time >= 0.0) {
            return Err(ValidationError::new("total_time", "must be >= 0"));
        }
        if !(self.speed.is_finite() && self.speed > 0.0) {
            return Err(ValidationError::new(
                "speed",
                format!("must be > 0, got {}", self.speed),
            ));
        }
        if !(self.tick.is_finite() && self.tick > 0.0 && self.tick <= 1.0) {
            return Err(ValidationError::new("tick", "must lie in (0, 1] minutes"));
        }
        if self.capacity < 1 {
            return Err(ValidationError::new("capacity", "must be >= 1"));
        }
        self.strategy().validate()?;
        self.demand.validate()?;
        self.costs.validate()?;
        if self.costs.unit_cost(self.capacity).is_err() {
            return Err(ValidationError::new(
                "capacity",
                format!(
                    "{} seats is outside the cost model range [{}, {}]",
                    self.capacity, self.costs.capacity_min, self.costs.capacity_max
                ),
            ));
        }
        if self.demand.max_walk_minutes() + self.demand.max_wait + self.tick >= DRAIN_CAP_MIN {
            return Err(ValidationError::new(
                "demand.max_wait",
                format!("walk plus wait must stay below the {DRAIN_CAP_MIN} min drain cap"),
            ));
        }
        Ok(())
    }

    fn demand_ticks(&self) -> u64 {
        ticks_for(self.total_time * 60.0, self.tick)
    }

    fn cap_ticks(&self) -> u64 {
        ticks_for(self.total_time * 60.0 + DRAIN_CAP_MIN, self.tick)
    }
}

fn ticks_for(minutes: f64, tick: f64) -> u64 {
    (minutes / tick - 1e-9).ceil().max(0.0) as u64
}

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid scenario: {0}")]
    Config(#[from] ValidationError),
    #[error(transparent)]
    Net(#[from] NetError),
    #[error(transparent)]
    Demand(#[from] DemandError),
    #[error(transparent)]
    Strategy(#[from] StrategyError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OnboardGroup {
    pub group: GroupId,
    pub size: u32,
    pub destination_stop: NodeId,
}

#[derive(Debug, Clone)]
pub struct Vehicle {
    pub id: VehicleId,
    pub capacity: u32,
    /// km/h.
    pub speed: f64,
    pub assignment: VehicleAssignment,
    /// Boarding order.
    pub onboard: Vec<OnboardGroup>,
    plan: Arc<Plan>,
    plan_index: usize,
    offset: f64,
    /// km.
    pub odometer: f64,
    /// Passenger-km.
    pub load_distance: f64,
    /// h.
    pub busy_time: f64,
    last_node: NodeId,
    pending_km: f64,
    pending_since: f64,
}

impl Vehicle {
    fn new(id: VehicleId, capacity: u32, speed: f64, plan: Arc<Plan>, assignment: VehicleAssignment) -> Self {
        let start = plan.nodes()[0];
        Self {
            id,
            capacity,
            speed,
            assignment,
            onboard: Vec::new(),
            plan,
            plan_index: 0,
            offset: 0.0,
            odometer: 0.0,
            load_distance: 0.0,
            busy_time: 0.0,
            last_node: start,
            pending_km: 0.0,
            pending_since: 0.0,
        }
    }

    pub fn load(&self) -> u32 {
        self.onboard.iter().map(|g| g.size).sum()
    }

    pub fn free_seats(&self) -> u32 {
        self.capacity.saturating_sub(self.load())
    }

    pub fn plan(&self) -> &Plan {
        &self.plan
    }

    /// Distance along the current plan, km.
    pub fn offset(&self) -> f64 {
        self.offset
    }

    /// Node last reached (or started from).
    pub fn last_node(&self) -> NodeId {
        self.plan.nodes()[self.plan_index]
    }

    fn drive(&mut self, km: f64) {
        self.odometer += km;
        self.load_distance += f64::from(self.load()) * km;
        self.pending_km += km;
    }

    fn set_plan(&mut self, plan: Arc<Plan>) {
        self.plan = plan;
        self.plan_index = 0;
        self.offset = 0.0;
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QueueEntry {
    pub group: GroupId,
    pub size: u32,
    pub destination_stop: NodeId,
    pub t_arrive: f64,
}

/// Groups waiting at one stop, ordered by arrival time then group id.
#[derive(Debug, Clone, PartialEq)]
pub struct StopQueue {
    pub stop: NodeId,
    entries: VecDeque<QueueEntry>,
}

impl StopQueue {
    pub fn new(stop: NodeId) -> Self {
        Self {
            stop,
            entries: VecDeque::new(),
        }
    }

    pub fn push(&mut self, entry: QueueEntry) {
        let key = (entry.t_arrive, entry.group);
        let at = self
            .entries
            .partition_point(|e| (e.t_arrive, e.group) <= key);
        self.entries.insert(at, entry);
    }

    pub fn entries(&self) -> impl Iterator<Item = &QueueEntry> {
        self.entries.iter()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Classification {
    Accepted,
    Rejected,
}

/// A request is rejected when either end lies more than `max_walk` km from
/// its nearest stop.
pub fn classify_request(
    group: &PassengerGroup,
    network: &RouteNetwork,
    max_walk: f64,
) -> Result<Classification, NetError> {
    let (_, access) = nearest_stop(network, group.origin)?;
    let (_, egress) = nearest_stop(network, group.destination)?;
    Ok(if access > max_walk || egress > max_walk {
        Classification::Rejected
    } else {
        Classification::Accepted
    })
}

/// Places `n_vehicles` empty vehicles at uniformly drawn fixed-route stops,
/// then assigns strategy roles. Vehicle ids run from 1.
pub fn init_fleet<R: Rng + ?Sized>(
    config: &ScenarioConfig,
    network: &RouteNetwork,
    rng: &mut R,
) -> Result<Vec<Vehicle>, SimError> {
    if config.n_vehicles == 0 {
        return Ok(Vec::new());
    }
    let stops = network.fixed_stops();
    let ids: Vec<VehicleId> = (1..=config.n_vehicles).collect();
    let starts: Vec<NodeId> = ids
        .iter()
        .map(|_| stops[rng.gen_range(0..stops.len())])
        .collect();
    let assignments = assign_vehicles(&config.strategy(), &ids, &network.flex_route_ids(), rng)?;
    Ok(ids
        .iter()
        .zip(starts)
        .zip(assignments)
        .map(|((&id, stop), assignment)| {
            let plan = network
                .loop_plan_from(stop)
                .expect("fixed stops lie on the fixed route");
            Vehicle::new(id, config.capacity, config.speed, plan, assignment)
        })
        .collect())
}

/// First-come-first-served boarding with skip: walks the queue from the
/// front, boarding every whole group that fits in the seats left.
pub fn board_at_stop(vehicle: &mut Vehicle, queue: &mut StopQueue) -> Vec<EventKind> {
    let mut free = vehicle.free_seats();
    let mut events = Vec::new();
    queue.entries.retain(|e| {
        if e.size > free {
            return true;
        }
        free -= e.size;
        vehicle.onboard.push(OnboardGroup {
            group: e.group,
            size: e.size,
            destination_stop: e.destination_stop,
        });
        events.push(EventKind::Board {
            group: e.group,
            vehicle: vehicle.id,
            stop: queue.stop,
            size: e.size,
        });
        false
    });
    events
}

pub fn alight_at_stop(vehicle: &mut Vehicle, stop: NodeId) -> Vec<EventKind> {
    let id = vehicle.id;
    let mut events = Vec::new();
    vehicle.onboard.retain(|g| {
        if g.destination_stop != stop {
            return true;
        }
        events.push(EventKind::Alight {
            group: g.group,
            vehicle: id,
            stop,
            size: g.size,
            in_transit: false,
        });
        false
    });
    events
}

/// Removes every group that has waited strictly longer than `max_wait`.
pub fn expire_waiting(
    queues: &mut BTreeMap<NodeId, StopQueue>,
    t: f64,
    max_wait: f64,
) -> Vec<EventKind> {
    let mut events = Vec::new();
    for q in queues.values_mut() {
        let stop = q.stop;
        q.entries.retain(|e| {
            if t - e.t_arrive > max_wait {
                events.push(EventKind::GiveUp {
                    group: e.group,
                    stop,
                    size: e.size,
                });
                false
            } else {
                true
            }
        });
    }
    events
}

/// Everything a finished run produces.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub log: Vec<SimEvent>,
    pub fleet: Vec<VehicleTrace>,
    pub groups: Vec<PassengerGroup>,
    pub totals: RawTotals,
    pub indicators: Indicators,
    /// Demand horizon plus drain, minutes.
    pub duration_min: f64,
}

pub struct Simulation<'a> {
    config: &'a ScenarioConfig,
    network: &'a RouteNetwork,
    tracts: &'a [CensusTract],
    strategy: StrategyConfig,
    demand_rng: ChaCha8Rng,
    fleet_rng: ChaCha8Rng,
    tick_index: u64,
    demand_ticks: u64,
    cap_ticks: u64,
    next_request_at: Option<f64>,
    groups: Vec<PassengerGroup>,
    walking: Vec<GroupId>,
    queues: BTreeMap<NodeId, StopQueue>,
    vehicles: Vec<Vehicle>,
    log: Vec<SimEvent>,
}

type Stamped = Vec<(f64, EventKind)>;

impl<'a> Simulation<'a> {
    pub fn new(
        config: &'a ScenarioConfig,
        network: &'a RouteNetwork,
        tracts: &'a [CensusTract],
    ) -> Result<Self, SimError> {
        config.validate()?;
        crate::demand::validate_tracts(tracts)?;
        let mut demand_rng = ChaCha8Rng::seed_from_u64(config.seed);
        demand_rng.set_stream(DEMAND_STREAM);
        let mut fleet_rng = ChaCha8Rng::seed_from_u64(config.seed);
        fleet_rng.set_stream(FLEET_STREAM);

        let vehicles = init_fleet(config, network, &mut fleet_rng)?;
        let horizon = config.total_time * 60.0;
        let first = next_interarrival(config.demand.rate, &mut demand_rng)?;
        Ok(Self {
            config,
            network,
            tracts,
            strategy: config.strategy(),
            demand_rng,
            fleet_rng,
            tick_index: 0,
            demand_ticks: config.demand_ticks(),
            cap_ticks: config.cap_ticks(),
            next_request_at: (first <= horizon).then_some(first),
            groups: Vec::new(),
            walking: Vec::new(),
            queues: network
                .stops()
                .iter()
                .map(|&s| (s, StopQueue::new(s)))
                .collect(),
            vehicles,
            log: Vec::new(),
        })
    }

    pub fn now(&self) -> f64 {
        self.tick_index as f64 * self.config.tick
    }

    pub fn vehicles(&self) -> &[Vehicle] {
        &self.vehicles
    }

    pub fn groups(&self) -> &[PassengerGroup] {
        &self.groups
    }

    pub fn queues(&self) -> &BTreeMap<NodeId, StopQueue> {
        &self.queues
    }

    pub fn log(&self) -> &[SimEvent] {
        &self.log
    }

    fn group_mut(&mut self, id: GroupId) -> &mut PassengerGroup {
        &mut self.groups[(id - 1) as usize]
    }

    fn transition(&mut self, id: GroupId, next: GroupState) -> Result<(), SimError> {
        Ok(self.group_mut(id).set_state(next)?)
    }

    fn all_settled(&self) -> bool {
        self.next_request_at.is_none()
            && self.walking.is_empty()
            && self.queues.values().all(StopQueue::is_empty)
            && self.vehicles.iter().all(|v| v.onboard.is_empty())
    }

    pub fn is_finished(&self) -> bool {
        self.tick_index >= self.demand_ticks
            && (self.all_settled() || self.tick_index >= self.cap_ticks)
    }

    /// Advances one tick and returns the records it appended to the log.
    pub fn step(&mut self) -> Result<&[SimEvent], SimError> {
        let t0 = self.now();
        self.tick_index += 1;
        let t1 = self.now();
        let mut buf: Stamped = Vec::new();

        let fresh = self.generate_requests(t1, &mut buf)?;
        self.classify(fresh, &mut buf)?;
        self.walk(t1, &mut buf)?;

        let mut vehicles = std::mem::take(&mut self.vehicles);
        let moved = vehicles
            .iter_mut()
            .try_for_each(|v| self.advance_vehicle(v, t0, t1, &mut buf));
        self.vehicles = vehicles;
        moved?;

        for ev in expire_waiting(&mut self.queues, t1, self.config.demand.max_wait) {
            if let EventKind::GiveUp { group, .. } = ev {
                self.transition(group, GroupState::Unsatisfied)?;
            }
            buf.push((t1, ev));
        }

        let tick_h = self.config.tick / 60.0;
        for v in &mut self.vehicles {
            v.busy_time += tick_h;
        }

        let start = self.log.len();
        self.append(buf);
        Ok(&self.log[start..])
    }

    fn append(&mut self, mut buf: Stamped) {
        buf.sort_by(|a, b| a.0.total_cmp(&b.0));
        let first = self.log.len() as u64;
        for (seq, (t, kind)) in (first..).zip(buf) {
            self.log.push(SimEvent { seq, t, kind });
        }
    }

    fn generate_requests(&mut self, t1: f64, buf: &mut Stamped) -> Result<Vec<GroupId>, SimError> {
        let horizon = self.config.total_time * 60.0;
        let mut fresh = Vec::new();
        while let Some(t) = self.next_request_at.filter(|&t| t <= t1) {
            let id = self.groups.len() as GroupId + 1;
            let g = generate_request(
                id,
                t,
                &self.config.demand,
                self.tracts,
                self.network,
                &mut self.demand_rng,
            )?;
            buf.push((
                t,
                EventKind::Request {
                    group: id,
                    size: g.size,
                    origin_tract: g.origin_tract,
                    destination_tract: g.destination_tract,
                    origin_stop: g.origin_stop,
                    destination_stop: g.destination_stop,
                },
            ));
            self.groups.push(g);
            fresh.push(id);
            let next = t + next_interarrival(self.config.demand.rate, &mut self.demand_rng)?;
            self.next_request_at = (next <= horizon).then_some(next);
        }
        Ok(fresh)
    }

    fn classify(&mut self, fresh: Vec<GroupId>, buf: &mut Stamped) -> Result<(), SimError> {
        for id in fresh {
            let g = &self.groups[(id - 1) as usize];
            match classify_request(g, self.network, self.config.demand.max_walk)? {
                Classification::Rejected => {
                    let (t, size) = (g.t_request, g.size);
                    self.transition(id, GroupState::Rejected)?;
                    buf.push((t, EventKind::Reject { group: id, size }));
                }
                Classification::Accepted => self.walking.push(id),
            }
        }
        Ok(())
    }

    fn walk(&mut self, t1: f64, buf: &mut Stamped) -> Result<(), SimError> {
        let groups = &self.groups;
        let mut arrived: Vec<GroupId> = Vec::new();
        self.walking.retain(|&id| {
            let due = groups[(id - 1) as usize].t_arrive_stop <= t1;
            if due {
                arrived.push(id);
            }
            !due
        });
        arrived.sort_by(|&a, &b| {
            let (ga, gb) = (&groups[(a - 1) as usize], &groups[(b - 1) as usize]);
            ga.t_arrive_stop.total_cmp(&gb.t_arrive_stop).then(a.cmp(&b))
        });
        for id in arrived {
            self.transition(id, GroupState::Waiting)?;
            let g = &self.groups[(id - 1) as usize];
            let entry = QueueEntry {
                group: id,
                size: g.size,
                destination_stop: g.destination_stop,
                t_arrive: g.t_arrive_stop,
            };
            buf.push((g.t_arrive_stop, EventKind::ArriveStop { group: id, stop: g.origin_stop }));
            self.queues
                .get_mut(&g.origin_stop)
                .expect("origin stop has a queue")
                .push(entry);
        }
        Ok(())
    }

    fn advance_vehicle(
        &mut self,
        v: &mut Vehicle,
        t0: f64,
        t1: f64,
        buf: &mut Stamped,
    ) -> Result<(), SimError> {
        let step_km = v.speed * self.config.tick / 60.0;
        let mut travelled = 0.0;
        loop {
            let plan = Arc::clone(&v.plan);
            let next = v.plan_index + 1;
            let to_next = plan.offsets()[next] - v.offset;
            let remaining = step_km - travelled;
            if to_next > remaining {
                v.drive(remaining);
                v.offset += remaining;
                return Ok(());
            }
            v.drive(to_next);
            travelled += to_next;
            v.plan_index = next;
            v.offset = plan.offsets()[next];
            let node = plan.nodes()[next];
            let t_cross = t0 + travelled / v.speed * 60.0;
            buf.push((
                t1,
                EventKind::VehicleMove {
                    vehicle: v.id,
                    capacity: v.capacity,
                    from: v.last_node,
                    to: node,
                    km: v.pending_km,
                    load: v.load(),
                    hours: (t_cross - v.pending_since) / 60.0,
                },
            ));
            v.last_node = node;
            v.pending_km = 0.0;
            v.pending_since = t_cross;
            self.arrive(v, node, next + 1 == plan.nodes().len(), t1, buf)?;
        }
    }

    fn arrive(
        &mut self,
        v: &mut Vehicle,
        node: NodeId,
        plan_end: bool,
        t1: f64,
        buf: &mut Stamped,
    ) -> Result<(), SimError> {
        if self.network.is_stop(node) {
            for ev in alight_at_stop(v, node) {
                if let EventKind::Alight { group, .. } = ev {
                    self.group_mut(group).t_alight = Some(t1);
                    self.transition(group, GroupState::Satisfied)?;
                }
                buf.push((t1, ev));
            }
            let queue = self.queues.get_mut(&node).expect("every stop has a queue");
            for ev in board_at_stop(v, queue) {
                if let EventKind::Board { group, .. } = ev {
                    self.group_mut(group).t_board = Some(t1);
                    self.transition(group, GroupState::Onboard)?;
                }
                buf.push((t1, ev));
            }
        }

        if plan_end {
            if let PlanKind::Flex(route) = v.plan.kind() {
                buf.push((t1, EventKind::Rejoin { vehicle: v.id, node, route }));
            }
            let lap = self
                .network
                .loop_plan_from(node)
                .expect("plans end on the fixed route");
            v.set_plan(lap);
        }

        let entered = self.network.routes_entered_at(node);
        if v.plan.kind() == PlanKind::Loop && !entered.is_empty() {
            let view = DiversionView {
                node,
                branches: entered
                    .iter()
                    .map(|&route| self.branch_demand(v, route))
                    .collect(),
            };
            let decision =
                decide_diversion(&v.assignment, &self.strategy, node, &view, &mut self.fleet_rng)?;
            if let Decision::TakeFlexRoute(route) = decision {
                buf.push((t1, EventKind::Divert { vehicle: v.id, node, route }));
                let plan = self.network.flex_plan(route).expect("decision names a known route");
                v.set_plan(plan);
            }
        }
        Ok(())
    }

    fn branch_demand(&self, v: &Vehicle, route: crate::net::RouteId) -> BranchDemand {
        let stops = &self
            .network
            .flex_route(route)
            .expect("entered routes exist")
            .stops;
        BranchDemand {
            route,
            waiting: stops.iter().any(|s| !self.queues[s].is_empty()),
            onboard_destination: v.onboard.iter().any(|g| {
                self.network.stop_route(g.destination_stop) == Some(StopRoute::Flex(route))
            }),
        }
    }

    /// Closes the run: forces off anyone still on board at the drain cap,
    /// writes each vehicle's closing move record and computes the indicators.
    pub fn finish(mut self) -> Result<RunOutput, SimError> {
        let t_end = self.now();
        let mut buf: Stamped = Vec::new();
        let mut vehicles = std::mem::take(&mut self.vehicles);
        for v in &mut vehicles {
            if v.pending_km > 0.0 || t_end > v.pending_since {
                buf.push((
                    t_end,
                    EventKind::VehicleMove {
                        vehicle: v.id,
                        capacity: v.capacity,
                        from: v.last_node,
                        to: v.plan.nodes()[v.plan_index + 1],
                        km: v.pending_km,
                        load: v.load(),
                        hours: (t_end - v.pending_since) / 60.0,
                    },
                ));
            }
            let stop = v.last_node();
            for g in std::mem::take(&mut v.onboard) {
                self.group_mut(g.group).t_alight = Some(t_end);
                self.transition(g.group, GroupState::Satisfied)?;
                buf.push((
                    t_end,
                    EventKind::Alight {
                        group: g.group,
                        vehicle: v.id,
                        stop,
                        size: g.size,
                        in_transit: true,
                    },
                ));
            }
        }
        self.vehicles = vehicles;
        self.append(buf);

        let totals = self.totals();
        let indicators = compute_indicators(&totals, &self.config.costs)?;
        Ok(RunOutput {
            fleet: self
                .vehicles
                .iter()
                .map(|v| VehicleTrace {
                    id: v.id,
                    capacity: v.capacity,
                })
                .collect(),
            log: self.log,
            groups: self.groups,
            totals,
            indicators,
            duration_min: t_end,
        })
    }

    /// Raw totals straight from engine state (not from the log).
    fn totals(&self) -> RawTotals {
        let mut t = RawTotals::default();
        for g in &self.groups {
            let size = u64::from(g.size);
            t.requested_groups += 1;
            t.requested_passengers += size;
            match g.state {
                GroupState::Satisfied => {
                    let (Some(board), Some(alight)) = (g.t_board, g.t_alight) else {
                        unreachable!("satisfied groups have boarded and alighted");
                    };
                    let s = f64::from(g.size);
                    t.satisfied_groups += 1;
                    t.satisfied_passengers += size;
                    t.walk_min += s * (g.t_arrive_stop - g.t_request);
                    t.wait_min += s * (board - g.t_arrive_stop);
                    t.onboard_min += s * (alight - board);
                }
                GroupState::Unsatisfied => {
                    t.unsatisfied_groups += 1;
                    t.unsatisfied_passengers += size;
                }
                GroupState::Rejected => {
                    t.rejected_groups += 1;
                    t.rejected_passengers += size;
                }
                _ => {}
            }
        }
        t.in_transit_groups = self
            .log
            .iter()
            .filter(|e| matches!(e.kind, EventKind::Alight { in_transit: true, .. }))
            .count() as u64;
        t.vehicles = self
            .vehicles
            .iter()
            .map(|v| VehicleTotals {
                id: v.id,
                capacity: v.capacity,
                km: v.odometer,
                load_km: v.load_distance,
                busy_h: v.busy_time,
            })
            .collect();
        t
    }
}

/// Runs a scenario from start to finish.
pub fn run(
    config: &ScenarioConfig,
    network: &RouteNetwork,
    tracts: &[CensusTract],
) -> Result<RunOutput, SimError> {
    let mut sim = Simulation::new(config, network, tracts)?;
    while !sim.is_finished() {
        sim.step()?;
    }
    sim.finish()
}
