//! Route network: one fixed cyclic route plus flexible branch routes that
//! leave the loop at a diversion node and rejoin it further along.
//!
//! Coordinates are planar, in km. Vehicles only ever move along the declared
//! routes, so the network keeps precomputed [`Plan`]s (node sequences with
//! cumulative offsets) for every way a vehicle can traverse it.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type NodeId = u32;
pub type RouteId = u32;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeKind {
    Plain,
    Stop,
    Diversion,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub id: NodeId,
    pub position: Point,
    pub kind: NodeKind,
}

/// Directed link. `length` is in km.
#[derive(Debug, Clone, PartialEq)]
pub struct Link {
    pub from: NodeId,
    pub to: NodeId,
    pub length: f64,
}

impl Link {
    /// Link whose length is the Euclidean distance between its endpoints.
    pub fn between(from: &Node, to: &Node) -> Self {
        Self {
            from: from.id,
            to: to.id,
            length: from.position.distance(&to.position),
        }
    }
}

/// Flexible route definition as supplied by the caller: the first node is the
/// entry (a diversion node on the fixed route), the last node is the exit
/// (any fixed-route node), and everything in between is off the loop.
#[derive(Debug, Clone, PartialEq)]
pub struct FlexRouteDef {
    pub id: RouteId,
    pub nodes: Vec<NodeId>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlexRoute {
    pub id: RouteId,
    pub entry: NodeId,
    pub exit: NodeId,
    /// Full traversal, entry first and exit last.
    pub node_sequence: Vec<NodeId>,
    /// Stops served by this route, in traversal order.
    pub stops: Vec<NodeId>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlanKind {
    /// One full lap of the fixed route; the first and last node coincide.
    Loop,
    Flex(RouteId),
}

/// A node sequence with cumulative distance offsets, `offsets[0] == 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Plan {
    kind: PlanKind,
    nodes: Vec<NodeId>,
    offsets: Vec<f64>,
}

impl Plan {
    pub fn kind(&self) -> PlanKind {
        self.kind
    }

    pub fn nodes(&self) -> &[NodeId] {
        &self.nodes
    }

    pub fn offsets(&self) -> &[f64] {
        &self.offsets
    }

    pub fn total_length(&self) -> f64 {
        *self.offsets.last().unwrap_or(&0.0)
    }

    pub fn is_closed(&self) -> bool {
        self.kind == PlanKind::Loop
    }
}

/// Which route a stop is served by.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopRoute {
    Fixed,
    Flex(RouteId),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NetError {
    #[error("dangling reference to unknown node {0}")]
    DanglingReference(NodeId),
    #[error("duplicate node id {0}")]
    DuplicateNode(NodeId),
    #[error("duplicate flexible route id {0}")]
    DuplicateRoute(RouteId),
    #[error("broken route: no link from node {from} to node {to}")]
    BrokenRoute { from: NodeId, to: NodeId },
    #[error("no stops: {0}")]
    NoStops(String),
    #[error("invalid link {from}->{to}: length {length} km")]
    InvalidLength { from: NodeId, to: NodeId, length: f64 },
    #[error("invalid route layout: {0}")]
    InvalidLayout(String),
    #[error("offset {offset} km outside plan of length {length} km")]
    OffsetOutOfRange { offset: f64, length: f64 },
}

#[derive(Debug, Clone)]
pub struct RouteNetwork {
    nodes: BTreeMap<NodeId, Node>,
    links: HashMap<(NodeId, NodeId), f64>,
    fixed_route: Vec<NodeId>,
    flex_routes: Vec<FlexRoute>,
    stops: Vec<NodeId>,
    stop_route: BTreeMap<NodeId, StopRoute>,
    fixed_index: HashMap<NodeId, usize>,
    /// Flexible routes entered at each diversion node, ascending route id.
    entered_at: BTreeMap<NodeId, Vec<RouteId>>,
    loop_plans: Vec<Arc<Plan>>,
    flex_plans: BTreeMap<RouteId, Arc<Plan>>,
}

/// Builds and validates a network.
pub fn build_network(
    nodes: Vec<Node>,
    links: Vec<Link>,
    fixed_route: Vec<NodeId>,
    flex_defs: Vec<FlexRouteDef>,
) -> Result<RouteNetwork, NetError> {
    let mut node_map = BTreeMap::new();
    for node in nodes {
        if let Some(prev) = node_map.insert(node.id, node) {
            return Err(NetError::DuplicateNode(prev.id));
        }
    }

    let mut link_map = HashMap::new();
    for link in links {
        for id in [link.from, link.to] {
            if !node_map.contains_key(&id) {
                return Err(NetError::DanglingReference(id));
            }
        }
        if !(link.length.is_finite() && link.length > 0.0) {
            return Err(NetError::InvalidLength {
                from: link.from,
                to: link.to,
                length: link.length,
            });
        }
        link_map.insert((link.from, link.to), link.length);
    }

    let link_len = |from: NodeId, to: NodeId| -> Result<f64, NetError> {
        link_map
            .get(&(from, to))
            .copied()
            .ok_or(NetError::BrokenRoute { from, to })
    };

    // fixed route
    if fixed_route.len() < 2 {
        return Err(NetError::InvalidLayout(
            "fixed route needs at least two nodes".into(),
        ));
    }
    let mut fixed_index = HashMap::new();
    for (i, &id) in fixed_route.iter().enumerate() {
        if !node_map.contains_key(&id) {
            return Err(NetError::DanglingReference(id));
        }
        if fixed_index.insert(id, i).is_some() {
            return Err(NetError::InvalidLayout(format!(
                "node {id} appears twice on the fixed route"
            )));
        }
    }
    let n = fixed_route.len();
    let mut fixed_lengths = Vec::with_capacity(n);
    for i in 0..n {
        fixed_lengths.push(link_len(fixed_route[i], fixed_route[(i + 1) % n])?);
    }

    let mut stop_route = BTreeMap::new();
    for &id in &fixed_route {
        if node_map[&id].kind == NodeKind::Stop {
            stop_route.insert(id, StopRoute::Fixed);
        }
    }
    if stop_route.is_empty() {
        return Err(NetError::NoStops("fixed route has no stop".into()));
    }

    // flexible routes
    let mut flex_defs = flex_defs;
    flex_defs.sort_by_key(|d| d.id);
    let mut flex_routes = Vec::with_capacity(flex_defs.len());
    let mut flex_plans = BTreeMap::new();
    let mut entered_at: BTreeMap<NodeId, Vec<RouteId>> = BTreeMap::new();
    let mut off_loop_nodes = BTreeSet::new();
    for def in flex_defs {
        if flex_plans.contains_key(&def.id) {
            return Err(NetError::DuplicateRoute(def.id));
        }
        for &id in &def.nodes {
            if !node_map.contains_key(&id) {
                return Err(NetError::DanglingReference(id));
            }
        }
        if def.nodes.len() < 3 {
            return Err(NetError::InvalidLayout(format!(
                "flexible route {} needs entry, at least one inner node and exit",
                def.id
            )));
        }
        let entry = def.nodes[0];
        let exit = *def.nodes.last().unwrap();
        if !fixed_index.contains_key(&entry) || !fixed_index.contains_key(&exit) {
            return Err(NetError::InvalidLayout(format!(
                "flexible route {} must start and end on the fixed route",
                def.id
            )));
        }
        if node_map[&entry].kind != NodeKind::Diversion {
            return Err(NetError::InvalidLayout(format!(
                "entry node {entry} of flexible route {} is not a diversion node",
                def.id
            )));
        }
        let inner = &def.nodes[1..def.nodes.len() - 1];
        let mut stops = Vec::new();
        for &id in inner {
            if fixed_index.contains_key(&id) {
                return Err(NetError::InvalidLayout(format!(
                    "inner node {id} of flexible route {} lies on the fixed route",
                    def.id
                )));
            }
            if !off_loop_nodes.insert(id) {
                return Err(NetError::InvalidLayout(format!(
                    "node {id} is used by more than one flexible route or twice in one"
                )));
            }
            match node_map[&id].kind {
                NodeKind::Stop => {
                    stop_route.insert(id, StopRoute::Flex(def.id));
                    stops.push(id);
                }
                NodeKind::Diversion => {
                    return Err(NetError::InvalidLayout(format!(
                        "diversion node {id} is off the fixed route"
                    )));
                }
                NodeKind::Plain => {}
            }
        }
        if stops.is_empty() {
            return Err(NetError::NoStops(format!(
                "flexible route {} has no stop",
                def.id
            )));
        }
        let mut offsets = vec![0.0];
        for w in def.nodes.windows(2) {
            let len = link_len(w[0], w[1])?;
            offsets.push(offsets.last().unwrap() + len);
        }
        flex_plans.insert(
            def.id,
            Arc::new(Plan {
                kind: PlanKind::Flex(def.id),
                nodes: def.nodes.clone(),
                offsets,
            }),
        );
        entered_at.entry(entry).or_default().push(def.id);
        flex_routes.push(FlexRoute {
            id: def.id,
            entry,
            exit,
            node_sequence: def.nodes,
            stops,
        });
    }

    for node in node_map.values() {
        match node.kind {
            NodeKind::Diversion if !entered_at.contains_key(&node.id) => {
                return Err(NetError::InvalidLayout(format!(
                    "diversion node {} is not the entry of any flexible route",
                    node.id
                )));
            }
            NodeKind::Stop if !stop_route.contains_key(&node.id) => {
                return Err(NetError::InvalidLayout(format!(
                    "stop {} is not on any route",
                    node.id
                )));
            }
            _ => {}
        }
    }

    let loop_plans = (0..n)
        .map(|start| {
            let mut nodes = Vec::with_capacity(n + 1);
            let mut offsets = Vec::with_capacity(n + 1);
            let mut acc = 0.0;
            nodes.push(fixed_route[start]);
            offsets.push(acc);
            for k in 0..n {
                let i = (start + k) % n;
                acc += fixed_lengths[i];
                nodes.push(fixed_route[(i + 1) % n]);
                offsets.push(acc);
            }
            Arc::new(Plan {
                kind: PlanKind::Loop,
                nodes,
                offsets,
            })
        })
        .collect();

    let stops = stop_route.keys().copied().collect();

    Ok(RouteNetwork {
        nodes: node_map,
        links: link_map,
        fixed_route,
        flex_routes,
        stops,
        stop_route,
        fixed_index,
        entered_at,
        loop_plans,
        flex_plans,
    })
}

impl RouteNetwork {
    pub fn node(&self, id: NodeId) -> Option<&Node> {
        self.nodes.get(&id)
    }

    pub fn nodes(&self) -> impl Iterator<Item = &Node> {
        self.nodes.values()
    }

    pub fn link_length(&self, from: NodeId, to: NodeId) -> Option<f64> {
        self.links.get(&(from, to)).copied()
    }

    pub fn links(&self) -> Vec<Link> {
        let mut links: Vec<Link> = self
            .links
            .iter()
            .map(|(&(from, to), &length)| Link { from, to, length })
            .collect();
        links.sort_by_key(|l| (l.from, l.to));
        links
    }

    pub fn fixed_route(&self) -> &[NodeId] {
        &self.fixed_route
    }

    pub fn flex_routes(&self) -> &[FlexRoute] {
        &self.flex_routes
    }

    pub fn flex_route(&self, id: RouteId) -> Option<&FlexRoute> {
        self.flex_routes
            .binary_search_by_key(&id, |r| r.id)
            .ok()
            .map(|i| &self.flex_routes[i])
    }

    pub fn flex_route_ids(&self) -> Vec<RouteId> {
        self.flex_routes.iter().map(|r| r.id).collect()
    }

    /// All stops, ascending id.
    pub fn stops(&self) -> &[NodeId] {
        &self.stops
    }

    /// Stops on the fixed route, in route order.
    pub fn fixed_stops(&self) -> Vec<NodeId> {
        self.fixed_route
            .iter()
            .copied()
            .filter(|id| self.nodes[id].kind == NodeKind::Stop)
            .collect()
    }

    pub fn stop_route(&self, stop: NodeId) -> Option<StopRoute> {
        self.stop_route.get(&stop).copied()
    }

    pub fn is_stop(&self, id: NodeId) -> bool {
        self.stop_route.contains_key(&id)
    }

    pub fn diversion_nodes(&self) -> Vec<NodeId> {
        self.entered_at.keys().copied().collect()
    }

    /// Flexible routes entered at `node`; empty unless `node` is a diversion node.
    pub fn routes_entered_at(&self, node: NodeId) -> &[RouteId] {
        self.entered_at.get(&node).map_or(&[], Vec::as_slice)
    }

    pub fn fixed_position(&self, node: NodeId) -> Option<usize> {
        self.fixed_index.get(&node).copied()
    }

    /// One lap of the fixed route starting (and ending) at `node`.
    pub fn loop_plan_from(&self, node: NodeId) -> Option<Arc<Plan>> {
        self.fixed_position(node)
            .map(|i| Arc::clone(&self.loop_plans[i]))
    }

    pub fn flex_plan(&self, route: RouteId) -> Option<Arc<Plan>> {
        self.flex_plans.get(&route).cloned()
    }

    pub fn fixed_route_length(&self) -> f64 {
        self.loop_plans[0].total_length()
    }

    /// Re-runs every construction check on this network's own data.
    pub fn validate(&self) -> Result<(), NetError> {
        build_network(
            self.nodes.values().cloned().collect(),
            self.links(),
            self.fixed_route.clone(),
            self.flex_routes
                .iter()
                .map(|r| FlexRouteDef {
                    id: r.id,
                    nodes: r.node_sequence.clone(),
                })
                .collect(),
        )
        .map(|_| ())
    }
}

/// Nearest stop by straight-line distance; ties go to the lowest stop id.
pub fn nearest_stop(network: &RouteNetwork, point: Point) -> Result<(NodeId, f64), NetError> {
    let mut best: Option<(NodeId, f64)> = None;
    for &id in network.stops() {
        let d = network.nodes[&id].position.distance(&point);
        match best {
            Some((_, bd)) if d >= bd => {}
            _ => best = Some((id, d)),
        }
    }
    best.ok_or_else(|| NetError::NoStops("network has no stop".into()))
}

/// Distance travelled along `plan` going from `from_offset` to `to_offset`.
/// On a loop plan a target behind the start wraps around the lap.
pub fn plan_distance(plan: &Plan, from_offset: f64, to_offset: f64) -> Result<f64, NetError> {
    let length = plan.total_length();
    for offset in [from_offset, to_offset] {
        if !(0.0..=length).contains(&offset) {
            return Err(NetError::OffsetOutOfRange { offset, length });
        }
    }
    if to_offset >= from_offset {
        Ok(to_offset - from_offset)
    } else if plan.is_closed() {
        Ok(length - from_offset + to_offset)
    } else {
        Err(NetError::OffsetOutOfRange {
            offset: to_offset,
            length,
        })
    }
}
