use proptest::prelude::*;

use drst::net::{
    build_network, nearest_stop, plan_distance, FlexRouteDef, Link, NetError, Node, NodeKind, Point,
    RouteNetwork, StopRoute,
};
use drst::scenarios;

/// A convex polygon loop with `n` nodes, every node a stop.
fn polygon(n: usize, radius: f64) -> RouteNetwork {
    let nodes: Vec<Node> = (0..n)
        .map(|i| {
            let a = i as f64 / n as f64 * std::f64::consts::TAU;
            Node {
                id: i as u32 + 1,
                position: Point::new(radius * a.cos(), radius * a.sin()),
                kind: NodeKind::Stop,
            }
        })
        .collect();
    let links = (0..n)
        .map(|i| Link::between(&nodes[i], &nodes[(i + 1) % n]))
        .collect();
    build_network(nodes, links, (1..=n as u32).collect(), vec![]).unwrap()
}

proptest! {
    #[test]
    fn nearest_stop_matches_brute_force(
        n in 3usize..12,
        radius in 0.5f64..5.0,
        x in -6.0f64..6.0,
        y in -6.0f64..6.0,
    ) {
        let net = polygon(n, radius);
        let p = Point::new(x, y);
        let (id, d) = nearest_stop(&net, p).unwrap();
        let mut best = (u32::MAX, f64::INFINITY);
        for node in net.nodes() {
            let dd = ((node.position.x - x).powi(2) + (node.position.y - y).powi(2)).sqrt();
            if dd < best.1 || (dd == best.1 && node.id < best.0) {
                best = (node.id, dd);
            }
        }
        prop_assert_eq!(id, best.0);
        prop_assert!((d - best.1).abs() < 1e-12);
    }

    #[test]
    fn loop_distances_add_up(
        n in 3usize..10,
        start in 0usize..10,
        a in 0.0f64..1.0,
        b in 0.0f64..1.0,
        c in 0.0f64..1.0,
    ) {
        let net = polygon(n, 2.0);
        let plan = net.loop_plan_from((start % n) as u32 + 1).unwrap();
        let len = plan.total_length();
        let (a, b, c) = (a * len, b * len, c * len);
        let ab = plan_distance(&plan, a, b).unwrap();
        let bc = plan_distance(&plan, b, c).unwrap();
        let ac = plan_distance(&plan, a, c).unwrap();
        prop_assert!(ab >= 0.0 && ab <= len);
        // going a -> b -> c either matches a -> c or adds one full lap
        let extra = ab + bc - ac;
        prop_assert!(extra.abs() < 1e-9 || (extra - len).abs() < 1e-9);
    }

    #[test]
    fn plan_offsets_follow_link_lengths(start in 0usize..12) {
        let net = scenarios::network();
        let route = net.fixed_route();
        let plan = net.loop_plan_from(route[start % route.len()]).unwrap();
        let nodes = plan.nodes();
        let mut acc = 0.0;
        for (i, w) in nodes.windows(2).enumerate() {
            acc += net.link_length(w[0], w[1]).unwrap();
            prop_assert!((plan.offsets()[i + 1] - acc).abs() < 1e-12);
        }
        prop_assert!((plan.total_length() - net.fixed_route_length()).abs() < 1e-9);
    }
}

#[test]
fn bundled_network_shape() {
    let net = scenarios::network();
    net.validate().unwrap();
    assert_eq!(net.diversion_nodes().len(), 3);
    assert_eq!(net.flex_routes().len(), 3);

    // every stop is on the fixed loop or reached by exactly one branch
    for &stop in net.stops() {
        match net.stop_route(stop).unwrap() {
            StopRoute::Fixed => assert!(net.fixed_position(stop).is_some()),
            StopRoute::Flex(r) => {
                let route = net.flex_route(r).unwrap();
                assert!(route.stops.contains(&stop));
                assert!(net.fixed_position(stop).is_none());
            }
        }
    }

    // branches are connected paths that leave and rejoin the loop
    for route in net.flex_routes() {
        let seq = &route.node_sequence;
        assert_eq!(seq.first(), Some(&route.entry));
        assert_eq!(seq.last(), Some(&route.exit));
        for w in seq.windows(2) {
            assert!(net.link_length(w[0], w[1]).is_some(), "{w:?} not linked");
        }
        assert!(net.fixed_position(route.exit).is_some());
    }
}

#[test]
fn most_bundled_tracts_are_within_walking_range() {
    let net = scenarios::network();
    let tracts = scenarios::tracts();
    let max_walk = drst::demand::DemandConfig::default().max_walk;
    let mut served = 0;
    for t in &tracts {
        let (_, d) = nearest_stop(&net, t.centroid).unwrap();
        if d <= max_walk {
            served += 1;
        }
    }
    assert!(served >= tracts.len() - 2, "{served} of {} tracts within walking range", tracts.len());
    assert!(served < tracts.len(), "expected some out-of-range tracts");
}

fn node(id: u32, x: f64, y: f64, kind: NodeKind) -> Node {
    Node {
        id,
        position: Point::new(x, y),
        kind,
    }
}

#[test]
fn rejects_branch_with_missing_link() {
    let nodes = vec![
        node(1, 0.0, 0.0, NodeKind::Stop),
        node(2, 1.0, 0.0, NodeKind::Diversion),
        node(3, 1.0, 1.0, NodeKind::Stop),
        node(5, 2.0, 0.5, NodeKind::Stop),
    ];
    let link = |a: usize, b: usize| Link::between(&nodes[a], &nodes[b]);
    let links = vec![link(0, 1), link(1, 2), link(2, 0), link(1, 3)];
    let err = build_network(
        nodes.clone(),
        links,
        vec![1, 2, 3],
        vec![FlexRouteDef {
            id: 1,
            nodes: vec![2, 5, 3],
        }],
    )
    .unwrap_err();
    assert_eq!(err, NetError::BrokenRoute { from: 5, to: 3 });
}

#[test]
fn rejects_unknown_node_in_route() {
    let nodes = vec![node(1, 0.0, 0.0, NodeKind::Stop), node(2, 1.0, 0.0, NodeKind::Stop)];
    let links = vec![Link::between(&nodes[0], &nodes[1]), Link::between(&nodes[1], &nodes[0])];
    let err = build_network(nodes, links, vec![1, 9], vec![]).unwrap_err();
    assert_eq!(err, NetError::DanglingReference(9));
}

/// Reads the shipped file as plain JSON and checks it with a breadth-first
/// search over its own link list.
#[test]
fn shipped_network_file_is_connected() {
    use std::collections::{BTreeMap, BTreeSet, VecDeque};

    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../scenarios/ragusa_network.json");
    let doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    let ids = |v: &serde_json::Value| -> Vec<u64> {
        v.as_array().unwrap().iter().map(|x| x.as_u64().unwrap()).collect()
    };
    let mut adjacent: BTreeMap<u64, Vec<u64>> = BTreeMap::new();
    for l in doc["links"].as_array().unwrap() {
        adjacent
            .entry(l["from"].as_u64().unwrap())
            .or_default()
            .push(l["to"].as_u64().unwrap());
    }
    let kinds: BTreeMap<u64, String> = doc["nodes"]
        .as_array()
        .unwrap()
        .iter()
        .map(|n| (n["id"].as_u64().unwrap(), n["kind"].as_str().unwrap().to_string()))
        .collect();

    let fixed = ids(&doc["fixed_route"]);
    for (i, a) in fixed.iter().enumerate() {
        let b = fixed[(i + 1) % fixed.len()];
        assert!(adjacent[a].contains(&b), "loop link {a} -> {b} missing");
    }

    let diversions: Vec<u64> = kinds
        .iter()
        .filter(|(_, k)| k.as_str() == "diversion")
        .map(|(&id, _)| id)
        .collect();
    assert_eq!(diversions.len(), 3);
    let routes = doc["flex_routes"].as_array().unwrap();
    assert_eq!(routes.len(), 3);
    for r in routes {
        let nodes = ids(&r["nodes"]);
        assert!(diversions.contains(&nodes[0]));
        assert!(fixed.contains(nodes.last().unwrap()));
        for w in nodes.windows(2) {
            assert!(adjacent[&w[0]].contains(&w[1]), "branch link {} -> {} missing", w[0], w[1]);
        }
    }

    // every node reachable from the first loop node, and the loop reachable back
    let mut seen = BTreeSet::from([fixed[0]]);
    let mut queue = VecDeque::from([fixed[0]]);
    while let Some(n) = queue.pop_front() {
        for &m in adjacent.get(&n).map(Vec::as_slice).unwrap_or_default() {
            if seen.insert(m) {
                queue.push_back(m);
            }
        }
    }
    assert_eq!(seen.len(), kinds.len(), "unreachable nodes");
    for id in kinds.keys() {
        assert!(adjacent.contains_key(id), "node {id} is a dead end");
    }
}
