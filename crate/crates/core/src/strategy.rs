//! Route choice strategies applied at diversion nodes.
//!
//! * `FR`: every vehicle picks uniformly among staying on the loop and each
//!   branch entered at the node.
//! * `AVAR`: any vehicle takes a branch when someone is waiting on it.
//! * `EVAR`: each vehicle owns one branch (round-robin) and only serves that
//!   one for pickups.
//!
//! Under AVAR and EVAR a fraction `randomness_p` of the fleet is switched to
//! FR behaviour. Regardless of strategy, a vehicle carrying a group whose
//! destination is on a branch entered here always takes that branch.

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::net::{NodeId, RouteId};
use crate::ValidationError;

pub type VehicleId = u32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum StrategyKind {
    #[serde(rename = "FR")]
    Fr,
    #[serde(rename = "AVAR")]
    Avar,
    #[serde(rename = "EVAR")]
    Evar,
}

impl StrategyKind {
    pub fn as_str(self) -> &'static str {
        match self {
            StrategyKind::Fr => "FR",
            StrategyKind::Avar => "AVAR",
            StrategyKind::Evar => "EVAR",
        }
    }
}

impl std::fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StrategyConfig {
    pub kind: StrategyKind,
    pub randomness_p: f64,
}

impl StrategyConfig {
    pub fn new(kind: StrategyKind, randomness_p: f64) -> Self {
        Self { kind, randomness_p }
    }

    pub fn validate(&self) -> Result<(), ValidationError> {
        if !(0.0..=1.0).contains(&self.randomness_p) {
            return Err(ValidationError::new(
                "randomness_p",
                format!("must lie in [0, 1], got {}", self.randomness_p),
            ));
        }
        Ok(())
    }

    /// Number of vehicles switched to random behaviour in a fleet of `n`.
    pub fn random_count(&self, n: usize) -> usize {
        ((self.randomness_p * n as f64).round() as usize).min(n)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BehaviorMode {
    Deterministic,
    RandomBehaving,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VehicleAssignment {
    pub vehicle_id: VehicleId,
    pub mode: BehaviorMode,
    /// Set for deterministic EVAR vehicles only.
    pub assigned_flex_route: Option<RouteId>,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StrategyError {
    #[error("EVAR needs at least one flexible route")]
    NoFlexRoutes,
    #[error("no vehicles to assign")]
    NoVehicles,
    #[error("vehicle is at node {at}, not at diversion node {expected}")]
    NotAtDiversionNode { at: NodeId, expected: NodeId },
}

/// Splits the fleet into random-behaving and deterministic vehicles and, under
/// EVAR, hands branches to the deterministic ones round-robin in ascending
/// vehicle id order.
pub fn assign_vehicles<R: Rng + ?Sized>(
    strategy: &StrategyConfig,
    vehicle_ids: &[VehicleId],
    flex_route_ids: &[RouteId],
    rng: &mut R,
) -> Result<Vec<VehicleAssignment>, StrategyError> {
    if vehicle_ids.is_empty() {
        return Err(StrategyError::NoVehicles);
    }
    if strategy.kind == StrategyKind::Evar && flex_route_ids.is_empty() {
        return Err(StrategyError::NoFlexRoutes);
    }
    let mut ids = vehicle_ids.to_vec();
    ids.sort_unstable();
    let mut routes = flex_route_ids.to_vec();
    routes.sort_unstable();

    let n = ids.len();
    let mut random = vec![false; n];
    for i in index::sample(rng, n, strategy.random_count(n)) {
        random[i] = true;
    }

    let mut next_route = 0;
    Ok(ids
        .iter()
        .zip(random)
        .map(|(&vehicle_id, is_random)| {
            if is_random {
                return VehicleAssignment {
                    vehicle_id,
                    mode: BehaviorMode::RandomBehaving,
                    assigned_flex_route: None,
                };
            }
            let assigned_flex_route = (strategy.kind == StrategyKind::Evar).then(|| {
                let r = routes[next_route % routes.len()];
                next_route += 1;
                r
            });
            VehicleAssignment {
                vehicle_id,
                mode: BehaviorMode::Deterministic,
                assigned_flex_route,
            }
        })
        .collect())
}

/// What a vehicle sees about one branch entered at its current node.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BranchDemand {
    pub route: RouteId,
    /// Some group is queued at a stop of this branch.
    pub waiting: bool,
    /// Some group on board is headed for a stop of this branch.
    pub onboard_destination: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiversionView {
    pub node: NodeId,
    /// Branches entered at `node`, ascending route id.
    pub branches: Vec<BranchDemand>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Decision {
    StayOnFixed,
    TakeFlexRoute(RouteId),
}

/// Decides what a vehicle standing on `view.node` does next. Consumes one
/// rng draw only when the choice is random.
pub fn decide_diversion<R: Rng + ?Sized>(
    assignment: &VehicleAssignment,
    strategy: &StrategyConfig,
    vehicle_node: NodeId,
    view: &DiversionView,
    rng: &mut R,
) -> Result<Decision, StrategyError> {
    if vehicle_node != view.node || view.branches.is_empty() {
        return Err(StrategyError::NotAtDiversionNode {
            at: vehicle_node,
            expected: view.node,
        });
    }

    if let Some(b) = view.branches.iter().find(|b| b.onboard_destination) {
        return Ok(Decision::TakeFlexRoute(b.route));
    }

    if strategy.kind == StrategyKind::Fr || assignment.mode == BehaviorMode::RandomBehaving {
        let pick = rng.gen_range(0..=view.branches.len());
        return Ok(match pick {
            0 => Decision::StayOnFixed,
            i => Decision::TakeFlexRoute(view.branches[i - 1].route),
        });
    }

    Ok(match strategy.kind {
        StrategyKind::Avar => view
            .branches
            .iter()
            .find(|b| b.waiting)
            .map_or(Decision::StayOnFixed, |b| Decision::TakeFlexRoute(b.route)),
        StrategyKind::Evar => assignment
            .assigned_flex_route
            .and_then(|r| view.branches.iter().find(|b| b.route == r))
            .filter(|b| b.waiting || b.onboard_destination)
            .map_or(Decision::StayOnFixed, |b| Decision::TakeFlexRoute(b.route)),
        StrategyKind::Fr => unreachable!(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn det(vehicle_id: VehicleId, route: Option<RouteId>) -> VehicleAssignment {
        VehicleAssignment {
            vehicle_id,
            mode: BehaviorMode::Deterministic,
            assigned_flex_route: route,
        }
    }

    fn view(branches: &[(RouteId, bool, bool)]) -> DiversionView {
        DiversionView {
            node: 10,
            branches: branches
                .iter()
                .map(|&(route, waiting, onboard_destination)| BranchDemand {
                    route,
                    waiting,
                    onboard_destination,
                })
                .collect(),
        }
    }

    #[test]
    fn evar_round_robin() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let s = StrategyConfig::new(StrategyKind::Evar, 0.0);
        let a = assign_vehicles(&s, &[1, 2, 3, 4, 5, 6], &[1, 2, 3], &mut rng).unwrap();
        let routes: Vec<_> = a.iter().map(|x| x.assigned_flex_route.unwrap()).collect();
        assert_eq!(routes, vec![1, 2, 3, 1, 2, 3]);
        assert!(a.iter().all(|x| x.mode == BehaviorMode::Deterministic));
    }

    #[test]
    fn full_randomness_makes_everyone_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for kind in [StrategyKind::Fr, StrategyKind::Avar, StrategyKind::Evar] {
            let a = assign_vehicles(&StrategyConfig::new(kind, 1.0), &[1, 2, 3, 4], &[7], &mut rng)
                .unwrap();
            assert!(a.iter().all(|x| x.mode == BehaviorMode::RandomBehaving
                && x.assigned_flex_route.is_none()));
        }
    }

    #[test]
    fn random_count_is_fixed_membership_varies() {
        let ids: Vec<VehicleId> = (1..=10).collect();
        let s = StrategyConfig::new(StrategyKind::Avar, 0.3);
        let mut members = std::collections::BTreeSet::new();
        for seed in 0..20 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = assign_vehicles(&s, &ids, &[1], &mut rng).unwrap();
            let random: Vec<_> = a
                .iter()
                .filter(|x| x.mode == BehaviorMode::RandomBehaving)
                .map(|x| x.vehicle_id)
                .collect();
            assert_eq!(random.len(), 3);
            members.insert(random);
        }
        assert!(members.len() > 1);
    }

    #[test]
    fn evar_without_routes_fails() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(
            assign_vehicles(&StrategyConfig::new(StrategyKind::Evar, 0.0), &[1], &[], &mut rng),
            Err(StrategyError::NoFlexRoutes)
        );
        assert!(assign_vehicles(&StrategyConfig::new(StrategyKind::Avar, 0.0), &[1], &[], &mut rng).is_ok());
    }

    #[test]
    fn onboard_destination_forces_diversion_for_every_strategy() {
        let v = view(&[(1, true, false), (2, false, true), (3, false, true)]);
        for kind in [StrategyKind::Fr, StrategyKind::Avar, StrategyKind::Evar] {
            let mut rng = ChaCha8Rng::seed_from_u64(0);
            let d = decide_diversion(&det(1, Some(1)), &StrategyConfig::new(kind, 0.0), 10, &v, &mut rng)
                .unwrap();
            assert_eq!(d, Decision::TakeFlexRoute(2));
        }
    }

    #[test]
    fn evar_ignores_other_branches() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let s = StrategyConfig::new(StrategyKind::Evar, 0.0);
        let v = view(&[(1, false, false), (2, true, false)]);
        assert_eq!(
            decide_diversion(&det(1, Some(1)), &s, 10, &v, &mut rng).unwrap(),
            Decision::StayOnFixed
        );
        assert_eq!(
            decide_diversion(&det(2, Some(2)), &s, 10, &v, &mut rng).unwrap(),
            Decision::TakeFlexRoute(2)
        );
        // assigned branch is entered elsewhere
        assert_eq!(
            decide_diversion(&det(3, Some(5)), &s, 10, &v, &mut rng).unwrap(),
            Decision::StayOnFixed
        );
    }

    #[test]
    fn avar_takes_lowest_waiting_branch() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let s = StrategyConfig::new(StrategyKind::Avar, 0.0);
        assert_eq!(
            decide_diversion(&det(1, None), &s, 10, &view(&[(1, false, false), (2, false, false)]), &mut rng)
                .unwrap(),
            Decision::StayOnFixed
        );
        assert_eq!(
            decide_diversion(&det(1, None), &s, 10, &view(&[(1, false, false), (2, true, false), (3, true, false)]), &mut rng)
                .unwrap(),
            Decision::TakeFlexRoute(2)
        );
    }

    #[test]
    fn wrong_node_is_an_error() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let s = StrategyConfig::new(StrategyKind::Avar, 0.0);
        assert_eq!(
            decide_diversion(&det(1, None), &s, 11, &view(&[(1, true, false)]), &mut rng),
            Err(StrategyError::NotAtDiversionNode { at: 11, expected: 10 })
        );
        assert!(decide_diversion(&det(1, None), &s, 10, &view(&[]), &mut rng).is_err());
    }

    #[test]
    fn random_choice_is_uniform_over_options() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let s = StrategyConfig::new(StrategyKind::Fr, 0.0);
        let v = view(&[(1, false, false), (2, false, false)]);
        let mut counts = [0usize; 3];
        let n = 30_000;
        for _ in 0..n {
            match decide_diversion(&det(1, None), &s, 10, &v, &mut rng).unwrap() {
                Decision::StayOnFixed => counts[0] += 1,
                Decision::TakeFlexRoute(r) => counts[r as usize] += 1,
            }
        }
        let expected = n as f64 / 3.0;
        let sigma = (n as f64 * (1.0 / 3.0) * (2.0 / 3.0)).sqrt();
        for c in counts {
            assert!((c as f64 - expected).abs() < 4.0 * sigma, "{counts:?}");
        }
    }
}
