//! Loaders for the network, tract, scenario and sweep files. All four are
//! JSON documents; see `docs/file-formats.md` for the schemas.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::demand::{validate_tracts, CensusTract, DemandError};
use crate::net::{build_network, FlexRouteDef, Link, NetError, Node, NodeKind, Point, RouteNetwork};
use crate::sim::ScenarioConfig;
use crate::sweep::SweepSpec;
use crate::ValidationError;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: parse error: {message}")]
    Parse { path: String, message: String },
    #[error("{path}: invalid value for {source}")]
    Validation {
        path: String,
        #[source]
        source: ValidationError,
    },
    #[error("{path}: {source}")]
    Network {
        path: String,
        #[source]
        source: NetError,
    },
    #[error("{path}: {source}")]
    Tracts {
        path: String,
        #[source]
        source: DemandError,
    },
}

impl IoError {
    /// Machine-readable error category.
    pub fn category(&self) -> &'static str {
        match self {
            IoError::Io { .. } => "io",
            IoError::Parse { .. } => "parse",
            IoError::Validation { .. } => "validation",
            IoError::Network { .. } => "network",
            IoError::Tracts { .. } => "tracts",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeRecord {
    pub id: u32,
    pub x_km: f64,
    pub y_km: f64,
    pub kind: NodeKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkRecord {
    pub from: u32,
    pub to: u32,
    /// Defaults to the straight-line distance between the endpoints.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub length_km: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlexRouteRecord {
    pub id: u32,
    pub nodes: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub nodes: Vec<NodeRecord>,
    pub links: Vec<LinkRecord>,
    pub fixed_route: Vec<u32>,
    #[serde(default)]
    pub flex_routes: Vec<FlexRouteRecord>,
}

impl NetworkFile {
    pub fn build(&self) -> Result<RouteNetwork, NetError> {
        let nodes: Vec<Node> = self
            .nodes
            .iter()
            .map(|n| Node {
                id: n.id,
                position: Point::new(n.x_km, n.y_km),
                kind: n.kind,
            })
            .collect();
        let position = |id: u32| {
            nodes
                .iter()
                .find(|n| n.id == id)
                .map(|n| n.position)
                .ok_or(NetError::DanglingReference(id))
        };
        let links = self
            .links
            .iter()
            .map(|l| {
                let length = match l.length_km {
                    Some(len) => len,
                    None => position(l.from)?.distance(&position(l.to)?),
                };
                Ok(Link {
                    from: l.from,
                    to: l.to,
                    length,
                })
            })
            .collect::<Result<Vec<_>, NetError>>()?;
        build_network(
            nodes,
            links,
            self.fixed_route.clone(),
            self.flex_routes
                .iter()
                .map(|r| FlexRouteDef {
                    id: r.id,
                    nodes: r.nodes.clone(),
                })
                .collect(),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TractRecord {
    pub id: u32,
    pub x_km: f64,
    pub y_km: f64,
    pub area_km2: f64,
    pub population: u64,
    /// Reserved for sampling points inside the tract; not used yet.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<[f64; 2]>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TractsFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub tracts: Vec<TractRecord>,
}

impl TractsFile {
    pub fn tracts(&self) -> Vec<CensusTract> {
        self.tracts
            .iter()
            .map(|t| CensusTract {
                id: t.id,
                centroid: Point::new(t.x_km, t.y_km),
                area_km2: t.area_km2,
                population: t.population,
            })
            .collect()
    }
}

fn parse_json<T: serde::de::DeserializeOwned>(text: &str, path: &str) -> Result<T, IoError> {
    serde_json::from_str(text).map_err(|e| IoError::Parse {
        path: path.to_string(),
        message: e.to_string(),
    })
}

fn read(path: &Path) -> Result<String, IoError> {
    fs::read_to_string(path).map_err(|source| IoError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn network_from_str(text: &str, origin: &str) -> Result<RouteNetwork, IoError> {
    let file: NetworkFile = parse_json(text, origin)?;
    file.build().map_err(|source| IoError::Network {
        path: origin.to_string(),
        source,
    })
}

pub fn tracts_from_str(text: &str, origin: &str) -> Result<Vec<CensusTract>, IoError> {
    let file: TractsFile = parse_json(text, origin)?;
    let tracts = file.tracts();
    validate_tracts(&tracts).map_err(|source| IoError::Tracts {
        path: origin.to_string(),
        source,
    })?;
    Ok(tracts)
}

pub fn scenario_from_str(text: &str, origin: &str) -> Result<ScenarioConfig, IoError> {
    let config: ScenarioConfig = parse_json(text, origin)?;
    config.validate().map_err(|source| IoError::Validation {
        path: origin.to_string(),
        source,
    })?;
    Ok(config)
}

pub fn sweep_from_str(text: &str, origin: &str) -> Result<SweepSpec, IoError> {
    let spec: SweepSpec = parse_json(text, origin)?;
    spec.validate().map_err(|source| IoError::Validation {
        path: origin.to_string(),
        source,
    })?;
    Ok(spec)
}

pub fn load_network(path: &Path) -> Result<RouteNetwork, IoError> {
    network_from_str(&read(path)?, &path.display().to_string())
}

pub fn load_tracts(path: &Path) -> Result<Vec<CensusTract>, IoError> {
    tracts_from_str(&read(path)?, &path.display().to_string())
}

pub fn parse_scenario(path: &Path) -> Result<ScenarioConfig, IoError> {
    scenario_from_str(&read(path)?, &path.display().to_string())
}

pub fn parse_sweep(path: &Path) -> Result<SweepSpec, IoError> {
    sweep_from_str(&read(path)?, &path.display().to_string())
}
