//! Agent-based simulation of demand responsive shared transport (DRST) on a
//! semi-flexible network: a fixed cyclic route plus on-demand branches.
//!
//! The crate is organised bottom-up:
//!
//! * [`net`] – route network and geometric queries
//! * [`demand`] – stochastic trip requests
//! * [`strategy`] – route choice strategies at diversion nodes
//! * [`sim`] – the discrete-time engine and its event log
//! * [`metrics`] – performance indicators and the cost model
//! * [`io`], [`sweep`], [`report`] – file formats, experiment grids and result files
//! * [`scenarios`] – the bundled synthetic two-core town

pub mod demand;
pub mod io;
pub mod metrics;
pub mod net;
pub mod report;
pub mod scenarios;
pub mod sim;
pub mod strategy;
pub mod sweep;

use std::fmt;

/// A configuration value that failed validation, with the dotted path of the
/// offending field.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationError {
    pub field: String,
    pub message: String,
}

impl ValidationError {
    pub fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            field: field.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for ValidationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "`{}`: {}", self.field, self.message)
    }
}

impl std::error::Error for ValidationError {}
