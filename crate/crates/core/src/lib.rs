//! Buffer-aided hybrid FSO/RF uplink model: channel outage probabilities,
//! per-node Markov buffer chains, the cascaded RF-access protocol,
//! performance metrics, persistence-probability optimization and a
//! Monte-Carlo simulator.

pub mod channel;
pub mod cli;
pub mod error;
pub mod markov;
pub mod metrics;
pub mod optimizer;
pub mod protocol;
pub mod quadrature;
pub mod simulator;

pub use error::{Error, Result};
