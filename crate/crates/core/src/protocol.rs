//! Access to the shared RF link.
//!
//! Under equal priority the central node picks one of the nodes whose FSO
//! link failed uniformly at random. Under p-persistence the nodes are
//! ranked; node `J` is offered the RF link only when every higher-ranked
//! node leaves it unused, and then takes it with probability `p`.

use crate::error::{check_probability, Error, Result};
use crate::markov::{solve_chain, ChainParams, ChainSolution};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    EqualPriority,
    PPersistence,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProtocolConfig {
    pub mode: Mode,
    /// Persistence probability; ignored under equal priority.
    pub p: f64,
    pub n_nodes: usize,
}

impl ProtocolConfig {
    pub fn p_persistence(p: f64, n_nodes: usize) -> Self {
        ProtocolConfig {
            mode: Mode::PPersistence,
            p,
            n_nodes,
        }
    }

    pub fn equal_priority(n_nodes: usize) -> Self {
        ProtocolConfig {
            mode: Mode::EqualPriority,
            p: 1.0,
            n_nodes,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_nodes == 0 {
            return Err(Error::invalid("n_nodes", "must be at least 1"));
        }
        if self.mode == Mode::PPersistence {
            check_probability("p", self.p)?;
        }
        Ok(())
    }
}

/// RF grant probability per node under equal priority:
/// `((1 - b) / N) (1 - (1 - a)^N)`.
pub fn equal_priority_prf(a: f64, b: f64, n_nodes: usize) -> Result<f64> {
    check_probability("a", a)?;
    check_probability("b", b)?;
    if n_nodes == 0 {
        return Err(Error::invalid("n_nodes", "must be at least 1"));
    }
    let n = n_nodes as f64;
    Ok((1.0 - b) / n * (1.0 - (1.0 - a).powi(n_nodes as i32)))
}

/// Probability that a node occupies the RF link in a step: it starts a
/// transmission from the empty state (after an arrival) or from a waiting
/// state, or is in the middle of one.
pub fn rf_service_prob_y(chain: &ChainSolution, omega: f64, a: f64, b: f64, p: f64) -> f64 {
    let c = a * (1.0 - b) * p;
    let s = &chain.steady;
    let y = s.empty() * omega * c + c * s.waiting() + s.in_rf_transmission();
    y.clamp(0.0, 1.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct NodeSolution {
    /// 1-based rank.
    pub node: usize,
    pub p_rf: f64,
    pub chain: ChainSolution,
    /// Probability this node occupies the RF link (p-persistence only).
    pub y: f64,
    /// `1 - y`
    pub x: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CascadeResult {
    pub a: f64,
    pub b: f64,
    pub config: ProtocolConfig,
    pub nodes: Vec<NodeSolution>,
}

/// Solves every node's chain. Under p-persistence node `J` gets
/// `P_RF = a (1 - b) p  prod_{k<J} x_k`, so one forward pass suffices.
pub fn cascade_solve(
    a: f64,
    b: f64,
    config: ProtocolConfig,
    omega: f64,
    buffer_size: usize,
    omega_ratio: usize,
) -> Result<CascadeResult> {
    check_probability("a", a)?;
    check_probability("b", b)?;
    check_probability("omega", omega)?;
    config.validate()?;
    let p_fso = 1.0 - a;
    let chain_for = |p_rf: f64| ChainParams {
        omega,
        p_fso,
        p_rf,
        buffer_size,
        omega_ratio,
    };
    let tag = |node: usize| {
        move |e: Error| Error::Node {
            node,
            source: Box::new(e),
        }
    };

    let mut nodes = Vec::with_capacity(config.n_nodes);
    match config.mode {
        Mode::EqualPriority => {
            let p_rf = equal_priority_prf(a, b, config.n_nodes)?;
            let chain = solve_chain(&chain_for(p_rf)).map_err(tag(1))?;
            let y = rf_service_prob_y(&chain, omega, a, b, 1.0);
            for node in 1..=config.n_nodes {
                nodes.push(NodeSolution {
                    node,
                    p_rf,
                    chain: chain.clone(),
                    y,
                    x: 1.0 - y,
                });
            }
        }
        Mode::PPersistence => {
            let base = a * (1.0 - b) * config.p;
            let mut unused = 1.0;
            for node in 1..=config.n_nodes {
                let p_rf = base * unused;
                let chain = solve_chain(&chain_for(p_rf)).map_err(tag(node))?;
                let y = rf_service_prob_y(&chain, omega, a, b, config.p);
                let x = 1.0 - y;
                unused *= x;
                nodes.push(NodeSolution {
                    node,
                    p_rf,
                    chain,
                    y,
                    x,
                });
            }
        }
    }
    Ok(CascadeResult { a, b, config, nodes })
}
