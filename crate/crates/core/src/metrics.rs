//! Per-node and network-wide performance measures derived from the solved
//! buffer chains.

use crate::error::{check_probability, Error, Result};
use crate::markov::ChainSolution;
use crate::protocol::CascadeResult;

/// Departure rate, frames per step. Waiting frames leave over FSO with
/// probability `p_fso` or start an `Ω`-step RF transmission with
/// probability `p_rf`; a transmission in progress completes `1/Ω` frame
/// per step.
pub fn throughput(chain: &ChainSolution) -> f64 {
    let p = &chain.params;
    let per_step = p.p_fso + p.p_rf / p.omega_ratio as f64;
    let s = &chain.steady;
    let th = p.omega * s.empty() * per_step + per_step * s.waiting() + s.in_rf_transmission() / p.omega_ratio as f64;
    th.clamp(0.0, p.omega)
}

/// Mean buffer occupancy in frames.
pub fn avg_buffer_size(chain: &ChainSolution) -> f64 {
    chain.steady.mean_frames()
}

/// Mean queueing delay in steps by Little's law; `None` when nothing is
/// ever delivered.
pub fn queue_delay(avg_buffer: f64, throughput: f64) -> Option<f64> {
    if throughput > 0.0 {
        Some(avg_buffer / throughput)
    } else if avg_buffer == 0.0 {
        Some(0.0)
    } else {
        None
    }
}

/// Frames lost per step to buffer overflow: `ω - Th`.
pub fn loss_prob(omega: f64, throughput: f64) -> f64 {
    let loss = omega - throughput;
    if loss < -1e-9 {
        log::warn!("throughput {throughput} exceeds arrival rate {omega}; loss clamped to 0");
    }
    loss.max(0.0)
}

/// Fraction of arriving frames that are delivered; `None` for `ω = 0`.
pub fn efficiency(omega: f64, throughput: f64) -> Option<f64> {
    (omega > 0.0).then(|| (throughput / omega).clamp(0.0, 1.0))
}

/// `N_e`, the probability that at least one FSO link is down, and the RF
/// utilization `U = (1 - b) p N_e`.
pub fn rf_need_and_utilization(a: f64, b: f64, p: f64, n_nodes: usize) -> Result<(f64, f64)> {
    check_probability("a", a)?;
    check_probability("b", b)?;
    check_probability("p", p)?;
    if n_nodes == 0 {
        return Err(Error::invalid("n_nodes", "must be at least 1"));
    }
    let need = 1.0 - (1.0 - a).powi(n_nodes as i32);
    Ok((need, (1.0 - b) * p * need))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeMetrics {
    pub node: usize,
    pub p_rf: f64,
    pub throughput: f64,
    pub avg_buffer: f64,
    pub queue_delay: Option<f64>,
    pub loss_prob: f64,
    pub efficiency: Option<f64>,
}

impl NodeMetrics {
    pub fn from_chain(node: usize, chain: &ChainSolution) -> Self {
        let omega = chain.params.omega;
        let th = throughput(chain);
        let qa = avg_buffer_size(chain);
        NodeMetrics {
            node,
            p_rf: chain.params.p_rf,
            throughput: th,
            avg_buffer: qa,
            queue_delay: queue_delay(qa, th),
            loss_prob: loss_prob(omega, th),
            efficiency: efficiency(omega, th),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkMetrics {
    pub per_node: Vec<NodeMetrics>,
    pub total_throughput: f64,
    pub rf_need_prob: f64,
    pub rf_utilization: f64,
}

impl NetworkMetrics {
    pub fn from_cascade(cascade: &CascadeResult) -> Result<Self> {
        let per_node: Vec<NodeMetrics> = cascade
            .nodes
            .iter()
            .map(|n| NodeMetrics::from_chain(n.node, &n.chain))
            .collect();
        let total_throughput = per_node.iter().map(|m| m.throughput).sum();
        let p = match cascade.config.mode {
            crate::protocol::Mode::PPersistence => cascade.config.p,
            crate::protocol::Mode::EqualPriority => 1.0,
        };
        let (rf_need_prob, rf_utilization) = rf_need_and_utilization(cascade.a, cascade.b, p, cascade.config.n_nodes)?;
        Ok(NetworkMetrics {
            per_node,
            total_throughput,
            rf_need_prob,
            rf_utilization,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::markov::{solve_chain, ChainParams};
    use crate::protocol::{cascade_solve, ProtocolConfig};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn chain(omega: f64, p_fso: f64, p_rf: f64, b: usize, w: usize) -> ChainSolution {
        solve_chain(&ChainParams {
            omega,
            p_fso,
            p_rf,
            buffer_size: b,
            omega_ratio: w,
        })
        .unwrap()
    }

    #[test]
    fn three_state_chain_reference() {
        // Event-enumeration reference for B = 1, Ω = 2.
        let c = chain(0.7, 0.1, 0.3, 1, 2);
        let m = NodeMetrics::from_chain(1, &c);
        assert_relative_eq!(m.throughput, 0.295_137_708_262_495_75, max_relative = 1e-10);
        assert_relative_eq!(m.avg_buffer, 0.863_991_839_510_370_6, max_relative = 1e-10);
        assert_relative_eq!(
            m.queue_delay.unwrap(),
            0.863_991_839_510_370_6 / 0.295_137_708_262_495_75,
            max_relative = 1e-10
        );
        assert_relative_eq!(m.loss_prob, 0.7 - 0.295_137_708_262_495_75, max_relative = 1e-10);
        assert_relative_eq!(
            m.efficiency.unwrap(),
            0.295_137_708_262_495_75 / 0.7,
            max_relative = 1e-10
        );
    }

    #[test]
    fn cascade_reference_metrics() {
        let expected = [
            (0.332_252_605_517_921_46, 1.807_777_985_359_870_8),
            (0.229_889_910_588_422_67, 1.876_983_381_035_393),
            (0.177_234_012_877_991_45, 1.908_203_562_574_873_4),
        ];
        let r = cascade_solve(0.9, 0.22, ProtocolConfig::p_persistence(0.5, 3), 0.7, 2, 2).unwrap();
        let net = NetworkMetrics::from_cascade(&r).unwrap();
        for (m, (th, qa)) in net.per_node.iter().zip(expected) {
            assert_relative_eq!(m.throughput, th, max_relative = 1e-10);
            assert_relative_eq!(m.avg_buffer, qa, max_relative = 1e-10);
        }
        assert_relative_eq!(
            net.total_throughput,
            expected.iter().map(|e| e.0).sum::<f64>(),
            max_relative = 1e-12
        );
    }

    #[test]
    fn idle_network() {
        let m = NodeMetrics::from_chain(1, &chain(0.0, 0.3, 0.2, 5, 2));
        assert_eq!(m.throughput, 0.0);
        assert_eq!(m.avg_buffer, 0.0);
        assert_eq!(m.queue_delay, Some(0.0));
        assert_eq!(m.loss_prob, 0.0);
        assert_eq!(m.efficiency, None);
    }

    #[test]
    fn perfect_fso_loses_nothing() {
        for omega in [0.1, 0.5, 1.0] {
            let m = NodeMetrics::from_chain(1, &chain(omega, 1.0, 0.0, 3, 2));
            assert_relative_eq!(m.throughput, omega, epsilon = 1e-12);
            assert!(m.avg_buffer.abs() < 1e-12);
            assert!(m.queue_delay.unwrap().abs() < 1e-12);
            assert_relative_eq!(m.efficiency.unwrap(), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn dead_links_fill_the_buffer() {
        let m = NodeMetrics::from_chain(1, &chain(1.0, 0.0, 0.0, 7, 2));
        assert_eq!(m.throughput, 0.0);
        assert_relative_eq!(m.avg_buffer, 7.0, epsilon = 1e-12);
        assert_eq!(m.queue_delay, None);
        assert_eq!(m.efficiency, Some(0.0));
        assert_eq!(m.loss_prob, 1.0);
    }

    #[test]
    fn rf_need_and_utilization_values() {
        let (ne, u) = rf_need_and_utilization(0.5, 0.22, 0.5, 2).unwrap();
        assert_relative_eq!(ne, 0.75, epsilon = 1e-15);
        assert_relative_eq!(u, 0.2925, epsilon = 1e-15);
        let (ne, u) = rf_need_and_utilization(1.0, 0.3, 0.6, 3).unwrap();
        assert_eq!(ne, 1.0);
        assert_relative_eq!(u, 0.42, epsilon = 1e-15);
        let (_, u) = rf_need_and_utilization(0.2, 0.3, 0.6, 400).unwrap();
        assert_relative_eq!(u, 0.42, epsilon = 1e-12);
        assert!(rf_need_and_utilization(0.2, 0.3, 0.6, 0).is_err());
    }

    #[test]
    fn long_rf_hold_can_invert_priority() {
        let r = cascade_solve(0.05, 0.0, ProtocolConfig::p_persistence(0.5, 2), 0.5, 1, 4).unwrap();
        let net = NetworkMetrics::from_cascade(&r).unwrap();
        assert!(net.per_node[1].throughput > net.per_node[0].throughput);
    }

    #[test]
    fn loss_is_clamped() {
        assert_eq!(loss_prob(0.5, 0.5 + 1e-13), 0.0);
    }

    fn node_inputs() -> impl Strategy<Value = (f64, f64, f64, usize, usize)> {
        (0.0..=1.0f64, 0.0..=1.0f64, 0.0..=1.0f64, 1usize..=6, 1usize..=4)
            .prop_map(|(omega, pf, frac, b, w)| (omega, pf, (1.0 - pf) * frac, b, w))
    }

    proptest! {
        #[test]
        fn conservation_and_bounds((omega, pf, pr, b, w) in node_inputs()) {
            let c = solve_chain(&ChainParams { omega, p_fso: pf, p_rf: pr, buffer_size: b, omega_ratio: w }).unwrap();
            let m = NodeMetrics::from_chain(1, &c);
            prop_assert!(m.throughput >= 0.0 && m.throughput <= omega + 1e-12);
            prop_assert!((m.throughput + m.loss_prob - omega).abs() <= 1e-12);
            prop_assert!(m.avg_buffer >= -1e-12 && m.avg_buffer <= b as f64 + 1e-12);
            if let Some(phi) = m.efficiency {
                prop_assert!((0.0..=1.0).contains(&phi));
            }
        }

        // Outside this region (Ω >= 3 with a <= 0.7) a lower-ranked node can
        // do better: an Ω-step RF hold blocks a small buffer longer than
        // waiting for the FSO link would.
        #[test]
        fn priority_ordering(
            (a, w) in prop_oneof![(0.0..=1.0f64, 1usize..=2), (0.8..=1.0f64, 1usize..=4)],
            b in 0.0..=0.9f64, p in 0.001..=1.0f64,
            omega in 0.05..=1.0f64, n in 2usize..=5, big_b in 1usize..=6,
        ) {
            let r = cascade_solve(a, b, ProtocolConfig::p_persistence(p, n), omega, big_b, w).unwrap();
            let net = NetworkMetrics::from_cascade(&r).unwrap();
            for pair in net.per_node.windows(2) {
                prop_assert!(pair[1].throughput <= pair[0].throughput + 1e-10);
                prop_assert!(pair[1].avg_buffer >= pair[0].avg_buffer - 1e-10);
                prop_assert!(pair[1].loss_prob >= pair[0].loss_prob - 1e-10);
            }
            prop_assert!((0.0..=1.0).contains(&net.rf_utilization));
        }

        #[test]
        fn loss_grows_with_rf_duration(
            a in 0.05..=1.0f64, b in 0.0..=0.9f64, p in 0.001..=1.0f64,
            omega in 0.05..=1.0f64, big_b in 1usize..=6,
        ) {
            let mut last = [0.0; 3];
            for w in 1..=5 {
                let r = cascade_solve(a, b, ProtocolConfig::p_persistence(p, 3), omega, big_b, w).unwrap();
                let net = NetworkMetrics::from_cascade(&r).unwrap();
                for (j, m) in net.per_node.iter().enumerate() {
                    prop_assert!(m.loss_prob >= last[j] - 1e-10, "node {} Ω {}: {} < {}", j + 1, w, m.loss_prob, last[j]);
                    last[j] = m.loss_prob;
                }
            }
        }
    }
}
