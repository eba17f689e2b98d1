//! Seeded Monte-Carlo simulation.
//!
//! [`simulate_chain`] walks one node's transition matrix and records state
//! occupancy. [`simulate_network`] simulates all buffers together with a
//! single non-preemptive RF link, without the per-node decoupling the
//! analytical model relies on.
//!
//! Randomness comes from ChaCha8 streams: node `k` (0-based) uses
//! `seed + k`, and the RF link uses `seed + N`.

use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{check_probability, Error, Result};
use crate::markov::{build_matrix, ChainParams, StateIndex};
use crate::protocol::{Mode, ProtocolConfig};

/// What happens when the RF link is free and healthy but the chosen
/// contender's persistence draw fails.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Arbitration {
    /// Only the highest-priority contender draws; on failure the RF link
    /// stays idle for the step.
    #[default]
    Forfeit,
    /// Contenders draw in priority order until one succeeds.
    PerContender,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub seed: u64,
    /// Total steps, including warmup.
    pub steps: u64,
    /// Leading steps excluded from statistics.
    pub warmup: u64,
    pub arbitration: Arbitration,
}

impl SimConfig {
    pub fn new(seed: u64, steps: u64, warmup: u64) -> Self {
        SimConfig {
            seed,
            steps,
            warmup,
            arbitration: Arbitration::Forfeit,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.steps <= self.warmup {
            return Err(Error::invalid(
                "steps",
                format!("{} must exceed warmup {}", self.steps, self.warmup),
            ));
        }
        Ok(())
    }

    fn measured(&self) -> u64 {
        self.steps - self.warmup
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainSimStats {
    pub steps: u64,
    /// Visits per linear state index after warmup.
    pub occupancy: Vec<u64>,
    pub time_avg_buffer: f64,
}

impl ChainSimStats {
    pub fn empirical(&self) -> Vec<f64> {
        self.occupancy.iter().map(|&c| c as f64 / self.steps as f64).collect()
    }

    /// Total-variation distance between the empirical occupancy and `s`.
    pub fn tv_distance(&self, s: &[f64]) -> f64 {
        0.5 * self.empirical().iter().zip(s).map(|(e, p)| (e - p).abs()).sum::<f64>()
    }
}

/// Steps the chain from the empty state by sampling each column of the
/// transition matrix.
pub fn simulate_chain(params: &ChainParams, sim: &SimConfig) -> Result<ChainSimStats> {
    sim.validate()?;
    let matrix = build_matrix(params)?;
    let mut rng = ChaCha8Rng::seed_from_u64(sim.seed);
    let mut occupancy = vec![0u64; matrix.len()];
    let mut state = 0usize;
    let mut frames_sum = 0u64;
    for t in 0..sim.steps {
        let col = matrix.column(state);
        let mut u: f64 = rng.random();
        let mut next = col.last().map_or(state, |e| e.0);
        for &(to, p) in col {
            if u < p {
                next = to;
                break;
            }
            u -= p;
        }
        state = next;
        if t >= sim.warmup {
            occupancy[state] += 1;
            frames_sum += StateIndex::from_linear(state, params.omega_ratio).frames as u64;
        }
    }
    Ok(ChainSimStats {
        steps: sim.measured(),
        occupancy,
        time_avg_buffer: frames_sum as f64 / sim.measured() as f64,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct NodeSimStats {
    pub node: usize,
    pub arrivals: u64,
    pub delivered: u64,
    pub lost: u64,
    /// Frames buffered when measurement started and when it ended.
    pub buffer_start: u64,
    pub buffer_end: u64,
    pub rf_starts: u64,
    pub time_avg_buffer: f64,
    /// Mean steps from arrival to departure over frames delivered during
    /// measurement.
    pub mean_delay: Option<f64>,
}

impl NodeSimStats {
    pub fn throughput(&self, steps: u64) -> f64 {
        self.delivered as f64 / steps as f64
    }

    pub fn loss_rate(&self, steps: u64) -> f64 {
        self.lost as f64 / steps as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimStats {
    pub steps: u64,
    pub nodes: Vec<NodeSimStats>,
    /// Fraction of measured steps in which the RF link carried a frame.
    pub rf_busy_fraction: f64,
    pub rf_grant_events: u64,
}

struct Node {
    rng: ChaCha8Rng,
    /// Arrival steps of buffered frames, head first.
    queue: VecDeque<u64>,
    /// Steps elapsed in an RF transmission; 0 when none is in progress.
    rf_step: usize,
    stats: NodeSimStats,
    delay_sum: u64,
}

impl Node {
    fn depart(&mut self, t: u64, measuring: bool) {
        let arrived = self.queue.pop_front().expect("departure from empty buffer");
        if measuring {
            self.stats.delivered += 1;
            self.delay_sum += t - arrived;
        }
    }

    /// Buffers an arrival if there is room.
    fn admit(&mut self, t: u64, capacity: usize, measuring: bool) {
        if self.queue.len() < capacity {
            self.queue.push_back(t);
        } else if measuring {
            self.stats.lost += 1;
        }
    }
}

/// Simulates `N` nodes sharing one RF link.
///
/// Each step every node draws an arrival (probability `ω`) and an FSO
/// state (good with probability `1 - a`). A node with a frame to send and
/// good FSO delivers it in the same step; an arrival to an empty buffer can
/// leave immediately. Nodes with failed FSO contend for the RF link, which
/// is available when no transmission is in progress and healthy with
/// probability `1 - b`. A granted frame holds the link for `Ω` steps.
pub fn simulate_network(
    a: f64,
    b: f64,
    config: ProtocolConfig,
    omega: f64,
    buffer_size: usize,
    omega_ratio: usize,
    sim: &SimConfig,
) -> Result<SimStats> {
    check_probability("a", a)?;
    check_probability("b", b)?;
    check_probability("omega", omega)?;
    config.validate()?;
    sim.validate()?;
    if buffer_size == 0 {
        return Err(Error::invalid("buffer_size", "must be at least 1 frame"));
    }
    if omega_ratio == 0 {
        return Err(Error::invalid("omega_ratio", "must be at least 1"));
    }
    let n = config.n_nodes;
    let mut nodes: Vec<Node> = (0..n)
        .map(|k| Node {
            rng: ChaCha8Rng::seed_from_u64(sim.seed.wrapping_add(k as u64)),
            queue: VecDeque::with_capacity(buffer_size),
            rf_step: 0,
            stats: NodeSimStats {
                node: k + 1,
                arrivals: 0,
                delivered: 0,
                lost: 0,
                buffer_start: 0,
                buffer_end: 0,
                rf_starts: 0,
                time_avg_buffer: 0.0,
                mean_delay: None,
            },
            delay_sum: 0,
        })
        .collect();
    let mut rf_rng = ChaCha8Rng::seed_from_u64(sim.seed.wrapping_add(n as u64));
    let mut rf_remaining = 0usize;
    let mut rf_busy_steps = 0u64;
    let mut rf_grants = 0u64;
    let mut frames_sum = vec![0u64; n];
    let mut contenders: Vec<usize> = Vec::with_capacity(n);
    let mut arrived = vec![false; n];

    for t in 0..sim.steps {
        let measuring = t >= sim.warmup;
        if t == sim.warmup {
            for node in &mut nodes {
                node.stats.buffer_start = node.queue.len() as u64;
            }
        }
        rf_remaining = rf_remaining.saturating_sub(1);
        contenders.clear();

        for (k, node) in nodes.iter_mut().enumerate() {
            let arrival = node.rng.random::<f64>() < omega;
            let fso_good = node.rng.random::<f64>() >= a;
            arrived[k] = arrival;
            if arrival && measuring {
                node.stats.arrivals += 1;
            }
            if node.rf_step >= 1 {
                if node.rf_step == omega_ratio - 1 {
                    node.depart(t, measuring);
                    node.rf_step = 0;
                    if arrival {
                        node.admit(t, buffer_size, measuring);
                    }
                } else {
                    node.rf_step += 1;
                    if arrival {
                        node.admit(t, buffer_size, measuring);
                    }
                }
                continue;
            }
            if node.queue.is_empty() && !arrival {
                continue;
            }
            if fso_good {
                if arrival {
                    node.queue.push_back(t);
                }
                node.depart(t, measuring);
            } else {
                contenders.push(k);
            }
        }

        let mut started = None;
        if rf_remaining == 0 && !contenders.is_empty() && rf_rng.random::<f64>() >= b {
            started = match config.mode {
                Mode::EqualPriority => Some(contenders[rf_rng.random_range(0..contenders.len())]),
                Mode::PPersistence => match sim.arbitration {
                    Arbitration::Forfeit => (rf_rng.random::<f64>() < config.p).then_some(contenders[0]),
                    Arbitration::PerContender => contenders.iter().copied().find(|_| rf_rng.random::<f64>() < config.p),
                },
            };
        }
        for &k in &contenders {
            let node = &mut nodes[k];
            if Some(k) == started {
                rf_remaining = omega_ratio;
                if measuring {
                    rf_grants += 1;
                    node.stats.rf_starts += 1;
                }
                if omega_ratio == 1 {
                    if arrived[k] {
                        node.queue.push_back(t);
                    }
                    node.depart(t, measuring);
                } else {
                    node.rf_step = 1;
                    if arrived[k] {
                        node.admit(t, buffer_size, measuring);
                    }
                }
            } else if arrived[k] {
                node.admit(t, buffer_size, measuring);
            }
        }

        if measuring {
            if rf_remaining > 0 {
                rf_busy_steps += 1;
            }
            for (k, node) in nodes.iter().enumerate() {
                frames_sum[k] += node.queue.len() as u64;
            }
        }
    }

    let steps = sim.measured();
    let stats = nodes
        .into_iter()
        .zip(frames_sum)
        .map(|(node, sum)| NodeSimStats {
            buffer_end: node.queue.len() as u64,
            time_avg_buffer: sum as f64 / steps as f64,
            mean_delay: (node.stats.delivered > 0).then(|| node.delay_sum as f64 / node.stats.delivered as f64),
            ..node.stats
        })
        .collect();
    Ok(SimStats {
        steps,
        nodes: stats,
        rf_busy_fraction: rf_busy_steps as f64 / steps as f64,
        rf_grant_events: rf_grants,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::markov::solve_chain;
    use crate::metrics::throughput;
    use crate::protocol::cascade_solve;
    use proptest::prelude::*;

    fn chain_params(omega: f64, p_fso: f64, p_rf: f64, b: usize, w: usize) -> ChainParams {
        ChainParams {
            omega,
            p_fso,
            p_rf,
            buffer_size: b,
            omega_ratio: w,
        }
    }

    #[test]
    fn rejects_warmup_beyond_steps() {
        let p = chain_params(0.5, 0.5, 0.2, 2, 2);
        assert!(simulate_chain(&p, &SimConfig::new(1, 10, 10))
            .unwrap_err()
            .is_validation());
    }

    #[test]
    fn idle_chain_stays_empty() {
        let s = simulate_chain(&chain_params(0.0, 0.5, 0.2, 3, 2), &SimConfig::new(3, 1000, 0)).unwrap();
        assert_eq!(s.occupancy[0], 1000);
        assert_eq!(s.time_avg_buffer, 0.0);
    }

    #[test]
    fn chain_occupancy_matches_steady_state() {
        for (k, p) in [
            chain_params(0.7, 0.1, 0.3, 1, 2),
            chain_params(0.5, 0.3, 0.35, 6, 3),
            chain_params(0.9, 0.05, 0.2, 4, 1),
        ]
        .iter()
        .enumerate()
        {
            let s = simulate_chain(p, &SimConfig::new(k as u64, 1_000_000, 1000)).unwrap();
            let exact = solve_chain(p).unwrap();
            assert!(s.tv_distance(exact.steady.probs()) <= 0.01);
        }
    }

    #[test]
    fn chain_simulation_is_deterministic() {
        let p = chain_params(0.6, 0.3, 0.3, 5, 3);
        let cfg = SimConfig::new(42, 20_000, 100);
        assert_eq!(simulate_chain(&p, &cfg).unwrap(), simulate_chain(&p, &cfg).unwrap());
    }

    #[test]
    fn single_node_matches_chain_throughput() {
        // With one node the joint system is exactly the node's own chain.
        let (a, b, p, omega, big_b, w) = (0.9, 0.22, 0.5, 0.6, 10, 2);
        let exact = cascade_solve(a, b, ProtocolConfig::p_persistence(p, 1), omega, big_b, w).unwrap();
        let th = throughput(&exact.nodes[0].chain);
        let s = simulate_network(
            a,
            b,
            ProtocolConfig::p_persistence(p, 1),
            omega,
            big_b,
            w,
            &SimConfig::new(9, 2_000_000, 10_000),
        )
        .unwrap();
        let emp = s.nodes[0].throughput(s.steps);
        assert!((emp - th).abs() / th < 0.01, "{emp} vs {th}");
        let qa = exact.nodes[0].chain.steady.mean_frames();
        assert!((s.nodes[0].time_avg_buffer - qa).abs() / qa < 0.03);
    }

    #[test]
    fn perfect_fso_delivers_everything() {
        let s = simulate_network(
            0.0,
            0.3,
            ProtocolConfig::p_persistence(0.5, 3),
            0.4,
            5,
            2,
            &SimConfig::new(1, 100_000, 0),
        )
        .unwrap();
        for n in &s.nodes {
            assert_eq!(n.lost, 0);
            assert_eq!(n.delivered, n.arrivals);
            assert_eq!(n.mean_delay, Some(0.0));
            assert!((n.throughput(s.steps) - 0.4).abs() < 0.01);
        }
        assert_eq!(s.rf_grant_events, 0);
    }

    #[test]
    fn no_service_path_loses_everything() {
        let s = simulate_network(
            1.0,
            0.3,
            ProtocolConfig::p_persistence(0.0, 2),
            0.7,
            4,
            2,
            &SimConfig::new(1, 200_000, 100),
        )
        .unwrap();
        for n in &s.nodes {
            assert_eq!(n.delivered, 0);
            assert_eq!(n.buffer_end, 4);
            assert!((n.loss_rate(s.steps) - 0.7).abs() < 0.01);
        }
    }

    #[test]
    fn forfeit_is_default_and_arbitration_matters() {
        let cfg = ProtocolConfig::p_persistence(0.5, 3);
        let base = SimConfig::new(5, 200_000, 1000);
        assert_eq!(base.arbitration, Arbitration::Forfeit);
        let forfeit = simulate_network(0.9, 0.22, cfg, 0.5, 10, 2, &base).unwrap();
        let greedy = simulate_network(
            0.9,
            0.22,
            cfg,
            0.5,
            10,
            2,
            &SimConfig {
                arbitration: Arbitration::PerContender,
                ..base
            },
        )
        .unwrap();
        assert!(greedy.rf_grant_events > forfeit.rf_grant_events);
    }

    #[test]
    fn rf_occupancy_bounded_by_grants() {
        let w = 3;
        let s = simulate_network(
            0.8,
            0.1,
            ProtocolConfig::p_persistence(1.0, 4),
            0.9,
            5,
            w,
            &SimConfig::new(2, 100_000, 0),
        )
        .unwrap();
        let busy = s.rf_busy_fraction * s.steps as f64;
        assert!(busy <= (s.rf_grant_events * w as u64) as f64 + 1e-9);
        assert!(busy >= (s.rf_grant_events * w as u64) as f64 - w as f64);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn flow_is_conserved_and_runs_repeat(
            a in 0.0..=1.0f64, b in 0.0..=1.0f64, p in 0.0..=1.0f64, omega in 0.0..=1.0f64,
            n in 1usize..=5, big_b in 1usize..=6, w in 1usize..=4, seed in any::<u64>(),
            warmup in 0u64..50, equal in any::<bool>(), greedy in any::<bool>(),
        ) {
            let cfg = if equal { ProtocolConfig::equal_priority(n) } else { ProtocolConfig::p_persistence(p, n) };
            let sim = SimConfig {
                arbitration: if greedy { Arbitration::PerContender } else { Arbitration::Forfeit },
                ..SimConfig::new(seed, 3000, warmup)
            };
            let s = simulate_network(a, b, cfg, omega, big_b, w, &sim).unwrap();
            for node in &s.nodes {
                prop_assert_eq!(node.arrivals + node.buffer_start, node.delivered + node.lost + node.buffer_end);
                prop_assert!(node.buffer_end <= big_b as u64);
            }
            prop_assert!((0.0..=1.0).contains(&s.rf_busy_fraction));
            prop_assert_eq!(s.clone(), simulate_network(a, b, cfg, omega, big_b, w, &sim).unwrap());
        }
    }
}
