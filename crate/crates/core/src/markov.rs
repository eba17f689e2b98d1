//! Discrete-time Markov chain of one remote node's transmit buffer.
//!
//! A state `(i, j)` holds `i` frames (`0..=B`); `j` (`0..Ω`) counts the
//! steps already spent on a frame that is going out over the RF link, so
//! `j >= 1` only while an RF transmission is in progress. The empty buffer
//! has the single state `(0, 0)`. States are laid out linearly as
//! `(0,0), (1,0), (1,1), ..., (1,Ω-1), (2,0), ...`.
//!
//! The transition matrix is column-stochastic: entry `(r, c)` is the
//! probability of moving from state `c` to state `r`.

use nalgebra::{DMatrix, DVector};
use petgraph::algo::tarjan_scc;
use petgraph::graph::{DiGraph, NodeIndex};

use crate::error::{check_probability, Error, Result};

/// Above this many states the steady state is found by power iteration
/// instead of a dense LU solve.
pub const DENSE_SOLVE_LIMIT: usize = 2000;
pub const POWER_TOLERANCE: f64 = 1e-12;
pub const POWER_MAX_ITERATIONS: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainParams {
    /// Probability that a frame arrives in a time step.
    pub omega: f64,
    /// Probability the node's FSO link is usable (`1 - a`).
    pub p_fso: f64,
    /// Probability the shared RF link is granted to this node.
    pub p_rf: f64,
    /// Buffer capacity `B` in frames.
    pub buffer_size: usize,
    /// FSO/RF rate ratio `Ω`: an RF frame takes `Ω` steps.
    pub omega_ratio: usize,
}

impl ChainParams {
    pub fn validate(&self) -> Result<()> {
        check_probability("omega", self.omega)?;
        check_probability("p_fso", self.p_fso)?;
        check_probability("p_rf", self.p_rf)?;
        if self.p_fso + self.p_rf > 1.0 + 1e-12 {
            return Err(Error::invalid(
                "p_rf",
                format!("p_fso + p_rf = {} exceeds 1", self.p_fso + self.p_rf),
            ));
        }
        if self.buffer_size == 0 {
            return Err(Error::invalid("buffer_size", "must be at least 1 frame"));
        }
        if self.omega_ratio == 0 {
            return Err(Error::invalid("omega_ratio", "must be at least 1"));
        }
        Ok(())
    }

    pub fn num_states(&self) -> usize {
        self.omega_ratio * self.buffer_size + 1
    }
}

/// Elementary one-step probabilities from which every block is assembled.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransitionProbs {
    pub u0: f64,
    pub f: f64,
    pub u: f64,
    pub u_b: f64,
    pub v1: f64,
    pub v2: f64,
    pub v3: f64,
    pub v4: f64,
}

pub fn transition_probs(params: &ChainParams) -> Result<TransitionProbs> {
    params.validate()?;
    let ChainParams { omega, p_fso, p_rf, .. } = *params;
    let idle = 1.0 - (p_fso + p_rf);
    Ok(TransitionProbs {
        u0: 1.0 - omega + omega * p_fso,
        f: omega * idle,
        u: (1.0 - omega) * idle + omega * p_fso,
        u_b: idle + omega * p_fso,
        v1: (1.0 - omega) * p_fso,
        v2: omega * p_rf,
        v3: (1.0 - omega) * p_rf,
        v4: p_rf,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct StateIndex {
    /// Frames in the buffer, including one in RF transmission.
    pub frames: usize,
    /// Steps elapsed in the current RF transmission.
    pub rf_step: usize,
}

impl StateIndex {
    pub fn new(frames: usize, rf_step: usize) -> Self {
        StateIndex { frames, rf_step }
    }

    pub fn linear(&self, omega_ratio: usize) -> usize {
        if self.frames == 0 {
            debug_assert_eq!(self.rf_step, 0);
            0
        } else {
            (self.frames - 1) * omega_ratio + self.rf_step + 1
        }
    }

    pub fn from_linear(index: usize, omega_ratio: usize) -> Self {
        if index == 0 {
            StateIndex::new(0, 0)
        } else {
            StateIndex::new((index - 1) / omega_ratio + 1, (index - 1) % omega_ratio)
        }
    }
}

/// Sparse column-stochastic matrix; each column has at most five entries.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix {
    columns: Vec<Vec<(usize, f64)>>,
}

impl TransitionMatrix {
    fn zeros(n: usize) -> Self {
        TransitionMatrix {
            columns: vec![Vec::new(); n],
        }
    }

    fn add(&mut self, to: usize, from: usize, p: f64) {
        if p == 0.0 {
            return;
        }
        let col = &mut self.columns[from];
        match col.iter_mut().find(|(r, _)| *r == to) {
            Some((_, v)) => *v += p,
            None => col.push((to, p)),
        }
    }

    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }

    /// Nonzero `(row, probability)` entries of column `from`.
    pub fn column(&self, from: usize) -> &[(usize, f64)] {
        &self.columns[from]
    }

    pub fn get(&self, to: usize, from: usize) -> f64 {
        self.columns[from]
            .iter()
            .find(|(r, _)| *r == to)
            .map_or(0.0, |(_, v)| *v)
    }

    pub fn column_sums(&self) -> Vec<f64> {
        self.columns.iter().map(|c| c.iter().map(|(_, v)| v).sum()).collect()
    }

    /// `P s`
    pub fn apply(&self, s: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.len()];
        for (from, col) in self.columns.iter().enumerate() {
            for &(to, p) in col {
                out[to] += p * s[from];
            }
        }
        out
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.len();
        let mut m = DMatrix::zeros(n, n);
        for (from, col) in self.columns.iter().enumerate() {
            for &(to, p) in col {
                m[(to, from)] += p;
            }
        }
        m
    }
}

/// Assembles the `(ΩB + 1)`-state transition matrix block by block:
/// `A0 = [u0]`, `C0 = [v1 0 .. 0 1-ω]`, `E0 = [f v2 0 .. 0]^T`, the
/// tridiagonal bands `E` (below), `A` (diagonal) and `C` (above), and `A_B`
/// for the full-buffer block.
///
/// With `Ω = 1` an RF transmission finishes in the step it starts, so the
/// RF grant acts exactly like an FSO departure and the chain collapses to a
/// birth–death chain with service probability `p_fso + p_rf`.
pub fn build_matrix(params: &ChainParams) -> Result<TransitionMatrix> {
    let t = transition_probs(params)?;
    let omega = params.omega;
    let big_b = params.buffer_size;
    let w = params.omega_ratio;
    let mut m = TransitionMatrix::zeros(params.num_states());
    let idx = |i: usize, j: usize| StateIndex::new(i, j).linear(w);

    if w == 1 {
        m.add(0, 0, t.u0 + t.v2);
        m.add(1, 0, t.f);
        for i in 1..=big_b {
            m.add(i - 1, i, t.v1 + t.v3);
            if i < big_b {
                m.add(i, i, t.u + t.v2);
                m.add(i + 1, i, t.f);
            } else {
                m.add(i, i, t.u_b + t.v2);
            }
        }
        return Ok(m);
    }

    // A0, E0
    m.add(0, 0, t.u0);
    m.add(idx(1, 0), 0, t.f);
    m.add(idx(1, 1), 0, t.v2);

    for i in 1..=big_b {
        let full = i == big_b;
        // C0 (i = 1) or C (i > 1): departures back to (i-1, 0).
        m.add(idx(i - 1, 0), idx(i, 0), t.v1);
        m.add(idx(i - 1, 0), idx(i, w - 1), 1.0 - omega);

        // A or A_B
        if full {
            m.add(idx(i, 0), idx(i, 0), t.u_b);
            m.add(idx(i, 1), idx(i, 0), t.v4);
        } else {
            m.add(idx(i, 0), idx(i, 0), t.u);
            m.add(idx(i, 1), idx(i, 0), t.v3);
        }
        for j in 1..w - 1 {
            m.add(idx(i, j + 1), idx(i, j), if full { 1.0 } else { 1.0 - omega });
        }
        m.add(idx(i, 0), idx(i, w - 1), omega);

        // E: arrivals move one block down.
        if !full {
            m.add(idx(i + 1, 0), idx(i, 0), t.f);
            m.add(idx(i + 1, 1), idx(i, 0), t.v2);
            for j in 1..w - 1 {
                m.add(idx(i + 1, j + 1), idx(i, j), omega);
            }
        }
    }
    Ok(m)
}

/// Stationary distribution `s` with `P s = s`, `s >= 0`, `sum(s) = 1`,
/// reached from an empty buffer.
///
/// Some boundary parameters make the chain reducible (with `ω = 1` and
/// perfect FSO every level is absorbing), so the solve is restricted to
/// the closed class reachable from `(0, 0)`. Small classes replace the
/// last balance equation by the normalization constraint and solve
/// directly; large ones use power iteration on the lazy chain
/// `(P + I) / 2`, which has the same fixed point and is aperiodic.
pub fn steady_state(matrix: &TransitionMatrix) -> Result<Vec<f64>> {
    let n = matrix.len();
    if n == 0 {
        return Err(Error::invalid("matrix", "empty chain"));
    }
    let class = closed_class_from_empty(matrix)?;
    let (sub, class) = if class.len() == n {
        (None, class)
    } else {
        let mut position = vec![usize::MAX; n];
        for (k, &state) in class.iter().enumerate() {
            position[state] = k;
        }
        let mut sub = TransitionMatrix::zeros(class.len());
        for (k, &state) in class.iter().enumerate() {
            for &(to, p) in matrix.column(state) {
                sub.add(position[to], k, p);
            }
        }
        (Some(sub), class)
    };
    let m = sub.as_ref().unwrap_or(matrix);
    let mut restricted = if m.len() <= DENSE_SOLVE_LIMIT {
        dense_steady_state(m)?
    } else {
        power_steady_state(m)?
    };
    for v in &mut restricted {
        if *v < 0.0 {
            if *v < -1e-9 {
                return Err(Error::SingularChain(format!("negative stationary mass {v:e}")));
            }
            *v = 0.0;
        }
    }
    let total: f64 = restricted.iter().sum();
    let mut s = vec![0.0; n];
    for (&state, v) in class.iter().zip(&restricted) {
        s[state] = v / total;
    }
    Ok(s)
}

/// The unique closed communicating class reachable from state 0, sorted.
fn closed_class_from_empty(matrix: &TransitionMatrix) -> Result<Vec<usize>> {
    let n = matrix.len();
    let mut graph = DiGraph::<(), ()>::with_capacity(n, 5 * n);
    for _ in 0..n {
        graph.add_node(());
    }
    for from in 0..n {
        for &(to, _) in matrix.column(from) {
            graph.add_edge(NodeIndex::new(from), NodeIndex::new(to), ());
        }
    }
    let mut reachable = vec![false; n];
    let mut stack = vec![0usize];
    reachable[0] = true;
    while let Some(state) = stack.pop() {
        for &(to, _) in matrix.column(state) {
            if !reachable[to] {
                reachable[to] = true;
                stack.push(to);
            }
        }
    }
    let mut component = vec![0usize; n];
    let sccs = tarjan_scc(&graph);
    for (id, scc) in sccs.iter().enumerate() {
        for v in scc {
            component[v.index()] = id;
        }
    }
    let mut closed: Vec<Vec<usize>> = sccs
        .iter()
        .enumerate()
        .filter(|(id, scc)| {
            reachable[scc[0].index()]
                && scc
                    .iter()
                    .all(|v| matrix.column(v.index()).iter().all(|&(to, _)| component[to] == *id))
        })
        .map(|(_, scc)| {
            let mut states: Vec<usize> = scc.iter().map(|v| v.index()).collect();
            states.sort_unstable();
            states
        })
        .collect();
    match closed.len() {
        1 => Ok(closed.pop().expect("one class")),
        k => Err(Error::SingularChain(format!(
            "{k} closed classes reachable from the empty state"
        ))),
    }
}

fn dense_steady_state(matrix: &TransitionMatrix) -> Result<Vec<f64>> {
    let n = matrix.len();
    let mut a = matrix.to_dense();
    for k in 0..n {
        a[(k, k)] -= 1.0;
    }
    for c in 0..n {
        a[(n - 1, c)] = 1.0;
    }
    let mut rhs = DVector::zeros(n);
    rhs[n - 1] = 1.0;
    let x = a
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::SingularChain("balance equations are singular (reducible chain)".into()))?;
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::SingularChain("non-finite solution".into()));
    }
    Ok(x.iter().copied().collect())
}

fn power_steady_state(matrix: &TransitionMatrix) -> Result<Vec<f64>> {
    let n = matrix.len();
    let mut s = vec![1.0 / n as f64; n];
    let mut change = f64::INFINITY;
    for _ in 0..POWER_MAX_ITERATIONS {
        let ps = matrix.apply(&s);
        let next: Vec<f64> = ps.iter().zip(&s).map(|(p, x)| 0.5 * (p + x)).collect();
        change = next.iter().zip(&s).map(|(a, b)| (a - b).abs()).sum();
        s = next;
        if change < POWER_TOLERANCE {
            return Ok(s);
        }
    }
    Err(Error::PowerIterationNonConvergence {
        iterations: POWER_MAX_ITERATIONS,
        residual: change,
    })
}

/// Stationary distribution with accessors for the aggregates the
/// performance metrics need.
#[derive(Debug, Clone, PartialEq)]
pub struct SteadyState {
    probs: Vec<f64>,
    omega_ratio: usize,
    buffer_size: usize,
}

impl SteadyState {
    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn at(&self, frames: usize, rf_step: usize) -> f64 {
        self.probs[StateIndex::new(frames, rf_step).linear(self.omega_ratio)]
    }

    /// `s_{0,0}`
    pub fn empty(&self) -> f64 {
        self.probs[0]
    }

    /// Mass of non-empty states with no RF transmission in progress.
    pub fn waiting(&self) -> f64 {
        (1..=self.buffer_size).map(|i| self.at(i, 0)).sum()
    }

    /// Mass of states with an RF transmission in progress (`j >= 1`).
    pub fn in_rf_transmission(&self) -> f64 {
        1.0 - self.empty() - self.waiting()
    }

    /// Mean number of frames in the buffer.
    pub fn mean_frames(&self) -> f64 {
        self.probs
            .iter()
            .enumerate()
            .map(|(k, p)| StateIndex::from_linear(k, self.omega_ratio).frames as f64 * p)
            .sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainSolution {
    pub params: ChainParams,
    pub matrix: TransitionMatrix,
    pub steady: SteadyState,
}

impl ChainSolution {
    /// `‖P s − s‖_∞`
    pub fn residual(&self) -> f64 {
        let s = self.steady.probs();
        self.matrix
            .apply(s)
            .iter()
            .zip(s)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Builds and solves the chain. With no arrivals this is the point mass
/// at `(0, 0)`.
pub fn solve_chain(params: &ChainParams) -> Result<ChainSolution> {
    let matrix = build_matrix(params)?;
    let probs = steady_state(&matrix)?;
    Ok(ChainSolution {
        params: *params,
        matrix,
        steady: SteadyState {
            probs,
            omega_ratio: params.omega_ratio,
            buffer_size: params.buffer_size,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn params(omega: f64, p_fso: f64, p_rf: f64, b: usize, w: usize) -> ChainParams {
        ChainParams {
            omega,
            p_fso,
            p_rf,
            buffer_size: b,
            omega_ratio: w,
        }
    }

    #[test]
    fn hand_evaluated_probabilities() {
        let t = transition_probs(&params(0.7, 0.1, 0.3, 3, 2)).unwrap();
        assert_relative_eq!(t.u0, 0.37, epsilon = 1e-15);
        assert_relative_eq!(t.f, 0.42, epsilon = 1e-15);
        assert_relative_eq!(t.u, 0.25, epsilon = 1e-15);
        assert_relative_eq!(t.u_b, 0.67, epsilon = 1e-15);
        assert_relative_eq!(t.v1, 0.03, epsilon = 1e-15);
        assert_relative_eq!(t.v2, 0.21, epsilon = 1e-15);
        assert_relative_eq!(t.v3, 0.09, epsilon = 1e-15);
        assert_relative_eq!(t.v4, 0.3, epsilon = 1e-15);
    }

    #[test]
    fn no_arrivals_and_perfect_fso() {
        let t = transition_probs(&params(0.0, 0.4, 0.2, 2, 2)).unwrap();
        assert_eq!((t.u0, t.f, t.v2), (1.0, 0.0, 0.0));
        let t = transition_probs(&params(0.6, 1.0, 0.0, 2, 2)).unwrap();
        assert_eq!(t.f, 0.0);
        assert_relative_eq!(t.v1, 0.4);
        assert_relative_eq!(t.u0, 1.0);
    }

    #[test]
    fn rejects_overlapping_service() {
        assert!(transition_probs(&params(0.5, 0.7, 0.4, 2, 2)).is_err());
        assert!(build_matrix(&params(0.5, 0.5, 0.5, 0, 2)).is_err());
        assert!(build_matrix(&params(0.5, 0.5, 0.5, 2, 0)).is_err());
        assert!(build_matrix(&params(1.5, 0.5, 0.5, 2, 2)).is_err());
    }

    #[test]
    fn state_indexing_roundtrip() {
        let w = 3;
        for k in 0..(w * 5 + 1) {
            assert_eq!(StateIndex::from_linear(k, w).linear(w), k);
        }
        assert_eq!(StateIndex::new(2, 1).linear(3), 5);
    }

    #[test]
    fn smallest_three_state_chain_matches_blocks() {
        // B = 1, Ω = 2: rows/cols (0,0), (1,0), (1,1) written out by hand
        // from A0, C0, E0 and A_B.
        let p = params(0.7, 0.1, 0.3, 1, 2);
        let m = build_matrix(&p).unwrap().to_dense();
        let expected = [[0.37, 0.03, 0.3], [0.42, 0.67, 0.7], [0.21, 0.3, 0.0]];
        for r in 0..3 {
            for c in 0..3 {
                assert_relative_eq!(m[(r, c)], expected[r][c], epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn three_state_steady_state_hand_solution() {
        let sol = solve_chain(&params(0.7, 0.1, 0.3, 1, 2)).unwrap();
        let s = sol.steady.probs();
        let hand = three_state_oracle([[0.37, 0.03, 0.3], [0.42, 0.67, 0.7]]);
        for k in 0..3 {
            assert_relative_eq!(s[k], hand[k], epsilon = 1e-12);
        }
        assert!(sol.residual() <= 1e-12);
    }

    /// Cramer's-rule solve of `(P - I) s = 0, sum s = 1` from the first two
    /// rows of a 3-state column-stochastic matrix.
    fn three_state_oracle(p: [[f64; 3]; 2]) -> [f64; 3] {
        let m = [
            [p[0][0] - 1.0, p[0][1], p[0][2]],
            [p[1][0], p[1][1] - 1.0, p[1][2]],
            [1.0, 1.0, 1.0],
        ];
        let det = |a: [[f64; 3]; 3]| {
            a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
                + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
        };
        let d = det(m);
        let mut out = [0.0; 3];
        for (k, o) in out.iter_mut().enumerate() {
            let mut mk = m;
            for (r, row) in mk.iter_mut().enumerate() {
                row[k] = if r == 2 { 1.0 } else { 0.0 };
            }
            *o = det(mk) / d;
        }
        out
    }

    #[test]
    fn omega_ratio_one_is_birth_death() {
        // Scalar recursion: s_{i+1} = s_i * up_i / down, with up from the
        // empty state equal to f and down = (1-ω)(p_fso + p_rf).
        for (omega, pf, pr, b) in [(0.3, 0.2, 0.5, 3), (0.8, 0.1, 0.2, 2), (0.5, 0.0, 0.6, 1)] {
            let sol = solve_chain(&params(omega, pf, pr, b, 1)).unwrap();
            let service = pf + pr;
            let up = omega * (1.0 - service);
            let down = (1.0 - omega) * service;
            let mut s = vec![1.0];
            for i in 0..b {
                s.push(s[i] * up / down);
            }
            let total: f64 = s.iter().sum();
            for (k, v) in s.iter().enumerate() {
                assert_relative_eq!(sol.steady.probs()[k], v / total, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn boundary_point_masses() {
        let sol = solve_chain(&params(0.0, 0.0, 0.0, 4, 3)).unwrap();
        assert_eq!(sol.steady.empty(), 1.0);
        let sol = solve_chain(&params(0.6, 1.0, 0.0, 4, 3)).unwrap();
        assert_relative_eq!(sol.steady.empty(), 1.0, epsilon = 1e-12);
        // Nothing is ever served: the buffer fills up.
        let sol = solve_chain(&params(1.0, 0.0, 0.0, 5, 2)).unwrap();
        assert_relative_eq!(sol.steady.mean_frames(), 5.0, epsilon = 1e-12);
    }

    #[test]
    fn saturated_perfect_fso_stays_empty() {
        // Every level (i, 0) is absorbing here; from an empty start the
        // buffer never fills.
        let sol = solve_chain(&params(1.0, 1.0, 0.0, 4, 3)).unwrap();
        assert_eq!(sol.steady.empty(), 1.0);
        assert!(sol.residual() < 1e-15);
    }

    #[test]
    fn transient_states_get_no_mass() {
        // Saturated arrivals with some FSO: the buffer only fills, so the
        // mass ends up at level B.
        let sol = solve_chain(&params(1.0, 0.5, 0.3, 3, 2)).unwrap();
        assert!((1..3).all(|i| sol.steady.at(i, 0) == 0.0 && sol.steady.at(i, 1) == 0.0));
        assert_relative_eq!(sol.steady.at(3, 0) + sol.steady.at(3, 1), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn power_iteration_agrees_with_dense_solve() {
        let p = params(0.55, 0.3, 0.35, 12, 3);
        let m = build_matrix(&p).unwrap();
        let dense = dense_steady_state(&m).unwrap();
        let power = power_steady_state(&m).unwrap();
        for (a, b) in dense.iter().zip(&power) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn large_chain_uses_power_iteration() {
        let p = params(0.4, 0.5, 0.3, 700, 3);
        assert!(p.num_states() > DENSE_SOLVE_LIMIT);
        let sol = solve_chain(&p).unwrap();
        assert!(sol.residual() < 1e-10);
    }

    #[test]
    fn mean_occupancy_grows_with_arrivals() {
        let mut last = 0.0;
        for k in 1..=20 {
            let omega = k as f64 / 20.0;
            let q = solve_chain(&params(omega, 0.2, 0.4, 6, 3))
                .unwrap()
                .steady
                .mean_frames();
            assert!(q >= last - 1e-12);
            last = q;
        }
    }

    fn valid_params() -> impl Strategy<Value = ChainParams> {
        (0.0..=1.0f64, 0.0..=1.0f64, 0.0..=1.0f64, 1usize..=4, 1usize..=3)
            .prop_map(|(omega, pf, frac, b, w)| params(omega, pf, (1.0 - pf) * frac, b, w))
    }

    proptest! {
        #[test]
        fn columns_are_stochastic(p in valid_params()) {
            let t = transition_probs(&p).unwrap();
            prop_assert!((t.u0 + t.f + t.v2 - 1.0).abs() < 1e-12);
            prop_assert!((t.u + t.v3 + t.f + t.v2 + t.v1 - 1.0).abs() < 1e-12);
            prop_assert!((t.u_b + t.v4 + t.v1 - 1.0).abs() < 1e-12);
            let m = build_matrix(&p).unwrap();
            prop_assert_eq!(m.len(), p.num_states());
            for s in m.column_sums() {
                prop_assert!((s - 1.0).abs() < 1e-12);
            }
        }

        #[test]
        fn steady_state_is_a_fixed_point(p in valid_params()) {
            let sol = solve_chain(&p).unwrap();
            let s = sol.steady.probs();
            prop_assert!(s.iter().all(|v| *v >= 0.0));
            prop_assert!((s.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            prop_assert!(sol.residual() <= 1e-10);
        }
    }
}
