//! Sampling strategies over the interaction protocol: at each round the
//! learner picks a distribution, receives one data point from it, and after
//! the budget is spent outputs the action maximizing a robust proxy
//! `μᵒ(a) = min_Q μ̂(a;Q)`.
//!
//! Per-distribution sample histograms are the run state: they are a
//! sufficient statistic from which the empirical mean of *every* action can
//! be recomputed, which is what lets the adaptive procedure reuse samples
//! across rounds. Ties are broken by lowest index everywhere.

mod lcb_dr;

pub use lcb_dr::{
    eps_schedule, eps_schedule_with, resolve_eps, round_budget, run_lcb_dr, run_lcb_dr_manual,
    EpsSchedule, EpsSpec, LcbDrOptions, RoundBudget, RoundEvents, RoundRecord,
};

use serde::Serialize;
use thiserror::Error;

use crate::instance::{GapProfile, Instance};
use crate::sampling::Stream;

#[derive(Debug, Error)]
pub enum AlgorithmError {
    #[error("parameter error: {0}")]
    Parameter(String),
    #[error("state error: {0}")]
    State(String),
    #[error("assumption error: {0}")]
    Assumption(String),
}

/// Index of the maximal entry, lowest index on ties.
pub fn argmax_lowest(xs: &[f64]) -> usize {
    let mut best = 0;
    for (i, x) in xs.iter().enumerate().skip(1) {
        if *x > xs[best] {
            best = i;
        }
    }
    best
}

/// Index of the minimal entry, lowest index on ties.
pub fn argmin_lowest(xs: &[f64]) -> usize {
    let mut best = 0;
    for (i, x) in xs.iter().enumerate().skip(1) {
        if *x < xs[best] {
            best = i;
        }
    }
    best
}

/// Empirical mean of action `a` from a per-support histogram of `n` samples.
///
/// Shared by the online algorithms and the exact enumeration oracle so both
/// apply bit-identical arithmetic to identical histograms.
pub fn mean_from_histogram(inst: &Instance, a: usize, hist: &[u64], n: u64) -> f64 {
    let sum: f64 = hist
        .iter()
        .zip(&inst.reward[a])
        .map(|(c, r)| *c as f64 * r)
        .sum();
    sum / n as f64
}

/// Per-distribution sample histograms plus pull counts.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunState {
    /// `hist[q][x]`: number of samples from distribution `q` equal to
    /// support point `x`.
    pub hist: Vec<Vec<u64>>,
    /// `n_t(Q)` per distribution.
    pub counts: Vec<u64>,
    /// Adaptive rounds elapsed (excludes initialization samples).
    pub t: u64,
    /// Samples present before the adaptive clock started.
    pub initial: u64,
}

impl RunState {
    pub fn new(k: usize, m: usize) -> Self {
        RunState {
            hist: vec![vec![0; m]; k],
            counts: vec![0; k],
            t: 0,
            initial: 0,
        }
    }

    /// Record one initialization sample (does not advance the round clock).
    pub fn record_initial(&mut self, q: usize, x: usize) {
        self.hist[q][x] += 1;
        self.counts[q] += 1;
        self.initial += 1;
    }

    /// Record one adaptive sample.
    pub fn record(&mut self, q: usize, x: usize) {
        self.hist[q][x] += 1;
        self.counts[q] += 1;
        self.t += 1;
    }

    pub fn count(&self, q: usize) -> u64 {
        self.counts[q]
    }

    pub fn total_samples(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// `μ̂_{n(Q)}(a;Q)` recomputed from the histogram.
    pub fn empirical_mean(&self, inst: &Instance, a: usize, q: usize) -> f64 {
        mean_from_histogram(inst, a, &self.hist[q], self.counts[q])
    }

    /// Robust proxy `μᵒ(a) = min_Q μ̂(a;Q)` for every action. Requires every
    /// distribution pulled at least once.
    pub fn robust_proxy(&self, inst: &Instance) -> Vec<f64> {
        (0..inst.n_actions())
            .map(|a| {
                (0..inst.n_distributions())
                    .map(|q| self.empirical_mean(inst, a, q))
                    .fold(f64::INFINITY, f64::min)
            })
            .collect()
    }
}

/// Outcome of one algorithm run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunResult {
    /// Chosen action `Aᵒ_T` (index).
    pub chosen: usize,
    /// Proxy objective `μᵒ_T(a)` per action.
    pub proxy: Vec<f64>,
    /// Final pull counts `n_T(Q)`.
    pub counts: Vec<u64>,
    /// `T`, including initialization samples.
    pub total_samples: u64,
    /// Per-round artifacts; `Some` only for LCB-DR runs.
    pub rounds: Option<Vec<RoundRecord>>,
}

impl RunResult {
    /// Simple regret `Δ_DR(Aᵒ_T)` of the chosen action.
    pub fn regret(&self, profile: &GapProfile) -> f64 {
        profile.delta_dr[self.chosen]
    }

    /// Whether the chosen action is suboptimal.
    pub fn is_error(&self, profile: &GapProfile) -> bool {
        self.regret(profile) > crate::GAP_TOL
    }
}

/// Uniform exploration: `n` samples from each distribution (`T = n·k`),
/// proxy `μᵒ(a) = min_Q μ̂_n(a;Q)`, output the argmax.
pub fn run_ue(inst: &Instance, n: u64, stream: &Stream) -> Result<RunResult, AlgorithmError> {
    if n == 0 {
        return Err(AlgorithmError::Parameter(
            "uniform exploration requires n >= 1".into(),
        ));
    }
    // Uniform exploration is non-uniform exploration with a constant
    // allocation; keep a single code path.
    run_nue(inst, &vec![n; inst.n_distributions()], stream)
}

/// Non-uniform exploration: `n_Q` samples from each distribution
/// (`T = Σ n_Q`), proxy `μᵒ(a) = min_Q μ̂_{n_Q}(a;Q)`.
pub fn run_nue(
    inst: &Instance,
    allocation: &[u64],
    stream: &Stream,
) -> Result<RunResult, AlgorithmError> {
    let k = inst.n_distributions();
    if allocation.len() != k {
        return Err(AlgorithmError::Parameter(format!(
            "allocation has {} entries, instance has {k} distributions",
            allocation.len()
        )));
    }
    if allocation.contains(&0) {
        return Err(AlgorithmError::Parameter(
            "every allocation entry must be >= 1".into(),
        ));
    }
    let mut state = RunState::new(k, inst.support_len());
    for (q, &n_q) in allocation.iter().enumerate() {
        let mut lane = stream.lane(q as u64);
        let probs = &inst.distributions[q].probs;
        for _ in 0..n_q {
            let x = lane.draw(probs);
            state.record(q, x);
        }
    }
    let proxy = state.robust_proxy(inst);
    let chosen = argmax_lowest(&proxy);
    Ok(RunResult {
        chosen,
        proxy,
        counts: state.counts.clone(),
        total_samples: state.total_samples(),
        rounds: None,
    })
}

/// Lower confidence bound index `μ̂_{n(Q)}(a;Q) − sqrt(ε / n(Q))`.
pub fn lcb_index(
    state: &RunState,
    inst: &Instance,
    a: usize,
    q: usize,
    eps: f64,
) -> Result<f64, AlgorithmError> {
    if eps < 0.0 {
        return Err(AlgorithmError::Parameter(format!(
            "index parameter must be nonnegative, got {eps}"
        )));
    }
    let n = state.count(q);
    if n == 0 {
        return Err(AlgorithmError::State(format!(
            "distribution {q} has no samples; the index is undefined"
        )));
    }
    Ok(state.empirical_mean(inst, a, q) - (eps / n as f64).sqrt())
}

/// Modified UCB-E, minimization variant, starting from pre-existing samples.
///
/// For `budget` steps pulls `argmin_Q [μ̂(a;Q) − sqrt(ε/n(Q))]` (lowest index
/// on ties) and returns `Q̂ = argmin_Q μ̂(a;Q)` together with the set of
/// distributions pulled. Requires every distribution sampled at least once.
pub fn run_ucbe_min(
    state: &mut RunState,
    inst: &Instance,
    a: usize,
    eps: f64,
    budget: u64,
    stream: &Stream,
) -> Result<(usize, Vec<bool>), AlgorithmError> {
    let k = inst.n_distributions();
    let mut lanes: Vec<Stream> = (0..k).map(|q| stream.lane(q as u64)).collect();
    ucbe_min_with_lanes(state, inst, a, eps, budget, &mut lanes, &mut |_, _| {})
}

/// Inner UCB-E loop over caller-owned per-distribution lanes. `on_draw` sees
/// every `(q, support index)` pair in draw order.
pub(crate) fn ucbe_min_with_lanes(
    state: &mut RunState,
    inst: &Instance,
    a: usize,
    eps: f64,
    budget: u64,
    lanes: &mut [Stream],
    on_draw: &mut dyn FnMut(usize, usize),
) -> Result<(usize, Vec<bool>), AlgorithmError> {
    let k = inst.n_distributions();
    if eps <= 0.0 {
        return Err(AlgorithmError::Parameter(format!(
            "index parameter must be positive, got {eps}"
        )));
    }
    if state.counts.contains(&0) {
        return Err(AlgorithmError::State(
            "every distribution must be sampled once before the index policy starts".into(),
        ));
    }

    // Running reward sums per distribution; seeded from the histograms so the
    // index is O(1) per step. The histogram stays the source of truth.
    let mut sums: Vec<f64> = (0..k)
        .map(|q| {
            state.hist[q]
                .iter()
                .zip(&inst.reward[a])
                .map(|(c, r)| *c as f64 * r)
                .sum()
        })
        .collect();
    let mut pulled = vec![false; k];

    for _ in 0..budget {
        let mut best = 0;
        let mut best_index = f64::INFINITY;
        for (q, sum) in sums.iter().enumerate() {
            let n = state.counts[q] as f64;
            let index = sum / n - (eps / n).sqrt();
            if index < best_index {
                best_index = index;
                best = q;
            }
        }
        let x = lanes[best].draw(&inst.distributions[best].probs);
        state.record(best, x);
        sums[best] += inst.reward[a][x];
        pulled[best] = true;
        on_draw(best, x);
    }

    let means: Vec<f64> = (0..k)
        .map(|q| sums[q] / state.counts[q] as f64)
        .collect();
    Ok((argmin_lowest(&means), pulled))
}
