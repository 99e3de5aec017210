//! The empirical-process variance quantities attached to an allocation
//! `{n_Q}`:
//!
//! ```text
//! σ_T² = max_Q σ_Q²/n_Q
//! Σ_T² = E[ max_Q (1/n_Q²) Σ_{i≤n_Q} (X_Q^i − μ_Q)² ]
//! V_T  = Σ_j (n_(j) − n_(j−1)) · E[ max_{r≥j} (X_{Q_(r)} − μ_{Q_(r)})² / n_(r)² ]
//! ```
//!
//! with the allocation sorted as `n_(1) ≤ … ≤ n_(k)` and `n_(0) = 0`.
//!
//! `σ_T²` is always exact. For `Σ_T²` and `V_T` two methods are offered: an
//! exact one, where the per-distribution law of the inner sum is built by
//! convolution over the finite support (histogram dynamic programming), the
//! expected maximum over independent distributions follows from the product
//! of their CDFs, and each `V_T` term enumerates joint single-draw outcomes;
//! and a seeded Monte Carlo plug-in with standard errors. Exact mode refuses
//! when the convolution state space exceeds the configured cap.

use std::collections::BTreeMap;

use serde::Serialize;

use super::BoundsError;
use crate::instance::Instance;
use crate::sampling::Stream;

/// Default cap on the exact-mode state space (atoms per law and joint
/// single-draw outcomes per term).
pub const DEFAULT_STATE_CAP: u64 = 1_000_000;

#[derive(Debug, Clone, Copy)]
pub enum VarianceMethod {
    Exact,
    MonteCarlo { trials: u64 },
}

/// A value with its standard error (zero in exact mode).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct VarianceQuantities {
    /// `σ_T²`, exact.
    pub sigma2_t: f64,
    /// `Σ_T²`.
    pub big_sigma2_t: Estimate,
    /// `V_T`.
    pub v_t: Estimate,
    pub method: String,
    pub mc_trials: Option<u64>,
}

/// Compute the three variance quantities for an allocation.
///
/// `stream` seeds the Monte Carlo method and is ignored in exact mode.
pub fn variance_quantities(
    inst: &Instance,
    allocation: &[u64],
    method: VarianceMethod,
    stream: Option<&Stream>,
) -> Result<VarianceQuantities, BoundsError> {
    variance_quantities_capped(inst, allocation, method, stream, DEFAULT_STATE_CAP)
}

pub fn variance_quantities_capped(
    inst: &Instance,
    allocation: &[u64],
    method: VarianceMethod,
    stream: Option<&Stream>,
    state_cap: u64,
) -> Result<VarianceQuantities, BoundsError> {
    let k = inst.n_distributions();
    if allocation.len() != k {
        return Err(BoundsError::Parameter(format!(
            "allocation has {} entries, instance has {k} distributions",
            allocation.len()
        )));
    }
    if allocation.contains(&0) {
        return Err(BoundsError::Parameter(
            "every allocation entry must be >= 1".into(),
        ));
    }

    let sigma2_t = (0..k)
        .map(|q| inst.data_variance(q) / allocation[q] as f64)
        .fold(f64::NEG_INFINITY, f64::max);

    match method {
        VarianceMethod::Exact => {
            let big = exact_big_sigma(inst, allocation, state_cap)?;
            let v = exact_v(inst, allocation, state_cap)?;
            Ok(VarianceQuantities {
                sigma2_t,
                big_sigma2_t: Estimate {
                    value: big,
                    std_error: 0.0,
                },
                v_t: Estimate {
                    value: v,
                    std_error: 0.0,
                },
                method: "exact".into(),
                mc_trials: None,
            })
        }
        VarianceMethod::MonteCarlo { trials } => {
            if trials < 2 {
                return Err(BoundsError::Parameter(
                    "Monte Carlo estimation needs at least 2 trials".into(),
                ));
            }
            let stream = stream.ok_or_else(|| {
                BoundsError::Parameter("Monte Carlo method requires a stream".into())
            })?;
            let (big, v) = mc_estimates(inst, allocation, trials, stream);
            Ok(VarianceQuantities {
                sigma2_t,
                big_sigma2_t: big,
                v_t: v,
                method: "monte-carlo".into(),
                mc_trials: Some(trials),
            })
        }
    }
}

/// Number of histograms of `n` draws over `m` bins, as f64 to sidestep
/// overflow; compared against the cap.
fn histogram_states(n: u64, m: usize) -> f64 {
    // C(n + m - 1, m - 1)
    let mut acc = 1.0f64;
    for i in 1..m as u64 {
        acc *= (n + i) as f64 / i as f64;
    }
    acc
}

/// Exact law of `W_Q = (1/n²)·Σ_{i≤n} (X_i − μ_Q)²` as sorted (value, prob)
/// atoms, by histogram convolution.
fn per_distribution_square_sum_law(
    inst: &Instance,
    q: usize,
    n: u64,
    state_cap: u64,
) -> Result<Vec<(f64, f64)>, BoundsError> {
    let m = inst.support_len();
    let states = histogram_states(n, m);
    if states > state_cap as f64 {
        return Err(BoundsError::ExactRefused(format!(
            "convolution state space {states:.3e} exceeds the cap {state_cap} \
             (distribution index {q}, {n} draws over {m} support points)"
        )));
    }
    let probs = &inst.distributions[q].probs;
    let mu = inst.data_mean(q);
    let sq: Vec<f64> = inst.support.iter().map(|x| (x - mu) * (x - mu)).collect();

    let mut dist: BTreeMap<Vec<u16>, f64> = BTreeMap::new();
    dist.insert(vec![0u16; m], 1.0);
    for _ in 0..n {
        let mut next: BTreeMap<Vec<u16>, f64> = BTreeMap::new();
        for (hist, p) in &dist {
            for (xi, px) in probs.iter().enumerate() {
                if *px == 0.0 {
                    continue;
                }
                let mut h = hist.clone();
                h[xi] += 1;
                *next.entry(h).or_insert(0.0) += p * px;
            }
        }
        dist = next;
    }

    let n2 = (n * n) as f64;
    let mut atoms: Vec<(f64, f64)> = dist
        .into_iter()
        .map(|(hist, p)| {
            let value: f64 = hist
                .iter()
                .zip(&sq)
                .map(|(c, s)| *c as f64 * s)
                .sum::<f64>()
                / n2;
            (value, p)
        })
        .collect();
    atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
    // Merge exact duplicates.
    let mut merged: Vec<(f64, f64)> = Vec::with_capacity(atoms.len());
    for (v, p) in atoms {
        match merged.last_mut() {
            Some(last) if last.0 == v => last.1 += p,
            _ => merged.push((v, p)),
        }
    }
    Ok(merged)
}

/// `E[max_Q W_Q]` for independent discrete laws, via the product of CDFs over
/// the union value grid.
fn expected_max_of_independent(laws: &[Vec<(f64, f64)>]) -> f64 {
    let mut grid: Vec<f64> = laws.iter().flatten().map(|(v, _)| *v).collect();
    grid.sort_by(f64::total_cmp);
    grid.dedup();

    let mut pointers = vec![0usize; laws.len()];
    let mut cdfs = vec![0.0f64; laws.len()];
    let mut expectation = 0.0;
    let mut prev_joint = 0.0;
    for &v in &grid {
        for (law, (ptr, cdf)) in laws.iter().zip(pointers.iter_mut().zip(cdfs.iter_mut())) {
            while *ptr < law.len() && law[*ptr].0 <= v {
                *cdf += law[*ptr].1;
                *ptr += 1;
            }
        }
        let joint: f64 = cdfs.iter().product();
        expectation += v * (joint - prev_joint);
        prev_joint = joint;
    }
    expectation
}

fn exact_big_sigma(inst: &Instance, allocation: &[u64], cap: u64) -> Result<f64, BoundsError> {
    let laws: Result<Vec<_>, _> = (0..inst.n_distributions())
        .map(|q| per_distribution_square_sum_law(inst, q, allocation[q], cap))
        .collect();
    Ok(expected_max_of_independent(&laws?))
}

/// Allocation sorted ascending, ties by distribution index.
fn sorted_allocation(allocation: &[u64]) -> Vec<(u64, usize)> {
    let mut order: Vec<(u64, usize)> = allocation.iter().cloned().zip(0..).collect();
    order.sort();
    order
}

fn exact_v(inst: &Instance, allocation: &[u64], cap: u64) -> Result<f64, BoundsError> {
    let k = allocation.len();
    let m = inst.support_len();
    let order = sorted_allocation(allocation);
    let mut v = 0.0;
    let mut prev_n = 0u64;
    for j in 0..k {
        let (n_j, _) = order[j];
        let weight = (n_j - prev_n) as f64;
        prev_n = n_j;
        if weight == 0.0 {
            continue;
        }
        let tail = &order[j..];
        let outcomes = (m as f64).powi(tail.len() as i32);
        if outcomes > cap as f64 {
            return Err(BoundsError::ExactRefused(format!(
                "joint single-draw enumeration of {outcomes:.3e} outcomes exceeds the cap {cap}"
            )));
        }
        // Enumerate joint single-draw outcomes across the tail distributions.
        let mut expectation = 0.0;
        let mut idx = vec![0usize; tail.len()];
        'outer: loop {
            let mut prob = 1.0;
            let mut max = f64::NEG_INFINITY;
            for (pos, &(n_r, q_r)) in tail.iter().enumerate() {
                let xi = idx[pos];
                prob *= inst.distributions[q_r].probs[xi];
                let mu = inst.data_mean(q_r);
                let d = inst.support[xi] - mu;
                max = max.max(d * d / (n_r * n_r) as f64);
            }
            if prob > 0.0 {
                expectation += prob * max;
            }
            for slot in idx.iter_mut() {
                *slot += 1;
                if *slot < m {
                    continue 'outer;
                }
                *slot = 0;
            }
            break;
        }
        v += weight * expectation;
    }
    Ok(v)
}

/// Per-trial plug-in Monte Carlo for `Σ_T²` and `V_T`, on dedicated lanes of
/// the given stream. Sequential and therefore trivially reproducible.
fn mc_estimates(
    inst: &Instance,
    allocation: &[u64],
    trials: u64,
    stream: &Stream,
) -> (Estimate, Estimate) {
    let k = allocation.len();
    let mus: Vec<f64> = (0..k).map(|q| inst.data_mean(q)).collect();
    let order = sorted_allocation(allocation);

    let mut big_lane = stream.lane(0);
    let mut big = Welford::new();
    for _ in 0..trials {
        let mut max = f64::NEG_INFINITY;
        for q in 0..k {
            let n = allocation[q];
            let mut acc = 0.0;
            for _ in 0..n {
                let x = inst.support[big_lane.draw(&inst.distributions[q].probs)];
                let d = x - mus[q];
                acc += d * d;
            }
            max = max.max(acc / (n * n) as f64);
        }
        big.push(max);
    }

    let mut v_lane = stream.lane(1);
    let mut v = Welford::new();
    let mut y = vec![0.0f64; k];
    for _ in 0..trials {
        for (pos, &(n_r, q_r)) in order.iter().enumerate() {
            let x = inst.support[v_lane.draw(&inst.distributions[q_r].probs)];
            let d = x - mus[q_r];
            y[pos] = d * d / (n_r * n_r) as f64;
        }
        // Suffix maxima give every term of the weighted sum in one pass.
        let mut suffix = f64::NEG_INFINITY;
        let mut total = 0.0;
        for pos in (0..k).rev() {
            suffix = suffix.max(y[pos]);
            let prev = if pos == 0 { 0 } else { order[pos - 1].0 };
            total += (order[pos].0 - prev) as f64 * suffix;
        }
        v.push(total);
    }

    (big.estimate(), v.estimate())
}

/// Running mean/variance accumulator.
struct Welford {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Welford {
    fn new() -> Self {
        Welford {
            n: 0,
            mean: 0.0,
            m2: 0.0,
        }
    }

    fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    fn estimate(&self) -> Estimate {
        let var = if self.n > 1 {
            self.m2 / (self.n - 1) as f64
        } else {
            0.0
        };
        Estimate {
            value: self.mean,
            std_error: (var / self.n as f64).sqrt(),
        }
    }
}
