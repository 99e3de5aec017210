//! Brute-force oracle: the exact output law of the non-adaptive strategies.
//!
//! For an allocation `{n_Q}` the per-distribution sample histogram is a
//! sufficient statistic for the proxy, so the joint outcome space is
//! enumerated histogram-by-histogram with multinomial probabilities; the
//! result is identical to walking all `m^(Σ n_Q)` raw outcomes, which is the
//! size the cap is stated against. The decision rule applied at each outcome
//! is the very same histogram-mean/argmax helper the runtime algorithms use.

use serde::Serialize;

use super::VerifyError;
use crate::algorithms::{argmax_lowest, mean_from_histogram};
use crate::instance::{GapProfile, Instance};
use crate::GAP_TOL;

/// Default cap on the raw enumeration size `m^(Σ n_Q)`.
pub const DEFAULT_ENUMERATION_CAP: f64 = 1e7;

/// Exact law of the output decision under a fixed allocation.
#[derive(Debug, Clone, Serialize)]
pub struct ExactLaw {
    /// `P(Aᵒ_T = a)` per action.
    pub p_choice: Vec<f64>,
    /// `E[Δ_DR(Aᵒ_T)]`.
    pub regret: f64,
    /// `P(Δ_DR(Aᵒ_T) > 0)`.
    pub error_prob: f64,
    /// Standard deviation of the per-trial regret (for agreement tests).
    pub regret_sd: f64,
}

/// All histograms of `n` draws over the given probability vector, with their
/// multinomial probabilities, built one draw at a time so probabilities stay
/// in `[0,1]` throughout.
fn histogram_law(probs: &[f64], n: u64) -> Vec<(Vec<u64>, f64)> {
    let m = probs.len();
    let mut dist: Vec<(Vec<u64>, f64)> = vec![(vec![0u64; m], 1.0)];
    for _ in 0..n {
        let mut next: std::collections::BTreeMap<Vec<u64>, f64> = std::collections::BTreeMap::new();
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
        dist = next.into_iter().collect();
    }
    dist
}

/// Enumerate all joint outcomes of a uniform or non-uniform exploration run
/// and return the exact law of the chosen action.
///
/// Refuses when `m^(Σ n_Q)` exceeds `cap` (see
/// [`DEFAULT_ENUMERATION_CAP`]), naming the required enumeration size.
pub fn exact_ue_distribution(
    inst: &Instance,
    profile: &GapProfile,
    allocation: &[u64],
    cap: f64,
) -> Result<ExactLaw, VerifyError> {
    let k = inst.n_distributions();
    let l = inst.n_actions();
    let m = inst.support_len();
    if allocation.len() != k {
        return Err(VerifyError::Parameter(format!(
            "allocation has {} entries, instance has {k} distributions",
            allocation.len()
        )));
    }
    if allocation.contains(&0) {
        return Err(VerifyError::Parameter(
            "every allocation entry must be >= 1".into(),
        ));
    }
    let total: u64 = allocation.iter().sum();
    let outcomes = (m as f64).powf(total as f64);
    if outcomes > cap {
        return Err(VerifyError::OracleRefused(format!(
            "exact enumeration needs {outcomes:.3e} outcomes ({m}^{total}), cap is {cap:.3e}"
        )));
    }

    let laws: Vec<Vec<(Vec<u64>, f64)>> = (0..k)
        .map(|q| histogram_law(&inst.distributions[q].probs, allocation[q]))
        .collect();

    let mut p_choice = vec![0.0f64; l];
    // Depth-first product over the per-distribution histogram laws.
    let mut chosen_hist: Vec<usize> = vec![0; k];
    let mut stack_prob = vec![1.0f64; k + 1];
    let mut q = 0usize;
    loop {
        if q == k {
            let prob = stack_prob[k];
            let proxy: Vec<f64> = (0..l)
                .map(|a| {
                    (0..k)
                        .map(|qi| {
                            mean_from_histogram(
                                inst,
                                a,
                                &laws[qi][chosen_hist[qi]].0,
                                allocation[qi],
                            )
                        })
                        .fold(f64::INFINITY, f64::min)
                })
                .collect();
            p_choice[argmax_lowest(&proxy)] += prob;
            // Backtrack to the deepest level with an unvisited branch.
            loop {
                if q == 0 {
                    return Ok(finish(profile, p_choice));
                }
                q -= 1;
                chosen_hist[q] += 1;
                if chosen_hist[q] < laws[q].len() {
                    break;
                }
                chosen_hist[q] = 0;
            }
        }
        stack_prob[q + 1] = stack_prob[q] * laws[q][chosen_hist[q]].1;
        q += 1;
    }
}

fn finish(profile: &GapProfile, p_choice: Vec<f64>) -> ExactLaw {
    let mut regret = 0.0;
    let mut second_moment = 0.0;
    let mut error_prob = 0.0;
    for (a, &p) in p_choice.iter().enumerate() {
        let gap = profile.delta_dr[a];
        regret += p * gap;
        second_moment += p * gap * gap;
        if gap > GAP_TOL {
            error_prob += p;
        }
    }
    ExactLaw {
        p_choice,
        regret,
        error_prob,
        regret_sd: (second_moment - regret * regret).max(0.0).sqrt(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::presets::two_by_two;

    fn assert_close(actual: f64, expected: f64, tol: f64) {
        assert!(
            (actual - expected).abs() <= tol,
            "expected {expected}, got {actual}"
        );
    }

    #[test]
    fn single_sample_law_on_the_canonical_instance() {
        let inst = two_by_two();
        let profile = inst.gap_profile();
        let law = exact_ue_distribution(&inst, &profile, &[1, 1], DEFAULT_ENUMERATION_CAP)
            .unwrap();
        // Only the (x=1, x=1) outcome, probability 0.4 * 0.6 = 0.24, selects
        // the suboptimal action.
        assert_close(law.p_choice[1], 0.24, 1e-12);
        assert_close(law.error_prob, 0.24, 1e-12);
        assert_close(law.regret, 0.0048, 1e-12);
    }

    #[test]
    fn probabilities_sum_to_one() {
        let inst = two_by_two();
        let profile = inst.gap_profile();
        for alloc in [[1u64, 1], [3, 3], [2, 5]] {
            let law =
                exact_ue_distribution(&inst, &profile, &alloc, DEFAULT_ENUMERATION_CAP).unwrap();
            let total: f64 = law.p_choice.iter().sum();
            assert_close(total, 1.0, 1e-12);
        }
    }

    #[test]
    fn identical_reward_rows_have_zero_exact_regret() {
        let mut inst = two_by_two();
        inst.reward[1] = inst.reward[0].clone();
        let profile = inst.gap_profile();
        let law =
            exact_ue_distribution(&inst, &profile, &[2, 2], DEFAULT_ENUMERATION_CAP).unwrap();
        assert_close(law.regret, 0.0, 0.0);
        assert_close(law.error_prob, 0.0, 0.0);
    }

    #[test]
    fn refusal_names_the_enumeration_size() {
        let inst = two_by_two();
        let profile = inst.gap_profile();
        let err = exact_ue_distribution(&inst, &profile, &[30, 30], 1e7).unwrap_err();
        let msg = format!("{err}");
        assert!(msg.contains("2^60"), "{msg}");
    }

    #[test]
    fn histogram_law_is_a_probability_law() {
        let law = histogram_law(&[0.2, 0.3, 0.5], 4);
        let total: f64 = law.iter().map(|(_, p)| p).sum();
        assert_close(total, 1.0, 1e-12);
        assert_eq!(law.len(), 15); // C(4 + 2, 2)
    }
}
