//! Problem instances and their exactly computable ground truth.
//!
//! An [`Instance`] is a finite decision set, a finite strictly increasing real
//! support, a collection of named probability vectors over that support, and a
//! reward table `r[a][x] ∈ [0,1]`. Everything downstream (means `μ(a;Q)`,
//! the robust objective `μ_DR(a) = min_Q μ(a;Q)`, both gap families, the
//! complexity measures `H_a` and `C_a`) is derived here in closed form, so
//! every simulation in this crate can be checked against exact numbers.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::GAP_TOL;

/// A named probability vector over the instance support.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct NamedDistribution {
    pub name: String,
    pub probs: Vec<f64>,
}

/// A fully specified problem instance.
///
/// Serialized field order matches the on-disk JSON schema:
/// `{"actions": [...], "support": [...], "distributions": [{"name", "probs"}],
/// "reward": [[row per action]]}`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Instance {
    /// Ordered decision identifiers (`l` of them).
    pub actions: Vec<String>,
    /// Ordered support points `x_1 < … < x_m`.
    pub support: Vec<f64>,
    /// Ordered named probability vectors (`k` of them).
    pub distributions: Vec<NamedDistribution>,
    /// Reward table, one row per action, one column per support point.
    pub reward: Vec<Vec<f64>>,
}

/// Lookup failures for name-based access.
#[derive(Debug, Error)]
pub enum InstanceError {
    #[error("unknown action {0:?}")]
    UnknownAction(String),
    #[error("unknown distribution {0:?}")]
    UnknownDistribution(String),
    #[error("instance JSON: {0}")]
    Json(#[from] serde_json::Error),
}

/// One violated invariant, naming the offending field.
#[derive(Debug, Clone, Serialize)]
pub struct Violation {
    pub field: String,
    pub message: String,
}

/// Structured validation outcome. Never aborts; lists what is wrong.
///
/// Assumption-3 style uniqueness (unique optimal action and unique worst-case
/// distribution per action) is reported separately because only the adaptive
/// LCB-DR procedure needs it.
#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    /// `None` when the instance is invalid and uniqueness cannot be assessed.
    pub unique_optima_satisfied: Option<bool>,
    pub unique_optima_issues: Vec<String>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// All oracle quantities derived from an instance.
///
/// Tie sets are reported explicitly (indices, sorted ascending) together with
/// uniqueness flags; algorithms break ties by lowest index.
#[derive(Debug, Clone, Serialize)]
pub struct GapProfile {
    /// `μ(a;Q)` per (action, distribution).
    pub mean: Vec<Vec<f64>>,
    /// `μ_DR(a) = min_Q μ(a;Q)`.
    pub mu_dr: Vec<f64>,
    /// `μ*_DR = max_a μ_DR(a)`.
    pub mu_dr_star: f64,
    /// Optimal action(s), as a tie set.
    pub a_star: Vec<usize>,
    pub unique_a_star: bool,
    /// `Δ_DR(a) = μ*_DR − μ_DR(a)`.
    pub delta_dr: Vec<f64>,
    /// Minimal positive `Δ_DR`; `None` when every action is optimal.
    pub delta_dr_min: Option<f64>,
    /// Worst-case distribution(s) `Q*_a` per action, as tie sets.
    pub worst_q: Vec<Vec<usize>>,
    pub unique_worst_q: Vec<bool>,
    /// `Δ_a(Q) = μ(a;Q) − μ_DR(a)`.
    pub delta_aq: Vec<Vec<f64>>,
    /// Minimal positive `Δ_a(Q)` per action; `None` when all distributions tie.
    pub delta_a_min: Vec<Option<f64>>,
    /// `H_a = Σ_{Q: Δ_a(Q)>0} Δ_a(Q)^{-2}`; 0 when the sum is empty.
    pub h: Vec<f64>,
    /// `C_a = Δ_DR(a)/Δ_{a,min}` for suboptimal `a`, `Δ_DR,min/Δ_{a*,min}` at
    /// the optimum; `None` where an ingredient is undefined.
    pub c: Vec<Option<f64>>,
}

impl GapProfile {
    /// Lowest-index optimal action.
    pub fn a_star_lowest(&self) -> usize {
        self.a_star[0]
    }

    /// Lowest-index worst-case distribution for `a`.
    pub fn worst_q_lowest(&self, a: usize) -> usize {
        self.worst_q[a][0]
    }

    /// Unique optimal action and unique worst-case distribution for every
    /// action (required by LCB-DR).
    pub fn unique_optima(&self) -> bool {
        self.unique_a_star && self.unique_worst_q.iter().all(|&u| u)
    }
}

/// Least Lipschitz constants of the reward rows restricted to the support.
#[derive(Debug, Clone, Serialize)]
pub struct LipschitzReport {
    /// `L_a = max_{i<j} |r[a][x_i] − r[a][x_j]| / (x_j − x_i)`.
    pub per_action: Vec<f64>,
    /// `L = max_a L_a`.
    pub overall: f64,
    /// Set when `m = 1`, where `L_a = 0` by convention.
    pub degenerate_support: bool,
}

impl Instance {
    pub fn n_actions(&self) -> usize {
        self.actions.len()
    }

    pub fn n_distributions(&self) -> usize {
        self.distributions.len()
    }

    pub fn support_len(&self) -> usize {
        self.support.len()
    }

    pub fn action_index(&self, name: &str) -> Result<usize, InstanceError> {
        self.actions
            .iter()
            .position(|a| a == name)
            .ok_or_else(|| InstanceError::UnknownAction(name.to_string()))
    }

    pub fn distribution_index(&self, name: &str) -> Result<usize, InstanceError> {
        self.distributions
            .iter()
            .position(|d| d.name == name)
            .ok_or_else(|| InstanceError::UnknownDistribution(name.to_string()))
    }

    pub fn from_json_str(s: &str) -> Result<Self, InstanceError> {
        Ok(serde_json::from_str(s)?)
    }

    /// Exact expectation `μ(a;Q) = Σ_x p_Q(x)·r[a][x]` over the finite support.
    pub fn mean(&self, a: usize, q: usize) -> f64 {
        self.distributions[q]
            .probs
            .iter()
            .zip(&self.reward[a])
            .map(|(p, r)| p * r)
            .sum()
    }

    /// Name-based variant of [`Instance::mean`].
    pub fn mean_by_name(&self, action: &str, distribution: &str) -> Result<f64, InstanceError> {
        let a = self.action_index(action)?;
        let q = self.distribution_index(distribution)?;
        Ok(self.mean(a, q))
    }

    /// Exact mean of the raw data `X_Q` (not the reward).
    pub fn data_mean(&self, q: usize) -> f64 {
        self.distributions[q]
            .probs
            .iter()
            .zip(&self.support)
            .map(|(p, x)| p * x)
            .sum()
    }

    /// Exact variance `σ_Q²` of the raw data `X_Q`.
    pub fn data_variance(&self, q: usize) -> f64 {
        let mu = self.data_mean(q);
        self.distributions[q]
            .probs
            .iter()
            .zip(&self.support)
            .map(|(p, x)| p * (x - mu) * (x - mu))
            .sum()
    }

    /// Check every structural invariant; returns a report instead of aborting.
    pub fn validate(&self) -> ValidationReport {
        let mut violations = Vec::new();
        let l = self.n_actions();
        let k = self.n_distributions();
        let m = self.support_len();

        if l < 2 {
            violations.push(Violation {
                field: "actions".into(),
                message: format!("need at least 2 actions, got {l}"),
            });
        }
        if k < 2 {
            violations.push(Violation {
                field: "distributions".into(),
                message: format!("need at least 2 distributions, got {k}"),
            });
        }
        if m == 0 {
            violations.push(Violation {
                field: "support".into(),
                message: "support is empty".into(),
            });
        }
        for w in self.support.windows(2) {
            // NaN entries fail this check too, as they should.
            if w[1].partial_cmp(&w[0]) != Some(std::cmp::Ordering::Greater) {
                violations.push(Violation {
                    field: "support".into(),
                    message: format!("support not strictly increasing at {} .. {}", w[0], w[1]),
                });
            }
        }
        let mut seen = std::collections::HashSet::new();
        for a in &self.actions {
            if !seen.insert(a.clone()) {
                violations.push(Violation {
                    field: "actions".into(),
                    message: format!("duplicate action name {a:?}"),
                });
            }
        }
        seen.clear();
        for d in &self.distributions {
            if !seen.insert(d.name.clone()) {
                violations.push(Violation {
                    field: "distributions".into(),
                    message: format!("duplicate distribution name {:?}", d.name),
                });
            }
        }
        for (qi, d) in self.distributions.iter().enumerate() {
            if d.probs.len() != m {
                violations.push(Violation {
                    field: format!("distributions[{qi}].probs"),
                    message: format!("expected {m} entries, got {}", d.probs.len()),
                });
                continue;
            }
            if d.probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
                violations.push(Violation {
                    field: format!("distributions[{qi}].probs"),
                    message: "probabilities must be finite and nonnegative".into(),
                });
            }
            let sum: f64 = d.probs.iter().sum();
            if (sum - 1.0).abs() > GAP_TOL {
                violations.push(Violation {
                    field: format!("distributions[{qi}].probs"),
                    message: format!("probabilities sum to {sum}, expected 1 within 1e-12"),
                });
            }
        }
        if self.reward.len() != l {
            violations.push(Violation {
                field: "reward".into(),
                message: format!("expected {l} rows, got {}", self.reward.len()),
            });
        }
        for (ai, row) in self.reward.iter().enumerate() {
            if row.len() != m {
                violations.push(Violation {
                    field: format!("reward[{ai}]"),
                    message: format!("expected {m} entries, got {}", row.len()),
                });
                continue;
            }
            for (xi, r) in row.iter().enumerate() {
                if !r.is_finite() || *r < 0.0 || *r > 1.0 {
                    violations.push(Violation {
                        field: format!("reward[{ai}][{xi}]"),
                        message: format!("bounded rewards violated: {r} not in [0,1]"),
                    });
                }
            }
        }

        let (unique, issues) = if violations.is_empty() {
            let profile = self.gap_profile();
            let mut issues = Vec::new();
            if !profile.unique_a_star {
                issues.push(format!(
                    "optimal action not unique: tie set {:?}",
                    profile.a_star
                ));
            }
            for (a, uq) in profile.unique_worst_q.iter().enumerate() {
                if !uq {
                    issues.push(format!(
                        "worst-case distribution for action {:?} not unique: tie set {:?}",
                        self.actions[a], profile.worst_q[a]
                    ));
                }
            }
            (Some(issues.is_empty()), issues)
        } else {
            (None, Vec::new())
        };

        ValidationReport {
            violations,
            unique_optima_satisfied: unique,
            unique_optima_issues: issues,
        }
    }

    /// Derive every gap and complexity quantity. Assumes a valid instance
    /// (call [`Instance::validate`] first); deterministic.
    pub fn gap_profile(&self) -> GapProfile {
        let l = self.n_actions();
        let k = self.n_distributions();

        let mean: Vec<Vec<f64>> = (0..l)
            .map(|a| (0..k).map(|q| self.mean(a, q)).collect())
            .collect();

        let mu_dr: Vec<f64> = mean
            .iter()
            .map(|row| row.iter().cloned().fold(f64::INFINITY, f64::min))
            .collect();
        let mu_dr_star = mu_dr.iter().cloned().fold(f64::NEG_INFINITY, f64::max);

        let delta_dr: Vec<f64> = mu_dr.iter().map(|m| mu_dr_star - m).collect();
        let a_star: Vec<usize> = (0..l).filter(|&a| delta_dr[a] <= GAP_TOL).collect();
        let delta_dr_min = delta_dr
            .iter()
            .cloned()
            .filter(|d| *d > GAP_TOL)
            .fold(None, |acc: Option<f64>, d| {
                Some(acc.map_or(d, |m| m.min(d)))
            });

        let delta_aq: Vec<Vec<f64>> = (0..l)
            .map(|a| (0..k).map(|q| mean[a][q] - mu_dr[a]).collect())
            .collect();
        let worst_q: Vec<Vec<usize>> = (0..l)
            .map(|a| (0..k).filter(|&q| delta_aq[a][q] <= GAP_TOL).collect())
            .collect();
        let delta_a_min: Vec<Option<f64>> = (0..l)
            .map(|a| {
                delta_aq[a]
                    .iter()
                    .cloned()
                    .filter(|d| *d > GAP_TOL)
                    .fold(None, |acc: Option<f64>, d| {
                        Some(acc.map_or(d, |m| m.min(d)))
                    })
            })
            .collect();
        let h: Vec<f64> = (0..l)
            .map(|a| {
                delta_aq[a]
                    .iter()
                    .filter(|d| **d > GAP_TOL)
                    .map(|d| 1.0 / (d * d))
                    .sum()
            })
            .collect();

        let unique_a_star = a_star.len() == 1;
        let unique_worst_q: Vec<bool> = worst_q.iter().map(|s| s.len() == 1).collect();

        let c: Vec<Option<f64>> = (0..l)
            .map(|a| {
                let numerator = if a_star.contains(&a) {
                    delta_dr_min
                } else {
                    Some(delta_dr[a])
                };
                match (numerator, delta_a_min[a]) {
                    (Some(n), Some(d)) => Some(n / d),
                    _ => None,
                }
            })
            .collect();

        GapProfile {
            mean,
            mu_dr,
            mu_dr_star,
            a_star,
            unique_a_star,
            delta_dr,
            delta_dr_min,
            worst_q,
            unique_worst_q,
            delta_aq,
            delta_a_min,
            h,
            c,
        }
    }

    /// Least Lipschitz constant of each reward row restricted to the support:
    /// the maximum pairwise slope `|r_i − r_j| / (x_j − x_i)`.
    pub fn lipschitz(&self) -> LipschitzReport {
        let m = self.support_len();
        if m < 2 {
            return LipschitzReport {
                per_action: vec![0.0; self.n_actions()],
                overall: 0.0,
                degenerate_support: true,
            };
        }
        let per_action: Vec<f64> = self
            .reward
            .iter()
            .map(|row| {
                let mut best = 0.0f64;
                for i in 0..m {
                    for j in (i + 1)..m {
                        let slope = (row[j] - row[i]).abs() / (self.support[j] - self.support[i]);
                        best = best.max(slope);
                    }
                }
                best
            })
            .collect();
        let overall = per_action.iter().cloned().fold(0.0, f64::max);
        LipschitzReport {
            per_action,
            overall,
            degenerate_support: false,
        }
    }
}

/// Ready-made instances used across tests, examples and the verification
/// battery.
pub mod presets {
    use super::{Instance, NamedDistribution};

    /// The canonical small instance: two actions, two distributions over the
    /// two-point support {0, 1}. Every derived quantity is hand-checkable:
    /// means 0.44/0.56/0.42/0.58, the first action is optimal with robust
    /// value 0.44, the second trails by 0.02, and both actions have Q1 as
    /// their unique worst case.
    pub fn two_by_two() -> Instance {
        Instance {
            actions: vec!["a1".into(), "a2".into()],
            support: vec![0.0, 1.0],
            distributions: vec![
                NamedDistribution {
                    name: "Q1".into(),
                    probs: vec![0.6, 0.4],
                },
                NamedDistribution {
                    name: "Q2".into(),
                    probs: vec![0.4, 0.6],
                },
            ],
            reward: vec![vec![0.2, 0.8], vec![0.1, 0.9]],
        }
    }

    /// A two-action instance with a larger robust gap (0.08), handy for
    /// Monte Carlo sweeps where the error probability should visibly decay
    /// over a few thousand samples.
    pub fn wide_gap() -> Instance {
        Instance {
            actions: vec!["a1".into(), "a2".into()],
            support: vec![0.0, 1.0],
            distributions: vec![
                NamedDistribution {
                    name: "Q1".into(),
                    probs: vec![0.5, 0.5],
                },
                NamedDistribution {
                    name: "Q2".into(),
                    probs: vec![0.3, 0.7],
                },
            ],
            reward: vec![vec![0.1, 0.9], vec![0.56, 0.36]],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::presets::two_by_two;
    use super::*;

    fn assert_close(actual: f64, expected: f64, tol: f64) {
        assert!(
            (actual - expected).abs() <= tol,
            "expected {expected}, got {actual}"
        );
    }

    /// Independent recomputation of the profile from the raw tables, written
    /// as plainly as possible so it cannot share a bug with the production
    /// path.
    fn brute_force_check(inst: &Instance, profile: &GapProfile) {
        let l = inst.actions.len();
        let k = inst.distributions.len();
        for a in 0..l {
            for q in 0..k {
                let mut mu = 0.0;
                for (xi, _) in inst.support.iter().enumerate() {
                    mu += inst.distributions[q].probs[xi] * inst.reward[a][xi];
                }
                assert_close(profile.mean[a][q], mu, 1e-15);
            }
        }
        for a in 0..l {
            let mut min = f64::INFINITY;
            for q in 0..k {
                min = min.min(profile.mean[a][q]);
            }
            assert_close(profile.mu_dr[a], min, 0.0);
            for q in 0..k {
                assert_close(profile.delta_aq[a][q], profile.mean[a][q] - min, 0.0);
            }
        }
        let mut star = f64::NEG_INFINITY;
        for a in 0..l {
            star = star.max(profile.mu_dr[a]);
        }
        assert_close(profile.mu_dr_star, star, 0.0);
        for a in 0..l {
            assert_close(profile.delta_dr[a], star - profile.mu_dr[a], 0.0);
            let mut h = 0.0;
            for q in 0..k {
                let d = profile.delta_aq[a][q];
                if d > GAP_TOL {
                    h += 1.0 / (d * d);
                }
            }
            assert_close(profile.h[a], h, 1e-12);
        }
    }

    #[test]
    fn mean_matches_direct_expectation() {
        let inst = two_by_two();
        assert_close(inst.mean_by_name("a1", "Q1").unwrap(), 0.44, 1e-12);
        assert_close(inst.mean_by_name("a2", "Q2").unwrap(), 0.58, 1e-12);
    }

    #[test]
    fn mean_of_constant_reward_is_the_constant() {
        let mut inst = two_by_two();
        inst.reward[0] = vec![0.37, 0.37];
        assert_close(inst.mean(0, 0), 0.37, 1e-15);
        assert_close(inst.mean(0, 1), 0.37, 1e-15);
    }

    #[test]
    fn mean_unknown_identifier_is_lookup_error() {
        let inst = two_by_two();
        assert!(matches!(
            inst.mean_by_name("nope", "Q1"),
            Err(InstanceError::UnknownAction(_))
        ));
        assert!(matches!(
            inst.mean_by_name("a1", "Q9"),
            Err(InstanceError::UnknownDistribution(_))
        ));
    }

    #[test]
    fn gap_profile_two_by_two() {
        let inst = two_by_two();
        let p = inst.gap_profile();
        assert_eq!(p.a_star, vec![0]);
        assert!(p.unique_a_star);
        assert_close(p.delta_dr[1], 0.02, 1e-12);
        assert_close(p.delta_dr_min.unwrap(), 0.02, 1e-12);
        assert_eq!(p.worst_q[0], vec![0]);
        assert_eq!(p.worst_q[1], vec![0]);
        assert_close(p.delta_a_min[0].unwrap(), 0.12, 1e-12);
        assert_close(p.delta_a_min[1].unwrap(), 0.16, 1e-12);
        assert_close(p.h[0], 69.44444444444444, 1e-9);
        assert_close(p.h[1], 39.0625, 1e-9);
        assert_close(p.c[0].unwrap(), 1.0 / 6.0, 1e-12);
        assert_close(p.c[1].unwrap(), 0.125, 1e-12);
        assert!(p.unique_optima());
        brute_force_check(&inst, &p);
    }

    #[test]
    fn identical_distributions_collapse_distribution_gaps() {
        let mut inst = two_by_two();
        inst.distributions[1].probs = inst.distributions[0].probs.clone();
        let p = inst.gap_profile();
        for a in 0..2 {
            for q in 0..2 {
                assert_close(p.delta_aq[a][q], 0.0, 1e-15);
            }
            assert_close(p.h[a], 0.0, 0.0);
            assert!(!p.unique_worst_q[a]);
            assert!(p.delta_a_min[a].is_none());
        }
    }

    #[test]
    fn identical_reward_rows_make_every_action_optimal() {
        let mut inst = two_by_two();
        inst.reward[1] = inst.reward[0].clone();
        let p = inst.gap_profile();
        assert_eq!(p.a_star, vec![0, 1]);
        assert!(!p.unique_a_star);
        assert!(p.delta_dr_min.is_none());
        for a in 0..2 {
            assert_close(p.delta_dr[a], 0.0, 1e-15);
        }
    }

    #[test]
    fn per_instance_gap_minima_vanish() {
        // min_Q Δ_a(Q) = 0 per action and min_a Δ_DR(a) = 0.
        let inst = presets::wide_gap();
        let p = inst.gap_profile();
        for a in 0..inst.n_actions() {
            let min = p.delta_aq[a].iter().cloned().fold(f64::INFINITY, f64::min);
            assert_close(min, 0.0, 1e-15);
        }
        let min = p.delta_dr.iter().cloned().fold(f64::INFINITY, f64::min);
        assert_close(min, 0.0, 1e-15);
    }

    #[test]
    fn lipschitz_two_by_two() {
        let inst = two_by_two();
        let lip = inst.lipschitz();
        assert_close(lip.per_action[0], 0.6, 1e-12);
        assert_close(lip.per_action[1], 0.8, 1e-12);
        assert_close(lip.overall, 0.8, 1e-12);
        assert!(!lip.degenerate_support);
    }

    #[test]
    fn lipschitz_constant_row_is_zero_and_max_slope_wins() {
        let mut inst = two_by_two();
        inst.reward[0] = vec![0.5, 0.5];
        assert_close(inst.lipschitz().per_action[0], 0.0, 0.0);

        // Max pairwise slope is attained on an inner pair.
        let inst = Instance {
            actions: vec!["a1".into(), "a2".into()],
            support: vec![0.0, 0.5, 1.0],
            distributions: vec![
                NamedDistribution {
                    name: "Q1".into(),
                    probs: vec![0.2, 0.3, 0.5],
                },
                NamedDistribution {
                    name: "Q2".into(),
                    probs: vec![0.5, 0.3, 0.2],
                },
            ],
            reward: vec![vec![0.0, 0.4, 0.5], vec![0.1, 0.1, 0.1]],
        };
        assert_close(inst.lipschitz().per_action[0], 0.8, 1e-12);
    }

    #[test]
    fn lipschitz_single_point_support_flagged() {
        let inst = Instance {
            actions: vec!["a1".into(), "a2".into()],
            support: vec![1.0],
            distributions: vec![
                NamedDistribution {
                    name: "Q1".into(),
                    probs: vec![1.0],
                },
                NamedDistribution {
                    name: "Q2".into(),
                    probs: vec![1.0],
                },
            ],
            reward: vec![vec![0.5], vec![0.25]],
        };
        let lip = inst.lipschitz();
        assert!(lip.degenerate_support);
        assert_close(lip.overall, 0.0, 0.0);
    }

    #[test]
    fn validate_accepts_the_canonical_instance() {
        let report = two_by_two().validate();
        assert!(report.is_valid(), "{:?}", report.violations);
        assert_eq!(report.unique_optima_satisfied, Some(true));
    }

    #[test]
    fn validate_flags_bad_probability_sum() {
        let mut inst = two_by_two();
        inst.distributions[0].probs = vec![0.5, 0.4];
        let report = inst.validate();
        assert!(!report.is_valid());
        assert!(report
            .violations
            .iter()
            .any(|v| v.field == "distributions[0].probs" && v.message.contains("sum")));
    }

    #[test]
    fn validate_flags_unbounded_reward() {
        let mut inst = two_by_two();
        inst.reward[1][0] = 1.2;
        let report = inst.validate();
        assert!(!report.is_valid());
        assert!(report
            .violations
            .iter()
            .any(|v| v.field == "reward[1][0]" && v.message.contains("bounded rewards")));
    }

    #[test]
    fn validate_flags_unsorted_support_and_duplicates() {
        let mut inst = two_by_two();
        inst.support = vec![1.0, 0.0];
        inst.actions[1] = "a1".into();
        let report = inst.validate();
        assert!(report.violations.iter().any(|v| v.field == "support"));
        assert!(report
            .violations
            .iter()
            .any(|v| v.message.contains("duplicate action")));
    }

    #[test]
    fn json_round_trip_preserves_instance() {
        let inst = two_by_two();
        let s = serde_json::to_string(&inst).unwrap();
        // Field order is part of the schema.
        let a = s.find("\"actions\"").unwrap();
        let b = s.find("\"support\"").unwrap();
        let c = s.find("\"distributions\"").unwrap();
        let d = s.find("\"reward\"").unwrap();
        assert!(a < b && b < c && c < d);
        let back = Instance::from_json_str(&s).unwrap();
        assert_eq!(inst, back);
    }

    #[test]
    fn reward_shift_preserves_gaps() {
        // Adding a constant to every reward entry shifts means and robust
        // values but leaves every gap quantity unchanged.
        let inst = two_by_two();
        let p0 = inst.gap_profile();
        let shift = 0.05;
        let mut shifted = inst.clone();
        for row in &mut shifted.reward {
            for r in row.iter_mut() {
                *r += shift;
            }
        }
        let p1 = shifted.gap_profile();
        for a in 0..2 {
            assert_close(p1.mu_dr[a], p0.mu_dr[a] + shift, 1e-12);
            assert_close(p1.delta_dr[a], p0.delta_dr[a], 1e-12);
            assert_close(p1.h[a], p0.h[a], 1e-6);
            for q in 0..2 {
                assert_close(p1.delta_aq[a][q], p0.delta_aq[a][q], 1e-12);
            }
            assert_eq!(p1.worst_q[a], p0.worst_q[a]);
        }
        assert_eq!(p1.a_star, p0.a_star);
    }

    #[test]
    fn distribution_permutation_permutes_the_gap_table() {
        let inst = two_by_two();
        let p0 = inst.gap_profile();
        let mut permuted = inst.clone();
        permuted.distributions.reverse();
        let p1 = permuted.gap_profile();
        for a in 0..2 {
            assert_close(p1.delta_aq[a][0], p0.delta_aq[a][1], 1e-15);
            assert_close(p1.delta_aq[a][1], p0.delta_aq[a][0], 1e-15);
            assert_close(p1.mu_dr[a], p0.mu_dr[a], 0.0);
            assert_close(p1.h[a], p0.h[a], 1e-12);
            assert_eq!(p1.delta_a_min[a], p0.delta_a_min[a]);
        }
        assert_close(p1.mu_dr_star, p0.mu_dr_star, 0.0);
        assert_eq!(p1.delta_dr_min, p0.delta_dr_min);
    }
}
