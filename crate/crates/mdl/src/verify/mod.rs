//! Statistical validation: exact oracles, seeded Monte Carlo estimation, and
//! empirical checks of the concentration inequalities.
//!
//! Every estimator here runs trials on substreams of a master seed with a
//! fixed shard layout, so results are bit-identical regardless of how many
//! threads execute them. Tail and expectation checks use the `3·se` slack
//! rule: a check passes iff `empirical ≤ bound + 3·standard errors`, which
//! keeps the false-failure probability per check below about 0.3%.

mod exact;

pub use exact::{exact_ue_distribution, ExactLaw, DEFAULT_ENUMERATION_CAP};

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::algorithms::{
    run_lcb_dr, run_nue, run_ue, AlgorithmError, EpsSpec, LcbDrOptions, RunResult,
};
use crate::bounds::{variance_quantities, BoundsError, Estimate, VarianceMethod};
use crate::instance::{GapProfile, Instance, NamedDistribution};
use crate::sampling::{substream, Stream};
use crate::{GAP_TOL, PROTOCOL_TOL};

/// Fixed shard count for parallel Monte Carlo reductions.
const MC_SHARDS: u64 = 64;

/// Stream id reserved for auxiliary estimation (kept away from trial ids).
const AUX_STREAM: u64 = u64::MAX - 1;

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error("parameter error: {0}")]
    Parameter(String),
    #[error("oracle refused: {0}")]
    OracleRefused(String),
    #[error(transparent)]
    Algorithm(#[from] AlgorithmError),
    #[error(transparent)]
    Bounds(#[from] BoundsError),
}

/// A Monte Carlo mean with its standard error and provenance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McEstimate {
    pub mean: f64,
    /// Sample standard deviation divided by `sqrt(trials)`.
    pub std_error: f64,
    pub trials: u64,
    pub master_seed: u64,
}

/// Which algorithm a Monte Carlo experiment runs.
#[derive(Debug, Clone)]
pub enum AlgorithmSpec {
    Ue { n: u64 },
    Nue { allocation: Vec<u64> },
    LcbDr { permutation: Vec<usize>, eps: EpsSpec },
}

/// One seeded trial of a spec.
pub fn run_spec(
    inst: &Instance,
    profile: &GapProfile,
    spec: &AlgorithmSpec,
    stream: &Stream,
) -> Result<RunResult, AlgorithmError> {
    match spec {
        AlgorithmSpec::Ue { n } => run_ue(inst, *n, stream),
        AlgorithmSpec::Nue { allocation } => run_nue(inst, allocation, stream),
        AlgorithmSpec::LcbDr { permutation, eps } => {
            let options = LcbDrOptions {
                eps: eps.clone(),
                instrument: false,
            };
            run_lcb_dr(inst, profile, permutation, &options, stream)
        }
    }
}

fn shard_ranges(trials: u64) -> Vec<(u64, u64)> {
    let shards = MC_SHARDS.min(trials.max(1));
    let base = trials / shards;
    let rem = trials % shards;
    let mut out = Vec::with_capacity(shards as usize);
    let mut start = 0;
    for s in 0..shards {
        let len = base + u64::from(s < rem);
        out.push((start, start + len));
        start += len;
    }
    out
}

/// Monte Carlo simple regret and error probability.
#[derive(Debug, Clone, Serialize)]
pub struct McRegret {
    pub regret: McEstimate,
    pub error_prob: McEstimate,
    /// Mean realized total sample count (deterministic for UE/NUE, random
    /// for LCB-DR).
    pub avg_total_samples: f64,
    /// `Δ_DR,min·P̂(error) ≤ regret ≤ P̂(error)` within 3 combined standard
    /// errors.
    pub sandwich_ok: bool,
}

/// Estimate `E[Δ_DR(Aᵒ_T)]` and `P(Δ_DR(Aᵒ_T) > 0)` over independent trials
/// on substreams of `master_seed`.
pub fn mc_regret(
    inst: &Instance,
    profile: &GapProfile,
    spec: &AlgorithmSpec,
    trials: u64,
    master_seed: u64,
) -> Result<McRegret, VerifyError> {
    if trials < 2 {
        return Err(VerifyError::Parameter(
            "need at least 2 trials for a standard error".into(),
        ));
    }
    let shards: Result<Vec<(f64, f64, f64, f64)>, AlgorithmError> = shard_ranges(trials)
        .into_par_iter()
        .map(|(start, end)| {
            let mut sum_r = 0.0;
            let mut sumsq_r = 0.0;
            let mut sum_e = 0.0;
            let mut sum_t = 0.0;
            for trial in start..end {
                let res = run_spec(inst, profile, spec, &substream(master_seed, trial))?;
                let r = res.regret(profile);
                sum_r += r;
                sumsq_r += r * r;
                if r > GAP_TOL {
                    sum_e += 1.0;
                }
                sum_t += res.total_samples as f64;
            }
            Ok((sum_r, sumsq_r, sum_e, sum_t))
        })
        .collect();
    let shards = shards?;

    let n = trials as f64;
    let (mut sum_r, mut sumsq_r, mut sum_e, mut sum_t) = (0.0, 0.0, 0.0, 0.0);
    for (a, b, c, d) in shards {
        sum_r += a;
        sumsq_r += b;
        sum_e += c;
        sum_t += d;
    }
    let regret = finish_estimate(sum_r, sumsq_r, n, trials, master_seed);
    let error_prob = finish_estimate(sum_e, sum_e, n, trials, master_seed);
    let avg_total_samples = sum_t / n;

    let sandwich_ok = match profile.delta_dr_min {
        None => regret.mean == 0.0,
        Some(dmin) => {
            let combined = regret.std_error + error_prob.std_error;
            regret.mean <= error_prob.mean + 3.0 * combined + PROTOCOL_TOL
                && regret.mean
                    >= dmin * error_prob.mean
                        - 3.0 * (regret.std_error + dmin * error_prob.std_error)
                        - PROTOCOL_TOL
        }
    };

    Ok(McRegret {
        regret,
        error_prob,
        avg_total_samples,
        sandwich_ok,
    })
}

fn finish_estimate(sum: f64, sumsq: f64, n: f64, trials: u64, master_seed: u64) -> McEstimate {
    let mean = sum / n;
    let var = ((sumsq - sum * sum / n) / (n - 1.0)).max(0.0);
    McEstimate {
        mean,
        std_error: (var / n).sqrt(),
        trials,
        master_seed,
    }
}

/// Exact-oracle versus Monte Carlo comparison for one allocation.
#[derive(Debug, Clone, Serialize)]
pub struct OracleAgreement {
    pub exact_error_prob: f64,
    pub exact_regret: f64,
    pub mc: McRegret,
    pub error_prob_tol: f64,
    pub regret_tol: f64,
    pub pass: bool,
}

/// Compare the enumeration oracle with a Monte Carlo estimate at 3 exact
/// binomial/regret standard deviations.
pub fn oracle_mc_agreement(
    inst: &Instance,
    profile: &GapProfile,
    allocation: &[u64],
    trials: u64,
    master_seed: u64,
) -> Result<OracleAgreement, VerifyError> {
    let law = exact_ue_distribution(inst, profile, allocation, DEFAULT_ENUMERATION_CAP)?;
    let spec = AlgorithmSpec::Nue {
        allocation: allocation.to_vec(),
    };
    let mc = mc_regret(inst, profile, &spec, trials, master_seed)?;
    let n = trials as f64;
    // Exact and sample standard errors estimate the same spread; take the
    // larger so boundary laws (error probability near 0 or 1) stay robust.
    let exact_se = (law.error_prob * (1.0 - law.error_prob) / n).sqrt();
    let error_prob_tol = 3.0 * exact_se.max(mc.error_prob.std_error) + PROTOCOL_TOL;
    let regret_tol = 3.0 * (law.regret_sd / n.sqrt()).max(mc.regret.std_error) + PROTOCOL_TOL;
    let pass = (mc.error_prob.mean - law.error_prob).abs() <= error_prob_tol
        && (mc.regret.mean - law.regret).abs() <= regret_tol
        && mc.sandwich_ok;
    Ok(OracleAgreement {
        exact_error_prob: law.error_prob,
        exact_regret: law.regret,
        mc,
        error_prob_tol,
        regret_tol,
        pass,
    })
}

/// Empirical upper-tail check on a grid of thresholds.
#[derive(Debug, Clone, Serialize)]
pub struct TailCheck {
    pub t_grid: Vec<f64>,
    pub empirical: Vec<Estimate>,
    pub bound: Vec<f64>,
    pub pass: Vec<bool>,
}

impl TailCheck {
    pub fn all_pass(&self) -> bool {
        self.pass.iter().all(|&p| p)
    }
}

/// Simulate `Z = μᵒ(a) − μᵒ(a')` trial by trial; tails are taken around the
/// trial mean (the inequalities are stated around `E[Z]`; the bias is `O(se)`
/// and absorbed by the slack).
fn simulate_proxy_difference(
    inst: &Instance,
    a: usize,
    a_prime: usize,
    allocation: &[u64],
    trials: u64,
    master_seed: u64,
) -> Result<Vec<f64>, VerifyError> {
    let shards: Result<Vec<Vec<f64>>, AlgorithmError> = shard_ranges(trials)
        .into_par_iter()
        .map(|(start, end)| {
            let mut zs = Vec::with_capacity((end - start) as usize);
            for trial in start..end {
                let res = run_nue(inst, allocation, &substream(master_seed, trial))?;
                zs.push(res.proxy[a] - res.proxy[a_prime]);
            }
            Ok(zs)
        })
        .collect();
    Ok(shards?.into_iter().flatten().collect())
}

fn tail_check_from_samples(zs: &[f64], t_grid: &[f64], bound: impl Fn(f64) -> f64) -> TailCheck {
    let n = zs.len() as f64;
    let mean = zs.iter().sum::<f64>() / n;
    let mut empirical = Vec::with_capacity(t_grid.len());
    let mut bounds = Vec::with_capacity(t_grid.len());
    let mut pass = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        let count = zs.iter().filter(|&&z| z - mean >= t).count() as f64;
        let p = count / n;
        let se = (p * (1.0 - p) / n).sqrt();
        let b = bound(t);
        empirical.push(Estimate {
            value: p,
            std_error: se,
        });
        bounds.push(b);
        pass.push(p <= b + 3.0 * se + PROTOCOL_TOL);
    }
    TailCheck {
        t_grid: t_grid.to_vec(),
        empirical,
        bound: bounds,
        pass,
    }
}

/// Bounded-differences tail check under uniform exploration: empirical
/// `P(Z − Z̄ ≥ t)` against `exp(−n·t²/2)`.
pub fn tail_check_mcdiarmid(
    inst: &Instance,
    a: usize,
    a_prime: usize,
    n: u64,
    t_grid: &[f64],
    trials: u64,
    master_seed: u64,
) -> Result<TailCheck, VerifyError> {
    if a == a_prime {
        return Err(VerifyError::Parameter(
            "tail check needs two distinct actions".into(),
        ));
    }
    if n == 0 {
        return Err(VerifyError::Parameter("need n >= 1".into()));
    }
    let allocation = vec![n; inst.n_distributions()];
    let zs = simulate_proxy_difference(inst, a, a_prime, &allocation, trials, master_seed)?;
    Ok(tail_check_from_samples(&zs, t_grid, |t| {
        (-(n as f64) * t * t / 2.0).exp()
    }))
}

/// Variance quantities for a tail bound: exact when the state space allows,
/// seeded Monte Carlo otherwise.
fn variance_for_bound(
    inst: &Instance,
    allocation: &[u64],
    master_seed: u64,
) -> Result<crate::bounds::VarianceQuantities, BoundsError> {
    match variance_quantities(inst, allocation, VarianceMethod::Exact, None) {
        Ok(vq) => Ok(vq),
        Err(BoundsError::ExactRefused(_)) => variance_quantities(
            inst,
            allocation,
            VarianceMethod::MonteCarlo { trials: 200_000 },
            Some(&substream(master_seed, AUX_STREAM)),
        ),
        Err(e) => Err(e),
    }
}

/// The Bernstein-type tail denominator
/// `16L²(2σ_T² + Σ_T² + 6V_T) + 2·sqrt(6)·t / min_Q n_Q`.
pub fn bernstein_tail_bound(
    t: f64,
    lipschitz: f64,
    sigma2_t: f64,
    big_sigma2_t: f64,
    v_t: f64,
    min_nq: u64,
) -> f64 {
    let denom = 16.0 * lipschitz * lipschitz * (2.0 * sigma2_t + big_sigma2_t + 6.0 * v_t)
        + 2.0 * 6.0f64.sqrt() * t / min_nq as f64;
    (-t * t / denom).exp()
}

/// Variance-sensitive tail check under a non-uniform allocation, with exact
/// `σ_T²` and exact-or-Monte-Carlo `Σ_T²`, `V_T`.
pub fn tail_check_bernstein(
    inst: &Instance,
    a: usize,
    a_prime: usize,
    allocation: &[u64],
    t_grid: &[f64],
    trials: u64,
    master_seed: u64,
) -> Result<TailCheck, VerifyError> {
    if a == a_prime {
        return Err(VerifyError::Parameter(
            "tail check needs two distinct actions".into(),
        ));
    }
    let lip = inst.lipschitz();
    let lipschitz = lip.per_action[a].max(lip.per_action[a_prime]);
    let vq = variance_for_bound(inst, allocation, master_seed)?;
    let min_nq = *allocation.iter().min().unwrap();
    let zs = simulate_proxy_difference(inst, a, a_prime, allocation, trials, master_seed)?;
    Ok(tail_check_from_samples(&zs, t_grid, |t| {
        bernstein_tail_bound(
            t,
            lipschitz,
            vq.sigma2_t,
            vq.big_sigma2_t.value,
            vq.v_t.value,
            min_nq,
        )
    }))
}

/// Side-by-side bound values at an equal per-distribution sample size; no
/// pass/fail, just which is tighter at each threshold.
#[derive(Debug, Clone, Serialize)]
pub struct TailBoundComparison {
    pub t: f64,
    pub mcdiarmid: f64,
    pub bernstein: f64,
    pub tighter: String,
}

pub fn tail_bound_comparison(
    inst: &Instance,
    a: usize,
    a_prime: usize,
    n: u64,
    t_grid: &[f64],
    master_seed: u64,
) -> Result<Vec<TailBoundComparison>, VerifyError> {
    let allocation = vec![n; inst.n_distributions()];
    let lip = inst.lipschitz();
    let lipschitz = lip.per_action[a].max(lip.per_action[a_prime]);
    let vq = variance_for_bound(inst, &allocation, master_seed)?;
    Ok(t_grid
        .iter()
        .map(|&t| {
            let mcd = (-(n as f64) * t * t / 2.0).exp();
            let bern = bernstein_tail_bound(
                t,
                lipschitz,
                vq.sigma2_t,
                vq.big_sigma2_t.value,
                vq.v_t.value,
                n,
            );
            TailBoundComparison {
                t,
                mcdiarmid: mcd,
                bernstein: bern,
                tighter: if (mcd - bern).abs() <= 1e-15 {
                    "equal".into()
                } else if bern < mcd {
                    "bernstein".into()
                } else {
                    "mcdiarmid".into()
                },
            }
        })
        .collect())
}

/// Empirical check of the expectation-of-maximum bounds for one action.
#[derive(Debug, Clone, Serialize)]
pub struct ExpectationMaxCheck {
    /// Estimate of `E[max_Q |μ(a;Q) − μ̂_{n_Q}(a;Q)|]`.
    pub estimate: Estimate,
    pub bound_hoeffding: f64,
    pub bound_bernstein: f64,
    pub pass_hoeffding: bool,
    pub pass_bernstein: bool,
}

pub fn expectation_max_check(
    inst: &Instance,
    a: usize,
    allocation: &[u64],
    trials: u64,
    master_seed: u64,
) -> Result<ExpectationMaxCheck, VerifyError> {
    let k = inst.n_distributions();
    if allocation.len() != k || allocation.contains(&0) {
        return Err(VerifyError::Parameter("invalid allocation".into()));
    }
    let exact: Vec<f64> = (0..k).map(|q| inst.mean(a, q)).collect();

    let shards: Vec<(f64, f64)> = shard_ranges(trials)
        .into_par_iter()
        .map(|(start, end)| {
            let mut sum = 0.0;
            let mut sumsq = 0.0;
            for trial in start..end {
                let stream = substream(master_seed, trial);
                let mut max_dev = 0.0f64;
                for q in 0..k {
                    let mut lane = stream.lane(q as u64);
                    let mut acc = 0.0;
                    for _ in 0..allocation[q] {
                        acc += inst.reward[a][lane.draw(&inst.distributions[q].probs)];
                    }
                    let dev = (exact[q] - acc / allocation[q] as f64).abs();
                    max_dev = max_dev.max(dev);
                }
                sum += max_dev;
                sumsq += max_dev * max_dev;
            }
            (sum, sumsq)
        })
        .collect();
    let (sum, sumsq) = shards
        .into_iter()
        .fold((0.0, 0.0), |(a, b), (c, d)| (a + c, b + d));
    let n = trials as f64;
    let mean = sum / n;
    let var = ((sumsq - sum * sum / n) / (n - 1.0)).max(0.0);
    let estimate = Estimate {
        value: mean,
        std_error: (var / n).sqrt(),
    };

    let min_nq = *allocation.iter().min().unwrap();
    let sigma2_t = (0..k)
        .map(|q| inst.data_variance(q) / allocation[q] as f64)
        .fold(f64::NEG_INFINITY, f64::max);
    let (first, second) = crate::bounds::empirical_max_bounds(
        k,
        min_nq,
        Some(inst.lipschitz().overall),
        Some(sigma2_t.sqrt()),
    );
    let second = second.expect("both inputs supplied");
    Ok(ExpectationMaxCheck {
        estimate,
        bound_hoeffding: first,
        bound_bernstein: second,
        pass_hoeffding: estimate.value - 3.0 * estimate.std_error <= first + PROTOCOL_TOL,
        pass_bernstein: estimate.value - 3.0 * estimate.std_error <= second + PROTOCOL_TOL,
    })
}

/// Per-round outcome of the modified UCB-E audit over instrumented runs.
#[derive(Debug, Clone, Serialize)]
pub struct RoundAudit {
    pub action: usize,
    pub eps: f64,
    pub trials: u64,
    /// Trials on which the deviation event held.
    pub deviation_event_held: u64,
    /// Event-held trials that also satisfied the guarantee's premises on the
    /// index parameter and the budget (always the case in oracle mode; manual
    /// budgets may fall short). Conclusions are asserted on exactly these.
    pub premises_held: u64,
    /// Violated conclusions on trials where the event and premises held;
    /// empty means the guarantee held on every one of them.
    pub conclusion_failures: Vec<String>,
    pub union_event_failures: u64,
    pub union_failure_freq: f64,
    /// Hoeffding union bound `2k·u_j·exp(−2(C²∧1)ε_j/25)`, reported verbatim.
    pub union_bound: f64,
    pub union_pass: bool,
    /// Every trial ran this round with a zero budget.
    pub vacuous_no_pulls: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct AuditReport {
    pub rounds: Vec<RoundAudit>,
}

impl AuditReport {
    pub fn conclusions_all_hold(&self) -> bool {
        self.rounds.iter().all(|r| r.conclusion_failures.is_empty())
    }

    pub fn union_all_pass(&self) -> bool {
        self.rounds.iter().all(|r| r.union_pass)
    }
}

/// Audit instrumented LCB-DR runs: on trials where a round's deviation event
/// held and the premises on the index parameter and budget were satisfied,
/// assert the modified UCB-E conclusions (correct worst case identified, the
/// optimal arm's final count exceeds `(36/25)εΔ⁻²_min + 1`, every suboptimal
/// arm has at least `(4/25)εΔ⁻²(Q)` pulls, the confidence width is within
/// `Δ_min/2`, and pulls stayed inside the proxy set); and compare each
/// round's union-event failure frequency with its Hoeffding union bound.
pub fn ucbe_event_audit(
    inst: &Instance,
    profile: &GapProfile,
    runs: &[RunResult],
) -> Result<AuditReport, VerifyError> {
    let first = runs
        .first()
        .ok_or_else(|| VerifyError::Parameter("no runs supplied".into()))?;
    let rounds_per_run = first
        .rounds
        .as_ref()
        .ok_or_else(|| VerifyError::Parameter("runs carry no round records".into()))?
        .len();
    let k = inst.n_distributions();

    let mut audits = Vec::with_capacity(rounds_per_run);
    for j in 0..rounds_per_run {
        let proto = &first.rounds.as_ref().unwrap()[j];
        let action = proto.action;
        let eps = proto.eps;
        let u_j = proto.u_j;
        let q_star = profile.worst_q_lowest(action);
        let dmin = profile.delta_a_min[action].ok_or_else(|| {
            VerifyError::Parameter(format!("action {action} has no positive gap"))
        })?;
        let c = profile.c[action].unwrap_or(1.0);
        let c2 = (c * c).min(1.0);

        let mut held = 0u64;
        let mut premises_held = 0u64;
        let mut union_failures = 0u64;
        let mut failures: Vec<String> = Vec::new();
        let mut any_pulls = false;
        for (trial, run) in runs.iter().enumerate() {
            let rec = run.rounds.as_ref().and_then(|r| r.get(j)).ok_or_else(|| {
                VerifyError::Parameter(format!("trial {trial} lacks round {j}"))
            })?;
            if (rec.action, rec.eps) != (action, eps) {
                return Err(VerifyError::Parameter(
                    "runs were produced under different configurations".into(),
                ));
            }
            let events = rec.events.as_ref().ok_or_else(|| {
                VerifyError::Parameter(
                    "missing diagnostics: runs must be instrumented for the audit".into(),
                )
            })?;
            if rec.t_budget > 0 {
                any_pulls = true;
            }
            if !events.union_event_held {
                union_failures += 1;
            }
            if !events.deviation_event_held {
                continue;
            }
            held += 1;
            let budget_ok = rec.t_budget as f64 >= rec.t_real - PROTOCOL_TOL;
            let eps_ok = eps
                >= (25.0 / 36.0)
                    * dmin
                    * dmin
                    * (rec.counts_start[q_star] as f64 - 1.0)
                    - PROTOCOL_TOL;
            if !budget_ok || !eps_ok {
                continue;
            }
            premises_held += 1;

            if rec.q_hat != q_star {
                failures.push(format!(
                    "trial {trial}: identified distribution {} instead of {q_star}",
                    rec.q_hat
                ));
            }
            let n_star = rec.counts_end[q_star] as f64;
            let floor_star = 36.0 / 25.0 * eps / (dmin * dmin) + 1.0;
            if n_star <= floor_star - PROTOCOL_TOL {
                failures.push(format!(
                    "trial {trial}: optimal-arm count {n_star} not above {floor_star}"
                ));
            }
            if 0.2 * (eps / n_star).sqrt() > dmin / 2.0 + PROTOCOL_TOL {
                failures.push(format!(
                    "trial {trial}: confidence width above half the minimal gap"
                ));
            }
            for q in 0..k {
                if q == q_star {
                    continue;
                }
                let gap = profile.delta_aq[action][q];
                let floor_q = 4.0 / 25.0 * eps / (gap * gap);
                if (rec.counts_end[q] as f64) < floor_q - PROTOCOL_TOL {
                    failures.push(format!(
                        "trial {trial}: arm {q} has {} pulls, needs {floor_q}",
                        rec.counts_end[q]
                    ));
                }
            }
            if !events.pulls_contained {
                failures.push(format!(
                    "trial {trial}: pulled a distribution outside the proxy set"
                ));
            }
        }

        let n = runs.len() as f64;
        let freq = union_failures as f64 / n;
        let se = (freq * (1.0 - freq) / n).sqrt();
        let union_bound = 2.0 * k as f64 * u_j * (-2.0 * c2 * eps / 25.0).exp();
        audits.push(RoundAudit {
            action,
            eps,
            trials: runs.len() as u64,
            deviation_event_held: held,
            premises_held,
            conclusion_failures: failures,
            union_event_failures: union_failures,
            union_failure_freq: freq,
            union_bound,
            union_pass: freq <= union_bound + 3.0 * se + PROTOCOL_TOL,
            vacuous_no_pulls: !any_pulls,
        });
    }
    Ok(AuditReport { rounds: audits })
}

/// A random valid instance with `l, k ∈ {2,3}` actions/distributions and
/// `m ∈ {2,3}` support points, for oracle-agreement batteries.
pub fn random_small_instance(stream: &mut Stream) -> Instance {
    let pick = |s: &mut Stream| 2 + (s.uniform() * 2.0) as usize % 2;
    let l = pick(stream);
    let k = pick(stream);
    let m = pick(stream);

    let mut support = Vec::with_capacity(m);
    let mut x = stream.uniform() * 0.3;
    for _ in 0..m {
        support.push(x);
        x += 0.2 + 0.6 * stream.uniform();
    }

    let distributions = (0..k)
        .map(|q| {
            let raw: Vec<f64> = (0..m).map(|_| 0.05 + stream.uniform()).collect();
            let total: f64 = raw.iter().sum();
            NamedDistribution {
                name: format!("Q{}", q + 1),
                probs: raw.iter().map(|p| p / total).collect(),
            }
        })
        .collect();

    let reward = (0..l)
        .map(|_| (0..m).map(|_| stream.uniform()).collect())
        .collect();

    Instance {
        actions: (0..l).map(|a| format!("a{}", a + 1)).collect(),
        support,
        distributions,
        reward,
    }
}

/// A random allocation with every entry in `{1,2,3}` (total at most `3k`).
pub fn random_small_allocation(stream: &mut Stream, k: usize) -> Vec<u64> {
    (0..k)
        .map(|_| 1 + ((stream.uniform() * 3.0) as u64).min(2))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::presets::two_by_two;

    #[test]
    fn mc_matches_exact_on_the_single_sample_law() {
        let inst = two_by_two();
        let profile = inst.gap_profile();
        let agreement = oracle_mc_agreement(&inst, &profile, &[1, 1], 20_000, 99).unwrap();
        assert!(agreement.pass, "{agreement:?}");
        assert!((agreement.exact_error_prob - 0.24).abs() < 1e-12);
    }

    #[test]
    fn mc_regret_is_reproducible() {
        let inst = two_by_two();
        let profile = inst.gap_profile();
        let spec = AlgorithmSpec::Ue { n: 2 };
        let a = mc_regret(&inst, &profile, &spec, 5_000, 7).unwrap();
        let b = mc_regret(&inst, &profile, &spec, 5_000, 7).unwrap();
        assert_eq!(a.regret, b.regret);
        assert_eq!(a.error_prob, b.error_prob);
    }

    #[test]
    fn degenerate_instance_has_zero_standard_error() {
        let mut inst = two_by_two();
        inst.distributions[0].probs = vec![1.0, 0.0];
        inst.distributions[1].probs = vec![0.0, 1.0];
        let profile = inst.gap_profile();
        let spec = AlgorithmSpec::Ue { n: 3 };
        let mc = mc_regret(&inst, &profile, &spec, 100, 1).unwrap();
        assert_eq!(mc.regret.std_error, 0.0);
        assert_eq!(mc.error_prob.std_error, 0.0);
        assert!(mc.sandwich_ok);
    }

    #[test]
    fn mc_regret_rejects_too_few_trials() {
        let inst = two_by_two();
        let profile = inst.gap_profile();
        let spec = AlgorithmSpec::Ue { n: 1 };
        assert!(mc_regret(&inst, &profile, &spec, 1, 1).is_err());
    }

    #[test]
    fn mcdiarmid_tail_trivial_and_empty_thresholds() {
        let inst = two_by_two();
        let check =
            tail_check_mcdiarmid(&inst, 0, 1, 5, &[0.0, 5.0], 2_000, 3).unwrap();
        // t = 0: bound is 1. t = 5: no sample exceeds it, empirical tail 0.
        assert_eq!(check.bound[0], 1.0);
        assert!(check.pass[0]);
        assert_eq!(check.empirical[1].value, 0.0);
        assert!(check.all_pass());
    }

    #[test]
    fn mcdiarmid_tail_passes_on_a_moderate_grid() {
        let inst = two_by_two();
        let check = tail_check_mcdiarmid(&inst, 0, 1, 20, &[0.1, 0.2, 0.3], 20_000, 5).unwrap();
        assert!(check.all_pass(), "{check:?}");
    }

    #[test]
    fn bernstein_tail_passes_and_reports_comparison() {
        let inst = two_by_two();
        let check =
            tail_check_bernstein(&inst, 0, 1, &[10, 20], &[0.05, 0.1, 0.2], 20_000, 5).unwrap();
        assert!(check.all_pass(), "{check:?}");
        let cmp = tail_bound_comparison(&inst, 0, 1, 20, &[0.05, 0.1, 0.2], 5).unwrap();
        assert_eq!(cmp.len(), 3);
        for row in &cmp {
            assert!(row.tighter == "mcdiarmid" || row.tighter == "bernstein");
        }
    }

    #[test]
    fn expectation_max_degenerate_distributions_give_zero() {
        let mut inst = two_by_two();
        inst.distributions[0].probs = vec![1.0, 0.0];
        inst.distributions[1].probs = vec![0.0, 1.0];
        let check = expectation_max_check(&inst, 0, &[5, 5], 500, 2).unwrap();
        assert_eq!(check.estimate.value, 0.0);
        assert!(check.pass_hoeffding && check.pass_bernstein);
    }

    #[test]
    fn audit_requires_instrumented_runs() {
        let inst = two_by_two();
        let profile = inst.gap_profile();
        let run = crate::algorithms::run_lcb_dr(
            &inst,
            &profile,
            &[0, 1],
            &LcbDrOptions::default(),
            &substream(1, 0),
        )
        .unwrap();
        let err = ucbe_event_audit(&inst, &profile, &[run]).unwrap_err();
        assert!(format!("{err}").contains("missing diagnostics"));
    }

    #[test]
    fn audit_with_large_eps_sees_the_event_hold() {
        let inst = two_by_two();
        let profile = inst.gap_profile();
        let opts = LcbDrOptions {
            eps: EpsSpec::Explicit(vec![24.0, 86.0]),
            instrument: true,
        };
        let runs: Vec<_> = (0..30)
            .map(|t| {
                crate::algorithms::run_lcb_dr(&inst, &profile, &[0, 1], &opts, &substream(11, t))
                    .unwrap()
            })
            .collect();
        let report = ucbe_event_audit(&inst, &profile, &runs).unwrap();
        assert!(report.conclusions_all_hold(), "{:#?}", report.rounds);
        assert!(report.union_all_pass());
        let held: u64 = report.rounds.iter().map(|r| r.deviation_event_held).sum();
        assert!(held > 0, "expected some event-held trials");
    }

    #[test]
    fn audit_notes_zero_budget_rounds_as_vacuous() {
        let inst = two_by_two();
        let profile = inst.gap_profile();
        let runs: Vec<_> = (0..20)
            .map(|t| {
                crate::algorithms::run_lcb_dr_manual(
                    &inst,
                    &profile,
                    &[0, 1],
                    &[0.01, 0.089],
                    &[0, 0],
                    true,
                    &substream(3, t),
                )
                .unwrap()
            })
            .collect();
        let report = ucbe_event_audit(&inst, &profile, &runs).unwrap();
        for r in &report.rounds {
            assert!(r.vacuous_no_pulls);
            // Undersized budgets void the premises, so no conclusions are
            // asserted even on event-held trials.
            assert_eq!(r.premises_held, 0);
            assert!(r.conclusion_failures.is_empty());
        }
    }

    #[test]
    fn random_instances_are_valid() {
        let mut stream = substream(123, 0);
        for _ in 0..50 {
            let inst = random_small_instance(&mut stream);
            let report = inst.validate();
            assert!(report.is_valid(), "{:?}", report.violations);
            let alloc = random_small_allocation(&mut stream, inst.n_distributions());
            assert!(alloc.iter().all(|&n| (1..=3).contains(&n)));
        }
    }
}
