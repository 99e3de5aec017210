//! Evaluate every closed-form bound on one instance: the gap-dependent and
//! distribution-free uniform-exploration bounds, the variance-sensitive
//! non-uniform bound with its `G_T` threshold, the adaptive procedure's
//! error-probability bound, and the expectation-of-maximum bounds.
//!
//! ```text
//! cargo run --example evaluate_bounds
//! ```

use mdl::algorithms::eps_schedule;
use mdl::bounds::{
    empirical_max_bounds, g_quantity, lcb_dr_error_bound_from_schedule, nue_regret_bound,
    ue_distribution_free_bound, ue_regret_bound, variance_quantities, VarianceMethod,
};
use mdl::instance::presets;

fn main() {
    let inst = presets::two_by_two();
    let profile = inst.gap_profile();
    let k = inst.n_distributions();
    let l = inst.n_actions();

    for n in [10_000u64, 200_000] {
        let report = ue_regret_bound(&profile, k, n);
        println!(
            "uniform bound at n = {n}: value {:.6e}, applicable {} {:?}",
            report.value, report.applicable, report.violated_preconditions
        );
    }

    let free = ue_distribution_free_bound(k, l, 800).unwrap();
    println!(
        "distribution-free bound at T = 800: {:.6} (simplified form {:.6})",
        free.value,
        free.intermediates["simplified_sqrt_k_log_kl_over_t"]
    );

    let allocation = [10u64, 20];
    let vq = variance_quantities(&inst, &allocation, VarianceMethod::Exact, None).unwrap();
    println!(
        "variance quantities for {allocation:?}: sigma2 {:.6}, Sigma2 {:.6}, V {:.6}",
        vq.sigma2_t, vq.big_sigma2_t.value, vq.v_t.value
    );
    let lip = inst.lipschitz().overall;
    let g = g_quantity(k, 10, lip, vq.sigma2_t.sqrt());
    let nue = nue_regret_bound(&profile, &vq, g, lip, 10);
    println!(
        "non-uniform bound: G_T = {:.4}, value {:.4}, applicable {} (premise needs the \
         minimal gap to dominate G_T)",
        g, nue.value, nue.applicable
    );

    let schedule = eps_schedule(&profile, &[0, 1]).unwrap();
    let adaptive = lcb_dr_error_bound_from_schedule(&profile, &[0, 1], &schedule).unwrap();
    println!(
        "adaptive bound at the lower-bound schedule eps = {:?}: value {:.4} (vacuous: {})",
        schedule.eps, adaptive.value, adaptive.vacuous
    );

    let (hoeffding, bernstein) = empirical_max_bounds(k, 10, Some(lip), Some(vq.sigma2_t.sqrt()));
    println!(
        "expectation-of-maximum bounds at min n = 10: {:.4} and {:.4}",
        hoeffding,
        bernstein.unwrap()
    );
}
