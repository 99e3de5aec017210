//! Anatomy of one adaptive run: the index-parameter schedule and its lower
//! bounds, per-round proxy sets and budgets, and the post-hoc audit of the
//! modified UCB-E guarantee over many instrumented runs.
//!
//! ```text
//! cargo run --release --example lcb_dr_walkthrough
//! ```

use mdl::algorithms::{eps_schedule, resolve_eps, run_lcb_dr, EpsSpec, LcbDrOptions};
use mdl::bounds::lcb_dr_error_bound_from_schedule;
use mdl::instance::presets;
use mdl::sampling::substream;
use mdl::verify::ucbe_event_audit;

fn main() {
    let inst = presets::two_by_two();
    let profile = inst.gap_profile();
    let permutation = [0usize, 1];

    let auto = eps_schedule(&profile, &permutation).unwrap();
    println!(
        "lower-bound schedule: eps = {:?}, horizons u = {:?}",
        auto.eps, auto.u
    );
    let schedule = resolve_eps(&profile, &permutation, &EpsSpec::Scaled(400.0)).unwrap();
    println!(
        "scaled x400: eps = {:?}, horizons u = {:?}",
        schedule.eps, schedule.u
    );
    let bound = lcb_dr_error_bound_from_schedule(&profile, &permutation, &schedule).unwrap();
    println!(
        "error-probability bound at this schedule: {:.4e} (vacuous: {})",
        bound.value, bound.vacuous
    );

    let options = LcbDrOptions {
        eps: EpsSpec::Explicit(vec![24.0, 86.0]),
        instrument: true,
    };
    let one = run_lcb_dr(&inst, &profile, &permutation, &options, &substream(1, 0)).unwrap();
    println!("\none instrumented run (eps 24, 86):");
    for r in one.rounds.as_ref().unwrap() {
        println!(
            "  round on {}: proxy set {:?}, carried-over samples {}, budget {} \
             (formula value {:.2}), identified {}",
            inst.actions[r.action],
            r.proxy_set,
            r.t_tilde,
            r.t_budget,
            r.t_real,
            inst.distributions[r.q_hat].name
        );
        let ev = r.events.as_ref().unwrap();
        println!(
            "    deviation event held: {}, pulls stayed in the proxy set: {}",
            ev.deviation_event_held, ev.pulls_contained
        );
    }
    println!(
        "  chose {} after {} total samples",
        inst.actions[one.chosen], one.total_samples
    );

    let runs: Vec<_> = (0..300)
        .map(|t| run_lcb_dr(&inst, &profile, &permutation, &options, &substream(1, t)).unwrap())
        .collect();
    let audit = ucbe_event_audit(&inst, &profile, &runs).unwrap();
    println!("\naudit over {} instrumented runs:", runs.len());
    for r in &audit.rounds {
        println!(
            "  round on {}: event held on {}/{} trials, guarantee violations: {}, \
             union-event failure rate {:.4} vs bound {:.3e}",
            inst.actions[r.action],
            r.deviation_event_held,
            r.trials,
            r.conclusion_failures.len(),
            r.union_failure_freq,
            r.union_bound
        );
    }
    assert!(audit.conclusions_all_hold());
}
