//! The enumeration oracle versus Monte Carlo: compute the exact law of the
//! chosen action under uniform exploration, then check that a seeded
//! simulation reproduces it within three standard errors.
//!
//! ```text
//! cargo run --release --example exact_oracle
//! ```

use mdl::instance::presets;
use mdl::verify::{exact_ue_distribution, oracle_mc_agreement, DEFAULT_ENUMERATION_CAP};

fn main() {
    let inst = presets::two_by_two();
    let profile = inst.gap_profile();

    for allocation in [vec![1, 1], vec![3, 3], vec![2, 4]] {
        let law =
            exact_ue_distribution(&inst, &profile, &allocation, DEFAULT_ENUMERATION_CAP).unwrap();
        println!("allocation {allocation:?}:");
        for (a, p) in law.p_choice.iter().enumerate() {
            println!("  P(choose {}) = {p:.6}", inst.actions[a]);
        }
        println!(
            "  exact regret {:.6}, exact error probability {:.6}",
            law.regret, law.error_prob
        );

        let agreement = oracle_mc_agreement(&inst, &profile, &allocation, 100_000, 42).unwrap();
        println!(
            "  monte carlo ({} trials): error {:.6} +/- {:.6} -> within 3 se: {}",
            agreement.mc.error_prob.trials,
            agreement.mc.error_prob.mean,
            agreement.mc.error_prob.std_error,
            agreement.pass
        );
        // The regret/error sandwich delta_min * P(err) <= E[regret] <= P(err)
        // holds exactly for the oracle outputs.
        let dmin = profile.delta_dr_min.unwrap();
        assert!(dmin * law.error_prob <= law.regret + 1e-12);
        assert!(law.regret <= law.error_prob + 1e-12);
    }
}
