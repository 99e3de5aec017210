//! Empirical verification of the concentration machinery: upper-tail checks
//! of the bounded-differences and variance-sensitive inequalities for the
//! proxy difference `Z = mu_o(a) - mu_o(a')`, the expectation-of-maximum
//! check, and a side-by-side comparison of the two tail bounds.
//!
//! ```text
//! cargo run --release --example concentration_checks
//! ```

use mdl::instance::presets;
use mdl::verify::{
    expectation_max_check, tail_bound_comparison, tail_check_bernstein, tail_check_mcdiarmid,
};

fn main() {
    let inst = presets::two_by_two();
    let grid = [0.05, 0.1, 0.15, 0.2, 0.25, 0.3];
    let trials = 100_000;

    let mcd = tail_check_mcdiarmid(&inst, 0, 1, 20, &grid, trials, 1).unwrap();
    println!("bounded-differences tail at n = 20 per distribution:");
    for (i, t) in mcd.t_grid.iter().enumerate() {
        println!(
            "  t = {t:.2}: empirical {:.5} +/- {:.5} vs bound {:.5} -> {}",
            mcd.empirical[i].value,
            mcd.empirical[i].std_error,
            mcd.bound[i],
            if mcd.pass[i] { "ok" } else { "FAIL" }
        );
    }

    let bern = tail_check_bernstein(&inst, 0, 1, &[10, 20], &grid, trials, 2).unwrap();
    println!("\nvariance-sensitive tail at allocation (10, 20):");
    for (i, t) in bern.t_grid.iter().enumerate() {
        println!(
            "  t = {t:.2}: empirical {:.5} vs bound {:.5} -> {}",
            bern.empirical[i].value,
            bern.bound[i],
            if bern.pass[i] { "ok" } else { "FAIL" }
        );
    }

    for allocation in [[10u64, 10], [10, 20]] {
        let check = expectation_max_check(&inst, 0, &allocation, trials, 3).unwrap();
        println!(
            "\nexpectation of the max deviation at {allocation:?}: {:.5} +/- {:.5}\n  \
             bounds {:.5} (Hoeffding-type) and {:.5} (variance-sensitive) -> ok: {}",
            check.estimate.value,
            check.estimate.std_error,
            check.bound_hoeffding,
            check.bound_bernstein,
            check.pass_hoeffding && check.pass_bernstein
        );
    }

    println!("\nwhich tail bound is tighter at equal n = 20?");
    for row in tail_bound_comparison(&inst, 0, 1, 20, &grid, 4).unwrap() {
        println!(
            "  t = {:.2}: bounded-differences {:.5}, variance-sensitive {:.5} -> {}",
            row.t, row.mcdiarmid, row.bernstein, row.tighter
        );
    }
}
