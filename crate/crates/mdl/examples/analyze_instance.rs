//! Validate an instance and walk through every derived quantity: means,
//! robust values, both gap families, the complexity measures `H_a` and
//! `C_a`, and the Lipschitz constants.
//!
//! ```text
//! cargo run --example analyze_instance [path/to/instance.json]
//! ```

use mdl::instance::{presets, Instance};

fn main() {
    let inst = match std::env::args().nth(1) {
        Some(path) => {
            let text = std::fs::read_to_string(&path).expect("read instance file");
            Instance::from_json_str(&text).expect("parse instance JSON")
        }
        None => presets::two_by_two(),
    };

    let report = inst.validate();
    if !report.is_valid() {
        eprintln!("instance is invalid:");
        for v in &report.violations {
            eprintln!("  {}: {}", v.field, v.message);
        }
        std::process::exit(2);
    }
    println!(
        "instance: {} actions x {} distributions over {} support points",
        inst.n_actions(),
        inst.n_distributions(),
        inst.support_len()
    );
    println!(
        "unique optima (needed by the adaptive algorithm): {:?}",
        report.unique_optima_satisfied
    );

    let p = inst.gap_profile();
    println!("\nmeans mu(a;Q):");
    for (a, name) in inst.actions.iter().enumerate() {
        let row: Vec<String> = (0..inst.n_distributions())
            .map(|q| format!("{:.4}", p.mean[a][q]))
            .collect();
        println!(
            "  {name}: [{}]  robust value {:.4}  gap {:.4}",
            row.join(", "),
            p.mu_dr[a],
            p.delta_dr[a]
        );
    }
    println!(
        "\noptimal action(s): {:?}   minimal positive gap: {:?}",
        p.a_star
            .iter()
            .map(|&a| inst.actions[a].as_str())
            .collect::<Vec<_>>(),
        p.delta_dr_min
    );
    for (a, name) in inst.actions.iter().enumerate() {
        println!(
            "  {name}: worst case {:?}, delta_a_min {:?}, H = {:.4}, C = {:?}",
            p.worst_q[a]
                .iter()
                .map(|&q| inst.distributions[q].name.as_str())
                .collect::<Vec<_>>(),
            p.delta_a_min[a],
            p.h[a],
            p.c[a]
        );
    }

    let lip = inst.lipschitz();
    println!(
        "\nLipschitz constants: per action {:?}, overall {:.4}",
        lip.per_action, lip.overall
    );
}
