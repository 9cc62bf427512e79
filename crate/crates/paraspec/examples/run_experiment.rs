//! End-to-end experiment run through the orchestration layer:
//! simulate -> correlate -> spectrum -> conditions -> report.
//!
//! ```bash
//! cargo run --release -p paraspec --example run_experiment
//! ```

use paraspec::config::ExperimentConfig;
use paraspec::experiment::{
    cmd_conditions, cmd_correlate, cmd_report, cmd_simulate, cmd_spectrum, RunContext,
};

fn main() {
    let text = std::fs::read_to_string(
        std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/skew_smoke.cfg"),
    )
    .expect("shipped config exists");
    let config = ExperimentConfig::parse(&text).expect("shipped config parses");
    println!("config hash: {}", config.hash());

    let out = std::env::temp_dir().join("paraspec-example-run");
    let _ = std::fs::remove_dir_all(&out);
    let ctx = RunContext::new(config, 2, out.clone());

    for (name, written) in [
        ("simulate", cmd_simulate(&ctx).unwrap()),
        ("correlate", cmd_correlate(&ctx).unwrap()),
        ("spectrum", cmd_spectrum(&ctx).unwrap()),
        ("conditions", cmd_conditions(&ctx).unwrap()),
    ] {
        println!("{name}:");
        for p in written {
            println!("  wrote {}", p.display());
        }
    }

    println!("\n{}", cmd_report(&out).unwrap());
}
