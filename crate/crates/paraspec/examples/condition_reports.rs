//! Condition reports for a Furstenberg transformation and a skew
//! product: the three hypotheses of the abstract criterion as sup-norm
//! estimates.
//!
//! ```bash
//! cargo run --release -p paraspec --example condition_reports
//! ```

use paraspec::conditions::{condition_report, log_steps, ConditionSystem};
use paraspec::torus::{FourierObservable, FurstenbergSpec, SkewProductSpec, GOLDEN_ROTATION};

fn main() {
    // Affine Furstenberg system: every multiplier field vanishes.
    let fur = FurstenbergSpec::dim2(GOLDEN_ROTATION, 1, FourierObservable::zero(1), 1).unwrap();
    let report = condition_report(
        &ConditionSystem::Furstenberg(&fur),
        &log_steps(10, 4096, 4),
        32,
        20260808,
    )
    .unwrap();
    println!("== {}", report.system);
    println!(
        "  (i)   estimate {:.3e}  -> {:?}",
        report.condition_i.estimate, report.condition_i.verdict
    );
    println!(
        "  (ii)  estimate {:.3e}  -> {:?}",
        report.condition_ii.estimate, report.condition_ii.verdict
    );
    println!(
        "  (iii) estimate {:.3e} (exactly zero: {}) -> {:?}",
        report.condition_iii.estimate,
        report.condition_iii.estimate == 0.0,
        report.condition_iii.verdict
    );
    println!("  overall: {}", report.overall);

    // Skew product with a zero-mean trig-polynomial eta.
    let eta = FourierObservable::cosine(1, vec![1], 0.05);
    let skew = SkewProductSpec::new(GOLDEN_ROTATION, 1, eta, 1).unwrap();
    let report = condition_report(
        &ConditionSystem::Skew(&skew),
        &log_steps(10, 10_000, 4),
        32,
        20260808,
    )
    .unwrap();
    println!("\n== {}", report.system);
    println!("  per-step sup of the condition (i) multiplier:");
    let p = &report.condition_i.profile;
    for (t, s) in p.times.iter().zip(&p.multiplier_sup).step_by(4) {
        println!("    n = {t:>7.0}: {s:.3e}");
    }
    println!(
        "  (i)   tail estimate {:.3e} -> {:?}",
        report.condition_i.estimate, report.condition_i.verdict
    );
    println!(
        "  (ii)  estimate {:.3e} (analytic bound {:.3e}) -> {:?}",
        report.condition_ii.estimate,
        report.condition_ii.analytic_bound.unwrap(),
        report.condition_ii.verdict
    );
    println!(
        "  (iii) estimate {:.3e} -> {:?}",
        report.condition_iii.estimate, report.condition_iii.verdict
    );
    println!("  overall: {}", report.overall);
    println!("\nfull JSON:\n{}", serde_json::to_string_pretty(&report).unwrap());
}
