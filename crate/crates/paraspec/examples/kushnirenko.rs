//! The sup-norm condition sup |X alpha / alpha| < 1 across perturbation
//! sizes.
//!
//! ```bash
//! cargo run --release -p paraspec --example kushnirenko
//! ```

use paraspec::observables::ObservableId;
use paraspec::time_change::{kushnirenko_verdict, normalize_alpha};

fn main() {
    println!(
        "{:>6} {:>12} {:>12} {:>10}",
        "eps", "raw sup", "inflated", "verdict"
    );
    for eps in [0.0, 0.05, 0.1, 0.2, 0.4] {
        let alpha = normalize_alpha(ObservableId::Discriminant, eps, 20_000, 11).unwrap();
        let rep = kushnirenko_verdict(&alpha, 2_000, 314).unwrap();
        println!(
            "{eps:>6.2} {:>12.6} {:>12.6} {:>10}",
            rep.raw_sup,
            rep.sup_estimate,
            if rep.pass { "PASS" } else { "FAIL" }
        );
    }
    println!("\nsup estimates are nested in the sample count: doubling samples");
    let alpha = normalize_alpha(ObservableId::Discriminant, 0.1, 20_000, 11).unwrap();
    for n in [500, 1000, 2000, 4000] {
        let rep = kushnirenko_verdict(&alpha, n, 314).unwrap();
        println!("  n = {n:>5}: sup = {:.6} (spread {:.2e})", rep.raw_sup, rep.spread);
    }
}
