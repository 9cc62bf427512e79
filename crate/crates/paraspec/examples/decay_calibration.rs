//! Calibration of the envelope decay fitter on synthetic power laws.
//!
//! ```bash
//! cargo run --release -p paraspec --example decay_calibration
//! ```

use paraspec::spectral::{decay_exponent, CorrelationSeries};

fn main() {
    let times: Vec<f64> = (1..=5000).map(|i| i as f64).collect();
    println!("{:>24} {:>10} {:>20} {:>10}", "series", "beta_hat", "95% CI", "flagged");
    for (name, f) in [
        ("t^-1", Box::new(|t: f64| 1.0 / t) as Box<dyn Fn(f64) -> f64>),
        ("t^-1 (2 + sin t)", Box::new(|t: f64| (2.0 + t.sin()) / t)),
        ("t^-0.5", Box::new(|t: f64| 1.0 / t.sqrt())),
        ("flat |c| = 1", Box::new(|_| 1.0)),
    ] {
        let series = CorrelationSeries::synthetic(times.clone(), f, name);
        let fit = decay_exponent(&series).unwrap();
        println!(
            "{name:>24} {:>10.4} [{:>7.4}, {:>7.4}] {:>10}",
            fit.beta_hat, fit.ci.0, fit.ci.1, fit.unreliable
        );
    }
}
