//! The reparametrized horocycle flow and its Birkhoff integral.
//!
//! The orbit-average of the multiplier field converges to -1; this is
//! the ergodic limit that powers the unique-ergodicity route of the
//! spectral criterion.
//!
//! ```bash
//! cargo run --release -p paraspec --example time_change_flow
//! ```

use paraspec::modular::ModularPoint;
use paraspec::numerics::batch_mean_stderr;
use paraspec::observables::ObservableId;
use paraspec::rng::{Rng, StreamId};
use paraspec::time_change::{g_of_t, normalize_alpha, time_changed_flow};

fn main() {
    let alpha = normalize_alpha(ObservableId::Discriminant, 0.1, 20_000, 7).unwrap();
    println!(
        "alpha = c (1 + eps u): eps = {}, c = {:.8} (mean_u stderr {:.1e})",
        alpha.epsilon, alpha.c, alpha.normalization.stderr_mean_u
    );
    println!("positivity margin: {:.3}", alpha.positivity_margin);

    // Flow composition sanity.
    let mut rng = Rng::for_sample(7, StreamId::OrbitInit, 1);
    let x = ModularPoint::sample(&mut rng);
    let one = time_changed_flow(&x, 50.0, &alpha).unwrap();
    let two = time_changed_flow(&time_changed_flow(&x, 20.0, &alpha).unwrap(), 30.0, &alpha).unwrap();
    println!(
        "flow composition residual at t = 20 + 30: {:.2e}",
        (one.z - two.z).norm()
    );

    // G(alpha, t) / t across sample points and horizons.
    println!("\nG(alpha, t)/t -> -1:");
    println!("  {:>6} {:>12} {:>12}", "t", "mean", "stderr");
    for t in [25.0, 100.0, 400.0] {
        let vals: Vec<f64> = (0..48)
            .map(|i| {
                let mut rng = Rng::for_sample(7, StreamId::Correlation, i);
                let x = ModularPoint::sample(&mut rng);
                g_of_t(&x, t, &alpha).unwrap() / t
            })
            .collect();
        let (mean, se) = batch_mean_stderr(&vals);
        println!("  {t:>6.0} {mean:>12.6} {se:>12.2e}");
    }
}
