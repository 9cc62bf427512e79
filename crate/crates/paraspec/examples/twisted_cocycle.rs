//! The circle extension: fiber advance, cocycle additivity, and exact
//! phase factorization of the twisted correlation at unit speed.
//!
//! ```bash
//! cargo run --release -p paraspec --example twisted_cocycle
//! ```

use paraspec::modular::ModularPoint;
use paraspec::observables::ObservableId;
use paraspec::rng::Rng;
use paraspec::spectral::{correlation_flow, FlowSystem};
use paraspec::time_change::normalize_alpha;
use paraspec::twisted::{cocycle_a, twisted_flow, TwistedPoint};

fn main() {
    let alpha = normalize_alpha(ObservableId::Discriminant, 0.1, 20_000, 5).unwrap();
    let mut rng = Rng::from_seed(9);

    // Cocycle additivity a(x, t + t') = a(x, t) + a(h_t x, t').
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let x = ModularPoint::sample(&mut rng);
        let (t, t2) = (rng.uniform(0.5, 10.0), rng.uniform(0.5, 10.0));
        let whole = cocycle_a(&x, t + t2, &alpha).unwrap();
        let part1 = cocycle_a(&x, t, &alpha).unwrap();
        let moved = paraspec::modular::reduce(&paraspec::sl2::horocycle(&x.rep, t)).unwrap();
        let part2 = cocycle_a(&moved, t2, &alpha).unwrap();
        worst = worst.max((whole - part1 - part2).abs());
    }
    println!("cocycle additivity residual over 100 triples: {worst:.2e}");

    // Twisted flow group law.
    let p = TwistedPoint::new(ModularPoint::sample(&mut rng), 0.2);
    let one = twisted_flow(&p, 9.0, &alpha).unwrap();
    let two = twisted_flow(&twisted_flow(&p, 4.0, &alpha).unwrap(), 5.0, &alpha).unwrap();
    let dtheta = {
        let d = (one.theta - two.theta).rem_euclid(1.0);
        d.min(1.0 - d)
    };
    println!("twisted flow group-law theta residual: {dtheta:.2e}");

    // At unit speed the theta phase factors exactly out of the
    // correlation: c_twisted(t) = e^{2 pi i n t} c_base(t).
    let unit = normalize_alpha(ObservableId::Discriminant, 0.0, 0, 1).unwrap();
    let twisted = FlowSystem::Twisted {
        alpha: &unit,
        theta_mode: 1,
    };
    let base = FlowSystem::TimeChange(&unit);
    let a = correlation_flow(&twisted, ObservableId::Discriminant, 4.0, 0.5, 64, 3, 2).unwrap();
    let b = correlation_flow(&base, ObservableId::Discriminant, 4.0, 0.5, 64, 3, 2).unwrap();
    println!("\nphase factorization at alpha = 1:");
    println!("  {:>5} {:>24} {:>24}", "t", "twisted", "e^(2 pi i t) * base");
    for j in [2usize, 4, 8] {
        let t = a.times[j];
        let phase = num_complex::Complex64::from_polar(1.0, std::f64::consts::TAU * t);
        let rhs = phase * b.values[j];
        println!(
            "  {t:>5.1} {:>11.6}+{:.6}i {:>11.6}+{:.6}i",
            a.values[j].re, a.values[j].im, rhs.re, rhs.im,
        );
    }
}
