//! Fundamental-domain reduction and the invariant observable.
//!
//! ```bash
//! cargo run --release -p paraspec --example fundamental_domain
//! ```

use paraspec::modular::{gamma_act, random_gamma, reduce, ModularPoint};
use paraspec::observables::{
    discriminant_normalizer, eval_invariant_observable,
};
use paraspec::rng::Rng;
use paraspec::sl2::{horocycle, GroupElement};

fn main() {
    // Walk a long horocycle segment and reduce each point.
    println!("reduced horocycle orbit h_t(i):");
    println!("  {:>8} {:>22} {:>10}", "t", "z", "u(z)");
    let id = GroupElement::identity();
    for i in 0..8 {
        let t = 0.3 + 2.0f64.sqrt() * i as f64;
        let p = reduce(&horocycle(&id, t)).unwrap();
        let u = eval_invariant_observable("discriminant", &p).unwrap();
        println!("  {t:>8.3} {:>10.5} + {:.5}i {u:>10.6}", p.z.re, p.z.im);
        assert!(ModularPoint::is_reduced(p.z));
    }

    println!("\ndiscriminant observable normalizer u_max = {:.6}", discriminant_normalizer());

    // Invariance under a crowd of integer unimodular matrices.
    let mut rng = Rng::from_seed(2);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let p = ModularPoint::sample(&mut rng);
        let up = eval_invariant_observable("discriminant", &p).unwrap();
        for _ in 0..100 {
            let q = reduce(&gamma_act(&random_gamma(&mut rng), &p)).unwrap();
            let uq = eval_invariant_observable("discriminant", &q).unwrap();
            worst = worst.max((up - uq).abs());
        }
    }
    println!("worst invariance defect over 10^4 moved points: {worst:.2e}");

    // Cusp decay.
    let high = reduce(&GroupElement::from_iwasawa(0.1, 20.0, 0.0)).unwrap();
    println!(
        "u at Im z = 20 (deep in the cusp): {:.3e}",
        eval_invariant_observable("discriminant", &high).unwrap()
    );
}
