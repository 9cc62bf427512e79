//! Matrix flows on SL(2, R): group laws and the scaling identity.
//!
//! ```bash
//! cargo run --release -p paraspec --example geodesic_horocycle
//! ```

use paraspec::rng::{Rng, StreamId};
use paraspec::sl2::{
    geodesic, horocycle, opposite_horocycle, renormalization_residual, GroupElement,
    GEODESIC_SCALING_SIGN,
};

fn main() {
    let id = GroupElement::identity();

    println!("closed forms:");
    let g = geodesic(&id, 2.0 * (2.0f64).ln()).unwrap();
    println!("  geodesic(2 ln 2)      = [[{:.3}, {:.3}], [{:.3}, {:.3}]]", g.a, g.b, g.c, g.d);
    let h = horocycle(&id, 3.0);
    println!("  horocycle(3)          = [[{:.3}, {:.3}], [{:.3}, {:.3}]]", h.a, h.b, h.c, h.d);
    let v = opposite_horocycle(&id, 3.0);
    println!("  opposite_horocycle(3) = [[{:.3}, {:.3}], [{:.3}, {:.3}]]", v.a, v.b, v.c, v.d);

    // Group-law residuals over random elements.
    let mut rng = Rng::for_sample(1, StreamId::OrbitInit, 0);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let g = GroupElement::from_iwasawa(
            rng.uniform(-2.0, 2.0),
            rng.uniform(0.2, 5.0),
            rng.uniform(0.0, std::f64::consts::TAU),
        );
        let (s, s2) = (rng.uniform(-3.0, 3.0), rng.uniform(-3.0, 3.0));
        let two = geodesic(&geodesic(&g, s).unwrap(), s2).unwrap();
        let one = geodesic(&g, s + s2).unwrap();
        worst = worst.max(two.sub_norm(&one));
    }
    println!("\ngeodesic group-law residual over 1000 draws: {worst:.2e}");

    println!("\nscaling identity a(-s) u(t) a(s) = u(t e^({GEODESIC_SCALING_SIGN} s)):");
    println!("  {:>6} {:>8} {:>12}", "s", "t", "residual");
    for (s, t) in [(0.0, 7.0), (1.0, 1.0), (-2.0, 5.0), (3.0, -8.0)] {
        println!("  {s:>6.1} {t:>8.1} {:>12.2e}", renormalization_residual(s, t));
    }

    // Determinant drift under a long alternating product.
    let mut g = GroupElement::from_iwasawa(0.3, 1.7, 0.4);
    for i in 0..1_000_000u32 {
        g = if i % 2 == 0 {
            geodesic(&g, 0.013).unwrap()
        } else {
            horocycle(&g, -0.021)
        };
        if g.norm() > 1e6 {
            g = GroupElement::from_iwasawa(0.3, 1.7, 0.4);
        }
    }
    println!("\n|det - 1| after 1e6 alternating steps: {:.2e}", (g.det() - 1.0).abs());
}
