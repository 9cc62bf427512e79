//! The modular surface: fundamental-domain reduction and point sampling.
//!
//! A point of Gamma \ PSL(2, R) is stored as a reduced representative
//! matrix together with its upper-half-plane coordinate `z = rep * i`
//! (|Re z| <= 1/2, |z| >= 1, up to a 1e-9 tolerance band) and the
//! Iwasawa frame angle. Reduction alternates integer translations with
//! inversions, acting on the matrix from the left, and recomputes `z`
//! from the matrix at every step so the loop's decisions always agree
//! with the stored coordinate.

use crate::error::{Error, Result};
use crate::rng::Rng;
use crate::sl2::GroupElement;
use num_complex::Complex64;

/// Tolerance band for the fundamental-domain boundary predicates.
pub const BOUNDARY_TOL: f64 = 1e-9;

/// Reduction gives up after this many translate/invert steps.
pub const REDUCTION_STEP_CAP: usize = 10_000;

/// Monte Carlo cusp truncation: sampled points satisfy Im z <= Y_CAP.
pub const Y_CAP: f64 = 50.0;

const Y_MIN: f64 = 0.866_025_403_784_438_6; // sqrt(3)/2

/// Point on the modular surface: reduced representative, half-plane
/// coordinate, and K-fiber frame angle.
#[derive(Debug, Clone, Copy)]
pub struct ModularPoint {
    pub rep: GroupElement,
    pub z: Complex64,
    pub frame_angle: f64,
}

#[inline]
fn moebius_i(g: &GroupElement) -> Complex64 {
    // g * i = ((ac + bd) + i det) / (c^2 + d^2)
    let den = g.c * g.c + g.d * g.d;
    Complex64::new((g.a * g.c + g.b * g.d) / den, g.det() / den)
}

fn frame_angle_of(g: &GroupElement, z: Complex64) -> f64 {
    // k = a(y)^-1 n(x)^-1 g  should be a rotation; read its angle.
    let sy = z.im.sqrt();
    let k11 = (g.a - z.re * g.c) / sy;
    let k21 = sy * g.c;
    let theta = k21.atan2(k11);
    if theta < 0.0 {
        theta + std::f64::consts::TAU
    } else {
        theta
    }
}

impl ModularPoint {
    /// Fundamental-domain membership, with the tolerance band.
    pub fn is_reduced(z: Complex64) -> bool {
        z.im > 0.0 && z.re.abs() <= 0.5 + BOUNDARY_TOL && z.norm_sqr() >= (1.0 - BOUNDARY_TOL).powi(2)
    }

    /// Fiber-uniform point with `z` drawn from the hyperbolic measure
    /// dx dy / y^2 on the fundamental domain truncated at Im z <= Y_CAP.
    pub fn sample(rng: &mut Rng) -> ModularPoint {
        loop {
            let x = rng.uniform(-0.5, 0.5);
            // Inverse CDF for density 1/y^2 on [Y_MIN, Y_CAP].
            let u = rng.next_f64();
            let y = 1.0 / (1.0 / Y_MIN - u * (1.0 / Y_MIN - 1.0 / Y_CAP));
            if x * x + y * y < 1.0 {
                continue;
            }
            let theta = rng.uniform(0.0, std::f64::consts::TAU);
            let rep = GroupElement::from_iwasawa(x, y, theta);
            return ModularPoint {
                rep,
                z: Complex64::new(x, y),
                frame_angle: theta,
            };
        }
    }
}

/// Reduce `g` to the standard fundamental domain of SL(2, Z).
///
/// The returned representative is `gamma * g` for an integer unimodular
/// `gamma`; reducing an already reduced matrix returns it unchanged.
pub fn reduce(g: &GroupElement) -> Result<ModularPoint> {
    let mut m = *g;
    let mut z = moebius_i(&m);
    if z.im <= 0.0 || !z.im.is_finite() {
        return Err(Error::InvalidMatrix(format!("image not in upper half plane: {z}")));
    }
    let mut steps = 0usize;
    loop {
        if steps >= REDUCTION_STEP_CAP {
            return Err(Error::IterationCapExceeded { steps });
        }
        if z.re.abs() > 0.5 + BOUNDARY_TOL {
            let n = z.re.round();
            // T^{-n} from the left: row1 -= n * row2.
            m.a -= n * m.c;
            m.b -= n * m.d;
            z = moebius_i(&m);
        } else if z.norm_sqr() < (1.0 - BOUNDARY_TOL).powi(2) {
            // Inversion S = [[0, -1], [1, 0]] from the left.
            m = GroupElement {
                a: -m.c,
                b: -m.d,
                c: m.a,
                d: m.b,
            };
            z = moebius_i(&m);
        } else {
            break;
        }
        steps += 1;
    }
    Ok(ModularPoint {
        rep: m,
        z,
        frame_angle: frame_angle_of(&m, z),
    })
}

/// Left action by an integer unimodular matrix; used by invariance tests.
pub fn gamma_act(gamma: &GroupElement, p: &ModularPoint) -> GroupElement {
    gamma.mul(&p.rep)
}

/// Random element of SL(2, Z) as a bounded word in the two generators.
pub fn random_gamma(rng: &mut Rng) -> GroupElement {
    let t = GroupElement {
        a: 1.0,
        b: 1.0,
        c: 0.0,
        d: 1.0,
    };
    let t_inv = t.inverse();
    let s = GroupElement {
        a: 0.0,
        b: -1.0,
        c: 1.0,
        d: 0.0,
    };
    let mut g = GroupElement::identity();
    for _ in 0..8 {
        match rng.below(3) {
            0 => g = g.mul(&t),
            1 => g = g.mul(&t_inv),
            _ => g = g.mul(&s),
        }
    }
    g
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sl2::horocycle;

    #[test]
    fn identity_reduces_to_i() {
        let p = reduce(&GroupElement::identity()).unwrap();
        assert!((p.z - Complex64::new(0.0, 1.0)).norm() < 1e-15);
    }

    #[test]
    fn integer_translation_is_removed() {
        let g = GroupElement::from_entries(1.0, 7.0, 0.0, 1.0).unwrap();
        let p = reduce(&g).unwrap();
        assert!((p.z - Complex64::new(0.0, 1.0)).norm() < 1e-12);
    }

    #[test]
    fn irrational_horocycle_time_lands_in_domain() {
        let g = horocycle(&GroupElement::identity(), 0.3 + 2.0f64.sqrt());
        let p = reduce(&g).unwrap();
        assert!(ModularPoint::is_reduced(p.z), "z = {}", p.z);
    }

    #[test]
    fn reduction_is_idempotent() {
        let mut rng = Rng::from_seed(77);
        for _ in 0..200 {
            let g = GroupElement::from_iwasawa(
                rng.uniform(-30.0, 30.0),
                rng.uniform(0.01, 40.0),
                rng.uniform(0.0, 6.28),
            );
            let p = reduce(&g).unwrap();
            let q = reduce(&p.rep).unwrap();
            assert!((p.z - q.z).norm() < 1e-12, "{} vs {}", p.z, q.z);
        }
    }

    #[test]
    fn reduced_representative_differs_by_integer_matrix() {
        let mut rng = Rng::from_seed(13);
        for _ in 0..100 {
            let g = GroupElement::from_iwasawa(
                rng.uniform(-10.0, 10.0),
                rng.uniform(0.05, 20.0),
                rng.uniform(0.0, 6.28),
            );
            let p = reduce(&g).unwrap();
            // gamma = rep * g^{-1} must be integer and unimodular.
            let gamma = p.rep.mul(&g.inverse());
            for v in [gamma.a, gamma.b, gamma.c, gamma.d] {
                assert!((v - v.round()).abs() < 1e-7, "non-integer gamma entry {v}");
            }
            assert!((gamma.det() - 1.0).abs() < 1e-7);
        }
    }

    #[test]
    fn frame_matrix_is_orthogonal() {
        let mut rng = Rng::from_seed(19);
        for _ in 0..50 {
            let g = GroupElement::from_iwasawa(
                rng.uniform(-4.0, 4.0),
                rng.uniform(0.1, 10.0),
                rng.uniform(0.0, 6.28),
            );
            let p = reduce(&g).unwrap();
            let back = GroupElement::from_iwasawa(p.z.re, p.z.im, p.frame_angle);
            assert!(back.sub_norm(&p.rep) < 1e-9);
        }
    }

    #[test]
    fn sampled_points_satisfy_invariants() {
        let mut rng = Rng::from_seed(4);
        for _ in 0..500 {
            let p = ModularPoint::sample(&mut rng);
            assert!(ModularPoint::is_reduced(p.z));
            assert!(p.z.im <= Y_CAP);
        }
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig { cases: 128, ..ProptestConfig::default() })]

            #[test]
            fn prop_reduce_lands_in_domain_and_is_idempotent(
                x in -40.0f64..40.0,
                y in 0.01f64..40.0,
                theta in 0.0f64..6.28,
            ) {
                let g = GroupElement::from_iwasawa(x, y, theta);
                let p = reduce(&g).unwrap();
                prop_assert!(ModularPoint::is_reduced(p.z));
                let q = reduce(&p.rep).unwrap();
                prop_assert!((p.z - q.z).norm() < 1e-12);
            }
        }
    }
}
