//! Exact matrix dynamics on SL(2, R).
//!
//! The three one-parameter subgroups used everywhere downstream:
//!
//! ```text
//! geodesic(s)            = diag(e^{s/2}, e^{-s/2})
//! horocycle(t)           = [[1, t], [0, 1]]        (upper triangular)
//! opposite_horocycle(r)  = [[1, 0], [r, 1]]        (lower triangular)
//! ```
//!
//! Determinant drift is renormalized away whenever it exceeds 1e-12, so
//! |det - 1| stays below 1e-9 over millions of alternating steps.

use crate::error::{Error, Result};

/// Largest geodesic time accepted in a single call (e^{25} per entry).
pub const MAX_GEODESIC_TIME: f64 = 50.0;

/// Determinant drift at which a matrix is rescaled back to det = 1.
const DET_RENORM_THRESHOLD: f64 = 1e-12;

/// Sign of the exponent in the geodesic/horocycle scaling identity for
/// this basis: conjugation satisfies
/// `geodesic(-s) * horocycle(t) * geodesic(s) = horocycle(t * e^{-s})`.
/// Fixed once against the direct 2x2 multiplication oracle in the tests.
pub const GEODESIC_SCALING_SIGN: f64 = -1.0;

/// Unit-determinant 2x2 real matrix [[a, b], [c, d]].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroupElement {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl GroupElement {
    pub fn identity() -> Self {
        GroupElement {
            a: 1.0,
            b: 0.0,
            c: 0.0,
            d: 1.0,
        }
    }

    /// Build from entries, renormalizing the determinant to 1.
    /// Rejects non-finite entries and determinants far from 1.
    pub fn from_entries(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        let det = a * d - b * c;
        if !det.is_finite() {
            return Err(Error::InvalidMatrix("non-finite entries".into()));
        }
        if det <= 0.0 || (det - 1.0).abs() > 1e-6 {
            return Err(Error::InvalidMatrix(format!("determinant {det} not near 1")));
        }
        let mut g = GroupElement { a, b, c, d };
        g.renormalize();
        Ok(g)
    }

    /// Iwasawa composition: translation by `x`, dilation to height `y`,
    /// frame rotation by `theta`. Always unit determinant.
    pub fn from_iwasawa(x: f64, y: f64, theta: f64) -> Self {
        assert!(y > 0.0, "Iwasawa height must be positive");
        let sy = y.sqrt();
        let (sin, cos) = theta.sin_cos();
        // [[1, x], [0, 1]] * [[sy, 0], [0, 1/sy]] * [[cos, -sin], [sin, cos]]
        let mut g = GroupElement {
            a: sy * cos + x / sy * sin,
            b: -sy * sin + x / sy * cos,
            c: sin / sy,
            d: cos / sy,
        };
        g.renormalize();
        g
    }

    #[inline]
    pub fn det(&self) -> f64 {
        self.a * self.d - self.b * self.c
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        (self.a * self.a + self.b * self.b + self.c * self.c + self.d * self.d).sqrt()
    }

    #[inline]
    pub fn mul(&self, rhs: &GroupElement) -> GroupElement {
        let mut g = GroupElement {
            a: self.a * rhs.a + self.b * rhs.c,
            b: self.a * rhs.b + self.b * rhs.d,
            c: self.c * rhs.a + self.d * rhs.c,
            d: self.c * rhs.b + self.d * rhs.d,
        };
        g.renormalize();
        g
    }

    pub fn inverse(&self) -> GroupElement {
        let mut g = GroupElement {
            a: self.d,
            b: -self.b,
            c: -self.c,
            d: self.a,
        };
        g.renormalize();
        g
    }

    /// Rescale to unit determinant when drift exceeds the threshold.
    #[inline]
    pub fn renormalize(&mut self) {
        let det = self.det();
        if (det - 1.0).abs() > DET_RENORM_THRESHOLD && det > 0.0 {
            let s = 1.0 / det.sqrt();
            self.a *= s;
            self.b *= s;
            self.c *= s;
            self.d *= s;
        }
    }

    pub fn sub_norm(&self, rhs: &GroupElement) -> f64 {
        ((self.a - rhs.a).powi(2)
            + (self.b - rhs.b).powi(2)
            + (self.c - rhs.c).powi(2)
            + (self.d - rhs.d).powi(2))
        .sqrt()
    }
}

/// Geodesic flow: `g * diag(e^{s/2}, e^{-s/2})`.
pub fn geodesic(g: &GroupElement, s: f64) -> Result<GroupElement> {
    if s.abs() > MAX_GEODESIC_TIME {
        return Err(Error::ParameterOutOfRange(format!(
            "geodesic time |{s}| > {MAX_GEODESIC_TIME}"
        )));
    }
    let e = (0.5 * s).exp();
    let mut out = GroupElement {
        a: g.a * e,
        b: g.b / e,
        c: g.c * e,
        d: g.d / e,
    };
    out.renormalize();
    Ok(out)
}

/// Positive horocycle flow: `g * [[1, t], [0, 1]]`.
pub fn horocycle(g: &GroupElement, t: f64) -> GroupElement {
    let mut out = GroupElement {
        a: g.a,
        b: g.a * t + g.b,
        c: g.c,
        d: g.c * t + g.d,
    };
    out.renormalize();
    out
}

/// Negative (opposite) horocycle flow: `g * [[1, 0], [r, 1]]`.
pub fn opposite_horocycle(g: &GroupElement, r: f64) -> GroupElement {
    let mut out = GroupElement {
        a: g.a + g.b * r,
        b: g.b,
        c: g.c + g.d * r,
        d: g.d,
    };
    out.renormalize();
    out
}

/// Residual of the geodesic/horocycle scaling identity:
/// `|geodesic(-s) * horocycle(t) * geodesic(s) - horocycle(t e^{sign*s})|`.
pub fn renormalization_residual(s: f64, t: f64) -> f64 {
    assert!(s.abs() <= 10.0, "renormalization residual needs |s| <= 10");
    assert!(t.abs() <= 1e3, "renormalization residual needs |t| <= 1e3");
    let id = GroupElement::identity();
    let lhs = geodesic(&id, -s)
        .and_then(|g| Ok(horocycle(&g, t)))
        .and_then(|g| {
            let e = (0.5 * s).exp();
            // Right-multiply by geodesic(s) without the renormalizing ctor
            // so the residual reflects the raw product.
            Ok(GroupElement {
                a: g.a * e,
                b: g.b / e,
                c: g.c * e,
                d: g.d / e,
            })
        })
        .expect("|s| <= 10 is within the geodesic guard");
    let rhs = horocycle(&id, t * (GEODESIC_SCALING_SIGN * s).exp());
    lhs.sub_norm(&rhs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{Rng, StreamId};

    fn random_element(rng: &mut Rng) -> GroupElement {
        GroupElement::from_iwasawa(
            rng.uniform(-2.0, 2.0),
            rng.uniform(0.2, 5.0),
            rng.uniform(0.0, std::f64::consts::TAU),
        )
    }

    #[test]
    fn zero_time_flows_are_identity() {
        let id = GroupElement::identity();
        assert_eq!(geodesic(&id, 0.0).unwrap(), id);
        assert_eq!(horocycle(&id, 0.0), id);
        assert_eq!(opposite_horocycle(&id, 0.0), id);
    }

    #[test]
    fn geodesic_closed_form() {
        let g = geodesic(&GroupElement::identity(), 2.0 * (2.0f64).ln()).unwrap();
        assert!((g.a - 2.0).abs() < 1e-15);
        assert!((g.d - 0.5).abs() < 1e-15);
        assert!(g.b.abs() < 1e-15 && g.c.abs() < 1e-15);
    }

    #[test]
    fn horocycle_closed_form() {
        let g = horocycle(&GroupElement::identity(), 3.0);
        assert_eq!((g.a, g.b, g.c, g.d), (1.0, 3.0, 0.0, 1.0));
        let v = opposite_horocycle(&GroupElement::identity(), 3.0);
        assert_eq!((v.a, v.b, v.c, v.d), (1.0, 0.0, 3.0, 1.0));
    }

    #[test]
    fn group_laws_hold_on_random_elements() {
        // Direct matrix-product oracle for the one-parameter group laws.
        let mut rng = Rng::for_sample(2024, StreamId::OrbitInit, 0);
        for _ in 0..1000 {
            let g = random_element(&mut rng);
            let (s, s2) = (rng.uniform(-3.0, 3.0), rng.uniform(-3.0, 3.0));
            let (t, t2) = (rng.uniform(-10.0, 10.0), rng.uniform(-10.0, 10.0));

            let geo2 = geodesic(&geodesic(&g, s).unwrap(), s2).unwrap();
            let geo1 = geodesic(&g, s + s2).unwrap();
            assert!(geo2.sub_norm(&geo1) < 1e-12);

            let hor2 = horocycle(&horocycle(&g, t), t2);
            let hor1 = horocycle(&g, t + t2);
            assert!(hor2.sub_norm(&hor1) < 1e-12);

            let opp2 = opposite_horocycle(&opposite_horocycle(&g, t), t2);
            let opp1 = opposite_horocycle(&g, t + t2);
            assert!(opp2.sub_norm(&opp1) < 1e-12);
        }
    }

    #[test]
    fn scaling_sign_matches_multiplication_oracle() {
        // Brute-force 2x2 products decide the exponent sign.
        let id = GroupElement::identity();
        for &(s, t) in &[(1.0, 1.0), (-2.0, 5.0), (0.7, -3.3)] {
            let lhs = geodesic(&id, -s)
                .map(|g| horocycle(&g, t))
                .and_then(|g| geodesic(&g, s))
                .unwrap();
            let rhs = horocycle(&id, t * (GEODESIC_SCALING_SIGN * s).exp());
            assert!(lhs.sub_norm(&rhs) < 1e-12, "s={s} t={t}");
            let wrong = horocycle(&id, t * (-GEODESIC_SCALING_SIGN * s).exp());
            assert!(lhs.sub_norm(&wrong) > 1e-3, "sign must be discriminating");
        }
    }

    #[test]
    fn residual_is_zero_at_s_zero() {
        assert_eq!(renormalization_residual(0.0, 17.5), 0.0);
    }

    #[test]
    fn residual_small_at_reference_points() {
        assert!(renormalization_residual(1.0, 1.0) < 1e-12);
        assert!(renormalization_residual(-2.0, 5.0) < 1e-12);
    }

    #[test]
    fn determinant_drift_controlled_over_long_products() {
        let mut g = GroupElement::from_iwasawa(0.3, 1.7, 0.4);
        for i in 0..1_000_000u32 {
            g = if i % 2 == 0 {
                geodesic(&g, 0.013).unwrap()
            } else {
                horocycle(&g, -0.021)
            };
            if i % 4096 == 0 {
                // Keep entries bounded; renormalization handles det only.
                if g.norm() > 1e6 {
                    g = GroupElement::from_iwasawa(0.3, 1.7, 0.4);
                }
            }
        }
        assert!((g.det() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn geodesic_overflow_guard() {
        assert!(geodesic(&GroupElement::identity(), 51.0).is_err());
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig { cases: 256, ..ProptestConfig::default() })]

            #[test]
            fn prop_scaling_identity_everywhere(
                s in -3.0f64..3.0,
                t in -10.0f64..10.0,
            ) {
                prop_assert!(renormalization_residual(s, t) < 1e-12);
            }

            #[test]
            fn prop_flows_preserve_determinant(
                x in -5.0f64..5.0,
                y in 0.05f64..20.0,
                theta in 0.0f64..std::f64::consts::TAU,
                s in -3.0f64..3.0,
                t in -20.0f64..20.0,
            ) {
                let g = GroupElement::from_iwasawa(x, y, theta);
                let moved = horocycle(&geodesic(&g, s).unwrap(), t);
                prop_assert!((moved.det() - 1.0).abs() < 1e-9);
            }
        }
    }
}
