//! Circle extension of the horocycle flow.
//!
//! The extended phase space is (modular surface) x S^1. The base moves
//! with the unit-speed horocycle while the fiber angle advances with
//! speed `alpha` along the orbit:
//!
//! ```text
//! theta(t) = theta(0) + int_0^t alpha(h_s x) ds   (mod 1)
//! ```
//!
//! The companion cocycle `a(x, t) = int_0^t (alpha - 1)(h_s x) ds` is the
//! fiber drift relative to the rigid rotation.

use crate::error::Result;
use crate::modular::{reduce, ModularPoint};
use crate::numerics::quad::adaptive_simpson;
use crate::sl2::horocycle;
use crate::time_change::TimeChange;

/// Point of the twisted system: base point plus circle coordinate in
/// turns, always reduced mod 1.
#[derive(Debug, Clone, Copy)]
pub struct TwistedPoint {
    pub base: ModularPoint,
    pub theta: f64,
}

impl TwistedPoint {
    pub fn new(base: ModularPoint, theta: f64) -> Self {
        TwistedPoint {
            base,
            theta: theta.rem_euclid(1.0),
        }
    }
}

/// Fiber advance `int_0^t alpha(h_s x) ds` (not reduced mod 1).
pub fn theta_advance(x: &ModularPoint, t: f64, alpha: &TimeChange) -> Result<f64> {
    if alpha.epsilon == 0.0 {
        // Constant integrand: exactly c * t.
        return Ok(alpha.c * t);
    }
    adaptive_simpson(
        |s| {
            let p = reduce(&horocycle(&x.rep, s)).expect("orbit point reduces");
            alpha.alpha(&p)
        },
        0.0,
        t,
        alpha.tol.quad_abs,
    )
}

/// The twisted flow: base advanced by horocycle time `t` (then reduced),
/// fiber advanced by the `alpha`-weighted time along the orbit.
pub fn twisted_flow(p: &TwistedPoint, t: f64, alpha: &TimeChange) -> Result<TwistedPoint> {
    if t == 0.0 {
        return Ok(*p);
    }
    let advance = theta_advance(&p.base, t, alpha)?;
    let base = reduce(&horocycle(&p.base.rep, t))?;
    Ok(TwistedPoint {
        base,
        theta: (p.theta + advance).rem_euclid(1.0),
    })
}

/// The drift cocycle `a(x, t) = int_0^t (alpha - 1)(h_s x) ds`.
pub fn cocycle_a(x: &ModularPoint, t: f64, alpha: &TimeChange) -> Result<f64> {
    if alpha.epsilon == 0.0 && alpha.c == 1.0 {
        return Ok(0.0);
    }
    adaptive_simpson(
        |s| {
            let p = reduce(&horocycle(&x.rep, s)).expect("orbit point reduces");
            alpha.alpha(&p) - 1.0
        },
        0.0,
        t,
        alpha.tol.quad_abs,
    )
}
