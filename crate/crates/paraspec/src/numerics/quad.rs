//! Adaptive Simpson quadrature with an absolute-tolerance contract.

use crate::error::{Error, Result};

const MAX_DEPTH: usize = 48;

/// Integrate `f` over `[a, b]` to absolute tolerance `tol`.
///
/// Long intervals are pre-split into panels of length at most 2 before
/// the adaptive recursion, so a smooth oscillation cannot alias the
/// top-level error estimate into a false early acceptance.
pub fn adaptive_simpson<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    let panels = (((hi - lo) / 2.0).ceil() as usize).clamp(1, 1 << 20);
    let panel_tol = tol / panels as f64;
    let width = (hi - lo) / panels as f64;
    let mut total = 0.0;
    for i in 0..panels {
        let pa = lo + i as f64 * width;
        let pb = if i == panels - 1 { hi } else { pa + width };
        let m = 0.5 * (pa + pb);
        let fa = f(pa);
        let fm = f(m);
        let fb = f(pb);
        let whole = simpson(pa, pb, fa, fm, fb);
        total += recurse(&mut f, pa, pb, fa, fm, fb, whole, panel_tol, MAX_DEPTH)?;
    }
    Ok(sign * total)
}

#[inline]
fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn recurse<F: FnMut(f64) -> f64>(
    f: &mut F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: usize,
) -> Result<f64> {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if delta.abs() <= 15.0 * tol {
        return Ok(left + right + delta / 15.0);
    }
    if depth == 0 {
        return Err(Error::QuadratureFailure { a, b, tol });
    }
    let lv = recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)?;
    let rv = recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)?;
    Ok(lv + rv)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn constant_is_exact() {
        let v = adaptive_simpson(|_| 3.5, 0.0, 7.0, 1e-12).unwrap();
        assert_eq!(v, 24.5);
    }

    #[test]
    fn oscillatory_integral_meets_tolerance() {
        // int_0^10 sin(x) dx = 1 - cos(10)
        let v = adaptive_simpson(|x| x.sin(), 0.0, 10.0, 1e-10).unwrap();
        assert!((v - (1.0 - 10.0f64.cos())).abs() < 1e-9);
    }

    #[test]
    fn reversed_limits_flip_sign() {
        let fwd = adaptive_simpson(|x| (PI * x).cos(), 0.0, 0.4, 1e-11).unwrap();
        let rev = adaptive_simpson(|x| (PI * x).cos(), 0.4, 0.0, 1e-11).unwrap();
        assert!((fwd + rev).abs() < 1e-14);
    }
}
