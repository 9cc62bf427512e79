//! Adaptive 4th-order Runge-Kutta with step doubling.
//!
//! The error estimate comes from comparing one full step against two
//! half steps; accepted steps keep the locally extrapolated value. Steps
//! land exactly on requested recording times so observable accumulators
//! can be read off without interpolation.

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct OdeOptions {
    /// Per-step error tolerance, scaled by (1 + |y|).
    pub tol: f64,
    pub h_init: f64,
    pub h_min: f64,
    pub h_max: f64,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions {
            tol: 1e-8,
            h_init: 0.1,
            h_min: 1e-12,
            h_max: 4.0,
        }
    }
}

fn rk4_step<F: FnMut(f64, &[f64], &mut [f64])>(
    f: &mut F,
    t: f64,
    y: &[f64],
    h: f64,
    scratch: &mut [Vec<f64>],
    out: &mut [f64],
) {
    let n = y.len();
    let (k1, rest) = scratch.split_at_mut(1);
    let (k2, rest) = rest.split_at_mut(1);
    let (k3, rest) = rest.split_at_mut(1);
    let (k4, rest) = rest.split_at_mut(1);
    let tmp = &mut rest[0];
    f(t, y, &mut k1[0]);
    for i in 0..n {
        tmp[i] = y[i] + 0.5 * h * k1[0][i];
    }
    f(t + 0.5 * h, tmp, &mut k2[0]);
    for i in 0..n {
        tmp[i] = y[i] + 0.5 * h * k2[0][i];
    }
    f(t + 0.5 * h, tmp, &mut k3[0]);
    for i in 0..n {
        tmp[i] = y[i] + h * k3[0][i];
    }
    f(t + h, tmp, &mut k4[0]);
    for i in 0..n {
        out[i] = y[i] + h / 6.0 * (k1[0][i] + 2.0 * k2[0][i] + 2.0 * k3[0][i] + k4[0][i]);
    }
}

/// Integrate `dy/dt = f(t, y)` from `t = 0`, recording the state at each
/// time in `record_at` (strictly monotone, all the same sign). Returns one
/// state vector per recording time.
pub fn integrate_recording<F: FnMut(f64, &[f64], &mut [f64])>(
    mut f: F,
    y0: &[f64],
    record_at: &[f64],
    opts: &OdeOptions,
) -> Result<Vec<Vec<f64>>> {
    let n = y0.len();
    let mut y = y0.to_vec();
    let mut t = 0.0f64;
    let mut out = Vec::with_capacity(record_at.len());
    let mut scratch = vec![vec![0.0; n]; 5];
    let mut y_big = vec![0.0; n];
    let mut y_half = vec![0.0; n];
    let mut y_small = vec![0.0; n];

    for &target in record_at {
        let dir = (target - t).signum();
        if dir == 0.0 {
            out.push(y.clone());
            continue;
        }
        let mut h = (opts.h_init * dir).clamp(-opts.h_max, opts.h_max);
        while (target - t) * dir > 1e-14 * (1.0 + target.abs()) {
            if (t + h - target) * dir > 0.0 {
                h = target - t;
            }
            rk4_step(&mut f, t, &y, h, &mut scratch, &mut y_big);
            rk4_step(&mut f, t, &y, 0.5 * h, &mut scratch, &mut y_half);
            rk4_step(&mut f, t + 0.5 * h, &y_half, 0.5 * h, &mut scratch, &mut y_small);

            let mut err = 0.0f64;
            for i in 0..n {
                let scale = 1.0 + y_small[i].abs();
                err = err.max((y_small[i] - y_big[i]).abs() / 15.0 / scale);
            }
            if err <= opts.tol {
                t += h;
                for i in 0..n {
                    y[i] = y_small[i] + (y_small[i] - y_big[i]) / 15.0;
                }
                let grow = if err > 0.0 {
                    0.9 * (opts.tol / err).powf(0.2)
                } else {
                    4.0
                };
                h *= grow.clamp(0.2, 4.0);
            } else {
                h *= (0.9 * (opts.tol / err).powf(0.2)).clamp(0.1, 0.9);
            }
            if h.abs() < opts.h_min {
                return Err(Error::OdeStepFailure(format!(
                    "step underflow at t = {t} (|h| < {})",
                    opts.h_min
                )));
            }
            h = h.clamp(-opts.h_max, opts.h_max);
        }
        out.push(y.clone());
    }
    Ok(out)
}
