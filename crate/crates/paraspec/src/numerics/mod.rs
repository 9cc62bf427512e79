//! Shared numerical machinery: deterministic parallel map, pairwise
//! reduction, adaptive quadrature and ODE stepping, radix-2 FFT, and a
//! symmetric eigensolver for the Toeplitz positivity check.

pub mod eigen;
pub mod fft;
pub mod ode;
pub mod quad;

use num_complex::Complex64;

/// Effective worker count: explicit value, else `PARASPEC_WORKERS`,
/// else the machine's available parallelism.
pub fn effective_workers(requested: Option<usize>) -> usize {
    if let Some(w) = requested {
        return w.max(1);
    }
    if let Ok(s) = std::env::var("PARASPEC_WORKERS") {
        if let Ok(w) = s.trim().parse::<usize>() {
            return w.max(1);
        }
    }
    std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1)
}

/// Evaluate `f` over `0..n` across `workers` threads. The output vector
/// is indexed by input, so the result is independent of scheduling.
pub fn par_map_indexed<T, F>(n: usize, workers: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync,
{
    let workers = workers.max(1).min(n.max(1));
    if workers <= 1 || n < 2 {
        return (0..n).map(f).collect();
    }
    let mut out: Vec<Option<T>> = (0..n).map(|_| None).collect();
    let chunk = n.div_ceil(workers);
    std::thread::scope(|scope| {
        let fref = &f;
        for (w, slice) in out.chunks_mut(chunk).enumerate() {
            let base = w * chunk;
            scope.spawn(move || {
                for (j, slot) in slice.iter_mut().enumerate() {
                    *slot = Some(fref(base + j));
                }
            });
        }
    });
    out.into_iter().map(|v| v.expect("all slots filled")).collect()
}

/// Pairwise (cascade) summation: a fixed association tree, so results do
/// not depend on how the inputs were produced, and rounding error grows
/// like log n instead of n.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        1 => xs[0],
        2 => xs[0] + xs[1],
        n => {
            let mid = n / 2;
            pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
        }
    }
}

/// Pairwise summation for complex values; same association tree.
pub fn pairwise_sum_c(xs: &[Complex64]) -> Complex64 {
    match xs.len() {
        0 => Complex64::new(0.0, 0.0),
        1 => xs[0],
        2 => xs[0] + xs[1],
        n => {
            let mid = n / 2;
            pairwise_sum_c(&xs[..mid]) + pairwise_sum_c(&xs[mid..])
        }
    }
}

/// Sample mean and standard error by batch means (16 batches).
///
/// Returns `(mean, stderr)`. With fewer than 32 values the estimate
/// falls back to the plain standard error of the mean.
pub fn batch_mean_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (0.0, 0.0);
    }
    let mean = pairwise_sum(values) / n as f64;
    if n < 32 {
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n.max(2) - 1) as f64;
        return (mean, (var / n as f64).sqrt());
    }
    let n_batches = 16;
    let batch = n / n_batches;
    let mut batch_means = Vec::with_capacity(n_batches);
    for b in 0..n_batches {
        let lo = b * batch;
        let hi = if b == n_batches - 1 { n } else { lo + batch };
        batch_means.push(pairwise_sum(&values[lo..hi]) / (hi - lo) as f64);
    }
    let bm = pairwise_sum(&batch_means) / n_batches as f64;
    let var = batch_means.iter().map(|v| (v - bm).powi(2)).sum::<f64>() / (n_batches - 1) as f64;
    (mean, (var / n_batches as f64).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn par_map_matches_serial_and_is_worker_invariant() {
        let serial = par_map_indexed(101, 1, |i| (i * i) as f64);
        let par = par_map_indexed(101, 8, |i| (i * i) as f64);
        assert_eq!(serial, par);
    }

    #[test]
    fn pairwise_sum_is_exact_on_integers() {
        let xs: Vec<f64> = (0..1000).map(|i| i as f64).collect();
        assert_eq!(pairwise_sum(&xs), 499_500.0);
    }

    #[test]
    fn batch_stderr_shrinks_with_samples() {
        let make = |n: usize| -> f64 {
            let mut rng = crate::rng::Rng::from_seed(9);
            let xs: Vec<f64> = (0..n).map(|_| rng.next_f64()).collect();
            batch_mean_stderr(&xs).1
        };
        assert!(make(64_000) < make(1_000));
    }
}
