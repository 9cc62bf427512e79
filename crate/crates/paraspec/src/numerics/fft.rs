//! In-place radix-2 FFT.
//!
//! Grid sizes in this crate are powers of two by contract, so a plain
//! iterative Cooley-Tukey kernel is all that is needed; keeping it in
//! the crate pins the floating-point behaviour bit-exactly.

use num_complex::Complex64;
use std::f64::consts::PI;

/// Forward DFT: `X[k] = sum_j x[j] exp(-2 pi i j k / n)`, in place.
pub fn fft(data: &mut [Complex64]) {
    transform(data, -1.0);
}

/// Inverse DFT with 1/n normalization, in place.
pub fn ifft(data: &mut [Complex64]) {
    transform(data, 1.0);
    let scale = 1.0 / data.len() as f64;
    for v in data.iter_mut() {
        *v *= scale;
    }
}

fn transform(data: &mut [Complex64], sign: f64) {
    let n = data.len();
    assert!(n.is_power_of_two(), "FFT length must be a power of two");
    // Bit reversal permutation.
    let mut j = 0usize;
    for i in 0..n {
        if i < j {
            data.swap(i, j);
        }
        let mut m = n >> 1;
        while m >= 1 && j & m != 0 {
            j ^= m;
            m >>= 1;
        }
        j |= m;
    }
    let mut len = 2;
    while len <= n {
        let ang = sign * 2.0 * PI / len as f64;
        let wlen = Complex64::new(ang.cos(), ang.sin());
        let mut i = 0;
        while i < n {
            let mut w = Complex64::new(1.0, 0.0);
            for k in 0..len / 2 {
                let u = data[i + k];
                let v = data[i + k + len / 2] * w;
                data[i + k] = u + v;
                data[i + k + len / 2] = u - v;
                w *= wlen;
            }
            i += len;
        }
        len <<= 1;
    }
}

/// FFT along one axis of a row-major multi-dimensional array.
///
/// `dims` are the per-axis lengths; `axis` indexes into them.
pub fn fft_axis(data: &mut [Complex64], dims: &[usize], axis: usize, inverse: bool) {
    let n: usize = dims.iter().product();
    assert_eq!(n, data.len());
    let len = dims[axis];
    let stride: usize = dims[axis + 1..].iter().product();
    let block = len * stride;
    let mut line = vec![Complex64::new(0.0, 0.0); len];
    for base in (0..n).step_by(block) {
        for off in 0..stride {
            for (k, v) in line.iter_mut().enumerate() {
                *v = data[base + off + k * stride];
            }
            if inverse {
                ifft(&mut line);
            } else {
                fft(&mut line);
            }
            for (k, v) in line.iter().enumerate() {
                data[base + off + k * stride] = *v;
            }
        }
    }
}

/// Signed frequency for mode index `idx` on a grid of `n` points.
#[inline]
pub fn signed_freq(idx: usize, n: usize) -> i64 {
    if idx <= n / 2 - 1 || n == 1 {
        idx as i64
    } else {
        idx as i64 - n as i64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dft_naive(x: &[Complex64]) -> Vec<Complex64> {
        let n = x.len();
        (0..n)
            .map(|k| {
                (0..n)
                    .map(|j| {
                        let ang = -2.0 * PI * (j * k) as f64 / n as f64;
                        x[j] * Complex64::new(ang.cos(), ang.sin())
                    })
                    .sum()
            })
            .collect()
    }

    #[test]
    fn matches_naive_dft() {
        let mut rng = crate::rng::Rng::from_seed(11);
        let x: Vec<Complex64> = (0..64)
            .map(|_| Complex64::new(rng.next_f64() - 0.5, rng.next_f64() - 0.5))
            .collect();
        let want = dft_naive(&x);
        let mut got = x.clone();
        fft(&mut got);
        for (a, b) in got.iter().zip(&want) {
            assert!((a - b).norm() < 1e-10);
        }
    }

    #[test]
    fn roundtrip_and_parseval() {
        let mut rng = crate::rng::Rng::from_seed(5);
        let x: Vec<Complex64> = (0..256)
            .map(|_| Complex64::new(rng.next_f64() - 0.5, rng.next_f64() - 0.5))
            .collect();
        let mut y = x.clone();
        fft(&mut y);
        let sum_t: f64 = x.iter().map(|v| v.norm_sqr()).sum();
        let sum_f: f64 = y.iter().map(|v| v.norm_sqr()).sum::<f64>() / 256.0;
        assert!((sum_t - sum_f).abs() < 1e-10);
        ifft(&mut y);
        for (a, b) in y.iter().zip(&x) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn axis_transform_equals_full_1d_on_each_line() {
        let dims = [4usize, 8usize];
        let mut rng = crate::rng::Rng::from_seed(3);
        let mut a: Vec<Complex64> = (0..32)
            .map(|_| Complex64::new(rng.next_f64(), 0.0))
            .collect();
        let orig = a.clone();
        fft_axis(&mut a, &dims, 1, false);
        for row in 0..4 {
            let mut line: Vec<Complex64> = orig[row * 8..(row + 1) * 8].to_vec();
            fft(&mut line);
            for k in 0..8 {
                assert!((a[row * 8 + k] - line[k]).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn signed_freq_convention() {
        assert_eq!(signed_freq(0, 8), 0);
        assert_eq!(signed_freq(3, 8), 3);
        assert_eq!(signed_freq(4, 8), -4);
        assert_eq!(signed_freq(7, 8), -1);
    }
}
