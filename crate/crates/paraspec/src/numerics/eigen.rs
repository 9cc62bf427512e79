//! Smallest eigenvalue of a Hermitian matrix.
//!
//! The complex Hermitian matrix is embedded as the real symmetric block
//! matrix [[A, -B], [B, A]] (same spectrum, doubled multiplicity), then
//! Householder-tridiagonalized, and the smallest eigenvalue is located
//! by Sturm-sequence bisection.

use num_complex::Complex64;

/// Minimum eigenvalue of the Hermitian matrix `h` (row-major, n x n).
pub fn min_eigenvalue_hermitian(h: &[Complex64], n: usize) -> f64 {
    assert_eq!(h.len(), n * n);
    let m = 2 * n;
    let mut a = vec![0.0f64; m * m];
    for i in 0..n {
        for j in 0..n {
            let v = h[i * n + j];
            a[i * m + j] = v.re;
            a[(i + n) * m + (j + n)] = v.re;
            a[i * m + (j + n)] = -v.im;
            a[(i + n) * m + j] = v.im;
        }
    }
    let (d, e) = tridiagonalize(&mut a, m);
    min_eigenvalue_tridiagonal(&d, &e)
}

/// Householder reduction of a real symmetric matrix to tridiagonal form.
/// Returns (diagonal, subdiagonal) with `e[0]` unused.
fn tridiagonalize(a: &mut [f64], n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    for i in (1..n).rev() {
        let l = i - 1;
        let mut h = 0.0;
        if l > 0 {
            let scale: f64 = (0..=l).map(|k| a[i * n + k].abs()).sum();
            if scale == 0.0 {
                e[i] = a[i * n + l];
            } else {
                for k in 0..=l {
                    a[i * n + k] /= scale;
                    h += a[i * n + k] * a[i * n + k];
                }
                let f = a[i * n + l];
                let g = if f >= 0.0 { -h.sqrt() } else { h.sqrt() };
                e[i] = scale * g;
                h -= f * g;
                a[i * n + l] = f - g;
                let mut fsum = 0.0;
                for j in 0..=l {
                    let mut g = 0.0;
                    for k in 0..=j {
                        g += a[j * n + k] * a[i * n + k];
                    }
                    for k in (j + 1)..=l {
                        g += a[k * n + j] * a[i * n + k];
                    }
                    e[j] = g / h;
                    fsum += e[j] * a[i * n + j];
                }
                let hh = fsum / (h + h);
                for j in 0..=l {
                    let f = a[i * n + j];
                    let g = e[j] - hh * f;
                    e[j] = g;
                    for k in 0..=j {
                        a[j * n + k] -= f * e[k] + g * a[i * n + k];
                    }
                }
            }
        } else {
            e[i] = a[i * n + l];
        }
        d[i] = h;
    }
    for i in 0..n {
        d[i] = a[i * n + i];
    }
    (d, e)
}

/// Number of eigenvalues of the tridiagonal (d, e) strictly below `x`
/// (Sturm sequence sign count).
fn count_below(d: &[f64], e: &[f64], x: f64) -> usize {
    let n = d.len();
    let mut count = 0;
    let mut q = d[0] - x;
    if q < 0.0 {
        count += 1;
    }
    for i in 1..n {
        let denom = if q == 0.0 { 1e-300 } else { q };
        q = d[i] - x - e[i] * e[i] / denom;
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

fn min_eigenvalue_tridiagonal(d: &[f64], e: &[f64]) -> f64 {
    let n = d.len();
    // Gershgorin bounds.
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let r = if i > 0 { e[i].abs() } else { 0.0 } + if i + 1 < n { e[i + 1].abs() } else { 0.0 };
        lo = lo.min(d[i] - r);
        hi = hi.max(d[i] + r);
    }
    let scale = hi.abs().max(lo.abs()).max(1e-300);
    let tol = 1e-13 * scale;
    let mut a = lo - tol;
    let mut b = hi + tol;
    // Invariant: count_below(a) == 0, count_below(b) >= 1.
    for _ in 0..200 {
        if b - a <= tol {
            break;
        }
        let mid = 0.5 * (a + b);
        if count_below(d, e, mid) == 0 {
            a = mid;
        } else {
            b = mid;
        }
    }
    0.5 * (a + b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn diagonal_matrix() {
        let h = vec![
            c(3.0, 0.0),
            c(0.0, 0.0),
            c(0.0, 0.0),
            c(-1.5, 0.0),
        ];
        let got = min_eigenvalue_hermitian(&h, 2);
        assert!((got + 1.5).abs() < 1e-10);
    }

    #[test]
    fn complex_two_by_two() {
        // [[2, i], [-i, 2]] has eigenvalues {1, 3}.
        let h = vec![c(2.0, 0.0), c(0.0, 1.0), c(0.0, -1.0), c(2.0, 0.0)];
        let got = min_eigenvalue_hermitian(&h, 2);
        assert!((got - 1.0).abs() < 1e-10);
    }

    #[test]
    fn tridiagonal_toeplitz_closed_form() {
        // tridiag(1, 0, 1) of size n: eigenvalues 2 cos(k pi / (n+1)).
        let n = 12;
        let mut h = vec![c(0.0, 0.0); n * n];
        for i in 0..n - 1 {
            h[i * n + i + 1] = c(1.0, 0.0);
            h[(i + 1) * n + i] = c(1.0, 0.0);
        }
        let want = 2.0 * (PI * n as f64 / (n as f64 + 1.0)).cos();
        let got = min_eigenvalue_hermitian(&h, n);
        assert!((got - want).abs() < 1e-9, "got {got}, want {want}");
    }

    #[test]
    fn rank_one_positive_kernel_is_nonnegative() {
        // h[i][j] = z^i conj(z)^j with |z| = 1: rank one, eigenvalues {n, 0,...}.
        let n = 16;
        let z = Complex64::from_polar(1.0, 0.7);
        let mut h = vec![c(0.0, 0.0); n * n];
        for i in 0..n {
            for j in 0..n {
                h[i * n + j] = z.powu(i as u32) * z.powu(j as u32).conj();
            }
        }
        let got = min_eigenvalue_hermitian(&h, n);
        assert!(got >= -1e-10);
        assert!(got <= 1e-10);
    }
}
