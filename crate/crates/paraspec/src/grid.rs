//! Grid-sampled observables and the character-subspace operators.
//!
//! The operator under study multiplies by a unimodular character of the
//! fiber cocycle and composes with the base map:
//!
//! ```text
//! (U psi)(x) = exp(2 pi i k phi(x)) * psi(F(x))
//! ```
//!
//! One-dimensional bases (skew products, and Furstenberg systems with
//! active row 2) compose through the FFT: a rotation is an exact phase
//! twist of the modes, so the operator is unitary on the grid to
//! machine precision. Higher-dimensional bases evaluate the band-limited
//! interpolant at the exactly-mapped points instead.
//!
//! Correlations are estimated by the cocycle route: the n-step operator
//! applied to psi is `exp(2 pi i k S_n phi(x)) psi(F^n x)` with `S_n`
//! the Birkhoff sum of the cocycle, so `c_n` is a single grid average
//! per step. Aliasing is controlled analytically: the integer linear
//! part of `S_n phi` is tracked exactly and the trig-polynomial part is
//! bounded through its Bessel-function spread.

use crate::error::{Error, Result};
use crate::numerics::fft::{fft, fft_axis, ifft, signed_freq};
use crate::numerics::{pairwise_sum_c, par_map_indexed};
use crate::spectral::{CorrelationSeries, EstimatorMeta};
use crate::torus::{FourierObservable, FurstenbergSpec, SkewProductSpec, TorusMap};
use num_complex::Complex64;
use std::f64::consts::TAU;

/// Fixed reduction block: parallel estimators sum per-block partials in
/// block order, so results are byte-identical for any worker count.
pub const REDUCTION_BLOCK: usize = 1024;

/// A system carrying a character-subspace operator.
#[derive(Debug, Clone)]
pub enum CharacterSystem {
    Skew(SkewProductSpec),
    Furstenberg(FurstenbergSpec),
    /// Diagnostic mode without a fiber multiplier: the plain Koopman
    /// operator of the rotation (the pure-point negative control).
    ControlRotation { rotation: f64 },
}

impl CharacterSystem {
    pub fn base_map(&self) -> TorusMap {
        match self {
            CharacterSystem::Skew(s) => TorusMap::rotation(s.rotation),
            CharacterSystem::Furstenberg(f) => f.base_map(),
            CharacterSystem::ControlRotation { rotation } => TorusMap::rotation(*rotation),
        }
    }

    pub fn base_dim(&self) -> usize {
        self.base_map().dim()
    }

    /// The multiplier exponent in turns: k * phi(x).
    pub fn multiplier_lift(&self, x: &[f64]) -> f64 {
        match self {
            CharacterSystem::Skew(s) => s.k as f64 * s.phi_lift(x[0]),
            CharacterSystem::Furstenberg(f) => f.k as f64 * f.phi_lift(x),
            CharacterSystem::ControlRotation { .. } => 0.0,
        }
    }

    /// Integer coefficients of the linear part of k * phi.
    fn linear_row(&self) -> Vec<i64> {
        match self {
            CharacterSystem::Skew(s) => vec![s.k * s.b],
            CharacterSystem::Furstenberg(f) => (0..f.j - 1)
                .map(|c| f.k * f.b[f.j - 1][c])
                .collect(),
            CharacterSystem::ControlRotation { .. } => vec![0],
        }
    }

    /// The trig-polynomial part of k * phi.
    fn trig_part(&self) -> FourierObservable {
        match self {
            CharacterSystem::Skew(s) => s.eta_lift.scale(s.k as f64),
            CharacterSystem::Furstenberg(f) => f.h[f.j - 2].scale(f.k as f64),
            CharacterSystem::ControlRotation { .. } => FourierObservable::zero(1),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            CharacterSystem::Skew(s) => format!(
                "skew product: y = {}, b = {}, k = {}, eta modes = {}",
                s.rotation,
                s.b,
                s.k,
                s.eta_lift.coeffs.len()
            ),
            CharacterSystem::Furstenberg(f) => format!(
                "Furstenberg: d = {}, y = {}, active (j, k) = ({}, {})",
                f.d, f.rotation, f.j, f.k
            ),
            CharacterSystem::ControlRotation { rotation } => {
                format!("rotation control: y = {rotation}")
            }
        }
    }
}

/// Complex samples on a row-major product grid over the torus.
#[derive(Debug, Clone)]
pub struct GridFn {
    pub dims: Vec<usize>,
    pub data: Vec<Complex64>,
}

impl GridFn {
    pub fn from_fn(dims: &[usize], f: impl Fn(&[f64]) -> Complex64) -> Self {
        for &d in dims {
            assert!(d.is_power_of_two(), "grid sides must be powers of two");
        }
        let total: usize = dims.iter().product();
        let mut coords = vec![0.0f64; dims.len()];
        let data = (0..total)
            .map(|idx| {
                decode_coords(idx, dims, &mut coords);
                f(&coords)
            })
            .collect();
        GridFn {
            dims: dims.to_vec(),
            data,
        }
    }

    pub fn from_observable(dims: &[usize], obs: &FourierObservable) -> Self {
        Self::from_fn(dims, |x| obs.eval(x))
    }

    pub fn constant(dims: &[usize], value: Complex64) -> Self {
        Self::from_fn(dims, |_| value)
    }

    pub fn total(&self) -> usize {
        self.dims.iter().product()
    }

    /// Mean of |.|^2 over the grid: the L2(Haar)^2 norm of the
    /// trigonometric interpolant.
    pub fn norm_sq(&self) -> f64 {
        self.data.iter().map(|v| v.norm_sqr()).sum::<f64>() / self.total() as f64
    }

    /// Grid inner product mean(self * conj(other)).
    pub fn inner(&self, other: &GridFn) -> Complex64 {
        assert_eq!(self.dims, other.dims);
        let acc: Complex64 = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a * b.conj())
            .sum();
        acc / self.total() as f64
    }

    /// Largest active signed frequency per axis (relative threshold
    /// 1e-13 on mode magnitudes).
    pub fn max_active_freq(&self) -> Vec<i64> {
        let mut modes = self.data.clone();
        full_fft(&mut modes, &self.dims, false);
        let peak = modes.iter().map(|c| c.norm()).fold(0.0f64, f64::max);
        let thresh = peak * 1e-13;
        let mut out = vec![0i64; self.dims.len()];
        let mut idx_coords = vec![0usize; self.dims.len()];
        for (idx, c) in modes.iter().enumerate() {
            if c.norm() > thresh {
                decode_indices(idx, &self.dims, &mut idx_coords);
                for (axis, &i) in idx_coords.iter().enumerate() {
                    out[axis] = out[axis].max(signed_freq(i, self.dims[axis]).abs());
                }
            }
        }
        out
    }
}

fn decode_indices(mut idx: usize, dims: &[usize], out: &mut [usize]) {
    for axis in (0..dims.len()).rev() {
        out[axis] = idx % dims[axis];
        idx /= dims[axis];
    }
}

fn decode_coords(idx: usize, dims: &[usize], out: &mut [f64]) {
    let mut rem = idx;
    for axis in (0..dims.len()).rev() {
        out[axis] = (rem % dims[axis]) as f64 / dims[axis] as f64;
        rem /= dims[axis];
    }
}

fn full_fft(data: &mut [Complex64], dims: &[usize], inverse: bool) {
    if dims.len() == 1 {
        if inverse {
            ifft(data);
        } else {
            fft(data);
        }
        return;
    }
    for axis in 0..dims.len() {
        fft_axis(data, dims, axis, inverse);
    }
}

/// Bessel-tail width: modes of exp(i A sin) are negligible beyond
/// |A| + 8 |A|^{1/3} + 10.
fn jacobi_width(a: f64) -> i64 {
    let a = a.abs();
    (a + 8.0 * a.powf(1.0 / 3.0) + 10.0).ceil() as i64
}

/// Per-axis frequency spread of exp(2 pi i g(x)) for a real trig
/// polynomial g (in turns).
fn trig_spread(g: &FourierObservable, dim: usize) -> Vec<i64> {
    let mut spread = vec![0i64; dim];
    let mut seen: Vec<Vec<i64>> = Vec::new();
    for (m, c) in &g.coeffs {
        let neg: Vec<i64> = m.iter().map(|v| -v).collect();
        if seen.contains(&neg) || m.iter().all(|&v| v == 0) {
            continue;
        }
        seen.push(m.clone());
        // Pair (m, -m) with cosine amplitude 2|c|: phase amplitude in
        // radians is 2 pi * 2|c|.
        let width = jacobi_width(TAU * 2.0 * c.norm());
        for axis in 0..dim {
            spread[axis] += width * m[axis].abs();
        }
    }
    spread
}

/// One application of the character-subspace operator to grid samples.
///
/// Unitary on the grid (norm preserved to 1e-12) whenever the result
/// stays inside the resolvable band; otherwise GridTooCoarse.
pub fn u_chi_apply(system: &CharacterSystem, psi: &GridFn) -> Result<GridFn> {
    let dim = system.base_dim();
    if psi.dims.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: psi.dims.len(),
        });
    }
    // Bandwidth bookkeeping: input content + multiplier content must fit.
    let active = psi.max_active_freq();
    let row = system.linear_row();
    let spread = trig_spread(&system.trig_part(), dim);
    for axis in 0..dim {
        let needed = active[axis] + row.get(axis).map(|v| v.abs()).unwrap_or(0) + spread[axis];
        let allowed = (psi.dims[axis] / 2) as i64;
        if needed >= allowed {
            return Err(Error::GridTooCoarse {
                n: 1,
                needed,
                allowed,
            });
        }
    }

    // Compose with the base map.
    let composed = match system.base_map() {
        TorusMap::Rotation { y } => {
            let n = psi.dims[0];
            let mut modes = psi.data.clone();
            fft(&mut modes);
            for (i, v) in modes.iter_mut().enumerate() {
                let m = signed_freq(i, n) as f64;
                *v *= Complex64::from_polar(1.0, TAU * m * y);
            }
            ifft(&mut modes);
            modes
        }
        map @ TorusMap::Furstenberg { .. } => {
            // Band-limited interpolant evaluated at the mapped points.
            let total = psi.total();
            let mut modes = psi.data.clone();
            full_fft(&mut modes, &psi.dims, false);
            let peak = modes.iter().map(|c| c.norm()).fold(0.0f64, f64::max);
            let mut sig: Vec<(Vec<i64>, Complex64)> = Vec::new();
            let mut idx_coords = vec![0usize; dim];
            for (idx, c) in modes.iter().enumerate() {
                if c.norm() > peak * 1e-14 {
                    decode_indices(idx, &psi.dims, &mut idx_coords);
                    let m: Vec<i64> = idx_coords
                        .iter()
                        .zip(&psi.dims)
                        .map(|(&i, &d)| signed_freq(i, d))
                        .collect();
                    sig.push((m, c / total as f64));
                }
            }
            let mut coords = vec![0.0f64; dim];
            (0..total)
                .map(|idx| {
                    decode_coords(idx, &psi.dims, &mut coords);
                    let mut mapped = coords.clone();
                    map.apply(&mut mapped);
                    sig.iter()
                        .map(|(m, c)| {
                            let phase: f64 =
                                m.iter().zip(&mapped).map(|(&mi, &xi)| mi as f64 * xi).sum();
                            c * Complex64::from_polar(1.0, TAU * phase)
                        })
                        .sum()
                })
                .collect()
        }
    };

    // Pointwise unimodular multiplier.
    let mut coords = vec![0.0f64; dim];
    let data = composed
        .into_iter()
        .enumerate()
        .map(|(idx, v)| {
            decode_coords(idx, &psi.dims, &mut coords);
            v * Complex64::from_polar(1.0, TAU * system.multiplier_lift(&coords))
        })
        .collect();
    Ok(GridFn {
        dims: psi.dims.clone(),
        data,
    })
}

/// One cosine pair of the cocycle's trig part inside the tracker.
struct TrigMode {
    /// Current sheared frequency row (times A^T per step).
    cur_row: Vec<i64>,
    /// Phase amplitude of a single term, in radians.
    amp: f64,
    /// Linearly accumulated spread per axis (general upper bound).
    acc: Vec<i64>,
    /// Uniform Dirichlet-capped spread per axis, when the base is a
    /// rotation and the mode's phases form a geometric sum.
    uniform: Option<Vec<i64>>,
}

/// Exact integer linear analysis of the n-step cocycle sum, used to
/// validate the grid before estimating correlations.
struct BandwidthTracker {
    /// Linear coefficients of S_n phi (times k), per axis.
    sum_row: Vec<i64>,
    /// Current row * A^n.
    cur_row: Vec<i64>,
    /// psi mode spread: largest |A^T^n m| per axis over psi modes.
    psi_rows: Vec<Vec<i64>>,
    trig_modes: Vec<TrigMode>,
    affine: Vec<Vec<i64>>,
    exact_character: bool,
    overflow: bool,
}

impl BandwidthTracker {
    fn new(system: &CharacterSystem, psi: &FourierObservable) -> Self {
        let dim = system.base_dim();
        let row = {
            let mut r = system.linear_row();
            r.resize(dim, 0);
            r
        };
        // Base-map linear action on coordinates: x -> A x + const.
        let (affine, rotation_y): (Vec<Vec<i64>>, Option<f64>) = match system.base_map() {
            TorusMap::Rotation { y } => (vec![vec![1]], Some(y)),
            TorusMap::Furstenberg { dim, b, .. } => {
                let mut a = vec![vec![0i64; dim]; dim];
                for (r, row_a) in a.iter_mut().enumerate() {
                    row_a[r] = 1;
                    for c in 0..r {
                        row_a[c] = b[r][c];
                    }
                }
                (a, None)
            }
        };
        let trig = system.trig_part();
        let mut trig_modes = Vec::new();
        let mut seen: Vec<Vec<i64>> = Vec::new();
        for (m, c) in &trig.coeffs {
            let neg: Vec<i64> = m.iter().map(|v| -v).collect();
            if seen.contains(&neg) || m.iter().all(|&v| v == 0) {
                continue;
            }
            seen.push(m.clone());
            let mut mm = m.clone();
            mm.resize(dim, 0);
            let amp = TAU * 2.0 * c.norm();
            // Under a plain rotation the mode's Birkhoff phases are a
            // geometric sum, bounded by 1/(2 ||m y||) uniformly in n.
            let uniform = rotation_y.map(|y| {
                let frac = (mm[0] as f64 * y).rem_euclid(1.0);
                let d = frac.min(1.0 - frac);
                let cap = if d > 1e-12 { 0.5 / d } else { f64::INFINITY };
                let width = if cap.is_finite() {
                    jacobi_width(amp * cap)
                } else {
                    i64::MAX / 4
                };
                mm.iter().map(|v| width.saturating_mul(v.abs())).collect()
            });
            trig_modes.push(TrigMode {
                cur_row: mm,
                amp,
                acc: vec![0; dim],
                uniform,
            });
        }
        let exact_character = trig_modes.is_empty();
        BandwidthTracker {
            sum_row: vec![0; dim],
            cur_row: row,
            psi_rows: psi.coeffs.keys().cloned().collect(),
            trig_modes,
            affine,
            exact_character,
            overflow: false,
        }
    }

    /// Advance from step n to n+1: S_{n+1} = S_n + row . A^n x + trig(A^n-sheared).
    fn advance(&mut self) {
        let dim = self.sum_row.len();
        for a in 0..dim {
            self.sum_row[a] = self.sum_row[a].saturating_add(self.cur_row[a]);
        }
        self.cur_row = mat_vec_right(&self.affine, &self.cur_row, &mut self.overflow);
        let aff = &self.affine;
        let ovf = &mut self.overflow;
        for mode in &mut self.trig_modes {
            let width = jacobi_width(mode.amp);
            for a in 0..dim {
                mode.acc[a] = mode.acc[a].saturating_add(width * mode.cur_row[a].abs());
            }
            mode.cur_row = mat_vec_right(aff, &mode.cur_row, ovf);
        }
        self.psi_rows = self
            .psi_rows
            .iter()
            .map(|m| mat_vec_right(aff, m, ovf))
            .collect();
    }

    /// Trig-part spread on one axis: per mode, the smaller of the
    /// linearly accumulated bound and the uniform Dirichlet bound.
    fn trig_spread_axis(&self, axis: usize) -> i64 {
        self.trig_modes
            .iter()
            .map(|m| match &m.uniform {
                Some(u) => m.acc[axis].min(u[axis]),
                None => m.acc[axis],
            })
            .fold(0i64, |a, b| a.saturating_add(b))
    }

    /// Check the grid can integrate step n exactly / within band.
    fn check(&self, dims: &[usize], psi: &FourierObservable, n: i64) -> Result<()> {
        let dim = dims.len();
        if self.overflow {
            return Err(Error::GridTooCoarse {
                n,
                needed: i64::MAX,
                allowed: (dims[0] / 2) as i64,
            });
        }
        if self.exact_character {
            // Integrand is a finite sum of characters with exactly known
            // frequencies: the grid sum is exact unless some nonzero
            // frequency aliases to zero.
            for p in &self.psi_rows {
                for q in psi.coeffs.keys() {
                    let mut all_zero = true;
                    let mut aliased_zero = true;
                    for a in 0..dim {
                        let f = self.sum_row[a] + p[a] - q[a];
                        if f != 0 {
                            all_zero = false;
                        }
                        if f.rem_euclid(dims[a] as i64) != 0 {
                            aliased_zero = false;
                        }
                    }
                    if aliased_zero && !all_zero {
                        return Err(Error::GridTooCoarse {
                            n,
                            needed: self.sum_row.iter().map(|v| v.abs()).max().unwrap_or(0),
                            allowed: (dims[0] / 2) as i64,
                        });
                    }
                }
            }
            Ok(())
        } else {
            for a in 0..dim {
                let psi_max = self.psi_rows.iter().map(|m| m[a].abs()).max().unwrap_or(0);
                let needed = self.sum_row[a].abs()
                    + self.trig_spread_axis(a)
                    + psi_max
                    + psi.max_freq(a.min(psi.dim - 1));
                let allowed = (dims[a] / 2) as i64;
                if needed >= allowed {
                    return Err(Error::GridTooCoarse {
                        n,
                        needed,
                        allowed,
                    });
                }
            }
            Ok(())
        }
    }
}

fn mat_vec_right(a: &[Vec<i64>], v: &[i64], overflow: &mut bool) -> Vec<i64> {
    // Row vector times matrix: (v A)_c = sum_r v_r A_{r c}.
    let dim = v.len();
    let mut out = vec![0i64; dim];
    for (c, slot) in out.iter_mut().enumerate() {
        let mut acc: i64 = 0;
        for r in 0..dim {
            let term = v[r].checked_mul(a[r][c]).unwrap_or_else(|| {
                *overflow = true;
                i64::MAX / 4
            });
            acc = acc.checked_add(term).unwrap_or_else(|| {
                *overflow = true;
                i64::MAX / 4
            });
        }
        *slot = acc;
    }
    out
}

/// Correlation c_n = <U^n psi, psi> for n = 0..n_max on a product grid
/// of side 2^grid_log2, with refinement-delta error bars (full grid vs
/// the even-index subgrid).
pub fn correlation_map(
    system: &CharacterSystem,
    psi: &FourierObservable,
    n_max: usize,
    grid_log2: usize,
    workers: usize,
) -> Result<CorrelationSeries> {
    assert!(n_max <= 1 << 16, "step count capped at 2^16");
    let dim = system.base_dim();
    if psi.dim != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: psi.dim,
        });
    }
    let dims = vec![1usize << grid_log2; dim];
    let total: usize = dims.iter().product();

    // Analytic grid validation for every step.
    let mut tracker = BandwidthTracker::new(system, psi);
    tracker.check(&dims, psi, 0)?;
    for n in 1..=n_max {
        tracker.advance();
        tracker.check(&dims, psi, n as i64)?;
    }

    let map = system.base_map();
    let psi_constant = psi.is_constant();
    let psi_c = psi.mean();
    let n_blocks = total.div_ceil(REDUCTION_BLOCK);

    // Per-block partial sums (full grid and even-index subgrid).
    let blocks: Vec<(Vec<Complex64>, Vec<Complex64>)> =
        par_map_indexed(n_blocks, workers, |blk| {
            let lo = blk * REDUCTION_BLOCK;
            let hi = (lo + REDUCTION_BLOCK).min(total);
            let mut acc = vec![Complex64::new(0.0, 0.0); n_max + 1];
            let mut acc_half = vec![Complex64::new(0.0, 0.0); n_max + 1];
            let mut coords = vec![0.0f64; dim];
            let mut idx_coords = vec![0usize; dim];
            for idx in lo..hi {
                decode_coords(idx, &dims, &mut coords);
                decode_indices(idx, &dims, &mut idx_coords);
                let in_half = idx_coords.iter().all(|&i| i % 2 == 0);
                let psi0_conj = if psi_constant {
                    psi_c.conj()
                } else {
                    psi.eval(&coords).conj()
                };
                let mut cur = coords.clone();
                let mut s_phase = 0.0f64;
                for n in 0..=n_max {
                    let term = if psi_constant {
                        Complex64::from_polar(1.0, TAU * s_phase) * psi_c * psi0_conj
                    } else {
                        Complex64::from_polar(1.0, TAU * s_phase) * psi.eval(&cur) * psi0_conj
                    };
                    acc[n] += term;
                    if in_half {
                        acc_half[n] += term;
                    }
                    if n < n_max {
                        s_phase = (s_phase + system.multiplier_lift(&cur)).rem_euclid(1.0);
                        map.apply(&mut cur);
                    }
                }
            }
            (acc, acc_half)
        });

    let half_total = total >> dim; // even indices along every axis
    let mut values = Vec::with_capacity(n_max + 1);
    let mut stderr = Vec::with_capacity(n_max + 1);
    let mut col = vec![Complex64::new(0.0, 0.0); n_blocks];
    let mut col_half = vec![Complex64::new(0.0, 0.0); n_blocks];
    for n in 0..=n_max {
        for (b, (acc, acc_half)) in blocks.iter().enumerate() {
            col[b] = acc[n];
            col_half[b] = acc_half[n];
        }
        let full = pairwise_sum_c(&col) / total as f64;
        let half = pairwise_sum_c(&col_half) / half_total as f64;
        values.push(full);
        stderr.push((full - half).norm());
    }
    Ok(CorrelationSeries {
        times: (0..=n_max).map(|n| n as f64).collect(),
        values,
        stderr,
        estimator: EstimatorMeta {
            method: "grid-quadrature".into(),
            samples: total,
            seed: 0,
            grid_log2,
        },
        system_desc: system.describe(),
    })
}

/// Single correlation value at a (possibly negative) step; used for
/// Hermitian-symmetry checks.
pub fn correlation_at(
    system: &CharacterSystem,
    psi: &FourierObservable,
    n: i64,
    grid_log2: usize,
) -> Result<Complex64> {
    let dim = system.base_dim();
    let dims = vec![1usize << grid_log2; dim];
    let total: usize = dims.iter().product();
    let map = system.base_map();
    let mut acc = Complex64::new(0.0, 0.0);
    let mut coords = vec![0.0f64; dim];
    for idx in 0..total {
        decode_coords(idx, &dims, &mut coords);
        let psi0_conj = psi.eval(&coords).conj();
        let mut cur = coords.clone();
        let mut s_phase = 0.0f64;
        if n >= 0 {
            for _ in 0..n {
                s_phase += system.multiplier_lift(&cur);
                map.apply(&mut cur);
            }
        } else {
            for _ in 0..(-n) {
                map.apply_inverse(&mut cur);
                s_phase -= system.multiplier_lift(&cur);
            }
        }
        acc += Complex64::from_polar(1.0, TAU * s_phase) * psi.eval(&cur) * psi0_conj;
    }
    Ok(acc / total as f64)
}
