//! Dynamics on tori: rotations, skew products over a rotation, and
//! Furstenberg transformations, with their character-subspace operators.
//!
//! Coordinates are turns (elements of [0,1)), reduced mod 1 after every
//! map application. Observables are finite trigonometric sums stored as
//! frequency -> coefficient maps (BTreeMap, so iteration order and
//! therefore floating-point results are deterministic).

use crate::error::{Error, Result};
use num_complex::Complex64;
use std::collections::BTreeMap;
use std::f64::consts::TAU;

/// Golden rotation number (sqrt(5) - 1) / 2: the default bounded-type
/// irrational for every shipped scenario.
pub const GOLDEN_ROTATION: f64 = 0.618_033_988_749_894_9;

/// Point on T^d, every coordinate in [0, 1).
#[derive(Debug, Clone, PartialEq)]
pub struct TorusPoint {
    pub coords: Vec<f64>,
}

impl TorusPoint {
    pub fn new(coords: Vec<f64>) -> Self {
        TorusPoint {
            coords: coords.into_iter().map(|c| c.rem_euclid(1.0)).collect(),
        }
    }

    pub fn zero(dim: usize) -> Self {
        TorusPoint {
            coords: vec![0.0; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }
}

/// Finite-support frequency-coefficient map on T^dim.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierObservable {
    pub dim: usize,
    pub coeffs: BTreeMap<Vec<i64>, Complex64>,
}

impl FourierObservable {
    pub fn zero(dim: usize) -> Self {
        FourierObservable {
            dim,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn constant(dim: usize, value: Complex64) -> Self {
        let mut coeffs = BTreeMap::new();
        if value != Complex64::new(0.0, 0.0) {
            coeffs.insert(vec![0i64; dim], value);
        }
        FourierObservable { dim, coeffs }
    }

    /// Single character e^{2 pi i m.x}.
    pub fn character(dim: usize, m: Vec<i64>) -> Self {
        assert_eq!(m.len(), dim);
        let mut coeffs = BTreeMap::new();
        coeffs.insert(m, Complex64::new(1.0, 0.0));
        FourierObservable { dim, coeffs }
    }

    /// Real trig polynomial from half-spectrum modes: each (m, c) also
    /// contributes conj(c) at -m.
    pub fn real_from_modes(dim: usize, modes: &[(Vec<i64>, Complex64)]) -> Self {
        let mut coeffs: BTreeMap<Vec<i64>, Complex64> = BTreeMap::new();
        for (m, c) in modes {
            assert_eq!(m.len(), dim);
            *coeffs.entry(m.clone()).or_insert(Complex64::new(0.0, 0.0)) += c;
            let neg: Vec<i64> = m.iter().map(|v| -v).collect();
            *coeffs.entry(neg).or_insert(Complex64::new(0.0, 0.0)) += c.conj();
        }
        coeffs.retain(|_, c| c.norm() > 0.0);
        FourierObservable { dim, coeffs }
    }

    /// `amp * cos(2 pi m.x)`.
    pub fn cosine(dim: usize, m: Vec<i64>, amp: f64) -> Self {
        Self::real_from_modes(dim, &[(m, Complex64::new(0.5 * amp, 0.0))])
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.keys().all(|m| m.iter().all(|&v| v == 0))
    }

    /// Hermitian symmetry of the coefficients (real-valuedness).
    pub fn is_real_valued(&self) -> bool {
        self.coeffs.iter().all(|(m, c)| {
            let neg: Vec<i64> = m.iter().map(|v| -v).collect();
            match self.coeffs.get(&neg) {
                Some(cn) => (cn - c.conj()).norm() < 1e-14,
                None => c.norm() < 1e-14,
            }
        })
    }

    pub fn eval(&self, x: &[f64]) -> Complex64 {
        debug_assert_eq!(x.len(), self.dim);
        let mut acc = Complex64::new(0.0, 0.0);
        for (m, c) in &self.coeffs {
            let phase: f64 = m.iter().zip(x).map(|(&mi, &xi)| mi as f64 * xi).sum();
            let (s, cs) = (TAU * phase).sin_cos();
            acc += c * Complex64::new(cs, s);
        }
        acc
    }

    pub fn eval_real(&self, x: &[f64]) -> f64 {
        self.eval(x).re
    }

    /// Frequency multiplication by `2 pi m_axis`: the self-adjoint
    /// derivative operator `-i d/dx_axis` on each mode.
    pub fn derivative_p(&self, axis: usize) -> FourierObservable {
        let coeffs = self
            .coeffs
            .iter()
            .filter_map(|(m, c)| {
                let factor = TAU * m[axis] as f64;
                if factor == 0.0 {
                    None
                } else {
                    Some((m.clone(), c * factor))
                }
            })
            .collect();
        FourierObservable {
            dim: self.dim,
            coeffs,
        }
    }

    pub fn scale(&self, s: f64) -> FourierObservable {
        FourierObservable {
            dim: self.dim,
            coeffs: self.coeffs.iter().map(|(m, c)| (m.clone(), c * s)).collect(),
        }
    }

    /// Mean (the coefficient of the zero frequency).
    pub fn mean(&self) -> Complex64 {
        self.coeffs
            .get(&vec![0i64; self.dim])
            .copied()
            .unwrap_or(Complex64::new(0.0, 0.0))
    }

    /// sum |c_m|^2 (the squared L2 norm under probability Haar measure).
    pub fn l2_norm_sq(&self) -> f64 {
        self.coeffs.values().map(|c| c.norm_sqr()).sum()
    }

    /// Triangle-inequality sup bound: sum |c_m|.
    pub fn sup_bound(&self) -> f64 {
        self.coeffs.values().map(|c| c.norm()).sum()
    }

    /// Largest |m_axis| in the support.
    pub fn max_freq(&self, axis: usize) -> i64 {
        self.coeffs
            .keys()
            .map(|m| m[axis].abs())
            .max()
            .unwrap_or(0)
    }
}

/// Skew product over the circle rotation: base x -> x + y, fiber
/// multiplier exp(2 pi i (b x + eta(x))) evaluated through the character
/// of index `k`.
#[derive(Debug, Clone)]
pub struct SkewProductSpec {
    pub rotation: f64,
    pub b: i64,
    pub eta_lift: FourierObservable,
    pub k: i64,
}

impl SkewProductSpec {
    pub fn new(rotation: f64, b: i64, eta_lift: FourierObservable, k: i64) -> Result<Self> {
        if b == 0 {
            return Err(Error::InvalidSpec(
                "b = 0 makes the composed character trivial on the homomorphism part".into(),
            ));
        }
        if k == 0 {
            return Err(Error::InvalidSpec("character index k must be nonzero".into()));
        }
        if !(0.0 < rotation && rotation < 1.0) {
            return Err(Error::InvalidSpec(format!(
                "rotation number {rotation} must lie in (0, 1)"
            )));
        }
        if eta_lift.dim != 1 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                got: eta_lift.dim,
            });
        }
        if !eta_lift.is_real_valued() {
            return Err(Error::InvalidSpec("eta lift must be real-valued".into()));
        }
        Ok(SkewProductSpec {
            rotation,
            b,
            eta_lift,
            k,
        })
    }

    /// Real lift of the fiber map: phi(x) = b x + eta(x), in turns.
    pub fn phi_lift(&self, x: f64) -> f64 {
        self.b as f64 * x + self.eta_lift.eval_real(&[x])
    }

    /// |xi_0| = 2 pi |k b y|: the derivative of the composed character
    /// along the translation flow at time zero.
    pub fn xi0_abs(&self) -> f64 {
        (TAU * (self.k * self.b) as f64 * self.rotation).abs()
    }

    /// Real lift of the composed character's eta part: 2 pi k eta.
    pub fn eta_tilde(&self) -> FourierObservable {
        self.eta_lift.scale(TAU * self.k as f64)
    }
}

/// Triangular affine-plus-smooth map on T^d.
#[derive(Debug, Clone)]
pub struct FurstenbergSpec {
    pub d: usize,
    pub rotation: f64,
    /// Lower-triangular integer coefficients; `b[r][c]` multiplies x_{c+1}
    /// in the update of x_{r+1} (only entries with c < r are used).
    pub b: Vec<Vec<i64>>,
    /// `h[j-1]` is the smooth summand of the update of x_{j+1}, a real
    /// trig polynomial on T^j, for j = 1 .. d-1.
    pub h: Vec<FourierObservable>,
    /// Active subspace: row index j in 2..=d and character index k != 0.
    pub j: usize,
    pub k: i64,
}

impl FurstenbergSpec {
    pub fn new(
        d: usize,
        rotation: f64,
        b: Vec<Vec<i64>>,
        h: Vec<FourierObservable>,
        j: usize,
        k: i64,
    ) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidSpec("Furstenberg dimension must be >= 2".into()));
        }
        if !(0.0 < rotation && rotation < 1.0) {
            return Err(Error::InvalidSpec(format!(
                "rotation number {rotation} must lie in (0, 1)"
            )));
        }
        if b.len() != d || b.iter().any(|row| row.len() != d) {
            return Err(Error::InvalidSpec("coefficient matrix must be d x d".into()));
        }
        for l in 1..d {
            if b[l][l - 1] == 0 {
                return Err(Error::InvalidSpec(format!(
                    "subdiagonal coefficient b[{}][{}] must be nonzero",
                    l + 1,
                    l
                )));
            }
        }
        for (r, row) in b.iter().enumerate() {
            for (c, &v) in row.iter().enumerate() {
                if c >= r && v != 0 {
                    return Err(Error::InvalidSpec(
                        "coefficients must be strictly lower triangular".into(),
                    ));
                }
            }
        }
        if h.len() != d - 1 {
            return Err(Error::InvalidSpec(format!(
                "need {} smooth summands, got {}",
                d - 1,
                h.len()
            )));
        }
        for (idx, hj) in h.iter().enumerate() {
            if hj.dim != idx + 1 {
                return Err(Error::DimensionMismatch {
                    expected: idx + 1,
                    got: hj.dim,
                });
            }
            if !hj.is_real_valued() {
                return Err(Error::InvalidSpec("smooth summands must be real-valued".into()));
            }
        }
        if !(2..=d).contains(&j) {
            return Err(Error::InvalidSpec(format!("active row {j} out of range 2..={d}")));
        }
        if k == 0 {
            return Err(Error::InvalidSpec("character index k must be nonzero".into()));
        }
        Ok(FurstenbergSpec {
            d,
            rotation,
            b,
            h,
            j,
            k,
        })
    }

    /// Convenience: d = 2 with a single integer coefficient.
    pub fn dim2(rotation: f64, b21: i64, h1: FourierObservable, k: i64) -> Result<Self> {
        Self::new(
            2,
            rotation,
            vec![vec![0, 0], vec![b21, 0]],
            vec![h1],
            2,
            k,
        )
    }

    /// Real lift of the active fiber cocycle phi_j on T^{j-1}.
    pub fn phi_lift(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.j - 1);
        let row = self.j - 1; // 0-indexed row of the update for x_j
        let mut v: f64 = (0..self.j - 1).map(|c| self.b[row][c] as f64 * x[c]).sum();
        v += self.h[self.j - 2].eval_real(x);
        v
    }

    /// |H| = 2 pi |k b_{j,j-1}| for the active subspace.
    pub fn h_constant_abs(&self) -> f64 {
        (TAU * (self.k * self.b[self.j - 1][self.j - 2]) as f64).abs()
    }

    /// The base map T_{j-1} of the active subspace.
    pub fn base_map(&self) -> TorusMap {
        TorusMap::furstenberg_of_dim(self, self.j - 1)
    }
}

/// A torus map that can be iterated forward and backward exactly.
#[derive(Debug, Clone)]
pub enum TorusMap {
    /// x -> x + y on the circle.
    Rotation { y: f64 },
    /// Triangular Furstenberg map of the given dimension.
    Furstenberg {
        dim: usize,
        y: f64,
        b: Vec<Vec<i64>>,
        h: Vec<FourierObservable>,
    },
}

impl TorusMap {
    pub fn rotation(y: f64) -> Self {
        TorusMap::Rotation { y }
    }

    /// Restriction of a Furstenberg map to its first `dim` coordinates
    /// (well-defined by triangularity).
    pub fn furstenberg_of_dim(spec: &FurstenbergSpec, dim: usize) -> Self {
        assert!(dim >= 1 && dim <= spec.d);
        if dim == 1 {
            return TorusMap::Rotation { y: spec.rotation };
        }
        TorusMap::Furstenberg {
            dim,
            y: spec.rotation,
            b: spec.b[..dim].iter().map(|row| row[..dim].to_vec()).collect(),
            h: spec.h[..dim - 1].to_vec(),
        }
    }

    pub fn full(spec: &FurstenbergSpec) -> Self {
        Self::furstenberg_of_dim(spec, spec.d)
    }

    pub fn dim(&self) -> usize {
        match self {
            TorusMap::Rotation { .. } => 1,
            TorusMap::Furstenberg { dim, .. } => *dim,
        }
    }

    /// Apply in place (all right-hand sides use the pre-image coords).
    pub fn apply(&self, x: &mut [f64]) {
        match self {
            TorusMap::Rotation { y } => x[0] = (x[0] + y).rem_euclid(1.0),
            TorusMap::Furstenberg { dim, y, b, h } => {
                let old = x.to_vec();
                x[0] = (old[0] + y).rem_euclid(1.0);
                for r in 1..*dim {
                    let mut v = old[r];
                    for c in 0..r {
                        v += b[r][c] as f64 * old[c];
                    }
                    v += h[r - 1].eval_real(&old[..r]);
                    x[r] = v.rem_euclid(1.0);
                }
            }
        }
    }

    /// Inverse map in place, by back-substitution.
    pub fn apply_inverse(&self, x: &mut [f64]) {
        match self {
            TorusMap::Rotation { y } => x[0] = (x[0] - y).rem_euclid(1.0),
            TorusMap::Furstenberg { dim, y, b, h } => {
                let mut pre = vec![0.0f64; *dim];
                pre[0] = (x[0] - y).rem_euclid(1.0);
                for r in 1..*dim {
                    let mut v = x[r];
                    for c in 0..r {
                        v -= b[r][c] as f64 * pre[c];
                    }
                    v -= h[r - 1].eval_real(&pre[..r]);
                    pre[r] = v.rem_euclid(1.0);
                }
                x.copy_from_slice(&pre);
            }
        }
    }
}

/// Full Furstenberg map application (dimension-checked).
pub fn furstenberg_apply(spec: &FurstenbergSpec, x: &TorusPoint) -> Result<TorusPoint> {
    if x.dim() != spec.d {
        return Err(Error::DimensionMismatch {
            expected: spec.d,
            got: x.dim(),
        });
    }
    let mut coords = x.coords.clone();
    TorusMap::full(spec).apply(&mut coords);
    Ok(TorusPoint { coords })
}

/// Iteration direction for Birkhoff sums.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Backward,
}

/// Birkhoff average `(1/n) sum_{l=1..n} f(F^{+-l} x)`.
pub fn birkhoff_sum_map(
    f: &FourierObservable,
    map: &TorusMap,
    x: &TorusPoint,
    n: usize,
    direction: Direction,
) -> Complex64 {
    assert!(n >= 1);
    assert_eq!(f.dim, map.dim());
    assert_eq!(x.dim(), map.dim());
    let mut cur = x.coords.clone();
    let mut acc = Complex64::new(0.0, 0.0);
    for _ in 0..n {
        match direction {
            Direction::Forward => map.apply(&mut cur),
            Direction::Backward => map.apply_inverse(&mut cur),
        }
        acc += f.eval(&cur);
    }
    acc / n as f64
}

/// The real lift eta-tilde of the composed character: 2 pi k eta.
pub fn eta_tilde(spec: &SkewProductSpec) -> FourierObservable {
    spec.eta_tilde()
}
