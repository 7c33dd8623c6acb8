//! Matrix-group foundations for `GL_n(C)`.
//!
//! The Borel pair is fixed once and for all: `B+` is upper triangular,
//! `B-` lower triangular, `T = B+ ∩ B-` the invertible diagonal matrices and
//! `U±` the unitriangular subgroups. The invariant bilinear form on `gl_n`
//! is the trace form `(A, B) = tr(AB)`.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;

/// Relative tolerance for structural checks (invertibility, triangularity).
pub const STRUCTURE_TOL: f64 = 1e-12;
/// Absolute tolerance for the integer test behind affine-regularity.
pub const AFFINE_TOL: f64 = 1e-9;

pub const I: C64 = C64::new(0.0, 1.0);

/// Which of the two opposite Borel subgroups a triangular matrix lives in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Triangle {
    /// `B+`: upper triangular.
    Upper,
    /// `B-`: lower triangular.
    Lower,
}

impl Triangle {
    pub fn opposite(self) -> Self {
        match self {
            Triangle::Upper => Triangle::Lower,
            Triangle::Lower => Triangle::Upper,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Triangle::Upper => "upper",
            Triangle::Lower => "lower",
        }
    }

    /// Strictly triangular positions `(row, col)` in row-major order.
    pub fn strict_positions(self, n: usize) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(n * (n - 1) / 2);
        for i in 0..n {
            for j in 0..n {
                let keep = match self {
                    Triangle::Upper => j > i,
                    Triangle::Lower => j < i,
                };
                if keep {
                    out.push((i, j));
                }
            }
        }
        out
    }
}

/// The group `GL_n(C)` together with its fixed Borel/torus conventions.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GroupContext {
    n: usize,
}

impl GroupContext {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::SizeMismatch {
                expected: 1,
                found: 0,
            });
        }
        Ok(Self { n })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.n * self.n
    }

    pub fn identity(&self) -> CMat {
        CMat::identity(self.n, self.n)
    }

    /// Elementary matrix `E_ij`.
    pub fn elementary(&self, i: usize, j: usize) -> CMat {
        elementary(self.n, i, j)
    }

    /// Basis `E_ij` of `gl_n` in row-major order.
    pub fn algebra_basis(&self) -> Vec<CMat> {
        algebra_basis(self.n)
    }

    /// Basis `E_ii` of the Cartan subalgebra.
    pub fn torus_basis(&self) -> Vec<CMat> {
        (0..self.n).map(|i| self.elementary(i, i)).collect()
    }
}

pub fn elementary(n: usize, i: usize, j: usize) -> CMat {
    let mut m = CMat::zeros(n, n);
    m[(i, j)] = C64::new(1.0, 0.0);
    m
}

pub fn algebra_basis(n: usize) -> Vec<CMat> {
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            out.push(elementary(n, i, j));
        }
    }
    out
}

/// Row-major flattening of a square matrix; the coordinates of `X` in the
/// basis returned by [`algebra_basis`].
pub fn flatten(m: &CMat) -> Vec<C64> {
    let n = m.nrows();
    let mut out = Vec::with_capacity(n * m.ncols());
    for i in 0..n {
        for j in 0..m.ncols() {
            out.push(m[(i, j)]);
        }
    }
    out
}

pub fn unflatten(n: usize, v: &[C64]) -> CMat {
    CMat::from_fn(n, n, |i, j| v[i * n + j])
}

pub fn max_norm(m: &CMat) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// `tr(AB)` without forming the product.
pub fn tr_mul(a: &CMat, b: &CMat) -> C64 {
    let n = a.nrows();
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..n {
        for j in 0..a.ncols() {
            acc += a[(i, j)] * b[(j, i)];
        }
    }
    acc
}

pub fn commutator(a: &CMat, b: &CMat) -> CMat {
    a * b - b * a
}

pub fn diag_matrix(entries: &[C64]) -> CMat {
    let n = entries.len();
    CMat::from_fn(n, n, |i, j| if i == j { entries[i] } else { C64::new(0.0, 0.0) })
}

/// Matrix exponential.
pub fn expm(m: &CMat) -> CMat {
    m.clone().exp()
}

pub fn inverse(m: &CMat, what: &'static str) -> Result<CMat> {
    if !is_invertible(m) {
        return Err(Error::Singular { what });
    }
    m.clone().try_inverse().ok_or(Error::Singular { what })
}

pub fn is_invertible(m: &CMat) -> bool {
    let scale = max_norm(m);
    if scale == 0.0 {
        return false;
    }
    let det = m.clone().determinant().norm();
    det > STRUCTURE_TOL * scale.powi(m.nrows() as i32)
}

pub fn is_triangular(m: &CMat, tri: Triangle) -> bool {
    let scale = max_norm(m).max(1.0);
    let n = m.nrows();
    for i in 0..n {
        for j in 0..n {
            let off = match tri {
                Triangle::Upper => j < i,
                Triangle::Lower => j > i,
            };
            if off && m[(i, j)].norm() > STRUCTURE_TOL * scale {
                return false;
            }
        }
    }
    true
}

pub fn is_diagonal(m: &CMat) -> bool {
    is_triangular(m, Triangle::Upper) && is_triangular(m, Triangle::Lower)
}

/// An invertible `n×n` complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct GroupElement(CMat);

impl GroupElement {
    pub fn new(m: CMat) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::SizeMismatch {
                expected: m.nrows(),
                found: m.ncols(),
            });
        }
        if !is_invertible(&m) {
            return Err(Error::Singular {
                what: "group element",
            });
        }
        Ok(Self(m))
    }

    pub fn identity(n: usize) -> Self {
        Self(CMat::identity(n, n))
    }

    pub fn matrix(&self) -> &CMat {
        &self.0
    }

    pub fn into_matrix(self) -> CMat {
        self.0
    }

    pub fn n(&self) -> usize {
        self.0.nrows()
    }

    pub fn inverse(&self) -> Self {
        // Invertibility was checked on construction.
        Self(self.0.clone().try_inverse().expect("checked invertible"))
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self(&self.0 * &other.0)
    }

    /// `Ad_g X = g X g^-1`.
    pub fn adjoint(&self, x: &AlgebraElement) -> AlgebraElement {
        AlgebraElement(&self.0 * &x.0 * self.inverse().0)
    }
}

/// An arbitrary element of `gl_n(C)`.
#[derive(Clone, Debug, PartialEq)]
pub struct AlgebraElement(pub CMat);

impl AlgebraElement {
    pub fn matrix(&self) -> &CMat {
        &self.0
    }

    pub fn exp(&self) -> GroupElement {
        GroupElement(expm(&self.0))
    }
}

/// A diagonal element `Λ` of the Cartan subalgebra.
#[derive(Clone, Debug, PartialEq)]
pub struct CartanElement(pub Vec<C64>);

/// Result of [`cartan_regularity`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Regularity {
    pub regular: bool,
    pub affine_regular: bool,
}

impl CartanElement {
    pub fn zero(n: usize) -> Self {
        Self(vec![C64::new(0.0, 0.0); n])
    }

    pub fn from_real(entries: &[f64]) -> Self {
        Self(entries.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn n(&self) -> usize {
        self.0.len()
    }

    pub fn entries(&self) -> &[C64] {
        &self.0
    }

    pub fn to_matrix(&self) -> CMat {
        diag_matrix(&self.0)
    }

    /// `exp(c Λ)` as a diagonal matrix.
    pub fn exp_scaled(&self, c: C64) -> CMat {
        let e: Vec<C64> = self.0.iter().map(|&x| (c * x).exp()).collect();
        diag_matrix(&e)
    }

    /// Root value `α_ij(Λ) = Λ_ii − Λ_jj`.
    pub fn root(&self, i: usize, j: usize) -> C64 {
        self.0[i] - self.0[j]
    }

    /// First pair of coinciding entries, if any.
    pub fn first_coincidence(&self) -> Option<(usize, usize)> {
        let n = self.n();
        for i in 0..n {
            for j in (i + 1)..n {
                let scale = self.0[i].norm().max(self.0[j].norm()).max(1.0);
                if self.root(i, j).norm() <= STRUCTURE_TOL * scale {
                    return Some((i, j));
                }
            }
        }
        None
    }

    /// First pair of entries differing by an integer, if any.
    pub fn first_integer_root(&self) -> Option<(usize, usize)> {
        let n = self.n();
        for i in 0..n {
            for j in (i + 1)..n {
                let r = self.root(i, j);
                let dist = (r.re - r.re.round()).abs() + r.im.abs();
                if dist <= AFFINE_TOL {
                    return Some((i, j));
                }
            }
        }
        None
    }

    pub fn require_affine_regular(&self) -> Result<()> {
        match self.first_integer_root() {
            Some((i, j)) => Err(Error::NotAffineRegular { i, j }),
            None => Ok(()),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }
}

/// The trace form `(A, B) = tr(AB)`.
pub fn trace_form(a: &AlgebraElement, b: &AlgebraElement) -> Result<C64> {
    if a.0.shape() != b.0.shape() {
        return Err(Error::SizeMismatch {
            expected: a.0.nrows(),
            found: b.0.nrows(),
        });
    }
    Ok(tr_mul(&a.0, &b.0))
}

/// Projection `gl_n → t` along the root spaces (the diagonal).
pub fn delta_cartan(x: &AlgebraElement) -> CartanElement {
    CartanElement(x.0.diagonal().iter().copied().collect())
}

/// The homomorphism `B± → T` with kernel `U±`.
pub fn delta_borel(b: &GroupElement) -> Result<GroupElement> {
    let m = b.matrix();
    if !is_triangular(m, Triangle::Upper) && !is_triangular(m, Triangle::Lower) {
        return Err(Error::NotTriangular {
            what: "Borel element",
            expected: "upper or lower",
        });
    }
    let d: Vec<C64> = m.diagonal().iter().copied().collect();
    GroupElement::new(diag_matrix(&d))
}

/// `ε = exp(πiΛ/(k−1))`.
pub fn epsilon(lambda: &CartanElement, k: usize) -> Result<GroupElement> {
    if k < 2 {
        return Err(Error::InvalidPoleOrder { k, min: 2 });
    }
    Ok(GroupElement(lambda.exp_scaled(PI * I / (k as f64 - 1.0))))
}

pub fn cartan_regularity(lambda: &CartanElement) -> Regularity {
    Regularity {
        regular: lambda.first_coincidence().is_none(),
        affine_regular: lambda.first_integer_root().is_none(),
    }
}

/// Principal-branch `log(d) / (2πi)` of an invertible diagonal matrix, so
/// that `exp(2πi Λ)` reproduces `d`.
pub fn diagonal_log_2pii(d: &CMat) -> CartanElement {
    CartanElement(d.diagonal().iter().map(|z| z.ln() / (2.0 * PI * I)).collect())
}

/// Gauss decomposition `M = L·D·U` without pivoting: `L` unit lower,
/// `D` diagonal, `U` unit upper. Fails when a leading principal minor
/// vanishes.
pub fn ldu(m: &CMat) -> Result<(CMat, CMat, CMat)> {
    let n = m.nrows();
    let scale = max_norm(m).max(f64::MIN_POSITIVE);
    let mut l = CMat::identity(n, n);
    let mut u = m.clone();
    for col in 0..n {
        let pivot = u[(col, col)];
        if pivot.norm() <= STRUCTURE_TOL * scale {
            return Err(Error::FactorizationFailed { index: col });
        }
        for row in (col + 1)..n {
            let f = u[(row, col)] / pivot;
            l[(row, col)] = f;
            for c in col..n {
                let v = u[(col, c)];
                u[(row, c)] -= f * v;
            }
        }
    }
    let d = CMat::from_fn(n, n, |i, j| if i == j { u[(i, i)] } else { C64::new(0.0, 0.0) });
    let mut unit_u = u.clone();
    for i in 0..n {
        let p = u[(i, i)];
        for j in 0..n {
            unit_u[(i, j)] = if j < i { C64::new(0.0, 0.0) } else { u[(i, j)] / p };
        }
    }
    Ok((l, d, unit_u))
}

/// The opposite Gauss decomposition `M = U·D·L` (`U` unit upper, `L` unit
/// lower), obtained from [`ldu`] of the index-reversed matrix.
pub fn udl(m: &CMat) -> Result<(CMat, CMat, CMat)> {
    let n = m.nrows();
    let rev = |a: &CMat| CMat::from_fn(n, n, |i, j| a[(n - 1 - i, n - 1 - j)]);
    let (l, d, u) = ldu(&rev(m)).map_err(|e| match e {
        Error::FactorizationFailed { index } => Error::FactorizationFailed {
            index: n - 1 - index,
        },
        other => other,
    })?;
    Ok((rev(&l), rev(&d), rev(&u)))
}
