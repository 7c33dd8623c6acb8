//! Quasi-Hamiltonian spaces presented in holomorphic charts.
//!
//! A point is a list of ambient matrices (its "parts"). Every chart is
//! centered at the point it is used at, so chart coordinates `x = 0` always
//! describe the point itself and tangent vectors are plain coordinate
//! vectors. Two-forms, moment maps and actions are evaluated on jets of the
//! parts, which gives exact derivatives in every direction.

mod conjugacy;
mod double;
mod fission;
mod fusion;
mod groupoid;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jets::{self, Jet, SJet, TangentVector};
use crate::lie::{self, CMat, C64};
use crate::sample::Rng;

pub use conjugacy::{intrinsic_form, intrinsic_form_on_tangents, ConjugacyClass};
pub use double::Double;
pub use fission::{
    de_to_stokes, dual_group_view, omega_alt, omega_stokes, stokes_to_de, stokes_to_de_parts, DualGroupPoint, Fission,
    FissionPoint, FissionSimple, Orientation, StokesPoint,
};
pub use fusion::{fuse, Fusion};
pub use groupoid::{groupoid_space, groupoid_tuple, sample_unit_level, solve_moment_one_pair, GroupoidTuple};

/// The group acting through one factor.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FactorKind {
    /// The full group `G = GL_n`.
    G,
    /// The diagonal torus `T`.
    T,
}

impl FactorKind {
    pub fn name(self) -> &'static str {
        match self {
            FactorKind::G => "G",
            FactorKind::T => "T",
        }
    }

    /// Basis of the factor's Lie algebra.
    pub fn algebra_basis(self, n: usize) -> Vec<CMat> {
        match self {
            FactorKind::G => lie::algebra_basis(n),
            FactorKind::T => (0..n).map(|i| lie::elementary(n, i, i)).collect(),
        }
    }

    pub fn contains(self, x: &CMat) -> bool {
        match self {
            FactorKind::G => true,
            FactorKind::T => lie::is_diagonal(x),
        }
    }
}

/// Ambient data of a point.
#[derive(Clone, Debug, PartialEq)]
pub struct Point {
    pub parts: Vec<CMat>,
}

impl Point {
    pub fn new(parts: Vec<CMat>) -> Self {
        Self { parts }
    }

    pub fn from_jets(m: &[Jet]) -> Self {
        Self {
            parts: m.iter().map(|j| j.value().clone()).collect(),
        }
    }

    fn constant_jets(&self) -> Vec<Jet> {
        self.parts.iter().map(|p| Jet::constant(p.clone())).collect()
    }
}

/// A quasi-Hamiltonian space: a chart, an invariant two-form, and one
/// action and moment map per acting factor.
pub trait QhSpace: Send + Sync {
    fn name(&self) -> String;
    fn n(&self) -> usize;
    /// Complex dimension of the chart.
    fn dim(&self) -> usize;
    fn factors(&self) -> Vec<FactorKind>;
    fn coordinate_labels(&self) -> Vec<String>;
    fn part_count(&self) -> usize;

    /// Jets of the parts at chart coordinates `x` of the chart centered at `p`.
    fn embed(&self, p: &Point, x: &[SJet]) -> Result<Vec<Jet>>;

    /// Chart coordinates of an ambient tangent vector (derivatives of the
    /// parts) at `p`. Inverts the differential of [`QhSpace::embed`] at 0.
    fn tangent_coords(&self, p: &Point, dparts: &[CMat]) -> Result<Vec<C64>>;

    /// `ω(∂u, ∂v)` on embedded jets, where `u`, `v` are jet slots. Only the
    /// components of the result that avoid slots `u` and `v` are meaningful.
    fn two_form(&self, m: &[Jet], u: usize, v: usize) -> Result<SJet>;

    /// Summands whose total is [`QhSpace::two_form`]. Checks use their sizes
    /// as the rounding scale when the summands cancel.
    fn two_form_terms(&self, m: &[Jet], u: usize, v: usize) -> Result<Vec<SJet>> {
        Ok(vec![self.two_form(m, u, v)?])
    }

    /// Moment map of a factor on embedded jets.
    fn moment(&self, m: &[Jet], factor: usize) -> Result<Jet>;

    /// Inverse of the moment jet. Spaces whose moment is a product of
    /// explicitly invertible pieces override this so that checks never
    /// invert an ill-conditioned matrix.
    fn moment_inverse(&self, m: &[Jet], factor: usize) -> Result<Jet> {
        inv(&self.moment(m, factor)?, "moment")
    }

    /// The moment as a word `L_1 ⋯ L_r` of letters paired with their
    /// inverses. Only used to evaluate `μ*η` stably (see
    /// [`jets::eta_word`]); spaces whose moment is a product of well
    /// conditioned pieces should list them.
    fn moment_word(&self, m: &[Jet], factor: usize) -> Result<Vec<(Jet, Jet)>> {
        Ok(vec![(self.moment(m, factor)?, self.moment_inverse(m, factor)?)])
    }

    /// Action of a group element (given as a jet) of a factor on parts.
    fn act(&self, factor: usize, g: &Jet, m: &[Jet]) -> Result<Vec<Jet>>;

    fn sample_point(&self, rng: &mut Rng) -> Result<Point>;

    /// Structural constraints on a point (triangularity, torus parts, ...).
    fn validate(&self, p: &Point) -> Result<()>;
}

pub(crate) fn require_factor(space: &dyn QhSpace, factor: usize) -> Result<FactorKind> {
    let f = space.factors();
    f.get(factor).copied().ok_or(Error::NoSuchFactor {
        index: factor,
        count: f.len(),
    })
}

pub(crate) fn require_parts(p: &Point, count: usize) -> Result<()> {
    if p.parts.len() != count {
        return Err(Error::InvalidPoint(format!("expected {count} parts, found {}", p.parts.len())));
    }
    Ok(())
}

/// Embedded jets with the given directions seeded at the center.
pub fn embed_dirs(space: &dyn QhSpace, p: &Point, dirs: &[&[C64]]) -> Result<Vec<Jet>> {
    let zero = vec![C64::new(0.0, 0.0); space.dim()];
    space.embed(p, &jets::seed(&zero, dirs))
}

/// `ω_p(X, Y)`.
pub fn omega(space: &dyn QhSpace, p: &Point, x: &[C64], y: &[C64]) -> Result<C64> {
    let m = embed_dirs(space, p, &[x, y])?;
    Ok(space.two_form(&m, 0, 1)?.value())
}

/// Gram matrix `Ω_ab = ω(∂a, ∂b)` of the two-form at `p`.
pub fn gram(space: &dyn QhSpace, p: &Point) -> Result<CMat> {
    let dim = space.dim();
    let mut out = CMat::zeros(dim, dim);
    for a in 0..dim {
        for b in (a + 1)..dim {
            let w = omega(space, p, &jets::unit(dim, a), &jets::unit(dim, b))?;
            out[(a, b)] = w;
            out[(b, a)] = -w;
        }
    }
    Ok(out)
}

/// `Ω v` for a Gram matrix and a coordinate vector.
pub fn apply(gram: &CMat, v: &[C64]) -> Vec<C64> {
    (0..gram.nrows()).map(|a| (0..v.len()).map(|b| gram[(a, b)] * v[b]).sum()).collect()
}

pub fn moment_at(space: &dyn QhSpace, p: &Point, factor: usize) -> Result<CMat> {
    require_factor(space, factor)?;
    Ok(space.moment(&p.constant_jets(), factor)?.value().clone())
}

pub fn moment_inverse_at(space: &dyn QhSpace, p: &Point, factor: usize) -> Result<CMat> {
    require_factor(space, factor)?;
    Ok(space.moment_inverse(&p.constant_jets(), factor)?.value().clone())
}

/// `dμ(v)` for one factor.
pub fn moment_derivative(space: &dyn QhSpace, p: &Point, factor: usize, v: &[C64]) -> Result<CMat> {
    require_factor(space, factor)?;
    let m = embed_dirs(space, p, &[v])?;
    Ok(space.moment(&m, factor)?.first(0).clone())
}

/// `g · p` for a group element of the given factor.
pub fn act_point(space: &dyn QhSpace, factor: usize, g: &CMat, p: &Point) -> Result<Point> {
    require_factor(space, factor)?;
    let moved = space.act(factor, &Jet::constant(g.clone()), &p.constant_jets())?;
    Ok(Point::from_jets(&moved))
}

/// `v_X = −d/dt (e^{tX} · p)` at `t = 0`, in chart coordinates.
pub fn fundamental_vector(space: &dyn QhSpace, factor: usize, x: &CMat, p: &Point) -> Result<TangentVector> {
    let kind = require_factor(space, factor)?;
    jets::require_size(x, space.n())?;
    if !kind.contains(x) {
        return Err(Error::NotInFactorAlgebra);
    }
    let moved = space.act(factor, &Jet::infinitesimal(x, 0), &p.constant_jets())?;
    let d: Vec<CMat> = moved.iter().map(|j| -j.first(0)).collect();
    Ok(TangentVector(space.tangent_coords(p, &d)?))
}

/// The point `g · p` and the pushforward of `v` to it, in the chart at `g · p`.
pub fn transport(space: &dyn QhSpace, factor: usize, g: &CMat, p: &Point, v: &[C64]) -> Result<(Point, TangentVector)> {
    require_factor(space, factor)?;
    let m = embed_dirs(space, p, &[v])?;
    let moved = space.act(factor, &Jet::constant(g.clone()), &m)?;
    let q = Point::from_jets(&moved);
    let d: Vec<CMat> = moved.iter().map(|j| j.first(0).clone()).collect();
    let coords = space.tangent_coords(&q, &d)?;
    Ok((q, TangentVector(coords)))
}

// Chart building blocks shared by the concrete spaces.

/// `c0 · exp(Σ x_ab E_ab)` (left-translated exponential coordinates).
pub(crate) fn group_chart(c0: &CMat, x: &[SJet]) -> Jet {
    let n = c0.nrows();
    let y = Jet::from_entries(n, |i, j| x[i * n + j]);
    &Jet::constant(c0.clone()) * &y.exp()
}

/// Coordinates of `dc` in the chart of [`group_chart`]: entries of `c0⁻¹ dc`.
pub(crate) fn group_coords(c0: &CMat, dc: &CMat) -> Result<Vec<C64>> {
    let inv = lie::inverse(c0, "group part")?;
    Ok(lie::flatten(&(inv * dc)))
}

/// `u0 + Σ x E_ij` over the strictly triangular positions of `tri`.
pub(crate) fn strict_chart(u0: &CMat, tri: lie::Triangle, x: &[SJet]) -> Jet {
    let n = u0.nrows();
    let gens: Vec<CMat> = tri.strict_positions(n).into_iter().map(|(i, j)| lie::elementary(n, i, j)).collect();
    Jet::affine(u0, &gens, x)
}

pub(crate) fn strict_entries(m: &CMat, tri: lie::Triangle) -> Vec<C64> {
    tri.strict_positions(m.nrows()).into_iter().map(|(i, j)| m[(i, j)]).collect()
}

/// `diag(λ0) + diag(x)`.
pub(crate) fn diag_chart(l0: &CMat, x: &[SJet]) -> Jet {
    let entries: Vec<SJet> = l0.diagonal().iter().zip(x).map(|(l, xi)| SJet::constant(*l) + *xi).collect();
    Jet::from_diagonal(&entries)
}

pub(crate) fn matrix_labels(prefix: &str, n: usize) -> Vec<String> {
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            out.push(format!("{prefix}[{}{}]", i + 1, j + 1));
        }
    }
    out
}

/// Inverse of a jet, reporting which part was singular.
pub(crate) fn inv(j: &Jet, what: &'static str) -> Result<Jet> {
    j.inv().ok_or(Error::Singular { what })
}

/// `θ̄(s) = (∂_s g) g⁻¹`.
pub(crate) fn right_form(g: &Jet, ginv: &Jet, s: usize) -> Jet {
    jets::theta_bar(g, ginv, s)
}

/// `θ(s) = g⁻¹ ∂_s g`.
pub(crate) fn left_form(g: &Jet, ginv: &Jet, s: usize) -> Jet {
    jets::theta(g, ginv, s)
}
