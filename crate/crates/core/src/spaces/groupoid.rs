//! The unit level set of `C̃_1 ⊛ C̃_2` for `k = 2` and its double-groupoid
//! description.
//!
//! The second copy carries the opposite orientation, so its point reads
//! `(C_2, c+, c-, Λ_2)` with `c+ ∈ B+`, `c- ∈ B-`. With `h = C_2 C_1⁻¹`,
//! `μ = 1` is equivalent to `c+⁻¹ c- = h b+⁻¹ b- h⁻¹`, which is solved by an
//! upper–diagonal–lower factorization.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::lie::{self, CMat, Triangle, I};
use crate::sample::{self, Rng};

use super::fission::{stokes_to_de, Fission, FissionPoint, Orientation, StokesPoint};
use super::fusion::{fuse, Fusion};
use super::{moment_at, Point, QhSpace};

/// `C̃(k=2) ⊛ C̃(k=2, opposite)` over `GL_n`, fused along `G`.
pub fn groupoid_space(n: usize) -> Result<Fusion> {
    let m1: Arc<dyn QhSpace> = Arc::new(Fission::new(n, 2)?);
    let m2: Arc<dyn QhSpace> = Arc::new(Fission::with_orientation(n, 2, Orientation::Opposite)?);
    fuse(m1, m2, 0, 0)
}

/// Complete `p1` and `C_2` to a point of `μ⁻¹(1)` in [`groupoid_space`].
///
/// `Λ_2` uses the principal branch of the logarithm of the diagonal factor.
/// Fails when the word `h b+⁻¹ b- h⁻¹` has a vanishing trailing principal
/// minor; callers resample in that case.
pub fn solve_moment_one_pair(p1: &FissionPoint, c2: &CMat) -> Result<Point> {
    if p1.k() != 2 {
        return Err(Error::InvalidPoleOrder { k: p1.k(), min: 2 });
    }
    let n = p1.n();
    let (b_minus, b_plus) = (&p1.d[0], &p1.e[0]);
    let h = c2 * lie::inverse(&p1.c, "C_1")?;
    let word = &h * lie::inverse(b_plus, "b+")? * b_minus * lie::inverse(&h, "h")?;
    let (u, delta, l) = lie::udl(&word)?;
    let lambda2 = lie::diagonal_log_2pii(&delta);
    let half = lambda2.exp_scaled(PI * I);
    let c_plus = lie::inverse(&(u * &half), "c+")?;
    let c_minus = &half * l;
    let p2 = FissionPoint {
        c: c2.clone(),
        d: vec![c_plus],
        e: vec![c_minus],
        lambda: lambda2,
    };
    let space = groupoid_space(n)?;
    let p = space.join(&p1.to_point(), &p2.to_point());
    space.validate(&p)?;
    Ok(p)
}

/// Draws [`sample_unit_level`] makes before giving up.
const LEVEL_DRAWS: usize = 20;

/// A seeded point of `μ⁻¹(1)` in [`groupoid_space`].
///
/// On the level set `μ_1 = μ_2⁻¹`, so `μ_2*θ̄` along torus directions is a
/// sum of terms of size `cond(μ_1)` that cancel. `Λ_1` is therefore drawn
/// with [`sample::exponent_cartan`]. Draws whose factorization fails are
/// replaced.
pub fn sample_unit_level(n: usize, rng: &mut Rng) -> Result<Point> {
    let mut last = None;
    for _ in 0..LEVEL_DRAWS {
        let stokes = StokesPoint {
            c: sample::group_element(n, rng),
            s: vec![sample::unipotent(n, Triangle::Upper, rng), sample::unipotent(n, Triangle::Lower, rng)],
            lambda: sample::exponent_cartan(n, rng),
        };
        let c2 = sample::group_element(n, rng);
        match stokes_to_de(&stokes).and_then(|p1| solve_moment_one_pair(&p1, &c2)) {
            Ok(p) => return Ok(p),
            Err(e) => last = Some(e),
        }
    }
    Err(last.expect("at least one draw"))
}

/// `(g, b-, b+, h, c+, c-)` with `c± h = g b±`.
#[derive(Clone, Debug, PartialEq)]
pub struct GroupoidTuple {
    pub g: CMat,
    pub b_minus: CMat,
    pub b_plus: CMat,
    pub h: CMat,
    pub c_plus: CMat,
    pub c_minus: CMat,
}

impl GroupoidTuple {
    /// Residuals of `c+ h = g b+` and `c- h = g b-`.
    pub fn relation_residuals(&self) -> (f64, f64) {
        let plus = lie::max_norm(&(&self.c_plus * &self.h - &self.g * &self.b_plus));
        let minus = lie::max_norm(&(&self.c_minus * &self.h - &self.g * &self.b_minus));
        (plus, minus)
    }
}

/// Extract the groupoid element from a point with `μ = 1`:
/// `h = C_2 C_1⁻¹`, `g = c- h b-⁻¹`.
pub fn groupoid_tuple(p: &Point) -> Result<GroupoidTuple> {
    let n = p.parts[0].nrows();
    let space = groupoid_space(n)?;
    let mu = moment_at(&space, p, 0)?;
    let residual = lie::max_norm(&(mu - CMat::identity(n, n)));
    if residual > 1e-8 {
        return Err(Error::MomentNotIdentity { residual });
    }
    let (p1, p2) = space.split(p)?;
    let a = FissionPoint::from_point(&p1)?;
    let b = FissionPoint::from_point(&p2)?;
    let h = &b.c * lie::inverse(&a.c, "C_1")?;
    let g = &b.e[0] * &h * lie::inverse(&a.d[0], "b-")?;
    Ok(GroupoidTuple {
        g,
        b_minus: a.d[0].clone(),
        b_plus: a.e[0].clone(),
        h,
        c_plus: b.d[0].clone(),
        c_minus: b.e[0].clone(),
    })
}
