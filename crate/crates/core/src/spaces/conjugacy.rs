use crate::error::{Error, Result};
use crate::jets::{self, Jet, SJet};
use crate::lie::{self, CMat, GroupElement, C64};
use crate::rank::{self, RANK_THRESHOLD};
use crate::sample::{self, Rng};

use super::{group_coords, inv, require_parts, right_form, FactorKind, Point, QhSpace};

/// The conjugacy class of `g0` with the conjugation action.
///
/// A point is stored as `[C]` and represents `g = C⁻¹ g0 C`. The chart at `C`
/// is `C · exp(Σ x_i W_i)` where the `W_i` span the orthogonal complement
/// of the centralizer of `g`, so the chart is a genuine chart on the class.
/// The two-form is `½(θ̄, g0 θ̄ g0⁻¹)` in terms of `C`.
#[derive(Clone, Debug)]
pub struct ConjugacyClass {
    n: usize,
    g0: CMat,
    g0_inv: CMat,
    dim: usize,
}

/// Matrix of `X ↦ gX − Xg` on row-major coordinates.
fn ad_matrix(g: &CMat) -> CMat {
    let n = g.nrows();
    let basis = lie::algebra_basis(n);
    let cols: Vec<Vec<C64>> = basis.iter().map(|e| lie::flatten(&lie::commutator(g, e))).collect();
    rank::columns(&cols, n * n)
}

impl ConjugacyClass {
    pub fn new(g0: GroupElement) -> Self {
        let g0 = g0.into_matrix();
        let n = g0.nrows();
        let dim = rank::rank(&ad_matrix(&g0), RANK_THRESHOLD).rank;
        let g0_inv = g0.clone().try_inverse().expect("group element is invertible");
        Self { n, g0, g0_inv, dim }
    }

    pub fn g0(&self) -> &CMat {
        &self.g0
    }

    /// The class element `C⁻¹ g0 C` represented by a point.
    pub fn element(&self, p: &Point) -> Result<CMat> {
        let c = &p.parts[0];
        Ok(lie::inverse(c, "C")? * &self.g0 * c)
    }

    /// Right singular vectors of `ad_g`; the first `dim` columns span the
    /// complement of the centralizer.
    fn frame(&self, p: &Point) -> Result<CMat> {
        let g = self.element(p)?;
        Ok(rank::right_singular(&ad_matrix(&g)).1)
    }

    /// The point `[C]` for a given `C`.
    pub fn point(&self, c: CMat) -> Result<Point> {
        let p = Point::new(vec![c]);
        self.validate(&p)?;
        Ok(p)
    }
}

impl QhSpace for ConjugacyClass {
    fn name(&self) -> String {
        format!("conjugacy(n={})", self.n)
    }

    fn n(&self) -> usize {
        self.n
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn factors(&self) -> Vec<FactorKind> {
        vec![FactorKind::G]
    }

    fn coordinate_labels(&self) -> Vec<String> {
        (0..self.dim).map(|i| format!("w{}", i + 1)).collect()
    }

    fn part_count(&self) -> usize {
        1
    }

    fn embed(&self, p: &Point, x: &[SJet]) -> Result<Vec<Jet>> {
        require_parts(p, 1)?;
        let frame = self.frame(p)?;
        let n = self.n;
        let gens: Vec<CMat> = (0..self.dim)
            .map(|i| lie::unflatten(n, frame.column(i).as_slice()))
            .collect();
        let y = Jet::affine(&CMat::zeros(n, n), &gens, x);
        Ok(vec![&Jet::constant(p.parts[0].clone()) * &y.exp()])
    }

    fn tangent_coords(&self, p: &Point, dparts: &[CMat]) -> Result<Vec<C64>> {
        let frame = self.frame(p)?;
        let y = group_coords(&p.parts[0], &dparts[0])?;
        // The frame is unitary; the centralizer components are dropped.
        Ok((0..self.dim)
            .map(|i| frame.column(i).iter().zip(&y).map(|(v, yj)| v.conj() * yj).sum())
            .collect())
    }

    fn two_form(&self, m: &[Jet], u: usize, v: usize) -> Result<SJet> {
        let c = &m[0];
        let ci = inv(c, "C")?;
        let g0 = Jet::constant(self.g0.clone());
        let g0i = Jet::constant(self.g0_inv.clone());
        let bu = right_form(c, &ci, u);
        let bv = right_form(c, &ci, v);
        let conj = |x: &Jet| &(&g0 * x) * &g0i;
        Ok((jets::pair(&bu, &conj(&bv), &bv, &conj(&bu))).scale(C64::new(0.5, 0.0)))
    }

    fn moment(&self, m: &[Jet], factor: usize) -> Result<Jet> {
        super::require_factor(self, factor)?;
        let c = &m[0];
        Ok(&(&inv(c, "C")? * &Jet::constant(self.g0.clone())) * c)
    }

    fn act(&self, factor: usize, g: &Jet, m: &[Jet]) -> Result<Vec<Jet>> {
        super::require_factor(self, factor)?;
        Ok(vec![&m[0] * &inv(g, "group element")?])
    }

    fn sample_point(&self, rng: &mut Rng) -> Result<Point> {
        Ok(Point::new(vec![sample::group_element(self.n, rng)]))
    }

    fn validate(&self, p: &Point) -> Result<()> {
        require_parts(p, 1)?;
        jets::require_size(&p.parts[0], self.n)?;
        if !lie::is_invertible(&p.parts[0]) {
            return Err(Error::Singular { what: "C" });
        }
        Ok(())
    }
}

/// The form on the class at `g` evaluated on fundamental vectors:
/// `ω_g(v_X, v_Y) = ½((X, gYg⁻¹) − (Y, gXg⁻¹))`.
pub fn intrinsic_form(g: &CMat, x: &CMat, y: &CMat) -> Result<C64> {
    let gi = lie::inverse(g, "class element")?;
    let ad = |z: &CMat| g * z * &gi;
    Ok((lie::tr_mul(x, &ad(y)) - lie::tr_mul(y, &ad(x))) * 0.5)
}

/// The same form on arbitrary tangents `dg_u`, `dg_v` at `g`: each tangent is
/// written as a fundamental vector `v_X = gX − Xg` by least squares first.
pub fn intrinsic_form_on_tangents(g: &CMat, dg_u: &CMat, dg_v: &CMat) -> Result<C64> {
    let n = g.nrows();
    let svd = ad_matrix(g).svd(true, true);
    let solve = |t: &CMat| -> Result<CMat> {
        // ad_g X = gX − Xg = v_X, with the sign of the fundamental vector.
        let rhs = CMat::from_column_slice(n * n, 1, &lie::flatten(t));
        let scale = svd.singular_values.iter().fold(0.0f64, |a, s| a.max(*s));
        let sol = svd
            .solve(&rhs, RANK_THRESHOLD * scale)
            .map_err(|e| Error::InvalidPoint(e.to_string()))?;
        Ok(lie::unflatten(n, sol.as_slice()))
    };
    intrinsic_form(g, &solve(dg_u)?, &solve(dg_v)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::{embed_dirs, fundamental_vector, gram, omega};

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn hand_value_at_diag_2_1() {
        let g0 = lie::diag_matrix(&[c(2.0), c(1.0)]);
        let w = intrinsic_form(&g0, &lie::elementary(2, 0, 1), &lie::elementary(2, 1, 0)).unwrap();
        assert_eq!(w, c(-0.75));
        // Through the chart: fundamental vectors at C = I.
        let space = ConjugacyClass::new(GroupElement::new(g0).unwrap());
        let p = space.point(CMat::identity(2, 2)).unwrap();
        let vx = fundamental_vector(&space, 0, &lie::elementary(2, 0, 1), &p).unwrap();
        let vy = fundamental_vector(&space, 0, &lie::elementary(2, 1, 0), &p).unwrap();
        let w = omega(&space, &p, &vx.0, &vy.0).unwrap();
        assert!((w - c(-0.75)).norm() < 1e-15);
    }

    #[test]
    fn central_class_is_a_point() {
        let g0 = CMat::identity(2, 2) * c(3.0);
        let space = ConjugacyClass::new(GroupElement::new(g0).unwrap());
        assert_eq!(space.dim(), 0);
        let p = space.point(sample::group_element(2, &mut sample::rng(1))).unwrap();
        assert_eq!(gram(&space, &p).unwrap().nrows(), 0);
    }

    #[test]
    fn chart_form_matches_intrinsic_form() {
        let mut rng = sample::rng(11);
        for n in [2, 3] {
            let g0 = GroupElement::new(sample::group_element(n, &mut rng)).unwrap();
            let space = ConjugacyClass::new(g0);
            assert_eq!(space.dim(), n * n - n);
            let p = space.sample_point(&mut rng).unwrap();
            let g = space.element(&p).unwrap();
            let x = sample::disc_vector(space.dim(), &mut rng);
            let y = sample::disc_vector(space.dim(), &mut rng);
            let chart = omega(&space, &p, &x, &y).unwrap();
            let m = embed_dirs(&space, &p, &[&x, &y]).unwrap();
            let mu = space.moment(&m, 0).unwrap();
            let intrinsic = intrinsic_form_on_tangents(&g, mu.first(0), mu.first(1)).unwrap();
            assert!((chart - intrinsic).norm() < 1e-10, "{chart} vs {intrinsic}");
        }
    }
}
