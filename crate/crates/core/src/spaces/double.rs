use crate::error::{Error, Result};
use crate::jets::{self, Jet, SJet};
use crate::lie::{self, CMat, C64};
use crate::sample::{self, Rng};

use super::{group_chart, group_coords, inv, left_form, matrix_labels, require_parts, right_form, FactorKind, Point, QhSpace};

/// The internally fused double `G × G` with diagonal conjugation and the
/// commutator moment map `μ(a, b) = a b a⁻¹ b⁻¹`.
#[derive(Clone, Debug)]
pub struct Double {
    n: usize,
}

impl Double {
    pub fn new(n: usize) -> Self {
        Self { n }
    }

    pub fn point(&self, a: CMat, b: CMat) -> Result<Point> {
        let p = Point::new(vec![a, b]);
        self.validate(&p)?;
        Ok(p)
    }
}

impl QhSpace for Double {
    fn name(&self) -> String {
        format!("double(n={})", self.n)
    }

    fn n(&self) -> usize {
        self.n
    }

    fn dim(&self) -> usize {
        2 * self.n * self.n
    }

    fn factors(&self) -> Vec<FactorKind> {
        vec![FactorKind::G]
    }

    fn coordinate_labels(&self) -> Vec<String> {
        let mut out = matrix_labels("a", self.n);
        out.extend(matrix_labels("b", self.n));
        out
    }

    fn part_count(&self) -> usize {
        2
    }

    fn embed(&self, p: &Point, x: &[SJet]) -> Result<Vec<Jet>> {
        require_parts(p, 2)?;
        let nn = self.n * self.n;
        Ok(vec![group_chart(&p.parts[0], &x[..nn]), group_chart(&p.parts[1], &x[nn..])])
    }

    fn tangent_coords(&self, p: &Point, dparts: &[CMat]) -> Result<Vec<C64>> {
        let mut out = group_coords(&p.parts[0], &dparts[0])?;
        out.extend(group_coords(&p.parts[1], &dparts[1])?);
        Ok(out)
    }

    fn two_form(&self, m: &[Jet], u: usize, v: usize) -> Result<SJet> {
        let (a, b) = (&m[0], &m[1]);
        let ai = inv(a, "a")?;
        let bi = inv(b, "b")?;
        let ab = a * b;
        let abi = &bi * &ai;
        let aibi = &ai * &bi;
        let aibi_inv = b * a;
        // −½(a*θ, b*θ̄) − ½(a*θ̄, b*θ) − ½((ab)*θ, (a⁻¹b⁻¹)*θ̄)
        // The middle term is the mirror of the first: swapping the slots of
        // a wedge pairing flips its sign, so (b*θ, a*θ̄) enters with +½.
        let term = |g: &Jet, gi: &Jet, h: &Jet, hi: &Jet| {
            jets::pair(&left_form(g, gi, u), &right_form(h, hi, v), &left_form(g, gi, v), &right_form(h, hi, u))
        };
        let sum = term(a, &ai, b, &bi) - term(b, &bi, a, &ai) + term(&ab, &abi, &aibi, &aibi_inv);
        Ok(sum.scale(C64::new(-0.5, 0.0)))
    }

    fn moment(&self, m: &[Jet], factor: usize) -> Result<Jet> {
        super::require_factor(self, factor)?;
        let (a, b) = (&m[0], &m[1]);
        Ok(&(&(a * b) * &inv(a, "a")?) * &inv(b, "b")?)
    }

    fn act(&self, factor: usize, g: &Jet, m: &[Jet]) -> Result<Vec<Jet>> {
        super::require_factor(self, factor)?;
        let gi = inv(g, "group element")?;
        Ok(m.iter().map(|x| &(g * x) * &gi).collect())
    }

    fn sample_point(&self, rng: &mut Rng) -> Result<Point> {
        Ok(Point::new(vec![sample::group_element(self.n, rng), sample::group_element(self.n, rng)]))
    }

    fn validate(&self, p: &Point) -> Result<()> {
        require_parts(p, 2)?;
        for (part, what) in p.parts.iter().zip(["a", "b"]) {
            jets::require_size(part, self.n)?;
            if !lie::is_invertible(part) {
                return Err(Error::Singular { what });
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::moment_at;

    #[test]
    fn moment_is_trivial_on_commuting_pairs() {
        let d = Double::new(2);
        let b = sample::group_element(2, &mut sample::rng(3));
        let p = d.point(CMat::identity(2, 2), b).unwrap();
        let mu = moment_at(&d, &p, 0).unwrap();
        assert!(lie::max_norm(&(mu - CMat::identity(2, 2))) < 1e-14);

        let a = lie::diag_matrix(&[C64::new(2.0, 0.0), C64::new(0.5, 1.0)]);
        let b = lie::diag_matrix(&[C64::new(-1.0, 0.3), C64::new(3.0, 0.0)]);
        let p = d.point(a, b).unwrap();
        let mu = moment_at(&d, &p, 0).unwrap();
        assert!(lie::max_norm(&(mu - CMat::identity(2, 2))) < 1e-14);
    }
}
