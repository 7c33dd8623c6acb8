use std::sync::Arc;

use crate::error::{Error, Result};
use crate::jets::{self, Jet, SJet};
use crate::lie::{CMat, C64};
use crate::sample::Rng;

use super::{require_factor, FactorKind, Point, QhSpace};

/// The fusion product `M1 ⊛ M2`: one `G` factor of each is merged into a
/// diagonal action with moment `μ1 μ2`, and the two-form acquires the
/// correction `−½(μ1*θ, μ2*θ̄)`.
///
/// Factors are ordered as `[fused G] ++ (other factors of M1) ++ (other
/// factors of M2)`. Parts and coordinates are those of `M1` followed by those
/// of `M2`.
#[derive(Clone)]
pub struct Fusion {
    m1: Arc<dyn QhSpace>,
    m2: Arc<dyn QhSpace>,
    i1: usize,
    i2: usize,
}

enum Slot {
    Fused,
    First(usize),
    Second(usize),
}

pub fn fuse(m1: Arc<dyn QhSpace>, m2: Arc<dyn QhSpace>, i1: usize, i2: usize) -> Result<Fusion> {
    if m1.n() != m2.n() {
        return Err(Error::SizeMismatch {
            expected: m1.n(),
            found: m2.n(),
        });
    }
    for (space, idx) in [(&m1, i1), (&m2, i2)] {
        let kind = require_factor(space.as_ref(), idx)?;
        if kind != FactorKind::G {
            return Err(Error::FactorMismatch {
                index: idx,
                expected: "G",
                found: kind.name(),
            });
        }
    }
    Ok(Fusion { m1, m2, i1, i2 })
}

impl Fusion {
    pub fn first(&self) -> &Arc<dyn QhSpace> {
        &self.m1
    }

    pub fn second(&self) -> &Arc<dyn QhSpace> {
        &self.m2
    }

    /// Join a point of each space into a point of the product.
    pub fn join(&self, p1: &Point, p2: &Point) -> Point {
        let mut parts = p1.parts.clone();
        parts.extend(p2.parts.iter().cloned());
        Point::new(parts)
    }

    /// Split a point of the product.
    pub fn split(&self, p: &Point) -> Result<(Point, Point)> {
        super::require_parts(p, self.part_count())?;
        let k = self.m1.part_count();
        Ok((Point::new(p.parts[..k].to_vec()), Point::new(p.parts[k..].to_vec())))
    }

    fn slot(&self, factor: usize) -> Result<Slot> {
        if factor == 0 {
            return Ok(Slot::Fused);
        }
        let rest1: Vec<usize> = (0..self.m1.factors().len()).filter(|&i| i != self.i1).collect();
        let rest2: Vec<usize> = (0..self.m2.factors().len()).filter(|&i| i != self.i2).collect();
        let idx = factor - 1;
        if idx < rest1.len() {
            Ok(Slot::First(rest1[idx]))
        } else if idx - rest1.len() < rest2.len() {
            Ok(Slot::Second(rest2[idx - rest1.len()]))
        } else {
            Err(Error::NoSuchFactor {
                index: factor,
                count: 1 + rest1.len() + rest2.len(),
            })
        }
    }

    fn split_jets<'a>(&self, m: &'a [Jet]) -> (&'a [Jet], &'a [Jet]) {
        m.split_at(self.m1.part_count())
    }
}

impl QhSpace for Fusion {
    fn name(&self) -> String {
        format!("fusion({}, {})", self.m1.name(), self.m2.name())
    }

    fn n(&self) -> usize {
        self.m1.n()
    }

    fn dim(&self) -> usize {
        self.m1.dim() + self.m2.dim()
    }

    fn factors(&self) -> Vec<FactorKind> {
        let mut out = vec![FactorKind::G];
        out.extend(self.m1.factors().into_iter().enumerate().filter(|(i, _)| *i != self.i1).map(|(_, f)| f));
        out.extend(self.m2.factors().into_iter().enumerate().filter(|(i, _)| *i != self.i2).map(|(_, f)| f));
        out
    }

    fn coordinate_labels(&self) -> Vec<String> {
        let mut out: Vec<String> = self.m1.coordinate_labels().into_iter().map(|l| format!("1.{l}")).collect();
        out.extend(self.m2.coordinate_labels().into_iter().map(|l| format!("2.{l}")));
        out
    }

    fn part_count(&self) -> usize {
        self.m1.part_count() + self.m2.part_count()
    }

    fn embed(&self, p: &Point, x: &[SJet]) -> Result<Vec<Jet>> {
        let (p1, p2) = self.split(p)?;
        let (x1, x2) = x.split_at(self.m1.dim());
        let mut out = self.m1.embed(&p1, x1)?;
        out.extend(self.m2.embed(&p2, x2)?);
        Ok(out)
    }

    fn tangent_coords(&self, p: &Point, dparts: &[CMat]) -> Result<Vec<C64>> {
        let (p1, p2) = self.split(p)?;
        let (d1, d2) = dparts.split_at(self.m1.part_count());
        let mut out = self.m1.tangent_coords(&p1, d1)?;
        out.extend(self.m2.tangent_coords(&p2, d2)?);
        Ok(out)
    }

    fn two_form(&self, m: &[Jet], u: usize, v: usize) -> Result<SJet> {
        let terms = self.two_form_terms(m, u, v)?;
        let mut it = terms.into_iter();
        let first = it.next().expect("at least one term");
        Ok(it.fold(first, |acc, t| acc + t))
    }

    fn two_form_terms(&self, m: &[Jet], u: usize, v: usize) -> Result<Vec<SJet>> {
        let (a, b) = self.split_jets(m);
        // Both forms are built from the moment words, so an ill conditioned
        // μ_i is never inverted as a whole.
        let w1 = self.m1.moment_word(a, self.i1)?;
        let w2 = self.m2.moment_word(b, self.i2)?;
        let correction = jets::pair(
            &jets::theta_word(&w1, u),
            &jets::theta_bar_word(&w2, v),
            &jets::theta_word(&w1, v),
            &jets::theta_bar_word(&w2, u),
        );
        let mut out = self.m1.two_form_terms(a, u, v)?;
        out.extend(self.m2.two_form_terms(b, u, v)?);
        out.push(correction.scale(C64::new(-0.5, 0.0)));
        Ok(out)
    }

    fn moment(&self, m: &[Jet], factor: usize) -> Result<Jet> {
        let (a, b) = self.split_jets(m);
        match self.slot(factor)? {
            Slot::Fused => Ok(&self.m1.moment(a, self.i1)? * &self.m2.moment(b, self.i2)?),
            Slot::First(i) => self.m1.moment(a, i),
            Slot::Second(i) => self.m2.moment(b, i),
        }
    }

    fn moment_word(&self, m: &[Jet], factor: usize) -> Result<Vec<(Jet, Jet)>> {
        let (a, b) = self.split_jets(m);
        match self.slot(factor)? {
            Slot::Fused => {
                let mut out = self.m1.moment_word(a, self.i1)?;
                out.extend(self.m2.moment_word(b, self.i2)?);
                Ok(out)
            }
            Slot::First(i) => self.m1.moment_word(a, i),
            Slot::Second(i) => self.m2.moment_word(b, i),
        }
    }

    fn moment_inverse(&self, m: &[Jet], factor: usize) -> Result<Jet> {
        let (a, b) = self.split_jets(m);
        match self.slot(factor)? {
            Slot::Fused => Ok(&self.m2.moment_inverse(b, self.i2)? * &self.m1.moment_inverse(a, self.i1)?),
            Slot::First(i) => self.m1.moment_inverse(a, i),
            Slot::Second(i) => self.m2.moment_inverse(b, i),
        }
    }

    fn act(&self, factor: usize, g: &Jet, m: &[Jet]) -> Result<Vec<Jet>> {
        let (a, b) = self.split_jets(m);
        let (mut out, rest) = match self.slot(factor)? {
            Slot::Fused => (self.m1.act(self.i1, g, a)?, self.m2.act(self.i2, g, b)?),
            Slot::First(i) => (self.m1.act(i, g, a)?, b.to_vec()),
            Slot::Second(i) => (a.to_vec(), self.m2.act(i, g, b)?),
        };
        out.extend(rest);
        Ok(out)
    }

    fn sample_point(&self, rng: &mut Rng) -> Result<Point> {
        let p1 = self.m1.sample_point(rng)?;
        let p2 = self.m2.sample_point(rng)?;
        Ok(self.join(&p1, &p2))
    }

    fn validate(&self, p: &Point) -> Result<()> {
        let (p1, p2) = self.split(p)?;
        self.m1.validate(&p1)?;
        self.m2.validate(&p2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie::{self, GroupElement};
    use crate::sample;
    use crate::spaces::{gram, moment_at, ConjugacyClass, Double, Fission};

    #[test]
    fn fusing_with_trivial_moment_adds_forms() {
        // The class of the identity has μ ≡ I, so the correction vanishes.
        let m1: Arc<dyn QhSpace> = Arc::new(ConjugacyClass::new(GroupElement::identity(2)));
        let m2: Arc<dyn QhSpace> = Arc::new(Double::new(2));
        let fused = fuse(m1.clone(), m2.clone(), 0, 0).unwrap();
        let mut rng = sample::rng(9);
        let p1 = m1.sample_point(&mut rng).unwrap();
        let p2 = m2.sample_point(&mut rng).unwrap();
        let p = fused.join(&p1, &p2);
        let g = gram(&fused, &p).unwrap();
        let g2 = gram(m2.as_ref(), &p2).unwrap();
        assert!(lie::max_norm(&(g - g2)) < 1e-12);
    }

    #[test]
    fn fused_moment_at_identity_points() {
        let f = Arc::new(Fission::new(2, 2).unwrap()) as Arc<dyn QhSpace>;
        let fused = fuse(f.clone(), f.clone(), 0, 0).unwrap();
        let trivial = crate::spaces::FissionPoint::trivial(2, 2, lie::CartanElement::zero(2)).to_point();
        let p = fused.join(&trivial, &trivial);
        let mu = moment_at(&fused, &p, 0).unwrap();
        assert!(lie::max_norm(&(mu - CMat::identity(2, 2))) < 1e-15);
        assert_eq!(fused.factors(), vec![FactorKind::G, FactorKind::T, FactorKind::T]);
    }

    #[test]
    fn fusing_a_torus_factor_is_rejected() {
        let f = Arc::new(Fission::new(2, 2).unwrap()) as Arc<dyn QhSpace>;
        assert!(matches!(fuse(f.clone(), f, 1, 0), Err(Error::FactorMismatch { .. })));
    }
}
