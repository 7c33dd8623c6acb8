//! Numerical checks of the quasi-Hamiltonian axioms and their consequences.
//!
//! Residuals are absolute differences divided by `max(1, |largest term|)`.
//! Kernel dimensions come from [`crate::rank`]; a rank decision without a
//! clear spectral gap makes the check inconclusive rather than passing.

use rand::seq::index;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jets;
use crate::lie::{self, CMat, C64};
use crate::rank::{self, RankDecision};
use crate::sample::{self, Rng};
use crate::spaces::{self, FactorKind, Point, QhSpace};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Inconclusive,
}

impl Status {
    fn worst(self, other: Status) -> Status {
        use Status::*;
        match (self, other) {
            (Fail, _) | (_, Fail) => Fail,
            (Inconclusive, _) | (_, Inconclusive) => Inconclusive,
            _ => Pass,
        }
    }
}

/// Tolerances for every check; the defaults are the documented contract.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    pub qh1: f64,
    pub qh2: f64,
    pub qh3: f64,
    pub reduction: f64,
    pub invariance: f64,
    pub equivariance: f64,
    pub rank: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            qh1: 1e-8,
            qh2: 1e-9,
            qh3: 1e-8,
            reduction: 1e-8,
            invariance: 1e-9,
            equivariance: 1e-10,
            rank: rank::RANK_THRESHOLD,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubCheck {
    pub name: String,
    pub residual: f64,
    pub tolerance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub name: String,
    pub space: String,
    pub samples: usize,
    pub residual: f64,
    pub tolerance: f64,
    pub rank_expected: Option<usize>,
    pub rank_observed: Option<usize>,
    pub status: Status,
    pub seed: Option<u64>,
    pub subchecks: Vec<SubCheck>,
    pub note: Option<String>,
}

impl CheckReport {
    pub fn new(name: impl Into<String>, space: impl Into<String>, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            space: space.into(),
            samples: 1,
            residual: 0.0,
            tolerance,
            rank_expected: None,
            rank_observed: None,
            status: Status::Pass,
            seed: None,
            subchecks: Vec::new(),
            note: None,
        }
    }

    /// Record a residual under a sub-check name (keeping the maximum).
    pub fn record(&mut self, sub: &str, residual: f64) {
        self.record_with(sub, residual, self.tolerance);
    }

    pub fn record_with(&mut self, sub: &str, residual: f64, tolerance: f64) {
        let residual = if residual.is_nan() { f64::INFINITY } else { residual };
        match self.subchecks.iter_mut().find(|s| s.name == sub) {
            Some(s) => s.residual = s.residual.max(residual),
            None => self.subchecks.push(SubCheck {
                name: sub.to_string(),
                residual,
                tolerance,
            }),
        }
        self.residual = self.residual.max(residual);
        if residual > tolerance {
            self.status = self.status.worst(Status::Fail);
        }
    }

    pub fn ranks(&mut self, expected: usize, observed: usize, conclusive: bool) {
        self.rank_expected = Some(expected);
        self.rank_observed = Some(observed);
        if !conclusive {
            self.status = self.status.worst(Status::Inconclusive);
            self.note.get_or_insert_with(|| "rank decision without spectral gap".into());
        } else if expected != observed {
            self.status = self.status.worst(Status::Fail);
        }
    }

    pub fn inconclusive(&mut self, note: impl Into<String>) {
        self.status = self.status.worst(Status::Inconclusive);
        self.note = Some(note.into());
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }

    /// Combine per-sample reports of the same check: residuals take the
    /// maximum, the status the worst case, and the rank data comes from the
    /// first sample that did not pass (or the first sample).
    pub fn merge(reports: &[CheckReport]) -> Option<CheckReport> {
        let first = reports.first()?;
        let mut out = first.clone();
        out.samples = 0;
        out.residual = 0.0;
        out.subchecks.clear();
        out.status = Status::Pass;
        out.note = None;
        for r in reports {
            out.samples += r.samples;
            for s in &r.subchecks {
                out.record_with(&s.name, s.residual, s.tolerance);
            }
            out.residual = out.residual.max(r.residual);
            out.status = out.status.worst(r.status);
            if out.note.is_none() {
                out.note = r.note.clone();
            }
        }
        if let Some(bad) = reports.iter().find(|r| r.status != Status::Pass && r.rank_expected.is_some()) {
            out.rank_expected = bad.rank_expected;
            out.rank_observed = bad.rank_observed;
        }
        Some(out)
    }
}

fn normalized(diff: f64, terms: &[f64]) -> f64 {
    diff / terms.iter().fold(1.0f64, |a, t| a.max(*t))
}

/// `count` coordinate triples with distinct entries (all of them when the
/// dimension is small).
pub fn random_triples(dim: usize, count: usize, rng: &mut Rng) -> Vec<(usize, usize, usize)> {
    if dim < 3 {
        return vec![];
    }
    let total = dim * (dim - 1) * (dim - 2) / 6;
    if total <= count {
        let mut out = Vec::with_capacity(total);
        for a in 0..dim {
            for b in (a + 1)..dim {
                for c in (b + 1)..dim {
                    out.push((a, b, c));
                }
            }
        }
        return out;
    }
    (0..count)
        .map(|_| {
            let mut v = index::sample(rng, dim, 3).into_vec();
            v.sort_unstable();
            (v[0], v[1], v[2])
        })
        .collect()
}

/// A random element of a factor's Lie algebra (unit-disc entries).
pub fn random_algebra_element(kind: FactorKind, n: usize, rng: &mut Rng) -> CMat {
    match kind {
        FactorKind::G => sample::disc_matrix(n, rng),
        FactorKind::T => lie::diag_matrix(&sample::disc_vector(n, rng)),
    }
}

/// A random group element of a factor.
pub fn random_group_element(kind: FactorKind, n: usize, rng: &mut Rng) -> CMat {
    match kind {
        FactorKind::G => sample::group_element(n, rng),
        FactorKind::T => sample::torus_element(n, rng),
    }
}

/// QH1: `dω = Σ_f μ_f*η` on coordinate triples.
pub fn check_qh1(space: &dyn QhSpace, p: &Point, triples: &[(usize, usize, usize)], tol: f64) -> Result<CheckReport> {
    let mut report = CheckReport::new("qh1", space.name(), tol);
    let dim = space.dim();
    let factors = space.factors();
    for &(a, b, c) in triples {
        let ua = jets::unit(dim, a);
        let ub = jets::unit(dim, b);
        let uc = jets::unit(dim, c);
        let m = spaces::embed_dirs(space, p, &[&ua, &ub, &uc])?;
        let terms = [
            space.two_form(&m, 1, 2)?.first(0),
            -space.two_form(&m, 0, 2)?.first(1),
            space.two_form(&m, 0, 1)?.first(2),
        ];
        let d_omega: C64 = terms.iter().sum();
        let mut etas = Vec::with_capacity(factors.len());
        for f in 0..factors.len() {
            etas.push(jets::eta_word(&space.moment_word(&m, f)?));
        }
        let eta: C64 = etas.iter().sum();
        let mags: Vec<f64> = terms.iter().chain(&etas).map(|z| z.norm()).collect();
        report.record("d_omega_minus_eta", normalized((d_omega - eta).norm(), &mags));
    }
    report.samples = 1;
    Ok(report)
}

/// QH2 for one factor: `ω(v_X, ∂b) = ½(μ⁻¹∂bμ + ∂bμ μ⁻¹, X)` for every
/// coordinate direction `b`.
pub fn check_qh2(space: &dyn QhSpace, factor: usize, p: &Point, x: &CMat, tol: f64) -> Result<CheckReport> {
    let kind = spaces::require_factor(space, factor)?;
    let mut report = CheckReport::new(format!("qh2[{}{}]", kind.name(), factor), space.name(), tol);
    let v = spaces::fundamental_vector(space, factor, x, p)?;
    let dim = space.dim();
    for b in 0..dim {
        let ub = jets::unit(dim, b);
        let m = spaces::embed_dirs(space, p, &[&v.0, &ub])?;
        let terms: Vec<C64> = space.two_form_terms(&m, 0, 1)?.iter().map(|t| t.value()).collect();
        let lhs: C64 = terms.iter().sum();
        let word = space.moment_word(&m, factor)?;
        let sym = jets::theta_word(&word, 1).value() + jets::theta_bar_word(&word, 1).value();
        let rhs = lie::tr_mul(&sym, x) * 0.5;
        let mut mags: Vec<f64> = terms.iter().map(|t| t.norm()).collect();
        mags.extend([lhs.norm(), rhs.norm()]);
        report.record("contraction", normalized((lhs - rhs).norm(), &mags));
    }
    Ok(report)
}

/// Span of fundamental vectors `v_X` for `X` in the solution space of
/// `Ad_{μ_f} X = −X`, over all factors.
fn degeneracy_vectors(space: &dyn QhSpace, p: &Point, rel: f64) -> Result<(Vec<Vec<C64>>, bool)> {
    let n = space.n();
    let mut vectors = Vec::new();
    let mut conclusive = true;
    for (f, kind) in space.factors().into_iter().enumerate() {
        // Ad_μ X = −X  ⇔  μX + Xμ = 0, which avoids multiplying by μ⁻¹.
        let mu = spaces::moment_at(space, p, f)?;
        let basis = kind.algebra_basis(n);
        let cols: Vec<Vec<C64>> = basis.iter().map(|b| lie::flatten(&(&mu * b + b * &mu))).collect();
        let (ker, dec) = rank::kernel(&rank::columns(&cols, n * n), rel);
        conclusive &= dec.conclusive;
        for j in 0..ker.ncols() {
            let x = basis.iter().enumerate().fold(CMat::zeros(n, n), |acc, (i, b)| acc + b * ker[(i, j)]);
            vectors.push(spaces::fundamental_vector(space, f, &x, p)?.0);
        }
    }
    Ok((vectors, conclusive))
}

fn span_rank(vectors: &[Vec<C64>], len: usize, rel: f64) -> RankDecision {
    if vectors.is_empty() {
        return RankDecision {
            rank: 0,
            nullity: 0,
            conclusive: true,
            singular_values: vec![],
            threshold: 0.0,
        };
    }
    rank::rank(&rank::columns(vectors, len), rel)
}

/// Largest `|Ω_ab v_b|` entry, used to normalize containment residuals.
fn containment_residual(gram: &CMat, v: &[C64]) -> f64 {
    let w = spaces::apply(gram, v);
    let diff = w.iter().fold(0.0f64, |a, z| a.max(z.norm()));
    let mut scale = 0.0f64;
    for a in 0..gram.nrows() {
        for (b, vb) in v.iter().enumerate() {
            scale = scale.max((gram[(a, b)] * vb).norm());
        }
    }
    normalized(diff, &[scale])
}

/// QH3: the kernel of `ω_p` is spanned by the `v_X` with `Ad_μ X = −X`.
pub fn check_qh3(space: &dyn QhSpace, p: &Point, tol: &Tolerances) -> Result<CheckReport> {
    let mut report = CheckReport::new("qh3", space.name(), tol.qh3);
    let dim = space.dim();
    if dim == 0 {
        report.ranks(0, 0, true);
        report.inconclusive("zero-dimensional space: nothing to compare");
        return Ok(report);
    }
    let gram = spaces::gram(space, p)?;
    let omega_dec = rank::form_rank(&gram, tol.rank);
    let (vectors, eig_conclusive) = degeneracy_vectors(space, p, tol.rank)?;
    for v in &vectors {
        report.record("kernel_containment", containment_residual(&gram, v));
    }
    let span = span_rank(&vectors, dim, tol.rank);
    report.ranks(span.rank, omega_dec.nullity, omega_dec.conclusive && span.conclusive && eig_conclusive);
    Ok(report)
}

/// Jacobian of `μ⁻¹ dμ` for one factor, as an `n² × dim` matrix.
fn moment_jacobian(space: &dyn QhSpace, p: &Point, factor: usize) -> Result<CMat> {
    let dim = space.dim();
    let n = space.n();
    let cols: Vec<Vec<C64>> = (0..dim)
        .map(|a| {
            let m = spaces::embed_dirs(space, p, &[&jets::unit(dim, a)])?;
            Ok(lie::flatten(jets::theta_word(&space.moment_word(&m, factor)?, 0).value()))
        })
        .collect::<Result<_>>()?;
    Ok(rank::columns(&cols, n * n))
}

/// Restrict a Gram matrix to the column span of `k`: `Kᵀ Ω K` (bilinear).
fn restrict(gram: &CMat, k: &CMat) -> CMat {
    k.transpose() * gram * k
}

/// Rank of `ω` restricted to `ker dμ_f` at `p`. For the torus factor of a
/// fission space at a generic point this is the dimension of the reduced
/// space `C̃ // T`.
pub fn level_set_rank(space: &dyn QhSpace, factor: usize, p: &Point, rel: f64) -> Result<RankDecision> {
    spaces::require_factor(space, factor)?;
    let (level, level_dec) = rank::kernel(&moment_jacobian(space, p, factor)?, rel);
    let mut dec = rank::form_rank(&restrict(&spaces::gram(space, p)?, &level), rel);
    dec.conclusive &= level_dec.conclusive;
    Ok(dec)
}

/// Reduction check at a point of `μ_f⁻¹(1)` for a `G` factor:
/// the kernel of `ω` restricted to the level set is exactly the `G`-orbit.
pub fn check_reduction(space: &dyn QhSpace, factor: usize, p: &Point, tol: &Tolerances) -> Result<CheckReport> {
    let kind = spaces::require_factor(space, factor)?;
    if kind != FactorKind::G {
        return Err(Error::FactorMismatch {
            index: factor,
            expected: "G",
            found: kind.name(),
        });
    }
    let n = space.n();
    let mu = spaces::moment_at(space, p, factor)?;
    let residual = lie::max_norm(&(mu - CMat::identity(n, n)));
    if residual > 1e-8 {
        return Err(Error::MomentNotIdentity { residual });
    }
    let mut report = CheckReport::new("reduction", space.name(), tol.reduction);
    let jac = moment_jacobian(space, p, factor)?;
    let (level, level_dec) = rank::kernel(&jac, tol.rank);
    let gram = spaces::gram(space, p)?;
    let reduced = restrict(&gram, &level);
    let red_dec = rank::form_rank(&reduced, tol.rank);
    let mut orbit = Vec::new();
    for x in FactorKind::G.algebra_basis(n) {
        let v = spaces::fundamental_vector(space, factor, &x, p)?.0;
        let jv = spaces::apply(&jac, &v);
        report.record("orbit_tangent_to_level", normalized(jv.iter().fold(0.0, |a, z| a.max(z.norm())), &[vec_norm(&v)]));
        let wv = spaces::apply(&gram, &v);
        let restricted: Vec<C64> = (0..level.ncols()).map(|j| (0..wv.len()).map(|a| level[(a, j)] * wv[a]).sum()).collect();
        let scale = gram_scale(&gram) * vec_norm(&v);
        report.record("orbit_in_kernel", normalized(vec_norm(&restricted), &[scale]));
        orbit.push(v);
    }
    let span = span_rank(&orbit, space.dim(), tol.rank);
    report.ranks(span.rank, red_dec.nullity, level_dec.conclusive && red_dec.conclusive && span.conclusive);
    if span.rank != n * n {
        report.inconclusive(format!("G-orbit has dimension {} < {}", span.rank, n * n));
    }
    Ok(report)
}

/// Slice check for a `T` factor: on the level set of `μ_T` the torus
/// directions are in the kernel of the restricted form, and the kernel is
/// spanned by them together with the QH3 degeneracy of the other factors.
pub fn check_slice(space: &dyn QhSpace, factor: usize, p: &Point, tol: &Tolerances) -> Result<CheckReport> {
    let kind = spaces::require_factor(space, factor)?;
    if kind != FactorKind::T {
        return Err(Error::FactorMismatch {
            index: factor,
            expected: "T",
            found: kind.name(),
        });
    }
    let n = space.n();
    let mut report = CheckReport::new("slice", space.name(), tol.reduction);
    let jac = moment_jacobian(space, p, factor)?;
    let (slice, slice_dec) = rank::kernel(&jac, tol.rank);
    let gram = spaces::gram(space, p)?;
    let reduced = restrict(&gram, &slice);
    let red_dec = rank::form_rank(&reduced, tol.rank);
    let (mut expected, eig_conclusive) = degeneracy_vectors(space, p, tol.rank)?;
    for x in FactorKind::T.algebra_basis(n) {
        let v = spaces::fundamental_vector(space, factor, &x, p)?.0;
        let jv = spaces::apply(&jac, &v);
        report.record("torus_tangent_to_slice", normalized(vec_norm(&jv), &[vec_norm(&v)]));
        let wv = spaces::apply(&gram, &v);
        let restricted: Vec<C64> = (0..slice.ncols()).map(|j| (0..wv.len()).map(|a| slice[(a, j)] * wv[a]).sum()).collect();
        let scale = gram_scale(&gram) * vec_norm(&v);
        report.record("torus_in_kernel", normalized(vec_norm(&restricted), &[scale]));
        expected.push(v);
    }
    let span = span_rank(&expected, space.dim(), tol.rank);
    report.ranks(span.rank, red_dec.nullity, slice_dec.conclusive && red_dec.conclusive && span.conclusive && eig_conclusive);
    Ok(report)
}

fn vec_norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn gram_scale(g: &CMat) -> f64 {
    lie::max_norm(g)
}

/// `ω` is unchanged by the action: `Pᵀ Ω_{g·p} P = Ω_p` where `P` transports
/// coordinate vectors along the action.
pub fn check_invariance(space: &dyn QhSpace, factor: usize, g: &CMat, p: &Point, tol: f64) -> Result<CheckReport> {
    let kind = spaces::require_factor(space, factor)?;
    let mut report = CheckReport::new(format!("invariance[{}{}]", kind.name(), factor), space.name(), tol);
    let dim = space.dim();
    let mut cols = Vec::with_capacity(dim);
    let mut q = None;
    for a in 0..dim {
        let (qa, v) = spaces::transport(space, factor, g, p, &jets::unit(dim, a))?;
        cols.push(v.0);
        q = Some(qa);
    }
    let Some(q) = q else {
        return Ok(report);
    };
    let transport = rank::columns(&cols, dim);
    let base = spaces::gram(space, p)?;
    let moved = restrict(&spaces::gram(space, &q)?, &transport);
    report.record("gram", normalized(lie::max_norm(&(moved - &base)), &[lie::max_norm(&base)]));
    Ok(report)
}

/// `μ_f(g·p) = g μ_f(p) g⁻¹` for the acting factor; the other moment maps
/// are unchanged.
pub fn check_equivariance(space: &dyn QhSpace, factor: usize, g: &CMat, p: &Point, tol: f64) -> Result<CheckReport> {
    let kind = spaces::require_factor(space, factor)?;
    let mut report = CheckReport::new(format!("equivariance[{}{}]", kind.name(), factor), space.name(), tol);
    let q = spaces::act_point(space, factor, g, p)?;
    let gi = lie::inverse(g, "group element")?;
    for (f, other) in space.factors().into_iter().enumerate() {
        let before = spaces::moment_at(space, p, f)?;
        let after = spaces::moment_at(space, &q, f)?;
        let expected = if f == factor { g * &before * &gi } else { before.clone() };
        let diff = lie::max_norm(&(after - &expected));
        report.record(&format!("moment[{}{}]", other.name(), f), normalized(diff, &[lie::max_norm(&expected)]));
    }
    Ok(report)
}

/// The full axiom suite at one point: QH1 on `triples` random coordinate
/// triples, QH2 for every factor with a random algebra element, QH3.
pub fn axiom_suite(space: &dyn QhSpace, p: &Point, triples: usize, rng: &mut Rng, tol: &Tolerances) -> Result<Vec<CheckReport>> {
    let t = random_triples(space.dim(), triples, rng);
    let mut out = vec![check_qh1(space, p, &t, tol.qh1)?];
    for (f, kind) in space.factors().into_iter().enumerate() {
        let x = random_algebra_element(kind, space.n(), rng);
        out.push(check_qh2(space, f, p, &x, tol.qh2)?);
    }
    out.push(check_qh3(space, p, tol)?);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn merge_keeps_worst_case() {
        let mut a = CheckReport::new("qh1", "s", 1e-8);
        a.record("x", 1e-12);
        let mut b = CheckReport::new("qh1", "s", 1e-8);
        b.record("x", 1e-6);
        let m = CheckReport::merge(&[a, b]).unwrap();
        assert_eq!(m.status, Status::Fail);
        assert_eq!(m.samples, 2);
        assert_eq!(m.residual, 1e-6);
    }

    #[test]
    fn nan_residual_fails() {
        let mut a = CheckReport::new("qh1", "s", 1e-8);
        a.record("x", f64::NAN);
        assert_eq!(a.status, Status::Fail);
    }

    #[test]
    fn triples_are_distinct_and_sorted() {
        let mut rng = sample::rng(1);
        for (a, b, c) in random_triples(10, 10, &mut rng) {
            assert!(a < b && b < c && c < 10);
        }
        assert_eq!(random_triples(4, 10, &mut rng).len(), 4);
    }
}
