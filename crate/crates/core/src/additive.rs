//! Additive analogues: the jet group `G_k`, principal parts as its dual,
//! extended orbits `Õ` and their moment maps.
//!
//! A jet `g(z) = g₀ + g₁z + … + g_{k−1}z^{k−1}` is stored by its
//! coefficients, and so is a principal part
//! `A = A₀dz/z^k + … + A_{k−1}dz/z`. In both cases index `i` of a product
//! collects `Σ_j a_j b_{i−j}`, so one truncated series product serves jets
//! times jets and jets times principal parts alike (terms past `dz/z` never
//! pair with `𝔤_k` and are dropped).
//!
//! The symplectic form on `Õ` is the decoupled one: the canonical form of
//! `T*G` in left trivialization on `(g₀, π_res(A))` plus the orbit form on
//! `π_irr(g₀Ag₀⁻¹) ∈ O_B`. It is evaluated in the redundant chart
//! `(g₀, b, R) ↦ (g₀, g₀⁻¹ (b·(Ã⁰ + R dz/z)) g₀)`; the pulled back form is
//! degenerate exactly along the directions the chart map collapses.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jets::{self, Jet, MatAlg, SJet};
use crate::lie::{self, CMat, CartanElement, GroupElement, C64};
use crate::rank::{self, RankDecision};
use crate::sample::{self, Rng};
use crate::verify::CheckReport;

/// Sign of the orbit term relative to the cotangent term. Fixed by
/// requiring the torus moment map to be `−Λ`.
const KKS_SIGN: f64 = -1.0;

/// Smallest root `|a_p − a_q|` accepted for the sampled leading coefficient.
const SAMPLE_ROOT_GAP: f64 = 0.2;

fn require_k(k: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::InvalidPoleOrder { k, min: 1 });
    }
    Ok(())
}

fn require_shapes(coeffs: &[CMat]) -> Result<usize> {
    let n = coeffs.first().map(|c| c.nrows()).ok_or(Error::InvalidPoleOrder { k: 0, min: 1 })?;
    for c in coeffs {
        jets::require_size(c, n)?;
    }
    Ok(n)
}

// Truncated series arithmetic, generic so that jets flow through unchanged.

/// `(ab)_i = Σ_{j ≤ i} a_j b_{i−j}`, truncated to the length of `a`.
pub fn series_mul<M: MatAlg>(a: &[M], b: &[M]) -> Vec<M> {
    (0..a.len())
        .map(|i| {
            let mut acc = a[0].times(&b[i]);
            for j in 1..=i {
                acc = acc.plus(&a[j].times(&b[i - j]));
            }
            acc
        })
        .collect()
}

/// Inverse of a truncated series with invertible constant term.
pub fn series_inv<M: MatAlg>(g: &[M]) -> Option<Vec<M>> {
    let h0 = g[0].try_inv()?;
    let mut h = vec![h0.clone()];
    for m in 1..g.len() {
        let mut acc = g[1].times(&h[m - 1]);
        for j in 2..=m {
            acc = acc.plus(&g[j].times(&h[m - j]));
        }
        h.push(h0.times(&acc).scaled(C64::new(-1.0, 0.0)));
    }
    Some(h)
}

/// Principal part of `g A g⁻¹` given `g` and `g⁻¹`.
pub fn conjugate_parts<M: MatAlg>(g: &[M], ginv: &[M], a: &[M]) -> Vec<M> {
    series_mul(&series_mul(g, a), ginv)
}

/// `[X, Y]` of truncated series.
pub fn series_bracket<M: MatAlg>(x: &[M], y: &[M]) -> Vec<M> {
    series_mul(x, y).iter().zip(series_mul(y, x)).map(|(a, b)| a.minus(&b)).collect()
}

/// An element of `G_k`; those with `g₀ = 1` form `B_k`.
#[derive(Clone, Debug, PartialEq)]
pub struct JetGroupElement {
    coeffs: Vec<CMat>,
}

impl JetGroupElement {
    pub fn new(coeffs: Vec<CMat>) -> Result<Self> {
        require_shapes(&coeffs)?;
        if !lie::is_invertible(&coeffs[0]) {
            return Err(Error::Singular { what: "constant term g₀" });
        }
        Ok(Self { coeffs })
    }

    pub fn identity(n: usize, k: usize) -> Self {
        let mut coeffs = vec![CMat::zeros(n, n); k.max(1)];
        coeffs[0] = CMat::identity(n, n);
        Self { coeffs }
    }

    /// `1 + b₁z + … + b_{k−1}z^{k−1}`.
    pub fn unipotent(n: usize, tail: &[CMat]) -> Result<Self> {
        let mut coeffs = vec![CMat::identity(n, n)];
        coeffs.extend(tail.iter().cloned());
        Self::new(coeffs)
    }

    pub fn k(&self) -> usize {
        self.coeffs.len()
    }

    pub fn n(&self) -> usize {
        self.coeffs[0].nrows()
    }

    pub fn coeffs(&self) -> &[CMat] {
        &self.coeffs
    }

    pub fn in_b(&self) -> bool {
        lie::max_norm(&(&self.coeffs[0] - CMat::identity(self.n(), self.n()))) == 0.0
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        same_shape(self.k(), self.n(), other.k(), other.n())?;
        Ok(Self {
            coeffs: series_mul(&self.coeffs, &other.coeffs),
        })
    }

    pub fn inverse(&self) -> Self {
        Self {
            coeffs: series_inv(&self.coeffs).expect("g₀ checked invertible"),
        }
    }
}

fn same_shape(k1: usize, n1: usize, k2: usize, n2: usize) -> Result<()> {
    if n1 != n2 {
        return Err(Error::SizeMismatch { expected: n1, found: n2 });
    }
    if k1 != k2 {
        return Err(Error::InvalidPoint(format!("jet orders differ: {k1} and {k2}")));
    }
    Ok(())
}

/// `X(z) = X₀ + X₁z + … + X_{k−1}z^{k−1}`; `𝔟_k` is `X₀ = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct JetAlgebraElement {
    pub coeffs: Vec<CMat>,
}

impl JetAlgebraElement {
    pub fn new(coeffs: Vec<CMat>) -> Result<Self> {
        require_shapes(&coeffs)?;
        Ok(Self { coeffs })
    }

    pub fn k(&self) -> usize {
        self.coeffs.len()
    }

    pub fn n(&self) -> usize {
        self.coeffs[0].nrows()
    }

    pub fn bracket(&self, other: &Self) -> Self {
        Self {
            coeffs: series_bracket(&self.coeffs, &other.coeffs),
        }
    }

    pub fn random(n: usize, k: usize, algebra: JetAlgebra, rng: &mut Rng) -> Self {
        let mut coeffs: Vec<CMat> = (0..k).map(|_| sample::disc_matrix(n, rng)).collect();
        if algebra == JetAlgebra::Borel {
            coeffs[0] = CMat::zeros(n, n);
        }
        Self { coeffs }
    }
}

/// `𝔤_k` or its nilpotent part `𝔟_k`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum JetAlgebra {
    Full,
    Borel,
}

impl JetAlgebra {
    /// `E_ij z^m` over the allowed powers.
    pub fn basis(self, n: usize, k: usize) -> Vec<JetAlgebraElement> {
        let first = match self {
            JetAlgebra::Full => 0,
            JetAlgebra::Borel => 1,
        };
        let mut out = Vec::new();
        for m in first..k {
            for e in lie::algebra_basis(n) {
                let mut coeffs = vec![CMat::zeros(n, n); k];
                coeffs[m] = e;
                out.push(JetAlgebraElement { coeffs });
            }
        }
        out
    }
}

/// `A = A₀dz/z^k + … + A_{k−1}dz/z`, an element of `𝔤_k*`.
#[derive(Clone, Debug, PartialEq)]
pub struct PrincipalPart {
    pub coeffs: Vec<CMat>,
}

impl PrincipalPart {
    pub fn new(coeffs: Vec<CMat>) -> Result<Self> {
        require_shapes(&coeffs)?;
        Ok(Self { coeffs })
    }

    pub fn residue_only(r: &CMat, k: usize) -> Self {
        let n = r.nrows();
        let mut coeffs = vec![CMat::zeros(n, n); k.max(1)];
        coeffs[k.max(1) - 1] = r.clone();
        Self { coeffs }
    }

    pub fn k(&self) -> usize {
        self.coeffs.len()
    }

    pub fn n(&self) -> usize {
        self.coeffs[0].nrows()
    }

    /// `π_res(A)`, the `dz/z` coefficient.
    pub fn residue(&self) -> &CMat {
        &self.coeffs[self.k() - 1]
    }

    /// `π_irr(A)`: the same part with residue removed.
    pub fn irregular(&self) -> Self {
        let mut out = self.clone();
        let k = out.k();
        out.coeffs[k - 1] = CMat::zeros(self.n(), self.n());
        out
    }

    pub fn plus(&self, other: &Self) -> Self {
        Self {
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect(),
        }
    }

    /// Conjugation by a constant group element.
    pub fn conjugate(&self, g: &CMat, ginv: &CMat) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|a| g * a * ginv).collect(),
        }
    }

    pub fn max_norm(&self) -> f64 {
        self.coeffs.iter().map(lie::max_norm).fold(0.0, f64::max)
    }
}

/// `⟨A, X⟩ = Res₀ tr(A X) = Σ_{i+j=k−1} tr(A_i X_j)`.
pub fn res_pairing(a: &PrincipalPart, x: &JetAlgebraElement) -> Result<C64> {
    same_shape(a.k(), a.n(), x.k(), x.n())?;
    let k = a.k();
    Ok((0..k).map(|i| lie::tr_mul(&a.coeffs[i], &x.coeffs[k - 1 - i])).sum())
}

fn res_pairing_jets(a: &[Jet], x: &[Jet]) -> SJet {
    let k = a.len();
    (0..k).fold(SJet::zero(), |acc, i| acc + jets::tr_mul(&a[i], &x[k - 1 - i]))
}

/// Principal part of `g A g⁻¹`.
pub fn coadjoint(g: &JetGroupElement, a: &PrincipalPart) -> Result<PrincipalPart> {
    same_shape(g.k(), g.n(), a.k(), a.n())?;
    let ginv = g.inverse();
    Ok(PrincipalPart {
        coeffs: conjugate_parts(&g.coeffs, &ginv.coeffs, &a.coeffs),
    })
}

/// The irregular type `Ã⁰ = A₀⁰dz/z^k + … + A_{k−2}⁰dz/z²`: diagonal
/// coefficients with `A₀⁰` regular. For `k = 1` it is empty.
#[derive(Clone, Debug, PartialEq)]
pub struct IrregularType {
    n: usize,
    coeffs: Vec<CMat>,
    /// `1/(a_q − a_p)` off the diagonal, 0 on it: inverts `ad_{A₀⁰}` off `𝔱`.
    ad_inverse: CMat,
}

impl IrregularType {
    pub fn new(n: usize, coeffs: Vec<CMat>) -> Result<Self> {
        for c in &coeffs {
            jets::require_size(c, n)?;
            if !lie::is_diagonal(c) {
                return Err(Error::InvalidPoint("irregular type coefficients must be diagonal".into()));
            }
        }
        let mut ad_inverse = CMat::zeros(n, n);
        if let Some(lead) = coeffs.first() {
            let a = CartanElement(lead.diagonal().iter().copied().collect());
            if let Some((i, j)) = a.first_coincidence() {
                return Err(Error::NotRegular { i, j });
            }
            for p in 0..n {
                for q in 0..n {
                    if p != q {
                        ad_inverse[(p, q)] = (a.0[q] - a.0[p]).inv();
                    }
                }
            }
        }
        Ok(Self { n, coeffs, ad_inverse })
    }

    /// Random diagonal coefficients with a well separated leading term.
    pub fn sample(n: usize, k: usize, rng: &mut Rng) -> Result<Self> {
        require_k(k)?;
        let mut coeffs = Vec::with_capacity(k - 1);
        if k >= 2 {
            let lead = loop {
                let v = sample::disc_vector(n, rng);
                let separated = (0..n).all(|i| (0..i).all(|j| (v[i] - v[j]).norm() > SAMPLE_ROOT_GAP));
                if separated {
                    break v;
                }
            };
            coeffs.push(lie::diag_matrix(&lead));
            for _ in 2..k {
                coeffs.push(lie::diag_matrix(&sample::disc_vector(n, rng)));
            }
        }
        Self::new(n, coeffs)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.coeffs.len() + 1
    }

    pub fn coeffs(&self) -> &[CMat] {
        &self.coeffs
    }

    /// `Ã⁰ + R dz/z`.
    pub fn with_residue(&self, r: &CMat) -> PrincipalPart {
        let mut coeffs = self.coeffs.clone();
        coeffs.push(r.clone());
        PrincipalPart { coeffs }
    }
}

/// A point `(g₀, A)` of an extended orbit.
#[derive(Clone, Debug, PartialEq)]
pub struct ExtendedPoint {
    pub g0: GroupElement,
    pub a: PrincipalPart,
}

/// `b ∈ B_k` and `R` with `b (g₀Ag₀⁻¹) b⁻¹ = Ã⁰ + R dz/z`.
#[derive(Clone, Debug, PartialEq)]
pub struct Normalization {
    pub b: JetGroupElement,
    pub r: CMat,
}

impl Normalization {
    /// `Λ = δ(R)`.
    pub fn lambda(&self) -> CartanElement {
        CartanElement(self.r.diagonal().iter().copied().collect())
    }
}

/// Solve `b C b⁻¹ = Ã⁰ + R dz/z` for `b ∈ B_k` order by order, where `c`
/// holds the coefficients of `C = g₀Ag₀⁻¹`. Diagonal parts of every `b_j`
/// and all of `b_{k−1}` are set to zero. Returns `(b, R)`.
///
/// From `(bCb⁻¹) b = b C`, the coefficient of order `i` reads
/// `[b_i, A₀⁰] = A_i⁰ − C_i − Σ_{0<j<i} (b_j C_{i−j} − A_{i−j}⁰ b_j)`;
/// the diagonal of the right side must vanish on the orbit.
pub fn normalize_parts<M: MatAlg>(c: &[M], a0: &IrregularType) -> Result<(Vec<M>, M)> {
    let k = a0.k();
    if c.len() != k {
        return Err(Error::InvalidPoint(format!("expected {k} coefficients, found {}", c.len())));
    }
    let n = a0.n();
    let id = CMat::identity(n, n);
    if k == 1 {
        let off = c[0].value() - c[0].value().component_mul(&id);
        let residual = lie::max_norm(&off);
        if residual > lie::STRUCTURE_TOL * (1.0 + lie::max_norm(c[0].value())) {
            return Err(Error::NotOnOrbit { order: 0, residual });
        }
        return Ok((vec![c[0].identity_like()], c[0].clone()));
    }
    let lead = lie::max_norm(&(c[0].value() - &a0.coeffs[0]));
    if lead > lie::STRUCTURE_TOL * (1.0 + lie::max_norm(&a0.coeffs[0])) {
        return Err(Error::LeadingCoefficientMismatch { residual: lead });
    }
    let target = |i: usize| c[0].lift(&a0.coeffs[i]);
    let mut b: Vec<M> = vec![c[0].identity_like()];
    for i in 1..k {
        let mut s = c[i].clone();
        for j in 1..i {
            s = s.plus(&b[j].times(&c[i - j])).minus(&target(i - j).times(&b[j]));
        }
        if i == k - 1 {
            b.push(c[0].zero_like());
            return Ok((b, s));
        }
        let t = target(i).minus(&s);
        let diag = t.value().component_mul(&id);
        let residual = lie::max_norm(&diag);
        if residual > 1e-9 * (1.0 + lie::max_norm(t.value())) {
            return Err(Error::NotOnOrbit { order: i, residual });
        }
        b.push(t.hadamard_const(&a0.ad_inverse));
    }
    unreachable!("the loop returns at order k − 1")
}

pub fn formal_normalize(p: &ExtendedPoint, a0: &IrregularType) -> Result<Normalization> {
    same_shape(a0.k(), a0.n(), p.a.k(), p.a.n())?;
    let g = p.g0.matrix();
    let c = p.a.conjugate(g, p.g0.inverse().matrix());
    let (b, r) = normalize_parts(&c.coeffs, a0)?;
    Ok(Normalization {
        b: JetGroupElement { coeffs: b },
        r,
    })
}

/// `A = g₀⁻¹ (b·(Ã⁰ + R dz/z)) g₀` for `b ∈ B_k`.
///
/// Conjugating the residue term along with `Ã⁰` keeps `b⁻¹` a normalizing
/// element, so `δ(R)` is the formal invariant of the generated point.
pub fn generate_extended(g0: &GroupElement, b: &JetGroupElement, r: &CMat, a0: &IrregularType) -> Result<ExtendedPoint> {
    if !b.in_b() {
        return Err(Error::InvalidPoint("b must have constant term 1".into()));
    }
    let a = coadjoint(b, &a0.with_residue(r))?;
    Ok(ExtendedPoint {
        a: a.conjugate(g0.inverse().matrix(), g0.matrix()),
        g0: g0.clone(),
    })
}

/// The orbit form `ω_ξ(ad*_X ξ, ad*_Y ξ) = −⟨ξ, [X, Y]⟩` (with
/// `ad*_X ξ = [X, ξ]`), tangents given by their generators.
pub fn kks(xi: &PrincipalPart, x: &JetAlgebraElement, y: &JetAlgebraElement) -> Result<C64> {
    Ok(res_pairing(xi, &x.bracket(y))? * KKS_SIGN)
}

/// `ad*_X ξ` restricted to the given algebra: the principal part of
/// `[X, ξ]`, with the residue dropped for `𝔟_k` (where it pairs trivially).
pub fn coadjoint_action(xi: &PrincipalPart, x: &JetAlgebraElement, algebra: JetAlgebra) -> PrincipalPart {
    let out = PrincipalPart {
        coeffs: series_bracket(&x.coeffs, &xi.coeffs),
    };
    match algebra {
        JetAlgebra::Full => out,
        JetAlgebra::Borel => out.irregular(),
    }
}

/// Rank of `M_ab = ⟨ξ, [X_a, X_b]⟩` over the standard basis of the algebra.
pub fn orbit_dimension(xi: &PrincipalPart, algebra: JetAlgebra) -> Result<RankDecision> {
    let basis = algebra.basis(xi.n(), xi.k());
    let d = basis.len();
    let mut m = CMat::zeros(d, d);
    for a in 0..d {
        for b in (a + 1)..d {
            let w = res_pairing(xi, &basis[a].bracket(&basis[b]))?;
            m[(a, b)] = w;
            m[(b, a)] = -w;
        }
    }
    Ok(rank::rank(&m, rank::RANK_THRESHOLD))
}

/// Generators (as columns over the algebra basis) of the stabilizer of `ξ`.
pub fn stabilizer_basis(xi: &PrincipalPart, algebra: JetAlgebra) -> (Vec<JetAlgebraElement>, RankDecision) {
    let (n, k) = (xi.n(), xi.k());
    let basis = algebra.basis(n, k);
    let images: Vec<Vec<C64>> = basis
        .iter()
        .map(|x| coadjoint_action(xi, x, algebra).coeffs.iter().flat_map(lie::flatten).collect())
        .collect();
    let m = rank::columns(&images, k * n * n);
    let (kernel, decision) = rank::kernel(&m, rank::RANK_THRESHOLD);
    let gens = (0..kernel.ncols())
        .map(|c| {
            let coeffs = (0..k)
                .map(|pow| {
                    basis.iter().enumerate().fold(CMat::zeros(n, n), |acc, (i, b)| acc + &b.coeffs[pow] * kernel[(i, c)])
                })
                .collect();
            JetAlgebraElement { coeffs }
        })
        .collect();
    (gens, decision)
}

/// Dimension counts for `GL_n` and pole order `k`. `o_b` is `None` for
/// `k = 1`, where there is no irregular part.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dims {
    pub c_tilde: usize,
    pub o_tilde: usize,
    pub c: usize,
    pub o: usize,
    pub o_b: Option<usize>,
}

pub fn dims(n: usize, k: usize) -> Result<Dims> {
    require_k(k)?;
    let nn = n * n;
    let c_tilde = nn + (k - 1) * (nn - n) + n;
    let o_b = (k >= 2).then(|| (k - 2) * (nn - n));
    let o_tilde = match o_b {
        Some(d) => 2 * nn + d,
        None => nn + n,
    };
    Ok(Dims {
        c_tilde,
        o_tilde,
        c: c_tilde - 2 * n,
        o: o_tilde - 2 * n,
        o_b,
    })
}

/// Acting factors of an extended orbit.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Factor {
    /// `h·(g₀, A) = (g₀h⁻¹, hAh⁻¹)`, moment `π_res(A)`.
    G,
    /// `t·(g₀, A) = (tg₀, A)`, moment `−Λ`.
    T,
}

/// Chart centre `(g₀, b₁..b_{k−1}, R)`. For `k = 1`, `b` is empty and `R`
/// is the diagonal `Λ`.
#[derive(Clone, Debug, PartialEq)]
pub struct ChartPoint {
    pub g0: CMat,
    pub b: Vec<CMat>,
    pub r: CMat,
}

/// Jets of the chart data: `b` includes the constant term.
#[derive(Clone, Debug)]
pub struct ChartJets {
    pub g0: Jet,
    pub b: Vec<Jet>,
    pub r: Jet,
}

/// Derived data of a point on embedded jets.
struct Decoupled {
    g0: Jet,
    g0inv: Jet,
    /// `b·(Ã⁰ + R dz/z) = g₀Ag₀⁻¹`.
    full: Vec<Jet>,
    binv: Vec<Jet>,
}

/// The extended orbit `Õ` of an irregular type, in the chart
/// `(g₀, b, R)`. For `k = 1` it is `{(g₀, A) : g₀Ag₀⁻¹ ∈ 𝔱}` with chart
/// `(g₀, Λ)`.
#[derive(Clone, Debug)]
pub struct ExtendedOrbit {
    a0: IrregularType,
}

impl ExtendedOrbit {
    pub fn new(a0: IrregularType) -> Self {
        Self { a0 }
    }

    pub fn n(&self) -> usize {
        self.a0.n()
    }

    pub fn k(&self) -> usize {
        self.a0.k()
    }

    pub fn irregular_type(&self) -> &IrregularType {
        &self.a0
    }

    pub fn name(&self) -> String {
        format!("extended-orbit(n={}, k={})", self.n(), self.k())
    }

    /// Number of chart parameters (larger than `dim Õ` for `k ≥ 2`).
    pub fn chart_dim(&self) -> usize {
        let nn = self.n() * self.n();
        if self.k() == 1 {
            nn + self.n()
        } else {
            nn + (self.k() - 1) * nn + nn
        }
    }

    /// `dim Õ = 2n² + dim O_B` (`n² + n` for `k = 1`).
    pub fn dim(&self) -> usize {
        dims(self.n(), self.k()).expect("k ≥ 1").o_tilde
    }

    pub fn sample_point(&self, rng: &mut Rng) -> ChartPoint {
        let n = self.n();
        let g0 = sample::group_element(n, rng);
        if self.k() == 1 {
            let r = sample::affine_regular_cartan(n, rng).to_matrix();
            return ChartPoint { g0, b: vec![], r };
        }
        let b = (1..self.k()).map(|_| sample::disc_matrix(n, rng)).collect();
        ChartPoint {
            g0,
            b,
            r: sample::disc_matrix(n, rng),
        }
    }

    pub fn validate(&self, p: &ChartPoint) -> Result<()> {
        let n = self.n();
        jets::require_size(&p.g0, n)?;
        jets::require_size(&p.r, n)?;
        if p.b.len() != self.k() - 1 {
            return Err(Error::InvalidPoint(format!("expected {} jet coefficients, found {}", self.k() - 1, p.b.len())));
        }
        for b in &p.b {
            jets::require_size(b, n)?;
        }
        if !lie::is_invertible(&p.g0) {
            return Err(Error::Singular { what: "g₀" });
        }
        if self.k() == 1 && !lie::is_diagonal(&p.r) {
            return Err(Error::InvalidPoint("Λ must be diagonal".into()));
        }
        Ok(())
    }

    /// The point `(g₀, A)` of `Õ` at the chart centre.
    pub fn extended_point(&self, p: &ChartPoint) -> Result<ExtendedPoint> {
        self.validate(p)?;
        let g0 = GroupElement::new(p.g0.clone())?;
        let b = JetGroupElement::unipotent(self.n(), &p.b)?;
        generate_extended(&g0, &b, &p.r, &self.a0)
    }

    pub fn embed(&self, p: &ChartPoint, x: &[SJet]) -> ChartJets {
        let n = self.n();
        let nn = n * n;
        let g0 = super_group_chart(&p.g0, &x[..nn]);
        let mut b = vec![Jet::identity(n)];
        let mut off = nn;
        for bj in &p.b {
            b.push(matrix_chart(bj, &x[off..off + nn]));
            off += nn;
        }
        let r = if self.k() == 1 {
            let entries: Vec<SJet> = (0..n).map(|i| SJet::constant(p.r[(i, i)]) + x[off + i]).collect();
            Jet::from_diagonal(&entries)
        } else {
            matrix_chart(&p.r, &x[off..off + nn])
        };
        ChartJets { g0, b, r }
    }

    /// Chart jets with the given directions seeded at the centre.
    pub fn embed_dirs(&self, p: &ChartPoint, dirs: &[&[C64]]) -> ChartJets {
        let zero = vec![C64::new(0.0, 0.0); self.chart_dim()];
        self.embed(p, &jets::seed(&zero, dirs))
    }

    fn decouple(&self, m: &ChartJets) -> Result<Decoupled> {
        let g0inv = m.g0.inv().ok_or(Error::Singular { what: "g₀" })?;
        let binv = series_inv(&m.b).expect("unit constant term");
        let mut a: Vec<Jet> = self.a0.coeffs.iter().map(|c| Jet::constant(c.clone())).collect();
        a.push(m.r.clone());
        let full = conjugate_parts(&m.b, &binv, &a);
        Ok(Decoupled {
            g0: m.g0.clone(),
            g0inv,
            full,
            binv,
        })
    }

    /// Coefficients of `A` on jets.
    pub fn principal_part(&self, m: &ChartJets) -> Result<Vec<Jet>> {
        let d = self.decouple(m)?;
        Ok(d.full.iter().map(|c| &(&d.g0inv * c) * &d.g0).collect())
    }

    /// `ω(∂u, ∂v)`: canonical cotangent form on `(g₀, ρ = π_res(A))` plus
    /// the orbit form on `ξ = π_irr(g₀Ag₀⁻¹)`.
    pub fn two_form(&self, m: &ChartJets, u: usize, v: usize) -> Result<SJet> {
        let d = self.decouple(m)?;
        let k = self.k();
        let rho = &(&d.g0inv * &d.full[k - 1]) * &d.g0;
        let xu = jets::theta(&d.g0, &d.g0inv, u);
        let xv = jets::theta(&d.g0, &d.g0inv, v);
        let (phi_u, phi_v) = (rho.deriv(u), rho.deriv(v));
        let bracket = &(&xu * &xv) - &(&xv * &xu);
        let cotangent = jets::tr_mul(&phi_v, &xu) - jets::tr_mul(&phi_u, &xv) + jets::tr_mul(&rho, &bracket);
        if k == 1 {
            return Ok(cotangent);
        }
        // Orbit tangents carried by their generators Z_s = (∂_s b) b⁻¹ ∈ 𝔟_k.
        let gen = |s: usize| {
            let db: Vec<Jet> = m.b.iter().map(|c| c.deriv(s)).collect();
            series_mul(&db, &d.binv)
        };
        let mut xi = d.full.clone();
        xi[k - 1] = Jet::zeros(self.n());
        let orbit = res_pairing_jets(&xi, &series_bracket(&gen(u), &gen(v)));
        Ok(cotangent + orbit.scale(C64::new(KKS_SIGN, 0.0)))
    }

    /// `ω(x, y)` at the chart centre.
    pub fn form(&self, p: &ChartPoint, x: &[C64], y: &[C64]) -> Result<C64> {
        Ok(self.two_form(&self.embed_dirs(p, &[x, y]), 0, 1)?.value())
    }

    /// Gram matrix over the (redundant) chart coordinates.
    pub fn gram(&self, p: &ChartPoint) -> Result<CMat> {
        let dim = self.chart_dim();
        let mut out = CMat::zeros(dim, dim);
        for a in 0..dim {
            for b in (a + 1)..dim {
                let w = self.form(p, &jets::unit(dim, a), &jets::unit(dim, b))?;
                out[(a, b)] = w;
                out[(b, a)] = -w;
            }
        }
        Ok(out)
    }

    /// Moment map of a factor on jets: `π_res(A)` or `−Λ` (as a diagonal matrix).
    pub fn moment(&self, m: &ChartJets, factor: Factor) -> Result<Jet> {
        let a = self.principal_part(m)?;
        match factor {
            Factor::G => Ok(a[self.k() - 1].clone()),
            Factor::T => {
                let ginv = m.g0.inv().ok_or(Error::Singular { what: "g₀" })?;
                let c: Vec<Jet> = a.iter().map(|x| &(&m.g0 * x) * &ginv).collect();
                let (_, r) = normalize_parts(&c, &self.a0)?;
                Ok(-&r.diag_part())
            }
        }
    }

    /// Action on chart jets. `T` acts as `(tg₀, tbt⁻¹, tRt⁻¹)`, which
    /// leaves `A` fixed.
    pub fn act(&self, factor: Factor, g: &Jet, m: &ChartJets) -> Result<ChartJets> {
        let ginv = g.inv().ok_or(Error::Singular { what: "group element" })?;
        Ok(match factor {
            Factor::G => ChartJets {
                g0: &m.g0 * &ginv,
                b: m.b.clone(),
                r: m.r.clone(),
            },
            Factor::T => ChartJets {
                g0: g * &m.g0,
                b: m.b.iter().map(|c| &(g * c) * &ginv).collect(),
                r: &(g * &m.r) * &ginv,
            },
        })
    }

    /// Jacobian (columns over chart coordinates) of `(g₀⁻¹dg₀, dA)`.
    pub fn embedding_jacobian(&self, p: &ChartPoint) -> Result<CMat> {
        let dim = self.chart_dim();
        let cols: Vec<Vec<C64>> = (0..dim)
            .map(|a| {
                let m = self.embed_dirs(p, &[&jets::unit(dim, a)]);
                let ginv = lie::inverse(m.g0.value(), "g₀")?;
                let mut col = lie::flatten(&(ginv * m.g0.first(0)));
                for c in self.principal_part(&m)? {
                    col.extend(lie::flatten(c.first(0)));
                }
                Ok(col)
            })
            .collect::<Result<_>>()?;
        let len = cols.first().map_or(0, |c| c.len());
        Ok(rank::columns(&cols, len))
    }
}

fn super_group_chart(c0: &CMat, x: &[SJet]) -> Jet {
    let n = c0.nrows();
    let y = Jet::from_entries(n, |i, j| x[i * n + j]);
    &Jet::constant(c0.clone()) * &y.exp()
}

fn matrix_chart(m0: &CMat, x: &[SJet]) -> Jet {
    let n = m0.nrows();
    Jet::from_entries(n, |i, j| SJet::constant(m0[(i, j)]) + x[i * n + j])
}

fn relative(diff: f64, scale: f64) -> f64 {
    diff / scale.max(1.0)
}

/// `dω = 0` on coordinate triples of the chart.
pub fn check_closedness(orbit: &ExtendedOrbit, p: &ChartPoint, triples: &[(usize, usize, usize)], tol: f64) -> Result<CheckReport> {
    let mut report = CheckReport::new("closedness", orbit.name(), tol);
    let dim = orbit.chart_dim();
    for &(a, b, c) in triples {
        let m = orbit.embed_dirs(p, &[&jets::unit(dim, a), &jets::unit(dim, b), &jets::unit(dim, c)]);
        let terms = [
            orbit.two_form(&m, 1, 2)?.first(0),
            -orbit.two_form(&m, 0, 2)?.first(1),
            orbit.two_form(&m, 0, 1)?.first(2),
        ];
        let scale = terms.iter().map(|t| t.norm()).fold(0.0, f64::max);
        report.record("d_omega", relative(terms.iter().sum::<C64>().norm(), scale));
    }
    Ok(report)
}

/// `ω(v_X, ∂_a) = ⟨dμ(∂_a), X⟩` for every chart direction, with
/// `v_X = −d/dt (e^{tX}·p)`.
pub fn check_moment(orbit: &ExtendedOrbit, factor: Factor, p: &ChartPoint, x: &CMat, tol: f64) -> Result<CheckReport> {
    let sub = match factor {
        Factor::G => "moment_g",
        Factor::T => "moment_t",
    };
    let mut report = CheckReport::new(sub, orbit.name(), tol);
    let dim = orbit.chart_dim();
    let step = Jet::infinitesimal(&(-x), 0);
    for a in 0..dim {
        let unit = jets::unit(dim, a);
        let zero = vec![C64::new(0.0, 0.0); dim];
        let m = orbit.embed_dirs(p, &[&zero, &unit]);
        let moved = orbit.act(factor, &step, &m)?;
        let lhs = orbit.two_form(&moved, 0, 1)?.value();
        let dmu = orbit.moment(&m, factor)?.first(1).clone();
        let rhs = lie::tr_mul(&dmu, x);
        report.record(sub, relative((lhs - rhs).norm(), lhs.norm().max(rhs.norm())));
    }
    Ok(report)
}

/// Both Hamiltonian conditions with a random algebra element per factor.
pub fn moment_checks(orbit: &ExtendedOrbit, p: &ChartPoint, rng: &mut Rng, tol: f64) -> Result<CheckReport> {
    let n = orbit.n();
    let xg = sample::disc_matrix(n, rng);
    let xt = lie::diag_matrix(&sample::disc_vector(n, rng));
    let g = check_moment(orbit, Factor::G, p, &xg, tol)?;
    let t = check_moment(orbit, Factor::T, p, &xt, tol)?;
    let mut report = CheckReport::new("moment", orbit.name(), tol);
    for s in g.subchecks.iter().chain(&t.subchecks) {
        report.record_with(&s.name, s.residual, s.tolerance);
    }
    Ok(report)
}

/// Rank of the pulled back form equals `dim Õ`.
pub fn check_dimension(orbit: &ExtendedOrbit, p: &ChartPoint, rel: f64) -> Result<CheckReport> {
    let mut report = CheckReport::new("dimension", orbit.name(), rel);
    let decision = rank::form_rank(&orbit.gram(p)?, rel);
    report.ranks(orbit.dim(), decision.rank, decision.conclusive);
    Ok(report)
}

/// On the level set `Λ = const` the form's kernel consists of the torus
/// orbit (dimension `n`) plus the directions the chart collapses.
pub fn check_t_slice(orbit: &ExtendedOrbit, p: &ChartPoint, rel: f64) -> Result<CheckReport> {
    let mut report = CheckReport::new("t_slice", orbit.name(), rel);
    let dim = orbit.chart_dim();
    let n = orbit.n();
    let rows: Vec<Vec<C64>> = (0..dim)
        .map(|a| {
            let m = orbit.embed_dirs(p, &[&jets::unit(dim, a)]);
            Ok(orbit.moment(&m, Factor::T)?.first(0).diagonal().iter().copied().collect())
        })
        .collect::<Result<_>>()?;
    let dlambda = rank::columns(&rows, n);
    let (level, level_rank) = rank::kernel(&dlambda, rel);
    let collapsed = rank::rank(&orbit.embedding_jacobian(p)?, rel);
    if !level_rank.conclusive || !collapsed.conclusive {
        report.inconclusive("level set or chart rank without spectral gap");
    }
    let omega = orbit.gram(p)?;
    let restricted = level.transpose() * &omega * &level;
    let decision = rank::form_rank(&restricted, rel);
    report.ranks(n + collapsed.nullity, decision.nullity, decision.conclusive);
    Ok(report)
}

/// Adding stabilizer generators of `ξ` to orbit tangents leaves the orbit
/// form unchanged.
pub fn check_kks_well_defined(xi: &PrincipalPart, rng: &mut Rng, tol: f64) -> Result<CheckReport> {
    let mut report = CheckReport::new("kks_well_defined", "orbit form", tol);
    let (stab, decision) = stabilizer_basis(xi, JetAlgebra::Borel);
    if !decision.conclusive {
        report.inconclusive("stabilizer rank without spectral gap");
    }
    let (n, k) = (xi.n(), xi.k());
    let x = JetAlgebraElement::random(n, k, JetAlgebra::Borel, rng);
    let y = JetAlgebraElement::random(n, k, JetAlgebra::Borel, rng);
    let base = kks(xi, &x, &y)?;
    for s in &stab {
        let shifted = JetAlgebraElement {
            coeffs: x.coeffs.iter().zip(&s.coeffs).map(|(a, b)| a + b).collect(),
        };
        let moved = kks(xi, &shifted, &y)?;
        let swapped = kks(xi, &y, &shifted)?;
        report.record("stabilizer_shift", relative((moved - base).norm(), base.norm()));
        report.record("stabilizer_shift", relative((swapped + base).norm(), base.norm()));
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn pairing_examples() {
        let mut rng = sample::rng(1);
        let lam = sample::disc_matrix(2, &mut rng);
        let x0 = sample::disc_matrix(2, &mut rng);
        let zero = CMat::zeros(2, 2);
        let a = PrincipalPart::residue_only(&lam, 2);
        let x = JetAlgebraElement::new(vec![x0.clone(), zero.clone()]).unwrap();
        assert!((res_pairing(&a, &x).unwrap() - lie::tr_mul(&lam, &x0)).norm() < 1e-15);
        let a = PrincipalPart::new(vec![lam.clone(), zero.clone()]).unwrap();
        assert_eq!(res_pairing(&a, &x).unwrap(), c(0.0));
        let x1 = JetAlgebraElement::new(vec![zero, x0.clone()]).unwrap();
        assert!((res_pairing(&a, &x1).unwrap() - lie::tr_mul(&lam, &x0)).norm() < 1e-15);
    }

    #[test]
    fn series_inverse_round_trips() {
        let mut rng = sample::rng(2);
        let g = JetGroupElement::new(vec![
            sample::group_element(3, &mut rng),
            sample::disc_matrix(3, &mut rng),
            sample::disc_matrix(3, &mut rng),
        ])
        .unwrap();
        let e = g.mul(&g.inverse()).unwrap();
        let id = JetGroupElement::identity(3, 3);
        for (a, b) in e.coeffs().iter().zip(id.coeffs()) {
            assert!(lie::max_norm(&(a - b)) < 1e-12);
        }
    }

    #[test]
    fn dims_match_small_case() {
        let d = dims(2, 2).unwrap();
        assert_eq!((d.c_tilde, d.o_tilde, d.c, d.o, d.o_b), (8, 8, 4, 4, Some(0)));
        assert_eq!(dims(2, 1).unwrap().o_b, None);
    }

    #[test]
    fn trivial_normalization() {
        let mut rng = sample::rng(3);
        let a0 = IrregularType::sample(2, 3, &mut rng).unwrap();
        let r = sample::disc_matrix(2, &mut rng);
        let p = ExtendedPoint {
            g0: GroupElement::identity(2),
            a: a0.with_residue(&r),
        };
        let nm = formal_normalize(&p, &a0).unwrap();
        assert!(lie::max_norm(&(&nm.r - &r)) < 1e-15);
        for (bj, id) in nm.b.coeffs().iter().zip(JetGroupElement::identity(2, 3).coeffs()) {
            assert!(lie::max_norm(&(bj - id)) < 1e-15);
        }
    }
}
