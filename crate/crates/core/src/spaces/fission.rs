//! The fission spaces `C̃ = G × (U+ × U-)^{k−1} × t` for a pole of order `k`.
//!
//! Points are `(C, d_1..d_{k−1}, e_1..e_{k−1}, Λ)` with `δ(d_j)⁻¹ = ε = δ(e_j)`
//! and `ε = exp(πiΛ/(k−1))`. Writing `D_i = d_i⋯d_1 C`, `E_i = e_i⋯e_1 C`,
//! `D = D_{k−1}`, `E = E_{k−1}`, the moment maps are `μ = D⁻¹E` for `G` and
//! `exp(−2πiΛ)` for `T`, and
//!
//! `ω = ½(D̄, Ē) + ½ Σ_i (𝒟_i, 𝒟_{i−1}) − (ℰ_i, ℰ_{i−1})`
//!
//! with `D̄ = D*θ̄`, `𝒟_i = D_i*θ`, `ℰ_i = E_i*θ`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::jets::{self, Jet, MatAlg, SJet};
use crate::lie::{self, CMat, CartanElement, Triangle, C64, I};
use crate::sample::{self, Rng};

use super::{
    diag_chart, group_chart, group_coords, inv, left_form, matrix_labels, require_parts, right_form, strict_chart,
    strict_entries, FactorKind, Point, QhSpace,
};

const STRUCT_TOL: f64 = 1e-10;

/// Which Borel each `d_j` lives in. `Standard` puts `d_odd, e_even` in `B-`;
/// `Opposite` swaps the two Borels throughout.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Orientation {
    Standard,
    Opposite,
}

impl Orientation {
    /// Triangle of `d_j` (1-based `j`).
    pub fn d_triangle(self, j: usize) -> Triangle {
        let standard = if j % 2 == 1 { Triangle::Lower } else { Triangle::Upper };
        match self {
            Orientation::Standard => standard,
            Orientation::Opposite => standard.opposite(),
        }
    }

    /// Triangle of `e_j` (1-based `j`).
    pub fn e_triangle(self, j: usize) -> Triangle {
        self.d_triangle(j).opposite()
    }
}

/// A point of `C̃` in its canonical coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct FissionPoint {
    pub c: CMat,
    pub d: Vec<CMat>,
    pub e: Vec<CMat>,
    pub lambda: CartanElement,
}

impl FissionPoint {
    pub fn k(&self) -> usize {
        self.d.len() + 1
    }

    pub fn n(&self) -> usize {
        self.c.nrows()
    }

    /// The point with `C = I`, unipotent parts trivial and the given `Λ`.
    pub fn trivial(n: usize, k: usize, lambda: CartanElement) -> Self {
        let k = k.max(2);
        let eps = lambda.exp_scaled(PI * I / (k as f64 - 1.0));
        let eps_inv = lambda.exp_scaled(-PI * I / (k as f64 - 1.0));
        Self {
            c: CMat::identity(n, n),
            d: vec![eps_inv; k - 1],
            e: vec![eps; k - 1],
            lambda,
        }
    }

    pub fn to_point(&self) -> Point {
        let mut parts = vec![self.c.clone()];
        parts.extend(self.d.iter().cloned());
        parts.extend(self.e.iter().cloned());
        parts.push(self.lambda.to_matrix());
        Point::new(parts)
    }

    pub fn from_point(p: &Point) -> Result<Self> {
        let count = p.parts.len();
        if count < 4 || count % 2 != 0 {
            return Err(Error::InvalidPoint(format!("{count} parts do not form a fission point")));
        }
        let k = count / 2;
        Ok(Self {
            c: p.parts[0].clone(),
            d: p.parts[1..k].to_vec(),
            e: p.parts[k..2 * k - 1].to_vec(),
            lambda: lie::delta_cartan(&lie::AlgebraElement(p.parts[2 * k - 1].clone())),
        })
    }

    /// `D_{k−1}` and `E_{k−1}`.
    pub fn d_e_products(&self) -> (CMat, CMat) {
        let d = self.d.iter().fold(self.c.clone(), |acc, dj| dj * acc);
        let e = self.e.iter().fold(self.c.clone(), |acc, ej| ej * acc);
        (d, e)
    }

    /// `μ = D⁻¹E`.
    pub fn moment(&self) -> Result<CMat> {
        let (d, e) = self.d_e_products();
        Ok(lie::inverse(&d, "D")? * e)
    }
}

/// A point in Stokes coordinates `(C, S_1..S_{2k−2}, Λ)`, with `S_odd ∈ U+`
/// and `S_even ∈ U-`.
#[derive(Clone, Debug, PartialEq)]
pub struct StokesPoint {
    pub c: CMat,
    pub s: Vec<CMat>,
    pub lambda: CartanElement,
}

impl StokesPoint {
    pub fn validate(&self) -> Result<()> {
        if self.s.is_empty() || self.s.len() % 2 != 0 {
            return Err(Error::InvalidPoint(format!("{} Stokes multipliers (need an even number > 0)", self.s.len())));
        }
        for (idx, s) in self.s.iter().enumerate() {
            let tri = if idx % 2 == 0 { Triangle::Upper } else { Triangle::Lower };
            if !lie::is_triangular(s, tri) {
                return Err(Error::NotTriangular {
                    what: "Stokes multiplier",
                    expected: tri.name(),
                });
            }
            if s.diagonal().iter().any(|z| (z - C64::new(1.0, 0.0)).norm() > STRUCT_TOL) {
                return Err(Error::InvalidPoint(format!("S_{} is not unipotent", idx + 1)));
            }
        }
        Ok(())
    }

    pub fn k(&self) -> usize {
        self.s.len() / 2 + 1
    }

    /// `C⁻¹ S_{2k−2}⋯S_1 e^{2πiΛ} C`.
    pub fn moment(&self) -> Result<CMat> {
        let prod = self.s.iter().fold(CMat::identity(self.c.nrows(), self.c.nrows()), |acc, s| s * acc);
        let e = self.lambda.exp_scaled(2.0 * PI * I);
        Ok(lie::inverse(&self.c, "C")? * prod * e * &self.c)
    }
}

/// `ε^p` for a diagonal `Λ` in any matrix algebra.
fn eps_pow<M: MatAlg>(lambda: &M, k: usize, p: i64) -> M {
    lambda.exp_diag(PI * I * p as f64 / (k as f64 - 1.0))
}

/// `d_j = ε^{−j} S_{2k−1−j}⁻¹ ε^{j−1}`, `e_j = ε^{j+2−2k} S_j ε^{2k−1−j}`,
/// computed in any matrix algebra (plain matrices or jets).
pub fn stokes_to_de_parts<M: MatAlg>(s: &[M], lambda: &M, k: usize) -> Option<(Vec<M>, Vec<M>)> {
    let ki = k as i64;
    let mut d = Vec::with_capacity(k - 1);
    let mut e = Vec::with_capacity(k - 1);
    for j in 1..k {
        let ji = j as i64;
        let s_inv = s[2 * k - 2 - j].try_inv()?;
        d.push(eps_pow(lambda, k, -ji).times(&s_inv).times(&eps_pow(lambda, k, ji - 1)));
        e.push(eps_pow(lambda, k, ji + 2 - 2 * ki).times(&s[j - 1]).times(&eps_pow(lambda, k, 2 * ki - 1 - ji)));
    }
    Some((d, e))
}

pub fn stokes_to_de(p: &StokesPoint) -> Result<FissionPoint> {
    p.validate()?;
    let k = p.k();
    let lam = p.lambda.to_matrix();
    let (d, e) = stokes_to_de_parts(&p.s, &lam, k).ok_or(Error::Singular { what: "Stokes multiplier" })?;
    Ok(FissionPoint {
        c: p.c.clone(),
        d,
        e,
        lambda: p.lambda.clone(),
    })
}

/// Inverse of [`stokes_to_de`]: `S_{2k−1−j} = ε^{j−1} d_j⁻¹ ε^{−j}`,
/// `S_j = ε^{2k−2−j} e_j ε^{j+1−2k}`.
pub fn de_to_stokes(p: &FissionPoint) -> Result<StokesPoint> {
    let k = p.k();
    let ki = k as i64;
    let lam = p.lambda.to_matrix();
    let mut s = vec![CMat::zeros(p.n(), p.n()); 2 * k - 2];
    for j in 1..k {
        let ji = j as i64;
        let d_inv = lie::inverse(&p.d[j - 1], "d_j")?;
        s[2 * k - 2 - j] = eps_pow(&lam, k, ji - 1) * d_inv * eps_pow(&lam, k, -ji);
        s[j - 1] = eps_pow(&lam, k, 2 * ki - 2 - ji) * &p.e[j - 1] * eps_pow(&lam, k, ji + 1 - 2 * ki);
    }
    let out = StokesPoint {
        c: p.c.clone(),
        s,
        lambda: p.lambda.clone(),
    };
    out.validate()?;
    Ok(out)
}

/// `ω(x, y)` pulled back to Stokes coordinates `(C, S_1..S_{2k−2}, Λ)`:
/// the left-exp chart for `C`, strictly triangular entries of each `S_i`
/// and the diagonal of `Λ`, in that order. The d/e parts are rebuilt from
/// the Stokes jets, so `Λ` enters only through `ε`.
pub fn omega_stokes(space: &Fission, p: &StokesPoint, x: &[C64], y: &[C64]) -> Result<C64> {
    p.validate()?;
    let (n, k) = (space.n, space.k);
    if p.k() != k || p.c.nrows() != n {
        return Err(Error::InvalidPoint("Stokes point does not match the space".into()));
    }
    let nn = n * n;
    let zero = vec![C64::new(0.0, 0.0); space.dim()];
    let xs = jets::seed(&zero, &[x, y]);
    let mut off = nn;
    let mut s = Vec::with_capacity(2 * k - 2);
    for (idx, si) in p.s.iter().enumerate() {
        let tri = if idx % 2 == 0 { Triangle::Upper } else { Triangle::Lower };
        let len = tri.strict_positions(n).len();
        s.push(strict_chart(si, tri, &xs[off..off + len]));
        off += len;
    }
    let lam = diag_chart(&p.lambda.to_matrix(), &xs[off..]);
    let (d, e) = stokes_to_de_parts(&s, &lam, k).ok_or(Error::Singular { what: "Stokes multiplier" })?;
    let mut m = vec![group_chart(&p.c, &xs[..nn])];
    m.extend(d);
    m.extend(e);
    m.push(lam);
    Ok(space.two_form(&m, 0, 1)?.value())
}

/// The fission space `C̃` for `k ≥ 2`.
#[derive(Clone, Debug)]
pub struct Fission {
    n: usize,
    k: usize,
    orientation: Orientation,
}

impl Fission {
    pub fn new(n: usize, k: usize) -> Result<Self> {
        Self::with_orientation(n, k, Orientation::Standard)
    }

    pub fn with_orientation(n: usize, k: usize, orientation: Orientation) -> Result<Self> {
        if k < 2 {
            return Err(Error::InvalidPoleOrder { k, min: 2 });
        }
        if n == 0 {
            return Err(Error::SizeMismatch { expected: 1, found: 0 });
        }
        Ok(Self { n, k, orientation })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn orientation(&self) -> Orientation {
        self.orientation
    }

    fn strict_len(&self) -> usize {
        self.n * (self.n - 1) / 2
    }

    fn lambda_offset(&self) -> usize {
        self.n * self.n + 2 * (self.k - 1) * self.strict_len()
    }

    fn eps_scale(&self) -> C64 {
        PI * I / (self.k as f64 - 1.0)
    }

    /// Validated point from its components.
    pub fn point(&self, p: &FissionPoint) -> Result<Point> {
        let out = p.to_point();
        self.validate(&out)?;
        Ok(out)
    }

    /// Jets of `D_0..D_{k−1}` and `E_0..E_{k−1}` with their inverses.
    fn products(&self, m: &[Jet]) -> Result<Products> {
        let k = self.k;
        let c = &m[0];
        let ci = inv(c, "C")?;
        let mut d = vec![c.clone()];
        let mut di = vec![ci.clone()];
        let mut e = vec![c.clone()];
        let mut ei = vec![ci];
        for j in 1..k {
            let dj = &m[j];
            let ej = &m[k - 1 + j];
            d.push(dj * &d[j - 1]);
            di.push(&di[j - 1] * &inv(dj, "d_j")?);
            e.push(ej * &e[j - 1]);
            ei.push(&ei[j - 1] * &inv(ej, "e_j")?);
        }
        Ok(Products { d, di, e, ei })
    }
}

struct Products {
    d: Vec<Jet>,
    di: Vec<Jet>,
    e: Vec<Jet>,
    ei: Vec<Jet>,
}

impl QhSpace for Fission {
    fn name(&self) -> String {
        let o = match self.orientation {
            Orientation::Standard => "",
            Orientation::Opposite => ",opposite",
        };
        format!("fission(n={},k={}{o})", self.n, self.k)
    }

    fn n(&self) -> usize {
        self.n
    }

    fn dim(&self) -> usize {
        self.n * self.n + (self.k - 1) * (self.n * self.n - self.n) + self.n
    }

    fn factors(&self) -> Vec<FactorKind> {
        vec![FactorKind::G, FactorKind::T]
    }

    fn coordinate_labels(&self) -> Vec<String> {
        let mut out = matrix_labels("C", self.n);
        for (name, tri) in [("d", 0), ("e", 1)] {
            for j in 1..self.k {
                let t = if tri == 0 {
                    self.orientation.d_triangle(j)
                } else {
                    self.orientation.e_triangle(j)
                };
                for (a, b) in t.strict_positions(self.n) {
                    out.push(format!("{name}{j}[{}{}]", a + 1, b + 1));
                }
            }
        }
        for i in 0..self.n {
            out.push(format!("L[{}]", i + 1));
        }
        out
    }

    fn part_count(&self) -> usize {
        2 * self.k
    }

    fn embed(&self, p: &Point, x: &[SJet]) -> Result<Vec<Jet>> {
        require_parts(p, 2 * self.k)?;
        let (n, k, s) = (self.n, self.k, self.strict_len());
        let nn = n * n;
        let lam = diag_chart(&p.parts[2 * k - 1], &x[self.lambda_offset()..]);
        let eps = lam.exp_diagonal(self.eps_scale());
        let eps_inv = lam.exp_diagonal(-self.eps_scale());
        let eps0 = eps.value().clone();
        let eps0_inv = eps_inv.value().clone();
        let mut out = vec![group_chart(&p.parts[0], &x[..nn])];
        for j in 1..k {
            let off = nn + (j - 1) * s;
            let u0 = &eps0 * &p.parts[j];
            let u = strict_chart(&u0, self.orientation.d_triangle(j), &x[off..off + s]);
            out.push(&eps_inv * &u);
        }
        for j in 1..k {
            let off = nn + (k - 1 + j - 1) * s;
            let u0 = &eps0_inv * &p.parts[k - 1 + j];
            let u = strict_chart(&u0, self.orientation.e_triangle(j), &x[off..off + s]);
            out.push(&eps * &u);
        }
        out.push(lam);
        Ok(out)
    }

    fn tangent_coords(&self, p: &Point, dparts: &[CMat]) -> Result<Vec<C64>> {
        let k = self.k;
        let lam0 = &p.parts[2 * k - 1];
        let dlam = lie::diag_matrix(&dparts[2 * k - 1].diagonal().iter().copied().collect::<Vec<_>>());
        let eps = lam0.exp_diag(self.eps_scale());
        let eps_inv = lam0.exp_diag(-self.eps_scale());
        // dε = (πi/(k−1)) dΛ ε
        let deps = &dlam * &eps * self.eps_scale();
        let mut out = group_coords(&p.parts[0], &dparts[0])?;
        for j in 1..k {
            // u = ε d  ⇒  du = dε d + ε dd
            let du = &deps * &p.parts[j] + &eps * &dparts[j];
            out.extend(strict_entries(&du, self.orientation.d_triangle(j)));
        }
        for j in 1..k {
            // u' = ε⁻¹ e  ⇒  du' = −ε⁻¹ dε ε⁻¹ e + ε⁻¹ de
            let e = &p.parts[k - 1 + j];
            let de = &dparts[k - 1 + j];
            let du = -(&eps_inv * &deps * &eps_inv * e) + &eps_inv * de;
            out.extend(strict_entries(&du, self.orientation.e_triangle(j)));
        }
        out.extend(dlam.diagonal().iter().copied());
        Ok(out)
    }

    fn two_form(&self, m: &[Jet], u: usize, v: usize) -> Result<SJet> {
        let k = self.k;
        let pr = self.products(m)?;
        let (d, di, e, ei) = (&pr.d[k - 1], &pr.di[k - 1], &pr.e[k - 1], &pr.ei[k - 1]);
        let mut total = jets::pair(&right_form(d, di, u), &right_form(e, ei, v), &right_form(d, di, v), &right_form(e, ei, u));
        for i in 1..k {
            let dl = |j: usize, s: usize| left_form(&pr.d[j], &pr.di[j], s);
            let el = |j: usize, s: usize| left_form(&pr.e[j], &pr.ei[j], s);
            total = total + jets::pair(&dl(i, u), &dl(i - 1, v), &dl(i, v), &dl(i - 1, u))
                - jets::pair(&el(i, u), &el(i - 1, v), &el(i, v), &el(i - 1, u));
        }
        Ok(total.scale(C64::new(0.5, 0.0)))
    }

    fn moment(&self, m: &[Jet], factor: usize) -> Result<Jet> {
        match super::require_factor(self, factor)? {
            FactorKind::G => {
                let pr = self.products(m)?;
                Ok(&pr.di[self.k - 1] * &pr.e[self.k - 1])
            }
            FactorKind::T => Ok(m[2 * self.k - 1].exp_diagonal(-2.0 * PI * I)),
        }
    }

    // μ = C⁻¹ d_1⁻¹ ⋯ d_{k−1}⁻¹ e_{k−1} ⋯ e_1 C, with d_j = ε⁻¹u_j and
    // e_j = εu'_j split further so that every letter is unipotent,
    // diagonal or C.
    fn moment_word(&self, m: &[Jet], factor: usize) -> Result<Vec<(Jet, Jet)>> {
        let k = self.k;
        if super::require_factor(self, factor)? == FactorKind::T {
            return Ok(vec![(self.moment(m, factor)?, self.moment_inverse(m, factor)?)]);
        }
        let lam = &m[2 * k - 1];
        let eps = (lam.exp_diagonal(self.eps_scale()), lam.exp_diagonal(-self.eps_scale()));
        let ci = inv(&m[0], "C")?;
        let mut out = vec![(ci.clone(), m[0].clone())];
        for j in 1..k {
            let u = &eps.0 * &m[j];
            out.push((inv(&u, "u_j")?, u));
            out.push(eps.clone());
        }
        for j in (1..k).rev() {
            let u = &eps.1 * &m[k - 1 + j];
            out.push(eps.clone());
            out.push((u.clone(), inv(&u, "u'_j")?));
        }
        out.push((m[0].clone(), ci));
        Ok(out)
    }

    fn moment_inverse(&self, m: &[Jet], factor: usize) -> Result<Jet> {
        match super::require_factor(self, factor)? {
            FactorKind::G => {
                let pr = self.products(m)?;
                Ok(&pr.ei[self.k - 1] * &pr.d[self.k - 1])
            }
            FactorKind::T => Ok(m[2 * self.k - 1].exp_diagonal(2.0 * PI * I)),
        }
    }

    fn act(&self, factor: usize, g: &Jet, m: &[Jet]) -> Result<Vec<Jet>> {
        let gi = inv(g, "group element")?;
        let last = m.len() - 1;
        match super::require_factor(self, factor)? {
            FactorKind::G => {
                let mut out = m.to_vec();
                out[0] = &m[0] * &gi;
                Ok(out)
            }
            FactorKind::T => Ok(m
                .iter()
                .enumerate()
                .map(|(idx, x)| match idx {
                    0 => g * x,
                    i if i == last => x.clone(),
                    _ => &(g * x) * &gi,
                })
                .collect()),
        }
    }

    fn sample_point(&self, rng: &mut Rng) -> Result<Point> {
        let (n, k) = (self.n, self.k);
        let c = sample::group_element(n, rng);
        let lambda = sample::exponent_cartan(n, rng);
        let eps = lambda.exp_scaled(self.eps_scale());
        let eps_inv = lambda.exp_scaled(-self.eps_scale());
        let d = (1..k).map(|j| &eps_inv * sample::unipotent(n, self.orientation.d_triangle(j), rng)).collect();
        let e = (1..k).map(|j| &eps * sample::unipotent(n, self.orientation.e_triangle(j), rng)).collect();
        Ok(FissionPoint { c, d, e, lambda }.to_point())
    }

    fn validate(&self, p: &Point) -> Result<()> {
        require_parts(p, 2 * self.k)?;
        for part in &p.parts {
            jets::require_size(part, self.n)?;
        }
        if !lie::is_invertible(&p.parts[0]) {
            return Err(Error::Singular { what: "C" });
        }
        let k = self.k;
        let lam = &p.parts[2 * k - 1];
        if !lie::is_diagonal(lam) {
            return Err(Error::InvalidPoint("Λ is not diagonal".into()));
        }
        let eps = lam.exp_diag(self.eps_scale());
        let eps_inv = lam.exp_diag(-self.eps_scale());
        for j in 1..k {
            let checks = [
                ("d_j", &p.parts[j], self.orientation.d_triangle(j), &eps_inv),
                ("e_j", &p.parts[k - 1 + j], self.orientation.e_triangle(j), &eps),
            ];
            for (what, m, tri, diag) in checks {
                if !lie::is_triangular(m, tri) {
                    return Err(Error::NotTriangular { what, expected: tri.name() });
                }
                let scale = lie::max_norm(diag).max(1.0);
                let mismatch = (0..self.n).map(|i| (m[(i, i)] - diag[(i, i)]).norm()).fold(0.0, f64::max);
                if mismatch > STRUCT_TOL * scale {
                    return Err(Error::InvalidPoint(format!("torus part of {what} (j = {j}) does not match ε(Λ)")));
                }
            }
        }
        Ok(())
    }
}

/// `½ ×` the alternative expansion of `2ω` in terms of `γ̄ = C*θ̄`,
/// `δ_i = d_i*θ`, `ε_i = e_i*θ` and the words
/// `(ij) = d_i⁻¹⋯d_{k−1}⁻¹ e_{k−1}⋯e_j`, `[ij] = d_{i−1}⋯d_j`,
/// `{ij} = e_{i−1}⋯e_j`.
pub fn omega_alt(space: &Fission, p: &Point, x: &[C64], y: &[C64]) -> Result<C64> {
    let terms = omega_alt_terms(space, p, x, y)?;
    Ok(terms.iter().sum::<C64>() * 0.5)
}

// The pairings summing to 2ω. Conjugating words are inverted letter by letter;
// inverting the assembled word loses ~1e-9 at n = 3.
fn omega_alt_terms(space: &Fission, p: &Point, x: &[C64], y: &[C64]) -> Result<Vec<C64>> {
    let k = space.k;
    let n = space.n;
    let m = super::embed_dirs(space, p, &[x, y])?;
    let val = |j: &Jet| j.value().clone();
    let c = val(&m[0]);
    let d: Vec<CMat> = (1..k).map(|j| val(&m[j])).collect();
    let e: Vec<CMat> = (1..k).map(|j| val(&m[k - 1 + j])).collect();
    let d_inv: Vec<CMat> = d.iter().map(|dj| lie::inverse(dj, "d_j")).collect::<Result<_>>()?;
    let e_inv: Vec<CMat> = e.iter().map(|ej| lie::inverse(ej, "e_j")).collect::<Result<_>>()?;
    let c_inv = lie::inverse(&c, "C")?;

    // One-form values along slots 0 (X) and 1 (Y); indices are 1-based below.
    let gamma = [m[0].first(0) * &c_inv, m[0].first(1) * &c_inv];
    let delta: Vec<[CMat; 2]> = (1..k).map(|j| [&d_inv[j - 1] * m[j].first(0), &d_inv[j - 1] * m[j].first(1)]).collect();
    let epsf: Vec<[CMat; 2]> = (1..k)
        .map(|j| [&e_inv[j - 1] * m[k - 1 + j].first(0), &e_inv[j - 1] * m[k - 1 + j].first(1)])
        .collect();

    let id = CMat::identity(n, n);
    // Words carry their inverse, built from letter inverses.
    type Word = (CMat, CMat);
    let push = |w: &mut Word, a: &CMat, a_inv: &CMat| {
        w.0 *= a;
        w.1 = a_inv * &w.1;
    };
    let invert = |w: &Word| -> Word { (w.1.clone(), w.0.clone()) };
    // (ij) for 1 ≤ i, j ≤ k−1.
    let paren = |i: usize, j: usize| -> Word {
        let mut w = (id.clone(), id.clone());
        for l in i..k {
            push(&mut w, &d_inv[l - 1], &d[l - 1]);
        }
        for l in (j..k).rev() {
            push(&mut w, &e[l - 1], &e_inv[l - 1]);
        }
        w
    };
    // [ij] = d_{i−1}⋯d_j and {ij} = e_{i−1}⋯e_j (empty product when i = j).
    let bracket = |i: usize, j: usize, parts: &[CMat], inv: &[CMat]| -> Word {
        let mut w = (id.clone(), id.clone());
        for l in (j..i).rev() {
            push(&mut w, &parts[l - 1], &inv[l - 1]);
        }
        w
    };
    let conj = |w: &Word, a: &CMat| -> CMat { &w.0 * a * &w.1 };
    let pair = |a: &[CMat; 2], b: &[CMat; 2]| lie::tr_mul(&a[0], &b[1]) - lie::tr_mul(&a[1], &b[0]);
    let map2 = |w: &Word, a: &[CMat; 2]| -> [CMat; 2] { [conj(w, &a[0]), conj(w, &a[1])] };

    let mut terms = vec![pair(&gamma, &map2(&paren(1, 1), &gamma))];
    for i in 1..k {
        let w1 = paren(1, i);
        let wi1 = invert(&paren(i, 1));
        let ei1 = invert(&bracket(i, 1, &e, &e_inv));
        let di1 = invert(&bracket(i, 1, &d, &d_inv));
        terms.push(pair(&gamma, &map2(&w1, &epsf[i - 1])));
        terms.push(pair(&gamma, &map2(&ei1, &epsf[i - 1])));
        terms.push(-pair(&gamma, &map2(&wi1, &delta[i - 1])));
        terms.push(-pair(&gamma, &map2(&di1, &delta[i - 1])));
    }
    for i in 1..k {
        for j in 1..k {
            terms.push(pair(&delta[i - 1], &map2(&paren(i, j), &epsf[j - 1])));
        }
        for j in 1..i {
            terms.push(pair(&delta[i - 1], &map2(&bracket(i, j, &d, &d_inv), &delta[j - 1])));
            terms.push(-pair(&epsf[i - 1], &map2(&bracket(i, j, &e, &e_inv), &epsf[j - 1])));
        }
    }
    Ok(terms)
}

/// The `k = 2` point as an element of `G × G*`: `b- = d_1`, `b+ = e_1`.
#[derive(Clone, Debug, PartialEq)]
pub struct DualGroupPoint {
    pub c: CMat,
    pub b_minus: CMat,
    pub b_plus: CMat,
    pub lambda: CartanElement,
}

impl DualGroupPoint {
    /// `C⁻¹ b-⁻¹ b+ C`.
    pub fn moment(&self) -> Result<CMat> {
        Ok(lie::inverse(&self.c, "C")? * lie::inverse(&self.b_minus, "b-")? * &self.b_plus * &self.c)
    }
}

pub fn dual_group_view(p: &FissionPoint) -> Result<DualGroupPoint> {
    if p.k() != 2 {
        return Err(Error::InvalidPoleOrder { k: p.k(), min: 2 });
    }
    Ok(DualGroupPoint {
        c: p.c.clone(),
        b_minus: p.d[0].clone(),
        b_plus: p.e[0].clone(),
        lambda: p.lambda.clone(),
    })
}

/// The `k = 1` space `G × t_1` with `μ = C⁻¹ e^{2πiΛ} C`, `μ_T = e^{−2πiΛ}`
/// and `ω = 2πi(γ̄, dΛ) + ½(γ̄, e^{2πiΛ} γ̄ e^{−2πiΛ})`, `γ̄ = C*θ̄`.
#[derive(Clone, Debug)]
pub struct FissionSimple {
    n: usize,
}

impl FissionSimple {
    pub fn new(n: usize) -> Self {
        Self { n }
    }

    /// Validated point `[C, Λ]`; `Λ` must be affine-regular.
    pub fn point(&self, c: CMat, lambda: &CartanElement) -> Result<Point> {
        let p = Point::new(vec![c, lambda.to_matrix()]);
        self.validate(&p)?;
        Ok(p)
    }
}

impl QhSpace for FissionSimple {
    fn name(&self) -> String {
        format!("fission_simple(n={})", self.n)
    }

    fn n(&self) -> usize {
        self.n
    }

    fn dim(&self) -> usize {
        self.n * self.n + self.n
    }

    fn factors(&self) -> Vec<FactorKind> {
        vec![FactorKind::G, FactorKind::T]
    }

    fn coordinate_labels(&self) -> Vec<String> {
        let mut out = matrix_labels("C", self.n);
        out.extend((0..self.n).map(|i| format!("L[{}]", i + 1)));
        out
    }

    fn part_count(&self) -> usize {
        2
    }

    fn embed(&self, p: &Point, x: &[SJet]) -> Result<Vec<Jet>> {
        require_parts(p, 2)?;
        let nn = self.n * self.n;
        Ok(vec![group_chart(&p.parts[0], &x[..nn]), diag_chart(&p.parts[1], &x[nn..])])
    }

    fn tangent_coords(&self, p: &Point, dparts: &[CMat]) -> Result<Vec<C64>> {
        let mut out = group_coords(&p.parts[0], &dparts[0])?;
        out.extend(dparts[1].diagonal().iter().copied());
        Ok(out)
    }

    fn two_form(&self, m: &[Jet], u: usize, v: usize) -> Result<SJet> {
        let (c, lam) = (&m[0], &m[1]);
        let ci = inv(c, "C")?;
        let ex = lam.exp_diagonal(2.0 * PI * I);
        let exi = lam.exp_diagonal(-2.0 * PI * I);
        let gu = right_form(c, &ci, u);
        let gv = right_form(c, &ci, v);
        let first = jets::pair(&gu, &lam.deriv(v), &gv, &lam.deriv(u)).scale(2.0 * PI * I);
        let ad = |x: &Jet| &(&ex * x) * &exi;
        let second = jets::pair(&gu, &ad(&gv), &gv, &ad(&gu)).scale(C64::new(0.5, 0.0));
        Ok(first + second)
    }

    fn moment(&self, m: &[Jet], factor: usize) -> Result<Jet> {
        let (c, lam) = (&m[0], &m[1]);
        match super::require_factor(self, factor)? {
            FactorKind::G => Ok(&(&inv(c, "C")? * &lam.exp_diagonal(2.0 * PI * I)) * c),
            FactorKind::T => Ok(lam.exp_diagonal(-2.0 * PI * I)),
        }
    }

    fn moment_word(&self, m: &[Jet], factor: usize) -> Result<Vec<(Jet, Jet)>> {
        let (c, lam) = (&m[0], &m[1]);
        let ex = (lam.exp_diagonal(2.0 * PI * I), lam.exp_diagonal(-2.0 * PI * I));
        match super::require_factor(self, factor)? {
            FactorKind::G => {
                let ci = inv(c, "C")?;
                Ok(vec![(ci.clone(), c.clone()), ex, (c.clone(), ci)])
            }
            FactorKind::T => Ok(vec![(ex.1, ex.0)]),
        }
    }

    fn moment_inverse(&self, m: &[Jet], factor: usize) -> Result<Jet> {
        let (c, lam) = (&m[0], &m[1]);
        match super::require_factor(self, factor)? {
            FactorKind::G => Ok(&(&inv(c, "C")? * &lam.exp_diagonal(-2.0 * PI * I)) * c),
            FactorKind::T => Ok(lam.exp_diagonal(2.0 * PI * I)),
        }
    }

    fn act(&self, factor: usize, g: &Jet, m: &[Jet]) -> Result<Vec<Jet>> {
        match super::require_factor(self, factor)? {
            FactorKind::G => Ok(vec![&m[0] * &inv(g, "group element")?, m[1].clone()]),
            FactorKind::T => Ok(vec![g * &m[0], m[1].clone()]),
        }
    }

    fn sample_point(&self, rng: &mut Rng) -> Result<Point> {
        let c = sample::group_element(self.n, rng);
        let lambda = sample::affine_regular_cartan(self.n, rng);
        Ok(Point::new(vec![c, lambda.to_matrix()]))
    }

    fn validate(&self, p: &Point) -> Result<()> {
        require_parts(p, 2)?;
        for part in &p.parts {
            jets::require_size(part, self.n)?;
        }
        if !lie::is_invertible(&p.parts[0]) {
            return Err(Error::Singular { what: "C" });
        }
        if !lie::is_diagonal(&p.parts[1]) {
            return Err(Error::InvalidPoint("Λ is not diagonal".into()));
        }
        lie::delta_cartan(&lie::AlgebraElement(p.parts[1].clone())).require_affine_regular()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::moment_at;

    #[test]
    fn identity_point_has_trivial_moments() {
        let space = Fission::new(2, 3).unwrap();
        let p = space.point(&FissionPoint::trivial(2, 3, CartanElement::zero(2))).unwrap();
        let id = CMat::identity(2, 2);
        assert!(lie::max_norm(&(moment_at(&space, &p, 0).unwrap() - &id)) < 1e-15);
        assert!(lie::max_norm(&(moment_at(&space, &p, 1).unwrap() - &id)) < 1e-15);
    }

    #[test]
    fn dimension_count() {
        assert_eq!(Fission::new(2, 3).unwrap().dim(), 10);
        assert_eq!(Fission::new(3, 3).unwrap().dim(), 24);
        assert_eq!(FissionSimple::new(2).dim(), 6);
        assert_eq!(Fission::new(2, 3).unwrap().coordinate_labels().len(), 10);
    }

    #[test]
    fn k_equal_one_rejects_integer_differences() {
        let space = FissionSimple::new(2);
        let err = space.point(CMat::identity(2, 2), &CartanElement::from_real(&[0.0, 1.0]));
        assert!(matches!(err, Err(Error::NotAffineRegular { i: 0, j: 1 })));
    }

    #[test]
    fn sampled_points_validate_and_tangent_coords_invert_embedding() {
        let mut rng = sample::rng(5);
        for orientation in [Orientation::Standard, Orientation::Opposite] {
            let space = Fission::with_orientation(3, 3, orientation).unwrap();
            let p = space.sample_point(&mut rng).unwrap();
            space.validate(&p).unwrap();
            let v = sample::disc_vector(space.dim(), &mut rng);
            let m = crate::spaces::embed_dirs(&space, &p, &[&v]).unwrap();
            let d: Vec<CMat> = m.iter().map(|j| j.first(0).clone()).collect();
            let back = space.tangent_coords(&p, &d).unwrap();
            let err = back.iter().zip(&v).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            assert!(err < 1e-12);
        }
    }
}
