//! Forward jets over complex matrices.
//!
//! A [`Jet`] is an element of `M_n(C) ⊗ C[ε0, ε1, ε2]/(ε0², ε1², ε2²)`:
//! a value, first derivatives along up to three seeded directions, their
//! mixed second derivatives and the single mixed third derivative. The
//! component for a subset `S` of the directions lives at the bitmask of `S`.
//! Because the truncation only kills squares, every operation here is an
//! exact algebra homomorphism: no finite differences are involved anywhere.
//!
//! Two-forms are evaluated on two slots and differentiated along the third,
//! which is all that `dω` on coordinate vector fields needs.

use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::lie::{self, CMat, C64};

/// Number of simultaneously active directions.
pub const SLOTS: usize = 3;
const COMPONENTS: usize = 1 << SLOTS;

fn zero() -> C64 {
    C64::new(0.0, 0.0)
}

fn one() -> C64 {
    C64::new(1.0, 0.0)
}

/// Iterate over the submasks of `m` (including 0 and `m`).
fn submasks(m: usize) -> impl Iterator<Item = usize> {
    let mut s = Some(m);
    std::iter::from_fn(move || {
        let cur = s?;
        s = if cur == 0 { None } else { Some((cur - 1) & m) };
        Some(cur)
    })
}

/// Scalar jet.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SJet {
    pub c: [C64; COMPONENTS],
}

impl SJet {
    pub fn constant(v: C64) -> Self {
        let mut c = [zero(); COMPONENTS];
        c[0] = v;
        Self { c }
    }

    pub fn zero() -> Self {
        Self::constant(zero())
    }

    /// `v + Σ_s ε_s dirs[s]`.
    pub fn seeded(v: C64, dirs: [C64; SLOTS]) -> Self {
        let mut out = Self::constant(v);
        for (s, d) in dirs.into_iter().enumerate() {
            out.c[1 << s] = d;
        }
        out
    }

    pub fn value(&self) -> C64 {
        self.c[0]
    }

    pub fn first(&self, slot: usize) -> C64 {
        self.c[1 << slot]
    }

    /// Derivative along `slot`, as a jet in the remaining directions.
    pub fn deriv(&self, slot: usize) -> Self {
        let bit = 1 << slot;
        let mut c = [zero(); COMPONENTS];
        for (m, out) in c.iter_mut().enumerate() {
            if m & bit == 0 {
                *out = self.c[m | bit];
            }
        }
        Self { c }
    }

    pub fn exp(&self) -> Self {
        let e = self.c[0].exp();
        let mut n = *self;
        n.c[0] = zero();
        let n2 = n * n;
        let n3 = n2 * n;
        let mut out = Self::constant(one()) + n + n2.scale(C64::new(0.5, 0.0)) + n3.scale(C64::new(1.0 / 6.0, 0.0));
        for x in out.c.iter_mut() {
            *x *= e;
        }
        out
    }

    pub fn inv(&self) -> Self {
        let w = one() / self.c[0];
        let mut m = self.scale(w);
        m.c[0] = zero();
        let m2 = m * m;
        let m3 = m2 * m;
        (Self::constant(one()) - m + m2 - m3).scale(w)
    }

    pub fn scale(&self, s: C64) -> Self {
        let mut out = *self;
        for x in out.c.iter_mut() {
            *x *= s;
        }
        out
    }
}

impl Add for SJet {
    type Output = SJet;
    fn add(mut self, o: SJet) -> SJet {
        for (a, b) in self.c.iter_mut().zip(o.c) {
            *a += b;
        }
        self
    }
}

impl Sub for SJet {
    type Output = SJet;
    fn sub(mut self, o: SJet) -> SJet {
        for (a, b) in self.c.iter_mut().zip(o.c) {
            *a -= b;
        }
        self
    }
}

impl Neg for SJet {
    type Output = SJet;
    fn neg(self) -> SJet {
        self.scale(-one())
    }
}

impl Mul for SJet {
    type Output = SJet;
    fn mul(self, o: SJet) -> SJet {
        let mut c = [zero(); COMPONENTS];
        for (m, out) in c.iter_mut().enumerate() {
            for s in submasks(m) {
                *out += self.c[s] * o.c[m ^ s];
            }
        }
        SJet { c }
    }
}

/// Matrix jet. `nz` records which components may be nonzero so products can
/// skip the (frequent) structural zeros.
#[derive(Clone, Debug)]
pub struct Jet {
    c: [CMat; COMPONENTS],
    nz: u8,
}

impl Jet {
    pub fn constant(m: CMat) -> Self {
        let n = m.nrows();
        let mut c: [CMat; COMPONENTS] = std::array::from_fn(|_| CMat::zeros(n, n));
        c[0] = m;
        Self { c, nz: 1 }
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            c: std::array::from_fn(|_| CMat::zeros(n, n)),
            nz: 0,
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::constant(CMat::identity(n, n))
    }

    /// `v + Σ_s ε_s dirs[s]`.
    pub fn seeded(v: CMat, dirs: [CMat; SLOTS]) -> Self {
        let mut out = Self::constant(v);
        for (s, d) in dirs.into_iter().enumerate() {
            out.set(1 << s, d);
        }
        out
    }

    /// The one-parameter jet `I + ε_slot X` (first-order `exp(tX)`).
    pub fn infinitesimal(x: &CMat, slot: usize) -> Self {
        let n = x.nrows();
        let mut out = Self::identity(n);
        out.set(1 << slot, x.clone());
        out
    }

    pub fn n(&self) -> usize {
        self.c[0].nrows()
    }

    pub fn value(&self) -> &CMat {
        &self.c[0]
    }

    pub fn first(&self, slot: usize) -> &CMat {
        &self.c[1 << slot]
    }

    pub fn component(&self, mask: usize) -> &CMat {
        &self.c[mask]
    }

    pub fn set(&mut self, mask: usize, m: CMat) {
        self.c[mask] = m;
        self.nz |= 1 << mask;
    }

    fn has(&self, mask: usize) -> bool {
        self.nz & (1 << mask) != 0
    }

    pub fn is_constant(&self) -> bool {
        self.nz <= 1
    }

    /// Derivative along `slot`, as a jet in the remaining directions.
    pub fn deriv(&self, slot: usize) -> Self {
        let bit = 1 << slot;
        let mut out = Self::zeros(self.n());
        for m in 0..COMPONENTS {
            if m & bit == 0 && self.has(m | bit) {
                out.set(m, self.c[m | bit].clone());
            }
        }
        out
    }

    pub fn scale(&self, s: C64) -> Self {
        let mut out = self.clone();
        for m in 0..COMPONENTS {
            if out.has(m) {
                out.c[m] *= s;
            }
        }
        out
    }

    /// Scalar-jet times matrix-jet.
    pub fn scale_jet(&self, s: &SJet) -> Self {
        let mut out = Self::zeros(self.n());
        for m in 0..COMPONENTS {
            let mut acc: Option<CMat> = None;
            for a in submasks(m) {
                let b = m ^ a;
                if s.c[a] != zero() && self.has(b) {
                    let term = &self.c[b] * s.c[a];
                    acc = Some(match acc {
                        Some(x) => x + term,
                        None => term,
                    });
                }
            }
            if let Some(x) = acc {
                out.set(m, x);
            }
        }
        out
    }

    pub fn product(&self, o: &Jet) -> Jet {
        let mut out = Self::zeros(self.n());
        for m in 0..COMPONENTS {
            let mut acc: Option<CMat> = None;
            for a in submasks(m) {
                let b = m ^ a;
                if self.has(a) && o.has(b) {
                    let term = &self.c[a] * &o.c[b];
                    acc = Some(match acc {
                        Some(x) => x + term,
                        None => term,
                    });
                }
            }
            if let Some(x) = acc {
                out.set(m, x);
            }
        }
        out
    }

    fn combine(&self, o: &Jet, sign: f64) -> Jet {
        let mut out = self.clone();
        for m in 0..COMPONENTS {
            if o.has(m) {
                if out.has(m) {
                    out.c[m] += &o.c[m] * C64::new(sign, 0.0);
                } else {
                    out.set(m, &o.c[m] * C64::new(sign, 0.0));
                }
            }
        }
        out
    }

    /// Inverse; `None` when the value is singular.
    pub fn inv(&self) -> Option<Jet> {
        if !lie::is_invertible(&self.c[0]) {
            return None;
        }
        let w = Jet::constant(self.c[0].clone().try_inverse()?);
        if self.is_constant() {
            return Some(w);
        }
        // J = V (I + M), M = V⁻¹ N nilpotent of order 4.
        let mut nil = self.clone();
        nil.c[0] = CMat::zeros(self.n(), self.n());
        nil.nz &= !1;
        let m = w.product(&nil);
        let m2 = m.product(&m);
        let m3 = m2.product(&m);
        let series = Jet::identity(self.n()).combine(&m, -1.0).combine(&m2, 1.0).combine(&m3, -1.0);
        Some(series.product(&w))
    }

    /// Matrix exponential. Exact in the jet algebra: the nilpotent series
    /// when the value vanishes, the left-regular representation otherwise.
    pub fn exp(&self) -> Jet {
        let n = self.n();
        if self.c[0].iter().all(|z| *z == zero()) {
            let m = self;
            let m2 = m.product(m);
            let m3 = m2.product(m);
            return Jet::identity(n)
                .combine(m, 1.0)
                .combine(&m2.scale(C64::new(0.5, 0.0)), 1.0)
                .combine(&m3.scale(C64::new(1.0 / 6.0, 0.0)), 1.0);
        }
        // Left multiplication by J on coefficient vectors is block lower
        // triangular in the subset order; exp of it applied to 1 is exp(J).
        let size = COMPONENTS * n;
        let mut big = CMat::zeros(size, size);
        for m in 0..COMPONENTS {
            for a in submasks(m) {
                let b = m ^ a;
                if self.has(a) {
                    big.view_mut((m * n, b * n), (n, n)).copy_from(&self.c[a]);
                }
            }
        }
        let e = lie::expm(&big);
        let mut out = Jet::zeros(n);
        for m in 0..COMPONENTS {
            out.set(m, e.view((m * n, 0), (n, n)).into_owned());
        }
        out
    }

    pub fn trace(&self) -> SJet {
        let mut c = [zero(); COMPONENTS];
        for (m, out) in c.iter_mut().enumerate() {
            if self.has(m) {
                *out = self.c[m].trace();
            }
        }
        SJet { c }
    }

    pub fn entry(&self, i: usize, j: usize) -> SJet {
        let mut c = [zero(); COMPONENTS];
        for (m, out) in c.iter_mut().enumerate() {
            *out = self.c[m][(i, j)];
        }
        SJet { c }
    }

    /// Diagonal matrix jet from scalar jets.
    pub fn from_diagonal(entries: &[SJet]) -> Jet {
        let n = entries.len();
        let mut out = Jet::zeros(n);
        for m in 0..COMPONENTS {
            if entries.iter().any(|e| e.c[m] != zero()) {
                out.set(m, lie::diag_matrix(&entries.iter().map(|e| e.c[m]).collect::<Vec<_>>()));
            }
        }
        out
    }

    /// Square matrix jet from scalar jets per entry.
    pub fn from_entries(n: usize, f: impl Fn(usize, usize) -> SJet) -> Jet {
        let entries: Vec<SJet> = (0..n * n).map(|idx| f(idx / n, idx % n)).collect();
        let mut out = Jet::zeros(n);
        for m in 0..COMPONENTS {
            if entries.iter().any(|e| e.c[m] != zero()) {
                out.set(m, CMat::from_fn(n, n, |i, j| entries[i * n + j].c[m]));
            }
        }
        out
    }

    /// `base + Σ x_i gens_i`.
    pub fn affine(base: &CMat, gens: &[CMat], x: &[SJet]) -> Jet {
        let mut out = Jet::constant(base.clone());
        for (g, xi) in gens.iter().zip(x) {
            out = &out + &Jet::constant(g.clone()).scale_jet(xi);
        }
        out
    }

    pub fn diagonal(&self) -> Vec<SJet> {
        (0..self.n()).map(|i| self.entry(i, i)).collect()
    }

    /// Entrywise product with a constant matrix.
    pub fn hadamard(&self, k: &CMat) -> Jet {
        let mut out = self.clone();
        for m in 0..COMPONENTS {
            if out.has(m) {
                out.c[m] = out.c[m].component_mul(k);
            }
        }
        out
    }

    /// Exponential of a diagonal jet, entrywise: `exp(c·self)`.
    pub fn exp_diagonal(&self, c: C64) -> Jet {
        let d: Vec<SJet> = self.diagonal().iter().map(|x| x.scale(c).exp()).collect();
        Jet::from_diagonal(&d)
    }

    /// Largest entry magnitude over all components.
    pub fn max_norm(&self) -> f64 {
        (0..COMPONENTS).filter(|&m| self.has(m)).map(|m| lie::max_norm(&self.c[m])).fold(0.0, f64::max)
    }
}

impl Add for &Jet {
    type Output = Jet;
    fn add(self, o: &Jet) -> Jet {
        self.combine(o, 1.0)
    }
}

impl Sub for &Jet {
    type Output = Jet;
    fn sub(self, o: &Jet) -> Jet {
        self.combine(o, -1.0)
    }
}

impl Mul for &Jet {
    type Output = Jet;
    fn mul(self, o: &Jet) -> Jet {
        Jet::product(self, o)
    }
}

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-one())
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, o: Jet) -> Jet {
        self.combine(&o, 1.0)
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, o: Jet) -> Jet {
        self.combine(&o, -1.0)
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, o: Jet) -> Jet {
        Jet::product(&self, &o)
    }
}

/// `tr(AB)` as a scalar jet, without forming the product.
pub fn tr_mul(a: &Jet, b: &Jet) -> SJet {
    let mut c = [zero(); COMPONENTS];
    for (m, out) in c.iter_mut().enumerate() {
        for s in submasks(m) {
            let t = m ^ s;
            if a.has(s) && b.has(t) {
                *out += lie::tr_mul(&a.c[s], &b.c[t]);
            }
        }
    }
    SJet { c }
}

/// Matrix algebra operations shared by plain matrices and jets, so that
/// coordinate conversions and series arithmetic are written once and
/// differentiated for free.
pub trait MatAlg: Clone {
    fn size(&self) -> usize;
    fn lift(&self, m: &CMat) -> Self;
    fn plus(&self, o: &Self) -> Self;
    fn minus(&self, o: &Self) -> Self;
    fn times(&self, o: &Self) -> Self;
    fn scaled(&self, c: C64) -> Self;
    fn try_inv(&self) -> Option<Self>;
    fn value(&self) -> &CMat;
    /// `exp(c·self)` for a diagonal `self`.
    fn exp_diag(&self, c: C64) -> Self;
    fn hadamard_const(&self, k: &CMat) -> Self;

    fn identity_like(&self) -> Self {
        self.lift(&CMat::identity(self.size(), self.size()))
    }

    fn zero_like(&self) -> Self {
        self.lift(&CMat::zeros(self.size(), self.size()))
    }

    fn diag_part(&self) -> Self {
        self.hadamard_const(&CMat::identity(self.size(), self.size()))
    }
}

impl MatAlg for CMat {
    fn size(&self) -> usize {
        self.nrows()
    }
    fn lift(&self, m: &CMat) -> Self {
        m.clone()
    }
    fn plus(&self, o: &Self) -> Self {
        self + o
    }
    fn minus(&self, o: &Self) -> Self {
        self - o
    }
    fn times(&self, o: &Self) -> Self {
        self * o
    }
    fn scaled(&self, c: C64) -> Self {
        self * c
    }
    fn try_inv(&self) -> Option<Self> {
        lie::inverse(self, "matrix").ok()
    }
    fn value(&self) -> &CMat {
        self
    }
    fn exp_diag(&self, c: C64) -> Self {
        let d: Vec<C64> = self.diagonal().iter().map(|x| (c * x).exp()).collect();
        lie::diag_matrix(&d)
    }
    fn hadamard_const(&self, k: &CMat) -> Self {
        self.component_mul(k)
    }
}

impl MatAlg for Jet {
    fn size(&self) -> usize {
        self.n()
    }
    fn lift(&self, m: &CMat) -> Self {
        Jet::constant(m.clone())
    }
    fn plus(&self, o: &Self) -> Self {
        self + o
    }
    fn minus(&self, o: &Self) -> Self {
        self - o
    }
    fn times(&self, o: &Self) -> Self {
        Jet::product(self, o)
    }
    fn scaled(&self, c: C64) -> Self {
        self.scale(c)
    }
    fn try_inv(&self) -> Option<Self> {
        self.inv()
    }
    fn value(&self) -> &CMat {
        Jet::value(self)
    }
    fn exp_diag(&self, c: C64) -> Self {
        self.exp_diagonal(c)
    }
    fn hadamard_const(&self, k: &CMat) -> Self {
        self.hadamard(k)
    }
}

/// A tangent vector in chart coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct TangentVector(pub Vec<C64>);

/// Coordinate jets `x0 + Σ_s ε_s dirs[s]`; missing directions are zero.
pub fn seed(x0: &[C64], dirs: &[&[C64]]) -> Vec<SJet> {
    assert!(dirs.len() <= SLOTS, "at most {SLOTS} active directions");
    (0..x0.len())
        .map(|i| {
            let mut d = [zero(); SLOTS];
            for (s, dir) in dirs.iter().enumerate() {
                d[s] = dir[i];
            }
            SJet::seeded(x0[i], d)
        })
        .collect()
}

/// Unit coordinate vector.
pub fn unit(dim: usize, i: usize) -> Vec<C64> {
    let mut v = vec![zero(); dim];
    v[i] = one();
    v
}

/// Exact directional derivative of a holomorphic matrix-valued map.
pub fn directional<F>(map: F, p: &[C64], v: &[C64]) -> CMat
where
    F: Fn(&[SJet]) -> Jet,
{
    map(&seed(p, &[v])).first(0).clone()
}

/// `⟨map*θ, v⟩ = g⁻¹ ∂_v g`.
pub fn mc_left<F>(map: F, p: &[C64], v: &[C64]) -> Result<CMat>
where
    F: Fn(&[SJet]) -> Jet,
{
    let g = map(&seed(p, &[v]));
    let ginv = lie::inverse(g.value(), "map value")?;
    Ok(&ginv * g.first(0))
}

/// `⟨map*θ̄, v⟩ = (∂_v g) g⁻¹`.
pub fn mc_right<F>(map: F, p: &[C64], v: &[C64]) -> Result<CMat>
where
    F: Fn(&[SJet]) -> Jet,
{
    let g = map(&seed(p, &[v]));
    let ginv = lie::inverse(g.value(), "map value")?;
    Ok(g.first(0) * &ginv)
}

/// Left Maurer–Cartan form of a jet along `slot`: `g⁻¹ ∂_slot g`.
pub fn theta(g: &Jet, ginv: &Jet, slot: usize) -> Jet {
    ginv * &g.deriv(slot)
}

/// Right Maurer–Cartan form of a jet along `slot`: `(∂_slot g) g⁻¹`.
pub fn theta_bar(g: &Jet, ginv: &Jet, slot: usize) -> Jet {
    &g.deriv(slot) * ginv
}

/// `(𝒜, ℬ)(X, Y) = (𝒜(X), ℬ(Y)) − (𝒜(Y), ℬ(X))`, with the one-forms given
/// as slot evaluators.
pub fn pair_one_forms<A, B>(a: A, b: B, x: usize, y: usize) -> SJet
where
    A: Fn(usize) -> Jet,
    B: Fn(usize) -> Jet,
{
    tr_mul(&a(x), &b(y)) - tr_mul(&a(y), &b(x))
}

/// Same as [`pair_one_forms`] on already evaluated one-form values.
pub fn pair(a_x: &Jet, b_y: &Jet, a_y: &Jet, b_x: &Jet) -> SJet {
    tr_mul(a_x, b_y) - tr_mul(a_y, b_x)
}

/// The Cartan three-form `η = ½(θ, [θ, θ])` at `g` on ambient tangents.
pub fn eta(g: &CMat, u: &CMat, v: &CMat, w: &CMat) -> Result<C64> {
    let ginv = lie::inverse(g, "group element")?;
    Ok(eta_left(&(&ginv * u), &(&ginv * v), &(&ginv * w)))
}

/// `μ⁻¹ ∂_slot μ` for `μ = L_1 ⋯ L_r`, assembled letter by letter as
/// `Σ S_i⁻¹ (L_i⁻¹ ∂L_i) S_i` with `S_i = L_{i+1} ⋯ L_r`.
pub fn theta_word(letters: &[(Jet, Jet)], slot: usize) -> Jet {
    let n = letters[0].0.n();
    let mut total = Jet::zeros(n);
    let mut suffix = Jet::identity(n);
    let mut suffix_inv = Jet::identity(n);
    for (l, li) in letters.iter().rev() {
        let piece = theta(l, li, slot);
        total = total + &(&suffix_inv * &piece) * &suffix;
        suffix = l * &suffix;
        suffix_inv = &suffix_inv * li;
    }
    total
}

/// `∂_slot μ μ⁻¹` for `μ = L_1 ⋯ L_r`, assembled as
/// `Σ P_i (∂L_i L_i⁻¹) P_i⁻¹` with `P_i = L_1 ⋯ L_{i−1}`.
pub fn theta_bar_word(letters: &[(Jet, Jet)], slot: usize) -> Jet {
    let n = letters[0].0.n();
    let mut total = Jet::zeros(n);
    let mut prefix = Jet::identity(n);
    let mut prefix_inv = Jet::identity(n);
    for (l, li) in letters {
        let piece = theta_bar(l, li, slot);
        total = total + &(&prefix * &piece) * &prefix_inv;
        prefix = &prefix * l;
        prefix_inv = li * &prefix_inv;
    }
    total
}

/// `μ*η(∂0, ∂1, ∂2)` for `μ = L_1 ⋯ L_r`, given each letter with its
/// inverse.
///
/// With `ρ_i = ∂L_i L_i⁻¹` and `W_ij = (L_1⋯L_{i−1})⁻¹(L_1⋯L_{j−1})`,
/// `dμ μ⁻¹ = Σ Ad_{L_1⋯L_{i−1}} ρ_i`, and the trace expands into terms
/// `tr(ρ_i W_ij ρ_j W_jl ρ_l W_li)`. Only subwords are ever multiplied, so
/// when the letters are well conditioned this stays accurate even where
/// `μ` itself is not.
pub fn eta_word(letters: &[(Jet, Jet)]) -> C64 {
    let r = letters.len();
    let Some(first) = letters.first() else {
        return C64::new(0.0, 0.0);
    };
    let n = first.0.n();
    let rho: Vec<[CMat; SLOTS]> = letters
        .iter()
        .map(|(l, li)| std::array::from_fn(|s| l.first(s) * li.value()))
        .collect();
    let live: [Vec<usize>; SLOTS] = std::array::from_fn(|s| (0..r).filter(|&i| lie::max_norm(&rho[i][s]) > 0.0).collect());
    // w[i][j] = P_i⁻¹ P_j as a product of letters or of inverse letters.
    let mut w = vec![vec![CMat::identity(n, n); r]; r];
    for i in 0..r {
        for j in (i + 1)..r {
            w[i][j] = &w[i][j - 1] * letters[j - 1].0.value();
            w[j][i] = letters[j - 1].1.value() * &w[j - 1][i];
        }
    }
    let mut total = C64::new(0.0, 0.0);
    for &i in &live[0] {
        for &j in &live[1] {
            let aj = &rho[i][0] * &w[i][j] * &rho[j][1];
            for &l in &live[2] {
                let forward = (&aj * &w[j][l] * &rho[l][2] * &w[l][i]).trace();
                let backward = (&rho[i][0] * &w[i][l] * &rho[l][2] * &w[l][j] * &rho[j][1] * &w[j][i]).trace();
                total += forward - backward;
            }
        }
    }
    total * 0.5
}

/// `½(a, [b, c])` on left-trivialized tangents.
pub fn eta_left(a: &CMat, b: &CMat, c: &CMat) -> C64 {
    lie::tr_mul(a, &lie::commutator(b, c)) * 0.5
}

/// `dω(∂a, ∂b, ∂c)` for a two-form given as a jet evaluator
/// `omega(x, u, v) = ω(∂u, ∂v)` where `∂u`, `∂v` are the seeded slots.
///
/// Coordinate fields commute, so
/// `dω(∂a,∂b,∂c) = ∂a ω(∂b,∂c) − ∂b ω(∂a,∂c) + ∂c ω(∂a,∂b)`.
pub fn d_two_form<F>(omega: F, p: &[C64], (a, b, c): (usize, usize, usize)) -> C64
where
    F: Fn(&[SJet], usize, usize) -> SJet,
{
    let dim = p.len();
    let x = seed(p, &[&unit(dim, a), &unit(dim, b), &unit(dim, c)]);
    let ab = omega(&x, 0, 1).first(2);
    let ac = omega(&x, 0, 2).first(1);
    let bc = omega(&x, 1, 2).first(0);
    bc - ac + ab
}

/// The three terms of [`d_two_form`] and their signed sum, for residual
/// normalization.
pub fn d_two_form_terms<F>(omega: F, x: &[SJet]) -> [C64; 3]
where
    F: Fn(&[SJet], usize, usize) -> SJet,
{
    [omega(x, 1, 2).first(0), -omega(x, 0, 2).first(1), omega(x, 0, 1).first(2)]
}

/// `dα(∂u, ∂v) = ∂u α(∂v) − ∂v α(∂u)` for a one-form evaluator, as a
/// two-form evaluator (usable with [`d_two_form`]).
pub fn d_one_form<F>(alpha: F) -> impl Fn(&[SJet], usize, usize) -> SJet
where
    F: Fn(&[SJet], usize) -> SJet,
{
    move |x, u, v| alpha(x, v).deriv(u) - alpha(x, u).deriv(v)
}

/// Check a matrix shape against the expected size.
pub fn require_size(m: &CMat, n: usize) -> Result<()> {
    if m.nrows() != n || m.ncols() != n {
        return Err(Error::SizeMismatch {
            expected: n,
            found: m.nrows(),
        });
    }
    Ok(())
}
