//! Seeded random data with bounded conditioning: matrix and Cartan entries
//! are uniform on the complex unit disc, group elements are exponentials of
//! such matrices.

use std::f64::consts::PI;

use rand::{Rng as _, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::lie::{self, CMat, CartanElement, Triangle, C64};

pub type Rng = ChaCha8Rng;

pub fn rng(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Derive an independent stream seed from a base seed and a path of indices.
pub fn derive_seed(base: u64, path: &[u64]) -> u64 {
    let mut s = base;
    for &p in path {
        s = splitmix(s ^ splitmix(p.wrapping_add(0x632b_e59b_d9b4_e019)));
    }
    s
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn unit_disc(rng: &mut Rng) -> C64 {
    let r: f64 = rng.random::<f64>().sqrt();
    let t: f64 = rng.random::<f64>() * 2.0 * PI;
    C64::from_polar(r, t)
}

pub fn disc_vector(len: usize, rng: &mut Rng) -> Vec<C64> {
    (0..len).map(|_| unit_disc(rng)).collect()
}

pub fn disc_matrix(n: usize, rng: &mut Rng) -> CMat {
    let mut m = CMat::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            m[(i, j)] = unit_disc(rng);
        }
    }
    m
}

/// `exp` of a matrix with unit-disc entries.
pub fn group_element(n: usize, rng: &mut Rng) -> CMat {
    lie::expm(&disc_matrix(n, rng))
}

/// Unitriangular matrix with unit-disc strictly triangular entries.
pub fn unipotent(n: usize, tri: Triangle, rng: &mut Rng) -> CMat {
    let mut m = CMat::identity(n, n);
    for (i, j) in tri.strict_positions(n) {
        m[(i, j)] = unit_disc(rng);
    }
    m
}

/// Invertible triangular matrix: unit-disc off-diagonal part, diagonal
/// `exp` of unit-disc entries.
pub fn borel(n: usize, tri: Triangle, rng: &mut Rng) -> CMat {
    let u = unipotent(n, tri, rng);
    let t = torus_element(n, rng);
    t * u
}

pub fn cartan(n: usize, rng: &mut Rng) -> CartanElement {
    CartanElement(disc_vector(n, rng))
}

/// Radius of the disc formal monodromy exponents `Λ` are drawn from. The
/// factors `e^{±2πiΛ}` then have entry ratios below `e^{2π}`, so products of
/// several of them stay well conditioned.
pub const LAMBDA_RADIUS: f64 = 0.5;

/// Cartan element with entries in the disc of radius [`LAMBDA_RADIUS`].
pub fn exponent_cartan(n: usize, rng: &mut Rng) -> CartanElement {
    CartanElement(disc_vector(n, rng).into_iter().map(|z| z * LAMBDA_RADIUS).collect())
}

/// Unit-disc Cartan element, redrawn until affine-regular.
pub fn affine_regular_cartan(n: usize, rng: &mut Rng) -> CartanElement {
    loop {
        let l = cartan(n, rng);
        if l.first_integer_root().is_none() {
            return l;
        }
    }
}

/// `exp` of a unit-disc diagonal matrix.
pub fn torus_element(n: usize, rng: &mut Rng) -> CMat {
    cartan(n, rng).exp_scaled(C64::new(1.0, 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_stream() {
        let a = disc_matrix(3, &mut rng(7));
        let b = disc_matrix(3, &mut rng(7));
        assert_eq!(a, b);
        assert_ne!(derive_seed(7, &[0, 1]), derive_seed(7, &[1, 0]));
    }

    #[test]
    fn draws_stay_in_disc() {
        let mut r = rng(1);
        for _ in 0..1000 {
            assert!(unit_disc(&mut r).norm() <= 1.0);
        }
    }

    #[test]
    fn triangular_draws_have_the_right_shape() {
        let mut r = rng(3);
        let u = unipotent(3, Triangle::Lower, &mut r);
        assert!(lie::is_triangular(&u, Triangle::Lower));
        assert!(u.diagonal().iter().all(|z| *z == C64::new(1.0, 0.0)));
        let b = borel(3, Triangle::Upper, &mut r);
        assert!(lie::is_triangular(&b, Triangle::Upper));
        assert!(lie::is_invertible(&b));
    }
}
