//! Quasi-Hamiltonian spaces over `GL_n(C)` and numerical checks of their
//! axioms.
//!
//! The crate builds conjugacy classes, the internally fused double, the
//! fission spaces `C̃` attached to a pole of order `k`, their fusion
//! products, and the additive extended orbits. Every space is presented in a
//! holomorphic chart; two-forms and moment maps are evaluated on forward
//! jets so that exterior derivatives and contractions are exact.

pub mod additive;
pub mod error;
pub mod jets;
pub mod lie;
pub mod rank;
pub mod sample;
pub mod spaces;
pub mod verify;

pub use error::{Error, Result};
pub use jets::{Jet, MatAlg, SJet, TangentVector};
pub use lie::{AlgebraElement, CMat, CartanElement, GroupContext, GroupElement, Regularity, Triangle, C64};
pub use rank::RankDecision;
pub use spaces::{FactorKind, Point, QhSpace};
