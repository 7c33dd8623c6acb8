//! Closed-form dimension counts next to numerically measured ranks.

use std::fmt::Write as _;

use fission_core::additive::{self, Dims, ExtendedOrbit, IrregularType, JetAlgebra};
use fission_core::lie;
use fission_core::rank::{self, RankDecision};
use fission_core::sample::{self, Rng};
use fission_core::spaces::{self, Fission, FissionSimple};
use fission_core::{verify, FactorKind, QhSpace, Result};
use serde::{Deserialize, Serialize};

/// Redraws allowed for a measurement without a clear spectral gap.
const MAX_DRAWS: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Measured {
    pub c_tilde: usize,
    pub c: usize,
    pub o_tilde: usize,
    pub o: usize,
    pub o_b: Option<usize>,
    /// Every rank decision had a spectral gap.
    pub conclusive: bool,
}

/// Draw until the decision is conclusive (or give up and keep the last).
fn conclusive_rank(rng: &mut Rng, mut f: impl FnMut(&mut Rng) -> Result<RankDecision>) -> Result<RankDecision> {
    let mut last = f(rng)?;
    for _ in 1..MAX_DRAWS {
        if last.conclusive {
            break;
        }
        last = f(rng)?;
    }
    Ok(last)
}

/// Ranks at generic seeded samples:
/// `C̃` is the rank of `ω`, `C` the rank of `ω` on a `μ_T` level set, `Õ` the
/// rank of the extended-orbit form, and `O`, `O_B` the ranks of the orbit
/// forms `⟨ξ, [X, Y]⟩` at `ξ = Ã⁰ + Λ dz/z` and at `Ã⁰`.
pub fn measure(n: usize, k: usize, seed: u64) -> Result<Measured> {
    let mut rng = sample::rng(seed);
    let space: Box<dyn QhSpace> = if k == 1 {
        Box::new(FissionSimple::new(n))
    } else {
        Box::new(Fission::new(n, k)?)
    };
    let t = space.factors().iter().position(|f| *f == FactorKind::T).expect("fission spaces carry a torus factor");
    let rel = rank::RANK_THRESHOLD;
    let c_tilde = conclusive_rank(&mut rng, |r| Ok(rank::form_rank(&spaces::gram(space.as_ref(), &space.sample_point(r)?)?, rel)))?;
    let c = conclusive_rank(&mut rng, |r| verify::level_set_rank(space.as_ref(), t, &space.sample_point(r)?, rel))?;
    let o_tilde = conclusive_rank(&mut rng, |r| {
        let orbit = ExtendedOrbit::new(IrregularType::sample(n, k, r)?);
        let p = orbit.sample_point(r);
        Ok(rank::form_rank(&orbit.gram(&p)?, rel))
    })?;
    let o = conclusive_rank(&mut rng, |r| {
        let a0 = IrregularType::sample(n, k, r)?;
        let xi = a0.with_residue(&lie::diag_matrix(&sample::disc_vector(n, r)));
        additive::orbit_dimension(&xi, JetAlgebra::Full)
    })?;
    let o_b = if k >= 2 {
        Some(conclusive_rank(&mut rng, |r| {
            let a0 = IrregularType::sample(n, k, r)?;
            let xi = a0.with_residue(&lie::CMat::zeros(n, n));
            additive::orbit_dimension(&xi, JetAlgebra::Borel)
        })?)
    } else {
        None
    };
    let conclusive = [&c_tilde, &c, &o_tilde, &o].iter().all(|d| d.conclusive) && o_b.as_ref().is_none_or(|d| d.conclusive);
    Ok(Measured {
        c_tilde: c_tilde.rank,
        c: c.rank,
        o_tilde: o_tilde.rank,
        o: o.rank,
        o_b: o_b.map(|d| d.rank),
        conclusive,
    })
}

fn opt(v: Option<usize>) -> String {
    v.map_or("-".to_string(), |v| v.to_string())
}

/// Plain-text table of the counts, with a measured column when given.
pub fn table(n: usize, k: usize, dims: &Dims, measured: Option<&Measured>) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "n = {n}, k = {k}");
    let rows = [
        ("dim C~", Some(dims.c_tilde), measured.map(|m| m.c_tilde)),
        ("dim C", Some(dims.c), measured.map(|m| m.c)),
        ("dim O~", Some(dims.o_tilde), measured.map(|m| m.o_tilde)),
        ("dim O", Some(dims.o), measured.map(|m| m.o)),
        ("dim O_B", dims.o_b, measured.and_then(|m| m.o_b)),
    ];
    let header = if measured.is_some() { "formula  measured" } else { "formula" };
    let _ = writeln!(out, "{:<9}{header}", "");
    for (label, formula, got) in rows {
        let _ = write!(out, "{label:<9}{:<9}", opt(formula));
        if measured.is_some() {
            let _ = write!(out, "{}", opt(got));
        }
        out.push('\n');
    }
    if measured.is_some_and(|m| !m.conclusive) {
        out.push_str("note: some rank decisions had no clear spectral gap\n");
    }
    out
}
