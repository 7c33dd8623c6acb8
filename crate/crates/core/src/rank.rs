//! Numerical rank and kernel decisions from the SVD.
//!
//! A singular value counts as zero when it is at most `rel * σ_max`. The
//! decision is conclusive only if the spectrum has a tenfold gap on both
//! sides of that threshold.

use serde::{Deserialize, Serialize};

use crate::lie::{CMat, C64};

/// Relative singular-value threshold used for every rank decision.
pub const RANK_THRESHOLD: f64 = 1e-7;
/// Required spectral gap around the threshold.
pub const RANK_GAP: f64 = 10.0;
/// Below this the largest singular value is treated as zero.
const ZERO_SPECTRUM: f64 = 1e-14;
const EQUILIBRATION_SWEEPS: usize = 50;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankDecision {
    pub rank: usize,
    pub nullity: usize,
    pub conclusive: bool,
    /// Descending.
    pub singular_values: Vec<f64>,
    pub threshold: f64,
}

/// Singular values (descending) and the matching right singular vectors as
/// columns of a unitary `cols × cols` matrix.
pub fn right_singular(m: &CMat) -> (Vec<f64>, CMat) {
    let cols = m.ncols();
    // Pad to a square so the SVD returns a full set of right singular vectors.
    let size = m.nrows().max(cols);
    let mut square = CMat::zeros(size, cols);
    square.view_mut((0, 0), (m.nrows(), cols)).copy_from(m);
    let svd = square.svd(false, true);
    let v_t = svd.v_t.expect("requested right singular vectors");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let sv = order.iter().map(|&i| svd.singular_values[i]).collect();
    let v = CMat::from_fn(cols, cols, |i, j| v_t[(order[j], i)].conj());
    (sv, v)
}

/// Rank decision and a basis (as columns) of the right kernel of `m`.
pub fn kernel(m: &CMat, rel: f64) -> (CMat, RankDecision) {
    let cols = m.ncols();
    if cols == 0 {
        let decision = RankDecision {
            rank: 0,
            nullity: 0,
            conclusive: true,
            singular_values: vec![],
            threshold: 0.0,
        };
        return (CMat::zeros(0, 0), decision);
    }
    let (sv, v) = right_singular(m);
    let decision = decide(&sv, cols, rel);
    let basis = v.columns(decision.rank, cols - decision.rank).into_owned();
    (basis, decision)
}

/// Rank decision for `m` (no kernel basis).
pub fn rank(m: &CMat, rel: f64) -> RankDecision {
    kernel(m, rel).1
}

fn decide(sv: &[f64], cols: usize, rel: f64) -> RankDecision {
    let max = sv.first().copied().unwrap_or(0.0);
    if max <= ZERO_SPECTRUM {
        // Tiny but nonzero has no scale to be measured against; an exactly
        // zero matrix has rank 0 without doubt.
        return RankDecision {
            rank: 0,
            nullity: cols,
            conclusive: max == 0.0,
            singular_values: sv.to_vec(),
            threshold: 0.0,
        };
    }
    let threshold = rel * max;
    let rank = sv.iter().filter(|&&s| s > threshold).count();
    let smallest_kept = sv[..rank].last().copied();
    let largest_dropped = sv[rank..].first().copied();
    let conclusive = smallest_kept.is_none_or(|s| s >= RANK_GAP * threshold)
        && largest_dropped.is_none_or(|s| s <= threshold / RANK_GAP);
    RankDecision {
        rank,
        nullity: cols - rank,
        conclusive,
        singular_values: sv.to_vec(),
        threshold,
    }
}

/// Rank of a square bilinear form after symmetric diagonal equilibration
/// `D m D`, iterated until every row and column has largest entry close
/// to 1. Congruence preserves rank, and the scaling removes spread in the
/// singular values that only reflects the choice of coordinates.
pub fn form_rank(m: &CMat, rel: f64) -> RankDecision {
    rank(&equilibrate(m), rel)
}

/// Symmetric Ruiz scaling of a square matrix.
pub fn equilibrate(m: &CMat) -> CMat {
    let n = m.nrows();
    let mut scaled = m.clone();
    for _ in 0..EQUILIBRATION_SWEEPS {
        let d: Vec<f64> = (0..n)
            .map(|i| {
                let big = (0..n).fold(0.0f64, |a, j| a.max(scaled[(i, j)].norm()).max(scaled[(j, i)].norm()));
                if big > ZERO_SPECTRUM { big.sqrt().recip() } else { 1.0 }
            })
            .collect();
        if d.iter().all(|x| (x - 1.0).abs() < 1e-3) {
            break;
        }
        scaled = CMat::from_fn(n, n, |i, j| scaled[(i, j)] * (d[i] * d[j]));
    }
    scaled
}

/// Columns of `basis` stacked into a matrix (helper for rank of spans).
pub fn columns(vectors: &[Vec<C64>], len: usize) -> CMat {
    CMat::from_fn(len, vectors.len(), |i, j| vectors[j][i])
}
