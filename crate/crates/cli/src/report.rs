//! Report documents (JSON).
//!
//! Every result entry carries the keys `name`, `space`, `residual`,
//! `tolerance`, `rank_expected`, `rank_observed`, `status` and `seed`, plus
//! the per-sample table and sub-check residuals. Floats are strings in
//! scientific notation. Timings are only present when requested, so that
//! reports of the same campaign compare byte for byte.

use fission_core::verify::{CheckReport, Status};
use serde::{Deserialize, Serialize};

use crate::config::Campaign;
use crate::numbers::Sci;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub campaign: Campaign,
    pub results: Vec<ResultEntry>,
    pub summary: Summary,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timings: Option<Timings>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultEntry {
    pub name: String,
    pub space: String,
    pub residual: Sci,
    pub tolerance: Sci,
    pub rank_expected: Option<usize>,
    pub rank_observed: Option<usize>,
    pub status: Status,
    /// Seed of the first sample that did not pass (else of the first sample).
    pub seed: u64,
    pub samples: Vec<SampleEntry>,
    pub subchecks: Vec<SubEntry>,
    pub note: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleEntry {
    pub seed: u64,
    pub residual: Sci,
    pub rank_expected: Option<usize>,
    pub rank_observed: Option<usize>,
    pub status: Status,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubEntry {
    pub name: String,
    pub residual: Sci,
    pub tolerance: Sci,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summary {
    pub pass: usize,
    pub fail: usize,
    pub inconclusive: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub total_seconds: Sci,
    /// Summed over samples, one per configured space.
    pub space_seconds: Vec<Sci>,
}

impl ResultEntry {
    /// Merge the per-sample reports of one check on one space.
    pub fn from_samples(samples: &[CheckReport]) -> Option<Self> {
        let merged = CheckReport::merge(samples)?;
        let seed_of = |r: &CheckReport| r.seed.unwrap_or(0);
        let seed = samples.iter().find(|r| r.status != Status::Pass).or(samples.first()).map(seed_of)?;
        Some(Self {
            name: merged.name,
            space: merged.space,
            residual: Sci(merged.residual),
            tolerance: Sci(merged.tolerance),
            rank_expected: merged.rank_expected,
            rank_observed: merged.rank_observed,
            status: merged.status,
            seed,
            samples: samples
                .iter()
                .map(|r| SampleEntry {
                    seed: seed_of(r),
                    residual: Sci(r.residual),
                    rank_expected: r.rank_expected,
                    rank_observed: r.rank_observed,
                    status: r.status,
                })
                .collect(),
            subchecks: merged
                .subchecks
                .iter()
                .map(|s| SubEntry {
                    name: s.name.clone(),
                    residual: Sci(s.residual),
                    tolerance: Sci(s.tolerance),
                })
                .collect(),
            note: merged.note,
        })
    }
}

impl Summary {
    pub fn of(results: &[ResultEntry]) -> Self {
        let mut s = Summary::default();
        for r in results {
            match r.status {
                Status::Pass => s.pass += 1,
                Status::Fail => s.fail += 1,
                Status::Inconclusive => s.inconclusive += 1,
            }
        }
        s
    }
}

impl Report {
    /// 0 when everything passed, 1 on any failure, 2 when the only
    /// non-passing results are inconclusive.
    pub fn exit_code(&self) -> i32 {
        if self.summary.fail > 0 {
            1
        } else if self.summary.inconclusive > 0 {
            2
        } else {
            0
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}
