//! Campaign files (TOML).
//!
//! ```toml
//! n = 2
//! seed = 42
//! samples = 5            # optional, default 5
//! triples = 10           # QH1/closedness triples per point, default 10
//! checks = ["qh1", "qh2", "qh3"]
//!
//! [tolerances]           # optional overrides
//! qh1 = 1e-8
//!
//! [[spaces]]
//! kind = "fission"
//! k = 2
//!
//! [[spaces]]
//! kind = "fission_simple"
//! lambda = ["0.1+0.2i", "0.35"]
//!
//! [[spaces]]
//! kind = "fusion"
//! parts = [{ kind = "fission", k = 2 }, { kind = "conjugacy" }]
//! ```

use std::fmt;
use std::path::Path;

use fission_core::verify::Tolerances;
use serde::{Deserialize, Serialize};

use crate::numbers::{Cx, Sci};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{location}: {message}")]
pub struct ConfigError {
    pub location: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(location: impl Into<String>, message: impl fmt::Display) -> Self {
        Self {
            location: location.into(),
            message: message.to_string(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Campaign {
    pub n: usize,
    pub seed: u64,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_triples")]
    pub triples: usize,
    pub checks: Vec<CheckKind>,
    #[serde(default)]
    pub tolerances: TolConfig,
    pub spaces: Vec<SpaceSpec>,
}

fn default_samples() -> usize {
    5
}

fn default_triples() -> usize {
    10
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    Qh1,
    Qh2,
    Qh3,
    Invariance,
    Equivariance,
    Slice,
    Reduction,
    Closedness,
    Moment,
    Dimension,
    TSlice,
}

impl CheckKind {
    pub fn name(self) -> &'static str {
        match self {
            CheckKind::Qh1 => "qh1",
            CheckKind::Qh2 => "qh2",
            CheckKind::Qh3 => "qh3",
            CheckKind::Invariance => "invariance",
            CheckKind::Equivariance => "equivariance",
            CheckKind::Slice => "slice",
            CheckKind::Reduction => "reduction",
            CheckKind::Closedness => "closedness",
            CheckKind::Moment => "moment",
            CheckKind::Dimension => "dimension",
            CheckKind::TSlice => "t_slice",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TolConfig {
    pub qh1: Sci,
    pub qh2: Sci,
    pub qh3: Sci,
    pub reduction: Sci,
    pub invariance: Sci,
    pub equivariance: Sci,
    pub rank: Sci,
    /// Closedness and moment checks on extended orbits.
    pub additive: Sci,
}

impl Default for TolConfig {
    fn default() -> Self {
        let t = Tolerances::default();
        Self {
            qh1: Sci(t.qh1),
            qh2: Sci(t.qh2),
            qh3: Sci(t.qh3),
            reduction: Sci(t.reduction),
            invariance: Sci(t.invariance),
            equivariance: Sci(t.equivariance),
            rank: Sci(t.rank),
            additive: Sci(1e-9),
        }
    }
}

impl TolConfig {
    pub fn core(&self) -> Tolerances {
        Tolerances {
            qh1: self.qh1.0,
            qh2: self.qh2.0,
            qh3: self.qh3.0,
            reduction: self.reduction.0,
            invariance: self.invariance.0,
            equivariance: self.equivariance.0,
            rank: self.rank.0,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrientationSpec {
    #[default]
    Standard,
    Opposite,
}

/// Matrices are lists of rows.
pub type MatrixSpec = Vec<Vec<Cx>>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SpaceSpec {
    /// Conjugacy class of `g0` (random when omitted).
    Conjugacy {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        g0: Option<MatrixSpec>,
    },
    Double {},
    /// `k = 1` is the same as `fission_simple` with random `Λ`.
    Fission {
        k: usize,
        #[serde(default)]
        orientation: OrientationSpec,
    },
    /// With `lambda` given, points share that `Λ` and only `C` is sampled.
    FissionSimple {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        lambda: Option<Vec<Cx>>,
    },
    /// Parts are fused left to right along their first `G` factor.
    Fusion { parts: Vec<SpaceSpec> },
    /// Unit level set of two `k = 2` fission spaces fused together.
    Groupoid {},
    /// `a0` lists the diagonals of `A⁰_0 … A⁰_{k−2}` (random when omitted).
    Extended {
        k: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        a0: Option<Vec<Vec<Cx>>>,
    },
}

pub fn parse(text: &str, origin: &str) -> Result<Campaign, ConfigError> {
    toml::from_str(text).map_err(|e| ConfigError::new(origin, e.to_string().trim_end()))
}

pub fn load(path: &Path) -> Result<Campaign, ConfigError> {
    let origin = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError::new(&origin, e))?;
    parse(&text, &origin)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_campaign_gets_defaults() {
        let c = parse("n = 2\nseed = 1\nchecks = [\"qh1\"]\n[[spaces]]\nkind = \"double\"\n", "t").unwrap();
        assert_eq!(c.samples, 5);
        assert_eq!(c.triples, 10);
        assert_eq!(c.tolerances, TolConfig::default());
        assert_eq!(c.spaces, vec![SpaceSpec::Double {}]);
    }

    #[test]
    fn nested_fusion_and_complex_entries() {
        let text = r#"
n = 2
seed = 3
checks = ["qh2"]
[tolerances]
qh2 = 1e-7
[[spaces]]
kind = "fusion"
parts = [{ kind = "fission", k = 3, orientation = "opposite" }, { kind = "conjugacy", g0 = [["2", 0], [0, "1+i"]] }]
"#;
        let c = parse(text, "t").unwrap();
        assert_eq!(c.tolerances.qh2, Sci(1e-7));
        let SpaceSpec::Fusion { parts } = &c.spaces[0] else { panic!() };
        assert_eq!(parts[0], SpaceSpec::Fission { k: 3, orientation: OrientationSpec::Opposite });
        let SpaceSpec::Conjugacy { g0: Some(g0) } = &parts[1] else { panic!() };
        assert_eq!(g0[1][1].0, fission_core::C64::new(1.0, 1.0));
    }

    #[test]
    fn unknown_kind_and_check_are_errors() {
        let e = parse("n = 2\nseed = 1\nchecks = [\"qh1\"]\n[[spaces]]\nkind = \"torus\"\n", "cfg.toml").unwrap_err();
        assert_eq!(e.location, "cfg.toml");
        assert!(e.message.contains("torus"), "{}", e.message);
        let e = parse("n = 2\nseed = 1\nchecks = [\"qh9\"]\nspaces = []\n", "cfg.toml").unwrap_err();
        assert!(e.message.contains("line 3"), "{}", e.message);
    }

    #[test]
    fn echo_round_trips_through_json() {
        let c = parse(
            "n = 2\nseed = 9\nchecks = [\"moment\"]\n[[spaces]]\nkind = \"extended\"\nk = 2\na0 = [[\"1\", \"-1+0.5i\"]]\n",
            "t",
        )
        .unwrap();
        let back: Campaign = serde_json::from_str(&serde_json::to_string(&c).unwrap()).unwrap();
        assert_eq!(back, c);
    }
}
