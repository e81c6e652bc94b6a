use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::preprocess::DiameterBackend;

/// Instance family drawn fresh in every trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Family {
    /// Random hypotheses, truth planted at `target_opt` from one of them.
    Planted { n: usize, d: usize, target_opt: f64 },
    /// Hard family for expected-value selection; the truth is `P_i` for a
    /// random `i`.
    HardExpected { n: usize, k: usize, ell: usize },
    /// `n` random members of the paired family; the truth is another
    /// random member.
    Paired { n: usize, k_dom: usize, family_eps: f64 },
    /// Fixed instance file; must carry a true distribution.
    File { path: PathBuf },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    MinW,
    Mlw,
    Quantile,
    Fast,
    KnownOpt,
    Tournament,
    Expected,
}

impl Algorithm {
    pub const ALL: [Algorithm; 7] = [
        Algorithm::MinW,
        Algorithm::Mlw,
        Algorithm::Quantile,
        Algorithm::Fast,
        Algorithm::KnownOpt,
        Algorithm::Tournament,
        Algorithm::Expected,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::MinW => "minw",
            Algorithm::Mlw => "mlw",
            Algorithm::Quantile => "quantile",
            Algorithm::Fast => "fast",
            Algorithm::KnownOpt => "knownopt",
            Algorithm::Tournament => "tournament",
            Algorithm::Expected => "expected",
        }
    }

    /// Fixed per-algorithm stream tag, so adding or reordering algorithms
    /// never changes another algorithm's randomness.
    pub(crate) fn stream(self) -> u64 {
        0x100 + Algorithm::ALL.iter().position(|&a| a == self).expect("registered") as u64
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::UnknownAlgorithm(s.to_string()))
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl Serialize for Algorithm {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for Algorithm {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// OPT handed to the known-OPT selector: the instance's true value or a
/// fixed number.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum OptMode {
    #[default]
    Auto,
    Value(f64),
}

impl FromStr for OptMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "auto" {
            return Ok(OptMode::Auto);
        }
        let v: f64 = s.parse().map_err(|_| Error::Parse(format!("opt `{s}`: expected `auto` or a number")))?;
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::param("opt", format!("{v} not in [0, 1]")));
        }
        Ok(OptMode::Value(v))
    }
}

impl Serialize for OptMode {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            OptMode::Auto => s.serialize_str("auto"),
            OptMode::Value(v) => s.serialize_f64(*v),
        }
    }
}

impl<'de> Deserialize<'de> for OptMode {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => OptMode::from_str(&v.to_string()),
            Raw::Text(t) => OptMode::from_str(&t),
        }
        .map_err(serde::de::Error::custom)
    }
}

mod diam_serde {
    use super::*;

    pub fn serialize<S: Serializer>(b: &DiameterBackend, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&b.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<DiameterBackend, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

fn default_diam() -> DiameterBackend {
    DiameterBackend::Exact
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub family: Family,
    pub algorithms: Vec<Algorithm>,
    pub eps: f64,
    pub delta: f64,
    pub trials: usize,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default = "default_diam", with = "diam_serde")]
    pub diam: DiameterBackend,
    #[serde(default)]
    pub opt: OptMode,
    /// Record wall time per selector call. Off by default so that reports
    /// are byte-identical across runs.
    #[serde(default)]
    pub timing: bool,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("eps", self.eps), ("delta", self.delta)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::param(name, format!("{v} not in (0, 1)")));
            }
        }
        match &self.family {
            Family::Planted { n, d, target_opt } => {
                if *n < 1 || *d < 2 || !(0.0..1.0).contains(target_opt) {
                    return Err(Error::param("family", "planted needs n >= 1, d >= 2, target_opt in [0, 1)"));
                }
            }
            Family::HardExpected { n, k, ell } => {
                if *n < 2 || *k < 1 || *ell < 2 {
                    return Err(Error::param("family", "hard-expected needs n >= 2, k >= 1, ell >= 2"));
                }
            }
            Family::Paired { n, k_dom, family_eps } => {
                if *n < 1 || *k_dom == 0 || k_dom % 2 != 0 || !(*family_eps > 0.0 && *family_eps < 1.0) {
                    return Err(Error::param(
                        "family",
                        "paired needs n >= 1, positive even k_dom, family_eps in (0, 1)",
                    ));
                }
            }
            Family::File { .. } => {}
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}
