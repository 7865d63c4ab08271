//! Scenario input: the topological data of a non-isolated hypersurface
//! singularity that every analysis starts from.
//!
//! A scenario fixes the ambient dimension index `n` (the germ lives on an
//! open subset of `C^{n+1}`), the critical locus dimension `s`, the Euler
//! characteristics of the complex links `L^0, ..., L^s` of the critical
//! locus, and whatever Lê numbers are known.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest absolute Euler characteristic accepted; keeps trace arithmetic
/// inside `i64`.
pub const MAX_ABS_CHI: i64 = 1 << 62;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScenarioError {
    #[error("dimension error in `{key}`: {message}")]
    Dimension { key: &'static str, message: String },
    #[error("link error: {0}")]
    Link(String),
    #[error("negative Lê number at level {level}: {value}")]
    NegativeLeNumber { level: usize, value: i64 },
    #[error("link model {model} is incompatible with s = {s}")]
    ModelMismatch { model: String, s: usize },
}

impl ScenarioError {
    /// The scenario file key the error is about.
    pub fn key(&self) -> &'static str {
        match self {
            ScenarioError::Dimension { key, .. } => key,
            ScenarioError::Link(_) | ScenarioError::ModelMismatch { .. } => "link_model",
            ScenarioError::NegativeLeNumber { .. } => "le_numbers",
        }
    }
}

/// Externally supplied assertions about the germ. These are never derived.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Flag {
    /// The top differential `∂_s` is nonzero.
    #[serde(rename = "TOP_DIFFERENTIAL_NONZERO")]
    TopDifferentialNonzero,
    /// For `s = 1`: either `λ^0 = 0` or `∂_1` is nonzero integrally and mod
    /// every prime.
    #[serde(rename = "SWING")]
    Swing,
    /// The critical locus is a set-theoretic local complete intersection and
    /// the coordinates are isolating for its constant sheaf.
    #[serde(rename = "SIGMA_LCI")]
    SigmaLci,
}

impl Flag {
    pub fn as_str(self) -> &'static str {
        match self {
            Flag::TopDifferentialNonzero => "TOP_DIFFERENTIAL_NONZERO",
            Flag::Swing => "SWING",
            Flag::SigmaLci => "SIGMA_LCI",
        }
    }
}

impl fmt::Display for Flag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A Lê number that may not be known.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LeNumber {
    Known(u64),
    Unknown,
}

impl LeNumber {
    pub fn known(self) -> Option<u64> {
        match self {
            LeNumber::Known(v) => Some(v),
            LeNumber::Unknown => None,
        }
    }

    pub fn is_unknown(self) -> bool {
        matches!(self, LeNumber::Unknown)
    }
}

impl fmt::Display for LeNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LeNumber::Known(v) => write!(f, "{v}"),
            LeNumber::Unknown => f.write_str("?"),
        }
    }
}

/// Shape of the critical locus, from which link Euler characteristics follow.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LinkModel {
    /// Smooth critical locus, transversally sliced: every link is contractible.
    Smooth,
    /// One-dimensional critical locus with `r` local irreducible branches.
    BranchCurve(u64),
    /// The two-dimensional cone `V(x^2 + y^2 + z^2, w_1, ..., w_{n-2})`.
    ConeA1,
    /// User-supplied `[χ(L^0), ..., χ(L^s)]`.
    Explicit(Vec<i64>),
}

impl LinkModel {
    fn name(&self) -> &'static str {
        match self {
            LinkModel::Smooth => "smooth",
            LinkModel::BranchCurve(_) => "branch_curve",
            LinkModel::ConeA1 => "cone_a1",
            LinkModel::Explicit(_) => "explicit",
        }
    }
}

/// Euler characteristics `[χ(L^0), ..., χ(L^s)]` of the complex links for a
/// link model.
pub fn link_chis_from_model(model: &LinkModel, s: usize) -> Result<Vec<i64>, ScenarioError> {
    let mismatch = || ScenarioError::ModelMismatch {
        model: model.name().to_string(),
        s,
    };
    match model {
        LinkModel::Smooth => Ok(vec![1; s + 1]),
        LinkModel::BranchCurve(r) => {
            if s != 1 || *r == 0 {
                return Err(mismatch());
            }
            let r = i64::try_from(*r)
                .ok()
                .filter(|r| *r <= MAX_ABS_CHI)
                .ok_or_else(|| ScenarioError::Link(format!("branch count {r} too large")))?;
            Ok(vec![r, 1])
        }
        // L^0 ≃ two points, L^1 ≃ S^1, L^2 a cone.
        LinkModel::ConeA1 => {
            if s != 2 {
                return Err(mismatch());
            }
            Ok(vec![2, 0, 1])
        }
        LinkModel::Explicit(chis) => {
            if chis.len() != s + 1 {
                return Err(ScenarioError::Dimension {
                    key: "link_model",
                    message: format!(
                        "explicit link model has {} Euler characteristics, expected s + 1 = {}",
                        chis.len(),
                        s + 1
                    ),
                });
            }
            check_top_link(chis)?;
            Ok(chis.clone())
        }
    }
}

fn check_top_link(chis: &[i64]) -> Result<(), ScenarioError> {
    match chis.last() {
        Some(1) => Ok(()),
        Some(other) => Err(ScenarioError::Link(format!(
            "χ(L^s) must be 1 (the top link is a contractible cone), got {other}"
        ))),
        None => Err(ScenarioError::Dimension {
            key: "link_model",
            message: "no link Euler characteristics".into(),
        }),
    }
}

/// Validated topological input.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Scenario {
    pub n: usize,
    pub s: usize,
    /// `χ(L^0), ..., χ(L^s)`; `χ(L^{-1}) = 0` is implicit.
    pub link_chis: Vec<i64>,
    /// `λ^0, ..., λ^s`.
    pub le_numbers: Vec<LeNumber>,
    pub flags: BTreeSet<Flag>,
}

impl Scenario {
    pub fn has_flag(&self, flag: Flag) -> bool {
        self.flags.contains(&flag)
    }

    /// `λ^j`, which is zero above `s`.
    pub fn lambda(&self, level: usize) -> LeNumber {
        self.le_numbers
            .get(level)
            .copied()
            .unwrap_or(LeNumber::Known(0))
    }

    /// `χ(L^k)` for `-1 ≤ k ≤ s`.
    pub fn link_chi(&self, k: isize) -> i64 {
        if k < 0 {
            0
        } else {
            self.link_chis[k as usize]
        }
    }

    /// Cohomological degree `n - j` in which level `j` of the Lê module
    /// complex sits.
    pub fn degree_of_level(&self, level: usize) -> i64 {
        self.n as i64 - level as i64
    }

    pub fn with_lambda(&self, level: usize, value: LeNumber) -> Scenario {
        let mut out = self.clone();
        out.le_numbers[level] = value;
        out
    }
}

/// Unvalidated scenario values, as read from a file or built by hand.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawScenario {
    pub n: i64,
    pub s: i64,
    pub link_chis: Vec<i64>,
    /// `None` is UNKNOWN.
    pub le_numbers: Vec<Option<i64>>,
    pub flags: BTreeSet<Flag>,
}

/// Checks every scenario invariant and returns the validated value.
pub fn validate_scenario(raw: RawScenario) -> Result<Scenario, ScenarioError> {
    if raw.n < 0 {
        return Err(ScenarioError::Dimension {
            key: "n",
            message: format!("must be nonnegative, got {}", raw.n),
        });
    }
    if raw.s < 0 {
        return Err(ScenarioError::Dimension {
            key: "s",
            message: format!("must be nonnegative, got {}", raw.s),
        });
    }
    if raw.s > raw.n {
        return Err(ScenarioError::Dimension {
            key: "s",
            message: format!("s = {} exceeds n = {}", raw.s, raw.n),
        });
    }
    let n = raw.n as usize;
    let s = raw.s as usize;
    if raw.link_chis.len() != s + 1 {
        return Err(ScenarioError::Dimension {
            key: "link_model",
            message: format!(
                "expected s + 1 = {} link Euler characteristics, got {}",
                s + 1,
                raw.link_chis.len()
            ),
        });
    }
    if raw.le_numbers.len() != s + 1 {
        return Err(ScenarioError::Dimension {
            key: "le_numbers",
            message: format!(
                "expected s + 1 = {} Lê numbers, got {}",
                s + 1,
                raw.le_numbers.len()
            ),
        });
    }
    check_top_link(&raw.link_chis)?;
    if let Some(chi) = raw.link_chis.iter().find(|c| c.abs() > MAX_ABS_CHI) {
        return Err(ScenarioError::Link(format!(
            "Euler characteristic {chi} out of supported range"
        )));
    }
    let le_numbers = raw
        .le_numbers
        .iter()
        .enumerate()
        .map(|(level, v)| match v {
            None => Ok(LeNumber::Unknown),
            Some(v) if *v < 0 => Err(ScenarioError::NegativeLeNumber { level, value: *v }),
            Some(v) => Ok(LeNumber::Known(*v as u64)),
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Scenario {
        n,
        s,
        link_chis: raw.link_chis,
        le_numbers,
        flags: raw.flags,
    })
}

/// On-disk scenario format.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub n: i64,
    pub s: i64,
    pub link_model: LinkModel,
    pub le_numbers: Vec<Option<i64>>,
    #[serde(default)]
    pub flags: Vec<Flag>,
}

impl ScenarioFile {
    pub fn from_json(text: &str) -> Result<ScenarioFile, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serialization cannot fail")
    }

    pub fn to_raw(&self) -> Result<RawScenario, ScenarioError> {
        if self.s < 0 {
            return Err(ScenarioError::Dimension {
                key: "s",
                message: format!("must be nonnegative, got {}", self.s),
            });
        }
        Ok(RawScenario {
            n: self.n,
            s: self.s,
            link_chis: link_chis_from_model(&self.link_model, self.s as usize)?,
            le_numbers: self.le_numbers.clone(),
            flags: self.flags.iter().copied().collect(),
        })
    }

    pub fn to_scenario(&self) -> Result<Scenario, ScenarioError> {
        validate_scenario(self.to_raw()?)
    }
}
