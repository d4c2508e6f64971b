//! Verification report, suite selection and run configuration.

use crate::error::{Error, Result};
use crate::stokes::RootSetData;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Connection,
    Stokes,
    Involutions,
    Groupoid,
    Symplectic,
    Bondal,
    SlocalExperiment,
    All,
}

impl Suite {
    pub const ALL: [Suite; 8] = [
        Suite::Connection,
        Suite::Stokes,
        Suite::Involutions,
        Suite::Groupoid,
        Suite::Symplectic,
        Suite::Bondal,
        Suite::SlocalExperiment,
        Suite::All,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Connection => "connection",
            Suite::Stokes => "stokes",
            Suite::Involutions => "involutions",
            Suite::Groupoid => "groupoid",
            Suite::Symplectic => "symplectic",
            Suite::Bondal => "bondal",
            Suite::SlocalExperiment => "slocal-experiment",
            Suite::All => "all",
        }
    }

    /// The concrete suites this one expands to.
    pub fn members(self) -> Vec<Suite> {
        match self {
            Suite::All => Suite::ALL[..7].to_vec(),
            s => vec![s],
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|suite| suite.name() == s)
            .ok_or_else(|| Error::PreconditionViolation(format!("unknown suite '{s}'")))
    }
}

/// How a check's tolerance is interpreted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ToleranceClass {
    /// Exact algebraic identity; `tol` overrides apply.
    Identity,
    /// Finite-difference truncation bound.
    FiniteDifference,
    /// Lower bound L on a quantity q, reported as the ratio L / q against 1.
    Ratio,
    /// Integer mismatch count against 0.5.
    Count,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub anchor: String,
    pub class: ToleranceClass,
    pub samples: usize,
    pub max_residual: f64,
    pub tol: f64,
    pub pass: bool,
    /// First sample error, if any sample could not be evaluated.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub n: usize,
    pub seed: u64,
    pub suite: Suite,
    pub checks: Vec<Check>,
    pub root_sets: RootSetData,
    /// Measured quantities that are reported, not asserted.
    pub observations: BTreeMap<String, serde_json::Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timing_seconds: Option<f64>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_markdown(&self) -> String {
        let mut out = format!("# Verification report: suite `{}`, n = {}, seed = {}\n\n", self.suite, self.n, self.seed);
        out += &format!(
            "Root sets: R1 = {:?}, R1p = {:?} ({} survivors)\n\n",
            self.root_sets.r1, self.root_sets.r1p, self.root_sets.survivor_count
        );
        out += "| check | property | samples | max residual | tol | pass |\n|---|---|---|---|---|---|\n";
        for c in &self.checks {
            out += &format!(
                "| {} | {} | {} | {:.3e} | {:.1e} | {} |\n",
                c.name,
                c.anchor,
                c.samples,
                c.max_residual,
                c.tol,
                if c.pass { "yes" } else { "**no**" }
            );
        }
        if !self.observations.is_empty() {
            out += "\n## Observations\n\n";
            for (k, v) in &self.observations {
                out += &format!("- {k}: {v}\n");
            }
        }
        if let Some(t) = self.timing_seconds {
            out += &format!("\nElapsed: {t:.2} s\n");
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub n: usize,
    pub suite: Suite,
    pub seed: u64,
    /// Overrides every check's sample count.
    pub samples: Option<usize>,
    /// Overrides the tolerance of identity-class checks.
    pub tol: Option<f64>,
    /// Time budget for the root-set search.
    pub budget_secs: u64,
    /// Root-set cache directory; the default cache location when absent.
    pub cache_dir: Option<PathBuf>,
    pub include_timing: bool,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            n: 1,
            suite: Suite::All,
            seed: 0,
            samples: None,
            tol: None,
            budget_secs: 60,
            cache_dir: None,
            include_timing: true,
        }
    }
}

impl Config {
    pub fn from_file(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
            assert_eq!(serde_json::to_string(&s).unwrap(), format!("\"{}\"", s.name()));
        }
        assert!("everything".parse::<Suite>().is_err());
        assert_eq!(Suite::All.members().len(), 7);
    }

    #[test]
    fn partial_config_fills_defaults() {
        let c: Config = serde_json::from_str(r#"{"n": 3, "suite": "groupoid"}"#).unwrap();
        assert_eq!((c.n, c.suite, c.seed, c.budget_secs), (3, Suite::Groupoid, 0, 60));
        assert!(serde_json::from_str::<Config>(r#"{"m": 3}"#).is_err());
    }
}
