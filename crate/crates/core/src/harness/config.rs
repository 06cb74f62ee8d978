//! Experiment configuration, read from TOML.
//!
//! ```toml
//! n = 400
//! k = 2
//! p = 0.1
//! q = 0.02
//! sizes = "balanced"          # or an explicit list, e.g. [150, 250]
//! algorithm = "bcavi-digamma" # bcavi-log | cavi | gibbs | mle
//! iterations = 6              # default: ceil(ln n)
//! replications = 100
//! seed = 0                    # replication r uses seed + r
//!
//! [prior]                     # optional; default kind = "uniform"
//! kind = "explicit"
//! alpha_p = 1.0
//! beta_p = 1.0
//! alpha_q = 1.0
//! beta_q = 1.0
//! weights = [1.0, 1.0]        # optional per-community prior weights
//!
//! [init]
//! kind = "corrupt"            # spectral | corrupt | file
//! fraction = 0.15             # corrupt only
//! # path = "init.labels"      # file only
//!
//! [output]
//! dir = "out"
//! ```

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{ConfigIssue, Result, SbmError};
use crate::mle::Estimator;
use crate::model::balanced_sizes;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    BcaviDigamma,
    BcaviLog,
    Cavi,
    Gibbs,
    Mle,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] =
        [Algorithm::BcaviDigamma, Algorithm::BcaviLog, Algorithm::Cavi, Algorithm::Gibbs, Algorithm::Mle];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::BcaviDigamma => "bcavi-digamma",
            Algorithm::BcaviLog => "bcavi-log",
            Algorithm::Cavi => "cavi",
            Algorithm::Gibbs => "gibbs",
            Algorithm::Mle => "mle",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = SbmError;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| SbmError::Input(format!("unknown algorithm `{s}`; expected one of bcavi-digamma, bcavi-log, cavi, gibbs, mle")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SizesKeyword {
    Balanced,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SizesSpec {
    Keyword(SizesKeyword),
    Explicit(Vec<usize>),
}

impl Default for SizesSpec {
    fn default() -> Self {
        SizesSpec::Keyword(SizesKeyword::Balanced)
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum PriorSpec {
    #[default]
    Uniform,
    Explicit {
        alpha_p: f64,
        beta_p: f64,
        alpha_q: f64,
        beta_q: f64,
        #[serde(default)]
        weights: Option<Vec<f64>>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum InitSpec {
    Spectral,
    Corrupt { fraction: f64 },
    File { path: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default)]
    pub dir: Option<PathBuf>,
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub n: usize,
    pub k: usize,
    pub p: f64,
    pub q: f64,
    #[serde(default)]
    pub sizes: SizesSpec,
    #[serde(default)]
    pub prior: PriorSpec,
    pub init: InitSpec,
    pub algorithm: Algorithm,
    #[serde(default)]
    pub iterations: Option<usize>,
    #[serde(default = "one")]
    pub replications: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub mle_estimator: Estimator,
    #[serde(default)]
    pub output: OutputSpec,
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| {
            SbmError::Config(vec![ConfigIssue { field: "<document>".into(), message: e.message().to_string() }])
        })
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut config = Self::from_toml_str(&text)?;
        // Relative init paths resolve against the config file's directory.
        if let InitSpec::File { path: init } = &mut config.init {
            if init.is_relative() {
                if let Some(parent) = path.parent() {
                    *init = parent.join(&*init);
                }
            }
        }
        Ok(config)
    }

    pub fn community_sizes(&self) -> Vec<usize> {
        match &self.sizes {
            SizesSpec::Keyword(SizesKeyword::Balanced) => balanced_sizes(self.n, self.k),
            SizesSpec::Explicit(sizes) => sizes.clone(),
        }
    }

    /// Lists every violated constraint, each with its field path.
    pub fn validate(&self) -> Result<()> {
        let mut issues = Vec::new();
        let mut issue = |field: &str, message: String| issues.push(ConfigIssue { field: field.into(), message });

        if self.n < 2 {
            issue("n", format!("must be at least 2, got {}", self.n));
        }
        if self.k < 2 {
            issue("k", format!("must be at least 2, got {}", self.k));
        } else if self.k > self.n {
            issue("k", format!("must not exceed n = {}", self.n));
        }
        if !(0.0..=1.0).contains(&self.p) {
            issue("p", format!("must lie in [0, 1], got {}", self.p));
        }
        if !(0.0..=1.0).contains(&self.q) {
            issue("q", format!("must lie in [0, 1], got {}", self.q));
        }
        if !(self.p > self.q) {
            issue("q", format!("must be less than p (got p = {}, q = {})", self.p, self.q));
        }
        if let SizesSpec::Explicit(sizes) = &self.sizes {
            if sizes.len() != self.k {
                issue("sizes", format!("expected {} entries, got {}", self.k, sizes.len()));
            }
            if sizes.contains(&0) {
                issue("sizes", "every community needs at least one node".into());
            }
            if sizes.iter().sum::<usize>() != self.n {
                issue("sizes", format!("must sum to n = {}", self.n));
            }
        }
        if self.iterations == Some(0) {
            issue("iterations", "must be at least 1".into());
        }
        if self.replications == 0 {
            issue("replications", "must be at least 1".into());
        }
        if let PriorSpec::Explicit { alpha_p, beta_p, alpha_q, beta_q, weights } = &self.prior {
            for (name, value) in [("alpha_p", alpha_p), ("beta_p", beta_p), ("alpha_q", alpha_q), ("beta_q", beta_q)] {
                if !(*value > 0.0 && value.is_finite()) {
                    issue(&format!("prior.{name}"), format!("must be positive, got {value}"));
                }
            }
            if let Some(w) = weights {
                if w.len() != self.k {
                    issue("prior.weights", format!("expected {} entries, got {}", self.k, w.len()));
                }
                if w.iter().any(|&x| !(x > 0.0 && x.is_finite())) {
                    issue("prior.weights", "every weight must be positive".into());
                }
            }
        }
        match &self.init {
            InitSpec::Corrupt { fraction } if !(0.0..1.0).contains(fraction) => {
                issue("init.fraction", format!("must lie in [0, 1), got {fraction}"));
            }
            InitSpec::File { path } if !path.is_file() => {
                issue("init.path", format!("{} does not exist", path.display()));
            }
            _ => {}
        }
        if issues.is_empty() {
            Ok(())
        } else {
            Err(SbmError::Config(issues))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"
        n = 400
        k = 2
        p = 0.1
        q = 0.02
        algorithm = "bcavi-log"
        replications = 3
        [init]
        kind = "corrupt"
        fraction = 0.15
    "#;

    #[test]
    fn parses_defaults() {
        let c = ExperimentConfig::from_toml_str(BASE).unwrap();
        assert_eq!(c.algorithm, Algorithm::BcaviLog);
        assert_eq!(c.sizes, SizesSpec::Keyword(SizesKeyword::Balanced));
        assert_eq!(c.prior, PriorSpec::Uniform);
        assert_eq!(c.init, InitSpec::Corrupt { fraction: 0.15 });
        assert_eq!(c.iterations, None);
        assert_eq!(c.community_sizes(), vec![200, 200]);
        c.validate().unwrap();
    }

    #[test]
    fn explicit_sections() {
        let text = format!(
            "{BASE}\n[prior]\nkind = \"explicit\"\nalpha_p = 2.0\nbeta_p = 1.0\nalpha_q = 1.0\nbeta_q = 2.0\nweights = [1.0, 2.0]\n"
        )
        .replace("n = 400", "n = 400\nsizes = [100, 300]");
        let c = ExperimentConfig::from_toml_str(&text).unwrap();
        assert_eq!(c.community_sizes(), vec![100, 300]);
        assert!(matches!(c.prior, PriorSpec::Explicit { weights: Some(_), .. }));
        c.validate().unwrap();
    }

    #[test]
    fn validation_names_fields() {
        let c = ExperimentConfig::from_toml_str(&BASE.replace("q = 0.02", "q = 0.3")).unwrap();
        match c.validate() {
            Err(SbmError::Config(issues)) => {
                assert_eq!(issues.len(), 1);
                assert_eq!(issues[0].field, "q");
            }
            other => panic!("expected config error, got {other:?}"),
        }
        let c = ExperimentConfig::from_toml_str(&BASE.replace("fraction = 0.15", "fraction = 1.5").replace("replications = 3", "replications = 0")).unwrap();
        let Err(SbmError::Config(issues)) = c.validate() else { panic!() };
        let fields: Vec<_> = issues.iter().map(|i| i.field.as_str()).collect();
        assert_eq!(fields, vec!["replications", "init.fraction"]);
    }

    #[test]
    fn unknown_keys_and_algorithms_rejected() {
        assert!(ExperimentConfig::from_toml_str(&format!("{BASE}\nbogus = 1\n")).is_err());
        assert!(ExperimentConfig::from_toml_str(&BASE.replace("bcavi-log", "em")).is_err());
        assert_eq!("gibbs".parse::<Algorithm>().unwrap(), Algorithm::Gibbs);
        assert!("nope".parse::<Algorithm>().is_err());
    }
}
