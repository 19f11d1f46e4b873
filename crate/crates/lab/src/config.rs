use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

/// Tunable parameters; `None` means "experiment default".
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    pub q: Option<Vec<u64>>,
    pub p: Option<usize>,
    #[serde(rename = "T")]
    pub horizon: Option<f64>,
    pub dt: Option<f64>,
    pub paths: Option<usize>,
    pub lambda: Option<Vec<f64>>,
    pub seed: Option<u64>,
    /// Number of steps for the discrete-time experiments.
    pub n: Option<usize>,
    /// Generator-test lag.
    pub h: Option<f64>,
    /// Overrides the main tolerance of the experiment.
    pub tolerance: Option<f64>,
}

impl Params {
    /// Fields set in `other` win.
    pub fn overlay(self, other: Params) -> Params {
        Params {
            q: other.q.or(self.q),
            p: other.p.or(self.p),
            horizon: other.horizon.or(self.horizon),
            dt: other.dt.or(self.dt),
            paths: other.paths.or(self.paths),
            lambda: other.lambda.or(self.lambda),
            seed: other.seed.or(self.seed),
            n: other.n.or(self.n),
            h: other.h.or(self.h),
            tolerance: other.tolerance.or(self.tolerance),
        }
    }
}

/// On-disk form:
///
/// ```toml
/// experiment = "my-generator"
/// out = "runs/generator"
///
/// [params]
/// seed = 7
/// paths = 100000
/// ```
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub experiment: Option<String>,
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub params: Params,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("parsing {}", path.display()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub experiment: String,
    pub params: Params,
    pub out: PathBuf,
}

impl ExperimentConfig {
    pub fn new(experiment: impl Into<String>, params: Params) -> Self {
        Self { experiment: experiment.into(), params, out: PathBuf::from("out") }
    }

    /// Merges a config file with command-line values; flags win.
    pub fn resolve(file: Option<ConfigFile>, experiment: Option<String>, flags: Params, out: Option<PathBuf>) -> Result<Self> {
        let file = file.unwrap_or_default();
        let experiment = match (experiment, file.experiment) {
            (Some(e), _) | (None, Some(e)) => e,
            (None, None) => bail!("no experiment named on the command line or in the config file"),
        };
        Ok(Self {
            experiment,
            params: file.params.overlay(flags),
            out: out.or(file.out).unwrap_or_else(|| PathBuf::from("out")),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_rejects_unknown_keys() {
        let c = ConfigFile::parse("experiment = \"toda-identity\"\n[params]\nT = 2.0\nlambda = [0.1, 0.3]\n").unwrap();
        assert_eq!(c.params.horizon, Some(2.0));
        assert_eq!(c.params.lambda, Some(vec![0.1, 0.3]));
        assert!(ConfigFile::parse("[params]\nbogus = 1\n").is_err());
        assert!(ConfigFile::parse("colour = 1\n").is_err());
    }

    #[test]
    fn flags_override_file() {
        let file = ConfigFile::parse("experiment = \"a\"\nout = \"x\"\n[params]\nseed = 1\ndt = 0.1\n").unwrap();
        let flags = Params { seed: Some(9), ..Params::default() };
        let c = ExperimentConfig::resolve(Some(file), Some("b".into()), flags, None).unwrap();
        assert_eq!(c.experiment, "b");
        assert_eq!(c.params.seed, Some(9));
        assert_eq!(c.params.dt, Some(0.1));
        assert_eq!(c.out, PathBuf::from("x"));
        assert!(ExperimentConfig::resolve(None, None, Params::default(), None).is_err());
    }
}
