//! Run configuration: a TOML file with `problem`, `solver`, `lloyd` and
//! `output` sections. Unknown keys are rejected.

use std::path::{Path, PathBuf};

use coverage_core::homotopy::TrackerOptions;
use coverage_core::lloyd::{random_configuration, symmetric_configuration, LloydOptions};
use coverage_core::optimizer::Method;
use coverage_core::CoverageProblem;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("invalid config {path}: {message}")]
    Syntax { path: PathBuf, message: String },
    #[error("invalid problem: {0}")]
    Problem(#[from] coverage_core::ProblemError),
    #[error("invalid setting: {0}")]
    Setting(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSection {
    pub a: f64,
    pub b: f64,
    pub m: usize,
    /// Density, a polynomial in `x`.
    pub phi: String,
    /// Cost kernel, a polynomial in `s = (p - x)^2`.
    #[serde(default = "default_cost")]
    pub f: String,
}

fn default_cost() -> String {
    "s".into()
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSection {
    pub method: Method,
    pub tracker: TrackerOptions,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum InitialSpec {
    Explicit { positions: Vec<f64> },
    /// `runs` configurations drawn from seeds `seed, seed + 1, ...`.
    Random {
        seed: u64,
        #[serde(default = "one")]
        runs: usize,
    },
    /// Evenly spread around the interval midpoint with half-width `a`.
    Symmetric { a: f64 },
}

fn one() -> usize {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LloydSection {
    pub options: LloydOptions,
    pub initial: Vec<InitialSpec>,
}

impl Default for LloydSection {
    fn default() -> Self {
        LloydSection {
            options: LloydOptions::default(),
            initial: vec![InitialSpec::Random { seed: 1, runs: 1 }],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    Svg,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub directory: PathBuf,
    pub formats: Vec<Format>,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection {
            directory: PathBuf::from("out"),
            formats: vec![Format::Json, Format::Csv, Format::Svg],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub problem: ProblemSection,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub lloyd: LloydSection,
    #[serde(default)]
    pub output: OutputSection,
}

/// A labelled Lloyd starting configuration.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Start {
    pub label: String,
    pub positions: Vec<f64>,
}

impl RunConfig {
    pub fn parse(text: &str, path: &Path) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Syntax {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text, path)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn build_problem(&self) -> Result<CoverageProblem, ConfigError> {
        let p = &self.problem;
        Ok(CoverageProblem::parse(p.a, p.b, p.m, &p.phi, &p.f)?)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.solver
            .tracker
            .validate()
            .map_err(|e| ConfigError::Setting(e.to_string()))?;
        self.lloyd.options.validate().map_err(ConfigError::Setting)?;
        Ok(())
    }

    pub fn wants(&self, f: Format) -> bool {
        self.output.formats.contains(&f)
    }

    /// Expands the Lloyd initial specs into concrete starts.
    pub fn starts(&self, problem: &CoverageProblem) -> Result<Vec<Start>, ConfigError> {
        let mut out = Vec::new();
        for spec in &self.lloyd.initial {
            match spec {
                InitialSpec::Explicit { positions } => out.push(Start {
                    label: "explicit".into(),
                    positions: positions.clone(),
                }),
                InitialSpec::Random { seed, runs } => {
                    for k in 0..*runs as u64 {
                        let mut rng = ChaCha8Rng::seed_from_u64(seed + k);
                        out.push(Start {
                            label: format!("random({})", seed + k),
                            positions: random_configuration(problem, &mut rng),
                        });
                    }
                }
                InitialSpec::Symmetric { a } => out.push(Start {
                    label: format!("symmetric({a})"),
                    positions: symmetric_configuration(problem, *a),
                }),
            }
        }
        for s in &out {
            coverage_core::Configuration::new(s.positions.clone(), problem.a(), problem.b()).map_err(|e| {
                ConfigError::Setting(format!("initial configuration {} {:?}: {e}", s.label, s.positions))
            })?;
        }
        Ok(out)
    }
}
