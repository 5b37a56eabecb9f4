//! TOML experiment configs.
//!
//! ```toml
//! [family]
//! catalog = "gamma2-legendre"
//! ells = [3, 5, 7]            # or ell_range = [3, 31], primes inclusive
//! action = "cayley"           # projective-line | nonzero-vectors | diagonal-quotient
//! basepoint = "canonical"     # or an explicit point, e.g. [1, 0]
//! monodromy = "thrice-punctured-sphere"
//!
//! [solver]
//! tol = 1e-9
//! diameter = true
//!
//! [chain]
//! burger_constant = 1.0
//!
//! [output]
//! dir = "results"
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{is_prime, AlgebraError, Catalog, DEFAULT_CAP};
use crate::graph::GroupAction;
use crate::metrics::default_exponent_grid;
use crate::spectral::{SolverSettings, DEFAULT_DENSE_THRESHOLD};
use crate::LOG_BASE;

/// Overrides `[output].cache_dir`.
pub const CACHE_DIR_ENV: &str = "ESPERANTO_CACHE_DIR";

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("invalid config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("no ℓ values given")]
    EmptyEll,
    #[error("give either `ells` or `ell_range`, not both")]
    AmbiguousEll,
    #[error("ℓ = {0} is not prime")]
    NotPrime(u64),
    #[error("ell_range [{0}, {1}] contains no primes")]
    EmptyRange(u64, u64),
    #[error("{name} must be positive")]
    NonPositive { name: &'static str },
    #[error("unsupported log base `{0}`; only `natural` is accepted")]
    LogBase(String),
    #[error("the exponent grid must be nonempty with finite entries ≥ 0")]
    Grid,
    #[error("the {0} action needs a catalog of even dimension")]
    ActionDimension(&'static str),
    #[error(transparent)]
    Catalog(#[from] AlgebraError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ActionKind {
    Cayley,
    ProjectiveLine,
    NonzeroVectors,
    DiagonalQuotient,
}

impl ActionKind {
    pub fn to_action(self) -> GroupAction {
        match self {
            ActionKind::Cayley => GroupAction::LeftTranslation,
            ActionKind::ProjectiveLine => GroupAction::ProjectiveLine,
            ActionKind::NonzeroVectors => GroupAction::NonzeroVectors,
            ActionKind::DiagonalQuotient => GroupAction::DiagonalQuotient,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Basepoint {
    /// Only `"canonical"` is accepted.
    Rule(String),
    Point(Vec<u32>),
}

impl Default for Basepoint {
    fn default() -> Self {
        Basepoint::Rule("canonical".into())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Monodromy {
    /// `σ₀, σ₁` from the first two generators, `σ∞ = (σ₀σ₁)⁻¹`.
    ThricePuncturedSphere,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomMatrices {
    pub dim: usize,
    pub matrices: Vec<Vec<i64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyConfig {
    pub catalog: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ells: Option<Vec<u64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ell_range: Option<[u64; 2]>,
    #[serde(default = "default_action")]
    pub action: ActionKind,
    #[serde(default)]
    pub basepoint: Basepoint,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub genus: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub custom: Option<CustomMatrices>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub monodromy: Option<Monodromy>,
}

fn default_action() -> ActionKind {
    ActionKind::Cayley
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    pub tol: f64,
    pub max_iter: usize,
    pub dense_threshold: usize,
    pub krylov_dim: usize,
    /// Cap on group and orbit enumeration.
    pub cap: usize,
    pub diameter: bool,
    /// Perfectness and generation by order-ℓ elements.
    pub predicates: bool,
    /// Also solve the Cayley graph and compare (Schreier actions only).
    pub interlacing: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        let s = SolverSettings::default();
        SolverConfig {
            tol: s.tol,
            max_iter: s.max_iter,
            dense_threshold: DEFAULT_DENSE_THRESHOLD,
            krylov_dim: s.krylov_dim,
            cap: DEFAULT_CAP,
            diameter: true,
            predicates: true,
            interlacing: false,
        }
    }
}

impl SolverConfig {
    pub fn settings(&self) -> SolverSettings {
        SolverSettings {
            tol: self.tol,
            max_iter: self.max_iter,
            dense_threshold: self.dense_threshold,
            krylov_dim: self.krylov_dim,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ChainConfig {
    /// `c_B`, assumed rather than computed.
    pub burger_constant: f64,
    /// `c'` in the quantitative gonality bound, assumed.
    pub quant_constant: f64,
    pub a_grid: Vec<f64>,
    pub log_base: String,
    pub kelner_slack: f64,
}

impl Default for ChainConfig {
    fn default() -> Self {
        ChainConfig {
            burger_constant: 1.0,
            quant_constant: 1.0,
            a_grid: default_exponent_grid(),
            log_base: LOG_BASE.into(),
            kelner_slack: 10.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub cache_dir: PathBuf,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            dir: PathBuf::from("results"),
            cache_dir: PathBuf::from(".esperanto-cache"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub family: FamilyConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub chain: ChainConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let cfg: ExperimentConfig = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a config file. Relative output paths are taken relative to the
    /// file's directory.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        let mut cfg = ExperimentConfig::parse(&text)?;
        if let Some(base) = path.parent() {
            for p in [&mut cfg.output.dir, &mut cfg.output.cache_dir] {
                if p.is_relative() {
                    *p = base.join(&*p);
                }
            }
        }
        Ok(cfg)
    }

    pub fn catalog(&self) -> Result<Catalog, ConfigError> {
        let f = &self.family;
        let custom = f.custom.as_ref().map(|c| (c.dim, c.matrices.clone()));
        Ok(Catalog::parse(&f.catalog, f.genus, custom)?)
    }

    /// The sorted, deduplicated member primes.
    pub fn ells(&self) -> Result<Vec<u32>, ConfigError> {
        let f = &self.family;
        let mut ells: Vec<u64> = match (&f.ells, f.ell_range) {
            (Some(_), Some(_)) => return Err(ConfigError::AmbiguousEll),
            (None, None) => return Err(ConfigError::EmptyEll),
            (Some(list), None) => {
                if let Some(&bad) = list.iter().find(|&&l| !is_prime(l)) {
                    return Err(ConfigError::NotPrime(bad));
                }
                list.clone()
            }
            (None, Some([lo, hi])) => {
                let primes: Vec<u64> = (lo..=hi).filter(|&l| is_prime(l)).collect();
                if primes.is_empty() {
                    return Err(ConfigError::EmptyRange(lo, hi));
                }
                primes
            }
        };
        if ells.is_empty() {
            return Err(ConfigError::EmptyEll);
        }
        ells.sort_unstable();
        ells.dedup();
        ells.into_iter()
            .map(|l| u32::try_from(l).map_err(|_| ConfigError::Catalog(AlgebraError::NotPrime(l))))
            .collect()
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let catalog = self.catalog()?;
        self.ells()?;
        let s = &self.solver;
        if !(s.tol > 0.0) || !s.tol.is_finite() {
            return Err(ConfigError::NonPositive { name: "solver.tol" });
        }
        for (name, v) in [
            ("solver.max_iter", s.max_iter),
            ("solver.krylov_dim", s.krylov_dim),
            ("solver.cap", s.cap),
        ] {
            if v == 0 {
                return Err(ConfigError::NonPositive { name });
            }
        }
        let c = &self.chain;
        for (name, v) in [
            ("chain.burger_constant", c.burger_constant),
            ("chain.quant_constant", c.quant_constant),
            ("chain.kelner_slack", c.kelner_slack),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(ConfigError::NonPositive { name });
            }
        }
        if c.log_base != LOG_BASE {
            return Err(ConfigError::LogBase(c.log_base.clone()));
        }
        if c.a_grid.is_empty() || c.a_grid.iter().any(|a| !(*a >= 0.0) || !a.is_finite()) {
            return Err(ConfigError::Grid);
        }
        if let Basepoint::Rule(r) = &self.family.basepoint {
            if r != "canonical" {
                return Err(ConfigError::Catalog(AlgebraError::InvalidCatalog(format!(
                    "unknown basepoint rule `{r}`"
                ))));
            }
        }
        if self.family.action == ActionKind::DiagonalQuotient && catalog.dim() % 2 != 0 {
            return Err(ConfigError::ActionDimension("diagonal-quotient"));
        }
        Ok(())
    }

    /// `$ESPERANTO_CACHE_DIR` when set, else `[output].cache_dir`.
    pub fn cache_dir(&self) -> PathBuf {
        match std::env::var_os(CACHE_DIR_ENV) {
            Some(dir) if !dir.is_empty() => PathBuf::from(dir),
            _ => self.output.cache_dir.clone(),
        }
    }
}
