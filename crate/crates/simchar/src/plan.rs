//! Experiment plans, read from TOML.
//!
//! ```toml
//! manifold = "s1(8)"
//! levels = [0, 1, 2, 3]
//! seeds = 7
//! scale = 0.25
//! p = 0
//! action = "maxwell"
//! g2 = 1.0
//! observable = "const"
//! window = 8
//! out = "s1.csv"
//!
//! [tolerances]
//! fullness_floor = 0.01
//! ```

use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use simchar_core::characters::CharacterModel;
use simchar_core::gauge::{ActionSpec, ObservableSpec};

use crate::catalog::ManifoldId;
use crate::report::config_hash;
use crate::{HarnessError, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Seeds {
    One(u64),
    PerLevel(Vec<u64>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// Smallest acceptable fullness; lower levels abort the run.
    pub fullness_floor: f64,
    pub stokes: f64,
    /// Bound on the neglected tail of the class sum.
    pub theta: f64,
    pub hodge: f64,
    /// Model verification is skipped above this many fine top simplices.
    pub max_fine_simplices: usize,
    /// Largest relative change of the fitted constant over the last two levels.
    pub proxy_c_variation: f64,
    /// Smallest error reduction per mesh halving for circle eigenvalues.
    pub eigen_factor: f64,
    /// Relative cutoff below which Laplacian eigenvalues count as zero.
    pub kernel_threshold: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            fullness_floor: 0.01,
            stokes: 1e-12,
            theta: 1e-12,
            hodge: 1e-9,
            max_fine_simplices: 2000,
            proxy_c_variation: 0.25,
            eigen_factor: 3.0,
            kernel_threshold: 1e-12,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentPlan {
    pub manifold: String,
    pub levels: Vec<u32>,
    #[serde(default = "default_seeds")]
    pub seeds: Seeds,
    #[serde(default = "default_scale")]
    pub scale: f64,
    #[serde(default)]
    pub p: usize,
    #[serde(default = "default_action")]
    pub action: String,
    #[serde(default = "default_g2")]
    pub g2: f64,
    #[serde(default = "default_observable")]
    pub observable: String,
    #[serde(default = "default_window")]
    pub window: usize,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub out: Option<PathBuf>,
    /// Adds a `wall_time` column, at the price of reproducible bytes.
    #[serde(default)]
    pub record_timings: bool,
}

fn default_seeds() -> Seeds {
    Seeds::One(0)
}
fn default_scale() -> f64 {
    0.25
}
fn default_action() -> String {
    "maxwell".into()
}
fn default_g2() -> f64 {
    1.0
}
fn default_observable() -> String {
    "const".into()
}
fn default_window() -> usize {
    8
}

impl ExperimentPlan {
    pub fn new(manifold: &str, levels: Vec<u32>) -> Self {
        Self {
            manifold: manifold.into(),
            levels,
            seeds: default_seeds(),
            scale: default_scale(),
            p: 0,
            action: default_action(),
            g2: default_g2(),
            observable: default_observable(),
            window: default_window(),
            tolerances: Tolerances::default(),
            out: None,
            record_timings: false,
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let plan: Self = toml::from_str(text)?;
        plan.validate()?;
        Ok(plan)
    }

    /// Reads a plan; a relative `out` is taken relative to the plan file.
    pub fn load(path: &Path) -> Result<Self> {
        let mut plan = Self::from_toml(&std::fs::read_to_string(path)?)?;
        if let (Some(out), Some(dir)) = (&plan.out, path.parent()) {
            if out.is_relative() {
                plan.out = Some(dir.join(out));
            }
        }
        Ok(plan)
    }

    pub fn validate(&self) -> Result<()> {
        let id = self.manifold_id()?;
        if self.levels.is_empty() {
            return Err(HarnessError::Plan("no levels".into()));
        }
        if self.levels.windows(2).any(|w| w[0] >= w[1]) {
            return Err(HarnessError::Plan("levels must be strictly increasing".into()));
        }
        if let Seeds::PerLevel(s) = &self.seeds {
            if s.len() != self.levels.len() {
                return Err(HarnessError::Plan(format!("{} seeds for {} levels", s.len(), self.levels.len())));
            }
        }
        if !(self.scale > 0.0 && self.scale < 1.0) {
            return Err(HarnessError::Plan("scale must lie in (0, 1)".into()));
        }
        if self.p > id.dim() {
            return Err(HarnessError::Plan(format!("degree {} exceeds the dimension {}", self.p, id.dim())));
        }
        self.action_spec()?;
        self.observable_choice()?;
        if !(self.tolerances.kernel_threshold > 0.0 && self.tolerances.kernel_threshold < 1.0) {
            return Err(HarnessError::Plan("kernel threshold must lie in (0, 1)".into()));
        }
        if self.window == 0 {
            return Err(HarnessError::Plan("window must be positive".into()));
        }
        Ok(())
    }

    pub fn manifold_id(&self) -> Result<ManifoldId> {
        self.manifold.parse()
    }

    pub fn seed(&self, level_index: usize) -> u64 {
        match &self.seeds {
            Seeds::One(s) => *s,
            Seeds::PerLevel(s) => s[level_index],
        }
    }

    pub fn action_spec(&self) -> Result<ActionSpec> {
        parse_action(&self.action, self.g2)
    }

    pub fn observable_choice(&self) -> Result<ObservableChoice> {
        self.observable.parse()
    }

    /// Hash of the canonical TOML form of the plan.
    pub fn config_hash(&self) -> String {
        config_hash(&toml::to_string(self).expect("plans serialize"))
    }
}

pub fn parse_action(name: &str, g2: f64) -> Result<ActionSpec> {
    match name {
        "maxwell" => Ok(ActionSpec::maxwell(g2)?),
        other => Err(HarnessError::Plan(format!("unknown action `{other}`"))),
    }
}

/// Which cycle a Wilson observable follows.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CycleRef {
    /// The `j`-th cycle of the integral homology basis of the subdivision.
    Basis(usize),
    /// An explicit integer chain on the subdivision.
    Chain(Vec<i64>),
}

/// An observable as written in plans and on the command line:
/// `const`, `wilson:h<j>:<q>` or `wilson:<c0,c1,…>:<q>`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ObservableChoice {
    Constant,
    Wilson { cycle: CycleRef, charge: i64 },
}

impl FromStr for ObservableChoice {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || HarnessError::Plan(format!("bad observable `{s}`; expected const, wilson:h<j>:<q> or wilson:<chain>:<q>"));
        if s == "const" {
            return Ok(Self::Constant);
        }
        let rest = s.strip_prefix("wilson:").ok_or_else(bad)?;
        let (cycle, charge) = rest.rsplit_once(':').ok_or_else(bad)?;
        let charge = charge.parse().map_err(|_| bad())?;
        let cycle = match cycle.strip_prefix('h') {
            Some(j) => CycleRef::Basis(j.parse().map_err(|_| bad())?),
            None => CycleRef::Chain(cycle.split(',').map(|c| c.trim().parse()).collect::<std::result::Result<_, _>>().map_err(|_| bad())?),
        };
        Ok(Self::Wilson { cycle, charge })
    }
}

impl ObservableChoice {
    pub fn is_constant(&self) -> bool {
        matches!(self, Self::Constant | Self::Wilson { charge: 0, .. })
    }

    pub fn resolve(&self, model: &CharacterModel) -> Result<ObservableSpec> {
        Ok(match self {
            Self::Constant => ObservableSpec::Constant,
            Self::Wilson { cycle, charge } => {
                let cycle = match cycle {
                    CycleRef::Basis(j) => model
                        .cycles()
                        .get(*j)
                        .cloned()
                        .ok_or_else(|| HarnessError::Plan(format!("homology basis has {} cycles, no h{j}", model.cycles().len())))?,
                    CycleRef::Chain(c) => c.clone(),
                };
                ObservableSpec::Wilson { cycle, charge: *charge }
            }
        })
    }
}
