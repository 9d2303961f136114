//! Experiment configuration files.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::baselines::{BeamConfig, GaConfig};
use crate::error::{Result, SsrError};
use crate::fvqe::FvqeConfig;
use crate::laminate::PlyAngleSet;
use crate::objective::{BucklingSetup, ConstraintWeights};
use crate::tensornet::DmrgConfig;

/// Ply counts covered when a config does not list its own.
pub const DEFAULT_PLY_GRID: [usize; 6] = [15, 30, 50, 100, 150, 200];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AngleSetChoice {
    /// `"conventional"` or `"fifteen_degree"`.
    Named(String),
    Degrees(Vec<f64>),
}

impl Default for AngleSetChoice {
    fn default() -> Self {
        AngleSetChoice::Named("conventional".into())
    }
}

impl AngleSetChoice {
    pub fn resolve(&self) -> Result<PlyAngleSet> {
        match self {
            AngleSetChoice::Named(n) => match n.as_str() {
                "conventional" => Ok(PlyAngleSet::conventional()),
                "fifteen_degree" => Ok(PlyAngleSet::fifteen_degree()),
                other => Err(SsrError::InvalidConfig(format!("unknown angle set {other:?}"))),
            },
            AngleSetChoice::Degrees(v) => PlyAngleSet::new(v.clone()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PenaltyPreset {
    /// Solver default when the target is constrained, none otherwise.
    #[default]
    Auto,
    None,
    /// `(1.0, 0.5, 0.2, 0.2) / N`.
    Dmrg,
    /// `γ = 0.05` on every constraint.
    Fvqe,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Penalties {
    Preset(PenaltyPreset),
    Uniform { gamma: f64 },
    Custom(ConstraintWeights),
}

impl Default for Penalties {
    fn default() -> Self {
        Penalties::Preset(PenaltyPreset::Auto)
    }
}

impl Penalties {
    pub fn resolve(&self, plies: usize, constrained: bool, solver_default: PenaltyPreset) -> ConstraintWeights {
        let preset = |p: PenaltyPreset| match p {
            PenaltyPreset::None => ConstraintWeights::none(),
            PenaltyPreset::Dmrg => ConstraintWeights::dmrg_defaults(plies),
            PenaltyPreset::Fvqe => ConstraintWeights::uniform(0.05),
            PenaltyPreset::Auto => unreachable!(),
        };
        match *self {
            Penalties::Preset(PenaltyPreset::Auto) if constrained => preset(solver_default),
            Penalties::Preset(PenaltyPreset::Auto) => ConstraintWeights::none(),
            Penalties::Preset(p) => preset(p),
            Penalties::Uniform { gamma } => ConstraintWeights::uniform(gamma),
            Penalties::Custom(w) => w,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SolverKind {
    Dmrg {
        #[serde(default)]
        dmrg: DmrgConfig,
    },
    Fvqe {
        #[serde(default)]
        fvqe: FvqeConfig,
    },
    Beam {
        #[serde(default)]
        beam: BeamConfig,
    },
    Ga {
        #[serde(default)]
        ga: GaConfig,
    },
    BruteForce,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverFamily {
    Dmrg,
    Fvqe,
    Baseline,
}

impl SolverKind {
    pub fn family(&self) -> SolverFamily {
        match self {
            SolverKind::Dmrg { .. } => SolverFamily::Dmrg,
            SolverKind::Fvqe { .. } => SolverFamily::Fvqe,
            _ => SolverFamily::Baseline,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            SolverKind::Dmrg { .. } => "dmrg",
            SolverKind::Fvqe { .. } => "fvqe",
            SolverKind::Beam { .. } => "beam",
            SolverKind::Ga { .. } => "ga",
            SolverKind::BruteForce => "brute_force",
        }
    }

    pub fn default_penalties(&self) -> PenaltyPreset {
        match self {
            SolverKind::Fvqe { .. } => PenaltyPreset::Fvqe,
            _ => PenaltyPreset::Dmrg,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            SolverKind::Dmrg { dmrg } => dmrg.validate(),
            SolverKind::Fvqe { fvqe } => fvqe.validate(),
            SolverKind::Beam { beam } => beam.validate(),
            SolverKind::Ga { ga } => ga.validate(),
            SolverKind::BruteForce => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverEntry {
    /// Record label; defaults to the solver kind.
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default)]
    pub penalties: Penalties,
    #[serde(flatten)]
    pub kind: SolverKind,
}

impl SolverEntry {
    pub fn label(&self) -> String {
        self.name.clone().unwrap_or_else(|| self.kind.label().to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TargetsSection {
    pub plies: Vec<usize>,
    pub count: usize,
    pub angle_set: AngleSetChoice,
    pub constrained: bool,
    /// Existing targets file; replaces generation when present.
    pub file: Option<PathBuf>,
}

impl Default for TargetsSection {
    fn default() -> Self {
        Self {
            plies: DEFAULT_PLY_GRID.to_vec(),
            count: super::DEFAULT_TARGET_COUNT,
            angle_set: AngleSetChoice::default(),
            constrained: true,
            file: None,
        }
    }
}

/// Buckling maximisation over fixed ply-angle counts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BucklingSection {
    pub plies: usize,
    /// Explicit count-sets; otherwise taken from valid generated stacks.
    pub count_sets: Vec<Vec<usize>>,
    pub instances: usize,
    pub constrained: bool,
    pub setup: BucklingSetup,
    pub fvqe: FvqeConfig,
}

impl Default for BucklingSection {
    fn default() -> Self {
        Self {
            plies: 8,
            count_sets: Vec::new(),
            instances: 10,
            constrained: false,
            setup: BucklingSetup::default(),
            fvqe: FvqeConfig::buckling(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BiasSection {
    pub plies: usize,
    pub alphas: Vec<f64>,
    pub dmrg: DmrgConfig,
    /// `auto` resolves to the DMRG table without the contiguity term.
    pub penalties: Penalties,
    /// Which generated target to use.
    pub instance: usize,
}

impl Default for BiasSection {
    fn default() -> Self {
        Self {
            plies: 50,
            alphas: vec![-0.04, -0.02, -0.01, 0.0, 0.01, 0.02, 0.04],
            dmrg: DmrgConfig { max_bond: 32, sweeps: 20, trials: 10, ..DmrgConfig::default() },
            penalties: Penalties::default(),
            instance: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub output_dir: Option<PathBuf>,
    /// Worker threads; `0` uses every core.
    pub parallelism: usize,
    pub targets: TargetsSection,
    pub solvers: Vec<SolverEntry>,
    pub buckling: Option<BucklingSection>,
    pub bias: Option<BiasSection>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seed: 2024,
            output_dir: None,
            parallelism: 1,
            targets: TargetsSection::default(),
            solvers: Vec::new(),
            buckling: None,
            bias: None,
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| SsrError::InvalidConfig(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| SsrError::InvalidConfig(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| SsrError::Parse(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        if self.targets.file.is_none() && (self.targets.count == 0 || self.targets.plies.contains(&0)) {
            return Err(SsrError::InvalidConfig("targets need count ≥ 1 and positive ply counts".into()));
        }
        self.targets.angle_set.resolve()?;
        for s in &self.solvers {
            s.kind.validate()?;
        }
        if let Some(b) = &self.buckling {
            b.fvqe.validate()?;
            if b.instances == 0 && b.count_sets.is_empty() {
                return Err(SsrError::InvalidConfig("buckling section needs instances or count_sets".into()));
            }
        }
        if let Some(b) = &self.bias {
            b.dmrg.validate()?;
            if b.alphas.is_empty() {
                return Err(SsrError::InvalidConfig("bias sweep needs at least one α".into()));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"
seed = 7
parallelism = 2

[targets]
plies = [6, 8]
count = 3
angle_set = "conventional"

[[solvers]]
kind = "dmrg"
name = "dmrg-chi8"
[solvers.dmrg]
max_bond = 8
sweeps = 10

[[solvers]]
kind = "beam"
penalties = "none"

[[solvers]]
kind = "fvqe"
penalties = { gamma = 0.05 }
[solvers.fvqe]
max_iterations = 5

[[solvers]]
kind = "brute_force"
penalties = { disorientation = 1.0, contiguity_limit = 3 }
"#;

    #[test]
    fn parses_sample() {
        let cfg = ExperimentConfig::from_toml(SAMPLE).unwrap();
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.solvers.len(), 4);
        assert_eq!(cfg.solvers[0].label(), "dmrg-chi8");
        match &cfg.solvers[0].kind {
            SolverKind::Dmrg { dmrg } => assert_eq!((dmrg.max_bond, dmrg.sweeps, dmrg.trials), (8, 10, 10)),
            k => panic!("{k:?}"),
        }
        assert_eq!(cfg.solvers[1].penalties, Penalties::Preset(PenaltyPreset::None));
        assert_eq!(cfg.solvers[2].penalties.resolve(8, true, PenaltyPreset::Fvqe), ConstraintWeights::uniform(0.05));
        let w = cfg.solvers[3].penalties.resolve(8, true, PenaltyPreset::Dmrg);
        assert_eq!((w.disorientation, w.contiguity, w.contiguity_limit), (1.0, 0.0, 3));
        let back = ExperimentConfig::from_toml(&cfg.to_toml().unwrap()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn auto_penalties_follow_the_table() {
        let p = Penalties::default();
        assert_eq!(p.resolve(10, true, PenaltyPreset::Dmrg), ConstraintWeights::dmrg_defaults(10));
        assert_eq!(p.resolve(10, false, PenaltyPreset::Dmrg), ConstraintWeights::none());
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(ExperimentConfig::from_toml("seed = \"x\"").is_err());
        assert!(ExperimentConfig::from_toml("[[solvers]]\nkind = \"qaoa\"").is_err());
        assert!(ExperimentConfig::from_toml("[targets]\ncount = 0").is_err());
        assert!(ExperimentConfig::from_toml("[[solvers]]\nkind = \"dmrg\"\n[solvers.dmrg]\nmax_bond = 0").is_err());
        assert!(ExperimentConfig::from_toml("[targets]\nangle_set = \"odd\"").is_err());
    }
}
