use std::path::{Path, PathBuf};

use saa_core::control::{LqProblemSpec, TargetField};
use saa_core::solvers::{ReferenceStrategy, SolverOptions};
use saa_core::stochastic::ParamDistribution;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExperimentKind {
    #[serde(rename = "example1")]
    Example1,
    #[serde(rename = "example2")]
    Example2,
    #[serde(rename = "optimality5")]
    Optimality5,
    #[serde(rename = "lognormal61")]
    Lognormal61,
    #[serde(rename = "dimension8")]
    Dimension8,
    #[serde(rename = "bounds3")]
    Bounds3,
    #[serde(rename = "solve-once")]
    SolveOnce,
}

impl ExperimentKind {
    pub fn parse(s: &str) -> Result<Self, CliError> {
        serde_json::from_value(Value::String(s.to_string()))
            .map_err(|_| CliError::Config(format!("unknown experiment kind `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scale {
    #[default]
    Desk,
    Paper,
}

impl Scale {
    pub fn parse(s: &str) -> Result<Self, CliError> {
        match s {
            "desk" => Ok(Self::Desk),
            "paper" => Ok(Self::Paper),
            other => Err(CliError::Config(format!("scale must be desk or paper, got `{other}`"))),
        }
    }

    fn mesh(self, kind: ProblemBase) -> usize {
        match (self, kind) {
            (Self::Desk, ProblemBase::Example1) => 32,
            (Self::Desk, ProblemBase::Example2) => 16,
            (Self::Paper, ProblemBase::Example1) => 256,
            (Self::Paper, ProblemBase::Example2) => 64,
        }
    }

    fn atom_grid(self) -> usize {
        match self {
            Self::Desk => 10,
            Self::Paper => 50,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProblemBase {
    Example1,
    Example2,
}

/// Problem parameters; unset fields take the defaults of `base` at the
/// configured scale.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProblemConfig {
    pub base: Option<ProblemBase>,
    pub n: Option<usize>,
    pub alpha: Option<f64>,
    pub gamma: Option<f64>,
    pub bounds: Option<[f64; 2]>,
    /// Removes the box constraint when true.
    pub unbounded: Option<bool>,
    pub target: Option<TargetField>,
    pub distribution: Option<ParamDistribution>,
    pub atoms_per_axis: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimalityConfig {
    /// Tail levels `ε = m/(α√N)`.
    pub multipliers: Vec<f64>,
}

impl Default for OptimalityConfig {
    fn default() -> Self {
        Self {
            multipliers: vec![0.5, 1.0, 1.5],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LognormalConfig {
    pub tau_grid: Vec<f64>,
    pub sample_counts: Vec<usize>,
    pub contrast: ParamDistribution,
    pub threshold_points: usize,
    pub threshold_width: f64,
}

impl Default for LognormalConfig {
    fn default() -> Self {
        let d = saa_core::analytic::LognormalDemoSpec::default();
        Self {
            tau_grid: d.tau_grid,
            sample_counts: d.sample_counts,
            contrast: d.contrast,
            threshold_points: 100,
            threshold_width: 5.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DimensionConfig {
    pub n_dim: usize,
    pub sigma_sq: f64,
    pub eps: f64,
    pub trials: usize,
    pub k_trunc: usize,
    pub variance_constant: f64,
    pub eps_infinite: f64,
    pub delta: f64,
    pub trials_infinite: usize,
}

impl Default for DimensionConfig {
    fn default() -> Self {
        Self {
            n_dim: 10,
            sigma_sq: 1.0,
            eps: 0.1,
            trials: 100_000,
            k_trunc: 100,
            variance_constant: 1.0,
            eps_infinite: 0.5,
            delta: 0.05,
            trials_infinite: 10_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConcentrationConfig {
    pub s: f64,
    pub lambda_grid: Vec<f64>,
    pub exp_trials: usize,
    pub hilbert_dim: usize,
    pub hilbert_n: usize,
    pub hilbert_trials: usize,
}

impl Default for ConcentrationConfig {
    fn default() -> Self {
        Self {
            s: 1.0,
            lambda_grid: vec![0.0, 0.25, 0.5, 1.0, 1.5, 2.0],
            exp_trials: 1_000_000,
            hilbert_dim: 2,
            hilbert_n: 10,
            hilbert_trials: 100_000,
        }
    }
}

/// One experiment, as read from a JSON document. [`ExperimentConfig::resolve`]
/// fills every scale- and kind-dependent default so the resolved document
/// alone reproduces the run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    #[serde(default)]
    pub scale: Scale,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
    #[serde(default)]
    pub problem: ProblemConfig,
    #[serde(default)]
    pub reference: Option<ReferenceStrategy>,
    #[serde(default)]
    pub n_grid: Option<Vec<usize>>,
    #[serde(default)]
    pub replications: Option<usize>,
    /// Fresh draws behind `σ̂`, `τ̂`.
    #[serde(default)]
    pub deviation_samples: Option<usize>,
    /// Sample size of a `solve-once` run.
    #[serde(default)]
    pub samples: Option<usize>,
    #[serde(default)]
    pub solver: SolverOptions,
    #[serde(default)]
    pub optimality: OptimalityConfig,
    #[serde(default)]
    pub lognormal: LognormalConfig,
    #[serde(default)]
    pub dimension: DimensionConfig,
    #[serde(default)]
    pub concentration: ConcentrationConfig,
}

impl ExperimentConfig {
    pub fn new(kind: ExperimentKind) -> Self {
        Self::from_value(serde_json::json!({ "kind": kind })).expect("minimal config is valid")
    }

    pub fn from_value(value: Value) -> Result<Self, CliError> {
        serde_json::from_value(value).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Value, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    fn base(&self) -> ProblemBase {
        match self.kind {
            ExperimentKind::Example2 => ProblemBase::Example2,
            ExperimentKind::Example1 => ProblemBase::Example1,
            _ => self.problem.base.unwrap_or(ProblemBase::Example1),
        }
    }

    /// Fills kind- and scale-dependent defaults and validates the result.
    pub fn resolve(mut self) -> Result<Self, CliError> {
        let scale = self.scale;
        match self.kind {
            ExperimentKind::Example1 | ExperimentKind::Example2 | ExperimentKind::SolveOnce => {
                let base = self.base();
                let p = &mut self.problem;
                p.base = Some(base);
                p.n.get_or_insert(scale.mesh(base));
                if base == ProblemBase::Example2 {
                    p.atoms_per_axis.get_or_insert(scale.atom_grid());
                }
                let spec = self.problem_spec()?;
                let p = &mut self.problem;
                p.alpha = Some(spec.alpha);
                p.gamma = Some(spec.regularizer.gamma);
                p.bounds = spec.regularizer.bounds;
                p.unbounded = Some(spec.regularizer.bounds.is_none());
                p.target = Some(spec.target);
                p.distribution = Some(spec.distribution.clone());
                self.reference.get_or_insert(match base {
                    ProblemBase::Example1 => ReferenceStrategy::ExactMoments,
                    ProblemBase::Example2 => ReferenceStrategy::AtomGrid {
                        k: self.problem.atoms_per_axis.unwrap_or(scale.atom_grid()),
                    },
                });
                if self.kind == ExperimentKind::SolveOnce {
                    self.samples.get_or_insert(16);
                } else {
                    let grid = match base {
                        ProblemBase::Example1 => vec![2, 4, 8, 16, 32, 64, 128, 256],
                        ProblemBase::Example2 => vec![2, 4, 8, 16, 32, 64, 128],
                    };
                    self.n_grid.get_or_insert(grid);
                    self.replications.get_or_insert(50);
                    self.deviation_samples.get_or_insert(10_000);
                }
            }
            ExperimentKind::Optimality5 => {
                self.problem.alpha.get_or_insert(1.0);
                self.n_grid.get_or_insert(vec![16, 64, 256]);
                self.replications.get_or_insert(match scale {
                    Scale::Desk => 10_000,
                    Scale::Paper => 100_000,
                });
            }
            ExperimentKind::Lognormal61 => {
                self.problem.alpha.get_or_insert(1e-3);
            }
            ExperimentKind::Dimension8 => {
                self.n_grid.get_or_insert(vec![25, 50, 100, 200, 400]);
            }
            ExperimentKind::Bounds3 => {}
        }
        self.validate()?;
        Ok(self)
    }

    fn validate(&self) -> Result<(), CliError> {
        let bad = |msg: &str| Err(CliError::Config(msg.to_string()));
        if let Some(grid) = &self.n_grid {
            if grid.is_empty() || grid.contains(&0) {
                return bad("n_grid must be nonempty with positive entries");
            }
        }
        if self.replications == Some(0) {
            return bad("replications must be positive");
        }
        if matches!(self.deviation_samples, Some(m) if m < 2) {
            return bad("deviation_samples must be at least 2");
        }
        if self.samples == Some(0) {
            return bad("samples must be positive");
        }
        if let Some(alpha) = self.problem.alpha {
            if !(alpha > 0.0) {
                return bad("problem.alpha must be positive");
            }
        }
        let o = &self.solver;
        if !(o.tol > 0.0) || o.max_iter == 0 || !(o.cg_rel_tol > 0.0) || o.cg_max_iter == 0 {
            return bad("solver tolerances and iteration caps must be positive");
        }
        Ok(())
    }

    /// The LQ problem described by `problem`, for the kinds that solve one.
    pub fn problem_spec(&self) -> Result<LqProblemSpec, CliError> {
        let p = &self.problem;
        let n = p.n.ok_or_else(|| CliError::Config("problem.n is unset".into()))?;
        let mut spec = match self.base() {
            ProblemBase::Example1 => LqProblemSpec::example1(n),
            ProblemBase::Example2 => LqProblemSpec::example2(n, p.atoms_per_axis.unwrap_or(10)),
        };
        if let Some(alpha) = p.alpha {
            spec.alpha = alpha;
        }
        if let Some(gamma) = p.gamma {
            spec.regularizer.gamma = gamma;
        }
        if let Some(bounds) = p.bounds {
            spec.regularizer.bounds = Some(bounds);
        }
        if p.unbounded == Some(true) {
            spec.regularizer.bounds = None;
        }
        if let Some(target) = p.target {
            spec.target = target;
        }
        if let Some(dist) = &p.distribution {
            spec.distribution = dist.clone();
        }
        spec.validate().map_err(|e| CliError::Config(e.to_string()))?;
        Ok(spec)
    }
}

/// Sets `value` at a dotted path such as `problem.n` or `solver.tol`. The
/// value is parsed as JSON when possible and kept as a string otherwise.
pub fn apply_override(doc: &mut Value, assignment: &str) -> Result<(), CliError> {
    let (path, raw) = assignment
        .split_once('=')
        .ok_or_else(|| CliError::Config(format!("override `{assignment}` is not key=value")))?;
    let value: Value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let keys: Vec<&str> = path.split('.').collect();
    if keys.iter().any(|k| k.is_empty()) {
        return Err(CliError::Config(format!("bad override path `{path}`")));
    }
    let mut node = doc;
    for key in &keys[..keys.len() - 1] {
        let obj = node
            .as_object_mut()
            .ok_or_else(|| CliError::Config(format!("override path `{path}` crosses a non-object")))?;
        node = obj.entry(key.to_string()).or_insert_with(|| Value::Object(Default::default()));
        if node.is_null() {
            *node = Value::Object(Default::default());
        }
    }
    let obj = node
        .as_object_mut()
        .ok_or_else(|| CliError::Config(format!("override path `{path}` crosses a non-object")))?;
    obj.insert(keys[keys.len() - 1].to_string(), value);
    Ok(())
}
