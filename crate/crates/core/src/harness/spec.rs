//! Experiment specification: a TOML file whose omitted keys take the
//! published defaults, resolved per operation into concrete parameters.

use serde::{Deserialize, Serialize};

use crate::analysis::DEFAULT_K_MAX;
use crate::error::{Error, Result};
use crate::network::{InputKind, SpectralMode};
use crate::readout::DEFAULT_RIDGE;
use crate::reservoir::{NodeKind, ReservoirConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    /// Drive with Lorenz x, fit Lorenz z.
    LorenzXz,
    /// Drive with the random map input x(k), fit y(k+1).
    MapXy,
    Memory,
    InputVectorComparison,
}

impl Task {
    pub fn label(self) -> &'static str {
        match self {
            Task::LorenzXz => "lorenz_xz",
            Task::MapXy => "map_xy",
            Task::Memory => "memory",
            Task::InputVectorComparison => "input_vector_comparison",
        }
    }
}

pub fn kind_label(kind: NodeKind) -> &'static str {
    match kind {
        NodeKind::Polynomial => "polynomial",
        NodeKind::Linear => "linear",
        NodeKind::LeakyTanh => "leaky_tanh",
    }
}

/// A flip grid entry: an absolute number of edges or a fraction of the
/// nonzero edges.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FlipValue {
    Count(usize),
    Fraction(f64),
}

impl FlipValue {
    /// Number of edges to flip in a network with `n_nonzero` +1 edges.
    pub fn resolve(self, n_nonzero: usize) -> Result<usize> {
        let n = match self {
            FlipValue::Count(c) => c,
            FlipValue::Fraction(f) => {
                if !(0.0..=1.0).contains(&f) {
                    return Err(Error::InvalidParameter(format!("flip fraction {f} outside [0, 1]")));
                }
                (f * n_nonzero as f64).round() as usize
            }
        };
        if n > n_nonzero {
            return Err(Error::Capacity { requested: n, available: n_nonzero });
        }
        Ok(n)
    }
}

/// Default fraction grid 0, 0.05, ..., 0.5.
pub fn default_fraction_grid() -> Vec<FlipValue> {
    (0..=10).map(|i| FlipValue::Fraction(i as f64 * 0.05)).collect()
}

/// Default absolute flip counts for symmetry sweeps.
pub fn default_symmetry_counts() -> Vec<FlipValue> {
    [0, 1, 2, 5, 10, 20, 50, 100].into_iter().map(FlipValue::Count).collect()
}

/// Optional per-field overrides of the reservoir parameters.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReservoirOverrides {
    pub lambda: Option<f64>,
    pub alpha: Option<f64>,
    pub p1: Option<f64>,
    pub p2: Option<f64>,
    pub p3: Option<f64>,
    pub dt: Option<f64>,
    pub substeps: Option<usize>,
    pub transient: Option<usize>,
    pub n_record: Option<usize>,
}

impl ReservoirOverrides {
    fn apply(&self, cfg: &mut ReservoirConfig) {
        macro_rules! set {
            ($($f:ident),*) => { $( if let Some(v) = self.$f { cfg.$f = v; } )* };
        }
        set!(lambda, alpha, p1, p2, p3, dt, substeps, transient, n_record);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentSpec {
    pub task: Task,
    pub node_kind: NodeKind,
    pub size: usize,
    pub n_edges: usize,
    /// Flip grid; omitted means the operation's default grid.
    pub flip_counts: Option<Vec<FlipValue>>,
    /// Fractions of nonzero off-diagonal entries for contour sweeps.
    pub sparsity_grid: Option<Vec<f64>>,
    pub realizations: usize,
    pub base_seed: u64,
    /// Omitted means the task default.
    pub normalization_target: Option<f64>,
    pub spectral_mode: SpectralMode,
    pub input_kind: InputKind,
    pub ridge_k: f64,
    /// Keep every `stride`-th Lorenz sample when driving the reservoir.
    pub stride: usize,
    pub k_max: usize,
    /// Accept a symmetry-sweep base once log10 of its group order exceeds this.
    pub symmetry_threshold_log10: f64,
    /// Nodes that carry all zero entries of a symmetry-sweep base.
    pub defect_nodes: usize,
    /// Candidate bases tried before settling for the best found.
    pub search_budget: usize,
    pub reservoir: ReservoirOverrides,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        Self {
            task: Task::LorenzXz,
            node_kind: NodeKind::Polynomial,
            size: 100,
            n_edges: 9800,
            flip_counts: None,
            sparsity_grid: None,
            realizations: 20,
            base_seed: 1,
            normalization_target: None,
            spectral_mode: SpectralMode::MaxRealPart,
            input_kind: InputKind::Alternating,
            ridge_k: DEFAULT_RIDGE,
            stride: 1,
            k_max: DEFAULT_K_MAX,
            symmetry_threshold_log10: 40.0,
            defect_nodes: 58,
            search_budget: 200,
            reservoir: ReservoirOverrides::default(),
        }
    }
}

/// Which sweep a spec is being resolved for; fixes the default grid and
/// the parameter set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Operation {
    FlipSweep,
    SymmetrySweep,
    Contour,
    InputComparison,
    Memory,
}

/// A spec with every default materialized.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolvedSpec {
    pub operation: Operation,
    pub spec: ExperimentSpec,
    pub flips: Vec<FlipValue>,
    pub reservoir: ReservoirConfig,
    pub normalization_target: f64,
    pub notes: Vec<String>,
}

impl ExperimentSpec {
    pub fn from_toml(text: &str) -> Result<Self> {
        let spec: ExperimentSpec = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if self.size < 2 {
            return bad(format!("size={} must be at least 2", self.size));
        }
        let slots = self.size * (self.size - 1);
        if self.n_edges == 0 || self.n_edges > slots {
            return bad(format!("n_edges={} must lie in 1..={slots}", self.n_edges));
        }
        if self.realizations == 0 {
            return bad("realizations must be at least 1".into());
        }
        if let Some(flips) = &self.flip_counts {
            if flips.is_empty() {
                return bad("flip_counts is empty".into());
            }
            for f in flips {
                f.resolve(self.n_edges)?;
            }
        }
        if let Some(grid) = &self.sparsity_grid {
            if grid.is_empty() {
                return bad("sparsity_grid is empty".into());
            }
            if let Some(p) = grid.iter().find(|p| !(**p > 0.0 && **p <= 1.0)) {
                return bad(format!("sparsity {p} outside (0, 1]"));
            }
        }
        if let Some(t) = self.normalization_target {
            if !(t > 0.0 && t.is_finite()) {
                return bad(format!("normalization_target={t} must be positive"));
            }
        }
        if !(self.ridge_k > 0.0 && self.ridge_k.is_finite()) {
            return bad(format!("ridge_k={} must be positive", self.ridge_k));
        }
        if self.stride == 0 {
            return bad("stride must be at least 1".into());
        }
        if self.k_max == 0 {
            return bad("k_max must be at least 1".into());
        }
        if self.search_budget == 0 {
            return bad("search_budget must be at least 1".into());
        }
        Ok(())
    }

    /// Materialize defaults for `op`.
    pub fn resolve(&self, op: Operation) -> Result<ResolvedSpec> {
        self.validate()?;
        let mut notes = Vec::new();
        let params_task = if op == Operation::Memory { Task::Memory } else { self.task };
        if params_task == Task::InputVectorComparison {
            notes.push("input-vector comparison uses the lorenz_xz signals and parameters".into());
        }
        let signal_task = match params_task {
            Task::InputVectorComparison => Task::LorenzXz,
            t => t,
        };
        let (mut cfg, target) = match (signal_task, self.node_kind) {
            (Task::Memory, NodeKind::LeakyTanh) => (ReservoirConfig::leaky_tanh(0.66), 1.36),
            (Task::Memory, NodeKind::Linear) => (ReservoirConfig::linear(6.0), 0.5),
            (Task::Memory, NodeKind::Polynomial) => (ReservoirConfig::polynomial(6.0), 0.5),
            (Task::MapXy, NodeKind::LeakyTanh) => {
                notes.push("map_xy leaky_tanh parameters (alpha=0.35, target 1.0) carried over from lorenz_xz".into());
                (ReservoirConfig::leaky_tanh(0.35), 1.0)
            }
            (Task::MapXy, NodeKind::Linear) => (ReservoirConfig::linear(5.0), 0.5),
            (Task::MapXy, NodeKind::Polynomial) => (ReservoirConfig::polynomial(5.0), 0.5),
            (_, NodeKind::LeakyTanh) => (ReservoirConfig::leaky_tanh(0.35), 1.0),
            (_, NodeKind::Linear) => (ReservoirConfig::linear(1.4), 0.5),
            (_, NodeKind::Polynomial) => (ReservoirConfig::polynomial(1.4), 0.5),
        };
        cfg.size = self.size;
        self.reservoir.apply(&mut cfg);
        if cfg.node_kind == NodeKind::Linear {
            cfg.p2 = 0.0;
            cfg.p3 = 0.0;
        }
        cfg.validate()?;
        if op == Operation::Memory && self.k_max > cfg.transient {
            return Err(Error::InvalidParameter(format!("k_max={} exceeds transient={}", self.k_max, cfg.transient)));
        }
        if op == Operation::SymmetrySweep && self.defect_nodes > self.size {
            return Err(Error::InvalidParameter(format!("defect_nodes={} exceeds size", self.defect_nodes)));
        }
        if op == Operation::Contour && self.sparsity_grid.is_none() {
            return Err(Error::InvalidParameter("contour sweep needs a sparsity_grid".into()));
        }
        let flips = match (&self.flip_counts, op) {
            (Some(f), _) => f.clone(),
            (None, Operation::SymmetrySweep) => default_symmetry_counts(),
            (None, _) => default_fraction_grid(),
        };
        Ok(ResolvedSpec {
            operation: op,
            spec: self.clone(),
            flips,
            reservoir: cfg,
            normalization_target: self.normalization_target.unwrap_or(target),
            notes,
        })
    }
}
