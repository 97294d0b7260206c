//! Versioned JSON scenario files.

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::SimError;
use crate::graph::{Topology, TopologyKind};
use crate::mission::{DesiredTrajectory, PhysicalBounds, Segment, TrajectoryKind};
use crate::mpc::{AlphaParams, CostVariant, MpcConfig, SolverOptions, Weights};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub schema: u32,
    #[serde(default)]
    pub name: String,
    pub n_agents: usize,
    pub topology: TopologyKind,
    /// At least `n_agents` entries; extra entries are ignored.
    pub trajectories: Vec<TrajectorySpec>,
    pub bounds: BoundsSpec,
    pub mpc: MpcSpec,
    #[serde(default)]
    pub cost: CostSpec,
    pub initial: InitialSpec,
    /// Mission length in seconds.
    pub duration: f64,
    #[serde(default)]
    pub disturbance: DisturbanceSpec,
    #[serde(default)]
    pub link_drop_probability: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_epsilon")]
    pub consensus_epsilon: f64,
    #[serde(default)]
    pub corridor: Option<CorridorSpec>,
}

fn default_epsilon() -> f64 {
    0.01
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TrajectorySpec {
    Circle {
        center: [f64; 3],
        radius: f64,
        omega: f64,
        #[serde(default)]
        phase: f64,
        #[serde(default)]
        z_amplitude: f64,
        #[serde(default)]
        z_omega: f64,
        duration: f64,
    },
    Line {
        start: [f64; 3],
        end: [f64; 3],
        duration: f64,
    },
    Composite {
        segments: Vec<SegmentSpec>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SegmentSpec {
    pub start: [f64; 3],
    pub end: [f64; 3],
    pub duration: f64,
}

impl TrajectorySpec {
    pub fn build(&self) -> Result<DesiredTrajectory<f64>, SimError> {
        let v = |p: &[f64; 3]| Vector3::new(p[0], p[1], p[2]);
        let t = match self {
            TrajectorySpec::Circle {
                center,
                radius,
                omega,
                phase,
                z_amplitude,
                z_omega,
                duration,
            } => DesiredTrajectory::new(
                TrajectoryKind::Circle {
                    center: v(center),
                    radius: *radius,
                    omega: *omega,
                    phase: *phase,
                    z_amplitude: *z_amplitude,
                    z_omega: *z_omega,
                },
                *duration,
            ),
            TrajectorySpec::Line { start, end, duration } => DesiredTrajectory::line(v(start), v(end), *duration),
            TrajectorySpec::Composite { segments } => DesiredTrajectory::composite(
                segments
                    .iter()
                    .map(|s| Segment {
                        start: v(&s.start),
                        end: v(&s.end),
                        duration: s.duration,
                    })
                    .collect(),
            ),
        };
        Ok(t?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsSpec {
    pub v_min: f64,
    pub v_max: f64,
    pub a_max: f64,
    pub v_d_min: f64,
    pub v_d_max: f64,
    pub a_d_max: f64,
}

impl From<BoundsSpec> for PhysicalBounds<f64> {
    fn from(b: BoundsSpec) -> Self {
        PhysicalBounds {
            v_min: b.v_min,
            v_max: b.v_max,
            a_max: b.a_max,
            v_d_min: b.v_d_min,
            v_d_max: b.v_d_max,
            a_d_max: b.a_d_max,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MpcSpec {
    /// `[w₁, w₂, w₃]`: coordination, pace, effort.
    pub weights: [f64; 3],
    pub horizon: usize,
    pub step: f64,
    #[serde(default)]
    pub alpha: AlphaSpec,
    #[serde(default)]
    pub normalize_corridor: bool,
    #[serde(default)]
    pub tie_tolerance: f64,
    #[serde(default)]
    pub solver: SolverSpec,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlphaSpec {
    pub beta: f64,
    pub delta_reg: f64,
}

impl Default for AlphaSpec {
    fn default() -> Self {
        Self {
            beta: 1.0,
            delta_reg: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSpec {
    pub kkt_tolerance: f64,
    pub feasibility_tolerance: f64,
    pub max_iterations: Option<usize>,
    pub pattern_iterations: usize,
}

impl Default for SolverSpec {
    fn default() -> Self {
        let d = SolverOptions::<f64>::default();
        Self {
            kkt_tolerance: d.kkt_tolerance,
            feasibility_tolerance: d.feasibility_tolerance,
            max_iterations: d.max_iterations,
            pattern_iterations: d.pattern_iterations,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case", deny_unknown_fields)]
pub enum CostSpec {
    #[default]
    Consensus,
    /// Pre-assigned order: agent `i` is kept `(j − i)·separation` from `j`.
    Ordered { separation: f64, gamma1: f64, gamma2: f64 },
    /// Passage decided by the agents themselves; `psi` breaks ties.
    Race { psi: Vec<f64>, gamma1: f64, gamma2: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSpec {
    pub gamma: Vec<f64>,
    /// Defaults to the nominal pace `1` for every agent.
    #[serde(default)]
    pub gamma_rate: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DisturbanceSpec {
    #[default]
    None,
    /// `α_i^k = d·e^{−νkh}·s` with `s` uniform in `[−1, 1]`.
    Synthetic { d: f64, nu: f64 },
    /// Tracking error decaying at rate `ν`, kicked by scheduled impulses.
    KinematicTracker {
        nu: f64,
        #[serde(default)]
        impulses: Vec<Impulse>,
    },
}

/// Tracking-error kick applied at `step` to `agent`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Impulse {
    pub step: u64,
    pub agent: usize,
    /// Offset in world coordinates.
    #[serde(default)]
    pub offset: Option<[f64; 3]>,
    /// Offset along the reference direction of motion; positive is ahead.
    #[serde(default)]
    pub along_track: Option<f64>,
}

/// Shared corridor of a passage-order scenario, in virtual time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorridorSpec {
    pub entry: f64,
    pub exit: f64,
    /// Minimum safe spatial distance `E`.
    pub separation: f64,
}

impl Scenario {
    pub fn from_json_str(s: &str) -> Result<Self, SimError> {
        let value: Value = serde_json::from_str(s).map_err(|e| SimError::Schema(e.to_string()))?;
        Self::from_value(value)
    }

    /// Parses after applying dotted-path overrides such as `mpc.horizon=5`.
    pub fn from_json_str_with(s: &str, overrides: &[String]) -> Result<Self, SimError> {
        let mut value: Value = serde_json::from_str(s).map_err(|e| SimError::Schema(e.to_string()))?;
        for o in overrides {
            apply_override(&mut value, o)?;
        }
        Self::from_value(value)
    }

    pub fn from_value(value: Value) -> Result<Self, SimError> {
        let sc: Scenario = serde_json::from_value(value).map_err(|e| SimError::Schema(e.to_string()))?;
        sc.validate()?;
        Ok(sc)
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    pub fn steps(&self) -> u64 {
        (self.duration / self.mpc.step).round() as u64
    }

    pub fn initial_gamma(&self) -> &[f64] {
        &self.initial.gamma[..self.n_agents]
    }

    pub fn initial_rate(&self) -> Vec<f64> {
        match &self.initial.gamma_rate {
            Some(r) => r[..self.n_agents].to_vec(),
            None => vec![1.0; self.n_agents],
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let field = |name: &str, msg: String| Err(SimError::Field(name.to_string(), msg));
        if self.schema != SCHEMA_VERSION {
            return field(
                "schema",
                format!("unsupported version {}, expected {SCHEMA_VERSION}", self.schema),
            );
        }
        let n = self.n_agents;
        if n < 1 {
            return field("n_agents", "at least one agent is required".into());
        }
        if self.trajectories.len() < n {
            return field(
                "trajectories",
                format!("{} entries for {n} agents", self.trajectories.len()),
            );
        }
        if self.initial.gamma.len() < n {
            return field(
                "initial.gamma",
                format!("{} entries for {n} agents", self.initial.gamma.len()),
            );
        }
        if let Some(r) = &self.initial.gamma_rate {
            if r.len() < n {
                return field("initial.gamma_rate", format!("{} entries for {n} agents", r.len()));
            }
        }
        if let Some(g) = self.initial_gamma().iter().find(|g| !(**g >= 0.0)) {
            return field("initial.gamma", format!("entries must be nonnegative, got {g}"));
        }
        if !(self.mpc.step > 0.0) {
            return field("mpc.step", format!("must be positive, got {}", self.mpc.step));
        }
        if !(self.duration > 0.0) {
            return field("duration", format!("must be positive, got {}", self.duration));
        }
        let ratio = self.duration / self.mpc.step;
        if (ratio - ratio.round()).abs() * self.mpc.step > 1e-9 {
            return field(
                "duration",
                format!("{} is not a multiple of the step {}", self.duration, self.mpc.step),
            );
        }
        if !(0.0..=1.0).contains(&self.link_drop_probability) {
            return field(
                "link_drop_probability",
                format!("{} not in [0, 1]", self.link_drop_probability),
            );
        }
        if !(self.consensus_epsilon > 0.0) {
            return field("consensus_epsilon", "must be positive".into());
        }
        if let CostSpec::Race { psi, .. } = &self.cost {
            if psi.len() < n {
                return field("cost.psi", format!("{} entries for {n} agents", psi.len()));
            }
        }
        match &self.disturbance {
            DisturbanceSpec::None => {}
            DisturbanceSpec::Synthetic { d, nu } => {
                if !(*d >= 0.0) || !(*nu > 0.0) {
                    return field("disturbance", format!("need d >= 0 and nu > 0, got d={d}, nu={nu}"));
                }
            }
            DisturbanceSpec::KinematicTracker { nu, impulses } => {
                if !(*nu > 0.0) {
                    return field("disturbance.nu", format!("must be positive, got {nu}"));
                }
                if let Some(i) = impulses.iter().find(|i| i.agent >= n) {
                    return field("disturbance.impulses", format!("agent {} out of range", i.agent));
                }
            }
        }
        self.topology()?;
        self.mpc_config()?;
        for (i, t) in self.trajectories.iter().take(n).enumerate() {
            t.build()
                .map_err(|e| SimError::Field(format!("trajectories[{i}]"), e.to_string()))?;
        }
        Ok(())
    }

    /// Graph over the first `n_agents` agents. A single agent gets an empty
    /// graph.
    pub fn topology(&self) -> Result<Topology, SimError> {
        if self.n_agents == 1 {
            return Ok(Topology::empty(1));
        }
        Topology::build(self.n_agents, &self.topology).map_err(|e| SimError::Field("topology".into(), e.to_string()))
    }

    pub fn mpc_config(&self) -> Result<MpcConfig<f64>, SimError> {
        let m = &self.mpc;
        let gamma_bounds = PhysicalBounds::from(self.bounds)
            .derive_gamma_bounds()
            .map_err(|e| SimError::Field("bounds".into(), e.to_string()))?;
        let cost = match &self.cost {
            CostSpec::Consensus => CostVariant::Consensus,
            CostSpec::Ordered {
                separation,
                gamma1,
                gamma2,
            } => CostVariant::OrderedSeparation {
                separation: *separation,
                gamma_start: *gamma1,
                gamma_end: *gamma2,
            },
            CostSpec::Race { psi, gamma1, gamma2 } => CostVariant::Race {
                priorities: psi[..self.n_agents.min(psi.len())].to_vec(),
                gamma_start: *gamma1,
                gamma_end: *gamma2,
            },
        };
        let cfg = MpcConfig {
            weights: Weights::new(m.weights[0], m.weights[1], m.weights[2]),
            horizon: m.horizon,
            step: m.step,
            gamma_bounds,
            alpha: AlphaParams {
                beta: m.alpha.beta,
                regularizer: m.alpha.delta_reg,
            },
            cost,
            normalize_corridor: m.normalize_corridor,
            tie_tolerance: m.tie_tolerance,
            solver: SolverOptions {
                kkt_tolerance: m.solver.kkt_tolerance,
                feasibility_tolerance: m.solver.feasibility_tolerance,
                max_iterations: m.solver.max_iterations,
                pattern_iterations: m.solver.pattern_iterations,
            },
        };
        cfg.validate()
            .map_err(|e| SimError::Field("mpc".into(), e.to_string()))?;
        Ok(cfg)
    }

    pub fn desired_trajectories(&self) -> Result<Vec<DesiredTrajectory<f64>>, SimError> {
        self.trajectories
            .iter()
            .take(self.n_agents)
            .map(TrajectorySpec::build)
            .collect()
    }

    /// Copy restricted to the first `n` agents.
    pub fn truncated(&self, n: usize) -> Result<Self, SimError> {
        let mut s = self.clone();
        s.n_agents = n;
        if let TopologyKind::Custom { edges } = &s.topology {
            if edges.iter().any(|&(a, b)| a.max(b) >= n) {
                return Err(SimError::Field(
                    "topology".into(),
                    format!("custom edges reference agents beyond {n}"),
                ));
            }
        }
        s.validate()?;
        Ok(s)
    }
}

/// Sets `path` (dot-separated keys or array indices) to the JSON value of
/// the right-hand side, falling back to a string when it does not parse.
pub fn apply_override(root: &mut Value, assignment: &str) -> Result<(), SimError> {
    let (path, raw) = assignment
        .split_once('=')
        .ok_or_else(|| SimError::Override(format!("expected key=value, got `{assignment}`")))?;
    let value: Value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let mut cur = root;
    let keys: Vec<&str> = path.split('.').collect();
    for (depth, key) in keys.iter().enumerate() {
        let last = depth + 1 == keys.len();
        cur = match cur {
            Value::Object(map) => {
                if last {
                    map.insert((*key).to_string(), value);
                    return Ok(());
                }
                map.entry((*key).to_string())
                    .or_insert_with(|| Value::Object(Default::default()))
            }
            Value::Array(items) => {
                let idx: usize = key
                    .parse()
                    .map_err(|_| SimError::Override(format!("`{key}` is not an array index in `{path}`")))?;
                let len = items.len();
                let slot = items
                    .get_mut(idx)
                    .ok_or_else(|| SimError::Override(format!("index {idx} out of range ({len}) in `{path}`")))?;
                if last {
                    *slot = value;
                    return Ok(());
                }
                slot
            }
            _ => {
                return Err(SimError::Override(format!(
                    "`{path}` descends into a scalar at `{key}`"
                )))
            }
        };
    }
    Err(SimError::Override(format!("empty path in `{assignment}`")))
}
