//! Experiment configuration: parsing, defaults, pairing rules and the
//! canonical form used for hashing.

use std::path::PathBuf;

use arl::agents::{CurriculumParams, QParams};
use arl::envs::EnvSpec;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AgentKind {
    #[default]
    Naive,
    Oracle,
    Fbrl,
    Perturbation,
    Curriculum,
}

impl AgentKind {
    pub fn as_str(self) -> &'static str {
        match self {
            AgentKind::Naive => "naive",
            AgentKind::Oracle => "oracle",
            AgentKind::Fbrl => "fbrl",
            AgentKind::Perturbation => "perturbation",
            AgentKind::Curriculum => "curriculum",
        }
    }
}

/// Scalar type of the agent's tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Precision {
    #[default]
    F64,
    F32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AgentConfig {
    pub name: AgentKind,
    pub precision: Precision,
    #[serde(flatten)]
    pub q: QParams,
    /// Steps per phase for the alternating agents.
    pub switch_k: u64,
    pub curriculum: CurriculumParams,
    /// Replay capacity of the function-approximation baselines. Recorded for
    /// provenance only; tabular agents have no buffer.
    pub replay_capacity: Option<u64>,
}

impl Default for AgentConfig {
    fn default() -> Self {
        Self {
            name: AgentKind::Naive,
            precision: Precision::F64,
            q: QParams::default(),
            switch_k: 1000,
            curriculum: CurriculumParams::default(),
            replay_capacity: None,
        }
    }
}

/// Where a budgeted intervention puts the system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BudgetTarget {
    /// A fresh draw from the initial distribution.
    #[default]
    Initial,
    /// Environment-specific undo (peg: put the dropped peg back, released).
    Undo,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum WrapperConfig {
    None,
    /// `period = None` means the environment's autonomous horizon `H_T`
    /// (or `H_E` for the oracle agent).
    Periodic {
        #[serde(default)]
        period: Option<u64>,
    },
    Stochastic {
        epsilon: f64,
    },
    Budgeted {
        h_max: f64,
        /// Cost of one intervention.
        #[serde(default = "one")]
        cost: f64,
        #[serde(default)]
        target: BudgetTarget,
        /// Intervention actions the agent may request.
        #[serde(default = "one_usize")]
        request_actions: usize,
        /// Intervene automatically when the environment enters an
        /// irreversible state.
        #[serde(default = "yes")]
        forced: bool,
    },
}

fn one() -> f64 {
    1.0
}

fn one_usize() -> usize {
    1
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScheduleConfig {
    /// Training steps; `None` takes the environment default.
    pub h_max: Option<u64>,
    pub eval_every: u64,
    pub n_rollouts: usize,
    /// Evaluation horizon `H_E`; `None` takes the environment default.
    pub eval_horizon: Option<usize>,
    pub discounted: bool,
    pub gamma_eval: f64,
    /// Stride of the continuing-reward series; `None` uses `eval_every`.
    pub continuing_stride: Option<u64>,
    /// Rollouts per start distribution in the final robustness check.
    pub robustness_rollouts: usize,
}

impl Default for ScheduleConfig {
    fn default() -> Self {
        Self {
            h_max: None,
            eval_every: 10_000,
            n_rollouts: 10,
            eval_horizon: None,
            discounted: false,
            gamma_eval: 0.99,
            continuing_stride: None,
            robustness_rollouts: 100,
        }
    }
}

impl ScheduleConfig {
    pub fn h_max(&self) -> u64 {
        self.h_max.unwrap_or(0)
    }

    pub fn eval_horizon(&self) -> usize {
        self.eval_horizon.unwrap_or(0)
    }

    pub fn eval_schedule(&self) -> arl::eval::EvalSchedule {
        arl::eval::EvalSchedule {
            eval_every: self.eval_every,
            n_rollouts: self.n_rollouts,
            eval_horizon: self.eval_horizon(),
            discounted: self.discounted,
            gamma_eval: self.gamma_eval,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct DemoConfig {
    /// JSON demo file; exclusive with the generation counts.
    pub path: Option<PathBuf>,
    pub forward: usize,
    pub backward: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub env: EnvSpec,
    #[serde(default = "unset_wrapper")]
    pub wrapper: Option<WrapperConfig>,
    #[serde(default)]
    pub agent: AgentConfig,
    #[serde(default)]
    pub schedule: ScheduleConfig,
    #[serde(default)]
    pub demos: DemoConfig,
    pub seed: u64,
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
    /// Condition label used in place of the agent name in metric files.
    #[serde(default)]
    pub label: Option<String>,
}

fn unset_wrapper() -> Option<WrapperConfig> {
    None
}

impl ExperimentConfig {
    /// Algorithm column of every metric row.
    pub fn algorithm_label(&self) -> String {
        self.label
            .clone()
            .unwrap_or_else(|| self.agent.name.as_str().to_string())
    }

    pub fn wrapper(&self) -> &WrapperConfig {
        self.wrapper.as_ref().unwrap_or(&WrapperConfig::None)
    }

    /// Canonical JSON: every default filled, keys sorted.
    pub fn canonical_json(&self) -> String {
        serde_json::to_value(self)
            .expect("config serialises")
            .to_string()
    }

    /// SHA-256 of the canonical form; insensitive to key order in the input.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.canonical_json().as_bytes()))
    }

    pub fn run_id(&self) -> String {
        format!(
            "{}-{}-s{}-{}",
            self.env.name(),
            self.algorithm_label().replace(['/', ' '], "_"),
            self.seed,
            &self.hash()[..10]
        )
    }

    /// Fills environment-dependent defaults and checks every rule.
    pub fn normalize(mut self) -> Result<Self> {
        self.env = self.env.normalized()?;
        let s = &mut self.schedule;
        s.h_max.get_or_insert(self.env.default_train_horizon());
        s.eval_horizon.get_or_insert(self.env.eval_horizon());
        s.continuing_stride.get_or_insert(s.eval_every);
        if s.eval_every == 0
            || s.n_rollouts == 0
            || s.eval_horizon() == 0
            || s.continuing_stride == Some(0)
        {
            return Err(HarnessError::config("schedule fields eval_every, n_rollouts, eval_horizon and continuing_stride must be positive"));
        }
        if s.robustness_rollouts == 0 {
            return Err(HarnessError::config(
                "schedule.robustness_rollouts must be positive",
            ));
        }
        s.eval_schedule().validate()?;
        let h_e = s.eval_horizon() as u64;

        let oracle = self.agent.name == AgentKind::Oracle;
        let wrapper = self
            .wrapper
            .get_or_insert(WrapperConfig::Periodic { period: None });
        if let WrapperConfig::Periodic { period } = wrapper {
            let p = *period.get_or_insert(if oracle {
                h_e
            } else {
                self.env.default_train_horizon()
            });
            if p == 0 {
                return Err(HarnessError::config("wrapper.period must be at least 1"));
            }
        }
        match wrapper {
            WrapperConfig::Stochastic { epsilon } if !(0.0..=1.0).contains(epsilon) => {
                return Err(HarnessError::config(format!(
                    "wrapper.epsilon {epsilon} outside [0, 1]"
                )));
            }
            WrapperConfig::Budgeted { h_max, cost, .. }
                if !(*h_max > 0.0 && h_max.is_finite() && *cost >= 0.0) =>
            {
                return Err(HarnessError::config(
                    "wrapper.h_max must be positive and cost non-negative",
                ));
            }
            WrapperConfig::Budgeted {
                target: BudgetTarget::Undo,
                ..
            } if !matches!(self.env, EnvSpec::Peg(_)) => {
                return Err(HarnessError::config(
                    "wrapper.target = undo is only defined for the peg environment",
                ));
            }
            _ => {}
        }

        // Pairing rules.
        if oracle && *wrapper != (WrapperConfig::Periodic { period: Some(h_e) }) {
            return Err(HarnessError::config(format!(
                "pairing rule violated: oracle requires wrapper periodic(H_E = {h_e})"
            )));
        }
        if self.agent.name == AgentKind::Curriculum && !self.env.is_goal_conditioned() {
            return Err(HarnessError::config(format!(
                "pairing rule violated: curriculum requires a goal-conditioned environment, got {}",
                self.env.name()
            )));
        }
        if matches!(self.agent.name, AgentKind::Fbrl | AgentKind::Perturbation)
            && self.agent.switch_k == 0
        {
            return Err(HarnessError::config("agent.switch_k must be at least 1"));
        }
        self.agent.q.validate()?;
        if self.demos.path.is_some() && (self.demos.forward > 0 || self.demos.backward > 0) {
            return Err(HarnessError::config(
                "demos.path and demos.forward/backward are exclusive",
            ));
        }
        Ok(self)
    }
}

/// Expands the string shorthands `"env": "door"`, `"agent": "fbrl"` and
/// `"wrapper": "none"`.
fn expand_shorthands(v: &mut Value) {
    let Some(obj) = v.as_object_mut() else { return };
    for (key, tag) in [("env", "name"), ("agent", "name"), ("wrapper", "mode")] {
        if let Some(Value::String(s)) = obj.get(key) {
            let mut m = Map::new();
            m.insert(tag.to_string(), Value::String(s.clone()));
            obj.insert(key.to_string(), Value::Object(m));
        }
    }
}

/// Dotted paths of every key present in `input` but absent from `canonical`.
fn unknown_keys(input: &Value, canonical: &Value, prefix: &str, out: &mut Vec<String>) {
    let (Value::Object(a), Value::Object(b)) = (input, canonical) else {
        return;
    };
    for (k, v) in a {
        let path = if prefix.is_empty() {
            k.clone()
        } else {
            format!("{prefix}.{k}")
        };
        match b.get(k) {
            None => out.push(path),
            Some(c) => unknown_keys(v, c, &path, out),
        }
    }
}

/// Parses, fills defaults and validates a JSON experiment config.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let mut raw: Value = serde_json::from_str(text).map_err(|e| HarnessError::json("config", e))?;
    if !raw.is_object() {
        return Err(HarnessError::config("config must be a JSON object"));
    }
    expand_shorthands(&mut raw);
    if let Some(env) = raw.get("env").and_then(Value::as_object) {
        if let Some(name) = env.get("name").and_then(Value::as_str) {
            // Rejects unknown names with the list of valid ones.
            EnvSpec::default_for(name)?;
        }
    }
    let cfg: ExperimentConfig =
        serde_json::from_value(raw.clone()).map_err(|e| HarnessError::json("config", e))?;
    let cfg = cfg.normalize()?;
    let canonical = serde_json::to_value(&cfg).expect("config serialises");
    let mut unknown = Vec::new();
    unknown_keys(&raw, &canonical, "", &mut unknown);
    if !unknown.is_empty() {
        return Err(HarnessError::config(format!(
            "unknown keys: {}",
            unknown.join(", ")
        )));
    }
    Ok(cfg)
}
