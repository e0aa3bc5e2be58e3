//! One training run: build env, wrapper and agent, train with interleaved
//! evaluation, then persist every artifact alongside a manifest.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use arl::agents::{
    ingest_demos, make_curriculum_lite, make_fbrl, make_naive, make_oracle, make_perturbation,
    Agent, EnvInfo, TableSnapshot,
};
use arl::envs::{
    make_diagnostic, make_door, make_peg, make_pennav, make_tabletop, scripted_demos, DemoSet,
    EnvSpec,
};
use arl::eval::{
    deployed_regret, evaluate, robustness_eval, BinSpec, ContinuingTracker, EvalSchedule,
    MetricSeries, RobustnessReport, RunLabel, StartDistribution, VisitationHistogram,
    DEPLOYED_RETURN, DEPLOYED_SUCCESS,
};
use arl::mdp::{
    run_nonepisodic, wrap_budgeted_intervention, wrap_periodic_intervention,
    wrap_stochastic_intervention, Action, CostFn, Environment, Observer, TargetFn,
    TransitionRecord, TriggerFn,
};
use arl::rng::{stream, Prng, Stream, Streams};
use arl::Scalar;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::{AgentKind, BudgetTarget, ExperimentConfig, Precision, WrapperConfig};
use crate::error::{HarnessError, Result};

pub const CODE_VERSION: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));

pub const METRICS_FILE: &str = "metrics.csv";
pub const SUMMARY_FILE: &str = "summary.json";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const CONFIG_FILE: &str = "config.json";
pub const VISITATION_FILE: &str = "visitation.csv";
pub const VISITATION_SIDECAR: &str = "visitation.json";

/// Switches that change what a run records, never what it learns.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunOptions {
    /// Run the periodic deployed evaluations.
    pub evaluations: bool,
    /// Keep the full training history in the output.
    pub keep_history: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            evaluations: true,
            keep_history: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub run_id: String,
    pub seed: u64,
    pub algorithm: String,
    pub env: String,
    pub h_max: u64,
    /// `J_D` of the last evaluated policy.
    pub final_deployed_return: Option<f64>,
    pub final_deployed_success: Option<f64>,
    /// Average reward over the whole lifetime, `r(H_max)`.
    pub lifetime_avg_reward: Option<f64>,
    /// Comparison-only regret `-sum_t J_t` over the evaluation grid.
    pub deployed_regret: f64,
    pub interventions: u64,
    /// Default vs uniform start of the final policy, when supported.
    pub robustness: Option<RobustnessReport>,
}

/// Everything a run produced, in memory.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub config: ExperimentConfig,
    pub run_id: String,
    pub env_hash: String,
    pub series: Vec<MetricSeries>,
    pub summary: RunSummary,
    pub visitation: Option<VisitationHistogram>,
    pub tables: Vec<TableSnapshot>,
    pub history: Option<Vec<TransitionRecord>>,
}

impl RunOutput {
    pub fn series(&self, metric: &str) -> Option<&MetricSeries> {
        self.series.iter().find(|s| s.metric == metric)
    }

    pub fn label(&self) -> RunLabel {
        RunLabel {
            run_id: self.run_id.clone(),
            seed: self.config.seed,
            algorithm: self.config.algorithm_label(),
            env: self.config.env.name().to_string(),
        }
    }

    pub fn metrics_csv(&self) -> Vec<u8> {
        let mut out = Vec::new();
        let refs: Vec<&MetricSeries> = self.series.iter().collect();
        arl::eval::write_metrics_csv(&mut out, &self.label(), &refs).expect("writing to memory");
        out
    }

    /// Every file of the run as `(name, bytes)`, manifest excluded.
    pub fn files(&self) -> Vec<(String, Vec<u8>)> {
        let mut files = vec![
            (CONFIG_FILE.to_string(), pretty(&self.config)),
            (METRICS_FILE.to_string(), self.metrics_csv()),
            (SUMMARY_FILE.to_string(), pretty(&self.summary)),
        ];
        let step = self.summary.h_max;
        for t in &self.tables {
            let mut csv = Vec::new();
            t.write_csv(&mut csv).expect("writing to memory");
            files.push((format!("table_{}.csv", t.name), csv));
            files.push((
                format!("table_{}.json", t.name),
                pretty(&t.header(&self.env_hash, step)),
            ));
        }
        if let Some(h) = &self.visitation {
            let mut csv = Vec::new();
            h.write_csv(&mut csv).expect("writing to memory");
            files.push((VISITATION_FILE.to_string(), csv));
            files.push((VISITATION_SIDECAR.to_string(), pretty(&h.sidecar())));
        }
        files
    }
}

fn pretty<T: Serialize>(v: &T) -> Vec<u8> {
    let mut s = serde_json::to_vec_pretty(v).expect("serialisable");
    s.push(b'\n');
    s
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileEntry {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StreamSeeds {
    pub master: u64,
    pub env: u64,
    pub agent: u64,
    pub eval: u64,
    pub demos: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunManifest {
    pub run_id: String,
    pub config_hash: String,
    pub env_hash: String,
    pub code_version: String,
    /// Master seed and the ChaCha stream id of each consumer.
    pub streams: StreamSeeds,
    pub start_step: u64,
    pub end_step: u64,
    pub files: Vec<FileEntry>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Writes every artifact of `out` into `dir` and returns the manifest, which
/// is written last as `manifest.json`.
pub fn persist(out: &RunOutput, dir: &Path) -> Result<RunManifest> {
    fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    let mut files = Vec::new();
    for (name, bytes) in out.files() {
        let path = dir.join(&name);
        fs::write(&path, &bytes).map_err(|e| HarnessError::io(&path, e))?;
        files.push(FileEntry {
            path: name,
            sha256: sha256_hex(&bytes),
            bytes: bytes.len() as u64,
        });
    }
    let seed = out.config.seed;
    let manifest = RunManifest {
        run_id: out.run_id.clone(),
        config_hash: out.config.hash(),
        env_hash: out.env_hash.clone(),
        code_version: CODE_VERSION.to_string(),
        streams: StreamSeeds {
            master: seed,
            env: Stream::Env as u64,
            agent: Stream::Agent as u64,
            eval: Stream::Eval as u64,
            demos: Stream::Demos as u64,
        },
        start_step: 0,
        end_step: out.summary.h_max,
        files,
    };
    let path = dir.join(MANIFEST_FILE);
    fs::write(&path, pretty(&manifest)).map_err(|e| HarnessError::io(&path, e))?;
    Ok(manifest)
}

/// Checks that every listed file exists with the recorded hash and that no
/// unlisted file sits next to the manifest.
pub fn verify_manifest(dir: &Path) -> Result<RunManifest> {
    let path = dir.join(MANIFEST_FILE);
    let text = fs::read_to_string(&path).map_err(|e| HarnessError::io(&path, e))?;
    let manifest: RunManifest = serde_json::from_str(&text)
        .map_err(|e| HarnessError::json(path.display().to_string(), e))?;
    let mut listed = BTreeSet::new();
    for f in &manifest.files {
        let p = dir.join(&f.path);
        let bytes =
            fs::read(&p).map_err(|e| HarnessError::Manifest(format!("{}: {e}", p.display())))?;
        if sha256_hex(&bytes) != f.sha256 {
            return Err(HarnessError::Manifest(format!(
                "{} hash differs from manifest",
                p.display()
            )));
        }
        listed.insert(f.path.clone());
    }
    for entry in fs::read_dir(dir).map_err(|e| HarnessError::io(dir, e))? {
        let name = entry
            .map_err(|e| HarnessError::io(dir, e))?
            .file_name()
            .to_string_lossy()
            .into_owned();
        if name != MANIFEST_FILE && !listed.contains(&name) {
            return Err(HarnessError::Manifest(format!(
                "{name} is not listed in the manifest"
            )));
        }
    }
    Ok(manifest)
}

/// Default output root: `$ARL_OUT_DIR`, else `runs`.
pub fn default_out_root() -> PathBuf {
    std::env::var_os("ARL_OUT_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("runs"))
}

/// Trains, evaluates and writes the run under `out_root/<run_id>`
/// (`out_root` falls back to the config's `out_dir`, then the default root).
pub fn run_experiment(
    cfg: &ExperimentConfig,
    out_root: Option<&Path>,
) -> Result<(RunOutput, RunManifest)> {
    let out = execute(cfg)?;
    let root = out_root
        .map(Path::to_path_buf)
        .or_else(|| cfg.out_dir.clone())
        .unwrap_or_else(default_out_root);
    let manifest = persist(&out, &root.join(&out.run_id)).map_err(|e| e.in_run(&out.run_id))?;
    Ok((out, manifest))
}

/// Runs `cfg` in memory with default options.
pub fn execute(cfg: &ExperimentConfig) -> Result<RunOutput> {
    execute_with(cfg, RunOptions::default())
}

/// Environment-specific hooks for the budgeted wrapper.
struct Hooks<S> {
    trigger: Option<TriggerFn<S>>,
    undo: Option<TargetFn<S>>,
}

impl<S> Hooks<S> {
    fn none() -> Self {
        Self {
            trigger: None,
            undo: None,
        }
    }
}

pub fn execute_with(cfg: &ExperimentConfig, opts: RunOptions) -> Result<RunOutput> {
    let cfg = cfg.clone().normalize()?;
    let run_id = cfg.run_id();
    let res = match &cfg.env {
        EnvSpec::Tabletop(s) => with_wrapper(make_tabletop(s.clone())?, &cfg, opts, Hooks::none()),
        EnvSpec::Door(s) => with_wrapper(make_door(s.clone())?, &cfg, opts, Hooks::none()),
        EnvSpec::Peg(s) => {
            let env = make_peg(s.clone())?;
            let hooks = Hooks {
                trigger: Some(env.drop_trigger()),
                undo: Some(env.release_target()),
            };
            with_wrapper(env, &cfg, opts, hooks)
        }
        EnvSpec::Pennav(s) => with_wrapper(make_pennav(s.clone())?, &cfg, opts, Hooks::none()),
        EnvSpec::Corridor(s) | EnvSpec::GoalChain(s) => {
            with_wrapper(make_diagnostic(s.clone())?, &cfg, opts, Hooks::none())
        }
    };
    res.map_err(|e| e.in_run(&run_id))
}

fn with_wrapper<E: Environment + 'static>(
    base: E,
    cfg: &ExperimentConfig,
    opts: RunOptions,
    hooks: Hooks<E::State>,
) -> Result<RunOutput> {
    match cfg.wrapper() {
        WrapperConfig::None => train(&base, &base, cfg, opts),
        WrapperConfig::Periodic { period } => {
            let p =
                period.ok_or_else(|| HarnessError::config("periodic wrapper without a period"))?;
            train(
                &base,
                &wrap_periodic_intervention(base.clone(), p)?,
                cfg,
                opts,
            )
        }
        WrapperConfig::Stochastic { epsilon } => train(
            &base,
            &wrap_stochastic_intervention(base.clone(), *epsilon)?,
            cfg,
            opts,
        ),
        WrapperConfig::Budgeted {
            h_max,
            cost,
            target,
            request_actions,
            forced,
        } => {
            let c = *cost;
            let cost: CostFn<E::State> = Arc::new(move |_: &E::State, _: Action| c);
            let target =
                match target {
                    BudgetTarget::Initial => None,
                    BudgetTarget::Undo => Some(hooks.undo.ok_or_else(|| {
                        HarnessError::config("this environment has no undo target")
                    })?),
                };
            let trigger = if *forced { hooks.trigger } else { None };
            let env = wrap_budgeted_intervention(base.clone(), *h_max, cost, target, trigger)?
                .with_request_actions(*request_actions);
            train(&base, &env, cfg, opts)
        }
    }
}

fn build_agent<F: Scalar + 'static>(
    cfg: &ExperimentConfig,
    info: &EnvInfo,
) -> Result<Box<dyn Agent>> {
    let q = cfg.agent.q;
    Ok(match cfg.agent.name {
        AgentKind::Naive => Box::new(make_naive::<F>(info, q)?),
        AgentKind::Oracle => Box::new(make_oracle::<F>(
            info,
            q,
            Some(cfg.schedule.eval_horizon() as u64),
        )?),
        AgentKind::Fbrl => Box::new(make_fbrl::<F>(info, q, cfg.agent.switch_k, None)?),
        AgentKind::Perturbation => Box::new(make_perturbation::<F>(info, q, cfg.agent.switch_k)?),
        AgentKind::Curriculum => {
            Box::new(make_curriculum_lite::<F>(info, q, cfg.agent.curriculum)?)
        }
    })
}

fn load_demos(cfg: &ExperimentConfig) -> Result<DemoSet> {
    let d = &cfg.demos;
    if let Some(path) = &d.path {
        let text = fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        return serde_json::from_str(&text)
            .map_err(|e| HarnessError::json(path.display().to_string(), e));
    }
    let mut rng = stream(cfg.seed, Stream::Demos);
    Ok(scripted_demos(&cfg.env, d.forward, d.backward, &mut rng)?)
}

/// One bin per distinct coordinate value on each axis of the state projection.
pub fn bins_for<E: Environment>(env: &E) -> Option<BinSpec> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for i in 0..env.state_count() {
        if let Some(p) = env.state_at(i).and_then(|s| env.coords(&s)) {
            xs.push(p[0]);
            ys.push(p[1]);
        }
    }
    let axis = |v: &mut Vec<f64>| -> Option<(f64, f64, usize)> {
        v.sort_by(f64::total_cmp);
        v.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
        let (lo, hi, n) = (*v.first()?, *v.last()?, v.len());
        let half = if n > 1 {
            (hi - lo) / (n - 1) as f64 / 2.0
        } else {
            0.5
        };
        Some((lo - half, hi + half, n))
    };
    let (x_min, x_max, nx) = axis(&mut xs)?;
    let (y_min, y_max, ny) = axis(&mut ys)?;
    Some(BinSpec {
        x_min,
        x_max,
        y_min,
        y_max,
        nx,
        ny,
    })
}

/// Training-time observer: evaluation cadence, continuing series and
/// visitation. Evaluations read the agent but never feed it.
struct Recorder<'a, E: Environment> {
    eval_env: &'a E,
    sched: EvalSchedule,
    rng: Prng,
    evaluations: bool,
    deployed_return: MetricSeries,
    deployed_success: MetricSeries,
    continuing: ContinuingTracker,
    visitation: Option<VisitationHistogram>,
    interventions: u64,
}

impl<E: Environment> Observer for Recorder<'_, E> {
    fn on_step(&mut self, r: &TransitionRecord, agent: &dyn Agent) -> arl::Result<()> {
        self.continuing.push(r.reward)?;
        self.interventions += r.intervention as u64;
        if let Some(h) = &mut self.visitation {
            h.add(
                self.eval_env
                    .state_at(r.next_state)
                    .and_then(|s| self.eval_env.coords(&s)),
            );
        }
        let h = r.t + 1;
        if self.evaluations && h.is_multiple_of(self.sched.eval_every) {
            let policy = agent.eval_policy();
            let out = evaluate(
                &*policy,
                self.eval_env,
                &self.sched,
                StartDistribution::Default,
                &mut self.rng,
            )?;
            self.deployed_return.push(h, out.mean_return)?;
            self.deployed_success.push(h, out.success_rate)?;
        }
        Ok(())
    }
}

fn train<E: Environment + 'static, W: Environment>(
    base: &E,
    env: &W,
    cfg: &ExperimentConfig,
    opts: RunOptions,
) -> Result<RunOutput> {
    let info = EnvInfo::of(env);
    let mut agent = match cfg.agent.precision {
        Precision::F64 => build_agent::<f64>(cfg, &info)?,
        Precision::F32 => build_agent::<f32>(cfg, &info)?,
    };
    if let (Some(required), WrapperConfig::Periodic { period }) =
        (agent.required_period(), cfg.wrapper())
    {
        if *period != Some(required) {
            return Err(HarnessError::config(format!(
                "{} must be trained with periodic({required})",
                agent.name()
            )));
        }
    }
    let demos = load_demos(cfg)?;
    ingest_demos(agent.as_mut(), &demos, &info)?;

    let mut streams = Streams::from_seed(cfg.seed);
    let sched = cfg.schedule.eval_schedule();
    let mut rec = Recorder {
        eval_env: base,
        sched,
        rng: streams.eval.clone(),
        evaluations: opts.evaluations,
        deployed_return: MetricSeries::new(DEPLOYED_RETURN),
        deployed_success: MetricSeries::new(DEPLOYED_SUCCESS),
        continuing: ContinuingTracker::new(
            cfg.schedule.continuing_stride.unwrap_or(sched.eval_every),
        )?,
        visitation: bins_for(base).map(VisitationHistogram::new).transpose()?,
        interventions: 0,
    };
    let h_max = cfg.schedule.h_max();
    let history = run_nonepisodic(env, agent.as_mut(), h_max, &mut streams, &mut [&mut rec])?;

    let robust_sched = EvalSchedule {
        n_rollouts: cfg.schedule.robustness_rollouts,
        ..sched
    };
    let robustness = match robustness_eval(&*agent.eval_policy(), base, &robust_sched, &mut rec.rng)
    {
        Ok(r) => Some(r),
        Err(arl::Error::Unsupported(_)) => None,
        Err(e) => return Err(e.into()),
    };
    let lifetime = (h_max > 0).then(|| rec.continuing.average());
    let continuing = rec.continuing.finish();
    let run_id = cfg.run_id();
    let summary = RunSummary {
        run_id: run_id.clone(),
        seed: cfg.seed,
        algorithm: cfg.algorithm_label(),
        env: cfg.env.name().to_string(),
        h_max,
        final_deployed_return: rec.deployed_return.last(),
        final_deployed_success: rec.deployed_success.last(),
        lifetime_avg_reward: lifetime,
        deployed_regret: deployed_regret(&rec.deployed_return, None),
        interventions: rec.interventions,
        robustness,
    };
    Ok(RunOutput {
        config: cfg.clone(),
        run_id,
        env_hash: base.spec_hash(),
        series: vec![rec.deployed_return, rec.deployed_success, continuing],
        summary,
        visitation: rec.visitation,
        tables: agent.snapshot(),
        history: opts.keep_history.then_some(history),
    })
}
