//! Experiment orchestration: the value-iteration oracle, frozen-policy
//! evaluation on common random numbers, the Welch stopping rule, single runs,
//! multi-seed sweeps and their CSV and SVG output.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::{self, BufRead, Write};
use std::path::Path;
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Deserialize;
use statrs::distribution::{ContinuousCDF, StudentsT};
use thiserror::Error;

use crate::agents::{Learner, Policy, QLearning, QLearningConfig, QrMax, QrMaxConfig, RMax, RandomAgent, RunRngs};
use crate::baselines::{AgentKind, BaselineError, BonusKind, EpisodicConfig, Footprint, Psrl, Sizes, Ucbvi};
use crate::bucket::{BucketConfig, BucketQrMax, HashError};
use crate::mdp::{argmax, flat_value_iteration, ViStop};
use crate::office::{builtin_env, MapError, OfficeEnv, N_ACTIONS};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Map(#[from] MapError),
    #[error(transparent)]
    Baseline(#[from] BaselineError),
    #[error(transparent)]
    Hash(#[from] HashError),
    #[error(transparent)]
    Agent(#[from] crate::baselines::UnknownAgent),
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("sweep file: {0}")]
    Toml(#[from] toml::de::Error),
    #[error("plot: {0}")]
    Plot(String),
    #[error("invalid configuration: {0}")]
    Config(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WelchError {
    #[error("each sample needs at least two values (got {0} and {1})")]
    TooFew(usize, usize),
    #[error("samples must be finite")]
    NonFinite,
}

fn mean_var(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let ss: f64 = x.iter().map(|v| (v - mean) * (v - mean)).sum();
    (mean, ss / (n - 1.0))
}

/// Two-sided Welch t-test p-value with Welch-Satterthwaite degrees of freedom.
/// Two constant samples give 1 when their means agree and 0 otherwise.
pub fn welch_t_test(a: &[f64], b: &[f64]) -> Result<f64, WelchError> {
    if a.len() < 2 || b.len() < 2 {
        return Err(WelchError::TooFew(a.len(), b.len()));
    }
    if a.iter().chain(b).any(|v| !v.is_finite()) {
        return Err(WelchError::NonFinite);
    }
    let (ma, va) = mean_var(a);
    let (mb, vb) = mean_var(b);
    let (sa, sb) = (va / a.len() as f64, vb / b.len() as f64);
    let se2 = sa + sb;
    if se2 == 0.0 {
        return Ok(if ma == mb { 1.0 } else { 0.0 });
    }
    let t = (ma - mb) / se2.sqrt();
    let df = se2 * se2 / (sa * sa / (a.len() as f64 - 1.0) + sb * sb / (b.len() as f64 - 1.0));
    let dist = StudentsT::new(0.0, 1.0, df).expect("positive degrees of freedom");
    Ok((2.0 * dist.sf(t.abs())).min(1.0))
}

/// Evaluation protocol: episode `i` always uses the same random streams, so
/// two policies that act alike see identical trajectories.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalSettings {
    pub episodes: usize,
    pub horizon: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalStats {
    /// Undiscounted episode returns.
    pub returns: Vec<f64>,
    pub success_rate: f64,
    pub mean_return: f64,
    pub std_return: f64,
    /// Mean episode length over successful episodes (NaN without successes).
    pub mean_success_length: f64,
}

impl EvalStats {
    fn from_episodes(returns: Vec<f64>, successes: usize, success_steps: usize) -> Self {
        let n = returns.len();
        let (mean, var) = if n >= 2 {
            mean_var(&returns)
        } else {
            (returns.first().copied().unwrap_or(f64::NAN), 0.0)
        };
        EvalStats {
            success_rate: successes as f64 / n as f64,
            mean_return: mean,
            std_return: var.sqrt(),
            mean_success_length: if successes > 0 {
                success_steps as f64 / successes as f64
            } else {
                f64::NAN
            },
            returns,
        }
    }
}

fn episode_rngs(seed: u64, i: u64) -> (ChaCha8Rng, ChaCha8Rng, ChaCha8Rng) {
    let mk = |k: u64| {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        r.set_stream(3 * i + k);
        r
    };
    (mk(0), mk(1), mk(2))
}

/// Runs `policy` for episodes `first..first + count` of the evaluation
/// sequence. An episode succeeds when it ends in an accepting state.
pub fn evaluate_range(policy: &Policy, env: &OfficeEnv, eval: &EvalSettings, first: usize, count: usize) -> EvalStats {
    let mut env = env.clone();
    env.set_step_limit(eval.horizon);
    let rm = env.machine().clone();
    let mut returns = Vec::with_capacity(count);
    let (mut successes, mut success_steps) = (0, 0);
    for i in first..first + count {
        let (mut env_rng, mut obs_rng, mut act_rng) = episode_rngs(eval.seed, i as u64);
        env.reset();
        let mut total = 0.0;
        let mut t = 0;
        while !env.is_finished() {
            let a = policy.act(&env, t, &mut obs_rng, &mut act_rng);
            let st = env.step(a, &mut env_rng).expect("episode is live");
            total += st.reward();
            t += 1;
        }
        if rm.is_accepting(env.state().1) {
            successes += 1;
            success_steps += t;
        }
        returns.push(total);
    }
    EvalStats::from_episodes(returns, successes, success_steps)
}

pub fn evaluate(policy: &Policy, env: &OfficeEnv, eval: &EvalSettings) -> EvalStats {
    evaluate_range(policy, env, eval, 0, eval.episodes)
}

/// Optimal policy of the true product kernel and its evaluation.
#[derive(Debug, Clone)]
pub struct Oracle {
    pub q: Vec<f64>,
    pub policy: Policy,
    pub stats: EvalStats,
}

/// Value iteration on the exact kernel to `1e-10`, then `eval.episodes`
/// rollouts of the greedy policy.
pub fn vi_oracle(env: &OfficeEnv, gamma: f64, eval: &EvalSettings) -> Oracle {
    let kernel = env.true_kernel();
    let terminal = env.terminal_mask();
    let mut q = vec![0.0; kernel.n_states * N_ACTIONS];
    flat_value_iteration(
        &mut q,
        &kernel,
        gamma,
        &terminal,
        ViStop::Tolerance {
            epsilon: 1e-10,
            max_iter: 1_000_000,
        },
    );
    let policy = Policy::Stationary {
        n_q: env.n_q(),
        actions: q.chunks(N_ACTIONS).map(argmax).collect(),
    };
    let stats = evaluate(&policy, env, eval);
    Oracle { q, policy, stats }
}

/// Everything that defines one run.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub map: String,
    pub task: String,
    pub agent: String,
    pub seed: u64,
    pub gamma: f64,
    pub t_e: u64,
    pub t_q: u64,
    /// Value-iteration sweeps per planning call; `None` derives it from the PAC horizon.
    pub vi_iterations: Option<usize>,
    pub alpha: f64,
    pub epsilon: f64,
    /// Episode length of the finite-horizon baselines; `None` uses the map horizon.
    pub horizon: Option<usize>,
    pub bonus_scale: f64,
    pub posterior_samples: usize,
    pub jitter: f64,
    pub hash_functions: usize,
    pub hash_bits: usize,
    pub hash_seed: u64,
    pub eval_every: u64,
    pub eval_episodes: usize,
    pub eval_seed: u64,
    /// Evaluation episode length; `None` uses the map horizon.
    pub eval_horizon: Option<usize>,
    pub p_threshold: f64,
    pub budget: u64,
    pub deterministic_eval: bool,
    /// Episodes of a first evaluation pass; a checkpoint whose screening
    /// p-value falls below `screen_p` is rejected without the full pass.
    pub screen_episodes: usize,
    pub screen_p: f64,
    pub step_limit: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            map: "map0_desk".into(),
            task: "0".into(),
            agent: "qrmax".into(),
            seed: 0,
            gamma: 0.9,
            t_e: 30,
            t_q: 1,
            vi_iterations: None,
            alpha: 0.1,
            epsilon: 0.1,
            horizon: None,
            bonus_scale: 1.0,
            posterior_samples: 8,
            jitter: 0.005,
            hash_functions: 4,
            hash_bits: 8,
            hash_seed: 0,
            eval_every: 1000,
            eval_episodes: 10_000,
            eval_seed: 0xE7A1,
            eval_horizon: None,
            p_threshold: 0.1,
            budget: 500_000,
            deterministic_eval: false,
            screen_episodes: 1000,
            screen_p: 1e-3,
            step_limit: crate::office::DEFAULT_STEP_LIMIT,
        }
    }
}

impl RunConfig {
    pub fn kind(&self) -> Result<AgentKind, HarnessError> {
        Ok(self.agent.parse()?)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        self.kind()?;
        if self.eval_every == 0 {
            return Err(HarnessError::Config("eval_every must be at least 1".into()));
        }
        if !(self.p_threshold > 0.0 && self.p_threshold < 1.0) {
            return Err(HarnessError::Config(format!("p_threshold must lie in (0, 1); got {}", self.p_threshold)));
        }
        if self.eval_episodes < 2 {
            return Err(HarnessError::Config("eval_episodes must be at least 2".into()));
        }
        Ok(())
    }

    pub fn train_env(&self) -> Result<OfficeEnv, HarnessError> {
        Ok(builtin_env(&self.map, &self.task)?.with_step_limit(self.step_limit))
    }

    pub fn eval_env(&self, train: &OfficeEnv) -> OfficeEnv {
        if self.deterministic_eval {
            train.deterministic_twin()
        } else {
            train.clone()
        }
    }

    pub fn eval_settings(&self, env: &OfficeEnv) -> EvalSettings {
        EvalSettings {
            episodes: self.eval_episodes,
            horizon: self.eval_horizon.unwrap_or(env.map().horizon),
            seed: self.eval_seed,
        }
    }

    pub fn sizes(&self, env: &OfficeEnv) -> Sizes {
        Sizes {
            states: env.n_states() as u64,
            actions: N_ACTIONS as u64,
            q: env.n_q() as u64,
            horizon: self.horizon.unwrap_or(env.map().horizon) as u64,
        }
    }

    fn qrmax_config(&self, env: &OfficeEnv) -> QrMaxConfig {
        let mut cfg = QrMaxConfig::for_machine(self.gamma, env.machine()).with_thresholds(self.t_e, self.t_q);
        if let Some(t) = self.vi_iterations {
            cfg = cfg.with_vi(ViStop::Iterations(t));
        }
        cfg
    }

    /// The agent this configuration names, sized for `env`.
    pub fn build_learner(&self, env: &OfficeEnv) -> Result<Box<dyn Learner>, HarnessError> {
        let episodic = EpisodicConfig {
            horizon: self.horizon.unwrap_or(env.map().horizon),
            bonus_scale: self.bonus_scale,
            n_posterior_samples: self.posterior_samples,
            ..EpisodicConfig::default()
        };
        let ql = QLearningConfig {
            gamma: self.gamma,
            alpha: self.alpha,
            epsilon: self.epsilon,
        };
        Ok(match self.kind()? {
            AgentKind::QrMax => Box::new(QrMax::new(env, self.qrmax_config(env))),
            AgentKind::QrMaxRm => Box::new(QrMax::with_machine(env, self.qrmax_config(env))),
            AgentKind::RMax => Box::new(RMax::new(env, self.qrmax_config(env))),
            AgentKind::RMaxRm => Box::new(RMax::with_machine(env, self.qrmax_config(env))),
            AgentKind::QLearning => Box::new(QLearning::new(env, ql)),
            AgentKind::Qrm => Box::new(QLearning::with_machine(env, ql)),
            AgentKind::UcbviHoeffding => Box::new(Ucbvi::new(env, BonusKind::Hoeffding, episodic)?),
            AgentKind::UcbviBernstein => Box::new(Ucbvi::new(env, BonusKind::Bernstein, episodic)?),
            AgentKind::UcbviSimplifiedBernstein => Box::new(Ucbvi::new(env, BonusKind::SimplifiedBernstein, episodic)?),
            AgentKind::Psrl => Box::new(Psrl::new(env, episodic)?),
            AgentKind::Opsrl => Box::new(Psrl::opsrl(env, episodic)?),
            AgentKind::BucketQrMax => {
                let mut cfg = BucketConfig::new(self.gamma, env.machine().max_reward());
                cfg.thresholds = crate::pac::BucketThresholds {
                    t_et: self.t_e,
                    t_er: self.t_e,
                    t_qt: self.t_q,
                    t_qr: self.t_q,
                };
                cfg.jitter = self.jitter;
                cfg.functions = self.hash_functions;
                cfg.bits = self.hash_bits;
                cfg.hash_seed = self.hash_seed;
                if let Some(t) = self.vi_iterations {
                    cfg.vi = ViStop::Iterations(t);
                }
                Box::new(BucketQrMax::new(env, cfg)?)
            }
            AgentKind::Random => Box::new(RandomAgent::new()),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub step: u64,
    pub episodes: u64,
    pub success_rate: f64,
    pub mean_return: f64,
    pub std_return: f64,
    pub p_value: f64,
    /// Evaluation episodes actually run (fewer when screening rejected it).
    pub evaluated: usize,
}

/// Stopping-rule parameters for [`run_learner`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StopRule {
    pub eval_every: u64,
    pub budget: u64,
    pub p_threshold: f64,
    pub screen_episodes: usize,
    pub screen_p: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub checkpoints: Vec<Checkpoint>,
    pub steps_to_convergence: Option<u64>,
    pub episodes_to_convergence: Option<u64>,
}

fn assess(policy: &Policy, env: &OfficeEnv, eval: &EvalSettings, oracle: &Oracle, rule: &StopRule) -> (EvalStats, f64) {
    let p = |s: &EvalStats| welch_t_test(&s.returns, &oracle.stats.returns[..s.returns.len()]).unwrap_or(0.0);
    if rule.screen_episodes >= 2 && rule.screen_episodes < eval.episodes {
        let quick = evaluate_range(policy, env, eval, 0, rule.screen_episodes);
        let pq = p(&quick);
        if pq < rule.screen_p {
            return (quick, pq);
        }
    }
    let full = evaluate(policy, env, eval);
    let pf = p(&full);
    (full, pf)
}

/// Trains `agent` and evaluates its frozen greedy policy every `eval_every`
/// steps until the Welch test cannot tell its returns from the oracle's or
/// the budget runs out. Consecutive checkpoints with an unchanged policy reuse
/// the previous evaluation, which common random numbers make exact.
pub fn run_learner(
    agent: &mut dyn Learner,
    env: &mut OfficeEnv,
    rngs: &mut RunRngs,
    eval_env: &OfficeEnv,
    eval: &EvalSettings,
    oracle: &Oracle,
    rule: &StopRule,
) -> RunOutcome {
    let mut out = RunOutcome {
        checkpoints: Vec::new(),
        steps_to_convergence: None,
        episodes_to_convergence: None,
    };
    let mut last: Option<(Policy, EvalStats, f64)> = None;
    let mut step = 0;
    while step + rule.eval_every <= rule.budget {
        for _ in 0..rule.eval_every {
            agent.train_step(env, rngs);
        }
        step += rule.eval_every;
        let policy = agent.policy();
        let (stats, p) = match &last {
            Some((prev, s, p)) if *prev == policy => (s.clone(), *p),
            _ => assess(&policy, eval_env, eval, oracle, rule),
        };
        out.checkpoints.push(Checkpoint {
            step,
            episodes: agent.episodes(),
            success_rate: stats.success_rate,
            mean_return: stats.mean_return,
            std_return: stats.std_return,
            p_value: p,
            evaluated: stats.returns.len(),
        });
        if p >= rule.p_threshold && stats.returns.len() == eval.episodes {
            out.steps_to_convergence = Some(step);
            out.episodes_to_convergence = Some(agent.episodes());
            break;
        }
        last = Some((policy, stats, p));
    }
    out
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub config: RunConfig,
    pub outcome: RunOutcome,
    pub footprint: Footprint,
    pub oracle_success_rate: f64,
    pub oracle_mean_return: f64,
    pub wall_clock: Duration,
}

impl RunResult {
    /// `key=value` header rows, then one row per checkpoint. Timing is left
    /// out so that reruns of one configuration are byte-identical.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        let c = &self.config;
        let opt = |v: Option<u64>| v.map_or("none".to_string(), |v| v.to_string());
        writeln!(w, "map={}", c.map)?;
        writeln!(w, "task={}", c.task)?;
        writeln!(w, "agent={}", c.agent)?;
        writeln!(w, "seed={}", c.seed)?;
        writeln!(w, "gamma={}", c.gamma)?;
        writeln!(w, "t_e={}", c.t_e)?;
        writeln!(w, "t_q={}", c.t_q)?;
        writeln!(w, "budget={}", c.budget)?;
        writeln!(w, "eval_every={}", c.eval_every)?;
        writeln!(w, "eval_episodes={}", c.eval_episodes)?;
        writeln!(w, "eval_seed={}", c.eval_seed)?;
        writeln!(w, "p_threshold={}", c.p_threshold)?;
        writeln!(w, "deterministic_eval={}", c.deterministic_eval)?;
        if c.kind().ok() == Some(AgentKind::BucketQrMax) {
            writeln!(w, "hash_seed={}", c.hash_seed)?;
            writeln!(w, "hash_functions={}", c.hash_functions)?;
            writeln!(w, "hash_bits={}", c.hash_bits)?;
            writeln!(w, "jitter={}", c.jitter)?;
        }
        writeln!(w, "converged={}", self.outcome.steps_to_convergence.is_some())?;
        writeln!(w, "steps_to_convergence={}", opt(self.outcome.steps_to_convergence))?;
        writeln!(w, "episodes_to_convergence={}", opt(self.outcome.episodes_to_convergence))?;
        writeln!(w, "memory_entries={}", self.footprint.total())?;
        writeln!(w, "oracle_success_rate={}", self.oracle_success_rate)?;
        writeln!(w, "oracle_mean_return={}", self.oracle_mean_return)?;
        writeln!(w, "step,success_rate,mean_return,std_return,p_value")?;
        for k in &self.outcome.checkpoints {
            writeln!(w, "{},{},{},{},{}", k.step, k.success_rate, k.mean_return, k.std_return, k.p_value)?;
        }
        Ok(())
    }

    pub fn csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("ascii output")
    }
}

/// Parsed form of a run CSV: header map and checkpoint rows
/// `(step, success_rate, mean_return, std_return, p_value)`.
pub fn read_run_csv<R: BufRead>(r: R) -> Result<(BTreeMap<String, String>, Vec<[f64; 5]>), HarnessError> {
    let mut header = BTreeMap::new();
    let mut rows = Vec::new();
    let mut in_rows = false;
    for line in r.lines() {
        let line = line?;
        if in_rows {
            let vals: Result<Vec<f64>, _> = line.split(',').map(str::parse::<f64>).collect();
            let vals = vals.map_err(|e| HarnessError::Config(format!("bad checkpoint row `{line}`: {e}")))?;
            let row: [f64; 5] = vals
                .try_into()
                .map_err(|_| HarnessError::Config(format!("bad checkpoint row `{line}`")))?;
            rows.push(row);
        } else if line.starts_with("step,") {
            in_rows = true;
        } else if let Some((k, v)) = line.split_once('=') {
            header.insert(k.to_string(), v.to_string());
        }
    }
    Ok((header, rows))
}

/// Runs one configuration against a precomputed oracle.
pub fn run_with_oracle(cfg: &RunConfig, oracle: &Oracle) -> Result<RunResult, HarnessError> {
    cfg.validate()?;
    let start = Instant::now();
    let mut env = cfg.train_env()?;
    let eval_env = cfg.eval_env(&env);
    let eval = cfg.eval_settings(&env);
    let mut agent = cfg.build_learner(&env)?;
    let footprint = agent.footprint(cfg.sizes(&env));
    let mut rngs = RunRngs::new(cfg.seed);
    let rule = StopRule {
        eval_every: cfg.eval_every,
        budget: cfg.budget,
        p_threshold: cfg.p_threshold,
        screen_episodes: cfg.screen_episodes,
        screen_p: cfg.screen_p,
    };
    let outcome = run_learner(agent.as_mut(), &mut env, &mut rngs, &eval_env, &eval, oracle, &rule);
    Ok(RunResult {
        config: cfg.clone(),
        outcome,
        footprint,
        oracle_success_rate: oracle.stats.success_rate,
        oracle_mean_return: oracle.stats.mean_return,
        wall_clock: start.elapsed(),
    })
}

/// The oracle a configuration is judged against.
pub fn oracle_for(cfg: &RunConfig) -> Result<Oracle, HarnessError> {
    let env = cfg.train_env()?;
    let eval_env = cfg.eval_env(&env);
    Ok(vi_oracle(&eval_env, cfg.gamma, &cfg.eval_settings(&env)))
}

pub fn train_until_indistinguishable(cfg: &RunConfig) -> Result<RunResult, HarnessError> {
    let oracle = oracle_for(cfg)?;
    run_with_oracle(cfg, &oracle)
}

/// One experiment of a sweep: a map/task pair, a set of agents and seeds, and
/// run settings shared by all of them.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Experiment {
    pub name: String,
    pub agents: Vec<String>,
    #[serde(default = "default_seeds")]
    pub seeds: u64,
    #[serde(flatten)]
    pub run: RunConfig,
}

fn default_seeds() -> u64 {
    10
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    #[serde(rename = "experiment")]
    pub experiments: Vec<Experiment>,
}

// `deny_unknown_fields` does not combine with `flatten`, so experiments are
// checked by hand against the known keys.
fn check_keys(text: &str) -> Result<(), HarnessError> {
    let value: toml::Table = text.parse()?;
    let fields = [
        "name", "agents", "seeds", "map", "task", "agent", "seed", "gamma", "t_e", "t_q", "vi_iterations", "alpha",
        "epsilon", "horizon", "bonus_scale", "posterior_samples", "jitter", "hash_functions", "hash_bits", "hash_seed",
        "eval_every", "eval_episodes", "eval_seed", "eval_horizon", "p_threshold", "budget", "deterministic_eval",
        "screen_episodes", "screen_p", "step_limit",
    ];
    if let Some(toml::Value::Array(exps)) = value.get("experiment") {
        for e in exps {
            if let toml::Value::Table(t) = e {
                if let Some(k) = t.keys().find(|k| !fields.contains(&k.as_str())) {
                    return Err(HarnessError::Config(format!("unknown experiment key `{k}`")));
                }
            }
        }
    }
    Ok(())
}

impl SweepSpec {
    pub fn parse(text: &str) -> Result<Self, HarnessError> {
        check_keys(text)?;
        Ok(toml::from_str(text)?)
    }

    /// Every `(experiment, agent, seed)` configuration in order.
    pub fn configs(&self) -> Vec<(String, RunConfig)> {
        let mut out = Vec::new();
        for e in &self.experiments {
            for agent in &e.agents {
                for seed in 0..e.seeds {
                    let mut c = e.run.clone();
                    c.agent = agent.clone();
                    c.seed = seed;
                    out.push((e.name.clone(), c));
                }
            }
        }
        out
    }
}

/// One sweep row: a finished run or the error that stopped it.
#[derive(Debug)]
pub struct SweepRow {
    pub experiment: String,
    pub config: RunConfig,
    pub result: Result<RunResult, HarnessError>,
}

/// Runs all configurations, in parallel across runs. One oracle is computed
/// per distinct evaluation setting; failures are kept per row.
pub fn sweep(configs: &[(String, RunConfig)]) -> Vec<SweepRow> {
    let mut oracles: BTreeMap<String, Arc<Result<Oracle, String>>> = BTreeMap::new();
    for (_, c) in configs {
        let key = oracle_key(c);
        oracles
            .entry(key)
            .or_insert_with(|| Arc::new(oracle_for(c).map_err(|e| e.to_string())));
    }
    configs
        .par_iter()
        .map(|(name, c)| {
            let result = match oracles[&oracle_key(c)].as_ref() {
                Ok(o) => run_with_oracle(c, o),
                Err(e) => Err(HarnessError::Config(format!("oracle: {e}"))),
            };
            SweepRow {
                experiment: name.clone(),
                config: c.clone(),
                result,
            }
        })
        .collect()
}

fn oracle_key(c: &RunConfig) -> String {
    format!(
        "{}|{}|{}|{}|{}|{}|{:?}|{}",
        c.map, c.task, c.gamma, c.eval_episodes, c.eval_seed, c.deterministic_eval, c.eval_horizon, c.step_limit
    )
}

/// Writes `experiment,map,task,agent,seed,converged,steps_to_convergence,episodes_to_convergence,memory_entries,error`.
pub fn write_summary<W: Write>(rows: &[SweepRow], w: W) -> Result<(), HarnessError> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record([
        "experiment",
        "map",
        "task",
        "agent",
        "seed",
        "converged",
        "steps_to_convergence",
        "episodes_to_convergence",
        "memory_entries",
        "error",
    ])?;
    for r in rows {
        let c = &r.config;
        let mut rec = vec![r.experiment.clone(), c.map.clone(), c.task.clone(), c.agent.clone(), c.seed.to_string()];
        match &r.result {
            Ok(res) => {
                let o = &res.outcome;
                rec.push(o.steps_to_convergence.is_some().to_string());
                rec.push(o.steps_to_convergence.map_or(String::new(), |v| v.to_string()));
                rec.push(o.episodes_to_convergence.map_or(String::new(), |v| v.to_string()));
                rec.push(res.footprint.total().to_string());
                rec.push(String::new());
            }
            Err(e) => {
                rec.extend(["false".to_string(), String::new(), String::new(), String::new(), e.to_string()]);
            }
        }
        out.write_record(&rec)?;
    }
    out.flush()?;
    Ok(())
}

/// Success rate of one run at every multiple of `eval_every` up to `budget`;
/// a converged run keeps its final value.
pub fn success_curve(outcome: &RunOutcome, eval_every: u64, budget: u64) -> Vec<(u64, f64)> {
    let mut out = Vec::new();
    let mut last = 0.0;
    let mut it = outcome.checkpoints.iter().peekable();
    let mut step = eval_every;
    while step <= budget {
        if let Some(k) = it.next_if(|k| k.step == step) {
            last = k.success_rate;
        } else if outcome.steps_to_convergence.is_none() {
            break;
        }
        out.push((step, last));
        step += eval_every;
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurvePoint {
    pub experiment: String,
    pub agent: String,
    pub step: u64,
    pub n: usize,
    pub mean: f64,
    pub std: f64,
}

/// Per-checkpoint mean and sample standard deviation of success rate over seeds.
pub fn aggregate_curves(rows: &[SweepRow]) -> Vec<CurvePoint> {
    let mut groups: BTreeMap<(String, String, u64), Vec<f64>> = BTreeMap::new();
    for r in rows {
        let Ok(res) = &r.result else { continue };
        for (step, v) in success_curve(&res.outcome, res.config.eval_every, res.config.budget) {
            groups
                .entry((r.experiment.clone(), r.config.agent.clone(), step))
                .or_default()
                .push(v);
        }
    }
    groups
        .into_iter()
        .map(|((experiment, agent, step), v)| {
            let n = v.len();
            let mean = v.iter().sum::<f64>() / n as f64;
            let std = if n >= 2 { mean_var(&v).1.sqrt() } else { 0.0 };
            CurvePoint {
                experiment,
                agent,
                step,
                n,
                mean,
                std,
            }
        })
        .collect()
}

pub fn write_curves<W: Write>(points: &[CurvePoint], w: W) -> Result<(), HarnessError> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["experiment", "agent", "step", "n", "mean_success", "std_success"])?;
    for p in points {
        out.write_record([
            p.experiment.clone(),
            p.agent.clone(),
            p.step.to_string(),
            p.n.to_string(),
            p.mean.to_string(),
            p.std.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_curves<R: io::Read>(r: R) -> Result<Vec<CurvePoint>, HarnessError> {
    let mut rdr = csv::Reader::from_reader(r);
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let num = |i: usize| -> Result<f64, HarnessError> {
            rec[i]
                .parse()
                .map_err(|_| HarnessError::Config(format!("bad number `{}`", &rec[i])))
        };
        out.push(CurvePoint {
            experiment: rec[0].to_string(),
            agent: rec[1].to_string(),
            step: num(2)? as u64,
            n: num(3)? as usize,
            mean: num(4)?,
            std: num(5)?,
        });
    }
    Ok(out)
}

/// Median of the converged runs' steps, or `None` if fewer than half converged.
pub fn median_steps(values: &[Option<u64>]) -> Option<f64> {
    let mut v: Vec<f64> = values.iter().map(|x| x.map_or(f64::INFINITY, |x| x as f64)).collect();
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let n = v.len();
    let m = if n % 2 == 1 { v[n / 2] } else { (v[n / 2 - 1] + v[n / 2]) / 2.0 };
    m.is_finite().then_some(m)
}

/// Table layout with one row per experiment and one column per agent:
/// mean steps to convergence over converged seeds and the converged count.
pub fn summary_table(rows: &[SweepRow]) -> String {
    let mut agents: Vec<String> = Vec::new();
    let mut cells: BTreeMap<(String, String), Vec<Option<u64>>> = BTreeMap::new();
    let mut meta: BTreeMap<String, (String, String)> = BTreeMap::new();
    for r in rows {
        if !agents.contains(&r.config.agent) {
            agents.push(r.config.agent.clone());
        }
        meta.entry(r.experiment.clone())
            .or_insert_with(|| (r.config.map.clone(), r.config.task.clone()));
        let v = r.result.as_ref().ok().and_then(|x| x.outcome.steps_to_convergence);
        cells.entry((r.experiment.clone(), r.config.agent.clone())).or_default().push(v);
    }
    let mut out = String::from("map,exp");
    for a in &agents {
        let _ = write!(out, ",{a}");
    }
    out.push('\n');
    for (exp, (map, task)) in &meta {
        let _ = write!(out, "{map},{task}");
        for a in &agents {
            let cell = match cells.get(&(exp.clone(), a.clone())) {
                Some(v) => {
                    let done: Vec<u64> = v.iter().flatten().copied().collect();
                    if done.is_empty() {
                        format!("- (0/{})", v.len())
                    } else {
                        let mean = done.iter().sum::<u64>() as f64 / done.len() as f64;
                        format!("{:.0} ({}/{})", mean, done.len(), v.len())
                    }
                }
                None => String::new(),
            };
            let _ = write!(out, ",{cell}");
        }
        out.push('\n');
    }
    out
}

/// Success-rate curves with mean ± 1σ bands over a logarithmic step axis.
pub fn plot_curves(points: &[CurvePoint], title: &str, path: &Path) -> Result<(), HarnessError> {
    use plotters::prelude::*;
    let err = |e: &dyn std::fmt::Display| HarnessError::Plot(e.to_string());
    let max_step = points.iter().map(|p| p.step).max().unwrap_or(1).max(2) as f64;
    let min_step = points.iter().map(|p| p.step).min().unwrap_or(1).max(1) as f64;
    let root = SVGBackend::new(path, (800, 500)).into_drawing_area();
    root.fill(&WHITE).map_err(|e| err(&e))?;
    let mut chart = ChartBuilder::on(&root)
        .caption(title, ("sans-serif", 22))
        .margin(12)
        .x_label_area_size(40)
        .y_label_area_size(50)
        .build_cartesian_2d((min_step..max_step).log_scale(), 0.0..1.0)
        .map_err(|e| err(&e))?;
    chart
        .configure_mesh()
        .x_desc("training steps")
        .y_desc("success rate")
        .draw()
        .map_err(|e| err(&e))?;
    let mut series: BTreeMap<(String, String), Vec<&CurvePoint>> = BTreeMap::new();
    for p in points {
        series.entry((p.experiment.clone(), p.agent.clone())).or_default().push(p);
    }
    let multi = series.keys().map(|k| &k.0).collect::<std::collections::BTreeSet<_>>().len() > 1;
    for (i, ((exp, agent), pts)) in series.iter().enumerate() {
        let color = Palette99::pick(i);
        let upper: Vec<(f64, f64)> = pts.iter().map(|p| (p.step as f64, (p.mean + p.std).min(1.0))).collect();
        let lower: Vec<(f64, f64)> = pts.iter().rev().map(|p| (p.step as f64, (p.mean - p.std).max(0.0))).collect();
        let band: Vec<(f64, f64)> = upper.into_iter().chain(lower).collect();
        chart
            .draw_series(std::iter::once(Polygon::new(band, color.mix(0.2).filled())))
            .map_err(|e| err(&e))?;
        let label = if multi { format!("{exp}/{agent}") } else { agent.clone() };
        chart
            .draw_series(LineSeries::new(pts.iter().map(|p| (p.step as f64, p.mean)), color.stroke_width(2)))
            .map_err(|e| err(&e))?
            .label(label)
            .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 18, y)], color.stroke_width(2)));
    }
    chart
        .configure_series_labels()
        .background_style(WHITE.mix(0.8))
        .border_style(BLACK)
        .position(SeriesLabelPosition::LowerRight)
        .draw()
        .map_err(|e| err(&e))?;
    root.present().map_err(|e| err(&e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_samples_give_one() {
        let a = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(welch_t_test(&a, &a).unwrap(), 1.0);
        assert_eq!(welch_t_test(&[2.0, 2.0], &[2.0, 2.0]).unwrap(), 1.0);
        assert_eq!(welch_t_test(&[2.0, 2.0], &[3.0, 3.0]).unwrap(), 0.0);
    }

    #[test]
    fn separated_samples_give_tiny_p() {
        let a: Vec<f64> = (0..20).map(|i| 0.001 * i as f64).collect();
        let b: Vec<f64> = a.iter().map(|x| 100.0 + x).collect();
        assert!(welch_t_test(&a, &b).unwrap() < 1e-6);
    }

    #[test]
    fn short_samples_rejected() {
        assert_eq!(welch_t_test(&[1.0], &[1.0, 2.0]), Err(WelchError::TooFew(1, 2)));
    }

    #[test]
    fn median_with_censoring() {
        assert_eq!(median_steps(&[Some(1), Some(3), None]), Some(3.0));
        assert_eq!(median_steps(&[Some(1), None, None]), None);
        assert_eq!(median_steps(&[Some(1), Some(3)]), Some(2.0));
    }

    #[test]
    fn sweep_spec_parses() {
        let spec = SweepSpec::parse(
            "[[experiment]]\nname = \"e\"\nmap = \"map0_desk\"\ntask = \"0\"\nagents = [\"qrmax\", \"rmax\"]\nseeds = 2\nbudget = 100\n",
        )
        .unwrap();
        let cfgs = spec.configs();
        assert_eq!(cfgs.len(), 4);
        assert_eq!(cfgs[3].1.agent, "rmax");
        assert_eq!(cfgs[3].1.seed, 1);
        assert!(SweepSpec::parse("[[experiment]]\nname = \"e\"\nagents = []\nbogus = 1\n").is_err());
    }
}
