//! Finite-horizon baselines over the flat product `S x Q`: UCBVI with three
//! bonus shapes, PSRL and OPSRL, plus the analytic memory accounting shared by
//! every agent.
//!
//! All three run undiscounted episodes of fixed length `H`, replan by backward
//! induction at the start of every episode and act with the resulting
//! step-indexed policy.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, Exp1, Gamma, StandardNormal};
use thiserror::Error;

use crate::agents::{Learner, Policy, RunRngs, StepRecord};
use crate::mdp::{argmax, ActionId};
use crate::office::{OfficeEnv, N_ACTIONS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AgentKind {
    QrMax,
    QrMaxRm,
    RMax,
    RMaxRm,
    QLearning,
    Qrm,
    UcbviHoeffding,
    UcbviBernstein,
    UcbviSimplifiedBernstein,
    Psrl,
    Opsrl,
    BucketQrMax,
    Random,
}

impl AgentKind {
    pub const ALL: [AgentKind; 13] = [
        AgentKind::QrMax,
        AgentKind::QrMaxRm,
        AgentKind::RMax,
        AgentKind::RMaxRm,
        AgentKind::QLearning,
        AgentKind::Qrm,
        AgentKind::UcbviHoeffding,
        AgentKind::UcbviBernstein,
        AgentKind::UcbviSimplifiedBernstein,
        AgentKind::Psrl,
        AgentKind::Opsrl,
        AgentKind::BucketQrMax,
        AgentKind::Random,
    ];

    pub fn id(self) -> &'static str {
        match self {
            AgentKind::QrMax => "qrmax",
            AgentKind::QrMaxRm => "qrmaxrm",
            AgentKind::RMax => "rmax",
            AgentKind::RMaxRm => "rmaxrm",
            AgentKind::QLearning => "ql",
            AgentKind::Qrm => "qrm",
            AgentKind::UcbviHoeffding => "ucbvi-h",
            AgentKind::UcbviBernstein => "ucbvi-b",
            AgentKind::UcbviSimplifiedBernstein => "ucbvi-sb",
            AgentKind::Psrl => "psrl",
            AgentKind::Opsrl => "opsrl",
            AgentKind::BucketQrMax => "bucket-qrmax",
            AgentKind::Random => "random",
        }
    }

    /// Finite-horizon agents evaluated with a step-indexed policy.
    pub fn is_episodic(self) -> bool {
        matches!(
            self,
            AgentKind::UcbviHoeffding
                | AgentKind::UcbviBernstein
                | AgentKind::UcbviSimplifiedBernstein
                | AgentKind::Psrl
                | AgentKind::Opsrl
        )
    }
}

impl fmt::Display for AgentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("unknown agent `{0}`")]
pub struct UnknownAgent(pub String);

impl FromStr for AgentKind {
    type Err = UnknownAgent;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        AgentKind::ALL
            .into_iter()
            .find(|k| k.id() == s)
            .ok_or_else(|| UnknownAgent(s.to_string()))
    }
}

/// Problem sizes for memory accounting.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Sizes {
    pub states: u64,
    pub actions: u64,
    pub q: u64,
    pub horizon: u64,
}

/// Analytic table sizes, in entries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Footprint {
    pub parts: Vec<(&'static str, u64)>,
}

impl Footprint {
    pub fn total(&self) -> u64 {
        self.parts.iter().map(|p| p.1).sum()
    }
}

/// Entries of the dominant model tables: transition tensors plus, for the
/// factorized agents, the automaton table.
pub fn memory_footprint(kind: AgentKind, z: Sizes) -> Footprint {
    let (s, a, q, h) = (z.states, z.actions, z.q, z.horizon);
    let parts = match kind {
        AgentKind::QrMax | AgentKind::QrMaxRm | AgentKind::BucketQrMax => {
            vec![("env_transitions", s * s * a), ("automaton", s * q)]
        }
        AgentKind::RMax | AgentKind::RMaxRm => vec![("product_transitions", (s * q) * (s * q) * a)],
        AgentKind::QLearning | AgentKind::Qrm => vec![("q_table", s * q * a)],
        AgentKind::UcbviHoeffding
        | AgentKind::UcbviBernstein
        | AgentKind::UcbviSimplifiedBernstein
        | AgentKind::Psrl
        | AgentKind::Opsrl => vec![("stepwise_transitions", h * s * s * a)],
        AgentKind::Random => vec![],
    };
    Footprint { parts }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpisodicConfig {
    pub horizon: usize,
    pub bonus_scale: f64,
    pub n_posterior_samples: usize,
    /// Confidence level inside the bonus log term.
    pub delta: f64,
    /// Largest admissible posterior storage in bytes.
    pub byte_cap: u64,
}

impl Default for EpisodicConfig {
    fn default() -> Self {
        EpisodicConfig {
            horizon: 50,
            bonus_scale: 1.0,
            n_posterior_samples: 8,
            delta: 0.1,
            byte_cap: 1 << 30,
        }
    }
}

impl EpisodicConfig {
    pub fn with_horizon(mut self, horizon: usize) -> Self {
        self.horizon = horizon;
        self
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BaselineError {
    #[error("horizon must be at least 1")]
    Horizon,
    #[error("at least one posterior sample is required")]
    Samples,
    #[error("bonus scale must be positive; got {0}")]
    BonusScale(f64),
    #[error("posterior storage of {needed} bytes exceeds the cap of {cap} bytes")]
    MemoryCap { needed: u64, cap: u64 },
}

impl EpisodicConfig {
    fn validate(&self) -> Result<(), BaselineError> {
        if self.horizon == 0 {
            return Err(BaselineError::Horizon);
        }
        if self.n_posterior_samples == 0 {
            return Err(BaselineError::Samples);
        }
        if !(self.bonus_scale > 0.0) {
            return Err(BaselineError::BonusScale(self.bonus_scale));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BonusKind {
    Hoeffding,
    Bernstein,
    SimplifiedBernstein,
}

/// Statistics of one `(x, a)` pair entering its exploration bonus.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BonusInput {
    pub n: u64,
    /// `ln(3 |X| |A| k / delta)` for episode index `k >= 1`.
    pub log: f64,
    /// `H * r_max`, the range of an episode return.
    pub span: f64,
    /// Empirical variance of the next-step value.
    pub var_next: f64,
    /// Empirical variance of the one-step reward.
    pub var_reward: f64,
}

/// UCBVI bonus for a visited pair (`n >= 1`).
///
/// * Hoeffding: `c H r_max sqrt(L / n)`
/// * Bernstein: `c (sqrt(2 L (Var V + Var r) / n) + 7 H r_max L / (3 max(n - 1, 1)))`
/// * simplified Bernstein: `c (sqrt(2 L Var V / n) + H r_max L / n)`
pub fn bonus(kind: BonusKind, c: f64, b: BonusInput) -> f64 {
    debug_assert!(b.n >= 1);
    let n = b.n as f64;
    match kind {
        BonusKind::Hoeffding => c * b.span * (b.log / n).sqrt(),
        BonusKind::Bernstein => {
            let var = (b.var_next + b.var_reward).max(0.0);
            c * ((2.0 * b.log * var / n).sqrt() + 7.0 * b.span * b.log / (3.0 * (n - 1.0).max(1.0)))
        }
        BonusKind::SimplifiedBernstein => {
            c * ((2.0 * b.log * b.var_next.max(0.0) / n).sqrt() + b.span * b.log / n)
        }
    }
}

/// Visit statistics over the product, shared by the episodic agents.
#[derive(Debug, Clone)]
pub struct ProductStats {
    n_x: usize,
    n_q: usize,
    n: Vec<u64>,
    next: Vec<Vec<(usize, u64)>>,
    r_sum: Vec<f64>,
    r_sq: Vec<f64>,
    terminal: Vec<bool>,
}

impl ProductStats {
    pub fn new(n_states: usize, n_q: usize) -> Self {
        let n_x = n_states * n_q;
        ProductStats {
            n_x,
            n_q,
            n: vec![0; n_x * N_ACTIONS],
            next: vec![Vec::new(); n_x * N_ACTIONS],
            r_sum: vec![0.0; n_x * N_ACTIONS],
            r_sq: vec![0.0; n_x * N_ACTIONS],
            terminal: vec![false; n_x],
        }
    }

    pub fn n_joint(&self) -> usize {
        self.n_x
    }

    pub fn record(&mut self, x: usize, a: ActionId, y: usize, r: f64) {
        let i = x * N_ACTIONS + a;
        self.n[i] += 1;
        self.r_sum[i] += r;
        self.r_sq[i] += r * r;
        match self.next[i].iter_mut().find(|e| e.0 == y) {
            Some(e) => e.1 += 1,
            None => self.next[i].push((y, 1)),
        }
    }

    pub fn visits(&self, x: usize, a: ActionId) -> u64 {
        self.n[x * N_ACTIONS + a]
    }

    pub fn count(&self, x: usize, a: ActionId, y: usize) -> u64 {
        self.next[x * N_ACTIONS + a]
            .iter()
            .find(|e| e.0 == y)
            .map_or(0, |e| e.1)
    }

    pub fn is_terminal(&self, x: usize) -> bool {
        self.terminal[x]
    }
}

/// Shared episode bookkeeping: resets, step-indexed acting, truncation at `H`
/// and terminal detection.
#[derive(Debug, Clone)]
struct EpisodeDriver {
    horizon: usize,
    r_max: f64,
    r_min: f64,
    stats: ProductStats,
    actions: Vec<Vec<ActionId>>,
    current: Option<usize>,
    t: usize,
    steps: u64,
    episodes: u64,
}

impl EpisodeDriver {
    fn new(env: &OfficeEnv, horizon: usize) -> Self {
        let stats = ProductStats::new(env.n_states(), env.n_q());
        EpisodeDriver {
            horizon,
            r_max: env.machine().max_reward(),
            r_min: env.machine().min_reward(),
            actions: vec![vec![0; stats.n_x]; horizon],
            stats,
            current: None,
            t: 0,
            steps: 0,
            episodes: 0,
        }
    }

    /// Value clip at step `h`: `[(H - h) min(r_min, 0), (H - h) r_max]`.
    fn clip(&self, h: usize) -> (f64, f64) {
        let left = (self.horizon - h) as f64;
        (left * self.r_min.min(0.0), left * self.r_max.max(0.0))
    }

    fn log_term(&self, delta: f64) -> f64 {
        let k = self.episodes.max(1) as f64;
        (3.0 * self.stats.n_x as f64 * N_ACTIONS as f64 * k / delta).ln()
    }

    fn step(&mut self, env: &mut OfficeEnv, rngs: &mut RunRngs, plan: impl FnOnce(&mut Self, &mut RunRngs)) -> StepRecord {
        let nq = self.stats.n_q;
        let x = match self.current {
            Some(x) => x,
            None => {
                self.episodes += 1;
                let (s, q) = env.reset();
                self.t = 0;
                plan(self, rngs);
                s * nq + q
            }
        };
        let a = self.actions[self.t][x];
        let st = env.step(a, &mut rngs.env).expect("episode is live");
        let y = st.next_state * nq + st.next_q;
        self.stats.record(x, a, y, st.reward());
        if st.terminal() {
            self.stats.terminal[y] = true;
        }
        self.t += 1;
        self.steps += 1;
        let cut = !st.done && self.t >= self.horizon;
        self.current = if st.done || cut { None } else { Some(y) };
        StepRecord {
            step: self.steps,
            s: x / nq,
            q: x % nq,
            a,
            next_s: st.next_state,
            next_q: st.next_q,
            r_e: st.r_e,
            r_a: st.r_a,
            done: st.done || cut,
            truncated: st.truncated || cut,
            model_updated: self.t == 1,
        }
    }

    fn policy(&self) -> Policy {
        Policy::Episodic {
            n_q: self.stats.n_q,
            actions: self.actions.clone(),
        }
    }
}

/// UCBVI on the product with the chosen bonus.
#[derive(Debug, Clone)]
pub struct Ucbvi {
    cfg: EpisodicConfig,
    kind: BonusKind,
    d: EpisodeDriver,
    values: Vec<Vec<f64>>,
}

impl Ucbvi {
    pub fn new(env: &OfficeEnv, kind: BonusKind, cfg: EpisodicConfig) -> Result<Self, BaselineError> {
        cfg.validate()?;
        let d = EpisodeDriver::new(env, cfg.horizon);
        let n = d.stats.n_x * N_ACTIONS;
        Ok(Ucbvi {
            cfg,
            kind,
            values: vec![vec![0.0; n]; cfg.horizon],
            d,
        })
    }

    pub fn stats(&self) -> &ProductStats {
        &self.d.stats
    }

    /// Optimistic `Q_h(x, a)` from the most recent planning pass.
    pub fn q_values(&self) -> &[Vec<f64>] {
        &self.values
    }

    /// Plans as if a new episode were starting now.
    pub fn replan(&mut self) {
        plan_ucbvi(&mut self.d, &mut self.values, self.kind, &self.cfg);
    }
}

fn plan_ucbvi(d: &mut EpisodeDriver, values: &mut [Vec<f64>], kind: BonusKind, cfg: &EpisodicConfig) {
    let h_total = d.horizon;
    let n_x = d.stats.n_x;
    let log = d.log_term(cfg.delta);
    let span = h_total as f64 * d.r_max.max(-d.r_min).max(f64::MIN_POSITIVE);
    let mut v_next = vec![0.0; n_x];
    let mut v_cur = vec![0.0; n_x];
    for h in (0..h_total).rev() {
        let (lo, hi) = d.clip(h);
        for x in 0..n_x {
            if d.stats.terminal[x] {
                values[h][x * N_ACTIONS..(x + 1) * N_ACTIONS].fill(0.0);
                d.actions[h][x] = 0;
                v_cur[x] = 0.0;
                continue;
            }
            for a in 0..N_ACTIONS {
                let i = x * N_ACTIONS + a;
                let n = d.stats.n[i];
                values[h][i] = if n == 0 {
                    hi
                } else {
                    let nf = n as f64;
                    let (mut pv, mut pv2) = (0.0, 0.0);
                    for &(y, c) in &d.stats.next[i] {
                        let p = c as f64 / nf;
                        pv += p * v_next[y];
                        pv2 += p * v_next[y] * v_next[y];
                    }
                    let rbar = d.stats.r_sum[i] / nf;
                    let b = bonus(
                        kind,
                        cfg.bonus_scale,
                        BonusInput {
                            n,
                            log,
                            span,
                            var_next: pv2 - pv * pv,
                            var_reward: d.stats.r_sq[i] / nf - rbar * rbar,
                        },
                    );
                    (rbar + pv + b).clamp(lo, hi)
                };
            }
            let row = &values[h][x * N_ACTIONS..(x + 1) * N_ACTIONS];
            let a = argmax(row);
            d.actions[h][x] = a;
            v_cur[x] = row[a];
        }
        std::mem::swap(&mut v_next, &mut v_cur);
    }
}

impl Learner for Ucbvi {
    fn kind(&self) -> AgentKind {
        match self.kind {
            BonusKind::Hoeffding => AgentKind::UcbviHoeffding,
            BonusKind::Bernstein => AgentKind::UcbviBernstein,
            BonusKind::SimplifiedBernstein => AgentKind::UcbviSimplifiedBernstein,
        }
    }

    fn train_step(&mut self, env: &mut OfficeEnv, rngs: &mut RunRngs) -> StepRecord {
        let (kind, cfg) = (self.kind, self.cfg);
        let values = &mut self.values;
        self.d.step(env, rngs, |d, _| plan_ucbvi(d, values, kind, &cfg))
    }

    fn policy(&self) -> Policy {
        self.d.policy()
    }

    fn steps(&self) -> u64 {
        self.d.steps
    }

    fn episodes(&self) -> u64 {
        self.d.episodes
    }
}

/// Dirichlet posterior over next product states (prior concentration 1 on
/// every state) and a normal-gamma posterior over one-step rewards with unit
/// pseudo-observations, per `(x, a)`.
#[derive(Debug, Clone, Copy)]
pub struct PosteriorState<'a> {
    stats: &'a ProductStats,
}

impl<'a> PosteriorState<'a> {
    pub fn new(stats: &'a ProductStats) -> Self {
        PosteriorState { stats }
    }

    pub fn concentration(&self, x: usize, a: ActionId, y: usize) -> f64 {
        1.0 + self.stats.count(x, a, y) as f64
    }

    /// One Dirichlet draw of `P(. | x, a)`, dense over the product.
    pub fn sample_row<R: Rng + ?Sized>(&self, x: usize, a: ActionId, rng: &mut R, out: &mut [f64]) {
        let n_x = self.stats.n_x;
        debug_assert_eq!(out.len(), n_x);
        for v in out.iter_mut() {
            *v = Exp1.sample(rng);
        }
        // Gamma(1 + c) = Exp(1) + Gamma(c) for independent draws.
        for &(y, c) in &self.stats.next[x * N_ACTIONS + a] {
            let g: f64 = Gamma::new(c as f64, 1.0).expect("positive shape").sample(rng);
            out[y] += g;
        }
        let total: f64 = out.iter().sum();
        for v in out.iter_mut() {
            *v /= total;
        }
    }

    /// One draw of the mean reward of `(x, a)`.
    pub fn sample_reward<R: Rng + ?Sized>(&self, x: usize, a: ActionId, rng: &mut R) -> f64 {
        let i = x * N_ACTIONS + a;
        let n = self.stats.n[i] as f64;
        let (mu0, kappa0, alpha0, beta0) = (0.0, 1.0, 1.0, 1.0);
        let (mean, ss) = if n > 0.0 {
            let m = self.stats.r_sum[i] / n;
            (m, (self.stats.r_sq[i] - n * m * m).max(0.0))
        } else {
            (0.0, 0.0)
        };
        let kappa = kappa0 + n;
        let mu = (kappa0 * mu0 + n * mean) / kappa;
        let alpha = alpha0 + n / 2.0;
        let beta = beta0 + 0.5 * ss + kappa0 * n * (mean - mu0) * (mean - mu0) / (2.0 * kappa);
        let tau: f64 = Gamma::new(alpha, 1.0 / beta).expect("positive shape").sample(rng);
        let z: f64 = StandardNormal.sample(rng);
        mu + z / (kappa * tau).sqrt()
    }
}

/// Posterior sampling with an envelope over several samples; with `bonus`
/// set each sample's reward is augmented by the Hoeffding bonus (OPSRL).
#[derive(Debug, Clone)]
pub struct Psrl {
    cfg: EpisodicConfig,
    optimistic: bool,
    d: EpisodeDriver,
    samples: Vec<f64>,
    rewards: Vec<f64>,
}

impl Psrl {
    pub fn new(env: &OfficeEnv, cfg: EpisodicConfig) -> Result<Self, BaselineError> {
        Self::build(env, cfg, false)
    }

    pub fn opsrl(env: &OfficeEnv, cfg: EpisodicConfig) -> Result<Self, BaselineError> {
        Self::build(env, cfg, true)
    }

    /// Bytes of sampled kernels plus concentrations held per episode.
    pub fn storage_bytes(n_joint: u64, n_samples: u64) -> u64 {
        (n_samples + 1)
            .saturating_mul(n_joint)
            .saturating_mul(n_joint)
            .saturating_mul(N_ACTIONS as u64)
            .saturating_mul(8)
    }

    fn build(env: &OfficeEnv, cfg: EpisodicConfig, optimistic: bool) -> Result<Self, BaselineError> {
        cfg.validate()?;
        let n_x = (env.n_states() * env.n_q()) as u64;
        let needed = Self::storage_bytes(n_x, cfg.n_posterior_samples as u64);
        if needed > cfg.byte_cap {
            return Err(BaselineError::MemoryCap { needed, cap: cfg.byte_cap });
        }
        Ok(Psrl {
            cfg,
            optimistic,
            d: EpisodeDriver::new(env, cfg.horizon),
            samples: Vec::new(),
            rewards: Vec::new(),
        })
    }

    pub fn stats(&self) -> &ProductStats {
        &self.d.stats
    }

    pub fn posterior(&self) -> PosteriorState<'_> {
        PosteriorState::new(&self.d.stats)
    }
}

fn plan_psrl(d: &mut EpisodeDriver, samples: &mut Vec<f64>, rewards: &mut Vec<f64>, cfg: &EpisodicConfig, optimistic: bool, rng: &mut (impl Rng + ?Sized)) {
    let n_x = d.stats.n_x;
    let m = cfg.n_posterior_samples;
    let rows = n_x * N_ACTIONS;
    samples.resize(m * rows * n_x, 0.0);
    rewards.resize(m * rows, 0.0);
    let log = d.log_term(cfg.delta);
    let span = d.horizon as f64 * d.r_max.max(-d.r_min).max(f64::MIN_POSITIVE);
    {
        let post = PosteriorState::new(&d.stats);
        for j in 0..m {
            for i in 0..rows {
                let (x, a) = (i / N_ACTIONS, i % N_ACTIONS);
                let off = (j * rows + i) * n_x;
                post.sample_row(x, a, rng, &mut samples[off..off + n_x]);
                let mut r = post.sample_reward(x, a, rng);
                if optimistic {
                    let n = d.stats.n[i].max(1);
                    r += bonus(
                        BonusKind::Hoeffding,
                        cfg.bonus_scale,
                        BonusInput {
                            n,
                            log,
                            span,
                            var_next: 0.0,
                            var_reward: 0.0,
                        },
                    );
                }
                rewards[j * rows + i] = r;
            }
        }
    }
    let mut v_next = vec![0.0; n_x];
    let mut v_cur = vec![0.0; n_x];
    let mut row = [0.0; N_ACTIONS];
    for h in (0..d.horizon).rev() {
        let (lo, hi) = d.clip(h);
        for x in 0..n_x {
            if d.stats.terminal[x] {
                d.actions[h][x] = 0;
                v_cur[x] = 0.0;
                continue;
            }
            for (a, out) in row.iter_mut().enumerate() {
                let i = x * N_ACTIONS + a;
                let mut best = f64::NEG_INFINITY;
                for j in 0..m {
                    let off = (j * rows + i) * n_x;
                    let p = &samples[off..off + n_x];
                    let future: f64 = p.iter().zip(&v_next).map(|(p, v)| p * v).sum();
                    best = best.max(rewards[j * rows + i] + future);
                }
                *out = best.clamp(lo, hi);
            }
            let a = argmax(&row);
            d.actions[h][x] = a;
            v_cur[x] = row[a];
        }
        std::mem::swap(&mut v_next, &mut v_cur);
    }
}

impl Learner for Psrl {
    fn kind(&self) -> AgentKind {
        if self.optimistic {
            AgentKind::Opsrl
        } else {
            AgentKind::Psrl
        }
    }

    fn train_step(&mut self, env: &mut OfficeEnv, rngs: &mut RunRngs) -> StepRecord {
        let (cfg, optimistic) = (self.cfg, self.optimistic);
        let (samples, rewards) = (&mut self.samples, &mut self.rewards);
        self.d.step(env, rngs, |d, rngs| plan_psrl(d, samples, rewards, &cfg, optimistic, &mut rngs.explore))
    }

    fn policy(&self) -> Policy {
        self.d.policy()
    }

    fn steps(&self) -> u64 {
        self.d.steps
    }

    fn episodes(&self) -> u64 {
        self.d.episodes
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn input(n: u64) -> BonusInput {
        BonusInput {
            n,
            log: 3.0,
            span: 10.0,
            var_next: 2.0,
            var_reward: 0.5,
        }
    }

    #[test]
    fn reference_footprints() {
        let z = Sizes {
            states: 225,
            actions: 4,
            q: 8,
            horizon: 250,
        };
        assert_eq!(memory_footprint(AgentKind::QrMax, z).total(), 204_300);
        assert_eq!(memory_footprint(AgentKind::Psrl, z).total(), 50_625_000);
        assert_eq!(memory_footprint(AgentKind::Opsrl, z).total(), 50_625_000);
        let one = Sizes { states: 1, ..z };
        assert_eq!(memory_footprint(AgentKind::QrMax, one).total(), 4 + 8);
    }

    #[test]
    fn hoeffding_halves_from_one_to_four_visits() {
        let b1 = bonus(BonusKind::Hoeffding, 1.0, input(1));
        let b4 = bonus(BonusKind::Hoeffding, 1.0, input(4));
        assert!((b1 / b4 - 2.0).abs() < 1e-12);
    }

    #[test]
    fn bonuses_do_not_grow_with_visits() {
        for kind in [BonusKind::Hoeffding, BonusKind::Bernstein, BonusKind::SimplifiedBernstein] {
            let mut prev = f64::INFINITY;
            for n in 1..200 {
                let b = bonus(kind, 1.0, input(n));
                assert!(b <= prev, "{kind:?} at n={n}");
                prev = b;
            }
        }
    }

    #[test]
    fn agent_ids_round_trip() {
        for k in AgentKind::ALL {
            assert_eq!(k.id().parse::<AgentKind>().unwrap(), k);
        }
        assert!("ucbvi".parse::<AgentKind>().is_err());
    }
}
