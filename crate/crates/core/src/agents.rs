//! Learning agents over the product of an Office-World map and a reward
//! machine: the factorized R-MAX learner and its counterfactual variant,
//! R-MAX on the flat product, Q-learning, QRM and a uniform-random control.
//!
//! Every agent is driven one environment step at a time through [`Learner`],
//! which lets the harness interleave training with frozen-policy evaluation.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::automaton::RewardMachine;
use crate::baselines::{memory_footprint, AgentKind, Footprint, Sizes};
use crate::bucket::BucketPolicy;
use crate::mdp::{
    argmax, flat_value_iteration, value_iteration, ActionId, AutomatonStateId, CountRow, Estimate,
    FactorizedCounts, FactorizedModel, FlatMdp, QTable, StateId, ViStop,
};
use crate::office::{OfficeEnv, N_ACTIONS};
use crate::pac;

/// Independent random streams for one run: environment dynamics, agent-side
/// randomness (exploration, posterior sampling) and observation noise.
#[derive(Debug, Clone)]
pub struct RunRngs {
    pub env: ChaCha8Rng,
    pub explore: ChaCha8Rng,
    pub obs: ChaCha8Rng,
}

impl RunRngs {
    pub fn new(seed: u64) -> Self {
        RunRngs {
            env: stream(seed, 0),
            explore: stream(seed, 1),
            obs: stream(seed, 2),
        }
    }
}

pub fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

/// One logged training step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRecord {
    pub step: u64,
    pub s: StateId,
    pub q: AutomatonStateId,
    pub a: ActionId,
    pub next_s: StateId,
    pub next_q: AutomatonStateId,
    pub r_e: f64,
    pub r_a: f64,
    pub done: bool,
    pub truncated: bool,
    /// Value iteration ran after this step.
    pub model_updated: bool,
}

/// A frozen behaviour for evaluation.
#[derive(Debug, Clone, PartialEq)]
pub enum Policy {
    /// Action per joint state `s * n_q + q`.
    Stationary { n_q: usize, actions: Vec<ActionId> },
    /// Action per step index and joint state; steps past the end reuse the last table.
    Episodic { n_q: usize, actions: Vec<Vec<ActionId>> },
    /// Greedy over buckets of continuous observations.
    Bucketed(BucketPolicy),
    /// Uniformly random actions.
    Random,
}

impl Policy {
    pub fn greedy(qt: &QTable) -> Self {
        Policy::Stationary {
            n_q: qt.n_q(),
            actions: crate::mdp::greedy_policy(qt),
        }
    }

    /// Chooses the action at step `t` of an episode in the environment's
    /// current state.
    pub fn act<R: Rng + ?Sized, O: Rng + ?Sized>(&self, env: &OfficeEnv, t: usize, obs_rng: &mut O, act_rng: &mut R) -> ActionId {
        let (s, q) = env.state();
        match self {
            Policy::Stationary { n_q, actions } => actions[s * n_q + q],
            Policy::Episodic { n_q, actions } => {
                let h = t.min(actions.len() - 1);
                actions[h][s * n_q + q]
            }
            Policy::Bucketed(p) => p.act(env, obs_rng),
            Policy::Random => act_rng.random_range(0..N_ACTIONS),
        }
    }
}

/// Interface shared by all agents.
pub trait Learner: Send {
    fn kind(&self) -> AgentKind;
    /// Executes one environment step, resetting first if the previous episode ended.
    fn train_step(&mut self, env: &mut OfficeEnv, rngs: &mut RunRngs) -> StepRecord;
    fn policy(&self) -> Policy;
    fn steps(&self) -> u64;
    fn episodes(&self) -> u64;
    fn footprint(&self, sizes: Sizes) -> Footprint {
        memory_footprint(self.kind(), sizes)
    }
}

/// Runs `n_steps` training steps, optionally keeping the trace.
pub fn train(agent: &mut dyn Learner, env: &mut OfficeEnv, rngs: &mut RunRngs, n_steps: u64, keep_trace: bool) -> Vec<StepRecord> {
    let mut trace = Vec::new();
    for _ in 0..n_steps {
        let rec = agent.train_step(env, rngs);
        if keep_trace {
            trace.push(rec);
        }
    }
    trace
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QrMaxConfig {
    pub gamma: f64,
    pub r_max: f64,
    pub t_e: u64,
    pub t_q: u64,
    pub vi: ViStop,
}

impl QrMaxConfig {
    /// Practical defaults: `t_E = 30`, `t_Q = 1`, and the value-iteration
    /// horizon from the PAC formula at `epsilon = 0.1`.
    pub fn new(gamma: f64, r_max: f64) -> Self {
        let t = pac::vi_horizon(gamma, 0.1, r_max).expect("valid parameters");
        QrMaxConfig {
            gamma,
            r_max,
            t_e: 30,
            t_q: 1,
            vi: ViStop::Iterations(t as usize),
        }
    }

    pub fn for_machine(gamma: f64, rm: &RewardMachine) -> Self {
        Self::new(gamma, rm.max_reward())
    }

    pub fn with_thresholds(mut self, t_e: u64, t_q: u64) -> Self {
        assert!(t_e >= 1 && t_q >= 1);
        self.t_e = t_e;
        self.t_q = t_q;
        self
    }

    pub fn with_vi(mut self, vi: ViStop) -> Self {
        self.vi = vi;
        self
    }
}

/// Optimistic table, factorized model and terminal set shared by the discrete
/// and bucket learners.
#[derive(Debug, Clone)]
pub struct QrCore {
    pub qt: QTable,
    pub model: FactorizedModel,
    terminal: Vec<bool>,
    vi: ViStop,
    vi_calls: u64,
}

impl QrCore {
    pub fn new(n_states: usize, n_q: usize, n_actions: usize, gamma: f64, r_max: f64, vi: ViStop) -> Self {
        QrCore {
            qt: QTable::optimistic(n_states, n_q, n_actions, gamma, r_max),
            model: FactorizedModel::empty(n_states, n_actions, n_q),
            terminal: vec![false; n_states * n_q],
            vi,
            vi_calls: 0,
        }
    }

    pub fn grow_states(&mut self, n_states: usize) {
        self.qt.grow_states(n_states);
        self.model.grow_states(n_states);
        self.terminal.resize(n_states * self.qt.n_q(), false);
    }

    pub fn act(&self, s: StateId, q: AutomatonStateId) -> ActionId {
        self.qt.greedy(s, q)
    }

    pub fn mark_terminal(&mut self, s: StateId, q: AutomatonStateId) {
        let x = self.qt.joint(s, q);
        if !self.terminal[x] {
            self.terminal[x] = true;
            self.qt.zero_state(s, q);
        }
    }

    pub fn is_terminal(&self, s: StateId, q: AutomatonStateId) -> bool {
        self.terminal[self.qt.joint(s, q)]
    }

    pub fn terminal_mask(&self) -> &[bool] {
        &self.terminal
    }

    pub fn plan(&mut self) {
        self.vi_calls += 1;
        value_iteration(&mut self.qt, &self.model, self.vi, &self.terminal);
    }

    pub fn vi_calls(&self) -> u64 {
        self.vi_calls
    }
}

/// The factorized learner. With a machine attached it tracks the automaton
/// state itself and replays every observed `(s, a, s')` through all automaton
/// states (the counterfactual variant); otherwise it reads `q` from the
/// environment and learns automaton transitions only from the ones it visits.
#[derive(Debug, Clone)]
pub struct QrMax {
    cfg: QrMaxConfig,
    core: QrCore,
    counts: FactorizedCounts,
    rm: Option<Arc<RewardMachine>>,
    current: Option<(StateId, AutomatonStateId)>,
    steps: u64,
    episodes: u64,
}

impl QrMax {
    pub fn new(env: &OfficeEnv, cfg: QrMaxConfig) -> Self {
        let (ns, nq) = (env.n_states(), env.n_q());
        QrMax {
            cfg,
            core: QrCore::new(ns, nq, N_ACTIONS, cfg.gamma, cfg.r_max, cfg.vi),
            counts: FactorizedCounts::new(ns, N_ACTIONS, nq),
            rm: None,
            current: None,
            steps: 0,
            episodes: 0,
        }
    }

    /// The counterfactual variant, given the task machine.
    pub fn with_machine(env: &OfficeEnv, cfg: QrMaxConfig) -> Self {
        let mut agent = Self::new(env, cfg);
        agent.rm = Some(env.machine().clone());
        agent
    }

    pub fn config(&self) -> &QrMaxConfig {
        &self.cfg
    }

    pub fn q_table(&self) -> &QTable {
        &self.core.qt
    }

    pub fn counts(&self) -> &FactorizedCounts {
        &self.counts
    }

    pub fn model(&self) -> &FactorizedModel {
        &self.core.model
    }

    pub fn core(&self) -> &QrCore {
        &self.core
    }

    pub fn vi_calls(&self) -> u64 {
        self.core.vi_calls()
    }

    fn record_aut(&mut self, q: AutomatonStateId, s2: StateId, q2: AutomatonStateId, r: f64) -> bool {
        if self.counts.n_aut(q, s2) < self.cfg.t_q && self.counts.record_aut(q, s2, q2, r) == self.cfg.t_q {
            self.core.model.set_aut(q, s2, Estimate::from_row(self.counts.aut_row(q, s2)));
            return true;
        }
        false
    }
}

impl Learner for QrMax {
    fn kind(&self) -> AgentKind {
        if self.rm.is_some() {
            AgentKind::QrMaxRm
        } else {
            AgentKind::QrMax
        }
    }

    fn train_step(&mut self, env: &mut OfficeEnv, rngs: &mut RunRngs) -> StepRecord {
        let (s, q) = match self.current {
            Some(x) => x,
            None => {
                self.episodes += 1;
                let (s0, q0) = env.reset();
                match &self.rm {
                    Some(rm) => (s0, rm.step_id(rm.initial(), env.label_of(s0)).next),
                    None => (s0, q0),
                }
            }
        };
        let a = self.core.act(s, q);
        let st = env.step(a, &mut rngs.env).expect("episode is live");
        let s2 = st.next_state;
        let mut do_vi = false;
        if self.counts.n_env(s, a) < self.cfg.t_e && self.counts.record_env(s, a, s2, st.r_e) == self.cfg.t_e {
            self.core.model.set_env(s, a, Estimate::from_row(self.counts.env_row(s, a)));
            do_vi = true;
        }
        let (q2, r_a) = match self.rm.clone() {
            None => {
                do_vi |= self.record_aut(q, s2, st.next_q, st.r_a);
                if st.terminal() {
                    self.core.mark_terminal(s2, st.next_q);
                }
                (st.next_q, st.r_a)
            }
            Some(rm) => {
                let label = env.label_of(s2);
                for qc in 0..rm.num_states() {
                    let tr = rm.step_id(qc, label);
                    do_vi |= self.record_aut(qc, s2, tr.next, tr.reward);
                    if rm.is_terminal(tr.next) {
                        self.core.mark_terminal(s2, tr.next);
                    }
                }
                let tr = rm.step_id(q, label);
                (tr.next, tr.reward)
            }
        };
        if do_vi {
            self.core.plan();
        }
        self.steps += 1;
        self.current = if st.done { None } else { Some((s2, q2)) };
        StepRecord {
            step: self.steps,
            s,
            q,
            a,
            next_s: s2,
            next_q: q2,
            r_e: st.r_e,
            r_a,
            done: st.done,
            truncated: st.truncated,
            model_updated: do_vi,
        }
    }

    fn policy(&self) -> Policy {
        Policy::greedy(&self.core.qt)
    }

    fn steps(&self) -> u64 {
        self.steps
    }

    fn episodes(&self) -> u64 {
        self.episodes
    }
}

/// R-MAX on the flat product `S x Q`: one counter per `((s, q), a)`. With a
/// machine attached, each observed environment transition is replayed through
/// every automaton state.
#[derive(Debug, Clone)]
pub struct RMax {
    gamma: f64,
    t_e: u64,
    vi: ViStop,
    n_q: usize,
    rm: Option<Arc<RewardMachine>>,
    counts: Vec<CountRow>,
    flat: FlatMdp,
    q: Vec<f64>,
    terminal: Vec<bool>,
    current: Option<(StateId, AutomatonStateId)>,
    steps: u64,
    episodes: u64,
    vi_calls: u64,
}

impl RMax {
    pub fn new(env: &OfficeEnv, cfg: QrMaxConfig) -> Self {
        let n_q = env.n_q();
        let nx = env.n_states() * n_q;
        RMax {
            gamma: cfg.gamma,
            t_e: cfg.t_e,
            vi: cfg.vi,
            n_q,
            rm: None,
            counts: vec![CountRow::default(); nx * N_ACTIONS],
            flat: FlatMdp::new(nx, N_ACTIONS),
            q: vec![cfg.r_max / (1.0 - cfg.gamma); nx * N_ACTIONS],
            terminal: vec![false; nx],
            current: None,
            steps: 0,
            episodes: 0,
            vi_calls: 0,
        }
    }

    pub fn with_machine(env: &OfficeEnv, cfg: QrMaxConfig) -> Self {
        let mut agent = Self::new(env, cfg);
        agent.rm = Some(env.machine().clone());
        agent
    }

    pub fn values(&self) -> &[f64] {
        &self.q
    }

    pub fn known_pairs(&self) -> usize {
        self.flat.rows.iter().filter(|r| r.is_some()).count()
    }

    pub fn vi_calls(&self) -> u64 {
        self.vi_calls
    }

    fn record(&mut self, x: usize, a: ActionId, y: usize, r: f64) -> bool {
        let i = x * N_ACTIONS + a;
        if self.counts[i].n() < self.t_e && self.counts[i].record(y, r) == self.t_e {
            let row = &self.counts[i];
            let n = row.n() as f64;
            let entries = row.entries().map(|(y, t, rho)| (y, t as f64 / n, rho / t as f64)).collect();
            self.flat.set_row(x, a, entries);
            return true;
        }
        false
    }

    fn mark_terminal(&mut self, x: usize) {
        if !self.terminal[x] {
            self.terminal[x] = true;
            self.q[x * N_ACTIONS..(x + 1) * N_ACTIONS].fill(0.0);
        }
    }
}

impl Learner for RMax {
    fn kind(&self) -> AgentKind {
        if self.rm.is_some() {
            AgentKind::RMaxRm
        } else {
            AgentKind::RMax
        }
    }

    fn train_step(&mut self, env: &mut OfficeEnv, rngs: &mut RunRngs) -> StepRecord {
        let nq = self.n_q;
        let (s, q) = match self.current {
            Some(x) => x,
            None => {
                self.episodes += 1;
                let (s0, q0) = env.reset();
                match &self.rm {
                    Some(rm) => (s0, rm.step_id(rm.initial(), env.label_of(s0)).next),
                    None => (s0, q0),
                }
            }
        };
        let x = s * nq + q;
        let a = argmax(&self.q[x * N_ACTIONS..(x + 1) * N_ACTIONS]);
        let st = env.step(a, &mut rngs.env).expect("episode is live");
        let s2 = st.next_state;
        let mut do_vi = false;
        let (q2, r_a) = match self.rm.clone() {
            None => {
                do_vi |= self.record(x, a, s2 * nq + st.next_q, st.reward());
                if st.terminal() {
                    self.mark_terminal(s2 * nq + st.next_q);
                }
                (st.next_q, st.r_a)
            }
            Some(rm) => {
                let label = env.label_of(s2);
                for qc in 0..nq {
                    let tr = rm.step_id(qc, label);
                    if rm.is_terminal(qc) {
                        continue;
                    }
                    do_vi |= self.record(s * nq + qc, a, s2 * nq + tr.next, st.r_e + tr.reward);
                    if rm.is_terminal(tr.next) {
                        self.mark_terminal(s2 * nq + tr.next);
                    }
                }
                let tr = rm.step_id(q, label);
                (tr.next, tr.reward)
            }
        };
        if do_vi {
            self.vi_calls += 1;
            flat_value_iteration(&mut self.q, &self.flat, self.gamma, &self.terminal, self.vi);
        }
        self.steps += 1;
        self.current = if st.done { None } else { Some((s2, q2)) };
        StepRecord {
            step: self.steps,
            s,
            q,
            a,
            next_s: s2,
            next_q: q2,
            r_e: st.r_e,
            r_a,
            done: st.done,
            truncated: st.truncated,
            model_updated: do_vi,
        }
    }

    fn policy(&self) -> Policy {
        let actions = self.q.chunks(N_ACTIONS).map(argmax).collect();
        Policy::Stationary { n_q: self.n_q, actions }
    }

    fn steps(&self) -> u64 {
        self.steps
    }

    fn episodes(&self) -> u64 {
        self.episodes
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QLearningConfig {
    pub gamma: f64,
    pub alpha: f64,
    pub epsilon: f64,
}

impl Default for QLearningConfig {
    fn default() -> Self {
        QLearningConfig {
            gamma: 0.9,
            alpha: 0.1,
            epsilon: 0.1,
        }
    }
}

/// Tabular epsilon-greedy Q-learning over joint states, zero-initialised.
/// With a machine attached (QRM) every update is repeated for all live
/// automaton states.
#[derive(Debug, Clone)]
pub struct QLearning {
    cfg: QLearningConfig,
    qt: QTable,
    rm: Option<Arc<RewardMachine>>,
    current: Option<(StateId, AutomatonStateId)>,
    steps: u64,
    episodes: u64,
}

impl QLearning {
    pub fn new(env: &OfficeEnv, cfg: QLearningConfig) -> Self {
        QLearning {
            cfg,
            qt: QTable::filled(env.n_states(), env.n_q(), N_ACTIONS, cfg.gamma, 1.0, 0.0),
            rm: None,
            current: None,
            steps: 0,
            episodes: 0,
        }
    }

    pub fn with_machine(env: &OfficeEnv, cfg: QLearningConfig) -> Self {
        let mut agent = Self::new(env, cfg);
        agent.rm = Some(env.machine().clone());
        agent
    }

    pub fn q_table(&self) -> &QTable {
        &self.qt
    }

    /// Epsilon-greedy with uniform tie-breaking among maximisers.
    fn choose<R: Rng + ?Sized>(&self, s: StateId, q: AutomatonStateId, rng: &mut R) -> ActionId {
        if rng.random::<f64>() < self.cfg.epsilon {
            return rng.random_range(0..N_ACTIONS);
        }
        let row = self.qt.row(s, q);
        let best = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let ties: Vec<ActionId> = (0..N_ACTIONS).filter(|&a| row[a] == best).collect();
        if ties.len() == 1 {
            ties[0]
        } else {
            ties[rng.random_range(0..ties.len())]
        }
    }

    fn update(&mut self, s: StateId, q: AutomatonStateId, a: ActionId, r: f64, s2: StateId, q2: AutomatonStateId, terminal: bool) {
        let target = if terminal { r } else { r + self.cfg.gamma * self.qt.max(s2, q2) };
        let old = self.qt.get(s, q, a);
        self.qt.set(s, q, a, old + self.cfg.alpha * (target - old));
    }
}

impl Learner for QLearning {
    fn kind(&self) -> AgentKind {
        if self.rm.is_some() {
            AgentKind::Qrm
        } else {
            AgentKind::QLearning
        }
    }

    fn train_step(&mut self, env: &mut OfficeEnv, rngs: &mut RunRngs) -> StepRecord {
        let (s, q) = match self.current {
            Some(x) => x,
            None => {
                self.episodes += 1;
                let (s0, q0) = env.reset();
                match &self.rm {
                    Some(rm) => (s0, rm.step_id(rm.initial(), env.label_of(s0)).next),
                    None => (s0, q0),
                }
            }
        };
        let a = self.choose(s, q, &mut rngs.explore);
        let st = env.step(a, &mut rngs.env).expect("episode is live");
        let s2 = st.next_state;
        let (q2, r_a) = match self.rm.clone() {
            None => {
                self.update(s, q, a, st.reward(), s2, st.next_q, st.terminal());
                (st.next_q, st.r_a)
            }
            Some(rm) => {
                let label = env.label_of(s2);
                for qc in 0..rm.num_states() {
                    if rm.is_terminal(qc) {
                        continue;
                    }
                    let tr = rm.step_id(qc, label);
                    self.update(s, qc, a, st.r_e + tr.reward, s2, tr.next, rm.is_terminal(tr.next));
                }
                let tr = rm.step_id(q, label);
                (tr.next, tr.reward)
            }
        };
        self.steps += 1;
        self.current = if st.done { None } else { Some((s2, q2)) };
        StepRecord {
            step: self.steps,
            s,
            q,
            a,
            next_s: s2,
            next_q: q2,
            r_e: st.r_e,
            r_a,
            done: st.done,
            truncated: st.truncated,
            model_updated: false,
        }
    }

    fn policy(&self) -> Policy {
        Policy::greedy(&self.qt)
    }

    fn steps(&self) -> u64 {
        self.steps
    }

    fn episodes(&self) -> u64 {
        self.episodes
    }
}

/// Uniformly random actions; its evaluation policy is random as well.
#[derive(Debug, Clone, Default)]
pub struct RandomAgent {
    live: bool,
    steps: u64,
    episodes: u64,
}

impl RandomAgent {
    pub fn new() -> Self {
        Self::default()
    }
}

impl Learner for RandomAgent {
    fn kind(&self) -> AgentKind {
        AgentKind::Random
    }

    fn train_step(&mut self, env: &mut OfficeEnv, rngs: &mut RunRngs) -> StepRecord {
        if !self.live {
            self.episodes += 1;
            env.reset();
        }
        let (s, q) = env.state();
        let a = rngs.explore.random_range(0..N_ACTIONS);
        let st = env.step(a, &mut rngs.env).expect("episode is live");
        self.steps += 1;
        self.live = !st.done;
        StepRecord {
            step: self.steps,
            s,
            q,
            a,
            next_s: st.next_state,
            next_q: st.next_q,
            r_e: st.r_e,
            r_a: st.r_a,
            done: st.done,
            truncated: st.truncated,
            model_updated: false,
        }
    }

    fn policy(&self) -> Policy {
        Policy::Random
    }

    fn steps(&self) -> u64 {
        self.steps
    }

    fn episodes(&self) -> u64 {
        self.episodes
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::office::{builtin_env, GridMap};

    fn corridor() -> OfficeEnv {
        let map: GridMap = "h: 1\nstart: 0 0\n..O\n".parse().unwrap();
        let rm: RewardMachine = "states: q0 acc\ninitial: q0\naccepting: acc\nalphabet: office\ntrans: q0 office acc 1\n"
            .parse()
            .unwrap();
        OfficeEnv::new(Arc::new(map), Arc::new(rm))
    }

    #[test]
    fn zero_steps_leave_everything_untouched() {
        let env = corridor();
        let agent = QrMax::new(&env, QrMaxConfig::new(0.9, 1.0));
        assert!(agent.counts().is_empty());
        let v = agent.q_table().optimistic_value();
        assert!(agent.q_table().values().iter().all(|&x| x == v));
    }

    #[test]
    fn corridor_learns_to_walk_right() {
        let mut env = corridor();
        let cfg = QrMaxConfig::new(0.9, 1.0).with_thresholds(1, 1).with_vi(ViStop::Iterations(500));
        let mut agent = QrMax::new(&env, cfg);
        let mut rngs = RunRngs::new(3);
        train(&mut agent, &mut env, &mut rngs, 200, false);
        let qt = agent.q_table();
        let q0 = env.machine().initial();
        assert_eq!(qt.greedy(0, q0), 1);
        assert_eq!(qt.greedy(1, q0), 1);
        assert!((qt.max(0, q0) - 0.9).abs() < 1e-6);
        assert!((qt.max(1, q0) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn counterfactual_step_knows_every_automaton_state() {
        let mut env = corridor();
        let cfg = QrMaxConfig::new(0.9, 1.0).with_thresholds(1, 1);
        let mut agent = QrMax::with_machine(&env, cfg);
        let mut rngs = RunRngs::new(0);
        let rec = agent.train_step(&mut env, &mut rngs);
        for q in 0..2 {
            assert!(agent.model().known_aut(q, rec.next_s));
        }
    }

    #[test]
    fn zero_learning_rate_never_changes_table() {
        let mut env = builtin_env("map0_desk", "0").unwrap();
        let cfg = QLearningConfig {
            alpha: 0.0,
            ..Default::default()
        };
        let mut agent = QLearning::new(&env, cfg);
        train(&mut agent, &mut env, &mut RunRngs::new(1), 2000, false);
        assert!(agent.q_table().values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn single_td_update() {
        let env = corridor();
        let mut agent = QLearning::new(&env, QLearningConfig::default());
        agent.update(1, 0, 1, 1.0, 2, 1, true);
        assert!((agent.q_table().get(1, 0, 1) - 0.1).abs() < 1e-15);
    }
}
