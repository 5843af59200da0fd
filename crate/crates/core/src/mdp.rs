//! Tabular models: empirical counts for the factorized environment/automaton
//! model, the estimates derived from them, the flat product kernel, and value
//! iteration over both representations.
//!
//! Joint states `(s, q)` are flattened as `s * n_q + q`. Automaton counters
//! are keyed by `(s', q)` and stored as `s' * n_q + q` so that the state set
//! can grow (the bucket agent discovers states on the fly).

use std::io;

use thiserror::Error;

pub type StateId = usize;
pub type ActionId = usize;
pub type AutomatonStateId = usize;

/// Sparse count row: successors in first-seen order with visit counts and
/// summed rewards.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CountRow {
    next: Vec<usize>,
    tau: Vec<u64>,
    rho: Vec<f64>,
    n: u64,
    reward_total: f64,
}

impl CountRow {
    pub fn record(&mut self, next: usize, reward: f64) -> u64 {
        match self.next.iter().position(|&x| x == next) {
            Some(i) => {
                self.tau[i] += 1;
                self.rho[i] += reward;
            }
            None => {
                self.next.push(next);
                self.tau.push(1);
                self.rho.push(reward);
            }
        }
        self.n += 1;
        self.reward_total += reward;
        self.n
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    /// Summed reward over all visits.
    pub fn reward_total(&self) -> f64 {
        self.reward_total
    }

    /// `(successor, tau, rho)` in first-seen order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, u64, f64)> + '_ {
        self.next
            .iter()
            .zip(&self.tau)
            .zip(&self.rho)
            .map(|((&x, &t), &r)| (x, t, r))
    }

    pub fn tau(&self, next: usize) -> u64 {
        self.next.iter().position(|&x| x == next).map_or(0, |i| self.tau[i])
    }

    pub fn rho(&self, next: usize) -> f64 {
        self.next.iter().position(|&x| x == next).map_or(0.0, |i| self.rho[i])
    }

    pub fn support_len(&self) -> usize {
        self.next.len()
    }
}

/// Visit statistics for the factorized model: environment rows over `(s, a)`
/// and automaton rows over `(q, s')`.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorizedCounts {
    n_states: usize,
    n_actions: usize,
    n_q: usize,
    env: Vec<CountRow>,
    aut: Vec<CountRow>,
}

impl FactorizedCounts {
    pub fn new(n_states: usize, n_actions: usize, n_q: usize) -> Self {
        FactorizedCounts {
            n_states,
            n_actions,
            n_q,
            env: vec![CountRow::default(); n_states * n_actions],
            aut: vec![CountRow::default(); n_states * n_q],
        }
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    pub fn n_q(&self) -> usize {
        self.n_q
    }

    /// Appends rows for newly discovered states.
    pub fn grow_states(&mut self, n_states: usize) {
        if n_states > self.n_states {
            self.n_states = n_states;
            self.env.resize(n_states * self.n_actions, CountRow::default());
            self.aut.resize(n_states * self.n_q, CountRow::default());
        }
    }

    /// Records `(s, a) -> s'` with environment reward `r`; returns the new `n_E(s, a)`.
    pub fn record_env(&mut self, s: StateId, a: ActionId, next: StateId, r: f64) -> u64 {
        self.env[s * self.n_actions + a].record(next, r)
    }

    /// Records `(q, s') -> q'` with automaton reward `r`; returns the new `n_Q(q, s')`.
    pub fn record_aut(&mut self, q: AutomatonStateId, next_s: StateId, next_q: AutomatonStateId, r: f64) -> u64 {
        self.aut[next_s * self.n_q + q].record(next_q, r)
    }

    pub fn env_row(&self, s: StateId, a: ActionId) -> &CountRow {
        &self.env[s * self.n_actions + a]
    }

    pub fn aut_row(&self, q: AutomatonStateId, next_s: StateId) -> &CountRow {
        &self.aut[next_s * self.n_q + q]
    }

    pub fn n_env(&self, s: StateId, a: ActionId) -> u64 {
        self.env_row(s, a).n
    }

    pub fn n_aut(&self, q: AutomatonStateId, next_s: StateId) -> u64 {
        self.aut_row(q, next_s).n
    }

    pub fn total_env_visits(&self) -> u64 {
        self.env.iter().map(|r| r.n).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.env.iter().all(|r| r.n == 0) && self.aut.iter().all(|r| r.n == 0)
    }
}

/// Estimated conditional distribution for one known pair.
#[derive(Debug, Clone, PartialEq)]
pub struct Estimate {
    /// `(successor, probability, probability-weighted reward)` in first-seen order.
    pub next: Vec<(usize, f64, f64)>,
    /// Expected one-step reward, `Σ rho / n`.
    pub reward: f64,
}

impl Estimate {
    pub fn from_row(row: &CountRow) -> Self {
        let n = row.n as f64;
        Estimate {
            next: row.entries().map(|(x, t, r)| (x, t as f64 / n, r / n)).collect(),
            reward: row.reward_total / n,
        }
    }

    pub fn prob(&self, next: usize) -> f64 {
        self.next.iter().find(|e| e.0 == next).map_or(0.0, |e| e.1)
    }

    pub fn rbar(&self, next: usize) -> f64 {
        self.next.iter().find(|e| e.0 == next).map_or(0.0, |e| e.2)
    }
}

/// Empirical factorized model: `None` marks pairs that are not yet known.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorizedModel {
    n_states: usize,
    n_actions: usize,
    n_q: usize,
    env: Vec<Option<Estimate>>,
    aut: Vec<Option<Estimate>>,
}

impl FactorizedModel {
    pub fn empty(n_states: usize, n_actions: usize, n_q: usize) -> Self {
        FactorizedModel {
            n_states,
            n_actions,
            n_q,
            env: vec![None; n_states * n_actions],
            aut: vec![None; n_states * n_q],
        }
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    pub fn n_q(&self) -> usize {
        self.n_q
    }

    pub fn grow_states(&mut self, n_states: usize) {
        if n_states > self.n_states {
            self.n_states = n_states;
            self.env.resize(n_states * self.n_actions, None);
            self.aut.resize(n_states * self.n_q, None);
        }
    }

    pub fn set_env(&mut self, s: StateId, a: ActionId, est: Estimate) {
        self.env[s * self.n_actions + a] = Some(est);
    }

    pub fn set_aut(&mut self, q: AutomatonStateId, next_s: StateId, est: Estimate) {
        self.aut[next_s * self.n_q + q] = Some(est);
    }

    pub fn env(&self, s: StateId, a: ActionId) -> Option<&Estimate> {
        self.env[s * self.n_actions + a].as_ref()
    }

    pub fn aut(&self, q: AutomatonStateId, next_s: StateId) -> Option<&Estimate> {
        self.aut[next_s * self.n_q + q].as_ref()
    }

    pub fn known_env(&self, s: StateId, a: ActionId) -> bool {
        self.env(s, a).is_some()
    }

    pub fn known_aut(&self, q: AutomatonStateId, next_s: StateId) -> bool {
        self.aut(q, next_s).is_some()
    }

    pub fn is_fully_known(&self) -> bool {
        self.env.iter().all(Option::is_some) && self.aut.iter().all(Option::is_some)
    }

    /// `(s, q, a)` may be backed up: `(s, a)` is known and so is every
    /// `(q, s')` with `s'` in its observed support.
    pub fn eligible(&self, s: StateId, q: AutomatonStateId, a: ActionId) -> bool {
        match self.env(s, a) {
            Some(est) => est.next.iter().all(|&(s2, _, _)| self.known_aut(q, s2)),
            None => false,
        }
    }
}

/// Builds the model whose known pairs are those with `n >= threshold`.
pub fn estimates_from_counts(counts: &FactorizedCounts, t_e: u64, t_q: u64) -> FactorizedModel {
    assert!(t_e >= 1 && t_q >= 1, "thresholds must be at least 1");
    let mut model = FactorizedModel::empty(counts.n_states, counts.n_actions, counts.n_q);
    for (i, row) in counts.env.iter().enumerate() {
        if row.n >= t_e {
            model.env[i] = Some(Estimate::from_row(row));
        }
    }
    for (i, row) in counts.aut.iter().enumerate() {
        if row.n >= t_q {
            model.aut[i] = Some(Estimate::from_row(row));
        }
    }
    model
}

/// Action values over joint states.
#[derive(Debug, Clone, PartialEq)]
pub struct QTable {
    n_states: usize,
    n_q: usize,
    n_actions: usize,
    gamma: f64,
    r_max: f64,
    values: Vec<f64>,
}

impl QTable {
    /// Every entry starts at the optimistic value `r_max / (1 - gamma)`.
    pub fn optimistic(n_states: usize, n_q: usize, n_actions: usize, gamma: f64, r_max: f64) -> Self {
        assert!((0.0..1.0).contains(&gamma), "gamma must lie in [0, 1)");
        let v = r_max / (1.0 - gamma);
        Self::filled(n_states, n_q, n_actions, gamma, r_max, v)
    }

    pub fn filled(n_states: usize, n_q: usize, n_actions: usize, gamma: f64, r_max: f64, v: f64) -> Self {
        QTable {
            n_states,
            n_q,
            n_actions,
            gamma,
            r_max,
            values: vec![v; n_states * n_q * n_actions],
        }
    }

    pub fn optimistic_value(&self) -> f64 {
        self.r_max / (1.0 - self.gamma)
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn n_q(&self) -> usize {
        self.n_q
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    pub fn n_joint(&self) -> usize {
        self.n_states * self.n_q
    }

    /// Appends optimistic rows for newly discovered states.
    pub fn grow_states(&mut self, n_states: usize) {
        if n_states > self.n_states {
            let v = self.optimistic_value();
            self.n_states = n_states;
            self.values.resize(n_states * self.n_q * self.n_actions, v);
        }
    }

    #[inline]
    pub fn joint(&self, s: StateId, q: AutomatonStateId) -> usize {
        s * self.n_q + q
    }

    #[inline]
    pub fn get(&self, s: StateId, q: AutomatonStateId, a: ActionId) -> f64 {
        self.values[(s * self.n_q + q) * self.n_actions + a]
    }

    #[inline]
    pub fn set(&mut self, s: StateId, q: AutomatonStateId, a: ActionId, v: f64) {
        self.values[(s * self.n_q + q) * self.n_actions + a] = v;
    }

    pub fn row(&self, s: StateId, q: AutomatonStateId) -> &[f64] {
        let start = (s * self.n_q + q) * self.n_actions;
        &self.values[start..start + self.n_actions]
    }

    pub fn row_mut(&mut self, s: StateId, q: AutomatonStateId) -> &mut [f64] {
        let start = (s * self.n_q + q) * self.n_actions;
        &mut self.values[start..start + self.n_actions]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Zeroes all actions of a terminal joint state.
    pub fn zero_state(&mut self, s: StateId, q: AutomatonStateId) {
        self.row_mut(s, q).fill(0.0);
    }

    pub fn greedy(&self, s: StateId, q: AutomatonStateId) -> ActionId {
        argmax(self.row(s, q))
    }

    pub fn max(&self, s: StateId, q: AutomatonStateId) -> f64 {
        self.row(s, q).iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn max_abs_diff(&self, other: &QTable) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Index of the first maximal entry.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Greedy action for every joint state, indexed `s * n_q + q`.
pub fn greedy_policy(qt: &QTable) -> Vec<ActionId> {
    (0..qt.n_states)
        .flat_map(|s| (0..qt.n_q).map(move |q| (s, q)))
        .map(|(s, q)| qt.greedy(s, q))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ViStop {
    /// Exactly this many synchronous sweeps (fewer when a sweep changes nothing).
    Iterations(usize),
    /// Sweep until the max-norm change drops to `epsilon`, at most `max_iter` times.
    Tolerance { epsilon: f64, max_iter: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ViReport {
    pub sweeps: usize,
    pub residual: f64,
}

struct Backup {
    s: usize,
    q: usize,
    a: usize,
    reward: f64,
}

/// Synchronous value iteration over the factorized model.
///
/// Only eligible entries are backed up (see [`FactorizedModel::eligible`]);
/// joint states flagged in `terminal` are neither backed up nor valued.
pub fn value_iteration(qt: &mut QTable, model: &FactorizedModel, stop: ViStop, terminal: &[bool]) -> ViReport {
    value_iteration_with(qt, model, stop, terminal, |_| {})
}

/// As [`value_iteration`], reporting the residual of every sweep.
pub fn value_iteration_with(
    qt: &mut QTable,
    model: &FactorizedModel,
    stop: ViStop,
    terminal: &[bool],
    mut on_sweep: impl FnMut(f64),
) -> ViReport {
    let n_q = qt.n_q;
    let n_joint = qt.n_joint();
    debug_assert!(terminal.len() >= n_joint);
    let mut backups = Vec::new();
    for s in 0..qt.n_states.min(model.n_states) {
        for q in 0..n_q {
            if terminal[s * n_q + q] {
                continue;
            }
            for a in 0..qt.n_actions {
                let Some(env) = model.env(s, a) else { continue };
                let mut reward = env.reward;
                let mut ok = true;
                for &(s2, p, _) in &env.next {
                    match model.aut(q, s2) {
                        Some(aut) => reward += p * aut.reward,
                        None => {
                            ok = false;
                            break;
                        }
                    }
                }
                if ok {
                    backups.push(Backup { s, q, a, reward });
                }
            }
        }
    }
    let (max_iter, epsilon) = match stop {
        ViStop::Iterations(t) => (t, None),
        ViStop::Tolerance { epsilon, max_iter } => (max_iter, Some(epsilon)),
    };
    let gamma = qt.gamma;
    let mut values = vec![0.0; n_joint];
    let mut report = ViReport {
        sweeps: 0,
        residual: 0.0,
    };
    if backups.is_empty() {
        return report;
    }
    let mut fresh = vec![0.0; backups.len()];
    for _ in 0..max_iter {
        for (x, v) in values.iter_mut().enumerate() {
            *v = if terminal[x] {
                0.0
            } else {
                qt.max(x / n_q, x % n_q)
            };
        }
        for (b, out) in backups.iter().zip(fresh.iter_mut()) {
            let env = model.env(b.s, b.a).expect("eligible");
            let mut future = 0.0;
            for &(s2, p, _) in &env.next {
                let aut = model.aut(b.q, s2).expect("eligible");
                let mut inner = 0.0;
                for &(q2, pq, _) in &aut.next {
                    inner += pq * values[s2 * n_q + q2];
                }
                future += p * inner;
            }
            *out = b.reward + gamma * future;
        }
        let mut residual: f64 = 0.0;
        for (b, &v) in backups.iter().zip(&fresh) {
            let old = qt.get(b.s, b.q, b.a);
            residual = residual.max((v - old).abs());
            qt.set(b.s, b.q, b.a, v);
        }
        report.sweeps += 1;
        report.residual = residual;
        on_sweep(residual);
        // A sweep that changes nothing has reached the fixed point of the
        // synchronous operator; further sweeps would reproduce it exactly.
        if residual == 0.0 || epsilon.is_some_and(|e| residual <= e) {
            break;
        }
    }
    report
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ModelError {
    #[error("environment pair (s={s}, a={a}) is not known")]
    UnknownEnvPair { s: usize, a: usize },
    #[error("automaton pair (q={q}, s'={s}) is not known")]
    UnknownAutPair { q: usize, s: usize },
}

/// One `(successor, probability, reward)` row per `(state, action)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FlatMdp {
    pub n_states: usize,
    pub n_actions: usize,
    /// Rows indexed `x * n_actions + a`; `None` marks unknown pairs.
    pub rows: Vec<Option<Vec<(usize, f64, f64)>>>,
}

impl FlatMdp {
    pub fn new(n_states: usize, n_actions: usize) -> Self {
        FlatMdp {
            n_states,
            n_actions,
            rows: vec![None; n_states * n_actions],
        }
    }

    pub fn row(&self, x: usize, a: usize) -> Option<&[(usize, f64, f64)]> {
        self.rows[x * self.n_actions + a].as_deref()
    }

    pub fn set_row(&mut self, x: usize, a: usize, row: Vec<(usize, f64, f64)>) {
        self.rows[x * self.n_actions + a] = Some(row);
    }

    /// Dense probability of `x -> y` under `a`.
    pub fn prob(&self, x: usize, a: usize, y: usize) -> f64 {
        self.row(x, a)
            .map_or(0.0, |r| r.iter().filter(|e| e.0 == y).map(|e| e.1).sum())
    }

    /// Writes `state,action,nextstate,prob,reward` rows.
    pub fn write_csv<W: io::Write>(&self, w: W) -> csv::Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["state", "action", "nextstate", "prob", "reward"])?;
        for x in 0..self.n_states {
            for a in 0..self.n_actions {
                for &(y, p, r) in self.row(x, a).unwrap_or(&[]) {
                    out.serialize((x, a, y, p, r))?;
                }
            }
        }
        out.flush()?;
        Ok(())
    }
}

/// Flattens a fully known factorized model into the product kernel
/// `P(s',q'|s,q,a) = P(s'|s,a) P(q'|q,s')` with reward `R_E(s,a,s') + R_A(q,s',q')`.
pub fn product_kernel(model: &FactorizedModel) -> Result<FlatMdp, ModelError> {
    let n_q = model.n_q;
    let mut flat = FlatMdp::new(model.n_states * n_q, model.n_actions);
    for s in 0..model.n_states {
        for a in 0..model.n_actions {
            if model.env(s, a).is_none() {
                return Err(ModelError::UnknownEnvPair { s, a });
            }
        }
        for q in 0..n_q {
            if model.aut(q, s).is_none() {
                return Err(ModelError::UnknownAutPair { q, s });
            }
        }
    }
    for s in 0..model.n_states {
        for q in 0..n_q {
            for a in 0..model.n_actions {
                let env = model.env(s, a).expect("checked");
                let mut row = Vec::new();
                for &(s2, p, rbar) in &env.next {
                    let r_env = rbar / p;
                    let aut = model.aut(q, s2).expect("checked");
                    for &(q2, pq, rbar_q) in &aut.next {
                        row.push((s2 * n_q + q2, p * pq, r_env + rbar_q / pq));
                    }
                }
                flat.set_row(s * n_q + q, a, row);
            }
        }
    }
    Ok(flat)
}

/// Synchronous value iteration on a flat kernel. Unknown rows and terminal
/// states keep their current values; terminal states are valued 0.
pub fn flat_value_iteration(
    q: &mut [f64],
    mdp: &FlatMdp,
    gamma: f64,
    terminal: &[bool],
    stop: ViStop,
) -> ViReport {
    let na = mdp.n_actions;
    assert_eq!(q.len(), mdp.n_states * na);
    let (max_iter, epsilon) = match stop {
        ViStop::Iterations(t) => (t, None),
        ViStop::Tolerance { epsilon, max_iter } => (max_iter, Some(epsilon)),
    };
    let active: Vec<usize> = (0..mdp.n_states * na)
        .filter(|&i| !terminal[i / na] && mdp.rows[i].is_some())
        .collect();
    let mut report = ViReport {
        sweeps: 0,
        residual: 0.0,
    };
    if active.is_empty() {
        return report;
    }
    // Expected one-step rewards, accumulated in row order the same way the
    // factorized backup does so that degenerate products agree bit for bit.
    let rewards: Vec<f64> = active
        .iter()
        .map(|&i| {
            let row = mdp.rows[i].as_ref().expect("active");
            row.iter().fold(0.0, |acc, &(_, p, r)| acc + p * r)
        })
        .collect();
    let mut values = vec![0.0; mdp.n_states];
    let mut fresh = vec![0.0; active.len()];
    for _ in 0..max_iter {
        for (x, v) in values.iter_mut().enumerate() {
            *v = if terminal[x] {
                0.0
            } else {
                q[x * na..(x + 1) * na].iter().copied().fold(f64::NEG_INFINITY, f64::max)
            };
        }
        for ((&i, out), &reward) in active.iter().zip(fresh.iter_mut()).zip(&rewards) {
            let row = mdp.rows[i].as_ref().expect("active");
            let future = row.iter().fold(0.0, |acc, &(y, p, _)| acc + p * values[y]);
            *out = reward + gamma * future;
        }
        let mut residual: f64 = 0.0;
        for (&i, &v) in active.iter().zip(&fresh) {
            residual = residual.max((v - q[i]).abs());
            q[i] = v;
        }
        report.sweeps += 1;
        report.residual = residual;
        if residual == 0.0 || epsilon.is_some_and(|e| residual <= e) {
            break;
        }
    }
    report
}

/// Exact finite-horizon backward induction on a flat kernel; returns
/// `Q_h(x, a)` for `h = 0..horizon`, each of length `n_states * n_actions`.
pub fn backward_induction(mdp: &FlatMdp, horizon: usize, terminal: &[bool]) -> Vec<Vec<f64>> {
    let na = mdp.n_actions;
    let mut out = vec![vec![0.0; mdp.n_states * na]; horizon];
    let mut next_v = vec![0.0; mdp.n_states];
    for h in (0..horizon).rev() {
        for x in 0..mdp.n_states {
            if terminal[x] {
                continue;
            }
            for a in 0..na {
                out[h][x * na + a] = mdp
                    .row(x, a)
                    .map_or(0.0, |row| row.iter().map(|&(y, p, r)| p * (r + next_v[y])).sum());
            }
        }
        for x in 0..mdp.n_states {
            next_v[x] = if terminal[x] {
                0.0
            } else {
                out[h][x * na..(x + 1) * na].iter().copied().fold(f64::NEG_INFINITY, f64::max)
            };
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn no_counts_no_estimates() {
        let counts = FactorizedCounts::new(3, 2, 2);
        let model = estimates_from_counts(&counts, 1, 1);
        for s in 0..3 {
            for a in 0..2 {
                assert!(!model.known_env(s, a));
            }
            for q in 0..2 {
                assert!(!model.known_aut(q, s));
            }
        }
    }

    #[test]
    fn ratio_estimate() {
        let mut counts = FactorizedCounts::new(3, 1, 1);
        for _ in 0..20 {
            counts.record_env(0, 0, 1, 0.0);
        }
        for _ in 0..10 {
            counts.record_env(0, 0, 2, 0.0);
        }
        let model = estimates_from_counts(&counts, 30, 1);
        let est = model.env(0, 0).unwrap();
        assert_eq!(est.prob(1), 20.0 / 30.0);
        assert_eq!(est.prob(2), 10.0 / 30.0);
        assert!(estimates_from_counts(&counts, 31, 1).env(0, 0).is_none());
    }

    #[test]
    fn unknown_model_leaves_table_unchanged() {
        let model = FactorizedModel::empty(4, 2, 3);
        let mut qt = QTable::optimistic(4, 3, 2, 0.9, 1.0);
        let before = qt.clone();
        value_iteration(&mut qt, &model, ViStop::Iterations(50), &[false; 12]);
        assert_eq!(qt, before);
        assert!(qt.values().iter().all(|&v| v == 1.0 / (1.0 - 0.9)));
    }

    #[test]
    fn self_loop_geometric_series() {
        let mut counts = FactorizedCounts::new(1, 1, 1);
        counts.record_env(0, 0, 0, 1.0);
        counts.record_aut(0, 0, 0, 0.0);
        let model = estimates_from_counts(&counts, 1, 1);
        let mut qt = QTable::filled(1, 1, 1, 0.9, 1.0, 0.0);
        value_iteration(&mut qt, &model, ViStop::Iterations(600), &[false]);
        assert!((qt.get(0, 0, 0) - 10.0).abs() < 1e-6);
    }

    #[test]
    fn argmax_lowest_index() {
        assert_eq!(argmax(&[1.0, 3.0, 2.0, 3.0]), 1);
        assert_eq!(argmax(&[0.5; 4]), 0);
        let qt = QTable::optimistic(3, 2, 4, 0.9, 1.0);
        assert!(greedy_policy(&qt).iter().all(|&a| a == 0));
    }

    #[test]
    fn product_kernel_requires_full_model() {
        let model = FactorizedModel::empty(2, 1, 1);
        assert_eq!(
            product_kernel(&model),
            Err(ModelError::UnknownEnvPair { s: 0, a: 0 })
        );
    }

    #[test]
    fn uniform_env_deterministic_rm_product() {
        // 3 env states, one action, uniform successors; the RM moves q0 -> q1 on s' = 2.
        let mut counts = FactorizedCounts::new(3, 1, 2);
        for s in 0..3 {
            for s2 in 0..3 {
                counts.record_env(s, 0, s2, 0.0);
            }
            for q in 0..2 {
                let q2 = if s == 2 { 1 } else { q };
                counts.record_aut(q, s, q2, 0.0);
            }
        }
        let model = estimates_from_counts(&counts, 1, 1);
        let flat = product_kernel(&model).unwrap();
        for s in 0..3 {
            for q in 0..2 {
                let x = s * 2 + q;
                let total: f64 = (0..6).map(|y| flat.prob(x, 0, y)).sum();
                assert!((total - 1.0).abs() < 1e-12);
                for s2 in 0..3 {
                    let q2 = if s2 == 2 { 1 } else { q };
                    assert!((flat.prob(x, 0, s2 * 2 + q2) - 1.0 / 3.0).abs() < 1e-15);
                    assert_eq!(flat.prob(x, 0, s2 * 2 + (1 - q2)), 0.0);
                }
            }
        }
    }

    #[test]
    fn csv_export_lists_every_transition() {
        let mut flat = FlatMdp::new(2, 1);
        flat.set_row(0, 0, vec![(1, 1.0, 0.5)]);
        flat.set_row(1, 0, vec![(1, 1.0, 0.0)]);
        let mut buf = Vec::new();
        flat.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "state,action,nextstate,prob,reward\n0,0,1,1.0,0.5\n1,0,1,1.0,0.0\n");
    }

    #[test]
    fn grow_appends_optimistic_rows() {
        let mut qt = QTable::filled(1, 2, 2, 0.5, 1.0, 0.0);
        qt.grow_states(3);
        assert_eq!(qt.row(0, 1), &[0.0, 0.0]);
        assert_eq!(qt.row(2, 1), &[2.0, 2.0]);
    }
}
