//! Office-World gridworlds: ASCII maps, slip dynamics, the labelled
//! environment coupled to a reward machine, its exact product kernel and the
//! continuous-observation variant.
//!
//! Map files start with `key: value` header lines (comments start with `# `)
//! followed by the grid rows:
//!
//! ```text
//! name: map0_desk
//! slip: uniform
//! h: 0.8
//! start: 0 0
//! horizon: 50
//! C.....
//! O....L
//! ```
//!
//! Legend: `#` wall, `.` free, `S` start, `C` coffee, `G` good coffee,
//! `c` regular coffee, `M` mail, `O` office, `L` letter, `A` to `D` patrol
//! points, `x` decoration. A `glyph: <char> <label>` header adds a glyph, which
//! lets a map draw patrol point `C` with another character.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::Rng;
use thiserror::Error;

use crate::automaton::{LabelId, LabelingFunction, RewardMachine};
use crate::mdp::{ActionId, AutomatonStateId, FlatMdp, StateId};

pub const N_ACTIONS: usize = 4;
/// Row/column offsets for up, right, down, left.
const MOVES: [(isize, isize); N_ACTIONS] = [(-1, 0), (0, 1), (1, 0), (0, -1)];
pub const ACTION_NAMES: [&str; N_ACTIONS] = ["up", "right", "down", "left"];

pub const DEFAULT_STEP_LIMIT: usize = 1000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MapError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("map has no grid rows")]
    Empty,
    #[error("row {row} has width {found}, expected {expected}")]
    Ragged { row: usize, found: usize, expected: usize },
    #[error("start cell ({0}, {1}) is not a free cell")]
    BadStart(usize, usize),
    #[error("no start cell: use `S` or a `start:` header")]
    NoStart,
    #[error("unknown map `{0}`")]
    UnknownMap(String),
    #[error("unknown task `{0}`")]
    UnknownTask(String),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EnvError {
    #[error("episode finished; call reset before stepping")]
    EpisodeFinished,
    #[error("action {0} out of range")]
    BadAction(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlipScheme {
    /// Commanded move w.p. `h`, each perpendicular move w.p. `(1 - h) / 2`.
    AdjacentSplit,
    /// Commanded move w.p. `h`, each other move w.p. `(1 - h) / 3`.
    UniformOther,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlipModel {
    pub h: f64,
    pub scheme: SlipScheme,
}

impl SlipModel {
    pub fn new(h: f64, scheme: SlipScheme) -> Self {
        assert!(h > 0.0 && h <= 1.0, "nominal probability must lie in (0, 1]");
        SlipModel { h, scheme }
    }

    pub fn deterministic() -> Self {
        SlipModel::new(1.0, SlipScheme::AdjacentSplit)
    }

    /// Realised-move distribution for a commanded action; zero-probability
    /// entries are omitted.
    pub fn outcomes(&self, a: ActionId) -> Vec<(ActionId, f64)> {
        let mut out = vec![(a, self.h)];
        if self.h < 1.0 {
            match self.scheme {
                SlipScheme::AdjacentSplit => {
                    let p = (1.0 - self.h) / 2.0;
                    out.push(((a + 1) % N_ACTIONS, p));
                    out.push(((a + 3) % N_ACTIONS, p));
                }
                SlipScheme::UniformOther => {
                    let p = (1.0 - self.h) / 3.0;
                    out.extend((1..N_ACTIONS).map(|k| ((a + k) % N_ACTIONS, p)));
                }
            }
        }
        out
    }

    pub fn sample<R: Rng + ?Sized>(&self, a: ActionId, rng: &mut R) -> ActionId {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let outcomes = self.outcomes(a);
        for &(b, p) in &outcomes {
            acc += p;
            if u < acc {
                return b;
            }
        }
        outcomes[outcomes.len() - 1].0
    }
}

/// Static map geometry. States are the free cells in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct GridMap {
    pub name: String,
    pub width: usize,
    pub height: usize,
    pub slip: SlipModel,
    /// Episode length of the finite-horizon baselines on this map.
    pub horizon: usize,
    walls: Vec<bool>,
    labels: Vec<Option<String>>,
    start: (usize, usize),
    cell_state: Vec<Option<StateId>>,
    state_cell: Vec<(usize, usize)>,
    /// `next[s * 4 + move]`
    next: Vec<StateId>,
}

fn glyph_label(ch: char) -> Option<&'static str> {
    Some(match ch {
        'C' => "coffee",
        'G' => "good_coffee",
        'c' => "regular_coffee",
        'M' => "mail",
        'O' => "office",
        'L' => "letter",
        'A' => "A",
        'B' => "B",
        'D' => "D",
        'x' => "decoration",
        _ => return None,
    })
}

impl GridMap {
    pub fn parse(text: &str) -> Result<Self, MapError> {
        let mut name = String::from("map");
        let mut slip_scheme = SlipScheme::AdjacentSplit;
        let mut h = 1.0;
        let mut start = None;
        let mut horizon = DEFAULT_STEP_LIMIT;
        let mut glyphs: BTreeMap<char, String> = BTreeMap::new();
        let mut rows: Vec<(usize, &str)> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let trimmed = raw.trim_end();
            if trimmed.is_empty() {
                continue;
            }
            if rows.is_empty() && (trimmed.starts_with("# ") || trimmed.contains(':')) {
                if trimmed.starts_with("# ") {
                    continue;
                }
                let (key, value) = trimmed.split_once(':').expect("contains ':'");
                let value = value.trim();
                let err = |message: String| MapError::Syntax { line, message };
                match key.trim() {
                    "name" => name = value.to_string(),
                    "slip" => {
                        slip_scheme = match value {
                            "adjacent" => SlipScheme::AdjacentSplit,
                            "uniform" => SlipScheme::UniformOther,
                            other => return Err(err(format!("unknown slip scheme `{other}`"))),
                        }
                    }
                    "h" => {
                        h = value.parse().map_err(|_| err(format!("bad probability `{value}`")))?;
                        if !(h > 0.0 && h <= 1.0) {
                            return Err(err("h must lie in (0, 1]".into()));
                        }
                    }
                    "start" => {
                        let v: Vec<usize> = value
                            .split_whitespace()
                            .map(str::parse)
                            .collect::<Result<_, _>>()
                            .map_err(|_| err(format!("bad start `{value}`")))?;
                        let [r, c] = v[..] else {
                            return Err(err("start takes `row col`".into()));
                        };
                        start = Some((r, c));
                    }
                    "horizon" => {
                        horizon = value.parse().map_err(|_| err(format!("bad horizon `{value}`")))?;
                    }
                    "glyph" => {
                        let mut parts = value.split_whitespace();
                        let (Some(g), Some(label), None) = (parts.next(), parts.next(), parts.next()) else {
                            return Err(err("glyph takes `<char> <label>`".into()));
                        };
                        let mut chars = g.chars();
                        let (Some(ch), None) = (chars.next(), chars.next()) else {
                            return Err(err(format!("glyph `{g}` must be one character")));
                        };
                        if matches!(ch, '#' | '.' | 'S') {
                            return Err(err(format!("glyph `{ch}` is reserved")));
                        }
                        glyphs.insert(ch, label.to_string());
                    }
                    other => return Err(err(format!("unknown key `{other}`"))),
                }
                continue;
            }
            rows.push((line, trimmed));
        }
        if rows.is_empty() {
            return Err(MapError::Empty);
        }
        let width = rows[0].1.chars().count();
        let height = rows.len();
        let mut walls = Vec::with_capacity(width * height);
        let mut labels = Vec::with_capacity(width * height);
        for (r, &(line, row)) in rows.iter().enumerate() {
            let found = row.chars().count();
            if found != width {
                return Err(MapError::Ragged {
                    row: r,
                    found,
                    expected: width,
                });
            }
            for (c, ch) in row.chars().enumerate() {
                walls.push(ch == '#');
                let label = match ch {
                    '#' | '.' => None,
                    'S' => {
                        start.get_or_insert((r, c));
                        None
                    }
                    _ => match glyphs.get(&ch) {
                        Some(l) => Some(l.clone()),
                        None => Some(
                            glyph_label(ch)
                                .ok_or_else(|| MapError::Syntax {
                                    line,
                                    message: format!("unknown glyph `{ch}`"),
                                })?
                                .to_string(),
                        ),
                    },
                };
                labels.push(label);
            }
        }
        let start = start.ok_or(MapError::NoStart)?;
        if start.0 >= height || start.1 >= width || walls[start.0 * width + start.1] {
            return Err(MapError::BadStart(start.0, start.1));
        }
        Ok(Self::build(name, width, height, SlipModel::new(h, slip_scheme), horizon, walls, labels, start))
    }

    #[allow(clippy::too_many_arguments)]
    fn build(
        name: String,
        width: usize,
        height: usize,
        slip: SlipModel,
        horizon: usize,
        walls: Vec<bool>,
        labels: Vec<Option<String>>,
        start: (usize, usize),
    ) -> Self {
        let mut cell_state = vec![None; width * height];
        let mut state_cell = Vec::new();
        for r in 0..height {
            for c in 0..width {
                if !walls[r * width + c] {
                    cell_state[r * width + c] = Some(state_cell.len());
                    state_cell.push((r, c));
                }
            }
        }
        let mut next = Vec::with_capacity(state_cell.len() * N_ACTIONS);
        for (s, &(r, c)) in state_cell.iter().enumerate() {
            for (dr, dc) in MOVES {
                let (nr, nc) = (r as isize + dr, c as isize + dc);
                let target = if nr < 0 || nc < 0 || nr >= height as isize || nc >= width as isize {
                    None
                } else {
                    cell_state[nr as usize * width + nc as usize]
                };
                next.push(target.unwrap_or(s));
            }
        }
        GridMap {
            name,
            width,
            height,
            slip,
            horizon,
            walls,
            labels,
            start,
            cell_state,
            state_cell,
            next,
        }
    }

    /// Same geometry with a different slip model.
    pub fn with_slip(&self, slip: SlipModel) -> Self {
        GridMap { slip, ..self.clone() }
    }

    pub fn n_states(&self) -> usize {
        self.state_cell.len()
    }

    pub fn start_state(&self) -> StateId {
        self.cell_state[self.start.0 * self.width + self.start.1].expect("start is free")
    }

    pub fn is_wall(&self, row: usize, col: usize) -> bool {
        self.walls[row * self.width + col]
    }

    pub fn state_at(&self, row: usize, col: usize) -> Option<StateId> {
        self.cell_state.get(row * self.width + col).copied().flatten()
    }

    pub fn cell_of(&self, s: StateId) -> (usize, usize) {
        self.state_cell[s]
    }

    /// Label symbol of a state's cell, if any.
    pub fn symbol(&self, s: StateId) -> Option<&str> {
        let (r, c) = self.state_cell[s];
        self.labels[r * self.width + c].as_deref()
    }

    /// States carrying a given label.
    pub fn states_labelled(&self, symbol: &str) -> Vec<StateId> {
        (0..self.n_states()).filter(|&s| self.symbol(s) == Some(symbol)).collect()
    }

    /// Cell reached by executing a realised move.
    #[inline]
    pub fn move_from(&self, s: StateId, m: ActionId) -> StateId {
        self.next[s * N_ACTIONS + m]
    }

    /// Successor distribution for a commanded action, aggregated by cell in
    /// first-reached order.
    pub fn transition(&self, s: StateId, a: ActionId) -> Vec<(StateId, f64)> {
        let mut out: Vec<(StateId, f64)> = Vec::new();
        for (m, p) in self.slip.outcomes(a) {
            let s2 = self.move_from(s, m);
            match out.iter_mut().find(|e| e.0 == s2) {
                Some(e) => e.1 += p,
                None => out.push((s2, p)),
            }
        }
        out
    }

    pub fn labeling(&self, rm: &RewardMachine) -> LabelingFunction {
        LabelingFunction::new(rm, (0..self.n_states()).map(|s| self.symbol(s)))
    }

    /// Canonical text form.
    pub fn emit(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("name: {}\n", self.name));
        let scheme = match self.slip.scheme {
            SlipScheme::AdjacentSplit => "adjacent",
            SlipScheme::UniformOther => "uniform",
        };
        out.push_str(&format!("slip: {scheme}\nh: {}\n", self.slip.h));
        out.push_str(&format!("start: {} {}\nhorizon: {}\n", self.start.0, self.start.1, self.horizon));
        let reverse: BTreeMap<&str, char> = "CGcMOLABDx".chars().map(|ch| (glyph_label(ch).unwrap(), ch)).collect();
        let mut extra: BTreeMap<String, char> = BTreeMap::new();
        let mut spare = ('a'..='z').chain('E'..='Z').filter(|ch| glyph_label(*ch).is_none() && *ch != 'S');
        for label in self.labels.iter().flatten() {
            if !reverse.contains_key(label.as_str()) && !extra.contains_key(label) {
                extra.insert(label.clone(), spare.next().expect("enough glyphs"));
            }
        }
        for (label, ch) in &extra {
            out.push_str(&format!("glyph: {ch} {label}\n"));
        }
        for r in 0..self.height {
            for c in 0..self.width {
                let i = r * self.width + c;
                let ch = if self.walls[i] {
                    '#'
                } else {
                    match &self.labels[i] {
                        None => '.',
                        Some(l) => reverse.get(l.as_str()).copied().unwrap_or_else(|| extra[l]),
                    }
                };
                out.push(ch);
            }
            out.push('\n');
        }
        out
    }
}

impl FromStr for GridMap {
    type Err = MapError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        GridMap::parse(s)
    }
}

impl fmt::Display for GridMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.emit())
    }
}

const MAPS: [(&str, &str); 6] = [
    ("map0", include_str!("../assets/maps/map0.map")),
    ("map0_desk", include_str!("../assets/maps/map0_desk.map")),
    ("map1", include_str!("../assets/maps/map1.map")),
    ("map2", include_str!("../assets/maps/map2.map")),
    ("map3", include_str!("../assets/maps/map3.map")),
    ("map4", include_str!("../assets/maps/map4.map")),
];

const TASKS: [(&str, &str); 7] = [
    ("0", include_str!("../assets/tasks/task0.rm")),
    ("1", include_str!("../assets/tasks/task1.rm")),
    ("2", include_str!("../assets/tasks/task2.rm")),
    ("3", include_str!("../assets/tasks/task3.rm")),
    ("4", include_str!("../assets/tasks/task4.rm")),
    ("5", include_str!("../assets/tasks/task5.rm")),
    ("6", include_str!("../assets/tasks/task6.rm")),
];

pub fn map_names() -> impl Iterator<Item = &'static str> {
    MAPS.iter().map(|(n, _)| *n)
}

/// One of the shipped maps by name.
pub fn builtin_map(name: &str) -> Result<GridMap, MapError> {
    let text = MAPS
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, t)| *t)
        .ok_or_else(|| MapError::UnknownMap(name.to_string()))?;
    GridMap::parse(text)
}

/// One of the shipped task machines, by number (`"0"`..`"6"`, with or without a `task` prefix).
pub fn builtin_task(id: &str) -> Result<RewardMachine, MapError> {
    let key = id.strip_prefix("task").unwrap_or(id);
    let text = TASKS
        .iter()
        .find(|(n, _)| *n == key)
        .map(|(_, t)| *t)
        .ok_or_else(|| MapError::UnknownTask(id.to_string()))?;
    Ok(text.parse().expect("shipped task machines are valid"))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvStep {
    pub next_state: StateId,
    pub next_q: AutomatonStateId,
    pub r_e: f64,
    pub r_a: f64,
    /// Accepting or sink state reached, or the step limit hit.
    pub done: bool,
    /// The step limit ended the episode (the joint state is not terminal).
    pub truncated: bool,
}

impl EnvStep {
    pub fn reward(&self) -> f64 {
        self.r_e + self.r_a
    }

    pub fn terminal(&self) -> bool {
        self.done && !self.truncated
    }
}

/// A map coupled to a task machine. The automaton state advances on the label
/// of every cell entered, including the start cell at reset.
#[derive(Debug, Clone)]
pub struct OfficeEnv {
    map: Arc<GridMap>,
    rm: Arc<RewardMachine>,
    labeling: LabelingFunction,
    step_limit: usize,
    s: StateId,
    q: AutomatonStateId,
    t: usize,
    finished: bool,
}

impl OfficeEnv {
    pub fn new(map: Arc<GridMap>, rm: Arc<RewardMachine>) -> Self {
        let labeling = map.labeling(&rm);
        let mut env = OfficeEnv {
            map,
            rm,
            labeling,
            step_limit: DEFAULT_STEP_LIMIT,
            s: 0,
            q: 0,
            t: 0,
            finished: true,
        };
        env.reset();
        env
    }

    pub fn with_step_limit(mut self, limit: usize) -> Self {
        self.step_limit = limit;
        self
    }

    /// The same task on the slip-free twin of the map.
    pub fn deterministic_twin(&self) -> Self {
        let map = Arc::new(self.map.with_slip(SlipModel::deterministic()));
        OfficeEnv::new(map, self.rm.clone()).with_step_limit(self.step_limit)
    }

    pub fn map(&self) -> &Arc<GridMap> {
        &self.map
    }

    pub fn machine(&self) -> &Arc<RewardMachine> {
        &self.rm
    }

    pub fn step_limit(&self) -> usize {
        self.step_limit
    }

    pub fn set_step_limit(&mut self, limit: usize) {
        self.step_limit = limit;
    }

    pub fn n_states(&self) -> usize {
        self.map.n_states()
    }

    pub fn n_actions(&self) -> usize {
        N_ACTIONS
    }

    pub fn n_q(&self) -> usize {
        self.rm.num_states()
    }

    pub fn state(&self) -> (StateId, AutomatonStateId) {
        (self.s, self.q)
    }

    pub fn is_finished(&self) -> bool {
        self.finished
    }

    #[inline]
    pub fn label_of(&self, s: StateId) -> LabelId {
        self.labeling.label_of(s)
    }

    pub fn reset(&mut self) -> (StateId, AutomatonStateId) {
        self.s = self.map.start_state();
        self.q = self.rm.step_id(self.rm.initial(), self.label_of(self.s)).next;
        self.t = 0;
        self.finished = false;
        (self.s, self.q)
    }

    pub fn step<R: Rng + ?Sized>(&mut self, a: ActionId, rng: &mut R) -> Result<EnvStep, EnvError> {
        if self.finished {
            return Err(EnvError::EpisodeFinished);
        }
        if a >= N_ACTIONS {
            return Err(EnvError::BadAction(a));
        }
        let m = self.map.slip.sample(a, rng);
        let s2 = self.map.move_from(self.s, m);
        let tr = self.rm.step_id(self.q, self.label_of(s2));
        self.s = s2;
        self.q = tr.next;
        self.t += 1;
        let terminal = self.rm.is_terminal(tr.next);
        let truncated = !terminal && self.t >= self.step_limit;
        self.finished = terminal || truncated;
        Ok(EnvStep {
            next_state: s2,
            next_q: tr.next,
            r_e: 0.0,
            r_a: tr.reward,
            done: self.finished,
            truncated,
        })
    }

    /// Joint states whose automaton component is accepting or a sink.
    pub fn terminal_mask(&self) -> Vec<bool> {
        let nq = self.n_q();
        (0..self.n_states() * nq).map(|x| self.rm.is_terminal(x % nq)).collect()
    }

    /// Exact product kernel over `s * n_q + q`. Terminal states self-loop with
    /// reward 0.
    pub fn true_kernel(&self) -> FlatMdp {
        let nq = self.n_q();
        let mut flat = FlatMdp::new(self.n_states() * nq, N_ACTIONS);
        for s in 0..self.n_states() {
            for q in 0..nq {
                let x = s * nq + q;
                for a in 0..N_ACTIONS {
                    if self.rm.is_terminal(q) {
                        flat.set_row(x, a, vec![(x, 1.0, 0.0)]);
                        continue;
                    }
                    let row = self
                        .map
                        .transition(s, a)
                        .into_iter()
                        .map(|(s2, p)| {
                            let tr = self.rm.step_id(q, self.label_of(s2));
                            (s2 * nq + tr.next, p, tr.reward)
                        })
                        .collect();
                    flat.set_row(x, a, row);
                }
            }
        }
        flat
    }

    /// Cell-centre coordinates `(x, y) = (col + 0.5, row + 0.5)` plus
    /// independent uniform jitter in `[-jitter, jitter]` per axis.
    pub fn continuous_observe<R: Rng + ?Sized>(&self, jitter: f64, rng: &mut R) -> [f64; 2] {
        let (r, c) = self.map.cell_of(self.s);
        let mut v = [c as f64 + 0.5, r as f64 + 0.5];
        if jitter > 0.0 {
            for x in &mut v {
                *x += rng.random_range(-jitter..=jitter);
            }
        }
        v
    }
}

/// Loads a shipped map/task pair.
pub fn builtin_env(map: &str, task: &str) -> Result<OfficeEnv, MapError> {
    Ok(OfficeEnv::new(Arc::new(builtin_map(map)?), Arc::new(builtin_task(task)?)))
}
