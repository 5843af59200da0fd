//! Reward machines: deterministic finite automata over event labels whose
//! transitions carry rewards.
//!
//! A machine is read from a small line-oriented text format:
//!
//! ```text
//! states: q0 q1 qacc qsink
//! initial: q0
//! accepting: qacc
//! sink: qsink
//! alphabet: coffee office decoration
//! trans: q0 coffee q1 0
//! trans: q1 office qacc 1
//! trans: * decoration qsink -100
//! ```
//!
//! Unlisted `(state, label)` pairs are implicit self-loops with reward 0, so
//! every machine is complete. Accepting and sink states are absorbing. The
//! distinguished label `none` is always accepted and never listed.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::{self, Write as _};
use std::str::FromStr;

use thiserror::Error;

/// The label emitted by cells that carry no event.
pub const NONE_LABEL: &str = "none";

/// Dense label index relative to one machine's alphabet. Index 0 is always
/// [`NONE_LABEL`]; declared symbols follow in sorted order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LabelId(pub u16);

impl LabelId {
    pub const NONE: LabelId = LabelId(0);

    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// An event symbol such as `coffee`, `office` or `A`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Label(String);

impl Label {
    pub fn new(symbol: impl Into<String>) -> Result<Self, RmError> {
        let symbol = symbol.into();
        if symbol.is_empty() || symbol.chars().any(char::is_whitespace) || symbol == "*" {
            return Err(RmError::InvalidSymbol(symbol));
        }
        Ok(Label(symbol))
    }

    pub fn none() -> Self {
        Label(NONE_LABEL.to_string())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn is_none(&self) -> bool {
        self.0 == NONE_LABEL
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Transition {
    pub next: usize,
    pub reward: f64,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RmError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: duplicate transition for ({state}, {label}); first defined on line {first_line}")]
    Determinism {
        line: usize,
        first_line: usize,
        state: String,
        label: String,
    },
    #[error("line {line}: undeclared state `{name}`")]
    UndeclaredState { line: usize, name: String },
    #[error("line {line}: undeclared label `{name}`")]
    UndeclaredLabel { line: usize, name: String },
    #[error("line {line}: state `{state}` is absorbing and cannot have outgoing transitions")]
    AbsorbingViolation { line: usize, state: String },
    #[error("line {line}: reward {reward} exceeds the declared bound {bound}")]
    RewardBound { line: usize, reward: f64, bound: f64 },
    #[error("missing `{0}:` section")]
    MissingSection(&'static str),
    #[error("label `{0}` is not in the machine alphabet")]
    AlphabetViolation(String),
    #[error("invalid symbol `{0}`")]
    InvalidSymbol(String),
    #[error("automaton state {0} out of range")]
    UnknownState(usize),
}

/// Non-fatal findings reported by [`RewardMachine::parse`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Diagnostic {
    UnreachableAccepting { state: String },
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Diagnostic::UnreachableAccepting { state } => {
                write!(f, "warning: accepting state `{state}` is unreachable from the initial state")
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct Parsed {
    pub machine: RewardMachine,
    pub diagnostics: Vec<Diagnostic>,
}

/// A validated reward machine.
///
/// States and alphabet are kept in sorted order so that two machines with the
/// same structure compare equal regardless of how their source text was laid
/// out.
#[derive(Debug, Clone, PartialEq)]
pub struct RewardMachine {
    states: Vec<String>,
    initial: usize,
    accepting: Vec<bool>,
    sinks: Vec<bool>,
    alphabet: Vec<String>,
    rules: BTreeMap<(usize, LabelId), Transition>,
    declared_bound: Option<f64>,
    table: Vec<Transition>,
}

impl RewardMachine {
    /// Builds a machine from named parts. Rules are `(from, label, to, reward)`.
    pub fn from_parts(
        states: &[&str],
        initial: &str,
        accepting: &[&str],
        sinks: &[&str],
        alphabet: &[&str],
        rules: &[(&str, &str, &str, f64)],
    ) -> Result<Self, RmError> {
        let mut text = String::new();
        let _ = writeln!(text, "states: {}", states.join(" "));
        let _ = writeln!(text, "initial: {initial}");
        let _ = writeln!(text, "accepting: {}", accepting.join(" "));
        if !sinks.is_empty() {
            let _ = writeln!(text, "sink: {}", sinks.join(" "));
        }
        let _ = writeln!(text, "alphabet: {}", alphabet.join(" "));
        for (from, label, to, reward) in rules {
            let _ = writeln!(text, "trans: {from} {label} {to} {reward}");
        }
        Ok(Self::parse(&text)?.machine)
    }

    pub fn parse(text: &str) -> Result<Parsed, RmError> {
        Parser::default().run(text)
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn state_names(&self) -> &[String] {
        &self.states
    }

    pub fn state_index(&self, name: &str) -> Option<usize> {
        self.states.binary_search_by(|s| s.as_str().cmp(name)).ok()
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn is_accepting(&self, q: usize) -> bool {
        self.accepting[q]
    }

    pub fn is_sink(&self, q: usize) -> bool {
        self.sinks[q]
    }

    /// Accepting or sink: reaching such a state ends the episode.
    pub fn is_terminal(&self, q: usize) -> bool {
        self.accepting[q] || self.sinks[q]
    }

    /// Declared symbols, excluding `none`.
    pub fn alphabet(&self) -> &[String] {
        &self.alphabet
    }

    /// Number of label ids, including `none`.
    pub fn num_labels(&self) -> usize {
        self.alphabet.len() + 1
    }

    pub fn label_id(&self, symbol: &str) -> Option<LabelId> {
        if symbol == NONE_LABEL {
            return Some(LabelId::NONE);
        }
        self.alphabet
            .binary_search_by(|s| s.as_str().cmp(symbol))
            .ok()
            .map(|i| LabelId(i as u16 + 1))
    }

    /// Like [`label_id`](Self::label_id) but projects symbols outside the
    /// alphabet onto `none`.
    pub fn project_label(&self, symbol: &str) -> LabelId {
        self.label_id(symbol).unwrap_or(LabelId::NONE)
    }

    pub fn label_name(&self, id: LabelId) -> &str {
        if id == LabelId::NONE {
            NONE_LABEL
        } else {
            &self.alphabet[id.index() - 1]
        }
    }

    /// Explicitly listed transitions.
    pub fn rules(&self) -> impl Iterator<Item = (usize, LabelId, Transition)> + '_ {
        self.rules.iter().map(|(&(q, l), &t)| (q, l, t))
    }

    /// `max |reward|` over all transitions, or the declared bound if present.
    pub fn reward_bound(&self) -> f64 {
        self.declared_bound.unwrap_or_else(|| {
            self.rules.values().map(|t| t.reward.abs()).fold(0.0, f64::max)
        })
    }

    /// Largest positive transition reward (0 when there is none).
    pub fn max_reward(&self) -> f64 {
        self.rules.values().map(|t| t.reward).fold(0.0, f64::max)
    }

    /// Smallest transition reward (0 when all rewards are non-negative).
    pub fn min_reward(&self) -> f64 {
        self.rules.values().map(|t| t.reward).fold(0.0, f64::min)
    }

    /// Advances the machine on a symbol.
    pub fn step(&self, q: usize, symbol: &str) -> Result<Transition, RmError> {
        if q >= self.states.len() {
            return Err(RmError::UnknownState(q));
        }
        let id = self
            .label_id(symbol)
            .ok_or_else(|| RmError::AlphabetViolation(symbol.to_string()))?;
        Ok(self.step_id(q, id))
    }

    /// Table lookup on a label id. Panics if either index is out of range.
    #[inline]
    pub fn step_id(&self, q: usize, label: LabelId) -> Transition {
        self.table[q * self.num_labels() + label.index()]
    }

    /// States reachable from the initial state.
    pub fn reachable(&self) -> BTreeSet<usize> {
        let mut seen = BTreeSet::from([self.initial]);
        let mut stack = vec![self.initial];
        while let Some(q) = stack.pop() {
            for l in 0..self.num_labels() {
                let next = self.step_id(q, LabelId(l as u16)).next;
                if seen.insert(next) {
                    stack.push(next);
                }
            }
        }
        seen
    }

    /// Canonical text: sorted states, sorted alphabet, rules sorted by
    /// `(state, label)` name.
    pub fn emit(&self) -> String {
        let mut out = String::new();
        let names = |flags: &[bool]| {
            self.states
                .iter()
                .zip(flags)
                .filter(|(_, f)| **f)
                .map(|(s, _)| s.as_str())
                .collect::<Vec<_>>()
                .join(" ")
        };
        let _ = writeln!(out, "states: {}", self.states.join(" "));
        let _ = writeln!(out, "initial: {}", self.states[self.initial]);
        let _ = writeln!(out, "accepting: {}", names(&self.accepting));
        if self.sinks.iter().any(|s| *s) {
            let _ = writeln!(out, "sink: {}", names(&self.sinks));
        }
        let _ = writeln!(out, "alphabet: {}", self.alphabet.join(" "));
        if let Some(b) = self.declared_bound {
            let _ = writeln!(out, "rmax: {b}");
        }
        // State and label indices follow name order, so the map order is canonical.
        for (&(q, l), t) in &self.rules {
            let _ = writeln!(
                out,
                "trans: {} {} {} {}",
                self.states[q],
                self.label_name(l),
                self.states[t.next],
                t.reward
            );
        }
        out
    }
}

impl FromStr for RewardMachine {
    type Err = RmError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(Self::parse(s)?.machine)
    }
}

impl fmt::Display for RewardMachine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.emit())
    }
}

struct RawRule {
    line: usize,
    from: String,
    label: String,
    to: String,
    reward: f64,
}

#[derive(Default)]
struct Parser {
    states: Option<(usize, Vec<String>)>,
    initial: Option<(usize, String)>,
    accepting: Option<(usize, Vec<String>)>,
    sinks: Option<(usize, Vec<String>)>,
    alphabet: Option<(usize, Vec<String>)>,
    bound: Option<f64>,
    rules: Vec<RawRule>,
}

fn syntax(line: usize, message: impl Into<String>) -> RmError {
    RmError::Syntax {
        line,
        message: message.into(),
    }
}

impl Parser {
    fn run(mut self, text: &str) -> Result<Parsed, RmError> {
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, rest) = content
                .split_once(':')
                .ok_or_else(|| syntax(line, "expected `key: value`"))?;
            let words: Vec<String> = rest.split_whitespace().map(str::to_string).collect();
            match key.trim() {
                "states" => set_once(&mut self.states, line, words, "states")?,
                "accepting" => set_once(&mut self.accepting, line, words, "accepting")?,
                "sink" => set_once(&mut self.sinks, line, words, "sink")?,
                "alphabet" => set_once(&mut self.alphabet, line, words, "alphabet")?,
                "initial" => {
                    if words.len() != 1 {
                        return Err(syntax(line, "`initial:` takes exactly one state"));
                    }
                    if self.initial.is_some() {
                        return Err(syntax(line, "`initial:` given twice"));
                    }
                    self.initial = Some((line, words[0].clone()));
                }
                "rmax" => {
                    let [v] = words.as_slice() else {
                        return Err(syntax(line, "`rmax:` takes one number"));
                    };
                    let v: f64 = v.parse().map_err(|_| syntax(line, format!("bad number `{v}`")))?;
                    if !v.is_finite() || v < 0.0 {
                        return Err(syntax(line, "`rmax:` must be finite and non-negative"));
                    }
                    self.bound = Some(v);
                }
                "trans" => {
                    let [from, label, to, reward] = words.as_slice() else {
                        return Err(syntax(line, "`trans:` expects `<from> <label> <to> <reward>`"));
                    };
                    let reward: f64 = reward
                        .parse()
                        .map_err(|_| syntax(line, format!("bad reward `{reward}`")))?;
                    if !reward.is_finite() {
                        return Err(syntax(line, "reward must be finite"));
                    }
                    self.rules.push(RawRule {
                        line,
                        from: from.clone(),
                        label: label.clone(),
                        to: to.clone(),
                        reward,
                    });
                }
                other => return Err(syntax(line, format!("unknown key `{other}`"))),
            }
        }
        self.build()
    }

    fn build(self) -> Result<Parsed, RmError> {
        let (states_line, mut states) = self.states.ok_or(RmError::MissingSection("states"))?;
        let (initial_line, initial) = self.initial.ok_or(RmError::MissingSection("initial"))?;
        let (accepting_line, accepting) = self.accepting.ok_or(RmError::MissingSection("accepting"))?;
        let (sinks_line, sinks) = self.sinks.unwrap_or((0, Vec::new()));
        let (alphabet_line, mut alphabet) = self.alphabet.unwrap_or((0, Vec::new()));

        for s in &states {
            Label::new(s.as_str()).map_err(|_| syntax(states_line, format!("invalid state name `{s}`")))?;
        }
        states.sort();
        if let Some(w) = states.windows(2).find(|w| w[0] == w[1]) {
            return Err(syntax(states_line, format!("state `{}` declared twice", w[0])));
        }
        if states.is_empty() {
            return Err(syntax(states_line, "at least one state is required"));
        }
        for l in &alphabet {
            if l == NONE_LABEL {
                return Err(syntax(alphabet_line, "`none` is implicit and cannot be declared"));
            }
            Label::new(l.as_str()).map_err(|_| syntax(alphabet_line, format!("invalid label `{l}`")))?;
        }
        alphabet.sort();
        if let Some(w) = alphabet.windows(2).find(|w| w[0] == w[1]) {
            return Err(syntax(alphabet_line, format!("label `{}` declared twice", w[0])));
        }
        if alphabet.len() >= u16::MAX as usize {
            return Err(syntax(alphabet_line, "alphabet too large"));
        }

        let lookup = |line: usize, name: &str| -> Result<usize, RmError> {
            states
                .binary_search_by(|s| s.as_str().cmp(name))
                .map_err(|_| RmError::UndeclaredState {
                    line,
                    name: name.to_string(),
                })
        };
        let initial = lookup(initial_line, &initial)?;
        let mut accepting_flags = vec![false; states.len()];
        for s in &accepting {
            accepting_flags[lookup(accepting_line, s)?] = true;
        }
        let mut sink_flags = vec![false; states.len()];
        for s in &sinks {
            let q = lookup(sinks_line, s)?;
            if accepting_flags[q] {
                return Err(syntax(sinks_line, format!("state `{s}` cannot be both accepting and a sink")));
            }
            sink_flags[q] = true;
        }
        let label_lookup = |line: usize, name: &str| -> Result<LabelId, RmError> {
            if name == NONE_LABEL {
                return Err(syntax(line, "`none` always self-loops and cannot carry a transition"));
            }
            alphabet
                .binary_search_by(|s| s.as_str().cmp(name))
                .map(|i| LabelId(i as u16 + 1))
                .map_err(|_| RmError::UndeclaredLabel {
                    line,
                    name: name.to_string(),
                })
        };

        let mut rules: BTreeMap<(usize, LabelId), Transition> = BTreeMap::new();
        let mut origin: HashMap<(usize, LabelId), usize> = HashMap::new();
        for rule in &self.rules {
            let label = label_lookup(rule.line, &rule.label)?;
            let to = lookup(rule.line, &rule.to)?;
            if let Some(bound) = self.bound {
                if rule.reward.abs() > bound {
                    return Err(RmError::RewardBound {
                        line: rule.line,
                        reward: rule.reward,
                        bound,
                    });
                }
            }
            let sources: Vec<usize> = if rule.from == "*" {
                (0..states.len())
                    .filter(|&q| !accepting_flags[q] && !sink_flags[q])
                    .collect()
            } else {
                let q = lookup(rule.line, &rule.from)?;
                if accepting_flags[q] || sink_flags[q] {
                    return Err(RmError::AbsorbingViolation {
                        line: rule.line,
                        state: rule.from.clone(),
                    });
                }
                vec![q]
            };
            for q in sources {
                if let Some(&first_line) = origin.get(&(q, label)) {
                    return Err(RmError::Determinism {
                        line: rule.line,
                        first_line,
                        state: states[q].clone(),
                        label: rule.label.clone(),
                    });
                }
                origin.insert((q, label), rule.line);
                rules.insert(
                    (q, label),
                    Transition {
                        next: to,
                        reward: rule.reward,
                    },
                );
            }
        }

        let n_labels = alphabet.len() + 1;
        let mut table = Vec::with_capacity(states.len() * n_labels);
        for q in 0..states.len() {
            for l in 0..n_labels {
                let t = rules.get(&(q, LabelId(l as u16))).copied().unwrap_or(Transition {
                    next: q,
                    reward: 0.0,
                });
                table.push(t);
            }
        }

        let machine = RewardMachine {
            states,
            initial,
            accepting: accepting_flags,
            sinks: sink_flags,
            alphabet,
            rules,
            declared_bound: self.bound,
            table,
        };
        let reachable = machine.reachable();
        let diagnostics = (0..machine.num_states())
            .filter(|q| machine.accepting[*q] && !reachable.contains(q))
            .map(|q| Diagnostic::UnreachableAccepting {
                state: machine.states[q].clone(),
            })
            .collect();
        Ok(Parsed {
            machine,
            diagnostics,
        })
    }
}

fn set_once<T>(slot: &mut Option<(usize, T)>, line: usize, value: T, key: &str) -> Result<(), RmError> {
    if slot.is_some() {
        return Err(syntax(line, format!("`{key}:` given twice")));
    }
    *slot = Some((line, value));
    Ok(())
}

/// Total map from environment states to label ids of one machine.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelingFunction {
    labels: Vec<LabelId>,
}

impl LabelingFunction {
    /// Projects per-state symbols onto the machine alphabet; symbols the
    /// machine does not know become `none`.
    pub fn new<'a>(machine: &RewardMachine, symbols: impl IntoIterator<Item = Option<&'a str>>) -> Self {
        let labels = symbols
            .into_iter()
            .map(|s| s.map_or(LabelId::NONE, |s| machine.project_label(s)))
            .collect();
        LabelingFunction { labels }
    }

    #[inline]
    pub fn label_of(&self, state: usize) -> LabelId {
        self.labels[state]
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const TASK1: &str = "\
states: q0 q1 qacc
initial: q0
accepting: qacc
alphabet: coffee office
trans: q0 coffee q1 0
trans: q1 office qacc 1
";

    #[test]
    fn task1_steps() {
        let rm: RewardMachine = TASK1.parse().unwrap();
        assert_eq!(rm.num_states(), 3);
        let q0 = rm.state_index("q0").unwrap();
        let q1 = rm.state_index("q1").unwrap();
        let acc = rm.state_index("qacc").unwrap();
        assert_eq!(rm.step(q0, "coffee").unwrap(), Transition { next: q1, reward: 0.0 });
        assert_eq!(rm.step(q1, "office").unwrap(), Transition { next: acc, reward: 1.0 });
        assert_eq!(rm.step(q0, "none").unwrap(), Transition { next: q0, reward: 0.0 });
        assert_eq!(rm.step(acc, "coffee").unwrap(), Transition { next: acc, reward: 0.0 });
    }

    #[test]
    fn unknown_label_is_alphabet_violation() {
        let rm: RewardMachine = TASK1.parse().unwrap();
        assert_eq!(
            rm.step(0, "mail"),
            Err(RmError::AlphabetViolation("mail".into()))
        );
    }

    #[test]
    fn duplicate_rule_reports_second_line() {
        let text = format!("{TASK1}trans: q0 coffee qacc 0\n");
        match text.parse::<RewardMachine>() {
            Err(RmError::Determinism { line, first_line, .. }) => {
                assert_eq!(line, 7);
                assert_eq!(first_line, 5);
            }
            other => panic!("expected determinism error, got {other:?}"),
        }
    }

    #[test]
    fn wildcard_expands_to_live_states() {
        let text = "\
states: q0 q1 qacc qsink
initial: q0
accepting: qacc
sink: qsink
alphabet: coffee office decoration
trans: q0 coffee q1 0
trans: q1 office qacc 1
trans: * decoration qsink -100
";
        let rm: RewardMachine = text.parse().unwrap();
        let sink = rm.state_index("qsink").unwrap();
        for name in ["q0", "q1"] {
            let q = rm.state_index(name).unwrap();
            assert_eq!(rm.step(q, "decoration").unwrap(), Transition { next: sink, reward: -100.0 });
        }
        assert_eq!(rm.step(sink, "decoration").unwrap().next, sink);
        assert_eq!(rm.reward_bound(), 100.0);
        assert_eq!(rm.max_reward(), 1.0);
    }

    #[test]
    fn reference_errors() {
        let bad_state = "states: q0\ninitial: q0\naccepting:\nalphabet: a\ntrans: q0 a q9 0\n";
        assert!(matches!(
            bad_state.parse::<RewardMachine>(),
            Err(RmError::UndeclaredState { line: 5, .. })
        ));
        let bad_label = "states: q0\ninitial: q0\naccepting:\nalphabet: a\ntrans: q0 b q0 0\n";
        assert!(matches!(
            bad_label.parse::<RewardMachine>(),
            Err(RmError::UndeclaredLabel { line: 5, .. })
        ));
        let out_of_accepting = "states: q0 q1\ninitial: q0\naccepting: q1\nalphabet: a\ntrans: q1 a q0 0\n";
        assert!(matches!(
            out_of_accepting.parse::<RewardMachine>(),
            Err(RmError::AbsorbingViolation { line: 5, .. })
        ));
        let over_bound = "states: q0 q1\ninitial: q0\naccepting: q1\nalphabet: a\nrmax: 1\ntrans: q0 a q1 2\n";
        assert!(matches!(
            over_bound.parse::<RewardMachine>(),
            Err(RmError::RewardBound { line: 6, .. })
        ));
        assert_eq!(
            "initial: q0\naccepting:\n".parse::<RewardMachine>(),
            Err(RmError::MissingSection("states"))
        );
    }

    #[test]
    fn unreachable_accepting_is_a_warning() {
        let text = "states: q0 q1\ninitial: q0\naccepting: q1\nalphabet: a\n";
        let parsed = RewardMachine::parse(text).unwrap();
        assert_eq!(
            parsed.diagnostics,
            vec![Diagnostic::UnreachableAccepting { state: "q1".into() }]
        );
    }

    #[test]
    fn self_loop_only_machine_emits_no_transitions() {
        let rm: RewardMachine = "states: q0\ninitial: q0\naccepting:\nalphabet: a b\n".parse().unwrap();
        assert!(!rm.emit().contains("trans:"));
        assert_eq!(rm.emit().parse::<RewardMachine>().unwrap(), rm);
    }

    #[test]
    fn task1_round_trips() {
        let rm: RewardMachine = TASK1.parse().unwrap();
        assert_eq!(rm.emit().parse::<RewardMachine>().unwrap(), rm);
    }

    #[test]
    fn labeling_projects_foreign_symbols() {
        let rm: RewardMachine = TASK1.parse().unwrap();
        let lf = LabelingFunction::new(&rm, [Some("office"), None, Some("mail")]);
        assert_eq!(rm.label_name(lf.label_of(0)), "office");
        assert_eq!(lf.label_of(1), LabelId::NONE);
        assert_eq!(lf.label_of(2), LabelId::NONE);
    }

    fn arb_machine() -> impl Strategy<Value = RewardMachine> {
        (1usize..=12, 0usize..=8).prop_flat_map(|(nq, nl)| {
            let rules = proptest::collection::vec(
                (0..nq, 0..=nl, 0..nq, -20i32..=20, 0u8..4),
                0..40,
            );
            (Just(nq), Just(nl), 0..nq, proptest::collection::vec(any::<bool>(), nq), rules)
        })
        .prop_map(|(nq, nl, init, acc, rules)| {
            let states: Vec<String> = (0..nq).map(|i| format!("s{i}")).collect();
            let alphabet: Vec<String> = (0..nl).map(|i| format!("l{i}")).collect();
            let mut text = format!("states: {}\ninitial: s{init}\naccepting:", states.join(" "));
            for (i, a) in acc.iter().enumerate() {
                if *a && i != init {
                    text.push_str(&format!(" s{i}"));
                }
            }
            text.push_str(&format!("\nalphabet: {}\n", alphabet.join(" ")));
            let mut used = BTreeSet::new();
            for (from, label, to, reward, frac) in rules {
                if from != init && acc[from] {
                    continue;
                }
                if label == nl {
                    continue;
                }
                let label = format!("l{label}");
                if !used.insert((from, label.clone())) {
                    continue;
                }
                let reward = reward as f64 + frac as f64 * 0.25;
                text.push_str(&format!("trans: s{from} {label} s{to} {reward}\n"));
            }
            text.parse::<RewardMachine>().expect("generated machine is valid")
        })
    }

    proptest! {
        #[test]
        fn emit_then_parse_is_identity(rm in arb_machine()) {
            let again: RewardMachine = rm.emit().parse().unwrap();
            prop_assert_eq!(&again, &rm);
            prop_assert_eq!(again.emit(), rm.emit());
        }

        #[test]
        fn step_is_total_deterministic_and_absorbing(rm in arb_machine()) {
            let bound = rm.reward_bound();
            for q in 0..rm.num_states() {
                for l in 0..rm.num_labels() {
                    let id = LabelId(l as u16);
                    let a = rm.step_id(q, id);
                    let b = rm.step(q, rm.label_name(id)).unwrap();
                    prop_assert_eq!(a, b);
                    prop_assert!(a.next < rm.num_states());
                    prop_assert!(a.reward.abs() <= bound);
                    if rm.is_terminal(q) {
                        prop_assert_eq!(a, Transition { next: q, reward: 0.0 });
                    }
                }
            }
        }
    }
}
