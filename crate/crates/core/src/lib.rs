//! Tabular model-based reinforcement learning for tasks whose reward depends
//! on event history, expressed as reward machines over labelled gridworlds.

pub mod agents;
pub mod automaton;
pub mod baselines;
pub mod bucket;
pub mod harness;
pub mod mdp;
pub mod office;
pub mod pac;
