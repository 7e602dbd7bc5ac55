//! Supervisory control for tabular reinforcement learning.
//!
//! Environments and behavioural requirements are modelled as deterministic
//! finite automata. A requirement compiles to a specification automaton `H`
//! that, run alongside the learner, prunes the actions the agent may take
//! next. [`coverage`] decides before any training whether that pruning still
//! lets every state-action pair of the environment be explored, which is
//! what tabular Q-learning needs to reach the unconstrained optimum.
//! [`learner`] checks the answer empirically against an exact
//! value-iteration oracle.

pub mod automaton;
pub mod cli;
pub mod coverage;
pub mod environment;
pub mod error;
pub mod format;
pub mod language;
pub mod learner;
pub mod probability;
pub mod report;
pub mod specification;
pub mod supervisor;

pub use automaton::{product, ActionId, ActionString, Alphabet, Automaton, StateId};
pub use error::{Error, Result};
