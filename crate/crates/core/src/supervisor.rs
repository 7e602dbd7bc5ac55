//! Supervisor realized by a specification automaton.
//!
//! The supervisor reads the executed action history and answers with the set
//! of admissible actions. It only ever consults the specification automaton
//! `H`, never the environment: after history `l` it sits in `δ_h(h°, l)` and
//! the admissible set is the active set there.

use std::collections::BTreeSet;

use crate::automaton::{ActionId, Automaton, StateId};
use crate::error::{Error, Result};

/// Admissible actions after some history. Empty means deadlock.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AdmissibleSet {
    pub actions: BTreeSet<ActionId>,
}

impl AdmissibleSet {
    pub fn deadlocked(&self) -> bool {
        self.actions.is_empty()
    }

    pub fn contains(&self, a: ActionId) -> bool {
        self.actions.contains(&a)
    }
}

#[derive(Clone, Debug)]
pub struct Supervisor<'h> {
    spec: &'h Automaton,
    current: StateId,
}

impl<'h> Supervisor<'h> {
    /// Wraps a trim, all-marked specification automaton.
    pub fn realize(spec: &'h Automaton) -> Result<Self> {
        if !spec.all_marked() {
            return Err(Error::NotRealizable(
                "every state of the specification automaton must be marked".into(),
            ));
        }
        if !spec.is_trim() {
            return Err(Error::NotRealizable(
                "the specification automaton must be trim".into(),
            ));
        }
        Ok(Supervisor {
            spec,
            current: spec.initial(),
        })
    }

    pub fn spec(&self) -> &'h Automaton {
        self.spec
    }

    pub fn current(&self) -> StateId {
        self.current
    }

    pub fn admissible(&self) -> AdmissibleSet {
        AdmissibleSet {
            actions: self.spec.active_set(self.current),
        }
    }

    pub fn is_admissible(&self, a: ActionId) -> bool {
        a.0 < self.spec.alphabet().len() && self.spec.next(self.current, a).is_some()
    }

    /// Records that `a` was executed. Executing a disabled action is a
    /// contract violation by the behaviour policy.
    pub fn advance(&mut self, a: ActionId) -> Result<StateId> {
        match self.spec.step(self.current, a)? {
            Some(next) => {
                self.current = next;
                Ok(next)
            }
            None => Err(Error::NotAdmissible {
                state: self.current.0,
                action: self.spec.alphabet().label(a).to_string(),
            }),
        }
    }

    /// Back to the empty history.
    pub fn reset(&mut self) {
        self.current = self.spec.initial();
    }
}
