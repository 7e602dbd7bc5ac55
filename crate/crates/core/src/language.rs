//! Bounded enumeration of generated and marked languages.
//!
//! This is a test oracle: it is exponential in the string length and fails
//! loudly instead of truncating once the string budget is spent.

use std::collections::BTreeSet;

use crate::automaton::{ActionString, Automaton, StateId};
use crate::error::{Error, Result};

pub const DEFAULT_STRING_CAP: usize = 1_000_000;

/// Strings of bounded length generated by an automaton, and the subset
/// ending in marked states.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Language {
    pub generated: BTreeSet<ActionString>,
    pub marked: BTreeSet<ActionString>,
}

impl Language {
    pub fn intersection(&self, other: &Language) -> Language {
        Language {
            generated: self.generated.intersection(&other.generated).cloned().collect(),
            marked: self.marked.intersection(&other.marked).cloned().collect(),
        }
    }

    /// Every prefix of every generated string is also generated.
    pub fn is_prefix_closed(&self) -> bool {
        self.generated
            .iter()
            .all(|l| (0..l.len()).all(|k| self.generated.contains(&l[..k])))
    }
}

pub fn enumerate_language(aut: &Automaton, max_len: usize) -> Result<Language> {
    enumerate_language_capped(aut, max_len, DEFAULT_STRING_CAP)
}

/// All strings `l` with `|l| <= max_len` and `δ(initial, l)` defined.
pub fn enumerate_language_capped(aut: &Automaton, max_len: usize, cap: usize) -> Result<Language> {
    let mut lang = Language::default();
    let mut stack: Vec<(ActionString, StateId)> = vec![(Vec::new(), aut.initial())];
    while let Some((l, s)) = stack.pop() {
        if lang.generated.len() >= cap {
            return Err(Error::OracleOverflow(cap));
        }
        if l.len() < max_len {
            for a in aut.active(s) {
                let mut la = l.clone();
                la.push(a);
                stack.push((la, aut.next(s, a).expect("active")));
            }
        }
        if aut.is_marked(s) {
            lang.marked.insert(l.clone());
        }
        lang.generated.insert(l);
    }
    Ok(lang)
}
