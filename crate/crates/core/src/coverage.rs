//! A-priori check that a specification keeps every state-action pair of
//! the environment explorable.
//!
//! For the product `M = H ‖ G`, `Ω(s)` is the set of product states whose
//! environment component is `s`. A non-goal state `s` is visitable when the
//! active sets over `Ω(s)` together contain every action. If every non-goal
//! state is visitable the specification covers `G`: each pair `(s, a)` is
//! reached by some admissible history that may then take `a`, so it keeps a
//! positive probability of being explored.

use std::collections::BTreeSet;
use std::fmt;

use crate::automaton::{product, ActionId, Alphabet, Automaton, StateId};
use crate::error::{Error, Result};
use crate::language::DEFAULT_STRING_CAP;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Covers,
    DoesNotCover,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Covers => "covers",
            Verdict::DoesNotCover => "does-not-cover",
        })
    }
}

/// Coverage of one non-goal environment state. Action ids refer to the
/// environment alphabet.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StateCoverage {
    pub state: StateId,
    pub active: BTreeSet<ActionId>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoverageReport {
    pub alphabet: Alphabet,
    pub states: Vec<StateCoverage>,
    pub uncovered: Vec<(StateId, ActionId)>,
    pub verdict: Verdict,
    /// False when the report comes from a bounded search that left some
    /// pairs unresolved.
    pub exact: bool,
}

impl CoverageReport {
    fn from_states(alphabet: &Alphabet, states: Vec<StateCoverage>, exact: bool) -> Self {
        let uncovered: Vec<(StateId, ActionId)> = states
            .iter()
            .flat_map(|sc| {
                alphabet
                    .ids()
                    .filter(|a| !sc.active.contains(a))
                    .map(move |a| (sc.state, a))
            })
            .collect();
        let verdict = if uncovered.is_empty() {
            Verdict::Covers
        } else {
            Verdict::DoesNotCover
        };
        CoverageReport {
            alphabet: alphabet.clone(),
            states,
            exact: exact || uncovered.is_empty(),
            uncovered,
            verdict,
        }
    }

    pub fn missing(&self, s: StateId) -> Option<Vec<ActionId>> {
        self.states.iter().find(|sc| sc.state == s).map(|sc| {
            self.alphabet
                .ids()
                .filter(|a| !sc.active.contains(a))
                .collect()
        })
    }
}

/// `Ω(s_g)`: product states whose environment component is `s_g`.
pub fn omega(product_aut: &Automaton, env_state: StateId) -> Result<Vec<StateId>> {
    if !product_aut.has_origins() {
        return Err(Error::MissingOrigins);
    }
    Ok(product_aut
        .states()
        .filter(|&m| product_aut.origin(m).expect("tagged").1 == env_state)
        .collect())
}

/// Union of the active sets over `Ω(s_g)`, as ids of `alphabet`.
pub fn union_active(product_aut: &Automaton, env_state: StateId, alphabet: &Alphabet) -> Result<BTreeSet<ActionId>> {
    let mut out = BTreeSet::new();
    for m in omega(product_aut, env_state)? {
        for a in product_aut.active(m) {
            if let Some(id) = alphabet.lookup(product_aut.alphabet().label(a)) {
                out.insert(id);
            }
        }
    }
    Ok(out)
}

/// Whether the active sets over `Ω(s_g)` jointly enable all of `alphabet`.
pub fn visitable(product_aut: &Automaton, env_state: StateId, alphabet: &Alphabet) -> Result<bool> {
    Ok(union_active(product_aut, env_state, alphabet)?.len() == alphabet.len())
}

/// Decides coverage through the product `H ‖ G`.
pub fn check_coverage(spec: &Automaton, env: &Automaton) -> CoverageReport {
    let m = product(spec, env);
    let states = env
        .states()
        .filter(|&s| !env.is_marked(s))
        .map(|s| StateCoverage {
            state: s,
            active: union_active(&m, s, env.alphabet()).expect("product carries origins"),
        })
        .collect();
    CoverageReport::from_states(env.alphabet(), states, true)
}

/// Brute-force coverage: searches every history `l` with `|l| <= max_len`
/// accepted by both `H` and `G` and records each `(δ_g(l), a)` with `la`
/// still accepted by both.
///
/// The two automata are stepped independently; no product is built. Pairs
/// not found within the bound are reported uncovered and the report is
/// marked inexact.
pub fn coverage_oracle(spec: &Automaton, env: &Automaton, max_len: usize) -> Result<CoverageReport> {
    let alphabet = env.alphabet();
    let to_spec: Vec<Option<ActionId>> = alphabet.labels().iter().map(|l| spec.alphabet().lookup(l)).collect();
    let mut covered = vec![BTreeSet::new(); env.state_count()];
    let mut visited = 0usize;
    let mut stack = vec![(0usize, spec.initial(), env.initial())];
    while let Some((len, qh, qg)) = stack.pop() {
        visited += 1;
        if visited > DEFAULT_STRING_CAP {
            return Err(Error::OracleOverflow(DEFAULT_STRING_CAP));
        }
        for a in alphabet.ids() {
            let Some(ah) = to_spec[a.0] else { continue };
            let (Some(nh), Some(ng)) = (spec.next(qh, ah), env.next(qg, a)) else {
                continue;
            };
            covered[qg.0].insert(a);
            if len < max_len {
                stack.push((len + 1, nh, ng));
            }
        }
    }
    let states = env
        .states()
        .filter(|&s| !env.is_marked(s))
        .map(|s| StateCoverage {
            state: s,
            active: std::mem::take(&mut covered[s.0]),
        })
        .collect();
    Ok(CoverageReport::from_states(alphabet, states, false))
}
