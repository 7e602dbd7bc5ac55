//! Deterministic finite automata with partial transition functions.
//!
//! States and actions are dense indices. Action labels live in an
//! [`Alphabet`] side table, so transition lookup is a single slice index.
//! Automata built by [`product`] remember, for every composite state, the
//! pair of component states it was built from.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StateId(pub usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ActionId(pub usize);

impl fmt::Display for StateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for ActionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// A string over an alphabet. The empty vector is the empty string.
pub type ActionString = Vec<ActionId>;

/// Ordered, duplicate-free list of action labels.
#[derive(Clone, Debug)]
pub struct Alphabet {
    labels: Vec<String>,
    index: HashMap<String, ActionId>,
}

impl PartialEq for Alphabet {
    fn eq(&self, other: &Self) -> bool {
        self.labels == other.labels
    }
}

impl Eq for Alphabet {}

impl Alphabet {
    pub fn new<I, S>(labels: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut out = Alphabet {
            labels: Vec::new(),
            index: HashMap::new(),
        };
        for label in labels {
            let label = label.into();
            if label.is_empty() || label.chars().any(|c| c.is_whitespace() || c == ',' || c == '#')
            {
                return Err(Error::InvalidLabel(label));
            }
            if out.index.contains_key(&label) {
                return Err(Error::DuplicateLabel(label));
            }
            out.index.insert(label.clone(), ActionId(out.labels.len()));
            out.labels.push(label);
        }
        Ok(out)
    }

    /// The four grid moves `a1`..`a4` (up, right, down, left).
    pub fn grid() -> Self {
        Alphabet::new(["a1", "a2", "a3", "a4"]).expect("static labels are valid")
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn ids(&self) -> impl Iterator<Item = ActionId> + '_ {
        (0..self.labels.len()).map(ActionId)
    }

    pub fn label(&self, a: ActionId) -> &str {
        &self.labels[a.0]
    }

    pub fn lookup(&self, label: &str) -> Option<ActionId> {
        self.index.get(label).copied()
    }

    pub fn id(&self, label: &str) -> Result<ActionId> {
        self.lookup(label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    /// Parses a whitespace-separated list of labels into a string.
    pub fn parse_string(&self, text: &str) -> Result<ActionString> {
        text.split_whitespace().map(|l| self.id(l)).collect()
    }

    pub fn format_string(&self, l: &[ActionId]) -> String {
        if l.is_empty() {
            return "λ".to_string();
        }
        l.iter()
            .map(|&a| self.label(a))
            .collect::<Vec<_>>()
            .join(" ")
    }

    /// Labels of `self` followed by the labels of `other` not already present.
    pub fn union(&self, other: &Alphabet) -> Alphabet {
        let mut labels = self.labels.clone();
        labels.extend(
            other
                .labels
                .iter()
                .filter(|l| !self.index.contains_key(*l))
                .cloned(),
        );
        Alphabet::new(labels).expect("union of valid alphabets is valid")
    }

    pub fn contains_all(&self, other: &Alphabet) -> bool {
        other.labels.iter().all(|l| self.index.contains_key(l))
    }
}

/// A deterministic automaton `(states, alphabet, δ, Γ, initial, marked)`.
///
/// `δ` is stored as a dense `state × action` table of optional successors;
/// the active set `Γ(s)` is always derived from it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Automaton {
    alphabet: Alphabet,
    delta: Vec<Option<StateId>>,
    initial: StateId,
    marked: Vec<bool>,
    origins: Option<Vec<(StateId, StateId)>>,
}

pub struct AutomatonBuilder {
    alphabet: Alphabet,
    state_count: usize,
    delta: Vec<Option<StateId>>,
    initial: StateId,
    marked: Vec<bool>,
    origins: Option<Vec<(StateId, StateId)>>,
}

impl AutomatonBuilder {
    fn check_state(&self, s: StateId) -> Result<()> {
        if s.0 >= self.state_count {
            return Err(Error::InvalidState {
                state: s.0,
                count: self.state_count,
            });
        }
        Ok(())
    }

    fn check_action(&self, a: ActionId) -> Result<()> {
        if a.0 >= self.alphabet.len() {
            return Err(Error::InvalidAction {
                action: a.0,
                count: self.alphabet.len(),
            });
        }
        Ok(())
    }

    pub fn initial(&mut self, s: StateId) -> Result<&mut Self> {
        self.check_state(s)?;
        self.initial = s;
        Ok(self)
    }

    pub fn mark(&mut self, s: StateId) -> Result<&mut Self> {
        self.check_state(s)?;
        self.marked[s.0] = true;
        Ok(self)
    }

    pub fn mark_all(&mut self) -> &mut Self {
        self.marked.iter_mut().for_each(|m| *m = true);
        self
    }

    /// Adds `δ(from, action) = to`. A second successor for the same pair is
    /// rejected.
    pub fn transition(&mut self, from: StateId, action: ActionId, to: StateId) -> Result<&mut Self> {
        self.check_state(from)?;
        self.check_state(to)?;
        self.check_action(action)?;
        let slot = &mut self.delta[from.0 * self.alphabet.len() + action.0];
        if slot.is_some() {
            return Err(Error::Nondeterministic {
                state: from.0,
                action: self.alphabet.label(action).to_string(),
            });
        }
        *slot = Some(to);
        Ok(self)
    }

    pub fn build(&mut self) -> Automaton {
        Automaton {
            alphabet: self.alphabet.clone(),
            delta: std::mem::take(&mut self.delta),
            initial: self.initial,
            marked: std::mem::take(&mut self.marked),
            origins: self.origins.take(),
        }
    }
}

impl Automaton {
    /// Starts an automaton with `state_count` states, initial state 0, no
    /// transitions and nothing marked.
    pub fn builder(alphabet: Alphabet, state_count: usize) -> Result<AutomatonBuilder> {
        if state_count == 0 {
            return Err(Error::Usage("an automaton needs at least one state".into()));
        }
        Ok(AutomatonBuilder {
            delta: vec![None; state_count * alphabet.len()],
            alphabet,
            state_count,
            initial: StateId(0),
            marked: vec![false; state_count],
            origins: None,
        })
    }

    /// The one-state automaton with a self-loop on every action, generating
    /// every string over `alphabet`.
    pub fn universal(alphabet: Alphabet) -> Automaton {
        let mut b = Automaton::builder(alphabet.clone(), 1).expect("one state");
        for a in alphabet.ids() {
            b.transition(StateId(0), a, StateId(0)).expect("fresh slot");
        }
        b.mark_all().build()
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn state_count(&self) -> usize {
        self.marked.len()
    }

    pub fn states(&self) -> impl Iterator<Item = StateId> {
        (0..self.state_count()).map(StateId)
    }

    pub fn initial(&self) -> StateId {
        self.initial
    }

    pub fn is_marked(&self, s: StateId) -> bool {
        self.marked[s.0]
    }

    pub fn marked_states(&self) -> Vec<StateId> {
        self.states().filter(|&s| self.is_marked(s)).collect()
    }

    pub fn all_marked(&self) -> bool {
        self.marked.iter().all(|&m| m)
    }

    pub fn check_state(&self, s: StateId) -> Result<()> {
        if s.0 >= self.state_count() {
            return Err(Error::InvalidState {
                state: s.0,
                count: self.state_count(),
            });
        }
        Ok(())
    }

    pub fn check_action(&self, a: ActionId) -> Result<()> {
        if a.0 >= self.alphabet.len() {
            return Err(Error::InvalidAction {
                action: a.0,
                count: self.alphabet.len(),
            });
        }
        Ok(())
    }

    /// `δ(s, a)` without index validation.
    #[inline]
    pub fn next(&self, s: StateId, a: ActionId) -> Option<StateId> {
        self.delta[s.0 * self.alphabet.len() + a.0]
    }

    /// `δ(s, a)`, or `None` when the transition is undefined.
    pub fn step(&self, s: StateId, a: ActionId) -> Result<Option<StateId>> {
        self.check_state(s)?;
        self.check_action(a)?;
        Ok(self.next(s, a))
    }

    /// Extended transition function from `s`; `None` at the first undefined
    /// step.
    pub fn run_from(&self, s: StateId, l: &[ActionId]) -> Option<StateId> {
        l.iter().try_fold(s, |s, &a| {
            if a.0 >= self.alphabet.len() {
                return None;
            }
            self.next(s, a)
        })
    }

    /// `δ(initial, l)`.
    pub fn run(&self, l: &[ActionId]) -> Option<StateId> {
        self.run_from(self.initial, l)
    }

    pub fn accepts(&self, l: &[ActionId]) -> bool {
        self.run(l).is_some()
    }

    /// Active actions at `s`, in alphabet order.
    pub fn active(&self, s: StateId) -> impl Iterator<Item = ActionId> + '_ {
        let n = self.alphabet.len();
        self.delta[s.0 * n..(s.0 + 1) * n]
            .iter()
            .enumerate()
            .filter(|(_, t)| t.is_some())
            .map(|(a, _)| ActionId(a))
    }

    /// `Γ(s)`: the actions with a defined transition at `s`.
    pub fn active_set(&self, s: StateId) -> BTreeSet<ActionId> {
        self.active(s).collect()
    }

    /// All defined transitions `(from, action, to)`, by state then action.
    pub fn transitions(&self) -> impl Iterator<Item = (StateId, ActionId, StateId)> + '_ {
        let n = self.alphabet.len().max(1);
        self.delta.iter().enumerate().filter_map(move |(i, t)| {
            t.map(|to| (StateId(i / n), ActionId(i % n), to))
        })
    }

    pub fn transition_count(&self) -> usize {
        self.delta.iter().filter(|t| t.is_some()).count()
    }

    /// Whether `δ` is defined for every action at every state accepted by
    /// `filter`.
    pub fn is_total_on(&self, mut filter: impl FnMut(StateId) -> bool) -> bool {
        self.states()
            .filter(|&s| filter(s))
            .all(|s| self.active(s).count() == self.alphabet.len())
    }

    pub fn has_origins(&self) -> bool {
        self.origins.is_some()
    }

    /// For a product state, the `(left, right)` component states it came from.
    pub fn origin(&self, s: StateId) -> Option<(StateId, StateId)> {
        self.origins.as_ref().map(|o| o[s.0])
    }

    pub fn find_origin(&self, pair: (StateId, StateId)) -> Option<StateId> {
        self.origins
            .as_ref()
            .and_then(|o| o.iter().position(|&p| p == pair).map(StateId))
    }

    fn successors(&self) -> Vec<Vec<StateId>> {
        let mut out = vec![Vec::new(); self.state_count()];
        for (s, _, t) in self.transitions() {
            out[s.0].push(t);
        }
        out
    }

    /// States reachable from the initial state.
    pub fn reachable(&self) -> BTreeSet<StateId> {
        let succ = self.successors();
        let mut seen = vec![false; self.state_count()];
        let mut queue = VecDeque::from([self.initial]);
        seen[self.initial.0] = true;
        while let Some(s) = queue.pop_front() {
            for &t in &succ[s.0] {
                if !seen[t.0] {
                    seen[t.0] = true;
                    queue.push_back(t);
                }
            }
        }
        self.states().filter(|s| seen[s.0]).collect()
    }

    /// States from which some marked state is reachable.
    pub fn coreachable(&self) -> BTreeSet<StateId> {
        let mut pred = vec![Vec::new(); self.state_count()];
        for (s, _, t) in self.transitions() {
            pred[t.0].push(s);
        }
        let mut seen = self.marked.clone();
        let mut queue: VecDeque<StateId> = self.marked_states().into();
        while let Some(s) = queue.pop_front() {
            for &p in &pred[s.0] {
                if !seen[p.0] {
                    seen[p.0] = true;
                    queue.push_back(p);
                }
            }
        }
        self.states().filter(|s| seen[s.0]).collect()
    }

    pub fn is_trim(&self) -> bool {
        let n = self.state_count();
        self.reachable().len() == n && self.coreachable().len() == n
    }

    /// Restricts to the states that are both reachable and coreachable,
    /// renumbered in increasing order of their old index.
    pub fn trim(&self) -> Result<Automaton> {
        let coreach = self.coreachable();
        if !coreach.contains(&self.initial) {
            return Err(Error::EmptyLanguage);
        }
        let keep: Vec<StateId> = self
            .reachable()
            .intersection(&coreach)
            .copied()
            .collect();
        Ok(self.restrict(&keep))
    }

    /// Sub-automaton on `keep` (sorted, containing the initial state).
    fn restrict(&self, keep: &[StateId]) -> Automaton {
        let mut renumber = vec![None; self.state_count()];
        for (new, old) in keep.iter().enumerate() {
            renumber[old.0] = Some(StateId(new));
        }
        let n = self.alphabet.len();
        let mut delta = vec![None; keep.len() * n];
        for (new, old) in keep.iter().enumerate() {
            for a in self.alphabet.ids() {
                delta[new * n + a.0] = self.next(*old, a).and_then(|t| renumber[t.0]);
            }
        }
        Automaton {
            alphabet: self.alphabet.clone(),
            delta,
            initial: renumber[self.initial.0].expect("initial state kept"),
            marked: keep.iter().map(|s| self.marked[s.0]).collect(),
            origins: self
                .origins
                .as_ref()
                .map(|o| keep.iter().map(|s| o[s.0]).collect()),
        }
    }

    /// Re-expresses this automaton over `alphabet`, which must contain every
    /// label of the current alphabet. New labels get no transitions.
    pub fn over_alphabet(&self, alphabet: &Alphabet) -> Result<Automaton> {
        if !alphabet.contains_all(&self.alphabet) {
            let missing: Vec<_> = self
                .alphabet
                .labels()
                .iter()
                .filter(|l| alphabet.lookup(l).is_none())
                .cloned()
                .collect();
            return Err(Error::AlphabetMismatch(format!(
                "labels {} are not in the target alphabet",
                missing.join(" ")
            )));
        }
        let mut b = Automaton::builder(alphabet.clone(), self.state_count())?;
        b.initial(self.initial)?;
        for (s, a, t) in self.transitions() {
            b.transition(s, alphabet.id(self.alphabet.label(a))?, t)?;
        }
        for s in self.marked_states() {
            b.mark(s)?;
        }
        let mut out = b.build();
        out.origins = self.origins.clone();
        Ok(out)
    }

    pub fn mark_all(mut self) -> Automaton {
        self.marked.iter_mut().for_each(|m| *m = true);
        self
    }
}

/// Synchronous product `X ‖ Y`, restricted to the part reachable from
/// `(x°, y°)`.
///
/// The product alphabet is the union of both alphabets (labels of `x`
/// first). A joint move on `a` exists at `(sx, sy)` iff `a` is active in both
/// components, so actions private to one side never fire. States are
/// discovered breadth-first in alphabet order and tagged with their
/// component pair.
pub fn product(x: &Automaton, y: &Automaton) -> Automaton {
    let alphabet = x.alphabet.union(&y.alphabet);
    let to_x: Vec<Option<ActionId>> = alphabet.labels().iter().map(|l| x.alphabet.lookup(l)).collect();
    let to_y: Vec<Option<ActionId>> = alphabet.labels().iter().map(|l| y.alphabet.lookup(l)).collect();

    let mut index: HashMap<(StateId, StateId), StateId> = HashMap::new();
    let mut pairs = vec![(x.initial, y.initial)];
    index.insert(pairs[0], StateId(0));
    let mut edges = Vec::new();
    let mut cursor = 0;
    while cursor < pairs.len() {
        let (sx, sy) = pairs[cursor];
        for a in alphabet.ids() {
            let (Some(ax), Some(ay)) = (to_x[a.0], to_y[a.0]) else {
                continue;
            };
            let (Some(tx), Some(ty)) = (x.next(sx, ax), y.next(sy, ay)) else {
                continue;
            };
            let next = *index.entry((tx, ty)).or_insert_with(|| {
                pairs.push((tx, ty));
                StateId(pairs.len() - 1)
            });
            edges.push((StateId(cursor), a, next));
        }
        cursor += 1;
    }

    let n = alphabet.len();
    let mut delta = vec![None; pairs.len() * n];
    for (s, a, t) in edges {
        delta[s.0 * n + a.0] = Some(t);
    }
    Automaton {
        alphabet,
        delta,
        initial: StateId(0),
        marked: pairs
            .iter()
            .map(|&(sx, sy)| x.is_marked(sx) && y.is_marked(sy))
            .collect(),
        origins: Some(pairs),
    }
}
