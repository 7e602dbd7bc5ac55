#![allow(dead_code)]

use rand::Rng;
use suprl::automaton::{ActionId, ActionString, Alphabet, Automaton, StateId};
use suprl::environment::{grid_world, GridSpec, DOWN, RIGHT};
use suprl::specification::{forbid_factors, only_immediately_after};

pub fn grid4() -> Automaton {
    grid_world(&GridSpec::corner_to_corner(4, 4)).unwrap()
}

/// Two consecutive moves right are forbidden.
pub fn h1() -> Automaton {
    forbid_factors(&Alphabet::grid(), &[vec![RIGHT, RIGHT]]).unwrap()
}

/// A move right is allowed only immediately after a move down.
pub fn h2() -> Automaton {
    only_immediately_after(&Alphabet::grid(), &[DOWN], RIGHT).unwrap()
}

pub fn labels(s: &str) -> ActionString {
    Alphabet::grid().parse_string(s).unwrap()
}

/// Random partial deterministic automaton over `alphabet`.
pub fn random_automaton<R: Rng>(rng: &mut R, alphabet: &Alphabet, max_states: usize, density: f64) -> Automaton {
    let n = rng.gen_range(1..=max_states);
    let mut b = Automaton::builder(alphabet.clone(), n).unwrap();
    for s in 0..n {
        for a in alphabet.ids() {
            if rng.gen_bool(density) {
                b.transition(StateId(s), a, StateId(rng.gen_range(0..n))).unwrap();
            }
        }
        if rng.gen_bool(0.5) {
            b.mark(StateId(s)).unwrap();
        }
    }
    b.build()
}

/// Random factor list: up to `max_factors` factors of length 1..=3 over the
/// grid alphabet, with single letters rarer.
pub fn random_factors<R: Rng>(rng: &mut R, max_factors: usize) -> Vec<ActionString> {
    let k = rng.gen_range(0..=max_factors);
    (0..k)
        .map(|_| {
            let len = if rng.gen_bool(0.1) { 1 } else { rng.gen_range(2..=3) };
            (0..len).map(|_| ActionId(rng.gen_range(0..4))).collect()
        })
        .collect()
}

/// Naive scan: does `l` contain any of `factors` as a contiguous substring?
pub fn contains_factor(l: &[ActionId], factors: &[ActionString]) -> bool {
    factors
        .iter()
        .any(|f| l.windows(f.len()).any(|w| w == f.as_slice()))
}

/// Naive scan: is every `gated` immediately preceded by `trigger`?
pub fn gated_ok(l: &[ActionId], trigger: &[ActionId], gated: ActionId) -> bool {
    l.iter()
        .enumerate()
        .filter(|(_, &a)| a == gated)
        .all(|(i, _)| i >= trigger.len() && l[i - trigger.len()..i] == *trigger)
}

/// Every string over `alphabet` of length at most `max_len`.
pub fn all_strings(alphabet: &Alphabet, max_len: usize) -> Vec<ActionString> {
    let mut out = vec![vec![]];
    let mut frontier = vec![vec![]];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for l in &frontier {
            for a in alphabet.ids() {
                let mut la: ActionString = l.clone();
                la.push(a);
                next.push(la);
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}
