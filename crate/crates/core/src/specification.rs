//! Compilation of behavioural requirements into specification automata.
//!
//! Every automaton produced here is trim, deterministic and has all of its
//! states marked, so its generated language is prefix-closed and equal to
//! its marked language. Specifications are built over the full action
//! alphabet; the restriction to what the environment can actually do comes
//! from the product with the environment.
//!
//! The `.spec` text format has one requirement per line:
//!
//! ```text
//! forbid-factor a2 a2
//! only-after a3 -> a2
//! include walls.aut
//! ```
//!
//! Requirements are conjoined.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::automaton::{product, ActionId, ActionString, Alphabet, Automaton, StateId};
use crate::error::{Error, Result};
use crate::format::parse_aut;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SpecPattern {
    /// No string may contain `factor` as a contiguous substring.
    ForbidFactor(ActionString),
    /// `gated` may only occur immediately after the full `trigger` sequence.
    OnlyImmediatelyAfter {
        trigger: ActionString,
        gated: ActionId,
    },
    /// A hand-written automaton whose states are all marked.
    Explicit(PathBuf),
}

/// A compiled specification plus non-fatal findings.
#[derive(Clone, Debug)]
pub struct CompiledSpec {
    pub automaton: Automaton,
    pub warnings: Vec<String>,
}

/// Aho-Corasick trie over the forbidden factors.
struct FactorTrie {
    children: Vec<BTreeMap<ActionId, usize>>,
    fail: Vec<usize>,
    // a factor ends at this node or at one of its failure ancestors
    hit: Vec<bool>,
}

impl FactorTrie {
    fn new(factors: &[ActionString]) -> Self {
        let mut trie = FactorTrie {
            children: vec![BTreeMap::new()],
            fail: vec![0],
            hit: vec![false],
        };
        for f in factors {
            let mut node = 0;
            for &a in f {
                node = match trie.children[node].get(&a) {
                    Some(&c) => c,
                    None => {
                        trie.children.push(BTreeMap::new());
                        trie.fail.push(0);
                        trie.hit.push(false);
                        let c = trie.children.len() - 1;
                        trie.children[node].insert(a, c);
                        c
                    }
                };
            }
            trie.hit[node] = true;
        }

        // Failure links in breadth-first order so parents are done first.
        let mut queue: std::collections::VecDeque<usize> = trie.children[0].values().copied().collect();
        while let Some(node) = queue.pop_front() {
            let kids: Vec<(ActionId, usize)> = trie.children[node].iter().map(|(&a, &c)| (a, c)).collect();
            for (a, child) in kids {
                let mut f = trie.fail[node];
                let fail = loop {
                    if let Some(&t) = trie.children[f].get(&a) {
                        break t;
                    }
                    if f == 0 {
                        break 0;
                    }
                    f = trie.fail[f];
                };
                trie.fail[child] = fail;
                trie.hit[child] = trie.hit[child] || trie.hit[fail];
                queue.push_back(child);
            }
        }
        trie
    }

    fn goto(&self, mut node: usize, a: ActionId) -> usize {
        loop {
            if let Some(&c) = self.children[node].get(&a) {
                return c;
            }
            if node == 0 {
                return 0;
            }
            node = self.fail[node];
        }
    }
}

/// Automaton generating exactly the strings over `alphabet` that contain
/// none of `factors` as a substring.
///
/// States are the trie nodes (proper prefixes of factors) that do not end
/// in a factor; moves into a node that completes a factor are left
/// undefined.
pub fn forbid_factors(alphabet: &Alphabet, factors: &[ActionString]) -> Result<Automaton> {
    for f in factors {
        if f.is_empty() {
            return Err(Error::Usage("forbidden factor must be non-empty".into()));
        }
        for &a in f {
            if a.0 >= alphabet.len() {
                return Err(Error::InvalidAction {
                    action: a.0,
                    count: alphabet.len(),
                });
            }
        }
    }
    let trie = FactorTrie::new(factors);
    let live: Vec<usize> = (0..trie.children.len()).filter(|&n| !trie.hit[n]).collect();
    let mut renumber = vec![None; trie.children.len()];
    for (i, &n) in live.iter().enumerate() {
        renumber[n] = Some(StateId(i));
    }
    let mut b = Automaton::builder(alphabet.clone(), live.len())?;
    for &n in &live {
        for a in alphabet.ids() {
            if let Some(t) = renumber[trie.goto(n, a)] {
                b.transition(renumber[n].expect("live"), a, t)?;
            }
        }
    }
    b.mark_all().build().trim()
}

/// Automaton generating the strings in which every occurrence of `gated` is
/// immediately preceded by the whole of `trigger`.
///
/// State `i` records the longest suffix of the history that is a prefix of
/// `trigger`; `gated` is enabled only in the state for the complete trigger.
pub fn only_immediately_after(
    alphabet: &Alphabet,
    trigger: &[ActionId],
    gated: ActionId,
) -> Result<Automaton> {
    if trigger.is_empty() {
        return Err(Error::Usage("trigger sequence must be non-empty".into()));
    }
    for &a in trigger.iter().chain(std::iter::once(&gated)) {
        if a.0 >= alphabet.len() {
            return Err(Error::InvalidAction {
                action: a.0,
                count: alphabet.len(),
            });
        }
    }
    let k = trigger.len();
    let matched_after = |i: usize, a: ActionId| -> usize {
        let mut seq = trigger[..i].to_vec();
        seq.push(a);
        (0..=k.min(seq.len()))
            .rev()
            .find(|&j| seq.ends_with(&trigger[..j]))
            .unwrap_or(0)
    };
    let mut b = Automaton::builder(alphabet.clone(), k + 1)?;
    for i in 0..=k {
        for a in alphabet.ids() {
            if a == gated && i != k {
                continue;
            }
            b.transition(StateId(i), a, StateId(matched_after(i, a)))?;
        }
    }
    b.mark_all().build().trim()
}

/// Parses `.spec` text. Labels are resolved against `alphabet`; `include`
/// paths are resolved against `base_dir`.
pub fn parse_spec(text: &str, alphabet: &Alphabet, base_dir: &Path) -> Result<Vec<SpecPattern>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        let mut toks = body.split_whitespace();
        let Some(cmd) = toks.next() else { continue };
        let args: Vec<&str> = toks.collect();
        let ids = |labels: &[&str]| -> Result<ActionString> {
            labels
                .iter()
                .map(|l| alphabet.id(l).map_err(|e| Error::parse(line, e.to_string())))
                .collect()
        };
        let pattern = match cmd {
            "forbid-factor" => {
                if args.is_empty() {
                    return Err(Error::parse(line, "forbid-factor needs at least one action"));
                }
                SpecPattern::ForbidFactor(ids(&args)?)
            }
            "only-after" => {
                let Some(arrow) = args.iter().position(|&t| t == "->") else {
                    return Err(Error::parse(line, "expected `only-after <trigger...> -> <action>`"));
                };
                let (trigger, rest) = (&args[..arrow], &args[arrow + 1..]);
                if trigger.is_empty() || rest.len() != 1 {
                    return Err(Error::parse(line, "expected `only-after <trigger...> -> <action>`"));
                }
                SpecPattern::OnlyImmediatelyAfter {
                    trigger: ids(trigger)?,
                    gated: ids(rest)?[0],
                }
            }
            "include" => {
                let [path] = args.as_slice() else {
                    return Err(Error::parse(line, "include takes exactly one path"));
                };
                SpecPattern::Explicit(base_dir.join(path))
            }
            other => return Err(Error::parse(line, format!("unknown requirement `{other}`"))),
        };
        out.push(pattern);
    }
    Ok(out)
}

pub fn parse_spec_file(path: &Path, alphabet: &Alphabet) -> Result<Vec<SpecPattern>> {
    let text = std::fs::read_to_string(path)?;
    let base = path.parent().unwrap_or(Path::new("."));
    parse_spec(&text, alphabet, base).map_err(|e| Error::Include {
        path: path.to_path_buf(),
        source: Box::new(e),
    })
}

fn load_explicit(path: &Path, alphabet: &Alphabet) -> Result<Automaton> {
    let wrap = |e: Error| Error::Include {
        path: path.to_path_buf(),
        source: Box::new(e),
    };
    let text = std::fs::read_to_string(path).map_err(|e| wrap(e.into()))?;
    let aut = parse_aut(&text).map_err(wrap)?;
    if !aut.all_marked() {
        return Err(wrap(Error::NotRealizable(
            "included specification automata must have every state marked".into(),
        )));
    }
    aut.over_alphabet(alphabet).map_err(wrap)
}

/// Builds one automaton per pattern and intersects them all.
pub fn compile_spec(patterns: &[SpecPattern], alphabet: &Alphabet) -> Result<CompiledSpec> {
    let mut acc = Automaton::universal(alphabet.clone());
    for p in patterns {
        let part = match p {
            SpecPattern::ForbidFactor(f) => forbid_factors(alphabet, std::slice::from_ref(f))?,
            SpecPattern::OnlyImmediatelyAfter { trigger, gated } => {
                only_immediately_after(alphabet, trigger, *gated)?
            }
            SpecPattern::Explicit(path) => load_explicit(path, alphabet)?,
        };
        acc = product(&acc, &part);
    }
    let automaton = strip_origins(acc.trim()?);
    let mut warnings = Vec::new();
    if automaton.active(automaton.initial()).next().is_none() {
        warnings.push("the specification enables no action at the initial state".to_string());
    }
    Ok(CompiledSpec { automaton, warnings })
}

// Origin tags of the intermediate products are meaningless to callers.
fn strip_origins(aut: Automaton) -> Automaton {
    let mut b = Automaton::builder(aut.alphabet().clone(), aut.state_count()).expect("non-empty");
    b.initial(aut.initial()).expect("valid");
    for (s, a, t) in aut.transitions() {
        b.transition(s, a, t).expect("deterministic");
    }
    b.mark_all().build()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::language::enumerate_language;
    use std::collections::BTreeSet;

    fn g() -> Alphabet {
        Alphabet::grid()
    }

    fn s(text: &str) -> ActionString {
        g().parse_string(text).unwrap()
    }

    #[test]
    fn two_right_spec_has_two_states() {
        let h = forbid_factors(&g(), &[s("a2 a2")]).unwrap();
        assert_eq!(h.state_count(), 2);
        assert!(h.all_marked());
        assert_eq!(h.active_set(StateId(0)), g().ids().collect());
        assert_eq!(h.active_set(StateId(1)), BTreeSet::from([ActionId(0), ActionId(2), ActionId(3)]));
        assert_eq!(h.next(StateId(0), ActionId(1)), Some(StateId(1)));
        assert_eq!(h.next(StateId(1), ActionId(0)), Some(StateId(0)));
    }

    #[test]
    fn two_factor_spec_has_three_states() {
        let h = forbid_factors(&g(), &[s("a1 a3"), s("a2 a4")]).unwrap();
        assert_eq!(h.state_count(), 3);
        let after_a1 = h.run(&s("a1")).unwrap();
        let after_a2 = h.run(&s("a2")).unwrap();
        assert_ne!(after_a1, after_a2);
        assert!(!h.active_set(after_a1).contains(&ActionId(2)));
        assert!(!h.active_set(after_a2).contains(&ActionId(3)));
    }

    #[test]
    fn no_factors_is_universal() {
        let h = forbid_factors(&g(), &[]).unwrap();
        assert_eq!(h, Automaton::universal(g()));
    }

    #[test]
    fn forbidding_every_letter_leaves_only_the_empty_string() {
        let all: Vec<ActionString> = g().ids().map(|a| vec![a]).collect();
        let h = forbid_factors(&g(), &all).unwrap();
        assert_eq!(h.state_count(), 1);
        assert_eq!(h.transition_count(), 0);
    }

    #[test]
    fn empty_factor_is_rejected() {
        assert!(matches!(forbid_factors(&g(), &[vec![]]), Err(Error::Usage(_))));
    }

    #[test]
    fn overlapping_factors_use_failure_links() {
        // "a1 a1 a2" must be caught after "a1 a1 a1 a2" too
        let h = forbid_factors(&g(), &[s("a1 a1 a2")]).unwrap();
        assert!(!h.accepts(&s("a1 a1 a1 a2")));
        assert!(h.accepts(&s("a1 a2 a1 a1 a3")));
    }

    #[test]
    fn only_after_matches_two_state_structure() {
        let h = only_immediately_after(&g(), &s("a3"), ActionId(1)).unwrap();
        assert_eq!(h.state_count(), 2);
        assert!(h.accepts(&s("a3 a2")));
        assert!(!h.accepts(&s("a1 a2")));
        assert!(!h.accepts(&s("a3 a2 a2")));
        assert!(h.accepts(&s("a1 a4 a3 a3 a1")));
        assert!(h.accepts(&[]));
    }

    #[test]
    fn only_after_with_gated_inside_trigger() {
        // a2 needs a2 a1 right before it; a2 can never happen first, so only
        // the start state survives trimming.
        let h = only_immediately_after(&g(), &s("a2 a1"), ActionId(1)).unwrap();
        assert_eq!(h.state_count(), 1);
        assert!(!h.active_set(StateId(0)).contains(&ActionId(1)));
    }

    #[test]
    fn only_after_rejects_empty_trigger() {
        assert!(matches!(
            only_immediately_after(&g(), &[], ActionId(1)),
            Err(Error::Usage(_))
        ));
    }

    #[test]
    fn parse_spec_lines() {
        let pats = parse_spec(
            "# format: v1\nforbid-factor a2 a2\n\nonly-after a1 a1 -> a2  # two ups\ninclude x.aut\n",
            &g(),
            Path::new("/base"),
        )
        .unwrap();
        assert_eq!(
            pats,
            vec![
                SpecPattern::ForbidFactor(s("a2 a2")),
                SpecPattern::OnlyImmediatelyAfter {
                    trigger: s("a1 a1"),
                    gated: ActionId(1)
                },
                SpecPattern::Explicit(PathBuf::from("/base/x.aut")),
            ]
        );
    }

    #[test]
    fn parse_spec_errors_have_lines() {
        let err = parse_spec("forbid-factor a2\nforbid-factor a9\n", &g(), Path::new(".")).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
        let err = parse_spec("only-after a3 a2\n", &g(), Path::new(".")).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
        let err = parse_spec("\nallow a1\n", &g(), Path::new(".")).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
    }

    #[test]
    fn empty_spec_compiles_to_universal() {
        let c = compile_spec(&[], &g()).unwrap();
        assert_eq!(c.automaton, Automaton::universal(g()));
        assert!(c.warnings.is_empty());
    }

    #[test]
    fn compiled_single_pattern_matches_direct_build() {
        let pats = parse_spec("forbid-factor a2 a2\n", &g(), Path::new(".")).unwrap();
        let c = compile_spec(&pats, &g()).unwrap();
        let direct = forbid_factors(&g(), &[s("a2 a2")]).unwrap();
        assert_eq!(
            enumerate_language(&c.automaton, 6).unwrap(),
            enumerate_language(&direct, 6).unwrap()
        );
    }

    #[test]
    fn dead_start_is_a_warning() {
        let pats: Vec<SpecPattern> = g().ids().map(|a| SpecPattern::ForbidFactor(vec![a])).collect();
        let c = compile_spec(&pats, &g()).unwrap();
        assert_eq!(c.warnings.len(), 1);
    }

    #[test]
    fn include_requires_all_marked() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("h.aut");
        std::fs::write(&path, "alphabet: a1\nstates: 1\ninitial: 0\ntrans: 0 a1 0\n").unwrap();
        let err = compile_spec(&[SpecPattern::Explicit(path.clone())], &g()).unwrap_err();
        assert!(matches!(err, Error::Include { .. }));

        std::fs::write(&path, "alphabet: a2 a1\nstates: 1\ninitial: 0\nmarked: 0\ntrans: 0 a1 0\n").unwrap();
        let c = compile_spec(&[SpecPattern::Explicit(path)], &g()).unwrap();
        assert_eq!(c.automaton.active_set(StateId(0)), BTreeSet::from([ActionId(0)]));
    }
}
