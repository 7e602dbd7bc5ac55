//! Probabilistic languages of the unsupervised and supervised agent.
//!
//! With behaviour policy `π_b`, the probability that the agent produces
//! history `la` is `P(l) · p(a | l)`, where `p(a | l)` is the policy's
//! probability of `a` in the state reached by `l`. Under supervision the
//! policy is restricted to the admissible set (and renormalised there) and
//! the supervisor contributes an indicator factor that is 1 on admissible
//! actions and 0 elsewhere.

use rand::Rng;

use crate::automaton::{product, ActionId, Automaton, StateId};
use crate::coverage::union_active;
use crate::error::{Error, Result};
use crate::language::DEFAULT_STRING_CAP;
use crate::learner::QTable;

#[derive(Clone, Copy, Debug)]
pub enum BehaviorPolicy<'q> {
    Uniform,
    /// With probability `epsilon` uniform over the candidates, otherwise the
    /// candidate with the largest Q-value (lowest id on ties).
    EpsilonGreedy { q: &'q QTable, epsilon: f64 },
}

impl BehaviorPolicy<'_> {
    /// Probability of each of `candidates` (ascending ids) at `state`.
    ///
    /// Every candidate gets strictly positive mass as long as `epsilon > 0`.
    pub fn distribution(&self, state: StateId, candidates: &[ActionId]) -> Vec<f64> {
        let k = candidates.len();
        if k == 0 {
            return Vec::new();
        }
        match *self {
            BehaviorPolicy::Uniform => vec![1.0 / k as f64; k],
            BehaviorPolicy::EpsilonGreedy { q, epsilon } => {
                let best = q.argmax_among(state, candidates).expect("non-empty");
                candidates
                    .iter()
                    .map(|&a| {
                        let explore = epsilon / k as f64;
                        if a == best {
                            explore + (1.0 - epsilon)
                        } else {
                            explore
                        }
                    })
                    .collect()
            }
        }
    }

    pub fn probability(&self, state: StateId, candidates: &[ActionId], a: ActionId) -> f64 {
        match candidates.iter().position(|&c| c == a) {
            Some(i) => self.distribution(state, candidates)[i],
            None => 0.0,
        }
    }

    /// Draws one of `candidates`, or `None` when there are none.
    pub fn sample<R: Rng + ?Sized>(&self, state: StateId, candidates: &[ActionId], rng: &mut R) -> Option<ActionId> {
        match (*self, candidates) {
            (_, []) => None,
            (_, [only]) => Some(*only),
            (BehaviorPolicy::Uniform, _) => Some(candidates[rng.gen_range(0..candidates.len())]),
            (BehaviorPolicy::EpsilonGreedy { q, epsilon }, _) => {
                if rng.gen::<f64>() < epsilon {
                    Some(candidates[rng.gen_range(0..candidates.len())])
                } else {
                    q.argmax_among(state, candidates)
                }
            }
        }
    }
}

/// Actions the supervised agent may choose at `(spec_state, env_state)`:
/// admissible for the specification and defined in the environment.
pub(crate) fn supervised_candidates(
    spec: &Automaton,
    env: &Automaton,
    spec_state: StateId,
    env_state: StateId,
    to_spec: &[Option<ActionId>],
) -> Vec<ActionId> {
    env.active(env_state)
        .filter(|a| to_spec[a.0].is_some_and(|ah| spec.next(spec_state, ah).is_some()))
        .collect()
}

pub(crate) fn label_map(from: &Automaton, to: &Automaton) -> Vec<Option<ActionId>> {
    from.alphabet()
        .labels()
        .iter()
        .map(|l| to.alphabet().lookup(l))
        .collect()
}

/// Probability that the unsupervised agent generates `l`; 0 if `l` is not
/// in the environment's language.
pub fn string_prob_unconstrained(env: &Automaton, policy: &BehaviorPolicy<'_>, l: &[ActionId]) -> f64 {
    let mut s = env.initial();
    let mut p = 1.0;
    for &a in l {
        if a.0 >= env.alphabet().len() {
            return 0.0;
        }
        let Some(next) = env.next(s, a) else {
            return 0.0;
        };
        let cands: Vec<ActionId> = env.active(s).collect();
        p *= policy.probability(s, &cands, a);
        s = next;
    }
    p
}

/// Probability that the agent supervised by `spec` generates `l` (actions
/// are ids of the environment alphabet).
pub fn string_prob_supervised(
    spec: &Automaton,
    env: &Automaton,
    policy: &BehaviorPolicy<'_>,
    l: &[ActionId],
) -> f64 {
    let to_spec = label_map(env, spec);
    let (mut qh, mut qg) = (spec.initial(), env.initial());
    let mut p = 1.0;
    for &a in l {
        if a.0 >= env.alphabet().len() {
            return 0.0;
        }
        let Some(ng) = env.next(qg, a) else {
            return 0.0;
        };
        let Some(nh) = to_spec[a.0].and_then(|ah| spec.next(qh, ah)) else {
            return 0.0;
        };
        let cands = supervised_candidates(spec, env, qh, qg, &to_spec);
        p *= policy.probability(qg, &cands, a);
        qh = nh;
        qg = ng;
    }
    p
}

/// Natural log of [`string_prob_supervised`], for histories long enough to
/// underflow the plain product. `-inf` when the probability is zero.
pub fn string_log_prob_supervised(
    spec: &Automaton,
    env: &Automaton,
    policy: &BehaviorPolicy<'_>,
    l: &[ActionId],
) -> f64 {
    let to_spec = label_map(env, spec);
    let (mut qh, mut qg) = (spec.initial(), env.initial());
    let mut log_p = 0.0;
    for &a in l {
        let step = (a.0 < env.alphabet().len())
            .then(|| env.next(qg, a))
            .flatten()
            .zip(to_spec.get(a.0).copied().flatten().and_then(|ah| spec.next(qh, ah)));
        let Some((ng, nh)) = step else {
            return f64::NEG_INFINITY;
        };
        let cands = supervised_candidates(spec, env, qh, qg, &to_spec);
        log_p += policy.probability(qg, &cands, a).ln();
        qh = nh;
        qg = ng;
    }
    log_p
}

/// Result of [`visit_prob`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VisitProbability {
    pub value: f64,
    /// True when `value` is exact (a structural zero); otherwise `value` is
    /// the best single-history probability found within the length bound.
    pub exact: bool,
}

/// Probability that pair `(state, action)` is taken after some history of
/// length below `max_len`, maximised over histories.
///
/// A zero is proved exactly when the pair is structurally impossible (via
/// the product's active sets, or the environment alone when unsupervised).
pub fn visit_prob(
    spec: Option<&Automaton>,
    env: &Automaton,
    policy: &BehaviorPolicy<'_>,
    state: StateId,
    action: ActionId,
    max_len: usize,
) -> Result<VisitProbability> {
    env.check_state(state)?;
    env.check_action(action)?;
    let universal;
    let spec = match spec {
        Some(h) => h,
        None => {
            universal = Automaton::universal(env.alphabet().clone());
            &universal
        }
    };
    let m = product(spec, env);
    if !union_active(&m, state, env.alphabet())?.contains(&action) {
        return Ok(VisitProbability {
            value: 0.0,
            exact: true,
        });
    }

    let to_spec = label_map(env, spec);
    let mut best: f64 = 0.0;
    let mut visited = 0usize;
    let mut stack = vec![(0usize, spec.initial(), env.initial(), 1.0f64)];
    while let Some((len, qh, qg, p)) = stack.pop() {
        visited += 1;
        if visited > DEFAULT_STRING_CAP {
            return Err(Error::OracleOverflow(DEFAULT_STRING_CAP));
        }
        if len >= max_len {
            continue;
        }
        let cands = supervised_candidates(spec, env, qh, qg, &to_spec);
        let dist = policy.distribution(qg, &cands);
        for (&a, &pa) in cands.iter().zip(&dist) {
            if qg == state && a == action {
                best = best.max(p * pa);
            }
            let nh = spec.next(qh, to_spec[a.0].expect("candidate")).expect("candidate");
            let ng = env.next(qg, a).expect("candidate");
            stack.push((len + 1, nh, ng, p * pa));
        }
    }
    Ok(VisitProbability {
        value: best,
        exact: false,
    })
}
