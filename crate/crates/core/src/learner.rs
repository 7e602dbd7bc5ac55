//! Tabular Q-learning with and without a supervisor, and the exact
//! value-iteration oracle for `Q*` in a known deterministic environment.
//!
//! Each step the supervisor (if any) names the admissible actions, the
//! behaviour policy picks one of those that the environment also allows, the
//! environment moves, and the table is updated with the one-step Q-learning
//! rule. The bootstrap maximum ranges over every action the environment
//! offers at the successor, not just the admissible ones, so the fixed point
//! is the unconstrained optimum.

use std::collections::BTreeSet;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::automaton::{ActionId, ActionString, Automaton, StateId};
use crate::environment::RewardSpec;
use crate::error::{Error, Result};
use crate::probability::BehaviorPolicy;
use crate::supervisor::Supervisor;

/// Values closer than this count as tied when comparing argmax sets.
pub const ARGMAX_TOLERANCE: f64 = 1e-9;

const MAX_SWEEPS: usize = 100_000;

#[derive(Clone, Debug, PartialEq)]
pub struct QTable {
    states: usize,
    actions: usize,
    values: Vec<f64>,
    visits: Vec<u64>,
}

impl QTable {
    pub fn new(states: usize, actions: usize) -> Self {
        QTable {
            states,
            actions,
            values: vec![0.0; states * actions],
            visits: vec![0; states * actions],
        }
    }

    pub fn for_env(env: &Automaton) -> Self {
        QTable::new(env.state_count(), env.alphabet().len())
    }

    pub fn state_count(&self) -> usize {
        self.states
    }

    pub fn action_count(&self) -> usize {
        self.actions
    }

    #[inline]
    fn idx(&self, s: StateId, a: ActionId) -> usize {
        s.0 * self.actions + a.0
    }

    pub fn get(&self, s: StateId, a: ActionId) -> f64 {
        self.values[self.idx(s, a)]
    }

    pub fn set(&mut self, s: StateId, a: ActionId, v: f64) {
        let i = self.idx(s, a);
        self.values[i] = v;
    }

    pub fn visits(&self, s: StateId, a: ActionId) -> u64 {
        self.visits[self.idx(s, a)]
    }

    pub fn row(&self, s: StateId) -> &[f64] {
        &self.values[s.0 * self.actions..(s.0 + 1) * self.actions]
    }

    /// Highest-valued action among `candidates`, lowest id on ties.
    pub fn argmax_among(&self, s: StateId, candidates: &[ActionId]) -> Option<ActionId> {
        let mut best: Option<(ActionId, f64)> = None;
        for &a in candidates {
            let v = self.get(s, a);
            if best.is_none_or(|(_, bv)| v > bv) {
                best = Some((a, v));
            }
        }
        best.map(|(a, _)| a)
    }

    /// Actions within [`ARGMAX_TOLERANCE`] of the best among `candidates`.
    pub fn argmax_set(&self, s: StateId, candidates: &[ActionId]) -> BTreeSet<ActionId> {
        let max = candidates
            .iter()
            .map(|&a| self.get(s, a))
            .fold(f64::NEG_INFINITY, f64::max);
        candidates
            .iter()
            .copied()
            .filter(|&a| self.get(s, a) >= max - ARGMAX_TOLERANCE)
            .collect()
    }

    pub fn max_among(&self, s: StateId, candidates: impl Iterator<Item = ActionId>) -> f64 {
        candidates
            .map(|a| self.get(s, a))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Largest absolute entry-wise difference.
    pub fn max_abs_diff(&self, other: &QTable) -> f64 {
        assert_eq!((self.states, self.actions), (other.states, other.actions));
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn total_visits(&self) -> u64 {
        self.visits.iter().sum()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum AlphaSchedule {
    Constant(f64),
    /// `1 / (1 + n(s, a))`, with `n` the visits before this update.
    VisitCount,
}

impl AlphaSchedule {
    pub fn rate(&self, visits: u64) -> f64 {
        match *self {
            AlphaSchedule::Constant(alpha) => alpha,
            AlphaSchedule::VisitCount => 1.0 / (1.0 + visits as f64),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LearnConfig {
    pub episodes: usize,
    pub max_steps: usize,
    pub epsilon: f64,
    pub alpha: AlphaSchedule,
    pub seed: u64,
}

impl Default for LearnConfig {
    fn default() -> Self {
        LearnConfig {
            episodes: 20_000,
            max_steps: 500,
            epsilon: 0.2,
            alpha: AlphaSchedule::VisitCount,
            seed: 0,
        }
    }
}

impl LearnConfig {
    pub fn validate(&self) -> Result<()> {
        if self.episodes == 0 || self.max_steps == 0 {
            return Err(Error::Usage("episodes and step cap must be at least 1".into()));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::Usage(format!("epsilon must lie in (0, 1), got {}", self.epsilon)));
        }
        if let AlphaSchedule::Constant(a) = self.alpha {
            if !(a > 0.0 && a <= 1.0) {
                return Err(Error::Usage(format!("alpha must lie in (0, 1], got {a}")));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Termination {
    Goal,
    Deadlock,
    StepCap,
}

impl std::fmt::Display for Termination {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Termination::Goal => "goal",
            Termination::Deadlock => "deadlock",
            Termination::StepCap => "step-cap",
        })
    }
}

/// `(S_t, A_t, R_{t+1})`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Step {
    pub state: StateId,
    pub action: ActionId,
    pub reward: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EpisodeTrace {
    pub index: usize,
    pub steps: Vec<Step>,
    pub final_state: StateId,
    pub termination: Termination,
}

impl EpisodeTrace {
    /// The executed history `A_0 … A_{T-1}`.
    pub fn actions(&self) -> ActionString {
        self.steps.iter().map(|s| s.action).collect()
    }

    pub fn discounted_return(&self, gamma: f64) -> f64 {
        self.steps
            .iter()
            .rev()
            .fold(0.0, |acc, s| s.reward + gamma * acc)
    }
}

fn check_env_for_values(env: &Automaton) -> Result<()> {
    if !env.is_total_on(|s| !env.is_marked(s)) {
        return Err(Error::Usage(
            "the environment transition function must be total on non-goal states".into(),
        ));
    }
    Ok(())
}

/// `Q*` by synchronous value iteration, until no entry moves by `tol`.
pub fn value_iteration_oracle(env: &Automaton, rewards: &RewardSpec, tol: f64) -> Result<QTable> {
    rewards.validate()?;
    check_env_for_values(env)?;
    let mut q = QTable::for_env(env);
    for _ in 0..MAX_SWEEPS {
        let mut next = q.clone();
        let mut change: f64 = 0.0;
        for s in env.states().filter(|&s| !env.is_marked(s)) {
            for a in env.alphabet().ids() {
                let t = env.next(s, a).expect("total");
                let bootstrap = if env.is_marked(t) {
                    0.0
                } else {
                    q.max_among(t, env.alphabet().ids())
                };
                let v = rewards.reward(env, t) + rewards.gamma * bootstrap;
                change = change.max((v - q.get(s, a)).abs());
                next.set(s, a, v);
            }
        }
        q = next;
        if change < tol {
            return Ok(q);
        }
    }
    Err(Error::NonConvergence(MAX_SWEEPS))
}

/// ε-greedy choice over `admissible`; `None` signals deadlock.
pub fn select_action<R: rand::Rng + ?Sized>(
    q: &QTable,
    epsilon: f64,
    s: StateId,
    admissible: &[ActionId],
    rng: &mut R,
) -> Option<ActionId> {
    BehaviorPolicy::EpsilonGreedy { q, epsilon }.sample(s, admissible, rng)
}

/// Runs one episode from the environment's initial state, updating `q` in
/// place after every step.
pub fn run_episode<R: rand::Rng + ?Sized>(
    env: &Automaton,
    mut supervisor: Option<&mut Supervisor<'_>>,
    q: &mut QTable,
    config: &LearnConfig,
    rewards: &RewardSpec,
    index: usize,
    rng: &mut R,
) -> Result<EpisodeTrace> {
    let to_spec: Option<Vec<Option<ActionId>>> = supervisor.as_ref().map(|sup| {
        env.alphabet()
            .labels()
            .iter()
            .map(|l| sup.spec().alphabet().lookup(l))
            .collect()
    });
    if let Some(sup) = supervisor.as_deref_mut() {
        sup.reset();
    }

    let mut s = env.initial();
    let mut steps = Vec::new();
    let mut termination = Termination::StepCap;
    for _ in 0..config.max_steps {
        if env.is_marked(s) {
            termination = Termination::Goal;
            break;
        }
        let candidates: Vec<ActionId> = match (&supervisor, &to_spec) {
            (Some(sup), Some(map)) => env
                .active(s)
                .filter(|a| map[a.0].is_some_and(|ah| sup.is_admissible(ah)))
                .collect(),
            _ => env.active(s).collect(),
        };
        let Some(a) = select_action(q, config.epsilon, s, &candidates, rng) else {
            termination = Termination::Deadlock;
            break;
        };
        let next = env.next(s, a).expect("candidate is defined");
        let reward = rewards.reward(env, next);
        let bootstrap = if env.is_marked(next) {
            0.0
        } else {
            q.max_among(next, env.active(next))
        };
        let i = q.idx(s, a);
        let alpha = config.alpha.rate(q.visits[i]);
        q.visits[i] += 1;
        q.values[i] += alpha * (reward + rewards.gamma * bootstrap - q.values[i]);

        if let (Some(sup), Some(map)) = (supervisor.as_deref_mut(), &to_spec) {
            sup.advance(map[a.0].expect("admissible"))?;
        }
        steps.push(Step {
            state: s,
            action: a,
            reward,
        });
        s = next;
    }
    if termination == Termination::StepCap && env.is_marked(s) {
        termination = Termination::Goal;
    }
    Ok(EpisodeTrace {
        index,
        steps,
        final_state: s,
        termination,
    })
}

#[derive(Clone, Debug)]
pub struct TrainOutcome {
    pub q: QTable,
    pub traces: Vec<EpisodeTrace>,
    pub returns: Vec<f64>,
    pub deadlocks: usize,
    pub step_caps: usize,
}

/// Trains from a zero table for `config.episodes` episodes.
pub fn train(
    env: &Automaton,
    spec: Option<&Automaton>,
    config: &LearnConfig,
    rewards: &RewardSpec,
) -> Result<TrainOutcome> {
    config.validate()?;
    rewards.validate()?;
    let mut supervisor = spec.map(Supervisor::realize).transpose()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut q = QTable::for_env(env);
    let mut traces = Vec::with_capacity(config.episodes);
    for i in 0..config.episodes {
        traces.push(run_episode(env, supervisor.as_mut(), &mut q, config, rewards, i, &mut rng)?);
    }
    let returns = traces.iter().map(|t| t.discounted_return(rewards.gamma)).collect();
    let count = |c: Termination| traces.iter().filter(|t| t.termination == c).count();
    Ok(TrainOutcome {
        deadlocks: count(Termination::Deadlock),
        step_caps: count(Termination::StepCap),
        q,
        traces,
        returns,
    })
}
