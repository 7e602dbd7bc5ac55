//! Environment automata: finite state set, total transition function, known
//! initial state and goal (marked) states.

use std::collections::BTreeSet;
use std::fmt;

use crate::automaton::{ActionId, Alphabet, Automaton, StateId};
use crate::error::{Error, Result};
use crate::format::{directives, parse_aut, parse_index};

pub const UP: ActionId = ActionId(0);
pub const RIGHT: ActionId = ActionId(1);
pub const DOWN: ActionId = ActionId(2);
pub const LEFT: ActionId = ActionId(3);

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GridSpec {
    pub width: usize,
    pub height: usize,
    pub initial: StateId,
    pub goals: BTreeSet<StateId>,
}

impl GridSpec {
    /// A `width × height` grid from the top-left cell to the bottom-right one.
    pub fn corner_to_corner(width: usize, height: usize) -> Self {
        GridSpec {
            width,
            height,
            initial: StateId(0),
            goals: BTreeSet::from([StateId(width * height - 1)]),
        }
    }

    fn validate(&self) -> Result<()> {
        let cells = self.width * self.height;
        if cells == 0 {
            return Err(Error::Usage("grid dimensions must be positive".into()));
        }
        for s in self.goals.iter().chain(std::iter::once(&self.initial)) {
            if s.0 >= cells {
                return Err(Error::InvalidState {
                    state: s.0,
                    count: cells,
                });
            }
        }
        Ok(())
    }
}

/// Per-step reward, bonus on entering a goal, and discount.
///
/// A move costs `step_reward`; a move that lands on a goal additionally
/// earns `goal_reward`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RewardSpec {
    pub step_reward: f64,
    pub goal_reward: f64,
    pub gamma: f64,
}

impl Default for RewardSpec {
    fn default() -> Self {
        RewardSpec {
            step_reward: -1.0,
            goal_reward: 0.0,
            gamma: 0.95,
        }
    }
}

impl RewardSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma >= 0.0 && self.gamma <= 1.0) {
            return Err(Error::Usage(format!("discount must lie in [0, 1], got {}", self.gamma)));
        }
        if !self.step_reward.is_finite() || !self.goal_reward.is_finite() {
            return Err(Error::Usage("rewards must be finite".into()));
        }
        Ok(())
    }

    pub fn reward(&self, env: &Automaton, next: StateId) -> f64 {
        if env.is_marked(next) {
            self.step_reward + self.goal_reward
        } else {
            self.step_reward
        }
    }
}

/// Grid world with actions `a1`..`a4` = up, right, down, left.
///
/// Cells are numbered row-major from the top-left. A move into a border
/// leaves the agent in place. Goal cells loop on every action so that `δ` is
/// total; episodes end on reaching a goal, not on a missing transition.
pub fn grid_world(spec: &GridSpec) -> Result<Automaton> {
    spec.validate()?;
    let (w, h) = (spec.width, spec.height);
    let mut b = Automaton::builder(Alphabet::grid(), w * h)?;
    b.initial(spec.initial)?;
    for s in 0..w * h {
        let from = StateId(s);
        if spec.goals.contains(&from) {
            for a in [UP, RIGHT, DOWN, LEFT] {
                b.transition(from, a, from)?;
            }
            b.mark(from)?;
            continue;
        }
        let (row, col) = (s / w, s % w);
        let up = if row == 0 { s } else { s - w };
        let right = if col + 1 == w { s } else { s + 1 };
        let down = if row + 1 == h { s } else { s + w };
        let left = if col == 0 { s } else { s - 1 };
        for (a, t) in [(UP, up), (RIGHT, right), (DOWN, down), (LEFT, left)] {
            b.transition(from, a, StateId(t))?;
        }
    }
    Ok(b.build())
}

/// Loads an environment from `.aut` text, or from the grid shorthand
///
/// ```text
/// grid: 4 4
/// initial: 0
/// goals: 15
/// ```
pub fn load_env(text: &str) -> Result<Automaton> {
    let dirs = directives(text)?;
    if dirs.first().map(|d| d.key) != Some("grid") {
        return parse_aut(text);
    }
    let mut dims = None;
    let mut initial = None;
    let mut goals = None;
    for d in &dirs {
        let values = d
            .args
            .iter()
            .map(|t| parse_index(d.line, d.key, t))
            .collect::<Result<Vec<_>>>()?;
        let slot = match d.key {
            "grid" => &mut dims,
            "initial" => &mut initial,
            "goals" => &mut goals,
            other => {
                return Err(Error::parse(
                    d.line,
                    format!("unknown key `{other}` in grid shorthand"),
                ))
            }
        };
        if slot.is_some() {
            return Err(Error::parse(d.line, format!("duplicate `{}` line", d.key)));
        }
        *slot = Some((d.line, values));
    }
    let last = dirs.last().map_or(1, |d| d.line);
    let (line, dims) = dims.expect("first directive is grid");
    let [width, height] = dims[..] else {
        return Err(Error::parse(line, "`grid` takes `<width> <height>`"));
    };
    let initial = match initial {
        Some((_, v)) if v.len() == 1 => StateId(v[0]),
        Some((line, _)) => return Err(Error::parse(line, "`initial` takes exactly one value")),
        None => StateId(0),
    };
    let goals = match goals {
        Some((_, v)) => v.into_iter().map(StateId).collect(),
        None => return Err(Error::parse(last, "missing `goals` line")),
    };
    let spec = GridSpec {
        width,
        height,
        initial,
        goals,
    };
    grid_world(&spec).map_err(|e| Error::parse(line, e.to_string()))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    NotTotal { state: StateId, action: String },
    NoGoalStates,
    UnreachableGoal(StateId),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NotTotal { state, action } => {
                write!(f, "transition function not total at ({state}, {action})")
            }
            Violation::NoGoalStates => write!(f, "no goal states"),
            Violation::UnreachableGoal(s) => write!(f, "goal state {s} is unreachable"),
        }
    }
}

/// Checks the environment assumptions: finite (by construction), total `δ`
/// on non-goal states, and a non-empty set of reachable goals.
pub fn validate_env(env: &Automaton) -> Vec<Violation> {
    let mut out = Vec::new();
    for s in env.states().filter(|&s| !env.is_marked(s)) {
        for a in env.alphabet().ids() {
            if env.next(s, a).is_none() {
                out.push(Violation::NotTotal {
                    state: s,
                    action: env.alphabet().label(a).to_string(),
                });
            }
        }
    }
    let goals = env.marked_states();
    if goals.is_empty() {
        out.push(Violation::NoGoalStates);
    }
    let reachable = env.reachable();
    out.extend(
        goals
            .into_iter()
            .filter(|g| !reachable.contains(g))
            .map(Violation::UnreachableGoal),
    );
    out
}
