//! Budgeted breadth-first solver.
//!
//! One expansion is one dequeue followed by successor generation in
//! `Action::ALL` order; the initial state is the first expansion. Goal states
//! are detected when generated, and the first parent to discover a state is
//! kept, so the returned plan is the unique canonical optimum.

use std::collections::{HashSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::level::{Cell, Level};
use crate::mechanics::{action_string, initial_state, step, Action, GameState, Status, StepOutcome};

pub const DEFAULT_MAX_EXPANSIONS: u32 = 50_000;

// Preallocated node capacity is capped so small solves stay cheap.
const MAX_PREALLOCATED_NODES: usize = 1 << 14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SearchBudget {
    max_expansions: u32,
}

impl SearchBudget {
    /// Returns `None` for a zero budget.
    pub fn new(max_expansions: u32) -> Option<SearchBudget> {
        (max_expansions >= 1).then_some(SearchBudget { max_expansions })
    }

    pub fn max_expansions(self) -> u32 {
        self.max_expansions
    }
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget {
            max_expansions: DEFAULT_MAX_EXPANSIONS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "result")]
pub enum SolveResult {
    Solved {
        length: usize,
        actions: Vec<Action>,
        expansions: u32,
    },
    Unsolvable {
        expansions: u32,
    },
    #[serde(rename = "Budget")]
    BudgetExhausted {
        budget: u32,
    },
}

impl SolveResult {
    pub fn length(&self) -> Option<usize> {
        match self {
            SolveResult::Solved { length, .. } => Some(*length),
            _ => None,
        }
    }

    pub fn actions(&self) -> Option<&[Action]> {
        match self {
            SolveResult::Solved { actions, .. } => Some(actions),
            _ => None,
        }
    }

    pub fn is_solved(&self) -> bool {
        matches!(self, SolveResult::Solved { .. })
    }

    pub fn expansions(&self) -> u32 {
        match self {
            SolveResult::Solved { expansions, .. } | SolveResult::Unsolvable { expansions } => *expansions,
            SolveResult::BudgetExhausted { budget } => *budget,
        }
    }

    /// Wire label: `Solved`, `Unsolvable` or `Budget`.
    pub fn label(&self) -> &'static str {
        match self {
            SolveResult::Solved { .. } => "Solved",
            SolveResult::Unsolvable { .. } => "Unsolvable",
            SolveResult::BudgetExhausted { .. } => "Budget",
        }
    }
}

impl fmt::Display for SolveResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SolveResult::Solved { length, actions, .. } => {
                write!(f, "Solved {length} {}", action_string(actions))
            }
            SolveResult::Unsolvable { .. } => f.write_str("Unsolvable"),
            SolveResult::BudgetExhausted { budget } => write!(f, "Budget {budget}"),
        }
    }
}

/// Exact visited-set key: bird length, bird cells head first, then the
/// remaining fruit.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StateKey(Box<[u16]>);

fn pack(c: Cell) -> u16 {
    // levels are at most 256x256
    (c.row << 8) | c.col
}

pub fn state_key(state: &GameState) -> StateKey {
    let mut key = Vec::with_capacity(1 + state.bird.len() + state.fruit.len());
    key.push(state.bird.len() as u16);
    key.extend(state.bird.iter().map(|&c| pack(c)));
    key.extend(state.fruit.iter().map(|&c| pack(c)));
    StateKey(key.into_boxed_slice())
}

struct Node {
    state: GameState,
    parent: u32,
    action: Option<Action>,
}

fn plan(nodes: &[Node], mut index: usize, last: Action) -> Vec<Action> {
    let mut actions = vec![last];
    while let Some(action) = nodes[index].action {
        actions.push(action);
        index = nodes[index].parent as usize;
    }
    actions.reverse();
    actions
}

pub fn solve(level: &Level, budget: SearchBudget) -> SolveResult {
    solve_observed(level, budget, |_| {})
}

/// Like [`solve`], calling `on_expand` with each state as it is expanded.
pub fn solve_observed(level: &Level, budget: SearchBudget, mut on_expand: impl FnMut(&GameState)) -> SolveResult {
    let start = initial_state(level);
    match start.status {
        Status::Won => {
            return SolveResult::Solved {
                length: 0,
                actions: Vec::new(),
                expansions: 0,
            }
        }
        Status::Dead => return SolveResult::Unsolvable { expansions: 0 },
        Status::Playing => {}
    }

    let capacity = (budget.max_expansions as usize * 4 + 1).min(MAX_PREALLOCATED_NODES);
    let mut nodes = Vec::with_capacity(capacity);
    let mut visited = HashSet::with_capacity(capacity);
    let mut frontier = VecDeque::with_capacity(capacity);

    visited.insert(state_key(&start));
    nodes.push(Node {
        state: start,
        parent: 0,
        action: None,
    });
    frontier.push_back(0usize);

    let mut expansions = 0u32;
    while let Some(index) = frontier.pop_front() {
        if expansions == budget.max_expansions {
            return SolveResult::BudgetExhausted {
                budget: budget.max_expansions,
            };
        }
        expansions += 1;
        on_expand(&nodes[index].state);

        for action in Action::ALL {
            let outcome = step(&nodes[index].state, level, action).expect("frontier states are playing");
            match outcome {
                StepOutcome::Won(_) => {
                    let actions = plan(&nodes, index, action);
                    return SolveResult::Solved {
                        length: actions.len(),
                        actions,
                        expansions,
                    };
                }
                StepOutcome::Moved(next) => {
                    if visited.insert(state_key(&next)) {
                        nodes.push(Node {
                            state: next,
                            parent: index as u32,
                            action: Some(action),
                        });
                        frontier.push_back(nodes.len() - 1);
                    }
                }
                StepOutcome::Blocked | StepOutcome::Died(_) => {}
            }
        }
    }
    SolveResult::Unsolvable { expansions }
}
