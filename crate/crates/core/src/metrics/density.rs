use std::collections::HashMap;

use crate::level::{Cell, Level};
use crate::mechanics::{initial_state, step, Action};
use crate::solver::{solve, SearchBudget};

/// How often the head occupies each cell while following `actions`,
/// counting the starting position.
pub fn head_visit_counts(level: &Level, actions: &[Action]) -> HashMap<Cell, u32> {
    let mut state = initial_state(level);
    let mut counts = HashMap::new();
    *counts.entry(state.head()).or_insert(0) += 1;
    for &action in actions {
        let Ok(outcome) = step(&state, level, action) else {
            break;
        };
        if let Some(next) = outcome.state() {
            state = next.clone();
            *counts.entry(state.head()).or_insert(0) += 1;
        }
    }
    counts
}

/// Solution Density: the largest number of times the head sits in one cell
/// along the canonical optimal solution. `None` when the level has no
/// solution within the budget.
pub fn solution_density(level: &Level, budget: SearchBudget) -> Option<u32> {
    let result = solve(level, budget);
    let actions = result.actions()?;
    head_visit_counts(level, actions).into_values().max()
}
