//! The deterministic transition function.
//!
//! A step resolves in this order: blocking test, move or grow, exit test,
//! then gravity one row at a time. Rule conventions:
//!
//! * moving into any bird cell (tail included), ground, spike or out of the
//!   top/sides is blocked; moving the head below the last row is fatal
//! * only falling onto a spike kills
//! * an inactive exit behaves like sky; the bird wins as soon as its head
//!   enters the active exit, including while falling
//! * ground and uneaten fruit support the bird; any cell dropping below the
//!   last row kills it

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::level::{Cell, Level, TileKind};

/// Player moves in canonical order. The solver expands successors in this
/// order, which fixes its tie-breaking.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Action {
    #[serde(rename = "D")]
    Down,
    #[serde(rename = "U")]
    Up,
    #[serde(rename = "L")]
    Left,
    #[serde(rename = "R")]
    Right,
}

impl Action {
    pub const ALL: [Action; 4] = [Action::Down, Action::Up, Action::Left, Action::Right];

    pub fn letter(self) -> char {
        match self {
            Action::Down => 'D',
            Action::Up => 'U',
            Action::Left => 'L',
            Action::Right => 'R',
        }
    }

    pub fn from_letter(c: char) -> Option<Action> {
        Some(match c.to_ascii_uppercase() {
            'D' => Action::Down,
            'U' => Action::Up,
            'L' => Action::Left,
            'R' => Action::Right,
            _ => return None,
        })
    }

    fn delta(self) -> (i32, i32) {
        match self {
            Action::Down => (0, 1),
            Action::Up => (0, -1),
            Action::Left => (-1, 0),
            Action::Right => (1, 0),
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}

/// Renders actions as a letter string, e.g. `"DRR"`.
pub fn action_string(actions: &[Action]) -> String {
    actions.iter().map(|a| a.letter()).collect()
}

/// Parses a letter string such as `"DRR"`.
pub fn parse_actions(s: &str) -> Option<Vec<Action>> {
    s.chars()
        .filter(|c| !c.is_whitespace())
        .map(Action::from_letter)
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Playing,
    Dead,
    Won,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GameState {
    /// Head first.
    pub bird: Vec<Cell>,
    /// Uneaten fruit, sorted.
    pub fruit: Vec<Cell>,
    pub status: Status,
}

impl GameState {
    pub fn head(&self) -> Cell {
        self.bird[0]
    }

    fn has_fruit(&self, cell: Cell) -> bool {
        self.fruit.binary_search(&cell).is_ok()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StepOutcome {
    Moved(GameState),
    Blocked,
    Died(GameState),
    Won(GameState),
}

impl StepOutcome {
    /// The resulting state, `None` when blocked.
    pub fn state(&self) -> Option<&GameState> {
        match self {
            StepOutcome::Moved(s) | StepOutcome::Died(s) | StepOutcome::Won(s) => Some(s),
            StepOutcome::Blocked => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            StepOutcome::Moved(_) => "moved",
            StepOutcome::Blocked => "blocked",
            StepOutcome::Died(_) => "died",
            StepOutcome::Won(_) => "won",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MechanicsError {
    #[error("cannot act in a {0:?} state")]
    IllegalStatus(Status),
    #[error("nothing to undo")]
    EmptyHistory,
}

pub fn initial_state(level: &Level) -> GameState {
    let state = GameState {
        bird: level.bird().to_vec(),
        fruit: level.fruit(),
        status: Status::Playing,
    };
    settle(level, state)
}

/// Some bird cell rests directly on ground or uneaten fruit.
pub fn is_supported(level: &Level, state: &GameState) -> bool {
    state
        .bird
        .iter()
        .any(|c| match level.tile_at(c.col as i32, c.row as i32 + 1) {
            Some(TileKind::Ground) => true,
            Some(TileKind::Fruit) => state.has_fruit(Cell::new(c.col, c.row + 1)),
            _ => false,
        })
}

fn settle(level: &Level, mut state: GameState) -> GameState {
    while state.status == Status::Playing && !is_supported(level, &state) {
        if state.bird.iter().any(|c| c.row as usize + 1 >= level.height()) {
            state.status = Status::Dead;
            break;
        }
        for c in state.bird.iter_mut() {
            c.row += 1;
        }
        if state.bird.iter().any(|&c| level.tile(c) == TileKind::Spike) {
            state.status = Status::Dead;
        } else if state.head() == level.exit() && state.fruit.is_empty() {
            state.status = Status::Won;
        }
    }
    state
}

pub fn step(state: &GameState, level: &Level, action: Action) -> Result<StepOutcome, MechanicsError> {
    if state.status != Status::Playing {
        return Err(MechanicsError::IllegalStatus(state.status));
    }

    let head = state.head();
    let (dc, dr) = action.delta();
    let (col, row) = (head.col as i32 + dc, head.row as i32 + dr);
    if row >= level.height() as i32 {
        let mut dead = state.clone();
        dead.status = Status::Dead;
        return Ok(StepOutcome::Died(dead));
    }
    let Some(tile) = level.tile_at(col, row) else {
        return Ok(StepOutcome::Blocked);
    };
    let target = Cell::new(col as u16, row as u16);
    if tile.is_solid() || state.bird.contains(&target) {
        return Ok(StepOutcome::Blocked);
    }

    let mut next = GameState {
        bird: Vec::with_capacity(state.bird.len() + 1),
        fruit: state.fruit.clone(),
        status: Status::Playing,
    };
    next.bird.push(target);
    match next.fruit.binary_search(&target) {
        Ok(i) => {
            next.fruit.remove(i);
            next.bird.extend_from_slice(&state.bird);
        }
        Err(_) => next.bird.extend_from_slice(&state.bird[..state.bird.len() - 1]),
    }

    if target == level.exit() && next.fruit.is_empty() {
        next.status = Status::Won;
        return Ok(StepOutcome::Won(next));
    }

    let next = settle(level, next);
    Ok(match next.status {
        Status::Playing => StepOutcome::Moved(next),
        Status::Dead => StepOutcome::Died(next),
        Status::Won => StepOutcome::Won(next),
    })
}

/// Result of replaying a move list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Replay {
    pub state: GameState,
    /// Indices of actions that were blocked and skipped.
    pub blocked: Vec<usize>,
    /// Number of actions consumed before the state stopped being playable.
    pub consumed: usize,
}

/// Folds `step` over `actions` from the initial state, skipping blocked
/// moves and stopping once the bird dies or wins.
pub fn apply_actions(level: &Level, actions: &[Action]) -> Replay {
    let mut state = initial_state(level);
    let mut blocked = Vec::new();
    let mut consumed = 0;
    for (i, &action) in actions.iter().enumerate() {
        if state.status != Status::Playing {
            break;
        }
        consumed = i + 1;
        match step(&state, level, action).expect("state is playing") {
            StepOutcome::Blocked => blocked.push(i),
            StepOutcome::Moved(s) | StepOutcome::Died(s) | StepOutcome::Won(s) => state = s,
        }
    }
    Replay {
        state,
        blocked,
        consumed,
    }
}

/// Undo stack of states preceding each effective step.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct History {
    stack: Vec<GameState>,
}

impl History {
    pub fn new() -> History {
        History::default()
    }

    pub fn push(&mut self, state: GameState) {
        self.stack.push(state);
    }

    /// Pushes `before` unless the step was blocked.
    pub fn record(&mut self, before: &GameState, outcome: &StepOutcome) {
        if !matches!(outcome, StepOutcome::Blocked) {
            self.stack.push(before.clone());
        }
    }

    pub fn undo(&mut self) -> Result<GameState, MechanicsError> {
        self.stack.pop().ok_or(MechanicsError::EmptyHistory)
    }

    pub fn clear(&mut self) {
        self.stack.clear();
    }

    pub fn len(&self) -> usize {
        self.stack.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stack.is_empty()
    }
}
