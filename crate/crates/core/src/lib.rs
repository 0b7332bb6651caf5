//! Level model, rules engine, budgeted breadth-first solver, exhaustive
//! single-edit gradients, design metrics and the design-session state machine
//! for single-snakebird puzzle levels.

pub mod epcg;
pub mod level;
pub mod mechanics;
pub mod metrics;
pub mod session;
pub mod solver;

pub use epcg::{evaluation_order, gradient, GradientCell, GradientMap, GradientStatus, GradientSweep};
pub use level::{
    apply_edit, parse_level, serialize_level, Cell, EditOutcome, Level, LevelError, PaletteObject, TileKind,
};
pub use mechanics::{apply_actions, initial_state, step, Action, GameState, History, Status, StepOutcome};
pub use session::{Command, Condition, Session, SessionError, SessionLog};
pub use solver::{solve, state_key, SearchBudget, SolveResult, StateKey};
