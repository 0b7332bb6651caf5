//! Design-session state machine.
//!
//! A session owns the level being edited, the play state with its undo
//! history, the palette selection, the live solvability readout, the gradient
//! sweep (full condition only) and an append-only event log. Commands are
//! applied one at a time; the final level is a pure function of the logged
//! command sequence, which [`replay_log`] relies on.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::epcg::{GradientCell, GradientSweep, SweepStep};
use crate::level::{apply_edit, parse_level, serialize_level, Cell, EditOutcome, Level, LevelError, PaletteObject};
use crate::mechanics::{initial_state, step, Action, GameState, History, MechanicsError, Status, StepOutcome};
use crate::solver::{solve, SearchBudget, SolveResult};

/// Editor condition: with the gradient overlay (solver plus generator) or
/// solver only.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Condition {
    Full,
    Half,
}

impl Condition {
    pub fn name(self) -> &'static str {
        match self {
            Condition::Full => "full",
            Condition::Half => "half",
        }
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Condition {
    type Err = SessionError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "full" | "fullepcg" => Ok(Condition::Full),
            "half" | "halfepcg" => Ok(Condition::Half),
            _ => Err(SessionError::IllegalCommand(format!("unknown condition {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SessionError {
    #[error("unknown session {0}")]
    UnknownSession(String),
    #[error("illegal command: {0}")]
    IllegalCommand(String),
    #[error("nothing to undo")]
    EmptyHistory,
    #[error("cell is not editable: {0}")]
    NotEditable(&'static str),
    #[error("gradients are disabled for this condition")]
    ConditionDisabled,
    #[error(transparent)]
    Level(#[from] LevelError),
    #[error("log replay failed at record {index}: {reason}")]
    Replay { index: usize, reason: String },
}

/// Logged events. Every accepted command produces exactly one record.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SessionEvent {
    Load {
        level: String,
        condition: Condition,
    },
    Edit {
        col: u16,
        row: u16,
        selected: PaletteObject,
        changed: bool,
    },
    Play {
        action: Action,
        outcome: String,
    },
    Undo,
    Reset,
    Solve {
        solvable: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        length: Option<usize>,
    },
    Select {
        object: PaletteObject,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LogRecord {
    /// Milliseconds since the session started.
    pub t_ms: u64,
    #[serde(flatten)]
    pub event: SessionEvent,
}

/// An exported event log, one JSON record per line.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SessionLog {
    pub records: Vec<LogRecord>,
}

impl SessionLog {
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for record in &self.records {
            out.push_str(&serde_json::to_string(record).expect("log records serialize"));
            out.push('\n');
        }
        out
    }

    pub fn from_jsonl(text: &str) -> Result<SessionLog, serde_json::Error> {
        let records = text
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(serde_json::from_str)
            .collect::<Result<_, _>>()?;
        Ok(SessionLog { records })
    }

    /// Condition from the load record, if there is one.
    pub fn condition(&self) -> Option<Condition> {
        self.records.iter().find_map(|r| match &r.event {
            SessionEvent::Load { condition, .. } => Some(*condition),
            _ => None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Command {
    /// Click `cell`; `selected` also becomes the palette selection when given.
    Edit {
        cell: Cell,
        selected: Option<PaletteObject>,
    },
    Play(Action),
    Undo,
    Reset,
    Solve,
    Select(PaletteObject),
}

/// Live "level is solvable in ..." readout.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Readout {
    pub solvable: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub length: Option<usize>,
}

impl From<&SolveResult> for Readout {
    fn from(result: &SolveResult) -> Readout {
        Readout {
            solvable: result.label().to_string(),
            length: result.length(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommandResponse {
    #[serde(flatten)]
    pub readout: Readout,
    pub level: String,
    pub state: GameState,
    pub selected: PaletteObject,
    /// Edit: `applied` or `no_change`. Play: the step outcome.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outcome: Option<String>,
    /// Solve: the canonical plan.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub actions: Option<Vec<Action>>,
    /// Solve: bird cells after each action of the plan, for animation.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frames: Option<Vec<Vec<Cell>>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GradientPoll {
    /// Bumped on every invalidation.
    pub generation: u64,
    /// True when the sweep restarted since the previous poll.
    pub restarted: bool,
    /// Cursor of the first returned cell.
    pub start: usize,
    pub cells: Vec<GradientCell>,
    pub next: usize,
    pub total: usize,
    pub done: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Snapshot {
    pub level: String,
    pub width: usize,
    pub height: usize,
    pub condition: Condition,
    pub selected: PaletteObject,
    pub state: GameState,
    pub undo_depth: usize,
    #[serde(flatten)]
    pub readout: Readout,
    pub log_records: usize,
}

#[derive(Debug)]
struct SweepState {
    sweep: GradientSweep,
    cursor: usize,
    generation: u64,
    restarted: bool,
}

#[derive(Debug)]
pub struct Session {
    level: Level,
    condition: Condition,
    selected: PaletteObject,
    budget: SearchBudget,
    play: GameState,
    history: History,
    solved: SolveResult,
    sweep: Option<SweepState>,
    log: Vec<LogRecord>,
}

impl Session {
    pub fn new(level_text: &str, condition: Condition) -> Result<Session, SessionError> {
        Session::with_budget(level_text, condition, SearchBudget::default())
    }

    pub fn with_budget(level_text: &str, condition: Condition, budget: SearchBudget) -> Result<Session, SessionError> {
        let level = parse_level(level_text)?;
        let solved = solve(&level, budget);
        let selected = PaletteObject::Sky;
        let sweep = (condition == Condition::Full).then(|| SweepState {
            sweep: GradientSweep::with_base_result(&level, selected, budget, solved.clone()),
            cursor: 0,
            generation: 0,
            restarted: false,
        });
        let log = vec![LogRecord {
            t_ms: 0,
            event: SessionEvent::Load {
                level: serialize_level(&level),
                condition,
            },
        }];
        Ok(Session {
            play: initial_state(&level),
            level,
            condition,
            selected,
            budget,
            history: History::new(),
            solved,
            sweep,
            log,
        })
    }

    pub fn level(&self) -> &Level {
        &self.level
    }

    pub fn condition(&self) -> Condition {
        self.condition
    }

    pub fn selected(&self) -> PaletteObject {
        self.selected
    }

    pub fn play_state(&self) -> &GameState {
        &self.play
    }

    pub fn solve_result(&self) -> &SolveResult {
        &self.solved
    }

    pub fn readout(&self) -> Readout {
        Readout::from(&self.solved)
    }

    pub fn snapshot(&self) -> Snapshot {
        Snapshot {
            level: serialize_level(&self.level),
            width: self.level.width(),
            height: self.level.height(),
            condition: self.condition,
            selected: self.selected,
            state: self.play.clone(),
            undo_depth: self.history.len(),
            readout: self.readout(),
            log_records: self.log.len(),
        }
    }

    pub fn export_log(&self) -> SessionLog {
        SessionLog {
            records: self.log.clone(),
        }
    }

    fn restart_sweep(&mut self) {
        if let Some(state) = &mut self.sweep {
            state.sweep = GradientSweep::with_base_result(&self.level, self.selected, self.budget, self.solved.clone());
            state.cursor = 0;
            state.generation += 1;
            state.restarted = true;
        }
    }

    fn append(&mut self, now_ms: u64, event: SessionEvent) {
        let last = self.log.last().map_or(0, |r| r.t_ms);
        self.log.push(LogRecord {
            t_ms: now_ms.max(last),
            event,
        });
    }

    fn response(&self) -> CommandResponse {
        CommandResponse {
            readout: self.readout(),
            level: serialize_level(&self.level),
            state: self.play.clone(),
            selected: self.selected,
            outcome: None,
            actions: None,
            frames: None,
        }
    }

    /// Applies one command at `now_ms` (milliseconds since session start;
    /// clamped so the log stays nondecreasing). Rejected commands leave the
    /// session and its log untouched.
    pub fn command(&mut self, command: Command, now_ms: u64) -> Result<CommandResponse, SessionError> {
        match command {
            Command::Edit { cell, selected } => {
                let object = selected.unwrap_or(self.selected);
                let outcome = apply_edit(&self.level, cell, object)?;
                let changed = match outcome {
                    EditOutcome::NotEditable(reason) => return Err(SessionError::NotEditable(reason)),
                    EditOutcome::NoChange => false,
                    EditOutcome::Applied(level) => {
                        self.level = level;
                        self.play = initial_state(&self.level);
                        self.history.clear();
                        self.solved = solve(&self.level, self.budget);
                        true
                    }
                };
                let reselected = object != self.selected;
                self.selected = object;
                if changed || reselected {
                    self.restart_sweep();
                }
                self.append(
                    now_ms,
                    SessionEvent::Edit {
                        col: cell.col,
                        row: cell.row,
                        selected: object,
                        changed,
                    },
                );
                let mut response = self.response();
                response.outcome = Some(if changed { "applied" } else { "no_change" }.to_string());
                Ok(response)
            }
            Command::Play(action) => {
                let outcome = step(&self.play, &self.level, action).map_err(|e| match e {
                    MechanicsError::IllegalStatus(status) => {
                        SessionError::IllegalCommand(format!("cannot play in a {status:?} state"))
                    }
                    MechanicsError::EmptyHistory => SessionError::EmptyHistory,
                })?;
                match &outcome {
                    StepOutcome::Moved(next) | StepOutcome::Won(next) => {
                        self.history.push(self.play.clone());
                        self.play = next.clone();
                    }
                    // death is undone straight away
                    StepOutcome::Died(_) | StepOutcome::Blocked => {}
                }
                self.append(
                    now_ms,
                    SessionEvent::Play {
                        action,
                        outcome: outcome.name().to_string(),
                    },
                );
                let mut response = self.response();
                response.outcome = Some(outcome.name().to_string());
                Ok(response)
            }
            Command::Undo => {
                self.play = self.history.undo().map_err(|_| SessionError::EmptyHistory)?;
                self.append(now_ms, SessionEvent::Undo);
                Ok(self.response())
            }
            Command::Reset => {
                self.play = initial_state(&self.level);
                self.history.clear();
                self.append(now_ms, SessionEvent::Reset);
                Ok(self.response())
            }
            Command::Solve => {
                let readout = self.readout();
                self.append(
                    now_ms,
                    SessionEvent::Solve {
                        solvable: readout.solvable,
                        length: readout.length,
                    },
                );
                let mut response = self.response();
                if let Some(actions) = self.solved.actions() {
                    let mut state = initial_state(&self.level);
                    let mut frames = Vec::with_capacity(actions.len());
                    for &action in actions {
                        if let Ok(outcome) = step(&state, &self.level, action) {
                            if let Some(next) = outcome.state() {
                                state = next.clone();
                            }
                        }
                        frames.push(state.bird.clone());
                    }
                    response.actions = Some(actions.to_vec());
                    response.frames = Some(frames);
                }
                Ok(response)
            }
            Command::Select(object) => {
                self.selected = object;
                self.restart_sweep();
                self.append(now_ms, SessionEvent::Select { object });
                Ok(self.response())
            }
        }
    }

    /// Evaluates up to `max` further gradient cells of the current sweep.
    pub fn poll_gradient(&mut self, max: usize) -> Result<GradientPoll, SessionError> {
        let state = self.sweep.as_mut().ok_or(SessionError::ConditionDisabled)?;
        let start = state.cursor;
        let mut cells = Vec::new();
        while cells.len() < max {
            match state.sweep.step(state.cursor).expect("cursor stays within the sweep") {
                SweepStep::Cell { cell, next } => {
                    cells.push(cell);
                    state.cursor = next;
                }
                SweepStep::Done => break,
            }
        }
        let restarted = std::mem::take(&mut state.restarted);
        Ok(GradientPoll {
            generation: state.generation,
            restarted,
            start,
            cells,
            next: state.cursor,
            total: state.sweep.len(),
            done: state.cursor == state.sweep.len(),
        })
    }

    /// The play state is terminal and cannot take further moves.
    pub fn is_finished(&self) -> bool {
        self.play.status != Status::Playing
    }
}

/// Rebuilds a session by re-applying every logged command in order.
pub fn replay_log(log: &SessionLog) -> Result<Session, SessionError> {
    replay_log_with_budget(log, SearchBudget::default())
}

pub fn replay_log_with_budget(log: &SessionLog, budget: SearchBudget) -> Result<Session, SessionError> {
    let mut records = log.records.iter().enumerate();
    let mut session = match records.next() {
        Some((
            _,
            LogRecord {
                event: SessionEvent::Load { level, condition },
                ..
            },
        )) => Session::with_budget(level, *condition, budget)?,
        _ => {
            return Err(SessionError::Replay {
                index: 0,
                reason: "log does not start with a load record".into(),
            })
        }
    };
    for (index, record) in records {
        let command = match &record.event {
            SessionEvent::Load { .. } => {
                return Err(SessionError::Replay {
                    index,
                    reason: "unexpected second load".into(),
                })
            }
            SessionEvent::Edit { col, row, selected, .. } => Command::Edit {
                cell: Cell::new(*col, *row),
                selected: Some(*selected),
            },
            SessionEvent::Play { action, .. } => Command::Play(*action),
            SessionEvent::Undo => Command::Undo,
            SessionEvent::Reset => Command::Reset,
            SessionEvent::Solve { .. } => Command::Solve,
            SessionEvent::Select { object } => Command::Select(*object),
        };
        session
            .command(command, record.t_ms)
            .map_err(|e| SessionError::Replay {
                index,
                reason: e.to_string(),
            })?;
    }
    Ok(session)
}
