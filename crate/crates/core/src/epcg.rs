//! Exhaustive single-edit gradients.
//!
//! For every cell, the level is edited as if the designer clicked it with the
//! selected palette object, the edited level is solved, and the change in
//! optimal solution length is recorded. Cells are visited starting at the
//! bird's row, then alternating above and below it.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::level::{apply_edit, Cell, EditOutcome, Level, PaletteObject};
use crate::solver::{solve, SearchBudget, SolveResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GradientStatus {
    /// No edit, or an edit that keeps the optimal length.
    #[serde(rename = "u")]
    Unchanged,
    /// Edited length minus base length, never zero.
    #[serde(rename = "d")]
    Delta(i64),
    #[serde(rename = "x")]
    UnsolvableEdit,
    #[serde(rename = "b")]
    BudgetExhaustedEdit,
    #[serde(rename = "n")]
    NotEditable,
    /// The base has no solution but the edited level solves in this many moves.
    #[serde(rename = "s")]
    MakesSolvable(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GradientCell {
    pub cell: Cell,
    pub status: GradientStatus,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GradientMap {
    pub base: Level,
    pub selected: PaletteObject,
    pub base_result: SolveResult,
    /// One entry per cell, in evaluation order.
    pub cells: Vec<GradientCell>,
}

impl GradientMap {
    pub fn order(&self) -> impl Iterator<Item = Cell> + '_ {
        self.cells.iter().map(|c| c.cell)
    }

    pub fn status_at(&self, cell: Cell) -> Option<GradientStatus> {
        self.cells.iter().find(|c| c.cell == cell).map(|c| c.status)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EpcgError {
    #[error("cursor {cursor} is past the end of a {len}-cell sweep")]
    CursorOutOfRange { cursor: usize, len: usize },
}

/// Rows from the bird's head row outwards, above before below at equal
/// distance; each row left to right.
pub fn evaluation_order(level: &Level) -> Vec<Cell> {
    let height = level.height() as i64;
    let head_row = level.head().row as i64;
    let mut rows = vec![head_row];
    for d in 1..height {
        for r in [head_row - d, head_row + d] {
            if (0..height).contains(&r) {
                rows.push(r);
            }
        }
    }
    rows.into_iter()
        .flat_map(|r| (0..level.width()).map(move |c| Cell::new(c as u16, r as u16)))
        .collect()
}

fn compare(base: &SolveResult, edited: &SolveResult) -> GradientStatus {
    match (base, edited) {
        (SolveResult::Solved { length: before, .. }, SolveResult::Solved { length: after, .. }) => {
            if after == before {
                GradientStatus::Unchanged
            } else {
                GradientStatus::Delta(*after as i64 - *before as i64)
            }
        }
        (_, SolveResult::Solved { length, .. }) => GradientStatus::MakesSolvable(*length),
        (SolveResult::Unsolvable { .. }, SolveResult::Unsolvable { .. })
        | (SolveResult::BudgetExhausted { .. }, SolveResult::BudgetExhausted { .. }) => GradientStatus::Unchanged,
        (_, SolveResult::Unsolvable { .. }) => GradientStatus::UnsolvableEdit,
        (_, SolveResult::BudgetExhausted { .. }) => GradientStatus::BudgetExhaustedEdit,
    }
}

/// Outcome of clicking one cell, judged against an already solved base.
pub fn evaluate_edit(
    level: &Level,
    base_result: &SolveResult,
    cell: Cell,
    selected: PaletteObject,
    budget: SearchBudget,
) -> GradientStatus {
    match apply_edit(level, cell, selected) {
        Ok(EditOutcome::Applied(edited)) => compare(base_result, &solve(&edited, budget)),
        Ok(EditOutcome::NoChange) => GradientStatus::Unchanged,
        Ok(EditOutcome::NotEditable(_)) | Err(_) => GradientStatus::NotEditable,
    }
}

/// Batch sweep; cells are solved in parallel and returned in evaluation order.
pub fn gradient(level: &Level, selected: PaletteObject, budget: SearchBudget) -> GradientMap {
    let base_result = solve(level, budget);
    let cells = evaluation_order(level)
        .into_par_iter()
        .map(|cell| GradientCell {
            cell,
            status: evaluate_edit(level, &base_result, cell, selected, budget),
        })
        .collect();
    GradientMap {
        base: level.clone(),
        selected,
        base_result,
        cells,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SweepStep {
    Cell { cell: GradientCell, next: usize },
    Done,
}

/// One-cell-at-a-time sweep over an immutable base.
#[derive(Debug, Clone)]
pub struct GradientSweep {
    base: Level,
    selected: PaletteObject,
    budget: SearchBudget,
    base_result: SolveResult,
    order: Vec<Cell>,
}

impl GradientSweep {
    pub fn new(level: &Level, selected: PaletteObject, budget: SearchBudget) -> GradientSweep {
        GradientSweep::with_base_result(level, selected, budget, solve(level, budget))
    }

    /// Reuses a solve of `level` the caller already has.
    pub fn with_base_result(
        level: &Level,
        selected: PaletteObject,
        budget: SearchBudget,
        base_result: SolveResult,
    ) -> GradientSweep {
        GradientSweep {
            base: level.clone(),
            selected,
            budget,
            base_result,
            order: evaluation_order(level),
        }
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn base(&self) -> &Level {
        &self.base
    }

    pub fn selected(&self) -> PaletteObject {
        self.selected
    }

    pub fn base_result(&self) -> &SolveResult {
        &self.base_result
    }

    pub fn step(&self, cursor: usize) -> Result<SweepStep, EpcgError> {
        match cursor.cmp(&self.order.len()) {
            std::cmp::Ordering::Greater => Err(EpcgError::CursorOutOfRange {
                cursor,
                len: self.order.len(),
            }),
            std::cmp::Ordering::Equal => Ok(SweepStep::Done),
            std::cmp::Ordering::Less => {
                let cell = self.order[cursor];
                let status = evaluate_edit(&self.base, &self.base_result, cell, self.selected, self.budget);
                Ok(SweepStep::Cell {
                    cell: GradientCell { cell, status },
                    next: cursor + 1,
                })
            }
        }
    }

    /// Runs every remaining step sequentially.
    pub fn into_map(self) -> GradientMap {
        let cells = (0..self.order.len())
            .map(|i| match self.step(i) {
                Ok(SweepStep::Cell { cell, .. }) => cell,
                _ => unreachable!("cursor within range"),
            })
            .collect();
        GradientMap {
            base: self.base,
            selected: self.selected,
            base_result: self.base_result,
            cells,
        }
    }
}

/// Evaluates the `cursor`-th cell of the sweep. Solves the base on every call;
/// hold a [`GradientSweep`] to avoid that.
pub fn gradient_incremental(
    level: &Level,
    selected: PaletteObject,
    budget: SearchBudget,
    cursor: usize,
) -> Result<SweepStep, EpcgError> {
    let len = level.cell_count();
    if cursor > len {
        return Err(EpcgError::CursorOutOfRange { cursor, len });
    }
    GradientSweep::new(level, selected, budget).step(cursor)
}
