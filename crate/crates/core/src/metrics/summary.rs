//! Per-session measures from exported logs and their per-condition table.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::session::{replay_log_with_budget, SessionError, SessionEvent, SessionLog};
use crate::solver::SearchBudget;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Metric {
    Time,
    NumActions,
    NumSolver,
    SolLength,
}

impl Metric {
    pub const ALL: [Metric; 4] = [Metric::Time, Metric::NumActions, Metric::NumSolver, Metric::SolLength];

    pub fn label(self) -> &'static str {
        match self {
            Metric::Time => "Time (min)",
            Metric::NumActions => "Num. Actions",
            Metric::NumSolver => "Num. Solver",
            Metric::SolLength => "Sol. Length",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionSummary {
    pub condition: String,
    pub time_minutes: f64,
    /// Edits, moves and undo/reset/solve presses.
    pub num_actions: usize,
    pub num_solver: usize,
    /// Optimal length of the final level; `None` if it has no solution.
    pub solution_length: Option<usize>,
}

impl SessionSummary {
    pub fn value(&self, metric: Metric) -> Option<f64> {
        match metric {
            Metric::Time => Some(self.time_minutes),
            Metric::NumActions => Some(self.num_actions as f64),
            Metric::NumSolver => Some(self.num_solver as f64),
            Metric::SolLength => self.solution_length.map(|l| l as f64),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SummaryError {
    #[error("log {0} has no records")]
    EmptyLog(usize),
    #[error("log {index}: {source}")]
    Replay { index: usize, source: SessionError },
}

/// Measures one log. The final level is rebuilt by replaying the log.
pub fn summarize_session(log: &SessionLog, budget: SearchBudget) -> Result<SessionSummary, SessionError> {
    let first = log.records.first().map_or(0, |r| r.t_ms);
    let last = log.records.last().map_or(0, |r| r.t_ms);
    let num_actions = log
        .records
        .iter()
        .filter(|r| {
            matches!(
                r.event,
                SessionEvent::Edit { .. }
                    | SessionEvent::Play { .. }
                    | SessionEvent::Undo
                    | SessionEvent::Reset
                    | SessionEvent::Solve { .. }
            )
        })
        .count();
    let num_solver = log
        .records
        .iter()
        .filter(|r| matches!(r.event, SessionEvent::Solve { .. }))
        .count();
    let session = replay_log_with_budget(log, budget)?;
    Ok(SessionSummary {
        condition: session.condition().name().to_string(),
        time_minutes: (last - first) as f64 / 60_000.0,
        num_actions,
        num_solver,
        solution_length: session.solve_result().length(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub metric: Metric,
    pub condition: String,
    pub mean: f64,
    /// Sample standard deviation; zero for a single value.
    pub std: f64,
    pub median: f64,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SummaryTable {
    pub rows: Vec<SummaryRow>,
}

impl SummaryTable {
    pub fn get(&self, metric: Metric, condition: &str) -> Option<&SummaryRow> {
        self.rows
            .iter()
            .find(|r| r.metric == metric && r.condition == condition)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("metric,condition,mean,std,median\n");
        for row in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                row.metric.label(),
                row.condition,
                row.mean,
                row.std,
                row.median
            );
        }
        out
    }
}

fn mean_std_median(values: &mut [f64]) -> (f64, f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let std = if n > 1 {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
    } else {
        0.0
    };
    values.sort_by(f64::total_cmp);
    let median = if n % 2 == 1 {
        values[n / 2]
    } else {
        (values[n / 2 - 1] + values[n / 2]) / 2.0
    };
    (mean, std, median)
}

/// Builds the metric x condition table. With `by_condition` off, every log is
/// pooled under the condition name `all`. Rows are ordered by metric, then
/// condition name.
pub fn summarize_sessions(
    logs: &[SessionLog],
    by_condition: bool,
    budget: SearchBudget,
) -> Result<SummaryTable, SummaryError> {
    let mut groups: BTreeMap<String, Vec<SessionSummary>> = BTreeMap::new();
    for (index, log) in logs.iter().enumerate() {
        if log.records.is_empty() {
            return Err(SummaryError::EmptyLog(index));
        }
        let summary = summarize_session(log, budget).map_err(|source| SummaryError::Replay { index, source })?;
        let key = if by_condition {
            summary.condition.clone()
        } else {
            "all".to_string()
        };
        groups.entry(key).or_default().push(summary);
    }

    let mut rows = Vec::new();
    for metric in Metric::ALL {
        for (condition, summaries) in &groups {
            let mut values: Vec<f64> = summaries.iter().filter_map(|s| s.value(metric)).collect();
            let (mean, std, median) = mean_std_median(&mut values);
            rows.push(SummaryRow {
                metric,
                condition: condition.clone(),
                mean,
                std,
                median,
                n: values.len(),
            });
        }
    }
    Ok(SummaryTable { rows })
}
