//! Design metrics and rank statistics.

mod density;
pub mod stats;
pub mod summary;

pub use density::{head_visit_counts, solution_density};
pub use stats::{mann_whitney_u, spearman_rho, wilcoxon_signed_rank, PMethod, RankTestResult, StatsError};
pub use summary::{
    summarize_session, summarize_sessions, Metric, SessionSummary, SummaryError, SummaryRow, SummaryTable,
};
