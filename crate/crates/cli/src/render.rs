//! Text renderings of gradient maps.

use std::fmt::Write as _;

use anhinga_core::{GradientMap, GradientStatus};

/// `(status, value)` columns for the CSV output.
pub fn status_fields(status: GradientStatus) -> (&'static str, String) {
    match status {
        GradientStatus::Unchanged => ("unchanged", String::new()),
        GradientStatus::Delta(d) => ("delta", d.to_string()),
        GradientStatus::UnsolvableEdit => ("unsolvable", String::new()),
        GradientStatus::BudgetExhaustedEdit => ("budget", String::new()),
        GradientStatus::NotEditable => ("not_editable", String::new()),
        GradientStatus::MakesSolvable(n) => ("makes_solvable", n.to_string()),
    }
}

pub fn grid_token(status: GradientStatus) -> String {
    match status {
        GradientStatus::Unchanged => "·".into(),
        GradientStatus::Delta(d) => format!("{d:+}"),
        GradientStatus::UnsolvableEdit => "X".into(),
        GradientStatus::BudgetExhaustedEdit => "B".into(),
        GradientStatus::MakesSolvable(_) => "?".into(),
        GradientStatus::NotEditable => "@".into(),
    }
}

/// One line per level row, tokens right-aligned to a shared width.
pub fn grid(map: &GradientMap) -> String {
    let (w, h) = (map.base.width(), map.base.height());
    let mut tokens = vec![String::new(); w * h];
    for c in &map.cells {
        tokens[c.cell.row as usize * w + c.cell.col as usize] = grid_token(c.status);
    }
    let width = tokens.iter().map(|t| t.chars().count()).max().unwrap_or(1);
    let mut out = String::new();
    for row in tokens.chunks(w) {
        let line: Vec<String> = row
            .iter()
            .map(|t| format!("{}{t}", " ".repeat(width - t.chars().count())))
            .collect();
        let _ = writeln!(out, "{}", line.join(" "));
    }
    out
}

pub fn csv(map: &GradientMap) -> anyhow::Result<String> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record(["col", "row", "status", "value"])?;
    for c in &map.cells {
        let (status, value) = status_fields(c.status);
        writer.write_record([
            c.cell.col.to_string(),
            c.cell.row.to_string(),
            status.to_string(),
            value,
        ])?;
    }
    Ok(String::from_utf8(writer.into_inner()?)?)
}
