use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anhinga_core::metrics::stats::{mann_whitney_u, spearman_rho, wilcoxon_signed_rank};
use anhinga_core::metrics::{solution_density, summarize_sessions};
use anhinga_core::{gradient, parse_level, Level, PaletteObject, SearchBudget, SessionLog, SolveResult};
use anyhow::{bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

mod render;

/// Exit code for every error: I/O, parse failures, bad flags.
const EXIT_ERROR: u8 = 3;

#[derive(Parser)]
#[command(name = "anhinga", version, about = "Solve, sweep and measure anhinga puzzle levels")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Solve a level. Exit code 0 solved, 1 unsolvable, 2 budget exhausted.
    Solve {
        level: PathBuf,
        #[arg(long, default_value_t = 50_000, value_parser = clap::value_parser!(u32).range(1..))]
        budget: u32,
    },
    /// Evaluate every single-tile edit with one palette object.
    Gradient {
        level: PathBuf,
        #[arg(long, value_parser = parse_object)]
        object: PaletteObject,
        #[arg(long, default_value_t = 50_000, value_parser = clap::value_parser!(u32).range(1..))]
        budget: u32,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Solution density of each level and their median.
    Density {
        #[arg(required = true)]
        levels: Vec<PathBuf>,
        #[arg(long, default_value_t = 50_000, value_parser = clap::value_parser!(u32).range(1..))]
        budget: u32,
    },
    /// Per-condition summary table of session logs, as CSV.
    Stats {
        #[arg(required = true)]
        logs: Vec<PathBuf>,
        #[arg(long)]
        by_condition: bool,
        #[arg(long, default_value_t = 50_000, value_parser = clap::value_parser!(u32).range(1..))]
        budget: u32,
    },
    /// Rank test between two numeric CSV columns.
    Correlate {
        csv: PathBuf,
        #[arg(long)]
        x: String,
        #[arg(long)]
        y: String,
        #[arg(long, value_enum, default_value_t = Test::Spearman)]
        test: Test,
    },
    /// Run the editor session service.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: std::net::IpAddr,
        #[arg(long, default_value_t = 50_000, value_parser = clap::value_parser!(u32).range(1..))]
        budget: u32,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Grid,
}

#[derive(Clone, Copy, ValueEnum)]
enum Test {
    Spearman,
    Mwu,
    Wilcoxon,
}

fn parse_object(s: &str) -> Result<PaletteObject, String> {
    s.to_ascii_lowercase()
        .parse()
        .map_err(|e: anhinga_core::LevelError| e.to_string())
}

fn budget(n: u32) -> SearchBudget {
    SearchBudget::new(n).expect("flag parser rejects zero")
}

fn read(path: &Path) -> anyhow::Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn load_level(path: &Path) -> anyhow::Result<Level> {
    parse_level(&read(path)?).with_context(|| format!("{}: invalid level", path.display()))
}

fn median(values: &mut [f64]) -> Option<f64> {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    match n {
        0 => None,
        _ if n % 2 == 1 => Some(values[n / 2]),
        _ => Some((values[n / 2 - 1] + values[n / 2]) / 2.0),
    }
}

/// Reads two columns. Paired tests keep rows where both cells are filled;
/// the two-sample test takes each column's filled cells independently.
fn read_columns(path: &Path, x: &str, y: &str, paired: bool) -> anyhow::Result<(Vec<f64>, Vec<f64>)> {
    let text = read(path)?;
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let headers = reader.headers()?.clone();
    let index = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .with_context(|| format!("{}: no column named {name:?}", path.display()))
    };
    let (ix, iy) = (index(x)?, index(y)?);
    let cell = |record: &csv::StringRecord, i: usize, line: usize| -> anyhow::Result<Option<f64>> {
        let raw = record.get(i).unwrap_or("").trim();
        if raw.is_empty() {
            return Ok(None);
        }
        raw.parse::<f64>()
            .map(Some)
            .with_context(|| format!("{}:{line}: {raw:?} is not a number", path.display()))
    };
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        let line = i + 2;
        let (a, b) = (cell(&record, ix, line)?, cell(&record, iy, line)?);
        if paired {
            if let (Some(a), Some(b)) = (a, b) {
                xs.push(a);
                ys.push(b);
            }
        } else {
            xs.extend(a);
            ys.extend(b);
        }
    }
    Ok((xs, ys))
}

fn run(cli: Cli) -> anyhow::Result<u8> {
    match cli.command {
        Cmd::Solve { level, budget: b } => {
            let result = anhinga_core::solve(&load_level(&level)?, budget(b));
            println!("{result}");
            Ok(match result {
                SolveResult::Solved { .. } => 0,
                SolveResult::Unsolvable { .. } => 1,
                SolveResult::BudgetExhausted { .. } => 2,
            })
        }
        Cmd::Gradient {
            level,
            object,
            budget: b,
            format,
        } => {
            let map = gradient(&load_level(&level)?, object, budget(b));
            match format {
                Format::Csv => print!("{}", render::csv(&map)?),
                Format::Grid => print!("{}", render::grid(&map)),
            }
            Ok(0)
        }
        Cmd::Density { levels, budget: b } => {
            let loaded = levels
                .iter()
                .map(|p| load_level(p))
                .collect::<anyhow::Result<Vec<_>>>()?;
            let densities: Vec<Option<u32>> = loaded.par_iter().map(|l| solution_density(l, budget(b))).collect();
            let mut writer = csv::Writer::from_writer(std::io::stdout());
            writer.write_record(["level", "density"])?;
            for (path, d) in levels.iter().zip(&densities) {
                let value = d.map_or("undefined".to_string(), |d| d.to_string());
                writer.write_record([path.display().to_string(), value])?;
            }
            let mut defined: Vec<f64> = densities.iter().flatten().map(|&d| f64::from(d)).collect();
            let med = median(&mut defined).map_or("undefined".to_string(), |m| m.to_string());
            writer.write_record(["median".to_string(), med])?;
            writer.flush()?;
            Ok(0)
        }
        Cmd::Stats {
            logs,
            by_condition,
            budget: b,
        } => {
            let parsed = logs
                .iter()
                .map(|p| SessionLog::from_jsonl(&read(p)?).with_context(|| format!("{}: invalid log", p.display())))
                .collect::<anyhow::Result<Vec<_>>>()?;
            let table = summarize_sessions(&parsed, by_condition, budget(b))?;
            print!("{}", table.to_csv());
            Ok(0)
        }
        Cmd::Correlate { csv, x, y, test } => {
            let paired = !matches!(test, Test::Mwu);
            let (xs, ys) = read_columns(&csv, &x, &y, paired)?;
            let (name, result) = match test {
                Test::Spearman => ("spearman", spearman_rho(&xs, &ys)?),
                Test::Mwu => ("mann_whitney", mann_whitney_u(&xs, &ys)?),
                Test::Wilcoxon => {
                    let pairs: Vec<(f64, f64)> = xs.iter().copied().zip(ys.iter().copied()).collect();
                    ("wilcoxon", wilcoxon_signed_rank(&pairs)?)
                }
            };
            let out = serde_json::json!({
                "test": name,
                "n_x": xs.len(),
                "n_y": ys.len(),
                "statistic": result.statistic,
                "p_value": result.p_value,
                "method": result.method,
            });
            println!("{out}");
            Ok(0)
        }
        Cmd::Serve { port, host, budget: b } => {
            let addr = SocketAddr::new(host, port);
            let runtime = tokio::runtime::Runtime::new()?;
            eprintln!("listening on http://{addr}");
            runtime.block_on(anhinga_server::serve(addr, budget(b)))?;
            bail!("server stopped")
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if e.use_stderr() => {
            let _ = e.print();
            return ExitCode::from(EXIT_ERROR);
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}
