//! Test-only oracles and generators. Nothing here calls the BFS solver.
#![allow(dead_code)]

use std::collections::HashMap;

use anhinga_core::level::{Cell, Level, TileKind};
use anhinga_core::mechanics::{initial_state, step, Action, GameState, Status, StepOutcome};
use rand::seq::IndexedRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub use rand::SeedableRng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Solved(usize),
    Unsolvable,
}

/// Iterative-deepening DFS. Within one iteration a state is only re-entered
/// when reached at a strictly smaller depth; once an iteration reaches no
/// state that the previous one had not, the space is exhausted.
pub fn iddfs(level: &Level) -> Verdict {
    let start = initial_state(level);
    match start.status {
        Status::Won => return Verdict::Solved(0),
        Status::Dead => return Verdict::Unsolvable,
        Status::Playing => {}
    }

    fn dfs(level: &Level, state: &GameState, depth: usize, limit: usize, seen: &mut HashMap<GameState, usize>) -> bool {
        if depth == limit {
            return false;
        }
        for action in Action::ALL {
            match step(state, level, action).unwrap() {
                StepOutcome::Won(_) => return true,
                StepOutcome::Moved(next) => {
                    if seen.get(&next).is_some_and(|&d| d <= depth + 1) {
                        continue;
                    }
                    seen.insert(next.clone(), depth + 1);
                    if dfs(level, &next, depth + 1, limit, seen) {
                        return true;
                    }
                }
                StepOutcome::Blocked | StepOutcome::Died(_) => {}
            }
        }
        false
    }

    let mut previous = 0;
    for limit in 1.. {
        let mut seen = HashMap::new();
        seen.insert(start.clone(), 0);
        if dfs(level, &start, 0, limit, &mut seen) {
            return Verdict::Solved(limit);
        }
        if seen.len() == previous {
            return Verdict::Unsolvable;
        }
        previous = seen.len();
    }
    unreachable!()
}

/// Every action sequence of exactly `len` moves that wins on its last move
/// without a blocked or fatal step. Brute force over 4^len sequences.
pub fn winning_plans(level: &Level, len: usize) -> Vec<Vec<Action>> {
    fn go(level: &Level, state: &GameState, len: usize, prefix: &mut Vec<Action>, out: &mut Vec<Vec<Action>>) {
        for action in Action::ALL {
            prefix.push(action);
            match step(state, level, action).unwrap() {
                StepOutcome::Won(_) if prefix.len() == len => out.push(prefix.clone()),
                StepOutcome::Moved(next) if prefix.len() < len => go(level, &next, len, prefix, out),
                _ => {}
            }
            prefix.pop();
        }
    }
    let start = initial_state(level);
    let mut out = Vec::new();
    if start.status == Status::Playing && len > 0 {
        go(level, &start, len, &mut Vec::new(), &mut out);
    }
    out
}

/// Head positions along a plan, counted by hand from replayed states.
pub fn max_head_visits(level: &Level, plan: &[Action]) -> u32 {
    let mut state = initial_state(level);
    let mut heads = vec![state.bird[0]];
    for &a in plan {
        if let Some(s) = step(&state, level, a).unwrap().state() {
            state = s.clone();
            heads.push(state.bird[0]);
        }
    }
    heads
        .iter()
        .map(|h| heads.iter().filter(|x| *x == h).count() as u32)
        .max()
        .unwrap()
}

/// Random level of at most `max_dim` x `max_dim` with up to `max_fruit` fruit
/// and a bird of up to `max_bird` segments.
pub fn random_level(rng: &mut impl Rng, max_dim: usize, max_fruit: usize, max_bird: usize) -> Level {
    loop {
        let width = rng.random_range(3..=max_dim);
        let height = rng.random_range(3..=max_dim);
        let mut tiles = Vec::with_capacity(width * height);
        for row in 0..height {
            for _ in 0..width {
                let roll: f64 = rng.random();
                let tile = if row + 1 == height {
                    if roll < 0.8 {
                        TileKind::Ground
                    } else if roll < 0.9 {
                        TileKind::Spike
                    } else {
                        TileKind::Sky
                    }
                } else if roll < 0.22 {
                    TileKind::Ground
                } else if roll < 0.28 {
                    TileKind::Spike
                } else {
                    TileKind::Sky
                };
                tiles.push(tile);
            }
        }
        let sky: Vec<usize> = (0..tiles.len()).filter(|&i| tiles[i] == TileKind::Sky).collect();
        if sky.len() < max_bird + max_fruit + 2 {
            continue;
        }
        let cell = |i: usize| Cell::new((i % width) as u16, (i / width) as u16);
        let index = |c: Cell| c.row as usize * width + c.col as usize;

        let bird_len = rng.random_range(1..=max_bird);
        let mut bird = vec![cell(*sky.choose(rng).unwrap())];
        while bird.len() < bird_len {
            let last = *bird.last().unwrap();
            let options: Vec<Cell> = [(0i32, 1i32), (0, -1), (1, 0), (-1, 0)]
                .iter()
                .filter_map(|(dc, dr)| {
                    let (c, r) = (last.col as i32 + dc, last.row as i32 + dr);
                    (c >= 0 && r >= 0 && (c as usize) < width && (r as usize) < height)
                        .then(|| Cell::new(c as u16, r as u16))
                })
                .filter(|&c| tiles[index(c)] == TileKind::Sky && !bird.contains(&c))
                .collect();
            match options.choose(rng) {
                Some(&c) => bird.push(c),
                None => break,
            }
        }

        let free: Vec<usize> = sky.iter().copied().filter(|&i| !bird.contains(&cell(i))).collect();
        let mut picks: Vec<usize> = free.choose_multiple(rng, 1 + max_fruit).copied().collect();
        tiles[picks.remove(0)] = TileKind::Exit;
        let fruit = rng.random_range(0..=max_fruit);
        for &i in picks.iter().take(fruit) {
            tiles[i] = TileKind::Fruit;
        }
        if let Ok(level) = Level::new(width, height, tiles, bird) {
            return level;
        }
    }
}

/// Random action sequence of length `len`.
pub fn random_actions(rng: &mut impl Rng, len: usize) -> Vec<Action> {
    (0..len).map(|_| *Action::ALL.choose(rng).unwrap()).collect()
}

pub fn fixture_text(name: &str) -> String {
    let path = format!("{}/../../levels/{name}.lvl", env!("CARGO_MANIFEST_DIR"));
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{path}: {e}"))
}

pub fn fixture(name: &str) -> Level {
    anhinga_core::parse_level(&fixture_text(name)).unwrap()
}

/// Support test written independently of the engine's gravity code.
pub fn rests_on_something(level: &Level, state: &GameState) -> bool {
    state.bird.iter().any(|c| {
        let below = Cell::new(c.col, c.row + 1);
        if below.row as usize >= level.height() {
            return false;
        }
        match level.tile(below) {
            TileKind::Ground => true,
            TileKind::Fruit => state.fruit.contains(&below),
            _ => false,
        }
    })
}

/// Walks `actions` from the initial state, checking every transition
/// invariant. Returns the number of transitions checked.
pub fn check_transitions(level: &Level, actions: &[Action]) -> Result<usize, String> {
    use anhinga_core::mechanics::History;

    let mut state = initial_state(level);
    let mut history = History::new();
    let mut checked = 0;
    for &action in actions {
        if state.status != Status::Playing {
            break;
        }
        let outcome = step(&state, level, action).map_err(|e| e.to_string())?;
        if step(&state, level, action).unwrap() != outcome {
            return Err("step is not deterministic".into());
        }
        checked += 1;
        let Some(next) = outcome.state() else {
            continue;
        };
        let eaten = state.fruit.len() as isize - next.fruit.len() as isize;
        if !(0..=1).contains(&eaten) {
            return Err(format!(
                "fruit count went from {} to {}",
                state.fruit.len(),
                next.fruit.len()
            ));
        }
        if next.fruit.iter().any(|f| !state.fruit.contains(f)) {
            return Err("fruit reappeared".into());
        }
        if next.bird.len() as isize != state.bird.len() as isize + eaten {
            return Err("length law violated".into());
        }
        for (i, c) in next.bird.iter().enumerate() {
            if next.bird[..i].contains(c) {
                return Err(format!("bird overlaps itself at {c}"));
            }
        }
        if next.bird.windows(2).any(|w| !w[0].is_adjacent(w[1])) {
            return Err("bird chain broken".into());
        }
        match &outcome {
            StepOutcome::Moved(s) => {
                if s.status != Status::Playing {
                    return Err("moved into a terminal state".into());
                }
                if !rests_on_something(level, s) {
                    return Err(format!("moved state is unsupported: {s:?}"));
                }
                if s.bird.iter().any(|&c| level.tile(c).is_solid()) {
                    return Err("bird inside ground or spike".into());
                }
            }
            StepOutcome::Won(s) => {
                if !s.fruit.is_empty() || s.status != Status::Won {
                    return Err("won with fruit remaining".into());
                }
                if s.bird[0] != level.exit() {
                    return Err("won away from the exit".into());
                }
            }
            StepOutcome::Died(s) => {
                if s.status != Status::Dead {
                    return Err("died without dead status".into());
                }
            }
            StepOutcome::Blocked => unreachable!(),
        }
        history.record(&state, &outcome);
        if history.clone().undo().as_ref() != Ok(&state) {
            return Err("undo does not restore the previous state".into());
        }
        state = next.clone();
    }
    Ok(checked)
}

/// Checks one gradient map cell by cell: shape, evaluation-order permutation,
/// and every status against an oracle re-solve of the edited level.
pub fn check_gradient(map: &anhinga_core::GradientMap) -> Result<(), String> {
    use anhinga_core::level::{apply_edit, EditOutcome};
    use anhinga_core::GradientStatus as G;

    let level = &map.base;
    if map.cells.len() != level.width() * level.height() {
        return Err(format!(
            "{} cells for a {}x{} level",
            map.cells.len(),
            level.width(),
            level.height()
        ));
    }
    let mut seen = std::collections::HashSet::new();
    for gc in &map.cells {
        if !level.contains(gc.cell) || !seen.insert(gc.cell) {
            return Err(format!("cell {} is out of range or repeated", gc.cell));
        }
    }
    if map.cells[0].cell.row != level.head().row {
        return Err("sweep does not start on the head row".into());
    }
    let base = iddfs(level);
    for gc in &map.cells {
        let edited = match apply_edit(level, gc.cell, map.selected) {
            Ok(EditOutcome::Applied(l)) => l,
            Ok(EditOutcome::NoChange) => {
                if gc.status != G::Unchanged {
                    return Err(format!("{}: no-op edit reported {:?}", gc.cell, gc.status));
                }
                continue;
            }
            _ => {
                if gc.status != G::NotEditable {
                    return Err(format!("{}: locked cell reported {:?}", gc.cell, gc.status));
                }
                continue;
            }
        };
        let after = iddfs(&edited);
        let ok = match (gc.status, base, after) {
            (G::Delta(d), Verdict::Solved(b), Verdict::Solved(a)) => d != 0 && a as i64 == b as i64 + d,
            (G::Unchanged, Verdict::Solved(b), Verdict::Solved(a)) => a == b,
            (G::Unchanged, Verdict::Unsolvable, Verdict::Unsolvable) => true,
            (G::UnsolvableEdit, Verdict::Solved(_), Verdict::Unsolvable) => true,
            (G::MakesSolvable(n), Verdict::Unsolvable, Verdict::Solved(a)) => n == a,
            _ => false,
        };
        if !ok {
            return Err(format!(
                "{}: {:?} but oracle says {base:?} -> {after:?}\n{level}",
                gc.cell, gc.status
            ));
        }
    }
    Ok(())
}

/// Random level the oracle can solve, so its gradient has lengths to compare.
pub fn random_solvable_level(rng: &mut impl Rng, max_dim: usize, max_fruit: usize, max_bird: usize) -> Level {
    loop {
        let level = random_level(rng, max_dim, max_fruit, max_bird);
        if matches!(iddfs(&level), Verdict::Solved(n) if n > 0) {
            return level;
        }
    }
}

pub mod oracle_stats {
    //! Slow, direct definitions of the rank statistics.
    use itertools::Itertools;

    const EPS: f64 = 1e-9;

    pub fn naive_ranks(v: &[f64]) -> Vec<f64> {
        v.iter()
            .map(|a| {
                let below = v.iter().filter(|b| *b < a).count() as f64;
                let equal = v.iter().filter(|b| *b == a).count() as f64;
                below + (equal + 1.0) / 2.0
            })
            .collect()
    }

    fn pearson(a: &[f64], b: &[f64]) -> f64 {
        let n = a.len() as f64;
        let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
        let cov: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum();
        let va: f64 = a.iter().map(|x| (x - ma).powi(2)).sum();
        let vb: f64 = b.iter().map(|y| (y - mb).powi(2)).sum();
        cov / (va * vb).sqrt()
    }

    /// (rho, exact two-sided p) by trying every permutation of the y ranks.
    pub fn spearman(xs: &[f64], ys: &[f64]) -> (f64, f64) {
        let (rx, ry) = (naive_ranks(xs), naive_ranks(ys));
        let rho = pearson(&rx, &ry);
        let (mut hits, mut total) = (0u64, 0u64);
        for perm in ry.iter().copied().permutations(ry.len()) {
            total += 1;
            if pearson(&rx, &perm).abs() >= rho.abs() - EPS {
                hits += 1;
            }
        }
        (rho, hits as f64 / total as f64)
    }

    fn pair_u(xs: &[f64], ys: &[f64]) -> f64 {
        xs.iter()
            .cartesian_product(ys)
            .map(|(x, y)| {
                if x > y {
                    1.0
                } else if x == y {
                    0.5
                } else {
                    0.0
                }
            })
            .sum()
    }

    /// (U of xs, exact two-sided p) over every relabelling of the pooled values.
    pub fn mann_whitney(xs: &[f64], ys: &[f64]) -> (f64, f64) {
        let u = pair_u(xs, ys);
        let centre = (xs.len() * ys.len()) as f64 / 2.0;
        let pooled: Vec<f64> = xs.iter().chain(ys).copied().collect();
        let (mut hits, mut total) = (0u64, 0u64);
        for chosen in (0..pooled.len()).combinations(xs.len()) {
            let a: Vec<f64> = chosen.iter().map(|&i| pooled[i]).collect();
            let b: Vec<f64> = (0..pooled.len())
                .filter(|i| !chosen.contains(i))
                .map(|i| pooled[i])
                .collect();
            total += 1;
            if (pair_u(&a, &b) - centre).abs() >= (u - centre).abs() - EPS {
                hits += 1;
            }
        }
        (u, hits as f64 / total as f64)
    }

    /// (W+, exact two-sided p) over every sign assignment of the ranked
    /// nonzero differences.
    pub fn wilcoxon(pairs: &[(f64, f64)]) -> (f64, f64) {
        let d: Vec<f64> = pairs.iter().map(|(x, y)| x - y).filter(|d| *d != 0.0).collect();
        let ranks = naive_ranks(&d.iter().map(|v| v.abs()).collect::<Vec<_>>());
        let w: f64 = d.iter().zip(&ranks).filter(|(d, _)| **d > 0.0).map(|(_, r)| r).sum();
        let centre = ranks.iter().sum::<f64>() / 2.0;
        let (mut hits, mut total) = (0u64, 0u64);
        for signs in std::iter::repeat_n([false, true], d.len()).multi_cartesian_product() {
            let s: f64 = ranks.iter().zip(&signs).filter(|(_, p)| **p).map(|(r, _)| r).sum();
            total += 1;
            if (s - centre).abs() >= (w - centre).abs() - EPS {
                hits += 1;
            }
        }
        (w, hits as f64 / total as f64)
    }
}

/// Integer-valued sample, so ties happen and arithmetic stays exact.
pub fn small_ints(rng: &mut impl Rng, n: usize, hi: i32) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(0..=hi) as f64).collect()
}

/// Random editor session driven by commands a designer could issue. Rejected
/// commands are ignored, as a client would. Full sessions also poll the
/// gradient now and then. Returns the session and the number of gradient
/// cells received.
pub fn scripted_session(
    rng: &mut impl Rng,
    condition: anhinga_core::Condition,
    commands: usize,
) -> (anhinga_core::Session, usize) {
    use anhinga_core::{Command, Session};
    const OBJECTS: [anhinga_core::PaletteObject; 5] = [
        anhinga_core::PaletteObject::Sky,
        anhinga_core::PaletteObject::Ground,
        anhinga_core::PaletteObject::Spike,
        anhinga_core::PaletteObject::Fruit,
        anhinga_core::PaletteObject::Exit,
    ];

    let level = random_level(rng, 6, 2, 3);
    let mut session = Session::with_budget(
        &anhinga_core::serialize_level(&level),
        condition,
        anhinga_core::SearchBudget::new(5_000).unwrap(),
    )
    .unwrap();
    let mut received = 0;
    let mut now = 0u64;
    for _ in 0..commands {
        now += rng.random_range(0..20_000);
        let (w, h) = (session.level().width() as u16, session.level().height() as u16);
        let command = match rng.random_range(0..10) {
            0..=3 => Command::Edit {
                cell: Cell::new(rng.random_range(0..w), rng.random_range(0..h)),
                selected: rng.random_bool(0.5).then(|| *OBJECTS.choose(rng).unwrap()),
            },
            4..=6 => Command::Play(*Action::ALL.choose(rng).unwrap()),
            7 => [Command::Undo, Command::Reset][rng.random_range(0..2)].clone(),
            8 => Command::Solve,
            _ => Command::Select(*OBJECTS.choose(rng).unwrap()),
        };
        let _ = session.command(command, now);
        if rng.random_bool(0.3) {
            if let Ok(poll) = session.poll_gradient(rng.random_range(1..8)) {
                received += poll.cells.len();
            }
        }
    }
    (session, received)
}
