//! Levels, tiles, palette objects and single-tile edits.
//!
//! Text format, one line per row, LF endings and a single trailing newline:
//!
//! ```text
//! .  sky        #  ground     ^  spike
//! F  fruit      E  exit
//! A  bird head, then B C D G H ... Z for successive body segments
//! ```
//!
//! `E` and `F` are tile letters, so the body alphabet skips them.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Letters used for bird segments, head first.
pub const BIRD_LETTERS: &[u8] = b"ABCDGHIJKLMNOPQRSTUVWXYZ";

/// Largest width or height a level may have.
pub const MAX_DIMENSION: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TileKind {
    Sky,
    Ground,
    Spike,
    Fruit,
    Exit,
}

impl TileKind {
    pub const ALL: [TileKind; 5] = [
        TileKind::Sky,
        TileKind::Ground,
        TileKind::Spike,
        TileKind::Fruit,
        TileKind::Exit,
    ];

    pub fn symbol(self) -> char {
        match self {
            TileKind::Sky => '.',
            TileKind::Ground => '#',
            TileKind::Spike => '^',
            TileKind::Fruit => 'F',
            TileKind::Exit => 'E',
        }
    }

    pub fn from_symbol(c: char) -> Option<TileKind> {
        Some(match c {
            '.' => TileKind::Sky,
            '#' => TileKind::Ground,
            '^' => TileKind::Spike,
            'F' => TileKind::Fruit,
            'E' => TileKind::Exit,
            _ => return None,
        })
    }

    /// Ground and spikes can never hold a bird cell.
    pub fn is_solid(self) -> bool {
        matches!(self, TileKind::Ground | TileKind::Spike)
    }
}

/// An object on the editor palette. Every palette object places the tile of
/// the same name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PaletteObject {
    Sky,
    Ground,
    Spike,
    Fruit,
    Exit,
}

impl PaletteObject {
    pub const ALL: [PaletteObject; 5] = [
        PaletteObject::Sky,
        PaletteObject::Ground,
        PaletteObject::Spike,
        PaletteObject::Fruit,
        PaletteObject::Exit,
    ];

    pub fn tile(self) -> TileKind {
        match self {
            PaletteObject::Sky => TileKind::Sky,
            PaletteObject::Ground => TileKind::Ground,
            PaletteObject::Spike => TileKind::Spike,
            PaletteObject::Fruit => TileKind::Fruit,
            PaletteObject::Exit => TileKind::Exit,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            PaletteObject::Sky => "sky",
            PaletteObject::Ground => "ground",
            PaletteObject::Spike => "spike",
            PaletteObject::Fruit => "fruit",
            PaletteObject::Exit => "exit",
        }
    }
}

impl fmt::Display for PaletteObject {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for PaletteObject {
    type Err = LevelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        PaletteObject::ALL
            .into_iter()
            .find(|o| o.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| LevelError::UnknownObject(s.to_string()))
    }
}

/// Grid position, row 0 at the top.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Cell {
    pub col: u16,
    pub row: u16,
}

impl Cell {
    pub const fn new(col: u16, row: u16) -> Cell {
        Cell { col, row }
    }

    pub fn is_adjacent(self, other: Cell) -> bool {
        self.col.abs_diff(other.col) + self.row.abs_diff(other.row) == 1
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.col, self.row)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LevelError {
    #[error("malformed grid: {0}")]
    MalformedGrid(String),
    #[error("unknown character {ch:?} at ({col},{row})")]
    UnknownChar { ch: char, col: usize, row: usize },
    #[error("level has no exit")]
    NoExit,
    #[error("level has more than one exit")]
    MultipleExit,
    #[error("level has no bird head 'A'")]
    NoBird,
    #[error("bird segments are not a connected chain")]
    DisconnectedBird,
    #[error("bird overlaps a non-sky tile at {0}")]
    BirdOnSolid(Cell),
    #[error("bird is longer than {} segments", BIRD_LETTERS.len())]
    BirdTooLong,
    #[error("cell {0} is outside the level")]
    OutOfBounds(Cell),
    #[error("unknown palette object {0:?}")]
    UnknownObject(String),
}

/// A validated, immutable level: static terrain plus the authored bird.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Level {
    width: usize,
    height: usize,
    tiles: Vec<TileKind>,
    bird: Vec<Cell>,
    exit: Cell,
}

impl Level {
    /// Builds a level from row-major tiles and a head-first bird.
    ///
    /// Bird cells must sit on sky tiles; the exit is read from the grid.
    pub fn new(width: usize, height: usize, tiles: Vec<TileKind>, bird: Vec<Cell>) -> Result<Level, LevelError> {
        if width == 0 || height == 0 {
            return Err(LevelError::MalformedGrid("empty grid".into()));
        }
        if width > MAX_DIMENSION || height > MAX_DIMENSION {
            return Err(LevelError::MalformedGrid(format!(
                "{width}x{height} exceeds {MAX_DIMENSION}x{MAX_DIMENSION}"
            )));
        }
        if tiles.len() != width * height {
            return Err(LevelError::MalformedGrid(format!(
                "expected {} tiles, got {}",
                width * height,
                tiles.len()
            )));
        }

        let mut exits = tiles
            .iter()
            .enumerate()
            .filter(|(_, t)| **t == TileKind::Exit)
            .map(|(i, _)| Cell::new((i % width) as u16, (i / width) as u16));
        let exit = exits.next().ok_or(LevelError::NoExit)?;
        if exits.next().is_some() {
            return Err(LevelError::MultipleExit);
        }

        if bird.is_empty() {
            return Err(LevelError::NoBird);
        }
        if bird.len() > BIRD_LETTERS.len() {
            return Err(LevelError::BirdTooLong);
        }
        for (i, &c) in bird.iter().enumerate() {
            if c.col as usize >= width || c.row as usize >= height {
                return Err(LevelError::OutOfBounds(c));
            }
            if tiles[c.row as usize * width + c.col as usize] != TileKind::Sky {
                return Err(LevelError::BirdOnSolid(c));
            }
            if bird[..i].contains(&c) {
                return Err(LevelError::DisconnectedBird);
            }
        }
        if bird.windows(2).any(|w| !w[0].is_adjacent(w[1])) {
            return Err(LevelError::DisconnectedBird);
        }

        Ok(Level {
            width,
            height,
            tiles,
            bird,
            exit,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn cell_count(&self) -> usize {
        self.width * self.height
    }

    /// Authored bird, head first.
    pub fn bird(&self) -> &[Cell] {
        &self.bird
    }

    pub fn head(&self) -> Cell {
        self.bird[0]
    }

    pub fn exit(&self) -> Cell {
        self.exit
    }

    pub fn contains(&self, cell: Cell) -> bool {
        (cell.col as usize) < self.width && (cell.row as usize) < self.height
    }

    /// Tile at `cell`. Panics if the cell is out of bounds.
    pub fn tile(&self, cell: Cell) -> TileKind {
        assert!(
            self.contains(cell),
            "cell {cell} outside {}x{}",
            self.width,
            self.height
        );
        self.tiles[cell.row as usize * self.width + cell.col as usize]
    }

    /// Tile at signed coordinates, `None` outside the grid.
    pub fn tile_at(&self, col: i32, row: i32) -> Option<TileKind> {
        if col < 0 || row < 0 || col as usize >= self.width || row as usize >= self.height {
            return None;
        }
        Some(self.tiles[row as usize * self.width + col as usize])
    }

    /// Every cell in row-major order.
    pub fn cells(&self) -> impl Iterator<Item = Cell> + '_ {
        (0..self.height).flat_map(move |r| (0..self.width).map(move |c| Cell::new(c as u16, r as u16)))
    }

    /// Fruit cells in row-major order.
    pub fn fruit(&self) -> Vec<Cell> {
        self.cells().filter(|&c| self.tile(c) == TileKind::Fruit).collect()
    }

    fn with_tiles(&self, tiles: Vec<TileKind>) -> Level {
        Level::new(self.width, self.height, tiles, self.bird.clone()).expect("edit preserves level invariants")
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&serialize_level(self))
    }
}

impl std::str::FromStr for Level {
    type Err = LevelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_level(s)
    }
}

/// Parses the level text format. A missing final newline is accepted; CR is
/// not.
pub fn parse_level(text: &str) -> Result<Level, LevelError> {
    let body = text.strip_suffix('\n').unwrap_or(text);
    if body.is_empty() {
        return Err(LevelError::MalformedGrid("empty level".into()));
    }
    let lines: Vec<&str> = body.split('\n').collect();
    let width = lines[0].chars().count();
    let height = lines.len();

    let mut tiles = Vec::with_capacity(width * height);
    let mut segments: Vec<Option<Cell>> = vec![None; BIRD_LETTERS.len()];
    for (row, line) in lines.iter().enumerate() {
        if line.chars().count() != width {
            return Err(LevelError::MalformedGrid(format!(
                "row {row} has {} columns, expected {width}",
                line.chars().count()
            )));
        }
        for (col, ch) in line.chars().enumerate() {
            if let Some(tile) = TileKind::from_symbol(ch) {
                tiles.push(tile);
                continue;
            }
            let index = BIRD_LETTERS
                .iter()
                .position(|&b| b as char == ch)
                .ok_or(LevelError::UnknownChar { ch, col, row })?;
            if segments[index].is_some() {
                return Err(LevelError::DisconnectedBird);
            }
            segments[index] = Some(Cell::new(col as u16, row as u16));
            tiles.push(TileKind::Sky);
        }
    }

    if segments[0].is_none() {
        return Err(LevelError::NoBird);
    }
    let len = segments.iter().take_while(|s| s.is_some()).count();
    if segments[len..].iter().any(Option::is_some) {
        // a letter is missing from the chain
        return Err(LevelError::DisconnectedBird);
    }
    let bird = segments.into_iter().take(len).flatten().collect();
    Level::new(width, height, tiles, bird)
}

/// Canonical text: rows top to bottom, each terminated by LF.
pub fn serialize_level(level: &Level) -> String {
    let mut out = String::with_capacity((level.width + 1) * level.height);
    for row in 0..level.height {
        for col in 0..level.width {
            let cell = Cell::new(col as u16, row as u16);
            match level.bird.iter().position(|&b| b == cell) {
                Some(i) => out.push(BIRD_LETTERS[i] as char),
                None => out.push(level.tile(cell).symbol()),
            }
        }
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EditOutcome {
    Applied(Level),
    NotEditable(&'static str),
    NoChange,
}

impl EditOutcome {
    pub fn applied(self) -> Option<Level> {
        match self {
            EditOutcome::Applied(level) => Some(level),
            _ => None,
        }
    }
}

/// Clicks `cell` with `selected`: the tile becomes `selected`, or sky when it
/// already is `selected`. Placing the exit moves it.
pub fn apply_edit(level: &Level, cell: Cell, selected: PaletteObject) -> Result<EditOutcome, LevelError> {
    if !level.contains(cell) {
        return Err(LevelError::OutOfBounds(cell));
    }
    if level.bird.contains(&cell) {
        return Ok(EditOutcome::NotEditable("cell is occupied by the bird"));
    }

    let current = level.tile(cell);
    let wanted = selected.tile();
    if current == TileKind::Exit {
        // the exit can only move by placing it elsewhere
        return Ok(if wanted == TileKind::Exit {
            EditOutcome::NoChange
        } else {
            EditOutcome::NotEditable("level must keep its exit")
        });
    }

    let replacement = if current == wanted { TileKind::Sky } else { wanted };
    if replacement == current {
        return Ok(EditOutcome::NoChange);
    }

    let mut tiles = level.tiles.clone();
    if replacement == TileKind::Exit {
        let old = level.exit;
        tiles[old.row as usize * level.width + old.col as usize] = TileKind::Sky;
    }
    tiles[cell.row as usize * level.width + cell.col as usize] = replacement;
    Ok(EditOutcome::Applied(level.with_tiles(tiles)))
}
