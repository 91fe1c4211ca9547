//! Lattice data model: cell states, row-major grid storage, Moore
//! neighborhoods and state counting.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::GridError;

/// State of a cell in the news-diffusion model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum CellState {
    /// No information: never reached, or forgotten.
    #[default]
    White,
    /// Slightly obsolete news retained as information.
    Grey,
    /// Fresh news.
    Black,
}

/// State of a cell in the innovation-diffusion model. `Adopted` is absorbing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Adoption {
    #[default]
    NotAdopted,
    Adopted,
}

impl Adoption {
    pub fn as_bit(self) -> u8 {
        match self {
            Adoption::NotAdopted => 0,
            Adoption::Adopted => 1,
        }
    }
}

/// Per-state cell totals. For the innovation model, `NotAdopted` is tallied
/// as white and `Adopted` as black.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct Counts {
    pub white: usize,
    pub grey: usize,
    pub black: usize,
}

impl Counts {
    pub fn total(&self) -> usize {
        self.white + self.grey + self.black
    }
}

/// Behaviour shared by the two cell-state kinds.
pub trait CellKind: Copy + Eq + Default + fmt::Debug + Send + Sync + 'static {
    /// State of the initially informed cell.
    const SEED: Self;

    /// Adds this cell to a running tally.
    fn tally(self, counts: &mut Counts);

    fn to_ascii(self) -> char;

    fn from_ascii(c: char) -> Option<Self>;

    /// Graymap intensity, 0 = black, 255 = white.
    fn gray_level(self) -> u8;
}

impl CellKind for CellState {
    const SEED: Self = CellState::Black;

    #[inline]
    fn tally(self, counts: &mut Counts) {
        match self {
            CellState::White => counts.white += 1,
            CellState::Grey => counts.grey += 1,
            CellState::Black => counts.black += 1,
        }
    }

    fn to_ascii(self) -> char {
        match self {
            CellState::White => '.',
            CellState::Grey => 'o',
            CellState::Black => '#',
        }
    }

    fn from_ascii(c: char) -> Option<Self> {
        match c {
            '.' => Some(CellState::White),
            'o' => Some(CellState::Grey),
            '#' => Some(CellState::Black),
            _ => None,
        }
    }

    fn gray_level(self) -> u8 {
        match self {
            CellState::White => 255,
            CellState::Grey => 128,
            CellState::Black => 0,
        }
    }
}

impl CellKind for Adoption {
    const SEED: Self = Adoption::Adopted;

    #[inline]
    fn tally(self, counts: &mut Counts) {
        match self {
            Adoption::NotAdopted => counts.white += 1,
            Adoption::Adopted => counts.black += 1,
        }
    }

    fn to_ascii(self) -> char {
        match self {
            Adoption::NotAdopted => '.',
            Adoption::Adopted => '#',
        }
    }

    fn from_ascii(c: char) -> Option<Self> {
        match c {
            '.' => Some(Adoption::NotAdopted),
            '#' => Some(Adoption::Adopted),
            _ => None,
        }
    }

    fn gray_level(self) -> u8 {
        match self {
            Adoption::NotAdopted => 255,
            Adoption::Adopted => 0,
        }
    }
}

/// Edge handling for neighborhood lookup.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    /// Edge cells see a truncated neighborhood.
    #[default]
    Bounded,
    /// Rows and columns wrap around.
    Toroidal,
}

impl fmt::Display for Boundary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Boundary::Bounded => "bounded",
            Boundary::Toroidal => "toroidal",
        })
    }
}

impl FromStr for Boundary {
    type Err = GridError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "bounded" => Ok(Boundary::Bounded),
            "toroidal" | "torus" | "wrap" => Ok(Boundary::Toroidal),
            other => Err(GridError::Parse(format!("unknown boundary mode `{other}`"))),
        }
    }
}

/// A `(row, col)` lattice coordinate.
pub type Position = (usize, usize);

/// Moore offsets in row-major order.
pub const MOORE_OFFSETS: [(isize, isize); 8] = [
    (-1, -1),
    (-1, 0),
    (-1, 1),
    (0, -1),
    (0, 1),
    (1, -1),
    (1, 0),
    (1, 1),
];

/// States of the in-bounds Moore neighbors of one cell, in
/// [`MOORE_OFFSETS`] order. The center cell is never included.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Neighborhood<S: CellKind = CellState> {
    states: [S; 8],
    len: u8,
}

impl<S: CellKind> Neighborhood<S> {
    /// Builds a neighborhood from at most eight states.
    ///
    /// # Panics
    /// If more than eight states are supplied.
    pub fn from_states(states: &[S]) -> Self {
        assert!(
            states.len() <= 8,
            "a Moore neighborhood has at most 8 cells"
        );
        let mut buf = [S::default(); 8];
        buf[..states.len()].copy_from_slice(states);
        Self {
            states: buf,
            len: states.len() as u8,
        }
    }

    #[inline]
    pub fn as_slice(&self) -> &[S] {
        &self.states[..self.len as usize]
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len as usize
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Number of neighbors in state `state`.
    #[inline]
    pub fn count(&self, state: S) -> usize {
        self.as_slice().iter().filter(|&&s| s == state).count()
    }

    #[inline]
    pub fn contains(&self, state: S) -> bool {
        self.as_slice().contains(&state)
    }
}

/// Rectangular lattice of cells stored row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Grid<S: CellKind = CellState> {
    width: usize,
    height: usize,
    boundary: Boundary,
    cells: Vec<S>,
}

impl<S: CellKind> Grid<S> {
    /// A grid of default-state cells (White / NotAdopted).
    pub fn blank(width: usize, height: usize, boundary: Boundary) -> Result<Self, GridError> {
        validate_dimensions(width, height, boundary)?;
        Ok(Self {
            width,
            height,
            boundary,
            cells: vec![S::default(); width * height],
        })
    }

    /// A blank grid with a single seed cell at `seed`.
    pub fn seeded(
        width: usize,
        height: usize,
        seed: Position,
        boundary: Boundary,
    ) -> Result<Self, GridError> {
        let mut grid = Self::blank(width, height, boundary)?;
        grid.set(seed, S::SEED)?;
        Ok(grid)
    }

    /// Wraps an existing row-major cell vector.
    pub fn from_cells(
        width: usize,
        height: usize,
        boundary: Boundary,
        cells: Vec<S>,
    ) -> Result<Self, GridError> {
        validate_dimensions(width, height, boundary)?;
        if cells.len() != width * height {
            return Err(GridError::CellCount {
                expected: width * height,
                actual: cells.len(),
            });
        }
        Ok(Self {
            width,
            height,
            boundary,
            cells,
        })
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.cells.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    #[inline]
    pub fn cells(&self) -> &[S] {
        &self.cells
    }

    #[inline]
    pub(crate) fn cells_mut(&mut self) -> &mut [S] {
        &mut self.cells
    }

    #[inline]
    pub fn contains(&self, (row, col): Position) -> bool {
        row < self.height && col < self.width
    }

    fn check(&self, pos: Position) -> Result<usize, GridError> {
        if self.contains(pos) {
            Ok(pos.0 * self.width + pos.1)
        } else {
            Err(GridError::OutOfBounds {
                row: pos.0,
                col: pos.1,
                width: self.width,
                height: self.height,
            })
        }
    }

    pub fn get(&self, pos: Position) -> Result<S, GridError> {
        self.check(pos).map(|i| self.cells[i])
    }

    pub fn set(&mut self, pos: Position, state: S) -> Result<(), GridError> {
        let i = self.check(pos)?;
        self.cells[i] = state;
        Ok(())
    }

    /// Moore neighbors of `pos` under this grid's boundary mode.
    pub fn neighborhood(&self, pos: Position) -> Result<Neighborhood<S>, GridError> {
        self.check(pos)?;
        Ok(self.neighborhood_unchecked(pos.0, pos.1))
    }

    #[inline]
    pub(crate) fn neighborhood_unchecked(&self, row: usize, col: usize) -> Neighborhood<S> {
        let mut states = [S::default(); 8];
        let mut len = 0;
        let (h, w) = (self.height as isize, self.width as isize);
        for (dr, dc) in MOORE_OFFSETS {
            let mut r = row as isize + dr;
            let mut c = col as isize + dc;
            match self.boundary {
                Boundary::Bounded => {
                    if r < 0 || r >= h || c < 0 || c >= w {
                        continue;
                    }
                }
                Boundary::Toroidal => {
                    r = r.rem_euclid(h);
                    c = c.rem_euclid(w);
                }
            }
            states[len] = self.cells[r as usize * self.width + c as usize];
            len += 1;
        }
        Neighborhood {
            states,
            len: len as u8,
        }
    }

    /// Totals of each state; always sums to `width * height`.
    pub fn count_states(&self) -> Counts {
        let mut counts = Counts::default();
        for &s in &self.cells {
            s.tally(&mut counts);
        }
        counts
    }

    /// ASCII rendering: a `<width> <height> <boundary>` header line followed
    /// by one line per row.
    pub fn to_ascii(&self) -> String {
        let mut out = String::with_capacity((self.width + 1) * (self.height + 1) + 16);
        out.push_str(&format!(
            "{} {} {}\n",
            self.width, self.height, self.boundary
        ));
        for row in self.cells.chunks(self.width) {
            out.extend(row.iter().map(|s| s.to_ascii()));
            out.push('\n');
        }
        out
    }

    pub fn from_ascii(text: &str) -> Result<Self, GridError> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| GridError::Parse("missing header line".into()))?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(GridError::Parse(format!(
                "header must be `<width> <height> <boundary>`, got `{header}`"
            )));
        }
        let width: usize = fields[0]
            .parse()
            .map_err(|_| GridError::Parse(format!("bad width `{}`", fields[0])))?;
        let height: usize = fields[1]
            .parse()
            .map_err(|_| GridError::Parse(format!("bad height `{}`", fields[1])))?;
        let boundary: Boundary = fields[2].parse()?;

        let mut cells = Vec::with_capacity(width * height);
        for (i, line) in lines.take(height).enumerate() {
            let before = cells.len();
            for c in line.chars() {
                let s = S::from_ascii(c).ok_or_else(|| {
                    GridError::Parse(format!("row {i}: unexpected character `{c}`"))
                })?;
                cells.push(s);
            }
            if cells.len() - before != width {
                return Err(GridError::Parse(format!(
                    "row {i}: expected {width} cells, found {}",
                    cells.len() - before
                )));
            }
        }
        Self::from_cells(width, height, boundary, cells)
    }

    /// Plain (ASCII, `P2`) portable graymap with maxval 255.
    pub fn to_pgm(&self) -> String {
        let mut out = format!("P2\n{} {}\n255\n", self.width, self.height);
        for row in self.cells.chunks(self.width) {
            let line: Vec<String> = row.iter().map(|s| s.gray_level().to_string()).collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        out
    }
}

/// Checks that a lattice of this shape is representable. A torus needs at
/// least three cells per axis, otherwise a wrapped offset lands on the
/// cell itself.
pub fn validate_dimensions(
    width: usize,
    height: usize,
    boundary: Boundary,
) -> Result<(), GridError> {
    if width == 0 || height == 0 {
        return Err(GridError::ZeroDimension { width, height });
    }
    if boundary == Boundary::Toroidal && (width < 3 || height < 3) {
        return Err(GridError::TorusTooSmall { width, height });
    }
    Ok(())
}

/// All-White grid with a single Black cell at `seed`.
pub fn new_grid(
    width: usize,
    height: usize,
    seed: Position,
    boundary: Boundary,
) -> Result<Grid<CellState>, GridError> {
    Grid::seeded(width, height, seed, boundary)
}

/// The center cell `(height / 2, width / 2)`.
pub fn center(width: usize, height: usize) -> Position {
    (height / 2, width / 2)
}
