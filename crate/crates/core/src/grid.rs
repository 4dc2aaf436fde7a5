//! Matrix types shared by every stage of the pipeline.
//!
//! All public indexing is 1-based: `get(1, 1)` is the top-left cell. Storage
//! is a dense row-major `Vec`.

use std::fmt;
use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};

/// Dense row-major matrix with 1-based accessors.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Grid<T> {
    rows: usize,
    cols: usize,
    cells: Vec<T>,
}

/// Integer matrix: scans, chi patterns and decomposition parts.
pub type IntGrid = Grid<i32>;

impl<T: Copy + Default> Grid<T> {
    /// Grid of the given shape filled with `T::default()`. Zero extents are
    /// allowed here (chi of a grid with `m == p` has no rows).
    pub fn new(rows: usize, cols: usize) -> Self {
        Grid {
            rows,
            cols,
            cells: vec![T::default(); rows * cols],
        }
    }

    pub fn filled(rows: usize, cols: usize, value: T) -> Self {
        Grid {
            rows,
            cols,
            cells: vec![value; rows * cols],
        }
    }

    /// Builds a grid by calling `f(i, j)` with 1-based indices.
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut cells = Vec::with_capacity(rows * cols);
        for i in 1..=rows {
            for j in 1..=cols {
                cells.push(f(i, j));
            }
        }
        Grid { rows, cols, cells }
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self> {
        let m = rows.len();
        let n = rows.first().map_or(0, Vec::len);
        if m == 0 || n == 0 {
            return Err(Error::EmptyGrid { rows: m, cols: n });
        }
        let mut cells = Vec::with_capacity(m * n);
        for (idx, row) in rows.into_iter().enumerate() {
            if row.len() != n {
                return Err(Error::Ragged {
                    row: idx + 1,
                    found: row.len(),
                    expected: n,
                });
            }
            cells.extend(row);
        }
        Ok(Grid {
            rows: m,
            cols: n,
            cells,
        })
    }

    pub fn from_vec(rows: usize, cols: usize, cells: Vec<T>) -> Result<Self> {
        if cells.len() != rows * cols {
            return Err(Error::Ragged {
                row: 0,
                found: cells.len(),
                expected: rows * cols,
            });
        }
        Ok(Grid { rows, cols, cells })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    #[inline]
    fn offset(&self, i: usize, j: usize) -> usize {
        debug_assert!(
            (1..=self.rows).contains(&i) && (1..=self.cols).contains(&j),
            "index ({i},{j}) outside {}x{}",
            self.rows,
            self.cols
        );
        (i - 1) * self.cols + (j - 1)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.cells[self.offset(i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: T) {
        let k = self.offset(i, j);
        self.cells[k] = value;
    }

    /// Row `i` as a slice.
    pub fn row(&self, i: usize) -> &[T] {
        let start = (i - 1) * self.cols;
        &self.cells[start..start + self.cols]
    }

    pub fn cells_mut(&mut self) -> &mut [T] {
        &mut self.cells
    }

    pub fn cells(&self) -> &[T] {
        &self.cells
    }

    pub fn transpose(&self) -> Self {
        Grid::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    pub fn map<U: Copy + Default>(&self, f: impl Fn(T) -> U) -> Grid<U> {
        Grid {
            rows: self.rows,
            cols: self.cols,
            cells: self.cells.iter().map(|&c| f(c)).collect(),
        }
    }

    /// Iterates `(i, j, value)` in row-major order, 1-based.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, T)> + '_ {
        let cols = self.cols.max(1);
        self.cells
            .iter()
            .enumerate()
            .map(move |(k, &v)| (k / cols + 1, k % cols + 1, v))
    }
}

impl<T: Copy + Default> Index<(usize, usize)> for Grid<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.cells[self.offset(i, j)]
    }
}

impl<T: Copy + Default> IndexMut<(usize, usize)> for Grid<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        let k = self.offset(i, j);
        &mut self.cells[k]
    }
}

impl<T: fmt::Display> fmt::Debug for Grid<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}x{}", self.rows, self.cols)?;
        for r in 0..self.rows {
            let line: Vec<String> = self.cells[r * self.cols..(r + 1) * self.cols]
                .iter()
                .map(|c| c.to_string())
                .collect();
            writeln!(f, "{}", line.join(" "))?;
        }
        Ok(())
    }
}

impl IntGrid {
    pub fn min_cell(&self) -> Option<i32> {
        self.cells.iter().copied().min()
    }

    pub fn max_cell(&self) -> Option<i32> {
        self.cells.iter().copied().max()
    }

    pub fn is_zero(&self) -> bool {
        self.cells.iter().all(|&c| c == 0)
    }

    /// True when every row holds a single repeated value.
    pub fn has_constant_rows(&self) -> bool {
        (1..=self.rows).all(|i| self.row(i).windows(2).all(|w| w[0] == w[1]))
    }

    /// True when every column holds a single repeated value.
    pub fn has_constant_cols(&self) -> bool {
        (1..self.rows).all(|i| self.row(i) == self.row(i + 1))
    }

    pub fn sub(&self, other: &IntGrid) -> Result<IntGrid> {
        check_same_dims(self.dims(), other.dims())?;
        Ok(Grid {
            rows: self.rows,
            cols: self.cols,
            cells: self
                .cells
                .iter()
                .zip(&other.cells)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }
}

/// Cellwise sum of two equally shaped integer grids.
pub fn add(a: &IntGrid, b: &IntGrid) -> Result<IntGrid> {
    check_same_dims(a.dims(), b.dims())?;
    Ok(Grid {
        rows: a.rows,
        cols: a.cols,
        cells: a.cells.iter().zip(&b.cells).map(|(x, y)| x + y).collect(),
    })
}

pub(crate) fn check_same_dims(l: (usize, usize), r: (usize, usize)) -> Result<()> {
    if l != r {
        return Err(Error::DimensionMismatch {
            left_rows: l.0,
            left_cols: l.1,
            right_rows: r.0,
            right_cols: r.1,
        });
    }
    Ok(())
}

/// Matrix over {0,1}; the physical structure being scanned.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BinaryGrid(Grid<u8>);

impl BinaryGrid {
    /// All-zero binary grid. Both extents must be positive.
    pub fn zeros(rows: usize, cols: usize) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::EmptyGrid { rows, cols });
        }
        Ok(BinaryGrid(Grid::new(rows, cols)))
    }

    pub fn ones(rows: usize, cols: usize) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::EmptyGrid { rows, cols });
        }
        Ok(BinaryGrid(Grid::filled(rows, cols, 1)))
    }

    pub fn from_fn(
        rows: usize,
        cols: usize,
        mut f: impl FnMut(usize, usize) -> bool,
    ) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::EmptyGrid { rows, cols });
        }
        Ok(BinaryGrid(Grid::from_fn(rows, cols, |i, j| f(i, j) as u8)))
    }

    pub fn from_rows(rows: Vec<Vec<u8>>) -> Result<Self> {
        let g = Grid::from_rows(rows)?;
        Self::from_grid(g)
    }

    /// Validates that every cell is 0 or 1.
    pub fn from_int(g: &IntGrid) -> Result<Self> {
        if g.rows() == 0 || g.cols() == 0 {
            return Err(Error::EmptyGrid {
                rows: g.rows(),
                cols: g.cols(),
            });
        }
        if let Some((i, j, v)) = g.iter().find(|&(_, _, v)| v != 0 && v != 1) {
            return Err(Error::NotBinary {
                row: i,
                col: j,
                value: v,
            });
        }
        Ok(BinaryGrid(g.map(|v| v as u8)))
    }

    fn from_grid(g: Grid<u8>) -> Result<Self> {
        if let Some((i, j, v)) = g.iter().find(|&(_, _, v)| v > 1) {
            return Err(Error::NotBinary {
                row: i,
                col: j,
                value: v as i32,
            });
        }
        Ok(BinaryGrid(g))
    }

    pub fn rows(&self) -> usize {
        self.0.rows()
    }

    pub fn cols(&self) -> usize {
        self.0.cols()
    }

    pub fn dims(&self) -> (usize, usize) {
        self.0.dims()
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u8 {
        self.0.get(i, j)
    }

    #[inline]
    pub fn is_one(&self, i: usize, j: usize) -> bool {
        self.0.get(i, j) == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: bool) {
        self.0.set(i, j, value as u8);
    }

    pub fn flip(&mut self, i: usize, j: usize) {
        let v = self.0.get(i, j);
        self.0.set(i, j, 1 - v);
    }

    pub fn row(&self, i: usize) -> &[u8] {
        self.0.row(i)
    }

    pub fn count_ones(&self) -> usize {
        self.0.cells().iter().filter(|&&c| c == 1).count()
    }

    pub fn cells(&self) -> &[u8] {
        self.0.cells()
    }

    pub fn to_int(&self) -> IntGrid {
        self.0.map(i32::from)
    }

    pub fn transpose(&self) -> Self {
        BinaryGrid(self.0.transpose())
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, u8)> + '_ {
        self.0.iter()
    }

    /// Cellwise sum when the supports are disjoint; `None` on any overlap.
    pub fn disjoint_union(&self, other: &BinaryGrid) -> Result<Option<BinaryGrid>> {
        check_same_dims(self.dims(), other.dims())?;
        let mut out = self.clone();
        for (k, (&a, &b)) in self.cells().iter().zip(other.cells()).enumerate() {
            if a == 1 && b == 1 {
                return Ok(None);
            }
            out.0.cells[k] = a | b;
        }
        Ok(Some(out))
    }
}

impl fmt::Debug for BinaryGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Window extents `(p, q)`: the probe covers `p` rows and `q` columns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct WindowSpec {
    pub p: usize,
    pub q: usize,
}

impl WindowSpec {
    pub fn new(p: usize, q: usize) -> Result<Self> {
        if p == 0 || q == 0 {
            return Err(Error::InvalidWindow { p, q });
        }
        Ok(WindowSpec { p, q })
    }

    pub fn transposed(self) -> Self {
        WindowSpec {
            p: self.q,
            q: self.p,
        }
    }

    pub fn area(self) -> i32 {
        (self.p * self.q) as i32
    }

    /// Errors unless the window fits inside an `m x n` grid.
    pub fn check_fits(self, m: usize, n: usize) -> Result<()> {
        if self.p > m || self.q > n {
            return Err(Error::WindowTooLarge {
                p: self.p,
                q: self.q,
                rows: m,
                cols: n,
            });
        }
        Ok(())
    }

    /// Shape of the matrix whose scan has shape `scan_rows x scan_cols`.
    pub fn preimage_dims(self, scan_rows: usize, scan_cols: usize) -> (usize, usize) {
        (scan_rows + self.p - 1, scan_cols + self.q - 1)
    }
}

/// Representative of `i` modulo `p` in `[1, p]`.
#[inline]
pub fn residue(i: usize, p: usize) -> usize {
    (i - 1) % p + 1
}

/// All indices in `[1, m]` congruent to `i` modulo `p`, ascending.
pub fn residue_rows(i: usize, p: usize, m: usize) -> Vec<usize> {
    let r = residue(i, p);
    (r..=m).step_by(p).collect()
}
