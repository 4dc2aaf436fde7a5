//! Splitting a (1,1)-smooth scan into a constant-row part and a
//! constant-column part.

use crate::error::{Error, Result};
use crate::grid::{Grid, IntGrid};

/// One split `A = row_part + col_part`. Stored compactly as one level per
/// row and one level per column.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decomposition {
    pub t: i32,
    pub row_levels: Vec<i32>,
    pub col_levels: Vec<i32>,
}

impl Decomposition {
    pub fn row_part(&self) -> IntGrid {
        Grid::from_fn(self.row_levels.len(), self.col_levels.len(), |i, _| {
            self.row_levels[i - 1]
        })
    }

    pub fn col_part(&self) -> IntGrid {
        Grid::from_fn(self.row_levels.len(), self.col_levels.len(), |_, j| {
            self.col_levels[j - 1]
        })
    }
}

/// All `min(a) + 1` decompositions of `a`, by ascending `t`.
pub fn decompose(a: &IntGrid) -> Result<Vec<Decomposition>> {
    let (rows, cols) = a.dims();
    let k = match a.min_cell() {
        Some(k) => k,
        None => return Err(Error::EmptyGrid { rows, cols }),
    };
    if k < 0 {
        return Err(Error::Infeasible("scan has a negative cell"));
    }
    let base_rows: Vec<i32> = (1..=rows)
        .map(|i| a.row(i).iter().min().copied().unwrap_or(0) - k)
        .collect();
    let base_cols: Vec<i32> = (1..=cols).map(|j| a.get(1, j) - k - base_rows[0]).collect();
    for (i, j, v) in a.iter() {
        if v - k - base_rows[i - 1] != base_cols[j - 1] {
            return Err(Error::NonSmoothScan);
        }
    }
    Ok((0..=k)
        .map(|t| Decomposition {
            t,
            row_levels: base_rows.iter().map(|&r| r + t).collect(),
            col_levels: base_cols.iter().map(|&c| c + k - t).collect(),
        })
        .collect())
}
