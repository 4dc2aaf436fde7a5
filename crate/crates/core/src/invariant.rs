//! Reconstruction of `(0,q)`-invariant matrices from constant-row scans and
//! of `(p,0)`-invariant matrices from constant-column scans.

use crate::error::{Error, Result};
use crate::grid::{BinaryGrid, IntGrid, WindowSpec};
use crate::stats::Stats;

/// State after the first pass over consecutive scan rows.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartialFill {
    /// Forced 1s per output row, all inside columns `1..=q`.
    pub pent: Vec<i32>,
    /// `A[1,1]` minus the forced 1s of rows `1..=p`. May be negative, in
    /// which case no completion exists.
    pub k_remaining: i32,
    pub partial: BinaryGrid,
}

impl PartialFill {
    /// Per-class maximum of `pent`, indexed by class `1..=p` at `[class-1]`.
    pub fn class_max(&self, p: usize) -> Vec<i32> {
        crate::smooth::pent_class_max(&self.pent, p)
    }
}

fn scan_column(a: &IntGrid) -> Result<Vec<i32>> {
    if !a.has_constant_rows() {
        return Err(Error::NotRowConstant);
    }
    Ok((1..=a.rows()).map(|i| a.get(i, 1)).collect())
}

fn fill_run(m: &mut BinaryGrid, row: usize, from: i32, to: i32, stats: &mut Stats) {
    for j in from + 1..=to {
        m.set(row, j as usize, true);
    }
    stats.ops((to - from).max(0) as usize);
}

/// First pass: walks consecutive scan rows and records the 1s they force.
pub fn rec_const_rows_step1(a: &IntGrid, w: WindowSpec) -> Result<PartialFill> {
    rec_const_rows_step1_counted(a, w, &mut Stats::default())
}

pub fn rec_const_rows_step1_counted(
    a: &IntGrid,
    w: WindowSpec,
    stats: &mut Stats,
) -> Result<PartialFill> {
    let col = scan_column(a)?;
    let (m, n) = w.preimage_dims(a.rows(), a.cols());
    let (p, q) = (w.p, w.q as i32);
    let mut partial = BinaryGrid::zeros(m, n)?;
    let mut pent = vec![0i32; m + 1];
    for i in 1..col.len() {
        let (cur, next) = (col[i - 1], col[i]);
        if cur <= next || pent[i] >= cur - next {
            let target = next - cur + pent[i];
            if target > q {
                return Err(Error::Infeasible(
                    "row overflow while propagating differences",
                ));
            }
            fill_run(&mut partial, i + p, pent[i + p], target, stats);
            pent[i + p] = target;
        } else {
            let deficit = cur - next - pent[i];
            let mut r = i;
            loop {
                let before = pent[r];
                pent[r] += deficit;
                if pent[r] > q {
                    return Err(Error::Infeasible("row overflow while adding a deficit"));
                }
                fill_run(&mut partial, r, before, pent[r], stats);
                if r <= p {
                    break;
                }
                r -= p;
            }
        }
        stats.ops(1);
    }
    pent.remove(0);
    let k_remaining = col[0] - pent[..p].iter().sum::<i32>();
    Ok(PartialFill {
        pent,
        k_remaining,
        partial,
    })
}

/// A `(0,q)`-invariant matrix whose scan is the constant-row grid `a`.
pub fn rec_const_rows(a: &IntGrid, w: WindowSpec) -> Result<BinaryGrid> {
    rec_const_rows_counted(a, w, &mut Stats::default())
}

pub fn rec_const_rows_counted(a: &IntGrid, w: WindowSpec, stats: &mut Stats) -> Result<BinaryGrid> {
    let fill = rec_const_rows_step1_counted(a, w, stats)?;
    if fill.k_remaining < 0 {
        return Err(Error::Infeasible(
            "step-one rows already exceed the first scan value",
        ));
    }
    let mut m = fill.partial;
    let (rows, cols) = m.dims();
    let (p, q) = (w.p, w.q);
    let mut left = fill.k_remaining;
    'units: while left > 0 {
        for r in 1..=p {
            for j in 1..=q {
                stats.ops(1);
                if (r..=rows).step_by(p).all(|i| !m.is_one(i, j)) {
                    for i in (r..=rows).step_by(p) {
                        m.set(i, j, true);
                    }
                    stats.ops(rows / p + 1);
                    left -= 1;
                    continue 'units;
                }
            }
        }
        return Err(Error::Infeasible(
            "no free residue column for a remaining unit",
        ));
    }
    for i in 1..=rows {
        for j in q + 1..=cols {
            let v = m.is_one(i, j - q);
            m.set(i, j, v);
        }
    }
    stats.ops(rows * cols);
    Ok(m)
}

/// A `(p,0)`-invariant matrix whose scan is the constant-column grid `a`.
pub fn rec_const_cols(a: &IntGrid, w: WindowSpec) -> Result<BinaryGrid> {
    rec_const_cols_counted(a, w, &mut Stats::default())
}

pub fn rec_const_cols_counted(a: &IntGrid, w: WindowSpec, stats: &mut Stats) -> Result<BinaryGrid> {
    if !a.has_constant_cols() {
        return Err(Error::NotColumnConstant);
    }
    Ok(rec_const_rows_counted(&a.transpose(), w.transposed(), stats)?.transpose())
}

/// Column-side counterpart of [`rec_const_rows_step1`]; `pent` is indexed by
/// column and `partial` is in the original orientation.
pub fn rec_const_cols_step1(a: &IntGrid, w: WindowSpec) -> Result<PartialFill> {
    rec_const_cols_step1_counted(a, w, &mut Stats::default())
}

pub fn rec_const_cols_step1_counted(
    a: &IntGrid,
    w: WindowSpec,
    stats: &mut Stats,
) -> Result<PartialFill> {
    if !a.has_constant_cols() {
        return Err(Error::NotColumnConstant);
    }
    let fill = rec_const_rows_step1_counted(&a.transpose(), w.transposed(), stats)?;
    Ok(PartialFill {
        partial: fill.partial.transpose(),
        ..fill
    })
}
