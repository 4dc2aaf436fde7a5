//! Minimal valuations: sparse binary grids on one residue class whose chi
//! reproduces the matching subgrid of `chi_{1,1}(A)`.

use crate::error::{Error, Result};
use crate::grid::{BinaryGrid, IntGrid, WindowSpec};
use crate::scan::{chi, chi11_of_scan, extract_subgrid, SubgridRef};
use crate::stats::Stats;

/// Binary grid of the full output size, supported on one residue class.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Valuation {
    pub grid: BinaryGrid,
    pub support: SubgridRef,
}

impl Valuation {
    pub fn zero(support: SubgridRef) -> Self {
        Valuation {
            grid: BinaryGrid::zeros(support.parent_rows, support.parent_cols)
                .expect("parent is non-empty"),
            support,
        }
    }

    /// Builds a valuation from its residue-class cells (`rows() x cols()` of
    /// the support).
    pub fn from_subgrid(sub: &BinaryGrid, support: SubgridRef) -> Self {
        let mut v = Valuation::zero(support);
        for (i, j, c) in sub.iter() {
            if c == 1 {
                let (pi, pj) = support.to_parent(i, j);
                v.grid.set(pi, pj, true);
            }
        }
        v
    }

    /// The residue-class cells as a compact grid.
    pub fn subgrid(&self) -> BinaryGrid {
        let s = &self.support;
        BinaryGrid::from_fn(s.rows(), s.cols(), |i, j| {
            let (pi, pj) = s.to_parent(i, j);
            self.grid.is_one(pi, pj)
        })
        .expect("support is non-empty")
    }

    /// Whether all 1s lie on the support's residue class.
    pub fn respects_support(&self) -> bool {
        self.grid
            .iter()
            .all(|(i, j, v)| v == 0 || self.support.contains(i, j))
    }
}

/// Row states during column-by-column construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RowKind {
    /// Constant so far; stays all zero unless a later -1 fills its prefix.
    ZeroRow,
    /// Has changed value and currently holds 1.
    Star1Row,
    /// Has changed value and currently holds 0.
    Star0Row,
}

/// Clears full subgrid rows and columns of 1s until none remain.
pub fn reduce_valuation(v: &Valuation) -> Valuation {
    Valuation::from_subgrid(&reduce_subgrid(&v.subgrid()), v.support)
}

pub(crate) fn reduce_subgrid(g: &BinaryGrid) -> BinaryGrid {
    let mut g = g.clone();
    let (rows, cols) = g.dims();
    loop {
        let mut changed = false;
        for i in 1..=rows {
            if g.row(i).iter().all(|&c| c == 1) {
                for j in 1..=cols {
                    g.set(i, j, false);
                }
                changed = true;
            }
        }
        for j in 1..=cols {
            if (1..=rows).all(|i| g.is_one(i, j)) {
                for i in 1..=rows {
                    g.set(i, j, false);
                }
                changed = true;
            }
        }
        if !changed {
            return g;
        }
    }
}

/// Per-step record of the construction, for checking branching bounds.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EnumerationTrace {
    /// Frontier size after each column step (the first entry is the start).
    pub frontier_sizes: Vec<usize>,
    /// For each expanded element: whether it had a zero row, and how many
    /// of its extensions survived.
    pub extensions: Vec<(bool, usize)>,
}

#[derive(Clone)]
struct Partial {
    cells: Vec<u8>,
    kinds: Vec<RowKind>,
}

/// All minimal valuations of `target` on the residue class `sref`, whose
/// parent shape is the output matrix.
pub fn enumerate_minimal(target: &IntGrid, sref: &SubgridRef) -> Vec<Valuation> {
    enumerate_minimal_traced(target, sref, &mut Stats::default(), None)
}

pub fn enumerate_minimal_traced(
    target: &IntGrid,
    sref: &SubgridRef,
    stats: &mut Stats,
    mut trace: Option<&mut EnumerationTrace>,
) -> Vec<Valuation> {
    let (rows, cols) = (sref.rows(), sref.cols());
    if rows < 2 || cols < 2 {
        stats.valuations_enumerated += 1;
        return vec![Valuation::zero(*sref)];
    }
    if target.dims() != (rows - 1, cols - 1) {
        return Vec::new();
    }
    let mut frontier = vec![Partial {
        cells: vec![0; rows * cols],
        kinds: vec![RowKind::ZeroRow; rows],
    }];
    if let Some(t) = trace.as_deref_mut() {
        t.frontier_sizes.push(1);
    }
    let mut prefix = vec![0i32; rows];
    for j in 1..cols {
        for i in 1..rows {
            prefix[i] = prefix[i - 1] + target.get(i, j);
        }
        let lo = -1 - prefix.iter().min().unwrap();
        let hi = 1 - prefix.iter().max().unwrap();
        let mut next = Vec::new();
        for part in &frontier {
            let mut kept = 0;
            for c in lo..=hi {
                match extend(part, &prefix, c, j, cols) {
                    Some(ext) if !has_full_column(&ext.cells, rows, cols, j + 1) => {
                        next.push(ext);
                        kept += 1;
                    }
                    _ => stats.pruned_candidates += 1,
                }
            }
            stats.ops(rows * cols);
            if let Some(t) = trace.as_deref_mut() {
                t.extensions
                    .push((part.kinds.contains(&RowKind::ZeroRow), kept));
            }
        }
        frontier = next;
        if let Some(t) = trace.as_deref_mut() {
            t.frontier_sizes.push(frontier.len());
        }
        if frontier.is_empty() {
            break;
        }
    }
    let out: Vec<Valuation> = frontier
        .into_iter()
        .filter(|part| !has_full_column(&part.cells, rows, cols, cols))
        .map(|part| {
            let sub =
                BinaryGrid::from_fn(rows, cols, |i, j| part.cells[(i - 1) * cols + j - 1] == 1)
                    .expect("non-empty");
            Valuation::from_subgrid(&sub, *sref)
        })
        .collect();
    stats.valuations_enumerated += out.len() as u64;
    out
}

/// Applies the column step `j -> j+1` with row deltas `c + prefix[i]`.
fn extend(part: &Partial, prefix: &[i32], c: i32, j: usize, cols: usize) -> Option<Partial> {
    let mut next = part.clone();
    for (r, &pr) in prefix.iter().enumerate() {
        let row = &mut next.cells[r * cols..(r + 1) * cols];
        match (c + pr, part.kinds[r]) {
            (0, _) => {}
            (1, RowKind::ZeroRow | RowKind::Star0Row) => {
                row[j..].fill(1);
                next.kinds[r] = RowKind::Star1Row;
            }
            (-1, RowKind::ZeroRow) => {
                row[..j].fill(1);
                next.kinds[r] = RowKind::Star0Row;
            }
            (-1, RowKind::Star1Row) => {
                row[j..].fill(0);
                next.kinds[r] = RowKind::Star0Row;
            }
            _ => return None,
        }
    }
    Some(next)
}

/// Whether any of the first `upto` columns is all 1s. Those columns can
/// only gain 1s later, so a full one rules out every completion.
fn has_full_column(cells: &[u8], rows: usize, cols: usize, upto: usize) -> bool {
    (0..upto).any(|j| (0..rows).all(|i| cells[i * cols + j] == 1))
}

/// Targets for every residue class: `S(chi_{1,1}(a))_{a,b}` with the
/// subgrid references of the output matrix.
pub fn valuation_targets(a: &IntGrid, w: WindowSpec) -> Vec<(SubgridRef, IntGrid)> {
    let (m, n) = w.preimage_dims(a.rows(), a.cols());
    let x = chi11_of_scan(a);
    SubgridRef::all(w, m, n)
        .into_iter()
        .map(|s| {
            let t =
                extract_subgrid(&x, &s.with_parent(x.rows(), x.cols())).expect("matching parent");
            (s, t)
        })
        .collect()
}

/// Minimal valuations of every residue class, in `(a, b)` lexicographic order.
pub fn minimal_valuations_for_scan(
    a: &IntGrid,
    w: WindowSpec,
    stats: &mut Stats,
) -> Vec<Vec<Valuation>> {
    valuation_targets(a, w)
        .into_iter()
        .map(|(s, t)| enumerate_minimal_traced(&t, &s, stats, None))
        .collect()
}

/// Lexicographic index vectors over the Cartesian product of the given
/// sizes, last position varying fastest.
#[derive(Debug, Clone)]
pub struct ProductIndices {
    sizes: Vec<usize>,
    next: Option<Vec<usize>>,
}

impl ProductIndices {
    pub fn new(sizes: Vec<usize>) -> Self {
        let next = if sizes.contains(&0) {
            None
        } else {
            Some(vec![0; sizes.len()])
        };
        ProductIndices { sizes, next }
    }
}

impl Iterator for ProductIndices {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let cur = self.next.take()?;
        let mut adv = cur.clone();
        let mut k = adv.len();
        let mut carried = true;
        while k > 0 && carried {
            k -= 1;
            adv[k] += 1;
            if adv[k] == self.sizes[k] {
                adv[k] = 0;
            } else {
                carried = false;
            }
        }
        if !carried {
            self.next = Some(adv);
        }
        Some(cur)
    }
}

/// Sums one valuation from each class in every possible way.
pub fn combine_valuations(per_subgrid: &[Vec<Valuation>]) -> Result<Vec<BinaryGrid>> {
    if let Some(empty) = per_subgrid.iter().position(|v| v.is_empty()) {
        return Err(unrealizable(per_subgrid, empty));
    }
    let sizes = per_subgrid.iter().map(Vec::len).collect();
    ProductIndices::new(sizes)
        .map(|idx| combine_one(per_subgrid, &idx))
        .collect()
}

fn unrealizable(per_subgrid: &[Vec<Valuation>], k: usize) -> Error {
    // Empty lists carry no reference, so recover (a, b) from the position.
    let q = per_subgrid
        .iter()
        .find_map(|v| v.first().map(|x| x.support.window.q))
        .unwrap_or(1);
    Error::Unrealizable {
        a: k / q + 1,
        b: k % q + 1,
    }
}

/// The sum of the chosen valuations; supports are disjoint by construction.
pub fn combine_one(per_subgrid: &[Vec<Valuation>], idx: &[usize]) -> Result<BinaryGrid> {
    let first = &per_subgrid[0][idx[0]].grid;
    let mut acc = first.clone();
    for (list, &k) in per_subgrid.iter().zip(idx).skip(1) {
        acc = acc
            .disjoint_union(&list[k].grid)?
            .ok_or(Error::Infeasible("valuations overlap"))?;
    }
    Ok(acc)
}

/// `chi_{1,1}` of the subgrid cells, for direct validity checks.
pub fn chi_of_subgrid(sub: &BinaryGrid) -> IntGrid {
    chi(sub, WindowSpec { p: 1, q: 1 })
}

/// Whether `v` reproduces `target` on its support.
pub fn is_valuation_of(v: &Valuation, target: &IntGrid) -> bool {
    let sub = v.subgrid();
    if sub.rows() < 2 || sub.cols() < 2 {
        return v.respects_support();
    }
    v.respects_support() && chi_of_subgrid(&sub) == *target
}
