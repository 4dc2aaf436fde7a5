//! Reconstruction from arbitrary scans: minimal valuations account for the
//! non-smooth part, and a smooth remainder is placed around them.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::decompose::decompose;
use crate::error::{Error, Result};
use crate::grid::{residue, BinaryGrid, IntGrid, WindowSpec};
use crate::invariant::{rec_const_cols_step1_counted, rec_const_rows_step1_counted};
use crate::scan::{chi11_of_scan, rectangular_scan, window_sums_counted};
use crate::smooth::{rec_smooth_all_counted, Symbol, SymbolicGrid};
use crate::stats::Stats;
use crate::valuation::{minimal_valuations_for_scan, Valuation};

/// Stage at which a failed run ran out of options.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FailureStage {
    /// Some residue class admits no valuation.
    Valuations,
    /// No valuation combination admits a smooth completion.
    Completion,
}

impl FailureStage {
    pub fn name(self) -> &'static str {
        match self {
            FailureStage::Valuations => "valuations",
            FailureStage::Completion => "completion",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostics {
    pub stage: FailureStage,
    pub stats: Stats,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ReconstructionOutcome {
    Solution(BinaryGrid),
    Failure(Diagnostics),
}

impl ReconstructionOutcome {
    pub fn solution(&self) -> Option<&BinaryGrid> {
        match self {
            ReconstructionOutcome::Solution(m) => Some(m),
            ReconstructionOutcome::Failure(_) => None,
        }
    }

    pub fn is_solution(&self) -> bool {
        self.solution().is_some()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ReconstructOptions {
    /// Shuffle each class's valuation list with this seed before combining.
    pub valuation_order_seed: Option<u64>,
}

/// Whether `m` has scan `a`. Shape mismatches count as `false`.
pub fn verify(a: &IntGrid, m: &BinaryGrid, w: WindowSpec) -> bool {
    if w.preimage_dims(a.rows(), a.cols()) != m.dims() {
        return false;
    }
    matches!(rectangular_scan(m, w), Ok(s) if s == *a)
}

/// Rejects empty scans and cells outside `[0, pq]`.
pub fn validate_scan(a: &IntGrid, w: WindowSpec) -> Result<()> {
    if a.rows() == 0 || a.cols() == 0 {
        return Err(Error::EmptyGrid {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    let max = w.area();
    match a.iter().find(|&(_, _, v)| v < 0 || v > max) {
        Some((row, col, value)) => Err(Error::ScanOutOfRange {
            row,
            col,
            value,
            max,
        }),
        None => Ok(()),
    }
}

pub fn reconstruct(a: &IntGrid, w: WindowSpec) -> Result<ReconstructionOutcome> {
    reconstruct_with(a, w, &ReconstructOptions::default(), &mut Stats::default())
}

pub fn reconstruct_with_stats(
    a: &IntGrid,
    w: WindowSpec,
    stats: &mut Stats,
) -> Result<ReconstructionOutcome> {
    reconstruct_with(a, w, &ReconstructOptions::default(), stats)
}

/// Exact reconstruction: tries valuation combinations in lexicographic
/// order and returns the first one that admits a smooth completion.
pub fn reconstruct_with(
    a: &IntGrid,
    w: WindowSpec,
    opts: &ReconstructOptions,
    stats: &mut Stats,
) -> Result<ReconstructionOutcome> {
    search_candidates(a, w, opts, stats, &mut |v, rest, stats| {
        let found = complete(rest, v, w, stats);
        if found.is_none() {
            stats.merge_conflicts += 1;
        }
        found
    })
}

/// Reconstruction that completes each candidate by merging it with the
/// symbolic family of the remainder, cell by cell, keeping the first merge
/// that re-scans correctly.
pub fn reconstruct_symbolic_merge(
    a: &IntGrid,
    w: WindowSpec,
    opts: &ReconstructOptions,
    stats: &mut Stats,
) -> Result<ReconstructionOutcome> {
    search_candidates(a, w, opts, stats, &mut |v, rest, stats| {
        let family = rec_smooth_all_counted(rest, w, stats).ok()?;
        for sym in &family {
            match merge_symbolic(v, sym, w) {
                Some(m) if verify(rest, &diff_as_grid(&m, v), w) => return Some(m),
                _ => stats.merge_conflicts += 1,
            }
        }
        None
    })
}

/// The cells of `m` not in `v`.
fn diff_as_grid(m: &BinaryGrid, v: &BinaryGrid) -> BinaryGrid {
    BinaryGrid::from_fn(m.rows(), m.cols(), |i, j| m.is_one(i, j) && !v.is_one(i, j))
        .expect("non-empty")
}

type Leaf<'a> = dyn FnMut(&BinaryGrid, &IntGrid, &mut Stats) -> Option<BinaryGrid> + 'a;

fn search_candidates(
    a: &IntGrid,
    w: WindowSpec,
    opts: &ReconstructOptions,
    stats: &mut Stats,
    leaf: &mut Leaf<'_>,
) -> Result<ReconstructionOutcome> {
    validate_scan(a, w)?;
    let mut lists = minimal_valuations_for_scan(a, w, stats);
    if let Some(seed) = opts.valuation_order_seed {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for l in &mut lists {
            l.shuffle(&mut rng);
        }
    }
    if lists.iter().any(Vec::is_empty) {
        return Ok(ReconstructionOutcome::Failure(Diagnostics {
            stage: FailureStage::Valuations,
            stats: *stats,
        }));
    }
    let mut scans = Vec::with_capacity(lists.len());
    for l in &lists {
        let mut s = Vec::with_capacity(l.len());
        for v in l {
            s.push(window_sums_counted(&v.grid, w, stats)?);
        }
        scans.push(s);
    }
    let (m, n) = w.preimage_dims(a.rows(), a.cols());
    let mut dfs = CandidateSearch {
        lists: &lists,
        scans: &scans,
        rest: a.clone(),
        v: BinaryGrid::zeros(m, n)?,
        stats,
        leaf,
    };
    match dfs.run(0) {
        Some(sol) => {
            if !verify(a, &sol, w) {
                return Err(Error::Internal("solution does not re-scan to the input"));
            }
            Ok(ReconstructionOutcome::Solution(sol))
        }
        None => Ok(ReconstructionOutcome::Failure(Diagnostics {
            stage: FailureStage::Completion,
            stats: *dfs.stats,
        })),
    }
}

struct CandidateSearch<'a, 'l> {
    lists: &'a [Vec<Valuation>],
    scans: &'a [Vec<IntGrid>],
    rest: IntGrid,
    v: BinaryGrid,
    stats: &'a mut Stats,
    leaf: &'a mut Leaf<'l>,
}

impl CandidateSearch<'_, '_> {
    fn run(&mut self, class: usize) -> Option<BinaryGrid> {
        if class == self.lists.len() {
            self.stats.valuation_candidates += 1;
            debug_assert!(chi11_of_scan(&self.rest).is_zero());
            return (self.leaf)(&self.v, &self.rest, self.stats);
        }
        for (val, scan) in self.lists[class].iter().zip(&self.scans[class]) {
            let mut negative = false;
            for (r, s) in self.rest.cells_mut().iter_mut().zip(scan.cells()) {
                *r -= s;
                negative |= *r < 0;
            }
            self.stats.ops(scan.cells().len());
            let found = if negative {
                self.stats.pruned_candidates += 1;
                None
            } else {
                set_cells(&mut self.v, &val.grid, true);
                let found = self.run(class + 1);
                set_cells(&mut self.v, &val.grid, false);
                found
            };
            for (r, s) in self.rest.cells_mut().iter_mut().zip(scan.cells()) {
                *r += s;
            }
            if found.is_some() {
                return found;
            }
        }
        None
    }
}

fn set_cells(target: &mut BinaryGrid, ones: &BinaryGrid, value: bool) {
    for (i, j, c) in ones.iter() {
        if c == 1 {
            target.set(i, j, value);
        }
    }
}

/// A smooth matrix `S`, disjoint from `v`, with scan `rest`; returns `v + S`.
///
/// Any smooth `S` splits into `(0,q)`-invariant row pieces and
/// `(p,0)`-invariant column pieces, one kind per residue class. Row `i`
/// then carries `pent_row[i] + e` row pieces for a per-class slack `e >= 0`,
/// columns likewise, and the slacks sum to a fixed total. The search picks
/// the piece kind of each class so that the free room covers that total.
pub fn complete(
    rest: &IntGrid,
    v: &BinaryGrid,
    w: WindowSpec,
    stats: &mut Stats,
) -> Option<BinaryGrid> {
    if !chi11_of_scan(rest).is_zero() {
        return None;
    }
    let d = decompose(rest).ok()?.into_iter().next()?;
    let rows_fill = rec_const_rows_step1_counted(&d.row_part(), w, stats).ok()?;
    let cols_fill = rec_const_cols_step1_counted(&d.col_part(), w, stats).ok()?;
    let (p, q) = (w.p, w.q);
    let (m, n) = v.dims();
    let pent_row = normalize_by_class(&rows_fill.pent, p);
    let pent_col = normalize_by_class(&cols_fill.pent, q);
    let h = rest.get(1, 1) - pent_row[..p].iter().sum::<i32>() - pent_col[..q].iter().sum::<i32>();
    if h < 0 {
        return None;
    }

    // free_row[i] bit b-1: the row piece (i, b + kq) avoids v.
    let mut free_row = vec![(1u32 << q) - 1; m];
    let mut free_col = vec![(1u32 << p) - 1; n];
    for (i, j, c) in v.iter() {
        if c == 1 {
            free_row[i - 1] &= !(1 << (residue(j, q) - 1));
            free_col[j - 1] &= !(1 << (residue(i, p) - 1));
        }
    }
    stats.ops(m * n);
    let caprow = capacities(&free_row, &pent_row, p, q);
    let capcol = capacities(&free_col, &pent_col, q, p);
    stats.ops(m << q);
    stats.ops(n << p);

    let mut search = KindSearch {
        p,
        q,
        h,
        caprow: &caprow,
        capcol: &capcol,
        qmasks: vec![0; p],
        stats,
    };
    if !search.run(0) {
        return None;
    }
    let qmasks = search.qmasks;
    let pmasks: Vec<u32> = (0..q)
        .map(|b| {
            (0..p)
                .filter(|&r| qmasks[r] >> b & 1 == 0)
                .fold(0, |acc, r| acc | 1 << r)
        })
        .collect();

    let mut left = h;
    let mut slack_row = vec![0; p];
    for r in 0..p {
        slack_row[r] = caprow[r][qmasks[r] as usize].min(left);
        left -= slack_row[r];
    }
    let mut slack_col = vec![0; q];
    for b in 0..q {
        slack_col[b] = capcol[b][pmasks[b] as usize].min(left);
        left -= slack_col[b];
    }
    debug_assert_eq!(left, 0);

    let mut out = v.clone();
    for i in 1..=m {
        let r = residue(i, p) - 1;
        let want = pent_row[i - 1] + slack_row[r];
        for b in lowest_bits(qmasks[r] & free_row[i - 1], want) {
            for j in (b + 1..=n).step_by(q) {
                out.set(i, j, true);
            }
        }
    }
    for j in 1..=n {
        let b = residue(j, q) - 1;
        let want = pent_col[j - 1] + slack_col[b];
        for r in lowest_bits(pmasks[b] & free_col[j - 1], want) {
            for i in (r + 1..=m).step_by(p) {
                out.set(i, j, true);
            }
        }
    }
    stats.ops(m * n);
    Some(out)
}

/// Shifts each residue class so its minimum is zero.
fn normalize_by_class(pent: &[i32], period: usize) -> Vec<i32> {
    let mut mins = vec![i32::MAX; period];
    for (idx, &v) in pent.iter().enumerate() {
        let c = idx % period;
        mins[c] = mins[c].min(v);
    }
    pent.iter()
        .enumerate()
        .map(|(idx, &v)| v - mins[idx % period])
        .collect()
}

/// `cap[c][mask]`: over lines of class `c`, the least room left when the
/// classes in `mask` are allowed, after the forced count.
fn capacities(free: &[u32], pent: &[i32], period: usize, width: usize) -> Vec<Vec<i32>> {
    let mut cap = vec![vec![i32::MAX; 1 << width]; period];
    for (idx, (&f, &pe)) in free.iter().zip(pent).enumerate() {
        let row = &mut cap[idx % period];
        for (mask, slot) in row.iter_mut().enumerate() {
            *slot = (*slot).min((mask as u32 & f).count_ones() as i32 - pe);
        }
    }
    cap
}

/// The lowest `count` set bits of `mask`, as 0-based positions.
fn lowest_bits(mask: u32, count: i32) -> impl Iterator<Item = usize> {
    (0..32usize)
        .filter(move |&b| mask >> b & 1 == 1)
        .take(count.max(0) as usize)
}

struct KindSearch<'a> {
    p: usize,
    q: usize,
    h: i32,
    caprow: &'a [Vec<i32>],
    capcol: &'a [Vec<i32>],
    qmasks: Vec<u32>,
    stats: &'a mut Stats,
}

impl KindSearch<'_> {
    /// Column-class masks when rows `< r` use their chosen masks and rows
    /// `>= r` are left open for column pieces.
    fn open_pmask(&self, r: usize, b: usize) -> u32 {
        let decided = (0..r)
            .filter(|&x| self.qmasks[x] >> b & 1 == 0)
            .fold(0, |acc, x| acc | 1 << x);
        let open = ((1u32 << self.p) - 1) & !((1u32 << r) - 1);
        decided | open
    }

    fn run(&mut self, r: usize) -> bool {
        let full_q = (1u32 << self.q) - 1;
        let row_total: i32 = (0..r)
            .map(|x| self.caprow[x][self.qmasks[x] as usize])
            .sum::<i32>()
            + (r..self.p)
                .map(|x| self.caprow[x][full_q as usize])
                .sum::<i32>();
        let mut col_total = 0;
        for b in 0..self.q {
            let c = self.capcol[b][self.open_pmask(r, b) as usize];
            if c < 0 {
                return false;
            }
            col_total += c;
        }
        if row_total + col_total < self.h {
            return false;
        }
        if r == self.p {
            self.stats.templates_tried += 1;
            return true;
        }
        for mask in (0..=full_q).rev() {
            if self.caprow[r][mask as usize] < 0 {
                continue;
            }
            self.qmasks[r] = mask;
            if self.run(r + 1) {
                return true;
            }
        }
        self.qmasks[r] = 0;
        false
    }
}

/// Merges a valuation combination with one symbolic grid, cell by cell:
/// `P`/`Q` cells must land on free cells, and each indexed marker claims a
/// free residue column (resp. row) at its first unblocked occurrence.
///
/// Returns `None` on a conflict. The result is not re-scanned here.
pub fn merge_symbolic(v: &BinaryGrid, sym: &SymbolicGrid, w: WindowSpec) -> Option<BinaryGrid> {
    let (m, n) = v.dims();
    let (p, q) = (w.p, w.q);
    let mut out = v.clone();
    let mut s = sym.clone();
    for i in 1..=m {
        for j in 1..=n {
            match s.get(i, j) {
                Symbol::P | Symbol::Q | Symbol::One => {
                    if out.is_one(i, j) {
                        return None;
                    }
                    out.set(i, j, true);
                }
                Symbol::OneP(k) => {
                    let class: Vec<usize> = (residue(i, p)..=m).step_by(p).collect();
                    if class.iter().all(|&x| !out.is_one(x, j)) {
                        for &x in &class {
                            out.set(x, j, true);
                        }
                        for x in 1..=m {
                            if s.get(x, j) == Symbol::OneP(k) {
                                s.set(x, j, Symbol::Zero);
                            }
                        }
                    } else {
                        for &x in &class {
                            s.set(x, j, Symbol::Zero);
                        }
                        if !(1..=m).any(|x| s.get(x, j) == Symbol::OneP(k)) {
                            return None;
                        }
                    }
                }
                Symbol::OneQ(k) => {
                    let class: Vec<usize> = (residue(j, q)..=n).step_by(q).collect();
                    if class.iter().all(|&y| !out.is_one(i, y)) {
                        for &y in &class {
                            out.set(i, y, true);
                        }
                        for y in 1..=n {
                            if s.get(i, y) == Symbol::OneQ(k) {
                                s.set(i, y, Symbol::Zero);
                            }
                        }
                    } else {
                        for &y in &class {
                            s.set(i, y, Symbol::Zero);
                        }
                        if !(1..=n).any(|y| s.get(i, y) == Symbol::OneQ(k)) {
                            return None;
                        }
                    }
                }
                Symbol::Zero => {}
            }
        }
    }
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use crate::oracle::oracle_preimages;

    fn win(p: usize, q: usize) -> WindowSpec {
        WindowSpec::new(p, q).unwrap()
    }

    fn all_binary(m: usize, n: usize) -> impl Iterator<Item = BinaryGrid> {
        (0u32..(1 << (m * n))).map(move |bits| {
            BinaryGrid::from_fn(m, n, |i, j| bits >> ((i - 1) * n + (j - 1)) & 1 == 1).unwrap()
        })
    }

    #[test]
    fn identity_window_returns_the_scan() {
        let a = Grid::from_rows(vec![vec![1, 0], vec![0, 1]]).unwrap();
        let out = reconstruct(&a, win(1, 1)).unwrap();
        assert_eq!(out.solution().unwrap().to_int(), a);
    }

    #[test]
    fn out_of_range_is_an_input_error() {
        let a = Grid::filled(1, 1, 5);
        assert!(matches!(
            reconstruct(&a, win(2, 2)),
            Err(Error::ScanOutOfRange { .. })
        ));
        let a = Grid::filled(1, 1, -1);
        assert!(matches!(
            reconstruct(&a, win(2, 2)),
            Err(Error::ScanOutOfRange { .. })
        ));
    }

    #[test]
    fn verify_examples() {
        let w = win(2, 2);
        let m = BinaryGrid::from_rows(vec![vec![1, 0, 1], vec![0, 1, 0], vec![1, 1, 0]]).unwrap();
        let a = rectangular_scan(&m, w).unwrap();
        assert!(verify(&a, &m, w));
        for (i, j, _) in m.iter() {
            let mut f = m.clone();
            f.flip(i, j);
            assert!(!verify(&a, &f, w));
        }
        assert!(!verify(&a, &BinaryGrid::zeros(2, 2).unwrap(), w));
    }

    #[test]
    fn round_trip_small_exhaustive() {
        for (m, n, p, q) in [
            (3, 3, 2, 2),
            (3, 4, 2, 2),
            (4, 3, 2, 1),
            (3, 4, 1, 3),
            (4, 3, 3, 2),
        ] {
            let w = win(p, q);
            for g in all_binary(m, n) {
                let a = rectangular_scan(&g, w).unwrap();
                let out = reconstruct(&a, w).unwrap();
                assert!(out.is_solution(), "{g:?} {w:?}");
            }
        }
    }

    #[test]
    fn failure_agrees_with_oracle() {
        for (sr, sc, p, q) in [(2, 2, 2, 2), (2, 3, 1, 2), (3, 2, 2, 1), (2, 2, 1, 1)] {
            let w = win(p, q);
            let base = (p * q + 1) as u32;
            for code in 0..base.pow((sr * sc) as u32) {
                let a = Grid::from_fn(sr, sc, |i, j| {
                    (code / base.pow(((i - 1) * sc + j - 1) as u32) % base) as i32
                });
                let has = !oracle_preimages(&a, w, 1).unwrap().is_empty();
                let out = reconstruct(&a, w).unwrap();
                assert_eq!(out.is_solution(), has, "{a:?} {w:?}");
                let merged = reconstruct_symbolic_merge(
                    &a,
                    w,
                    &ReconstructOptions::default(),
                    &mut Stats::default(),
                )
                .unwrap();
                if merged.is_solution() {
                    assert!(has);
                }
            }
        }
    }

    #[test]
    fn seeded_order_still_solves() {
        let w = win(2, 2);
        let m = BinaryGrid::from_rows(vec![
            vec![1, 0, 0, 1],
            vec![0, 1, 1, 0],
            vec![1, 1, 0, 0],
            vec![0, 0, 1, 1],
        ])
        .unwrap();
        let a = rectangular_scan(&m, w).unwrap();
        for seed in 0..5 {
            let opts = ReconstructOptions {
                valuation_order_seed: Some(seed),
            };
            let out = reconstruct_with(&a, w, &opts, &mut Stats::default()).unwrap();
            assert!(verify(&a, out.solution().unwrap(), w));
        }
    }

    #[test]
    fn merge_rejects_collisions() {
        let w = win(1, 1);
        let v = BinaryGrid::from_rows(vec![vec![1, 0]]).unwrap();
        let sym = Grid::from_rows(vec![vec![Symbol::P, Symbol::Zero]]).unwrap();
        assert_eq!(merge_symbolic(&v, &sym, w), None);
        let sym = Grid::from_rows(vec![vec![Symbol::Zero, Symbol::Q]]).unwrap();
        assert_eq!(
            merge_symbolic(&v, &sym, w),
            Some(BinaryGrid::ones(1, 2).unwrap())
        );
    }

    #[test]
    fn failure_reports_stage() {
        // A 2 next to a 0 under a 1x1 window cannot be binary, but the
        // range check passes for p*q = 2.
        let a = Grid::from_rows(vec![vec![2, 0]]).unwrap();
        let out = reconstruct(&a, win(1, 2)).unwrap();
        match out {
            ReconstructionOutcome::Failure(d) => assert_eq!(d.stage, FailureStage::Completion),
            _ => panic!("expected failure"),
        }
    }
}
