//! Reconstruction from (1,1)-smooth scans: one witness, or the symbolic
//! family of all template placements.

use std::fmt;

use crate::decompose::{decompose, Decomposition};
use crate::error::{Error, Result};
use crate::grid::{residue, BinaryGrid, Grid, IntGrid, WindowSpec};
use crate::invariant::{rec_const_cols_step1_counted, rec_const_rows_step1_counted, PartialFill};
use crate::scan::{chi11_of_scan, rectangular_scan_counted};
use crate::stats::Stats;

/// Cell of a window template or of a symbolic grid.
///
/// `P` cells are `(p,0)`-invariant, `Q` cells `(0,q)`-invariant, and `One`
/// and the indexed markers are invariant both ways.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Symbol {
    #[default]
    Zero,
    One,
    P,
    Q,
    OneP(u32),
    OneQ(u32),
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Symbol::Zero => write!(f, "0"),
            Symbol::One => write!(f, "1"),
            Symbol::P => write!(f, "P"),
            Symbol::Q => write!(f, "Q"),
            Symbol::OneP(k) => write!(f, "p{k}"),
            Symbol::OneQ(k) => write!(f, "q{k}"),
        }
    }
}

pub type SymbolicGrid = Grid<Symbol>;

/// A `p x q` schedule of symbols.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WindowTemplate {
    pub cells: Grid<Symbol>,
}

impl WindowTemplate {
    pub fn count_in_row(&self, i: usize, s: Symbol) -> usize {
        self.cells.row(i).iter().filter(|&&c| c == s).count()
    }

    pub fn count_in_col(&self, j: usize, s: Symbol) -> usize {
        (1..=self.cells.rows())
            .filter(|&i| self.cells.get(i, j) == s)
            .count()
    }

    pub fn count(&self, s: Symbol) -> usize {
        self.cells.cells().iter().filter(|&&c| c == s).count()
    }
}

/// Per-class maxima of a forced-count vector, one entry per class `1..=period`.
pub fn pent_class_max(pent: &[i32], period: usize) -> Vec<i32> {
    let mut out = vec![0; period];
    for (idx, &v) in pent.iter().enumerate() {
        let c = residue(idx + 1, period) - 1;
        out[c] = out[c].max(v);
    }
    out
}

/// The forced-count data a decomposition yields.
#[derive(Debug, Clone)]
pub struct SmoothPlan {
    pub t: i32,
    pub rows: PartialFill,
    pub cols: PartialFill,
    pub class_rows: Vec<i32>,
    pub class_cols: Vec<i32>,
}

impl SmoothPlan {
    pub fn k_row(&self) -> i32 {
        self.rows.k_remaining
    }

    pub fn k_col(&self) -> i32 {
        self.cols.k_remaining
    }
}

/// Runs the first pass of both invariant reconstructions on one
/// decomposition. `None` when either side already fails.
pub fn plan_for(d: &Decomposition, w: WindowSpec, stats: &mut Stats) -> Option<SmoothPlan> {
    let rows = rec_const_rows_step1_counted(&d.row_part(), w, stats).ok()?;
    let cols = rec_const_cols_step1_counted(&d.col_part(), w, stats).ok()?;
    let class_rows = pent_class_max(&rows.pent, w.p);
    let class_cols = pent_class_max(&cols.pent, w.q);
    Some(SmoothPlan {
        t: d.t,
        rows,
        cols,
        class_rows,
        class_cols,
    })
}

/// Rejects cells outside `[0, pq]` and scans that are not (1,1)-smooth.
fn check_smooth_scan(a: &IntGrid, w: WindowSpec) -> Result<()> {
    let max = w.area();
    if let Some((i, j, v)) = a.iter().find(|&(_, _, v)| v < 0 || v > max) {
        return Err(Error::ScanOutOfRange {
            row: i,
            col: j,
            value: v,
            max,
        });
    }
    if !chi11_of_scan(a).is_zero() {
        return Err(Error::NonSmoothScan);
    }
    Ok(())
}

/// Whether a 0/1 matrix with row sums `rows` and column sums at most `caps`
/// exists.
fn fits_under_caps(rows: &[i32], caps: &[i32]) -> bool {
    let mut sorted: Vec<i32> = rows.to_vec();
    sorted.sort_unstable_by(|a, b| b.cmp(a));
    let mut prefix = 0;
    for (k, &r) in sorted.iter().enumerate() {
        prefix += r;
        let room: i32 = caps.iter().map(|&c| c.min(k as i32 + 1).max(0)).sum();
        if prefix > room {
            return false;
        }
    }
    true
}

struct TemplateSearch<'a> {
    p: usize,
    q: usize,
    q_left: Vec<i32>,
    p_left: Vec<i32>,
    ones_left: i32,
    cells: Vec<Symbol>,
    stats: &'a mut Stats,
}

impl TemplateSearch<'_> {
    fn rows_ahead_feasible(&self, from_row: usize) -> bool {
        let rows = &self.q_left[from_row..];
        let rows_remaining = (self.p - from_row) as i32;
        let caps: Vec<i32> = self.p_left.iter().map(|&c| rows_remaining - c).collect();
        if caps.iter().any(|&c| c < 0) {
            return false;
        }
        let used: i32 = rows.iter().sum::<i32>() + self.p_left.iter().sum::<i32>();
        rows_remaining * self.q as i32 - used >= self.ones_left && fits_under_caps(rows, &caps)
    }

    fn run(&mut self, pos: usize, visit: &mut dyn FnMut(&[Symbol]) -> bool) -> bool {
        let (p, q) = (self.p, self.q);
        if pos == p * q {
            self.stats.templates_tried += 1;
            if self.ones_left == 0 {
                return visit(&self.cells);
            }
            return false;
        }
        let (i, j) = (pos / q, pos % q);
        if j == 0 && !self.rows_ahead_feasible(i) {
            return false;
        }
        for s in [Symbol::Zero, Symbol::One, Symbol::P, Symbol::Q] {
            let ok = match s {
                Symbol::Zero => true,
                Symbol::One => self.ones_left > 0,
                Symbol::P => self.p_left[j] > 0,
                Symbol::Q => self.q_left[i] > 0,
                _ => unreachable!(),
            };
            if !ok {
                continue;
            }
            self.apply(s, i, j, -1);
            if self.p_left[j] <= (p - i - 1) as i32 && self.q_left[i] <= (q - j - 1) as i32 {
                self.cells[pos] = s;
                if self.run(pos + 1, visit) {
                    return true;
                }
            }
            self.apply(s, i, j, 1);
        }
        self.cells[pos] = Symbol::Zero;
        false
    }

    fn apply(&mut self, s: Symbol, i: usize, j: usize, delta: i32) {
        match s {
            Symbol::One => self.ones_left += delta,
            Symbol::P => self.p_left[j] += delta,
            Symbol::Q => self.q_left[i] += delta,
            _ => {}
        }
    }
}

fn template_search(
    class_rows: &[i32],
    class_cols: &[i32],
    ones: i32,
    w: WindowSpec,
    stats: &mut Stats,
    visit: &mut dyn FnMut(&[Symbol]) -> bool,
) {
    let (p, q) = (w.p, w.q);
    if ones < 0
        || class_rows.len() != p
        || class_cols.len() != q
        || class_rows.iter().any(|&r| !(0..=q as i32).contains(&r))
        || class_cols.iter().any(|&c| !(0..=p as i32).contains(&c))
    {
        return;
    }
    let mut search = TemplateSearch {
        p,
        q,
        q_left: class_rows.to_vec(),
        p_left: class_cols.to_vec(),
        ones_left: ones,
        cells: vec![Symbol::Zero; p * q],
        stats,
    };
    search.run(0, visit);
}

fn to_template(cells: &[Symbol], w: WindowSpec) -> WindowTemplate {
    WindowTemplate {
        cells: Grid::from_vec(w.p, w.q, cells.to_vec()).expect("template shape"),
    }
}

/// First template over `{0,1,P,Q}` with the given `Q` count per row, `P`
/// count per column and number of 1s.
pub fn find_window_template(
    class_rows: &[i32],
    class_cols: &[i32],
    ones: i32,
    w: WindowSpec,
) -> Option<WindowTemplate> {
    find_window_template_counted(class_rows, class_cols, ones, w, &mut Stats::default())
}

pub fn find_window_template_counted(
    class_rows: &[i32],
    class_cols: &[i32],
    ones: i32,
    w: WindowSpec,
    stats: &mut Stats,
) -> Option<WindowTemplate> {
    let mut found = None;
    template_search(class_rows, class_cols, ones, w, stats, &mut |cells| {
        found = Some(to_template(cells, w));
        true
    });
    found
}

/// Every such template, in search order.
pub fn enumerate_window_templates(
    class_rows: &[i32],
    class_cols: &[i32],
    ones: i32,
    w: WindowSpec,
) -> Vec<WindowTemplate> {
    let mut out = Vec::new();
    template_search(
        class_rows,
        class_cols,
        ones,
        w,
        &mut Stats::default(),
        &mut |cells| {
            out.push(to_template(cells, w));
            false
        },
    );
    out
}

/// Expands a template into an `m x n` symbolic grid: each row takes its
/// forced `Q`s in the first `q` columns, each column its forced `P`s in the
/// first `p` rows, then every symbol is propagated along its invariances.
pub fn materialize(
    plan: &SmoothPlan,
    template: &WindowTemplate,
    w: WindowSpec,
    stats: &mut Stats,
) -> SymbolicGrid {
    let (m, n) = plan.rows.partial.dims();
    let (p, q) = (w.p, w.q);
    let t = &template.cells;
    // q_mask[i] / p_mask[j]: the template columns (rows) that row i (column j) takes.
    let mut q_mask = vec![0u64; m + 1];
    for (i, mask) in q_mask.iter_mut().enumerate().skip(1) {
        let mut budget = plan.rows.pent[i - 1];
        for j in 1..=q {
            if budget > 0 && t.get(residue(i, p), j) == Symbol::Q {
                *mask |= 1 << j;
                budget -= 1;
            }
        }
    }
    let mut p_mask = vec![0u64; n + 1];
    for (j, mask) in p_mask.iter_mut().enumerate().skip(1) {
        let mut budget = plan.cols.pent[j - 1];
        for i in 1..=p {
            if budget > 0 && t.get(i, residue(j, q)) == Symbol::P {
                *mask |= 1 << i;
                budget -= 1;
            }
        }
    }
    stats.ops(m * q + n * p + m * n);
    stats.symbolic_grids += 1;
    Grid::from_fn(m, n, |i, j| {
        let (ci, cj) = (residue(i, p), residue(j, q));
        match t.get(ci, cj) {
            Symbol::Q if q_mask[i] >> cj & 1 == 1 => Symbol::Q,
            Symbol::P if p_mask[j] >> ci & 1 == 1 => Symbol::P,
            Symbol::P | Symbol::Q | Symbol::Zero => Symbol::Zero,
            s => s,
        }
    })
}

/// Maps every non-zero symbol to 1.
pub fn flatten(g: &SymbolicGrid) -> BinaryGrid {
    BinaryGrid::from_fn(g.rows(), g.cols(), |i, j| g.get(i, j) != Symbol::Zero).expect("non-empty")
}

/// One binary matrix whose scan is the (1,1)-smooth grid `a`.
pub fn rec_smooth(a: &IntGrid, w: WindowSpec) -> Result<BinaryGrid> {
    rec_smooth_counted(a, w, &mut Stats::default())
}

pub fn rec_smooth_counted(a: &IntGrid, w: WindowSpec, stats: &mut Stats) -> Result<BinaryGrid> {
    check_smooth_scan(a, w)?;
    for d in decompose(a)? {
        let Some(plan) = plan_for(&d, w, stats) else {
            continue;
        };
        let ones = plan.k_row() + plan.k_col();
        let Some(template) =
            find_window_template_counted(&plan.class_rows, &plan.class_cols, ones, w, stats)
        else {
            continue;
        };
        let m = flatten(&materialize(&plan, &template, w, stats));
        if rectangular_scan_counted(&m, w, stats)? == *a {
            return Ok(m);
        }
        stats.merge_conflicts += 1;
    }
    Err(Error::Infeasible(
        "no decomposition admits a window template",
    ))
}

/// Templates over `{0, P, Q, 1_P, 1_Q}` using every `1_P` index `1..=k_col`
/// and every `1_Q` index `1..=k_row` at least once, with all cells of one
/// `1_P` index in a single column and all cells of one `1_Q` index in a
/// single row. Indices are numbered by first occurrence in row-major order,
/// so relabelings are not listed twice.
pub fn enumerate_marker_templates(
    class_rows: &[i32],
    class_cols: &[i32],
    k_row: i32,
    k_col: i32,
    w: WindowSpec,
    stats: &mut Stats,
) -> Vec<WindowTemplate> {
    let (p, q) = (w.p, w.q);
    if k_row < 0
        || k_col < 0
        || class_rows.iter().any(|&r| !(0..=q as i32).contains(&r))
        || class_cols.iter().any(|&c| !(0..=p as i32).contains(&c))
    {
        return Vec::new();
    }
    let mut st = MarkerSearch {
        p,
        q,
        q_left: class_rows.to_vec(),
        p_left: class_cols.to_vec(),
        k_row: k_row as u32,
        k_col: k_col as u32,
        p_home: Vec::new(),
        q_home: Vec::new(),
        cells: vec![Symbol::Zero; p * q],
        out: Vec::new(),
        stats,
    };
    st.run(0);
    st.out
}

struct MarkerSearch<'a> {
    p: usize,
    q: usize,
    q_left: Vec<i32>,
    p_left: Vec<i32>,
    k_row: u32,
    k_col: u32,
    /// Column of each `1_P` index opened so far.
    p_home: Vec<usize>,
    /// Row of each `1_Q` index opened so far.
    q_home: Vec<usize>,
    cells: Vec<Symbol>,
    out: Vec<WindowTemplate>,
    stats: &'a mut Stats,
}

impl MarkerSearch<'_> {
    fn run(&mut self, pos: usize) {
        let (p, q) = (self.p, self.q);
        if pos == p * q {
            self.stats.templates_tried += 1;
            if self.p_home.len() as u32 == self.k_col && self.q_home.len() as u32 == self.k_row {
                self.out.push(WindowTemplate {
                    cells: Grid::from_vec(p, q, self.cells.clone()).expect("p*q cells"),
                });
            }
            return;
        }
        let (i, j) = (pos / q, pos % q);
        let mut choices = vec![Symbol::Zero, Symbol::P, Symbol::Q];
        let open_p = self.p_home.len() as u32;
        let open_q = self.q_home.len() as u32;
        choices.extend(
            (1..=open_p)
                .filter(|&k| self.p_home[k as usize - 1] == j)
                .map(Symbol::OneP),
        );
        if open_p < self.k_col {
            choices.push(Symbol::OneP(open_p + 1));
        }
        choices.extend(
            (1..=open_q)
                .filter(|&k| self.q_home[k as usize - 1] == i)
                .map(Symbol::OneQ),
        );
        if open_q < self.k_row {
            choices.push(Symbol::OneQ(open_q + 1));
        }
        for s in choices {
            match s {
                Symbol::P if self.p_left[j] == 0 => continue,
                Symbol::Q if self.q_left[i] == 0 => continue,
                Symbol::P => self.p_left[j] -= 1,
                Symbol::Q => self.q_left[i] -= 1,
                Symbol::OneP(k) if k > open_p => self.p_home.push(j),
                Symbol::OneQ(k) if k > open_q => self.q_home.push(i),
                _ => {}
            }
            let unopened =
                (self.k_col - self.p_home.len() as u32) + (self.k_row - self.q_home.len() as u32);
            let ok = self.p_left[j] <= (p - i - 1) as i32
                && self.q_left[i] <= (q - j - 1) as i32
                && (unopened as usize) < p * q - pos;
            if ok {
                self.cells[pos] = s;
                self.run(pos + 1);
            }
            match s {
                Symbol::P => self.p_left[j] += 1,
                Symbol::Q => self.q_left[i] += 1,
                _ => {}
            }
            self.p_home.truncate(open_p as usize);
            self.q_home.truncate(open_q as usize);
        }
        self.cells[pos] = Symbol::Zero;
    }
}

/// Every symbolic grid over all decompositions and marker templates,
/// deduplicated, in `(t, template)` search order. May be empty.
pub fn rec_smooth_all(a: &IntGrid, w: WindowSpec) -> Result<Vec<SymbolicGrid>> {
    rec_smooth_all_counted(a, w, &mut Stats::default())
}

pub fn rec_smooth_all_counted(
    a: &IntGrid,
    w: WindowSpec,
    stats: &mut Stats,
) -> Result<Vec<SymbolicGrid>> {
    if a.iter().any(|(_, _, v)| v < 0) {
        return Err(Error::Infeasible("scan has a negative cell"));
    }
    if !chi11_of_scan(a).is_zero() {
        return Err(Error::NonSmoothScan);
    }
    let mut out: Vec<SymbolicGrid> = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for d in decompose(a)? {
        let Some(plan) = plan_for(&d, w, stats) else {
            continue;
        };
        let templates = enumerate_marker_templates(
            &plan.class_rows,
            &plan.class_cols,
            plan.k_row(),
            plan.k_col(),
            w,
            stats,
        );
        for t in &templates {
            let g = materialize(&plan, t, w, stats);
            if seen.insert(g.cells().to_vec()) {
                out.push(g);
            }
        }
    }
    Ok(out)
}
