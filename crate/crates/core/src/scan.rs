//! Forward transforms: rectangular scan, chi, subgrids, and the smoothness
//! and invariance predicates built on them.

use crate::error::{Error, Result};
use crate::grid::{residue, BinaryGrid, Grid, IntGrid, WindowSpec};
use crate::stats::Stats;

/// Read-only integer view over binary and integer grids.
pub trait CellGrid {
    fn shape(&self) -> (usize, usize);
    fn value(&self, i: usize, j: usize) -> i32;
}

impl CellGrid for IntGrid {
    fn shape(&self) -> (usize, usize) {
        self.dims()
    }
    #[inline]
    fn value(&self, i: usize, j: usize) -> i32 {
        self.get(i, j)
    }
}

impl CellGrid for BinaryGrid {
    fn shape(&self) -> (usize, usize) {
        self.dims()
    }
    #[inline]
    fn value(&self, i: usize, j: usize) -> i32 {
        self.get(i, j) as i32
    }
}

/// Sum of every `p x q` window, via a summed-area table.
///
/// Result is `(m-p+1) x (n-q+1)`; cell `(i, j)` is the window whose top-left
/// corner sits on `(i, j)`.
pub fn window_sums<G: CellGrid>(g: &G, w: WindowSpec) -> Result<IntGrid> {
    window_sums_counted(g, w, &mut Stats::default())
}

pub(crate) fn window_sums_counted<G: CellGrid>(
    g: &G,
    w: WindowSpec,
    stats: &mut Stats,
) -> Result<IntGrid> {
    let (m, n) = g.shape();
    w.check_fits(m, n)?;
    // sat[i][j] = sum of g over [1,i] x [1,j], with a zero border.
    let stride = n + 1;
    let mut sat = vec![0i32; (m + 1) * (n + 1)];
    for i in 1..=m {
        let mut row_acc = 0;
        for j in 1..=n {
            row_acc += g.value(i, j);
            sat[i * stride + j] = sat[(i - 1) * stride + j] + row_acc;
        }
    }
    stats.ops(2 * m * n);
    let (p, q) = (w.p, w.q);
    let out = Grid::from_fn(m - p + 1, n - q + 1, |i, j| {
        let (i1, j1) = (i + p - 1, j + q - 1);
        sat[i1 * stride + j1] - sat[(i - 1) * stride + j1] - sat[i1 * stride + j - 1]
            + sat[(i - 1) * stride + j - 1]
    });
    stats.ops(out.rows() * out.cols());
    Ok(out)
}

/// The `(p, q)`-rectangular scan of a binary matrix.
pub fn rectangular_scan(m: &BinaryGrid, w: WindowSpec) -> Result<IntGrid> {
    window_sums(m, w)
}

pub(crate) fn rectangular_scan_counted(
    m: &BinaryGrid,
    w: WindowSpec,
    stats: &mut Stats,
) -> Result<IntGrid> {
    window_sums_counted(m, w, stats)
}

/// Four-corner mixed difference `g[i,j] + g[i+p,j+q] - g[i+p,j] - g[i,j+q]`.
///
/// The result is `(m-p) x (n-q)` and may be empty.
pub fn chi<G: CellGrid>(g: &G, w: WindowSpec) -> IntGrid {
    let (m, n) = g.shape();
    let (p, q) = (w.p, w.q);
    Grid::from_fn(m.saturating_sub(p), n.saturating_sub(q), |i, j| {
        g.value(i, j) + g.value(i + p, j + q) - g.value(i + p, j) - g.value(i, j + q)
    })
}

pub fn is_smooth<G: CellGrid>(g: &G, w: WindowSpec) -> bool {
    chi(g, w).is_zero()
}

/// `chi_{1,1}` of a scan, which equals `chi_{p,q}` of any matrix behind it.
pub fn chi11_of_scan(a: &IntGrid) -> IntGrid {
    chi(a, WindowSpec { p: 1, q: 1 })
}

/// Whether `m[i + k*dr, j + k*dc] == m[i, j]` for every integer `k` that
/// keeps both indices inside the grid.
pub fn is_invariant_at(m: &BinaryGrid, i: usize, j: usize, dr: usize, dc: usize) -> bool {
    if dr == 0 && dc == 0 {
        return true;
    }
    let v = m.get(i, j);
    let (rows, cols) = (m.rows() as isize, m.cols() as isize);
    let (i, j, dr, dc) = (i as isize, j as isize, dr as isize, dc as isize);
    for dir in [-1isize, 1] {
        let (mut r, mut c) = (i + dir * dr, j + dir * dc);
        while (1..=rows).contains(&r) && (1..=cols).contains(&c) {
            if m.get(r as usize, c as usize) != v {
                return false;
            }
            r += dir * dr;
            c += dir * dc;
        }
    }
    true
}

/// Splits a smooth matrix into a `(p,0)`-invariant part and a
/// `(0,q)`-invariant part with disjoint supports.
///
/// A 1-cell that is invariant both ways goes to the first part.
pub fn classify_smooth_cells(m: &BinaryGrid, w: WindowSpec) -> Result<(BinaryGrid, BinaryGrid)> {
    if !is_smooth(m, w) {
        return Err(Error::NotSmooth);
    }
    let (rows, cols) = m.dims();
    let mut col_part = BinaryGrid::zeros(rows, cols)?;
    let mut row_part = BinaryGrid::zeros(rows, cols)?;
    for (i, j, v) in m.iter() {
        if v == 0 {
            continue;
        }
        if is_invariant_at(m, i, j, w.p, 0) {
            col_part.set(i, j, true);
        } else {
            row_part.set(i, j, true);
        }
    }
    Ok((col_part, row_part))
}

/// The `(a, b)`-subgrid of a parent grid: the cells `(a + (i-1)p, b + (j-1)q)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SubgridRef {
    pub a: usize,
    pub b: usize,
    pub window: WindowSpec,
    pub parent_rows: usize,
    pub parent_cols: usize,
}

impl SubgridRef {
    pub fn new(
        a: usize,
        b: usize,
        window: WindowSpec,
        parent_rows: usize,
        parent_cols: usize,
    ) -> Result<Self> {
        if !(1..=window.p).contains(&a) || !(1..=window.q).contains(&b) {
            return Err(Error::InvalidSubgrid {
                a,
                b,
                p: window.p,
                q: window.q,
            });
        }
        Ok(SubgridRef {
            a,
            b,
            window,
            parent_rows,
            parent_cols,
        })
    }

    /// Same residue class, different parent shape.
    pub fn with_parent(self, rows: usize, cols: usize) -> Self {
        SubgridRef {
            parent_rows: rows,
            parent_cols: cols,
            ..self
        }
    }

    pub fn rows(&self) -> usize {
        count_in_class(self.a, self.window.p, self.parent_rows)
    }

    pub fn cols(&self) -> usize {
        count_in_class(self.b, self.window.q, self.parent_cols)
    }

    /// Parent coordinates of subgrid cell `(i, j)`.
    #[inline]
    pub fn to_parent(&self, i: usize, j: usize) -> (usize, usize) {
        (
            self.a + (i - 1) * self.window.p,
            self.b + (j - 1) * self.window.q,
        )
    }

    /// Whether parent cell `(i, j)` lies in this residue class.
    pub fn contains(&self, i: usize, j: usize) -> bool {
        residue(i, self.window.p) == self.a && residue(j, self.window.q) == self.b
    }

    /// Every `(a, b)` pair for a window, in lexicographic order.
    pub fn all(window: WindowSpec, parent_rows: usize, parent_cols: usize) -> Vec<SubgridRef> {
        let mut out = Vec::with_capacity(window.p * window.q);
        for a in 1..=window.p {
            for b in 1..=window.q {
                out.push(SubgridRef {
                    a,
                    b,
                    window,
                    parent_rows,
                    parent_cols,
                });
            }
        }
        out
    }
}

fn count_in_class(r: usize, period: usize, bound: usize) -> usize {
    if r > bound {
        0
    } else {
        (bound - r) / period + 1
    }
}

/// Extracts the `(a, b)`-subgrid. The reference's parent shape must match.
pub fn extract_subgrid<G: CellGrid>(g: &G, sref: &SubgridRef) -> Result<IntGrid> {
    crate::grid::check_same_dims(g.shape(), (sref.parent_rows, sref.parent_cols))?;
    Ok(Grid::from_fn(sref.rows(), sref.cols(), |i, j| {
        let (pi, pj) = sref.to_parent(i, j);
        g.value(pi, pj)
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bg(rows: Vec<Vec<u8>>) -> BinaryGrid {
        BinaryGrid::from_rows(rows).unwrap()
    }

    fn ig(rows: Vec<Vec<i32>>) -> IntGrid {
        Grid::from_rows(rows).unwrap()
    }

    fn win(p: usize, q: usize) -> WindowSpec {
        WindowSpec::new(p, q).unwrap()
    }

    fn single_ones(m: usize, n: usize, ones: &[(usize, usize)]) -> BinaryGrid {
        BinaryGrid::from_fn(m, n, |i, j| ones.contains(&(i, j))).unwrap()
    }

    fn all_binary(m: usize, n: usize) -> impl Iterator<Item = BinaryGrid> {
        (0u32..(1 << (m * n))).map(move |bits| {
            BinaryGrid::from_fn(m, n, |i, j| bits >> ((i - 1) * n + (j - 1)) & 1 == 1).unwrap()
        })
    }

    #[test]
    fn scan_examples() {
        let m = bg(vec![vec![1, 0, 1], vec![0, 1, 1]]);
        assert_eq!(rectangular_scan(&m, win(1, 1)).unwrap(), m.to_int());

        let ones = BinaryGrid::ones(4, 5).unwrap();
        assert_eq!(
            rectangular_scan(&ones, win(2, 3)).unwrap(),
            Grid::filled(3, 3, 6)
        );

        let m = bg(vec![vec![1, 0, 1], vec![0, 1, 0]]);
        assert_eq!(
            rectangular_scan(&m, win(2, 2)).unwrap(),
            ig(vec![vec![2, 2]])
        );
    }

    #[test]
    fn scan_rejects_oversized_window() {
        let m = BinaryGrid::zeros(2, 2).unwrap();
        assert!(matches!(
            rectangular_scan(&m, win(3, 1)),
            Err(Error::WindowTooLarge { .. })
        ));
    }

    #[test]
    fn chi_examples() {
        let c = BinaryGrid::ones(4, 4).unwrap();
        assert!(chi(&c, win(2, 1)).is_zero());
        let c = Grid::filled(5, 3, 7);
        assert!(chi(&c, win(1, 2)).is_zero());

        let m = single_ones(4, 4, &[(1, 1)]);
        assert_eq!(chi(&m, win(2, 2)), ig(vec![vec![1, 0], vec![0, 0]]));

        let m = single_ones(4, 4, &[(1, 1), (3, 3)]);
        assert_eq!(chi(&m, win(2, 2)), ig(vec![vec![2, 0], vec![0, 0]]));

        let m = BinaryGrid::ones(3, 3).unwrap();
        assert_eq!(chi(&m, win(3, 1)).dims(), (0, 2));
    }

    #[test]
    fn smoothness_examples() {
        // Homogeneous: a 2x3 tile repeated both ways.
        let tile = [[1u8, 0, 1], [0, 0, 1]];
        let h = BinaryGrid::from_fn(6, 7, |i, j| tile[(i - 1) % 2][(j - 1) % 3] == 1).unwrap();
        let scan = rectangular_scan(&h, win(2, 3)).unwrap();
        assert!(scan.cells().iter().all(|&v| v == 3));
        assert!(is_smooth(&h, win(2, 3)));

        assert!(!is_smooth(&bg(vec![vec![1, 0], vec![0, 1]]), win(1, 1)));

        let any = bg(vec![vec![1, 0, 1], vec![0, 1, 1]]);
        assert!(is_smooth(&any, win(2, 2)));
        assert!(is_smooth(&any, win(2, 1)));
    }

    #[test]
    fn chi11_examples() {
        assert_eq!(
            chi11_of_scan(&ig(vec![vec![1, 2], vec![2, 3]])),
            ig(vec![vec![0]])
        );
        assert!(chi11_of_scan(&Grid::filled(3, 4, 5)).is_zero());
    }

    #[test]
    fn invariance_examples() {
        let m = bg(vec![vec![1, 0], vec![0, 0], vec![1, 1], vec![0, 1]]);
        assert!(is_invariant_at(&m, 2, 2, 0, 0));
        assert!(is_invariant_at(&m, 1, 1, 2, 0));
        assert!(!is_invariant_at(&m, 1, 1, 1, 0));
        assert!(is_invariant_at(&m, 4, 2, 0, 5));
    }

    #[test]
    fn classify_examples() {
        let z = BinaryGrid::zeros(3, 4).unwrap();
        let (a, b) = classify_smooth_cells(&z, win(2, 2)).unwrap();
        assert_eq!(a, z);
        assert_eq!(b, z);

        let cols = BinaryGrid::from_fn(4, 5, |_, j| j % 2 == 1).unwrap();
        let (a, b) = classify_smooth_cells(&cols, win(2, 3)).unwrap();
        assert_eq!(a, cols);
        assert_eq!(b.count_ones(), 0);

        let bad = bg(vec![vec![1, 0], vec![0, 1]]);
        assert_eq!(
            classify_smooth_cells(&bad, win(1, 1)),
            Err(Error::NotSmooth)
        );
    }

    #[test]
    fn subgrid_examples() {
        let g = Grid::from_fn(5, 5, |i, j| (10 * i + j) as i32);
        let whole = SubgridRef::new(1, 1, win(1, 1), 5, 5).unwrap();
        assert_eq!(extract_subgrid(&g, &whole).unwrap(), g);

        let s = SubgridRef::new(2, 2, win(2, 2), 5, 5).unwrap();
        assert_eq!(
            extract_subgrid(&g, &s).unwrap(),
            ig(vec![vec![22, 24], vec![42, 44]])
        );

        let g3 = Grid::from_fn(3, 3, |i, j| (10 * i + j) as i32);
        let s = SubgridRef::new(1, 1, win(3, 3), 3, 3).unwrap();
        assert_eq!(extract_subgrid(&g3, &s).unwrap(), ig(vec![vec![11]]));

        assert!(SubgridRef::new(3, 1, win(2, 2), 5, 5).is_err());
    }

    #[test]
    fn cross_difference_on_all_small_smooth_grids() {
        for (m, n, p, q) in [(4, 4, 2, 2), (5, 3, 2, 1), (3, 5, 1, 2), (4, 4, 3, 2)] {
            let w = win(p, q);
            for g in all_binary(m, n).filter(|g| is_smooth(g, w)) {
                for i in 1..=m {
                    for j in 1..=n {
                        for i2 in (i..=m).step_by(p) {
                            for j2 in (j..=n).step_by(q) {
                                let lhs = g.get(i, j) + g.get(i2, j2);
                                let rhs = g.get(i2, j) + g.get(i, j2);
                                assert_eq!(lhs, rhs, "{g:?} at ({i},{j})-({i2},{j2})");
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn smooth_cells_are_invariant_one_way_or_the_other() {
        for (m, n, p, q) in [(4, 4, 2, 2), (5, 3, 2, 2), (3, 4, 1, 3), (4, 4, 3, 3)] {
            let w = win(p, q);
            for g in all_binary(m, n).filter(|g| is_smooth(g, w)) {
                for i in 1..=m {
                    for j in 1..=n {
                        assert!(is_invariant_at(&g, i, j, p, 0) || is_invariant_at(&g, i, j, 0, q));
                    }
                }
                let (col_part, row_part) = classify_smooth_cells(&g, w).unwrap();
                for (i, j, v) in col_part.iter() {
                    if v == 1 {
                        assert!(is_invariant_at(&col_part, i, j, p, 0));
                    }
                }
                for (i, j, v) in row_part.iter() {
                    if v == 1 {
                        assert!(is_invariant_at(&row_part, i, j, 0, q));
                    }
                }
                assert_eq!(col_part.disjoint_union(&row_part).unwrap(), Some(g.clone()));
                let sum = crate::grid::add(
                    &rectangular_scan(&col_part, w).unwrap(),
                    &rectangular_scan(&row_part, w).unwrap(),
                )
                .unwrap();
                assert_eq!(sum, rectangular_scan(&g, w).unwrap());
                assert!(rectangular_scan(&col_part, w).unwrap().has_constant_cols());
                assert!(rectangular_scan(&row_part, w).unwrap().has_constant_rows());
            }
        }
    }

    #[test]
    fn plus_minus_two_forces_four_cells() {
        let w = win(2, 1);
        for g in all_binary(4, 3) {
            let c = chi(&g, w);
            for (i, j, v) in c.iter() {
                let corners = (
                    g.get(i, j),
                    g.get(i + 2, j + 1),
                    g.get(i + 2, j),
                    g.get(i, j + 1),
                );
                if v == 2 {
                    assert_eq!(corners, (1, 1, 0, 0));
                } else if v == -2 {
                    assert_eq!(corners, (0, 0, 1, 1));
                }
            }
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn instance() -> impl Strategy<Value = (BinaryGrid, BinaryGrid, WindowSpec)> {
            (1usize..9, 1usize..9)
                .prop_flat_map(|(m, n)| {
                    (
                        proptest::collection::vec(0u8..2, m * n),
                        proptest::collection::vec(0u8..2, m * n),
                        1..=m,
                        1..=n,
                        Just((m, n)),
                    )
                })
                .prop_map(|(a, b, p, q, (m, n))| {
                    let ga = BinaryGrid::from_fn(m, n, |i, j| a[(i - 1) * n + j - 1] == 1).unwrap();
                    let gb = BinaryGrid::from_fn(m, n, |i, j| b[(i - 1) * n + j - 1] == 1).unwrap();
                    (ga, gb, WindowSpec::new(p, q).unwrap())
                })
        }

        proptest! {
            #[test]
            fn chi11_of_scan_equals_chi((g, _, w) in instance()) {
                let scan = rectangular_scan(&g, w).unwrap();
                prop_assert_eq!(chi11_of_scan(&scan), chi(&g, w));
            }

            #[test]
            fn scan_and_chi_are_additive((a, b, w) in instance()) {
                // Integer sum, then the disjoint binary case.
                let sum = crate::grid::add(&a.to_int(), &b.to_int()).unwrap();
                let lhs = window_sums(&sum, w).unwrap();
                let rhs = crate::grid::add(&rectangular_scan(&a, w).unwrap(), &rectangular_scan(&b, w).unwrap()).unwrap();
                prop_assert_eq!(lhs, rhs);
                prop_assert_eq!(chi(&sum, w), crate::grid::add(&chi(&a, w), &chi(&b, w)).unwrap());

                let b_only = BinaryGrid::from_fn(a.rows(), a.cols(), |i, j| b.is_one(i, j) && !a.is_one(i, j)).unwrap();
                let union = a.disjoint_union(&b_only).unwrap().unwrap();
                let lhs = rectangular_scan(&union, w).unwrap();
                let rhs = crate::grid::add(&rectangular_scan(&a, w).unwrap(), &rectangular_scan(&b_only, w).unwrap()).unwrap();
                prop_assert_eq!(lhs, rhs);
            }

            #[test]
            fn scan_cells_within_window_area((g, _, w) in instance()) {
                let s = rectangular_scan(&g, w).unwrap();
                prop_assert!(s.cells().iter().all(|&v| (0..=w.area()).contains(&v)));
                prop_assert!(chi(&g, w).cells().iter().all(|&v| (-2..=2).contains(&v)));
            }
        }
    }
}
