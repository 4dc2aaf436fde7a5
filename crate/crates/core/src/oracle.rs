//! Exhaustive ground truth at small sizes, and reproducible instance
//! generators.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::grid::{BinaryGrid, IntGrid, WindowSpec};
use crate::scan::{is_smooth, SubgridRef};
use crate::valuation::{chi_of_subgrid, reduce_subgrid, Valuation};

/// Default cell limit for exhaustive preimage search.
pub const PREIMAGE_CELL_LIMIT: usize = 24;
/// Hard ceiling for an overridden limit.
pub const PREIMAGE_CELL_CEILING: usize = 30;
/// Largest subgrid area for exhaustive valuation search.
pub const VALUATION_AREA_LIMIT: usize = 16;

/// Every binary matrix whose scan is `a`, up to `cap` of them, in
/// column-major lexicographic order (0 before 1).
pub fn oracle_preimages(a: &IntGrid, w: WindowSpec, cap: usize) -> Result<Vec<BinaryGrid>> {
    oracle_preimages_with_limit(a, w, cap, PREIMAGE_CELL_LIMIT)
}

/// As [`oracle_preimages`] with a different cell limit, clamped to
/// [`PREIMAGE_CELL_CEILING`].
pub fn oracle_preimages_with_limit(
    a: &IntGrid,
    w: WindowSpec,
    cap: usize,
    limit: usize,
) -> Result<Vec<BinaryGrid>> {
    let (m, n) = w.preimage_dims(a.rows(), a.cols());
    let limit = limit.min(PREIMAGE_CELL_CEILING);
    if m * n > limit {
        return Err(Error::SizeGuard {
            cells: m * n,
            limit,
        });
    }
    let mut s = PreimageSearch {
        a,
        w,
        m,
        n,
        sums: vec![0; a.rows() * a.cols()],
        unset: vec![w.area(); a.rows() * a.cols()],
        cells: vec![0; m * n],
        cap,
        out: Vec::new(),
    };
    if cap > 0 {
        s.run(0);
    }
    Ok(s.out)
}

struct PreimageSearch<'a> {
    a: &'a IntGrid,
    w: WindowSpec,
    m: usize,
    n: usize,
    /// Running sum and unset-cell count per window, row-major over `a`.
    sums: Vec<i32>,
    unset: Vec<i32>,
    cells: Vec<u8>,
    cap: usize,
    out: Vec<BinaryGrid>,
}

impl PreimageSearch<'_> {
    /// Windows covering cell `(i, j)`, 1-based, as index ranges over `a`.
    fn covering(
        &self,
        i: usize,
        j: usize,
    ) -> (
        std::ops::RangeInclusive<usize>,
        std::ops::RangeInclusive<usize>,
    ) {
        let (p, q) = (self.w.p, self.w.q);
        let (sr, sc) = self.a.dims();
        let r0 = i.saturating_sub(p - 1).max(1);
        let c0 = j.saturating_sub(q - 1).max(1);
        (r0..=i.min(sr), c0..=j.min(sc))
    }

    fn place(&mut self, i: usize, j: usize, v: u8) -> bool {
        let (rs, cs) = self.covering(i, j);
        let sc = self.a.cols();
        let mut ok = true;
        for r in rs {
            for c in cs.clone() {
                let k = (r - 1) * sc + c - 1;
                self.sums[k] += v as i32;
                self.unset[k] -= 1;
                let target = self.a.get(r, c);
                if self.sums[k] > target || self.sums[k] + self.unset[k] < target {
                    ok = false;
                }
            }
        }
        ok
    }

    fn unplace(&mut self, i: usize, j: usize, v: u8) {
        let (rs, cs) = self.covering(i, j);
        let sc = self.a.cols();
        for r in rs {
            for c in cs.clone() {
                let k = (r - 1) * sc + c - 1;
                self.sums[k] -= v as i32;
                self.unset[k] += 1;
            }
        }
    }

    fn run(&mut self, pos: usize) -> bool {
        if pos == self.m * self.n {
            let (m, n) = (self.m, self.n);
            let cells = &self.cells;
            self.out.push(
                BinaryGrid::from_fn(m, n, |i, j| cells[(j - 1) * m + i - 1] == 1)
                    .expect("non-empty"),
            );
            return self.out.len() >= self.cap;
        }
        let (i, j) = (pos % self.m + 1, pos / self.m + 1);
        for v in [0u8, 1] {
            self.cells[pos] = v;
            let ok = self.place(i, j, v);
            let done = ok && self.run(pos + 1);
            self.unplace(i, j, v);
            if done {
                return true;
            }
        }
        self.cells[pos] = 0;
        false
    }
}

/// Minimal valuations by exhaustion over every binary subgrid.
pub fn oracle_minimal_valuations(target: &IntGrid, sref: &SubgridRef) -> Result<Vec<Valuation>> {
    let (rows, cols) = (sref.rows(), sref.cols());
    if rows * cols > VALUATION_AREA_LIMIT {
        return Err(Error::SizeGuard {
            cells: rows * cols,
            limit: VALUATION_AREA_LIMIT,
        });
    }
    let degenerate = rows < 2 || cols < 2;
    let mut found = BTreeSet::new();
    for bits in 0u32..1 << (rows * cols) {
        let g = BinaryGrid::from_fn(rows, cols, |i, j| bits >> ((i - 1) * cols + j - 1) & 1 == 1)?;
        if degenerate || chi_of_subgrid(&g) == *target {
            found.insert(reduce_subgrid(&g));
        }
    }
    Ok(found
        .into_iter()
        .map(|g| Valuation::from_subgrid(&g, *sref))
        .collect())
}

/// Structural family of a generated matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    General,
    Smooth,
    RowInvariant,
    ColInvariant,
    Homogeneous,
}

impl Family {
    pub const ALL: [Family; 5] = [
        Family::General,
        Family::Smooth,
        Family::RowInvariant,
        Family::ColInvariant,
        Family::Homogeneous,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::General => "general",
            Family::Smooth => "smooth",
            Family::RowInvariant => "row-invariant",
            Family::ColInvariant => "col-invariant",
            Family::Homogeneous => "homogeneous",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Family::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::InvalidInstance(format!("unknown family '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InstanceSpec {
    pub m: usize,
    pub n: usize,
    pub window: WindowSpec,
    pub density: f64,
    pub seed: u64,
    pub family: Family,
}

/// A reproducible random matrix of the requested family.
pub fn generate(spec: &InstanceSpec) -> Result<BinaryGrid> {
    let InstanceSpec {
        m,
        n,
        window: w,
        density,
        seed,
        family,
    } = *spec;
    if !(0.0..=1.0).contains(&density) {
        return Err(Error::InvalidInstance(format!(
            "density {density} outside [0,1]"
        )));
    }
    if m == 0 || n == 0 {
        return Err(Error::EmptyGrid { rows: m, cols: n });
    }
    w.check_fits(m, n)?;
    let (p, q) = (w.p, w.q);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = match family {
        Family::General => BinaryGrid::from_fn(m, n, |_, _| rng.gen_bool(density))?,
        Family::RowInvariant => row_invariant(m, n, q, density, &mut rng)?,
        Family::ColInvariant => row_invariant(n, m, p, density, &mut rng)?.transpose(),
        Family::Homogeneous => {
            let tile: Vec<bool> = (0..p * q).map(|_| rng.gen_bool(density)).collect();
            BinaryGrid::from_fn(m, n, |i, j| tile[(i - 1) % p * q + (j - 1) % q])?
        }
        Family::Smooth => {
            let cols = row_invariant(n, m, p, density / 2.0, &mut rng)?.transpose();
            let rows = row_invariant(m, n, q, density / 2.0, &mut rng)?;
            // Keep whole row orbits only, so both parts stay invariant.
            let mut g = cols.clone();
            for i in 1..=m {
                for j0 in 1..=q.min(n) {
                    let orbit = (j0..=n).step_by(q);
                    if rows.is_one(i, j0) && orbit.clone().all(|j| !cols.is_one(i, j)) {
                        for j in orbit {
                            g.set(i, j, true);
                        }
                    }
                }
            }
            if !is_smooth(&g, w) {
                return Err(Error::InvalidInstance(
                    "generated matrix is not smooth".into(),
                ));
            }
            g
        }
    };
    Ok(g)
}

/// `(0,period)`-invariant `m x n` matrix.
fn row_invariant(
    m: usize,
    n: usize,
    period: usize,
    density: f64,
    rng: &mut ChaCha8Rng,
) -> Result<BinaryGrid> {
    let seed_cols: Vec<bool> = (0..m * period).map(|_| rng.gen_bool(density)).collect();
    BinaryGrid::from_fn(m, n, |i, j| seed_cols[(i - 1) * period + (j - 1) % period])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use crate::scan::{is_invariant_at, rectangular_scan};
    use crate::valuation::enumerate_minimal;

    fn win(p: usize, q: usize) -> WindowSpec {
        WindowSpec::new(p, q).unwrap()
    }

    fn spec(family: Family, seed: u64) -> InstanceSpec {
        InstanceSpec {
            m: 7,
            n: 9,
            window: win(2, 3),
            density: 0.5,
            seed,
            family,
        }
    }

    #[test]
    fn preimage_examples() {
        for (p, q) in [(1, 1), (2, 2), (2, 3)] {
            let w = win(p, q);
            let full =
                oracle_preimages(&Grid::filled(1, 1, (p * q) as i32), w, usize::MAX).unwrap();
            assert_eq!(full, vec![BinaryGrid::ones(p, q).unwrap()]);
            let single = oracle_preimages(&Grid::filled(1, 1, 1), w, usize::MAX).unwrap();
            assert_eq!(single.len(), p * q);
        }
        let zero = oracle_preimages(&Grid::filled(2, 3, 0), win(2, 2), usize::MAX).unwrap();
        assert_eq!(zero, vec![BinaryGrid::zeros(3, 4).unwrap()]);
    }

    #[test]
    fn preimages_match_plain_enumeration() {
        let w = win(2, 2);
        let mut counts = std::collections::HashMap::new();
        for bits in 0u32..1 << 12 {
            let g =
                BinaryGrid::from_fn(3, 4, |i, j| bits >> ((i - 1) * 4 + j - 1) & 1 == 1).unwrap();
            *counts
                .entry(rectangular_scan(&g, w).unwrap())
                .or_insert(0usize) += 1;
        }
        for (a, count) in counts.iter().take(200) {
            let found = oracle_preimages(a, w, usize::MAX).unwrap();
            assert_eq!(found.len(), *count);
            assert!(found.iter().all(|g| rectangular_scan(g, w).unwrap() == *a));
        }
    }

    #[test]
    fn cap_and_guard() {
        let w = win(2, 2);
        assert_eq!(
            oracle_preimages(&Grid::filled(1, 1, 2), w, 3)
                .unwrap()
                .len(),
            3
        );
        assert!(matches!(
            oracle_preimages(&Grid::filled(4, 5, 0), w, 1),
            Err(Error::SizeGuard {
                cells: 30,
                limit: 24
            })
        ));
        assert_eq!(
            oracle_preimages_with_limit(&Grid::filled(4, 5, 0), w, 1, 100)
                .unwrap()
                .len(),
            1
        );
        assert!(matches!(
            oracle_preimages_with_limit(&Grid::filled(5, 5, 0), w, 1, 100),
            Err(Error::SizeGuard { limit: 30, .. })
        ));
    }

    #[test]
    fn minimal_valuation_oracle_examples() {
        let s = SubgridRef::new(1, 1, win(1, 1), 3, 3).unwrap();
        let zero = oracle_minimal_valuations(&Grid::filled(2, 2, 0), &s).unwrap();
        assert_eq!(zero.len(), 1);
        let one = Grid::from_rows(vec![vec![0, 0], vec![0, 1]]).unwrap();
        assert_eq!(oracle_minimal_valuations(&one, &s).unwrap().len(), 2);
        let mut got = enumerate_minimal(&one, &s);
        let mut want = oracle_minimal_valuations(&one, &s).unwrap();
        got.sort_by_key(|v| v.subgrid());
        want.sort_by_key(|v| v.subgrid());
        assert_eq!(got, want);
    }

    #[test]
    fn generators_honor_their_family() {
        for seed in 0..20 {
            let w = win(2, 3);
            let g = generate(&spec(Family::RowInvariant, seed)).unwrap();
            assert!(g.iter().all(|(i, j, _)| is_invariant_at(&g, i, j, 0, 3)));
            let g = generate(&spec(Family::ColInvariant, seed)).unwrap();
            assert!(g.iter().all(|(i, j, _)| is_invariant_at(&g, i, j, 2, 0)));
            assert!(is_smooth(
                &generate(&spec(Family::Smooth, seed)).unwrap(),
                w
            ));
            let h = generate(&spec(Family::Homogeneous, seed)).unwrap();
            let s = rectangular_scan(&h, w).unwrap();
            assert!(s.cells().iter().all(|&v| v == s.get(1, 1)));
        }
        let full = generate(&InstanceSpec {
            density: 1.0,
            ..spec(Family::Homogeneous, 3)
        })
        .unwrap();
        assert_eq!(full, BinaryGrid::ones(7, 9).unwrap());
    }

    #[test]
    fn generators_are_deterministic() {
        for f in Family::ALL {
            assert_eq!(
                generate(&spec(f, 11)).unwrap(),
                generate(&spec(f, 11)).unwrap()
            );
            assert_eq!(f.name().parse::<Family>().unwrap(), f);
        }
        assert!(generate(&InstanceSpec {
            density: 1.5,
            ..spec(Family::General, 1)
        })
        .is_err());
    }
}
