//! Named reconstruction strategies selectable at runtime.

use crate::error::{Error, Result};
use crate::general::{
    reconstruct_symbolic_merge, reconstruct_with, validate_scan, verify, Diagnostics, FailureStage,
    ReconstructOptions, ReconstructionOutcome,
};
use crate::grid::{IntGrid, WindowSpec};
use crate::oracle::{oracle_preimages_with_limit, PREIMAGE_CELL_LIMIT};
use crate::smooth::rec_smooth_counted;
use crate::stats::Stats;

pub trait Reconstructor {
    fn name(&self) -> &'static str;
    fn description(&self) -> &'static str;
    fn reconstruct(
        &self,
        a: &IntGrid,
        w: WindowSpec,
        opts: &ReconstructOptions,
        stats: &mut Stats,
    ) -> Result<ReconstructionOutcome>;
}

pub struct General;

impl Reconstructor for General {
    fn name(&self) -> &'static str {
        "general"
    }

    fn description(&self) -> &'static str {
        "minimal valuations plus exact smooth completion (default)"
    }

    fn reconstruct(
        &self,
        a: &IntGrid,
        w: WindowSpec,
        opts: &ReconstructOptions,
        stats: &mut Stats,
    ) -> Result<ReconstructionOutcome> {
        reconstruct_with(a, w, opts, stats)
    }
}

pub struct SymbolicMerge;

impl Reconstructor for SymbolicMerge {
    fn name(&self) -> &'static str {
        "symbolic-merge"
    }

    fn description(&self) -> &'static str {
        "minimal valuations merged cell by cell with symbolic smooth grids"
    }

    fn reconstruct(
        &self,
        a: &IntGrid,
        w: WindowSpec,
        opts: &ReconstructOptions,
        stats: &mut Stats,
    ) -> Result<ReconstructionOutcome> {
        reconstruct_symbolic_merge(a, w, opts, stats)
    }
}

/// Smooth scans only; anything else is an input error.
pub struct SmoothOnly;

impl Reconstructor for SmoothOnly {
    fn name(&self) -> &'static str {
        "smooth"
    }

    fn description(&self) -> &'static str {
        "smooth scans only, via row/column decomposition and window templates"
    }

    fn reconstruct(
        &self,
        a: &IntGrid,
        w: WindowSpec,
        _opts: &ReconstructOptions,
        stats: &mut Stats,
    ) -> Result<ReconstructionOutcome> {
        validate_scan(a, w)?;
        match rec_smooth_counted(a, w, stats) {
            Ok(m) => Ok(ReconstructionOutcome::Solution(m)),
            Err(Error::Infeasible(_)) => Ok(ReconstructionOutcome::Failure(Diagnostics {
                stage: FailureStage::Completion,
                stats: *stats,
            })),
            Err(e) => Err(e),
        }
    }
}

/// Exhaustive search, size-guarded.
pub struct Oracle {
    pub cell_limit: usize,
}

impl Default for Oracle {
    fn default() -> Self {
        Oracle {
            cell_limit: PREIMAGE_CELL_LIMIT,
        }
    }
}

impl Reconstructor for Oracle {
    fn name(&self) -> &'static str {
        "oracle"
    }

    fn description(&self) -> &'static str {
        "exhaustive search over all binary matrices (tiny instances)"
    }

    fn reconstruct(
        &self,
        a: &IntGrid,
        w: WindowSpec,
        _opts: &ReconstructOptions,
        stats: &mut Stats,
    ) -> Result<ReconstructionOutcome> {
        validate_scan(a, w)?;
        let found = oracle_preimages_with_limit(a, w, 1, self.cell_limit)?;
        match found.into_iter().next() {
            Some(m) => {
                debug_assert!(verify(a, &m, w));
                Ok(ReconstructionOutcome::Solution(m))
            }
            None => Ok(ReconstructionOutcome::Failure(Diagnostics {
                stage: FailureStage::Completion,
                stats: *stats,
            })),
        }
    }
}

pub struct SolverRegistry {
    solvers: Vec<Box<dyn Reconstructor>>,
}

impl SolverRegistry {
    pub fn empty() -> Self {
        SolverRegistry {
            solvers: Vec::new(),
        }
    }

    pub fn with_builtins() -> Self {
        let mut r = Self::empty();
        r.register(Box::new(General));
        r.register(Box::new(SymbolicMerge));
        r.register(Box::new(SmoothOnly));
        r.register(Box::new(Oracle::default()));
        r
    }

    /// Adds a solver, replacing any existing one of the same name.
    pub fn register(&mut self, solver: Box<dyn Reconstructor>) {
        match self.solvers.iter().position(|s| s.name() == solver.name()) {
            Some(i) => self.solvers[i] = solver,
            None => self.solvers.push(solver),
        }
    }

    pub fn get(&self, name: &str) -> Result<&dyn Reconstructor> {
        self.solvers
            .iter()
            .find(|s| s.name() == name)
            .map(|s| s.as_ref())
            .ok_or_else(|| Error::UnknownSolver(name.to_string()))
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.solvers.iter().map(|s| s.name()).collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = &dyn Reconstructor> {
        self.solvers.iter().map(|s| s.as_ref())
    }
}

impl Default for SolverRegistry {
    fn default() -> Self {
        Self::with_builtins()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::BinaryGrid;
    use crate::scan::rectangular_scan;

    fn w(p: usize, q: usize) -> WindowSpec {
        WindowSpec::new(p, q).unwrap()
    }

    #[test]
    fn builtins_are_listed_in_order() {
        let r = SolverRegistry::with_builtins();
        assert_eq!(
            r.names(),
            vec!["general", "symbolic-merge", "smooth", "oracle"]
        );
        assert!(matches!(r.get("nope"), Err(Error::UnknownSolver(n)) if n == "nope"));
    }

    #[test]
    fn register_replaces_by_name() {
        let mut r = SolverRegistry::with_builtins();
        r.register(Box::new(Oracle { cell_limit: 4 }));
        assert_eq!(r.names().len(), 4);
        let a = IntGrid::from_rows(vec![vec![1, 1], vec![1, 1]]).unwrap();
        let mut st = Stats::default();
        let res = r.get("oracle").unwrap().reconstruct(
            &a,
            w(2, 2),
            &ReconstructOptions::default(),
            &mut st,
        );
        assert!(matches!(res, Err(Error::SizeGuard { .. })));
    }

    #[test]
    fn every_builtin_round_trips_a_smooth_scan() {
        let m = BinaryGrid::from_rows(vec![
            vec![1, 0, 1, 0],
            vec![0, 0, 0, 0],
            vec![1, 0, 1, 0],
            vec![1, 1, 1, 1],
        ])
        .unwrap();
        let win = w(2, 2);
        let a = rectangular_scan(&m, win).unwrap();
        let r = SolverRegistry::with_builtins();
        for s in r.iter() {
            let mut st = Stats::default();
            let out = s
                .reconstruct(&a, win, &ReconstructOptions::default(), &mut st)
                .unwrap();
            let sol = out
                .solution()
                .unwrap_or_else(|| panic!("{} failed", s.name()));
            assert!(verify(&a, sol, win), "{}", s.name());
        }
    }

    #[test]
    fn smooth_solver_rejects_non_smooth_scans() {
        let a = IntGrid::from_rows(vec![vec![1, 0], vec![0, 1]]).unwrap();
        let mut st = Stats::default();
        let res = SmoothOnly.reconstruct(&a, w(1, 1), &ReconstructOptions::default(), &mut st);
        assert!(res.is_err());
    }

    #[test]
    fn out_of_range_is_an_error_for_every_solver() {
        let a = IntGrid::from_rows(vec![vec![5]]).unwrap();
        for s in SolverRegistry::with_builtins().iter() {
            let res = s.reconstruct(
                &a,
                w(2, 2),
                &ReconstructOptions::default(),
                &mut Stats::default(),
            );
            assert!(
                matches!(res, Err(Error::ScanOutOfRange { .. })),
                "{}",
                s.name()
            );
        }
    }
}
