/// Operation counters threaded through the instrumented entry points.
///
/// `cell_ops` counts cell reads and writes on grids; the remaining fields
/// count search events and feed failure diagnostics.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Stats {
    pub cell_ops: u64,
    pub valuations_enumerated: u64,
    pub valuation_candidates: u64,
    pub pruned_candidates: u64,
    pub templates_tried: u64,
    pub symbolic_grids: u64,
    pub merge_conflicts: u64,
}

impl Stats {
    #[inline]
    pub(crate) fn ops(&mut self, n: usize) {
        self.cell_ops += n as u64;
    }

    /// `(name, value)` pairs in a fixed order, for reports.
    pub fn fields(&self) -> [(&'static str, u64); 7] {
        [
            ("cell_ops", self.cell_ops),
            ("valuations_enumerated", self.valuations_enumerated),
            ("valuation_candidates", self.valuation_candidates),
            ("pruned_candidates", self.pruned_candidates),
            ("templates_tried", self.templates_tried),
            ("symbolic_grids", self.symbolic_grids),
            ("merge_conflicts", self.merge_conflicts),
        ]
    }
}
