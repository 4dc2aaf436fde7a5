use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("dimension mismatch: {left_rows}x{left_cols} vs {right_rows}x{right_cols}")]
    DimensionMismatch {
        left_rows: usize,
        left_cols: usize,
        right_rows: usize,
        right_cols: usize,
    },

    #[error("grid dimensions must be positive, got {rows}x{cols}")]
    EmptyGrid { rows: usize, cols: usize },

    #[error("ragged input: row {row} has {found} cells, expected {expected}")]
    Ragged {
        row: usize,
        found: usize,
        expected: usize,
    },

    #[error("cell ({row},{col}) holds {value}, expected 0 or 1")]
    NotBinary { row: usize, col: usize, value: i32 },

    #[error("window extents must be at least 1, got p={p} q={q}")]
    InvalidWindow { p: usize, q: usize },

    #[error("{p}x{q} window does not fit a {rows}x{cols} grid")]
    WindowTooLarge {
        p: usize,
        q: usize,
        rows: usize,
        cols: usize,
    },

    #[error("subgrid offset ({a},{b}) outside [1,{p}]x[1,{q}]")]
    InvalidSubgrid {
        a: usize,
        b: usize,
        p: usize,
        q: usize,
    },

    #[error("scan cell ({row},{col}) = {value} outside [0,{max}]")]
    ScanOutOfRange {
        row: usize,
        col: usize,
        value: i32,
        max: i32,
    },

    #[error("grid is not smooth for the given window")]
    NotSmooth,

    #[error("scan is not (1,1)-smooth: residual lacks constant columns")]
    NonSmoothScan,

    #[error("scan does not have constant rows")]
    NotRowConstant,

    #[error("scan does not have constant columns")]
    NotColumnConstant,

    #[error("infeasible: {0}")]
    Infeasible(&'static str),

    #[error("subgrid ({a},{b}) admits no valuation")]
    Unrealizable { a: usize, b: usize },

    #[error("instance has {cells} cells, exhaustive search is limited to {limit}")]
    SizeGuard { cells: usize, limit: usize },

    #[error("internal check failed: {0}")]
    Internal(&'static str),

    #[error("unknown solver '{0}'")]
    UnknownSolver(String),

    #[error("invalid instance request: {0}")]
    InvalidInstance(String),
}
