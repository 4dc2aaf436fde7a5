//! Command-line front end: matrix files and the `rectscan` verbs.
//!
//! Commands are pure functions from arguments and input text to an
//! [`Output`], so they can be driven in-process by tests.

use std::io::Read;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use rectscan::decompose::decompose;
use rectscan::general::{verify, ReconstructOptions, ReconstructionOutcome};
use rectscan::grid::{BinaryGrid, Grid, IntGrid, WindowSpec};
use rectscan::oracle::{
    generate, oracle_preimages_with_limit, Family, InstanceSpec, PREIMAGE_CELL_CEILING,
    PREIMAGE_CELL_LIMIT,
};
use rectscan::scan::{chi, chi11_of_scan, is_smooth, rectangular_scan};
use rectscan::solver::SolverRegistry;
use rectscan::stats::Stats;
use rectscan::valuation::{enumerate_minimal, valuation_targets};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_INTERNAL: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Core(#[from] rectscan::Error),
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(rectscan::Error::Internal(_)) => EXIT_INTERNAL,
            _ => EXIT_INPUT,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Output {
    pub stdout: String,
    pub stderr: String,
    pub code: i32,
}

impl Output {
    fn ok(stdout: String) -> Self {
        Output {
            stdout,
            stderr: String::new(),
            code: EXIT_OK,
        }
    }

    fn error(e: &CliError) -> Self {
        Output {
            stdout: String::new(),
            stderr: format!("error: {e}\n"),
            code: e.exit_code(),
        }
    }
}

/// Parses a matrix file: a header `m n`, then `m` rows of `n` integers.
/// Lines starting with `#` and blank lines are skipped.
pub fn parse_matrix(text: &str) -> Result<IntGrid, CliError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let (hline, header) = lines.next().ok_or(CliError::Parse {
        line: 1,
        msg: "missing header".into(),
    })?;
    let dims = parse_ints(hline, header)?;
    let [m, n] = dims[..] else {
        return Err(CliError::Parse {
            line: hline,
            msg: "header must be 'm n'".into(),
        });
    };
    if m < 0 || n < 0 {
        return Err(CliError::Parse {
            line: hline,
            msg: "negative dimension".into(),
        });
    }
    let (m, n) = (m as usize, n as usize);
    let mut rows = Vec::with_capacity(m);
    for (line, l) in lines.by_ref() {
        if rows.len() == m {
            return Err(CliError::Parse {
                line,
                msg: format!("more than {m} rows"),
            });
        }
        let row = parse_ints(line, l)?;
        if row.len() != n {
            return Err(CliError::Parse {
                line,
                msg: format!("expected {n} values, found {}", row.len()),
            });
        }
        rows.push(row);
    }
    if rows.len() != m {
        return Err(CliError::Parse {
            line: text.lines().count().max(1),
            msg: format!("expected {m} rows, found {}", rows.len()),
        });
    }
    if m == 0 || n == 0 {
        return Err(CliError::Core(rectscan::Error::EmptyGrid {
            rows: m,
            cols: n,
        }));
    }
    Ok(IntGrid::from_rows(rows)?)
}

fn parse_ints(line: usize, s: &str) -> Result<Vec<i32>, CliError> {
    s.split_whitespace()
        .map(|t| {
            t.parse::<i32>().map_err(|_| CliError::Parse {
                line,
                msg: format!("not an integer: '{t}'"),
            })
        })
        .collect()
}

pub fn parse_binary(text: &str) -> Result<BinaryGrid, CliError> {
    Ok(BinaryGrid::from_int(&parse_matrix(text)?)?)
}

/// Header line and rows, `\n`-terminated. Empty grids print the header only.
pub fn format_matrix<T: Copy + Default + std::fmt::Display>(g: &Grid<T>) -> String {
    let mut s = format!("{} {}\n", g.rows(), g.cols());
    for i in 1..=g.rows() {
        let row: Vec<String> = g.row(i).iter().map(|v| v.to_string()).collect();
        s.push_str(&row.join(" "));
        s.push('\n');
    }
    s
}

pub fn format_binary(g: &BinaryGrid) -> String {
    format_matrix(&g.to_int())
}

#[derive(Debug, Parser)]
#[command(
    name = "rectscan",
    version,
    about = "Rectangular scans of binary matrices and their reconstruction"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Window {
    /// Window height
    #[arg(short = 'p', default_value_t = 1)]
    pub p: usize,
    /// Window width
    #[arg(short = 'q', default_value_t = 1)]
    pub q: usize,
}

impl Window {
    fn spec(&self) -> Result<WindowSpec, CliError> {
        Ok(WindowSpec::new(self.p, self.q)?)
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the scan of a binary matrix
    Scan {
        /// Matrix file, or '-' for stdin
        input: PathBuf,
        #[command(flatten)]
        window: Window,
    },
    /// Reconstruct a binary matrix from a scan
    Reconstruct {
        input: PathBuf,
        #[command(flatten)]
        window: Window,
        /// Strategy name; see `rectscan solvers`
        #[arg(long, default_value = "general")]
        solver: String,
        /// Append operation counters as '#' comments
        #[arg(long)]
        stats: bool,
        /// Cross-check the outcome (oracle on failure, when small enough)
        #[arg(long)]
        all_checks: bool,
        /// Shuffle valuation order using --seed
        #[arg(long, requires = "seed")]
        seed_order: bool,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Report the (1,1)-difference of a scan and its decompositions if smooth
    Check {
        input: PathBuf,
        #[command(flatten)]
        window: Window,
    },
    /// Generate a random binary matrix
    Gen {
        #[arg(short = 'm')]
        m: usize,
        #[arg(short = 'n')]
        n: usize,
        #[command(flatten)]
        window: Window,
        #[arg(long, default_value = "general")]
        family: String,
        #[arg(long, default_value_t = 0.5)]
        density: f64,
        #[arg(long)]
        seed: u64,
    },
    /// Enumerate all preimages of a scan by exhaustive search
    Oracle {
        input: PathBuf,
        #[command(flatten)]
        window: Window,
        /// Preimage size guard override (capped)
        #[arg(long, default_value_t = PREIMAGE_CELL_LIMIT)]
        max_cells: usize,
        /// Stop after this many preimages
        #[arg(long)]
        cap: Option<usize>,
    },
    /// Print the minimal valuations of every subgrid of a scan
    Valuations {
        input: PathBuf,
        #[command(flatten)]
        window: Window,
    },
    /// List the available reconstruction strategies
    Solvers,
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, stdin: &mut dyn Read) -> Output
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => execute(cli.command, stdin),
        Err(e) => {
            let text = e.render().to_string();
            let code = e.exit_code();
            if code == 0 {
                Output::ok(text)
            } else {
                Output {
                    stdout: String::new(),
                    stderr: text,
                    code: EXIT_INPUT,
                }
            }
        }
    }
}

pub fn execute(cmd: Command, stdin: &mut dyn Read) -> Output {
    let res = match cmd {
        Command::Scan { input, window } => {
            read_input(&input, stdin).and_then(|t| cmd_scan(&t, &window))
        }
        Command::Reconstruct {
            input,
            window,
            solver,
            stats,
            all_checks,
            seed_order,
            seed,
        } => read_input(&input, stdin).and_then(|t| {
            let opts = ReconstructOptions {
                valuation_order_seed: if seed_order { seed } else { None },
            };
            cmd_reconstruct(&t, &window, &solver, stats, all_checks, &opts)
        }),
        Command::Check { input, window } => {
            read_input(&input, stdin).and_then(|t| cmd_check(&t, &window))
        }
        Command::Gen {
            m,
            n,
            window,
            family,
            density,
            seed,
        } => cmd_gen(m, n, &window, &family, density, seed),
        Command::Oracle {
            input,
            window,
            max_cells,
            cap,
        } => read_input(&input, stdin).and_then(|t| cmd_oracle(&t, &window, max_cells, cap)),
        Command::Valuations { input, window } => {
            read_input(&input, stdin).and_then(|t| cmd_valuations(&t, &window))
        }
        Command::Solvers => Ok(cmd_solvers()),
    };
    res.unwrap_or_else(|e| Output::error(&e))
}

fn read_input(path: &PathBuf, stdin: &mut dyn Read) -> Result<String, CliError> {
    let mut s = String::new();
    let res = if path.as_os_str() == "-" {
        stdin.read_to_string(&mut s).map(|_| ())
    } else {
        std::fs::read_to_string(path).map(|t| s = t)
    };
    res.map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })?;
    Ok(s)
}

pub fn cmd_scan(text: &str, window: &Window) -> Result<Output, CliError> {
    let m = parse_binary(text)?;
    let a = rectangular_scan(&m, window.spec()?)?;
    Ok(Output::ok(format_matrix(&a)))
}

pub fn cmd_reconstruct(
    text: &str,
    window: &Window,
    solver: &str,
    with_stats: bool,
    all_checks: bool,
    opts: &ReconstructOptions,
) -> Result<Output, CliError> {
    let a = parse_matrix(text)?;
    let w = window.spec()?;
    let registry = SolverRegistry::with_builtins();
    let solver = registry.get(solver)?;
    let mut stats = Stats::default();
    let outcome = solver.reconstruct(&a, w, opts, &mut stats)?;
    let mut out = match &outcome {
        ReconstructionOutcome::Solution(m) => {
            if !verify(&a, m, w) {
                return Err(
                    rectscan::Error::Internal("solution does not re-scan to the input").into(),
                );
            }
            Output::ok(format_binary(m))
        }
        ReconstructionOutcome::Failure(d) => Output {
            stdout: "FAILURE\n".into(),
            stderr: format!("no preimage found (stage: {})\n", d.stage.name()),
            code: EXIT_FAILURE,
        },
    };
    if all_checks {
        out.stdout.push_str(&all_checks_report(&a, w, &outcome)?);
    }
    if with_stats {
        for (name, v) in stats.fields() {
            out.stdout.push_str(&format!("# {name} {v}\n"));
        }
    }
    Ok(out)
}

fn all_checks_report(
    a: &IntGrid,
    w: WindowSpec,
    outcome: &ReconstructionOutcome,
) -> Result<String, CliError> {
    let mut s = String::new();
    match outcome {
        ReconstructionOutcome::Solution(m) => {
            if chi11_of_scan(a) != chi(m, w) {
                return Err(
                    rectscan::Error::Internal("difference identity fails on the solution").into(),
                );
            }
            s.push_str("# check rescan ok\n# check difference ok\n");
        }
        ReconstructionOutcome::Failure(_) => {
            let (m, n) = w.preimage_dims(a.rows(), a.cols());
            if m * n <= PREIMAGE_CELL_LIMIT {
                if !oracle_preimages_with_limit(a, w, 1, PREIMAGE_CELL_LIMIT)?.is_empty() {
                    return Err(
                        rectscan::Error::Internal("oracle found a preimage after FAILURE").into(),
                    );
                }
                s.push_str("# check oracle confirms no preimage\n");
            } else {
                s.push_str("# check oracle skipped (too large)\n");
            }
        }
    }
    Ok(s)
}

pub fn cmd_check(text: &str, window: &Window) -> Result<Output, CliError> {
    let a = parse_matrix(text)?;
    rectscan::general::validate_scan(&a, window.spec()?)?;
    let d = chi11_of_scan(&a);
    let mut s = String::new();
    s.push_str("# chi11\n");
    s.push_str(&format_matrix(&d));
    let smooth = d.is_zero();
    let vacuous = d.rows() == 0 || d.cols() == 0;
    s.push_str(match (smooth, vacuous) {
        (true, true) => "smooth (vacuous)\n",
        (true, false) => "smooth\n",
        (false, _) => "non-smooth\n",
    });
    if smooth {
        let ds = decompose(&a)?;
        s.push_str(&format!("decompositions {}\n", ds.len()));
        for dec in &ds {
            s.push_str(&format!(
                "t {} rows {} cols {}\n",
                dec.t,
                join(&dec.row_levels),
                join(&dec.col_levels)
            ));
        }
    }
    Ok(Output::ok(s))
}

fn join(v: &[i32]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn cmd_gen(
    m: usize,
    n: usize,
    window: &Window,
    family: &str,
    density: f64,
    seed: u64,
) -> Result<Output, CliError> {
    let family: Family = family.parse()?;
    let g = generate(&InstanceSpec {
        m,
        n,
        window: window.spec()?,
        density,
        seed,
        family,
    })?;
    debug_assert!(family != Family::Smooth || is_smooth(&g, window.spec()?));
    Ok(Output::ok(format_binary(&g)))
}

pub fn cmd_oracle(
    text: &str,
    window: &Window,
    max_cells: usize,
    cap: Option<usize>,
) -> Result<Output, CliError> {
    if max_cells > PREIMAGE_CELL_CEILING {
        return Err(CliError::Usage(format!(
            "--max-cells is capped at {PREIMAGE_CELL_CEILING}"
        )));
    }
    let a = parse_matrix(text)?;
    let w = window.spec()?;
    rectscan::general::validate_scan(&a, w)?;
    let found = oracle_preimages_with_limit(&a, w, cap.unwrap_or(usize::MAX), max_cells)?;
    let mut s = format!("# preimages {}\n", found.len());
    for g in &found {
        s.push_str(&format_binary(g));
    }
    let mut out = Output::ok(s);
    if found.is_empty() {
        out.code = EXIT_FAILURE;
    }
    Ok(out)
}

pub fn cmd_valuations(text: &str, window: &Window) -> Result<Output, CliError> {
    let a = parse_matrix(text)?;
    let w = window.spec()?;
    rectscan::general::validate_scan(&a, w)?;
    let mut s = String::new();
    for (sref, target) in valuation_targets(&a, w) {
        let vals = enumerate_minimal(&target, &sref);
        s.push_str(&format!(
            "# subgrid {} {} valuations {}\n",
            sref.a,
            sref.b,
            vals.len()
        ));
        s.push_str("# target\n");
        s.push_str(&format_matrix(&target));
        for (k, v) in vals.iter().enumerate() {
            s.push_str(&format!("# valuation {}\n", k + 1));
            s.push_str(&format_binary(&v.subgrid()));
        }
    }
    Ok(Output::ok(s))
}

pub fn cmd_solvers() -> Output {
    let r = SolverRegistry::with_builtins();
    let mut s = String::new();
    for solver in r.iter() {
        s.push_str(&format!("{:<15} {}\n", solver.name(), solver.description()));
    }
    Output::ok(s)
}
