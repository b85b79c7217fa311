//! `pdfem` command line: single solves, convergence studies and the
//! built-in verification suite.
//!
//! Exit codes: 0 success, 1 failed verification, 2 bad configuration,
//! 3 solver failure, 4 I/O failure.

use std::ffi::OsString;
use std::fmt;
use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use pdfem::analysis::{
    conservation_residual, error_norms, export_vtk, max_abs_nodal, nodal_points, nodal_range, write_csv,
    ConvergenceTable,
};
use pdfem::assembly::Variant;
use pdfem::linsolve::Backend;
use pdfem::mesh::Diagonal;
use pdfem::problems::{by_name, ExampleCase};
use pdfem::verify::{run_suite, QuadratureProvider, StandardQuadrature, CHECKS};
use pdfem::{solve_case, MixedSolution, SolveOptions, Vec2};

pub const EXIT_VERIFY: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;
pub const EXIT_IO: i32 = 4;

/// Overrides the default output directory when `--out` is absent.
pub const OUT_DIR_ENV: &str = "PDFEM_OUT_DIR";
pub const DEFAULT_OUT_DIR: &str = "pdfem-out";

#[derive(Debug, Parser)]
#[command(name = "pdfem", version, about = "Primal-dual mixed FEM for advection-diffusion")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve once on the finest level; writes VTK and prints a summary line.
    Run(RunArgs),
    /// Solve on every level; writes a CSV error table and one VTK per level.
    Convergence(RunArgs),
    /// Run the property suite; exit 0 iff every check passes.
    Verify,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// ex1, ex2, ex3, ex4 or poly.
    #[arg(long, default_value = "ex1")]
    pub example: String,
    /// Diffusion coefficient for ex1 and ex4.
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Layer width for ex3.
    #[arg(long)]
    pub delta: Option<f64>,
    /// Polynomial order k (1 or 2).
    #[arg(long, default_value_t = 1)]
    pub order: usize,
    /// Comma-separated cells per unit length, each twice the previous.
    #[arg(long, value_delimiter = ',')]
    pub levels: Vec<usize>,
    /// standard, weak-bc or weighted.
    #[arg(long, default_value = "standard")]
    pub variant: String,
    /// Weak boundary penalty.
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Exponent of the weight function.
    #[arg(long)]
    pub p: Option<f64>,
    /// Quadrature degree for assembly and error integrals.
    #[arg(long)]
    pub quad_degree: Option<usize>,
    /// Triangulation pattern: right, left or alternating.
    #[arg(long)]
    pub diagonal: Option<String>,
    /// Linear solver: lu or penalty. Chosen by size if absent.
    #[arg(long)]
    pub solver: Option<String>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Sequential assembly and factorization.
    #[arg(long)]
    pub deterministic: bool,
    /// Worker thread cap.
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Solver(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Solver(_) => EXIT_SOLVER,
            CliError::Io(_) => EXIT_IO,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) | CliError::Solver(m) | CliError::Io(m) => f.write_str(m),
        }
    }
}

impl From<pdfem::Error> for CliError {
    fn from(e: pdfem::Error) -> Self {
        if e.is_configuration() {
            CliError::Config(e.to_string())
        } else if matches!(e, pdfem::Error::Io { .. }) {
            CliError::Io(e.to_string())
        } else {
            CliError::Solver(e.to_string())
        }
    }
}

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

/// Validated settings shared by `run` and `convergence`.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub case: ExampleCase,
    pub order: usize,
    pub levels: Vec<usize>,
    pub solve: SolveOptions,
    pub quad_degree: Option<usize>,
    pub out_dir: PathBuf,
    /// File name stem, e.g. `ex1_eps0.01_weighted_k1`.
    pub tag: String,
}

impl RunConfig {
    pub fn from_args(args: &RunArgs, default_levels: &[usize]) -> Result<Self, CliError> {
        if !(1..=2).contains(&args.order) {
            return Err(CliError::Config(format!("order must be 1 or 2, got {}", args.order)));
        }
        let levels = if args.levels.is_empty() { default_levels.to_vec() } else { args.levels.clone() };
        check_levels(&levels)?;
        let variant = Variant::parse(&args.variant)?;
        let mut case = by_name(&args.example, args.epsilon, args.delta, args.order)?.with_variant(variant)?;
        if let Some(g) = args.gamma {
            case.problem.gamma = g;
        }
        if let Some(p) = args.p {
            case.problem.p_exp = p;
        }
        if let Some(d) = &args.diagonal {
            case = case.with_diagonal(Diagonal::parse(d)?);
        }
        let mut solve = SolveOptions::order(args.order);
        solve.assembly.quad_degree = args.quad_degree;
        solve.deterministic = args.deterministic;
        solve.backend = args.solver.as_deref().map(Backend::parse).transpose()?;
        let out_dir = args
            .out
            .clone()
            .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR));
        let mut tag = case.id.clone();
        if let Some(e) = case.params.epsilon.filter(|_| args.epsilon.is_some()) {
            tag.push_str(&format!("_eps{e}"));
        }
        if let Some(d) = case.params.delta.filter(|_| args.delta.is_some()) {
            tag.push_str(&format!("_delta{d}"));
        }
        tag.push_str(&format!("_{}_k{}", variant.name(), args.order));
        Ok(RunConfig { case, order: args.order, levels, solve, quad_degree: args.quad_degree, out_dir, tag })
    }

    fn prepare_out_dir(&self) -> Result<(), CliError> {
        std::fs::create_dir_all(&self.out_dir).map_err(|e| io_err(&self.out_dir, e))
    }

    fn vtk_path(&self, n: usize) -> PathBuf {
        self.out_dir.join(format!("{}_n{n}.vtk", self.tag))
    }
}

/// Levels must be positive and double at each step.
pub fn check_levels(levels: &[usize]) -> Result<(), CliError> {
    if levels.is_empty() || levels.contains(&0) {
        return Err(CliError::Config("levels must be a non-empty list of positive integers".into()));
    }
    if let Some(w) = levels.windows(2).find(|w| w[1] != 2 * w[0]) {
        return Err(CliError::Config(format!("level {} must be twice {}", w[1], w[0])));
    }
    Ok(())
}

/// Nodes inside the layer region of the case, if it has one. Oscillation
/// bounds are reported away from it.
pub fn layer_band(case: &ExampleCase, n: usize) -> Option<Box<dyn Fn(Vec2) -> bool>> {
    let band = 3.0 / n as f64;
    match case.id.as_str() {
        "ex1" => Some(Box::new(move |x: Vec2| x[0] > 1.0 - band || x[1] > 1.0 - band)),
        "ex3" => Some(Box::new(|x: Vec2| {
            let rho = (x[0] * x[0] + (x[1] + 1.0) * (x[1] + 1.0)).sqrt();
            rho > 1.4 && rho < 1.6
        })),
        _ => None,
    }
}

/// Extremes of one solution, as printed by `run`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunSummary {
    pub n: usize,
    pub n_dofs: usize,
    pub min_u: f64,
    pub max_u: f64,
    pub max_abs_u: f64,
    /// Largest nodal `|u*|`, when the case has an exact solution.
    pub max_abs_exact: Option<f64>,
    /// Largest `|u_h|` outside the layer band.
    pub max_abs_outside_layer: Option<f64>,
    pub conservation: f64,
}

impl RunSummary {
    pub fn new(sol: &MixedSolution, case: &ExampleCase, n: usize) -> Result<Self, CliError> {
        let (min_u, max_u) = nodal_range(&sol.u);
        let max_abs_exact = case.exact.as_ref().map(|ex| {
            nodal_points(sol.u.space()).into_iter().fold(0.0f64, |m, x| m.max((ex.u)(x).abs()))
        });
        let max_abs_outside_layer = layer_band(case, n).map(|inside| max_abs_nodal(&sol.u, |x| !inside(x)));
        Ok(RunSummary {
            n,
            n_dofs: sol.stats.n_dofs,
            min_u,
            max_u,
            max_abs_u: min_u.abs().max(max_u.abs()),
            max_abs_exact,
            max_abs_outside_layer,
            conservation: conservation_residual(sol, &case.problem)?.relative(),
        })
    }

    /// `max|u_h| / max|u*|`
    pub fn overshoot(&self) -> Option<f64> {
        self.max_abs_exact.map(|m| self.max_abs_u / m)
    }

    /// Same ratio restricted to nodes outside the layer band.
    pub fn overshoot_outside_layer(&self) -> Option<f64> {
        Some(self.max_abs_outside_layer? / self.max_abs_exact?)
    }
}

impl fmt::Display for RunSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "n={} dofs={} min_u={:.6e} max_u={:.6e} max_abs_u={:.6e}",
            self.n, self.n_dofs, self.min_u, self.max_u, self.max_abs_u
        )?;
        if let (Some(m), Some(r)) = (self.max_abs_exact, self.overshoot()) {
            write!(f, " max_abs_exact={m:.6e} overshoot={r:.4}")?;
        }
        if let Some(m) = self.max_abs_outside_layer {
            write!(f, " max_abs_u_outside_layer={m:.6e}")?;
            if let Some(r) = self.overshoot_outside_layer() {
                write!(f, " overshoot_outside_layer={r:.4}")?;
            }
        }
        write!(f, " conservation={:.2e}", self.conservation)
    }
}

struct RuntimeLog {
    file: File,
    path: PathBuf,
}

impl RuntimeLog {
    fn create(cfg: &RunConfig, what: &str) -> Result<Self, CliError> {
        let path = cfg.out_dir.join(format!("{}_{what}.log", cfg.tag));
        let file = File::create(&path).map_err(|e| io_err(&path, e))?;
        Ok(RuntimeLog { file, path })
    }

    fn line(&mut self, s: &str) -> Result<(), CliError> {
        eprintln!("{s}");
        writeln!(self.file, "{s}").map_err(|e| io_err(&self.path, e))
    }
}

fn solve_logged(cfg: &RunConfig, n: usize, log: &mut RuntimeLog) -> Result<MixedSolution, CliError> {
    let sol = solve_case(&cfg.case, n, &cfg.solve)?;
    let s = &sol.stats;
    log.line(&format!(
        "n={n} cells={} dofs={} free={} solver={} iterations={} residual={:.2e} assembly={:.3}s solve={:.3}s",
        s.n_cells,
        s.n_dofs,
        s.n_free,
        s.backend.name(),
        s.iterations,
        s.residual,
        s.assembly_secs,
        s.solve_secs
    ))?;
    Ok(sol)
}

/// Single solve on the finest level.
pub fn cmd_run(cfg: &RunConfig) -> Result<RunSummary, CliError> {
    cfg.prepare_out_dir()?;
    let mut log = RuntimeLog::create(cfg, "run")?;
    let n = *cfg.levels.last().expect("levels checked non-empty");
    let t = Instant::now();
    let sol = solve_logged(cfg, n, &mut log)?;
    let path = cfg.vtk_path(n);
    export_vtk(&sol, &path)?;
    let summary = RunSummary::new(&sol, &cfg.case, n)?;
    log.line(&format!("wrote {} total={:.3}s", path.display(), t.elapsed().as_secs_f64()))?;
    println!("{} {summary}", cfg.tag);
    Ok(summary)
}

/// Convergence study over all levels.
pub fn cmd_convergence(cfg: &RunConfig) -> Result<ConvergenceTable, CliError> {
    cfg.prepare_out_dir()?;
    let mut log = RuntimeLog::create(cfg, "convergence")?;
    let mut table = ConvergenceTable::default();
    for &n in &cfg.levels {
        let sol = solve_logged(cfg, n, &mut log)?;
        let t = Instant::now();
        let report = error_norms(&sol, &cfg.case, cfg.quad_degree)?;
        let cons = conservation_residual(&sol, &cfg.case.problem)?.relative();
        let path = cfg.vtk_path(n);
        export_vtk(&sol, &path)?;
        log.line(&format!("n={n} errors+output={:.3}s conservation={cons:.2e}", t.elapsed().as_secs_f64()))?;
        table.push(1.0 / n as f64, report)?;
    }
    let csv = cfg.out_dir.join(format!("{}_convergence.csv", cfg.tag));
    write_csv(&table, &csv)?;
    log.line(&format!("wrote {}", csv.display()))?;
    print!("{}", table.to_csv());
    Ok(table)
}

/// Runs the suite against `q` and prints one line per check.
pub fn cmd_verify(q: &dyn QuadratureProvider) -> i32 {
    println!("checks: {}", CHECKS.join(", "));
    let results = run_suite(q);
    for r in &results {
        println!("{} {}: {}", if r.passed { "PASS" } else { "FAIL" }, r.name, r.detail);
    }
    if results.iter().all(|r| r.passed) {
        0
    } else {
        EXIT_VERIFY
    }
}

fn apply_threads(args: &RunArgs) -> Result<(), CliError> {
    match args.threads {
        Some(n) => Ok(pdfem::limit_threads(n)?),
        None => Ok(()),
    }
}

/// Parses `argv` and runs the command; returns the process exit code.
pub fn main_with<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { 0 };
        }
    };
    let result = match &cli.command {
        Command::Verify => return cmd_verify(&StandardQuadrature),
        Command::Run(a) => apply_threads(a)
            .and_then(|_| RunConfig::from_args(a, &[64]))
            .and_then(|c| cmd_run(&c).map(|_| ())),
        Command::Convergence(a) => apply_threads(a)
            .and_then(|_| RunConfig::from_args(a, &[32, 64, 128]))
            .and_then(|c| cmd_convergence(&c).map(|_| ())),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
