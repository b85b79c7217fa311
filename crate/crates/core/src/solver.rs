use std::sync::Arc;
use std::time::Instant;

use crate::assembly::{assemble_system, AssemblyOptions, BlockSystem, MixedSpaces, ProblemSpec};
use crate::error::{Error, Result};
use crate::linsolve::{factorize, factorize_saddle, Backend, SolveReport};
use crate::mesh::Mesh;
use crate::problems::ExampleCase;
use crate::spaces::FieldCoeffs;

/// Reduced systems up to this size use LU when no backend is requested.
pub const AUTO_LU_LIMIT: usize = 150_000;

/// Settings for a single solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SolveOptions {
    pub order: usize,
    pub assembly: AssemblyOptions,
    /// Sequential assembly and factorization, bit-reproducible.
    pub deterministic: bool,
    /// `None` picks LU up to [`AUTO_LU_LIMIT`] unknowns and the
    /// iterated-penalty backend above.
    pub backend: Option<Backend>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { order: 1, assembly: AssemblyOptions::default(), deterministic: false, backend: None }
    }
}

impl SolveOptions {
    pub fn order(k: usize) -> Self {
        SolveOptions { order: k, ..Default::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveStats {
    pub n_cells: usize,
    pub n_dofs: usize,
    pub n_free: usize,
    pub assembly_secs: f64,
    pub solve_secs: f64,
    pub residual: f64,
    pub refined: bool,
    pub backend: Backend,
    pub iterations: usize,
}

/// Discrete solution `(u_h, p_h, z_h)`.
#[derive(Debug, Clone)]
pub struct MixedSolution {
    pub spaces: MixedSpaces,
    pub u: FieldCoeffs,
    pub p: FieldCoeffs,
    pub z: FieldCoeffs,
    pub stats: SolveStats,
}

impl MixedSolution {
    pub fn mesh(&self) -> &Arc<Mesh> {
        self.spaces.mesh()
    }

    pub fn order(&self) -> usize {
        self.spaces.order()
    }

    /// Concatenated coefficient vector `[u; p; z]`.
    pub fn coefficients(&self) -> Vec<f64> {
        let mut x = self.u.coeffs.clone();
        x.extend_from_slice(&self.p.coeffs);
        x.extend_from_slice(&self.z.coeffs);
        x
    }
}

/// Outcome of [`solve_system`].
#[derive(Debug, Clone)]
pub struct SystemSolution {
    pub x: Vec<f64>,
    pub report: SolveReport,
    pub backend: Backend,
    pub n_free: usize,
}

/// Eliminates constraints, factorizes and solves; returns the full vector.
pub fn solve_system(system: &BlockSystem, backend: Option<Backend>) -> Result<SystemSolution> {
    let reduced = system.reduce()?;
    let n_free = reduced.free.len();
    let auto = backend.is_none();
    let mut backend = backend.unwrap_or(if n_free <= AUTO_LU_LIMIT { Backend::Lu } else { Backend::IteratedPenalty });
    let factor = match backend {
        Backend::Lu => factorize(&reduced.matrix)?,
        Backend::IteratedPenalty => {
            // Multipliers are never constrained, so they stay the trailing block.
            let n_primal = reduced.free.partition_point(|&i| i < system.offsets[2]);
            match factorize_saddle(&reduced.matrix, n_primal) {
                Err(Error::SingularMatrix { .. }) if auto => {
                    backend = Backend::Lu;
                    factorize(&reduced.matrix)?
                }
                r => r?,
            }
        }
    };
    let (x, report) = factor.solve_with_report(&reduced.rhs)?;
    Ok(SystemSolution { x: system.expand(&reduced, &x), report, backend, n_free })
}

/// Solves `problem` on `mesh` with equal-order spaces.
pub fn solve_problem(mesh: Arc<Mesh>, problem: &ProblemSpec, opts: &SolveOptions) -> Result<MixedSolution> {
    let mut aopts = opts.assembly;
    if opts.deterministic {
        aopts.parallel = false;
        faer::set_global_parallelism(faer::Par::Seq);
    }
    let n_cells = mesh.n_cells();
    let spaces = MixedSpaces::new(mesh, opts.order)?;
    let t0 = Instant::now();
    let system = assemble_system(&spaces, problem, &aopts)?;
    let assembly_secs = t0.elapsed().as_secs_f64();
    let t1 = Instant::now();
    let SystemSolution { x, report, backend, n_free } = solve_system(&system, opts.backend)?;
    let solve_secs = t1.elapsed().as_secs_f64();
    let [_, op, oz, n] = system.offsets;
    drop(system);
    Ok(MixedSolution {
        u: FieldCoeffs::new(spaces.primal.clone(), x[..op].to_vec())?,
        p: FieldCoeffs::new(spaces.flux.clone(), x[op..oz].to_vec())?,
        z: FieldCoeffs::new(spaces.multiplier.clone(), x[oz..n].to_vec())?,
        stats: SolveStats {
            n_cells,
            n_dofs: n,
            n_free,
            assembly_secs,
            solve_secs,
            residual: report.residual,
            refined: report.refined,
            backend,
            iterations: report.iterations,
        },
        spaces,
    })
}

/// Builds the mesh with `h = 1/n`, checks the exact
/// fields of the case and solves.
pub fn solve_case(case: &ExampleCase, n: usize, opts: &SolveOptions) -> Result<MixedSolution> {
    case.verify_exact()?;
    let mesh = Arc::new(case.build_mesh(n)?);
    solve_problem(mesh, &case.problem, opts)
}

/// Caps assembly and factorization at `n` worker threads. Must run before
/// the first parallel call; later calls only affect the factorization.
pub fn limit_threads(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::Configuration("thread count must be positive".into()));
    }
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    faer::set_global_parallelism(if n == 1 { faer::Par::Seq } else { faer::Par::rayon(n) });
    Ok(())
}
