//! The saddle-point system
//!
//! ```text
//! [ S   Bᵀ ] [u; p]   [0]
//! [ B   0  ] [z]    = [F]
//! ```
//!
//! with `S` the stabilizer `½(βu − A∇u − p, βv − A∇v − q)`, the bilinear
//! form of the energy `½‖βv − A∇v − q‖²`, `B` the
//! conservation constraint `(∇·p + μu, x)` and `F = (f, x)`. Unknowns are
//! ordered `u`, then `p`, then `z`.

use std::fmt;
use std::sync::Arc;

use faer::sparse::{SparseColMat, Triplet};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::mesh::{BoundaryTag, Mesh};
use crate::quadrature::{edge_rule, triangle_rule, MAX_TRIANGLE_DEGREE};
use crate::spaces::{face_l2_project, map_gradient, piola, FeSpace, SpaceKind};
use crate::{Mat2, Vec2};

pub type ScalarField = Arc<dyn Fn(Vec2) -> f64 + Send + Sync>;
pub type VectorField = Arc<dyn Fn(Vec2) -> Vec2 + Send + Sync>;
pub type SparseMatrix = SparseColMat<usize, f64>;

/// Boundary treatment and stabilizer weighting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Variant {
    /// Strong Dirichlet conditions, unweighted stabilizer.
    #[default]
    Standard,
    /// Dirichlet conditions imposed weakly on all of ∂Ω.
    WeakBc,
    /// Stabilizer weighted by `η^p`, strong Dirichlet conditions.
    Weighted,
}

impl Variant {
    pub fn name(self) -> &'static str {
        match self {
            Variant::Standard => "standard",
            Variant::WeakBc => "weak-bc",
            Variant::Weighted => "weighted",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "standard" => Ok(Variant::Standard),
            "weak-bc" | "weak_bc" | "weakbc" => Ok(Variant::WeakBc),
            "weighted" => Ok(Variant::Weighted),
            _ => Err(Error::Configuration(format!("unknown variant '{s}'"))),
        }
    }
}

/// Coefficients and data of `∇·(βu − A∇u) + μu = f`.
#[derive(Clone)]
pub struct ProblemSpec {
    pub diffusion: Mat2,
    pub beta: VectorField,
    /// `∇·β`, used by the streamline error.
    pub div_beta: ScalarField,
    pub mu: f64,
    pub source: ScalarField,
    pub dirichlet: Option<ScalarField>,
    /// `ψ` in `(A∇u − βu)·n = ψ`.
    pub neumann: Option<ScalarField>,
    pub variant: Variant,
    pub gamma: f64,
    pub p_exp: f64,
    pub weight: Option<ScalarField>,
}

impl fmt::Debug for ProblemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemSpec")
            .field("diffusion", &self.diffusion)
            .field("mu", &self.mu)
            .field("dirichlet", &self.dirichlet.is_some())
            .field("neumann", &self.neumann.is_some())
            .field("variant", &self.variant)
            .field("gamma", &self.gamma)
            .field("p_exp", &self.p_exp)
            .field("weight", &self.weight.is_some())
            .finish()
    }
}

impl ProblemSpec {
    pub fn new(diffusion: Mat2, beta: VectorField, source: ScalarField) -> Self {
        ProblemSpec {
            diffusion,
            beta,
            div_beta: Arc::new(|_| 0.0),
            mu: 0.0,
            source,
            dirichlet: None,
            neumann: None,
            variant: Variant::Standard,
            gamma: 10.0,
            p_exp: 1.0,
            weight: None,
        }
    }

    pub fn with_mu(mut self, mu: f64) -> Self {
        self.mu = mu;
        self
    }

    pub fn with_div_beta(mut self, d: ScalarField) -> Self {
        self.div_beta = d;
        self
    }

    pub fn with_dirichlet(mut self, g: ScalarField) -> Self {
        self.dirichlet = Some(g);
        self
    }

    pub fn with_neumann(mut self, psi: ScalarField) -> Self {
        self.neumann = Some(psi);
        self
    }

    pub fn with_variant(mut self, v: Variant) -> Self {
        self.variant = v;
        self
    }

    pub fn with_weight(mut self, eta: ScalarField) -> Self {
        self.weight = Some(eta);
        self
    }

    /// Smallest eigenvalue of the diffusion tensor.
    pub fn min_diffusion(&self) -> f64 {
        self.diffusion.symmetric_eigenvalues().min()
    }

    /// Checks the coefficient invariants; the weight conditions `η > 0` and
    /// `β·∇η < 0` are sampled at cell centroids of `mesh`.
    pub fn validate(&self, mesh: &Mesh) -> Result<()> {
        let a = self.diffusion;
        let scale = a.abs().max().max(1.0);
        if (a[(0, 1)] - a[(1, 0)]).abs() > 1e-14 * scale {
            return Err(Error::Configuration("diffusion tensor is not symmetric".into()));
        }
        if self.min_diffusion() < -1e-14 * scale {
            return Err(Error::Configuration("diffusion tensor is not positive semidefinite".into()));
        }
        if !self.mu.is_finite() {
            return Err(Error::Configuration("reaction coefficient is not finite".into()));
        }
        match self.variant {
            Variant::WeakBc if !(self.gamma > 0.0) => {
                return Err(Error::Configuration(format!("gamma must be positive, got {}", self.gamma)));
            }
            Variant::Weighted => {
                if !(self.p_exp > 0.0) {
                    return Err(Error::Configuration(format!("weight exponent must be positive, got {}", self.p_exp)));
                }
                let eta = self
                    .weight
                    .as_ref()
                    .ok_or_else(|| Error::Configuration("weighted variant needs a weight function".into()))?;
                let step = 1e-6 * mesh.h_max();
                for k in 0..mesh.n_cells() {
                    let x = mesh.cell_centroid(k);
                    if !(eta(x) > 0.0) {
                        return Err(Error::Configuration(format!("weight is not positive at {:?}", x.as_slice())));
                    }
                    let ex = Vec2::new(step, 0.0);
                    let ey = Vec2::new(0.0, step);
                    let grad = Vec2::new(eta(x + ex) - eta(x - ex), eta(x + ey) - eta(x - ey)) / (2.0 * step);
                    if !((self.beta)(x).dot(&grad) < 0.0) {
                        return Err(Error::Configuration(format!(
                            "weight does not decrease along the flow at {:?}",
                            x.as_slice()
                        )));
                    }
                }
            }
            _ => {}
        }
        Ok(())
    }
}

/// Assembly settings.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AssemblyOptions {
    /// Quadrature degree for cell and face integrals; `None` means `2k + 2`.
    pub quad_degree: Option<usize>,
    /// Run the element loop on the rayon pool. Output is identical either way.
    pub parallel: bool,
}

impl Default for AssemblyOptions {
    fn default() -> Self {
        AssemblyOptions { quad_degree: None, parallel: true }
    }
}

/// The triple `V_h^k × RT^l × X_h^m` on one mesh.
#[derive(Debug, Clone)]
pub struct MixedSpaces {
    pub primal: Arc<FeSpace>,
    pub flux: Arc<FeSpace>,
    pub multiplier: Arc<FeSpace>,
}

fn same_mesh(a: &Arc<Mesh>, b: &Arc<Mesh>) -> bool {
    Arc::ptr_eq(a, b) || (a.vertices() == b.vertices() && a.cells() == b.cells())
}

impl MixedSpaces {
    /// Equal-order spaces of order `k`.
    pub fn new(mesh: Arc<Mesh>, k: usize) -> Result<Self> {
        Ok(MixedSpaces {
            primal: Arc::new(FeSpace::new(mesh.clone(), SpaceKind::Lagrange, k)?),
            flux: Arc::new(FeSpace::new(mesh.clone(), SpaceKind::RaviartThomas, k)?),
            multiplier: Arc::new(FeSpace::new(mesh, SpaceKind::Discontinuous, k)?),
        })
    }

    pub fn from_spaces(primal: Arc<FeSpace>, flux: Arc<FeSpace>, multiplier: Arc<FeSpace>) -> Result<Self> {
        if primal.kind() != SpaceKind::Lagrange
            || flux.kind() != SpaceKind::RaviartThomas
            || multiplier.kind() != SpaceKind::Discontinuous
        {
            return Err(Error::InvalidArgument("expected Lagrange, Raviart-Thomas and discontinuous spaces".into()));
        }
        if !same_mesh(primal.mesh(), flux.mesh()) || !same_mesh(primal.mesh(), multiplier.mesh()) {
            return Err(Error::InvalidArgument("spaces are built on different meshes".into()));
        }
        Ok(MixedSpaces { primal, flux, multiplier })
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        self.primal.mesh()
    }

    pub fn order(&self) -> usize {
        self.primal.order()
    }

    pub fn is_equal_order(&self) -> bool {
        self.primal.order() == self.flux.order() && self.flux.order() == self.multiplier.order()
    }

    /// Start of the `u`, `p` and `z` blocks, and the total size.
    pub fn offsets(&self) -> [usize; 4] {
        let nu = self.primal.n_dofs();
        let np = self.flux.n_dofs();
        let nz = self.multiplier.n_dofs();
        [0, nu, nu + np, nu + np + nz]
    }

    pub fn n_total(&self) -> usize {
        self.offsets()[3]
    }

    fn quad_degree(&self, opts: &AssemblyOptions) -> Result<usize> {
        let k = self.primal.order().max(self.flux.order()).max(self.multiplier.order());
        let min = 2 * k + 2;
        match opts.quad_degree {
            Some(d) if d < min => Err(Error::InvalidArgument(format!(
                "quadrature degree {d} below the required {min}"
            ))),
            Some(d) => Ok(d.min(MAX_TRIANGLE_DEGREE)),
            None => Ok(min),
        }
    }
}

/// Unconstrained system plus the constraints to eliminate.
#[derive(Debug, Clone)]
pub struct BlockSystem {
    pub matrix: SparseMatrix,
    pub rhs: Vec<f64>,
    /// Sorted `(dof, value)` pairs.
    pub constraints: Vec<(usize, f64)>,
    pub offsets: [usize; 4],
}

/// System on the free DOFs after elimination.
#[derive(Debug, Clone)]
pub struct ReducedSystem {
    pub matrix: SparseMatrix,
    pub rhs: Vec<f64>,
    /// Global index of each free DOF.
    pub free: Vec<usize>,
}

const CHUNK: usize = 2048;

struct Kernel<'a> {
    spaces: &'a MixedSpaces,
    problem: &'a ProblemSpec,
    points: Vec<[f64; 2]>,
    weights: Vec<f64>,
    u_vals: Vec<f64>,
    u_grads: Vec<[f64; 2]>,
    p_vals: Vec<[f64; 2]>,
    p_divs: Vec<f64>,
    z_vals: Vec<f64>,
    nu: usize,
    np: usize,
    nz: usize,
}

#[derive(Default)]
struct ChunkOut {
    triplets: Vec<Triplet<usize, usize, f64>>,
    load: Vec<(usize, f64)>,
}

impl<'a> Kernel<'a> {
    fn new(spaces: &'a MixedSpaces, problem: &'a ProblemSpec, degree: usize) -> Result<Self> {
        let rule = triangle_rule(degree)?;
        let ut = spaces.primal.tabulate_scalar(&rule.points)?;
        let pt = spaces.flux.tabulate_vector(&rule.points)?;
        let zt = spaces.multiplier.tabulate_scalar(&rule.points)?;
        Ok(Kernel {
            spaces,
            problem,
            nu: ut.n_basis,
            np: pt.n_basis,
            nz: zt.n_basis,
            points: rule.points,
            weights: rule.weights,
            u_vals: ut.values,
            u_grads: ut.grads,
            p_vals: pt.values,
            p_divs: pt.divs,
            z_vals: zt.values,
        })
    }

    /// Appends the contributions of cell `k`.
    fn cell(&self, k: usize, want_s: bool, want_b: bool, out: &mut ChunkOut) {
        let mesh = self.spaces.mesh();
        let geo = mesh.geometry(k);
        let det = geo.det.abs();
        let (nu, np, nz) = (self.nu, self.np, self.nz);
        let m = nu + np;
        let a = self.problem.diffusion;
        let weighted = self.problem.variant == Variant::Weighted;
        let udofs = self.spaces.primal.cell_dofs(k);
        let pdofs = self.spaces.flux.cell_dofs(k);
        let psigns = self.spaces.flux.cell_signs(k);
        let zdofs = self.spaces.multiplier.cell_dofs(k);
        let [_, off_p, off_z, _] = self.spaces.offsets();

        let mut s = vec![0.0; m * m];
        let mut b = vec![0.0; nz * m];
        let mut f = vec![0.0; nz];
        // r[i] = βφ − A∇φ for u functions, −ψ for flux functions
        let mut r = vec![Vec2::zeros(); m];
        let mut div = vec![0.0; m];
        for (q, &xi) in self.points.iter().enumerate() {
            let w = self.weights[q] * det;
            let x = geo.to_physical(xi);
            let beta = (self.problem.beta)(x);
            for i in 0..nu {
                let g = map_gradient(&geo, self.u_grads[q * nu + i]);
                r[i] = beta * self.u_vals[q * nu + i] - a * g;
            }
            for i in 0..np {
                let (v, d) = piola(&geo, self.p_vals[q * np + i], self.p_divs[q * np + i]);
                r[nu + i] = -v * psigns[i];
                div[nu + i] = d * psigns[i];
            }
            if want_s {
                let ws = if weighted {
                    let eta = self.problem.weight.as_ref().map(|e| e(x)).unwrap_or(1.0);
                    0.5 * w * eta.powf(self.problem.p_exp)
                } else {
                    0.5 * w
                };
                for i in 0..m {
                    let ri = r[i] * ws;
                    for j in i..m {
                        s[i * m + j] += ri.dot(&r[j]);
                    }
                }
            }
            if want_b {
                let fx = (self.problem.source)(x);
                for t in 0..nz {
                    let chi = self.z_vals[q * nz + t] * w;
                    for i in 0..nu {
                        b[t * m + i] += chi * self.problem.mu * self.u_vals[q * nu + i];
                    }
                    for i in nu..m {
                        b[t * m + i] += chi * div[i];
                    }
                    f[t] += chi * fx;
                }
            }
        }
        let global = |i: usize| if i < nu { udofs[i] } else { off_p + pdofs[i - nu] };
        if want_s {
            for i in 0..m {
                for j in i..m {
                    let v = s[i * m + j];
                    out.triplets.push(Triplet::new(global(i), global(j), v));
                    if j != i {
                        out.triplets.push(Triplet::new(global(j), global(i), v));
                    }
                }
            }
        }
        if want_b {
            for t in 0..nz {
                let row = off_z + zdofs[t];
                for i in 0..m {
                    let v = b[t * m + i];
                    if v != 0.0 {
                        out.triplets.push(Triplet::new(row, global(i), v));
                        out.triplets.push(Triplet::new(global(i), row, v));
                    }
                }
                out.load.push((zdofs[t], f[t]));
            }
        }
    }
}

/// Runs the element loop in fixed chunks so the triplet order does not
/// depend on the thread count.
fn element_loop(
    spaces: &MixedSpaces,
    problem: &ProblemSpec,
    opts: &AssemblyOptions,
    want_s: bool,
    want_b: bool,
) -> Result<(Vec<Triplet<usize, usize, f64>>, Vec<f64>)> {
    let kernel = Kernel::new(spaces, problem, spaces.quad_degree(opts)?)?;
    let nc = spaces.mesh().n_cells();
    let n_chunks = nc.div_ceil(CHUNK);
    let run = |c: usize| {
        let mut out = ChunkOut::default();
        for k in c * CHUNK..((c + 1) * CHUNK).min(nc) {
            kernel.cell(k, want_s, want_b, &mut out);
        }
        out
    };
    let chunks: Vec<ChunkOut> = if opts.parallel {
        (0..n_chunks).into_par_iter().map(run).collect()
    } else {
        (0..n_chunks).map(run).collect()
    };
    let mut load = vec![0.0; spaces.multiplier.n_dofs()];
    let total: usize = chunks.iter().map(|c| c.triplets.len()).sum();
    let mut triplets = Vec::with_capacity(total);
    for c in chunks {
        triplets.extend(c.triplets);
        for (d, v) in c.load {
            load[d] += v;
        }
    }
    Ok((triplets, load))
}

fn build_matrix(n: usize, m: usize, triplets: &[Triplet<usize, usize, f64>]) -> Result<SparseMatrix> {
    SparseColMat::try_new_from_triplets(n, m, triplets).map_err(|e| Error::Backend(format!("{e:?}")))
}

/// The stabilizer block over `(u, p)`, of size `n_u + n_p`, so that
/// `wᵀSw = ½‖βv − A∇v − q‖²` for `w = (v, q)`.
pub fn assemble_stabilizer(spaces: &MixedSpaces, problem: &ProblemSpec, opts: &AssemblyOptions) -> Result<SparseMatrix> {
    let (t, _) = element_loop(spaces, problem, opts, true, false)?;
    let n = spaces.offsets()[2];
    build_matrix(n, n, &t)
}

/// The constraint block `B` (rows: multiplier DOFs, columns: `(u, p)`) and
/// the load vector `F`.
pub fn assemble_constraint(
    spaces: &MixedSpaces,
    problem: &ProblemSpec,
    opts: &AssemblyOptions,
) -> Result<(SparseMatrix, Vec<f64>)> {
    let (t, f) = element_loop(spaces, problem, opts, false, true)?;
    let off_z = spaces.offsets()[2];
    // keep the lower-left copy only
    let lower: Vec<_> = t
        .into_iter()
        .filter(|e| e.row >= off_z)
        .map(|e| Triplet::new(e.row - off_z, e.col, e.val))
        .collect();
    Ok((build_matrix(spaces.multiplier.n_dofs(), off_z, &lower)?, f))
}

/// Weak boundary terms `⟨(h_F[β·n]_−² + γε²/h_F) u, v⟩_∂Ω` and the matching
/// right-hand side with `g` in place of `u`.
pub fn assemble_weak_bc(
    spaces: &MixedSpaces,
    problem: &ProblemSpec,
    opts: &AssemblyOptions,
) -> Result<(SparseMatrix, Vec<f64>)> {
    let (t, rhs) = weak_bc_triplets(spaces, problem, opts)?;
    let n = spaces.primal.n_dofs();
    Ok((build_matrix(n, n, &t)?, rhs))
}

fn weak_bc_triplets(
    spaces: &MixedSpaces,
    problem: &ProblemSpec,
    opts: &AssemblyOptions,
) -> Result<(Vec<Triplet<usize, usize, f64>>, Vec<f64>)> {
    let g = problem
        .dirichlet
        .as_ref()
        .ok_or_else(|| Error::Configuration("weak boundary conditions need Dirichlet data on all of the boundary".into()))?;
    let mesh = spaces.mesh();
    let rule = edge_rule(spaces.quad_degree(opts)?)?;
    let eps = problem.min_diffusion().max(0.0);
    let basis = spaces.primal.lagrange_basis().expect("Lagrange space");
    let n = basis.dim();
    let mut vals = vec![0.0; n];
    let mut grads = vec![[0.0; 2]; n];
    let mut triplets = Vec::new();
    let mut rhs = vec![0.0; spaces.primal.n_dofs()];
    for f in mesh.boundary_faces() {
        let (k, _) = mesh.face_cells(f);
        let geo = mesh.geometry(k);
        let h = mesh.face_diameter(f);
        let normal = mesh.face_normal(f);
        let dofs = spaces.primal.cell_dofs(k);
        let mut local = vec![0.0; n * n];
        for (t, w) in rule.iter() {
            let x = mesh.face_point(f, t);
            let bn = (problem.beta)(x).dot(&normal).min(0.0);
            let c = h * bn * bn + problem.gamma * eps * eps / h;
            if c == 0.0 {
                continue;
            }
            basis.eval(geo.to_reference(x), &mut vals, &mut grads);
            let wc = w * h * c;
            let gx = g(x);
            for i in 0..n {
                rhs[dofs[i]] += wc * gx * vals[i];
                for j in 0..n {
                    local[i * n + j] += wc * vals[i] * vals[j];
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                if local[i * n + j] != 0.0 {
                    triplets.push(Triplet::new(dofs[i], dofs[j], local[i * n + j]));
                }
            }
        }
    }
    Ok((triplets, rhs))
}

/// Strong constraints: nodal values of `g` on Dirichlet and inflow faces,
/// and Neumann flux moments `−∫_F ψ L_j` on Neumann faces.
fn strong_constraints(spaces: &MixedSpaces, problem: &ProblemSpec, degree: usize) -> Result<Vec<(usize, f64)>> {
    let mesh = spaces.mesh();
    let k = spaces.primal.order();
    let off_p = spaces.offsets()[1];
    let mut fixed = std::collections::BTreeMap::new();
    for f in mesh.boundary_faces() {
        match mesh.boundary_tag(f) {
            Some(tag) if tag.is_dirichlet() => {
                let g = problem.dirichlet.as_ref().ok_or_else(|| {
                    Error::Configuration("Dirichlet faces present but no Dirichlet data given".into())
                })?;
                let [a, b] = mesh.face(f);
                fixed.insert(a, g(mesh.vertex(a)));
                fixed.insert(b, g(mesh.vertex(b)));
                if k == 2 {
                    fixed.insert(mesh.n_vertices() + f, g(mesh.face_midpoint(f)));
                }
            }
            Some(BoundaryTag::Neumann) => {
                let psi = problem.neumann.as_ref().ok_or_else(|| {
                    Error::Configuration("Neumann faces present but no Neumann data given".into())
                })?;
                let l = spaces.flux.order();
                let coeffs = face_l2_project(mesh, f, |x| psi(x), l, degree)?;
                let len = mesh.face_diameter(f);
                // moments of the projection: ∫ ψ_h L_j ds = |F| c_j / (2j + 1)
                for (j, d) in spaces.flux.face_dofs(f).into_iter().enumerate() {
                    fixed.insert(off_p + d, -len * coeffs[j] / (2 * j + 1) as f64);
                }
            }
            Some(BoundaryTag::Outflow) => {}
            _ => {
                return Err(Error::Configuration(format!("boundary face {f} carries no usable tag")));
            }
        }
    }
    Ok(fixed.into_iter().collect())
}

/// Full saddle-point system for equal-order spaces, with the constraints of
/// the chosen variant recorded for elimination.
pub fn assemble_system(spaces: &MixedSpaces, problem: &ProblemSpec, opts: &AssemblyOptions) -> Result<BlockSystem> {
    if !spaces.is_equal_order() {
        return Err(Error::Unsupported(format!(
            "unequal orders ({}, {}, {})",
            spaces.primal.order(),
            spaces.flux.order(),
            spaces.multiplier.order()
        )));
    }
    let mesh = spaces.mesh();
    for f in mesh.boundary_faces() {
        if matches!(mesh.boundary_tag(f), None | Some(BoundaryTag::Unset)) {
            return Err(Error::Configuration(format!("boundary face {f} is untagged")));
        }
    }
    problem.validate(mesh)?;
    let offsets = spaces.offsets();
    let n = offsets[3];
    let (mut triplets, load) = element_loop(spaces, problem, opts, true, true)?;
    let mut rhs = vec![0.0; n];
    rhs[offsets[2]..].copy_from_slice(&load);
    let constraints = if problem.variant == Variant::WeakBc {
        let (t, r) = weak_bc_triplets(spaces, problem, opts)?;
        triplets.extend(t);
        rhs[..offsets[1]].copy_from_slice(&r);
        Vec::new()
    } else {
        strong_constraints(spaces, problem, spaces.quad_degree(opts)?)?
    };
    let matrix = build_matrix(n, n, &triplets)?;
    Ok(BlockSystem { matrix, rhs, constraints, offsets })
}

/// `y = M x` for a column-compressed matrix.
pub fn spmv(m: &SparseMatrix, x: &[f64]) -> Vec<f64> {
    let mut y = vec![0.0; m.nrows()];
    let cp = m.symbolic().col_ptr();
    let ri = m.symbolic().row_idx();
    let v = m.val();
    for j in 0..m.ncols() {
        let xj = x[j];
        if xj == 0.0 {
            continue;
        }
        for p in cp[j]..cp[j + 1] {
            y[ri[p]] += v[p] * xj;
        }
    }
    y
}

impl BlockSystem {
    pub fn n(&self) -> usize {
        self.offsets[3]
    }

    /// `max |M − Mᵀ| / max |M|`.
    pub fn symmetry_defect(&self) -> f64 {
        symmetry_defect(&self.matrix)
    }

    /// Eliminates the constrained DOFs, moving their columns to the
    /// right-hand side so the reduced matrix stays symmetric.
    pub fn reduce(&self) -> Result<ReducedSystem> {
        let n = self.n();
        let mut map = vec![usize::MAX; n];
        let mut fixed = vec![None; n];
        for &(d, v) in &self.constraints {
            fixed[d] = Some(v);
        }
        let mut free = Vec::with_capacity(n - self.constraints.len());
        for i in 0..n {
            if fixed[i].is_none() {
                map[i] = free.len();
                free.push(i);
            }
        }
        let mut rhs: Vec<f64> = free.iter().map(|&i| self.rhs[i]).collect();
        let cp = self.matrix.symbolic().col_ptr();
        let ri = self.matrix.symbolic().row_idx();
        let val = self.matrix.val();
        let mut triplets = Vec::with_capacity(val.len());
        for j in 0..n {
            for p in cp[j]..cp[j + 1] {
                let i = ri[p];
                if map[i] == usize::MAX {
                    continue;
                }
                match fixed[j] {
                    Some(g) => rhs[map[i]] -= val[p] * g,
                    None => triplets.push(Triplet::new(map[i], map[j], val[p])),
                }
            }
        }
        let matrix = build_matrix(free.len(), free.len(), &triplets)?;
        Ok(ReducedSystem { matrix, rhs, free })
    }

    /// Full solution vector from the free-DOF values.
    pub fn expand(&self, reduced: &ReducedSystem, x_free: &[f64]) -> Vec<f64> {
        let mut x = vec![0.0; self.n()];
        for &(d, v) in &self.constraints {
            x[d] = v;
        }
        for (&i, &v) in reduced.free.iter().zip(x_free) {
            x[i] = v;
        }
        x
    }
}

/// `max |M − Mᵀ| / max |M|` for a square sparse matrix.
pub fn symmetry_defect(m: &SparseMatrix) -> f64 {
    let mut entries = std::collections::HashMap::new();
    let cp = m.symbolic().col_ptr();
    let ri = m.symbolic().row_idx();
    let v = m.val();
    let mut max = 0.0f64;
    for j in 0..m.ncols() {
        for p in cp[j]..cp[j + 1] {
            entries.insert((ri[p], j), v[p]);
            max = max.max(v[p].abs());
        }
    }
    let mut defect = 0.0f64;
    for (&(i, j), &a) in &entries {
        let b = entries.get(&(j, i)).copied().unwrap_or(0.0);
        defect = defect.max((a - b).abs());
    }
    if max == 0.0 {
        0.0
    } else {
        defect / max
    }
}
