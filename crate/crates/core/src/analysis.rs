//! Error norms, residual indicators, the gradient reconstruction `η_h`,
//! convergence tables and file output.

use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;

use crate::assembly::ProblemSpec;
use crate::error::{Error, Result};
use crate::mesh::{BoundaryTag, Mesh};
use crate::problems::ExampleCase;
use crate::quadrature::{edge_rule, graded_triangle_rule, triangle_rule, MAX_TRIANGLE_DEGREE};
use crate::solver::MixedSolution;
use crate::spaces::{FeSpace, FieldCoeffs, SpaceKind};
use crate::Vec2;

/// Errors of a discrete solution. Entries that need exact fields are `None`
/// when the case has none.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ErrorReport {
    pub l2_u: Option<f64>,
    pub h1_semi_u: Option<f64>,
    pub h1_u: Option<f64>,
    pub l2_p: Option<f64>,
    pub div_p: Option<f64>,
    /// `‖∇·(β(u − u_h))‖`
    pub streamline: Option<f64>,
    /// `(‖βe − A∇e − e_p‖² + ‖h(∇·e_p + μe)‖²)^{1/2}` with `e = u − u_h`, `e_p = p − p_h`.
    pub triple_norm: Option<f64>,
    pub l2_z: f64,
    pub z_broken: f64,
    pub aposteriori: Option<f64>,
}

fn rule_degree(requested: Option<usize>, k: usize) -> usize {
    requested.unwrap_or(2 * k + 4).max(2 * k + 4).min(MAX_TRIANGLE_DEGREE)
}

/// Halvings of the graded rule on cells touching a singular point.
pub const GRADED_LEVELS: usize = 16;

/// Cellwise quadrature of all error quantities with a rule of degree at
/// least `2k + 4`; cells with a vertex at one of the case's singular points
/// use [`graded_triangle_rule`] toward that vertex.
pub fn error_norms(sol: &MixedSolution, case: &ExampleCase, degree: Option<usize>) -> Result<ErrorReport> {
    let k = sol.order();
    let deg = rule_degree(degree, k);
    let mut rules = vec![triangle_rule(deg)?];
    for v in 0..3 {
        rules.push(graded_triangle_rule(deg, v, GRADED_LEVELS)?);
    }
    let mesh = sol.mesh();
    let problem = &case.problem;
    let tabs = rules
        .iter()
        .map(|r| {
            Ok((
                sol.u.space().tabulate_scalar(&r.points)?,
                sol.p.space().tabulate_vector(&r.points)?,
                sol.z.space().tabulate_scalar(&r.points)?,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    let singular_vertex = |c: usize| {
        let cell = mesh.cells()[c];
        (0..3).find(|&v| case.singular_points.iter().any(|s| (mesh.vertices()[cell[v]] - s).norm() <= 1e-12))
    };
    let mut acc = [0.0f64; 6];
    let mut l2_z = 0.0;
    for c in 0..mesh.n_cells() {
        let which = singular_vertex(c).map_or(0, |v| v + 1);
        let (rule, (ut, pt, zt)) = (&rules[which], &tabs[which]);
        let geo = mesh.geometry(c);
        let det = geo.det.abs();
        let h = mesh.cell_diameter(c);
        let (uv, ug) = sol.u.scalar_on_cell(c, ut, &geo);
        let (pv, pd) = sol.p.vector_on_cell(c, pt, &geo);
        let (zv, _) = sol.z.scalar_on_cell(c, zt, &geo);
        for (q, (xi, w)) in rule.iter().enumerate() {
            let w = w * det;
            l2_z += w * zv[q] * zv[q];
            let Some(ex) = &case.exact else { continue };
            let x = geo.to_physical(xi);
            let e = (ex.u)(x) - uv[q];
            let ge = (ex.grad_u)(x) - ug[q];
            let ep = (ex.flux)(x) - pv[q];
            let ed = (ex.div_flux)(x) - pd[q];
            let beta = (problem.beta)(x);
            let stream = beta.dot(&ge) + (problem.div_beta)(x) * e;
            let s = beta * e - problem.diffusion * ge - ep;
            let cons = h * (ed + problem.mu * e);
            acc[0] += w * e * e;
            acc[1] += w * ge.norm_squared();
            acc[2] += w * ep.norm_squared();
            acc[3] += w * ed * ed;
            acc[4] += w * stream * stream;
            acc[5] += w * (s.norm_squared() + cons * cons);
        }
    }
    let z_broken = broken_norm_1h(&sol.z)?;
    let mut r = ErrorReport { l2_z: l2_z.sqrt(), z_broken, ..Default::default() };
    if case.exact.is_some() {
        r.l2_u = Some(acc[0].sqrt());
        r.h1_semi_u = Some(acc[1].sqrt());
        r.h1_u = Some((acc[0] + acc[1]).sqrt());
        r.l2_p = Some(acc[2].sqrt());
        r.div_p = Some(acc[3].sqrt());
        r.streamline = Some(acc[4].sqrt());
        r.triple_norm = Some(acc[5].sqrt());
    }
    Ok(r)
}

/// The computable bound `C_P Λ⁻¹ (‖h(f − μu_h − ∇·p_h)‖ + ‖βu_h − A∇u_h − p_h‖)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AposterioriBound {
    pub conservation_term: f64,
    pub flux_term: f64,
    pub bound: f64,
}

/// Poincaré constant of convex domains of unit diameter.
pub const DEFAULT_POINCARE: f64 = 1.0 / std::f64::consts::PI;

pub fn aposteriori_hminus1(
    sol: &MixedSolution,
    problem: &ProblemSpec,
    c_p: f64,
    lambda_min: f64,
) -> Result<AposterioriBound> {
    if !(lambda_min > 0.0) {
        return Err(Error::InvalidArgument(format!("Lambda_min must be positive, got {lambda_min}")));
    }
    let k = sol.order();
    let rule = triangle_rule(rule_degree(None, k))?;
    let mesh = sol.mesh();
    let ut = sol.u.space().tabulate_scalar(&rule.points)?;
    let pt = sol.p.space().tabulate_vector(&rule.points)?;
    let (mut t1, mut t2) = (0.0, 0.0);
    for c in 0..mesh.n_cells() {
        let geo = mesh.geometry(c);
        let det = geo.det.abs();
        let h = mesh.cell_diameter(c);
        let (uv, ug) = sol.u.scalar_on_cell(c, &ut, &geo);
        let (pv, pd) = sol.p.vector_on_cell(c, &pt, &geo);
        for (q, (xi, w)) in rule.iter().enumerate() {
            let w = w * det;
            let x = geo.to_physical(xi);
            let r = h * ((problem.source)(x) - problem.mu * uv[q] - pd[q]);
            let s = (problem.beta)(x) * uv[q] - problem.diffusion * ug[q] - pv[q];
            t1 += w * r * r;
            t2 += w * s.norm_squared();
        }
    }
    let (t1, t2) = (t1.sqrt(), t2.sqrt());
    Ok(AposterioriBound { conservation_term: t1, flux_term: t2, bound: c_p / lambda_min * (t1 + t2) })
}

/// Elementwise conservation defect of a discrete solution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConservationReport {
    /// Largest `|(∇·p_h + μu_h − f, χ_j)_K|` over cells and multiplier
    /// basis functions.
    pub max_moment: f64,
    /// `‖F‖_∞`, the largest load moment `|(f, χ_j)_K|`.
    pub load: f64,
    /// `load`, or when it vanishes the largest of `|(p_h, ∇χ_j)_K|` and
    /// `|(μu_h, χ_j)_K|`.
    pub scale: f64,
}

impl ConservationReport {
    pub fn relative(&self) -> f64 {
        if self.scale > 0.0 {
            self.max_moment / self.scale
        } else {
            self.max_moment
        }
    }
}

pub fn conservation_residual(sol: &MixedSolution, problem: &ProblemSpec) -> Result<ConservationReport> {
    let k = sol.order();
    let rule = triangle_rule((2 * k + 2).min(MAX_TRIANGLE_DEGREE))?;
    let mesh = sol.mesh();
    let ut = sol.u.space().tabulate_scalar(&rule.points)?;
    let pt = sol.p.space().tabulate_vector(&rule.points)?;
    let zt = sol.z.space().tabulate_scalar(&rule.points)?;
    let nz = zt.n_basis;
    let (mut worst, mut load, mut terms) = (0.0f64, 0.0f64, 0.0f64);
    for c in 0..mesh.n_cells() {
        let geo = mesh.geometry(c);
        let det = geo.det.abs();
        let (uv, _) = sol.u.scalar_on_cell(c, &ut, &geo);
        let (pv, pd) = sol.p.vector_on_cell(c, &pt, &geo);
        let jit = geo.inverse.transpose();
        // per basis function: divergence, reaction, load and (p_h, ∇χ)
        let mut m = vec![[0.0; 4]; nz];
        for (q, (xi, w)) in rule.iter().enumerate() {
            let w = w * det;
            let fx = (problem.source)(geo.to_physical(xi));
            for (j, mj) in m.iter_mut().enumerate() {
                let chi = zt.values[q * nz + j] * w;
                let g = zt.grads[q * nz + j];
                mj[0] += pd[q] * chi;
                mj[1] += problem.mu * uv[q] * chi;
                mj[2] += fx * chi;
                mj[3] += w * pv[q].dot(&(jit * Vec2::new(g[0], g[1])));
            }
        }
        for [d, r, f, pg] in m {
            worst = worst.max((d + r - f).abs());
            load = load.max(f.abs());
            terms = terms.max(pg.abs()).max(r.abs());
        }
    }
    Ok(ConservationReport { max_moment: worst, load, scale: if load > 0.0 { load } else { terms } })
}

/// Faces on which jumps enter the broken norm and the reconstruction:
/// interior faces and every boundary face not tagged Neumann.
fn jump_face(mesh: &Mesh, f: usize) -> bool {
    mesh.boundary_tag(f) != Some(BoundaryTag::Neumann)
}

/// Values of a scalar field on face `f` at the edge-rule points, from both
/// sides. The second side is zero on the boundary.
fn face_traces(field: &FieldCoeffs, f: usize, points: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let mesh = field.space().mesh();
    let (k0, k1) = mesh.face_cells(f);
    let side = |k: usize| -> Result<Vec<f64>> {
        let geo = mesh.geometry(k);
        let xs: Vec<[f64; 2]> = points.iter().map(|&t| geo.to_reference(mesh.face_point(f, t))).collect();
        let table = field.space().tabulate_scalar(&xs)?;
        Ok(field.scalar_on_cell(k, &table, &geo).0)
    };
    let a = side(k0)?;
    let b = match k1 {
        Some(k) => side(k)?,
        None => vec![0.0; points.len()],
    };
    Ok((a, b))
}

fn require_dg(field: &FieldCoeffs) -> Result<()> {
    if field.space().kind() == SpaceKind::RaviartThomas {
        return Err(Error::InvalidArgument("expected a scalar field".into()));
    }
    Ok(())
}

/// `(‖∇x‖²_h + ‖h^{−1/2}[x]‖²)^{1/2}` over interior and non-Neumann
/// boundary faces, with the trace as jump on the boundary.
pub fn broken_norm_1h(x: &FieldCoeffs) -> Result<f64> {
    let (g, j) = broken_norm_parts(x)?;
    Ok((g + j).sqrt())
}

/// Squared gradient and jump contributions of [`broken_norm_1h`].
pub fn broken_norm_parts(x: &FieldCoeffs) -> Result<(f64, f64)> {
    require_dg(x)?;
    let m = x.space().order();
    let mesh = x.space().mesh();
    let rule = triangle_rule(2 * m + 2)?;
    let table = x.space().tabulate_scalar(&rule.points)?;
    let mut grad = 0.0;
    for c in 0..mesh.n_cells() {
        let geo = mesh.geometry(c);
        let (_, g) = x.scalar_on_cell(c, &table, &geo);
        grad += rule.iter().zip(&g).map(|((_, w), gq)| w * geo.det.abs() * gq.norm_squared()).sum::<f64>();
    }
    let erule = edge_rule(2 * m + 2)?;
    let mut jump = 0.0;
    for f in 0..mesh.n_faces() {
        if !jump_face(mesh, f) {
            continue;
        }
        let (a, b) = face_traces(x, f, &erule.points)?;
        // h_F⁻¹ ∫_F [x]² ds with ds = h_F dt
        jump += erule.weights.iter().zip(a.iter().zip(&b)).map(|(w, (a, b))| w * (a - b) * (a - b)).sum::<f64>();
    }
    Ok((grad, jump))
}

/// The lifting `η_h(x_h) ∈ RT^l` with face moments `h_F⁻¹⟨[x_h], L_j⟩_F`
/// on jump faces, zero normal trace on Neumann faces and interior moments
/// `−(∇x_h, q)_K`.
pub fn reconstruct_eta(x: &FieldCoeffs, l: usize) -> Result<FieldCoeffs> {
    require_dg(x)?;
    let mesh = x.space().mesh().clone();
    let space = Arc::new(FeSpace::new(mesh.clone(), SpaceKind::RaviartThomas, l)?);
    let m = x.space().order();
    let mut coeffs = vec![0.0; space.n_dofs()];
    let erule = edge_rule(m + l + 2)?;
    for f in 0..mesh.n_faces() {
        if !jump_face(&mesh, f) {
            continue;
        }
        let (a, b) = face_traces(x, f, &erule.points)?;
        let dofs = space.face_dofs(f);
        for (j, &d) in dofs.iter().enumerate() {
            // h_F⁻¹ ∫_F [x] L_j ds = ∫_0^1 [x] L_j dt
            coeffs[d] = erule
                .iter()
                .zip(a.iter().zip(&b))
                .map(|((t, w), (a, b))| w * (a - b) * crate::quadrature::shifted_legendre(j, t))
                .sum();
        }
    }
    if l > 0 {
        let rule = triangle_rule((m + l + 2).min(MAX_TRIANGLE_DEGREE))?;
        let table = x.space().tabulate_scalar(&rule.points)?;
        let tests = space.rt_basis().expect("RT space").interior_tests();
        let offset = 3 * (l + 1);
        for c in 0..mesh.n_cells() {
            let geo = mesh.geometry(c);
            let (_, g) = x.scalar_on_cell(c, &table, &geo);
            let dofs = space.cell_dofs(c);
            let inv_t = geo.inverse.transpose();
            for (i, &(comp, pa, pb)) in tests.iter().enumerate() {
                let mut e = Vec2::zeros();
                e[comp] = 1.0;
                let dir = inv_t * e;
                let mut acc = 0.0;
                for (q, (xi, w)) in rule.iter().enumerate() {
                    let mono = xi[0].powi(pa) * xi[1].powi(pb);
                    acc -= w * geo.det.abs() * g[q].dot(&dir) * mono;
                }
                // pull-back orientation factor sign(det J)
                coeffs[dofs[offset + i]] = acc * geo.det.signum();
            }
        }
    }
    FieldCoeffs::new(space, coeffs)
}

/// `‖η_h(x)‖ / ‖x‖_{1,h}` with `l` equal to the order of `x`.
pub fn eta_stability_ratio(x: &FieldCoeffs) -> Result<f64> {
    let eta = reconstruct_eta(x, x.space().order())?;
    let den = broken_norm_1h(x)?;
    Ok(l2_norm_vector(&eta)? / den)
}

/// L² norm of a scalar field.
pub fn l2_norm_scalar(x: &FieldCoeffs) -> Result<f64> {
    let mesh = x.space().mesh();
    let rule = triangle_rule(2 * x.space().order() + 2)?;
    let table = x.space().tabulate_scalar(&rule.points)?;
    let mut s = 0.0;
    for c in 0..mesh.n_cells() {
        let geo = mesh.geometry(c);
        let (v, _) = x.scalar_on_cell(c, &table, &geo);
        s += rule.iter().zip(&v).map(|((_, w), v)| w * geo.det.abs() * v * v).sum::<f64>();
    }
    Ok(s.sqrt())
}

/// L² norm of an RT field.
pub fn l2_norm_vector(x: &FieldCoeffs) -> Result<f64> {
    let mesh = x.space().mesh();
    let rule = triangle_rule(2 * x.space().order() + 2)?;
    let table = x.space().tabulate_vector(&rule.points)?;
    let mut s = 0.0;
    for c in 0..mesh.n_cells() {
        let geo = mesh.geometry(c);
        let (v, _) = x.vector_on_cell(c, &table, &geo);
        s += rule.iter().zip(&v).map(|((_, w), v)| w * geo.det.abs() * v.norm_squared()).sum::<f64>();
    }
    Ok(s.sqrt())
}

/// `(‖q‖² + ‖h ∇·q‖²)^{1/2}`, the residual norm of `(0, q)` when `β`, `A`
/// and `μ` vanish.
pub fn triple_norm_flux_only(q: &FieldCoeffs) -> Result<f64> {
    let mesh = q.space().mesh();
    let rule = triangle_rule(2 * q.space().order() + 2)?;
    let table = q.space().tabulate_vector(&rule.points)?;
    let mut s = 0.0;
    for c in 0..mesh.n_cells() {
        let geo = mesh.geometry(c);
        let h = mesh.cell_diameter(c);
        let (v, d) = q.vector_on_cell(c, &table, &geo);
        for (qi, (_, w)) in rule.iter().enumerate() {
            s += w * geo.det.abs() * (v[qi].norm_squared() + h * h * d[qi] * d[qi]);
        }
    }
    Ok(s.sqrt())
}

/// Largest `|u_h|` over the Lagrange nodes accepted by `keep`.
pub fn max_abs_nodal<F: Fn(Vec2) -> bool>(u: &FieldCoeffs, keep: F) -> f64 {
    nodal_points(u.space())
        .into_iter()
        .zip(&u.coeffs)
        .filter(|(x, _)| keep(*x))
        .fold(0.0f64, |m, (_, v)| m.max(v.abs()))
}

/// Smallest and largest nodal value of `u_h`.
pub fn nodal_range(u: &FieldCoeffs) -> (f64, f64) {
    u.coeffs.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)))
}

/// Physical positions of the Lagrange nodes in global numbering.
pub fn nodal_points(space: &FeSpace) -> Vec<Vec2> {
    let mesh = space.mesh();
    let mut pts = mesh.vertices().to_vec();
    if space.kind() == SpaceKind::Lagrange && space.order() == 2 {
        pts.extend((0..mesh.n_faces()).map(|f| mesh.face_midpoint(f)));
    }
    pts
}

/// `log2(e_prev / e_next)` for consecutive entries; `None` for the first.
pub fn convergence_rates(errors: &[f64]) -> Vec<Option<f64>> {
    let mut out = vec![None; errors.len()];
    for i in 1..errors.len() {
        out[i] = Some((errors[i - 1] / errors[i]).log2());
    }
    out
}

/// One row of a convergence study.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRow {
    pub h: f64,
    pub report: ErrorReport,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConvergenceTable {
    pub rows: Vec<ConvergenceRow>,
}

/// CSV column names, in order, with the report entry they show.
pub const CSV_COLUMNS: [&str; 6] = ["e_l2_u", "e_h1_u", "e_l2_p", "e_div_p", "e_stream", "e_z"];

fn column(r: &ErrorReport, i: usize) -> Option<f64> {
    match i {
        0 => r.l2_u,
        1 => r.h1_u,
        2 => r.l2_p,
        3 => r.div_p,
        4 => r.streamline,
        _ => Some(r.l2_z),
    }
}

impl ConvergenceTable {
    /// Appends a row; `h` must be half the previous row's.
    pub fn push(&mut self, h: f64, report: ErrorReport) -> Result<()> {
        if let Some(last) = self.rows.last() {
            if ((last.h / h) - 2.0).abs() > 1e-9 {
                return Err(Error::InvalidArgument(format!("mesh size {h} does not halve {}", last.h)));
            }
        }
        self.rows.push(ConvergenceRow { h, report });
        Ok(())
    }

    /// Values of CSV column `i` (see [`CSV_COLUMNS`]).
    pub fn column(&self, i: usize) -> Vec<Option<f64>> {
        self.rows.iter().map(|r| column(&r.report, i)).collect()
    }

    /// Rates of CSV column `i`; blank where either error is missing or zero.
    pub fn rates(&self, i: usize) -> Vec<Option<f64>> {
        let col = self.column(i);
        let mut out = vec![None; col.len()];
        for j in 1..col.len() {
            if let (Some(a), Some(b)) = (col[j - 1], col[j]) {
                if a > 0.0 && b > 0.0 {
                    out[j] = Some((a / b).log2());
                }
            }
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("h");
        for c in CSV_COLUMNS {
            s.push(',');
            s.push_str(c);
            s.push_str(",rate");
        }
        s.push('\n');
        let fmt = |v: Option<f64>| v.map(|x| format!("{x:.3e}")).unwrap_or_default();
        let rates: Vec<_> = (0..CSV_COLUMNS.len()).map(|i| self.rates(i)).collect();
        for (j, row) in self.rows.iter().enumerate() {
            s.push_str(&format!("{:.3e}", row.h));
            for (i, r) in rates.iter().enumerate() {
                let _ = write!(s, ",{},{}", fmt(column(&row.report, i)), fmt(r[j]));
            }
            s.push('\n');
        }
        s
    }
}

pub fn write_csv(table: &ConvergenceTable, path: &Path) -> Result<()> {
    std::fs::write(path, table.to_csv()).map_err(|e| Error::io(path, e))
}

/// Legacy ASCII VTK of the solution. Order 2 fields are drawn on the
/// submesh that splits every cell at its edge midpoints.
pub fn vtk_string(sol: &MixedSolution) -> Result<String> {
    let mesh = sol.mesh();
    let k = sol.order();
    let points = nodal_points(sol.u.space());
    // sub-triangles as (parent cell, reference vertices, global nodes)
    let mut cells: Vec<(usize, [[f64; 2]; 3], [usize; 3])> = Vec::new();
    for c in 0..mesh.n_cells() {
        let v = mesh.cell(c);
        if k == 1 {
            cells.push((c, [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]], v));
        } else {
            let d = sol.u.space().cell_dofs(c);
            let r = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [0.5, 0.5], [0.0, 0.5], [0.5, 0.0]];
            for t in [[0, 5, 4], [5, 1, 3], [4, 3, 2], [3, 4, 5]] {
                cells.push((c, [r[t[0]], r[t[1]], r[t[2]]], [d[t[0]], d[t[1]], d[t[2]]]));
            }
        }
    }
    let mut s = String::new();
    s.push_str("# vtk DataFile Version 3.0\npdfem solution\nASCII\nDATASET UNSTRUCTURED_GRID\n");
    let _ = writeln!(s, "POINTS {} double", points.len());
    for p in &points {
        let _ = writeln!(s, "{} {} 0", p[0], p[1]);
    }
    let _ = writeln!(s, "CELLS {} {}", cells.len(), 4 * cells.len());
    for (_, _, n) in &cells {
        let _ = writeln!(s, "3 {} {} {}", n[0], n[1], n[2]);
    }
    let _ = writeln!(s, "CELL_TYPES {}", cells.len());
    for _ in &cells {
        s.push_str("5\n");
    }
    let _ = writeln!(s, "POINT_DATA {}\nSCALARS u double 1\nLOOKUP_TABLE default", points.len());
    for v in &sol.u.coeffs {
        let _ = writeln!(s, "{v}");
    }
    let _ = writeln!(s, "CELL_DATA {}\nVECTORS p double", cells.len());
    let mut zs = Vec::with_capacity(cells.len());
    for (c, r, _) in &cells {
        let xi = [(r[0][0] + r[1][0] + r[2][0]) / 3.0, (r[0][1] + r[1][1] + r[2][1]) / 3.0];
        let (p, _) = sol.p.eval_vector(*c, xi)?;
        let (z, _) = sol.z.eval_scalar(*c, xi)?;
        zs.push(z);
        let _ = writeln!(s, "{} {} 0", p[0], p[1]);
    }
    s.push_str("SCALARS z double 1\nLOOKUP_TABLE default\n");
    for z in zs {
        let _ = writeln!(s, "{z}");
    }
    Ok(s)
}

pub fn export_vtk(sol: &MixedSolution, path: &Path) -> Result<()> {
    std::fs::write(path, vtk_string(sol)?).map_err(|e| Error::io(path, e))
}
