//! Built-in property suite: quadrature exactness, the commuting diagram of
//! the RT interpolant, matrix symmetry, polynomial reproduction, local
//! conservation, stability of the gradient reconstruction and
//! reproducibility of the assembly.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::analysis::{conservation_residual, error_norms, eta_stability_ratio};
use crate::assembly::{assemble_system, AssemblyOptions, MixedSpaces, Variant};
use crate::error::Result;
use crate::mesh::{build_structured_rect, Mesh};
use crate::problems::{example1, example3, manufactured_poly, PolyData};
use crate::quadrature::{edge_rule, triangle_monomial_integral, triangle_rule, EdgeRule, TriangleRule};
use crate::solver::{solve_case, SolveOptions};
use crate::spaces::{dg_l2_project, rt_interpolate, FeSpace, FieldCoeffs, SpaceKind};
use crate::Vec2;

/// Source of quadrature rules checked by the suite.
pub trait QuadratureProvider: Sync {
    fn triangle(&self, degree: usize) -> Result<TriangleRule>;
    fn edge(&self, degree: usize) -> Result<EdgeRule>;
}

/// The rules of [`crate::quadrature`].
#[derive(Debug, Clone, Copy, Default)]
pub struct StandardQuadrature;

impl QuadratureProvider for StandardQuadrature {
    fn triangle(&self, degree: usize) -> Result<TriangleRule> {
        triangle_rule(degree)
    }

    fn edge(&self, degree: usize) -> Result<EdgeRule> {
        edge_rule(degree)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

/// Names of the checks run by [`run_suite`], in order.
pub const CHECKS: [&str; 8] = [
    "quadrature-exactness",
    "commuting-diagram",
    "symmetry",
    "polynomial-exactness",
    "conservation",
    "first-block-optimality",
    "eta-stability",
    "assembly-reproducibility",
];

fn check(name: &'static str, f: impl FnOnce() -> Result<(bool, String)>) -> CheckResult {
    match f() {
        Ok((passed, detail)) => CheckResult { name, passed, detail },
        Err(e) => CheckResult { name, passed: false, detail: format!("error: {e}") },
    }
}

/// Largest relative error over monomials up to each rule's degree.
pub fn quadrature_defect(q: &dyn QuadratureProvider) -> Result<f64> {
    let mut worst = 0.0f64;
    for d in 1..=crate::quadrature::MAX_TRIANGLE_DEGREE {
        let r = q.triangle(d)?;
        for a in 0..=d as u32 {
            for b in 0..=(d as u32 - a) {
                let v: f64 = r.iter().map(|(p, w)| w * p[0].powi(a as i32) * p[1].powi(b as i32)).sum();
                let exact = triangle_monomial_integral(a, b);
                worst = worst.max(((v - exact) / exact).abs());
            }
        }
    }
    for d in 1..=crate::quadrature::MAX_EDGE_DEGREE {
        let r = q.edge(d)?;
        for a in 0..=d as i32 {
            let v: f64 = r.iter().map(|(t, w)| w * t.powi(a)).sum();
            worst = worst.max((v * (a as f64 + 1.0) - 1.0).abs());
        }
    }
    Ok(worst)
}

/// `‖∇·R_h q − π_{X,l}(∇·q)‖` for `q` with random polynomial components
/// of degree `l + 1`, maximised over `samples` draws.
pub fn commuting_diagram_defect(mesh: &Arc<Mesh>, l: usize, samples: usize, seed: u64) -> Result<f64> {
    let rt = Arc::new(FeSpace::new(mesh.clone(), SpaceKind::RaviartThomas, l)?);
    let dg = Arc::new(FeSpace::new(mesh.clone(), SpaceKind::Discontinuous, l)?);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let deg = l as i32 + 1;
    let rule = triangle_rule(2 * l + 4)?;
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let mut terms = Vec::new();
        for a in 0..=deg {
            for b in 0..=(deg - a) {
                terms.push((a, b, rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
            }
        }
        let q = |p: Vec2| {
            terms
                .iter()
                .fold(Vec2::zeros(), |acc, &(a, b, c0, c1)| acc + Vec2::new(c0, c1) * p[0].powi(a) * p[1].powi(b))
        };
        let div_q = |p: Vec2| {
            terms.iter().fold(0.0, |acc, &(a, b, c0, c1)| {
                let dx = if a > 0 { a as f64 * p[0].powi(a - 1) * p[1].powi(b) } else { 0.0 };
                let dy = if b > 0 { b as f64 * p[0].powi(a) * p[1].powi(b - 1) } else { 0.0 };
                acc + c0 * dx + c1 * dy
            })
        };
        let rq = rt_interpolate(&rt, q, 2 * l + 4)?;
        let pd = dg_l2_project(&dg, div_q, 2 * l + 4)?;
        let vt = rt.tabulate_vector(&rule.points)?;
        let st = dg.tabulate_scalar(&rule.points)?;
        let mut e = 0.0;
        for k in 0..mesh.n_cells() {
            let geo = mesh.geometry(k);
            let (_, d) = rq.vector_on_cell(k, &vt, &geo);
            let (v, _) = pd.scalar_on_cell(k, &st, &geo);
            for (i, (_, w)) in rule.iter().enumerate() {
                e += w * geo.det.abs() * (d[i] - v[i]).powi(2);
            }
        }
        worst = worst.max(e.sqrt());
    }
    Ok(worst)
}

/// Largest `‖η_h(x)‖ / ‖x‖_{1,h}` over random DG fields of order `m` on
/// the unit square with `n` cells per side.
pub fn eta_ratio_sample(n: usize, m: usize, samples: usize, seed: u64) -> Result<f64> {
    let mut mesh = build_structured_rect(n, n, 0.0, 1.0, 0.0, 1.0)?;
    mesh.tag_boundary(|_, _| Some(crate::BoundaryTag::Dirichlet))?;
    let dg = Arc::new(FeSpace::new(Arc::new(mesh), SpaceKind::Discontinuous, m)?);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let c = (0..dg.n_dofs()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        worst = worst.max(eta_stability_ratio(&FieldCoeffs::new(dg.clone(), c)?)?);
    }
    Ok(worst)
}

/// Runs every check; the CLI exits with success only if all pass.
pub fn run_suite(q: &dyn QuadratureProvider) -> Vec<CheckResult> {
    let mut out = Vec::new();
    out.push(check("quadrature-exactness", || {
        let d = quadrature_defect(q)?;
        Ok((d <= 1e-12, format!("max relative monomial error {d:.2e}")))
    }));
    out.push(check("commuting-diagram", || {
        let mesh = Arc::new(build_structured_rect(4, 3, -1.0, 1.0, 0.0, 1.5)?);
        let mut worst = 0.0f64;
        for l in 0..=2 {
            worst = worst.max(commuting_diagram_defect(&mesh, l, 20, 7 + l as u64)?);
        }
        Ok((worst <= 1e-10, format!("max ‖∇·R_h q − π(∇·q)‖ = {worst:.2e} over 60 fields")))
    }));
    out.push(check("symmetry", || {
        let mut worst = 0.0f64;
        for (k, variant) in [(1, Variant::Standard), (2, Variant::WeakBc), (1, Variant::Weighted)] {
            let case = example1(0.1)?.with_variant(variant)?;
            let mesh = Arc::new(case.build_mesh(8)?);
            let spaces = MixedSpaces::new(mesh, k)?;
            let sys = assemble_system(&spaces, &case.problem, &AssemblyOptions::default())?;
            worst = worst.max(sys.symmetry_defect());
        }
        Ok((worst <= 1e-12, format!("max relative asymmetry {worst:.2e}")))
    }));
    out.push(check("polynomial-exactness", || {
        let mut worst = 0.0f64;
        for k in 1..=2 {
            for neumann in [false, true] {
                let mut data = PolyData::standard(k);
                data.neumann_east = neumann;
                let case = manufactured_poly(k, data)?;
                let sol = solve_case(&case, 4, &SolveOptions::order(k))?;
                let r = error_norms(&sol, &case, None)?;
                for v in [r.l2_u, r.h1_u, r.l2_p, r.div_p].into_iter().flatten().chain([r.l2_z]) {
                    worst = worst.max(v);
                }
            }
        }
        Ok((worst <= 1e-8, format!("largest error {worst:.2e}")))
    }));
    out.push(check("conservation", || {
        let mut worst = 0.0f64;
        for (case, k) in [(example1(1.0)?, 1), (example3(1.0)?, 2)] {
            let sol = solve_case(&case, 8, &SolveOptions::order(k))?;
            worst = worst.max(conservation_residual(&sol, &case.problem)?.relative());
        }
        Ok((worst <= 1e-8, format!("max relative moment {worst:.2e}")))
    }));
    out.push(check("first-block-optimality", || {
        let case = example1(1.0)?;
        let mesh = Arc::new(case.build_mesh(8)?);
        let spaces = MixedSpaces::new(mesh, 1)?;
        let sys = assemble_system(&spaces, &case.problem, &AssemblyOptions::default())?;
        let x = crate::solver::solve_system(&sys, None)?.x;
        let r = crate::assembly::spmv(&sys.matrix, &x);
        let mut fixed = vec![false; sys.n()];
        for &(d, _) in &sys.constraints {
            fixed[d] = true;
        }
        let worst = (0..sys.n())
            .filter(|&i| !fixed[i])
            .map(|i| (r[i] - sys.rhs[i]).abs())
            .fold(0.0f64, f64::max);
        let scale = sys.rhs.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        Ok((worst <= 1e-10 * scale.max(1.0), format!("max free-row residual {worst:.2e}")))
    }));
    out.push(check("eta-stability", || {
        let ratios: Vec<f64> = [4, 8, 16].iter().map(|&n| eta_ratio_sample(n, 1, 10, 3)).collect::<Result<_>>()?;
        let lo = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = ratios.iter().cloned().fold(0.0, f64::max);
        let drift = (hi - lo) / lo;
        Ok((drift < 0.25, format!("ratios {ratios:.3?}, drift {:.1}%", 100.0 * drift)))
    }));
    out.push(check("assembly-reproducibility", || {
        let case = example1(0.05)?;
        let mesh = Arc::new(case.build_mesh(16)?);
        let spaces = MixedSpaces::new(mesh, 2)?;
        let seq = assemble_system(&spaces, &case.problem, &AssemblyOptions { parallel: false, ..Default::default() })?;
        let par = assemble_system(&spaces, &case.problem, &AssemblyOptions { parallel: true, ..Default::default() })?;
        let same = seq.matrix.val() == par.matrix.val() && seq.rhs == par.rhs;
        Ok((same, if same { "parallel and sequential assembly agree bitwise".into() } else { "assemblies differ".into() }))
    }));
    out
}
