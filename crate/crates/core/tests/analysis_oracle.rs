//! Error norms and reporting utilities against closed-form integrals.

use std::sync::Arc;

use pdfem::analysis::{
    broken_norm_1h, convergence_rates, error_norms, l2_norm_scalar, l2_norm_vector, triple_norm_flux_only,
    vtk_string, ConvergenceTable, ErrorReport,
};
use pdfem::mesh::build_structured_rect;
use pdfem::problems::{manufactured_poly, PolyData};
use pdfem::spaces::{dg_l2_project, nodal_interpolate, rt_interpolate, FeSpace, SpaceKind};
use pdfem::{solve_case, BoundaryTag, Mesh, SolveOptions, Vec2};

fn tagged_mesh(n: usize, tag: BoundaryTag) -> Arc<Mesh> {
    let mut m = build_structured_rect(n, n, 0.0, 1.0, 0.0, 1.0).unwrap();
    m.tag_boundary(|_, _| Some(tag)).unwrap();
    Arc::new(m)
}

#[test]
fn error_of_the_zero_field_is_the_norm_of_the_exact_solution() {
    // u = x + y, β = (1, 1), A = I, μ = 1, so p = (x + y − 1)(1, 1) and ∇·p = 2
    let n = 4;
    let case = manufactured_poly(1, PolyData::standard(1)).unwrap();
    let mut sol = solve_case(&case, n, &SolveOptions::order(1)).unwrap();
    sol.u.coeffs.fill(0.0);
    sol.p.coeffs.fill(0.0);
    sol.z.coeffs.fill(0.0);
    let r = error_norms(&sol, &case, None).unwrap();
    let close = |a: Option<f64>, b: f64| (a.unwrap() - b).abs() < 1e-12 * b;
    assert!(close(r.l2_u, (7.0f64 / 6.0).sqrt()));
    assert!(close(r.h1_semi_u, 2f64.sqrt()));
    assert!(close(r.h1_u, (7.0f64 / 6.0 + 2.0).sqrt()));
    assert!(close(r.l2_p, (1.0f64 / 3.0).sqrt()));
    assert!(close(r.div_p, 2.0));
    assert!(close(r.streamline, 2.0));
    // only the h(∇·p + μu) part survives: h² ∫ (2 + x + y)² = h² 55/6
    let h = 2f64.sqrt() / n as f64;
    assert!(close(r.triple_norm, h * (55.0f64 / 6.0).sqrt()));
    assert_eq!(r.l2_z, 0.0);
    assert_eq!(r.z_broken, 0.0);
}

#[test]
fn exact_discrete_solution_has_zero_error() {
    let case = manufactured_poly(1, PolyData::standard(1)).unwrap();
    let sol = solve_case(&case, 4, &SolveOptions::order(1)).unwrap();
    let r = error_norms(&sol, &case, Some(8)).unwrap();
    for v in [r.l2_u, r.h1_u, r.l2_p, r.div_p] {
        assert!(v.unwrap() < 1e-11, "{v:?}");
    }
}

#[test]
fn plain_norms_of_interpolated_fields() {
    let mesh = tagged_mesh(5, BoundaryTag::Dirichlet);
    for k in 1..=2 {
        let lag = Arc::new(FeSpace::new(mesh.clone(), SpaceKind::Lagrange, k).unwrap());
        let x = nodal_interpolate(&lag, |p| p[0]).unwrap();
        assert!((l2_norm_scalar(&x).unwrap() - (1.0f64 / 3.0).sqrt()).abs() < 1e-13);
        let rt = Arc::new(FeSpace::new(mesh.clone(), SpaceKind::RaviartThomas, k).unwrap());
        // (x, 0) lies in RT_k for every k ≥ 1 on this mesh family
        let q = rt_interpolate(&rt, |p| Vec2::new(p[0], 0.0), 6).unwrap();
        assert!((l2_norm_vector(&q).unwrap() - (1.0f64 / 3.0).sqrt()).abs() < 1e-12);
        // ‖q‖² + h²‖∇·q‖² with ∇·q = 1 and h = √2/5
        let h2: f64 = 2.0 / 25.0;
        assert!((triple_norm_flux_only(&q).unwrap() - (1.0 / 3.0 + h2).sqrt()).abs() < 1e-12);
    }
}

#[test]
fn broken_norm_counts_boundary_traces_on_non_neumann_faces() {
    let n = 6;
    for k in 1..=2 {
        let closed = tagged_mesh(n, BoundaryTag::Neumann);
        let dg = Arc::new(FeSpace::new(closed, SpaceKind::Discontinuous, k).unwrap());
        let x = dg_l2_project(&dg, |p| p[0], 4).unwrap();
        assert!((broken_norm_1h(&x).unwrap() - 1.0).abs() < 1e-12);
        let one = dg_l2_project(&dg, |_| 1.0, 2).unwrap();
        assert!(broken_norm_1h(&one).unwrap() < 1e-12);

        let open = tagged_mesh(n, BoundaryTag::Dirichlet);
        let dg = Arc::new(FeSpace::new(open, SpaceKind::Discontinuous, k).unwrap());
        let x = dg_l2_project(&dg, |p| p[0], 4).unwrap();
        // faces on x = 1 add 1 each, faces on y = 0 and y = 1 add n ∫ x² = n/3 per side
        let oracle = (1.0 + 5.0 * n as f64 / 3.0).sqrt();
        assert!((broken_norm_1h(&x).unwrap() - oracle).abs() < 1e-12);
    }
    // a continuous field only jumps across the boundary
    let open = tagged_mesh(n, BoundaryTag::Dirichlet);
    let lag = Arc::new(FeSpace::new(open.clone(), SpaceKind::Lagrange, 1).unwrap());
    let x = nodal_interpolate(&lag, |p| p[0]).unwrap();
    assert!((broken_norm_1h(&x).unwrap() - (1.0 + 5.0 * n as f64 / 3.0).sqrt()).abs() < 1e-12);
    let rt = Arc::new(FeSpace::new(open, SpaceKind::RaviartThomas, 1).unwrap());
    let q = rt_interpolate(&rt, |p| Vec2::new(p[0], 0.0), 2).unwrap();
    assert!(broken_norm_1h(&q).unwrap_err().is_configuration());
}

#[test]
fn rates_of_geometric_sequences() {
    let e: Vec<f64> = (0..5).map(|i| 3.0 * 0.25f64.powi(i)).collect();
    let r = convergence_rates(&e);
    assert_eq!(r[0], None);
    assert!(r[1..].iter().all(|v| (v.unwrap() - 2.0).abs() < 1e-14));
}

#[test]
fn convergence_table_layout() {
    let mut t = ConvergenceTable::default();
    let row = |s: f64| ErrorReport { l2_u: Some(s), h1_u: Some(2.0 * s), l2_z: 0.0, ..Default::default() };
    t.push(0.25, row(1.0)).unwrap();
    t.push(0.125, row(0.5)).unwrap();
    assert!(t.push(0.1, row(0.25)).unwrap_err().is_configuration());
    t.push(0.0625, row(0.25)).unwrap();
    let csv = t.to_csv();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 4);
    assert!(lines[0].starts_with("h,e_l2_u,rate,e_h1_u,rate,e_l2_p,rate"));
    let cells: Vec<&str> = lines[2].split(',').collect();
    assert_eq!(cells.len(), 13);
    assert_eq!(cells[1], "5.000e-1");
    assert_eq!(cells[2], "1.000e0");
    // missing flux errors and zero multiplier errors leave blank rates
    assert_eq!(cells[5], "");
    assert_eq!(cells[6], "");
    assert_eq!(cells[11], "0.000e0");
    assert_eq!(cells[12], "");
}

#[test]
fn vtk_sizes() {
    let case = manufactured_poly(2, PolyData::standard(2)).unwrap();
    for k in 1..=2 {
        let sol = solve_case(&case, 3, &SolveOptions::order(k)).unwrap();
        let s = vtk_string(&sol).unwrap();
        let mesh = sol.mesh();
        let points = if k == 1 { mesh.n_vertices() } else { mesh.n_vertices() + mesh.n_faces() };
        let cells = mesh.n_cells() * if k == 1 { 1 } else { 4 };
        assert!(s.contains(&format!("POINTS {points} double")));
        assert!(s.contains(&format!("CELLS {cells} {}", 4 * cells)));
        assert!(s.contains(&format!("CELL_DATA {cells}")));
        assert_eq!(s.lines().filter(|l| *l == "5").count(), cells);
    }
}

#[test]
fn file_output() {
    let dir = tempfile::tempdir().unwrap();
    let case = manufactured_poly(1, PolyData::standard(1)).unwrap();
    let sol = solve_case(&case, 2, &SolveOptions::order(1)).unwrap();
    let vtk = dir.path().join("u.vtk");
    pdfem::analysis::export_vtk(&sol, &vtk).unwrap();
    assert_eq!(std::fs::read_to_string(&vtk).unwrap(), vtk_string(&sol).unwrap());
    let mut t = ConvergenceTable::default();
    t.push(0.5, error_norms(&sol, &case, None).unwrap()).unwrap();
    let csv = dir.path().join("t.csv");
    pdfem::analysis::write_csv(&t, &csv).unwrap();
    assert_eq!(std::fs::read_to_string(&csv).unwrap(), t.to_csv());
    let missing = dir.path().join("no/such/dir/t.csv");
    assert!(matches!(pdfem::analysis::write_csv(&t, &missing), Err(pdfem::Error::Io { .. })));
}
