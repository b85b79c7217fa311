//! Benchmark data checked against independently written formulas and
//! finite-difference PDE residuals.

use pdfem::problems::{by_name, example1, example2, example3, example4, halton, manufactured_poly, PolyData};
use pdfem::{BoundaryTag, Vec2};

const STEP: f64 = 1e-4;

fn laplacian(u: &dyn Fn(Vec2) -> f64, x: Vec2) -> f64 {
    let (ex, ey) = (Vec2::new(STEP, 0.0), Vec2::new(0.0, STEP));
    (u(x + ex) + u(x - ex) + u(x + ey) + u(x - ey) - 4.0 * u(x)) / (STEP * STEP)
}

fn gradient(u: &dyn Fn(Vec2) -> f64, x: Vec2) -> Vec2 {
    let (ex, ey) = (Vec2::new(STEP, 0.0), Vec2::new(0.0, STEP));
    Vec2::new(u(x + ex) - u(x - ex), u(x + ey) - u(x - ey)) / (2.0 * STEP)
}

fn samples(n: usize, x0: f64, x1: f64, y0: f64, y1: f64) -> impl Iterator<Item = Vec2> {
    (1..=n).map(move |i| Vec2::new(x0 + (x1 - x0) * halton(i, 2), y0 + (y1 - y0) * halton(i, 3)))
}

#[test]
fn ex1_solution_and_source() {
    let eps = 0.2;
    let case = example1(eps).unwrap();
    let ex = case.exact.as_ref().unwrap();
    let pi = std::f64::consts::PI;
    let oracle = |x: Vec2| {
        (1.0 - (-(1.0 - x[0]) / eps).exp()) * (1.0 - (-(1.0 - x[1]) / eps).exp()) * (pi * (x[0] + x[1])).cos()
    };
    for x in samples(200, -0.99, 0.99, -0.99, 0.99) {
        assert!(((ex.u)(x) - oracle(x)).abs() < 1e-14);
        // -εΔu + β·∇u = f with β = (2, 1)
        let f = (case.problem.source)(x);
        let lhs = -eps * laplacian(&oracle, x) + Vec2::new(2.0, 1.0).dot(&gradient(&oracle, x));
        assert!((lhs - f).abs() < 1e-4 * (1.0 + f.abs()), "at {x:?}: {lhs} vs {f}");
    }
    // homogeneous on the outflow sides
    for t in [-0.7, 0.0, 0.3] {
        assert!((ex.u)(Vec2::new(1.0, t)).abs() < 1e-15);
        assert!((ex.u)(Vec2::new(t, 1.0)).abs() < 1e-15);
    }
}

#[test]
fn ex2_is_harmonic_and_vanishes_on_the_reentrant_edges() {
    let case = example2();
    let ex = case.exact.as_ref().unwrap();
    let u = |x: Vec2| (ex.u)(x);
    for x in samples(300, -0.95, 0.95, -0.95, 0.95) {
        if (x[0] > -0.05 && x[1] < 0.05) || x.norm() < 0.1 {
            continue;
        }
        assert!(laplacian(&u, x).abs() < 1e-5, "at {x:?}");
        assert!((gradient(&u, x) - (ex.grad_u)(x)).norm() < 1e-7);
    }
    for t in [0.1, 0.5, 0.9] {
        assert!(u(Vec2::new(t, 0.0)).abs() < 1e-15);
        assert!(u(Vec2::new(0.0, -t)).abs() < 1e-12);
    }
    // r^{2/3} sin(2θ/3) at θ = π/2
    assert!((u(Vec2::new(0.0, 0.5)) - 0.5f64.powf(2.0 / 3.0) * (std::f64::consts::PI / 3.0).sin()).abs() < 1e-15);
    assert!((case.domain.build_mesh(4).unwrap().area() - 3.0).abs() < 1e-14);
}

#[test]
fn ex3_transport_equation_and_boundary_split() {
    let delta = 0.5;
    let case = example3(delta).unwrap();
    let ex = case.exact.as_ref().unwrap();
    let beta = |x: Vec2| (case.problem.beta)(x);
    for x in samples(200, 0.01, 0.99, 0.01, 0.99) {
        // β·∇u + σu = 0 with σ = 0.1, and β is divergence free
        let u = |y: Vec2| (ex.u)(y);
        let r = beta(x).dot(&gradient(&u, x)) + 0.1 * u(x);
        assert!(r.abs() < 1e-6, "at {x:?}: {r}");
        let div = gradient(&|y| beta(y)[0], x)[0] + gradient(&|y| beta(y)[1], x)[1];
        assert!(div.abs() < 1e-8);
        assert!((beta(x).norm() - 1.0).abs() < 1e-14);
    }
    let mut mesh = case.build_mesh(4).unwrap();
    let rule = case.boundary_rule();
    mesh.tag_boundary(|m, n| rule(m, n)).unwrap();
    for f in mesh.boundary_faces() {
        let mid = mesh.face_midpoint(f);
        let bn = beta(mid).dot(&mesh.face_normal(f));
        let tag = mesh.boundary_tag(f).unwrap();
        assert_eq!(tag, if bn < 0.0 { BoundaryTag::Inflow } else { BoundaryTag::Outflow });
    }
}

#[test]
fn ex4_boundary_data() {
    let case = example4(0.001).unwrap();
    assert!(case.exact.is_none());
    let g = case.problem.dirichlet.clone().unwrap();
    assert_eq!(g(Vec2::new(0.0, 0.0)), 1.0);
    assert_eq!(g(Vec2::new(0.0, 1.0)), 1.0);
    assert_eq!(g(Vec2::new(0.0, 0.4)), 1.0);
    assert_eq!(g(Vec2::new(0.4, 0.0)), 0.0);
    assert_eq!(g(Vec2::new(1.0, 0.4)), 0.0);
    assert_eq!(g(Vec2::new(0.4, 1.0)), 0.0);
}

#[test]
fn manufactured_source_matches_the_operator() {
    for k in 1..=2 {
        let data = PolyData::standard(k);
        let case = manufactured_poly(k, data.clone()).unwrap();
        let u = |x: Vec2| data.u.eval(x);
        for x in samples(50, 0.05, 0.95, 0.05, 0.95) {
            // −∇·(A∇u) + β·∇u + μu with a central-difference Hessian
            let h = STEP;
            let d = |i: usize, j: usize| {
                let (ei, ej) = (Vec2::ith(i, h), Vec2::ith(j, h));
                (u(x + ei + ej) - u(x + ei - ej) - u(x - ei + ej) + u(x - ei - ej)) / (4.0 * h * h)
            };
            let a = data.diffusion;
            let div_a_grad = a[(0, 0)] * d(0, 0) + 2.0 * a[(0, 1)] * d(0, 1) + a[(1, 1)] * d(1, 1);
            let lhs = -div_a_grad + data.beta.dot(&gradient(&u, x)) + data.mu * u(x);
            let f = (case.problem.source)(x);
            assert!((lhs - f).abs() < 1e-6 * (1.0 + f.abs()), "k={k} at {x:?}");
        }
    }
}

#[test]
fn lookup_and_parameter_validation() {
    assert_eq!(by_name("ex3", None, Some(0.5), 1).unwrap().params.delta, Some(0.5));
    assert_eq!(by_name("ex4", None, None, 1).unwrap().params.epsilon, Some(0.001));
    assert!(by_name("ex5", None, None, 1).unwrap_err().is_configuration());
    assert!(example1(0.0).is_err());
    assert!(example1(f64::NAN).is_err());
    assert!(example3(-1.0).is_err());
    let mut quad = PolyData::standard(2);
    quad.u = pdfem::problems::Polynomial::new(vec![(2, 0, 1.0)]);
    assert!(manufactured_poly(1, quad).is_err());
}
