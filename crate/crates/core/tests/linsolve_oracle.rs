//! Sparse solves against dense nalgebra factorizations.

use std::sync::Arc;

use faer::sparse::{SparseColMat, Triplet};
use nalgebra::{DMatrix, DVector};
use pdfem::assembly::{assemble_system, AssemblyOptions, MixedSpaces, SparseMatrix};
use pdfem::linsolve::{factorize, factorize_saddle, solve, Backend};
use pdfem::problems::{example1, example3};
use pdfem::{solve_system, Error};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn to_sparse(d: &DMatrix<f64>) -> SparseMatrix {
    let mut t = Vec::new();
    for j in 0..d.ncols() {
        for i in 0..d.nrows() {
            if d[(i, j)] != 0.0 {
                t.push(Triplet::new(i, j, d[(i, j)]));
            }
        }
    }
    SparseColMat::try_new_from_triplets(d.nrows(), d.ncols(), &t).unwrap()
}

fn random_spd(n: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    // sparse random factor so the result has a nontrivial pattern
    let r = DMatrix::from_fn(n, n, |_, _| if rng.gen_bool(0.15) { rng.gen_range(-1.0..1.0) } else { 0.0 });
    r.transpose() * &r + DMatrix::identity(n, n) * 0.5
}

/// `[[A, Bᵀ], [B, 0]]` with `A` positive definite and `B` of full row rank.
fn random_saddle(n: usize, m: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let a = random_spd(n, rng);
    let mut b = DMatrix::from_fn(m, n, |_, _| if rng.gen_bool(0.3) { rng.gen_range(-1.0..1.0) } else { 0.0 });
    for i in 0..m {
        b[(i, i)] += 2.0;
    }
    let mut k = DMatrix::zeros(n + m, n + m);
    k.view_mut((0, 0), (n, n)).copy_from(&a);
    k.view_mut((n, 0), (m, n)).copy_from(&b);
    k.view_mut((0, n), (n, m)).copy_from(&b.transpose());
    k
}

fn rel_err(x: &[f64], y: &DVector<f64>) -> f64 {
    let num: f64 = x.iter().zip(y.iter()).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
    num / y.norm()
}

#[test]
fn spd_matches_dense_cholesky_on_random_probes() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let a = random_spd(50, &mut rng);
    let chol = a.clone().cholesky().unwrap();
    let f = factorize(&to_sparse(&a)).unwrap();
    assert_eq!(f.backend(), Backend::Lu);
    for _ in 0..10 {
        let b = DVector::from_fn(50, |_, _| rng.gen_range(-1.0..1.0));
        let x = f.solve(b.as_slice()).unwrap();
        assert!(rel_err(&x, &chol.solve(&b)) < 1e-12);
    }
}

#[test]
fn saddle_backends_match_dense_lu() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let k = random_saddle(40, 12, &mut rng);
    let lu = k.clone().lu();
    let sparse = to_sparse(&k);
    let direct = factorize(&sparse).unwrap();
    let penalty = factorize_saddle(&sparse, 40).unwrap();
    assert_eq!(penalty.backend(), Backend::IteratedPenalty);
    assert!(penalty.stats.rho.unwrap() > 0.0);
    for _ in 0..10 {
        let b = DVector::from_fn(52, |_, _| rng.gen_range(-1.0..1.0));
        let oracle = lu.solve(&b).unwrap();
        assert!(rel_err(&direct.solve(b.as_slice()).unwrap(), &oracle) < 1e-11);
        let (x, rep) = penalty.solve_with_report(b.as_slice()).unwrap();
        assert!(rel_err(&x, &oracle) < 1e-9, "penalty error {}", rel_err(&x, &oracle));
        assert!(rep.residual <= 1e-10 && rep.iterations >= 1);
    }
}

#[test]
fn scaling_equivariance() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let k = random_saddle(20, 5, &mut rng);
    let b: Vec<f64> = (0..25).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let x = solve(&to_sparse(&k), &b).unwrap();
    let alpha = 1e3;
    let scaled = solve(&to_sparse(&(k.clone() * alpha)), &b).unwrap();
    let rhs_scaled = solve(&to_sparse(&k), &b.iter().map(|v| v * alpha).collect::<Vec<_>>()).unwrap();
    for i in 0..25 {
        assert!((scaled[i] * alpha - x[i]).abs() <= 1e-10 * x[i].abs().max(1.0));
        assert!((rhs_scaled[i] / alpha - x[i]).abs() <= 1e-10 * x[i].abs().max(1.0));
    }
}

#[test]
fn repeated_solves_are_bitwise_identical() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let k = to_sparse(&random_saddle(30, 8, &mut rng));
    let b: Vec<f64> = (0..38).map(|_| rng.gen_range(-1.0..1.0)).collect();
    for backend in [Backend::Lu, Backend::IteratedPenalty] {
        let run = || match backend {
            Backend::Lu => factorize(&k).unwrap().solve(&b).unwrap(),
            Backend::IteratedPenalty => factorize_saddle(&k, 30).unwrap().solve(&b).unwrap(),
        };
        assert_eq!(run(), run());
    }
}

#[test]
fn bad_inputs_are_reported() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let k = to_sparse(&random_spd(6, &mut rng));
    let f = factorize(&k).unwrap();
    assert!(f.solve(&[1.0, f64::NAN, 0.0, 0.0, 0.0, 0.0]).is_err());
    assert_eq!(f.solve(&[0.0; 6]).unwrap(), vec![0.0; 6]);
    // rank-deficient constraint rows
    let mut s = random_saddle(6, 2, &mut rng);
    let row = s.row(6).clone_owned();
    s.row_mut(7).copy_from(&row);
    let col = s.column(6).clone_owned();
    s.column_mut(7).copy_from(&col);
    let rhs: Vec<f64> = (0..8).map(|i| i as f64 + 1.0).collect();
    let r = factorize(&to_sparse(&s)).and_then(|f| f.solve(&rhs));
    assert!(matches!(r, Err(Error::SingularMatrix { .. } | Error::SolverAccuracy { .. })), "{r:?}");
    assert!(factorize_saddle(&to_sparse(&s), 6).and_then(|f| f.solve(&rhs)).is_err());
    // not a saddle-point matrix: nonzero trailing block
    let mut t = random_saddle(6, 2, &mut rng);
    t[(7, 7)] = 1.0;
    assert!(factorize_saddle(&to_sparse(&t), 6).is_err());
}

#[test]
fn backends_agree_on_assembled_systems() {
    for (case, k) in [(example1(0.05).unwrap(), 1), (example3(1.0).unwrap(), 2)] {
        let spaces = MixedSpaces::new(Arc::new(case.build_mesh(6).unwrap()), k).unwrap();
        let sys = assemble_system(&spaces, &case.problem, &AssemblyOptions::default()).unwrap();
        let lu = solve_system(&sys, Some(Backend::Lu)).unwrap();
        let pen = solve_system(&sys, Some(Backend::IteratedPenalty)).unwrap();
        assert_eq!(pen.backend, Backend::IteratedPenalty);
        let scale = lu.x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let diff = lu.x.iter().zip(&pen.x).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        assert!(diff <= 1e-9 * scale, "{}: {diff:e}", case.id);
        let auto = solve_system(&sys, None).unwrap();
        assert_eq!(auto.backend, Backend::Lu);
    }
}
