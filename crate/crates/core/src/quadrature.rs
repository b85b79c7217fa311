//! Gauss quadrature on the reference edge `[0, 1]` and the reference triangle
//! `{(ξ, η) : ξ, η ≥ 0, ξ + η ≤ 1}`.
//!
//! Triangle rules of degree ≥ 2 are conical (collapsed) products of
//! Gauss–Legendre rules: the square `[0,1]²` is mapped onto the triangle by
//! `(s, t) ↦ (s, t(1 − s))`, whose Jacobian `1 − s` raises the polynomial
//! degree in `s` by one. All weights are positive and no node lies on the
//! boundary of the triangle.

use crate::error::{Error, Result};

/// Highest total degree supported by [`triangle_rule`].
pub const MAX_TRIANGLE_DEGREE: usize = 14;
/// Highest degree supported by [`edge_rule`].
pub const MAX_EDGE_DEGREE: usize = 41;

/// Quadrature rule on the unit interval.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeRule {
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
}

/// Quadrature rule on the reference triangle. Weights sum to 1/2.
#[derive(Debug, Clone, PartialEq)]
pub struct TriangleRule {
    pub points: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
}

impl EdgeRule {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.points.iter().copied().zip(self.weights.iter().copied())
    }
}

impl TriangleRule {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = ([f64; 2], f64)> + '_ {
        self.points.iter().copied().zip(self.weights.iter().copied())
    }
}

/// Gauss–Legendre nodes and weights on `[-1, 1]` with `n` points.
///
/// Newton iteration on the three-term recurrence, started from the
/// Chebyshev-like asymptotic guesses.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, z);
        if d != 0.0 {
            dp = d;
        }
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

fn legendre_with_derivative(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    let dp = nf * (z * p1 - p0) / (z * z - 1.0);
    (p1, dp)
}

/// Gauss–Legendre rule on `[0, 1]` exact for polynomials of degree ≤ `degree`.
pub fn edge_rule(degree: usize) -> Result<EdgeRule> {
    if degree == 0 || degree > MAX_EDGE_DEGREE {
        return Err(Error::InvalidArgument(format!(
            "edge quadrature degree {degree} outside 1..={MAX_EDGE_DEGREE}"
        )));
    }
    let n = (degree + 2) / 2;
    let (x, w) = gauss_legendre(n);
    Ok(EdgeRule {
        points: x.iter().map(|&t| 0.5 * (t + 1.0)).collect(),
        weights: w.iter().map(|&wi| 0.5 * wi).collect(),
    })
}

/// Rule on the reference triangle exact for total degree ≤ `degree`.
pub fn triangle_rule(degree: usize) -> Result<TriangleRule> {
    if degree == 0 || degree > MAX_TRIANGLE_DEGREE {
        return Err(Error::InvalidArgument(format!(
            "triangle quadrature degree {degree} outside 1..={MAX_TRIANGLE_DEGREE}"
        )));
    }
    if degree == 1 {
        return Ok(TriangleRule {
            points: vec![[1.0 / 3.0, 1.0 / 3.0]],
            weights: vec![0.5],
        });
    }
    // s-direction carries the extra Jacobian factor (1 - s).
    let ns = (degree + 3) / 2;
    let nt = (degree + 2) / 2;
    let (xs, ws) = gauss_legendre(ns);
    let (xt, wt) = gauss_legendre(nt);
    let mut points = Vec::with_capacity(ns * nt);
    let mut weights = Vec::with_capacity(ns * nt);
    for (&a, &wa) in xs.iter().zip(&ws) {
        let s = 0.5 * (a + 1.0);
        for (&b, &wb) in xt.iter().zip(&wt) {
            let t = 0.5 * (b + 1.0);
            points.push([s, t * (1.0 - s)]);
            weights.push(0.25 * wa * wb * (1.0 - s));
        }
    }
    Ok(TriangleRule { points, weights })
}

/// Composite rule for integrands singular at reference vertex `vertex`
/// (0, 1 or 2). The triangle is halved toward that vertex `levels` times;
/// every piece carries the rule of [`triangle_rule`]`(degree)`.
pub fn graded_triangle_rule(degree: usize, vertex: usize, levels: usize) -> Result<TriangleRule> {
    if vertex > 2 {
        return Err(Error::InvalidArgument(format!("reference vertex {vertex} outside 0..=2")));
    }
    let base = triangle_rule(degree)?;
    let corners = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
    let mid = |a: [f64; 2], b: [f64; 2]| [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])];
    let mut rule = TriangleRule { points: Vec::new(), weights: Vec::new() };
    let mut push = |[p0, p1, p2]: [[f64; 2]; 3]| {
        let (j0, j1) = ([p1[0] - p0[0], p1[1] - p0[1]], [p2[0] - p0[0], p2[1] - p0[1]]);
        let det = (j0[0] * j1[1] - j0[1] * j1[0]).abs();
        for (xi, w) in base.iter() {
            rule.points.push([p0[0] + j0[0] * xi[0] + j1[0] * xi[1], p0[1] + j0[1] * xi[0] + j1[1] * xi[1]]);
            rule.weights.push(w * det);
        }
    };
    let mut tri = [corners[vertex], corners[(vertex + 1) % 3], corners[(vertex + 2) % 3]];
    for _ in 0..levels {
        let [v, a, b] = tri;
        let (va, vb, ab) = (mid(v, a), mid(v, b), mid(a, b));
        push([va, a, ab]);
        push([vb, ab, b]);
        push([va, ab, vb]);
        tri = [v, va, vb];
    }
    push(tri);
    Ok(rule)
}

/// Exact integral of `ξ^a η^b` over the reference triangle: `a! b! / (a + b + 2)!`.
pub fn triangle_monomial_integral(a: u32, b: u32) -> f64 {
    let fact = |n: u32| (1..=n).fold(1.0_f64, |acc, k| acc * k as f64);
    fact(a) * fact(b) / fact(a + b + 2)
}

/// Shifted Legendre polynomial `L_j` on `[0, 1]` (orthogonal, `L_j(1) = 1`).
pub fn shifted_legendre(j: usize, t: f64) -> f64 {
    let z = 2.0 * t - 1.0;
    legendre_with_derivative(j, z).0
}
