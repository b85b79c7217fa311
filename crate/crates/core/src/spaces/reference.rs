//! Reference-element bases on the triangle with vertices (0,0), (1,0), (0,1).

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::quadrature::{edge_rule, shifted_legendre, triangle_rule};

pub(crate) const REF_VERTICES: [[f64; 2]; 3] = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];

/// Endpoints of reference edge `i` (opposite vertex `i`), in local order.
pub(crate) fn reference_edge(i: usize) -> ([f64; 2], [f64; 2]) {
    (REF_VERTICES[(i + 1) % 3], REF_VERTICES[(i + 2) % 3])
}

/// Nodal Lagrange basis of order 0, 1 or 2.
///
/// Order 2 nodes are the three vertices followed by the midpoints of the
/// local edges 0, 1, 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LagrangeBasis {
    pub order: usize,
}

impl LagrangeBasis {
    pub fn new(order: usize) -> Result<Self> {
        if order > 2 {
            return Err(Error::InvalidArgument(format!("Lagrange order {order} not supported")));
        }
        Ok(LagrangeBasis { order })
    }

    pub fn dim(&self) -> usize {
        (self.order + 1) * (self.order + 2) / 2
    }

    pub fn nodes(&self) -> Vec<[f64; 2]> {
        match self.order {
            0 => vec![[1.0 / 3.0, 1.0 / 3.0]],
            1 => REF_VERTICES.to_vec(),
            _ => {
                let mut n = REF_VERTICES.to_vec();
                for i in 0..3 {
                    let (a, b) = reference_edge(i);
                    n.push([0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])]);
                }
                n
            }
        }
    }

    /// Values and reference gradients at `xi`, appended to the output slices.
    pub fn eval(&self, xi: [f64; 2], values: &mut [f64], grads: &mut [[f64; 2]]) {
        let l = [1.0 - xi[0] - xi[1], xi[0], xi[1]];
        const DL: [[f64; 2]; 3] = [[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]];
        match self.order {
            0 => {
                values[0] = 1.0;
                grads[0] = [0.0, 0.0];
            }
            1 => {
                values[..3].copy_from_slice(&l);
                grads[..3].copy_from_slice(&DL);
            }
            _ => {
                for i in 0..3 {
                    values[i] = l[i] * (2.0 * l[i] - 1.0);
                    let s = 4.0 * l[i] - 1.0;
                    grads[i] = [s * DL[i][0], s * DL[i][1]];
                    let (j, k) = ((i + 1) % 3, (i + 2) % 3);
                    values[3 + i] = 4.0 * l[j] * l[k];
                    grads[3 + i] = [
                        4.0 * (l[j] * DL[k][0] + l[k] * DL[j][0]),
                        4.0 * (l[j] * DL[k][1] + l[k] * DL[j][1]),
                    ];
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum Spanning {
    /// `m e_c` with `m = ξ^a η^b`.
    Component { c: usize, a: i32, b: i32 },
    /// `x m` with homogeneous `m` of degree `l`.
    Radial { a: i32, b: i32 },
}

fn monomial(a: i32, b: i32, xi: [f64; 2]) -> f64 {
    xi[0].powi(a) * xi[1].powi(b)
}

fn monomials(max_degree: i32) -> Vec<(i32, i32)> {
    let mut out = Vec::new();
    for d in 0..=max_degree {
        for a in (0..=d).rev() {
            out.push((a, d - a));
        }
    }
    out
}

impl Spanning {
    fn eval(&self, xi: [f64; 2]) -> ([f64; 2], f64) {
        match *self {
            Spanning::Component { c, a, b } => {
                let m = monomial(a, b, xi);
                let div = if c == 0 {
                    if a > 0 { a as f64 * monomial(a - 1, b, xi) } else { 0.0 }
                } else if b > 0 {
                    b as f64 * monomial(a, b - 1, xi)
                } else {
                    0.0
                };
                let mut v = [0.0; 2];
                v[c] = m;
                (v, div)
            }
            Spanning::Radial { a, b } => {
                let m = monomial(a, b, xi);
                ([xi[0] * m, xi[1] * m], (2 + a + b) as f64 * m)
            }
        }
    }
}

/// Raviart–Thomas basis of order `l` on the reference triangle, dual to the
/// degrees of freedom
///
/// - `∫_{ê_i} φ·n̂_i L_j(t) dŝ` for each edge `i` and shifted Legendre
///   polynomial `L_j`, `j ≤ l`, with `t` running along the local edge order;
/// - `∫_K̂ φ·e_c m dξ` for `c ∈ {0, 1}` and monomials `m` of degree `< l`.
#[derive(Debug, Clone)]
pub struct RtBasis {
    pub order: usize,
    spanning: Vec<Spanning>,
    /// Column `k` holds the expansion of basis function `k` in `spanning`.
    coeffs: DMatrix<f64>,
}

impl RtBasis {
    pub fn new(order: usize) -> Result<Self> {
        if order > 2 {
            return Err(Error::InvalidArgument(format!("Raviart-Thomas order {order} not supported")));
        }
        let l = order as i32;
        let mut spanning = Vec::new();
        for (a, b) in monomials(l) {
            spanning.push(Spanning::Component { c: 0, a, b });
            spanning.push(Spanning::Component { c: 1, a, b });
        }
        for a in (0..=l).rev() {
            spanning.push(Spanning::Radial { a, b: l - a });
        }
        let n = spanning.len();
        debug_assert_eq!(n, (order + 1) * (order + 3));

        let erule = edge_rule(2 * order + 2)?;
        let trule = triangle_rule(2 * order + 2)?;
        let mut dofs = DMatrix::<f64>::zeros(n, n);
        for (col, psi) in spanning.iter().enumerate() {
            let mut row = 0;
            for i in 0..3 {
                let (pa, pb) = reference_edge(i);
                let t = [pb[0] - pa[0], pb[1] - pa[1]];
                let len = (t[0] * t[0] + t[1] * t[1]).sqrt();
                let normal = [t[1] / len, -t[0] / len];
                for j in 0..=order {
                    let mut acc = 0.0;
                    for (s, w) in erule.iter() {
                        let x = [pa[0] + s * t[0], pa[1] + s * t[1]];
                        let (v, _) = psi.eval(x);
                        acc += w * (v[0] * normal[0] + v[1] * normal[1]) * shifted_legendre(j, s);
                    }
                    dofs[(row, col)] = acc * len;
                    row += 1;
                }
            }
            for c in 0..2 {
                for (a, b) in monomials(l - 1) {
                    let mut acc = 0.0;
                    for (x, w) in trule.iter() {
                        let (v, _) = psi.eval(x);
                        acc += w * v[c] * monomial(a, b, x);
                    }
                    dofs[(row, col)] = acc;
                    row += 1;
                }
            }
        }
        let coeffs = dofs
            .try_inverse()
            .ok_or_else(|| Error::Backend("Raviart-Thomas dual basis is singular".into()))?;
        Ok(RtBasis { order, spanning, coeffs })
    }

    pub fn dim(&self) -> usize {
        self.spanning.len()
    }

    pub fn face_dofs_per_edge(&self) -> usize {
        self.order + 1
    }

    pub fn n_interior(&self) -> usize {
        self.order * (self.order + 1)
    }

    /// Interior test functions as `(component, a, b)` for `e_c ξ^a η^b`.
    pub fn interior_tests(&self) -> Vec<(usize, i32, i32)> {
        let mut out = Vec::new();
        for c in 0..2 {
            for (a, b) in monomials(self.order as i32 - 1) {
                out.push((c, a, b));
            }
        }
        out
    }

    /// Reference values and divergences at `xi`.
    pub fn eval(&self, xi: [f64; 2], values: &mut [[f64; 2]], divs: &mut [f64]) {
        let n = self.dim();
        let mut sv = [[0.0; 2]; 15];
        let mut sd = [0.0; 15];
        for (j, psi) in self.spanning.iter().enumerate() {
            let (v, d) = psi.eval(xi);
            sv[j] = v;
            sd[j] = d;
        }
        for k in 0..n {
            let mut v = [0.0; 2];
            let mut d = 0.0;
            for j in 0..n {
                let c = self.coeffs[(j, k)];
                v[0] += c * sv[j][0];
                v[1] += c * sv[j][1];
                d += c * sd[j];
            }
            values[k] = v;
            divs[k] = d;
        }
    }
}

pub(crate) fn interior_test_value(a: i32, b: i32, xi: [f64; 2]) -> f64 {
    monomial(a, b, xi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lagrange_partition_of_unity() {
        for order in 0..=2 {
            let b = LagrangeBasis::new(order).unwrap();
            let mut v = vec![0.0; b.dim()];
            let mut g = vec![[0.0; 2]; b.dim()];
            for xi in [[0.1, 0.2], [0.5, 0.25], [0.0, 1.0], [0.3, 0.3]] {
                b.eval(xi, &mut v, &mut g);
                assert!((v.iter().sum::<f64>() - 1.0).abs() < 1e-14);
                assert!(g.iter().map(|d| d[0]).sum::<f64>().abs() < 1e-13);
                assert!(g.iter().map(|d| d[1]).sum::<f64>().abs() < 1e-13);
            }
        }
    }

    #[test]
    fn lagrange_nodal_kronecker() {
        for order in 1..=2 {
            let b = LagrangeBasis::new(order).unwrap();
            let mut v = vec![0.0; b.dim()];
            let mut g = vec![[0.0; 2]; b.dim()];
            for (i, node) in b.nodes().into_iter().enumerate() {
                b.eval(node, &mut v, &mut g);
                for (j, &vj) in v.iter().enumerate() {
                    assert!((vj - if i == j { 1.0 } else { 0.0 }).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn rt_dimensions() {
        for l in 0..=2 {
            let b = RtBasis::new(l).unwrap();
            assert_eq!(b.dim(), (l + 1) * (l + 3));
            assert_eq!(b.n_interior() + 3 * b.face_dofs_per_edge(), b.dim());
        }
    }

    #[test]
    fn rt0_face_flux_duality() {
        let b = RtBasis::new(0).unwrap();
        let rule = edge_rule(4).unwrap();
        let mut v = [[0.0; 2]; 3];
        let mut d = [0.0; 3];
        for i in 0..3 {
            let (pa, pb) = reference_edge(i);
            let t = [pb[0] - pa[0], pb[1] - pa[1]];
            let len = (t[0] * t[0] + t[1] * t[1]).sqrt();
            let n = [t[1] / len, -t[0] / len];
            let mut flux = [0.0; 3];
            for (s, w) in rule.iter() {
                b.eval([pa[0] + s * t[0], pa[1] + s * t[1]], &mut v, &mut d);
                for j in 0..3 {
                    flux[j] += w * len * (v[j][0] * n[0] + v[j][1] * n[1]);
                }
            }
            for j in 0..3 {
                assert!((flux[j] - if i == j { 1.0 } else { 0.0 }).abs() < 1e-13);
            }
        }
    }
}
