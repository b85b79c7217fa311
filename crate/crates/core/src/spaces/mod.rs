//! Discrete spaces: continuous Lagrange `V_h^k`, Raviart–Thomas `RT^l` and
//! discontinuous Lagrange `X_h^m`, with their interpolants and projections.

mod reference;

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::mesh::{CellGeometry, Mesh};
use crate::quadrature::{edge_rule, shifted_legendre, triangle_rule, TriangleRule};
use crate::Vec2;

pub use reference::{LagrangeBasis, RtBasis};
use reference::interior_test_value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SpaceKind {
    /// Continuous piecewise polynomials (H¹-conforming).
    Lagrange,
    /// Raviart–Thomas vector fields (H(div)-conforming).
    RaviartThomas,
    /// Discontinuous piecewise polynomials.
    Discontinuous,
}

#[derive(Debug, Clone)]
enum RefBasis {
    Scalar(LagrangeBasis),
    Vector(RtBasis),
}

/// A finite element space on a mesh with its global numbering.
#[derive(Debug, Clone)]
pub struct FeSpace {
    kind: SpaceKind,
    order: usize,
    mesh: Arc<Mesh>,
    basis: RefBasis,
    n_local: usize,
    n_dofs: usize,
    cell_dofs: Vec<usize>,
    cell_signs: Vec<f64>,
}

/// Reference basis values at a fixed set of reference points.
#[derive(Debug, Clone)]
pub struct ScalarTable {
    pub n_basis: usize,
    pub points: Vec<[f64; 2]>,
    /// `values[p * n_basis + i]`
    pub values: Vec<f64>,
    pub grads: Vec<[f64; 2]>,
}

/// Reference RT values at a fixed set of reference points.
#[derive(Debug, Clone)]
pub struct VectorTable {
    pub n_basis: usize,
    pub points: Vec<[f64; 2]>,
    pub values: Vec<[f64; 2]>,
    pub divs: Vec<f64>,
}

/// Physical basis values on one cell, sign-adjusted to the global numbering.
#[derive(Debug, Clone, PartialEq)]
pub enum BasisValues {
    Scalar { values: Vec<f64>, grads: Vec<Vec2> },
    Vector { values: Vec<Vec2>, divs: Vec<f64> },
}

impl FeSpace {
    /// Builds a space of the given kind and order: Lagrange 1–2, RT 0–2,
    /// discontinuous 0–2.
    pub fn new(mesh: Arc<Mesh>, kind: SpaceKind, order: usize) -> Result<Self> {
        let supported = match kind {
            SpaceKind::Lagrange => (1..=2).contains(&order),
            SpaceKind::RaviartThomas | SpaceKind::Discontinuous => order <= 2,
        };
        if !supported {
            return Err(Error::InvalidArgument(format!("{kind:?} order {order} is not supported")));
        }
        let nc = mesh.n_cells();
        match kind {
            SpaceKind::Lagrange => {
                let basis = LagrangeBasis::new(order)?;
                let n_local = basis.dim();
                let mut cell_dofs = Vec::with_capacity(nc * n_local);
                for k in 0..nc {
                    cell_dofs.extend_from_slice(&mesh.cell(k));
                    if order == 2 {
                        cell_dofs.extend(mesh.cell_faces(k).iter().map(|&f| mesh.n_vertices() + f));
                    }
                }
                let n_dofs = mesh.n_vertices() + if order == 2 { mesh.n_faces() } else { 0 };
                Ok(FeSpace {
                    kind,
                    order,
                    basis: RefBasis::Scalar(basis),
                    n_local,
                    n_dofs,
                    cell_signs: vec![1.0; cell_dofs.len()],
                    cell_dofs,
                    mesh,
                })
            }
            SpaceKind::Discontinuous => {
                let basis = LagrangeBasis::new(order)?;
                let n_local = basis.dim();
                let cell_dofs: Vec<usize> = (0..nc * n_local).collect();
                Ok(FeSpace {
                    kind,
                    order,
                    basis: RefBasis::Scalar(basis),
                    n_local,
                    n_dofs: nc * n_local,
                    cell_signs: vec![1.0; cell_dofs.len()],
                    cell_dofs,
                    mesh,
                })
            }
            SpaceKind::RaviartThomas => {
                let basis = RtBasis::new(order)?;
                let n_local = basis.dim();
                let per_face = order + 1;
                let n_int = basis.n_interior();
                let face_block = mesh.n_faces() * per_face;
                let mut cell_dofs = Vec::with_capacity(nc * n_local);
                let mut cell_signs = Vec::with_capacity(nc * n_local);
                for k in 0..nc {
                    let c = mesh.cell(k);
                    let faces = mesh.cell_faces(k);
                    let normal_signs = mesh.cell_face_signs(k);
                    for i in 0..3 {
                        let a = c[(i + 1) % 3];
                        let b = c[(i + 2) % 3];
                        let param_sign: f64 = if a < b { 1.0 } else { -1.0 };
                        for j in 0..per_face {
                            cell_dofs.push(faces[i] * per_face + j);
                            cell_signs.push(normal_signs[i] * param_sign.powi(j as i32));
                        }
                    }
                    for i in 0..n_int {
                        cell_dofs.push(face_block + k * n_int + i);
                        cell_signs.push(1.0);
                    }
                }
                Ok(FeSpace {
                    kind,
                    order,
                    basis: RefBasis::Vector(basis),
                    n_local,
                    n_dofs: face_block + nc * n_int,
                    cell_dofs,
                    cell_signs,
                    mesh,
                })
            }
        }
    }

    pub fn kind(&self) -> SpaceKind {
        self.kind
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn n_dofs(&self) -> usize {
        self.n_dofs
    }

    /// Number of basis functions supported on one cell.
    pub fn n_local(&self) -> usize {
        self.n_local
    }

    pub fn cell_dofs(&self, k: usize) -> &[usize] {
        &self.cell_dofs[k * self.n_local..(k + 1) * self.n_local]
    }

    /// Orientation signs relating local reference functions to global ones.
    pub fn cell_signs(&self, k: usize) -> &[f64] {
        &self.cell_signs[k * self.n_local..(k + 1) * self.n_local]
    }

    /// Global DOFs attached to face `f` (Lagrange: vertex and edge nodes,
    /// RT: the face moments). Empty for discontinuous spaces.
    pub fn face_dofs(&self, f: usize) -> Vec<usize> {
        match self.kind {
            SpaceKind::Lagrange => {
                let [a, b] = self.mesh.face(f);
                let mut d = vec![a, b];
                if self.order == 2 {
                    d.push(self.mesh.n_vertices() + f);
                }
                d
            }
            SpaceKind::RaviartThomas => {
                let per = self.order + 1;
                (f * per..(f + 1) * per).collect()
            }
            SpaceKind::Discontinuous => Vec::new(),
        }
    }

    pub fn lagrange_basis(&self) -> Option<&LagrangeBasis> {
        match &self.basis {
            RefBasis::Scalar(b) => Some(b),
            RefBasis::Vector(_) => None,
        }
    }

    pub fn rt_basis(&self) -> Option<&RtBasis> {
        match &self.basis {
            RefBasis::Vector(b) => Some(b),
            RefBasis::Scalar(_) => None,
        }
    }

    pub fn is_vector(&self) -> bool {
        matches!(self.basis, RefBasis::Vector(_))
    }

    pub fn tabulate_scalar(&self, points: &[[f64; 2]]) -> Result<ScalarTable> {
        let b = self
            .lagrange_basis()
            .ok_or_else(|| Error::InvalidArgument("scalar tabulation of a vector space".into()))?;
        let n = b.dim();
        let mut values = vec![0.0; points.len() * n];
        let mut grads = vec![[0.0; 2]; points.len() * n];
        for (p, &xi) in points.iter().enumerate() {
            b.eval(xi, &mut values[p * n..(p + 1) * n], &mut grads[p * n..(p + 1) * n]);
        }
        Ok(ScalarTable { n_basis: n, points: points.to_vec(), values, grads })
    }

    pub fn tabulate_vector(&self, points: &[[f64; 2]]) -> Result<VectorTable> {
        let b = self
            .rt_basis()
            .ok_or_else(|| Error::InvalidArgument("vector tabulation of a scalar space".into()))?;
        let n = b.dim();
        let mut values = vec![[0.0; 2]; points.len() * n];
        let mut divs = vec![0.0; points.len() * n];
        for (p, &xi) in points.iter().enumerate() {
            b.eval(xi, &mut values[p * n..(p + 1) * n], &mut divs[p * n..(p + 1) * n]);
        }
        Ok(VectorTable { n_basis: n, points: points.to_vec(), values, divs })
    }

    /// Physical basis values on cell `k` at reference points: values and
    /// gradients for scalar spaces, contravariant Piola values and
    /// divergences for RT.
    pub fn evaluate_basis(&self, k: usize, points: &[[f64; 2]]) -> Result<BasisValues> {
        if k >= self.mesh.n_cells() {
            return Err(Error::InvalidArgument(format!("cell {k} out of range")));
        }
        let geo = self.mesh.geometry(k);
        let signs = self.cell_signs(k);
        if self.is_vector() {
            let t = self.tabulate_vector(points)?;
            let mut values = Vec::with_capacity(t.values.len());
            let mut divs = Vec::with_capacity(t.divs.len());
            for p in 0..points.len() {
                for i in 0..t.n_basis {
                    let (v, d) = piola(&geo, t.values[p * t.n_basis + i], t.divs[p * t.n_basis + i]);
                    values.push(v * signs[i]);
                    divs.push(d * signs[i]);
                }
            }
            Ok(BasisValues::Vector { values, divs })
        } else {
            let t = self.tabulate_scalar(points)?;
            let grads = t.grads.iter().map(|&g| map_gradient(&geo, g)).collect();
            Ok(BasisValues::Scalar { values: t.values, grads })
        }
    }
}

/// Covariant map of a reference gradient: `J⁻ᵀ ∇̂`.
#[inline]
pub fn map_gradient(geo: &CellGeometry, g: [f64; 2]) -> Vec2 {
    geo.inverse.transpose() * Vec2::new(g[0], g[1])
}

/// Contravariant Piola map: `(J v̂ / det J, div̂ / det J)`.
#[inline]
pub fn piola(geo: &CellGeometry, v: [f64; 2], div: f64) -> (Vec2, f64) {
    let inv_det = 1.0 / geo.det;
    (geo.jacobian * Vec2::new(v[0], v[1]) * inv_det, div * inv_det)
}

/// Coefficient vector of a discrete field.
#[derive(Debug, Clone)]
pub struct FieldCoeffs {
    space: Arc<FeSpace>,
    pub coeffs: Vec<f64>,
}

impl FieldCoeffs {
    pub fn new(space: Arc<FeSpace>, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != space.n_dofs() {
            return Err(Error::InvalidArgument(format!(
                "coefficient vector has length {}, space has {} DOFs",
                coeffs.len(),
                space.n_dofs()
            )));
        }
        Ok(FieldCoeffs { space, coeffs })
    }

    pub fn zeros(space: Arc<FeSpace>) -> Self {
        let n = space.n_dofs();
        FieldCoeffs { space, coeffs: vec![0.0; n] }
    }

    pub fn space(&self) -> &Arc<FeSpace> {
        &self.space
    }

    fn local(&self, k: usize) -> impl Iterator<Item = f64> + '_ {
        let dofs = self.space.cell_dofs(k);
        let signs = self.space.cell_signs(k);
        dofs.iter().zip(signs).map(move |(&d, &s)| s * self.coeffs[d])
    }

    /// Scalar values and physical gradients on cell `k` at the table points.
    pub fn scalar_on_cell(&self, k: usize, table: &ScalarTable, geo: &CellGeometry) -> (Vec<f64>, Vec<Vec2>) {
        let n = table.n_basis;
        let local: Vec<f64> = self.local(k).collect();
        let np = table.points.len();
        let mut vals = vec![0.0; np];
        let mut grads = vec![Vec2::zeros(); np];
        for p in 0..np {
            let mut v = 0.0;
            let mut g = [0.0; 2];
            for i in 0..n {
                let c = local[i];
                v += c * table.values[p * n + i];
                g[0] += c * table.grads[p * n + i][0];
                g[1] += c * table.grads[p * n + i][1];
            }
            vals[p] = v;
            grads[p] = map_gradient(geo, g);
        }
        (vals, grads)
    }

    /// Vector values and divergences on cell `k` at the table points.
    pub fn vector_on_cell(&self, k: usize, table: &VectorTable, geo: &CellGeometry) -> (Vec<Vec2>, Vec<f64>) {
        let n = table.n_basis;
        let local: Vec<f64> = self.local(k).collect();
        let np = table.points.len();
        let mut vals = Vec::with_capacity(np);
        let mut divs = Vec::with_capacity(np);
        for p in 0..np {
            let mut v = [0.0; 2];
            let mut d = 0.0;
            for i in 0..n {
                let c = local[i];
                v[0] += c * table.values[p * n + i][0];
                v[1] += c * table.values[p * n + i][1];
                d += c * table.divs[p * n + i];
            }
            let (pv, pd) = piola(geo, v, d);
            vals.push(pv);
            divs.push(pd);
        }
        (vals, divs)
    }

    /// Value and gradient of a scalar field at a reference point of cell `k`.
    pub fn eval_scalar(&self, k: usize, xi: [f64; 2]) -> Result<(f64, Vec2)> {
        let t = self.space.tabulate_scalar(&[xi])?;
        let geo = self.space.mesh().geometry(k);
        let (v, g) = self.scalar_on_cell(k, &t, &geo);
        Ok((v[0], g[0]))
    }

    /// Value and divergence of an RT field at a reference point of cell `k`.
    pub fn eval_vector(&self, k: usize, xi: [f64; 2]) -> Result<(Vec2, f64)> {
        let t = self.space.tabulate_vector(&[xi])?;
        let geo = self.space.mesh().geometry(k);
        let (v, d) = self.vector_on_cell(k, &t, &geo);
        Ok((v[0], d[0]))
    }

    /// Value at a physical point inside (or on the boundary of) cell `k`.
    pub fn eval_scalar_at(&self, k: usize, x: Vec2) -> Result<f64> {
        let xi = self.space.mesh().geometry(k).to_reference(x);
        Ok(self.eval_scalar(k, xi)?.0)
    }

    pub fn eval_vector_at(&self, k: usize, x: Vec2) -> Result<Vec2> {
        let xi = self.space.mesh().geometry(k).to_reference(x);
        Ok(self.eval_vector(k, xi)?.0)
    }
}

/// Nodal interpolant `i_h`: coefficients are the field values at the nodes.
pub fn nodal_interpolate<F>(space: &Arc<FeSpace>, field: F) -> Result<FieldCoeffs>
where
    F: Fn(Vec2) -> f64,
{
    if space.kind() == SpaceKind::RaviartThomas {
        return Err(Error::InvalidArgument("nodal interpolation needs a scalar space".into()));
    }
    let mesh = space.mesh();
    let nodes = space.lagrange_basis().unwrap().nodes();
    let mut coeffs = vec![0.0; space.n_dofs()];
    for k in 0..mesh.n_cells() {
        let geo = mesh.geometry(k);
        for (&d, &xi) in space.cell_dofs(k).iter().zip(&nodes) {
            coeffs[d] = field(geo.to_physical(xi));
        }
    }
    FieldCoeffs::new(space.clone(), coeffs)
}

/// Legendre moments `∫_F q·n_F L_j(t) ds`, `j = 0..=order`, of a vector field
/// on face `f`. These are exactly the RT face DOFs.
pub fn face_flux_moments<F>(mesh: &Mesh, f: usize, order: usize, degree: usize, field: &F) -> Result<Vec<f64>>
where
    F: Fn(Vec2) -> Vec2,
{
    let rule = edge_rule(degree.max(2 * order + 2))?;
    let n = mesh.face_normal(f);
    let len = mesh.face_diameter(f);
    let mut out = vec![0.0; order + 1];
    for (t, w) in rule.iter() {
        let qn = field(mesh.face_point(f, t)).dot(&n);
        for (j, o) in out.iter_mut().enumerate() {
            *o += w * len * qn * shifted_legendre(j, t);
        }
    }
    Ok(out)
}

/// Raviart–Thomas interpolant `R_h` of a vector field, with all moments
/// evaluated by quadrature of degree at least `2l + 2`.
pub fn rt_interpolate<F>(space: &Arc<FeSpace>, field: F, degree: usize) -> Result<FieldCoeffs>
where
    F: Fn(Vec2) -> Vec2,
{
    let basis = space
        .rt_basis()
        .ok_or_else(|| Error::InvalidArgument("RT interpolation needs an RT space".into()))?;
    let mesh = space.mesh();
    let l = space.order();
    let mut coeffs = vec![0.0; space.n_dofs()];
    for f in 0..mesh.n_faces() {
        let m = face_flux_moments(mesh, f, l, degree, &field)?;
        for (d, v) in space.face_dofs(f).into_iter().zip(m) {
            coeffs[d] = v;
        }
    }
    if l > 0 {
        let rule = triangle_rule(degree.max(2 * l + 2).min(crate::quadrature::MAX_TRIANGLE_DEGREE))?;
        let tests = basis.interior_tests();
        let offset = 3 * (l + 1);
        for k in 0..mesh.n_cells() {
            let geo = mesh.geometry(k);
            let pullback = geo.inverse * geo.det;
            let dofs = space.cell_dofs(k);
            for (i, &(c, a, b)) in tests.iter().enumerate() {
                let mut acc = 0.0;
                for (xi, w) in rule.iter() {
                    let qhat = pullback * field(geo.to_physical(xi));
                    acc += w * qhat[c] * interior_test_value(a, b, xi);
                }
                coeffs[dofs[offset + i]] = acc;
            }
        }
    }
    FieldCoeffs::new(space.clone(), coeffs)
}

/// Legendre coefficients of the L²(F) projection onto `P_l(F)`, in the face
/// parameter `t` running from the lower- to the higher-indexed vertex.
pub fn face_l2_project<F>(mesh: &Mesh, f: usize, field: F, l: usize, degree: usize) -> Result<Vec<f64>>
where
    F: Fn(Vec2) -> f64,
{
    let rule = edge_rule(degree.max(2 * l + 2))?;
    let mut out = vec![0.0; l + 1];
    for (t, w) in rule.iter() {
        let v = field(mesh.face_point(f, t));
        for (j, o) in out.iter_mut().enumerate() {
            *o += w * v * shifted_legendre(j, t);
        }
    }
    for (j, o) in out.iter_mut().enumerate() {
        *o *= (2 * j + 1) as f64;
    }
    Ok(out)
}

/// Evaluates a face polynomial given by Legendre coefficients.
pub fn eval_face_polynomial(coeffs: &[f64], t: f64) -> f64 {
    coeffs.iter().enumerate().map(|(j, c)| c * shifted_legendre(j, t)).sum()
}

/// Reference mass matrix of a scalar basis, exact for the supported orders.
pub(crate) fn reference_mass(basis: &LagrangeBasis, rule: &TriangleRule) -> DMatrix<f64> {
    let n = basis.dim();
    let mut m = DMatrix::zeros(n, n);
    let mut v = vec![0.0; n];
    let mut g = vec![[0.0; 2]; n];
    for (xi, w) in rule.iter() {
        basis.eval(xi, &mut v, &mut g);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] += w * v[i] * v[j];
            }
        }
    }
    m
}

/// Elementwise L² projection `π_{X,m}` onto a discontinuous space.
pub fn dg_l2_project<F>(space: &Arc<FeSpace>, field: F, degree: usize) -> Result<FieldCoeffs>
where
    F: Fn(Vec2) -> f64,
{
    if space.kind() != SpaceKind::Discontinuous {
        return Err(Error::InvalidArgument("L² projection target must be discontinuous".into()));
    }
    let basis = *space.lagrange_basis().unwrap();
    let m = space.order();
    let rule = triangle_rule(degree.max(2 * m + 2).min(crate::quadrature::MAX_TRIANGLE_DEGREE))?;
    let mass = reference_mass(&basis, &rule);
    let chol = mass
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Backend("singular local mass matrix".into()))?;
    let table = space.tabulate_scalar(&rule.points)?;
    let n = basis.dim();
    let mesh = space.mesh();
    let mut coeffs = vec![0.0; space.n_dofs()];
    for k in 0..mesh.n_cells() {
        let geo = mesh.geometry(k);
        let mut rhs = DVector::zeros(n);
        for (p, (xi, w)) in rule.iter().enumerate() {
            let v = field(geo.to_physical(xi));
            for i in 0..n {
                rhs[i] += w * v * table.values[p * n + i];
            }
        }
        // both sides carry |det J|, which cancels
        let sol = chol.solve(&rhs);
        for (i, &d) in space.cell_dofs(k).iter().enumerate() {
            coeffs[d] = sol[i];
        }
    }
    FieldCoeffs::new(space.clone(), coeffs)
}
