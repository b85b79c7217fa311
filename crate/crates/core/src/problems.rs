//! Benchmark cases with closed-form solutions and manufactured polynomial
//! cases.
//!
//! Every case carries its [`ProblemSpec`], the domain, a boundary tagging
//! rule and, where known, the exact fields `u*`, `∇u*`, `p* = βu* − A∇u*`
//! and `∇·p*`. Sources are obtained by hand differentiation; [`ExampleCase::self_check`]
//! compares them against finite differences before any solve.

use std::fmt;
use std::sync::Arc;

use crate::assembly::{ProblemSpec, ScalarField, Variant, VectorField};
use crate::error::{Error, Result};
use crate::mesh::{build_lshape_with, build_structured_rect_with, BoundaryTag, Diagonal, Mesh};
use crate::{Mat2, Vec2};

pub type BoundaryRule = Arc<dyn Fn(Vec2, Vec2) -> Option<BoundaryTag> + Send + Sync>;

/// Computational domain of a case.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Domain {
    Rectangle { xmin: f64, xmax: f64, ymin: f64, ymax: f64 },
    /// `(-1, 1)²` without the quadrant `x > 0, y < 0`.
    LShape,
}

impl Domain {
    pub fn unit_square() -> Self {
        Domain::Rectangle { xmin: 0.0, xmax: 1.0, ymin: 0.0, ymax: 1.0 }
    }

    pub fn width(&self) -> f64 {
        match *self {
            Domain::Rectangle { xmin, xmax, .. } => xmax - xmin,
            Domain::LShape => 2.0,
        }
    }

    pub fn bounding_box(&self) -> [f64; 4] {
        match *self {
            Domain::Rectangle { xmin, xmax, ymin, ymax } => [xmin, xmax, ymin, ymax],
            Domain::LShape => [-1.0, 1.0, -1.0, 1.0],
        }
    }

    pub fn contains(&self, x: Vec2) -> bool {
        let [x0, x1, y0, y1] = self.bounding_box();
        let inside = x[0] > x0 && x[0] < x1 && x[1] > y0 && x[1] < y1;
        match self {
            Domain::Rectangle { .. } => inside,
            Domain::LShape => inside && !(x[0] >= 0.0 && x[1] <= 0.0),
        }
    }

    /// Structured mesh with `n` cells per unit length, so the legs of the
    /// right triangles have length `h = 1/n`.
    pub fn build_mesh(&self, n: usize) -> Result<Mesh> {
        self.build_mesh_with(n, Diagonal::Right)
    }

    pub fn build_mesh_with(&self, n: usize, diagonal: Diagonal) -> Result<Mesh> {
        if n == 0 {
            return Err(Error::InvalidArgument("mesh level must be positive".into()));
        }
        match *self {
            Domain::Rectangle { xmin, xmax, ymin, ymax } => {
                let nx = ((n as f64) * (xmax - xmin)).round().max(1.0) as usize;
                let ny = ((n as f64) * (ymax - ymin)).round().max(1.0) as usize;
                build_structured_rect_with(nx, ny, xmin, xmax, ymin, ymax, diagonal)
            }
            Domain::LShape => build_lshape_with(n, diagonal),
        }
    }
}

/// Closed-form solution fields.
#[derive(Clone)]
pub struct ExactFields {
    pub u: ScalarField,
    pub grad_u: VectorField,
    pub flux: VectorField,
    pub div_flux: ScalarField,
}

/// Parameters a case was built with.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CaseParams {
    pub epsilon: Option<f64>,
    pub delta: Option<f64>,
    pub sigma: Option<f64>,
}

/// Outcome of [`ExampleCase::self_check`]. All entries are maxima over the
/// sample points, scaled by `1 + |reference value|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelfCheck {
    pub pde_residual: f64,
    pub gradient_mismatch: f64,
    pub divergence_mismatch: f64,
    pub samples: usize,
}

#[derive(Clone)]
pub struct ExampleCase {
    pub id: String,
    pub problem: ProblemSpec,
    pub exact: Option<ExactFields>,
    pub params: CaseParams,
    pub domain: Domain,
    /// Split of the grid squares used by [`ExampleCase::build_mesh`].
    pub diagonal: Diagonal,
    /// Points where the exact gradient is unbounded; error integrals use
    /// graded quadrature on cells touching them.
    pub singular_points: Vec<Vec2>,
    boundary: BoundaryRule,
    weight: Option<ScalarField>,
}

impl fmt::Debug for ExampleCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ExampleCase")
            .field("id", &self.id)
            .field("problem", &self.problem)
            .field("exact", &self.exact.is_some())
            .field("params", &self.params)
            .field("domain", &self.domain)
            .field("diagonal", &self.diagonal)
            .finish()
    }
}

impl ExampleCase {
    /// Tagged mesh with `n` cells per unit length (`h = 1/n`).
    pub fn build_mesh(&self, n: usize) -> Result<Mesh> {
        let mut mesh = self.domain.build_mesh_with(n, self.diagonal)?;
        let rule = self.boundary.clone();
        mesh.tag_boundary(move |mid, normal| rule(mid, normal))?;
        Ok(mesh)
    }

    pub fn with_diagonal(mut self, diagonal: Diagonal) -> Self {
        self.diagonal = diagonal;
        self
    }

    pub fn boundary_rule(&self) -> BoundaryRule {
        self.boundary.clone()
    }

    /// Switches the boundary treatment. The weighted variant uses the
    /// case's built-in weight unless one was already attached.
    pub fn with_variant(mut self, variant: Variant) -> Result<Self> {
        if variant == Variant::Weighted && self.problem.weight.is_none() {
            match &self.weight {
                Some(w) => self.problem.weight = Some(w.clone()),
                None => {
                    return Err(Error::Configuration(format!(
                        "case {} has no weight function for the weighted variant",
                        self.id
                    )))
                }
            }
        }
        self.problem.variant = variant;
        Ok(self)
    }

    pub fn default_weight(&self) -> Option<ScalarField> {
        self.weight.clone()
    }

    /// Compares the hand-derived fields against each other and against
    /// central differences at 1000 quasirandom interior points.
    pub fn self_check(&self) -> Option<SelfCheck> {
        let ex = self.exact.as_ref()?;
        let [x0, x1, y0, y1] = self.domain.bounding_box();
        let step = 1e-6 * self.domain.width();
        let mut out = SelfCheck { pde_residual: 0.0, gradient_mismatch: 0.0, divergence_mismatch: 0.0, samples: 0 };
        let mut i = 1;
        while out.samples < 1000 {
            let x = Vec2::new(x0 + (x1 - x0) * halton(i, 2), y0 + (y1 - y0) * halton(i, 3));
            i += 1;
            // keep clear of the boundary and of the L-shape corner singularity
            let margin = 4.0 * step;
            let clear = self.domain.contains(x)
                && self.domain.contains(x + Vec2::new(margin, margin))
                && self.domain.contains(x - Vec2::new(margin, margin))
                && self.domain.contains(x + Vec2::new(margin, -margin))
                && self.domain.contains(x + Vec2::new(-margin, margin))
                && x.norm() > 1e-3;
            if !clear {
                continue;
            }
            out.samples += 1;
            let div = (ex.div_flux)(x);
            let f = (self.problem.source)(x);
            let res = (div + self.problem.mu * (ex.u)(x) - f).abs() / (1.0 + f.abs());
            out.pde_residual = out.pde_residual.max(res);

            let ex_ = Vec2::new(step, 0.0);
            let ey = Vec2::new(0.0, step);
            let g = (ex.grad_u)(x);
            let fd = Vec2::new(
                ((ex.u)(x + ex_) - (ex.u)(x - ex_)) / (2.0 * step),
                ((ex.u)(x + ey) - (ex.u)(x - ey)) / (2.0 * step),
            );
            out.gradient_mismatch = out.gradient_mismatch.max((g - fd).norm() / (1.0 + g.norm()));

            let fd_div = ((ex.flux)(x + ex_)[0] - (ex.flux)(x - ex_)[0]) / (2.0 * step)
                + ((ex.flux)(x + ey)[1] - (ex.flux)(x - ey)[1]) / (2.0 * step);
            out.divergence_mismatch = out.divergence_mismatch.max((div - fd_div).abs() / (1.0 + div.abs()));
        }
        Some(out)
    }

    /// Fails with a configuration error if the exact fields are inconsistent.
    pub fn verify_exact(&self) -> Result<()> {
        if let Some(c) = self.self_check() {
            if c.pde_residual > 1e-7 || c.gradient_mismatch > 1e-4 || c.divergence_mismatch > 1e-4 {
                return Err(Error::Configuration(format!(
                    "case {} failed self-verification: {c:?}",
                    self.id
                )));
            }
        }
        Ok(())
    }
}

/// Radical inverse of `i` in the given base.
pub fn halton(mut i: usize, base: usize) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    while i > 0 {
        f /= base as f64;
        r += f * (i % base) as f64;
        i /= base;
    }
    r
}

fn all_dirichlet() -> BoundaryRule {
    Arc::new(|_, _| Some(BoundaryTag::Dirichlet))
}

fn radial_weight(offset: f64, beta: VectorField) -> ScalarField {
    Arc::new(move |x: Vec2| offset - beta(x).dot(&x))
}

/// Boundary layer problem on `(-1, 1)²` with `β = (2, 1)`, `A = εI`.
pub fn example1(epsilon: f64) -> Result<ExampleCase> {
    if !(epsilon > 0.0) {
        return Err(Error::InvalidArgument(format!("epsilon must be positive, got {epsilon}")));
    }
    let e = epsilon;
    let beta = Vec2::new(2.0, 1.0);
    let pi = std::f64::consts::PI;
    // u = X(x) Y(y) C(x + y)
    let parts = move |x: Vec2| {
        let ex = (-(1.0 - x[0]) / e).exp();
        let ey = (-(1.0 - x[1]) / e).exp();
        let xf = [1.0 - ex, -ex / e, -ex / (e * e)];
        let yf = [1.0 - ey, -ey / e, -ey / (e * e)];
        let s = x[0] + x[1];
        let c = [(pi * s).cos(), -pi * (pi * s).sin(), -pi * pi * (pi * s).cos()];
        (xf, yf, c)
    };
    let u: ScalarField = Arc::new(move |x| {
        let (a, b, c) = parts(x);
        a[0] * b[0] * c[0]
    });
    let grad: VectorField = Arc::new(move |x| {
        let (a, b, c) = parts(x);
        Vec2::new(
            a[1] * b[0] * c[0] + a[0] * b[0] * c[1],
            a[0] * b[1] * c[0] + a[0] * b[0] * c[1],
        )
    });
    let laplacian = move |x: Vec2| {
        let (a, b, c) = parts(x);
        let uxx = a[2] * b[0] * c[0] + 2.0 * a[1] * b[0] * c[1] + a[0] * b[0] * c[2];
        let uyy = a[0] * b[2] * c[0] + 2.0 * a[0] * b[1] * c[1] + a[0] * b[0] * c[2];
        uxx + uyy
    };
    let flux: VectorField = {
        let (u, grad) = (u.clone(), grad.clone());
        Arc::new(move |x| beta * u(x) - grad(x) * e)
    };
    let div_flux: ScalarField = {
        let grad = grad.clone();
        Arc::new(move |x| beta.dot(&grad(x)) - e * laplacian(x))
    };
    let beta_field: VectorField = Arc::new(move |_| beta);
    let problem = ProblemSpec::new(Mat2::identity() * e, beta_field.clone(), div_flux.clone())
        .with_dirichlet(u.clone());
    Ok(ExampleCase {
        id: "ex1".into(),
        problem,
        exact: Some(ExactFields { u, grad_u: grad, flux, div_flux }),
        params: CaseParams { epsilon: Some(e), ..Default::default() },
        domain: Domain::Rectangle { xmin: -1.0, xmax: 1.0, ymin: -1.0, ymax: 1.0 },
        diagonal: Diagonal::Right,
        singular_points: Vec::new(),
        boundary: all_dirichlet(),
        weight: Some(radial_weight(3.0, beta_field)),
    })
}

fn lshape_angle(x: Vec2) -> f64 {
    let t = x[1].atan2(x[0]);
    if t < 0.0 {
        t + 2.0 * std::f64::consts::PI
    } else {
        t
    }
}

/// Reentrant corner: `u = r^{2/3} sin(2θ/3)` on the L-shape, Laplace equation.
pub fn example2() -> ExampleCase {
    let u: ScalarField = Arc::new(|x| {
        let r = x.norm();
        if r == 0.0 {
            return 0.0;
        }
        r.powf(2.0 / 3.0) * (2.0 * lshape_angle(x) / 3.0).sin()
    });
    // unbounded at the corner
    let grad: VectorField = Arc::new(|x| {
        let r = x.norm();
        if r == 0.0 {
            return Vec2::new(f64::INFINITY, f64::INFINITY);
        }
        let t = lshape_angle(x) / 3.0;
        Vec2::new(-t.sin(), t.cos()) * (2.0 / 3.0 * r.powf(-1.0 / 3.0))
    });
    let flux: VectorField = {
        let grad = grad.clone();
        Arc::new(move |x| -grad(x))
    };
    let zero: ScalarField = Arc::new(|_| 0.0);
    let beta: VectorField = Arc::new(|_| Vec2::zeros());
    let problem = ProblemSpec::new(Mat2::identity(), beta, zero.clone()).with_dirichlet(u.clone());
    ExampleCase {
        id: "ex2".into(),
        problem,
        exact: Some(ExactFields { u, grad_u: grad, flux, div_flux: zero }),
        params: CaseParams { epsilon: Some(1.0), ..Default::default() },
        domain: Domain::LShape,
        diagonal: Diagonal::Alternating,
        singular_points: vec![Vec2::zeros()],
        boundary: all_dirichlet(),
        weight: None,
    }
}

/// Internal layer in a rotating pure-advection field on `(0, 1)²`.
pub fn example3(delta: f64) -> Result<ExampleCase> {
    if !(delta > 0.0) {
        return Err(Error::InvalidArgument(format!("delta must be positive, got {delta}")));
    }
    let sigma = 0.1;
    let beta: VectorField = Arc::new(|x: Vec2| {
        let rho = (x[0] * x[0] + (x[1] + 1.0) * (x[1] + 1.0)).sqrt();
        Vec2::new(x[1] + 1.0, -x[0]) / rho
    });
    let u: ScalarField = Arc::new(move |x: Vec2| {
        let rho = (x[0] * x[0] + (x[1] + 1.0) * (x[1] + 1.0)).sqrt();
        let phi = ((x[1] + 1.0) / rho).clamp(-1.0, 1.0).acos();
        (-sigma * rho * phi).exp() * ((rho - 1.5) / delta).atan()
    });
    let grad: VectorField = Arc::new(move |x: Vec2| {
        let yp = x[1] + 1.0;
        let rho = (x[0] * x[0] + yp * yp).sqrt();
        let phi = (yp / rho).clamp(-1.0, 1.0).acos();
        let grad_rho = Vec2::new(x[0], yp) / rho;
        let grad_phi = Vec2::new(yp, -x[0]) / (rho * rho);
        let e = (-sigma * rho * phi).exp();
        let s = (rho - 1.5) / delta;
        let t = s.atan();
        let grad_e = -(grad_rho * phi + grad_phi * rho) * (sigma * e);
        let grad_t = grad_rho / (delta * (1.0 + s * s));
        grad_e * t + grad_t * e
    });
    let flux: VectorField = {
        let (u, beta) = (u.clone(), beta.clone());
        Arc::new(move |x| beta(x) * u(x))
    };
    // ∇·β = 0 and β·∇u = -σu
    let div_flux: ScalarField = {
        let u = u.clone();
        Arc::new(move |x| -sigma * u(x))
    };
    let zero: ScalarField = Arc::new(|_| 0.0);
    let problem = ProblemSpec::new(Mat2::zeros(), beta.clone(), zero)
        .with_mu(sigma)
        .with_dirichlet(u.clone());
    let b = beta.clone();
    let boundary: BoundaryRule = Arc::new(move |mid, normal| {
        Some(if b(mid).dot(&normal) < 0.0 { BoundaryTag::Inflow } else { BoundaryTag::Outflow })
    });
    Ok(ExampleCase {
        id: "ex3".into(),
        problem,
        exact: Some(ExactFields { u, grad_u: grad, flux, div_flux }),
        params: CaseParams { delta: Some(delta), sigma: Some(sigma), ..Default::default() },
        domain: Domain::unit_square(),
        diagonal: Diagonal::Alternating,
        singular_points: Vec::new(),
        boundary,
        weight: Some(radial_weight(3.0, beta)),
    })
}

/// Interior and outflow layers on `(0, 1)²` with `β = (1, -0.5)`, `u = 1`
/// on `x = 0` (corners included) and `u = 0` on the rest of the boundary.
pub fn example4(epsilon: f64) -> Result<ExampleCase> {
    if !(epsilon > 0.0) {
        return Err(Error::InvalidArgument(format!("epsilon must be positive, got {epsilon}")));
    }
    let beta_const = Vec2::new(1.0, -0.5);
    let beta: VectorField = Arc::new(move |_| beta_const);
    let zero: ScalarField = Arc::new(|_| 0.0);
    let g: ScalarField = Arc::new(|x: Vec2| if x[0].abs() <= 1e-12 { 1.0 } else { 0.0 });
    let problem = ProblemSpec::new(Mat2::identity() * epsilon, beta.clone(), zero).with_dirichlet(g);
    Ok(ExampleCase {
        id: "ex4".into(),
        problem,
        exact: None,
        params: CaseParams { epsilon: Some(epsilon), ..Default::default() },
        domain: Domain::unit_square(),
        diagonal: Diagonal::Right,
        singular_points: Vec::new(),
        boundary: all_dirichlet(),
        weight: Some(radial_weight(2.0, beta)),
    })
}

/// Polynomial `Σ c x^a y^b`.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    pub terms: Vec<(u32, u32, f64)>,
}

impl Polynomial {
    pub fn new(terms: Vec<(u32, u32, f64)>) -> Self {
        Polynomial { terms }
    }

    pub fn degree(&self) -> u32 {
        self.terms.iter().filter(|t| t.2 != 0.0).map(|t| t.0 + t.1).max().unwrap_or(0)
    }

    fn pw(x: f64, n: i64) -> f64 {
        if n < 0 {
            0.0
        } else {
            x.powi(n as i32)
        }
    }

    pub fn eval(&self, x: Vec2) -> f64 {
        self.terms.iter().map(|&(a, b, c)| c * Self::pw(x[0], a as i64) * Self::pw(x[1], b as i64)).sum()
    }

    pub fn grad(&self, x: Vec2) -> Vec2 {
        let mut g = Vec2::zeros();
        for &(a, b, c) in &self.terms {
            let (a, b) = (a as i64, b as i64);
            g[0] += c * a as f64 * Self::pw(x[0], a - 1) * Self::pw(x[1], b);
            g[1] += c * b as f64 * Self::pw(x[0], a) * Self::pw(x[1], b - 1);
        }
        g
    }

    pub fn hessian(&self, x: Vec2) -> Mat2 {
        let mut h = Mat2::zeros();
        for &(a, b, c) in &self.terms {
            let (a, b) = (a as i64, b as i64);
            let (af, bf) = (a as f64, b as f64);
            h[(0, 0)] += c * af * (af - 1.0) * Self::pw(x[0], a - 2) * Self::pw(x[1], b);
            h[(1, 1)] += c * bf * (bf - 1.0) * Self::pw(x[0], a) * Self::pw(x[1], b - 2);
            let xy = c * af * bf * Self::pw(x[0], a - 1) * Self::pw(x[1], b - 1);
            h[(0, 1)] += xy;
            h[(1, 0)] += xy;
        }
        h
    }
}

/// Data of a manufactured polynomial case on the unit square.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyData {
    pub u: Polynomial,
    pub diffusion: Mat2,
    pub beta: Vec2,
    pub mu: f64,
    /// Tag the face `x = 1` as Neumann with `ψ = −p*·n`.
    pub neumann_east: bool,
}

impl PolyData {
    /// The default polynomial case of order `k`.
    pub fn standard(k: usize) -> Self {
        if k <= 1 {
            PolyData {
                u: Polynomial::new(vec![(1, 0, 1.0), (0, 1, 1.0)]),
                diffusion: Mat2::identity(),
                beta: Vec2::new(1.0, 1.0),
                mu: 1.0,
                neumann_east: false,
            }
        } else {
            PolyData {
                u: Polynomial::new(vec![(0, 0, 1.0), (1, 0, 1.0), (0, 1, -2.0), (2, 0, 1.0), (0, 2, -1.0), (1, 1, 0.5)]),
                diffusion: Mat2::new(1.0, 0.2, 0.2, 0.5),
                beta: Vec2::new(1.0, 2.0),
                mu: 0.5,
                neumann_east: false,
            }
        }
    }
}

/// Case whose exact solution is the polynomial `data.u`, of degree at most `k`.
pub fn manufactured_poly(k: usize, data: PolyData) -> Result<ExampleCase> {
    if data.u.degree() as usize > k {
        return Err(Error::InvalidArgument(format!(
            "polynomial degree {} exceeds order {k}",
            data.u.degree()
        )));
    }
    let PolyData { u: poly, diffusion: a, beta: b, mu, neumann_east } = data;
    let poly = Arc::new(poly);
    let u: ScalarField = {
        let p = poly.clone();
        Arc::new(move |x| p.eval(x))
    };
    let grad: VectorField = {
        let p = poly.clone();
        Arc::new(move |x| p.grad(x))
    };
    let flux: VectorField = {
        let p = poly.clone();
        Arc::new(move |x| b * p.eval(x) - a * p.grad(x))
    };
    let div_flux: ScalarField = {
        let p = poly.clone();
        Arc::new(move |x| b.dot(&p.grad(x)) - a.component_mul(&p.hessian(x)).sum())
    };
    let source: ScalarField = {
        let (d, u) = (div_flux.clone(), u.clone());
        Arc::new(move |x| d(x) + mu * u(x))
    };
    let mut problem = ProblemSpec::new(a, Arc::new(move |_| b), source).with_mu(mu).with_dirichlet(u.clone());
    let boundary: BoundaryRule = if neumann_east {
        let fl = flux.clone();
        problem = problem.with_neumann(Arc::new(move |x: Vec2| -fl(x)[0]));
        Arc::new(|mid: Vec2, _| {
            Some(if (mid[0] - 1.0).abs() < 1e-12 { BoundaryTag::Neumann } else { BoundaryTag::Dirichlet })
        })
    } else {
        all_dirichlet()
    };
    Ok(ExampleCase {
        id: "poly".into(),
        problem,
        exact: Some(ExactFields { u, grad_u: grad, flux, div_flux }),
        params: CaseParams::default(),
        domain: Domain::unit_square(),
        diagonal: Diagonal::Right,
        singular_points: Vec::new(),
        boundary,
        weight: Some(Arc::new(|x: Vec2| 3.0 - x[0] - x[1])),
    })
}

/// Looks up a case by identifier: `ex1`, `ex2`, `ex3`, `ex4` or `poly`.
/// Missing parameters take the values `ε = 1` (ex1), `ε = 0.001` (ex4), `δ = 1`.
pub fn by_name(id: &str, epsilon: Option<f64>, delta: Option<f64>, order: usize) -> Result<ExampleCase> {
    match id {
        "ex1" => example1(epsilon.unwrap_or(1.0)),
        "ex2" => Ok(example2()),
        "ex3" => example3(delta.unwrap_or(1.0)),
        "ex4" => example4(epsilon.unwrap_or(0.001)),
        "poly" => manufactured_poly(order, PolyData::standard(order)),
        other => Err(Error::Configuration(format!("unknown example '{other}'"))),
    }
}
