//! Primal-dual mixed finite elements for steady advection-diffusion-reaction
//! problems on triangulations of planar polygons.
//!
//! The discrete problem seeks a continuous Lagrange primal variable `u_h`, a
//! Raviart-Thomas flux `p_h` and a discontinuous Lagrange multiplier `z_h`
//! such that the flux mismatch `‖βu − A∇u − p‖²` is minimised subject to the
//! conservation law `∇·p + μu = f`, tested elementwise.
//!
//! The crate is organised bottom-up:
//!
//! - [`mesh`]: structured triangulations, refinement, boundary tags
//! - [`quadrature`]: Gauss rules on the reference triangle and edge
//! - [`spaces`]: the three finite element spaces, interpolants, projections
//! - [`assembly`]: the saddle-point system and its boundary-treatment variants
//! - [`linsolve`]: sparse direct solve with residual control
//! - [`problems`]: benchmark cases with exact solutions
//! - [`analysis`]: error norms, gradient reconstruction, rates, CSV/VTK output
//! - [`verify`]: the built-in property suite

pub mod analysis;
pub mod assembly;
pub mod error;
pub mod linsolve;
pub mod mesh;
pub mod problems;
pub mod quadrature;
pub mod spaces;
pub mod verify;

mod solver;

pub use error::{Error, Result};
pub use mesh::{BoundaryTag, Mesh};
pub use solver::{limit_threads, solve_case, solve_problem, solve_system, MixedSolution, SolveOptions, SolveStats, SystemSolution, AUTO_LU_LIMIT};

/// 2D vector type used throughout.
pub type Vec2 = nalgebra::Vector2<f64>;
/// 2×2 matrix type used throughout.
pub type Mat2 = nalgebra::Matrix2<f64>;
