//! Cut-cell discontinuous Galerkin solvers for linear hyperbolic conservation
//! laws with stationary and moving material interfaces.
//!
//! The solution is approximated by independent piecewise polynomial fields on
//! the two sides of an interface, each living on the active part of a fixed
//! background mesh. Interface conditions are imposed weakly through penalty
//! terms and ghost-penalty stabilization keeps mass matrices and system
//! matrices well conditioned no matter how small the cut fragments are.
//!
//! Modules:
//! - [`geometry1d`]: background meshes, interface paths, active topologies.
//! - [`basis`]: element polynomial bases and quadrature (full and cut cells).
//! - [`assembly1d`]: stabilized mass/spatial operators, fluxes, projections.
//! - [`timestepper`]: explicit SSP Runge-Kutta integrators.
//! - [`acoustic`]: the two-material acoustic system in conservative variables.
//! - [`spacetime`]: space-time slabs for moving interfaces.
//! - [`coupled`]: locally implicit coupling of slabs with explicit DG regions.
//! - [`geometry2d`], [`assembly2d`]: triangular meshes cut by a line interface.
//! - [`analysis`]: interface stability matrices and feasibility regions.
//! - [`harness`]: experiment presets, error norms, conservation diagnostics.

pub mod analysis;
pub mod assembly1d;
pub mod assembly2d;
pub mod acoustic;
pub mod basis;
pub mod coupled;
pub mod geometry1d;
pub mod geometry2d;
pub mod harness;
pub mod linalg;
pub mod spacetime;
pub mod timestepper;
