//! Well-balanced, total-energy-conserving Runge–Kutta discontinuous Galerkin
//! solver for the Euler–Poisson equations in spherical symmetry.

pub mod config;
pub mod dg;
pub mod diagnostics;
pub mod driver;
pub mod eos;
pub mod error;
pub mod lane_emden;
pub mod limiter;
pub mod mesh;
pub mod operator;
pub mod poisson;
pub mod problems;
pub mod quadrature;
pub mod riemann;
pub mod stepper;
pub mod well_balanced;

pub use config::{parse_config, RunConfig};
pub use dg::{DGField, DgSpace, StateField};
pub use driver::{convergence_sweep, run, simulate, RunOutput, RunReport};
pub use eos::{Eos, HybridEos, IdealGas};
pub use error::{Error, Result};
pub use lane_emden::{Polytrope, PolytropeProfile};
pub use mesh::Mesh;
pub use operator::{Boundary, Physics, Scheme, Solver, Stage};
pub use poisson::{solve_gravity, GravityBc, GravityField, PhiAnchor};
pub use problems::{make_scenario, Scenario};
pub use stepper::{StepRecord, TimeScheme};
