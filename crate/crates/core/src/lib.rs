//! Hybridizable discontinuous Galerkin discretization of distributed optimal
//! control for the convection-diffusion equation on triangulated 2D domains.
//!
//! States and adjoint states use degree `k+1` polynomials, their fluxes
//! degree `k`, and the globally coupled face traces degree `k`. Interior
//! unknowns are condensed element by element so that only traces enter the
//! global sparse solve.
//!
//! ```no_run
//! use std::sync::Arc;
//! use hdg_core::{assembly, hdg::{HdgSpace, StabilizationConfig}, mesh::Mesh, problems};
//!
//! let problem = problems::example1();
//! let mesh = Arc::new(Mesh::build_uniform(16).unwrap());
//! let space = HdgSpace::new(mesh, 1, &problem, StabilizationConfig::constant(1.0)).unwrap();
//! let out = assembly::solve(space, &problem).unwrap();
//! println!("{} trace unknowns", out.system_dim);
//! ```

pub mod analysis;
pub mod assembly;
pub mod basis;
pub mod error;
pub mod hdg;
pub mod mesh;
pub mod problems;

pub use error::{HdgError, Result};
