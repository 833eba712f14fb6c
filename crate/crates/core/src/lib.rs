//! Radial-grid simulator and verification toolkit for the m-equivariant
//! self-dual Chern-Simons-Schrödinger equation
//!
//! ```text
//! i(∂_t + iA_t[u])u + ∂_r²u + (1/r)∂_r u − ((m + A_θ[u])/r)² u + |u|²u = 0
//! ```
//!
//! The crate is organized bottom-up:
//!
//! - [`grid`]: cell-centered radial grid, quadrature, differences, norms
//! - [`gauge`]: nonlocal gauge potentials by prefix/suffix quadrature
//! - [`soliton`]: the Jackiw-Pi vortex, symmetries, Bogomol'nyi operator, energies
//! - [`nonlinearity`]: cubic/quintic decomposition, multilinear forms, duality
//! - [`linearization`]: `L_Q`, its adjoint, `𝓛_Q`, generalized kernel, coercivity
//! - [`dynamics`]: Strang-split Crank-Nicolson evolution and monitors
//! - [`modulation`]: soliton decomposition, tracking, rate fits, radiation
//! - [`cli`]: configuration, scenarios, persistence, convergence studies, identity suite

pub mod cli;
pub mod dynamics;
pub mod error;
pub mod gauge;
pub mod grid;
pub mod linearization;
pub mod modulation;
pub mod nonlinearity;
pub mod profiles;
pub mod soliton;

pub use error::{Error, Result};
pub use grid::{NormKind, RadialField, RadialGrid, RealField};
pub use num_complex::Complex64;
