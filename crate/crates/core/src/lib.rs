//! Non-disk domains for the overdetermined Helmholtz problem
//!
//! ```text
//!   Δu + λu = 0 in Ω,   u = 1 on ∂Ω,   ∂u/∂n = c on ∂Ω
//! ```
//!
//! The crate locates the bifurcation values `μ_m` (smallest positive roots of the
//! Bessel cross-Wronskian `J_1 J_m' − J_m J_1'`), builds the closed-form kernel and
//! first-order family around the disk, solves the Dirichlet problem on m-fold
//! symmetric perturbed disks with a Fourier–Bessel (Trefftz) basis, and continues
//! the branch of overdetermined solutions with damped Gauss–Newton.
//!
//! Module map:
//!
//! * [`special`]: integer-order Bessel functions `J_k`, derivatives, positive roots.
//! * [`wronskian`]: cross-Wronskians, `μ_m`, and a structured check of the root
//!   properties (existence, simplicity, monotonicity in `m`, bounds).
//! * [`fields`]: trivial solution, symmetric conformal maps, Schwarz lift,
//!   linearized operator on Fourier–Bessel inputs, kernel fields, first-order family.
//! * [`helmholtz`]: boundary discretization, Trefftz Dirichlet solver, normal derivative.
//! * [`branch`]: overdetermination defect, ε-scaling study, Gauss–Newton continuation.
//! * [`lsq`]: Householder QR least squares used by the solvers.
//! * [`exec`]: data-parallel map with a sequential fallback.

pub mod branch;
pub mod config;
pub mod error;
pub mod exec;
pub mod fields;
pub mod helmholtz;
pub mod lsq;
pub mod special;
pub mod wronskian;

pub use error::{Error, Result};
pub use exec::Exec;
