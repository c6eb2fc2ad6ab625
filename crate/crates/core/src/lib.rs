//! Numerical toolkit for anisotropic nonlocal operators.
//!
//! The crate provides the building blocks for desk-scale experiments with
//! jump processes whose intensity is singular and direction-dependent:
//!
//! - [`geometry`]: anisotropic boxes, slabs, space-time cylinders, the
//!   anisotropic metric and the parabolic scaling map.
//! - [`kernels`]: concrete jump-measure families (axis-supported reference
//!   family, product-stable, double-exponent, cusp) together with tail
//!   masses and admissibility diagnostics.
//! - [`cutoff`]: Lipschitz cut-off families adapted to the anisotropic
//!   geometry and their energy bounds.
//! - [`energy`]: discrete Dirichlet forms on tensor grids, weak-solution
//!   residuals and numerical checkers for Sobolev/Poincaré-type
//!   inequalities.
//! - [`spectral`]: the translation-invariant multiplier semigroup on a
//!   periodic torus, used to manufacture exact solutions.
//! - [`stochastic`]: simulation of the axis-jumping stable process and
//!   Monte Carlo estimation of solutions, Harnack ratios and oscillation
//!   decay.
//! - [`inequalities`]: scalar algebraic inequalities, iteration schedules
//!   and an abstract measure-theoretic bootstrap checker.
//!
//! All operations are deterministic given their inputs and a seed; parallel
//! code reduces in a fixed order so results do not depend on thread count.

// Guards of the form `!(x > 0.0)` are deliberate: they reject NaN along
// with the out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cutoff;
pub mod energy;
pub mod geometry;
pub mod inequalities;
pub mod kernels;
pub mod quad;
pub mod rng;
pub mod spectral;
pub mod stochastic;

mod error;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
