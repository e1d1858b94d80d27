//! Symbolic and numeric engine for conformal Euler-Lagrange systems on
//! generalized-quaternionic Kähler charts.
//!
//! The pipeline runs bottom-up through the modules:
//!
//! - [`symexpr`]: exact canonical expressions with the conformal atom `exp(λ)`.
//! - [`exterior`]: vector fields and differential forms over a [`Chart`].
//! - [`structures`]: the endomorphisms `W_F`, `W_G`, `W_H`, their algebraic
//!   relations, metric compatibility and the Kähler form.
//! - [`mechanics`]: twisted differential, presymplectic form, energy, the
//!   dynamical residual and the Euler-Lagrange families.
//! - [`dynamics`]: numeric assembly and RK4 integration of the implicit
//!   first-order system.

pub mod chart;
pub mod dynamics;
pub mod exterior;
pub mod mechanics;
pub mod sample;
pub mod structures;
pub mod symexpr;

pub use chart::{Block, Chart};
pub use symexpr::{Expr, Lambda, Rational};
