//! One-dimensional second-order total generalised variation (TGV²) denoising
//! with a quadratic fidelity term.
//!
//! The crate is `no_std` (it needs `alloc`) and is organised as follows:
//!
//! * [`signal`]: midpoint grids, the three canonical data shapes, seeded
//!   Gaussian noise, moments and affine least-squares fits.
//! * [`exact`]: closed-form minimisers for the step, affine-step and hat data,
//!   together with their `(α, β)` regime classification.
//! * [`solver`]: minimisers of the discrete TGV² and TV energies, by an exact
//!   active-set method on the predual problem (default) or by Chambolle–Pock,
//!   plus the primal and predual energies.
//! * [`certificate`]: reconstruction of the predual variable `v` from a
//!   candidate `u` and verification of the optimality conditions.
//! * [`analysis`]: structural decomposition of solutions, property checks and
//!   regime sweeps.
//!
//! # Discretisation
//!
//! A grid on `(a, b)` has `n` cells of width `δ = (b − a)/n`. Signals (`f`,
//! `u`) are sampled at cell midpoints. The auxiliary field `w` lives on the
//! `n − 1` interior nodes, so `Du − w` is defined without interpolation and
//! `Dw` has `n − 2` entries. The discrete energy is
//!
//! ```text
//! E(u, w) = δ·[ ½ Σ (uᵢ − fᵢ)² + α Σ |(Du)ⱼ − wⱼ| + β Σ |(Dw)ₖ| ]
//! ```
//!
//! with `(Du)ⱼ = (uⱼ₊₁ − uⱼ)/δ` and `(Dw)ₖ = (wₖ₊₁ − wₖ)/δ`.
#![no_std]
#![warn(missing_debug_implementations)]

extern crate alloc;

pub mod analysis;
pub mod certificate;
mod dual;
mod error;
pub mod exact;
mod math;
mod qp;
pub mod signal;
pub mod solver;

pub use error::{Error, Result};
pub use exact::RegParams;
pub use signal::{AffineFn, Grid, ShapeKind, ShapeSpec, Signal};
