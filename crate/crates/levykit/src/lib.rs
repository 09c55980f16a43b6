//! Numerics for Lévy processes given by a generating triplet `(A, N, b)`:
//! the characteristic exponent, the concentration functions `h` and `K`,
//! transition densities by Fourier inversion, and audits of the scaling /
//! equivalence conditions that govern two-sided heat-kernel envelopes.
//!
//! The crate is organised around the triplet:
//!
//! * [`measure`]: compositional Lévy measures with exact per-node
//!   integrals, the measure algebra used for small-jump decompositions,
//!   and a zoo of reference processes.
//! * [`exponent`]: the characteristic exponent `ψ`, its real part, the
//!   radial majorant `ψ*` and the projected quadratic form.
//! * [`concentration`]: `h`, `K`, the inverse `h⁻¹` and the calculus
//!   identities tying them together.
//! * [`conditions`]: numerical audits of the scaling windows and the
//!   small-time / large-time equivalence families.
//! * [`density`]: FFT inversion of `e^{-tψ}`, density envelopes and
//!   shifted lower bounds.
//! * [`decompose`]: diagnostics for the small-jump component and the
//!   normalized class of laws it generates.
//! * [`simulate`]: Monte Carlo cross-checks: increments, exit times,
//!   cone and half-line probabilities.

pub mod concentration;
pub mod conditions;
pub mod config;
pub mod decompose;
pub mod density;
pub mod error;
pub mod exponent;
pub mod measure;
pub mod numeric;
pub mod report;
pub mod simulate;

pub use error::LevyError;
pub use measure::{GeneratingTriplet, LevyMeasure, SymmetricMatrix};


#[cfg(doctest)]
mod book;
