//! Compiles the book's code snippets as doctests, keeping the guide in
//! sync with the library (mdbook itself cannot run them).

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/triplets.md")]
pub mod triplets {}
#[doc = include_str!("../../../book/src/concentration.md")]
pub mod concentration {}
#[doc = include_str!("../../../book/src/exponent.md")]
pub mod exponent {}
#[doc = include_str!("../../../book/src/densities.md")]
pub mod densities {}
#[doc = include_str!("../../../book/src/conditions.md")]
pub mod conditions {}
#[doc = include_str!("../../../book/src/simulation.md")]
pub mod simulation {}
#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
