//! Toric structure of staged tree models.
//!
//! The crate computes the prime ideal of a staged tree by elimination and
//! certifies binomiality after linear changes of variables: balanced trees,
//! subtree-inclusion trees and their combinations, and one-stage trees.

pub mod algebra;
pub mod balance;
pub mod cli;
pub mod kernel;
pub mod minors;
pub mod onestage;
pub mod sip;
pub mod tree;

/// Rational scalars used throughout the tree-level modules.
pub type Q = algebra::Rational;
/// Polynomials over [`Q`].
pub type Poly = algebra::Polynomial<Q>;
