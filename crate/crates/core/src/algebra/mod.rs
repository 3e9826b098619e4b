//! Exact polynomial algebra over the rationals.

pub mod field;
pub mod groebner;
pub mod ideal;
pub mod linalg;
pub mod monomial;
pub mod polynomial;
pub mod rational;

pub use field::Field;
pub use groebner::{buchberger, is_groebner_basis, normal_form, BudgetExceeded, GbLimits, GroebnerBasis};
pub use ideal::{
    degrevlex_basis, eliminate, ideal_contains, ideal_equal, is_binomial_basis, minimal_generator_degrees,
    monomials_of_degree, BinomialTest,
};
pub use linalg::{determinant, in_span, inverse, null_space, rank, rref, solve, SparseEchelon};
pub use monomial::{degrevlex_compare, Monomial, MonomialOrder};
pub use polynomial::{format_monomial, format_polynomial, parse_polynomial, PolyDisplay, PolyError, Polynomial, VarSet};
pub use rational::{ParseRationalError, Rational};
