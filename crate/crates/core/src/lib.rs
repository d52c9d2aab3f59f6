//! Exact symbolic engine for wall-crossing kernels of graded semi-free
//! commutative dg algebras with a one-parameter torus action.
//!
//! Everything is computed over the rationals, slice by slice: a slice is a
//! fixed internal multidegree under an exponent budget, and every reported
//! dimension carries a certification flag telling whether the budget could
//! have influenced it.

pub mod algebra;
pub mod catalog;
pub mod chain;
pub mod cli;
pub mod complexes;
pub mod grading;
pub mod linalg;
pub mod mono;
pub mod pushforward;
pub mod qkernel;
pub mod resolutions;
pub mod slices;
pub mod wallcross;
pub mod windows;
