// Negated comparisons double as NaN rejection.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod approx;
pub mod arith;
pub mod characters;
#[cfg(feature = "cli")]
pub mod cli;
pub mod equidist;
pub mod error;
pub mod euler_product;
pub mod lfunc;
pub mod moments;
pub mod parallel;
pub mod primes;
pub mod shifts;
