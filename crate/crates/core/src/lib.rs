//! State-sum label bracket invariants of knotted trivalent graph diagrams.

pub mod cli;
pub mod diagram;
pub mod engine;
pub mod error;
pub mod laurent;
pub mod map;
pub mod matching;
pub mod moves;
pub mod rules;
pub mod scalar;
pub mod statesum;
pub mod sum;
pub mod trigraph;

pub use num_bigint::BigInt;

/// Laurent coefficients over machine integers.
pub type Coefficient = laurent::Laurent<i64>;
/// Laurent coefficients over arbitrary-precision integers.
pub type BigCoefficient = laurent::Laurent<BigInt>;
pub type Sum = sum::FormalSum<i64>;
pub type BigSum = sum::FormalSum<BigInt>;
pub type Rules = rules::RuleSet<i64>;
pub type BigRules = rules::RuleSet<BigInt>;
