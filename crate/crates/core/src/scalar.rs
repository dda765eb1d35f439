//! Exact integer scalars underlying the coefficient ring.

use std::fmt::{Debug, Display};
use std::hash::Hash;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

/// Integer types usable as coefficients of Laurent polynomials.
///
/// Everything in the crate is generic over this trait; `i64` is the default
/// and [`BigInt`] is available when coefficients can grow without bound.
pub trait Scalar:
    Clone
    + Debug
    + Display
    + FromStr
    + Eq
    + Ord
    + Hash
    + Zero
    + One
    + Integer
    + Signed
    + Send
    + Sync
    + 'static
{
    /// Exact quotient, or `None` when `rhs` does not divide `self`.
    fn exact_div(&self, rhs: &Self) -> Option<Self> {
        if rhs.is_zero() {
            return None;
        }
        let (q, r) = self.div_rem(rhs);
        r.is_zero().then_some(q)
    }
}

impl Scalar for i32 {}
impl Scalar for i64 {}
impl Scalar for i128 {}
impl Scalar for BigInt {}
