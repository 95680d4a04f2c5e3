//! Integer amount abstraction.
//!
//! Every quantity the faucets move around (demands, balances, capacity,
//! shares, fixed-point weights) is a non-negative integer. Floating point never
//! enters the arithmetic, so the generic parameter ranges over unsigned
//! primitive integers only.

use std::fmt::{Debug, Display};
use std::hash::Hash;
use std::iter::Sum;

use num_traits::{NumCast, PrimInt, Unsigned};

/// Unsigned integer type usable as a resource amount.
pub trait Amount:
    PrimInt + Unsigned + Sum + Debug + Display + Default + Hash + Send + Sync + 'static
{
    /// `⌊self · mul / div⌋` computed without intermediate overflow.
    ///
    /// Returns `None` when `div` is zero or the quotient does not fit `Self`.
    fn mul_div_floor(self, mul: Self, div: Self) -> Option<Self> {
        if div.is_zero() {
            return None;
        }
        if let Some(product) = self.checked_mul(&mul) {
            return Some(product / div);
        }
        let wide = self.to_u128()?.checked_mul(mul.to_u128()?)?;
        <Self as NumCast>::from(wide / div.to_u128()?)
    }

    /// Lossless conversion from a small count (number of users, rounds).
    fn from_count(n: usize) -> Option<Self> {
        <Self as NumCast>::from(n)
    }

    /// Widening conversion used by the CSV and report layers.
    fn as_u128(self) -> u128 {
        self.to_u128().expect("unsigned primitive fits in u128")
    }
}

impl<T> Amount for T where
    T: PrimInt + Unsigned + Sum + Debug + Display + Default + Hash + Send + Sync + 'static
{
}
