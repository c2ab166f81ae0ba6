//! Exact scalars and truncated formal series.

mod qrational;
mod rational;
mod series;
mod symmetric;
mod wscalar;

pub use qrational::{qrat_arith, QPoly, QRatOp, QRational};
pub use rational::{binomial, factorial, factorial_q, fmt_q, harmonic, parse_q, qi, qr, Q};
pub use series::{Coeff, TruncSeries, VarSet, VarSpec, RESIDUE_SIGN};
pub use symmetric::{bracket_ej, elementary_symmetric};
pub use wscalar::WScalar;

/// Operation selector for [`wscalar_arith`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WOp {
    Add,
    Mul,
    /// Raise `a` to the integer power given by the rational constant `b`.
    Pow,
}

pub fn wscalar_arith(a: &WScalar, b: &WScalar, op: WOp) -> Option<WScalar> {
    match op {
        WOp::Add => Some(a + b),
        WOp::Mul => Some(a * b),
        WOp::Pow => {
            let e = b.as_rational()?;
            if !e.is_integer() {
                return None;
            }
            let e: i32 = e.to_integer().try_into().ok()?;
            a.pow(e)
        }
    }
}

#[cfg(test)]
mod tests;
