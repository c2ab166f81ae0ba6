use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

/// Exact rational numbers.
pub type Q = BigRational;

pub fn qi(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

/// `n/d`, reduced. Panics on `d == 0`.
pub fn qr(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

pub fn factorial(n: u32) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, i| acc * BigInt::from(i))
}

/// `n!` as a rational; `None` for negative `n` (the "negative factorials vanish" convention is
/// applied by callers).
pub fn factorial_q(n: i64) -> Option<Q> {
    if n < 0 {
        None
    } else {
        Some(Q::from_integer(factorial(n as u32)))
    }
}

pub fn binomial(n: i64, k: i64) -> BigInt {
    if k < 0 || n < 0 || k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

/// Harmonic number `1 + 1/2 + ... + 1/n`.
pub fn harmonic(n: i64) -> Q {
    (1..=n).fold(Q::zero(), |acc, i| acc + qr(1, i))
}

pub fn fmt_q(q: &Q) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Parses `a`, `-a`, or `a/b`.
pub fn parse_q(s: &str) -> Option<Q> {
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().ok()?;
            let d: BigInt = d.trim().parse().ok()?;
            if d.is_zero() {
                None
            } else {
                Some(Q::new(n, d))
            }
        }
        None => s.parse::<BigInt>().ok().map(Q::from_integer),
    }
}
