use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_traits::{One, Zero};

use super::rational::{fmt_q, Q};

/// Laurent polynomial over Q in the formal unit `w = iu`.
///
/// Every coefficient produced by the correspondence is a rational multiple of a power of `iu`,
/// so `u^2` is always rewritten as `-w^2`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct WScalar {
    terms: BTreeMap<i32, Q>,
}

impl WScalar {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::from_q(Q::one())
    }

    pub fn from_q(c: Q) -> Self {
        Self::monomial(c, 0)
    }

    pub fn from_int(n: i64) -> Self {
        Self::from_q(super::qi(n))
    }

    /// `c * w^e`.
    pub fn monomial(c: Q, e: i32) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(e, c);
        }
        Self { terms }
    }

    /// `w^e`.
    pub fn w_pow(e: i32) -> Self {
        Self::monomial(Q::one(), e)
    }

    /// `u^e` for even `e`, via `u^2 = -w^2`.
    pub fn u_pow_even(e: i32) -> Self {
        assert!(e % 2 == 0, "odd powers of u are not representable over Q[w]");
        let sign = if (e / 2) % 2 == 0 { Q::one() } else { -Q::one() };
        Self::monomial(sign, e)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (i32, &Q)> {
        self.terms.iter().map(|(e, c)| (*e, c))
    }

    pub fn coeff(&self, e: i32) -> Q {
        self.terms.get(&e).cloned().unwrap_or_else(Q::zero)
    }

    /// The single term of a monomial, if it is one.
    pub fn as_monomial(&self) -> Option<(i32, &Q)> {
        if self.terms.len() == 1 {
            self.terms.iter().next().map(|(e, c)| (*e, c))
        } else {
            None
        }
    }

    /// The rational constant, if the scalar has no `w` dependence.
    pub fn as_rational(&self) -> Option<Q> {
        match self.terms.len() {
            0 => Some(Q::zero()),
            1 => self.terms.get(&0).cloned(),
            _ => None,
        }
    }

    pub fn scale(&self, c: &Q) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        Self {
            terms: self.terms.iter().map(|(e, v)| (*e, v * c)).collect(),
        }
    }

    /// Multiplies by `w^e`.
    pub fn shift(&self, e: i32) -> Self {
        Self {
            terms: self.terms.iter().map(|(k, v)| (k + e, v.clone())).collect(),
        }
    }

    /// Integer power. Negative exponents are only defined for monomials.
    pub fn pow(&self, n: i32) -> Option<Self> {
        if n >= 0 {
            let mut acc = Self::one();
            for _ in 0..n {
                acc = &acc * self;
            }
            Some(acc)
        } else {
            let (e, c) = self.as_monomial()?;
            let inv = Self::monomial(c.recip(), -e);
            inv.pow(-n)
        }
    }

    pub fn inverse(&self) -> Option<Self> {
        self.pow(-1)
    }

    fn add_term(&mut self, e: i32, c: &Q) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(e).or_insert_with(Q::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&e);
        }
    }
}

impl AddAssign<&WScalar> for WScalar {
    fn add_assign(&mut self, rhs: &WScalar) {
        for (e, c) in &rhs.terms {
            self.add_term(*e, c);
        }
    }
}

impl Add for &WScalar {
    type Output = WScalar;
    fn add(self, rhs: &WScalar) -> WScalar {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Add for WScalar {
    type Output = WScalar;
    fn add(mut self, rhs: WScalar) -> WScalar {
        self += &rhs;
        self
    }
}

impl Sub for &WScalar {
    type Output = WScalar;
    fn sub(self, rhs: &WScalar) -> WScalar {
        let mut out = self.clone();
        out += &(-rhs);
        out
    }
}

impl Sub for WScalar {
    type Output = WScalar;
    fn sub(self, rhs: WScalar) -> WScalar {
        &self - &rhs
    }
}

impl Neg for &WScalar {
    type Output = WScalar;
    fn neg(self) -> WScalar {
        WScalar {
            terms: self.terms.iter().map(|(e, c)| (*e, -c)).collect(),
        }
    }
}

impl Neg for WScalar {
    type Output = WScalar;
    fn neg(self) -> WScalar {
        -&self
    }
}

impl Mul for &WScalar {
    type Output = WScalar;
    fn mul(self, rhs: &WScalar) -> WScalar {
        let mut out = WScalar::zero();
        for (e1, c1) in &self.terms {
            for (e2, c2) in &rhs.terms {
                out.add_term(e1 + e2, &(c1 * c2));
            }
        }
        out
    }
}

impl Mul for WScalar {
    type Output = WScalar;
    fn mul(self, rhs: WScalar) -> WScalar {
        &self * &rhs
    }
}

impl fmt::Display for WScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in &self.terms {
            let s = fmt_q(c);
            let (neg, mag) = match s.strip_prefix('-') {
                Some(m) => (true, m.to_string()),
                None => (false, s),
            };
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, "{}", if neg { " - " } else { " + " })?;
            }
            first = false;
            match *e {
                0 => write!(f, "{mag}")?,
                _ => {
                    if mag != "1" {
                        write!(f, "{mag}*")?;
                    }
                    if *e == 1 {
                        write!(f, "w")?;
                    } else {
                        write!(f, "w^{e}")?;
                    }
                }
            }
        }
        Ok(())
    }
}
