use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::rational::{fmt_q, qi, Q};
use crate::error::MathError;

/// Dense univariate polynomial over Q, coefficients low to high, no trailing zeros.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct QPoly {
    coeffs: Vec<Q>,
}

impl QPoly {
    pub fn new(mut coeffs: Vec<Q>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn from_ints(c: &[i64]) -> Self {
        Self::new(c.iter().map(|&n| qi(n)).collect())
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::constant(Q::one())
    }

    pub fn constant(c: Q) -> Self {
        Self::new(vec![c])
    }

    /// The indeterminate.
    pub fn var() -> Self {
        Self::new(vec![Q::zero(), Q::one()])
    }

    pub fn monomial(c: Q, deg: usize) -> Self {
        let mut v = vec![Q::zero(); deg + 1];
        v[deg] = c;
        Self::new(v)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeffs(&self) -> &[Q] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> Q {
        self.coeffs.get(i).cloned().unwrap_or_else(Q::zero)
    }

    /// Degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn lead(&self) -> Q {
        self.coeffs.last().cloned().unwrap_or_else(Q::zero)
    }

    pub fn scale(&self, c: &Q) -> Self {
        Self::new(self.coeffs.iter().map(|a| a * c).collect())
    }

    pub fn eval(&self, x: &Q) -> Q {
        self.coeffs
            .iter()
            .rev()
            .fold(Q::zero(), |acc, c| acc * x + c)
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * qi(i as i64))
                .collect(),
        )
    }

    /// Polynomial division with remainder.
    pub fn div_rem(&self, d: &QPoly) -> (QPoly, QPoly) {
        assert!(!d.is_zero(), "polynomial division by zero");
        let dd = d.degree().unwrap();
        let lead_inv = d.lead().recip();
        let mut rem = self.coeffs.clone();
        if rem.len() <= dd {
            return (QPoly::zero(), self.clone());
        }
        let mut quot = vec![Q::zero(); rem.len() - dd];
        for i in (0..quot.len()).rev() {
            let c = &rem[i + dd] * &lead_inv;
            if !c.is_zero() {
                for (j, dj) in d.coeffs.iter().enumerate() {
                    rem[i + j] -= &c * dj;
                }
            }
            quot[i] = c;
        }
        rem.truncate(dd);
        (QPoly::new(quot), QPoly::new(rem))
    }

    /// Monic gcd (zero if both are zero).
    pub fn gcd(a: &QPoly, b: &QPoly) -> QPoly {
        let (mut x, mut y) = (a.clone(), b.clone());
        while !y.is_zero() {
            let (_, r) = x.div_rem(&y);
            x = y;
            y = r;
        }
        if x.is_zero() {
            x
        } else {
            let l = x.lead().recip();
            x.scale(&l)
        }
    }

    /// `p(1/q) * q^n` for `n >= deg p`, i.e. the coefficient-reversal padded to length `n+1`.
    pub fn reversed(&self, n: usize) -> QPoly {
        let mut v = vec![Q::zero(); n + 1];
        for (i, c) in self.coeffs.iter().enumerate() {
            v[n - i] = c.clone();
        }
        QPoly::new(v)
    }

    /// Lowest index with a nonzero coefficient.
    pub fn valuation(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| !c.is_zero())
    }

    pub fn fmt_in(&self, var: &str) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let s = fmt_q(c);
            let (neg, mag) = match s.strip_prefix('-') {
                Some(m) => (true, m.to_string()),
                None => (false, s),
            };
            if out.is_empty() {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            let mono = match i {
                0 => String::new(),
                1 => var.to_string(),
                _ => format!("{var}^{i}"),
            };
            if mono.is_empty() {
                out.push_str(&mag);
            } else if mag == "1" {
                out.push_str(&mono);
            } else {
                out.push_str(&format!("{mag}*{mono}"));
            }
        }
        out
    }
}

impl Add for &QPoly {
    type Output = QPoly;
    fn add(self, rhs: &QPoly) -> QPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        QPoly::new((0..n).map(|i| self.coeff(i) + rhs.coeff(i)).collect())
    }
}

impl Sub for &QPoly {
    type Output = QPoly;
    fn sub(self, rhs: &QPoly) -> QPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        QPoly::new((0..n).map(|i| self.coeff(i) - rhs.coeff(i)).collect())
    }
}

impl Neg for &QPoly {
    type Output = QPoly;
    fn neg(self) -> QPoly {
        QPoly::new(self.coeffs.iter().map(|c| -c).collect())
    }
}

impl Mul for &QPoly {
    type Output = QPoly;
    fn mul(self, rhs: &QPoly) -> QPoly {
        if self.is_zero() || rhs.is_zero() {
            return QPoly::zero();
        }
        let mut v = vec![Q::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                v[i + j] += a * b;
            }
        }
        QPoly::new(v)
    }
}

fn int_content(v: &[BigInt]) -> BigInt {
    v.iter().fold(BigInt::zero(), |g, c| g.gcd(c))
}

/// Rational function in one variable over Q, stored as integer-coefficient numerator and
/// denominator with no common factor, no common integer content, and positive leading
/// denominator coefficient. Two values are equal iff their canonical forms coincide.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct QRational {
    num: Vec<BigInt>,
    den: Vec<BigInt>,
}

impl QRational {
    pub fn new(num: &QPoly, den: &QPoly) -> Result<Self, MathError> {
        if den.is_zero() {
            return Err(MathError::DivisionByZero);
        }
        if num.is_zero() {
            return Ok(Self::zero());
        }
        let g = QPoly::gcd(num, den);
        let (n, _) = num.div_rem(&g);
        let (d, _) = den.div_rem(&g);
        // Clear rational denominators jointly, then remove the joint integer content.
        let lcm = n
            .coeffs()
            .iter()
            .chain(d.coeffs())
            .fold(BigInt::one(), |l, c| l.lcm(c.denom()));
        let to_int = |p: &QPoly| -> Vec<BigInt> {
            p.coeffs()
                .iter()
                .map(|c| (c * Q::from_integer(lcm.clone())).to_integer())
                .collect()
        };
        let mut ni = to_int(&n);
        let mut di = to_int(&d);
        let mut content = int_content(&ni).gcd(&int_content(&di));
        if di.last().is_some_and(|c| c.is_negative()) {
            content = -content;
        }
        for c in ni.iter_mut().chain(di.iter_mut()) {
            *c /= &content;
        }
        Ok(Self { num: ni, den: di })
    }

    pub fn from_poly(p: &QPoly) -> Self {
        Self::new(p, &QPoly::one()).expect("unit denominator")
    }

    pub fn from_q(c: Q) -> Self {
        Self::from_poly(&QPoly::constant(c))
    }

    pub fn zero() -> Self {
        Self {
            num: vec![],
            den: vec![BigInt::one()],
        }
    }

    pub fn one() -> Self {
        Self::from_q(Q::one())
    }

    /// The indeterminate.
    pub fn var() -> Self {
        Self::from_poly(&QPoly::var())
    }

    /// From integer coefficient lists, low to high.
    pub fn from_int_coeffs(num: &[i64], den: &[i64]) -> Result<Self, MathError> {
        Self::new(&QPoly::from_ints(num), &QPoly::from_ints(den))
    }

    pub fn from_bigint_coeffs(num: &[BigInt], den: &[BigInt]) -> Result<Self, MathError> {
        let f = |v: &[BigInt]| QPoly::new(v.iter().map(|c| Q::from_integer(c.clone())).collect());
        Self::new(&f(num), &f(den))
    }

    pub fn numer_poly(&self) -> QPoly {
        QPoly::new(self.num.iter().map(|c| Q::from_integer(c.clone())).collect())
    }

    pub fn denom_poly(&self) -> QPoly {
        QPoly::new(self.den.iter().map(|c| Q::from_integer(c.clone())).collect())
    }

    pub fn numer_coeffs(&self) -> &[BigInt] {
        &self.num
    }

    pub fn denom_coeffs(&self) -> &[BigInt] {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_empty()
    }

    pub fn recip(&self) -> Result<Self, MathError> {
        Self::new(&self.denom_poly(), &self.numer_poly())
    }

    pub fn checked_div(&self, rhs: &Self) -> Result<Self, MathError> {
        if rhs.is_zero() {
            return Err(MathError::DivisionByZero);
        }
        Self::new(
            &(&self.numer_poly() * &rhs.denom_poly()),
            &(&self.denom_poly() * &rhs.numer_poly()),
        )
    }

    pub fn scale(&self, c: &Q) -> Self {
        Self::new(&self.numer_poly().scale(c), &self.denom_poly()).expect("nonzero denominator")
    }

    pub fn pow(&self, n: i32) -> Result<Self, MathError> {
        let base = if n < 0 { self.recip()? } else { self.clone() };
        let mut acc = Self::one();
        for _ in 0..n.unsigned_abs() {
            acc = &acc * &base;
        }
        Ok(acc)
    }

    /// Evaluation at a rational point; `None` at a pole.
    pub fn eval(&self, x: &Q) -> Option<Q> {
        let d = self.denom_poly().eval(x);
        if d.is_zero() {
            None
        } else {
            Some(self.numer_poly().eval(x) / d)
        }
    }

    pub fn derivative(&self) -> Self {
        let (n, d) = (self.numer_poly(), self.denom_poly());
        let top = &(&n.derivative() * &d) - &(&n * &d.derivative());
        Self::new(&top, &(&d * &d)).expect("nonzero denominator")
    }

    /// `f(1/q)`.
    pub fn invert_variable(&self) -> Self {
        let (n, d) = (self.numer_poly(), self.denom_poly());
        let m = n.degree().unwrap_or(0).max(d.degree().unwrap_or(0));
        Self::new(&n.reversed(m), &d.reversed(m)).expect("nonzero denominator")
    }

    /// Multiplies by `c * q^e` (`e` may be negative).
    pub fn mul_monomial(&self, c: &Q, e: i32) -> Self {
        let (n, d) = (self.numer_poly().scale(c), self.denom_poly());
        if e >= 0 {
            Self::new(&(&n * &QPoly::monomial(Q::one(), e as usize)), &d)
        } else {
            Self::new(&n, &(&d * &QPoly::monomial(Q::one(), (-e) as usize)))
        }
        .expect("nonzero denominator")
    }

    pub fn fmt_in(&self, var: &str) -> String {
        let n = self.numer_poly();
        let d = self.denom_poly();
        if d.degree() == Some(0) && d.coeff(0).is_one() {
            return n.fmt_in(var);
        }
        let wrap = |p: &QPoly| {
            let s = p.fmt_in(var);
            if p.coeffs().iter().filter(|c| !c.is_zero()).count() > 1 {
                format!("({s})")
            } else {
                s
            }
        };
        format!("{}/{}", wrap(&n), wrap(&d))
    }
}

impl Add for &QRational {
    type Output = QRational;
    fn add(self, rhs: &QRational) -> QRational {
        let (n1, d1, n2, d2) = (
            self.numer_poly(),
            self.denom_poly(),
            rhs.numer_poly(),
            rhs.denom_poly(),
        );
        QRational::new(&(&(&n1 * &d2) + &(&n2 * &d1)), &(&d1 * &d2)).expect("nonzero")
    }
}

impl Sub for &QRational {
    type Output = QRational;
    fn sub(self, rhs: &QRational) -> QRational {
        self + &(-rhs)
    }
}

impl Neg for &QRational {
    type Output = QRational;
    fn neg(self) -> QRational {
        QRational {
            num: self.num.iter().map(|c| -c).collect(),
            den: self.den.clone(),
        }
    }
}

impl Mul for &QRational {
    type Output = QRational;
    fn mul(self, rhs: &QRational) -> QRational {
        QRational::new(
            &(&self.numer_poly() * &rhs.numer_poly()),
            &(&self.denom_poly() * &rhs.denom_poly()),
        )
        .expect("nonzero")
    }
}

impl Div for &QRational {
    type Output = QRational;
    /// Panics on division by zero; use [`QRational::checked_div`] to get an error instead.
    fn div(self, rhs: &QRational) -> QRational {
        self.checked_div(rhs).expect("division by zero rational function")
    }
}

impl fmt::Display for QRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.fmt_in("q"))
    }
}

/// Operation selector for [`qrat_arith`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QRatOp {
    Add,
    Sub,
    Mul,
    Div,
}

pub fn qrat_arith(a: &QRational, b: &QRational, op: QRatOp) -> Result<QRational, MathError> {
    Ok(match op {
        QRatOp::Add => a + b,
        QRatOp::Sub => a - b,
        QRatOp::Mul => a * b,
        QRatOp::Div => a.checked_div(b)?,
    })
}
