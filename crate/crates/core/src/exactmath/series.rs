use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use num_traits::{One, Zero};

use super::qrational::QRational;
use super::rational::{qi, Q};
use super::wscalar::WScalar;
use crate::error::MathError;

/// Sign attached to every residue extraction.
///
/// `Res_{v=inf}` of `v^{-1}` is `-1` under the orientation used by the vertex engine; this single
/// constant was calibrated so the one-point vertex function reproduces `c_circ` on `tch_0`.
pub const RESIDUE_SIGN: i64 = -1;

/// Coefficient ring of a [`TruncSeries`].
pub trait Coeff: Clone + PartialEq + fmt::Debug + fmt::Display + Send + Sync + 'static {
    fn c_zero() -> Self;
    fn c_one() -> Self;
    fn c_is_zero(&self) -> bool;
    fn from_q(q: Q) -> Self;
    fn add_assign_ref(&mut self, rhs: &Self);
    fn mul_ref(&self, rhs: &Self) -> Self;
    fn neg_ref(&self) -> Self;
    fn scale_q(&self, q: &Q) -> Self;
    fn try_inv(&self) -> Option<Self>;
}

impl Coeff for Q {
    fn c_zero() -> Self {
        Zero::zero()
    }
    fn c_one() -> Self {
        One::one()
    }
    fn c_is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn from_q(q: Q) -> Self {
        q
    }
    fn add_assign_ref(&mut self, rhs: &Self) {
        *self += rhs;
    }
    fn mul_ref(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn neg_ref(&self) -> Self {
        -self
    }
    fn scale_q(&self, q: &Q) -> Self {
        self * q
    }
    fn try_inv(&self) -> Option<Self> {
        if Zero::is_zero(self) {
            None
        } else {
            Some(self.recip())
        }
    }
}

impl Coeff for WScalar {
    fn c_zero() -> Self {
        WScalar::zero()
    }
    fn c_one() -> Self {
        WScalar::one()
    }
    fn c_is_zero(&self) -> bool {
        WScalar::is_zero(self)
    }
    fn from_q(q: Q) -> Self {
        WScalar::from_q(q)
    }
    fn add_assign_ref(&mut self, rhs: &Self) {
        *self += rhs;
    }
    fn mul_ref(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn neg_ref(&self) -> Self {
        -self
    }
    fn scale_q(&self, q: &Q) -> Self {
        self.scale(q)
    }
    fn try_inv(&self) -> Option<Self> {
        self.inverse()
    }
}

impl Coeff for QRational {
    fn c_zero() -> Self {
        QRational::zero()
    }
    fn c_one() -> Self {
        QRational::one()
    }
    fn c_is_zero(&self) -> bool {
        QRational::is_zero(self)
    }
    fn from_q(q: Q) -> Self {
        QRational::from_q(q)
    }
    fn add_assign_ref(&mut self, rhs: &Self) {
        *self = &*self + rhs;
    }
    fn mul_ref(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn neg_ref(&self) -> Self {
        -self
    }
    fn scale_q(&self, q: &Q) -> Self {
        self.scale(q)
    }
    fn try_inv(&self) -> Option<Self> {
        self.recip().ok()
    }
}

/// One series variable with its exponent window.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VarSpec {
    pub name: String,
    pub low: i32,
    pub high: i32,
    pub laurent: bool,
}

impl VarSpec {
    /// Power-series variable truncated above `high`.
    pub fn power(name: &str, high: i32) -> Self {
        Self {
            name: name.to_string(),
            low: 0,
            high,
            laurent: false,
        }
    }

    /// Laurent variable with window `[low, high]`.
    pub fn laurent(name: &str, low: i32, high: i32) -> Self {
        Self {
            name: name.to_string(),
            low,
            high,
            laurent: true,
        }
    }
}

/// Ordered variable list plus optional weighted-degree caps over power-series variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VarSet {
    vars: Vec<VarSpec>,
    weight_caps: Vec<(Vec<i32>, i32)>,
}

impl VarSet {
    pub fn new(vars: Vec<VarSpec>) -> Arc<Self> {
        Arc::new(Self {
            vars,
            weight_caps: Vec::new(),
        })
    }

    /// Terms with `sum_i weight_i * e_i > cap` are dropped. Weights must be non-negative and may
    /// only be placed on power-series variables, so dropping is compatible with multiplication.
    pub fn with_weight_cap(
        vars: Vec<VarSpec>,
        weights: &[(&str, i32)],
        cap: i32,
    ) -> Result<Arc<Self>, MathError> {
        Self::with_weight_caps(vars, &[(weights, cap)])
    }

    /// Several independent caps, each as in [`VarSet::with_weight_cap`].
    pub fn with_weight_caps(
        vars: Vec<VarSpec>,
        caps: &[(&[(&str, i32)], i32)],
    ) -> Result<Arc<Self>, MathError> {
        let mut weight_caps = Vec::new();
        for (weights, cap) in caps {
            let mut w = vec![0; vars.len()];
            for (name, wt) in weights.iter() {
                let i = vars
                    .iter()
                    .position(|v| v.name == *name)
                    .ok_or_else(|| MathError::UnknownVariable(name.to_string()))?;
                if vars[i].laurent || *wt < 0 {
                    return Err(MathError::IncompatibleWindows);
                }
                w[i] = *wt;
            }
            weight_caps.push((w, *cap));
        }
        Ok(Arc::new(Self { vars, weight_caps }))
    }

    pub fn vars(&self) -> &[VarSpec] {
        &self.vars
    }

    pub fn len(&self) -> usize {
        self.vars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty()
    }

    pub fn index(&self, name: &str) -> Result<usize, MathError> {
        self.vars
            .iter()
            .position(|v| v.name == name)
            .ok_or_else(|| MathError::UnknownVariable(name.to_string()))
    }

    /// `Ok(true)` if the exponent vector is stored, `Ok(false)` if it is truncated away.
    /// Truncation is decided before the underflow check, so a term that is dropped anyway never
    /// raises an error.
    fn admit(&self, e: &[i32]) -> Result<bool, MathError> {
        if self.vars.iter().zip(e).any(|(v, &x)| x > v.high) {
            return Ok(false);
        }
        for (w, cap) in &self.weight_caps {
            let s: i32 = w.iter().zip(e).map(|(a, b)| a * b).sum();
            if s > *cap {
                return Ok(false);
            }
        }
        for (v, &x) in self.vars.iter().zip(e) {
            if x < v.low {
                return Err(MathError::WindowUnderflow {
                    var: v.name.clone(),
                    exp: x,
                    low: v.low,
                });
            }
        }
        Ok(true)
    }
}

/// Truncated multivariate formal series with exact coefficients.
#[derive(Clone, Debug)]
pub struct TruncSeries<C: Coeff> {
    vars: Arc<VarSet>,
    terms: HashMap<Vec<i32>, C>,
}

impl<C: Coeff> PartialEq for TruncSeries<C> {
    fn eq(&self, other: &Self) -> bool {
        *self.vars == *other.vars && self.terms == other.terms
    }
}

impl<C: Coeff> TruncSeries<C> {
    pub fn zero(vars: &Arc<VarSet>) -> Self {
        Self {
            vars: vars.clone(),
            terms: HashMap::new(),
        }
    }

    pub fn constant(vars: &Arc<VarSet>, c: C) -> Self {
        let mut s = Self::zero(vars);
        if !c.c_is_zero() {
            s.terms.insert(vec![0; vars.len()], c);
        }
        s
    }

    pub fn one(vars: &Arc<VarSet>) -> Self {
        Self::constant(vars, C::c_one())
    }

    pub fn from_q(vars: &Arc<VarSet>, q: Q) -> Self {
        Self::constant(vars, C::from_q(q))
    }

    /// `c * prod var^e`; zero if truncated away.
    pub fn monomial(vars: &Arc<VarSet>, powers: &[(&str, i32)], c: C) -> Result<Self, MathError> {
        let mut e = vec![0; vars.len()];
        for (name, p) in powers {
            e[vars.index(name)?] += p;
        }
        let mut s = Self::zero(vars);
        if !c.c_is_zero() && vars.admit(&e)? {
            s.terms.insert(e, c);
        }
        Ok(s)
    }

    pub fn var(vars: &Arc<VarSet>, name: &str) -> Result<Self, MathError> {
        Self::monomial(vars, &[(name, 1)], C::c_one())
    }

    pub fn from_terms(
        vars: &Arc<VarSet>,
        terms: impl IntoIterator<Item = (Vec<i32>, C)>,
    ) -> Result<Self, MathError> {
        let mut s = Self::zero(vars);
        for (e, c) in terms {
            if e.len() != vars.len() {
                return Err(MathError::IncompatibleWindows);
            }
            if vars.admit(&e)? {
                s.add_term(e, &c);
            }
        }
        Ok(s)
    }

    pub fn vars(&self) -> &Arc<VarSet> {
        &self.vars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in lexicographic exponent order.
    pub fn terms(&self) -> Vec<(&[i32], &C)> {
        let mut v: Vec<_> = self.terms.iter().map(|(e, c)| (e.as_slice(), c)).collect();
        v.sort_by(|a, b| a.0.cmp(b.0));
        v
    }

    pub fn get(&self, e: &[i32]) -> C {
        self.terms.get(e).cloned().unwrap_or_else(C::c_zero)
    }

    /// Coefficient of the monomial `prod var^e` (unlisted variables at exponent 0).
    pub fn coeff(&self, powers: &[(&str, i32)]) -> Result<C, MathError> {
        let mut e = vec![0; self.vars.len()];
        for (name, p) in powers {
            e[self.vars.index(name)?] += p;
        }
        Ok(self.get(&e))
    }

    pub fn constant_term(&self) -> C {
        self.get(&vec![0; self.vars.len()])
    }

    fn add_term(&mut self, e: Vec<i32>, c: &C) {
        if c.c_is_zero() {
            return;
        }
        match self.terms.get_mut(&e) {
            Some(v) => {
                v.add_assign_ref(c);
                if v.c_is_zero() {
                    self.terms.remove(&e);
                }
            }
            None => {
                self.terms.insert(e, c.clone());
            }
        }
    }

    fn check_same(&self, other: &Self) -> Result<(), MathError> {
        if Arc::ptr_eq(&self.vars, &other.vars) || *self.vars == *other.vars {
            Ok(())
        } else {
            Err(MathError::IncompatibleWindows)
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self, MathError> {
        self.check_same(other)?;
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), c);
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self, MathError> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        self.map_terms(|c| c.neg_ref())
    }

    pub fn scale(&self, c: &C) -> Self {
        if c.c_is_zero() {
            return Self::zero(&self.vars);
        }
        self.map_terms(|x| x.mul_ref(c))
    }

    pub fn scale_q(&self, q: &Q) -> Self {
        if q.is_zero() {
            return Self::zero(&self.vars);
        }
        self.map_terms(|x| x.scale_q(q))
    }

    fn map_terms(&self, f: impl Fn(&C) -> C) -> Self {
        let mut out = Self::zero(&self.vars);
        for (e, c) in &self.terms {
            let v = f(c);
            if !v.c_is_zero() {
                out.terms.insert(e.clone(), v);
            }
        }
        out
    }

    /// Applies `f` to every coefficient, moving to another coefficient ring.
    pub fn map_coeffs<D: Coeff>(&self, f: impl Fn(&C) -> D) -> TruncSeries<D> {
        let mut out = TruncSeries::<D>::zero(&self.vars);
        for (e, c) in &self.terms {
            let v = f(c);
            if !v.c_is_zero() {
                out.terms.insert(e.clone(), v);
            }
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Result<Self, MathError> {
        self.check_same(other)?;
        self.mul_filtered(other, |_| true)
    }

    fn mul_filtered(&self, other: &Self, keep: impl Fn(&[i32]) -> bool) -> Result<Self, MathError> {
        let n = self.vars.len();
        let highs: Vec<i32> = self.vars.vars.iter().map(|v| v.high).collect();
        let mut out = Self::zero(&self.vars);
        let mut buf = vec![0i32; n];
        // Iterate the smaller side in the outer loop.
        let (a, b) = if self.terms.len() <= other.terms.len() {
            (self, other)
        } else {
            (other, self)
        };
        for (ea, ca) in &a.terms {
            'inner: for (eb, cb) in &b.terms {
                for i in 0..n {
                    let s = ea[i] + eb[i];
                    if s > highs[i] {
                        continue 'inner;
                    }
                    buf[i] = s;
                }
                if !keep(&buf) || !self.vars.admit(&buf)? {
                    continue;
                }
                let prod = ca.mul_ref(cb);
                match out.terms.get_mut(buf.as_slice()) {
                    Some(v) => v.add_assign_ref(&prod),
                    None => {
                        out.terms.insert(buf.clone(), prod);
                    }
                }
            }
        }
        out.terms.retain(|_, c| !c.c_is_zero());
        Ok(out)
    }

    pub fn pow(&self, n: u32) -> Result<Self, MathError> {
        let mut acc = Self::one(&self.vars);
        for _ in 0..n {
            acc = acc.mul(self)?;
        }
        Ok(acc)
    }

    /// Multiplies by `name^delta`.
    pub fn shift(&self, name: &str, delta: i32) -> Result<Self, MathError> {
        let i = self.vars.index(name)?;
        let mut out = Self::zero(&self.vars);
        for (e, c) in &self.terms {
            let mut e2 = e.clone();
            e2[i] += delta;
            if self.vars.admit(&e2)? {
                out.terms.insert(e2, c.clone());
            }
        }
        Ok(out)
    }

    /// Every term carries a positive power of some variable with a non-negative window, so
    /// powers of the series eventually truncate to zero.
    pub fn is_nilpotent(&self) -> bool {
        let vars = &self.vars.vars;
        self.terms
            .keys()
            .all(|e| e.iter().zip(vars).any(|(&x, v)| v.low >= 0 && x > 0))
    }

    /// `sum_m coeffs(m) * self^m` for nilpotent `self`.
    fn nilpotent_sum(&self, coeffs: impl Fn(u32) -> Q) -> Result<Self, MathError> {
        if !self.is_nilpotent() {
            return Err(MathError::NotNilpotent);
        }
        let mut acc = Self::from_q(&self.vars, coeffs(0));
        let mut p = Self::one(&self.vars);
        let mut m = 0u32;
        loop {
            p = p.mul(self)?;
            m += 1;
            if p.is_zero() {
                break;
            }
            let c = coeffs(m);
            if !c.c_is_zero() {
                acc = acc.add(&p.scale_q(&c))?;
            }
        }
        Ok(acc)
    }

    pub fn exp(&self) -> Result<Self, MathError> {
        let mut inv_fact = vec![Q::one()];
        for m in 1..=512u32 {
            let prev = inv_fact[m as usize - 1].clone();
            inv_fact.push(prev / qi(m as i64));
        }
        self.nilpotent_sum(|m| inv_fact.get(m as usize).cloned().unwrap_or_else(Q::zero))
    }

    /// `log(1 + self)` for nilpotent `self`.
    pub fn log1p(&self) -> Result<Self, MathError> {
        self.nilpotent_sum(|m| {
            if m == 0 {
                Q::zero()
            } else {
                let s = if m % 2 == 1 { 1 } else { -1 };
                Q::new(s.into(), (m as i64).into())
            }
        })
    }

    /// `(1 + self)^q` for nilpotent `self` and rational `q`.
    pub fn one_plus_pow(&self, q: &Q) -> Result<Self, MathError> {
        let q = q.clone();
        self.nilpotent_sum(move |m| {
            let mut c = Q::one();
            for i in 0..m {
                c = c * (&q - qi(i as i64)) / qi(i as i64 + 1);
            }
            c
        })
    }

    /// Multiplicative inverse: invertible constant term plus nilpotent remainder.
    pub fn recip(&self) -> Result<Self, MathError> {
        let c0 = self.constant_term();
        let inv = c0.try_inv().ok_or(MathError::NotInvertible)?;
        let rest = self
            .sub(&Self::constant(&self.vars, c0))?
            .scale(&inv.neg_ref());
        Ok(rest.nilpotent_sum(|_| Q::one())?.scale(&inv))
    }

    pub fn derivative(&self, name: &str) -> Result<Self, MathError> {
        let i = self.vars.index(name)?;
        let mut out = Self::zero(&self.vars);
        for (e, c) in &self.terms {
            if e[i] != 0 {
                let mut e2 = e.clone();
                e2[i] -= 1;
                if self.vars.admit(&e2)? {
                    out.add_term(e2, &c.scale_q(&qi(e[i] as i64)));
                }
            }
        }
        Ok(out)
    }

    /// Terms with `name^e`, with that exponent reset to zero.
    pub fn coeff_of(&self, name: &str, e: i32) -> Result<Self, MathError> {
        let i = self.vars.index(name)?;
        let mut out = Self::zero(&self.vars);
        for (ex, c) in &self.terms {
            if ex[i] == e {
                let mut e2 = ex.clone();
                e2[i] = 0;
                out.add_term(e2, c);
            }
        }
        Ok(out)
    }

    /// Coefficient of `name^{-1}`, times [`RESIDUE_SIGN`].
    pub fn residue(&self, name: &str) -> Result<Self, MathError> {
        let i = self.vars.index(name)?;
        if !self.vars.vars[i].laurent {
            return Err(MathError::NotLaurent(name.to_string()));
        }
        Ok(self.coeff_of(name, -1)?.scale_q(&qi(RESIDUE_SIGN)))
    }

    /// Coefficient of `name^e` in `self * other`, without forming the full product.
    pub fn coeff_of_product(&self, other: &Self, name: &str, e: i32) -> Result<Self, MathError> {
        self.check_same(other)?;
        let i = self.vars.index(name)?;
        let prod = self.mul_filtered(other, |x| x[i] == e)?;
        prod.coeff_of(name, e)
    }

    /// `Res_name(self * other)`.
    pub fn residue_of_product(&self, other: &Self, name: &str) -> Result<Self, MathError> {
        let i = self.vars.index(name)?;
        if !self.vars.vars[i].laurent {
            return Err(MathError::NotLaurent(name.to_string()));
        }
        Ok(self
            .coeff_of_product(other, name, -1)?
            .scale_q(&qi(RESIDUE_SIGN)))
    }

    /// Replaces every variable of `self` by a series over `target`.
    ///
    /// Negative exponents require the image to be a monomial with invertible coefficient.
    pub fn compose(&self, target: &Arc<VarSet>, images: &[Self]) -> Result<Self, MathError> {
        if images.len() != self.vars.len() || images.iter().any(|s| *s.vars != **target) {
            return Err(MathError::IncompatibleWindows);
        }
        let mut cache: HashMap<(usize, i32), Self> = HashMap::new();
        let mut out = Self::zero(target);
        for (e, c) in self.terms() {
            let mut acc = Self::constant(target, c.clone());
            for (i, &p) in e.iter().enumerate() {
                if p == 0 {
                    continue;
                }
                if !cache.contains_key(&(i, p)) {
                    let base = if p > 0 {
                        images[i].clone()
                    } else {
                        monomial_inverse(&images[i], &self.vars.vars[i].name)?
                    };
                    let pw = base.pow(p.unsigned_abs())?;
                    cache.insert((i, p), pw);
                }
                acc = acc.mul(&cache[&(i, p)])?;
                if acc.is_zero() {
                    break;
                }
            }
            out = out.add(&acc)?;
        }
        Ok(out)
    }

    /// Moves the series into `target`, matching variables by name. Variables missing from
    /// `target` must appear only at exponent 0.
    pub fn embed(&self, target: &Arc<VarSet>) -> Result<Self, MathError> {
        let map: Vec<Option<usize>> = self
            .vars
            .vars
            .iter()
            .map(|v| target.index(&v.name).ok())
            .collect();
        let mut out = Self::zero(target);
        for (e, c) in &self.terms {
            let mut e2 = vec![0; target.len()];
            for (i, &p) in e.iter().enumerate() {
                match map[i] {
                    Some(j) => e2[j] = p,
                    None if p == 0 => {}
                    None => return Err(MathError::UnknownVariable(self.vars.vars[i].name.clone())),
                }
            }
            if target.admit(&e2)? {
                out.add_term(e2, c);
            }
        }
        Ok(out)
    }

    /// Replaces `name` by `s` (a series over the same variables).
    pub fn substitute(&self, name: &str, s: &Self) -> Result<Self, MathError> {
        let idx = self.vars.index(name)?;
        let images: Vec<Self> = (0..self.vars.len())
            .map(|i| {
                if i == idx {
                    Ok(s.clone())
                } else {
                    Self::var(&self.vars, &self.vars.vars[i].name)
                }
            })
            .collect::<Result<_, _>>()?;
        self.compose(&self.vars.clone(), &images)
    }
}

fn monomial_inverse<C: Coeff>(s: &TruncSeries<C>, name: &str) -> Result<TruncSeries<C>, MathError> {
    if s.terms.len() != 1 {
        return Err(MathError::NegativeSubstitution(name.to_string()));
    }
    let (e, c) = s.terms.iter().next().unwrap();
    let inv = c.try_inv().ok_or(MathError::NotInvertible)?;
    let e2: Vec<i32> = e.iter().map(|x| -x).collect();
    TruncSeries::from_terms(&s.vars, [(e2, inv)])
}

impl<C: Coeff> fmt::Display for TruncSeries<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms = self.terms();
        if terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (e, c)) in terms.iter().enumerate() {
            if k > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({c})")?;
            for (v, p) in self.vars.vars.iter().zip(e.iter()) {
                match *p {
                    0 => {}
                    1 => write!(f, "*{}", v.name)?,
                    _ => write!(f, "*{}^{}", v.name, p)?,
                }
            }
        }
        Ok(())
    }
}
