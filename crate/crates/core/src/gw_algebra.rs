//! Gromov-Witten descendent algebra in the `tau` basis (with the negative symbols `tau_{-1}`,
//! `tau_{-2}`) and in the Heisenberg basis `a_n`, plus the GW Virasoro operators.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_traits::{One, Signed, Zero};

use crate::cohomology::{CohClass, CohRing};
use crate::error::{Error, Result};
use crate::exactmath::{bracket_ej, elementary_symmetric, factorial, factorial_q, fmt_q, qi, qr, WScalar, Q};

/// A generator that can be printed against a ring.
pub trait Generator: Copy + Ord + fmt::Debug + Send + Sync {
    fn fmt_in(&self, ring: &CohRing) -> String;
}

/// `tau_level(gamma_b)`; levels `-1` and `-2` are the formal negative symbols.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Tau(pub i32, pub usize);

/// Heisenberg generator: a negative `tau` symbol or `a_n(gamma_b)` with `n >= 1`.
/// Negative symbols sort first.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AGen {
    Neg(i32, usize),
    A(u32, usize),
}

impl Generator for Tau {
    fn fmt_in(&self, ring: &CohRing) -> String {
        format!("tau({},{})", self.0, ring.label(self.1))
    }
}

impl Generator for AGen {
    fn fmt_in(&self, ring: &CohRing) -> String {
        match self {
            AGen::Neg(l, b) => format!("tau({l},{})", ring.label(*b)),
            AGen::A(n, b) => format!("a({n},{})", ring.label(*b)),
        }
    }
}

/// Commutative polynomial in generators `G` with `WScalar` coefficients. Monomials are sorted
/// generator lists, so negative symbols always sit on the left.
#[derive(Clone, PartialEq)]
pub struct GwPoly<G: Generator> {
    ring: Arc<CohRing>,
    terms: BTreeMap<Vec<G>, WScalar>,
}

/// Element of the descendent algebra in the `tau` basis.
pub type GwElement = GwPoly<Tau>;
/// Element written in Heisenberg generators.
pub type HeisenbergExpr = GwPoly<AGen>;

impl<G: Generator> fmt::Debug for GwPoly<G> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GwPoly[{}]({})", self.ring.name(), self)
    }
}

impl<G: Generator> GwPoly<G> {
    pub fn zero(ring: &Arc<CohRing>) -> Self {
        Self { ring: ring.clone(), terms: BTreeMap::new() }
    }

    pub fn one(ring: &Arc<CohRing>) -> Self {
        Self::constant(ring, WScalar::one())
    }

    pub fn constant(ring: &Arc<CohRing>, c: WScalar) -> Self {
        Self::monomial(ring, Vec::new(), c)
    }

    pub fn monomial(ring: &Arc<CohRing>, mut gens: Vec<G>, c: WScalar) -> Self {
        gens.sort();
        let mut e = Self::zero(ring);
        e.add_term(gens, c);
        e
    }

    pub fn gen(ring: &Arc<CohRing>, g: G) -> Self {
        Self::monomial(ring, vec![g], WScalar::one())
    }

    pub fn ring(&self) -> &Arc<CohRing> {
        &self.ring
    }

    pub fn terms(&self) -> &BTreeMap<Vec<G>, WScalar> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, m: &[G]) -> WScalar {
        self.terms.get(m).cloned().unwrap_or_default()
    }

    /// Add `c` times a sorted monomial.
    pub fn add_term(&mut self, m: Vec<G>, c: WScalar) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += &c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    fn check(&self, other: &Self) -> Result<()> {
        if !Arc::ptr_eq(&self.ring, &other.ring) && *self.ring != *other.ring {
            return Err(Error::RingMismatch);
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(&WScalar::from_int(-1)))
    }

    pub fn scale(&self, c: &WScalar) -> Self {
        let mut out = Self::zero(&self.ring);
        for (m, v) in &self.terms {
            out.add_term(m.clone(), v * c);
        }
        out
    }

    pub fn scale_q(&self, c: &Q) -> Self {
        self.scale(&WScalar::from_q(c.clone()))
    }

    fn merge(a: &[G], b: &[G]) -> Vec<G> {
        let mut m = Vec::with_capacity(a.len() + b.len());
        m.extend_from_slice(a);
        m.extend_from_slice(b);
        m.sort();
        m
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let mut out = Self::zero(&self.ring);
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                out.add_term(Self::merge(m1, m2), c1 * c2);
            }
        }
        Ok(out)
    }

    /// Derivation from its values on generators.
    pub fn derivation(&self, f: &mut impl FnMut(G) -> Self) -> Self {
        let mut cache: BTreeMap<G, Self> = BTreeMap::new();
        let mut out = Self::zero(&self.ring);
        for (m, c) in &self.terms {
            for pos in 0..m.len() {
                if pos > 0 && m[pos - 1] == m[pos] {
                    continue;
                }
                let mult = m.iter().filter(|h| **h == m[pos]).count() as i64;
                let img = cache.entry(m[pos]).or_insert_with(|| f(m[pos]));
                let mut rest = m.clone();
                rest.remove(pos);
                let cm = c.scale(&qi(mult));
                for (mm, cc) in &img.terms {
                    out.add_term(Self::merge(&rest, mm), &cm * cc);
                }
            }
        }
        out
    }

    /// Multiplicative substitution into another generator type.
    pub fn substitute<H: Generator>(&self, f: &mut impl FnMut(G) -> Result<GwPoly<H>>) -> Result<GwPoly<H>> {
        let mut cache: BTreeMap<G, GwPoly<H>> = BTreeMap::new();
        let mut out = GwPoly::<H>::zero(&self.ring);
        for (m, c) in &self.terms {
            let mut acc = GwPoly::<H>::constant(&self.ring, c.clone());
            for g in m {
                let img = match cache.get(g) {
                    Some(x) => x.clone(),
                    None => {
                        let x = f(*g)?;
                        cache.insert(*g, x.clone());
                        x
                    }
                };
                acc = acc.mul(&img)?;
                if acc.is_zero() {
                    break;
                }
            }
            for (mm, cc) in acc.terms {
                out.add_term(mm, cc);
            }
        }
        Ok(out)
    }
}

impl<G: Generator> fmt::Display for GwPoly<G> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (m, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            let mono = fmt_monomial(m, &self.ring);
            let coeff = match c.as_monomial() {
                Some((0, q)) if q.is_positive() && q.is_integer() => fmt_q(q),
                _ => format!("({c})"),
            };
            match (m.is_empty(), coeff.as_str()) {
                (true, _) => write!(f, "{coeff}")?,
                (false, "1") => write!(f, "{mono}")?,
                _ => write!(f, "{coeff}*{mono}")?,
            }
        }
        Ok(())
    }
}

fn fmt_monomial<G: Generator>(m: &[G], ring: &CohRing) -> String {
    let mut parts = Vec::new();
    let mut i = 0;
    while i < m.len() {
        let mut e = 1;
        while i + e < m.len() && m[i + e] == m[i] {
            e += 1;
        }
        let s = m[i].fmt_in(ring);
        parts.push(if e > 1 { format!("{s}^{e}") } else { s });
        i += e;
    }
    parts.join("*")
}

/// Linear combination `sum_b v_b tau_level(gamma_b)`, dropping levels below `-2`.
pub fn tau_vec(ring: &Arc<CohRing>, level: i64, v: &[Q]) -> GwElement {
    let mut out = GwElement::zero(ring);
    if level < -2 {
        return out;
    }
    for (b, c) in v.iter().enumerate() {
        out.add_term(vec![Tau(level as i32, b)], WScalar::from_q(c.clone()));
    }
    out
}

/// Linear combination of `a_n(gamma_b)`; `a_0` and below give 0.
pub fn a_vec(ring: &Arc<CohRing>, n: i64, v: &[Q]) -> HeisenbergExpr {
    let mut out = HeisenbergExpr::zero(ring);
    if n <= 0 {
        return out;
    }
    for (b, c) in v.iter().enumerate() {
        out.add_term(vec![AGen::A(n as u32, b)], WScalar::from_q(c.clone()));
    }
    out
}

/// Kind of factor for [`build_gw_element`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GwKind {
    Tau,
    A,
}

/// Container returned by [`build_gw_element`].
#[derive(Clone, Debug, PartialEq)]
pub enum GwBuilt {
    Tau(GwElement),
    Heisenberg(HeisenbergExpr),
}

/// Product of factors of a single kind.
pub fn build_gw_element(ring: &Arc<CohRing>, spec: &[(GwKind, i64, CohClass)]) -> Result<GwBuilt> {
    let kind = spec.first().map(|s| s.0).unwrap_or(GwKind::Tau);
    if spec.iter().any(|s| s.0 != kind) {
        return Err(Error::InvalidRing("mixed tau and a factors; convert first".into()));
    }
    match kind {
        GwKind::Tau => {
            let mut out = GwElement::one(ring);
            for (_, l, g) in spec {
                if *l < -2 {
                    return Err(Error::NegativeIndex(*l));
                }
                out = out.mul(&tau_vec(ring, *l, g.coeffs()))?;
            }
            Ok(GwBuilt::Tau(out))
        }
        GwKind::A => {
            let mut out = HeisenbergExpr::one(ring);
            for (_, n, g) in spec {
                if *n < 0 {
                    return Err(Error::NegativeIndex(*n));
                }
                out = out.mul(&a_vec(ring, *n, g.coeffs()))?;
            }
            Ok(GwBuilt::Heisenberg(out))
        }
    }
}

/// `e_j(1, 1/2, ..., 1/k)`.
pub fn harmonic_e(j: usize, k: usize) -> Q {
    let vals: Vec<Q> = (1..=k as i64).map(|i| qr(1, i)).collect();
    elementary_symmetric(j, &vals).unwrap_or_else(|_| Q::zero())
}

/// How `tau_0` and `a_1` are identified.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Dictionary {
    /// `tau_0(g) = a_1(g) + (1/24) int g c2`.
    #[default]
    Shifted,
    /// `tau_0(g) = a_1(g)`.
    Unshifted,
}

/// The constant `c` in `tau_0(v) = a_1(v) + c`.
pub fn a1_constant(ring: &CohRing, v: &[Q], dict: Dictionary) -> Q {
    match dict {
        Dictionary::Shifted => ring.integrate_vec(&ring.mul_vec(v, ring.c2_vec())) * qr(1, 24),
        Dictionary::Unshifted => Q::zero(),
    }
}

/// `a_{k+1}(v)` in the `tau` basis:
/// `(iu)^k a_{k+1}/(k+1)! = sum_j e_j(1,...,1/k) tau_{k-j}(v c1^j)` for `k >= 1`, and
/// `a_1(v) = tau_0(v) - (1/24) int v c2`.
pub fn a_to_tau_vec(ring: &Arc<CohRing>, n: u32, v: &[Q]) -> GwElement {
    a_to_tau_vec_in(ring, n, v, Dictionary::Shifted)
}

pub fn a_to_tau_vec_in(ring: &Arc<CohRing>, n: u32, v: &[Q], dict: Dictionary) -> GwElement {
    if n == 1 {
        let c = -a1_constant(ring, v, dict);
        let mut out = tau_vec(ring, 0, v);
        out.add_term(Vec::new(), WScalar::from_q(c));
        return out;
    }
    let k = (n - 1) as usize;
    let mut out = GwElement::zero(ring);
    let mut vj = v.to_vec();
    for j in 0..=k {
        if vj.iter().all(Zero::is_zero) {
            break;
        }
        let e = harmonic_e(j, k);
        for (m, c) in tau_vec(ring, (k - j) as i64, &vj).terms {
            out.add_term(m, c.scale(&e));
        }
        vj = ring.mul_vec(&vj, ring.c1_vec());
    }
    let pref = WScalar::monomial(Q::from(factorial(n)), -(k as i32));
    out.scale(&pref)
}

/// Convert a Heisenberg expression to the `tau` basis.
pub fn a_to_tau(x: &HeisenbergExpr) -> GwElement {
    a_to_tau_in(x, Dictionary::Shifted)
}

pub fn a_to_tau_in(x: &HeisenbergExpr, dict: Dictionary) -> GwElement {
    let ring = x.ring.clone();
    x.substitute(&mut |g| {
        Ok(match g {
            AGen::Neg(l, b) => GwElement::gen(&ring, Tau(l, b)),
            AGen::A(n, b) => a_to_tau_vec_in(&ring, n, &ring.basis_vec(b), dict),
        })
    })
    .expect("same ring")
}

/// `tau_k(v)` in Heisenberg generators, by inverting the triangular dictionary.
pub fn tau_to_a_vec(ring: &Arc<CohRing>, k: i64, v: &[Q]) -> Result<HeisenbergExpr> {
    tau_to_a_vec_in(ring, k, v, Dictionary::Shifted)
}

pub fn tau_to_a_vec_in(ring: &Arc<CohRing>, k: i64, v: &[Q], dict: Dictionary) -> Result<HeisenbergExpr> {
    if v.iter().all(Zero::is_zero) {
        return Ok(HeisenbergExpr::zero(ring));
    }
    if k < 0 {
        let mut out = HeisenbergExpr::zero(ring);
        for (b, c) in v.iter().enumerate() {
            out.add_term(vec![AGen::Neg(k as i32, b)], WScalar::from_q(c.clone()));
        }
        return Ok(out);
    }
    if k >= 2 && !v[0].is_zero() {
        return Err(Error::UnitDescendent(format!("tau_{k}(1)")));
    }
    if k == 0 {
        let c = a1_constant(ring, v, dict);
        let mut out = a_vec(ring, 1, v);
        out.add_term(Vec::new(), WScalar::from_q(c));
        return Ok(out);
    }
    let ku = k as usize;
    let lead = WScalar::monomial(Q::one() / Q::from(factorial(ku as u32 + 1)), k as i32);
    let mut out = a_vec(ring, k + 1, v).scale(&lead);
    let mut vj = ring.mul_vec(v, ring.c1_vec());
    for j in 1..=ku {
        if vj.iter().all(Zero::is_zero) {
            break;
        }
        let e = harmonic_e(j, ku);
        let lower = tau_to_a_vec_in(ring, (ku - j) as i64, &vj, dict)?;
        out = out.sub(&lower.scale_q(&e))?;
        vj = ring.mul_vec(&vj, ring.c1_vec());
    }
    Ok(out)
}

/// Convert a `tau` element to Heisenberg generators.
pub fn tau_to_a(x: &GwElement) -> Result<HeisenbergExpr> {
    tau_to_a_in(x, Dictionary::Shifted)
}

pub fn tau_to_a_in(x: &GwElement, dict: Dictionary) -> Result<HeisenbergExpr> {
    let ring = x.ring.clone();
    x.substitute(&mut |Tau(l, b)| tau_to_a_vec_in(&ring, l as i64, &ring.basis_vec(b), dict))
}

/// Derivation `R^j_k`: `tau_i(g) -> [i+d-1]^k_j tau_{k+i-j}(g c1^j)`, levels below `-2` dropped.
pub fn apply_rkj(k: i64, j: u32, d: &GwElement) -> Result<GwElement> {
    if k < -1 {
        return Err(Error::BadLevel(k));
    }
    let ring = d.ring.clone();
    let c1j = ring.c1_pow_vec(j);
    Ok(d.derivation(&mut |Tau(i, b)| {
        let i = i as i64;
        let deg = ring.degree(b) as i64;
        let c = bracket_ej(i + deg - 1, k, j as i64);
        if c.is_zero() {
            return GwElement::zero(&ring);
        }
        let v = ring.mul_vec(&ring.basis_vec(b), &c1j);
        tau_vec(&ring, k + i - j as i64, &v).scale_q(&c)
    }))
}

/// `R_k = sum_j R^j_k`.
pub fn apply_rk_gw(k: i64, d: &GwElement) -> Result<GwElement> {
    let mut out = GwElement::zero(&d.ring);
    for j in 0..=d.ring.top_degree() {
        out = out.add(&apply_rkj(k, j, d)?)?;
    }
    Ok(out)
}

/// Second-order operator `B^k`: each unordered pair of `tau_0` factors is replaced by
/// `int g g' c1^k`.
pub fn apply_bk(k: u32, d: &GwElement) -> GwElement {
    let ring = d.ring.clone();
    let c1k = ring.c1_pow_vec(k);
    let mut out = GwElement::zero(&ring);
    for (m, c) in &d.terms {
        for p in 0..m.len() {
            if m[p].0 != 0 {
                continue;
            }
            for q in p + 1..m.len() {
                if m[q].0 != 0 {
                    continue;
                }
                let prod = ring.mul_vec(&ring.mul_vec(&ring.basis_vec(m[p].1), &ring.basis_vec(m[q].1)), &c1k);
                let val = ring.integrate_vec(&prod);
                if val.is_zero() {
                    continue;
                }
                let rest: Vec<Tau> =
                    m.iter().enumerate().filter(|(i, _)| *i != p && *i != q).map(|(_, t)| *t).collect();
                out.add_term(rest, c.scale(&val));
            }
        }
    }
    out
}

/// `T^j_k = sum_{m=-1}^{k-j+2} (-1)^{m+1} [2-m-d_L]^k_j :tau_{m-1} tau_{k-j-m}(c1^j):`.
pub fn build_tkj(k: i64, j: u32, ring: &Arc<CohRing>) -> GwElement {
    let mut out = GwElement::zero(ring);
    let c1j = ring.c1_pow_vec(j);
    let pairs = ring.kunneth_terms(&c1j);
    for m in -1..=k - j as i64 + 2 {
        let sign = if (m + 1) % 2 == 0 { Q::one() } else { -Q::one() };
        for (l, r, c) in &pairs {
            let dl = ring.degree(*l) as i64;
            let w = bracket_ej(2 - m - dl, k, j as i64);
            if w.is_zero() {
                continue;
            }
            let (a, b) = (m - 1, k - j as i64 - m);
            if a < -2 || b < -2 {
                continue;
            }
            let mono = vec![Tau(a as i32, *l), Tau(b as i32, *r)];
            let mut mono = mono;
            mono.sort();
            out.add_term(mono, WScalar::from_q(&sign * &w * c));
        }
    }
    out
}

/// `T'_k = sum_{j>0} T^j_k`.
pub fn build_tprime(k: i64, ring: &Arc<CohRing>) -> GwElement {
    let mut out = GwElement::zero(ring);
    for j in 1..=ring.top_degree() {
        out = out.add(&build_tkj(k, j, ring)).expect("same ring");
    }
    out
}

/// `T'_k` in Heisenberg form:
/// `-(iu)^{k-2} sum_{a+b=k+2} (-1)^{dLdR}(a+dL-3)!(b+dR-3)! a_{a-1}a_{b-1}(c1)/((a-1)!(b-1)!)`
/// with `a_0 = 0` and `a_{-1}/(-1)! = (iu)^2 tau_{-2}`.
pub fn build_tprime_compact(k: i64, ring: &Arc<CohRing>) -> HeisenbergExpr {
    let mut out = HeisenbergExpr::zero(ring);
    // a_{n-1}/(n-1)! as a generator with its weight
    let factor = |n: i64, b: usize| -> Option<(AGen, WScalar)> {
        match n {
            0 => Some((AGen::Neg(-2, b), WScalar::w_pow(2))),
            1 => None,
            _ => Some((AGen::A((n - 1) as u32, b), WScalar::from_q(Q::one() / Q::from(factorial((n - 1) as u32))))),
        }
    };
    for a in 0..=k + 2 {
        let b = k + 2 - a;
        for (l, r, c) in ring.kunneth_terms(ring.c1_vec()) {
            let (dl, dr) = (ring.degree(l) as i64, ring.degree(r) as i64);
            let (Some(fa), Some(fb)) = (factorial_q(a + dl - 3), factorial_q(b + dr - 3)) else {
                continue;
            };
            let (Some((ga, wa)), Some((gb, wb))) = (factor(a, l), factor(b, r)) else { continue };
            let sign = if (dl * dr) % 2 == 0 { -Q::one() } else { Q::one() };
            let coeff = &(&WScalar::monomial(sign * fa * fb * c, (k - 2) as i32) * &wa) * &wb;
            let mut mono = vec![ga, gb];
            mono.sort();
            out.add_term(mono, coeff);
        }
    }
    out
}

/// `(1/2) T^0_k` in the closed form `(k+1)! :tau_0(1) tau_{k-1}(pt):`.
pub fn build_half_t0_closed(k: i64, ring: &Arc<CohRing>) -> Result<GwElement> {
    let pt = ring.point_vec()?;
    let t = tau_vec(ring, 0, &ring.basis_vec(0)).mul(&tau_vec(ring, k - 1, &pt))?;
    Ok(t.scale_q(&Q::from(factorial((k + 1) as u32))))
}

/// Selector for [`build_tk_gw`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TkWhich {
    Tj(u32),
    TprimeTau,
    TprimeCompact,
    T0,
}

/// Build one of the `T` pieces in the `tau` basis (the compact form is converted).
pub fn build_tk_gw(k: i64, ring: &Arc<CohRing>, which: TkWhich) -> Result<GwElement> {
    if k < -1 {
        return Err(Error::BadLevel(k));
    }
    Ok(match which {
        TkWhich::Tj(j) => build_tkj(k, j, ring),
        TkWhich::TprimeTau => build_tprime(k, ring),
        TkWhich::TprimeCompact => a_to_tau(&build_tprime_compact(k, ring)),
        TkWhich::T0 => build_tkj(k, 0, ring),
    })
}

/// Which GW Virasoro operator to apply.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GwVirasoro {
    /// `(iu)^2/2 T'_k + R_k + u^{-2}/2 B^{k+1} - delta_{k,0}/24 int c1 c2`.
    Ltilde,
    /// `(iu)^2/2 T'_k + R_k + u^{-2}/2 B^{k+1} + (iu)^2 (k+1)! R_{-1} tau_{k-1}(pt)`.
    Lcal,
}

pub fn apply_gw_virasoro(k: i64, d: &GwElement, which: GwVirasoro) -> Result<GwElement> {
    if k < -1 {
        return Err(Error::BadLevel(k));
    }
    let ring = d.ring.clone();
    let half_w2 = WScalar::monomial(qr(1, 2), 2);
    // u^{-2} = -w^{-2}
    let half_u_m2 = WScalar::monomial(qr(-1, 2), -2);
    let mut out = build_tprime(k, &ring).mul(d)?.scale(&half_w2);
    out = out.add(&apply_rk_gw(k, d)?)?;
    out = out.add(&apply_bk((k + 1) as u32, d).scale(&half_u_m2))?;
    match which {
        GwVirasoro::Ltilde => {
            if k == 0 {
                let c = ring.integrate_vec(&ring.mul_vec(ring.c1_vec(), ring.c2_vec())) * qr(-1, 24);
                out = out.add(&d.scale_q(&c))?;
            }
        }
        GwVirasoro::Lcal => {
            let pt = ring.point_vec()?;
            let x = tau_vec(&ring, k - 1, &pt).mul(d)?;
            let f = WScalar::monomial(Q::from(factorial((k + 1) as u32)), 2);
            out = out.add(&apply_rkj(-1, 0, &x)?.scale(&f))?;
        }
    }
    Ok(out)
}

/// Restrictions applied to negative symbols before comparing intertwined expressions.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RestrictMode {
    /// `tau_{-2}(pt) = 1`, `tau_{-1}(pt) = 0`.
    Low,
    /// `tau_{-2}(pt) = 1`, `tau_{-1}(g) = 0` for `g` in `H^{>2}`.
    High,
    /// Action on the vacuum: `tau_{-2}(g) = u^{-2} int g = -w^{-2} int g`, `tau_{-1} = 0`.
    Vacuum,
}

pub fn restrict_negatives(d: &GwElement, mode: RestrictMode) -> GwElement {
    let ring = d.ring.clone();
    let top = ring.top_degree();
    d.substitute(&mut |t: Tau| {
        let Tau(l, b) = t;
        let deg = ring.degree(b);
        let pt_int = ring.integrate_vec(&ring.basis_vec(b));
        Ok(match (l, mode) {
            (-2, RestrictMode::Vacuum) => GwElement::constant(&ring, WScalar::monomial(-pt_int, -2)),
            (-1, RestrictMode::Vacuum) => GwElement::zero(&ring),
            (-2, _) if deg == top => GwElement::constant(&ring, WScalar::from_q(pt_int)),
            (-1, RestrictMode::Low) if deg == top => GwElement::zero(&ring),
            (-1, RestrictMode::High) if deg >= 2 => GwElement::zero(&ring),
            _ => GwElement::gen(&ring, t),
        })
    })
    .expect("same ring")
}

/// Conventions for comparing expressions that carry negative descendents.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Conventions {
    pub dictionary: Dictionary,
    /// Evaluate negative descendents on the vacuum instead of the low/high rules.
    pub vacuum: bool,
    /// Keep the `-(1/24) int c1 c2` term of `Ltilde_0`.
    pub k0_constant: bool,
}

impl Conventions {
    /// Shifted `tau_0`, low/high restrictions, `Ltilde_0` constant kept.
    pub const LITERAL: Conventions = Conventions { dictionary: Dictionary::Shifted, vacuum: false, k0_constant: true };
    /// Unshifted `tau_0`, vacuum evaluation, no separate `Ltilde_0` constant.
    pub const VACUUM: Conventions = Conventions { dictionary: Dictionary::Unshifted, vacuum: true, k0_constant: false };

    pub fn restrict(&self, d: &GwElement, k: i64) -> GwElement {
        let mode = if self.vacuum {
            RestrictMode::Vacuum
        } else if k <= 0 {
            RestrictMode::Low
        } else {
            RestrictMode::High
        };
        restrict_negatives(d, mode)
    }
}

/// `T'_k` in the `tau` form minus the compact Heisenberg form converted to `tau`.
/// Under `LITERAL` the two are compared as they stand; under `VACUUM` both are evaluated first.
pub fn prop_ct_difference(k: i64, ring: &Arc<CohRing>, conv: Conventions) -> GwElement {
    let tau_form = build_tprime(k, ring);
    let compact = a_to_tau_in(&build_tprime_compact(k, ring), conv.dictionary);
    let (a, b) = if conv.vacuum {
        (restrict_negatives(&tau_form, RestrictMode::Vacuum), restrict_negatives(&compact, RestrictMode::Vacuum))
    } else {
        (tau_form, compact)
    };
    a.sub(&b).expect("same ring")
}

impl GwElement {
    /// Whether any factor is `tau_k(1)`.
    pub fn has_unit_descendent(&self) -> bool {
        self.terms.keys().any(|m| m.iter().any(|t| t.1 == 0))
    }
}
