//! Descendents `ch_i(gamma)` on the Hilbert schemes of points of a surface `S`, the operator
//! `L_k^S`, and its comparison with the PT operator on `S x P1`.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;

use crate::cohomology::{CohRing, RingKind};
use crate::exactmath::{factorial, factorial_q, qr, Q};
use crate::pt_algebra::{apply_rk, apply_virasoro, GenBasis, PtElement, PtGen, PtMonomial, PtVirasoro};
use crate::{Error, Result};
use num_traits::One;

/// Polynomial in `ch_i(gamma)` over a surface ring, normalized multilinearly in the basis.
#[derive(Clone, Debug, PartialEq)]
pub struct SurfaceDescElement {
    inner: PtElement,
}

fn check_surface(ring: &CohRing) -> Result<()> {
    if ring.top_degree() != 2 {
        return Err(Error::InvalidRing(format!("{} is not a surface", ring.name())));
    }
    Ok(())
}

impl SurfaceDescElement {
    pub fn zero(ring: &Arc<CohRing>) -> Result<Self> {
        check_surface(ring)?;
        Ok(Self { inner: PtElement::zero(ring, GenBasis::Ch) })
    }

    pub fn constant(ring: &Arc<CohRing>, c: Q) -> Result<Self> {
        check_surface(ring)?;
        Ok(Self { inner: PtElement::constant(ring, c) })
    }

    /// `ch_i(v)` for a coefficient vector on `S`.
    pub fn ch(ring: &Arc<CohRing>, i: i64, v: &[Q]) -> Result<Self> {
        check_surface(ring)?;
        Ok(Self { inner: PtElement::single(ring, GenBasis::Ch, i, v) })
    }

    /// Monomial `prod ch_{i}(basis b)` with coefficient `c`.
    pub fn monomial(ring: &Arc<CohRing>, factors: &[(u32, usize)], c: Q) -> Result<Self> {
        check_surface(ring)?;
        if let Some((_, b)) = factors.iter().find(|(_, b)| *b >= ring.dim()) {
            return Err(Error::InvalidRing(format!("basis index {b} out of range")));
        }
        let m = PtMonomial::new(factors.iter().map(|&(i, b)| PtGen::Ch(i, b)).collect());
        Ok(Self { inner: PtElement::from_monomial(ring, GenBasis::Ch, m, c) })
    }

    fn wrap(inner: PtElement) -> Self {
        Self { inner }
    }

    pub fn ring(&self) -> &Arc<CohRing> {
        self.inner.ring()
    }

    /// Terms as `(sorted (index, basis id) list, coefficient)`.
    pub fn terms(&self) -> impl Iterator<Item = (Vec<(u32, usize)>, &Q)> {
        self.inner.terms().iter().map(|(m, c)| {
            let f = m
                .factors()
                .iter()
                .filter_map(|g| match g {
                    PtGen::Ch(i, b) => Some((*i, *b)),
                    _ => None,
                })
                .collect();
            (f, c)
        })
    }

    pub fn is_zero(&self) -> bool {
        self.inner.is_zero()
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        Ok(Self::wrap(self.inner.add(&other.inner)?))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        Ok(Self::wrap(self.inner.sub(&other.inner)?))
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        Ok(Self::wrap(self.inner.mul(&other.inner)?))
    }

    pub fn scale(&self, c: &Q) -> Self {
        Self::wrap(self.inner.scale(c))
    }

    pub fn as_pt(&self) -> &PtElement {
        &self.inner
    }
}

impl fmt::Display for SurfaceDescElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.inner)
    }
}

/// `R_k` on the surface side: `ch_i(gamma) -> prod_{n=0}^k (i + d - 2 + n) ch_{i+k}(gamma)`.
pub fn apply_rk_surface(k: i64, d: &SurfaceDescElement) -> Result<SurfaceDescElement> {
    Ok(SurfaceDescElement::wrap(apply_rk(k, &d.inner)?))
}

/// The multiplication part of `L_k^S` (everything except `R_k`).
pub fn build_tk_surface(k: i64, ring: &Arc<CohRing>) -> Result<SurfaceDescElement> {
    if k < -1 {
        return Err(Error::BadLevel(k));
    }
    check_surface(ring)?;
    let mut out = PtElement::zero(ring, GenBasis::Ch);
    let one: Vec<Q> = ring.basis_vec(0);
    for a in 0..=k + 2 {
        let b = k + 2 - a;
        for (l, r, c) in ring.kunneth_terms(&one) {
            let (dl, dr) = (ring.degree(l) as i64, ring.degree(r) as i64);
            let (Some(fa), Some(fb)) = (factorial_q(a + dl - 2), factorial_q(b + dr - 2)) else {
                continue;
            };
            let sign = if ((dl + 1) * (dr + 1)) % 2 == 0 { -Q::one() } else { Q::one() };
            let m = PtMonomial::new(vec![PtGen::Ch(a as u32, l), PtGen::Ch(b as u32, r)]);
            out.add_term(m, sign * fa * fb * c);
        }
    }
    let c1sq = ring.mul_vec(ring.c1_vec(), ring.c1_vec());
    let td: Vec<Q> = c1sq.iter().zip(ring.c2_vec()).map(|(x, y)| x + y).collect();
    for a in 0..=k {
        let b = k - a;
        let w = Q::from(factorial(a as u32) * factorial(b as u32)) * qr(1, 12);
        for (l, r, c) in ring.kunneth_terms(&td) {
            let m = PtMonomial::new(vec![PtGen::Ch(a as u32, l), PtGen::Ch(b as u32, r)]);
            out.add_term(m, &w * c);
        }
    }
    Ok(SurfaceDescElement::wrap(out))
}

/// `L_k^S(D)`.
pub fn build_lk_surface(k: i64, d: &SurfaceDescElement) -> Result<SurfaceDescElement> {
    build_tk_surface(k, d.ring())?.mul(d)?.add(&apply_rk_surface(k, d)?)
}

/// `(L_k^S + (k+1)! R_{-1} ch_{k+1}(pt))(D)`.
pub fn surface_constraint(k: i64, d: &SurfaceDescElement) -> Result<SurfaceDescElement> {
    let ring = d.ring().clone();
    let lk = build_lk_surface(k, d)?;
    let chp = SurfaceDescElement::ch(&ring, k + 1, &ring.point_vec()?)?;
    let extra = apply_rk_surface(-1, &chp.mul(d)?)?;
    lk.add(&extra.scale(&Q::from(factorial((k + 1) as u32))))
}

fn surface_of(x: &CohRing) -> Result<&Arc<CohRing>> {
    match x.kind() {
        RingKind::ProductWithP1(s) => Ok(s),
        RingKind::Plain => Err(Error::InvalidRing(format!("{} is not a product with P1", x.name()))),
    }
}

/// `ch_i(gamma) -> ch_i(gamma x pt)`, extended multiplicatively.
pub fn embed(d: &SurfaceDescElement, x: &Arc<CohRing>) -> Result<PtElement> {
    let s = surface_of(x)?;
    if **s != **d.ring() {
        return Err(Error::RingMismatch);
    }
    let n = s.dim();
    let mut out = PtElement::zero(x, GenBasis::Ch);
    for (f, c) in d.terms() {
        let m = PtMonomial::new(f.iter().map(|&(i, b)| PtGen::Ch(i, n + b)).collect());
        out.add_term(m, c.clone());
    }
    Ok(out)
}

/// `ch_i(delta) -> ch_i(rho_* delta)`, extended multiplicatively.
pub fn project(d: &PtElement) -> Result<SurfaceDescElement> {
    let x = d.ring().clone();
    let s = surface_of(&x)?.clone();
    let d = d.to_basis(GenBasis::Ch);
    let mut images: BTreeMap<PtGen, PtElement> = BTreeMap::new();
    let mut out = PtElement::zero(&s, GenBasis::Ch);
    for (m, c) in d.terms() {
        let mut acc = PtElement::constant(&s, c.clone());
        for g in m.factors() {
            let img = match images.get(g) {
                Some(e) => e.clone(),
                None => {
                    let e = match *g {
                        PtGen::Ch(i, b) => {
                            let v = x.pushforward_p1_vec(&x.basis_vec(b))?;
                            PtElement::single(&s, GenBasis::Ch, i as i64, &v)
                        }
                        _ => return Err(Error::FormalSymbol),
                    };
                    images.insert(*g, e.clone());
                    e
                }
            };
            acc = acc.mul(&img)?;
            if acc.is_zero() {
                break;
            }
        }
        out = out.add(&acc)?;
    }
    Ok(SurfaceDescElement::wrap(out))
}

/// `project(Lcal_k^PT(embed(D)))` over `S x P1`.
pub fn pt_side(k: i64, d: &SurfaceDescElement, x: &Arc<CohRing>) -> Result<SurfaceDescElement> {
    project(&apply_virasoro(k, &embed(d, x)?, PtVirasoro::Lcal)?)
}

/// A test monomial where the two sides differ.
#[derive(Clone, Debug)]
pub struct CompositionMismatch {
    pub k: i64,
    pub input: SurfaceDescElement,
    pub pt_side: SurfaceDescElement,
    pub surface_side: SurfaceDescElement,
}

impl fmt::Display for CompositionMismatch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "k={} D={}: project(L_PT(embed D)) = {} but L_S(D) = {}",
            self.k, self.input, self.pt_side, self.surface_side
        )
    }
}

#[derive(Clone, Debug)]
pub struct CompositionReport {
    pub k: i64,
    pub surface: String,
    pub checked: usize,
    pub mismatches: Vec<CompositionMismatch>,
}

impl CompositionReport {
    pub fn ok(&self) -> bool {
        self.mismatches.is_empty()
    }
}

/// All monomials in `ch_i(basis)` with `1..=max_size` factors and `i <= max_index`, plus `1`.
pub fn test_monomials(s: &Arc<CohRing>, max_size: usize, max_index: u32) -> Vec<Vec<(u32, usize)>> {
    let gens: Vec<(u32, usize)> =
        (0..=max_index).flat_map(|i| (0..s.dim()).map(move |b| (i, b))).collect();
    let mut out: Vec<Vec<(u32, usize)>> = vec![vec![]];
    let mut layer: Vec<(usize, Vec<(u32, usize)>)> = vec![(0, vec![])];
    for _ in 0..max_size {
        let mut next = Vec::new();
        for (start, m) in &layer {
            for (j, g) in gens.iter().enumerate().skip(*start) {
                let mut m2 = m.clone();
                m2.push(*g);
                next.push((j, m2));
            }
        }
        out.extend(next.iter().map(|(_, m)| m.clone()));
        layer = next;
    }
    out
}

/// Compare `project o Lcal_k^PT o embed` with `L_k^S + (k+1)! R_{-1} ch_{k+1}(pt)` on every test
/// monomial.
pub fn composition_check(
    k: i64,
    s: &Arc<CohRing>,
    max_size: usize,
    max_index: u32,
) -> Result<CompositionReport> {
    check_surface(s)?;
    let x = CohRing::product_with_p1(s)?;
    let monos = test_monomials(s, max_size, max_index);
    let results: Vec<Result<Option<CompositionMismatch>>> = monos
        .par_iter()
        .map(|f| {
            let d = SurfaceDescElement::monomial(s, f, Q::one())?;
            let lhs = pt_side(k, &d, &x)?;
            let rhs = surface_constraint(k, &d)?;
            Ok((lhs != rhs).then(|| CompositionMismatch {
                k,
                input: d,
                pt_side: lhs,
                surface_side: rhs,
            }))
        })
        .collect();
    let mut mismatches = Vec::new();
    for r in results {
        if let Some(m) = r? {
            mismatches.push(m);
        }
    }
    Ok(CompositionReport { k, surface: s.name().to_string(), checked: monos.len(), mismatches })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactmath::qi;

    fn pt_index(s: &CohRing) -> usize {
        (0..s.dim()).find(|&b| s.degree(b) == 2).unwrap()
    }

    #[test]
    fn r2_of_ch2_point() {
        let s = CohRing::p1xp1();
        let p = pt_index(&s);
        let d = SurfaceDescElement::monomial(&s, &[(2, p)], Q::one()).unwrap();
        let want = SurfaceDescElement::monomial(&s, &[(4, p)], qi(24)).unwrap();
        assert_eq!(apply_rk_surface(2, &d).unwrap(), want);
    }

    #[test]
    fn r_minus_one_shifts() {
        let s = CohRing::p2();
        let d = SurfaceDescElement::monomial(&s, &[(5, 1)], Q::one()).unwrap();
        let want = SurfaceDescElement::monomial(&s, &[(4, 1)], Q::one()).unwrap();
        assert_eq!(apply_rk_surface(-1, &d).unwrap(), want);
    }

    #[test]
    fn embed_then_project_is_identity() {
        for s in [CohRing::p2(), CohRing::p1xp1()] {
            let x = CohRing::product_with_p1(&s).unwrap();
            for f in test_monomials(&s, 2, 4) {
                let d = SurfaceDescElement::monomial(&s, &f, qr(3, 7)).unwrap();
                assert_eq!(project(&embed(&d, &x).unwrap()).unwrap(), d);
            }
        }
    }

    #[test]
    fn project_kills_classes_times_one() {
        let s = CohRing::p2();
        let x = CohRing::product_with_p1(&s).unwrap();
        let p = pt_index(&s);
        let d = PtElement::from_monomial(&x, GenBasis::Ch, PtMonomial::new(vec![PtGen::Ch(3, p)]), Q::one());
        assert!(project(&d).unwrap().is_zero());
        let e = embed(&SurfaceDescElement::monomial(&s, &[(3, p)], Q::one()).unwrap(), &x).unwrap();
        assert_eq!(e.terms().keys().next().unwrap().factors(), &[PtGen::Ch(3, s.dim() + p)]);
    }

    #[test]
    fn k0_on_ch2_point() {
        let s = CohRing::p1xp1();
        let x = CohRing::product_with_p1(&s).unwrap();
        let d = SurfaceDescElement::monomial(&s, &[(2, pt_index(&s))], Q::one()).unwrap();
        assert_eq!(pt_side(0, &d, &x).unwrap(), surface_constraint(0, &d).unwrap());
    }

    #[test]
    fn composition_small() {
        for s in [CohRing::p2(), CohRing::p1xp1()] {
            for k in -1..=3 {
                let rep = composition_check(k, &s, 2, 4).unwrap();
                assert!(rep.ok(), "{}", rep.mismatches[0]);
            }
        }
    }

    #[test]
    fn extra_point_term_is_needed() {
        let s = CohRing::p2();
        let x = CohRing::product_with_p1(&s).unwrap();
        let d = SurfaceDescElement::monomial(&s, &[(3, 1)], Q::one()).unwrap();
        assert_ne!(pt_side(1, &d, &x).unwrap(), build_lk_surface(1, &d).unwrap());
    }
}
