//! The stationary GW/PT descendent transformation `C°`/`C•` and the intertwining checker.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::cohomology::{CohRing, CurveData};
use crate::error::{Error, Result};
use crate::exactmath::{factorial, fmt_q, qi, qr, QRational, WScalar, Q};
use crate::series_data::{evaluate_bracket, SeriesTable};
use crate::gw_algebra::{
    a_to_tau, a_to_tau_in, a_vec, apply_gw_virasoro, build_tprime_compact, AGen, Conventions, GwElement, GwVirasoro, HeisenbergExpr, Tau,
};
use crate::pt_algebra::{apply_virasoro, GenKind, is_essential, GenBasis, PtElement, PtGen, PtMonomial, PtVirasoro};

/// Set partition of `{0..n}` as a list of blocks.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SetPartition {
    pub blocks: Vec<Vec<usize>>,
}

/// All set partitions of `{0..n}` (restricted growth strings).
pub fn set_partitions(n: usize) -> Vec<SetPartition> {
    fn rec(i: usize, n: usize, cur: &mut Vec<Vec<usize>>, out: &mut Vec<SetPartition>) {
        if i == n {
            out.push(SetPartition { blocks: cur.clone() });
            return;
        }
        for b in 0..cur.len() {
            cur[b].push(i);
            rec(i + 1, n, cur, out);
            cur[b].pop();
        }
        cur.push(vec![i]);
        rec(i + 1, n, cur, out);
        cur.pop();
    }
    let mut out = Vec::new();
    rec(0, n, &mut Vec::new(), &mut out);
    out
}

/// Integer partition with weakly decreasing positive parts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntPartition {
    pub parts: Vec<u32>,
}

impl IntPartition {
    /// Product of factorials of part multiplicities.
    pub fn aut(&self) -> Q {
        let mut out = Q::one();
        let mut i = 0;
        while i < self.parts.len() {
            let mut m = 1;
            while i + m < self.parts.len() && self.parts[i + m] == self.parts[i] {
                m += 1;
            }
            out *= Q::from(factorial(m as u32));
            i += m;
        }
        out
    }
}

/// Partitions of `n` into exactly `len` positive parts.
pub fn int_partitions(n: i64, len: usize) -> Vec<IntPartition> {
    fn rec(n: i64, len: usize, max: i64, cur: &mut Vec<u32>, out: &mut Vec<IntPartition>) {
        if len == 0 {
            if n == 0 {
                out.push(IntPartition { parts: cur.clone() });
            }
            return;
        }
        for p in (1..=max.min(n)).rev() {
            if p * (len as i64) < n {
                break;
            }
            cur.push(p as u32);
            rec(n - p, len - 1, p, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if n >= len as i64 {
        rec(n, len, n, &mut Vec::new(), &mut out);
    }
    out
}

fn w(c: Q, e: i32) -> WScalar {
    WScalar::monomial(c, e)
}

fn inv_fact(n: i64) -> Q {
    Q::one() / Q::from(factorial(n as u32))
}

/// `sum_{|mu| = n} a_{mu1} a_{mu2}(theta) / Aut(mu)` with `a a(theta)` read off `theta * Delta`.
fn a_pair_sum(ring: &Arc<CohRing>, n: i64, theta: &[Q], weight: &mut dyn FnMut(&IntPartition) -> Q) -> HeisenbergExpr {
    let mut out = HeisenbergExpr::zero(ring);
    let kun = ring.kunneth_terms(theta);
    if kun.is_empty() {
        return out;
    }
    for mu in int_partitions(n, 2) {
        let c0 = weight(&mu) / mu.aut();
        for (l, r, c) in &kun {
            let m = vec![AGen::A(mu.parts[0], *l), AGen::A(mu.parts[1], *r)];
            out.add_term(sorted(m), WScalar::from_q(&c0 * c));
        }
    }
    out
}

fn sorted(mut m: Vec<AGen>) -> Vec<AGen> {
    m.sort();
    m
}

fn add_scaled(out: &mut HeisenbergExpr, x: &HeisenbergExpr, c: &WScalar) {
    for (m, v) in x.terms() {
        out.add_term(m.clone(), v * c);
    }
}

/// One term `coeff * a_{parts}(gamma c1^c1_power)` of a cohomology-free `C°` formula.
/// Two and three parts are split along the diagonal and small diagonal.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AbstractTerm {
    pub c1_power: u32,
    /// Weakly decreasing.
    pub parts: Vec<u32>,
    pub coeff: WScalar,
}

fn partition_terms(n: i64, len: usize, c1_power: u32, coeff: &WScalar, weight: impl Fn(&[u32]) -> Q) -> Vec<AbstractTerm> {
    int_partitions(n, len)
        .into_iter()
        .map(|mu| {
            let c = weight(&mu.parts) / mu.aut();
            AbstractTerm { c1_power, coeff: coeff.scale(&c), parts: mu.parts }
        })
        .collect()
}

/// `C°(tch_{k+2}(g))` for `k >= 0`.
pub fn decay_terms(k: i64) -> Vec<AbstractTerm> {
    let mut out = vec![AbstractTerm { c1_power: 0, parts: vec![(k + 1) as u32], coeff: w(inv_fact(k + 1), 0) }];
    out.extend(partition_terms(k - 1, 2, 1, &w(inv_fact(k), -1), |_| Q::one()));
    if k >= 2 {
        out.extend(partition_terms(k - 2, 2, 2, &w(inv_fact(k), -2), |_| Q::one()));
    }
    if k >= 3 {
        out.extend(partition_terms(k - 3, 3, 2, &w(inv_fact(k - 1), -2), |_| Q::one()));
    }
    out
}

/// `C°(tch_{k1+2}(g) tch_{k2+2}(g'))` for `k1, k2 >= 0`, attached to `g g'`.
pub fn two_bump_terms(k1: i64, k2: i64) -> Vec<AbstractTerm> {
    let pref = -inv_fact(k1) * inv_fact(k2);
    let mut out = Vec::new();
    if k1 + k2 >= 1 {
        out.push(AbstractTerm { c1_power: 0, parts: vec![(k1 + k2) as u32], coeff: w(pref.clone(), -1) });
    }
    if k1 + k2 >= 2 {
        out.push(AbstractTerm { c1_power: 1, parts: vec![(k1 + k2 - 1) as u32], coeff: w(pref.clone(), -2) });
    }
    let kmax = k1.max(k2);
    out.extend(partition_terms(k1 + k2 - 2, 2, 1, &w(pref, -2), |mu| {
        qi(kmax.max(mu[0] as i64 + 1).max(mu[1] as i64 + 1))
    }));
    out
}

/// `C°` of three tilde generators with shifted indices `k`, attached to the triple product.
pub fn triple_bump_terms(k: [i64; 3]) -> Vec<AbstractTerm> {
    let s = k[0] + k[1] + k[2];
    if s < 2 {
        return Vec::new();
    }
    let c = qi(s) * inv_fact(k[0]) * inv_fact(k[1]) * inv_fact(k[2]);
    vec![AbstractTerm { c1_power: 0, parts: vec![(s - 1) as u32], coeff: w(c, -2) }]
}

/// Attaches classes to abstract terms: `a_n(theta)`, `a a(theta)` over `theta Delta`, and
/// `a a a(theta)` over the small diagonal, with `theta = g c1^p`.
pub fn attach_classes(ring: &Arc<CohRing>, terms: &[AbstractTerm], g: &[Q]) -> HeisenbergExpr {
    let mut out = HeisenbergExpr::zero(ring);
    for t in terms {
        let theta = ring.mul_vec(g, &ring.c1_pow_vec(t.c1_power));
        if theta.iter().all(Zero::is_zero) {
            continue;
        }
        match t.parts.len() {
            1 => add_scaled(&mut out, &a_vec(ring, t.parts[0] as i64, &theta), &t.coeff),
            2 => {
                for (l, r, c) in ring.kunneth_terms(&theta) {
                    let m = vec![AGen::A(t.parts[0], l), AGen::A(t.parts[1], r)];
                    out.add_term(sorted(m), t.coeff.scale(&c));
                }
            }
            3 => {
                for (a, b, d, c) in ring.triple_diagonal_terms(&theta) {
                    let m = vec![AGen::A(t.parts[0], a), AGen::A(t.parts[1], b), AGen::A(t.parts[2], d)];
                    out.add_term(sorted(m), t.coeff.scale(&c));
                }
            }
            n => unreachable!("abstract term with {n} parts"),
        }
    }
    out
}

fn c_decay(ring: &Arc<CohRing>, k: i64, g: &[Q]) -> HeisenbergExpr {
    attach_classes(ring, &decay_terms(k), g)
}

/// `C°(tch_{k+2}(g))` without its cubic term.
fn c_decay_quadratic(ring: &Arc<CohRing>, k: i64, g: &[Q]) -> HeisenbergExpr {
    let terms: Vec<_> = decay_terms(k).into_iter().filter(|t| t.parts.len() <= 2).collect();
    attach_classes(ring, &terms, g)
}

/// `C°` of a block of tilde generators and formal symbols.
///
/// Blocks with `tch_1`, with `(-2)!ch_0(c_1)`, or with vanishing cohomology product give 0;
/// `tch_0(g)` alone gives `-int g`. `(-1)!ch_1(c_1)` is bumped by its own rules.
pub fn c_circ(ring: &Arc<CohRing>, block: &[PtGen]) -> Result<HeisenbergExpr> {
    let zero = HeisenbergExpr::zero(ring);
    let mut chs = Vec::new();
    let mut fch1 = 0;
    for g in block {
        match g {
            PtGen::Ch(k, b) => chs.push((*k as i64, *b)),
            PtGen::Fch1 => fch1 += 1,
            PtGen::Fch0 => return Ok(zero),
        }
    }
    if chs.iter().any(|(k, _)| *k == 1) {
        return Ok(zero);
    }
    if chs.iter().any(|(k, _)| *k == 0) {
        if chs.len() == 1 && fch1 == 0 {
            let c = -ring.integrate_vec(&ring.basis_vec(chs[0].1));
            return Ok(HeisenbergExpr::constant(ring, WScalar::from_q(c)));
        }
        return Ok(zero);
    }
    if chs.is_empty() {
        // (-1)!ch_1(c_1) alone, or the empty block
        return Ok(if fch1 == 0 { HeisenbergExpr::one(ring) } else { zero });
    }
    if fch1 > 1 {
        return Ok(zero);
    }
    let mut prod = ring.basis_vec(0);
    for (_, b) in &chs {
        prod = ring.mul_vec(&prod, &ring.basis_vec(*b));
    }
    if fch1 == 1 {
        prod = ring.mul_vec(&prod, ring.c1_vec());
    }
    if prod.iter().all(Zero::is_zero) {
        return Ok(zero);
    }
    for (k, b) in &chs {
        if ring.degree(*b) == 0 {
            return Err(Error::UnitDescendent(format!("tch_{k}(1)")));
        }
    }
    let ks: Vec<i64> = chs.iter().map(|(k, _)| k - 2).collect();
    if fch1 == 0 {
        return match chs.len() {
            1 => Ok(c_decay(ring, ks[0], &prod)),
            2 => Ok(attach_classes(ring, &two_bump_terms(ks[0], ks[1]), &prod)),
            3 => Ok(attach_classes(ring, &triple_bump_terms([ks[0], ks[1], ks[2]]), &prod)),
            n => Err(Error::BlockTooLarge(n)),
        };
    }
    // prod already carries the c_1 of the formal symbol
    match chs.len() {
        1 => {
            let k = ks[0];
            let pc = ring.mul_vec(&prod, ring.c1_vec());
            let mut inner = a_vec(ring, k - 1, &prod);
            add_scaled(&mut inner, &a_vec(ring, k - 2, &pc), &w(Q::one(), -1));
            add_scaled(&mut inner, &a_pair_sum(ring, k - 3, &pc, &mut |_| Q::one()), &w(qi(k), -1));
            Ok(inner.scale(&w(-inv_fact(k), -1)))
        }
        2 => {
            let (k1, k2) = (ks[0].min(ks[1]), ks[0].max(ks[1]));
            match (k1, k2) {
                (0, 0) => Ok(zero),
                (0, 1) => {
                    let mut out = HeisenbergExpr::zero(ring);
                    for (b, c) in prod.iter().enumerate() {
                        out.add_term(vec![AGen::Neg(-2, b)], WScalar::from_q(c.clone()));
                    }
                    Ok(out)
                }
                _ => {
                    let c = qi(k1 + k2 - 1) * inv_fact(k1) * inv_fact(k2);
                    Ok(a_vec(ring, k1 + k2 - 2, &prod).scale(&w(c, -2)))
                }
            }
        }
        n => Err(Error::BlockTooLarge(n + 1)),
    }
}

/// `C•` of one monomial in the tilde basis, in Heisenberg generators.
fn c_bullet_monomial(
    ring: &Arc<CohRing>,
    m: &PtMonomial,
    cache: &mut HashMap<Vec<PtGen>, HeisenbergExpr>,
) -> Result<HeisenbergExpr> {
    let f = m.factors();
    let mut out = HeisenbergExpr::zero(ring);
    'parts: for p in set_partitions(f.len()) {
        let mut acc = HeisenbergExpr::one(ring);
        for blk in &p.blocks {
            let mut key: Vec<PtGen> = blk.iter().map(|i| f[*i]).collect();
            key.sort();
            let v = match cache.get(&key) {
                Some(v) => v.clone(),
                None => {
                    let v = c_circ(ring, &key)?;
                    cache.insert(key, v.clone());
                    v
                }
            };
            if v.is_zero() {
                continue 'parts;
            }
            acc = acc.mul(&v)?;
        }
        out = out.add(&acc)?;
    }
    Ok(out)
}

/// `C•` in Heisenberg generators.
pub fn c_bullet_heisenberg(d: &PtElement) -> Result<HeisenbergExpr> {
    let ring = d.ring().clone();
    let d = d.to_basis(GenBasis::Tch);
    let terms: Vec<_> = d.terms().iter().collect();
    let parts: Result<Vec<HeisenbergExpr>> = terms
        .par_iter()
        .map_init(HashMap::new, |cache, (m, c)| {
            Ok(c_bullet_monomial(&ring, m, cache)?.scale_q(c))
        })
        .collect();
    let mut out = HeisenbergExpr::zero(&ring);
    for p in parts? {
        out = out.add(&p)?;
    }
    Ok(out)
}

/// `C•` converted to the `tau` basis.
pub fn c_bullet(d: &PtElement) -> Result<GwElement> {
    Ok(a_to_tau(&c_bullet_heisenberg(d)?))
}

/// Both sides of the intertwining relation and their difference after restrictions.
#[derive(Clone, Debug)]
pub struct IntertwineReport {
    pub ok: bool,
    pub lhs: GwElement,
    pub rhs: GwElement,
    pub difference: GwElement,
}

/// `C•(L_k^PT D)` against `(iu)^{-k} Ltilde_k^GW(C• D)` under the literal conventions:
/// low restrictions for `k <= 0`, high for `k >= 1`.
pub fn intertwine_check(k: i64, d: &PtElement) -> Result<IntertwineReport> {
    intertwine_check_with(k, d, Conventions::LITERAL)
}

pub fn intertwine_check_with(k: i64, d: &PtElement, conv: Conventions) -> Result<IntertwineReport> {
    if !is_essential(d) {
        return Err(Error::NotEssential(d.to_string()));
    }
    let lhs = a_to_tau_in(&c_bullet_heisenberg(&apply_virasoro(k, d, PtVirasoro::L)?)?, conv.dictionary);
    let cd = a_to_tau_in(&c_bullet_heisenberg(d)?, conv.dictionary);
    let mut rhs = apply_gw_virasoro(k, &cd, GwVirasoro::Ltilde)?;
    if k == 0 && !conv.k0_constant {
        let ring = d.ring();
        let c = ring.integrate_vec(&ring.mul_vec(ring.c1_vec(), ring.c2_vec())) * qr(1, 24);
        rhs = rhs.add(&cd.scale_q(&c))?;
    }
    let rhs = rhs.scale(&WScalar::w_pow(-(k as i32)));
    let lhs = conv.restrict(&lhs, k);
    let rhs = conv.restrict(&rhs, k);
    let difference = lhs.sub(&rhs)?;
    Ok(IntertwineReport { ok: difference.is_zero(), lhs, rhs, difference })
}

/// Compact `T'_k` with each `tau_{-2}(pt) a_n(g)` term replaced by
/// `tau_{-2}(pt) n! C°(tch_{n+1}(g))` truncated to at most quadratic terms, so that the
/// subleading quadratic decay terms are kept.
pub fn tprime_compact_quadratic_decay(k: i64, ring: &Arc<CohRing>) -> HeisenbergExpr {
    let compact = build_tprime_compact(k, ring);
    let mut out = HeisenbergExpr::zero(ring);
    for (mono, c) in compact.terms() {
        let has_neg = mono.iter().any(|g| matches!(g, AGen::Neg(..)));
        let mut term = HeisenbergExpr::constant(ring, c.clone());
        for g in mono {
            let f = match (*g, has_neg) {
                (AGen::A(n, b), true) => {
                    c_decay_quadratic(ring, n as i64 - 1, &ring.basis_vec(b)).scale_q(&Q::from(factorial(n)))
                }
                _ => HeisenbergExpr::gen(ring, *g),
            };
            term = term.mul(&f).expect("same ring");
        }
        out = out.add(&term).expect("same ring");
    }
    out
}

/// Essential test descendents on `P^3`: `1`; `tch_i(g)` for `g` in `H, L, p`, `i <= 8`;
/// pairs with `i + j <= 10` and `g g' != 0`; triples with `g g' g''` a point multiple and
/// indices `<= 5`.
pub fn intertwining_grid(ring: &Arc<CohRing>) -> Result<Vec<PtElement>> {
    let names = ["H", "L", "p"];
    let mut singles = Vec::new();
    for (ci, name) in names.iter().enumerate() {
        let class = ring.class(name)?;
        for i in 2..=8 {
            let g = PtElement::generator(ring, GenKind::Tch, i, &class)?;
            if is_essential(&g) {
                singles.push((ci, i, class.clone(), g));
            }
        }
    }
    let mut out = vec![PtElement::one(ring)];
    out.extend(singles.iter().map(|s| s.3.clone()));
    for (x, a) in singles.iter().enumerate() {
        for b in &singles[x..] {
            if a.1 + b.1 <= 10 && !a.2.mul(&b.2)?.is_zero() {
                out.push(a.3.mul(&b.3)?);
            }
        }
    }
    let small: Vec<_> = singles.iter().filter(|s| s.1 <= 5).collect();
    for x in 0..small.len() {
        for y in x..small.len() {
            for z in y..small.len() {
                let prod = small[x].2.mul(&small[y].2)?.mul(&small[z].2)?;
                if !prod.integrate().is_zero() {
                    out.push(small[x].3.mul(&small[y].3)?.mul(&small[z].3)?);
                }
            }
        }
    }
    Ok(out)
}

/// Term `c (iu)^n` of a GW element rewritten as `c i^n u^n = coeff * u^n`, times `i` when
/// `imaginary` is set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UTerm {
    pub tau: Vec<Tau>,
    pub coeff: Q,
    pub u_pow: i32,
    pub imaginary: bool,
}

pub fn u_form(e: &GwElement) -> Vec<UTerm> {
    let mut out = Vec::new();
    for (m, c) in e.terms() {
        for (n, v) in c.terms() {
            let (sign, imaginary) = match n.rem_euclid(4) {
                0 => (Q::one(), false),
                1 => (Q::one(), true),
                2 => (-Q::one(), false),
                _ => (-Q::one(), true),
            };
            out.push(UTerm { tau: m.clone(), coeff: sign * v, u_pow: n, imaginary });
        }
    }
    out
}

/// Both sides of `(-q)^{-d/2} <D>^PT = (-iu)^d <C•(D)>^GW`.
#[derive(Clone, Debug)]
pub struct GwPrediction {
    pub d_beta: Q,
    /// Exponent of `-q` on the PT side; may be a half integer and is never expanded.
    pub q_exponent: Q,
    pub pt_series: Option<QRational>,
    /// Why `pt_series` is missing.
    pub pt_note: Option<String>,
    /// `(-iu)^d C•(D)`.
    pub gw: GwElement,
}

impl fmt::Display for GwPrediction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let pt = match (&self.pt_series, &self.pt_note) {
            (Some(s), _) => format!("({})", s.fmt_in("q")),
            (None, Some(n)) => format!("<D> [{n}]"),
            (None, None) => "<D>".into(),
        };
        write!(f, "(-q)^({}) * {} = <{}>", fmt_q(&self.q_exponent), pt, self.gw)
    }
}

/// The GW side predicted for a stationary `D`, and the PT series when the table covers it.
pub fn gw_predict(d: &PtElement, beta: &CurveData, table: Option<&SeriesTable>) -> Result<GwPrediction> {
    let db: i32 = beta
        .d_beta
        .to_integer()
        .try_into()
        .map_err(|_| Error::InvalidRing("curve degree too large".into()))?;
    let scale = WScalar::monomial(if db % 2 == 0 { Q::one() } else { -Q::one() }, db);
    let gw = c_bullet(d)?.scale(&scale);
    let (pt_series, pt_note) = match table {
        None => (None, Some("no table".to_string())),
        Some(t) => match evaluate_bracket(d, t, beta) {
            Ok(v) => (Some(v), None),
            Err(Error::MissingKey(k)) => (None, Some(format!("table miss: {k}"))),
            Err(e) => return Err(e),
        },
    };
    Ok(GwPrediction { d_beta: beta.d_beta.clone(), q_exponent: -&beta.d_beta / qi(2), pt_series, pt_note, gw })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gw_algebra::{tau_vec, Tau};
    use crate::pt_algebra::GenKind;

    fn p3() -> Arc<CohRing> {
        CohRing::p3()
    }

    fn tch(r: &Arc<CohRing>, k: i64, l: &str) -> PtElement {
        PtElement::generator(r, GenKind::Tch, k, &r.class(l).unwrap()).unwrap()
    }

    fn gen(r: &Arc<CohRing>, k: u32, l: &str) -> PtGen {
        PtGen::Ch(k, r.index_of(l).unwrap())
    }

    #[test]
    fn partitions() {
        let bell: Vec<usize> = (0..6).map(|n| set_partitions(n).len()).collect();
        assert_eq!(bell, vec![1, 1, 2, 5, 15, 52]);
        let p = int_partitions(6, 3);
        let parts: Vec<Vec<u32>> = p.iter().map(|m| m.parts.clone()).collect();
        assert_eq!(parts, vec![vec![4, 1, 1], vec![3, 2, 1], vec![2, 2, 2]]);
        assert_eq!(p[0].aut(), qi(2));
        assert_eq!(p[2].aut(), qi(6));
        assert!(int_partitions(1, 2).is_empty());
    }

    #[test]
    fn c_circ_examples() {
        let r = p3();
        let c1 = r.c1_vec().to_vec();
        // tch_2(c1) -> a_1(c1)
        let mut got = HeisenbergExpr::zero(&r);
        for (b, c) in c1.iter().enumerate() {
            if !c.is_zero() {
                let x = c_circ(&r, &[PtGen::Ch(2, b)]).unwrap();
                got = got.add(&x.scale_q(c)).unwrap();
            }
        }
        assert_eq!(got, a_vec(&r, 1, &c1));
        // tch_5(L) -> a_4(L)/24 + (1/3) w^-1 a_1(p)^2
        let l = c_circ(&r, &[gen(&r, 5, "L")]).unwrap();
        let pt = r.point_vec().unwrap();
        let want = a_vec(&r, 4, &r.basis_vec(r.index_of("L").unwrap()))
            .scale_q(&qr(1, 24))
            .add(&a_vec(&r, 1, &pt).mul(&a_vec(&r, 1, &pt)).unwrap().scale(&w(qr(1, 3), -1)))
            .unwrap();
        assert_eq!(l, want);
        // three tch_3(H) -> 3 w^-2 a_2(p)
        let h3 = c_circ(&r, &[gen(&r, 3, "H"), gen(&r, 3, "H"), gen(&r, 3, "H")]).unwrap();
        assert_eq!(h3, a_vec(&r, 2, &pt).scale(&w(qi(3), -2)));
    }

    #[test]
    fn exceptional_rules() {
        let r = p3();
        let z = |b: &[PtGen]| c_circ(&r, b).unwrap().is_zero();
        assert_eq!(c_circ(&r, &[gen(&r, 0, "p")]).unwrap(), HeisenbergExpr::constant(&r, WScalar::from_int(-1)));
        assert!(z(&[gen(&r, 0, "p"), gen(&r, 4, "H")]));
        assert!(z(&[gen(&r, 1, "p")]));
        assert!(z(&[gen(&r, 1, "L"), gen(&r, 4, "H")]));
        assert!(z(&[PtGen::Fch1]));
        assert!(z(&[PtGen::Fch0, gen(&r, 4, "H")]));
        assert!(z(&[gen(&r, 4, "L"), gen(&r, 4, "L")]));
        // (-1)!ch_1(c1) tch_2(H) tch_3(H) -> tau_{-2}(c1 H H) = 4 tau_{-2}(p)
        let x = c_circ(&r, &[PtGen::Fch1, gen(&r, 2, "H"), gen(&r, 3, "H")]).unwrap();
        let pidx = r.index_of("p").unwrap();
        let mut want = HeisenbergExpr::zero(&r);
        want.add_term(vec![AGen::Neg(-2, pidx)], WScalar::from_int(4));
        assert_eq!(x, want);
        assert!(matches!(
            c_circ(&r, &[gen(&r, 3, "H"), gen(&r, 3, "H"), gen(&r, 3, "H"), gen(&r, 3, "H")]),
            Ok(ref e) if e.is_zero()
        ));
    }

    #[test]
    fn point_factorization() {
        let r = p3();
        let pidx = r.index_of("p").unwrap();
        let d = tch(&r, 4, "H").mul(&tch(&r, 3, "L")).unwrap();
        let cd = c_bullet(&d).unwrap();
        for k in 0..=5i64 {
            let lhs = c_bullet(&tch(&r, k + 2, "p").mul(&d).unwrap()).unwrap();
            let rhs = GwElement::gen(&r, Tau(k as i32, pidx)).mul(&cd).unwrap().scale(&WScalar::w_pow(-(k as i32)));
            assert_eq!(lhs, rhs, "k={k}");
        }
    }

    #[test]
    fn ch5_l_prediction() {
        let r = p3();
        let l = r.index_of("L").unwrap();
        let p = r.index_of("p").unwrap();
        let d = PtElement::generator(&r, GenKind::Ch, 5, &r.class("L").unwrap()).unwrap();
        let g = c_bullet(&d).unwrap();
        assert_eq!(g.coeff(&[Tau(3, l)]), w(Q::one(), -3));
        assert_eq!(g.coeff(&[Tau(2, p)]), w(qr(22, 3), -3));
        assert_eq!(g.coeff(&[Tau(0, p), Tau(0, p)]), w(qr(1, 3), -1));
        assert_eq!(g.terms().len(), 3);
        let _ = tau_vec;
    }

    #[test]
    fn unit_is_fixed() {
        let r = p3();
        assert_eq!(c_bullet(&PtElement::one(&r)).unwrap(), GwElement::one(&r));
    }

    #[test]
    fn intertwining_small_cases() {
        let r = p3();
        let cases = [PtElement::one(&r), tch(&r, 5, "H"), tch(&r, 4, "L").mul(&tch(&r, 3, "H")).unwrap()];
        for d in &cases {
            for k in -1..=3 {
                let rep = intertwine_check_with(k, d, Conventions::VACUUM).unwrap();
                assert!(rep.ok, "k={k} D={d}: {}", rep.difference);
            }
        }
        // tau_{-1}(H) survives the high restriction
        let rep = intertwine_check(1, &PtElement::one(&r)).unwrap();
        assert!(!rep.ok);
        assert!(rep.difference.terms().keys().any(|m| m.contains(&Tau(-1, r.index_of("H").unwrap()))));
    }

    #[test]
    fn non_essential_rejected() {
        let r = p3();
        assert!(intertwine_check(1, &tch(&r, 2, "H")).is_err());
    }

    #[test]
    fn prop_ct_quadratic_decay() {
        use crate::gw_algebra::{
            a_to_tau_in, build_tprime, prop_ct_difference, restrict_negatives, Dictionary, RestrictMode,
        };
        let r = p3();
        for k in -1..=6 {
            let a = restrict_negatives(&build_tprime(k, &r), RestrictMode::Vacuum);
            let b = a_to_tau_in(&tprime_compact_quadratic_decay(k, &r), Dictionary::Unshifted);
            assert_eq!(a, restrict_negatives(&b, RestrictMode::Vacuum), "k={k}");
        }
        // the leading-term compact form agrees on the vacuum only up to k = 2
        for k in -1..=2 {
            assert!(prop_ct_difference(k, &r, Conventions::VACUUM).is_zero());
        }
        let d3 = prop_ct_difference(3, &r, Conventions::VACUUM);
        let want = tau_vec(&r, 0, &r.basis_vec(r.index_of("L").unwrap()))
            .mul(&tau_vec(&r, 0, &r.basis_vec(r.index_of("p").unwrap())))
            .unwrap()
            .scale_q(&qi(-32));
        assert_eq!(d3, want);
    }

    #[test]
    fn gw_predict_ch5_line() {
        let r = p3();
        let beta = CurveData::p3_line(&r).unwrap();
        let table = crate::series_data::bundled_table().unwrap();
        let d = PtElement::generator(&r, GenKind::Ch, 5, &r.class("L").unwrap()).unwrap();
        let pred = gw_predict(&d, &beta, Some(&table)).unwrap();
        assert_eq!(pred.q_exponent, qi(-2));
        assert_eq!(pred.pt_series, Some(QRational::from_int_coeffs(&[0, -1, 9, -9, 1], &[6, 6]).unwrap()));
        let terms = u_form(&c_bullet(&d).unwrap());
        let (l, p) = (r.index_of("L").unwrap(), r.index_of("p").unwrap());
        let find = |m: Vec<Tau>| terms.iter().find(|t| t.tau == m).unwrap().clone();
        let lead = find(vec![Tau(3, l)]);
        assert_eq!((lead.coeff.clone(), lead.u_pow, lead.imaginary), (qi(1), -3, true));
        let t2 = find(vec![Tau(2, p)]);
        assert_eq!((t2.coeff / &lead.coeff, t2.u_pow), (qr(22, 3), -3));
        let t00 = find(vec![Tau(0, p), Tau(0, p)]);
        assert_eq!((t00.coeff / &lead.coeff, t00.u_pow), (qr(-1, 3), -1));
        assert_eq!(terms.len(), 3);
    }

    #[test]
    fn gw_predict_point_class() {
        let r = p3();
        let beta = CurveData::p3_line(&r).unwrap();
        let p = r.index_of("p").unwrap();
        for k in 0..=4 {
            let d = PtElement::generator(&r, GenKind::Tch, k + 2, &r.class("p").unwrap()).unwrap();
            let pred = gw_predict(&d, &beta, None).unwrap();
            let want = GwElement::monomial(&r, vec![Tau(k as i32, p)], WScalar::w_pow(4 - k as i32));
            assert_eq!(pred.gw, want);
            assert!(pred.pt_series.is_none());
        }
    }
}

#[cfg(test)]
mod props {
    use super::*;
    use crate::pt_algebra::GenKind;
    use proptest::prelude::*;

    fn tch(r: &Arc<CohRing>, k: i64, l: &str) -> PtElement {
        PtElement::generator(r, GenKind::Tch, k, &r.class(l).unwrap()).unwrap()
    }

    fn product(r: &Arc<CohRing>, fs: &[(i64, &str)]) -> PtElement {
        fs.iter().fold(PtElement::one(r), |acc, (k, l)| acc.mul(&tch(r, *k, l)).unwrap())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn factorizes_without_cross_products(
            ps in prop::collection::vec(3i64..=7, 0..3),
            ls in prop::collection::vec(3i64..=6, 0..3),
        ) {
            // on P^3, L.L = L.p = p.p = 0: no block mixes two factors
            let r = CohRing::p3();
            let fs: Vec<(i64, &str)> = ps.iter().map(|&k| (k, "p")).chain(ls.iter().map(|&k| (k, "L"))).collect();
            let whole = c_bullet(&product(&r, &fs)).unwrap();
            let parts = fs
                .iter()
                .fold(GwElement::one(&r), |acc, f| acc.mul(&c_bullet(&product(&r, &[*f])).unwrap()).unwrap());
            prop_assert_eq!(whole, parts);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn intertwines_off_the_grid(
            fs in prop::collection::vec((3i64..=9, 0usize..3), 1..=3),
            k in -1i64..=4,
        ) {
            let r = CohRing::p3();
            let named: Vec<(i64, &str)> = fs.iter().map(|&(i, c)| (i, ["H", "L", "p"][c])).collect();
            let d = product(&r, &named);
            let rep = intertwine_check_with(k, &d, Conventions::VACUUM).unwrap();
            prop_assert!(rep.ok, "k = {}, D = {}: {}", k, d, rep.difference);
        }
    }
}
