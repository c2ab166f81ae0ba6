//! Degree-one descendent series of P^3, their lookup, and Virasoro relations evaluated against them.
//!
//! Table rows are JSON lines
//! `{"pt":[..],"L":[..],"H":[..],"one":[..],"num":[..],"den":[..]}`. Entry `n` of a class vector
//! stands for `ch_{n+2}` of that class (for all four classes), and `num`/`den` list integer
//! coefficients from low to high degree in `q`.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::sync::Arc;

use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::Deserialize;
use sha2::{Digest, Sha256};

use crate::cohomology::{CohRing, CurveData};
use crate::exactmath::{qi, QRational, Q};
use crate::pt_algebra::{apply_virasoro, bracket_normalize, GenBasis, PtElement, PtGen, PtMonomial, PtVirasoro};
use crate::{Error, Result};

/// The bundled P^3 degree-one table.
pub const P3_DEG1_JSONL: &str = include_str!("../../../data/p3_deg1.jsonl");
/// SHA-256 of [`P3_DEG1_JSONL`].
pub const P3_DEG1_SHA256: &str = "dac313af24c0d05f27774e1391e1d734e8e10746a2538f002e81ae3681d9711e";

/// Sorted `ch_{n+2}` index vectors for `p`, `L`, `H` and `1`.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SeriesKey {
    pub pt: Vec<u32>,
    pub l: Vec<u32>,
    pub h: Vec<u32>,
    pub one: Vec<u32>,
}

const KEY_LABELS: [&str; 4] = ["p", "L", "H", "1"];

impl SeriesKey {
    pub fn new(mut pt: Vec<u32>, mut l: Vec<u32>, mut h: Vec<u32>, mut one: Vec<u32>) -> Self {
        pt.sort_unstable();
        l.sort_unstable();
        h.sort_unstable();
        one.sort_unstable();
        Self { pt, l, h, one }
    }

    fn slots(&self) -> [&Vec<u32>; 4] {
        [&self.pt, &self.l, &self.h, &self.one]
    }

    /// Key of a monomial in `ch_i` over P^3. `None` if some factor has index below 2 or is a
    /// formal symbol.
    pub fn from_monomial(ring: &CohRing, m: &PtMonomial) -> Result<Option<Self>> {
        let ids = key_ids(ring)?;
        let mut v: [Vec<u32>; 4] = Default::default();
        for g in m.factors() {
            let PtGen::Ch(i, b) = *g else { return Ok(None) };
            if i < 2 {
                return Ok(None);
            }
            let slot = ids.iter().position(|&x| x == b).ok_or(Error::RingMismatch)?;
            v[slot].push(i - 2);
        }
        let [pt, l, h, one] = v;
        Ok(Some(Self::new(pt, l, h, one)))
    }

    pub fn to_monomial(&self, ring: &CohRing) -> Result<PtMonomial> {
        let ids = key_ids(ring)?;
        let mut f = Vec::new();
        for (slot, v) in self.slots().into_iter().enumerate() {
            f.extend(v.iter().map(|n| PtGen::Ch(n + 2, ids[slot])));
        }
        Ok(PtMonomial::new(f))
    }
}

impl fmt::Display for SeriesKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v = |x: &Vec<u32>| format!("{x:?}").replace(' ', "");
        write!(f, "{},{},{}", v(&self.pt), v(&self.l), v(&self.h))?;
        if !self.one.is_empty() {
            let ones: Vec<String> = self.one.iter().map(|n| format!("ch_{}(1)", n + 2)).collect();
            write!(f, " with {}", ones.join(" "))?;
        }
        Ok(())
    }
}

fn key_ids(ring: &CohRing) -> Result<[usize; 4]> {
    Ok([
        ring.index_of(KEY_LABELS[0])?,
        ring.index_of(KEY_LABELS[1])?,
        ring.index_of(KEY_LABELS[2])?,
        ring.index_of(KEY_LABELS[3])?,
    ])
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Row {
    pt: Vec<u32>,
    #[serde(rename = "L")]
    l: Vec<u32>,
    #[serde(rename = "H")]
    h: Vec<u32>,
    one: Vec<u32>,
    num: Vec<i64>,
    den: Vec<i64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SeriesTable {
    pub variety: String,
    pub beta: String,
    pub source: String,
    pub rows: BTreeMap<SeriesKey, QRational>,
}

impl SeriesTable {
    pub fn get(&self, key: &SeriesKey) -> Option<&QRational> {
        self.rows.get(key)
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

/// Parse JSON-lines text. Blank lines are skipped.
pub fn parse_table(text: &str, source: &str) -> Result<SeriesTable> {
    let mut rows = BTreeMap::new();
    for (n, line) in text.lines().enumerate() {
        let line_no = n + 1;
        if line.trim().is_empty() {
            continue;
        }
        let r: Row = serde_json::from_str(line)
            .map_err(|e| Error::Malformed { line: line_no, msg: e.to_string() })?;
        if r.den.iter().all(|c| *c == 0) {
            return Err(Error::Malformed { line: line_no, msg: "zero denominator".into() });
        }
        let val = QRational::from_int_coeffs(&r.num, &r.den)
            .map_err(|e| Error::Malformed { line: line_no, msg: e.to_string() })?;
        let key = SeriesKey::new(r.pt, r.l, r.h, r.one);
        if rows.contains_key(&key) {
            return Err(Error::DuplicateKey(key.to_string()));
        }
        rows.insert(key, val);
    }
    Ok(SeriesTable { variety: "P3".into(), beta: "L".into(), source: source.into(), rows })
}

pub fn load_table(path: impl AsRef<Path>) -> Result<SeriesTable> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_table(&text, &path.display().to_string())
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// The bundled table, after checking its checksum.
pub fn bundled_table() -> Result<SeriesTable> {
    let sum = sha256_hex(P3_DEG1_JSONL.as_bytes());
    if sum != P3_DEG1_SHA256 {
        return Err(Error::Malformed { line: 0, msg: format!("checksum {sum} does not match") });
    }
    parse_table(P3_DEG1_JSONL, "bundled p3_deg1.jsonl")
}

/// A correction to a printed table row.
#[derive(Clone, Debug)]
pub struct Erratum {
    pub key: SeriesKey,
    pub printed: QRational,
    pub corrected: QRational,
    pub note: &'static str,
}

/// Known corrections to the bundled table. The bundled file keeps the printed values.
pub fn p3_deg1_errata() -> Vec<Erratum> {
    vec![Erratum {
        key: SeriesKey::new(vec![], vec![], vec![1, 1, 1, 1], vec![]),
        printed: QRational::from_int_coeffs(&[0, 81, -102, 81], &[2]).expect("nonzero"),
        corrected: QRational::from_int_coeffs(&[0, 81, -102, 81], &[8]).expect("nonzero"),
        note: "forced by <L_1(ch_3(H)^3)> = 0 given the rows [],[],[1,1,2] and [0],[],[1,1]",
    }]
}

/// Replace printed values by corrected ones. Rows whose value differs from the recorded printed
/// value are left alone.
pub fn apply_errata(table: &SeriesTable, errata: &[Erratum]) -> SeriesTable {
    let mut out = table.clone();
    for e in errata {
        if out.rows.get(&e.key) == Some(&e.printed) {
            out.rows.insert(e.key.clone(), e.corrected.clone());
        }
    }
    out
}

/// Cohomological degree of `ch_i(gamma)` on the moduli space: `i + deg(gamma) - top`.
fn factor_degree(ring: &CohRing, g: &PtGen) -> Option<i64> {
    match *g {
        PtGen::Ch(i, b) => Some(i as i64 + ring.degree(b) as i64 - ring.top_degree() as i64),
        _ => None,
    }
}

/// `<D>_beta` by table lookup after [`bracket_normalize`].
///
/// A monomial with a factor of negative degree, or whose total degree differs from the virtual
/// dimension `int_beta c1`, contributes 0. Every other monomial must be in the table.
pub fn evaluate_bracket(d: &PtElement, table: &SeriesTable, beta: &CurveData) -> Result<QRational> {
    let ring = d.ring().clone();
    let norm = bracket_normalize(d, beta);
    let vdim = &beta.d_beta;
    let mut acc = QRational::zero();
    for (m, c) in norm.terms() {
        let mut degs = Vec::with_capacity(m.factors().len());
        for g in m.factors() {
            degs.push(factor_degree(&ring, g).ok_or(Error::FormalSymbol)?);
        }
        if degs.iter().any(|x| *x < 0) || qi(degs.iter().sum::<i64>()) != *vdim {
            continue;
        }
        let key = SeriesKey::from_monomial(&ring, m)?
            .ok_or_else(|| Error::MissingKey(format!("{m:?}")))?;
        let val = table.get(&key).ok_or_else(|| Error::MissingKey(key.to_string()))?;
        acc = &acc + &val.scale(c);
    }
    Ok(acc)
}

/// `<Lcal_k^PT(D)>_beta`, which should vanish.
pub fn verify_virasoro_relation(
    k: i64,
    d: &PtElement,
    table: &SeriesTable,
    beta: &CurveData,
) -> Result<QRational> {
    evaluate_bracket(&apply_virasoro(k, d, PtVirasoro::Lcal)?, table, beta)
}

/// `f(1/q) = eps * q^{-a} * f(q)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SymmetryPair {
    pub eps: i8,
    pub a: i32,
}

pub fn functional_symmetry(f: &QRational) -> Option<SymmetryPair> {
    if f.is_zero() {
        return None;
    }
    let r = f.invert_variable().checked_div(f).ok()?;
    let single = |v: &[num_bigint::BigInt]| -> Option<(usize, num_bigint::BigInt)> {
        let mut nz = v.iter().enumerate().filter(|(_, c)| !c.is_zero());
        let (e, c) = nz.next()?;
        nz.next().is_none().then(|| (e, c.clone()))
    };
    let (en, cn) = single(r.numer_coeffs())?;
    let (ed, cd) = single(r.denom_coeffs())?;
    if cn.abs() != cd.abs() {
        return None;
    }
    let eps = if cn.is_negative() == cd.is_negative() { 1 } else { -1 };
    Some(SymmetryPair { eps, a: ed as i32 - en as i32 })
}

pub fn functional_symmetry_scan(table: &SeriesTable) -> Vec<(SeriesKey, Option<SymmetryPair>)> {
    table.rows.iter().map(|(k, f)| (k.clone(), functional_symmetry(f))).collect()
}

/// Outcome of one relation in [`virasoro_sweep`].
#[derive(Clone, Debug)]
pub struct RelationResult {
    pub k: i64,
    pub d: SeriesKey,
    /// Number of table rows with nonzero value that entered the relation.
    pub lookups: usize,
    pub value: QRational,
}

impl RelationResult {
    pub fn nontrivial(&self) -> bool {
        self.lookups > 0
    }
}

#[derive(Clone, Debug, Default)]
pub struct SweepReport {
    pub results: Vec<RelationResult>,
    /// Candidates whose image left the table.
    pub uncovered: usize,
}

impl SweepReport {
    pub fn nontrivial(&self) -> usize {
        self.results.iter().filter(|r| r.nontrivial()).count()
    }

    pub fn failures(&self) -> Vec<&RelationResult> {
        self.results.iter().filter(|r| !r.value.is_zero()).collect()
    }
}

/// Monomials in `ch_i(gamma)`, `gamma` in `{p, L, H, 1}`, every factor of positive degree, with
/// total degree `deg`.
pub fn key_monomials(ring: &CohRing, deg: i64) -> Result<Vec<SeriesKey>> {
    let ids = key_ids(ring)?;
    // (slot, n) with factor degree n + 2 + deg(class) - top
    let mut gens = Vec::new();
    for (slot, &b) in ids.iter().enumerate() {
        let base = 2 + ring.degree(b) as i64 - ring.top_degree() as i64;
        for n in 0..=deg.max(0) as u32 + 2 {
            let fd = base + n as i64;
            if fd >= 1 && fd <= deg {
                gens.push((slot, n, fd));
            }
        }
    }
    let mut out = Vec::new();
    let mut stack: Vec<(usize, i64, Vec<(usize, u32)>)> = vec![(0, 0, vec![])];
    while let Some((start, used, cur)) = stack.pop() {
        if used == deg {
            let mut v: [Vec<u32>; 4] = Default::default();
            for (s, n) in &cur {
                v[*s].push(*n);
            }
            let [pt, l, h, one] = v;
            out.push(SeriesKey::new(pt, l, h, one));
            continue;
        }
        for (j, (s, n, fd)) in gens.iter().enumerate().skip(start) {
            if used + fd <= deg {
                let mut c = cur.clone();
                c.push((*s, *n));
                stack.push((j, used + fd, c));
            }
        }
    }
    out.sort();
    Ok(out)
}

/// Evaluate `<Lcal_k(D)>` for every `k` in `ks` and every key monomial `D` of degree
/// `vdim - k`, skipping those whose image is not covered by the table.
pub fn virasoro_sweep(
    ring: &Arc<CohRing>,
    table: &SeriesTable,
    beta: &CurveData,
    ks: &[i64],
) -> Result<SweepReport> {
    let vdim: i64 = beta
        .d_beta
        .to_integer()
        .try_into()
        .map_err(|_| Error::InvalidRing("virtual dimension too large".into()))?;
    let mut jobs = Vec::new();
    for &k in ks {
        for key in key_monomials(ring, vdim - k)? {
            jobs.push((k, key));
        }
    }
    let outcomes: Vec<Result<Option<RelationResult>>> = jobs
        .into_par_iter()
        .map(|(k, key)| {
            let d = PtElement::from_monomial(ring, GenBasis::Ch, key.to_monomial(ring)?, Q::one());
            let image = apply_virasoro(k, &d, PtVirasoro::Lcal)?;
            let lookups = match count_lookups(&image, table, beta) {
                Ok(n) => n,
                Err(Error::MissingKey(_)) => return Ok(None),
                Err(e) => return Err(e),
            };
            let value = evaluate_bracket(&image, table, beta)?;
            Ok(Some(RelationResult { k, d: key, lookups, value }))
        })
        .collect();
    let mut report = SweepReport::default();
    for o in outcomes {
        match o? {
            Some(r) => report.results.push(r),
            None => report.uncovered += 1,
        }
    }
    Ok(report)
}

fn count_lookups(d: &PtElement, table: &SeriesTable, beta: &CurveData) -> Result<usize> {
    let ring = d.ring().clone();
    let norm = bracket_normalize(d, beta);
    let mut n = 0;
    for m in norm.terms().keys() {
        let single = PtElement::from_monomial(&ring, GenBasis::Ch, m.clone(), Q::one());
        if !evaluate_bracket(&single, table, beta)?.is_zero() {
            n += 1;
        }
    }
    Ok(n)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup() -> (Arc<CohRing>, SeriesTable, CurveData) {
        let r = CohRing::p3();
        let beta = CurveData::p3_line(&r).unwrap();
        (r, bundled_table().unwrap(), beta)
    }

    fn qrat(num: &[i64], den: &[i64]) -> QRational {
        QRational::from_int_coeffs(num, den).unwrap()
    }

    fn key(pt: &[u32], l: &[u32], h: &[u32], one: &[u32]) -> SeriesKey {
        SeriesKey::new(pt.to_vec(), l.to_vec(), h.to_vec(), one.to_vec())
    }

    #[test]
    fn parses_rows() {
        let t = parse_table(r#"{"pt":[1],"L":[0],"H":[],"one":[],"num":[0,-1,0,1],"den":[2]}"#, "x").unwrap();
        assert_eq!(t.get(&key(&[1], &[0], &[], &[])), Some(&qrat(&[0, -1, 0, 1], &[2])));
        let (_, b, _) = setup();
        assert_eq!(b.len(), 64);
        assert_eq!(b.get(&key(&[], &[0, 1], &[1], &[])), Some(&qrat(&[0, 3, -5, 3], &[1])));
        assert_eq!(b.get(&key(&[], &[2], &[1], &[])), Some(&qrat(&[0, -5, 15, -15, 5], &[4, 4])));
    }

    #[test]
    fn rejects_bad_input() {
        let row = r#"{"pt":[],"L":[],"H":[4],"one":[],"num":[1],"den":[1]}"#;
        assert!(matches!(parse_table(&format!("{row}\n{row}"), "x"), Err(Error::DuplicateKey(_))));
        let zero = r#"{"pt":[],"L":[],"H":[4],"one":[],"num":[1],"den":[0,0]}"#;
        assert!(matches!(parse_table(zero, "x"), Err(Error::Malformed { line: 1, .. })));
        assert!(matches!(parse_table("{\"pt\":[]}", "x"), Err(Error::Malformed { .. })));
    }

    #[test]
    fn checksum_matches() {
        assert_eq!(sha256_hex(P3_DEG1_JSONL.as_bytes()), P3_DEG1_SHA256);
    }

    #[test]
    fn symmetry_pairs() {
        let f = qrat(&[0, 3, -5, 3], &[1]);
        assert_eq!(functional_symmetry(&f), Some(SymmetryPair { eps: 1, a: 4 }));
        let g = qrat(&[0, -1, 0, 1], &[2]);
        assert_eq!(functional_symmetry(&g), Some(SymmetryPair { eps: -1, a: 4 }));
        let h = qrat(&[0, -5, 15, -15, 5], &[4, 4]);
        assert_eq!(functional_symmetry(&h), Some(SymmetryPair { eps: -1, a: 4 }));
        assert_eq!(functional_symmetry(&qrat(&[1, 1], &[1])), Some(SymmetryPair { eps: 1, a: 1 }));
        assert_eq!(functional_symmetry(&qrat(&[1, 2], &[1])), None);
        let (_, t, _) = setup();
        assert!(functional_symmetry_scan(&t).iter().all(|(_, p)| p.is_some()));
    }

    #[test]
    fn stationary_k2_relation() {
        let (r, t, beta) = setup();
        let (h, l) = (r.index_of("H").unwrap(), r.index_of("L").unwrap());
        let d = PtElement::from_monomial(
            &r,
            GenBasis::Ch,
            PtMonomial::new(vec![PtGen::Ch(3, h), PtGen::Ch(2, l)]),
            Q::one(),
        );
        assert!(verify_virasoro_relation(2, &d, &t, &beta).unwrap().is_zero());
        // 6<ch_3(p) ch_2(L)> = 3q(q^2 - 1)
        let p = r.index_of("p").unwrap();
        let e = PtElement::from_monomial(
            &r,
            GenBasis::Ch,
            PtMonomial::new(vec![PtGen::Ch(3, p), PtGen::Ch(2, l)]),
            qi(6),
        );
        assert_eq!(evaluate_bracket(&e, &t, &beta).unwrap(), qrat(&[0, -3, 0, 3], &[1]));
    }

    #[test]
    fn missing_key_is_an_error() {
        let (r, t, beta) = setup();
        let one = r.index_of("1").unwrap();
        let d = PtElement::from_monomial(&r, GenBasis::Ch, PtMonomial::new(vec![PtGen::Ch(7, one), PtGen::Ch(3, one)]), Q::one());
        assert!(matches!(evaluate_bracket(&d, &t, &beta), Err(Error::MissingKey(_))));
    }

    #[test]
    fn wrong_degree_vanishes() {
        let (r, t, beta) = setup();
        let p = r.index_of("p").unwrap();
        let d = PtElement::from_monomial(&r, GenBasis::Ch, PtMonomial::new(vec![PtGen::Ch(3, p)]), Q::one());
        assert!(evaluate_bracket(&d, &t, &beta).unwrap().is_zero());
    }

    #[test]
    fn key_monomials_have_the_right_degree() {
        let r = CohRing::p3();
        for deg in 1..=5 {
            for k in key_monomials(&r, deg).unwrap() {
                let m = k.to_monomial(&r).unwrap();
                let total: i64 = m.factors().iter().map(|g| factor_degree(&r, g).unwrap()).sum();
                assert_eq!(total, deg);
            }
        }
        let (_, t, _) = setup();
        let keys = key_monomials(&r, 4).unwrap();
        assert!(t.rows.keys().all(|k| keys.contains(k)));
    }

    #[test]
    fn printed_row_breaks_one_relation_and_erratum_fixes_it() {
        let (r, t, beta) = setup();
        let rep = virasoro_sweep(&r, &t, &beta, &[1]).unwrap();
        let bad: Vec<String> = rep.failures().iter().map(|f| f.d.to_string()).collect();
        assert_eq!(bad, vec!["[],[],[1,1,1]".to_string()]);
        let fixed = apply_errata(&t, &p3_deg1_errata());
        let rep = virasoro_sweep(&r, &fixed, &beta, &[-1, 0, 1, 2, 3, 4]).unwrap();
        assert!(rep.failures().is_empty());
        assert_eq!(rep.nontrivial(), 26);
    }
}

#[cfg(test)]
mod props {
    use super::*;
    use crate::exactmath::QPoly;
    use proptest::prelude::*;

    fn poly() -> impl Strategy<Value = Vec<i64>> {
        prop::collection::vec(-9i64..=9, 1..6)
    }

    proptest! {
        #[test]
        fn symmetry_pair_is_sound(n in poly(), d in poly()) {
            if let Ok(f) = QRational::from_int_coeffs(&n, &d) {
                if let Some(SymmetryPair { eps, a }) = functional_symmetry(&f) {
                    prop_assert_eq!(f.invert_variable(), f.mul_monomial(&qi(eps as i64), -a));
                }
            }
        }

        #[test]
        fn palindromes_are_detected(p in poly(), d in 0usize..3, sign in prop::bool::ANY) {
            // P(q) = p(q) +- q^n p(1/q) satisfies P(1/q) = +-q^{-n} P(q); divided by (1+q)^{2d}
            let n = p.len() - 1;
            let s = if sign { 1 } else { -1 };
            let coeffs: Vec<i64> = (0..=n).map(|i| p[i] + s * p[n - i]).collect();
            let den = (0..2 * d).fold(QPoly::one(), |acc, _| &acc * &QPoly::from_ints(&[1, 1]));
            let f = QRational::new(&QPoly::from_ints(&coeffs), &den).unwrap();
            prop_assume!(!f.is_zero());
            prop_assert_eq!(functional_symmetry(&f), Some(SymmetryPair { eps: s as i8, a: n as i32 - 2 * d as i32 }));
        }

        #[test]
        fn rows_round_trip(
            pt in prop::collection::vec(0u32..4, 0..3),
            l in prop::collection::vec(0u32..4, 0..3),
            h in prop::collection::vec(0u32..4, 0..3),
            one in prop::collection::vec(2u32..5, 0..3),
            num in poly(),
            den in poly(),
        ) {
            let f = QRational::from_int_coeffs(&num, &den);
            prop_assume!(f.is_ok());
            let line = serde_json::json!({ "pt": pt, "L": l, "H": h, "one": one, "num": num, "den": den }).to_string();
            let t = parse_table(&line, "generated").unwrap();
            prop_assert_eq!(t.len(), 1);
            prop_assert_eq!(t.get(&SeriesKey::new(pt, l, h, one)), Some(&f.unwrap()));
        }
    }
}
