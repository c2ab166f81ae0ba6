//! Even-degree cohomology rings with a finite basis.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_traits::{One, Zero};
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::exactmath::{fmt_q, qi, Q};

/// Which preset or construction produced a ring.
#[derive(Clone, Debug, PartialEq)]
pub enum RingKind {
    Plain,
    /// `S x P^1`; basis index `i < n` is `sigma_i x 1`, `i >= n` is `sigma_{i-n} x pt`.
    ProductWithP1(Arc<CohRing>),
}

/// Graded commutative ring with a basis of (p,p)-classes.
#[derive(Clone, PartialEq)]
pub struct CohRing {
    name: String,
    labels: Vec<String>,
    degrees: Vec<u32>,
    top: u32,
    /// `mult[i][j]` is the product `gamma_i * gamma_j` in the basis.
    mult: Vec<Vec<Vec<Q>>>,
    /// Integral of each basis element.
    integrals: Vec<Q>,
    c1: Vec<Q>,
    c2: Vec<Q>,
    /// `dual[i]` is the class paired to 1 against `gamma_i`.
    dual: Vec<Vec<Q>>,
    kind: RingKind,
}

/// Input data for [`CohRing::new`].
#[derive(Clone, Debug)]
pub struct RingData {
    pub name: String,
    pub labels: Vec<String>,
    pub degrees: Vec<u32>,
    pub top_degree: u32,
    /// Products of non-unit basis pairs `(i, j, coefficients)`; unlisted pairs multiply to 0.
    pub products: Vec<(usize, usize, Vec<Q>)>,
    pub integrals: Vec<Q>,
    pub c1: Vec<Q>,
    pub c2: Vec<Q>,
}

fn invert(m: &[Vec<Q>]) -> Option<Vec<Vec<Q>>> {
    let n = m.len();
    let mut a: Vec<Vec<Q>> = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { Q::one() } else { Q::zero() }));
            r
        })
        .collect();
    for col in 0..n {
        let piv = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, piv);
        let inv = a[col][col].recip();
        for v in a[col].iter_mut() {
            *v *= &inv;
        }
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let f = a[r][col].clone();
                let pivot_row = a[col].clone();
                for (v, p) in a[r].iter_mut().zip(pivot_row.iter()) {
                    *v -= &f * p;
                }
            }
        }
    }
    Some(a.into_iter().map(|r| r[n..].to_vec()).collect())
}

impl fmt::Debug for CohRing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CohRing({})", self.name)
    }
}

impl CohRing {
    /// Build a ring and check unit, degree additivity, commutativity, associativity and
    /// nondegeneracy of the pairing.
    pub fn new(data: RingData) -> Result<Arc<Self>> {
        Self::build(data, RingKind::Plain)
    }

    fn build(data: RingData, kind: RingKind) -> Result<Arc<Self>> {
        let n = data.labels.len();
        let bad = |m: String| Err(Error::InvalidRing(m));
        if n == 0 || data.degrees.len() != n || data.integrals.len() != n {
            return bad("basis, degrees and integrals must have equal nonzero length".into());
        }
        if data.c1.len() != n || data.c2.len() != n {
            return bad("Chern vectors have the wrong length".into());
        }
        if data.degrees[0] != 0 {
            return bad("basis element 0 must be the unit in degree 0".into());
        }
        if data.degrees.iter().any(|&d| d > data.top_degree) {
            return bad("basis degree above the top degree".into());
        }
        for (i, l) in data.labels.iter().enumerate() {
            if data.labels[..i].contains(l) {
                return bad(format!("duplicate label {l}"));
            }
        }
        let zero = vec![Q::zero(); n];
        let mut mult = vec![vec![zero.clone(); n]; n];
        for i in 0..n {
            let mut e = zero.clone();
            e[i] = Q::one();
            mult[0][i] = e.clone();
            mult[i][0] = e;
        }
        for (i, j, v) in &data.products {
            let (i, j) = (*i, *j);
            if i >= n || j >= n || v.len() != n {
                return bad("product entry out of range".into());
            }
            if i == 0 || j == 0 {
                return bad("products with the unit are implied".into());
            }
            mult[i][j] = v.clone();
            mult[j][i] = v.clone();
        }
        for i in 0..n {
            for j in 0..n {
                for (k, c) in mult[i][j].iter().enumerate() {
                    if !c.is_zero() && data.degrees[k] != data.degrees[i] + data.degrees[j] {
                        return bad(format!(
                            "{}*{} has a component in the wrong degree",
                            data.labels[i], data.labels[j]
                        ));
                    }
                }
            }
        }
        for (k, c) in data.integrals.iter().enumerate() {
            if !c.is_zero() && data.degrees[k] != data.top_degree {
                return bad("integral of a non-top class".into());
            }
        }
        let mut ring = CohRing {
            name: data.name,
            labels: data.labels,
            degrees: data.degrees,
            top: data.top_degree,
            mult,
            integrals: data.integrals,
            c1: data.c1,
            c2: data.c2,
            dual: Vec::new(),
            kind,
        };
        for i in 0..n {
            for j in 0..n {
                if ring.mult[i][j] != ring.mult[j][i] {
                    return bad("multiplication is not commutative".into());
                }
                for k in 0..n {
                    let left = ring.mul_vec(&ring.mult[i][j], &ring.basis_vec(k));
                    let right = ring.mul_vec(&ring.basis_vec(i), &ring.mult[j][k]);
                    if left != right {
                        return bad(format!(
                            "multiplication is not associative on ({}, {}, {})",
                            ring.labels[i], ring.labels[j], ring.labels[k]
                        ));
                    }
                }
            }
        }
        for (name, v) in [("c1", &ring.c1), ("c2", &ring.c2)] {
            let want = if name == "c1" { 1 } else { 2 };
            for (k, c) in v.iter().enumerate() {
                if !c.is_zero() && ring.degrees[k] != want {
                    return bad(format!("{name} has a component in the wrong degree"));
                }
            }
        }
        let pairing = ring.pairing_matrix();
        let inv = invert(&pairing).ok_or_else(|| Error::InvalidRing("pairing is degenerate".into()))?;
        // gamma_i^dual = sum_j (P^-1)_{ji} gamma_j
        ring.dual = (0..n).map(|i| (0..n).map(|j| inv[j][i].clone()).collect()).collect();
        Ok(Arc::new(ring))
    }

    /// Projective space P^3 with basis `1, H, L, p`.
    pub fn p3() -> Arc<Self> {
        let v = |xs: [i64; 4]| xs.iter().map(|&x| qi(x)).collect::<Vec<_>>();
        Self::new(RingData {
            name: "P3".into(),
            labels: vec!["1".into(), "H".into(), "L".into(), "p".into()],
            degrees: vec![0, 1, 2, 3],
            top_degree: 3,
            products: vec![(1, 1, v([0, 0, 1, 0])), (1, 2, v([0, 0, 0, 1]))],
            integrals: v([0, 0, 0, 1]),
            c1: v([0, 4, 0, 0]),
            c2: v([0, 0, 6, 0]),
        })
        .expect("P3 preset is valid")
    }

    /// Projective plane with basis `1, H, p`.
    pub fn p2() -> Arc<Self> {
        let v = |xs: [i64; 3]| xs.iter().map(|&x| qi(x)).collect::<Vec<_>>();
        Self::new(RingData {
            name: "P2".into(),
            labels: vec!["1".into(), "H".into(), "p".into()],
            degrees: vec![0, 1, 2],
            top_degree: 2,
            products: vec![(1, 1, v([0, 0, 1]))],
            integrals: v([0, 0, 1]),
            c1: v([0, 3, 0]),
            c2: v([0, 0, 3]),
        })
        .expect("P2 preset is valid")
    }

    /// `P^1 x P^1` with basis `1, A, B, p` (the two rulings).
    pub fn p1xp1() -> Arc<Self> {
        let v = |xs: [i64; 4]| xs.iter().map(|&x| qi(x)).collect::<Vec<_>>();
        Self::new(RingData {
            name: "P1xP1".into(),
            labels: vec!["1".into(), "A".into(), "B".into(), "p".into()],
            degrees: vec![0, 1, 1, 2],
            top_degree: 2,
            products: vec![(1, 2, v([0, 0, 0, 1]))],
            integrals: v([0, 0, 0, 1]),
            c1: v([0, 2, 2, 0]),
            c2: v([0, 0, 0, 4]),
        })
        .expect("P1xP1 preset is valid")
    }

    /// Ring from the JSON shape documented on [`RingJson`].
    pub fn from_json(text: &str) -> Result<Arc<Self>> {
        let j: RingJson = serde_json::from_str(text).map_err(|e| Error::InvalidRing(e.to_string()))?;
        j.into_ring()
    }

    /// `S x P^1` for a surface ring `S`.
    pub fn product_with_p1(s: &Arc<CohRing>) -> Result<Arc<Self>> {
        if s.top != 2 {
            return Err(Error::InvalidRing(format!("{} is not a surface", s.name)));
        }
        let n = s.dim();
        let mut labels = Vec::with_capacity(2 * n);
        let mut degrees = Vec::with_capacity(2 * n);
        for i in 0..n {
            labels.push(format!("{}x1", s.labels[i]));
            degrees.push(s.degrees[i]);
        }
        for i in 0..n {
            labels.push(format!("{}xpt", s.labels[i]));
            degrees.push(s.degrees[i] + 1);
        }
        let lift = |v: &[Q], pt: bool| {
            let mut out = vec![Q::zero(); 2 * n];
            let off = if pt { n } else { 0 };
            for (i, c) in v.iter().enumerate() {
                out[i + off] = c.clone();
            }
            out
        };
        let mut products = Vec::new();
        for i in 0..2 * n {
            for j in i..2 * n {
                let (a, pa) = (i % n, i >= n);
                let (b, pb) = (j % n, j >= n);
                if a == 0 && !pa || b == 0 && !pb || pa && pb {
                    continue;
                }
                let prod = &s.mult[a][b];
                if prod.iter().all(Zero::is_zero) {
                    continue;
                }
                products.push((i, j, lift(prod, pa || pb)));
            }
        }
        let mut integrals = vec![Q::zero(); 2 * n];
        for i in 0..n {
            integrals[n + i] = s.integrals[i].clone();
        }
        // c(X) = c(S)(1 + 2 pt): c1 = c1(S) + 2 pt, c2 = c2(S) + 2 c1(S) pt
        let mut c1 = lift(&s.c1, false);
        c1[n] += qi(2);
        let mut c2 = lift(&s.c2, false);
        for (i, c) in s.c1.iter().enumerate() {
            c2[n + i] += c * qi(2);
        }
        Self::build(
            RingData {
                name: format!("{}xP1", s.name),
                labels,
                degrees,
                top_degree: 3,
                products,
                integrals,
                c1,
                c2,
            },
            RingKind::ProductWithP1(s.clone()),
        )
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn top_degree(&self) -> u32 {
        self.top
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn degree(&self, i: usize) -> u32 {
        self.degrees[i]
    }

    pub fn kind(&self) -> &RingKind {
        &self.kind
    }

    pub fn index_of(&self, label: &str) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::UnknownClass(label.to_string()))
    }

    pub fn basis_vec(&self, i: usize) -> Vec<Q> {
        let mut v = vec![Q::zero(); self.dim()];
        v[i] = Q::one();
        v
    }

    pub fn mul_vec(&self, a: &[Q], b: &[Q]) -> Vec<Q> {
        let n = self.dim();
        let mut out = vec![Q::zero(); n];
        for (i, x) in a.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.iter().enumerate() {
                if y.is_zero() {
                    continue;
                }
                let xy = x * y;
                for (k, c) in self.mult[i][j].iter().enumerate() {
                    if !c.is_zero() {
                        out[k] += &xy * c;
                    }
                }
            }
        }
        out
    }

    /// Product of basis elements as a vector.
    pub fn mul_basis(&self, i: usize, j: usize) -> &[Q] {
        &self.mult[i][j]
    }

    pub fn integrate_vec(&self, a: &[Q]) -> Q {
        a.iter().zip(&self.integrals).map(|(x, y)| x * y).sum()
    }

    pub fn pairing_matrix(&self) -> Vec<Vec<Q>> {
        let n = self.dim();
        (0..n)
            .map(|i| (0..n).map(|j| self.integrate_vec(&self.mult[i][j])).collect())
            .collect()
    }

    pub fn dual_vec(&self, i: usize) -> &[Q] {
        &self.dual[i]
    }

    pub fn one(self: &Arc<Self>) -> CohClass {
        self.basis_class(0)
    }

    pub fn basis_class(self: &Arc<Self>, i: usize) -> CohClass {
        CohClass { ring: self.clone(), coeffs: self.basis_vec(i) }
    }

    pub fn class(self: &Arc<Self>, label: &str) -> Result<CohClass> {
        Ok(self.basis_class(self.index_of(label)?))
    }

    pub fn c1(self: &Arc<Self>) -> CohClass {
        CohClass { ring: self.clone(), coeffs: self.c1.clone() }
    }

    pub fn c2(self: &Arc<Self>) -> CohClass {
        CohClass { ring: self.clone(), coeffs: self.c2.clone() }
    }

    pub fn c1_vec(&self) -> &[Q] {
        &self.c1
    }

    pub fn c2_vec(&self) -> &[Q] {
        &self.c2
    }

    /// The point class: the top-degree basis element scaled to integral 1.
    pub fn point_vec(&self) -> Result<Vec<Q>> {
        let tops: Vec<usize> = (0..self.dim()).filter(|&i| self.degrees[i] == self.top).collect();
        match tops.as_slice() {
            [i] => {
                let mut v = self.basis_vec(*i);
                v[*i] = self.integrals[*i].recip();
                Ok(v)
            }
            _ => Err(Error::InvalidRing("top degree is not one-dimensional".into())),
        }
    }

    /// `c1^j` as a vector.
    pub fn c1_pow_vec(&self, j: u32) -> Vec<Q> {
        let mut v = self.basis_vec(0);
        for _ in 0..j {
            v = self.mul_vec(&v, &self.c1);
        }
        v
    }

    /// Coefficient tensor `M[a][b]` of `gamma * Delta` in the basis `e_a (x) e_b`.
    pub fn kunneth_tensor(&self, gamma: &[Q]) -> Vec<Vec<Q>> {
        let n = self.dim();
        let mut m = vec![vec![Q::zero(); n]; n];
        for i in 0..n {
            let left = self.mul_vec(gamma, &self.basis_vec(i));
            for (a, x) in left.iter().enumerate() {
                if x.is_zero() {
                    continue;
                }
                for (b, y) in self.dual[i].iter().enumerate() {
                    if !y.is_zero() {
                        m[a][b] += x * y;
                    }
                }
            }
        }
        m
    }

    /// Nonzero entries `(a, b, coefficient)` of [`CohRing::kunneth_tensor`].
    pub fn kunneth_terms(&self, gamma: &[Q]) -> Vec<(usize, usize, Q)> {
        let m = self.kunneth_tensor(gamma);
        let mut out = Vec::new();
        for (a, row) in m.into_iter().enumerate() {
            for (b, c) in row.into_iter().enumerate() {
                if !c.is_zero() {
                    out.push((a, b, c));
                }
            }
        }
        out
    }

    /// Small diagonal `gamma * Delta_123` as entries `(a, b, c, coefficient)`.
    pub fn triple_diagonal_terms(&self, gamma: &[Q]) -> Vec<(usize, usize, usize, Q)> {
        let mut acc: BTreeMap<(usize, usize, usize), Q> = BTreeMap::new();
        for (a, m, x) in self.kunneth_terms(gamma) {
            // split the right factor once more: e_m * Delta
            for (b, c, y) in self.kunneth_terms(&self.basis_vec(m)) {
                *acc.entry((a, b, c)).or_insert_with(Q::zero) += &x * &y;
            }
        }
        acc.into_iter().filter(|(_, c)| !c.is_zero()).map(|((a, b, c), q)| (a, b, c, q)).collect()
    }

    /// Express a vector as a multiple of `target`, if it is one.
    pub fn proportional(&self, v: &[Q], target: &[Q]) -> Option<Q> {
        let (k, t) = target.iter().enumerate().find(|(_, t)| !t.is_zero())?;
        let ratio = &v[k] / t;
        v.iter()
            .zip(target)
            .all(|(a, b)| *a == &ratio * b)
            .then_some(ratio)
    }

    /// `rho_*` for a product ring: `sigma x pt -> sigma`, `sigma x 1 -> 0`.
    pub fn pushforward_p1_vec(&self, v: &[Q]) -> Result<Vec<Q>> {
        match &self.kind {
            RingKind::ProductWithP1(s) => Ok(v[s.dim()..].to_vec()),
            RingKind::Plain => Err(Error::InvalidRing(format!("{} is not a product with P1", self.name))),
        }
    }

    /// Render a vector as `2*H + L`.
    pub fn fmt_vec(&self, v: &[Q]) -> String {
        let mut parts = Vec::new();
        for (i, c) in v.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let l = &self.labels[i];
            parts.push(if c.is_one() { l.clone() } else { format!("{}*{}", fmt_q(c), l) });
        }
        if parts.is_empty() {
            "0".into()
        } else {
            parts.join(" + ")
        }
    }
}

/// A class in a fixed ring.
#[derive(Clone, Debug, PartialEq)]
pub struct CohClass {
    ring: Arc<CohRing>,
    coeffs: Vec<Q>,
}

impl CohClass {
    pub fn new(ring: &Arc<CohRing>, coeffs: Vec<Q>) -> Result<Self> {
        if coeffs.len() != ring.dim() {
            return Err(Error::InvalidRing("coefficient vector has the wrong length".into()));
        }
        Ok(Self { ring: ring.clone(), coeffs })
    }

    pub fn zero(ring: &Arc<CohRing>) -> Self {
        Self { ring: ring.clone(), coeffs: vec![Q::zero(); ring.dim()] }
    }

    pub fn ring(&self) -> &Arc<CohRing> {
        &self.ring
    }

    pub fn coeffs(&self) -> &[Q] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    fn same_ring(&self, other: &Self) -> Result<()> {
        if Arc::ptr_eq(&self.ring, &other.ring) || self.ring == other.ring {
            Ok(())
        } else {
            Err(Error::RingMismatch)
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_ring(other)?;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect();
        Ok(Self { ring: self.ring.clone(), coeffs })
    }

    pub fn scale(&self, c: &Q) -> Self {
        Self { ring: self.ring.clone(), coeffs: self.coeffs.iter().map(|a| a * c).collect() }
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.same_ring(other)?;
        Ok(Self { ring: self.ring.clone(), coeffs: self.ring.mul_vec(&self.coeffs, &other.coeffs) })
    }

    pub fn integrate(&self) -> Q {
        self.ring.integrate_vec(&self.coeffs)
    }

    /// Product and the integral of the product.
    pub fn multiply_integrate(&self, other: &Self) -> Result<(Self, Q)> {
        let p = self.mul(other)?;
        let i = p.integrate();
        Ok((p, i))
    }

    /// Künneth decomposition of `self * Delta` as basis-aligned pairs.
    pub fn dual_basis_kunneth(&self) -> Vec<(CohClass, CohClass)> {
        self.ring
            .kunneth_terms(&self.coeffs)
            .into_iter()
            .map(|(a, b, c)| (self.ring.basis_class(a).scale(&c), self.ring.basis_class(b)))
            .collect()
    }

    /// Pushforward along the projection `S x P^1 -> S`.
    pub fn pushforward_p1(&self) -> Result<CohClass> {
        let v = self.ring.pushforward_p1_vec(&self.coeffs)?;
        match self.ring.kind() {
            RingKind::ProductWithP1(s) => Ok(CohClass { ring: s.clone(), coeffs: v }),
            RingKind::Plain => unreachable!("checked by pushforward_p1_vec"),
        }
    }
}

impl fmt::Display for CohClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.ring.fmt_vec(&self.coeffs))
    }
}

/// Curve class data: `int_beta` on divisors and `d_beta = int_beta c1`.
#[derive(Clone, Debug, PartialEq)]
pub struct CurveData {
    pub name: String,
    /// `int_beta gamma_i` for basis elements of degree 1, zero elsewhere.
    pub divisor_pairing: Vec<Q>,
    pub d_beta: Q,
}

impl CurveData {
    pub fn new(ring: &CohRing, name: &str, divisor_pairing: Vec<Q>) -> Result<Self> {
        if divisor_pairing.len() != ring.dim() {
            return Err(Error::InvalidRing("curve pairing has the wrong length".into()));
        }
        for (i, c) in divisor_pairing.iter().enumerate() {
            if !c.is_zero() && ring.degree(i) != 1 {
                return Err(Error::InvalidRing("curve pairing defined off H^2".into()));
            }
        }
        let d_beta = ring.c1_vec().iter().zip(&divisor_pairing).map(|(a, b)| a * b).sum();
        Ok(Self { name: name.into(), divisor_pairing, d_beta })
    }

    /// The line class in P^3.
    pub fn p3_line(ring: &CohRing) -> Result<Self> {
        let mut v = vec![Q::zero(); ring.dim()];
        v[ring.index_of("H")?] = Q::one();
        Self::new(ring, "L", v)
    }

    pub fn pair(&self, i: usize) -> &Q {
        &self.divisor_pairing[i]
    }
}

/// JSON ring description.
///
/// ```json
/// {"name": "P2", "top_degree": 2,
///  "basis": [{"label": "1", "degree": 0}, {"label": "H", "degree": 1}, {"label": "p", "degree": 2}],
///  "products": [{"left": "H", "right": "H", "value": {"p": "1"}}],
///  "integrals": {"p": "1"}, "c1": {"H": "3"}, "c2": {"p": "3"}}
/// ```
///
/// Coefficients are strings like `"3"` or `"-1/2"`. Products with the unit are implied and
/// unlisted products of other basis pairs are zero.
#[derive(Clone, Debug, Deserialize)]
pub struct RingJson {
    pub name: String,
    pub top_degree: u32,
    pub basis: Vec<BasisJson>,
    #[serde(default)]
    pub products: Vec<ProductJson>,
    pub integrals: BTreeMap<String, String>,
    pub c1: BTreeMap<String, String>,
    pub c2: BTreeMap<String, String>,
}

#[derive(Clone, Debug, Deserialize)]
pub struct BasisJson {
    pub label: String,
    pub degree: u32,
}

#[derive(Clone, Debug, Deserialize)]
pub struct ProductJson {
    pub left: String,
    pub right: String,
    pub value: BTreeMap<String, String>,
}

impl RingJson {
    pub fn into_ring(self) -> Result<Arc<CohRing>> {
        let labels: Vec<String> = self.basis.iter().map(|b| b.label.clone()).collect();
        let idx = |l: &str| {
            labels.iter().position(|x| x == l).ok_or_else(|| Error::UnknownClass(l.to_string()))
        };
        let vec_of = |m: &BTreeMap<String, String>| -> Result<Vec<Q>> {
            let mut v = vec![Q::zero(); labels.len()];
            for (k, s) in m {
                v[idx(k)?] = crate::exactmath::parse_q(s)
                    .ok_or_else(|| Error::InvalidRing(format!("bad coefficient {s}")))?;
            }
            Ok(v)
        };
        let mut products = Vec::new();
        for p in &self.products {
            products.push((idx(&p.left)?, idx(&p.right)?, vec_of(&p.value)?));
        }
        CohRing::new(RingData {
            name: self.name.clone(),
            degrees: self.basis.iter().map(|b| b.degree).collect(),
            labels: labels.clone(),
            top_degree: self.top_degree,
            products,
            integrals: vec_of(&self.integrals)?,
            c1: vec_of(&self.c1)?,
            c2: vec_of(&self.c2)?,
        })
    }
}

/// Look up a preset by name: `p3`, `p2`, `p1xp1`, `p2xp1`, `p1xp1xp1`.
pub fn preset(name: &str) -> Result<Arc<CohRing>> {
    match name {
        "p3" | "P3" => Ok(CohRing::p3()),
        "p2" | "P2" => Ok(CohRing::p2()),
        "p1xp1" | "P1xP1" => Ok(CohRing::p1xp1()),
        "p2xp1" => CohRing::product_with_p1(&CohRing::p2()),
        "p1xp1xp1" => CohRing::product_with_p1(&CohRing::p1xp1()),
        other => Err(Error::InvalidRing(format!("unknown preset {other}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn p3_products_and_chern() {
        let r = CohRing::p3();
        let h = r.class("H").unwrap();
        let l = r.class("L").unwrap();
        let p = r.class("p").unwrap();
        assert_eq!(h.mul(&h).unwrap(), l);
        assert_eq!(h.mul(&l).unwrap(), p);
        assert!(l.mul(&l).unwrap().is_zero());
        assert_eq!(r.c1(), h.scale(&qi(4)));
        assert_eq!(r.c2(), l.scale(&qi(6)));
        assert_eq!(r.c1().mul(&r.c2()).unwrap(), p.scale(&qi(24)));
        assert_eq!(r.c1().multiply_integrate(&r.c2()).unwrap().1, qi(24));
        assert_eq!(l.mul(&r.c1()).unwrap(), p.scale(&qi(4)));
        assert_eq!(p.integrate(), qi(1));
        assert_eq!(h.multiply_integrate(&l).unwrap().1, qi(1));
    }

    #[test]
    fn p3_pairing_is_antidiagonal() {
        let m = CohRing::p3().pairing_matrix();
        for (i, row) in m.iter().enumerate() {
            for (j, c) in row.iter().enumerate() {
                assert_eq!(*c, if i + j == 3 { qi(1) } else { qi(0) });
            }
        }
    }

    #[test]
    fn p3_diagonals() {
        let r = CohRing::p3();
        let names = |t: Vec<(usize, usize, Q)>| {
            t.into_iter()
                .map(|(a, b, c)| (r.label(a).to_string(), r.label(b).to_string(), c))
                .collect::<Vec<_>>()
        };
        let one = r.one();
        assert_eq!(
            names(r.kunneth_terms(one.coeffs())),
            vec![
                ("1".into(), "p".into(), qi(1)),
                ("H".into(), "L".into(), qi(1)),
                ("L".into(), "H".into(), qi(1)),
                ("p".into(), "1".into(), qi(1)),
            ]
        );
        let p = r.class("p").unwrap();
        assert_eq!(names(r.kunneth_terms(p.coeffs())), vec![("p".into(), "p".into(), qi(1))]);
        assert_eq!(
            names(r.kunneth_terms(r.c1_vec())),
            vec![
                ("H".into(), "p".into(), qi(4)),
                ("L".into(), "L".into(), qi(4)),
                ("p".into(), "H".into(), qi(4)),
            ]
        );
    }

    #[test]
    fn diagonal_property_all_presets() {
        for r in [CohRing::p3(), CohRing::p2(), CohRing::p1xp1(), preset("p2xp1").unwrap()] {
            let n = r.dim();
            for g in 0..n {
                for h in 0..n {
                    // sum_i left_i * int(right_i * h) = g * h
                    let mut acc = vec![Q::zero(); n];
                    for (a, b, c) in r.kunneth_terms(&r.basis_vec(g)) {
                        let pair = r.integrate_vec(r.mul_basis(b, h));
                        acc[a] += c * pair;
                    }
                    assert_eq!(acc, r.mul_basis(g, h).to_vec());
                }
            }
        }
    }

    #[test]
    fn product_with_p1_chern() {
        let s = CohRing::p2();
        let x = CohRing::product_with_p1(&s).unwrap();
        let c1 = x.c1();
        let want = x.class("Hx1").unwrap().scale(&qi(3)).add(&x.class("1xpt").unwrap().scale(&qi(2))).unwrap();
        assert_eq!(c1, want);
        // c1 c2 / 24 = (c1(S)^2 + c2(S))/12 x pt, and (9 + 3)/12 = 1
        let c1c2 = x.c1().mul(&x.c2()).unwrap();
        assert_eq!(c1c2.scale(&crate::exactmath::qr(1, 24)), x.class("pxpt").unwrap());
        // pairing of sigma x 1 with sigma' x pt
        let a = x.class("Hx1").unwrap();
        let b = x.class("Hxpt").unwrap();
        assert_eq!(a.multiply_integrate(&b).unwrap().1, qi(1));
        assert_eq!(c1.pushforward_p1().unwrap(), s.one().scale(&qi(2)));
        assert_eq!(x.class("Hxpt").unwrap().pushforward_p1().unwrap(), s.class("H").unwrap());
        assert!(x.class("Hx1").unwrap().pushforward_p1().unwrap().is_zero());
    }

    #[test]
    fn rejects_bad_rings() {
        let v = |xs: [i64; 2]| xs.iter().map(|&x| qi(x)).collect::<Vec<_>>();
        let degenerate = RingData {
            name: "bad".into(),
            labels: vec!["1".into(), "p".into()],
            degrees: vec![0, 1],
            top_degree: 1,
            products: vec![],
            integrals: v([0, 0]),
            c1: v([0, 0]),
            c2: v([0, 0]),
        };
        assert!(CohRing::new(degenerate).is_err());
        assert!(CohRing::product_with_p1(&CohRing::p3()).is_err());
    }

    #[test]
    fn json_ring_matches_preset() {
        let text = r#"{"name":"P2","top_degree":2,
            "basis":[{"label":"1","degree":0},{"label":"H","degree":1},{"label":"p","degree":2}],
            "products":[{"left":"H","right":"H","value":{"p":"1"}}],
            "integrals":{"p":"1"},"c1":{"H":"3"},"c2":{"p":"3"}}"#;
        assert_eq!(*CohRing::from_json(text).unwrap(), *CohRing::p2());
    }
}

#[cfg(test)]
mod props {
    use super::*;
    use crate::exactmath::qr;
    use proptest::prelude::*;

    fn rings() -> Vec<Arc<CohRing>> {
        ["p3", "p2", "p1xp1", "p2xp1", "p1xp1xp1"].iter().map(|n| preset(n).unwrap()).collect()
    }

    fn vec_in(n: usize) -> impl Strategy<Value = Vec<Q>> {
        prop::collection::vec((-5i64..=5, 1i64..=3).prop_map(|(a, b)| qr(a, b)), n)
    }

    fn ring_and_vecs() -> impl Strategy<Value = (Arc<CohRing>, Vec<Q>, Vec<Q>, Vec<Q>)> {
        (0..rings().len()).prop_flat_map(|i| {
            let r = rings()[i].clone();
            let n = r.dim();
            (Just(r), vec_in(n), vec_in(n), vec_in(n))
        })
    }

    proptest! {
        #[test]
        fn commutative_associative_unital((r, a, b, c) in ring_and_vecs()) {
            prop_assert_eq!(r.mul_vec(&a, &b), r.mul_vec(&b, &a));
            prop_assert_eq!(r.mul_vec(&r.mul_vec(&a, &b), &c), r.mul_vec(&a, &r.mul_vec(&b, &c)));
            prop_assert_eq!(r.mul_vec(&a, r.one().coeffs()), a);
        }

        #[test]
        fn diagonal_splits_the_pairing((r, a, b, g) in ring_and_vecs()) {
            // sum c int(a e_l) int(b e_r) = int(a b g)
            let lhs: Q = r
                .kunneth_terms(&g)
                .into_iter()
                .map(|(l, rr, c)| {
                    c * r.integrate_vec(&r.mul_vec(&a, &r.basis_vec(l))) * r.integrate_vec(&r.mul_vec(&b, &r.basis_vec(rr)))
                })
                .sum();
            prop_assert_eq!(lhs, r.integrate_vec(&r.mul_vec(&r.mul_vec(&a, &b), &g)));
        }
    }

    #[test]
    fn dual_basis() {
        for r in rings() {
            for i in 0..r.dim() {
                for j in 0..r.dim() {
                    let want = if i == j { qi(1) } else { qi(0) };
                    assert_eq!(r.integrate_vec(&r.mul_vec(r.dual_vec(i), &r.basis_vec(j))), want, "{} {i} {j}", r.name());
                }
            }
        }
    }
}
