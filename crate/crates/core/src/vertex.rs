//! Vertex-operator residues over abstract `a_n` symbols.
//!
//! The constraint curve is solved once in `rho = x r` and `s = t/v` with rational coefficients
//! and then composed into the point variables. Powers of `t` stand for powers of `c1`, so the
//! coefficient of `t^j` is compared with the `c1^j` stratum of `C°`.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_traits::{One, Zero};

use crate::correspondence::{decay_terms, triple_bump_terms, two_bump_terms, AbstractTerm};
use crate::exactmath::{qi, qr, QPoly, QRational, TruncSeries, VarSet, VarSpec, WScalar, Q};
use crate::Result;

pub type VertexSeries = TruncSeries<WScalar>;

/// Highest power of `t` kept inside products; every point function carries `1/t` on top.
const T_MAX: i32 = 3;

/// Polynomial in abstract `a_n`, graded by the power of `t`. Keys are `(t power, parts)` with
/// parts weakly decreasing.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TPoly(pub BTreeMap<(i32, Vec<u32>), WScalar>);

impl TPoly {
    pub fn add_term(&mut self, t: i32, mut parts: Vec<u32>, c: &WScalar) {
        parts.sort_unstable_by(|a, b| b.cmp(a));
        let e = self.0.entry((t, parts)).or_default();
        *e += c;
        if e.is_zero() {
            self.0.retain(|_, v| !v.is_zero());
        }
    }

    pub fn from_terms(terms: &[AbstractTerm]) -> Self {
        let mut out = Self::default();
        for t in terms {
            out.add_term(t.c1_power as i32, t.parts.clone(), &t.coeff);
        }
        out
    }

    pub fn constant(c: WScalar) -> Self {
        let mut out = Self::default();
        out.add_term(0, Vec::new(), &c);
        out
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    /// Terms with `lo <= t power <= hi`.
    pub fn t_range(&self, lo: i32, hi: i32) -> Self {
        Self(
            self.0
                .iter()
                .filter(|((t, _), _)| (lo..=hi).contains(t))
                .map(|(k, v)| (k.clone(), v.clone()))
                .collect(),
        )
    }
}

impl fmt::Display for TPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for ((t, parts), c) in &self.0 {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({c})")?;
            if *t != 0 {
                write!(f, "*t^{t}")?;
            }
            for p in parts {
                write!(f, "*a{p}")?;
            }
        }
        Ok(())
    }
}

/// Series in `rho, s` attached to one point: `p = g/rho` with `g = w - y`, `D = -1/p`, the
/// square-root density, and `Q_n = (1 - (y/w)^n)/rho`.
struct Kernels {
    p: TruncSeries<Q>,
    d: TruncSeries<Q>,
    sqrt: TruncSeries<Q>,
    q: Vec<TruncSeries<Q>>,
}

fn rho_s_vars(rho: i32) -> Arc<VarSet> {
    VarSet::new(vec![VarSpec::power("rho", rho), VarSpec::power("s", T_MAX)])
}

impl Kernels {
    fn new(n_max: u32) -> Result<Self> {
        let big = rho_s_vars(3);
        let small = rho_s_vars(2);
        let rho = TruncSeries::var(&big, "rho")?;
        let s = TruncSeries::var(&big, "s")?;
        // w e^w = y e^y e^{-x r} with w = y + g, y = 1/s: g = -rho - log(1 + s g).
        let mut g = rho.neg();
        loop {
            let next = rho.neg().sub(&s.mul(&g)?.log1p()?)?;
            if next == g {
                break;
            }
            g = next;
        }
        let p = g.shift("rho", -1)?.embed(&small)?;
        let d = p.recip()?.neg();
        let dg = g.derivative("s")?;
        let sqrt = s
            .pow(2)?
            .mul(&dg)?
            .neg()
            .one_plus_pow(&qr(1, 2))?
            .embed(&small)?;
        let sg = s.mul(&g)?;
        let one = TruncSeries::one(&big);
        let q = (1..=n_max)
            .map(|n| {
                Ok(one
                    .sub(&sg.one_plus_pow(&qi(-(n as i64)))?)?
                    .shift("rho", -1)?
                    .embed(&small)?)
            })
            .collect::<Result<_>>()?;
        Ok(Self { p, d, sqrt, q })
    }
}

fn a_name(n: u32) -> String {
    format!("a{n}")
}

/// Variables shared by the point functions: `t`, optionally `r`, per-point `x_i, v_i`, and the
/// `a_n` with two caps (total x degree and total a weight).
fn point_vars(points: &[(&str, &str)], x_max: i32, x_total: i32, v_window: (i32, i32), with_r: bool, n_max: u32) -> Result<Arc<VarSet>> {
    let mut vars = vec![VarSpec::power("t", T_MAX)];
    if with_r {
        vars.push(VarSpec::power("r", 2));
    }
    for (x, v) in points {
        vars.push(VarSpec::power(x, x_max));
        vars.push(VarSpec::laurent(v, v_window.0, v_window.1));
    }
    let names: Vec<String> = (1..=n_max).map(a_name).collect();
    for n in &names {
        vars.push(VarSpec::power(n, x_total));
    }
    let xw: Vec<(&str, i32)> = points.iter().map(|(x, _)| (*x, 1)).collect();
    let aw: Vec<(&str, i32)> = names.iter().enumerate().map(|(i, n)| (n.as_str(), i as i32 + 1)).collect();
    Ok(VarSet::with_weight_caps(vars, &[(&xw, x_total), (&aw, n_max as i32)])?)
}

/// `sqrt * D * E * V_+` for one point (without the `1/t` of the measure).
///
/// `E = exp(-kappa x p (t + v + (t/2) x r p))` with `kappa = -w^{-1}`, and
/// `V_+ = exp(sum_n a_n lambda^n/n x v^{-n} Q_n)` with `lambda = -w`.
fn point_factor(k: &Kernels, target: &Arc<VarSet>, x: &str, v: &str, with_r: bool) -> Result<VertexSeries> {
    let one = WScalar::one();
    let rho_img = if with_r {
        TruncSeries::monomial(target, &[(x, 1), ("r", 1)], one.clone())?
    } else {
        TruncSeries::zero(target)
    };
    let s_img = TruncSeries::monomial(target, &[("t", 1), (v, -1)], one.clone())?;
    let images = [rho_img, s_img];
    let comp = |f: &TruncSeries<Q>| -> Result<VertexSeries> {
        Ok(f.map_coeffs(|c| WScalar::from_q(c.clone())).compose(target, &images)?)
    };
    let p = comp(&k.p)?;
    let xs = TruncSeries::var(target, x)?;
    let ts = TruncSeries::var(target, "t")?;
    let mut inner = ts.add(&TruncSeries::var(target, v)?)?;
    if with_r {
        let r = TruncSeries::var(target, "r")?;
        inner = inner.add(&ts.mul(&xs)?.mul(&r)?.mul(&p)?.scale_q(&qr(1, 2)))?;
    }
    let kappa = WScalar::monomial(-Q::one(), -1);
    let e_exp = xs.mul(&p)?.mul(&inner)?.scale(&(-&kappa));
    let mut v_exp = VertexSeries::zero(target);
    for (i, qn) in k.q.iter().enumerate() {
        let n = i as i32 + 1;
        let name = a_name(n as u32);
        if target.index(&name).is_err() {
            break;
        }
        let sign = if n % 2 == 0 { Q::one() } else { -Q::one() };
        let coeff = WScalar::monomial(sign / qi(n as i64), n);
        let mono = TruncSeries::monomial(target, &[(name.as_str(), 1), (x, 1), (v, -n)], coeff)?;
        if mono.is_zero() {
            continue;
        }
        v_exp = v_exp.add(&mono.mul(&comp(qn)?)?)?;
    }
    comp(&k.sqrt)?
        .mul(&comp(&k.d)?)?
        .mul(&e_exp.exp()?)?
        .mul(&v_exp.exp()?)
        .map_err(Into::into)
}

/// `-x_1 x_2 t v_1 v_2 / ((v_1 - v_2)^2 (v_1 + t)(v_2 + t))` expanded for `|v_1| > |v_2|`: the
/// `r^2` coefficient of `B - 1` in `v = y t`, divided by `r^2 t`.
fn pair_kernel(target: &Arc<VarSet>, (x1, v1): (&str, &str), (x2, v2): (&str, &str), m_max: i32) -> Result<VertexSeries> {
    let mut terms = Vec::new();
    let idx = |n: &str| target.index(n);
    let (it, ix1, ix2, iv1, iv2) = (idx("t")?, idx(x1)?, idx(x2)?, idx(v1)?, idx(v2)?);
    for m in 0..=m_max {
        for j1 in 0..T_MAX {
            for j2 in 0..T_MAX - j1 {
                let mut e = vec![0; target.len()];
                e[it] = 1 + j1 + j2;
                e[ix1] = 1;
                e[ix2] = 1;
                e[iv1] = -m - 2 - j1;
                e[iv2] = m - j2;
                let sign = if (j1 + j2) % 2 == 0 { -1 } else { 1 };
                terms.push((e, WScalar::from_int(sign * (m as i64 + 1))));
            }
        }
    }
    Ok(TruncSeries::from_terms(target, terms)?)
}

/// Collects a residue (free of `v`) into x-exponent keyed `TPoly`s, shifting `t` by `t_shift`.
fn collect(s: &VertexSeries, xs: &[&str], t_shift: i32, n_max: u32) -> Result<BTreeMap<Vec<u32>, TPoly>> {
    let vars = s.vars();
    let ix: Vec<usize> = xs.iter().map(|x| vars.index(x)).collect::<std::result::Result<_, _>>()?;
    let it = vars.index("t")?;
    let ia: Vec<(u32, usize)> = (1..=n_max)
        .filter_map(|n| vars.index(&a_name(n)).ok().map(|i| (n, i)))
        .collect();
    let mut out: BTreeMap<Vec<u32>, TPoly> = BTreeMap::new();
    for (e, c) in s.terms() {
        let key: Vec<u32> = ix.iter().map(|&i| e[i] as u32).collect();
        let mut parts = Vec::new();
        for &(n, i) in &ia {
            for _ in 0..e[i] {
                parts.push(n);
            }
        }
        out.entry(key).or_default().add_term(e[it] + t_shift, parts, c);
    }
    out.retain(|_, p| !p.is_zero());
    Ok(out)
}

/// One-point function: `r^0` coefficients keyed by the tilde-ch index (the x power), plus the
/// `r^1` and `r^2` parts for the parity checks.
#[derive(Clone, Debug)]
pub struct OnePoint {
    pub r0: BTreeMap<u32, TPoly>,
    pub r1: BTreeMap<u32, TPoly>,
    pub r2: BTreeMap<u32, TPoly>,
}

/// Multi-point functions keyed by tuples of tilde-ch indices.
pub type NPoint = BTreeMap<Vec<u32>, TPoly>;

/// `Res_v (1/t) sqrt D E V_+` up to `x^{x_max}`.
pub fn one_point(x_max: u32) -> Result<OnePoint> {
    let xm = x_max as i32;
    let n_max = x_max + 1;
    let k = Kernels::new(n_max)?;
    let vars = point_vars(&[("x", "v")], xm, xm, (-(n_max as i32) - 2 * T_MAX - 4, xm + 2), true, n_max)?;
    let f = point_factor(&k, &vars, "x", "v", true)?;
    let res = f.residue("v")?;
    let part = |i: i32| -> Result<BTreeMap<u32, TPoly>> {
        let c = res.coeff_of("r", i)?;
        Ok(collect(&c, &["x"], -1, n_max)?.into_iter().map(|(k, v)| (k[0], v)).collect())
    };
    Ok(OnePoint { r0: part(0)?, r1: part(1)?, r2: part(2)? })
}

/// Connected two-point function `Res Res (1/t^2) F_1 F_2 G_12` at `r^0`, for tilde-ch indices
/// with `i_1 + i_2 <= x_total`.
pub fn two_point(x_total: u32) -> Result<NPoint> {
    let xt = x_total as i32;
    let n_max = x_total;
    let m_max = xt;
    let k = Kernels::new(n_max)?;
    let pts = [("x1", "v1"), ("x2", "v2")];
    let win = (-(m_max + n_max as i32 + 2 * T_MAX + 4), m_max + xt + 4);
    let vars = point_vars(&pts, xt, xt, win, false, n_max)?;
    let g = pair_kernel(&vars, pts[0], pts[1], m_max)?;
    let (f1, f2) = rayon::join(
        || point_factor(&k, &vars, "x1", "v1", false),
        || point_factor(&k, &vars, "x2", "v2", false),
    );
    let inner = f2?.residue_of_product(&g, "v2")?;
    let res = f1?.residue_of_product(&inner, "v1")?;
    collect(&res, &["x1", "x2"], -2, n_max)
}

/// Connected three-point function with `G_12 G_23 + G_12 G_13 + G_23 G_13` at `r^0`, for
/// tilde-ch indices at most `x_max` each.
pub fn three_point(x_max: u32) -> Result<NPoint> {
    let xm = x_max as i32;
    let xt = 3 * xm;
    let n_max = xt as u32;
    let m_max = 2 * xm + 2;
    let k = Kernels::new(n_max)?;
    let pts = [("x1", "v1"), ("x2", "v2"), ("x3", "v3")];
    let win = (-(2 * m_max + n_max as i32 + 3 * T_MAX + 6), 2 * m_max + xt + 6);
    let vars = point_vars(&pts, xm, xt, win, false, n_max)?;
    let g12 = pair_kernel(&vars, pts[0], pts[1], m_max)?;
    let g13 = pair_kernel(&vars, pts[0], pts[2], m_max)?;
    let g23 = pair_kernel(&vars, pts[1], pts[2], m_max)?;
    let s = g12.mul(&g23)?.add(&g12.mul(&g13)?)?.add(&g23.mul(&g13)?)?;
    let fs: Vec<Result<VertexSeries>> = {
        use rayon::prelude::*;
        pts.par_iter().map(|(x, v)| point_factor(&k, &vars, x, v, false)).collect()
    };
    let mut fs = fs.into_iter();
    let (f1, f2, f3) = (fs.next().unwrap()?, fs.next().unwrap()?, fs.next().unwrap()?);
    let r3 = f3.residue_of_product(&s, "v3")?;
    let r2 = f2.residue_of_product(&r3, "v2")?;
    let r1 = f1.residue_of_product(&r2, "v1")?;
    collect(&r1, &["x1", "x2", "x3"], -3, n_max)
}

/// `h_tilde_npoint` dispatcher: `bound` is the largest shifted index `k` (tilde-ch index
/// `k + 2`); for two points it bounds `k_1 + k_2`.
pub fn h_tilde_npoint(n: u32, bound: u32) -> Result<NPoint> {
    Ok(match n {
        1 => one_point(bound + 2)?.r0.into_iter().map(|(k, v)| (vec![k], v)).collect(),
        2 => two_point(bound + 4)?,
        3 => three_point(bound + 2)?,
        _ => return Err(crate::Error::BadLevel(n as i64)),
    })
}

#[derive(Clone, Debug)]
pub struct Mismatch {
    pub family: &'static str,
    /// Tilde-ch indices.
    pub index: Vec<u32>,
    pub computed: TPoly,
    pub expected: TPoly,
}

impl fmt::Display for Mismatch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {:?}: computed {} expected {}", self.family, self.index, self.computed, self.expected)
    }
}

#[derive(Clone, Debug, Default)]
pub struct VertexReport {
    pub one_point_checked: usize,
    pub two_point_checked: usize,
    pub three_point_checked: usize,
    /// The `r^1` coefficient of the one-point function is zero.
    pub r1_vanishes: bool,
    /// The `r^2` coefficient of the one-point function has no `t^{<=0}` part.
    pub r2_low_t_vanishes: bool,
    pub mismatches: Vec<Mismatch>,
}

impl VertexReport {
    pub fn ok(&self) -> bool {
        self.r1_vanishes && self.r2_low_t_vanishes && self.mismatches.is_empty()
    }
}

/// Expected one-point value for tilde-ch index `i`.
fn expected_one(i: u32) -> TPoly {
    match i {
        0 => TPoly::constant(-WScalar::one()),
        1 => TPoly::default(),
        _ => TPoly::from_terms(&decay_terms(i as i64 - 2)),
    }
}

/// Compares the one-point function for `k <= k1`, pairs with `k_1 + k_2 <= k2` and triples
/// with every `1 <= k_i <= k3` against the `C°` formulas (shifted indices, tilde-ch index
/// `k + 2`). A triple with some `k_i = 0` would need a class of degree above 1 next to two
/// others with nonzero product, which a 3-fold does not have.
pub fn vertex_verify(k1: u32, k2: u32, k3: u32) -> Result<VertexReport> {
    let (one, (two, three)) = rayon::join(
        || one_point(k1 + 2),
        || rayon::join(|| two_point(k2 + 4), || three_point(k3 + 2)),
    );
    let (one, two, three) = (one?, two?, three?);
    let mut rep = VertexReport {
        r1_vanishes: one.r1.is_empty(),
        r2_low_t_vanishes: one.r2.values().all(|p| p.t_range(i32::MIN, 0).is_zero()),
        ..Default::default()
    };
    for i in 0..=k1 + 2 {
        let computed = one.r0.get(&i).cloned().unwrap_or_default();
        let expected = expected_one(i);
        rep.one_point_checked += 1;
        if computed != expected {
            rep.mismatches.push(Mismatch { family: "one-point", index: vec![i], computed, expected });
        }
    }
    for a in 0..=k2 {
        for b in 0..=k2 - a {
            let index = vec![a + 2, b + 2];
            let computed = two.get(&index).cloned().unwrap_or_default().t_range(-1, 1);
            let expected = TPoly::from_terms(&two_bump_terms(a as i64, b as i64));
            rep.two_point_checked += 1;
            if computed != expected {
                rep.mismatches.push(Mismatch { family: "two-point", index, computed, expected });
            }
        }
    }
    for a in 1..=k3 {
        for b in 1..=k3 {
            for c in 1..=k3 {
                let index = vec![a + 2, b + 2, c + 2];
                let computed = three.get(&index).cloned().unwrap_or_default().t_range(i32::MIN, 0);
                let expected = TPoly::from_terms(&triple_bump_terms([a as i64, b as i64, c as i64]));
                rep.three_point_checked += 1;
                if computed != expected {
                    rep.mismatches.push(Mismatch { family: "three-point", index, computed, expected });
                }
            }
        }
    }
    Ok(rep)
}

// ---------------------------------------------------------------------------------------------
// Closed-form expansions in y, at t = 1 (all printed expansions are homogeneous in v, t, so
// v = y loses nothing).

/// Reading of the constraint curve: `w e^w = y e^y e^{-sigma x r}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Orientation {
    /// `sigma = 1`; the sign that gives `w = y - x r y/(y+1) + ...`.
    Expansion,
    /// `sigma = -1`; `y e^y = w e^w e^{-x r}` read literally.
    Curve,
}

impl Orientation {
    fn sigma(self) -> i64 {
        match self {
            Orientation::Expansion => 1,
            Orientation::Curve => -1,
        }
    }
}

pub type YSeries = TruncSeries<QRational>;

fn y() -> QRational {
    QRational::var()
}

fn rat(num: &[i64], den: &[i64]) -> QRational {
    QRational::from_int_coeffs(num, den).expect("nonzero denominator")
}

fn y_vars(xs: &[&str], order: i32) -> Arc<VarSet> {
    let mut v: Vec<VarSpec> = xs.iter().map(|x| VarSpec::power(x, order + 2)).collect();
    v.push(VarSpec::power("r", order));
    v.push(VarSpec::power("k", order));
    VarSet::new(v)
}

/// `delta = w/y - 1` at the point `yv` (a rational function, usually `y` itself).
fn solve_delta(vars: &Arc<VarSet>, x: &str, yv: &QRational, orientation: Orientation) -> Result<YSeries> {
    // log(1 + delta) + yv delta + sigma x r = 0.
    let xr = TruncSeries::monomial(vars, &[(x, 1), ("r", 1)], QRational::from_q(qi(orientation.sigma())))?;
    let inv = (&QRational::one() + yv).recip()?;
    let mut d = YSeries::zero(vars);
    loop {
        let next = xr.add(&d.log1p()?)?.sub(&d)?.scale(&(-&inv));
        if next == d {
            return Ok(d);
        }
        d = next;
    }
}

/// `w(x, y)` modulo `r^{order_r + 1}`.
pub fn solve_constraint(order_r: u32, orientation: Orientation) -> Result<YSeries> {
    let vars = y_vars(&["x"], order_r as i32);
    let d = solve_delta(&vars, "x", &y(), orientation)?;
    Ok(d.add(&YSeries::one(&vars))?.scale(&y()))
}

/// `log(w/y) + w - y + sigma x r`, which vanishes on the curve.
pub fn constraint_residual(w: &YSeries, orientation: Orientation) -> Result<YSeries> {
    let vars = w.vars().clone();
    let yinv = y().recip()?;
    let delta = w.scale(&yinv).sub(&YSeries::one(&vars))?;
    let xr = TruncSeries::monomial(&vars, &[("x", 1), ("r", 1)], QRational::from_q(qi(orientation.sigma())))?;
    Ok(delta.log1p()?.add(&delta.scale(&y()))?.add(&xr)?)
}

/// Which closed-form factor to build.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Factor {
    /// `E exp(-x v/u)`, with `k = 1/u`.
    E,
    /// `x D = -x r/(w - y)`.
    D,
    /// `((yt)^{-n} - (wt)^{-n})/r`.
    PowerDiff(u32),
    /// `sqrt(dw/dy)`.
    Sqrt,
}

/// The factor in the variables `x, r, k` over rational functions of `v` (with `t = 1`), in the
/// expansion orientation, modulo `r^3`.
pub fn build_factor(which: Factor) -> Result<YSeries> {
    let vars = y_vars(&["x"], 3);
    let d = solve_delta(&vars, "x", &y(), Orientation::Expansion)?;
    let one = YSeries::one(&vars);
    let g = d.scale(&y()); // w - y
    let out = match which {
        Factor::E => {
            // -(1/u)((w - y) + (w^2 - y^2)/2)/r = -(k/r)(w - y)(1 + y + (w - y)/2)
            let inner = g.scale_q(&qr(1, 2)).add(&YSeries::constant(&vars, &QRational::one() + &y()))?;
            let expo = g.mul(&inner)?.shift("r", -1)?.mul(&TruncSeries::var(&vars, "k")?)?.neg();
            let lead = TruncSeries::monomial(&vars, &[("x", 1), ("k", 1)], y())?;
            expo.sub(&lead)?.exp()?
        }
        Factor::D => {
            // x r / (y - w) = -(x r / (y delta)); delta is a series in x r.
            let q = d.shift("r", -1)?.shift("x", -1)?;
            q.recip()?.scale(&y().recip()?).neg()
        }
        Factor::PowerDiff(n) => {
            let yn = y().pow(-(n as i32))?;
            one.sub(&d.one_plus_pow(&qi(-(n as i64)))?)?.shift("r", -1)?.scale(&yn)
        }
        Factor::Sqrt => {
            // dw/dy = w (y + 1) / (y (w + 1)) = (1 + delta)(y + 1)/(y + 1 + y delta)
            let num = d.add(&one)?;
            let den = d.scale(&(&y() * &(&QRational::one() + &y()).recip()?)).add(&one)?;
            num.mul(&den.recip()?)?.sub(&one)?.one_plus_pow(&qr(1, 2))?
        }
    };
    truncate(&out, 2)
}

fn truncate(s: &YSeries, r_max: i32) -> Result<YSeries> {
    let vars = y_vars(&["x"], r_max);
    let mut out = YSeries::zero(&vars);
    for i in 0..=r_max {
        out = out.add(&s.coeff_of("r", i)?.embed(&vars)?.shift("r", i)?)?;
    }
    Ok(out)
}

/// Builds `sum c * x^a r^b k^c` over rational functions.
fn yseries(vars: &Arc<VarSet>, terms: &[(&[(&str, i32)], QRational)]) -> Result<YSeries> {
    let mut out = YSeries::zero(vars);
    for (m, c) in terms {
        out = out.add(&TruncSeries::monomial(vars, m, c.clone())?)?;
    }
    Ok(out)
}

/// The printed expansion of the constraint solution.
fn printed_w() -> Result<YSeries> {
    let vars = y_vars(&["x"], 3);
    yseries(&vars, &[
        (&[], y()),
        (&[("x", 1), ("r", 1)], rat(&[0, -1], &[1, 1])),
        (&[("x", 2), ("r", 2)], rat(&[0, 1], &[2, 6, 6, 2])),
        (&[("x", 3), ("r", 3)], rat(&[-1, 2], &[6, 30, 60, 60, 30, 6])),
    ])
}

fn y1_pow(n: u32) -> QPoly {
    // (y + 1)^n
    let mut p = QPoly::one();
    for _ in 0..n {
        p = &p * &QPoly::new(vec![Q::one(), Q::one()]);
    }
    p
}

fn ratp(num: QPoly, den: QPoly) -> QRational {
    QRational::new(&num, &den).expect("nonzero denominator")
}

fn poly(c: &[i64]) -> QPoly {
    QPoly::new(c.iter().map(|&x| qi(x)).collect())
}

/// The printed expansions at `t = 1` (`v = y`, `k = 1/u`), modulo `r^3`.
fn printed_factor(which: Factor) -> Result<YSeries> {
    let vars = y_vars(&["x"], 2);
    let c = |q: Q| QPoly::new(vec![q]);
    match which {
        // 1 - r x^2 v/(2u(v+1)) + r^2 (3x v^2 + 3x v + 4u)/(24u(v+1)^3)
        Factor::E => yseries(&vars, &[
            (&[], QRational::one()),
            (&[("x", 2), ("r", 1), ("k", 1)], ratp(poly(&[0, -1]), &c(qi(2)) * &y1_pow(1))),
            (&[("x", 1), ("r", 2), ("k", 1)], ratp(poly(&[0, 3, 3]), &c(qi(24)) * &y1_pow(3))),
            (&[("r", 2)], ratp(poly(&[4]), &c(qi(24)) * &y1_pow(3))),
        ]),
        // ((v+1)/v)(1 + r x/(2(v+1)^2) + r^2 x^2 (4v+1)/(12(v+1)^4))
        Factor::D => {
            let pre = ratp(poly(&[1, 1]), poly(&[0, 1]));
            yseries(&vars, &[
                (&[], pre.clone()),
                (&[("x", 1), ("r", 1)], &pre * &ratp(poly(&[1]), &c(qi(2)) * &y1_pow(2))),
                (&[("x", 2), ("r", 2)], &pre * &ratp(poly(&[1, 4]), &c(qi(12)) * &y1_pow(4))),
            ])
        }
        // n x/(v^n (v+1)) + n x^2 r ((n+1)v + n)/(v^n (v+1)^3)
        //   + n x^3 r^2 n((n+1)(n+2)v^2 + (2n^2+3n-1) v + n^2)/(6 v^n (v+1)^5)
        Factor::PowerDiff(n) => {
            let ni = n as i64;
            let vn = QPoly::monomial(Q::one(), n as usize);
            yseries(&vars, &[
                (&[("x", 1)], ratp(poly(&[ni]), &vn * &y1_pow(1))),
                (&[("x", 2), ("r", 1)], ratp(poly(&[ni * ni, ni * (ni + 1)]), &vn * &y1_pow(3))),
                (
                    &[("x", 3), ("r", 2)],
                    ratp(
                        &poly(&[ni * ni, 2 * ni * ni + 3 * ni - 1, (ni + 1) * (ni + 2)]) * &c(qi(ni * ni)),
                        &(&vn * &y1_pow(5)) * &c(qi(6)),
                    ),
                ),
            ])
        }
        // 1 - x r/(2(v+1)) - x^2 r^2 (4v - 1)/(8(v+1)^4)
        Factor::Sqrt => yseries(&vars, &[
            (&[], QRational::one()),
            (&[("x", 1), ("r", 1)], ratp(poly(&[-1]), &c(qi(2)) * &y1_pow(1))),
            (&[("x", 2), ("r", 2)], ratp(poly(&[1, -4]), &c(qi(8)) * &y1_pow(4))),
        ]),
    }
}

/// One comparison of a computed `r^i` coefficient with its printed value.
#[derive(Clone, Debug)]
pub struct PrintedCheck {
    pub name: String,
    pub r_power: i32,
    pub computed: String,
    pub printed: String,
    pub agrees: bool,
}

impl fmt::Display for PrintedCheck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.agrees { "ok" } else { "DIFFERS" };
        write!(f, "{} r^{}: {tag}", self.name, self.r_power)?;
        if !self.agrees {
            write!(f, "\n    computed: {}\n    printed:  {}", self.computed, self.printed)?;
        }
        Ok(())
    }
}

/// Renders a series over rational functions of `v`.
pub fn fmt_yseries(s: &YSeries) -> String {
    let mut terms: Vec<(Vec<i32>, String)> = s
        .terms()
        .into_iter()
        .map(|(e, c)| {
            let mono: Vec<String> = s
                .vars()
                .vars()
                .iter()
                .zip(e)
                .filter(|(_, &p)| p != 0)
                .map(|(v, &p)| if p == 1 { v.name.clone() } else { format!("{}^{p}", v.name) })
                .collect();
            let c = format!("[{}]", c.fmt_in("v"));
            (e.to_vec(), if mono.is_empty() { c } else { format!("{c}*{}", mono.join("*")) })
        })
        .collect();
    terms.sort();
    if terms.is_empty() {
        return "0".into();
    }
    terms.into_iter().map(|(_, s)| s).collect::<Vec<_>>().join(" + ")
}

fn compare(out: &mut Vec<PrintedCheck>, name: &str, computed: &YSeries, printed: &YSeries, powers: std::ops::RangeInclusive<i32>) -> Result<()> {
    for i in powers {
        let a = computed.coeff_of("r", i)?;
        let b = printed.coeff_of("r", i)?.embed(a.vars())?;
        out.push(PrintedCheck {
            name: name.to_string(),
            r_power: i,
            agrees: a == b,
            computed: fmt_yseries(&a),
            printed: fmt_yseries(&b),
        });
    }
    Ok(())
}

/// Values of `y_2` at which the two-point factor `B` is compared; the `r^2` coefficient has
/// degree at most 4 in `y_2`, so these determine it.
pub const B_SAMPLES: [(i64, i64); 8] = [(1, 1), (2, 1), (3, 1), (1, 2), (-1, 3), (5, 2), (-7, 4), (9, 1)];

/// `B = (w_2 - y_1)(y_2 - w_1)/((y_2 - y_1)(w_2 - w_1))` with `y_2` fixed to `c`.
pub fn b_factor(c: &Q) -> Result<YSeries> {
    let vars = VarSet::new(vec![
        VarSpec::power("x1", 3),
        VarSpec::power("x2", 3),
        VarSpec::power("r", 2),
    ]);
    let d1 = solve_delta(&vars, "x1", &y(), Orientation::Expansion)?;
    let y2 = QRational::from_q(c.clone());
    let d2 = solve_delta(&vars, "x2", &y2, Orientation::Expansion)?;
    let diff = &y2 - &y();
    let e1 = d1.scale(&(&y() / &diff));
    let e2 = d2.scale(&(&y2 / &diff));
    let one = YSeries::one(&vars);
    let num = one.add(&e2)?.mul(&one.sub(&e1)?)?;
    let den = one.add(&e2)?.sub(&e1)?;
    Ok(num.mul(&den.recip()?)?)
}

fn printed_b(c: &Q) -> Result<YSeries> {
    let vars = VarSet::new(vec![
        VarSpec::power("x1", 3),
        VarSpec::power("x2", 3),
        VarSpec::power("r", 2),
    ]);
    // 1 - r^2 y1 y2 x1 x2/((y1 - y2)^2 (y1 + 1)(y2 + 1))
    let cp1 = c + Q::one();
    let lin = QPoly::new(vec![-c.clone(), Q::one()]);
    let den = &(&(&lin * &lin) * &y1_pow(1)) * &QPoly::new(vec![cp1]);
    let coeff = ratp(QPoly::new(vec![Q::zero(), -c.clone()]), den);
    yseries(&vars, &[(&[], QRational::one()), (&[("x1", 1), ("x2", 1), ("r", 2)], coeff)])
}

/// Every printed expansion against the computed one: `w` (both orientations, to `r^3`), `E`,
/// `x D`, `sqrt`, the power differences for `n = 1, 2, 3`, and `B` at sample values of `y_2`.
pub fn printed_checks() -> Result<Vec<PrintedCheck>> {
    let mut out = Vec::new();
    let pw = printed_w()?;
    compare(&mut out, "w (expansion orientation)", &solve_constraint(3, Orientation::Expansion)?, &pw, 1..=3)?;
    compare(&mut out, "w (curve orientation)", &solve_constraint(3, Orientation::Curve)?, &pw, 1..=3)?;
    compare(&mut out, "E", &build_factor(Factor::E)?, &printed_factor(Factor::E)?, 0..=2)?;
    compare(&mut out, "D", &build_factor(Factor::D)?, &printed_factor(Factor::D)?, 0..=2)?;
    compare(&mut out, "sqrt(dw/dy)", &build_factor(Factor::Sqrt)?, &printed_factor(Factor::Sqrt)?, 0..=2)?;
    for n in 1..=3 {
        let f = Factor::PowerDiff(n);
        compare(&mut out, &format!("power difference n={n}"), &build_factor(f)?, &printed_factor(f)?, 0..=2)?;
    }
    for (a, b) in B_SAMPLES {
        let c = qr(a, b);
        compare(&mut out, &format!("B at y2={c}"), &b_factor(&c)?, &printed_b(&c)?, 0..=2)?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constraint_solution_satisfies_curve() {
        for o in [Orientation::Expansion, Orientation::Curve] {
            let w = solve_constraint(3, o).unwrap();
            assert!(constraint_residual(&w, o).unwrap().is_zero());
        }
    }

    #[test]
    fn w_low_orders_match_expansion() {
        let w = solve_constraint(3, Orientation::Expansion).unwrap();
        let p = printed_w().unwrap();
        for i in 0..=2 {
            assert_eq!(w.coeff_of("r", i).unwrap(), p.coeff_of("r", i).unwrap());
        }
        // The r^3 coefficient carries an extra factor y.
        let c3 = w.coeff(&[("x", 3), ("r", 3)]).unwrap();
        assert_eq!(c3, rat(&[0, -1, 2], &[6, 30, 60, 60, 30, 6]));
    }

    #[test]
    fn one_point_low() {
        let one = one_point(5).unwrap();
        assert!(one.r1.is_empty());
        for i in 0..=5 {
            assert_eq!(one.r0.get(&i).cloned().unwrap_or_default(), expected_one(i), "index {i}");
        }
        // tch_2 -> a_1
        let mut a1 = TPoly::default();
        a1.add_term(0, vec![1], &WScalar::one());
        assert_eq!(one.r0[&2], a1);
    }

    #[test]
    fn triple_one_one_one() {
        let three = three_point(3).unwrap();
        let mut want = TPoly::default();
        want.add_term(0, vec![2], &WScalar::monomial(qi(3), -2));
        assert_eq!(three[&vec![3, 3, 3]].t_range(i32::MIN, 0), want);
    }

    #[test]
    fn two_point_has_no_inverse_t() {
        let two = two_point(8).unwrap();
        for (k, p) in &two {
            assert!(p.t_range(i32::MIN, -1).is_zero(), "{k:?}");
        }
    }

    #[test]
    fn verify_small() {
        let rep = vertex_verify(4, 4, 2).unwrap();
        assert!(rep.ok(), "{:?}", rep.mismatches);
    }

    #[test]
    fn printed_expansions() {
        let checks = printed_checks().unwrap();
        let differ: Vec<(String, i32)> = checks.iter().filter(|c| !c.agrees).map(|c| (c.name.clone(), c.r_power)).collect();
        let mut want: Vec<(String, i32)> = vec![
            ("w (expansion orientation)".into(), 3),
            ("w (curve orientation)".into(), 1),
            ("w (curve orientation)".into(), 3),
            ("E".into(), 2),
            ("sqrt(dw/dy)".into(), 1),
        ];
        for n in 1..=3 {
            for i in 0..=2 {
                want.push((format!("power difference n={n}"), i));
            }
        }
        assert_eq!(differ, want);
        assert!(checks.iter().filter(|c| c.name == "D" || c.name.starts_with("B ")).all(|c| c.agrees));
    }
}
