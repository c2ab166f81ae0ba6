use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::Zero;
use proptest::prelude::*;

use super::*;
use crate::error::MathError;

fn rat(n: &[i64], d: &[i64]) -> QRational {
    QRational::from_int_coeffs(n, d).unwrap()
}

fn xy(high: i32) -> Arc<VarSet> {
    VarSet::new(vec![VarSpec::power("x", high), VarSpec::power("y", high)])
}

#[test]
fn integer_helpers() {
    assert_eq!(factorial(0), BigInt::from(1));
    assert_eq!(factorial(10), BigInt::from(3628800));
    assert_eq!(factorial_q(-1), None);
    assert_eq!(binomial(7, 3), BigInt::from(35));
    assert_eq!(binomial(3, 5), BigInt::zero());
    assert_eq!(harmonic(4), qr(25, 12));
    assert_eq!(parse_q(" -6/4 "), Some(qr(-3, 2)));
    assert_eq!(parse_q("1/0"), None);
    assert_eq!(fmt_q(&qr(10, -4)), "-5/2");
}

#[test]
fn symmetric_functions() {
    let v: Vec<Q> = [1, 2, 3].iter().map(|&x| qi(x)).collect();
    assert_eq!(elementary_symmetric(2, &v).unwrap(), qi(11));
    assert_eq!(elementary_symmetric(0, &v).unwrap(), qi(1));
    assert!(matches!(elementary_symmetric(4, &v), Err(MathError::IndexOutOfRange { .. })));
    // [x]^k_j = e_{k+1-j}(x, ..., x+k)
    assert_eq!(bracket_ej(1, 2, 0), qi(6));
    assert_eq!(bracket_ej(1, 2, 1), qi(11));
    assert_eq!(bracket_ej(0, -1, 0), qi(1));
    assert_eq!(bracket_ej(1, 2, 4), qi(0));
}

#[test]
fn rational_functions_are_canonical() {
    // q(q-1) / (q(q+1)) and (1-q)/(-1-q) both reduce to (q-1)/(q+1)
    let a = rat(&[0, -1, 1], &[0, 1, 1]);
    let b = rat(&[1, -1], &[-1, -1]);
    let c = rat(&[-2, 2], &[2, 2]);
    assert_eq!(a, b);
    assert_eq!(a, c);
    assert_eq!(a.numer_coeffs(), &[BigInt::from(-1), BigInt::from(1)]);
    assert_eq!(a.fmt_in("q"), "(q - 1)/(q + 1)");
    assert!(QRational::from_int_coeffs(&[1], &[0]).is_err());
    assert!(QRational::zero().recip().is_err());
    // q/(1+q)^2 is invariant under q -> 1/q
    let f = rat(&[0, 1], &[1, 2, 1]);
    assert_eq!(f.invert_variable(), f);
    assert_eq!(f.eval(&qi(-1)), None);
    assert_eq!(f.eval(&qi(1)), Some(qr(1, 4)));
    assert_eq!(rat(&[1], &[1]).mul_monomial(&qi(3), -2), rat(&[3], &[0, 0, 1]));
}

#[test]
fn w_scalars() {
    assert_eq!(WScalar::u_pow_even(2), WScalar::monomial(qi(-1), 2));
    assert_eq!(WScalar::u_pow_even(-4), WScalar::w_pow(-4));
    let two = &WScalar::w_pow(1) + &WScalar::one();
    assert_eq!(two.inverse(), None);
    assert_eq!(WScalar::monomial(qi(2), 3).inverse(), Some(WScalar::monomial(qr(1, 2), -3)));
    assert_eq!(wscalar_arith(&two, &WScalar::from_int(2), WOp::Pow), two.pow(2));
    assert_eq!(wscalar_arith(&two, &WScalar::w_pow(1), WOp::Pow), None);
}

#[test]
fn series_truncation_and_residues() {
    let vars = VarSet::new(vec![VarSpec::power("x", 3), VarSpec::laurent("v", -2, 2)]);
    let x = TruncSeries::<Q>::var(&vars, "x").unwrap();
    assert!(x.pow(4).unwrap().is_zero());
    let vinv = TruncSeries::<Q>::monomial(&vars, &[("v", -1)], qi(5)).unwrap();
    assert_eq!(vinv.residue("v").unwrap(), TruncSeries::from_q(&vars, qi(5 * RESIDUE_SIGN)));
    assert!(matches!(x.residue("x"), Err(MathError::NotLaurent(_))));
    assert!(matches!(
        TruncSeries::<Q>::monomial(&vars, &[("v", -3)], qi(1)),
        Err(MathError::WindowUnderflow { .. })
    ));
    // a dropped term never underflows
    assert!(TruncSeries::<Q>::monomial(&vars, &[("x", 4), ("v", -3)], qi(1)).unwrap().is_zero());
    let v = TruncSeries::<Q>::var(&vars, "v").unwrap();
    assert!(matches!(v.exp(), Err(MathError::NotNilpotent)));
    // 1/(1-x) = 1 + x + x^2 + x^3
    let one = TruncSeries::<Q>::one(&vars);
    let geo = one.sub(&x).unwrap().recip().unwrap();
    let want = TruncSeries::from_terms(&vars, (0..4).map(|i| (vec![i, 0], qi(1)))).unwrap();
    assert_eq!(geo, want);
}

#[test]
fn weight_caps() {
    let vars = VarSet::with_weight_cap(vec![VarSpec::power("a", 9), VarSpec::power("b", 9)], &[("a", 1), ("b", 2)], 4)
        .unwrap();
    let a = TruncSeries::<Q>::var(&vars, "a").unwrap();
    let b = TruncSeries::<Q>::var(&vars, "b").unwrap();
    assert!(!a.pow(4).unwrap().is_zero());
    assert!(a.pow(3).unwrap().mul(&b).unwrap().is_zero());
    assert!(b.pow(3).unwrap().is_zero());
    assert!(VarSet::with_weight_cap(vec![VarSpec::laurent("v", -1, 1)], &[("v", 1)], 2).is_err());
}

fn small_q() -> impl Strategy<Value = Q> {
    (-12i64..=12, 1i64..=6).prop_map(|(n, d)| qr(n, d))
}

fn qrational() -> impl Strategy<Value = QRational> {
    (prop::collection::vec(-6i64..=6, 1..5), prop::collection::vec(-6i64..=6, 1..4))
        .prop_filter_map("nonzero denominator", |(n, d)| QRational::from_int_coeffs(&n, &d).ok())
}

fn series(high: i32) -> impl Strategy<Value = TruncSeries<Q>> {
    prop::collection::vec(((0..=high, 0..=high), small_q()), 0..6).prop_map(move |ts| {
        let vars = xy(high);
        TruncSeries::from_terms(&vars, ts.into_iter().map(|((a, b), c)| (vec![a, b], c))).unwrap()
    })
}

fn nilpotent(high: i32) -> impl Strategy<Value = TruncSeries<Q>> {
    series(high).prop_map(|s| s.sub(&TruncSeries::constant(s.vars(), s.constant_term())).unwrap())
}

proptest! {
    #[test]
    fn q_text_round_trip(q in small_q()) {
        prop_assert_eq!(parse_q(&fmt_q(&q)), Some(q));
    }

    #[test]
    fn rational_field_identities(a in qrational(), b in qrational(), c in qrational()) {
        prop_assert_eq!(&(&a + &b) - &b, a.clone());
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        if !b.is_zero() {
            prop_assert_eq!(a.checked_div(&b).unwrap(), &a * &b.recip().unwrap());
            prop_assert_eq!(&(&a * &b) / &b, a.clone());
        }
    }

    #[test]
    fn rational_evaluation_is_a_homomorphism(a in qrational(), b in qrational(), x in small_q()) {
        if let (Some(fa), Some(fb)) = (a.eval(&x), b.eval(&x)) {
            prop_assert_eq!((&a * &b).eval(&x), Some(&fa * &fb));
            prop_assert_eq!((&a + &b).eval(&x), Some(&fa + &fb));
        }
    }

    #[test]
    fn inverting_the_variable_is_an_involution(a in qrational()) {
        prop_assert_eq!(a.invert_variable().invert_variable(), a);
    }

    #[test]
    fn elementary_symmetric_matches_the_product(v in prop::collection::vec(small_q(), 0..6)) {
        // prod (1 + x_i t) = sum e_m t^m
        let p = v.iter().fold(QPoly::one(), |acc, x| &acc * &QPoly::new(vec![qi(1), x.clone()]));
        for m in 0..=v.len() {
            prop_assert_eq!(elementary_symmetric(m, &v).unwrap(), p.coeff(m));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn series_ring_identities(a in series(4), b in series(4), c in series(4)) {
        prop_assert_eq!(a.mul(&b).unwrap(), b.mul(&a).unwrap());
        prop_assert_eq!(a.mul(&b).unwrap().mul(&c).unwrap(), a.mul(&b.mul(&c).unwrap()).unwrap());
        prop_assert_eq!(a.mul(&b.add(&c).unwrap()).unwrap(), a.mul(&b).unwrap().add(&a.mul(&c).unwrap()).unwrap());
    }

    #[test]
    fn exp_and_log(a in nilpotent(4), b in nilpotent(4)) {
        let sum = a.add(&b).unwrap();
        prop_assert_eq!(sum.exp().unwrap(), a.exp().unwrap().mul(&b.exp().unwrap()).unwrap());
        let one = TruncSeries::one(a.vars());
        prop_assert_eq!(a.log1p().unwrap().exp().unwrap(), one.add(&a).unwrap());
        // (1 + a)^(1/2) squared is 1 + a
        let root = a.one_plus_pow(&qr(1, 2)).unwrap();
        prop_assert_eq!(root.mul(&root).unwrap(), one.add(&a).unwrap());
    }

    #[test]
    fn reciprocal(a in nilpotent(4), c in small_q()) {
        prop_assume!(!c.is_zero());
        let s = a.add(&TruncSeries::from_q(a.vars(), c)).unwrap();
        prop_assert_eq!(s.mul(&s.recip().unwrap()).unwrap(), TruncSeries::one(a.vars()));
    }
}
