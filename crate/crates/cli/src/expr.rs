//! Expression language for descendent elements.
//!
//! ```text
//! expr   := ['+'|'-'] term (('+'|'-') term)*
//! term   := factor ('*' factor)*
//! factor := atom ('^' int)*
//! atom   := gen | rational | 'w' | '(' expr ')'
//! gen    := ('ch'|'tch'|'tau'|'a') '(' int ',' class ')' | 'fch1' | 'fch0'
//! ```
//!
//! `ch`/`tch` build PT elements, `tau`/`a` and `w` build GW elements. Class labels are those of
//! the ring, with `one` accepted for the unit.

use std::fmt;
use std::sync::Arc;

use virasoro_core::cohomology::CohRing;
use virasoro_core::exactmath::{parse_q, qi, WScalar, Q};
use virasoro_core::gw_algebra::{a_to_tau, AGen, GwElement, HeisenbergExpr, Tau};
use virasoro_core::pt_algebra::{GenBasis, GenKind, PtElement, PtGen};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseError {
    pub pos: usize,
    pub msg: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "at column {}: {}", self.pos + 1, self.msg)
    }
}

impl std::error::Error for ParseError {}

fn err<T>(pos: usize, msg: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError { pos, msg: msg.into() })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GenName {
    Ch,
    Tch,
    Tau,
    A,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(Q),
    W,
    Gen { name: GenName, index: i64, class: usize, pos: usize },
    Fch1,
    Fch0,
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, i64),
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Int(String),
    Ident(String),
    Sym(char),
}

fn lex(s: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let cs: Vec<char> = s.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < cs.len() {
        let c = cs[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            let st = i;
            while i < cs.len() && cs[i].is_ascii_digit() {
                i += 1;
            }
            out.push((Tok::Int(cs[st..i].iter().collect()), st));
        } else if c.is_alphabetic() || c == '_' {
            let st = i;
            while i < cs.len() && (cs[i].is_alphanumeric() || cs[i] == '_') {
                i += 1;
            }
            out.push((Tok::Ident(cs[st..i].iter().collect()), st));
        } else if "+-*/^(),".contains(c) {
            out.push((Tok::Sym(c), i));
            i += 1;
        } else {
            return err(i, format!("unexpected character `{c}`"));
        }
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    i: usize,
    end: usize,
    ring: &'a CohRing,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.i).map(|t| &t.0)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.i).map_or(self.end, |t| t.1)
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Sym(c)) {
            self.i += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<(), ParseError> {
        if self.eat(c) {
            Ok(())
        } else {
            err(self.pos(), format!("expected `{c}`"))
        }
    }

    fn int(&mut self) -> Result<i64, ParseError> {
        let neg = self.eat('-');
        let pos = self.pos();
        match self.peek().cloned() {
            Some(Tok::Int(s)) => {
                self.i += 1;
                let v: i64 = s.parse().or_else(|_| err(pos, "integer too large"))?;
                Ok(if neg { -v } else { v })
            }
            _ => err(pos, "expected an integer"),
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = if self.eat('-') {
            Expr::Neg(Box::new(self.term()?))
        } else {
            self.eat('+');
            self.term()?
        };
        loop {
            if self.eat('+') {
                lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat('-') {
                lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.factor()?;
        while self.eat('*') {
            lhs = Expr::Mul(Box::new(lhs), Box::new(self.factor()?));
        }
        Ok(lhs)
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        let mut base = self.atom()?;
        while self.eat('^') {
            let pos = self.pos();
            let e = self.int()?;
            if e < 0 && base != Expr::W {
                return err(pos, "negative powers are only allowed for w");
            }
            base = Expr::Pow(Box::new(base), e);
        }
        Ok(base)
    }

    fn class(&mut self) -> Result<usize, ParseError> {
        let pos = self.pos();
        let label = match self.peek().cloned() {
            Some(Tok::Ident(s)) | Some(Tok::Int(s)) => s,
            _ => return err(pos, "expected a class label"),
        };
        self.i += 1;
        let label = if label == "one" { "1".to_string() } else { label };
        self.ring.index_of(&label).or_else(|_| err(pos, format!("unknown class label `{label}`")))
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let pos = self.pos();
        match self.peek().cloned() {
            Some(Tok::Sym('(')) => {
                self.i += 1;
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Some(Tok::Int(n)) => {
                self.i += 1;
                let mut text = n;
                if self.eat('/') {
                    let dpos = self.pos();
                    match self.peek().cloned() {
                        Some(Tok::Int(d)) => {
                            self.i += 1;
                            text = format!("{text}/{d}");
                        }
                        _ => return err(dpos, "expected a denominator"),
                    }
                }
                match parse_q(&text) {
                    Some(q) => Ok(Expr::Num(q)),
                    None => err(pos, "zero denominator"),
                }
            }
            Some(Tok::Ident(id)) => {
                self.i += 1;
                let name = match id.as_str() {
                    "w" => return Ok(Expr::W),
                    "fch1" => return Ok(Expr::Fch1),
                    "fch0" => return Ok(Expr::Fch0),
                    "ch" => GenName::Ch,
                    "tch" => GenName::Tch,
                    "tau" => GenName::Tau,
                    "a" => GenName::A,
                    other => return err(pos, format!("unknown generator `{other}`")),
                };
                self.expect('(')?;
                let ipos = self.pos();
                let index = self.int()?;
                let min = match name {
                    GenName::Ch | GenName::Tch => 0,
                    GenName::Tau => -2,
                    GenName::A => 1,
                };
                if index < min {
                    return err(ipos, format!("index {index} is below the minimum {min}"));
                }
                self.expect(',')?;
                let class = self.class()?;
                self.expect(')')?;
                Ok(Expr::Gen { name, index, class, pos })
            }
            _ => err(pos, "expected a generator, number or `(`"),
        }
    }
}

pub fn parse_expression(text: &str, ring: &CohRing) -> Result<Expr, ParseError> {
    let toks = lex(text)?;
    let mut p = Parser { toks, i: 0, end: text.chars().count(), ring };
    let e = p.expr()?;
    if p.i != p.toks.len() {
        return err(p.pos(), "unexpected trailing input");
    }
    Ok(e)
}

/// Evaluation failure: wrong generator family or an algebra error.
#[derive(Debug)]
pub enum EvalError {
    Family { pos: usize, msg: String },
    Core(virasoro_core::Error),
}

impl fmt::Display for EvalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EvalError::Family { pos, msg } => write!(f, "at column {}: {msg}", pos + 1),
            EvalError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for EvalError {}

impl From<virasoro_core::Error> for EvalError {
    fn from(e: virasoro_core::Error) -> Self {
        EvalError::Core(e)
    }
}

impl Expr {
    /// Evaluate as a PT element in the `ch` basis.
    pub fn to_pt(&self, ring: &Arc<CohRing>) -> Result<PtElement, EvalError> {
        Ok(match self {
            Expr::Num(q) => PtElement::constant(ring, q.clone()),
            Expr::W => return Err(EvalError::Family { pos: 0, msg: "`w` is not allowed in a PT expression".into() }),
            Expr::Gen { name, index, class, pos } => {
                let kind = match name {
                    GenName::Ch => GenKind::Ch,
                    GenName::Tch => GenKind::Tch,
                    _ => {
                        return Err(EvalError::Family { pos: *pos, msg: "GW generator in a PT expression".into() })
                    }
                };
                let g = ring.class(ring.label(*class))?;
                PtElement::generator(ring, kind, *index, &g)?
            }
            Expr::Fch1 => PtElement::formal(ring, PtGen::Fch1),
            Expr::Fch0 => PtElement::formal(ring, PtGen::Fch0),
            Expr::Neg(a) => a.to_pt(ring)?.scale(&qi(-1)),
            Expr::Add(a, b) => a.to_pt(ring)?.add(&b.to_pt(ring)?)?,
            Expr::Sub(a, b) => a.to_pt(ring)?.sub(&b.to_pt(ring)?)?,
            Expr::Mul(a, b) => a.to_pt(ring)?.mul(&b.to_pt(ring)?)?,
            Expr::Pow(a, e) => {
                let base = a.to_pt(ring)?;
                let mut acc = PtElement::one(ring);
                for _ in 0..*e {
                    acc = acc.mul(&base)?;
                }
                acc
            }
        }
        .to_basis(GenBasis::Ch))
    }

    /// Evaluate as a GW element in the `tau` basis (`a_n` converted with the shifted dictionary).
    pub fn to_gw(&self, ring: &Arc<CohRing>) -> Result<GwElement, EvalError> {
        Ok(match self {
            Expr::Num(q) => GwElement::constant(ring, WScalar::from_q(q.clone())),
            Expr::W => GwElement::constant(ring, WScalar::w_pow(1)),
            Expr::Gen { name, index, class, pos } => match name {
                GenName::Tau => GwElement::gen(ring, Tau(*index as i32, *class)),
                GenName::A => a_to_tau(&HeisenbergExpr::gen(ring, AGen::A(*index as u32, *class))),
                _ => return Err(EvalError::Family { pos: *pos, msg: "PT generator in a GW expression".into() }),
            },
            Expr::Fch1 | Expr::Fch0 => {
                return Err(EvalError::Family { pos: 0, msg: "formal PT symbol in a GW expression".into() })
            }
            Expr::Neg(a) => a.to_gw(ring)?.scale_q(&qi(-1)),
            Expr::Add(a, b) => a.to_gw(ring)?.add(&b.to_gw(ring)?)?,
            Expr::Sub(a, b) => a.to_gw(ring)?.sub(&b.to_gw(ring)?)?,
            Expr::Mul(a, b) => a.to_gw(ring)?.mul(&b.to_gw(ring)?)?,
            Expr::Pow(a, e) => {
                if **a == Expr::W {
                    return Ok(GwElement::constant(ring, WScalar::w_pow(*e as i32)));
                }
                let base = a.to_gw(ring)?;
                let mut acc = GwElement::one(ring);
                for _ in 0..*e {
                    acc = acc.mul(&base)?;
                }
                acc
            }
        })
    }

    /// True if any generator is `tau` or `a`, or `w` appears.
    pub fn is_gw(&self) -> bool {
        match self {
            Expr::W => true,
            Expr::Gen { name, .. } => matches!(name, GenName::Tau | GenName::A),
            Expr::Num(_) | Expr::Fch1 | Expr::Fch0 => false,
            Expr::Neg(a) | Expr::Pow(a, _) => a.is_gw(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) => a.is_gw() || b.is_gw(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use virasoro_core::exactmath::qr;
    use virasoro_core::pt_algebra::PtMonomial;

    fn p3() -> Arc<CohRing> {
        CohRing::p3()
    }

    #[test]
    fn product_monomial() {
        let r = p3();
        let d = parse_expression("ch(3,H)*ch(2,L)", &r).unwrap().to_pt(&r).unwrap();
        assert_eq!(d.terms().len(), 1);
        assert_eq!(d.to_string(), "ch(2,L)*ch(3,H)");
    }

    #[test]
    fn two_terms() {
        let r = p3();
        let d = parse_expression("tch(5,L) + (1/4)*ch(2,L)", &r).unwrap().to_pt(&r).unwrap();
        assert_eq!(d.terms().len(), 2);
        let l = r.index_of("L").unwrap();
        assert_eq!(d.coeff(&PtMonomial::new(vec![PtGen::Ch(2, l)])), qr(1, 4));
    }

    #[test]
    fn errors_carry_positions() {
        let r = p3();
        let e = parse_expression("ch(-1,H)", &r).unwrap_err();
        assert_eq!(e.pos, 3);
        let e = parse_expression("ch(2,Q)", &r).unwrap_err();
        assert!(e.msg.contains("unknown class"));
        assert!(parse_expression("ch(2,H) ch(3,H)", &r).is_err());
        assert!(parse_expression("1/0", &r).is_err());
        assert!(parse_expression("ch(2,H)^-1", &r).is_err());
    }

    #[test]
    fn gw_side() {
        let r = p3();
        let e = parse_expression("w^-1*tau(0,p) + tau(-2,p)", &r).unwrap();
        assert!(e.is_gw());
        let g = e.to_gw(&r).unwrap();
        assert_eq!(g.to_string(), "tau(-2,p) + (w^-1)*tau(0,p)");
        assert!(parse_expression("ch(2,H)*tau(0,p)", &r).unwrap().to_pt(&r).is_err());
    }

    #[test]
    fn unit_label() {
        let r = p3();
        let a = parse_expression("ch(4,one)", &r).unwrap().to_pt(&r).unwrap();
        let b = parse_expression("ch(4,1)", &r).unwrap().to_pt(&r).unwrap();
        assert_eq!(a, b);
    }

    fn gen_strategy() -> impl Strategy<Value = String> {
        (prop::sample::select(vec!["ch", "tch"]), 0..7u32, prop::sample::select(vec!["1", "H", "L", "p"]))
            .prop_map(|(n, k, c)| format!("{n}({k},{c})"))
    }

    fn elem_strategy() -> impl Strategy<Value = String> {
        let mono = (-5i64..6, 1i64..4, prop::collection::vec(gen_strategy(), 0..3)).prop_map(|(a, b, g)| {
            let mut s = format!("({a}/{b})");
            for x in g {
                s.push('*');
                s.push_str(&x);
            }
            s
        });
        prop::collection::vec(mono, 1..4).prop_map(|v| v.join(" + "))
    }

    proptest! {
        #[test]
        fn print_parse_round_trip(src in elem_strategy()) {
            let r = p3();
            let d = parse_expression(&src, &r).unwrap().to_pt(&r).unwrap();
            let printed = d.to_string();
            let back = parse_expression(&printed, &r).unwrap().to_pt(&r).unwrap();
            prop_assert_eq!(back, d);
        }

        #[test]
        fn tch_round_trip(src in elem_strategy()) {
            let r = p3();
            let d = parse_expression(&src, &r).unwrap().to_pt(&r).unwrap();
            let printed = d.to_basis(GenBasis::Tch).to_string();
            let back = parse_expression(&printed, &r).unwrap().to_pt(&r).unwrap();
            prop_assert_eq!(back, d);
        }
    }
}
