//! Map and coefficient literals: `z^2 + 1/4`, `(z^2+1)^2/(4*z*(z^2-1))`, `1/2 - 3*i`.
//!
//! A decimal literal anywhere switches the whole expression to floating point.

use rug::{Integer, Rational};
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::numkernel::{Cx, GaussRat, Poly, Scalar};
use crate::qd::{Qd, RationalQD};
use crate::ratmap::{DynMap, Pt, RationalMap, SpherePoint};

/// Largest exponent accepted after `^`.
const MAX_EXPONENT: u32 = 4096;

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Int(String),
    Dec(String),
    Z,
    I,
    Op(char),
    LParen,
    RParen,
}

fn syntax(position: usize, message: impl Into<String>) -> Error {
    Error::SyntaxError {
        position,
        message: message.into(),
    }
}

fn tokenize(s: &str) -> Result<Vec<(Tok, usize)>> {
    let b = s.as_bytes();
    let mut out = Vec::new();
    let mut k = 0;
    while k < b.len() {
        let c = b[k];
        if c.is_ascii_whitespace() {
            k += 1;
            continue;
        }
        let start = k;
        if c.is_ascii_digit() || (c == b'.' && k + 1 < b.len() && b[k + 1].is_ascii_digit()) {
            let mut dec = false;
            while k < b.len() && b[k].is_ascii_digit() {
                k += 1;
            }
            if k < b.len() && b[k] == b'.' {
                dec = true;
                k += 1;
                while k < b.len() && b[k].is_ascii_digit() {
                    k += 1;
                }
            }
            // exponent part, e.g. 1.5e-40
            if k < b.len() && (b[k] == b'e' || b[k] == b'E') {
                let mut j = k + 1;
                if j < b.len() && (b[j] == b'+' || b[j] == b'-') {
                    j += 1;
                }
                if j < b.len() && b[j].is_ascii_digit() {
                    while j < b.len() && b[j].is_ascii_digit() {
                        j += 1;
                    }
                    k = j;
                    dec = true;
                }
            }
            let text = s[start..k].to_string();
            out.push((if dec { Tok::Dec(text) } else { Tok::Int(text) }, start));
            continue;
        }
        let tok = match c {
            b'z' | b'Z' => Tok::Z,
            b'i' | b'I' => Tok::I,
            b'+' | b'-' | b'*' | b'/' | b'^' => Tok::Op(c as char),
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            _ => {
                let ch = s[k..].chars().next().unwrap();
                return Err(syntax(k, format!("unexpected character '{ch}'")));
            }
        };
        out.push((tok, start));
        k += 1;
    }
    Ok(out)
}

#[derive(Clone, Debug)]
enum Ast {
    Z,
    I,
    Int(String),
    Dec(String),
    Neg(Box<Ast>),
    Bin(char, Box<Ast>, Box<Ast>),
    Pow(Box<Ast>, Box<Ast>, usize),
}

impl Ast {
    fn any(&self, pred: &dyn Fn(&Ast) -> bool) -> bool {
        if pred(self) {
            return true;
        }
        match self {
            Ast::Neg(a) => a.any(pred),
            Ast::Bin(_, a, b) | Ast::Pow(a, b, _) => a.any(pred) || b.any(pred),
            _ => false,
        }
    }
    fn has_decimal(&self) -> bool {
        self.any(&|a| matches!(a, Ast::Dec(_)))
    }
    fn has_z(&self) -> bool {
        self.any(&|a| matches!(a, Ast::Z))
    }
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.0)
    }
    fn here(&self) -> usize {
        self.toks.get(self.pos).map(|t| t.1).unwrap_or(self.end)
    }
    fn expr(&mut self) -> Result<Ast> {
        let mut lhs = self.term()?;
        while let Some(Tok::Op(c @ ('+' | '-'))) = self.peek().cloned() {
            self.pos += 1;
            let rhs = self.term()?;
            lhs = Ast::Bin(c, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }
    fn term(&mut self) -> Result<Ast> {
        let mut lhs = self.unary()?;
        while let Some(Tok::Op(c @ ('*' | '/'))) = self.peek().cloned() {
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = Ast::Bin(c, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }
    fn unary(&mut self) -> Result<Ast> {
        match self.peek() {
            Some(Tok::Op('-')) => {
                self.pos += 1;
                Ok(Ast::Neg(Box::new(self.unary()?)))
            }
            Some(Tok::Op('+')) => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }
    fn power(&mut self) -> Result<Ast> {
        let base = self.atom()?;
        if let Some(Tok::Op('^')) = self.peek() {
            self.pos += 1;
            let at = self.here();
            let exp = self.unary()?;
            return Ok(Ast::Pow(Box::new(base), Box::new(exp), at));
        }
        Ok(base)
    }
    fn atom(&mut self) -> Result<Ast> {
        let at = self.here();
        let tok = self.peek().cloned().ok_or_else(|| syntax(at, "unexpected end of input"))?;
        self.pos += 1;
        match tok {
            Tok::Z => Ok(Ast::Z),
            Tok::I => Ok(Ast::I),
            Tok::Int(s) => Ok(Ast::Int(s)),
            Tok::Dec(s) => Ok(Ast::Dec(s)),
            Tok::LParen => {
                let e = self.expr()?;
                match self.peek() {
                    Some(Tok::RParen) => {
                        self.pos += 1;
                        Ok(e)
                    }
                    _ => Err(syntax(self.here(), "expected ')'")),
                }
            }
            Tok::RParen => Err(syntax(at, "unexpected ')'")),
            Tok::Op(c) => Err(syntax(at, format!("unexpected operator '{c}'"))),
        }
    }
}

fn parse_ast(text: &str) -> Result<Ast> {
    let toks = tokenize(text)?;
    let mut p = Parser {
        toks,
        pos: 0,
        end: text.len(),
    };
    if p.toks.is_empty() {
        return Err(syntax(0, "empty expression"));
    }
    let ast = p.expr()?;
    if p.pos < p.toks.len() {
        return Err(syntax(p.here(), "unexpected trailing input"));
    }
    Ok(ast)
}

type Frac<S> = (Poly<S>, Poly<S>);

fn exact_literal(s: &str) -> GaussRat {
    let n = Integer::from_str_radix(s, 10).expect("tokenizer yields digits");
    GaussRat::new(Rational::from(n), Rational::new())
}

fn eval<S: Scalar>(a: &Ast, ctx: S::Ctx, lit: &dyn Fn(&str) -> Result<S>) -> Result<Frac<S>> {
    let one = Poly::one(ctx);
    Ok(match a {
        Ast::Z => (Poly::x(ctx), one),
        Ast::I => (Poly::constant(S::from_gauss(&GaussRat::i(), ctx)), one),
        Ast::Int(s) | Ast::Dec(s) => (Poly::constant(lit(s)?), one),
        Ast::Neg(x) => {
            let (n, d) = eval(x, ctx, lit)?;
            (n.neg(), d)
        }
        Ast::Bin(op, x, y) => {
            let (a, b) = eval(x, ctx, lit)?;
            let (c, d) = eval(y, ctx, lit)?;
            match op {
                '+' | '-' => {
                    let c = if *op == '-' { c.neg() } else { c };
                    if b == d {
                        (a.add(&c), b)
                    } else {
                        (a.mul(&d).add(&c.mul(&b)), b.mul(&d))
                    }
                }
                '*' => (a.mul(&c), b.mul(&d)),
                _ => {
                    if c.is_zero() {
                        return Err(Error::InvalidInput("division by zero".into()));
                    }
                    (a.mul(&d), b.mul(&c))
                }
            }
        }
        Ast::Pow(x, e, at) => {
            let k = exponent(e, *at)?;
            let (n, d) = eval(x, ctx, lit)?;
            (n.pow(k), d.pow(k))
        }
    })
}

fn exponent(e: &Ast, at: usize) -> Result<u32> {
    let bad = |what: &str| Error::NotRational(format!("exponent at position {at} {what}"));
    if e.has_z() {
        return Err(bad("depends on z"));
    }
    if e.has_decimal() {
        return Err(bad("must be an integer literal"));
    }
    let (n, d) = eval::<GaussRat>(e, (), &|s| Ok(exact_literal(s)))?;
    let v = n.coeff(0) / d.coeff(0);
    if !v.is_real() || *v.re.denom() != 1 || v.re < 0 {
        return Err(bad("must be a non-negative integer"));
    }
    match v.re.numer().to_u32() {
        Some(k) if k <= MAX_EXPONENT => Ok(k),
        _ => Err(Error::InvalidInput(format!("exponent at position {at} exceeds {MAX_EXPONENT}"))),
    }
}

fn float_literal(s: &str, prec: u32) -> Result<Cx> {
    Cx::parse_real(s, prec).ok_or_else(|| Error::InvalidInput(format!("bad numeric literal '{s}'")))
}

fn build<S: Scalar>(num: Poly<S>, den: Poly<S>) -> Result<RationalMap<S>> {
    if den.is_zero() {
        return Err(Error::InvalidInput("division by zero".into()));
    }
    if num.is_zero() {
        return Err(Error::DegreeTooSmall(0));
    }
    let f = RationalMap::new_reduced(num, den)?;
    if f.degree() < 1 {
        return Err(Error::DegreeTooSmall(f.degree()));
    }
    Ok(f)
}

/// Parse a rational map of degree at least one. Exact mode unless a decimal literal occurs.
pub fn parse_map(text: &str, prec: u32) -> Result<DynMap> {
    let ast = parse_ast(text)?;
    if ast.has_decimal() {
        let (n, d) = eval::<Cx>(&ast, prec, &|s| float_literal(s, prec))?;
        Ok(DynMap::from_approx(build(n, d)?))
    } else {
        let (n, d) = eval::<GaussRat>(&ast, (), &|s| Ok(exact_literal(s)))?;
        Ok(DynMap::from_exact(build(n, d)?, prec))
    }
}

/// A constant such as `1/2 - 3*i` or `0.25`.
#[derive(Clone, Debug, PartialEq)]
pub enum Constant {
    Exact(GaussRat),
    Float(Cx),
}

fn constant_value<S: Scalar>(f: Frac<S>) -> Result<S> {
    let (n, d) = f;
    if d.is_zero() {
        return Err(Error::InvalidInput("division by zero".into()));
    }
    Ok(n.coeff(0) / d.coeff(0))
}

pub fn parse_constant(text: &str, prec: u32) -> Result<Constant> {
    let ast = parse_ast(text)?;
    if ast.has_z() {
        return Err(Error::InvalidInput(format!("'{text}' is not a constant")));
    }
    if ast.has_decimal() {
        Ok(Constant::Float(constant_value(eval::<Cx>(&ast, prec, &|s| float_literal(s, prec))?)?))
    } else {
        Ok(Constant::Exact(constant_value(eval::<GaussRat>(&ast, (), &|s| Ok(exact_literal(s)))?)?))
    }
}

/// A point of the sphere: a constant, or `inf`.
pub fn parse_point(text: &str, prec: u32) -> Result<Pt> {
    let t = text.trim();
    if matches!(t, "inf" | "infinity" | "∞") {
        return Ok(Pt::from_exact(SpherePoint::infinity(()), prec));
    }
    Ok(match parse_constant(t, prec)? {
        Constant::Exact(g) => Pt::from_exact(SpherePoint::finite(g), prec),
        Constant::Float(z) => Pt::finite_cx(z),
    })
}

/// Comma-separated list of points.
pub fn parse_points(text: &str, prec: u32) -> Result<Vec<Pt>> {
    text.split(',').map(|s| parse_point(s, prec)).collect()
}

#[derive(Deserialize)]
struct QdJson {
    num: Vec<serde_json::Value>,
    den: Vec<serde_json::Value>,
}

fn coeff_text(v: &serde_json::Value) -> Result<String> {
    match v {
        serde_json::Value::String(s) => Ok(s.clone()),
        serde_json::Value::Number(n) => Ok(n.to_string()),
        _ => Err(Error::InvalidInput(format!("coefficient {v} is not a string or number"))),
    }
}

/// Quadratic differential `(num/den) dz^2` from `{"num": [...], "den": [...]}`,
/// coefficients in ascending order.
pub fn parse_qd(json: &str, prec: u32) -> Result<Qd> {
    let raw: QdJson = serde_json::from_str(json).map_err(|e| Error::InvalidInput(format!("quadratic differential: {e}")))?;
    let mut num = Vec::new();
    let mut den = Vec::new();
    for v in &raw.num {
        num.push(parse_constant(&coeff_text(v)?, prec)?);
    }
    for v in &raw.den {
        den.push(parse_constant(&coeff_text(v)?, prec)?);
    }
    let exact: Option<(Vec<GaussRat>, Vec<GaussRat>)> = {
        let g = |c: &Constant| match c {
            Constant::Exact(g) => Some(g.clone()),
            Constant::Float(_) => None,
        };
        num.iter()
            .map(g)
            .collect::<Option<Vec<_>>>()
            .zip(den.iter().map(g).collect::<Option<Vec<_>>>())
    };
    if let Some((n, d)) = exact {
        let (n, d) = (Poly::new(n, ()), Poly::new(d, ()));
        if d.is_zero() {
            return Err(Error::InvalidInput("denominator is zero".into()));
        }
        let g = n.gcd(&d);
        let q = if !n.is_zero() && g.degree().unwrap_or(0) > 0 {
            RationalQD::new(n.divrem(&g)?.0, d.divrem(&g)?.0)?
        } else {
            RationalQD::new(n, d)?
        };
        return Ok(Qd::Exact(q));
    }
    let cx = |c: &Constant| match c {
        Constant::Exact(g) => Cx::from_gauss(g, prec),
        Constant::Float(z) => z.clone(),
    };
    let d = Poly::new(den.iter().map(cx).collect(), prec);
    if d.is_zero() {
        return Err(Error::InvalidInput("denominator is zero".into()));
    }
    Ok(Qd::Approx(RationalQD::new(Poly::new(num.iter().map(cx).collect(), prec), d)?))
}

/// Literal that parses back to the same value.
pub trait Literal {
    fn literal(&self) -> String;
}

impl Literal for GaussRat {
    fn literal(&self) -> String {
        self.to_string()
    }
}

impl Literal for Cx {
    fn literal(&self) -> String {
        self.to_decimal_string(None)
    }
}

pub fn print_poly<S: Scalar + Literal>(p: &Poly<S>) -> String {
    let mut terms = Vec::new();
    for (k, c) in p.coeffs().iter().enumerate().rev() {
        if c.is_zero() {
            continue;
        }
        let mono = match k {
            0 => String::new(),
            1 => "z".into(),
            _ => format!("z^{k}"),
        };
        terms.push(match (c.is_one(), k) {
            (true, 0) => "1".into(),
            (true, _) => mono,
            (false, 0) => format!("({})", c.literal()),
            (false, _) => format!("({})*{mono}", c.literal()),
        });
    }
    if terms.is_empty() {
        "0".into()
    } else {
        terms.join(" + ")
    }
}

pub fn print_rational<S: Scalar + Literal>(f: &RationalMap<S>) -> String {
    if f.den().degree() == Some(0) && f.den().coeff(0).is_one() {
        return print_poly(f.num());
    }
    format!("({})/({})", print_poly(f.num()), print_poly(f.den()))
}

/// Canonical text of a map; exact when the map carries exact coefficients.
pub fn print_map(f: &DynMap) -> String {
    match &f.exact {
        Some(e) => print_rational(e),
        None => print_rational(&f.approx),
    }
}

fn literals<S: Scalar + Literal>(p: &Poly<S>) -> Vec<String> {
    p.coeffs().iter().map(|c| c.literal()).collect()
}

/// JSON form of a quadratic differential, in the input format.
pub fn qd_json(q: &Qd) -> serde_json::Value {
    let (num, den) = match q {
        Qd::Exact(q) => (literals(&q.num), literals(&q.den)),
        Qd::Approx(q) => (literals(&q.num), literals(&q.den)),
    };
    serde_json::json!({ "num": num, "den": den })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(a: i64, b: i64) -> GaussRat {
        GaussRat::from_ratio(a, b)
    }

    #[test]
    fn parses_examples() {
        let f = parse_map("z^2 + 1/4", 256).unwrap();
        let e = f.exact.unwrap();
        assert_eq!(e.num(), &Poly::new(vec![g(1, 4), g(0, 1), g(1, 1)], ()));
        assert_eq!(e.den(), &Poly::one(()));

        let f = parse_map("(z^2+1)^2/(4*z*(z^2-1))", 256).unwrap();
        assert!(f.is_exact());
        assert_eq!(f.degree(), 4);

        let f = parse_map("z^2 + 0.1", 256).unwrap();
        assert!(!f.is_exact());
        let c = f.approx.num().coeff(0);
        assert!((c.to_c64().re - 0.1).abs() < 1e-17);
    }

    #[test]
    fn precedence() {
        let a = parse_map("-z^2", 128).unwrap().exact.unwrap();
        assert_eq!(a.num().coeff(2), g(-1, 1));
        let b = parse_map("2^3*z - 1/2*z", 128).unwrap().exact.unwrap();
        assert_eq!(b.num().coeff(1), g(15, 2));
        let c = parse_map("z^2^2", 128).unwrap();
        assert_eq!(c.degree(), 4);
        let d = parse_map("(1 + i)*z^2 + i", 128).unwrap().exact.unwrap();
        assert_eq!(d.num().coeff(2), GaussRat::from_ints(1, 1));
    }

    #[test]
    fn reduces_common_factors() {
        let f = parse_map("(z^3 - z)/(z - 1)", 128).unwrap();
        assert_eq!(f.degree(), 2);
    }

    #[test]
    fn errors() {
        assert!(matches!(parse_map("z^z", 128), Err(Error::NotRational(_))));
        assert!(matches!(parse_map("z^(1/2)", 128), Err(Error::NotRational(_))));
        assert!(matches!(parse_map("z^-1", 128), Err(Error::NotRational(_))));
        assert!(matches!(parse_map("3", 128), Err(Error::DegreeTooSmall(0))));
        assert!(matches!(parse_map("z/z", 128), Err(Error::DegreeTooSmall(0))));
        assert_eq!(
            parse_map("z^2 + $", 128).unwrap_err(),
            Error::SyntaxError {
                position: 6,
                message: "unexpected character '$'".into()
            }
        );
        assert!(matches!(parse_map("(z + 1", 128), Err(Error::SyntaxError { position: 6, .. })));
        assert!(matches!(parse_map("z 2", 128), Err(Error::SyntaxError { position: 2, .. })));
        assert!(matches!(parse_map("1/(z-z)", 128), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn round_trip() {
        for s in ["z^2 + 1/4", "(z^2+1)^2/(4*z*(z^2-1))", "(1/3 - 2*i)*z^3 + z/(z-i)", "z^2 + 0.1", "1/(z^2 - 0.3 + 0.7*i)"] {
            let f = parse_map(s, 256).unwrap();
            let g = parse_map(&print_map(&f), 256).unwrap();
            assert_eq!(f.exact, g.exact, "{s}");
            assert_eq!(f.approx, g.approx, "{s}");
        }
    }

    #[test]
    fn points_and_qds() {
        assert!(parse_point("inf", 64).unwrap().is_infinity());
        assert_eq!(parse_point("1/2", 64).unwrap().exact, Some(SpherePoint::finite(g(1, 2))));
        assert!(parse_point("z", 64).is_err());
        let q = parse_qd(r#"{"num": ["1"], "den": ["-4", 0, "5", "0", "-1"]}"#, 128).unwrap();
        match q {
            Qd::Exact(q) => assert_eq!(q.den.coeff(0), g(4, 1)),
            _ => panic!("expected exact"),
        }
        assert!(matches!(parse_qd(r#"{"num": ["0.5"], "den": ["1"]}"#, 128), Ok(Qd::Approx(_))));
    }
}
