//! Text and JSON encodings of rational polynomials.
//!
//! Text form: expressions like `3/2*p0^2*p3 - (p1 + p2)^2`, variables
//! `p0, p1, ...`.
//! JSON form: `{"nvars": n, "terms": [{"exp": [..], "num": "3", "den": "2"}]}`;
//! `num`/`den` may also be JSON integers on input.

use std::fmt;
use std::str::FromStr;

use num::{BigInt, BigRational, One, Signed, Zero};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{QPoly, SparsePoly};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(BigInt),
    Var(usize),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    Open,
    Close,
}

fn tokenize(s: &str) -> Result<Vec<Tok>> {
    let cs: Vec<char> = s.chars().collect();
    let mut i = 0;
    let mut out = Vec::new();
    while i < cs.len() {
        let c = cs[i];
        match c {
            ' ' | '\t' | '\n' | '\r' => i += 1,
            '+' => {
                out.push(Tok::Plus);
                i += 1
            }
            '-' => {
                out.push(Tok::Minus);
                i += 1
            }
            '*' => {
                out.push(Tok::Star);
                i += 1
            }
            '/' => {
                out.push(Tok::Slash);
                i += 1
            }
            '^' => {
                out.push(Tok::Caret);
                i += 1
            }
            '(' => {
                out.push(Tok::Open);
                i += 1
            }
            ')' => {
                out.push(Tok::Close);
                i += 1
            }
            'p' | 'x' => {
                let st = i + 1;
                let mut j = st;
                while j < cs.len() && cs[j].is_ascii_digit() {
                    j += 1;
                }
                if j == st {
                    return Err(Error::Parse(format!("variable without index at {i}")));
                }
                let idx: String = cs[st..j].iter().collect();
                out.push(Tok::Var(idx.parse().map_err(|_| Error::Parse(idx.clone()))?));
                i = j;
            }
            d if d.is_ascii_digit() => {
                let mut j = i;
                while j < cs.len() && cs[j].is_ascii_digit() {
                    j += 1;
                }
                let lit: String = cs[i..j].iter().collect();
                out.push(Tok::Num(BigInt::from_str(&lit).map_err(|e| Error::Parse(e.to_string()))?));
                i = j;
            }
            other => return Err(Error::Parse(format!("unexpected character '{other}'"))),
        }
    }
    Ok(out)
}

/// Parse the text form. With `nvars = None` the ring size is one more than
/// the largest variable index that occurs.
pub fn parse_text(s: &str, nvars: Option<usize>) -> Result<QPoly> {
    let toks = tokenize(s)?;
    let maxvar = toks
        .iter()
        .filter_map(|t| if let Tok::Var(v) = t { Some(*v + 1) } else { None })
        .max()
        .unwrap_or(0);
    let n = match nvars {
        Some(n) if n < maxvar => {
            return Err(Error::Parse(format!("variable p{} outside ring of {n} variables", maxvar - 1)))
        }
        Some(n) => n,
        None => maxvar,
    };
    let mut parser = Parser { toks: &toks, pos: 0, n };
    let poly = parser.expr()?;
    if parser.pos < toks.len() {
        return Err(Error::Parse(format!("unexpected token {:?}", toks[parser.pos])));
    }
    Ok(poly)
}

struct Parser<'a> {
    toks: &'a [Tok],
    pos: usize,
    n: usize,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == Some(t) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<QPoly> {
        let mut acc = QPoly::zero(self.n);
        let mut first = true;
        loop {
            let mut neg = false;
            let mut signed = false;
            while let Some(t) = self.peek() {
                match t {
                    Tok::Plus => {}
                    Tok::Minus => neg = !neg,
                    _ => break,
                }
                signed = true;
                self.pos += 1;
            }
            if !first && !signed {
                return Ok(acc);
            }
            let t = self.term()?;
            acc = if neg { &acc - &t } else { &acc + &t };
            first = false;
            if !matches!(self.peek(), Some(Tok::Plus | Tok::Minus)) {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<QPoly> {
        let mut acc = self.factor()?;
        while self.eat(&Tok::Star) {
            acc = &acc * &self.factor()?;
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<QPoly> {
        let base = self.atom()?;
        if self.eat(&Tok::Caret) {
            match self.peek() {
                Some(Tok::Num(b)) => {
                    let k: u32 = b.to_string().parse().map_err(|_| Error::Parse("bad exponent".into()))?;
                    self.pos += 1;
                    return Ok(base.pow(k));
                }
                _ => return Err(Error::Parse("bad exponent".into())),
            }
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<QPoly> {
        match self.peek().cloned() {
            Some(Tok::Num(a)) => {
                self.pos += 1;
                let mut v = BigRational::from_integer(a);
                if self.eat(&Tok::Slash) {
                    match self.peek() {
                        Some(Tok::Num(b)) if !b.is_zero() => {
                            v /= BigRational::from_integer(b.clone());
                            self.pos += 1;
                        }
                        _ => return Err(Error::Parse("bad denominator".into())),
                    }
                }
                Ok(QPoly::constant(self.n, v))
            }
            Some(Tok::Var(v)) => {
                self.pos += 1;
                Ok(QPoly::var(self.n, v))
            }
            Some(Tok::Open) => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(&Tok::Close) {
                    return Err(Error::Parse("unbalanced parenthesis".into()));
                }
                Ok(e)
            }
            Some(t) => Err(Error::Parse(format!("unexpected token {t:?}"))),
            None => Err(Error::Parse("incomplete expression".into())),
        }
    }
}

fn fmt_rat(q: &BigRational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

impl fmt::Display for SparsePoly<BigRational> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in self.terms().collect::<Vec<_>>().into_iter().rev() {
            let neg = c.is_negative();
            let a = c.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, "{}", if neg { " - " } else { " + " })?;
            }
            first = false;
            let mut parts = Vec::new();
            let constant = e.iter().all(|&k| k == 0);
            if !a.is_one() || constant {
                parts.push(fmt_rat(&a));
            }
            for (i, &k) in e.iter().enumerate() {
                match k {
                    0 => {}
                    1 => parts.push(format!("p{i}")),
                    _ => parts.push(format!("p{i}^{k}")),
                }
            }
            write!(f, "{}", parts.join("*"))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct TermJson {
    pub exp: Vec<u32>,
    pub num: Value,
    pub den: Value,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct PolyJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nvars: Option<usize>,
    pub terms: Vec<TermJson>,
}

fn int_from_value(v: &Value) -> Result<BigInt> {
    match v {
        Value::String(s) => BigInt::from_str(s.trim()).map_err(|e| Error::Parse(e.to_string())),
        Value::Number(n) => BigInt::from_str(&n.to_string()).map_err(|e| Error::Parse(e.to_string())),
        _ => Err(Error::Parse(format!("expected integer, got {v}"))),
    }
}

/// A rational from JSON: an integer, a float with an exact short decimal
/// form, or a string `"a"` / `"a/b"`.
pub fn rational_from_json(v: &Value) -> Result<BigRational> {
    match v {
        Value::String(s) => parse_rational(s),
        Value::Number(n) if n.is_i64() || n.is_u64() => Ok(BigRational::from_integer(int_from_value(v)?)),
        Value::Number(n) => parse_rational(&n.to_string()),
        _ => Err(Error::Parse(format!("expected rational, got {v}"))),
    }
}

/// Parse `"a"`, `"a/b"` or a plain decimal `"1.25"`.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("bad rational '{s}'"));
    if let Some((a, b)) = s.split_once('/') {
        let a = BigInt::from_str(a.trim()).map_err(|_| bad())?;
        let b = BigInt::from_str(b.trim()).map_err(|_| bad())?;
        if b.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(a, b));
    }
    if let Some((ip, fp)) = s.split_once('.') {
        if fp.is_empty() || !fp.chars().all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let neg = ip.starts_with('-');
        let whole = BigInt::from_str(if ip.is_empty() || ip == "-" { "0" } else { ip }).map_err(|_| bad())?;
        let scale = num::pow(BigInt::from(10), fp.len());
        let frac = BigRational::new(BigInt::from_str(fp).map_err(|_| bad())?, scale);
        let w = BigRational::from_integer(whole);
        return Ok(if neg { w - frac } else { w + frac });
    }
    Ok(BigRational::from_integer(BigInt::from_str(s).map_err(|_| bad())?))
}

pub fn rational_to_json(q: &BigRational) -> Value {
    if q.is_integer() {
        Value::String(q.numer().to_string())
    } else {
        Value::String(format!("{}/{}", q.numer(), q.denom()))
    }
}

pub fn poly_to_json(p: &QPoly) -> PolyJson {
    PolyJson {
        nvars: Some(p.nvars()),
        terms: p
            .terms()
            .map(|(e, c)| TermJson {
                exp: e.clone(),
                num: Value::String(c.numer().to_string()),
                den: Value::String(c.denom().to_string()),
            })
            .collect(),
    }
}

/// Accepts either the text form (a JSON string) or the term-list object.
pub fn poly_from_json(v: &Value, nvars: Option<usize>) -> Result<QPoly> {
    match v {
        Value::String(s) => parse_text(s, nvars),
        Value::Object(_) => {
            let pj: PolyJson = serde_json::from_value(v.clone())?;
            let n = pj
                .nvars
                .or(nvars)
                .or_else(|| pj.terms.first().map(|t| t.exp.len()))
                .unwrap_or(0);
            let mut terms = Vec::with_capacity(pj.terms.len());
            for t in &pj.terms {
                let den = int_from_value(&t.den)?;
                if den.is_zero() {
                    return Err(Error::Parse("zero denominator".into()));
                }
                terms.push((t.exp.clone(), BigRational::new(int_from_value(&t.num)?, den)));
            }
            SparsePoly::from_terms(n, terms)
        }
        _ => Err(Error::Parse("polynomial must be a string or a term-list object".into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_round_trip() {
        let p = parse_text("3/2*p0^2*p3 - p1 + 7 - 1/3*p2", Some(4)).unwrap();
        let s = p.to_string();
        assert_eq!(parse_text(&s, Some(4)).unwrap(), p);
        assert_eq!(parse_text("-p1^2 + 4*p0*p2", None).unwrap().to_string(), "4*p0*p2 - p1^2");
        assert_eq!(parse_text("0", Some(2)).unwrap().to_string(), "0");
    }

    #[test]
    fn text_errors() {
        assert!(parse_text("p0 +", Some(1)).is_err());
        assert!(parse_text("p0 p1", Some(2)).is_err());
        assert!(parse_text("p3", Some(2)).is_err());
        assert!(parse_text("1/0", Some(1)).is_err());
        assert!(parse_text("p0 ? 2", Some(1)).is_err());
        assert!(parse_text("(p0 + p1", Some(2)).is_err());
    }

    #[test]
    fn rationals() {
        assert_eq!(parse_rational("-3/6").unwrap(), BigRational::new((-1).into(), 2.into()));
        assert_eq!(parse_rational("-1.25").unwrap(), BigRational::new((-5).into(), 4.into()));
        assert_eq!(rational_from_json(&serde_json::json!(7)).unwrap(), BigRational::from_integer(7.into()));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
    }

    #[test]
    fn parentheses_expand() {
        let a = parse_text("(p0 + 2*p1)*(p0 - p1) - -(p1)^2", Some(2)).unwrap();
        assert_eq!(a, parse_text("p0^2 + p0*p1 - p1^2", Some(2)).unwrap());
        assert_eq!(parse_text("2*(p0 - p1)^3/1", None).is_err(), true);
        assert_eq!(parse_text("(1/2)*(p0 - p1)^2", None).unwrap().num_terms(), 3);
    }

    #[test]
    fn json_round_trip() {
        let p = parse_text("-22/7*p0*p1 + 123456789012345678901234567890*p1^3", Some(2)).unwrap();
        let j = serde_json::to_value(poly_to_json(&p)).unwrap();
        assert_eq!(poly_from_json(&j, None).unwrap(), p);
        let v: Value = serde_json::from_str(r#"{"terms":[{"exp":[1,0],"num":4,"den":2}]}"#).unwrap();
        assert_eq!(poly_from_json(&v, None).unwrap(), parse_text("2*p0", Some(2)).unwrap());
        let s = Value::String("p0 - p1".into());
        assert_eq!(poly_from_json(&s, Some(3)).unwrap().nvars(), 3);
    }
}
