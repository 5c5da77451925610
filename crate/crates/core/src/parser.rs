//! Text format for homogeneous polynomial maps.
//!
//! ```text
//! mapdef   := header? dim ";" comp (";" comp)* ";"?
//! header   := "kappa" "=" REAL ";"
//! dim      := "n" "=" INT
//! comp     := IDENT "=" polyexpr          (f1 .. fn, in order)
//! polyexpr := ("+"|"-")? term (("+"|"-") term)*
//! term     := REAL? ("*"? factor)*
//! factor   := VAR ("^" INT)?              (x1 .. xn)
//! ```
//!
//! `REAL` accepts decimal and scientific notation and `p/q` rationals.
//! Whitespace is insignificant and `#` starts a comment running to the end
//! of the line.

use crate::error::{ParseError, Position};
use crate::mapcore::{MapBody, MapSpec};
use crate::poly::{PolyMap, Term};
use crate::scalar::Scalar;

/// Largest accepted dimension.
pub const MAX_DIM: usize = 1024;
/// Largest accepted single exponent.
pub const MAX_EXPONENT: u32 = 1024;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Number(String),
    Plus,
    Minus,
    Star,
    Caret,
    Slash,
    Eq,
    Semi,
    Eof,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    pos: Position,
    start: usize,
    end: usize,
}

fn syntax(pos: Position, msg: impl Into<String>) -> ParseError {
    ParseError::Syntax {
        pos,
        msg: msg.into(),
    }
}

fn lex(src: &str) -> Result<Vec<Token>, ParseError> {
    let mut out = Vec::new();
    let mut chars = src.char_indices().peekable();
    let (mut line, mut col) = (1usize, 1usize);
    while let Some(&(i, c)) = chars.peek() {
        let pos = Position { line, column: col };
        let mut advance = |chars: &mut std::iter::Peekable<std::str::CharIndices>| {
            let (_, ch) = chars.next().expect("peeked");
            if ch == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
        };
        if c.is_whitespace() {
            advance(&mut chars);
            continue;
        }
        if c == '#' {
            while let Some(&(_, ch)) = chars.peek() {
                if ch == '\n' {
                    break;
                }
                advance(&mut chars);
            }
            continue;
        }
        let single = match c {
            '+' => Some(Tok::Plus),
            '-' => Some(Tok::Minus),
            '*' => Some(Tok::Star),
            '^' => Some(Tok::Caret),
            '/' => Some(Tok::Slash),
            '=' => Some(Tok::Eq),
            ';' => Some(Tok::Semi),
            _ => None,
        };
        if let Some(tok) = single {
            advance(&mut chars);
            out.push(Token {
                tok,
                pos,
                start: i,
                end: i + 1,
            });
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let mut end = i;
            while let Some(&(j, ch)) = chars.peek() {
                if ch.is_ascii_alphanumeric() || ch == '_' {
                    end = j + 1;
                    advance(&mut chars);
                } else {
                    break;
                }
            }
            out.push(Token {
                tok: Tok::Ident(src[i..end].to_string()),
                pos,
                start: i,
                end,
            });
            continue;
        }
        if c.is_ascii_digit() || c == '.' {
            let bytes = src.as_bytes();
            let mut j = i;
            let digits = |j: &mut usize| {
                let s = *j;
                while *j < bytes.len() && bytes[*j].is_ascii_digit() {
                    *j += 1;
                }
                *j > s
            };
            let mut any = digits(&mut j);
            if j < bytes.len() && bytes[j] == b'.' {
                j += 1;
                any |= digits(&mut j);
            }
            if !any {
                return Err(syntax(pos, "malformed number"));
            }
            if j < bytes.len() && (bytes[j] == b'e' || bytes[j] == b'E') {
                let mut k = j + 1;
                if k < bytes.len() && (bytes[k] == b'+' || bytes[k] == b'-') {
                    k += 1;
                }
                if digits(&mut k) {
                    j = k;
                } else {
                    return Err(syntax(pos, "malformed exponent in number"));
                }
            }
            while chars.peek().is_some_and(|&(k, _)| k < j) {
                advance(&mut chars);
            }
            out.push(Token {
                tok: Tok::Number(src[i..j].to_string()),
                pos,
                start: i,
                end: j,
            });
            continue;
        }
        return Err(syntax(pos, format!("unexpected character {c:?}")));
    }
    out.push(Token {
        tok: Tok::Eof,
        pos: Position { line, column: col },
        start: src.len(),
        end: src.len(),
    });
    Ok(out)
}

struct RawTerm<T> {
    term: Term<T>,
    bare_zero: bool,
    pos: Position,
    text: String,
}

struct Parser<'a> {
    src: &'a str,
    toks: Vec<Token>,
    at: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> &Token {
        &self.toks[self.at]
    }

    fn next(&mut self) -> Token {
        let t = self.toks[self.at].clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn expect(&mut self, want: &Tok, what: &str) -> Result<Token, ParseError> {
        let t = self.next();
        if &t.tok == want {
            Ok(t)
        } else {
            Err(syntax(t.pos, format!("expected {what}")))
        }
    }

    fn expect_ident(&mut self, name: &str) -> Result<Token, ParseError> {
        let t = self.next();
        match &t.tok {
            Tok::Ident(s) if s == name => Ok(t),
            _ => Err(syntax(t.pos, format!("expected `{name}`"))),
        }
    }

    fn integer(&mut self, what: &str) -> Result<(u64, Position), ParseError> {
        let t = self.next();
        match &t.tok {
            Tok::Number(s) => s
                .parse::<u64>()
                .map(|v| (v, t.pos))
                .map_err(|_| syntax(t.pos, format!("expected integer {what}"))),
            _ => Err(syntax(t.pos, format!("expected integer {what}"))),
        }
    }

    /// `REAL ("/" INT)?`, already positioned on a number token.
    fn real<T: Scalar>(&mut self) -> Result<T, ParseError> {
        let t = self.next();
        let Tok::Number(s) = &t.tok else {
            return Err(syntax(t.pos, "expected number"));
        };
        let mut v: T = s
            .parse()
            .map_err(|_| syntax(t.pos, "malformed number"))?;
        if self.peek().tok == Tok::Slash {
            self.next();
            let d = self.next();
            let den: T = match &d.tok {
                Tok::Number(s) => s.parse().map_err(|_| syntax(d.pos, "malformed denominator"))?,
                _ => return Err(syntax(d.pos, "expected denominator")),
            };
            if den == T::zero() {
                return Err(syntax(d.pos, "zero denominator"));
            }
            v = v / den;
        }
        if !v.is_finite() {
            return Err(syntax(t.pos, "number out of range"));
        }
        Ok(v)
    }

    fn factor(&mut self, n: usize, exps: &mut [u32]) -> Result<(), ParseError> {
        let t = self.next();
        let var = match &t.tok {
            Tok::Ident(s) => s
                .strip_prefix('x')
                .and_then(|k| k.parse::<usize>().ok())
                .filter(|&k| (1..=n).contains(&k) && !s[1..].starts_with('0')),
            _ => None,
        };
        let Some(k) = var else {
            return Err(syntax(t.pos, format!("expected a variable x1..x{n}")));
        };
        let mut e = 1u64;
        if self.peek().tok == Tok::Caret {
            self.next();
            let (v, pos) = self.integer("exponent")?;
            if v > u64::from(MAX_EXPONENT) {
                return Err(syntax(pos, format!("exponent exceeds {MAX_EXPONENT}")));
            }
            e = v;
        }
        let slot = &mut exps[k - 1];
        *slot = slot.saturating_add(e as u32);
        Ok(())
    }

    fn term<T: Scalar>(&mut self, n: usize, sign: T) -> Result<RawTerm<T>, ParseError> {
        let first = self.peek().clone();
        let mut coeff = T::one();
        let mut has_coeff = false;
        if matches!(first.tok, Tok::Number(_)) {
            coeff = self.real()?;
            has_coeff = true;
        }
        let mut exps = vec![0u32; n];
        let mut factors = 0usize;
        loop {
            match &self.peek().tok {
                Tok::Star if has_coeff || factors > 0 => {
                    self.next();
                    self.factor(n, &mut exps)?;
                    factors += 1;
                }
                Tok::Ident(_) => {
                    self.factor(n, &mut exps)?;
                    factors += 1;
                }
                _ => break,
            }
        }
        if !has_coeff && factors == 0 {
            return Err(syntax(first.pos, "expected a term"));
        }
        let end = self.toks[self.at.saturating_sub(1)].end;
        Ok(RawTerm {
            bare_zero: factors == 0 && coeff == T::zero(),
            term: Term::new(sign * coeff, exps),
            pos: first.pos,
            text: self.src[first.start..end.max(first.start)].trim().to_string(),
        })
    }

    fn polyexpr<T: Scalar>(&mut self, n: usize) -> Result<Vec<RawTerm<T>>, ParseError> {
        let mut terms = Vec::new();
        let mut sign = T::one();
        match self.peek().tok {
            Tok::Minus => {
                self.next();
                sign = -T::one();
            }
            Tok::Plus => {
                self.next();
            }
            _ => {}
        }
        loop {
            terms.push(self.term(n, sign)?);
            sign = match self.peek().tok {
                Tok::Plus => T::one(),
                Tok::Minus => -T::one(),
                _ => break,
            };
            self.next();
        }
        Ok(terms)
    }
}

/// Parses a map definition into a [`MapSpec`] with a polynomial body.
pub fn parse_map<T: Scalar>(src: &str) -> Result<MapSpec<T>, ParseError> {
    let mut p = Parser {
        src,
        toks: lex(src)?,
        at: 0,
    };

    let mut kappa: Option<T> = None;
    if p.peek().tok == Tok::Ident("kappa".into()) {
        p.next();
        p.expect(&Tok::Eq, "`=` after kappa")?;
        let pos = p.peek().pos;
        let negative = p.peek().tok == Tok::Minus;
        if negative {
            p.next();
        }
        let start = p.peek().start;
        let v: T = p.real()?;
        let v = if negative { -v } else { v };
        if v <= T::zero() {
            let end = p.toks[p.at.saturating_sub(1)].end;
            let text = if negative { format!("-{}", &src[start..end]) } else { src[start..end].to_string() };
            return Err(ParseError::InvalidKappa { pos, value: text });
        }
        kappa = Some(v);
        p.expect(&Tok::Semi, "`;` after kappa")?;
    }

    p.expect_ident("n")?;
    p.expect(&Tok::Eq, "`=` after n")?;
    let (n, npos) = p.integer("dimension")?;
    if n == 0 || n > MAX_DIM as u64 {
        return Err(syntax(npos, format!("dimension must be in 1..={MAX_DIM}")));
    }
    let n = n as usize;
    p.expect(&Tok::Semi, "`;` after dimension")?;

    let mut comps: Vec<Vec<RawTerm<T>>> = Vec::new();
    loop {
        if p.peek().tok == Tok::Eof && !comps.is_empty() {
            break;
        }
        let t = p.next();
        let want = format!("f{}", comps.len() + 1);
        match &t.tok {
            Tok::Ident(s) if *s == want => {}
            Tok::Ident(s) if comps.len() == n && s.starts_with('f') => {
                return Err(ParseError::DimensionMismatch {
                    pos: t.pos,
                    declared: n,
                    found: comps.len() + 1,
                });
            }
            _ => return Err(syntax(t.pos, format!("expected `{want}`"))),
        }
        p.expect(&Tok::Eq, "`=`")?;
        comps.push(p.polyexpr(n)?);
        let sep = p.next();
        match sep.tok {
            Tok::Semi => {}
            Tok::Eof => break,
            _ => return Err(syntax(sep.pos, "expected `;`, `+`, `-` or end of input")),
        }
    }
    let eof = p.peek().pos;
    if comps.len() != n {
        return Err(ParseError::DimensionMismatch {
            pos: eof,
            declared: n,
            found: comps.len(),
        });
    }

    let degree = comps
        .iter()
        .flatten()
        .find(|t| !t.bare_zero)
        .map(|t| (t.term.degree(), t.pos));
    let Some((degree, dpos)) = degree else {
        return Err(syntax(eof, "map has no monomials; write zero components as 0*x1^d"));
    };
    if degree == 0 {
        return Err(syntax(dpos, "map must have degree >= 1"));
    }
    for (c, terms) in comps.iter().enumerate() {
        if let Some(bad) = terms.iter().find(|t| !t.bare_zero && t.term.degree() != degree) {
            return Err(ParseError::MixedDegree {
                pos: bad.pos,
                component: c + 1,
                monomial: bad.text.clone(),
                found: bad.term.degree(),
                expected: degree,
            });
        }
    }

    let terms = comps
        .into_iter()
        .map(|ts| ts.into_iter().filter(|t| !t.bare_zero).map(|t| t.term).collect())
        .collect();
    let poly = PolyMap::new(n, degree, terms)
        .map_err(|_| syntax(eof, "internal: map failed homogeneity re-check"))?;
    match kappa {
        Some(k) => Ok(MapSpec::weighted(poly, k).expect("kappa validated")),
        None => Ok(MapSpec::polynomial(poly)),
    }
}

fn format_monomial(exps: &[u32]) -> String {
    exps.iter()
        .enumerate()
        .filter(|(_, &e)| e > 0)
        .map(|(i, &e)| if e == 1 { format!("x{}", i + 1) } else { format!("x{}^{}", i + 1, e) })
        .collect::<Vec<_>>()
        .join("*")
}

/// Canonical text for a polynomial map; `kappa` is emitted when it differs
/// from the degree.
pub fn format_poly<T: Scalar>(p: &PolyMap<T>, kappa: Option<T>) -> String {
    let mut out = String::new();
    if let Some(k) = kappa.filter(|&k| k != T::lit(p.degree() as f64)) {
        out.push_str(&format!("kappa = {k};\n"));
    }
    out.push_str(&format!("n = {}", p.dim()));
    let all_zero = p.is_zero();
    for (i, comp) in p.components().iter().enumerate() {
        out.push_str(&format!(";\nf{} = ", i + 1));
        if comp.is_zero() {
            if all_zero {
                out.push_str(&format!("0*x1^{}", p.degree()));
            } else {
                out.push('0');
            }
            continue;
        }
        for (k, t) in comp.terms().iter().enumerate() {
            let neg = t.coeff < T::zero();
            match (k, neg) {
                (0, true) => out.push('-'),
                (0, false) => {}
                (_, true) => out.push_str(" - "),
                (_, false) => out.push_str(" + "),
            }
            let c = t.coeff.abs();
            let mono = format_monomial(&t.exponents);
            if c == T::one() {
                out.push_str(&mono);
            } else {
                out.push_str(&format!("{c}*{mono}"));
            }
        }
    }
    out.push('\n');
    out
}

/// Canonical text for a map with a polynomial body; `None` for black boxes.
pub fn format_map<T: Scalar>(m: &MapSpec<T>) -> Option<String> {
    match m.body() {
        MapBody::Poly(p) => Some(format_poly(p, Some(m.kappa()))),
        MapBody::BlackBox(_) => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builtins;

    fn parse(s: &str) -> Result<MapSpec<f64>, ParseError> {
        parse_map(s)
    }

    #[test]
    fn complex_square_definition() {
        let m = parse("n=2; f1 = x1^2 - x2^2; f2 = 2*x1*x2").unwrap();
        assert_eq!(m.kappa(), 2.0);
        assert_eq!(m.as_poly().unwrap().degree(), 2);
        assert_eq!(m.as_poly(), builtins::complex_square::<f64>().as_poly());
    }

    #[test]
    fn identity_definition() {
        let m = parse("n=3; f1 = x1; f2 = x2; f3 = x3").unwrap();
        assert_eq!(m.as_poly(), builtins::identity::<f64>(3).as_poly());
        assert_eq!(m.as_poly().unwrap().degree(), 1);
    }

    #[test]
    fn mixed_degree_names_monomial() {
        let err = parse("n=2; f1 = x1^2 + x2; f2 = x1*x2").unwrap_err();
        match err {
            ParseError::MixedDegree {
                component,
                monomial,
                found,
                expected,
                pos,
            } => {
                assert_eq!(component, 1);
                assert_eq!(monomial, "x2");
                assert_eq!((found, expected), (1, 2));
                assert_eq!(pos, Position { line: 1, column: 18 });
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn dimension_mismatch() {
        assert!(matches!(
            parse("n=3; f1 = x1; f2 = x2"),
            Err(ParseError::DimensionMismatch { declared: 3, found: 2, .. })
        ));
        assert!(matches!(
            parse("n=1; f1 = x1; f2 = x1"),
            Err(ParseError::DimensionMismatch { declared: 1, found: 2, .. })
        ));
    }

    #[test]
    fn kappa_header() {
        let m = parse("kappa = 2.5; n = 2; f1 = x1; f2 = x2").unwrap();
        assert_eq!(m.kappa(), 2.5);
        assert_eq!(m.radial_exponent(), 1.5);
        let m = parse("kappa = 1/2; n = 1; f1 = x1").unwrap();
        assert_eq!(m.kappa(), 0.5);
        assert!(matches!(parse("kappa = 0; n=1; f1 = x1"), Err(ParseError::InvalidKappa { .. })));
        assert!(matches!(parse("kappa = -2; n=1; f1 = x1"), Err(ParseError::InvalidKappa { .. })));
    }

    #[test]
    fn positions_are_one_based_lines_and_columns() {
        let err = parse("n = 2;\nf1 = x1;\nf2 = x3").unwrap_err();
        assert_eq!(err.position(), Position { line: 3, column: 6 });
        let err = parse("n = 2;\n  f1 = x1 $").unwrap_err();
        assert_eq!(err.position(), Position { line: 2, column: 11 });
    }

    #[test]
    fn rational_and_implicit_products() {
        let m = parse("n=2; f1 = 3/4 x1 x2 - x2^2; f2 = -x1^2 + 1e-1*x2*x2").unwrap();
        let p = m.as_poly().unwrap();
        let v = p.eval(&[2.0, 3.0]);
        assert_eq!(v, vec![0.75 * 6.0 - 9.0, -4.0 + 0.1 * 9.0]);
    }

    #[test]
    fn zero_components() {
        let m = parse("n=2; f1 = 0; f2 = x1 # comment\n").unwrap();
        assert!(m.as_poly().unwrap().components()[0].is_zero());
        assert!(parse("n=1; f1 = 0").is_err());
        let z = parse("n=2; f1 = 0*x1^2; f2 = 0*x2^2").unwrap();
        assert!(z.as_poly().unwrap().is_zero());
        let text = format_map(&z).unwrap();
        assert_eq!(parse(&text).unwrap().as_poly(), z.as_poly());
    }

    #[test]
    fn canonical_text() {
        let m = parse("n=2; f2 = x2*x1 + x1*x2; f1 = 1").unwrap_err();
        assert!(matches!(m, ParseError::Syntax { .. }));
        let m = parse("n=2; f1 = -x2^2 + x1^2; f2 = x2*x1 + x1*x2").unwrap();
        assert_eq!(format_map(&m).unwrap(), "n = 2;\nf1 = x1^2 - x2^2;\nf2 = 2*x1*x2\n");
        let w = builtins::radial_cube::<f64>();
        assert_eq!(format_map(&w).unwrap(), "kappa = 3;\nn = 3;\nf1 = x1;\nf2 = x2;\nf3 = x3\n");
        assert!(format_map(&builtins::perturbed_radial_cube::<f64>()).is_none());
    }

    #[test]
    fn rejects_bad_syntax() {
        for bad in [
            "",
            "n=0; f1 = x1",
            "n=2 f1 = x1; f2 = x2",
            "n=1; f1 = *x1",
            "n=1; f1 = x1 +",
            "n=1; f1 = x01",
            "n=1; f1 = 1/0 x1",
            "n=1; f1 = x1^",
            "n=1; g1 = x1",
            "n=1; f1 = 1e999*x1",
        ] {
            assert!(parse(bad).is_err(), "{bad:?} should fail");
        }
    }
}
