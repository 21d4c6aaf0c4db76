//! Expression language for disc functions.
//!
//! ```text
//! expr := term (('+' | '-') term)*
//! term := scalar? atom
//! atom := 'z' ('^' uint)? | number | '(' expr ')'
//!       | 'K(' number ',' number ')'
//!       | 'U(' number ';' number ',' number ';' number ')'
//! ```
//!
//! `K(a, b)` is `(1 - a z)^(-b)` with real `a in [0, 1)`; `U(d; p, q; phi)` is
//! `d / (1 + d - z e^{-i phi})^{1 + 1/p + 1/q}` with `d in (0, 1/2)`.
//! Whitespace is ignored; numbers are unsigned decimals with an optional
//! exponent.

use std::fmt;

use num_complex::Complex64;
use thiserror::Error;

use crate::disc::{DiscFunction, ExponentPair};
use crate::kernels::u_delta;

/// Grammar text shown by the command-line help.
pub const GRAMMAR: &str = "\
expr := term (('+'|'-') term)*
term := scalar? atom
atom := 'z' ('^' uint)? | number | '(' expr ')'
      | 'K(' number ',' number ')'
      | 'U(' number ';' number ',' number ';' number ')'
K(a, b)         = (1 - a z)^(-b),  a in [0, 1), b > 0
U(d; p, q; phi) = d / (1 + d - z e^(-i phi))^(1 + 1/p + 1/q),  d in (0, 1/2), 1 < p, q
numbers are unsigned decimals with optional exponent; whitespace is ignored";

const MAX_DEPTH: usize = 64;
const MAX_NODES: usize = 4096;
const MAX_POWER: u32 = 1024;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("syntax error at byte {offset}: expected {}", .expected.join(" or "))]
    Syntax { offset: usize, expected: Vec<String> },
    #[error("value out of range at byte {offset}: {message}")]
    Range { offset: usize, message: String },
}

impl ParseError {
    pub fn offset(&self) -> usize {
        match self {
            ParseError::Syntax { offset, .. } | ParseError::Range { offset, .. } => *offset,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Var,
    Number(f64),
    /// `z^n`.
    Pow(u32),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(f64, Box<Expr>),
    Kernel { a: f64, b: f64 },
    UShift { delta: f64, p: f64, q: f64, phi: f64 },
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Var => f.write_str("z"),
            Expr::Number(c) => write!(f, "{c:?}"),
            Expr::Pow(n) => write!(f, "z^{n}"),
            Expr::Add(a, b) | Expr::Sub(a, b) => {
                let op = if matches!(self, Expr::Add(..)) { '+' } else { '-' };
                if matches!(**b, Expr::Add(..) | Expr::Sub(..)) {
                    write!(f, "{a} {op} ({b})")
                } else {
                    write!(f, "{a} {op} {b}")
                }
            }
            Expr::Mul(c, x) => {
                if matches!(**x, Expr::Add(..) | Expr::Sub(..) | Expr::Mul(..)) {
                    write!(f, "{c:?} ({x})")
                } else {
                    write!(f, "{c:?} {x}")
                }
            }
            Expr::Kernel { a, b } => write!(f, "K({a:?}, {b:?})"),
            Expr::UShift { delta, p, q, phi } => write!(f, "U({delta:?}; {p:?}, {q:?}; {phi:?})"),
        }
    }
}

/// Canonical text of an expression; reparses to the same tree.
pub fn print(e: &Expr) -> String {
    e.to_string()
}

pub fn parse(source: &str) -> Result<Expr, ParseError> {
    let mut p = Parser {
        src: source.as_bytes(),
        pos: 0,
        depth: 0,
        nodes: 0,
    };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos < p.src.len() {
        return Err(p.expected(&["'+'", "'-'", "end of input"]));
    }
    Ok(e)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    depth: usize,
    nodes: usize,
}

impl Parser<'_> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn expected(&self, what: &[&str]) -> ParseError {
        ParseError::Syntax {
            offset: self.pos,
            expected: what.iter().map(|s| s.to_string()).collect(),
        }
    }

    fn eat(&mut self, c: u8, name: &str) -> Result<(), ParseError> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.expected(&[name]))
        }
    }

    fn node(&mut self) -> Result<(), ParseError> {
        self.nodes += 1;
        if self.nodes > MAX_NODES {
            return Err(ParseError::Range {
                offset: self.pos,
                message: format!("expression exceeds {MAX_NODES} nodes"),
            });
        }
        Ok(())
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    self.node()?;
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Some(b'-') => {
                    self.pos += 1;
                    self.node()?;
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn starts_atom(c: Option<u8>) -> bool {
        matches!(c, Some(b'z' | b'(' | b'K' | b'U' | b'.' | b'0'..=b'9'))
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let c = self.peek();
        if matches!(c, Some(b'.' | b'0'..=b'9')) {
            let scalar = self.number()?;
            self.node()?;
            if Self::starts_atom(self.peek()) {
                let atom = self.atom()?;
                self.node()?;
                return Ok(Expr::Mul(scalar, Box::new(atom)));
            }
            return Ok(Expr::Number(scalar));
        }
        let atom = self.atom()?;
        self.node()?;
        Ok(atom)
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        match self.peek() {
            Some(b'z') => {
                self.pos += 1;
                if self.peek() == Some(b'^') {
                    self.pos += 1;
                    let at = {
                        self.skip_ws();
                        self.pos
                    };
                    let n = self.uint()?;
                    if n > MAX_POWER {
                        return Err(ParseError::Range {
                            offset: at,
                            message: format!("power {n} exceeds {MAX_POWER}"),
                        });
                    }
                    Ok(Expr::Pow(n))
                } else {
                    Ok(Expr::Var)
                }
            }
            Some(b'.' | b'0'..=b'9') => Ok(Expr::Number(self.number()?)),
            Some(b'(') => {
                self.pos += 1;
                self.depth += 1;
                if self.depth > MAX_DEPTH {
                    return Err(ParseError::Range {
                        offset: self.pos - 1,
                        message: format!("nesting deeper than {MAX_DEPTH}"),
                    });
                }
                let e = self.expr()?;
                self.eat(b')', "')'")?;
                self.depth -= 1;
                Ok(e)
            }
            Some(b'K') => {
                self.pos += 1;
                self.eat(b'(', "'('")?;
                let a_at = self.pos_after_ws();
                let a = self.number()?;
                self.eat(b',', "','")?;
                let b_at = self.pos_after_ws();
                let b = self.number()?;
                self.eat(b')', "')'")?;
                if !(0.0..1.0).contains(&a) {
                    return Err(range(a_at, format!("kernel parameter a = {a} not in [0, 1)")));
                }
                if !(b > 0.0) {
                    return Err(range(b_at, format!("kernel exponent b = {b} must be positive")));
                }
                Ok(Expr::Kernel { a, b })
            }
            Some(b'U') => {
                self.pos += 1;
                self.eat(b'(', "'('")?;
                let d_at = self.pos_after_ws();
                let delta = self.number()?;
                self.eat(b';', "';'")?;
                let p_at = self.pos_after_ws();
                let p = self.number()?;
                self.eat(b',', "','")?;
                let q = self.number()?;
                self.eat(b';', "';'")?;
                let phi = self.number()?;
                self.eat(b')', "')'")?;
                if !(delta > 0.0 && delta < 0.5) {
                    return Err(range(d_at, format!("delta = {delta} not in (0, 1/2)")));
                }
                if let Err(e) = ExponentPair::new(p, q) {
                    return Err(range(p_at, e.to_string()));
                }
                Ok(Expr::UShift { delta, p, q, phi })
            }
            _ => Err(self.expected(&["'z'", "number", "'('", "'K('", "'U('"])),
        }
    }

    fn pos_after_ws(&mut self) -> usize {
        self.skip_ws();
        self.pos
    }

    fn uint(&mut self) -> Result<u32, ParseError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if self.pos == start {
            return Err(self.expected(&["unsigned integer"]));
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii digits");
        text.parse::<u32>().map_err(|_| range(start, format!("integer {text} too large")))
    }

    fn number(&mut self) -> Result<f64, ParseError> {
        self.skip_ws();
        let start = self.pos;
        let digits = |s: &mut Self| {
            let from = s.pos;
            while s.pos < s.src.len() && s.src[s.pos].is_ascii_digit() {
                s.pos += 1;
            }
            s.pos - from
        };
        let mut mantissa = digits(self);
        if self.src.get(self.pos) == Some(&b'.') {
            self.pos += 1;
            mantissa += digits(self);
        }
        if mantissa == 0 {
            self.pos = start;
            return Err(self.expected(&["number"]));
        }
        if matches!(self.src.get(self.pos), Some(b'e' | b'E')) {
            let save = self.pos;
            self.pos += 1;
            if matches!(self.src.get(self.pos), Some(b'+' | b'-')) {
                self.pos += 1;
            }
            if digits(self) == 0 {
                self.pos = save + 1;
                return Err(self.expected(&["exponent digits"]));
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii number");
        let v: f64 = text.parse().map_err(|_| self.expected(&["number"]))?;
        if !v.is_finite() {
            return Err(range(start, format!("number {text} overflows")));
        }
        Ok(v)
    }
}

fn range(offset: usize, message: String) -> ParseError {
    ParseError::Range { offset, message }
}

/// Polynomial part plus scaled transcendental atoms.
#[derive(Default)]
struct Linear {
    poly: Vec<Complex64>,
    atoms: Vec<(Complex64, DiscFunction)>,
}

impl Linear {
    fn add(mut self, other: Linear, sign: f64) -> Linear {
        if other.poly.len() > self.poly.len() {
            self.poly.resize(other.poly.len(), Complex64::new(0.0, 0.0));
        }
        for (k, c) in other.poly.into_iter().enumerate() {
            self.poly[k] += c * sign;
        }
        for (c, f) in other.atoms {
            match self.atoms.iter_mut().find(|(_, g)| *g == f) {
                Some(slot) => slot.0 += c * sign,
                None => self.atoms.push((c * sign, f)),
            }
        }
        self
    }

    fn scale(mut self, s: f64) -> Linear {
        self.poly.iter_mut().for_each(|c| *c *= s);
        self.atoms.iter_mut().for_each(|(c, _)| *c *= s);
        self
    }
}

fn linearize(e: &Expr) -> Linear {
    let one = Complex64::new(1.0, 0.0);
    match e {
        Expr::Var => Linear {
            poly: vec![Complex64::new(0.0, 0.0), one],
            ..Default::default()
        },
        Expr::Number(c) => Linear {
            poly: vec![Complex64::new(*c, 0.0)],
            ..Default::default()
        },
        Expr::Pow(n) => match DiscFunction::monomial(*n as usize) {
            DiscFunction::PowerSeries(poly) => Linear {
                poly,
                ..Default::default()
            },
            _ => unreachable!("monomial is a power series"),
        },
        Expr::Add(a, b) => linearize(a).add(linearize(b), 1.0),
        Expr::Sub(a, b) => linearize(a).add(linearize(b), -1.0),
        Expr::Mul(c, x) => linearize(x).scale(*c),
        Expr::Kernel { a, b } => Linear {
            atoms: vec![(one, DiscFunction::pole_kernel(*a, *b).expect("range checked at parse"))],
            ..Default::default()
        },
        Expr::UShift { delta, p, q, phi } => {
            let pair = ExponentPair::new(*p, *q).expect("range checked at parse");
            Linear {
                atoms: vec![(one, u_delta(*delta, pair, *phi).expect("range checked at parse"))],
                ..Default::default()
            }
        }
    }
}

/// Translates a parsed expression into a [`DiscFunction`]; polynomial terms
/// are merged into one power series, a lone kernel stays a bare kernel.
pub fn lower(e: &Expr) -> DiscFunction {
    let Linear { poly, atoms } = linearize(e);
    let one = Complex64::new(1.0, 0.0);
    let poly_is_zero = poly.iter().all(|c| *c == Complex64::new(0.0, 0.0));
    let mut terms: Vec<DiscFunction> = Vec::new();
    if atoms.is_empty() || !poly_is_zero {
        terms.push(DiscFunction::PowerSeries(poly));
    }
    for (c, f) in atoms {
        terms.push(if c == one { f } else { DiscFunction::scale(c, f) });
    }
    if terms.len() == 1 {
        terms.pop().unwrap()
    } else {
        DiscFunction::sum(terms)
    }
}

/// [`parse`] then [`lower`].
pub fn compile(source: &str) -> Result<DiscFunction, ParseError> {
    Ok(lower(&parse(source)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::disc::DiscPoint;

    #[test]
    fn grammar_examples() {
        assert_eq!(
            parse("z^2 + 0.5 z").unwrap(),
            Expr::Add(Box::new(Expr::Pow(2)), Box::new(Expr::Mul(0.5, Box::new(Expr::Var))))
        );
        assert_eq!(parse("K(0.9, 2)").unwrap(), Expr::Kernel { a: 0.9, b: 2.0 });
        let err = parse("z^").unwrap_err();
        assert_eq!(err.offset(), 2);
        assert!(matches!(err, ParseError::Syntax { ref expected, .. } if expected == &["unsigned integer"]));
    }

    #[test]
    fn range_errors() {
        assert!(matches!(parse("K(1.0, 2)"), Err(ParseError::Range { offset: 2, .. })));
        assert!(matches!(parse("U(0.5; 2, 2; 0)"), Err(ParseError::Range { .. })));
        assert!(matches!(parse("U(0.1; 1, 2; 0)"), Err(ParseError::Range { .. })));
        assert!(matches!(parse("z^5000"), Err(ParseError::Range { .. })));
    }

    #[test]
    fn lowering_merges() {
        assert_eq!(
            compile("z + z").unwrap(),
            DiscFunction::PowerSeries(vec![Complex64::new(0.0, 0.0), Complex64::new(2.0, 0.0)])
        );
        let one = compile("1").unwrap();
        assert_eq!(one.evaluate_abs(&DiscPoint::new(0.3, 1.0).unwrap()), 1.0);
        assert_eq!(compile("K(0.9,2)").unwrap(), DiscFunction::pole_kernel(0.9, 2.0).unwrap());
    }

    #[test]
    fn printing_round_trips() {
        for s in ["z - (z - 1)", "2 (3 z)", "2 3", "K(0.5, 1) - 1e-7 z^3", "U(0.001; 2, 1.25; 0.5) + (z)"] {
            let e = parse(s).unwrap();
            assert_eq!(parse(&print(&e)).unwrap(), e, "{s} -> {}", print(&e));
        }
    }

    #[test]
    fn pathological_inputs_fail_cleanly() {
        let deep = "(".repeat(10_000);
        assert!(parse(&deep).is_err());
        let long = vec!["z"; 10_000].join("+");
        assert!(parse(&long).is_err());
        for s in ["", "+", "K(", "U(0.1;", "1e", "1e+", "z z", "\u{00e9}", "K(0.5 0.5)", "1e400"] {
            let e = parse(s).unwrap_err();
            assert!(e.offset() <= s.len());
        }
    }
}
