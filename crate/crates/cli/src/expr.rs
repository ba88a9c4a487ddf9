//! Parser for polynomial expressions in `z₁, z₂, z̄₁, z̄₂`.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := '-' unary | power
//! power  := atom ('^' ['-'] integer)?
//! atom   := number | 'i' | variable | '(' expr ')' | 'conj' '(' expr ')'
//! ```
//!
//! Variables are `z1 z2 zb1 zb2`; `w w1 w2 wb wb1 wb2` are aliases for the
//! same slots (planar expressions use the first slot). Numbers are exact
//! decimals. Division and negative powers need a single-monomial operand.

use hartogs::exact::{parse_decimal, GaussRat};
use hartogs::symbolic::{SymbolicFunction, Var};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(String),
    Ident(String),
    Op(char),
}

fn lex(s: &str) -> Result<Vec<Tok>, String> {
    let chars: Vec<char> = s.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            // exponent only when followed by a digit or sign+digit
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            out.push(Tok::Num(chars[start..i].iter().collect()));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Tok::Ident(chars[start..i].iter().collect()));
        } else if "+-*/^()".contains(c) {
            out.push(Tok::Op(c));
            i += 1;
        } else {
            return Err(format!("unexpected character {c:?} at position {i}"));
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<Tok>,
    pos: usize,
}

fn variable(name: &str) -> Option<Var> {
    Some(match name {
        "z1" | "w" | "w1" => Var::Z1,
        "z2" | "w2" => Var::Z2,
        "zb1" | "wb" | "wb1" => Var::Z1Bar,
        "zb2" | "wb2" => Var::Z2Bar,
        _ => return None,
    })
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Op(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<(), String> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(format!("expected '{c}' at token {}", self.pos))
        }
    }

    fn expr(&mut self) -> Result<SymbolicFunction, String> {
        let mut acc = self.term()?;
        loop {
            if self.eat('+') {
                acc = acc.add(&self.term()?);
            } else if self.eat('-') {
                acc = acc.sub(&self.term()?);
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<SymbolicFunction, String> {
        let mut acc = self.unary()?;
        loop {
            if self.eat('*') {
                acc = acc.mul(&self.unary()?);
            } else if self.eat('/') {
                let d = self.unary()?.powi(-1).map_err(|e| format!("invalid divisor: {e}"))?;
                acc = acc.mul(&d);
            } else {
                return Ok(acc);
            }
        }
    }

    fn unary(&mut self) -> Result<SymbolicFunction, String> {
        if self.eat('-') {
            Ok(self.unary()?.scale(&GaussRat::from_int(-1)))
        } else {
            self.power()
        }
    }

    fn power(&mut self) -> Result<SymbolicFunction, String> {
        let base = self.atom()?;
        if !self.eat('^') {
            return Ok(base);
        }
        let neg = self.eat('-');
        let n: i32 = match self.toks.get(self.pos) {
            Some(Tok::Num(s)) => s.parse().map_err(|_| format!("exponent {s:?} is not an integer"))?,
            _ => return Err("expected an integer exponent after '^'".into()),
        };
        self.pos += 1;
        base.powi(if neg { -n } else { n }).map_err(|e| e.to_string())
    }

    fn atom(&mut self) -> Result<SymbolicFunction, String> {
        let tok = self.peek().cloned().ok_or("unexpected end of expression")?;
        self.pos += 1;
        match tok {
            Tok::Num(s) => {
                let q = parse_decimal(&s).ok_or_else(|| format!("invalid number {s:?}"))?;
                Ok(SymbolicFunction::constant(GaussRat::from_rational(q)))
            }
            Tok::Op('(') => {
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Tok::Ident(name) if name == "i" => Ok(SymbolicFunction::constant(GaussRat::i())),
            Tok::Ident(name) if name == "conj" => {
                self.expect('(')?;
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e.conj())
            }
            Tok::Ident(name) => {
                variable(&name).map(SymbolicFunction::var).ok_or_else(|| format!("unknown identifier {name:?}"))
            }
            Tok::Op(c) => Err(format!("unexpected '{c}'")),
        }
    }
}

/// Parse an expression into an exact symbolic function.
pub fn parse_expr(s: &str) -> Result<SymbolicFunction, String> {
    let toks = lex(s)?;
    if toks.is_empty() {
        return Err("empty expression".into());
    }
    let mut p = Parser { toks, pos: 0 };
    let f = p.expr()?;
    if p.pos != p.toks.len() {
        return Err(format!("trailing input at token {}", p.pos));
    }
    Ok(f)
}
