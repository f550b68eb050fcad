//! Text format for front-end formulas.
//!
//! Grammar (ASCII only):
//!   formula  := disjunct { "\/" disjunct }
//!   disjunct := conjunct { "/\" conjunct }
//!   conjunct := "not" conjunct | "(" formula ")" | atom
//!   atom     := expr cmp expr          cmp in { =, <, <=, >, >= }
//!   expr     := signed sum of products of variables, numeric literals, and
//!               parenthesized expressions, with "^" for nonnegative powers
//!
//! Atoms are normalized to `p = 0`, `p >= 0`, or `p > 0`. Rational literals
//! like `3/4` are accepted so printed formulas re-parse. Empty input parses
//! as the empty conjunction (truth).

use num_bigint::BigInt;


use crate::error::{Error, Result};
use crate::formula::{AtomKind, FormulaNode, VarTable};
use crate::poly::Polynomial;
use crate::rational::Rat;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Num(Rat),
    Plus,
    Minus,
    Star,
    Caret,
    LParen,
    RParen,
    Eq,
    Lt,
    Le,
    Gt,
    Ge,
    And,
    Or,
    Not,
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn lex(text: &'a str) -> Result<Vec<(usize, Tok)>> {
        let mut lx = Lexer {
            src: text.as_bytes(),
            pos: 0,
        };
        let mut toks = Vec::new();
        while let Some(t) = lx.next_token()? {
            toks.push(t);
        }
        Ok(toks)
    }

    fn err(&self, msg: &str) -> Error {
        Error::Syntax {
            pos: self.pos,
            msg: msg.to_string(),
        }
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn next_token(&mut self) -> Result<Option<(usize, Tok)>> {
        while matches!(self.peek(), Some(b) if b.is_ascii_whitespace()) {
            self.pos += 1;
        }
        let start = self.pos;
        let Some(b) = self.peek() else {
            return Ok(None);
        };
        let tok = match b {
            b'+' => {
                self.pos += 1;
                Tok::Plus
            }
            b'-' => {
                self.pos += 1;
                Tok::Minus
            }
            b'*' => {
                self.pos += 1;
                Tok::Star
            }
            b'^' => {
                self.pos += 1;
                Tok::Caret
            }
            b'(' => {
                self.pos += 1;
                Tok::LParen
            }
            b')' => {
                self.pos += 1;
                Tok::RParen
            }
            b'=' => {
                self.pos += 1;
                Tok::Eq
            }
            b'<' => {
                self.pos += 1;
                if self.peek() == Some(b'=') {
                    self.pos += 1;
                    Tok::Le
                } else {
                    Tok::Lt
                }
            }
            b'>' => {
                self.pos += 1;
                if self.peek() == Some(b'=') {
                    self.pos += 1;
                    Tok::Ge
                } else {
                    Tok::Gt
                }
            }
            b'/' => {
                self.pos += 1;
                if self.peek() == Some(b'\\') {
                    self.pos += 1;
                    Tok::And
                } else {
                    return Err(self.err("expected \"\\\\\" after \"/\""));
                }
            }
            b'\\' => {
                self.pos += 1;
                if self.peek() == Some(b'/') {
                    self.pos += 1;
                    Tok::Or
                } else {
                    return Err(self.err("expected \"/\" after \"\\\\\""));
                }
            }
            b'0'..=b'9' => {
                let numer = self.lex_int();
                // a fraction bar directly followed by digits continues the
                // literal; "/\" after a number is still a conjunction
                if self.peek() == Some(b'/')
                    && matches!(self.src.get(self.pos + 1), Some(d) if d.is_ascii_digit())
                {
                    self.pos += 1;
                    let denom = self.lex_int();
                    if denom == BigInt::from(0) {
                        return Err(self.err("literal with zero denominator"));
                    }
                    Tok::Num(Rat::new(numer, denom))
                } else {
                    Tok::Num(Rat::from_integer(numer))
                }
            }
            b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                let s = start;
                while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == b'_' || c == b'\'')
                {
                    self.pos += 1;
                }
                let word = std::str::from_utf8(&self.src[s..self.pos]).unwrap();
                if word == "not" {
                    Tok::Not
                } else {
                    Tok::Ident(word.to_string())
                }
            }
            _ => return Err(self.err(&format!("unexpected character {:?}", b as char))),
        };
        Ok(Some((start, tok)))
    }

    fn lex_int(&mut self) -> BigInt {
        let s = self.pos;
        while matches!(self.peek(), Some(d) if d.is_ascii_digit()) {
            self.pos += 1;
        }
        std::str::from_utf8(&self.src[s..self.pos])
            .unwrap()
            .parse()
            .unwrap()
    }
}

struct Parser<'a> {
    toks: &'a [(usize, Tok)],
    pos: usize,
    end: usize,
    vars: &'a mut VarTable,
}

impl<'a> Parser<'a> {
    fn err_at(&self, msg: &str) -> Error {
        let pos = self
            .toks
            .get(self.pos)
            .map(|&(p, _)| p)
            .unwrap_or(self.end);
        Error::Syntax {
            pos,
            msg: msg.to_string(),
        }
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn bump(&mut self) -> Option<&Tok> {
        let t = self.toks.get(self.pos).map(|(_, t)| t);
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == Some(t) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn formula(&mut self) -> Result<FormulaNode> {
        let mut parts = vec![self.disjunct()?];
        while self.eat(&Tok::Or) {
            parts.push(self.disjunct()?);
        }
        Ok(if parts.len() == 1 {
            parts.pop().unwrap()
        } else {
            FormulaNode::Disj(parts)
        })
    }

    fn disjunct(&mut self) -> Result<FormulaNode> {
        let mut parts = vec![self.conjunct()?];
        while self.eat(&Tok::And) {
            parts.push(self.conjunct()?);
        }
        Ok(if parts.len() == 1 {
            parts.pop().unwrap()
        } else {
            FormulaNode::Conj(parts)
        })
    }

    fn conjunct(&mut self) -> Result<FormulaNode> {
        if self.eat(&Tok::Not) {
            return Ok(FormulaNode::Neg(Box::new(self.conjunct()?)));
        }
        // "(" is ambiguous between a grouped formula and a parenthesized
        // expression opening an atom; try the atom first and keep whichever
        // parse gets further when both fail.
        let save = self.pos;
        let atom_err = match self.atom() {
            Ok(a) => return Ok(a),
            Err(e) => e,
        };
        let atom_reached = self.pos;
        self.pos = save;
        if self.peek() == Some(&Tok::LParen) {
            let save_vars_probe = self.pos;
            self.pos += 1;
            match self.formula() {
                Ok(f) if self.eat(&Tok::RParen) => return Ok(f),
                _ => {
                    self.pos = save_vars_probe;
                }
            }
        }
        self.pos = atom_reached;
        Err(atom_err)
    }

    fn atom(&mut self) -> Result<FormulaNode> {
        let lhs = self.expr()?;
        let cmp = match self.peek() {
            Some(t @ (Tok::Eq | Tok::Lt | Tok::Le | Tok::Gt | Tok::Ge)) => t.clone(),
            _ => return Err(self.err_at("expected comparison operator")),
        };
        self.pos += 1;
        let rhs = self.expr()?;
        let (kind, p) = match cmp {
            Tok::Eq => (AtomKind::Eq, lhs.sub(&rhs)),
            Tok::Gt => (AtomKind::Gt, lhs.sub(&rhs)),
            Tok::Ge => (AtomKind::Geq, lhs.sub(&rhs)),
            Tok::Lt => (AtomKind::Gt, rhs.sub(&lhs)),
            Tok::Le => (AtomKind::Geq, rhs.sub(&lhs)),
            _ => unreachable!(),
        };
        Ok(FormulaNode::Atom(kind, p))
    }

    fn expr(&mut self) -> Result<Polynomial> {
        let mut neg = false;
        if self.eat(&Tok::Minus) {
            neg = true;
        } else {
            self.eat(&Tok::Plus);
        }
        let mut acc = self.term()?;
        if neg {
            acc = acc.neg();
        }
        loop {
            if self.eat(&Tok::Plus) {
                let t = self.term()?;
                acc = acc.add(&t);
            } else if self.eat(&Tok::Minus) {
                let t = self.term()?;
                acc = acc.sub(&t);
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<Polynomial> {
        let mut acc = self.factor()?;
        while self.eat(&Tok::Star) {
            let f = self.factor()?;
            acc = acc.mul(&f);
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<Polynomial> {
        let base = self.primary()?;
        if self.eat(&Tok::Caret) {
            if self.peek() == Some(&Tok::Minus) {
                return Err(self.err_at("power with negative exponent"));
            }
            let e = match self.bump() {
                Some(Tok::Num(r)) if r.is_integer() => {
                    let n = r.to_integer();
                    u32::try_from(&n)
                        .map_err(|_| self.err_at("exponent out of range"))?
                }
                _ => return Err(self.err_at("expected nonnegative integer exponent")),
            };
            Ok(base.pow(e))
        } else {
            Ok(base)
        }
    }

    fn primary(&mut self) -> Result<Polynomial> {
        match self.peek().cloned() {
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                let idx = self.vars.intern(&name);
                Ok(Polynomial::var(idx))
            }
            Some(Tok::Num(r)) => {
                self.pos += 1;
                Ok(Polynomial::constant(r))
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(&Tok::RParen) {
                    return Err(self.err_at("expected \")\""));
                }
                Ok(e)
            }
            Some(Tok::Minus) => {
                self.pos += 1;
                Ok(self.primary()?.neg())
            }
            _ => Err(self.err_at("expected variable, number, or \"(\"")),
        }
    }
}

/// Parses the text format into a formula and its variable table.
pub fn parse_etr(text: &str) -> Result<(FormulaNode, VarTable)> {
    let toks = Lexer::lex(text)?;
    let mut vars = VarTable::new();
    if toks.is_empty() {
        return Ok((FormulaNode::truth(), vars));
    }
    let mut p = Parser {
        toks: &toks,
        pos: 0,
        end: text.len(),
        vars: &mut vars,
    };
    let f = p.formula()?;
    if p.pos != toks.len() {
        return Err(p.err_at("trailing input after formula"));
    }
    Ok((f, vars))
}

fn needs_parens_in_conj(f: &FormulaNode) -> bool {
    matches!(f, FormulaNode::Disj(_))
}

/// Renders a formula in the input grammar; the result re-parses to an equal
/// AST under the same variable table (modulo empty connectives).
pub fn print_formula(f: &FormulaNode, vars: &VarTable) -> String {
    let mut out = String::new();
    render(f, vars, &mut out);
    out
}

fn render(f: &FormulaNode, vars: &VarTable, out: &mut String) {
    match f {
        FormulaNode::Atom(kind, p) => {
            out.push_str(&format!("{}", p.display(vars.names())));
            out.push_str(match kind {
                AtomKind::Eq => " = 0",
                AtomKind::Geq => " >= 0",
                AtomKind::Gt => " > 0",
            });
        }
        FormulaNode::Conj(parts) => {
            for (i, part) in parts.iter().enumerate() {
                if i > 0 {
                    out.push_str(" /\\ ");
                }
                if needs_parens_in_conj(part) {
                    out.push('(');
                    render(part, vars, out);
                    out.push(')');
                } else {
                    render(part, vars, out);
                }
            }
        }
        FormulaNode::Disj(parts) => {
            for (i, part) in parts.iter().enumerate() {
                if i > 0 {
                    out.push_str(" \\/ ");
                }
                render(part, vars, out);
            }
        }
        FormulaNode::Neg(inner) => {
            out.push_str("not ");
            let group = matches!(**inner, FormulaNode::Conj(_) | FormulaNode::Disj(_));
            if group {
                out.push('(');
                render(inner, vars, out);
                out.push(')');
            } else {
                render(inner, vars, out);
            }
        }
    }
}
