//! Concrete syntax.
//!
//! ```text
//! term    := '\' ident '.' term | app
//! app     := postfix+
//! postfix := atom ('[' ident '\' term ']')*
//! atom    := ident | 'bot' | '(' term ')'
//! ```
//!
//! `λ` is accepted in place of the leading backslash, and a trailing
//! abstraction may close an application without parentheses (`x \y.y`).
//! The printer only emits the strict grammar.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::term::{Name, Term};

pub const HOLE: &str = "@";

pub fn parse(text: &str) -> Result<Term> {
    Parser::new(text, false).parse_all()
}

/// Parses a term in which `@` may appear as a placeholder variable.
pub(crate) fn parse_with_hole(text: &str) -> Result<Term> {
    Parser::new(text, true).parse_all()
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Lambda,
    Backslash,
    Dot,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Ident(String),
    Bot,
    Hole,
    End,
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
    hole_ok: bool,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str, hole_ok: bool) -> Self {
        Parser { src, pos: 0, hole_ok }
    }

    fn err<T>(&self, offset: usize, message: impl Into<String>) -> Result<T> {
        Err(Error::Syntax { offset, message: message.into() })
    }

    fn skip_ws(&mut self) {
        let rest = &self.src[self.pos..];
        self.pos += rest.len() - rest.trim_start().len();
    }

    /// Next token and its byte offset, without consuming it.
    fn peek(&mut self) -> Result<(Tok, usize, usize)> {
        self.skip_ws();
        let start = self.pos;
        let rest = &self.src[start..];
        let Some(c) = rest.chars().next() else {
            return Ok((Tok::End, start, start));
        };
        let single = |t| Ok((t, start, start + c.len_utf8()));
        match c {
            '\\' => single(Tok::Backslash),
            'λ' => single(Tok::Lambda),
            '.' => single(Tok::Dot),
            '(' => single(Tok::LParen),
            ')' => single(Tok::RParen),
            '[' => single(Tok::LBracket),
            ']' => single(Tok::RBracket),
            '@' if self.hole_ok => single(Tok::Hole),
            c if c.is_ascii_alphabetic() || c == '_' => {
                let len = rest
                    .find(|ch: char| !(ch.is_ascii_alphanumeric() || ch == '_' || ch == '\''))
                    .unwrap_or(rest.len());
                let word = &rest[..len];
                let tok = if word == "bot" { Tok::Bot } else { Tok::Ident(word.to_string()) };
                Ok((tok, start, start + len))
            }
            other => self.err(start, format!("unexpected character `{other}`")),
        }
    }

    fn bump(&mut self) -> Result<(Tok, usize)> {
        let (t, start, end) = self.peek()?;
        self.pos = end;
        Ok((t, start))
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<()> {
        let (t, at) = self.bump()?;
        if t == want {
            Ok(())
        } else {
            self.err(at, format!("expected {what}"))
        }
    }

    fn ident(&mut self) -> Result<Name> {
        match self.bump()? {
            (Tok::Ident(x), _) => Ok(x),
            (_, at) => self.err(at, "expected a variable name"),
        }
    }

    fn parse_all(mut self) -> Result<Term> {
        let t = self.term()?;
        match self.peek()? {
            (Tok::End, ..) => Ok(t),
            (_, at, _) => self.err(at, "unexpected trailing input"),
        }
    }

    fn term(&mut self) -> Result<Term> {
        match self.peek()?.0 {
            Tok::Backslash | Tok::Lambda => self.lambda(),
            _ => self.app(),
        }
    }

    fn lambda(&mut self) -> Result<Term> {
        self.bump()?;
        let x = self.ident()?;
        self.expect(Tok::Dot, "`.` after the binder")?;
        let body = self.term()?;
        Ok(Term::Abs(x, Box::new(body)))
    }

    fn app(&mut self) -> Result<Term> {
        let mut acc = self.postfix()?;
        loop {
            match self.peek()?.0 {
                Tok::Ident(_) | Tok::Bot | Tok::LParen | Tok::Hole => {
                    let a = self.postfix()?;
                    acc = Term::App(Box::new(acc), Box::new(a));
                }
                Tok::Backslash | Tok::Lambda => {
                    let a = self.lambda()?;
                    return Ok(Term::App(Box::new(acc), Box::new(a)));
                }
                _ => return Ok(acc),
            }
        }
    }

    fn postfix(&mut self) -> Result<Term> {
        let mut t = self.atom()?;
        while self.peek()?.0 == Tok::LBracket {
            self.bump()?;
            let x = self.ident()?;
            self.expect(Tok::Backslash, "`\\` after the substituted variable")?;
            let u = self.term()?;
            self.expect(Tok::RBracket, "`]`")?;
            t = Term::Es(Box::new(t), x, Box::new(u));
        }
        Ok(t)
    }

    fn atom(&mut self) -> Result<Term> {
        match self.bump()? {
            (Tok::Ident(x), _) => Ok(Term::Var(x)),
            (Tok::Bot, _) => Ok(Term::Bot),
            (Tok::Hole, _) => Ok(Term::Var(HOLE.to_string())),
            (Tok::LParen, _) => {
                let t = self.term()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(t)
            }
            (Tok::End, at) => self.err(at, "unexpected end of input"),
            (_, at) => self.err(at, "expected a variable, `bot` or `(`"),
        }
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Slot {
    Top,
    Fun,
    Arg,
    EsBody,
}

/// Canonical text: binders are renamed `x0, x1, …` in the order they are
/// met, skipping names that occur free.
pub fn print(t: &Term) -> String {
    let mut pr = Printer { keep: false, free: t.free_vars(), next: 0, env: Vec::new(), out: String::new() };
    pr.go(t, Slot::Top);
    pr.out
}

/// Text that keeps the term's own binder names, so that separately printed
/// subterms still agree on their free variables.
pub fn print_named(t: &Term) -> String {
    let mut pr = Printer { keep: true, free: BTreeSet::new(), next: 0, env: Vec::new(), out: String::new() };
    pr.go(t, Slot::Top);
    pr.out
}

struct Printer {
    keep: bool,
    free: BTreeSet<Name>,
    next: usize,
    env: Vec<(Name, Name)>,
    out: String,
}

impl Printer {
    fn binder(&mut self, x: &Name) -> Name {
        if self.keep {
            x.clone()
        } else {
            self.fresh()
        }
    }

    fn fresh(&mut self) -> Name {
        loop {
            let n = format!("x{}", self.next);
            self.next += 1;
            if !self.free.contains(&n) {
                return n;
            }
        }
    }

    fn lookup(&self, x: &str) -> String {
        match self.env.iter().rev().find(|(o, _)| o == x) {
            Some((_, n)) => n.clone(),
            None => x.to_string(),
        }
    }

    fn go(&mut self, t: &Term, slot: Slot) {
        match t {
            Term::Var(x) => {
                let n = self.lookup(x);
                self.out.push_str(&n);
            }
            Term::Bot => self.out.push_str("bot"),
            Term::Abs(x, b) => {
                let paren = slot != Slot::Top;
                if paren {
                    self.out.push('(');
                }
                let n = self.binder(x);
                self.out.push('\\');
                self.out.push_str(&n);
                self.out.push('.');
                self.env.push((x.clone(), n));
                self.go(b, Slot::Top);
                self.env.pop();
                if paren {
                    self.out.push(')');
                }
            }
            Term::App(f, a) => {
                let paren = matches!(slot, Slot::Arg | Slot::EsBody);
                if paren {
                    self.out.push('(');
                }
                self.go(f, Slot::Fun);
                self.out.push(' ');
                self.go(a, Slot::Arg);
                if paren {
                    self.out.push(')');
                }
            }
            Term::Es(b, x, a) => {
                let n = self.binder(x);
                self.env.push((x.clone(), n.clone()));
                self.go(b, Slot::EsBody);
                self.env.pop();
                self.out.push('[');
                self.out.push_str(&n);
                self.out.push('\\');
                self.go(a, Slot::Top);
                self.out.push(']');
            }
        }
    }
}
