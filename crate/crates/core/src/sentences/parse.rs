//! Recursive-descent parser for existential sentences.
//!
//! ```text
//! sentence := "E" ident+ ":" disj
//! disj     := conj { "|" conj }
//! conj     := atom { "&" atom }
//! atom     := word "=" "1" | word "!=" "1" | "(" disj ")"
//! word     := factor { "*" factor | factor }
//! factor   := base [ "^" signed-int ]
//! base     := ident | "g" nat | "1" | "(" word ")" | "[" word "," word "]"
//! ```

use super::{Atom, ExistentialSentence, Word};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Int(u64),
    Colon,
    Pipe,
    Amp,
    Eq,
    Ne,
    Star,
    Caret,
    Minus,
    LParen,
    RParen,
    LBrack,
    RBrack,
    Comma,
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>> {
    let mut out = Vec::new();
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut i = 0;
    while i < chars.len() {
        let (pos, c) = chars[i];
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let single = match c {
            ':' => Some(Tok::Colon),
            '|' => Some(Tok::Pipe),
            '&' => Some(Tok::Amp),
            '=' => Some(Tok::Eq),
            '*' => Some(Tok::Star),
            '^' => Some(Tok::Caret),
            '-' => Some(Tok::Minus),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            '[' => Some(Tok::LBrack),
            ']' => Some(Tok::RBrack),
            ',' => Some(Tok::Comma),
            _ => None,
        };
        if let Some(t) = single {
            out.push((pos, t));
            i += 1;
        } else if c == '!' {
            if chars.get(i + 1).map(|x| x.1) == Some('=') {
                out.push((pos, Tok::Ne));
                i += 2;
            } else {
                return Err(syntax(pos, "expected '!='"));
            }
        } else if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].1.is_ascii_digit() {
                i += 1;
            }
            let s: String = chars[start..i].iter().map(|x| x.1).collect();
            let n = s.parse().map_err(|_| syntax(pos, "integer out of range"))?;
            out.push((pos, Tok::Int(n)));
        } else if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].1.is_alphanumeric() || chars[i].1 == '_') {
                i += 1;
            }
            out.push((pos, Tok::Ident(chars[start..i].iter().map(|x| x.1).collect())));
        } else {
            return Err(syntax(pos, &format!("unexpected character {c:?}")));
        }
    }
    Ok(out)
}

fn syntax(position: usize, message: &str) -> Error {
    Error::Syntax {
        position,
        message: message.to_string(),
    }
}

/// `g` followed by decimal digits names a constant.
fn constant_index(name: &str) -> Option<usize> {
    let digits = name.strip_prefix('g')?;
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    digits.parse().ok()
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.1)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |t| t.0)
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == Some(t) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, t: &Tok, what: &str) -> Result<()> {
        if self.eat(t) {
            Ok(())
        } else {
            Err(syntax(self.offset(), &format!("expected {what}")))
        }
    }

    fn sentence(&mut self) -> Result<ExistentialSentence> {
        match self.peek() {
            Some(Tok::Ident(s)) if s == "E" => self.pos += 1,
            _ => return Err(syntax(self.offset(), "expected 'E'")),
        }
        let mut vars = Vec::new();
        while let Some(Tok::Ident(name)) = self.peek() {
            let name = name.clone();
            if name == "E" || constant_index(&name).is_some() {
                return Err(syntax(self.offset(), &format!("{name} cannot be a bound variable")));
            }
            if vars.contains(&name) {
                return Err(syntax(self.offset(), &format!("variable {name} bound twice")));
            }
            vars.push(name);
            self.pos += 1;
        }
        if vars.is_empty() {
            return Err(syntax(self.offset(), "expected a bound variable"));
        }
        self.expect(&Tok::Colon, "':'")?;
        let body = self.disj()?;
        if self.pos != self.toks.len() {
            return Err(syntax(self.offset(), "unexpected trailing input"));
        }
        Ok(ExistentialSentence { vars, body })
    }

    fn disj(&mut self) -> Result<Vec<Vec<Atom>>> {
        let mut out = vec![self.conj()?];
        while self.eat(&Tok::Pipe) {
            out.push(self.conj()?);
        }
        Ok(out)
    }

    fn conj(&mut self) -> Result<Vec<Atom>> {
        let mut out = vec![self.atom()?];
        while self.eat(&Tok::Amp) {
            out.push(self.atom()?);
        }
        Ok(out)
    }

    fn atom(&mut self) -> Result<Atom> {
        let start = self.pos;
        if self.peek() == Some(&Tok::LParen) {
            // "(" disj ")" unless the parenthesis opens a word.
            self.pos += 1;
            if let Ok(d) = self.disj() {
                if self.eat(&Tok::RParen) && !self.continues_word() {
                    return Ok(Atom::Group(d));
                }
            }
            self.pos = start;
        }
        let w = self.word()?;
        let equation = if self.eat(&Tok::Eq) {
            true
        } else if self.eat(&Tok::Ne) {
            false
        } else {
            return Err(syntax(self.offset(), "expected '=' or '!='"));
        };
        if !self.eat(&Tok::Int(1)) {
            return Err(syntax(self.offset(), "expected '1'"));
        }
        Ok(if equation { Atom::Eq(w) } else { Atom::Ne(w) })
    }

    /// After a parenthesized group, tokens that would extend it into a word.
    fn continues_word(&self) -> bool {
        matches!(
            self.peek(),
            Some(Tok::Eq | Tok::Ne | Tok::Star | Tok::Caret | Tok::Ident(_) | Tok::Int(_) | Tok::LParen | Tok::LBrack)
        )
    }

    fn starts_factor(&self) -> bool {
        matches!(
            self.peek(),
            Some(Tok::Ident(_) | Tok::LParen | Tok::LBrack | Tok::Int(1))
        )
    }

    fn word(&mut self) -> Result<Word> {
        let mut factors = vec![self.factor()?];
        loop {
            if self.eat(&Tok::Star) {
                factors.push(self.factor()?);
            } else if self.starts_factor() {
                factors.push(self.factor()?);
            } else {
                break;
            }
        }
        Ok(if factors.len() == 1 {
            factors.pop().expect("one factor")
        } else {
            Word::Product(factors)
        })
    }

    fn factor(&mut self) -> Result<Word> {
        let base = self.base()?;
        if self.eat(&Tok::Caret) {
            let negative = self.eat(&Tok::Minus);
            let at = self.offset();
            let n = match self.peek() {
                Some(Tok::Int(n)) => *n,
                _ => return Err(syntax(at, "expected an integer exponent")),
            };
            self.pos += 1;
            let n = i64::try_from(n).map_err(|_| syntax(at, "exponent out of range"))?;
            Ok(Word::Pow(Box::new(base), if negative { -n } else { n }))
        } else {
            Ok(base)
        }
    }

    fn base(&mut self) -> Result<Word> {
        let at = self.offset();
        match self.peek().cloned() {
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                if name == "E" {
                    return Err(syntax(at, "quantifiers may only appear in prenex position"));
                }
                Ok(match constant_index(&name) {
                    Some(i) => Word::Const(i),
                    None => Word::Var(name),
                })
            }
            Some(Tok::Int(1)) => {
                self.pos += 1;
                Ok(Word::Product(Vec::new()))
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let w = self.word()?;
                self.expect(&Tok::RParen, "')'")?;
                Ok(w)
            }
            Some(Tok::LBrack) => {
                self.pos += 1;
                let a = self.word()?;
                self.expect(&Tok::Comma, "','")?;
                let b = self.word()?;
                self.expect(&Tok::RBrack, "']'")?;
                Ok(Word::Comm(Box::new(a), Box::new(b)))
            }
            _ => Err(syntax(at, "expected a word")),
        }
    }
}

pub fn parse_sentence(text: &str) -> Result<ExistentialSentence> {
    let toks = lex(text)?;
    Parser {
        toks,
        pos: 0,
        end: text.len(),
    }
    .sentence()
}

pub fn parse_word(text: &str) -> Result<Word> {
    let toks = lex(text)?;
    let mut p = Parser {
        toks,
        pos: 0,
        end: text.len(),
    };
    let w = p.word()?;
    if p.pos != p.toks.len() {
        return Err(syntax(p.offset(), "unexpected trailing input"));
    }
    Ok(w)
}
