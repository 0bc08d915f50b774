//! Text format for SFT specifications, patterns and offsets.
//!
//! ```text
//! dim = 2
//! torsion = []
//! alphabet = [0, 1]
//! window = [(0,0), (0,1), (1,0)]
//! forbidden = [
//!   {(0,0):1, (1,0):1},
//!   {(0,0):1, (0,1):1},
//! ]
//! ```
//!
//! Offsets are `(a,b;g)`: free coordinates, then torsion residues after `;`.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::group::{FiniteSet, GroupElement, GroupSpec};
use crate::pattern::{Alphabet, Pattern};
use crate::sft::SftSpec;

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Word(String),
    Punct(char),
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

const PUNCT: &str = "=[](){},;:";

fn tokenize(text: &str) -> Vec<Token> {
    let mut out = Vec::new();
    for (li, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("");
        let mut chars = line.char_indices().peekable();
        while let Some((ci, c)) = chars.next() {
            if c.is_whitespace() {
                continue;
            }
            if PUNCT.contains(c) {
                out.push(Token { tok: Tok::Punct(c), line: li + 1, col: ci + 1 });
                continue;
            }
            let mut word = String::from(c);
            while let Some(&(_, d)) = chars.peek() {
                if d.is_whitespace() || PUNCT.contains(d) {
                    break;
                }
                word.push(d);
                chars.next();
            }
            out.push(Token { tok: Tok::Word(word), line: li + 1, col: ci + 1 });
        }
    }
    out
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn new(text: &str) -> Self {
        Parser { toks: tokenize(text), pos: 0 }
    }

    fn err<T>(&self, msg: impl std::fmt::Display) -> Result<T> {
        match self.toks.get(self.pos).or_else(|| self.toks.last()) {
            Some(t) => Err(Error::Invalid(format!("line {}, column {}: {msg}", t.line, t.col))),
            None => Err(Error::Invalid(format!("empty input: {msg}"))),
        }
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Punct(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            self.err(format!("expected '{c}'"))
        }
    }

    fn word(&mut self) -> Result<String> {
        match self.peek() {
            Some(Tok::Word(w)) => {
                let w = w.clone();
                self.pos += 1;
                Ok(w)
            }
            _ => self.err("expected a name or number"),
        }
    }

    fn int(&mut self) -> Result<i64> {
        let w = self.word()?;
        match w.parse() {
            Ok(v) => Ok(v),
            Err(_) => {
                self.pos -= 1;
                self.err(format!("'{w}' is not an integer"))
            }
        }
    }

    /// `[item, item, ...]` with an optional trailing comma.
    fn list<T>(&mut self, mut item: impl FnMut(&mut Self) -> Result<T>) -> Result<Vec<T>> {
        self.expect('[')?;
        let mut out = Vec::new();
        while !self.eat(']') {
            out.push(item(self)?);
            if !self.eat(',') {
                self.expect(']')?;
                break;
            }
        }
        Ok(out)
    }

    fn int_run(&mut self) -> Result<Vec<i64>> {
        let mut v = Vec::new();
        if matches!(self.peek(), Some(Tok::Word(_))) {
            v.push(self.int()?);
            while self.eat(',') {
                v.push(self.int()?);
            }
        }
        Ok(v)
    }

    fn offset(&mut self, spec: &GroupSpec) -> Result<GroupElement> {
        self.expect('(')?;
        let free = self.int_run()?;
        let tors = if self.eat(';') { self.int_run()? } else { vec![0; spec.moduli().len()] };
        self.expect(')')?;
        match spec.element(free, tors) {
            Ok(g) => Ok(g),
            Err(e) => {
                self.pos -= 1;
                self.err(e)
            }
        }
    }

    fn symbol(&mut self, alphabet: &Alphabet) -> Result<u8> {
        let w = self.word()?;
        match alphabet.index(&w) {
            Some(s) => Ok(s),
            None => {
                self.pos -= 1;
                self.err(format!("symbol '{w}' is not in the alphabet"))
            }
        }
    }

    fn pattern(&mut self, spec: &GroupSpec, alphabet: &Alphabet) -> Result<Pattern> {
        self.expect('{')?;
        let mut pairs = Vec::new();
        while !self.eat('}') {
            let g = self.offset(spec)?;
            self.expect(':')?;
            pairs.push((g, self.symbol(alphabet)?));
            if !self.eat(',') {
                self.expect('}')?;
                break;
            }
        }
        match Pattern::from_pairs(pairs) {
            Ok(p) => Ok(p),
            Err(e) => {
                self.pos -= 1;
                self.err(e)
            }
        }
    }
}

/// Parses the text format into a validated SFT.
pub fn parse_spec(text: &str) -> Result<SftSpec> {
    let mut p = Parser::new(text);
    let mut dim = None;
    let mut torsion: Vec<u32> = Vec::new();
    let mut alphabet = None;
    let mut window_at = None;
    let mut forbidden_at = None;
    while !p.at_end() {
        let key = p.word()?;
        p.expect('=')?;
        match key.as_str() {
            "dim" => dim = Some(p.int()?),
            "torsion" => {
                torsion = p
                    .list(|p| {
                        let m = p.int()?;
                        if m < 1 || m > u32::MAX as i64 {
                            p.pos -= 1;
                            return p.err(format!("modulus {m} out of range"));
                        }
                        Ok(m as u32)
                    })?
            }
            "alphabet" => alphabet = Some(p.list(Parser::word)?),
            // Offsets need the group, so remember where the lists start.
            "window" => {
                window_at = Some(p.pos);
                skip_value(&mut p)?;
            }
            "forbidden" => {
                forbidden_at = Some(p.pos);
                skip_value(&mut p)?;
            }
            other => {
                p.pos -= 2;
                return p.err(format!("unknown key '{other}'"));
            }
        }
    }
    let missing = |k: &str| Error::Invalid(format!("missing key '{k}'"));
    let dim = dim.ok_or_else(|| missing("dim"))?;
    if !(0..=8).contains(&dim) {
        return Err(Error::Invalid(format!("dim = {dim} is out of range")));
    }
    let spec = GroupSpec::new(dim as usize, torsion)?;
    let alphabet = Alphabet::new(alphabet.ok_or_else(|| missing("alphabet"))?)?;
    p.pos = window_at.ok_or_else(|| missing("window"))?;
    let window = FiniteSet::new(p.list(|p| p.offset(&spec))?);
    p.pos = forbidden_at.ok_or_else(|| missing("forbidden"))?;
    let forbidden = p.list(|p| p.pattern(&spec, &alphabet))?;
    SftSpec::new(spec, alphabet, window, forbidden)
}

fn skip_value(p: &mut Parser) -> Result<()> {
    let mut depth = 0i32;
    loop {
        match p.peek() {
            None => return if depth == 0 { Ok(()) } else { p.err("unbalanced brackets") },
            Some(Tok::Punct('[' | '{' | '(')) => depth += 1,
            Some(Tok::Punct(']' | '}' | ')')) => depth -= 1,
            _ => {}
        }
        p.pos += 1;
        if depth == 0 {
            return Ok(());
        }
    }
}

pub fn format_offset(g: &GroupElement) -> String {
    g.to_string()
}

pub fn format_pattern(p: &Pattern, alphabet: &Alphabet) -> String {
    let body: Vec<String> = p.iter().map(|(g, s)| format!("{g}:{}", alphabet.name(s))).collect();
    format!("{{{}}}", body.join(", "))
}

/// Canonical text; `parse_spec(print_spec(x)) == x`.
pub fn print_spec(x: &SftSpec) -> String {
    let g = x.group();
    let mut out = String::new();
    let tors: Vec<String> = g.moduli().iter().map(u32::to_string).collect();
    let window: Vec<String> = x.window().iter().map(format_offset).collect();
    let _ = writeln!(out, "dim = {}", g.rank());
    let _ = writeln!(out, "torsion = [{}]", tors.join(", "));
    let _ = writeln!(out, "alphabet = [{}]", x.alphabet().names().join(", "));
    let _ = writeln!(out, "window = [{}]", window.join(", "));
    if x.forbidden().is_empty() {
        out.push_str("forbidden = []\n");
    } else {
        out.push_str("forbidden = [\n");
        for p in x.forbidden() {
            let _ = writeln!(out, "  {},", format_pattern(p, x.alphabet()));
        }
        out.push_str("]\n");
    }
    out
}

/// A single pattern `{(off):sym, ...}`.
pub fn parse_pattern(text: &str, spec: &GroupSpec, alphabet: &Alphabet) -> Result<Pattern> {
    let mut p = Parser::new(text);
    let pat = p.pattern(spec, alphabet)?;
    if !p.at_end() {
        return p.err("trailing input after the pattern");
    }
    Ok(pat)
}

/// Offsets separated by commas or whitespace, optionally inside `[...]`.
pub fn parse_offsets(text: &str, spec: &GroupSpec) -> Result<FiniteSet> {
    let mut p = Parser::new(text);
    let bracketed = p.eat('[');
    let mut out = Vec::new();
    while !p.at_end() && !(bracketed && p.peek() == Some(&Tok::Punct(']'))) {
        out.push(p.offset(spec)?);
        p.eat(',');
    }
    if bracketed {
        p.expect(']')?;
    }
    if !p.at_end() {
        return p.err("trailing input after the offsets");
    }
    Ok(FiniteSet::new(out))
}
