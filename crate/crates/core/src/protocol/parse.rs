//! Line-oriented protocol text format.
//!
//! ```text
//! # comment
//! dim 1
//! scouts 1
//! states A
//! origin 0
//! init 1 A
//! trans A * -> 1/2 A (+1) | 1/2 A (-1)
//! ```
//!
//! Patterns are `*`, `{}` or `{s1,s2,...}`; moves are `(dx)` or `(dx,dy)`. In
//! one dimension a bare signed integer is also accepted as a move.

use super::validate::{DraftOutcome, DraftPattern, DraftRule, ProtocolDraft};
use super::{pattern_key, ProtocolError, ScoutProtocol};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
struct Token<'a> {
    text: &'a str,
    col: usize,
}

fn tokenize(line: &str) -> Vec<Token<'_>> {
    let line = match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    };
    let mut out = Vec::new();
    let mut start: Option<usize> = None;
    let col_of = |byte: usize| line[..byte].chars().count() + 1;
    for (i, ch) in line.char_indices() {
        let single = "{}(),|".contains(ch);
        if ch.is_whitespace() || single {
            if let Some(s) = start.take() {
                out.push(Token { text: &line[s..i], col: col_of(s) });
            }
            if single {
                out.push(Token { text: &line[i..i + ch.len_utf8()], col: col_of(i) });
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        out.push(Token { text: &line[s..], col: col_of(s) });
    }
    out
}

struct Cursor<'a> {
    toks: Vec<Token<'a>>,
    pos: usize,
    line: usize,
    end_col: usize,
}

impl<'a> Cursor<'a> {
    fn err(&self, col: usize, message: impl Into<String>) -> ProtocolError {
        ProtocolError::Syntax { line: self.line, col, message: message.into() }
    }

    fn peek(&self) -> Option<&Token<'a>> {
        self.toks.get(self.pos)
    }

    fn next(&mut self, what: &str) -> Result<Token<'a>, ProtocolError> {
        match self.toks.get(self.pos) {
            Some(t) => {
                self.pos += 1;
                Ok(t.clone())
            }
            None => Err(self.err(self.end_col, format!("expected {what}, found end of line"))),
        }
    }

    fn expect(&mut self, text: &str) -> Result<(), ProtocolError> {
        let t = self.next(&format!("`{text}`"))?;
        if t.text != text {
            return Err(self.err(t.col, format!("expected `{text}`, found `{}`", t.text)));
        }
        Ok(())
    }

    fn int(&mut self, what: &str) -> Result<i64, ProtocolError> {
        let t = self.next(what)?;
        parse_int(t.text).ok_or_else(|| self.err(t.col, format!("expected {what}, found `{}`", t.text)))
    }

    fn finish(&self) -> Result<(), ProtocolError> {
        match self.peek() {
            Some(t) => Err(self.err(t.col, format!("unexpected `{}`", t.text))),
            None => Ok(()),
        }
    }
}

fn parse_int(s: &str) -> Option<i64> {
    s.strip_prefix('+').unwrap_or(s).parse().ok().filter(|_| !s.starts_with("+-"))
}

/// Parses protocol text without checking semantic invariants.
pub fn parse_draft(text: &str) -> Result<ProtocolDraft, ProtocolError> {
    let mut dim: Option<i64> = None;
    let mut scouts: Option<i64> = None;
    let mut states: Option<Vec<String>> = None;
    let mut draft = ProtocolDraft { dim: 0, scouts: 0, states: vec![], origin: None, init: vec![], rules: vec![] };

    for (idx, raw) in text.lines().enumerate() {
        let toks = tokenize(raw);
        if toks.is_empty() {
            continue;
        }
        let end_col = raw.chars().count() + 1;
        let mut c = Cursor { toks, pos: 0, line: idx + 1, end_col };
        let kw = c.next("keyword")?;
        let dup = |c: &Cursor, what: &str| Err(c.err(kw.col, format!("`{what}` declared twice")));
        match kw.text {
            "dim" => {
                if dim.is_some() {
                    return dup(&c, "dim");
                }
                dim = Some(c.int("dimension")?);
            }
            "scouts" => {
                if scouts.is_some() {
                    return dup(&c, "scouts");
                }
                scouts = Some(c.int("scout count")?);
            }
            "states" => {
                if states.is_some() {
                    return dup(&c, "states");
                }
                let mut names = Vec::new();
                while let Some(t) = c.peek() {
                    if t.text.len() == 1 && "{}(),|".contains(t.text) {
                        return Err(c.err(t.col, format!("unexpected `{}` in state list", t.text)));
                    }
                    names.push(t.text.to_string());
                    c.pos += 1;
                }
                states = Some(names);
            }
            "origin" => {
                if draft.origin.is_some() {
                    return dup(&c, "origin");
                }
                let mut coords = vec![c.int("coordinate")?];
                while c.peek().is_some() {
                    coords.push(c.int("coordinate")?);
                }
                draft.origin = Some(coords);
            }
            "init" => {
                let scout = c.int("scout index")?;
                let state = c.next("state name")?.text.to_string();
                draft.init.push((scout, state));
            }
            "trans" => draft.rules.push(parse_rule(&mut c)?),
            other => return Err(c.err(kw.col, format!("unknown keyword `{other}`"))),
        }
        c.finish()?;
    }
    let missing = |what: &str| ProtocolError::Syntax { line: 1, col: 1, message: format!("missing `{what}` declaration") };
    draft.dim = dim.ok_or_else(|| missing("dim"))?;
    draft.scouts = scouts.ok_or_else(|| missing("scouts"))?;
    draft.states = states.ok_or_else(|| missing("states"))?;
    Ok(draft)
}

fn parse_rule(c: &mut Cursor) -> Result<DraftRule, ProtocolError> {
    let line = c.line;
    let from = c.next("state name")?.text.to_string();
    let p = c.next("pattern")?;
    let pattern = match p.text {
        "*" => DraftPattern::Wildcard,
        "{" => {
            let mut names = Vec::new();
            if c.peek().map(|t| t.text) == Some("}") {
                c.pos += 1;
            } else {
                loop {
                    let t = c.next("state name")?;
                    names.push(t.text.to_string());
                    let sep = c.next("`,` or `}`")?;
                    match sep.text {
                        "," => continue,
                        "}" => break,
                        other => return Err(c.err(sep.col, format!("expected `,` or `}}`, found `{other}`"))),
                    }
                }
            }
            DraftPattern::Exact(names)
        }
        other => return Err(c.err(p.col, format!("expected pattern `*` or `{{...}}`, found `{other}`"))),
    };
    c.expect("->")?;
    let mut outcomes = Vec::new();
    loop {
        let pt = c.next("probability")?;
        let prob: Scalar = pt.text.parse().map_err(|_| c.err(pt.col, format!("malformed probability `{}`", pt.text)))?;
        let to = c.next("state name")?.text.to_string();
        let mv = parse_move(c)?;
        outcomes.push(DraftOutcome { prob, to, mv });
        match c.peek() {
            Some(t) if t.text == "|" => c.pos += 1,
            _ => break,
        }
    }
    Ok(DraftRule { from, pattern, outcomes, line })
}

fn parse_move(c: &mut Cursor) -> Result<Vec<i64>, ProtocolError> {
    let t = c.next("move")?;
    if t.text != "(" {
        return parse_int(t.text).map(|v| vec![v]).ok_or_else(|| c.err(t.col, format!("expected move, found `{}`", t.text)));
    }
    let mut comps = vec![c.int("move component")?];
    loop {
        let sep = c.next("`,` or `)`")?;
        match sep.text {
            "," => comps.push(c.int("move component")?),
            ")" => return Ok(comps),
            other => return Err(c.err(sep.col, format!("expected `,` or `)`, found `{other}`"))),
        }
    }
}

/// Parses and validates protocol text.
pub fn parse_protocol(text: &str) -> Result<ScoutProtocol, ProtocolError> {
    ScoutProtocol::from_draft(&parse_draft(text)?)
}

pub(super) fn serialize(p: &ScoutProtocol) -> String {
    let mut s = String::new();
    s.push_str(&format!("dim {}\nscouts {}\n", p.dim, p.scouts()));
    s.push_str(&format!("states {}\n", p.states.join(" ")));
    let origin: Vec<String> = p.origin[..p.dim].iter().map(|v| v.to_string()).collect();
    s.push_str(&format!("origin {}\n", origin.join(" ")));
    for (i, q) in p.initial_states.iter().enumerate() {
        s.push_str(&format!("init {} {}\n", i + 1, p.state_name(*q)));
    }
    for r in &p.rules {
        let rows: Vec<String> = r.outcomes.iter().map(|o| format!("{} {} {}", o.prob, p.state_name(o.to), o.mv.format(p.dim))).collect();
        s.push_str(&format!("trans {} {} -> {}\n", p.state_name(r.from), pattern_key(&p.states, r.pattern), rows.join(" | ")));
    }
    s
}
