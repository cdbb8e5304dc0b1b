//! Parser for the `.bt` tree format.
//!
//! ```text
//! tree    := sexpr
//! sexpr   := "(" keyword attr* child* ")"
//! keyword := reactive-sequence | sequence-with-memory | reactive-fallback
//!          | fallback-with-memory | reactive-parallel | parallel-with-memory
//!          | switch | inverter | force | retry-until | action | condition
//! attr    := ":" ident (integer | string | success | failure)
//! ```
//!
//! `action` and `condition` take one bare name token before their attrs,
//! which become leaf parameters. Comments run from `;` to end of line.
//! Every node and every error carries a `line:col` position.

use std::fmt;

use thiserror::Error;

use crate::ast::{AttrValue, Params, Pos, SpecKind, SpecNode};
use crate::node::Outcome;

#[derive(Debug, Clone, PartialEq, Error)]
#[error("{pos}: {kind}")]
pub struct ParseError {
    pub pos: Pos,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ParseErrorKind {
    UnknownKeyword(String),
    MissingAttr { keyword: &'static str, attr: &'static str },
    DuplicateAttr(String),
    UnknownAttr(String),
    AttrType { attr: String, expected: &'static str },
    MissingAttrValue(String),
    MissingLeafName(&'static str),
    UnbalancedParen,
    UnexpectedToken(String),
    TrailingInput,
    EmptyInput,
    UnterminatedString,
    BadEscape(char),
    BadInteger(String),
    StrayChar(char),
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use ParseErrorKind::*;
        match self {
            UnknownKeyword(k) => write!(f, "unknown keyword '{k}'"),
            MissingAttr { keyword, attr } => {
                write!(f, "'{keyword}' is missing required attribute :{attr}")
            }
            DuplicateAttr(a) => write!(f, "duplicate attribute :{a}"),
            UnknownAttr(a) => write!(f, "unknown attribute :{a}"),
            AttrType { attr, expected } => write!(f, ":{attr} expects {expected}"),
            MissingAttrValue(a) => write!(f, "attribute :{a} has no value"),
            MissingLeafName(k) => write!(f, "'{k}' needs a name"),
            UnbalancedParen => write!(f, "unbalanced parenthesis"),
            UnexpectedToken(t) => write!(f, "unexpected {t}"),
            TrailingInput => write!(f, "trailing input after the tree"),
            EmptyInput => write!(f, "no tree in input"),
            UnterminatedString => write!(f, "unterminated string"),
            BadEscape(c) => write!(f, "unsupported escape '\\{c}'"),
            BadInteger(s) => write!(f, "malformed integer '{s}'"),
            StrayChar(c) => write!(f, "stray character '{c}'"),
        }
    }
}

fn err(pos: Pos, kind: ParseErrorKind) -> ParseError {
    ParseError { pos, kind }
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    LParen,
    RParen,
    Symbol(String),
    Attr(String),
    Int(i64),
    Str(String),
}

impl Token {
    fn describe(&self) -> String {
        match self {
            Token::LParen => "'('".into(),
            Token::RParen => "')'".into(),
            Token::Symbol(s) => format!("symbol '{s}'"),
            Token::Attr(a) => format!("attribute :{a}"),
            Token::Int(i) => format!("integer {i}"),
            Token::Str(_) => "string".into(),
        }
    }
}

struct Lexer<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: u32,
    col: u32,
}

impl<'a> Lexer<'a> {
    fn new(text: &'a str) -> Self {
        Lexer { chars: text.chars().peekable(), line: 1, col: 1 }
    }

    fn pos(&self) -> Pos {
        Pos::new(self.line, self.col)
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn tokens(mut self) -> Result<Vec<(Pos, Token)>, ParseError> {
        let mut out = Vec::new();
        loop {
            // Skip whitespace and comments.
            loop {
                match self.chars.peek() {
                    Some(c) if c.is_whitespace() => {
                        self.bump();
                    }
                    Some(';') => {
                        while let Some(c) = self.bump() {
                            if c == '\n' {
                                break;
                            }
                        }
                    }
                    _ => break,
                }
            }
            let pos = self.pos();
            let Some(&c) = self.chars.peek() else { break };
            match c {
                '(' => {
                    self.bump();
                    out.push((pos, Token::LParen));
                }
                ')' => {
                    self.bump();
                    out.push((pos, Token::RParen));
                }
                '"' => {
                    self.bump();
                    out.push((pos, Token::Str(self.string(pos)?)));
                }
                ':' => {
                    self.bump();
                    let name = self.bare_word();
                    if name.is_empty() {
                        return Err(err(pos, ParseErrorKind::StrayChar(':')));
                    }
                    out.push((pos, Token::Attr(name)));
                }
                c if c == '-' || c.is_ascii_digit() => {
                    let word = self.bare_word();
                    let value = word
                        .parse::<i64>()
                        .map_err(|_| err(pos, ParseErrorKind::BadInteger(word.clone())))?;
                    out.push((pos, Token::Int(value)));
                }
                c if is_ident_start(c) => {
                    let word = self.bare_word();
                    out.push((pos, Token::Symbol(word)));
                }
                c => return Err(err(pos, ParseErrorKind::StrayChar(c))),
            }
        }
        Ok(out)
    }

    fn bare_word(&mut self) -> String {
        let mut word = String::new();
        while let Some(&c) = self.chars.peek() {
            if is_ident_continue(c) {
                word.push(c);
                self.bump();
            } else {
                break;
            }
        }
        word
    }

    fn string(&mut self, start: Pos) -> Result<String, ParseError> {
        let mut s = String::new();
        loop {
            let Some(c) = self.bump() else {
                return Err(err(start, ParseErrorKind::UnterminatedString));
            };
            match c {
                '"' => return Ok(s),
                '\\' => {
                    let Some(e) = self.bump() else {
                        return Err(err(start, ParseErrorKind::UnterminatedString));
                    };
                    s.push(match e {
                        '\\' => '\\',
                        '"' => '"',
                        'n' => '\n',
                        't' => '\t',
                        'r' => '\r',
                        other => return Err(err(start, ParseErrorKind::BadEscape(other))),
                    });
                }
                other => s.push(other),
            }
        }
    }
}

fn is_ident_start(c: char) -> bool {
    c.is_alphabetic() || c == '_'
}

fn is_ident_continue(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '-'
}

struct Parser {
    tokens: Vec<(Pos, Token)>,
    at: usize,
    end: Pos,
}

impl Parser {
    fn peek(&self) -> Option<&(Pos, Token)> {
        self.tokens.get(self.at)
    }

    fn next(&mut self) -> Option<(Pos, Token)> {
        let t = self.tokens.get(self.at).cloned();
        if t.is_some() {
            self.at += 1;
        }
        t
    }

    fn node(&mut self) -> Result<SpecNode, ParseError> {
        let (open_pos, open) = self.next().ok_or(err(self.end, ParseErrorKind::UnbalancedParen))?;
        if open != Token::LParen {
            return Err(err(open_pos, ParseErrorKind::UnexpectedToken(open.describe())));
        }
        let (kw_pos, kw) = self.next().ok_or(err(open_pos, ParseErrorKind::UnbalancedParen))?;
        let Token::Symbol(keyword) = kw else {
            return Err(err(kw_pos, ParseErrorKind::UnexpectedToken(kw.describe())));
        };

        let node_pos = open_pos;
        let mut attrs: Vec<(Pos, String, AttrValue)> = Vec::new();
        let mut children: Vec<SpecNode> = Vec::new();

        // Leaves take their bare name before anything else.
        let leaf_name = match keyword.as_str() {
            "action" | "condition" => match self.peek() {
                Some((_, Token::Symbol(_))) => {
                    let Some((_, Token::Symbol(name))) = self.next() else { unreachable!() };
                    Some(name)
                }
                _ => {
                    let kw: &'static str = if keyword == "action" { "action" } else { "condition" };
                    return Err(err(node_pos, ParseErrorKind::MissingLeafName(kw)));
                }
            },
            _ => None,
        };

        loop {
            match self.peek() {
                None => return Err(err(node_pos, ParseErrorKind::UnbalancedParen)),
                Some((_, Token::RParen)) => {
                    self.next();
                    break;
                }
                Some((_, Token::LParen)) => {
                    children.push(self.node()?);
                }
                Some((_, Token::Attr(_))) => {
                    let Some((attr_pos, Token::Attr(name))) = self.next() else { unreachable!() };
                    if attrs.iter().any(|(_, n, _)| *n == name) {
                        return Err(err(attr_pos, ParseErrorKind::DuplicateAttr(name)));
                    }
                    let value = self.attr_value(attr_pos, &name)?;
                    attrs.push((attr_pos, name, value));
                }
                Some(&(pos, ref other)) => {
                    return Err(err(pos, ParseErrorKind::UnexpectedToken(other.describe())));
                }
            }
        }

        let kind = build_kind(&keyword, kw_pos, leaf_name, attrs)?;
        Ok(SpecNode { kind, pos: node_pos, children })
    }

    fn attr_value(&mut self, attr_pos: Pos, name: &str) -> Result<AttrValue, ParseError> {
        match self.next() {
            Some((_, Token::Int(i))) => Ok(AttrValue::Int(i)),
            Some((_, Token::Str(s))) => Ok(AttrValue::Str(s)),
            Some((_, Token::Symbol(s))) if s == "success" => {
                Ok(AttrValue::Outcome(Outcome::Success))
            }
            Some((_, Token::Symbol(s))) if s == "failure" => {
                Ok(AttrValue::Outcome(Outcome::Failure))
            }
            Some((pos, other)) => Err(err(pos, ParseErrorKind::UnexpectedToken(other.describe()))),
            None => Err(err(attr_pos, ParseErrorKind::MissingAttrValue(name.to_owned()))),
        }
    }
}

fn build_kind(
    keyword: &str,
    kw_pos: Pos,
    leaf_name: Option<String>,
    attrs: Vec<(Pos, String, AttrValue)>,
) -> Result<SpecKind, ParseError> {
    // Closed attribute sets for inner nodes; leaves keep an open param map.
    fn take_only(
        keyword: &'static str,
        wanted: Option<&'static str>,
        attrs: Vec<(Pos, String, AttrValue)>,
        kw_pos: Pos,
    ) -> Result<Option<(Pos, AttrValue)>, ParseError> {
        let mut found = None;
        for (pos, name, value) in attrs {
            if Some(name.as_str()) == wanted {
                found = Some((pos, value));
            } else {
                return Err(err(pos, ParseErrorKind::UnknownAttr(name)));
            }
        }
        match (found, wanted) {
            (Some(f), _) => Ok(Some(f)),
            (None, None) => Ok(None),
            (None, Some(attr)) => Err(err(kw_pos, ParseErrorKind::MissingAttr { keyword, attr })),
        }
    }

    let int_attr = |attr: &'static str, got: (Pos, AttrValue)| match got.1 {
        AttrValue::Int(i) => Ok(i),
        _ => Err(err(got.0, ParseErrorKind::AttrType { attr: attr.into(), expected: "an integer" })),
    };
    let str_attr = |attr: &'static str, got: (Pos, AttrValue)| match got.1 {
        AttrValue::Str(s) => Ok(s),
        _ => Err(err(got.0, ParseErrorKind::AttrType { attr: attr.into(), expected: "a string" })),
    };
    let outcome_attr = |attr: &'static str, got: (Pos, AttrValue)| match got.1 {
        AttrValue::Outcome(o) => Ok(o),
        _ => Err(err(
            got.0,
            ParseErrorKind::AttrType { attr: attr.into(), expected: "success or failure" },
        )),
    };

    Ok(match keyword {
        "reactive-sequence" => {
            take_only("reactive-sequence", None, attrs, kw_pos)?;
            SpecKind::ReactiveSequence
        }
        "reactive-fallback" => {
            take_only("reactive-fallback", None, attrs, kw_pos)?;
            SpecKind::ReactiveFallback
        }
        "sequence-with-memory" => {
            take_only("sequence-with-memory", None, attrs, kw_pos)?;
            SpecKind::SequenceWithMemory
        }
        "fallback-with-memory" => {
            take_only("fallback-with-memory", None, attrs, kw_pos)?;
            SpecKind::FallbackWithMemory
        }
        "reactive-parallel" => {
            let got = take_only("reactive-parallel", Some("threshold"), attrs, kw_pos)?.unwrap();
            SpecKind::ReactiveParallel { threshold: int_attr("threshold", got)? }
        }
        "parallel-with-memory" => {
            let got = take_only("parallel-with-memory", Some("threshold"), attrs, kw_pos)?.unwrap();
            SpecKind::ParallelWithMemory { threshold: int_attr("threshold", got)? }
        }
        "switch" => {
            let got = take_only("switch", Some("key"), attrs, kw_pos)?.unwrap();
            SpecKind::Switch { key: str_attr("key", got)? }
        }
        "inverter" => {
            take_only("inverter", None, attrs, kw_pos)?;
            SpecKind::Inverter
        }
        "force" => {
            let got = take_only("force", Some("what"), attrs, kw_pos)?.unwrap();
            SpecKind::Force { what: outcome_attr("what", got)? }
        }
        "retry-until" => {
            let got = take_only("retry-until", Some("what"), attrs, kw_pos)?.unwrap();
            SpecKind::RetryUntil { what: outcome_attr("what", got)? }
        }
        "action" | "condition" => {
            let mut params = Params::new();
            for (_, name, value) in attrs {
                params.insert(name, value);
            }
            let name = leaf_name.expect("leaf name parsed above");
            if keyword == "action" {
                SpecKind::Action { name, params }
            } else {
                SpecKind::Condition { name, params }
            }
        }
        other => return Err(err(kw_pos, ParseErrorKind::UnknownKeyword(other.to_owned()))),
    })
}

/// Parses one tree from `text`. Trailing non-comment input is an error.
pub fn parse_tree(text: &str) -> Result<SpecNode, ParseError> {
    let tokens = Lexer::new(text).tokens()?;
    let end = tokens.last().map(|(p, _)| *p).unwrap_or(Pos::new(1, 1));
    let mut parser = Parser { tokens, at: 0, end };
    if parser.peek().is_none() {
        return Err(err(Pos::new(1, 1), ParseErrorKind::EmptyInput));
    }
    let node = parser.node()?;
    if let Some((pos, _)) = parser.peek() {
        return Err(err(*pos, ParseErrorKind::TrailingInput));
    }
    Ok(node)
}
