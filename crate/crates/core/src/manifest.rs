//! The manifest text format read and written by the command-line tool.
//!
//! ```text
//! # comment
//! kind = "potential"
//! chart = ["t1", "t2"]
//!
//! [options]
//! domain = "real"
//! points = 20
//!
//! [structure]
//! metric = [["0", "1"], ["1", "0"]]
//! potential = "t1^2*t2/2"
//! unit = 0
//! ```
//!
//! A document is a list of top-level entries followed by `[section]` blocks. An entry is
//! `key = value` where a value is a double-quoted string (escapes `\"` and `\\`), a decimal
//! integer, or a bracketed list of values; lists may span lines and allow a trailing comma.
//! Keys and section names are `[A-Za-z_][A-Za-z0-9_.-]*`. Repeated keys or sections are errors.
//! Expressions are strings in the scalar grammar.
//!
//! The printer is canonical: `kind` first, remaining top-level keys and all sections and keys in
//! lexicographic order, lists of lists one element per line. Printing a parsed document and
//! parsing it again is the identity.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};

use thiserror::Error;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Value {
    Str(String),
    Int(i64),
    List(Vec<Value>),
}

impl Value {
    pub fn str(s: impl Into<String>) -> Value {
        Value::Str(s.into())
    }

    pub fn list<T: Into<Value>>(xs: impl IntoIterator<Item = T>) -> Value {
        Value::List(xs.into_iter().map(Into::into).collect())
    }

    fn kind(&self) -> &'static str {
        match self {
            Value::Str(_) => "string",
            Value::Int(_) => "integer",
            Value::List(_) => "list",
        }
    }
}

impl From<&str> for Value {
    fn from(s: &str) -> Value {
        Value::Str(s.to_string())
    }
}

impl From<String> for Value {
    fn from(s: String) -> Value {
        Value::Str(s)
    }
}

impl From<i64> for Value {
    fn from(n: i64) -> Value {
        Value::Int(n)
    }
}

impl From<Vec<Value>> for Value {
    fn from(xs: Vec<Value>) -> Value {
        Value::List(xs)
    }
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum ManifestError {
    #[error("{line}:{col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("{0}")]
    Missing(String),
    #[error("{0}")]
    Type(String),
}

pub type Section = BTreeMap<String, Value>;

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Manifest {
    pub top: Section,
    pub sections: BTreeMap<String, Section>,
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
    line: usize,
    col: usize,
}

impl<'a> Lexer<'a> {
    fn err<T>(&self, msg: impl Into<String>) -> Result<T, ManifestError> {
        Err(ManifestError::Syntax { line: self.line, col: self.col, msg: msg.into() })
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<u8> {
        let c = self.peek()?;
        self.pos += 1;
        if c == b'\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    /// Skip blanks and comments; newlines too when `lines` is set.
    fn skip(&mut self, lines: bool) {
        while let Some(c) = self.peek() {
            match c {
                b' ' | b'\t' | b'\r' => {
                    self.bump();
                }
                b'\n' if lines => {
                    self.bump();
                }
                b'#' => {
                    while self.peek().is_some_and(|c| c != b'\n') {
                        self.bump();
                    }
                }
                _ => break,
            }
        }
    }

    fn end_of_line(&mut self) -> Result<(), ManifestError> {
        self.skip(false);
        match self.peek() {
            None => Ok(()),
            Some(b'\n') => {
                self.bump();
                Ok(())
            }
            Some(c) => self.err(format!("unexpected `{}` after value", c as char)),
        }
    }

    fn ident(&mut self) -> Result<String, ManifestError> {
        let start = self.pos;
        match self.peek() {
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => {}
            _ => return self.err("expected a name"),
        }
        while self.peek().is_some_and(|c| c.is_ascii_alphanumeric() || matches!(c, b'_' | b'.' | b'-')) {
            self.bump();
        }
        Ok(String::from_utf8_lossy(&self.src[start..self.pos]).into_owned())
    }

    fn value(&mut self) -> Result<Value, ManifestError> {
        match self.peek() {
            Some(b'"') => self.string(),
            Some(b'[') => {
                self.bump();
                let mut xs = Vec::new();
                loop {
                    self.skip(true);
                    if self.peek() == Some(b']') {
                        self.bump();
                        return Ok(Value::List(xs));
                    }
                    xs.push(self.value()?);
                    self.skip(true);
                    match self.peek() {
                        Some(b',') => {
                            self.bump();
                        }
                        Some(b']') => {}
                        None => return self.err("unterminated list"),
                        Some(c) => return self.err(format!("expected `,` or `]`, found `{}`", c as char)),
                    }
                }
            }
            Some(c) if c == b'-' || c.is_ascii_digit() => {
                let start = self.pos;
                self.bump();
                while self.peek().is_some_and(|c| c.is_ascii_digit()) {
                    self.bump();
                }
                let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
                match text.parse::<i64>() {
                    Ok(n) => Ok(Value::Int(n)),
                    Err(_) => self.err(format!("bad integer `{text}` (use a string for rationals and floats)")),
                }
            }
            None => self.err("expected a value"),
            Some(c) => self.err(format!("expected a value, found `{}`", c as char)),
        }
    }

    fn string(&mut self) -> Result<Value, ManifestError> {
        self.bump();
        let mut out = Vec::new();
        loop {
            match self.bump() {
                None | Some(b'\n') => return self.err("unterminated string"),
                Some(b'"') => break,
                Some(b'\\') => match self.bump() {
                    Some(b'"') => out.push(b'"'),
                    Some(b'\\') => out.push(b'\\'),
                    _ => return self.err("unknown escape (only \\\" and \\\\)"),
                },
                Some(c) => out.push(c),
            }
        }
        match String::from_utf8(out) {
            Ok(s) => Ok(Value::Str(s)),
            Err(_) => self.err("string is not valid UTF-8"),
        }
    }
}

impl Manifest {
    pub fn parse(src: &str) -> Result<Manifest, ManifestError> {
        let mut lx = Lexer { src: src.as_bytes(), pos: 0, line: 1, col: 1 };
        let mut m = Manifest::default();
        let mut current: Option<String> = None;
        loop {
            lx.skip(true);
            let Some(c) = lx.peek() else { break };
            if c == b'[' {
                lx.bump();
                let name = lx.ident()?;
                if lx.peek() != Some(b']') {
                    return lx.err("expected `]` after section name");
                }
                lx.bump();
                if m.sections.contains_key(&name) {
                    return lx.err(format!("section [{name}] appears twice"));
                }
                m.sections.insert(name.clone(), Section::new());
                current = Some(name);
                lx.end_of_line()?;
                continue;
            }
            let key = lx.ident()?;
            lx.skip(false);
            if lx.peek() != Some(b'=') {
                return lx.err(format!("expected `=` after `{key}`"));
            }
            lx.bump();
            lx.skip(false);
            let v = lx.value()?;
            let target = match &current {
                None => &mut m.top,
                Some(s) => m.sections.get_mut(s).expect("inserted"),
            };
            if target.contains_key(&key) {
                return lx.err(format!("key `{key}` appears twice"));
            }
            target.insert(key, v);
            lx.end_of_line()?;
        }
        Ok(m)
    }

    pub fn new(kind: &str) -> Manifest {
        let mut m = Manifest::default();
        m.top.insert("kind".into(), Value::str(kind));
        m
    }

    pub fn kind(&self) -> Result<&str, ManifestError> {
        match self.top.get("kind") {
            Some(Value::Str(s)) => Ok(s),
            Some(v) => Err(ManifestError::Type(format!("`kind` must be a string, found a {}", v.kind()))),
            None => Err(ManifestError::Missing("missing top-level key `kind`".into())),
        }
    }

    pub fn section(&self, name: &str) -> Result<&Section, ManifestError> {
        self.sections.get(name).ok_or_else(|| ManifestError::Missing(format!("missing section [{name}]")))
    }

    pub fn section_mut(&mut self, name: &str) -> &mut Section {
        self.sections.entry(name.to_string()).or_default()
    }
}

/// Typed lookup of `key` in a section called `name` (for messages).
pub fn get<'a>(s: &'a Section, name: &str, key: &str) -> Result<&'a Value, ManifestError> {
    s.get(key).ok_or_else(|| ManifestError::Missing(format!("[{name}] is missing `{key}`")))
}

pub fn as_str<'a>(v: &'a Value, what: &str) -> Result<&'a str, ManifestError> {
    match v {
        Value::Str(s) => Ok(s),
        other => Err(ManifestError::Type(format!("{what} must be a string, found a {}", other.kind()))),
    }
}

pub fn as_int(v: &Value, what: &str) -> Result<i64, ManifestError> {
    match v {
        Value::Int(n) => Ok(*n),
        other => Err(ManifestError::Type(format!("{what} must be an integer, found a {}", other.kind()))),
    }
}

pub fn as_list<'a>(v: &'a Value, what: &str) -> Result<&'a [Value], ManifestError> {
    match v {
        Value::List(xs) => Ok(xs),
        other => Err(ManifestError::Type(format!("{what} must be a list, found a {}", other.kind()))),
    }
}

fn write_str(out: &mut String, s: &str) {
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            c => out.push(c),
        }
    }
    out.push('"');
}

fn write_value(out: &mut String, v: &Value, indent: usize) {
    match v {
        Value::Str(s) => write_str(out, s),
        Value::Int(n) => {
            let _ = write!(out, "{n}");
        }
        Value::List(xs) if xs.iter().any(|x| matches!(x, Value::List(_))) => {
            out.push_str("[\n");
            for x in xs {
                out.push_str(&"    ".repeat(indent + 1));
                write_value(out, x, indent + 1);
                out.push_str(",\n");
            }
            out.push_str(&"    ".repeat(indent));
            out.push(']');
        }
        Value::List(xs) => {
            out.push('[');
            for (i, x) in xs.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_value(out, x, indent);
            }
            out.push(']');
        }
    }
}

fn write_entries(out: &mut String, s: &Section, first: Option<&str>) {
    let head = first.and_then(|k| s.get_key_value(k));
    for (k, v) in head.into_iter().chain(s.iter().filter(|(k, _)| Some(k.as_str()) != first)) {
        out.push_str(k);
        out.push_str(" = ");
        write_value(out, v, 0);
        out.push('\n');
    }
}

impl fmt::Display for Manifest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut out = String::new();
        write_entries(&mut out, &self.top, Some("kind"));
        for (name, s) in &self.sections {
            out.push('\n');
            let _ = writeln!(out, "[{name}]");
            write_entries(&mut out, s, None);
        }
        f.write_str(&out)
    }
}
