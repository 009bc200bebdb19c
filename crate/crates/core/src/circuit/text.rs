//! Line-oriented circuit text format.
//!
//! ```text
//! qubits 3
//! ancilla 0
//! meta scheme low-depth
//! h -> 0
//! cry(1.5e-1) 0 -> 1
//! mcx 0,1 -> 2      # Toffoli
//! ```
//!
//! `ancilla` and `meta` lines are optional and must precede the gates.
//! Angles are written with 17 digits after the point in scientific form,
//! which round-trips every `f64` exactly.

use super::{Circuit, GateInstance, GateKind};
use crate::error::{Error, Result};
use std::fmt::Write as _;

pub fn format_angle(a: f64) -> String {
    format!("{a:.17e}")
}

pub fn serialize_circuit(c: &Circuit) -> String {
    let mut out = format!("qubits {}\n", c.width());
    if let Some(a) = c.ancilla() {
        let _ = writeln!(out, "ancilla {a}");
    }
    for (k, v) in &c.metadata {
        let v = v.replace(['\n', '#'], " ");
        let _ = writeln!(out, "meta {k} {}", v.trim());
    }
    for g in c.gates() {
        out.push_str(g.kind.name());
        let angles = g.kind.angles();
        if !angles.is_empty() {
            let parts: Vec<String> = angles.iter().map(|&a| format_angle(a)).collect();
            let _ = write!(out, "({})", parts.join(","));
        }
        if !g.controls.is_empty() {
            out.push(' ');
            out.push_str(&join(&g.controls));
        }
        out.push_str(" -> ");
        out.push_str(&join(&g.targets));
        out.push('\n');
    }
    out
}

fn join(qs: &[usize]) -> String {
    qs.iter()
        .map(|q| q.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

#[derive(Clone, Debug, PartialEq)]
enum Tok<'a> {
    Word(&'a str),
    Num(&'a str),
    LParen,
    RParen,
    Comma,
    Arrow,
}

/// Tokens of one line, each with its 1-based column.
fn tokenize(line: &str, lineno: usize) -> Result<Vec<(Tok<'_>, usize)>> {
    let bytes = line.as_bytes();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let ch = bytes[i];
        let col = i + 1;
        match ch {
            b'#' => break,
            b' ' | b'\t' | b'\r' => i += 1,
            b'(' => {
                toks.push((Tok::LParen, col));
                i += 1;
            }
            b')' => {
                toks.push((Tok::RParen, col));
                i += 1;
            }
            b',' => {
                toks.push((Tok::Comma, col));
                i += 1;
            }
            b'-' if bytes.get(i + 1) == Some(&b'>') => {
                toks.push((Tok::Arrow, col));
                i += 2;
            }
            b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                let start = i;
                while i < bytes.len()
                    && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_')
                {
                    i += 1;
                }
                toks.push((Tok::Word(&line[start..i]), col));
            }
            b'0'..=b'9' | b'.' | b'-' | b'+' => {
                let start = i;
                i += 1;
                while i < bytes.len() {
                    let b = bytes[i];
                    let exp_sign =
                        matches!(b, b'-' | b'+') && matches!(bytes[i - 1], b'e' | b'E');
                    if b.is_ascii_digit() || matches!(b, b'.' | b'e' | b'E') || exp_sign {
                        i += 1;
                    } else {
                        break;
                    }
                }
                toks.push((Tok::Num(&line[start..i]), col));
            }
            _ => {
                return Err(Error::Parse {
                    line: lineno,
                    column: col,
                    message: format!("unexpected character '{}'", ch as char),
                })
            }
        }
    }
    Ok(toks)
}

struct LineParser<'a> {
    toks: Vec<(Tok<'a>, usize)>,
    pos: usize,
    line: usize,
    end_col: usize,
}

impl<'a> LineParser<'a> {
    fn err(&self, message: impl Into<String>) -> Error {
        let column = self
            .toks
            .get(self.pos)
            .map(|t| t.1)
            .unwrap_or(self.end_col);
        Error::Parse {
            line: self.line,
            column,
            message: message.into(),
        }
    }

    fn peek(&self) -> Option<&Tok<'a>> {
        self.toks.get(self.pos).map(|t| &t.0)
    }

    fn next(&mut self) -> Option<Tok<'a>> {
        let t = self.toks.get(self.pos).map(|t| t.0.clone());
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok<'static>, what: &str) -> Result<()> {
        match self.peek() {
            Some(t) if *t == want => {
                self.pos += 1;
                Ok(())
            }
            _ => Err(self.err(format!("expected {what}"))),
        }
    }

    fn word(&mut self, what: &str) -> Result<&'a str> {
        match self.peek() {
            Some(Tok::Word(w)) => {
                let w = *w;
                self.pos += 1;
                Ok(w)
            }
            _ => Err(self.err(format!("expected {what}"))),
        }
    }

    fn uint(&mut self, what: &str) -> Result<usize> {
        match self.peek() {
            Some(Tok::Num(s)) => match s.parse::<usize>() {
                Ok(v) => {
                    self.pos += 1;
                    Ok(v)
                }
                Err(_) => Err(self.err(format!("expected {what}, found '{s}'"))),
            },
            _ => Err(self.err(format!("expected {what}"))),
        }
    }

    fn angle(&mut self) -> Result<f64> {
        match self.peek() {
            Some(Tok::Num(s)) => match s.parse::<f64>() {
                Ok(v) if v.is_finite() => {
                    self.pos += 1;
                    Ok(v)
                }
                _ => Err(self.err(format!("invalid angle '{s}'"))),
            },
            _ => Err(self.err("expected angle")),
        }
    }

    fn index_list(&mut self) -> Result<Vec<usize>> {
        let mut out = vec![self.uint("qubit index")?];
        while self.peek() == Some(&Tok::Comma) {
            self.pos += 1;
            out.push(self.uint("qubit index")?);
        }
        Ok(out)
    }

    fn finish(&self) -> Result<()> {
        if self.pos < self.toks.len() {
            Err(self.err("unexpected trailing input"))
        } else {
            Ok(())
        }
    }
}

pub fn parse_circuit(text: &str) -> Result<Circuit> {
    let mut circuit: Option<Circuit> = None;
    let mut seen_gate = false;
    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        if let (Some(c), Some(rest)) = (circuit.as_mut(), raw.trim_start().strip_prefix("meta ")) {
            if seen_gate {
                return Err(Error::Parse {
                    line: lineno,
                    column: raw.len() - raw.trim_start().len() + 1,
                    message: "'meta' must precede the gate list".into(),
                });
            }
            let body = rest.split('#').next().unwrap_or("").trim();
            let (key, value) = body.split_once(char::is_whitespace).unwrap_or((body, ""));
            if key.is_empty() {
                return Err(Error::Parse {
                    line: lineno,
                    column: raw.len() + 1,
                    message: "expected metadata key".into(),
                });
            }
            c.metadata.insert(key.to_string(), value.trim().to_string());
            continue;
        }
        let toks = tokenize(raw, lineno)?;
        if toks.is_empty() {
            continue;
        }
        let mut p = LineParser {
            toks,
            pos: 0,
            line: lineno,
            end_col: raw.trim_end().len() + 1,
        };
        let Some(c) = circuit.as_mut() else {
            if p.word("'qubits' header")? != "qubits" {
                p.pos = 0;
                return Err(p.err("expected 'qubits' header"));
            }
            let width = p.uint("qubit count")?;
            p.finish()?;
            circuit = Some(Circuit::new(width).map_err(|e| Error::Parse {
                line: lineno,
                column: 1,
                message: e.to_string(),
            })?);
            continue;
        };
        let name_col = p.toks[0].1;
        let name = p.word("gate name")?;
        let located = |e: Error| Error::Parse {
            line: lineno,
            column: name_col,
            message: e.to_string(),
        };
        match name {
            "ancilla" if seen_gate => {
                p.pos = 0;
                return Err(p.err("'ancilla' must precede the gate list"));
            }
            "ancilla" => {
                let a = p.uint("ancilla index")?;
                p.finish()?;
                c.set_ancilla(Some(a)).map_err(located)?;
                continue;
            }
            _ => {}
        }
        seen_gate = true;
        let mut angles = Vec::new();
        if p.peek() == Some(&Tok::LParen) {
            p.next();
            angles.push(p.angle()?);
            while p.peek() == Some(&Tok::Comma) {
                p.next();
                angles.push(p.angle()?);
            }
            p.expect(Tok::RParen, "')'")?;
        }
        let controls = if p.peek() == Some(&Tok::Arrow) {
            Vec::new()
        } else {
            p.index_list()?
        };
        p.expect(Tok::Arrow, "'->'")?;
        let targets = p.index_list()?;
        p.finish()?;
        let kind = GateKind::from_name(name, &angles, controls.len()).map_err(located)?;
        let gate = GateInstance::new(kind, controls, targets).map_err(located)?;
        c.push(gate).map_err(located)?;
    }
    circuit.ok_or(Error::Parse {
        line: 1,
        column: 1,
        message: "missing 'qubits' header".into(),
    })
}
