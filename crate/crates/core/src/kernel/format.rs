//! Line-based text format for kernel proofs.
//!
//! ```text
//! c formula-sha256 <hex>
//! a <idx> 0
//! r <id1> <id2> <pivotvar> 0
//! w <id> <lit>... 0
//! x and|or <var> c <lit>... 0 b <lit>... 0
//! d <id> <lit> 0
//! u <var> 0
//! ```

use std::fmt::Write as _;

use thiserror::Error;

use super::{ExtKind, KernelProof, KernelStep};
use crate::formula::{Lit, PartialAssignment, Var};

#[derive(Debug, Error, PartialEq, Eq)]
#[error("line {line}: {msg}")]
pub struct ProofParseError {
    pub line: usize,
    pub msg: String,
}

struct Line<'a> {
    no: usize,
    toks: std::iter::Peekable<std::str::SplitWhitespace<'a>>,
}

impl<'a> Line<'a> {
    fn err<T>(&self, msg: impl Into<String>) -> Result<T, ProofParseError> {
        Err(ProofParseError {
            line: self.no,
            msg: msg.into(),
        })
    }

    fn int(&mut self) -> Result<i64, ProofParseError> {
        match self.toks.next() {
            Some(t) => match t.parse::<i64>() {
                Ok(n) if n.unsigned_abs() <= u32::MAX as u64 => Ok(n),
                _ => self.err(format!("expected integer, found `{t}`")),
            },
            None => self.err("unexpected end of line"),
        }
    }

    fn index(&mut self) -> Result<usize, ProofParseError> {
        let n = self.int()?;
        if n < 0 {
            return self.err("negative index");
        }
        Ok(n as usize)
    }

    fn var(&mut self) -> Result<Var, ProofParseError> {
        let n = self.int()?;
        if n <= 0 {
            return self.err("expected a positive variable");
        }
        Ok(Var(n as u32))
    }

    fn lit(&mut self) -> Result<Lit, ProofParseError> {
        let n = self.int()?;
        if n == 0 {
            return self.err("expected a literal");
        }
        Ok(Lit::from_dimacs(n))
    }

    fn zero(&mut self) -> Result<(), ProofParseError> {
        if self.int()? != 0 {
            return self.err("expected terminating 0");
        }
        Ok(())
    }

    /// Literals up to and including a terminating 0.
    fn lits(&mut self) -> Result<Vec<Lit>, ProofParseError> {
        let mut out = Vec::new();
        loop {
            let n = self.int()?;
            if n == 0 {
                return Ok(out);
            }
            out.push(Lit::from_dimacs(n));
        }
    }

    fn keyword(&mut self, want: &str) -> Result<(), ProofParseError> {
        match self.toks.next() {
            Some(t) if t == want => Ok(()),
            _ => self.err(format!("expected `{want}`")),
        }
    }

    fn end(&mut self) -> Result<(), ProofParseError> {
        if self.toks.peek().is_some() {
            return self.err("trailing tokens");
        }
        Ok(())
    }
}

pub fn parse_proof(text: &str) -> Result<KernelProof, ProofParseError> {
    let mut proof = KernelProof::default();
    for (i, raw) in text.lines().enumerate() {
        let mut line = Line {
            no: i + 1,
            toks: raw.split_whitespace().peekable(),
        };
        let Some(tag) = line.toks.next() else { continue };
        let step = match tag {
            "c" => {
                if line.toks.next() == Some("formula-sha256") {
                    match line.toks.next() {
                        Some(h) if proof.formula_hash.is_none() && proof.steps.is_empty() => {
                            proof.formula_hash = Some(h.to_ascii_lowercase())
                        }
                        _ => return line.err("misplaced or malformed hash header"),
                    }
                }
                continue;
            }
            "a" => {
                let s = KernelStep::Ax(line.index()?);
                line.zero()?;
                s
            }
            "r" => {
                let (a, b, p) = (line.index()?, line.index()?, line.var()?);
                line.zero()?;
                KernelStep::Res(a, b, p)
            }
            "w" => {
                let id = line.index()?;
                KernelStep::Weak(id, line.lits()?)
            }
            "x" => {
                let kind = match line.toks.next() {
                    Some("and") => ExtKind::And,
                    Some("or") => ExtKind::Or,
                    _ => return line.err("expected `and` or `or`"),
                };
                let var = line.var()?;
                line.keyword("c")?;
                let cond_lits = line.lits()?;
                let cond = match PartialAssignment::from_lits(cond_lits) {
                    Ok(c) => c,
                    Err(v) => return line.err(format!("condition assigns {v} twice")),
                };
                line.keyword("b")?;
                KernelStep::Ext {
                    kind,
                    var,
                    cond,
                    body: line.lits()?,
                }
            }
            "d" => {
                let (id, l) = (line.index()?, line.lit()?);
                line.zero()?;
                KernelStep::Red(id, l)
            }
            "u" => {
                let v = line.var()?;
                line.zero()?;
                KernelStep::PrefixU(v)
            }
            other => return line.err(format!("unknown step `{other}`")),
        };
        line.end()?;
        proof.steps.push(step);
    }
    Ok(proof)
}

fn push_lits<'a>(out: &mut String, lits: impl IntoIterator<Item = &'a Lit>) {
    for l in lits {
        let _ = write!(out, " {l}");
    }
    out.push_str(" 0");
}

pub fn serialize_proof(p: &KernelProof) -> String {
    let mut out = String::new();
    if let Some(h) = &p.formula_hash {
        let _ = writeln!(out, "c formula-sha256 {h}");
    }
    for s in &p.steps {
        match s {
            KernelStep::Ax(i) => {
                let _ = write!(out, "a {i} 0");
            }
            KernelStep::Res(a, b, v) => {
                let _ = write!(out, "r {a} {b} {v} 0");
            }
            KernelStep::Weak(id, lits) => {
                let _ = write!(out, "w {id}");
                push_lits(&mut out, lits);
            }
            KernelStep::Ext {
                kind,
                var,
                cond,
                body,
            } => {
                let k = match kind {
                    ExtKind::And => "and",
                    ExtKind::Or => "or",
                };
                let _ = write!(out, "x {k} {var} c");
                push_lits(&mut out, &cond.lits().collect::<Vec<_>>());
                out.push_str(" b");
                push_lits(&mut out, body);
            }
            KernelStep::Red(id, l) => {
                let _ = write!(out, "d {id} {l} 0");
            }
            KernelStep::PrefixU(v) => {
                let _ = write!(out, "u {v} 0");
            }
        }
        out.push('\n');
    }
    out
}
