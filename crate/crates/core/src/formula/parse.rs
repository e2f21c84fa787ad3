//! QDIMACS and DQDIMACS readers and the canonical writer.

use std::fmt::Write as _;

use thiserror::Error;

use super::{Clause, Formula, FormulaError, Lit, Origin, Prefix, QuantKind, Var};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: {source}")]
    Formula { line: usize, source: FormulaError },
    #[error("variable {0} occurs in the matrix but is not quantified")]
    FreeVariable(Var),
    #[error("header announces {expected} clauses, found {found}")]
    ClauseCount { expected: usize, found: usize },
    #[error("missing `p cnf` header")]
    MissingHeader,
}

fn syntax(line: usize, msg: impl Into<String>) -> ParseError {
    ParseError::Syntax {
        line,
        msg: msg.into(),
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Dialect {
    Qdimacs,
    Dqdimacs,
}

/// Parses either format, choosing DQDIMACS when a `d` line is present.
pub fn parse_instance(text: &str) -> Result<Formula, ParseError> {
    let has_d = text
        .lines()
        .any(|l| l.split_whitespace().next() == Some("d"));
    if has_d {
        parse_dqdimacs(text)
    } else {
        parse_qdimacs(text)
    }
}

pub fn parse_qdimacs(text: &str) -> Result<Formula, ParseError> {
    parse(text, Dialect::Qdimacs)
}

pub fn parse_dqdimacs(text: &str) -> Result<Formula, ParseError> {
    parse(text, Dialect::Dqdimacs)
}

/// Integers of a 0-terminated line, without the terminator.
fn terminated_ints<'a>(
    line: usize,
    toks: impl Iterator<Item = &'a str>,
) -> Result<Vec<i64>, ParseError> {
    let mut out = Vec::new();
    let mut closed = false;
    for t in toks {
        if closed {
            return Err(syntax(line, "tokens after terminating 0"));
        }
        let n: i64 = t
            .parse()
            .map_err(|_| syntax(line, format!("expected integer, found `{t}`")))?;
        if n == 0 {
            closed = true;
        } else if n.unsigned_abs() > u32::MAX as u64 {
            return Err(syntax(line, format!("variable {t} out of range")));
        } else {
            out.push(n);
        }
    }
    if !closed {
        return Err(syntax(line, "line is not terminated by 0"));
    }
    Ok(out)
}

fn vars_of(line: usize, ints: &[i64], nv: u32) -> Result<Vec<Var>, ParseError> {
    ints.iter()
        .map(|&n| {
            if n < 0 {
                Err(syntax(line, "negative variable in a quantifier line"))
            } else if n as u64 > nv as u64 {
                Err(syntax(line, format!("variable {n} exceeds header bound {nv}")))
            } else {
                Ok(Var(n as u32))
            }
        })
        .collect()
}

fn parse(text: &str, dialect: Dialect) -> Result<Formula, ParseError> {
    let mut header: Option<(u32, usize)> = None;
    let mut prefix = Prefix::new();
    let mut universals_so_far: Vec<Var> = Vec::new();
    let mut matrix = Vec::new();

    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let mut toks = raw.split_whitespace();
        let Some(first) = toks.next() else { continue };
        match first {
            "c" => continue,
            "p" => {
                if header.is_some() {
                    return Err(syntax(line, "duplicate header"));
                }
                if toks.next() != Some("cnf") {
                    return Err(syntax(line, "expected `p cnf <vars> <clauses>`"));
                }
                let nv = toks.next().and_then(|t| t.parse::<u32>().ok());
                let nc = toks.next().and_then(|t| t.parse::<usize>().ok());
                match (nv, nc, toks.next()) {
                    (Some(nv), Some(nc), None) => header = Some((nv, nc)),
                    _ => return Err(syntax(line, "expected `p cnf <vars> <clauses>`")),
                }
            }
            "a" | "e" | "d" => {
                let (nv, _) = header.ok_or(ParseError::MissingHeader)?;
                if !matrix.is_empty() {
                    return Err(syntax(line, "quantifier line after clauses"));
                }
                if first == "d" && dialect == Dialect::Qdimacs {
                    return Err(syntax(line, "`d` lines are not QDIMACS"));
                }
                let vars = vars_of(line, &terminated_ints(line, toks)?, nv)?;
                let res = match first {
                    "a" => vars.iter().try_for_each(|&u| {
                        universals_so_far.push(u);
                        prefix.add_universal(u)
                    }),
                    "e" => vars.iter().try_for_each(|&x| {
                        prefix.add_existential(x, universals_so_far.iter().copied())
                    }),
                    _ => match vars.split_first() {
                        Some((&x, deps)) => prefix.add_existential(x, deps.iter().copied()),
                        None => return Err(syntax(line, "empty `d` line")),
                    },
                };
                res.map_err(|source| ParseError::Formula { line, source })?;
            }
            _ => {
                let (nv, _) = header.ok_or(ParseError::MissingHeader)?;
                let ints = terminated_ints(line, std::iter::once(first).chain(toks))?;
                if let Some(&n) = ints.iter().find(|n| n.unsigned_abs() > nv as u64) {
                    return Err(syntax(line, format!("literal {n} exceeds header bound {nv}")));
                }
                let c = Clause::new(ints.iter().map(|&n| Lit::from_dimacs(n)));
                if let Some(v) = c.vars().find(|&v| !prefix.is_declared(v)) {
                    return Err(ParseError::FreeVariable(v));
                }
                matrix.push(c);
            }
        }
    }

    let (_, nc) = header.ok_or(ParseError::MissingHeader)?;
    if nc != matrix.len() {
        return Err(ParseError::ClauseCount {
            expected: nc,
            found: matrix.len(),
        });
    }
    let origin = match dialect {
        Dialect::Qdimacs => Origin::Qdimacs,
        Dialect::Dqdimacs => Origin::Dqdimacs,
    };
    Formula::new(prefix, matrix, origin).map_err(|source| ParseError::Formula { line: 0, source })
}

/// Writes a formula back out. QBF-shaped prefixes of non-DQDIMACS origin use
/// quantifier blocks; everything else uses `a` and `d` lines in declaration
/// order.
pub fn serialize(f: &Formula) -> String {
    let p = &f.prefix;
    let mut out = String::new();
    let _ = writeln!(out, "p cnf {} {}", p.max_var(), f.matrix.len());
    let blocks = f.origin != Origin::Dqdimacs && p.is_qbf_shaped();

    let mut i = 0;
    let vars = p.vars();
    while i < vars.len() {
        let kind = p.get(vars[i]).map(|d| d.kind).unwrap();
        if kind == QuantKind::Existential && !blocks {
            let _ = write!(out, "d {}", vars[i]);
            for d in p.deps(vars[i]).unwrap() {
                let _ = write!(out, " {d}");
            }
            out.push_str(" 0\n");
            i += 1;
            continue;
        }
        out.push(if kind == QuantKind::Universal { 'a' } else { 'e' });
        while i < vars.len() && p.get(vars[i]).map(|d| d.kind) == Some(kind) {
            let _ = write!(out, " {}", vars[i]);
            i += 1;
        }
        out.push_str(" 0\n");
    }
    for c in &f.matrix {
        let _ = writeln!(out, "{c}");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    const EUR: &str = "p cnf 5 7\ne 1 0\na 2 0\ne 3 4 5 0\n2 4 0\n1 -2 3 -4 0\n-3 4 5 0\n1 -5 0\n1 3 4 0\n-3 -4 0\n-1 -2 5 0\n";

    #[test]
    fn tiny_qdimacs() {
        let f = parse_qdimacs("p cnf 2 1\na 1 0\ne 2 0\n1 2 0\n").unwrap();
        assert!(f.prefix.is_universal(Var(1)));
        assert_eq!(f.prefix.deps(Var(2)).unwrap(), &BTreeSet::from([Var(1)]));
        assert_eq!(f.matrix, vec![Clause::from_dimacs(&[1, 2])]);
    }

    #[test]
    fn eur_formula_deps() {
        let f = parse_qdimacs(EUR).unwrap();
        assert_eq!(f.matrix.len(), 7);
        assert!(f.prefix.deps(Var(1)).unwrap().is_empty());
        for x in 3..=5 {
            assert_eq!(f.prefix.deps(Var(x)).unwrap(), &BTreeSet::from([Var(2)]));
        }
    }

    #[test]
    fn missing_terminator() {
        let err = parse_qdimacs("p cnf 2 1\na 1 0\ne 2 0\n1 2\n").unwrap_err();
        assert!(matches!(err, ParseError::Syntax { line: 4, .. }));
    }

    #[test]
    fn free_variable_rejected() {
        let err = parse_qdimacs("p cnf 3 1\na 1 0\ne 2 0\n1 3 0\n").unwrap_err();
        assert_eq!(err, ParseError::FreeVariable(Var(3)));
    }

    #[test]
    fn clause_count_checked() {
        let err = parse_qdimacs("p cnf 2 2\na 1 0\ne 2 0\n1 2 0\n").unwrap_err();
        assert_eq!(
            err,
            ParseError::ClauseCount {
                expected: 2,
                found: 1
            }
        );
    }

    #[test]
    fn dqdimacs_prefix() {
        let f = parse_dqdimacs("p cnf 5 0\na 1 2 3 0\nd 4 1 2 0\nd 5 3 0\n").unwrap();
        assert_eq!(f.prefix.deps(Var(4)).unwrap(), &BTreeSet::from([Var(1), Var(2)]));
        assert_eq!(f.prefix.deps(Var(5)).unwrap(), &BTreeSet::from([Var(3)]));
        assert!(f.matrix.is_empty());
    }

    #[test]
    fn self_dependency_rejected() {
        let err = parse_dqdimacs("p cnf 4 0\na 1 0\nd 4 4 0\n").unwrap_err();
        assert!(matches!(
            err,
            ParseError::Formula {
                line: 3,
                source: FormulaError::NonUniversalDep { .. }
            }
        ));
    }

    #[test]
    fn duplicate_literals_merge_and_tautologies_stay() {
        let f = parse_qdimacs("p cnf 2 1\na 1 0\ne 2 0\n2 2 -2 0\n").unwrap();
        assert_eq!(f.matrix[0].len(), 2);
        assert!(f.matrix[0].is_tautology());
    }

    #[test]
    fn round_trip() {
        for text in [
            EUR,
            "p cnf 5 1\na 1 2 3 0\nd 4 1 2 0\nd 5 3 0\n-1 4 5 0\n",
            "p cnf 3 1\na 1 0\nd 2 1 0\na 3 0\n1 -2 3 0\n",
        ] {
            let f = parse_instance(text).unwrap();
            let g = parse_instance(&serialize(&f)).unwrap();
            assert_eq!(f, g);
        }
        assert_eq!(serialize(&parse_qdimacs(EUR).unwrap()), EUR);
    }
}
