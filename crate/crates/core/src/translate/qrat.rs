//! QRAT and DQRAT proofs.
//!
//! ```text
//! <lit>... 0                 add a clause (ATA, else QRAT on the first literal)
//! d <lit>... 0               delete a clause
//! u <lit> <lit>... 0         remove the universal first literal from the clause
//! bpm a <var> 0              new universal            (DQRAT only)
//! bpm e <var> <var>... 0     new existential with the given dependencies (DQRAT only)
//! drrs <var> 0               drop spurious dependencies on a universal, 0 for all (DQRAT only)
//! ```

use std::collections::BTreeSet;

use super::{ints, rewrite, terminated, Result, TranslateError, Translation, TranslationState};
use crate::analysis::unit_propagate;
use crate::formula::{Clause, Formula, Lit, Var};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum QratLine {
    /// Literals in the order given; the first one is the QRAT pivot.
    Add(Vec<Lit>),
    Delete(Clause),
    Reduce(Lit, Clause),
    BpmUniversal(Var),
    BpmExistential(Var, BTreeSet<Var>),
    Drrs(Option<Var>),
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct QratProof {
    pub lines: Vec<QratLine>,
}

fn perr<T>(line: usize, msg: impl Into<String>) -> Result<T> {
    Err(TranslateError::Parse {
        line,
        msg: msg.into(),
    })
}

fn var(line: usize, n: i64) -> Result<Var> {
    if n <= 0 {
        return perr(line, "expected a positive variable");
    }
    Ok(Var(n as u32))
}

pub fn parse_qrat_proof(text: &str) -> Result<QratProof> {
    let mut proof = QratProof::default();
    for (i, raw) in text.lines().enumerate() {
        let no = i + 1;
        let toks: Vec<&str> = raw.split_whitespace().collect();
        let Some(&tag) = toks.first() else { continue };
        let lits = |xs: &[i64]| xs.iter().map(|&n| Lit::from_dimacs(n)).collect::<Vec<_>>();
        let line = match tag {
            "c" => continue,
            "d" => QratLine::Delete(Clause::new(lits(&terminated(no, &ints(no, &toks[1..])?, 0)?))),
            "u" => match terminated(no, &ints(no, &toks[1..])?, 0)?.as_slice() {
                [l, rest @ ..] => QratLine::Reduce(Lit::from_dimacs(*l), Clause::new(lits(rest))),
                [] => return perr(no, "missing literal to remove"),
            },
            "bpm" => {
                let xs = terminated(no, &ints(no, &toks[2.min(toks.len())..])?, 0)?;
                match (toks.get(1).copied(), xs.as_slice()) {
                    (Some("a"), [v]) => QratLine::BpmUniversal(var(no, *v)?),
                    (Some("e"), [v, deps @ ..]) => QratLine::BpmExistential(
                        var(no, *v)?,
                        deps.iter().map(|&d| var(no, d)).collect::<Result<_>>()?,
                    ),
                    _ => return perr(no, "malformed bpm line"),
                }
            }
            "drrs" => match terminated(no, &ints(no, &toks[1..])?, 0)?.as_slice() {
                [] => QratLine::Drrs(None),
                [v] => QratLine::Drrs(Some(var(no, *v)?)),
                _ => return perr(no, "malformed drrs line"),
            },
            _ => {
                let xs = terminated(no, &ints(no, &toks)?, 0)?;
                QratLine::Add(lits(&xs))
            }
        };
        proof.lines.push(line);
    }
    Ok(proof)
}

fn at_line(e: TranslateError, line: usize) -> TranslateError {
    match e {
        TranslateError::Uncertifiable { reasons, .. } => TranslateError::Uncertifiable { line, reasons },
        other => other,
    }
}

fn invalid<T>(line: usize, msg: impl Into<String>) -> Result<T> {
    Err(TranslateError::Invalid {
        line,
        msg: msg.into(),
    })
}

fn add(ts: &mut TranslationState, no: usize, lits: &[Lit]) -> Result<()> {
    let c = Clause::new(lits.iter().copied());
    for l in c.iter() {
        ts.ensure_declared(l.var())?;
    }
    let id = if c.is_tautology() {
        let k = ts.kclause(&c)?;
        ts.tautology(&k)?
    } else {
        let view: Vec<Clause> = ts.live().into_iter().map(|(_, v)| v.clause.clone()).collect();
        let assume: Vec<Lit> = c.iter().map(|l| !l).collect();
        if unit_propagate(&view, &assume).is_conflict() {
            let prem = ts.live_ids_except(None);
            let k = ts.kclause(&c)?;
            ts.rup(&prem, &k)?
        } else {
            match lits.first() {
                Some(&l) if !ts.is_universal(l.var()) => {
                    rewrite::qrata_rewrite(ts, &c, l).map_err(|e| match e {
                        TranslateError::Uncertifiable { reasons, .. } => TranslateError::Uncertifiable {
                            line: no,
                            reasons: format!("AT: no unit propagation conflict; QRAT on {l}: {reasons}"),
                        },
                        other => other,
                    })?
                }
                Some(&l) => {
                    return Err(TranslateError::Uncertifiable {
                        line: no,
                        reasons: format!("not implied by unit propagation and pivot {l} is universal"),
                    })
                }
                None => {
                    return Err(TranslateError::Uncertifiable {
                        line: no,
                        reasons: "empty clause is not implied by unit propagation".into(),
                    })
                }
            }
        }
    };
    ts.push_view(c, id);
    Ok(())
}

fn run(f: &Formula, proof: &QratProof, dependency_rules: bool) -> Result<Translation> {
    let mut ts = TranslationState::with_axioms(f)?;
    for (i, line) in proof.lines.iter().enumerate() {
        let no = i + 1;
        if !dependency_rules && matches!(line, QratLine::BpmUniversal(_) | QratLine::BpmExistential(..) | QratLine::Drrs(_)) {
            return invalid(no, "prefix rules are only available in DQRAT proofs");
        }
        match line {
            QratLine::Add(lits) => add(&mut ts, no, lits)?,
            QratLine::Delete(c) => match ts.find_clause(c) {
                Some(idx) => ts.delete_view(idx),
                None => return invalid(no, format!("clause ({c}) is not in the formula")),
            },
            QratLine::Reduce(l, rest) => {
                let c = rest.with([*l]);
                let Some(idx) = ts.find_clause(&c) else {
                    return invalid(no, format!("clause ({c}) is not in the formula"));
                };
                if !ts.is_universal(l.var()) {
                    return invalid(no, format!("{l} is not universal"));
                }
                rewrite::mixed_reduction(&mut ts, idx, *l).map_err(|e| at_line(e, no))?;
            }
            QratLine::BpmUniversal(v) => {
                if ts.prefix().is_declared(*v) {
                    return invalid(no, format!("variable {v} is already declared"));
                }
                ts.declare_universal(*v)?;
            }
            QratLine::BpmExistential(v, deps) => {
                if ts.prefix().is_declared(*v) {
                    return invalid(no, format!("variable {v} is already declared"));
                }
                if let Some(d) = deps.iter().find(|d| !ts.is_universal(**d)) {
                    return invalid(no, format!("dependency {d} is not a universal"));
                }
                ts.declare_existential(*v, deps.clone())?;
            }
            QratLine::Drrs(u) => {
                let us: Vec<Var> = match u {
                    Some(u) if ts.is_universal(*u) => vec![*u],
                    Some(u) => return invalid(no, format!("{u} is not a universal")),
                    None => ts.prefix().universals().collect(),
                };
                for u in us {
                    rewrite::rrs_rewrite(&mut ts, u).map_err(|e| at_line(e, no))?;
                }
            }
        }
    }
    if !ts.last_clause_empty() {
        if let Some(id) = ts.live().iter().find(|(_, v)| v.clause.is_empty()).map(|(_, v)| v.id) {
            ts.weak(id, &Clause::empty())?;
        }
    }
    let empty = ts.last_clause_empty();
    Ok(Translation::new(f, ts.into_steps(), empty))
}

/// Translates a QRAT proof of a QBF.
pub fn translate_qrat(f: &Formula, proof: &QratProof) -> Result<Translation> {
    if !f.prefix.is_qbf_shaped() {
        return invalid(0, "QRAT proofs need a formula with a linear prefix");
    }
    run(f, proof, false)
}

/// Translates a DQRAT proof.
pub fn translate_dqrat(f: &Formula, proof: &QratProof) -> Result<Translation> {
    run(f, proof, true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse_instance;
    use crate::kernel::{check_proof, check_proof_with_mode, CheckMode};

    const EUR: &str = "p cnf 5 7\ne 1 0\na 2 0\ne 3 4 5 0\n2 4 0\n1 -2 3 -4 0\n-3 4 5 0\n1 -5 0\n1 3 4 0\n-3 -4 0\n-1 -2 5 0\n";

    #[test]
    fn parse_lines() {
        let p = parse_qrat_proof("c x\n3 1 0\nd 1 3 0\nu 2 4 0\nbpm a 9 0\nbpm e 10 9 0\ndrrs 0\ndrrs 2 0\n").unwrap();
        assert_eq!(p.lines.len(), 7);
        assert_eq!(p.lines[0], QratLine::Add(vec![Lit::from_dimacs(3), Lit::from_dimacs(1)]));
        assert_eq!(p.lines[5], QratLine::Drrs(None));
        assert!(parse_qrat_proof("1 2\n").is_err());
        assert!(parse_qrat_proof("bpm x 1 0\n").is_err());
    }

    #[test]
    fn eur_reduction_golden() {
        let f = parse_instance(EUR).unwrap();
        let p = parse_qrat_proof("u 2 4 0\n").unwrap();
        let t = translate_qrat(&f, &p).unwrap();
        assert!(!t.refutation);
        assert!(check_proof_with_mode(&f, &t.proof, CheckMode::Derivation).is_accepted());
    }

    #[test]
    fn rat_refutation() {
        // ∀u ∃y ∃z: (u ∨ y) (¬u ∨ z) (¬y) (¬z); y depends on u, so removing
        // u needs the path argument.
        let f = parse_instance("p cnf 3 4\na 1 0\ne 2 3 0\n1 2 0\n-1 3 0\n-2 0\n-3 0\n").unwrap();
        let p = parse_qrat_proof("u 1 2 0\n0\n").unwrap();
        let t = translate_qrat(&f, &p).unwrap();
        assert!(t.refutation);
        assert!(check_proof(&f, &t.proof).is_accepted());
    }

    #[test]
    fn unsound_line_is_reported_with_its_number() {
        let f = parse_instance("p cnf 2 2\na 1 0\ne 2 0\n1 2 0\n-1 -2 0\n").unwrap();
        let e = translate_qrat(&f, &parse_qrat_proof("c\nu 1 2 0\n").unwrap()).unwrap_err();
        assert!(matches!(e, TranslateError::Uncertifiable { line: 1, .. }), "{e}");
    }

    #[test]
    fn dqrat_prefix_rules() {
        let f = parse_instance(EUR).unwrap();
        let p = parse_qrat_proof("bpm a 9 0\nbpm e 10 9 0\n10 -10 0\ndrrs 0\n").unwrap();
        assert!(translate_qrat(&f, &p).is_err());
        let t = translate_dqrat(&f, &p).unwrap();
        assert!(check_proof_with_mode(&f, &t.proof, CheckMode::Derivation).is_accepted());
    }
}
