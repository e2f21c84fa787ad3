//! Fork resolution proofs and the fork-extension expansion.
//!
//! A fork step splits a clause `C1 ∪ C2` into `e ∨ C1` and `ē ∨ C2` with a
//! fresh `e` depending on `D(C1) ∩ D(C2)`. In the kernel, `e` is built as
//! `e0 = Or(C2)` and then conditioned away from each universal in
//! `D(C2) \ D(C1)`.
//!
//! ```text
//! a <matrix-index> 0
//! r <line1> <line2> <var> 0
//! d <line> <universal-lit> 0
//! f <line> <e> <c1-lit>... 0
//! ```

use std::collections::BTreeMap;

use super::{ints, terminated, Result, TranslateError, Translation, TranslationState};
use crate::analysis::marginal_universals;
use crate::formula::{Clause, Formula, Lit, PartialAssignment, Var};
use crate::kernel::{ClauseId, ExtKind, KernelStep};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ForkLine {
    Axiom(usize),
    Res(usize, usize, Var),
    Red(usize, Lit),
    /// Produces two lines: `e ∨ C1`, then `ē ∨ C2`.
    Fork(usize, Var, Clause),
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ForkProof {
    pub lines: Vec<ForkLine>,
}

pub fn parse_fork_proof(text: &str) -> Result<ForkProof> {
    let mut proof = ForkProof::default();
    for (i, raw) in text.lines().enumerate() {
        let no = i + 1;
        let toks: Vec<&str> = raw.split_whitespace().collect();
        let Some((&tag, rest)) = toks.split_first() else { continue };
        if tag == "c" {
            continue;
        }
        let xs = terminated(no, &ints(no, rest)?, if tag == "r" { 2 } else { 1 })?;
        let bad = |msg: &str| TranslateError::Parse {
            line: no,
            msg: msg.to_string(),
        };
        let line = match (tag, xs.as_slice()) {
            ("a", [i]) if *i >= 0 => ForkLine::Axiom(*i as usize),
            ("r", [a, b, v]) if *a >= 0 && *b >= 0 && *v > 0 => {
                ForkLine::Res(*a as usize, *b as usize, Var(*v as u32))
            }
            ("d", [id, l]) if *id >= 0 => ForkLine::Red(*id as usize, Lit::from_dimacs(*l)),
            ("f", [id, e, c1 @ ..]) if *id >= 0 && *e > 0 => ForkLine::Fork(
                *id as usize,
                Var(*e as u32),
                c1.iter().map(|&n| Lit::from_dimacs(n)).collect(),
            ),
            ("a" | "r" | "d" | "f", _) => return Err(bad("malformed line")),
            _ => return Err(bad("unknown line type")),
        };
        proof.lines.push(line);
    }
    Ok(proof)
}

/// Derives `e ∨ C1` and `ē ∨ C2` from the kernel clause `premise = C1 ∪ C2`.
/// Returns the kernel variable `e` and the two clause ids.
pub fn fork_ext_expand(
    ts: &mut TranslationState,
    premise: ClauseId,
    c1: &Clause,
) -> Result<(Var, ClauseId, ClauseId)> {
    let c = ts.clause(premise).clone();
    if !c1.is_subset(&c) {
        return Err(TranslateError::Internal(format!("{c1} is not part of {c}")));
    }
    let c2: Clause = c.iter().filter(|&l| !c1.contains(l)).collect();
    let marginal = marginal_universals(ts.kernel().prefix(), c1, &c2);
    let none = PartialAssignment::new();

    let mut e = ts.ext_fresh(ExtKind::Or, none.clone(), c2.lits().to_vec())?;
    let d0 = ts.defs(e);
    let mut with_c1 = premise;
    for (i, y) in c2.iter().enumerate() {
        with_c1 = ts.res(with_c1, d0[i], y.var())?;
    }
    if c2.is_empty() {
        with_c1 = ts.weak(premise, &c1.with([e.pos()]))?;
    }
    let mut with_c2 = *d0.last().unwrap();

    for u in marginal {
        let on = |b| PartialAssignment::from_lits([Lit::new(u, b)]).unwrap();
        let eu = ts.ext_fresh(ExtKind::And, on(true), vec![e.pos()])?;
        let enu = ts.ext_fresh(ExtKind::And, on(false), vec![e.pos()])?;
        let next = ts.ext_fresh(ExtKind::And, none.clone(), vec![eu.pos(), enu.pos()])?;
        let (du, dnu, dn) = (ts.defs(eu), ts.defs(enu), ts.defs(next));

        // ē_{i+1} ∨ C2
        let t = ts.res(du[0], dnu[0], u)?;
        let t = ts.res(t, dn[0], eu)?;
        let t = ts.res(t, dn[1], enu)?;
        with_c2 = ts.res(t, with_c2, e)?;

        // C1 ∨ e_{i+1}
        let a = ts.res(with_c1, du[1], e)?;
        let a = ts.red(a, u.neg())?;
        let b = ts.res(with_c1, dnu[1], e)?;
        let b = ts.red(b, u.pos())?;
        let t = ts.res(dn[2], a, eu)?;
        with_c1 = ts.res(t, b, enu)?;
        e = next;
    }
    Ok((e, with_c1, with_c2))
}

struct ForkRun<'a> {
    f: &'a Formula,
    ts: TranslationState,
    /// Fork variables to kernel variables.
    names: BTreeMap<Var, Var>,
    /// Clauses in proof names with their kernel ids.
    lines: Vec<(Clause, ClauseId)>,
}

impl ForkRun<'_> {
    fn kvar(&self, v: Var) -> Option<Var> {
        if self.f.prefix.is_declared(v) {
            Some(v)
        } else {
            self.names.get(&v).copied()
        }
    }

    fn invalid<T>(no: usize, msg: impl Into<String>) -> Result<T> {
        Err(TranslateError::Invalid {
            line: no,
            msg: msg.into(),
        })
    }

    fn line(&self, no: usize, j: usize) -> Result<(Clause, ClauseId)> {
        match self.lines.get(j) {
            Some(l) => Ok(l.clone()),
            None => Self::invalid(no, format!("line {j} is not derived yet")),
        }
    }

    fn step(&mut self, no: usize, l: &ForkLine) -> Result<()> {
        match l {
            ForkLine::Axiom(i) => {
                let Some(c) = self.f.matrix.get(*i) else {
                    return Self::invalid(no, format!("matrix index {i} out of range"));
                };
                let id = self.ts.apply(KernelStep::Ax(*i))?[0];
                self.lines.push((c.clone(), id));
            }
            ForkLine::Res(a, b, v) => {
                let (ca, ia) = self.line(no, *a)?;
                let (cb, ib) = self.line(no, *b)?;
                let Some(kv) = self.kvar(*v) else {
                    return Self::invalid(no, format!("unknown variable {v}"));
                };
                let (pa, pb) = if ca.contains(v.pos()) && cb.contains(v.neg()) {
                    (v.pos(), v.neg())
                } else if ca.contains(v.neg()) && cb.contains(v.pos()) {
                    (v.neg(), v.pos())
                } else {
                    return Self::invalid(no, format!("pivot {v} does not clash"));
                };
                let id = self.ts.res(ia, ib, kv)?;
                self.lines.push((ca.without(pa).union(&cb.without(pb)), id));
            }
            ForkLine::Red(j, lit) => {
                let (c, id) = self.line(no, *j)?;
                if !self.f.prefix.is_universal(lit.var()) {
                    return Self::invalid(no, format!("{lit} is not universal"));
                }
                let id = self.ts.red(id, *lit)?;
                self.lines.push((c.without(*lit), id));
            }
            ForkLine::Fork(j, e, c1) => {
                let (c, id) = self.line(no, *j)?;
                if self.kvar(*e).is_some() {
                    return Self::invalid(no, format!("fork variable {e} is not fresh"));
                }
                if !c1.is_subset(&c) {
                    return Self::invalid(no, "split part is not a subset of the clause");
                }
                let kc1 = c1.map(|l| Lit::new(self.kvar(l.var()).unwrap(), l.is_positive()));
                let (ke, i1, i2) = fork_ext_expand(&mut self.ts, id, &kc1)?;
                self.names.insert(*e, ke);
                let c2: Clause = c.iter().filter(|&l| !c1.contains(l)).collect();
                self.lines.push((c1.with([e.pos()]), i1));
                self.lines.push((c2.with([e.neg()]), i2));
            }
        }
        Ok(())
    }
}

pub fn translate_fork(f: &Formula, proof: &ForkProof) -> Result<Translation> {
    let mut run = ForkRun {
        f,
        ts: TranslationState::new(f),
        names: BTreeMap::new(),
        lines: Vec::new(),
    };
    for (i, l) in proof.lines.iter().enumerate() {
        run.step(i + 1, l)?;
    }
    let refutes = run.lines.last().is_some_and(|(c, _)| c.is_empty());
    let empty = refutes && run.ts.last_clause_empty();
    Ok(Translation::new(f, run.ts.into_steps(), empty))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse_instance;
    use crate::kernel::check_proof_with_mode;
    use crate::kernel::CheckMode;

    #[test]
    fn parses_all_line_types() {
        let p = parse_fork_proof("a 0 0\nr 0 1 3 0\nd 2 -1 0\nf 3 9 1 -2 0\n").unwrap();
        assert_eq!(p.lines.len(), 4);
        assert_eq!(
            p.lines[3],
            ForkLine::Fork(3, Var(9), Clause::from_dimacs(&[1, -2]))
        );
        assert!(parse_fork_proof("f 0 0 1 0\n").is_err());
    }

    #[test]
    fn expansion_over_two_marginal_universals() {
        // ∀1 ∀2 ∀3, x4 on {1}, y5 on {2,3}: split (x ∨ y) into {x} and {y}.
        let f = parse_instance("p cnf 5 1\na 1 2 3 0\nd 4 1 0\nd 5 2 3 0\n4 5 0\n").unwrap();
        let mut ts = TranslationState::new(&f);
        let id = ts.apply(KernelStep::Ax(0)).unwrap()[0];
        let (e, a, b) = fork_ext_expand(&mut ts, id, &Clause::from_dimacs(&[4])).unwrap();
        assert_eq!(ts.clause(a), &Clause::new([Var(4).pos(), e.pos()]));
        assert_eq!(ts.clause(b), &Clause::new([Var(5).pos(), e.neg()]));
        assert!(ts.kernel().prefix().deps(e).unwrap().is_empty());
        let steps = ts.into_steps();
        assert!(steps.len() <= 16 * 2 * 2);
        let proof = crate::kernel::KernelProof::new(steps);
        assert!(check_proof_with_mode(&f, &proof, CheckMode::Derivation).is_accepted());
    }

    #[test]
    fn fork_refutation() {
        // ∀1, x2 on ∅, y3 on {1}: (x ∨ y), (¬x), (¬y ∨ 1), (¬y ∨ ¬1).
        let f = parse_instance("p cnf 3 4\na 1 0\nd 2 0\nd 3 1 0\n2 3 0\n-2 0\n-3 1 0\n-3 -1 0\n")
            .unwrap();
        let text = "a 0 0\nf 0 9 2 0\na 1 0\nr 1 3 2 0\na 2 0\na 3 0\nr 5 6 1 0\nr 2 7 3 0\nr 4 8 9 0\n";
        let p = parse_fork_proof(text).unwrap();
        let t = translate_fork(&f, &p).unwrap();
        assert!(t.refutation);
        assert!(crate::kernel::check_proof(&f, &t.proof).is_accepted());
    }
}
