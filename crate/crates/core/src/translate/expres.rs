//! Expansion refutations (axiom, instantiation, resolution over annotated
//! literals) and their translation into kernel proofs.
//!
//! An annotated literal `x^α` is represented in the kernel by the extension
//! variable `And(α, [x])`; `x^∅` is `x` itself.
//!
//! ```text
//! a <matrix-index> 0
//! i <line> <lit>... 0
//! r <line1> <line2> <var> <annotation-lit>... 0
//! ```

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;

use super::{ints, terminated, Result, TranslateError, Translation, TranslationState};
use crate::analysis::restrict_to_drrs;
use crate::formula::{Clause, Formula, Lit, PartialAssignment, Var};
use crate::kernel::{ClauseId, ExtKind};

/// Most universals `expand_prove` enumerates assignments over.
pub const EXPAND_MAX_UNIVERSALS: usize = 4;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AnnLit {
    pub lit: Lit,
    pub ann: PartialAssignment,
}

impl AnnLit {
    fn complement(&self) -> AnnLit {
        AnnLit {
            lit: !self.lit,
            ann: self.ann.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ExpLine {
    Axiom(usize),
    Inst(usize, PartialAssignment),
    /// Resolution on the annotated variable `var^ann`.
    Res(usize, usize, Var, PartialAssignment),
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ExpProof {
    pub lines: Vec<ExpLine>,
}

fn perr<T>(line: usize, msg: impl Into<String>) -> Result<T> {
    Err(TranslateError::Parse {
        line,
        msg: msg.into(),
    })
}

fn assignment(line: usize, xs: &[i64]) -> Result<PartialAssignment> {
    PartialAssignment::from_lits(xs.iter().map(|&n| Lit::from_dimacs(n)))
        .or_else(|v| perr(line, format!("annotation assigns {v} twice")))
}

fn index(line: usize, n: i64) -> Result<usize> {
    if n < 0 {
        return perr(line, "negative index");
    }
    Ok(n as usize)
}

pub fn parse_exp_proof(text: &str) -> Result<ExpProof> {
    let mut proof = ExpProof::default();
    for (i, raw) in text.lines().enumerate() {
        let no = i + 1;
        let toks: Vec<&str> = raw.split_whitespace().collect();
        let Some((&tag, rest)) = toks.split_first() else { continue };
        if tag == "c" {
            continue;
        }
        let indices = match tag {
            "r" => 2,
            _ => 1,
        };
        let xs = terminated(no, &ints(no, rest)?, indices)?;
        let line = match (tag, xs.as_slice()) {
            ("a", [idx]) => ExpLine::Axiom(index(no, *idx)?),
            ("i", [id, beta @ ..]) => ExpLine::Inst(index(no, *id)?, assignment(no, beta)?),
            ("r", [a, b, v, ann @ ..]) if *v > 0 => {
                ExpLine::Res(index(no, *a)?, index(no, *b)?, Var(*v as u32), assignment(no, ann)?)
            }
            ("a" | "i" | "r", _) => return perr(no, "malformed line"),
            (other, _) => return perr(no, format!("unknown line type `{other}`")),
        };
        proof.lines.push(line);
    }
    Ok(proof)
}

pub fn serialize_exp_proof(p: &ExpProof) -> String {
    let mut out = String::new();
    let lits = |a: &PartialAssignment| a.lits().map(|l| format!(" {l}")).collect::<String>();
    for l in &p.lines {
        let _ = match l {
            ExpLine::Axiom(i) => writeln!(out, "a {i} 0"),
            ExpLine::Inst(id, b) => writeln!(out, "i {id}{} 0", lits(b)),
            ExpLine::Res(a, b, v, ann) => writeln!(out, "r {a} {b} {v}{} 0", lits(ann)),
        };
    }
    out
}

enum Source {
    /// Axioms are matrix clauses, derived on demand.
    Matrix(Vec<Clause>),
    /// Axioms are view clauses, already derived.
    View,
}

struct Expander<'a> {
    ts: &'a mut TranslationState,
    source: Source,
    ax_cache: HashMap<usize, ClauseId>,
    bridges: HashMap<(Lit, PartialAssignment, PartialAssignment), ClauseId>,
    lines: Vec<(BTreeSet<AnnLit>, ClauseId)>,
}

impl Expander<'_> {
    fn deps(&self, x: Var) -> BTreeSet<Var> {
        self.ts.prefix().deps(x).cloned().unwrap_or_default()
    }

    /// Kernel literal for the positive annotated variable `x^α`.
    fn kann(&mut self, x: Var, alpha: &PartialAssignment) -> Result<Lit> {
        let base = self.ts.klit(x.pos())?;
        if alpha.is_empty() {
            return Ok(base);
        }
        Ok(self.ts.ext(ExtKind::And, alpha.clone(), vec![base])?.pos())
    }

    fn axiom(&mut self, no: usize, idx: usize) -> Result<()> {
        let (c, mut id) = match &self.source {
            Source::Matrix(m) => {
                let c = m.get(idx).cloned().ok_or_else(|| TranslateError::Invalid {
                    line: no,
                    msg: format!("matrix index {idx} out of range"),
                })?;
                let id = match self.ax_cache.get(&idx) {
                    Some(&id) => id,
                    None => {
                        let id = self.ts.apply(crate::kernel::KernelStep::Ax(idx))?[0];
                        self.ax_cache.insert(idx, id);
                        id
                    }
                };
                (c, id)
            }
            Source::View => {
                let v = self.ts.view_clause(idx).ok_or_else(|| TranslateError::Invalid {
                    line: no,
                    msg: format!("clause index {idx} out of range"),
                })?;
                (v.clause.clone(), v.id)
            }
        };
        if c.is_tautology() {
            return Err(TranslateError::Invalid {
                line: no,
                msg: "axiom clause is tautological".into(),
            });
        }
        let univ: Vec<Lit> = c.iter().filter(|l| self.ts.is_universal(l.var())).collect();
        let falsify = PartialAssignment::from_lits(univ.iter().map(|&l| !l))
            .expect("non-tautological clause");
        let mut out = BTreeSet::new();
        let exist: Vec<Lit> = c.iter().filter(|l| !self.ts.is_universal(l.var())).collect();
        for l in exist {
            let alpha = falsify.restrict(&self.deps(l.var()));
            if !alpha.is_empty() {
                let base = self.ts.klit(l.var().pos())?;
                let v = self.ts.ext(ExtKind::And, alpha.clone(), vec![base])?;
                let d = self.ts.defs(v);
                let def = if l.is_positive() { d[1] } else { d[0] };
                id = self.ts.res(id, def, base.var())?;
            }
            out.insert(AnnLit { lit: l, ann: alpha });
        }
        for u in univ {
            id = self.ts.red(id, u)?;
        }
        self.lines.push((out, id));
        Ok(())
    }

    /// Clause replacing `x^α` (with the polarity of `l`) by `x^α'` and the
    /// negation of the added assignment.
    fn bridge(&mut self, l: Lit, alpha: &PartialAssignment, alpha2: &PartialAssignment) -> Result<ClauseId> {
        let key = (l, alpha.clone(), alpha2.clone());
        if let Some(&id) = self.bridges.get(&key) {
            return Ok(id);
        }
        let base = self.ts.klit(l.var().pos())?;
        let v2 = self.ts.ext(ExtKind::And, alpha2.clone(), vec![base])?;
        let d2 = self.ts.defs(v2);
        let id = if alpha.is_empty() {
            if l.is_positive() {
                d2[1]
            } else {
                d2[0]
            }
        } else {
            let v1 = self.ts.ext(ExtKind::And, alpha.clone(), vec![base])?;
            let d1 = self.ts.defs(v1);
            let mut id = if l.is_positive() {
                self.ts.res(d1[0], d2[1], base.var())?
            } else {
                self.ts.res(d1[1], d2[0], base.var())?
            };
            for a in alpha.lits() {
                id = self.ts.red(id, !a)?;
            }
            id
        };
        self.bridges.insert(key, id);
        Ok(id)
    }

    fn inst(&mut self, no: usize, j: usize, beta: &PartialAssignment) -> Result<()> {
        let (clause, mut id) = self.line(no, j)?;
        let mut removed = BTreeSet::new();
        let mut out = BTreeSet::new();
        for a in clause {
            let x = a.lit.var();
            let mut open = self.deps(x);
            for v in a.ann.domain() {
                open.remove(&v);
            }
            let add = beta.restrict(&open);
            if add.is_empty() {
                out.insert(a);
                continue;
            }
            let mut alpha2 = a.ann.clone();
            for l in add.lits() {
                alpha2.insert(l.var(), l.is_positive());
                removed.insert(!l);
            }
            let b = self.bridge(a.lit, &a.ann, &alpha2)?;
            let pivot = self.kann(x, &a.ann)?.var();
            id = self.ts.res(id, b, pivot)?;
            out.insert(AnnLit {
                lit: a.lit,
                ann: alpha2,
            });
        }
        for l in removed {
            id = self.ts.red(id, l)?;
        }
        self.lines.push((out, id));
        Ok(())
    }

    fn resolve(&mut self, no: usize, j1: usize, j2: usize, v: Var, ann: &PartialAssignment) -> Result<()> {
        let (c1, id1) = self.line(no, j1)?;
        let (c2, id2) = self.line(no, j2)?;
        let p = AnnLit {
            lit: v.pos(),
            ann: ann.clone(),
        };
        let n = p.complement();
        let ok = (c1.contains(&p) && c2.contains(&n)) || (c1.contains(&n) && c2.contains(&p));
        if !ok {
            return Err(TranslateError::Invalid {
                line: no,
                msg: format!("pivot {v} with the given annotation is not clashing"),
            });
        }
        for u in ann.domain() {
            if !self.deps(v).contains(&u) {
                return Err(TranslateError::Invalid {
                    line: no,
                    msg: format!("annotation of {v} assigns {u}, which {v} does not depend on"),
                });
            }
        }
        let pivot = self.kann(v, ann)?.var();
        let id = self.ts.res(id1, id2, pivot)?;
        let out = c1
            .union(&c2)
            .filter(|a| **a != p && **a != n)
            .cloned()
            .collect();
        self.lines.push((out, id));
        Ok(())
    }

    fn line(&self, no: usize, j: usize) -> Result<(BTreeSet<AnnLit>, ClauseId)> {
        self.lines.get(j).cloned().ok_or_else(|| TranslateError::Invalid {
            line: no,
            msg: format!("line {j} is not derived yet"),
        })
    }

    fn run(&mut self, proof: &ExpProof) -> Result<()> {
        for (i, l) in proof.lines.iter().enumerate() {
            let no = i + 1;
            match l {
                ExpLine::Axiom(idx) => self.axiom(no, *idx)?,
                ExpLine::Inst(j, beta) => self.inst(no, *j, beta)?,
                ExpLine::Res(a, b, v, ann) => self.resolve(no, *a, *b, *v, ann)?,
            }
        }
        Ok(())
    }

    fn ends_empty(&self) -> bool {
        self.lines.last().is_some_and(|(c, _)| c.is_empty())
    }
}

fn expand(ts: &mut TranslationState, source: Source, proof: &ExpProof) -> Result<bool> {
    let mut ex = Expander {
        ts,
        source,
        ax_cache: HashMap::new(),
        bridges: HashMap::new(),
        lines: Vec::new(),
    };
    ex.run(proof)?;
    Ok(ex.ends_empty())
}

/// Translates an expansion refutation of `f`.
pub fn translate_expres(f: &Formula, proof: &ExpProof) -> Result<Translation> {
    let mut ts = TranslationState::new(f);
    let refutes = expand(&mut ts, Source::Matrix(f.matrix.clone()), proof)?;
    let empty = refutes && ts.last_clause_empty();
    Ok(Translation::new(f, ts.into_steps(), empty))
}

/// Translates an expansion refutation of `f` with its dependencies cut down
/// to the reflexive resolution-path relation. Axiom indices refer to the
/// matrix of `f`.
pub fn translate_idrc(f: &Formula, proof: &ExpProof) -> Result<Translation> {
    let mut ts = TranslationState::with_axioms(f)?;
    let target = restrict_to_drrs(f);
    for u in f.prefix.universals() {
        let spurious = f
            .prefix
            .existentials()
            .any(|x| f.prefix.depends_on(x, u) && !target.prefix.depends_on(x, u));
        if spurious {
            super::rrs_rewrite(&mut ts, u)?;
        }
    }
    for x in f.prefix.existentials() {
        if ts.prefix().deps(x) != target.prefix.deps(x) {
            return Err(TranslateError::Internal(format!(
                "rewritten dependency set of {x} differs from the relation"
            )));
        }
    }
    let refutes = expand(&mut ts, Source::View, proof)?;
    let empty = refutes && ts.last_clause_empty();
    Ok(Translation::new(f, ts.into_steps(), empty))
}

type Ground = (Var, PartialAssignment);
/// Ground literals as (ground variable index, polarity).
type GroundClause = Vec<(usize, bool)>;

struct Searcher {
    /// Ground clauses with the proof line (axiom and instantiation) that
    /// would produce them.
    clauses: Vec<(GroundClause, usize, Option<PartialAssignment>)>,
    vars: Vec<Ground>,
    emitted: HashMap<usize, usize>,
    axioms: HashMap<usize, usize>,
    lines: Vec<ExpLine>,
}

type Derived = (usize, BTreeSet<(usize, bool)>);

impl Searcher {
    fn ground_line(&mut self, g: usize) -> usize {
        if let Some(&l) = self.emitted.get(&g) {
            return l;
        }
        let (_, idx, ref inst) = self.clauses[g];
        let inst = inst.clone();
        let ax = match self.axioms.get(&idx) {
            Some(&l) => l,
            None => {
                self.lines.push(ExpLine::Axiom(idx));
                let l = self.lines.len() - 1;
                self.axioms.insert(idx, l);
                l
            }
        };
        let line = match inst {
            Some(s) => {
                self.lines.push(ExpLine::Inst(ax, s));
                self.lines.len() - 1
            }
            None => ax,
        };
        self.emitted.insert(g, line);
        line
    }

    fn resolve(&mut self, a: Derived, b: Derived, v: usize) -> Derived {
        let (x, ann) = self.vars[v].clone();
        self.lines.push(ExpLine::Res(a.0, b.0, x, ann));
        let lits = a
            .1
            .union(&b.1)
            .filter(|&&(w, _)| w != v)
            .copied()
            .collect();
        (self.lines.len() - 1, lits)
    }

    fn leaf(&mut self, g: usize) -> Derived {
        let line = self.ground_line(g);
        (line, self.clauses[g].0.iter().copied().collect())
    }

    /// A derived clause falsified by `a`, or `None` if `a` extends to a model.
    fn refute(&mut self, a: &mut Vec<Option<bool>>) -> Option<Derived> {
        let mut unit = None;
        for (g, (c, _, _)) in self.clauses.iter().enumerate() {
            let mut open = None;
            let mut n_open = 0;
            let mut sat = false;
            for &(v, pos) in c {
                match a[v] {
                    Some(b) if b == pos => {
                        sat = true;
                        break;
                    }
                    Some(_) => {}
                    None => {
                        n_open += 1;
                        open = Some((v, pos));
                    }
                }
            }
            if sat {
                continue;
            }
            if n_open == 0 {
                return Some(self.leaf(g));
            }
            if n_open == 1 && unit.is_none() {
                unit = Some((g, open.unwrap()));
            }
        }
        if let Some((g, (v, pos))) = unit {
            a[v] = Some(pos);
            let sub = self.refute(a);
            a[v] = None;
            let sub = sub?;
            if !sub.1.contains(&(v, !pos)) {
                return Some(sub);
            }
            let u = self.leaf(g);
            return Some(self.resolve(sub, u, v));
        }
        let v = a.iter().position(Option::is_none)?;
        a[v] = Some(true);
        let left = self.refute(a);
        a[v] = None;
        let left = left?;
        if !left.1.contains(&(v, false)) {
            return Some(left);
        }
        a[v] = Some(false);
        let right = self.refute(a);
        a[v] = None;
        let right = right?;
        if !right.1.contains(&(v, true)) {
            return Some(right);
        }
        Some(self.resolve(left, right, v))
    }
}

/// Searches for an expansion refutation of `f` by grounding every clause
/// under every total universal assignment. Only lines used by the final
/// empty clause are emitted.
pub fn expand_prove(f: &Formula) -> Result<ExpProof> {
    let univ: Vec<Var> = f.prefix.universals().collect();
    if univ.len() > EXPAND_MAX_UNIVERSALS {
        return Err(TranslateError::Budget(format!(
            "{} universals, at most {EXPAND_MAX_UNIVERSALS} are expanded",
            univ.len()
        )));
    }
    let mut var_index: BTreeMap<Ground, usize> = BTreeMap::new();
    let mut s = Searcher {
        clauses: Vec::new(),
        vars: Vec::new(),
        emitted: HashMap::new(),
        axioms: HashMap::new(),
        lines: Vec::new(),
    };
    let mut seen = BTreeSet::new();
    for mask in 0u32..(1 << univ.len()) {
        let sigma = PartialAssignment::from_lits(
            univ.iter()
                .enumerate()
                .map(|(i, &u)| Lit::new(u, mask >> i & 1 == 1)),
        )
        .unwrap();
        for (idx, c) in f.matrix.iter().enumerate() {
            if c.is_tautology() {
                continue;
            }
            let univ_lits: Vec<Lit> = c.iter().filter(|l| f.prefix.is_universal(l.var())).collect();
            if univ_lits.iter().any(|l| sigma.get(l.var()) == Some(l.is_positive())) {
                continue;
            }
            let falsify = PartialAssignment::from_lits(univ_lits.iter().map(|&l| !l)).unwrap();
            let mut lits = Vec::new();
            let mut changes = false;
            for l in c.iter().filter(|l| !f.prefix.is_universal(l.var())) {
                let d = f.prefix.deps(l.var()).cloned().unwrap_or_default();
                let ann = sigma.restrict(&d);
                changes |= ann != falsify.restrict(&d);
                let key = (l.var(), ann);
                let next = var_index.len();
                let v = *var_index.entry(key.clone()).or_insert_with(|| {
                    s.vars.push(key);
                    next
                });
                lits.push((v, l.is_positive()));
            }
            lits.sort();
            lits.dedup();
            if seen.insert(lits.clone()) {
                s.clauses.push((lits, idx, changes.then(|| sigma.clone())));
            }
        }
    }
    let mut a = vec![None; s.vars.len()];
    match s.refute(&mut a) {
        Some(d) if d.1.is_empty() => Ok(ExpProof { lines: s.lines }),
        Some(_) => Err(TranslateError::Internal("search ended on a non-empty clause".into())),
        None => Err(TranslateError::Unprovable),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse_instance;
    use crate::kernel::check_proof;

    #[test]
    fn parse_round_trip() {
        let text = "a 0 0\ni 0 2 -3 0\nr 1 0 4 2 0\n";
        let p = parse_exp_proof(text).unwrap();
        assert_eq!(p.lines.len(), 3);
        assert_eq!(serialize_exp_proof(&p), text);
        assert!(parse_exp_proof("i 0 2 -2 0\n").is_err());
        assert!(parse_exp_proof("r 0 1 0\n").is_err());
    }

    #[test]
    fn instantiation_golden() {
        // ∀a ∀b ∀c, v depends on {a,b}, w on {c}; clause (¬a ∨ v ∨ w).
        let f = parse_instance("p cnf 5 1\na 1 2 3 0\nd 4 1 2 0\nd 5 3 0\n-1 4 5 0\n").unwrap();
        let p = parse_exp_proof("a 0 0\ni 0 2 -3 0\n").unwrap();
        let mut ts = TranslationState::new(&f);
        let mut ex = Expander {
            ts: &mut ts,
            source: Source::Matrix(f.matrix.clone()),
            ax_cache: HashMap::new(),
            bridges: HashMap::new(),
            lines: Vec::new(),
        };
        ex.run(&p).unwrap();
        let (c, id) = ex.lines[1].clone();
        let ann = |ls: &[i64]| PartialAssignment::from_lits(ls.iter().map(|&n| Lit::from_dimacs(n))).unwrap();
        let want: BTreeSet<AnnLit> = [
            AnnLit { lit: Lit::from_dimacs(4), ann: ann(&[1, 2]) },
            AnnLit { lit: Lit::from_dimacs(5), ann: ann(&[-3]) },
        ]
        .into_iter()
        .collect();
        assert_eq!(c, want);
        // The kernel clause has exactly the two annotated variables.
        let kc = ts.clause(id).clone();
        assert_eq!(kc.len(), 2);
        assert!(kc.iter().all(|l| l.is_positive() && l.var().id() > 5));
    }

    #[test]
    fn prove_and_translate_small_false_qbf() {
        let f = parse_instance("p cnf 2 2\ne 2 0\na 1 0\n1 2 0\n-1 -2 0\n").unwrap();
        let p = expand_prove(&f).unwrap();
        let t = translate_expres(&f, &p).unwrap();
        assert!(t.refutation);
        assert!(check_proof(&f, &t.proof).is_accepted());
    }

    #[test]
    fn true_formula_is_unprovable() {
        let f = parse_instance("p cnf 2 2\na 1 0\ne 2 0\n1 2 0\n-1 -2 0\n").unwrap();
        assert_eq!(expand_prove(&f).unwrap_err(), TranslateError::Unprovable);
    }

    #[test]
    fn bad_pivot_is_reported() {
        let f = parse_instance("p cnf 2 2\ne 2 0\na 1 0\n1 2 0\n-1 -2 0\n").unwrap();
        let p = parse_exp_proof("a 0 0\na 1 0\nr 0 1 2 1 0\n").unwrap();
        assert!(matches!(
            translate_expres(&f, &p).unwrap_err(),
            TranslateError::Invalid { line: 3, .. }
        ));
    }
}
