//! Proof translators into kernel proofs.
//!
//! Interference-style translators (QRAT, DQRAT, the reflexive resolution-path
//! rewrite) work on a [`TranslationState`]: a view of the current formula in
//! input variable names, where each view clause is backed by a kernel clause
//! over representative variables. A rewrite replaces some representatives by
//! fresh extension variables and re-derives every affected clause.

mod expres;
mod fork;
mod qrat;
mod rewrite;

use std::collections::{BTreeMap, BTreeSet, HashMap};

use thiserror::Error;

use crate::analysis::{rup_to_resolution, RupError};
use crate::formula::{Clause, Formula, Lit, PartialAssignment, Prefix, QuantKind, Var};
use crate::kernel::{CheckerState, ClauseId, ExtKind, KernelProof, KernelStep, StepError};

pub use expres::{
    expand_prove, parse_exp_proof, serialize_exp_proof, translate_expres, translate_idrc, AnnLit,
    ExpLine, ExpProof,
};
pub use fork::{fork_ext_expand, parse_fork_proof, translate_fork, ForkLine, ForkProof};
pub use qrat::{parse_qrat_proof, translate_dqrat, translate_qrat, QratLine, QratProof};
pub use rewrite::{mixed_reduction, qrata_rewrite, rrs_rewrite};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum TranslateError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("proof step {line}: {msg}")]
    Invalid { line: usize, msg: String },
    #[error("proof step {line}: not certifiable: {reasons}")]
    Uncertifiable { line: usize, reasons: String },
    #[error("internal inconsistency: {0}")]
    Internal(String),
    #[error("kernel rejected a generated step: {0}")]
    Kernel(#[from] StepError),
    #[error("budget exceeded: {0}")]
    Budget(String),
    #[error("formula is true, no refutation exists")]
    Unprovable,
}

impl From<RupError> for TranslateError {
    fn from(e: RupError) -> Self {
        match e {
            RupError::Step(s) => TranslateError::Kernel(s),
            other => TranslateError::Internal(other.to_string()),
        }
    }
}

pub type Result<T> = std::result::Result<T, TranslateError>;

/// Result of a translation: the kernel proof and whether it refutes.
#[derive(Clone, Debug)]
pub struct Translation {
    pub proof: KernelProof,
    pub refutation: bool,
}

impl Translation {
    fn new(f: &Formula, steps: Vec<KernelStep>, last_empty: bool) -> Translation {
        Translation {
            proof: KernelProof::for_formula(f, steps),
            refutation: last_empty,
        }
    }
}

/// One clause of the current formula view.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ViewClause {
    /// The clause in input variable names.
    pub clause: Clause,
    /// Kernel clause holding the representative renaming of `clause`.
    pub id: ClauseId,
}

pub struct TranslationState {
    kernel: CheckerState,
    steps: Vec<KernelStep>,
    prefix: Prefix,
    view: Vec<Option<ViewClause>>,
    rep: BTreeMap<Var, Lit>,
    ext_cache: HashMap<(ExtKind, PartialAssignment, Vec<Lit>), Var>,
}

impl TranslationState {
    /// Starts from `f` without deriving any matrix clause.
    pub fn new(f: &Formula) -> TranslationState {
        TranslationState {
            kernel: CheckerState::new(f),
            steps: Vec::new(),
            prefix: f.prefix.clone(),
            view: Vec::new(),
            rep: f.prefix.vars().iter().map(|&v| (v, v.pos())).collect(),
            ext_cache: HashMap::new(),
        }
    }

    /// Starts from `f` with every matrix clause derived by an axiom step and
    /// placed in the view, in matrix order.
    pub fn with_axioms(f: &Formula) -> Result<TranslationState> {
        let mut ts = TranslationState::new(f);
        for (i, c) in f.matrix.iter().enumerate() {
            let id = ts.apply1(KernelStep::Ax(i))?;
            ts.view.push(Some(ViewClause {
                clause: c.clone(),
                id,
            }));
        }
        Ok(ts)
    }

    pub fn kernel(&self) -> &CheckerState {
        &self.kernel
    }

    pub fn steps(&self) -> &[KernelStep] {
        &self.steps
    }

    pub fn into_steps(self) -> Vec<KernelStep> {
        self.steps
    }

    pub fn prefix(&self) -> &Prefix {
        &self.prefix
    }

    /// Live view clauses with their view indices.
    pub fn live(&self) -> Vec<(usize, &ViewClause)> {
        self.view
            .iter()
            .enumerate()
            .filter_map(|(i, v)| v.as_ref().map(|v| (i, v)))
            .collect()
    }

    pub fn view_clause(&self, idx: usize) -> Option<&ViewClause> {
        self.view.get(idx).and_then(Option::as_ref)
    }

    /// The view as a plain formula over input names.
    pub fn view_formula(&self) -> Formula {
        let matrix = self.live().into_iter().map(|(_, v)| v.clause.clone()).collect();
        Formula::new(self.prefix.clone(), matrix, crate::formula::Origin::Generated)
            .expect("view clauses are over declared view variables")
    }

    pub fn find_clause(&self, c: &Clause) -> Option<usize> {
        self.view
            .iter()
            .position(|v| v.as_ref().is_some_and(|v| v.clause == *c))
    }

    pub fn push_view(&mut self, clause: Clause, id: ClauseId) -> usize {
        self.view.push(Some(ViewClause { clause, id }));
        self.view.len() - 1
    }

    pub fn replace_view(&mut self, idx: usize, clause: Clause, id: ClauseId) {
        self.view[idx] = Some(ViewClause { clause, id });
    }

    pub fn delete_view(&mut self, idx: usize) {
        self.view[idx] = None;
    }

    /// Declares a universal in the view and the kernel.
    pub fn declare_universal(&mut self, v: Var) -> Result<()> {
        self.prefix
            .add_universal(v)
            .map_err(|e| TranslateError::Internal(e.to_string()))?;
        let k = self.kernel.fresh_var();
        self.apply(KernelStep::PrefixU(k))?;
        self.rep.insert(v, k.pos());
        Ok(())
    }

    /// Declares an existential in the view only; its kernel representative
    /// is created on first use.
    pub fn declare_existential(&mut self, v: Var, deps: BTreeSet<Var>) -> Result<()> {
        self.prefix
            .add_existential(v, deps)
            .map_err(|e| TranslateError::Internal(e.to_string()))
    }

    /// Replaces the view dependency set of an existential.
    pub fn set_view_deps(&mut self, x: Var, deps: BTreeSet<Var>) -> Result<()> {
        self.prefix
            .set_deps(x, deps)
            .map_err(|e| TranslateError::Internal(e.to_string()))
    }

    /// Declares `v` innermost (depending on every view universal) unless it
    /// is already declared.
    pub fn ensure_declared(&mut self, v: Var) -> Result<()> {
        if !self.prefix.is_declared(v) {
            let all: BTreeSet<Var> = self.prefix.universals().collect();
            self.declare_existential(v, all)?;
        }
        Ok(())
    }

    pub fn apply(&mut self, step: KernelStep) -> Result<Vec<ClauseId>> {
        let ids = self.kernel.apply(&step)?;
        self.steps.push(step);
        Ok(ids)
    }

    fn apply1(&mut self, step: KernelStep) -> Result<ClauseId> {
        Ok(self.apply(step)?[0])
    }

    pub fn res(&mut self, a: ClauseId, b: ClauseId, pivot: Var) -> Result<ClauseId> {
        self.apply1(KernelStep::Res(a, b, pivot))
    }

    pub fn red(&mut self, id: ClauseId, l: Lit) -> Result<ClauseId> {
        self.apply1(KernelStep::Red(id, l))
    }

    pub fn weak(&mut self, id: ClauseId, target: &Clause) -> Result<ClauseId> {
        let c = self.kernel.clause(id)?.clone();
        let added: Vec<Lit> = target.iter().filter(|&l| !c.contains(l)).collect();
        self.apply1(KernelStep::Weak(id, added))
    }

    pub fn clause(&self, id: ClauseId) -> &Clause {
        &self.kernel.clauses()[id]
    }

    /// Extension variable for `kind(body)` under `cond`, defined once.
    pub fn ext(&mut self, kind: ExtKind, cond: PartialAssignment, body: Vec<Lit>) -> Result<Var> {
        let key = (kind, cond, body);
        if let Some(&v) = self.ext_cache.get(&key) {
            return Ok(v);
        }
        let v = self.kernel.fresh_var();
        self.apply(KernelStep::Ext {
            kind,
            var: v,
            cond: key.1.clone(),
            body: key.2.clone(),
        })?;
        self.ext_cache.insert(key, v);
        Ok(v)
    }

    /// A new extension variable, never shared with other definitions.
    pub fn ext_fresh(&mut self, kind: ExtKind, cond: PartialAssignment, body: Vec<Lit>) -> Result<Var> {
        let var = self.kernel.fresh_var();
        self.apply(KernelStep::Ext {
            kind,
            var,
            cond,
            body,
        })?;
        Ok(var)
    }

    /// Ids of the definition clauses of an extension variable.
    pub fn defs(&self, v: Var) -> Vec<ClauseId> {
        self.kernel.ext(v).map(|e| e.clauses.clone()).unwrap_or_default()
    }

    /// Kernel literal representing a view literal.
    pub fn klit(&mut self, l: Lit) -> Result<Lit> {
        if let Some(&k) = self.rep.get(&l.var()) {
            return Ok(k.xor(!l.is_positive()));
        }
        if !self.prefix.is_existential(l.var()) {
            return Err(TranslateError::Internal(format!(
                "variable {} has no kernel representative",
                l.var()
            )));
        }
        // View-only existential: a constant keeps the kernel prefix minimal.
        let fresh = self.ext_fresh(ExtKind::Or, PartialAssignment::new(), Vec::new())?;
        self.rep.insert(l.var(), fresh.pos());
        Ok(fresh.pos().xor(!l.is_positive()))
    }

    pub fn kclause(&mut self, c: &Clause) -> Result<Clause> {
        let mut out = Vec::with_capacity(c.len());
        for l in c.iter() {
            out.push(self.klit(l)?);
        }
        Ok(Clause::new(out))
    }

    pub fn rep(&self, v: Var) -> Option<Lit> {
        self.rep.get(&v).copied()
    }

    pub fn set_rep(&mut self, v: Var, k: Lit) {
        self.rep.insert(v, k);
    }

    /// Derives `target` by unit propagation from the given kernel clauses.
    /// Tautological targets are derived from a one-variable tautology.
    pub fn rup(&mut self, premises: &[ClauseId], target: &Clause) -> Result<ClauseId> {
        if target.is_tautology() {
            return self.tautology(target);
        }
        let steps = rup_to_resolution(&self.kernel, premises, target)?;
        let mut last = 0;
        for s in steps {
            last = self.apply1(s)?;
        }
        Ok(last)
    }

    /// Derives a tautological clause from the definition of `v ↔ y`.
    pub fn tautology(&mut self, target: &Clause) -> Result<ClauseId> {
        let y = target
            .lits()
            .windows(2)
            .find(|w| w[0].var() == w[1].var())
            .map(|w| w[1])
            .ok_or_else(|| TranslateError::Internal("tautology helper on non-tautology".into()))?;
        let v = self.ext(ExtKind::And, PartialAssignment::new(), vec![y.var().pos()])?;
        let d = self.defs(v);
        let t = self.res(d[0], d[1], v)?;
        self.weak(t, target)
    }

    /// Kernel ids of all live view clauses, except the view index `skip`.
    pub fn live_ids_except(&self, skip: Option<usize>) -> Vec<ClauseId> {
        self.live()
            .into_iter()
            .filter(|(i, _)| Some(*i) != skip)
            .map(|(_, v)| v.id)
            .collect()
    }

    pub fn is_universal(&self, v: Var) -> bool {
        self.prefix.get(v).map(|d| d.kind) == Some(QuantKind::Universal)
    }

    pub fn last_clause_empty(&self) -> bool {
        self.kernel.clauses().last().is_some_and(Clause::is_empty)
    }
}

/// Whole-line parsing helper shared by the proof formats.
pub(crate) fn ints(line: usize, toks: &[&str]) -> Result<Vec<i64>> {
    toks.iter()
        .map(|t| match t.parse::<i64>() {
            Ok(n) if n.unsigned_abs() <= u32::MAX as u64 => Ok(n),
            _ => Err(TranslateError::Parse {
                line,
                msg: format!("expected integer, found `{t}`"),
            }),
        })
        .collect()
}

/// Strips the terminating 0 of a line. The first `indices` entries are ids
/// and may be 0; any other 0 before the end is an error.
pub(crate) fn terminated(line: usize, xs: &[i64], indices: usize) -> Result<Vec<i64>> {
    let err = |msg: &str| {
        Err(TranslateError::Parse {
            line,
            msg: msg.into(),
        })
    };
    match xs.split_last() {
        Some((0, body)) if body.len() >= indices => {
            if body[indices..].contains(&0) {
                return err("tokens after terminating 0");
            }
            Ok(body.to_vec())
        }
        Some((0, _)) => err("missing fields"),
        _ => err("line is not terminated by 0"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse_instance;
    use crate::kernel::{check_proof_with_mode, CheckMode};

    #[test]
    fn tautology_helper() {
        let f = parse_instance("p cnf 2 0\na 1 0\ne 2 0\n").unwrap();
        let mut ts = TranslationState::new(&f);
        let t = Clause::from_dimacs(&[1, 2, -2]);
        let id = ts.tautology(&t).unwrap();
        assert_eq!(ts.clause(id), &t);
        let p = KernelProof::new(ts.into_steps());
        assert!(check_proof_with_mode(&f, &p, CheckMode::Derivation).is_accepted());
    }

    #[test]
    fn view_only_existentials_get_fresh_reps() {
        let f = parse_instance("p cnf 2 0\na 1 0\ne 2 0\n").unwrap();
        let mut ts = TranslationState::new(&f);
        ts.ensure_declared(Var(7)).unwrap();
        ts.ensure_declared(Var(8)).unwrap();
        let a = ts.klit(Var(7).pos()).unwrap();
        let b = ts.klit(Var(8).neg()).unwrap();
        assert_ne!(a.var(), b.var());
        assert!(!b.is_positive());
        assert_eq!(ts.klit(Var(1).pos()).unwrap(), Var(1).pos());
    }
}
