//! The clausal kernel: steps, proofs, the incremental checker state and the
//! whole-proof checker.

mod format;
pub mod oracle;

use std::collections::{BTreeMap, BTreeSet};

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::formula::{clause_deps, serialize, Clause, Formula, Lit, PartialAssignment, Prefix, Var};

pub use format::{parse_proof, serialize_proof, ProofParseError};

/// Index into the derived-clause table.
pub type ClauseId = usize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ExtKind {
    And,
    Or,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum KernelStep {
    Ax(usize),
    Res(ClauseId, ClauseId, Var),
    Weak(ClauseId, Vec<Lit>),
    Ext {
        kind: ExtKind,
        var: Var,
        cond: PartialAssignment,
        body: Vec<Lit>,
    },
    Red(ClauseId, Lit),
    PrefixU(Var),
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct KernelProof {
    /// Hex SHA-256 of the canonical serialization of the formula the proof
    /// was produced for.
    pub formula_hash: Option<String>,
    pub steps: Vec<KernelStep>,
}

/// Hex SHA-256 of the canonical serialization of `f`.
pub fn formula_hash(f: &Formula) -> String {
    hex::encode(Sha256::digest(serialize(f).as_bytes()))
}

impl KernelProof {
    pub fn new(steps: Vec<KernelStep>) -> KernelProof {
        KernelProof {
            formula_hash: None,
            steps,
        }
    }

    pub fn for_formula(f: &Formula, steps: Vec<KernelStep>) -> KernelProof {
        KernelProof {
            formula_hash: Some(formula_hash(f)),
            steps,
        }
    }

    /// False only when a header is present and names a different formula.
    pub fn matches(&self, f: &Formula) -> bool {
        self.formula_hash.as_ref().is_none_or(|h| *h == formula_hash(f))
    }

    pub fn ext_count(&self) -> usize {
        self.steps
            .iter()
            .filter(|s| matches!(s, KernelStep::Ext { .. }))
            .count()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExtRecord {
    pub var: Var,
    pub kind: ExtKind,
    pub cond: PartialAssignment,
    pub body: Vec<Lit>,
    pub deps: BTreeSet<Var>,
    /// Ids of the emitted definition clauses, in emission order.
    pub clauses: Vec<ClauseId>,
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum StepError {
    #[error("clause id {0} does not exist yet")]
    DanglingId(ClauseId),
    #[error("matrix index {0} is out of range")]
    AxiomOutOfRange(usize),
    #[error("pivot {0} does not occur with opposite signs in the premises")]
    MissingPivot(Var),
    #[error("literal {0} is over an undeclared variable")]
    Undeclared(Lit),
    #[error("variable {0} is not fresh")]
    NotFresh(Var),
    #[error("condition literal {0} is not universal")]
    CondNotUniversal(Lit),
    #[error("extension variable {0} occurs in its own body")]
    SelfReference(Var),
    #[error("literal {0} is not in the clause")]
    NotInClause(Lit),
    #[error("literal {0} is not universal")]
    NotUniversal(Lit),
    #[error("reduction of {removed} blocked by existential {blocker}")]
    RedBlocked { removed: Lit, blocker: Lit },
    #[error("reduction of {0} blocked, its complement is in the clause")]
    RedComplement(Lit),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Accepted,
    Rejected { step: usize, reason: String },
}

impl Verdict {
    pub fn is_accepted(&self) -> bool {
        matches!(self, Verdict::Accepted)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CheckMode {
    /// The last derived clause must be empty.
    Refutation,
    /// Every step must check; the final clause may be anything.
    Derivation,
}

/// Incremental checker. Holds the current prefix (original plus extension
/// and prefix-weakening variables) and the derived-clause table.
#[derive(Clone, Debug)]
pub struct CheckerState {
    matrix: Vec<Clause>,
    prefix: Prefix,
    clauses: Vec<Clause>,
    exts: Vec<ExtRecord>,
    ext_index: BTreeMap<Var, usize>,
}

impl CheckerState {
    pub fn new(f: &Formula) -> CheckerState {
        CheckerState {
            matrix: f.matrix.clone(),
            prefix: f.prefix.clone(),
            clauses: Vec::new(),
            exts: Vec::new(),
            ext_index: BTreeMap::new(),
        }
    }

    pub fn prefix(&self) -> &Prefix {
        &self.prefix
    }

    pub fn matrix(&self) -> &[Clause] {
        &self.matrix
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    pub fn clause(&self, id: ClauseId) -> Result<&Clause, StepError> {
        self.clauses.get(id).ok_or(StepError::DanglingId(id))
    }

    pub fn len(&self) -> usize {
        self.clauses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clauses.is_empty()
    }

    pub fn exts(&self) -> &[ExtRecord] {
        &self.exts
    }

    pub fn ext(&self, v: Var) -> Option<&ExtRecord> {
        self.ext_index.get(&v).map(|&i| &self.exts[i])
    }

    /// Smallest variable id above every declared variable.
    pub fn fresh_var(&self) -> Var {
        Var(self.prefix.max_var() + 1)
    }

    fn push(&mut self, c: Clause) -> ClauseId {
        self.clauses.push(c);
        self.clauses.len() - 1
    }

    fn declared(&self, l: Lit) -> Result<(), StepError> {
        if self.prefix.is_declared(l.var()) {
            Ok(())
        } else {
            Err(StepError::Undeclared(l))
        }
    }

    pub fn apply_ax(&mut self, i: usize) -> Result<ClauseId, StepError> {
        let c = self.matrix.get(i).ok_or(StepError::AxiomOutOfRange(i))?.clone();
        Ok(self.push(c))
    }

    pub fn apply_res(&mut self, a: ClauseId, b: ClauseId, pivot: Var) -> Result<ClauseId, StepError> {
        let (ca, cb) = (self.clause(a)?, self.clause(b)?);
        let (pa, pb) = if ca.contains(pivot.pos()) && cb.contains(pivot.neg()) {
            (pivot.pos(), pivot.neg())
        } else if ca.contains(pivot.neg()) && cb.contains(pivot.pos()) {
            (pivot.neg(), pivot.pos())
        } else {
            return Err(StepError::MissingPivot(pivot));
        };
        let r = ca.without(pa).union(&cb.without(pb));
        Ok(self.push(r))
    }

    pub fn apply_weak(&mut self, id: ClauseId, added: &[Lit]) -> Result<ClauseId, StepError> {
        for &l in added {
            self.declared(l)?;
        }
        let c = self.clause(id)?.with(added.iter().copied());
        Ok(self.push(c))
    }

    /// Registers an extension variable and emits its definition clauses.
    pub fn apply_ext(
        &mut self,
        kind: ExtKind,
        var: Var,
        cond: &PartialAssignment,
        body: &[Lit],
    ) -> Result<Vec<ClauseId>, StepError> {
        if self.prefix.is_declared(var) || var.id() == 0 {
            return Err(StepError::NotFresh(var));
        }
        for l in cond.lits() {
            if !self.prefix.is_universal(l.var()) {
                return Err(StepError::CondNotUniversal(l));
            }
        }
        let mut deps = BTreeSet::new();
        for &y in body {
            if y.var() == var {
                return Err(StepError::SelfReference(var));
            }
            self.declared(y)?;
            deps.extend(self.prefix.deps(y.var()).unwrap().iter().copied());
        }
        for u in cond.domain() {
            deps.remove(&u);
        }
        self.prefix
            .add_existential(var, deps.iter().copied())
            .expect("depsets are built from declared universals");

        let not_cond = cond.negated_clause();
        // And: v → y for each y, and (⋀y) → v. Or mirrors it with v negated.
        let (v_side, y_flip) = match kind {
            ExtKind::And => (var.neg(), false),
            ExtKind::Or => (var.pos(), true),
        };
        let mut ids = Vec::with_capacity(body.len() + 1);
        for &y in body {
            ids.push(self.push(not_cond.with([v_side, y.xor(y_flip)])));
        }
        let last = not_cond.with(
            std::iter::once(!v_side).chain(body.iter().map(|&y| y.xor(!y_flip))),
        );
        ids.push(self.push(last));

        self.ext_index.insert(var, self.exts.len());
        self.exts.push(ExtRecord {
            var,
            kind,
            cond: cond.clone(),
            body: body.to_vec(),
            deps,
            clauses: ids.clone(),
        });
        Ok(ids)
    }

    pub fn apply_red(&mut self, id: ClauseId, removed: Lit) -> Result<ClauseId, StepError> {
        let c = self.clause(id)?;
        if !c.contains(removed) {
            return Err(StepError::NotInClause(removed));
        }
        if !self.prefix.is_universal(removed.var()) {
            return Err(StepError::NotUniversal(removed));
        }
        if c.contains(!removed) {
            return Err(StepError::RedComplement(removed));
        }
        if let Some(blocker) = c.iter().find(|l| {
            self.prefix.is_existential(l.var()) && self.prefix.depends_on(l.var(), removed.var())
        }) {
            return Err(StepError::RedBlocked { removed, blocker });
        }
        let r = c.without(removed);
        Ok(self.push(r))
    }

    pub fn apply_prefix_u(&mut self, u: Var) -> Result<(), StepError> {
        if self.prefix.is_declared(u) || u.id() == 0 {
            return Err(StepError::NotFresh(u));
        }
        self.prefix.add_universal(u).unwrap();
        Ok(())
    }

    /// Applies one step, returning the ids of the clauses it created.
    pub fn apply(&mut self, step: &KernelStep) -> Result<Vec<ClauseId>, StepError> {
        match step {
            KernelStep::Ax(i) => self.apply_ax(*i).map(|c| vec![c]),
            KernelStep::Res(a, b, p) => self.apply_res(*a, *b, *p).map(|c| vec![c]),
            KernelStep::Weak(id, added) => self.apply_weak(*id, added).map(|c| vec![c]),
            KernelStep::Ext {
                kind,
                var,
                cond,
                body,
            } => self.apply_ext(*kind, *var, cond, body),
            KernelStep::Red(id, l) => self.apply_red(*id, *l).map(|c| vec![c]),
            KernelStep::PrefixU(u) => self.apply_prefix_u(*u).map(|_| Vec::new()),
        }
    }

    /// The current formula: prefix so far with the matrix and every derived
    /// clause as conjuncts.
    pub fn as_formula(&self) -> Formula {
        let mut matrix = self.matrix.clone();
        matrix.extend(self.clauses.iter().cloned());
        Formula::new(self.prefix.clone(), matrix, crate::formula::Origin::Generated)
            .expect("every derived clause is over declared variables")
    }

    pub fn clause_deps(&self, c: &Clause) -> BTreeSet<Var> {
        clause_deps(&self.prefix, c).unwrap_or_default()
    }
}

pub fn check_proof(f: &Formula, p: &KernelProof) -> Verdict {
    check_proof_with_mode(f, p, CheckMode::Refutation)
}

pub fn check_proof_with_mode(f: &Formula, p: &KernelProof, mode: CheckMode) -> Verdict {
    let mut st = CheckerState::new(f);
    for (i, step) in p.steps.iter().enumerate() {
        if let Err(e) = st.apply(step) {
            return Verdict::Rejected {
                step: i,
                reason: e.to_string(),
            };
        }
    }
    if mode == CheckMode::Refutation && !st.clauses.last().is_some_and(Clause::is_empty) {
        return Verdict::Rejected {
            step: p.steps.len(),
            reason: "proof does not end with the empty clause".to_string(),
        };
    }
    Verdict::Accepted
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse_instance;

    fn lits(ns: &[i64]) -> Vec<Lit> {
        ns.iter().map(|&n| Lit::from_dimacs(n)).collect()
    }

    fn ux() -> Formula {
        parse_instance("p cnf 2 2\ne 2 0\na 1 0\n1 2 0\n-1 -2 0\n").unwrap()
    }

    #[test]
    fn reduction_refutation_accepted() {
        let f = ux();
        let p = KernelProof::new(vec![
            KernelStep::Ax(0),
            KernelStep::Ax(1),
            KernelStep::Red(0, Lit::from_dimacs(1)),
            KernelStep::Red(1, Lit::from_dimacs(-1)),
            KernelStep::Res(2, 3, Var(2)),
        ]);
        assert_eq!(check_proof(&f, &p), Verdict::Accepted);
    }

    #[test]
    fn tautology_blocks_reduction() {
        let f = parse_instance("p cnf 2 2\ne 2 0\na 1 0\n1 -2 0\n-1 2 0\n").unwrap();
        let p = KernelProof::new(vec![
            KernelStep::Ax(0),
            KernelStep::Ax(1),
            KernelStep::Res(0, 1, Var(2)),
            KernelStep::Red(2, Lit::from_dimacs(1)),
        ]);
        let v = check_proof(&f, &p);
        assert!(matches!(v, Verdict::Rejected { step: 3, .. }), "{v:?}");
    }

    #[test]
    fn blocked_reduction_names_blocker() {
        let f = parse_instance("p cnf 2 1\na 1 0\ne 2 0\n1 2 0\n").unwrap();
        let mut st = CheckerState::new(&f);
        st.apply_ax(0).unwrap();
        assert_eq!(
            st.apply_red(0, Lit::from_dimacs(1)),
            Err(StepError::RedBlocked {
                removed: Lit::from_dimacs(1),
                blocker: Lit::from_dimacs(2)
            })
        );
    }

    #[test]
    fn conditioned_and_extension() {
        // ∀u v w ∃a(u,v): a^u := (u=1) → (a^u ↔ a)
        let f = parse_instance("p cnf 5 0\na 1 2 3 0\nd 4 1 2 0\nd 5 3 0\n").unwrap();
        let mut st = CheckerState::new(&f);
        let cond = PartialAssignment::from_lits(lits(&[1])).unwrap();
        let ids = st.apply_ext(ExtKind::And, Var(6), &cond, &lits(&[4])).unwrap();
        assert_eq!(ids, vec![0, 1]);
        assert_eq!(st.clauses()[0], Clause::from_dimacs(&[-1, -6, 4]));
        assert_eq!(st.clauses()[1], Clause::from_dimacs(&[-1, 6, -4]));
        assert_eq!(st.ext(Var(6)).unwrap().deps, BTreeSet::from([Var(2)]));
    }

    #[test]
    fn or_extension_and_constants() {
        let f = parse_instance("p cnf 3 0\na 1 0\ne 2 3 0\n").unwrap();
        let mut st = CheckerState::new(&f);
        let none = PartialAssignment::new();
        st.apply_ext(ExtKind::Or, Var(4), &none, &lits(&[2, 3])).unwrap();
        assert_eq!(
            st.clauses(),
            &[
                Clause::from_dimacs(&[4, -2]),
                Clause::from_dimacs(&[4, -3]),
                Clause::from_dimacs(&[-4, 2, 3]),
            ]
        );
        assert_eq!(st.ext(Var(4)).unwrap().deps, BTreeSet::from([Var(1)]));
        st.apply_ext(ExtKind::Or, Var(5), &none, &[]).unwrap();
        assert_eq!(st.clauses()[3], Clause::from_dimacs(&[-5]));
        st.apply_ext(ExtKind::And, Var(6), &none, &[]).unwrap();
        assert_eq!(st.clauses()[4], Clause::from_dimacs(&[6]));
    }

    #[test]
    fn extension_errors() {
        let f = parse_instance("p cnf 3 0\na 1 0\ne 2 3 0\n").unwrap();
        let mut st = CheckerState::new(&f);
        let none = PartialAssignment::new();
        assert_eq!(
            st.apply_ext(ExtKind::And, Var(2), &none, &[]),
            Err(StepError::NotFresh(Var(2)))
        );
        let bad = PartialAssignment::from_lits(lits(&[2])).unwrap();
        assert_eq!(
            st.apply_ext(ExtKind::And, Var(4), &bad, &[]),
            Err(StepError::CondNotUniversal(Lit::from_dimacs(2)))
        );
        assert_eq!(
            st.apply_ext(ExtKind::And, Var(4), &none, &lits(&[-4])),
            Err(StepError::SelfReference(Var(4)))
        );
    }

    #[test]
    fn resolution_and_weakening() {
        let f = parse_instance("p cnf 4 2\na 1 0\ne 2 3 4 0\n1 -2 3 0\n2 4 0\n").unwrap();
        let mut st = CheckerState::new(&f);
        st.apply_ax(0).unwrap();
        st.apply_ax(1).unwrap();
        let r = st.apply_res(0, 1, Var(2)).unwrap();
        assert_eq!(st.clauses()[r], Clause::from_dimacs(&[1, 3, 4]));
        assert_eq!(st.apply_res(0, 1, Var(3)), Err(StepError::MissingPivot(Var(3))));
        let w = st.apply_weak(1, &lits(&[3])).unwrap();
        assert_eq!(st.clauses()[w], Clause::from_dimacs(&[2, 3, 4]));
        assert_eq!(st.apply_weak(1, &lits(&[9])), Err(StepError::Undeclared(Lit::from_dimacs(9))));
        assert_eq!(st.apply_ax(2), Err(StepError::AxiomOutOfRange(2)));
        assert_eq!(st.apply_res(0, 17, Var(2)), Err(StepError::DanglingId(17)));
    }

    #[test]
    fn prefix_mode_tolerates_nonempty_end() {
        let f = ux();
        let p = KernelProof::new(vec![KernelStep::Ax(0), KernelStep::PrefixU(Var(3))]);
        assert!(!check_proof(&f, &p).is_accepted());
        assert!(check_proof_with_mode(&f, &p, CheckMode::Derivation).is_accepted());
    }

    #[test]
    fn hash_header() {
        let f = ux();
        let p = KernelProof::for_formula(&f, vec![]);
        assert!(p.matches(&f));
        let g = parse_instance("p cnf 2 1\na 1 0\ne 2 0\n1 2 0\n").unwrap();
        assert!(!p.matches(&g));
    }
}
