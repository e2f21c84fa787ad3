//! Variables, literals, clauses, dependency-set prefixes and DQBF formulas.
//!
//! Every formula is stored in dependency-set form: QBF input is compiled into
//! explicit dependency sets when it is parsed, so everything downstream works
//! with the DQBF definitions only.

mod generate;
mod parse;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

pub use generate::{gen_duality, gen_select};
pub use parse::{parse_dqdimacs, parse_instance, parse_qdimacs, serialize, ParseError};

/// A propositional variable. Ids start at 1, matching the DIMACS convention.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var(pub u32);

impl Var {
    pub fn new(id: u32) -> Var {
        assert!(id > 0, "variable ids start at 1");
        Var(id)
    }

    pub fn id(self) -> u32 {
        self.0
    }

    pub fn pos(self) -> Lit {
        Lit::new(self, true)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn neg(self) -> Lit {
        Lit::new(self, false)
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A literal. Ordering is by variable id, then polarity (negative first),
/// which gives clauses their canonical order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Lit {
    var: Var,
    positive: bool,
}

impl Lit {
    pub fn new(var: Var, positive: bool) -> Lit {
        Lit { var, positive }
    }

    /// Builds a literal from a signed DIMACS integer. Panics on zero.
    pub fn from_dimacs(n: i64) -> Lit {
        assert!(n != 0 && n.unsigned_abs() <= u32::MAX as u64);
        Lit::new(Var(n.unsigned_abs() as u32), n > 0)
    }

    pub fn to_dimacs(self) -> i64 {
        if self.positive {
            self.var.0 as i64
        } else {
            -(self.var.0 as i64)
        }
    }

    pub fn var(self) -> Var {
        self.var
    }

    pub fn is_positive(self) -> bool {
        self.positive
    }

    /// Literal with the same variable and the given polarity flipped when
    /// `flip` is set.
    pub fn xor(self, flip: bool) -> Lit {
        Lit::new(self.var, self.positive ^ flip)
    }
}

impl std::ops::Not for Lit {
    type Output = Lit;

    fn not(self) -> Lit {
        Lit::new(self.var, !self.positive)
    }
}

impl fmt::Display for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_dimacs())
    }
}

/// A clause: a duplicate-free set of literals kept in canonical order.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Clause(Vec<Lit>);

impl Clause {
    pub fn new<I: IntoIterator<Item = Lit>>(lits: I) -> Clause {
        let mut lits: Vec<Lit> = lits.into_iter().collect();
        lits.sort_unstable();
        lits.dedup();
        Clause(lits)
    }

    pub fn empty() -> Clause {
        Clause(Vec::new())
    }

    pub fn from_dimacs(lits: &[i64]) -> Clause {
        Clause::new(lits.iter().map(|&n| Lit::from_dimacs(n)))
    }

    pub fn lits(&self) -> &[Lit] {
        &self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = Lit> + '_ {
        self.0.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, lit: Lit) -> bool {
        self.0.binary_search(&lit).is_ok()
    }

    pub fn contains_var(&self, var: Var) -> bool {
        self.contains(var.pos()) || self.contains(var.neg())
    }

    pub fn is_tautology(&self) -> bool {
        self.0.windows(2).any(|w| w[0].var() == w[1].var())
    }

    pub fn is_subset(&self, other: &Clause) -> bool {
        self.iter().all(|l| other.contains(l))
    }

    pub fn without(&self, lit: Lit) -> Clause {
        Clause(self.0.iter().copied().filter(|&l| l != lit).collect())
    }

    pub fn with<I: IntoIterator<Item = Lit>>(&self, extra: I) -> Clause {
        Clause::new(self.iter().chain(extra))
    }

    pub fn union(&self, other: &Clause) -> Clause {
        self.with(other.iter())
    }

    pub fn map<F: FnMut(Lit) -> Lit>(&self, f: F) -> Clause {
        Clause::new(self.iter().map(f))
    }

    pub fn vars(&self) -> impl Iterator<Item = Var> + '_ {
        self.iter().map(Lit::var)
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.0 {
            write!(f, "{} ", l)?;
        }
        write!(f, "0")
    }
}

impl FromIterator<Lit> for Clause {
    fn from_iter<I: IntoIterator<Item = Lit>>(iter: I) -> Clause {
        Clause::new(iter)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum QuantKind {
    Universal,
    Existential,
}

/// Declaration of one variable. For a universal `u` the dependency set is
/// always `{u}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VarDecl {
    pub kind: QuantKind,
    pub deps: BTreeSet<Var>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FormulaError {
    #[error("variable {0} is not declared")]
    Undeclared(Var),
    #[error("variable {0} is declared twice")]
    Duplicate(Var),
    #[error("dependency {dep} of variable {var} is not a universal variable")]
    NonUniversalDep { var: Var, dep: Var },
    #[error("clause is tautological, its negation is inconsistent")]
    TautologicalClause,
    #[error("{0}")]
    Generator(String),
}

/// A prefix with explicit dependency sets. Declaration order is kept so
/// QBF-shaped prefixes can be written back as quantifier blocks.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Prefix {
    decls: BTreeMap<Var, VarDecl>,
    order: Vec<Var>,
}

impl Prefix {
    pub fn new() -> Prefix {
        Prefix::default()
    }

    pub fn add_universal(&mut self, u: Var) -> Result<(), FormulaError> {
        if self.decls.contains_key(&u) {
            return Err(FormulaError::Duplicate(u));
        }
        self.decls.insert(
            u,
            VarDecl {
                kind: QuantKind::Universal,
                deps: BTreeSet::from([u]),
            },
        );
        self.order.push(u);
        Ok(())
    }

    pub fn add_existential<I>(&mut self, x: Var, deps: I) -> Result<(), FormulaError>
    where
        I: IntoIterator<Item = Var>,
    {
        if self.decls.contains_key(&x) {
            return Err(FormulaError::Duplicate(x));
        }
        let deps: BTreeSet<Var> = deps.into_iter().collect();
        if let Some(&bad) = deps.iter().find(|&&d| !self.is_universal(d)) {
            return Err(FormulaError::NonUniversalDep { var: x, dep: bad });
        }
        self.decls.insert(
            x,
            VarDecl {
                kind: QuantKind::Existential,
                deps,
            },
        );
        self.order.push(x);
        Ok(())
    }

    /// Replaces the dependency set of an existential variable.
    pub fn set_deps(&mut self, x: Var, deps: BTreeSet<Var>) -> Result<(), FormulaError> {
        if let Some(&bad) = deps.iter().find(|&&d| !self.is_universal(d)) {
            return Err(FormulaError::NonUniversalDep { var: x, dep: bad });
        }
        match self.decls.get_mut(&x) {
            Some(d) if d.kind == QuantKind::Existential => {
                d.deps = deps;
                Ok(())
            }
            Some(_) => Err(FormulaError::NonUniversalDep { var: x, dep: x }),
            None => Err(FormulaError::Undeclared(x)),
        }
    }

    pub fn get(&self, v: Var) -> Option<&VarDecl> {
        self.decls.get(&v)
    }

    pub fn is_declared(&self, v: Var) -> bool {
        self.decls.contains_key(&v)
    }

    pub fn is_universal(&self, v: Var) -> bool {
        matches!(self.decls.get(&v), Some(d) if d.kind == QuantKind::Universal)
    }

    pub fn is_existential(&self, v: Var) -> bool {
        matches!(self.decls.get(&v), Some(d) if d.kind == QuantKind::Existential)
    }

    /// `D_v`; `{u}` for a universal `u`.
    pub fn deps(&self, v: Var) -> Option<&BTreeSet<Var>> {
        self.decls.get(&v).map(|d| &d.deps)
    }

    pub fn depends_on(&self, x: Var, u: Var) -> bool {
        self.decls.get(&x).is_some_and(|d| d.deps.contains(&u))
    }

    /// Variables in declaration order.
    pub fn vars(&self) -> &[Var] {
        &self.order
    }

    pub fn universals(&self) -> impl Iterator<Item = Var> + '_ {
        self.order.iter().copied().filter(|&v| self.is_universal(v))
    }

    pub fn existentials(&self) -> impl Iterator<Item = Var> + '_ {
        self.order.iter().copied().filter(|&v| self.is_existential(v))
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn max_var(&self) -> u32 {
        self.decls.keys().next_back().map_or(0, |v| v.0)
    }

    /// Keeps only the given variables, preserving declaration order.
    pub fn restrict(&self, keep: &BTreeSet<Var>) -> Prefix {
        let mut out = Prefix::new();
        for &v in &self.order {
            if !keep.contains(&v) {
                continue;
            }
            let d = &self.decls[&v];
            let d = match d.kind {
                QuantKind::Universal => d.clone(),
                QuantKind::Existential => VarDecl {
                    kind: QuantKind::Existential,
                    deps: d.deps.intersection(keep).copied().collect(),
                },
            };
            out.decls.insert(v, d);
            out.order.push(v);
        }
        out
    }

    /// True when dependency sets are exactly what a linear quantifier order
    /// (the declaration order) would give.
    pub fn is_qbf_shaped(&self) -> bool {
        let mut seen = BTreeSet::new();
        for &v in &self.order {
            let d = &self.decls[&v];
            match d.kind {
                QuantKind::Universal => {
                    seen.insert(v);
                }
                QuantKind::Existential => {
                    if d.deps != seen {
                        return false;
                    }
                }
            }
        }
        true
    }
}

/// Where a formula came from; decides how it is written back.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Origin {
    Qdimacs,
    Dqdimacs,
    Generated,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Formula {
    pub prefix: Prefix,
    pub matrix: Vec<Clause>,
    pub origin: Origin,
}

impl Formula {
    /// Builds a formula, checking that the matrix only mentions declared
    /// variables.
    pub fn new(prefix: Prefix, matrix: Vec<Clause>, origin: Origin) -> Result<Formula, FormulaError> {
        for c in &matrix {
            if let Some(v) = c.vars().find(|&v| !prefix.is_declared(v)) {
                return Err(FormulaError::Undeclared(v));
            }
        }
        Ok(Formula {
            prefix,
            matrix,
            origin,
        })
    }

    pub fn clause_deps(&self, c: &Clause) -> Result<BTreeSet<Var>, FormulaError> {
        clause_deps(&self.prefix, c)
    }
}

/// Union of `D_{var(l)}` over the literals of `c`.
pub fn clause_deps(prefix: &Prefix, c: &Clause) -> Result<BTreeSet<Var>, FormulaError> {
    let mut out = BTreeSet::new();
    for v in c.vars() {
        let d = prefix.deps(v).ok_or(FormulaError::Undeclared(v))?;
        out.extend(d.iter().copied());
    }
    Ok(out)
}

/// The negation of a clause as a list of unit clauses.
pub fn negate_clause(c: &Clause) -> Result<Vec<Clause>, FormulaError> {
    if c.is_tautology() {
        return Err(FormulaError::TautologicalClause);
    }
    Ok(c.iter().map(|l| Clause::new([!l])).collect())
}

/// A partial assignment to universal variables, kept as the set of literals
/// it makes true.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PartialAssignment(BTreeMap<Var, bool>);

impl PartialAssignment {
    pub fn new() -> PartialAssignment {
        PartialAssignment::default()
    }

    /// Fails with the offending variable when the literals are inconsistent.
    pub fn from_lits<I: IntoIterator<Item = Lit>>(lits: I) -> Result<PartialAssignment, Var> {
        let mut map = BTreeMap::new();
        for l in lits {
            if let Some(&old) = map.get(&l.var()) {
                if old != l.is_positive() {
                    return Err(l.var());
                }
            }
            map.insert(l.var(), l.is_positive());
        }
        Ok(PartialAssignment(map))
    }

    pub fn get(&self, v: Var) -> Option<bool> {
        self.0.get(&v).copied()
    }

    pub fn insert(&mut self, v: Var, value: bool) {
        self.0.insert(v, value);
    }

    pub fn domain(&self) -> impl Iterator<Item = Var> + '_ {
        self.0.keys().copied()
    }

    pub fn lits(&self) -> impl Iterator<Item = Lit> + '_ {
        self.0.iter().map(|(&v, &b)| Lit::new(v, b))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn restrict(&self, keep: &BTreeSet<Var>) -> PartialAssignment {
        PartialAssignment(
            self.0
                .iter()
                .filter(|(v, _)| keep.contains(v))
                .map(|(&v, &b)| (v, b))
                .collect(),
        )
    }

    /// The clause falsified exactly by this assignment (`¬α`).
    pub fn negated_clause(&self) -> Clause {
        Clause::new(self.lits().map(|l| !l))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eur_prefix() -> Prefix {
        let mut p = Prefix::new();
        p.add_existential(Var(1), []).unwrap();
        p.add_universal(Var(2)).unwrap();
        for x in 3..=5 {
            p.add_existential(Var(x), [Var(2)]).unwrap();
        }
        p
    }

    #[test]
    fn clause_is_canonical() {
        let c = Clause::from_dimacs(&[3, -1, 3, 1, -2]);
        assert_eq!(
            c.iter().map(Lit::to_dimacs).collect::<Vec<_>>(),
            vec![-1, 1, -2, 3]
        );
        assert!(c.is_tautology());
        assert!(!Clause::from_dimacs(&[1, 2]).is_tautology());
        assert!(Clause::empty().is_empty());
    }

    #[test]
    fn complement_is_involution() {
        let l = Lit::from_dimacs(-7);
        assert_eq!(!!l, l);
        assert_eq!((!l).to_dimacs(), 7);
    }

    #[test]
    fn clause_deps_examples() {
        let p = eur_prefix();
        let c = Clause::from_dimacs(&[2, 4]);
        assert_eq!(clause_deps(&p, &c).unwrap(), BTreeSet::from([Var(2)]));
        assert!(clause_deps(&p, &Clause::empty()).unwrap().is_empty());
        assert_eq!(
            clause_deps(&p, &Clause::from_dimacs(&[9])),
            Err(FormulaError::Undeclared(Var(9)))
        );
    }

    #[test]
    fn negate_clause_examples() {
        let c = Clause::from_dimacs(&[1, -2]);
        assert_eq!(
            negate_clause(&c).unwrap(),
            vec![Clause::from_dimacs(&[-1]), Clause::from_dimacs(&[2])]
        );
        assert!(negate_clause(&Clause::empty()).unwrap().is_empty());
        assert_eq!(
            negate_clause(&Clause::from_dimacs(&[1, -1])),
            Err(FormulaError::TautologicalClause)
        );
    }

    #[test]
    fn existential_deps_must_be_universal() {
        let mut p = eur_prefix();
        assert_eq!(
            p.add_existential(Var(6), [Var(1)]),
            Err(FormulaError::NonUniversalDep {
                var: Var(6),
                dep: Var(1)
            })
        );
        assert_eq!(p.add_universal(Var(2)), Err(FormulaError::Duplicate(Var(2))));
        assert!(p.is_qbf_shaped());
    }

    #[test]
    fn assignment_rejects_conflicts() {
        assert_eq!(
            PartialAssignment::from_lits([Lit::from_dimacs(2), Lit::from_dimacs(-2)]),
            Err(Var(2))
        );
        let a = PartialAssignment::from_lits([Lit::from_dimacs(2), Lit::from_dimacs(-3)]).unwrap();
        assert_eq!(a.negated_clause(), Clause::from_dimacs(&[-2, 3]));
    }
}
