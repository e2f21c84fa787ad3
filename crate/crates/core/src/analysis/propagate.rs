//! Unit propagation with a reproducible trace.

use std::collections::BTreeMap;

use crate::formula::{Clause, Lit, Var};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome {
    /// The clause with this index is falsified. `None` when the assumptions
    /// themselves are contradictory.
    Conflict(Option<usize>),
    /// No clause is unit or falsified; the final assignment.
    Fixpoint(Vec<Lit>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PropagationTrace {
    /// Forced literals with the index of the clause that forced them.
    pub forced: Vec<(Lit, usize)>,
    pub outcome: Outcome,
}

impl PropagationTrace {
    pub fn is_conflict(&self) -> bool {
        matches!(self.outcome, Outcome::Conflict(_))
    }
}

enum Status {
    Satisfied,
    Falsified,
    Unit(Lit),
    Open,
}

fn status(c: &Clause, assign: &BTreeMap<Var, bool>) -> Status {
    let mut open = None;
    let mut n_open = 0;
    for l in c.iter() {
        match assign.get(&l.var()) {
            Some(&b) if b == l.is_positive() => return Status::Satisfied,
            Some(_) => {}
            None => {
                n_open += 1;
                open = Some(l);
            }
        }
    }
    match (n_open, open) {
        (0, _) => Status::Falsified,
        (1, Some(l)) => Status::Unit(l),
        _ => Status::Open,
    }
}

/// Propagates to exhaustion. The lowest-index clause that is unit or
/// falsified acts first, and the scan restarts after every forced literal.
pub fn unit_propagate(clauses: &[Clause], assumptions: &[Lit]) -> PropagationTrace {
    let mut assign: BTreeMap<Var, bool> = BTreeMap::new();
    let mut order: Vec<Lit> = Vec::new();
    for &a in assumptions {
        match assign.get(&a.var()) {
            Some(&b) if b != a.is_positive() => {
                return PropagationTrace {
                    forced: Vec::new(),
                    outcome: Outcome::Conflict(None),
                }
            }
            Some(_) => {}
            None => {
                assign.insert(a.var(), a.is_positive());
                order.push(a);
            }
        }
    }
    let mut forced = Vec::new();
    'scan: loop {
        for (i, c) in clauses.iter().enumerate() {
            match status(c, &assign) {
                Status::Falsified => {
                    return PropagationTrace {
                        forced,
                        outcome: Outcome::Conflict(Some(i)),
                    }
                }
                Status::Unit(l) => {
                    assign.insert(l.var(), l.is_positive());
                    order.push(l);
                    forced.push((l, i));
                    continue 'scan;
                }
                Status::Satisfied | Status::Open => {}
            }
        }
        return PropagationTrace {
            forced,
            outcome: Outcome::Fixpoint(order),
        };
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cls(v: &[&[i64]]) -> Vec<Clause> {
        v.iter().map(|c| Clause::from_dimacs(c)).collect()
    }

    #[test]
    fn eur_trace() {
        // C1..C6 of the example, without (u ∨ z).
        let f = cls(&[
            &[1, -2, 3, -4],
            &[-3, 4, 5],
            &[1, -5],
            &[1, 3, 4],
            &[-3, -4],
            &[-1, -2, 5],
        ]);
        let t = unit_propagate(&f, &[Lit::from_dimacs(-1), Lit::from_dimacs(-4)]);
        assert_eq!(
            t.forced,
            vec![(Lit::from_dimacs(-5), 2), (Lit::from_dimacs(-3), 1)]
        );
        assert_eq!(t.outcome, Outcome::Conflict(Some(3)));
    }

    #[test]
    fn empty_clause_conflicts() {
        let t = unit_propagate(&cls(&[&[1, 2], &[]]), &[]);
        assert_eq!(t.outcome, Outcome::Conflict(Some(1)));
    }

    #[test]
    fn fixpoint_keeps_assumptions() {
        let t = unit_propagate(&cls(&[&[1, 2, 3]]), &[Lit::from_dimacs(-1)]);
        assert_eq!(t.outcome, Outcome::Fixpoint(vec![Lit::from_dimacs(-1)]));
    }

    #[test]
    fn inconsistent_assumptions() {
        let t = unit_propagate(&[], &[Lit::from_dimacs(1), Lit::from_dimacs(-1)]);
        assert_eq!(t.outcome, Outcome::Conflict(None));
    }
}
