//! Turning a unit-propagation conflict into resolution and weakening steps.

use thiserror::Error;

use super::propagate::{unit_propagate, Outcome};
use crate::formula::{Clause, Lit};
use crate::kernel::{CheckerState, ClauseId, KernelStep, StepError};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum RupError {
    #[error("unit propagation on the negated target does not reach a conflict")]
    NoConflict,
    #[error("target clause is tautological")]
    TautologicalTarget,
    #[error(transparent)]
    Step(#[from] StepError),
}

/// Steps deriving `target` from the premises. The steps are meant to be
/// appended right after the current end of `st`; ids they create start at
/// `st.len()`. The last step is always a weakening to exactly `target`.
pub fn rup_to_resolution(
    st: &CheckerState,
    premises: &[ClauseId],
    target: &Clause,
) -> Result<Vec<KernelStep>, RupError> {
    if target.is_tautology() {
        return Err(RupError::TautologicalTarget);
    }
    let clauses: Vec<Clause> = premises
        .iter()
        .map(|&id| st.clause(id).cloned())
        .collect::<Result<_, _>>()?;

    if let Some(i) = clauses.iter().position(|c| c.is_subset(target)) {
        let added: Vec<Lit> = target.iter().filter(|&l| !clauses[i].contains(l)).collect();
        return Ok(vec![KernelStep::Weak(premises[i], added)]);
    }

    let assumptions: Vec<Lit> = target.iter().map(|l| !l).collect();
    let trace = unit_propagate(&clauses, &assumptions);
    let Outcome::Conflict(Some(k)) = trace.outcome else {
        return Err(RupError::NoConflict);
    };

    let mut steps = Vec::new();
    let mut next = st.len();
    let mut cur_id = premises[k];
    let mut cur = clauses[k].clone();
    for &(lit, ante) in trace.forced.iter().rev() {
        if !cur.contains(!lit) {
            continue;
        }
        steps.push(KernelStep::Res(cur_id, premises[ante], lit.var()));
        cur = cur.without(!lit).union(&clauses[ante].without(lit));
        cur_id = next;
        next += 1;
    }
    debug_assert!(cur.is_subset(target));
    let added: Vec<Lit> = target.iter().filter(|&l| !cur.contains(l)).collect();
    steps.push(KernelStep::Weak(cur_id, added));
    Ok(steps)
}

/// Runs [`rup_to_resolution`] and applies the steps, returning the id of the
/// derived target together with the steps.
pub fn derive_rup(
    st: &mut CheckerState,
    premises: &[ClauseId],
    target: &Clause,
) -> Result<(ClauseId, Vec<KernelStep>), RupError> {
    let steps = rup_to_resolution(st, premises, target)?;
    let mut last = 0;
    for s in &steps {
        last = st.apply(s)?[0];
    }
    Ok((last, steps))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse_instance;

    #[test]
    fn eur_chain() {
        let f = parse_instance(
            "p cnf 5 3\ne 1 0\na 2 0\ne 3 4 5 0\n1 -5 0\n-3 4 5 0\n1 3 4 0\n",
        )
        .unwrap();
        let mut st = CheckerState::new(&f);
        for i in 0..3 {
            st.apply_ax(i).unwrap();
        }
        let target = Clause::from_dimacs(&[1, 4]);
        let (id, steps) = derive_rup(&mut st, &[0, 1, 2], &target).unwrap();
        assert_eq!(st.clauses()[id], target);
        assert!((2..=3).contains(&steps.len()));
        assert!(steps.len() <= 2 + 3 + 3);
    }

    #[test]
    fn premise_target_is_weakening() {
        let f = parse_instance("p cnf 2 1\ne 1 2 0\n1 2 0\n").unwrap();
        let mut st = CheckerState::new(&f);
        st.apply_ax(0).unwrap();
        let steps = rup_to_resolution(&st, &[0], &Clause::from_dimacs(&[1, 2])).unwrap();
        assert_eq!(steps, vec![KernelStep::Weak(0, vec![])]);
    }

    #[test]
    fn non_implied_target() {
        let f = parse_instance("p cnf 2 1\ne 1 2 0\n1 2 0\n").unwrap();
        let mut st = CheckerState::new(&f);
        st.apply_ax(0).unwrap();
        assert_eq!(
            rup_to_resolution(&st, &[0], &Clause::from_dimacs(&[1])),
            Err(RupError::NoConflict)
        );
    }
}
