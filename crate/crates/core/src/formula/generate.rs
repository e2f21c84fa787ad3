//! The `select` and `duality` formula families built from a small inner QBF.
//!
//! The inner prefix must alternate `∀x1 ∃x2 ∀x3 ∃x4 …` and have an even
//! number of variables `2n`. Output numbering: `x_i = i`, `x'_i = 2n + i`,
//! and the selector `u = 4n + 1`.

use std::collections::BTreeSet;

use super::{Clause, Formula, FormulaError, Lit, Origin, Prefix, QuantKind, Var};

const MAX_INNER_CLAUSES: usize = 4;

struct Inner {
    n2: u32,
    clauses: Vec<Clause>,
}

fn inner(f: &Formula) -> Result<Inner, FormulaError> {
    let err = |m: &str| Err(FormulaError::Generator(m.to_string()));
    let p = &f.prefix;
    if !p.is_qbf_shaped() {
        return err("inner formula must be a QBF");
    }
    let vars = p.vars();
    if vars.is_empty() || !vars.len().is_multiple_of(2) {
        return err("inner prefix must have an even, nonzero number of variables");
    }
    for (i, &v) in vars.iter().enumerate() {
        let want = if i % 2 == 0 {
            QuantKind::Universal
        } else {
            QuantKind::Existential
        };
        if p.get(v).map(|d| d.kind) != Some(want) {
            return err("inner prefix must alternate, starting with a universal");
        }
    }
    if f.matrix.is_empty() {
        return err("inner matrix is empty, the construction degenerates");
    }
    if f.matrix.len() > MAX_INNER_CLAUSES {
        return err("inner matrix has more than 4 clauses");
    }
    let pos = |v: Var| vars.iter().position(|&w| w == v).unwrap() as u32 + 1;
    let clauses = f
        .matrix
        .iter()
        .map(|c| c.map(|l| Lit::new(Var(pos(l.var())), l.is_positive())))
        .collect();
    Ok(Inner {
        n2: vars.len() as u32,
        clauses,
    })
}

fn build_prefix(n2: u32, selector: Option<Var>) -> Prefix {
    let mut p = Prefix::new();
    let mut seen: Vec<Var> = Vec::new();
    let univ = |p: &mut Prefix, seen: &mut Vec<Var>, v: Var| {
        p.add_universal(v).unwrap();
        seen.push(v);
    };
    if let Some(u) = selector {
        univ(&mut p, &mut seen, u);
    }
    for k in (1..=n2).step_by(2) {
        let (x1, x2) = (Var(k), Var(k + 1));
        let (y1, y2) = (Var(n2 + k), Var(n2 + k + 1));
        p.add_existential(y1, seen.clone()).unwrap();
        univ(&mut p, &mut seen, x1);
        p.add_existential(x2, seen.clone()).unwrap();
        univ(&mut p, &mut seen, y2);
    }
    p
}

/// CNF of `¬φ` by distributing the negation over the conjunction.
fn negate_cnf(clauses: &[Clause]) -> Vec<Clause> {
    let mut acc: Vec<Vec<Lit>> = vec![Vec::new()];
    for c in clauses {
        let mut next = Vec::new();
        for partial in &acc {
            for l in c.iter() {
                let mut p = partial.clone();
                p.push(!l);
                next.push(p);
            }
        }
        acc = next;
    }
    let mut seen = BTreeSet::new();
    acc.into_iter()
        .map(Clause::new)
        .filter(|c| !c.is_tautology())
        .filter(|c| seen.insert(c.clone()))
        .collect()
}

fn primed(c: &Clause, n2: u32) -> Clause {
    c.map(|l| Lit::new(Var(l.var().id() + n2), l.is_positive()))
}

/// `∀u ∃x'1 ∀x1 ∃x2 ∀x'2 … (φ(X) ∨ u) ∧ (¬φ(X') ∨ ¬u)`.
pub fn gen_select(f: &Formula) -> Result<Formula, FormulaError> {
    let Inner { n2, clauses } = inner(f)?;
    let u = Var(2 * n2 + 1);
    let prefix = build_prefix(n2, Some(u));
    let mut matrix: Vec<Clause> = clauses.iter().map(|c| c.with([u.pos()])).collect();
    let primed: Vec<Clause> = clauses.iter().map(|c| primed(c, n2)).collect();
    matrix.extend(negate_cnf(&primed).into_iter().map(|c| c.with([u.neg()])));
    Formula::new(prefix, matrix, Origin::Generated)
}

/// `∃x'1 ∀x1 ∃x2 ∀x'2 … φ(X) ∧ ¬φ(X')`.
pub fn gen_duality(f: &Formula) -> Result<Formula, FormulaError> {
    let Inner { n2, clauses } = inner(f)?;
    let prefix = build_prefix(n2, None);
    let mut matrix = clauses.clone();
    let primed: Vec<Clause> = clauses.iter().map(|c| primed(c, n2)).collect();
    matrix.extend(negate_cnf(&primed));
    Formula::new(prefix, matrix, Origin::Generated)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse_qdimacs;

    fn one_pair() -> Formula {
        parse_qdimacs("p cnf 2 1\na 1 0\ne 2 0\n1 2 0\n").unwrap()
    }

    #[test]
    fn select_n1() {
        let s = gen_select(&one_pair()).unwrap();
        let order: Vec<u32> = s.prefix.vars().iter().map(|v| v.id()).collect();
        assert_eq!(order, vec![5, 3, 1, 2, 4]);
        assert!(s.prefix.is_universal(Var(5)));
        assert!(s.prefix.is_existential(Var(3)));
        assert_eq!(
            s.matrix,
            vec![
                Clause::from_dimacs(&[1, 2, 5]),
                Clause::from_dimacs(&[-3, -5]),
                Clause::from_dimacs(&[-4, -5]),
            ]
        );
    }

    #[test]
    fn duality_n1() {
        let d = gen_duality(&one_pair()).unwrap();
        assert!(d.prefix.universals().all(|u| u.id() <= 4));
        assert_eq!(d.matrix.len(), 3);
        assert!(d.prefix.is_qbf_shaped());
    }

    #[test]
    fn rejects_bad_inner() {
        let empty = parse_qdimacs("p cnf 2 0\na 1 0\ne 2 0\n").unwrap();
        assert!(gen_select(&empty).is_err());
        let wrong = parse_qdimacs("p cnf 2 1\ne 1 0\na 2 0\n1 2 0\n").unwrap();
        assert!(gen_select(&wrong).is_err());
    }
}
