//! Outer clauses with respect to a pivot literal.

use std::collections::BTreeSet;

use crate::formula::{Clause, Lit, Prefix, Var};

fn deps(p: &Prefix, v: Var) -> BTreeSet<Var> {
    p.deps(v).cloned().unwrap_or_default()
}

/// Outer clause of `d` for an existential pivot `l`: existentials whose
/// dependencies are contained in `D_l` (other than `l`'s variable) and
/// universals in `D_l`.
pub fn outer_clause_exist(p: &Prefix, d: &Clause, l: Lit) -> Clause {
    let dl = deps(p, l.var());
    d.iter()
        .filter(|k| {
            if p.is_universal(k.var()) {
                dl.contains(&k.var())
            } else {
                k.var() != l.var() && deps(p, k.var()).is_subset(&dl)
            }
        })
        .collect()
}

/// The set `T` used for a universal pivot: the intersection of `D_x` over
/// all existentials `x` depending on `var(l)`, minus `var(l)`. Empty when no
/// existential depends on `var(l)`.
pub fn univ_outer_domain(p: &Prefix, l: Lit) -> BTreeSet<Var> {
    let u = l.var();
    let mut t: Option<BTreeSet<Var>> = None;
    for x in p.existentials().filter(|&x| p.depends_on(x, u)) {
        let dx = deps(p, x);
        t = Some(match t {
            None => dx,
            Some(t) => t.intersection(&dx).copied().collect(),
        });
    }
    let mut t = t.unwrap_or_default();
    t.remove(&u);
    t
}

/// Outer clause of `d` for a universal pivot `l`.
pub fn outer_clause_univ(p: &Prefix, d: &Clause, l: Lit) -> Clause {
    let t = univ_outer_domain(p, l);
    d.iter()
        .filter(|k| {
            if p.is_universal(k.var()) {
                t.contains(&k.var())
            } else {
                deps(p, k.var()).is_subset(&t)
            }
        })
        .collect()
}

/// Dispatches on the quantifier of `l`.
pub fn outer_clause(p: &Prefix, d: &Clause, l: Lit) -> Clause {
    if p.is_universal(l.var()) {
        outer_clause_univ(p, d, l)
    } else {
        outer_clause_exist(p, d, l)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse_instance;

    fn eur() -> Prefix {
        parse_instance("p cnf 5 0\ne 1 0\na 2 0\ne 3 4 5 0\n").unwrap().prefix
    }

    #[test]
    fn existential_pivot() {
        let d = Clause::from_dimacs(&[1, -2, 3, -4]);
        assert_eq!(
            outer_clause_exist(&eur(), &d, Lit::from_dimacs(3)),
            Clause::from_dimacs(&[1, -2, -4])
        );
        assert!(outer_clause_exist(&eur(), &Clause::from_dimacs(&[3]), Lit::from_dimacs(3)).is_empty());
    }

    #[test]
    fn universal_pivot() {
        let d = Clause::from_dimacs(&[1, -2, 3, -4]);
        assert!(univ_outer_domain(&eur(), Lit::from_dimacs(-2)).is_empty());
        assert_eq!(
            outer_clause_univ(&eur(), &d, Lit::from_dimacs(-2)),
            Clause::from_dimacs(&[1])
        );
        assert!(outer_clause_univ(&eur(), &Clause::from_dimacs(&[-2, 3, 4]), Lit::from_dimacs(-2)).is_empty());
    }
}
