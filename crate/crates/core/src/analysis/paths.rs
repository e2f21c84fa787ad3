//! Resolution paths, the reflexive resolution-path relation and marginal
//! dependency sets.

use std::collections::{BTreeSet, VecDeque};

use crate::formula::{clause_deps, Clause, Formula, Lit, Prefix, Var};

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PathResult {
    pub pathl: BTreeSet<Lit>,
    pub pathc: BTreeSet<usize>,
}

/// Least fixpoint of literals and clauses reachable from the seed clauses
/// through variables in `s`. A clause `D` is entered through `p` when `p̄ ∈ D`;
/// it contributes its other literals over `s`. Clauses that contain `p` as
/// well as `p̄` are not entered through `p`.
pub fn res_paths(clauses: &[Clause], seed: &BTreeSet<usize>, s: &BTreeSet<Var>) -> PathResult {
    let mut res = PathResult {
        pathl: BTreeSet::new(),
        pathc: seed.clone(),
    };
    let mut queue = VecDeque::new();
    for &i in seed {
        for l in clauses[i].iter().filter(|l| s.contains(&l.var())) {
            if res.pathl.insert(l) {
                queue.push_back(l);
            }
        }
    }
    while let Some(p) = queue.pop_front() {
        for (i, d) in clauses.iter().enumerate() {
            if !d.contains(!p) || d.contains(p) {
                continue;
            }
            res.pathc.insert(i);
            for q in d.iter().filter(|&q| q != !p && s.contains(&q.var())) {
                if res.pathl.insert(q) {
                    queue.push_back(q);
                }
            }
        }
    }
    res
}

/// Ids of the clauses containing `l`.
pub fn occurrences(clauses: &[Clause], l: Lit) -> BTreeSet<usize> {
    clauses
        .iter()
        .enumerate()
        .filter(|(_, c)| c.contains(l))
        .map(|(i, _)| i)
        .collect()
}

/// Existentials depending on `u`.
pub fn dependents(p: &Prefix, u: Var) -> BTreeSet<Var> {
    p.existentials().filter(|&x| p.depends_on(x, u)).collect()
}

/// Path literal sets `(L_u, L_ū)` for universal `u`.
pub fn univ_paths(p: &Prefix, clauses: &[Clause], u: Var) -> (BTreeSet<Lit>, BTreeSet<Lit>) {
    let s = dependents(p, u);
    let lu = res_paths(clauses, &occurrences(clauses, u.pos()), &s).pathl;
    let lnu = res_paths(clauses, &occurrences(clauses, u.neg()), &s).pathl;
    (lu, lnu)
}

/// Pairs `(u, x)` such that a resolution path connects `u` and `ū` through
/// `x` in opposite polarities. Sorted.
pub fn drrs_view(p: &Prefix, clauses: &[Clause]) -> BTreeSet<(Var, Var)> {
    let mut out = BTreeSet::new();
    for u in p.universals() {
        let (lu, lnu) = univ_paths(p, clauses, u);
        for x in dependents(p, u) {
            let (pos, neg) = (x.pos(), x.neg());
            if (lu.contains(&pos) && lnu.contains(&neg)) || (lnu.contains(&pos) && lu.contains(&neg)) {
                out.insert((u, x));
            }
        }
    }
    out
}

pub fn drrs(f: &Formula) -> BTreeSet<(Var, Var)> {
    drrs_view(&f.prefix, &f.matrix)
}

/// The formula with every dependency outside the relation removed.
pub fn restrict_to_drrs(f: &Formula) -> Formula {
    let rel = drrs(f);
    let mut g = f.clone();
    for x in f.prefix.existentials() {
        let keep = f.prefix.deps(x).unwrap().iter().copied().filter(|&u| rel.contains(&(u, x)));
        g.prefix.set_deps(x, keep.collect()).unwrap();
    }
    g
}

/// Universals in the dependency set of `c2` but not of `c1`, ascending.
pub fn marginal_universals(p: &Prefix, c1: &Clause, c2: &Clause) -> Vec<Var> {
    let d1 = clause_deps(p, c1).unwrap_or_default();
    clause_deps(p, c2)
        .unwrap_or_default()
        .difference(&d1)
        .copied()
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse_instance;

    const EUR: &str = "p cnf 5 7\ne 1 0\na 2 0\ne 3 4 5 0\n2 4 0\n1 -2 3 -4 0\n-3 4 5 0\n1 -5 0\n1 3 4 0\n-3 -4 0\n-1 -2 5 0\n";

    fn lits(ns: &[i64]) -> BTreeSet<Lit> {
        ns.iter().map(|&n| Lit::from_dimacs(n)).collect()
    }

    #[test]
    fn eur_paths() {
        let f = parse_instance(EUR).unwrap();
        let s = BTreeSet::from([Var(3), Var(4), Var(5)]);
        let r = res_paths(&f.matrix, &BTreeSet::from([0]), &s);
        assert_eq!(r.pathc, (0..6).collect());
        assert_eq!(r.pathl, lits(&[3, -3, 4, -4, 5]));
        let pathc_c6 = res_paths(&f.matrix, &BTreeSet::from([6]), &s).pathc;
        assert_eq!(pathc_c6, BTreeSet::from([3, 6]));
    }

    #[test]
    fn empty_s() {
        let f = parse_instance(EUR).unwrap();
        let r = res_paths(&f.matrix, &BTreeSet::from([1]), &BTreeSet::new());
        assert_eq!(r.pathc, BTreeSet::from([1]));
        assert!(r.pathl.is_empty());
    }

    #[test]
    fn eur_drrs() {
        let f = parse_instance(EUR).unwrap();
        assert_eq!(drrs(&f), BTreeSet::from([(Var(2), Var(3)), (Var(2), Var(4))]));
    }

    #[test]
    fn no_positive_occurrence() {
        let f = parse_instance("p cnf 2 2\na 1 0\ne 2 0\n-1 2 0\n-2 0\n").unwrap();
        assert!(drrs(&f).is_empty());
    }

    #[test]
    fn marginal() {
        let p = parse_instance("p cnf 6 0\na 1 2 3 0\nd 4 1 0\nd 5 1 2 3 0\ne 6 0\n").unwrap().prefix;
        let c1 = Clause::from_dimacs(&[4]);
        let c2 = Clause::from_dimacs(&[5, 6]);
        assert_eq!(marginal_universals(&p, &c1, &c2), vec![Var(2), Var(3)]);
        assert!(marginal_universals(&p, &c2, &c1).is_empty());
    }
}
