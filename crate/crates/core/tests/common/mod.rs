//! Random instance generators and a second truth evaluator for the
//! integration tests.

#![allow(dead_code)]

use std::collections::BTreeMap;

use dqbf_kernel::formula::{Clause, Formula, Lit, Origin, Prefix, Var};
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::Rng;

pub const EUR: &str = "p cnf 5 7\ne 1 0\na 2 0\ne 3 4 5 0\n2 4 0\n1 -2 3 -4 0\n-3 4 5 0\n1 -5 0\n1 3 4 0\n-3 -4 0\n-1 -2 5 0\n";

/// A non-tautological clause over distinct variables of `vars`.
pub fn random_clause(rng: &mut StdRng, vars: &[Var], max_width: usize) -> Clause {
    let w = rng.gen_range(1..=max_width.min(vars.len()));
    let picked: Vec<Var> = vars.choose_multiple(rng, w).copied().collect();
    picked.into_iter().map(|v| Lit::new(v, rng.gen_bool(0.5))).collect()
}

fn random_matrix(rng: &mut StdRng, vars: &[Var], clauses: usize, max_width: usize) -> Vec<Clause> {
    (0..clauses).map(|_| random_clause(rng, vars, max_width)).collect()
}

/// A QBF-shaped formula: quantifiers in a random linear order, each
/// existential depending on the universals before it.
pub fn random_qbf(rng: &mut StdRng, max_univ: usize, max_exist: usize, max_clauses: usize) -> Formula {
    let nu = rng.gen_range(1..=max_univ);
    let ne = rng.gen_range(1..=max_exist);
    let mut kinds: Vec<bool> = (0..nu).map(|_| true).chain((0..ne).map(|_| false)).collect();
    kinds.shuffle(rng);
    let mut p = Prefix::new();
    let mut seen = Vec::new();
    let mut vars = Vec::new();
    for (i, universal) in kinds.into_iter().enumerate() {
        let v = Var(i as u32 + 1);
        if universal {
            p.add_universal(v).unwrap();
            seen.push(v);
        } else {
            p.add_existential(v, seen.clone()).unwrap();
        }
        vars.push(v);
    }
    let n = rng.gen_range(1..=max_clauses);
    let matrix = random_matrix(rng, &vars, n, 3);
    Formula::new(p, matrix, Origin::Generated).unwrap()
}

/// A DQBF with universals first and random dependency sets.
pub fn random_dqbf(rng: &mut StdRng, max_univ: usize, max_exist: usize, max_clauses: usize) -> Formula {
    let nu = rng.gen_range(1..=max_univ);
    let ne = rng.gen_range(1..=max_exist);
    let mut p = Prefix::new();
    let us: Vec<Var> = (1..=nu as u32).map(Var).collect();
    for &u in &us {
        p.add_universal(u).unwrap();
    }
    let mut vars = us.clone();
    for i in 0..ne {
        let x = Var((nu + i + 1) as u32);
        let deps: Vec<Var> = us.iter().copied().filter(|_| rng.gen_bool(0.5)).collect();
        p.add_existential(x, deps).unwrap();
        vars.push(x);
    }
    let n = rng.gen_range(1..=max_clauses);
    let matrix = random_matrix(rng, &vars, n, 3);
    Formula::new(p, matrix, Origin::Generated).unwrap()
}

/// Truth of a QBF-shaped formula by recursive expansion along the
/// declaration order: `∀x φ ≡ φ[0] ∧ φ[1]`, `∃x φ ≡ φ[0] ∨ φ[1]`.
pub fn qbf_eval(f: &Formula) -> bool {
    assert!(f.prefix.is_qbf_shaped());
    let order: Vec<Var> = f.prefix.vars().to_vec();
    fn go(f: &Formula, order: &[Var], a: &mut BTreeMap<Var, bool>) -> bool {
        let Some((&v, rest)) = order.split_first() else {
            return f
                .matrix
                .iter()
                .all(|c| c.iter().any(|l| a.get(&l.var()) == Some(&l.is_positive())));
        };
        let mut branch = |b: bool| {
            a.insert(v, b);
            let r = go(f, rest, a);
            a.remove(&v);
            r
        };
        if f.prefix.is_universal(v) {
            branch(false) && branch(true)
        } else {
            branch(false) || branch(true)
        }
    }
    go(f, &order, &mut BTreeMap::new())
}

pub fn lits(ns: &[i64]) -> Vec<Lit> {
    ns.iter().map(|&n| Lit::from_dimacs(n)).collect()
}
