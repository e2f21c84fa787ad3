//! Brute-force truth oracle for tiny DQBFs.
//!
//! Every Skolem table bit `σ_x(τ|D_x)` becomes a propositional variable and
//! every matrix clause is grounded under every universal assignment `τ`. The
//! formula is true iff the resulting CNF over table bits is satisfiable.

use std::collections::{BTreeMap, HashSet};

use thiserror::Error;

use super::{CheckerState, KernelStep, StepError};
use crate::formula::{Formula, Var};

/// Maximum total number of Skolem table bits, `Σ_x 2^|D_x|`.
pub const DEFAULT_BUDGET: u64 = 24;
/// Universal assignments are enumerated explicitly, so their count is capped
/// as well.
pub const MAX_UNIVERSALS: usize = 16;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("Skolem table budget exceeded: {bits} bits needed, budget is {budget}")]
    Budget { bits: u64, budget: u64 },
    #[error("too many universal variables: {0} (at most {MAX_UNIVERSALS})")]
    TooManyUniversals(usize),
    #[error("step rejected by the checker: {0}")]
    StepRejected(StepError),
}

/// Explicit truth tables, one per existential variable. Entry `i` of the
/// table of `x` is the value under the assignment of `D_x` (in ascending
/// variable order) whose bit `j` is the value of the `j`-th dependency.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SkolemSet {
    pub tables: BTreeMap<Var, (Vec<Var>, Vec<bool>)>,
}

impl SkolemSet {
    /// Value of existential `x` under a total universal assignment.
    pub fn eval(&self, x: Var, univ: &BTreeMap<Var, bool>) -> bool {
        let (deps, table) = &self.tables[&x];
        table[table_index(deps, |u| univ[&u])]
    }

    /// True iff the tables satisfy the matrix under every universal
    /// assignment.
    pub fn satisfies(&self, f: &Formula) -> bool {
        let us: Vec<Var> = f.prefix.universals().collect();
        (0..1u64 << us.len()).all(|t| {
            let univ: BTreeMap<Var, bool> =
                us.iter().enumerate().map(|(i, &u)| (u, t >> i & 1 == 1)).collect();
            f.matrix.iter().all(|c| {
                c.iter().any(|l| {
                    let v = match univ.get(&l.var()) {
                        Some(&b) => b,
                        None => self.eval(l.var(), &univ),
                    };
                    v == l.is_positive()
                })
            })
        })
    }
}

fn table_index(deps: &[Var], value: impl Fn(Var) -> bool) -> usize {
    deps.iter()
        .enumerate()
        .filter(|&(_, &u)| value(u))
        .fold(0, |acc, (j, _)| acc | 1 << j)
}

/// Number of table bits the oracle would need for `f`.
pub fn table_bits(f: &Formula) -> u64 {
    f.prefix
        .existentials()
        .map(|x| 1u64 << f.prefix.deps(x).unwrap().len().min(63))
        .fold(0u64, u64::saturating_add)
}

pub fn dqbf_truth(f: &Formula) -> Result<bool, OracleError> {
    dqbf_truth_with_budget(f, DEFAULT_BUDGET)
}

pub fn dqbf_truth_with_budget(f: &Formula, budget: u64) -> Result<bool, OracleError> {
    Ok(find_skolem(f, budget)?.is_some())
}

/// A satisfying Skolem set, or `None` when the formula is false.
pub fn find_skolem(f: &Formula, budget: u64) -> Result<Option<SkolemSet>, OracleError> {
    let bits = table_bits(f);
    if bits > budget || bits > 63 {
        return Err(OracleError::Budget { bits, budget });
    }
    let us: Vec<Var> = f.prefix.universals().collect();
    if us.len() > MAX_UNIVERSALS {
        return Err(OracleError::TooManyUniversals(us.len()));
    }
    let upos: BTreeMap<Var, usize> = us.iter().enumerate().map(|(i, &u)| (u, i)).collect();

    let mut offset = BTreeMap::new();
    let mut next = 0usize;
    for x in f.prefix.existentials() {
        let deps: Vec<Var> = f.prefix.deps(x).unwrap().iter().copied().collect();
        let size = 1usize << deps.len();
        offset.insert(x, (next, deps));
        next += size;
    }

    let mut ground: HashSet<(u64, u64)> = HashSet::new();
    for t in 0..1u64 << us.len() {
        let uval = |u: Var| t >> upos[&u] & 1 == 1;
        'clause: for c in &f.matrix {
            let (mut pos, mut neg) = (0u64, 0u64);
            for l in c.iter() {
                if let Some(&i) = upos.get(&l.var()) {
                    if (t >> i & 1 == 1) == l.is_positive() {
                        continue 'clause;
                    }
                } else {
                    let (off, deps) = &offset[&l.var()];
                    let bit = 1u64 << (off + table_index(deps, uval));
                    if l.is_positive() {
                        pos |= bit;
                    } else {
                        neg |= bit;
                    }
                }
            }
            if pos & neg != 0 {
                continue;
            }
            if pos | neg == 0 {
                return Ok(None);
            }
            ground.insert((pos, neg));
        }
    }
    let mut clauses: Vec<(u64, u64)> = ground.into_iter().collect();
    clauses.sort_unstable();

    let Some(model) = dpll(&clauses, 0, 0) else {
        return Ok(None);
    };
    let tables = offset
        .into_iter()
        .map(|(x, (off, deps))| {
            let table = (0..1usize << deps.len()).map(|i| model >> (off + i) & 1 == 1).collect();
            (x, (deps, table))
        })
        .collect();
    Ok(Some(SkolemSet { tables }))
}

/// DPLL over at most 63 variables held in bit masks. Returns a total model
/// (unassigned bits default to false).
fn dpll(clauses: &[(u64, u64)], mut val: u64, mut set: u64) -> Option<u64> {
    loop {
        let mut forced = false;
        let mut branch: Option<u64> = None;
        for &(pos, neg) in clauses {
            if pos & set & val != 0 || neg & set & !val != 0 {
                continue;
            }
            let open = (pos | neg) & !set;
            if open == 0 {
                return None;
            }
            if open & (open - 1) == 0 {
                set |= open;
                if pos & open != 0 {
                    val |= open;
                }
                forced = true;
            } else if branch.is_none() {
                branch = Some(open & open.wrapping_neg());
            }
        }
        if forced {
            continue;
        }
        return match branch {
            None => Some(val),
            Some(b) => dpll(clauses, val | b, set | b).or_else(|| dpll(clauses, val, set | b)),
        };
    }
}

/// Whether applying `step` to `st` keeps a true formula true. The formula
/// before the step is the current prefix with the matrix and all derived
/// clauses; afterwards it additionally contains the new clauses.
pub fn step_preserves_truth(st: &CheckerState, step: &KernelStep) -> Result<bool, OracleError> {
    step_preserves_truth_with_budget(st, step, DEFAULT_BUDGET)
}

pub fn step_preserves_truth_with_budget(
    st: &CheckerState,
    step: &KernelStep,
    budget: u64,
) -> Result<bool, OracleError> {
    let mut after = st.clone();
    after.apply(step).map_err(OracleError::StepRejected)?;
    let after_f = after.as_formula();
    // Budget is checked on the larger formula first so that a refusal does
    // not depend on the truth value of the smaller one.
    let bits = table_bits(&after_f);
    if bits > budget {
        return Err(OracleError::Budget { bits, budget });
    }
    if !dqbf_truth_with_budget(&st.as_formula(), budget)? {
        return Ok(true);
    }
    dqbf_truth_with_budget(&after_f, budget)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{parse_instance, Lit};

    #[test]
    fn independent_existential_is_false() {
        let f = parse_instance("p cnf 2 2\ne 2 0\na 1 0\n2 1 0\n-2 -1 0\n").unwrap();
        assert_eq!(dqbf_truth(&f), Ok(false));
    }

    #[test]
    fn dependent_existential_is_true() {
        let f = parse_instance("p cnf 2 2\na 1 0\ne 2 0\n2 1 0\n-2 -1 0\n").unwrap();
        let s = find_skolem(&f, DEFAULT_BUDGET).unwrap().unwrap();
        assert!(s.satisfies(&f));
        assert_eq!(s.tables[&Var(2)].1, vec![true, false]);
    }

    #[test]
    fn empty_matrix_is_true() {
        let f = parse_instance("p cnf 3 0\na 1 2 0\nd 3 1 0\n").unwrap();
        assert_eq!(dqbf_truth(&f), Ok(true));
    }

    #[test]
    fn empty_clause_is_false() {
        let f = parse_instance("p cnf 1 1\ne 1 0\n0\n").unwrap();
        assert_eq!(dqbf_truth(&f), Ok(false));
    }

    #[test]
    fn budget_refused() {
        // 5 existentials each depending on 3 universals: 40 bits.
        let f = parse_instance("p cnf 8 0\na 1 2 3 0\ne 4 5 6 7 8 0\n").unwrap();
        assert_eq!(
            dqbf_truth(&f),
            Err(OracleError::Budget {
                bits: 40,
                budget: 24
            })
        );
    }

    #[test]
    fn eur_formula_is_true() {
        let f = parse_instance(
            "p cnf 5 7\ne 1 0\na 2 0\ne 3 4 5 0\n2 4 0\n1 -2 3 -4 0\n-3 4 5 0\n1 -5 0\n1 3 4 0\n-3 -4 0\n-1 -2 5 0\n",
        )
        .unwrap();
        let s = find_skolem(&f, DEFAULT_BUDGET).unwrap().unwrap();
        assert!(s.satisfies(&f));
    }

    #[test]
    fn reduction_step_on_true_formula() {
        let f = parse_instance("p cnf 2 1\ne 2 0\na 1 0\n1 2 0\n").unwrap();
        let mut st = CheckerState::new(&f);
        st.apply_ax(0).unwrap();
        let red = KernelStep::Red(0, Lit::from_dimacs(1));
        assert_eq!(step_preserves_truth(&st, &red), Ok(true));
    }
}
