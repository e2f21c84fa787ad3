//! Formula rewrites behind the interference rules: adding a clause that is
//! QRAT on an existential literal, removing a universal literal by the mixed
//! reduction rule, and dropping dependencies outside the reflexive
//! resolution-path relation.
//!
//! Each rewrite introduces extension variables for the affected view
//! variables, re-derives every view clause over the new representatives and
//! then switches the representatives.

use std::collections::{BTreeMap, BTreeSet};

use super::{Result, TranslateError, TranslationState};
use crate::analysis::paths::{dependents, drrs_view, univ_paths};
use crate::analysis::{outer_clause_exist, outer_clause_univ, res_paths, unit_propagate};
use crate::formula::{Clause, Lit, PartialAssignment, Var};
use crate::kernel::{ClauseId, ExtKind};

fn uncertifiable(reasons: Vec<String>) -> TranslateError {
    TranslateError::Uncertifiable {
        line: 0,
        reasons: reasons.join("; "),
    }
}

fn cond(l: Lit) -> PartialAssignment {
    PartialAssignment::from_lits([l]).unwrap()
}

fn none() -> PartialAssignment {
    PartialAssignment::new()
}

fn negated(c: &Clause) -> Vec<Lit> {
    c.iter().map(|l| !l).collect()
}

/// Checks that `c` is QRAT on the existential literal `l` with respect to
/// the view and derives it. Returns the kernel id of the derived clause; the
/// caller adds `c` to the view.
pub fn qrata_rewrite(ts: &mut TranslationState, c: &Clause, l: Lit) -> Result<ClauseId> {
    if !c.contains(l) {
        return Err(TranslateError::Internal(format!("{l} is not in {c}")));
    }
    ts.ensure_declared(l.var())?;
    let prefix = ts.prefix().clone();
    let live: Vec<(usize, Clause, ClauseId)> = ts
        .live()
        .into_iter()
        .map(|(i, v)| (i, v.clause.clone(), v.id))
        .collect();
    let clauses: Vec<Clause> = live.iter().map(|(_, c, _)| c.clone()).collect();
    let all_ids: Vec<ClauseId> = live.iter().map(|(_, _, id)| *id).collect();

    let mut outer = Vec::new();
    let mut failures = Vec::new();
    for (i, d, id) in &live {
        if !d.contains(!l) {
            continue;
        }
        let o = outer_clause_exist(&prefix, d, l);
        let mut assume = negated(c);
        assume.extend(negated(&o));
        if unit_propagate(&clauses, &assume).is_conflict() {
            outer.push((*i, d.clone(), *id, o));
        } else {
            failures.push(format!("clause ({d}) with outer clause ({o})"));
        }
    }
    if !failures.is_empty() {
        return Err(uncertifiable(failures));
    }

    let kc = ts.kclause(c)?;
    let kl = ts.klit(l)?;
    let mut ods = Vec::new();
    let mut with_od = Vec::new();
    for (_, _, _, o) in &outer {
        let ko = ts.kclause(o)?;
        let od = ts.ext(ExtKind::Or, none(), ko.lits().to_vec())?;
        let mut prem = all_ids.clone();
        prem.extend(ts.defs(od));
        with_od.push(ts.rup(&prem, &kc.with([od.pos()]))?);
        ods.push(od);
    }
    let o = ts.ext(ExtKind::And, none(), ods.iter().map(|v| v.pos()).collect())?;
    let mut prem = with_od.clone();
    prem.extend(ts.defs(o));
    let with_o = ts.rup(&prem, &kc.with([o.pos()]))?;
    let lp = ts.ext(ExtKind::Or, none(), vec![kl, o.pos()])?;
    let lp_defs = ts.defs(lp);
    let mut prem = vec![with_o];
    prem.extend(&lp_defs);
    let c_new = ts.rup(&prem, &kc.without(kl).with([lp.pos()]))?;

    // Re-derive the view clauses mentioning var(l) with the new representative.
    let new_rep = lp.pos().xor(!l.is_positive());
    let remap = |ts: &mut TranslationState, k: &Clause| -> Result<Clause> {
        let mut out = Vec::new();
        for q in k.iter() {
            if q.var() == l.var() {
                out.push(new_rep.xor(!q.is_positive()));
            } else {
                out.push(ts.klit(q)?);
            }
        }
        Ok(Clause::new(out))
    };
    let o_defs = ts.defs(o);
    for (i, k, id) in &live {
        if !k.contains_var(l.var()) {
            continue;
        }
        let target = remap(ts, k)?;
        let nid = if k.is_tautology() {
            ts.tautology(&target)?
        } else if k.contains(l) {
            let mut prem = vec![*id];
            prem.extend(&lp_defs);
            ts.rup(&prem, &target)?
        } else {
            let od = outer
                .iter()
                .position(|(j, ..)| j == i)
                .map(|p| ods[p])
                .ok_or_else(|| TranslateError::Internal("missing outer definition".into()))?;
            let mut prem = vec![*id];
            prem.extend(&lp_defs);
            prem.extend(&o_defs);
            prem.extend(ts.defs(od));
            ts.rup(&prem, &target)?
        };
        ts.replace_view(*i, k.clone(), nid);
    }
    ts.set_rep(l.var(), new_rep);
    Ok(c_new)
}

/// Per-variable extensions used by the mixed reduction rewrite.
struct Star {
    /// `x` under the condition that the reduced literal holds.
    on: Var,
    /// `x` under the condition that the reduced literal fails.
    off: Var,
    t1: Var,
    t2: Var,
    star: Var,
}

/// Removes the universal literal `r` from the view clause at `idx`, by a
/// kernel reduction if possible and otherwise by the mixed reduction rule.
/// Returns the kernel id of the reduced clause.
pub fn mixed_reduction(ts: &mut TranslationState, idx: usize, r: Lit) -> Result<ClauseId> {
    let vc = ts
        .view_clause(idx)
        .cloned()
        .ok_or_else(|| TranslateError::Internal(format!("no live clause at {idx}")))?;
    if !vc.clause.contains(r) || !ts.is_universal(r.var()) {
        return Err(TranslateError::Internal(format!("{r} is not a universal literal of the clause")));
    }
    let c = vc.clause.without(r);
    let kr = ts.klit(r)?;
    if let Ok(id) = ts.red(vc.id, kr) {
        ts.replace_view(idx, c, id);
        return Ok(id);
    }
    if c.contains(!r) {
        return Err(uncertifiable(vec![format!("({}) contains both polarities of {}", vc.clause, r.var())]));
    }

    let prefix = ts.prefix().clone();
    let s = dependents(&prefix, r.var());
    let live: Vec<(usize, Clause, ClauseId)> = ts
        .live()
        .into_iter()
        .map(|(i, v)| (i, v.clause.clone(), v.id))
        .collect();
    let clauses: Vec<Clause> = live.iter().map(|(_, c, _)| c.clone()).collect();
    let seed = live.iter().position(|(i, ..)| *i == idx).unwrap();
    let paths = res_paths(&clauses, &BTreeSet::from([seed]), &s);
    let phi: Vec<Clause> = clauses
        .iter()
        .enumerate()
        .filter(|(j, _)| *j != seed)
        .map(|(_, c)| c.clone())
        .collect();
    let phi_ids: Vec<ClauseId> = live
        .iter()
        .enumerate()
        .filter(|(j, _)| *j != seed)
        .map(|(_, (_, _, id))| *id)
        .collect();

    let mut outer: BTreeMap<usize, Clause> = BTreeMap::new();
    let mut failures = Vec::new();
    for &j in &paths.pathc {
        if j == seed || !clauses[j].contains(!r) {
            continue;
        }
        let o = outer_clause_univ(&prefix, &clauses[j], r);
        let mut assume = negated(&c);
        assume.extend(negated(&o));
        if unit_propagate(&phi, &assume).is_conflict() {
            outer.insert(j, o);
        } else {
            failures.push(format!("clause ({}) with outer clause ({o})", clauses[j]));
        }
    }
    if !failures.is_empty() {
        return Err(uncertifiable(failures));
    }

    // Definitions.
    let l_vars: BTreeSet<Var> = paths.pathl.iter().map(|l| l.var()).collect();
    let mut ons = BTreeMap::new();
    for &x in &l_vars {
        let kx = ts.klit(x.pos())?;
        let on = ts.ext(ExtKind::And, cond(kr), vec![kx])?;
        let off = ts.ext(ExtKind::And, cond(!kr), vec![kx])?;
        ons.insert(x, (on, off));
    }
    let mut ods = BTreeMap::new();
    for (&j, o) in &outer {
        let ko = ts.kclause(o)?;
        ods.insert(j, ts.ext(ExtKind::Or, none(), ko.lits().to_vec())?);
    }
    let a = ts.ext(ExtKind::And, none(), ods.values().map(|v| v.pos()).collect())?;
    let g = ts.ext(ExtKind::And, none(), vec![kr, a.neg()])?;
    let mut stars: BTreeMap<Var, Star> = BTreeMap::new();
    for (&x, &(on, off)) in &ons {
        let t1 = ts.ext(ExtKind::And, none(), vec![g.pos(), on.pos()])?;
        let t2 = ts.ext(ExtKind::And, none(), vec![g.neg(), off.pos()])?;
        let star = ts.ext(ExtKind::Or, none(), vec![t1.pos(), t2.pos()])?;
        stars.insert(x, Star { on, off, t1, t2, star });
    }
    // One-sided variables get `w = l* ∨ l` for their reachable literal `l`.
    let mut new_rep: BTreeMap<Var, Lit> = BTreeMap::new();
    let mut ws: BTreeMap<Var, Var> = BTreeMap::new();
    for (&x, st) in &stars {
        let (p, n) = (paths.pathl.contains(&x.pos()), paths.pathl.contains(&x.neg()));
        if p && n {
            new_rep.insert(x, st.star.pos());
        } else {
            let l = if p { x.pos() } else { x.neg() };
            let kl = ts.klit(l)?;
            let w = ts.ext(ExtKind::Or, none(), vec![st.star.pos().xor(!p), kl])?;
            ws.insert(x, w);
            new_rep.insert(x, w.pos().xor(!p));
        }
    }

    let g_defs = ts.defs(g);
    let a_defs = ts.defs(a);
    let map = |ts: &mut TranslationState, k: &Clause, f: &dyn Fn(&Star) -> Var| -> Result<Clause> {
        let mut out = Vec::new();
        for q in k.iter() {
            match stars.get(&q.var()) {
                Some(st) => out.push(f(st).pos().xor(!q.is_positive())),
                None => out.push(ts.klit(q)?),
            }
        }
        Ok(Clause::new(out))
    };
    let defs_of = |ts: &TranslationState, k: &Clause, f: &dyn Fn(&Star) -> Vec<Var>| -> Vec<ClauseId> {
        k.vars()
            .filter_map(|v| stars.get(&v))
            .flat_map(f)
            .flat_map(|v| ts.defs(v))
            .collect()
    };
    let star_prem = |ts: &TranslationState, k: &Clause, extra: ClauseId| -> Vec<ClauseId> {
        let mut p = vec![extra];
        p.extend(defs_of(ts, k, &|s| vec![s.t1, s.t2, s.star]));
        p.extend(&g_defs);
        p
    };

    let mut kstars: BTreeMap<usize, ClauseId> = BTreeMap::new();
    for &j in &paths.pathc {
        if j == seed {
            continue;
        }
        let k = &clauses[j];
        let kid = live[j].2;
        // Only clauses with a two-sided variable or an unreachable literal
        // need the starred copy; the rest follow from weakening.
        let needs = k.iter().any(|q| {
            stars.contains_key(&q.var()) && (!paths.pathl.contains(&q) || paths.pathl.contains(&!q))
        });
        if !needs {
            continue;
        }
        let target = map(ts, k, &|s| s.star)?;
        let (has_r, has_nr) = (k.contains(r), k.contains(!r));
        let id = if k.is_tautology() || (has_r && has_nr) {
            ts.tautology(&target)?
        } else if has_nr {
            let ko = outer.get(&j).ok_or_else(|| TranslateError::Internal("missing outer clause".into()))?;
            if ko.vars().any(|v| s.contains(&v)) {
                return Err(TranslateError::Internal(format!(
                    "outer clause ({ko}) mentions a variable depending on {}",
                    r.var()
                )));
            }
            let mut prem = vec![kid];
            prem.extend(defs_of(ts, k, &|s| vec![s.on]));
            let t = map(ts, k, &|s| s.on)?;
            let k_on = ts.rup(&prem, &t)?;
            let p = ts.rup(&star_prem(ts, k, k_on), &target.with([g.neg()]))?;
            let mut prem = g_defs.clone();
            prem.extend(&a_defs);
            prem.extend(ts.defs(ods[&j]));
            let q = ts.rup(&prem, &target.with([g.pos()]))?;
            ts.res(p, q, g)?
        } else if has_r {
            let mut prem = vec![kid];
            prem.extend(defs_of(ts, k, &|s| vec![s.off]));
            let t = map(ts, k, &|s| s.off)?;
            let k_off = ts.rup(&prem, &t)?;
            let q = ts.rup(&star_prem(ts, k, k_off), &target.with([g.pos()]))?;
            let p = ts.rup(&g_defs, &target.with([g.neg()]))?;
            ts.res(p, q, g)?
        } else {
            let mut prem = vec![kid];
            prem.extend(defs_of(ts, k, &|s| vec![s.off]));
            let t = map(ts, k, &|s| s.off)?.with([kr]);
            let k_off = ts.rup(&prem, &t)?;
            let k_off = ts.red(k_off, kr)?;
            let mut prem = vec![kid];
            prem.extend(defs_of(ts, k, &|s| vec![s.on]));
            let t = map(ts, k, &|s| s.on)?.with([!kr]);
            let k_on = ts.rup(&prem, &t)?;
            let k_on = ts.red(k_on, !kr)?;
            let p = ts.rup(&star_prem(ts, k, k_on), &target.with([g.neg()]))?;
            let q = ts.rup(&star_prem(ts, k, k_off), &target.with([g.pos()]))?;
            ts.res(p, q, g)?
        };
        kstars.insert(j, id);
    }

    // The reduced clause.
    let kc = ts.kclause(&c)?;
    let mut with_o = Vec::new();
    for &od in ods.values() {
        let mut prem = phi_ids.clone();
        prem.extend(ts.defs(od));
        with_o.push(ts.rup(&prem, &kc.with([od.pos()]))?);
    }
    let mut prem = with_o;
    prem.extend(&a_defs);
    let with_a = ts.rup(&prem, &kc.with([a.pos()]))?;
    let mut prem = vec![with_a];
    prem.extend(defs_of(ts, &c, &|s| vec![s.on]));
    let t = map(ts, &c, &|s| s.on)?.with([!kr, a.pos()]);
    let c_on = ts.rup(&prem, &t)?;
    let mut prem = vec![vc.id];
    prem.extend(defs_of(ts, &c, &|s| vec![s.off]));
    let t = map(ts, &c, &|s| s.off)?.with([kr]);
    let c_off = ts.rup(&prem, &t)?;
    let c_off = ts.red(c_off, kr)?;
    let c_target = map(ts, &c, &|s| s.star)?;
    let p = ts.rup(&star_prem(ts, &c, c_on), &c_target.with([g.neg()]))?;
    let q = ts.rup(&star_prem(ts, &c, c_off), &c_target.with([g.pos()]))?;
    let c_star = ts.res(p, q, g)?;

    let final_map = |ts: &mut TranslationState, k: &Clause| -> Result<Clause> {
        let mut out = Vec::new();
        for q in k.iter() {
            match new_rep.get(&q.var()) {
                Some(&n) => out.push(n.xor(!q.is_positive())),
                None => out.push(ts.klit(q)?),
            }
        }
        Ok(Clause::new(out))
    };
    let w_defs = |ts: &TranslationState, k: &Clause| -> Vec<ClauseId> {
        k.vars().filter_map(|v| ws.get(&v)).flat_map(|&w| ts.defs(w)).collect()
    };

    let mut prem = vec![c_star];
    prem.extend(w_defs(ts, &c));
    let t = final_map(ts, &c)?;
    let c_new = ts.rup(&prem, &t)?;

    for (j, (i, k, kid)) in live.iter().enumerate() {
        if j == seed || !k.vars().any(|v| new_rep.contains_key(&v)) {
            continue;
        }
        let target = final_map(ts, k)?;
        let id = if k.is_tautology() {
            ts.tautology(&target)?
        } else {
            let mut prem = vec![*kid];
            prem.extend(kstars.get(&j));
            prem.extend(w_defs(ts, k));
            ts.rup(&prem, &target)?
        };
        ts.replace_view(*i, k.clone(), id);
    }
    for (&x, &n) in &new_rep {
        ts.set_rep(x, n);
    }
    ts.replace_view(idx, c, c_new);
    Ok(c_new)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Class {
    /// Neither polarity on a path from either polarity of `u`.
    Unreached,
    /// Only this literal is on a path.
    OneSided(Lit),
    /// Both polarities on paths from the same literal of `u`; the literal
    /// fixed by the replacement.
    TwoSided(Lit),
}

/// Drops `u` from the dependency sets of every view existential `x` with
/// `(u, x)` outside the reflexive resolution-path relation.
pub fn rrs_rewrite(ts: &mut TranslationState, u: Var) -> Result<()> {
    let prefix = ts.prefix().clone();
    let live: Vec<(usize, Clause, ClauseId)> = ts
        .live()
        .into_iter()
        .map(|(i, v)| (i, v.clause.clone(), v.id))
        .collect();
    let clauses: Vec<Clause> = live.iter().map(|(_, c, _)| c.clone()).collect();
    let rel = drrs_view(&prefix, &clauses);
    let (lu, lnu) = univ_paths(&prefix, &clauses, u);
    let ku = ts.klit(u.pos())?;

    let mut class: BTreeMap<Var, Class> = BTreeMap::new();
    for x in dependents(&prefix, u) {
        if rel.contains(&(u, x)) {
            continue;
        }
        let (pu, nu) = (lu.contains(&x.pos()), lu.contains(&x.neg()));
        let (pn, nn) = (lnu.contains(&x.pos()), lnu.contains(&x.neg()));
        let c = if pu && nu {
            Class::TwoSided(ku)
        } else if pn && nn {
            Class::TwoSided(!ku)
        } else if pu || pn {
            Class::OneSided(x.pos())
        } else if nu || nn {
            Class::OneSided(x.neg())
        } else {
            Class::Unreached
        };
        class.insert(x, c);
    }
    if class.is_empty() {
        return Ok(());
    }

    // Representatives: x^{ū} for unreached variables and those fixed on the
    // `u` side, x^{u} for the `ū` side, `x^{ū} ∨ x^{u}` for one-sided ones.
    let mut new_rep: BTreeMap<Var, Lit> = BTreeMap::new();
    let mut conds: BTreeMap<Var, (Var, Var)> = BTreeMap::new();
    let mut bridges: BTreeMap<Var, ClauseId> = BTreeMap::new();
    let mut ws: BTreeMap<Var, Var> = BTreeMap::new();
    for (&x, &c) in &class {
        let kx = ts.klit(x.pos())?;
        let off = ts.ext(ExtKind::And, cond(!ku), vec![kx])?;
        let on = ts.ext(ExtKind::And, cond(ku), vec![kx])?;
        conds.insert(x, (on, off));
        match c {
            Class::Unreached => {
                new_rep.insert(x, off.pos());
            }
            Class::TwoSided(side) => {
                new_rep.insert(x, if side == ku { off.pos() } else { on.pos() });
            }
            Class::OneSided(mu) => {
                let flip = !mu.is_positive();
                let w = ts.ext(ExtKind::Or, none(), vec![off.pos().xor(flip), on.pos().xor(flip)])?;
                let mut prem = ts.defs(off);
                prem.extend(ts.defs(on));
                prem.extend(ts.defs(w));
                let kmu = kx.xor(flip);
                bridges.insert(x, ts.rup(&prem, &Clause::new([!kmu, w.pos()]))?);
                ws.insert(x, w);
                new_rep.insert(x, w.pos().xor(flip));
            }
        }
    }

    let map = |ts: &mut TranslationState, k: &Clause| -> Result<Clause> {
        let mut out = Vec::new();
        for q in k.iter() {
            match new_rep.get(&q.var()) {
                Some(&n) => out.push(n.xor(!q.is_positive())),
                None => out.push(ts.klit(q)?),
            }
        }
        Ok(Clause::new(out))
    };

    let mut residual = Vec::new();
    for (i, k, kid) in &live {
        let mut view = k.clone();
        let xs: Vec<Lit> = k.iter().filter(|q| class.contains_key(&q.var())).collect();
        if xs.is_empty() {
            continue;
        }
        let target = map(ts, k)?;
        let mut prem = vec![*kid];
        prem.extend(xs.iter().filter_map(|q| bridges.get(&q.var())));
        let lambda: Vec<Lit> = xs
            .iter()
            .copied()
            .filter(|&q| class[&q.var()] == Class::OneSided(!q))
            .collect();
        let side = xs.iter().find_map(|q| match class[&q.var()] {
            Class::TwoSided(s) => Some(s),
            _ => None,
        });
        let unreached = xs.iter().any(|q| class[&q.var()] == Class::Unreached);
        let cond_defs = |ts: &TranslationState, pick: &dyn Fn(&(Var, Var)) -> Var| -> Vec<ClauseId> {
            xs.iter().flat_map(|q| ts.defs(pick(&conds[&q.var()]))).collect()
        };

        let id = if k.is_tautology() {
            ts.tautology(&target)?
        } else if let [lam] = lambda.as_slice() {
            let (on, off) = conds[&lam.var()];
            let rest = target.without(new_rep[&lam.var()].xor(!lam.is_positive()));
            let mut p1 = prem.clone();
            p1.extend(ts.defs(off));
            let a = ts.rup(&p1, &rest.with([ku, off.pos().xor(!lam.is_positive())]))?;
            let a = ts.red(a, ku)?;
            let mut p2 = prem.clone();
            p2.extend(ts.defs(on));
            let b = ts.rup(&p2, &rest.with([!ku, on.pos().xor(!lam.is_positive())]))?;
            let b = ts.red(b, !ku)?;
            let mut p3 = vec![a, b];
            p3.extend(ts.defs(ws[&lam.var()]));
            ts.rup(&p3, &target)?
        } else if !lambda.is_empty() {
            return Err(TranslateError::Internal(format!(
                "clause ({k}) has several unreachable literals"
            )));
        } else if unreached {
            prem.extend(cond_defs(ts, &|&(_, off)| off));
            let id = ts.rup(&prem, &target.with([ku]))?;
            if target.contains(ku) {
                id
            } else {
                ts.red(id, ku)?
            }
        } else if let Some(side) = side {
            prem.extend(cond_defs(ts, &|&(on, off)| if side == ku { off } else { on }));
            let id = ts.rup(&prem, &target.with([side]))?;
            if !target.contains(side) {
                let vlit = Lit::new(u, side == ku);
                view = k.with([vlit]);
                residual.push((*i, vlit));
            }
            id
        } else {
            ts.rup(&prem, &target)?
        };
        ts.replace_view(*i, view, id);
    }

    for (&x, &n) in &new_rep {
        ts.set_rep(x, n);
        let mut d = ts.prefix().deps(x).cloned().unwrap_or_default();
        d.remove(&u);
        ts.set_view_deps(x, d)?;
    }
    for (i, vlit) in residual {
        mixed_reduction(ts, i, vlit).map_err(|e| {
            TranslateError::Internal(format!("residual {vlit} could not be reduced: {e}"))
        })?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{parse_instance, Formula};
    use crate::kernel::{check_proof_with_mode, CheckMode, KernelProof};

    const EUR: &str = "p cnf 5 7\ne 1 0\na 2 0\ne 3 4 5 0\n2 4 0\n1 -2 3 -4 0\n-3 4 5 0\n1 -5 0\n1 3 4 0\n-3 -4 0\n-1 -2 5 0\n";

    fn accepted(f: &Formula, ts: TranslationState) -> bool {
        let p = KernelProof::new(ts.into_steps());
        check_proof_with_mode(f, &p, CheckMode::Derivation).is_accepted()
    }

    #[test]
    fn mixed_reduction_on_the_example() {
        let f = parse_instance(EUR).unwrap();
        let mut ts = TranslationState::with_axioms(&f).unwrap();
        let id = mixed_reduction(&mut ts, 0, Lit::from_dimacs(2)).unwrap();
        assert_eq!(ts.view_clause(0).unwrap().clause, Clause::from_dimacs(&[4]));
        assert_eq!(ts.clause(id).len(), 1);
        assert!(accepted(&f, ts));
    }

    #[test]
    fn mixed_reduction_reports_failing_clause() {
        // ∀u ∃y: (u ∨ y), (¬u ∨ ¬y): removing u is unsound.
        let f = parse_instance("p cnf 2 2\na 1 0\ne 2 0\n1 2 0\n-1 -2 0\n").unwrap();
        let mut ts = TranslationState::with_axioms(&f).unwrap();
        let e = mixed_reduction(&mut ts, 0, Lit::from_dimacs(1)).unwrap_err();
        assert!(matches!(e, TranslateError::Uncertifiable { .. }));
        assert!(e.to_string().contains("-1 -2"));
    }

    #[test]
    fn qrata_blocked_clause() {
        // Adding (y ∨ ¬x) where ¬y occurs only in (¬y ∨ x).
        let f = parse_instance("p cnf 3 2\ne 1 0\na 2 0\ne 3 0\n-3 1 0\n3 2 0\n").unwrap();
        let mut ts = TranslationState::with_axioms(&f).unwrap();
        let c = Clause::from_dimacs(&[3, -1]);
        let id = qrata_rewrite(&mut ts, &c, Lit::from_dimacs(3)).unwrap();
        ts.push_view(c, id);
        assert!(accepted(&f, ts));
    }

    #[test]
    fn qrata_rejects_non_rat() {
        let f = parse_instance("p cnf 3 1\ne 1 0\na 2 0\ne 3 0\n-3 2 0\n").unwrap();
        let mut ts = TranslationState::with_axioms(&f).unwrap();
        let e = qrata_rewrite(&mut ts, &Clause::from_dimacs(&[3]), Lit::from_dimacs(3)).unwrap_err();
        assert!(matches!(e, TranslateError::Uncertifiable { .. }));
    }

    #[test]
    fn rrs_rewrite_drops_spurious_dependencies() {
        let f = parse_instance(EUR).unwrap();
        let mut ts = TranslationState::with_axioms(&f).unwrap();
        rrs_rewrite(&mut ts, Var(2)).unwrap();
        assert!(!ts.prefix().depends_on(Var(5), Var(2)));
        assert!(ts.prefix().depends_on(Var(3), Var(2)));
        assert!(ts.prefix().depends_on(Var(4), Var(2)));
        let view: Vec<Clause> = ts.live().into_iter().map(|(_, v)| v.clause.clone()).collect();
        assert_eq!(view, f.matrix);
        assert!(accepted(&f, ts));
    }
}
