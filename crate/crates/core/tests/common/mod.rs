//! A slow, direct evaluator used as an oracle: structural quantifiers are
//! decided by trying every bijection between the target and the solution set.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use itertools::Itertools;
use structural_logic::{DecoratedStructure, Elem, Formula, Kappa, QStruct, Structure, Term};

pub type Env = BTreeMap<String, Elem>;

fn term(n: &Structure, t: &Term, env: &Env) -> Elem {
    match t {
        Term::Var(v) => env[v],
        Term::App(f, args) => {
            let vals: Vec<Elem> = args.iter().map(|a| term(n, a, env)).collect();
            let i = n.vocab().function_index(f).expect("known function");
            n.function_table(i)[&vals]
        }
    }
}

pub fn holds(n: &Structure, f: &Formula, env: &Env, kappa: Kappa) -> bool {
    match f {
        Formula::Atom(r, args) => {
            let vals: Vec<Elem> = args.iter().map(|a| term(n, a, env)).collect();
            n.relation_by_name(r).expect("known relation").contains(&vals)
        }
        Formula::Eq(a, b) => term(n, a, env) == term(n, b, env),
        Formula::Not(g) => !holds(n, g, env, kappa),
        Formula::And(gs) => gs.iter().all(|g| holds(n, g, env, kappa)),
        Formula::Or(gs) => gs.iter().any(|g| holds(n, g, env, kappa)),
        Formula::Exists(v, g) | Formula::Forall(v, g) => {
            let mut env = env.clone();
            let mut each = n.universe().iter().map(|e| {
                env.insert(v.clone(), *e);
                holds(n, g, &env, kappa)
            });
            if matches!(f, Formula::Exists(..)) {
                each.any(|b| b)
            } else {
                each.all(|b| b)
            }
        }
        Formula::QStruct(q) => qstruct_holds(n, q, env, kappa),
    }
}

fn solutions(n: &Structure, f: &Formula, x: &str, env: &Env, kappa: Kappa) -> BTreeSet<Elem> {
    let mut env = env.clone();
    n.universe()
        .iter()
        .copied()
        .filter(|e| {
            env.insert(x.to_string(), *e);
            holds(n, f, &env, kappa)
        })
        .collect()
}

/// Whether `pi` (target element ↦ element of `n`) carries the target's
/// interpretations of its own symbols onto those of `n` and subsets onto `sides`.
fn carries(n: &Structure, t: &DecoratedStructure, pi: &BTreeMap<Elem, Elem>, sides: &[BTreeSet<Elem>]) -> bool {
    let m = &t.base;
    let tv = m.vocab();
    for (r, sym) in tv.relations().iter().enumerate() {
        let rn = n.relation_by_name(&sym.name).expect("sub-vocabulary");
        let all = (0..sym.arity).map(|_| m.universe().iter().copied()).multi_cartesian_product();
        for args in all {
            let image: Vec<Elem> = args.iter().map(|a| pi[a]).collect();
            if m.holds(r, &args) != rn.contains(&image) {
                return false;
            }
        }
    }
    for (f, sym) in tv.functions().iter().enumerate() {
        let fi = n.vocab().function_index(&sym.name).expect("sub-vocabulary");
        for (args, v) in m.function_table(f) {
            let image: Vec<Elem> = args.iter().map(|a| pi[a]).collect();
            if n.function_table(fi)[&image] != pi[v] {
                return false;
            }
        }
    }
    t.subsets
        .iter()
        .zip(sides)
        .all(|(a, s)| a.iter().map(|e| pi[e]).collect::<BTreeSet<_>>() == *s)
}

pub fn qstruct_holds(n: &Structure, q: &QStruct, env: &Env, kappa: Kappa) -> bool {
    let set = solutions(n, &q.phi, &q.x, env, kappa);
    if let Kappa::Finite(k) = kappa {
        if set.len() >= k {
            return false;
        }
    }
    let sides: Vec<BTreeSet<Elem>> = q
        .ys
        .iter()
        .zip(&q.psis)
        .map(|(y, psi)| solutions(n, psi, y, env, kappa))
        .collect();
    if sides.iter().any(|s| !s.is_subset(&set)) {
        return false;
    }
    let tv = q.target.base.vocab();
    // closure under the target's functions, constants included
    for sym in tv.functions() {
        let fi = n.vocab().function_index(&sym.name).expect("sub-vocabulary");
        if sym.arity == 0 {
            if !set.contains(&n.function_table(fi)[&Vec::new()]) {
                return false;
            }
            continue;
        }
        let all = (0..sym.arity).map(|_| set.iter().copied()).multi_cartesian_product();
        for args in all {
            if !set.contains(&n.function_table(fi)[&args]) {
                return false;
            }
        }
    }
    let target = q.target.base.universe().to_vec();
    if target.len() != set.len() {
        return false;
    }
    let image: Vec<Elem> = set.into_iter().collect();
    image.iter().copied().permutations(image.len()).any(|p| {
        let pi: BTreeMap<Elem, Elem> = target.iter().copied().zip(p).collect();
        carries(n, &q.target, &pi, &sides)
    })
}

/// Every assignment of `vars` into the universe of `n`.
pub fn assignments(n: &Structure, vars: &[String]) -> Vec<Env> {
    if vars.is_empty() {
        return vec![Env::new()];
    }
    (0..vars.len())
        .map(|_| n.universe().iter().copied())
        .multi_cartesian_product()
        .map(|vals| vars.iter().cloned().zip(vals).collect())
        .collect()
}

pub fn sentence_holds(n: &Structure, f: &Formula, kappa: Kappa) -> bool {
    holds(n, f, &Env::new(), kappa)
}

pub fn models_all(n: &Structure, sentences: &[Formula], kappa: Kappa) -> bool {
    sentences.iter().all(|s| sentence_holds(n, s, kappa))
}

/// Brute-force isomorphism test between decorated structures over the same vocabulary.
pub fn iso_exists(a: &DecoratedStructure, b: &DecoratedStructure) -> bool {
    if a.base.size() != b.base.size() || a.subsets.len() != b.subsets.len() {
        return false;
    }
    let src = a.base.universe().to_vec();
    let dst = b.base.universe().to_vec();
    dst.iter().copied().permutations(dst.len()).any(|p| {
        let pi: BTreeMap<Elem, Elem> = src.iter().copied().zip(p).collect();
        carries(&b.base, a, &pi, &b.subsets)
    })
}

/// `m ≼*_F n` decided directly: truth of every fragment member is preserved
/// on tuples from `m`, and qstruct members with a solution set in `m` of
/// size below `kappa` see the same solution sets in `n`.
pub fn elem_star(m: &Structure, n: &Structure, fragment: &[Formula], kappa: Kappa) -> bool {
    if !m.is_substructure_of(n) {
        return false;
    }
    for f in fragment {
        let vars: Vec<String> = f.free_vars().into_iter().collect();
        for env in assignments(m, &vars) {
            if holds(m, f, &env, kappa) != holds(n, f, &env, kappa) {
                return false;
            }
            if let Formula::QStruct(q) = f {
                let small = solutions(m, &q.phi, &q.x, &env, kappa);
                if let Kappa::Finite(k) = kappa {
                    if small.len() >= k {
                        continue;
                    }
                }
                if small != solutions(n, &q.phi, &q.x, &env, kappa) {
                    return false;
                }
                for (y, psi) in q.ys.iter().zip(&q.psis) {
                    if solutions(m, psi, y, &env, kappa) != solutions(n, psi, y, &env, kappa) {
                        return false;
                    }
                }
            }
        }
    }
    true
}

pub fn solution_set(n: &Structure, f: &Formula, x: &str, env: &Env, kappa: Kappa) -> BTreeSet<Elem> {
    solutions(n, f, x, env, kappa)
}

/// Small random formulas over `{R/2}` in the variables `x`, `z`, with bound
/// variables `w0, w1, ...` and simple structural quantifiers whose targets
/// carry no symbols or the full vocabulary.
pub mod random {
    use std::sync::Arc;

    use rand::seq::SliceRandom;
    use rand::Rng;
    use structural_logic::{Formula, QStruct, Structure, Term, Vocabulary};

    pub fn edge() -> Arc<Vocabulary> {
        Arc::new(Vocabulary::relational(&[("R", 2)]).unwrap())
    }

    pub fn structure<R: Rng>(rng: &mut R, size: usize) -> Structure {
        let mut b = Structure::builder(edge(), 0..size);
        for i in 0..size {
            for j in 0..size {
                if rng.gen_bool(0.4) {
                    b = b.tuple("R", &[i, j]);
                }
            }
        }
        b.build().unwrap()
    }

    fn atom<R: Rng>(rng: &mut R, vars: &[String]) -> Formula {
        let mut pick = || Term::var(vars.choose(rng).unwrap().clone());
        let (a, b) = (pick(), pick());
        if rng.gen_bool(0.7) {
            Formula::atom("R", vec![a, b])
        } else {
            Formula::eq(a, b)
        }
    }

    pub fn formula<R: Rng>(rng: &mut R, vars: &[String], depth: usize) -> Formula {
        if depth == 0 {
            return atom(rng, vars);
        }
        let sub = |rng: &mut R| formula(rng, vars, depth - 1);
        match rng.gen_range(0..10) {
            0..=2 => atom(rng, vars),
            3 => Formula::not(sub(rng)),
            4 | 5 => Formula::and(vec![sub(rng), sub(rng)]),
            6 | 7 => Formula::or(vec![sub(rng), sub(rng)]),
            k => {
                let w = format!("w{depth}");
                let mut inner = vars.to_vec();
                inner.push(w.clone());
                let body = formula(rng, &inner, depth - 1);
                match (k, rng.gen_range(0..3)) {
                    (8, 0) => Formula::exists(w, body),
                    (8, _) => Formula::forall(w, body),
                    _ => {
                        let size = rng.gen_range(0..=2);
                        let target = if rng.gen_bool(0.5) {
                            structure(rng, size)
                        } else {
                            Structure::bare(size)
                        };
                        Formula::qstruct(QStruct::simple(target, w, body))
                    }
                }
            }
        }
    }

    pub fn open<R: Rng>(rng: &mut R, depth: usize) -> Formula {
        formula(rng, &["x".to_string(), "z".to_string()], depth)
    }
}
