//! Formula-to-formula rewrites: universal sentences into `∀Q^struct` form,
//! removal of sub-vocabulary targets, exact-diagram sentences, and the
//! first-order translation of structural quantifiers.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use crate::enumerate::{enumerate_decorated_expansions, DEFAULT_CANDIDATE_CAP};
use crate::error::{Error, Result};
use crate::semantics::{eval, Assignment};
use crate::structure::{DecoratedStructure, Elem, Structure, Symbol, Vocabulary};
use crate::syntax::{fresh_vars, Formula, Kappa, QStruct, Term, Var};

/// `base` itself when unused, else `base0`, `base1`, ….
fn fresh_named(base: &str, avoid: &BTreeSet<Var>) -> Var {
    if !avoid.contains(base) {
        return base.to_string();
    }
    (0..)
        .map(|i| format!("{base}{i}"))
        .find(|v| !avoid.contains(v))
        .expect("pool is infinite")
}

fn conj(mut fs: Vec<Formula>) -> Formula {
    match fs.len() {
        1 => fs.pop().expect("one conjunct"),
        _ => Formula::and(fs),
    }
}

fn disj(mut fs: Vec<Formula>) -> Formula {
    match fs.len() {
        1 => fs.pop().expect("one disjunct"),
        _ => Formula::or(fs),
    }
}

/// `∀z ψ` with `ψ` quantifier-free becomes `∀z Q^struct_1 x (x = z0 ∧ ψ)`.
/// A sentence with no universal prefix gets a dummy `∀z0`.
pub fn univ_gen_rewrite(s: &Formula) -> Result<Formula> {
    if !s.is_sentence() {
        return Err(Error::Shape(format!(
            "not a sentence: free variables {:?}",
            s.free_vars()
        )));
    }
    let mut prefix: Vec<Var> = Vec::new();
    let mut body = s;
    while let Formula::Forall(v, inner) = body {
        prefix.push(v.clone());
        body = inner;
    }
    if !body.is_quantifier_free() {
        return Err(Error::Shape(
            "matrix of the universal sentence is not quantifier-free".into(),
        ));
    }
    let avoid = s.all_vars();
    // Without variables ψ only mentions closed terms, so constants exist and
    // the empty structure is excluded: ψ and ∀z0 ψ agree.
    let z0 = match prefix.first() {
        Some(z) => z.clone(),
        None => {
            let z = fresh_named("z0", &avoid);
            prefix.push(z.clone());
            z
        }
    };
    let mut avoid = avoid;
    avoid.insert(z0.clone());
    let x = fresh_named("x", &avoid);
    let phi = Formula::and(vec![
        Formula::eq(Term::var(x.clone()), Term::var(z0)),
        body.clone(),
    ]);
    let q = QStruct::simple(Structure::bare(1), x, phi);
    Ok(Formula::forall_many(&prefix, Formula::qstruct(q)))
}

/// Replaces a structural quantifier whose target lives in a proper
/// sub-vocabulary of `vocab` by the disjunction over all expansions of the
/// target to `vocab`. Only new relation symbols are allowed: a new function
/// could leave the solution set, which the original quantifier ignores.
pub fn eliminate_subvocab(q: &QStruct, vocab: &Arc<Vocabulary>) -> Result<Formula> {
    let sub = q.sub_vocab();
    if !sub.is_subvocabulary_of(vocab) {
        return Err(Error::Signature(format!(
            "target vocabulary {sub} is not contained in {vocab}"
        )));
    }
    let extra = vocab.difference(sub);
    if let Some(f) = extra.functions().first() {
        return Err(Error::Domain(format!(
            "cannot eliminate the sub-vocabulary: `{}` is a function symbol outside it",
            f.name
        )));
    }
    if **sub == **vocab {
        return Ok(Formula::qstruct(q.clone()));
    }
    let expansions = enumerate_decorated_expansions(&q.target, vocab, DEFAULT_CANDIDATE_CAP)?;
    let disjuncts = expansions
        .into_iter()
        .map(|target| {
            QStruct::new(target, q.x.clone(), q.ys.clone(), q.phi.clone(), q.psis.clone())
                .map(Formula::qstruct)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Formula::or(disjuncts))
}

/// Applies [`eliminate_subvocab`] to every structural quantifier.
pub fn eliminate_subvocab_everywhere(f: &Formula, vocab: &Arc<Vocabulary>) -> Result<Formula> {
    f.try_map_bottom_up(&mut |g| match g {
        Formula::QStruct(q) => eliminate_subvocab(&q, vocab),
        other => Ok(other),
    })
}

/// Pairwise distinctness of the named elements, every relation tuple or its
/// negation, and every function table entry.
pub(crate) fn atomic_diagram(base: &Structure, at: &BTreeMap<Elem, Var>) -> Vec<Formula> {
    let var = |e: &Elem| Term::var(at[e].clone());
    let names: Vec<&Var> = at.values().collect();
    let mut facts = Vec::new();
    for i in 0..names.len() {
        for j in i + 1..names.len() {
            facts.push(Formula::not(Formula::eq_vars(names[i], names[j])));
        }
    }
    let vocab = base.vocab();
    for (r, sym) in vocab.relations().iter().enumerate() {
        for args in crate::util::tuples(base.universe(), sym.arity) {
            let atom = Formula::atom(sym.name.clone(), args.iter().map(var).collect());
            facts.push(if base.holds(r, &args) {
                atom
            } else {
                Formula::not(atom)
            });
        }
    }
    for (f, sym) in vocab.functions().iter().enumerate() {
        for (args, v) in base.function_table(f) {
            facts.push(Formula::eq(
                Term::app(sym.name.clone(), args.iter().map(var).collect()),
                var(v),
            ));
        }
    }
    facts
}

/// The exact diagram of `d` relativized by `guard` (a formula in the given
/// variable, or none), with membership in subset `i` expressed by `member`.
fn diagram(
    d: &DecoratedStructure,
    avoid: &BTreeSet<Var>,
    guard: &dyn Fn(&Var) -> Option<Formula>,
    member: &dyn Fn(usize, &Var) -> Formula,
) -> Formula {
    let base = &d.base;
    let m = base.size();
    let names = fresh_vars(avoid, m + 1);
    let (xs, y) = (&names[..m], names[m].clone());
    let at: BTreeMap<Elem, Var> = base.universe().iter().copied().zip(xs.iter().cloned()).collect();

    let y_guard = guard(&y);
    if m == 0 {
        let inner = y_guard.unwrap_or_else(|| Formula::eq_vars(&y, &y));
        return Formula::not(Formula::exists(y, inner));
    }

    let mut facts = Vec::new();
    for x in xs {
        facts.extend(guard(x));
    }
    facts.extend(atomic_diagram(base, &at));
    for (i, subset) in d.subsets.iter().enumerate() {
        for e in base.universe() {
            let p = member(i, &at[e]);
            facts.push(if subset.contains(e) {
                p
            } else {
                Formula::not(p)
            });
        }
    }
    let covers = disj(xs.iter().map(|x| Formula::eq_vars(&y, x)).collect());
    let closing = match y_guard {
        Some(g) => Formula::implies(g, covers),
        None => covers,
    };
    facts.push(Formula::forall(y, closing));
    Formula::exists_many(xs, conj(facts))
}

/// An exact-diagram sentence for a finite decorated structure. Subset `i`
/// is read off the unary placeholder relation `placeholders[i]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScottSentence {
    pub formula: Formula,
    pub placeholders: Vec<String>,
    /// The target vocabulary plus the placeholders.
    pub vocab: Arc<Vocabulary>,
}

impl ScottSentence {
    /// Interprets the placeholders by the subsets of `n` and evaluates.
    pub fn holds(&self, n: &DecoratedStructure) -> Result<bool> {
        if n.subsets.len() != self.placeholders.len() {
            return Err(Error::Arity(format!(
                "{} subsets for {} placeholders",
                n.subsets.len(),
                self.placeholders.len()
            )));
        }
        let extra: BTreeMap<String, BTreeSet<Vec<Elem>>> = self
            .placeholders
            .iter()
            .zip(&n.subsets)
            .map(|(p, s)| (p.clone(), s.iter().map(|e| vec![*e]).collect()))
            .collect();
        let expanded = n.base.expand(self.vocab.clone(), &extra, &BTreeMap::new())?;
        eval(&expanded, &self.formula, &Assignment::new(), Kappa::Unbounded)
    }
}

pub fn scott_sentence(d: &DecoratedStructure) -> Result<ScottSentence> {
    let vocab = d.base.vocab();
    let mut placeholders = Vec::new();
    let mut k = 0;
    while placeholders.len() < d.subsets.len() {
        let p = format!("P{k}");
        k += 1;
        if !vocab.has_symbol(&p) {
            placeholders.push(p);
        }
    }
    let mut relations = vocab.relations().to_vec();
    relations.extend(placeholders.iter().map(|p| Symbol::new(p.clone(), 1)));
    let full = Arc::new(Vocabulary::new(relations, vocab.functions().to_vec())?);
    let formula = diagram(d, &BTreeSet::new(), &|_| None, &|i, v| {
        Formula::atom_vars(placeholders[i].clone(), &[v])
    });
    Ok(ScottSentence {
        formula,
        placeholders,
        vocab: full,
    })
}

/// `∃^{≥k} v φ(v)` spelled out with `k` distinct witnesses.
fn at_least(k: usize, x: &Var, phi: &Formula, avoid: &BTreeSet<Var>) -> Formula {
    let ws = fresh_vars(avoid, k);
    let mut facts: Vec<Formula> = ws
        .iter()
        .map(|w| phi.substitute(x, &Term::var(w.clone())))
        .collect();
    for i in 0..k {
        for j in i + 1..k {
            facts.push(Formula::not(Formula::eq_vars(&ws[i], &ws[j])));
        }
    }
    Formula::exists_many(&ws, conj(facts))
}

/// First-order equivalent of one structural quantifier: side solution sets
/// inside the main one, the cardinality bound, and the exact diagram of the
/// target relativized to `φ` with subset membership read through `ψ_i`.
pub fn qstruct_to_counting(q: &QStruct, kappa: Kappa) -> Result<Formula> {
    let mut avoid = q.phi.all_vars();
    avoid.insert(q.x.clone());
    for (y, psi) in q.ys.iter().zip(&q.psis) {
        avoid.insert(y.clone());
        avoid.extend(psi.all_vars());
    }
    let at = |body: &Formula, bound: &Var, v: &Var| body.substitute(bound, &Term::var(v.clone()));

    let mut parts = Vec::new();
    for (y, psi) in q.ys.iter().zip(&q.psis) {
        let v = fresh_named("x", &avoid);
        parts.push(Formula::forall(
            v.clone(),
            Formula::implies(at(psi, y, &v), at(&q.phi, &q.x, &v)),
        ));
    }
    if let Kappa::Finite(k) = kappa {
        parts.push(Formula::not(at_least(k, &q.x, &q.phi, &avoid)));
    }
    parts.push(diagram(
        &q.target,
        &avoid,
        &|v| Some(at(&q.phi, &q.x, v)),
        &|i, v| at(&q.psis[i], &q.ys[i], v),
    ));
    Ok(conj(parts))
}

/// Replaces every structural quantifier by its first-order translation.
pub fn to_counting(f: &Formula, kappa: Kappa) -> Result<Formula> {
    f.try_map_bottom_up(&mut |g| match g {
        Formula::QStruct(q) => qstruct_to_counting(&q, kappa),
        other => Ok(other),
    })
}
