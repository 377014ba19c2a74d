//! Terms, formulas with structural quantifiers, theories and fragments.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::iso::normalize;
use crate::structure::{DecoratedStructure, Structure, Vocabulary};

pub type Var = String;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Var(Var),
    /// Function application; constants have no arguments.
    App(String, Vec<Term>),
}

impl Term {
    pub fn var(name: impl Into<String>) -> Term {
        Term::Var(name.into())
    }

    pub fn constant(name: impl Into<String>) -> Term {
        Term::App(name.into(), Vec::new())
    }

    pub fn app(name: impl Into<String>, args: Vec<Term>) -> Term {
        Term::App(name.into(), args)
    }

    fn collect_vars(&self, out: &mut BTreeSet<Var>) {
        match self {
            Term::Var(v) => {
                out.insert(v.clone());
            }
            Term::App(_, args) => args.iter().for_each(|a| a.collect_vars(out)),
        }
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    pub fn substitute(&self, var: &str, by: &Term) -> Term {
        match self {
            Term::Var(v) if v == var => by.clone(),
            Term::Var(_) => self.clone(),
            Term::App(f, args) => {
                Term::App(f.clone(), args.iter().map(|a| a.substitute(var, by)).collect())
            }
        }
    }
}

/// `Q^struct_{M,A} x y φ(x, z) ⟨ψ_i(y_i, z)⟩`: the solution set of `phi`
/// (binding `x`) induces a substructure isomorphic to `target.base`, with the
/// solution set of `psis[i]` (binding `ys[i]`) carried onto `target.subsets[i]`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct QStruct {
    pub target: DecoratedStructure,
    pub x: Var,
    pub ys: Vec<Var>,
    pub phi: Formula,
    pub psis: Vec<Formula>,
}

impl QStruct {
    /// Builds the node, normalizing the target.
    pub fn new(
        target: DecoratedStructure,
        x: impl Into<Var>,
        ys: Vec<Var>,
        phi: Formula,
        psis: Vec<Formula>,
    ) -> Result<QStruct> {
        if ys.len() != psis.len() || psis.len() != target.subsets.len() {
            return Err(Error::Arity(format!(
                "qstruct has {} bound variables, {} side formulas and {} subsets",
                ys.len(),
                psis.len(),
                target.subsets.len()
            )));
        }
        Ok(QStruct {
            target: normalize(&target),
            x: x.into(),
            ys,
            phi,
            psis,
        })
    }

    /// The `n = 0` form `Q^struct_M x φ`.
    pub fn simple(target: Structure, x: impl Into<Var>, phi: Formula) -> QStruct {
        QStruct::new(DecoratedStructure::plain(target), x, Vec::new(), phi, Vec::new())
            .expect("no side formulas")
    }

    pub fn sub_vocab(&self) -> &Arc<Vocabulary> {
        self.target.base.vocab()
    }

    /// Same variables and bodies, so the decorated solution structure is shared.
    pub fn same_bodies(&self, other: &QStruct) -> bool {
        self.x == other.x
            && self.ys == other.ys
            && self.phi == other.phi
            && self.psis == other.psis
            && self.sub_vocab() == other.sub_vocab()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Formula {
    Atom(String, Vec<Term>),
    Eq(Term, Term),
    Not(Box<Formula>),
    /// Finite, non-empty conjunction.
    And(Vec<Formula>),
    /// Finite, non-empty disjunction.
    Or(Vec<Formula>),
    Exists(Var, Box<Formula>),
    Forall(Var, Box<Formula>),
    QStruct(Box<QStruct>),
}

impl Formula {
    pub fn atom(rel: impl Into<String>, args: Vec<Term>) -> Formula {
        Formula::Atom(rel.into(), args)
    }

    /// Atom whose arguments are all variables.
    pub fn atom_vars(rel: impl Into<String>, vars: &[&str]) -> Formula {
        Formula::Atom(rel.into(), vars.iter().map(|v| Term::var(*v)).collect())
    }

    pub fn eq(a: Term, b: Term) -> Formula {
        Formula::Eq(a, b)
    }

    pub fn eq_vars(a: &str, b: &str) -> Formula {
        Formula::Eq(Term::var(a), Term::var(b))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn and(fs: Vec<Formula>) -> Formula {
        assert!(!fs.is_empty(), "empty conjunction");
        Formula::And(fs)
    }

    pub fn or(fs: Vec<Formula>) -> Formula {
        assert!(!fs.is_empty(), "empty disjunction");
        Formula::Or(fs)
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::Or(vec![Formula::not(a), b])
    }

    pub fn exists(v: impl Into<Var>, f: Formula) -> Formula {
        Formula::Exists(v.into(), Box::new(f))
    }

    pub fn forall(v: impl Into<Var>, f: Formula) -> Formula {
        Formula::Forall(v.into(), Box::new(f))
    }

    /// `∀v0 … vn f`, innermost variable last.
    pub fn forall_many(vars: &[Var], f: Formula) -> Formula {
        vars.iter()
            .rev()
            .fold(f, |acc, v| Formula::forall(v.clone(), acc))
    }

    pub fn exists_many(vars: &[Var], f: Formula) -> Formula {
        vars.iter()
            .rev()
            .fold(f, |acc, v| Formula::exists(v.clone(), acc))
    }

    pub fn qstruct(q: QStruct) -> Formula {
        Formula::QStruct(Box::new(q))
    }

    /// Immediate subformulas.
    pub fn children(&self) -> Vec<&Formula> {
        match self {
            Formula::Atom(..) | Formula::Eq(..) => Vec::new(),
            Formula::Not(f) | Formula::Exists(_, f) | Formula::Forall(_, f) => vec![f],
            Formula::And(fs) | Formula::Or(fs) => fs.iter().collect(),
            Formula::QStruct(q) => std::iter::once(&q.phi).chain(q.psis.iter()).collect(),
        }
    }

    pub fn is_atomic(&self) -> bool {
        matches!(self, Formula::Atom(..) | Formula::Eq(..))
    }

    /// No quantifiers and no structural quantifiers anywhere.
    pub fn is_quantifier_free(&self) -> bool {
        match self {
            Formula::Atom(..) | Formula::Eq(..) => true,
            Formula::Not(f) => f.is_quantifier_free(),
            Formula::And(fs) | Formula::Or(fs) => fs.iter().all(Formula::is_quantifier_free),
            Formula::Exists(..) | Formula::Forall(..) | Formula::QStruct(_) => false,
        }
    }

    pub fn contains_qstruct(&self) -> bool {
        matches!(self, Formula::QStruct(_)) || self.children().iter().any(|c| c.contains_qstruct())
    }

    pub fn free_vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut out);
        out
    }

    fn collect_free(&self, out: &mut BTreeSet<Var>) {
        match self {
            Formula::Atom(_, args) => args.iter().for_each(|t| t.collect_vars(out)),
            Formula::Eq(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            Formula::Not(f) => f.collect_free(out),
            Formula::And(fs) | Formula::Or(fs) => fs.iter().for_each(|f| f.collect_free(out)),
            Formula::Exists(v, f) | Formula::Forall(v, f) => {
                let mut inner = f.free_vars();
                inner.remove(v);
                out.extend(inner);
            }
            Formula::QStruct(q) => {
                let mut inner = q.phi.free_vars();
                inner.remove(&q.x);
                out.extend(inner);
                for (y, psi) in q.ys.iter().zip(&q.psis) {
                    let mut inner = psi.free_vars();
                    inner.remove(y);
                    out.extend(inner);
                }
            }
        }
    }

    /// Every variable name occurring anywhere, bound or free.
    pub fn all_vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.collect_all(&mut out);
        out
    }

    fn collect_all(&self, out: &mut BTreeSet<Var>) {
        match self {
            Formula::Atom(_, args) => args.iter().for_each(|t| t.collect_vars(out)),
            Formula::Eq(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            Formula::Exists(v, f) | Formula::Forall(v, f) => {
                out.insert(v.clone());
                f.collect_all(out);
            }
            Formula::QStruct(q) => {
                out.insert(q.x.clone());
                out.extend(q.ys.iter().cloned());
                q.phi.collect_all(out);
                q.psis.iter().for_each(|p| p.collect_all(out));
            }
            _ => self.children().into_iter().for_each(|c| c.collect_all(out)),
        }
    }

    pub fn is_sentence(&self) -> bool {
        self.free_vars().is_empty()
    }

    /// Capture-avoiding substitution of `by` for the free occurrences of `var`.
    pub fn substitute(&self, var: &str, by: &Term) -> Formula {
        let by_vars = by.vars();
        match self {
            Formula::Atom(r, args) => {
                Formula::Atom(r.clone(), args.iter().map(|t| t.substitute(var, by)).collect())
            }
            Formula::Eq(a, b) => Formula::Eq(a.substitute(var, by), b.substitute(var, by)),
            Formula::Not(f) => Formula::not(f.substitute(var, by)),
            Formula::And(fs) => Formula::And(fs.iter().map(|f| f.substitute(var, by)).collect()),
            Formula::Or(fs) => Formula::Or(fs.iter().map(|f| f.substitute(var, by)).collect()),
            Formula::Exists(v, f) | Formula::Forall(v, f) => {
                let rebuild = |v: Var, f: Formula| match self {
                    Formula::Exists(..) => Formula::exists(v, f),
                    _ => Formula::forall(v, f),
                };
                let (v, f) = bind_substitute(v, f, var, by, &by_vars);
                rebuild(v, f)
            }
            Formula::QStruct(q) => {
                let (x, phi) = bind_substitute(&q.x, &q.phi, var, by, &by_vars);
                let (ys, psis) = q
                    .ys
                    .iter()
                    .zip(&q.psis)
                    .map(|(y, psi)| bind_substitute(y, psi, var, by, &by_vars))
                    .unzip();
                Formula::qstruct(QStruct {
                    target: q.target.clone(),
                    x,
                    ys,
                    phi,
                    psis,
                })
            }
        }
    }

    /// Renames a bound-variable-free occurrence: `self[var := other var]`.
    pub fn rename_free(&self, var: &str, to: &str) -> Formula {
        self.substitute(var, &Term::var(to))
    }

    /// Number of nodes; used to bound random generation in tests.
    pub fn size(&self) -> usize {
        1 + self.children().iter().map(|c| c.size()).sum::<usize>()
    }

    /// Every structural-quantifier node, outermost first.
    pub fn qstruct_nodes(&self) -> Vec<&QStruct> {
        let mut out = Vec::new();
        self.walk(&mut |f| {
            if let Formula::QStruct(q) = f {
                out.push(&**q);
            }
        });
        out
    }

    /// Pre-order traversal.
    pub fn walk<'a>(&'a self, visit: &mut dyn FnMut(&'a Formula)) {
        visit(self);
        for c in self.children() {
            c.walk(visit);
        }
    }

    /// Rebuilds the formula bottom-up, letting `rewrite` replace each node
    /// after its children have been rewritten.
    pub fn try_map_bottom_up(
        &self,
        rewrite: &mut dyn FnMut(Formula) -> Result<Formula>,
    ) -> Result<Formula> {
        let rebuilt = match self {
            Formula::Atom(..) | Formula::Eq(..) => self.clone(),
            Formula::Not(f) => Formula::not(f.try_map_bottom_up(rewrite)?),
            Formula::And(fs) => Formula::And(
                fs.iter()
                    .map(|f| f.try_map_bottom_up(rewrite))
                    .collect::<Result<_>>()?,
            ),
            Formula::Or(fs) => Formula::Or(
                fs.iter()
                    .map(|f| f.try_map_bottom_up(rewrite))
                    .collect::<Result<_>>()?,
            ),
            Formula::Exists(v, f) => Formula::exists(v.clone(), f.try_map_bottom_up(rewrite)?),
            Formula::Forall(v, f) => Formula::forall(v.clone(), f.try_map_bottom_up(rewrite)?),
            Formula::QStruct(q) => Formula::qstruct(QStruct {
                target: q.target.clone(),
                x: q.x.clone(),
                ys: q.ys.clone(),
                phi: q.phi.try_map_bottom_up(rewrite)?,
                psis: q
                    .psis
                    .iter()
                    .map(|p| p.try_map_bottom_up(rewrite))
                    .collect::<Result<_>>()?,
            }),
        };
        rewrite(rebuilt)
    }
}

fn bind_substitute(
    bound: &str,
    body: &Formula,
    var: &str,
    by: &Term,
    by_vars: &BTreeSet<Var>,
) -> (Var, Formula) {
    if bound == var || !body.free_vars().contains(var) {
        return (bound.to_string(), body.clone());
    }
    if by_vars.contains(bound) {
        let mut avoid = body.all_vars();
        avoid.extend(by_vars.iter().cloned());
        avoid.insert(var.to_string());
        let fresh = fresh_var(&avoid);
        let renamed = body.substitute(bound, &Term::var(fresh.clone()));
        (fresh.clone(), renamed.substitute(var, by))
    } else {
        (bound.to_string(), body.substitute(var, by))
    }
}

/// First variable of the pool `v0, v1, …` not in `avoid`.
pub fn fresh_var(avoid: &BTreeSet<Var>) -> Var {
    (0..)
        .map(|i| format!("v{i}"))
        .find(|v| !avoid.contains(v))
        .expect("pool is infinite")
}

/// `n` distinct fresh variables.
pub fn fresh_vars(avoid: &BTreeSet<Var>, n: usize) -> Vec<Var> {
    let mut avoid = avoid.clone();
    (0..n)
        .map(|_| {
            let v = fresh_var(&avoid);
            avoid.insert(v.clone());
            v
        })
        .collect()
}

/// The cardinal parameter: a finite threshold `k` (targets have fewer than
/// `k` elements) or unbounded.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub enum Kappa {
    Finite(usize),
    #[default]
    Unbounded,
}

impl Kappa {
    pub fn finite(k: usize) -> Result<Kappa> {
        if k == 0 {
            return Err(Error::Domain("kappa must be at least 1".into()));
        }
        Ok(Kappa::Finite(k))
    }

    /// `size < κ`.
    pub fn admits(&self, size: usize) -> bool {
        match self {
            Kappa::Finite(k) => size < *k,
            Kappa::Unbounded => true,
        }
    }

    /// The predecessor `κ⁻`.
    pub fn predecessor(&self) -> Kappa {
        match self {
            Kappa::Finite(k) => Kappa::Finite(k - 1),
            Kappa::Unbounded => Kappa::Unbounded,
        }
    }
}

impl fmt::Display for Kappa {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Kappa::Finite(k) => write!(f, "{k}"),
            Kappa::Unbounded => write!(f, "unbounded"),
        }
    }
}

/// A named list of sentences over a vocabulary.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Theory {
    pub name: String,
    pub vocab: Arc<Vocabulary>,
    pub sentences: Vec<Formula>,
}

impl Theory {
    pub fn new(name: impl Into<String>, vocab: Arc<Vocabulary>, sentences: Vec<Formula>) -> Result<Theory> {
        for (i, s) in sentences.iter().enumerate() {
            let fv = s.free_vars();
            if !fv.is_empty() {
                return Err(Error::Domain(format!(
                    "theory member {i} has free variables {fv:?}"
                )));
            }
            check_formula(s, &vocab)?;
        }
        Ok(Theory {
            name: name.into(),
            vocab,
            sentences,
        })
    }

    pub fn empty(vocab: Arc<Vocabulary>) -> Theory {
        Theory {
            name: "empty".into(),
            vocab,
            sentences: Vec::new(),
        }
    }
}

/// A finite set of formulas closed under subformulas. Atomic formulas are
/// only present when they occur in a member.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Fragment {
    formulas: BTreeSet<Formula>,
}

impl Fragment {
    pub fn from_formulas(formulas: impl IntoIterator<Item = Formula>) -> Fragment {
        let mut out = BTreeSet::new();
        for f in formulas {
            add_with_subformulas(&f, &mut out);
        }
        Fragment { formulas: out }
    }

    /// Wraps a set without closing it.
    pub fn from_set_unchecked(formulas: BTreeSet<Formula>) -> Fragment {
        Fragment { formulas }
    }

    pub fn contains(&self, f: &Formula) -> bool {
        self.formulas.contains(f)
    }

    pub fn len(&self) -> usize {
        self.formulas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.formulas.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Formula> {
        self.formulas.iter()
    }

    pub fn formulas(&self) -> &BTreeSet<Formula> {
        &self.formulas
    }

    /// Every member's immediate subformulas are members.
    pub fn is_closed(&self) -> bool {
        self.formulas
            .iter()
            .all(|f| f.children().into_iter().all(|c| self.formulas.contains(c)))
    }

    pub fn qstruct_members(&self) -> impl Iterator<Item = &QStruct> {
        self.formulas.iter().filter_map(|f| match f {
            Formula::QStruct(q) => Some(&**q),
            _ => None,
        })
    }
}

fn add_with_subformulas(f: &Formula, out: &mut BTreeSet<Formula>) {
    if out.insert(f.clone()) {
        for c in f.children() {
            add_with_subformulas(c, out);
        }
    }
}

/// The smallest subformula-closed set containing the theory.
pub fn subformula_closure(t: &Theory) -> Fragment {
    Fragment::from_formulas(t.sentences.iter().cloned())
}

/// Outcome of the `∀Q^struct` shape test.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShapeReport {
    pub ok: bool,
    /// Description of the first node breaking the shape.
    pub offending: Option<String>,
}

/// A `∀`-prefix over a non-empty disjunction of structural quantifiers whose
/// bodies are quantifier-free. A single structural quantifier counts as a
/// one-element disjunction.
pub fn is_forall_qstruct(s: &Formula) -> ShapeReport {
    let fail = |msg: String| ShapeReport {
        ok: false,
        offending: Some(msg),
    };
    if !s.is_sentence() {
        return fail(format!("not a sentence: free variables {:?}", s.free_vars()));
    }
    let mut body = s;
    while let Formula::Forall(_, inner) = body {
        body = inner;
    }
    let disjuncts: Vec<&Formula> = match body {
        Formula::Or(fs) => fs.iter().collect(),
        Formula::QStruct(_) => vec![body],
        other => {
            return fail(format!(
                "expected a disjunction of qstruct nodes after the universal prefix, found {}",
                crate::print::print_formula(other)
            ))
        }
    };
    for d in disjuncts {
        let Formula::QStruct(q) = d else {
            return fail(format!(
                "disjunct is not a qstruct node: {}",
                crate::print::print_formula(d)
            ));
        };
        for body in std::iter::once(&q.phi).chain(q.psis.iter()) {
            if !body.is_quantifier_free() {
                return fail(format!(
                    "qstruct body is not quantifier-free: {}",
                    crate::print::print_formula(body)
                ));
            }
        }
    }
    ShapeReport {
        ok: true,
        offending: None,
    }
}

pub fn is_forall_qstruct_theory(t: &Theory) -> ShapeReport {
    for s in &t.sentences {
        let r = is_forall_qstruct(s);
        if !r.ok {
            return r;
        }
    }
    ShapeReport {
        ok: true,
        offending: None,
    }
}

fn check_term(t: &Term, vocab: &Vocabulary) -> Result<()> {
    match t {
        Term::Var(_) => Ok(()),
        Term::App(f, args) => {
            let sym = vocab
                .function(f)
                .ok_or_else(|| Error::Signature(format!("unknown function symbol `{f}`")))?;
            if sym.arity != args.len() {
                return Err(Error::Arity(format!(
                    "`{f}` has arity {} but is applied to {} arguments",
                    sym.arity,
                    args.len()
                )));
            }
            args.iter().try_for_each(|a| check_term(a, vocab))
        }
    }
}

/// Well-formedness against a vocabulary: symbol arities, sub-vocabularies of
/// structural-quantifier targets, normalized targets, list lengths.
pub fn check_formula(f: &Formula, vocab: &Vocabulary) -> Result<()> {
    match f {
        Formula::Atom(r, args) => {
            let sym = vocab
                .relation(r)
                .ok_or_else(|| Error::Signature(format!("unknown relation symbol `{r}`")))?;
            if sym.arity != args.len() {
                return Err(Error::Arity(format!(
                    "`{r}` has arity {} but is applied to {} arguments",
                    sym.arity,
                    args.len()
                )));
            }
            args.iter().try_for_each(|a| check_term(a, vocab))
        }
        Formula::Eq(a, b) => {
            check_term(a, vocab)?;
            check_term(b, vocab)
        }
        Formula::And(fs) | Formula::Or(fs) if fs.is_empty() => {
            Err(Error::Arity("empty conjunction or disjunction".into()))
        }
        Formula::QStruct(q) => {
            if !q.sub_vocab().is_subvocabulary_of(vocab) {
                return Err(Error::Signature(format!(
                    "qstruct target vocabulary {} is not contained in {}",
                    q.sub_vocab(),
                    vocab
                )));
            }
            if q.ys.len() != q.psis.len() || q.psis.len() != q.target.subsets.len() {
                return Err(Error::Arity("qstruct list lengths disagree".into()));
            }
            if !q.target.base.is_initial_segment() {
                return Err(Error::Domain("qstruct target is not normalized".into()));
            }
            check_formula(&q.phi, vocab)?;
            q.psis.iter().try_for_each(|p| check_formula(p, vocab))
        }
        _ => f
            .children()
            .into_iter()
            .try_for_each(|c| check_formula(c, vocab)),
    }
}

/// Audit walk: every structural-quantifier target is in canonical form.
pub fn targets_normalized(f: &Formula) -> bool {
    f.qstruct_nodes()
        .iter()
        .all(|q| normalize(&q.target) == q.target)
}
