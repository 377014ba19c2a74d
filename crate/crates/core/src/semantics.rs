//! Satisfaction, solution sets, the elementarity relations and model checking.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::Arc;

use crate::enumerate::enumerate_filtered;
use crate::error::{Error, Result};
use crate::iso::{find_isomorphism, normalize};
use crate::structure::{DecoratedStructure, Elem, Structure, Vocabulary};
use crate::syntax::{Formula, Fragment, Kappa, QStruct, Term, Theory, Var};
use crate::util::tuples;

pub type Assignment = BTreeMap<Var, Elem>;

/// Formulas with more free variables than this are not swept exhaustively.
pub const MAX_FREE_VARS: usize = 6;

const UNBOUND: Elem = Elem::MAX;

// ---------------------------------------------------------------------------
// compiled form: symbols resolved to indices, variables to slots

#[derive(Debug)]
enum CTerm {
    Var(usize),
    App(usize, Vec<CTerm>),
}

#[derive(Debug)]
enum CF {
    Atom(usize, Vec<CTerm>),
    Eq(CTerm, CTerm),
    Not(Box<CF>),
    And(Vec<CF>),
    Or(Vec<CF>),
    Exists(usize, Box<CF>),
    Forall(usize, Box<CF>),
    Q(Box<CQ>),
}

/// Structural quantifiers sharing bodies; true if any target matches.
#[derive(Debug)]
struct CQ {
    id: usize,
    sub_vocab: Arc<Vocabulary>,
    x: usize,
    ys: Vec<usize>,
    phi: CF,
    psis: Vec<CF>,
    targets: Vec<DecoratedStructure>,
}

#[derive(Default)]
struct Compiler {
    slots: BTreeMap<Var, usize>,
    groups: usize,
}

impl Compiler {
    fn slot(&mut self, v: &str) -> usize {
        let n = self.slots.len();
        *self.slots.entry(v.to_string()).or_insert(n)
    }

    fn term(&mut self, t: &Term, vocab: &Vocabulary) -> Result<CTerm> {
        Ok(match t {
            Term::Var(v) => CTerm::Var(self.slot(v)),
            Term::App(f, args) => {
                let i = vocab
                    .function_index(f)
                    .ok_or_else(|| Error::Signature(format!("function `{f}` is not in {vocab}")))?;
                if vocab.functions()[i].arity != args.len() {
                    return Err(Error::Arity(format!("`{f}` applied to {} arguments", args.len())));
                }
                CTerm::App(
                    i,
                    args.iter().map(|a| self.term(a, vocab)).collect::<Result<_>>()?,
                )
            }
        })
    }

    fn group(&mut self, qs: &[&QStruct], vocab: &Vocabulary) -> Result<CF> {
        let q = qs[0];
        if !q.sub_vocab().is_subvocabulary_of(vocab) {
            return Err(Error::Signature(format!(
                "qstruct target vocabulary {} is not contained in {}",
                q.sub_vocab(),
                vocab
            )));
        }
        let id = self.groups;
        self.groups += 1;
        Ok(CF::Q(Box::new(CQ {
            id,
            sub_vocab: q.sub_vocab().clone(),
            x: self.slot(&q.x),
            ys: q.ys.iter().map(|y| self.slot(y)).collect(),
            phi: self.formula(&q.phi, vocab)?,
            psis: q
                .psis
                .iter()
                .map(|p| self.formula(p, vocab))
                .collect::<Result<_>>()?,
            targets: qs.iter().map(|q| q.target.clone()).collect(),
        })))
    }

    fn formula(&mut self, f: &Formula, vocab: &Vocabulary) -> Result<CF> {
        Ok(match f {
            Formula::Atom(r, args) => {
                let i = vocab
                    .relation_index(r)
                    .ok_or_else(|| Error::Signature(format!("relation `{r}` is not in {vocab}")))?;
                if vocab.relations()[i].arity != args.len() {
                    return Err(Error::Arity(format!("`{r}` applied to {} arguments", args.len())));
                }
                CF::Atom(
                    i,
                    args.iter().map(|a| self.term(a, vocab)).collect::<Result<_>>()?,
                )
            }
            Formula::Eq(a, b) => CF::Eq(self.term(a, vocab)?, self.term(b, vocab)?),
            Formula::Not(g) => CF::Not(Box::new(self.formula(g, vocab)?)),
            Formula::And(fs) => {
                CF::And(fs.iter().map(|g| self.formula(g, vocab)).collect::<Result<_>>()?)
            }
            Formula::Or(fs) => {
                // runs of structural quantifiers over the same bodies share one solution structure
                let mut items = Vec::new();
                let mut i = 0;
                while i < fs.len() {
                    if let Formula::QStruct(q) = &fs[i] {
                        let mut run = vec![&**q];
                        while let Some(Formula::QStruct(next)) = fs.get(i + run.len()) {
                            if !next.same_bodies(q) {
                                break;
                            }
                            run.push(next);
                        }
                        i += run.len();
                        items.push(self.group(&run, vocab)?);
                    } else {
                        items.push(self.formula(&fs[i], vocab)?);
                        i += 1;
                    }
                }
                CF::Or(items)
            }
            Formula::Exists(v, g) => {
                let s = self.slot(v);
                CF::Exists(s, Box::new(self.formula(g, vocab)?))
            }
            Formula::Forall(v, g) => {
                let s = self.slot(v);
                CF::Forall(s, Box::new(self.formula(g, vocab)?))
            }
            Formula::QStruct(q) => self.group(&[&**q], vocab)?,
        })
    }
}

/// A formula prepared for repeated evaluation over one vocabulary.
pub struct Compiled {
    root: CF,
    slots: BTreeMap<Var, usize>,
    free: Vec<(Var, usize)>,
    groups: usize,
    vocab: Arc<Vocabulary>,
    max_target: usize,
}

impl Compiled {
    pub fn new(f: &Formula, vocab: &Arc<Vocabulary>) -> Result<Compiled> {
        let mut c = Compiler::default();
        let root = c.formula(f, vocab)?;
        let free = f
            .free_vars()
            .into_iter()
            .map(|v| {
                let s = c.slots[&v];
                (v, s)
            })
            .collect();
        let max_target = f
            .qstruct_nodes()
            .iter()
            .map(|q| q.target.size())
            .max()
            .unwrap_or(0);
        Ok(Compiled {
            root,
            slots: c.slots,
            free,
            groups: c.groups,
            vocab: vocab.clone(),
            max_target,
        })
    }

    /// Structural quantifiers with the same bodies compiled as one node, so
    /// that [`Compiled::sweep_matches`] reports which target matches.
    fn group(qs: &[&QStruct], vocab: &Arc<Vocabulary>) -> Result<Compiled> {
        let mut c = Compiler::default();
        let root = c.group(qs, vocab)?;
        let free = Formula::QStruct(Box::new(qs[0].clone()))
            .free_vars()
            .into_iter()
            .map(|v| {
                let s = c.slots[&v];
                (v, s)
            })
            .collect();
        Ok(Compiled {
            root,
            slots: c.slots,
            free,
            groups: c.groups,
            vocab: vocab.clone(),
            max_target: qs.iter().map(|q| q.target.size()).max().unwrap_or(0),
        })
    }

    pub fn free_vars(&self) -> impl Iterator<Item = &Var> {
        self.free.iter().map(|(v, _)| v)
    }

    pub fn check_kappa(&self, kappa: Kappa) -> Result<()> {
        if let Kappa::Finite(k) = kappa {
            if self.max_target >= k && self.groups > 0 {
                return Err(Error::Kappa {
                    size: self.max_target,
                    kappa: k,
                });
            }
        }
        Ok(())
    }

    fn context<'a>(&self, n: &'a Structure, kappa: Kappa) -> Result<Ctx<'a>> {
        if **n.vocab() != *self.vocab {
            return Err(Error::Signature(format!(
                "formula was prepared for {} but the structure is over {}",
                self.vocab,
                n.vocab()
            )));
        }
        self.check_kappa(kappa)?;
        Ok(Ctx {
            n,
            env: vec![UNBOUND; self.slots.len()],
            reducts: vec![None; self.groups],
            matches: HashMap::new(),
            kappa,
        })
    }

    fn bind(&self, ctx: &mut Ctx<'_>, a: &Assignment) -> Result<()> {
        for (v, s) in &self.free {
            let e = *a.get(v).ok_or_else(|| Error::Assignment(v.clone()))?;
            if !ctx.n.contains(e) {
                return Err(Error::Domain(format!("`{v}` is assigned {e}, outside the universe")));
            }
            ctx.env[*s] = e;
        }
        Ok(())
    }

    pub fn eval(&self, n: &Structure, a: &Assignment, kappa: Kappa) -> Result<bool> {
        let mut ctx = self.context(n, kappa)?;
        self.bind(&mut ctx, a)?;
        Ok(ctx.eval(&self.root))
    }

    /// Evaluates under every assignment of the free variables into `pool`
    /// (in `tuples` order) and calls `visit` with each truth value; stops
    /// early when `visit` returns false.
    fn sweep(
        &self,
        n: &Structure,
        pool: &[Elem],
        kappa: Kappa,
        mut visit: impl FnMut(&[Elem], bool) -> bool,
    ) -> Result<()> {
        let mut ctx = self.context(n, kappa)?;
        for t in tuples(pool, self.free.len()) {
            for ((_, s), e) in self.free.iter().zip(&t) {
                ctx.env[*s] = *e;
            }
            let v = ctx.eval(&self.root);
            if !visit(&t, v) {
                break;
            }
        }
        Ok(())
    }
}

impl Compiled {
    /// As `sweep`, for a compiled group, reporting the matched target.
    fn sweep_matches(
        &self,
        n: &Structure,
        pool: &[Elem],
        kappa: Kappa,
        mut visit: impl FnMut(&[Elem], Option<usize>) -> bool,
    ) -> Result<()> {
        let CF::Q(q) = &self.root else {
            return Err(Error::Internal("target sweep over a formula that is no qstruct group".into()));
        };
        let mut ctx = self.context(n, kappa)?;
        for t in tuples(pool, self.free.len()) {
            for ((_, s), e) in self.free.iter().zip(&t) {
                ctx.env[*s] = *e;
            }
            let m = ctx.match_q(q);
            if !visit(&t, m) {
                break;
            }
        }
        Ok(())
    }
}

/// Node id, solution set and side sets.
type MatchKey = (usize, BTreeSet<Elem>, Vec<BTreeSet<Elem>>);

struct Ctx<'a> {
    n: &'a Structure,
    env: Vec<Elem>,
    reducts: Vec<Option<Structure>>,
    /// The matched target depends only on the solution sets, which many
    /// assignments share.
    matches: HashMap<MatchKey, Option<usize>>,
    kappa: Kappa,
}

impl Ctx<'_> {
    fn term(&self, t: &CTerm) -> Elem {
        match t {
            CTerm::Var(s) => self.env[*s],
            CTerm::App(f, args) => {
                let vals: Vec<Elem> = args.iter().map(|a| self.term(a)).collect();
                self.n.apply(*f, &vals).expect("total function table")
            }
        }
    }

    fn eval(&mut self, f: &CF) -> bool {
        match f {
            CF::Atom(r, args) => {
                let vals: Vec<Elem> = args.iter().map(|a| self.term(a)).collect();
                self.n.holds(*r, &vals)
            }
            CF::Eq(a, b) => self.term(a) == self.term(b),
            CF::Not(g) => !self.eval(g),
            CF::And(fs) => fs.iter().all(|g| self.eval(g)),
            CF::Or(fs) => fs.iter().any(|g| self.eval(g)),
            CF::Exists(s, g) => {
                let old = self.env[*s];
                let mut out = false;
                for &e in self.n.universe() {
                    self.env[*s] = e;
                    if self.eval(g) {
                        out = true;
                        break;
                    }
                }
                self.env[*s] = old;
                out
            }
            CF::Forall(s, g) => {
                let old = self.env[*s];
                let mut out = true;
                for &e in self.n.universe() {
                    self.env[*s] = e;
                    if !self.eval(g) {
                        out = false;
                        break;
                    }
                }
                self.env[*s] = old;
                out
            }
            CF::Q(q) => self.eval_q(q),
        }
    }

    fn solutions(&mut self, slot: usize, body: &CF) -> BTreeSet<Elem> {
        let old = self.env[slot];
        let mut out = BTreeSet::new();
        for &e in self.n.universe() {
            self.env[slot] = e;
            if self.eval(body) {
                out.insert(e);
            }
        }
        self.env[slot] = old;
        out
    }

    fn eval_q(&mut self, q: &CQ) -> bool {
        self.match_q(q).is_some()
    }

    /// Index of the target matched by the decorated solution structure.
    fn match_q(&mut self, q: &CQ) -> Option<usize> {
        let set = self.solutions(q.x, &q.phi);
        if !self.kappa.admits(set.len()) || !q.targets.iter().any(|t| t.size() == set.len()) {
            return None;
        }
        // clause (a): every side solution set lies inside the main one
        let mut subsets = Vec::with_capacity(q.psis.len());
        for (y, psi) in q.ys.iter().zip(&q.psis) {
            let s = self.solutions(*y, psi);
            if !s.is_subset(&set) {
                return None;
            }
            subsets.push(s);
        }
        let key = (q.id, set, subsets);
        if let Some(m) = self.matches.get(&key) {
            return *m;
        }
        let m = self.match_solutions(q, &key.1, &key.2);
        self.matches.insert(key, m);
        m
    }

    fn match_solutions(&mut self, q: &CQ, set: &BTreeSet<Elem>, subsets: &[BTreeSet<Elem>]) -> Option<usize> {
        if self.reducts[q.id].is_none() {
            let r = self.n.reduct(&q.sub_vocab).expect("compiled against a super-vocabulary");
            self.reducts[q.id] = Some(r);
        }
        let reduct = self.reducts[q.id].as_ref().unwrap();
        // clause (b): the solution set must carry a substructure
        if (set.is_empty() && reduct.vocab().has_constants()) || !reduct.is_function_closed(set) {
            return None;
        }
        let found = DecoratedStructure {
            base: reduct.restrict_unchecked(set),
            subsets: subsets.to_vec(),
        };
        let candidates: Vec<usize> = (0..q.targets.len())
            .filter(|i| same_counts(&found, &q.targets[*i]))
            .collect();
        match candidates[..] {
            [] => None,
            [i] => matches!(
                find_isomorphism(&found, &q.targets[i], &BTreeMap::new()),
                Ok(Some(_))
            )
            .then_some(i),
            _ => {
                // targets are distinct canonical forms
                let canon = normalize(&found);
                candidates.into_iter().find(|i| q.targets[*i] == canon)
            }
        }
    }
}

fn same_counts(a: &DecoratedStructure, b: &DecoratedStructure) -> bool {
    a.size() == b.size()
        && a.subsets.len() == b.subsets.len()
        && a.subsets.iter().zip(&b.subsets).all(|(x, y)| x.len() == y.len())
        && (0..a.base.vocab().relations().len())
            .all(|r| a.base.relation_tuples(r).len() == b.base.relation_tuples(r).len())
}

// ---------------------------------------------------------------------------
// public entry points

/// `N ⊨ φ[a]`.
pub fn eval(n: &Structure, f: &Formula, a: &Assignment, kappa: Kappa) -> Result<bool> {
    Compiled::new(f, n.vocab())?.eval(n, a, kappa)
}

/// `φ(N, a)` as a set of values of `x`.
pub fn solution_set(
    n: &Structure,
    f: &Formula,
    x: &str,
    a: &Assignment,
    kappa: Kappa,
) -> Result<BTreeSet<Elem>> {
    let c = Compiled::new(f, n.vocab())?;
    let mut ctx = c.context(n, kappa)?;
    for (v, s) in &c.free {
        if v == x {
            continue;
        }
        let e = *a.get(v).ok_or_else(|| Error::Assignment(v.clone()))?;
        ctx.env[*s] = e;
    }
    match c.slots.get(x) {
        Some(&s) => Ok(ctx.solutions(s, &c.root)),
        // x does not occur: all or nothing
        None => Ok(if ctx.eval(&c.root) {
            n.universe().iter().copied().collect()
        } else {
            BTreeSet::new()
        }),
    }
}

pub fn models(n: &Structure, t: &Theory, kappa: Kappa) -> Result<bool> {
    CompiledTheory::new(t)?.models(n, kappa)
}

/// A theory prepared for repeated model checking.
pub struct CompiledTheory {
    vocab: Arc<Vocabulary>,
    sentences: Vec<Compiled>,
}

impl CompiledTheory {
    pub fn new(t: &Theory) -> Result<CompiledTheory> {
        Ok(CompiledTheory {
            vocab: t.vocab.clone(),
            sentences: t
                .sentences
                .iter()
                .map(|s| Compiled::new(s, &t.vocab))
                .collect::<Result<_>>()?,
        })
    }

    pub fn vocab(&self) -> &Arc<Vocabulary> {
        &self.vocab
    }

    pub fn models(&self, n: &Structure, kappa: Kappa) -> Result<bool> {
        for s in &self.sentences {
            if !s.eval(n, &Assignment::new(), kappa)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Index of the first sentence `n` fails.
    pub fn first_failure(&self, n: &Structure, kappa: Kappa) -> Result<Option<usize>> {
        for (i, s) in self.sentences.iter().enumerate() {
            if !s.eval(n, &Assignment::new(), kappa)? {
                return Ok(Some(i));
            }
        }
        Ok(None)
    }
}

/// Models of `t` over `t`'s vocabulary with at most `max_size` elements.
pub fn enumerate_models(
    t: &Theory,
    max_size: usize,
    kappa: Kappa,
    up_to_iso: bool,
    cap: usize,
) -> Result<Vec<Structure>> {
    let c = CompiledTheory::new(t)?;
    enumerate_filtered(&t.vocab, max_size, up_to_iso, cap, &mut |s| c.models(s, kappa))
}

// ---------------------------------------------------------------------------
// elementarity

/// Outcome of an elementarity check, with a witness on failure.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ElemOutcome {
    Holds,
    /// The first structure is not a substructure of the second.
    NotSubstructure,
    /// Truth of `formula` differs under `assignment`.
    TruthDiffers {
        formula: Formula,
        assignment: Assignment,
    },
    /// A small solution set of a structural quantifier in the fragment
    /// differs between the two structures.
    SolutionsDiffer {
        formula: Formula,
        assignment: Assignment,
    },
}

impl ElemOutcome {
    pub fn holds(&self) -> bool {
        matches!(self, ElemOutcome::Holds)
    }
}

struct Member {
    formula: Formula,
    compiled: Compiled,
}

/// Structural quantifiers of the fragment sharing bodies. Member `i` holds
/// exactly when the solution structure matches target `i`.
struct Group {
    formulas: Vec<Formula>,
    compiled: Compiled,
    params: Vec<Var>,
    /// One compiled body per solution set: `phi` first, then the `psis`.
    bodies: Vec<(Compiled, Var)>,
}

/// A fragment prepared for repeated `≼_F` / `≼*_F` checks over one vocabulary.
pub struct FragmentChecker {
    vocab: Arc<Vocabulary>,
    kappa: Kappa,
    members: Vec<Member>,
    groups: Vec<Group>,
}

impl FragmentChecker {
    pub fn new(frag: &Fragment, vocab: &Arc<Vocabulary>, kappa: Kappa) -> Result<FragmentChecker> {
        let mut members = Vec::new();
        let mut runs: Vec<Vec<&QStruct>> = Vec::new();
        for f in frag.iter() {
            // substructures preserve quantifier-free formulas
            if f.is_quantifier_free() {
                continue;
            }
            let fv = f.free_vars();
            if fv.len() > MAX_FREE_VARS {
                return Err(Error::capacity(
                    format!(
                        "assignment sweep over {} free variables of {}",
                        fv.len(),
                        crate::print::print_formula(f)
                    ),
                    0,
                    MAX_FREE_VARS,
                ));
            }
            if let Formula::QStruct(q) = f {
                match runs.iter_mut().find(|r| r[0].same_bodies(q)) {
                    Some(r) => r.push(q),
                    None => runs.push(vec![q]),
                }
                continue;
            }
            let compiled = Compiled::new(f, vocab)?;
            compiled.check_kappa(kappa)?;
            members.push(Member {
                formula: f.clone(),
                compiled,
            });
        }
        let mut groups = Vec::new();
        for run in runs {
            let q = run[0];
            let compiled = Compiled::group(&run, vocab)?;
            compiled.check_kappa(kappa)?;
            let mut bodies = vec![(Compiled::new(&q.phi, vocab)?, q.x.clone())];
            for (y, psi) in q.ys.iter().zip(&q.psis) {
                bodies.push((Compiled::new(psi, vocab)?, y.clone()));
            }
            groups.push(Group {
                formulas: run.iter().map(|q| Formula::QStruct(Box::new((*q).clone()))).collect(),
                params: compiled.free_vars().cloned().collect(),
                compiled,
                bodies,
            });
        }
        Ok(FragmentChecker {
            vocab: vocab.clone(),
            kappa,
            members,
            groups,
        })
    }

    /// `≼_F` with nothing to check.
    pub fn trivial(vocab: &Arc<Vocabulary>, kappa: Kappa) -> FragmentChecker {
        FragmentChecker {
            vocab: vocab.clone(),
            kappa,
            members: Vec::new(),
            groups: Vec::new(),
        }
    }

    pub fn kappa(&self) -> Kappa {
        self.kappa
    }

    fn check_vocab(&self, n: &Structure) -> Result<()> {
        if **n.vocab() != *self.vocab {
            return Err(Error::Signature(format!(
                "fragment is over {} but the structure is over {}",
                self.vocab,
                n.vocab()
            )));
        }
        Ok(())
    }

    /// `n1 ≼_F n2`.
    pub fn elem(&self, n1: &Structure, n2: &Structure) -> Result<ElemOutcome> {
        self.check_vocab(n1)?;
        self.check_vocab(n2)?;
        if !n1.is_substructure_of(n2) {
            return Ok(ElemOutcome::NotSubstructure);
        }
        for m in &self.members {
            let mut first = Vec::new();
            m.compiled
                .sweep(n1, n1.universe(), self.kappa, |_, v| {
                    first.push(v);
                    true
                })?;
            let mut witness = None;
            let mut i = 0;
            m.compiled
                .sweep(n2, n1.universe(), self.kappa, |t, v| {
                    let same = first[i] == v;
                    i += 1;
                    if !same {
                        witness = Some(t.to_vec());
                    }
                    same
                })?;
            if let Some(t) = witness {
                return Ok(ElemOutcome::TruthDiffers {
                    formula: m.formula.clone(),
                    assignment: m.compiled.free_vars().cloned().zip(t).collect(),
                });
            }
        }
        for g in &self.groups {
            let mut first = Vec::new();
            g.compiled.sweep_matches(n1, n1.universe(), self.kappa, |_, m| {
                first.push(m);
                true
            })?;
            let mut witness = None;
            let mut i = 0;
            g.compiled.sweep_matches(n2, n1.universe(), self.kappa, |t, m| {
                let before = first[i];
                i += 1;
                match before.or(m) {
                    Some(k) if before != m => {
                        witness = Some((t.to_vec(), k));
                        false
                    }
                    _ => true,
                }
            })?;
            if let Some((t, k)) = witness {
                return Ok(ElemOutcome::TruthDiffers {
                    formula: g.formulas[k].clone(),
                    assignment: g.params.iter().cloned().zip(t).collect(),
                });
            }
        }
        Ok(ElemOutcome::Holds)
    }

    /// `n1 ≼*_F n2`.
    pub fn elem_star(&self, n1: &Structure, n2: &Structure) -> Result<ElemOutcome> {
        let base = self.elem(n1, n2)?;
        if !base.holds() {
            return Ok(base);
        }
        for m in &self.groups {
            for t in tuples(n1.universe(), m.params.len()) {
                let a: Assignment = m.params.iter().cloned().zip(t.iter().copied()).collect();
                let (phi, x) = &m.bodies[0];
                let s1 = solutions_of(phi, x, n1, &a, self.kappa)?;
                if !self.kappa.admits(s1.len()) {
                    continue;
                }
                let mut differs = solutions_of(phi, x, n2, &a, self.kappa)? != s1;
                for (psi, y) in &m.bodies[1..] {
                    if differs {
                        break;
                    }
                    differs = solutions_of(psi, y, n1, &a, self.kappa)?
                        != solutions_of(psi, y, n2, &a, self.kappa)?;
                }
                if differs {
                    return Ok(ElemOutcome::SolutionsDiffer {
                        formula: m.formulas[0].clone(),
                        assignment: a,
                    });
                }
            }
        }
        Ok(ElemOutcome::Holds)
    }
}

fn solutions_of(
    c: &Compiled,
    x: &str,
    n: &Structure,
    a: &Assignment,
    kappa: Kappa,
) -> Result<BTreeSet<Elem>> {
    let mut ctx = c.context(n, kappa)?;
    for (v, s) in &c.free {
        if v != x {
            ctx.env[*s] = *a.get(v).ok_or_else(|| Error::Assignment(v.clone()))?;
        }
    }
    Ok(match c.slots.get(x) {
        Some(&s) => ctx.solutions(s, &c.root),
        None if ctx.eval(&c.root) => n.universe().iter().copied().collect(),
        None => BTreeSet::new(),
    })
}

pub fn elem_f(n1: &Structure, n2: &Structure, frag: &Fragment, kappa: Kappa) -> Result<bool> {
    Ok(FragmentChecker::new(frag, n2.vocab(), kappa)?.elem(n1, n2)?.holds())
}

pub fn elem_f_star(n1: &Structure, n2: &Structure, frag: &Fragment, kappa: Kappa) -> Result<bool> {
    Ok(FragmentChecker::new(frag, n2.vocab(), kappa)?
        .elem_star(n1, n2)?
        .holds())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_formula;

    fn order() -> Arc<Vocabulary> {
        Arc::new(Vocabulary::relational(&[("<", 2)]).unwrap())
    }

    fn chain(n: usize) -> Structure {
        let mut b = Structure::builder(order(), 0..n);
        for i in 0..n {
            for j in i + 1..n {
                b = b.tuple("<", &[i, j]);
            }
        }
        b.build().unwrap()
    }

    fn chain_target(n: usize) -> String {
        let mut s = format!("(structure (vocab (rel < 2)) (universe {n})");
        if n > 1 {
            s.push_str(" (rel <");
            for i in 0..n {
                for j in i + 1..n {
                    s.push_str(&format!(" ({i} {j})"));
                }
            }
            s.push(')');
        }
        s.push(')');
        s
    }

    fn assign(pairs: &[(&str, Elem)]) -> Assignment {
        pairs.iter().map(|(v, e)| (v.to_string(), *e)).collect()
    }

    #[test]
    fn predecessors_of_the_top_form_a_two_chain() {
        let f = parse_formula(&format!("(qstruct {} y (rel < y x))", chain_target(2))).unwrap();
        assert!(eval(&chain(3), &f, &assign(&[("x", 2)]), Kappa::Unbounded).unwrap());
        assert!(!eval(&chain(3), &f, &assign(&[("x", 1)]), Kappa::Unbounded).unwrap());
    }

    #[test]
    fn empty_target_detects_the_empty_structure() {
        let f = parse_formula("(qstruct (structure (universe 0)) x (= x x))").unwrap();
        let empty = Structure::builder(order(), 0..0).build().unwrap();
        assert!(eval(&empty, &f, &Assignment::new(), Kappa::Unbounded).unwrap());
        assert!(!eval(&chain(1), &f, &Assignment::new(), Kappa::Unbounded).unwrap());
    }

    #[test]
    fn at_least_two_encoding() {
        let f = parse_formula(
            "(and (not (qstruct (structure (universe 0)) x (= x x))) \
                  (not (qstruct (structure (universe 1)) x (= x x))))",
        )
        .unwrap();
        assert!(eval(&chain(3), &f, &Assignment::new(), Kappa::Unbounded).unwrap());
        assert!(!eval(&chain(1), &f, &Assignment::new(), Kappa::Unbounded).unwrap());
    }

    #[test]
    fn non_closed_solution_sets_carry_no_substructure() {
        let v = Arc::new(
            Vocabulary::new(
                vec![crate::structure::Symbol::new("<", 2)],
                vec![crate::structure::Symbol::new("f", 1)],
            )
            .unwrap(),
        );
        let n = Structure::builder(v, 0..2)
            .tuple("<", &[0, 1])
            .map("f", &[0], 1)
            .map("f", &[1], 1)
            .build()
            .unwrap();
        // {0} is not closed under f, and the target keeps f
        let f = parse_formula(
            "(qstruct (structure (vocab (fun f 1)) (universe 1) (fun f (0 0))) x (= x y))",
        )
        .unwrap();
        assert!(!eval(&n, &f, &assign(&[("y", 0)]), Kappa::Unbounded).unwrap());
        assert!(eval(&n, &f, &assign(&[("y", 1)]), Kappa::Unbounded).unwrap());
        // without f in the target vocabulary the singleton {0} qualifies
        let g = parse_formula("(qstruct (structure (universe 1)) x (= x y))").unwrap();
        assert!(eval(&n, &g, &assign(&[("y", 0)]), Kappa::Unbounded).unwrap());
    }

    #[test]
    fn assignment_and_kappa_errors() {
        let f = parse_formula(&format!("(qstruct {} y (rel < y x))", chain_target(2))).unwrap();
        assert_eq!(
            eval(&chain(3), &f, &Assignment::new(), Kappa::Unbounded),
            Err(Error::Assignment("x".into()))
        );
        assert!(matches!(
            eval(&chain(3), &f, &assign(&[("x", 2)]), Kappa::Finite(2)),
            Err(Error::Kappa { size: 2, kappa: 2 })
        ));
        assert!(eval(&chain(3), &f, &assign(&[("x", 2)]), Kappa::Finite(3)).unwrap());
    }

    #[test]
    fn solution_sets() {
        let f = Formula::atom_vars("<", &["y", "x"]);
        assert_eq!(
            solution_set(&chain(3), &f, "y", &assign(&[("x", 2)]), Kappa::Unbounded).unwrap(),
            BTreeSet::from([0, 1])
        );
        let all = Formula::eq_vars("x", "x");
        assert_eq!(
            solution_set(&chain(3), &all, "x", &Assignment::new(), Kappa::Unbounded).unwrap(),
            BTreeSet::from([0, 1, 2])
        );
    }

    #[test]
    fn elementarity_with_a_predecessor_formula() {
        let ex = parse_formula("(exists y (rel < y x))").unwrap();
        let frag = Fragment::from_formulas([ex]);
        let two = chain(2);
        let bottom = two.induced(&BTreeSet::from([0])).unwrap().unwrap();
        let top = two.induced(&BTreeSet::from([1])).unwrap().unwrap();
        assert!(elem_f(&bottom, &two, &frag, Kappa::Unbounded).unwrap());
        assert!(!elem_f(&top, &two, &frag, Kappa::Unbounded).unwrap());
        assert!(elem_f(&two, &two, &frag, Kappa::Unbounded).unwrap());
        let checker = FragmentChecker::new(&frag, two.vocab(), Kappa::Unbounded).unwrap();
        assert_eq!(checker.elem(&two, &bottom).unwrap(), ElemOutcome::NotSubstructure);
    }

    #[test]
    fn starred_elementarity_freezes_predecessor_sets() {
        let disj: Vec<String> = (0..3)
            .map(|n| format!("(qstruct {} y (rel < y x))", chain_target(n)))
            .collect();
        let s = parse_formula(&format!("(forall x (or {}))", disj.join(" "))).unwrap();
        let frag = Fragment::from_formulas([s]);
        let three = chain(3);
        let low = three.induced(&BTreeSet::from([0, 1])).unwrap().unwrap();
        let gap = three.induced(&BTreeSet::from([0, 2])).unwrap().unwrap();
        assert!(elem_f_star(&low, &three, &frag, Kappa::Unbounded).unwrap());
        assert!(!elem_f_star(&gap, &three, &frag, Kappa::Unbounded).unwrap());
        assert!(elem_f_star(&three, &three, &frag, Kappa::Unbounded).unwrap());
    }

    #[test]
    fn too_many_free_variables() {
        let v = Arc::new(Vocabulary::relational(&[("R", 7)]).unwrap());
        let g = parse_formula("(exists a (and (rel R a b c d e f g) (rel R h b c d e f g)))").unwrap();
        let frag = Fragment::from_formulas([g]);
        assert!(matches!(
            FragmentChecker::new(&frag, &v, Kappa::Unbounded),
            Err(Error::Capacity { .. })
        ));
    }

    #[test]
    fn contradictory_pair_has_no_models() {
        let t = Theory::new(
            "empty",
            order(),
            vec![
                parse_formula("(qstruct (structure (universe 0)) x (= x x))").unwrap(),
                parse_formula("(qstruct (structure (universe 1)) x (not (= x x)))").unwrap(),
            ],
        )
        .unwrap();
        assert!(enumerate_models(&t, 3, Kappa::Unbounded, true, 1_000_000)
            .unwrap()
            .is_empty());
    }
}
