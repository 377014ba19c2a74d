//! From a class with intersections to a `∀Q^struct` theory: the expansion by
//! closure relations, the emitted theory and its verification, universal
//! classes, and the expansion by Galois types.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use rayon::prelude::*;

use crate::class::{Caps, ModelClass};
use crate::closure::{cl, enumerate_dk, galois_key, verify_intersections, PointedModel};
use crate::enumerate::enumerate_structures;
use crate::error::{Error, Result};
use crate::iso::{canonical_form, normalize};
use crate::print::{print_formula, print_structure};
use crate::report::{Check, VerificationReport, Witness};
use crate::semantics::{CompiledTheory, FragmentChecker};
use crate::structure::{DecoratedStructure, Elem, Structure, Symbol, Vocabulary};
use crate::syntax::{subformula_closure, Formula, Kappa, QStruct, Term, Theory, Var};
use crate::translate::{atomic_diagram, univ_gen_rewrite};
use crate::util::{subsets, tuples};

/// `{prefix}0, {prefix}1, …`, with underscores appended to the prefix until
/// no name clashes with `vocab`.
fn fresh_family(vocab: &Vocabulary, prefix: &str, count: usize) -> Vec<String> {
    let mut prefix = prefix.to_string();
    loop {
        let names: Vec<String> = (0..count).map(|n| format!("{prefix}{n}")).collect();
        if names.iter().all(|n| !vocab.has_symbol(n)) {
            return names;
        }
        prefix.push('_');
    }
}

fn vars(prefix: &str, n: usize) -> Vec<Var> {
    (0..n).map(|i| format!("{prefix}{i}")).collect()
}

fn disj(mut fs: Vec<Formula>) -> Formula {
    match fs.len() {
        1 => fs.pop().expect("one disjunct"),
        _ => Formula::or(fs),
    }
}

fn conj(mut fs: Vec<Formula>) -> Formula {
    match fs.len() {
        1 => fs.pop().expect("one conjunct"),
        _ => Formula::and(fs),
    }
}

/// Rebuilds `s` with one relation tuple toggled.
fn flip(s: &Structure, rel: usize, t: &[Elem]) -> Result<Structure> {
    let vocab = s.vocab();
    let mut rels: Vec<BTreeSet<Vec<Elem>>> = (0..vocab.relations().len())
        .map(|r| s.relation_tuples(r).clone())
        .collect();
    if !rels[rel].remove(t) {
        rels[rel].insert(t.to_vec());
    }
    let funs = (0..vocab.functions().len())
        .map(|f| s.function_table(f).clone())
        .collect();
    Structure::new(vocab.clone(), s.universe().to_vec(), rels, funs)
}

// ---------------------------------------------------------------------------
// closure relations

/// The vocabulary `τ⁺ = τ ∪ {E_n : n < arity_cap}`, `E_n` of arity `n + 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClosureCoding {
    pub base: Arc<Vocabulary>,
    pub vocab: Arc<Vocabulary>,
    /// `relations[n]` is the name of `E_n`.
    pub relations: Vec<String>,
}

impl ClosureCoding {
    pub fn new(base: &Arc<Vocabulary>, arity_cap: usize) -> Result<ClosureCoding> {
        let relations = fresh_family(base, "E", arity_cap);
        let mut symbols = base.relations().to_vec();
        symbols.extend(
            relations
                .iter()
                .enumerate()
                .map(|(n, r)| Symbol::new(r.clone(), n + 1)),
        );
        let vocab = Vocabulary::new(symbols, base.functions().to_vec())?;
        Ok(ClosureCoding {
            base: base.clone(),
            vocab: Arc::new(vocab),
            relations,
        })
    }

    pub fn arity_cap(&self) -> usize {
        self.relations.len()
    }

    /// `N⁺`: `E_n(a, b)` iff `ℓ(b) = n` and `a ∈ cl^N(b)`. `n` must be a member.
    pub fn expand(&self, class: &ModelClass, n: &Structure) -> Result<Structure> {
        let mut closures: BTreeMap<BTreeSet<Elem>, BTreeSet<Elem>> = BTreeMap::new();
        let mut extra = BTreeMap::new();
        for (len, name) in self.relations.iter().enumerate() {
            let mut ts = BTreeSet::new();
            for b in tuples(n.universe(), len) {
                let key: BTreeSet<Elem> = b.iter().copied().collect();
                if !closures.contains_key(&key) {
                    let c = cl(class, n, &key)?.universe();
                    closures.insert(key.clone(), c);
                }
                for a in &closures[&key] {
                    let mut t = Vec::with_capacity(len + 1);
                    t.push(*a);
                    t.extend_from_slice(&b);
                    ts.insert(t);
                }
            }
            extra.insert(name.clone(), ts);
        }
        n.expand(self.vocab.clone(), &extra, &BTreeMap::new())
    }

    /// The atom `E_n(x, b)`.
    pub fn atom(&self, x: &str, b: &[Var]) -> Formula {
        let mut args = vec![Term::var(x)];
        args.extend(b.iter().map(|v| Term::var(v.clone())));
        Formula::atom(self.relations[b.len()].clone(), args)
    }
}

/// The members within the size cap, each with its expansion by closure
/// relations.
#[derive(Clone, Debug)]
pub struct ExpansionMap {
    pub class_name: String,
    pub coding: ClosureCoding,
    /// `(N, N⁺)`, one per isomorphism type.
    pub members: Vec<(Structure, Structure)>,
}

fn require_intersections(class: &ModelClass, caps: &Caps) -> Result<()> {
    let report = verify_intersections(class, caps)?;
    if report.passed() {
        return Ok(());
    }
    let detail = report
        .check("intersections")
        .and_then(|c| c.witnesses.first())
        .map(|w| format!("{} ({}, A = {:?})", w.note, w.structures.join(", "), w.elements))
        .unwrap_or_default();
    Err(Error::IntersectionFailure(detail))
}

/// Expands every member within the caps. Refuses classes whose closures are
/// not strong submodels.
pub fn functorial_expansion(class: &ModelClass, arity_cap: usize, caps: &Caps) -> Result<ExpansionMap> {
    require_intersections(class, caps)?;
    let coding = ClosureCoding::new(class.vocab(), arity_cap)?;
    let reps = class.members_up_to(caps.max_size, caps.candidates)?;
    let members = reps
        .par_iter()
        .map(|n| Ok((n.clone(), coding.expand(class, n)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(ExpansionMap {
        class_name: class.spec().name().to_string(),
        coding,
        members,
    })
}

/// Reducts give back the members, strong submodels expand to substructures,
/// and expansion commutes with relabeling.
pub fn check_functoriality(class: &ModelClass, map: &ExpansionMap, caps: &Caps) -> Result<VerificationReport> {
    type Found = [(usize, Vec<Witness>); 3];
    let per: Vec<Found> = map
        .members
        .par_iter()
        .map(|(n, np)| -> Result<Found> {
            let mut reduct = Vec::new();
            if np.reduct(class.vocab())? != *n {
                reduct.push(Witness::new("reduct of the expansion is not the member", &[n, np]));
            }
            let mut order = (0, Vec::new());
            for m in class.strong_submodels(n)? {
                order.0 += 1;
                let mp = map.coding.expand(class, &m)?;
                if !mp.is_substructure_of(np) {
                    order.1.push(Witness::new(
                        "expansion of a strong submodel is not a substructure of the expansion",
                        &[&mp, np],
                    ));
                }
            }
            let shift: BTreeMap<Elem, Elem> = n
                .universe()
                .iter()
                .rev()
                .zip(n.universe())
                .map(|(a, b)| (*a, *b + 100))
                .collect();
            let mut iso = Vec::new();
            if map.coding.expand(class, &n.relabel(&shift)?)? != np.relabel(&shift)? {
                iso.push(Witness::new("expansion does not commute with relabeling", &[n]));
            }
            Ok([(1, reduct), order, (1, iso)])
        })
        .collect::<Result<_>>()?;
    let mut report = caps.record(VerificationReport::new(format!(
        "expand `{}`",
        map.class_name
    )));
    report.count("members", map.members.len());
    for (i, name) in ["expansion-reduct", "expansion-order", "expansion-isomorphism"]
        .iter()
        .enumerate()
    {
        report.push(Check::from_witnesses(
            *name,
            per.iter().map(|p| p[i].0).sum(),
            per.iter().flat_map(|p| p[i].1.clone()).collect(),
        ));
    }
    Ok(report)
}

// ---------------------------------------------------------------------------
// emission

/// Per tuple-length pair `(ℓ(a), ℓ(b))`, the decorated types
/// `(cl(ab)⁺, |cl(a)|)` realized in members within the caps.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PairCatalog {
    pub entries: BTreeMap<(usize, usize), Vec<DecoratedStructure>>,
}

impl PairCatalog {
    pub fn total(&self) -> usize {
        self.entries.values().map(Vec::len).sum()
    }
}

/// An emitted theory with what is needed to check it.
#[derive(Clone, Debug)]
pub struct Presentation {
    pub class_name: String,
    pub theory: Theory,
    pub catalog: PairCatalog,
    /// Index in `theory.sentences` of the sentence for each length pair.
    pub pair_sentences: BTreeMap<(usize, usize), usize>,
    pub coding: ClosureCoding,
    pub pair_cap: usize,
    /// Threshold for the emitted targets: one above the size cap.
    pub kappa: Kappa,
}

/// The theory whose models (within the caps) are the expanded members:
/// `E_ℓ(z_k, z)` for every tuple length `ℓ < arity_cap`, and for every
/// `m + k ≤ pair_cap` the disjunction over the catalog for `(m, k)` of
/// `Q^struct_{M2, |M1|} x y E_{m+k}(x z w) E_m(y z)`.
pub fn emit_aq_theory(
    class: &ModelClass,
    map: &ExpansionMap,
    pair_cap: usize,
    caps: &Caps,
) -> Result<Presentation> {
    let coding = &map.coding;
    if pair_cap >= coding.arity_cap() {
        return Err(Error::Emission(format!(
            "pair cap {pair_cap} needs closure relations up to arity {}, but the arity cap is {}",
            pair_cap + 1,
            coding.arity_cap()
        )));
    }
    let kappa = Kappa::finite(caps.max_size + 1)?;
    let name = format!("{}-presentation", map.class_name);
    if map.members.is_empty() {
        let x = || "x".to_string();
        let sentences = vec![
            Formula::qstruct(QStruct::simple(Structure::bare(0), x(), Formula::eq_vars("x", "x"))),
            Formula::qstruct(QStruct::simple(
                Structure::bare(1),
                x(),
                Formula::not(Formula::eq_vars("x", "x")),
            )),
        ];
        return Ok(Presentation {
            class_name: map.class_name.clone(),
            theory: Theory::new(name, coding.vocab.clone(), sentences)?,
            catalog: PairCatalog::default(),
            pair_sentences: BTreeMap::new(),
            coding: coding.clone(),
            pair_cap,
            kappa,
        });
    }

    let mut sentences = Vec::new();
    for len in 1..coding.arity_cap() {
        let z = vars("z", len);
        for k in 0..len {
            let s = Formula::forall_many(&z, coding.atom(&z[k], &z));
            sentences.push(univ_gen_rewrite(&s)?);
        }
    }

    let mut catalog = PairCatalog::default();
    let mut pair_sentences = BTreeMap::new();
    for total in 0..=pair_cap {
        let reps = enumerate_dk(class, total, caps)?;
        let expanded: BTreeMap<&Structure, Structure> = reps
            .iter()
            .map(|p| &p.model)
            .collect::<BTreeSet<_>>()
            .into_par_iter()
            .map(|m| Ok((m, coding.expand(class, m)?)))
            .collect::<Result<_>>()?;
        for m in 0..=total {
            let mut entries = BTreeSet::new();
            for p in &reps {
                let a: BTreeSet<Elem> = p.tuple[..m].iter().copied().collect();
                let m1 = cl(class, &p.model, &a)?.universe();
                entries.insert(normalize(&DecoratedStructure::new(
                    expanded[&p.model].clone(),
                    vec![m1],
                )?));
            }
            if entries.is_empty() {
                return Err(Error::Emission(format!(
                    "no realized closure pair for tuple lengths ({m}, {}) within size {}",
                    total - m,
                    caps.max_size
                )));
            }
            let entries: Vec<DecoratedStructure> = entries.into_iter().collect();
            let z = vars("z", m);
            let w = vars("w", total - m);
            let zw: Vec<Var> = z.iter().chain(&w).cloned().collect();
            let phi = coding.atom("x", &zw);
            let psi = coding.atom("y", &z);
            let disjuncts = entries
                .iter()
                .map(|t| {
                    QStruct::new(t.clone(), "x", vec!["y".into()], phi.clone(), vec![psi.clone()])
                        .map(Formula::qstruct)
                })
                .collect::<Result<Vec<_>>>()?;
            pair_sentences.insert((m, total - m), sentences.len());
            sentences.push(Formula::forall_many(&zw, disj(disjuncts)));
            catalog.entries.insert((m, total - m), entries);
        }
    }
    Ok(Presentation {
        class_name: map.class_name.clone(),
        theory: Theory::new(name, coding.vocab.clone(), sentences)?,
        catalog,
        pair_sentences,
        coding: coding.clone(),
        pair_cap,
        kappa,
    })
}

/// Members of size at most this get every one-tuple mutation tried as a
/// candidate model in the membership check.
pub const MUTATION_SIZE: usize = 3;

/// The four round-trip checks within the caps:
/// `members-model-theory`, `order-implies-star`, `models-are-members`,
/// `star-matches-order`.
pub fn verify_presentation(class: &ModelClass, pres: &Presentation, caps: &Caps) -> Result<VerificationReport> {
    if pres.pair_cap < caps.max_size {
        return Err(Error::capacity(
            "membership check needs tuples enumerating whole models",
            pres.pair_cap,
            caps.max_size,
        ));
    }
    let coding = &pres.coding;
    let theory = CompiledTheory::new(&pres.theory)?;
    let checker = FragmentChecker::new(&subformula_closure(&pres.theory), &coding.vocab, pres.kappa)?;
    let reps = class.members_up_to(caps.max_size, caps.candidates)?;
    let expanded: Vec<(Structure, Structure)> = reps
        .par_iter()
        .map(|n| Ok((n.clone(), coding.expand(class, n)?)))
        .collect::<Result<_>>()?;
    let mut report = caps
        .record(VerificationReport::new(format!(
            "roundtrip `{}`",
            pres.class_name
        )))
        .cap("arity-cap", coding.arity_cap())
        .cap("pair-cap", pres.pair_cap);
    report.count("members", reps.len());
    report.count("sentences", pres.theory.sentences.len());
    report.count("catalog-entries", pres.catalog.total());

    // (1) expanded members are models
    let found: Vec<Witness> = expanded
        .par_iter()
        .map(|(_, np)| -> Result<Option<Witness>> {
            Ok(theory.first_failure(np, pres.kappa)?.map(|i| {
                Witness::new(
                    format!(
                        "expanded member fails sentence {i}: {}",
                        print_formula(&pres.theory.sentences[i])
                    ),
                    &[np],
                )
            }))
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    report.push(Check::from_witnesses("members-model-theory", expanded.len(), found));

    // (2) strong submodels expand to ≼*_F-substructures
    let per: Vec<(usize, Vec<Witness>)> = expanded
        .par_iter()
        .map(|(n, np)| -> Result<(usize, Vec<Witness>)> {
            let mut out = (0, Vec::new());
            for m in class.strong_submodels(n)? {
                out.0 += 1;
                let mp = coding.expand(class, &m)?;
                let verdict = checker.elem_star(&mp, np)?;
                if !verdict.holds() {
                    out.1.push(Witness::new(
                        format!("strong submodel is not a star-elementary substructure: {verdict:?}"),
                        &[&mp, np],
                    ));
                }
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    report.push(Check::from_witnesses(
        "order-implies-star",
        per.iter().map(|p| p.0).sum(),
        per.into_iter().flat_map(|p| p.1).collect(),
    ));

    // (3) models of the theory are expanded members
    report.push(models_are_members(class, pres, &theory, &expanded)?);

    // (4) ≼*_F between models agrees with the class order
    let per: Vec<(usize, Vec<Witness>)> = expanded
        .par_iter()
        .map(|(n, np)| -> Result<(usize, Vec<Witness>)> {
            let mut out = (0, Vec::new());
            for u in subsets(np.universe()) {
                let Some(yp) = np.induced(&u)? else { continue };
                if !theory.models(&yp, pres.kappa)? {
                    continue;
                }
                out.0 += 1;
                let y = yp.reduct(class.vocab())?;
                let in_order = class.contains(&y)? && class.leq(&y, n)?;
                let star = checker.elem_star(&yp, np)?.holds();
                if in_order != star {
                    out.1.push(Witness::new(
                        format!("class order says {in_order}, star elementarity says {star}"),
                        &[&yp, np],
                    ));
                }
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    report.push(Check::from_witnesses(
        "star-matches-order",
        per.iter().map(|p| p.0).sum(),
        per.into_iter().flat_map(|p| p.1).collect(),
    ));
    Ok(report)
}

fn models_are_members(
    class: &ModelClass,
    pres: &Presentation,
    theory: &CompiledTheory,
    expanded: &[(Structure, Structure)],
) -> Result<Check> {
    let coding = &pres.coding;
    let mut found = Vec::new();
    let mut instances = 0;

    // every catalog target is an expanded member over a strong pair
    for entries in pres.catalog.entries.values() {
        for t in entries {
            instances += 1;
            let m2 = t.base.reduct(class.vocab())?;
            let sound = class.contains(&m2)?
                && coding.expand(class, &m2)? == t.base
                && match m2.induced(&t.subsets[0])? {
                    Some(m1) => class.contains(&m1)? && class.leq(&m1, &m2)?,
                    None => false,
                };
            if !sound {
                found.push(Witness::new("catalog target is not an expanded strong pair", &[&t.base]));
            }
        }
    }

    let member_forms: BTreeSet<Structure> = expanded.iter().map(|(_, np)| canonical_form(np)).collect();
    let mut candidates: BTreeSet<Structure> = member_forms.clone();
    for entries in pres.catalog.entries.values() {
        candidates.extend(entries.iter().map(|t| canonical_form(&t.base)));
    }
    for (_, np) in expanded.iter().filter(|(n, _)| n.size() <= MUTATION_SIZE) {
        for (r, sym) in coding.vocab.relations().iter().enumerate() {
            for t in tuples(np.universe(), sym.arity) {
                candidates.insert(canonical_form(&flip(np, r, &t)?));
            }
        }
    }
    let candidates: Vec<Structure> = candidates.into_iter().collect();
    instances += candidates.len();
    let per: Vec<Vec<Witness>> = candidates
        .par_iter()
        .map(|x| -> Result<Vec<Witness>> {
            let mut out = Vec::new();
            if x.size() > pres.pair_cap || !theory.models(x, pres.kappa)? {
                return Ok(out);
            }
            if !member_forms.contains(x) {
                out.push(Witness::new("model of the theory is not an expanded member", &[x]));
            }
            // the closure of a tuple enumerating the model is the whole model,
            // and its type is in the catalog
            let whole: BTreeSet<Elem> = x.universe().iter().copied().collect();
            let e = x
                .relation_by_name(&coding.relations[x.size()])
                .expect("closure relation in the vocabulary");
            let covered = x.universe().iter().all(|a| {
                let mut t = vec![*a];
                t.extend_from_slice(x.universe());
                e.contains(&t)
            });
            let typed = normalize(&DecoratedStructure::new(x.clone(), vec![whole])?);
            let listed = pres
                .catalog
                .entries
                .get(&(x.size(), 0))
                .is_some_and(|es| es.contains(&typed));
            if !covered || !listed {
                out.push(Witness::new(
                    "model is not the closure of its enumeration with a catalogued type",
                    &[x],
                ));
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    found.extend(per.into_iter().flatten());
    Ok(Check::from_witnesses("models-are-members", instances, found))
}

// ---------------------------------------------------------------------------
// universal classes

/// A universal axiomatization by forbidden substructures.
#[derive(Clone, Debug)]
pub struct UniversalTheory {
    pub theory: Theory,
    /// Minimal non-members within the size cap, canonical forms.
    pub forbidden: Vec<Structure>,
    /// The sweep comparing the models of `theory` with the class.
    pub report: VerificationReport,
}

/// `∀z ¬(z pairwise distinct ∧ diagram of s)`.
fn forbid(s: &Structure) -> Formula {
    let z = vars("z", s.size());
    if z.is_empty() {
        // only reachable for an empty class, where no universal sentence
        // can exclude the empty structure
        return Formula::forall("z0", Formula::not(Formula::eq_vars("z0", "z0")));
    }
    let at: BTreeMap<Elem, Var> = s.universe().iter().copied().zip(z.iter().cloned()).collect();
    Formula::forall_many(&z, Formula::not(conj(atomic_diagram(s, &at))))
}

/// Forbids every minimal non-member of size at most the cap, after checking
/// that the class is closed under substructure with order equal to `⊆`.
pub fn tarski_universal_theory(class: &ModelClass, caps: &Caps) -> Result<UniversalTheory> {
    let reps = class.members_up_to(caps.max_size, caps.candidates)?;
    for n in &reps {
        for u in subsets(n.universe()) {
            let Some(m) = n.induced(&u)? else { continue };
            if !class.contains(&m)? {
                return Err(Error::Universality(format!(
                    "substructure {} of {} is not in the class",
                    print_structure(&m),
                    print_structure(n)
                )));
            }
            if !class.leq(&m, n)? {
                return Err(Error::Universality(format!(
                    "substructure {} of {} is not a strong submodel",
                    print_structure(&m),
                    print_structure(n)
                )));
            }
        }
    }
    let all = enumerate_structures(class.vocab(), caps.max_size, true, caps.candidates)?;
    let mut forbidden = Vec::new();
    for s in &all {
        if class.contains(s)? {
            continue;
        }
        let mut minimal = true;
        for u in subsets(s.universe()).filter(|u| u.len() < s.size()) {
            if let Some(m) = s.induced(&u)? {
                if !class.contains(&m)? {
                    minimal = false;
                    break;
                }
            }
        }
        if minimal {
            forbidden.push(s.clone());
        }
    }
    let theory = Theory::new(
        format!("{}-universal", class.spec().name()),
        class.vocab().clone(),
        forbidden.iter().map(forbid).collect(),
    )?;

    let compiled = CompiledTheory::new(&theory)?;
    let mut found = Vec::new();
    for s in &all {
        let model = compiled.models(s, Kappa::Unbounded)?;
        if model != class.contains(s)? {
            found.push(Witness::new(
                format!("model of the universal theory: {model}; member: {}", !model),
                &[s],
            ));
        }
    }
    let mut report = caps.record(VerificationReport::new(format!(
        "tarski `{}`",
        class.spec().name()
    )));
    report.count("structures", all.len());
    report.count("forbidden", forbidden.len());
    report.push(Check::from_witnesses("tarski-models", all.len(), found));
    Ok(UniversalTheory {
        theory,
        forbidden,
        report,
    })
}

/// In a relational universal class `cl(b) = ran(b)`, so `E_n(x, b)` can be
/// replaced by `⋁ x = b_i` and the targets reduced to the base vocabulary.
pub fn tarski_specialize(pres: &Presentation) -> Result<Theory> {
    let coding = &pres.coding;
    if !coding.base.functions().is_empty() {
        return Err(Error::Domain(
            "closure relations are only definable by equalities in relational vocabularies".into(),
        ));
    }
    let arity: BTreeMap<&str, usize> = coding
        .relations
        .iter()
        .enumerate()
        .map(|(n, r)| (r.as_str(), n))
        .collect();
    let sentences = pres
        .theory
        .sentences
        .iter()
        .map(|s| {
            s.try_map_bottom_up(&mut |f| match f {
                Formula::Atom(r, args) if arity.contains_key(r.as_str()) => {
                    let (x, b) = args.split_first().expect("closure atoms have arguments");
                    Ok(if b.is_empty() {
                        Formula::not(Formula::eq(x.clone(), x.clone()))
                    } else {
                        disj(b.iter().map(|t| Formula::eq(x.clone(), t.clone())).collect())
                    })
                }
                Formula::QStruct(q) => {
                    let q = *q;
                    let target = if q.sub_vocab().is_subvocabulary_of(&coding.base) {
                        q.target
                    } else {
                        DecoratedStructure::new(q.target.base.reduct(&coding.base)?, q.target.subsets)?
                    };
                    Ok(Formula::qstruct(QStruct::new(target, q.x, q.ys, q.phi, q.psis)?))
                }
                other => Ok(other),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Theory::new(
        format!("{}-specialized", pres.theory.name),
        coding.base.clone(),
        sentences,
    )
}

// ---------------------------------------------------------------------------
// Galois types

/// One relation per Galois type of a nonempty tuple within the caps.
#[derive(Clone, Debug)]
pub struct Morleyization {
    pub class_name: String,
    pub vocab: Arc<Vocabulary>,
    /// Relation names with the type each codes.
    pub relations: Vec<(String, PointedModel)>,
    pub members: Vec<(Structure, Structure)>,
    /// Whether substructure between expansions coincides with the order.
    pub report: VerificationReport,
}

struct TypeCoding {
    vocab: Arc<Vocabulary>,
    names: BTreeMap<PointedModel, String>,
    max_len: usize,
}

impl TypeCoding {
    fn expand(&self, class: &ModelClass, n: &Structure) -> Result<Structure> {
        let mut extra: BTreeMap<String, BTreeSet<Vec<Elem>>> = self
            .names
            .values()
            .map(|r| (r.clone(), BTreeSet::new()))
            .collect();
        for len in 1..=self.max_len {
            for t in tuples(n.universe(), len) {
                if let Some(r) = self.names.get(&galois_key(class, n, &t)?) {
                    extra.get_mut(r).expect("listed").insert(t);
                }
            }
        }
        n.expand(self.vocab.clone(), &extra, &BTreeMap::new())
    }
}

/// Adds `R_p` for each type `p` of tuple length `1 ≤ ℓ < arity_cap`, with
/// `R_p(a)` iff `(a, N) ≡ p`, and compares substructure between expanded
/// members with the class order.
pub fn galois_morleyization(class: &ModelClass, arity_cap: usize, caps: &Caps) -> Result<Morleyization> {
    require_intersections(class, caps)?;
    let mut types = Vec::new();
    for len in 1..arity_cap {
        types.extend(enumerate_dk(class, len, caps)?);
    }
    let names = fresh_family(class.vocab(), "T", types.len());
    let mut symbols = class.vocab().relations().to_vec();
    symbols.extend(
        names
            .iter()
            .zip(&types)
            .map(|(r, p)| Symbol::new(r.clone(), p.tuple.len())),
    );
    let coding = TypeCoding {
        vocab: Arc::new(Vocabulary::new(symbols, class.vocab().functions().to_vec())?),
        names: types.iter().cloned().zip(names.iter().cloned()).collect(),
        max_len: arity_cap.saturating_sub(1),
    };
    let reps = class.members_up_to(caps.max_size, caps.candidates)?;
    let per: Vec<((Structure, Structure), usize, Vec<Witness>)> = reps
        .par_iter()
        .map(|n| {
            let np = coding.expand(class, n)?;
            let mut count = 0;
            let mut found = Vec::new();
            for u in subsets(n.universe()) {
                let Some(m) = n.induced(&u)? else { continue };
                if !class.contains(&m)? {
                    continue;
                }
                count += 1;
                let sub = coding.expand(class, &m)?.is_substructure_of(&np);
                let strong = class.leq(&m, n)?;
                if sub != strong {
                    found.push(Witness::new(
                        format!("expanded substructure: {sub}; strong submodel: {strong}"),
                        &[&m, n],
                    ));
                }
            }
            Ok(((n.clone(), np), count, found))
        })
        .collect::<Result<_>>()?;
    let mut report = caps
        .record(VerificationReport::new(format!(
            "morleyize `{}`",
            class.spec().name()
        )))
        .cap("arity-cap", arity_cap);
    report.count("members", reps.len());
    report.count("types", types.len());
    report.push(Check::from_witnesses(
        "model-complete",
        per.iter().map(|p| p.1).sum(),
        per.iter().flat_map(|p| p.2.clone()).collect(),
    ));
    Ok(Morleyization {
        class_name: class.spec().name().to_string(),
        vocab: coding.vocab.clone(),
        relations: names.into_iter().zip(types).collect(),
        members: per.into_iter().map(|p| p.0).collect(),
        report,
    })
}
