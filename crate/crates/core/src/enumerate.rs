//! Exhaustive enumeration of finite structures and expansions.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::iso::{canonical_form, normalize};
use crate::structure::{DecoratedStructure, Elem, Structure, Vocabulary};
use crate::util::tuples;

/// Default bound on the number of candidate structures one enumeration may visit.
pub const DEFAULT_CANDIDATE_CAP: usize = 20_000_000;

/// The free choices when interpreting some symbols over a fixed universe:
/// one yes/no slot per relation tuple, one value slot per function entry.
struct Slots {
    universe: Vec<Elem>,
    rel_names: Vec<String>,
    fun_names: Vec<String>,
    rels: Vec<(String, Vec<Elem>)>,
    funs: Vec<(String, Vec<Elem>)>,
}

impl Slots {
    fn new(vocab: &Vocabulary, universe: &[Elem], skip_tuple: impl Fn(&[Elem]) -> bool) -> Slots {
        let mut rels = Vec::new();
        for r in vocab.relations() {
            for t in tuples(universe, r.arity) {
                if !skip_tuple(&t) {
                    rels.push((r.name.clone(), t));
                }
            }
        }
        let mut funs = Vec::new();
        for f in vocab.functions() {
            for t in tuples(universe, f.arity) {
                funs.push((f.name.clone(), t));
            }
        }
        Slots {
            universe: universe.to_vec(),
            rel_names: vocab.relations().iter().map(|r| r.name.clone()).collect(),
            fun_names: vocab.functions().iter().map(|f| f.name.clone()).collect(),
            rels,
            funs,
        }
    }

    /// Number of assignments, saturating.
    fn count(&self) -> u128 {
        let n = self.universe.len() as u128;
        let r = 2u128.checked_pow(self.rels.len() as u32).unwrap_or(u128::MAX);
        let f = if self.funs.is_empty() {
            1
        } else if n == 0 {
            0
        } else {
            n.checked_pow(self.funs.len() as u32).unwrap_or(u128::MAX)
        };
        r.saturating_mul(f)
    }

    /// Calls `visit` with the extra interpretations of every assignment.
    fn for_each(
        &self,
        mut visit: impl FnMut(
            &BTreeMap<String, BTreeSet<Vec<Elem>>>,
            &BTreeMap<String, BTreeMap<Vec<Elem>, Elem>>,
        ) -> Result<()>,
    ) -> Result<()> {
        if self.count() == 0 {
            return Ok(());
        }
        let radix: Vec<usize> = std::iter::repeat(2)
            .take(self.rels.len())
            .chain(std::iter::repeat(self.universe.len()).take(self.funs.len()))
            .collect();
        let mut digits = vec![0usize; radix.len()];
        loop {
            let mut rels: BTreeMap<String, BTreeSet<Vec<Elem>>> =
                self.rel_names.iter().map(|n| (n.clone(), BTreeSet::new())).collect();
            let mut funs: BTreeMap<String, BTreeMap<Vec<Elem>, Elem>> =
                self.fun_names.iter().map(|n| (n.clone(), BTreeMap::new())).collect();
            for (i, (name, t)) in self.rels.iter().enumerate() {
                if digits[i] == 1 {
                    rels.get_mut(name).unwrap().insert(t.clone());
                }
            }
            for (j, (name, t)) in self.funs.iter().enumerate() {
                let v = self.universe[digits[self.rels.len() + j]];
                funs.get_mut(name).unwrap().insert(t.clone(), v);
            }
            visit(&rels, &funs)?;
            let mut pos = radix.len();
            loop {
                if pos == 0 {
                    return Ok(());
                }
                pos -= 1;
                digits[pos] += 1;
                if digits[pos] < radix[pos] {
                    break;
                }
                digits[pos] = 0;
            }
        }
    }
}

fn empty_interpretations(vocab: &Vocabulary) -> BTreeMap<String, BTreeSet<Vec<Elem>>> {
    vocab
        .relations()
        .iter()
        .map(|r| (r.name.clone(), BTreeSet::new()))
        .collect()
}

struct Budget {
    used: usize,
    cap: usize,
}

impl Budget {
    fn charge(&mut self, n: u128, what: &str) -> Result<()> {
        let total = (self.used as u128).saturating_add(n);
        if total > self.cap as u128 {
            return Err(Error::capacity(what, self.used, self.cap));
        }
        self.used = total as usize;
        Ok(())
    }
}

/// All `vocab`-structures with universe `{0, …, k-1}`, `k ≤ max_size`.
/// With `up_to_iso`, one canonical representative per isomorphism type.
/// Output is sorted by size, then by structure.
pub fn enumerate_structures(
    vocab: &Arc<Vocabulary>,
    max_size: usize,
    up_to_iso: bool,
    cap: usize,
) -> Result<Vec<Structure>> {
    enumerate_filtered(vocab, max_size, up_to_iso, cap, &mut |_| Ok(true))
}

/// As [`enumerate_structures`], keeping only structures accepted by `keep`.
/// `keep` must be isomorphism invariant when `up_to_iso` is set.
pub fn enumerate_filtered(
    vocab: &Arc<Vocabulary>,
    max_size: usize,
    up_to_iso: bool,
    cap: usize,
    keep: &mut dyn FnMut(&Structure) -> Result<bool>,
) -> Result<Vec<Structure>> {
    let mut budget = Budget { used: 0, cap };
    if up_to_iso && vocab.is_relational() {
        return relational_types(vocab, max_size, &mut budget, keep);
    }
    let mut out = Vec::new();
    for k in 0..=max_size {
        let universe: Vec<Elem> = (0..k).collect();
        if k == 0 && vocab.has_constants() {
            continue;
        }
        let slots = Slots::new(vocab, &universe, |_| false);
        budget.charge(slots.count(), "structure enumeration")?;
        let base = Structure::new(
            Arc::new(Vocabulary::empty()),
            universe.clone(),
            Vec::new(),
            Vec::new(),
        )?;
        let mut level = BTreeSet::new();
        slots.for_each(|rels, funs| {
            let s = base.expand(vocab.clone(), rels, funs)?;
            if keep(&s)? {
                level.insert(if up_to_iso { canonical_form(&s) } else { s });
            }
            Ok(())
        })?;
        out.extend(level);
    }
    Ok(out)
}

/// Relational vocabularies: grow canonical representatives one element at a
/// time. Every structure on `k` elements extends one on `k-1`.
fn relational_types(
    vocab: &Arc<Vocabulary>,
    max_size: usize,
    budget: &mut Budget,
    keep: &mut dyn FnMut(&Structure) -> Result<bool>,
) -> Result<Vec<Structure>> {
    let empty = Structure::new(
        vocab.clone(),
        Vec::new(),
        vec![BTreeSet::new(); vocab.relations().len()],
        Vec::new(),
    )?;
    let mut out = Vec::new();
    if keep(&empty)? {
        out.push(empty.clone());
    }
    let mut level = vec![empty];
    for k in 1..=max_size {
        let universe: Vec<Elem> = (0..k).collect();
        let newest = k - 1;
        let slots = Slots::new(vocab, &universe, |t| !t.contains(&newest));
        let last = k == max_size;
        let mut next = BTreeSet::new();
        let mut kept = BTreeSet::new();
        for rep in &level {
            budget.charge(slots.count(), "structure enumeration")?;
            slots.for_each(|extra, _| {
                let mut rels = empty_interpretations(vocab);
                for (i, r) in vocab.relations().iter().enumerate() {
                    let set = rels.get_mut(&r.name).unwrap();
                    set.extend(rep.relation_tuples(i).iter().cloned());
                    set.extend(extra[&r.name].iter().cloned());
                }
                let s = Structure::new(
                    vocab.clone(),
                    universe.clone(),
                    vocab.relations().iter().map(|r| rels[&r.name].clone()).collect(),
                    Vec::new(),
                )?;
                if last {
                    if keep(&s)? {
                        kept.insert(canonical_form(&s));
                    }
                } else {
                    next.insert(canonical_form(&s));
                }
                Ok(())
            })?;
        }
        if !last {
            for s in &next {
                if keep(s)? {
                    kept.insert(s.clone());
                }
            }
            level = next.into_iter().collect();
        }
        out.extend(kept);
    }
    Ok(out)
}

fn check_expansion(m: &Structure, vocab: &Vocabulary) -> Result<Vocabulary> {
    if !m.vocab().is_subvocabulary_of(vocab) {
        return Err(Error::Signature(format!(
            "{} is not a sub-vocabulary of {}",
            m.vocab(),
            vocab
        )));
    }
    let extra = vocab.difference(m.vocab());
    if m.size() == 0 && extra.has_constants() {
        return Err(Error::Domain(
            "cannot interpret new constant symbols on an empty universe".into(),
        ));
    }
    Ok(extra)
}

/// One expansion of `m` to `vocab` per isomorphism type over `vocab`. Each
/// output has `m` as its reduct; order follows the slot enumeration.
pub fn enumerate_expansions(m: &Structure, vocab: &Arc<Vocabulary>, cap: usize) -> Result<Vec<Structure>> {
    let d = DecoratedStructure::plain(m.clone());
    Ok(enumerate_decorated_expansions(&d, vocab, cap)?
        .into_iter()
        .map(|d| d.base)
        .collect())
}

/// As [`enumerate_expansions`], with isomorphism required to respect the subsets.
pub fn enumerate_decorated_expansions(
    d: &DecoratedStructure,
    vocab: &Arc<Vocabulary>,
    cap: usize,
) -> Result<Vec<DecoratedStructure>> {
    let extra = check_expansion(&d.base, vocab)?;
    let slots = Slots::new(&extra, d.base.universe(), |_| false);
    let mut budget = Budget { used: 0, cap };
    budget.charge(slots.count(), "expansion enumeration")?;
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    slots.for_each(|rels, funs| {
        let e = DecoratedStructure {
            base: d.base.expand(vocab.clone(), rels, funs)?,
            subsets: d.subsets.clone(),
        };
        if seen.insert(normalize(&e)) {
            out.push(e);
        }
        Ok(())
    })?;
    Ok(out)
}
