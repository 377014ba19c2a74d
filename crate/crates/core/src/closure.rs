//! The closure operator `cl^N(A)`, the intersection property, Galois types.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;

use crate::class::{Caps, ModelClass};
use crate::error::{Error, Result};
use crate::iso::{canonical_pointed, find_isomorphism};
use crate::report::{Check, VerificationReport, Witness};
use crate::structure::{DecoratedStructure, Elem, Structure};
use crate::util::{subsets, tuples};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClosureResult {
    pub structure: Structure,
    /// Whether the closure is itself a strong submodel.
    pub is_strong: bool,
}

impl ClosureResult {
    pub fn universe(&self) -> BTreeSet<Elem> {
        self.structure.universe().iter().copied().collect()
    }
}

/// `cl^N(A)`: the induced structure on the intersection of the universes of
/// all strong submodels of `n` containing `a`.
pub fn cl(class: &ModelClass, n: &Structure, a: &BTreeSet<Elem>) -> Result<ClosureResult> {
    if let Some(e) = a.iter().find(|e| !n.contains(**e)) {
        return Err(Error::Domain(format!("element {e} is not in the universe")));
    }
    let strong = class.strong_universes(n)?;
    let mut meet: Option<BTreeSet<Elem>> = None;
    for u in strong.iter().filter(|u| a.is_subset(u)) {
        meet = Some(match meet {
            None => u.clone(),
            Some(m) => m.intersection(u).copied().collect(),
        });
    }
    let meet = meet.ok_or_else(|| {
        Error::Internal("no strong submodel contains the set, not even the structure itself".into())
    })?;
    let structure = n
        .induced(&meet)?
        .ok_or_else(|| Error::Internal("an intersection of substructures is not closed".into()))?;
    Ok(ClosureResult {
        is_strong: strong.contains(&meet),
        structure,
    })
}

fn tuple_set(t: &[Elem]) -> BTreeSet<Elem> {
    t.iter().copied().collect()
}

/// For every member up to the size cap and every subset `A`, `cl^N(A)` is a
/// strong submodel of `N`.
pub fn verify_intersections(class: &ModelClass, caps: &Caps) -> Result<VerificationReport> {
    let reps = class.members_up_to(caps.max_size, caps.candidates)?;
    let per: Vec<(usize, Vec<Witness>)> = reps
        .par_iter()
        .map(|n| -> Result<(usize, Vec<Witness>)> {
            let mut count = 0;
            let mut found = Vec::new();
            for a in subsets(n.universe()) {
                count += 1;
                let c = cl(class, n, &a)?;
                if !c.is_strong {
                    found.push(
                        Witness::new("cl(A) is not a strong submodel of N", &[n, &c.structure])
                            .with_elements(a),
                    );
                }
            }
            Ok((count, found))
        })
        .collect::<Result<_>>()?;
    let mut report = caps.record(VerificationReport::new(format!(
        "verify --check intersections `{}`",
        class.spec().name()
    )));
    report.count("members", reps.len());
    report.push(Check::from_witnesses(
        "intersections",
        per.iter().map(|p| p.0).sum(),
        per.into_iter().flat_map(|p| p.1).collect(),
    ));
    Ok(report)
}

/// For `M ≼ N` within the cap and `A ⊆ |M|`, `cl^M(A) = cl^N(A)`.
pub fn check_cl_coherence(class: &ModelClass, caps: &Caps) -> Result<VerificationReport> {
    let reps = class.members_up_to(caps.max_size, caps.candidates)?;
    let per: Vec<(usize, Vec<Witness>)> = reps
        .par_iter()
        .map(|n| -> Result<(usize, Vec<Witness>)> {
            let mut count = 0;
            let mut found = Vec::new();
            for m in class.strong_submodels(n)? {
                for a in subsets(m.universe()) {
                    count += 1;
                    let in_m = cl(class, &m, &a)?;
                    let in_n = cl(class, n, &a)?;
                    if in_m.universe() != in_n.universe() {
                        found.push(
                            Witness::new(
                                "cl computed in M differs from cl computed in N",
                                &[&m, n, &in_m.structure, &in_n.structure],
                            )
                            .with_elements(a),
                        );
                    }
                }
            }
            Ok((count, found))
        })
        .collect::<Result<_>>()?;
    let mut report = caps.record(VerificationReport::new(format!(
        "verify --check cl-coherence `{}`",
        class.spec().name()
    )));
    report.count("members", reps.len());
    report.push(Check::from_witnesses(
        "cl-coherence",
        per.iter().map(|p| p.0).sum(),
        per.into_iter().flat_map(|p| p.1).collect(),
    ));
    Ok(report)
}

/// A structure with a distinguished tuple.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PointedModel {
    pub model: Structure,
    pub tuple: Vec<Elem>,
}

impl PointedModel {
    pub fn new(model: Structure, tuple: Vec<Elem>) -> Result<PointedModel> {
        if let Some(e) = tuple.iter().find(|e| !model.contains(**e)) {
            return Err(Error::Domain(format!("tuple element {e} is not in the universe")));
        }
        Ok(PointedModel { model, tuple })
    }
}

/// `(a, M) ≡ (b, N)`: an isomorphism `cl^M(a) ≅ cl^N(b)` sending `a` to `b`.
pub fn galois_equiv(class: &ModelClass, p: &PointedModel, q: &PointedModel) -> Result<bool> {
    if p.tuple.len() != q.tuple.len() {
        return Err(Error::Arity(format!(
            "tuples of length {} and {}",
            p.tuple.len(),
            q.tuple.len()
        )));
    }
    let mut pins = BTreeMap::new();
    let mut hit = BTreeSet::new();
    for (a, b) in p.tuple.iter().zip(&q.tuple) {
        match pins.insert(*a, *b) {
            Some(prev) if prev != *b => return Ok(false),
            Some(_) => {}
            None if !hit.insert(*b) => return Ok(false),
            None => {}
        }
    }
    let cp = cl(class, &p.model, &tuple_set(&p.tuple))?;
    let cq = cl(class, &q.model, &tuple_set(&q.tuple))?;
    Ok(find_isomorphism(
        &DecoratedStructure::plain(cp.structure),
        &DecoratedStructure::plain(cq.structure),
        &pins,
    )?
    .is_some())
}

/// Canonical key of the Galois type of `(t, N)`; equal keys iff `≡`.
pub fn galois_key(class: &ModelClass, n: &Structure, t: &[Elem]) -> Result<PointedModel> {
    let c = cl(class, n, &tuple_set(t))?;
    let (model, tuple) = canonical_pointed(&c.structure, t);
    Ok(PointedModel { model, tuple })
}

/// One closure-minimal representative per `≡`-class of tuples of length
/// exactly `tuple_len` realized in members up to the size cap, sorted.
pub fn enumerate_dk(class: &ModelClass, tuple_len: usize, caps: &Caps) -> Result<Vec<PointedModel>> {
    let reps = class.members_up_to(caps.max_size, caps.candidates)?;
    let keys: Vec<BTreeSet<PointedModel>> = reps
        .par_iter()
        .map(|n| {
            tuples(n.universe(), tuple_len)
                .map(|t| galois_key(class, n, &t))
                .collect::<Result<BTreeSet<_>>>()
        })
        .collect::<Result<_>>()?;
    let all: BTreeSet<PointedModel> = keys.into_iter().flatten().collect();
    Ok(all.into_iter().collect())
}
