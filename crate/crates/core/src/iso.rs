//! Isomorphism search and canonical labeling for decorated structures.
//!
//! The search is complete: invariants only prune candidates that could never
//! be part of an isomorphism. Canonical labeling picks the lexicographically
//! least encoding over all relabelings onto `{0, …, n-1}`, found with a
//! branch-and-bound over positions.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::ops::ControlFlow;

use crate::error::{Error, Result};
use crate::structure::{DecoratedStructure, Elem, Structure};
use crate::util::tuples;

pub type Isomorphism = BTreeMap<Elem, Elem>;

/// Local, index-based view of a decorated structure.
struct Local<'a> {
    d: &'a DecoratedStructure,
    elems: Vec<Elem>,
    index: HashMap<Elem, usize>,
    rels: Vec<Vec<Vec<usize>>>,
    rel_sets: Vec<HashSet<Vec<usize>>>,
    funs: Vec<Vec<(Vec<usize>, usize)>>,
    fun_maps: Vec<HashMap<Vec<usize>, usize>>,
    subsets: Vec<Vec<bool>>,
}

impl<'a> Local<'a> {
    fn new(d: &'a DecoratedStructure) -> Self {
        let elems: Vec<Elem> = d.base.universe().to_vec();
        let index: HashMap<Elem, usize> = elems.iter().enumerate().map(|(i, e)| (*e, i)).collect();
        let vocab = d.base.vocab();
        let rels: Vec<Vec<Vec<usize>>> = (0..vocab.relations().len())
            .map(|r| {
                d.base
                    .relation_tuples(r)
                    .iter()
                    .map(|t| t.iter().map(|e| index[e]).collect())
                    .collect()
            })
            .collect();
        let rel_sets = rels.iter().map(|ts| ts.iter().cloned().collect()).collect();
        let funs: Vec<Vec<(Vec<usize>, usize)>> = (0..vocab.functions().len())
            .map(|f| {
                d.base
                    .function_table(f)
                    .iter()
                    .map(|(a, v)| (a.iter().map(|e| index[e]).collect(), index[v]))
                    .collect()
            })
            .collect();
        let fun_maps = funs.iter().map(|es| es.iter().cloned().collect()).collect();
        let subsets = d
            .subsets
            .iter()
            .map(|s| elems.iter().map(|e| s.contains(e)).collect())
            .collect();
        Local {
            d,
            elems,
            index,
            rels,
            rel_sets,
            funs,
            fun_maps,
            subsets,
        }
    }

    fn n(&self) -> usize {
        self.elems.len()
    }

    /// Isomorphism-invariant fingerprint of each element.
    fn signatures(&self) -> Vec<Vec<usize>> {
        let n = self.n();
        let mut sig: Vec<Vec<usize>> = vec![Vec::new(); n];
        for s in &self.subsets {
            for (i, m) in s.iter().enumerate() {
                sig[i].push(*m as usize);
            }
        }
        for (r, ts) in self.rels.iter().enumerate() {
            let arity = self.d.base.vocab().relations()[r].arity;
            let mut counts = vec![vec![0usize; arity + 1]; n];
            for t in ts {
                for (pos, e) in t.iter().enumerate() {
                    counts[*e][pos] += 1;
                }
                if t.iter().all(|e| *e == t[0]) {
                    counts[t[0]][arity] += 1;
                }
            }
            for (i, c) in counts.into_iter().enumerate() {
                sig[i].extend(c);
            }
        }
        for es in &self.funs {
            let mut pre = vec![0usize; n];
            let mut fixed = vec![0usize; n];
            for (a, v) in es {
                pre[*v] += 1;
                if a.iter().all(|e| e == v) && !a.is_empty() {
                    fixed[*v] = 1;
                }
                if a.is_empty() {
                    fixed[*v] += 2;
                }
            }
            for i in 0..n {
                sig[i].push(pre[i]);
                sig[i].push(fixed[i]);
            }
        }
        sig
    }
}

fn same_shape(a: &DecoratedStructure, b: &DecoratedStructure) -> Result<()> {
    if a.base.vocab() != b.base.vocab() {
        return Err(Error::Signature(format!(
            "isomorphism between different vocabularies {} and {}",
            a.base.vocab(),
            b.base.vocab()
        )));
    }
    if a.subsets.len() != b.subsets.len() {
        return Err(Error::Signature(format!(
            "subset lists of different lengths ({} vs {})",
            a.subsets.len(),
            b.subsets.len()
        )));
    }
    Ok(())
}

fn coarse_mismatch(a: &DecoratedStructure, b: &DecoratedStructure) -> bool {
    if a.base.size() != b.base.size() {
        return true;
    }
    if a.subsets
        .iter()
        .zip(&b.subsets)
        .any(|(x, y)| x.len() != y.len())
    {
        return true;
    }
    (0..a.base.vocab().relations().len())
        .any(|r| a.base.relation_tuples(r).len() != b.base.relation_tuples(r).len())
}

/// Calls `visit` on every isomorphism from `src` onto `dst` extending `pins`,
/// until `visit` breaks.
pub fn for_each_isomorphism(
    src: &DecoratedStructure,
    dst: &DecoratedStructure,
    pins: &BTreeMap<Elem, Elem>,
    mut visit: impl FnMut(&Isomorphism) -> ControlFlow<()>,
) -> Result<()> {
    same_shape(src, dst)?;
    let mut seen = BTreeSet::new();
    for (k, v) in pins {
        if !src.base.contains(*k) {
            return Err(Error::Pin(format!("pinned element {k} is not in the source")));
        }
        if !dst.base.contains(*v) {
            return Err(Error::Pin(format!("pin target {v} is not in the destination")));
        }
        if !seen.insert(*v) {
            return Err(Error::Pin(format!("pins are not injective (two map to {v})")));
        }
    }
    if coarse_mismatch(src, dst) {
        return Ok(());
    }
    let s = Local::new(src);
    let t = Local::new(dst);
    let n = s.n();
    let ssig = s.signatures();
    let tsig = t.signatures();
    let mut cands: Vec<Vec<usize>> = (0..n)
        .map(|i| (0..n).filter(|j| ssig[i] == tsig[*j]).collect())
        .collect();
    for (k, v) in pins {
        let (i, j) = (s.index[k], t.index[v]);
        if !cands[i].contains(&j) {
            return Ok(());
        }
        cands[i] = vec![j];
    }
    if cands.iter().any(|c| c.is_empty()) {
        return Ok(());
    }

    // search order: most constrained first
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|i| (cands[*i].len(), *i));
    let mut step_of = vec![0usize; n];
    for (step, i) in order.iter().enumerate() {
        step_of[*i] = step;
    }

    enum Check {
        Rel(usize, usize),
        Fun(usize, usize),
    }
    let mut checks: Vec<Vec<Check>> = (0..n).map(|_| Vec::new()).collect();
    for (r, ts) in s.rels.iter().enumerate() {
        for (k, tup) in ts.iter().enumerate() {
            if let Some(step) = tup.iter().map(|e| step_of[*e]).max() {
                checks[step].push(Check::Rel(r, k));
            }
        }
    }
    for (f, es) in s.funs.iter().enumerate() {
        for (k, (a, v)) in es.iter().enumerate() {
            let step = a.iter().chain(std::iter::once(v)).map(|e| step_of[*e]).max().unwrap();
            checks[step].push(Check::Fun(f, k));
        }
    }
    if n == 0 {
        let _ = visit(&Isomorphism::new());
        return Ok(());
    }

    struct Ctx<'c, 'a> {
        s: &'c Local<'a>,
        t: &'c Local<'a>,
        order: &'c [usize],
        cands: &'c [Vec<usize>],
        checks: &'c [Vec<Check>],
        map: Vec<usize>,
        used: Vec<bool>,
    }

    fn consistent(ctx: &Ctx<'_, '_>, step: usize) -> bool {
        let mut buf = Vec::new();
        for c in &ctx.checks[step] {
            match c {
                Check::Rel(r, k) => {
                    buf.clear();
                    buf.extend(ctx.s.rels[*r][*k].iter().map(|e| ctx.map[*e]));
                    if !ctx.t.rel_sets[*r].contains(&buf) {
                        return false;
                    }
                }
                Check::Fun(f, k) => {
                    let (a, v) = &ctx.s.funs[*f][*k];
                    buf.clear();
                    buf.extend(a.iter().map(|e| ctx.map[*e]));
                    if ctx.t.fun_maps[*f].get(&buf) != Some(&ctx.map[*v]) {
                        return false;
                    }
                }
            }
        }
        true
    }

    fn go(
        ctx: &mut Ctx<'_, '_>,
        step: usize,
        visit: &mut dyn FnMut(&Isomorphism) -> ControlFlow<()>,
    ) -> ControlFlow<()> {
        if step == ctx.order.len() {
            let iso: Isomorphism = (0..ctx.map.len())
                .map(|i| (ctx.s.elems[i], ctx.t.elems[ctx.map[i]]))
                .collect();
            return visit(&iso);
        }
        let i = ctx.order[step];
        for k in 0..ctx.cands[i].len() {
            let j = ctx.cands[i][k];
            if ctx.used[j] {
                continue;
            }
            ctx.used[j] = true;
            ctx.map[i] = j;
            if consistent(ctx, step) {
                go(ctx, step + 1, visit)?;
            }
            ctx.used[j] = false;
        }
        ControlFlow::Continue(())
    }

    let mut ctx = Ctx {
        s: &s,
        t: &t,
        order: &order,
        cands: &cands,
        checks: &checks,
        map: vec![usize::MAX; n],
        used: vec![false; n],
    };
    let _ = go(&mut ctx, 0, &mut visit);
    Ok(())
}

/// An isomorphism from `src` onto `dst` that maps subset `i` onto subset `i`
/// and extends `pins`, if one exists.
pub fn find_isomorphism(
    src: &DecoratedStructure,
    dst: &DecoratedStructure,
    pins: &BTreeMap<Elem, Elem>,
) -> Result<Option<Isomorphism>> {
    let mut found = None;
    for_each_isomorphism(src, dst, pins, |iso| {
        found = Some(iso.clone());
        ControlFlow::Break(())
    })?;
    Ok(found)
}

pub fn count_isomorphisms(
    src: &DecoratedStructure,
    dst: &DecoratedStructure,
    pins: &BTreeMap<Elem, Elem>,
) -> Result<usize> {
    let mut n = 0;
    for_each_isomorphism(src, dst, pins, |_| {
        n += 1;
        ControlFlow::Continue(())
    })?;
    Ok(n)
}

/// Plain structures, no subsets, no pins. Different vocabularies are never isomorphic.
pub fn isomorphic(a: &Structure, b: &Structure) -> bool {
    if a.vocab() != b.vocab() {
        return false;
    }
    let a = DecoratedStructure::plain(a.clone());
    let b = DecoratedStructure::plain(b.clone());
    matches!(find_isomorphism(&a, &b, &BTreeMap::new()), Ok(Some(_)))
}

// ---------------------------------------------------------------------------
// canonical labeling

/// Position tuples over `0..=p` that mention `p`, in lexicographic order.
fn block_tuples(arity: usize, p: usize) -> Vec<Vec<usize>> {
    let pool: Vec<usize> = (0..=p).collect();
    tuples(&pool, arity).filter(|t| t.contains(&p)).collect()
}

struct Canon<'a> {
    local: Local<'a>,
    rel_arities: Vec<usize>,
    fun_arities: Vec<usize>,
    /// `blocks[arity][p]`
    blocks: Vec<Vec<Vec<Vec<usize>>>>,
    best_order: Option<Vec<usize>>,
    best_blocks: Vec<Vec<u8>>,
    best_funs: Vec<usize>,
}

impl Canon<'_> {
    fn block(&self, order: &[usize], p: usize) -> Vec<u8> {
        let mut out = Vec::new();
        let mut buf = Vec::new();
        for (r, ar) in self.rel_arities.iter().enumerate() {
            for pt in &self.blocks[*ar][p] {
                buf.clear();
                buf.extend(pt.iter().map(|q| order[*q]));
                // present tuples sort first
                out.push(!self.local.rel_sets[r].contains(&buf) as u8);
            }
        }
        for s in &self.local.subsets {
            out.push(!s[order[p]] as u8);
        }
        out
    }

    fn fun_part(&self, order: &[usize]) -> Vec<usize> {
        let n = order.len();
        let mut pos_of = vec![0usize; n];
        for (p, i) in order.iter().enumerate() {
            pos_of[*i] = p;
        }
        let mut out = Vec::new();
        let mut buf = Vec::new();
        for (f, ar) in self.fun_arities.iter().enumerate() {
            if *ar == 0 {
                out.push(pos_of[self.local.fun_maps[f][&Vec::new()]]);
                continue;
            }
            for p in 0..n {
                for pt in &self.blocks[*ar][p] {
                    buf.clear();
                    buf.extend(pt.iter().map(|q| order[*q]));
                    out.push(pos_of[self.local.fun_maps[f][&buf]]);
                }
            }
        }
        out
    }

    /// Whether the current prefix of blocks equals the best labeling's prefix.
    fn tied(&self, blocks: &[Vec<u8>]) -> bool {
        self.best_order.is_some() && self.best_blocks[..blocks.len()] == *blocks
    }

    fn search(&mut self, order: &mut Vec<usize>, used: &mut [bool], blocks: &mut Vec<Vec<u8>>) {
        let n = used.len();
        let p = order.len();
        if p == n {
            let funs = self.fun_part(order);
            // an untied complete prefix is strictly below the best one
            let better = !self.tied(blocks) || funs < self.best_funs;
            if better {
                self.best_order = Some(order.clone());
                self.best_blocks = blocks.clone();
                self.best_funs = funs;
            }
            return;
        }
        for i in 0..n {
            if used[i] {
                continue;
            }
            order.push(i);
            let b = self.block(order, p);
            let prune = self.tied(blocks) && b > self.best_blocks[p];
            if !prune {
                used[i] = true;
                blocks.push(b);
                self.search(order, used, blocks);
                blocks.pop();
                used[i] = false;
            }
            order.pop();
        }
    }
}

/// Canonical relabeling onto `{0, …, n-1}`: isomorphic inputs (respecting
/// subsets) produce identical outputs. Also returns the relabeling used.
pub fn canonical_labeling(d: &DecoratedStructure) -> (DecoratedStructure, Isomorphism) {
    let local = Local::new(d);
    let n = local.n();
    let vocab = d.base.vocab();
    let rel_arities: Vec<usize> = vocab.relations().iter().map(|s| s.arity).collect();
    let fun_arities: Vec<usize> = vocab.functions().iter().map(|s| s.arity).collect();
    let max_arity = rel_arities.iter().chain(&fun_arities).copied().max().unwrap_or(0);
    let blocks = (0..=max_arity)
        .map(|a| (0..n).map(|p| block_tuples(a, p)).collect())
        .collect();
    let mut canon = Canon {
        local,
        rel_arities,
        fun_arities,
        blocks,
        best_order: None,
        best_blocks: Vec::new(),
        best_funs: Vec::new(),
    };
    canon.search(&mut Vec::with_capacity(n), &mut vec![false; n], &mut Vec::new());
    let order = canon.best_order.expect("at least one labeling");
    let map: Isomorphism = order
        .iter()
        .enumerate()
        .map(|(p, i)| (canon.local.elems[*i], p))
        .collect();
    let out = d.relabel(&map).expect("canonical map is a bijection");
    (out, map)
}

/// Canonical form of a decorated structure.
pub fn normalize(d: &DecoratedStructure) -> DecoratedStructure {
    canonical_labeling(d).0
}

/// Canonical form of a plain structure.
pub fn canonical_form(s: &Structure) -> Structure {
    normalize(&DecoratedStructure::plain(s.clone())).base
}

/// Canonical form of a pointed structure: the tuple is encoded as singleton
/// subsets, so equal outputs mean an isomorphism carrying tuple to tuple.
pub fn canonical_pointed(s: &Structure, tuple: &[Elem]) -> (Structure, Vec<Elem>) {
    let d = DecoratedStructure {
        base: s.clone(),
        subsets: tuple.iter().map(|e| BTreeSet::from([*e])).collect(),
    };
    let (c, map) = canonical_labeling(&d);
    (c.base, tuple.iter().map(|e| map[e]).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structure::Vocabulary;
    use crate::util::for_each_permutation;
    use std::sync::Arc;

    fn lt() -> Arc<Vocabulary> {
        Arc::new(Vocabulary::relational(&[("<", 2)]).unwrap())
    }

    fn chain(n: usize) -> Structure {
        let mut b = Structure::builder(lt(), 0..n);
        for i in 0..n {
            for j in i + 1..n {
                b = b.tuple("<", &[i, j]);
            }
        }
        b.build().unwrap()
    }

    fn k3() -> Structure {
        let v = Arc::new(Vocabulary::relational(&[("E", 2)]).unwrap());
        let mut b = Structure::builder(v, 0..3);
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    b = b.tuple("E", &[i, j]);
                }
            }
        }
        b.build().unwrap()
    }

    fn plain(s: Structure) -> DecoratedStructure {
        DecoratedStructure::plain(s)
    }

    #[test]
    fn rigid_chains_have_exactly_one_isomorphism() {
        let a = plain(chain(2));
        let iso = find_isomorphism(&a, &a, &BTreeMap::new()).unwrap().unwrap();
        assert_eq!(iso, BTreeMap::from([(0, 0), (1, 1)]));
        assert_eq!(count_isomorphisms(&a, &a, &BTreeMap::new()).unwrap(), 1);
    }

    #[test]
    fn subset_cardinality_blocks_isomorphism() {
        let a = DecoratedStructure::new(Structure::bare(2), vec![BTreeSet::from([0])]).unwrap();
        let b = DecoratedStructure::new(Structure::bare(2), vec![BTreeSet::from([0, 1])]).unwrap();
        assert_eq!(find_isomorphism(&a, &b, &BTreeMap::new()).unwrap(), None);
    }

    #[test]
    fn triangle_automorphisms_match_brute_force() {
        let g = k3();
        // brute force over all bijections
        let mut brute = 0;
        for_each_permutation(3, |p| {
            let ok = g.relation_tuples(0).iter().all(|t| g.holds(0, &[p[t[0]], p[t[1]]]));
            if ok {
                brute += 1;
            }
        });
        assert_eq!(brute, 6);
        let d = plain(g);
        assert_eq!(count_isomorphisms(&d, &d, &BTreeMap::new()).unwrap(), brute);
    }

    #[test]
    fn bad_pins_are_errors() {
        let a = plain(chain(2));
        assert!(matches!(
            find_isomorphism(&a, &a, &BTreeMap::from([(5, 0)])),
            Err(Error::Pin(_))
        ));
        assert!(matches!(
            find_isomorphism(&a, &a, &BTreeMap::from([(0, 1), (1, 1)])),
            Err(Error::Pin(_))
        ));
        // a consistent but impossible pin just finds nothing
        assert_eq!(find_isomorphism(&a, &a, &BTreeMap::from([(0, 1)])).unwrap(), None);
    }

    #[test]
    fn normalize_relabels_to_an_initial_segment() {
        let s = Structure::builder(lt(), [7, 9]).tuple("<", &[7, 9]).build().unwrap();
        let n = normalize(&plain(s));
        assert_eq!(n.base, chain(2));
        assert_eq!(normalize(&n), n);
    }

    #[test]
    fn chains_normalize_to_the_natural_order() {
        let s = Structure::builder(lt(), [3, 5, 8])
            .tuples("<", [&[8, 3][..], &[8, 5], &[3, 5]])
            .build()
            .unwrap();
        assert_eq!(canonical_form(&s), chain(3));
    }

    #[test]
    fn isomorphic_triangles_normalize_identically() {
        let v = Arc::new(Vocabulary::relational(&[("E", 2)]).unwrap());
        let mut b = Structure::builder(v, [10, 20, 30]);
        for i in [10, 20, 30] {
            for j in [10, 20, 30] {
                if i != j {
                    b = b.tuple("E", &[i, j]);
                }
            }
        }
        let x = DecoratedStructure::new(b.build().unwrap(), vec![BTreeSet::from([30])]).unwrap();
        let y = DecoratedStructure::new(k3(), vec![BTreeSet::from([0])]).unwrap();
        assert!(find_isomorphism(&x, &y, &BTreeMap::new()).unwrap().is_some());
        assert_eq!(normalize(&x), normalize(&y));
    }

    #[test]
    fn functions_take_part_in_isomorphism_and_canonical_form() {
        let v = Arc::new(
            Vocabulary::new(vec![], vec![crate::structure::Symbol::new("f", 1)]).unwrap(),
        );
        // two 2-cycles plus fixed point vs. one 2-cycle, two fixed points
        let a = Structure::builder(v.clone(), 0..3)
            .map("f", &[0], 1)
            .map("f", &[1], 0)
            .map("f", &[2], 2)
            .build()
            .unwrap();
        let b = Structure::builder(v.clone(), 0..3)
            .map("f", &[0], 0)
            .map("f", &[1], 2)
            .map("f", &[2], 1)
            .build()
            .unwrap();
        let c = Structure::builder(v, 0..3)
            .map("f", &[0], 0)
            .map("f", &[1], 1)
            .map("f", &[2], 1)
            .build()
            .unwrap();
        assert!(isomorphic(&a, &b));
        assert!(!isomorphic(&a, &c));
        assert_eq!(canonical_form(&a), canonical_form(&b));
        assert_ne!(canonical_form(&a), canonical_form(&c));
    }
}
