//! Isomorphism, canonical forms, enumeration and generated substructures,
//! checked against brute force.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use proptest::prelude::*;
use structural_logic::enumerate::{enumerate_structures, DEFAULT_CANDIDATE_CAP};
use structural_logic::iso::{find_isomorphism, normalize};
use structural_logic::{DecoratedStructure, Elem, Structure, Symbol, Vocabulary};

fn edge() -> Arc<Vocabulary> {
    Arc::new(Vocabulary::relational(&[("R", 2)]).unwrap())
}

/// The structure of size `n` over `{R}` with one subset, read off `bits`:
/// `n²` bits for the relation, then `n` bits for the subset.
fn decorated(n: usize, bits: u32) -> DecoratedStructure {
    let mut b = Structure::builder(edge(), 0..n);
    let mut k = 0;
    for i in 0..n {
        for j in 0..n {
            if bits >> k & 1 == 1 {
                b = b.tuple("R", &[i, j]);
            }
            k += 1;
        }
    }
    let subset = (0..n).filter(|i| bits >> (k + i) & 1 == 1).collect();
    DecoratedStructure::new(b.build().unwrap(), vec![subset]).unwrap()
}

fn all_decorated(n: usize) -> impl Iterator<Item = DecoratedStructure> {
    (0..1u32 << (n * n + n)).map(move |bits| decorated(n, bits))
}

fn isomorphic(a: &DecoratedStructure, b: &DecoratedStructure) -> bool {
    find_isomorphism(a, b, &BTreeMap::new()).unwrap().is_some()
}

fn relabel(d: &DecoratedStructure, perm: &[Elem]) -> DecoratedStructure {
    let map = d.base.universe().iter().copied().zip(perm.iter().copied()).collect();
    d.relabel(&map).unwrap()
}

#[test]
fn canonical_forms_classify_small_decorated_structures_exactly() {
    for n in 0..=3 {
        let mut classes: BTreeMap<DecoratedStructure, DecoratedStructure> = BTreeMap::new();
        for d in all_decorated(n) {
            let canon = normalize(&d);
            assert!(common::iso_exists(&d, &canon), "{d:?} is not isomorphic to its normal form");
            let first = classes.entry(canon).or_insert_with(|| d.clone());
            assert!(common::iso_exists(first, &d));
        }
        let reps: Vec<&DecoratedStructure> = classes.values().collect();
        for (i, a) in reps.iter().enumerate() {
            for b in &reps[i + 1..] {
                assert!(!common::iso_exists(a, b), "distinct normal forms for isomorphic {a:?} and {b:?}");
            }
        }
    }
}

#[test]
fn isomorphism_search_is_symmetric_and_matches_brute_force_on_small_pairs() {
    let reps: Vec<DecoratedStructure> = (0..=3)
        .flat_map(all_decorated)
        .map(|d| normalize(&d))
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let reversed = |d: &DecoratedStructure| {
        let perm: Vec<Elem> = (0..d.size()).rev().collect();
        relabel(d, &perm)
    };
    for a in &reps {
        for b in reps.iter().filter(|b| b.size() == a.size()) {
            let b = reversed(b);
            let forward = isomorphic(a, &b);
            assert_eq!(forward, isomorphic(&b, a));
            assert_eq!(forward, common::iso_exists(a, &b));
        }
    }
}

#[test]
fn up_to_iso_enumeration_is_complete_and_irredundant() {
    let fun = Arc::new(Vocabulary::new(Vec::new(), vec![Symbol::new("f", 1)]).unwrap());
    for vocab in [edge(), fun] {
        let reps = enumerate_structures(&vocab, 3, true, DEFAULT_CANDIDATE_CAP).unwrap();
        let plain: Vec<DecoratedStructure> = reps.iter().cloned().map(DecoratedStructure::plain).collect();
        for (i, a) in plain.iter().enumerate() {
            for b in &plain[i + 1..] {
                assert!(!common::iso_exists(a, b), "{a:?} listed twice");
            }
        }
        for s in enumerate_structures(&vocab, 3, false, DEFAULT_CANDIDATE_CAP).unwrap() {
            let s = DecoratedStructure::plain(s);
            let hits = plain.iter().filter(|r| common::iso_exists(r, &s)).count();
            assert_eq!(hits, 1, "{s:?}");
        }
    }
}

fn unary_function(table: &[usize]) -> Structure {
    let vocab = Arc::new(Vocabulary::new(Vec::new(), vec![Symbol::new("f", 1)]).unwrap());
    let n = table.len();
    let mut b = Structure::builder(vocab, 0..n);
    for (i, v) in table.iter().enumerate() {
        b = b.map("f", &[i], v % n);
    }
    b.build().unwrap()
}

fn decorated_strategy(max: usize) -> impl Strategy<Value = DecoratedStructure> {
    (0..=max, any::<u32>()).prop_map(|(n, bits)| decorated(n, bits))
}

proptest! {
    #[test]
    fn isomorphism_is_symmetric_at_size_four(a in decorated_strategy(4), b in decorated_strategy(4)) {
        prop_assert_eq!(isomorphic(&a, &b), isomorphic(&b, &a));
        prop_assert_eq!(isomorphic(&a, &b), common::iso_exists(&a, &b));
    }

    #[test]
    fn normal_forms_agree_with_isomorphism_at_size_four(
        a in decorated_strategy(4),
        b in decorated_strategy(4),
        perm in Just((0..4).collect::<Vec<Elem>>()).prop_shuffle(),
    ) {
        prop_assert_eq!(normalize(&a) == normalize(&b), common::iso_exists(&a, &b));
        let moved = relabel(&a, &perm[..a.size()].iter().map(|e| e + 10).collect::<Vec<_>>());
        prop_assert_eq!(normalize(&moved), normalize(&a));
        prop_assert!(isomorphic(&a, &moved));
    }

    #[test]
    fn generated_substructure_is_a_closure_operator(
        table in (1..=5usize).prop_flat_map(|n| prop::collection::vec(0..n, n)),
        a_bits in any::<u8>(),
        b_bits in any::<u8>(),
    ) {
        let s = unary_function(&table);
        let n = table.len();
        let a: BTreeSet<Elem> = (0..n).filter(|i| a_bits >> i & 1 == 1).collect();
        let b: BTreeSet<Elem> = a.iter().copied().chain((0..n).filter(|i| b_bits >> i & 1 == 1)).collect();
        let ca = s.function_closure(&a).unwrap();
        let cb = s.function_closure(&b).unwrap();
        prop_assert!(a.is_subset(&ca));
        prop_assert!(ca.is_subset(&cb));
        prop_assert_eq!(&s.function_closure(&ca).unwrap(), &ca);
        prop_assert!(s.is_function_closed(&ca));
        let g = s.generated_substructure(&a).unwrap();
        prop_assert_eq!(g.universe().iter().copied().collect::<BTreeSet<_>>(), ca);
        prop_assert!(g.is_substructure_of(&s));
    }
}
