//! The example classes, built programmatically. The files under `corpus/`
//! are printed from these.

use std::sync::Arc;

use crate::class::{DefinedSpec, ExplicitSpec, ModelClassSpec};
use crate::parse::parse_formula_in;
use crate::structure::{Structure, Vocabulary};
use crate::syntax::{Formula, Kappa, QStruct, Theory};
use crate::translate::univ_gen_rewrite;

/// Largest linear order in the corpus file.
pub const CHAIN_BOUND: usize = 5;
/// Largest block, and largest predicate, in the corpus files.
pub const BLOCK_BOUND: usize = 3;

fn universal(vocab: &Vocabulary, text: &str) -> Formula {
    let s = parse_formula_in(text, vocab).expect("corpus sentence parses");
    univ_gen_rewrite(&s).expect("corpus sentence is universal")
}

fn chain(n: usize) -> Structure {
    let v = Arc::new(Vocabulary::relational(&[("<", 2)]).expect("valid"));
    let mut b = Structure::builder(v, 0..n);
    for i in 0..n {
        for j in i + 1..n {
            b = b.tuple("<", &[i, j]);
        }
    }
    b.build().expect("valid chain")
}

fn defined(name: &str, vocab: Vocabulary, sentences: Vec<Formula>) -> ModelClassSpec {
    let theory = Theory::new(name, Arc::new(vocab), sentences).expect("corpus theory is well formed");
    ModelClassSpec::Defined(DefinedSpec::new(theory, Kappa::Unbounded, 4))
}

/// Strict linear orders in which every element has fewer than `bound`
/// predecessors; strong submodels are initial segments.
pub fn linear_orders(bound: usize) -> ModelClassSpec {
    let v = Vocabulary::relational(&[("<", 2)]).expect("valid");
    let mut sentences = vec![
        universal(&v, "(forall z0 (not (rel < z0 z0)))"),
        universal(&v, "(forall (z0 z1) (or (rel < z0 z1) (= z0 z1) (rel < z1 z0)))"),
        universal(
            &v,
            "(forall (z0 z1 z2) (or (not (rel < z0 z1)) (not (rel < z1 z2)) (rel < z0 z2)))",
        ),
    ];
    let below = Formula::atom_vars("<", &["y", "x"]);
    let disjuncts = (0..bound)
        .map(|n| Formula::qstruct(QStruct::simple(chain(n), "y", below.clone())))
        .collect();
    sentences.push(Formula::forall("x", Formula::or(disjuncts)));
    defined("linear-orders", v, sentences)
}

/// Loopless undirected graphs without triangles, under induced subgraph.
pub fn triangle_free_graphs() -> ModelClassSpec {
    let v = Vocabulary::relational(&[("E", 2)]).expect("valid");
    let sentences = vec![
        universal(&v, "(forall z0 (not (rel E z0 z0)))"),
        universal(&v, "(forall (z0 z1) (or (not (rel E z0 z1)) (rel E z1 z0)))"),
        universal(
            &v,
            "(forall (z0 z1 z2) (not (and (rel E z0 z1) (rel E z1 z2) (rel E z0 z2))))",
        ),
    ];
    defined("triangle-free-graphs", v, sentences)
}

/// A unary predicate with between one and three elements; strong submodels
/// keep the whole predicate.
pub fn frozen_predicate() -> ModelClassSpec {
    let v = Vocabulary::relational(&[("P", 1)]).expect("valid");
    let p = Formula::atom_vars("P", &["x"]);
    let disjuncts = (1..=BLOCK_BOUND)
        .map(|j| Formula::qstruct(QStruct::simple(Structure::bare(j), "x", p.clone())))
        .collect();
    defined("frozen-predicate", v, vec![Formula::or(disjuncts)])
}

/// Equivalence relations with blocks of at most three elements; strong
/// submodels are unions of whole blocks.
pub fn bounded_blocks() -> ModelClassSpec {
    let v = Vocabulary::relational(&[("~", 2)]).expect("valid");
    let mut sentences = vec![
        universal(&v, "(forall z0 (rel ~ z0 z0))"),
        universal(&v, "(forall (z0 z1) (or (not (rel ~ z0 z1)) (rel ~ z1 z0)))"),
        universal(
            &v,
            "(forall (z0 z1 z2) (or (not (rel ~ z0 z1)) (not (rel ~ z1 z2)) (rel ~ z0 z2)))",
        ),
    ];
    let block = Formula::atom_vars("~", &["x", "z"]);
    let disjuncts = (1..=BLOCK_BOUND)
        .map(|j| Formula::qstruct(QStruct::simple(Structure::bare(j), "x", block.clone())))
        .collect();
    sentences.push(Formula::forall("z", Formula::or(disjuncts)));
    defined("bounded-blocks", v, sentences)
}

/// Bare sets of sizes 1, 2, 3 where both smaller sets sit strongly in the
/// largest but not in each other: coherence fails.
pub fn broken_coherence() -> ModelClassSpec {
    let members = (1..=3).map(Structure::bare).collect();
    ModelClassSpec::Explicit(
        ExplicitSpec::new("broken-coherence", Arc::new(Vocabulary::empty()), members, [(0, 2), (1, 2)])
            .expect("valid table"),
    )
}

/// Bare sets of sizes 3 and 4 with every 3-subset strong: two 3-subsets meet
/// in a set that is no strong submodel.
pub fn no_intersections() -> ModelClassSpec {
    let members = vec![Structure::bare(3), Structure::bare(4)];
    ModelClassSpec::Explicit(
        ExplicitSpec::new("no-intersections", Arc::new(Vocabulary::empty()), members, [(0, 1)])
            .expect("valid table"),
    )
}

/// The four classes defined by `∀Q^struct` theories.
pub fn defined_classes() -> Vec<ModelClassSpec> {
    vec![
        linear_orders(CHAIN_BOUND),
        triangle_free_graphs(),
        frozen_predicate(),
        bounded_blocks(),
    ]
}

/// Every corpus class, defined ones first.
pub fn all_classes() -> Vec<ModelClassSpec> {
    let mut out = defined_classes();
    out.push(broken_coherence());
    out.push(no_intersections());
    out
}
