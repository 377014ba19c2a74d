//! Finite vocabularies and finite structures.
//!
//! Elements are small nonnegative integers. A structure's universe is an
//! arbitrary finite set of them, so substructures keep the element ids of
//! the structure they live in.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::util::tuples;

pub type Elem = usize;

/// A relation or function symbol. Function symbols of arity 0 are constants.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Symbol {
    pub name: String,
    pub arity: usize,
}

impl Symbol {
    pub fn new(name: impl Into<String>, arity: usize) -> Self {
        Symbol {
            name: name.into(),
            arity,
        }
    }
}

/// A finitary relational-functional signature.
///
/// Symbols are kept sorted by name, so two vocabularies with the same symbols
/// compare equal regardless of the order they were declared in.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Vocabulary {
    relations: Vec<Symbol>,
    functions: Vec<Symbol>,
}

impl Vocabulary {
    pub fn new(relations: Vec<Symbol>, functions: Vec<Symbol>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for s in relations.iter().chain(functions.iter()) {
            if s.name.is_empty() {
                return Err(Error::Signature("empty symbol name".into()));
            }
            if !seen.insert(s.name.as_str()) {
                return Err(Error::Signature(format!("duplicate symbol `{}`", s.name)));
            }
        }
        if let Some(r) = relations.iter().find(|r| r.arity == 0) {
            return Err(Error::Signature(format!(
                "relation `{}` must have positive arity",
                r.name
            )));
        }
        let mut relations = relations;
        let mut functions = functions;
        relations.sort();
        functions.sort();
        Ok(Vocabulary {
            relations,
            functions,
        })
    }

    /// Shorthand for a purely relational vocabulary.
    pub fn relational(rels: &[(&str, usize)]) -> Result<Self> {
        Self::new(
            rels.iter().map(|(n, a)| Symbol::new(*n, *a)).collect(),
            Vec::new(),
        )
    }

    pub fn empty() -> Self {
        Vocabulary::default()
    }

    pub fn relations(&self) -> &[Symbol] {
        &self.relations
    }

    pub fn functions(&self) -> &[Symbol] {
        &self.functions
    }

    pub fn relation_index(&self, name: &str) -> Option<usize> {
        self.relations.iter().position(|s| s.name == name)
    }

    pub fn function_index(&self, name: &str) -> Option<usize> {
        self.functions.iter().position(|s| s.name == name)
    }

    pub fn relation(&self, name: &str) -> Option<&Symbol> {
        self.relations.iter().find(|s| s.name == name)
    }

    pub fn function(&self, name: &str) -> Option<&Symbol> {
        self.functions.iter().find(|s| s.name == name)
    }

    pub fn has_symbol(&self, name: &str) -> bool {
        self.relation(name).is_some() || self.function(name).is_some()
    }

    pub fn has_constants(&self) -> bool {
        self.functions.iter().any(|f| f.arity == 0)
    }

    pub fn is_relational(&self) -> bool {
        self.functions.is_empty()
    }

    pub fn is_empty(&self) -> bool {
        self.relations.is_empty() && self.functions.is_empty()
    }

    /// Every symbol of `self` occurs in `other` with the same arity and kind.
    pub fn is_subvocabulary_of(&self, other: &Vocabulary) -> bool {
        self.relations
            .iter()
            .all(|r| other.relation(&r.name) == Some(r))
            && self
                .functions
                .iter()
                .all(|f| other.function(&f.name) == Some(f))
    }

    /// Symbols of `self` that are not in `sub`.
    pub fn difference(&self, sub: &Vocabulary) -> Vocabulary {
        Vocabulary {
            relations: self
                .relations
                .iter()
                .filter(|r| sub.relation(&r.name).is_none())
                .cloned()
                .collect(),
            functions: self
                .functions
                .iter()
                .filter(|f| sub.function(&f.name).is_none())
                .cloned()
                .collect(),
        }
    }

    pub fn union(&self, other: &Vocabulary) -> Result<Vocabulary> {
        let mut rels = self.relations.clone();
        let mut funs = self.functions.clone();
        for r in &other.relations {
            match self.relation(&r.name) {
                Some(s) if s == r => {}
                Some(_) => {
                    return Err(Error::Signature(format!(
                        "relation `{}` declared with two arities",
                        r.name
                    )))
                }
                None => rels.push(r.clone()),
            }
        }
        for f in &other.functions {
            match self.function(&f.name) {
                Some(s) if s == f => {}
                Some(_) => {
                    return Err(Error::Signature(format!(
                        "function `{}` declared with two arities",
                        f.name
                    )))
                }
                None => funs.push(f.clone()),
            }
        }
        Vocabulary::new(rels, funs)
    }

    /// A copy of `self` with one more relation symbol.
    pub fn with_relation(&self, name: &str, arity: usize) -> Result<Vocabulary> {
        let mut rels = self.relations.clone();
        rels.push(Symbol::new(name, arity));
        Vocabulary::new(rels, self.functions.clone())
    }

    /// Drops the named symbols.
    pub fn without(&self, names: &[&str]) -> Vocabulary {
        Vocabulary {
            relations: self
                .relations
                .iter()
                .filter(|r| !names.contains(&r.name.as_str()))
                .cloned()
                .collect(),
            functions: self
                .functions
                .iter()
                .filter(|f| !names.contains(&f.name.as_str()))
                .cloned()
                .collect(),
        }
    }
}

impl fmt::Display for Vocabulary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        let mut first = true;
        for r in &self.relations {
            if !first {
                write!(f, ", ")?;
            }
            first = false;
            write!(f, "{}/{}", r.name, r.arity)?;
        }
        for g in &self.functions {
            if !first {
                write!(f, ", ")?;
            }
            first = false;
            write!(f, "{}()/{}", g.name, g.arity)?;
        }
        write!(f, "}}")
    }
}

/// A finite structure: a universe of element ids plus interpretations.
///
/// Relation `i` of the vocabulary is interpreted by `relations[i]`, function
/// `j` by the total table `functions[j]`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Structure {
    vocab: Arc<Vocabulary>,
    universe: Vec<Elem>,
    relations: Vec<BTreeSet<Vec<Elem>>>,
    functions: Vec<BTreeMap<Vec<Elem>, Elem>>,
}

impl Structure {
    /// Builds and validates a structure.
    pub fn new(
        vocab: Arc<Vocabulary>,
        universe: impl IntoIterator<Item = Elem>,
        relations: Vec<BTreeSet<Vec<Elem>>>,
        functions: Vec<BTreeMap<Vec<Elem>, Elem>>,
    ) -> Result<Self> {
        let universe: BTreeSet<Elem> = universe.into_iter().collect();
        let universe: Vec<Elem> = universe.into_iter().collect();
        if relations.len() != vocab.relations.len() || functions.len() != vocab.functions.len() {
            return Err(Error::Signature(
                "interpretation count does not match vocabulary".into(),
            ));
        }
        let s = Structure {
            vocab,
            universe,
            relations,
            functions,
        };
        s.validate()?;
        Ok(s)
    }

    fn validate(&self) -> Result<()> {
        if self.universe.is_empty() && self.vocab.has_constants() {
            return Err(Error::Domain(
                "empty universe with constant symbols in the vocabulary".into(),
            ));
        }
        for (sym, tuples) in self.vocab.relations.iter().zip(&self.relations) {
            for t in tuples {
                if t.len() != sym.arity {
                    return Err(Error::Signature(format!(
                        "tuple {:?} has wrong arity for `{}`/{}",
                        t, sym.name, sym.arity
                    )));
                }
                if let Some(e) = t.iter().find(|e| !self.contains(**e)) {
                    return Err(Error::Domain(format!(
                        "element {} of `{}` tuple {:?} is outside the universe",
                        e, sym.name, t
                    )));
                }
            }
        }
        for (sym, table) in self.vocab.functions.iter().zip(&self.functions) {
            let expected = self.universe.len().pow(sym.arity as u32);
            for (args, v) in table {
                if args.len() != sym.arity {
                    return Err(Error::Signature(format!(
                        "argument tuple {:?} has wrong arity for `{}`/{}",
                        args, sym.name, sym.arity
                    )));
                }
                if !args.iter().all(|e| self.contains(*e)) || !self.contains(*v) {
                    return Err(Error::Domain(format!(
                        "entry {:?} -> {} of `{}` leaves the universe",
                        args, v, sym.name
                    )));
                }
            }
            if table.len() != expected {
                return Err(Error::Domain(format!(
                    "function `{}` is not total ({} of {} entries)",
                    sym.name,
                    table.len(),
                    expected
                )));
            }
        }
        Ok(())
    }

    /// Starts a builder over the given universe.
    pub fn builder(vocab: Arc<Vocabulary>, universe: impl IntoIterator<Item = Elem>) -> Builder {
        Builder {
            relations: vec![BTreeSet::new(); vocab.relations.len()],
            functions: vec![BTreeMap::new(); vocab.functions.len()],
            universe: universe.into_iter().collect(),
            vocab,
            error: None,
        }
    }

    /// A bare set `{0, …, n-1}` in the empty vocabulary.
    pub fn bare(n: usize) -> Structure {
        Structure {
            vocab: Arc::new(Vocabulary::empty()),
            universe: (0..n).collect(),
            relations: Vec::new(),
            functions: Vec::new(),
        }
    }

    pub fn vocab(&self) -> &Arc<Vocabulary> {
        &self.vocab
    }

    pub fn universe(&self) -> &[Elem] {
        &self.universe
    }

    pub fn size(&self) -> usize {
        self.universe.len()
    }

    pub fn contains(&self, e: Elem) -> bool {
        self.universe.binary_search(&e).is_ok()
    }

    /// True when the universe is `{0, …, size-1}`.
    pub fn is_initial_segment(&self) -> bool {
        self.universe.iter().enumerate().all(|(i, e)| i == *e)
    }

    pub fn relation_tuples(&self, index: usize) -> &BTreeSet<Vec<Elem>> {
        &self.relations[index]
    }

    pub fn relation_by_name(&self, name: &str) -> Option<&BTreeSet<Vec<Elem>>> {
        self.vocab.relation_index(name).map(|i| &self.relations[i])
    }

    pub fn function_table(&self, index: usize) -> &BTreeMap<Vec<Elem>, Elem> {
        &self.functions[index]
    }

    pub fn holds(&self, rel: usize, args: &[Elem]) -> bool {
        self.relations[rel].contains(args)
    }

    pub fn apply(&self, fun: usize, args: &[Elem]) -> Option<Elem> {
        self.functions[fun].get(args).copied()
    }

    /// Restricts the interpretation to the symbols of `sub`.
    pub fn reduct(&self, sub: &Arc<Vocabulary>) -> Result<Structure> {
        let mut relations = Vec::with_capacity(sub.relations.len());
        for r in &sub.relations {
            match self.vocab.relation_index(&r.name) {
                Some(i) if self.vocab.relations[i].arity == r.arity => {
                    relations.push(self.relations[i].clone())
                }
                Some(_) => {
                    return Err(Error::Signature(format!(
                        "arity mismatch for relation `{}`",
                        r.name
                    )))
                }
                None => {
                    return Err(Error::Signature(format!(
                        "relation `{}` is not in {}",
                        r.name, self.vocab
                    )))
                }
            }
        }
        let mut functions = Vec::with_capacity(sub.functions.len());
        for f in &sub.functions {
            match self.vocab.function_index(&f.name) {
                Some(i) if self.vocab.functions[i].arity == f.arity => {
                    functions.push(self.functions[i].clone())
                }
                Some(_) => {
                    return Err(Error::Signature(format!(
                        "arity mismatch for function `{}`",
                        f.name
                    )))
                }
                None => {
                    return Err(Error::Signature(format!(
                        "function `{}` is not in {}",
                        f.name, self.vocab
                    )))
                }
            }
        }
        Ok(Structure {
            vocab: sub.clone(),
            universe: self.universe.clone(),
            relations,
            functions,
        })
    }

    /// Smallest superset of `seed` closed under every function and constant.
    pub fn function_closure(&self, seed: &BTreeSet<Elem>) -> Result<BTreeSet<Elem>> {
        if let Some(e) = seed.iter().find(|e| !self.contains(**e)) {
            return Err(Error::Domain(format!("element {e} is not in the universe")));
        }
        let mut set = seed.clone();
        for (sym, table) in self.vocab.functions.iter().zip(&self.functions) {
            if sym.arity == 0 {
                set.extend(table.values().copied());
            }
        }
        // one-step application until nothing new appears
        loop {
            let mut added = Vec::new();
            for (sym, table) in self.vocab.functions.iter().zip(&self.functions) {
                if sym.arity == 0 {
                    continue;
                }
                let pool: Vec<Elem> = set.iter().copied().collect();
                for args in tuples(&pool, sym.arity) {
                    let v = table[&args];
                    if !set.contains(&v) {
                        added.push(v);
                    }
                }
            }
            if added.is_empty() {
                return Ok(set);
            }
            set.extend(added);
        }
    }

    /// Whether `set` is closed under all functions and contains all constants.
    pub fn is_function_closed(&self, set: &BTreeSet<Elem>) -> bool {
        for (sym, table) in self.vocab.functions.iter().zip(&self.functions) {
            if sym.arity == 0 {
                if table.values().any(|v| !set.contains(v)) {
                    return false;
                }
                continue;
            }
            let pool: Vec<Elem> = set.iter().copied().collect();
            for args in tuples(&pool, sym.arity) {
                if !set.contains(&table[&args]) {
                    return false;
                }
            }
        }
        true
    }

    /// The induced substructure on `set`, or `None` when `set` is not closed
    /// under the functions (no substructure has that universe).
    pub fn induced(&self, set: &BTreeSet<Elem>) -> Result<Option<Structure>> {
        if let Some(e) = set.iter().find(|e| !self.contains(**e)) {
            return Err(Error::Domain(format!("element {e} is not in the universe")));
        }
        if set.is_empty() && self.vocab.has_constants() {
            return Ok(None);
        }
        if !self.is_function_closed(set) {
            return Ok(None);
        }
        Ok(Some(self.restrict_unchecked(set)))
    }

    pub(crate) fn restrict_unchecked(&self, set: &BTreeSet<Elem>) -> Structure {
        let relations = self
            .relations
            .iter()
            .map(|ts| {
                ts.iter()
                    .filter(|t| t.iter().all(|e| set.contains(e)))
                    .cloned()
                    .collect()
            })
            .collect();
        let functions = self
            .functions
            .iter()
            .map(|tab| {
                tab.iter()
                    .filter(|(args, _)| args.iter().all(|e| set.contains(e)))
                    .map(|(a, v)| (a.clone(), *v))
                    .collect()
            })
            .collect();
        Structure {
            vocab: self.vocab.clone(),
            universe: set.iter().copied().collect(),
            relations,
            functions,
        }
    }

    /// The substructure generated by `seed`.
    pub fn generated_substructure(&self, seed: &BTreeSet<Elem>) -> Result<Structure> {
        let set = self.function_closure(seed)?;
        Ok(self.restrict_unchecked(&set))
    }

    /// `self ⊆ other`: same vocabulary, universe contained, and `self` is the
    /// induced substructure of `other` on its universe.
    pub fn is_substructure_of(&self, other: &Structure) -> bool {
        if self.vocab != other.vocab || !self.universe.iter().all(|e| other.contains(*e)) {
            return false;
        }
        let set: BTreeSet<Elem> = self.universe.iter().copied().collect();
        if !other.is_function_closed(&set) {
            return false;
        }
        *self == other.restrict_unchecked(&set)
    }

    /// Renames elements along an injective map defined on the universe.
    pub fn relabel(&self, map: &BTreeMap<Elem, Elem>) -> Result<Structure> {
        let image: BTreeSet<Elem> = self
            .universe
            .iter()
            .map(|e| {
                map.get(e)
                    .copied()
                    .ok_or_else(|| Error::Domain(format!("relabeling misses element {e}")))
            })
            .collect::<Result<_>>()?;
        if image.len() != self.universe.len() {
            return Err(Error::Domain("relabeling is not injective".into()));
        }
        let relations = self
            .relations
            .iter()
            .map(|ts| ts.iter().map(|t| t.iter().map(|e| map[e]).collect()).collect())
            .collect();
        let functions = self
            .functions
            .iter()
            .map(|tab| {
                tab.iter()
                    .map(|(a, v)| (a.iter().map(|e| map[e]).collect(), map[v]))
                    .collect()
            })
            .collect();
        Ok(Structure {
            vocab: self.vocab.clone(),
            universe: image.into_iter().collect(),
            relations,
            functions,
        })
    }

    /// Order-preserving relabeling onto `{0, …, size-1}`; returns the map used.
    pub fn compact(&self) -> (Structure, BTreeMap<Elem, Elem>) {
        let map: BTreeMap<Elem, Elem> = self
            .universe
            .iter()
            .enumerate()
            .map(|(i, e)| (*e, i))
            .collect();
        (self.relabel(&map).expect("compaction is a bijection"), map)
    }

    /// Same universe, interpretations extended to a larger vocabulary.
    /// Symbols not listed in `extra_rels`/`extra_funs` must already be interpreted.
    pub fn expand(
        &self,
        vocab: Arc<Vocabulary>,
        extra_rels: &BTreeMap<String, BTreeSet<Vec<Elem>>>,
        extra_funs: &BTreeMap<String, BTreeMap<Vec<Elem>, Elem>>,
    ) -> Result<Structure> {
        let mut relations = Vec::with_capacity(vocab.relations.len());
        for r in &vocab.relations {
            if let Some(ts) = extra_rels.get(&r.name) {
                relations.push(ts.clone());
            } else if let Some(i) = self.vocab.relation_index(&r.name) {
                relations.push(self.relations[i].clone());
            } else {
                return Err(Error::Signature(format!(
                    "no interpretation for relation `{}`",
                    r.name
                )));
            }
        }
        let mut functions = Vec::with_capacity(vocab.functions.len());
        for f in &vocab.functions {
            if let Some(tab) = extra_funs.get(&f.name) {
                functions.push(tab.clone());
            } else if let Some(i) = self.vocab.function_index(&f.name) {
                functions.push(self.functions[i].clone());
            } else {
                return Err(Error::Signature(format!(
                    "no interpretation for function `{}`",
                    f.name
                )));
            }
        }
        Structure::new(vocab, self.universe.clone(), relations, functions)
    }
}

/// Incremental construction of a [`Structure`]; errors surface at `build`.
pub struct Builder {
    vocab: Arc<Vocabulary>,
    universe: Vec<Elem>,
    relations: Vec<BTreeSet<Vec<Elem>>>,
    functions: Vec<BTreeMap<Vec<Elem>, Elem>>,
    error: Option<Error>,
}

impl Builder {
    pub fn tuple(mut self, rel: &str, args: &[Elem]) -> Self {
        match self.vocab.relation_index(rel) {
            Some(i) => {
                self.relations[i].insert(args.to_vec());
            }
            None => {
                self.error
                    .get_or_insert(Error::Signature(format!("unknown relation `{rel}`")));
            }
        }
        self
    }

    pub fn tuples<'a>(mut self, rel: &str, args: impl IntoIterator<Item = &'a [Elem]>) -> Self {
        for a in args {
            self = self.tuple(rel, a);
        }
        self
    }

    pub fn map(mut self, fun: &str, args: &[Elem], value: Elem) -> Self {
        match self.vocab.function_index(fun) {
            Some(i) => {
                self.functions[i].insert(args.to_vec(), value);
            }
            None => {
                self.error
                    .get_or_insert(Error::Signature(format!("unknown function `{fun}`")));
            }
        }
        self
    }

    pub fn constant(self, name: &str, value: Elem) -> Self {
        self.map(name, &[], value)
    }

    pub fn build(self) -> Result<Structure> {
        if let Some(e) = self.error {
            return Err(e);
        }
        Structure::new(self.vocab, self.universe, self.relations, self.functions)
    }
}

/// A structure together with an ordered list of subsets of its universe.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DecoratedStructure {
    pub base: Structure,
    pub subsets: Vec<BTreeSet<Elem>>,
}

impl DecoratedStructure {
    pub fn new(base: Structure, subsets: Vec<BTreeSet<Elem>>) -> Result<Self> {
        for (i, s) in subsets.iter().enumerate() {
            if let Some(e) = s.iter().find(|e| !base.contains(**e)) {
                return Err(Error::Domain(format!(
                    "subset {i} contains {e}, which is outside the universe"
                )));
            }
        }
        Ok(DecoratedStructure { base, subsets })
    }

    pub fn plain(base: Structure) -> Self {
        DecoratedStructure {
            base,
            subsets: Vec::new(),
        }
    }

    pub fn size(&self) -> usize {
        self.base.size()
    }

    pub fn relabel(&self, map: &BTreeMap<Elem, Elem>) -> Result<DecoratedStructure> {
        Ok(DecoratedStructure {
            base: self.base.relabel(map)?,
            subsets: self
                .subsets
                .iter()
                .map(|s| s.iter().map(|e| map[e]).collect())
                .collect(),
        })
    }
}
