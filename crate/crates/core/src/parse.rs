//! Readers for structures, formulas and theories.
//!
//! ```text
//! structure := (structure (vocab SYM*)? (universe N | (E*)) (rel R (E*)*)* (fun f (E* V)*)* (const c V)*)
//! SYM       := (rel R arity) | (fun f arity) | (const c)
//! decorated := (decorated structure (subsets (E*)*))
//! term      := var | (f term*)                ; constants are (c)
//! formula   := (rel R term*) | (= term term) | (not formula)
//!            | (and formula+) | (or formula+)
//!            | (exists var formula) | (exists (var+) formula) | likewise forall
//!            | (qstruct structure var formula)
//!            | (qstruct structure (subsets (E*)*) var (var*) formula (formula*))
//! theory    := (theory (name text)? (vocab SYM*)? (sentence formula)*)
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::sexp::{parse_one, Sexp};
use crate::structure::{DecoratedStructure, Elem, Structure, Symbol, Vocabulary};
use crate::syntax::{check_formula, Formula, QStruct, Term, Theory};

/// Re-attaches a position to errors raised while building a value.
fn at(s: &Sexp, e: Error) -> Error {
    match e {
        Error::Parse { .. } => e,
        other => s.err(other.to_string()),
    }
}

pub fn vocab_from_sexp(s: &Sexp) -> Result<Vocabulary> {
    let mut rels = Vec::new();
    let mut funs = Vec::new();
    for item in s.tagged("vocab")? {
        let parts = item.expect_list("a symbol declaration")?;
        let kind = parts
            .first()
            .ok_or_else(|| item.err("empty symbol declaration"))?
            .expect_atom("`rel`, `fun` or `const`")?;
        match (kind, parts.len()) {
            ("rel", 3) => rels.push(Symbol::new(
                parts[1].expect_text("a relation name")?,
                parts[2].expect_usize("an arity")?,
            )),
            ("fun", 3) => funs.push(Symbol::new(
                parts[1].expect_text("a function name")?,
                parts[2].expect_usize("an arity")?,
            )),
            ("const", 2) => funs.push(Symbol::new(parts[1].expect_text("a constant name")?, 0)),
            _ => return Err(item.err(format!("malformed `{kind}` declaration"))),
        }
    }
    Vocabulary::new(rels, funs).map_err(|e| at(s, e))
}

fn elem_list(s: &Sexp, what: &str) -> Result<Vec<Elem>> {
    s.expect_list(what)?
        .iter()
        .map(|e| e.expect_usize("an element"))
        .collect()
}

pub fn structure_from_sexp(s: &Sexp) -> Result<Structure> {
    let items = s.tagged("structure")?;
    let mut vocab = Vocabulary::empty();
    let mut universe: Option<Vec<Elem>> = None;
    let mut rest = Vec::new();
    for item in items {
        match item.head() {
            Some("vocab") => vocab = vocab_from_sexp(item)?,
            Some("universe") => {
                let parts = item.tagged("universe")?;
                if parts.len() != 1 {
                    return Err(item.err("`universe` takes a size or an element list"));
                }
                if universe.is_some() {
                    return Err(item.err("duplicate `universe`"));
                }
                universe = Some(match parts[0].as_list() {
                    Some(_) => elem_list(&parts[0], "an element list")?,
                    None => (0..parts[0].expect_usize("a universe size")?).collect(),
                });
            }
            Some("rel" | "fun" | "const") => rest.push(item),
            _ => return Err(item.err("expected `vocab`, `universe`, `rel`, `fun` or `const`")),
        }
    }
    let universe = universe.ok_or_else(|| s.err("structure has no `universe`"))?;
    let vocab = Arc::new(vocab);
    let mut relations = vec![BTreeSet::new(); vocab.relations().len()];
    let mut functions = vec![BTreeMap::new(); vocab.functions().len()];
    let mut seen = BTreeSet::new();
    for item in rest {
        let parts = item.expect_list("an interpretation")?;
        let kind = parts[0].as_atom().unwrap_or_default();
        let sym = parts
            .get(1)
            .ok_or_else(|| item.err("interpretation without a symbol"))?
            .expect_text("a symbol name")?;
        if !seen.insert(sym.to_string()) {
            return Err(item.err(format!("`{sym}` is interpreted twice")));
        }
        match kind {
            "rel" => {
                let i = vocab
                    .relation_index(sym)
                    .ok_or_else(|| item.err(format!("undeclared relation `{sym}`")))?;
                for t in &parts[2..] {
                    let tuple = elem_list(t, "a tuple")?;
                    if tuple.len() != vocab.relations()[i].arity {
                        return Err(t.err(format!("tuple has wrong arity for `{sym}`")));
                    }
                    relations[i].insert(tuple);
                }
            }
            "fun" => {
                let i = vocab
                    .function_index(sym)
                    .filter(|i| vocab.functions()[*i].arity > 0)
                    .ok_or_else(|| item.err(format!("undeclared function `{sym}`")))?;
                for t in &parts[2..] {
                    let mut entry = elem_list(t, "a table entry")?;
                    if entry.len() != vocab.functions()[i].arity + 1 {
                        return Err(t.err(format!("table entry has wrong length for `{sym}`")));
                    }
                    let v = entry.pop().unwrap();
                    if functions[i].insert(entry, v).is_some() {
                        return Err(t.err(format!("`{sym}` has two values at one argument")));
                    }
                }
            }
            _ => {
                let i = vocab
                    .function_index(sym)
                    .filter(|i| vocab.functions()[*i].arity == 0)
                    .ok_or_else(|| item.err(format!("undeclared constant `{sym}`")))?;
                if parts.len() != 3 {
                    return Err(item.err("`const` takes a name and a value"));
                }
                functions[i].insert(Vec::new(), parts[2].expect_usize("an element")?);
            }
        }
    }
    Structure::new(vocab, universe, relations, functions).map_err(|e| at(s, e))
}

fn subsets_from_sexp(s: &Sexp) -> Result<Vec<BTreeSet<Elem>>> {
    s.tagged("subsets")?
        .iter()
        .map(|x| elem_list(x, "a subset").map(|v| v.into_iter().collect()))
        .collect()
}

pub fn decorated_from_sexp(s: &Sexp) -> Result<DecoratedStructure> {
    let items = s.tagged("decorated")?;
    let (base, subsets) = match items {
        [b] => (structure_from_sexp(b)?, Vec::new()),
        [b, subs] => (structure_from_sexp(b)?, subsets_from_sexp(subs)?),
        _ => return Err(s.err("`decorated` takes a structure and a subset list")),
    };
    DecoratedStructure::new(base, subsets).map_err(|e| at(s, e))
}

pub fn term_from_sexp(s: &Sexp) -> Result<Term> {
    match s.as_list() {
        None => Ok(Term::Var(s.expect_text("a variable")?.to_string())),
        Some([]) => Err(s.err("empty term")),
        Some([f, args @ ..]) => Ok(Term::App(
            f.expect_text("a function symbol")?.to_string(),
            args.iter().map(term_from_sexp).collect::<Result<_>>()?,
        )),
    }
}

fn var(s: &Sexp) -> Result<String> {
    Ok(s.expect_text("a variable")?.to_string())
}

pub fn formula_from_sexp(s: &Sexp) -> Result<Formula> {
    let items = s.expect_list("a formula")?;
    let head = items
        .first()
        .ok_or_else(|| s.err("empty formula"))?
        .expect_atom("a connective")?;
    let args = &items[1..];
    let arity = |n: usize| {
        if args.len() == n {
            Ok(())
        } else {
            Err(s.err(format!("`{head}` takes {n} arguments, found {}", args.len())))
        }
    };
    match head {
        "rel" => {
            let r = args
                .first()
                .ok_or_else(|| s.err("`rel` without a relation symbol"))?
                .expect_text("a relation symbol")?;
            Ok(Formula::Atom(
                r.to_string(),
                args[1..].iter().map(term_from_sexp).collect::<Result<_>>()?,
            ))
        }
        "=" => {
            arity(2)?;
            Ok(Formula::Eq(term_from_sexp(&args[0])?, term_from_sexp(&args[1])?))
        }
        "not" => {
            arity(1)?;
            Ok(Formula::not(formula_from_sexp(&args[0])?))
        }
        "and" | "or" => {
            if args.is_empty() {
                return Err(s.err(format!("`{head}` needs at least one operand")));
            }
            let fs = args.iter().map(formula_from_sexp).collect::<Result<Vec<_>>>()?;
            Ok(if head == "and" {
                Formula::And(fs)
            } else {
                Formula::Or(fs)
            })
        }
        "exists" | "forall" => {
            arity(2)?;
            let vars: Vec<String> = match args[0].as_list() {
                Some(vs) if vs.is_empty() => return Err(args[0].err("empty variable list")),
                Some(vs) => vs.iter().map(var).collect::<Result<_>>()?,
                None => vec![var(&args[0])?],
            };
            let body = formula_from_sexp(&args[1])?;
            Ok(if head == "exists" {
                Formula::exists_many(&vars, body)
            } else {
                Formula::forall_many(&vars, body)
            })
        }
        "qstruct" => {
            let q = match args {
                [target, x, phi] => QStruct::new(
                    DecoratedStructure::plain(structure_from_sexp(target)?),
                    var(x)?,
                    Vec::new(),
                    formula_from_sexp(phi)?,
                    Vec::new(),
                ),
                [target, subsets, x, ys, phi, psis] => {
                    let base = structure_from_sexp(target)?;
                    let subsets = subsets_from_sexp(subsets)?;
                    let target = DecoratedStructure::new(base, subsets).map_err(|e| at(s, e))?;
                    let ys = ys
                        .expect_list("a list of bound variables")?
                        .iter()
                        .map(var)
                        .collect::<Result<_>>()?;
                    let psis = psis
                        .expect_list("a list of side formulas")?
                        .iter()
                        .map(formula_from_sexp)
                        .collect::<Result<_>>()?;
                    QStruct::new(target, var(x)?, ys, formula_from_sexp(phi)?, psis)
                }
                _ => return Err(s.err("`qstruct` takes 3 or 6 arguments")),
            };
            Ok(Formula::qstruct(q.map_err(|e| at(s, e))?))
        }
        other => Err(s.err(format!("unknown connective `{other}`"))),
    }
}

/// Parses a formula and checks nothing beyond its own shape.
pub fn parse_formula(text: &str) -> Result<Formula> {
    formula_from_sexp(&parse_one(text)?)
}

/// Parses a formula and checks it against `vocab`.
pub fn parse_formula_in(text: &str, vocab: &Vocabulary) -> Result<Formula> {
    let f = parse_formula(text)?;
    check_formula(&f, vocab)?;
    Ok(f)
}

pub fn parse_structure(text: &str) -> Result<Structure> {
    structure_from_sexp(&parse_one(text)?)
}

/// Accepts either `(decorated …)` or a plain `(structure …)`.
pub fn parse_decorated(text: &str) -> Result<DecoratedStructure> {
    let s = parse_one(text)?;
    match s.head() {
        Some("structure") => Ok(DecoratedStructure::plain(structure_from_sexp(&s)?)),
        _ => decorated_from_sexp(&s),
    }
}

fn note_symbol(
    table: &mut BTreeMap<String, (bool, usize)>,
    name: &str,
    is_rel: bool,
    arity: usize,
) -> Result<()> {
    match table.get(name) {
        Some(&(r, a)) if r != is_rel || a != arity => Err(Error::Arity(format!(
            "symbol `{name}` is used inconsistently"
        ))),
        Some(_) => Ok(()),
        None => {
            table.insert(name.to_string(), (is_rel, arity));
            Ok(())
        }
    }
}

fn note_term(table: &mut BTreeMap<String, (bool, usize)>, t: &Term) -> Result<()> {
    if let Term::App(f, args) = t {
        note_symbol(table, f, false, args.len())?;
        for a in args {
            note_term(table, a)?;
        }
    }
    Ok(())
}

/// The smallest vocabulary in which every formula is well formed.
pub fn infer_vocab(fs: &[Formula]) -> Result<Vocabulary> {
    let mut table = BTreeMap::new();
    let mut err = None;
    for f in fs {
        f.walk(&mut |g| {
            if err.is_some() {
                return;
            }
            let r = match g {
                Formula::Atom(r, args) => note_symbol(&mut table, r, true, args.len())
                    .and_then(|_| args.iter().try_for_each(|t| note_term(&mut table, t))),
                Formula::Eq(a, b) => note_term(&mut table, a).and_then(|_| note_term(&mut table, b)),
                Formula::QStruct(q) => {
                    let v = q.sub_vocab();
                    v.relations()
                        .iter()
                        .try_for_each(|s| note_symbol(&mut table, &s.name, true, s.arity))
                        .and_then(|_| {
                            v.functions()
                                .iter()
                                .try_for_each(|s| note_symbol(&mut table, &s.name, false, s.arity))
                        })
                }
                _ => Ok(()),
            };
            if let Err(e) = r {
                err = Some(e);
            }
        });
    }
    if let Some(e) = err {
        return Err(e);
    }
    let (rels, funs): (Vec<_>, Vec<_>) = table.into_iter().partition(|(_, (r, _))| *r);
    Vocabulary::new(
        rels.into_iter().map(|(n, (_, a))| Symbol::new(n, a)).collect(),
        funs.into_iter().map(|(n, (_, a))| Symbol::new(n, a)).collect(),
    )
}

pub fn theory_from_sexp(s: &Sexp) -> Result<Theory> {
    let items = s.tagged("theory")?;
    let mut name = "unnamed".to_string();
    let mut vocab = None;
    let mut sentences = Vec::new();
    for item in items {
        match item.head() {
            Some("name") => match item.tagged("name")? {
                [n] => name = n.expect_text("a theory name")?.to_string(),
                _ => return Err(item.err("`name` takes one argument")),
            },
            Some("vocab") => vocab = Some(vocab_from_sexp(item)?),
            Some("sentence") => match item.tagged("sentence")? {
                [f] => sentences.push((item, formula_from_sexp(f)?)),
                _ => return Err(item.err("`sentence` takes one formula")),
            },
            _ => return Err(item.err("expected `name`, `vocab` or `sentence`")),
        }
    }
    let vocab = match vocab {
        Some(v) => v,
        None => {
            let fs: Vec<Formula> = sentences.iter().map(|(_, f)| f.clone()).collect();
            infer_vocab(&fs).map_err(|e| at(s, e))?
        }
    };
    for (item, f) in &sentences {
        check_formula(f, &vocab).map_err(|e| at(item, e))?;
        if !f.is_sentence() {
            return Err(item.err(format!("free variables {:?} in a sentence", f.free_vars())));
        }
    }
    Theory::new(name, Arc::new(vocab), sentences.into_iter().map(|(_, f)| f).collect())
}

pub fn parse_theory(text: &str) -> Result<Theory> {
    theory_from_sexp(&parse_one(text)?)
}
