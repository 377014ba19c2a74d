//! Printers for the s-expression formats. Output reparses to equal values.

use std::fmt::Write as _;

use crate::sexp::is_atom_text;
use crate::structure::{DecoratedStructure, Elem, Structure, Vocabulary};
use crate::syntax::{Formula, QStruct, Term, Theory};

/// A name as a bare atom when possible, otherwise a quoted string.
pub fn name(s: &str) -> String {
    if is_atom_text(s) {
        s.to_string()
    } else {
        quote(s)
    }
}

pub fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

fn elems(t: &[Elem]) -> String {
    let parts: Vec<String> = t.iter().map(|e| e.to_string()).collect();
    format!("({})", parts.join(" "))
}

pub fn print_vocab(v: &Vocabulary) -> String {
    let mut out = String::from("(vocab");
    for r in v.relations() {
        let _ = write!(out, " (rel {} {})", name(&r.name), r.arity);
    }
    for f in v.functions() {
        if f.arity == 0 {
            let _ = write!(out, " (const {})", name(&f.name));
        } else {
            let _ = write!(out, " (fun {} {})", name(&f.name), f.arity);
        }
    }
    out.push(')');
    out
}

pub fn print_structure(s: &Structure) -> String {
    let mut out = format!("(structure {}", print_vocab(s.vocab()));
    if s.is_initial_segment() {
        let _ = write!(out, " (universe {})", s.size());
    } else {
        let _ = write!(out, " (universe {})", elems(s.universe()));
    }
    for (i, r) in s.vocab().relations().iter().enumerate() {
        let ts = s.relation_tuples(i);
        if ts.is_empty() {
            continue;
        }
        let _ = write!(out, " (rel {}", name(&r.name));
        for t in ts {
            let _ = write!(out, " {}", elems(t));
        }
        out.push(')');
    }
    for (i, f) in s.vocab().functions().iter().enumerate() {
        let table = s.function_table(i);
        if f.arity == 0 {
            if let Some(v) = table.get(&Vec::new()) {
                let _ = write!(out, " (const {} {})", name(&f.name), v);
            }
            continue;
        }
        let _ = write!(out, " (fun {}", name(&f.name));
        for (args, v) in table {
            let mut entry = args.clone();
            entry.push(*v);
            let _ = write!(out, " {}", elems(&entry));
        }
        out.push(')');
    }
    out.push(')');
    out
}

fn print_subsets(d: &DecoratedStructure) -> String {
    let mut out = String::from("(subsets");
    for s in &d.subsets {
        let v: Vec<Elem> = s.iter().copied().collect();
        let _ = write!(out, " {}", elems(&v));
    }
    out.push(')');
    out
}

pub fn print_decorated(d: &DecoratedStructure) -> String {
    format!("(decorated {} {})", print_structure(&d.base), print_subsets(d))
}

pub fn print_term(t: &Term) -> String {
    match t {
        Term::Var(v) => name(v),
        Term::App(f, args) => {
            let mut out = format!("({}", name(f));
            for a in args {
                let _ = write!(out, " {}", print_term(a));
            }
            out.push(')');
            out
        }
    }
}

fn print_qstruct(q: &QStruct) -> String {
    let target = print_structure(&q.target.base);
    if q.ys.is_empty() {
        return format!("(qstruct {target} {} {})", name(&q.x), print_formula(&q.phi));
    }
    let ys: Vec<String> = q.ys.iter().map(|y| name(y)).collect();
    let psis: Vec<String> = q.psis.iter().map(print_formula).collect();
    format!(
        "(qstruct {target} {} {} ({}) {} ({}))",
        print_subsets(&q.target),
        name(&q.x),
        ys.join(" "),
        print_formula(&q.phi),
        psis.join(" ")
    )
}

pub fn print_formula(f: &Formula) -> String {
    let list = |head: &str, fs: &[Formula]| {
        let parts: Vec<String> = fs.iter().map(print_formula).collect();
        format!("({head} {})", parts.join(" "))
    };
    match f {
        Formula::Atom(r, args) => {
            let mut out = format!("(rel {}", name(r));
            for a in args {
                let _ = write!(out, " {}", print_term(a));
            }
            out.push(')');
            out
        }
        Formula::Eq(a, b) => format!("(= {} {})", print_term(a), print_term(b)),
        Formula::Not(g) => format!("(not {})", print_formula(g)),
        Formula::And(fs) => list("and", fs),
        Formula::Or(fs) => list("or", fs),
        Formula::Exists(v, g) => format!("(exists {} {})", name(v), print_formula(g)),
        Formula::Forall(v, g) => format!("(forall {} {})", name(v), print_formula(g)),
        Formula::QStruct(q) => print_qstruct(q),
    }
}

/// Theory file: optional `;` header lines, then one sentence per line.
pub fn print_theory(t: &Theory, header: &[String]) -> String {
    let mut out = String::new();
    for h in header {
        for line in h.lines() {
            let _ = writeln!(out, "; {line}");
        }
    }
    let _ = writeln!(out, "(theory");
    let _ = writeln!(out, "  (name {})", quote(&t.name));
    let _ = write!(out, "  {}", print_vocab(&t.vocab));
    for s in &t.sentences {
        let _ = write!(out, "\n  (sentence {})", print_formula(s));
    }
    out.push_str(")\n");
    out
}
