use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use sha2::{Digest, Sha256};

use structural_logic::axiomatize::{emit_aq_theory, functorial_expansion, verify_presentation, Presentation};
use structural_logic::class::{
    check_class_properties, load_class_spec, read_file, Caps, ModelClass,
};
use structural_logic::closure::{check_cl_coherence, cl, enumerate_dk, verify_intersections};
use structural_logic::enumerate::DEFAULT_CANDIDATE_CAP;
use structural_logic::parse::{infer_vocab, parse_decorated, parse_formula, parse_formula_in, parse_structure, parse_theory, vocab_from_sexp};
use structural_logic::print::{print_formula, print_structure, print_theory};
use structural_logic::report::VerificationReport;
use structural_logic::semantics::{eval, solution_set, ElemOutcome, FragmentChecker, enumerate_models};
use structural_logic::sexp::parse_one;
use structural_logic::syntax::subformula_closure;
use structural_logic::translate::{eliminate_subvocab_everywhere, scott_sentence, to_counting, univ_gen_rewrite};
use structural_logic::{Elem, Error, Formula, Kappa, Theory, Vocabulary};

#[derive(Parser)]
#[command(name = "structlog", version, about = "Structural quantifiers over finite structures")]
struct Cli {
    /// Worker threads for sweeps; output does not depend on it.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Record wall time in reports.
    #[arg(long, global = true)]
    timing: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Copy)]
struct CapArgs {
    /// Largest structure examined.
    #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u32).range(1..))]
    max_size: u32,
    /// Longest tuple examined.
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u32).range(0..))]
    tuple_len: u32,
    /// Candidate structures one enumeration may visit.
    #[arg(long, default_value_t = DEFAULT_CANDIDATE_CAP)]
    candidates: usize,
}

impl CapArgs {
    fn caps(self) -> Caps {
        Caps {
            max_size: self.max_size as usize,
            tuple_len: self.tuple_len as usize,
            candidates: self.candidates,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Check {
    Intersections,
    Coherence,
    Axioms,
    ClCoherence,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    UnivGen,
    NoSubvocab,
    Counting,
    Scott,
}

#[derive(Subcommand)]
enum Command {
    /// Truth of a formula in a structure.
    Eval {
        structure: PathBuf,
        formula: PathBuf,
        /// `var=element`, repeatable.
        #[arg(long = "assign", value_parser = parse_assign)]
        assign: Vec<(String, Elem)>,
        #[arg(long, default_value = "unbounded", value_parser = parse_kappa)]
        kappa: Kappa,
        /// Also print the solution set of every structural quantifier
        /// whose parameters are assigned.
        #[arg(long)]
        trace: bool,
    },
    /// Models of a theory up to a size.
    Models {
        theory: PathBuf,
        /// A vocabulary containing the theory's, e.g. `(vocab (rel < 2) (rel P 1))`.
        #[arg(long)]
        vocab: Option<String>,
        #[arg(long, default_value_t = 4)]
        max_size: usize,
        #[arg(long, default_value = "unbounded", value_parser = parse_kappa)]
        kappa: Kappa,
        #[arg(long)]
        up_to_iso: bool,
    },
    /// Whether the first structure is an elementary substructure of the second
    /// for the subformula closure of a theory.
    Elem {
        smaller: PathBuf,
        larger: PathBuf,
        theory: PathBuf,
        /// Use the starred order, which also freezes small solution sets.
        #[arg(long)]
        star: bool,
        #[arg(long, default_value = "unbounded", value_parser = parse_kappa)]
        kappa: Kappa,
    },
    /// The closure of a set of elements in a member of a class.
    Closure {
        structure: PathBuf,
        class: PathBuf,
        /// Elements of the set, e.g. `--subset 0 --subset 2`.
        #[arg(long)]
        subset: Vec<Elem>,
    },
    /// Sweeps a class for one property within the caps.
    Verify {
        class: PathBuf,
        #[arg(long)]
        check: Check,
        #[command(flatten)]
        caps: CapArgs,
    },
    /// Emits the universal structural theory of a class with intersections.
    Emit {
        class: PathBuf,
        /// Closure relations `E_n` for `n` below this; defaults to the pair cap plus one.
        #[arg(long)]
        arity_cap: Option<usize>,
        /// Largest total tuple length in pair sentences; defaults to the size cap.
        #[arg(long)]
        pair_cap: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        caps: CapArgs,
    },
    /// Emits and verifies the presentation of a class.
    Roundtrip {
        class: PathBuf,
        #[arg(long)]
        arity_cap: Option<usize>,
        #[arg(long)]
        pair_cap: Option<usize>,
        #[command(flatten)]
        caps: CapArgs,
    },
    /// Rewrites a formula. `scott` reads a structure instead.
    Translate {
        input: PathBuf,
        #[arg(long)]
        mode: Mode,
        #[arg(long, default_value = "unbounded", value_parser = parse_kappa)]
        kappa: Kappa,
        /// Vocabulary for `no-subvocab`; inferred from the formula otherwise.
        #[arg(long)]
        vocab: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// One representative per Galois type of tuples of length `--tuple-len`.
    Dk {
        class: PathBuf,
        #[command(flatten)]
        caps: CapArgs,
    },
}

fn parse_assign(s: &str) -> Result<(String, Elem), String> {
    let (v, e) = s.split_once('=').ok_or("expected var=element")?;
    let e = e.trim().parse().map_err(|_| format!("`{e}` is not an element"))?;
    Ok((v.trim().to_string(), e))
}

fn parse_kappa(s: &str) -> Result<Kappa, String> {
    if s == "unbounded" {
        return Ok(Kappa::Unbounded);
    }
    let k: usize = s.parse().map_err(|_| format!("`{s}` is neither a number nor `unbounded`"))?;
    Kappa::finite(k).map_err(|e| e.to_string())
}

/// A failed command: exit code and message.
struct Failure(u8, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Parse { .. }
            | Error::Io { .. }
            | Error::Signature(_)
            | Error::Arity(_)
            | Error::Assignment(_)
            | Error::Domain(_)
            | Error::Pin(_)
            | Error::Kappa { .. }
            | Error::Shape(_) => 2,
            _ => 1,
        };
        Failure(code, e.to_string())
    }
}

/// Attaches the file name to errors raised while reading it.
fn in_file<T>(path: &Path, r: Result<T, Error>) -> Result<T, Failure> {
    r.map_err(|e| {
        if matches!(e, Error::Io { .. }) {
            return Failure::from(e);
        }
        let f = Failure::from(e);
        Failure(f.0, format!("{}: {}", path.display(), f.1))
    })
}

fn read(path: &Path) -> Result<String, Failure> {
    Ok(read_file(path)?)
}

fn load_class(path: &Path) -> Result<ModelClass, Failure> {
    let spec = in_file(path, load_class_spec(path))?;
    Ok(ModelClass::new(&spec)?)
}

fn vocab_arg(text: &str) -> Result<Vocabulary, Failure> {
    let v = parse_one(text).and_then(|s| vocab_from_sexp(&s));
    v.map_err(|e| Failure(2, format!("--vocab: {e}")))
}

/// What a command prints and whether it passed.
struct Done {
    out: String,
    passed: bool,
}

impl Done {
    fn ok(out: String) -> Done {
        Done { out, passed: true }
    }

    fn report(mut r: VerificationReport, start: Instant, timing: bool) -> Done {
        if timing {
            r.wall_ms = Some(start.elapsed().as_millis());
        }
        Done {
            passed: r.passed(),
            out: r.to_json_lines(),
        }
    }
}

fn set_text(s: &BTreeSet<Elem>) -> String {
    let parts: Vec<String> = s.iter().map(|e| e.to_string()).collect();
    format!("({})", parts.join(" "))
}

fn run(cli: Cli) -> Result<Done, Failure> {
    let start = Instant::now();
    let timing = cli.timing;
    match cli.command {
        Command::Eval {
            structure,
            formula,
            assign,
            kappa,
            trace,
        } => {
            let n = in_file(&structure, parse_structure(&read(&structure)?))?;
            let f = in_file(&formula, parse_formula_in(&read(&formula)?, n.vocab()))?;
            let a: BTreeMap<String, Elem> = assign.into_iter().collect();
            let mut out = format!("{}\n", eval(&n, &f, &a, kappa)?);
            if trace {
                for q in f.qstruct_nodes() {
                    let node = Formula::QStruct(Box::new(q.clone()));
                    if !node.free_vars().iter().all(|v| a.contains_key(v)) {
                        continue;
                    }
                    let s = solution_set(&n, &q.phi, &q.x, &a, kappa)?;
                    let _ = writeln!(
                        out,
                        "; {} solutions {} holds {}",
                        print_formula(&node),
                        set_text(&s),
                        eval(&n, &node, &a, kappa)?
                    );
                }
            }
            Ok(Done::ok(out))
        }
        Command::Models {
            theory,
            vocab,
            max_size,
            kappa,
            up_to_iso,
        } => {
            let mut t = in_file(&theory, parse_theory(&read(&theory)?))?;
            if let Some(v) = vocab {
                let v = vocab_arg(&v)?;
                if !t.vocab.is_subvocabulary_of(&v) {
                    return Err(Failure(2, format!("--vocab {v} does not contain {}", t.vocab)));
                }
                t = Theory::new(t.name, Arc::new(v), t.sentences)?;
            }
            let models = enumerate_models(&t, max_size, kappa, up_to_iso, DEFAULT_CANDIDATE_CAP)?;
            let mut out = String::new();
            for m in &models {
                let _ = writeln!(out, "{}", print_structure(m));
            }
            let _ = writeln!(out, "; {} models", models.len());
            Ok(Done::ok(out))
        }
        Command::Elem {
            smaller,
            larger,
            theory,
            star,
            kappa,
        } => {
            let m = in_file(&smaller, parse_structure(&read(&smaller)?))?;
            let n = in_file(&larger, parse_structure(&read(&larger)?))?;
            let t = in_file(&theory, parse_theory(&read(&theory)?))?;
            let checker = FragmentChecker::new(&subformula_closure(&t), &t.vocab, kappa)?;
            let verdict = if star {
                checker.elem_star(&m, &n)?
            } else {
                checker.elem(&m, &n)?
            };
            let out = match &verdict {
                ElemOutcome::Holds => "holds\n".to_string(),
                ElemOutcome::NotSubstructure => "fails: not a substructure\n".to_string(),
                ElemOutcome::TruthDiffers { formula, assignment }
                | ElemOutcome::SolutionsDiffer { formula, assignment } => {
                    let what = match verdict {
                        ElemOutcome::TruthDiffers { .. } => "truth differs",
                        _ => "solution sets differ",
                    };
                    let at: Vec<String> = assignment.iter().map(|(v, e)| format!("{v}={e}")).collect();
                    format!("fails: {what} for {} at {}\n", print_formula(formula), at.join(" "))
                }
            };
            Ok(Done {
                out,
                passed: verdict.holds(),
            })
        }
        Command::Closure {
            structure,
            class,
            subset,
        } => {
            let n = in_file(&structure, parse_structure(&read(&structure)?))?;
            let class = load_class(&class)?;
            if !class.contains(&n)? {
                return Err(Failure(2, format!("{} is not a member of the class", structure.display())));
            }
            let c = cl(&class, &n, &subset.into_iter().collect())?;
            Ok(Done::ok(format!(
                "{}\n; strong {}\n",
                print_structure(&c.structure),
                c.is_strong
            )))
        }
        Command::Verify { class, check, caps } => {
            let class = load_class(&class)?;
            let caps = caps.caps();
            let r = match check {
                Check::Intersections => verify_intersections(&class, &caps)?,
                Check::ClCoherence => check_cl_coherence(&class, &caps)?,
                Check::Axioms => check_class_properties(&class, &caps)?,
                Check::Coherence => {
                    let mut r = check_class_properties(&class, &caps)?;
                    r.command = format!("verify --check coherence `{}`", class.spec().name());
                    r.checks.retain(|c| c.name == "coherence");
                    r
                }
            };
            Ok(Done::report(r, start, timing))
        }
        Command::Emit {
            class,
            arity_cap,
            pair_cap,
            out,
            caps,
        } => {
            let spec_text = read(&class)?;
            let model_class = load_class(&class)?;
            let caps = caps.caps();
            let pres = present(&model_class, &caps, arity_cap, pair_cap)?;
            let text = print_theory(&pres.theory, &provenance(&spec_text, &pres, &caps));
            let summary = catalog_summary(&pres);
            match out {
                Some(path) => {
                    std::fs::write(&path, text).map_err(|e| Failure(1, format!("{}: {e}", path.display())))?;
                    Ok(Done::ok(summary))
                }
                None => {
                    eprint!("{summary}");
                    Ok(Done::ok(text))
                }
            }
        }
        Command::Roundtrip {
            class,
            arity_cap,
            pair_cap,
            caps,
        } => {
            let model_class = load_class(&class)?;
            let caps = caps.caps();
            let pres = present(&model_class, &caps, arity_cap, pair_cap)?;
            let r = verify_presentation(&model_class, &pres, &caps)?;
            Ok(Done::report(r, start, timing))
        }
        Command::Translate {
            input,
            mode,
            kappa,
            vocab,
            out,
        } => {
            let text = read(&input)?;
            let result = match mode {
                Mode::Scott => {
                    let d = in_file(&input, parse_decorated(&text))?;
                    let s = scott_sentence(&d)?;
                    let mut lines = String::new();
                    if !s.placeholders.is_empty() {
                        let _ = writeln!(lines, "; subsets read from {}", s.placeholders.join(" "));
                    }
                    let _ = writeln!(lines, "{}", print_formula(&s.formula));
                    lines
                }
                _ => {
                    let f = in_file(&input, parse_formula(&text))?;
                    let g = match mode {
                        Mode::UnivGen => univ_gen_rewrite(&f)?,
                        Mode::Counting => to_counting(&f, kappa)?,
                        _ => {
                            let v = match vocab {
                                Some(v) => vocab_arg(&v)?,
                                None => infer_vocab(std::slice::from_ref(&f))?,
                            };
                            eliminate_subvocab_everywhere(&f, &Arc::new(v))?
                        }
                    };
                    format!("{}\n", print_formula(&g))
                }
            };
            match out {
                Some(path) => {
                    std::fs::write(&path, result).map_err(|e| Failure(1, format!("{}: {e}", path.display())))?;
                    Ok(Done::ok(String::new()))
                }
                None => Ok(Done::ok(result)),
            }
        }
        Command::Dk { class, caps } => {
            let class = load_class(&class)?;
            let caps = caps.caps();
            let tuple_len = caps.tuple_len;
            let reps = enumerate_dk(&class, tuple_len, &caps)?;
            let mut out = String::new();
            for p in &reps {
                let t: Vec<String> = p.tuple.iter().map(|e| e.to_string()).collect();
                let _ = writeln!(out, "(pointed {} ({}))", print_structure(&p.model), t.join(" "));
            }
            let _ = writeln!(out, "; {} types of length {tuple_len}", reps.len());
            Ok(Done::ok(out))
        }
    }
}

fn present(
    class: &ModelClass,
    caps: &Caps,
    arity_cap: Option<usize>,
    pair_cap: Option<usize>,
) -> Result<Presentation, Failure> {
    let pair_cap = pair_cap.unwrap_or(caps.max_size);
    let arity_cap = arity_cap.unwrap_or(pair_cap + 1);
    let map = functorial_expansion(class, arity_cap, caps)?;
    Ok(emit_aq_theory(class, &map, pair_cap, caps)?)
}

fn provenance(spec_text: &str, pres: &Presentation, caps: &Caps) -> Vec<String> {
    let mut lines = vec![
        format!("emitted from class `{}`", pres.class_name),
        format!("spec-sha256 {}", hex::encode(Sha256::digest(spec_text.as_bytes()))),
        format!(
            "caps max-size {} tuple-len {} candidates {} arity-cap {} pair-cap {}",
            caps.max_size,
            caps.tuple_len,
            caps.candidates,
            pres.coding.arity_cap(),
            pres.pair_cap
        ),
        format!("kappa {}", pres.kappa),
    ];
    lines.extend(catalog_summary(pres).lines().map(|l| l.trim_start_matches("; ").to_string()));
    lines
}

fn catalog_summary(pres: &Presentation) -> String {
    let mut out = String::new();
    for ((m, k), entries) in &pres.catalog.entries {
        let _ = writeln!(out, "; catalog ({m} {k}) {}", entries.len());
    }
    let _ = writeln!(out, "; catalog total {}", pres.catalog.total());
    out
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    if let Some(j) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(j).build_global() {
            eprintln!("structlog: --jobs: {e}");
            return ExitCode::from(2);
        }
    }
    match run(cli) {
        Ok(done) => {
            print!("{}", done.out);
            if done.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(Failure(code, msg)) => {
            eprintln!("structlog: {msg}");
            ExitCode::from(code)
        }
    }
}
