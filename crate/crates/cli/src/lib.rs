//! The `treelab` command line: argument definitions, loading of artifacts and
//! one report per subcommand.

pub mod formats;

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context as _, Result};
use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use treelab::cascade::{self, Cascade, Readout};
use treelab::paths::{self, Dtta, Side};
use treelab::structure::{self, AbelianVerdict, Congruence, PolCaps};
use treelab::syntactic::{self, DivideCaps};
use treelab::transduce::{self, Dtop};
use treelab::{enumerate_trees, fixtures, oracle, parse_tree, render_tree, BoolOp, Caps, Dbta, FiniteAlgebra, RankedAlphabet};

use formats::FormatError;

#[derive(Debug, Parser)]
#[command(name = "treelab", version, about = "Regular tree languages as finite algebras")]
pub struct Cli {
    /// Output style.
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    pub format: Format,
    /// Cap on determinized state sets.
    #[arg(long, default_value_t = 4096, global = true)]
    pub max_states: usize,
    /// Cap on carriers built by closure.
    #[arg(long, default_value_t = 4096, global = true)]
    pub max_carrier: usize,
    /// Cap on the total bit width of a cascade.
    #[arg(long, default_value_t = 16, global = true)]
    pub max_width: usize,
    /// Largest trees enumerated by brute-force checks.
    #[arg(long, default_value_t = 8, global = true)]
    pub max_nodes: usize,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Tsv,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum BoolArg {
    Union,
    Intersection,
    Difference,
    Symdiff,
    Complement,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Value of a tree in the automaton's algebra.
    Eval {
        #[arg(long)]
        lang: PathBuf,
        #[arg(long)]
        tree: String,
    },
    /// Membership of a tree.
    Accepts {
        #[arg(long)]
        lang: PathBuf,
        #[arg(long)]
        tree: String,
    },
    /// The syntactic algebra.
    Minimize {
        #[arg(long)]
        lang: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Language equivalence, with a smallest distinguishing tree.
    Equiv {
        #[arg(long)]
        lang: PathBuf,
        #[arg(long)]
        other: PathBuf,
    },
    /// Boolean combination.
    Bool {
        #[arg(long, value_enum)]
        op: BoolArg,
        #[arg(long)]
        lang: PathBuf,
        #[arg(long)]
        other: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Whether the language is a universal path language.
    UniversalPath {
        #[arg(long)]
        lang: PathBuf,
    },
    /// Whether the language and its complement are universal path languages.
    DoublyDet {
        #[arg(long)]
        lang: PathBuf,
    },
    /// The least universal path language containing the language.
    Mixes {
        #[arg(long)]
        lang: PathBuf,
        /// Print the top-down automaton instead of the bottom-up one.
        #[arg(long)]
        dtta: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// A top-down deterministic language separating two languages.
    Separate {
        #[arg(long)]
        lang: PathBuf,
        #[arg(long)]
        other: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Top-down transducers.
    Dtop {
        #[command(subcommand)]
        command: DtopCommand,
    },
    /// Matrix powers and their transducer decompositions.
    Matrix {
        #[command(subcommand)]
        command: MatrixCommand,
    },
    /// Trees whose annotation by the given languages lies in the top language.
    Nest {
        #[arg(long = "lang", required = true)]
        langs: Vec<PathBuf>,
        #[arg(long)]
        top: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Wreath products.
    Wreath {
        #[command(subcommand)]
        command: WreathCommand,
    },
    /// CTL formulas and their cascades.
    Ctl {
        #[command(subcommand)]
        command: CtlCommand,
    },
    /// Congruences, polynomials and related screens.
    Structure {
        #[command(subcommand)]
        command: StructureCommand,
    },
    /// Brute-force agreement suites.
    Oracle {
        #[command(subcommand)]
        command: OracleCommand,
    },
}

#[derive(Debug, Subcommand)]
pub enum DtopCommand {
    Apply {
        #[arg(long)]
        dtop: PathBuf,
        #[arg(long)]
        tree: String,
    },
    Preimage {
        #[arg(long)]
        dtop: PathBuf,
        #[arg(long)]
        lang: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
pub enum MatrixCommand {
    /// Decomposes a matrix power homomorphism into transducers over the base
    /// algebra extended with element constants.
    ToDtops {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long)]
        base: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// The homomorphism `t ↦ (g(f_q(t)))_q`.
    FromDtop {
        #[arg(long)]
        dtop: PathBuf,
        #[arg(long)]
        algebra: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// The automaton accepting trees whose image tuple is listed.
    Flatten {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long)]
        base: PathBuf,
        /// Accepted tuples, e.g. "0 1;1 1".
        #[arg(long)]
        accept: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
pub enum WreathCommand {
    /// Sequential composition of `first` over Σ and `second` over Σ × B.
    Compose {
        #[arg(long)]
        first: PathBuf,
        #[arg(long)]
        second: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
pub enum CtlCommand {
    Eval {
        #[arg(long)]
        formula: String,
        #[arg(long)]
        tree: String,
        /// Alphabet file; the Potthoff signature {f2, f1, f0} by default.
        #[arg(long)]
        alphabet: Option<PathBuf>,
    },
    Compile {
        #[arg(long)]
        formula: String,
        #[arg(long)]
        alphabet: Option<PathBuf>,
        /// Also print the flattened automaton.
        #[arg(long)]
        flatten: bool,
    },
    /// Compares the compiled cascade with direct evaluation on all trees up
    /// to `--max-nodes`.
    Verify {
        #[arg(long)]
        formula: String,
        #[arg(long)]
        alphabet: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
pub enum StructureCommand {
    Congruences {
        #[arg(long)]
        lang: PathBuf,
        /// Analyse the syntactic algebra instead of the given one.
        #[arg(long)]
        syntactic: bool,
    },
    Orpairs {
        #[arg(long)]
        lang: PathBuf,
        #[arg(long)]
        syntactic: bool,
    },
    StronglyAbelian {
        #[arg(long)]
        lang: PathBuf,
        #[arg(long)]
        syntactic: bool,
        /// Blocks such as "0 1|2"; the full congruence by default.
        #[arg(long)]
        congruence: Option<String>,
        #[arg(long, default_value_t = 2)]
        arity_bound: usize,
        #[arg(long, default_value_t = 3)]
        depth_bound: usize,
    },
    LatticeDivides {
        #[arg(long)]
        lang: PathBuf,
        #[arg(long)]
        syntactic: bool,
        /// Search among binary polynomials rather than the raw operations.
        #[arg(long)]
        poly: bool,
    },
    OrpairSeparation {
        #[arg(long)]
        lang: PathBuf,
    },
}

#[derive(Debug, Subcommand)]
pub enum OracleCommand {
    /// Runs the brute-force suites on the built-in corpus.
    Verify {
        /// Random CTL formulas; the seed comes from TREELAB_SEED.
        #[arg(long, default_value_t = 40)]
        formulas: usize,
    },
}

/// Exit statuses.
pub mod exit {
    pub const OK: i32 = 0;
    pub const USAGE: i32 = 1;
    pub const PARSE: i32 = 2;
    pub const CAP: i32 = 3;
    pub const IO: i32 = 4;
}

/// Maps an error to its exit status.
pub fn exit_code(e: &anyhow::Error) -> i32 {
    for cause in e.chain() {
        if cause.is::<FormatError>() {
            return exit::PARSE;
        }
        if cause.is::<std::io::Error>() {
            return exit::IO;
        }
        if let Some(t) = cause.downcast_ref::<treelab::Error>() {
            return match t {
                treelab::Error::Parse { .. } => exit::PARSE,
                treelab::Error::CapExceeded { .. } => exit::CAP,
                _ => exit::USAGE,
            };
        }
    }
    exit::USAGE
}

/// Key/value lines followed by an optional artifact.
#[derive(Debug, Default, Clone, PartialEq, Eq)]
pub struct Report {
    rows: Vec<(String, String)>,
    body: Option<String>,
}

impl Report {
    fn verdict(v: impl Into<String>) -> Self {
        Report::default().row("verdict", v)
    }

    fn row(mut self, key: &str, value: impl Into<String>) -> Self {
        self.rows.push((key.to_string(), value.into()));
        self
    }

    fn body(mut self, text: String) -> Self {
        self.body = Some(text);
        self
    }

    pub fn render(&self, format: Format) -> String {
        let mut out = String::new();
        for (k, v) in &self.rows {
            match format {
                Format::Text if k == "verdict" => {
                    let _ = writeln!(out, "{v}");
                }
                Format::Text => {
                    let _ = writeln!(out, "{k}: {v}");
                }
                Format::Tsv => {
                    let _ = writeln!(out, "{k}\t{v}");
                }
            }
        }
        if let Some(body) = &self.body {
            match format {
                Format::Text => out.push_str(body),
                Format::Tsv => {
                    for line in body.lines() {
                        let fields: Vec<&str> = line.split_whitespace().filter(|w| *w != "->").collect();
                        let _ = writeln!(out, "{}", fields.join("\t"));
                    }
                }
            }
        }
        out
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn load<T>(path: &Path, parse: impl Fn(&str) -> std::result::Result<T, FormatError>) -> Result<T> {
    parse(&read(path)?).with_context(|| format!("in {}", path.display()))
}

fn load_dbta(path: &Path) -> Result<Dbta> {
    load(path, formats::parse_dbta)
}

fn load_dtop(path: &Path) -> Result<Dtop> {
    load(path, formats::parse_dtop)
}

fn load_alphabet(path: Option<&Path>) -> Result<RankedAlphabet> {
    match path {
        Some(p) => load(p, formats::parse_alphabet),
        None => Ok(fixtures::sig_pott()),
    }
}

/// Writes the artifact to `out` when given, otherwise attaches it to the
/// report.
fn emit(report: Report, artifact: String, out: Option<&Path>) -> Result<Report> {
    match out {
        Some(p) => {
            fs::write(p, &artifact).with_context(|| format!("writing {}", p.display()))?;
            Ok(report.row("written", p.display().to_string()))
        }
        None => Ok(report.body(artifact)),
    }
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn maybe_syntactic(d: Dbta, syntactic: bool) -> Dbta {
    if syntactic {
        syntactic::syntactic_algebra(&d).minimal
    } else {
        d
    }
}

fn render_cascade(c: &Cascade) -> String {
    let mut out = String::new();
    let mut offset = 0;
    for (l, layer) in c.layers().iter().enumerate() {
        let _ = writeln!(out, "layer {l} width {} bits {offset}", layer.width);
        for (a, tuple) in layer.ops.iter().enumerate() {
            for (q, p) in tuple.iter().enumerate() {
                let _ = writeln!(out, "op {} {q} -> {}", layer.alphabet.name(a), p.render());
            }
        }
        offset += layer.width;
    }
    match c.output() {
        Readout::Bit(b) => {
            let _ = writeln!(out, "readout bit {b}");
        }
        Readout::Const(b) => {
            let _ = writeln!(out, "readout const {b}");
        }
    }
    out
}

fn parse_congruence(text: &str, size: usize) -> Result<Congruence> {
    let blocks: Vec<Vec<usize>> = text
        .split('|')
        .map(|b| {
            b.split_whitespace()
                .map(|w| w.parse::<usize>().map_err(|_| anyhow!(FormatError { line: 0, msg: format!("bad element {w:?}") })))
                .collect()
        })
        .collect::<Result<_>>()?;
    Ok(Congruence::from_blocks(size, blocks)?)
}

fn parse_tuples(text: &str, width: usize) -> Result<Vec<Vec<usize>>> {
    text.split(';')
        .filter(|s| !s.trim().is_empty())
        .map(|s| {
            let v: Vec<usize> = s
                .split_whitespace()
                .map(|w| w.parse().map_err(|_| anyhow!(FormatError { line: 0, msg: format!("bad element {w:?}") })))
                .collect::<Result<_>>()?;
            if v.len() != width {
                bail!(FormatError {
                    line: 0,
                    msg: format!("tuple {s:?} does not have width {width}"),
                });
            }
            Ok(v)
        })
        .collect()
}

pub fn seed() -> u64 {
    std::env::var("TREELAB_SEED").ok().and_then(|s| s.parse().ok()).unwrap_or(2024)
}

/// Runs one command and returns its report.
pub fn run(cli: &Cli) -> Result<Report> {
    let caps = Caps {
        max_states: cli.max_states,
        max_carrier: cli.max_carrier,
        max_width: cli.max_width,
    };
    let pol = PolCaps::default();
    match &cli.command {
        Command::Eval { lang, tree } => {
            let d = load_dbta(lang)?;
            let t = parse_tree(tree, d.alphabet())?;
            let e = d.evaluate(&t)?;
            Ok(Report::verdict(d.algebra().element_name(e)).row("element", e.to_string()))
        }
        Command::Accepts { lang, tree } => {
            let d = load_dbta(lang)?;
            let t = parse_tree(tree, d.alphabet())?;
            Ok(Report::verdict(yes_no(d.accepts(&t)?)))
        }
        Command::Minimize { lang, out } => {
            let d = load_dbta(lang)?;
            let res = syntactic::syntactic_algebra(&d);
            let proj: Vec<String> = res
                .projection
                .iter()
                .map(|p| p.map_or("-".to_string(), |x| x.to_string()))
                .collect();
            let report = Report::verdict(format!("{} elements", res.minimal.algebra().size()))
                .row("input", d.algebra().size().to_string())
                .row("projection", proj.join(" "));
            emit(report, formats::save_dbta(&res.minimal), out.as_deref())
        }
        Command::Equiv { lang, other } => {
            let (a, b) = (load_dbta(lang)?, load_dbta(other)?);
            match a.difference_witness(&b)? {
                None => Ok(Report::verdict("yes")),
                Some(w) => {
                    let side = if a.accepts(&w)? { "first" } else { "second" };
                    Ok(Report::verdict("no")
                        .row("witness", render_tree(&w, a.alphabet()))
                        .row("accepted-by", side))
                }
            }
        }
        Command::Bool { op, lang, other, out } => {
            let a = load_dbta(lang)?;
            let result = match (op, other) {
                (BoolArg::Complement, _) => a.complement(),
                (_, None) => bail!("--other is required for binary operations"),
                (op, Some(o)) => {
                    let b = load_dbta(o)?;
                    let op = match op {
                        BoolArg::Union => BoolOp::Union,
                        BoolArg::Intersection => BoolOp::Intersection,
                        BoolArg::Difference => BoolOp::Difference,
                        _ => BoolOp::SymmetricDifference,
                    };
                    Dbta::product_reachable(op, &a, &b, caps.max_carrier)?
                }
            };
            let report = Report::verdict(format!("{} elements", result.algebra().size()));
            emit(report, formats::save_dbta(&result), out.as_deref())
        }
        Command::UniversalPath { lang } => {
            let d = load_dbta(lang)?;
            match paths::universal_path_counterexample(&d, caps)? {
                None => Ok(Report::verdict("yes")),
                Some(t) => Ok(Report::verdict("no").row("counterexample", render_tree(&t, d.alphabet()))),
            }
        }
        Command::DoublyDet { lang } => {
            let d = load_dbta(lang)?;
            let pos = paths::universal_path_counterexample(&d, caps)?;
            let neg = paths::universal_path_counterexample(&d.complement(), caps)?;
            let mut r = Report::verdict(yes_no(pos.is_none() && neg.is_none()));
            r = r.row("language", yes_no(pos.is_none())).row("complement", yes_no(neg.is_none()));
            if let Some(t) = pos {
                r = r.row("counterexample", render_tree(&t, d.alphabet()));
            }
            if let Some(t) = neg {
                r = r.row("complement-counterexample", render_tree(&t, d.alphabet()));
            }
            Ok(r)
        }
        Command::Mixes { lang, dtta, out } => {
            let d = load_dbta(lang)?;
            let top: Dtta = paths::mixes_dtta(&d, caps)?;
            if *dtta {
                let report = Report::verdict(format!("{} states", top.num_states()));
                return emit(report, formats::save_dtta(&top), out.as_deref());
            }
            let m = paths::dtta_to_dbta(&top, caps.max_carrier)?;
            let report = Report::verdict(format!("{} elements", m.algebra().size()));
            emit(report, formats::save_dbta(&m), out.as_deref())
        }
        Command::Separate { lang, other, out } => {
            let (a, b) = (load_dbta(lang)?, load_dbta(other)?);
            match paths::separate_topdown(&a, &b, caps)? {
                None => Ok(Report::verdict("none")),
                Some(s) => {
                    let side = match s.side {
                        Side::First => "first",
                        Side::Second => "second",
                    };
                    let report = Report::verdict("separated").row("accepts", side);
                    emit(report, formats::save_dtta(&s.dtta), out.as_deref())
                }
            }
        }
        Command::Dtop { command } => match command {
            DtopCommand::Apply { dtop, tree } => {
                let f = load_dtop(dtop)?;
                let t = parse_tree(tree, f.input())?;
                Ok(Report::verdict(render_tree(&f.apply(&t)?, f.output())))
            }
            DtopCommand::Preimage { dtop, lang, out } => {
                let (f, k) = (load_dtop(dtop)?, load_dbta(lang)?);
                let pre = transduce::dtop_preimage(&k, &f, caps.max_carrier)?;
                let report = Report::verdict(format!("{} elements", pre.algebra().size()));
                emit(report, formats::save_dbta(&pre), out.as_deref())
            }
        },
        Command::Matrix { command } => match command {
            MatrixCommand::ToDtops { matrix, base, out } => {
                let g = load_dbta(base)?.algebra().clone();
                let mh = load(matrix, |s| formats::parse_matrix(s, &g))?;
                let (template, ext) = transduce::matrix_hom_to_dtops(&mh)?;
                let mut artifact = formats::save_dtop(&template);
                artifact.push_str("# extended algebra\n");
                for line in formats::save_dbta(&Dbta::new(ext, [])?).lines() {
                    let _ = writeln!(artifact, "# {line}");
                }
                let report = Report::verdict(format!("{} states", template.num_states()))
                    .row("note", "state q computes coordinate q; set init to choose it");
                emit(report, artifact, out.as_deref())
            }
            MatrixCommand::FromDtop { dtop, algebra, out } => {
                let f = load_dtop(dtop)?;
                let g = load_dbta(algebra)?.algebra().clone();
                let mh = transduce::dtop_to_matrix_hom(&f, &g)?;
                let report = Report::verdict(format!("width {}", mh.width()));
                emit(report, formats::save_matrix(&mh, &g), out.as_deref())
            }
            MatrixCommand::Flatten { matrix, base, accept, out } => {
                let g = load_dbta(base)?.algebra().clone();
                let mh = load(matrix, |s| formats::parse_matrix(s, &g))?;
                let accepted = parse_tuples(accept, mh.width())?;
                let d = transduce::matrix_power_language(&mh, |v| accepted.iter().any(|a| a == v), caps.max_carrier)?;
                let report = Report::verdict(format!("{} elements", d.algebra().size()));
                emit(report, formats::save_dbta(&d), out.as_deref())
            }
        },
        Command::Nest { langs, top, out } => {
            let ls: Vec<Dbta> = langs.iter().map(|p| load_dbta(p)).collect::<Result<_>>()?;
            let top = load_dbta(top)?;
            let d = cascade::nest(ls[0].alphabet(), &ls, &top, caps.max_carrier)?;
            let report = Report::verdict(format!("{} elements", d.algebra().size()));
            emit(report, formats::save_dbta(&d), out.as_deref())
        }
        Command::Wreath { command } => match command {
            WreathCommand::Compose { first, second, out } => {
                let h = load_dbta(first)?.algebra().clone();
                let g = load_dbta(second)?.algebra().clone();
                let c = cascade::sequential_compose(&h, &g)?;
                let report = Report::verdict(format!("{} elements", c.size()))
                    .row("encoding", format!("element x*{}+y pairs x in second with y in first", h.size()));
                let mut artifact = String::new();
                formats::save_algebra_into(&mut artifact, &c);
                emit(report, artifact, out.as_deref())
            }
        },
        Command::Ctl { command } => run_ctl(command, cli, caps),
        Command::Structure { command } => run_structure(command, caps, pol),
        Command::Oracle { command } => match command {
            OracleCommand::Verify { formulas } => oracle_verify(*formulas, cli.max_nodes, caps),
        },
    }
}

fn run_ctl(command: &CtlCommand, cli: &Cli, caps: Caps) -> Result<Report> {
    match command {
        CtlCommand::Eval { formula, tree, alphabet } => {
            let sig = load_alphabet(alphabet.as_deref())?;
            let phi = cascade::ctl_parse(formula, &sig)?;
            let t = parse_tree(tree, &sig)?;
            Ok(Report::verdict(cascade::ctl_eval(&phi, &t).to_string()))
        }
        CtlCommand::Compile { formula, alphabet, flatten } => {
            let sig = load_alphabet(alphabet.as_deref())?;
            let phi = cascade::ctl_parse(formula, &sig)?;
            let c = cascade::ctl_compile(&phi, &sig, caps.max_width)?;
            let widths: Vec<String> = c.layers().iter().map(|l| l.width.to_string()).collect();
            let mut report = Report::verdict(format!("{} layers", c.layers().len()))
                .row("widths", widths.join(" "))
                .row("total-width", c.total_width().to_string());
            let mut artifact = render_cascade(&c);
            if *flatten {
                let d = cascade::cascade_flatten(&c, caps.max_carrier)?;
                report = report.row("flattened", format!("{} elements", d.algebra().size()));
                artifact.push_str(&formats::save_dbta(&d));
            }
            Ok(report.body(artifact))
        }
        CtlCommand::Verify { formula, alphabet } => {
            let sig = load_alphabet(alphabet.as_deref())?;
            let phi = cascade::ctl_parse(formula, &sig)?;
            let c = cascade::ctl_compile(&phi, &sig, caps.max_width)?;
            let d = cascade::cascade_flatten(&c, caps.max_carrier)?;
            let trees = enumerate_trees(&sig, cli.max_nodes);
            for t in &trees {
                if d.accepts(t)? != cascade::ctl_eval(&phi, t) {
                    return Ok(Report::verdict(format!("disagree on {}", render_tree(t, &sig))));
                }
            }
            Ok(Report::verdict(format!("agree on {} trees", trees.len())))
        }
    }
}

fn run_structure(command: &StructureCommand, caps: Caps, pol: PolCaps) -> Result<Report> {
    match command {
        StructureCommand::Congruences { lang, syntactic } => {
            let d = maybe_syntactic(load_dbta(lang)?, *syntactic);
            let all = structure::all_congruences(d.algebra(), structure::CONGRUENCE_CAP)?;
            let mut r = Report::verdict(format!("{} congruences", all.len()));
            for c in &all {
                r = r.row("congruence", c.render());
            }
            Ok(r)
        }
        StructureCommand::Orpairs { lang, syntactic } => {
            let d = maybe_syntactic(load_dbta(lang)?, *syntactic);
            let report = structure::or_pairs(d.algebra(), pol)?;
            let mut r = Report::verdict(format!("{} pairs", report.pairs.len()));
            if report.under_approximation {
                r = r.row("note", "polynomial generation capped; list may be incomplete");
            }
            let alg = d.algebra();
            for p in &report.pairs {
                r = r.row("pair", format!("{} {}", alg.element_name(p.a0), alg.element_name(p.a1)));
            }
            Ok(r)
        }
        StructureCommand::StronglyAbelian {
            lang,
            syntactic,
            congruence,
            arity_bound,
            depth_bound,
        } => {
            let d = maybe_syntactic(load_dbta(lang)?, *syntactic);
            let alg = d.algebra();
            let c = match congruence {
                Some(text) => parse_congruence(text, alg.size())?,
                None => Congruence::full(alg.size()),
            };
            if !structure::is_compatible(alg, &c) {
                bail!("{} is not a congruence", c.render());
            }
            match structure::strongly_abelian_check(alg, &c, *arity_bound, *depth_bound) {
                AbelianVerdict::Violated(v) => {
                    let join = |xs: &[usize]| xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
                    Ok(Report::verdict("violated")
                        .row("arity", v.arity.to_string())
                        .row("table", join(&v.table))
                        .row("a", join(&v.a))
                        .row("b", join(&v.b))
                        .row("c", join(&v.c)))
                }
                AbelianVerdict::PassedBounded { arity_bound, depth_bound } => Ok(Report::verdict("passed-bounded")
                    .row("arity-bound", arity_bound.to_string())
                    .row("depth-bound", depth_bound.to_string())
                    .row("note", "no violation found within the bounds; not a proof")),
            }
        }
        StructureCommand::LatticeDivides { lang, syntactic, poly } => {
            let d = maybe_syntactic(load_dbta(lang)?, *syntactic);
            match structure::lattice_divides(d.algebra(), *poly, DivideCaps::default(), pol)? {
                None => Ok(Report::verdict("no")),
                Some(w) => {
                    let sub: Vec<String> = w.witness.subuniverse.iter().map(|e| e.to_string()).collect();
                    let blocks: Vec<String> = w
                        .witness
                        .congruence
                        .iter()
                        .map(|b| b.iter().map(|e| e.to_string()).collect::<Vec<_>>().join(" "))
                        .collect();
                    Ok(Report::verdict("yes")
                        .row("pool", format!("{} operations", w.pool.alphabet().len()))
                        .row("subuniverse", sub.join(" "))
                        .row("blocks", blocks.join("|")))
                }
            }
        }
        StructureCommand::OrpairSeparation { lang } => {
            let d = load_dbta(lang)?;
            let report = structure::orpair_separation(&d, pol, caps)?;
            let verdict = if report.all_separable() { "all-separable" } else { "inseparable-pair" };
            let mut r = Report::verdict(verdict);
            if report.under_approximation {
                r = r.row("note", "polynomial generation capped; list may be incomplete");
            }
            for p in &report.pairs {
                r = r.row(
                    "pair",
                    format!("{} {} {}", p.a0, p.a1, if p.separable { "separable" } else { "inseparable" }),
                );
            }
            Ok(r)
        }
    }
}

fn oracle_verify(formulas: usize, max_nodes: usize, caps: Caps) -> Result<Report> {
    let mut r = Report::verdict("");
    let mut failures = 0usize;
    let mut suite = |r: Report, name: &str, checked: usize, bad: usize| {
        failures += bad;
        r.row(name, format!("{checked} checked, {bad} disagreements"))
    };

    let corpus = fixtures::corpus();
    let (mut checked, mut bad) = (0, 0);
    for (_, d) in &corpus {
        let m = syntactic::syntactic_algebra(d).minimal;
        for t in enumerate_trees(d.alphabet(), max_nodes) {
            checked += 1;
            bad += usize::from(m.accepts(&t)? != d.accepts(&t)?);
        }
    }
    r = suite(r, "minimize", checked, bad);

    let (mut checked, mut bad) = (0, 0);
    for (_, d) in &corpus {
        let fast = paths::is_universal_path(d, caps)?;
        let brute = oracle::universal_path_violation(d, max_nodes + 2, max_nodes).is_none();
        checked += 1;
        bad += usize::from(fast != brute);
    }
    r = suite(r, "universal-path", checked, bad);

    let (mut checked, mut bad) = (0, 0);
    for (_, d) in &corpus {
        let m = paths::mixes(d, caps)?;
        let words = oracle::member_words(d, max_nodes + 2);
        for t in enumerate_trees(d.alphabet(), max_nodes) {
            if treelab::path_words(&t).is_subset(&words) {
                checked += 1;
                bad += usize::from(!m.accepts(&t)?);
            }
        }
    }
    r = suite(r, "mixes", checked, bad);

    let f = Dtop::from_hom(&fixtures::hom_dup());
    let k = fixtures::k_pott();
    let pre = transduce::dtop_preimage(&k, &f, caps.max_carrier)?;
    let (mut checked, mut bad) = (0, 0);
    for t in enumerate_trees(f.input(), max_nodes) {
        checked += 1;
        bad += usize::from(pre.accepts(&t)? != k.accepts(&f.apply(&t)?)?);
    }
    r = suite(r, "dtop-preimage", checked, bad);

    let mut rng = ChaCha8Rng::seed_from_u64(seed());
    let sigs = [fixtures::sig_pott(), fixtures::sig_gcd()];
    let trees: Vec<_> = sigs.iter().map(|s| enumerate_trees(s, max_nodes)).collect();
    let (mut checked, mut bad) = (0, 0);
    for i in 0..formulas {
        let sig = &sigs[i % 2];
        let phi = cascade::random_formula(sig, 3, i % 3 == 0, &mut rng);
        let d = cascade::cascade_flatten(&cascade::ctl_compile(&phi, sig, caps.max_width)?, caps.max_carrier)?;
        for t in &trees[i % 2] {
            checked += 1;
            bad += usize::from(d.accepts(t)? != cascade::ctl_eval(&phi, t));
        }
    }
    r = suite(r, "ctl", checked, bad);

    r.rows[0].1 = if failures == 0 { "agree".into() } else { format!("{failures} disagreements") };
    Ok(r)
}

/// Loads a Dbta; exposed for tests.
pub fn read_dbta(path: &Path) -> Result<Dbta> {
    load_dbta(path)
}

/// The algebra of a Dbta file; exposed for tests.
pub fn read_algebra(path: &Path) -> Result<FiniteAlgebra> {
    Ok(load_dbta(path)?.algebra().clone())
}
