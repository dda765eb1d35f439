//! Command-line front end. Exit codes: 0 success or equal, 1 validation
//! failure, 2 I/O or parse error, 3 unknown (budget exhausted).

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::diagram::{GraphDiagram, ValidationReport};
use crate::engine::{equivalent, Budget, Equivalence, Step, Trace};
use crate::error::Error;
use crate::moves::{
    certify_invariance, enumerate_move_sites, sweep, Certificate, MoveDirection, MoveKind, SweepRow,
};
use crate::rules::RuleSet;
use crate::scalar::Scalar;
use crate::statesum::{bracket, BracketOptions};
use crate::sum::{FormalSum, TermRecord};
use crate::BigInt;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_IO: i32 = 2;
pub const EXIT_UNKNOWN: i32 = 3;

/// Extension of diagram files in a corpus directory.
pub const DIAGRAM_EXT: &str = "pd";

#[derive(Debug, Parser)]
#[command(
    name = "label-bracket",
    version,
    about = "State-sum invariants of knotted trivalent graph diagrams"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Worker threads (0: one per core). Results do not depend on it.
    #[arg(long, global = true, default_value_t = 0)]
    pub workers: usize,
    /// Machine-readable output.
    #[arg(long, global = true)]
    pub json: bool,
    /// Arbitrary-precision coefficients instead of 64-bit integers.
    #[arg(long, global = true)]
    pub bigint: bool,
}

#[derive(Debug, Clone, Copy, Args)]
pub struct BudgetArgs {
    /// Normalization steps and distinct sums visited by the equivalence search.
    #[arg(long, env = "LABEL_BRACKET_BUDGET", default_value_t = 10_000)]
    pub budget: usize,
    /// Rewrite depth of the equivalence search from either side.
    #[arg(long, env = "LABEL_BRACKET_DEPTH", default_value_t = 8)]
    pub depth: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InputKind {
    Sum,
    Diagram,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DirectionArg {
    Apply,
    Inverse,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Checks a diagram file and/or a rule file.
    Validate {
        #[arg(long)]
        diagram: Option<PathBuf>,
        #[arg(long)]
        rules: Option<PathBuf>,
    },
    /// Computes the normalized state sum of a diagram.
    Bracket {
        #[arg(long)]
        diagram: PathBuf,
        #[arg(long)]
        rules: PathBuf,
        #[command(flatten)]
        budget: BudgetArgs,
    },
    /// Decides whether two sums (or the brackets of two diagrams) are equal
    /// modulo the relations.
    Equiv {
        a: PathBuf,
        b: PathBuf,
        #[arg(long)]
        rules: PathBuf,
        /// Input format; by default `.pd` files are diagrams, others sums.
        #[arg(long, value_enum)]
        input: Option<InputKind>,
        #[command(flatten)]
        budget: BudgetArgs,
    },
    /// Certifies invariance under one move at one or all of its sites.
    Certify {
        #[arg(long)]
        diagram: PathBuf,
        #[arg(long)]
        rules: PathBuf,
        #[arg(long = "move")]
        kind: String,
        #[arg(long, value_enum, default_value = "apply")]
        direction: DirectionArg,
        /// Only sites of this variant index.
        #[arg(long)]
        variant: Option<usize>,
        /// Only the i-th remaining site.
        #[arg(long)]
        site: Option<usize>,
        #[command(flatten)]
        budget: BudgetArgs,
    },
    /// Certifies every move of the given kinds at every site of every
    /// `.pd` diagram in a directory and writes a JSON report.
    Sweep {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        rules: PathBuf,
        /// Comma-separated kinds or a range such as `Ω1..Ω5`.
        #[arg(long, default_value = "Ω1..Ω5")]
        moves: String,
        #[arg(long)]
        out: PathBuf,
        /// Omits wall times so reports are byte-identical across runs.
        #[arg(long)]
        deterministic: bool,
        #[command(flatten)]
        budget: BudgetArgs,
    },
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Input { path: PathBuf, source: Error },
    #[error(transparent)]
    Core(#[from] Error),
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } | CliError::Usage(_) => EXIT_IO,
            CliError::Input { source, .. } | CliError::Core(source) => match source {
                Error::Syntax { .. } => EXIT_IO,
                _ => EXIT_INVALID,
            },
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Parses arguments, runs, prints errors to stderr and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_IO } else { EXIT_OK };
        }
    };
    let stdout = std::io::stdout();
    match run(&cli, &mut stdout.lock()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn run(cli: &Cli, out: &mut dyn Write) -> CliResult<i32> {
    if cli.bigint {
        Runner::<BigInt>::new(cli, out).run()
    } else {
        Runner::<i64>::new(cli, out).run()
    }
}

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn in_file<T>(path: &Path, r: crate::error::Result<T>) -> CliResult<T> {
    r.map_err(|source| CliError::Input {
        path: path.to_path_buf(),
        source,
    })
}

fn load_diagram(path: &Path) -> CliResult<GraphDiagram> {
    in_file(path, GraphDiagram::parse(&read(path)?))
}

fn load_rules<R: Scalar>(path: &Path) -> CliResult<RuleSet<R>> {
    in_file(path, RuleSet::parse(&read(path)?))
}

fn json<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("serializable") + "\n"
}

/// Parses `Ω1,Ω3` or `Ω1..Ω5` (inclusive).
pub fn parse_moves(s: &str) -> crate::error::Result<Vec<MoveKind>> {
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        if let Some((a, b)) = part.split_once("..") {
            let (a, b) = (MoveKind::parse(a)?, MoveKind::parse(b)?);
            out.extend(
                MoveKind::ALL
                    .iter()
                    .copied()
                    .filter(|k| (a..=b).contains(k)),
            );
        } else {
            out.push(MoveKind::parse(part)?);
        }
    }
    out.sort();
    out.dedup();
    Ok(out)
}

#[derive(Serialize)]
struct ValidateOutput<'a> {
    valid: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    diagram: Option<&'a ValidationReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    ruleset: Option<String>,
    incomplete: Vec<String>,
}

#[derive(Serialize)]
struct BracketOutput {
    ruleset: String,
    states: u64,
    crossings: usize,
    terms: Vec<TermRecord>,
    fixpoint: bool,
}

#[derive(Serialize)]
struct CertifyOutput {
    #[serde(rename = "move")]
    instance: String,
    certificate: Certificate,
}

/// The report written by `sweep`.
#[derive(Serialize)]
pub struct SweepReport {
    pub ruleset: String,
    pub moves: Vec<String>,
    pub diagrams: Vec<String>,
    pub rows: Vec<SweepRow>,
}

struct Runner<'a, R: Scalar> {
    cli: &'a Cli,
    out: &'a mut dyn Write,
    _scalar: std::marker::PhantomData<R>,
}

impl<'a, R: Scalar> Runner<'a, R> {
    fn new(cli: &'a Cli, out: &'a mut dyn Write) -> Self {
        Runner {
            cli,
            out,
            _scalar: std::marker::PhantomData,
        }
    }

    fn emit(&mut self, text: &str) -> CliResult<()> {
        self.out
            .write_all(text.as_bytes())
            .map_err(|source| CliError::Io {
                path: PathBuf::from("<stdout>"),
                source,
            })
    }

    fn options(&self, b: &BudgetArgs) -> (BracketOptions, Budget) {
        (
            BracketOptions {
                max_steps: b.budget,
                workers: self.cli.workers,
            },
            Budget {
                max_nodes: b.budget,
                max_depth: b.depth,
                workers: self.cli.workers,
            },
        )
    }

    fn run(mut self) -> CliResult<i32> {
        match &self.cli.command {
            Command::Validate { diagram, rules } => {
                self.validate(diagram.as_deref(), rules.as_deref())
            }
            Command::Bracket {
                diagram,
                rules,
                budget,
            } => self.bracket(diagram, rules, budget),
            Command::Equiv {
                a,
                b,
                rules,
                input,
                budget,
            } => self.equiv(a, b, rules, *input, budget),
            Command::Certify {
                diagram,
                rules,
                kind,
                direction,
                variant,
                site,
                budget,
            } => self.certify(diagram, rules, kind, *direction, *variant, *site, budget),
            Command::Sweep {
                corpus,
                rules,
                moves,
                out,
                deterministic,
                budget,
            } => self.sweep(corpus, rules, moves, out, *deterministic, budget),
        }
    }

    fn validate(&mut self, diagram: Option<&Path>, rules: Option<&Path>) -> CliResult<i32> {
        if diagram.is_none() && rules.is_none() {
            return Err(CliError::Usage(
                "validate needs --diagram and/or --rules".into(),
            ));
        }
        let report = diagram.map(load_diagram).transpose()?.map(|d| d.validate());
        let rs = rules.map(load_rules::<R>).transpose()?;
        let valid = report.as_ref().is_none_or(|r| r.is_valid());
        let incomplete = rs
            .as_ref()
            .map(|r| r.incomplete.clone())
            .unwrap_or_default();
        if self.cli.json {
            let text = json(&ValidateOutput {
                valid,
                diagram: report.as_ref(),
                ruleset: rs.as_ref().map(|r| r.name.clone()),
                incomplete: incomplete.clone(),
            });
            self.emit(&text)?;
        } else {
            let mut text = String::new();
            if let Some(r) = &report {
                text += &if r.is_valid() {
                    "diagram: valid\n".to_string()
                } else {
                    format!("diagram: {r}\n")
                };
            }
            if let Some(r) = &rs {
                text += &format!(
                    "ruleset {}: {} smoothing, {} relation, {} scalar rules",
                    r.name,
                    r.smoothing.len(),
                    r.relations.len(),
                    r.scalars.len()
                );
                if !incomplete.is_empty() {
                    text += &format!("; incomplete: {}", incomplete.join(", "));
                }
                text.push('\n');
            }
            self.emit(&text)?;
        }
        Ok(if valid { EXIT_OK } else { EXIT_INVALID })
    }

    fn bracket(&mut self, diagram: &Path, rules: &Path, budget: &BudgetArgs) -> CliResult<i32> {
        let d = load_diagram(diagram)?;
        let rs = load_rules::<R>(rules)?;
        let (opts, _) = self.options(budget);
        let (sum, report) = bracket(&d, &rs, opts)?;
        let text = if self.cli.json {
            json(&BracketOutput {
                ruleset: rs.name.clone(),
                states: report.states,
                crossings: report.crossings,
                terms: sum.records(&rs.vars),
                fixpoint: report.normalization.fixpoint,
            })
        } else {
            let mut t = sum.to_text(&rs.vars, false) + "\n";
            if !report.normalization.fixpoint {
                t += "# normalization budget exhausted\n";
            }
            t
        };
        self.emit(&text)?;
        Ok(EXIT_OK)
    }

    fn load_sum(
        &self,
        path: &Path,
        kind: InputKind,
        rs: &RuleSet<R>,
        opts: BracketOptions,
    ) -> CliResult<FormalSum<R>> {
        match kind {
            InputKind::Diagram => Ok(bracket(&load_diagram(path)?, rs, opts)?.0),
            InputKind::Sum => in_file(
                path,
                FormalSum::parse(&read(path)?, &rs.vars, rs.allow_mirror),
            ),
        }
    }

    fn equiv(
        &mut self,
        a: &Path,
        b: &Path,
        rules: &Path,
        input: Option<InputKind>,
        budget: &BudgetArgs,
    ) -> CliResult<i32> {
        let rs = load_rules::<R>(rules)?;
        let (opts, search) = self.options(budget);
        let kind = |p: &Path| {
            input.unwrap_or(if p.extension().is_some_and(|e| e == DIAGRAM_EXT) {
                InputKind::Diagram
            } else {
                InputKind::Sum
            })
        };
        let sa = self.load_sum(a, kind(a), &rs, opts)?;
        let sb = self.load_sum(b, kind(b), &rs, opts)?;
        let result = equivalent(&rs, &sa, &sb, search)?;
        let text = if self.cli.json {
            json(&result)
        } else {
            match &result {
                Equivalence::Equal { trace } => {
                    format!("equal ({} steps)\n{}", trace.len(), trace_text(trace))
                }
                Equivalence::Unknown { explored, reason } => {
                    format!("unknown after {explored} sums: {reason}\n")
                }
            }
        };
        self.emit(&text)?;
        Ok(match result {
            Equivalence::Equal { .. } => EXIT_OK,
            Equivalence::Unknown { .. } => EXIT_UNKNOWN,
        })
    }

    #[allow(clippy::too_many_arguments)]
    fn certify(
        &mut self,
        diagram: &Path,
        rules: &Path,
        kind: &str,
        direction: DirectionArg,
        variant: Option<usize>,
        site: Option<usize>,
        budget: &BudgetArgs,
    ) -> CliResult<i32> {
        let d = load_diagram(diagram)?;
        let rs = load_rules::<R>(rules)?;
        rs.require_complete()?;
        let kind = MoveKind::parse(kind).map_err(|e| CliError::Usage(e.to_string()))?;
        let direction = match direction {
            DirectionArg::Apply => MoveDirection::Apply,
            DirectionArg::Inverse => MoveDirection::Inverse,
        };
        let mut sites: Vec<_> = enumerate_move_sites(&d, kind, direction)
            .into_iter()
            .filter(|m| variant.is_none_or(|v| m.variant == v))
            .collect();
        if let Some(i) = site {
            if i >= sites.len() {
                return Err(Error::InvalidSite(format!(
                    "{kind} has {} sites, asked for {i}",
                    sites.len()
                ))
                .into());
            }
            sites = vec![sites.swap_remove(i)];
        }
        let (opts, search) = self.options(budget);
        let mut results = Vec::new();
        for mv in &sites {
            results.push(CertifyOutput {
                instance: mv.to_string(),
                certificate: certify_invariance(&d, mv, &rs, opts, search)?,
            });
        }
        let unknown = results
            .iter()
            .any(|r| matches!(r.certificate, Certificate::Unknown { .. }));
        let text = if self.cli.json {
            json(&results)
        } else if results.is_empty() {
            "no sites: certified (empty trace)\n".to_string()
        } else {
            results
                .iter()
                .map(|r| match &r.certificate {
                    Certificate::Certified { trace } => {
                        format!("{}: certified ({} steps)\n", r.instance, trace.len())
                    }
                    Certificate::Unknown {
                        explored, reason, ..
                    } => {
                        format!("{}: unknown after {explored} sums: {reason}\n", r.instance)
                    }
                })
                .collect()
        };
        self.emit(&text)?;
        Ok(if unknown { EXIT_UNKNOWN } else { EXIT_OK })
    }

    fn sweep(
        &mut self,
        corpus: &Path,
        rules: &Path,
        moves: &str,
        out: &Path,
        deterministic: bool,
        budget: &BudgetArgs,
    ) -> CliResult<i32> {
        let rs = load_rules::<R>(rules)?;
        rs.require_complete()?;
        let kinds = parse_moves(moves).map_err(|e| CliError::Usage(e.to_string()))?;
        let io = |source| CliError::Io {
            path: corpus.to_path_buf(),
            source,
        };
        let mut files: Vec<PathBuf> = fs::read_dir(corpus)
            .map_err(io)?
            .map(|e| e.map(|e| e.path()))
            .collect::<Result<_, _>>()
            .map_err(io)?;
        files.retain(|p| p.extension().is_some_and(|e| e == DIAGRAM_EXT));
        files.sort();
        let (opts, search) = self.options(budget);
        let mut report = SweepReport {
            ruleset: rs.name.clone(),
            moves: kinds.iter().map(|k| k.to_string()).collect(),
            diagrams: Vec::new(),
            rows: Vec::new(),
        };
        for f in &files {
            let name = f
                .file_stem()
                .unwrap_or_default()
                .to_string_lossy()
                .into_owned();
            let d = load_diagram(f)?;
            report
                .rows
                .extend(sweep(&name, &d, &kinds, &rs, opts, search));
            report.diagrams.push(name);
        }
        if deterministic {
            for r in &mut report.rows {
                r.wall_ms = 0.0;
            }
        }
        fs::write(out, json(&report)).map_err(|source| CliError::Io {
            path: out.to_path_buf(),
            source,
        })?;
        let count = |o: &str| report.rows.iter().filter(|r| r.outcome == o).count();
        let (certified, unknown, failed) = (count("certified"), count("unknown"), count("error"));
        let summary = format!(
            "{} diagrams, {} cells: {certified} certified, {unknown} unknown, {failed} errors\n",
            report.diagrams.len(),
            report.rows.len()
        );
        if !self.cli.json {
            self.emit(&summary)?;
        }
        Ok(if failed > 0 {
            EXIT_INVALID
        } else if unknown > 0 {
            EXIT_UNKNOWN
        } else {
            EXIT_OK
        })
    }
}

fn trace_text(t: &Trace) -> String {
    let line = |side: &str, s: &Step| {
        format!(
            "  {side} {} {:?} site {} on {}\n",
            s.rule, s.direction, s.site, s.key
        )
    };
    t.from_a
        .iter()
        .map(|s| line("a:", s))
        .chain(t.from_b.iter().map(|s| line("b:", s)))
        .collect()
}
