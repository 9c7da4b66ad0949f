//! The `fsq` command line: argument parsing, input specs and output formatting.
//!
//! [`run`] takes the argument vector and two writers and returns the exit
//! status, so the whole front end can be driven from tests.

use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use fsq::constructions::{blow_up, delta_value, make_a, make_b, random_square, SamplerConfig};
use fsq::equivalence::are_equivalent;
use fsq::par::Execution;
use fsq::search::{decompose_plex, find_balanced_with, find_exact, find_k_plex, find_k_plex_seeded, swap_descent};
use fsq::search::{SearchOutcome, SearchStatus, DEFAULT_RESTARTS};
use fsq::verify::{self, VerificationReport, VerifyConfig};
use fsq::{Diagonal, Error, FrequencySquare};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATION: i32 = 2;
pub const EXIT_GUARD: i32 = 3;
pub const EXIT_USAGE: i32 = 64;
pub const EXIT_FILE: i32 = 66;

/// Seed used when `--seed` is not given.
pub const DEFAULT_SEED: u64 = verify::DEFAULT_SEED;
/// Environment variable holding the default `--budget`.
pub const BUDGET_ENV: &str = "FSQ_BUDGET";

#[derive(Debug, Parser)]
#[command(name = "fsq", version, about = "Frequency squares and their balanced diagonals")]
struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Grid)]
    format: Format,
    /// Write results to this file instead of standard output.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    /// Plain text grids and tables.
    Grid,
    /// JSON.
    Structured,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print a named square: A:<lambda>, B:<n>, B:<n>x<lambda>, rand:<m>:<lambda>:<seed>[:<steps>].
    Gen { spec: String },
    /// Search for a balanced diagonal.
    Find {
        /// A named square or a file.
        input: String,
        #[arg(long, value_enum, default_value_t = Algorithm::Auto)]
        algorithm: Algorithm,
        #[command(flatten)]
        knobs: Knobs,
    },
    /// Search for a k-plex of a Latin square.
    Plex {
        input: String,
        #[arg(long)]
        k: usize,
        /// Also split the plex into k disjoint diagonals.
        #[arg(long)]
        decompose: bool,
        #[command(flatten)]
        knobs: Knobs,
    },
    /// Decide whether two squares are equivalent.
    Equiv { a: String, b: String },
    /// Run a verification target.
    Verify {
        #[arg(value_enum)]
        target: VerifyTarget,
        #[command(flatten)]
        params: VerifyParams,
    },
    /// The Delta statistic on B_n(lambda).
    Delta { n: usize, lambda: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Algorithm {
    Exact,
    Descent,
    Auto,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum VerifyTarget {
    M2,
    M3,
    Bgrid,
    Conjecture,
    SubarrayBound,
}

#[derive(Debug, Args)]
struct Knobs {
    #[arg(long)]
    seed: Option<u64>,
    /// Node budget (default from FSQ_BUDGET, else unlimited).
    #[arg(long)]
    budget: Option<u64>,
    #[arg(long, default_value_t = DEFAULT_RESTARTS)]
    restarts: u32,
}

#[derive(Debug, Args)]
struct VerifyParams {
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    lambda: Option<usize>,
    #[arg(long, default_value_t = 6)]
    nmax: usize,
    #[arg(long, default_value_t = 2)]
    lmax: usize,
    /// Sample count for sampled runs; 0 asks for an exhaustive subarray-bound run.
    #[arg(long)]
    samples: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Enumeration budget in squares (default from FSQ_BUDGET).
    #[arg(long)]
    budget: Option<u64>,
    /// Largest order enumerated exhaustively.
    #[arg(long, default_value_t = verify::DEFAULT_ENUMERATION_LIMIT)]
    max_order: usize,
    /// Check one square (subarray-bound only).
    #[arg(long)]
    input: Option<String>,
    /// Run on the calling thread only.
    #[arg(long)]
    sequential: bool,
}

/// A failure with its exit status.
#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self { code: EXIT_USAGE, message: message.into() }
    }

    fn file(message: impl Into<String>) -> Self {
        Self { code: EXIT_FILE, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::TooLarge(_) | Error::BudgetExhausted { .. } | Error::OrderTooLarge { .. } => EXIT_GUARD,
            _ => EXIT_USAGE,
        };
        Self { code, message: e.to_string() }
    }
}

/// What a command produced: text for stdout and an exit status.
struct Output {
    text: String,
    code: i32,
}

/// Runs the command line. Data goes to `out`, diagnostics and timing to `err`.
pub fn run<I, S>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(out, "{e}");
                EXIT_OK
            } else {
                let _ = write!(err, "{e}");
                EXIT_USAGE
            };
        }
    };
    let start = Instant::now();
    let result = dispatch(&cli);
    let _ = writeln!(err, "# elapsed {:.1} ms", start.elapsed().as_secs_f64() * 1e3);
    match result {
        Ok(o) => {
            if let Some(path) = &cli.output {
                if let Err(e) = std::fs::write(path, &o.text) {
                    let _ = writeln!(err, "fsq: cannot write {}: {e}", path.display());
                    return EXIT_FILE;
                }
            } else if out.write_all(o.text.as_bytes()).is_err() {
                return EXIT_FILE;
            }
            o.code
        }
        Err(f) => {
            let _ = writeln!(err, "fsq: {}", f.message);
            f.code
        }
    }
}

fn dispatch(cli: &Cli) -> Result<Output, Failure> {
    let fmt = cli.format;
    match &cli.command {
        Command::Gen { spec } => cmd_gen(spec, fmt),
        Command::Find { input, algorithm, knobs } => cmd_find(input, *algorithm, knobs, fmt),
        Command::Plex { input, k, decompose, knobs } => cmd_plex(input, *k, *decompose, knobs, fmt),
        Command::Equiv { a, b } => cmd_equiv(a, b, fmt),
        Command::Verify { target, params } => cmd_verify(*target, params, fmt),
        Command::Delta { n, lambda } => cmd_delta(*n, *lambda, fmt),
    }
}

/// A loaded square and the seed that produced it, if random.
struct Loaded {
    square: FrequencySquare,
    seed: Option<u64>,
}

fn number<T: std::str::FromStr>(s: &str, spec: &str) -> Result<T, Failure> {
    s.parse().map_err(|_| Failure::usage(format!("bad number {s:?} in {spec:?}")))
}

/// Named squares; anything else is read as a file.
fn load(spec: &str) -> Result<Loaded, Failure> {
    let parts: Vec<&str> = spec.split(':').collect();
    let named = |sq: FrequencySquare| Ok(Loaded { square: sq, seed: None });
    match parts.as_slice() {
        ["A", l] => {
            let l: usize = number(l, spec)?;
            if l == 0 || 2 * l > fsq::MAX_ORDER {
                return Err(Failure::usage(format!("A needs 1 <= lambda <= {}", fsq::MAX_ORDER / 2)));
            }
            named(make_a(l))
        }
        ["B", size] => {
            let (n, l) = match size.split_once('x') {
                Some((n, l)) => (number::<usize>(n, spec)?, number::<usize>(l, spec)?),
                None => (number::<usize>(size, spec)?, 1),
            };
            if n == 0 || l == 0 || n * l > fsq::MAX_ORDER {
                return Err(Failure::usage(format!("B needs n, lambda >= 1 and n * lambda <= {}", fsq::MAX_ORDER)));
            }
            named(blow_up(&make_b(n), l))
        }
        ["rand", m, l, seed, rest @ ..] if rest.len() <= 1 => {
            let (m, l): (usize, usize) = (number(m, spec)?, number(l, spec)?);
            let seed: u64 = number(seed, spec)?;
            if m == 0 || l == 0 || m * l > fsq::MAX_ORDER {
                return Err(Failure::usage(format!("rand needs m, lambda >= 1 and m * lambda <= {}", fsq::MAX_ORDER)));
            }
            let steps = match rest.first() {
                Some(s) => number(s, spec)?,
                None => verify::sample_steps(m * l),
            };
            Ok(Loaded { square: random_square(m, l, SamplerConfig { seed, steps }), seed: Some(seed) })
        }
        _ => {
            let text = std::fs::read_to_string(spec).map_err(|e| Failure::file(format!("cannot read {spec}: {e}")))?;
            let square = FrequencySquare::parse(&text).map_err(|e| Failure::file(format!("{spec}: {e}")))?;
            Ok(Loaded { square, seed: None })
        }
    }
}

fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

fn seed_line(seed: u64) -> String {
    format!("# seed {seed}\n")
}

fn budget_default(flag: Option<u64>) -> Result<Option<u64>, Failure> {
    if flag.is_some() {
        return Ok(flag);
    }
    match std::env::var(BUDGET_ENV) {
        Ok(v) => v.trim().parse().map(Some).map_err(|_| Failure::usage(format!("{BUDGET_ENV}={v:?} is not a number"))),
        Err(_) => Ok(None),
    }
}

fn cmd_gen(spec: &str, fmt: Format) -> Result<Output, Failure> {
    let loaded = load(spec)?;
    let text = match fmt {
        Format::Grid => {
            let mut t = loaded.seed.map(seed_line).unwrap_or_default();
            t.push_str(&loaded.square.to_text());
            t
        }
        Format::Structured => json(&loaded.square),
    };
    Ok(Output { text, code: EXIT_OK })
}

/// The grid with the cells of `d` in brackets.
fn annotated(sq: &FrequencySquare, d: &Diagonal) -> String {
    let width = sq.m().to_string().len();
    let mut out = String::new();
    for r in 0..sq.n() {
        let cells: Vec<String> = (0..sq.n())
            .map(|c| {
                let v = sq.get(r, c);
                if d.sigma()[r] == c {
                    format!("[{v:>width$}]")
                } else {
                    format!(" {v:>width$} ")
                }
            })
            .collect();
        let _ = writeln!(out, "{}", cells.join("").trim_end());
    }
    out
}

#[derive(Serialize)]
struct FindDoc<'a> {
    status: SearchStatus,
    witness: Option<&'a Diagonal>,
    nodes: u64,
    restarts: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
}

fn cmd_find(input: &str, algorithm: Algorithm, knobs: &Knobs, fmt: Format) -> Result<Output, Failure> {
    let loaded = load(input)?;
    let sq = &loaded.square;
    let budget = budget_default(knobs.budget)?;
    let seed = knobs.seed.unwrap_or(DEFAULT_SEED);
    let (outcome, seeded): (SearchOutcome, bool) = match algorithm {
        Algorithm::Exact => (find_exact(sq, budget), false),
        Algorithm::Descent => (swap_descent(sq, seed, knobs.restarts), true),
        Algorithm::Auto => (find_balanced_with(sq, seed, knobs.restarts, budget), true),
    };
    let code = match outcome.status {
        SearchStatus::Unknown if algorithm != Algorithm::Descent => EXIT_GUARD,
        _ => EXIT_OK,
    };
    let seed = seeded.then_some(seed);
    let text = match fmt {
        Format::Structured => json(&FindDoc {
            status: outcome.status,
            witness: outcome.witness.as_ref(),
            nodes: outcome.stats.nodes,
            restarts: outcome.stats.restarts,
            seed,
        }),
        Format::Grid => {
            let mut t = String::new();
            for s in [loaded.seed, seed].into_iter().flatten() {
                t.push_str(&seed_line(s));
            }
            match (&outcome.status, &outcome.witness) {
                (SearchStatus::Found, Some(w)) => {
                    let _ = writeln!(t, "FOUND");
                    let _ = writeln!(t, "sigma {w}");
                    t.push_str(&annotated(sq, w));
                }
                (SearchStatus::ProvedAbsent, _) => t.push_str("ABSENT\n"),
                _ => t.push_str("UNKNOWN\n"),
            }
            t
        }
    };
    Ok(Output { text, code })
}

#[derive(Serialize)]
struct PlexDoc<'a> {
    found: bool,
    plex: Option<&'a fsq::search::PlexSelection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    diagonals: Option<Vec<Diagonal>>,
}

fn cmd_plex(input: &str, k: usize, decompose: bool, knobs: &Knobs, fmt: Format) -> Result<Output, Failure> {
    let loaded = load(input)?;
    let sq = &loaded.square;
    let budget = budget_default(knobs.budget)?;
    let plex = match knobs.seed {
        Some(seed) => find_k_plex_seeded(sq, k, budget, seed)?,
        None => find_k_plex(sq, k, budget)?,
    };
    let diagonals = match (&plex, decompose) {
        (Some(p), true) => Some(decompose_plex(p)?),
        _ => None,
    };
    let text = match fmt {
        Format::Structured => json(&PlexDoc { found: plex.is_some(), plex: plex.as_ref(), diagonals }),
        Format::Grid => {
            let mut t = String::new();
            for s in [loaded.seed, knobs.seed].into_iter().flatten() {
                t.push_str(&seed_line(s));
            }
            match &plex {
                None => t.push_str("NONE\n"),
                Some(p) => {
                    let _ = writeln!(t, "PLEX k={}", p.k());
                    let cells: Vec<String> = p.cells().iter().map(|(r, c)| format!("({},{})", r + 1, c + 1)).collect();
                    let _ = writeln!(t, "cells {}", cells.join(" "));
                    let width = sq.m().to_string().len();
                    for r in 0..sq.n() {
                        let row: Vec<String> = (0..sq.n())
                            .map(|c| {
                                let v = sq.get(r, c);
                                if p.cells().binary_search(&(r, c)).is_ok() {
                                    format!("[{v:>width$}]")
                                } else {
                                    format!(" {v:>width$} ")
                                }
                            })
                            .collect();
                        let _ = writeln!(t, "{}", row.join("").trim_end());
                    }
                    for (i, d) in diagonals.iter().flatten().enumerate() {
                        let _ = writeln!(t, "diagonal {} sigma {d}", i + 1);
                    }
                }
            }
            t
        }
    };
    Ok(Output { text, code: EXIT_OK })
}

fn cmd_equiv(a: &str, b: &str, fmt: Format) -> Result<Output, Failure> {
    let (sa, sb) = (load(a)?.square, load(b)?.square);
    let cert = are_equivalent(&sa, &sb).map_err(|e| match e {
        Error::ShapeMismatch(_) => Failure::usage(e.to_string()),
        other => other.into(),
    })?;
    let text = match fmt {
        Format::Structured => {
            #[derive(Serialize)]
            struct Doc<'a> {
                equivalent: bool,
                certificate: Option<&'a fsq::equivalence::EquivalenceCertificate>,
            }
            json(&Doc { equivalent: cert.is_some(), certificate: cert.as_ref() })
        }
        Format::Grid => match &cert {
            None => "NOT EQUIVALENT\n".to_string(),
            Some(c) => {
                let t = &c.transform;
                let ones = |v: &[usize]| v.iter().map(|x| (x + 1).to_string()).collect::<Vec<_>>().join(" ");
                let syms = t.symbols.iter().map(u8::to_string).collect::<Vec<_>>().join(" ");
                format!(
                    "EQUIVALENT\ntransposed {}\nrows {}\ncols {}\nsymbols {}\n",
                    t.transposed,
                    ones(&t.rows),
                    ones(&t.cols),
                    syms
                )
            }
        },
    };
    Ok(Output { text, code: EXIT_OK })
}

fn cmd_verify(target: VerifyTarget, p: &VerifyParams, fmt: Format) -> Result<Output, Failure> {
    let mut cfg = VerifyConfig {
        exhaustive_limit: p.max_order,
        execution: if p.sequential { Execution::Sequential } else { Execution::Parallel },
        ..VerifyConfig::default()
    };
    if let Some(b) = budget_default(p.budget)? {
        cfg.enumeration_budget = b;
    }
    let seed = p.seed.unwrap_or(DEFAULT_SEED);
    let report: VerificationReport = match target {
        VerifyTarget::M2 => verify::check_theorem_m2(p.lambda.unwrap_or(3), &cfg)?,
        VerifyTarget::M3 => verify::check_theorem_m3(p.lambda.unwrap_or(2), p.samples.unwrap_or(10_000), seed, &cfg)?,
        VerifyTarget::Bgrid => verify::check_b_theorem(p.nmax, p.lmax, &cfg)?,
        VerifyTarget::Conjecture => {
            let m = p.m.ok_or_else(|| Failure::usage("conjecture needs --m"))?;
            let lambda = p.lambda.ok_or_else(|| Failure::usage("conjecture needs --lambda"))?;
            verify::check_conjecture(m, lambda, p.samples.unwrap_or(1000), seed, &cfg)?
        }
        VerifyTarget::SubarrayBound => match &p.input {
            Some(spec) => verify::check_subarray_bound(&load(spec)?.square)?,
            None => {
                let samples = match p.samples.unwrap_or(100) {
                    0 => None,
                    k => Some(k),
                };
                verify::check_subarray_family(p.lambda.unwrap_or(2), samples, seed, &cfg)?
            }
        },
    };
    let code = if report.held() { EXIT_OK } else { EXIT_VIOLATION };
    let text = match fmt {
        Format::Structured => json(&report),
        Format::Grid => report.render(),
    };
    Ok(Output { text, code })
}

fn cmd_delta(n: usize, lambda: usize, fmt: Format) -> Result<Output, Failure> {
    if n == 0 || lambda == 0 || n * lambda > fsq::MAX_ORDER {
        return Err(Failure::usage(format!("delta needs n, lambda >= 1 and n * lambda <= {}", fsq::MAX_ORDER)));
    }
    let sq = blow_up(&make_b(n), lambda);
    let size = n * lambda;
    let mut values = vec![vec![0i64; size]; size];
    for (r, row) in values.iter_mut().enumerate() {
        for (c, v) in row.iter_mut().enumerate() {
            *v = delta_value(n, lambda, r + 1, c + 1, sq.get(r, c) as usize)?.value;
        }
    }
    let all_zero = values.iter().flatten().all(|v| v.rem_euclid(n as i64) == 0);
    let balanced_residue = (lambda * (n * (n - 1) / 2)) % n;
    let parity_even = ((n - 1) * lambda).is_multiple_of(2);
    let text = match fmt {
        Format::Structured => {
            #[derive(Serialize)]
            struct Doc {
                n: usize,
                lambda: usize,
                delta: Vec<Vec<i64>>,
                all_cells_zero_mod_n: bool,
                balanced_sum_residue: usize,
                balanced_diagonal_exists: bool,
            }
            json(&Doc {
                n,
                lambda,
                delta: values,
                all_cells_zero_mod_n: all_zero,
                balanced_sum_residue: balanced_residue,
                balanced_diagonal_exists: parity_even,
            })
        }
        Format::Grid => {
            let width = values.iter().flatten().map(|v| v.to_string().len()).max().unwrap_or(1);
            let mut t = format!("# Delta(r, c) = ceil(r/lambda) + ceil(c/lambda) - entry on B_{n}({lambda})\n");
            for row in &values {
                let cells: Vec<String> = row.iter().map(|v| format!("{v:>width$}")).collect();
                let _ = writeln!(t, "{}", cells.join(" "));
            }
            let _ = writeln!(t, "all cells 0 mod {n}: {}", if all_zero { "yes" } else { "no" });
            let _ = writeln!(t, "balanced diagonal sum mod {n}: {balanced_residue}");
            let _ = writeln!(t, "balanced diagonal exists: {}", if parity_even { "yes" } else { "no" });
            t
        }
    };
    Ok(Output { text, code: if all_zero { EXIT_OK } else { EXIT_VIOLATION } })
}
