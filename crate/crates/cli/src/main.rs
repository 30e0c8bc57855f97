use std::fs;
use std::io::{self, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use treeweights::nj::{cherry_scan, nj_classic, nj_from_triples, nj_pruning};
use treeweights::oracle::{realizable_doubles, realizable_triples, MAX_LEAVES};
use treeweights::reconstruct::{
    reconstruct_from_doubles, reconstruct_from_doubles_via_triples, reconstruct_from_triples, report_json,
};
use treeweights::tree::parse_newick;
use treeweights::weights::{
    buneman_check, derived_pairwise_consistent, emit_doubles, emit_triples, parse_doubles, parse_triples,
    DerivedPairwise, Verdict,
};
use treeweights::{random_tree, tree_equal, Rational, Scalar, WeightedTree};

/// Realizability, reconstruction and neighbor joining for tree weights.
#[derive(Debug, Parser)]
#[command(name = "treeweights", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Rational,
    Float,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Variant {
    Classic,
    Pruning,
}

#[derive(Debug, clap::Args)]
struct Io {
    /// Input file; stdin when omitted or `-`.
    input: Option<PathBuf>,
    /// Output file; stdout when omitted.
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Random canonical tree as Newick.
    Gen {
        #[arg(long)]
        leaves: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0.5)]
        min_weight: f64,
        #[arg(long, default_value_t = 10.0)]
        max_weight: f64,
        /// Only binary topologies.
        #[arg(long)]
        binary: bool,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Pairwise or triple weights of a Newick tree.
    Weights {
        #[command(flatten)]
        io: Io,
        #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u8).range(2..=3))]
        order: u8,
        #[arg(long, value_enum)]
        mode: Option<Mode>,
    },
    /// Four-point verdict (order 2) or derived-pairwise and four-point
    /// verdict (order 3), without reconstructing.
    Check {
        #[command(flatten)]
        io: Io,
        #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u8).range(2..=3))]
        order: u8,
        /// Defaults to 0 in rational mode and 1e-9 in float mode.
        #[arg(long)]
        tol: Option<String>,
        #[arg(long, value_enum)]
        mode: Option<Mode>,
    },
    /// Decide realizability and print the realizing tree as Newick.
    Reconstruct {
        #[command(flatten)]
        io: Io,
        #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u8).range(2..=3))]
        order: u8,
        /// Defaults to 0 in rational mode and 1e-9 in float mode.
        #[arg(long)]
        tol: Option<String>,
        #[arg(long, value_enum)]
        mode: Option<Mode>,
        /// Reject trees with a non-positive edge.
        #[arg(long)]
        require_positive: bool,
        /// Reconstruct pairwise input through its derived triple weights.
        #[arg(long)]
        via_triples: bool,
        /// Write the JSON trace here (`-` for stdout instead of Newick).
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Neighbor joining.
    Nj {
        #[command(flatten)]
        io: Io,
        #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u8).range(2..=3))]
        order: u8,
        #[arg(long, value_enum, default_value_t = Variant::Classic)]
        variant: Variant,
        /// Defaults to 0 in rational mode and 1e-9 in float mode.
        #[arg(long)]
        epsilon: Option<String>,
        #[arg(long, value_enum)]
        mode: Option<Mode>,
        /// Write pruning telemetry as JSON to stderr.
        #[arg(long)]
        telemetry: bool,
    },
    /// Compare two Newick trees.
    Compare {
        a: PathBuf,
        b: PathBuf,
        /// Defaults to 0 in rational mode and 1e-9 in float mode.
        #[arg(long)]
        tol: Option<String>,
        #[arg(long, value_enum)]
        mode: Option<Mode>,
    },
    /// Brute-force verdict over every topology (at most 8 labels, exact).
    Oracle {
        #[command(flatten)]
        io: Io,
        #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u8).range(2..=3))]
        order: u8,
        #[arg(long)]
        require_positive: bool,
    },
    /// Entries examined and time of one cherry scan per size.
    Bench {
        #[arg(long, value_delimiter = ',', default_value = "100,200,400,800")]
        sizes: Vec<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Defaults to 0 in rational mode and 1e-9 in float mode.
        #[arg(long)]
        epsilon: Option<String>,
        #[arg(long, value_enum)]
        mode: Option<Mode>,
    },
}

/// Successful run; `false` means the verdict was negative (exit 2).
type Affirmed = bool;

fn read_input(path: &Option<PathBuf>) -> Result<String> {
    match path {
        Some(p) if p.as_os_str() != "-" => fs::read_to_string(p).with_context(|| format!("reading {}", p.display())),
        _ => {
            let mut s = String::new();
            io::stdin().read_to_string(&mut s).context("reading stdin")?;
            Ok(s)
        }
    }
}

fn write_output(path: &Option<PathBuf>, text: &str) -> Result<()> {
    match path {
        Some(p) if p.as_os_str() != "-" => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        _ => {
            let mut out = io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
            Ok(())
        }
    }
}

fn with_newline(mut s: String) -> String {
    if !s.ends_with('\n') {
        s.push('\n');
    }
    s
}

fn pretty(v: &Value) -> String {
    with_newline(serde_json::to_string_pretty(v).expect("json"))
}

fn parse_tol<T: Scalar>(text: &Option<String>, name: &str) -> Result<T> {
    let text = text.as_deref().unwrap_or(if T::EXACT { "0" } else { "1e-9" });
    let v = T::parse_value(text).with_context(|| format!("invalid --{name} value {text:?}"))?;
    if v < T::zero() {
        bail!("--{name} must be nonnegative");
    }
    Ok(v)
}

fn num<T: Scalar>(v: &T) -> Value {
    if T::EXACT {
        json!(v.exact_text())
    } else {
        json!(v.to_f64_lossy())
    }
}

fn gen(leaves: usize, seed: u64, lo: f64, hi: f64, binary: bool, out: &Option<PathBuf>) -> Result<Affirmed> {
    let tree: WeightedTree<Rational> = random_tree(leaves, seed, lo, hi, binary)?;
    write_output(out, &with_newline(tree.to_newick()))?;
    Ok(true)
}

fn weights<T: Scalar>(io: &Io, order: u8) -> Result<Affirmed> {
    let tree: WeightedTree<T> = parse_newick(read_input(&io.input)?.trim())?;
    let text = if order == 2 {
        emit_doubles(&tree.double_weights())
    } else {
        emit_triples(&tree.triple_weights()?)
    };
    write_output(&io.out, &text)?;
    Ok(true)
}

fn check<T: Scalar>(io: &Io, order: u8, tol: &Option<String>) -> Result<Affirmed> {
    let tol: T = parse_tol(tol, "tol")?;
    let text = read_input(&io.input)?;
    let mut report = serde_json::Map::new();
    let doubles = if order == 2 {
        parse_doubles::<T>(&text)?
    } else {
        let t = parse_triples::<T>(&text)?;
        match derived_pairwise_consistent(&t, &tol)? {
            DerivedPairwise::Consistent(d) => d,
            DerivedPairwise::Inconsistent { pair, spread } => {
                report.insert("verdict".into(), json!("not_realizable"));
                report.insert("failed".into(), json!("derived_pairwise"));
                report.insert("witness".into(), json!({ "pair": [pair.0, pair.1], "spread": num(&spread) }));
                write_output(&io.out, &pretty(&Value::Object(report)))?;
                return Ok(false);
            }
        }
    };
    let result = buneman_check(&doubles, &tol);
    report.insert("warnings".into(), json!(result.warnings));
    let ok = match &result.verdict {
        Verdict::Pass => {
            report.insert("verdict".into(), json!("four_point_holds"));
            true
        }
        Verdict::Fail { quad, sums } => {
            report.insert("verdict".into(), json!("not_realizable"));
            report.insert("failed".into(), json!("four_point"));
            report.insert(
                "witness".into(),
                json!({ "quadruple": quad, "sums": sums.iter().map(num).collect::<Vec<_>>() }),
            );
            false
        }
    };
    write_output(&io.out, &pretty(&Value::Object(report)))?;
    Ok(ok)
}

fn reconstruct<T: Scalar>(
    io: &Io,
    order: u8,
    tol: &Option<String>,
    positive: bool,
    via_triples: bool,
    report: &Option<PathBuf>,
) -> Result<Affirmed> {
    let tol: T = parse_tol(tol, "tol")?;
    let text = read_input(&io.input)?;
    let outcome = match (order, via_triples) {
        (3, _) => reconstruct_from_triples(&parse_triples::<T>(&text)?, &tol, positive),
        (_, true) => reconstruct_from_doubles_via_triples(&parse_doubles::<T>(&text)?, &tol, positive),
        _ => reconstruct_from_doubles(&parse_doubles::<T>(&text)?, &tol, positive),
    };
    let report_to_stdout = report.as_ref().is_some_and(|p| p.as_os_str() == "-");
    if let Some(path) = report {
        write_output(&Some(path.clone()), &pretty(&report_json(&outcome)))?;
    }
    match &outcome {
        Ok(r) => {
            if !report_to_stdout {
                write_output(&io.out, &with_newline(r.tree.to_newick()))?;
            }
            Ok(true)
        }
        Err(f) => {
            eprintln!("not realizable: {f}");
            Ok(false)
        }
    }
}

fn nj<T: Scalar>(io: &Io, order: u8, variant: Variant, epsilon: &Option<String>, telemetry: bool) -> Result<Affirmed> {
    let eps: T = parse_tol(epsilon, "epsilon")?;
    let text = read_input(&io.input)?;
    let tree = if order == 3 {
        if variant == Variant::Pruning {
            bail!("the pruning variant takes pairwise weights (--order 2)");
        }
        nj_from_triples(&parse_triples::<T>(&text)?, &eps)?
    } else {
        let d = parse_doubles::<T>(&text)?;
        match variant {
            Variant::Classic => nj_classic(&d)?,
            Variant::Pruning => {
                let (tree, tel) = nj_pruning(&d, &eps)?;
                if telemetry {
                    eprintln!(
                        "{}",
                        json!({
                            "rounds": tel.rounds,
                            "bells_per_round": tel.bells_per_round,
                            "entries_per_round": tel.entries_per_round,
                            "fallback_joins": tel.fallback_joins,
                        })
                    );
                }
                tree
            }
        }
    };
    write_output(&io.out, &with_newline(tree.to_newick()))?;
    Ok(true)
}

fn compare<T: Scalar>(a: &PathBuf, b: &PathBuf, tol: &Option<String>) -> Result<Affirmed> {
    let tol: T = parse_tol(tol, "tol")?;
    let read = |p: &PathBuf| -> Result<WeightedTree<T>> {
        let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
        parse_newick(text.trim()).with_context(|| format!("parsing {}", p.display()))
    };
    let equal = tree_equal(&read(a)?, &read(b)?, &tol);
    write_output(&None, &pretty(&json!({ "equal": equal })))?;
    Ok(equal)
}

fn oracle(io: &Io, order: u8, positive: bool) -> Result<Affirmed> {
    let text = read_input(&io.input)?;
    let found = if order == 2 {
        let d = parse_doubles::<Rational>(&text)?;
        if d.n() > MAX_LEAVES {
            bail!("the oracle handles at most {MAX_LEAVES} labels, got {}", d.n());
        }
        realizable_doubles(&d, positive)?
    } else {
        let t = parse_triples::<Rational>(&text)?;
        if t.n() > MAX_LEAVES {
            bail!("the oracle handles at most {MAX_LEAVES} labels, got {}", t.n());
        }
        realizable_triples(&t, positive)?
    };
    let report = match &found {
        Some(tree) => json!({ "verdict": "realizable", "newick": tree.to_newick() }),
        None => json!({ "verdict": "not_realizable" }),
    };
    write_output(&io.out, &pretty(&report))?;
    Ok(found.is_some())
}

fn bench<T: Scalar>(sizes: &[usize], seed: u64, epsilon: &Option<String>) -> Result<Affirmed> {
    let eps: T = parse_tol(epsilon, "epsilon")?;
    let mut lines = String::new();
    for &n in sizes {
        if n < 4 {
            bail!("bench sizes must be at least 4, got {n}");
        }
        let tree: WeightedTree<T> = random_tree(n, seed.wrapping_add(n as u64), 0.5, 10.0, false)?;
        let d = tree.double_weights();
        let start = Instant::now();
        let scan = cherry_scan(&d, &eps)?;
        let seconds = start.elapsed().as_secs_f64();
        lines.push_str(&format!(
            "{}\n",
            json!({
                "n": n,
                "entries_examined": scan.entries_examined,
                "entries_per_n2": scan.entries_examined as f64 / (n * n) as f64,
                "bells": scan.bells.len(),
                "seconds": seconds,
            })
        ));
    }
    write_output(&None, &lines)?;
    Ok(true)
}

macro_rules! by_mode {
    ($mode:expr, $default:expr, $f:ident($($arg:expr),*)) => {
        match $mode.unwrap_or($default) {
            Mode::Rational => $f::<Rational>($($arg),*),
            Mode::Float => $f::<f64>($($arg),*),
        }
    };
}

fn run(cli: Cli) -> Result<Affirmed> {
    match &cli.command {
        Command::Gen {
            leaves,
            seed,
            min_weight,
            max_weight,
            binary,
            out,
        } => gen(*leaves, *seed, *min_weight, *max_weight, *binary, out),
        Command::Weights { io, order, mode } => by_mode!(*mode, Mode::Rational, weights(io, *order)),
        Command::Check { io, order, tol, mode } => by_mode!(*mode, Mode::Rational, check(io, *order, tol)),
        Command::Reconstruct {
            io,
            order,
            tol,
            mode,
            require_positive,
            via_triples,
            report,
        } => by_mode!(
            *mode,
            Mode::Rational,
            reconstruct(io, *order, tol, *require_positive, *via_triples, report)
        ),
        Command::Nj {
            io,
            order,
            variant,
            epsilon,
            mode,
            telemetry,
        } => by_mode!(*mode, Mode::Float, nj(io, *order, *variant, epsilon, *telemetry)),
        Command::Compare { a, b, tol, mode } => by_mode!(*mode, Mode::Rational, compare(a, b, tol)),
        Command::Oracle {
            io,
            order,
            require_positive,
        } => oracle(io, *order, *require_positive),
        Command::Bench {
            sizes,
            seed,
            epsilon,
            mode,
        } => by_mode!(*mode, Mode::Float, bench(sizes, *seed, epsilon)),
    }
}

fn configure_threads() -> Result<()> {
    if let Ok(v) = std::env::var("TREEWEIGHTS_THREADS") {
        let threads: usize = v
            .parse()
            .ok()
            .filter(|&t| t > 0)
            .with_context(|| format!("TREEWEIGHTS_THREADS must be a positive integer, got {v:?}"))?;
        rayon::ThreadPoolBuilder::new().num_threads(threads).build_global()?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = configure_threads().and_then(|()| run(cli));
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
