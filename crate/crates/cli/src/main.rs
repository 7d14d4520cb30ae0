//! `cooc`: build incidence structures and compute co-occurrence tensors,
//! PMI values, and fiber embeddings.
//!
//! Exit codes: 0 success, 2 usage/input error, 3 capacity exceeded,
//! 4 verification mismatch.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use cooctensor::cooc::{
    self, cooc_matrix, cooc_tensor_direct, cooc_tensor_fsp_with_budget, multiset_count,
    tuple_visit_estimate, CoocTensor,
};
use cooctensor::embed::{fiber_space_matrices, pmi_slice, slice, FactorConfig};
use cooctensor::pmi::{pairwise_pmi_with, specific_correlation_with, Normalizer, PmiOptions};
use cooctensor::{Error, IncidenceMatrix};

#[derive(Parser)]
#[command(name = "cooc", version, about = "Co-occurrence tensor toolkit for hypergraphs")]
struct Cli {
    /// Strict reproducibility mode: `embed` then requires an explicit --seed.
    #[arg(long, global = true)]
    ci: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build an incidence structure and write it as incidence TSV
    Build(BuildArgs),
    /// Compute an order-k co-occurrence tensor as COO TSV
    Cooc(CoocArgs),
    /// Compute pairwise PMI or multivariate specific correlation
    Pmi(PmiArgs),
    /// Factorize the order-3 tensor's node slices into fiber embeddings
    Embed(EmbedArgs),
    /// Cross-check both tensor paths against the counting oracle
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum InputKind {
    Corpus,
    Baskets,
    IncidenceTsv,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum EdgesPer {
    /// One edge per token position (sliding window)
    Window,
    /// One edge per line
    Sentence,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum TensorPath {
    Fsp,
    Direct,
    Both,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum NormalizerArg {
    Nodes,
    Edges,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum EmbedTarget {
    Counts,
    Pmi,
}

#[derive(Args)]
struct BuildArgs {
    /// Input file
    #[arg(long)]
    input: PathBuf,
    /// How to interpret the input
    #[arg(long, value_enum)]
    kind: InputKind,
    /// Corpus only: window radius (edges-per window mode)
    #[arg(long)]
    radius: Option<usize>,
    /// Corpus only: one edge per window or per line
    #[arg(long, value_enum)]
    edges_per: Option<EdgesPer>,
    /// Corpus only: keep the original letter case
    #[arg(long)]
    no_case_fold: bool,
    /// Corpus only: windows do not cross line boundaries
    #[arg(long)]
    break_at_lines: bool,
    /// Output path (stdout if omitted)
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct CoocArgs {
    /// Incidence TSV input
    #[arg(long)]
    input: PathBuf,
    /// Tensor order k
    #[arg(long, default_value_t = 3)]
    order: usize,
    /// Computation path; `both` cross-verifies the two
    #[arg(long, value_enum, default_value_t = TensorPath::Direct)]
    path: TensorPath,
    /// Cap on the sum over edges of |s|^k tuple visits
    #[arg(long, default_value_t = cooc::DEFAULT_TUPLE_BUDGET)]
    budget: u64,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct PmiArgs {
    /// Incidence TSV input
    #[arg(long)]
    input: PathBuf,
    /// Tensor order k
    #[arg(long, default_value_t = 2)]
    order: usize,
    /// Scale factor of the PMI numerator
    #[arg(long, value_enum, default_value_t = NormalizerArg::Nodes)]
    normalizer: NormalizerArg,
    /// Clamp negative values to zero (positive PMI)
    #[arg(long)]
    positive: bool,
    #[arg(long, default_value_t = cooc::DEFAULT_TUPLE_BUDGET)]
    budget: u64,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct EmbedArgs {
    /// Incidence TSV input
    #[arg(long)]
    input: PathBuf,
    /// Embedding dimension
    #[arg(long)]
    dim: usize,
    #[arg(long, default_value_t = 500)]
    max_iters: usize,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    /// RNG seed (default 42; required with --ci)
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = 1e-9)]
    ridge: f64,
    /// Factorize raw count slices or specific-correlation slices
    #[arg(long, value_enum, default_value_t = EmbedTarget::Counts)]
    target: EmbedTarget,
    #[arg(long, default_value_t = cooc::DEFAULT_TUPLE_BUDGET)]
    budget: u64,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Incidence TSV input
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value_t = 3)]
    order: usize,
    #[arg(long, default_value_t = cooc::DEFAULT_TUPLE_BUDGET)]
    budget: u64,
}

enum CliError {
    /// Usage or input problem: exit 2.
    Input(String),
    /// Work estimate over budget: exit 3.
    Capacity(String),
    /// The computation paths disagree: exit 4.
    Mismatch(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Capacity(msg) => CliError::Capacity(msg),
            other => CliError::Input(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Capacity(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
        Err(CliError::Mismatch(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(4)
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Build(args) => cmd_build(args),
        Command::Cooc(args) => cmd_cooc(args),
        Command::Pmi(args) => cmd_pmi(args),
        Command::Embed(args) => cmd_embed(args, cli.ci),
        Command::Verify(args) => cmd_verify(args),
    }
}

fn read_input(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn load_incidence(path: &Path) -> Result<IncidenceMatrix, CliError> {
    let text = read_input(path)?;
    IncidenceMatrix::from_tsv_str(&text)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn emit(output: Option<&Path>, content: &str) -> Result<(), CliError> {
    match output {
        Some(path) => write_atomic(path, content),
        None => {
            std::io::stdout().write_all(content.as_bytes())?;
            Ok(())
        }
    }
}

/// Writes through a temp file in the target directory, then renames.
fn write_atomic(path: &Path, content: &str) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(content.as_bytes())?;
    tmp.persist(path).map_err(|e| CliError::from(e.error))?;
    Ok(())
}

fn tokenize(line: &str, case_fold: bool) -> Vec<String> {
    line.split_whitespace()
        .map(|w| w.trim_matches(|c: char| !c.is_alphanumeric()))
        .filter(|w| !w.is_empty())
        .map(|w| {
            if case_fold {
                w.to_lowercase()
            } else {
                w.to_owned()
            }
        })
        .collect()
}

fn cmd_build(args: BuildArgs) -> Result<(), CliError> {
    if args.kind != InputKind::Corpus
        && (args.radius.is_some()
            || args.edges_per.is_some()
            || args.no_case_fold
            || args.break_at_lines)
    {
        return Err(CliError::Input(
            "--radius, --edges-per, --no-case-fold, and --break-at-lines apply only to --kind corpus".into(),
        ));
    }
    if args.radius == Some(0) {
        return Err(CliError::Input("--radius must be >= 1".into()));
    }
    let text = read_input(&args.input)?;
    let incidence = match args.kind {
        InputKind::Baskets => IncidenceMatrix::from_basket_str(&text)?,
        InputKind::IncidenceTsv => IncidenceMatrix::from_tsv_str(&text)?,
        InputKind::Corpus => {
            let case_fold = !args.no_case_fold;
            let radius = args.radius.unwrap_or(2);
            match args.edges_per.unwrap_or(EdgesPer::Window) {
                EdgesPer::Sentence => {
                    let edges: Vec<Vec<String>> = text
                        .lines()
                        .map(|line| tokenize(line, case_fold))
                        .filter(|tokens| !tokens.is_empty())
                        .collect();
                    IncidenceMatrix::from_edge_sets(&edges)?
                }
                EdgesPer::Window if args.break_at_lines => {
                    let mut edges: Vec<Vec<String>> = Vec::new();
                    for line in text.lines() {
                        let tokens = tokenize(line, case_fold);
                        for t in 0..tokens.len() {
                            let lo = t.saturating_sub(radius);
                            let hi = (t + radius).min(tokens.len() - 1);
                            edges.push(tokens[lo..=hi].to_vec());
                        }
                    }
                    IncidenceMatrix::from_edge_sets(&edges)?
                }
                EdgesPer::Window => {
                    let tokens = tokenize(&text, case_fold);
                    IncidenceMatrix::corpus_windows(&tokens, radius)?
                }
            }
        }
    };
    emit(args.output.as_deref(), &incidence.to_tsv_string())
}

/// CLI-level guard shared by every tensor-computing subcommand.
fn check_budget(inc: &IncidenceMatrix, k: usize, budget: u64) -> Result<(), CliError> {
    if budget == 0 {
        return Err(CliError::Input("--budget must be positive".into()));
    }
    let estimate = tuple_visit_estimate(inc, k);
    if estimate > budget as u128 {
        return Err(CliError::Capacity(format!(
            "tuple-visit estimate {estimate} exceeds budget {budget}"
        )));
    }
    Ok(())
}

/// First canonical index where the two tensors disagree.
fn first_mismatch(a: &CoocTensor, b: &CoocTensor) -> Option<(Vec<usize>, i64, i64)> {
    let mut left = a.canonical_entries().peekable();
    let mut right = b.canonical_entries().peekable();
    loop {
        match (left.peek(), right.peek()) {
            (None, None) => return None,
            (Some(&(idx, v)), None) => return Some((idx.to_vec(), v, 0)),
            (None, Some(&(idx, v))) => return Some((idx.to_vec(), 0, v)),
            (Some(&(li, lv)), Some(&(ri, rv))) => {
                if li == ri {
                    if lv != rv {
                        return Some((li.to_vec(), lv, rv));
                    }
                    left.next();
                    right.next();
                } else if li < ri {
                    return Some((li.to_vec(), lv, 0));
                } else {
                    return Some((ri.to_vec(), 0, rv));
                }
            }
        }
    }
}

fn cmd_cooc(args: CoocArgs) -> Result<(), CliError> {
    let inc = load_incidence(&args.input)?;
    check_budget(&inc, args.order, args.budget)?;
    let tensor = match args.path {
        TensorPath::Fsp => cooc_tensor_fsp_with_budget(&inc, args.order, args.budget)?,
        TensorPath::Direct => cooc_tensor_direct(&inc, args.order)?,
        TensorPath::Both => {
            let fsp = cooc_tensor_fsp_with_budget(&inc, args.order, args.budget)?;
            let direct = cooc_tensor_direct(&inc, args.order)?;
            if let Some((idx, a, b)) = first_mismatch(&fsp, &direct) {
                return Err(CliError::Mismatch(format!(
                    "paths disagree at index {idx:?}: fsp {a}, direct {b}"
                )));
            }
            fsp
        }
    };
    emit(args.output.as_deref(), &tensor.to_tsv_string())
}

fn cmd_pmi(args: PmiArgs) -> Result<(), CliError> {
    let inc = load_incidence(&args.input)?;
    check_budget(&inc, args.order, args.budget)?;
    let options = PmiOptions {
        normalizer: match args.normalizer {
            NormalizerArg::Nodes => Normalizer::Nodes,
            NormalizerArg::Edges => Normalizer::Edges,
        },
        positive_only: args.positive,
    };
    let pmi = if args.order == 2 {
        pairwise_pmi_with(&cooc_matrix(&inc), options)?
    } else {
        let tensor = cooc_tensor_direct(&inc, args.order)?;
        let marginals: Vec<i64> = (0..inc.num_nodes()).map(|x| inc.degree(x) as i64).collect();
        specific_correlation_with(&tensor, &marginals, options)?
    };
    emit(args.output.as_deref(), &pmi.to_tsv_string())
}

fn cmd_embed(args: EmbedArgs, ci: bool) -> Result<(), CliError> {
    if ci && args.seed.is_none() {
        return Err(CliError::Input("--seed is required in --ci mode".into()));
    }
    let inc = load_incidence(&args.input)?;
    check_budget(&inc, 3, args.budget)?;
    let cfg = FactorConfig {
        max_iters: args.max_iters,
        tol: args.tol,
        seed: args.seed.unwrap_or(42),
        ridge: args.ridge,
    };
    let c3 = cooc_tensor_direct(&inc, 3)?;
    let n = inc.num_nodes();
    let slices: Vec<_> = match args.target {
        EmbedTarget::Counts => (0..n)
            .map(|i| slice(&c3, i))
            .collect::<Result<_, _>>()
            .map_err(CliError::from)?,
        EmbedTarget::Pmi => {
            let marginals: Vec<i64> = (0..n).map(|x| inc.degree(x) as i64).collect();
            let pmi = specific_correlation_with(&c3, &marginals, PmiOptions::default())?;
            (0..n)
                .map(|i| pmi_slice(&pmi, i))
                .collect::<Result<_, _>>()
                .map_err(CliError::from)?
        }
    };
    let embedding = fiber_space_matrices(&slices, args.dim, &cfg)?;
    let labels: Vec<String> = (0..n).map(|x| inc.label(x)).collect();
    let text = embedding.to_tsv_string(Some(&labels))?;
    emit(args.output.as_deref(), &text)
}

fn cmd_verify(args: VerifyArgs) -> Result<(), CliError> {
    let inc = load_incidence(&args.input)?;
    check_budget(&inc, args.order, args.budget)?;
    let fsp = cooc_tensor_fsp_with_budget(&inc, args.order, args.budget)?;
    let direct = cooc_tensor_direct(&inc, args.order)?;
    if let Some((idx, a, b)) = first_mismatch(&fsp, &direct) {
        return Err(CliError::Mismatch(format!(
            "paths disagree at index {idx:?}: fsp {a}, direct {b}"
        )));
    }
    let mut checked = 0usize;
    for (idx, v) in direct.canonical_entries() {
        let oracle = multiset_count(&inc, idx)?;
        if v != oracle {
            return Err(CliError::Mismatch(format!(
                "count at {idx:?} is {v} but the edge scan gives {oracle}"
            )));
        }
        checked += 1;
    }
    println!(
        "ok: order-{} tensor, {} canonical entries agree across fsp, direct, and the edge-scan oracle",
        args.order, checked
    );
    Ok(())
}
