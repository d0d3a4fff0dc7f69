//! Argument parsing and subcommand dispatch.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use momentlab_core::arith::parse_rational;
use momentlab_core::cantor::{build_embedding, DEFAULT_DEPTH_CAP};
use momentlab_core::perturb::{perturb, perturb_independent, PerturbationRequest, Source};
use momentlab_core::{Measure, MomentVector, Rational, SubgroupDescriptor};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::artifact;
use crate::error::{CliError, CliResult};
use crate::format::{self, to_json};
use crate::parse;
use crate::verify::verify_text;

#[derive(Debug, Parser)]
#[command(
    name = "momentlab",
    version,
    about = "Exact Hausdorff moment sequences and their certificates"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Moment vectors: generate, classify, extend
    #[command(subcommand)]
    Moments(MomentsCommand),
    /// Pascal table g(n, k) with its homomorphism report
    Pascal(PascalArgs),
    /// Trace values on the minimal projections of one level
    Trace(TraceArgs),
    /// Move a sequence into a dense subgroup, keeping every prefix interior
    Perturb(PerturbArgs),
    /// Like perturb, with terms independent over the rationals
    PerturbIndependent(PerturbArgs),
    /// Re-check a perturbation artifact
    PerturbVerify(FileArgs),
    /// Grid LP feasibility cross-check
    Oracle(OracleArgs),
    /// Build a finite-depth Cantor-set embedding certificate
    CantorEmbed(EmbedArgs),
    /// Re-check an embedding certificate
    CantorVerify(FileArgs),
    /// Re-check any artifact
    Verify(FileArgs),
}

#[derive(Debug, Subcommand)]
enum MomentsCommand {
    /// Moments of a measure
    Gen(GenArgs),
    /// Interior, boundary or outside, with certificate or witness
    Check(VectorArgs),
    /// Open interval of admissible next moments
    Extend(VectorArgs),
}

#[derive(Debug, Args)]
struct Output {
    /// Write here instead of stdout
    #[arg(long, visible_alias = "json")]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, Default, ValueEnum)]
enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Args)]
struct SourceArgs {
    /// lebesgue, beta:a,b, dirac:x or atoms:x@w,...
    #[arg(long, required_unless_present = "seq", conflicts_with = "seq")]
    measure: Option<String>,
    /// Comma-separated moments starting with 1
    #[arg(long)]
    seq: Option<String>,
}

impl SourceArgs {
    fn source(&self) -> CliResult<Source> {
        match (&self.measure, &self.seq) {
            (Some(m), _) => Ok(Source::Measure(parse::measure(m)?)),
            (None, Some(s)) => Ok(Source::Moments(parse::sequence(s)?)),
            (None, None) => Err(CliError::Usage("give --measure or --seq".into())),
        }
    }

    /// Moments up to `degree`, which defaults to all of `--seq`.
    fn moments(&self, degree: Option<usize>) -> CliResult<MomentVector<Rational>> {
        let source = self.source()?;
        Ok(source.moments(resolve_degree(&source, degree)?)?)
    }
}

fn resolve_degree(source: &Source, degree: Option<usize>) -> CliResult<usize> {
    match (source, degree) {
        (_, Some(n)) => Ok(n),
        (Source::Moments(t), None) => Ok(t.degree()),
        (Source::Measure(_), None) => Err(CliError::Usage(
            "a degree is required with --measure".into(),
        )),
    }
}

#[derive(Debug, Args)]
struct GenArgs {
    #[arg(long, required_unless_present = "random", conflicts_with = "random")]
    measure: Option<String>,
    /// Random atomic measure, reproducible from --seed
    #[arg(long)]
    random: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Maximum number of atoms of a random measure
    #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u64).range(1..=16))]
    atoms: u64,
    /// Index of the last moment
    #[arg(long)]
    n: usize,
    #[command(flatten)]
    output: Output,
}

#[derive(Debug, Args)]
struct VectorArgs {
    #[command(flatten)]
    source: SourceArgs,
    /// Index of the last moment
    #[arg(long)]
    n: Option<usize>,
    #[command(flatten)]
    output: Output,
}

#[derive(Debug, Args)]
struct PascalArgs {
    #[command(flatten)]
    source: SourceArgs,
    #[arg(long)]
    depth: Option<usize>,
    #[arg(long)]
    trace_level: Option<usize>,
    #[arg(long, value_enum, default_value_t)]
    format: Format,
    #[command(flatten)]
    output: Output,
}

#[derive(Debug, Args)]
struct TraceArgs {
    #[command(flatten)]
    source: SourceArgs,
    #[arg(long)]
    level: usize,
    #[arg(long, value_enum, default_value_t)]
    format: Format,
    #[command(flatten)]
    output: Output,
}

#[derive(Debug, Args)]
struct OracleArgs {
    #[command(flatten)]
    source: SourceArgs,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, default_value_t = 256)]
    grid: usize,
    /// Per-coordinate tolerance
    #[arg(long, default_value = "1/1024")]
    tol: String,
    #[command(flatten)]
    output: Output,
}

#[derive(Debug, Args)]
struct PerturbArgs {
    #[command(flatten)]
    source: SourceArgs,
    /// Number of terms kept close to the source
    #[arg(long)]
    m: usize,
    /// One tolerance, or m comma-separated ones
    #[arg(long)]
    eps: String,
    /// Z[1/p,...], Q or gen:sqrtA,sqrtB,...
    #[arg(long)]
    group: String,
    /// Index of the last output term
    #[arg(long)]
    upto: usize,
    #[command(flatten)]
    output: Output,
}

#[derive(Debug, Args)]
struct EmbedArgs {
    /// Number of functions after the unit
    #[arg(long)]
    levels: usize,
    /// Longest cylinder word allowed
    #[arg(long, env = "MOMENTLAB_DEPTH_CAP", default_value_t = DEFAULT_DEPTH_CAP)]
    depth_cap: u32,
    #[command(flatten)]
    output: Output,
}

#[derive(Debug, Args)]
struct FileArgs {
    file: PathBuf,
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("momentlab: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn emit(output: &Output, text: &str) -> CliResult<()> {
    match &output.out {
        Some(path) => fs::write(path, text).map_err(|source| CliError::Io {
            path: path.clone(),
            source,
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn execute(command: Command) -> CliResult<()> {
    match command {
        Command::Moments(MomentsCommand::Gen(args)) => {
            let source = match &args.measure {
                Some(m) => Source::Measure(parse::measure(m)?),
                None => Source::Measure(random_measure(args.seed, args.atoms as usize)?),
            };
            emit(
                &args.output,
                &to_json(&artifact::moments(&source, args.n)?)?,
            )
        }
        Command::Moments(MomentsCommand::Check(args)) => {
            let t = args.source.moments(args.n)?;
            emit(&args.output, &to_json(&artifact::membership_of(&t)?)?)
        }
        Command::Moments(MomentsCommand::Extend(args)) => {
            let t = args.source.moments(args.n)?;
            emit(&args.output, &to_json(&artifact::extension(&t)?)?)
        }
        Command::Pascal(args) => {
            let source = args.source.source()?;
            let depth = resolve_degree(&source, args.depth)?;
            let a = artifact::pascal(&source, depth, args.trace_level)?;
            let text = match args.format {
                Format::Json => to_json(&a)?,
                Format::Csv => {
                    let mut rows = Vec::new();
                    for (n, row) in a.table.iter().enumerate() {
                        rows.extend(row.iter().enumerate().map(|(k, v)| ("table", n, k, v)));
                    }
                    if let Some(t) = &a.trace {
                        rows.extend(trace_rows(t));
                    }
                    csv_text(rows)?
                }
            };
            emit(&args.output, &text)
        }
        Command::Trace(args) => {
            let a = artifact::trace_of(&args.source.source()?, args.level)?;
            let text = match args.format {
                Format::Json => to_json(&a)?,
                Format::Csv => csv_text(trace_rows(&a.trace).collect())?,
            };
            emit(&args.output, &text)
        }
        Command::Oracle(args) => {
            let t = args.source.moments(args.n)?;
            let tol = parse_rational(&args.tol)?;
            emit(
                &args.output,
                &to_json(&artifact::oracle(&t, args.grid, &tol)?)?,
            )
        }
        Command::Perturb(args) => {
            let req = request(&args, false)?;
            let a = artifact::perturbation(&req, &perturb(&req)?)?;
            finish_perturbation(&args.output, &a)
        }
        Command::PerturbIndependent(args) => {
            let req = request(&args, true)?;
            let a = artifact::perturbation(&req, &perturb_independent(&req)?)?;
            finish_perturbation(&args.output, &a)
        }
        Command::CantorEmbed(args) => {
            let cert = build_embedding(args.levels, args.depth_cap)?;
            let a = artifact::embedding(&cert);
            emit(&args.output, &to_json(&a)?)?;
            match a.violations.first() {
                Some(v) => Err(CliError::Verification(v.clone())),
                None => Ok(()),
            }
        }
        Command::PerturbVerify(args) => verify_file(&args.file, Some(format::PERTURBATION)),
        Command::CantorVerify(args) => verify_file(&args.file, Some(format::EMBEDDING)),
        Command::Verify(args) => verify_file(&args.file, None),
    }
}

fn verify_file(path: &Path, expected: Option<&str>) -> CliResult<()> {
    let text = read(path)?;
    if let Some(expected) = expected {
        format::expect_kind(&format::kind_of(&text)?, expected)?;
    }
    eprintln!("{}", verify_text(&text)?);
    Ok(())
}

fn finish_perturbation<R: serde::Serialize>(
    output: &Output,
    a: &format::PerturbationArtifact<R>,
) -> CliResult<()> {
    emit(output, &to_json(a)?)?;
    match a.violations.first() {
        Some(v) => Err(CliError::Verification(v.clone())),
        None => Ok(()),
    }
}

fn request(args: &PerturbArgs, independent: bool) -> CliResult<PerturbationRequest> {
    let subgroup: SubgroupDescriptor = args.group.parse()?;
    let mut epsilons = parse::rationals(&args.eps)?;
    if epsilons.len() == 1 {
        epsilons = vec![epsilons[0].clone(); args.m];
    }
    let req = PerturbationRequest {
        source: args.source.source()?,
        prefix_length: args.m,
        epsilons,
        subgroup,
        total_length: args.upto,
        independent,
    };
    req.validate()?;
    Ok(req)
}

type CsvRow<'a> = (&'static str, usize, usize, &'a String);

fn trace_rows(t: &format::TraceDto) -> impl Iterator<Item = CsvRow<'_>> {
    t.values
        .iter()
        .enumerate()
        .map(|(k, v)| ("trace", t.level, k, v))
}

fn csv_text(rows: Vec<CsvRow<'_>>) -> CliResult<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["section", "n", "k", "value"])?;
    for row in rows {
        w.serialize(row)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Usage(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Usage(e.to_string()))
}

/// Up to `max_atoms` atoms at `p/q` with `q <= 16`, with integer weights
/// 1..=8 normalized to mass 1.
fn random_measure(seed: u64, max_atoms: usize) -> CliResult<Measure> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let count = rng.random_range(1..=max_atoms);
    let mut atoms: Vec<(Rational, i64)> = Vec::with_capacity(count);
    while atoms.len() < count {
        let q: i64 = rng.random_range(1..=16);
        let x = momentlab_core::arith::rat(rng.random_range(0..=q), q);
        let w = rng.random_range(1..=8);
        if !atoms.iter().any(|(y, _)| *y == x) {
            atoms.push((x, w));
        }
    }
    let total: i64 = atoms.iter().map(|(_, w)| w).sum();
    let atoms = atoms
        .into_iter()
        .map(|(x, w)| (x, momentlab_core::arith::rat(w, total)))
        .collect();
    Ok(Measure::atomic(atoms)?)
}
