//! `urv`: generate benchmark matrices, run rank-revealing factorizations and
//! write error profiles, lemma checks and timings.
//!
//! Exit status is 0 on success, 1 for bad arguments or I/O trouble and 2
//! when a factorization breaks down numerically.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use log::info;
use serde::Serialize;

use urv_core::diagnostics::{
    error_profile_with_reference, lemma_check, reference_sigmas, reveal_profile_with_reference,
    rsvd_error_profile, write_profile_csv,
};
use urv_core::error::LinalgError;
use urv_core::factor::{cpqr_urv, ddh_urv, power_urv, qlp, UrvFactorization};
use urv_core::flops::{flop_estimate, FlopAlgorithm};
use urv_core::io::{fmt_f64, read_matrix_file, write_matrix_file};
use urv_core::matrix::Matrix;
use urv_core::qr::{cpqr, householder_qr, DEFAULT_BLOCK_SIZE};
use urv_core::random::{gaussian_matrix, RngSeed};
use urv_core::rsvd::rsvd;
use urv_core::svd::svd;
use urv_core::testmat::{MatrixKind, TestMatrixSpec};

/// Stream id for the matrix generator; algorithms draw from stream 0.
const MATRIX_STREAM: u64 = 1;
const ALGORITHM_STREAM: u64 = 0;

#[derive(Parser)]
#[command(name = "urv", version, about = "Randomized URV factorization benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Factor a matrix and write its error and reveal profiles.
    Bench(BenchArgs),
    /// Compare PowerURV and RSVD projectors built from one Gaussian draw.
    Lemma(LemmaArgs),
    /// Time algorithms on square Gaussian matrices.
    Timing(TimingArgs),
    /// Write a benchmark matrix to a CSV or `.bin` file.
    Gen(GenArgs),
    /// Print leading-order flop counts.
    Flops(FlopsArgs),
}

#[derive(Args)]
struct MatrixArgs {
    /// fast, slow, sshape, bie, kahan or file:<path>.
    #[arg(long)]
    matrix: MatrixChoice,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    /// Use (1e-20)^(k-1) verbatim for the fast-decay spectrum.
    #[arg(long)]
    literal_decay: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    matrix: MatrixArgs,
    #[arg(long, value_enum)]
    alg: Alg,
    #[arg(long, default_value_t = 1)]
    q: usize,
    /// Skip reorthonormalization between power steps.
    #[arg(long)]
    no_reorth: bool,
    /// RSVD sample size.
    #[arg(long, default_value_t = 60)]
    ell: usize,
    #[arg(long, default_value = "profile.csv")]
    out: PathBuf,
}

#[derive(Args)]
struct LemmaArgs {
    #[command(flatten)]
    matrix: MatrixArgs,
    #[arg(long, default_value_t = 60)]
    ell: usize,
    #[arg(long, default_value_t = 1)]
    q: usize,
    #[arg(long)]
    no_reorth: bool,
}

#[derive(Args)]
struct TimingArgs {
    /// Comma-separated matrix orders.
    #[arg(long, value_delimiter = ',', default_values_t = [256, 512])]
    sizes: Vec<usize>,
    #[arg(long, default_value_t = 3)]
    reps: usize,
    /// Comma-separated subset of qr, cpqr, ddh, powerurv, qlp, rsvd, svd.
    #[arg(long, value_delimiter = ',', default_values_t = [TimedAlg::Qr, TimedAlg::Cpqr])]
    algs: Vec<TimedAlg>,
    #[arg(long, default_value_t = 1)]
    q: usize,
    #[arg(long, default_value_t = 60)]
    ell: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "timing.csv")]
    out: PathBuf,
}

#[derive(Args)]
struct GenArgs {
    #[command(flatten)]
    matrix: MatrixArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct FlopsArgs {
    #[arg(long)]
    m: usize,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 1)]
    q: usize,
}

#[derive(Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Alg {
    Ddh,
    Powerurv,
    Qlp,
    Rsvd,
    Cpqr,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
#[serde(rename_all = "lowercase")]
enum TimedAlg {
    Qr,
    Cpqr,
    Ddh,
    Powerurv,
    Qlp,
    Rsvd,
    Svd,
}

impl TimedAlg {
    fn name(self) -> &'static str {
        match self {
            TimedAlg::Qr => "qr",
            TimedAlg::Cpqr => "cpqr",
            TimedAlg::Ddh => "ddh",
            TimedAlg::Powerurv => "powerurv",
            TimedAlg::Qlp => "qlp",
            TimedAlg::Rsvd => "rsvd",
            TimedAlg::Svd => "svd",
        }
    }
}

impl std::fmt::Display for TimedAlg {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TimedAlg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "qr" => TimedAlg::Qr,
            "cpqr" => TimedAlg::Cpqr,
            "ddh" => TimedAlg::Ddh,
            "powerurv" => TimedAlg::Powerurv,
            "qlp" => TimedAlg::Qlp,
            "rsvd" => TimedAlg::Rsvd,
            "svd" => TimedAlg::Svd,
            _ => return Err(format!("unknown algorithm {s:?}")),
        })
    }
}

#[derive(Clone, Debug)]
enum MatrixChoice {
    Kind(MatrixKind),
    File(PathBuf),
}

impl FromStr for MatrixChoice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if let Some(path) = s.strip_prefix("file:") {
            return Ok(MatrixChoice::File(path.into()));
        }
        Ok(MatrixChoice::Kind(match s {
            "fast" => MatrixKind::FastDecay,
            "slow" => MatrixKind::SlowDecay,
            "sshape" => MatrixKind::SShaped,
            "bie" => MatrixKind::BoundaryIntegral,
            "kahan" => MatrixKind::Kahan,
            _ => return Err(format!("unknown matrix {s:?}")),
        }))
    }
}

enum CliError {
    Usage(String),
    Lib(LinalgError),
}

impl From<LinalgError> for CliError {
    fn from(e: LinalgError) -> Self {
        CliError::Lib(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Lib(e.into())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Usage(format!("manifest serialization failed: {e}"))
    }
}

type CliResult<T> = Result<T, CliError>;

#[derive(Serialize)]
#[serde(tag = "source", rename_all = "snake_case")]
enum MatrixSource {
    Generated(TestMatrixSpec),
    File { path: PathBuf },
}

#[derive(Serialize)]
struct AlgorithmRecord {
    tag: &'static str,
    q: Option<usize>,
    reorth: Option<bool>,
    ell: Option<usize>,
}

/// Everything needed to regenerate the CSVs it lists.
#[derive(Serialize)]
struct RunManifest {
    command: &'static str,
    spec: Option<MatrixSource>,
    algorithm: Option<AlgorithmRecord>,
    seed: u64,
    matrix_seed: Option<RngSeed>,
    algorithm_seed: Option<RngSeed>,
    wall_time_seconds: f64,
    library_version: &'static str,
    outputs: Vec<PathBuf>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    warnings: Vec<String>,
}

fn load_matrix(args: &MatrixArgs) -> CliResult<(Matrix, MatrixSource, Option<RngSeed>)> {
    match &args.matrix {
        MatrixChoice::File(path) => {
            if args.m.is_some() || args.n.is_some() || args.literal_decay {
                return Err(CliError::Usage("--m, --n and --literal-decay do not apply to file input".into()));
            }
            let a = read_matrix_file(path)?;
            info!("read {}x{} matrix from {}", a.rows(), a.cols(), path.display());
            Ok((a, MatrixSource::File { path: path.clone() }, None))
        }
        MatrixChoice::Kind(kind) => {
            let seed = RngSeed::new(args.seed, MATRIX_STREAM);
            let mut spec = TestMatrixSpec::new(*kind, seed);
            match kind {
                MatrixKind::BoundaryIntegral | MatrixKind::Kahan => {
                    if let Some(n) = args.n.or(args.m) {
                        if args.m.is_some_and(|m| m != n) || args.n.is_some_and(|v| v != n) {
                            return Err(CliError::Usage("this matrix is square; --m must equal --n".into()));
                        }
                        spec.m = n;
                        spec.n = n;
                    }
                }
                _ => {
                    spec.m = args.m.unwrap_or(spec.m);
                    spec.n = args.n.unwrap_or(spec.n);
                }
            }
            if args.literal_decay {
                if *kind != MatrixKind::FastDecay {
                    return Err(CliError::Usage("--literal-decay only applies to --matrix fast".into()));
                }
                spec.literal_decay = true;
            }
            let (a, _) = spec.generate()?;
            info!("generated {:?} {}x{} from seed {:?}", kind, spec.m, spec.n, seed);
            Ok((a, MatrixSource::Generated(spec), Some(seed)))
        }
    }
}

fn manifest_path(out: &Path) -> PathBuf {
    out.with_extension("json")
}

fn write_manifest(out: &Path, manifest: &RunManifest) -> CliResult<()> {
    let path = manifest_path(out);
    let mut w = BufWriter::new(File::create(&path)?);
    serde_json::to_writer_pretty(&mut w, manifest)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn check_output(out: &Path) -> CliResult<()> {
    if manifest_path(out) == out {
        return Err(CliError::Usage(format!(
            "{} would be overwritten by its own manifest; use a .csv name",
            out.display()
        )));
    }
    Ok(())
}

fn factor(a: &Matrix, alg: Alg, q: usize, reorth: bool, seed: RngSeed) -> CliResult<UrvFactorization> {
    Ok(match alg {
        Alg::Ddh => ddh_urv(a, seed)?,
        Alg::Powerurv => power_urv(a, q, reorth, seed)?,
        Alg::Qlp => qlp(a)?,
        Alg::Cpqr => cpqr_urv(a)?,
        Alg::Rsvd => unreachable!("rsvd has no URV factorization"),
    })
}

fn cmd_bench(args: BenchArgs) -> CliResult<()> {
    check_output(&args.out)?;
    let start = Instant::now();
    let (a, source, matrix_seed) = load_matrix(&args.matrix)?;
    let alg_seed = RngSeed::new(args.matrix.seed, ALGORITHM_STREAM);
    let reorth = !args.no_reorth;
    let randomized = matches!(args.alg, Alg::Ddh | Alg::Powerurv | Alg::Rsvd);
    if randomized {
        info!("algorithm draws from seed {alg_seed:?}");
    }
    let sref = reference_sigmas(&a)?;
    let mut csv = BufWriter::new(File::create(&args.out)?);
    let (record, warnings) = if args.alg == Alg::Rsvd {
        let f = rsvd(&a, args.ell, args.q, reorth, alg_seed)?;
        write_profile_csv(&mut csv, &rsvd_error_profile(&a, &f, sref)?, None)?;
        let record = AlgorithmRecord {
            tag: "rsvd",
            q: Some(args.q),
            reorth: Some(reorth),
            ell: Some(args.ell),
        };
        (record, f.warnings)
    } else {
        let f = factor(&a, args.alg, args.q, reorth, alg_seed)?;
        let profile = error_profile_with_reference(&a, &f, sref.clone())?;
        let reveal = reveal_profile_with_reference(&f, sref)?;
        write_profile_csv(&mut csv, &profile, Some(&reveal))?;
        let power = args.alg == Alg::Powerurv;
        let record = AlgorithmRecord {
            tag: f.provenance.algorithm.name(),
            q: power.then_some(f.provenance.q),
            reorth: power.then_some(f.provenance.reorth),
            ell: None,
        };
        (record, f.provenance.warnings)
    };
    csv.flush()?;
    for w in &warnings {
        log::warn!("{w}");
    }
    write_manifest(
        &args.out,
        &RunManifest {
            command: "bench",
            spec: Some(source),
            algorithm: Some(record),
            seed: args.matrix.seed,
            matrix_seed,
            algorithm_seed: randomized.then_some(alg_seed),
            wall_time_seconds: start.elapsed().as_secs_f64(),
            library_version: urv_core::VERSION,
            outputs: vec![args.out.clone()],
            warnings,
        },
    )
}

fn cmd_lemma(args: LemmaArgs) -> CliResult<()> {
    let (a, _, _) = load_matrix(&args.matrix)?;
    let alg_seed = RngSeed::new(args.matrix.seed, ALGORITHM_STREAM);
    info!("algorithm draws from seed {alg_seed:?}");
    let report = lemma_check(&a, args.ell, args.q, !args.no_reorth, alg_seed)?;
    for w in &report.warnings {
        log::warn!("{w}");
    }
    println!("discrepancy {}", fmt_f64(report.discrepancy));
    if report.rank_deficient {
        println!("rank deficient sample: the discrepancy carries no guarantee");
    }
    Ok(())
}

fn time_once(alg: TimedAlg, a: &Matrix, q: usize, ell: usize, seed: RngSeed) -> CliResult<f64> {
    let start = Instant::now();
    match alg {
        TimedAlg::Qr => drop(householder_qr(a, DEFAULT_BLOCK_SIZE)?),
        TimedAlg::Cpqr => drop(cpqr(a)?),
        TimedAlg::Ddh => drop(ddh_urv(a, seed)?),
        TimedAlg::Powerurv => drop(power_urv(a, q, true, seed)?),
        TimedAlg::Qlp => drop(qlp(a)?),
        TimedAlg::Rsvd => drop(rsvd(a, ell.min(a.cols()), q, true, seed)?),
        TimedAlg::Svd => drop(svd(a)?),
    }
    Ok(start.elapsed().as_secs_f64())
}

fn cmd_timing(args: TimingArgs) -> CliResult<()> {
    check_output(&args.out)?;
    if args.reps == 0 || args.sizes.is_empty() || args.algs.is_empty() {
        return Err(CliError::Usage("need at least one size, algorithm and repetition".into()));
    }
    if args.sizes.contains(&0) {
        return Err(CliError::Usage("sizes must be positive".into()));
    }
    let start = Instant::now();
    let alg_seed = RngSeed::new(args.seed, ALGORITHM_STREAM);
    let mut csv = BufWriter::new(File::create(&args.out)?);
    writeln!(csv, "algorithm,n,reps,median_seconds")?;
    for &n in &args.sizes {
        let a = gaussian_matrix(n, n, RngSeed::new(args.seed, MATRIX_STREAM));
        for &alg in &args.algs {
            let mut times = (0..args.reps)
                .map(|_| time_once(alg, &a, args.q, args.ell, alg_seed))
                .collect::<CliResult<Vec<f64>>>()?;
            times.sort_by(f64::total_cmp);
            let median = times[times.len() / 2];
            info!("{alg} n={n}: median {median:.3e} s");
            writeln!(csv, "{alg},{n},{},{}", args.reps, fmt_f64(median))?;
        }
    }
    csv.flush()?;
    write_manifest(
        &args.out,
        &RunManifest {
            command: "timing",
            spec: None,
            algorithm: None,
            seed: args.seed,
            matrix_seed: Some(RngSeed::new(args.seed, MATRIX_STREAM)),
            algorithm_seed: Some(alg_seed),
            wall_time_seconds: start.elapsed().as_secs_f64(),
            library_version: urv_core::VERSION,
            outputs: vec![args.out.clone()],
            warnings: Vec::new(),
        },
    )
}

fn cmd_gen(args: GenArgs) -> CliResult<()> {
    if matches!(args.matrix.matrix, MatrixChoice::File(_)) {
        return Err(CliError::Usage("gen needs a generated matrix kind".into()));
    }
    check_output(&args.out)?;
    let start = Instant::now();
    let (a, source, matrix_seed) = load_matrix(&args.matrix)?;
    write_matrix_file(&a, &args.out)?;
    write_manifest(
        &args.out,
        &RunManifest {
            command: "gen",
            spec: Some(source),
            algorithm: None,
            seed: args.matrix.seed,
            matrix_seed,
            algorithm_seed: None,
            wall_time_seconds: start.elapsed().as_secs_f64(),
            library_version: urv_core::VERSION,
            outputs: vec![args.out.clone()],
            warnings: Vec::new(),
        },
    )
}

fn cmd_flops(args: FlopsArgs) -> CliResult<()> {
    println!("algorithm,m,n,q,total,gemm_qr,cpqr,other");
    for alg in FlopAlgorithm::ALL {
        let f = flop_estimate(alg, args.m, args.n, args.q)?;
        println!(
            "{alg},{},{},{},{},{},{},{}",
            args.m,
            args.n,
            args.q,
            fmt_f64(f.total),
            fmt_f64(f.gemm_qr),
            fmt_f64(f.cpqr),
            fmt_f64(f.other)
        );
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Bench(args) => cmd_bench(args),
        Command::Lemma(args) => cmd_lemma(args),
        Command::Timing(args) => cmd_timing(args),
        Command::Gen(args) => cmd_gen(args),
        Command::Flops(args) => cmd_flops(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Lib(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_numerical() { 2 } else { 1 })
        }
    }
}
