use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use relcert::harness::random_indefinite_spec;
use relcert::mtx;
use relcert::report::{AngleSummary, CertifyOutput, Outcome};
use relcert::{
    angle_bound, certify_gap, certify_negative, gen_instance, orthonormalize, run_batch, selftest,
    CompressionSetup, Certificate, EssentialModel, Error, InstanceSpec, SubspaceMode, Tolerances, Verdict,
};

const EXIT_OK: u8 = 0;
const EXIT_NOT_CERTIFIABLE: u8 = 2;
const EXIT_INPUT: u8 = 3;
const EXIT_CONTRADICTION: u8 = 4;

#[derive(Parser)]
#[command(name = "relcert", version, about = "Relative eigenvalue certificates for compressions of indefinite symmetric matrices")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Certify the eigenvalues of QᵀHQ against those of H.
    Certify(CertifyArgs),
    /// Generate an (H, U) instance and write it as Matrix Market files.
    Gen(GenArgs),
    /// Run a JSON list of instance specs and report per-instance results.
    Batch(BatchArgs),
    /// Run the built-in invariant checks.
    Selftest,
}

#[derive(Args)]
struct CertifyArgs {
    /// Symmetric matrix H (.mtx).
    h: PathBuf,
    /// Basis of U, one column per basis vector (.mtx).
    u: PathBuf,
    /// Essential-spectrum threshold d (use `inf` for none).
    #[arg(long, default_value = "inf", value_parser = parse_ext_real)]
    ess_threshold: f64,
    /// Certify the negative eigenvalues instead.
    #[arg(long, conflicts_with = "gap")]
    negative: bool,
    /// Certify above a resolvent window (ALPHA, BETA) not containing zero.
    #[arg(long, num_args = 2, value_names = ["ALPHA", "BETA"], allow_negative_numbers = true)]
    gap: Option<Vec<f64>>,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Span,
    Tilted,
    Random,
    Mix,
}

#[derive(Args)]
struct GenArgs {
    /// Output directory; receives H.mtx, U.mtx and instance.json.
    #[arg(long)]
    out: PathBuf,
    /// Read the instance spec from a JSON file instead of the flags below.
    #[arg(long, conflicts_with_all = ["spectrum", "mode", "indices", "epsilon", "k", "pairs", "ess_threshold"])]
    spec: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Comma-separated eigenvalues of H. Without it a random indefinite
    /// spectrum with a tilted subspace is drawn from the seed.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    spectrum: Option<Vec<f64>>,
    #[arg(long, value_enum, default_value = "tilted")]
    mode: Mode,
    /// 1-based eigenvalue indices spanning U (span and tilted modes).
    #[arg(long, value_delimiter = ',')]
    indices: Option<Vec<usize>>,
    /// Tilt angle (tilted mode; also the tilt for random draws).
    #[arg(long, default_value_t = 0.05)]
    epsilon: f64,
    /// Dimension of U (random mode).
    #[arg(long)]
    k: Option<usize>,
    /// Index pairs `i:j` whose mixed eigenvectors span U (mix mode).
    #[arg(long, value_delimiter = ',', value_parser = parse_pair)]
    pairs: Option<Vec<(usize, usize)>>,
    /// Largest dimension for random draws.
    #[arg(long, default_value_t = 20)]
    max_n: usize,
    #[arg(long, value_parser = parse_ext_real)]
    ess_threshold: Option<f64>,
}

#[derive(Args)]
struct BatchArgs {
    /// JSON file holding a list of instance specs.
    specs: PathBuf,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long)]
    json: Option<PathBuf>,
}

fn parse_ext_real(s: &str) -> Result<f64, String> {
    relcert::ext_real::parse(s).ok_or_else(|| format!("{s:?} is not a number, `inf` or `-inf`"))
}

fn parse_pair(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s.split_once(':').ok_or_else(|| format!("expected i:j, got {s:?}"))?;
    let p = |t: &str| t.trim().parse::<usize>().map_err(|e| format!("{t:?}: {e}"));
    Ok((p(a)?, p(b)?))
}

/// Exit code for a library error: a contradiction is a bug signal, a failed
/// gap condition means no certificate exists, anything else is bad input.
fn error_code(e: &Error) -> u8 {
    match e {
        Error::InternalContradiction(_) => EXIT_CONTRADICTION,
        Error::GapConditionFailed { .. } => EXIT_NOT_CERTIFIABLE,
        _ => EXIT_INPUT,
    }
}

fn fail(e: &Error) -> u8 {
    eprintln!("relcert: {e}");
    error_code(e)
}

fn emit(json: &str, path: Option<&Path>) -> Result<(), Error> {
    match path {
        Some(p) => fs::write(p, format!("{json}\n")).map_err(|source| Error::Io { path: p.to_path_buf(), source }),
        None => {
            println!("{json}");
            Ok(())
        }
    }
}

fn fmt_ext(x: f64) -> String {
    if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:.6e}")
    }
}

fn print_table(c: &Certificate, angle: Option<&AngleSummary>) {
    eprintln!("verdict  {:?}", c.verdict);
    eprintln!("eta      {:.6e}    secondary {}", c.eta, fmt_ext(c.secondary_bound));
    eprintln!("window   ({}, {})    d = {}", fmt_ext(c.alpha), fmt_ext(c.beta), fmt_ext(c.d));
    if let Some(a) = angle {
        eprintln!(
            "angle    sin(U,V) {:.6e}  sin(U,W) {:.6e}  tan(V,W) {:.6e}  bound {:.6e}",
            a.sin_uv, a.sin_uw, a.tan_vw, a.bound
        );
    }
    if !c.matches.is_empty() {
        eprintln!("{:>4} {:>16} {:>4} {:>16} {:>12}", "k", "mu", "j", "lambda", "rel_err");
        for m in &c.matches {
            eprintln!("{:>4} {:>16.9e} {:>4} {:>16.9e} {:>12.3e}", m.k, m.mu, m.j, m.lambda, m.rel_err);
        }
    }
    if !c.boundary.is_empty() {
        eprintln!("boundary {:?}", c.boundary);
    }
    if !c.unmatched.is_empty() {
        eprintln!("unmatched {:?}", c.unmatched);
    }
}

fn run_certify(args: &CertifyArgs) -> Result<u8, Error> {
    let tols = Tolerances::with_tol(args.tol);
    let h = mtx::read_symmetric(&args.h)?;
    let u = orthonormalize(&mtx::read_dense(&args.u)?, args.tol)?;
    let ess = EssentialModel::new(args.ess_threshold)?;

    let certificate = match &args.gap {
        Some(g) => certify_gap(&h, &u, g[0], g[1], &ess, &tols)?,
        None if args.negative => certify_negative(&h, &u, &ess, &tols)?,
        None => relcert::certify(&h, &u, &ess, &tols)?,
    };
    let setup = CompressionSetup::new(&h, &u, &tols)?;
    // The angle bound is informational; V and W at a right angle leave it undefined.
    let angle = angle_bound(&setup).ok().map(|a| AngleSummary::from(&a));

    print_table(&certificate, angle.as_ref());
    let code = if certificate.verdict == Verdict::NotCertifiable { EXIT_NOT_CERTIFIABLE } else { EXIT_OK };
    let out = CertifyOutput { certificate, angle };
    let json = serde_json::to_string_pretty(&out).expect("certificate serializes");
    emit(&json, args.json.as_deref())?;
    Ok(code)
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, Error> {
    let text = fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
    serde_json::from_str(&text).map_err(|e| Error::Parse { path: path.to_path_buf(), line: e.line(), message: e.to_string() })
}

fn gen_spec(args: &GenArgs) -> Result<InstanceSpec, Error> {
    if let Some(path) = &args.spec {
        return read_json(path);
    }
    let Some(spectrum) = args.spectrum.clone() else {
        let mut spec = random_indefinite_spec(args.seed, args.max_n, args.epsilon);
        if let Some(d) = args.ess_threshold {
            spec.ess_threshold = d;
        }
        return Ok(spec);
    };
    let missing = |flag: &str| Error::InvalidSpec(format!("this mode needs --{flag}"));
    let subspace = match args.mode {
        Mode::Span => SubspaceMode::EigenvectorSpan { indices: args.indices.clone().ok_or_else(|| missing("indices"))? },
        Mode::Tilted => SubspaceMode::Tilted {
            indices: args.indices.clone().ok_or_else(|| missing("indices"))?,
            epsilon: args.epsilon,
        },
        Mode::Random => SubspaceMode::Random { k: args.k.ok_or_else(|| missing("k"))? },
        Mode::Mix => SubspaceMode::EigenvectorMix { pairs: args.pairs.clone().ok_or_else(|| missing("pairs"))? },
    };
    Ok(InstanceSpec {
        n: spectrum.len(),
        spectrum,
        subspace,
        seed: args.seed,
        ess_threshold: args.ess_threshold.unwrap_or(f64::INFINITY),
        min_gap: 1e-8,
    })
}

fn run_gen(args: &GenArgs) -> Result<u8, Error> {
    let spec = gen_spec(args)?;
    let (h, u) = gen_instance(&spec)?;
    fs::create_dir_all(&args.out).map_err(|source| Error::Io { path: args.out.clone(), source })?;
    mtx::write_symmetric(args.out.join("H.mtx"), &h)?;
    mtx::write_basis(args.out.join("U.mtx"), &u)?;
    let json = serde_json::to_string_pretty(&spec).expect("spec serializes");
    emit(&json, Some(&args.out.join("instance.json")))?;
    eprintln!("wrote {}x{} H and {}-dimensional U to {}", h.dim(), h.dim(), u.dim(), args.out.display());
    Ok(EXIT_OK)
}

fn run_batch_cmd(args: &BatchArgs) -> Result<u8, Error> {
    let specs: Vec<InstanceSpec> = read_json(&args.specs)?;
    let (reports, summary) = run_batch(&specs, &Tolerances::with_tol(args.tol));
    for (i, r) in reports.iter().enumerate() {
        let eta = r.certificate.as_ref().map_or(f64::NAN, |c| c.eta);
        let failed: Vec<&str> =
            r.invariants.iter().filter(|(_, &ok)| !ok).map(|(name, _)| name.as_str()).collect();
        let detail = match (&r.error, failed.is_empty()) {
            (Some(e), _) => e.message.clone(),
            (None, false) => format!("failed: {}", failed.join(", ")),
            (None, true) => String::new(),
        };
        eprintln!("{i:>5}  {:<22} eta {:<12.4e} {detail}", format!("{:?}", r.outcome()), eta);
    }
    eprintln!(
        "total {}  certified {}  partial {}  not certifiable {}  contradictions {}  errors {}  invariant failures {}",
        summary.total,
        summary.certified,
        summary.partial,
        summary.not_certifiable,
        summary.internal_contradictions,
        summary.errors,
        summary.invariant_failures
    );
    let out = serde_json::json!({ "summary": summary, "reports": reports });
    emit(&serde_json::to_string_pretty(&out).expect("reports serialize"), args.json.as_deref())?;
    let contradiction = reports.iter().any(|r| r.outcome() == Outcome::InternalContradiction);
    Ok(if summary.success() && !contradiction { EXIT_OK } else { EXIT_CONTRADICTION })
}

fn run_selftest() -> u8 {
    let checks = selftest::run();
    for c in &checks {
        eprintln!("{}  {:<20} {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    if checks.iter().all(|c| c.passed) { EXIT_OK } else { EXIT_CONTRADICTION }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Certify(a) => run_certify(a),
        Command::Gen(a) => run_gen(a),
        Command::Batch(a) => run_batch_cmd(a),
        Command::Selftest => Ok(run_selftest()),
    };
    ExitCode::from(result.unwrap_or_else(|e| fail(&e)))
}
