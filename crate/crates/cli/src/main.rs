use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use nqtensor::functions::{
    canonical_tensor, eq_nondet_decomposition, hamming_nondet_decomposition, BooleanFunction, FunctionKind,
};
use nqtensor::io;
use nqtensor::protocol::{
    build_nof_protocol, nih_rank_certificate, parse_scenario, run_nof, strong_nondet_check, trivial_eq_nih, Mode,
    NihOptions, NofProtocol,
};
use nqtensor::rank_bounds::{gip_certificate, nrank_probe, pattern_check, probe_lower_bounds, rank_bracket, unfolding_ranks};
use nqtensor::report::{Report, Source, Verdict};
use nqtensor::scalar::ExactComplex;
use nqtensor::tensor::{unravel, Decomposition, DenseTensor};
use nqtensor::verify::{verify_all, VerifyConfig};
use nqtensor::Error;

#[derive(Parser)]
#[command(name = "nqtensor", version, about = "Nondeterministic communication tensors and quantum protocol checks")]
struct Cli {
    /// Directory for reports and artifacts.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct FunctionArgs {
    /// Registry name: eq, gip, gip_abstract, hamming_neq1, const0, const1.
    #[arg(long)]
    function: Option<String>,
    /// Truth table file (`x_1 .. x_k bit` per line) instead of a registry name.
    #[arg(long, conflicts_with = "function")]
    truth_table: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
}

#[derive(Args, Clone)]
struct TensorArgs {
    #[command(flatten)]
    function: FunctionArgs,
    /// Read the tensor from a `.tsr` file instead of building the canonical one.
    #[arg(long)]
    input: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Write the canonical tensor and a decomposition for a function.
    Build(FunctionArgs),
    /// Unfolding ranks and rank bracket.
    Rank {
        #[command(flatten)]
        tensor: TensorArgs,
        /// Known decomposition (`.dec`) for the upper end of the bracket.
        #[arg(long)]
        dec: Option<PathBuf>,
    },
    /// Write a mode unfolding as a `.mat` file.
    Unfold {
        #[command(flatten)]
        tensor: TensorArgs,
        /// 1-based mode.
        #[arg(long, default_value_t = 1)]
        mode: usize,
    },
    /// GIP lower-bound certificate.
    GipCert {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        /// Certify this nondeterministic tensor instead of the canonical one.
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// NOF protocol simulation.
    Protocol {
        #[command(subcommand)]
        which: ProtocolCommand,
    },
    /// Grouped-matrix certificate for an NIH protocol.
    NihExtract {
        /// Scenario file; without it the trivial EQ chain for `--n`, `--k` is used.
        #[arg(long)]
        scenario: Option<PathBuf>,
        #[command(flatten)]
        function: FunctionArgs,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        set_size_exponent: Option<usize>,
        #[arg(long, default_value_t = 10)]
        max_attempts: usize,
    },
    /// Unfolding lower bounds over random nondeterministic substitutions.
    Probe {
        #[command(flatten)]
        function: FunctionArgs,
        #[arg(long, default_value_t = 10)]
        trials: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Run the full verification suite.
    VerifyAll {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// With `--k`, the GIP certificate case to run.
        #[arg(long, requires = "k")]
        n: Option<usize>,
        #[arg(long, requires = "n")]
        k: Option<usize>,
        /// Substitution draws for the robustness criterion.
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long)]
        set_size_exponent: Option<usize>,
        /// Also bracket this `.tsr` tensor.
        #[arg(long)]
        input: Option<PathBuf>,
    },
}

#[derive(Args, Clone)]
struct NofArgs {
    #[command(flatten)]
    function: FunctionArgs,
    /// Dummy index value for odd k.
    #[arg(long, default_value_t = 0)]
    lift_dummy: usize,
    /// Inputs as `x_1,..,x_k` integers; omitted means a full sweep.
    #[arg(long, value_delimiter = ',')]
    x: Option<Vec<u64>>,
    #[arg(long)]
    sweep: bool,
}

#[derive(Subcommand)]
enum ProtocolCommand {
    /// Build the SVD protocol; run one input or sweep all.
    Nof(NofArgs),
    /// Exhaustive strong-nondeterminism sweep.
    Sweep(NofArgs),
}

enum Failure {
    Usage(String),
    Check(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::ConvergenceFailure(_) | Error::Normalization(_) | Error::NotFound(_) | Error::Overflow(_) => {
                Failure::Check(e.to_string())
            }
            _ => Failure::Usage(e.to_string()),
        }
    }
}

type CmdResult = Result<Report, Failure>;

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn in_file<T>(path: &Path, r: nqtensor::Result<T>) -> Result<T, Failure> {
    r.map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn write(out: &Path, name: &str, content: &str) -> Result<(), Failure> {
    fs::create_dir_all(out).map_err(|e| usage(format!("{}: {e}", out.display())))?;
    let path = out.join(name);
    fs::write(&path, content).map_err(|e| usage(format!("{}: {e}", path.display())))
}

impl FunctionArgs {
    fn resolve(&self) -> Result<BooleanFunction, Failure> {
        if let Some(path) = &self.truth_table {
            let name = path.file_stem().and_then(|s| s.to_str()).unwrap_or("table");
            return in_file(path, io::read_truth_table(name, &read(path)?));
        }
        let name = self.function.as_deref().ok_or_else(|| usage("need --function or --truth-table"))?;
        let n = self.n.ok_or_else(|| usage("need --n"))?;
        let k = self.k.ok_or_else(|| usage("need --k"))?;
        Ok(BooleanFunction::by_name(name, n, k)?)
    }
}

fn tag(f: &BooleanFunction) -> String {
    format!("{}_{}_{}", f.name(), f.bits(), f.players())
}

/// The construction's decomposition, or one simple tensor per nonzero entry.
fn decomposition_for(f: &BooleanFunction, t: &DenseTensor) -> nqtensor::Result<Decomposition> {
    match f.kind() {
        FunctionKind::Eq => eq_nondet_decomposition(f.bits(), f.players()),
        FunctionKind::HammingNeq1 => hamming_nondet_decomposition(f.bits(), f.players()),
        _ => {
            let dims = t.dims().to_vec();
            let mut terms = Vec::new();
            for (flat, z) in t.entries().iter().enumerate() {
                if *z == ExactComplex::default() {
                    continue;
                }
                let idx = unravel(flat, &dims);
                let term = idx
                    .iter()
                    .zip(&dims)
                    .enumerate()
                    .map(|(m, (&i, &d))| {
                        let mut v = vec![ExactComplex::default(); d];
                        v[i] = if m == 0 { z.clone() } else { ExactComplex::from_int(1) };
                        v
                    })
                    .collect();
                terms.push(term);
            }
            Decomposition::new(dims, terms)
        }
    }
}

/// The tensor a decomposition of `f` represents; it has the support of `f` but
/// need not be 0/1 (the Hamming construction carries signed entries).
fn function_tensor(f: &BooleanFunction) -> nqtensor::Result<DenseTensor> {
    decomposition_for(f, &canonical_tensor(f)?)?.materialize()
}

fn build(out: &Path, args: &FunctionArgs) -> CmdResult {
    let f = args.resolve()?;
    let canonical = canonical_tensor(&f)?;
    let d = decomposition_for(&f, &canonical)?;
    let t = d.materialize()?;
    let name = tag(&f);
    write(out, &format!("{name}.tsr"), &io::write_tensor(&t))?;
    write(out, &format!("{name}.dec"), &io::write_decomposition(&d))?;
    let mut r = Report::new();
    r.push("function", &f, "-", Source::Trivial, Verdict::Info);
    r.push("dims", format!("{:?}", t.dims()), "-", Source::Trivial, Verdict::Info);
    r.push("term_count", d.term_count(), "-", Source::Trivial, Verdict::Info);
    r.push("equals_0_1_tensor", t == canonical, "-", Source::Trivial, Verdict::Info);
    let pattern = pattern_check(&t, &f)?;
    r.check("pattern_matches_f", pattern, true, Source::Trivial, pattern);
    Ok(r)
}

fn load_tensor(args: &TensorArgs) -> Result<(DenseTensor, Option<BooleanFunction>), Failure> {
    match &args.input {
        Some(path) => Ok((in_file(path, io::read_tensor(&read(path)?))?, None)),
        None => {
            let f = args.function.resolve()?;
            Ok((function_tensor(&f)?, Some(f)))
        }
    }
}

fn rank(args: &TensorArgs, dec: Option<&Path>) -> CmdResult {
    let (t, f) = load_tensor(args)?;
    let known = match (dec, &f) {
        (Some(path), _) => Some(in_file(path, io::read_decomposition(&read(path)?))?),
        (None, Some(f)) if matches!(f.kind(), FunctionKind::Eq | FunctionKind::HammingNeq1) => Some(decomposition_for(f, &t)?),
        _ => None,
    };
    let mut r = Report::new();
    for (m, rk) in unfolding_ranks(&t)?.into_iter().enumerate() {
        r.push(format!("unfolding_rank_{}", m + 1), rk, "-", Source::Derived, Verdict::Info);
    }
    let b = rank_bracket(&t, known.as_ref())?;
    r.check("bracket_lower_le_upper", format!("[{},{}]", b.lower, b.upper), "lower<=upper", Source::Trivial, b.lower <= b.upper);
    r.push("tight", b.tight, "-", Source::Derived, Verdict::Info);
    if let Some(f) = &f {
        let ok = pattern_check(&t, f)?;
        r.check("pattern_matches_f", ok, true, Source::Trivial, ok);
    }
    Ok(r)
}

fn unfold(out: &Path, args: &TensorArgs, mode: usize) -> CmdResult {
    let (t, f) = load_tensor(args)?;
    if mode == 0 || mode > t.order() {
        return Err(usage(format!("--mode must be in 1..={}", t.order())));
    }
    let m = t.unfold(mode - 1)?;
    let stem = f.as_ref().map(tag).unwrap_or_else(|| "tensor".into());
    write(out, &format!("{stem}_mode{mode}.mat"), &io::write_exact_matrix(&m))?;
    let mut r = Report::new();
    r.push("shape", format!("{}x{}", m.rows(), m.cols()), "-", Source::Trivial, Verdict::Info);
    r.push("rank", nqtensor::matrix::exact_rank(&m), "-", Source::Derived, Verdict::Info);
    Ok(r)
}

fn gip_cert(n: usize, k: usize, input: Option<&Path>) -> CmdResult {
    let t = match input {
        Some(path) => in_file(path, io::read_tensor(&read(path)?))?,
        None => canonical_tensor(&BooleanFunction::gip(n, k)?)?,
    };
    Ok(gip_certificate(n, k, &t)?.report())
}

fn nof_protocol(args: &NofArgs) -> Result<(BooleanFunction, NofProtocol), Failure> {
    let f = args.function.resolve()?;
    let t = canonical_tensor(&f)?;
    let d = decomposition_for(&f, &t)?;
    let p = build_nof_protocol(&d, &f)?.with_dummy(args.lift_dummy)?;
    Ok((f, p))
}

fn protocol(args: &NofArgs, force_sweep: bool) -> CmdResult {
    let (f, p) = nof_protocol(args)?;
    let mut r = Report::new();
    r.push("function", &f, "-", Source::Trivial, Verdict::Info);
    r.push("nrank_numerical", p.rank(), format!("<={}", p.term_count()), Source::Derived, Verdict::Info);
    r.push("split", p.split(), "-", Source::Trivial, Verdict::Info);
    if p.lifted() {
        r.push("lift_dummy", p.dummy(), "0|1", Source::Trivial, Verdict::Info);
    }
    let expected_cost = ceil_log2(p.rank()) + 1;
    match (&args.x, force_sweep || args.sweep) {
        (Some(x), false) => {
            let res = run_nof(&p, x)?;
            let value = f.eval(x)?;
            r.check("qubit_cost", res.qubit_cost, expected_cost, Source::Paper, res.qubit_cost == expected_cost);
            r.push("accept_probability", format!("{:.6e}", res.probability), "-", Source::Derived, Verdict::Info);
            r.push("analytic_probability", format!("{:.6e}", res.analytic_probability), "-", Source::Derived, Verdict::Info);
            r.check("decision", res.accepted as u8, value as u8, Source::Paper, res.accepted == value);
        }
        (Some(_), true) => return Err(usage("--x and --sweep are exclusive")),
        (None, _) => {
            let s = strong_nondet_check(&p, &f)?;
            let cost = s.results.first().map_or(expected_cost, |res| res.qubit_cost);
            r.check("qubit_cost", cost, expected_cost, Source::Paper, cost == expected_cost);
            r.push("inputs", s.inputs, f.input_count(), Source::Trivial, Verdict::Info);
            r.check("wrong_decisions", s.wrong_decisions.len(), 0, Source::Paper, s.decisions_correct());
            r.check(
                "max_accept_on_zeros",
                format!("{:.3e}", s.max_accept_on_zeros.unwrap_or(0.0)),
                "<=1e-12",
                Source::Paper,
                s.max_accept_on_zeros.is_none_or(|v| v <= 1e-12),
            );
            r.push("min_accept_on_ones", format!("{:.3e}", s.min_accept_on_ones.unwrap_or(0.0)), ">1e-9", Source::Derived, Verdict::Info);
            r.check("max_analytic_gap", format!("{:.3e}", s.max_analytic_gap), "<=1e-9", Source::Derived, s.max_analytic_gap <= 1e-9);
        }
    }
    Ok(r)
}

fn ceil_log2(r: usize) -> usize {
    if r <= 1 {
        0
    } else {
        (usize::BITS - (r - 1).leading_zeros()) as usize
    }
}

fn nih_extract(
    out: &Path,
    scenario: Option<&Path>,
    args: &FunctionArgs,
    opts: NihOptions,
) -> CmdResult {
    let spec = match scenario {
        Some(path) => in_file(path, parse_scenario(&read(path)?))?,
        None => {
            if args.function.as_deref().is_some_and(|f| f != "eq") {
                return Err(usage("without --scenario only the eq chain is built in"));
            }
            trivial_eq_nih(args.n.ok_or_else(|| usage("need --n"))?, args.k.ok_or_else(|| usage("need --k"))?)?
        }
    };
    if spec.mode() != Mode::Nih {
        return Err(usage("nih-extract needs a protocol in nih mode"));
    }
    let f = match (&args.function, &args.truth_table) {
        (None, None) => BooleanFunction::eq(spec.bits(), spec.players())?,
        _ => FunctionArgs { n: Some(args.n.unwrap_or(spec.bits())), k: Some(args.k.unwrap_or(spec.players())), ..args.clone() }
            .resolve()?,
    };
    let cert = nih_rank_certificate(&spec, &f, opts)?;
    write(out, &format!("{}_grouped.mat", tag(&f)), &io::write_exact_matrix(&cert.matrix))?;
    Ok(cert.report())
}

fn probe(args: &FunctionArgs, trials: usize, seed: u64) -> CmdResult {
    let f = args.resolve()?;
    let min = nrank_probe(&f, trials, seed)?;
    let all = probe_lower_bounds(&f, trials, seed, nqtensor::functions::DEFAULT_SUBSTITUTION_BOUND)?;
    let max = all.iter().max().copied().unwrap_or(0);
    let mut r = Report::new();
    r.push("function", &f, "-", Source::Trivial, Verdict::Info);
    r.push("trials", trials, "-", Source::Trivial, Verdict::Info);
    r.push("probe_min_lower_bound", min, "evidence, not nrank", Source::Derived, Verdict::Info);
    r.push("probe_max_lower_bound", max, "-", Source::Derived, Verdict::Info);
    Ok(r)
}

struct VerifyArgs {
    seed: u64,
    case: Option<(usize, usize)>,
    trials: usize,
    set_size_exponent: Option<usize>,
    input: Option<PathBuf>,
}

fn verify(v: VerifyArgs) -> CmdResult {
    // parse the optional tensor first so a bad file is a usage error before the suite runs
    let extra = match &v.input {
        Some(path) => Some(in_file(path, io::read_tensor(&read(path)?))?),
        None => None,
    };
    let mut cfg = VerifyConfig { seed: v.seed, substitutions: v.trials, set_size_exponent: v.set_size_exponent, ..VerifyConfig::default() };
    if let Some(case) = v.case {
        cfg.gip_cases = vec![case];
    }
    let outcome = verify_all(&cfg);
    for line in outcome.lines() {
        println!("{line}");
    }
    let mut r = outcome.report();
    if let Some(t) = extra {
        let b = rank_bracket(&t, None)?;
        r.push("input.bracket", format!("[{},{}]", b.lower, b.upper), "-", Source::Derived, Verdict::Info);
    }
    Ok(r)
}

fn execute(cli: Cli) -> Result<(String, Report), Failure> {
    let out = cli.out.as_path();
    Ok(match cli.command {
        Command::Build(a) => ("build", build(out, &a)?),
        Command::Rank { tensor, dec } => ("rank", rank(&tensor, dec.as_deref())?),
        Command::Unfold { tensor, mode } => ("unfold", unfold(out, &tensor, mode)?),
        Command::GipCert { n, k, input } => ("gip_cert", gip_cert(n, k, input.as_deref())?),
        Command::Protocol { which: ProtocolCommand::Nof(a) } => ("protocol_nof", protocol(&a, false)?),
        Command::Protocol { which: ProtocolCommand::Sweep(a) } => ("protocol_sweep", protocol(&a, true)?),
        Command::NihExtract { scenario, function, seed, set_size_exponent, max_attempts } => (
            "nih_extract",
            nih_extract(out, scenario.as_deref(), &function, NihOptions { set_size_exponent, seed, max_attempts })?,
        ),
        Command::Probe { function, trials, seed } => ("probe", probe(&function, trials, seed)?),
        Command::VerifyAll { seed, n, k, trials, set_size_exponent, input } => (
            "verify_all",
            verify(VerifyArgs { seed, case: n.zip(k), trials, set_size_exponent, input })?,
        ),
    })
    .map(|(name, r)| (name.to_string(), r))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let out = cli.out.clone();
    match execute(cli) {
        Ok((name, report)) => {
            let tsv = report.to_tsv();
            if let Err(Failure::Usage(msg)) = write(&out, &format!("{name}.tsv"), &tsv) {
                eprintln!("error: {msg}");
                return ExitCode::from(2);
            }
            print!("{tsv}");
            if report.passed() {
                ExitCode::SUCCESS
            } else {
                for row in report.failures() {
                    eprintln!("FAIL {}: computed {}, expected {}", row.quantity, row.computed, row.expected);
                }
                ExitCode::from(1)
            }
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Check(msg)) => {
            eprintln!("check failed: {msg}");
            ExitCode::from(1)
        }
    }
}
