//! Argument definitions and the three subcommands.
//!
//! Exit codes: 0 success, 1 a check failed, 2 bad flags or parameters,
//! 3 a request exceeded a capacity limit.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use typeb_core::clt::{self, CltConfig, Method, SignLaw};
use typeb_core::fock::{FockSpace, FockSpaceConfig};
use typeb_core::linalg::{involutions, Matrix};
use typeb_core::nalgebra::DVector;
use typeb_core::spins::{self, JwModel, RMode, SignTable};
use typeb_core::wick::{self, Boundary, CovarianceData};
use typeb_core::{coxeter_b, Error as CoreError};

use crate::manifest::RunManifest;
use crate::output::{self, CheckDoc, CheckItem, CltDoc, CltRow, MomentsDoc};
use crate::parallel;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_CAPACITY: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "typeb", version, about = "Type-B Gaussian moments, Fock-space checks and finite-N central limit experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Limit moments as exact polynomials or evaluated numbers.
    Moments(MomentsArgs),
    /// Finite-N moments of the normalized sum against the limit.
    Clt(CltArgs),
    /// Positivity, Fock-space and spin-model checks.
    #[command(subcommand)]
    Check(CheckCommand),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Family {
    #[value(name = "typeB", alias = "typeb")]
    TypeB,
    Q,
    Qt,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum DataFormat {
    #[default]
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum ReportFormat {
    #[default]
    Table,
    Json,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    #[default]
    Auto,
    Full,
    Class,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Auto => Method::Auto,
            MethodArg::Full => Method::Full,
            MethodArg::Class => Method::Class,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum RModeArg {
    /// `r(i,j) = r(j,i)`, the default.
    #[default]
    Symmetric,
    /// Independent `r(i,j)` for every ordered pair.
    Ordered,
}

impl From<RModeArg> for RMode {
    fn from(m: RModeArg) -> Self {
        match m {
            RModeArg::Symmetric => RMode::Symmetric,
            RModeArg::Ordered => RMode::Ordered,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Pi0Arg {
    #[default]
    Identity,
    /// `diag(1, -1, ..., -1)`.
    Flip,
    /// Exchanges the first two basis vectors.
    Swap,
}

impl Pi0Arg {
    fn matrix(self, d: usize) -> Matrix {
        match self {
            Pi0Arg::Identity => involutions::identity(d),
            Pi0Arg::Flip => involutions::flip(d),
            Pi0Arg::Swap => involutions::swap12(d),
        }
    }

    fn name(self) -> &'static str {
        match self {
            Pi0Arg::Identity => "identity",
            Pi0Arg::Flip => "flip",
            Pi0Arg::Swap => "swap",
        }
    }
}

#[derive(Debug, Args)]
pub struct MomentsArgs {
    #[arg(long, value_enum)]
    pub family: Family,
    #[arg(long)]
    pub order: usize,
    #[arg(long, allow_negative_numbers = true)]
    pub q: Option<f64>,
    #[arg(long, allow_negative_numbers = true, conflicts_with = "t")]
    pub rho: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub t: Option<f64>,
    /// Print the exact polynomial instead of a number.
    #[arg(long)]
    pub symbolic: bool,
    #[arg(long, value_enum, default_value_t)]
    pub format: DataFormat,
    /// Write to this file instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CltArgs {
    #[arg(long)]
    pub k: usize,
    #[arg(long, allow_negative_numbers = true)]
    pub q: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub rho: f64,
    /// Comma-separated site counts.
    #[arg(long = "Ns", value_delimiter = ',', required = true)]
    pub ns: Vec<usize>,
    /// A count `n` (seeds 0..n), a list `3,5,8`, or a range `10..20`.
    #[arg(long, value_parser = parse_seeds, default_value = "1")]
    pub seeds: SeedList,
    /// Add the exact expectation over the sign distribution.
    #[arg(long)]
    pub exact_expectation: bool,
    #[arg(long, value_enum, default_value_t)]
    pub method: MethodArg,
    #[arg(long, value_enum, default_value_t)]
    pub r_mode: RModeArg,
    #[arg(long, value_enum, default_value_t)]
    pub format: DataFormat,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SeedList(pub Vec<u64>);

/// Parses a seed count, list or half-open range.
pub fn parse_seeds(s: &str) -> Result<SeedList, String> {
    let s = s.trim();
    let bad = |e: std::num::ParseIntError| format!("invalid seed specification {s:?}: {e}");
    let seeds: Vec<u64> = if let Some((a, b)) = s.split_once("..") {
        let (a, b) = (a.parse::<u64>().map_err(bad)?, b.parse::<u64>().map_err(bad)?);
        (a..b).collect()
    } else if s.contains(',') {
        s.split(',').filter(|p| !p.is_empty()).map(|p| p.trim().parse::<u64>().map_err(bad)).collect::<Result<_, _>>()?
    } else {
        (0..s.parse::<u64>().map_err(bad)?).collect()
    };
    if seeds.is_empty() {
        return Err(format!("seed specification {s:?} selects no seeds"));
    }
    Ok(SeedList(seeds))
}

#[derive(Debug, Subcommand)]
pub enum CheckCommand {
    /// Positive semi-definiteness of the symmetrization operator.
    Psd(PsdArgs),
    /// Deformed commutation relation and Wick agreement on the truncated Fock space.
    Fock(FockArgs),
    /// Structural hypotheses of the tensor spin model.
    Hypotheses(HypothesesArgs),
}

#[derive(Debug, Args)]
pub struct PsdArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub d: usize,
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub q: f64,
    #[arg(long, value_enum, default_value_t)]
    pub pi0: Pi0Arg,
    /// Require strict positive definiteness.
    #[arg(long)]
    pub strict: bool,
    #[arg(long, value_enum, default_value_t)]
    pub format: ReportFormat,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FockArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub q: f64,
    #[arg(long)]
    pub d: usize,
    /// Truncation level.
    #[arg(long = "M")]
    pub m: usize,
    #[arg(long, value_enum, default_value_t)]
    pub pi0: Pi0Arg,
    /// Random vector pairs and random words to test.
    #[arg(long, default_value_t = 20)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t)]
    pub format: ReportFormat,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct HypothesesArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub rho: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 3)]
    pub nmax: usize,
    /// Mean of the sign table entries.
    #[arg(long, allow_negative_numbers = true, default_value_t = 0.5)]
    pub q: f64,
    #[arg(long, value_enum, default_value_t)]
    pub r_mode: RModeArg,
    #[arg(long, value_enum, default_value_t)]
    pub format: ReportFormat,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Failure of a subcommand, mapped to an exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("cannot write output: {0}")]
    Io(#[from] std::io::Error),
    #[error("cannot serialize output: {0}")]
    Json(#[from] serde_json::Error),
    #[error("cannot write CSV: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(CoreError::Capacity { .. }) => EXIT_CAPACITY,
            _ => EXIT_USAGE,
        }
    }
}

/// Result of a subcommand: text to emit and whether every check passed.
struct Outcome {
    text: String,
    pass: bool,
}

/// Parses `args` (including the program name) and runs the subcommand,
/// writing results to `stdout` unless `--out` redirects them.
pub fn run<I, T>(args: I, stdout: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return code;
        }
    };
    let start = Instant::now();
    let (result, out) = match &cli.command {
        Command::Moments(a) => (cmd_moments(a, start), a.out.clone()),
        Command::Clt(a) => (cmd_clt(a, start), a.out.clone()),
        Command::Check(CheckCommand::Psd(a)) => (check_psd(a, start), a.out.clone()),
        Command::Check(CheckCommand::Fock(a)) => (check_fock(a, start), a.out.clone()),
        Command::Check(CheckCommand::Hypotheses(a)) => (check_hypotheses(a, start), a.out.clone()),
    };
    let outcome = match result {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    let written = match out {
        Some(path) => std::fs::write(&path, &outcome.text),
        None => stdout.write_all(outcome.text.as_bytes()),
    };
    if let Err(e) = written {
        eprintln!("error: cannot write output: {e}");
        return EXIT_USAGE;
    }
    if outcome.pass {
        EXIT_OK
    } else {
        EXIT_CHECK_FAILED
    }
}

/// The flag spelling of an enum value.
fn value_name<E: ValueEnum>(v: E) -> String {
    v.to_possible_value().map(|p| p.get_name().to_owned()).unwrap_or_default()
}

fn elapsed(start: Instant) -> Option<f64> {
    Some(start.elapsed().as_secs_f64())
}

fn require(value: Option<f64>, flag: &str, why: &str) -> Result<f64, CliError> {
    value.ok_or_else(|| CliError::Usage(format!("--{flag} is required {why}")))
}

fn check_closed_unit(name: &str, v: f64) -> Result<(), CliError> {
    if (-1.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(CliError::Usage(format!("--{name} must lie in [-1, 1], got {v}")))
    }
}

fn cmd_moments(a: &MomentsArgs, start: Instant) -> Result<Outcome, CliError> {
    let (poly, variables) = match a.family {
        Family::TypeB => (wick::typeb_moment_scalar(a.order)?, ["q", "rho"]),
        Family::Q => (wick::q_moment(a.order)?, ["q", ""]),
        Family::Qt => (wick::qt_moment(a.order)?, ["q", "t"]),
    };
    match a.family {
        Family::Q if a.rho.is_some() || a.t.is_some() => {
            return Err(CliError::Usage("family q takes only --q".into()));
        }
        Family::TypeB if a.t.is_some() => return Err(CliError::Usage("family typeB takes --rho, not --t".into())),
        Family::Qt if a.rho.is_some() => return Err(CliError::Usage("family qt takes --t, not --rho".into())),
        _ => {}
    }
    let mut manifest = RunManifest::new("moments")
        .param("family", value_name(a.family))
        .param("order", a.order)
        .param("symbolic", a.symbolic);
    for (name, v) in [("q", a.q), ("rho", a.rho), ("t", a.t)] {
        if let Some(v) = v {
            check_closed_unit(name, v)?;
            manifest = manifest.param(name, v);
        }
    }
    let univariate = a.family == Family::Q;
    let (terms, value) = if a.symbolic {
        (Some(output::term_rows(&poly, univariate)), None)
    } else {
        let q = require(a.q, "q", "for numeric output")?;
        let value = match a.family {
            Family::Q => poly.eval(q, 0.0),
            Family::TypeB => {
                let rho = require(a.rho, "rho", "for family typeB")?;
                // the endpoints are degenerate and not described by the polynomial
                if rho == 1.0 {
                    wick::boundary_moment(a.order, q, Boundary::PlusOne)?
                } else if rho == -1.0 {
                    wick::boundary_moment(a.order, q, Boundary::MinusOne)?
                } else {
                    poly.eval(q, rho)
                }
            }
            Family::Qt => poly.eval(q, require(a.t, "t", "for family qt")?),
        };
        (None, Some(value))
    };
    let text = match a.format {
        DataFormat::Csv => {
            let mut w = csv::Writer::from_writer(manifest.csv_comment().into_bytes());
            if let Some(rows) = &terms {
                w.write_record(["e1", "e2", "coeff"])?;
                for r in rows {
                    w.write_record([r.e1.to_string(), r.e2.map(|e| e.to_string()).unwrap_or_default(), r.coeff.to_string()])?;
                }
            } else if let Some(v) = value {
                w.write_record(["value"])?;
                w.write_record([output::fmt_sig15(v)])?;
            }
            into_string(w)?
        }
        DataFormat::Json => {
            manifest.wall_time_seconds = elapsed(start);
            let doc = MomentsDoc {
                manifest,
                family: value_name(a.family),
                order: a.order,
                variables: variables.iter().filter(|v| !v.is_empty()).map(|v| v.to_string()).collect(),
                terms,
                value,
            };
            serde_json::to_string_pretty(&doc)? + "\n"
        }
    };
    Ok(Outcome { text, pass: true })
}

fn into_string(w: csv::Writer<Vec<u8>>) -> Result<String, CliError> {
    let bytes = w.into_inner().map_err(|e| CliError::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("CSV output is UTF-8"))
}

fn cmd_clt(a: &CltArgs, start: Instant) -> Result<Outcome, CliError> {
    let seeds = &a.seeds.0;
    let method: Method = a.method.into();
    let mode: RMode = a.r_mode.into();
    let configs: Vec<CltConfig> = seeds
        .iter()
        .flat_map(|&seed| a.ns.iter().map(move |&n| (seed, n)))
        .map(|(seed, n)| CltConfig::new(n, a.k, a.q, a.rho, seed).map(|c| c.with_method(method).with_r_mode(mode)))
        .collect::<Result<_, _>>()?;
    let limit = clt::limit_value(a.k, a.q, a.rho)?;
    let law = SignLaw::from(mode);
    let expected: Vec<Option<f64>> = if a.exact_expectation {
        parallel::map_ordered(&a.ns, |&n| match clt::expected_moment_exact(n, a.k, law) {
            Ok(p) => Ok(Some(p.eval(a.q, a.rho))),
            Err(CoreError::Capacity { .. }) => Ok(None),
            Err(e) => Err(e),
        })
        .into_iter()
        .collect::<Result<_, _>>()?
    } else {
        vec![None; a.ns.len()]
    };
    if a.exact_expectation && expected.iter().any(Option::is_none) {
        log::warn!("exact expectation is limited to orders up to {}; column left empty", clt::EXACT_MAX_ORDER);
    }
    let rows: Vec<CltRow> = parallel::map_ordered(&configs, |cfg| {
        let t = a.ns.iter().position(|&n| n == cfg.n).expect("N from the list");
        clt::convergence_row(cfg, limit, expected[t]).map(|r| CltRow::from(&r))
    })
    .into_iter()
    .collect::<Result<_, _>>()?;

    let mut manifest = RunManifest::new("clt")
        .param("k", a.k)
        .param("q", a.q)
        .param("rho", a.rho)
        .param("Ns", a.ns.iter().map(usize::to_string).collect::<Vec<_>>().join(","))
        .param("method", value_name(a.method))
        .param("r_mode", value_name(a.r_mode))
        .param("exact_expectation", a.exact_expectation)
        .seeds(seeds);
    let text = match a.format {
        DataFormat::Csv => {
            let mut w = csv::Writer::from_writer(manifest.csv_comment().into_bytes());
            w.write_record(output::CLT_CSV_HEADER)?;
            for r in &rows {
                let moment = match (&r.moment, &r.skipped) {
                    (Some(m), _) => output::float_cell(Some(*m)),
                    (None, Some(limit)) => format!("SKIPPED({limit})"),
                    (None, None) => String::new(),
                };
                w.write_record([
                    r.seed.to_string(),
                    r.n.to_string(),
                    moment,
                    output::float_cell(Some(r.limit)),
                    output::float_cell(r.abs_error),
                    output::float_cell(r.expected_moment),
                ])?;
            }
            into_string(w)?
        }
        DataFormat::Json => {
            manifest.wall_time_seconds = elapsed(start);
            serde_json::to_string_pretty(&CltDoc { manifest, rows })? + "\n"
        }
    };
    Ok(Outcome { text, pass: true })
}

fn render_check(doc: CheckDoc, format: ReportFormat) -> Result<Outcome, CliError> {
    let pass = doc.pass;
    let text = match format {
        ReportFormat::Table => doc.table(),
        ReportFormat::Json => serde_json::to_string_pretty(&doc)? + "\n",
    };
    Ok(Outcome { text, pass })
}

fn check_psd(a: &PsdArgs, start: Instant) -> Result<Outcome, CliError> {
    check_closed_unit("alpha", a.alpha)?;
    check_closed_unit("q", a.q)?;
    if a.n == 0 || a.d == 0 {
        return Err(CliError::Usage("--n and --d must be positive".into()));
    }
    let p = coxeter_b::symmetrizer(a.n, a.d, &a.pi0.matrix(a.d), a.alpha, a.q)?;
    let report = coxeter_b::psd_check(&p, a.strict)?;
    let threshold = if a.strict { coxeter_b::STRICT_PD_TOL } else { -coxeter_b::PSD_TOL };
    let item = CheckItem {
        name: if a.strict { "positive-definite" } else { "positive-semidefinite" }.into(),
        pass: report.pass,
        value: report.min_eigenvalue,
        threshold,
        detail: format!("min eigenvalue {:.6e} of a {}x{} operator", report.min_eigenvalue, p.nrows(), p.ncols()),
    };
    let mut manifest = RunManifest::new("check psd")
        .param("n", a.n)
        .param("d", a.d)
        .param("alpha", a.alpha)
        .param("q", a.q)
        .param("pi0", a.pi0.name())
        .param("strict", a.strict);
    manifest.wall_time_seconds = elapsed(start);
    render_check(CheckDoc::new(manifest, vec![item]), a.format)
}

/// Tolerance shared by the Fock-space checks.
const FOCK_TOL: f64 = 1e-10;

fn check_fock(a: &FockArgs, start: Instant) -> Result<Outcome, CliError> {
    let cfg = FockSpaceConfig::new(a.d, a.m, a.alpha, a.q, a.pi0.matrix(a.d))?;
    let space = FockSpace::new(cfg)?;
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let random_vec = |rng: &mut ChaCha8Rng| DVector::from_fn(a.d, |_, _| rng.random_range(-1.0..1.0));

    let mut items = Vec::new();
    if a.m >= 2 {
        let mut worst: f64 = 0.0;
        for _ in 0..a.trials {
            let (x, y) = (random_vec(&mut rng), random_vec(&mut rng));
            worst = worst.max(space.commutation_residual(&x, &y)?);
        }
        items.push(CheckItem {
            name: "commutation".into(),
            pass: worst <= FOCK_TOL,
            value: worst,
            threshold: FOCK_TOL,
            detail: format!("max residual over {} random pairs, levels 0..={}", a.trials, a.m - 2),
        });
    }

    // vacuum moments of random words against the pairing formula
    let pool: Vec<Vec<f64>> = (0..4).map(|_| random_vec(&mut rng).iter().copied().collect()).collect();
    let cov = CovarianceData::from_vectors(&pool, a.pi0.matrix(a.d), a.alpha, a.q)?;
    let mut worst: f64 = 0.0;
    for _ in 0..a.trials {
        let len = rng.random_range(0..=a.m);
        let pos: Vec<usize> = (0..len).map(|_| rng.random_range(0..pool.len())).collect();
        let vs: Vec<DVector<f64>> = pos.iter().map(|&p| DVector::from_column_slice(&pool[p])).collect();
        let diff = (space.gaussian_moment(&vs)? - wick::typeb_moment_vector(&pos, &cov)?).abs();
        worst = worst.max(diff);
    }
    items.push(CheckItem {
        name: "wick".into(),
        pass: worst <= FOCK_TOL,
        value: worst,
        threshold: FOCK_TOL,
        detail: format!("max vacuum-moment discrepancy over {} random words of length <= {}", a.trials, a.m),
    });

    let mut manifest = RunManifest::new("check fock")
        .param("alpha", a.alpha)
        .param("q", a.q)
        .param("d", a.d)
        .param("M", a.m)
        .param("pi0", a.pi0.name())
        .param("trials", a.trials)
        .seeds(&[a.seed]);
    manifest.wall_time_seconds = elapsed(start);
    render_check(CheckDoc::new(manifest, items), a.format)
}

fn check_hypotheses(a: &HypothesesArgs, start: Instant) -> Result<Outcome, CliError> {
    let signs = SignTable::with_mode(a.seed, a.q, a.r_mode.into())?;
    let model = JwModel::new(a.rho)?;
    let report = spins::check_hypotheses(&signs, &model, a.nmax, a.seed)?;
    let items = report
        .results
        .iter()
        .map(|r| CheckItem {
            name: r.name.to_owned(),
            pass: r.pass,
            value: r.checked as f64,
            threshold: 1e-12,
            detail: match &r.witness {
                None => format!("{} ({} identities)", r.description, r.checked),
                Some((w, why)) => format!("{}: fails on {}: {}", r.description, spins::format_word(w), why),
            },
        })
        .collect();
    let mut manifest = RunManifest::new("check hypotheses")
        .param("rho", a.rho)
        .param("q", a.q)
        .param("nmax", a.nmax)
        .param("r_mode", value_name(a.r_mode))
        .seeds(&[a.seed]);
    manifest.wall_time_seconds = elapsed(start);
    render_check(CheckDoc::new(manifest, items), a.format)
}
