//! Command-line front end.
//!
//! Every artifact carries a metadata block echoing the parsed configuration,
//! so a report can be reproduced from its own header. Output is a pure
//! function of the input bytes and flags.

use std::ffi::OsString;
use std::io::{Read, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use crate::causality::{
    cross_correlation, granger_pair, shuffle_null_many, BandMode, InfluenceStatistic, LagRange, NullModelSpec,
    SignificanceReport, SlidingAreaStatistic, WindowSpec, TIDY_HEADER,
};
use crate::dynamics::{cyclic_pair, default_events, lorenz, three_channel_event_series, EventSpec, LorenzParams};
use crate::error::Error;
use crate::io::{load_csv, save_csv};
use crate::leadlag::lead_matrix;
use crate::path::{preprocess, NormalizeMode, Path, PreprocessConfig, Warp};
use crate::signature::{log_signature, signature_with_cap, DEFAULT_LEVEL_CAP};
use crate::tensor::lyndon_words;

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const USAGE: i32 = 2;
    pub const CONFIG: i32 = 3;
    pub const IO: i32 = 4;
    pub const DATA: i32 = 5;
    pub const COMPUTE: i32 = 6;
}

#[derive(Parser, Debug, Serialize)]
#[command(name = "pathsig", version, about = "Path signatures and lead-lag analysis for multivariate time series")]
pub struct Cli {
    /// Input CSV (first column time); `-` or absent reads stdin.
    #[arg(short, long, global = true, env = "PATHSIG_INPUT")]
    pub input: Option<PathBuf>,

    /// Output file; `-` or absent writes stdout.
    #[arg(short, long, global = true, env = "PATHSIG_OUTPUT")]
    pub output: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    /// Truncated signature as JSON.
    Sig(SigArgs),
    /// Truncated log-signature with its Lyndon coordinates.
    Logsig(SigArgs),
    /// Matrix of pairwise signed areas.
    Leadmatrix(LeadArgs),
    /// Sliding-window signed area against a time-shuffled null model.
    Slidearea(SlideArgs),
    /// Signature-derivative stream against a time-shuffled null model.
    Influence(InfluenceArgs),
    /// Cross-correlation over a lag range.
    Xcorr(XcorrArgs),
    /// VAR Granger measures.
    Granger(GrangerArgs),
    /// Synthetic data generators, written as CSV.
    #[command(subcommand)]
    Gen(GenCommand),
}

#[derive(Args, Debug, Default, Serialize)]
pub struct PreprocessArgs {
    /// Subtract each channel's mean.
    #[arg(long, env = "PATHSIG_CENTER", num_args = 0..=1, default_missing_value = "true")]
    pub center: Option<bool>,
    /// Range normalization: per, global or none.
    #[arg(long, env = "PATHSIG_NORMALIZE")]
    pub normalize: Option<NormalizeMode>,
    /// Start the path at the origin with an extra sample.
    #[arg(long, env = "PATHSIG_PREPEND_ZERO", num_args = 0..=1, default_missing_value = "true")]
    pub prepend_zero: Option<bool>,
    /// Gaussian smoothing width in time units (0 disables).
    #[arg(long, env = "PATHSIG_SMOOTH_SIGMA")]
    pub smooth_sigma: Option<f64>,
}

impl PreprocessArgs {
    fn resolve(&self, base: PreprocessConfig) -> PreprocessConfig {
        PreprocessConfig {
            center: self.center.unwrap_or(base.center),
            normalize: self.normalize.unwrap_or(base.normalize),
            prepend_zero: self.prepend_zero.unwrap_or(base.prepend_zero),
            smooth_sigma: self.smooth_sigma.unwrap_or(base.smooth_sigma),
        }
    }
}

#[derive(Args, Debug, Serialize)]
pub struct SigArgs {
    /// Truncation level.
    #[arg(long, env = "PATHSIG_LEVEL", default_value_t = 2)]
    pub level: usize,
    /// Highest level accepted without error.
    #[arg(long, env = "PATHSIG_MAX_LEVEL", default_value_t = DEFAULT_LEVEL_CAP)]
    pub max_level: usize,
    #[command(flatten)]
    pub preprocess: PreprocessArgs,
}

#[derive(Args, Debug, Serialize)]
pub struct LeadArgs {
    /// Also write the matrix as CSV to this file.
    #[arg(long, env = "PATHSIG_CSV")]
    pub csv: Option<PathBuf>,
    #[command(flatten)]
    pub preprocess: PreprocessArgs,
}

#[derive(Args, Debug, Serialize)]
pub struct NullArgs {
    /// Shuffled replicates.
    #[arg(long, env = "PATHSIG_REPLICATES", default_value_t = 1000)]
    pub replicates: usize,
    /// Base seed of the null model (required).
    #[arg(long, env = "PATHSIG_SEED")]
    pub seed: Option<u64>,
    /// Band half-width in null standard deviations.
    #[arg(long, env = "PATHSIG_SIGMAS", default_value_t = 3.0)]
    pub sigmas: f64,
    /// Shortest run of consecutive exceedances reported.
    #[arg(long, env = "PATHSIG_MIN_RUN", default_value_t = 5)]
    pub min_run: usize,
    /// Band construction: gaussian or quantile.
    #[arg(long, env = "PATHSIG_BAND", default_value = "gaussian", value_parser = parse_band)]
    pub band: BandMode,
}

impl NullArgs {
    fn spec(&self) -> Result<NullModelSpec, Failure> {
        let seed = self
            .seed
            .ok_or_else(|| Failure::config("--seed is required whenever a null model runs"))?;
        if self.replicates < 2 {
            return Err(Failure::config("--replicates must be at least 2"));
        }
        if !(self.sigmas > 0.0) {
            return Err(Failure::config("--sigmas must be positive"));
        }
        if self.min_run == 0 {
            return Err(Failure::config("--min-run must be at least 1"));
        }
        Ok(NullModelSpec {
            replicates: self.replicates,
            seed,
            band_sigmas: self.sigmas,
            min_run_length: self.min_run,
            band_mode: self.band,
        })
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    /// Tidy long-format CSV.
    Csv,
}

#[derive(Args, Debug, Serialize)]
pub struct SlideArgs {
    /// Window length in time units.
    #[arg(long, env = "PATHSIG_WINDOW")]
    pub window: f64,
    /// Window stride; defaults to a twentieth of the window.
    #[arg(long, env = "PATHSIG_STRIDE")]
    pub stride: Option<f64>,
    /// Channel pairs `i:j` (1-based indices or names), comma separated.
    #[arg(long, env = "PATHSIG_PAIRS", value_delimiter = ',')]
    pub pairs: Vec<String>,
    #[arg(long, env = "PATHSIG_FORMAT", value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[command(flatten)]
    pub null: NullArgs,
    #[command(flatten)]
    pub preprocess: PreprocessArgs,
}

#[derive(Args, Debug, Serialize)]
pub struct InfluenceArgs {
    /// Average the stream over windows of this length.
    #[arg(long, env = "PATHSIG_WINDOW")]
    pub window: Option<f64>,
    #[arg(long, env = "PATHSIG_STRIDE", requires = "window")]
    pub stride: Option<f64>,
    /// Ordered channel pairs `i:j` for the stream `gamma_i gamma_j'`.
    #[arg(long, env = "PATHSIG_PAIRS", value_delimiter = ',')]
    pub pairs: Vec<String>,
    #[arg(long, env = "PATHSIG_FORMAT", value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[command(flatten)]
    pub null: NullArgs,
    /// Preprocessing defaults to center, per-channel normalize, prepend zero.
    #[command(flatten)]
    pub preprocess: PreprocessArgs,
}

#[derive(Args, Debug, Serialize)]
pub struct XcorrArgs {
    /// `MAX` for the symmetric range, or `MIN:MAX`, in time units.
    #[arg(long, env = "PATHSIG_LAGS", allow_hyphen_values = true)]
    pub lags: String,
    #[arg(long, env = "PATHSIG_PAIRS", value_delimiter = ',')]
    pub pairs: Vec<String>,
    #[arg(long, env = "PATHSIG_FORMAT", value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[command(flatten)]
    pub preprocess: PreprocessArgs,
}

#[derive(Args, Debug, Serialize)]
pub struct GrangerArgs {
    /// VAR order.
    #[arg(long, env = "PATHSIG_ORDER", default_value_t = 1)]
    pub order: usize,
    /// Ordered pairs `cause:caused`; all ordered pairs by default.
    #[arg(long, env = "PATHSIG_PAIRS", value_delimiter = ',')]
    pub pairs: Vec<String>,
    #[command(flatten)]
    pub preprocess: PreprocessArgs,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum GenCommand {
    /// Lorenz trajectory by fixed-step RK4.
    Lorenz(LorenzArgs),
    /// Two periodic bump trains with a phase lag, optionally time-warped.
    Cyclic(CyclicArgs),
    /// Three noisy channels with localized lead-lag events.
    Events(EventsArgs),
}

#[derive(Args, Debug, Serialize)]
pub struct LorenzArgs {
    #[arg(long, default_value_t = 10.0)]
    pub sigma: f64,
    #[arg(long, default_value_t = 28.0)]
    pub rho: f64,
    #[arg(long, default_value_t = 8.0 / 3.0)]
    pub beta: f64,
    /// Initial state `x,y,z`.
    #[arg(long, value_delimiter = ',', num_args = 3, default_values_t = [1.0, 1.0, 1.0], allow_hyphen_values = true)]
    pub x0: Vec<f64>,
    #[arg(long, default_value_t = 0.005)]
    pub dt: f64,
    #[arg(long, default_value_t = 10_000)]
    pub steps: usize,
    /// Keep every n-th integration step.
    #[arg(long, default_value_t = 1)]
    pub sample_every: usize,
}

#[derive(Args, Debug, Serialize)]
pub struct CyclicArgs {
    #[arg(long, default_value_t = 4)]
    pub events: usize,
    /// Delay of channel 2 as a fraction of the event period.
    #[arg(long, default_value_t = 0.25, allow_hyphen_values = true)]
    pub phase_lag: f64,
    /// identity, power:P, affine:S:O, sine:A:M or knots:x,y:...
    #[arg(long, default_value = "identity")]
    pub warp: Warp,
    #[arg(long, default_value_t = 1000)]
    pub samples: usize,
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,
    #[arg(long, env = "PATHSIG_SEED", default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args, Debug, Serialize)]
pub struct EventsArgs {
    /// `leader:follower:center[:width[:lag[:amplitude]]]`, 1-based channels;
    /// repeatable. Defaults to 1 leading 2 at 0.3 and 3 leading 2 at 0.7.
    #[arg(long = "event")]
    pub events: Vec<String>,
    #[arg(long, default_value_t = 2001)]
    pub samples: usize,
    #[arg(long, default_value_t = 0.1)]
    pub noise: f64,
    #[arg(long, env = "PATHSIG_SEED", default_value_t = 0)]
    pub seed: u64,
}

fn parse_band(s: &str) -> Result<BandMode, String> {
    match s {
        "gaussian" => Ok(BandMode::Gaussian),
        "quantile" => Ok(BandMode::Quantile),
        _ => Err(format!("band must be gaussian or quantile, got '{s}'")),
    }
}

#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn config(msg: impl Into<String>) -> Self {
        Failure {
            code: exit::CONFIG,
            message: msg.into(),
        }
    }

    fn io(e: impl std::fmt::Display) -> Self {
        Failure {
            code: exit::IO,
            message: e.to_string(),
        }
    }

    fn data(e: Error) -> Self {
        let code = if matches!(e, Error::Io(_)) { exit::IO } else { exit::DATA };
        Failure {
            code,
            message: e.to_string(),
        }
    }

    fn compute(e: Error) -> Self {
        let code = match e {
            Error::InvalidArgument(_) | Error::WindowTooLong { .. } | Error::LagOutOfRange { .. } => exit::CONFIG,
            Error::Io(_) => exit::IO,
            _ => exit::COMPUTE,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

/// Parses `args` (including the program name), runs the command and returns
/// the exit code. Diagnostics go to stderr.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => exit::OK,
                ErrorKind::InvalidSubcommand
                | ErrorKind::MissingSubcommand
                | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => exit::USAGE,
                _ => exit::CONFIG,
            };
            let _ = e.print();
            return code;
        }
    };
    match run(&cli) {
        Ok(()) => exit::OK,
        Err(f) => {
            eprintln!("pathsig: {}", f.message);
            f.code
        }
    }
}

#[derive(Serialize)]
struct Metadata<'a> {
    tool: &'static str,
    version: &'static str,
    command: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    config: &'a Cli,
    resolved: Value,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    warnings: Vec<String>,
}

struct Artifact {
    command: &'static str,
    seed: Option<u64>,
    resolved: Value,
    warnings: Vec<String>,
}

impl Artifact {
    fn new(command: &'static str) -> Self {
        Artifact {
            command,
            seed: None,
            resolved: Value::Null,
            warnings: Vec::new(),
        }
    }

    fn metadata<'a>(&self, cli: &'a Cli) -> Metadata<'a> {
        Metadata {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command: self.command,
            seed: self.seed,
            config: cli,
            resolved: self.resolved.clone(),
            warnings: self.warnings.clone(),
        }
    }

    fn json(&self, cli: &Cli, result: impl Serialize) -> Result<String, Failure> {
        let doc = json!({ "metadata": self.metadata(cli), "result": result });
        let mut s = serde_json::to_string_pretty(&doc).map_err(|e| Failure::compute(e.into()))?;
        s.push('\n');
        Ok(s)
    }

    /// Metadata as a single `#` comment line, for CSV artifacts.
    fn comment(&self, cli: &Cli) -> Result<String, Failure> {
        let m = serde_json::to_string(&self.metadata(cli)).map_err(|e| Failure::compute(e.into()))?;
        Ok(format!("# {m}\n"))
    }
}

fn write_to(target: Option<&std::path::Path>, body: &[u8]) -> Result<(), Failure> {
    match target {
        None => write_stdout(body),
        Some(p) if p.as_os_str() == "-" => write_stdout(body),
        Some(p) => std::fs::write(p, body).map_err(|e| Failure::io(format!("{}: {e}", p.display()))),
    }
}

fn write_stdout(body: &[u8]) -> Result<(), Failure> {
    let mut out = std::io::stdout().lock();
    out.write_all(body).and_then(|_| out.flush()).map_err(Failure::io)
}

fn load_input(cli: &Cli) -> Result<Path, Failure> {
    let bytes = match cli.input.as_deref() {
        None => read_stdin()?,
        Some(p) if p.as_os_str() == "-" => read_stdin()?,
        Some(p) => std::fs::read(p).map_err(|e| Failure::io(format!("{}: {e}", p.display())))?,
    };
    load_csv(bytes.as_slice()).map_err(Failure::data)
}

fn read_stdin() -> Result<Vec<u8>, Failure> {
    let mut buf = Vec::new();
    std::io::stdin().read_to_end(&mut buf).map_err(Failure::io)?;
    Ok(buf)
}

fn prepare(raw: &Path, cfg: &PreprocessConfig, art: &mut Artifact) -> Result<Path, Failure> {
    let p = preprocess(raw, cfg).map_err(Failure::compute)?;
    art.warnings.extend(p.warnings);
    Ok(p.path)
}

fn channel_ref(a: &Path, s: &str) -> Result<usize, Failure> {
    if let Some(k) = a.names().iter().position(|n| n == s) {
        return Ok(k);
    }
    match s.parse::<usize>() {
        Ok(k) if (1..=a.channels()).contains(&k) => Ok(k - 1),
        _ => Err(Failure::config(format!(
            "unknown channel '{s}' (use a 1-based index up to {} or a column name)",
            a.channels()
        ))),
    }
}

/// Resolves `i:j` strings to 0-based pairs; `default` applies when empty.
fn resolve_pairs(a: &Path, given: &[String], ordered: bool) -> Result<Vec<(usize, usize)>, Failure> {
    if given.is_empty() {
        let n = a.channels();
        let pairs = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .filter(|&(i, j)| if ordered { i != j } else { i < j })
            .collect::<Vec<_>>();
        if pairs.is_empty() {
            return Err(Failure::config("need at least two channels for a pair statistic"));
        }
        return Ok(pairs);
    }
    given
        .iter()
        .map(|s| {
            let (x, y) = s
                .split_once(':')
                .ok_or_else(|| Failure::config(format!("pair '{s}' is not of the form i:j")))?;
            Ok((channel_ref(a, x.trim())?, channel_ref(a, y.trim())?))
        })
        .collect()
}

fn pair_json(a: &Path, pairs: &[(usize, usize)]) -> Value {
    Value::Array(
        pairs
            .iter()
            .map(|&(i, j)| json!([a.names()[i], a.names()[j]]))
            .collect(),
    )
}

fn parse_lags(s: &str) -> Result<LagRange, Failure> {
    let bad = || Failure::config(format!("--lags expects MAX or MIN:MAX, got '{s}'"));
    let num = |x: &str| x.trim().parse::<f64>().map_err(|_| bad());
    let r = match s.split_once(':') {
        Some((lo, hi)) => LagRange {
            min: num(lo)?,
            max: num(hi)?,
        },
        None => {
            let m = num(s)?;
            if m < 0.0 {
                return Err(bad());
            }
            LagRange::symmetric(m)
        }
    };
    if !(r.min <= r.max) {
        return Err(bad());
    }
    Ok(r)
}

fn parse_event(s: &str) -> Result<EventSpec, Failure> {
    let bad = || Failure::config(format!("--event expects leader:follower:center[:width[:lag[:amplitude]]], got '{s}'"));
    let parts: Vec<&str> = s.split(':').collect();
    if !(3..=6).contains(&parts.len()) {
        return Err(bad());
    }
    let ch = |x: &str| match x.parse::<usize>() {
        Ok(k) if k >= 1 => Ok(k - 1),
        _ => Err(bad()),
    };
    let num = |x: &str| x.parse::<f64>().map_err(|_| bad());
    let mut e = EventSpec::new(ch(parts[0])?, ch(parts[1])?, num(parts[2])?);
    if let Some(w) = parts.get(3) {
        e.width = num(w)?;
    }
    if let Some(l) = parts.get(4) {
        e.lag = num(l)?;
    }
    if let Some(a) = parts.get(5) {
        e.amplitude = num(a)?;
    }
    Ok(e)
}

fn reports_csv(art: &Artifact, cli: &Cli, reports: &[SignificanceReport]) -> Result<String, Failure> {
    let mut s = art.comment(cli)?;
    s.push_str(TIDY_HEADER);
    s.push('\n');
    for r in reports {
        for row in r.tidy_rows() {
            s.push_str(&row);
            s.push('\n');
        }
    }
    Ok(s)
}

fn gen_csv(art: &Artifact, cli: &Cli, p: &Path) -> Result<String, Failure> {
    let mut buf = art.comment(cli)?.into_bytes();
    save_csv(p, "t", &mut buf).map_err(Failure::compute)?;
    String::from_utf8(buf).map_err(|e| Failure::compute(Error::CsvFormat(e.to_string())))
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let out = cli.output.as_deref();
    match &cli.command {
        Command::Sig(a) | Command::Logsig(a) => {
            let is_log = matches!(cli.command, Command::Logsig(_));
            let mut art = Artifact::new(if is_log { "logsig" } else { "sig" });
            if a.level == 0 || a.level > a.max_level {
                return Err(Failure::config(format!(
                    "--level must be in 1..={}, got {}",
                    a.max_level, a.level
                )));
            }
            let raw = load_input(cli)?;
            let cfg = a.preprocess.resolve(PreprocessConfig::default());
            let p = prepare(&raw, &cfg, &mut art)?;
            art.resolved = json!({ "preprocess": cfg, "channels": p.names() });
            let body = if is_log {
                let t = log_signature(&p, a.level).map_err(Failure::compute)?;
                let lyndon: Vec<Value> = lyndon_words(p.channels(), a.level)
                    .into_iter()
                    .map(|w| json!({ "word": w, "value": t.coeff(&w) }))
                    .collect();
                art.json(cli, json!({ "tensor": t, "lyndon": lyndon }))?
            } else {
                let s = signature_with_cap(&p, a.level, a.max_level)
                    .map_err(Failure::compute)?
                    .with_preprocessing(cfg);
                art.json(cli, s)?
            };
            write_to(out, body.as_bytes())
        }
        Command::Leadmatrix(a) => {
            let mut art = Artifact::new("leadmatrix");
            let raw = load_input(cli)?;
            let cfg = a.preprocess.resolve(PreprocessConfig::default());
            let p = prepare(&raw, &cfg, &mut art)?;
            art.resolved = json!({ "preprocess": cfg });
            let m = lead_matrix(&p);
            if let Some(csv) = &a.csv {
                let body = art.comment(cli)? + &m.to_csv();
                write_to(Some(csv), body.as_bytes())?;
            }
            write_to(out, art.json(cli, &m)?.as_bytes())
        }
        Command::Slidearea(a) => {
            let mut art = Artifact::new("slidearea");
            let spec = a.null.spec()?;
            let window =
                WindowSpec::new(a.window, a.stride.unwrap_or(a.window / 20.0)).map_err(Failure::compute)?;
            let raw = load_input(cli)?;
            let cfg = a.preprocess.resolve(PreprocessConfig::default());
            let pairs = resolve_pairs(&raw, &a.pairs, false)?;
            art.seed = Some(spec.seed);
            art.resolved = json!({ "preprocess": cfg, "window": window, "pairs": pair_json(&raw, &pairs) });
            // the observed series is preprocessed inside the statistic; run it
            // once here to surface its warnings
            prepare(&raw, &cfg, &mut art)?;
            let stats: Vec<SlidingAreaStatistic> = pairs
                .iter()
                .map(|&pair| SlidingAreaStatistic {
                    pair,
                    window,
                    preprocess: cfg.clone(),
                })
                .collect();
            let reports = shuffle_null_many(&raw, &stats, &spec).map_err(Failure::compute)?;
            let body = match a.format {
                Format::Json => art.json(cli, json!({ "reports": reports }))?,
                Format::Csv => reports_csv(&art, cli, &reports)?,
            };
            write_to(out, body.as_bytes())
        }
        Command::Influence(a) => {
            let mut art = Artifact::new("influence");
            let spec = a.null.spec()?;
            let window = match a.window {
                Some(w) => Some(WindowSpec::new(w, a.stride.unwrap_or(w / 20.0)).map_err(Failure::compute)?),
                None => None,
            };
            let raw = load_input(cli)?;
            let cfg = a.preprocess.resolve(PreprocessConfig::influence());
            let pairs = resolve_pairs(&raw, &a.pairs, true)?;
            art.seed = Some(spec.seed);
            art.resolved = json!({ "preprocess": cfg, "window": window, "pairs": pair_json(&raw, &pairs) });
            prepare(&raw, &cfg, &mut art)?;
            let stats: Vec<InfluenceStatistic> = pairs
                .iter()
                .map(|&pair| InfluenceStatistic {
                    pair,
                    window,
                    preprocess: cfg.clone(),
                })
                .collect();
            let reports = shuffle_null_many(&raw, &stats, &spec).map_err(Failure::compute)?;
            let body = match a.format {
                Format::Json => art.json(cli, json!({ "reports": reports }))?,
                Format::Csv => reports_csv(&art, cli, &reports)?,
            };
            write_to(out, body.as_bytes())
        }
        Command::Xcorr(a) => {
            let mut art = Artifact::new("xcorr");
            let lags = parse_lags(&a.lags)?;
            let raw = load_input(cli)?;
            let cfg = a.preprocess.resolve(PreprocessConfig::default());
            let p = prepare(&raw, &cfg, &mut art)?;
            let pairs = resolve_pairs(&p, &a.pairs, false)?;
            art.resolved = json!({ "preprocess": cfg, "lags": lags, "pairs": pair_json(&p, &pairs) });
            let mut curves = Vec::new();
            for &(i, j) in &pairs {
                let r = cross_correlation(&p, (i, j), lags).map_err(Failure::compute)?;
                curves.push((i, j, r));
            }
            let body = match a.format {
                Format::Json => {
                    let v: Vec<Value> = curves
                        .iter()
                        .map(|(i, j, r)| {
                            json!({
                                "pair": [i, j],
                                "channels": [p.names()[*i], p.names()[*j]],
                                "lags": r.times,
                                "values": r.values,
                            })
                        })
                        .collect();
                    art.json(cli, v)?
                }
                Format::Csv => {
                    let mut s = art.comment(cli)?;
                    s.push_str("pair,lag,value\n");
                    for (i, j, r) in &curves {
                        for (l, v) in r.times.iter().zip(&r.values) {
                            s.push_str(&format!("{}-{},{l},{v}\n", p.names()[*i], p.names()[*j]));
                        }
                    }
                    s
                }
            };
            write_to(out, body.as_bytes())
        }
        Command::Granger(a) => {
            let mut art = Artifact::new("granger");
            if a.order == 0 {
                return Err(Failure::config("--order must be at least 1"));
            }
            let raw = load_input(cli)?;
            let cfg = a.preprocess.resolve(PreprocessConfig::default());
            let p = prepare(&raw, &cfg, &mut art)?;
            let pairs = resolve_pairs(&p, &a.pairs, true)?;
            art.resolved = json!({ "preprocess": cfg, "pairs": pair_json(&p, &pairs) });
            let mut results = Vec::new();
            for &(cause, caused) in &pairs {
                let g = granger_pair(&p, cause, caused, a.order).map_err(Failure::compute)?;
                results.push(json!({
                    "cause": p.names()[cause],
                    "caused": p.names()[caused],
                    "fit": g,
                }));
            }
            write_to(out, art.json(cli, results)?.as_bytes())
        }
        Command::Gen(g) => {
            let (art, path) = match g {
                GenCommand::Lorenz(l) => {
                    let params = LorenzParams {
                        sigma: l.sigma,
                        rho: l.rho,
                        beta: l.beta,
                        x0: [l.x0[0], l.x0[1], l.x0[2]],
                        dt: l.dt,
                        steps: l.steps,
                        sample_every: l.sample_every,
                    };
                    let p = lorenz(&params).map_err(Failure::compute)?;
                    (Artifact::new("gen lorenz"), p)
                }
                GenCommand::Cyclic(c) => {
                    let p = cyclic_pair(c.events, c.phase_lag, &c.warp, c.samples, c.noise, c.seed)
                        .map_err(Failure::compute)?;
                    let mut art = Artifact::new("gen cyclic");
                    art.seed = Some(c.seed);
                    (art, p)
                }
                GenCommand::Events(e) => {
                    let events = if e.events.is_empty() {
                        default_events()
                    } else {
                        e.events.iter().map(|s| parse_event(s)).collect::<Result<_, _>>()?
                    };
                    let p = three_channel_event_series(&events, e.samples, e.noise, e.seed)
                        .map_err(Failure::compute)?;
                    let mut art = Artifact::new("gen events");
                    art.seed = Some(e.seed);
                    art.resolved = json!({ "events": events });
                    (art, p)
                }
            };
            write_to(out, gen_csv(&art, cli, &path)?.as_bytes())
        }
    }
}
