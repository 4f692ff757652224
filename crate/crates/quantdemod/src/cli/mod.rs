//! Command-line front end. Every computation in the library is exposed as
//! a subcommand that writes machine-readable CSV (with a `#` manifest
//! comment block) or a JSON mirror, suitable for diffing and plotting.
//!
//! Reproducibility: identical arguments produce byte-identical CSV.
//! Optimization outputs are rounded to 12 significant digits before
//! writing; raw per-sample demodulator outputs are written at full
//! round-trip precision. A manifest sidecar (with the only timestamp)
//! accompanies `--out` files.

use crate::channel::{
    induce_discrete, mutual_information_discrete, GaussianChannel, PamConstellation,
    QuantizerScheme,
};
use crate::error::{QuantError, Result};
use crate::numerics::QuadratureRule;
use crate::psk8::{
    exact_llr, fast_llr_decompose, gcr_bit_metrics, maxlog_llr, BitMetricVector, GcrBranch,
};
use crate::sim::{Demapper, SimConfig};
use crate::{matched, mismatched};
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use sha2::{Digest, Sha256};
use std::fmt::Write as _;
use std::io::Read;
use std::path::{Path, PathBuf};

#[derive(Parser, Debug)]
#[command(
    name = "quantdemod",
    version,
    about = "Capacity-optimal channel-output quantizers and 8PSK bit-metric demodulators"
)]
pub struct Cli {
    /// Write CSV here instead of stdout (a .manifest.json sidecar is
    /// written next to it).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Also emit a JSON mirror of the rows (to stdout, or to <out>.json).
    #[arg(long, global = true)]
    pub json: bool,
    /// Base random seed for anything stochastic.
    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,
    /// Gauss-Hermite node count for capacity integrals.
    #[arg(long, global = true, default_value_t = 129)]
    pub quad_nodes: usize,
    /// Convergence tolerance for iterative optimizations.
    #[arg(long, global = true, default_value_t = 1e-8)]
    pub tol: f64,
    #[command(subcommand)]
    pub cmd: Cmd,
}

#[derive(Subcommand, Debug)]
pub enum Cmd {
    /// Quantizer thresholds for one design point.
    Thresholds(ThresholdsArgs),
    /// Thresholds, capacity/GMI and relative loss over an SNR grid.
    Sweep(SweepArgs),
    /// High-rate (large-N) capacity-loss estimates.
    Loss(LossArgs),
    /// Batch 8PSK bit-metric demodulation of complex samples.
    Demod(DemodArgs),
    /// Monte-Carlo coded-link simulation.
    Simulate(SimulateArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum DesignMode {
    /// Alternating optimization of the matched-decoding capacity.
    MatchedIterative,
    /// Vanishing-SNR (Lloyd-Max) thresholds; SNR-independent.
    MatchedSmallSnr,
    /// Large-SNR closed form (binary input, 3 outputs).
    MatchedLargeSnr,
    /// GMI-optimal thresholds and tilt for a fixed metric alphabet.
    Mismatched,
    /// Vanishing-SNR mismatched design; thresholds scale with 1/g.
    MismatchedSmallSnr,
}

impl DesignMode {
    fn as_str(self) -> &'static str {
        match self {
            DesignMode::MatchedIterative => "matched-iterative",
            DesignMode::MatchedSmallSnr => "matched-small-snr",
            DesignMode::MatchedLargeSnr => "matched-large-snr",
            DesignMode::Mismatched => "mismatched",
            DesignMode::MismatchedSmallSnr => "mismatched-small-snr",
        }
    }
}

#[derive(Args, Debug)]
pub struct ThresholdsArgs {
    #[arg(long, value_enum, required_unless_present_any = ["table1", "table2"])]
    pub mode: Option<DesignMode>,
    /// Quantizer output count (mismatched modes: odd, 2K+1 cells).
    #[arg(long)]
    pub n: Option<usize>,
    /// Channel SNR g^2 in dB (modes that depend on the gain).
    #[arg(long, allow_hyphen_values = true)]
    pub snr_db: Option<f64>,
    /// Custom positive metric levels for mismatched modes, e.g. "1,2,4".
    #[arg(long, value_delimiter = ',')]
    pub metrics: Option<Vec<f64>>,
    /// Emit the full vanishing-SNR matched threshold table (N = 3..12).
    #[arg(long)]
    pub table1: bool,
    /// Emit the largest vanishing-SNR mismatched thresholds
    /// (integer metrics, N = 3..37 odd).
    #[arg(long)]
    pub table2: bool,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    #[arg(long, value_enum)]
    pub mode: DesignMode,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    pub metrics: Option<Vec<f64>>,
    #[arg(long, allow_hyphen_values = true)]
    pub snr_from: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub snr_to: f64,
    #[arg(long, default_value_t = 21)]
    pub points: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum LossMode {
    Matched,
    Mismatched,
}

#[derive(Args, Debug)]
pub struct LossArgs {
    #[arg(long, value_enum, default_value_t = LossMode::Matched)]
    pub mode: LossMode,
    /// Output counts, e.g. "8,16,32".
    #[arg(long, value_delimiter = ',', required = true)]
    pub n: Vec<usize>,
    #[arg(long, allow_hyphen_values = true, default_value_t = -20.0)]
    pub snr_db: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum DemapperArg {
    Exact,
    Maxlog,
    Gcr,
    Fast,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum GcrBranchArg {
    Signed,
    Magnitude,
}

#[derive(Args, Debug)]
pub struct DemodArgs {
    /// CSV of complex samples, one "re,im" per line ("-" for stdin).
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum)]
    pub demapper: DemapperArg,
    /// Channel amplitude g (the LLRs absorb it).
    #[arg(long, default_value_t = 1.0)]
    pub gain: f64,
    /// Which comparison the GCR correction branches on.
    #[arg(long, value_enum, default_value_t = GcrBranchArg::Signed)]
    pub gcr_branch: GcrBranchArg,
    /// Positive proportionality constant applied to all metrics.
    #[arg(long, default_value_t = 1.0)]
    pub scale: f64,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    /// JSON simulation config (object or array); overrides the flags.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// One or more SNR points in dB, e.g. "4,5,6".
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub snr_db: Option<Vec<f64>>,
    #[arg(long, default_value_t = 100)]
    pub frames: u64,
    #[arg(long, default_value_t = 1500)]
    pub frame_bits: usize,
    #[arg(long, value_enum, default_value_t = DemapperArg::Maxlog)]
    pub demapper: DemapperArg,
}

/// Round to 12 significant digits; fixed width keeps reruns byte-equal.
fn fmt_sig(x: f64) -> String {
    format!("{x:.11e}")
}

/// Full round-trip precision (per-sample outputs, echoed inputs).
fn fmt_exact(x: f64) -> String {
    format!("{x}")
}

struct Document {
    columns: &'static [&'static str],
    rows: Vec<Vec<String>>,
    command: String,
    seed: u64,
    config_hash: String,
    notes: Vec<String>,
}

impl Document {
    fn new(columns: &'static [&'static str], seed: u64, extra_config: &[u8]) -> Self {
        let argv: Vec<String> = std::env::args().collect();
        let mut hasher = Sha256::new();
        hasher.update(argv.join("\x1f").as_bytes());
        hasher.update(extra_config);
        let config_hash = hex_digest(hasher);
        Self {
            columns,
            rows: Vec::new(),
            command: argv.join(" "),
            seed,
            config_hash,
            notes: Vec::new(),
        }
    }

    fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    fn csv(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# command: {}", self.command);
        let _ = writeln!(s, "# version: {}", env!("CARGO_PKG_VERSION"));
        let _ = writeln!(s, "# seed: {}", self.seed);
        let _ = writeln!(s, "# config_hash: {}", self.config_hash);
        for note in &self.notes {
            let _ = writeln!(s, "# {note}");
        }
        let _ = writeln!(s, "{}", self.columns.join(","));
        for row in &self.rows {
            let _ = writeln!(s, "{}", row.join(","));
        }
        s
    }

    fn json(&self) -> String {
        let rows: Vec<serde_json::Value> = self
            .rows
            .iter()
            .map(|row| {
                let obj: serde_json::Map<String, serde_json::Value> = self
                    .columns
                    .iter()
                    .zip(row)
                    .map(|(&c, v)| (c.to_string(), serde_json::Value::String(v.clone())))
                    .collect();
                serde_json::Value::Object(obj)
            })
            .collect();
        let doc = serde_json::json!({
            "command": self.command,
            "version": env!("CARGO_PKG_VERSION"),
            "seed": self.seed,
            "config_hash": self.config_hash,
            "rows": rows,
        });
        serde_json::to_string_pretty(&doc).expect("string-valued JSON cannot fail")
    }

    /// Writes CSV (stdout or --out), the optional JSON mirror, and the
    /// manifest sidecar for file outputs.
    fn emit(&self, out: Option<&Path>, json: bool) -> Result<()> {
        match out {
            None => {
                if json {
                    print!("{}", self.json());
                } else {
                    print!("{}", self.csv());
                }
            }
            Some(path) => {
                std::fs::write(path, self.csv())?;
                let mut outputs = vec![path.display().to_string()];
                if json {
                    let jpath = path.with_extension("json");
                    std::fs::write(&jpath, self.json())?;
                    outputs.push(jpath.display().to_string());
                }
                let timestamp = std::time::SystemTime::now()
                    .duration_since(std::time::UNIX_EPOCH)
                    .map(|d| d.as_secs())
                    .unwrap_or(0);
                let manifest = serde_json::json!({
                    "command": self.command,
                    "version": env!("CARGO_PKG_VERSION"),
                    "seed": self.seed,
                    "config_hash": self.config_hash,
                    "timestamp_unix": timestamp,
                    "outputs": outputs,
                });
                let mpath = manifest_path(path);
                std::fs::write(
                    mpath,
                    serde_json::to_string_pretty(&manifest).expect("JSON literals"),
                )?;
            }
        }
        Ok(())
    }
}

pub fn manifest_path(out: &Path) -> PathBuf {
    let mut name = out.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".manifest.json");
    out.with_file_name(name)
}

fn hex_digest(hasher: Sha256) -> String {
    hasher.finalize().iter().fold(String::new(), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

/// Entry point for the binary: parses args, honors QUANTDEMOD_THREADS,
/// and maps errors to a nonzero exit code.
pub fn run() -> i32 {
    if let Ok(v) = std::env::var("QUANTDEMOD_THREADS") {
        match v.parse::<usize>() {
            Ok(threads) if threads >= 1 => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
            }
            _ => {
                eprintln!("error: QUANTDEMOD_THREADS={v} is not a positive thread count");
                return 1;
            }
        }
    }
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn dispatch(cli: &Cli) -> Result<()> {
    let quad = QuadratureRule::gauss_hermite(cli.quad_nodes)?;
    if !(cli.tol > 0.0) {
        return Err(QuantError::InvalidConfig(format!(
            "tolerance {} must be positive",
            cli.tol
        )));
    }
    match &cli.cmd {
        Cmd::Thresholds(args) => cmd_thresholds(cli, args, &quad),
        Cmd::Sweep(args) => cmd_sweep(cli, args, &quad),
        Cmd::Loss(args) => cmd_loss(cli, args),
        Cmd::Demod(args) => cmd_demod(cli, args),
        Cmd::Simulate(args) => cmd_simulate(cli, args),
    }
}

fn metric_assignment(
    n: Option<usize>,
    metrics: &Option<Vec<f64>>,
) -> Result<mismatched::MetricAssignment> {
    match (metrics, n) {
        (Some(values), _) => mismatched::MetricAssignment::new(values.clone()),
        (None, Some(n)) => {
            if n < 3 || n % 2 == 0 {
                return Err(QuantError::InvalidConfig(format!(
                    "mismatched designs need an odd output count of at least 3, got {n}"
                )));
            }
            mismatched::MetricAssignment::integer((n - 1) / 2)
        }
        (None, None) => Err(QuantError::InvalidConfig(
            "specify --n (odd cell count) or --metrics for mismatched modes".into(),
        )),
    }
}

fn require<T: Copy>(v: Option<T>, what: &str) -> Result<T> {
    v.ok_or_else(|| QuantError::InvalidConfig(format!("{what} is required for this mode")))
}

const THRESHOLD_COLUMNS: &[&str] =
    &["mode", "n", "snr_db", "i", "threshold", "alpha", "capacity_bits", "relative_loss"];

fn threshold_row(
    mode: DesignMode,
    n: usize,
    snr_db: Option<f64>,
    i: usize,
    threshold: f64,
    alpha: Option<f64>,
    capacity_bits: Option<f64>,
    relative_loss: Option<f64>,
) -> Vec<String> {
    let opt = |v: Option<f64>| v.map(fmt_sig).unwrap_or_default();
    vec![
        mode.as_str().to_string(),
        n.to_string(),
        snr_db.map(fmt_exact).unwrap_or_default(),
        i.to_string(),
        fmt_sig(threshold),
        opt(alpha),
        opt(capacity_bits),
        opt(relative_loss),
    ]
}

fn cmd_thresholds(cli: &Cli, args: &ThresholdsArgs, quad: &QuadratureRule) -> Result<()> {
    let mut doc = Document::new(THRESHOLD_COLUMNS, cli.seed, &[]);
    doc.notes.push(
        "alpha column: metric tilt (mismatched); alpha/gain for mismatched-small-snr".into(),
    );
    if args.table1 {
        for n in 3..=12 {
            for (i, b) in matched::small_snr_thresholds(n)?.iter().enumerate() {
                doc.push(threshold_row(
                    DesignMode::MatchedSmallSnr,
                    n,
                    None,
                    i,
                    *b,
                    None,
                    None,
                    None,
                ));
            }
        }
    }
    if args.table2 {
        for n in (3..=37).step_by(2) {
            let k = (n - 1) / 2;
            let design =
                mismatched::small_snr_mismatched(&mismatched::MetricAssignment::integer(k)?)?;
            doc.push(threshold_row(
                DesignMode::MismatchedSmallSnr,
                n,
                None,
                k - 1,
                *design.thresholds.last().expect("k >= 1"),
                Some(design.alpha_over_gain),
                None,
                None,
            ));
        }
    }
    if let Some(mode) = args.mode {
        append_design_rows(&mut doc, mode, args.n, &args.metrics, args.snr_db, cli, quad)?;
    }
    doc.emit(cli.out.as_deref(), cli.json)
}

/// Computes one design point and appends its threshold rows.
fn append_design_rows(
    doc: &mut Document,
    mode: DesignMode,
    n_arg: Option<usize>,
    metrics: &Option<Vec<f64>>,
    snr_db: Option<f64>,
    cli: &Cli,
    quad: &QuadratureRule,
) -> Result<()> {
    let two_pam = PamConstellation::two_pam();
    match mode {
        DesignMode::MatchedSmallSnr => {
            let n = require(n_arg, "--n")?;
            for (i, b) in matched::small_snr_thresholds(n)?.iter().enumerate() {
                doc.push(threshold_row(mode, n, None, i, *b, None, None, None));
            }
        }
        DesignMode::MatchedLargeSnr => {
            let n = require(n_arg, "--n")?;
            if n != 3 {
                return Err(QuantError::InvalidConfig(
                    "the large-SNR closed form is for --n 3".into(),
                ));
            }
            let snr = require(snr_db, "--snr-db")?;
            let ch = GaussianChannel::from_snr_db(snr);
            let b = matched::large_snr_threshold_2pam3(ch.gain());
            doc.push(threshold_row(mode, n, Some(snr), 0, b, None, None, None));
        }
        DesignMode::MatchedIterative => {
            let n = require(n_arg, "--n")?;
            let snr = require(snr_db, "--snr-db")?;
            let ch = GaussianChannel::from_snr_db(snr);
            let res = matched::optimize_thresholds_iterative(&ch, &two_pam, n, None, cli.tol, 10_000)?;
            let cap_bits = res.capacity_nats / std::f64::consts::LN_2;
            let loss = matched::relative_loss_with_rule(&ch, &two_pam, &res.scheme, quad);
            for (i, b) in res.scheme.thresholds().iter().enumerate() {
                doc.push(threshold_row(
                    mode,
                    n,
                    Some(snr),
                    i,
                    *b,
                    None,
                    Some(cap_bits),
                    Some(loss),
                ));
            }
        }
        DesignMode::Mismatched => {
            let snr = require(snr_db, "--snr-db")?;
            let ma = metric_assignment(n_arg, metrics)?;
            let n = 2 * ma.k() + 1;
            let ch = GaussianChannel::from_snr_db(snr);
            let res = mismatched::optimize_mismatched(&ch, &two_pam, &ma)?;
            let cap_bits = res.gmi_nats / std::f64::consts::LN_2;
            for (i, b) in res.scheme.positive_thresholds().iter().enumerate() {
                doc.push(threshold_row(
                    mode,
                    n,
                    Some(snr),
                    i,
                    *b,
                    Some(res.alpha),
                    Some(cap_bits),
                    Some(res.relative_loss),
                ));
            }
        }
        DesignMode::MismatchedSmallSnr => {
            let ma = metric_assignment(n_arg, metrics)?;
            let n = 2 * ma.k() + 1;
            let design = mismatched::small_snr_mismatched(&ma)?;
            for (i, b) in design.thresholds.iter().enumerate() {
                doc.push(threshold_row(
                    mode,
                    n,
                    None,
                    i,
                    *b,
                    Some(design.alpha_over_gain),
                    None,
                    None,
                ));
            }
        }
    }
    Ok(())
}

const SWEEP_COLUMNS: &[&str] =
    &["mode", "n", "snr_db", "alpha", "capacity_bits", "relative_loss", "thresholds"];

fn cmd_sweep(cli: &Cli, args: &SweepArgs, quad: &QuadratureRule) -> Result<()> {
    if args.points == 0 {
        return Err(QuantError::InvalidConfig("--points must be at least 1".into()));
    }
    if args.points > 1 && args.snr_to < args.snr_from {
        return Err(QuantError::InvalidConfig(format!(
            "empty grid: --snr-to {} below --snr-from {}",
            args.snr_to, args.snr_from
        )));
    }
    let grid: Vec<f64> = (0..args.points)
        .map(|i| {
            if args.points == 1 {
                args.snr_from
            } else {
                args.snr_from
                    + i as f64 * (args.snr_to - args.snr_from) / (args.points - 1) as f64
            }
        })
        .collect();
    let two_pam = PamConstellation::two_pam();
    // Loss conventions per mode: optimizing modes report loss against the
    // unquantized channel; fixed (vanishing-SNR) schemes report loss
    // against the optimizing design at the same SNR.
    use rayon::prelude::*;
    let rows: Vec<Result<Vec<String>>> = grid
        .par_iter()
        .map(|&snr| -> Result<Vec<String>> {
            let ch = GaussianChannel::from_snr_db(snr);
            let (n, alpha, cap_nats, loss, positive): (
                usize,
                Option<f64>,
                f64,
                f64,
                Vec<f64>,
            ) = match args.mode {
                DesignMode::MatchedIterative => {
                    let n = require(args.n, "--n")?;
                    let res = matched::optimize_thresholds_iterative(
                        &ch, &two_pam, n, None, cli.tol, 10_000,
                    )?;
                    let loss =
                        matched::relative_loss_with_rule(&ch, &two_pam, &res.scheme, quad);
                    (n, None, res.capacity_nats, loss, res.scheme.thresholds().to_vec())
                }
                DesignMode::MatchedSmallSnr => {
                    let n = require(args.n, "--n")?;
                    let scheme = matched::small_snr_scheme(n)?;
                    let fixed =
                        mutual_information_discrete(&induce_discrete(&ch, &two_pam, &scheme));
                    let best = matched::optimize_thresholds_iterative(
                        &ch, &two_pam, n, None, cli.tol, 10_000,
                    )?;
                    let loss = (1.0 - fixed / best.capacity_nats).clamp(0.0, 1.0);
                    (n, None, fixed, loss, scheme.thresholds().to_vec())
                }
                DesignMode::MatchedLargeSnr => {
                    let n = require(args.n, "--n")?;
                    if n != 3 {
                        return Err(QuantError::InvalidConfig(
                            "the large-SNR closed form is for --n 3".into(),
                        ));
                    }
                    let b = matched::large_snr_threshold_2pam3(ch.gain());
                    let scheme = QuantizerScheme::with_index_metrics(vec![-b, b])?;
                    let fixed =
                        mutual_information_discrete(&induce_discrete(&ch, &two_pam, &scheme));
                    let best = matched::optimize_thresholds_iterative(
                        &ch, &two_pam, n, None, cli.tol, 10_000,
                    )?;
                    let loss = (1.0 - fixed / best.capacity_nats).clamp(0.0, 1.0);
                    (n, None, fixed, loss, scheme.thresholds().to_vec())
                }
                DesignMode::Mismatched => {
                    let ma = metric_assignment(args.n, &args.metrics)?;
                    let res = mismatched::optimize_mismatched(&ch, &two_pam, &ma)?;
                    (
                        2 * ma.k() + 1,
                        Some(res.alpha),
                        res.gmi_nats,
                        res.relative_loss,
                        res.scheme.positive_thresholds(),
                    )
                }
                DesignMode::MismatchedSmallSnr => {
                    let ma = metric_assignment(args.n, &args.metrics)?;
                    let design = mismatched::small_snr_mismatched(&ma)?;
                    // No zero threshold: the middle cell spans (-b0, b0).
                    let scheme = QuantizerScheme::symmetric_from_positive(
                        &design.thresholds,
                        false,
                    )?;
                    let dc = induce_discrete(&ch, &two_pam, &scheme);
                    let full = ma.full();
                    let (alpha, gmi) = mismatched::gmi_max_alpha(&dc, &full)?;
                    let best = mismatched::optimize_mismatched(&ch, &two_pam, &ma)?;
                    let loss = (1.0 - gmi / best.gmi_nats).clamp(0.0, 1.0);
                    (2 * ma.k() + 1, Some(alpha), gmi, loss, design.thresholds.clone())
                }
            };
            let thresholds =
                positive.iter().map(|&b| fmt_sig(b)).collect::<Vec<_>>().join(";");
            Ok(vec![
                args.mode.as_str().to_string(),
                n.to_string(),
                fmt_sig(snr),
                alpha.map(fmt_sig).unwrap_or_default(),
                fmt_sig(cap_nats / std::f64::consts::LN_2),
                fmt_sig(loss),
                thresholds,
            ])
        })
        .collect();
    let mut doc = Document::new(SWEEP_COLUMNS, cli.seed, &[]);
    doc.notes.push(
        "relative_loss: vs unquantized capacity (optimizing modes) or vs the optimizing design (fixed schemes)".into(),
    );
    let mut first_err: Option<QuantError> = None;
    for r in rows {
        match r {
            Ok(row) => doc.push(row),
            Err(e) => {
                if first_err.is_none() {
                    first_err = Some(e);
                }
            }
        }
    }
    doc.emit(cli.out.as_deref(), cli.json)?;
    match first_err {
        None => Ok(()),
        Some(e) => Err(e),
    }
}

const LOSS_COLUMNS: &[&str] = &["mode", "n", "snr_db", "loss", "small_gain_limit"];

fn cmd_loss(cli: &Cli, args: &LossArgs) -> Result<()> {
    let ch = GaussianChannel::from_snr_db(args.snr_db);
    let two_pam = PamConstellation::two_pam();
    let mut doc = Document::new(LOSS_COLUMNS, cli.seed, &[]);
    doc.notes.push(
        "loss: matched = capacity loss in nats; mismatched = relative GMI loss".into(),
    );
    doc.notes
        .push("small_gain_limit: sqrt(3) pi / (2 N^2), the matched relative-loss limit".into());
    let mut ns = args.n.clone();
    ns.sort_unstable();
    ns.dedup();
    for &n in &ns {
        let loss = match args.mode {
            LossMode::Matched => matched::high_rate_loss(&ch, &two_pam, n)?,
            LossMode::Mismatched => mismatched::high_rate_mismatched_loss(&ch, n)?,
        };
        let limit = 3f64.sqrt() * std::f64::consts::PI / (2.0 * (n * n) as f64);
        let mode = match args.mode {
            LossMode::Matched => "matched",
            LossMode::Mismatched => "mismatched",
        };
        doc.push(vec![
            mode.to_string(),
            n.to_string(),
            fmt_exact(args.snr_db),
            fmt_sig(loss),
            fmt_sig(limit),
        ]);
    }
    doc.emit(cli.out.as_deref(), cli.json)
}

const DEMOD_COLUMNS: &[&str] = &["q1", "q2", "q3"];

fn cmd_demod(cli: &Cli, args: &DemodArgs) -> Result<()> {
    if !(args.scale > 0.0) {
        return Err(QuantError::InvalidParameter(format!(
            "--scale {} must be positive",
            args.scale
        )));
    }
    if !(args.gain > 0.0) {
        return Err(QuantError::InvalidParameter(format!(
            "--gain {} must be positive",
            args.gain
        )));
    }
    let raw = if args.input.as_os_str() == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s)?;
        s
    } else {
        std::fs::read_to_string(&args.input).map_err(|e| {
            QuantError::InvalidConfig(format!("{}: {e}", args.input.display()))
        })?
    };
    let branch = match args.gcr_branch {
        GcrBranchArg::Signed => GcrBranch::SignedLlr,
        GcrBranchArg::Magnitude => GcrBranch::Magnitude,
    };
    let g = args.gain;
    let a = args.scale;
    let demap = |y: Complex64| -> BitMetricVector {
        let v = match args.demapper {
            DemapperArg::Exact => exact_llr(y, g),
            DemapperArg::Maxlog => maxlog_llr(y, g),
            DemapperArg::Fast => fast_llr_decompose(y, g),
            DemapperArg::Gcr => gcr_bit_metrics(&maxlog_llr(y, g), branch),
        };
        v.scale(a)
    };
    let mut doc = Document::new(DEMOD_COLUMNS, cli.seed, &[]);
    for (lineno, line) in raw.lines().enumerate() {
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') || t == "re,im" {
            continue;
        }
        let mut parts = t.split(',');
        let parse = |s: Option<&str>| -> Result<f64> {
            s.and_then(|v| v.trim().parse::<f64>().ok()).ok_or_else(|| {
                QuantError::InvalidConfig(format!(
                    "line {}: expected \"re,im\", got {t:?}",
                    lineno + 1
                ))
            })
        };
        let re = parse(parts.next())?;
        let im = parse(parts.next())?;
        if parts.next().is_some() {
            return Err(QuantError::InvalidConfig(format!(
                "line {}: expected exactly two fields, got {t:?}",
                lineno + 1
            )));
        }
        let q = demap(Complex64::new(re, im));
        doc.push(vec![fmt_exact(q.q1), fmt_exact(q.q2), fmt_exact(q.q3)]);
    }
    doc.emit(cli.out.as_deref(), cli.json)
}

const SIM_COLUMNS: &[&str] =
    &["snr_db", "demapper", "bits", "bit_errors", "ber", "fer", "ci_lo", "ci_hi"];

fn cmd_simulate(cli: &Cli, args: &SimulateArgs) -> Result<()> {
    let mut config_bytes = Vec::new();
    let cfgs: Vec<SimConfig> = if let Some(path) = &args.config {
        config_bytes = std::fs::read(path)
            .map_err(|e| QuantError::InvalidConfig(format!("{}: {e}", path.display())))?;
        // Accept a single object or an array of them.
        match serde_json::from_slice::<Vec<SimConfig>>(&config_bytes) {
            Ok(v) => v,
            Err(_) => vec![serde_json::from_slice::<SimConfig>(&config_bytes)
                .map_err(|e| QuantError::InvalidConfig(format!("config {path:?}: {e}")))?],
        }
    } else {
        let demapper = match args.demapper {
            DemapperArg::Exact => Demapper::Exact,
            DemapperArg::Maxlog => Demapper::MaxLog,
            DemapperArg::Gcr => Demapper::Gcr,
            DemapperArg::Fast => Demapper::Fast,
        };
        let snrs = args.snr_db.clone().unwrap_or_else(|| vec![6.0]);
        snrs.iter()
            .enumerate()
            .map(|(i, &snr)| {
                SimConfig::new(snr, args.frames, cli.seed + i as u64, demapper)
                    .with_frame_bits(args.frame_bits)
            })
            .collect()
    };
    if cfgs.is_empty() {
        return Err(QuantError::InvalidConfig("no simulation points".into()));
    }
    let results = crate::sim::sweep(&cfgs);
    let mut doc = Document::new(SIM_COLUMNS, cli.seed, &config_bytes);
    let mut first_err: Option<QuantError> = None;
    for (cfg, res) in cfgs.iter().zip(results) {
        match res {
            Ok(r) => doc.push(vec![
                fmt_exact(cfg.snr_db),
                cfg.demapper.to_string(),
                r.bits.to_string(),
                r.bit_errors.to_string(),
                fmt_sig(r.ber),
                fmt_sig(r.fer),
                fmt_sig(r.wilson_ci95.lo),
                fmt_sig(r.wilson_ci95.hi),
            ]),
            Err(e) => {
                eprintln!("error: snr {} dB: {e}", cfg.snr_db);
                if first_err.is_none() {
                    first_err = Some(e);
                }
            }
        }
    }
    doc.emit(cli.out.as_deref(), cli.json)?;
    match first_err {
        None => Ok(()),
        Some(e) => Err(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_digit_formatting_is_stable() {
        assert_eq!(fmt_sig(0.61200318096), "6.12003180960e-1");
        assert_eq!(fmt_sig(-1.0), "-1.00000000000e0");
        assert_eq!(fmt_sig(0.0), "0.00000000000e0");
        // Exact echo keeps round-trip precision.
        assert_eq!(fmt_exact(0.1 + 0.2), "0.30000000000000004");
    }

    #[test]
    fn manifest_path_appends_suffix() {
        assert_eq!(
            manifest_path(Path::new("/tmp/x/run.csv")),
            Path::new("/tmp/x/run.csv.manifest.json")
        );
    }

    #[test]
    fn metric_assignment_argument_rules() {
        assert!(metric_assignment(Some(4), &None).is_err());
        assert!(metric_assignment(Some(2), &None).is_err());
        assert!(metric_assignment(None, &None).is_err());
        let ma = metric_assignment(Some(7), &None).unwrap();
        assert_eq!(ma.values(), &[1.0, 2.0, 3.0]);
        let ma = metric_assignment(Some(7), &Some(vec![1.0, 2.5])).unwrap();
        assert_eq!(ma.values(), &[1.0, 2.5]);
    }

    #[test]
    fn cli_parses_representative_invocations() {
        use clap::Parser;
        let cli = Cli::parse_from([
            "quantdemod",
            "thresholds",
            "--mode",
            "matched-small-snr",
            "--n",
            "5",
        ]);
        match &cli.cmd {
            Cmd::Thresholds(a) => {
                assert_eq!(a.mode, Some(DesignMode::MatchedSmallSnr));
                assert_eq!(a.n, Some(5));
            }
            _ => panic!("wrong subcommand"),
        }
        let cli = Cli::parse_from([
            "quantdemod",
            "--seed",
            "7",
            "simulate",
            "--snr-db",
            "-2,4",
            "--frames",
            "3",
        ]);
        assert_eq!(cli.seed, 7);
        match &cli.cmd {
            Cmd::Simulate(a) => assert_eq!(a.snr_db, Some(vec![-2.0, 4.0])),
            _ => panic!("wrong subcommand"),
        }
        assert!(Cli::try_parse_from(["quantdemod", "thresholds"]).is_err());
        assert!(Cli::try_parse_from(["quantdemod", "thresholds", "--table2"]).is_ok());
    }
}
