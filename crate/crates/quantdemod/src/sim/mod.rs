//! Monte-Carlo AWGN link: random bits, rate-1/2 convolutional encoding,
//! block interleaving, Gray-labeled 8PSK, circular complex noise, a
//! pluggable bit-metric demapper, and soft Viterbi decoding.
//!
//! Reproducibility contract: every random draw comes from a counter-based
//! generator (ChaCha12) seeded with the config seed; frame f uses stream
//! 2f for its data bits and stream 2f + 1 for its noise, so frames can be
//! simulated concurrently in any order.

pub mod conv;
pub mod interleave;

use crate::error::{QuantError, Result};
use crate::psk8::{
    exact_llr, fast_llr_decompose, gcr_bit_metrics, maxlog_llr, BitMetricVector, GcrBranch,
    Psk8Constellation,
};
use num_complex::Complex64;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use conv::ConvCode;
pub use interleave::BlockInterleaver;

/// Bit-metric demapper fed to the Viterbi stage.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Demapper {
    Exact,
    MaxLog,
    Gcr,
    Fast,
}

impl std::fmt::Display for Demapper {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Demapper::Exact => "exact",
            Demapper::MaxLog => "maxlog",
            Demapper::Gcr => "gcr",
            Demapper::Fast => "fast",
        };
        f.write_str(s)
    }
}

/// Convolutional code description: octal generator numerals plus the
/// constraint length.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeSpec {
    pub generators_octal: [String; 2],
    pub constraint_length: u32,
}

impl Default for CodeSpec {
    fn default() -> Self {
        Self { generators_octal: ["133".into(), "171".into()], constraint_length: 7 }
    }
}

impl CodeSpec {
    pub fn build(&self) -> Result<ConvCode> {
        ConvCode::new(
            [self.generators_octal[0].as_str(), self.generators_octal[1].as_str()],
            self.constraint_length,
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InterleaverSpec {
    pub rows: usize,
    pub cols: usize,
}

/// One simulation point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub snr_db: f64,
    pub frames: u64,
    pub frame_bits: usize,
    pub seed: u64,
    pub demapper: Demapper,
    pub code: CodeSpec,
    pub interleaver: InterleaverSpec,
}

impl SimConfig {
    /// Standard point: 1500 info bits per frame, the constraint-length-7
    /// 133/171 code, and a near-square interleaver for the coded block.
    pub fn new(snr_db: f64, frames: u64, seed: u64, demapper: Demapper) -> Self {
        let frame_bits = 1500;
        let code = CodeSpec::default();
        let coded = 2 * (frame_bits + (code.constraint_length - 1) as usize);
        let (rows, cols) = near_square_dims(coded);
        Self {
            snr_db,
            frames,
            frame_bits,
            seed,
            demapper,
            code,
            interleaver: InterleaverSpec { rows, cols },
        }
    }

    /// Same, with a chosen frame length (which must keep the coded block
    /// a whole number of 3-bit symbols).
    pub fn with_frame_bits(mut self, frame_bits: usize) -> Self {
        self.frame_bits = frame_bits;
        let coded = 2 * (frame_bits + (self.code.constraint_length - 1) as usize);
        let (rows, cols) = near_square_dims(coded);
        self.interleaver = InterleaverSpec { rows, cols };
        self
    }

    /// Checks cross-field invariants and builds the code and interleaver.
    pub fn validate(&self) -> Result<(ConvCode, BlockInterleaver)> {
        if self.frames == 0 {
            return Err(QuantError::InvalidConfig("frames must be at least 1".into()));
        }
        if self.frame_bits == 0 {
            return Err(QuantError::InvalidConfig("frame_bits must be at least 1".into()));
        }
        let code = self.code.build()?;
        let coded = code.coded_len(self.frame_bits);
        if coded % 3 != 0 {
            return Err(QuantError::InvalidConfig(format!(
                "coded block of {coded} bits does not fill whole 3-bit symbols"
            )));
        }
        let il = BlockInterleaver::new(self.interleaver.rows, self.interleaver.cols)?;
        if il.len() != coded {
            return Err(QuantError::InvalidConfig(format!(
                "{}x{} interleaver does not match the {coded}-bit coded block",
                self.interleaver.rows, self.interleaver.cols
            )));
        }
        Ok((code, il))
    }
}

/// Divisor pair (rows, cols) with rows the largest divisor at most sqrt(n).
fn near_square_dims(n: usize) -> (usize, usize) {
    let mut rows = 1;
    let mut d = 1;
    while d * d <= n {
        if n % d == 0 {
            rows = d;
        }
        d += 1;
    }
    (rows, n / rows)
}

/// Two-sided 95% Wilson score interval for a binomial proportion.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

pub fn wilson_ci95(successes: u64, trials: u64) -> Interval {
    if trials == 0 {
        return Interval { lo: 0.0, hi: 1.0 };
    }
    let z = 1.959963984540054f64;
    let n = trials as f64;
    let p = successes as f64 / n;
    let denom = 1.0 + z * z / n;
    let center = (p + z * z / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z * z / (4.0 * n * n)).sqrt() / denom;
    // At the boundaries center -+ half cancels to 0 or 1 exactly in
    // algebra; snap so rounding residue cannot leak outside [0, 1].
    let lo = if successes == 0 { 0.0 } else { (center - half).max(0.0) };
    let hi = if successes == trials { 1.0 } else { (center + half).min(1.0) };
    Interval { lo, hi }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    pub bit_errors: u64,
    pub frame_errors: u64,
    pub bits: u64,
    pub frames: u64,
    pub ber: f64,
    pub fer: f64,
    pub wilson_ci95: Interval,
}

fn symbol_for(coded: &[u8]) -> Complex64 {
    let c = Psk8Constellation::new();
    c.point(c.index_of_label([coded[0], coded[1], coded[2]]))
}

/// Amplitude g giving Es/N0 = snr_db with unit-energy symbols and
/// unit-variance noise per component, so g * dot(y, x) is the true
/// log-likelihood exponent.
pub fn amplitude_for_snr_db(snr_db: f64) -> f64 {
    (2.0 * 10f64.powf(snr_db / 10.0)).sqrt()
}

/// Runs the link with an arbitrary per-symbol metric function. `demap`
/// receives the channel output and the amplitude g and returns the three
/// per-bit credits for that symbol.
pub fn run_sim_with<F>(cfg: &SimConfig, demap: F) -> Result<SimResult>
where
    F: Fn(Complex64, f64) -> BitMetricVector + Sync,
{
    let (code, il) = cfg.validate()?;
    let g = amplitude_for_snr_db(cfg.snr_db);
    let per_frame: Vec<(u64, bool)> = (0..cfg.frames)
        .into_par_iter()
        .map(|f| -> Result<(u64, bool)> {
            let mut bit_rng = ChaCha12Rng::seed_from_u64(cfg.seed);
            bit_rng.set_stream(2 * f);
            let info: Vec<u8> =
                (0..cfg.frame_bits).map(|_| u8::from(bit_rng.random::<bool>())).collect();
            let coded = il.permute(&code.encode(&info))?;
            let mut noise_rng = ChaCha12Rng::seed_from_u64(cfg.seed);
            noise_rng.set_stream(2 * f + 1);
            let mut metrics = Vec::with_capacity(coded.len());
            for chunk in coded.chunks_exact(3) {
                let x = symbol_for(chunk);
                let w = Complex64::new(
                    noise_rng.sample::<f64, _>(StandardNormal),
                    noise_rng.sample::<f64, _>(StandardNormal),
                );
                let q = demap(g * x + w, g);
                metrics.extend_from_slice(&q.as_array());
            }
            let decoded = code.viterbi(&il.unpermute(&metrics)?, cfg.frame_bits)?;
            let errors =
                info.iter().zip(&decoded).map(|(a, b)| u64::from(a != b)).sum::<u64>();
            Ok((errors, errors > 0))
        })
        .collect::<Result<_>>()?;
    let bit_errors: u64 = per_frame.iter().map(|r| r.0).sum();
    let frame_errors: u64 = per_frame.iter().map(|r| u64::from(r.1)).sum();
    let bits = cfg.frames * cfg.frame_bits as u64;
    Ok(SimResult {
        bit_errors,
        frame_errors,
        bits,
        frames: cfg.frames,
        ber: bit_errors as f64 / bits as f64,
        fer: frame_errors as f64 / cfg.frames as f64,
        wilson_ci95: wilson_ci95(bit_errors, bits),
    })
}

pub fn run_sim(cfg: &SimConfig) -> Result<SimResult> {
    match cfg.demapper {
        Demapper::Exact => run_sim_with(cfg, exact_llr),
        Demapper::MaxLog => run_sim_with(cfg, maxlog_llr),
        Demapper::Fast => run_sim_with(cfg, fast_llr_decompose),
        Demapper::Gcr => {
            run_sim_with(cfg, |y, g| gcr_bit_metrics(&maxlog_llr(y, g), GcrBranch::default()))
        }
    }
}

/// Runs each config independently (in parallel); a config's failure does
/// not abort the others. Each config carries its own seed, so the results
/// depend only on the configs, not on list order or scheduling.
pub fn sweep(cfgs: &[SimConfig]) -> Vec<Result<SimResult>> {
    cfgs.par_iter().map(run_sim).collect()
}

/// Uncoded benchmark: random 8PSK symbols through the same channel with
/// minimum-distance detection. Returns (symbol errors, error rate).
pub fn uncoded_ser(snr_db: f64, n_symbols: u64, seed: u64) -> (u64, f64) {
    let g = amplitude_for_snr_db(snr_db);
    let c = Psk8Constellation::new();
    let chunk_size = 4096u64;
    let n_chunks = n_symbols.div_ceil(chunk_size) as usize;
    let errors: u64 = (0..n_chunks)
        .into_par_iter()
        .map(|i| {
            let start = i as u64 * chunk_size;
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            rng.set_stream(2 * start + 1);
            let mut e = 0u64;
            for _ in start..(start + chunk_size).min(n_symbols) {
                let k = rng.random_range(0..8usize);
                let y = g * c.point(k)
                    + Complex64::new(
                        rng.sample::<f64, _>(StandardNormal),
                        rng.sample::<f64, _>(StandardNormal),
                    );
                let detected = (0..8)
                    .max_by(|&a, &b| {
                        let da = y.re * c.point(a).re + y.im * c.point(a).im;
                        let db = y.re * c.point(b).re + y.im * c.point(b).im;
                        da.partial_cmp(&db).unwrap()
                    })
                    .unwrap();
                e += u64::from(detected != k);
            }
            e
        })
        .sum();
    (errors, errors as f64 / n_symbols as f64)
}
