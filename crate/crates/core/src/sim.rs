//! Monte-Carlo BER/FER measurement over BPSK-AWGN.
//!
//! Codewords are sent as `+1` for a 0 bit and `-1` for a 1 bit. The codeword
//! and noise of frame `f` come from its own ChaCha stream, so results do not
//! depend on how frames are spread over worker threads.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use log::info;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::codec::{parse_alist, quantize_channel_output, BpDecoder, Encoder, MimQbpDecoder, TannerGraph};
use crate::de::{load_spec, DecoderSpec};
use crate::error::{Error, Result};

pub const CSV_HEADER: &str = "snr_db,sigma,frames,bit_errors,frame_errors,ber,fer,mean_iterations";
pub const DEFAULT_MAX_FRAMES: u64 = 100_000_000;

/// Frames handed to the worker pool at a time. Fixed so that the stopping
/// frame is the same for every worker count.
const CHUNK: u64 = 128;

/// `sigma = 1 / sqrt(2 R 10^(snr/10))` for unit-energy BPSK at `E_b/N_0`
/// of `snr_db`.
pub fn snr_to_sigma(snr_db: f64, rate: f64) -> f64 {
    1.0 / (2.0 * rate * 10f64.powf(snr_db / 10.0)).sqrt()
}

pub fn sigma_to_snr(sigma: f64, rate: f64) -> f64 {
    10.0 * (1.0 / (2.0 * rate * sigma * sigma)).log10()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecoderKind {
    MimQbp,
    BpFloat,
}

/// Transmitted codewords. The designed decoders are not guaranteed to be
/// symmetric, so the all-zero word alone can misstate the average error
/// rate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CodewordMode {
    Random,
    AllZero,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOptions {
    pub min_frame_errors: u64,
    pub max_frames: u64,
    pub seed: u64,
    pub workers: usize,
    pub codeword: CodewordMode,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            min_frame_errors: 100,
            max_frames: DEFAULT_MAX_FRAMES,
            seed: 0,
            workers: 1,
            codeword: CodewordMode::Random,
        }
    }
}

impl RunOptions {
    pub fn validate(&self) -> Result<()> {
        if self.min_frame_errors < 1 || self.max_frames < 1 || self.workers < 1 {
            return Err(Error::Parameter("min_frame_errors, max_frames and workers must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimRow {
    pub snr_db: f64,
    pub sigma: f64,
    pub frames: u64,
    pub bit_errors: u64,
    pub frame_errors: u64,
    pub ber: f64,
    pub fer: f64,
    pub mean_iterations: f64,
}

/// Outcome of a single frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FrameRecord {
    pub frame: u64,
    pub bit_errors: u64,
    pub iterations: usize,
    pub converged: bool,
}

/// Transmitted codeword and received values of one frame. Without an
/// encoder the all-zero word of length `n` is sent.
pub fn frame_observation(
    seed: u64,
    point: usize,
    frame: u64,
    sigma: f64,
    n: usize,
    encoder: Option<&Encoder>,
) -> (Vec<u8>, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((point as u64) << 40) | frame);
    let word = match encoder {
        Some(enc) => enc.random_codeword(&mut rng),
        None => vec![0; n],
    };
    let y = word
        .iter()
        .map(|&b| {
            let z: f64 = StandardNormal.sample(&mut rng);
            let x = if b == 0 { 1.0 } else { -1.0 };
            x + sigma * z
        })
        .collect();
    (word, y)
}

enum Worker<'a> {
    Qbp(MimQbpDecoder<'a>),
    Bp(BpDecoder<'a>, usize),
}

impl Worker<'_> {
    fn run(&mut self, word: &[u8], y: &[f64], sigma: f64, spec: &DecoderSpec) -> (u64, usize, bool) {
        let r = match self {
            Worker::Qbp(d) => d.decode(&quantize_channel_output(y, spec)),
            Worker::Bp(d, iters) => d.decode(y, sigma, *iters),
        };
        (r.errors_against(word) as u64, r.iterations_used, r.converged)
    }
}

/// Simulates one SNR point. `point` indexes the SNR within a run and
/// selects independent noise streams per point. Every decoded frame is
/// appended to `trace` when given.
pub fn simulate_point(
    graph: &TannerGraph,
    spec: &DecoderSpec,
    kind: DecoderKind,
    snr_db: f64,
    point: usize,
    opts: &RunOptions,
    mut trace: Option<&mut Vec<FrameRecord>>,
) -> Result<SimRow> {
    opts.validate()?;
    MimQbpDecoder::new(graph, spec)?;
    let rate = graph.design_rate();
    let sigma = snr_to_sigma(snr_db, rate);
    let n = graph.n();
    let encoder = match opts.codeword {
        CodewordMode::Random => Some(Encoder::new(graph)),
        CodewordMode::AllZero => None,
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.workers)
        .build()
        .map_err(|e| Error::Parameter(format!("cannot start worker pool: {e}")))?;
    let make_worker = || match kind {
        DecoderKind::MimQbp => Worker::Qbp(MimQbpDecoder::new(graph, spec).expect("checked above")),
        DecoderKind::BpFloat => Worker::Bp(BpDecoder::new(graph), spec.config.max_iterations),
    };

    let (mut frames, mut bit_errors, mut frame_errors, mut iterations) = (0u64, 0u64, 0u64, 0u64);
    'outer: while frames < opts.max_frames && frame_errors < opts.min_frame_errors {
        let start = frames;
        let end = (start + CHUNK).min(opts.max_frames);
        let results: Vec<(u64, usize, bool)> = pool.install(|| {
            (start..end)
                .into_par_iter()
                .map_init(make_worker, |w, f| {
                    let (word, y) = frame_observation(opts.seed, point, f, sigma, n, encoder.as_ref());
                    w.run(&word, &y, sigma, spec)
                })
                .collect()
        });
        for (k, (errs, iters, converged)) in results.into_iter().enumerate() {
            frames += 1;
            bit_errors += errs;
            iterations += iters as u64;
            if errs > 0 {
                frame_errors += 1;
            }
            if let Some(t) = trace.as_deref_mut() {
                t.push(FrameRecord { frame: start + k as u64, bit_errors: errs, iterations: iters, converged });
            }
            if frame_errors >= opts.min_frame_errors {
                break 'outer;
            }
        }
    }
    let row = SimRow {
        snr_db,
        sigma,
        frames,
        bit_errors,
        frame_errors,
        ber: bit_errors as f64 / (frames as f64 * n as f64),
        fer: frame_errors as f64 / frames as f64,
        mean_iterations: iterations as f64 / frames as f64,
    };
    info!("{kind:?} at {snr_db} dB: {frames} frames, {frame_errors} frame errors, BER {:.3e}", row.ber);
    Ok(row)
}

/// CSV text for a list of rows, header included.
pub fn rows_to_csv(rows: &[SimRow]) -> String {
    let mut s = String::new();
    writeln!(s, "{CSV_HEADER}").unwrap();
    for r in rows {
        writeln!(
            s,
            "{},{},{},{},{},{},{},{}",
            r.snr_db, r.sigma, r.frames, r.bit_errors, r.frame_errors, r.ber, r.fer, r.mean_iterations
        )
        .unwrap();
    }
    s
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub code_path: PathBuf,
    pub spec_path: PathBuf,
    pub snr_points: Vec<f64>,
    pub options: RunOptions,
    pub baseline: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimMetadata {
    pub seed: u64,
    /// SHA-256 of the spec file, hex encoded.
    pub spec_hash: String,
    pub code_id: String,
    pub wall_time_s: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimReport {
    pub rows: Vec<SimRow>,
    /// Rows for the floating-point BP decoder when a baseline was requested.
    pub baseline_rows: Vec<SimRow>,
    pub metadata: SimMetadata,
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().fold(String::with_capacity(2 * bytes.len()), |mut s, b| {
        write!(s, "{b:02x}").unwrap();
        s
    })
}

/// Loads the code and spec, then simulates every SNR point, optionally also
/// with the floating-point baseline.
pub fn run_monte_carlo(cfg: &SimConfig) -> Result<SimReport> {
    if cfg.snr_points.is_empty() {
        return Err(Error::Parameter("no SNR points given".into()));
    }
    cfg.options.validate()?;
    let started = Instant::now();
    let graph = parse_alist(&std::fs::read_to_string(&cfg.code_path)?)?;
    let spec_bytes = std::fs::read(&cfg.spec_path)?;
    let spec = load_spec(&cfg.spec_path)?;
    MimQbpDecoder::new(&graph, &spec)?;

    let mut rows = Vec::new();
    let mut baseline_rows = Vec::new();
    for (point, &snr) in cfg.snr_points.iter().enumerate() {
        rows.push(simulate_point(&graph, &spec, DecoderKind::MimQbp, snr, point, &cfg.options, None)?);
        if cfg.baseline {
            baseline_rows.push(simulate_point(&graph, &spec, DecoderKind::BpFloat, snr, point, &cfg.options, None)?);
        }
    }
    let code_id = Path::new(&cfg.code_path).file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    Ok(SimReport {
        rows,
        baseline_rows,
        metadata: SimMetadata {
            seed: cfg.options.seed,
            spec_hash: hex(&Sha256::digest(&spec_bytes)),
            code_id,
            wall_time_s: started.elapsed().as_secs_f64(),
        },
    })
}
