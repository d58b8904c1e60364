//! Density evolution over the quantized message alphabets: builds the full
//! per-iteration decoder specification and searches for the decoding
//! threshold.

use std::path::Path;

use log::{debug, info, warn};
use serde::{Deserialize, Serialize};

use crate::chanquant::{design_channel_alphabet, discretize_bpsk_awgn, AwgnDesign};
use crate::cn_design::{design_cn_quantizer, enumerate_cn_integer, phi_c_integer};
use crate::dmc::BinaryInputDmc;
use crate::domain::succ;
use crate::error::{Error, Result};
use crate::sdq::design_optimal_sdq;
use crate::vn_design::{design_bit_estimator, design_vn_quantizer, enumerate_vn_alphabet, phi_v_integer};

pub const SPEC_VERSION: i64 = 1;

/// Convergence slack: a design converges when the final `I(X;R)` is at
/// least `1 - CONVERGENCE_DELTA` bits.
pub const CONVERGENCE_DELTA: f64 = 1e-4;

const COLLAPSE_MI: f64 = 1e-12;
const MAX_BISECTIONS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DesignConfig {
    pub d_v: usize,
    pub d_c: usize,
    pub l_size: usize,
    pub r_size: usize,
    pub s_size: usize,
    pub q_c: u32,
    pub q_v: u32,
    pub sigma_d: f64,
    pub max_iterations: usize,
}

impl DesignConfig {
    /// All three alphabets of size `2^bits`.
    pub fn with_bits(
        d_v: usize,
        d_c: usize,
        bits: u32,
        q_c: u32,
        q_v: u32,
        sigma_d: f64,
        max_iterations: usize,
    ) -> Self {
        let size = 1usize << bits;
        Self { d_v, d_c, l_size: size, r_size: size, s_size: size, q_c, q_v, sigma_d, max_iterations }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Parameter(msg));
        if self.d_v < 2 || self.d_c < 3 {
            return fail(format!("degrees must satisfy d_v >= 2, d_c >= 3 (got {}, {})", self.d_v, self.d_c));
        }
        if self.l_size < 2 || self.r_size < 2 || self.s_size < 2 {
            return fail("alphabet sizes must be at least 2".into());
        }
        if self.max_iterations < 1 {
            return fail("max_iterations must be positive".into());
        }
        if !(self.sigma_d > 0.0 && self.sigma_d.is_finite()) {
            return fail(format!("sigma_d must be positive, got {}", self.sigma_d));
        }
        if self.q_c > 16 || self.q_v > 16 {
            return fail("bit widths above 16 are not supported".into());
        }
        crate::cn_design::phi_c_cap(self.q_c, self.d_c)?;
        crate::vn_design::phi_v_cap(self.q_v, self.d_v)?;
        Ok(())
    }

    pub fn rate(&self) -> f64 {
        1.0 - self.d_v as f64 / self.d_c as f64
    }
}

/// Rules for one decoding iteration plus its design diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub phi_c: Vec<i32>,
    pub gamma_c: Vec<i32>,
    pub phi_v: Vec<i32>,
    pub phi_ch: Vec<i32>,
    pub gamma_v: Vec<i32>,
    pub gamma_e: i32,
    pub mi_s: f64,
    pub mi_r: f64,
}

/// Complete output of offline design.
#[derive(Debug, Clone, PartialEq)]
pub struct DecoderSpec {
    pub config: DesignConfig,
    pub channel_boundaries: Vec<f64>,
    pub initial_r_map: Vec<usize>,
    pub iterations: Vec<IterationRecord>,
}

impl DecoderSpec {
    /// Rules for 1-based iteration `t`; the last record serves any later
    /// iteration.
    pub fn record(&self, t: usize) -> &IterationRecord {
        let i = t.saturating_sub(1).min(self.iterations.len() - 1);
        &self.iterations[i]
    }

    pub fn final_mi(&self) -> f64 {
        self.iterations.last().map_or(0.0, |r| r.mi_r)
    }

    pub fn converged(&self) -> bool {
        self.final_mi() >= 1.0 - CONVERGENCE_DELTA
    }

    /// Structural and bit-width checks.
    pub fn validate(&self) -> Result<()> {
        let cfg = &self.config;
        cfg.validate().map_err(|e| Error::SpecFormat(e.to_string()))?;
        let bad = |msg: String| Err(Error::SpecFormat(msg));
        if self.channel_boundaries.len() != cfg.l_size - 1 {
            return bad(format!(
                "expected {} channel boundaries, found {}",
                cfg.l_size - 1,
                self.channel_boundaries.len()
            ));
        }
        if self.channel_boundaries.iter().any(|b| !b.is_finite())
            || self.channel_boundaries.windows(2).any(|w| w[0] <= w[1])
        {
            return bad("channel boundaries must be finite and strictly decreasing".into());
        }
        if self.initial_r_map.len() != cfg.l_size
            || self.initial_r_map.windows(2).any(|w| w[0] > w[1])
            || self.initial_r_map.iter().any(|&r| r >= cfg.r_size)
        {
            return bad("initial_r_map must be a non-decreasing map from L into R".into());
        }
        if self.iterations.len() != cfg.max_iterations {
            return bad(format!("expected {} iteration records, found {}", cfg.max_iterations, self.iterations.len()));
        }
        let cn_limit = (1i64 << (cfg.q_c - 1)) - 1;
        let vn_limit = (1i64 << (cfg.q_v - 1)) - 1;
        let mut r_in = self.initial_r_map.last().map_or(0, |r| r + 1);
        for (t, rec) in self.iterations.iter().enumerate() {
            let t = t + 1;
            if rec.phi_c.len() != r_in {
                return bad(format!("iteration {t}: phi_c has {} entries, expected {r_in}", rec.phi_c.len()));
            }
            let s = rec.gamma_c.len() + 1;
            if s > cfg.s_size || rec.phi_v.len() != s {
                return bad(format!("iteration {t}: gamma_c and phi_v sizes disagree"));
            }
            if rec.phi_ch.len() != cfg.l_size {
                return bad(format!("iteration {t}: phi_ch has {} entries", rec.phi_ch.len()));
            }
            if rec.gamma_v.len() + 1 > cfg.r_size {
                return bad(format!("iteration {t}: gamma_v has {} entries", rec.gamma_v.len()));
            }
            if rec.phi_c.contains(&0) {
                return bad(format!("iteration {t}: phi_c contains zero"));
            }
            if !rec.gamma_c.windows(2).all(|w| succ(w[0], w[1])) {
                return bad(format!("iteration {t}: gamma_c is not strictly ordered"));
            }
            if !rec.gamma_v.windows(2).all(|w| w[0] > w[1]) {
                return bad(format!("iteration {t}: gamma_v is not strictly decreasing"));
            }
            let max_abs = |v: &[i32]| v.iter().map(|x| (*x as i64).abs()).max().unwrap_or(0);
            if cfg.d_c as i64 * max_abs(&rec.phi_c) > cn_limit {
                return Err(Error::BitWidth(format!("iteration {t}: phi_c overflows {} bits", cfg.q_c)));
            }
            if max_abs(&rec.phi_ch) + cfg.d_v as i64 * max_abs(&rec.phi_v) > vn_limit {
                return Err(Error::BitWidth(format!("iteration {t}: phi_v/phi_ch overflow {} bits", cfg.q_v)));
            }
            r_in = rec.gamma_v.len() + 1;
        }
        Ok(())
    }

    pub fn to_toml(&self) -> Result<String> {
        let c = &self.config;
        let file = SpecFile {
            version: SPEC_VERSION,
            d_v: c.d_v,
            d_c: c.d_c,
            l_size: c.l_size,
            r_size: c.r_size,
            s_size: c.s_size,
            q_c: c.q_c,
            q_v: c.q_v,
            sigma_d: c.sigma_d,
            max_iterations: c.max_iterations,
            channel_boundaries: self.channel_boundaries.clone(),
            initial_r_map: self.initial_r_map.clone(),
            iteration: self.iterations.iter().map(IterationBlock::from).collect(),
        };
        toml::to_string(&file).map_err(|e| Error::SpecFormat(e.to_string()))
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let table: toml::Table = text.parse().map_err(|e: toml::de::Error| Error::SpecFormat(e.to_string()))?;
        let version = table
            .get("version")
            .and_then(|v| v.as_integer())
            .ok_or_else(|| Error::SpecFormat("missing integer field `version`".into()))?;
        if version != SPEC_VERSION {
            return Err(Error::SpecVersion { found: version, expected: SPEC_VERSION });
        }
        let file: SpecFile = toml::from_str(text).map_err(|e| Error::SpecFormat(e.to_string()))?;
        let spec = DecoderSpec {
            config: DesignConfig {
                d_v: file.d_v,
                d_c: file.d_c,
                l_size: file.l_size,
                r_size: file.r_size,
                s_size: file.s_size,
                q_c: file.q_c,
                q_v: file.q_v,
                sigma_d: file.sigma_d,
                max_iterations: file.max_iterations,
            },
            channel_boundaries: file.channel_boundaries,
            initial_r_map: file.initial_r_map,
            iterations: file.iteration.into_iter().map(IterationRecord::try_from).collect::<Result<_>>()?,
        };
        spec.validate()?;
        Ok(spec)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpecFile {
    version: i64,
    d_v: usize,
    d_c: usize,
    l_size: usize,
    r_size: usize,
    s_size: usize,
    q_c: u32,
    q_v: u32,
    sigma_d: f64,
    max_iterations: usize,
    channel_boundaries: Vec<f64>,
    initial_r_map: Vec<usize>,
    iteration: Vec<IterationBlock>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct IterationBlock {
    phi_c: Vec<i32>,
    gamma_c: Vec<i32>,
    phi_v: Vec<i32>,
    phi_ch: Vec<i32>,
    gamma_v: Vec<i32>,
    gamma_e: Vec<i32>,
    mi_s: f64,
    mi_r: f64,
}

impl From<&IterationRecord> for IterationBlock {
    fn from(r: &IterationRecord) -> Self {
        IterationBlock {
            phi_c: r.phi_c.clone(),
            gamma_c: r.gamma_c.clone(),
            phi_v: r.phi_v.clone(),
            phi_ch: r.phi_ch.clone(),
            gamma_v: r.gamma_v.clone(),
            gamma_e: vec![r.gamma_e],
            mi_s: r.mi_s,
            mi_r: r.mi_r,
        }
    }
}

impl TryFrom<IterationBlock> for IterationRecord {
    type Error = Error;

    fn try_from(b: IterationBlock) -> Result<Self> {
        let gamma_e = match b.gamma_e.as_slice() {
            [g] => *g,
            other => return Err(Error::SpecFormat(format!("gamma_e must hold one value, found {}", other.len()))),
        };
        Ok(IterationRecord {
            phi_c: b.phi_c,
            gamma_c: b.gamma_c,
            phi_v: b.phi_v,
            phi_ch: b.phi_ch,
            gamma_v: b.gamma_v,
            gamma_e,
            mi_s: b.mi_s,
            mi_r: b.mi_r,
        })
    }
}

/// Writes `bytes` to `path` through a temporary file in the same directory,
/// so readers never observe a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    use std::io::Write;
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

pub fn save_spec(spec: &DecoderSpec, path: &Path) -> Result<()> {
    spec.validate()?;
    write_atomic(path, spec.to_toml()?.as_bytes())
}

pub fn load_spec(path: &Path) -> Result<DecoderSpec> {
    DecoderSpec::from_toml(&std::fs::read_to_string(path)?)
}

/// Runs density evolution for `max_iterations` iterations at `sigma_d`.
pub fn run_design(cfg: &DesignConfig) -> Result<DecoderSpec> {
    cfg.validate()?;
    let channel = design_channel_alphabet(&AwgnDesign::new(cfg.sigma_d, cfg.l_size))?;
    let pl = channel.pmf().clone();
    debug!("channel alphabet: I(X;L) = {:.6}", pl.mutual_information());

    let (mut pr, initial_r_map) = initial_messages(&pl, cfg.r_size)?;
    let mut iterations = Vec::with_capacity(cfg.max_iterations);
    let mut prev_mi = pr.mutual_information();
    for t in 1..=cfg.max_iterations {
        let rf_c = phi_c_integer(&pr, cfg.q_c, cfg.d_c)?;
        let alpha = enumerate_cn_integer(&rf_c, &pr, cfg.d_c)?;
        let cn = design_cn_quantizer(&alpha, cfg.s_size)?;
        let ps = cn.pmf.clone();
        if cn.mutual_information < COLLAPSE_MI {
            return Err(Error::DesignCollapse { iteration: t, detail: "I(X;S) vanished".into() });
        }

        let rf_v = phi_v_integer(&ps, &pl, cfg.q_v, cfg.d_v)?;
        let beta = enumerate_vn_alphabet(&rf_v, &ps, &pl, cfg.d_v)?;
        let vn = design_vn_quantizer(&beta, cfg.r_size)?;
        let gamma_e = design_bit_estimator(&rf_v, &ps, &pl, cfg.d_v)?;
        if vn.mutual_information < COLLAPSE_MI {
            return Err(Error::DesignCollapse { iteration: t, detail: "I(X;R) vanished".into() });
        }
        if vn.mutual_information + 1e-9 < prev_mi {
            debug!("iteration {t}: I(X;R) decreased from {prev_mi:.12} to {:.12}", vn.mutual_information);
        }
        prev_mi = vn.mutual_information;
        debug!(
            "iteration {t}: |A| = {}, |B| = {}, I(X;S) = {:.9}, I(X;R) = {:.9}",
            alpha.values.len(),
            beta.values.len(),
            cn.mutual_information,
            vn.mutual_information
        );

        iterations.push(IterationRecord {
            phi_c: rf_c.values,
            gamma_c: cn.thresholds.gammas,
            phi_v: rf_v.phi_v,
            phi_ch: rf_v.phi_ch,
            gamma_v: vn.thresholds.gammas,
            gamma_e,
            mi_s: cn.mutual_information,
            mi_r: vn.mutual_information,
        });
        pr = vn.pmf;
    }
    let spec =
        DecoderSpec { config: *cfg, channel_boundaries: channel.boundaries().to_vec(), initial_r_map, iterations };
    spec.validate()?;
    Ok(spec)
}

/// Message pmf entering the first check-node update: the channel alphabet
/// itself, or its MI-optimal requantization when `|R| != |L|`.
fn initial_messages(pl: &BinaryInputDmc, r_size: usize) -> Result<(BinaryInputDmc, Vec<usize>)> {
    if r_size == pl.len() {
        return Ok((pl.clone(), (0..pl.len()).collect()));
    }
    let m = r_size.min(pl.len());
    let q = design_optimal_sdq(pl, m)?;
    let map = (0..pl.len()).map(|l| q.map(l)).collect();
    Ok((pl.quantize(q.boundaries())?, map))
}

/// Whether density evolution at `sigma` reaches `I(X;R) >= 1 - delta`.
/// A collapsed design counts as not converged.
pub fn converges_at(cfg: &DesignConfig, sigma: f64) -> Result<bool> {
    let probe = DesignConfig { sigma_d: sigma, ..*cfg };
    match run_design(&probe) {
        Ok(spec) => {
            debug!("sigma {sigma:.6}: final I(X;R) = {:.9}", spec.final_mi());
            Ok(spec.converged())
        }
        Err(Error::DesignCollapse { iteration, detail }) => {
            debug!("sigma {sigma:.6}: collapsed at iteration {iteration}: {detail}");
            Ok(false)
        }
        Err(e) => Err(e),
    }
}

/// Noise level at which the unquantized BPSK-AWGN channel's mutual
/// information equals `rate`.
pub fn shannon_sigma(rate: f64) -> Result<f64> {
    if !(rate > 0.0 && rate < 1.0) {
        return Err(Error::Parameter(format!("rate must lie in (0, 1), got {rate}")));
    }
    let mi = |sigma: f64| -> Result<f64> {
        let d = AwgnDesign::new(sigma, 2);
        Ok(discretize_bpsk_awgn(&d)?.mutual_information())
    };
    let (mut lo, mut hi) = (0.05, 20.0);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if mi(mid)? > rate {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Default bracket `[0.5, 1.5]` times the Shannon-limit noise level.
pub fn default_bracket(cfg: &DesignConfig) -> Result<(f64, f64)> {
    let guess = shannon_sigma(cfg.rate())?;
    Ok((0.5 * guess, 1.5 * guess))
}

/// Bisection for the decoding threshold. `cfg.sigma_d` is ignored. The
/// design must converge at `lo` and fail to converge at `hi`; the returned
/// value is the midpoint of a final bracket no wider than `tol` (or of the
/// bracket after the bisection budget is spent).
pub fn find_threshold(cfg: &DesignConfig, lo: f64, hi: f64, tol: f64) -> Result<f64> {
    if !(lo > 0.0 && lo < hi && tol > 0.0) {
        return Err(Error::Bracket(format!("need 0 < lo < hi and tol > 0 (lo {lo}, hi {hi}, tol {tol})")));
    }
    if !converges_at(cfg, lo)? {
        return Err(Error::Bracket(format!("design does not converge at the lower end sigma = {lo}")));
    }
    if converges_at(cfg, hi)? {
        return Err(Error::Bracket(format!("design still converges at the upper end sigma = {hi}")));
    }
    let (mut lo, mut hi) = (lo, hi);
    let mut steps = 0;
    while hi - lo > tol && steps < MAX_BISECTIONS {
        let mid = 0.5 * (lo + hi);
        if converges_at(cfg, mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
        steps += 1;
        info!("threshold bracket [{lo:.6}, {hi:.6}]");
    }
    if hi - lo > tol {
        warn!("bisection budget spent with bracket width {:.3e} above tolerance", hi - lo);
    }
    Ok(0.5 * (lo + hi))
}
