//! Variable-node design: reconstruction functions `phi_v` and `phi_ch`, the
//! alphabet of summed values, its threshold set, and the bit-estimator
//! threshold.

use std::cmp::Ordering;

use log::warn;

use crate::dmc::BinaryInputDmc;
use crate::domain::{sort_merge, Domain};
use crate::error::{Error, Result};
use crate::sdq::design_optimal_sdq;

/// Largest log-likelihood ratio magnitude, in nats, used before scaling.
pub const LLR_SATURATION: f64 = 40.0;

fn saturated_llr(p0: f64, p1: f64, symbol: usize) -> Result<f64> {
    match (p0 > 0.0, p1 > 0.0) {
        (false, false) => Err(Error::DegenerateSymbol(symbol)),
        (true, false) => Ok(LLR_SATURATION),
        (false, true) => Ok(-LLR_SATURATION),
        (true, true) => Ok((p0 / p1).ln().clamp(-LLR_SATURATION, LLR_SATURATION)),
    }
}

fn llrs(pmf: &BinaryInputDmc) -> Result<Vec<f64>> {
    pmf.transitions().iter().enumerate().map(|(i, p)| saturated_llr(p[0], p[1], i)).collect()
}

/// Real-valued optimal variable-node reconstructions `(phi_v*, phi_ch*)`:
/// the log-likelihood ratios of the check-node messages and channel symbols.
pub fn phi_v_star(ps: &BinaryInputDmc, pl: &BinaryInputDmc) -> Result<(Vec<f64>, Vec<f64>)> {
    Ok((llrs(ps)?, llrs(pl)?))
}

/// Integer variable-node reconstruction functions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VnReconstruction {
    pub phi_v: Vec<i32>,
    pub phi_ch: Vec<i32>,
    pub cap: i32,
    pub bit_width: u32,
}

/// `floor((2^(q_v - 1) - 1) / (d_v + 1))`.
pub fn phi_v_cap(q_v: u32, d_v: usize) -> Result<i32> {
    if !(2..=31).contains(&q_v) || d_v < 1 {
        return Err(Error::Parameter(format!("invalid q_v = {q_v} or d_v = {d_v}")));
    }
    let cap = ((1i64 << (q_v - 1)) - 1) / (d_v as i64 + 1);
    if cap == 0 {
        return Err(Error::Parameter(format!("q_v = {q_v} bits leave no magnitude range for d_v = {d_v}")));
    }
    Ok(cap as i32)
}

/// Scales both optimal reconstructions by the common factor
/// `cap / max|phi*|` and rounds half away from zero.
pub fn phi_v_integer(ps: &BinaryInputDmc, pl: &BinaryInputDmc, q_v: u32, d_v: usize) -> Result<VnReconstruction> {
    let cap = phi_v_cap(q_v, d_v)?;
    let (sv, sch) = phi_v_star(ps, pl)?;
    let max = sv.iter().chain(&sch).fold(0.0f64, |m, v| m.max(v.abs()));
    let scale = |v: &f64| -> i32 {
        if max == 0.0 {
            return 0;
        }
        let mag = (v.abs() * cap as f64 / max + 0.5).floor() as i32;
        if *v < 0.0 {
            -mag.min(cap)
        } else {
            mag.min(cap)
        }
    };
    Ok(VnReconstruction {
        phi_v: sv.iter().map(scale).collect(),
        phi_ch: sch.iter().map(scale).collect(),
        cap,
        bit_width: q_v,
    })
}

/// Alphabet of summed variable-node values in strictly decreasing order
/// with its pmf.
#[derive(Debug, Clone, PartialEq)]
pub struct VnAlphabet<T> {
    pub values: Vec<T>,
    pub pmf: BinaryInputDmc,
}

fn descending<T: Domain>(a: &T, b: &T) -> Ordering {
    b.total_cmp(a)
}

/// Alphabet and pmf of `phi_ch(l) + phi_v(s_1) + ... + phi_v(s_folds)`.
pub fn fold_vn_alphabet<T: Domain>(
    phi_v: &[T],
    phi_ch: &[T],
    ps: &BinaryInputDmc,
    pl: &BinaryInputDmc,
    folds: usize,
) -> Result<VnAlphabet<T>> {
    if phi_v.len() != ps.len() || phi_ch.len() != pl.len() {
        return Err(Error::Parameter("reconstruction sizes do not match the pmfs".into()));
    }
    let seed: Vec<(T, f64, f64)> = phi_ch
        .iter()
        .zip(pl.transitions())
        .filter(|(_, p)| p[0] > 0.0 || p[1] > 0.0)
        .map(|(&v, p)| (v, p[0], p[1]))
        .collect();
    let msgs: Vec<(T, f64, f64)> = phi_v
        .iter()
        .zip(ps.transitions())
        .filter(|(_, p)| p[0] > 0.0 || p[1] > 0.0)
        .map(|(&v, p)| (v, p[0], p[1]))
        .collect();
    if seed.is_empty() || msgs.is_empty() {
        return Err(Error::InvalidPmf("pmf has no live symbols".into()));
    }
    let mut acc = sort_merge(seed, descending);
    for _ in 0..folds {
        let mut next = Vec::with_capacity(acc.len() * msgs.len());
        for &(v, q0, q1) in &msgs {
            for &(b, p0, p1) in &acc {
                next.push((b.add(v), p0 * q0, p1 * q1));
            }
        }
        acc = sort_merge(next, descending);
    }
    let (values, rows): (Vec<T>, Vec<[f64; 2]>) =
        acc.into_iter().filter(|e| e.1 > 0.0 || e.2 > 0.0).map(|(v, p0, p1)| (v, [p0, p1])).unzip();
    Ok(VnAlphabet { values, pmf: BinaryInputDmc::uniform_renormalized(rows)? })
}

fn check_vn_width(rf: &VnReconstruction, alpha: &VnAlphabet<i32>) {
    let limit = (1i64 << (rf.bit_width - 1)) - 1;
    assert!(
        alpha.values.iter().all(|&b| (b as i64).abs() <= limit),
        "variable-node accumulator exceeds {} bits",
        rf.bit_width
    );
}

/// Alphabet over `L x S^(d_v - 1)`.
pub fn enumerate_vn_alphabet(
    rf: &VnReconstruction,
    ps: &BinaryInputDmc,
    pl: &BinaryInputDmc,
    d_v: usize,
) -> Result<VnAlphabet<i32>> {
    if d_v < 1 {
        return Err(Error::Parameter("d_v must be positive".into()));
    }
    let alpha = fold_vn_alphabet(&rf.phi_v, &rf.phi_ch, ps, pl, d_v - 1)?;
    check_vn_width(rf, &alpha);
    Ok(alpha)
}

/// Variable-node threshold set, strictly decreasing.
#[derive(Debug, Clone, PartialEq)]
pub struct VnThresholds<T> {
    pub gammas: Vec<T>,
}

impl<T: Domain> VnThresholds<T> {
    pub fn map(&self, phi_sum: T) -> usize {
        vn_map_to_symbol(phi_sum, &self.gammas)
    }
}

/// Outgoing symbol: the number of thresholds strictly above `phi_sum`.
pub fn vn_map_to_symbol<T: Domain>(phi_sum: T, gammas: &[T]) -> usize {
    gammas.partition_point(|&g| g > phi_sum)
}

/// Result of quantizing a variable-node alphabet.
#[derive(Debug, Clone, PartialEq)]
pub struct VnQuantizer<T> {
    pub thresholds: VnThresholds<T>,
    pub boundaries: Vec<usize>,
    pub pmf: BinaryInputDmc,
    pub mutual_information: f64,
}

impl<T> VnQuantizer<T> {
    pub fn size(&self) -> usize {
        self.pmf.len()
    }
}

/// MI-optimal SDQ of the decreasing alphabet to `r_size` symbols, shrinking
/// the output size with a warning when the alphabet is smaller.
pub fn design_vn_quantizer<T: Domain>(beta: &VnAlphabet<T>, r_size: usize) -> Result<VnQuantizer<T>> {
    if r_size < 1 {
        return Err(Error::Parameter("|R| must be positive".into()));
    }
    let m = if beta.values.len() < r_size {
        warn!("variable-node alphabet has {} values, reducing |R| from {r_size}", beta.values.len());
        beta.values.len()
    } else {
        r_size
    };
    let q = design_optimal_sdq(&beta.pmf, m)?;
    let lambda = q.boundaries().to_vec();
    let gammas = lambda[1..m].iter().map(|&l| beta.values[l - 1]).collect();
    let pmf = beta.pmf.quantize(&lambda)?;
    Ok(VnQuantizer {
        thresholds: VnThresholds { gammas },
        boundaries: lambda,
        pmf,
        mutual_information: q.achieved_mi(),
    })
}

/// Threshold of the MI-optimal two-level split of an estimator alphabet.
/// A single-valued alphabet yields that value.
pub fn estimator_threshold<T: Domain>(alpha: &VnAlphabet<T>) -> Result<T> {
    if alpha.values.len() == 1 {
        return Ok(alpha.values[0]);
    }
    let q = design_optimal_sdq(&alpha.pmf, 2)?;
    Ok(alpha.values[q.boundaries()[1] - 1])
}

/// Bit-estimator threshold `γ_e` over `L x S^(d_v)`; the decision is
/// `x = 0` iff `Phi_e >= γ_e`.
pub fn design_bit_estimator(
    rf: &VnReconstruction,
    ps: &BinaryInputDmc,
    pl: &BinaryInputDmc,
    d_v: usize,
) -> Result<i32> {
    let alpha = fold_vn_alphabet(&rf.phi_v, &rf.phi_ch, ps, pl, d_v)?;
    check_vn_width(rf, &alpha);
    estimator_threshold(&alpha)
}
