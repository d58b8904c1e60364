//! Mutual-information-maximizing sequential deterministic quantizers (SDQs).
//!
//! An SDQ with `M` outputs on an `N`-output channel is described by its
//! boundary indices `0 = l_0 < l_1 < ... < l_M = N`; output `z` collects the
//! contiguous run `l_z .. l_{z+1}` (zero-based, half-open). For a channel
//! listed in descending LLR order the best SDQ is also the best deterministic
//! quantizer overall, and dynamic programming finds it exactly.

use crate::dmc::{check_boundaries, output_mi_term, BinaryInputDmc};
use crate::error::{Error, Result};

/// Upper bound on the number of candidates the exhaustive search will visit.
pub const BRUTE_FORCE_LIMIT: u128 = 1_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct SequentialQuantizer {
    boundaries: Vec<usize>,
    achieved_mi: f64,
}

impl SequentialQuantizer {
    /// Wraps `boundaries` and evaluates the MI they achieve on `ch`.
    pub fn new(boundaries: Vec<usize>, ch: &BinaryInputDmc) -> Result<Self> {
        let achieved_mi = ch.quantize(&boundaries)?.mutual_information();
        Ok(Self { boundaries, achieved_mi })
    }

    pub fn boundaries(&self) -> &[usize] {
        &self.boundaries
    }

    pub fn achieved_mi(&self) -> f64 {
        self.achieved_mi
    }

    /// Number of quantizer outputs `M`.
    pub fn outputs(&self) -> usize {
        self.boundaries.len() - 1
    }

    /// Output index for channel output `y` (binary search over boundaries).
    pub fn map(&self, y: usize) -> usize {
        self.boundaries[1..].partition_point(|&b| b <= y)
    }
}

/// Prefix and suffix sums of both rows; bin masses are read from whichever
/// side keeps the subtraction small so that tiny tail masses survive.
struct BinMasses {
    prior: [f64; 2],
    prefix: [Vec<f64>; 2],
    suffix: [Vec<f64>; 2],
}

impl BinMasses {
    fn new(ch: &BinaryInputDmc) -> Self {
        let n = ch.len();
        let mut prefix = [vec![0.0; n + 1], vec![0.0; n + 1]];
        let mut suffix = [vec![0.0; n + 1], vec![0.0; n + 1]];
        for x in 0..2 {
            for j in 0..n {
                prefix[x][j + 1] = prefix[x][j] + ch.p(j, x);
            }
            for j in (0..n).rev() {
                suffix[x][j] = suffix[x][j + 1] + ch.p(j, x);
            }
        }
        Self { prior: ch.prior(), prefix, suffix }
    }

    fn mass(&self, x: usize, i: usize, j: usize) -> f64 {
        let m = if self.prefix[x][j] <= self.suffix[x][i] {
            self.prefix[x][j] - self.prefix[x][i]
        } else {
            self.suffix[x][i] - self.suffix[x][j]
        };
        m.max(0.0)
    }

    /// MI contribution of the bin holding outputs `i..j`.
    fn cost(&self, i: usize, j: usize) -> f64 {
        output_mi_term(self.prior, self.mass(0, i, j), self.mass(1, i, j))
    }
}

/// Finds the SDQ with `m` outputs maximizing `I(X;Z)` for the channel's
/// current output labeling. Ties go to the smallest boundary index.
pub fn design_optimal_sdq(ch: &BinaryInputDmc, m: usize) -> Result<SequentialQuantizer> {
    design_with_work(ch, m).map(|(q, _)| q)
}

/// DP core; also reports the number of relaxations performed.
pub(crate) fn design_with_work(ch: &BinaryInputDmc, m: usize) -> Result<(SequentialQuantizer, u64)> {
    let n = ch.len();
    if m < 1 || m > n {
        return Err(Error::Parameter(format!("SDQ output count {m} must lie in 1..={n}")));
    }
    let masses = BinMasses::new(ch);

    // best[k][j]: max MI using k bins over the first j outputs
    let width = n + 1;
    let mut best = vec![f64::NEG_INFINITY; (m + 1) * width];
    let mut arg = vec![0u32; (m + 1) * width];
    best[0] = 0.0;
    let mut work = 0u64;

    for j in 1..=n {
        // layer k may end at j only if the remaining m-k bins fit after it
        let k_lo = 1.max((m + j).saturating_sub(n));
        if k_lo > m {
            continue;
        }
        for i in (k_lo - 1)..j {
            let k_hi = (i + 1).min(m);
            if k_hi < k_lo {
                continue;
            }
            let c = masses.cost(i, j);
            for k in k_lo..=k_hi {
                let prev = best[(k - 1) * width + i];
                if prev == f64::NEG_INFINITY {
                    continue;
                }
                work += 1;
                let cand = prev + c;
                let slot = k * width + j;
                if cand > best[slot] {
                    best[slot] = cand;
                    arg[slot] = i as u32;
                }
            }
        }
    }

    let mut boundaries = vec![0usize; m + 1];
    boundaries[m] = n;
    let mut j = n;
    for k in (1..=m).rev() {
        j = arg[k * width + j] as usize;
        boundaries[k - 1] = j;
    }
    debug_assert_eq!(boundaries[0], 0);
    let q = SequentialQuantizer::new(boundaries, ch)?;
    Ok((q, work))
}

fn binomial(n: u128, k: u128) -> u128 {
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) / (i + 1))
}

/// Exhaustive SDQ search: every placement of the `m - 1` inner boundaries.
/// Ties go to the lexicographically smallest boundary list.
pub fn brute_force_optimal_sdq(ch: &BinaryInputDmc, m: usize) -> Result<SequentialQuantizer> {
    let n = ch.len();
    if m < 1 || m > n {
        return Err(Error::Parameter(format!("SDQ output count {m} must lie in 1..={n}")));
    }
    let candidates = binomial(n as u128 - 1, m as u128 - 1);
    if candidates > BRUTE_FORCE_LIMIT {
        return Err(Error::GuardExceeded { candidates, limit: BRUTE_FORCE_LIMIT });
    }

    // inner boundaries as a combination of 1..n-1 in lexicographic order
    let inner = m - 1;
    let mut cut: Vec<usize> = (1..=inner).collect();
    let mut boundaries = vec![0usize; m + 1];
    boundaries[m] = n;
    let mut best: Option<(f64, Vec<usize>)> = None;
    loop {
        boundaries[1..m].copy_from_slice(&cut);
        check_boundaries(&boundaries, n)?;
        let mi = ch.quantize(&boundaries)?.mutual_information();
        if best.as_ref().is_none_or(|(b, _)| mi > *b) {
            best = Some((mi, boundaries.clone()));
        }
        // next combination
        let mut pos = inner;
        loop {
            if pos == 0 {
                let (mi, b) = best.expect("at least one candidate");
                return Ok(SequentialQuantizer { boundaries: b, achieved_mi: mi });
            }
            pos -= 1;
            if cut[pos] < n - 1 - (inner - 1 - pos) {
                cut[pos] += 1;
                for t in pos + 1..inner {
                    cut[t] = cut[t - 1] + 1;
                }
                break;
            }
        }
    }
}
