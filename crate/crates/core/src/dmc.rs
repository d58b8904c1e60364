//! Binary-input discrete memoryless channels.
//!
//! A [`BinaryInputDmc`] holds an input prior and the transition pmfs
//! `P(y|0)`, `P(y|1)` for every output. Every quantizer in the crate (channel
//! output quantization as well as the check- and variable-node threshold
//! sets) is designed against one of these.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::sdq::SequentialQuantizer;

/// Tolerance for row sums of a user-supplied pmf.
pub const PMF_TOL: f64 = 1e-12;

/// Probabilities below this are clamped before taking logarithms.
pub const LOG_FLOOR: f64 = 1e-300;

/// Binary-input DMC with transition probabilities stored per output as
/// `[P(y|0), P(y|1)]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BinaryInputDmc {
    prior: [f64; 2],
    transitions: Vec<[f64; 2]>,
}

impl BinaryInputDmc {
    /// Builds a channel, checking that both rows and the prior are pmfs within
    /// [`PMF_TOL`].
    pub fn new(prior: [f64; 2], transitions: Vec<[f64; 2]>) -> Result<Self> {
        Self::validated(prior, transitions, PMF_TOL)
    }

    /// Uniform-prior channel.
    pub fn uniform(transitions: Vec<[f64; 2]>) -> Result<Self> {
        Self::new([0.5, 0.5], transitions)
    }

    /// Builds a uniform-prior channel from the two rows `P(.|0)` and `P(.|1)`.
    pub fn from_rows(row0: &[f64], row1: &[f64]) -> Result<Self> {
        if row0.len() != row1.len() {
            return Err(Error::InvalidPmf(format!("row lengths differ: {} vs {}", row0.len(), row1.len())));
        }
        Self::uniform(row0.iter().zip(row1).map(|(&a, &b)| [a, b]).collect())
    }

    /// Like [`BinaryInputDmc::uniform`] but tolerates accumulated rounding
    /// error (rows within `1e-9` of unity) and renormalizes each row exactly.
    /// Used for pmfs produced by long chains of floating-point sums.
    pub fn uniform_renormalized(mut transitions: Vec<[f64; 2]>) -> Result<Self> {
        for x in 0..2 {
            let sum: f64 = transitions.iter().map(|p| p[x]).sum();
            if !(sum.is_finite() && (sum - 1.0).abs() <= 1e-9) {
                return Err(Error::InvalidPmf(format!("row {x} sums to {sum}")));
            }
            for p in transitions.iter_mut() {
                p[x] /= sum;
            }
        }
        Self::validated([0.5, 0.5], transitions, 1e-12)
    }

    fn validated(prior: [f64; 2], transitions: Vec<[f64; 2]>, tol: f64) -> Result<Self> {
        if transitions.is_empty() {
            return Err(Error::InvalidPmf("channel has no outputs".into()));
        }
        if prior.iter().any(|p| !p.is_finite() || *p < 0.0) || (prior[0] + prior[1] - 1.0).abs() > tol {
            return Err(Error::InvalidPmf(format!("bad prior {prior:?}")));
        }
        for (j, p) in transitions.iter().enumerate() {
            if p.iter().any(|v| !v.is_finite() || *v < 0.0) {
                return Err(Error::InvalidPmf(format!("output {j} has entry {p:?}")));
            }
        }
        for x in 0..2 {
            let sum: f64 = transitions.iter().map(|p| p[x]).sum();
            if (sum - 1.0).abs() > tol {
                return Err(Error::InvalidPmf(format!("row {x} sums to {sum}")));
            }
        }
        Ok(Self { prior, transitions })
    }

    pub fn prior(&self) -> [f64; 2] {
        self.prior
    }

    pub fn transitions(&self) -> &[[f64; 2]] {
        &self.transitions
    }

    pub fn len(&self) -> usize {
        self.transitions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transitions.is_empty()
    }

    /// `P(y_j|x)`.
    pub fn p(&self, j: usize, x: usize) -> f64 {
        self.transitions[j][x]
    }

    /// `I(X;Y)` in bits.
    pub fn mutual_information(&self) -> f64 {
        self.transitions.iter().map(|&[p0, p1]| output_mi_term(self.prior, p0, p1)).sum()
    }

    /// Log-likelihood ratio `ln P(y|0)/P(y|1)` of every output, with the
    /// probabilities clamped at [`LOG_FLOOR`].
    pub fn llrs(&self) -> Vec<f64> {
        self.transitions.iter().map(|&[p0, p1]| clamped_llr(p0, p1)).collect()
    }

    /// Channel obtained by merging contiguous output runs delimited by
    /// `boundaries` (`0 = b_0 < b_1 < ... < b_M = N`).
    pub fn quantize(&self, boundaries: &[usize]) -> Result<BinaryInputDmc> {
        check_boundaries(boundaries, self.len())?;
        let outputs = boundaries
            .windows(2)
            .map(|w| {
                let mut acc = [0.0; 2];
                for p in &self.transitions[w[0]..w[1]] {
                    acc[0] += p[0];
                    acc[1] += p[1];
                }
                acc
            })
            .collect();
        Ok(BinaryInputDmc { prior: self.prior, transitions: outputs })
    }
}

/// Contribution of one output with masses `(p0, p1)` to `I(X;Y)` in bits;
/// `0 log 0 := 0`.
pub fn output_mi_term(prior: [f64; 2], p0: f64, p1: f64) -> f64 {
    let joint0 = prior[0] * p0;
    let joint1 = prior[1] * p1;
    let py = joint0 + joint1;
    let mut acc = 0.0;
    if joint0 > 0.0 {
        acc += joint0 * (p0 / py).log2();
    }
    if joint1 > 0.0 {
        acc += joint1 * (p1 / py).log2();
    }
    acc
}

pub(crate) fn clamped_llr(p0: f64, p1: f64) -> f64 {
    p0.max(LOG_FLOOR).ln() - p1.max(LOG_FLOOR).ln()
}

pub(crate) fn check_boundaries(boundaries: &[usize], outputs: usize) -> Result<()> {
    if boundaries.len() < 2 {
        return Err(Error::Parameter("quantizer needs at least two boundaries".into()));
    }
    if boundaries[0] != 0 {
        return Err(Error::BoundaryOutOfRange { index: boundaries[0], outputs });
    }
    let last = boundaries[boundaries.len() - 1];
    if last != outputs {
        return Err(Error::BoundaryOutOfRange { index: last, outputs });
    }
    if let Some(w) = boundaries.windows(2).find(|w| w[0] >= w[1]) {
        return Err(Error::Parameter(format!("boundaries not strictly increasing at {} -> {}", w[0], w[1])));
    }
    Ok(())
}

/// A channel whose outputs are listed in non-increasing LLR order with no two
/// outputs sharing an LLR.
#[derive(Debug, Clone, PartialEq)]
pub struct SortedDmc {
    channel: BinaryInputDmc,
    merge_map: Vec<Option<usize>>,
}

impl SortedDmc {
    pub fn channel(&self) -> &BinaryInputDmc {
        &self.channel
    }

    /// Original output index to sorted/merged index; `None` for outputs with
    /// zero probability under both inputs, which are dropped.
    pub fn merge_map(&self) -> &[Option<usize>] {
        &self.merge_map
    }

    pub fn len(&self) -> usize {
        self.channel.len()
    }

    pub fn is_empty(&self) -> bool {
        self.channel.is_empty()
    }

    pub fn into_channel(self) -> BinaryInputDmc {
        self.channel
    }
}

impl std::ops::Deref for SortedDmc {
    type Target = BinaryInputDmc;

    fn deref(&self) -> &BinaryInputDmc {
        &self.channel
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct LlrKey {
    // 0: P(y|1) = 0 (infinite LLR), 1: finite, 2: P(y|0) = 0
    class: u8,
    llr: f64,
}

impl LlrKey {
    fn of(p0: f64, p1: f64) -> Self {
        if p1 == 0.0 {
            LlrKey { class: 0, llr: f64::INFINITY }
        } else if p0 == 0.0 {
            LlrKey { class: 2, llr: f64::NEG_INFINITY }
        } else {
            LlrKey { class: 1, llr: clamped_llr(p0, p1) }
        }
    }

    /// Equal up to rounding in the log ratio.
    fn same_as(&self, other: &Self) -> bool {
        self.class == other.class
            && (self.class != 1 || (self.llr - other.llr).abs() <= 1e-12 * self.llr.abs().max(1.0))
    }

    /// Descending-LLR order.
    fn cmp_desc(&self, other: &Self) -> Ordering {
        self.class.cmp(&other.class).then_with(|| other.llr.partial_cmp(&self.llr).unwrap_or(Ordering::Equal))
    }
}

/// Relabels outputs in descending-LLR order, merging outputs of equal LLR
/// and dropping outputs that are impossible under both inputs. Mutual
/// information is preserved.
pub fn sort_and_merge(ch: &BinaryInputDmc) -> SortedDmc {
    let mut live: Vec<(usize, LlrKey)> = ch
        .transitions
        .iter()
        .enumerate()
        .filter(|(_, p)| p[0] > 0.0 || p[1] > 0.0)
        .map(|(j, p)| (j, LlrKey::of(p[0], p[1])))
        .collect();
    // stable: equal keys keep their original relative order
    live.sort_by(|a, b| a.1.cmp_desc(&b.1));

    let mut merge_map = vec![None; ch.len()];
    let mut outputs: Vec<[f64; 2]> = Vec::with_capacity(live.len());
    let mut last_key: Option<LlrKey> = None;
    for (j, key) in live {
        let p = ch.transitions[j];
        match last_key {
            Some(k) if k.same_as(&key) => {
                let tail = outputs.last_mut().expect("merge target exists");
                tail[0] += p[0];
                tail[1] += p[1];
            }
            _ => {
                outputs.push(p);
                last_key = Some(key);
            }
        }
        merge_map[j] = Some(outputs.len() - 1);
    }
    SortedDmc { channel: BinaryInputDmc { prior: ch.prior, transitions: outputs }, merge_map }
}

/// Degrades a sorted channel through an SDQ: `P(z|x) = sum over Q^-1(z) of P(y|x)`.
pub fn compose_quantizer(ch: &SortedDmc, q: &SequentialQuantizer) -> Result<BinaryInputDmc> {
    ch.channel.quantize(q.boundaries())
}
