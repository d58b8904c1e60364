//! BPSK over AWGN as a finely discretized DMC, and its MI-optimal quantization
//! to the decoder's channel alphabet.
//!
//! Symbol `x = 0` is sent as `+1` and `x = 1` as `-1`. The received value is
//! partitioned into `fine_bins` uniform cells on `[-clip, clip]` plus two tail
//! cells. Channel symbols are labeled so that `l = 0` is the most reliable
//! zero, i.e. the largest `y`.

use statrs::function::erf::erfc;

use crate::dmc::{sort_and_merge, BinaryInputDmc, SortedDmc};
use crate::error::{Error, Result};
use crate::sdq::{design_optimal_sdq, SequentialQuantizer};

pub const DEFAULT_FINE_BINS: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AwgnDesign {
    pub sigma_d: f64,
    pub fine_bins: usize,
    pub clip: f64,
    pub l_size: usize,
}

impl AwgnDesign {
    /// Default discretization: 2000 cells over `[-(1 + 6 sigma), 1 + 6 sigma]`.
    pub fn new(sigma_d: f64, l_size: usize) -> Self {
        Self { sigma_d, fine_bins: DEFAULT_FINE_BINS, clip: 1.0 + 6.0 * sigma_d, l_size }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma_d > 0.0 && self.sigma_d.is_finite()) {
            return Err(Error::Parameter(format!("sigma_d must be positive, got {}", self.sigma_d)));
        }
        if self.l_size < 2 {
            return Err(Error::Parameter("channel alphabet needs at least 2 symbols".into()));
        }
        if self.fine_bins < 16 * self.l_size {
            return Err(Error::Parameter(format!(
                "fine_bins {} must be at least 16 * |L| = {}",
                self.fine_bins,
                16 * self.l_size
            )));
        }
        if !(self.clip > 1.0 && self.clip.is_finite()) {
            return Err(Error::Parameter(format!("clip must exceed 1, got {}", self.clip)));
        }
        Ok(())
    }

    /// Interior cell edges in ascending order: `-clip, ..., clip`.
    pub fn cell_edges(&self) -> Vec<f64> {
        let step = 2.0 * self.clip / self.fine_bins as f64;
        (0..=self.fine_bins).map(|i| -self.clip + step * i as f64).collect()
    }

    pub fn cell_width(&self) -> f64 {
        2.0 * self.clip / self.fine_bins as f64
    }

    /// Ascending-y cell holding `y`; a value on an edge belongs to the cell
    /// below it.
    pub fn cell_of(&self, edges: &[f64], y: f64) -> usize {
        edges.partition_point(|&e| e < y)
    }
}

/// `P(a < Y <= b)` for `Y ~ N(mean, sigma^2)`, evaluated on whichever tail
/// avoids cancellation.
pub(crate) fn gaussian_interval(a: f64, b: f64, mean: f64, sigma: f64) -> f64 {
    let s = sigma * std::f64::consts::SQRT_2;
    let upper_tail = |t: f64| 0.5 * erfc((t - mean) / s);
    let lower_tail = |t: f64| 0.5 * erfc((mean - t) / s);
    let p = if a >= mean {
        upper_tail(a) - upper_tail(b)
    } else if b <= mean {
        lower_tail(b) - lower_tail(a)
    } else {
        1.0 - lower_tail(a) - upper_tail(b)
    };
    p.max(0.0)
}

/// Raw cell probabilities in ascending-y order, symmetrized so that
/// `P(cell k | 0) == P(cell N-1-k | 1)` holds bit for bit.
fn fine_cells(design: &AwgnDesign) -> Vec<[f64; 2]> {
    let edges = design.cell_edges();
    let n = design.fine_bins + 2;
    let bounds = |k: usize| -> (f64, f64) {
        match k {
            0 => (f64::NEG_INFINITY, edges[0]),
            k if k == n - 1 => (edges[design.fine_bins], f64::INFINITY),
            k => (edges[k - 1], edges[k]),
        }
    };
    let raw: Vec<[f64; 2]> = (0..n)
        .map(|k| {
            let (a, b) = bounds(k);
            [gaussian_interval(a, b, 1.0, design.sigma_d), gaussian_interval(a, b, -1.0, design.sigma_d)]
        })
        .collect();
    (0..n)
        .map(|k| {
            let m = n - 1 - k;
            [0.5 * (raw[k][0] + raw[m][1]), 0.5 * (raw[k][1] + raw[m][0])]
        })
        .collect()
}

/// Fine DMC of the BPSK-AWGN channel in descending-LLR order.
pub fn discretize_bpsk_awgn(design: &AwgnDesign) -> Result<SortedDmc> {
    design.validate()?;
    let cells = fine_cells(design);
    let ch = BinaryInputDmc::uniform_renormalized(cells)?;
    Ok(sort_and_merge(&ch))
}

/// Channel alphabet: the quantized pmf `P(l|x)` together with the thresholds
/// on the received value that realize it.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelAlphabet {
    pmf: BinaryInputDmc,
    boundaries: Vec<f64>,
    fine_quantizer: SequentialQuantizer,
}

impl ChannelAlphabet {
    pub fn pmf(&self) -> &BinaryInputDmc {
        &self.pmf
    }

    /// `|L| - 1` thresholds on `y`, strictly decreasing.
    pub fn boundaries(&self) -> &[f64] {
        &self.boundaries
    }

    /// SDQ applied to the fine channel.
    pub fn fine_quantizer(&self) -> &SequentialQuantizer {
        &self.fine_quantizer
    }

    /// Channel symbol for received value `y`.
    pub fn map(&self, y: f64) -> usize {
        map_to_symbol(&self.boundaries, y)
    }
}

/// Symbol index for `y` against strictly decreasing thresholds. A value equal
/// to a threshold goes to the lower-LLR symbol.
pub fn map_to_symbol(boundaries: &[f64], y: f64) -> usize {
    boundaries.partition_point(|&b| b >= y)
}

/// Designs `P(l|x)` by applying the MI-optimal SDQ with `|L|` outputs to the
/// fine channel.
pub fn design_channel_alphabet(design: &AwgnDesign) -> Result<ChannelAlphabet> {
    let fine = discretize_bpsk_awgn(design)?;
    alphabet_from_fine(design, &fine, design.l_size)
}

pub(crate) fn alphabet_from_fine(design: &AwgnDesign, fine: &SortedDmc, l_size: usize) -> Result<ChannelAlphabet> {
    let q = design_optimal_sdq(fine.channel(), l_size)?;
    let pmf = fine.quantize(q.boundaries())?;

    // lower y-edge of every sorted output
    let edges = design.cell_edges();
    let mut lower = vec![f64::INFINITY; fine.len()];
    for (cell, slot) in fine.merge_map().iter().enumerate() {
        if let Some(k) = *slot {
            let lo = if cell == 0 { f64::NEG_INFINITY } else { edges[cell - 1] };
            lower[k] = lower[k].min(lo);
        }
    }
    let boundaries: Vec<f64> = q.boundaries()[1..l_size].iter().map(|&b| lower[b - 1]).collect();
    if boundaries.windows(2).any(|w| w[0] <= w[1]) || boundaries.iter().any(|b| !b.is_finite()) {
        return Err(Error::Parameter(format!("channel quantizer produced non-monotone thresholds {boundaries:?}")));
    }
    Ok(ChannelAlphabet { pmf, boundaries, fine_quantizer: q })
}
