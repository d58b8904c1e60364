use super::graph::TannerGraph;
use super::DecodeResult;

const LLR_CLAMP: f64 = 50.0;
const TANH_CLAMP: f64 = 1.0 - 1e-15;

/// Extrinsic sum-product check update: output `k` is
/// `2 atanh(prod_{i != k} tanh(m_i / 2))`, using prefix and suffix products.
pub fn bp_check_update(inputs: &[f64], out: &mut [f64]) {
    let n = inputs.len();
    debug_assert_eq!(out.len(), n);
    let t: Vec<f64> = inputs.iter().map(|&m| (0.5 * m.clamp(-LLR_CLAMP, LLR_CLAMP)).tanh()).collect();
    let mut prefix = 1.0;
    for k in 0..n {
        out[k] = prefix;
        prefix *= t[k];
    }
    let mut suffix = 1.0;
    for k in (0..n).rev() {
        let p = (out[k] * suffix).clamp(-TANH_CLAMP, TANH_CLAMP);
        out[k] = 2.0 * p.atanh();
        suffix *= t[k];
    }
}

/// Floating-point belief propagation with channel LLRs `2y / sigma^2`,
/// flooding schedule and syndrome stop.
pub struct BpDecoder<'a> {
    graph: &'a TannerGraph,
    v2c: Vec<f64>,
    c2v: Vec<f64>,
    llr: Vec<f64>,
    hard: Vec<u8>,
    scratch_in: Vec<f64>,
    scratch_out: Vec<f64>,
}

impl<'a> BpDecoder<'a> {
    pub fn new(graph: &'a TannerGraph) -> Self {
        let e = graph.edge_count();
        BpDecoder {
            graph,
            v2c: vec![0.0; e],
            c2v: vec![0.0; e],
            llr: vec![0.0; graph.n()],
            hard: vec![0; graph.n()],
            scratch_in: Vec::new(),
            scratch_out: Vec::new(),
        }
    }

    pub fn decode(&mut self, y: &[f64], sigma: f64, max_iterations: usize) -> DecodeResult {
        let g = self.graph;
        assert_eq!(y.len(), g.n(), "one received value per code bit");
        let scale = 2.0 / (sigma * sigma);
        for i in 0..g.n() {
            self.llr[i] = (scale * y[i]).clamp(-LLR_CLAMP, LLR_CLAMP);
            for &e in g.vn_edges(i) {
                self.v2c[e as usize] = self.llr[i];
            }
        }
        let max_iterations = max_iterations.max(1);
        for t in 1..=max_iterations {
            for j in 0..g.m() {
                let edges = g.cn_edges(j);
                self.scratch_in.clear();
                self.scratch_in.extend_from_slice(&self.v2c[edges.clone()]);
                self.scratch_out.resize(edges.len(), 0.0);
                bp_check_update(&self.scratch_in, &mut self.scratch_out);
                self.c2v[edges].copy_from_slice(&self.scratch_out);
            }
            for i in 0..g.n() {
                let edges = g.vn_edges(i);
                let total = self.llr[i] + edges.iter().map(|&e| self.c2v[e as usize]).sum::<f64>();
                self.hard[i] = u8::from(total < 0.0);
                for &e in edges {
                    let e = e as usize;
                    self.v2c[e] = (total - self.c2v[e]).clamp(-LLR_CLAMP, LLR_CLAMP);
                }
            }
            if g.syndrome_is_zero(&self.hard) {
                return DecodeResult { hard_bits: self.hard.clone(), iterations_used: t, converged: true };
            }
        }
        DecodeResult { hard_bits: self.hard.clone(), iterations_used: max_iterations, converged: false }
    }
}

/// One-shot decode; see [`BpDecoder`].
pub fn decode_bp_float(graph: &TannerGraph, y: &[f64], sigma: f64, max_iterations: usize) -> DecodeResult {
    BpDecoder::new(graph).decode(y, sigma, max_iterations)
}
