use crate::chanquant::map_to_symbol;
use crate::cn_design::cn_map_to_symbol;
use crate::de::DecoderSpec;
use crate::error::{Error, Result};
use crate::vn_design::vn_map_to_symbol;

use super::graph::TannerGraph;
use super::DecodeResult;

/// Channel symbol of every received value, by binary search over the
/// spec's thresholds.
pub fn quantize_channel_output(y: &[f64], spec: &DecoderSpec) -> Vec<u8> {
    y.iter().map(|&v| map_to_symbol(&spec.channel_boundaries, v) as u8).collect()
}

/// Edge messages after one decoding iteration.
#[derive(Debug)]
pub struct IterationTrace<'a> {
    pub iteration: usize,
    /// Check-to-variable symbols, indexed by edge.
    pub c2v: &'a [u8],
    /// Variable-to-check symbols for the next iteration, indexed by edge.
    pub v2c: &'a [u8],
    pub hard_bits: &'a [u8],
}

/// Fixed-point decoder executing a designed spec on a Tanner graph. Owns its
/// message buffers; create one per thread.
pub struct MimQbpDecoder<'a> {
    graph: &'a TannerGraph,
    spec: &'a DecoderSpec,
    v2c: Vec<u8>,
    c2v: Vec<u8>,
    hard: Vec<u8>,
    phi_c: Vec<i32>,
}

impl<'a> MimQbpDecoder<'a> {
    pub fn new(graph: &'a TannerGraph, spec: &'a DecoderSpec) -> Result<Self> {
        let want = (spec.config.d_v, spec.config.d_c);
        match graph.regular_degrees() {
            Some(d) if d == want => {}
            Some(d) => {
                return Err(Error::Incompatible(format!(
                    "code is ({}, {})-regular but the spec was designed for ({}, {})",
                    d.0, d.1, want.0, want.1
                )))
            }
            None => return Err(Error::Incompatible("code is not regular".into())),
        }
        if spec.config.l_size > 256 || spec.config.r_size > 256 || spec.config.s_size > 256 {
            return Err(Error::Incompatible("alphabets above 256 symbols are not supported".into()));
        }
        let e = graph.edge_count();
        Ok(MimQbpDecoder {
            graph,
            spec,
            v2c: vec![0; e],
            c2v: vec![0; e],
            hard: vec![0; graph.n()],
            phi_c: Vec::with_capacity(spec.config.d_c),
        })
    }

    /// Decodes channel symbols with the spec's iteration budget.
    pub fn decode(&mut self, l: &[u8]) -> DecodeResult {
        self.decode_traced(l, self.spec.config.max_iterations, |_| {})
    }

    /// Decodes with an explicit iteration budget, reporting the edge
    /// messages of every iteration to `observer`.
    pub fn decode_traced(
        &mut self,
        l: &[u8],
        max_iterations: usize,
        mut observer: impl FnMut(&IterationTrace),
    ) -> DecodeResult {
        let g = self.graph;
        let cfg = &self.spec.config;
        assert_eq!(l.len(), g.n(), "one channel symbol per code bit");
        let cn_limit = (1i32 << (cfg.q_c - 1)) - 1;
        let vn_limit = (1i32 << (cfg.q_v - 1)) - 1;

        for i in 0..g.n() {
            let r = self.spec.initial_r_map[l[i] as usize] as u8;
            for &e in g.vn_edges(i) {
                self.v2c[e as usize] = r;
            }
        }

        // the last record may only be repeated if its output alphabet feeds
        // its own input
        let tail = self.spec.iterations.last().expect("spec has records");
        let max_iterations = if tail.phi_c.len() == tail.gamma_v.len() + 1 {
            max_iterations.max(1)
        } else {
            max_iterations.clamp(1, self.spec.iterations.len())
        };

        for t in 1..=max_iterations {
            let rec = self.spec.record(t);

            for j in 0..g.m() {
                let edges = g.cn_edges(j);
                self.phi_c.clear();
                let mut sign = 1i32;
                let mut total = 0i32;
                for e in edges.clone() {
                    let a = rec.phi_c[self.v2c[e] as usize];
                    sign *= a.signum();
                    total += a.abs();
                    self.phi_c.push(a);
                }
                debug_assert!(total <= cn_limit, "check-node sum {total} exceeds {} bits", cfg.q_c);
                for (k, e) in edges.enumerate() {
                    let own = self.phi_c[k];
                    let phi = sign * own.signum() * (total - own.abs());
                    self.c2v[e] = cn_map_to_symbol(phi, &rec.gamma_c) as u8;
                }
            }

            for i in 0..g.n() {
                let edges = g.vn_edges(i);
                let mut total = rec.phi_ch[l[i] as usize];
                for &e in edges {
                    total += rec.phi_v[self.c2v[e as usize] as usize];
                }
                debug_assert!(total.abs() <= vn_limit, "variable-node sum {total} exceeds {} bits", cfg.q_v);
                self.hard[i] = u8::from(total < rec.gamma_e);
                for &e in edges {
                    let e = e as usize;
                    let phi = total - rec.phi_v[self.c2v[e] as usize];
                    self.v2c[e] = vn_map_to_symbol(phi, &rec.gamma_v) as u8;
                }
            }

            observer(&IterationTrace { iteration: t, c2v: &self.c2v, v2c: &self.v2c, hard_bits: &self.hard });

            if g.syndrome_is_zero(&self.hard) {
                return DecodeResult { hard_bits: self.hard.clone(), iterations_used: t, converged: true };
            }
        }
        DecodeResult { hard_bits: self.hard.clone(), iterations_used: max_iterations, converged: false }
    }
}

/// One-shot decode; see [`MimQbpDecoder`].
pub fn decode_mim_qbp(graph: &TannerGraph, spec: &DecoderSpec, l: &[u8]) -> Result<DecodeResult> {
    Ok(MimQbpDecoder::new(graph, spec)?.decode(l))
}
