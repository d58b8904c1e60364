use mimqbp::codec::{
    bp_check_update, decode_bp_float, parse_alist, peg_regular, quantize_channel_output, MimQbpDecoder, TannerGraph,
};
use mimqbp::de::{run_design, DecoderSpec, DesignConfig};
use mimqbp::domain::succ;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn spec_36(sigma: f64, iters: usize) -> DecoderSpec {
    run_design(&DesignConfig::with_bits(3, 6, 3, 8, 8, sigma, iters)).unwrap()
}

/// Syndrome by direct row scan.
fn parity_ok(g: &TannerGraph, bits: &[u8]) -> bool {
    (0..g.m()).all(|j| g.check_neighbors(j).map(|v| bits[v]).fold(0, |a, b| a ^ b) == 0)
}

#[test]
fn noiseless_frame_decodes_in_one_iteration() {
    let g = peg_regular(96, 3, 6, 5).unwrap();
    let spec = spec_36(0.8, 10);
    let l = quantize_channel_output(&vec![1.0; 96], &spec);
    let r = MimQbpDecoder::new(&g, &spec).unwrap().decode(&l);
    assert!(r.converged);
    assert_eq!(r.iterations_used, 1);
    assert_eq!(r.bit_errors(), 0);
}

#[test]
fn channel_quantization_extremes_and_ties() {
    let spec = spec_36(0.8, 1);
    let b = &spec.channel_boundaries;
    let last = spec.config.l_size - 1;
    assert_eq!(quantize_channel_output(&[10.0, -10.0], &spec), vec![0, last as u8]);
    for (k, &t) in b.iter().enumerate() {
        let got = quantize_channel_output(&[t, t + 1e-9, t - 1e-9], &spec);
        assert_eq!(got, vec![k as u8 + 1, k as u8, k as u8 + 1]);
        // linear-scan oracle
        for y in [t, t + 1e-9, t - 1e-9] {
            let want = b.iter().filter(|&&x| x >= y).count() as u8;
            assert_eq!(quantize_channel_output(&[y], &spec)[0], want);
        }
    }
}

#[test]
fn updates_match_exclude_self_oracle() {
    let g = peg_regular(60, 3, 6, 2).unwrap();
    let spec = spec_36(0.9, 8);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let y: Vec<f64> = (0..g.n()).map(|_| 1.0 + 0.95 * rng.sample::<f64, _>(rand_distr::StandardNormal)).collect();
    let l = quantize_channel_output(&y, &spec);
    let checks = g.edge_checks();

    let mut prev_v2c: Vec<u8> =
        (0..g.edge_count()).map(|e| spec.initial_r_map[l[g.edge_vn(e)] as usize] as u8).collect();
    let mut seen = 0;
    let mut dec = MimQbpDecoder::new(&g, &spec).unwrap();
    let res = dec.decode_traced(&l, 8, |tr| {
        seen += 1;
        let rec = spec.record(tr.iteration);
        for e in 0..g.edge_count() {
            let j = checks[e];
            let mut sign = 1;
            let mut mag = 0;
            for f in g.cn_edges(j).filter(|&f| f != e) {
                let a = rec.phi_c[prev_v2c[f] as usize];
                sign *= if a < 0 { -1 } else { 1 };
                mag += a.abs();
            }
            let phi = sign * mag;
            let s = rec.gamma_c.iter().filter(|&&gm| succ(gm, phi)).count();
            assert_eq!(tr.c2v[e] as usize, s, "check message on edge {e}");
        }
        for i in 0..g.n() {
            let total: i32 = rec.phi_ch[l[i] as usize]
                + g.vn_edges(i).iter().map(|&e| rec.phi_v[tr.c2v[e as usize] as usize]).sum::<i32>();
            assert_eq!(tr.hard_bits[i], u8::from(total < rec.gamma_e));
            for &e in g.vn_edges(i) {
                let phi = total - rec.phi_v[tr.c2v[e as usize] as usize];
                let r = rec.gamma_v.iter().filter(|&&gm| gm > phi).count();
                assert_eq!(tr.v2c[e as usize] as usize, r, "variable message on edge {e}");
            }
        }
        prev_v2c = tr.v2c.to_vec();
    });
    assert_eq!(seen, res.iterations_used);
}

#[test]
fn stops_at_first_zero_syndrome() {
    let g = peg_regular(96, 3, 6, 7).unwrap();
    let spec = spec_36(0.85, 30);
    let mut dec = MimQbpDecoder::new(&g, &spec).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for sigma in [0.6, 0.8, 1.1, 1.6] {
        for _ in 0..20 {
            let y: Vec<f64> =
                (0..g.n()).map(|_| 1.0 + sigma * rng.sample::<f64, _>(rand_distr::StandardNormal)).collect();
            let l = quantize_channel_output(&y, &spec);
            let mut syndromes = Vec::new();
            let r = dec.decode_traced(&l, 30, |tr| syndromes.push(parity_ok(&g, tr.hard_bits)));
            assert_eq!(syndromes.len(), r.iterations_used);
            let first = syndromes.iter().position(|&ok| ok);
            match first {
                Some(t) => {
                    assert!(r.converged);
                    assert_eq!(t + 1, r.iterations_used);
                    assert!(parity_ok(&g, &r.hard_bits));
                }
                None => {
                    assert!(!r.converged);
                    assert_eq!(r.iterations_used, 30);
                }
            }
        }
    }
}

#[test]
fn incompatible_degrees_are_rejected() {
    let g = peg_regular(48, 2, 4, 0).unwrap();
    let spec = spec_36(0.8, 1);
    assert!(MimQbpDecoder::new(&g, &spec).is_err());
}

#[test]
fn bp_check_rule_matches_probability_convolution() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..500 {
        let m: Vec<f64> = (0..3).map(|_| rng.random_range(-8.0..8.0)).collect();
        let mut out = vec![0.0; 3];
        bp_check_update(&m, &mut out);
        for k in 0..3 {
            // P(xor of the other bits is 0)
            let mut p_even = 1.0;
            for (i, &mi) in m.iter().enumerate() {
                if i == k {
                    continue;
                }
                let p0 = 1.0 / (1.0 + (-mi).exp());
                p_even = p_even * p0 + (1.0 - p_even) * (1.0 - p0);
            }
            let want = (p_even / (1.0 - p_even)).ln();
            assert!((out[k] - want).abs() < 1e-10, "{} vs {want}", out[k]);
        }
    }
}

fn codewords(g: &TannerGraph) -> Vec<Vec<u8>> {
    let n = g.n();
    (0u32..1 << n)
        .map(|w| (0..n).map(|i| ((w >> i) & 1) as u8).collect::<Vec<u8>>())
        .filter(|c| parity_ok(g, c))
        .collect()
}

fn ml_decode(words: &[Vec<u8>], y: &[f64]) -> Vec<u8> {
    let metric = |c: &Vec<u8>| -> f64 { c.iter().zip(y).map(|(&b, &v)| if b == 0 { v } else { -v }).sum() };
    words.iter().max_by(|a, b| metric(a).total_cmp(&metric(b))).unwrap().clone()
}

#[test]
fn bp_agrees_with_ml_on_single_weak_flips() {
    let g = peg_regular(12, 3, 6, 4).unwrap();
    let words = codewords(&g);
    for c in &words {
        for i in 0..g.n() {
            let mut y: Vec<f64> = c.iter().map(|&b| if b == 0 { 1.0 } else { -1.0 }).collect();
            y[i] = -0.5 * y[i];
            let ml = ml_decode(&words, &y);
            assert_eq!(&ml, c);
            let r = decode_bp_float(&g, &y, 0.8, 20);
            assert!(r.converged);
            assert_eq!(r.hard_bits, ml, "codeword {c:?}, weak position {i}");
        }
    }
}

fn small_24() -> TannerGraph {
    TannerGraph::from_checks(8, &[vec![0, 1, 2, 3], vec![4, 5, 6, 7], vec![0, 2, 4, 6], vec![1, 3, 5, 7]]).unwrap()
}

#[test]
fn bp_is_symmetric_under_codeword_flips() {
    let g = small_24();
    let words = codewords(&g);
    assert_eq!(words.len(), 1 << 5);
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..50 {
        let y: Vec<f64> = (0..8).map(|_| 1.0 + 0.9 * rng.sample::<f64, _>(rand_distr::StandardNormal)).collect();
        let base = decode_bp_float(&g, &y, 0.9, 20);
        for c in &words {
            let yc: Vec<f64> = y.iter().zip(c).map(|(&v, &b)| if b == 0 { v } else { -v }).collect();
            let r = decode_bp_float(&g, &yc, 0.9, 20);
            let back: Vec<u8> = r.hard_bits.iter().zip(c).map(|(&h, &b)| h ^ b).collect();
            assert_eq!(back, base.hard_bits);
            assert_eq!(r.iterations_used, base.iterations_used);
        }
    }
}

#[test]
fn large_peg_code_round_trips_through_alist() {
    let g = peg_regular(8000, 3, 6, 0).unwrap();
    assert_eq!(g.regular_degrees(), Some((3, 6)));
    let text = g.to_alist();
    let back = parse_alist(&text).unwrap();
    assert_eq!(back, g);
    assert_eq!(back.m(), 4000);
    assert!((back.design_rate() - 0.5).abs() < 1e-15);
}

#[test]
fn alist_cross_reference_errors_name_the_edge() {
    let text = "3 2\n1 3\n1 1 1\n3 1\n1\n1\n2\n1 2 3\n1\n";
    match parse_alist(text) {
        Err(mimqbp::Error::Alist { line, msg }) => {
            assert_eq!(line, 7);
            assert!(msg.contains("column 3, row 2"), "{msg}");
        }
        other => panic!("expected an alist error, got {other:?}"),
    }
}
