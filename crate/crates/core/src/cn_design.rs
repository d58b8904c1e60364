//! Check-node design: the reconstruction function `phi_c`, the alphabet of
//! combined values with its pmf, and the threshold set that quantizes it.

use log::{debug, warn};

use crate::dmc::BinaryInputDmc;
use crate::domain::{sort_merge, succ, succ_cmp, Domain};
use crate::error::{Error, Result};
use crate::sdq::{design_optimal_sdq, BRUTE_FORCE_LIMIT};

const MASS_FLOOR: f64 = 1e-300;

/// `g(r) = P(0|r) - P(1|r)` under a uniform prior; `None` for symbols that
/// never occur.
pub fn cn_g(pmf: &BinaryInputDmc) -> Vec<Option<f64>> {
    pmf.transitions()
        .iter()
        .map(|&[p0, p1]| {
            let s = p0 + p1;
            if s > 0.0 {
                Some(((p0 - p1) / s).clamp(-1.0, 1.0))
            } else {
                None
            }
        })
        .collect()
}

/// Real-valued optimal check-node reconstruction.
#[derive(Debug, Clone, PartialEq)]
pub struct PhiCStar {
    pub values: Vec<f64>,
    pub epsilon: f64,
}

fn sgn(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Smallest gap between distinct `log|g(r)|` of the same sign over all
/// `r in R^(d_c - 1)`, or `None` when no two such values differ.
fn min_log_gap(g: &[Option<f64>], d_c: usize) -> Result<Option<f64>> {
    let live: Vec<f64> = g.iter().flatten().copied().collect();
    let dim = d_c - 1;
    let total = (live.len() as u128).checked_pow(dim as u32).unwrap_or(u128::MAX);
    if total > BRUTE_FORCE_LIMIT {
        return Err(Error::GuardExceeded { candidates: total, limit: BRUTE_FORCE_LIMIT });
    }
    let mut pos = Vec::new();
    let mut neg = Vec::new();
    let mut idx = vec![0usize; dim];
    loop {
        let prod: f64 = idx.iter().map(|&i| live[i]).product();
        if prod > 0.0 {
            pos.push(prod.ln());
        } else if prod < 0.0 {
            neg.push((-prod).ln());
        }
        let mut k = 0;
        while k < dim {
            idx[k] += 1;
            if idx[k] < live.len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
        if k == dim {
            break;
        }
    }
    let mut gap: Option<f64> = None;
    for mut logs in [pos, neg] {
        logs.sort_by(f64::total_cmp);
        for w in logs.windows(2) {
            let d = w[1] - w[0];
            if d > 1e-12 * w[1].abs().max(1.0) {
                gap = Some(gap.map_or(d, |g: f64| g.min(d)));
            }
        }
    }
    Ok(gap)
}

/// `phi_c*(r) = sgn(g) eps` if `|g| = 1`, else `-sgn(g) log|g|`. When no
/// `epsilon` is given it is derived from the minimum same-sign log gap over
/// `R^(d_c - 1)`, which requires that space to be small enough to enumerate.
pub fn phi_c_star(pmf: &BinaryInputDmc, d_c: usize, epsilon: Option<f64>) -> Result<PhiCStar> {
    if d_c < 2 {
        return Err(Error::Parameter(format!("d_c must be at least 2, got {d_c}")));
    }
    let g = cn_g(pmf);
    let epsilon = match epsilon {
        Some(e) if e > 0.0 => e,
        Some(e) => return Err(Error::Parameter(format!("epsilon must be positive, got {e}"))),
        None => match min_log_gap(&g, d_c)? {
            Some(gap) => gap / (2.0 * d_c as f64),
            None => 1.0,
        },
    };
    let values = g
        .iter()
        .map(|g| match *g {
            None => 0.0,
            Some(g) if g.abs() == 1.0 => sgn(g) * epsilon,
            Some(g) if g == 0.0 => 0.0,
            Some(g) => -sgn(g) * g.abs().ln(),
        })
        .collect();
    Ok(PhiCStar { values, epsilon })
}

/// Integer check-node reconstruction function.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignedMagnitudeRf {
    pub values: Vec<i32>,
    pub magnitude_cap: i32,
    pub bit_width: u32,
}

/// `floor((2^(q_c - 1) - 1) / d_c)`.
pub fn phi_c_cap(q_c: u32, d_c: usize) -> Result<i32> {
    if !(2..=31).contains(&q_c) || d_c < 2 {
        return Err(Error::Parameter(format!("invalid q_c = {q_c} or d_c = {d_c}")));
    }
    let cap = ((1i64 << (q_c - 1)) - 1) / d_c as i64;
    if cap == 0 {
        return Err(Error::Parameter(format!("q_c = {q_c} bits leave no magnitude range for d_c = {d_c}")));
    }
    Ok(cap as i32)
}

/// Scales `phi_c*` to integers of magnitude at most the cap, never mapping a
/// symbol with `g != 0` to zero. Symbols with `g = 0` (or zero mass) take
/// `+cap`.
pub fn phi_c_integer(pmf: &BinaryInputDmc, q_c: u32, d_c: usize) -> Result<SignedMagnitudeRf> {
    let cap = phi_c_cap(q_c, d_c)?;
    let g = cn_g(pmf);
    let magnitude = |g: f64| if g.abs() >= 1.0 { 0.0 } else { -g.abs().ln() };
    let max = g.iter().flatten().filter(|g| **g != 0.0).map(|&g| magnitude(g)).fold(0.0, f64::max);
    let mut uninformative = 0usize;
    let values = g
        .iter()
        .map(|g| match *g {
            Some(g) if g != 0.0 => {
                let scaled = if max > 0.0 { (magnitude(g) * cap as f64 / max + 0.5).floor() as i32 } else { 0 };
                sgn(g) as i32 * scaled.clamp(1, cap)
            }
            _ => {
                uninformative += 1;
                cap
            }
        })
        .collect();
    if uninformative > 0 {
        debug!("{uninformative} check-node input symbols with g = 0 mapped to +{cap}");
    }
    Ok(SignedMagnitudeRf { values, magnitude_cap: cap, bit_width: q_c })
}

/// Alphabet of combined check-node values in `≻` order with its pmf.
#[derive(Debug, Clone, PartialEq)]
pub struct CnAlphabet<T> {
    pub values: Vec<T>,
    pub pmf: BinaryInputDmc,
}

/// Alphabet and pmf of `Phi_c` over `d_c - 1` inputs, via the `δ±` recursion.
pub fn enumerate_cn_alphabet<T: Domain>(phi: &[T], pmf: &BinaryInputDmc, d_c: usize) -> Result<CnAlphabet<T>> {
    enumerate_cn_traced(phi, pmf, d_c).map(|(a, _)| a)
}

/// Integer version with the accumulator bit-width assertion.
pub fn enumerate_cn_integer(rf: &SignedMagnitudeRf, pmf: &BinaryInputDmc, d_c: usize) -> Result<CnAlphabet<i32>> {
    let alpha = enumerate_cn_alphabet(&rf.values, pmf, d_c)?;
    let limit = (1i64 << (rf.bit_width - 1)) - 1;
    assert!(
        alpha.values.iter().all(|&a| (a as i64).abs() <= limit),
        "check-node accumulator exceeds {} bits",
        rf.bit_width
    );
    Ok(alpha)
}

/// [`enumerate_cn_alphabet`] that also returns `sum_a δ+_k(a)` for every
/// `k = 1..d_c-1`. Each of these sums is 2 up to rounding.
pub fn enumerate_cn_traced<T: Domain>(
    phi: &[T],
    pmf: &BinaryInputDmc,
    d_c: usize,
) -> Result<(CnAlphabet<T>, Vec<f64>)> {
    if d_c < 2 {
        return Err(Error::Parameter(format!("d_c must be at least 2, got {d_c}")));
    }
    if phi.len() != pmf.len() {
        return Err(Error::Parameter(format!(
            "reconstruction has {} entries for {} message symbols",
            phi.len(),
            pmf.len()
        )));
    }
    // (phi(r), P(r|0) + P(r|1), P(r|0) - P(r|1)) for every live symbol
    let inputs: Vec<(T, f64, f64)> = phi
        .iter()
        .zip(pmf.transitions())
        .filter(|(_, p)| p[0] + p[1] > 0.0)
        .map(|(&v, p)| (v, p[0] + p[1], p[0] - p[1]))
        .collect();
    if inputs.is_empty() {
        return Err(Error::InvalidPmf("message pmf has no live symbols".into()));
    }

    let mut delta = sort_merge(inputs.clone(), succ_cmp);
    let mut trace = vec![delta.iter().map(|d| d.1).sum::<f64>()];
    for _ in 2..d_c {
        let mut next = Vec::with_capacity(delta.len() * inputs.len());
        for &(v, plus, minus) in &inputs {
            for &(a, dp, dm) in &delta {
                next.push((v.diamond(a), 0.5 * plus * dp, 0.5 * minus * dm));
            }
        }
        delta = sort_merge(next, succ_cmp);
        trace.push(delta.iter().map(|d| d.1).sum::<f64>());
    }

    let mut values = Vec::with_capacity(delta.len());
    let mut rows = Vec::with_capacity(delta.len());
    for (a, dp, dm) in delta {
        let mut p0 = (0.5 * (dp + dm)).max(0.0);
        let mut p1 = (0.5 * (dp - dm)).max(0.0);
        if p0 < MASS_FLOOR {
            p0 = 0.0;
        }
        if p1 < MASS_FLOOR {
            p1 = 0.0;
        }
        if p0 > 0.0 || p1 > 0.0 {
            values.push(a);
            rows.push([p0, p1]);
        }
    }
    let pmf = BinaryInputDmc::uniform_renormalized(rows)?;
    Ok((CnAlphabet { values, pmf }, trace))
}

/// Check-node threshold set, strictly decreasing under `≻`.
#[derive(Debug, Clone, PartialEq)]
pub struct CnThresholds<T> {
    pub gammas: Vec<T>,
}

impl<T: Domain> CnThresholds<T> {
    pub fn map(&self, phi_sum: T) -> usize {
        cn_map_to_symbol(phi_sum, &self.gammas)
    }
}

/// Outgoing symbol for a combined value: the number of thresholds `γ_i` with
/// `γ_i ≻ Φ`, found by binary search.
pub fn cn_map_to_symbol<T: Domain>(phi_sum: T, gammas: &[T]) -> usize {
    gammas.partition_point(|&g| succ(g, phi_sum))
}

/// Result of quantizing a check-node alphabet.
#[derive(Debug, Clone, PartialEq)]
pub struct CnQuantizer<T> {
    pub thresholds: CnThresholds<T>,
    pub boundaries: Vec<usize>,
    pub pmf: BinaryInputDmc,
    pub mutual_information: f64,
}

impl<T> CnQuantizer<T> {
    pub fn size(&self) -> usize {
        self.pmf.len()
    }
}

/// MI-optimal SDQ of the `≻`-ordered alphabet to `s_size` symbols. A smaller
/// alphabet shrinks the output size with a warning.
pub fn design_cn_quantizer<T: Domain>(alpha: &CnAlphabet<T>, s_size: usize) -> Result<CnQuantizer<T>> {
    if s_size < 1 {
        return Err(Error::Parameter("|S| must be positive".into()));
    }
    let m = if alpha.values.len() < s_size {
        warn!("check-node alphabet has {} values, reducing |S| from {s_size}", alpha.values.len());
        alpha.values.len()
    } else {
        s_size
    };
    let q = design_optimal_sdq(&alpha.pmf, m)?;
    let lambda = q.boundaries().to_vec();
    let gammas = lambda[1..m].iter().map(|&l| alpha.values[l - 1]).collect();
    let pmf = alpha.pmf.quantize(&lambda)?;
    Ok(CnQuantizer {
        thresholds: CnThresholds { gammas },
        boundaries: lambda,
        pmf,
        mutual_information: q.achieved_mi(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::diamond;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::collections::BTreeMap;

    fn random_pmf(rng: &mut ChaCha8Rng, n: usize) -> BinaryInputDmc {
        let mut rows: Vec<[f64; 2]> =
            (0..n).map(|_| [rng.random::<f64>() + 0.01, rng.random::<f64>() + 0.01]).collect();
        let s0: f64 = rows.iter().map(|r| r[0]).sum();
        let s1: f64 = rows.iter().map(|r| r[1]).sum();
        for r in &mut rows {
            r[0] /= s0;
            r[1] /= s1;
        }
        BinaryInputDmc::uniform(rows).unwrap()
    }

    /// Naive alphabet: every `r` in `R^dim`, parity sum over input vectors.
    fn naive_alphabet(phi: &[i32], pmf: &BinaryInputDmc, dim: usize) -> BTreeMap<i32, [f64; 2]> {
        let n = pmf.len();
        let mut out = BTreeMap::new();
        let mut r = vec![0usize; dim];
        loop {
            let sign: i32 = r.iter().map(|&i| phi[i].signum()).product();
            let mag: i32 = r.iter().map(|&i| phi[i].abs()).sum();
            let mut p = [0.0; 2];
            for xs in 0u32..(1 << dim) {
                let parity = (xs.count_ones() % 2) as usize;
                let prod: f64 = (0..dim).map(|i| pmf.p(r[i], ((xs >> i) & 1) as usize)).product();
                p[parity] += prod;
            }
            let e = out.entry(sign * mag).or_insert([0.0; 2]);
            let scale = 0.5f64.powi(dim as i32 - 1);
            e[0] += scale * p[0];
            e[1] += scale * p[1];
            let mut k = 0;
            while k < dim {
                r[k] += 1;
                if r[k] < n {
                    break;
                }
                r[k] = 0;
                k += 1;
            }
            if k == dim {
                break;
            }
        }
        out
    }

    fn total_variation(alpha: &CnAlphabet<i32>, naive: &BTreeMap<i32, [f64; 2]>) -> f64 {
        let mut tv: f64 = 0.0;
        for x in 0..2 {
            let mut d = 0.0;
            for (v, p) in naive {
                let mine = alpha.values.iter().position(|a| a == v).map_or(0.0, |i| alpha.pmf.p(i, x));
                d += (mine - p[x]).abs();
            }
            tv = tv.max(0.5 * d);
        }
        tv
    }

    #[test]
    fn g_examples() {
        let pmf = BinaryInputDmc::from_rows(&[0.3, 0.45, 0.0, 0.0, 0.25], &[0.3, 0.05, 0.0, 0.65, 0.0]).unwrap();
        let g = cn_g(&pmf);
        assert_eq!(g[0], Some(0.0));
        assert!((g[1].unwrap() - 0.8).abs() < 1e-15);
        assert_eq!(g[2], None);
        assert_eq!(g[3], Some(-1.0));
        assert_eq!(g[4], Some(1.0));
    }

    #[test]
    fn phi_c_star_examples() {
        // g = 0.8, -0.5, 1, -1 and 0
        let pmf = BinaryInputDmc::from_rows(&[0.45, 0.125, 0.3, 0.0, 0.125], &[0.05, 0.375, 0.0, 0.45, 0.125]).unwrap();
        let star = phi_c_star(&pmf, 3, Some(0.01)).unwrap();
        assert!((star.values[0] - 0.223_143_551_314_209_7).abs() < 1e-12);
        assert!((star.values[1] + std::f64::consts::LN_2).abs() < 1e-12);
        assert_eq!(star.values[2], 0.01);
        assert_eq!(star.values[3], -0.01);
        assert_eq!(star.values[4], 0.0);
    }

    #[test]
    fn epsilon_stays_below_the_log_gap() {
        let pmf = BinaryInputDmc::from_rows(&[0.45, 0.125, 0.3, 0.125], &[0.05, 0.375, 0.0, 0.575]).unwrap();
        let d_c = 4;
        let star = phi_c_star(&pmf, d_c, None).unwrap();
        let g: Vec<f64> = cn_g(&pmf).into_iter().flatten().collect();
        let mut min_gap = f64::INFINITY;
        let mut prods = Vec::new();
        for a in &g {
            for b in &g {
                for c in &g {
                    prods.push(a * b * c);
                }
            }
        }
        for p in &prods {
            for q in &prods {
                if p.signum() == q.signum() && *p != 0.0 && (p - q).abs() > 1e-12 {
                    min_gap = min_gap.min((p.abs().ln() - q.abs().ln()).abs());
                }
            }
        }
        assert!(star.epsilon > 0.0 && star.epsilon * (d_c as f64) < min_gap);
    }

    #[test]
    fn epsilon_defaults_to_one_without_gaps() {
        let pmf = BinaryInputDmc::from_rows(&[1.0, 0.0], &[0.0, 1.0]).unwrap();
        assert_eq!(phi_c_star(&pmf, 3, None).unwrap().epsilon, 1.0);
    }

    #[test]
    fn integer_caps() {
        assert_eq!(phi_c_cap(10, 32).unwrap(), 15);
        assert_eq!(phi_c_cap(8, 6).unwrap(), 21);
        assert!(phi_c_cap(3, 6).is_err());
    }

    #[test]
    fn integer_rf_examples() {
        let sym = BinaryInputDmc::from_rows(&[0.9, 0.1], &[0.1, 0.9]).unwrap();
        let rf = phi_c_integer(&sym, 10, 32).unwrap();
        assert_eq!(rf.values, vec![15, -15]);

        // |g| = 1 next to less reliable symbols clamps to magnitude one
        let pmf = BinaryInputDmc::from_rows(&[0.5, 0.3, 0.2], &[0.0, 0.2, 0.8]).unwrap();
        let rf = phi_c_integer(&pmf, 8, 6).unwrap();
        assert_eq!(rf.values[0], 1);
        assert!(rf.values[1] > 0 && rf.values[2] < 0);
        assert!(rf.values.iter().any(|v| v.abs() == rf.magnitude_cap));

        // g = 0 goes to +cap
        let pmf = BinaryInputDmc::from_rows(&[0.5, 0.5], &[0.5, 0.5]).unwrap();
        assert_eq!(phi_c_integer(&pmf, 8, 6).unwrap().values, vec![21, 21]);
    }

    #[test]
    fn integer_rf_respects_cap_and_sign() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..50 {
            let pmf = random_pmf(&mut rng, 8);
            let rf = phi_c_integer(&pmf, 8, 6).unwrap();
            for (v, g) in rf.values.iter().zip(cn_g(&pmf)) {
                assert!(v.abs() <= rf.magnitude_cap && *v != 0);
                let g = g.unwrap();
                if g != 0.0 {
                    assert_eq!(v.signum() as f64, g.signum());
                }
            }
            assert!(6 * rf.magnitude_cap < 1 << 7);
        }
    }

    #[test]
    fn two_symbol_alphabet_matches_naive() {
        let pmf = BinaryInputDmc::from_rows(&[0.8, 0.2], &[0.2, 0.8]).unwrap();
        let phi = [1, -1];
        let alpha = enumerate_cn_alphabet(&phi, &pmf, 3).unwrap();
        assert_eq!(alpha.values, vec![2, -2]);
        let naive = naive_alphabet(&phi, &pmf, 2);
        assert!(total_variation(&alpha, &naive) < 1e-15);
        assert!((alpha.pmf.p(0, 0) - 0.68).abs() < 1e-15);
    }

    #[test]
    fn delta_plus_mass_is_conserved() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let pmf = random_pmf(&mut rng, 6);
        let rf = phi_c_integer(&pmf, 9, 8).unwrap();
        let (_, trace) = enumerate_cn_traced(&rf.values, &pmf, 8).unwrap();
        assert_eq!(trace.len(), 7);
        for t in trace {
            assert!((t - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn random_alphabets_match_naive_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..10 {
            let pmf = random_pmf(&mut rng, 4);
            let phi: Vec<i32> = (0..4).map(|_| rng.random_range(1..5) * if rng.random() { 1 } else { -1 }).collect();
            let alpha = enumerate_cn_alphabet(&phi, &pmf, 5).unwrap();
            let naive = naive_alphabet(&phi, &pmf, 4);
            assert_eq!(alpha.values.len(), naive.len());
            assert!(total_variation(&alpha, &naive) < 1e-12);
            assert!(alpha.values.windows(2).all(|w| succ(w[0], w[1])));
        }
    }

    #[test]
    fn combined_values_fit_the_bit_width() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let pmf = random_pmf(&mut rng, 4);
        let rf = phi_c_integer(&pmf, 6, 4).unwrap();
        let alpha = enumerate_cn_integer(&rf, &pmf, 4).unwrap();
        let bound = 3 * rf.magnitude_cap;
        assert!(alpha.values.iter().all(|a| a.abs() <= bound));
        assert!(bound < 1 << 5);
        // exhaustive over all triples, including the largest-magnitude one
        for &a in &rf.values {
            for &b in &rf.values {
                for &c in &rf.values {
                    assert!(diamond(diamond(a, b), c).abs() < 1 << 5);
                }
            }
        }
    }

    #[test]
    fn identity_quantizer_keeps_mi() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let pmf = random_pmf(&mut rng, 4);
        let rf = phi_c_integer(&pmf, 8, 4).unwrap();
        let alpha = enumerate_cn_alphabet(&rf.values, &pmf, 4).unwrap();
        let q = design_cn_quantizer(&alpha, alpha.values.len()).unwrap();
        assert!((q.mutual_information - alpha.pmf.mutual_information()).abs() < 1e-12);
        assert!((q.pmf.mutual_information() - q.mutual_information).abs() < 1e-12);
        assert_eq!(q.thresholds.gammas, alpha.values[..alpha.values.len() - 1].to_vec());
    }

    #[test]
    fn two_bin_quantizer_by_hand() {
        let pmf = BinaryInputDmc::from_rows(&[0.8, 0.2], &[0.2, 0.8]).unwrap();
        let alpha = enumerate_cn_alphabet(&[1, -1], &pmf, 3).unwrap();
        let q = design_cn_quantizer(&alpha, 2).unwrap();
        assert_eq!(q.thresholds.gammas, vec![2]);
        // P(+2|0) = 0.8^2 + 0.2^2, P(+2|1) = 2 * 0.8 * 0.2
        assert!((q.pmf.p(0, 0) - 0.68).abs() < 1e-15);
        assert!((q.pmf.p(0, 1) - 0.32).abs() < 1e-15);
        assert!((q.pmf.p(1, 0) - 0.32).abs() < 1e-15);
    }

    #[test]
    fn small_alphabet_shrinks_output() {
        let pmf = BinaryInputDmc::from_rows(&[0.8, 0.2], &[0.2, 0.8]).unwrap();
        let alpha = enumerate_cn_alphabet(&[1, -1], &pmf, 3).unwrap();
        let q = design_cn_quantizer(&alpha, 8).unwrap();
        assert_eq!(q.size(), 2);
        assert_eq!(q.thresholds.gammas.len(), 1);
    }

    #[test]
    fn mapping_examples() {
        assert_eq!(cn_map_to_symbol(2, &[2]), 0);
        assert_eq!(cn_map_to_symbol(-2, &[2]), 1);
        assert_eq!(cn_map_to_symbol(1, &[2]), 0);
        assert_eq!(cn_map_to_symbol(3, &[2]), 1);
    }

    #[test]
    fn mapping_agrees_with_linear_scan() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..20 {
            let mut gammas: Vec<i32> = Vec::new();
            while gammas.len() < 7 {
                let g = rng.random_range(-40..=40);
                if g != 0 && !gammas.contains(&g) {
                    gammas.push(g);
                }
            }
            gammas.sort_by(succ_cmp);
            for _ in 0..500 {
                let phi = rng.random_range(-50..=50);
                let linear = if !succ(gammas[0], phi) {
                    0
                } else if succ(gammas[6], phi) {
                    7
                } else {
                    (0..6).find(|&i| succ(gammas[i], phi) && !succ(gammas[i + 1], phi)).unwrap() + 1
                };
                assert_eq!(cn_map_to_symbol(phi, &gammas), linear);
            }
        }
    }
}
