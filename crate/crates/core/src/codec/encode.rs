use rand::Rng;

use super::graph::TannerGraph;

/// Systematic encoder from the reduced row-echelon form of `H` over GF(2).
/// Free columns carry information bits; each pivot bit is the parity of its
/// row restricted to the free columns.
#[derive(Debug, Clone)]
pub struct Encoder {
    n: usize,
    words: usize,
    rows: Vec<Vec<u64>>,
    pivots: Vec<usize>,
    free: Vec<usize>,
}

fn get(row: &[u64], c: usize) -> bool {
    row[c / 64] >> (c % 64) & 1 == 1
}

impl Encoder {
    pub fn new(graph: &TannerGraph) -> Self {
        let n = graph.n();
        let words = n.div_ceil(64);
        let mut rows: Vec<Vec<u64>> = (0..graph.m())
            .map(|j| {
                let mut r = vec![0u64; words];
                for v in graph.check_neighbors(j) {
                    r[v / 64] ^= 1 << (v % 64);
                }
                r
            })
            .collect();
        let mut pivots = Vec::new();
        let mut rank = 0;
        for c in 0..n {
            let Some(p) = (rank..rows.len()).find(|&r| get(&rows[r], c)) else {
                continue;
            };
            rows.swap(rank, p);
            let pivot = rows[rank].clone();
            for (r, row) in rows.iter_mut().enumerate() {
                if r != rank && get(row, c) {
                    row.iter_mut().zip(&pivot).for_each(|(a, b)| *a ^= b);
                }
            }
            pivots.push(c);
            rank += 1;
        }
        rows.truncate(rank);
        let mut is_pivot = vec![false; n];
        pivots.iter().for_each(|&c| is_pivot[c] = true);
        let free = (0..n).filter(|&c| !is_pivot[c]).collect();
        Encoder { n, words, rows, pivots, free }
    }

    /// Code dimension `n - rank(H)`.
    pub fn dimension(&self) -> usize {
        self.free.len()
    }

    /// Codeword carrying `info` on the free columns.
    pub fn encode(&self, info: &[u8]) -> Vec<u8> {
        assert_eq!(info.len(), self.free.len(), "one information bit per free column");
        let mut c = vec![0u8; self.n];
        let mut bits = vec![0u64; self.words];
        for (&col, &b) in self.free.iter().zip(info) {
            c[col] = b & 1;
            if b & 1 == 1 {
                bits[col / 64] |= 1 << (col % 64);
            }
        }
        for (row, &p) in self.rows.iter().zip(&self.pivots) {
            let ones: u32 = row.iter().zip(&bits).map(|(a, b)| (a & b).count_ones()).sum();
            c[p] = (ones & 1) as u8;
        }
        c
    }

    pub fn random_codeword<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<u8> {
        let info: Vec<u8> = (0..self.dimension()).map(|_| rng.random::<bool>() as u8).collect();
        self.encode(&info)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codec::peg_regular;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn codewords_satisfy_every_check() {
        let g = peg_regular(96, 3, 6, 2).unwrap();
        let enc = Encoder::new(&g);
        assert!(enc.dimension() >= 48);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            assert!(g.syndrome_is_zero(&enc.random_codeword(&mut rng)));
        }
    }

    #[test]
    fn dimension_matches_codeword_count() {
        let g = TannerGraph::from_checks(8, &[vec![0, 1, 2, 3], vec![4, 5, 6, 7], vec![0, 2, 4, 6], vec![1, 3, 5, 7]])
            .unwrap();
        let count = (0u32..256)
            .filter(|w| g.syndrome_is_zero(&(0..8).map(|i| ((w >> i) & 1) as u8).collect::<Vec<_>>()))
            .count();
        let enc = Encoder::new(&g);
        assert_eq!(1usize << enc.dimension(), count);
        let mut seen: Vec<Vec<u8>> = (0u32..1 << enc.dimension())
            .map(|w| enc.encode(&(0..enc.dimension()).map(|i| ((w >> i) & 1) as u8).collect::<Vec<_>>()))
            .collect();
        seen.sort();
        seen.dedup();
        assert_eq!(seen.len(), count);
        assert!(seen.iter().all(|c| g.syndrome_is_zero(c)));
    }
}
