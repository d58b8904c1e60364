use std::collections::VecDeque;

use rand::seq::IndexedRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::graph::TannerGraph;
use crate::error::{Error, Result};

/// Regular `(d_v, d_c)` code of length `n` by progressive edge growth: each
/// new edge of a variable goes to a check as far away as possible in the
/// current graph, preferring the lowest current degree, with the remaining
/// ties broken by a seeded RNG. Checks never exceed degree `d_c`.
pub fn peg_regular(n: usize, d_v: usize, d_c: usize, seed: u64) -> Result<TannerGraph> {
    if d_v < 1 || d_c < 2 || (n * d_v) % d_c != 0 {
        return Err(Error::Parameter(format!("no regular ({d_v}, {d_c}) code of length {n}")));
    }
    let m = n * d_v / d_c;
    if d_v > m {
        return Err(Error::Parameter(format!("d_v = {d_v} exceeds the {m} available checks")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut vn_adj: Vec<Vec<usize>> = vec![Vec::with_capacity(d_v); n];
    let mut cn_adj: Vec<Vec<usize>> = vec![Vec::with_capacity(d_c); m];

    let mut cn_depth = vec![usize::MAX; m];
    let mut vn_seen = vec![false; n];
    for v in 0..n {
        for k in 0..d_v {
            let open = |c: usize, cn_adj: &Vec<Vec<usize>>, vn_adj: &Vec<Vec<usize>>| {
                cn_adj[c].len() < d_c && !vn_adj[v].contains(&c)
            };
            let candidates: Vec<usize> = if k == 0 {
                (0..m).filter(|&c| open(c, &cn_adj, &vn_adj)).collect()
            } else {
                // breadth-first search from v; keep the checks at the last
                // reachable depth, or those never reached
                cn_depth.iter_mut().for_each(|d| *d = usize::MAX);
                vn_seen.iter_mut().for_each(|s| *s = false);
                vn_seen[v] = true;
                let mut queue = VecDeque::from([(v, 0usize)]);
                let mut deepest = 0;
                while let Some((u, depth)) = queue.pop_front() {
                    for &c in &vn_adj[u] {
                        if cn_depth[c] != usize::MAX {
                            continue;
                        }
                        cn_depth[c] = depth;
                        deepest = deepest.max(depth);
                        for &w in &cn_adj[c] {
                            if !vn_seen[w] {
                                vn_seen[w] = true;
                                queue.push_back((w, depth + 1));
                            }
                        }
                    }
                }
                let unreached: Vec<usize> =
                    (0..m).filter(|&c| cn_depth[c] == usize::MAX && open(c, &cn_adj, &vn_adj)).collect();
                if !unreached.is_empty() {
                    unreached
                } else {
                    let mut pick = Vec::new();
                    for depth in (0..=deepest).rev() {
                        pick = (0..m).filter(|&c| cn_depth[c] == depth && open(c, &cn_adj, &vn_adj)).collect();
                        if !pick.is_empty() {
                            break;
                        }
                    }
                    pick
                }
            };
            let min_deg =
                candidates.iter().map(|&c| cn_adj[c].len()).min().ok_or_else(|| {
                    Error::Parameter(format!("edge growth stalled at variable {v}; try another seed"))
                })?;
            let lowest: Vec<usize> = candidates.into_iter().filter(|&c| cn_adj[c].len() == min_deg).collect();
            let c = *lowest.choose(&mut rng).expect("non-empty candidate set");
            vn_adj[v].push(c);
            cn_adj[c].push(v);
        }
    }
    for row in &mut cn_adj {
        row.sort_unstable();
    }
    TannerGraph::from_checks(n, &cn_adj)
}
