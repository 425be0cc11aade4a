//! Brute-force reference implementations for testing.
//!
//! Everything here is written straight from the defining formulas — dense
//! boolean ownership matrix, explicit nested sums, set-based similarity —
//! with no sparsity tricks, no shared passes, no reuse of the production
//! code's degree accessors. Slow on purpose: these exist so the optimized
//! implementations in `pliers` have something independent to be checked
//! against, on graphs small enough that O(n * m^2) is affordable.

// index loops transcribe the formulas' subscripts literally; rewriting them
// as iterator chains would defeat the point of a reference implementation
#![allow(clippy::needless_range_loop)]

use rand_chacha::ChaCha8Rng;
use rand_core::{Rng, SeedableRng};
use std::collections::HashSet;

use pliers::{BipartiteGraph, RankedList};

/// Dense ownership matrix plus degrees, all recomputed from scratch.
pub struct DenseGraph {
    pub a: Vec<Vec<bool>>, // a[user][item]
    pub ku: Vec<f64>,
    pub ki: Vec<f64>,
}

impl DenseGraph {
    pub fn new(g: &BipartiteGraph) -> DenseGraph {
        let (n, m) = (g.n_users(), g.n_items());
        let mut a = vec![vec![false; m]; n];
        for u in 0..n as u32 {
            for &i in g.items_of(u) {
                a[u as usize][i as usize] = true;
            }
        }
        let ku: Vec<f64> = a
            .iter()
            .map(|row| row.iter().filter(|&&x| x).count() as f64)
            .collect();
        let ki: Vec<f64> = (0..m)
            .map(|j| a.iter().filter(|row| row[j]).count() as f64)
            .collect();
        DenseGraph { a, ku, ki }
    }

    /// Number of users holding both items, counted column by column.
    pub fn co(&self, s: usize, j: usize) -> f64 {
        self.a.iter().filter(|row| row[s] && row[j]).count() as f64
    }
}

/// Spreading scorer, literal form: each term is
/// `a[l][j] * a[l][s] * a[t][s] / (ku[l] * ki[s])`.
pub fn oracle_probs(g: &BipartiteGraph, t: u32) -> Vec<f64> {
    let d = DenseGraph::new(g);
    let (n, m) = (g.n_users(), g.n_items());
    let t = t as usize;
    (0..m)
        .map(|j| {
            let mut sum = 0.0;
            for l in 0..n {
                for s in 0..m {
                    if d.a[l][j] && d.a[l][s] && d.a[t][s] {
                        sum += 1.0 / (d.ku[l] * d.ki[s]);
                    }
                }
            }
            sum
        })
        .collect()
}

/// Averaging scorer, literal form: `(1 / ki[j]) * sum of
/// a[l][j] * a[l][s] * a[t][s] / ku[l]`; items nobody holds score zero.
pub fn oracle_heats(g: &BipartiteGraph, t: u32) -> Vec<f64> {
    let d = DenseGraph::new(g);
    let (n, m) = (g.n_users(), g.n_items());
    let t = t as usize;
    (0..m)
        .map(|j| {
            if d.ki[j] == 0.0 {
                return 0.0;
            }
            let mut sum = 0.0;
            for l in 0..n {
                for s in 0..m {
                    if d.a[l][j] && d.a[l][s] && d.a[t][s] {
                        sum += 1.0 / d.ku[l];
                    }
                }
            }
            sum / d.ki[j]
        })
        .collect()
}

pub fn oracle_hybrid(g: &BipartiteGraph, t: u32, lambda: f64) -> Vec<f64> {
    oracle_probs(g, t)
        .into_iter()
        .zip(oracle_heats(g, t))
        .map(|(p, h)| lambda * p + (1.0 - lambda) * h)
        .collect()
}

pub fn oracle_pd(g: &BipartiteGraph, t: u32, epsilon: f64) -> Vec<f64> {
    let d = DenseGraph::new(g);
    oracle_probs(g, t)
        .into_iter()
        .enumerate()
        .map(|(j, p)| {
            if d.ki[j] == 0.0 {
                0.0
            } else {
                p * d.ki[j].powf(epsilon)
            }
        })
        .collect()
}

pub fn oracle_bhc(g: &BipartiteGraph, t: u32, gamma: f64) -> Vec<f64> {
    let d = DenseGraph::new(g);
    oracle_heats(g, t)
        .into_iter()
        .enumerate()
        .map(|(j, h)| {
            if d.ki[j] == 0.0 {
                0.0
            } else {
                h * d.ki[j].powf(gamma)
            }
        })
        .collect()
}

/// Co-occurrence-weighted spreading scorer, literal form: the `probs` term
/// additionally weighted by `co(s, j) / ki[j]`.
pub fn oracle_pliers(g: &BipartiteGraph, t: u32) -> Vec<f64> {
    let d = DenseGraph::new(g);
    let (n, m) = (g.n_users(), g.n_items());
    let t = t as usize;
    // co-occurrence table once per graph; each entry is still counted
    // straight off the matrix columns
    let co: Vec<Vec<f64>> = (0..m)
        .map(|s| (0..m).map(|j| d.co(s, j)).collect())
        .collect();
    (0..m)
        .map(|j| {
            if d.ki[j] == 0.0 {
                return 0.0;
            }
            let mut sum = 0.0;
            for l in 0..n {
                for s in 0..m {
                    if d.a[l][j] && d.a[l][s] && d.a[t][s] {
                        sum += (1.0 / (d.ku[l] * d.ki[s])) * (co[s][j] / d.ki[j]);
                    }
                }
            }
            sum
        })
        .collect()
}

fn user_set(g: &BipartiteGraph, item: u32) -> HashSet<u32> {
    g.users_of(item).iter().copied().collect()
}

pub fn oracle_jaccard(a: &HashSet<u32>, b: &HashSet<u32>) -> f64 {
    let union = a.union(b).count();
    if union == 0 {
        return 0.0;
    }
    a.intersection(b).count() as f64 / union as f64
}

/// Mean over users of the per-user average absolute difference between each
/// recommended item's degree and the mean degree of the user's items.
pub fn oracle_variance(g: &BipartiteGraph, recs: &[RankedList]) -> f64 {
    let mut total = 0.0;
    let mut counted = 0usize;
    for rl in recs {
        if rl.entries.is_empty() {
            continue;
        }
        let owned = g.items_of(rl.target);
        let p = owned.iter().map(|&i| g.item_degree(i) as f64).sum::<f64>() / owned.len() as f64;
        let mut dev = 0.0;
        for &(q, _) in &rl.entries {
            let diff = g.item_degree(q) as f64 - p;
            dev += (diff * diff).sqrt();
        }
        total += dev / rl.entries.len() as f64;
        counted += 1;
    }
    if counted > 0 {
        total / counted as f64
    } else {
        0.0
    }
}

fn oracle_overlap(g: &BipartiteGraph, recs: &[RankedList], scaled_product: bool) -> f64 {
    let mut total = 0.0;
    let mut counted = 0usize;
    for rl in recs {
        if rl.entries.is_empty() {
            continue;
        }
        let owned = g.items_of(rl.target);
        let z = owned.len() as f64;
        let mut per_user = 0.0;
        for &(q, _) in &rl.entries {
            let uq = user_set(g, q);
            let similarities = owned.iter().map(|&k| oracle_jaccard(&uq, &user_set(g, k)));
            per_user += if scaled_product {
                similarities.product::<f64>() / z
            } else {
                similarities.sum::<f64>() / z
            };
        }
        total += per_user / rl.entries.len() as f64;
        counted += 1;
    }
    if counted > 0 {
        total / counted as f64
    } else {
        0.0
    }
}

/// Mean over users of the per-user average audience overlap (mean of Jaccard
/// similarities against each held item).
pub fn oracle_overlap_mean(g: &BipartiteGraph, recs: &[RankedList]) -> f64 {
    oracle_overlap(g, recs, false)
}

/// The product variant: Jaccard similarities multiplied, then divided by the
/// number of held items.
pub fn oracle_overlap_scaled_product(g: &BipartiteGraph, recs: &[RankedList]) -> f64 {
    oracle_overlap(g, recs, true)
}

pub fn oracle_recall(probe: &[Vec<u32>], recs: &[RankedList], l: usize) -> f64 {
    let mut total = 0.0;
    let mut counted = 0usize;
    for rl in recs {
        let withheld: HashSet<u32> = probe[rl.target as usize].iter().copied().collect();
        if withheld.is_empty() {
            continue;
        }
        let top: Vec<u32> = rl.entries.iter().take(l).map(|&(j, _)| j).collect();
        let hits = top.iter().filter(|j| withheld.contains(j)).count();
        total += hits as f64 / l as f64;
        counted += 1;
    }
    if counted > 0 {
        total / counted as f64
    } else {
        0.0
    }
}

pub fn oracle_precision(probe: &[Vec<u32>], recs: &[RankedList], l: usize) -> f64 {
    let mut total = 0.0;
    let mut counted = 0usize;
    for rl in recs {
        let withheld: HashSet<u32> = probe[rl.target as usize].iter().copied().collect();
        if withheld.is_empty() {
            continue;
        }
        let top: Vec<u32> = rl.entries.iter().take(l).map(|&(j, _)| j).collect();
        let hits = top.iter().filter(|j| withheld.contains(j)).count();
        total += hits as f64 / withheld.len() as f64;
        counted += 1;
    }
    if counted > 0 {
        total / counted as f64
    } else {
        0.0
    }
}

pub fn oracle_novelty(g: &BipartiteGraph, recs: &[RankedList], l: usize) -> f64 {
    let mut total = 0.0;
    let mut counted = 0usize;
    for rl in recs {
        let top: Vec<u32> = rl.entries.iter().take(l).map(|&(j, _)| j).collect();
        if top.is_empty() {
            continue;
        }
        let popularity: f64 = top.iter().map(|&j| g.item_degree(j) as f64).sum();
        total += popularity / top.len() as f64;
        counted += 1;
    }
    if counted > 0 {
        total / counted as f64
    } else {
        0.0
    }
}

/// Random bipartite graph: user and item counts drawn from `2..=max`, each
/// cell kept with a probability drawn from `density`. Guaranteed non-empty.
pub fn random_bipartite(
    seed: u64,
    max_users: usize,
    max_items: usize,
    density: (f64, f64),
) -> BipartiteGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut below = |bound: usize| (rng.next_u64() % bound as u64) as usize;
    let n = 2 + below(max_users - 1);
    let m = 2 + below(max_items - 1);
    let p =
        density.0 + (density.1 - density.0) * ((rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64);
    let mut edges = Vec::new();
    for u in 0..n as u64 {
        for i in 0..m as u64 {
            if ((rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64) < p {
                edges.push((u, i));
            }
        }
    }
    if edges.is_empty() {
        edges.push((0, 0));
    }
    BipartiteGraph::from_edges(&edges).0
}

/// Complete bipartite graph: every user holds every item.
pub fn complete_bipartite(n: usize, m: usize) -> BipartiteGraph {
    let mut edges = Vec::with_capacity(n * m);
    for u in 0..n as u64 {
        for i in 0..m as u64 {
            edges.push((u, i));
        }
    }
    BipartiteGraph::from_edges(&edges).0
}
