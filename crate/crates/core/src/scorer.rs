//! Diffusion scorers over the bipartite graph.
//!
//! All six scorers share one contract: given a target user, assign every item
//! a non-negative relevance score, with items outside the target's two-hop
//! neighborhood scoring exactly zero.
//!
//! * `probs` — each owned item spreads one unit of weight evenly over its
//!   holders, and each holder spreads the received mass evenly over their
//!   items (a two-step random walk). Popular items collect the most mass.
//! * `heats` — the same two hops but averaging instead of spreading: a user
//!   receives the mean over their items, an item the mean over its holders.
//!   Low-degree items end up favored.
//! * `hybrid` — pointwise blend `lambda * probs + (1 - lambda) * heats`.
//! * `pd` — `probs` rescaled by `k(item)^epsilon` (epsilon typically
//!   negative, pushing scores toward the long tail).
//! * `bhc` — `heats` rescaled by `k(item)^gamma`, pulling it back toward
//!   popular items.
//! * `pliers` — `probs` with each source-to-item contribution additionally
//!   weighted by the co-occurrence between the two items relative to the
//!   scored item's degree, so items are promoted by how strongly they co-occur
//!   with what the user already holds.
//!
//! Scoring a user is single-threaded and deterministic; every sum is
//! accumulated in a fixed ascending-index order so repeated runs (and batch
//! runs under any rayon thread count) reproduce results bit for bit.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::BipartiteGraph;

/// Dense score vector indexed by item; finite, non-negative entries.
pub type ScoreVector = Vec<f64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Pliers,
    Probs,
    Heats,
    Hybrid,
    Pd,
    Bhc,
}

impl Algorithm {
    pub const ALL: [Algorithm; 6] = [
        Algorithm::Pliers,
        Algorithm::Probs,
        Algorithm::Heats,
        Algorithm::Hybrid,
        Algorithm::Pd,
        Algorithm::Bhc,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Pliers => "pliers",
            Algorithm::Probs => "probs",
            Algorithm::Heats => "heats",
            Algorithm::Hybrid => "hybrid",
            Algorithm::Pd => "pd",
            Algorithm::Bhc => "bhc",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Algorithm> {
        match s.to_ascii_lowercase().as_str() {
            "pliers" => Ok(Algorithm::Pliers),
            "probs" => Ok(Algorithm::Probs),
            "heats" => Ok(Algorithm::Heats),
            "hybrid" => Ok(Algorithm::Hybrid),
            "pd" => Ok(Algorithm::Pd),
            "bhc" => Ok(Algorithm::Bhc),
            _ => Err(Error::UnknownAlgorithm {
                name: s.to_string(),
            }),
        }
    }
}

/// Knobs for the parameterized scorers; ignored by the ones that take none.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScorerParams {
    /// `hybrid` blend weight in `[0, 1]`: 1 is pure `probs`, 0 pure `heats`.
    pub lambda: f64,
    /// `pd` degree exponent.
    pub epsilon: f64,
    /// `bhc` degree exponent.
    pub gamma: f64,
}

impl Default for ScorerParams {
    fn default() -> Self {
        ScorerParams {
            lambda: 0.5,
            epsilon: -0.85,
            gamma: 0.8,
        }
    }
}

impl ScorerParams {
    pub fn validate(&self) -> Result<()> {
        if !self.lambda.is_finite() || !(0.0..=1.0).contains(&self.lambda) {
            return Err(Error::invalid(format!(
                "lambda must lie in [0, 1], got {}",
                self.lambda
            )));
        }
        if !self.epsilon.is_finite() {
            return Err(Error::invalid(format!(
                "epsilon must be finite, got {}",
                self.epsilon
            )));
        }
        if !self.gamma.is_finite() {
            return Err(Error::invalid(format!(
                "gamma must be finite, got {}",
                self.gamma
            )));
        }
        Ok(())
    }
}

/// Top-L recommendation list for one target user: items the target does not
/// already hold, sorted by score descending with ties broken by ascending
/// item index.
#[derive(Debug, Clone, PartialEq)]
pub struct RankedList {
    pub target: u32,
    /// `(item index, score)`, best first, length at most the requested L.
    pub entries: Vec<(u32, f64)>,
}

/// Reusable scratch buffers for scoring queries against one graph.
///
/// Scores live in dense arrays with a touched-index list alongside, so a query
/// costs O(two-hop neighborhood) to compute *and* to reset, never O(items).
pub struct ScoreWorkspace {
    user_acc: Vec<f64>,
    touched_users: Vec<u32>,
    scores: Vec<f64>,
    touched: Vec<u32>,
    // pliers per-source scratch: diffusion weight and co-occurrence count
    w_acc: Vec<f64>,
    co_acc: Vec<f64>,
    source_touched: Vec<u32>,
    // second field for the hybrid blend
    aux: Vec<f64>,
    candidates: Vec<(u32, f64)>,
}

impl ScoreWorkspace {
    pub fn new(g: &BipartiteGraph) -> Self {
        ScoreWorkspace {
            user_acc: vec![0.0; g.n_users()],
            touched_users: Vec::new(),
            scores: vec![0.0; g.n_items()],
            touched: Vec::new(),
            w_acc: vec![0.0; g.n_items()],
            co_acc: vec![0.0; g.n_items()],
            source_touched: Vec::new(),
            aux: vec![0.0; g.n_items()],
            candidates: Vec::new(),
        }
    }
}

/// Add `add` to `values[idx]`, recording first touches. All diffusion
/// contributions are strictly positive, so `0.0` doubles as the "untouched"
/// marker.
#[inline]
fn bump(values: &mut [f64], touched: &mut Vec<u32>, idx: u32, add: f64) {
    let v = &mut values[idx as usize];
    if *v == 0.0 {
        touched.push(idx);
    }
    *v += add;
}

/// Two-hop spreading pass shared by `probs` and `heats`: per-user mass from
/// pass one lands in `user_acc`, pass two pushes `user_acc / k(user)` onto the
/// user's items in ascending user order.
fn spread_users_to_items(g: &BipartiteGraph, ws: &mut ScoreWorkspace) {
    let ScoreWorkspace {
        user_acc,
        touched_users,
        scores,
        touched,
        ..
    } = ws;
    touched_users.sort_unstable();
    for &l in touched_users.iter() {
        let w = user_acc[l as usize] / g.user_degree(l) as f64;
        for &j in g.items_of(l) {
            bump(scores, touched, j, w);
        }
        user_acc[l as usize] = 0.0;
    }
    touched_users.clear();
}

fn diffuse_probs(g: &BipartiteGraph, target: u32, ws: &mut ScoreWorkspace) {
    for &s in g.items_of(target) {
        let share = 1.0 / g.item_degree(s) as f64;
        for &l in g.users_of(s) {
            bump(&mut ws.user_acc, &mut ws.touched_users, l, share);
        }
    }
    spread_users_to_items(g, ws);
}

fn diffuse_heats(g: &BipartiteGraph, target: u32, ws: &mut ScoreWorkspace) {
    for &s in g.items_of(target) {
        for &l in g.users_of(s) {
            bump(&mut ws.user_acc, &mut ws.touched_users, l, 1.0);
        }
    }
    spread_users_to_items(g, ws);
    for &j in &ws.touched {
        ws.scores[j as usize] /= g.item_degree(j) as f64;
    }
}

fn diffuse_hybrid(g: &BipartiteGraph, target: u32, lambda: f64, ws: &mut ScoreWorkspace) {
    diffuse_probs(g, target, ws);
    // stash the probs field, rebuild the heats field over the same two-hop
    // item set, then blend pointwise
    for &j in &ws.touched {
        ws.aux[j as usize] = ws.scores[j as usize];
        ws.scores[j as usize] = 0.0;
    }
    ws.touched.clear();
    diffuse_heats(g, target, ws);
    for &j in &ws.touched {
        let p = ws.aux[j as usize];
        let h = ws.scores[j as usize];
        ws.scores[j as usize] = lambda * p + (1.0 - lambda) * h;
        ws.aux[j as usize] = 0.0;
    }
}

/// Rescale every touched score by `k(item)^exponent`.
fn apply_degree_exponent(g: &BipartiteGraph, exponent: f64, ws: &mut ScoreWorkspace) {
    for &j in &ws.touched {
        ws.scores[j as usize] *= (g.item_degree(j) as f64).powf(exponent);
    }
}

fn diffuse_pliers(g: &BipartiteGraph, target: u32, ws: &mut ScoreWorkspace) {
    let ScoreWorkspace {
        scores,
        touched,
        w_acc,
        co_acc,
        source_touched,
        ..
    } = ws;
    // Sources are visited in ascending item order, so each scored item
    // accumulates its per-source contributions in a fixed order.
    for &s in g.items_of(target) {
        // one two-hop pass per source, collecting both the degree-normalized
        // diffusion weight and the raw co-occurrence count
        for &l in g.users_of(s) {
            let share = 1.0 / g.user_degree(l) as f64;
            for &j in g.items_of(l) {
                let w = &mut w_acc[j as usize];
                if *w == 0.0 {
                    source_touched.push(j);
                }
                *w += share;
                co_acc[j as usize] += 1.0;
            }
        }
        let ks = g.item_degree(s) as f64;
        for &j in source_touched.iter() {
            let kj = g.item_degree(j) as f64;
            let contribution = w_acc[j as usize] * co_acc[j as usize] / (ks * kj);
            bump(scores, touched, j, contribution);
            w_acc[j as usize] = 0.0;
            co_acc[j as usize] = 0.0;
        }
        source_touched.clear();
    }
}

fn diffuse(
    g: &BipartiteGraph,
    target: u32,
    algorithm: Algorithm,
    params: &ScorerParams,
    ws: &mut ScoreWorkspace,
) {
    debug_assert_eq!(
        ws.scores.len(),
        g.n_items(),
        "workspace built for another graph"
    );
    debug_assert_eq!(
        ws.user_acc.len(),
        g.n_users(),
        "workspace built for another graph"
    );
    match algorithm {
        Algorithm::Probs => diffuse_probs(g, target, ws),
        Algorithm::Heats => diffuse_heats(g, target, ws),
        Algorithm::Hybrid => diffuse_hybrid(g, target, params.lambda, ws),
        Algorithm::Pd => {
            diffuse_probs(g, target, ws);
            apply_degree_exponent(g, params.epsilon, ws);
        }
        Algorithm::Bhc => {
            diffuse_heats(g, target, ws);
            apply_degree_exponent(g, params.gamma, ws);
        }
        Algorithm::Pliers => diffuse_pliers(g, target, ws),
    }
}

/// Score every item for `target`. Allocates; for query loops prefer
/// [`recommend_into`] with a reused [`ScoreWorkspace`].
pub fn score(
    g: &BipartiteGraph,
    target: u32,
    algorithm: Algorithm,
    params: &ScorerParams,
) -> ScoreVector {
    let mut ws = ScoreWorkspace::new(g);
    diffuse(g, target, algorithm, params, &mut ws);
    let mut out = vec![0.0; g.n_items()];
    for &j in &ws.touched {
        out[j as usize] = ws.scores[j as usize];
    }
    out
}

pub fn score_probs(g: &BipartiteGraph, target: u32) -> ScoreVector {
    score(g, target, Algorithm::Probs, &ScorerParams::default())
}

pub fn score_heats(g: &BipartiteGraph, target: u32) -> ScoreVector {
    score(g, target, Algorithm::Heats, &ScorerParams::default())
}

pub fn score_hybrid(g: &BipartiteGraph, target: u32, lambda: f64) -> ScoreVector {
    score(
        g,
        target,
        Algorithm::Hybrid,
        &ScorerParams {
            lambda,
            ..ScorerParams::default()
        },
    )
}

pub fn score_pd(g: &BipartiteGraph, target: u32, epsilon: f64) -> ScoreVector {
    score(
        g,
        target,
        Algorithm::Pd,
        &ScorerParams {
            epsilon,
            ..ScorerParams::default()
        },
    )
}

pub fn score_bhc(g: &BipartiteGraph, target: u32, gamma: f64) -> ScoreVector {
    score(
        g,
        target,
        Algorithm::Bhc,
        &ScorerParams {
            gamma,
            ..ScorerParams::default()
        },
    )
}

pub fn score_pliers(g: &BipartiteGraph, target: u32) -> ScoreVector {
    score(g, target, Algorithm::Pliers, &ScorerParams::default())
}

/// Score descending, ties by ascending item index: a total order, so ranked
/// lists are fully deterministic.
#[inline]
fn rank_order(a: &(u32, f64), b: &(u32, f64)) -> Ordering {
    b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0))
}

/// Top-`l` recommendations for `target`, excluding items the target already
/// holds. Items with zero score never appear, so the list may be shorter than
/// `l`. Panics if `l == 0`.
pub fn recommend(
    g: &BipartiteGraph,
    target: u32,
    algorithm: Algorithm,
    params: &ScorerParams,
    l: usize,
) -> RankedList {
    recommend_into(g, target, algorithm, params, l, &mut ScoreWorkspace::new(g))
}

/// [`recommend`] against caller-owned scratch buffers; resets them afterwards.
pub fn recommend_into(
    g: &BipartiteGraph,
    target: u32,
    algorithm: Algorithm,
    params: &ScorerParams,
    l: usize,
    ws: &mut ScoreWorkspace,
) -> RankedList {
    assert!(l >= 1, "recommendation list length must be at least 1");
    diffuse(g, target, algorithm, params, ws);
    let owned = g.items_of(target);
    ws.candidates.clear();
    for &j in &ws.touched {
        // touched scores are strictly positive by construction, so the only
        // exclusion left is the target's own items
        if owned.binary_search(&j).is_err() {
            ws.candidates.push((j, ws.scores[j as usize]));
        }
        ws.scores[j as usize] = 0.0;
    }
    ws.touched.clear();
    if ws.candidates.len() > l {
        ws.candidates.select_nth_unstable_by(l - 1, rank_order);
        ws.candidates.truncate(l);
    }
    ws.candidates.sort_unstable_by(rank_order);
    RankedList {
        target,
        entries: ws.candidates.clone(),
    }
}

/// Recommend for a batch of users in parallel. Output order follows `targets`,
/// and since each query is scored sequentially, results are byte-identical
/// under any rayon thread count.
pub fn recommend_batch(
    g: &BipartiteGraph,
    targets: &[u32],
    algorithm: Algorithm,
    params: &ScorerParams,
    l: usize,
) -> Vec<RankedList> {
    targets
        .par_iter()
        .map_init(
            || ScoreWorkspace::new(g),
            |ws, &t| recommend_into(g, t, algorithm, params, l, ws),
        )
        .collect()
}
