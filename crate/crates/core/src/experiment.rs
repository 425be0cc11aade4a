//! Seeded experiment harness: personalization runs on the full graph and
//! link-prediction runs against a withheld probe set.
//!
//! Everything here is a pure function of `(graph, config)`. The only
//! randomness is the probe draw, which is a partial Fisher-Yates shuffle of
//! the canonical edge ordering driven by ChaCha8 seeded from `config.seed` —
//! so a run is reproducible from its report alone, and repeated runs are
//! byte-identical regardless of how many rayon workers execute them.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::graph::BipartiteGraph;
use crate::metrics::{
    novelty_at_l, personalization, precision_at_l, recall_at_l, LinkPredScores, OverlapForm,
    PersonalizationScores,
};
use crate::rng;
use crate::scorer::{recommend_batch, Algorithm, ScorerParams};

/// The list lengths link-prediction curves are evaluated at by default:
/// every length up to 20, then decades up to 100.
pub fn default_l_sweep() -> Vec<usize> {
    (1..=20).chain((30..=100).step_by(10)).collect()
}

/// Resolved settings for one experiment run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub algorithms: Vec<Algorithm>,
    pub params: ScorerParams,
    /// Recommendation list length for personalization runs.
    pub list_length: usize,
    /// Fraction of links withheld as the probe set in link-prediction runs.
    pub removal_fraction: f64,
    /// List lengths at which link-prediction curves are sampled.
    pub l_sweep: Vec<usize>,
    pub seed: u64,
    pub overlap_form: OverlapForm,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            algorithms: Algorithm::ALL.to_vec(),
            params: ScorerParams::default(),
            list_length: 10,
            removal_fraction: 0.10,
            l_sweep: default_l_sweep(),
            seed: 42,
            overlap_form: OverlapForm::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if self.algorithms.is_empty() {
            return Err(Error::invalid("no algorithms requested"));
        }
        for (i, a) in self.algorithms.iter().enumerate() {
            if self.algorithms[..i].contains(a) {
                return Err(Error::invalid(format!("algorithm {a} requested twice")));
            }
        }
        if self.list_length == 0 {
            return Err(Error::invalid("list_length must be at least 1"));
        }
        check_fraction(self.removal_fraction)?;
        if self.l_sweep.is_empty() {
            return Err(Error::invalid("l_sweep must not be empty"));
        }
        if self.l_sweep[0] == 0 {
            return Err(Error::invalid("l_sweep entries must be at least 1"));
        }
        if self.l_sweep.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("l_sweep must be strictly increasing"));
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON encoding; reports embed it so any two
    /// runs can be compared for config equality at a glance.
    pub fn config_hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        let digest = Sha256::digest(json.as_bytes());
        let mut hex = String::with_capacity(64);
        for byte in digest {
            use std::fmt::Write;
            write!(hex, "{byte:02x}").expect("write to string");
        }
        hex
    }
}

fn check_fraction(fraction: f64) -> Result<()> {
    if !fraction.is_finite() || fraction <= 0.0 || fraction >= 1.0 {
        return Err(Error::invalid(format!(
            "removal fraction must lie strictly between 0 and 1, got {fraction}"
        )));
    }
    Ok(())
}

/// A train/probe partition of a graph's links.
#[derive(Debug, Clone)]
pub struct LinkSplit {
    /// The graph with probe links removed. Node tables are untouched, so
    /// indices agree with the original graph.
    pub train: BipartiteGraph,
    /// Withheld items per user (sorted), indexed by user.
    pub probe: Vec<Vec<u32>>,
    pub probe_edges: usize,
    /// Users who had links but lost all of them to the probe draw; evaluators
    /// skip them since nothing can be scored for an empty training profile.
    pub isolated_users: Vec<u32>,
    pub fraction: f64,
    pub seed: u64,
}

/// Withhold `round(fraction * links)` links (half rounds away from zero),
/// drawn uniformly without replacement. Needs a graph with at least 10 links
/// and a fraction strictly inside (0, 1).
pub fn split_links(g: &BipartiteGraph, fraction: f64, seed: u64) -> Result<LinkSplit> {
    check_fraction(fraction)?;
    let links = g.edge_count();
    if links < 10 {
        return Err(Error::InsufficientEdges {
            have: links,
            need: 10,
        });
    }
    let probe_edges = (fraction * links as f64).round() as usize;
    let mut edges: Vec<(u32, u32)> = g.edge_indices().collect();
    let mut rng = rng::seeded(seed);
    rng::partial_shuffle(&mut rng, &mut edges, probe_edges);
    let removed = &edges[..probe_edges];

    let mut probe: Vec<Vec<u32>> = vec![Vec::new(); g.n_users()];
    for &(u, i) in removed {
        probe[u as usize].push(i);
    }
    for items in &mut probe {
        items.sort_unstable();
    }
    let train = g.remove_edges(removed)?;
    let isolated_users = (0..g.n_users() as u32)
        .filter(|&u| g.user_degree(u) > 0 && train.user_degree(u) == 0)
        .collect();
    Ok(LinkSplit {
        train,
        probe,
        probe_edges,
        isolated_users,
        fraction,
        seed,
    })
}

/// Run identity embedded in every report: the resolved config plus its hash.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMeta {
    pub config_hash: String,
    pub config: ExperimentConfig,
}

impl RunMeta {
    fn for_config(config: &ExperimentConfig) -> Self {
        RunMeta {
            config_hash: config.config_hash(),
            config: config.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PersonalizationRow {
    pub algorithm: Algorithm,
    pub scores: PersonalizationScores,
}

/// Personalization metrics for each requested algorithm on one graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub meta: RunMeta,
    pub rows: Vec<PersonalizationRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub algorithm: Algorithm,
    pub points: Vec<LinkPredScores>,
}

/// Link-prediction curves for each requested algorithm, plus the mean
/// user-level item popularity of the unsplit graph — the natural reference
/// line for the novelty curves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveReport {
    pub meta: RunMeta,
    pub mean_user_tag_popularity: f64,
    pub curves: Vec<CurveRow>,
}

/// Recommend `config.list_length` items to every user on the full graph and
/// score personalization metrics per algorithm.
pub fn run_personalization(g: &BipartiteGraph, config: &ExperimentConfig) -> Result<MetricsReport> {
    config.validate()?;
    let targets: Vec<u32> = (0..g.n_users() as u32)
        .filter(|&u| g.user_degree(u) > 0)
        .collect();
    let mut rows = Vec::with_capacity(config.algorithms.len());
    for &algorithm in &config.algorithms {
        let recs = recommend_batch(g, &targets, algorithm, &config.params, config.list_length);
        let scores = personalization(g, &recs, config.overlap_form)?;
        rows.push(PersonalizationRow { algorithm, scores });
    }
    Ok(MetricsReport {
        meta: RunMeta::for_config(config),
        rows,
    })
}

/// Evaluate recall / precision / novelty curves for an existing split.
/// Recommendations are computed once per algorithm at the largest swept
/// length; shorter lengths reuse their prefixes.
pub fn link_prediction_curves(
    split: &LinkSplit,
    config: &ExperimentConfig,
) -> Result<Vec<CurveRow>> {
    config.validate()?;
    let l_max = *config.l_sweep.last().expect("validated non-empty");
    let targets: Vec<u32> = (0..split.train.n_users() as u32)
        .filter(|&u| split.train.user_degree(u) > 0)
        .collect();
    let mut curves = Vec::with_capacity(config.algorithms.len());
    for &algorithm in &config.algorithms {
        let recs = recommend_batch(&split.train, &targets, algorithm, &config.params, l_max);
        let points = config
            .l_sweep
            .iter()
            .map(|&l| {
                Ok(LinkPredScores {
                    l,
                    recall: recall_at_l(&split.probe, &recs, l)?,
                    precision: precision_at_l(&split.probe, &recs, l)?,
                    novelty: novelty_at_l(&split.train, &recs, l)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        curves.push(CurveRow { algorithm, points });
    }
    Ok(curves)
}

/// Withhold a probe set, recommend from the rest, and score how well each
/// algorithm recovers the withheld links.
pub fn run_link_prediction(g: &BipartiteGraph, config: &ExperimentConfig) -> Result<CurveReport> {
    config.validate()?;
    let split = split_links(g, config.removal_fraction, config.seed)?;
    if split.probe_edges == 0 {
        return Err(Error::EmptyProbe {
            links: g.edge_count(),
            fraction: config.removal_fraction,
        });
    }
    // novelty is read against the popularity level of the *unsplit* graph
    let mean_user_tag_popularity = g.stats().mean_user_tag_popularity;
    let curves = link_prediction_curves(&split, config)?;
    Ok(CurveReport {
        meta: RunMeta::for_config(config),
        mean_user_tag_popularity,
        curves,
    })
}
