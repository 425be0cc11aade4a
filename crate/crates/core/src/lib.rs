//! Diffusion-based recommenders on user-item bipartite graphs, with the
//! evaluation harness to compare them.
//!
//! The crate is organized around one flow:
//!
//! 1. [`graph`] — build a compact [`BipartiteGraph`] from `(user, item)`
//!    pairs ([`dataio`] loads them from delimited files, [`fixture`]
//!    synthesizes skewed ones from a seed).
//! 2. [`scorer`] — score items for a target user with one of six two-hop
//!    diffusion algorithms and rank the top L.
//! 3. [`metrics`] / [`experiment`] — judge the rankings, either as
//!    personalization scores on the full graph or as seeded link-prediction
//!    experiments (withhold links, measure recovery).
//!
//! Determinism is a design contract throughout: the same graph, config and
//! seed produce byte-identical reports under any rayon thread count.

pub mod dataio;
pub mod error;
pub mod experiment;
pub mod fixture;
pub mod graph;
pub mod metrics;
mod rng;
pub mod scorer;

pub use error::{Error, Result};
pub use experiment::{
    default_l_sweep, run_link_prediction, run_personalization, split_links, CurveReport, CurveRow,
    ExperimentConfig, LinkSplit, MetricsReport, PersonalizationRow, RunMeta,
};
pub use graph::{BipartiteGraph, BuildSummary, GraphStats};
pub use metrics::{LinkPredScores, OverlapForm, PersonalizationScores};
pub use scorer::{Algorithm, RankedList, ScoreVector, ScoreWorkspace, ScorerParams};
