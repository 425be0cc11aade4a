//! Deterministic synthetic datasets.
//!
//! Real tagging and rating dumps share a texture: most items sit in the long
//! tail while a few are massively popular, and user activity is skewed the
//! same way but less sharply. The generator reproduces that shape with
//! power-law sampling (`weight(rank) = rank^-exponent` on each side),
//! guarantees every user and every item keeps at least one link, and places
//! exactly the requested number of distinct links. Everything is a pure
//! function of the spec, so a manifest of the spec plus resulting stats pins
//! a fixture completely.

use std::collections::HashSet;
use std::fs;
use std::path::Path;

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{BipartiteGraph, GraphStats};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FixtureSpec {
    pub users: usize,
    pub items: usize,
    pub links: usize,
    /// Skew of user activity; 0 is uniform.
    pub user_exponent: f64,
    /// Skew of item popularity; 0 is uniform, higher piles links onto a few
    /// blockbusters.
    pub item_exponent: f64,
    pub seed: u64,
}

impl Default for FixtureSpec {
    fn default() -> Self {
        FixtureSpec {
            users: 2000,
            items: 8000,
            links: 60_000,
            user_exponent: 0.5,
            item_exponent: 0.8,
            seed: 42,
        }
    }
}

impl FixtureSpec {
    pub fn validate(&self) -> Result<()> {
        if self.users == 0 || self.items == 0 {
            return Err(Error::invalid(
                "fixture needs at least one user and one item",
            ));
        }
        if self.links < self.users + self.items {
            return Err(Error::invalid(format!(
                "need at least users + items = {} links to cover both sides, got {}",
                self.users + self.items,
                self.links
            )));
        }
        if self.links > self.users * self.items {
            return Err(Error::invalid(format!(
                "{} links cannot be distinct in a {} x {} graph",
                self.links, self.users, self.items
            )));
        }
        for (name, value) in [
            ("user_exponent", self.user_exponent),
            ("item_exponent", self.item_exponent),
        ] {
            if !value.is_finite() || value < 0.0 {
                return Err(Error::invalid(format!(
                    "{name} must be finite and non-negative, got {value}"
                )));
            }
        }
        Ok(())
    }
}

/// Cumulative power-law weights over ranks `1..=n`, drawn by inverse lookup.
struct Cumulative {
    cum: Vec<f64>,
}

impl Cumulative {
    fn power(n: usize, exponent: f64) -> Cumulative {
        let mut cum = Vec::with_capacity(n);
        let mut total = 0.0;
        for rank in 1..=n {
            total += (rank as f64).powf(-exponent);
            cum.push(total);
        }
        Cumulative { cum }
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> usize {
        let total = *self.cum.last().expect("non-empty weights");
        let r = rng::unit_f64(rng) * total;
        self.cum
            .partition_point(|&c| c <= r)
            .min(self.cum.len() - 1)
    }
}

/// Generate the graph a spec describes. External ids are the dense ranks
/// themselves (`0..users`, `0..items`), with lower ranks the more popular.
pub fn generate(spec: &FixtureSpec) -> Result<BipartiteGraph> {
    spec.validate()?;
    let mut rng = rng::seeded(spec.seed);
    let user_weights = Cumulative::power(spec.users, spec.user_exponent);
    let item_weights = Cumulative::power(spec.items, spec.item_exponent);

    let mut seen: HashSet<(u32, u32)> = HashSet::with_capacity(spec.links);
    let mut edges: Vec<(u64, u64)> = Vec::with_capacity(spec.links);
    let mut budget = 100 * spec.links + 10_000;
    let place = |u: u32, i: u32, seen: &mut HashSet<(u32, u32)>, edges: &mut Vec<(u64, u64)>| {
        if seen.insert((u, i)) {
            edges.push((u as u64, i as u64));
            true
        } else {
            false
        }
    };

    // coverage: one link per user, then one per item
    for u in 0..spec.users as u32 {
        loop {
            budget -= 1;
            if budget == 0 {
                return Err(too_dense(spec));
            }
            let i = item_weights.draw(&mut rng) as u32;
            if place(u, i, &mut seen, &mut edges) {
                break;
            }
        }
    }
    for i in 0..spec.items as u32 {
        loop {
            budget -= 1;
            if budget == 0 {
                return Err(too_dense(spec));
            }
            let u = user_weights.draw(&mut rng) as u32;
            if place(u, i, &mut seen, &mut edges) {
                break;
            }
        }
    }
    // fill the rest by joint preferential sampling
    while edges.len() < spec.links {
        budget -= 1;
        if budget == 0 {
            return Err(too_dense(spec));
        }
        let u = user_weights.draw(&mut rng) as u32;
        let i = item_weights.draw(&mut rng) as u32;
        place(u, i, &mut seen, &mut edges);
    }

    let (graph, _) = BipartiteGraph::from_edges(&edges);
    Ok(graph)
}

fn too_dense(spec: &FixtureSpec) -> Error {
    Error::invalid(format!(
        "gave up placing {} distinct links in a {} x {} graph; lower the link \
         count or the exponents",
        spec.links, spec.users, spec.items
    ))
}

/// A fixture's identity: the spec that generates it and the stats it lands on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixtureManifest {
    pub spec: FixtureSpec,
    pub stats: GraphStats,
}

impl FixtureManifest {
    pub fn new(spec: FixtureSpec, graph: &BipartiteGraph) -> FixtureManifest {
        FixtureManifest {
            spec,
            stats: graph.stats(),
        }
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut text = serde_json::to_string_pretty(self).expect("manifest serializes");
        text.push('\n');
        fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn read(path: impl AsRef<Path>) -> Result<FixtureManifest> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: e.line(),
            reason: e.to_string(),
        })
    }
}
