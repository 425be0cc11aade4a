//! Compact bipartite user-item graph.
//!
//! External ids are arbitrary `u64`s; construction compacts each side into
//! dense indices (numbered in ascending id order, so the layout is independent
//! of input order) and stores adjacency CSR-style in both directions with
//! neighbor lists sorted ascending. That makes degrees O(1), edge membership
//! O(log k), and co-occurrence counting a linear merge — the operations the
//! diffusion scorers lean on.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One side of the adjacency in compressed sparse row form.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
struct Csr {
    offsets: Vec<usize>,
    targets: Vec<u32>,
}

impl Csr {
    /// Build from edges sorted by `(row, col)`; rows index `0..rows`.
    fn from_sorted(rows: usize, edges: impl Iterator<Item = (u32, u32)> + Clone) -> Csr {
        let mut offsets = vec![0usize; rows + 1];
        for (r, _) in edges.clone() {
            offsets[r as usize + 1] += 1;
        }
        for r in 0..rows {
            offsets[r + 1] += offsets[r];
        }
        let mut targets = vec![0u32; offsets[rows]];
        let mut cursor = offsets.clone();
        for (r, c) in edges {
            targets[cursor[r as usize]] = c;
            cursor[r as usize] += 1;
        }
        Csr { offsets, targets }
    }

    #[inline]
    fn row(&self, r: u32) -> &[u32] {
        &self.targets[self.offsets[r as usize]..self.offsets[r as usize + 1]]
    }
}

/// Sparse user-item graph with dense `u32` indices on both sides.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BipartiteGraph {
    user_ids: Vec<u64>,
    item_ids: Vec<u64>,
    user_adj: Csr,
    item_adj: Csr,
    edges: usize,
}

/// What construction did with the raw pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BuildSummary {
    pub pairs_in: usize,
    pub duplicates_collapsed: usize,
}

/// Headline numbers for a graph, in the shape dataset tables are usually
/// reported: counts, mean item degree, and the mean over users of the average
/// degree of their own items (written `mean_user_tag_popularity` here).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GraphStats {
    pub n_users: usize,
    pub n_items: usize,
    pub n_links: usize,
    pub mean_item_degree: f64,
    pub mean_user_tag_popularity: f64,
}

impl BipartiteGraph {
    /// Build from `(user id, item id)` pairs. Duplicate pairs collapse to a
    /// single edge; the summary reports how many were dropped.
    pub fn from_edges(pairs: &[(u64, u64)]) -> (BipartiteGraph, BuildSummary) {
        let mut user_ids: Vec<u64> = pairs.iter().map(|&(u, _)| u).collect();
        user_ids.sort_unstable();
        user_ids.dedup();
        let mut item_ids: Vec<u64> = pairs.iter().map(|&(_, i)| i).collect();
        item_ids.sort_unstable();
        item_ids.dedup();

        let mut idx_edges: Vec<(u32, u32)> = pairs
            .iter()
            .map(|&(u, i)| {
                let ui = user_ids.binary_search(&u).expect("id present") as u32;
                let ii = item_ids.binary_search(&i).expect("id present") as u32;
                (ui, ii)
            })
            .collect();
        idx_edges.sort_unstable();
        let before = idx_edges.len();
        idx_edges.dedup();
        let summary = BuildSummary {
            pairs_in: before,
            duplicates_collapsed: before - idx_edges.len(),
        };
        (
            BipartiteGraph::assemble(user_ids, item_ids, idx_edges),
            summary,
        )
    }

    /// Assemble from already-compacted parts. `idx_edges` must be sorted by
    /// `(user, item)` and duplicate-free; indices must fit the id tables.
    fn assemble(user_ids: Vec<u64>, item_ids: Vec<u64>, idx_edges: Vec<(u32, u32)>) -> Self {
        let user_adj = Csr::from_sorted(user_ids.len(), idx_edges.iter().copied());
        let mut by_item: Vec<(u32, u32)> = idx_edges.iter().map(|&(u, i)| (i, u)).collect();
        by_item.sort_unstable();
        let item_adj = Csr::from_sorted(item_ids.len(), by_item.iter().copied());
        BipartiteGraph {
            user_ids,
            item_ids,
            user_adj,
            item_adj,
            edges: idx_edges.len(),
        }
    }

    pub fn n_users(&self) -> usize {
        self.user_ids.len()
    }

    pub fn n_items(&self) -> usize {
        self.item_ids.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges
    }

    /// Items of `user`, ascending. Panics if the index is out of range.
    #[inline]
    pub fn items_of(&self, user: u32) -> &[u32] {
        self.user_adj.row(user)
    }

    /// Users holding `item`, ascending. Panics if the index is out of range.
    #[inline]
    pub fn users_of(&self, item: u32) -> &[u32] {
        self.item_adj.row(item)
    }

    #[inline]
    pub fn user_degree(&self, user: u32) -> usize {
        self.items_of(user).len()
    }

    #[inline]
    pub fn item_degree(&self, item: u32) -> usize {
        self.users_of(item).len()
    }

    pub fn has_edge(&self, user: u32, item: u32) -> bool {
        self.items_of(user).binary_search(&item).is_ok()
    }

    /// Number of users holding both items; a linear merge of the two sorted
    /// holder lists. `co_occurrence(a, a)` is the degree of `a`.
    pub fn co_occurrence(&self, a: u32, b: u32) -> usize {
        let (mut xs, mut ys) = (self.users_of(a).iter(), self.users_of(b).iter());
        let (mut x, mut y) = (xs.next(), ys.next());
        let mut shared = 0;
        while let (Some(&u), Some(&v)) = (x, y) {
            match u.cmp(&v) {
                std::cmp::Ordering::Less => x = xs.next(),
                std::cmp::Ordering::Greater => y = ys.next(),
                std::cmp::Ordering::Equal => {
                    shared += 1;
                    x = xs.next();
                    y = ys.next();
                }
            }
        }
        shared
    }

    pub fn user_id(&self, user: u32) -> u64 {
        self.user_ids[user as usize]
    }

    pub fn item_id(&self, item: u32) -> u64 {
        self.item_ids[item as usize]
    }

    pub fn user_index_of(&self, id: u64) -> Option<u32> {
        self.user_ids.binary_search(&id).ok().map(|i| i as u32)
    }

    pub fn item_index_of(&self, id: u64) -> Option<u32> {
        self.item_ids.binary_search(&id).ok().map(|i| i as u32)
    }

    /// All edges as index pairs in canonical `(user, item)` ascending order.
    pub fn edge_indices(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        (0..self.n_users() as u32).flat_map(move |u| self.items_of(u).iter().map(move |&i| (u, i)))
    }

    /// All edges as external id pairs, in canonical order.
    pub fn edge_list(&self) -> Vec<(u64, u64)> {
        self.edge_indices()
            .map(|(u, i)| (self.user_id(u), self.item_id(i)))
            .collect()
    }

    /// Copy of the graph without the listed edges (index pairs). The node
    /// tables are kept as-is, so indices stay valid and users or items whose
    /// last edge is removed remain present with degree zero. Listing an edge
    /// that is absent — or listing one twice — is an error naming the edge by
    /// external ids.
    pub fn remove_edges(&self, remove: &[(u32, u32)]) -> Result<BipartiteGraph> {
        let mut rm: Vec<(u32, u32)> = remove.to_vec();
        rm.sort_unstable();
        for w in rm.windows(2) {
            if w[0] == w[1] {
                return Err(self.missing_edge(w[0]));
            }
        }
        for &(u, i) in &rm {
            if !self.has_edge(u, i) {
                return Err(self.missing_edge((u, i)));
            }
        }
        let mut kept = Vec::with_capacity(self.edges - rm.len());
        let mut next = 0usize;
        for e in self.edge_indices() {
            if next < rm.len() && rm[next] == e {
                next += 1;
            } else {
                kept.push(e);
            }
        }
        Ok(BipartiteGraph::assemble(
            self.user_ids.clone(),
            self.item_ids.clone(),
            kept,
        ))
    }

    fn missing_edge(&self, (u, i): (u32, u32)) -> Error {
        Error::EdgeNotFound {
            user: self.user_id(u),
            item: self.item_id(i),
        }
    }

    /// Subgraph induced by the given users: they keep their full item lists,
    /// items no retained user holds are dropped, and retained users keep their
    /// external ids (so do items). Duplicate user indices are fine.
    pub fn induced_by_users(&self, users: &[u32]) -> BipartiteGraph {
        let mut keep: Vec<u32> = users.to_vec();
        keep.sort_unstable();
        keep.dedup();
        let user_ids: Vec<u64> = keep.iter().map(|&u| self.user_id(u)).collect();

        let mut item_set: HashSet<u32> = HashSet::new();
        for &u in &keep {
            item_set.extend(self.items_of(u).iter().copied());
        }
        let mut old_items: Vec<u32> = item_set.into_iter().collect();
        old_items.sort_unstable();
        let item_ids: Vec<u64> = old_items.iter().map(|&i| self.item_id(i)).collect();

        let mut idx_edges = Vec::new();
        for (new_u, &old_u) in keep.iter().enumerate() {
            for &old_i in self.items_of(old_u) {
                let new_i = old_items.binary_search(&old_i).expect("item retained") as u32;
                idx_edges.push((new_u as u32, new_i));
            }
        }
        BipartiteGraph::assemble(user_ids, item_ids, idx_edges)
    }

    pub fn stats(&self) -> GraphStats {
        let n_items = self.n_items();
        let mean_item_degree = if n_items > 0 {
            self.edges as f64 / n_items as f64
        } else {
            0.0
        };
        let mut sum = 0.0;
        let mut counted = 0usize;
        for u in 0..self.n_users() as u32 {
            let items = self.items_of(u);
            if items.is_empty() {
                continue;
            }
            let popularity: f64 = items.iter().map(|&i| self.item_degree(i) as f64).sum();
            sum += popularity / items.len() as f64;
            counted += 1;
        }
        GraphStats {
            n_users: self.n_users(),
            n_items,
            n_links: self.edges,
            mean_item_degree,
            mean_user_tag_popularity: if counted > 0 {
                sum / counted as f64
            } else {
                0.0
            },
        }
    }
}
