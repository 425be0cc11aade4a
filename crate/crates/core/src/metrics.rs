//! Evaluation metrics.
//!
//! Two families:
//!
//! * Personalization, judged on the full graph: [`variance_v`] measures how
//!   far recommended item degrees sit from the mean degree of what the user
//!   already holds (higher = recommendations diverge more from the user's
//!   usual popularity level), and [`overlap_o`] measures audience overlap
//!   between recommended and held items (higher = recommendations stay close
//!   to the user's crowd).
//! * Link prediction, judged against a probe set of withheld edges:
//!   [`recall_at_l`], [`precision_at_l`] and [`novelty_at_l`].
//!
//! All metrics average per-user terms; users lacking the ingredients for a
//! term (no recommendations, or no probe edges where probes are involved) are
//! skipped, not counted as zero. Per-user terms are computed in parallel, but
//! the final aggregation always folds in input order, so results do not
//! depend on the thread count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::BipartiteGraph;
use crate::scorer::RankedList;

/// How [`overlap_o`] combines the per-held-item Jaccard similarities for one
/// recommended item.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OverlapForm {
    /// Mean of the Jaccard similarities over the user's held items.
    #[default]
    Mean,
    /// Product of the Jaccard similarities, divided by the number of held
    /// items. Decays quickly as users hold more items; kept for comparison.
    ScaledProduct,
}

/// Personalization summary for one algorithm over a set of users.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PersonalizationScores {
    pub v: f64,
    pub o: f64,
    /// Users that actually received recommendations and entered the averages.
    pub users_counted: usize,
}

/// One point of a link-prediction curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkPredScores {
    pub l: usize,
    pub recall: f64,
    pub precision: f64,
    pub novelty: f64,
}

/// Jaccard similarity of two sorted ascending index slices. Two empty sets
/// count as zero overlap.
pub fn jaccard(a: &[u32], b: &[u32]) -> f64 {
    let (mut xs, mut ys) = (a.iter(), b.iter());
    let (mut x, mut y) = (xs.next(), ys.next());
    let mut shared = 0usize;
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
    let union = a.len() + b.len() - shared;
    if union == 0 {
        0.0
    } else {
        shared as f64 / union as f64
    }
}

/// Every rec target must own at least one item, otherwise the per-user mean
/// degree is undefined. Returns the first offender by list order.
fn check_targets_own_items(g: &BipartiteGraph, recs: &[RankedList]) -> Result<()> {
    for rl in recs {
        if g.user_degree(rl.target) == 0 {
            return Err(Error::UserWithoutItems {
                user: g.user_id(rl.target),
            });
        }
    }
    Ok(())
}

fn mean_owned_degree(g: &BipartiteGraph, user: u32) -> f64 {
    let owned = g.items_of(user);
    let total: f64 = owned.iter().map(|&i| g.item_degree(i) as f64).sum();
    total / owned.len() as f64
}

/// Mean over users of the average absolute gap between each recommended
/// item's degree and the mean degree of the user's held items. Users with an
/// empty recommendation list are skipped; an empty average is 0.
pub fn variance_v(g: &BipartiteGraph, recs: &[RankedList]) -> Result<f64> {
    check_targets_own_items(g, recs)?;
    let terms: Vec<Option<f64>> = recs
        .par_iter()
        .map(|rl| {
            if rl.entries.is_empty() {
                return None;
            }
            let p = mean_owned_degree(g, rl.target);
            let gap: f64 = rl
                .entries
                .iter()
                .map(|&(j, _)| (g.item_degree(j) as f64 - p).abs())
                .sum();
            Some(gap / rl.entries.len() as f64)
        })
        .collect();
    Ok(mean_of_present(&terms))
}

/// Mean over users of the average audience overlap between each recommended
/// item and the user's held items, combined per `form`. Skips users with
/// empty lists; an empty average is 0.
pub fn overlap_o(g: &BipartiteGraph, recs: &[RankedList], form: OverlapForm) -> Result<f64> {
    check_targets_own_items(g, recs)?;
    let terms: Vec<Option<f64>> = recs
        .par_iter()
        .map(|rl| {
            if rl.entries.is_empty() {
                return None;
            }
            let owned = g.items_of(rl.target);
            let z = owned.len() as f64;
            let per_user: f64 = rl
                .entries
                .iter()
                .map(|&(q, _)| {
                    let held = g.users_of(q);
                    match form {
                        OverlapForm::Mean => {
                            let total: f64 =
                                owned.iter().map(|&k| jaccard(held, g.users_of(k))).sum();
                            total / z
                        }
                        OverlapForm::ScaledProduct => {
                            let product: f64 = owned
                                .iter()
                                .map(|&k| jaccard(held, g.users_of(k)))
                                .product();
                            product / z
                        }
                    }
                })
                .sum();
            Some(per_user / rl.entries.len() as f64)
        })
        .collect();
    Ok(mean_of_present(&terms))
}

/// Both personalization metrics plus the count of users that entered them.
pub fn personalization(
    g: &BipartiteGraph,
    recs: &[RankedList],
    form: OverlapForm,
) -> Result<PersonalizationScores> {
    Ok(PersonalizationScores {
        v: variance_v(g, recs)?,
        o: overlap_o(g, recs, form)?,
        users_counted: recs.iter().filter(|rl| !rl.entries.is_empty()).count(),
    })
}

fn check_positive_l(l: usize) -> Result<()> {
    if l == 0 {
        return Err(Error::invalid("list length l must be at least 1"));
    }
    Ok(())
}

fn hits_in_top(rl: &RankedList, probe_items: &[u32], l: usize) -> usize {
    let take = l.min(rl.entries.len());
    rl.entries[..take]
        .iter()
        .filter(|(j, _)| probe_items.binary_search(j).is_ok())
        .count()
}

/// Mean over users (with a nonempty probe set) of `hits in top-l / l`.
/// `probe` holds each user's withheld items, sorted, indexed by user.
pub fn recall_at_l(probe: &[Vec<u32>], recs: &[RankedList], l: usize) -> Result<f64> {
    check_positive_l(l)?;
    let mut sum = 0.0;
    let mut counted = 0usize;
    for rl in recs {
        let withheld = &probe[rl.target as usize];
        if withheld.is_empty() {
            continue;
        }
        sum += hits_in_top(rl, withheld, l) as f64 / l as f64;
        counted += 1;
    }
    Ok(if counted > 0 {
        sum / counted as f64
    } else {
        0.0
    })
}

/// Mean over users (with a nonempty probe set) of
/// `hits in top-l / size of the user's probe set`.
pub fn precision_at_l(probe: &[Vec<u32>], recs: &[RankedList], l: usize) -> Result<f64> {
    check_positive_l(l)?;
    let mut sum = 0.0;
    let mut counted = 0usize;
    for rl in recs {
        let withheld = &probe[rl.target as usize];
        if withheld.is_empty() {
            continue;
        }
        sum += hits_in_top(rl, withheld, l) as f64 / withheld.len() as f64;
        counted += 1;
    }
    Ok(if counted > 0 {
        sum / counted as f64
    } else {
        0.0
    })
}

/// Mean over users of the average degree (in `g`) of their top-l items —
/// the popularity level the recommender pushes. Users with empty lists are
/// skipped.
pub fn novelty_at_l(g: &BipartiteGraph, recs: &[RankedList], l: usize) -> Result<f64> {
    check_positive_l(l)?;
    let mut sum = 0.0;
    let mut counted = 0usize;
    for rl in recs {
        let take = l.min(rl.entries.len());
        if take == 0 {
            continue;
        }
        let popularity: f64 = rl.entries[..take]
            .iter()
            .map(|&(j, _)| g.item_degree(j) as f64)
            .sum();
        sum += popularity / take as f64;
        counted += 1;
    }
    Ok(if counted > 0 {
        sum / counted as f64
    } else {
        0.0
    })
}

fn mean_of_present(terms: &[Option<f64>]) -> f64 {
    let mut sum = 0.0;
    let mut counted = 0usize;
    for t in terms.iter().flatten() {
        sum += t;
        counted += 1;
    }
    if counted > 0 {
        sum / counted as f64
    } else {
        0.0
    }
}
