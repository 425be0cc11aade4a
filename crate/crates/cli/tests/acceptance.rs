//! The exit gate: every headline guarantee of the crate, pinned at its stated
//! scale, tolerance and time budget.
//!
//! The library tests sample these properties broadly; this suite is the
//! contract. Each test covers one guarantee, states its bound in the
//! assertion, and prints a `PASS` line with the measured margin so a test log
//! doubles as an audit trail:
//!
//! 1. six scorers equal literal nested-sum references on 200 random graphs
//! 2. degenerate parameters collapse onto probs / heats bitwise
//! 3. pliers never out-scores probs, and matches it on complete graphs
//! 4. probs conserves diffused mass for every target
//! 5. V, O, R, P, N equal straight-from-definition evaluations
//! 6. pliers personalizes better (lower V) than probs and hybrid at scale
//! 7. pliers novelty sits between heats and probs, nearer the popularity mean
//! 8. reports are byte-identical under any thread count
//! 9. `stats` reproduces exact counts from real-world dump layouts

use std::collections::HashSet;
use std::process::Command;
use std::sync::OnceLock;
use std::time::Instant;

use rayon::prelude::*;

use pliers::experiment::{run_link_prediction, run_personalization, ExperimentConfig};
use pliers::fixture::{generate, FixtureSpec};
use pliers::metrics::{
    novelty_at_l, overlap_o, precision_at_l, recall_at_l, variance_v, OverlapForm,
};
use pliers::scorer::{
    recommend, recommend_batch, score_bhc, score_heats, score_hybrid, score_pd, score_pliers,
    score_probs,
};
use pliers::{Algorithm, BipartiteGraph, ScorerParams};
use pliers_testsupport as oracle;

/// The shared batch of small random graphs the scorer guarantees are checked
/// on: 200 graphs, up to 50 users and 100 items, densities spanning 0.02-0.3.
fn oracle_suite() -> &'static [BipartiteGraph] {
    static SUITE: OnceLock<Vec<BipartiteGraph>> = OnceLock::new();
    SUITE.get_or_init(|| {
        (0..200u64)
            .map(|i| oracle::random_bipartite(10_000 + i, 50, 100, (0.02, 0.3)))
            .collect()
    })
}

fn params_for(i: u64) -> ScorerParams {
    ScorerParams {
        lambda: (i % 11) as f64 / 10.0,
        epsilon: -1.5 + 0.25 * (i % 7) as f64,
        gamma: 0.4 * (i % 5) as f64,
    }
}

/// Five mid-size skewed fixtures shared by the two directional tests.
fn powerlaw_fixtures() -> &'static [BipartiteGraph] {
    static FIXTURES: OnceLock<Vec<BipartiteGraph>> = OnceLock::new();
    FIXTURES.get_or_init(|| {
        (1..=5u64)
            .map(|seed| {
                generate(&FixtureSpec {
                    users: 2_000,
                    items: 20_000,
                    links: 60_000,
                    seed,
                    ..FixtureSpec::default()
                })
                .expect("fixture spec is satisfiable")
            })
            .collect()
    })
}

fn median(mut values: Vec<f64>) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        (values[n / 2 - 1] + values[n / 2]) / 2.0
    }
}

#[test]
fn scorers_match_literal_references_on_two_hundred_graphs() {
    const TOL: f64 = 1e-10;
    let started = Instant::now();
    let suite = oracle_suite();
    let (targets, worst): (usize, f64) = suite
        .par_iter()
        .enumerate()
        .map(|(i, g)| {
            let p = params_for(i as u64);
            let mut worst = 0.0f64;
            for t in 0..g.n_users() as u32 {
                let pairs = [
                    (score_probs(g, t), oracle::oracle_probs(g, t)),
                    (score_heats(g, t), oracle::oracle_heats(g, t)),
                    (
                        score_hybrid(g, t, p.lambda),
                        oracle::oracle_hybrid(g, t, p.lambda),
                    ),
                    (
                        score_pd(g, t, p.epsilon),
                        oracle::oracle_pd(g, t, p.epsilon),
                    ),
                    (score_bhc(g, t, p.gamma), oracle::oracle_bhc(g, t, p.gamma)),
                    (score_pliers(g, t), oracle::oracle_pliers(g, t)),
                ];
                for (got, want) in &pairs {
                    for (a, e) in got.iter().zip(want) {
                        worst = worst.max((a - e).abs());
                    }
                }
            }
            (g.n_users(), worst)
        })
        .reduce(|| (0, 0.0), |a, b| (a.0 + b.0, a.1.max(b.1)));
    let elapsed = started.elapsed().as_secs_f64();
    assert!(
        worst <= TOL,
        "worst scorer deviation {worst:e} exceeds {TOL:e}"
    );
    assert!(elapsed < 60.0, "took {elapsed:.1}s, budget is 60s");
    println!(
        "PASS scorer references: 200 graphs, {targets} targets x 6 scorers, \
         worst |delta| {worst:.2e} (tol {TOL:.0e}), {elapsed:.1}s"
    );
}

#[test]
fn degenerate_parameters_collapse_bitwise() {
    for (i, g) in oracle_suite().iter().enumerate() {
        for t in 0..g.n_users() as u32 {
            let probs = score_probs(g, t);
            let heats = score_heats(g, t);
            let cases: [(&str, Vec<f64>, &Vec<f64>); 4] = [
                ("hybrid(1) = probs", score_hybrid(g, t, 1.0), &probs),
                ("hybrid(0) = heats", score_hybrid(g, t, 0.0), &heats),
                ("pd(0) = probs", score_pd(g, t, 0.0), &probs),
                ("bhc(0) = heats", score_bhc(g, t, 0.0), &heats),
            ];
            for (name, got, want) in &cases {
                for (j, (a, b)) in got.iter().zip(want.iter()).enumerate() {
                    assert_eq!(
                        a.to_bits(),
                        b.to_bits(),
                        "graph {i}, target {t}, {name}: item {j} differs ({a} vs {b})"
                    );
                }
            }
        }
    }
    println!("PASS degenerate parameters: 4 identities bitwise-exact on 200 graphs");
}

#[test]
fn pliers_never_exceeds_probs_and_matches_it_on_complete_graphs() {
    // On every suite graph the co-occurrence weight is at most 1, so pliers
    // is dominated: exactly in the shared-order references, and up to
    // accumulation-order rounding in the production pair.
    oracle_suite().par_iter().enumerate().for_each(|(i, g)| {
        for t in 0..g.n_users() as u32 {
            let op = oracle::oracle_probs(g, t);
            let ol = oracle::oracle_pliers(g, t);
            let p = score_probs(g, t);
            let l = score_pliers(g, t);
            for j in 0..op.len() {
                assert!(
                    ol[j] <= op[j],
                    "graph {i}, target {t}, item {j}: reference pliers {} > probs {}",
                    ol[j],
                    op[j]
                );
                assert!(
                    l[j] <= p[j] + 1e-12,
                    "graph {i}, target {t}, item {j}: pliers {} > probs {}",
                    l[j],
                    p[j]
                );
            }
        }
    });
    // every co-occurrence weight is exactly 1 on a complete graph, so the
    // domination closes to equality
    for (n, m) in [(2usize, 2usize), (3, 5), (7, 4), (10, 10), (25, 40)] {
        let g = oracle::complete_bipartite(n, m);
        for t in 0..n as u32 {
            let op = oracle::oracle_probs(&g, t);
            let ol = oracle::oracle_pliers(&g, t);
            let p = score_probs(&g, t);
            let l = score_pliers(&g, t);
            for j in 0..m {
                assert_eq!(
                    ol[j].to_bits(),
                    op[j].to_bits(),
                    "K({n},{m}): references must agree exactly"
                );
                assert!(
                    (l[j] - p[j]).abs() <= 1e-12,
                    "K({n},{m}), target {t}, item {j}: pliers {} vs probs {}",
                    l[j],
                    p[j]
                );
            }
        }
    }
    println!("PASS pliers domination: holds on 200 graphs, equality on 5 complete graphs");
}

#[test]
fn probs_conserves_diffused_mass_for_every_target() {
    // each owned item sheds one unit of weight through the two passes, so
    // per unit started the field must sum back to 1
    const TOL: f64 = 1e-9;
    let worst = oracle_suite()
        .par_iter()
        .map(|g| {
            let mut worst = 0.0f64;
            for t in 0..g.n_users() as u32 {
                let degree = g.user_degree(t) as f64;
                if degree == 0.0 {
                    continue;
                }
                let total: f64 = score_probs(g, t).iter().sum();
                worst = worst.max((total / degree - 1.0).abs());
            }
            worst
        })
        .reduce(|| 0.0, f64::max);
    assert!(
        worst <= TOL,
        "worst normalized mass error {worst:e} exceeds {TOL:e}"
    );
    println!("PASS mass conservation: worst |sum/degree - 1| = {worst:.2e} (tol {TOL:.0e})");
}

#[test]
fn metrics_match_definition_evaluations() {
    const TOL: f64 = 1e-12;

    // -- the worked micro example, where every value is checkable by hand --
    let (g, _) = BipartiteGraph::from_edges(&[(1, 1), (1, 2), (2, 2), (2, 3)]);
    let params = ScorerParams::default();
    let recs: Vec<_> = (0..2)
        .map(|t| recommend(&g, t, Algorithm::Probs, &params, 1))
        .collect();
    // each user gets the other's exclusive item, popularity 1, against an
    // owned-popularity mean of 1.5
    let v = variance_v(&g, &recs).unwrap();
    assert!((v - 0.5).abs() <= TOL, "micro V: got {v}, expected 0.5");
    // the recommended item shares a user with one owned item (J = 1/2) and
    // none with the other (J = 0)
    let o = overlap_o(&g, &recs, OverlapForm::Mean).unwrap();
    assert!((o - 0.25).abs() <= TOL, "micro O: got {o}, expected 0.25");
    // read the lists against the truth that the recommended items were the
    // held-out ones: every list of one is a hit on its probe of one
    let probe: Vec<Vec<u32>> = vec![vec![2], vec![0]];
    let r = recall_at_l(&probe, &recs, 1).unwrap();
    assert!((r - 1.0).abs() <= TOL, "micro R: got {r}, expected 1.0");
    let p = precision_at_l(&probe, &recs, 1).unwrap();
    assert!((p - 1.0).abs() <= TOL, "micro P: got {p}, expected 1.0");
    let n = novelty_at_l(&g, &recs, 1).unwrap();
    assert!((n - 1.0).abs() <= TOL, "micro N: got {n}, expected 1.0");
    for (name, got, reference) in [
        ("V", v, oracle::oracle_variance(&g, &recs)),
        ("O", o, oracle::oracle_overlap_mean(&g, &recs)),
        ("R", r, oracle::oracle_recall(&probe, &recs, 1)),
        ("P", p, oracle::oracle_precision(&probe, &recs, 1)),
        ("N", n, oracle::oracle_novelty(&g, &recs, 1)),
    ] {
        assert!(
            (got - reference).abs() <= TOL,
            "micro {name}: {got} vs reference {reference}"
        );
    }

    // -- 50 random instances, each split and scored against the references --
    let mut instances = 0usize;
    let mut seed = 0u64;
    while instances < 50 {
        seed += 1;
        let g = oracle::random_bipartite(20_000 + seed, 25, 40, (0.08, 0.3));
        if g.edge_count() < 10 {
            continue; // too small to withhold a probe set from
        }
        instances += 1;
        let algorithm = Algorithm::ALL[instances % Algorithm::ALL.len()];

        let targets: Vec<u32> = (0..g.n_users() as u32)
            .filter(|&u| g.user_degree(u) > 0)
            .collect();
        let recs = recommend_batch(&g, &targets, algorithm, &params, 5);
        let v = variance_v(&g, &recs).unwrap();
        assert!(
            (v - oracle::oracle_variance(&g, &recs)).abs() <= TOL,
            "instance {instances}: V disagrees"
        );
        for (form, reference) in [
            (OverlapForm::Mean, oracle::oracle_overlap_mean(&g, &recs)),
            (
                OverlapForm::ScaledProduct,
                oracle::oracle_overlap_scaled_product(&g, &recs),
            ),
        ] {
            let o = overlap_o(&g, &recs, form).unwrap();
            assert!(
                (o - reference).abs() <= TOL,
                "instance {instances}: O ({form:?}) disagrees"
            );
        }

        let split = pliers::split_links(&g, 0.2, seed).unwrap();
        let train_targets: Vec<u32> = (0..split.train.n_users() as u32)
            .filter(|&u| split.train.user_degree(u) > 0)
            .collect();
        let train_recs = recommend_batch(&split.train, &train_targets, algorithm, &params, 10);
        for l in [1usize, 3, 10] {
            let r = recall_at_l(&split.probe, &train_recs, l).unwrap();
            let p = precision_at_l(&split.probe, &train_recs, l).unwrap();
            let n = novelty_at_l(&split.train, &train_recs, l).unwrap();
            assert!(
                (r - oracle::oracle_recall(&split.probe, &train_recs, l)).abs() <= TOL,
                "instance {instances}, l {l}: R disagrees"
            );
            assert!(
                (p - oracle::oracle_precision(&split.probe, &train_recs, l)).abs() <= TOL,
                "instance {instances}, l {l}: P disagrees"
            );
            assert!(
                (n - oracle::oracle_novelty(&split.train, &train_recs, l)).abs() <= TOL,
                "instance {instances}, l {l}: N disagrees"
            );
        }
    }
    println!("PASS metric definitions: micro example by hand + 50 instances vs references (tol {TOL:.0e})");
}

#[test]
fn pliers_personalizes_better_than_probs_and_hybrid_at_scale() {
    let started = Instant::now();
    let config = ExperimentConfig {
        algorithms: vec![Algorithm::Pliers, Algorithm::Probs, Algorithm::Hybrid],
        list_length: 10,
        ..ExperimentConfig::default()
    };
    let mut v: Vec<Vec<f64>> = vec![Vec::new(); 3];
    for g in powerlaw_fixtures() {
        let report = run_personalization(g, &config).unwrap();
        for (slot, row) in v.iter_mut().zip(&report.rows) {
            slot.push(row.scores.v);
        }
    }
    let [pliers, probs, hybrid] = [v[0].clone(), v[1].clone(), v[2].clone()].map(median);
    let elapsed = started.elapsed().as_secs_f64();
    assert!(
        pliers < probs,
        "median V: pliers {pliers:.2} must beat probs {probs:.2}"
    );
    assert!(
        pliers < hybrid,
        "median V: pliers {pliers:.2} must beat hybrid {hybrid:.2}"
    );
    assert!(elapsed < 600.0, "took {elapsed:.1}s, budget is 600s");
    println!(
        "PASS personalization direction: median V over 5 fixtures \
         pliers {pliers:.2} < probs {probs:.2}, < hybrid {hybrid:.2} ({elapsed:.1}s)"
    );
}

#[test]
fn pliers_novelty_sits_between_heats_and_probs() {
    for (i, g) in powerlaw_fixtures().iter().enumerate() {
        let seed = i as u64 + 1;
        let config = ExperimentConfig {
            algorithms: vec![Algorithm::Heats, Algorithm::Pliers, Algorithm::Probs],
            l_sweep: vec![10],
            seed,
            ..ExperimentConfig::default()
        };
        let report = run_link_prediction(g, &config).unwrap();
        let n: Vec<f64> = report.curves.iter().map(|c| c.points[0].novelty).collect();
        let (heats, pliers, probs) = (n[0], n[1], n[2]);
        let p_bar = report.mean_user_tag_popularity;
        assert!(
            heats < pliers && pliers < probs,
            "fixture seed {seed}: novelty order heats {heats:.2} < pliers {pliers:.2} < probs {probs:.2} broken"
        );
        assert!(
            (pliers - p_bar).abs() < (probs - p_bar).abs(),
            "fixture seed {seed}: pliers N {pliers:.2} must sit nearer p-bar {p_bar:.2} than probs N {probs:.2}"
        );
        println!(
            "PASS novelty direction (seed {seed}): heats {heats:.2} < pliers {pliers:.2} < probs {probs:.2}, \
             p-bar {p_bar:.2}"
        );
    }
}

fn pliers_bin(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_pliers"))
        .args(args)
        .output()
        .expect("binary runs")
}

#[test]
fn reports_are_byte_identical_under_any_thread_count() {
    let dir = tempfile::TempDir::new().unwrap();
    let edges = dir.path().join("fix.tsv");
    let out = pliers_bin(&[
        "gen-fixture",
        "-o",
        edges.to_str().unwrap(),
        "--users",
        "500",
        "--items",
        "2000",
        "--links",
        "12000",
        "--seed",
        "33",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );

    for format in ["csv", "json"] {
        let mut variants: Vec<Vec<u8>> = Vec::new();
        // two pool sizes plus a repeat of the first, so the comparison also
        // rules out run-to-run noise
        for (tag, threads) in [("a", "1"), ("b", "4"), ("c", "1")] {
            let report = dir.path().join(format!("curves.{tag}.{format}"));
            let out = pliers_bin(&[
                "eval-linkpred",
                "-i",
                edges.to_str().unwrap(),
                "-o",
                report.to_str().unwrap(),
                "--output-format",
                format,
                "--seed",
                "7",
                "--threads",
                threads,
            ]);
            assert!(
                out.status.success(),
                "{}",
                String::from_utf8_lossy(&out.stderr)
            );
            variants.push(std::fs::read(&report).unwrap());
        }
        assert_eq!(variants[0], variants[1], "{format}: 1 vs 4 threads differ");
        assert_eq!(variants[0], variants[2], "{format}: repeat run differs");
        assert!(!variants[0].is_empty());
    }
    println!("PASS determinism: csv and json reports byte-identical across thread counts");
}

/// `stats` lines are `key value`; pull the named integer out.
fn stat_count(stdout: &str, key: &str) -> u64 {
    stdout
        .lines()
        .find_map(|line| line.strip_prefix(&format!("{key} ")))
        .unwrap_or_else(|| panic!("no {key} line in:\n{stdout}"))
        .parse()
        .unwrap_or_else(|_| panic!("{key} is not an integer"))
}

#[test]
fn stats_reproduces_exact_counts_from_real_dump_layouts() {
    let dir = tempfile::TempDir::new().unwrap();

    // ratings-style dump: user, item, rating, timestamp; no duplicate pairs
    let mut text = String::new();
    let mut users = HashSet::new();
    let mut items = HashSet::new();
    let mut pairs = HashSet::new();
    for u in 1..=120u64 {
        for k in 0..3 + u % 7 {
            let i = 1 + (u * 31 + k * 17) % 200;
            if pairs.insert((u, i)) {
                users.insert(u);
                items.insert(i);
                text.push_str(&format!(
                    "{u}\t{i}\t{}\t97830{:04}\n",
                    1 + (u + k) % 5,
                    u * 13 + k
                ));
            }
        }
    }
    let ratings = dir.path().join("ratings.dat");
    std::fs::write(&ratings, &text).unwrap();
    let out = pliers_bin(&["stats", "-i", ratings.to_str().unwrap()]);
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert_eq!(stat_count(&stdout, "users"), users.len() as u64);
    assert_eq!(stat_count(&stdout, "items"), items.len() as u64);
    assert_eq!(stat_count(&stdout, "links"), pairs.len() as u64);
    assert_eq!(stat_count(&stdout, "duplicates_collapsed"), 0);
    let ratings_links = pairs.len();

    // bookmark-tagging-style dump: header line, then user, bookmark, tag,
    // timestamp; the same user-tag pair recurs across bookmarks
    let mut text = String::from("userID\tbookmarkID\ttagID\ttimestamp\n");
    let mut rows = 0u64;
    users.clear();
    items.clear();
    pairs.clear();
    for u in 1..=80u64 {
        for b in 0..2 + u % 5 {
            for k in 0..1 + (u + b) % 3 {
                // the tag ignores the bookmark, so users re-apply their
                // favorite tags across bookmarks: genuine duplicate pairs
                let tag = 1 + (u * 7 + k * 11) % 60;
                users.insert(u);
                items.insert(tag);
                pairs.insert((u, tag));
                text.push_str(&format!(
                    "{u}\t{b}\t{tag}\t116725{:04}\n",
                    u * 17 + b * 5 + k
                ));
                rows += 1;
            }
        }
    }
    let tagging = dir.path().join("user_taggedbookmarks.dat");
    std::fs::write(&tagging, &text).unwrap();
    let out = pliers_bin(&[
        "stats",
        "-i",
        tagging.to_str().unwrap(),
        "--user-col",
        "0",
        "--item-col",
        "2",
        "--header-lines",
        "1",
    ]);
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert_eq!(stat_count(&stdout, "users"), users.len() as u64);
    assert_eq!(stat_count(&stdout, "items"), items.len() as u64);
    assert_eq!(stat_count(&stdout, "links"), pairs.len() as u64);
    assert_eq!(stat_count(&stdout, "pairs_read"), rows);
    assert_eq!(
        stat_count(&stdout, "duplicates_collapsed"),
        rows - pairs.len() as u64
    );
    println!(
        "PASS dump counts: ratings layout ({} links) and tagging layout ({} of {} rows distinct), \
         all integers exact",
        ratings_links,
        pairs.len(),
        rows
    );
}
