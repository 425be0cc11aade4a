//! File-level tests: edge-list parsing against real temp files, report
//! serialization goldens, and round-trips.

use std::fs;

use pliers::dataio::{
    curves_csv, load_edge_list, load_graph, metrics_csv, read_curve_report_json,
    read_metrics_report_json, write_curve_report, write_edge_list, write_metrics_report,
    EdgeListFormat, ReportFormat,
};
use pliers::experiment::{
    run_link_prediction, CurveRow, ExperimentConfig, MetricsReport, PersonalizationRow, RunMeta,
};
use pliers::metrics::LinkPredScores;
use pliers::{Algorithm, BipartiteGraph, CurveReport, Error, PersonalizationScores};

fn write_temp(content: &str) -> (tempfile::TempDir, std::path::PathBuf) {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("edges.tsv");
    fs::write(&path, content).unwrap();
    (dir, path)
}

#[test]
fn parses_a_plain_tab_separated_file() {
    let (_dir, path) = write_temp("7\t42\n7\t43\n9\t42\n");
    let (pairs, summary) = load_edge_list(&path, &EdgeListFormat::default()).unwrap();
    assert_eq!(pairs, vec![(7, 42), (7, 43), (9, 42)]);
    assert_eq!(summary.pairs, 3);
    assert_eq!(summary.comment_lines, 0);
    assert_eq!(summary.blank_lines, 0);
}

#[test]
fn skips_headers_comments_and_blank_lines() {
    let (_dir, path) = write_temp("user\titem\n# a comment\n1\t2\n\n# another\n3\t4\n");
    let format = EdgeListFormat {
        header_lines: 1,
        ..Default::default()
    };
    let (pairs, summary) = load_edge_list(&path, &format).unwrap();
    assert_eq!(pairs, vec![(1, 2), (3, 4)]);
    assert_eq!(summary.comment_lines, 2);
    assert_eq!(summary.blank_lines, 1);
}

#[test]
fn tolerates_crlf_line_endings() {
    let (_dir, path) = write_temp("1\t2\r\n3\t4\r\n");
    let (pairs, _) = load_edge_list(&path, &EdgeListFormat::default()).unwrap();
    assert_eq!(pairs, vec![(1, 2), (3, 4)]);
}

#[test]
fn reads_custom_delimiters_and_column_positions() {
    let (_dir, path) = write_temp("x,42,7\nx,43,7\n");
    let format = EdgeListFormat {
        delimiter: ',',
        user_column: 2,
        item_column: 1,
        ..Default::default()
    };
    let (pairs, _) = load_edge_list(&path, &format).unwrap();
    assert_eq!(pairs, vec![(7, 42), (7, 43)]);
}

#[test]
fn reports_parse_errors_with_line_numbers() {
    let (_dir, path) = write_temp("1\t2\nnot-a-number\t3\n");
    match load_edge_list(&path, &EdgeListFormat::default()) {
        Err(Error::Parse { line, reason, .. }) => {
            assert_eq!(line, 2);
            assert!(reason.contains("not-a-number"), "reason was: {reason}");
        }
        other => panic!("expected a parse error, got {other:?}"),
    }

    let (_dir, path) = write_temp("1\t2\n3\n");
    match load_edge_list(&path, &EdgeListFormat::default()) {
        Err(Error::Parse { line, reason, .. }) => {
            assert_eq!(line, 2);
            assert!(reason.contains("fields"), "reason was: {reason}");
        }
        other => panic!("expected a parse error, got {other:?}"),
    }
}

#[test]
fn missing_file_is_an_io_error_naming_the_path() {
    let err = load_edge_list("/nonexistent/edges.tsv", &EdgeListFormat::default()).unwrap_err();
    assert!(matches!(err, Error::Io { .. }));
    assert!(err.to_string().contains("/nonexistent/edges.tsv"));
}

#[test]
fn rejects_equal_user_and_item_columns() {
    let (_dir, path) = write_temp("1\t2\n");
    let format = EdgeListFormat {
        user_column: 1,
        item_column: 1,
        ..Default::default()
    };
    assert!(load_edge_list(&path, &format).is_err());
}

#[test]
fn duplicate_pairs_survive_loading_and_collapse_in_the_graph() {
    let (_dir, path) = write_temp("1\t2\n1\t2\n1\t3\n");
    let (graph, load, build) = load_graph(&path, &EdgeListFormat::default()).unwrap();
    assert_eq!(load.pairs, 3);
    assert_eq!(build.duplicates_collapsed, 1);
    assert_eq!(graph.edge_count(), 2);
}

#[test]
fn loads_a_bulky_dump() {
    // dataset-scale line count, written programmatically
    let mut content = String::with_capacity(3 << 20);
    for k in 0u64..230_500 {
        content.push_str(&format!("{}\t{}\n", k % 1900, k % 40_600));
    }
    let (_dir, path) = write_temp(&content);
    let (pairs, summary) = load_edge_list(&path, &EdgeListFormat::default()).unwrap();
    assert_eq!(pairs.len(), 230_500);
    assert_eq!(summary.pairs, 230_500);
}

#[test]
fn edge_list_files_round_trip_graphs() {
    let (g, _) = BipartiteGraph::from_edges(&[(10, 20), (10, 21), (11, 20), (12, 99)]);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("out.tsv");
    write_edge_list(&g, &path, '\t').unwrap();
    let (h, _, _) = load_graph(&path, &EdgeListFormat::default()).unwrap();
    assert_eq!(g, h);
}

fn sample_metrics_report() -> MetricsReport {
    let config = ExperimentConfig::default();
    MetricsReport {
        meta: RunMeta {
            config_hash: config.config_hash(),
            config,
        },
        rows: vec![
            PersonalizationRow {
                algorithm: Algorithm::Pliers,
                scores: PersonalizationScores {
                    v: 41.9,
                    o: 0.118,
                    users_counted: 5000,
                },
            },
            PersonalizationRow {
                algorithm: Algorithm::Probs,
                scores: PersonalizationScores {
                    v: 80.34,
                    o: 0.102,
                    users_counted: 5000,
                },
            },
        ],
    }
}

#[test]
fn metrics_csv_has_the_fixed_schema() {
    let csv = metrics_csv(&sample_metrics_report());
    assert_eq!(
        csv,
        "algorithm,V,O\npliers,41.900000,0.118000\nprobs,80.340000,0.102000\n"
    );
}

#[test]
fn curves_csv_ends_with_the_reference_row() {
    let config = ExperimentConfig::default();
    let report = CurveReport {
        meta: RunMeta {
            config_hash: config.config_hash(),
            config,
        },
        mean_user_tag_popularity: 52.75,
        curves: vec![CurveRow {
            algorithm: Algorithm::Heats,
            points: vec![
                LinkPredScores {
                    l: 1,
                    recall: 0.125,
                    precision: 0.0625,
                    novelty: 3.5,
                },
                LinkPredScores {
                    l: 10,
                    recall: 0.25,
                    precision: 0.125,
                    novelty: 4.25,
                },
            ],
        }],
    };
    let csv = curves_csv(&report);
    assert_eq!(
        csv,
        "algorithm,L,R,P,N\n\
         heats,1,0.125000,0.062500,3.500000\n\
         heats,10,0.250000,0.125000,4.250000\n\
         p_bar_tu,,,,52.750000\n"
    );
}

#[test]
fn csv_uses_lf_line_endings_only() {
    let csv = metrics_csv(&sample_metrics_report());
    assert!(!csv.contains('\r'));
    assert!(csv.ends_with('\n'));
}

#[test]
fn metrics_report_round_trips_through_json_files() {
    let report = sample_metrics_report();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("metrics.json");
    write_metrics_report(&report, &path, ReportFormat::Json).unwrap();
    let back = read_metrics_report_json(&path).unwrap();
    assert_eq!(report, back);
}

#[test]
fn curve_report_round_trips_through_json_files() {
    // a real report, not a hand-built one, so every field is exercised
    let edges: Vec<(u64, u64)> = (0..30u64).flat_map(|u| [(u, u), (u, u + 1)]).collect();
    let (g, _) = BipartiteGraph::from_edges(&edges);
    let config = ExperimentConfig {
        l_sweep: vec![1, 5, 10],
        ..Default::default()
    };
    let report = run_link_prediction(&g, &config).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("curves.json");
    write_curve_report(&report, &path, ReportFormat::Json).unwrap();
    let back = read_curve_report_json(&path).unwrap();
    assert_eq!(report, back);
    // the csv rendering of the same report carries one row per curve point
    // plus header and reference line
    let csv_path = dir.path().join("curves.csv");
    write_curve_report(&report, &csv_path, ReportFormat::Csv).unwrap();
    let text = fs::read_to_string(&csv_path).unwrap();
    let expected_rows = report.curves.len() * config.l_sweep.len() + 2;
    assert_eq!(text.lines().count(), expected_rows);
}

#[test]
fn shipped_fixture_matches_its_manifest_and_regenerates_bit_for_bit() {
    use pliers::fixture::{generate, FixtureManifest};

    let root = concat!(env!("CARGO_MANIFEST_DIR"), "/../../fixtures");
    let manifest = FixtureManifest::read(format!("{root}/powerlaw-small.manifest.json")).unwrap();
    let (g, load, build) = load_graph(
        format!("{root}/powerlaw-small.tsv"),
        &EdgeListFormat::default(),
    )
    .unwrap();
    // the committed stats describe the committed file exactly
    assert_eq!(g.stats(), manifest.stats);
    assert_eq!(load.pairs, manifest.stats.n_links);
    assert_eq!(build.duplicates_collapsed, 0);
    // and the committed file is exactly what its spec generates
    let regenerated = generate(&manifest.spec).unwrap();
    assert_eq!(regenerated, g);
}
