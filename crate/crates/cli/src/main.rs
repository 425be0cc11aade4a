//! `pliers` — score, recommend and evaluate diffusion recommenders on
//! user-item edge lists.
//!
//! Subcommands mirror the workflow: `stats` to sanity-check a dataset,
//! `sample` to cut it down, `recommend` for one-off queries,
//! `eval-personalization` and `eval-linkpred` for the measurement runs, and
//! `gen-fixture` for synthetic datasets. All human chatter goes to stderr;
//! stdout and report files carry only data, so runs diff cleanly.

use std::collections::HashSet;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use pliers::dataio::{
    load_graph, sample_users, write_curve_report, write_edge_list, write_metrics_report,
    EdgeListFormat, ReportFormat, SampleMethod, SampleSpec,
};
use pliers::experiment::{run_link_prediction, run_personalization, ExperimentConfig};
use pliers::fixture::{self, FixtureManifest, FixtureSpec};
use pliers::metrics::OverlapForm;
use pliers::scorer::recommend;
use pliers::{Algorithm, BipartiteGraph, CurveReport, ScorerParams};

#[derive(Parser)]
#[command(
    name = "pliers",
    version,
    about = "Diffusion recommenders on bipartite user-item graphs",
    long_about = "Score items for users of a bipartite user-item graph with six \
                  diffusion algorithms (pliers, probs, heats, hybrid, pd, bhc), and \
                  evaluate them: personalization metrics V and O on the full graph, \
                  or recall (R), precision (P) and novelty (N) curves against a \
                  seeded link-prediction split."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print dataset statistics and load diagnostics
    Stats(StatsArgs),
    /// Cut a dataset down to a user budget, keeping complete item lists
    Sample(SampleArgs),
    /// Print the top-L recommendations for one user
    Recommend(RecommendArgs),
    /// Personalization metrics (V, O) for each algorithm on the full graph
    EvalPersonalization(EvalPersonalizationArgs),
    /// Link-prediction curves (R, P, N over L) against a seeded split
    EvalLinkpred(EvalLinkpredArgs),
    /// Generate a synthetic power-law dataset plus its manifest
    GenFixture(GenFixtureArgs),
}

#[derive(Args)]
struct InputOpts {
    /// Edge-list file: one user-item pair per line
    #[arg(short, long)]
    input: PathBuf,
    /// Field delimiter: tab, comma, space, or any single character
    #[arg(long, default_value = "tab")]
    delimiter: String,
    /// Zero-based column holding the user id
    #[arg(long, default_value_t = 0)]
    user_col: usize,
    /// Zero-based column holding the item id
    #[arg(long, default_value_t = 1)]
    item_col: usize,
    /// Lines to skip unconditionally at the top of the file
    #[arg(long, default_value_t = 0)]
    header_lines: usize,
    /// Skip lines starting with this character; "none" disables
    #[arg(long, default_value = "#")]
    comment_prefix: String,
}

impl InputOpts {
    fn delimiter_char(&self) -> Result<char> {
        parse_delimiter(&self.delimiter)
    }

    fn format(&self) -> Result<EdgeListFormat> {
        let comment_prefix = match self.comment_prefix.as_str() {
            "none" => None,
            s => {
                let mut chars = s.chars();
                match (chars.next(), chars.next()) {
                    (Some(c), None) => Some(c),
                    _ => bail!("--comment-prefix takes a single character or \"none\", got {s:?}"),
                }
            }
        };
        Ok(EdgeListFormat {
            delimiter: self.delimiter_char()?,
            user_column: self.user_col,
            item_column: self.item_col,
            header_lines: self.header_lines,
            comment_prefix,
        })
    }

    fn load(&self) -> Result<LoadedInput> {
        let format = self.format()?;
        let (graph, load, build) = load_graph(&self.input, &format)
            .with_context(|| format!("loading {}", self.input.display()))?;
        eprintln!(
            "loaded {}: {} users, {} items, {} links ({} pairs, {} duplicates collapsed)",
            self.input.display(),
            graph.n_users(),
            graph.n_items(),
            graph.edge_count(),
            load.pairs,
            build.duplicates_collapsed,
        );
        Ok(LoadedInput { graph, load, build })
    }
}

struct LoadedInput {
    graph: BipartiteGraph,
    load: pliers::dataio::LoadSummary,
    build: pliers::BuildSummary,
}

#[derive(Args)]
struct ParamOpts {
    /// hybrid blend weight in [0, 1]: 1 is pure probs, 0 pure heats
    #[arg(long, default_value_t = 0.5, allow_negative_numbers = true)]
    lambda: f64,
    /// pd degree exponent
    #[arg(long, default_value_t = -0.85, allow_negative_numbers = true)]
    epsilon: f64,
    /// bhc degree exponent
    #[arg(long, default_value_t = 0.8, allow_negative_numbers = true)]
    gamma: f64,
}

impl ParamOpts {
    fn params(&self) -> Result<ScorerParams> {
        let params = ScorerParams {
            lambda: self.lambda,
            epsilon: self.epsilon,
            gamma: self.gamma,
        };
        params.validate()?;
        Ok(params)
    }
}

#[derive(Args)]
struct StatsArgs {
    #[command(flatten)]
    input: InputOpts,
}

#[derive(Args)]
struct SampleArgs {
    #[command(flatten)]
    input: InputOpts,
    /// Where to write the sampled edge list (same delimiter as the input)
    #[arg(short, long)]
    output: PathBuf,
    /// Keep at most this many users
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    max_users: u64,
    /// snowball (connected region) or uniform (independent draws)
    #[arg(long, default_value = "snowball", value_parser = parse_method)]
    method: SampleMethod,
    #[arg(long, default_value_t = 42)]
    seed: u64,
}

#[derive(Args)]
struct RecommendArgs {
    #[command(flatten)]
    input: InputOpts,
    /// External id of the user to recommend for
    #[arg(short, long)]
    user: u64,
    #[arg(short, long, default_value = "pliers", value_parser = parse_algorithm)]
    algorithm: Algorithm,
    #[command(flatten)]
    params: ParamOpts,
    /// List length
    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u64).range(1..))]
    top: u64,
}

#[derive(Args)]
struct EvalPersonalizationArgs {
    #[command(flatten)]
    input: InputOpts,
    /// Report destination
    #[arg(short, long)]
    output: PathBuf,
    /// csv or json
    #[arg(long, default_value = "csv", value_parser = parse_format)]
    output_format: ReportFormat,
    /// Comma-separated subset of: pliers, probs, heats, hybrid, pd, bhc
    #[arg(long, default_value = "pliers,probs,heats,hybrid,pd,bhc", value_parser = parse_algorithms)]
    algorithms: std::vec::Vec<Algorithm>,
    #[command(flatten)]
    params: ParamOpts,
    /// Recommendation list length
    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u64).range(1..))]
    top: u64,
    /// How O combines per-item similarities: mean or scaled-product
    #[arg(long, default_value = "mean", value_parser = parse_overlap)]
    overlap_form: OverlapForm,
    /// Seed recorded in the report (the run itself is deterministic)
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Size of the rayon worker pool; results do not depend on it
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct EvalLinkpredArgs {
    #[command(flatten)]
    input: InputOpts,
    /// Report destination; multi-seed runs add .seedN and .summary variants
    #[arg(short, long)]
    output: PathBuf,
    /// csv or json
    #[arg(long, default_value = "csv", value_parser = parse_format)]
    output_format: ReportFormat,
    /// Comma-separated subset of: pliers, probs, heats, hybrid, pd, bhc
    #[arg(long, default_value = "pliers,probs,heats,hybrid,pd,bhc", value_parser = parse_algorithms)]
    algorithms: std::vec::Vec<Algorithm>,
    #[command(flatten)]
    params: ParamOpts,
    /// Fraction of links withheld as the probe set
    #[arg(long, default_value_t = 0.10)]
    fraction: f64,
    /// List lengths to evaluate: comma list of N, A-B, or A-B:STEP (inclusive)
    #[arg(long, default_value = "1-20,30-100:10", value_parser = parse_sweep)]
    l_sweep: std::vec::Vec<usize>,
    /// Probe-draw seed
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Several seeds: comma list and/or A..B ranges (end exclusive);
    /// overrides --seed and writes per-seed reports plus a summary
    #[arg(long, value_parser = parse_seeds)]
    seeds: Option<std::vec::Vec<u64>>,
    /// Size of the rayon worker pool; results do not depend on it
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct GenFixtureArgs {
    /// Where to write the tab-separated edge list
    #[arg(short, long)]
    output: PathBuf,
    /// Manifest destination (default: <output stem>.manifest.json)
    #[arg(long)]
    manifest: Option<PathBuf>,
    #[arg(long, default_value_t = 2000)]
    users: usize,
    #[arg(long, default_value_t = 8000)]
    items: usize,
    #[arg(long, default_value_t = 60000)]
    links: usize,
    /// Skew of user activity (0 = uniform)
    #[arg(long, default_value_t = 0.5)]
    user_exponent: f64,
    /// Skew of item popularity (0 = uniform)
    #[arg(long, default_value_t = 0.8)]
    item_exponent: f64,
    #[arg(long, default_value_t = 42)]
    seed: u64,
}

fn parse_delimiter(s: &str) -> Result<char> {
    match s {
        "tab" | "\\t" => Ok('\t'),
        "comma" => Ok(','),
        "space" => Ok(' '),
        other => {
            let mut chars = other.chars();
            match (chars.next(), chars.next()) {
                (Some(c), None) => Ok(c),
                _ => bail!(
                    "--delimiter takes tab, comma, space, or a single character; got {other:?}"
                ),
            }
        }
    }
}

fn parse_algorithm(s: &str) -> Result<Algorithm, pliers::Error> {
    s.parse()
}

fn parse_algorithms(s: &str) -> Result<Vec<Algorithm>> {
    let mut out = Vec::new();
    for token in s.split(',') {
        let algo: Algorithm = token.trim().parse()?;
        if !out.contains(&algo) {
            out.push(algo);
        }
    }
    if out.is_empty() {
        bail!("--algorithms must name at least one algorithm");
    }
    Ok(out)
}

fn parse_format(s: &str) -> Result<ReportFormat, pliers::Error> {
    s.parse()
}

fn parse_method(s: &str) -> Result<SampleMethod, pliers::Error> {
    s.parse()
}

fn parse_overlap(s: &str) -> Result<OverlapForm> {
    match s.to_ascii_lowercase().as_str() {
        "mean" => Ok(OverlapForm::Mean),
        "scaled-product" | "scaled_product" => Ok(OverlapForm::ScaledProduct),
        other => bail!("--overlap-form takes mean or scaled-product, got {other:?}"),
    }
}

fn parse_seeds(s: &str) -> Result<Vec<u64>> {
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for token in s.split(',') {
        let token = token.trim();
        if let Some((a, b)) = token.split_once("..") {
            let a: u64 = a
                .trim()
                .parse()
                .with_context(|| format!("bad seed range start {a:?}"))?;
            let b: u64 = b
                .trim()
                .parse()
                .with_context(|| format!("bad seed range end {b:?}"))?;
            if b <= a {
                bail!("empty seed range {token:?}");
            }
            out.extend((a..b).filter(|x| seen.insert(*x)));
        } else {
            let x: u64 = token
                .parse()
                .with_context(|| format!("bad seed {token:?}"))?;
            if seen.insert(x) {
                out.push(x);
            }
        }
    }
    if out.is_empty() {
        bail!("--seeds must name at least one seed");
    }
    Ok(out)
}

fn parse_sweep(s: &str) -> Result<Vec<usize>> {
    let mut out: Vec<usize> = Vec::new();
    for token in s.split(',') {
        let token = token.trim();
        if let Some((range, step)) = token.split_once(':') {
            let (a, b) = parse_range(range)?;
            let step: usize = step
                .trim()
                .parse()
                .with_context(|| format!("bad step in {token:?}"))?;
            if step == 0 {
                bail!("step must be positive in {token:?}");
            }
            out.extend((a..=b).step_by(step));
        } else if token.contains('-') {
            let (a, b) = parse_range(token)?;
            out.extend(a..=b);
        } else {
            out.push(
                token
                    .parse()
                    .with_context(|| format!("bad list length {token:?}"))?,
            );
        }
    }
    out.sort_unstable();
    out.dedup();
    if out.is_empty() {
        bail!("--l-sweep must name at least one list length");
    }
    if out[0] == 0 {
        bail!("--l-sweep entries must be at least 1");
    }
    Ok(out)
}

fn parse_range(s: &str) -> Result<(usize, usize)> {
    let (a, b) = s
        .split_once('-')
        .with_context(|| format!("expected A-B in {s:?}"))?;
    let a: usize = a
        .trim()
        .parse()
        .with_context(|| format!("bad range start in {s:?}"))?;
    let b: usize = b
        .trim()
        .parse()
        .with_context(|| format!("bad range end in {s:?}"))?;
    if b < a {
        bail!("range {s:?} runs backwards");
    }
    Ok((a, b))
}

fn init_threads(threads: Option<usize>) -> Result<()> {
    if let Some(n) = threads {
        if n == 0 {
            bail!("--threads must be at least 1");
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("initializing the worker pool")?;
    }
    Ok(())
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Stats(args) => cmd_stats(args),
        Command::Sample(args) => cmd_sample(args),
        Command::Recommend(args) => cmd_recommend(args),
        Command::EvalPersonalization(args) => cmd_eval_personalization(args),
        Command::EvalLinkpred(args) => cmd_eval_linkpred(args),
        Command::GenFixture(args) => cmd_gen_fixture(args),
    }
}

fn cmd_stats(args: StatsArgs) -> Result<()> {
    let loaded = args.input.load()?;
    let stats = loaded.graph.stats();
    println!("users {}", stats.n_users);
    println!("items {}", stats.n_items);
    println!("links {}", stats.n_links);
    println!("mean_item_degree {:.6}", stats.mean_item_degree);
    println!(
        "mean_user_tag_popularity {:.6}",
        stats.mean_user_tag_popularity
    );
    println!("pairs_read {}", loaded.load.pairs);
    println!("duplicates_collapsed {}", loaded.build.duplicates_collapsed);
    println!("comment_lines {}", loaded.load.comment_lines);
    println!("blank_lines {}", loaded.load.blank_lines);
    Ok(())
}

fn cmd_sample(args: SampleArgs) -> Result<()> {
    let loaded = args.input.load()?;
    let spec = SampleSpec {
        max_users: args.max_users as usize,
        method: args.method,
        seed: args.seed,
    };
    let sampled = sample_users(&loaded.graph, &spec)?;
    write_edge_list(&sampled, &args.output, args.input.delimiter_char()?)
        .with_context(|| format!("writing {}", args.output.display()))?;
    eprintln!(
        "kept {} of {} users and {} of {} links ({} sampling, seed {}) -> {}",
        sampled.n_users(),
        loaded.graph.n_users(),
        sampled.edge_count(),
        loaded.graph.edge_count(),
        args.method,
        args.seed,
        args.output.display()
    );
    Ok(())
}

fn cmd_recommend(args: RecommendArgs) -> Result<()> {
    let loaded = args.input.load()?;
    let graph = &loaded.graph;
    let params = args.params.params()?;
    let Some(target) = graph.user_index_of(args.user) else {
        bail!(
            "user id {} not present in {} ({} users)",
            args.user,
            args.input.input.display(),
            graph.n_users()
        );
    };
    let ranked = recommend(graph, target, args.algorithm, &params, args.top as usize);
    eprintln!(
        "top {} of {} candidates for user {} by {}",
        ranked.entries.len(),
        graph.n_items() - graph.user_degree(target),
        args.user,
        args.algorithm
    );
    for (item, score) in &ranked.entries {
        println!("{}\t{}", graph.item_id(*item), score);
    }
    Ok(())
}

fn cmd_eval_personalization(args: EvalPersonalizationArgs) -> Result<()> {
    init_threads(args.threads)?;
    let loaded = args.input.load()?;
    let config = ExperimentConfig {
        algorithms: args.algorithms.clone(),
        params: args.params.params()?,
        list_length: args.top as usize,
        seed: args.seed,
        overlap_form: args.overlap_form,
        ..Default::default()
    };
    let started = Instant::now();
    let report = run_personalization(&loaded.graph, &config)?;
    write_metrics_report(&report, &args.output, args.output_format)
        .with_context(|| format!("writing {}", args.output.display()))?;
    eprintln!(
        "evaluated {} algorithms in {:.1}s -> {}",
        config.algorithms.len(),
        started.elapsed().as_secs_f64(),
        args.output.display()
    );
    Ok(())
}

fn cmd_eval_linkpred(args: EvalLinkpredArgs) -> Result<()> {
    init_threads(args.threads)?;
    let loaded = args.input.load()?;
    let seeds = args.seeds.clone().unwrap_or_else(|| vec![args.seed]);
    let base_config = ExperimentConfig {
        algorithms: args.algorithms.clone(),
        params: args.params.params()?,
        removal_fraction: args.fraction,
        l_sweep: args.l_sweep.clone(),
        ..Default::default()
    };
    let started = Instant::now();
    let mut reports = Vec::with_capacity(seeds.len());
    for &seed in &seeds {
        let config = ExperimentConfig {
            seed,
            ..base_config.clone()
        };
        let report = run_link_prediction(&loaded.graph, &config)?;
        let path = if seeds.len() == 1 {
            args.output.clone()
        } else {
            suffixed_path(&args.output, &format!("seed{seed}"))
        };
        write_curve_report(&report, &path, args.output_format)
            .with_context(|| format!("writing {}", path.display()))?;
        eprintln!("seed {seed} -> {}", path.display());
        reports.push(report);
    }
    if seeds.len() > 1 {
        let summary = summarize_curves(&seeds, &reports);
        let path = suffixed_path(&args.output, "summary");
        write_summary(&summary, &path, args.output_format)
            .with_context(|| format!("writing {}", path.display()))?;
        eprintln!("summary over {} seeds -> {}", seeds.len(), path.display());
    }
    eprintln!("done in {:.1}s", started.elapsed().as_secs_f64());
    Ok(())
}

fn cmd_gen_fixture(args: GenFixtureArgs) -> Result<()> {
    let spec = FixtureSpec {
        users: args.users,
        items: args.items,
        links: args.links,
        user_exponent: args.user_exponent,
        item_exponent: args.item_exponent,
        seed: args.seed,
    };
    let graph = fixture::generate(&spec)?;
    write_edge_list(&graph, &args.output, '\t')
        .with_context(|| format!("writing {}", args.output.display()))?;
    let manifest = FixtureManifest::new(spec, &graph);
    let manifest_path = args.manifest.unwrap_or_else(|| {
        let stem = args
            .output
            .file_stem()
            .and_then(|s| s.to_str())
            .unwrap_or("fixture");
        args.output.with_file_name(format!("{stem}.manifest.json"))
    });
    manifest.write(&manifest_path)?;
    eprintln!(
        "generated {} users, {} items, {} links (seed {}) -> {} + {}",
        graph.n_users(),
        graph.n_items(),
        graph.edge_count(),
        spec.seed,
        args.output.display(),
        manifest_path.display()
    );
    Ok(())
}

/// `dir/name.ext` -> `dir/name.tag.ext`
fn suffixed_path(base: &Path, tag: &str) -> PathBuf {
    let stem = base
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("report");
    let name = match base.extension().and_then(|s| s.to_str()) {
        Some(ext) => format!("{stem}.{tag}.{ext}"),
        None => format!("{stem}.{tag}"),
    };
    base.with_file_name(name)
}

#[derive(Serialize)]
struct SummaryReport {
    seeds: Vec<u64>,
    rows: Vec<SummaryRow>,
}

#[derive(Serialize)]
struct SummaryRow {
    algorithm: String,
    l: usize,
    metric: String,
    median: f64,
    min: f64,
    max: f64,
}

/// Collapse per-seed curve reports into median/min/max rows per
/// (algorithm, L, metric). All reports share one config modulo the seed.
fn summarize_curves(seeds: &[u64], reports: &[CurveReport]) -> SummaryReport {
    let mut rows = Vec::new();
    let first = &reports[0];
    for (c, curve) in first.curves.iter().enumerate() {
        for (p, point) in curve.points.iter().enumerate() {
            let mut recalls = Vec::with_capacity(reports.len());
            let mut precisions = Vec::with_capacity(reports.len());
            let mut novelties = Vec::with_capacity(reports.len());
            for report in reports {
                let scores = &report.curves[c].points[p];
                recalls.push(scores.recall);
                precisions.push(scores.precision);
                novelties.push(scores.novelty);
            }
            for (name, values) in [("R", recalls), ("P", precisions), ("N", novelties)] {
                rows.push(SummaryRow {
                    algorithm: curve.algorithm.to_string(),
                    l: point.l,
                    metric: name.to_string(),
                    median: median(values.clone()),
                    min: values.iter().copied().fold(f64::INFINITY, f64::min),
                    max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                });
            }
        }
    }
    SummaryReport {
        seeds: seeds.to_vec(),
        rows,
    }
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

fn write_summary(summary: &SummaryReport, path: &Path, format: ReportFormat) -> Result<()> {
    let text = match format {
        ReportFormat::Csv => {
            let mut out = String::from("algorithm,L,metric,median,min,max\n");
            for row in &summary.rows {
                use std::fmt::Write;
                writeln!(
                    out,
                    "{},{},{},{:.6},{:.6},{:.6}",
                    row.algorithm, row.l, row.metric, row.median, row.min, row.max
                )?;
            }
            out
        }
        ReportFormat::Json => {
            let mut text = serde_json::to_string_pretty(summary)?;
            text.push('\n');
            text
        }
    };
    std::fs::write(path, text)?;
    Ok(())
}
