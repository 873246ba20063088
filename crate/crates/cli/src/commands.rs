use std::collections::HashSet;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use glt_core::bundle::{read_bundle, write_bundle, TicketMetrics};
use glt_core::io::load_graph;
use glt_core::macs::{compute_macs, MacsBreakdown};
use glt_core::pipeline::{pretrain_dense, sparsity_target};
use glt_core::scoring::pruned_degree_profile;
use glt_core::spectral::{
    delta_vs_degree_report, energy_deltas, laplacian_spectrum, EdgeSelection,
};
use glt_core::{
    run_pipeline, ticket_from_teacher, DenseModel, EdgeScorer, Graph64, RunConfig, TicketRun,
};
use rayon::prelude::*;

use crate::config::{load_run_file, load_sweep_spec, parse_scorer};
use crate::error::{io_error, CliError, CliResult};
use crate::metrics::{append_csv, now, write_csv, MetricsRow, SCHEMA_VERSION};

pub fn load_dataset(dir: &Path) -> CliResult<Graph64> {
    Ok(load_graph(dir)?)
}

fn metrics_row(run: &TicketRun<f64>, cfg: &RunConfig) -> CliResult<MetricsRow> {
    let ticket = &run.ticket;
    let macs = compute_macs(
        &run.pruned_graph,
        &ticket.param_mask,
        ticket.sparse_params.dims(),
    )?;
    Ok(MetricsRow {
        schema_version: SCHEMA_VERSION,
        scorer: run.scorer.name().to_string(),
        p_g: cfg.p_g,
        p_theta: cfg.p_theta,
        seed: cfg.seed,
        val_acc: Some(ticket.val_acc),
        test_acc: Some(ticket.test_acc),
        mean_pruned_edge_degree: Some(run.mean_pruned_edge_degree),
        inference_macs: Some(macs.total),
        status: "ok".into(),
        timestamp: now(),
    })
}

fn ticket_metrics(run: &TicketRun<f64>, seed: u64) -> TicketMetrics {
    TicketMetrics {
        scorer: run.scorer.to_string(),
        seed,
        graph_sparsity: run.ticket.graph_sparsity,
        weight_sparsity: run.ticket.weight_sparsity,
        val_acc: run.ticket.val_acc,
        test_acc: run.ticket.test_acc,
        best_epoch: run.ticket.best_epoch,
        teacher_val_acc: run.teacher.val_acc,
        teacher_test_acc: run.teacher.test_acc,
        teacher_best_epoch: run.teacher.best_epoch,
        pruned_edges: run.ticket.edge_mask.pruned_count(),
        kept_params: run.ticket.sparse_params.nnz(),
    }
}

pub fn run(
    config: &Path,
    dataset: &Path,
    out: &Path,
    metrics: Option<&Path>,
) -> CliResult<MetricsRow> {
    let file = load_run_file(config)?;
    let cfg = file.train;
    let scorer = parse_scorer(&file.scorer, cfg.seed)?;
    let g = load_dataset(dataset)?;
    let result = run_pipeline(&g, &cfg, &scorer)?;
    write_bundle(out, &g, &result.ticket, &ticket_metrics(&result, cfg.seed))?;
    let row = metrics_row(&result, &cfg)?;
    if let Some(path) = metrics {
        append_csv(path, std::slice::from_ref(&row))?;
    }
    Ok(row)
}

pub fn worker_threads() -> CliResult<usize> {
    match std::env::var("GLT_THREADS") {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(n),
            _ => Err(CliError::Validation(format!(
                "GLT_THREADS must be a positive integer, got `{v}`"
            ))),
        },
        Err(_) => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}

struct SweepJob {
    scorer: String,
    k: u32,
    seed: u64,
}

pub fn sweep(
    spec_path: &Path,
    dataset_override: Option<&Path>,
    out: &Path,
    bundles: Option<&Path>,
) -> CliResult<Vec<MetricsRow>> {
    let spec = load_sweep_spec(spec_path)?;
    let dataset = dataset_override.map_or(spec.dataset.clone(), Path::to_path_buf);
    let g = load_dataset(&dataset)?;
    let threads = worker_threads()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Runtime(e.to_string()))?;

    let seed_cfg = |seed: u64| RunConfig {
        seed,
        ..spec.train.clone()
    };
    let mut jobs = Vec::new();
    for scorer in &spec.scorers {
        for &k in &spec.grid {
            for &seed in &spec.seeds {
                jobs.push(SweepJob {
                    scorer: scorer.clone(),
                    k,
                    seed,
                });
            }
        }
    }

    let rows = pool.install(|| {
        // One dense teacher per seed, shared by every scorer and sparsity.
        let teachers: Vec<(u64, Result<DenseModel<f64>, String>)> = spec
            .seeds
            .par_iter()
            .map(|&seed| {
                (
                    seed,
                    pretrain_dense(&g, &seed_cfg(seed)).map_err(|e| e.to_string()),
                )
            })
            .collect();
        jobs.par_iter()
            .map(|job| {
                let p_g = sparsity_target(job.k, spec.per_round);
                let p_theta = if spec.prune_weights { p_g } else { 0.0 };
                let cfg = RunConfig {
                    p_g,
                    p_theta,
                    ..seed_cfg(job.seed)
                };
                let label = job.scorer.split(':').next().unwrap_or(&job.scorer);
                let teacher = teachers
                    .iter()
                    .find(|(s, _)| *s == job.seed)
                    .map(|(_, t)| t.clone())
                    .expect("teacher per seed");
                let attempt = || -> CliResult<MetricsRow> {
                    let teacher = teacher.map_err(CliError::Runtime)?;
                    let scorer = parse_scorer(&job.scorer, job.seed)?;
                    let result = ticket_from_teacher(&g, &cfg, &scorer, teacher)?;
                    if let Some(dir) = bundles {
                        let name = format!("{label}_k{}_s{}", job.k, job.seed);
                        write_bundle(
                            dir.join(name),
                            &g,
                            &result.ticket,
                            &ticket_metrics(&result, job.seed),
                        )?;
                    }
                    metrics_row(&result, &cfg)
                };
                attempt().unwrap_or_else(|e| {
                    MetricsRow::failed(label, p_g, p_theta, job.seed, &e.to_string())
                })
            })
            .collect::<Vec<_>>()
    });
    write_csv(out, &rows)?;
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum AnalyzeMode {
    /// Laplacian energy; eigenvalues to --out if given.
    Energy,
    /// Per-edge energy change on removal vs edge degree.
    Delta,
    /// Mean degree of pruned edges across a p_g grid.
    DegreeReport,
    /// Edge scores of one scorer.
    Scores,
}

pub struct AnalyzeArgs<'a> {
    pub dataset: &'a Path,
    pub mode: AnalyzeMode,
    pub out: Option<&'a Path>,
    pub scorer: &'a str,
    pub sample: Option<usize>,
    pub seed: u64,
    pub budget: usize,
    pub grid: &'a [f64],
}

fn open_out(path: Option<&Path>, mode: &str) -> CliResult<(PathBuf, fs::File)> {
    let path =
        path.ok_or_else(|| CliError::Validation(format!("--out is required for {mode} mode")))?;
    let file = fs::File::create(path).map_err(|e| io_error(path, e))?;
    Ok((path.to_path_buf(), file))
}

/// Prints a short summary to stdout and writes the TSV report, if any.
pub fn analyze(args: &AnalyzeArgs<'_>) -> CliResult<String> {
    let g = load_dataset(args.dataset)?;
    match args.mode {
        AnalyzeMode::Energy => {
            let spectrum = laplacian_spectrum::<f64, f64>(&g, args.budget)?;
            if let Some(path) = args.out {
                let mut body = String::from("index\teigenvalue\n");
                for (i, l) in spectrum.eigenvalues.iter().enumerate() {
                    body.push_str(&format!("{i}\t{l}\n"));
                }
                fs::write(path, body).map_err(|e| io_error(path, e))?;
            }
            let e = (spectrum.energy() * 1e10).round() / 1e10;
            Ok(format!("{e:?}"))
        }
        AnalyzeMode::Delta => {
            let (path, mut file) = open_out(args.out, "delta")?;
            let selection = match args.sample {
                Some(k) => EdgeSelection::Sample { k, seed: args.seed },
                None => EdgeSelection::All,
            };
            let deltas = energy_deltas::<f64, f64>(&g, selection, args.budget)?;
            let report = delta_vs_degree_report(&g, &deltas)?;
            report
                .write_tsv(&mut file)
                .map_err(|e| io_error(&path, e))?;
            let rho = report
                .spearman_neg_degree_vs_delta
                .map_or("undefined".to_string(), |r| format!("{r:.6}"));
            Ok(format!(
                "edges={} spearman(-edge_degree, delta)={rho}",
                report.rows.len()
            ))
        }
        AnalyzeMode::DegreeReport => {
            let (path, mut file) = open_out(args.out, "degree-report")?;
            let scorer = parse_scorer(args.scorer, args.seed)?;
            let rows = pruned_degree_profile(&g, &scorer.score(&g), args.grid)?;
            let overall = glt_core::stats::mean(&g.edge_degrees());
            let mut body = String::from("p_g\tpruned_edges\tmean_pruned_edge_degree\n");
            for r in &rows {
                body.push_str(&format!(
                    "{}\t{}\t{}\n",
                    r.p_g, r.pruned_edges, r.mean_pruned_edge_degree
                ));
            }
            file.write_all(body.as_bytes())
                .map_err(|e| io_error(&path, e))?;
            Ok(format!(
                "scorer={scorer} rows={} graph_mean_edge_degree={overall:.6}",
                rows.len()
            ))
        }
        AnalyzeMode::Scores => {
            let (path, mut file) = open_out(args.out, "scores")?;
            let scorer = parse_scorer(args.scorer, args.seed)?;
            scorer
                .score(&g)
                .write_tsv(&g, &mut file)
                .map_err(|e| io_error(&path, e))?;
            Ok(format!("scorer={scorer} edges={}", g.num_edges()))
        }
    }
}

/// MACs of a ticket bundle on its dataset, or of the dense model with `hidden` units.
pub fn macs(dataset: &Path, bundle: Option<&Path>, hidden: usize) -> CliResult<MacsBreakdown> {
    let g = load_dataset(dataset)?;
    match bundle {
        Some(dir) => {
            let b = read_bundle::<f64>(dir)?;
            let pruned: HashSet<_> = b.pruned_edges.iter().copied().collect();
            for e in &pruned {
                if g.edge_index(*e).is_none() {
                    return Err(CliError::Validation(format!(
                        "bundle prunes edge ({}, {}) which is not in the dataset",
                        e.u, e.v
                    )));
                }
            }
            let keep: Vec<bool> = g.edges().iter().map(|e| !pruned.contains(e)).collect();
            let g_pruned = g.retain_edges(&keep)?;
            let (f, h, c) = b.params.dims();
            if f != g.num_features() || c != g.num_classes() {
                return Err(CliError::Validation(format!(
                    "bundle dims F={f} C={c} do not match dataset F={} C={}",
                    g.num_features(),
                    g.num_classes()
                )));
            }
            Ok(compute_macs(&g_pruned, &b.param_mask, (f, h, c))?)
        }
        None => {
            let dims = (g.num_features(), hidden, g.num_classes());
            let d = dims.0 * dims.1 + dims.1 * dims.2;
            Ok(compute_macs(&g, &vec![true; d], dims)?)
        }
    }
}
