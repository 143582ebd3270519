use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use log::info;
use serde::Serialize;
use tvgl::synth::{
    beta_grid, eta_grid, evaluate, generate_lfer_graph, generate_rw_graph, generate_tver_graph,
    grid_search, sample_gmrf, CellOutcome, Dataset, GridSpec,
};
use tvgl::{solve, temporal_change_signal, SignalWindows, TimeVaryingGraph};

use crate::config::{DatasetSpec, ExperimentConfig, FileSpec};
use crate::error::{CliError, Result};
use crate::io::{
    fmt_real, format_signals, hash_dir, read_bytes, read_graph_dir, read_signals, sha256_hex,
    Outputs, SIGNALS_FILE,
};

pub const MANIFEST_FILE: &str = "manifest.toml";
pub const TRUTH_DIR: &str = "truth";

/// Seed of the signal sampler, kept apart from the graph generator's stream.
pub fn signal_seed(seed: u64) -> u64 {
    seed ^ 0x9e37_79b9_7f4a_7c15
}

pub struct Generated {
    pub graph: TimeVaryingGraph,
    pub signals: SignalWindows,
    pub change_slots: Option<Vec<usize>>,
    pub positions: Option<Vec<Vec<[f64; 2]>>>,
}

pub fn generate_dataset(spec: &DatasetSpec, seed: u64) -> Result<Generated> {
    let (graph, change_slots, positions, k, sigma) = match spec {
        DatasetSpec::Tver(s) => (
            generate_tver_graph(&s.generator(seed))?,
            None,
            None,
            s.samples_per_window,
            s.sigma,
        ),
        DatasetSpec::Lfer(s) => {
            let out = generate_lfer_graph(&s.generator(seed))?;
            (
                out.graph,
                Some(out.change_slots),
                None,
                s.samples_per_window,
                s.sigma,
            )
        }
        DatasetSpec::Rw(s) => {
            let out = generate_rw_graph(&s.generator(seed))?;
            (
                out.graph,
                None,
                Some(out.positions),
                s.samples_per_window,
                s.sigma,
            )
        }
        DatasetSpec::File(_) => {
            return Err(CliError::Usage(
                "dataset kind `file` cannot be generated; pick tver, lfer or rw".into(),
            ))
        }
    };
    let signals = sample_gmrf(&graph, k, sigma, signal_seed(seed))?;
    Ok(Generated {
        graph,
        signals,
        change_slots,
        positions,
    })
}

#[derive(Serialize)]
struct Manifest<'a> {
    command: &'a str,
    version: &'a str,
    seed: u64,
    /// `(path, sha256)` of every input file.
    inputs: BTreeMap<String, String>,
    outputs: BTreeMap<String, String>,
    config: ExperimentConfig,
}

/// Writes `outputs` followed by the manifest; returns the manifest text.
fn finish(
    command: &str,
    cfg: &ExperimentConfig,
    inputs: Vec<(String, String)>,
    outputs: Outputs,
    out_dir: &Path,
) -> Result<String> {
    let written = outputs.commit(out_dir)?;
    let mut config = cfg.clone();
    config.out = None;
    let manifest = Manifest {
        command,
        version: env!("CARGO_PKG_VERSION"),
        seed: cfg.seed,
        inputs: inputs.into_iter().collect(),
        outputs: written.into_iter().collect(),
        config,
    };
    let text = toml::to_string(&manifest).expect("manifest serializes to TOML");
    let mut last = Outputs::default();
    last.add(MANIFEST_FILE, text.clone());
    last.commit(out_dir)?;
    Ok(text)
}

/// Temporal change signal, empty for a single slot.
fn change_signal(g: &TimeVaryingGraph) -> Result<Vec<f64>> {
    if g.n_slots() < 2 {
        return Ok(Vec::new());
    }
    Ok(temporal_change_signal(g)?)
}

fn file_input(path: &Path) -> Result<(String, String)> {
    Ok((path.display().to_string(), sha256_hex(&read_bytes(path)?)))
}

/// Signals and, for `generate`, ground truth and its side products.
pub fn cmd_generate(cfg: &ExperimentConfig) -> Result<String> {
    let out_dir = cfg.out_dir()?;
    let g = generate_dataset(&cfg.dataset, cfg.seed)?;
    info!(
        "generated {} graph: {} nodes, {} slots",
        cfg.dataset.kind(),
        g.graph.n_nodes(),
        g.graph.n_slots()
    );
    let mut outputs = Outputs::default();
    outputs.add(SIGNALS_FILE, format_signals(&g.signals));
    outputs.add_graph(Path::new(TRUTH_DIR), &g.graph);
    if let Some(changes) = &g.change_slots {
        let mut text = String::from("slot\n");
        for t in changes {
            let _ = writeln!(text, "{t}");
        }
        outputs.add("change_slots.csv", text);
    }
    if let Some(pos) = &g.positions {
        let mut text = String::from("slot,node,x,y\n");
        for (t, slot) in pos.iter().enumerate() {
            for (i, [x, y]) in slot.iter().enumerate() {
                let _ = writeln!(text, "{t},{i},{},{}", fmt_real(*x), fmt_real(*y));
            }
        }
        outputs.add("positions.csv", text);
    }
    finish("generate", cfg, Vec::new(), outputs, out_dir)
}

#[derive(Serialize)]
struct LearnReport {
    regularizer: String,
    n_nodes: usize,
    n_slots: usize,
    iterations: usize,
    converged: bool,
    final_objective: f64,
    last_relative_change: f64,
    gamma: f64,
    wall_time_seconds: f64,
}

fn signals_path(cfg: &ExperimentConfig) -> Result<&Path> {
    match &cfg.dataset {
        DatasetSpec::File(FileSpec { signals, .. }) => Ok(signals),
        _ => Err(CliError::Usage(
            "no signals file (use --signals or a `file` dataset)".into(),
        )),
    }
}

/// Learns graphs from a signals file. Outputs are written even when the
/// solver stops at the iteration cap, in which case the result is
/// [`CliError::NotConverged`].
pub fn cmd_learn(cfg: &ExperimentConfig) -> Result<String> {
    let out_dir = cfg.out_dir()?;
    let solver = cfg.solver.to_solver_config()?;
    let path = signals_path(cfg)?;
    let inputs = vec![file_input(path)?];
    let x = read_signals(path)?;
    info!(
        "learning {} slots of {} nodes ({} signals each)",
        x.n_slots(),
        x.n_nodes(),
        x.samples_per_window()
    );
    let start = Instant::now();
    let report = solve(&x, &solver)?;
    let elapsed = start.elapsed().as_secs_f64();

    let mut outputs = Outputs::default();
    outputs.add_graph(Path::new(""), &report.graph);
    let summary = LearnReport {
        regularizer: solver.regularizer.to_string(),
        n_nodes: x.n_nodes(),
        n_slots: x.n_slots(),
        iterations: report.iterations,
        converged: report.converged,
        final_objective: report.final_objective(),
        last_relative_change: report.state.last_relative_change,
        gamma: report.gamma,
        wall_time_seconds: elapsed,
    };
    outputs.add(
        "report.toml",
        toml::to_string(&summary).expect("report serializes"),
    );
    let mut trace = String::from("iteration,objective\n");
    for (i, v) in &report.objective_trace {
        let _ = writeln!(trace, "{i},{}", fmt_real(*v));
    }
    outputs.add("objective_trace.csv", trace);
    let mut change = String::from("slot,change\n");
    for (i, v) in change_signal(&report.graph)?.iter().enumerate() {
        let _ = writeln!(change, "{},{}", i + 1, fmt_real(*v));
    }
    outputs.add("temporal_change.csv", change);
    let manifest = finish("learn", cfg, inputs, outputs, out_dir)?;
    if !report.converged {
        return Err(CliError::NotConverged {
            iterations: report.iterations,
        });
    }
    Ok(manifest)
}

#[derive(Serialize)]
struct EvaluationSummary {
    n_nodes: usize,
    n_slots: usize,
    relative_error: f64,
    f_measure: f64,
}

/// Compares the graphs in `est_dir` with those in `truth_dir`.
pub fn cmd_evaluate(cfg: &ExperimentConfig, est_dir: &Path, truth_dir: &Path) -> Result<String> {
    let out_dir = cfg.out_dir()?;
    let rule = cfg.grid.presence_rule()?;
    let mut inputs = hash_dir(est_dir)?;
    inputs.extend(hash_dir(truth_dir)?);
    let est = read_graph_dir(est_dir)?;
    let truth = read_graph_dir(truth_dir)?;
    if (est.n_nodes(), est.n_slots()) != (truth.n_nodes(), truth.n_slots()) {
        return Err(CliError::Data(format!(
            "estimate has {} nodes × {} slots but the truth has {} × {}",
            est.n_nodes(),
            est.n_slots(),
            truth.n_nodes(),
            truth.n_slots()
        )));
    }
    let m = evaluate(&est, &truth, rule)?;

    let mut outputs = Outputs::default();
    let mut metrics = String::from("slot,relative_error,f_measure\n");
    for (t, (e, f)) in m
        .per_slot_relative_error
        .iter()
        .zip(&m.per_slot_f_measure)
        .enumerate()
    {
        let _ = writeln!(metrics, "{t},{},{}", fmt_real(*e), fmt_real(*f));
    }
    outputs.add("metrics.csv", metrics);
    let mut change = String::from("slot,estimate,truth\n");
    let (ce, ct) = (change_signal(&est)?, change_signal(&truth)?);
    for (i, (a, b)) in ce.iter().zip(&ct).enumerate() {
        let _ = writeln!(change, "{},{},{}", i + 1, fmt_real(*a), fmt_real(*b));
    }
    outputs.add("temporal_change.csv", change);
    let summary = EvaluationSummary {
        n_nodes: est.n_nodes(),
        n_slots: est.n_slots(),
        relative_error: m.relative_error,
        f_measure: m.f_measure,
    };
    outputs.add(
        "summary.toml",
        toml::to_string(&summary).expect("summary serializes"),
    );
    finish("evaluate", cfg, inputs, outputs, out_dir)
}

fn check_axis(name: &str, values: &[f64], positive: bool) -> Result<()> {
    if values.is_empty() {
        return Err(CliError::Usage(format!("grid.{name} is empty")));
    }
    let ok = |v: &f64| v.is_finite() && if positive { *v > 0.0 } else { *v >= 0.0 };
    if let Some(v) = values.iter().find(|v| !ok(v)) {
        return Err(CliError::Usage(format!(
            "grid.{name} contains invalid value {v}"
        )));
    }
    Ok(())
}

fn status_text(outcome: &CellOutcome) -> String {
    match outcome {
        CellOutcome::Done { .. } => "ok".into(),
        CellOutcome::Failed(msg) => format!("failed: {}", msg.replace([',', '\n'], ";")),
    }
}

/// Solves every grid cell on every dataset and tabulates averaged metrics.
pub fn cmd_gridsearch(cfg: &ExperimentConfig) -> Result<String> {
    let out_dir = cfg.out_dir()?;
    let base = cfg.solver.to_solver_config()?;
    let rule = cfg.grid.presence_rule()?;
    let mut inputs = Vec::new();
    let datasets: Vec<Dataset> = match &cfg.dataset {
        DatasetSpec::File(FileSpec { signals, truth }) => {
            let truth = truth.as_ref().ok_or_else(|| {
                CliError::Usage("grid search on a signals file needs a truth directory".into())
            })?;
            inputs.push(file_input(signals)?);
            inputs.extend(hash_dir(truth)?);
            let x = read_signals(signals)?;
            let g = read_graph_dir(truth)?;
            vec![Dataset::new(&x, g).map_err(|e| CliError::Data(e.to_string()))?]
        }
        spec => {
            if cfg.grid.repeats == 0 {
                return Err(CliError::Usage("grid.repeats must be at least 1".into()));
            }
            (0..cfg.grid.repeats as u64)
                .map(|r| {
                    let g = generate_dataset(spec, cfg.seed + r)?;
                    Ok(Dataset::new(&g.signals, g.graph)?)
                })
                .collect::<Result<_>>()?
        }
    };

    let z_max = datasets
        .iter()
        .map(|d| d.distances.max_value())
        .fold(0.0, f64::max);
    let grid = GridSpec {
        alphas: cfg.grid.alphas.clone(),
        betas: cfg
            .grid
            .betas
            .clone()
            .unwrap_or_else(|| beta_grid(z_max, cfg.grid.beta_steps)),
        etas: cfg.grid.etas.clone().unwrap_or_else(eta_grid),
    };
    check_axis("alphas", &grid.alphas, true)?;
    check_axis("betas", &grid.betas, false)?;
    check_axis("etas", &grid.etas, false)?;
    info!(
        "grid search: {} × {} × {} cells on {} datasets",
        grid.alphas.len(),
        grid.betas.len(),
        if base.regularizer.is_temporal() {
            grid.etas.len()
        } else {
            1
        },
        datasets.len()
    );
    let result = grid_search(&datasets, &base, &grid, rule)?;

    let mut table = String::from(
        "alpha,beta,eta,relative_error,f_measure,unconverged,mean_iterations,best_error,best_f_measure,status\n",
    );
    for (idx, cell) in result.cells.iter().enumerate() {
        let (err, f, unconverged, iters) = match cell.outcome {
            CellOutcome::Done {
                relative_error,
                f_measure,
                unconverged,
                mean_iterations,
            } => (relative_error, f_measure, unconverged, mean_iterations),
            CellOutcome::Failed(_) => (f64::NAN, f64::NAN, 0, f64::NAN),
        };
        let _ = writeln!(
            table,
            "{},{},{},{},{},{unconverged},{},{},{},{}",
            fmt_real(cell.alpha),
            fmt_real(cell.beta),
            fmt_real(cell.eta),
            fmt_real(err),
            fmt_real(f),
            fmt_real(iters),
            u8::from(result.best_error == Some(idx)),
            u8::from(result.best_f_measure == Some(idx)),
            status_text(&cell.outcome),
        );
    }
    let mut outputs = Outputs::default();
    outputs.add("gridsearch.csv", table);
    finish("gridsearch", cfg, inputs, outputs, out_dir)
}

/// `--signals` / `--truth` flags turn the dataset into a file dataset.
pub fn file_dataset(
    cfg: &mut ExperimentConfig,
    signals: Option<PathBuf>,
    truth: Option<PathBuf>,
) -> Result<()> {
    match (signals, &mut cfg.dataset) {
        (Some(s), DatasetSpec::File(f)) => f.signals = s,
        (Some(s), _) => {
            cfg.dataset = DatasetSpec::File(FileSpec {
                signals: s,
                truth: None,
            })
        }
        (None, _) => {}
    }
    if let Some(t) = truth {
        match &mut cfg.dataset {
            DatasetSpec::File(f) => f.truth = Some(t),
            _ => {
                return Err(CliError::Usage(
                    "--truth only applies together with a signals file".into(),
                ))
            }
        }
    }
    Ok(())
}
