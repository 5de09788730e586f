//! Seeded multi-run experiment execution and CSV emission.
//!
//! Runs fan out over (algorithm, cost point, seed) jobs on a worker pool and
//! are merged back in job order, so `results.csv` is byte-identical across
//! executions with the same config and seeds. Wall-clock timings go to a
//! separate `timings.csv` to keep the results file deterministic.

use std::path::Path;
use std::time::Instant;

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::baselines::{contextual_ucb_run, meta_ucb_run};
use crate::config::{ConfigError, ExperimentConfig};
use crate::model::{GenerativeModel, ModelError};
use crate::oracle::{oracle_seq, oracle_sim};
use crate::seq::SeqOos;
use crate::sim::SimOos;
use crate::trace::{compute_gain, compute_regret, AlgorithmKind, RunTrace};

/// Environment variable overriding the worker-pool size.
pub const WORKERS_ENV: &str = "OBS_BANDITS_WORKERS";

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("failed to write {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{WORKERS_ENV} must be a positive integer, got '{0}'")]
    BadWorkerCount(String),
    #[error("worker pool construction failed: {0}")]
    Pool(String),
}

/// One row of `results.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub algorithm: AlgorithmKind,
    pub cost: f64,
    pub seed: u64,
    pub gain: f64,
    pub regret: f64,
    pub rounds: u64,
}

/// One row of `curves.csv`: running averages at a checkpoint.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveRow {
    pub algorithm: AlgorithmKind,
    pub cost: f64,
    pub seed: u64,
    pub t: u64,
    pub avg_gain: f64,
    pub cum_regret: f64,
}

/// Oracle values for one cost point.
#[derive(Debug, Clone, Copy)]
pub struct OraclePoint {
    pub cost: f64,
    pub sim_value: f64,
    pub seq_value: f64,
}

#[derive(Debug)]
pub struct ExperimentResults {
    pub summaries: Vec<RunSummary>,
    pub curves: Vec<CurveRow>,
    pub oracles: Vec<OraclePoint>,
    /// Timing per summary row, in seconds, same order as `summaries`.
    pub wall_seconds: Vec<f64>,
    /// Non-fatal diagnostics (e.g. a baseline refusing an instance).
    pub warnings: Vec<String>,
}

fn worker_count() -> Result<usize, HarnessError> {
    match std::env::var(WORKERS_ENV) {
        Ok(raw) => raw
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&n| n >= 1)
            .ok_or(HarnessError::BadWorkerCount(raw)),
        Err(_) => Ok(std::thread::available_parallelism()
            .map(|n| n.get())
            .unwrap_or(1)),
    }
}

/// Serializes a float with 17 significant digits; parsing the result
/// reproduces the exact value.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Log-spaced checkpoints in `1..=horizon`, at most `points` of them, always
/// ending at the horizon.
pub fn log_checkpoints(horizon: u64, points: usize) -> Vec<u64> {
    if horizon <= 1 || points < 2 {
        return vec![horizon.max(1)];
    }
    let mut out = Vec::with_capacity(points);
    let h = horizon as f64;
    for k in 0..points {
        let frac = k as f64 / (points - 1) as f64;
        let t = h.powf(frac).round() as u64;
        let t = t.clamp(1, horizon);
        if out.last() != Some(&t) {
            out.push(t);
        }
    }
    if out.last() != Some(&horizon) {
        out.push(horizon);
    }
    out
}

struct Job {
    algorithm: AlgorithmKind,
    cost_index: usize,
    seed: u64,
}

fn run_algorithm(
    algorithm: AlgorithmKind,
    model: &GenerativeModel,
    config: &ExperimentConfig,
    seed: u64,
) -> Result<RunTrace, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match algorithm {
        AlgorithmKind::SimOos => Ok(SimOos::run(
            model,
            config.m,
            config.beta,
            config.delta,
            config.horizon,
            &mut rng,
        )),
        AlgorithmKind::SeqOos => Ok(SeqOos::run(
            model,
            config.m,
            config.beta,
            config.delta,
            config.horizon,
            &mut rng,
        )),
        AlgorithmKind::ContextualUcb => Ok(contextual_ucb_run(
            model,
            config.beta,
            config.horizon,
            &mut rng,
        )),
        AlgorithmKind::MetaUcb => {
            meta_ucb_run(model, config.beta, config.m, config.horizon, &mut rng)
                .map_err(|e| e.to_string())
        }
    }
}

/// Runs every (algorithm, cost point, seed) combination and writes
/// `results.csv`, `timings.csv` and optionally `curves.csv` under `out_dir`.
pub fn run_experiment(
    config: &ExperimentConfig,
    out_dir: &Path,
) -> Result<ExperimentResults, HarnessError> {
    let base_model = config.resolve_model()?;
    let cost_points = config.cost_points(&base_model);

    // one model and one pair of oracle values per cost point
    let mut models = Vec::with_capacity(cost_points.len());
    let mut oracles = Vec::with_capacity(cost_points.len());
    for (label, costs) in &cost_points {
        let model = base_model.with_costs(costs.clone())?;
        let sim = oracle_sim(&model, config.m, config.beta);
        let seq = oracle_seq(&model, config.m, config.beta);
        oracles.push(OraclePoint {
            cost: *label,
            sim_value: sim.value,
            seq_value: seq.value,
        });
        models.push(model);
    }

    let mut jobs = Vec::new();
    for (cost_index, _) in cost_points.iter().enumerate() {
        for &algorithm in &config.algorithms {
            for &seed in &config.seeds {
                jobs.push(Job {
                    algorithm,
                    cost_index,
                    seed,
                });
            }
        }
    }

    let checkpoints = log_checkpoints(config.horizon, config.output.curve_points);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(worker_count()?)
        .build()
        .map_err(|e| HarnessError::Pool(e.to_string()))?;

    type JobOutput = (Option<(RunSummary, Vec<CurveRow>, f64)>, Option<String>);
    let outputs: Vec<JobOutput> = pool.install(|| {
        jobs.par_iter()
            .map(|job| {
                let model = &models[job.cost_index];
                let oracle = &oracles[job.cost_index];
                let oracle_value = match job.algorithm {
                    AlgorithmKind::SeqOos => oracle.seq_value,
                    _ => oracle.sim_value,
                };
                let start = Instant::now();
                match run_algorithm(job.algorithm, model, config, job.seed) {
                    Ok(trace) => {
                        let wall = start.elapsed().as_secs_f64();
                        let summary = RunSummary {
                            algorithm: job.algorithm,
                            cost: oracle.cost,
                            seed: job.seed,
                            gain: compute_gain(&trace, config.beta),
                            regret: compute_regret(&trace, oracle_value, config.beta),
                            rounds: trace.rounds,
                        };
                        let curves = if config.output.curves {
                            curve_rows(&trace, config.beta, oracle_value, oracle.cost, job.seed, &checkpoints)
                        } else {
                            Vec::new()
                        };
                        (Some((summary, curves, wall)), None)
                    }
                    Err(message) => (
                        None,
                        Some(format!(
                            "{} skipped at cost {} seed {}: {message}",
                            job.algorithm, oracle.cost, job.seed
                        )),
                    ),
                }
            })
            .collect()
    });

    let mut summaries = Vec::new();
    let mut curves = Vec::new();
    let mut wall_seconds = Vec::new();
    let mut warnings = Vec::new();
    for (ok, warn) in outputs {
        if let Some((summary, mut rows, wall)) = ok {
            summaries.push(summary);
            curves.append(&mut rows);
            wall_seconds.push(wall);
        }
        if let Some(w) = warn {
            warnings.push(w);
        }
    }

    std::fs::create_dir_all(out_dir).map_err(|source| HarnessError::Io {
        path: out_dir.display().to_string(),
        source,
    })?;
    write_results_csv(&out_dir.join("results.csv"), &summaries)?;
    write_timings_csv(&out_dir.join("timings.csv"), &summaries, &wall_seconds)?;
    if config.output.curves {
        write_curves_csv(&out_dir.join("curves.csv"), &curves)?;
    }

    Ok(ExperimentResults {
        summaries,
        curves,
        oracles,
        wall_seconds,
        warnings,
    })
}

fn curve_rows(
    trace: &RunTrace,
    beta: f64,
    oracle_value: f64,
    cost: f64,
    seed: u64,
    checkpoints: &[u64],
) -> Vec<CurveRow> {
    let mut rows = Vec::with_capacity(checkpoints.len());
    let mut total = 0.0;
    let mut next = 0usize;
    for row in &trace.rows {
        total += beta * row.reward - row.cost;
        while next < checkpoints.len() && checkpoints[next] == row.t {
            rows.push(CurveRow {
                algorithm: trace.algorithm,
                cost,
                seed,
                t: row.t,
                avg_gain: total / row.t as f64,
                cum_regret: row.t as f64 * oracle_value - total,
            });
            next += 1;
        }
    }
    rows
}

fn write_file(path: &Path, contents: &str) -> Result<(), HarnessError> {
    std::fs::write(path, contents).map_err(|source| HarnessError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn write_results_csv(path: &Path, summaries: &[RunSummary]) -> Result<(), HarnessError> {
    let mut out = String::from("algorithm,cost,seed,gain,regret,rounds\n");
    for s in summaries {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            s.algorithm,
            format_float(s.cost),
            s.seed,
            format_float(s.gain),
            format_float(s.regret),
            s.rounds
        ));
    }
    write_file(path, &out)
}

fn write_timings_csv(
    path: &Path,
    summaries: &[RunSummary],
    wall_seconds: &[f64],
) -> Result<(), HarnessError> {
    let mut out = String::from("algorithm,cost,seed,wall_s\n");
    for (s, wall) in summaries.iter().zip(wall_seconds) {
        out.push_str(&format!(
            "{},{},{},{wall:.6}\n",
            s.algorithm,
            format_float(s.cost),
            s.seed
        ));
    }
    write_file(path, &out)
}

fn write_curves_csv(path: &Path, curves: &[CurveRow]) -> Result<(), HarnessError> {
    let mut out = String::from("algorithm,cost,seed,t,avg_gain,cum_regret\n");
    for c in curves {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            c.algorithm,
            format_float(c.cost),
            c.seed,
            c.t,
            format_float(c.avg_gain),
            format_float(c.cum_regret)
        ));
    }
    write_file(path, &out)
}
