//! Experiment kinds: build the degree sequence and graphs, fan out seeded
//! simulations, compare with the predictions and write CSV/JSON/SVG outputs.
//!
//! Every random stream is derived from `(master_seed, tag, indices...)`, so
//! outputs are pure functions of the configuration and independent of the
//! number of worker threads.

use std::fs::File;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use super::config::{ChaseMode, ExperimentConfig, ExperimentKind, SequenceSpec};
use super::plot::{emit_plot, PlotOptions, Series, Style};
use crate::annealed::{
    annealed_pair_walk, chase_table, mu_plus, simulate_chase, write_chase_csv, AnnealedSampler,
    ChaseOutcome,
};
use crate::dcm::{self, Digraph};
use crate::degree::{
    gen_out_regular, gen_regular, gen_uniform_range, stats, BiDegreeSequence, DegreeLaw,
    TheoryParams,
};
use crate::error::{Error, Result};
use crate::seed::{derive_seed, task_rng};
use crate::stats::{cross_graph_variance, summarize, SummaryStat};
use crate::theory::{phi_infinity, predicted_density, PredictionCurve};
use crate::voter::{consensus_time, run, OpinionState, Trajectory};
use crate::walks::{
    meeting_from_stationarity, stationary_distribution, wasserstein_samples_to_exp1,
    write_meeting_csv,
};

const TAG_SEQUENCE: u64 = 1;
const TAG_GRAPH: u64 = 2;
const TAG_RUN: u64 = 3;
const TAG_MEETING: u64 = 4;
const TAG_CHASE: u64 = 5;

/// Attempts per graph index to draw a strongly connected sample.
const MAX_GRAPH_ATTEMPTS: u64 = 100;
/// Left end of the geometric short-time grid.
const SHORT_MIN: f64 = 0.01;

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentReport {
    pub kind: ExperimentKind,
    pub files: Vec<String>,
    pub summary: Value,
}

/// The degree sequence described by the configuration.
pub fn build_sequence(cfg: &ExperimentConfig) -> Result<BiDegreeSequence> {
    let seed = derive_seed(cfg.master_seed, &[TAG_SEQUENCE]);
    match &cfg.sequence {
        SequenceSpec::Regular { n, d } => gen_regular(*n, *d),
        SequenceSpec::OutRegular { n, d, in_law } => {
            gen_out_regular(*n, *d, &DegreeLaw::new(in_law.clone())?, seed)
        }
        SequenceSpec::UniformRange { n, lo, hi } => gen_uniform_range(*n, *lo, *hi, seed),
        SequenceSpec::File { path } => BiDegreeSequence::read_csv(path),
    }
}

/// Graph number `index` of an experiment: the first strongly connected DCM
/// sample among the streams `(master, graph, index, attempt)`.
pub fn sample_graph(seq: &BiDegreeSequence, master_seed: u64, index: u64) -> Result<Digraph> {
    for attempt in 0..MAX_GRAPH_ATTEMPTS {
        let g = dcm::sample(seq, derive_seed(master_seed, &[TAG_GRAPH, index, attempt]));
        if dcm::is_strongly_connected(&g) {
            return Ok(g);
        }
    }
    Err(Error::NotStronglyConnected)
}

/// `k` geometrically spaced points from `a` to `b` inclusive.
pub fn geometric_grid(a: f64, b: f64, k: usize) -> Vec<f64> {
    if k < 2 || b <= a {
        return vec![a];
    }
    let r = (b / a).ln() / (k - 1) as f64;
    (0..k).map(|i| a * (r * i as f64).exp()).collect()
}

/// `k` evenly spaced points from `a` to `b` inclusive.
pub fn linear_grid(a: f64, b: f64, k: usize) -> Vec<f64> {
    if k < 2 {
        return vec![a];
    }
    (0..k).map(|i| a + (b - a) * i as f64 / (k - 1) as f64).collect()
}

fn sorted_unique(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs().max(1.0));
    v
}

/// Observation times: the explicit list when given, else the regime grid of
/// the experiment kind (geometric on short/intermediate scales, multiples of
/// `n` on the long scale).
pub fn observation_grid(cfg: &ExperimentConfig, n: usize) -> Vec<f64> {
    if let Some(times) = &cfg.times {
        return sorted_unique(times.clone());
    }
    let k = cfg.grid_points;
    let nf = n as f64;
    let short = geometric_grid(SHORT_MIN, cfg.short_max, k);
    let intermediate_end = (nf.sqrt() * cfg.short_max).max(cfg.window_hi).max(cfg.short_max);
    let intermediate = geometric_grid(cfg.short_max, intermediate_end, k);
    let long: Vec<f64> = cfg.ell.iter().map(|l| l * nf).collect();
    let mut times = vec![0.0];
    match cfg.kind {
        ExperimentKind::Plateau => {
            times.extend(short);
            times.extend(intermediate);
            times.extend(linear_grid(cfg.window_lo, cfg.window_hi, k));
        }
        ExperimentKind::Longtime => times.extend(long),
        ExperimentKind::Figure1 => {
            let t_max = cfg.t_max.unwrap_or(2.0 * nf);
            times.extend(geometric_grid(SHORT_MIN, t_max, 8 * k));
        }
        _ => {
            times.extend(short);
            times.extend(intermediate);
            times.extend(long);
        }
    }
    sorted_unique(times)
}

/// Voter runs on `graphs` DCM samples with `replicas` runs each; replica `r`
/// of graph `g` uses the stream `(master, run, g, r)`. `per_graph` is called
/// in graph order as soon as each graph's replicas finish.
pub fn run_ensemble<F>(
    seq: &BiDegreeSequence,
    graphs: usize,
    replicas: usize,
    u: f64,
    times: &[f64],
    master_seed: u64,
    mut per_graph: F,
) -> Result<Vec<Vec<Trajectory>>>
where
    F: FnMut(usize, &[Trajectory]) -> Result<()>,
{
    let t_max = times.iter().copied().fold(0.0, f64::max);
    let mut all = Vec::with_capacity(graphs);
    for gi in 0..graphs {
        let g = sample_graph(seq, master_seed, gi as u64)?;
        let runs = (0..replicas)
            .into_par_iter()
            .map(|r| {
                let mut rng = task_rng(master_seed, &[TAG_RUN, gi as u64, r as u64]);
                let mut state = OpinionState::init_bernoulli(&g, u, &mut rng)?;
                run(&g, &mut state, t_max, times, &mut rng)
            })
            .collect::<Result<Vec<_>>>()?;
        per_graph(gi, &runs)?;
        all.push(runs);
    }
    Ok(all)
}

/// Average of a trajectory over observation times in `[lo, hi]`.
pub fn window_average(times: &[f64], densities: &[f64], lo: f64, hi: f64) -> Option<f64> {
    let vals: Vec<f64> = times
        .iter()
        .zip(densities)
        .filter(|(t, _)| (lo..=hi).contains(*t))
        .map(|(_, d)| *d)
        .collect();
    (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64)
}

struct Outputs {
    dir: PathBuf,
    files: Vec<String>,
}

impl Outputs {
    fn new(dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    fn path(&mut self, name: &str) -> PathBuf {
        self.files.push(name.to_string());
        self.dir.join(name)
    }

    fn json(&mut self, name: &str, value: &impl Serialize) -> Result<()> {
        let path = self.path(name);
        let text = serde_json::to_string_pretty(value)?;
        std::fs::write(&path, text + "\n").map_err(|e| Error::io(&path, e))
    }
}

fn csv_writer(path: &Path) -> Result<csv::Writer<File>> {
    Ok(csv::Writer::from_path(path)?)
}

/// Runs `cfg` and writes its outputs under `out_dir`, including
/// `report.json` (deterministic) and `metadata.json` (adds wall time).
pub fn run_experiment(cfg: &ExperimentConfig, out_dir: &Path) -> Result<ExperimentReport> {
    let started = Instant::now();
    let mut out = Outputs::new(out_dir)?;
    let summary = match cfg.kind {
        ExperimentKind::Predict => predict(cfg, &mut out)?,
        ExperimentKind::Figure1 => figure1(cfg, &mut out)?,
        ExperimentKind::Plateau | ExperimentKind::Longtime => ensemble(cfg, &mut out)?,
        ExperimentKind::Meeting => meeting(cfg, &mut out)?,
        ExperimentKind::Chase => chase(cfg, &mut out)?,
        ExperimentKind::Consensus => consensus(cfg, &mut out)?,
    };
    out.json("report.json", &summary)?;
    let metadata = json!({
        "version": env!("CARGO_PKG_VERSION"),
        "kind": cfg.kind,
        "config": cfg.echo,
        "seed": cfg.master_seed,
        "wall_time_seconds": started.elapsed().as_secs_f64(),
    });
    out.json("metadata.json", &metadata)?;
    Ok(ExperimentReport {
        kind: cfg.kind,
        files: out.files,
        summary,
    })
}

fn sequence_and_params(cfg: &ExperimentConfig, out: &mut Outputs) -> Result<(BiDegreeSequence, TheoryParams)> {
    let seq = build_sequence(cfg)?;
    let params = stats(&seq)?;
    seq.write_csv(&out.path("degrees.csv"))?;
    out.json("params.json", &params)?;
    Ok((seq, params))
}

fn predict(cfg: &ExperimentConfig, out: &mut Outputs) -> Result<Value> {
    let (seq, params) = sequence_and_params(cfg, out)?;
    let times = observation_grid(cfg, seq.n());
    let curve = PredictionCurve::new(&times, seq.n(), cfg.u, params, cfg.tol)?;
    let mut w = csv_writer(&out.path("predict.csv"))?;
    w.write_record(["t", "predicted_density"])?;
    for (t, v) in curve.times.iter().zip(&curve.values) {
        w.write_record([t.to_string(), v.to_string()])?;
    }
    w.flush().map_err(|e| Error::io(&out.dir, e))?;
    let (x, y): (Vec<f64>, Vec<f64>) = curve
        .times
        .iter()
        .zip(&curve.values)
        .filter(|(t, _)| **t > 0.0)
        .map(|(t, v)| (*t, *v))
        .unzip();
    emit_plot(
        &[Series::new("predicted density", x, y, Style::Solid)],
        &PlotOptions {
            title: format!("Predicted discordant density, n = {}", seq.n()),
            x_label: "t".into(),
            y_label: "density".into(),
            log_x: true,
        },
        &out.path("predict.svg"),
    )?;
    Ok(json!({
        "kind": "predict",
        "params": params,
        "plateau": 2.0 * cfg.u * (1.0 - cfg.u) * phi_infinity(params.delta, params.rho)?,
        "points": curve.times.len(),
    }))
}

fn figure1(cfg: &ExperimentConfig, out: &mut Outputs) -> Result<Value> {
    let (seq, params) = sequence_and_params(cfg, out)?;
    let times = observation_grid(cfg, seq.n());
    let g = sample_graph(&seq, cfg.master_seed, 0)?;
    let seed = derive_seed(cfg.master_seed, &[TAG_RUN, 0, 0]);
    let mut rng = crate::seed::rng_from_seed(seed);
    let mut state = OpinionState::init_bernoulli(&g, cfg.u, &mut rng)?;
    let t_max = times.last().copied().unwrap_or(0.0);
    let traj = run(&g, &mut state, t_max, &times, &mut rng)?;
    traj.write_csv(&out.path("trajectory.csv"))?;
    out.json(
        "run.json",
        &crate::voter::RunMetadata {
            seed,
            n: g.n(),
            m: g.m(),
            u: cfg.u,
            consensus_time: traj.consensus_time,
        },
    )?;

    let plateau = 2.0 * cfg.u * (1.0 - cfg.u) * phi_infinity(params.delta, params.rho)?;
    let predicted = times
        .iter()
        .map(|&t| predicted_density(t, seq.n(), cfg.u, &params, cfg.tol))
        .collect::<Result<Vec<_>>>()?;
    let mut w = csv_writer(&out.path("prediction.csv"))?;
    w.write_record(["t", "predicted_density"])?;
    for (t, v) in times.iter().zip(&predicted) {
        w.write_record([t.to_string(), v.to_string()])?;
    }
    w.flush().map_err(|e| Error::io(&out.dir, e))?;

    let positive: Vec<usize> = (0..times.len()).filter(|&i| times[i] > 0.0).collect();
    let pick = |v: &[f64]| positive.iter().map(|&i| v[i]).collect::<Vec<_>>();
    let x = pick(&times);
    emit_plot(
        &[
            Series::new("simulated density", x.clone(), pick(&traj.densities), Style::Solid),
            Series::new("2u(1-u) phi(inf)", x.clone(), vec![plateau; x.len()], Style::Dashed),
            Series::new("prediction", x, pick(&predicted), Style::Dotted),
        ],
        &PlotOptions {
            title: format!("Voter model on a DCM, n = {}, u = {}", seq.n(), cfg.u),
            x_label: "t".into(),
            y_label: "density of discordant edges".into(),
            log_x: true,
        },
        &out.path("figure1.svg"),
    )?;
    Ok(json!({
        "kind": "figure1",
        "params": params,
        "plateau": plateau,
        "consensus_time": traj.consensus_time,
        "observations": times.len(),
    }))
}

fn ensemble(cfg: &ExperimentConfig, out: &mut Outputs) -> Result<Value> {
    if cfg.graphs * cfg.replicas < 2 {
        return Err(Error::config(None, "graphs * replicas must be >= 2 for ensemble statistics"));
    }
    let (seq, params) = sequence_and_params(cfg, out)?;
    let times = observation_grid(cfg, seq.n());
    let per_graph_path = out.path("per_graph.csv");
    let mut per_graph = csv_writer(&per_graph_path)?;
    per_graph.write_record(["graph", "t", "quenched_mean"])?;
    let runs = run_ensemble(&seq, cfg.graphs, cfg.replicas, cfg.u, &times, cfg.master_seed, |gi, trajs| {
        for (i, t) in times.iter().enumerate() {
            let mean = trajs.iter().map(|tr| tr.densities[i]).sum::<f64>() / trajs.len() as f64;
            per_graph.write_record([gi.to_string(), t.to_string(), mean.to_string()])?;
        }
        // progressive flush: completed graphs survive an interrupted run
        per_graph.flush().map_err(|e| Error::io(&per_graph_path, e))
    })?;
    drop(per_graph);

    let flat: Vec<&Trajectory> = runs.iter().flatten().collect();
    let mut rows: Vec<(f64, SummaryStat, f64)> = Vec::with_capacity(times.len());
    for (i, &t) in times.iter().enumerate() {
        let samples: Vec<f64> = flat.iter().map(|tr| tr.densities[i]).collect();
        let pred = predicted_density(t, seq.n(), cfg.u, &params, cfg.tol)?;
        rows.push((t, summarize(&samples)?, pred));
    }
    let mut w = csv_writer(&out.path("summary.csv"))?;
    w.write_record(["t", "mean", "std_error", "ci95_lo", "ci95_hi", "n_samples", "predicted_density"])?;
    for (t, s, p) in &rows {
        w.write_record([
            t.to_string(),
            s.mean.to_string(),
            s.std_error.to_string(),
            s.ci95_lo.to_string(),
            s.ci95_hi.to_string(),
            s.n_samples.to_string(),
            p.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io(&out.dir, e))?;

    let plateau = 2.0 * cfg.u * (1.0 - cfg.u) * phi_infinity(params.delta, params.rho)?;
    let (x, mean, pred): (Vec<f64>, Vec<f64>, Vec<f64>) = rows
        .iter()
        .filter(|(t, _, _)| *t > 0.0)
        .fold((vec![], vec![], vec![]), |(mut a, mut b, mut c), (t, s, p)| {
            a.push(*t);
            b.push(s.mean);
            c.push(*p);
            (a, b, c)
        });
    let name = cfg.kind.as_str();
    emit_plot(
        &[
            Series::new("ensemble mean", x.clone(), mean, Style::Points),
            Series::new("prediction", x.clone(), pred, Style::Solid),
            Series::new("2u(1-u) phi(inf)", x.clone(), vec![plateau; x.len()], Style::Dashed),
        ],
        &PlotOptions {
            title: format!("{name}: {} graphs x {} replicas, n = {}", cfg.graphs, cfg.replicas, seq.n()),
            x_label: "t".into(),
            y_label: "density of discordant edges".into(),
            log_x: x.iter().all(|&t| t > 0.0) && cfg.kind == ExperimentKind::Plateau,
        },
        &out.path(&format!("{name}.svg")),
    )?;

    let mut summary = json!({
        "kind": name,
        "params": params,
        "plateau": plateau,
        "graphs": cfg.graphs,
        "replicas": cfg.replicas,
    });
    if cfg.kind == ExperimentKind::Plateau {
        let (lo, hi) = (cfg.window_lo, cfg.window_hi);
        let per_run: Vec<f64> = flat
            .iter()
            .filter_map(|tr| window_average(&times, &tr.densities, lo, hi))
            .collect();
        let per_graph_means: Vec<f64> = runs
            .iter()
            .map(|trajs| {
                trajs
                    .iter()
                    .filter_map(|tr| window_average(&times, &tr.densities, lo, hi))
                    .sum::<f64>()
                    / trajs.len() as f64
            })
            .collect();
        let window_pred: Vec<f64> = rows
            .iter()
            .filter(|(t, _, _)| (lo..=hi).contains(t))
            .map(|(_, _, p)| *p)
            .collect();
        summary["window"] = json!({
            "lo": lo,
            "hi": hi,
            "stat": summarize(&per_run).ok(),
            "predicted_mean": window_pred.iter().sum::<f64>() / window_pred.len().max(1) as f64,
            "cross_graph_variance": cross_graph_variance(&per_graph_means).ok(),
        });
    }
    Ok(summary)
}

fn meeting(cfg: &ExperimentConfig, out: &mut Outputs) -> Result<Value> {
    let (seq, params) = sequence_and_params(cfg, out)?;
    let theta = params.theta_or_err()?;
    let n = seq.n() as f64;
    let g = sample_graph(&seq, cfg.master_seed, 0)?;
    let pi = stationary_distribution(&g, 1e-12, 1_000_000)?;
    let cap = cfg.cap_factor * theta * n;
    let samples = meeting_from_stationarity(
        &g,
        &pi,
        cfg.samples,
        cap,
        derive_seed(cfg.master_seed, &[TAG_MEETING]),
    )?;
    write_meeting_csv(&samples, &out.path("meeting.csv"))?;
    let scale = 0.5 * theta * n;
    let censored = samples.iter().filter(|s| s.censored()).count();
    let colocated = samples.iter().filter(|s| s.x0 == s.y0).count();
    let times: Vec<f64> = samples.iter().filter_map(|s| s.meet_time).collect();
    let mean_ratio = (!times.is_empty()).then(|| times.iter().sum::<f64>() / times.len() as f64 / scale);
    let w1 = wasserstein_samples_to_exp1(&samples, scale).ok();

    if !times.is_empty() {
        let mut sorted: Vec<f64> = times.iter().map(|t| t / scale).collect();
        sorted.sort_by(f64::total_cmp);
        let k = sorted.len() as f64;
        let q: Vec<f64> = (0..sorted.len()).map(|i| -(1.0 - (i as f64 + 0.5) / k).ln()).collect();
        emit_plot(
            &[
                Series::new("meeting time / (theta n / 2)", q.clone(), sorted, Style::Points),
                Series::new("Exp(1)", q.clone(), q, Style::Dashed),
            ],
            &PlotOptions {
                title: format!("Stationary meeting times vs Exp(1), n = {}", seq.n()),
                x_label: "Exp(1) quantile".into(),
                y_label: "scaled meeting time".into(),
                log_x: false,
            },
            &out.path("meeting_qq.svg"),
        )?;
    }
    Ok(json!({
        "kind": "meeting",
        "params": params,
        "scale": scale,
        "samples": samples.len(),
        "censored": censored,
        "colocated_starts": colocated,
        "mean_over_scale": mean_ratio,
        "wasserstein_to_exp1": w1,
        "stationary_residual": pi.residual,
    }))
}

fn chase(cfg: &ExperimentConfig, out: &mut Outputs) -> Result<Value> {
    let (seq, params) = sequence_and_params(cfg, out)?;
    let law = mu_plus(&seq)?;
    let (dx, dy) = (cfg.dx, cfg.dy);
    let outcomes: Vec<ChaseOutcome> = match cfg.chase_mode {
        ChaseMode::Tree => (0..cfg.runs)
            .into_par_iter()
            .map(|i| {
                let mut rng = task_rng(cfg.master_seed, &[TAG_CHASE, i as u64]);
                simulate_chase(dx, dy, &law, cfg.t_max_steps, &mut rng)
            })
            .collect::<Result<_>>()?,
        ChaseMode::Annealed => {
            let with_out = |d: usize| -> Vec<usize> { (0..seq.n()).filter(|&v| seq.out_degree(v) == d).collect() };
            let (xs, ys) = (with_out(dx), with_out(dy));
            if xs.is_empty() || ys.is_empty() || (ys.len() == 1 && xs == ys) {
                return Err(Error::config(
                    None,
                    format!("no pair of distinct vertices with out-degrees ({dx}, {dy})"),
                ));
            }
            let sampler = AnnealedSampler::new(&seq);
            (0..cfg.runs)
                .into_par_iter()
                .map(|i| {
                    let mut rng = task_rng(cfg.master_seed, &[TAG_CHASE, i as u64]);
                    let x = xs[rng.random_range(0..xs.len())];
                    let y = loop {
                        let y = ys[rng.random_range(0..ys.len())];
                        if y != x {
                            break y;
                        }
                    };
                    annealed_pair_walk(&sampler, x, y, cfg.t_max_steps, &mut rng)
                })
                .collect::<Result<_>>()?
        }
    };
    let table = chase_table(&outcomes, cfg.s_max, dx, dy, params.rho)?;
    write_chase_csv(&table, &out.path("chase.csv"))?;
    let even = outcomes
        .iter()
        .filter(|o| o.stayed_on_trail && o.meet_step.is_some_and(|s| s % 2 == 0))
        .count();
    Ok(json!({
        "kind": "chase",
        "mode": cfg.chase_mode,
        "params": params,
        "runs": outcomes.len(),
        "even_step_on_trail_meetings": even,
        "table": table,
    }))
}

fn consensus(cfg: &ExperimentConfig, out: &mut Outputs) -> Result<Value> {
    let (seq, params) = sequence_and_params(cfg, out)?;
    let theta = params.theta_or_err()?;
    let n = seq.n() as f64;
    let cap = cfg.cap_factor * theta * n;
    let mut w = csv_writer(&out.path("consensus.csv"))?;
    w.write_record(["graph", "replica", "consensus_time", "absorbed_state"])?;
    let mut absorbed = Vec::new();
    let mut ones = 0usize;
    let mut total = 0usize;
    for gi in 0..cfg.graphs {
        let g = sample_graph(&seq, cfg.master_seed, gi as u64)?;
        let results = (0..cfg.replicas)
            .into_par_iter()
            .map(|r| {
                let mut rng = task_rng(cfg.master_seed, &[TAG_RUN, gi as u64, r as u64]);
                let mut state = OpinionState::init_bernoulli(&g, cfg.u, &mut rng)?;
                let tau = consensus_time(&g, &mut state, cap, &mut rng)?;
                Ok((tau, tau.map(|_| state.ones_count() > 0)))
            })
            .collect::<Result<Vec<_>>>()?;
        for (r, (tau, side)) in results.into_iter().enumerate() {
            total += 1;
            let fmt = |v: Option<String>| v.unwrap_or_default();
            w.write_record([
                gi.to_string(),
                r.to_string(),
                fmt(tau.map(|t| t.to_string())),
                fmt(side.map(|s| u8::from(s).to_string())),
            ])?;
            if let Some(t) = tau {
                absorbed.push(t);
                ones += usize::from(side == Some(true));
            }
        }
        w.flush().map_err(|e| Error::io(&out.dir, e))?;
    }
    let ratio = (!absorbed.is_empty()).then(|| absorbed.iter().sum::<f64>() / absorbed.len() as f64 / (theta * n));
    Ok(json!({
        "kind": "consensus",
        "params": params,
        "runs": total,
        "absorbed": absorbed.len(),
        "absorbed_fraction": absorbed.len() as f64 / total as f64,
        "ones_fraction": if absorbed.is_empty() { None } else { Some(ones as f64 / absorbed.len() as f64) },
        "mean_over_theta_n": ratio,
        "cap": cap,
    }))
}
