//! Seeded synthetic benchmark: nearest, bicubic and reconstruction with
//! operators learned from high- and low-resolution depth.
//!
//! Operators are trained once on held-out scenes (seeds starting at
//! `bench.train_seed`) and shared by every test seed.

use std::io::Write;
use std::path::Path;

use cosparse_core::eval::{label_accuracy, rmse};
use cosparse_core::learning::{learn_hr, learn_lr, sample_positions, HrLearned, HrTrainingSet, LearnConfig, LrLearned, LrTrainingSet};
use cosparse_core::manifold::CgIteration;
use cosparse_core::simulate::{
    apply_downsample, baseline_bicubic, baseline_nearest, corrupt_semantics, gen_scene, interpolate_observations, DownsampleOp, Noise,
    SceneSpec,
};
use cosparse_core::{superresolve, AnalysisOperator, SrProblem};
use rayon::prelude::*;

use crate::config::RunConfig;
use crate::error::{Error, Result};

pub const METHODS: [&str; 4] = ["nearest", "bicubic", "ours-hr", "ours-lr"];

const SEMANTIC_SEED_OFFSET: u64 = 500;
const DEPTH_NOISE_SEED_OFFSET: u64 = 700;
/// Slack allowed when checking that logged objectives never increase.
pub const MONOTONE_SLACK: f64 = 1e-10;

/// Thread count from `COSPARSE_THREADS`; unset, empty or 0 means automatic.
pub fn thread_count() -> Result<usize> {
    match std::env::var("COSPARSE_THREADS") {
        Ok(v) if !v.trim().is_empty() => v
            .trim()
            .parse()
            .map_err(|_| Error::Usage(format!("COSPARSE_THREADS must be a count, got `{v}`"))),
        _ => Ok(0),
    }
}

/// Runs `f` on a pool capped by `COSPARSE_THREADS`.
pub fn with_pool<T: Send>(f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(thread_count()?)
        .build()
        .map_err(|e| Error::Usage(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

fn exceeds(cost: f64, previous: f64) -> bool {
    cost > previous + MONOTONE_SLACK * previous.abs().max(1.0)
}

/// Accepted steps whose cost rose above the previous iterate.
pub fn trace_violations(trace: &[CgIteration]) -> usize {
    trace.iter().filter(|it| exceeds(it.cost, it.previous_cost)).count()
}

/// Adjacent pairs of `totals` that increase.
pub fn sequence_violations(totals: &[f64]) -> usize {
    totals.windows(2).filter(|p| exceeds(p[1], p[0])).count()
}

pub struct TrainedOperators {
    pub hr: HrLearned,
    pub lr: LrLearned,
    pub learn: LearnConfig,
}

impl TrainedOperators {
    /// Non-increasing violations across every logged training objective.
    pub fn monotone_violations(&self) -> usize {
        let outer: Vec<f64> = self.lr.outer_trace.iter().map(|t| t.total()).collect();
        trace_violations(&self.hr.trace)
            + sequence_violations(&outer)
            + self.lr.operator_traces.iter().map(|t| trace_violations(t)).sum::<usize>()
            + self.lr.depth_traces.iter().map(|t| trace_violations(t)).sum::<usize>()
    }
}

fn scene_spec(cfg: &RunConfig, seed: u64) -> SceneSpec {
    SceneSpec { seed, ..cfg.scene.clone() }
}

fn downsample_op(cfg: &RunConfig) -> DownsampleOp {
    DownsampleOp::GridSubsample { factor: cfg.bench.factor }
}

fn observation_noise(cfg: &RunConfig, seed: u64) -> Noise {
    Noise {
        sigma: cfg.bench.noise_sigma,
        seed: seed.wrapping_add(DEPTH_NOISE_SEED_OFFSET),
    }
}

/// Learns HR and LR operators on the held-out training scenes.
pub fn train_operators(cfg: &RunConfig) -> Result<TrainedOperators> {
    cfg.validate()?;
    let learn = cfg.learn_config(cfg.scene.num_classes)?;
    let side = learn.patch_side;
    let op = downsample_op(cfg);
    let mut hr_sets = Vec::new();
    let mut lr_sets = Vec::new();
    for i in 0..cfg.bench.train_scenes as u64 {
        let seed = cfg.bench.train_seed.wrapping_add(i);
        let scene = gen_scene(&scene_spec(cfg, seed))?;
        let pos = sample_positions(
            cfg.scene.width,
            cfg.scene.height,
            side,
            cfg.patches_per_scene,
            cfg.learn_seed.wrapping_add(i),
        )?;
        hr_sets.push(HrTrainingSet::from_scene(
            &scene.intensity,
            &scene.depth,
            &scene.semantics,
            side,
            &pos,
        )?);
        let observed = apply_downsample(&scene.depth, &op, observation_noise(cfg, seed))?;
        let init = interpolate_observations(&observed)?;
        lr_sets.push(LrTrainingSet::from_scene(
            &scene.intensity,
            &observed,
            &init,
            &scene.semantics,
            side,
            &pos,
        )?);
    }
    let hr_set = HrTrainingSet::concat(&hr_sets)?;
    let lr_set = LrTrainingSet::concat(&lr_sets)?;
    let (hr, lr) = rayon::join(|| learn_hr(&hr_set, &learn), || learn_lr(&lr_set, &learn));
    Ok(TrainedOperators { hr: hr?, lr: lr?, learn })
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub seed: u64,
    pub method: &'static str,
    pub rmse: f64,
    /// Accuracy of the corrupted semantic input.
    pub input_pixel_acc: f64,
    pub per_pixel_acc: f64,
    pub per_class_acc: f64,
    /// CG iterations over all rounds; 0 for the baselines.
    pub iterations: usize,
}

/// One seed's rows (in [`METHODS`] order) and its count of objective
/// increases across reconstruction rounds.
pub fn evaluate_seed(cfg: &RunConfig, trained: &TrainedOperators, seed: u64) -> Result<(Vec<BenchRow>, usize)> {
    let scene = gen_scene(&scene_spec(cfg, seed))?;
    let op = downsample_op(cfg);
    let observed = apply_downsample(&scene.depth, &op, observation_noise(cfg, seed))?;
    let noisy = corrupt_semantics(
        &scene.semantics,
        cfg.bench.flip_rate,
        cfg.bench.softness,
        seed.wrapping_add(SEMANTIC_SEED_OFFSET),
    )?;
    let input = label_accuracy(&noisy, &scene.semantics)?;
    let mut rows = Vec::with_capacity(METHODS.len());
    for (method, pred) in [("nearest", baseline_nearest(&observed)?), ("bicubic", baseline_bicubic(&observed)?)] {
        rows.push(BenchRow {
            seed,
            method,
            rmse: rmse(&pred, &scene.depth, None)?,
            input_pixel_acc: input.per_pixel,
            per_pixel_acc: input.per_pixel,
            per_class_acc: input.per_class,
            iterations: 0,
        });
    }
    let mut violations = 0;
    let ours: [(&'static str, &[AnalysisOperator; 3]); 2] = [("ours-hr", &trained.hr.operators), ("ours-lr", &trained.lr.operators)];
    for (method, ops) in ours {
        let problem = SrProblem {
            intensity: scene.intensity.clone(),
            observed_depth: observed.clone(),
            noisy_semantics: noisy.clone(),
            operators: ops.clone(),
            weights: cfg.weights,
            downsample: op.clone(),
            schedule: cfg.schedule,
            cg: cfg.sr_cg,
        };
        let out = superresolve(&problem)?;
        violations += out.traces.iter().map(|t| trace_violations(t)).sum::<usize>();
        let acc = label_accuracy(&out.semantics, &scene.semantics)?;
        rows.push(BenchRow {
            seed,
            method,
            rmse: rmse(&out.depth, &scene.depth, None)?,
            input_pixel_acc: input.per_pixel,
            per_pixel_acc: acc.per_pixel,
            per_class_acc: acc.per_class,
            iterations: out.rounds.iter().map(|r| r.iterations).sum(),
        });
    }
    Ok((rows, violations))
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchSummary {
    pub seeds: usize,
    /// Mean RMSE per method, in [`METHODS`] order.
    pub mean_rmse: [f64; 4],
    pub hr_beats_bicubic: usize,
    pub lr_beats_bicubic: usize,
    /// Seeds where ours-hr labels beat the corrupted input.
    pub hr_semantic_gains: usize,
    pub lr_semantic_gains: usize,
    pub mean_input_pixel_acc: f64,
    pub mean_hr_pixel_acc: f64,
    pub hr_train_initial: f64,
    pub hr_train_final: f64,
    pub lr_outer_initial: f64,
    pub lr_outer_final: f64,
    pub monotone_violations: usize,
}

impl BenchSummary {
    pub fn win_rate(&self) -> f64 {
        self.hr_beats_bicubic as f64 / self.seeds as f64
    }

    pub fn lr_hr_ratio(&self) -> f64 {
        self.mean_rmse[3] / self.mean_rmse[2]
    }
}

pub struct BenchReport {
    pub rows: Vec<BenchRow>,
    pub summary: BenchSummary,
}

fn summarize(rows: &[BenchRow], seeds: usize, trained: &TrainedOperators, violations: usize) -> BenchSummary {
    let per_seed = |m: &str| -> Vec<&BenchRow> { rows.iter().filter(|r| r.method == m).collect() };
    let mean = |it: &mut dyn Iterator<Item = f64>| it.sum::<f64>() / seeds as f64;
    let mut mean_rmse = [0.0; 4];
    for (slot, m) in mean_rmse.iter_mut().zip(METHODS) {
        *slot = mean(&mut per_seed(m).iter().map(|r| r.rmse));
    }
    let (bic, hr, lr) = (per_seed("bicubic"), per_seed("ours-hr"), per_seed("ours-lr"));
    let wins = |ours: &[&BenchRow]| ours.iter().zip(&bic).filter(|(o, b)| o.rmse < b.rmse).count();
    let gains = |ours: &[&BenchRow]| ours.iter().filter(|o| o.per_pixel_acc > o.input_pixel_acc).count();
    let outer = &trained.lr.outer_trace;
    BenchSummary {
        seeds,
        mean_rmse,
        hr_beats_bicubic: wins(&hr),
        lr_beats_bicubic: wins(&lr),
        hr_semantic_gains: gains(&hr),
        lr_semantic_gains: gains(&lr),
        mean_input_pixel_acc: mean(&mut hr.iter().map(|r| r.input_pixel_acc)),
        mean_hr_pixel_acc: mean(&mut hr.iter().map(|r| r.per_pixel_acc)),
        hr_train_initial: trained.hr.initial_cost,
        hr_train_final: trained.hr.final_cost,
        lr_outer_initial: outer.first().map_or(f64::NAN, |t| t.total()),
        lr_outer_final: outer.last().map_or(f64::NAN, |t| t.total()),
        monotone_violations: violations + trained.monotone_violations(),
    }
}

/// Trains once, then evaluates test seeds `0..seeds` in parallel.
pub fn run_bench(cfg: &RunConfig, seeds: usize) -> Result<BenchReport> {
    if seeds == 0 {
        return Err(Error::Usage("--seeds must be at least 1".into()));
    }
    with_pool(|| -> Result<BenchReport> {
        let trained = train_operators(cfg)?;
        let per_seed: Vec<(Vec<BenchRow>, usize)> = (0..seeds as u64)
            .into_par_iter()
            .map(|s| evaluate_seed(cfg, &trained, s))
            .collect::<Result<_>>()?;
        let violations = per_seed.iter().map(|p| p.1).sum();
        let rows: Vec<BenchRow> = per_seed.into_iter().flat_map(|p| p.0).collect();
        let summary = summarize(&rows, seeds, &trained, violations);
        Ok(BenchReport { rows, summary })
    })?
}

pub fn write_rows(path: &Path, rows: &[BenchRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([
        "seed",
        "method",
        "rmse",
        "input_pixel_acc",
        "per_pixel_acc",
        "per_class_acc",
        "iterations",
    ])?;
    for r in rows {
        w.write_record([
            r.seed.to_string(),
            r.method.to_string(),
            r.rmse.to_string(),
            r.input_pixel_acc.to_string(),
            r.per_pixel_acc.to_string(),
            r.per_class_acc.to_string(),
            r.iterations.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// `metric,value` pairs for the summary file.
pub fn summary_pairs(s: &BenchSummary) -> Vec<(String, String)> {
    let mut out = vec![("seeds".to_string(), s.seeds.to_string())];
    for (m, v) in METHODS.iter().zip(s.mean_rmse) {
        out.push((format!("mean_rmse_{m}"), v.to_string()));
    }
    let rest: [(&str, String); 13] = [
        ("hr_beats_bicubic", s.hr_beats_bicubic.to_string()),
        ("win_rate_hr_vs_bicubic", s.win_rate().to_string()),
        ("lr_beats_bicubic", s.lr_beats_bicubic.to_string()),
        ("lr_hr_rmse_ratio", s.lr_hr_ratio().to_string()),
        ("hr_semantic_gains", s.hr_semantic_gains.to_string()),
        ("lr_semantic_gains", s.lr_semantic_gains.to_string()),
        ("mean_input_pixel_acc", s.mean_input_pixel_acc.to_string()),
        ("mean_hr_pixel_acc", s.mean_hr_pixel_acc.to_string()),
        ("hr_train_initial", s.hr_train_initial.to_string()),
        ("hr_train_final", s.hr_train_final.to_string()),
        ("lr_outer_initial", s.lr_outer_initial.to_string()),
        ("lr_outer_final", s.lr_outer_final.to_string()),
        ("monotone_violations", s.monotone_violations.to_string()),
    ];
    out.extend(rest.into_iter().map(|(k, v)| (k.to_string(), v)));
    out
}

pub fn write_summary(path: &Path, s: &BenchSummary) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["metric", "value"])?;
    for (k, v) in summary_pairs(s) {
        w.write_record([k, v])?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn print_summary(out: &mut impl Write, s: &BenchSummary) -> std::io::Result<()> {
    for (k, v) in summary_pairs(s) {
        writeln!(out, "{k:>24}  {v}")?;
    }
    Ok(())
}
