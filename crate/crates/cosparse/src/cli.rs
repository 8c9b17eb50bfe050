use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use cosparse_core::eval::MetricsReport;
use cosparse_core::learning::{learn_hr, learn_lr, sample_positions, HrTrainingSet, LrTrainingSet};
use cosparse_core::simulate::{apply_downsample, gen_scene, interpolate_observations, DownsampleOp, Noise};
use cosparse_core::superres::superresolve_with_gt;
use cosparse_core::{ScalarField, SrProblem};

use crate::bench::{print_summary, run_bench, with_pool, write_rows, write_summary};
use crate::config::RunConfig;
use crate::data::{self, ensure_dir, load_mask, load_operators, load_scalar, load_semantic, SceneData};
use crate::error::{Error, Result};
use crate::pgm::{normalize_for_display, write_pgm};
use crate::tensor::{write_tensor, Tensor};

#[derive(Debug, Parser)]
#[command(name = "cosparse", version, about = "Trimodal co-sparse depth super-resolution")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, clap::Args)]
pub struct ConfigArgs {
    /// Configuration file of `key = value` lines.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Override one key, e.g. `--set sr.rho=0.003`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
}

impl ConfigArgs {
    fn resolve(&self, file: Option<&Path>) -> Result<RunConfig> {
        let mut cfg = RunConfig::default();
        if let Some(p) = file.or(self.config.as_deref()) {
            cfg.merge_file(p)?;
        }
        for pair in &self.overrides {
            cfg.set_pair(pair)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Hr,
    Lr,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic scene.
    Gen {
        /// Scene configuration (same format as --config).
        #[arg(long)]
        spec: Option<PathBuf>,
        /// Override one key. Repeatable.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        /// Output scene directory.
        #[arg(long)]
        out: PathBuf,
    },
    /// Learn the three analysis operators.
    Train {
        /// `hr` learns from full-resolution depth; `lr` also reconstructs it
        /// from the observed samples.
        #[arg(long, value_enum)]
        mode: Mode,
        /// Scene directory. Repeatable.
        #[arg(long, required = true)]
        data: Vec<PathBuf>,
        #[command(flatten)]
        config: ConfigArgs,
        /// Output directory for the operators and trace.
        #[arg(long)]
        out: PathBuf,
    },
    /// Super-resolve a depth map and denoise its semantics.
    Sr {
        /// Full-resolution intensity tensor.
        #[arg(long)]
        image: PathBuf,
        /// Depth tensor; only masked entries are read.
        #[arg(long)]
        depth: PathBuf,
        /// u8 mask of observed depth pixels.
        #[arg(long)]
        mask: PathBuf,
        /// Noisy class probabilities `[h, w, L]`.
        #[arg(long)]
        semantics: PathBuf,
        /// Directory holding omega_i/d/s.csaf.
        #[arg(long)]
        ops: PathBuf,
        /// Ground-truth depth; adds per-round RMSE to the trace.
        #[arg(long)]
        gt: Option<PathBuf>,
        #[command(flatten)]
        config: ConfigArgs,
        /// Output directory for depth, semantics, and trace.
        #[arg(long)]
        out: PathBuf,
    },
    /// Score predictions against ground truth.
    Eval {
        /// Predicted depth. Repeatable, paired in order with --gt.
        #[arg(long, required = true)]
        pred: Vec<PathBuf>,
        /// Ground-truth depth. Repeatable.
        #[arg(long, required = true)]
        gt: Vec<PathBuf>,
        /// Baseline depth for relative improvement. Repeatable.
        #[arg(long)]
        baseline: Vec<PathBuf>,
        /// Predicted class probabilities. Repeatable.
        #[arg(long = "sem-pred")]
        sem_pred: Vec<PathBuf>,
        /// Ground-truth class probabilities. Repeatable.
        #[arg(long = "sem-gt")]
        sem_gt: Vec<PathBuf>,
        /// Valid-pixel mask applied to every depth comparison.
        #[arg(long)]
        mask: Option<PathBuf>,
        /// Output CSV.
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the synthetic benchmark.
    Bench {
        /// Number of test scenes (seeds 0..N).
        #[arg(long)]
        seeds: usize,
        /// Grid subsampling factor; overrides `bench.factor`.
        #[arg(long)]
        factor: Option<usize>,
        #[command(flatten)]
        config: ConfigArgs,
        /// Per-run CSV; the summary goes next to it as `*.summary.csv`.
        #[arg(long)]
        out: PathBuf,
    },
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Gen { spec, overrides, out } => {
            let args = ConfigArgs { config: None, overrides };
            cmd_gen(&args.resolve(spec.as_deref())?, &out)
        }
        Command::Train { mode, data, config, out } => cmd_train(mode, &data, &config.resolve(None)?, &out),
        Command::Sr {
            image,
            depth,
            mask,
            semantics,
            ops,
            gt,
            config,
            out,
        } => {
            let inputs = SrInputs {
                image,
                depth,
                mask,
                semantics,
                ops,
                gt,
            };
            cmd_sr(&inputs, &config.resolve(None)?, &out)
        }
        Command::Eval {
            pred,
            gt,
            baseline,
            sem_pred,
            sem_gt,
            mask,
            out,
        } => cmd_eval(
            &EvalInputs {
                pred,
                gt,
                baseline,
                sem_pred,
                sem_gt,
                mask,
            },
            &out,
        ),
        Command::Bench {
            seeds,
            factor,
            config,
            out,
        } => {
            let mut cfg = config.resolve(None)?;
            if let Some(d) = factor {
                cfg.bench.factor = d;
                cfg.validate()?;
            }
            cmd_bench(&cfg, seeds, &out)
        }
    }
}

pub fn cmd_gen(cfg: &RunConfig, out: &Path) -> Result<()> {
    let scene = gen_scene(&cfg.scene)?;
    data::write_scene(out, &scene, cfg.scene.depth_range)
}

pub fn cmd_train(mode: Mode, dirs: &[PathBuf], cfg: &RunConfig, out: &Path) -> Result<()> {
    let scenes = dirs.iter().map(|d| SceneData::load(d)).collect::<Result<Vec<_>>>()?;
    let classes = scenes[0].semantics.num_classes();
    if scenes.iter().any(|s| s.semantics.num_classes() != classes) {
        return Err(Error::Shape("training scenes disagree on the class count".into()));
    }
    let learn = cfg.learn_config(classes)?;
    let side = learn.patch_side;
    let positions = |i: usize, s: &SceneData| {
        sample_positions(
            s.depth.width(),
            s.depth.height(),
            side,
            cfg.patches_per_scene,
            cfg.learn_seed.wrapping_add(i as u64),
        )
    };
    ensure_dir(out)?;
    let trace_path = out.join("trace.csv");
    let mut w = csv::Writer::from_path(&trace_path)?;
    let ops = match mode {
        Mode::Hr => {
            let sets = scenes
                .iter()
                .enumerate()
                .map(|(i, s)| {
                    Ok(HrTrainingSet::from_scene(
                        &s.intensity,
                        &s.depth,
                        &s.semantics,
                        side,
                        &positions(i, s)?,
                    )?)
                })
                .collect::<Result<Vec<_>>>()?;
            let learned = with_pool(|| learn_hr(&HrTrainingSet::concat(&sets)?, &learn))??;
            w.write_record(["iter", "cost", "grad_norm", "step"])?;
            w.write_record(["0".to_string(), learned.initial_cost.to_string(), String::new(), String::new()])?;
            for it in &learned.trace {
                w.write_record([
                    it.iter.to_string(),
                    it.cost.to_string(),
                    it.grad_norm.to_string(),
                    it.step.to_string(),
                ])?;
            }
            learned.operators
        }
        Mode::Lr => {
            let mut sets = Vec::with_capacity(scenes.len());
            for (i, s) in scenes.iter().enumerate() {
                let op = match &s.mask {
                    Some(m) => DownsampleOp::Mask(m.clone()),
                    None => DownsampleOp::GridSubsample { factor: cfg.bench.factor },
                };
                let observed = apply_downsample(&s.depth, &op, Noise::default())?;
                let init = interpolate_observations(&observed)?;
                sets.push(LrTrainingSet::from_scene(
                    &s.intensity,
                    &observed,
                    &init,
                    &s.semantics,
                    side,
                    &positions(i, s)?,
                )?);
            }
            let learned = with_pool(|| learn_lr(&LrTrainingSet::concat(&sets)?, &learn))??;
            w.write_record(["outer", "sparsity", "priors", "data", "total"])?;
            for (i, t) in learned.outer_trace.iter().enumerate() {
                w.write_record([
                    i.to_string(),
                    t.sparsity.to_string(),
                    t.priors.to_string(),
                    t.data.to_string(),
                    t.total().to_string(),
                ])?;
            }
            learned.operators
        }
    };
    w.flush().map_err(|e| Error::io(&trace_path, e))?;
    data::write_operators(out, &ops)
}

pub struct SrInputs {
    pub image: PathBuf,
    pub depth: PathBuf,
    pub mask: PathBuf,
    pub semantics: PathBuf,
    pub ops: PathBuf,
    pub gt: Option<PathBuf>,
}

pub fn cmd_sr(inputs: &SrInputs, cfg: &RunConfig, out: &Path) -> Result<()> {
    let intensity = load_scalar(&inputs.image)?;
    let depth = load_scalar(&inputs.depth)?;
    let (mw, mh, mask) = load_mask(&inputs.mask)?;
    if (mw, mh) != (depth.width(), depth.height()) {
        return Err(Error::Shape("mask grid differs from the depth grid".into()));
    }
    let noisy_semantics = load_semantic(&inputs.semantics)?;
    let operators = load_operators(&inputs.ops)?;
    let gt = inputs.gt.as_deref().map(load_scalar).transpose()?;
    let observed_depth = depth.with_mask(mask.clone())?;
    let problem = SrProblem {
        intensity,
        observed_depth,
        noisy_semantics,
        operators,
        weights: cfg.weights,
        downsample: DownsampleOp::Mask(mask.clone()),
        schedule: cfg.schedule,
        cg: cfg.sr_cg,
    };
    let result = with_pool(|| superresolve_with_gt(&problem, gt.as_ref()))??;
    ensure_dir(out)?;
    write_tensor(&out.join(data::DEPTH), &Tensor::from_scalar_field(&result.depth))?;
    write_tensor(&out.join(data::SEMANTICS), &Tensor::from_semantic_field(&result.semantics))?;
    let observed: Vec<f64> = mask
        .iter()
        .zip(problem.observed_depth.values())
        .filter(|(b, _)| **b)
        .map(|(_, v)| *v)
        .collect();
    let lo = observed.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = observed.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    write_pgm(&out.join(data::DEPTH_PGM), &normalize_for_display(&result.depth, lo, hi), 255)?;
    let trace_path = out.join("trace.csv");
    let mut w = csv::Writer::from_path(&trace_path)?;
    w.write_record([
        "round",
        "eta",
        "lambda",
        "iters",
        "initial_objective",
        "objective",
        "termination",
        "rmse",
    ])?;
    for r in &result.rounds {
        w.write_record([
            r.round.to_string(),
            r.eta.to_string(),
            r.lambda.to_string(),
            r.iterations.to_string(),
            r.initial_objective.to_string(),
            r.objective.to_string(),
            format!("{:?}", r.termination),
            r.rmse.map(|v| v.to_string()).unwrap_or_default(),
        ])?;
    }
    w.flush().map_err(|e| Error::io(&trace_path, e))
}

pub struct EvalInputs {
    pub pred: Vec<PathBuf>,
    pub gt: Vec<PathBuf>,
    pub baseline: Vec<PathBuf>,
    pub sem_pred: Vec<PathBuf>,
    pub sem_gt: Vec<PathBuf>,
    pub mask: Option<PathBuf>,
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn cmd_eval(inputs: &EvalInputs, out: &Path) -> Result<()> {
    let n = inputs.pred.len();
    if inputs.gt.len() != n {
        return Err(Error::Usage("--pred and --gt must be given the same number of times".into()));
    }
    for (flag, len) in [
        ("--baseline", inputs.baseline.len()),
        ("--sem-pred", inputs.sem_pred.len()),
        ("--sem-gt", inputs.sem_gt.len()),
    ] {
        if len != 0 && len != n {
            return Err(Error::Usage(format!("{flag} must be omitted or given once per --pred")));
        }
    }
    if inputs.sem_pred.len() != inputs.sem_gt.len() {
        return Err(Error::Usage("--sem-pred and --sem-gt come in pairs".into()));
    }
    let valid = inputs.mask.as_deref().map(load_mask).transpose()?.map(|(_, _, m)| m);
    let mut reports = Vec::with_capacity(n);
    for i in 0..n {
        let pred = load_scalar(&inputs.pred[i])?;
        let gt = load_scalar(&inputs.gt[i])?;
        let baseline: Option<ScalarField> = inputs.baseline.get(i).map(|p| load_scalar(p)).transpose()?;
        let sem = match (inputs.sem_pred.get(i), inputs.sem_gt.get(i)) {
            (Some(p), Some(g)) => Some((load_semantic(p)?, load_semantic(g)?)),
            _ => None,
        };
        let report = MetricsReport::compute(&pred, &gt, valid.as_deref(), baseline.as_ref(), sem.as_ref().map(|(p, g)| (p, g)))?;
        reports.push(report);
    }
    let mut w = csv::Writer::from_path(out)?;
    w.write_record(["image", "rmse", "per_pixel_acc", "per_class_acc", "relative_improvement"])?;
    for (path, r) in inputs.pred.iter().zip(&reports) {
        w.write_record([
            path.display().to_string(),
            r.rmse.to_string(),
            opt(r.labels.as_ref().map(|l| l.per_pixel)),
            opt(r.labels.as_ref().map(|l| l.per_class)),
            opt(r.relative_improvement),
        ])?;
    }
    let mean = |f: &dyn Fn(&MetricsReport) -> Option<f64>| -> Option<f64> {
        let vals: Vec<f64> = reports.iter().filter_map(f).collect();
        (vals.len() == reports.len()).then(|| vals.iter().sum::<f64>() / vals.len() as f64)
    };
    w.write_record([
        "mean".to_string(),
        opt(mean(&|r| Some(r.rmse))),
        opt(mean(&|r| r.labels.as_ref().map(|l| l.per_pixel))),
        opt(mean(&|r| r.labels.as_ref().map(|l| l.per_class))),
        opt(mean(&|r| r.relative_improvement)),
    ])?;
    w.flush().map_err(|e| Error::io(out, e))
}

/// Sibling path holding the bench summary: `runs.csv` → `runs.summary.csv`.
pub fn summary_path(out: &Path) -> PathBuf {
    let stem = out
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "bench".into());
    out.with_file_name(format!("{stem}.summary.csv"))
}

pub fn cmd_bench(cfg: &RunConfig, seeds: usize, out: &Path) -> Result<()> {
    let report = run_bench(cfg, seeds)?;
    if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        ensure_dir(parent)?;
    }
    write_rows(out, &report.rows)?;
    write_summary(&summary_path(out), &report.summary)?;
    print_summary(&mut std::io::stdout().lock(), &report.summary).map_err(|e| Error::io(out, e))
}
