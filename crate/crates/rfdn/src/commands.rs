use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;

use clap::{ArgGroup, Args};
use rfdn_core::arch::{build_variant, BlockVariant, ModelConfig, Rfdn, WeightStore};
use rfdn_core::autograd::{train_loop, LrSchedule, TrainConfig, TrainEvent};
use rfdn_core::data::{bicubic_upscale, degrade, quantize, AugmentMode, ImagePair};
use rfdn_core::metrics::{evaluate, EvalResult};
use rfdn_core::Tensor;

use crate::error::{CliError, Result};
use crate::io::{list_images, load_image, save_image, stem};
use crate::runconfig::RunConfig;
use crate::weightfile::{load_weights, save_weights};

/// Environment variable capping the number of evaluation workers.
pub const THREADS_ENV: &str = "RFDN_THREADS";

fn report_err(source: std::io::Error) -> CliError {
    CliError::Io { path: PathBuf::from("<output>"), source }
}

macro_rules! say {
    ($out:expr, $($arg:tt)*) => {
        writeln!($out, $($arg)*).map_err(report_err)?
    };
}

#[derive(Args, Clone, Debug)]
pub struct ModelArgs {
    /// Feature channels (52 gives the large model).
    #[arg(long, default_value_t = 48)]
    pub channels: usize,
    /// Number of distillation blocks.
    #[arg(long, default_value_t = 6)]
    pub blocks: usize,
    /// Distillation rate.
    #[arg(long, default_value_t = 0.5)]
    pub rate: f64,
}

impl Default for ModelArgs {
    fn default() -> Self {
        Self { channels: 48, blocks: 6, rate: 0.5 }
    }
}

impl ModelArgs {
    fn model(&self, variant: BlockVariant, scale: usize) -> Result<Rfdn> {
        Ok(build_variant(variant, ModelConfig::new(scale, self.channels, self.blocks, self.rate)?)?)
    }
}

#[derive(Args, Clone, Debug)]
pub struct DegradeArgs {
    #[arg(long)]
    pub hr_dir: PathBuf,
    #[arg(long)]
    pub scale: usize,
    #[arg(long)]
    pub out_dir: PathBuf,
}

/// Writes `{stem}x{scale}.png` for every HR image; on failure nothing from this run is left behind.
pub fn cmd_degrade(args: &DegradeArgs, out: &mut dyn Write) -> Result<Vec<PathBuf>> {
    let inputs = list_images(&args.hr_dir)?;
    fs::create_dir_all(&args.out_dir).map_err(CliError::io(&args.out_dir))?;
    let mut written = Vec::new();
    let result = (|| -> Result<()> {
        for path in &inputs {
            let hr = load_image(path)?;
            let pair = degrade(&stem(path), &hr, args.scale)?;
            let dest = args.out_dir.join(format!("{}x{}.png", stem(path), args.scale));
            save_image(&dest, &quantize(&pair.lr))?;
            written.push(dest.clone());
            let (h, l) = (hr.shape(), pair.lr.shape());
            say!(out, "{} {}x{} -> {}x{}", stem(path), h.w, h.h, l.w, l.h);
        }
        Ok(())
    })();
    if let Err(e) = result {
        for path in &written {
            let _ = fs::remove_file(path);
        }
        return Err(e);
    }
    Ok(written)
}

/// Keys accepted in a training run file.
pub const TRAIN_KEYS: &[&str] = &[
    "hr-dir",
    "scale",
    "channels",
    "blocks",
    "rate",
    "steps",
    "seed",
    "resume",
    "out",
    "batch",
    "patch",
    "lr",
    "half-life",
    "checkpoint-every",
    "augment",
];

#[derive(Args, Clone, Debug, Default)]
pub struct TrainArgs {
    /// Run file of `key = value` lines; flags given here override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub hr_dir: Option<PathBuf>,
    /// Upscaling factor [default: 2]
    #[arg(long)]
    pub scale: Option<usize>,
    /// [default: 48]
    #[arg(long)]
    pub channels: Option<usize>,
    /// [default: 6]
    #[arg(long)]
    pub blocks: Option<usize>,
    /// [default: 0.5]
    #[arg(long)]
    pub rate: Option<f64>,
    /// Minibatch updates [default: 1000000]
    #[arg(long)]
    pub steps: Option<u64>,
    /// [default: 0]
    #[arg(long)]
    pub seed: Option<u64>,
    /// Weight file to warm-start from; tensors whose shapes differ are re-initialized.
    #[arg(long)]
    pub resume: Option<PathBuf>,
    /// Output directory for weights, checkpoints and the loss log.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// [default: 64]
    #[arg(long)]
    pub batch: Option<usize>,
    /// Low-resolution patch side [default: 64]
    #[arg(long)]
    pub patch: Option<usize>,
    /// Initial learning rate [default: 5e-4]
    #[arg(long)]
    pub lr: Option<f64>,
    /// Steps between learning-rate halvings [default: 200000]
    #[arg(long)]
    pub half_life: Option<u64>,
    /// Steps between checkpoints, 0 disables [default: 10000]
    #[arg(long)]
    pub checkpoint_every: Option<u64>,
    /// flip-rot90 or dihedral [default: flip-rot90]
    #[arg(long)]
    pub augment: Option<String>,
}

/// Fully resolved training settings.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainPlan {
    pub hr_dir: PathBuf,
    pub out: PathBuf,
    pub resume: Option<PathBuf>,
    pub config: ModelConfig,
    pub train: TrainConfig,
}

fn parse_augment(s: &str) -> Result<AugmentMode> {
    match s {
        "flip-rot90" => Ok(AugmentMode::FlipRot90),
        "dihedral" => Ok(AugmentMode::Dihedral),
        other => Err(CliError::Usage(format!("augment must be flip-rot90 or dihedral, got `{other}`"))),
    }
}

impl TrainArgs {
    pub fn resolve(&self) -> Result<TrainPlan> {
        let file = match &self.config {
            Some(path) => RunConfig::load(path, TRAIN_KEYS)?,
            None => RunConfig::default(),
        };
        let required = |flag: &Option<PathBuf>, key: &str| -> Result<PathBuf> {
            match flag.clone().map(Some).unwrap_or(file.get::<PathBuf>(key)?) {
                Some(p) => Ok(p),
                None => Err(CliError::Usage(format!("--{key} is required"))),
            }
        };
        let defaults = TrainConfig { checkpoint_every: 10_000, ..TrainConfig::default() };
        let schedule = LrSchedule {
            initial: file.pick(self.lr, "lr", defaults.schedule.initial)?,
            half_life: file.pick(self.half_life, "half-life", defaults.schedule.half_life)?,
        };
        let augment = file.pick(self.augment.clone(), "augment", "flip-rot90".to_string())?;
        let config = ModelConfig::new(
            file.pick(self.scale, "scale", 2)?,
            file.pick(self.channels, "channels", 48)?,
            file.pick(self.blocks, "blocks", 6)?,
            file.pick(self.rate, "rate", 0.5)?,
        )?;
        Ok(TrainPlan {
            hr_dir: required(&self.hr_dir, "hr-dir")?,
            out: required(&self.out, "out")?,
            resume: self.resume.clone().map(Some).unwrap_or(file.get("resume")?),
            config,
            train: TrainConfig {
                batch: file.pick(self.batch, "batch", defaults.batch)?,
                patch: file.pick(self.patch, "patch", defaults.patch)?,
                steps: file.pick(self.steps, "steps", defaults.steps)?,
                seed: file.pick(self.seed, "seed", defaults.seed)?,
                schedule,
                checkpoint_every: file.pick(self.checkpoint_every, "checkpoint-every", defaults.checkpoint_every)?,
                augment: parse_augment(&augment)?,
            },
        })
    }
}

/// Loads every HR image of `dir` and pairs it with its quantized bicubic downscale.
pub fn load_pairs(dir: &Path, scale: usize) -> Result<Vec<ImagePair>> {
    list_images(dir)?
        .iter()
        .map(|path| {
            let mut pair = degrade(&stem(path), &load_image(path)?, scale)?;
            pair.lr = quantize(&pair.lr);
            Ok(pair)
        })
        .collect()
}

pub fn checkpoint_path(dir: &Path, step: u64) -> PathBuf {
    dir.join(format!("checkpoint-{step}.rfdw"))
}

/// Trains and writes `weights.rfdw`, periodic `checkpoint-{step}.rfdw` files and
/// `loss.log` (`step lr loss` per line) into the output directory.
pub fn cmd_train(args: &TrainArgs, out: &mut dyn Write) -> Result<PathBuf> {
    let plan = args.resolve()?;
    let model = build_variant(BlockVariant::Rfdb, plan.config)?;
    let pairs = load_pairs(&plan.hr_dir, plan.config.scale)?;
    let init = match &plan.resume {
        Some(path) => {
            let (store, fresh) = model.warm_start(&load_weights(path)?, plan.train.seed);
            if !fresh.is_empty() {
                log::info!("re-initialized {} tensors: {}", fresh.len(), fresh.join(", "));
            }
            store
        }
        None => model.init_weights(plan.train.seed),
    };
    fs::create_dir_all(&plan.out).map_err(CliError::io(&plan.out))?;
    let log_path = plan.out.join("loss.log");
    let mut log_file = BufWriter::new(File::create(&log_path).map_err(CliError::io(&log_path))?);
    let mut failure: Option<CliError> = None;
    let outcome = train_loop(&model, init, &pairs, &plan.train, |event| {
        if failure.is_some() {
            return;
        }
        let result = match event {
            TrainEvent::Step { step, lr, loss } => {
                if step % 100 == 0 {
                    log::info!("step {step} lr {lr} loss {loss}");
                }
                writeln!(log_file, "{step} {lr} {loss}").map_err(CliError::io(&log_path))
            }
            TrainEvent::Checkpoint { step, weights } => save_weights(&checkpoint_path(&plan.out, step), weights),
        };
        failure = result.err();
    })?;
    if let Some(e) = failure {
        return Err(e);
    }
    log_file.flush().map_err(CliError::io(&log_path))?;
    let dest = plan.out.join("weights.rfdw");
    save_weights(&dest, &outcome.weights)?;
    say!(out, "trained {} steps, wrote {}", outcome.losses.len(), dest.display());
    Ok(dest)
}

#[derive(Args, Clone, Debug)]
pub struct SrArgs {
    #[arg(long)]
    pub weights: PathBuf,
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub scale: usize,
    #[command(flatten)]
    pub model: ModelArgs,
}

/// Loads a weight file and verifies it against the model shape.
pub fn load_model(path: &Path, model: &ModelArgs, scale: usize) -> Result<(Rfdn, WeightStore<f32>)> {
    let net = model.model(BlockVariant::Rfdb, scale)?;
    let weights = load_weights(path)?;
    net.check_weights(&weights)?;
    Ok((net, weights))
}

pub fn cmd_sr(args: &SrArgs, out: &mut dyn Write) -> Result<()> {
    let (net, weights) = load_model(&args.weights, &args.model, args.scale)?;
    let img = load_image(&args.input)?;
    let sr = net.super_resolve(&weights, &img)?;
    save_image(&args.out, &sr)?;
    let (a, b) = (img.shape(), sr.shape());
    say!(out, "{}x{} -> {}x{}", a.w, a.h, b.w, b.h);
    Ok(())
}

#[derive(Args, Clone, Debug)]
#[command(group(ArgGroup::new("method").required(true).args(["weights", "bicubic"])))]
pub struct EvalArgs {
    #[arg(long)]
    pub weights: Option<PathBuf>,
    /// Score plain bicubic upscaling instead of a network.
    #[arg(long)]
    pub bicubic: bool,
    #[arg(long)]
    pub hr_dir: PathBuf,
    #[arg(long)]
    pub scale: usize,
    /// Border pixels ignored on each side [default: scale]
    #[arg(long)]
    pub shave: Option<usize>,
    #[command(flatten)]
    pub model: ModelArgs,
}

/// How low-resolution inputs are brought back to full size.
pub enum Upscaler<'a> {
    Bicubic,
    Network(&'a Rfdn, &'a WeightStore<f32>),
}

impl Upscaler<'_> {
    pub fn upscale(&self, lr: &Tensor<f32>, scale: usize) -> Result<Tensor<f32>> {
        Ok(match self {
            Upscaler::Bicubic => bicubic_upscale(lr, scale)?,
            Upscaler::Network(net, weights) => net.super_resolve(weights, lr)?,
        })
    }
}

/// Degrades `hr`, stores LR and SR as 8-bit images would be, and scores SR against HR.
pub fn eval_image(hr: &Tensor<f32>, scale: usize, shave: usize, upscaler: &Upscaler<'_>) -> Result<EvalResult> {
    let pair = degrade("eval", hr, scale)?;
    let sr = quantize(&upscaler.upscale(&quantize(&pair.lr), scale)?);
    Ok(evaluate(&sr, &pair.hr, shave)?)
}

/// Worker count: `RFDN_THREADS` if set, otherwise the available parallelism.
pub fn worker_count() -> Result<usize> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(n),
            _ => Err(CliError::Usage(format!("{THREADS_ENV} must be a positive integer, got `{v}`"))),
        },
        Err(_) => Ok(thread::available_parallelism().map_or(1, |n| n.get())),
    }
}

/// Per-image scores in name order.
#[derive(Clone, Debug, PartialEq)]
pub struct EvalReport {
    pub images: Vec<(String, EvalResult)>,
}

impl EvalReport {
    pub fn mean(&self) -> (f64, f64) {
        let n = self.images.len().max(1) as f64;
        let psnr = self.images.iter().map(|(_, r)| r.psnr_db).sum::<f64>() / n;
        let ssim = self.images.iter().map(|(_, r)| r.ssim).sum::<f64>() / n;
        (psnr, ssim)
    }
}

pub fn cmd_eval(args: &EvalArgs, out: &mut dyn Write) -> Result<EvalReport> {
    let shave = args.shave.unwrap_or(args.scale);
    let loaded = match &args.weights {
        Some(path) if !args.bicubic => Some(load_model(path, &args.model, args.scale)?),
        _ => None,
    };
    let upscaler = match &loaded {
        Some((net, weights)) => Upscaler::Network(net, weights),
        None => Upscaler::Bicubic,
    };
    let paths = list_images(&args.hr_dir)?;
    let workers = worker_count()?.min(paths.len());
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<Result<EvalResult>>>> = Mutex::new((0..paths.len()).map(|_| None).collect());
    thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(path) = paths.get(i) else { break };
                let r = load_image(path).and_then(|hr| eval_image(&hr, args.scale, shave, &upscaler));
                results.lock().expect("worker panicked")[i] = Some(r);
            });
        }
    });
    let mut images = Vec::with_capacity(paths.len());
    for (path, r) in paths.iter().zip(results.into_inner().expect("worker panicked")) {
        images.push((stem(path), r.expect("every index is claimed")?));
    }
    images.sort_by(|a, b| a.0.cmp(&b.0));
    let report = EvalReport { images };
    for (name, r) in &report.images {
        say!(out, "{name} {:.4} {:.4}", r.psnr_db, r.ssim);
    }
    let (psnr, ssim) = report.mean();
    say!(out, "mean {psnr:.4} {ssim:.4}");
    Ok(report)
}

fn parse_size(s: &str) -> Result<(usize, usize), String> {
    let (w, h) = s.split_once(['x', 'X']).ok_or_else(|| format!("expected WxH, got `{s}`"))?;
    let num = |v: &str| v.trim().parse::<usize>().map_err(|_| format!("expected WxH, got `{s}`"));
    Ok((num(w)?, num(h)?))
}

fn parse_variant(s: &str) -> Result<BlockVariant, String> {
    BlockVariant::from_name(s).ok_or_else(|| {
        let names: Vec<&str> = BlockVariant::ALL.iter().map(|v| v.name()).collect();
        format!("unknown variant `{s}`, expected one of {}", names.join(", "))
    })
}

#[derive(Args, Clone, Debug)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, default_value_t = 4)]
    pub scale: usize,
    /// Block type: base, srb, fdc, rfdb or imdb.
    #[arg(long, default_value = "rfdb", value_parser = parse_variant)]
    pub variant: BlockVariant,
    /// Output resolution used for the Mult-Adds count.
    #[arg(long, default_value = "1280x720", value_parser = parse_size)]
    pub hr_size: (usize, usize),
}

/// Parameter and Mult-Adds counts from layer shapes alone.
pub fn cmd_analyze(args: &AnalyzeArgs, out: &mut dyn Write) -> Result<(usize, u64)> {
    let net = args.model.model(args.variant, args.scale)?;
    let (w, h) = args.hr_size;
    let params = net.count_params();
    let mult_adds = net.count_mult_adds(h, w);
    say!(out, "variant {}", args.variant.name());
    say!(out, "params {params}");
    say!(out, "mult-adds {mult_adds} ({:.2} G at {w}x{h})", mult_adds as f64 / 1e9);
    Ok((params, mult_adds))
}
