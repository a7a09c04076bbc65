//! Command-line surface for the structured-sparse similarity toolkit.
//!
//! Exit codes: 0 success, 2 usage errors (including invalid configuration),
//! 3 file and format errors, 4 numeric failures (gradient check above
//! threshold, non-finite values).

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use sparsim::apps::{
    default_attention_temperature, distill_kl, metric_attention, token_alignment_score,
    AlignmentStrategy,
};
use sparsim::error::Error;
use sparsim::eval::{evaluate_retrieval, similarity_histogram, GroundTruth};
use sparsim::gradcheck::{gradcheck, DEFAULT_STEP, PASS_THRESHOLD};
use sparsim::io;
use sparsim::loss::{LossKind, LossSpec};
use sparsim::metric::{FeatureMatrix, MetricConfig, MetricParams, MetricVariant};
use sparsim::synth::{synth_gen, SynthSpec, SynthStructure};
use sparsim::train::{train, InitKind, OptimizerKind, PairedDataset, TrainConfig};

const EXIT_USAGE: u8 = 2;
const EXIT_FORMAT: u8 = 3;
const EXIT_NUMERIC: u8 = 4;

#[derive(Parser)]
#[command(
    name = "sparsim",
    about = "Structured-sparse bilinear similarity metrics: train, evaluate, and apply",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train metric weights on paired feature files
    Train(TrainArgs),
    /// Evaluate retrieval quality of a metric on paired feature files
    Eval(EvalArgs),
    /// Compare analytic gradients against 64-bit finite differences
    Gradcheck(GradcheckArgs),
    /// Generate a synthetic paired dataset from a spec file
    Synth(SynthArgs),
    /// Token-wise alignment score of two token-set files
    Align(AlignArgs),
    /// Attention with the metric spliced into the query-key product
    Attention(AttentionArgs),
    /// Distillation KL between teacher and student similarity matrices
    Distill(DistillArgs),
    /// Export positive/negative similarity histograms
    Stats(StatsArgs),
    /// Print checkpoint summary statistics
    Inspect(InspectArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum MetricArg {
    Cosine,
    Diag,
    Bdiag,
    Dense,
}

#[derive(Clone, Copy, ValueEnum)]
enum LossArg {
    Triplet,
    Infonce,
    Cmpm,
    Poly,
}

impl From<LossArg> for LossKind {
    fn from(v: LossArg) -> LossKind {
        match v {
            LossArg::Triplet => LossKind::TripletHardest,
            LossArg::Infonce => LossKind::InfoNce,
            LossArg::Cmpm => LossKind::Cmpm,
            LossArg::Poly => LossKind::Poly,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum OptimizerArg {
    Sgd,
    Adam,
}

#[derive(Clone, Copy, ValueEnum)]
enum InitArg {
    Identity,
    Random,
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyArg {
    Maxave,
    Maxsum,
    Maxsoft,
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long, value_name = "FILE")]
    features_x: PathBuf,
    #[arg(long, value_name = "FILE")]
    features_y: PathBuf,
    /// Optional key=value config file; explicit flags take precedence
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    metric: Option<MetricArg>,
    /// Block size d (block-diagonal metric only)
    #[arg(long, value_name = "D")]
    block_size: Option<usize>,
    /// Block-count ratio N = D/d, an alternative to --block-size.
    /// Common choices: 1024 for holistic embedding features, 4 for
    /// token-interaction features.
    #[arg(long, value_name = "N", conflicts_with = "block_size")]
    block_ratio: Option<usize>,
    #[arg(long, value_enum)]
    loss: Option<LossArg>,
    /// Hinge margin (triplet, poly)
    #[arg(long)]
    margin: Option<f64>,
    /// Softmax temperature (infonce)
    #[arg(long)]
    temp: Option<f64>,
    #[arg(long)]
    poly_order: Option<u32>,
    #[arg(long)]
    poly_scale: Option<f64>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    batch: Option<usize>,
    #[arg(long)]
    lr: Option<f32>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    optimizer: Option<OptimizerArg>,
    #[arg(long)]
    weight_decay: Option<f32>,
    /// Weight dropout probability in [0, 1)
    #[arg(long)]
    dropout: Option<f32>,
    #[arg(long, value_enum)]
    init: Option<InitArg>,
    /// Std of the random initialization (with --init random)
    #[arg(long)]
    init_std: Option<f64>,
    /// Evaluate on the training pairs every this many epochs (0 = never)
    #[arg(long)]
    eval_every: Option<usize>,
    /// Output checkpoint path
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long, value_name = "FILE")]
    features_x: PathBuf,
    #[arg(long, value_name = "FILE")]
    features_y: PathBuf,
    /// Checkpoint to evaluate; omit for the cosine baseline
    #[arg(long, value_name = "FILE")]
    ckpt: Option<PathBuf>,
    /// Metric when no checkpoint is given (cosine only)
    #[arg(long, value_enum)]
    metric: Option<MetricArg>,
    /// Ground-truth file (line i: relevant gallery indices for query i);
    /// omit for 1:1 diagonal pairing
    #[arg(long, value_name = "FILE")]
    gt: Option<PathBuf>,
    /// Also write the report as a tab-separated table
    #[arg(long, value_name = "FILE")]
    out_report: Option<PathBuf>,
}

#[derive(Args)]
struct GradcheckArgs {
    #[arg(long, value_enum)]
    metric: MetricArg,
    #[arg(long)]
    dim: usize,
    #[arg(long)]
    block_size: Option<usize>,
    #[arg(long, value_enum)]
    loss: LossArg,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = 8)]
    batch: usize,
    #[arg(long, default_value_t = 0x6c0de)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_STEP)]
    step: f64,
}

#[derive(Args)]
struct SynthArgs {
    /// key=value spec: kind {diagreweight|blockmix}, pairs, dim, sigma,
    /// seed, d-true and mix (blockmix), weights (optional explicit list)
    #[arg(long, value_name = "FILE")]
    spec_file: PathBuf,
    #[arg(long, value_name = "FILE")]
    out_x: PathBuf,
    #[arg(long, value_name = "FILE")]
    out_y: PathBuf,
    #[arg(long, value_name = "FILE")]
    out_gt: Option<PathBuf>,
}

#[derive(Args)]
struct AlignArgs {
    #[arg(long, value_name = "FILE")]
    tokens_a: PathBuf,
    #[arg(long, value_name = "FILE")]
    tokens_b: PathBuf,
    #[arg(long, value_enum)]
    strategy: StrategyArg,
    /// Soft-fusion temperature (maxsoft)
    #[arg(long, default_value_t = 0.1)]
    soft_temp: f64,
    /// Metric checkpoint; omit for cosine
    #[arg(long, value_name = "FILE")]
    ckpt: Option<PathBuf>,
}

#[derive(Args)]
struct AttentionArgs {
    #[arg(long, value_name = "FILE")]
    queries: PathBuf,
    #[arg(long, value_name = "FILE")]
    keys: PathBuf,
    #[arg(long, value_name = "FILE")]
    values: PathBuf,
    /// Metric checkpoint; omit for plain scaled dot-product attention
    #[arg(long, value_name = "FILE")]
    ckpt: Option<PathBuf>,
    /// Softmax temperature; defaults to sqrt(D)
    #[arg(long)]
    temperature: Option<f64>,
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
}

#[derive(Args)]
struct DistillArgs {
    #[arg(long, value_name = "FILE")]
    features_x: PathBuf,
    #[arg(long, value_name = "FILE")]
    features_y: PathBuf,
    /// Metric calibrating the teacher's similarity matrix
    #[arg(long, value_name = "FILE")]
    teacher_ckpt: PathBuf,
    /// Student metric; omit for cosine
    #[arg(long, value_name = "FILE")]
    student_ckpt: Option<PathBuf>,
    #[arg(long, default_value_t = 1.0)]
    temp: f64,
    /// Task-specific loss combined 1:1 with the KL term
    #[arg(long, default_value_t = 0.0)]
    task_loss: f64,
}

#[derive(Args)]
struct StatsArgs {
    #[arg(long, value_name = "FILE")]
    features_x: PathBuf,
    #[arg(long, value_name = "FILE")]
    features_y: PathBuf,
    #[arg(long, value_name = "FILE")]
    ckpt: Option<PathBuf>,
    #[arg(long, value_name = "FILE")]
    gt: Option<PathBuf>,
    #[arg(long, default_value_t = 50)]
    bins: usize,
    #[arg(long, value_name = "FILE")]
    out_pos: PathBuf,
    #[arg(long, value_name = "FILE")]
    out_neg: PathBuf,
}

#[derive(Args)]
struct InspectArgs {
    #[arg(long, value_name = "FILE")]
    ckpt: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            let mut source = std::error::Error::source(&err);
            while let Some(inner) = source {
                eprintln!("  caused by: {inner}");
                source = inner.source();
            }
            ExitCode::from(exit_class(&err))
        }
    }
}

fn exit_class(err: &Error) -> u8 {
    match err {
        Error::Format { .. } | Error::Io { .. } => EXIT_FORMAT,
        Error::NonFinite(_) => EXIT_NUMERIC,
        _ => EXIT_USAGE,
    }
}

fn run(command: Command) -> Result<ExitCode, Error> {
    match command {
        Command::Train(args) => cmd_train(args),
        Command::Eval(args) => cmd_eval(args),
        Command::Gradcheck(args) => cmd_gradcheck(args),
        Command::Synth(args) => cmd_synth(args),
        Command::Align(args) => cmd_align(args),
        Command::Attention(args) => cmd_attention(args),
        Command::Distill(args) => cmd_distill(args),
        Command::Stats(args) => cmd_stats(args),
        Command::Inspect(args) => cmd_inspect(args),
    }
}

fn load_normalized(path: &Path, what: &str) -> Result<FeatureMatrix<f32>, Error> {
    let (features, _) = io::read_features(path)?;
    if !features.normalized() {
        return Err(Error::Config(format!(
            "{what} {} must contain L2-normalized rows",
            path.display()
        )));
    }
    Ok(features)
}

fn metric_config(
    metric: MetricArg,
    dim: usize,
    block_size: Option<usize>,
    block_ratio: Option<usize>,
) -> Result<MetricConfig, Error> {
    let block = match (block_size, block_ratio) {
        (Some(d), _) => Some(d),
        (None, Some(n)) => {
            if n == 0 || !dim.is_multiple_of(n) {
                return Err(Error::Config(format!(
                    "block ratio {n} must divide dim {dim}"
                )));
            }
            Some(dim / n)
        }
        (None, None) => None,
    };
    match metric {
        MetricArg::Cosine => MetricConfig::cosine(dim),
        MetricArg::Diag => MetricConfig::diag(dim),
        MetricArg::Dense => MetricConfig::dense(dim),
        MetricArg::Bdiag => {
            let d = block.ok_or_else(|| {
                Error::Config("bdiag metric requires --block-size or --block-ratio".into())
            })?;
            MetricConfig::block_diag(dim, d)
        }
    }
}

/// Fill unset flags from a key=value config file (flags win).
fn merge_train_config(args: &mut TrainArgs) -> Result<(), Error> {
    let Some(path) = &args.config else {
        return Ok(());
    };
    let kv = io::read_kv_config(path)?;
    let lookup = |key: &str| kv.iter().find(|(k, _)| k == key).map(|(_, v)| v.clone());
    let parse_err =
        |key: &str, v: &str| Error::Config(format!("config key {key} has invalid value {v:?}"));
    macro_rules! fill {
        ($field:expr, $key:literal, $ty:ty) => {
            if $field.is_none() {
                if let Some(v) = lookup($key) {
                    $field = Some(v.parse::<$ty>().map_err(|_| parse_err($key, &v))?);
                }
            }
        };
    }
    if args.metric.is_none() {
        if let Some(v) = lookup("metric") {
            args.metric = Some(MetricArg::from_str(&v, true).map_err(|_| parse_err("metric", &v))?);
        }
    }
    if args.loss.is_none() {
        if let Some(v) = lookup("loss") {
            args.loss = Some(LossArg::from_str(&v, true).map_err(|_| parse_err("loss", &v))?);
        }
    }
    if args.optimizer.is_none() {
        if let Some(v) = lookup("optimizer") {
            args.optimizer =
                Some(OptimizerArg::from_str(&v, true).map_err(|_| parse_err("optimizer", &v))?);
        }
    }
    if args.init.is_none() {
        if let Some(v) = lookup("init") {
            args.init = Some(InitArg::from_str(&v, true).map_err(|_| parse_err("init", &v))?);
        }
    }
    fill!(args.block_size, "block-size", usize);
    fill!(args.block_ratio, "block-ratio", usize);
    fill!(args.margin, "margin", f64);
    fill!(args.temp, "temp", f64);
    fill!(args.poly_order, "poly-order", u32);
    fill!(args.poly_scale, "poly-scale", f64);
    fill!(args.epochs, "epochs", usize);
    fill!(args.batch, "batch", usize);
    fill!(args.lr, "lr", f32);
    fill!(args.seed, "seed", u64);
    fill!(args.weight_decay, "weight-decay", f32);
    fill!(args.dropout, "dropout", f32);
    fill!(args.init_std, "init-std", f64);
    fill!(args.eval_every, "eval-every", usize);
    Ok(())
}

fn cmd_train(mut args: TrainArgs) -> Result<ExitCode, Error> {
    merge_train_config(&mut args)?;

    let x = load_normalized(&args.features_x, "features")?;
    let y = load_normalized(&args.features_y, "features")?;
    let dataset = PairedDataset::new(x, y)?;
    let dim = dataset.x.dim();

    let metric = metric_config(
        args.metric.unwrap_or(MetricArg::Bdiag),
        dim,
        args.block_size,
        args.block_ratio,
    )?;

    let mut loss = LossSpec::new(
        args.loss
            .map(LossKind::from)
            .unwrap_or(LossKind::TripletHardest),
    );
    if let Some(m) = args.margin {
        loss = loss.with_margin(m)?;
    }
    if let Some(t) = args.temp {
        loss = loss.with_temperature(t)?;
    }
    if args.poly_order.is_some() || args.poly_scale.is_some() {
        loss = loss.with_poly(
            args.poly_order.unwrap_or(loss.poly_order),
            args.poly_scale.unwrap_or(loss.poly_scale),
        )?;
    }

    let mut cfg = TrainConfig::new(loss);
    if let Some(e) = args.epochs {
        cfg.epochs = e;
    }
    if let Some(b) = args.batch {
        cfg.batch_size = b;
    }
    if let Some(lr) = args.lr {
        cfg.learning_rate = lr;
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(o) = args.optimizer {
        cfg.optimizer = match o {
            OptimizerArg::Sgd => OptimizerKind::Sgd,
            OptimizerArg::Adam => OptimizerKind::AdaptiveMoment,
        };
    }
    if let Some(wd) = args.weight_decay {
        cfg.weight_decay = wd;
    }
    if let Some(p) = args.dropout {
        cfg.weight_dropout = p;
    }
    if let Some(init) = args.init {
        cfg.init = match init {
            InitArg::Identity => InitKind::Identity,
            InitArg::Random => InitKind::RandomNormal {
                std: args.init_std.unwrap_or(0.1),
            },
        };
    }
    if let Some(k) = args.eval_every {
        cfg.eval_every = k;
    }

    let gt = GroundTruth::diagonal(dataset.len());
    let outcome = train(&dataset, metric, &cfg, Some((&dataset, &gt)))?;
    for (epoch, value) in outcome.loss_history.iter().enumerate() {
        println!("epoch={} loss={}", epoch + 1, value);
    }
    for (epoch, report) in &outcome.reports {
        println!("eval at epoch {epoch}:");
        print!("{}", io::format_report_lines(report));
    }
    io::save_checkpoint(&args.out, &outcome.params)?;
    println!("checkpoint written to {}", args.out.display());
    Ok(ExitCode::SUCCESS)
}

fn cmd_eval(args: EvalArgs) -> Result<ExitCode, Error> {
    let x = load_normalized(&args.features_x, "features")?;
    let y = load_normalized(&args.features_y, "features")?;
    let params = match (&args.ckpt, args.metric) {
        (Some(path), _) => io::load_checkpoint(path)?,
        (None, Some(MetricArg::Cosine)) | (None, None) => {
            MetricParams::identity(MetricConfig::cosine(x.dim())?)
        }
        (None, Some(_)) => {
            return Err(Error::Config(
                "metrics with weights need --ckpt; only cosine works without".into(),
            ))
        }
    };
    let gt = match &args.gt {
        Some(path) => io::read_ground_truth(path, y.rows())?,
        None => {
            if x.rows() != y.rows() {
                return Err(Error::Config(
                    "1:1 diagonal ground truth needs equal query and gallery counts".into(),
                ));
            }
            GroundTruth::diagonal(x.rows())
        }
    };
    let scores = params.score_matrix(&x, &y)?;
    let report = evaluate_retrieval(&scores, &gt)?;
    print!("{}", io::format_report_lines(&report));
    if let Some(path) = &args.out_report {
        io::write_report_table(path, &report)?;
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_gradcheck(args: GradcheckArgs) -> Result<ExitCode, Error> {
    let config = metric_config(args.metric, args.dim, args.block_size, None)?;
    if config.param_count() == 0 {
        return Err(Error::Config(
            "cosine has no parameters to gradient-check".into(),
        ));
    }
    let spec = LossSpec::new(LossKind::from(args.loss));
    let report = gradcheck(config, &spec, args.batch, args.trials, args.seed, args.step)?;
    println!("trials={}", report.trials);
    println!("max_rel_err={}", report.max_rel_err);
    if report.passed() {
        println!("gradcheck PASS (threshold {PASS_THRESHOLD})");
        Ok(ExitCode::SUCCESS)
    } else {
        println!("gradcheck FAIL (threshold {PASS_THRESHOLD})");
        Ok(ExitCode::from(EXIT_NUMERIC))
    }
}

fn parse_synth_spec(path: &Path) -> Result<SynthSpec, Error> {
    let kv = io::read_kv_config(path)?;
    let lookup = |key: &str| kv.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str());
    let required = |key: &str| {
        lookup(key).ok_or_else(|| Error::Config(format!("synth spec missing key {key}")))
    };
    let parse_f64 = |key: &str, v: &str| {
        v.parse::<f64>()
            .map_err(|_| Error::Config(format!("synth spec key {key} has invalid value {v:?}")))
    };
    let parse_usize = |key: &str, v: &str| {
        v.parse::<usize>()
            .map_err(|_| Error::Config(format!("synth spec key {key} has invalid value {v:?}")))
    };

    let pairs = parse_usize("pairs", required("pairs")?)?;
    let dim = parse_usize("dim", required("dim")?)?;
    let noise_std = parse_f64("sigma", required("sigma")?)?;
    let seed = required("seed")?
        .parse::<u64>()
        .map_err(|_| Error::Config("synth spec key seed has invalid value".into()))?;

    let kind = required("kind")?;
    let structure = match kind {
        "diagreweight" => match lookup("weights") {
            Some(list) => {
                let weights = list
                    .split(',')
                    .map(|tok| parse_f64("weights", tok.trim()))
                    .collect::<Result<Vec<f64>, Error>>()?;
                SynthStructure::DiagReweight { weights }
            }
            None => SynthStructure::SeededDiagReweight,
        },
        "blockmix" => {
            let d_true = parse_usize("d-true", required("d-true")?)?;
            let mix = match lookup("mix") {
                Some(v) => parse_f64("mix", v)?,
                None => 3.0,
            };
            SynthStructure::SeededBlockMix {
                block_size: d_true,
                mix,
            }
        }
        other => {
            return Err(Error::Config(format!(
                "synth spec kind must be diagreweight or blockmix, got {other:?}"
            )))
        }
    };
    Ok(SynthSpec {
        pairs,
        dim,
        structure,
        noise_std,
        seed,
    })
}

fn cmd_synth(args: SynthArgs) -> Result<ExitCode, Error> {
    let spec = parse_synth_spec(&args.spec_file)?;
    let (x, y, gt) = synth_gen(&spec)?;
    io::write_features(&args.out_x, &x, None)?;
    io::write_features(&args.out_y, &y, None)?;
    if let Some(path) = &args.out_gt {
        io::write_ground_truth(path, &gt)?;
    }
    println!(
        "wrote {} pairs of dim {} to {} and {}",
        spec.pairs,
        spec.dim,
        args.out_x.display(),
        args.out_y.display()
    );
    Ok(ExitCode::SUCCESS)
}

fn params_or_cosine(ckpt: &Option<PathBuf>, dim: usize) -> Result<MetricParams<f32>, Error> {
    match ckpt {
        Some(path) => io::load_checkpoint(path),
        None => Ok(MetricParams::identity(MetricConfig::cosine(dim)?)),
    }
}

fn cmd_align(args: AlignArgs) -> Result<ExitCode, Error> {
    let a = load_normalized(&args.tokens_a, "token set")?;
    let b = load_normalized(&args.tokens_b, "token set")?;
    let params = params_or_cosine(&args.ckpt, a.dim())?;
    let strategy = match args.strategy {
        StrategyArg::Maxave => AlignmentStrategy::MaxAve,
        StrategyArg::Maxsum => AlignmentStrategy::MaxSum,
        StrategyArg::Maxsoft => AlignmentStrategy::max_soft(args.soft_temp)?,
    };
    let score = token_alignment_score(&a, &b, &params, strategy)?;
    println!("score={score}");
    Ok(ExitCode::SUCCESS)
}

fn cmd_attention(args: AttentionArgs) -> Result<ExitCode, Error> {
    let q = load_normalized(&args.queries, "token set")?;
    let k = load_normalized(&args.keys, "token set")?;
    let (v, _) = io::read_features(&args.values)?;
    let params = params_or_cosine(&args.ckpt, q.dim())?;
    let temperature = args
        .temperature
        .map(|t| t as f32)
        .unwrap_or_else(|| default_attention_temperature(q.dim()));
    if temperature <= 0.0 {
        return Err(Error::Config(format!(
            "attention temperature must be > 0, got {temperature}"
        )));
    }
    let out = metric_attention(&q, &k, &v, &params, temperature)?;
    io::write_features(&args.out, &out, None)?;
    println!(
        "wrote {}x{} attention output to {}",
        out.rows(),
        out.dim(),
        args.out.display()
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_distill(args: DistillArgs) -> Result<ExitCode, Error> {
    let x = load_normalized(&args.features_x, "features")?;
    let y = load_normalized(&args.features_y, "features")?;
    let teacher_params = io::load_checkpoint(&args.teacher_ckpt)?;
    let student_params = params_or_cosine(&args.student_ckpt, x.dim())?;
    if args.temp <= 0.0 {
        return Err(Error::Config(format!(
            "distillation temperature must be > 0, got {}",
            args.temp
        )));
    }
    let teacher = teacher_params.score_matrix(&x, &y)?;
    let student = student_params.score_matrix(&x, &y)?;
    let kl = distill_kl(&teacher, &student, args.temp as f32)?;
    println!("kl={kl}");
    println!("total={}", args.task_loss + kl as f64);
    Ok(ExitCode::SUCCESS)
}

fn cmd_stats(args: StatsArgs) -> Result<ExitCode, Error> {
    let x = load_normalized(&args.features_x, "features")?;
    let y = load_normalized(&args.features_y, "features")?;
    let params = params_or_cosine(&args.ckpt, x.dim())?;
    let gt = match &args.gt {
        Some(path) => io::read_ground_truth(path, y.rows())?,
        None => {
            if x.rows() != y.rows() {
                return Err(Error::Config(
                    "1:1 diagonal ground truth needs equal query and gallery counts".into(),
                ));
            }
            GroundTruth::diagonal(x.rows())
        }
    };
    let scores = params.score_matrix(&x, &y)?;
    let hist = similarity_histogram(&scores, &gt, args.bins)?;
    io::write_histogram(&args.out_pos, &args.out_neg, &hist)?;
    println!(
        "histogram over [{}, {}] in {} bins written to {} and {}",
        hist.lo,
        hist.hi,
        args.bins,
        args.out_pos.display(),
        args.out_neg.display()
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_inspect(args: InspectArgs) -> Result<ExitCode, Error> {
    let params = io::load_checkpoint(&args.ckpt)?;
    let config = params.config();
    println!("variant={}", config.variant());
    println!("dim={}", config.dim());
    println!("block_size={}", config.block_size().map_or(0, |d| d));
    println!("block_count={}", config.block_count().map_or(0, |n| n));
    println!("param_count={}", config.param_count());
    if config.variant() != MetricVariant::Cosine && !params.weights().is_empty() {
        let weights = params.weights();
        let min = weights.iter().cloned().fold(f32::INFINITY, f32::min);
        let max = weights.iter().cloned().fold(f32::NEG_INFINITY, f32::max);
        let mean = weights.iter().sum::<f32>() / weights.len() as f32;
        println!("w_min={min}");
        println!("w_max={max}");
        println!("w_mean={mean}");
    }
    println!("diag_mass={}", params.diagonal_mass_fraction());
    Ok(ExitCode::SUCCESS)
}
