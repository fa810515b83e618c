//! Command-line front end.
//!
//! Every subcommand that takes `--out` writes a `config.json` echo holding the
//! fully resolved command; `rotiq replay <config.json>` runs it again.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::analysis::{
    estimate_loss_moments, formula_csv, gradient_variance_scan, scan_input, trainable_frame,
    variance_formula_report, AssignmentRule, BPScanConfig, InputRule,
};
use crate::data::{generate_class_image, generate_dataset, image_rng, load_dataset, SyntheticSpec};
use crate::encoding::{build_sampling, reconstruct_image, sample, ImageGrid};
use crate::error::{Error, Result};
use crate::model::{Architecture, GradMethod, InputEncoding, Model, ModelConfig};
use crate::pauli::text::format_operators;
use crate::pauli::{
    dla_generators, lie_closure, predicted_moments, verify_dla, verify_dla_with_cap,
    MAX_VERIFY_NRAD,
};
use crate::trainer::{aggregate_csv, evaluate, train_repeats, Checkpoint, TrainConfig};

pub const RUN_FORMAT_VERSION: u32 = 1;
pub const SEED_ENV: &str = "ROTIQ_SEED";

#[derive(Parser, Debug)]
#[command(name = "rotiq", version, about = "Rotationally equivariant quantum classifiers")]
#[command(arg_required_else_help = true)]
pub struct Cli {
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Synthetic datasets.
    #[command(subcommand)]
    Dataset(DatasetCmd),
    /// Writes the polygon samples of one image and its reconstruction.
    EncodePreview(PreviewArgs),
    /// Trains a model with ADAM.
    Train(TrainArgs),
    /// Validation accuracy of a checkpoint.
    Eval(EvalArgs),
    /// Gradient-variance scan over qubit counts.
    BpScan(ScanArgs),
    /// Monte-Carlo loss moments against the closed forms.
    Moments(MomentsArgs),
    /// Dynamical Lie algebra tools.
    #[command(subcommand)]
    Dla(DlaCmd),
    /// Reruns the command recorded in a config.json echo.
    #[serde(skip)]
    Replay(ReplayArgs),
}

#[derive(Subcommand, Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DatasetCmd {
    Gen(DatasetArgs),
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct DatasetArgs {
    #[arg(long, default_value_t = 4)]
    pub classes: usize,
    /// Square image side in pixels.
    #[arg(long, default_value_t = 32)]
    pub size: usize,
    #[arg(long, default_value_t = 0.05)]
    pub noise: f64,
    /// Images per class, both splits together.
    #[arg(long, default_value_t = 160)]
    pub count: usize,
    /// Validation images per class.
    #[arg(long, default_value_t = 32)]
    pub val: usize,
    #[arg(long, default_value_t = 0.1)]
    pub ring_width: f64,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct PreviewArgs {
    /// Dataset directory; without it a fresh synthetic image is rendered.
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub index: usize,
    #[arg(long, default_value_t = 1)]
    pub class: usize,
    #[arg(long, default_value_t = 0.0)]
    pub angle: f64,
    #[arg(long, default_value_t = 4)]
    pub nrad: usize,
    #[arg(long, default_value_t = 3)]
    pub norb: usize,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ArchArg {
    Equivariant,
    Generic,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EncodingArg {
    Polygon,
    Flattened,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GradArg {
    Shift,
    Adjoint,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct ModelArgs {
    /// Model config JSON; replaces the model flags below.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, default_value_t = 5)]
    pub nrad: usize,
    #[arg(long, default_value_t = 3)]
    pub norb: usize,
    #[arg(long, default_value_t = 8)]
    pub layers: usize,
    #[arg(long, value_enum, default_value_t = ArchArg::Equivariant)]
    pub arch: ArchArg,
    #[arg(long, value_enum, default_value_t = EncodingArg::Polygon)]
    pub encoding: EncodingArg,
    /// Readout classes (default: the dataset's class count).
    #[arg(long)]
    pub classes: Option<usize>,
    /// Trainable RZ on the orbital register.
    #[arg(long)]
    pub orbital_rz: bool,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct TrainArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long, default_value_t = 10)]
    pub epochs: usize,
    #[arg(long, default_value_t = 1e-3)]
    pub lr: f64,
    #[arg(long, default_value_t = 32)]
    pub batch: usize,
    #[arg(long, default_value_t = 1)]
    pub repeats: usize,
    #[arg(long, default_value_t = 0)]
    pub eval_every: usize,
    #[arg(long, value_enum, default_value_t = GradArg::Shift)]
    pub grad: GradArg,
    /// Seeds parameter initialisation and shuffling.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Build and validate the model, then stop.
    #[arg(long)]
    pub validate_only: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SplitArg {
    Train,
    Val,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct EvalArgs {
    #[arg(long)]
    pub checkpoint: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, value_enum, default_value_t = SplitArg::Val)]
    pub split: SplitArg,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum InputArg {
    Image,
    Zero,
    Uniform,
}

impl From<InputArg> for InputRule {
    fn from(a: InputArg) -> Self {
        match a {
            InputArg::Image => InputRule::Image,
            InputArg::Zero => InputRule::Zero,
            InputArg::Uniform => InputRule::Uniform,
        }
    }
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct ScanArgs {
    /// `fixed:K`, `prop:R` or `log:C`.
    #[arg(long, default_value = "fixed:2")]
    pub rule: String,
    /// Inclusive range `A..B` or a list `A,B,C`.
    #[arg(long = "n", default_value = "4..10")]
    pub qubits: String,
    #[arg(long, default_value_t = 32)]
    pub layers: usize,
    #[arg(long, default_value_t = 1000)]
    pub samples: usize,
    #[arg(long, value_enum, default_value_t = InputArg::Image)]
    pub input: InputArg,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct MomentsArgs {
    #[arg(long, default_value_t = 2)]
    pub nrad: usize,
    #[arg(long, default_value_t = 4)]
    pub norb: usize,
    /// Comma-separated depths.
    #[arg(long, default_value = "4,16,64")]
    pub layers: String,
    #[arg(long, default_value_t = 1000)]
    pub samples: usize,
    /// 1-based class whose loss is sampled.
    #[arg(long, default_value_t = 1)]
    pub class: usize,
    #[arg(long, value_enum, default_value_t = InputArg::Image)]
    pub input: InputArg,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Subcommand, Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DlaCmd {
    /// Closure dimension against the closed form.
    Verify(DlaArgs),
    /// Prints the generator set.
    Generators(DlaArgs),
    /// Writes an orthonormal basis of the closure.
    Closure(DlaArgs),
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct DlaArgs {
    #[arg(long)]
    pub nrad: usize,
    #[arg(long)]
    pub norb: usize,
    /// Dimension cap for n_rad beyond the default limit.
    #[arg(long)]
    pub cap: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct ReplayArgs {
    pub config: PathBuf,
    /// Write outputs here instead of the recorded directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// The `config.json` echo.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    pub format_version: u32,
    pub command: Command,
}

fn default_seed() -> Result<u64> {
    match std::env::var(SEED_ENV) {
        Ok(v) => v.trim().parse().map_err(|_| {
            Error::InvalidArgument(format!("{SEED_ENV}='{v}' is not an unsigned integer"))
        }),
        Err(_) => Ok(0),
    }
}

fn resolve(seed: &mut Option<u64>) -> Result<u64> {
    let s = match *seed {
        Some(s) => s,
        None => default_seed()?,
    };
    *seed = Some(s);
    Ok(s)
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn echo(dir: &Path, command: &Command) -> Result<()> {
    ensure_dir(dir)?;
    let cfg = RunConfig {
        format_version: RUN_FORMAT_VERSION,
        command: command.clone(),
    };
    write_text(&dir.join("config.json"), &serde_json::to_string_pretty(&cfg)?)
}

/// Parses `A..B` (inclusive) or `A,B,C`.
pub fn parse_qubit_range(text: &str) -> Result<Vec<usize>> {
    let bad = || Error::InvalidArgument(format!("bad qubit range '{text}'"));
    if let Some((a, b)) = text.split_once("..") {
        let a: usize = a.trim().parse().map_err(|_| bad())?;
        let b: usize = b.trim().parse().map_err(|_| bad())?;
        if a > b {
            return Err(bad());
        }
        Ok((a..=b).collect())
    } else {
        text.split(',').map(|t| t.trim().parse().map_err(|_| bad())).collect()
    }
}

fn model_config(args: &ModelArgs, data_classes: Option<usize>, seed: u64) -> Result<ModelConfig> {
    let mut cfg = if let Some(path) = &args.config {
        let text = fs::read(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_slice::<ModelConfig>(&text)?
    } else {
        ModelConfig {
            n_rad: args.nrad,
            n_orb: args.norb,
            layers: args.layers,
            architecture: match args.arch {
                ArchArg::Equivariant => Architecture::Equivariant,
                ArchArg::Generic => Architecture::Generic,
            },
            n_classes: args.classes.or(data_classes).unwrap_or(args.nrad),
            seed,
            orbital_rotations: args.orbital_rz,
            input_encoding: match args.encoding {
                EncodingArg::Polygon => InputEncoding::Polygon,
                EncodingArg::Flattened => InputEncoding::Flattened,
            },
        }
    };
    if args.config.is_some() {
        cfg.seed = seed;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run_dataset(mut a: DatasetArgs) -> Result<()> {
    resolve(&mut a.seed)?;
    let spec = SyntheticSpec {
        n_classes: a.classes,
        width: a.size,
        height: a.size,
        noise_sigma: a.noise,
        samples_per_class: a.count,
        val_per_class: a.val,
        seed: a.seed.unwrap_or_default(),
        ring_width_frac: a.ring_width,
    };
    let m = generate_dataset(&spec, &a.out)?;
    echo(&a.out, &Command::Dataset(DatasetCmd::Gen(a.clone())))?;
    println!(
        "wrote {} images ({} train, {} val) to {}",
        m.count,
        m.n_train,
        m.n_val,
        a.out.display()
    );
    Ok(())
}

fn run_preview(mut a: PreviewArgs) -> Result<()> {
    let seed = resolve(&mut a.seed)?;
    let image: ImageGrid = match &a.data {
        Some(dir) => {
            let ds = load_dataset(dir)?;
            ds.images
                .get(a.index)
                .cloned()
                .ok_or(Error::IndexOutOfRange {
                    index: a.index,
                    limit: ds.images.len(),
                })?
        }
        None => {
            let spec = SyntheticSpec {
                seed,
                ..SyntheticSpec::default()
            };
            generate_class_image(a.class, &spec, a.angle, &mut image_rng(seed, 0))?
        }
    };
    let sampling = build_sampling(a.nrad, a.norb, image.width(), image.height())?;
    let samples = sample(&image, &sampling)?;
    let recon = reconstruct_image(&samples, &sampling, image.width(), image.height())?;
    ensure_dir(&a.out)?;
    image.write_pgm(&a.out.join("input.pgm"))?;
    recon.write_pgm(&a.out.join("reconstruction.pgm"))?;
    let mut csv = String::from("r,k,x,y,value\n");
    let m = sampling.n_angles();
    for (i, (&(x, y), v)) in sampling.vertices.iter().zip(&samples).enumerate() {
        let _ = writeln!(csv, "{},{},{x:.16e},{y:.16e},{v:.16e}", i / m, i % m);
    }
    write_text(&a.out.join("samples.csv"), &csv)?;
    echo(&a.out, &Command::EncodePreview(a.clone()))?;
    println!("wrote preview to {}", a.out.display());
    Ok(())
}

fn run_train(mut a: TrainArgs) -> Result<()> {
    let seed = resolve(&mut a.seed)?;
    if a.validate_only {
        let cfg = model_config(&a.model, None, seed)?;
        let model = Model::new(cfg.clone())?;
        println!(
            "valid: n_rad={} n_orb={} layers={} params={} gates={}",
            cfg.n_rad,
            cfg.n_orb,
            cfg.layers,
            model.n_params(),
            model.circuit.gates().len()
        );
        return Ok(());
    }
    let data = a
        .data
        .clone()
        .ok_or_else(|| Error::InvalidArgument("--data is required for training".into()))?;
    let ds = load_dataset(&data)?;
    let cfg = model_config(&a.model, Some(ds.n_classes()), seed)?;
    let tc = TrainConfig {
        epochs: a.epochs,
        batch_size: a.batch,
        shuffle_seed: seed,
        eval_every: a.eval_every,
        learning_rate: a.lr,
        grad_method: match a.grad {
            GradArg::Shift => GradMethod::ParameterShift,
            GradArg::Adjoint => GradMethod::Adjoint,
        },
    };
    let ck_dir = a.out.as_ref().map(|o| o.join("checkpoints"));
    let (outcomes, metrics) = train_repeats(&cfg, &ds, &tc, a.repeats, ck_dir.as_deref())?;
    if let Some(out) = &a.out {
        ensure_dir(out)?;
        write_text(&out.join("metrics.csv"), &metrics.to_csv())?;
        write_text(&out.join("aggregate.csv"), &aggregate_csv(&metrics.aggregate()))?;
        write_text(&out.join("model.json"), &serde_json::to_string_pretty(&cfg)?)?;
        let params: Vec<&Vec<f64>> = outcomes.iter().map(|o| &o.params).collect();
        write_text(&out.join("params.json"), &serde_json::to_string(&params)?)?;
        echo(out, &Command::Train(a.clone()))?;
    }
    for (r, acc) in metrics.final_accuracies().iter().enumerate() {
        println!("repeat={r} val_acc={acc:.6}");
    }
    Ok(())
}

fn run_eval(a: EvalArgs) -> Result<()> {
    let ck = Checkpoint::load(&a.checkpoint)?;
    let ds = load_dataset(&a.data)?;
    let model = Model::new(ck.model.clone())?;
    let split = match a.split {
        SplitArg::Train => ds.train(),
        SplitArg::Val => ds.val(),
    };
    let acc = evaluate(&model, &ck.params, split)?;
    println!("accuracy={acc:.6} examples={}", split.len());
    if let Some(out) = &a.out {
        ensure_dir(out)?;
        let csv = format!("epoch,repeat,examples,accuracy\n{},{},{},{acc:.16e}\n", ck.epoch, ck.repeat, split.len());
        write_text(&out.join("eval.csv"), &csv)?;
        echo(out, &Command::Eval(a.clone()))?;
    }
    Ok(())
}

fn run_scan(mut a: ScanArgs) -> Result<()> {
    let seed = resolve(&mut a.seed)?;
    let cfg = BPScanConfig {
        qubits: parse_qubit_range(&a.qubits)?,
        rule: AssignmentRule::parse(&a.rule)?,
        layers: a.layers,
        samples: a.samples,
        input: a.input.into(),
        seed,
    };
    let report = gradient_variance_scan(&cfg)?;
    print!("{}", report.to_csv());
    match report.slope {
        Some(s) => println!("slope={s:.6}"),
        None => println!("slope=undefined"),
    }
    if let Some(out) = &a.out {
        ensure_dir(out)?;
        write_text(&out.join("scan.csv"), &report.to_csv())?;
        write_text(&out.join("scan_config.json"), &serde_json::to_string_pretty(&cfg)?)?;
        echo(out, &Command::BpScan(a.clone()))?;
    }
    Ok(())
}

fn run_moments(mut a: MomentsArgs) -> Result<()> {
    let seed = resolve(&mut a.seed)?;
    let depths = parse_qubit_range(&a.layers)?;
    let input = scan_input(a.input.into(), a.nrad, a.norb, seed)?;
    let rho = trainable_frame(&input, a.nrad, a.norb)?;
    let pred = predicted_moments(&rho, a.class, a.nrad, a.norb)?;
    let mut csv = String::from(
        "layers,samples,mean,mean_se,variance,variance_se,predicted_mean,predicted_variance\n",
    );
    for &l in &depths {
        let model = Model::new(ModelConfig::equivariant(a.nrad, a.norb, l, a.class))?;
        let est = estimate_loss_moments(&model, &input, a.class, a.samples, seed)?;
        let _ = writeln!(
            csv,
            "{l},{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            est.samples, est.mean, est.mean_se, est.variance, est.variance_se, pred.mean, pred.variance
        );
    }
    print!("{csv}");
    if let Some(out) = &a.out {
        ensure_dir(out)?;
        write_text(&out.join("moments.csv"), &csv)?;
        let table = variance_formula_report(a.nrad, a.norb, &[("input".into(), input)])?;
        write_text(&out.join("formula.csv"), &formula_csv(&table))?;
        echo(out, &Command::Moments(a.clone()))?;
    }
    Ok(())
}

fn run_dla(cmd: DlaCmd) -> Result<()> {
    match &cmd {
        DlaCmd::Verify(a) => {
            let r = match a.cap {
                Some(cap) => verify_dla_with_cap(a.nrad, a.norb, cap)?,
                None if a.nrad > MAX_VERIFY_NRAD => {
                    return Err(Error::InvalidArgument(format!(
                        "n_rad={} exceeds {MAX_VERIFY_NRAD}; pass --cap to force",
                        a.nrad
                    )))
                }
                None => verify_dla(a.nrad, a.norb)?,
            };
            println!(
                "computed={} formula={} match={}",
                r.computed_dim, r.formula_dim, r.matched
            );
            if let Some(out) = &a.out {
                ensure_dir(out)?;
                let csv = format!(
                    "n_rad,n_orb,computed,formula,match\n{},{},{},{},{}\n",
                    r.n_rad, r.n_orb, r.computed_dim, r.formula_dim, r.matched
                );
                write_text(&out.join("dla.csv"), &csv)?;
                echo(out, &Command::Dla(cmd.clone()))?;
            }
        }
        DlaCmd::Generators(a) => {
            let gens = dla_generators(a.nrad, a.norb)?;
            let text = format_operators(
                &format!("generators n_rad={} n_orb={}", a.nrad, a.norb),
                &gens,
            );
            print!("{text}");
            if let Some(out) = &a.out {
                ensure_dir(out)?;
                write_text(&out.join("generators.txt"), &text)?;
                echo(out, &Command::Dla(cmd.clone()))?;
            }
        }
        DlaCmd::Closure(a) => {
            let gens = dla_generators(a.nrad, a.norb)?;
            let cap = a.cap.unwrap_or(1 << (2 * (a.nrad + a.norb)));
            let c = lie_closure(&gens, cap)?;
            let text = format_operators(
                &format!(
                    "closure n_rad={} n_orb={} dim={} capped={}",
                    a.nrad,
                    a.norb,
                    c.span.dim(),
                    c.capped
                ),
                c.span.basis(),
            );
            println!("dim={} capped={}", c.span.dim(), c.capped);
            if let Some(out) = &a.out {
                ensure_dir(out)?;
                write_text(&out.join("closure.txt"), &text)?;
                echo(out, &Command::Dla(cmd.clone()))?;
            } else {
                print!("{text}");
            }
        }
    }
    Ok(())
}

fn set_out(command: &mut Command, out: PathBuf) {
    match command {
        Command::Dataset(DatasetCmd::Gen(a)) => a.out = out,
        Command::EncodePreview(a) => a.out = out,
        Command::Train(a) => a.out = Some(out),
        Command::Eval(a) => a.out = Some(out),
        Command::BpScan(a) => a.out = Some(out),
        Command::Moments(a) => a.out = Some(out),
        Command::Dla(DlaCmd::Verify(a) | DlaCmd::Generators(a) | DlaCmd::Closure(a)) => {
            a.out = Some(out)
        }
        Command::Replay(_) => {}
    }
}

fn run_replay(a: ReplayArgs) -> Result<()> {
    let text = fs::read(&a.config).map_err(|e| Error::io(&a.config, e))?;
    let value: serde_json::Value = serde_json::from_slice(&text)?;
    let found = value
        .get("format_version")
        .and_then(|v| v.as_u64())
        .ok_or_else(|| Error::InvalidArgument("config echo has no format_version".into()))?;
    if found != RUN_FORMAT_VERSION as u64 {
        return Err(Error::VersionMismatch {
            expected: RUN_FORMAT_VERSION,
            found: found as u32,
        });
    }
    let cfg: RunConfig = serde_json::from_value(value)?;
    let mut command = cfg.command;
    if let Some(out) = a.out {
        set_out(&mut command, out);
    }
    execute(command)
}

/// Runs a parsed command.
pub fn execute(command: Command) -> Result<()> {
    match command {
        Command::Dataset(DatasetCmd::Gen(a)) => run_dataset(a),
        Command::EncodePreview(a) => run_preview(a),
        Command::Train(a) => run_train(a),
        Command::Eval(a) => run_eval(a),
        Command::BpScan(a) => run_scan(a),
        Command::Moments(a) => run_moments(a),
        Command::Dla(c) => run_dla(c),
        Command::Replay(a) => run_replay(a),
    }
}

/// Parses `argv` (program name first), runs it and returns the exit code:
/// 0 on success, 1 on a domain error, 2 on a usage error.
pub fn dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            return 2;
        }
        // a second initialisation in the same process is harmless
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    match execute(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}
