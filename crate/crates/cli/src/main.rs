//! `shading`: batch label generation, Retinex decomposition, smooth-shading
//! classification and balanced precision-recall evaluation.

mod batch;
mod commands;
mod evaluate;

use std::fs;
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use shading_core::annotations::{LabelGenOptions, NsNdParams};
use shading_core::classify::ScoreKind;
use shading_core::decompose::RetinexParams;
use shading_core::eval::BalanceSpec;

use batch::{finish, photo_ids, require_dir, write_json};
use commands::{ClassifyJob, ClassifySummary, DecomposeJob, DecomposeSummary, Layout, LabelJob, LabelSummary, Method};
use evaluate::EvalJob;

#[derive(Parser)]
#[command(name = "shading", version, about)]
struct Cli {
    /// Worker threads; 0 uses every available core.
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Rasterise annotations and RGB-D geometry into per-pixel label maps.
    Labelgen(LabelgenArgs),
    /// Split images into reflectance and shading.
    Decompose(DecomposeArgs),
    /// Write smooth-shading score maps.
    Classify(ClassifyArgs),
    /// Balanced precision-recall curve of one method's scores.
    EvalPr(EvalArgs),
    /// Precision at 30/50/70% recall for several saved curves.
    Report(ReportArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Dataset root holding annotations/, images/, depth/, normals/, masks/.
    #[arg(long, env = "SAW_DATA_DIR")]
    input: PathBuf,

    #[arg(long)]
    output: PathBuf,

    /// File with one photo ID per line; defaults to every photo found.
    #[arg(long)]
    photo_list: Option<PathBuf>,

    #[arg(long, default_value_t = 512)]
    max_dim: usize,
}

#[derive(Args)]
struct LabelgenArgs {
    #[command(flatten)]
    common: CommonArgs,

    #[arg(long, default_value_t = 2.0)]
    tau_depth: f64,

    #[arg(long, default_value_t = 1.5)]
    tau_normal: f64,

    #[arg(long, default_value_t = 3)]
    mask_erosion: usize,

    /// Minimum distance from the image edge, as a fraction of the width.
    #[arg(long, default_value_t = 0.05)]
    border_margin: f64,

    #[arg(long, default_value_t = 3)]
    smooth_erosion: usize,

    /// Training labels: dilate non-smooth labels over 5x5.
    #[arg(long)]
    train: bool,

    /// Also write shadow-boundary candidates from point comparisons.
    #[arg(long)]
    candidates: bool,
}

#[derive(Args)]
struct DecomposeArgs {
    #[command(flatten)]
    common: CommonArgs,

    /// Chromaticity distance above which neighbours may differ in reflectance.
    #[arg(long, default_value_t = 0.02)]
    retinex_t: f64,

    #[arg(long, default_value_t = 100.0)]
    w_reflectance: f64,

    /// Relax reflectance constancy where the heatmap predicts smooth shading.
    #[arg(long, requires = "heatmaps")]
    use_prior: bool,

    /// Directory of smooth-shading heatmaps (`<id>.pfm` or `<id>.png`).
    #[arg(long)]
    heatmaps: Option<PathBuf>,

    #[arg(long, default_value_t = 1e-10)]
    cg_tolerance: f64,

    /// Conjugate-gradient iteration cap; defaults to 10 x pixel count.
    #[arg(long)]
    max_iterations: Option<usize>,
}

#[derive(Args)]
struct ClassifyArgs {
    #[command(flatten)]
    common: CommonArgs,

    #[arg(long, value_enum)]
    method: Method,

    /// Input directory for `shading` (decompose output) or `heatmap`.
    #[arg(long, required_if_eq_any = [("method", "shading"), ("method", "heatmap")])]
    source: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    /// Label maps written by `labelgen` (without --train).
    #[arg(long)]
    labels: PathBuf,

    /// Score maps written by `classify`.
    #[arg(long)]
    scores: PathBuf,

    /// Name used for output files and tables.
    #[arg(long)]
    method: String,

    #[arg(long)]
    output: PathBuf,

    #[arg(long)]
    photo_list: Option<PathBuf>,

    /// Class mass ratio S:NS-ND:NS-SB.
    #[arg(long, default_value = "2:1:1")]
    balance: BalanceSpec,

    /// Scores are probabilities in [0, 1] rather than negated gradients.
    #[arg(long)]
    probability: bool,
}

#[derive(Args)]
struct ReportArgs {
    /// A saved curve as NAME=PATH; repeatable.
    #[arg(long = "curve", value_parser = evaluate::parse_curve_arg)]
    curves: Vec<(String, PathBuf)>,

    /// Also include every `<name>_pr.csv` in this directory.
    #[arg(long)]
    curves_dir: Option<PathBuf>,

    #[arg(long)]
    output: PathBuf,
}

fn prepare(common: &CommonArgs) -> Result<Layout> {
    require_dir(&common.input)?;
    fs::create_dir_all(&common.output).with_context(|| format!("creating {}", common.output.display()))?;
    Ok(Layout {
        root: common.input.clone(),
    })
}

fn labelgen(pool: &rayon::ThreadPool, args: LabelgenArgs) -> Result<()> {
    let layout = prepare(&args.common)?;
    let options = LabelGenOptions {
        max_dim: args.common.max_dim,
        smooth_erosion_iters: args.smooth_erosion,
        dilate_ns: args.train,
        nsnd: NsNdParams {
            tau_depth: args.tau_depth,
            tau_normal: args.tau_normal,
            mask_erosion_iters: args.mask_erosion,
            border_margin_frac: args.border_margin,
        },
    };
    options.nsnd.validate()?;
    let ids = photo_ids(args.common.photo_list.as_deref(), &layout.annotations(), ".json")?;
    let job = LabelJob {
        layout,
        output: args.common.output.clone(),
        options,
        candidates: args.candidates,
    };
    let (counts, failures) = batch::run(pool, &ids, |id| job.run(id));
    let mut totals = shading_core::annotations::ClassCounts::default();
    for c in counts.values() {
        totals += *c;
    }
    let summary = LabelSummary {
        command: "labelgen",
        photos: ids.len(),
        succeeded: counts.len(),
        options,
        totals,
        counts,
        failures,
    };
    write_json(&args.common.output.join("summary.json"), &summary)?;
    finish("labelgen", ids.len(), &summary.failures)
}

fn decompose(pool: &rayon::ThreadPool, args: DecomposeArgs) -> Result<()> {
    let layout = prepare(&args.common)?;
    let params = RetinexParams {
        t: args.retinex_t,
        w_reflectance: args.w_reflectance,
        use_prior: args.use_prior,
        tolerance: args.cg_tolerance,
        max_iterations: args.max_iterations,
        ..RetinexParams::default()
    };
    params.validate()?;
    if let Some(dir) = &args.heatmaps {
        require_dir(dir)?;
    }
    let ids = photo_ids(args.common.photo_list.as_deref(), &layout.images(), ".png")?;
    let job = DecomposeJob {
        layout,
        output: args.common.output.clone(),
        params,
        heatmaps: args.heatmaps,
        max_dim: args.common.max_dim,
    };
    let (results, failures) = batch::run(pool, &ids, |id| job.run(id));
    let summary = DecomposeSummary {
        command: "decompose",
        photos: ids.len(),
        succeeded: results.len(),
        params,
        results,
        failures,
    };
    write_json(&args.common.output.join("summary.json"), &summary)?;
    finish("decompose", ids.len(), &summary.failures)
}

fn classify(pool: &rayon::ThreadPool, args: ClassifyArgs) -> Result<()> {
    let layout = prepare(&args.common)?;
    let source = match args.method {
        Method::ConstantR => layout.images(),
        _ => args.source.clone().expect("clap requires --source"),
    };
    require_dir(&source)?;
    let ids = photo_ids(
        args.common.photo_list.as_deref(),
        &source,
        ClassifyJob::source_suffix(args.method),
    )?;
    let job = ClassifyJob {
        layout,
        output: args.common.output.clone(),
        method: args.method,
        source,
        max_dim: args.common.max_dim,
    };
    let (done, failures) = batch::run(pool, &ids, |id| job.run(id));
    let summary = ClassifySummary {
        command: "classify",
        method: args.method,
        kind: job.kind(),
        photos: ids.len(),
        succeeded: done.len(),
        failures,
    };
    write_json(&args.common.output.join("summary.json"), &summary)?;
    finish("classify", ids.len(), &summary.failures)
}

fn eval_pr(pool: &rayon::ThreadPool, args: EvalArgs) -> Result<()> {
    require_dir(&args.labels)?;
    require_dir(&args.scores)?;
    fs::create_dir_all(&args.output)?;
    let ids = photo_ids(args.photo_list.as_deref(), &args.labels, ".png")?;
    let job = EvalJob {
        labels: args.labels,
        scores: args.scores,
        kind: if args.probability {
            ScoreKind::Probability
        } else {
            ScoreKind::NegGradient
        },
    };
    let summary = evaluate::eval_pr(&job, pool, &ids, &args.method, &args.balance, &args.output)?;
    finish("eval-pr", ids.len(), &summary.failures)
}

fn report(args: ReportArgs) -> Result<()> {
    let mut curves = args.curves;
    if let Some(dir) = &args.curves_dir {
        curves.extend(evaluate::curves_in_dir(dir)?);
    }
    fs::create_dir_all(&args.output)?;
    print!("{}", evaluate::report(&curves, &args.output)?);
    Ok(())
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(cli.jobs).build()?;
    match cli.command {
        Command::Labelgen(a) => labelgen(&pool, a),
        Command::Decompose(a) => decompose(&pool, a),
        Command::Classify(a) => classify(&pool, a),
        Command::EvalPr(a) => eval_pr(&pool, a),
        Command::Report(a) => report(a),
    }
}
