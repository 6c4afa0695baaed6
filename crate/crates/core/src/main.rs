use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, CommandFactory, Parser, Subcommand};
use serde::Serialize;

use forestseg::campaign::{
    aggregate_votes, campaign_accuracy, select_samples, synthesize_votes, task_entropy, VoteSynthesis,
};
use forestseg::features::{extract_features, GlcmParams, MIN_SEGMENT_PIXELS};
use forestseg::knn::knn_classify;
use forestseg::metrics::{compute_cs_summary, compute_segment_records, evaluate_spx, SirsParams};
use forestseg::pipeline::{run_pipeline, write_outputs, PipelineConfig};
use forestseg::preprocess::{fit_pca, rescale_to_byte_range};
use forestseg::ranking::{aggregate_scores, average_by_method, render_markdown, render_rank_report, RankTable};
use forestseg::segment::{postprocess, Algorithm, SegmenterConfig};
use forestseg::synthetic::{generate_scene, SceneParams};
use forestseg::tables::{self, CsRow, Prediction, SpxRow, Table};
use forestseg::{io, Backend, Error, GtClass};

/// Superpixel segmentation, evaluation and ranking for multi-band rasters.
///
/// `--config <json>` supplies flag defaults: top-level keys apply to any
/// subcommand that has a flag of that name, a key named after the subcommand
/// holds an object of flags for it alone. Command-line flags win over the
/// subcommand section, which wins over top-level keys.
#[derive(Parser)]
#[command(name = "forestseg", version)]
struct Cli {
    /// Worker threads for data-parallel loops and multi-image batches.
    #[arg(long, global = true, env = "FORESTSEG_JOBS")]
    jobs: Option<usize>,
    /// JSON file of flag defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Project a raster onto its leading principal components.
    Pca(PcaArgs),
    /// Run a native segmenter.
    Segment(SegmentArgs),
    /// Apply connectivity enforcement and small-segment merging to an external label map.
    Import(ImportArgs),
    /// Superpixel measures (BR, UE, SIRS, CO, Reg) for one or more label maps.
    EvalSpx(EvalSpxArgs),
    /// Campaign-suitability measures (US, DS, PHoR, EP) for one or more label maps.
    EvalCs(EvalCsArgs),
    /// Rank methods from metric tables or from a rank matrix.
    Rank(RankArgs),
    /// Per-segment texture features.
    Features(FeaturesArgs),
    /// kNN classification of feature tables.
    Classify(ClassifyArgs),
    /// Aggregate votes, score the campaign and select training samples.
    SimulateCampaign(CampaignArgs),
    /// Full pipeline on one scene with all stage outputs.
    Report(ReportArgs),
    /// Write a seeded synthetic scene and its ground truth.
    Synth(SynthArgs),
}

#[derive(Args, Serialize)]
struct PcaArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 3)]
    components: usize,
    /// Ground truth whose excluded pixels are left out of the covariance.
    #[arg(long)]
    gt: Option<PathBuf>,
    /// Map each output band onto [0, 255].
    #[arg(long)]
    rescale: bool,
    /// Fail on rank deficiency instead of zero-filling trailing components.
    #[arg(long)]
    strict: bool,
}

#[derive(Args, Serialize)]
struct SegmentArgs {
    #[arg(long, value_parser = parse_algorithm)]
    algo: Algorithm,
    #[arg(long, default_value_t = 6000)]
    k: usize,
    #[arg(long, default_value_t = 10.0)]
    m: f64,
    #[arg(long, default_value_t = 10)]
    iters: usize,
    #[arg(long, default_value_t = 70)]
    min_size: usize,
    /// Skip connectivity enforcement and merging.
    #[arg(long)]
    no_merge: bool,
    /// Map each input band onto [0, 255] before segmenting.
    #[arg(long)]
    rescale: bool,
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Serialize)]
struct ImportArgs {
    #[arg(long)]
    labels: PathBuf,
    #[arg(long, default_value_t = 70)]
    min_size: usize,
    #[arg(long)]
    raster: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Serialize)]
struct BatchArgs {
    /// Label maps; repeat for a batch.
    #[arg(long, required = true)]
    labels: Vec<PathBuf>,
    /// Ground truth, once for all label maps or once per label map.
    #[arg(long, required = true)]
    gt: Vec<PathBuf>,
    /// Method name for every row; defaults to each label file's stem.
    #[arg(long)]
    method: Option<String>,
    /// Image names, one per label map; default to each ground truth's stem.
    #[arg(long)]
    image: Vec<String>,
}

#[derive(Args, Serialize)]
struct EvalSpxArgs {
    #[command(flatten)]
    batch: BatchArgs,
    /// Rasters, once for all label maps or once per label map.
    #[arg(long, required = true)]
    raster: Vec<PathBuf>,
    #[arg(long, default_value_t = 8)]
    sirs_bins: usize,
    #[arg(long, default_value_t = 2)]
    sirs_reps: usize,
    #[arg(long, default_value_t = 0.1)]
    sirs_sigma: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Serialize)]
struct EvalCsArgs {
    #[command(flatten)]
    batch: BatchArgs,
    #[arg(long)]
    out: PathBuf,
    /// Per-segment records of a single label map.
    #[arg(long)]
    records_out: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct RankArgs {
    #[arg(long, conflicts_with = "ranks", requires = "cs")]
    spx: Vec<PathBuf>,
    #[arg(long, conflicts_with = "ranks", requires = "spx")]
    cs: Vec<PathBuf>,
    /// Precomputed rank matrix with a `method` column and one column per metric.
    #[arg(long, required_unless_present = "spx")]
    ranks: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Serialize)]
struct FeaturesArgs {
    #[arg(long)]
    raster: PathBuf,
    #[arg(long)]
    labels: PathBuf,
    /// Adds each segment's majority class as the label column.
    #[arg(long)]
    gt: Option<PathBuf>,
    /// Only segments that are useful for a campaign (requires --gt).
    #[arg(long, requires = "gt")]
    useful_only: bool,
    /// Map each raster band onto [0, 255] first.
    #[arg(long)]
    rescale: bool,
    #[arg(long, default_value_t = 32)]
    levels: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Serialize)]
struct ClassifyArgs {
    #[arg(long)]
    train: PathBuf,
    #[arg(long)]
    test: PathBuf,
    #[arg(long, default_value_t = 5)]
    k: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Serialize)]
struct CampaignArgs {
    #[arg(long, required_unless_present = "synthesize")]
    votes: Option<PathBuf>,
    /// Generate votes from the records' reference classes instead of reading them.
    #[arg(long, conflicts_with = "votes")]
    synthesize: bool,
    #[arg(long)]
    records: PathBuf,
    #[arg(long, default_value_t = 0.9)]
    entropy_max: f64,
    #[arg(long, default_value_t = 10)]
    volunteers: u32,
    #[arg(long, default_value_t = 0.1)]
    error_rate: f64,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Synthesize tasks for every segment, not only useful ones.
    #[arg(long)]
    all_segments: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Serialize)]
struct ReportArgs {
    #[arg(long)]
    raster: PathBuf,
    #[arg(long)]
    gt: PathBuf,
    #[arg(long, value_parser = parse_algorithm, default_value = "slic")]
    algo: Algorithm,
    #[arg(long, default_value_t = 6000)]
    k: usize,
    #[arg(long, default_value_t = 10.0)]
    m: f64,
    #[arg(long, default_value_t = 10)]
    iters: usize,
    #[arg(long, default_value_t = 70)]
    min_size: usize,
    #[arg(long, default_value_t = 3)]
    components: usize,
    #[arg(long, default_value_t = 5)]
    knn_k: usize,
    #[arg(long, default_value_t = 0.9)]
    entropy_max: f64,
    #[arg(long, default_value_t = 10)]
    volunteers: u32,
    #[arg(long, default_value_t = 0.1)]
    error_rate: f64,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    split_seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Serialize)]
struct SynthArgs {
    #[arg(long, default_value_t = 256)]
    width: usize,
    #[arg(long, default_value_t = 256)]
    height: usize,
    #[arg(long, default_value_t = 12)]
    blobs: usize,
    #[arg(long, default_value_t = 8.0)]
    min_radius: f64,
    #[arg(long, default_value_t = 30.0)]
    max_radius: f64,
    #[arg(long, default_value_t = 0.002)]
    noise: f64,
    #[arg(long, default_value_t = 0.02)]
    texture: f64,
    #[arg(long, default_value_t = 0.1)]
    relief: f64,
    #[arg(long, default_value_t = 1)]
    excluded: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Directory receiving `scene.feb1` and `gt.pgm`.
    #[arg(long)]
    out: PathBuf,
}

fn parse_algorithm(s: &str) -> Result<Algorithm, String> {
    Algorithm::parse(s).ok_or_else(|| {
        let names: Vec<&str> = Algorithm::ALL.iter().map(|a| a.name()).collect();
        format!("expected one of {}", names.join(", "))
    })
}

fn stem(p: &Path) -> String {
    p.file_stem().map_or_else(|| p.display().to_string(), |s| s.to_string_lossy().into_owned())
}

/// `items[i]` when one item per input was given, `items[0]` when one was shared.
fn per_input<'a, T>(items: &'a [T], i: usize, n: usize, flag: &str) -> Result<&'a T, Error> {
    match items.len() {
        1 => Ok(&items[0]),
        len if len == n => Ok(&items[i]),
        len => Err(Error::InvalidConfig(format!("--{flag} given {len} times for {n} label maps"))),
    }
}

struct BatchItem {
    labels: PathBuf,
    gt: PathBuf,
    method: String,
    image: String,
}

fn batch_items(b: &BatchArgs) -> Result<Vec<BatchItem>, Error> {
    let n = b.labels.len();
    if !b.image.is_empty() && b.image.len() != n {
        return Err(Error::InvalidConfig(format!("--image given {} times for {n} label maps", b.image.len())));
    }
    (0..n)
        .map(|i| {
            let gt = per_input(&b.gt, i, n, "gt")?.clone();
            Ok(BatchItem {
                method: b.method.clone().unwrap_or_else(|| stem(&b.labels[i])),
                image: b.image.get(i).cloned().unwrap_or_else(|| stem(&gt)),
                labels: b.labels[i].clone(),
                gt,
            })
        })
        .collect()
}

fn write_csv<T: Serialize>(path: &Path, command: &str, config: &T, body: &str) -> Result<(), Error> {
    tables::write_text(path, &(tables::preamble(command, config) + body))
}

fn cmd_pca(a: &PcaArgs) -> anyhow::Result<()> {
    let raster = io::load_raster(&a.input)?;
    let gt = a.gt.as_ref().map(io::load_ground_truth).transpose()?;
    let model = fit_pca(&raster, a.components, gt.as_ref())?;
    if model.is_degenerate() {
        let err = Error::DegenerateCovariance {
            rank: model.rank,
            requested: a.components,
        };
        if a.strict {
            return Err(err.into());
        }
        log::warn!("{err}; trailing components are zero-filled");
    }
    let mut projected = model.project(&raster)?;
    if a.rescale {
        projected = rescale_to_byte_range(&projected);
    }
    io::save_raster(&a.out, &projected)?;
    log::info!("explained variance {:?}", model.explained_variance);
    Ok(())
}

fn cmd_segment(a: &SegmentArgs) -> anyhow::Result<()> {
    let mut raster = io::load_raster(&a.input)?;
    if a.rescale {
        raster = rescale_to_byte_range(&raster);
    }
    let cfg = SegmenterConfig {
        k_desired: a.k,
        compactness: a.m,
        iterations: a.iters,
        min_size: a.min_size,
    };
    let mut labels = a.algo.run(&raster, &cfg)?;
    if !a.no_merge {
        labels = postprocess(&labels, &raster, a.min_size)?;
    }
    io::save_label_map(&a.out, &labels)?;
    log::info!("{} segments", labels.k());
    Ok(())
}

fn cmd_import(a: &ImportArgs) -> anyhow::Result<()> {
    let labels = io::load_label_map(&a.labels)?;
    let raster = io::load_raster(&a.raster)?;
    let merged = postprocess(&labels, &raster, a.min_size)?;
    io::save_label_map(&a.out, &merged)?;
    Ok(())
}

fn cmd_eval_spx(a: &EvalSpxArgs) -> anyhow::Result<()> {
    let items = batch_items(&a.batch)?;
    let params = SirsParams {
        bins: a.sirs_bins,
        representatives: a.sirs_reps,
        sigma: a.sirs_sigma,
    };
    params.validate()?;
    let n = items.len();
    let rows = Backend::default()
        .map_range(n, |i| -> Result<SpxRow, Error> {
            let it = &items[i];
            let labels = io::load_label_map(&it.labels)?;
            let gt = io::load_ground_truth(&it.gt)?;
            let raster = io::load_raster(per_input(&a.raster, i, n, "raster")?)?;
            Ok(SpxRow {
                method: it.method.clone(),
                image: it.image.clone(),
                report: evaluate_spx(&labels, &gt, &raster, &params)?,
            })
        })
        .into_iter()
        .collect::<Result<Vec<_>, _>>()?;
    write_csv(&a.out, "eval-spx", a, &tables::spx_csv(&rows))?;
    Ok(())
}

fn cmd_eval_cs(a: &EvalCsArgs) -> anyhow::Result<()> {
    let items = batch_items(&a.batch)?;
    if a.records_out.is_some() && items.len() != 1 {
        anyhow::bail!(Error::InvalidConfig("--records-out needs exactly one label map".into()));
    }
    let results = Backend::default()
        .map_range(items.len(), |i| -> Result<_, Error> {
            let it = &items[i];
            let labels = io::load_label_map(&it.labels)?;
            let gt = io::load_ground_truth(&it.gt)?;
            let (records, omitted) = compute_segment_records(&labels, &gt)?;
            if omitted > 0 {
                log::warn!("{}: {omitted} segments cover only excluded pixels", it.labels.display());
            }
            let summary = compute_cs_summary(&records)?;
            Ok((
                CsRow {
                    method: it.method.clone(),
                    image: it.image.clone(),
                    summary,
                },
                records,
            ))
        })
        .into_iter()
        .collect::<Result<Vec<_>, _>>()?;
    let rows: Vec<CsRow> = results.iter().map(|(r, _)| r.clone()).collect();
    write_csv(&a.out, "eval-cs", a, &tables::cs_csv(&rows))?;
    if let Some(path) = &a.records_out {
        write_csv(path, "eval-cs", a, &tables::records_csv(&results[0].1))?;
    }
    Ok(())
}

fn load_tables(paths: &[PathBuf]) -> Result<Table, Error> {
    Table::concat(paths.iter().map(|p| Table::load(p)).collect::<Result<Vec<_>, _>>()?)
}

fn cmd_rank(a: &RankArgs) -> anyhow::Result<()> {
    let table = if let Some(path) = &a.ranks {
        let (methods, ranks) = tables::read_rank_matrix(&Table::load(path)?)?;
        RankTable::from_ranks(methods, ranks)?
    } else {
        let rows = tables::join_metric_rows(&load_tables(&a.spx)?, &load_tables(&a.cs)?)?;
        let (methods, values) = average_by_method(&rows);
        RankTable::from_values(methods, values)?
    };
    let table = aggregate_scores(&table);
    render_rank_report(&table, &a.out, &tables::preamble("rank", a))?;
    print!("{}", render_markdown(&table)?);
    Ok(())
}

fn cmd_features(a: &FeaturesArgs) -> anyhow::Result<()> {
    let mut raster = io::load_raster(&a.raster)?;
    if a.rescale {
        raster = rescale_to_byte_range(&raster);
    }
    let labels = io::load_label_map(&a.labels)?;
    let records = match &a.gt {
        Some(p) => Some(compute_segment_records(&labels, &io::load_ground_truth(p)?)?.0),
        None => None,
    };
    let sizes = labels.sizes();
    let mut class_of: Vec<Option<GtClass>> = vec![None; labels.k()];
    let mut useful = vec![false; labels.k()];
    for r in records.iter().flatten() {
        class_of[r.segment_id as usize] = Some(r.majority);
        useful[r.segment_id as usize] = r.useful;
    }
    let segments: Vec<u32> = (0..labels.k() as u32)
        .filter(|&s| !a.useful_only || useful[s as usize])
        .filter(|&s| {
            let ok = sizes[s as usize] >= MIN_SEGMENT_PIXELS;
            if !ok {
                log::warn!("segment {s} has {} pixels, skipped", sizes[s as usize]);
            }
            ok
        })
        .collect();
    let mut features = extract_features(&raster, &labels, &segments, &GlcmParams { levels: a.levels })?;
    for f in &mut features {
        f.class_label = class_of[f.segment_id as usize];
    }
    write_csv(&a.out, "features", a, &tables::features_csv(&features))?;
    Ok(())
}

fn cmd_classify(a: &ClassifyArgs) -> anyhow::Result<()> {
    let train = tables::read_features(&Table::load(&a.train)?)?;
    let test = tables::read_features(&Table::load(&a.test)?)?;
    let train_pairs = train
        .iter()
        .map(|f| {
            f.class_label
                .map(|c| (f.values.clone(), c))
                .ok_or_else(|| Error::InvalidConfig(format!("training segment {} has no label", f.segment_id)))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let test_pairs: Vec<_> = test.iter().map(|f| (f.values.clone(), f.class_label)).collect();
    let (predicted, metrics) = knn_classify(&train_pairs, &test_pairs, a.k)?;
    let predictions: Vec<Prediction> = test
        .iter()
        .zip(predicted)
        .map(|(f, p)| Prediction {
            segment_id: f.segment_id,
            predicted: p,
            actual: f.class_label,
        })
        .collect();
    write_csv(&a.out, "classify", a, &tables::predictions_csv(&predictions))?;
    if let Some(m) = metrics {
        println!("{}", serde_json::to_string(&m)?);
    }
    Ok(())
}

fn cmd_campaign(a: &CampaignArgs) -> anyhow::Result<()> {
    let records = tables::read_records(&Table::load(&a.records)?)?;
    let tasks = match &a.votes {
        Some(p) => tables::read_votes(&Table::load(p)?)?,
        None => {
            let pool: Vec<_> = records.iter().filter(|r| a.all_segments || r.useful).cloned().collect();
            synthesize_votes(
                &pool,
                &VoteSynthesis {
                    volunteers: a.volunteers,
                    error_rate: a.error_rate,
                    seed: a.seed,
                },
            )?
        }
    };
    let majorities = aggregate_votes(&tasks)?;
    let accuracy = campaign_accuracy(&tasks, &majorities, &records)?;
    let selection = select_samples(&tasks, &majorities, a.entropy_max);
    let entropies: Vec<f64> = tasks.iter().map(task_entropy).collect();
    if a.synthesize {
        write_csv(&a.out.join("votes.csv"), "simulate-campaign", a, &tables::votes_csv(&tasks))?;
    }
    write_csv(
        &a.out.join("tasks.csv"),
        "simulate-campaign",
        a,
        &tables::tasks_csv(&tasks, &majorities, &entropies),
    )?;
    write_csv(&a.out.join("selection.csv"), "simulate-campaign", a, &tables::selection_csv(&selection))?;
    let summary = serde_json::json!({
        "tasks": tasks.len(),
        "accuracy": accuracy,
        "selected_forest": selection.forest.len(),
        "selected_deforest": selection.deforest.len(),
    });
    tables::write_text(&a.out.join("campaign.json"), &format!("{summary:#}\n"))?;
    println!("{summary}");
    Ok(())
}

fn cmd_report(a: &ReportArgs) -> anyhow::Result<()> {
    let raster = io::load_raster(&a.raster)?;
    let gt = io::load_ground_truth(&a.gt)?;
    let cfg = PipelineConfig {
        components: a.components,
        algorithm: a.algo,
        segmenter: SegmenterConfig {
            k_desired: a.k,
            compactness: a.m,
            iterations: a.iters,
            min_size: a.min_size,
        },
        knn_k: a.knn_k,
        entropy_max: a.entropy_max,
        votes: VoteSynthesis {
            volunteers: a.volunteers,
            error_rate: a.error_rate,
            seed: a.seed,
        },
        split_seed: a.split_seed,
        ..Default::default()
    };
    let out = run_pipeline(&raster, &gt, &cfg, Backend::default())?;
    write_outputs(&a.out, &out, a.algo.name(), &stem(&a.raster), &cfg)?;
    println!("{}", serde_json::to_string(&out.metrics)?);
    Ok(())
}

fn cmd_synth(a: &SynthArgs) -> anyhow::Result<()> {
    let scene = generate_scene(&SceneParams {
        width: a.width,
        height: a.height,
        blobs: a.blobs,
        min_radius: a.min_radius,
        max_radius: a.max_radius,
        noise: a.noise,
        texture: a.texture,
        relief: a.relief,
        excluded: a.excluded,
        seed: a.seed,
    })?;
    io::save_raster(a.out.join("scene.feb1"), &scene.raster)?;
    io::save_ground_truth(a.out.join("gt.pgm"), &scene.gt)?;
    Ok(())
}

/// Inserts flags from the `--config` file right after the subcommand name,
/// skipping any flag already given on the command line.
fn inject_config(args: Vec<String>) -> anyhow::Result<Vec<String>> {
    let mut config = None;
    let mut sub_at = None;
    let mut i = 1;
    while i < args.len() {
        let a = &args[i];
        if let Some(v) = a.strip_prefix("--config=") {
            config = Some(v.to_string());
        } else if a == "--config" {
            config = args.get(i + 1).cloned();
            i += 1;
        } else if a == "--jobs" {
            i += 1;
        } else if sub_at.is_none() && !a.starts_with('-') {
            sub_at = Some(i);
        }
        i += 1;
    }
    let (Some(path), Some(sub_at)) = (config, sub_at) else {
        return Ok(args);
    };
    let text = std::fs::read_to_string(&path).with_context(|| format!("reading config {path}"))?;
    let json: serde_json::Value = serde_json::from_str(&text).with_context(|| format!("parsing config {path}"))?;
    let serde_json::Value::Object(top) = json else {
        anyhow::bail!(Error::InvalidConfig("config must be a JSON object".into()));
    };
    let sub = args[sub_at].clone();
    let cmd = Cli::command();
    let Some(sub_cmd) = cmd.find_subcommand(&sub) else {
        return Ok(args);
    };
    let known: Vec<String> = sub_cmd
        .get_arguments()
        .filter_map(|a| a.get_long().map(str::to_string))
        .collect();
    let given: Vec<&str> = args[sub_at + 1..]
        .iter()
        .filter_map(|a| a.strip_prefix("--"))
        .map(|a| a.split('=').next().unwrap_or(a))
        .collect();

    let mut merged: Vec<(String, serde_json::Value)> = Vec::new();
    let mut set = |key: &str, value: &serde_json::Value| {
        let key = key.replace('_', "-");
        merged.retain(|(k, _)| *k != key);
        merged.push((key, value.clone()));
    };
    for (k, v) in &top {
        if !v.is_object() && known.contains(&k.replace('_', "-")) {
            set(k, v);
        }
    }
    if let Some(section) = top.get(&sub) {
        let serde_json::Value::Object(section) = section else {
            anyhow::bail!(Error::InvalidConfig(format!("config section '{sub}' must be an object")));
        };
        for (k, v) in section {
            if !known.contains(&k.replace('_', "-")) {
                anyhow::bail!(UsageError(format!("config key '{k}' is not a flag of '{sub}'")));
            }
            set(k, v);
        }
    }

    let mut injected = Vec::new();
    for (key, value) in merged {
        if given.contains(&key.as_str()) || key == "config" || key == "jobs" {
            continue;
        }
        let values = match &value {
            serde_json::Value::Array(items) => items.clone(),
            other => vec![other.clone()],
        };
        for v in values {
            match v {
                serde_json::Value::Bool(true) => injected.push(format!("--{key}")),
                serde_json::Value::Bool(false) | serde_json::Value::Null => {}
                serde_json::Value::String(s) => injected.extend([format!("--{key}"), s]),
                other => injected.extend([format!("--{key}"), other.to_string()]),
            }
        }
    }
    let mut out = args;
    out.splice(sub_at + 1..sub_at + 1, injected);
    Ok(out)
}

#[derive(Debug, thiserror::Error)]
#[error("{0}")]
struct UsageError(String);

fn run(cli: &Cli) -> anyhow::Result<()> {
    match &cli.command {
        Command::Pca(a) => cmd_pca(a),
        Command::Segment(a) => cmd_segment(a),
        Command::Import(a) => cmd_import(a),
        Command::EvalSpx(a) => cmd_eval_spx(a),
        Command::EvalCs(a) => cmd_eval_cs(a),
        Command::Rank(a) => cmd_rank(a),
        Command::Features(a) => cmd_features(a),
        Command::Classify(a) => cmd_classify(a),
        Command::SimulateCampaign(a) => cmd_campaign(a),
        Command::Report(a) => cmd_report(a),
        Command::Synth(a) => cmd_synth(a),
    }
}

fn error_line(err: &anyhow::Error) -> String {
    let kind = err
        .chain()
        .find_map(|e| e.downcast_ref::<Error>())
        .map_or("Error", Error::kind);
    serde_json::json!({ "error": kind, "message": format!("{err:#}") }).to_string()
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args = match inject_config(std::env::args().collect()) {
        Ok(a) => a,
        Err(e) => {
            let usage = e.downcast_ref::<UsageError>().is_some();
            eprintln!("{}", error_line(&e));
            return ExitCode::from(if usage { 2 } else { 1 });
        }
    };
    let cli = Cli::parse_from(args);
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            eprintln!("{}", error_line(&Error::InvalidConfig("--jobs must be at least 1".into()).into()));
            return ExitCode::from(2);
        }
        #[cfg(feature = "parallel")]
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global() {
            log::warn!("could not size the worker pool: {e}");
        }
    }
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", error_line(&e));
            ExitCode::from(1)
        }
    }
}
