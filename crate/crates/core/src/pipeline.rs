//! End-to-end run on one scene: band reduction, segmentation, evaluation,
//! simulated campaign, sample selection, texture features and classification.

use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::campaign::{
    aggregate_votes, campaign_accuracy, select_samples, synthesize_votes, task_entropy, Answer, Selection, TaskVotes,
    VoteSynthesis,
};
use crate::error::{Error, Result};
use crate::features::{extract_features_with, FeatureVector, GlcmParams};
use crate::knn::{score, ClassMetrics, KnnClassifier};
use crate::metrics::{compute_cs_summary, compute_segment_records, evaluate_spx_with, CsSummary, SegmentRecord, SirsParams, SpxMetricReport};
use crate::par::Backend;
use crate::preprocess::{pca_fit_project, rescale_to_byte_range};
use crate::raster::{GroundTruth, GtClass, LabelMap, Raster};
use crate::segment::{postprocess, Algorithm, SegmenterConfig};
use crate::tables::{self, CsRow, Prediction, SpxRow};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub components: usize,
    pub algorithm: Algorithm,
    pub segmenter: SegmenterConfig,
    pub sirs: SirsParams,
    pub glcm: GlcmParams,
    pub knn_k: usize,
    pub entropy_max: f64,
    pub votes: VoteSynthesis,
    /// Seed of the campaign / held-out split of useful segments.
    pub split_seed: u64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            components: 3,
            algorithm: Algorithm::Slic,
            segmenter: SegmenterConfig::default(),
            sirs: SirsParams::default(),
            glcm: GlcmParams::default(),
            knn_k: 5,
            entropy_max: 0.9,
            votes: VoteSynthesis::default(),
            split_seed: 1,
        }
    }
}

#[derive(Clone, Debug)]
pub struct PipelineOutput {
    /// Rescaled PCA composition the segmenter and features ran on.
    pub composition: Raster,
    pub labels: LabelMap,
    pub spx: SpxMetricReport,
    pub cs: CsSummary,
    pub records: Vec<SegmentRecord>,
    pub tasks: Vec<TaskVotes>,
    pub majorities: Vec<Answer>,
    pub campaign_accuracy: f64,
    pub selection: Selection,
    pub train: Vec<FeatureVector>,
    pub test: Vec<FeatureVector>,
    pub predictions: Vec<Prediction>,
    pub metrics: ClassMetrics,
}

/// PCA over non-excluded pixels followed by per-band byte-range rescaling.
pub fn compose(raster: &Raster, gt: Option<&GroundTruth>, components: usize) -> Result<Raster> {
    let (_, projected) = pca_fit_project(raster, components, gt)?;
    Ok(rescale_to_byte_range(&projected))
}

/// Useful segments split into (campaign, held-out) halves, each sorted by id.
pub fn split_useful(records: &[SegmentRecord], seed: u64) -> (Vec<SegmentRecord>, Vec<SegmentRecord>) {
    let mut useful: Vec<SegmentRecord> = records.iter().filter(|r| r.useful).cloned().collect();
    useful.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let held_out = useful.split_off(useful.len() / 2);
    let mut campaign = useful;
    let mut held_out = held_out;
    campaign.sort_by_key(|r| r.segment_id);
    held_out.sort_by_key(|r| r.segment_id);
    (campaign, held_out)
}

pub fn run_pipeline(raster: &Raster, gt: &GroundTruth, cfg: &PipelineConfig, backend: Backend) -> Result<PipelineOutput> {
    let composition = compose(raster, Some(gt), cfg.components)?;
    let raw = cfg.algorithm.run(&composition, &cfg.segmenter)?;
    let labels = postprocess(&raw, &composition, cfg.segmenter.min_size)?;
    let spx = evaluate_spx_with(backend, &labels, gt, &composition, &cfg.sirs)?;
    let (records, _) = compute_segment_records(&labels, gt)?;
    let cs = compute_cs_summary(&records)?;

    let (campaign, held_out) = split_useful(&records, cfg.split_seed);
    if campaign.is_empty() || held_out.is_empty() {
        return Err(Error::EmptyInput("too few useful segments for a campaign and a held-out set".into()));
    }
    let tasks = synthesize_votes(&campaign, &cfg.votes)?;
    let majorities = aggregate_votes(&tasks)?;
    let accuracy = campaign_accuracy(&tasks, &majorities, &campaign)?;
    let selection = select_samples(&tasks, &majorities, cfg.entropy_max);
    if selection.is_empty() {
        return Err(Error::EmptyTrainingSet);
    }

    let labeled = selection.labeled();
    let train_ids: Vec<u32> = labeled.iter().map(|&(s, _)| s).collect();
    let mut train = extract_features_with(backend, &composition, &labels, &train_ids, &cfg.glcm)?;
    for (f, &(_, c)) in train.iter_mut().zip(&labeled) {
        f.class_label = Some(c);
    }
    let test_ids: Vec<u32> = held_out.iter().map(|r| r.segment_id).collect();
    let mut test = extract_features_with(backend, &composition, &labels, &test_ids, &cfg.glcm)?;
    for (f, r) in test.iter_mut().zip(&held_out) {
        f.class_label = Some(r.majority);
    }

    let train_pairs: Vec<(Vec<f64>, GtClass)> = train
        .iter()
        .map(|f| (f.values.clone(), f.class_label.expect("train labels set above")))
        .collect();
    let model = KnnClassifier::fit(&train_pairs, cfg.knn_k)?;
    let vectors: Vec<Vec<f64>> = test.iter().map(|f| f.values.clone()).collect();
    let predicted = model.predict_with(backend, &vectors)?;
    let actual: Vec<GtClass> = held_out.iter().map(|r| r.majority).collect();
    let metrics = score(&predicted, &actual)?;
    let predictions = test
        .iter()
        .zip(&predicted)
        .map(|(f, &p)| Prediction {
            segment_id: f.segment_id,
            predicted: p,
            actual: f.class_label,
        })
        .collect();

    Ok(PipelineOutput {
        composition,
        labels,
        spx,
        cs,
        records,
        tasks,
        majorities,
        campaign_accuracy: accuracy,
        selection,
        train,
        test,
        predictions,
        metrics,
    })
}

/// CSV artifacts of a run, keyed by file name, each with its metadata lines.
pub fn render_outputs<T: Serialize>(out: &PipelineOutput, method: &str, image: &str, config: &T) -> Vec<(String, String)> {
    let pre = |what: &str| tables::preamble(&format!("report/{what}"), config);
    let entropies: Vec<f64> = out.tasks.iter().map(task_entropy).collect();
    let mut train_and_test = out.train.clone();
    train_and_test.extend(out.test.iter().cloned());
    vec![
        (
            "spx.csv".into(),
            pre("spx")
                + &tables::spx_csv(&[SpxRow {
                    method: method.into(),
                    image: image.into(),
                    report: out.spx.clone(),
                }]),
        ),
        (
            "cs.csv".into(),
            pre("cs")
                + &tables::cs_csv(&[CsRow {
                    method: method.into(),
                    image: image.into(),
                    summary: out.cs.clone(),
                }]),
        ),
        ("records.csv".into(), pre("records") + &tables::records_csv(&out.records)),
        ("votes.csv".into(), pre("votes") + &tables::votes_csv(&out.tasks)),
        (
            "tasks.csv".into(),
            pre("tasks") + &tables::tasks_csv(&out.tasks, &out.majorities, &entropies),
        ),
        ("selection.csv".into(), pre("selection") + &tables::selection_csv(&out.selection)),
        ("train_features.csv".into(), pre("train_features") + &tables::features_csv(&out.train)),
        ("test_features.csv".into(), pre("test_features") + &tables::features_csv(&out.test)),
        ("predictions.csv".into(), pre("predictions") + &tables::predictions_csv(&out.predictions)),
    ]
}

/// Markdown digest of a run.
pub fn render_summary(out: &PipelineOutput, method: &str, image: &str) -> String {
    let s = &out.spx;
    let c = &out.cs;
    let m = &out.metrics;
    format!(
        "# {method} on {image}\n\n\
         | BR | UE | SIRS | CO | Reg | k |\n|---|---|---|---|---|---|\n| {:.4} | {:.4} | {:.4} | {:.4} | {:.2} | {} |\n\n\
         | US | DS | PHoR | EP | segments | useful |\n|---|---|---|---|---|---|\n| {:.2} | {:.2} | {:.2} | {:.2} | {} | {} |\n\n\
         Campaign: {} tasks, volunteer accuracy {:.2}%, {} forest and {} deforestation samples selected.\n\n\
         Classifier: accuracy {:.4}, F1 forest {:.4}, F1 deforestation {:.4} on {} held-out useful segments.\n",
        s.br,
        s.ue,
        s.sirs,
        s.co,
        s.reg,
        s.k_final,
        c.us,
        c.ds,
        c.phor,
        c.ep,
        c.n_segments,
        c.n_useful,
        out.tasks.len(),
        out.campaign_accuracy,
        out.selection.forest.len(),
        out.selection.deforest.len(),
        m.accuracy,
        m.f1_forest,
        m.f1_deforest,
        m.n_test,
    )
}

/// Writes every CSV artifact, the label map and `summary.md` into `dir`.
pub fn write_outputs<T: Serialize>(dir: &Path, out: &PipelineOutput, method: &str, image: &str, config: &T) -> Result<()> {
    for (name, text) in render_outputs(out, method, image, config) {
        tables::write_text(&dir.join(name), &text)?;
    }
    crate::io::save_label_map(dir.join("labels.fel1"), &out.labels)?;
    tables::write_text(&dir.join("summary.md"), &render_summary(out, method, image))
}
