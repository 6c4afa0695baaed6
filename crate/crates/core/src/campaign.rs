//! Organization of volunteer answers: majority answers, task difficulty
//! (vote entropy), campaign accuracy and training-sample selection.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::SegmentRecord;
use crate::raster::GtClass;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Answer {
    Forest,
    Deforest,
    Undefined,
}

impl Answer {
    pub fn name(self) -> &'static str {
        match self {
            Answer::Forest => "forest",
            Answer::Deforest => "deforest",
            Answer::Undefined => "undefined",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "forest" => Some(Answer::Forest),
            "deforest" => Some(Answer::Deforest),
            "undefined" => Some(Answer::Undefined),
            _ => None,
        }
    }

    pub fn class(self) -> Option<GtClass> {
        match self {
            Answer::Forest => Some(GtClass::Forest),
            Answer::Deforest => Some(GtClass::Deforest),
            Answer::Undefined => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskVotes {
    pub task_id: String,
    pub segment_id: u32,
    pub n_forest: u32,
    pub n_deforest: u32,
    pub n_undefined: u32,
}

impl TaskVotes {
    pub fn total(&self) -> u32 {
        self.n_forest + self.n_deforest + self.n_undefined
    }

    fn counts(&self) -> [u32; 3] {
        [self.n_forest, self.n_deforest, self.n_undefined]
    }
}

/// Answer with the strictly largest count; any tie for first place is `Undefined`.
pub fn majority_answer(task: &TaskVotes) -> Result<Answer> {
    if task.total() == 0 {
        return Err(Error::EmptyVotes {
            task: task.task_id.clone(),
        });
    }
    let c = task.counts();
    let max = *c.iter().max().unwrap();
    if c.iter().filter(|&&v| v == max).count() > 1 {
        return Ok(Answer::Undefined);
    }
    Ok([Answer::Forest, Answer::Deforest, Answer::Undefined][c.iter().position(|&v| v == max).unwrap()])
}

pub fn aggregate_votes(tasks: &[TaskVotes]) -> Result<Vec<Answer>> {
    tasks.iter().map(majority_answer).collect()
}

/// Shannon entropy in bits of the answer proportions, in `[0, log2 3]`.
pub fn task_entropy(task: &TaskVotes) -> f64 {
    let total = task.total() as f64;
    if total == 0.0 {
        return 0.0;
    }
    -task
        .counts()
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / total;
            p * p.log2()
        })
        .sum::<f64>()
}

/// Percent of tasks whose majority answer equals the segment's reference
/// majority class; `Undefined` majorities count as wrong.
pub fn campaign_accuracy(tasks: &[TaskVotes], majorities: &[Answer], records: &[SegmentRecord]) -> Result<f64> {
    if tasks.len() != majorities.len() {
        return Err(Error::DimensionMismatch("tasks and majorities differ in length".into()));
    }
    if tasks.is_empty() {
        return Err(Error::EmptyInput("no tasks".into()));
    }
    let by_id: HashMap<u32, &SegmentRecord> = records.iter().map(|r| (r.segment_id, r)).collect();
    let mut correct = 0usize;
    for (t, a) in tasks.iter().zip(majorities) {
        let rec = by_id.get(&t.segment_id).ok_or(Error::MissingSegment { segment: t.segment_id })?;
        if a.class() == Some(rec.majority) {
            correct += 1;
        }
    }
    Ok(100.0 * correct as f64 / tasks.len() as f64)
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Selection {
    /// `(segment_id, entropy)` sorted by entropy then id.
    pub forest: Vec<(u32, f64)>,
    pub deforest: Vec<(u32, f64)>,
}

impl Selection {
    pub fn len(&self) -> usize {
        self.forest.len() + self.deforest.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `(segment_id, class)` pairs, forest first.
    pub fn labeled(&self) -> Vec<(u32, GtClass)> {
        self.forest
            .iter()
            .map(|&(s, _)| (s, GtClass::Forest))
            .chain(self.deforest.iter().map(|&(s, _)| (s, GtClass::Deforest)))
            .collect()
    }
}

/// Segments whose majority is forest or deforestation with entropy at most
/// `entropy_max`, grouped by class.
pub fn select_samples(tasks: &[TaskVotes], majorities: &[Answer], entropy_max: f64) -> Selection {
    let mut sel = Selection::default();
    for (t, a) in tasks.iter().zip(majorities) {
        let h = task_entropy(t);
        if h > entropy_max {
            continue;
        }
        match a {
            Answer::Forest => sel.forest.push((t.segment_id, h)),
            Answer::Deforest => sel.deforest.push((t.segment_id, h)),
            Answer::Undefined => {}
        }
    }
    let by_entropy = |a: &(u32, f64), b: &(u32, f64)| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0));
    sel.forest.sort_by(by_entropy);
    sel.deforest.sort_by(by_entropy);
    sel
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VoteSynthesis {
    pub volunteers: u32,
    /// Probability that a volunteer answers anything other than the reference class.
    pub error_rate: f64,
    pub seed: u64,
}

impl Default for VoteSynthesis {
    fn default() -> Self {
        Self {
            volunteers: 10,
            error_rate: 0.1,
            seed: 42,
        }
    }
}

/// One task per record; each volunteer answers the record's majority class
/// with probability `1 - error_rate`, otherwise one of the two other answers
/// uniformly.
pub fn synthesize_votes(records: &[SegmentRecord], cfg: &VoteSynthesis) -> Result<Vec<TaskVotes>> {
    if cfg.volunteers == 0 || !(0.0..=1.0).contains(&cfg.error_rate) {
        return Err(Error::InvalidConfig(format!("invalid vote synthesis {cfg:?}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    Ok(records
        .iter()
        .map(|r| {
            let mut counts = [0u32; 3];
            let truth = usize::from(r.majority == GtClass::Deforest);
            for _ in 0..cfg.volunteers {
                let answer = if rng.random::<f64>() < cfg.error_rate {
                    let other = [1 - truth, 2];
                    other[rng.random_range(0..2)]
                } else {
                    truth
                };
                counts[answer] += 1;
            }
            TaskVotes {
                task_id: format!("t{:06}", r.segment_id),
                segment_id: r.segment_id,
                n_forest: counts[0],
                n_deforest: counts[1],
                n_undefined: counts[2],
            }
        })
        .collect())
}
