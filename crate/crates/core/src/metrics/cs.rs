//! Homogeneity-rate based measures of how suitable segments are for
//! volunteer labeling.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::{GroundTruth, GtClass, LabelMap};

/// Segments need at least this many valid pixels to be useful.
pub const MIN_USEFUL_SIZE: usize = 70;
/// Useful segments need `HoR >= MIN_HOR_NUM / MIN_HOR_DEN`.
const MIN_HOR_NUM: usize = 7;
const MIN_HOR_DEN: usize = 10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SegmentRecord {
    pub segment_id: u32,
    /// Valid (non-excluded) pixels.
    pub size: usize,
    pub n_forest: usize,
    pub n_deforest: usize,
    /// Fraction of valid pixels in the majority class.
    pub hor: f64,
    pub majority: GtClass,
    pub useful: bool,
}

impl SegmentRecord {
    /// Builds a record from class counts. Equal counts resolve to forest.
    pub fn from_counts(segment_id: u32, n_forest: usize, n_deforest: usize) -> Self {
        let size = n_forest + n_deforest;
        let (major, majority) = if n_deforest > n_forest {
            (n_deforest, GtClass::Deforest)
        } else {
            (n_forest, GtClass::Forest)
        };
        let hor = if size > 0 { major as f64 / size as f64 } else { 1.0 };
        // integer form of hor >= 0.7
        let useful = size >= MIN_USEFUL_SIZE && major * MIN_HOR_DEN >= MIN_HOR_NUM * size;
        Self {
            segment_id,
            size,
            n_forest,
            n_deforest,
            hor,
            majority,
            useful,
        }
    }

    pub fn minority(&self) -> usize {
        self.n_forest.min(self.n_deforest)
    }

    pub fn is_pure(&self) -> bool {
        self.minority() == 0
    }
}

/// One record per label that has at least one valid pixel, plus the number
/// of labels that were omitted because they cover only excluded pixels.
pub fn compute_segment_records(labels: &LabelMap, gt: &GroundTruth) -> Result<(Vec<SegmentRecord>, usize)> {
    labels.check_shape(gt.width(), gt.height(), "ground truth")?;
    let mut counts = vec![[0usize; 2]; labels.k()];
    for (&l, &c) in labels.labels().iter().zip(gt.classes()) {
        match c {
            GtClass::Forest => counts[l as usize][0] += 1,
            GtClass::Deforest => counts[l as usize][1] += 1,
            GtClass::Excluded => {}
        }
    }
    let mut omitted = 0;
    let records = counts
        .iter()
        .enumerate()
        .filter_map(|(s, &[f, d])| {
            if f + d == 0 {
                omitted += 1;
                None
            } else {
                Some(SegmentRecord::from_counts(s as u32, f, d))
            }
        })
        .collect();
    Ok((records, omitted))
}

/// Integer tallies behind [`CsSummary`].
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CsCounts {
    pub n_segments: usize,
    pub n_useful: usize,
    pub n_useful_deforest: usize,
    pub n_perfect: usize,
    pub useful_minority_pixels: usize,
    pub useful_pixels: usize,
}

/// Percentages in `[0, 100]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CsSummary {
    /// Useful segments among all segments.
    pub us: f64,
    /// Deforestation-majority segments among useful segments.
    pub ds: f64,
    /// Pure segments (HoR = 1) among all segments.
    pub phor: f64,
    /// Minority-class pixels among pixels of useful segments.
    pub ep: f64,
    pub n_segments: usize,
    pub n_useful: usize,
}

pub fn compute_cs_counts(records: &[SegmentRecord]) -> CsCounts {
    let mut c = CsCounts {
        n_segments: records.len(),
        ..Default::default()
    };
    for r in records {
        if r.is_pure() {
            c.n_perfect += 1;
        }
        if r.useful {
            c.n_useful += 1;
            c.useful_pixels += r.size;
            c.useful_minority_pixels += r.minority();
            if r.majority == GtClass::Deforest {
                c.n_useful_deforest += 1;
            }
        }
    }
    c
}

fn percent(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        100.0 * num as f64 / den as f64
    }
}

impl CsCounts {
    pub fn summary(&self) -> CsSummary {
        CsSummary {
            us: percent(self.n_useful, self.n_segments),
            ds: percent(self.n_useful_deforest, self.n_useful),
            phor: percent(self.n_perfect, self.n_segments),
            ep: percent(self.useful_minority_pixels, self.useful_pixels),
            n_segments: self.n_segments,
            n_useful: self.n_useful,
        }
    }
}

pub fn compute_cs_summary(records: &[SegmentRecord]) -> Result<CsSummary> {
    if records.is_empty() {
        return Err(Error::EmptyInput("no segment records".into()));
    }
    Ok(compute_cs_counts(records).summary())
}
