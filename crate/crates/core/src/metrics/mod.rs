//! Segmentation quality measures.

pub mod cs;
pub mod spx;

pub use cs::{
    compute_cs_counts, compute_cs_summary, compute_segment_records, CsCounts, CsSummary, SegmentRecord,
    MIN_USEFUL_SIZE,
};
pub use spx::{
    boundary_radius, boundary_recall, boundary_recall_with, compactness, evaluate_spx, evaluate_spx_with,
    regularity, sirs_score, sirs_score_with, undersegmentation_error, undersegmentation_error_against,
    SirsParams, SpxMetricReport,
};
