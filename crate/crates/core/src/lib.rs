//! Superpixel segmentation and evaluation for multi-band remote-sensing rasters.
//!
//! The crate covers the whole desk-scale pipeline used to pick segmenters for
//! citizen-science deforestation campaigns:
//!
//! * [`raster`] and [`io`]: images, label maps, ground truth and their file formats.
//! * [`preprocess`]: PCA band reduction and byte-range rescaling.
//! * [`segment`]: grid, SLIC-style, SNIC-style and seed-competition segmenters,
//!   plus connectivity enforcement and small-segment merging.
//! * [`metrics`]: classical superpixel measures (BR, UE, SIRS, CO, Reg) and the
//!   homogeneity-rate based campaign measures (US, DS, PHoR, EP).
//! * [`ranking`]: per-metric competition ranks and the two-tier score aggregation.
//! * [`features`] and [`knn`]: per-segment Haralick texture descriptors and a kNN classifier.
//! * [`campaign`]: volunteer vote aggregation, task entropy and sample selection.
//! * [`pipeline`], [`synthetic`] and [`tables`]: the end-to-end run, seeded test scenes and CSV artifacts.
//!
//! Hot per-pixel and per-segment loops go through [`Backend`], which uses rayon
//! when the `parallel` feature is enabled (the default) and plain iterators otherwise.

pub mod campaign;
pub mod error;
pub mod features;
pub mod io;
pub mod knn;
pub mod metrics;
pub mod par;
pub mod pipeline;
pub mod preprocess;
pub mod ranking;
pub mod raster;
pub mod segment;
pub mod synthetic;
pub mod tables;

pub use error::{Error, Result};
pub use par::Backend;
pub use raster::{GroundTruth, GtClass, LabelMap, Raster};
