//! Superpixel segmenters and label-map post-processing.
//!
//! All segmenters read every band of the input raster as the pixel color
//! (normally the three PCA components) and use 4-connectivity throughout.

mod connectivity;
mod grid;
mod grow;
mod merge;
mod slic;

pub use connectivity::{connected_components, enforce_connectivity, is_connected_partition};
pub use grid::{grid_segment, GridLayout};
pub use grow::{seed_competition_segment, snic_segment};
pub use merge::merge_small_segments;
pub use slic::{slic_segment, slic_segment_with};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::{LabelMap, Raster};

/// Parameters shared by the native segmenters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SegmenterConfig {
    /// Target number of superpixels.
    pub k_desired: usize,
    /// Spatial weight `m` in `D = sqrt(d_color^2 + (d_xy / S)^2 * m^2)`.
    pub compactness: f64,
    /// Assignment/update rounds for the iterative clustering segmenter.
    pub iterations: usize,
    /// Minimum segment size enforced by [`merge_small_segments`].
    pub min_size: usize,
}

impl Default for SegmenterConfig {
    fn default() -> Self {
        Self {
            k_desired: 6000,
            compactness: 10.0,
            iterations: 10,
            min_size: 70,
        }
    }
}

impl SegmenterConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k_desired == 0 {
            return Err(Error::InvalidConfig("k_desired must be at least 1".into()));
        }
        if self.min_size == 0 {
            return Err(Error::InvalidConfig("min_size must be at least 1".into()));
        }
        if !(self.compactness.is_finite() && self.compactness > 0.0) {
            return Err(Error::InvalidConfig("compactness must be positive".into()));
        }
        Ok(())
    }

    pub(crate) fn check_against(&self, raster: &Raster) -> Result<()> {
        self.validate()?;
        let pixels = raster.pixel_count();
        if self.k_desired > pixels {
            return Err(Error::KTooLarge {
                k: self.k_desired,
                pixels,
            });
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Grid,
    Slic,
    Snic,
    Seedcomp,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [
        Algorithm::Grid,
        Algorithm::Slic,
        Algorithm::Snic,
        Algorithm::Seedcomp,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Grid => "grid",
            Algorithm::Slic => "slic",
            Algorithm::Snic => "snic",
            Algorithm::Seedcomp => "seedcomp",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|a| a.name() == s)
    }

    pub fn run(self, raster: &Raster, cfg: &SegmenterConfig) -> Result<LabelMap> {
        match self {
            Algorithm::Grid => grid_segment(raster, cfg),
            Algorithm::Slic => slic_segment(raster, cfg),
            Algorithm::Snic => snic_segment(raster, cfg),
            Algorithm::Seedcomp => seed_competition_segment(raster, cfg),
        }
    }
}

/// Enforces connectivity and merges segments below `min_size`. Applied to
/// native output and to imported label maps alike.
pub fn postprocess(labels: &LabelMap, raster: &Raster, min_size: usize) -> Result<LabelMap> {
    let connected = enforce_connectivity(labels);
    merge_small_segments(&connected, raster, min_size)
}

#[inline]
pub(crate) fn color_dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}
