//! Core image, label and ground-truth types.

use crate::error::{Error, Result};

/// A `width x height x bands` float image stored band-sequentially,
/// row-major within each band.
#[derive(Clone, Debug, PartialEq)]
pub struct Raster {
    width: usize,
    height: usize,
    bands: usize,
    data: Vec<f32>,
}

impl Raster {
    pub fn new(width: usize, height: usize, bands: usize, data: Vec<f32>) -> Result<Self> {
        if width == 0 || height == 0 || bands == 0 {
            return Err(Error::InvalidDimensions(format!(
                "raster must be at least 1x1x1, got {width}x{height}x{bands}"
            )));
        }
        let expected = width
            .checked_mul(height)
            .and_then(|n| n.checked_mul(bands))
            .ok_or_else(|| Error::InvalidDimensions("raster size overflows".into()))?;
        if data.len() != expected {
            return Err(Error::InvalidDimensions(format!(
                "data length {} does not match {width}x{height}x{bands}",
                data.len()
            )));
        }
        if let Some(index) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteValue { index });
        }
        Ok(Self {
            width,
            height,
            bands,
            data,
        })
    }

    /// Builds a raster from per-band planes of equal length.
    pub fn from_bands(width: usize, height: usize, planes: &[Vec<f32>]) -> Result<Self> {
        let mut data = Vec::with_capacity(width * height * planes.len());
        for p in planes {
            if p.len() != width * height {
                return Err(Error::InvalidDimensions(format!(
                    "band plane has {} values, expected {}",
                    p.len(),
                    width * height
                )));
            }
            data.extend_from_slice(p);
        }
        Self::new(width, height, planes.len(), data)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn bands(&self) -> usize {
        self.bands
    }

    pub fn pixel_count(&self) -> usize {
        self.width * self.height
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f32> {
        self.data
    }

    pub fn band(&self, b: usize) -> &[f32] {
        let n = self.pixel_count();
        &self.data[b * n..(b + 1) * n]
    }

    #[inline]
    pub fn value(&self, band: usize, pixel: usize) -> f32 {
        self.data[band * self.pixel_count() + pixel]
    }

    /// Copies the values of one pixel across all bands into `out`.
    #[inline]
    pub fn pixel_into(&self, pixel: usize, out: &mut [f64]) {
        let n = self.pixel_count();
        for (b, o) in out.iter_mut().enumerate().take(self.bands) {
            *o = self.data[b * n + pixel] as f64;
        }
    }

    /// Pixel-interleaved copy in f64, `bands` values per pixel.
    pub fn interleaved_f64(&self) -> Vec<f64> {
        let n = self.pixel_count();
        let mut out = vec![0.0; n * self.bands];
        for b in 0..self.bands {
            for (p, &v) in self.band(b).iter().enumerate() {
                out[p * self.bands + b] = v as f64;
            }
        }
        out
    }

    pub fn same_shape(&self, width: usize, height: usize) -> bool {
        self.width == width && self.height == height
    }
}

/// Per-pixel segment ids, always normalized to `0..k` in first-occurrence order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabelMap {
    width: usize,
    height: usize,
    labels: Vec<u32>,
    k: usize,
}

impl LabelMap {
    /// Builds a label map from arbitrary ids, renumbering them to `0..k` in
    /// row-major first-occurrence order.
    pub fn from_raw(width: usize, height: usize, labels: Vec<u32>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidDimensions(format!(
                "label map must be at least 1x1, got {width}x{height}"
            )));
        }
        if labels.len() != width * height {
            return Err(Error::InvalidDimensions(format!(
                "label count {} does not match {width}x{height}",
                labels.len()
            )));
        }
        let (labels, k) = normalize_labels(labels);
        Ok(Self {
            width,
            height,
            labels,
            k,
        })
    }

    pub(crate) fn from_normalized(width: usize, height: usize, labels: Vec<u32>, k: usize) -> Self {
        debug_assert_eq!(labels.len(), width * height);
        Self {
            width,
            height,
            labels,
            k,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Number of distinct labels.
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u32 {
        self.labels[y * self.width + x]
    }

    /// Pixel count of every segment, indexed by label.
    pub fn sizes(&self) -> Vec<usize> {
        let mut s = vec![0usize; self.k];
        for &l in &self.labels {
            s[l as usize] += 1;
        }
        s
    }

    pub fn check_shape(&self, width: usize, height: usize, what: &str) -> Result<()> {
        if self.width != width || self.height != height {
            return Err(Error::DimensionMismatch(format!(
                "label map is {}x{}, {what} is {width}x{height}",
                self.width, self.height
            )));
        }
        Ok(())
    }
}

/// Renumbers ids to `0..k` in first-occurrence order and returns `k`.
pub fn normalize_labels(mut labels: Vec<u32>) -> (Vec<u32>, usize) {
    let mut map = std::collections::HashMap::new();
    for l in labels.iter_mut() {
        let next = map.len() as u32;
        *l = *map.entry(*l).or_insert(next);
    }
    let k = map.len();
    (labels, k)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GtClass {
    Forest,
    Deforest,
    Excluded,
}

impl GtClass {
    pub fn is_valid(self) -> bool {
        self != GtClass::Excluded
    }

    pub fn from_byte(v: u8) -> Option<Self> {
        match v {
            0 => Some(GtClass::Forest),
            255 => Some(GtClass::Deforest),
            128 => Some(GtClass::Excluded),
            _ => None,
        }
    }

    pub fn to_byte(self) -> u8 {
        match self {
            GtClass::Forest => 0,
            GtClass::Deforest => 255,
            GtClass::Excluded => 128,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            GtClass::Forest => "forest",
            GtClass::Deforest => "deforest",
            GtClass::Excluded => "excluded",
        }
    }
}

/// Per-pixel reference classes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroundTruth {
    width: usize,
    height: usize,
    classes: Vec<GtClass>,
}

impl GroundTruth {
    pub fn new(width: usize, height: usize, classes: Vec<GtClass>) -> Result<Self> {
        if width == 0 || height == 0 || classes.len() != width * height {
            return Err(Error::InvalidDimensions(format!(
                "ground truth of {} pixels does not match {width}x{height}",
                classes.len()
            )));
        }
        Ok(Self {
            width,
            height,
            classes,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn classes(&self) -> &[GtClass] {
        &self.classes
    }

    #[inline]
    pub fn class(&self, pixel: usize) -> GtClass {
        self.classes[pixel]
    }

    pub fn valid_count(&self) -> usize {
        self.classes.iter().filter(|c| c.is_valid()).count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn renumbering_examples() {
        let m = LabelMap::from_raw(2, 2, vec![5, 5, 9, 9]).unwrap();
        assert_eq!(m.labels(), &[0, 0, 1, 1]);
        assert_eq!(m.k(), 2);

        let m = LabelMap::from_raw(4, 4, vec![7; 16]).unwrap();
        assert!(m.labels().iter().all(|&l| l == 0));
        assert_eq!(m.k(), 1);

        let m = LabelMap::from_raw(2, 2, vec![3, 1, 3, 1]).unwrap();
        assert_eq!(m.labels(), &[0, 1, 0, 1]);
        assert_eq!(m.k(), 2);
    }

    #[test]
    fn raster_rejects_bad_shapes() {
        assert!(Raster::new(0, 1, 1, vec![]).is_err());
        assert!(Raster::new(2, 2, 1, vec![0.0; 3]).is_err());
        assert!(matches!(
            Raster::new(1, 1, 1, vec![f32::NAN]),
            Err(Error::NonFiniteValue { index: 0 })
        ));
    }

    proptest! {
        #[test]
        fn normalization_is_idempotent(raw in proptest::collection::vec(0u32..20, 1..64)) {
            let n = raw.len();
            let once = LabelMap::from_raw(n, 1, raw).unwrap();
            let twice = LabelMap::from_raw(n, 1, once.labels().to_vec()).unwrap();
            prop_assert_eq!(&once, &twice);
            let mut seen = vec![false; once.k()];
            for &l in once.labels() { seen[l as usize] = true; }
            prop_assert!(seen.iter().all(|&s| s));
        }
    }
}
