//! Per-segment Haralick texture descriptors.
//!
//! For every channel the segment's pixels are quantized to `levels` gray
//! levels and a symmetric, normalized co-occurrence matrix is built at
//! distance 1 for the 0°, 45°, 90° and 135° directions, counting only pixel
//! pairs that both lie inside the segment. Thirteen Haralick features are
//! computed per matrix and concatenated channel-major, direction-minor.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par::Backend;
use crate::raster::{GtClass, LabelMap, Raster};

pub const N_HARALICK: usize = 13;
pub const N_DIRECTIONS: usize = 4;
pub const MIN_SEGMENT_PIXELS: usize = 4;

/// `(dx, dy)` offsets for 0°, 45°, 90° and 135°; y grows downwards.
pub const DIRECTIONS: [(isize, isize); N_DIRECTIONS] = [(1, 0), (1, -1), (0, -1), (-1, -1)];

pub const FEATURE_NAMES: [&str; N_HARALICK] = [
    "asm",
    "contrast",
    "correlation",
    "variance",
    "idm",
    "sum_avg",
    "sum_var",
    "sum_entropy",
    "entropy",
    "diff_var",
    "diff_entropy",
    "imc1",
    "imc2",
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GlcmParams {
    /// Gray levels after quantization of `[0, 255]`.
    pub levels: usize,
}

impl Default for GlcmParams {
    fn default() -> Self {
        Self { levels: 32 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub segment_id: u32,
    pub values: Vec<f64>,
    pub class_label: Option<GtClass>,
    /// `(channel, direction)` pairs that had no in-segment pixel pairs; their
    /// features are zero.
    pub empty_directions: Vec<(usize, usize)>,
}

/// Column names matching [`FeatureVector::values`] for a raster with `channels` bands.
pub fn feature_columns(channels: usize) -> Vec<String> {
    let mut out = Vec::with_capacity(channels * N_DIRECTIONS * N_HARALICK);
    for c in 0..channels {
        for d in 0..N_DIRECTIONS {
            for f in FEATURE_NAMES {
                out.push(format!("c{c}_d{}_{f}", d * 45));
            }
        }
    }
    out
}

#[inline]
pub fn quantize(v: f32, levels: usize) -> usize {
    ((v.max(0.0) as f64 * levels as f64 / 256.0).floor() as usize).min(levels - 1)
}

/// Symmetric co-occurrence counts for one direction, row-major `levels x levels`.
/// Returns the number of unordered pixel pairs.
fn glcm_counts(
    quantized: &[u16],
    labels: &LabelMap,
    segment: u32,
    members: &[u32],
    offset: (isize, isize),
    levels: usize,
    counts: &mut [f64],
) -> usize {
    counts.iter_mut().for_each(|c| *c = 0.0);
    let (w, h) = (labels.width() as isize, labels.height() as isize);
    let mut pairs = 0;
    for &p in members {
        let (x, y) = ((p as isize) % w, (p as isize) / w);
        let (qx, qy) = (x + offset.0, y + offset.1);
        if qx < 0 || qy < 0 || qx >= w || qy >= h {
            continue;
        }
        let q = (qy * w + qx) as usize;
        if labels.labels()[q] != segment {
            continue;
        }
        let (a, b) = (quantized[p as usize] as usize, quantized[q] as usize);
        counts[a * levels + b] += 1.0;
        counts[b * levels + a] += 1.0;
        pairs += 1;
    }
    pairs
}

fn plog2(p: f64) -> f64 {
    if p > 0.0 {
        p * p.log2()
    } else {
        0.0
    }
}

/// The thirteen Haralick features of a normalized co-occurrence matrix.
pub fn haralick(p: &[f64], levels: usize) -> [f64; N_HARALICK] {
    let g = levels;
    let mut px = vec![0.0; g];
    let mut py = vec![0.0; g];
    let mut p_sum = vec![0.0; 2 * g - 1];
    let mut p_diff = vec![0.0; g];
    for i in 0..g {
        for j in 0..g {
            let v = p[i * g + j];
            px[i] += v;
            py[j] += v;
            p_sum[i + j] += v;
            p_diff[i.abs_diff(j)] += v;
        }
    }
    let mux: f64 = px.iter().enumerate().map(|(i, v)| i as f64 * v).sum();
    let muy: f64 = py.iter().enumerate().map(|(j, v)| j as f64 * v).sum();
    let varx: f64 = px.iter().enumerate().map(|(i, v)| (i as f64 - mux).powi(2) * v).sum();
    let vary: f64 = py.iter().enumerate().map(|(j, v)| (j as f64 - muy).powi(2) * v).sum();

    let mut asm = 0.0;
    let mut contrast = 0.0;
    let mut cross = 0.0;
    let mut idm = 0.0;
    let mut entropy = 0.0;
    let mut hxy1 = 0.0;
    let mut hxy2 = 0.0;
    for i in 0..g {
        for j in 0..g {
            let v = p[i * g + j];
            let d = i as f64 - j as f64;
            asm += v * v;
            contrast += d * d * v;
            cross += (i as f64 - mux) * (j as f64 - muy) * v;
            idm += v / (1.0 + d * d);
            entropy -= plog2(v);
            let pp = px[i] * py[j];
            if pp > 0.0 {
                hxy1 -= v * pp.log2();
                hxy2 -= plog2(pp);
            }
        }
    }
    let correlation = if varx > 0.0 && vary > 0.0 {
        cross / (varx * vary).sqrt()
    } else {
        0.0
    };
    let sum_avg: f64 = p_sum.iter().enumerate().map(|(k, v)| k as f64 * v).sum();
    let sum_var: f64 = p_sum.iter().enumerate().map(|(k, v)| (k as f64 - sum_avg).powi(2) * v).sum();
    let sum_entropy: f64 = -p_sum.iter().map(|&v| plog2(v)).sum::<f64>();
    let diff_mean: f64 = p_diff.iter().enumerate().map(|(k, v)| k as f64 * v).sum();
    let diff_var: f64 = p_diff.iter().enumerate().map(|(k, v)| (k as f64 - diff_mean).powi(2) * v).sum();
    let diff_entropy: f64 = -p_diff.iter().map(|&v| plog2(v)).sum::<f64>();
    let hx: f64 = -px.iter().map(|&v| plog2(v)).sum::<f64>();
    let hy: f64 = -py.iter().map(|&v| plog2(v)).sum::<f64>();
    let hmax = hx.max(hy);
    let imc1 = if hmax > 0.0 { (entropy - hxy1) / hmax } else { 0.0 };
    let imc2 = (1.0 - (-2.0 * (hxy2 - entropy)).exp()).max(0.0).sqrt();

    [
        asm,
        contrast,
        correlation,
        varx,
        idm,
        sum_avg,
        sum_var,
        sum_entropy,
        entropy,
        diff_var,
        diff_entropy,
        imc1,
        imc2,
    ]
}

/// Quantized gray levels of every band, band-sequential.
pub fn quantize_raster(raster: &Raster, levels: usize) -> Vec<u16> {
    raster.data().iter().map(|&v| quantize(v, levels) as u16).collect()
}

/// Features of one segment, given its member pixels (row-major).
fn segment_features(
    raster: &Raster,
    quantized: &[u16],
    labels: &LabelMap,
    segment: u32,
    members: &[u32],
    levels: usize,
) -> Result<FeatureVector> {
    if members.len() < MIN_SEGMENT_PIXELS {
        return Err(Error::SegmentTooSmall {
            segment,
            size: members.len(),
            min: MIN_SEGMENT_PIXELS,
        });
    }
    let n = raster.pixel_count();
    let mut values = Vec::with_capacity(raster.bands() * N_DIRECTIONS * N_HARALICK);
    let mut empty = Vec::new();
    let mut counts = vec![0.0; levels * levels];
    for c in 0..raster.bands() {
        let q = &quantized[c * n..(c + 1) * n];
        for (d, &off) in DIRECTIONS.iter().enumerate() {
            let pairs = glcm_counts(q, labels, segment, members, off, levels, &mut counts);
            if pairs == 0 {
                empty.push((c, d));
                values.extend([0.0; N_HARALICK]);
                continue;
            }
            let total = 2.0 * pairs as f64;
            counts.iter_mut().for_each(|v| *v /= total);
            values.extend(haralick(&counts, levels));
        }
    }
    Ok(FeatureVector {
        segment_id: segment,
        values,
        class_label: None,
        empty_directions: empty,
    })
}

/// Features of a single segment. The raster must already be in `[0, 255]`.
pub fn glcm_features(raster: &Raster, labels: &LabelMap, segment_id: u32, params: &GlcmParams) -> Result<FeatureVector> {
    check(raster, labels, params)?;
    let members: Vec<u32> = labels
        .labels()
        .iter()
        .enumerate()
        .filter(|(_, &l)| l == segment_id)
        .map(|(p, _)| p as u32)
        .collect();
    let quantized = quantize_raster(raster, params.levels);
    segment_features(raster, &quantized, labels, segment_id, &members, params.levels)
}

fn check(raster: &Raster, labels: &LabelMap, params: &GlcmParams) -> Result<()> {
    labels.check_shape(raster.width(), raster.height(), "raster")?;
    if params.levels < 2 || params.levels > 256 {
        return Err(Error::InvalidConfig(format!(
            "GLCM levels must be in 2..=256, got {}",
            params.levels
        )));
    }
    Ok(())
}

/// Features for the given segments, in the given order.
pub fn extract_features(
    raster: &Raster,
    labels: &LabelMap,
    segments: &[u32],
    params: &GlcmParams,
) -> Result<Vec<FeatureVector>> {
    extract_features_with(Backend::default(), raster, labels, segments, params)
}

pub fn extract_features_with(
    backend: Backend,
    raster: &Raster,
    labels: &LabelMap,
    segments: &[u32],
    params: &GlcmParams,
) -> Result<Vec<FeatureVector>> {
    check(raster, labels, params)?;
    if let Some(&s) = segments.iter().find(|&&s| s as usize >= labels.k()) {
        return Err(Error::InvalidConfig(format!("segment {s} does not exist")));
    }
    let (offsets, pixels) = crate::metrics::spx::pixels_by_label(labels);
    let quantized = quantize_raster(raster, params.levels);
    backend
        .map_slice(segments, |&s| {
            let members = &pixels[offsets[s as usize]..offsets[s as usize + 1]];
            segment_features(raster, &quantized, labels, s, members, params.levels)
        })
        .into_iter()
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_segment() {
        let r = Raster::new(4, 4, 3, vec![100.0; 48]).unwrap();
        let l = LabelMap::from_raw(4, 4, vec![0; 16]).unwrap();
        let f = glcm_features(&r, &l, 0, &GlcmParams::default()).unwrap();
        assert_eq!(f.values.len(), 3 * 4 * 13);
        for block in f.values.chunks(N_HARALICK) {
            assert_eq!(block[0], 1.0);
            assert_eq!(block[1], 0.0);
            assert_eq!(block[8], 0.0);
        }
        assert!(f.empty_directions.is_empty());
    }

    #[test]
    fn vertical_two_by_two() {
        // top row 0, bottom row 255: horizontal pairs are same-level,
        // vertical pairs are all (0, 31)
        let v = vec![0.0, 0.0, 255.0, 255.0];
        let r = Raster::from_bands(2, 2, &[v.clone(), v.clone(), v]).unwrap();
        let l = LabelMap::from_raw(2, 2, vec![0; 4]).unwrap();
        let f = glcm_features(&r, &l, 0, &GlcmParams::default()).unwrap();
        let at = |c: usize, d: usize, k: usize| f.values[(c * 4 + d) * 13 + k];
        for c in 0..3 {
            assert_eq!(at(c, 0, 1), 0.0);
            assert_eq!(at(c, 2, 1), 961.0);
        }
    }

    #[test]
    fn too_small_and_isolated() {
        let r = Raster::new(3, 3, 1, vec![1.0; 9]).unwrap();
        let l = LabelMap::from_raw(3, 3, vec![0, 1, 0, 1, 0, 1, 0, 1, 0]).unwrap();
        // label 0 is the 5-pixel checkerboard: only diagonal pairs exist
        let f = glcm_features(&r, &l, 0, &GlcmParams::default()).unwrap();
        assert_eq!(f.empty_directions, vec![(0, 0), (0, 2)]);
        assert!(f.values[..13].iter().all(|&v| v == 0.0));
        let tiny = LabelMap::from_raw(3, 3, vec![0, 0, 0, 0, 0, 0, 1, 1, 1]).unwrap();
        assert!(matches!(
            glcm_features(&r, &tiny, 1, &GlcmParams::default()),
            Err(Error::SegmentTooSmall { size: 3, .. })
        ));
    }

    #[test]
    fn glcm_entries_sum_to_one() {
        let v: Vec<f32> = (0..64).map(|i| ((i * 37) % 256) as f32).collect();
        let l = LabelMap::from_raw(8, 8, vec![0; 64]).unwrap();
        let q: Vec<u16> = v.iter().map(|&x| quantize(x, 32) as u16).collect();
        let members: Vec<u32> = (0..64).collect();
        let mut counts = vec![0.0; 32 * 32];
        for off in DIRECTIONS {
            let pairs = glcm_counts(&q, &l, 0, &members, off, 32, &mut counts);
            let total: f64 = counts.iter().sum();
            assert_eq!(total, 2.0 * pairs as f64);
            let norm: f64 = counts.iter().map(|c| c / total).sum();
            assert!((norm - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn backends_agree() {
        let v: Vec<f32> = (0..3 * 30 * 20).map(|i| ((i * 7 + i / 13) % 256) as f32).collect();
        let r = Raster::new(30, 20, 3, v).unwrap();
        let l = LabelMap::from_raw(30, 20, (0..600).map(|p| ((p % 30) / 10 + 3 * ((p / 30) / 10)) as u32).collect()).unwrap();
        let segs: Vec<u32> = (0..l.k() as u32).collect();
        let base = extract_features_with(Backend::Sequential, &r, &l, &segs, &GlcmParams::default()).unwrap();
        for &b in Backend::available() {
            assert_eq!(extract_features_with(b, &r, &l, &segs, &GlcmParams::default()).unwrap(), base);
        }
    }
}
