//! Classical superpixel measures: boundary recall, undersegmentation error,
//! SIRS color homogeneity, compactness and regularity.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par::Backend;
use crate::preprocess::rescale_to_byte_range;
use crate::raster::{GroundTruth, GtClass, LabelMap, Raster};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpxMetricReport {
    pub br: f64,
    pub ue: f64,
    pub sirs: f64,
    pub co: f64,
    pub reg: f64,
    pub k_final: usize,
}

/// Constants of the SIRS reconstruction score.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SirsParams {
    /// Quantization bins per channel.
    pub bins: usize,
    /// Representative colors kept per superpixel.
    pub representatives: usize,
    /// Width of the Gaussian applied to the mean exponential error.
    pub sigma: f64,
}

impl Default for SirsParams {
    fn default() -> Self {
        Self {
            bins: 8,
            representatives: 2,
            sigma: 0.1,
        }
    }
}

impl SirsParams {
    pub fn validate(&self) -> Result<()> {
        if self.bins == 0 || self.bins > 256 || self.representatives == 0 || !(self.sigma > 0.0) {
            return Err(Error::InvalidConfig(format!("invalid SIRS parameters {self:?}")));
        }
        Ok(())
    }
}

fn check_gt(labels: &LabelMap, gt: &GroundTruth) -> Result<()> {
    labels.check_shape(gt.width(), gt.height(), "ground truth")
}

/// Matching radius: `max(1, round(0.0025 * diagonal))`, rounding half up.
pub fn boundary_radius(width: usize, height: usize) -> usize {
    let diag = ((width * width + height * height) as f64).sqrt();
    ((0.0025 * diag + 0.5).floor() as usize).max(1)
}

/// Pixels with a 4-neighbor of a different label.
pub(crate) fn label_boundary(labels: &LabelMap) -> Vec<bool> {
    let (w, h) = (labels.width(), labels.height());
    let l = labels.labels();
    (0..w * h)
        .map(|p| {
            let (x, y) = (p % w, p / w);
            (x > 0 && l[p - 1] != l[p])
                || (x + 1 < w && l[p + 1] != l[p])
                || (y > 0 && l[p - w] != l[p])
                || (y + 1 < h && l[p + w] != l[p])
        })
        .collect()
}

/// Non-excluded pixels with a non-excluded 4-neighbor of the other class.
pub(crate) fn gt_boundary(gt: &GroundTruth) -> Vec<bool> {
    let (w, h) = (gt.width(), gt.height());
    let c = gt.classes();
    let differs = |a: GtClass, b: GtClass| b.is_valid() && a != b;
    (0..w * h)
        .map(|p| {
            let (x, y) = (p % w, p / w);
            let cp = c[p];
            cp.is_valid()
                && ((x > 0 && differs(cp, c[p - 1]))
                    || (x + 1 < w && differs(cp, c[p + 1]))
                    || (y > 0 && differs(cp, c[p - w]))
                    || (y + 1 < h && differs(cp, c[p + w])))
        })
        .collect()
}

pub fn boundary_recall(labels: &LabelMap, gt: &GroundTruth) -> Result<f64> {
    boundary_recall_with(Backend::default(), labels, gt)
}

/// Fraction of ground-truth boundary pixels with a superpixel boundary pixel
/// within Chebyshev distance [`boundary_radius`]. Superpixel boundaries on
/// excluded pixels never match. Returns 1 when there is no ground-truth boundary.
pub fn boundary_recall_with(backend: Backend, labels: &LabelMap, gt: &GroundTruth) -> Result<f64> {
    check_gt(labels, gt)?;
    let (w, h) = (labels.width(), labels.height());
    let r = boundary_radius(w, h);
    let sp = label_boundary(labels);
    let truth = gt_boundary(gt);

    // summed-area table of matchable superpixel boundary pixels
    let sw = w + 1;
    let mut sat = vec![0u32; sw * (h + 1)];
    for y in 0..h {
        let mut row = 0u32;
        for x in 0..w {
            let p = y * w + x;
            row += (sp[p] && gt.class(p).is_valid()) as u32;
            sat[(y + 1) * sw + x + 1] = sat[y * sw + x + 1] + row;
        }
    }
    let rows = backend.map_range(h, |y| {
        let (y0, y1) = (y.saturating_sub(r), (y + r + 1).min(h));
        let mut matched = 0usize;
        let mut total = 0usize;
        for x in 0..w {
            if !truth[y * w + x] {
                continue;
            }
            total += 1;
            let (x0, x1) = (x.saturating_sub(r), (x + r + 1).min(w));
            let count = sat[y1 * sw + x1] + sat[y0 * sw + x0] - sat[y0 * sw + x1] - sat[y1 * sw + x0];
            matched += (count > 0) as usize;
        }
        (matched, total)
    });
    let (matched, total) = rows
        .iter()
        .fold((0, 0), |(m, t), &(a, b)| (m + a, t + b));
    Ok(if total == 0 {
        1.0
    } else {
        matched as f64 / total as f64
    })
}

/// `sum_S (|S| - max_G |S ∩ G|) / N_valid` over forest/deforestation classes,
/// with excluded pixels removed from every superpixel.
pub fn undersegmentation_error(labels: &LabelMap, gt: &GroundTruth) -> Result<f64> {
    check_gt(labels, gt)?;
    let mut counts = vec![[0usize; 2]; labels.k()];
    let mut valid = 0usize;
    for (&l, &c) in labels.labels().iter().zip(gt.classes()) {
        match c {
            GtClass::Forest => counts[l as usize][0] += 1,
            GtClass::Deforest => counts[l as usize][1] += 1,
            GtClass::Excluded => continue,
        }
        valid += 1;
    }
    if valid == 0 {
        return Err(Error::EmptyValidArea);
    }
    let err: usize = counts.iter().map(|[f, d]| f.min(d)).sum();
    Ok(err as f64 / valid as f64)
}

/// Undersegmentation error against an arbitrary reference partition.
pub fn undersegmentation_error_against(labels: &LabelMap, reference: &LabelMap) -> Result<f64> {
    labels.check_shape(reference.width(), reference.height(), "reference")?;
    let mut overlap: HashMap<(u32, u32), usize> = HashMap::new();
    for (&l, &g) in labels.labels().iter().zip(reference.labels()) {
        *overlap.entry((l, g)).or_default() += 1;
    }
    let mut best = vec![0usize; labels.k()];
    for (&(l, _), &c) in &overlap {
        best[l as usize] = best[l as usize].max(c);
    }
    let kept: usize = best.iter().sum();
    Ok((labels.len() - kept) as f64 / labels.len() as f64)
}

pub fn sirs_score(labels: &LabelMap, raster: &Raster, params: &SirsParams) -> Result<f64> {
    sirs_score_with(Backend::default(), labels, raster, params)
}

/// Similarity between the image and its reconstruction from a few
/// representative colors per superpixel.
///
/// The raster is first rescaled to `[0, 255]` per band. Each superpixel keeps
/// the mean colors of its `representatives` most populated quantization cells
/// (`bins` per channel, ties to the lower cell index); every pixel is replaced
/// by the nearest representative. With `e = |c - ĉ| / (255 * sqrt(bands))`,
/// `MEE = mean((exp(e) - 1) / (E - 1))` and the score is `exp(-MEE^2 / (2 sigma^2))`.
pub fn sirs_score_with(backend: Backend, labels: &LabelMap, raster: &Raster, params: &SirsParams) -> Result<f64> {
    params.validate()?;
    labels.check_shape(raster.width(), raster.height(), "raster")?;
    let mee = mean_exponential_error(backend, labels, &rescale_to_byte_range(raster), params);
    Ok((-mee * mee / (2.0 * params.sigma * params.sigma)).exp())
}

/// Pixel indices grouped by label (counting sort).
pub(crate) fn pixels_by_label(labels: &LabelMap) -> (Vec<usize>, Vec<u32>) {
    let k = labels.k();
    let mut offsets = vec![0usize; k + 1];
    for &l in labels.labels() {
        offsets[l as usize + 1] += 1;
    }
    for i in 0..k {
        offsets[i + 1] += offsets[i];
    }
    let mut fill = offsets.clone();
    let mut pixels = vec![0u32; labels.len()];
    for (p, &l) in labels.labels().iter().enumerate() {
        pixels[fill[l as usize]] = p as u32;
        fill[l as usize] += 1;
    }
    (offsets, pixels)
}

fn mean_exponential_error(backend: Backend, labels: &LabelMap, scaled: &Raster, params: &SirsParams) -> f64 {
    let bands = scaled.bands();
    let colors = scaled.interleaved_f64();
    let (offsets, pixels) = pixels_by_label(labels);
    let norm = 255.0 * (bands as f64).sqrt();
    let e_minus_one = std::f64::consts::E - 1.0;
    let bins = params.bins;

    let per_segment = backend.map_range(labels.k(), |s| {
        let members = &pixels[offsets[s]..offsets[s + 1]];
        let mut cells: HashMap<usize, (usize, Vec<f64>)> = HashMap::new();
        for &p in members {
            let c = &colors[p as usize * bands..(p as usize + 1) * bands];
            let cell = c.iter().fold(0usize, |acc, &v| {
                acc * bins + ((v * bins as f64 / 256.0).floor() as usize).min(bins - 1)
            });
            let e = cells.entry(cell).or_insert_with(|| (0, vec![0.0; bands]));
            e.0 += 1;
            for (a, v) in e.1.iter_mut().zip(c) {
                *a += v;
            }
        }
        let mut ranked: Vec<(usize, usize, Vec<f64>)> =
            cells.into_iter().map(|(cell, (n, sum))| (n, cell, sum)).collect();
        ranked.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
        let reps: Vec<Vec<f64>> = ranked
            .into_iter()
            .take(params.representatives)
            .map(|(n, _, sum)| sum.into_iter().map(|v| v / n as f64).collect())
            .collect();
        members
            .iter()
            .map(|&p| {
                let c = &colors[p as usize * bands..(p as usize + 1) * bands];
                let d2 = reps
                    .iter()
                    .map(|r| super::super::segment::color_dist2(c, r))
                    .fold(f64::INFINITY, f64::min);
                (d2.sqrt() / norm).exp_m1() / e_minus_one
            })
            .sum::<f64>()
    });
    per_segment.iter().sum::<f64>() / labels.len() as f64
}

/// Area-weighted isoperimetric quotient `sum_S |S|/N * min(1, 4 pi |S| / P(S)^2)`,
/// with `P(S)` the number of pixel edges on the boundary of `S` (image frame included).
pub fn compactness(labels: &LabelMap) -> f64 {
    let (w, h) = (labels.width(), labels.height());
    let l = labels.labels();
    let mut area = vec![0usize; labels.k()];
    let mut perim = vec![0usize; labels.k()];
    for y in 0..h {
        for x in 0..w {
            let p = y * w + x;
            let s = l[p] as usize;
            area[s] += 1;
            perim[s] += (x == 0 || l[p - 1] != l[p]) as usize
                + (x + 1 == w || l[p + 1] != l[p]) as usize
                + (y == 0 || l[p - w] != l[p]) as usize
                + (y + 1 == h || l[p + w] != l[p]) as usize;
        }
    }
    let n = labels.len() as f64;
    area.iter()
        .zip(&perim)
        .map(|(&a, &p)| {
            let q = (4.0 * std::f64::consts::PI * a as f64 / (p * p) as f64).min(1.0);
            a as f64 / n * q
        })
        .sum()
}

/// Population standard deviation of segment areas.
pub fn regularity(labels: &LabelMap) -> f64 {
    let sizes = labels.sizes();
    let k = sizes.len() as f64;
    let mean = sizes.iter().sum::<usize>() as f64 / k;
    (sizes.iter().map(|&s| (s as f64 - mean).powi(2)).sum::<f64>() / k).sqrt()
}

pub fn evaluate_spx(labels: &LabelMap, gt: &GroundTruth, raster: &Raster, params: &SirsParams) -> Result<SpxMetricReport> {
    evaluate_spx_with(Backend::default(), labels, gt, raster, params)
}

pub fn evaluate_spx_with(
    backend: Backend,
    labels: &LabelMap,
    gt: &GroundTruth,
    raster: &Raster,
    params: &SirsParams,
) -> Result<SpxMetricReport> {
    Ok(SpxMetricReport {
        br: boundary_recall_with(backend, labels, gt)?,
        ue: undersegmentation_error(labels, gt)?,
        sirs: sirs_score_with(backend, labels, raster, params)?,
        co: compactness(labels),
        reg: regularity(labels),
        k_final: labels.k(),
    })
}
