//! Band reduction (PCA) and byte-range rescaling.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::par::Backend;
use crate::raster::{GroundTruth, Raster};

/// Eigenvalues at or below this fraction of the largest one count as zero.
const RANK_TOLERANCE: f64 = 1e-10;

/// A fitted principal-component projection.
#[derive(Clone, Debug, PartialEq)]
pub struct PcaModel {
    /// Per-band mean of the fitting pixels.
    pub mean: Vec<f64>,
    /// `n_components` unit row vectors of length `bands`. Components beyond
    /// `rank` are zero vectors.
    pub components: Vec<Vec<f64>>,
    /// Variance along each component, descending.
    pub explained_variance: Vec<f64>,
    /// All `bands` eigenvalues of the covariance matrix, descending.
    pub eigenvalues: Vec<f64>,
    /// Number of eigenvalues above the rank tolerance.
    pub rank: usize,
}

impl PcaModel {
    pub fn n_components(&self) -> usize {
        self.components.len()
    }

    pub fn total_variance(&self) -> f64 {
        self.eigenvalues.iter().sum()
    }

    pub fn is_degenerate(&self) -> bool {
        self.rank < self.components.len()
    }

    pub fn project(&self, raster: &Raster) -> Result<Raster> {
        self.project_with(Backend::default(), raster)
    }

    pub fn project_with(&self, backend: Backend, raster: &Raster) -> Result<Raster> {
        if raster.bands() != self.mean.len() {
            return Err(Error::DimensionMismatch(format!(
                "model expects {} bands, raster has {}",
                self.mean.len(),
                raster.bands()
            )));
        }
        let (w, h) = (raster.width(), raster.height());
        let n = w * h;
        let mut out = vec![0f32; n * self.components.len()];
        backend.for_each_chunk_mut(&mut out, w, |chunk, row| {
            let (c, y) = (chunk / h, chunk % h);
            let comp = &self.components[c];
            for (x, o) in row.iter_mut().enumerate() {
                let p = y * w + x;
                let mut acc = 0.0;
                for (b, coef) in comp.iter().enumerate() {
                    acc += coef * (raster.value(b, p) as f64 - self.mean[b]);
                }
                *o = acc as f32;
            }
        });
        Raster::new(w, h, self.components.len(), out)
    }
}

/// Fits a PCA model on the band covariance matrix.
///
/// Pixels marked excluded in `mask` are left out of the mean and covariance.
/// Never fails on rank deficiency; check [`PcaModel::rank`].
pub fn fit_pca(raster: &Raster, n_components: usize, mask: Option<&GroundTruth>) -> Result<PcaModel> {
    fit_pca_with(Backend::default(), raster, n_components, mask)
}

pub fn fit_pca_with(
    backend: Backend,
    raster: &Raster,
    n_components: usize,
    mask: Option<&GroundTruth>,
) -> Result<PcaModel> {
    let bands = raster.bands();
    if n_components == 0 || n_components > bands {
        return Err(Error::InvalidConfig(format!(
            "n_components must be in 1..={bands}, got {n_components}"
        )));
    }
    if let Some(m) = mask {
        if !raster.same_shape(m.width(), m.height()) {
            return Err(Error::DimensionMismatch(
                "ground-truth mask does not match raster".into(),
            ));
        }
    }
    let (w, h) = (raster.width(), raster.height());
    let valid = |p: usize| mask.is_none_or(|m| m.class(p).is_valid());

    // per-row partial sums, combined in row order
    let row_sums = backend.map_range(h, |y| {
        let mut s = vec![0.0f64; bands];
        let mut count = 0usize;
        for p in y * w..(y + 1) * w {
            if valid(p) {
                count += 1;
                for (b, acc) in s.iter_mut().enumerate() {
                    *acc += raster.value(b, p) as f64;
                }
            }
        }
        (s, count)
    });
    let mut mean = vec![0.0f64; bands];
    let mut count = 0usize;
    for (s, c) in &row_sums {
        count += c;
        for (m, v) in mean.iter_mut().zip(s) {
            *m += v;
        }
    }
    if count < n_components + 1 {
        return Err(Error::InvalidDimensions(format!(
            "PCA needs at least {} valid pixels, found {count}",
            n_components + 1
        )));
    }
    for m in mean.iter_mut() {
        *m /= count as f64;
    }

    let row_cov = backend.map_range(h, |y| {
        let mut c = vec![0.0f64; bands * bands];
        let mut d = vec![0.0f64; bands];
        for p in y * w..(y + 1) * w {
            if !valid(p) {
                continue;
            }
            for (b, v) in d.iter_mut().enumerate() {
                *v = raster.value(b, p) as f64 - mean[b];
            }
            for i in 0..bands {
                for j in i..bands {
                    c[i * bands + j] += d[i] * d[j];
                }
            }
        }
        c
    });
    let mut cov = DMatrix::<f64>::zeros(bands, bands);
    for c in &row_cov {
        for i in 0..bands {
            for j in i..bands {
                cov[(i, j)] += c[i * bands + j];
            }
        }
    }
    let denom = (count - 1) as f64;
    for i in 0..bands {
        for j in i..bands {
            let v = cov[(i, j)] / denom;
            cov[(i, j)] = v;
            cov[(j, i)] = v;
        }
    }

    let eig = SymmetricEigen::new(cov);
    let mut order: Vec<usize> = (0..bands).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i].max(0.0)).collect();
    let largest = eigenvalues[0];
    let rank = if largest > 0.0 {
        eigenvalues
            .iter()
            .take_while(|&&v| v > RANK_TOLERANCE * largest)
            .count()
    } else {
        0
    };

    let mut components = Vec::with_capacity(n_components);
    let mut explained_variance = Vec::with_capacity(n_components);
    for (c, &i) in order.iter().take(n_components).enumerate() {
        if c >= rank {
            components.push(vec![0.0; bands]);
            explained_variance.push(0.0);
            continue;
        }
        let mut v: Vec<f64> = eig.eigenvectors.column(i).iter().copied().collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        v.iter_mut().for_each(|x| *x /= norm);
        apply_sign_convention(&mut v);
        components.push(v);
        explained_variance.push(eigenvalues[c]);
    }

    Ok(PcaModel {
        mean,
        components,
        explained_variance,
        eigenvalues,
        rank,
    })
}

/// Flips `v` so that its largest-magnitude coefficient (first one on ties) is positive.
pub fn apply_sign_convention(v: &mut [f64]) {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() {
            best = i;
        }
    }
    if v[best] < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

/// Fits and projects, failing with `DegenerateCovariance` when the covariance
/// rank is below `n_components`.
pub fn pca_fit_project(
    raster: &Raster,
    n_components: usize,
    mask: Option<&GroundTruth>,
) -> Result<(PcaModel, Raster)> {
    let model = fit_pca(raster, n_components, mask)?;
    if model.is_degenerate() {
        return Err(Error::DegenerateCovariance {
            rank: model.rank,
            requested: n_components,
        });
    }
    let projected = model.project(raster)?;
    Ok((model, projected))
}

/// Like [`pca_fit_project`] but never fails on rank deficiency: trailing
/// components are zero vectors, so the matching output bands are zero-filled.
pub fn pca_fit_project_lenient(
    raster: &Raster,
    n_components: usize,
    mask: Option<&GroundTruth>,
) -> Result<(PcaModel, Raster)> {
    let model = fit_pca(raster, n_components, mask)?;
    let projected = model.project(raster)?;
    Ok((model, projected))
}

/// Maps every band affinely from its `[min, max]` onto `[0, 255]`.
/// Constant bands map to 0.
pub fn rescale_to_byte_range(raster: &Raster) -> Raster {
    let n = raster.pixel_count();
    let mut out = Vec::with_capacity(raster.data().len());
    for b in 0..raster.bands() {
        let band = raster.band(b);
        let (lo, hi) = band.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v as f64), hi.max(v as f64))
        });
        let span = hi - lo;
        if span > 0.0 {
            out.extend(band.iter().map(|&v| ((v as f64 - lo) / span * 255.0) as f32));
        } else {
            out.extend(std::iter::repeat_n(0.0f32, n));
        }
    }
    Raster::new(raster.width(), raster.height(), raster.bands(), out)
        .expect("rescaling preserves shape and finiteness")
}
