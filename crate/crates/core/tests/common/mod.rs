//! Brute-force reference implementations shared by the integration tests.
//! Each one follows the definition directly and shares no code with the crate.
#![allow(dead_code)]

use std::collections::HashMap;

use forestseg::{GroundTruth, GtClass, LabelMap, Raster};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random blocky label map: a few rectangles painted over a background.
pub fn random_labels(rng: &mut ChaCha8Rng, w: usize, h: usize) -> LabelMap {
    let mut l = vec![0u32; w * h];
    let n = rng.random_range(1..10);
    for id in 1..=n {
        let (x0, y0) = (rng.random_range(0..w), rng.random_range(0..h));
        let (x1, y1) = (rng.random_range(x0..w) + 1, rng.random_range(y0..h) + 1);
        for y in y0..y1 {
            for x in x0..x1 {
                l[y * w + x] = id;
            }
        }
    }
    // sprinkle single-pixel noise
    for _ in 0..rng.random_range(0..8) {
        l[rng.random_range(0..w * h)] = rng.random_range(0..n + 3);
    }
    LabelMap::from_raw(w, h, l).unwrap()
}

/// Random ground truth: disc of deforestation, a band of excluded pixels, noise.
pub fn random_gt(rng: &mut ChaCha8Rng, w: usize, h: usize) -> GroundTruth {
    let (cx, cy, r) = (
        rng.random_range(0.0..w as f64),
        rng.random_range(0.0..h as f64),
        rng.random_range(1.0..w as f64),
    );
    let ex = rng.random_range(0..w + 4);
    let mut c = Vec::with_capacity(w * h);
    for y in 0..h {
        for x in 0..w {
            let d = ((x as f64 - cx).powi(2) + (y as f64 - cy).powi(2)).sqrt();
            let class = if x == ex {
                GtClass::Excluded
            } else if rng.random_bool(0.03) {
                [GtClass::Forest, GtClass::Deforest, GtClass::Excluded][rng.random_range(0..3)]
            } else if d < r {
                GtClass::Deforest
            } else {
                GtClass::Forest
            };
            c.push(class);
        }
    }
    GroundTruth::new(w, h, c).unwrap()
}

pub fn random_raster(rng: &mut ChaCha8Rng, w: usize, h: usize, bands: usize) -> Raster {
    let data = (0..w * h * bands).map(|_| rng.random_range(0.0f32..1.0)).collect();
    Raster::new(w, h, bands, data).unwrap()
}

const NEIGHBORS: [(i64, i64); 4] = [(-1, 0), (1, 0), (0, -1), (0, 1)];

fn at<T: Copy>(v: &[T], w: usize, h: usize, x: i64, y: i64) -> Option<T> {
    (x >= 0 && y >= 0 && (x as usize) < w && (y as usize) < h).then(|| v[y as usize * w + x as usize])
}

pub fn br_oracle(labels: &LabelMap, gt: &GroundTruth) -> f64 {
    let (w, h) = (labels.width(), labels.height());
    let l = labels.labels();
    let c = gt.classes();
    let diag = ((w * w + h * h) as f64).sqrt();
    let r = ((0.0025 * diag + 0.5).floor() as i64).max(1);
    let is_sp_edge = |x: i64, y: i64| {
        let me = l[y as usize * w + x as usize];
        NEIGHBORS.iter().any(|(dx, dy)| at(l, w, h, x + dx, y + dy).is_some_and(|o| o != me))
    };
    let is_gt_edge = |x: i64, y: i64| {
        let me = c[y as usize * w + x as usize];
        me != GtClass::Excluded
            && NEIGHBORS.iter().any(|(dx, dy)| {
                at(c, w, h, x + dx, y + dy).is_some_and(|o| o != GtClass::Excluded && o != me)
            })
    };
    let (mut hit, mut total) = (0, 0);
    for y in 0..h as i64 {
        for x in 0..w as i64 {
            if !is_gt_edge(x, y) {
                continue;
            }
            total += 1;
            let mut found = false;
            for yy in y - r..=y + r {
                for xx in x - r..=x + r {
                    if at(c, w, h, xx, yy).is_some_and(|k| k != GtClass::Excluded) && is_sp_edge(xx, yy) {
                        found = true;
                    }
                }
            }
            hit += found as usize;
        }
    }
    if total == 0 {
        1.0
    } else {
        hit as f64 / total as f64
    }
}

pub fn ue_oracle(labels: &LabelMap, gt: &GroundTruth) -> f64 {
    let l = labels.labels();
    let c = gt.classes();
    let valid = c.iter().filter(|&&k| k != GtClass::Excluded).count();
    let mut leak = 0usize;
    for s in 0..labels.k() as u32 {
        let mut best = 0;
        let mut size = 0;
        for class in [GtClass::Forest, GtClass::Deforest] {
            let n = (0..l.len()).filter(|&p| l[p] == s && c[p] == class).count();
            size += n;
            best = best.max(n);
        }
        leak += size - best;
    }
    leak as f64 / valid as f64
}

/// Perimeter counted edge by edge: interior edges between different labels
/// count for both sides, frame edges for the pixel inside.
pub fn co_oracle(labels: &LabelMap) -> f64 {
    let (w, h) = (labels.width(), labels.height());
    let l = labels.labels();
    let k = labels.k();
    let mut area = vec![0u64; k];
    let mut per = vec![0u64; k];
    for &s in l {
        area[s as usize] += 1;
    }
    for y in 0..h {
        per[l[y * w] as usize] += 1;
        per[l[y * w + w - 1] as usize] += 1;
        for x in 0..w - 1 {
            let (a, b) = (l[y * w + x], l[y * w + x + 1]);
            if a != b {
                per[a as usize] += 1;
                per[b as usize] += 1;
            }
        }
    }
    for x in 0..w {
        per[l[x] as usize] += 1;
        per[l[(h - 1) * w + x] as usize] += 1;
        for y in 0..h - 1 {
            let (a, b) = (l[y * w + x], l[(y + 1) * w + x]);
            if a != b {
                per[a as usize] += 1;
                per[b as usize] += 1;
            }
        }
    }
    let n = (w * h) as f64;
    (0..k)
        .map(|s| {
            let q = 4.0 * std::f64::consts::PI * area[s] as f64 / (per[s] * per[s]) as f64;
            area[s] as f64 / n * q.min(1.0)
        })
        .sum()
}

/// Population standard deviation from exact integer moments.
pub fn reg_oracle(labels: &LabelMap) -> f64 {
    let mut sizes: HashMap<u32, u128> = HashMap::new();
    for &s in labels.labels() {
        *sizes.entry(s).or_default() += 1;
    }
    let k = sizes.len() as u128;
    let sum: u128 = sizes.values().sum();
    let sq: u128 = sizes.values().map(|s| s * s).sum();
    (((k * sq - sum * sum) as f64) / (k * k) as f64).sqrt()
}

/// Symmetric matrix eigenpairs by cyclic Jacobi rotations, sorted by
/// descending eigenvalue. Eigenvectors are the returned columns.
pub fn jacobi_eigen(a: &[Vec<f64>]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = a.len();
    let mut m = a.to_vec();
    let mut v: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| (i == j) as u8 as f64).collect()).collect();
    for _ in 0..100 {
        let off: f64 = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| m[i][j] * m[i][j]).sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if m[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (m[q][q] - m[p][p]) / (2.0 * m[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (mkp, mkq) = (m[k][p], m[k][q]);
                    m[k][p] = c * mkp - s * mkq;
                    m[k][q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let (mpk, mqk) = (m[p][k], m[q][k]);
                    m[p][k] = c * mpk - s * mqk;
                    m[q][k] = s * mpk + c * mqk;
                }
                for row in v.iter_mut() {
                    let (vp, vq) = (row[p], row[q]);
                    row[p] = c * vp - s * vq;
                    row[q] = s * vp + c * vq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[j][j].total_cmp(&m[i][i]));
    let values = order.iter().map(|&i| m[i][i]).collect();
    let vectors = order.iter().map(|&i| (0..n).map(|r| v[r][i]).collect()).collect();
    (values, vectors)
}

/// Projection onto the leading eigenvectors of the sample covariance
/// (denominator N - 1), each flipped so its largest-magnitude entry is positive.
/// Returns band-sequential output.
pub fn pca_oracle(raster: &Raster, n_components: usize) -> Vec<f64> {
    let (n, b) = (raster.pixel_count(), raster.bands());
    let x = |p: usize, k: usize| raster.data()[k * n + p] as f64;
    let mean: Vec<f64> = (0..b).map(|k| (0..n).map(|p| x(p, k)).sum::<f64>() / n as f64).collect();
    let cov: Vec<Vec<f64>> = (0..b)
        .map(|i| {
            (0..b)
                .map(|j| (0..n).map(|p| (x(p, i) - mean[i]) * (x(p, j) - mean[j])).sum::<f64>() / (n - 1) as f64)
                .collect()
        })
        .collect();
    let (_, mut vecs) = jacobi_eigen(&cov);
    for v in vecs.iter_mut() {
        let big = v.iter().copied().fold(0.0f64, |a, c| if c.abs() > a.abs() { c } else { a });
        if big < 0.0 {
            v.iter_mut().for_each(|c| *c = -*c);
        }
    }
    let mut out = Vec::with_capacity(n * n_components);
    for v in vecs.iter().take(n_components) {
        for p in 0..n {
            out.push((0..b).map(|k| (x(p, k) - mean[k]) * v[k]).sum());
        }
    }
    out
}

/// 0°, 45°, 90°, 135° neighbor offsets in image coordinates (y grows down).
pub const GLCM_OFFSETS: [(i64, i64); 4] = [(1, 0), (1, -1), (0, -1), (-1, -1)];

/// Gray levels of the in-segment pixel pairs `(p, p + offset)`, found by
/// testing every ordered pair of member pixels.
pub fn segment_pairs(levels_img: &[usize], labels: &LabelMap, segment: u32, offset: (i64, i64)) -> Vec<(usize, usize)> {
    let w = labels.width() as i64;
    let members: Vec<i64> = (0..labels.len() as i64).filter(|&p| labels.labels()[p as usize] == segment).collect();
    let mut out = Vec::new();
    for &p in &members {
        for &q in &members {
            if q % w - p % w == offset.0 && q / w - p / w == offset.1 {
                out.push((levels_img[p as usize], levels_img[q as usize]));
            }
        }
    }
    out
}

fn entropy_of<K: std::hash::Hash + Eq>(items: impl Iterator<Item = K>, total: f64) -> f64 {
    let mut m: HashMap<K, f64> = HashMap::new();
    for k in items {
        *m.entry(k).or_default() += 1.0;
    }
    -m.values().map(|c| (c / total) * (c / total).log2()).sum::<f64>()
}

/// Haralick features as expectations over the symmetrized pair list.
pub fn haralick_oracle(pairs: &[(usize, usize)]) -> [f64; 13] {
    let sym: Vec<(f64, f64)> = pairs
        .iter()
        .flat_map(|&(a, b)| [(a as f64, b as f64), (b as f64, a as f64)])
        .collect();
    let n = sym.len() as f64;
    let mean = |f: &dyn Fn(f64, f64) -> f64| sym.iter().map(|&(a, b)| f(a, b)).sum::<f64>() / n;
    let mu = mean(&|a, _| a);
    let var = mean(&|a, _| (a - mu) * (a - mu));
    let cov = mean(&|a, b| (a - mu) * (b - mu));
    let sum_avg = mean(&|a, b| a + b);
    let sum_var = mean(&|a, b| (a + b - sum_avg).powi(2));
    let diff_mean = mean(&|a, b| (a - b).abs());
    let diff_var = mean(&|a, b| ((a - b).abs() - diff_mean).powi(2));

    let mut joint: HashMap<(u64, u64), f64> = HashMap::new();
    let mut marg: HashMap<u64, f64> = HashMap::new();
    for &(a, b) in &sym {
        *joint.entry((a as u64, b as u64)).or_default() += 1.0 / n;
        *marg.entry(a as u64).or_default() += 1.0 / n;
    }
    let asm = joint.values().map(|p| p * p).sum();
    let entropy = entropy_of(sym.iter().map(|&(a, b)| (a as u64, b as u64)), n);
    let sum_entropy = entropy_of(sym.iter().map(|&(a, b)| (a + b) as u64), n);
    let diff_entropy = entropy_of(sym.iter().map(|&(a, b)| (a - b).abs() as u64), n);
    let hx = entropy_of(sym.iter().map(|&(a, _)| a as u64), n);
    let hxy1 = -mean(&|a, b| (marg[&(a as u64)] * marg[&(b as u64)]).log2());
    let mut hxy2 = 0.0;
    for pa in marg.values() {
        for pb in marg.values() {
            hxy2 -= pa * pb * (pa * pb).log2();
        }
    }
    [
        asm,
        mean(&|a, b| (a - b) * (a - b)),
        if var > 0.0 { cov / var } else { 0.0 },
        var,
        mean(&|a, b| 1.0 / (1.0 + (a - b) * (a - b))),
        sum_avg,
        sum_var,
        sum_entropy,
        entropy,
        diff_var,
        diff_entropy,
        if hx > 0.0 { (entropy - hxy1) / hx } else { 0.0 },
        (1.0 - (-2.0 * (hxy2 - entropy)).exp()).max(0.0).sqrt(),
    ]
}

/// Full 13 x 4 x bands descriptor of one segment by the oracle route.
pub fn glcm_oracle(raster: &Raster, labels: &LabelMap, segment: u32, levels: usize) -> Vec<f64> {
    let n = raster.pixel_count();
    let mut out = Vec::new();
    for b in 0..raster.bands() {
        let q: Vec<usize> = raster.data()[b * n..(b + 1) * n]
            .iter()
            .map(|&v| ((v as f64 * levels as f64 / 256.0) as usize).min(levels - 1))
            .collect();
        for off in GLCM_OFFSETS {
            let pairs = segment_pairs(&q, labels, segment, off);
            if pairs.is_empty() {
                out.extend([0.0; 13]);
            } else {
                out.extend(haralick_oracle(&pairs));
            }
        }
    }
    out
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
