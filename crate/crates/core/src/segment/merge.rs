use std::collections::{BTreeMap, BTreeSet};

use super::color_dist2;
use crate::error::{Error, Result};
use crate::raster::{normalize_labels, LabelMap, Raster};

struct Region {
    size: usize,
    color_sum: Vec<f64>,
    /// Neighbor label -> number of 4-adjacent pixel pairs shared.
    borders: BTreeMap<u32, u64>,
}

impl Region {
    fn mean(&self) -> Vec<f64> {
        self.color_sum.iter().map(|s| s / self.size as f64).collect()
    }
}

/// Greedily merges segments smaller than `min_size`.
///
/// The smallest undersized segment (lowest label on ties) is merged into the
/// 4-adjacent segment with the closest mean color; ties go to the longest
/// shared border, then the lowest label. Stops when no segment is below
/// `min_size` or a single segment remains.
pub fn merge_small_segments(labels: &LabelMap, raster: &Raster, min_size: usize) -> Result<LabelMap> {
    labels.check_shape(raster.width(), raster.height(), "raster")?;
    let (w, h) = (labels.width(), labels.height());
    let k = labels.k();
    let bands = raster.bands();
    let lab = labels.labels();

    let mut regions: Vec<Region> = (0..k)
        .map(|_| Region {
            size: 0,
            color_sum: vec![0.0; bands],
            borders: BTreeMap::new(),
        })
        .collect();
    for (p, &l) in lab.iter().enumerate() {
        let r = &mut regions[l as usize];
        r.size += 1;
        for (b, s) in r.color_sum.iter_mut().enumerate() {
            *s += raster.value(b, p) as f64;
        }
    }
    for y in 0..h {
        for x in 0..w {
            let p = y * w + x;
            let a = lab[p];
            let mut link = |b: u32| {
                if a != b {
                    *regions[a as usize].borders.entry(b).or_default() += 1;
                    *regions[b as usize].borders.entry(a).or_default() += 1;
                }
            };
            if x + 1 < w {
                link(lab[p + 1]);
            }
            if y + 1 < h {
                link(lab[p + w]);
            }
        }
    }

    let mut parent: Vec<u32> = (0..k as u32).collect();
    let mut alive = k;
    let mut pending: BTreeSet<(usize, u32)> = regions
        .iter()
        .enumerate()
        .filter(|(_, r)| r.size < min_size)
        .map(|(i, r)| (r.size, i as u32))
        .collect();

    while alive > 1 {
        let Some((_, s)) = pending.pop_first() else {
            break;
        };
        let src_mean = regions[s as usize].mean();
        let target = regions[s as usize]
            .borders
            .iter()
            .map(|(&t, &border)| (color_dist2(&src_mean, &regions[t as usize].mean()), border, t))
            .min_by(|a, b| a.0.total_cmp(&b.0).then(b.1.cmp(&a.1)).then(a.2.cmp(&b.2)))
            .map(|(_, _, t)| t);
        let Some(t) = target else {
            // Only reachable for a segment with no neighbours.
            return Err(Error::InvalidDimensions(
                "label map is not a connected partition".into(),
            ));
        };

        let src = std::mem::replace(
            &mut regions[s as usize],
            Region {
                size: 0,
                color_sum: Vec::new(),
                borders: BTreeMap::new(),
            },
        );
        let old_size = regions[t as usize].size;
        for (n, c) in src.borders {
            regions[n as usize].borders.remove(&s);
            if n != t {
                *regions[n as usize].borders.entry(t).or_default() += c;
                *regions[t as usize].borders.entry(n).or_default() += c;
            }
        }
        let dst = &mut regions[t as usize];
        dst.size += src.size;
        for (d, v) in dst.color_sum.iter_mut().zip(&src.color_sum) {
            *d += v;
        }
        parent[s as usize] = t;
        alive -= 1;
        if pending.remove(&(old_size, t)) && dst.size < min_size {
            pending.insert((dst.size, t));
        }
    }

    let mut resolved = vec![0u32; k];
    for i in 0..k {
        let mut r = i as u32;
        while parent[r as usize] != r {
            r = parent[r as usize];
        }
        resolved[i] = r;
    }
    let merged: Vec<u32> = lab.iter().map(|&l| resolved[l as usize]).collect();
    let (merged, k) = normalize_labels(merged);
    Ok(LabelMap::from_normalized(w, h, merged, k))
}
