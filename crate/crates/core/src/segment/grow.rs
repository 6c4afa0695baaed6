use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::{color_dist2, GridLayout, SegmenterConfig};
use crate::error::Result;
use crate::raster::{LabelMap, Raster};

#[derive(Clone, Copy, Debug)]
struct Candidate {
    cost: f64,
    seq: u64,
    pixel: u32,
    label: u32,
}

impl PartialEq for Candidate {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Candidate {}

impl Ord for Candidate {
    // reversed: BinaryHeap is a max-heap, we pop the cheapest, earliest-pushed entry
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .cost
            .total_cmp(&self.cost)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Priority-queue growth from grid seeds with running-mean region centers.
///
/// Cost of a pixel is `d_color^2 + (d_xy / S)^2 * m^2` against the center of
/// the region that pushed it, where the center is updated whenever a pixel is
/// popped. Equal costs pop in push order, which keeps fronts advancing
/// breadth-first through flat areas.
fn grow(raster: &Raster, cfg: &SegmenterConfig, compactness: f64) -> Result<LabelMap> {
    cfg.check_against(raster)?;
    let (w, h) = (raster.width(), raster.height());
    let n = w * h;
    let bands = raster.bands();
    let colors = raster.interleaved_f64();
    let step = (n as f64 / cfg.k_desired as f64).sqrt();
    let spatial = (compactness / step).powi(2);

    let seeds = GridLayout::new(w, h, cfg.k_desired)?.seeds();
    let k = seeds.len();
    // per label: color sums, x sum, y sum, count
    let stride = bands + 3;
    let mut acc = vec![0.0f64; k * stride];
    let mut labels = vec![u32::MAX; n];
    let mut heap = BinaryHeap::with_capacity(n);
    let mut seq = 0u64;
    for (i, &(x, y)) in seeds.iter().enumerate() {
        heap.push(Candidate {
            cost: 0.0,
            seq,
            pixel: (y * w + x) as u32,
            label: i as u32,
        });
        seq += 1;
    }

    let mut center = vec![0.0f64; bands];
    while let Some(c) = heap.pop() {
        let p = c.pixel as usize;
        if labels[p] != u32::MAX {
            continue;
        }
        labels[p] = c.label;
        let l = c.label as usize;
        let a = &mut acc[l * stride..(l + 1) * stride];
        let (x, y) = (p % w, p / w);
        for b in 0..bands {
            a[b] += colors[p * bands + b];
        }
        a[bands] += x as f64;
        a[bands + 1] += y as f64;
        a[bands + 2] += 1.0;
        let cnt = a[bands + 2];
        for b in 0..bands {
            center[b] = a[b] / cnt;
        }
        let (cx, cy) = (a[bands] / cnt, a[bands + 1] / cnt);

        let mut push = |q: usize| {
            if labels[q] != u32::MAX {
                return;
            }
            let (qx, qy) = ((q % w) as f64, (q / w) as f64);
            let dxy = (qx - cx).powi(2) + (qy - cy).powi(2);
            let cost = color_dist2(&colors[q * bands..(q + 1) * bands], &center) + dxy * spatial;
            heap.push(Candidate {
                cost,
                seq,
                pixel: q as u32,
                label: c.label,
            });
            seq += 1;
        };
        if x > 0 {
            push(p - 1);
        }
        if x + 1 < w {
            push(p + 1);
        }
        if y > 0 {
            push(p - w);
        }
        if y + 1 < h {
            push(p + w);
        }
    }

    LabelMap::from_raw(w, h, labels)
}

/// SNIC-style non-iterative clustering with dynamically updated centers.
pub fn snic_segment(raster: &Raster, cfg: &SegmenterConfig) -> Result<LabelMap> {
    grow(raster, cfg, cfg.compactness)
}

/// Seed competition where the path cost is the color distance to the running
/// mean of the conquering region, with no spatial term.
pub fn seed_competition_segment(raster: &Raster, cfg: &SegmenterConfig) -> Result<LabelMap> {
    grow(raster, cfg, 0.0)
}
