use super::{color_dist2, enforce_connectivity, merge_small_segments, GridLayout, SegmenterConfig};
use crate::error::Result;
use crate::par::Backend;
use crate::raster::{LabelMap, Raster};

#[derive(Clone, Debug)]
struct Center {
    color: Vec<f64>,
    x: f64,
    y: f64,
}

/// Iterative local k-means in joint color/space (SLIC-style).
///
/// Seeds sit at grid-cell centers without gradient perturbation. Each round
/// assigns every pixel to the nearest center whose `2S x 2S` window covers it,
/// using `D^2 = d_color^2 + (d_xy / S)^2 * m^2`, then moves centers to the
/// mean of their pixels. Afterwards labels are split into 4-connected
/// components and fragments smaller than a quarter of the nominal superpixel
/// area are merged into their spectrally closest neighbor.
pub fn slic_segment(raster: &Raster, cfg: &SegmenterConfig) -> Result<LabelMap> {
    slic_segment_with(Backend::default(), raster, cfg)
}

pub fn slic_segment_with(backend: Backend, raster: &Raster, cfg: &SegmenterConfig) -> Result<LabelMap> {
    cfg.check_against(raster)?;
    let (w, h) = (raster.width(), raster.height());
    let n = w * h;
    let bands = raster.bands();
    let colors = raster.interleaved_f64();
    let step = (n as f64 / cfg.k_desired as f64).sqrt();
    let spatial = (cfg.compactness / step).powi(2);

    let layout = GridLayout::new(w, h, cfg.k_desired)?;
    let mut centers: Vec<Center> = layout
        .seeds()
        .into_iter()
        .map(|(x, y)| {
            let p = y * w + x;
            Center {
                color: colors[p * bands..(p + 1) * bands].to_vec(),
                x: x as f64,
                y: y as f64,
            }
        })
        .collect();
    let mut labels = layout.labels();

    // bucket grid with cell size `step`, rebuilt each round
    let bw = (w as f64 / step).ceil() as usize + 1;
    let bh = (h as f64 / step).ceil() as usize + 1;
    let bucket_of = |v: f64, max: usize| ((v / step).floor().max(0.0) as usize).min(max - 1);

    for _ in 0..cfg.iterations {
        let mut buckets: Vec<Vec<u32>> = vec![Vec::new(); bw * bh];
        for (i, c) in centers.iter().enumerate() {
            buckets[bucket_of(c.y, bh) * bw + bucket_of(c.x, bw)].push(i as u32);
        }

        let prev = labels;
        let mut next = vec![0u32; n];
        backend.for_each_chunk_mut(&mut next, w, |y, row| {
            let yf = y as f64;
            let by0 = bucket_of(yf - step, bh);
            let by1 = bucket_of(yf + step, bh);
            for (x, out) in row.iter_mut().enumerate() {
                let p = y * w + x;
                let xf = x as f64;
                let bx0 = bucket_of(xf - step, bw);
                let bx1 = bucket_of(xf + step, bw);
                let color = &colors[p * bands..(p + 1) * bands];
                let mut best = (f64::INFINITY, prev[p]);
                for by in by0..=by1 {
                    for bx in bx0..=bx1 {
                        for &ci in &buckets[by * bw + bx] {
                            let c = &centers[ci as usize];
                            let (dx, dy) = (c.x - xf, c.y - yf);
                            if dx.abs() > step || dy.abs() > step {
                                continue;
                            }
                            let d = color_dist2(color, &c.color) + (dx * dx + dy * dy) * spatial;
                            if d < best.0 || (d == best.0 && ci < best.1) {
                                best = (d, ci);
                            }
                        }
                    }
                }
                *out = best.1;
            }
        });
        labels = next;

        let mut sums = vec![0.0f64; centers.len() * (bands + 2)];
        let mut counts = vec![0usize; centers.len()];
        for (p, &l) in labels.iter().enumerate() {
            let l = l as usize;
            let s = &mut sums[l * (bands + 2)..(l + 1) * (bands + 2)];
            for b in 0..bands {
                s[b] += colors[p * bands + b];
            }
            s[bands] += (p % w) as f64;
            s[bands + 1] += (p / w) as f64;
            counts[l] += 1;
        }
        for (i, c) in centers.iter_mut().enumerate() {
            if counts[i] == 0 {
                continue;
            }
            let cnt = counts[i] as f64;
            let s = &sums[i * (bands + 2)..(i + 1) * (bands + 2)];
            for b in 0..bands {
                c.color[b] = s[b] / cnt;
            }
            c.x = s[bands] / cnt;
            c.y = s[bands + 1] / cnt;
        }
    }

    let raw = LabelMap::from_raw(w, h, labels)?;
    let connected = enforce_connectivity(&raw);
    let fragment = ((step * step) / 4.0).floor().max(1.0) as usize;
    merge_small_segments(&connected, raster, fragment)
}

#[cfg(test)]
mod tests {
    use super::super::is_connected_partition;
    use super::*;

    fn halves(w: usize, h: usize) -> Raster {
        let planes: Vec<Vec<f32>> = (0..3)
            .map(|b| {
                (0..w * h)
                    .map(|p| if p % w < w / 2 { 10.0 * b as f32 } else { 200.0 - 20.0 * b as f32 })
                    .collect()
            })
            .collect();
        Raster::from_bands(w, h, &planes).unwrap()
    }

    #[test]
    fn two_halves_split_on_the_edge() {
        let r = halves(20, 10);
        let cfg = SegmenterConfig {
            k_desired: 2,
            ..Default::default()
        };
        let m = slic_segment(&r, &cfg).unwrap();
        assert_eq!(m.k(), 2);
        for p in 0..200 {
            assert_eq!(m.labels()[p], (p % 20 >= 10) as u32);
        }
    }

    #[test]
    fn constant_image_gives_regular_cells() {
        let r = Raster::new(32, 32, 3, vec![7.0; 32 * 32 * 3]).unwrap();
        let cfg = SegmenterConfig {
            k_desired: 16,
            ..Default::default()
        };
        let m = slic_segment(&r, &cfg).unwrap();
        assert!(is_connected_partition(&m));
        assert_eq!(m.k(), 16);
        let sizes = m.sizes();
        let mean = 1024.0 / 16.0;
        let std = (sizes.iter().map(|&s| (s as f64 - mean).powi(2)).sum::<f64>() / 16.0).sqrt();
        assert!(std <= 0.05 * mean, "area std {std}");
    }

    #[test]
    fn backends_agree() {
        let data: Vec<f32> = (0..3 * 40 * 30).map(|i| ((i * 2654435761u64 as usize) % 97) as f32).collect();
        let r = Raster::new(40, 30, 3, data).unwrap();
        let cfg = SegmenterConfig {
            k_desired: 20,
            ..Default::default()
        };
        let base = slic_segment_with(Backend::Sequential, &r, &cfg).unwrap();
        for &b in Backend::available() {
            assert_eq!(slic_segment_with(b, &r, &cfg).unwrap(), base);
        }
        assert!(is_connected_partition(&base));
    }
}
