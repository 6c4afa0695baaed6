use super::SegmenterConfig;
use crate::error::{Error, Result};
use crate::raster::{LabelMap, Raster};

/// Rectangular tiling with `rows = round(sqrt(k * H / W))` and
/// `cols = ceil(k / rows)`, cut at evenly spaced positions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GridLayout {
    pub rows: usize,
    pub cols: usize,
    /// `rows + 1` cut positions along y, from 0 to height.
    pub row_cuts: Vec<usize>,
    /// `cols + 1` cut positions along x, from 0 to width.
    pub col_cuts: Vec<usize>,
}

impl GridLayout {
    pub fn new(width: usize, height: usize, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidConfig("k_desired must be at least 1".into()));
        }
        if k > width * height {
            return Err(Error::KTooLarge {
                k,
                pixels: width * height,
            });
        }
        let rows = ((k as f64 * height as f64 / width as f64).sqrt().round() as usize).clamp(1, height);
        let cols = k.div_ceil(rows).clamp(1, width);
        let cuts = |n: usize, len: usize| (0..=n).map(|i| i * len / n).collect::<Vec<_>>();
        Ok(Self {
            rows,
            cols,
            row_cuts: cuts(rows, height),
            col_cuts: cuts(cols, width),
        })
    }

    pub fn cells(&self) -> usize {
        self.rows * self.cols
    }

    /// Center pixel `(x, y)` of every cell, in label order.
    pub fn seeds(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.cells());
        for r in 0..self.rows {
            let y = (self.row_cuts[r] + self.row_cuts[r + 1] - 1) / 2;
            for c in 0..self.cols {
                let x = (self.col_cuts[c] + self.col_cuts[c + 1] - 1) / 2;
                out.push((x, y));
            }
        }
        out
    }

    /// Cell label of every pixel, row-major.
    pub fn labels(&self) -> Vec<u32> {
        let width = *self.col_cuts.last().unwrap();
        let height = *self.row_cuts.last().unwrap();
        let col_of: Vec<u32> = (0..self.cols)
            .flat_map(|c| std::iter::repeat_n(c as u32, self.col_cuts[c + 1] - self.col_cuts[c]))
            .collect();
        let mut out = Vec::with_capacity(width * height);
        for r in 0..self.rows {
            let base = (r * self.cols) as u32;
            for _ in self.row_cuts[r]..self.row_cuts[r + 1] {
                out.extend(col_of.iter().map(|c| base + c));
            }
        }
        out
    }
}

pub fn grid_segment(raster: &Raster, cfg: &SegmenterConfig) -> Result<LabelMap> {
    cfg.check_against(raster)?;
    let (w, h) = (raster.width(), raster.height());
    let layout = GridLayout::new(w, h, cfg.k_desired)?;
    let k = layout.cells();
    Ok(LabelMap::from_normalized(w, h, layout.labels(), k))
}
