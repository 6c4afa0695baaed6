//! Seeded synthetic scenes: a textured forest background with elliptical
//! clearings and optional excluded rectangles, with matching ground truth.
//!
//! Smooth illumination and moisture fields and per-clearing soil/pasture
//! mixtures give the scene several spatially coherent spectral directions,
//! so leading principal components carry structure rather than noise.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::{GroundTruth, GtClass, Raster};

const FOREST: [f32; 7] = [0.04, 0.06, 0.04, 0.35, 0.16, 0.08, 0.30];
const SOIL: [f32; 7] = [0.12, 0.15, 0.19, 0.26, 0.36, 0.30, 0.30];
const PASTURE: [f32; 7] = [0.07, 0.10, 0.08, 0.30, 0.26, 0.14, 0.27];
/// Response of each band to the moisture field (shortwave infrared dominated).
const MOISTURE: [f32; 7] = [0.0, 0.0, 0.0, 0.01, -0.04, -0.03, 0.0];
const WATER: [f32; 7] = [0.05, 0.04, 0.03, 0.02, 0.01, 0.01, 0.02];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SceneParams {
    pub width: usize,
    pub height: usize,
    /// Number of elliptical clearings.
    pub blobs: usize,
    pub min_radius: f64,
    pub max_radius: f64,
    /// Standard deviation of independent per-band noise.
    pub noise: f64,
    /// Relative amplitude of the per-pixel canopy brightness texture on forest pixels.
    pub texture: f64,
    /// Relative amplitude of the smooth illumination field.
    pub relief: f64,
    /// Number of excluded rectangles.
    pub excluded: usize,
    pub seed: u64,
}

impl Default for SceneParams {
    fn default() -> Self {
        Self {
            width: 256,
            height: 256,
            blobs: 12,
            min_radius: 8.0,
            max_radius: 30.0,
            noise: 0.002,
            texture: 0.02,
            relief: 0.1,
            excluded: 1,
            seed: 7,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Scene {
    /// Seven-band reflectance-like raster.
    pub raster: Raster,
    pub gt: GroundTruth,
}

struct Ellipse {
    cx: f64,
    cy: f64,
    a: f64,
    b: f64,
    cos: f64,
    sin: f64,
}

impl Ellipse {
    fn contains(&self, x: f64, y: f64) -> bool {
        let (dx, dy) = (x - self.cx, y - self.cy);
        let u = dx * self.cos + dy * self.sin;
        let v = -dx * self.sin + dy * self.cos;
        (u / self.a).powi(2) + (v / self.b).powi(2) <= 1.0
    }
}

pub fn generate_scene(p: &SceneParams) -> Result<Scene> {
    if p.width == 0 || p.height == 0 {
        return Err(Error::InvalidDimensions(format!("{}x{}", p.width, p.height)));
    }
    if !(p.min_radius > 0.0 && p.max_radius >= p.min_radius)
        || !(p.noise >= 0.0)
        || !(p.texture >= 0.0)
        || !(p.relief >= 0.0 && p.relief < 1.0)
    {
        return Err(Error::InvalidConfig(format!("invalid scene parameters {p:?}")));
    }
    let (w, h) = (p.width, p.height);
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);

    let (fx, fy, phase) = (
        rng.random_range(1.0..3.0) * std::f64::consts::TAU / w as f64,
        rng.random_range(1.0..3.0) * std::f64::consts::TAU / h as f64,
        rng.random_range(0.0..std::f64::consts::TAU),
    );
    let illumination = |x: f64, y: f64| 1.0 + p.relief * (x * fx + phase).sin() * (y * fy).cos();
    let (mx, my) = (fx * 0.7, fy * 1.3);
    let moisture = |x: f64, y: f64| (x * mx).cos() * (y * my + phase).sin();

    let ellipses: Vec<Ellipse> = (0..p.blobs)
        .map(|_| {
            let angle: f64 = rng.random_range(0.0..std::f64::consts::PI);
            Ellipse {
                cx: rng.random_range(0.0..w as f64),
                cy: rng.random_range(0.0..h as f64),
                a: rng.random_range(p.min_radius..=p.max_radius),
                b: rng.random_range(p.min_radius..=p.max_radius),
                cos: angle.cos(),
                sin: angle.sin(),
            }
        })
        .collect();
    let rects: Vec<(usize, usize, usize, usize)> = (0..p.excluded)
        .map(|_| {
            let rw = rng.random_range(1..=(w / 8).max(1));
            let rh = rng.random_range(1..=(h / 8).max(1));
            (rng.random_range(0..=w - rw), rng.random_range(0..=h - rh), rw, rh)
        })
        .collect();

    let soil: Vec<f64> = ellipses.iter().map(|_| rng.random_range(0.1..0.9)).collect();

    let mut classes = vec![GtClass::Forest; w * h];
    let mut blob_of = vec![usize::MAX; w * h];
    for y in 0..h {
        for x in 0..w {
            let (fx, fy) = (x as f64 + 0.5, y as f64 + 0.5);
            let c = &mut classes[y * w + x];
            if rects.iter().any(|&(rx, ry, rw, rh)| x >= rx && x < rx + rw && y >= ry && y < ry + rh) {
                *c = GtClass::Excluded;
            } else if let Some(b) = ellipses.iter().position(|e| e.contains(fx, fy)) {
                *c = GtClass::Deforest;
                blob_of[y * w + x] = b;
            }
        }
    }

    let noise = Normal::new(0.0, p.noise).expect("noise is finite and non-negative");
    let canopy = Normal::new(0.0, p.texture).expect("texture is finite and non-negative");
    let mut planes = vec![vec![0.0f32; w * h]; FOREST.len()];
    let mut spectrum = [0.0f64; 7];
    for (i, &c) in classes.iter().enumerate() {
        let (x, y) = ((i % w) as f64, (i / w) as f64);
        let gain = match c {
            GtClass::Forest => {
                spectrum = FOREST.map(f64::from);
                illumination(x, y) * (1.0 + canopy.sample(&mut rng))
            }
            GtClass::Deforest => {
                let f = soil[blob_of[i]];
                for (s, (&a, &b)) in spectrum.iter_mut().zip(SOIL.iter().zip(&PASTURE)) {
                    *s = f * a as f64 + (1.0 - f) * b as f64;
                }
                illumination(x, y)
            }
            GtClass::Excluded => {
                spectrum = WATER.map(f64::from);
                1.0
            }
        };
        let wet = if c.is_valid() { moisture(x, y) } else { 0.0 };
        for ((plane, &v), &m) in planes.iter_mut().zip(&spectrum).zip(&MOISTURE) {
            plane[i] = (v * gain + wet * m as f64 + noise.sample(&mut rng)).max(0.0) as f32;
        }
    }
    Ok(Scene {
        raster: Raster::from_bands(w, h, &planes)?,
        gt: GroundTruth::new(w, h, classes)?,
    })
}
