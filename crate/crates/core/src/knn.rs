//! k-nearest-neighbor classification of segment feature vectors.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par::Backend;
use crate::raster::GtClass;

/// A z-scored kNN model. Features with zero variance in the training set are dropped.
#[derive(Clone, Debug)]
pub struct KnnClassifier {
    k: usize,
    dims: usize,
    kept: Vec<usize>,
    mean: Vec<f64>,
    std: Vec<f64>,
    /// z-scored training points restricted to `kept` features.
    points: Vec<Vec<f64>>,
    classes: Vec<GtClass>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub accuracy: f64,
    pub f1_forest: f64,
    pub f1_deforest: f64,
    pub n_test: usize,
}

impl KnnClassifier {
    pub fn fit(train: &[(Vec<f64>, GtClass)], k: usize) -> Result<Self> {
        let Some((first, _)) = train.first() else {
            return Err(Error::EmptyTrainingSet);
        };
        if k == 0 {
            return Err(Error::InvalidConfig("k must be at least 1".into()));
        }
        let dims = first.len();
        if let Some((v, _)) = train.iter().find(|(v, _)| v.len() != dims) {
            return Err(Error::DimensionMismatch(format!(
                "training vectors of length {dims} and {}",
                v.len()
            )));
        }
        if let Some((_, c)) = train.iter().find(|(_, c)| !c.is_valid()) {
            return Err(Error::InvalidConfig(format!("training label {c:?} is not a class")));
        }
        let k_eff = if k > train.len() {
            log::warn!("k = {k} exceeds {} training points, clamping", train.len());
            train.len()
        } else {
            k
        };

        let n = train.len() as f64;
        let mut mean = vec![0.0; dims];
        for (v, _) in train {
            for (m, x) in mean.iter_mut().zip(v) {
                *m += x;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = vec![0.0; dims];
        for (v, _) in train {
            for ((s, x), m) in var.iter_mut().zip(v).zip(&mean) {
                *s += (x - m) * (x - m);
            }
        }
        let std: Vec<f64> = var.iter().map(|s| (s / n).sqrt()).collect();
        let kept: Vec<usize> = (0..dims).filter(|&d| std[d] > 0.0).collect();
        if kept.len() < dims {
            log::warn!("dropping {} zero-variance features", dims - kept.len());
        }

        let mut model = Self {
            k: k_eff,
            dims,
            kept,
            mean,
            std,
            points: Vec::new(),
            classes: train.iter().map(|(_, c)| *c).collect(),
        };
        model.points = train.iter().map(|(v, _)| model.standardize(v)).collect();
        Ok(model)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn kept_features(&self) -> &[usize] {
        &self.kept
    }

    fn standardize(&self, v: &[f64]) -> Vec<f64> {
        self.kept
            .iter()
            .map(|&d| (v[d] - self.mean[d]) / self.std[d])
            .collect()
    }

    /// Majority vote of the `k` nearest training points (ties in distance go
    /// to the earlier training point); equal votes go to the class with the
    /// smaller mean neighbor distance, then to forest.
    pub fn predict_one(&self, v: &[f64]) -> Result<GtClass> {
        if v.len() != self.dims {
            return Err(Error::DimensionMismatch(format!(
                "expected {} features, got {}",
                self.dims,
                v.len()
            )));
        }
        let z = self.standardize(v);
        let mut dist: Vec<(f64, usize)> = self
            .points
            .iter()
            .enumerate()
            .map(|(i, p)| (p.iter().zip(&z).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt(), i))
            .collect();
        let k = self.k;
        if k < dist.len() {
            dist.select_nth_unstable_by(k - 1, |a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            dist.truncate(k);
        }
        let mut votes = [(0usize, 0.0f64); 2];
        for &(d, i) in &dist {
            let slot = usize::from(self.classes[i] == GtClass::Deforest);
            votes[slot].0 += 1;
            votes[slot].1 += d;
        }
        let [(nf, sf), (nd, sd)] = votes;
        Ok(if nf != nd {
            if nf > nd {
                GtClass::Forest
            } else {
                GtClass::Deforest
            }
        } else if sd / (nd as f64) < sf / (nf as f64) {
            GtClass::Deforest
        } else {
            GtClass::Forest
        })
    }

    pub fn predict(&self, test: &[Vec<f64>]) -> Result<Vec<GtClass>> {
        self.predict_with(Backend::default(), test)
    }

    pub fn predict_with(&self, backend: Backend, test: &[Vec<f64>]) -> Result<Vec<GtClass>> {
        backend.map_slice(test, |v| self.predict_one(v)).into_iter().collect()
    }
}

fn f1(tp: usize, fp: usize, fn_: usize) -> f64 {
    if tp == 0 {
        0.0
    } else {
        2.0 * tp as f64 / (2 * tp + fp + fn_) as f64
    }
}

/// Accuracy and per-class F1 of `predicted` against `actual`.
pub fn score(predicted: &[GtClass], actual: &[GtClass]) -> Result<ClassMetrics> {
    if predicted.len() != actual.len() {
        return Err(Error::DimensionMismatch("prediction/label count".into()));
    }
    if predicted.is_empty() {
        return Err(Error::EmptyInput("no test points".into()));
    }
    let mut m = [[0usize; 2]; 2];
    for (&p, &a) in predicted.iter().zip(actual) {
        m[usize::from(a == GtClass::Deforest)][usize::from(p == GtClass::Deforest)] += 1;
    }
    let correct = m[0][0] + m[1][1];
    Ok(ClassMetrics {
        accuracy: correct as f64 / predicted.len() as f64,
        f1_forest: f1(m[0][0], m[1][0], m[0][1]),
        f1_deforest: f1(m[1][1], m[0][1], m[1][0]),
        n_test: predicted.len(),
    })
}

/// Fits on `train`, predicts `test`, and scores when test labels are known.
pub fn knn_classify(
    train: &[(Vec<f64>, GtClass)],
    test: &[(Vec<f64>, Option<GtClass>)],
    k: usize,
) -> Result<(Vec<GtClass>, Option<ClassMetrics>)> {
    let model = KnnClassifier::fit(train, k)?;
    let vectors: Vec<Vec<f64>> = test.iter().map(|(v, _)| v.clone()).collect();
    let predicted = model.predict(&vectors)?;
    let labels: Option<Vec<GtClass>> = test.iter().map(|(_, c)| *c).collect();
    let metrics = match labels {
        Some(actual) if !actual.is_empty() => Some(score(&predicted, &actual)?),
        _ => None,
    };
    Ok((predicted, metrics))
}
