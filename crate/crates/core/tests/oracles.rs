mod common;

use common::*;
use forestseg::campaign::{aggregate_votes, campaign_accuracy, select_samples, task_entropy, Answer, TaskVotes};
use forestseg::features::{glcm_features, GlcmParams};
use forestseg::metrics::{boundary_recall, compactness, regularity, undersegmentation_error, SegmentRecord};
use forestseg::preprocess::{fit_pca, pca_fit_project};
use forestseg::{GtClass, LabelMap, Raster};
use rand::Rng;

#[test]
fn spx_metrics_match_brute_force() {
    let mut r = rng(11);
    for _ in 0..60 {
        let (w, h) = (r.random_range(2..20), r.random_range(2..20));
        let labels = random_labels(&mut r, w, h);
        let gt = random_gt(&mut r, w, h);
        if gt.valid_count() == 0 {
            continue;
        }
        assert!((boundary_recall(&labels, &gt).unwrap() - br_oracle(&labels, &gt)).abs() < 1e-12);
        assert!((undersegmentation_error(&labels, &gt).unwrap() - ue_oracle(&labels, &gt)).abs() < 1e-12);
        assert!((compactness(&labels) - co_oracle(&labels)).abs() < 1e-12);
        assert!((regularity(&labels) - reg_oracle(&labels)).abs() < 1e-9);
    }
}

#[test]
fn br_radius_grows_with_image() {
    // on 600x600 the radius is 2: a boundary shifted by two pixels still matches
    let (w, h) = (600, 600);
    let gt_classes = (0..w * h)
        .map(|p| if p % w < 300 { GtClass::Forest } else { GtClass::Deforest })
        .collect();
    let gt = forestseg::GroundTruth::new(w, h, gt_classes).unwrap();
    for (shift, expect) in [(2usize, 1.0), (4, 0.0)] {
        let labels = LabelMap::from_raw(w, h, (0..w * h).map(|p| u32::from(p % w >= 300 + shift)).collect()).unwrap();
        assert_eq!(boundary_recall(&labels, &gt).unwrap(), expect);
        assert_eq!(br_oracle(&labels, &gt), expect);
    }
}

#[test]
fn pca_matches_jacobi_oracle() {
    let mut r = rng(5);
    let raster = random_raster(&mut r, 24, 20, 5);
    let (model, projected) = pca_fit_project(&raster, 3, None).unwrap();
    let oracle = pca_oracle(&raster, 3);
    let got: Vec<f64> = projected.data().iter().map(|&v| v as f64).collect();
    assert!(max_abs_diff(&got, &oracle) < 1e-5);
    let (values, _) = {
        let n = raster.pixel_count();
        let x = |p: usize, k: usize| raster.data()[k * n + p] as f64;
        let mean: Vec<f64> = (0..5).map(|k| (0..n).map(|p| x(p, k)).sum::<f64>() / n as f64).collect();
        let cov: Vec<Vec<f64>> = (0..5)
            .map(|i| (0..5).map(|j| (0..n).map(|p| (x(p, i) - mean[i]) * (x(p, j) - mean[j])).sum::<f64>() / (n - 1) as f64).collect())
            .collect();
        jacobi_eigen(&cov)
    };
    for (a, b) in model.explained_variance.iter().zip(&values) {
        assert!((a - b).abs() < 1e-9 * values[0]);
    }
    // all eigenvalues together conserve the covariance trace
    let full = fit_pca(&raster, 5, None).unwrap();
    assert!((full.eigenvalues.iter().sum::<f64>() - values.iter().sum::<f64>()).abs() < 1e-9);
}

#[test]
fn glcm_matches_pair_enumeration() {
    let mut r = rng(3);
    for _ in 0..10 {
        let (w, h) = (r.random_range(4..12), r.random_range(4..12));
        let data = (0..w * h * 3).map(|_| r.random_range(0.0f32..256.0)).collect();
        let raster = Raster::new(w, h, 3, data).unwrap();
        let labels = random_labels(&mut r, w, h);
        for s in 0..labels.k() as u32 {
            if labels.sizes()[s as usize] < 4 {
                continue;
            }
            let got = glcm_features(&raster, &labels, s, &GlcmParams::default()).unwrap();
            let oracle = glcm_oracle(&raster, &labels, s, 32);
            assert!(max_abs_diff(&got.values, &oracle) < 1e-9, "segment {s}");
        }
    }
}

#[test]
fn votes_match_recount() {
    let mut r = rng(8);
    let tasks: Vec<TaskVotes> = (0..100)
        .map(|i| TaskVotes {
            task_id: format!("t{i}"),
            segment_id: i,
            n_forest: r.random_range(0..6),
            n_deforest: r.random_range(0..6),
            n_undefined: r.random_range(1..4),
        })
        .collect();
    let majorities = aggregate_votes(&tasks).unwrap();
    for (t, a) in tasks.iter().zip(&majorities) {
        let counts = [(t.n_forest, Answer::Forest), (t.n_deforest, Answer::Deforest), (t.n_undefined, Answer::Undefined)];
        let top = counts.iter().map(|c| c.0).max().unwrap();
        let winners: Vec<Answer> = counts.iter().filter(|c| c.0 == top).map(|c| c.1).collect();
        let expect = if winners.len() == 1 { winners[0] } else { Answer::Undefined };
        assert_eq!(*a, expect);
    }

    // accuracy on the first 50 tasks against random reference classes
    let records: Vec<SegmentRecord> = (0..50)
        .map(|i| if r.random_bool(0.5) { SegmentRecord::from_counts(i, 90, 10) } else { SegmentRecord::from_counts(i, 10, 90) })
        .collect();
    let correct = (0..50)
        .filter(|&i| match majorities[i] {
            Answer::Forest => records[i].n_forest > records[i].n_deforest,
            Answer::Deforest => records[i].n_deforest > records[i].n_forest,
            Answer::Undefined => false,
        })
        .count();
    let acc = campaign_accuracy(&tasks[..50], &majorities[..50], &records).unwrap();
    assert!((acc - 2.0 * correct as f64).abs() < 1e-12);
}

#[test]
fn selection_hand_instance() {
    // per-task entropies (bits):
    // 0: {5,0,0} 0        1: {4,1,0} 0.7219   2: {0,6,0} 0
    // 3: {3,3,0} 1 (undefined)                4: {2,1,1} 1.5
    // 5: {1,8,1} 0.9219   6: {0,9,1} 0.4690   7: {7,2,1} 1.1568
    // 8: {8,0,1} 0.5033   9: {1,1,1} log2 3 (undefined)
    let raw = [(5, 0, 0), (4, 1, 0), (0, 6, 0), (3, 3, 0), (2, 1, 1), (1, 8, 1), (0, 9, 1), (7, 2, 1), (8, 0, 1), (1, 1, 1)];
    let tasks: Vec<TaskVotes> = raw
        .iter()
        .enumerate()
        .map(|(i, &(f, d, u))| TaskVotes {
            task_id: format!("t{i}"),
            segment_id: i as u32,
            n_forest: f,
            n_deforest: d,
            n_undefined: u,
        })
        .collect();
    let expect_h = [0.0, 0.7219280948873623, 0.0, 1.0, 1.5, 0.9219280948873623, 0.4689955935892812, 1.1567796494470395, 0.5032583347756457, 3f64.log2()];
    for (t, h) in tasks.iter().zip(expect_h) {
        assert!((task_entropy(t) - h).abs() < 1e-12, "{}", t.task_id);
    }
    let maj = aggregate_votes(&tasks).unwrap();
    let sel = select_samples(&tasks, &maj, 0.9);
    let forest: Vec<u32> = sel.forest.iter().map(|s| s.0).collect();
    let deforest: Vec<u32> = sel.deforest.iter().map(|s| s.0).collect();
    assert_eq!(forest, vec![0, 8, 1]);
    assert_eq!(deforest, vec![2, 6]);
}
