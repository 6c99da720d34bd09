use flr::dataset::{class_of_row, labels_of, one_hot};
use flr::noise::{inject_feature_noise, inject_label_noise, FeatureNoise, NoiseSpec};
use flr::Mat;
use statrs::distribution::{ChiSquared, ContinuousCDF};

fn moments(v: &[f64]) -> (f64, f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    let m4 = v.iter().map(|x| (x - mean).powi(4)).sum::<f64>() / n;
    (mean, var.sqrt(), m4 / (var * var))
}

fn draws(family: FeatureNoise, sigma: f64, seed: u64) -> Vec<f64> {
    let spec = NoiseSpec {
        feature_family: family,
        sigma_f: sigma,
        eta_l: 0.0,
        seed,
    };
    inject_feature_noise(&Mat::zeros(1000, 1000), &spec)
        .unwrap()
        .iter()
        .copied()
        .collect()
}

#[test]
fn feature_noise_has_the_right_shape() {
    let (mean, sd, kurt) = moments(&draws(FeatureNoise::Gaussian, 0.7, 4));
    assert!(mean.abs() < 0.005 && (sd / 0.7 - 1.0).abs() < 0.01);
    assert!((kurt - 3.0).abs() < 0.05, "gaussian kurtosis {kurt}");
    let (mean, sd, kurt) = moments(&draws(FeatureNoise::Laplacian, 0.7, 4));
    assert!(mean.abs() < 0.005 && (sd / 0.7 - 1.0).abs() < 0.01);
    assert!((kurt - 6.0).abs() < 0.3, "laplace kurtosis {kurt}");
}

#[test]
fn feature_noise_is_seeded() {
    let a = draws(FeatureNoise::Laplacian, 1.0, 9);
    assert_eq!(a, draws(FeatureNoise::Laplacian, 1.0, 9));
    assert_ne!(a, draws(FeatureNoise::Laplacian, 1.0, 10));
}

#[test]
fn label_alternatives_are_uniform_per_source_class() {
    let (n, c) = (20_000, 5);
    let labels: Vec<usize> = (0..n).map(|i| i % c).collect();
    let y = one_hot(&labels, c).unwrap();
    let spec = NoiseSpec {
        eta_l: 0.5,
        seed: 21,
        ..NoiseSpec::default()
    };
    let (noisy, rows) = inject_label_noise(&y, &spec).unwrap();
    assert_eq!(rows.len(), n / 2);
    let mut counts = vec![vec![0usize; c]; c];
    for &i in &rows {
        counts[labels[i]][class_of_row(&noisy, i)] += 1;
    }
    let critical = ChiSquared::new((c - 2) as f64).unwrap().inverse_cdf(0.99);
    for (from, row) in counts.iter().enumerate() {
        assert_eq!(row[from], 0);
        let total: usize = row.iter().sum();
        let expected = total as f64 / (c - 1) as f64;
        let stat: f64 = row
            .iter()
            .enumerate()
            .filter(|&(to, _)| to != from)
            .map(|(_, &k)| (k as f64 - expected).powi(2) / expected)
            .sum();
        assert!(stat < critical, "class {from}: chi2 {stat} >= {critical}");
    }
    // Rows not selected keep their label.
    let noisy_labels = labels_of(&noisy);
    let changed = (0..n).filter(|&i| noisy_labels[i] != labels[i]).count();
    assert_eq!(changed, rows.len());
}
