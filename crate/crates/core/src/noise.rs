//! Seeded hybrid-noise injection: additive feature noise and symmetric
//! (flip-to-another-class) label noise.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Normal};
use serde::{Deserialize, Serialize};

use crate::dataset::{class_of_row, ensure_one_hot};
use crate::error::{invalid, Result};
use crate::linalg::{ensure_finite, Mat};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum FeatureNoise {
    #[default]
    None,
    Gaussian,
    Laplacian,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseSpec {
    pub feature_family: FeatureNoise,
    /// Standard deviation of the additive feature noise, for either family.
    pub sigma_f: f64,
    /// Fraction of examples whose label is replaced.
    pub eta_l: f64,
    pub seed: u64,
}

impl Default for NoiseSpec {
    fn default() -> Self {
        NoiseSpec {
            feature_family: FeatureNoise::None,
            sigma_f: 0.0,
            eta_l: 0.0,
            seed: 0,
        }
    }
}

// Separate ChaCha streams so feature and label draws never share randomness.
const FEATURE_STREAM: u64 = 1;
const LABEL_STREAM: u64 = 2;

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

impl NoiseSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma_f.is_finite() && self.sigma_f >= 0.0) {
            return invalid(format!("sigma_f must be >= 0, got {}", self.sigma_f));
        }
        if !(0.0..=1.0).contains(&self.eta_l) {
            return invalid(format!("eta_l must lie in [0, 1], got {}", self.eta_l));
        }
        Ok(())
    }

    pub fn with_seed(&self, seed: u64) -> NoiseSpec {
        NoiseSpec {
            seed,
            ..self.clone()
        }
    }
}

/// Returns `x + E` with i.i.d. zero-mean entries of standard deviation
/// `sigma_f`. Laplacian draws use scale `sigma_f/√2`.
pub fn inject_feature_noise(x: &Mat, spec: &NoiseSpec) -> Result<Mat> {
    spec.validate()?;
    ensure_finite(x, "feature matrix")?;
    if spec.sigma_f == 0.0 || spec.feature_family == FeatureNoise::None {
        return Ok(x.clone());
    }
    let mut rng = rng_for(spec.seed, FEATURE_STREAM);
    let mut out = x.clone();
    // Fill in row-major order so the noise pattern does not depend on storage layout.
    let (n, d) = x.shape();
    match spec.feature_family {
        FeatureNoise::Gaussian => {
            let normal = Normal::new(0.0, spec.sigma_f).expect("sigma_f validated");
            for i in 0..n {
                for j in 0..d {
                    out[(i, j)] += normal.sample(&mut rng);
                }
            }
        }
        FeatureNoise::Laplacian => {
            // Difference of two Exp(1/b) variables is Laplace(0, b).
            let b = spec.sigma_f / std::f64::consts::SQRT_2;
            let exp = Exp::new(1.0 / b).expect("scale validated");
            for i in 0..n {
                for j in 0..d {
                    let draw: f64 = exp.sample(&mut rng) - exp.sample(&mut rng);
                    out[(i, j)] += draw;
                }
            }
        }
        FeatureNoise::None => unreachable!(),
    }
    Ok(out)
}

/// Picks `⌊eta_l·n⌋` distinct rows uniformly and moves each to a class drawn
/// uniformly from the other `c − 1` classes. Returns the new label matrix and
/// the indices of the changed rows in ascending order.
pub fn inject_label_noise(y: &Mat, spec: &NoiseSpec) -> Result<(Mat, Vec<usize>)> {
    spec.validate()?;
    ensure_one_hot(y)?;
    let (n, c) = y.shape();
    let flips = (spec.eta_l * n as f64).floor() as usize;
    if flips == 0 {
        return Ok((y.clone(), Vec::new()));
    }
    if c < 2 {
        return invalid("label noise needs at least two classes");
    }
    let mut rng = rng_for(spec.seed, LABEL_STREAM);
    let mut rows = sample(&mut rng, n, flips).into_vec();
    rows.sort_unstable();
    let mut out = y.clone();
    for &i in &rows {
        let old = class_of_row(y, i);
        let mut new = rng.random_range(0..c - 1);
        if new >= old {
            new += 1;
        }
        out[(i, old)] = 0.0;
        out[(i, new)] = 1.0;
    }
    Ok((out, rows))
}
