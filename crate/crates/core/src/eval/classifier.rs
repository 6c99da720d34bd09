use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, FlrError, Result};
use crate::linalg::{ensure_finite, Mat};

/// Per-feature z-scoring learned on training data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub means: Vec<f64>,
    pub scales: Vec<f64>,
}

impl Standardizer {
    /// Population mean and standard deviation per column; constant columns
    /// get scale 1.
    pub fn fit(x: &Mat) -> Result<Self> {
        ensure_finite(x, "standardizer input")?;
        let n = x.nrows() as f64;
        let mut means = Vec::with_capacity(x.ncols());
        let mut scales = Vec::with_capacity(x.ncols());
        for col in x.column_iter() {
            let mean = col.sum() / n;
            let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
            let sd = var.sqrt();
            means.push(mean);
            scales.push(if sd > 0.0 { sd } else { 1.0 });
        }
        Ok(Standardizer { means, scales })
    }

    pub fn apply(&self, x: &Mat) -> Result<Mat> {
        if x.ncols() != self.means.len() {
            return invalid(format!(
                "standardizer expects {} features, got {}",
                self.means.len(),
                x.ncols()
            ));
        }
        let mut out = x.clone();
        for (j, mut col) in out.column_iter_mut().enumerate() {
            col.apply(|v| *v = (*v - self.means[j]) / self.scales[j]);
        }
        Ok(out)
    }
}

/// Linear projection classifier: `argmax_k (standardize(x)·Z)_k`, ties to
/// the lowest class index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Classifier {
    pub z: Mat,
    pub standardizer: Option<Standardizer>,
    pub class_names: Option<Vec<String>>,
}

impl Classifier {
    pub fn new(z: Mat, standardizer: Option<Standardizer>) -> Result<Self> {
        ensure_finite(&z, "projection matrix")?;
        if let Some(s) = &standardizer {
            if s.means.len() != z.nrows() || s.scales.len() != z.nrows() {
                return invalid("standardizer length does not match the feature dimension");
            }
            if s.scales.iter().any(|&v| !(v > 0.0 && v.is_finite())) {
                return invalid("standardizer scales must be positive");
            }
        }
        Ok(Classifier {
            z,
            standardizer,
            class_names: None,
        })
    }

    pub fn with_class_names(mut self, names: Option<Vec<String>>) -> Result<Self> {
        if let Some(n) = &names {
            if n.len() != self.n_classes() {
                return invalid("class name count does not match the class dimension");
            }
        }
        self.class_names = names;
        Ok(self)
    }

    pub fn n_features(&self) -> usize {
        self.z.nrows()
    }

    pub fn n_classes(&self) -> usize {
        self.z.ncols()
    }

    pub fn predict(&self, x: &[f64]) -> Result<usize> {
        if x.len() != self.n_features() {
            return invalid(format!(
                "feature row has length {}, expected {}",
                x.len(),
                self.n_features()
            ));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return invalid("feature row contains non-finite values");
        }
        let row: Vec<f64> = match &self.standardizer {
            Some(s) => x
                .iter()
                .enumerate()
                .map(|(j, v)| (v - s.means[j]) / s.scales[j])
                .collect(),
            None => x.to_vec(),
        };
        let mut best = 0;
        let mut best_score = f64::NEG_INFINITY;
        for k in 0..self.n_classes() {
            let score: f64 = row
                .iter()
                .zip(self.z.column(k).iter())
                .map(|(a, b)| a * b)
                .sum();
            if score > best_score {
                best = k;
                best_score = score;
            }
        }
        Ok(best)
    }

    pub fn predict_all(&self, x: &Mat) -> Result<Vec<usize>> {
        (0..x.nrows())
            .map(|i| {
                let row: Vec<f64> = x.row(i).iter().copied().collect();
                self.predict(&row)
            })
            .collect()
    }

    /// Plain-text model:
    ///
    /// ```text
    /// <d> <c>
    /// d lines of c values (row-major Z)
    /// standardizer <0|d>
    /// that many lines of "<mean> <scale>"
    /// classes <0|c>
    /// that many lines, one class name each
    /// ```
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{} {}", self.n_features(), self.n_classes());
        for row in self.z.row_iter() {
            let vals: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            let _ = writeln!(out, "{}", vals.join(" "));
        }
        match &self.standardizer {
            Some(s) => {
                let _ = writeln!(out, "standardizer {}", s.means.len());
                for (m, sc) in s.means.iter().zip(&s.scales) {
                    let _ = writeln!(out, "{m} {sc}");
                }
            }
            None => out.push_str("standardizer 0\n"),
        }
        match &self.class_names {
            Some(names) => {
                let _ = writeln!(out, "classes {}", names.len());
                for name in names {
                    let _ = writeln!(out, "{name}");
                }
            }
            None => out.push_str("classes 0\n"),
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let mut next = |what: &str| -> Result<(usize, &str)> {
            lines
                .next()
                .map(|(i, l)| (i + 1, l))
                .ok_or_else(|| model_err(0, format!("unexpected end of file, expected {what}")))
        };
        let numbers = |line: usize, s: &str| -> Result<Vec<f64>> {
            s.split_whitespace()
                .map(|t| {
                    t.parse::<f64>()
                        .map_err(|_| model_err(line, format!("bad number '{t}'")))
                })
                .collect()
        };

        let (ln, header) = next("header")?;
        let dims = numbers(ln, header)?;
        if dims.len() != 2 || dims.iter().any(|v| *v < 1.0 || v.fract() != 0.0) {
            return Err(model_err(ln, "header must be '<d> <c>'".into()));
        }
        let (d, c) = (dims[0] as usize, dims[1] as usize);
        let mut z = Mat::zeros(d, c);
        for i in 0..d {
            let (ln, line) = next("projection row")?;
            let vals = numbers(ln, line)?;
            if vals.len() != c {
                return Err(model_err(ln, format!("expected {c} values")));
            }
            for (j, v) in vals.into_iter().enumerate() {
                z[(i, j)] = v;
            }
        }

        let count = |ln: usize, line: &str, key: &str| -> Result<usize> {
            line.strip_prefix(key)
                .and_then(|rest| rest.trim().parse::<usize>().ok())
                .ok_or_else(|| model_err(ln, format!("expected '{key} <count>'")))
        };
        let (ln, line) = next("standardizer section")?;
        let k = count(ln, line, "standardizer")?;
        let standardizer = if k == 0 {
            None
        } else {
            let mut means = Vec::with_capacity(k);
            let mut scales = Vec::with_capacity(k);
            for _ in 0..k {
                let (ln, line) = next("standardizer row")?;
                let vals = numbers(ln, line)?;
                if vals.len() != 2 {
                    return Err(model_err(ln, "expected '<mean> <scale>'".into()));
                }
                means.push(vals[0]);
                scales.push(vals[1]);
            }
            Some(Standardizer { means, scales })
        };

        let names = match next("classes section") {
            Ok((ln, line)) => {
                let k = count(ln, line, "classes")?;
                let mut names = Vec::with_capacity(k);
                for _ in 0..k {
                    names.push(next("class name")?.1.to_string());
                }
                (k > 0).then_some(names)
            }
            Err(_) => None,
        };
        Classifier::new(z, standardizer)?.with_class_names(names)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_text(&std::fs::read_to_string(path)?)
    }
}

fn model_err(line: usize, message: String) -> FlrError {
    FlrError::Parse {
        path: "<model>".into(),
        row: line,
        message,
    }
}

/// Fraction of rows of `x` whose prediction equals `labels`.
pub fn accuracy(clf: &Classifier, x: &Mat, labels: &[usize]) -> Result<f64> {
    if x.nrows() == 0 {
        return invalid("accuracy needs a non-empty test set");
    }
    if labels.len() != x.nrows() {
        return invalid(format!("{} rows but {} labels", x.nrows(), labels.len()));
    }
    let predicted = clf.predict_all(x)?;
    let correct = predicted.iter().zip(labels).filter(|(p, t)| p == t).count();
    Ok(correct as f64 / labels.len() as f64)
}
