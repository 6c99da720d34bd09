//! Datasets: one-hot label handling, CSV ingestion, seeded splitting and the
//! planted low-rank generator used by tests and experiments.

use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use rand::seq::{index::sample, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, FlrError, Result};
use crate::linalg::{ensure_finite, Mat};
use crate::noise::{inject_label_noise, NoiseSpec};

/// Observed features (n×d) with one-hot labels (n×c).
#[derive(Debug, Clone, PartialEq)]
pub struct NoisyDataset {
    pub x: Mat,
    pub y: Mat,
    pub class_names: Option<Vec<String>>,
}

impl NoisyDataset {
    pub fn new(x: Mat, y: Mat, class_names: Option<Vec<String>>) -> Result<Self> {
        ensure_finite(&x, "feature matrix")?;
        ensure_one_hot(&y)?;
        if x.nrows() != y.nrows() {
            return invalid(format!(
                "{} feature rows but {} label rows",
                x.nrows(),
                y.nrows()
            ));
        }
        if let Some(names) = &class_names {
            if names.len() != y.ncols() {
                return invalid(format!(
                    "{} class names for {} classes",
                    names.len(),
                    y.ncols()
                ));
            }
        }
        Ok(NoisyDataset { x, y, class_names })
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn d(&self) -> usize {
        self.x.ncols()
    }

    pub fn c(&self) -> usize {
        self.y.ncols()
    }

    pub fn labels(&self) -> Vec<usize> {
        labels_of(&self.y)
    }

    pub fn select_rows(&self, rows: &[usize]) -> NoisyDataset {
        NoisyDataset {
            x: self.x.select_rows(rows.iter()),
            y: self.y.select_rows(rows.iter()),
            class_names: self.class_names.clone(),
        }
    }

    fn class_name(&self, k: usize) -> String {
        match &self.class_names {
            Some(names) => names[k].clone(),
            None => k.to_string(),
        }
    }
}

/// Every row must contain a single 1 and zeros elsewhere.
pub fn ensure_one_hot(y: &Mat) -> Result<()> {
    if y.nrows() == 0 || y.ncols() == 0 {
        return invalid("label matrix is empty");
    }
    for (i, row) in y.row_iter().enumerate() {
        let ones = row.iter().filter(|&&v| v == 1.0).count();
        let zeros = row.iter().filter(|&&v| v == 0.0).count();
        if ones != 1 || zeros != y.ncols() - 1 {
            return invalid(format!("label row {i} is not one-hot"));
        }
    }
    Ok(())
}

pub fn one_hot(labels: &[usize], c: usize) -> Result<Mat> {
    if labels.is_empty() || c == 0 {
        return invalid("one-hot encoding needs at least one label and one class");
    }
    let mut y = Mat::zeros(labels.len(), c);
    for (i, &l) in labels.iter().enumerate() {
        if l >= c {
            return invalid(format!("label {l} out of range for {c} classes"));
        }
        y[(i, l)] = 1.0;
    }
    Ok(y)
}

/// Column index of the 1 in row `i` of a one-hot matrix.
pub fn class_of_row(y: &Mat, i: usize) -> usize {
    y.row(i).iter().position(|&v| v == 1.0).unwrap_or(0)
}

pub fn labels_of(y: &Mat) -> Vec<usize> {
    (0..y.nrows()).map(|i| class_of_row(y, i)).collect()
}

/// Reads `d` numeric feature columns followed by one label column. Labels are
/// arbitrary strings, numbered in order of first appearance.
pub fn load_csv(path: &Path, has_header: bool) -> Result<NoisyDataset> {
    let rows = read_records(path, has_header)?;
    let parse_err = |row: usize, message: String| FlrError::Parse {
        path: path.to_path_buf(),
        row,
        message,
    };
    let width = rows[0].1.len();
    if width < 2 {
        return Err(parse_err(
            rows[0].0,
            "need at least one feature and a label".into(),
        ));
    }
    let d = width - 1;
    let mut features = Vec::with_capacity(rows.len() * d);
    let mut labels = Vec::with_capacity(rows.len());
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut names = Vec::new();
    for (line, record) in &rows {
        if record.len() != width {
            return Err(parse_err(
                *line,
                format!("expected {width} fields, found {}", record.len()),
            ));
        }
        for field in &record[..d] {
            features.push(parse_number(field).map_err(|m| parse_err(*line, m))?);
        }
        let label = record[d].trim().to_string();
        let next = index.len();
        let k = *index.entry(label.clone()).or_insert_with(|| {
            names.push(label);
            next
        });
        labels.push(k);
    }
    let x = Mat::from_row_slice(rows.len(), d, &features);
    let y = one_hot(&labels, names.len())?;
    NoisyDataset::new(x, y, Some(names))
}

/// Reads a purely numeric matrix (no label column).
pub fn load_matrix_csv(path: &Path, has_header: bool) -> Result<Mat> {
    let rows = read_records(path, has_header)?;
    let width = rows[0].1.len();
    let mut values = Vec::with_capacity(rows.len() * width);
    for (line, record) in &rows {
        if record.len() != width {
            return Err(FlrError::Parse {
                path: path.to_path_buf(),
                row: *line,
                message: format!("expected {width} fields, found {}", record.len()),
            });
        }
        for field in record {
            values.push(parse_number(field).map_err(|message| FlrError::Parse {
                path: path.to_path_buf(),
                row: *line,
                message,
            })?);
        }
    }
    Ok(Mat::from_row_slice(rows.len(), width, &values))
}

fn parse_number(field: &str) -> std::result::Result<f64, String> {
    match field.trim().parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        Ok(v) => Err(format!("non-finite value {v}")),
        Err(_) => Err(format!("'{field}' is not a number")),
    }
}

/// Returns (1-based line number, fields) for every non-empty record.
fn read_records(path: &Path, has_header: bool) -> Result<Vec<(usize, Vec<String>)>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(has_header)
        .flexible(true)
        .from_path(path)?;
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record?;
        let line = record.position().map(|p| p.line() as usize).unwrap_or(0);
        if record.iter().all(|f| f.trim().is_empty()) {
            continue;
        }
        rows.push((line, record.iter().map(str::to_string).collect()));
    }
    if rows.is_empty() {
        return Err(FlrError::Parse {
            path: path.to_path_buf(),
            row: 0,
            message: "file contains no data rows".into(),
        });
    }
    Ok(rows)
}

/// Writes features followed by the class name (or index) of every row.
pub fn write_csv(ds: &NoisyDataset, path: &Path, header: bool) -> Result<()> {
    let mut out = String::new();
    if header {
        let cols: Vec<String> = (0..ds.d()).map(|j| format!("f{j}")).collect();
        out.push_str(&cols.join(","));
        out.push_str(",label\n");
    }
    let labels = ds.labels();
    for (i, &label) in labels.iter().enumerate() {
        for j in 0..ds.d() {
            out.push_str(&format!("{},", ds.x[(i, j)]));
        }
        out.push_str(&ds.class_name(label));
        out.push('\n');
    }
    fs::write(path, out)?;
    Ok(())
}

pub fn write_matrix_csv(m: &Mat, path: &Path) -> Result<()> {
    let mut file = std::io::BufWriter::new(fs::File::create(path)?);
    for row in m.row_iter() {
        let fields: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        writeln!(file, "{}", fields.join(","))?;
    }
    file.flush()?;
    Ok(())
}

/// Seeded uniform shuffle of `0..n`; the first `⌊fraction·n⌋` indices are the
/// training rows.
pub fn split_indices(n: usize, train_fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return invalid(format!(
            "train_fraction must lie in (0, 1), got {train_fraction}"
        ));
    }
    let n_train = (train_fraction * n as f64).floor() as usize;
    if n_train == 0 || n_train == n {
        return invalid(format!(
            "split of {n} rows at fraction {train_fraction} leaves one side empty"
        ));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let test = order.split_off(n_train);
    Ok((order, test))
}

pub fn split(
    ds: &NoisyDataset,
    train_fraction: f64,
    seed: u64,
) -> Result<(NoisyDataset, NoisyDataset)> {
    let (train, test) = split_indices(ds.n(), train_fraction, seed)?;
    Ok((ds.select_rows(&train), ds.select_rows(&test)))
}

/// Parameters of a synthetic low-rank instance with known corruption.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlantedSpec {
    pub n: usize,
    pub d: usize,
    pub c: usize,
    pub rank: usize,
    /// Fraction of feature entries hit by sparse corruption.
    pub sparsity: f64,
    pub eta_l: f64,
    pub seed: u64,
    /// Shift applied to each latent row along its class anchor.
    pub margin: f64,
    /// Sparse corruption magnitudes are uniform on `[0.5, 1.5]·scale` with a
    /// random sign.
    pub corruption_scale: f64,
}

impl Default for PlantedSpec {
    fn default() -> Self {
        PlantedSpec {
            n: 200,
            d: 20,
            c: 4,
            rank: 4,
            sparsity: 0.05,
            eta_l: 0.3,
            seed: 0,
            margin: 3.0,
            corruption_scale: 5.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlantedInstance {
    pub clean: NoisyDataset,
    pub noisy: NoisyDataset,
    /// Exactly `noisy.x − clean.x`.
    pub ef: Mat,
    pub flipped: Vec<bool>,
}

/// Builds `X = A·Wᵀ` from standard normal factors, labels each latent row by
/// its best-aligned class anchor (pushed out by `margin` so classes are
/// linearly separable), then adds sparse feature corruption and symmetric
/// label flips.
pub fn make_planted(spec: &PlantedSpec) -> Result<PlantedInstance> {
    let PlantedSpec { n, d, c, rank, .. } = *spec;
    if n == 0 || d == 0 || c == 0 || rank == 0 {
        return invalid("planted instance needs n, d, c, rank >= 1");
    }
    if rank > n.min(d) {
        return invalid(format!("rank {rank} exceeds min(n, d) = {}", n.min(d)));
    }
    if !(0.0..1.0).contains(&spec.sparsity) {
        return invalid(format!(
            "sparsity must lie in [0, 1), got {}",
            spec.sparsity
        ));
    }
    if !(0.0..=1.0).contains(&spec.eta_l) || (spec.eta_l > 0.0 && c < 2) {
        return invalid("eta_l must lie in [0, 1] and label noise needs c >= 2");
    }
    if !(spec.margin.is_finite() && spec.corruption_scale.is_finite()) {
        return invalid("margin and corruption_scale must be finite");
    }

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut normal = |rows: usize, cols: usize| -> Mat {
        let mut m = Mat::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = rng.sample(StandardNormal);
            }
        }
        m
    };
    let mut a = normal(n, rank);
    let w = normal(d, rank);
    let anchors = if rank >= c {
        Mat::identity(rank, c)
    } else {
        let mut g = normal(rank, c);
        for mut col in g.column_iter_mut() {
            let norm = col.norm();
            col /= norm;
        }
        g
    };

    let scores = &a * &anchors;
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let row = scores.row(i);
        let mut best = 0;
        for k in 1..c {
            if row[k] > row[best] {
                best = k;
            }
        }
        labels.push(best);
        let shift = anchors.column(best).transpose() * spec.margin;
        let mut latent = a.row_mut(i);
        latent += shift;
    }
    let clean_x = &a * w.transpose();
    let clean_y = one_hot(&labels, c)?;

    let mut ef = Mat::zeros(n, d);
    let corrupted = (spec.sparsity * (n * d) as f64).floor() as usize;
    for flat in sample(&mut rng, n * d, corrupted).into_vec() {
        let magnitude = spec.corruption_scale * rng.random_range(0.5..1.5);
        let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        ef[(flat / d, flat % d)] = sign * magnitude;
    }

    let label_spec = NoiseSpec {
        eta_l: spec.eta_l,
        seed: spec.seed,
        ..NoiseSpec::default()
    };
    let (noisy_y, flipped_rows) = inject_label_noise(&clean_y, &label_spec)?;
    let mut flipped = vec![false; n];
    for i in flipped_rows {
        flipped[i] = true;
    }

    let clean = NoisyDataset::new(clean_x.clone(), clean_y, None)?;
    let noisy = NoisyDataset::new(&clean_x + &ef, noisy_y, None)?;
    Ok(PlantedInstance {
        clean,
        noisy,
        ef,
        flipped,
    })
}

impl PlantedInstance {
    /// Writes `features.csv`, `labels.csv`, `ef.csv`, `flips.csv` and
    /// `clean_labels.csv` into `dir`.
    pub fn save(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        write_matrix_csv(&self.noisy.x, &dir.join("features.csv"))?;
        write_matrix_csv(&self.ef, &dir.join("ef.csv"))?;
        let lines = |v: Vec<String>| v.join("\n") + "\n";
        fs::write(
            dir.join("labels.csv"),
            lines(self.noisy.labels().iter().map(usize::to_string).collect()),
        )?;
        fs::write(
            dir.join("clean_labels.csv"),
            lines(self.clean.labels().iter().map(usize::to_string).collect()),
        )?;
        fs::write(
            dir.join("flips.csv"),
            lines(
                self.flipped
                    .iter()
                    .map(|&f| u8::from(f).to_string())
                    .collect(),
            ),
        )?;
        Ok(())
    }
}
