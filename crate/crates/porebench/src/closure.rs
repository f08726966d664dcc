//! Closure-model calibration: fit parametric predictors of averaged
//! quantities against sample tables with a derivative-free simplex
//! search.

use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum ClosureError {
    #[error("sample set is empty")]
    EmptySamples,
    #[error("sample row {row} has {got} features, expected {expected}")]
    RaggedFeatures {
        row: usize,
        got: usize,
        expected: usize,
    },
    #[error("{targets} targets for {rows} feature rows")]
    TargetCountMismatch { targets: usize, rows: usize },
    #[error("relative error is undefined: target {index} is zero")]
    MapeZeroTarget { index: usize },
    #[error("prediction length {got} does not match {expected} targets")]
    PredictionCountMismatch { got: usize, expected: usize },
    #[error("loss is not finite anywhere the search looked")]
    NonFiniteLoss,
    #[error("row {row}, column {column}: {value:?} is not a number")]
    MalformedValue {
        row: usize,
        column: usize,
        value: String,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// A parametric predictor of one averaged quantity from a feature vector.
pub trait ClosureModel {
    /// Parameter count for feature vectors of the given width.
    fn n_params(&self, n_features: usize) -> usize;
    fn predict(&self, alpha: &[f64], features: &[f64]) -> f64;
}

/// `alpha[0] + alpha[1] * x[0] + ...`
pub struct LinearModel;

impl ClosureModel for LinearModel {
    fn n_params(&self, n_features: usize) -> usize {
        n_features + 1
    }

    fn predict(&self, alpha: &[f64], features: &[f64]) -> f64 {
        alpha[0]
            + alpha[1..]
                .iter()
                .zip(features)
                .map(|(a, x)| a * x)
                .sum::<f64>()
    }
}

/// `alpha[0]`, ignoring the features.
pub struct ConstantModel;

impl ClosureModel for ConstantModel {
    fn n_params(&self, _n_features: usize) -> usize {
        1
    }

    fn predict(&self, alpha: &[f64], _features: &[f64]) -> f64 {
        alpha[0]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossKind {
    /// Mean squared residual.
    Mse,
    /// Mean absolute relative residual, in percent.
    Mape,
}

/// Loss of a prediction vector against the targets.
pub fn loss_of(kind: LossKind, predictions: &[f64], targets: &[f64]) -> Result<f64, ClosureError> {
    if predictions.len() != targets.len() {
        return Err(ClosureError::PredictionCountMismatch {
            got: predictions.len(),
            expected: targets.len(),
        });
    }
    if targets.is_empty() {
        return Err(ClosureError::EmptySamples);
    }
    let n = targets.len() as f64;
    match kind {
        LossKind::Mse => Ok(predictions
            .iter()
            .zip(targets)
            .map(|(p, t)| (p - t) * (p - t))
            .sum::<f64>()
            / n),
        LossKind::Mape => {
            if let Some(index) = targets.iter().position(|&t| t == 0.0) {
                return Err(ClosureError::MapeZeroTarget { index });
            }
            Ok(predictions
                .iter()
                .zip(targets)
                .map(|(p, t)| ((p - t) / t).abs())
                .sum::<f64>()
                / n
                * 100.0)
        }
    }
}

/// Feature rows with one target value each. Rows share a width; the set
/// is never empty.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleSet {
    features: Vec<Vec<f64>>,
    targets: Vec<f64>,
}

#[derive(Deserialize)]
struct RawSampleSet {
    features: Vec<Vec<f64>>,
    targets: Vec<f64>,
}

impl SampleSet {
    pub fn new(features: Vec<Vec<f64>>, targets: Vec<f64>) -> Result<Self, ClosureError> {
        if features.is_empty() {
            return Err(ClosureError::EmptySamples);
        }
        if targets.len() != features.len() {
            return Err(ClosureError::TargetCountMismatch {
                targets: targets.len(),
                rows: features.len(),
            });
        }
        let expected = features[0].len();
        for (row, f) in features.iter().enumerate() {
            if f.len() != expected {
                return Err(ClosureError::RaggedFeatures {
                    row,
                    got: f.len(),
                    expected,
                });
            }
        }
        Ok(Self { features, targets })
    }

    pub fn n_samples(&self) -> usize {
        self.targets.len()
    }

    pub fn n_features(&self) -> usize {
        self.features[0].len()
    }

    pub fn features(&self) -> &[Vec<f64>] {
        &self.features
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    /// Reads a CSV table whose last column is the target; the header row
    /// is required but its names are free-form.
    pub fn read_csv<P: AsRef<Path>>(path: P) -> Result<Self, ClosureError> {
        Self::parse_csv(&fs::read(path)?)
    }

    pub fn parse_csv(bytes: &[u8]) -> Result<Self, ClosureError> {
        let mut reader = csv::Reader::from_reader(bytes);
        let mut features = Vec::new();
        let mut targets = Vec::new();
        for (row, record) in reader.records().enumerate() {
            let record = record?;
            let mut values = Vec::with_capacity(record.len());
            for (column, raw) in record.iter().enumerate() {
                let v: f64 = raw.trim().parse().map_err(|_| ClosureError::MalformedValue {
                    row,
                    column,
                    value: raw.to_owned(),
                })?;
                values.push(v);
            }
            let target = values.pop().ok_or(ClosureError::EmptySamples)?;
            features.push(values);
            targets.push(target);
        }
        Self::new(features, targets)
    }

    /// Writes the table with header `f0,...,f{k-1},target`.
    pub fn write_csv<P: AsRef<Path>>(&self, path: P) -> Result<(), ClosureError> {
        let mut writer = csv::Writer::from_path(path)?;
        let mut header: Vec<String> = (0..self.n_features()).map(|i| format!("f{i}")).collect();
        header.push("target".into());
        writer.write_record(&header)?;
        for (f, t) in self.features.iter().zip(&self.targets) {
            let mut record: Vec<String> = f.iter().map(|v| v.to_string()).collect();
            record.push(t.to_string());
            writer.write_record(&record)?;
        }
        writer.flush()?;
        Ok(())
    }

    pub fn read_json<P: AsRef<Path>>(path: P) -> Result<Self, ClosureError> {
        Self::parse_json(&fs::read(path)?)
    }

    pub fn parse_json(bytes: &[u8]) -> Result<Self, ClosureError> {
        let raw: RawSampleSet = serde_json::from_slice(bytes)?;
        Self::new(raw.features, raw.targets)
    }

    pub fn write_json<P: AsRef<Path>>(&self, path: P) -> Result<(), ClosureError> {
        fs::write(path, serde_json::to_vec_pretty(self)?)?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    /// Independent simplex starts; the best final point wins.
    pub n_starts: usize,
    /// Iteration budget per start. Zero evaluates the initial simplexes
    /// and reports the best vertex unconverged.
    pub max_iter: usize,
    /// Convergence width of the simplex in parameter space.
    pub xtol: f64,
    /// Convergence spread of the loss across the simplex.
    pub ftol: f64,
    /// Seed for the start-point draws.
    pub seed: u64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            n_starts: 8,
            max_iter: 10_000,
            xtol: 1e-8,
            ftol: 1e-10,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClosureFit {
    pub alpha: Vec<f64>,
    pub loss_value: f64,
    pub loss_kind: LossKind,
    /// Simplex iterations spent by the winning start.
    pub n_iterations: usize,
    pub converged: bool,
    /// `prediction - target` per sample at the fitted parameters.
    pub per_sample_residuals: Vec<f64>,
    /// Fewer samples than parameters: the optimum is not unique.
    pub underdetermined: bool,
}

/// Calibrates `model` against `samples` by multi-start Nelder-Mead.
pub fn fit<M: ClosureModel + ?Sized>(
    model: &M,
    samples: &SampleSet,
    loss: LossKind,
    options: &FitOptions,
) -> Result<ClosureFit, ClosureError> {
    if loss == LossKind::Mape {
        if let Some(index) = samples.targets.iter().position(|&t| t == 0.0) {
            return Err(ClosureError::MapeZeroTarget { index });
        }
    }
    let n = model.n_params(samples.n_features());
    let mut predictions = vec![0.0; samples.n_samples()];
    let mut objective = |alpha: &[f64]| -> f64 {
        for (p, f) in predictions.iter_mut().zip(&samples.features) {
            *p = model.predict(alpha, f);
        }
        match loss_of(loss, &predictions, &samples.targets) {
            Ok(v) if v.is_finite() => v,
            _ => f64::INFINITY,
        }
    };

    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let mut best: Option<(Vec<f64>, f64, usize, bool)> = None;
    for start in 0..options.n_starts.max(1) {
        let base: Vec<f64> = if start == 0 {
            vec![0.0; n]
        } else {
            (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect()
        };
        let (alpha, value, iterations, converged) =
            nelder_mead(&mut objective, &base, options);
        if !value.is_finite() {
            continue;
        }
        if best.as_ref().is_none_or(|(_, b, _, _)| value < *b) {
            best = Some((alpha, value, iterations, converged));
        }
    }
    let (alpha, loss_value, n_iterations, converged) = best.ok_or(ClosureError::NonFiniteLoss)?;

    let per_sample_residuals = samples
        .features
        .iter()
        .zip(&samples.targets)
        .map(|(f, t)| model.predict(&alpha, f) - t)
        .collect();

    Ok(ClosureFit {
        underdetermined: samples.n_samples() < n,
        alpha,
        loss_value,
        loss_kind: loss,
        n_iterations,
        converged,
        per_sample_residuals,
    })
}

/// Initial edge length of each simplex.
const SIMPLEX_STEP: f64 = 0.5;
const REFLECTION: f64 = 1.0;
const EXPANSION: f64 = 2.0;
const CONTRACTION: f64 = 0.5;
const SHRINK: f64 = 0.5;

/// Downhill simplex from one base point. Returns the best vertex, its
/// value, iterations spent, and whether both tolerance tests passed.
fn nelder_mead(
    f: &mut impl FnMut(&[f64]) -> f64,
    base: &[f64],
    options: &FitOptions,
) -> (Vec<f64>, f64, usize, bool) {
    let n = base.len();
    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    simplex.push(base.to_vec());
    for d in 0..n {
        let mut v = base.to_vec();
        v[d] += SIMPLEX_STEP;
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(|v| f(v)).collect();

    let mut iterations = 0;
    let mut converged = false;
    while iterations < options.max_iter {
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        let (lo, hi, second_hi) = (order[0], order[n], order[n.saturating_sub(1)]);

        let x_spread = (0..n)
            .map(|d| {
                let lo = simplex.iter().map(|v| v[d]).fold(f64::INFINITY, f64::min);
                let hi = simplex
                    .iter()
                    .map(|v| v[d])
                    .fold(f64::NEG_INFINITY, f64::max);
                hi - lo
            })
            .fold(0.0f64, f64::max);
        let f_spread = values[hi] - values[lo];
        if x_spread <= options.xtol && f_spread <= options.ftol {
            converged = true;
            break;
        }
        iterations += 1;

        let centroid: Vec<f64> = (0..n)
            .map(|d| {
                order[..n].iter().map(|&i| simplex[i][d]).sum::<f64>() / n as f64
            })
            .collect();
        let towards = |coef: f64| -> Vec<f64> {
            (0..n)
                .map(|d| centroid[d] + coef * (centroid[d] - simplex[hi][d]))
                .collect()
        };

        let reflected = towards(REFLECTION);
        let f_reflected = f(&reflected);
        if f_reflected < values[lo] {
            let expanded = towards(EXPANSION);
            let f_expanded = f(&expanded);
            if f_expanded < f_reflected {
                simplex[hi] = expanded;
                values[hi] = f_expanded;
            } else {
                simplex[hi] = reflected;
                values[hi] = f_reflected;
            }
            continue;
        }
        if f_reflected < values[second_hi] {
            simplex[hi] = reflected;
            values[hi] = f_reflected;
            continue;
        }
        let contracted = if f_reflected < values[hi] {
            towards(CONTRACTION)
        } else {
            towards(-CONTRACTION)
        };
        let f_contracted = f(&contracted);
        if f_contracted < values[hi].min(f_reflected) {
            simplex[hi] = contracted;
            values[hi] = f_contracted;
            continue;
        }
        let anchor = simplex[lo].clone();
        for i in 0..=n {
            if i == lo {
                continue;
            }
            for (s, &a) in simplex[i].iter_mut().zip(&anchor) {
                *s = a + SHRINK * (*s - a);
            }
            values[i] = f(&simplex[i]);
        }
    }

    let best = (0..=n)
        .min_by(|&a, &b| values[a].total_cmp(&values[b]))
        .unwrap();
    (simplex[best].clone(), values[best], iterations, converged)
}
