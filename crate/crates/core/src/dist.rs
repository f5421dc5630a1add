//! Class-prior bookkeeping, long-tail count profiles, and synthetic Gaussian
//! data generation.
//!
//! Count profiles follow the Exp/Step conventions common in the class
//! imbalance literature: `Exp` decays counts geometrically from `max_count`
//! down to `max_count / rho`, `Step` gives the first half of the classes
//! `max_count` and the rest `max_count / rho`. Counts are clamped to at
//! least 1 so empirical priors stay strictly positive.

use std::io::{BufRead, BufReader, Read, Write};

use rand::Rng as _;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::rng::rng_from_seed;
use crate::{Error, Result};

/// Normalized label marginal over `L` classes; strictly positive entries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassPriors {
    probs: Vec<f64>,
}

impl ClassPriors {
    /// Validates that every entry is strictly positive and that the vector
    /// sums to 1 within 1e-12.
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidParameter("priors must be nonempty".into()));
        }
        if probs.iter().any(|&p| !p.is_finite() || p <= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "priors must be strictly positive and finite, got {probs:?}"
            )));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "priors must sum to 1 within 1e-12, got sum {sum}"
            )));
        }
        Ok(Self { probs })
    }

    /// Empirical class frequencies from per-class counts. Every count must
    /// be at least 1.
    pub fn from_counts(counts: &[u64]) -> Result<Self> {
        if counts.is_empty() {
            return Err(Error::InvalidParameter("counts must be nonempty".into()));
        }
        if counts.contains(&0) {
            return Err(Error::InvalidParameter(
                "every class count must be at least 1".into(),
            ));
        }
        let total: u64 = counts.iter().sum();
        let probs = counts.iter().map(|&c| c as f64 / total as f64).collect();
        Self::new(probs)
    }

    /// Binary priors `[pi_plus, 1 - pi_plus]` (class 0 is the `+1` class).
    pub fn binary(pi_plus: f64) -> Result<Self> {
        Self::new(vec![pi_plus, 1.0 - pi_plus])
    }

    pub fn num_classes(&self) -> usize {
        self.probs.len()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob(&self, y: usize) -> f64 {
        self.probs[y]
    }
}

/// Long-tail count profile shape.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProfileKind {
    /// Geometric decay: `count[y] = round(max_count * rho^(-y/(L-1)))`.
    Exp,
    /// First `ceil(L/2)` classes at `max_count`, the rest at `round(max_count/rho)`.
    Step,
}

/// A long-tail profile generating per-class training counts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LongTailProfile {
    pub kind: ProfileKind,
    pub num_classes: usize,
    pub max_count: u64,
    /// Imbalance ratio `rho = max count / min count`, at least 1.
    pub imbalance_ratio: f64,
}

impl LongTailProfile {
    pub fn new(kind: ProfileKind, num_classes: usize, max_count: u64, imbalance_ratio: f64) -> Result<Self> {
        if num_classes < 2 {
            return Err(Error::InvalidParameter(format!(
                "profile needs at least 2 classes, got {num_classes}"
            )));
        }
        if max_count < 1 {
            return Err(Error::InvalidParameter("max_count must be at least 1".into()));
        }
        if !imbalance_ratio.is_finite() || imbalance_ratio < 1.0 {
            return Err(Error::InvalidParameter(format!(
                "imbalance ratio must be finite and >= 1, got {imbalance_ratio}"
            )));
        }
        Ok(Self { kind, num_classes, max_count, imbalance_ratio })
    }

    /// Per-class counts, non-increasing in class index, clamped to >= 1.
    pub fn counts(&self) -> Vec<u64> {
        let l = self.num_classes;
        let max = self.max_count as f64;
        let rho = self.imbalance_ratio;
        let tail = ((max / rho).round() as u64).max(1);
        match self.kind {
            ProfileKind::Exp => (0..l)
                .map(|y| {
                    let frac = y as f64 / (l - 1) as f64;
                    ((max * rho.powf(-frac)).round() as u64).max(1)
                })
                .collect(),
            ProfileKind::Step => {
                let head = l.div_ceil(2);
                (0..l).map(|y| if y < head { self.max_count } else { tail }).collect()
            }
        }
    }
}

/// Binary 2D Gaussian task: class `+1` (index 0) at `mean_plus`, class `-1`
/// (index 1) at `mean_minus`, shared isotropic standard deviation `sigma`,
/// `Pr(+1) = prior_plus`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianTask {
    pub mean_plus: [f64; 2],
    pub mean_minus: [f64; 2],
    pub sigma: f64,
    pub prior_plus: f64,
}

impl GaussianTask {
    pub fn new(mean_plus: [f64; 2], mean_minus: [f64; 2], sigma: f64, prior_plus: f64) -> Result<Self> {
        if !sigma.is_finite() || sigma <= 0.0 {
            return Err(Error::InvalidParameter(format!("sigma must be positive, got {sigma}")));
        }
        if prior_plus.is_nan() || prior_plus <= 0.0 || prior_plus >= 1.0 {
            return Err(Error::InvalidParameter(format!(
                "prior_plus must lie in (0,1), got {prior_plus}"
            )));
        }
        Ok(Self { mean_plus, mean_minus, sigma, prior_plus })
    }

    /// The symmetric task with means `±(1,1)` used by the synthetic study.
    pub fn symmetric(sigma: f64, prior_plus: f64) -> Result<Self> {
        Self::new([1.0, 1.0], [-1.0, -1.0], sigma, prior_plus)
    }

    pub fn priors(&self) -> ClassPriors {
        ClassPriors::binary(self.prior_plus).expect("validated at construction")
    }
}

/// A labeled sample with row-major `N x dim` features.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    features: Vec<f64>,
    dim: usize,
    labels: Vec<usize>,
    class_counts: Vec<u64>,
}

impl LabeledDataset {
    /// `features` is row-major with `labels.len() * dim` entries; the label
    /// histogram over `num_classes` classes becomes `class_counts`.
    pub fn new(features: Vec<f64>, dim: usize, labels: Vec<usize>, num_classes: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("feature dimension must be positive".into()));
        }
        if features.len() != labels.len() * dim {
            return Err(Error::LengthMismatch { expected: labels.len() * dim, got: features.len() });
        }
        let mut class_counts = vec![0u64; num_classes];
        for &y in &labels {
            if y >= num_classes {
                return Err(Error::LabelOutOfRange { label: y, num_classes });
            }
            class_counts[y] += 1;
        }
        Ok(Self { features, dim, labels, class_counts })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_classes(&self) -> usize {
        self.class_counts.len()
    }

    pub fn feature(&self, n: usize) -> &[f64] {
        &self.features[n * self.dim..(n + 1) * self.dim]
    }

    pub fn label(&self, n: usize) -> usize {
        self.labels[n]
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn class_counts(&self) -> &[u64] {
        &self.class_counts
    }

    /// Empirical priors from the label histogram; fails if any class is absent.
    pub fn empirical_priors(&self) -> Result<ClassPriors> {
        ClassPriors::from_counts(&self.class_counts)
    }

    /// Writes the dataset as CSV with header `x0,...,x{D-1},label`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let header: Vec<String> = (0..self.dim).map(|d| format!("x{d}")).collect();
        writeln!(w, "{},label", header.join(","))?;
        for n in 0..self.len() {
            let row: Vec<String> = self.feature(n).iter().map(|v| v.to_string()).collect();
            writeln!(w, "{},{}", row.join(","), self.label(n))?;
        }
        Ok(())
    }

    /// Reads a dataset written by [`LabeledDataset::write_csv`].
    pub fn read_csv<R: Read>(r: R, num_classes: usize) -> Result<Self> {
        let mut lines = BufReader::new(r).lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty dataset file".into()))??;
        let cols: Vec<&str> = header.trim().split(',').collect();
        if cols.len() < 2 || cols[cols.len() - 1] != "label" {
            return Err(Error::Parse(format!("expected header `x0,...,label`, got `{header}`")));
        }
        let dim = cols.len() - 1;
        let mut features = Vec::new();
        let mut labels = Vec::new();
        for line in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.trim().split(',').collect();
            if fields.len() != dim + 1 {
                return Err(Error::Parse(format!("expected {} fields, got `{line}`", dim + 1)));
            }
            for f in &fields[..dim] {
                features.push(
                    f.parse::<f64>()
                        .map_err(|e| Error::Parse(format!("bad feature `{f}`: {e}")))?,
                );
            }
            labels.push(
                fields[dim]
                    .parse::<usize>()
                    .map_err(|e| Error::Parse(format!("bad label `{}`: {e}", fields[dim])))?,
            );
        }
        Self::new(features, dim, labels, num_classes)
    }
}

/// Writes per-class counts, one integer per line.
pub fn write_counts<W: Write>(mut w: W, counts: &[u64]) -> Result<()> {
    for c in counts {
        writeln!(w, "{c}")?;
    }
    Ok(())
}

/// Reads a counts file written by [`write_counts`].
pub fn read_counts<R: Read>(r: R) -> Result<Vec<u64>> {
    let mut counts = Vec::new();
    for line in BufReader::new(r).lines() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() {
            continue;
        }
        counts.push(t.parse::<u64>().map_err(|e| Error::Parse(format!("bad count `{t}`: {e}")))?);
    }
    if counts.is_empty() {
        return Err(Error::Parse("counts file has no entries".into()));
    }
    Ok(counts)
}

/// Draws `n` labeled points from the binary Gaussian task. Labels are i.i.d.
/// with `Pr(class 0) = prior_plus`; features are isotropic Gaussians around
/// the class mean. Deterministic for a fixed seed.
pub fn sample_gaussian(task: &GaussianTask, n: usize, seed: u64) -> Result<LabeledDataset> {
    if n == 0 {
        return Err(Error::InvalidParameter("sample size must be at least 1".into()));
    }
    let mut rng = rng_from_seed(seed);
    let mut features = Vec::with_capacity(n * 2);
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        let y = if rng.gen_bool(task.prior_plus) { 0 } else { 1 };
        let mean = if y == 0 { task.mean_plus } else { task.mean_minus };
        for d in 0..2 {
            let z: f64 = rng.sample(StandardNormal);
            features.push(mean[d] + task.sigma * z);
        }
        labels.push(y);
    }
    LabeledDataset::new(features, 2, labels, 2)
}

/// Class-conditional Gaussian mixture over `L` classes at explicit means,
/// used by the multiclass long-tail studies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianMixture {
    pub means: Vec<Vec<f64>>,
    pub sigma: f64,
}

impl GaussianMixture {
    pub fn new(means: Vec<Vec<f64>>, sigma: f64) -> Result<Self> {
        if means.len() < 2 {
            return Err(Error::InvalidParameter("mixture needs at least 2 classes".into()));
        }
        let dim = means[0].len();
        if dim == 0 || means.iter().any(|m| m.len() != dim) {
            return Err(Error::InvalidParameter("mixture means must share a positive dimension".into()));
        }
        if !sigma.is_finite() || sigma <= 0.0 {
            return Err(Error::InvalidParameter(format!("sigma must be positive, got {sigma}")));
        }
        Ok(Self { means, sigma })
    }

    /// `L` means equally spaced on a radius-`radius` circle in 2D.
    pub fn on_circle(num_classes: usize, radius: f64, sigma: f64) -> Result<Self> {
        let means = (0..num_classes)
            .map(|y| {
                let angle = 2.0 * std::f64::consts::PI * y as f64 / num_classes as f64;
                vec![radius * angle.cos(), radius * angle.sin()]
            })
            .collect();
        Self::new(means, sigma)
    }

    pub fn dim(&self) -> usize {
        self.means[0].len()
    }

    /// Draws exactly `counts[y]` points for each class `y`, in class order.
    /// Deterministic for a fixed seed.
    pub fn sample_counts(&self, counts: &[u64], seed: u64) -> Result<LabeledDataset> {
        if counts.len() != self.means.len() {
            return Err(Error::LengthMismatch { expected: self.means.len(), got: counts.len() });
        }
        let dim = self.dim();
        let total: u64 = counts.iter().sum();
        let mut rng = rng_from_seed(seed);
        let mut features = Vec::with_capacity(total as usize * dim);
        let mut labels = Vec::with_capacity(total as usize);
        for (y, &c) in counts.iter().enumerate() {
            for _ in 0..c {
                for d in 0..dim {
                    let z: f64 = rng.sample(StandardNormal);
                    features.push(self.means[y][d] + self.sigma * z);
                }
                labels.push(y);
            }
        }
        LabeledDataset::new(features, dim, labels, self.means.len())
    }
}
