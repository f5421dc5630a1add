//! Closed-form Bayes-optimal machinery for the Gaussian task and a
//! brute-force population-risk minimizer over discrete distributions.
//!
//! The minimizer solves, independently for every instance `x`, the convex
//! problem `min_f sum_y eta_y(x) * loss(y, f)` by gradient descent with
//! backtracking line search, then centers the scores to remove the shift
//! degeneracy. Comparing its per-instance argmax against the balanced
//! Bayes rule `argmax_y eta_y(x) / pi_y` gives a numerical consistency
//! check valid for any member of the pairwise-margin loss family.

use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};

use rand::Rng as _;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::dist::{ClassPriors, GaussianTask};
use crate::loss::MarginSpec;
use crate::rng::rng_from_seed;
use crate::{Error, Result};

/// Standard normal CDF.
pub fn normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / std::f64::consts::SQRT_2)
}

fn dot2(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

fn norm_sq2(a: [f64; 2]) -> f64 {
    dot2(a, a)
}

/// Balanced-error Bayes prediction for the Gaussian task: class `+1`
/// (index 0) iff `(mu_plus - mu_minus) . x > (||mu_plus||^2 - ||mu_minus||^2)/2`,
/// with the boundary tie going to class 0.
pub fn bayes_balanced_predict_gaussian(task: &GaussianTask, x: [f64; 2]) -> usize {
    let w = [task.mean_plus[0] - task.mean_minus[0], task.mean_plus[1] - task.mean_minus[1]];
    let threshold = 0.5 * (norm_sq2(task.mean_plus) - norm_sq2(task.mean_minus));
    if dot2(w, x) >= threshold {
        0
    } else {
        1
    }
}

/// Population balanced error of the Bayes-balanced rule:
/// `Phi(-||mu_plus - mu_minus|| / (2 sigma))`. Each class errs symmetrically
/// about the midpoint hyperplane, so the priors do not enter.
pub fn bayes_balanced_error_gaussian(task: &GaussianTask) -> f64 {
    let d = [task.mean_plus[0] - task.mean_minus[0], task.mean_plus[1] - task.mean_minus[1]];
    normal_cdf(-norm_sq2(d).sqrt() / (2.0 * task.sigma))
}

/// Monte Carlo estimate of the Bayes-balanced error: `n_per_class` draws
/// from each class, classified by [`bayes_balanced_predict_gaussian`].
/// The independent check for [`bayes_balanced_error_gaussian`].
pub fn monte_carlo_balanced_error(task: &GaussianTask, n_per_class: usize, seed: u64) -> f64 {
    let mut rng = rng_from_seed(seed);
    let mut per_class_err = [0.0f64; 2];
    for (cls, mean) in [(0usize, task.mean_plus), (1usize, task.mean_minus)] {
        let mut wrong = 0usize;
        for _ in 0..n_per_class {
            let z0: f64 = rng.sample(StandardNormal);
            let z1: f64 = rng.sample(StandardNormal);
            let x = [mean[0] + task.sigma * z0, mean[1] + task.sigma * z1];
            if bayes_balanced_predict_gaussian(task, x) != cls {
                wrong += 1;
            }
        }
        per_class_err[cls] = wrong as f64 / n_per_class as f64;
    }
    0.5 * (per_class_err[0] + per_class_err[1])
}

/// True class-probability `Pr(y = +1 | x)` for the Gaussian task:
/// a sigmoid in `w* . x` with `w* = (mu_plus - mu_minus)/sigma^2` and offset
/// `b* = log(Pr(-1)/Pr(+1)) + (||mu_plus||^2 - ||mu_minus||^2)/(2 sigma^2)`.
pub fn true_eta_gaussian(task: &GaussianTask, x: [f64; 2]) -> f64 {
    let s2 = task.sigma * task.sigma;
    let w = [
        (task.mean_plus[0] - task.mean_minus[0]) / s2,
        (task.mean_plus[1] - task.mean_minus[1]) / s2,
    ];
    let b = ((1.0 - task.prior_plus) / task.prior_plus).ln()
        + (norm_sq2(task.mean_plus) - norm_sq2(task.mean_minus)) / (2.0 * s2);
    1.0 / (1.0 + (-dot2(w, x) + b).exp())
}

/// A finite distribution over `m` instances with conditional class
/// probabilities `eta[x][y] = Pr(y | x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteDistribution {
    instance_probs: Vec<f64>,
    /// Row-major `m x L`.
    cond_probs: Vec<f64>,
    num_classes: usize,
}

impl DiscreteDistribution {
    pub fn new(instance_probs: Vec<f64>, cond_probs: Vec<Vec<f64>>) -> Result<Self> {
        let m = instance_probs.len();
        if m == 0 || cond_probs.len() != m {
            return Err(Error::LengthMismatch { expected: m.max(1), got: cond_probs.len() });
        }
        let l = cond_probs[0].len();
        if l < 2 {
            return Err(Error::InvalidParameter("need at least 2 classes".into()));
        }
        if instance_probs.iter().any(|&p| !p.is_finite() || p < 0.0) {
            return Err(Error::InvalidParameter("instance probabilities must be nonnegative".into()));
        }
        let sum: f64 = instance_probs.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "instance probabilities must sum to 1 within 1e-12, got {sum}"
            )));
        }
        let mut flat = Vec::with_capacity(m * l);
        for row in &cond_probs {
            if row.len() != l {
                return Err(Error::LengthMismatch { expected: l, got: row.len() });
            }
            if row.iter().any(|&p| !p.is_finite() || p < 0.0) {
                return Err(Error::InvalidParameter("conditional probabilities must be nonnegative".into()));
            }
            let rsum: f64 = row.iter().sum();
            if (rsum - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidParameter(format!(
                    "each conditional row must sum to 1 within 1e-12, got {rsum}"
                )));
            }
            flat.extend_from_slice(row);
        }
        let dist = Self { instance_probs, cond_probs: flat, num_classes: l };
        if dist.implied_prior_vec().iter().any(|&p| p <= 0.0) {
            return Err(Error::InvalidParameter("implied class priors must be strictly positive".into()));
        }
        Ok(dist)
    }

    pub fn num_instances(&self) -> usize {
        self.instance_probs.len()
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn instance_prob(&self, x: usize) -> f64 {
        self.instance_probs[x]
    }

    /// Conditional row `eta(x)`.
    pub fn eta(&self, x: usize) -> &[f64] {
        &self.cond_probs[x * self.num_classes..(x + 1) * self.num_classes]
    }

    fn implied_prior_vec(&self) -> Vec<f64> {
        let mut pi = vec![0.0; self.num_classes];
        for x in 0..self.num_instances() {
            let p = self.instance_probs[x];
            for (y, &e) in self.eta(x).iter().enumerate() {
                pi[y] += p * e;
            }
        }
        pi
    }

    /// Class priors implied by the joint distribution.
    pub fn implied_priors(&self) -> ClassPriors {
        let mut pi = self.implied_prior_vec();
        let sum: f64 = pi.iter().sum();
        pi.iter_mut().for_each(|p| *p /= sum);
        ClassPriors::new(pi).expect("validated at construction")
    }

    /// Stable hex digest of the numeric content, for report provenance.
    pub fn digest(&self) -> String {
        let mut hasher = DefaultHasher::new();
        self.num_classes.hash(&mut hasher);
        for p in &self.instance_probs {
            p.to_bits().hash(&mut hasher);
        }
        for p in &self.cond_probs {
            p.to_bits().hash(&mut hasher);
        }
        format!("{:016x}", hasher.finish())
    }
}

/// Settings for the per-instance convex minimization.
#[derive(Debug, Clone, Copy)]
pub struct MinimizerSettings {
    pub grad_tolerance: f64,
    pub max_iterations: usize,
}

impl Default for MinimizerSettings {
    fn default() -> Self {
        Self { grad_tolerance: 1e-8, max_iterations: 100_000 }
    }
}

fn conditional_risk(spec: &MarginSpec, eta: &[f64], f: &[f64]) -> f64 {
    eta.iter()
        .enumerate()
        .filter(|(_, &e)| e > 0.0)
        .map(|(y, &e)| e * spec.loss_value(y, f))
        .sum()
}

fn conditional_risk_grad(spec: &MarginSpec, eta: &[f64], f: &[f64], out: &mut [f64], scratch: &mut [f64]) {
    out.iter_mut().for_each(|g| *g = 0.0);
    for (y, &e) in eta.iter().enumerate() {
        if e > 0.0 {
            spec.loss_grad_into(y, f, scratch);
            for (o, &g) in out.iter_mut().zip(scratch.iter()) {
                *o += e * g;
            }
        }
    }
}

/// Hessian of the conditional risk: `sum_y eta_y alpha_y (diag(p) - p p^T)`
/// with `p` the softmax of the margin-shifted logits for row `y`.
fn conditional_risk_hessian(spec: &MarginSpec, eta: &[f64], f: &[f64], hess: &mut [f64]) {
    let l = f.len();
    hess.iter_mut().for_each(|h| *h = 0.0);
    let mut p = vec![0.0; l];
    for (y, &e) in eta.iter().enumerate() {
        if e <= 0.0 {
            continue;
        }
        let mut max_a = f64::NEG_INFINITY;
        for yp in 0..l {
            max_a = max_a.max(f[yp] + spec.margin(y, yp));
        }
        let mut sum = 0.0;
        for yp in 0..l {
            p[yp] = (f[yp] + spec.margin(y, yp) - max_a).exp();
            sum += p[yp];
        }
        p.iter_mut().for_each(|v| *v /= sum);
        let w = e * spec.alpha()[y];
        for i in 0..l {
            for j in 0..l {
                let d = if i == j { p[i] } else { 0.0 };
                hess[i * l + j] += w * (d - p[i] * p[j]);
            }
        }
    }
}

/// Solves `A d = g` by Gaussian elimination with partial pivoting.
/// Returns `None` when a pivot collapses.
fn solve_dense(a: &mut [f64], g: &mut [f64], l: usize) -> Option<Vec<f64>> {
    for col in 0..l {
        let pivot = (col..l).max_by(|&r1, &r2| {
            a[r1 * l + col].abs().partial_cmp(&a[r2 * l + col].abs()).unwrap()
        })?;
        if a[pivot * l + col].abs() < 1e-300 {
            return None;
        }
        if pivot != col {
            for k in 0..l {
                a.swap(col * l + k, pivot * l + k);
            }
            g.swap(col, pivot);
        }
        for row in col + 1..l {
            let factor = a[row * l + col] / a[col * l + col];
            for k in col..l {
                a[row * l + k] -= factor * a[col * l + k];
            }
            g[row] -= factor * g[col];
        }
    }
    let mut d = vec![0.0; l];
    for row in (0..l).rev() {
        let mut acc = g[row];
        for k in row + 1..l {
            acc -= a[row * l + k] * d[k];
        }
        d[row] = acc / a[row * l + row];
    }
    Some(d)
}

/// Damped Newton iteration. The Hessian is singular along the all-ones
/// shift direction, so it is deflated with a rank-one `1 1^T` term (the
/// gradient is orthogonal to `1`, so the solution is unchanged); if the
/// solve fails the step falls back to the raw gradient.
///
/// Far from the optimum, steps are safeguarded by Armijo backtracking on
/// the risk value. Once the Newton decrement is inside the quadratic
/// basin, value decreases can fall below one ulp of the risk, so the
/// iteration switches to full Newton steps guarded by gradient-norm
/// decrease instead; this reaches the floating-point floor of the
/// gradient evaluation regardless of the objective's scale.
fn minimize_conditional_risk(
    spec: &MarginSpec,
    eta: &[f64],
    settings: &MinimizerSettings,
) -> Result<Vec<f64>> {
    let l = spec.num_classes();
    let mut f = vec![0.0; l];
    let mut grad = vec![0.0; l];
    let mut scratch = vec![0.0; l];
    let mut trial = vec![0.0; l];
    let mut trial_grad = vec![0.0; l];
    let mut hess = vec![0.0; l * l];
    let mut value = conditional_risk(spec, eta, &f);

    let mut iterations = 0;
    while iterations < settings.max_iterations {
        iterations += 1;
        conditional_risk_grad(spec, eta, &f, &mut grad, &mut scratch);
        let grad_norm_sq: f64 = grad.iter().map(|g| g * g).sum();
        if grad_norm_sq.sqrt() <= settings.grad_tolerance {
            center(&mut f);
            return Ok(f);
        }

        conditional_risk_hessian(spec, eta, &f, &mut hess);
        let trace: f64 = (0..l).map(|i| hess[i * l + i]).sum();
        let deflate = trace / l as f64 + 1e-12;
        let ridge = 1e-12 * trace.max(1.0);
        for i in 0..l {
            for j in 0..l {
                hess[i * l + j] += deflate;
            }
            hess[i * l + i] += ridge;
        }
        let mut rhs = grad.clone();
        let direction = match solve_dense(&mut hess, &mut rhs, l) {
            Some(d) if d.iter().zip(&grad).map(|(di, gi)| di * gi).sum::<f64>() > 0.0 => d,
            _ => grad.clone(),
        };
        let decrement: f64 = direction.iter().zip(&grad).map(|(d, g)| d * g).sum();

        if decrement <= 1e-9 {
            // Quadratic basin: full step, accepted while the gradient keeps
            // shrinking; otherwise we are at the numerical optimum.
            for i in 0..l {
                trial[i] = f[i] - direction[i];
            }
            conditional_risk_grad(spec, eta, &trial, &mut grad, &mut scratch);
            let trial_norm_sq: f64 = grad.iter().map(|g| g * g).sum();
            if trial_norm_sq < grad_norm_sq {
                f.copy_from_slice(&trial);
                value = conditional_risk(spec, eta, &f);
                continue;
            }
            break;
        }

        let mut t = 1.0f64;
        let mut accepted = false;
        while t >= 1e-18 {
            for i in 0..l {
                trial[i] = f[i] - t * direction[i];
            }
            let trial_value = conditional_risk(spec, eta, &trial);
            if trial_value <= value - 1e-4 * t * decrement {
                f.copy_from_slice(&trial);
                value = trial_value;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            // Value resolution exhausted; try one full Newton step on the
            // gradient-decrease criterion before giving up.
            for i in 0..l {
                trial[i] = f[i] - direction[i];
            }
            conditional_risk_grad(spec, eta, &trial, &mut trial_grad, &mut scratch);
            let trial_norm_sq: f64 = trial_grad.iter().map(|g| g * g).sum();
            if trial_norm_sq < grad_norm_sq {
                f.copy_from_slice(&trial);
                value = conditional_risk(spec, eta, &f);
            } else {
                break;
            }
        }
    }

    conditional_risk_grad(spec, eta, &f, &mut grad, &mut scratch);
    let grad_norm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
    if grad_norm <= settings.grad_tolerance {
        center(&mut f);
        Ok(f)
    } else {
        Err(Error::NoConvergence { iterations, grad_norm })
    }
}

fn center(f: &mut [f64]) {
    let mean = f.iter().sum::<f64>() / f.len() as f64;
    f.iter_mut().for_each(|v| *v -= mean);
}

/// Minimizes the conditional risk of `spec` at every instance of `dist`.
/// Returns one centered score row per instance; instances are solved
/// independently (in parallel) and merged by index.
pub fn population_minimizer(dist: &DiscreteDistribution, spec: &MarginSpec) -> Result<Vec<Vec<f64>>> {
    population_minimizer_with(dist, spec, &MinimizerSettings::default())
}

pub fn population_minimizer_with(
    dist: &DiscreteDistribution,
    spec: &MarginSpec,
    settings: &MinimizerSettings,
) -> Result<Vec<Vec<f64>>> {
    if spec.num_classes() != dist.num_classes() {
        return Err(Error::LengthMismatch { expected: dist.num_classes(), got: spec.num_classes() });
    }
    (0..dist.num_instances())
        .into_par_iter()
        .map(|x| minimize_conditional_risk(spec, dist.eta(x), settings))
        .collect()
}

/// One instance where the population minimizer disagrees with the balanced
/// Bayes rule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub instance: usize,
    pub minimizer_argmax: usize,
    pub bayes_argmax: usize,
    pub eta: Vec<f64>,
    pub scores: Vec<f64>,
}

/// Outcome of a consistency check of one spec against one distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyReport {
    pub spec_name: String,
    pub distribution_digest: String,
    pub consistent: bool,
    pub witnesses: Vec<Witness>,
}

/// Ties closer than this (relative) are treated as agreement, so exact-tie
/// distributions do not produce spurious witnesses.
const TIE_TOLERANCE: f64 = 1e-7;

fn argmax_set(values: &[f64], relative: bool) -> Vec<usize> {
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let band = if relative { TIE_TOLERANCE * max.abs().max(1.0) } else { TIE_TOLERANCE };
    values
        .iter()
        .enumerate()
        .filter(|(_, &v)| v >= max - band)
        .map(|(i, _)| i)
        .collect()
}

/// Runs [`population_minimizer`] and compares each instance's argmax with
/// the balanced Bayes prediction `argmax_y eta_y(x)/pi_y` (priors implied
/// by the distribution). Mismatching instances are collected as witnesses.
pub fn consistency_report(dist: &DiscreteDistribution, spec: &MarginSpec) -> Result<ConsistencyReport> {
    let scores = population_minimizer(dist, spec)?;
    let priors = dist.implied_priors();
    let mut witnesses = Vec::new();
    for x in 0..dist.num_instances() {
        let eta = dist.eta(x);
        let balanced: Vec<f64> = eta.iter().zip(priors.probs()).map(|(e, p)| e / p).collect();
        let bayes_set = argmax_set(&balanced, true);
        let mini_set = argmax_set(&scores[x], false);
        if !mini_set.iter().any(|y| bayes_set.contains(y)) {
            witnesses.push(Witness {
                instance: x,
                minimizer_argmax: mini_set[0],
                bayes_argmax: bayes_set[0],
                eta: eta.to_vec(),
                scores: scores[x].clone(),
            });
        }
    }
    Ok(ConsistencyReport {
        spec_name: spec.name().to_string(),
        distribution_digest: dist.digest(),
        consistent: witnesses.is_empty(),
        witnesses,
    })
}

/// Draws random binary discrete distributions with a skewed positive prior
/// until `build_spec` (given the implied priors) is caught disagreeing with
/// the balanced Bayes rule. Returns the offending distribution and report.
pub fn find_inconsistency_witness(
    build_spec: impl Fn(&ClassPriors) -> MarginSpec,
    seed: u64,
    max_tries: usize,
) -> Result<Option<(DiscreteDistribution, ConsistencyReport)>> {
    let mut rng = rng_from_seed(seed);
    for _ in 0..max_tries {
        let m = rng.gen_range(2..=4);
        let mut weights: Vec<f64> = (0..m).map(|_| rng.gen_range(0.05..1.0)).collect();
        let wsum: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= wsum);
        let rows: Vec<Vec<f64>> = (0..m)
            .map(|_| {
                let eta0 = rng.gen_range(0.005..0.35);
                vec![eta0, 1.0 - eta0]
            })
            .collect();
        let dist = match DiscreteDistribution::new(weights, rows) {
            Ok(d) => d,
            Err(_) => continue,
        };
        let pi_plus = dist.implied_priors().prob(0);
        if !(0.01..=0.2).contains(&pi_plus) {
            continue;
        }
        let spec = build_spec(&dist.implied_priors());
        let report = consistency_report(&dist, &spec)?;
        if !report.consistent {
            return Ok(Some((dist, report)));
        }
    }
    Ok(None)
}
