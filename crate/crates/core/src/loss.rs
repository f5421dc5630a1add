//! The pairwise-margin softmax loss family.
//!
//! A [`MarginSpec`] holds per-label weights `alpha[y] > 0` and a pairwise
//! margin matrix `delta[y][y']` (diagonal fixed at zero). The loss of a
//! scored example `(y, f)` is
//!
//! ```text
//! alpha[y] * log(1 + sum_{y' != y} exp(delta[y][y'] + f[y'] - f[y]))
//! ```
//!
//! which recovers the standard softmax cross-entropy at `alpha = 1`,
//! `delta = 0`, and the various margin-modified losses through the named
//! constructors below. All log-sum-exp evaluations are max-shifted; the
//! loss stays finite for logits as large as `±1e4`.

use serde::{Deserialize, Serialize};

use crate::dist::ClassPriors;
use crate::{Error, Result};

/// One member of the pairwise-margin loss family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarginSpec {
    name: String,
    alpha: Vec<f64>,
    /// Row-major `L x L`; `delta[y*L + y']` is the margin demanded between
    /// true label `y` and negative `y'`. Diagonal entries are zero.
    delta: Vec<f64>,
}

impl MarginSpec {
    /// Validates weights (strictly positive), margins (finite), and the
    /// zero diagonal.
    pub fn new(name: impl Into<String>, alpha: Vec<f64>, delta: Vec<f64>) -> Result<Self> {
        let l = alpha.len();
        if l < 2 {
            return Err(Error::InvalidParameter("need at least 2 classes".into()));
        }
        if delta.len() != l * l {
            return Err(Error::LengthMismatch { expected: l * l, got: delta.len() });
        }
        if alpha.iter().any(|&a| !a.is_finite() || a <= 0.0) {
            return Err(Error::InvalidParameter("alpha entries must be strictly positive".into()));
        }
        if delta.iter().any(|d| !d.is_finite()) {
            return Err(Error::InvalidParameter("delta entries must be finite".into()));
        }
        for y in 0..l {
            if delta[y * l + y] != 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "delta diagonal must be zero, got {} at ({y},{y})",
                    delta[y * l + y]
                )));
            }
        }
        Ok(Self { name: name.into(), alpha, delta })
    }

    fn from_fn(name: &str, l: usize, alpha: impl Fn(usize) -> f64, margin: impl Fn(usize, usize) -> f64) -> Self {
        let alpha: Vec<f64> = (0..l).map(alpha).collect();
        let mut delta = vec![0.0; l * l];
        for y in 0..l {
            for yp in 0..l {
                if y != yp {
                    delta[y * l + yp] = margin(y, yp);
                }
            }
        }
        Self::new(name, alpha, delta).expect("constructor produced invalid spec")
    }

    /// Standard softmax cross-entropy: `alpha = 1`, `delta = 0`.
    pub fn erm(num_classes: usize) -> Self {
        Self::from_fn("erm", num_classes, |_| 1.0, |_, _| 0.0)
    }

    /// Balanced loss: `alpha[y] = 1/pi[y]`, `delta = 0`.
    pub fn balanced(priors: &ClassPriors) -> Self {
        Self::from_fn("balanced", priors.num_classes(), |y| 1.0 / priors.prob(y), |_, _| 0.0)
    }

    /// Adaptive margin: `alpha = 1`, `delta[y][y'] = pi[y]^(-1/4)`.
    pub fn adaptive(priors: &ClassPriors) -> Self {
        Self::from_fn("adaptive", priors.num_classes(), |_| 1.0, |y, _| priors.prob(y).powf(-0.25))
    }

    /// Equalised margin with transform `F(z) = z^tau`:
    /// `alpha = 1`, `delta[y][y'] = tau * log(pi[y'])`.
    pub fn equalised(priors: &ClassPriors, tau: f64) -> Self {
        Self::from_fn("equalised", priors.num_classes(), |_| 1.0, |_, yp| tau * priors.prob(yp).ln())
    }

    /// Logit-adjusted loss: `alpha = 1`, `delta[y][y'] = tau * log(pi[y']/pi[y])`.
    pub fn logit_adjusted(priors: &ClassPriors, tau: f64) -> Self {
        Self::from_fn("logit_adjusted", priors.num_classes(), |_| 1.0, |y, yp| {
            tau * (priors.prob(yp) / priors.prob(y)).ln()
        })
    }

    /// The consistent family generated by positive constants `delta_y`:
    /// `alpha[y] = delta_y/pi[y]`, margins `log(delta_{y'}/delta_y)`.
    pub fn from_delta(priors: &ClassPriors, deltas: &[f64]) -> Result<Self> {
        if deltas.len() != priors.num_classes() {
            return Err(Error::LengthMismatch { expected: priors.num_classes(), got: deltas.len() });
        }
        if deltas.iter().any(|&d| !d.is_finite() || d <= 0.0) {
            return Err(Error::InvalidParameter("delta constants must be strictly positive".into()));
        }
        Ok(Self::from_fn("from_delta", priors.num_classes(), |y| deltas[y] / priors.prob(y), |y, yp| {
            (deltas[yp] / deltas[y]).ln()
        }))
    }

    /// Relative margin plus adaptive margin:
    /// `delta[y][y'] = tau * log(pi[y']/pi[y]) + pi[y]^(-1/4)`.
    pub fn combined(priors: &ClassPriors, tau: f64) -> Self {
        Self::from_fn("combined", priors.num_classes(), |_| 1.0, |y, yp| {
            tau * (priors.prob(yp) / priors.prob(y)).ln() + priors.prob(y).powf(-0.25)
        })
    }

    /// Interpolation between the logit-adjusted loss (`tau1 = tau2`) and an
    /// equalised-style loss (`tau1 = 0`):
    /// `delta[y][y'] = tau2 * log(pi[y']) - tau1 * log(pi[y])`.
    pub fn interpolated(priors: &ClassPriors, tau1: f64, tau2: f64) -> Self {
        Self::from_fn("interpolated", priors.num_classes(), |_| 1.0, |y, yp| {
            tau2 * priors.prob(yp).ln() - tau1 * priors.prob(y).ln()
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn num_classes(&self) -> usize {
        self.alpha.len()
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    /// Margin demanded between true label `y` and negative `y'`.
    pub fn margin(&self, y: usize, y_prime: usize) -> f64 {
        self.delta[y * self.alpha.len() + y_prime]
    }

    /// Loss value at logits `f` for true label `y`.
    pub fn loss_value(&self, y: usize, f: &[f64]) -> f64 {
        let l = self.alpha.len();
        debug_assert_eq!(f.len(), l);
        debug_assert!(y < l);
        let row = &self.delta[y * l..(y + 1) * l];
        // log(1 + sum exp(t)) with shift by max(0, max t); the "1" is exp(0).
        let mut max_t = 0.0f64;
        for yp in 0..l {
            if yp != y {
                let t = row[yp] + f[yp] - f[y];
                if t > max_t {
                    max_t = t;
                }
            }
        }
        let mut sum = (-max_t).exp();
        for yp in 0..l {
            if yp != y {
                sum += (row[yp] + f[yp] - f[y] - max_t).exp();
            }
        }
        self.alpha[y] * (max_t + sum.ln())
    }

    /// Gradient of [`MarginSpec::loss_value`] with respect to each logit,
    /// written into `out`. Components sum to zero.
    pub fn loss_grad_into(&self, y: usize, f: &[f64], out: &mut [f64]) {
        let l = self.alpha.len();
        debug_assert_eq!(f.len(), l);
        debug_assert_eq!(out.len(), l);
        let row = &self.delta[y * l..(y + 1) * l];
        // Softmax of the margin-shifted logits a[y'] = f[y'] + delta[y][y'].
        let mut max_a = f64::NEG_INFINITY;
        for yp in 0..l {
            let a = f[yp] + row[yp];
            if a > max_a {
                max_a = a;
            }
        }
        let mut sum = 0.0;
        for yp in 0..l {
            let e = (f[yp] + row[yp] - max_a).exp();
            out[yp] = e;
            sum += e;
        }
        let alpha = self.alpha[y];
        for (yp, o) in out.iter_mut().enumerate() {
            let p = *o / sum;
            *o = alpha * (p - if yp == y { 1.0 } else { 0.0 });
        }
    }

    /// Allocating wrapper around [`MarginSpec::loss_grad_into`].
    pub fn loss_grad(&self, y: usize, f: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.alpha.len()];
        self.loss_grad_into(y, f, &mut out);
        out
    }
}
