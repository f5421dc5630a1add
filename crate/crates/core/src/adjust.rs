//! Post-hoc score corrections and argmax prediction.
//!
//! Logit adjustment subtracts `tau * log(pi[y])` from each logit (an
//! additive, order-changing correction); weight normalization divides by
//! `nu[y]^tau` (multiplicative, sign-preserving). The two are not
//! equivalent: a rare class with a negative raw score can win under
//! adjustment but never under normalization.

use serde::{Deserialize, Serialize};

use crate::dist::ClassPriors;
use crate::train::LinearModel;
use crate::{Error, Result};

/// Parameters for post-hoc logit adjustment. `tau = 0` is the identity,
/// kept admissible so sweeps include the unadjusted baseline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdjustmentParams {
    pub tau: f64,
    pub priors: ClassPriors,
}

impl AdjustmentParams {
    pub fn new(tau: f64, priors: ClassPriors) -> Result<Self> {
        if !tau.is_finite() || tau < 0.0 {
            return Err(Error::InvalidParameter(format!("tau must be finite and >= 0, got {tau}")));
        }
        Ok(Self { tau, priors })
    }
}

/// Per-class scale factors for weight normalization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizationSpec {
    pub nu: Vec<f64>,
    pub tau: f64,
}

impl NormalizationSpec {
    pub fn new(nu: Vec<f64>, tau: f64) -> Result<Self> {
        if nu.iter().any(|&v| !v.is_finite() || v <= 0.0) {
            return Err(Error::InvalidParameter("nu entries must be strictly positive".into()));
        }
        if !tau.is_finite() || tau < 0.0 {
            return Err(Error::InvalidParameter(format!("tau must be finite and >= 0, got {tau}")));
        }
        Ok(Self { nu, tau })
    }
}

/// Adjusted scores `f[y] - tau * log(pi[y])`.
pub fn posthoc_adjust(logits: &[f64], params: &AdjustmentParams) -> Vec<f64> {
    debug_assert_eq!(logits.len(), params.priors.num_classes());
    logits
        .iter()
        .zip(params.priors.probs())
        .map(|(f, pi)| f - params.tau * pi.ln())
        .collect()
}

/// Normalized scores `f[y] / nu[y]^tau`.
pub fn weight_normalize_scores(logits: &[f64], spec: &NormalizationSpec) -> Vec<f64> {
    debug_assert_eq!(logits.len(), spec.nu.len());
    logits.iter().zip(&spec.nu).map(|(f, nu)| f / nu.powf(spec.tau)).collect()
}

/// Temperature-scaled scores `f[y] / tau` for `tau > 0`.
pub fn temperature_scale(logits: &[f64], tau: f64) -> Result<Vec<f64>> {
    if !tau.is_finite() || tau <= 0.0 {
        return Err(Error::InvalidParameter(format!("temperature must be positive, got {tau}")));
    }
    Ok(logits.iter().map(|f| f / tau).collect())
}

/// Index of the maximum score; ties break toward the lowest index.
pub fn predict(scores: &[f64]) -> usize {
    debug_assert!(!scores.is_empty());
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate().skip(1) {
        if s > scores[best] {
            best = i;
        }
    }
    best
}

/// How to choose the per-class scale when normalizing a trained model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NuChoice {
    /// `nu[y] = pi[y]`.
    Prior,
    /// `nu[y] = ||w_y||_2`, bias excluded from the norm.
    WeightNorm,
}

/// Divides each weight row and bias of `model` by `nu[y]^tau`, so the
/// normalized model's scores equal [`weight_normalize_scores`] applied to
/// the raw scores.
pub fn normalize_model(model: &LinearModel, spec: &NormalizationSpec) -> Result<LinearModel> {
    if spec.nu.len() != model.num_classes() {
        return Err(Error::LengthMismatch { expected: model.num_classes(), got: spec.nu.len() });
    }
    let mut out = model.clone();
    for y in 0..model.num_classes() {
        let scale = spec.nu[y].powf(spec.tau);
        for w in out.weights_row_mut(y) {
            *w /= scale;
        }
        *out.bias_mut(y) /= scale;
    }
    Ok(out)
}

/// Builds the `nu` vector for a model under the given choice.
pub fn nu_for(model: &LinearModel, priors: &ClassPriors, choice: NuChoice) -> Vec<f64> {
    match choice {
        NuChoice::Prior => priors.probs().to_vec(),
        NuChoice::WeightNorm => model.weight_norms(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;
    use rand::Rng as _;

    fn priors(p: &[f64]) -> ClassPriors {
        ClassPriors::new(p.to_vec()).unwrap()
    }

    #[test]
    fn adjustment_flips_argmax_toward_rare_class() {
        let params = AdjustmentParams::new(1.0, priors(&[0.9, 0.1])).unwrap();
        let adjusted = posthoc_adjust(&[2.0, 1.0], &params);
        assert!((adjusted[0] - 2.1053605156578263).abs() < 1e-12);
        assert!((adjusted[1] - 3.3025850929940455).abs() < 1e-12);
        assert_eq!(predict(&[2.0, 1.0]), 0);
        assert_eq!(predict(&adjusted), 1);
    }

    #[test]
    fn adjustment_identity_cases() {
        // Uniform priors shift every logit equally.
        let params = AdjustmentParams::new(1.7, priors(&[0.25; 4])).unwrap();
        let f = [0.3, -2.0, 1.4, 1.1];
        assert_eq!(predict(&posthoc_adjust(&f, &params)), predict(&f));

        // tau = 0 is the identity.
        let params = AdjustmentParams::new(0.0, priors(&[0.9, 0.1])).unwrap();
        assert_eq!(posthoc_adjust(&f[..2], &params), &f[..2]);
    }

    #[test]
    fn rejects_negative_tau() {
        assert!(AdjustmentParams::new(-0.5, priors(&[0.5, 0.5])).is_err());
        assert!(NormalizationSpec::new(vec![1.0, 1.0], f64::NAN).is_err());
        assert!(NormalizationSpec::new(vec![0.0, 1.0], 1.0).is_err());
    }

    #[test]
    fn multiplicative_vs_additive_witness() {
        // Rare class 0 has a negative raw score: normalization can never let
        // it win, adjustment can.
        let f = [-0.5, 1.0];
        let norm = NormalizationSpec::new(vec![0.1, 0.9], 1.0).unwrap();
        let wn = weight_normalize_scores(&f, &norm);
        assert!((wn[0] + 5.0).abs() < 1e-12);
        assert!((wn[1] - 1.1111111111111112).abs() < 1e-12);
        assert_eq!(predict(&wn), 1);

        let params = AdjustmentParams::new(1.0, priors(&[0.1, 0.9])).unwrap();
        let adj = posthoc_adjust(&f, &params);
        assert!((adj[0] - 1.8025850929940455).abs() < 1e-12);
        assert!((adj[1] - 1.1053605156578263).abs() < 1e-12);
        assert_eq!(predict(&adj), 0, "adjustment must recover the rare class");
    }

    #[test]
    fn normalization_identity_cases() {
        let f = [0.5, 1.0, 2.5];
        // Constant nu never changes the order of positive scores.
        let norm = NormalizationSpec::new(vec![0.3; 3], 2.0).unwrap();
        assert_eq!(predict(&weight_normalize_scores(&f, &norm)), predict(&f));
        // tau = 0 is the identity.
        let norm = NormalizationSpec::new(vec![0.1, 0.5, 0.9], 0.0).unwrap();
        assert_eq!(weight_normalize_scores(&f, &norm), f.to_vec());
    }

    #[test]
    fn temperature_scaling_behaviour() {
        let f = [2.0, 0.0];
        assert_eq!(temperature_scale(&f, 1.0).unwrap(), f.to_vec());
        assert_eq!(temperature_scale(&f, 2.0).unwrap(), vec![1.0, 0.0]);
        assert!(temperature_scale(&f, 0.0).is_err());
        assert!(temperature_scale(&f, -1.0).is_err());

        // Higher temperature flattens the softmax: max prob decreases.
        let softmax_max = |f: &[f64]| {
            let m = f.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let sum: f64 = f.iter().map(|v| (v - m).exp()).sum();
            f.iter().map(|v| (v - m).exp() / sum).fold(f64::NEG_INFINITY, f64::max)
        };
        let f = [1.5, -0.5, 0.2];
        let p1 = softmax_max(&temperature_scale(&f, 1.0).unwrap());
        let p2 = softmax_max(&temperature_scale(&f, 2.0).unwrap());
        let p4 = softmax_max(&temperature_scale(&f, 4.0).unwrap());
        assert!(p1 > p2 && p2 > p4);
        // And never changes the argmax.
        for tau in [0.5, 1.0, 2.0, 4.0, 16.0] {
            assert_eq!(predict(&temperature_scale(&f, tau).unwrap()), predict(&f));
        }
    }

    #[test]
    fn predict_breaks_ties_low() {
        assert_eq!(predict(&[0.0, 1.0, 0.0]), 1);
        assert_eq!(predict(&[3.0, 3.0]), 0);
        assert_eq!(predict(&[1.0, 2.0, 2.0]), 1);
    }

    #[test]
    fn duality_round_trip_is_exact() {
        // predict(f) == predict(adjust(g, tau)) where g = f + tau*log(pi).
        let mut rng = rng_from_seed(41);
        for _ in 0..10_000 {
            let l = rng.gen_range(2..6);
            let raw: Vec<f64> = (0..l).map(|_| rng.gen_range(0.02..1.0)).collect();
            let sum: f64 = raw.iter().sum();
            let pi = priors(&raw.iter().map(|r| r / sum).collect::<Vec<_>>());
            let tau: f64 = rng.gen_range(0.0..3.0);
            let f: Vec<f64> = (0..l).map(|_| rng.gen_range(-5.0..5.0)).collect();
            let g: Vec<f64> = f
                .iter()
                .zip(pi.probs())
                .map(|(v, p)| v + tau * p.ln())
                .collect();
            let params = AdjustmentParams::new(tau, pi).unwrap();
            assert_eq!(predict(&f), predict(&posthoc_adjust(&g, &params)));
        }
    }

    #[test]
    fn adjustment_commutes_with_constant_shift_at_argmax() {
        let mut rng = rng_from_seed(42);
        for _ in 0..200 {
            let f: Vec<f64> = (0..3).map(|_| rng.gen_range(-4.0..4.0)).collect();
            let c: f64 = rng.gen_range(-10.0..10.0);
            let shifted: Vec<f64> = f.iter().map(|v| v + c).collect();
            let params = AdjustmentParams::new(1.3, priors(&[0.7, 0.2, 0.1])).unwrap();
            assert_eq!(
                predict(&posthoc_adjust(&f, &params)),
                predict(&posthoc_adjust(&shifted, &params))
            );
        }
    }
}
