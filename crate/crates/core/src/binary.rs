//! The binary weighted variable-margin loss family and its calibration
//! machinery.
//!
//! For weights `omega_{±} > 0`, margins `delta_{±}`, and temperature
//! `gamma > 0`, the loss of a scalar score `f` is
//!
//! ```text
//! loss(+1, f) = (omega_plus / gamma) * log(1 + exp(gamma * (delta_plus - f)))
//! loss(-1, f) = (omega_minus / gamma) * log(1 + exp(gamma * (delta_minus + f)))
//! ```
//!
//! As `gamma -> inf` these converge to the weighted hinge losses
//! `omega_plus * [delta_plus - f]_+` and `omega_minus * [delta_minus + f]_+`.
//! The family is proper composite: its population-optimal score is an
//! invertible link applied to the positive-class probability, and the loss
//! is consistent for the balanced error exactly when the derivative ratio
//! at zero satisfies `-loss'(+1,0)/loss'(-1,0) = (1-pi)/pi`
//! ([`BinaryMarginParams::consistency_residual`]).
//!
//! The scalar score relates to a two-class scorer by `f = f_0 - f_1`: with
//! weights `(omega_plus, omega_minus)`, margins `delta_01 = delta_plus`,
//! `delta_10 = delta_minus`, and `gamma = 1`, the pairwise-margin loss
//! equals this family exactly (the sum-zero two-class convention would
//! halve the score and double the temperature instead; we fix the factor
//! at 1).

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Binary label in the `{+1, -1}` convention.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BinaryLabel {
    Pos,
    Neg,
}

/// The decreasing logistic transform `sigma(z) = (1 + exp(z))^-1`.
pub fn sigma(z: f64) -> f64 {
    1.0 / (1.0 + z.exp())
}

/// The standard increasing sigmoid `s(z) = (1 + exp(-z))^-1 = sigma(-z)`.
pub fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// Numerically stable `log(1 + exp(z))`.
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

/// Parameters `(omega_plus, omega_minus, delta_plus, delta_minus, gamma)`
/// of the binary margin loss family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinaryMarginParams {
    pub omega_plus: f64,
    pub omega_minus: f64,
    pub delta_plus: f64,
    pub delta_minus: f64,
    pub gamma: f64,
}

impl BinaryMarginParams {
    pub fn new(omega_plus: f64, omega_minus: f64, delta_plus: f64, delta_minus: f64, gamma: f64) -> Result<Self> {
        for (name, v) in [("omega_plus", omega_plus), ("omega_minus", omega_minus), ("gamma", gamma)] {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::InvalidParameter(format!("{name} must be strictly positive, got {v}")));
            }
        }
        if !delta_plus.is_finite() || !delta_minus.is_finite() {
            return Err(Error::InvalidParameter("margins must be finite".into()));
        }
        Ok(Self { omega_plus, omega_minus, delta_plus, delta_minus, gamma })
    }

    /// The temperature-scaled logistic loss: unit weights, zero margins.
    pub fn standard(gamma: f64) -> Self {
        Self::new(1.0, 1.0, 0.0, 0.0, gamma).expect("valid")
    }

    /// Weighted loss with a constant margin: `omega = (1/pi, 1/(1-pi))`,
    /// `delta = (1, 1)`. Consistent for the balanced error at any gamma.
    pub fn balanced(pi: f64, gamma: f64) -> Result<Self> {
        check_pi(pi)?;
        Self::new(1.0 / pi, 1.0 / (1.0 - pi), 1.0, 1.0, gamma)
    }

    /// Unweighted loss with the prior-dependent margin
    /// `delta_plus = log((1-pi)/pi)/gamma`, `delta_minus = -delta_plus`.
    /// Consistent for the balanced error at any gamma.
    pub fn unequal_margin(pi: f64, gamma: f64) -> Result<Self> {
        check_pi(pi)?;
        let d = ((1.0 - pi) / pi).ln() / gamma;
        Self::new(1.0, 1.0, d, -d, gamma)
    }

    /// Weighting plus margins: `omega = (1/pi, 1/(1-pi))`, `delta_plus = 1`,
    /// `delta_minus = pi/(1-pi)`. Consistent only in the hinge limit.
    pub fn balanced_margin(pi: f64, gamma: f64) -> Result<Self> {
        check_pi(pi)?;
        Self::new(1.0 / pi, 1.0 / (1.0 - pi), 1.0, pi / (1.0 - pi), gamma)
    }

    /// Loss value; stable for any magnitude of `f`.
    pub fn loss(&self, y: BinaryLabel, f: f64) -> f64 {
        match y {
            BinaryLabel::Pos => self.omega_plus / self.gamma * softplus(self.gamma * (self.delta_plus - f)),
            BinaryLabel::Neg => self.omega_minus / self.gamma * softplus(self.gamma * (self.delta_minus + f)),
        }
    }

    /// Derivative of the loss with respect to the score.
    pub fn loss_derivative(&self, y: BinaryLabel, f: f64) -> f64 {
        match y {
            BinaryLabel::Pos => -self.omega_plus * sigmoid(self.gamma * (self.delta_plus - f)),
            BinaryLabel::Neg => self.omega_minus * sigmoid(self.gamma * (self.delta_minus + f)),
        }
    }

    /// The weighted hinge loss this family approaches as `gamma -> inf`.
    pub fn hinge_limit(&self, y: BinaryLabel, f: f64) -> f64 {
        match y {
            BinaryLabel::Pos => self.omega_plus * (self.delta_plus - f).max(0.0),
            BinaryLabel::Neg => self.omega_minus * (self.delta_minus + f).max(0.0),
        }
    }

    /// Deviation from the balanced-error consistency condition at prior
    /// `pi`: the Bayes-optimal score crosses zero at `eta = pi` iff
    /// `-loss'(+1,0)/loss'(-1,0) = (1-pi)/pi`, i.e. iff
    /// `(omega_plus/omega_minus) * sigma(-gamma delta_plus)/sigma(-gamma delta_minus)`
    /// equals `(1-pi)/pi`. Returns that difference; zero means consistent.
    pub fn consistency_residual(&self, pi: f64) -> f64 {
        let ratio = -self.loss_derivative(BinaryLabel::Pos, 0.0) / self.loss_derivative(BinaryLabel::Neg, 0.0);
        ratio - (1.0 - pi) / pi
    }

    /// Inverse link `Psi^{-1}(f) = 1/(1 - loss'(+1,f)/loss'(-1,f))`, the
    /// class-probability the loss assigns to a score.
    pub fn link_inverse(&self, f: f64) -> f64 {
        let lp = self.loss_derivative(BinaryLabel::Pos, f);
        let ln = self.loss_derivative(BinaryLabel::Neg, f);
        1.0 / (1.0 - lp / ln)
    }

    /// Forward link `Psi(p)`: the score whose inverse link is `p`, from the
    /// positive root `g` of `g^2 + (c - ab/q) g - a/q = 0` with
    /// `a = (omega_plus/omega_minus) e^{gamma(delta_plus-delta_minus)}`,
    /// `b = e^{gamma delta_minus}`, `c = e^{gamma delta_plus}`,
    /// `q = (1-p)/p`, and `f = log(g)/gamma`.
    pub fn link_forward(&self, p: f64) -> Result<f64> {
        if p.is_nan() || p <= 0.0 || p >= 1.0 {
            return Err(Error::InvalidParameter(format!("p must lie in (0,1), got {p}")));
        }
        let q = (1.0 - p) / p;
        let c = (self.gamma * self.delta_plus).exp();
        // a*b collapses to (omega_plus/omega_minus) * c.
        let ab = self.omega_plus / self.omega_minus * c;
        let a = self.omega_plus / self.omega_minus * (self.gamma * (self.delta_plus - self.delta_minus)).exp();
        let x = ab / q - c;
        let disc = 4.0 * a / q;
        // Positive root, rationalized when x < 0 to avoid cancellation.
        let g = if x >= 0.0 {
            0.5 * (x + (x * x + disc).sqrt())
        } else {
            disc / (2.0 * ((x * x + disc).sqrt() - x))
        };
        Ok(g.ln() / self.gamma)
    }

    /// Conditional Bayes risk `L(p) = p loss(+1, Psi(p)) + (1-p) loss(-1, Psi(p))`.
    /// With `normalized` the curve is divided by its maximum, located by a
    /// dense grid search at resolution 1e-4.
    pub fn conditional_bayes_risk(&self, p: f64, normalized: bool) -> Result<f64> {
        let raw = self.conditional_bayes_risk_raw(p)?;
        if normalized {
            Ok(raw / self.bayes_risk_max())
        } else {
            Ok(raw)
        }
    }

    fn conditional_bayes_risk_raw(&self, p: f64) -> Result<f64> {
        let f = self.link_forward(p)?;
        Ok(p * self.loss(BinaryLabel::Pos, f) + (1.0 - p) * self.loss(BinaryLabel::Neg, f))
    }

    /// Maximum of the conditional Bayes risk over a grid of step 1e-4.
    pub fn bayes_risk_max(&self) -> f64 {
        let mut max = 0.0f64;
        for k in 1..10_000 {
            let p = k as f64 * 1e-4;
            if let Ok(v) = self.conditional_bayes_risk_raw(p) {
                if v > max {
                    max = v;
                }
            }
        }
        max
    }
}

fn check_pi(pi: f64) -> Result<()> {
    if pi.is_nan() || pi <= 0.0 || pi >= 1.0 {
        return Err(Error::InvalidParameter(format!("pi must lie in (0,1), got {pi}")));
    }
    Ok(())
}

/// Result of the cost-sensitive SVM parameter check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CsSvmCheck {
    pub consistent: bool,
    pub normalized: bool,
}

/// Checks a weighted variable-margin SVM `(omega, delta)` against cost
/// `c in (0,1)`: consistent iff `omega_plus/omega_minus = (1-c)/c`, and the
/// conditional Bayes risk peaks at 1 iff `delta_minus + delta_plus = 1/(c omega_plus)`.
pub fn cs_svm_check(
    omega_plus: f64,
    omega_minus: f64,
    delta_plus: f64,
    delta_minus: f64,
    cost: f64,
) -> Result<CsSvmCheck> {
    for (name, v) in [("omega_plus", omega_plus), ("omega_minus", omega_minus)] {
        if !v.is_finite() || v <= 0.0 {
            return Err(Error::InvalidParameter(format!("{name} must be strictly positive, got {v}")));
        }
    }
    if cost.is_nan() || cost <= 0.0 || cost >= 1.0 {
        return Err(Error::InvalidParameter(format!("cost must lie in (0,1), got {cost}")));
    }
    Ok(CsSvmCheck {
        consistent: (omega_plus / omega_minus - (1.0 - cost) / cost).abs() <= 1e-10,
        normalized: (delta_minus + delta_plus - 1.0 / (cost * omega_plus)).abs() <= 1e-10,
    })
}

/// Emits `p,psi,psi_inv,bayes_risk` rows: `psi` is the forward link at the
/// i-th point of `p_grid`, `psi_inv` the inverse link at the i-th point of
/// `f_grid` (the two grids must have equal length), and `bayes_risk` the
/// (optionally normalized) conditional Bayes risk at `p`.
pub fn write_curves<W: Write>(
    params: &BinaryMarginParams,
    p_grid: &[f64],
    f_grid: &[f64],
    normalized: bool,
    mut w: W,
) -> Result<()> {
    if p_grid.len() != f_grid.len() {
        return Err(Error::LengthMismatch { expected: p_grid.len(), got: f_grid.len() });
    }
    let max = if normalized { params.bayes_risk_max() } else { 1.0 };
    writeln!(w, "p,psi,psi_inv,bayes_risk")?;
    for (&p, &f) in p_grid.iter().zip(f_grid) {
        let psi = params.link_forward(p)?;
        let psi_inv = params.link_inverse(f);
        let risk = params.conditional_bayes_risk_raw(p)? / max;
        writeln!(w, "{p},{psi},{psi_inv},{risk}")?;
    }
    Ok(())
}

/// Evenly spaced grid of `n` points over the open interval `(lo, hi)`
/// (endpoints excluded by half a step).
pub fn open_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let step = (hi - lo) / n as f64;
    (0..n).map(|k| lo + step * (k as f64 + 0.5)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::loss::MarginSpec;
    use crate::rng::rng_from_seed;
    use rand::Rng as _;
    use BinaryLabel::{Neg, Pos};

    const LOG2: f64 = std::f64::consts::LN_2;
    const LOG3: f64 = 1.0986122886681098;

    #[test]
    fn standard_loss_is_logistic() {
        let p = BinaryMarginParams::standard(1.0);
        assert!((p.loss(Pos, 0.0) - LOG2).abs() < 1e-15);
        assert!((p.loss(Neg, 0.0) - LOG2).abs() < 1e-15);
    }

    #[test]
    fn hinge_limit_values() {
        // Margin satisfied: loss vanishes.
        let p = BinaryMarginParams::new(1.0, 1.0, 1.0, 0.0, 100.0).unwrap();
        assert!(p.loss(Pos, 2.0).abs() < 1e-12);
        // Margin violated by 1 with weight 2: loss ~ 2.
        let p = BinaryMarginParams::new(2.0, 1.0, 1.0, 0.0, 100.0).unwrap();
        assert!((p.loss(Pos, 0.0) - 2.0).abs() < 1e-3);
    }

    #[test]
    fn gamma_limit_converges_to_weighted_hinge() {
        let gamma = 1e3;
        let bound = 10.0 * LOG2 / gamma;
        for params in [
            BinaryMarginParams::standard(gamma),
            BinaryMarginParams::balanced(0.2, gamma).unwrap(),
            BinaryMarginParams::balanced_margin(0.2, gamma).unwrap(),
            BinaryMarginParams::new(1.0, 2.0, 0.7, -0.3, gamma).unwrap(),
        ] {
            let mut sup = 0.0f64;
            for k in 0..=1000 {
                let f = -5.0 + k as f64 * 0.01;
                for y in [Pos, Neg] {
                    sup = sup.max((params.loss(y, f) - params.hinge_limit(y, f)).abs());
                }
            }
            assert!(sup <= bound, "sup {sup} exceeds {bound} for {params:?}");
        }
    }

    #[test]
    fn admissible_families_have_zero_residual() {
        let mut rng = rng_from_seed(61);
        for _ in 0..250 {
            let pi: f64 = rng.gen_range(0.05..0.95);
            let gamma: f64 = rng.gen_range(0.5..8.0);

            // Weighted loss with a constant (equal) margin.
            let m: f64 = rng.gen_range(0.1..2.0);
            let p = BinaryMarginParams::new(1.0 / pi, 1.0 / (1.0 - pi), m, m, gamma).unwrap();
            assert!(p.consistency_residual(pi).abs() < 1e-9, "family 1 at pi={pi}");

            // Unweighted loss with the prior-matched margin.
            let p = BinaryMarginParams::unequal_margin(pi, gamma).unwrap();
            assert!(p.consistency_residual(pi).abs() < 1e-9, "family 2 at pi={pi}");
        }
    }

    #[test]
    fn inadmissible_choices_have_nonzero_residual() {
        let pi = 0.1;
        // Margin modification alone.
        let p = BinaryMarginParams::new(1.0, 1.0, 1.0 - pi, pi, 1.0).unwrap();
        assert!(p.consistency_residual(pi).abs() > 0.1);

        // Combining both weighting and the margin shift overshoots.
        let gamma = 2.0;
        let d = ((1.0 - pi) / pi).ln() / gamma;
        let p = BinaryMarginParams::new(1.0 / pi, 1.0 / (1.0 - pi), d, -d, gamma).unwrap();
        assert!(p.consistency_residual(pi).abs() > 0.1);

        // Balanced + margin becomes consistent only as gamma grows.
        let p = BinaryMarginParams::balanced_margin(pi, 1.0).unwrap();
        assert!(p.consistency_residual(pi).abs() > 0.1);
        let p = BinaryMarginParams::balanced_margin(pi, 1e4).unwrap();
        assert!(p.consistency_residual(pi).abs() < 1e-6);
    }

    #[test]
    fn link_inverse_examples() {
        let std1 = BinaryMarginParams::standard(1.0);
        assert!((std1.link_inverse(0.0) - 0.5).abs() < 1e-15);
        assert!((std1.link_inverse(LOG3) - 0.75).abs() < 1e-12);

        // Consistent logit-adjusted family: Psi^{-1}(0) = pi.
        for pi in [0.05, 0.2, 0.5, 0.9] {
            for gamma in [0.5, 1.0, 4.0] {
                let p = BinaryMarginParams::unequal_margin(pi, gamma).unwrap();
                assert!((p.link_inverse(0.0) - pi).abs() < 1e-12, "pi={pi} gamma={gamma}");
            }
        }
    }

    #[test]
    fn residual_zero_pins_link_at_prior_and_conversely() {
        let mut rng = rng_from_seed(67);
        let mut rejected = 0;
        for _ in 0..500 {
            let pi: f64 = rng.gen_range(0.2..0.8);
            let gamma: f64 = rng.gen_range(0.5..4.0);
            let params = BinaryMarginParams::new(
                rng.gen_range(0.5..2.0),
                rng.gen_range(0.5..2.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                gamma,
            )
            .unwrap();
            if params.consistency_residual(pi).abs() > 0.01 {
                assert!(
                    (params.link_inverse(0.0) - pi).abs() > 1e-4,
                    "inconsistent params should not calibrate at pi"
                );
                rejected += 1;
            }
        }
        assert!(rejected > 100, "the random sweep should hit inconsistent params");
    }

    #[test]
    fn link_forward_examples() {
        let std1 = BinaryMarginParams::standard(1.0);
        assert!((std1.link_forward(0.75).unwrap() - LOG3).abs() < 1e-12);
        assert!(std1.link_forward(0.5).unwrap().abs() < 1e-12);
        assert!(std1.link_forward(0.0).is_err());
        assert!(std1.link_forward(1.0).is_err());
    }

    #[test]
    fn link_round_trip_identity() {
        let mut rng = rng_from_seed(71);
        for _ in 0..1000 {
            let params = BinaryMarginParams::new(
                rng.gen_range(0.1..10.0),
                rng.gen_range(0.1..10.0),
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-2.0..2.0),
                rng.gen_range(0.5..8.0),
            )
            .unwrap();
            let p: f64 = rng.gen_range(1e-3..1.0 - 1e-3);
            let f = params.link_forward(p).unwrap();
            let back = params.link_inverse(f);
            assert!((back - p).abs() < 1e-9, "p={p} back={back} params={params:?}");

            // And the other composition on the score side, away from the
            // saturated tails where p is not representable to 1e-9.
            let f0: f64 = rng.gen_range(-4.0..4.0);
            let p0 = params.link_inverse(f0);
            if p0 > 1e-6 && p0 < 1.0 - 1e-6 {
                let f_back = params.link_forward(p0).unwrap();
                assert!((f_back - f0).abs() < 1e-9 * f0.abs().max(1.0));
            }
        }
    }

    #[test]
    fn bayes_risk_symmetric_point_and_edges() {
        let std1 = BinaryMarginParams::standard(1.0);
        assert!((std1.conditional_bayes_risk(0.5, false).unwrap() - LOG2).abs() < 1e-12);
        assert!(std1.conditional_bayes_risk(1e-6, false).unwrap() < 1e-4);
        assert!(std1.conditional_bayes_risk(1.0 - 1e-6, false).unwrap() < 1e-4);
    }

    #[test]
    fn margin_shift_leaves_bayes_risk_unchanged() {
        let mut rng = rng_from_seed(73);
        for _ in 0..5 {
            let gamma: f64 = rng.gen_range(0.5..4.0);
            let c: f64 = rng.gen_range(-2.0..2.0);
            let shifted = BinaryMarginParams::new(1.0, 1.0, c, -c, gamma).unwrap();
            let standard = BinaryMarginParams::standard(gamma);
            for k in 0..100 {
                let p = (k as f64 + 0.5) / 100.0;
                let a = shifted.conditional_bayes_risk(p, false).unwrap();
                let b = standard.conditional_bayes_risk(p, false).unwrap();
                assert!((a - b).abs() < 1e-8, "p={p}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn bayes_risk_is_concave_on_a_grid() {
        for params in [
            BinaryMarginParams::standard(1.0),
            BinaryMarginParams::balanced(0.2, 1.0).unwrap(),
            BinaryMarginParams::unequal_margin(0.2, 8.0).unwrap(),
        ] {
            let grid: Vec<f64> = (1..200).map(|k| k as f64 / 200.0).collect();
            let vals: Vec<f64> =
                grid.iter().map(|&p| params.conditional_bayes_risk(p, false).unwrap()).collect();
            for w in vals.windows(3) {
                let second_diff = w[2] - 2.0 * w[1] + w[0];
                assert!(second_diff <= 1e-6, "second difference {second_diff}");
            }
        }
    }

    #[test]
    fn normalized_risk_peaks_at_one() {
        let params = BinaryMarginParams::balanced(0.2, 1.0).unwrap();
        let max = (1..10_000)
            .map(|k| params.conditional_bayes_risk(k as f64 * 1e-4, true).unwrap())
            .fold(0.0f64, f64::max);
        assert!((max - 1.0).abs() < 1e-12);
    }

    #[test]
    fn two_class_margin_loss_agrees_with_binary_family() {
        // alpha = (omega_plus, omega_minus), delta_01 = delta_plus,
        // delta_10 = delta_minus, gamma = 1, under f = f0 - f1.
        let mut rng = rng_from_seed(79);
        for _ in 0..200 {
            let (op, om): (f64, f64) = (rng.gen_range(0.2..5.0), rng.gen_range(0.2..5.0));
            let (dp, dm): (f64, f64) = (rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
            let binary = BinaryMarginParams::new(op, om, dp, dm, 1.0).unwrap();
            let multi = MarginSpec::new(
                "binary_as_two_class",
                vec![op, om],
                vec![0.0, dp, dm, 0.0],
            )
            .unwrap();
            let f0: f64 = rng.gen_range(-3.0..3.0);
            let f1: f64 = rng.gen_range(-3.0..3.0);
            let f = f0 - f1;
            assert!((multi.loss_value(0, &[f0, f1]) - binary.loss(Pos, f)).abs() < 1e-12);
            assert!((multi.loss_value(1, &[f0, f1]) - binary.loss(Neg, f)).abs() < 1e-12);
        }
    }

    #[test]
    fn cs_svm_conditions() {
        // Pre-rescaled cost-sensitive parameters: consistent and normalized.
        let pi = 0.2;
        let check = cs_svm_check((1.0 - pi) / pi, 1.0, 1.0, pi / (1.0 - pi), pi).unwrap();
        assert!(check.consistent && check.normalized);

        // Rescaling the weights preserves consistency but breaks the
        // unit-peak normalization: delta sum is 1/(1-pi), not 1/(c omega_plus) = 1.
        let check = cs_svm_check(1.0 / pi, 1.0 / (1.0 - pi), 1.0, pi / (1.0 - pi), pi).unwrap();
        assert!(check.consistent && !check.normalized);

        let check = cs_svm_check(1.0, 1.0, 1.0, 1.0, 0.5).unwrap();
        assert!(check.consistent && check.normalized);

        let check = cs_svm_check(1.0, 1.0, 1.0, 1.0, 0.2).unwrap();
        assert!(!check.consistent);
    }

    #[test]
    fn curve_emitter_schema() {
        let params = BinaryMarginParams::standard(1.0);
        let p_grid = open_grid(0.0, 1.0, 10);
        let f_grid: Vec<f64> = (0..10).map(|k| -5.0 + k as f64).collect();
        let mut buf = Vec::new();
        write_curves(&params, &p_grid, &f_grid, true, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "p,psi,psi_inv,bayes_risk");
        assert_eq!(lines.count(), 10);
    }
}
