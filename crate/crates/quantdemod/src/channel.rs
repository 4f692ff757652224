//! Constellations, the unit-noise Gaussian channel, quantizer schemes,
//! induced discrete channels, and mutual-information functionals.
//!
//! Conventions: the channel is Y = g X + W with W standard normal and the
//! input normalized to zero mean and unit power, so SNR = g^2
//! (10 log10 g^2 in dB). All informations are in nats.

use crate::error::{QuantError, Result};
use crate::numerics::{log_sum_exp, normal_pdf, q_function, QuadratureRule};
use serde::{Deserialize, Serialize};

/// Equally spaced real amplitudes with a prior, normalized to zero mean and
/// unit variance.
#[derive(Clone, Debug, PartialEq)]
pub struct PamConstellation {
    points: Vec<f64>,
    spacing: f64,
    prior: Vec<f64>,
}

impl PamConstellation {
    /// Builds from explicit points and prior; points must be strictly
    /// increasing and equally spaced, the prior a probability vector, and
    /// the normalization (zero mean, unit variance) must hold to 1e-12.
    pub fn new(points: Vec<f64>, prior: Vec<f64>) -> Result<Self> {
        if points.len() < 2 || points.len() != prior.len() {
            return Err(QuantError::InvalidParameter(
                "need at least two points and one prior entry per point".into(),
            ));
        }
        let spacing = points[1] - points[0];
        if !(spacing > 0.0) {
            return Err(QuantError::InvalidParameter("points must be strictly increasing".into()));
        }
        for w in points.windows(2) {
            if ((w[1] - w[0]) - spacing).abs() > 1e-9 * spacing.max(1.0) {
                return Err(QuantError::InvalidParameter("points must be equally spaced".into()));
            }
        }
        if prior.iter().any(|&p| !(p >= 0.0)) {
            return Err(QuantError::InvalidParameter("prior entries must be non-negative".into()));
        }
        let total: f64 = prior.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(QuantError::InvalidParameter(format!("prior sums to {total}, not 1")));
        }
        let mean: f64 = points.iter().zip(&prior).map(|(&x, &p)| p * x).sum();
        let var: f64 = points.iter().zip(&prior).map(|(&x, &p)| p * x * x).sum::<f64>()
            - mean * mean;
        if mean.abs() > 1e-12 {
            return Err(QuantError::InvalidParameter(format!("mean {mean} is not 0")));
        }
        if (var - 1.0).abs() > 1e-12 {
            return Err(QuantError::InvalidParameter(format!("variance {var} is not 1")));
        }
        Ok(Self { points, spacing, prior })
    }

    /// K equally spaced points with uniform prior, normalized to zero mean
    /// and unit variance. K = 2 gives points at -1 and +1.
    pub fn uniform(k: usize) -> Result<Self> {
        if k < 2 {
            return Err(QuantError::InvalidParameter("need at least 2 points".into()));
        }
        // Variance of uniform K-PAM with spacing d is d^2 (K^2 - 1) / 12.
        let d = (12.0 / ((k * k - 1) as f64)).sqrt();
        let points: Vec<f64> =
            (0..k).map(|i| d * (i as f64 - (k as f64 - 1.0) / 2.0)).collect();
        let prior = vec![1.0 / k as f64; k];
        Self::new(points, prior)
    }

    /// The binary antipodal constellation at -1 and +1.
    pub fn two_pam() -> Self {
        Self::uniform(2).expect("2-PAM is always valid")
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn prior(&self) -> &[f64] {
        &self.prior
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// Number of constellation points (K).
    pub fn order(&self) -> usize {
        self.points.len()
    }
}

/// Amplitude gain g over unit-variance additive Gaussian noise.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GaussianChannel {
    gain: f64,
}

impl GaussianChannel {
    pub fn new(gain: f64) -> Result<Self> {
        if !gain.is_finite() || gain < 0.0 {
            return Err(QuantError::InvalidParameter(format!(
                "gain {gain} must be finite and non-negative"
            )));
        }
        Ok(Self { gain })
    }

    /// Channel whose SNR g^2 equals the given value in dB.
    pub fn from_snr_db(snr_db: f64) -> Self {
        Self { gain: 10f64.powf(snr_db / 20.0) }
    }

    pub fn gain(&self) -> f64 {
        self.gain
    }

    /// 10 log10 g^2: noise and input are unit-variance, so SNR is g^2.
    pub fn snr_db(&self) -> f64 {
        20.0 * self.gain.log10()
    }
}

/// Ordered decision thresholds plus the per-interval output metric values.
///
/// N intervals are separated by N - 1 strictly increasing thresholds; outer
/// intervals are half-infinite (thresholds never store infinities). The
/// metric entry of an interval identifies its quantized output; intervals
/// sharing a metric value feed the same output.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuantizerScheme {
    thresholds: Vec<f64>,
    metrics: Vec<f64>,
}

impl QuantizerScheme {
    pub fn new(thresholds: Vec<f64>, metrics: Vec<f64>) -> Result<Self> {
        if metrics.len() != thresholds.len() + 1 {
            return Err(QuantError::InvalidParameter(format!(
                "{} intervals need {} metric values, got {}",
                thresholds.len() + 1,
                thresholds.len() + 1,
                metrics.len()
            )));
        }
        if thresholds.iter().any(|t| !t.is_finite()) || metrics.iter().any(|m| !m.is_finite()) {
            return Err(QuantError::InvalidParameter(
                "thresholds and metrics must be finite".into(),
            ));
        }
        for w in thresholds.windows(2) {
            if !(w[0] < w[1]) {
                return Err(QuantError::InvalidParameter(format!(
                    "thresholds must be strictly increasing ({} !< {})",
                    w[0], w[1]
                )));
            }
        }
        Ok(Self { thresholds, metrics })
    }

    /// Scheme with metric values equal to centered interval indices
    /// (i - (N-1)/2), which keeps the metric list antisymmetric for
    /// symmetric threshold lists.
    pub fn with_index_metrics(thresholds: Vec<f64>) -> Result<Self> {
        let n = thresholds.len() + 1;
        let metrics = (0..n).map(|i| i as f64 - (n as f64 - 1.0) / 2.0).collect();
        Self::new(thresholds, metrics)
    }

    /// Symmetric scheme from the strictly positive threshold half.
    ///
    /// `include_zero` inserts a threshold at 0 (even interval counts).
    /// Metrics are centered interval indices.
    pub fn symmetric_from_positive(positive: &[f64], include_zero: bool) -> Result<Self> {
        if positive.iter().any(|&b| !(b > 0.0)) {
            return Err(QuantError::InvalidParameter(
                "positive threshold half must be strictly positive".into(),
            ));
        }
        let mut thresholds: Vec<f64> = positive.iter().rev().map(|&b| -b).collect();
        if include_zero {
            thresholds.push(0.0);
        }
        thresholds.extend_from_slice(positive);
        Self::with_index_metrics(thresholds)
    }

    pub fn thresholds(&self) -> &[f64] {
        &self.thresholds
    }

    pub fn metrics(&self) -> &[f64] {
        &self.metrics
    }

    /// Number of intervals (= thresholds + 1).
    pub fn n_intervals(&self) -> usize {
        self.metrics.len()
    }

    /// Strictly positive thresholds, in increasing order.
    pub fn positive_thresholds(&self) -> Vec<f64> {
        self.thresholds.iter().cloned().filter(|&t| t > 0.0).collect()
    }

    /// True when the threshold list equals its own negated reversal.
    pub fn is_symmetric(&self, tol: f64) -> bool {
        self.thresholds
            .iter()
            .zip(self.thresholds.iter().rev())
            .all(|(&a, &b)| (a + b).abs() <= tol)
    }

    /// Index of the interval containing y.
    pub fn interval_of(&self, y: f64) -> usize {
        self.thresholds.partition_point(|&t| t <= y)
    }

    /// Metric value of the interval containing y.
    pub fn metric_of(&self, y: f64) -> f64 {
        self.metrics[self.interval_of(y)]
    }
}

/// Transition matrix P(Z | X) with the input prior; rows are inputs.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteChannel {
    transition: Vec<Vec<f64>>,
    prior: Vec<f64>,
}

impl DiscreteChannel {
    pub fn new(transition: Vec<Vec<f64>>, prior: Vec<f64>) -> Result<Self> {
        if transition.is_empty() || transition.len() != prior.len() {
            return Err(QuantError::InvalidParameter(
                "need one transition row per prior entry".into(),
            ));
        }
        let cols = transition[0].len();
        if cols == 0 {
            return Err(QuantError::InvalidParameter("need at least one output".into()));
        }
        for row in &transition {
            if row.len() != cols {
                return Err(QuantError::InvalidParameter("ragged transition matrix".into()));
            }
            if row.iter().any(|&p| !(p >= 0.0)) {
                return Err(QuantError::InvalidParameter(
                    "transition entries must be non-negative".into(),
                ));
            }
            let s: f64 = row.iter().sum();
            if (s - 1.0).abs() > 1e-10 {
                return Err(QuantError::InvalidParameter(format!("row sums to {s}, not 1")));
            }
        }
        Ok(Self { transition, prior })
    }

    pub fn transition(&self) -> &[Vec<f64>] {
        &self.transition
    }

    pub fn prior(&self) -> &[f64] {
        &self.prior
    }

    pub fn n_inputs(&self) -> usize {
        self.transition.len()
    }

    pub fn n_outputs(&self) -> usize {
        self.transition[0].len()
    }

    /// Marginal output distribution P(Z).
    pub fn output_distribution(&self) -> Vec<f64> {
        let mut pz = vec![0.0; self.n_outputs()];
        for (row, &px) in self.transition.iter().zip(&self.prior) {
            for (z, &p) in row.iter().enumerate() {
                pz[z] += px * p;
            }
        }
        pz
    }
}

/// Density of Y at y given input x: the unit Gaussian shifted by g x.
pub fn transition_density(ch: &GaussianChannel, x: f64, y: f64) -> f64 {
    normal_pdf(y - ch.gain() * x)
}

/// P(interval | x) for one input and one interval [lo, hi].
///
/// Branches on which side of the mean the interval lies so the mass is a
/// difference of same-tail Q values or a complement of two small tails.
/// The naive Q(lo-m) - Q(hi-m) cancels catastrophically for intervals far
/// below the mean, which matters at large gains.
fn interval_mass(g: f64, x: f64, lo: Option<f64>, hi: Option<f64>) -> f64 {
    let m = g * x;
    let a = lo.map(|b| b - m);
    let b = hi.map(|b| b - m);
    let mass = match (a, b) {
        (None, None) => 1.0,
        (Some(a), None) => q_function(a),
        (None, Some(b)) => {
            if b <= 0.0 {
                q_function(-b)
            } else {
                1.0 - q_function(b)
            }
        }
        (Some(a), Some(b)) => {
            if a >= 0.0 {
                q_function(a) - q_function(b)
            } else if b <= 0.0 {
                q_function(-b) - q_function(-a)
            } else {
                1.0 - q_function(-a) - q_function(b)
            }
        }
    };
    mass.max(0.0)
}

/// The discrete channel P(Z | X) induced by quantizing Y with the scheme.
///
/// Intervals that share a metric value are merged into a single output
/// column (first-occurrence order).
pub fn induce_discrete(
    ch: &GaussianChannel,
    cons: &PamConstellation,
    scheme: &QuantizerScheme,
) -> DiscreteChannel {
    let n_int = scheme.n_intervals();
    let metrics = scheme.metrics();
    // Map each interval to an output column, merging equal metric values.
    let mut column_metric: Vec<f64> = Vec::new();
    let mut col_of = Vec::with_capacity(n_int);
    for &m in metrics {
        match column_metric.iter().position(|&c| c == m) {
            Some(j) => col_of.push(j),
            None => {
                col_of.push(column_metric.len());
                column_metric.push(m);
            }
        }
    }
    let g = ch.gain();
    let t = scheme.thresholds();
    let mut transition = Vec::with_capacity(cons.order());
    for &x in cons.points() {
        let mut row = vec![0.0; column_metric.len()];
        for i in 0..n_int {
            let lo = if i == 0 { None } else { Some(t[i - 1]) };
            let hi = if i == n_int - 1 { None } else { Some(t[i]) };
            row[col_of[i]] += interval_mass(g, x, lo, hi);
        }
        let s: f64 = row.iter().sum();
        for p in &mut row {
            *p /= s;
        }
        transition.push(row);
    }
    DiscreteChannel::new(transition, cons.prior().to_vec())
        .expect("interval masses form valid rows")
}

/// I(X; Z) in nats, with 0 ln 0 = 0.
pub fn mutual_information_discrete(dc: &DiscreteChannel) -> f64 {
    let pz = dc.output_distribution();
    let mut info = 0.0;
    for (row, &px) in dc.transition().iter().zip(dc.prior()) {
        if px == 0.0 {
            continue;
        }
        for (z, &pzx) in row.iter().enumerate() {
            if pzx > 0.0 && pz[z] > 0.0 {
                info += px * pzx * (pzx / pz[z]).ln();
            }
        }
    }
    info.max(0.0)
}

/// Unquantized I(X; Y) in nats via Gaussian-weighted quadrature; the upper
/// bound for every quantized I(X; Z).
pub fn mutual_information_continuous(
    ch: &GaussianChannel,
    cons: &PamConstellation,
    rule: &QuadratureRule,
) -> f64 {
    let g = ch.gain();
    if g == 0.0 {
        return 0.0;
    }
    let points = cons.points();
    let prior = cons.prior();
    let log_prior: Vec<f64> = prior.iter().map(|&p| p.ln()).collect();
    let mut info = 0.0;
    let mut scratch = vec![0.0; points.len()];
    for (i, (&x, &px)) in points.iter().zip(prior).enumerate().map(|(i, p)| (i, p)) {
        if px == 0.0 {
            continue;
        }
        // E over W of ln f(y|x) - ln f_Y(y) at y = g x + W.
        info += px
            * rule.expect_gaussian(|w| {
                let y = g * x + w;
                for (j, &xj) in points.iter().enumerate() {
                    let dy = y - g * xj;
                    scratch[j] = log_prior[j] - 0.5 * dy * dy;
                }
                let log_fy = log_sum_exp(&scratch).expect("non-empty constellation");
                // ln f(y|x) with the common Gaussian normalizer cancelled.
                let dyi = y - g * x;
                -0.5 * dyi * dyi - log_fy
            });
        let _ = i;
    }
    info.max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{RngExt, SeedableRng};

    #[test]
    fn two_pam_is_normalized_antipodal() {
        let c = PamConstellation::two_pam();
        assert_eq!(c.points(), &[-1.0, 1.0]);
        assert_eq!(c.prior(), &[0.5, 0.5]);
        assert_eq!(c.spacing(), 2.0);
    }

    #[test]
    fn uniform_constellations_are_normalized() {
        for k in 2..=8 {
            let c = PamConstellation::uniform(k).unwrap();
            let mean: f64 = c.points().iter().zip(c.prior()).map(|(&x, &p)| p * x).sum();
            let var: f64 = c.points().iter().zip(c.prior()).map(|(&x, &p)| p * x * x).sum();
            assert!(mean.abs() < 1e-12);
            assert!((var - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn snr_round_trip() {
        let ch = GaussianChannel::from_snr_db(-7.3);
        assert!((ch.snr_db() + 7.3).abs() < 1e-12);
        assert!((ch.gain() * ch.gain() - 10f64.powf(-0.73)).abs() < 1e-14);
    }

    #[test]
    fn density_examples() {
        let peak = 1.0 / (2.0 * std::f64::consts::PI).sqrt();
        let ch0 = GaussianChannel::new(0.0).unwrap();
        assert!((transition_density(&ch0, 3.7, 0.0) - peak).abs() < 1e-15);
        let ch1 = GaussianChannel::new(1.0).unwrap();
        assert!((transition_density(&ch1, 1.0, 1.0) - peak).abs() < 1e-15);
        let ch2 = GaussianChannel::new(2.0).unwrap();
        assert!((transition_density(&ch2, -1.0, 0.0) - normal_pdf(2.0)).abs() < 1e-15);
        assert!((normal_pdf(2.0) - 0.05399).abs() < 1e-5);
    }

    #[test]
    fn density_integrates_to_one() {
        let ch = GaussianChannel::new(1.7).unwrap();
        let rule = QuadratureRule::adaptive_panel(32).unwrap();
        let v = rule.integrate(-20.0, 20.0, |y| transition_density(&ch, 0.9, y)).unwrap();
        assert!((v - 1.0).abs() < 1e-12);
    }

    #[test]
    fn scheme_validation_and_symmetry() {
        assert!(QuantizerScheme::new(vec![0.5, 0.5], vec![0.0, 1.0, 2.0]).is_err());
        let s = QuantizerScheme::symmetric_from_positive(&[0.4, 1.1], false).unwrap();
        assert_eq!(s.thresholds(), &[-1.1, -0.4, 0.4, 1.1]);
        assert!(s.is_symmetric(0.0));
        assert_eq!(s.n_intervals(), 5);
        assert_eq!(s.positive_thresholds(), vec![0.4, 1.1]);
        let e = QuantizerScheme::symmetric_from_positive(&[0.9], true).unwrap();
        assert_eq!(e.thresholds(), &[-0.9, 0.0, 0.9]);
    }

    #[test]
    fn scheme_json_round_trip() {
        let s = QuantizerScheme::new(vec![-0.5, 0.5], vec![-1.0, 0.0, 1.0]).unwrap();
        let j = serde_json::to_string(&s).unwrap();
        assert!(j.contains("\"thresholds\""));
        assert!(j.contains("\"metrics\""));
        let back: QuantizerScheme = serde_json::from_str(&j).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn interval_lookup() {
        let s = QuantizerScheme::with_index_metrics(vec![-1.0, 1.0]).unwrap();
        assert_eq!(s.interval_of(-2.0), 0);
        assert_eq!(s.interval_of(0.0), 1);
        assert_eq!(s.interval_of(1.0), 2); // boundary goes to the upper cell
        assert_eq!(s.interval_of(5.0), 2);
    }

    #[test]
    fn zero_gain_rows_are_input_independent() {
        let ch = GaussianChannel::new(0.0).unwrap();
        let cons = PamConstellation::uniform(4).unwrap();
        let s = QuantizerScheme::with_index_metrics(vec![-0.7, 0.2, 1.5]).unwrap();
        let dc = induce_discrete(&ch, &cons, &s);
        for row in dc.transition() {
            for (a, b) in row.iter().zip(dc.transition()[0].iter()) {
                assert!((a - b).abs() < 1e-15);
            }
        }
        // Interval masses of the standard Gaussian.
        assert!((dc.transition()[0][0] - (1.0 - q_function(-0.7))).abs() < 1e-14);
    }

    #[test]
    fn two_pam_single_threshold_matches_q() {
        let ch = GaussianChannel::new(1.0).unwrap();
        let cons = PamConstellation::two_pam();
        let s = QuantizerScheme::with_index_metrics(vec![0.0]).unwrap();
        let dc = induce_discrete(&ch, &cons, &s);
        // P(z = upper | x = +1) = 1 - Q(1).
        assert!((dc.transition()[1][1] - (1.0 - q_function(1.0))).abs() < 1e-14);
        assert!((dc.transition()[1][1] - 0.8413).abs() < 1e-4);
    }

    #[test]
    fn degenerate_single_output_has_zero_information() {
        let ch = GaussianChannel::new(1.0).unwrap();
        let cons = PamConstellation::two_pam();
        let s = QuantizerScheme::new(vec![], vec![0.0]).unwrap();
        let dc = induce_discrete(&ch, &cons, &s);
        assert_eq!(dc.n_outputs(), 1);
        assert!((dc.transition()[0][0] - 1.0).abs() < 1e-15);
        assert_eq!(mutual_information_discrete(&dc), 0.0);
    }

    #[test]
    fn identical_rows_give_zero_information() {
        let dc = DiscreteChannel::new(
            vec![vec![0.3, 0.7], vec![0.3, 0.7]],
            vec![0.5, 0.5],
        )
        .unwrap();
        assert_eq!(mutual_information_discrete(&dc), 0.0);
    }

    #[test]
    fn noiseless_binary_channel_reaches_ln_2() {
        let dc = DiscreteChannel::new(
            vec![vec![1.0, 0.0], vec![0.0, 1.0]],
            vec![0.5, 0.5],
        )
        .unwrap();
        assert!((mutual_information_discrete(&dc) - 2.0f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn binary_symmetric_channel_closed_form() {
        // 2-PAM, g = 1, threshold 0: a BSC with crossover Q(1).
        let ch = GaussianChannel::new(1.0).unwrap();
        let cons = PamConstellation::two_pam();
        let s = QuantizerScheme::with_index_metrics(vec![0.0]).unwrap();
        let dc = induce_discrete(&ch, &cons, &s);
        let p = q_function(1.0);
        let hb = -p * p.ln() - (1.0 - p) * (1.0 - p).ln();
        let want = 2.0f64.ln() - hb;
        assert!((mutual_information_discrete(&dc) - want).abs() < 1e-12);
    }

    #[test]
    fn continuous_information_zero_gain() {
        let rule = QuadratureRule::gauss_hermite(64).unwrap();
        let ch = GaussianChannel::new(0.0).unwrap();
        let cons = PamConstellation::two_pam();
        assert_eq!(mutual_information_continuous(&ch, &cons, &rule), 0.0);
    }

    #[test]
    fn continuous_information_saturates_at_ln2() {
        let rule = QuadratureRule::gauss_hermite(96).unwrap();
        let cons = PamConstellation::two_pam();
        let ch = GaussianChannel::new(8.0).unwrap();
        let i = mutual_information_continuous(&ch, &cons, &rule);
        assert!((i - 2.0f64.ln()).abs() < 1e-9, "i = {i}");
        let ch2 = GaussianChannel::new(20.0).unwrap();
        let i2 = mutual_information_continuous(&ch2, &cons, &rule);
        assert!(i2 <= 2.0f64.ln() + 1e-12 && i2 > i - 1e-12);
    }

    #[test]
    fn continuous_information_matches_monte_carlo() {
        // 2-PAM, g = 1: compare against a 10^7-sample Monte-Carlo estimate
        // of E[ln f(Y|X) - ln f_Y(Y)] within 3 standard errors.
        let rule = QuadratureRule::gauss_hermite(129).unwrap();
        let cons = PamConstellation::two_pam();
        let ch = GaussianChannel::new(1.0).unwrap();
        let exact = mutual_information_continuous(&ch, &cons, &rule);

        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(7);
        let n = 10_000_000usize;
        let (mut sum, mut sum2) = (0.0f64, 0.0f64);
        for _ in 0..n {
            let x: f64 = if rng.random::<bool>() { 1.0 } else { -1.0 };
            let w: f64 = rng.sample::<f64, _>(rand_distr::StandardNormal);
            let y = x + w;
            let la = -0.5 * (y - x) * (y - x);
            let l0 = -0.5 * (y + 1.0) * (y + 1.0);
            let l1 = -0.5 * (y - 1.0) * (y - 1.0);
            let v = la - (log_sum_exp(&[l0 - 2f64.ln(), l1 - 2f64.ln()]).unwrap());
            sum += v;
            sum2 += v * v;
        }
        let mean = sum / n as f64;
        let se = ((sum2 / n as f64 - mean * mean) / n as f64).sqrt();
        assert!(
            (exact - mean).abs() < 3.0 * se,
            "exact = {exact}, mc = {mean} +- {se}"
        );
    }

    #[test]
    fn data_processing_holds_on_random_schemes() {
        let rule = QuadratureRule::gauss_hermite(96).unwrap();
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(11);
        for _ in 0..50 {
            let g: f64 = rng.random_range(0.05..3.0);
            let k = *[2usize, 3, 4].iter().nth(rng.random_range(0..3)).unwrap();
            let cons = PamConstellation::uniform(k).unwrap();
            let ch = GaussianChannel::new(g).unwrap();
            let mut t: Vec<f64> = (0..rng.random_range(1..6))
                .map(|_| rng.random_range(-3.0..3.0))
                .collect();
            t.sort_by(f64::total_cmp);
            t.dedup_by(|a, b| (*a - *b).abs() < 1e-6);
            let s = QuantizerScheme::with_index_metrics(t).unwrap();
            let quantized = mutual_information_discrete(&induce_discrete(&ch, &cons, &s));
            let full = mutual_information_continuous(&ch, &cons, &rule);
            assert!(quantized <= full + 1e-9, "g = {g}, k = {k}: {quantized} > {full}");
        }
    }

    #[test]
    fn refinement_never_reduces_information() {
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(13);
        for _ in 0..50 {
            let g: f64 = rng.random_range(0.1..2.5);
            let ch = GaussianChannel::new(g).unwrap();
            let cons = PamConstellation::two_pam();
            let mut t: Vec<f64> =
                (0..rng.random_range(1..5)).map(|_| rng.random_range(-2.5..2.5)).collect();
            t.sort_by(f64::total_cmp);
            t.dedup_by(|a, b| (*a - *b).abs() < 1e-6);
            let before = mutual_information_discrete(&induce_discrete(
                &ch,
                &cons,
                &QuantizerScheme::with_index_metrics(t.clone()).unwrap(),
            ));
            let mut extra = rng.random_range(-3.0..3.0);
            while t.iter().any(|&x| (x - extra).abs() < 1e-9) {
                extra += 0.1;
            }
            t.push(extra);
            t.sort_by(f64::total_cmp);
            let after = mutual_information_discrete(&induce_discrete(
                &ch,
                &cons,
                &QuantizerScheme::with_index_metrics(t).unwrap(),
            ));
            assert!(after >= before - 1e-12, "{after} < {before}");
        }
    }

    #[test]
    fn symmetric_scheme_mirror_invariance() {
        let ch = GaussianChannel::new(0.8).unwrap();
        let cons = PamConstellation::two_pam();
        let s = QuantizerScheme::symmetric_from_positive(&[0.3, 1.2], true).unwrap();
        let dc = induce_discrete(&ch, &cons, &s);
        let n = dc.n_outputs();
        for z in 0..n {
            let a = dc.transition()[1][z];
            let b = dc.transition()[0][n - 1 - z];
            assert!((a - b).abs() < 1e-15, "P(z|+1) != P(-z|-1) at z = {z}");
        }
    }
}
