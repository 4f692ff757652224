//! Quantizer design for mismatched decoding: generalized mutual information
//! (GMI) of symmetric binary-input channels under fixed output metrics,
//! thresholds parameterized by the metric scale alpha, the 1-D peak search,
//! small- and large-SNR closed forms, and the high-rate loss estimate.

use crate::channel::{
    induce_discrete, mutual_information_continuous, DiscreteChannel, GaussianChannel,
    PamConstellation, QuantizerScheme,
};
use crate::error::{QuantError, Result};
use crate::numerics::{
    maximize_scalar, normal_pdf, q_function, sigmoid, softplus, QuadratureRule,
};

/// The positive half q(1) < q(2) < ... < q(K) of an antisymmetric metric
/// assignment; q(0) = 0 and q(-i) = -q(i) are implicit, giving N = 2K + 1
/// quantizer outputs.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricAssignment {
    values: Vec<f64>,
}

impl MetricAssignment {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(QuantError::InvalidParameter("need at least one metric".into()));
        }
        if values.iter().any(|v| !v.is_finite() || *v <= 0.0) {
            return Err(QuantError::InvalidParameter(
                "metrics must be finite and strictly positive".into(),
            ));
        }
        for w in values.windows(2) {
            if !(w[0] < w[1]) {
                return Err(QuantError::InvalidParameter(format!(
                    "metrics must be strictly increasing ({} !< {})",
                    w[0], w[1]
                )));
            }
        }
        Ok(Self { values })
    }

    /// The integer metrics 1, 2, ..., k.
    pub fn integer(k: usize) -> Result<Self> {
        if k == 0 {
            return Err(QuantError::InvalidParameter("need at least one metric".into()));
        }
        Self::new((1..=k).map(|i| i as f64).collect())
    }

    /// Positive metric values q(1)..q(K).
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn k(&self) -> usize {
        self.values.len()
    }

    /// Largest metric q(K).
    pub fn largest(&self) -> f64 {
        *self.values.last().expect("non-empty by construction")
    }

    /// Full antisymmetric alphabet -q(K)..-q(1), 0, q(1)..q(K).
    pub fn full(&self) -> Vec<f64> {
        let mut out: Vec<f64> = self.values.iter().rev().map(|&q| -q).collect();
        out.push(0.0);
        out.extend_from_slice(&self.values);
        out
    }
}

/// Result of maximizing GMI over the metric scale.
#[derive(Clone, Debug)]
pub struct MismatchedOptResult {
    pub alpha: f64,
    pub scheme: QuantizerScheme,
    pub gmi_nats: f64,
    /// 1 - GMI / I(X;Y), in [0, 1].
    pub relative_loss: f64,
}

/// Vanishing-SNR quantizer for a fixed metric assignment: thresholds per
/// unit noise sigma (scale by sigma at finite SNR) and the limiting ratio
/// alpha / g.
#[derive(Clone, Debug)]
pub struct SmallSnrMismatched {
    pub thresholds: Vec<f64>,
    pub alpha_over_gain: f64,
}

fn validate_symmetric(dc: &DiscreteChannel, metrics_full: &[f64]) -> Result<()> {
    if dc.n_inputs() != 2 {
        return Err(QuantError::InvalidParameter(format!(
            "GMI form needs binary input, got {} inputs",
            dc.n_inputs()
        )));
    }
    if metrics_full.len() != dc.n_outputs() {
        return Err(QuantError::InvalidParameter(format!(
            "{} metric values for {} outputs",
            metrics_full.len(),
            dc.n_outputs()
        )));
    }
    let n = metrics_full.len();
    for (j, &q) in metrics_full.iter().enumerate() {
        if (q + metrics_full[n - 1 - j]).abs() > 1e-9 {
            return Err(QuantError::InvalidParameter(
                "metric list must be antisymmetric under output reversal".into(),
            ));
        }
    }
    let t = dc.transition();
    for j in 0..n {
        if (t[0][j] - t[1][n - 1 - j]).abs() > 1e-9 {
            return Err(QuantError::InvalidParameter(
                "transition rows must mirror each other (symmetric channel)".into(),
            ));
        }
    }
    Ok(())
}

/// Gap to one bit, sum_z P(z | x=+1) softplus(-alpha q(z)), so that
/// GMI = ln 2 - gap. The gap is a sum of positive terms and keeps full
/// relative precision even when the GMI itself rounds to ln 2, which is
/// why the peak searches compare gaps rather than GMI values.
pub fn gmi_deficit_symmetric(
    dc: &DiscreteChannel,
    metrics_full: &[f64],
    alpha: f64,
) -> Result<f64> {
    validate_symmetric(dc, metrics_full)?;
    if !(alpha >= 0.0) {
        return Err(QuantError::InvalidParameter(format!(
            "metric scale {alpha} must be non-negative"
        )));
    }
    let row = &dc.transition()[1];
    let mut d = 0.0;
    for (j, &q) in metrics_full.iter().enumerate() {
        if row[j] > 0.0 {
            d += row[j] * softplus(-alpha * q);
        }
    }
    Ok(d)
}

/// GMI in nats of a symmetric binary-input channel decoded with the scaled
/// metrics alpha * q: ln 2 - sum_z P(z | x=+1) softplus(-alpha q(z)).
/// Concave in alpha and exactly 0 at alpha = 0.
pub fn gmi_symmetric(dc: &DiscreteChannel, metrics_full: &[f64], alpha: f64) -> Result<f64> {
    if alpha == 0.0 {
        validate_symmetric(dc, metrics_full)?;
        return Ok(0.0);
    }
    Ok(std::f64::consts::LN_2 - gmi_deficit_symmetric(dc, metrics_full, alpha)?)
}

/// d GMI / d alpha: sum_z P(z | x=+1) q(z) sigmoid(-alpha q(z)). For
/// thresholds re-derived optimally per alpha this partial derivative equals
/// the total derivative (envelope theorem).
pub fn dgmi_dalpha(dc: &DiscreteChannel, metrics_full: &[f64], alpha: f64) -> Result<f64> {
    validate_symmetric(dc, metrics_full)?;
    if !(alpha >= 0.0) {
        return Err(QuantError::InvalidParameter(format!(
            "metric scale {alpha} must be non-negative"
        )));
    }
    let row = &dc.transition()[1];
    Ok(metrics_full
        .iter()
        .zip(row)
        .map(|(&q, &p)| p * q * sigmoid(-alpha * q))
        .sum())
}

/// ln(u / v) for the threshold formula, where for a2 > a1 >= 0
/// u = softplus(a2) - softplus(a1) and v = ln1p(e^-a1) - ln1p(e^-a2).
///
/// Both differences collapse numerically when a2 - a1 is tiny, so below a
/// switchover the central expansion m - (d^2/24) tanh(m/2) around the
/// midpoint m is used instead (the two branches agree to ~1e-12 there).
fn log_ratio_gbd(a1: f64, a2: f64) -> f64 {
    let delta = a2 - a1;
    let mid = 0.5 * (a1 + a2);
    if delta < 1e-6 {
        return mid - delta * delta / 24.0 * (0.5 * mid).tanh();
    }
    // v > 0 with no cancellation: ln1p is evaluated at well-separated
    // points, but for a1 beyond e^-a1's precision range factor explicitly.
    let ln_v = if a1 > 30.0 {
        -a1 + (-(-delta).exp()).ln_1p()
    } else {
        let v = (-a1).exp().ln_1p() - (-a2).exp().ln_1p();
        v.ln()
    };
    // u = delta - v and v <= delta / 2, so this subtraction is benign.
    let v = ln_v.exp();
    let u = delta - v;
    u.ln() - ln_v
}

/// Optimal quantizer thresholds for decoding with metrics scaled by alpha
/// at gain g: b_i = ln(u_i / v_i) / 2g between metric levels q(i) and
/// q(i+1), mirrored to the negative axis, with the full antisymmetric
/// metric list attached. Requires alpha > 0 (at alpha = 0 all boundaries
/// coincide) and g > 0.
pub fn thresholds_from_alpha(
    metrics: &MetricAssignment,
    alpha: f64,
    g: f64,
) -> Result<QuantizerScheme> {
    if !(g > 0.0) {
        return Err(QuantError::InvalidParameter(format!("gain {g} must be positive")));
    }
    if alpha == 0.0 {
        return Err(QuantError::DegenerateAlpha);
    }
    if !(alpha > 0.0) {
        return Err(QuantError::InvalidParameter(format!(
            "metric scale {alpha} must be positive"
        )));
    }
    let k = metrics.k();
    let mut positive = Vec::with_capacity(k);
    for i in 0..k {
        let a1 = if i == 0 { 0.0 } else { alpha * metrics.values()[i - 1] };
        let a2 = alpha * metrics.values()[i];
        positive.push(log_ratio_gbd(a1, a2) / (2.0 * g));
    }
    let mut thresholds: Vec<f64> = positive.iter().rev().map(|&b| -b).collect();
    thresholds.extend_from_slice(&positive);
    QuantizerScheme::new(thresholds, metrics.full())
}

/// GMI achieved at gain g when the quantizer is re-derived for the given
/// alpha; the objective of the 1-D peak search.
pub fn gmi_of_alpha(
    ch: &GaussianChannel,
    cons: &PamConstellation,
    metrics: &MetricAssignment,
    alpha: f64,
) -> Result<f64> {
    let scheme = thresholds_from_alpha(metrics, alpha, ch.gain())?;
    let dc = induce_discrete(ch, cons, &scheme);
    gmi_symmetric(&dc, &metrics.full(), alpha)
}

/// Gap to one bit at gain g when the quantizer is re-derived for the given
/// alpha. Negated, this is the peak-search objective: it stays resolvable
/// at large gains where the GMI itself is flat at ln 2 in f64.
fn deficit_of_alpha(
    ch: &GaussianChannel,
    cons: &PamConstellation,
    metrics: &MetricAssignment,
    alpha: f64,
) -> Result<f64> {
    let scheme = thresholds_from_alpha(metrics, alpha, ch.gain())?;
    let dc = induce_discrete(ch, cons, &scheme);
    gmi_deficit_symmetric(&dc, &metrics.full(), alpha)
}

/// Grid-bracket-then-golden-section maximization over alpha > 0, seeded by
/// the two asymptotic scales so the bracket straddles the peak across the
/// SNR range. Expands the grid toward a boundary peak a few times before
/// giving up.
fn peak_alpha<F>(mut f: F, seed_a: f64, seed_b: f64) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut lo = 0.2 * seed_a.min(seed_b);
    let mut hi = 5.0 * seed_a.max(seed_b);
    let points = 64usize;
    for _ in 0..=6 {
        let (log_lo, log_hi) = (lo.ln(), hi.ln());
        let mut best = (0usize, f64::NEG_INFINITY);
        let grid: Vec<f64> = (0..points)
            .map(|i| (log_lo + (log_hi - log_lo) * i as f64 / (points - 1) as f64).exp())
            .collect();
        for (i, &a) in grid.iter().enumerate() {
            let v = f(a)?;
            if v > best.1 {
                best = (i, v);
            }
        }
        if best.0 == 0 {
            hi = grid[1];
            lo /= 5.0;
            continue;
        }
        if best.0 == points - 1 {
            lo = grid[points - 2];
            hi *= 5.0;
            continue;
        }
        let (blo, bhi) = (grid[best.0 - 1], grid[best.0 + 1]);
        let mut captured: Option<QuantError> = None;
        let res = maximize_scalar(
            |a| match f(a) {
                Ok(v) => v,
                Err(e) => {
                    captured = Some(e);
                    f64::NAN
                }
            },
            blo,
            bhi,
            1e-11 * bhi.max(1.0),
        );
        return match captured {
            Some(e) => Err(e),
            None => res,
        };
    }
    Err(QuantError::MaximumNotBracketed { lo, hi })
}

/// Maximizes GMI over the metric scale alpha, with thresholds tied to
/// alpha, for binary antipodal inputs. The search is seeded by the
/// small-SNR ratio (alpha ~ r g) and the large-SNR closed form
/// (alpha ~ g^2 / 2 q(K)).
pub fn optimize_mismatched(
    ch: &GaussianChannel,
    cons: &PamConstellation,
    metrics: &MetricAssignment,
) -> Result<MismatchedOptResult> {
    if cons.order() != 2 {
        return Err(QuantError::InvalidParameter(
            "mismatched optimization is defined for binary antipodal inputs".into(),
        ));
    }
    let g = ch.gain();
    if !(g > 0.0) {
        return Err(QuantError::InvalidParameter(format!("gain {g} must be positive")));
    }
    let seed_small = small_snr_mismatched(metrics)?.alpha_over_gain * g;
    let seed_large = g * g / (2.0 * metrics.largest());
    let (alpha, neg_deficit) = peak_alpha(
        |a| deficit_of_alpha(ch, cons, metrics, a).map(|d| -d),
        seed_small,
        seed_large,
    )?;
    let gmi_nats = std::f64::consts::LN_2 + neg_deficit;
    let scheme = thresholds_from_alpha(metrics, alpha, g)?;
    let rule = QuadratureRule::gauss_hermite(129).expect("129 is a valid node count");
    let full = mutual_information_continuous(ch, cons, &rule);
    Ok(MismatchedOptResult {
        alpha,
        scheme,
        gmi_nats,
        relative_loss: (1.0 - gmi_nats / full).clamp(0.0, 1.0),
    })
}

/// Best GMI of a FIXED quantizer under scaled metrics: maximizes only over
/// alpha, leaving the thresholds alone. Returns (alpha, gmi).
pub fn gmi_max_alpha(dc: &DiscreteChannel, metrics_full: &[f64]) -> Result<(f64, f64)> {
    validate_symmetric(dc, metrics_full)?;
    let (alpha, neg_deficit) =
        peak_alpha(|a| gmi_deficit_symmetric(dc, metrics_full, a).map(|d| -d), 1e-2, 1e1)?;
    Ok((alpha, std::f64::consts::LN_2 + neg_deficit))
}

/// Vanishing-SNR optimal quantizer for a fixed metric assignment, solved
/// self-consistently: thresholds b_i = r (q(i) + q(i+1)) / 4 on a unit
/// Gaussian, where the ratio r = alpha/g satisfies
/// r = 2 sum q(i) (phi(b_{i-1}) - phi(b_i)) / sum q(i)^2 (Q(b_{i-1}) - Q(b_i)).
/// For integer metrics the thresholds come out uniformly spaced by r/2.
pub fn small_snr_mismatched(metrics: &MetricAssignment) -> Result<SmallSnrMismatched> {
    let q = metrics.values();
    let k = metrics.k();
    let b_of_r = |r: f64| -> Vec<f64> {
        (0..k)
            .map(|i| {
                let prev = if i == 0 { 0.0 } else { q[i - 1] };
                r * (prev + q[i]) / 4.0
            })
            .collect()
    };
    let mut r = 1.0;
    let mut b = b_of_r(r);
    let tol = 1e-10;
    let max_iter = 50_000;
    let mut movement = f64::INFINITY;
    for _ in 0..max_iter {
        let mut num = 0.0;
        let mut den = 0.0;
        for i in 0..k {
            let lo = b[i];
            let hi = if i + 1 < k { b[i + 1] } else { f64::INFINITY };
            num += q[i] * (normal_pdf(lo) - normal_pdf(hi));
            den += q[i] * q[i] * (q_function(lo) - q_function(hi));
        }
        r = 2.0 * num / den;
        let next = b_of_r(r);
        movement = next.iter().zip(&b).map(|(&a, &c)| (a - c).abs()).fold(0.0, f64::max);
        b = next;
        if movement < tol {
            return Ok(SmallSnrMismatched { thresholds: b, alpha_over_gain: r });
        }
    }
    Err(QuantError::NoConvergence { iterations: max_iter, movement })
}

/// Large-SNR closed form: alpha = g^2 / 2q(K) and b_i = g q(i) / 4q(K) for
/// i = 0..K-1 (so b_0 = 0: the zero-metric cell vanishes). Returned raw
/// rather than as a scheme because the coincident boundary at 0 is not a
/// valid strictly-increasing threshold list.
pub fn large_snr_mismatched(metrics: &MetricAssignment, g: f64) -> (f64, Vec<f64>) {
    let q_k = metrics.largest();
    let alpha = g * g / (2.0 * q_k);
    let mut thresholds = vec![0.0];
    for i in 0..metrics.k() - 1 {
        thresholds.push(g * metrics.values()[i] / (4.0 * q_k));
    }
    (alpha, thresholds)
}

/// High-rate estimate of the GMI lost by an N-level uniform integer-metric
/// quantizer: 4 A ln(N) / N^2 with A the curvature constant
/// (g^2 / 6) e^{-g^2/2} E[sech(g Y)], Y standard normal. Asymptotic in
/// sqrt(ln N); advisory at practical N.
pub fn high_rate_mismatched_loss(ch: &GaussianChannel, n: usize) -> Result<f64> {
    if n < 2 {
        return Err(QuantError::InvalidParameter("need at least 2 levels".into()));
    }
    let g = ch.gain();
    let rule = QuadratureRule::gauss_hermite(129)?;
    let sech_mean = rule.expect_gaussian(|y| 1.0 / (g * y).cosh());
    let a = g * g / 6.0 * (-0.5 * g * g).exp() * sech_mean;
    Ok(4.0 * a * (n as f64).ln() / (n * n) as f64)
}

/// Closed form of int_0^inf y^2 exp(-(x+y)^2/2) dy =
/// sqrt(2 pi) ((1+x^2) Q(x) - x phi(x)), the shifted-Gaussian tail second
/// moment appearing in the high-rate loss derivation.
pub fn shifted_tail_second_moment(x: f64) -> f64 {
    let root_2pi = (2.0 * std::f64::consts::PI).sqrt();
    root_2pi * ((1.0 + x * x) * q_function(x) - x * normal_pdf(x))
}
