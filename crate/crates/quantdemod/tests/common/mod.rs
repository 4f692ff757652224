//! Property checkers shared by the randomized-property and acceptance
//! targets. Each checker validates one invariant for one concrete input
//! and reports a violation as an Err(String) so callers can attach their
//! own context.

#![allow(dead_code)]

use quantdemod::channel::{
    induce_discrete, mutual_information_discrete, GaussianChannel, PamConstellation,
    QuantizerScheme,
};
use quantdemod::matched::{quantized_fisher_ratio, reassign_step, small_snr_scheme};
use quantdemod::mismatched::{
    gmi_symmetric, shifted_tail_second_moment, thresholds_from_alpha, MetricAssignment,
};
use quantdemod::numerics::{normal_pdf, q_function, QuadratureRule};

/// Mutual information is non-decreasing along the alternating
/// posterior/repartition iteration, from any valid starting partition.
/// A cell collapse ends the trajectory early; the prefix must still be
/// monotone.
pub fn check_monotone_ascent(g: f64, init_thresholds: &[f64], steps: usize) -> Result<(), String> {
    let ch = GaussianChannel::new(g).map_err(|e| e.to_string())?;
    let cons = PamConstellation::two_pam();
    let metrics = (0..init_thresholds.len() + 1).map(|i| i as f64).collect();
    let mut scheme =
        QuantizerScheme::new(init_thresholds.to_vec(), metrics).map_err(|e| e.to_string())?;
    let mut last = mutual_information_discrete(&induce_discrete(&ch, &cons, &scheme));
    for step in 0..steps {
        scheme = match reassign_step(&ch, &cons, &scheme) {
            Ok(s) => s,
            Err(_) => return Ok(()),
        };
        let next = mutual_information_discrete(&induce_discrete(&ch, &cons, &scheme));
        if next < last - 1e-12 {
            return Err(format!(
                "information dropped from {last:.15} to {next:.15} at step {step} (g={g}, init={init_thresholds:?})"
            ));
        }
        last = next;
    }
    Ok(())
}

/// GMI never exceeds the mutual information of the same discrete channel,
/// for any quantizer, any metric assignment, and any scale. The thresholds
/// are independent of the metrics, so the bound is exercised away from the
/// jointly optimized family.
pub fn check_gmi_le_mi(
    g: f64,
    positive_thresholds: &[f64],
    metric_values: &[f64],
    alpha: f64,
) -> Result<(), String> {
    let ma = MetricAssignment::new(metric_values.to_vec()).map_err(|e| e.to_string())?;
    let scheme = QuantizerScheme::symmetric_from_positive(positive_thresholds, false)
        .map_err(|e| e.to_string())?;
    let ch = GaussianChannel::new(g).map_err(|e| e.to_string())?;
    let dc = induce_discrete(&ch, &PamConstellation::two_pam(), &scheme);
    let gmi = gmi_symmetric(&dc, &ma.full(), alpha).map_err(|e| e.to_string())?;
    let mi = mutual_information_discrete(&dc);
    if gmi > mi + 1e-12 {
        return Err(format!(
            "gmi {gmi:.15} exceeds mutual information {mi:.15} (g={g}, q={metric_values:?}, alpha={alpha})"
        ));
    }
    Ok(())
}

/// Scaling all metrics by c while dividing alpha by c changes neither the
/// induced thresholds nor the GMI.
pub fn check_scale_invariance(
    g: f64,
    metric_values: &[f64],
    alpha: f64,
    c: f64,
) -> Result<(), String> {
    let ma = MetricAssignment::new(metric_values.to_vec()).map_err(|e| e.to_string())?;
    let scaled_values: Vec<f64> = metric_values.iter().map(|q| q * c).collect();
    let ma_scaled = MetricAssignment::new(scaled_values).map_err(|e| e.to_string())?;
    let s1 = thresholds_from_alpha(&ma, alpha, g).map_err(|e| e.to_string())?;
    let s2 = thresholds_from_alpha(&ma_scaled, alpha / c, g).map_err(|e| e.to_string())?;
    for (a, b) in s1.thresholds().iter().zip(s2.thresholds()) {
        if (a - b).abs() > 1e-9 * (1.0 + a.abs()) {
            return Err(format!("thresholds moved under metric rescaling: {a} vs {b}"));
        }
    }
    let ch = GaussianChannel::new(g).map_err(|e| e.to_string())?;
    let cons = PamConstellation::two_pam();
    let g1 = gmi_symmetric(&induce_discrete(&ch, &cons, &s1), &ma.full(), alpha)
        .map_err(|e| e.to_string())?;
    let g2 = gmi_symmetric(&induce_discrete(&ch, &cons, &s2), &ma_scaled.full(), alpha / c)
        .map_err(|e| e.to_string())?;
    if (g1 - g2).abs() > 1e-11 {
        return Err(format!("gmi moved under metric rescaling: {g1:.15} vs {g2:.15}"));
    }
    Ok(())
}

/// The vanishing-SNR thresholds satisfy the Lloyd stationarity conditions
/// on a unit Gaussian: every threshold lies midway between the conditional
/// means of its two cells, and no small perturbation retains more Fisher
/// information.
pub fn check_lloyd_stationarity(n: usize, perturbation: &[f64]) -> Result<(), String> {
    let scheme = small_snr_scheme(n).map_err(|e| e.to_string())?;
    let t = scheme.thresholds();
    let cell_mean = |lo: Option<f64>, hi: Option<f64>| -> f64 {
        let (phi_lo, q_lo) = match lo {
            Some(b) => (normal_pdf(b), q_function(b)),
            None => (0.0, 1.0),
        };
        let (phi_hi, q_hi) = match hi {
            Some(b) => (normal_pdf(b), q_function(b)),
            None => (0.0, 0.0),
        };
        (phi_lo - phi_hi) / (q_lo - q_hi)
    };
    for i in 0..t.len() {
        let lo = if i == 0 { None } else { Some(t[i - 1]) };
        let hi = if i + 1 < t.len() { Some(t[i + 1]) } else { None };
        let m_below = cell_mean(lo, Some(t[i]));
        let m_above = cell_mean(Some(t[i]), hi);
        let midpoint = 0.5 * (m_below + m_above);
        if (t[i] - midpoint).abs() > 1e-7 {
            return Err(format!(
                "threshold {} = {} is not the midpoint {} of its cell means (n={n})",
                i, t[i], midpoint
            ));
        }
    }
    // Stationarity is a maximum: perturbing the thresholds cannot retain
    // more of the small-SNR information functional.
    let base = quantized_fisher_ratio(&scheme);
    let mut moved: Vec<f64> = t.to_vec();
    for (x, d) in moved.iter_mut().zip(perturbation) {
        *x += d;
    }
    moved.sort_by(f64::total_cmp);
    moved.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
    if moved.len() == t.len() {
        let perturbed = QuantizerScheme::with_index_metrics(moved).map_err(|e| e.to_string())?;
        let ratio = quantized_fisher_ratio(&perturbed);
        if ratio > base + 1e-12 {
            return Err(format!(
                "perturbed thresholds retain more information ({ratio:.15} > {base:.15}, n={n})"
            ));
        }
    }
    Ok(())
}

/// An n-node Gauss-Hermite rule integrates polynomials of degree <= 2n-1
/// exactly against the unit Gaussian. Exact moments are E[Y^k] = (k-1)!!
/// for even k and 0 for odd k.
pub fn check_quadrature_moments(nodes: usize, coeffs: &[f64]) -> Result<(), String> {
    if coeffs.len() > 2 * nodes {
        return Err(format!(
            "degree {} exceeds the exactness bound for {nodes} nodes",
            coeffs.len() - 1
        ));
    }
    let rule = QuadratureRule::gauss_hermite(nodes).map_err(|e| e.to_string())?;
    let numeric = rule.expect_gaussian(|y| {
        // Horner evaluation of sum coeffs[k] y^k.
        coeffs.iter().rev().fold(0.0, |acc, &c| acc * y + c)
    });
    let mut exact = 0.0;
    let mut double_factorial = 1.0;
    for (k, &c) in coeffs.iter().enumerate() {
        if k % 2 == 0 {
            if k > 0 {
                double_factorial *= (k - 1) as f64;
            }
            exact += c * double_factorial;
        }
    }
    let scale: f64 = coeffs.iter().map(|c| c.abs()).sum::<f64>() * double_factorial.max(1.0);
    if (numeric - exact).abs() > 1e-9 * scale.max(1.0) {
        return Err(format!(
            "quadrature={numeric:.15} vs exact={exact:.15} for degree {} at {nodes} nodes",
            coeffs.len() - 1
        ));
    }
    Ok(())
}

/// Two-sided bound on the shifted tail second moment
/// T(x) = int_0^inf y^2 exp(-(x+y)^2/2) dy for x > 0:
/// the upper bound is 2 exp(-x^2/2)/x^3, and the lower bound replaces x
/// with x + 1/2 in the decay rate over the unit interval.
pub fn check_tail_moment_bounds(x: f64) -> Result<(), String> {
    if !(x > 0.0) {
        return Err(format!("bound requires x > 0, got {x}"));
    }
    let t = shifted_tail_second_moment(x);
    let e = (-x * x / 2.0).exp();
    let upper = 2.0 * e / (x * x * x);
    let s = x + 0.5;
    let lower = (2.0 - (-s).exp() * (x * x + 3.0 * x + 3.25)) / (s * s * s) * e;
    if t > upper * (1.0 + 1e-12) {
        return Err(format!("T({x}) = {t:.15e} exceeds upper bound {upper:.15e}"));
    }
    if t < lower * (1.0 - 1e-12) - 1e-300 {
        return Err(format!("T({x}) = {t:.15e} below lower bound {lower:.15e}"));
    }
    Ok(())
}
