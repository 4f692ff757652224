//! Quantizer design for matched decoding: the alternating threshold
//! optimizer, small- and large-SNR asymptotics, the interval-count bound,
//! and the high-rate capacity-loss estimate.

use crate::channel::{
    induce_discrete, mutual_information_continuous, mutual_information_discrete,
    GaussianChannel, PamConstellation, QuantizerScheme,
};
use crate::error::{QuantError, Result};
use crate::numerics::{
    find_root, log_sum_exp, normal_cdf, normal_pdf, q_function, QuadratureRule,
};

/// Floor for probabilities before taking logarithms; keeps far-tail cells
/// from producing -inf scores while preserving their ordering.
const LOG_CLAMP: f64 = 1e-300;

/// Outcome of the alternating threshold search.
#[derive(Clone, Debug)]
pub struct MatchedOptResult {
    pub scheme: QuantizerScheme,
    pub capacity_nats: f64,
    /// 1 - I(X;Z) / I(X;Y), in [0, 1].
    pub relative_loss: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Upper bound on the number of disjoint intervals any single quantized
/// output can occupy: (N-1) floor((K-1)/2) + 1 for K inputs and N outputs.
/// Requires K >= 2 and N >= 2.
pub fn interval_count_bound(k: usize, n: usize) -> usize {
    (n - 1) * ((k - 1) / 2) + 1
}

/// Metric values in first-occurrence order; these identify the quantizer
/// cells, matching the column order produced by `induce_discrete`.
fn distinct_metrics(scheme: &QuantizerScheme) -> Vec<f64> {
    let mut out: Vec<f64> = Vec::new();
    for &m in scheme.metrics() {
        if !out.contains(&m) {
            out.push(m);
        }
    }
    out
}

/// One alternating-optimization step: recompute the input posteriors of the
/// current cells, then repartition the output line so every y goes to the
/// cell whose posterior scores it highest. Mutual information never
/// decreases across a step.
///
/// Cells are the distinct metric values of `scheme`; the returned scheme
/// uses the same metric values on the new intervals. A cell that wins no
/// interval is reported as a collapse (its index in first-occurrence order).
pub fn reassign_step(
    ch: &GaussianChannel,
    cons: &PamConstellation,
    scheme: &QuantizerScheme,
) -> Result<QuantizerScheme> {
    let dc = induce_discrete(ch, cons, scheme);
    let cells = distinct_metrics(scheme);
    let n_cells = cells.len();
    let pz = dc.output_distribution();
    if let Some(z) = pz.iter().position(|&p| p <= 0.0) {
        return Err(QuantError::CellCollapse { output: z });
    }
    // ln P(X = x_i | Z = z), clamped away from -inf.
    let prior = cons.prior();
    let log_post: Vec<Vec<f64>> = (0..cons.order())
        .map(|i| {
            (0..n_cells)
                .map(|z| (dc.transition()[i][z] * prior[i] / pz[z]).max(LOG_CLAMP).ln())
                .collect()
        })
        .collect();

    let (thresholds, winners) = if cons.order() == 2 {
        repartition_two_pam(ch.gain(), prior, &log_post)?
    } else {
        repartition_general(ch, cons, &log_post)?
    };

    let metrics = winners.iter().map(|&z| cells[z]).collect();
    QuantizerScheme::new(thresholds, metrics)
}

/// Exact repartition for binary antipodal inputs. In the likelihood ratio
/// r = exp(2 g y) each cell's score is the line a_z + r m_z with
/// a_z = P(x=-1) ln P(-1|z) and m_z = P(x=+1) ln P(+1|z), so the optimal
/// partition is the upper envelope of N lines and each threshold is a
/// breakpoint mapped back through y = ln(r) / (2g).
fn repartition_two_pam(
    g: f64,
    prior: &[f64],
    log_post: &[Vec<f64>],
) -> Result<(Vec<f64>, Vec<usize>)> {
    let n_cells = log_post[0].len();
    let mut lines: Vec<(usize, f64, f64)> = (0..n_cells)
        .map(|z| (z, prior[0] * log_post[0][z], prior[1] * log_post[1][z]))
        .collect();
    // Increasing slope; among parallel lines only the highest intercept can
    // win, so the others collapse.
    lines.sort_by(|a, b| a.2.total_cmp(&b.2).then(a.1.total_cmp(&b.1)));
    for w in lines.windows(2) {
        if w[0].2 == w[1].2 {
            return Err(QuantError::CellCollapse { output: w[0].0 });
        }
    }

    let mut hull: Vec<(usize, f64, f64)> = Vec::new();
    let mut breaks: Vec<f64> = Vec::new();
    for line in lines {
        if let Some(&top) = hull.last() {
            let r = (top.1 - line.1) / (line.2 - top.2);
            // A breakpoint at or before the previous one (or outside the
            // domain r > 0 for the first line) means the line below it
            // wins no interval; every cell must keep one, so that is a
            // collapse rather than an ordinary envelope pop.
            let dominated = match breaks.last() {
                Some(&prev) => r <= prev,
                None => r <= 0.0,
            };
            if dominated {
                return Err(QuantError::CellCollapse { output: top.0 });
            }
            breaks.push(r);
        }
        hull.push(line);
    }
    let thresholds = breaks.iter().map(|&r| r.ln() / (2.0 * g)).collect();
    let winners = hull.iter().map(|&(z, _, _)| z).collect();
    Ok((thresholds, winners))
}

/// Per-cell assignment score at y: sum over inputs of
/// P(x) f(y|x) ln P(x|z).
fn cell_score(
    g: f64,
    cons: &PamConstellation,
    log_post: &[Vec<f64>],
    z: usize,
    y: f64,
) -> f64 {
    cons.points()
        .iter()
        .zip(cons.prior())
        .enumerate()
        .map(|(i, (&x, &p))| p * normal_pdf(y - g * x) * log_post[i][z])
        .sum()
}

/// Repartition for K > 2 inputs: bracket every argmax change on a dense
/// scan of the relevant window, then locate each crossover by root-finding
/// the score difference of the two competing cells. Cells may legitimately
/// win several disjoint intervals here.
fn repartition_general(
    ch: &GaussianChannel,
    cons: &PamConstellation,
    log_post: &[Vec<f64>],
) -> Result<(Vec<f64>, Vec<usize>)> {
    let g = ch.gain();
    let n_cells = log_post[0].len();
    let x_max = cons.points().last().copied().unwrap_or(0.0).abs();
    let span = g * x_max + 12.0;
    let m = 8192usize;

    let argmax = |y: f64| -> usize {
        let mut best = 0usize;
        let mut best_v = cell_score(g, cons, log_post, 0, y);
        for z in 1..n_cells {
            let v = cell_score(g, cons, log_post, z, y);
            if v > best_v {
                best_v = v;
                best = z;
            }
        }
        best
    };

    let mut thresholds = Vec::new();
    let mut winners = Vec::new();
    let mut prev_y = -span;
    let mut prev_z = argmax(prev_y);
    winners.push(prev_z);
    for j in 1..=m {
        let y = -span + 2.0 * span * j as f64 / m as f64;
        let z = argmax(y);
        if z != prev_z {
            let (a, b) = (prev_z, z);
            let t = find_root(
                |u| cell_score(g, cons, log_post, a, u) - cell_score(g, cons, log_post, b, u),
                prev_y,
                y,
                1e-13,
            )
            .unwrap_or(0.5 * (prev_y + y));
            thresholds.push(t);
            winners.push(z);
            prev_z = z;
        }
        prev_y = y;
    }

    for z in 0..n_cells {
        if !winners.contains(&z) {
            return Err(QuantError::CellCollapse { output: z });
        }
    }
    Ok((thresholds, winners))
}

/// Default starting point for the iterative search: the small-SNR optimal
/// thresholds, which are near-optimal across the whole SNR range and avoid
/// bad basins.
fn default_init(n: usize) -> Result<QuantizerScheme> {
    let positive = small_snr_thresholds(n)?;
    QuantizerScheme::symmetric_from_positive(&positive, n % 2 == 0)
}

/// Alternating maximization of I(X;Z) over N-cell quantizers of the channel
/// output. Stops when no threshold moves by more than `tol`; if `max_iter`
/// is exhausted first, the best scheme seen is returned with
/// `converged = false`.
pub fn optimize_thresholds_iterative(
    ch: &GaussianChannel,
    cons: &PamConstellation,
    n: usize,
    init: Option<&QuantizerScheme>,
    tol: f64,
    max_iter: usize,
) -> Result<MatchedOptResult> {
    if n < 2 {
        return Err(QuantError::InvalidParameter("need at least 2 outputs".into()));
    }
    if !(ch.gain() > 0.0) {
        return Err(QuantError::InvalidParameter(
            "iterative optimization needs a positive gain".into(),
        ));
    }
    if !(tol > 0.0) {
        return Err(QuantError::InvalidParameter("tolerance must be positive".into()));
    }
    let owned_init;
    let mut scheme = match init {
        Some(s) => {
            if distinct_metrics(s).len() != n {
                return Err(QuantError::InvalidParameter(format!(
                    "initial scheme has {} cells, expected {n}",
                    distinct_metrics(s).len()
                )));
            }
            s
        }
        None => {
            owned_init = default_init(n)?;
            &owned_init
        }
    }
    .clone();

    let mut best = scheme.clone();
    let mut best_info = mutual_information_discrete(&induce_discrete(ch, cons, &scheme));
    let mut converged = false;
    let mut iterations = 0;
    for _ in 0..max_iter {
        let next = reassign_step(ch, cons, &scheme)?;
        iterations += 1;
        let movement = if next.thresholds().len() == scheme.thresholds().len() {
            next.thresholds()
                .iter()
                .zip(scheme.thresholds())
                .map(|(&a, &b)| (a - b).abs())
                .fold(0.0, f64::max)
        } else {
            f64::INFINITY
        };
        scheme = next;
        let info = mutual_information_discrete(&induce_discrete(ch, cons, &scheme));
        if info >= best_info {
            best_info = info;
            best = scheme.clone();
        }
        if movement < tol {
            converged = true;
            break;
        }
    }
    let relative_loss = relative_loss(ch, cons, &best);
    Ok(MatchedOptResult {
        scheme: best,
        capacity_nats: best_info,
        relative_loss,
        iterations,
        converged,
    })
}

/// Leading-order optimal outer threshold for a 3-cell quantizer of binary
/// antipodal inputs at large gain: ln(g)/g, clamped at 0 where the
/// expansion would turn negative. Requires g > 0.
pub fn large_snr_threshold_2pam3(g: f64) -> f64 {
    (g.ln() / g).max(0.0)
}

/// The vanishing-SNR outer threshold b0 for the 3-cell binary-input
/// quantizer: the root of 2 b Q(b) = phi(b), recomputed rather than stored.
pub fn small_snr_b0() -> f64 {
    find_root(|b| 2.0 * b * q_function(b) - normal_pdf(b), 0.1, 2.0, 1e-14)
        .expect("2bQ(b) - phi(b) changes sign on [0.1, 2]")
}

/// Small-SNR expansion of the 3-cell binary-input threshold. Order 1 is the
/// constant b0; order 2 applies the g^2 correction b0 (1 - g^2/6), clamped
/// at 0. Requires g >= 0.
pub fn small_snr_threshold_2pam3(order: u32, g: f64) -> Result<f64> {
    if !(g >= 0.0) {
        return Err(QuantError::InvalidParameter(format!("gain {g} must be non-negative")));
    }
    let b0 = small_snr_b0();
    match order {
        1 => Ok(b0),
        2 => Ok((b0 * (1.0 - g * g / 6.0)).max(0.0)),
        _ => Err(QuantError::InvalidParameter(format!("expansion order {order} not in {{1, 2}}"))),
    }
}

/// Minimum-MSE (Lloyd-Max) thresholds of an N-cell quantizer for a unit
/// Gaussian, strictly positive half only; this is the vanishing-SNR optimal
/// quantizer for any normalized input, and the caller scales by the noise
/// standard deviation. Supports 2 <= N <= 64.
pub fn small_snr_thresholds(n: usize) -> Result<Vec<f64>> {
    if !(2..=64).contains(&n) {
        return Err(QuantError::InvalidParameter(format!("cell count {n} not in [2, 64]")));
    }
    let normal = statrs::distribution::Normal::standard();
    // Quantile starting points; the fixed point is insensitive to these.
    let mut t: Vec<f64> = (1..n)
        .map(|i| {
            use statrs::distribution::ContinuousCDF;
            normal.inverse_cdf(i as f64 / n as f64)
        })
        .collect();
    let max_iter = 20_000;
    let tol = 1e-12;
    let mut movement = f64::INFINITY;
    for it in 0..max_iter {
        // Cell centroids, with the two outer cells half-infinite.
        let centroid = |lo: f64, hi: f64| -> f64 {
            (normal_pdf(lo) - normal_pdf(hi)) / (normal_cdf(hi) - normal_cdf(lo))
        };
        let mut c = Vec::with_capacity(n);
        for i in 0..n {
            let lo = if i == 0 { f64::NEG_INFINITY } else { t[i - 1] };
            let hi = if i == n - 1 { f64::INFINITY } else { t[i] };
            c.push(centroid(lo, hi));
        }
        let mut next: Vec<f64> = (0..n - 1).map(|i| 0.5 * (c[i] + c[i + 1])).collect();
        // The fixed point is symmetric; projecting each iterate onto the
        // antisymmetric subspace suppresses drift without changing it.
        let sym: Vec<f64> =
            next.iter().zip(next.iter().rev()).map(|(&a, &b)| 0.5 * (a - b)).collect();
        next = sym;
        movement =
            next.iter().zip(&t).map(|(&a, &b)| (a - b).abs()).fold(0.0, f64::max);
        t = next;
        if movement < tol {
            return Ok(t.into_iter().filter(|&x| x > 0.0).collect());
        }
        let _ = it;
    }
    Err(QuantError::NoConvergence { iterations: max_iter, movement })
}

/// Symmetric quantizer scheme built from the small-SNR thresholds, with
/// centered-index metrics.
pub fn small_snr_scheme(n: usize) -> Result<QuantizerScheme> {
    let positive = small_snr_thresholds(n)?;
    QuantizerScheme::symmetric_from_positive(&positive, n % 2 == 0)
}

/// High-rate estimate of the capacity lost to an optimal N-cell quantizer:
/// g^2 / (24 N^2) times the cubed integral of (f_Y Var(X|Y))^(1/3).
pub fn high_rate_loss(
    ch: &GaussianChannel,
    cons: &PamConstellation,
    n: usize,
) -> Result<f64> {
    if n < 2 {
        return Err(QuantError::InvalidParameter("need at least 2 cells".into()));
    }
    let g = ch.gain();
    let points = cons.points();
    let prior = cons.prior();
    let log_prior: Vec<f64> = prior.iter().map(|&p| p.ln()).collect();
    let x_max = points.last().copied().unwrap_or(0.0).abs();
    // The integrand decays like exp(-(|y| - g x_max)^2 / 6), a third as
    // fast as the density itself, so the window is three times wider than
    // a plain Gaussian tail would need.
    let span = g * x_max + 45.0;
    let rule = QuadratureRule::adaptive_panel(32)?;
    let norm = (2.0 * std::f64::consts::PI).sqrt();
    let mut logs = vec![0.0; points.len()];
    let integral = rule.integrate(-span, span, |y| {
        for (j, (&x, &lp)) in points.iter().zip(&log_prior).enumerate() {
            let d = y - g * x;
            logs[j] = lp - 0.5 * d * d;
        }
        let lse = log_sum_exp(&logs).expect("non-empty constellation");
        let f_y = lse.exp() / norm;
        let mut mean = 0.0;
        let mut second = 0.0;
        for (j, &x) in points.iter().enumerate() {
            let p = (logs[j] - lse).exp();
            mean += p * x;
            second += p * x * x;
        }
        let var = (second - mean * mean).max(0.0);
        (f_y * var).cbrt()
    })?;
    Ok(g * g / (24.0 * (n * n) as f64) * integral.powi(3))
}

/// Relative capacity loss 1 - I(X;Z) / I(X;Y) of a quantizer scheme.
///
/// At g = 0 both informations vanish and the ratio is evaluated in the
/// limit instead, where it equals the quantized-to-full Fisher information
/// ratio E_Z[E[Y|Z]^2] of a unit Gaussian Y.
pub fn relative_loss(
    ch: &GaussianChannel,
    cons: &PamConstellation,
    scheme: &QuantizerScheme,
) -> f64 {
    let rule = QuadratureRule::gauss_hermite(129).expect("129 is a valid node count");
    relative_loss_with_rule(ch, cons, scheme, &rule)
}

/// `relative_loss` with an explicit quadrature rule for the unquantized
/// capacity.
pub fn relative_loss_with_rule(
    ch: &GaussianChannel,
    cons: &PamConstellation,
    scheme: &QuantizerScheme,
    rule: &QuadratureRule,
) -> f64 {
    if ch.gain() == 0.0 {
        return (1.0 - quantized_fisher_ratio(scheme)).clamp(0.0, 1.0);
    }
    let quantized = mutual_information_discrete(&induce_discrete(ch, cons, scheme));
    let full = mutual_information_continuous(ch, cons, rule);
    (1.0 - quantized / full).clamp(0.0, 1.0)
}

/// E_Z[E[Y|Z]^2] for a unit Gaussian Y quantized by the scheme: the
/// fraction of Fisher information (equivalently, of capacity as g -> 0)
/// the quantizer retains. Cells sharing a metric value are merged.
pub fn quantized_fisher_ratio(scheme: &QuantizerScheme) -> f64 {
    let cells = distinct_metrics(scheme);
    let t = scheme.thresholds();
    let n_int = scheme.n_intervals();
    let mut mass = vec![0.0; cells.len()];
    let mut first_moment = vec![0.0; cells.len()];
    for i in 0..n_int {
        let lo = if i == 0 { f64::NEG_INFINITY } else { t[i - 1] };
        let hi = if i == n_int - 1 { f64::INFINITY } else { t[i] };
        let z = cells
            .iter()
            .position(|&c| c == scheme.metrics()[i])
            .expect("metric value present in distinct list");
        mass[z] += q_function(lo) - q_function(hi);
        // int_lo^hi y phi(y) dy = phi(lo) - phi(hi).
        first_moment[z] += normal_pdf(lo) - normal_pdf(hi);
    }
    mass.iter()
        .zip(&first_moment)
        .filter(|&(&m, _)| m > 0.0)
        .map(|(&m, &s)| s * s / m)
        .sum()
}
