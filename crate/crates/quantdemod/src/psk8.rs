//! Gray-labeled 8PSK bit-metric demodulation: exact and max-log per-bit
//! LLRs, scaled GMI metrics, the piecewise corrected bit metrics, and the
//! three-multiplication fast decomposition of the max-log LLRs.

use crate::error::{QuantError, Result};
use crate::numerics::log_sum_exp;
use num_complex::Complex64;
use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};

/// Bit labels (b1, b2, b3) of the points e^{ik pi/4}, k = 0..7. Adjacent
/// labels differ in one bit, and the all-ones label sits at angle 0.
const LABELS: [[u8; 3]; 8] =
    [[1, 1, 1], [1, 1, 0], [1, 0, 0], [1, 0, 1], [0, 0, 1], [0, 0, 0], [0, 1, 0], [0, 1, 1]];

/// The 8 unit points, written with exact coordinate values so that dot
/// products against axis-aligned inputs round the same way everywhere.
const POINTS: [Complex64; 8] = [
    Complex64::new(1.0, 0.0),
    Complex64::new(FRAC_1_SQRT_2, FRAC_1_SQRT_2),
    Complex64::new(0.0, 1.0),
    Complex64::new(-FRAC_1_SQRT_2, FRAC_1_SQRT_2),
    Complex64::new(-1.0, 0.0),
    Complex64::new(-FRAC_1_SQRT_2, -FRAC_1_SQRT_2),
    Complex64::new(0.0, -1.0),
    Complex64::new(FRAC_1_SQRT_2, -FRAC_1_SQRT_2),
];

/// Unit-energy 8PSK with the cyclic Gray labeling used throughout this
/// crate.
#[derive(Clone, Copy, Debug, Default)]
pub struct Psk8Constellation;

impl Psk8Constellation {
    pub fn new() -> Self {
        Self
    }

    pub fn point(&self, k: usize) -> Complex64 {
        POINTS[k & 7]
    }

    /// Bit triple (b1, b2, b3) of point k.
    pub fn label(&self, k: usize) -> [u8; 3] {
        LABELS[k & 7]
    }

    pub fn points(&self) -> &'static [Complex64; 8] {
        &POINTS
    }

    /// Maps a bit triple to its point index.
    pub fn index_of_label(&self, label: [u8; 3]) -> usize {
        LABELS.iter().position(|&l| l == label).expect("all 8 labels are present")
    }
}

/// Per-bit metric triple; each component is credited when its bit is 0, so
/// positive means bit = 0 is the likelier hypothesis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BitMetricVector {
    pub q1: f64,
    pub q2: f64,
    pub q3: f64,
}

impl BitMetricVector {
    pub fn new(q1: f64, q2: f64, q3: f64) -> Self {
        Self { q1, q2, q3 }
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.q1, self.q2, self.q3]
    }

    pub fn scale(&self, c: f64) -> Self {
        Self { q1: c * self.q1, q2: c * self.q2, q3: c * self.q3 }
    }
}

/// Which LLR computation backs the scaled GMI metrics.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LlrMode {
    Exact,
    MaxLog,
}

/// Resolution of the piecewise corrected-metric comparison: the literal
/// reading compares signed LLR values, the alternative compares their
/// magnitudes (which reproduces the reference-region closed form).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum GcrBranch {
    #[default]
    SignedLlr,
    Magnitude,
}

#[inline]
fn dot(y: Complex64, x: Complex64) -> f64 {
    y.re * x.re + y.im * x.im
}

/// Exact per-bit LLRs: ln of the ratio of summed likelihoods over the
/// bit = 0 and bit = 1 halves of the constellation, with the common
/// Gaussian factor cancelled so only e^{g <y, x>} terms remain.
pub fn exact_llr(y: Complex64, g: f64) -> BitMetricVector {
    let mut scores = [0.0f64; 8];
    for (k, &x) in POINTS.iter().enumerate() {
        scores[k] = g * dot(y, x);
    }
    let mut out = [0.0f64; 3];
    for (i, slot) in out.iter_mut().enumerate() {
        let mut zeros = [0.0f64; 4];
        let mut ones = [0.0f64; 4];
        let (mut nz, mut no) = (0, 0);
        for k in 0..8 {
            if LABELS[k][i] == 0 {
                zeros[nz] = scores[k];
                nz += 1;
            } else {
                ones[no] = scores[k];
                no += 1;
            }
        }
        let lz = log_sum_exp(&zeros).expect("each bit splits the 8 labels 4/4");
        let lo = log_sum_exp(&ones).expect("each bit splits the 8 labels 4/4");
        *slot = lz - lo;
    }
    BitMetricVector::new(out[0], out[1], out[2])
}

/// Max-log per-bit LLRs: the dominant-term approximation of exact_llr,
/// computed purely with additions and comparisons.
pub fn maxlog_llr(y: Complex64, g: f64) -> BitMetricVector {
    let mut scores = [0.0f64; 8];
    for (k, &x) in POINTS.iter().enumerate() {
        scores[k] = g * dot(y, x);
    }
    let mut out = [0.0f64; 3];
    for (i, slot) in out.iter_mut().enumerate() {
        let mut best_zero = f64::NEG_INFINITY;
        let mut best_one = f64::NEG_INFINITY;
        for k in 0..8 {
            if LABELS[k][i] == 0 {
                best_zero = best_zero.max(scores[k]);
            } else {
                best_one = best_one.max(scores[k]);
            }
        }
        *slot = best_zero - best_one;
    }
    BitMetricVector::new(out[0], out[1], out[2])
}

/// Per-bit decoding metrics proportional to the (exact or max-log) LLRs.
/// The scale `a` must be positive; argmax decoders are invariant to it.
pub fn gmi_bit_metrics(y: Complex64, g: f64, mode: LlrMode, a: f64) -> Result<BitMetricVector> {
    if !(a > 0.0) {
        return Err(QuantError::InvalidParameter(format!("metric scale {a} must be positive")));
    }
    let llr = match mode {
        LlrMode::Exact => exact_llr(y, g),
        LlrMode::MaxLog => maxlog_llr(y, g),
    };
    Ok(llr.scale(a))
}

/// Piecewise corrected bit metrics from max-log LLRs: the smaller-ranked
/// of the first two components keeps its LLR, the other is pulled toward
/// zero by half the third's magnitude, and the third passes through.
/// `branch` picks between ranking by signed value and by magnitude.
pub fn gcr_bit_metrics(llr: &BitMetricVector, branch: GcrBranch) -> BitMetricVector {
    let correct = |v: f64| v - 0.5 * llr.q3.abs() * v.signum();
    let first_keeps = match branch {
        GcrBranch::SignedLlr => llr.q1 < llr.q2,
        GcrBranch::Magnitude => llr.q1.abs() < llr.q2.abs(),
    };
    if first_keeps {
        BitMetricVector::new(llr.q1, correct(llr.q2), llr.q3)
    } else {
        BitMetricVector::new(correct(llr.q1), llr.q2, llr.q3)
    }
}

/// Per-thread count of complex multiplications performed by the
/// decomposition demodulator, so tests can pin its operation budget
/// (exactly three per call). The increment is a thread-local cell write,
/// negligible next to the multiplication itself.
pub mod cmul_count {
    use std::cell::Cell;

    thread_local! {
        static COUNT: Cell<u64> = const { Cell::new(0) };
    }

    /// Zeroes this thread's counter.
    pub fn reset() {
        COUNT.with(|c| c.set(0));
    }

    /// Complex multiplications on this thread since the last reset.
    pub fn get() -> u64 {
        COUNT.with(|c| c.get())
    }

    pub(super) fn bump() {
        COUNT.with(|c| c.set(c.get() + 1));
    }
}

#[inline]
fn cmul(a: Complex64, b: Complex64) -> Complex64 {
    cmul_count::bump();
    a * b
}

// Rotations by -pi/8 and -3pi/8 whose component signs classify the plane
// into the 8 max-log regions, and the per-region completion rotations.
const COS_PI_8: f64 = 0.9238795325112867;
const SIN_PI_8: f64 = 0.3826834323650898;
const ROT_1: Complex64 = Complex64::new(COS_PI_8, -SIN_PI_8);
const ROT_3: Complex64 = Complex64::new(SIN_PI_8, -COS_PI_8);
// conj(w) for w = e^{i3pi/4}, e^{i pi/2}, e^{i pi/4}, 1.
const W_135: Complex64 = Complex64::new(-FRAC_1_SQRT_2, -FRAC_1_SQRT_2);
const W_90: Complex64 = Complex64::new(0.0, -1.0);
const W_45: Complex64 = Complex64::new(FRAC_1_SQRT_2, -FRAC_1_SQRT_2);
const W_0: Complex64 = Complex64::new(1.0, 0.0);

/// Wedge index 0..7 of y (wedge k is centered on the point e^{ik pi/4}),
/// read off the signs of the two boundary-aligned rotations.
fn region_of(d1: f64, d2: f64, d3: f64, d4: f64) -> usize {
    let code = usize::from(d1 >= 0.0) << 3
        | usize::from(d2 >= 0.0) << 2
        | usize::from(d3 >= 0.0) << 1
        | usize::from(d4 >= 0.0);
    match code {
        0b1010 => 0,
        0b1110 => 1,
        0b1111 => 2,
        0b0111 => 3,
        0b0101 => 4,
        0b0001 => 5,
        0b0000 => 6,
        0b1000 => 7,
        // The four sign bits come from two rotations of one point, so only
        // the 8 codes above are geometrically realizable.
        _ => unreachable!("sign code {code:04b} does not correspond to a wedge"),
    }
}

/// Max-log LLRs via the 8-region decomposition: two complex
/// multiplications classify y into its wedge, one more completes the
/// wedge's fixed difference products. Numerically identical to
/// maxlog_llr up to a few ulp.
pub fn fast_llr_decompose(y: Complex64, g: f64) -> BitMetricVector {
    let m1 = cmul(y, ROT_1);
    let m2 = cmul(y, ROT_3);
    let (d1, d2, d3, d4) = (m1.re, m1.im, m2.re, m2.im);
    let region = region_of(d1, d2, d3, d4);
    let s = 2.0 * SIN_PI_8;
    let t = SQRT_2;
    let w = match region {
        0 | 4 => W_135,
        1 | 5 => W_90,
        2 | 6 => W_45,
        _ => W_0,
    };
    let e = cmul(y, w).re;
    let (q1, q2, q3) = match region {
        0 => (-s * d3, t * e, s * d2),
        1 => (-t * e, s * d4, s * d2),
        2 => (-t * e, s * d4, s * d1),
        3 => (-s * d3, -t * e, s * d1),
        4 => (-s * d3, t * e, -s * d2),
        5 => (-t * e, s * d4, -s * d2),
        6 => (-t * e, s * d4, -s * d1),
        _ => (-s * d3, -t * e, -s * d1),
    };
    BitMetricVector::new(g * q1, g * q2, g * q3)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{RngExt, SeedableRng};
    use rand_chacha::ChaCha12Rng;
    use std::f64::consts::{FRAC_PI_8, PI};

    fn assert_close(a: &BitMetricVector, b: &BitMetricVector, tol: f64, ctx: &str) {
        for (x, y) in a.as_array().iter().zip(b.as_array()) {
            assert!((x - y).abs() <= tol, "{ctx}: {a:?} vs {b:?}");
        }
    }

    #[test]
    fn labels_form_cyclic_gray_code() {
        for k in 0..8 {
            let a = LABELS[k];
            let b = LABELS[(k + 1) % 8];
            let flips: u32 = a.iter().zip(&b).map(|(x, y)| u32::from(x != y)).sum();
            assert_eq!(flips, 1, "labels {a:?} -> {b:?}");
        }
    }

    #[test]
    fn label_table_pins_the_metric_exponent_structure() {
        let c = Psk8Constellation::new();
        // Angle 0 carries no zero-bit credits, angle pi/4 carries only the
        // third, angle 5pi/4 carries all three.
        assert_eq!(c.label(0), [1, 1, 1]);
        assert_eq!(c.label(1), [1, 1, 0]);
        assert_eq!(c.label(5), [0, 0, 0]);
        assert_eq!(c.index_of_label([0, 0, 0]), 5);
        // Points really are e^{ik pi/4}.
        for k in 0..8 {
            let want = Complex64::from_polar(1.0, k as f64 * PI / 4.0);
            assert!((c.point(k) - want).norm() < 1e-15, "point {k}");
        }
    }

    #[test]
    fn exact_llr_is_zero_at_the_origin() {
        let v = exact_llr(Complex64::new(0.0, 0.0), 1.3);
        assert_eq!(v.as_array(), [0.0, 0.0, 0.0]);
    }

    #[test]
    fn exact_llr_signs_follow_the_nearest_label() {
        // Far out along angle pi/4 the label (1,1,0) dominates: bits 1 and
        // 2 say "one" (negative LLR), bit 3 says "zero" (positive).
        let y = Complex64::from_polar(50.0, PI / 4.0);
        let v = exact_llr(y, 1.0);
        assert!(v.q1 < -1.0 && v.q2 < -1.0 && v.q3 > 1.0, "{v:?}");
    }

    #[test]
    fn exact_llr_matches_naive_summation() {
        let mut rng = ChaCha12Rng::seed_from_u64(11);
        let mut cases = vec![(Complex64::new(1.0, 0.0), 1.0)];
        for _ in 0..200 {
            let y = Complex64::new(rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
            cases.push((y, rng.random_range(0.1..2.5)));
        }
        for (y, g) in cases {
            let v = exact_llr(y, g);
            for i in 0..3 {
                let mut num = 0.0f64;
                let mut den = 0.0f64;
                for k in 0..8 {
                    let term = (g * dot(y, POINTS[k])).exp();
                    if LABELS[k][i] == 0 {
                        num += term;
                    } else {
                        den += term;
                    }
                }
                let want = (num / den).ln();
                assert!(
                    (v.as_array()[i] - want).abs() < 1e-12,
                    "y = {y}, g = {g}, bit {i}: {} vs {want}",
                    v.as_array()[i]
                );
            }
        }
    }

    #[test]
    fn maxlog_reference_values_and_ties() {
        let v = maxlog_llr(Complex64::new(1.0, 0.0), 1.0);
        assert!((v.q1 - (FRAC_1_SQRT_2 - 1.0)).abs() < 1e-15);
        assert!((v.q2 - -1.0).abs() < 1e-15);
        assert!((v.q3 - (FRAC_1_SQRT_2 - 1.0)).abs() < 1e-15);
        // On the wedge boundary at phase pi/8 two candidates tie; the
        // difference of equal maxima is still well-defined.
        let y = Complex64::from_polar(2.0, FRAC_PI_8);
        let v = maxlog_llr(y, 1.0);
        assert!((v.q3 - 0.0).abs() < 1e-14, "{v:?}");
        assert_eq!(maxlog_llr(Complex64::new(0.0, 0.0), 2.0).as_array(), [0.0; 3]);
    }

    #[test]
    fn maxlog_approaches_exact_at_high_energy() {
        // Along any ray that avoids the 8 tie directions, the subdominant
        // exponentials die off linearly in |y| g, so the gap vanishes. The
        // slowest surviving term on a bisector decays like
        // e^{-(1 - cos pi/4) |y| g}, which crosses 1e-8 near |y| g = 65.
        let gap = |r: f64, theta: f64| {
            let y = Complex64::from_polar(r, theta);
            let a = exact_llr(y, 1.0);
            let b = maxlog_llr(y, 1.0);
            a.as_array()
                .iter()
                .zip(b.as_array())
                .map(|(x, w)| (x - w).abs())
                .fold(0.0f64, f64::max)
        };
        for k in 0..8 {
            let theta = k as f64 * PI / 4.0;
            let mut prev = f64::INFINITY;
            for r in [10.0, 20.0, 40.0, 70.0] {
                let d = gap(r, theta);
                assert!(d < prev, "gap not decreasing on bisector {k}");
                prev = d;
            }
            assert!(prev < 1e-8, "bisector {k}: residual {prev}");
            // A generic off-bisector ray decays slower but still vanishes.
            let d = gap(70.0, theta + PI / 16.0);
            assert!(d < 1e-4 && d < gap(20.0, theta + PI / 16.0));
        }
        // On a tie ray two same-half scores stay exactly equal, so the
        // exact sum keeps a ln 2 excess that max-log never sees: the gap
        // saturates there instead of vanishing.
        let d = gap(70.0, FRAC_PI_8);
        assert!((d - std::f64::consts::LN_2).abs() < 1e-6, "tie-ray gap {d}");
    }

    #[test]
    fn scaled_metrics_validate_and_scale() {
        let y = Complex64::new(0.4, -0.9);
        assert!(gmi_bit_metrics(y, 1.0, LlrMode::Exact, 0.0).is_err());
        assert!(gmi_bit_metrics(y, 1.0, LlrMode::Exact, -2.0).is_err());
        let base = gmi_bit_metrics(y, 1.0, LlrMode::Exact, 1.0).unwrap();
        assert_eq!(base, exact_llr(y, 1.0));
        let doubled = gmi_bit_metrics(y, 1.0, LlrMode::Exact, 2.0).unwrap();
        assert_close(&doubled, &base.scale(2.0), 0.0, "scaling");
        let ml = gmi_bit_metrics(Complex64::new(0.0, 1.0), 1.0, LlrMode::MaxLog, 1.0).unwrap();
        assert_eq!(ml, maxlog_llr(Complex64::new(0.0, 1.0), 1.0));
    }

    #[test]
    fn corrected_metrics_reference_point() {
        let llr = maxlog_llr(Complex64::new(1.0, 0.0), 1.0);
        // Literal signed comparison: q1 > q2 here, so the first component
        // takes the correction.
        let signed = gcr_bit_metrics(&llr, GcrBranch::SignedLlr);
        assert!((signed.q1 - 0.5 * (FRAC_1_SQRT_2 - 1.0)).abs() < 1e-15, "{signed:?}");
        assert!((signed.q2 - -1.0).abs() < 1e-15);
        assert!((signed.q3 - (FRAC_1_SQRT_2 - 1.0)).abs() < 1e-15);
        // Magnitude comparison reproduces the reference-region closed form
        // (q1, q2 - q3/2, q3).
        let mag = gcr_bit_metrics(&llr, GcrBranch::Magnitude);
        assert!((mag.q1 - (FRAC_1_SQRT_2 - 1.0)).abs() < 1e-15, "{mag:?}");
        assert!((mag.q2 - (-1.0 - 0.5 * (FRAC_1_SQRT_2 - 1.0))).abs() < 1e-15);
        assert!((mag.q3 - (FRAC_1_SQRT_2 - 1.0)).abs() < 1e-15);
    }

    #[test]
    fn corrected_metrics_pass_through_when_third_is_zero() {
        let llr = BitMetricVector::new(0.7, -0.3, 0.0);
        for branch in [GcrBranch::SignedLlr, GcrBranch::Magnitude] {
            assert_eq!(gcr_bit_metrics(&llr, branch), llr);
        }
    }

    #[test]
    fn corrected_metrics_are_positively_homogeneous() {
        let mut rng = ChaCha12Rng::seed_from_u64(13);
        for _ in 0..300 {
            let llr = BitMetricVector::new(
                rng.random_range(-2.0..2.0),
                rng.random_range(-2.0..2.0),
                rng.random_range(-2.0..2.0),
            );
            let c = rng.random_range(0.01..10.0);
            for branch in [GcrBranch::SignedLlr, GcrBranch::Magnitude] {
                let scaled_then = gcr_bit_metrics(&llr.scale(c), branch);
                let then_scaled = gcr_bit_metrics(&llr, branch).scale(c);
                assert_close(&scaled_then, &then_scaled, 1e-12 * c.max(1.0), "homogeneity");
            }
        }
    }

    #[test]
    fn region_classification_matches_phase() {
        for k in 0..8 {
            let y = Complex64::from_polar(1.5, k as f64 * PI / 4.0);
            let m1 = y * ROT_1;
            let m2 = y * ROT_3;
            assert_eq!(region_of(m1.re, m1.im, m2.re, m2.im), k, "bisector {k}");
        }
    }

    #[test]
    fn fast_decomposition_equals_maxlog_everywhere() {
        let mut rng = ChaCha12Rng::seed_from_u64(14);
        let mut max_diff = 0.0f64;
        for i in 0..1_000_000 {
            // Uniform in the disk |y| <= 4, with a boundary-biased slice:
            // every 8th point lands exactly on a wedge boundary ray.
            let y = if i % 8 == 0 {
                let b = (i / 8) % 8;
                Complex64::from_polar(
                    rng.random_range(0.0..4.0),
                    FRAC_PI_8 + b as f64 * PI / 4.0,
                )
            } else {
                let r: f64 = rng.random_range(0.0f64..1.0).sqrt() * 4.0;
                Complex64::from_polar(r, rng.random_range(0.0..2.0 * PI))
            };
            let g = if i % 3 == 0 { 1.0 } else { rng.random_range(0.1..3.0) };
            let a = fast_llr_decompose(y, g);
            let b = maxlog_llr(y, g);
            for (x, w) in a.as_array().iter().zip(b.as_array()) {
                max_diff = max_diff.max((x - w).abs());
            }
        }
        assert!(max_diff <= 1e-12, "max |fast - maxlog| = {max_diff}");
    }

    #[test]
    fn fast_decomposition_uses_three_multiplications() {
        let y = Complex64::new(0.7, -1.1);
        cmul_count::reset();
        let _ = fast_llr_decompose(y, 1.0);
        assert_eq!(cmul_count::get(), 3);
        // Stable across regions.
        for k in 0..8 {
            cmul_count::reset();
            let _ = fast_llr_decompose(Complex64::from_polar(2.0, k as f64 * PI / 4.0), 1.0);
            assert_eq!(cmul_count::get(), 3, "region {k}");
        }
    }

    #[test]
    fn quarter_turn_permutes_and_flips_components() {
        // Rotating y by pi/2 relabels points by (b1,b2,b3) ->
        // (b2, !b1, !b3), so the LLRs map to (L2, -L1, -L3); a half turn
        // gives (-L1, -L2, L3).
        let mut rng = ChaCha12Rng::seed_from_u64(15);
        let i_unit = Complex64::new(0.0, 1.0);
        for _ in 0..200 {
            let y = Complex64::new(rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
            let g = rng.random_range(0.2..2.0);
            for f in [exact_llr, maxlog_llr, fast_llr_decompose] {
                let v = f(y, g);
                let q = f(y * i_unit, g);
                let want_q = BitMetricVector::new(v.q2, -v.q1, -v.q3);
                assert_close(&q, &want_q, 1e-12, "quarter turn");
                let h = f(-y, g);
                let want_h = BitMetricVector::new(-v.q1, -v.q2, v.q3);
                assert_close(&h, &want_h, 1e-12, "half turn");
            }
        }
    }

    #[test]
    fn reflection_swaps_first_two_components() {
        // The labeling's mirror symmetry is conjugation followed by a
        // pi/4 turn (the axis through the midpoint of points 0 and 1):
        // labels swap b1 and b2 and complement b3, so LLRs map to
        // (L2, L1, -L3). The corrected metrics commute with this map.
        let mut rng = ChaCha12Rng::seed_from_u64(16);
        let w = Complex64::from_polar(1.0, PI / 4.0);
        for _ in 0..200 {
            let y = Complex64::new(rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
            let g = rng.random_range(0.2..2.0);
            let reflected = w * y.conj();
            for f in [exact_llr, maxlog_llr, fast_llr_decompose] {
                let v = f(y, g);
                let r = f(reflected, g);
                let want = BitMetricVector::new(v.q2, v.q1, -v.q3);
                assert_close(&r, &want, 1e-12, "reflection");
            }
            let v = maxlog_llr(y, g);
            let r = maxlog_llr(reflected, g);
            for branch in [GcrBranch::SignedLlr, GcrBranch::Magnitude] {
                let gv = gcr_bit_metrics(&v, branch);
                let gr = gcr_bit_metrics(&r, branch);
                let want = BitMetricVector::new(gv.q2, gv.q1, -gv.q3);
                assert_close(&gr, &want, 1e-12, "corrected-metric reflection");
            }
        }
    }
}

