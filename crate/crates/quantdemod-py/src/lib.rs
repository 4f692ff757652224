//! Python bindings for the quantizer-design and demapper routines.
//!
//! Complex channel outputs cross the boundary as (re, im) pairs and bit
//! metrics come back as 3-tuples; design results are dicts keyed like the
//! CLI columns.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;
use quantdemod::channel::{GaussianChannel, PamConstellation};
use quantdemod::psk8::{self, GcrBranch};
use quantdemod::sim::SimConfig;
use quantdemod::{matched, mismatched, numerics};

fn err(e: quantdemod::QuantError) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Upper tail of the standard normal distribution.
#[pyfunction]
fn q_function(x: f64) -> f64 {
    numerics::q_function(x)
}

#[pyfunction]
fn log_sum_exp(values: Vec<f64>) -> PyResult<f64> {
    numerics::log_sum_exp(&values).map_err(err)
}

/// Positive half of the vanishing-SNR optimal thresholds for an n-cell
/// quantizer (unit noise deviation; scale by sigma at finite SNR).
#[pyfunction]
fn small_snr_thresholds(n: usize) -> PyResult<Vec<f64>> {
    matched::small_snr_thresholds(n).map_err(err)
}

/// Vanishing-SNR design for fixed positive metric levels: returns
/// (thresholds, alpha_over_gain).
#[pyfunction]
fn small_snr_mismatched(metrics: Vec<f64>) -> PyResult<(Vec<f64>, f64)> {
    let ma = mismatched::MetricAssignment::new(metrics).map_err(err)?;
    let d = mismatched::small_snr_mismatched(&ma).map_err(err)?;
    Ok((d.thresholds, d.alpha_over_gain))
}

/// Iterative capacity-optimal n-cell quantizer for antipodal inputs at
/// amplitude `gain` in unit noise.
#[pyfunction]
#[pyo3(signature = (gain, n, tol=1e-9, max_iter=20_000))]
fn optimize_matched<'py>(
    py: Python<'py>,
    gain: f64,
    n: usize,
    tol: f64,
    max_iter: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let ch = GaussianChannel::new(gain).map_err(err)?;
    let two_pam = PamConstellation::two_pam();
    let res = matched::optimize_thresholds_iterative(&ch, &two_pam, n, None, tol, max_iter)
        .map_err(err)?;
    let out = PyDict::new(py);
    out.set_item("thresholds", res.scheme.thresholds().to_vec())?;
    out.set_item("capacity_nats", res.capacity_nats)?;
    out.set_item("relative_loss", res.relative_loss)?;
    out.set_item("iterations", res.iterations)?;
    out.set_item("converged", res.converged)?;
    Ok(out)
}

/// Jointly optimal metric scale and thresholds for fixed positive metric
/// levels (decoder applies the metrics as given, scaled by alpha).
#[pyfunction]
fn optimize_mismatched<'py>(
    py: Python<'py>,
    gain: f64,
    metrics: Vec<f64>,
) -> PyResult<Bound<'py, PyDict>> {
    let ch = GaussianChannel::new(gain).map_err(err)?;
    let two_pam = PamConstellation::two_pam();
    let ma = mismatched::MetricAssignment::new(metrics).map_err(err)?;
    let res = mismatched::optimize_mismatched(&ch, &two_pam, &ma).map_err(err)?;
    let out = PyDict::new(py);
    out.set_item("alpha", res.alpha)?;
    out.set_item("thresholds", res.scheme.positive_thresholds())?;
    out.set_item("gmi_nats", res.gmi_nats)?;
    out.set_item("relative_loss", res.relative_loss)?;
    Ok(out)
}

fn triple(v: psk8::BitMetricVector) -> (f64, f64, f64) {
    (v.q1, v.q2, v.q3)
}

/// Exact per-bit log-likelihood ratios for a Gray-labeled 8PSK symbol.
#[pyfunction]
fn exact_llr(re: f64, im: f64, gain: f64) -> (f64, f64, f64) {
    triple(psk8::exact_llr(num_complex::Complex64::new(re, im), gain))
}

#[pyfunction]
fn maxlog_llr(re: f64, im: f64, gain: f64) -> (f64, f64, f64) {
    triple(psk8::maxlog_llr(num_complex::Complex64::new(re, im), gain))
}

/// Max-log metrics computed with three complex rotations.
#[pyfunction]
fn fast_llr(re: f64, im: f64, gain: f64) -> (f64, f64, f64) {
    triple(psk8::fast_llr_decompose(num_complex::Complex64::new(re, im), gain))
}

/// Region-corrected bit metrics derived from the max-log LLRs; `branch`
/// selects the comparison ("signed" or "magnitude").
#[pyfunction]
#[pyo3(signature = (re, im, gain, branch="signed"))]
fn gcr_metrics(re: f64, im: f64, gain: f64, branch: &str) -> PyResult<(f64, f64, f64)> {
    let branch = match branch {
        "signed" => GcrBranch::SignedLlr,
        "magnitude" => GcrBranch::Magnitude,
        other => {
            return Err(PyValueError::new_err(format!(
                "branch {other:?} is not \"signed\" or \"magnitude\""
            )))
        }
    };
    let llr = psk8::maxlog_llr(num_complex::Complex64::new(re, im), gain);
    Ok(triple(psk8::gcr_bit_metrics(&llr, branch)))
}

/// Runs the coded 8PSK link for a JSON config (same schema as the CLI's
/// `simulate --config`) and returns the error counts.
#[pyfunction]
fn run_sim<'py>(py: Python<'py>, config_json: &str) -> PyResult<Bound<'py, PyDict>> {
    let cfg: SimConfig =
        serde_json::from_str(config_json).map_err(|e| PyValueError::new_err(e.to_string()))?;
    let res = py
        .detach(|| quantdemod::sim::run_sim(&cfg))
        .map_err(err)?;
    let out = PyDict::new(py);
    out.set_item("bits", res.bits)?;
    out.set_item("bit_errors", res.bit_errors)?;
    out.set_item("frames", res.frames)?;
    out.set_item("frame_errors", res.frame_errors)?;
    out.set_item("ber", res.ber)?;
    out.set_item("fer", res.fer)?;
    out.set_item("ci_lo", res.wilson_ci95.lo)?;
    out.set_item("ci_hi", res.wilson_ci95.hi)?;
    Ok(out)
}

#[pymodule]
fn quantdemod_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(q_function, m)?)?;
    m.add_function(wrap_pyfunction!(log_sum_exp, m)?)?;
    m.add_function(wrap_pyfunction!(small_snr_thresholds, m)?)?;
    m.add_function(wrap_pyfunction!(small_snr_mismatched, m)?)?;
    m.add_function(wrap_pyfunction!(optimize_matched, m)?)?;
    m.add_function(wrap_pyfunction!(optimize_mismatched, m)?)?;
    m.add_function(wrap_pyfunction!(exact_llr, m)?)?;
    m.add_function(wrap_pyfunction!(maxlog_llr, m)?)?;
    m.add_function(wrap_pyfunction!(fast_llr, m)?)?;
    m.add_function(wrap_pyfunction!(gcr_metrics, m)?)?;
    m.add_function(wrap_pyfunction!(run_sim, m)?)?;
    Ok(())
}
