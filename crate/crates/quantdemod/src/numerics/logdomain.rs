use crate::error::{QuantError, Result};

/// ln(sum of exp(v_i)) with the maximum factored out, so the sum never
/// overflows. Exact for single-element lists.
pub fn log_sum_exp(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(QuantError::EmptyList);
    }
    let m = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return Ok(f64::NEG_INFINITY);
    }
    if values.len() == 1 {
        return Ok(values[0]);
    }
    // ln_1p over the non-maximal terms keeps corrections far below f64
    // epsilon from rounding away in the 1 + rest sum.
    let arg_max = values
        .iter()
        .position(|&v| v == m)
        .expect("maximum exists in non-empty list");
    let rest: f64 = values
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != arg_max)
        .map(|(_, &v)| (v - m).exp())
        .sum();
    Ok(m + rest.ln_1p())
}

/// ln(1 + exp(x)) without overflow for large |x|.
pub fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

/// Logistic function 1 / (1 + exp(-x)), evaluated on the side that avoids
/// overflow.
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}
