use crate::error::{QuantError, Result};

const INV_PHI: f64 = 0.618_033_988_749_894_9; // (sqrt(5) - 1) / 2

/// Golden-section maximization of a unimodal function on [lo, hi].
///
/// Returns (argmax, f(argmax)) with |argmax - true argmax| <= tol for
/// unimodal f. Fully deterministic: the probe sequence depends only on the
/// bracket and tolerance. A non-finite evaluation aborts with the offending
/// abscissa.
pub fn maximize_scalar<F>(mut f: F, lo: f64, hi: f64, tol: f64) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> f64,
{
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(QuantError::InvalidParameter(format!(
            "bracket [{lo}, {hi}] must be finite and increasing"
        )));
    }
    if !(tol.is_finite() && tol > 0.0) {
        return Err(QuantError::InvalidParameter(format!("tol = {tol} must be positive")));
    }
    let eval = |x: f64, f: &mut F| -> Result<f64> {
        let v = f(x);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(QuantError::NonFiniteEval { x })
        }
    };
    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = eval(c, &mut f)?;
    let mut fd = eval(d, &mut f)?;
    while b - a > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = eval(c, &mut f)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = eval(d, &mut f)?;
        }
    }
    let x = 0.5 * (a + b);
    let fx = eval(x, &mut f)?;
    // The midpoint can round slightly below an interior probe; report the
    // best point seen so the returned pair is consistent.
    if fc >= fx && fc >= fd {
        Ok((c, fc))
    } else if fd >= fx {
        Ok((d, fd))
    } else {
        Ok((x, fx))
    }
}
