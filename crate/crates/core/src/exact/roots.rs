use crate::{Error, Result};

/// Safeguarded Newton iteration on a sign-changing bracket.
///
/// `f` returns `(value, derivative)`. A Newton step is accepted only if it
/// stays strictly inside the current bracket, otherwise the bracket is
/// bisected. Stops once `|f| ≤ ftol` or the bracket collapses to rounding.
pub(crate) fn bracketed_root(
    f: impl Fn(f64) -> (f64, f64),
    mut lo: f64,
    mut hi: f64,
    ftol: f64,
) -> Result<f64> {
    let (flo, _) = f(lo);
    let (fhi, _) = f(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() || flo.is_nan() || fhi.is_nan() {
        return Err(Error::NoSignChange { lo, hi });
    }
    let lo_negative = flo < 0.0;
    let mut x = 0.5 * (lo + hi);
    for _ in 0..400 {
        let (fx, dfx) = f(x);
        if fx.abs() <= ftol {
            return Ok(x);
        }
        if (fx < 0.0) == lo_negative {
            lo = x;
        } else {
            hi = x;
        }
        let newton = x - fx / dfx;
        let inside = newton.is_finite() && newton > lo.min(hi) && newton < lo.max(hi);
        let next = if inside { newton } else { 0.5 * (lo + hi) };
        if next == x || (hi - lo).abs() <= f64::EPSILON * x.abs().max(f64::MIN_POSITIVE) {
            return Ok(x);
        }
        x = next;
    }
    Ok(x)
}
