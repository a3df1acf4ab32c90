//! Gamma and Beta plumbing shared by the operators and the brute-force
//! oracles.
//!
//! Evaluation happens in `f64` through `statrs` and is converted to the
//! working scalar type; the tabulated accuracy checks live in the tests
//! below.

use statrs::function::gamma as sf_gamma;

use crate::error::{Error, Result};
use crate::real::{as_f64, real, Real};

/// Gamma function with pole detection at non-positive integers.
pub fn gamma_fn<T: Real>(x: T) -> Result<T> {
    let xf = as_f64(x);
    if !xf.is_finite() {
        return Err(Error::Parameter(format!("gamma argument {xf} not finite")));
    }
    if xf <= 0.0 && xf == xf.floor() {
        return Err(Error::GammaPole { x: xf });
    }
    Ok(real(sf_gamma::gamma(xf)))
}

/// Natural log of |Gamma(x)| for positive arguments.
fn ln_gamma(x: f64) -> f64 {
    sf_gamma::ln_gamma(x)
}

/// Classical Beta function `B(p, q)` for positive arguments.
pub fn beta_classical<T: Real>(p: T, q: T) -> Result<T> {
    let (pf, qf) = (as_f64(p), as_f64(q));
    if !(pf > 0.0 && qf > 0.0) {
        return Err(Error::Parameter(format!(
            "classical Beta needs positive arguments, got ({pf}, {qf})"
        )));
    }
    Ok(real(
        (ln_gamma(pf) + ln_gamma(qf) - ln_gamma(pf + qf)).exp(),
    ))
}

/// Generalized binomial coefficient `C(-alpha, k)` evaluated through the
/// gamma-ratio identity `(-1)^k Gamma(alpha + k) / (Gamma(alpha) k!)`,
/// which avoids alternating-sign cancellation.
pub fn binom_neg<T: Real>(alpha: T, k: usize) -> Result<T> {
    let a = as_f64(alpha);
    if a <= 0.0 {
        return Err(Error::Parameter(format!(
            "binomial identity needs alpha > 0, got {a}"
        )));
    }
    let ln = ln_gamma(a + k as f64) - ln_gamma(a) - ln_gamma(k as f64 + 1.0);
    let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
    Ok(real(sign * ln.exp()))
}
