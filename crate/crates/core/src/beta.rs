//! Beta function on time scales and the g-factor that relates operator
//! compositions to the classical Beta.

use std::sync::Mutex;

use crate::error::{Error, Result};
use crate::real::{as_f64, real, KahanSum, Real};
use crate::special::beta_classical;
use crate::timescale::{Component, TimeScale};

/// Value of the time-scale Beta integral, which can diverge when a
/// scattered endpoint meets an exponent below one.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BetaTs<T> {
    Finite(T),
    Divergent,
}

impl<T: Real> BetaTs<T> {
    pub fn finite(self) -> Option<T> {
        match self {
            BetaTs::Finite(v) => Some(v),
            BetaTs::Divergent => None,
        }
    }

    pub fn is_divergent(&self) -> bool {
        matches!(self, BetaTs::Divergent)
    }
}

/// `integral_{x0}^{x1} x^(e-1) dx` for `0 <= x0 < x1`.
fn moment0<T: Real>(x0: T, x1: T, e: T) -> BetaTs<T> {
    if e <= T::zero() && x0 == T::zero() {
        return BetaTs::Divergent;
    }
    if e == T::zero() {
        return BetaTs::Finite((x1 / x0).ln());
    }
    let d = if x0 == T::zero() {
        x1.powf(e)
    } else {
        -x1.powf(e) * (e * (x0 / x1).ln()).exp_m1()
    };
    BetaTs::Finite(d / e)
}

/// Beta function on time scales:
/// `B_{a,b}(p, q) = integral_a^b (s - a)^(q-1) (b - s)^(p-1) Delta s`.
///
/// Scattered points contribute exact terms; continuous panels use product
/// integration against the endpoint singularity nearer to the panel, with
/// the other factor interpolated linearly. A non-finite term or a
/// non-integrable panel yields [`BetaTs::Divergent`].
pub fn beta_timescale<T: Real>(
    ts: &TimeScale<T>,
    a: T,
    b: T,
    p: T,
    q: T,
    panels: usize,
) -> Result<BetaTs<T>> {
    if !(as_f64(p).is_finite() && as_f64(q).is_finite()) {
        return Err(Error::Parameter("Beta exponents must be finite".into()));
    }
    let clipped = ts.clipped(a, b)?;
    // A single panel cannot separate the two endpoint singularities.
    let grid = clipped.build_grid(panels.max(2))?;
    let qm1 = q - T::one();
    let pm1 = p - T::one();
    let mid = (a + b) * real::<T>(0.5);
    let mut acc = KahanSum::new();
    let last = grid.len() - 1;
    for i in 0..last {
        let s = grid.node(i);
        if grid.is_right_scattered(i) {
            let term = (s - a).powf(qm1) * (b - s).powf(pm1) * grid.mu(i);
            if !term.is_finite() {
                return Ok(BetaTs::Divergent);
            }
            acc.add(term);
        } else if grid.is_panel_start(i) {
            let s1 = grid.node(i + 1);
            let h = s1 - s;
            let contribution = if (s + s1) * real::<T>(0.5) <= mid {
                // Kernel (s - a)^(q-1), smooth factor (b - s)^(p-1).
                let g0 = (b - s).powf(pm1);
                let g1 = (b - s1).powf(pm1);
                let x0 = s - a;
                let x1 = s1 - a;
                let (m0, mx) = match (moment0(x0, x1, q), moment0(x0, x1, q + T::one())) {
                    (BetaTs::Finite(m0), BetaTs::Finite(m)) => (m0, m),
                    _ => return Ok(BetaTs::Divergent),
                };
                let m1 = mx - x0 * m0;
                g0 * m0 + (g1 - g0) / h * m1
            } else {
                // Kernel (b - s)^(p-1), smooth factor (s - a)^(q-1).
                let g0 = (s - a).powf(qm1);
                let g1 = (s1 - a).powf(qm1);
                let y1 = b - s; // larger kernel coordinate
                let y0 = b - s1;
                let (m0, my) = match (moment0(y0, y1, p), moment0(y0, y1, p + T::one())) {
                    (BetaTs::Finite(m0), BetaTs::Finite(m)) => (m0, m),
                    _ => return Ok(BetaTs::Divergent),
                };
                // s - s_i = y1 - y, integrated against y^(p-1).
                let m1 = y1 * m0 - my;
                g0 * m0 + (g1 - g0) / h * m1
            };
            if !contribution.is_finite() {
                return Ok(BetaTs::Divergent);
            }
            acc.add(contribution);
        }
    }
    Ok(BetaTs::Finite(acc.total()))
}

/// How a g-factor evaluation was resolved.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GFactorMode {
    /// Ratio of the time-scale Beta over the classical Beta.
    Computed,
    /// Unit value substituted for a non-convergent or invalid ratio.
    UnitFallback,
}

/// Policy for g-factor evaluation: compute the Beta ratio when it
/// converges, substitute the exact real-line limit 1 otherwise, and log
/// each substitution.
#[derive(Debug, Default)]
pub struct GFactorPolicy {
    warnings: Mutex<Vec<String>>,
}

impl GFactorPolicy {
    pub fn new() -> Self {
        Self::default()
    }

    fn warn(&self, msg: String) {
        self.warnings
            .lock()
            .expect("warning log poisoned")
            .push(msg);
    }

    pub fn warnings(&self) -> Vec<String> {
        self.warnings.lock().expect("warning log poisoned").clone()
    }

    pub fn take_warnings(&self) -> Vec<String> {
        std::mem::take(&mut *self.warnings.lock().expect("warning log poisoned"))
    }
}

/// g-factor `B_{0,1}(p, q) / B(p, q)` over the part of the scale inside
/// `[0, 1]`, with the unit fallback policy.
///
/// Returns exactly 1 when the scale restricted to `[0, 1]` is the full
/// interval, when either exponent is non-positive, or when the time-scale
/// Beta diverges (scattered origin with `q < 1`); fallbacks are logged.
pub fn g_factor<T: Real>(
    ts: &TimeScale<T>,
    p: T,
    q: T,
    panels: usize,
    policy: &GFactorPolicy,
) -> Result<T> {
    let (value, _) = g_factor_with_mode(ts, p, q, panels, policy)?;
    Ok(value)
}

/// As [`g_factor`], also reporting how the value was obtained.
pub fn g_factor_with_mode<T: Real>(
    ts: &TimeScale<T>,
    p: T,
    q: T,
    panels: usize,
    policy: &GFactorPolicy,
) -> Result<(T, GFactorMode)> {
    let zero = T::zero();
    let one = T::one();
    if !(ts.contains(zero) && ts.contains(one)) {
        return Err(Error::MissingUnitHull);
    }
    if p <= zero || q <= zero {
        policy.warn(format!(
            "g-factor({}, {}) outside the convergent domain; using 1",
            as_f64(p),
            as_f64(q)
        ));
        return Ok((one, GFactorMode::UnitFallback));
    }
    let clipped = ts.clipped(zero, one)?;
    if clipped.components() == [Component::Interval { lo: zero, hi: one }] {
        // Real-line case: the two Beta functions coincide.
        return Ok((one, GFactorMode::Computed));
    }
    if clipped.graininess(zero)? > zero && q < one {
        policy.warn(format!(
            "g-factor({}, {}) diverges at the scattered origin; using 1",
            as_f64(p),
            as_f64(q)
        ));
        return Ok((one, GFactorMode::UnitFallback));
    }
    match beta_timescale(&clipped, zero, one, p, q, panels)? {
        BetaTs::Finite(bts) => Ok((bts / beta_classical(p, q)?, GFactorMode::Computed)),
        BetaTs::Divergent => {
            policy.warn(format!(
                "time-scale Beta({}, {}) diverged; using 1",
                as_f64(p),
                as_f64(q)
            ));
            Ok((one, GFactorMode::UnitFallback))
        }
    }
}
