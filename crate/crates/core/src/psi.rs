//! Strictly increasing weight functions and their scale derivatives.
//!
//! Weights are specified by name plus parameters rather than as arbitrary
//! closures: this keeps monotonicity checkable, inverses available in
//! closed form, and runs reproducible.

use crate::error::{Error, Result};
use crate::real::{as_f64, real, Real};
use crate::timescale::Grid;

/// Named family of weight functions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PsiFunction<T> {
    /// `psi(x) = x`.
    Identity,
    /// `psi(x) = slope * x + offset`, `slope > 0`.
    Affine { slope: T, offset: T },
    /// `psi(x) = x^exponent`, `exponent > 0`, domain `x >= 0`.
    Power { exponent: T },
    /// `psi(x) = scale * exp(rate * x) + offset`, `scale * rate > 0`.
    ExpAffine { rate: T, scale: T, offset: T },
    /// `psi(x) = ln(x + shift)`, domain `x + shift > 0`.
    LogShifted { shift: T },
}

impl<T: Real> PsiFunction<T> {
    /// Validates the form parameters themselves (domain checks against a
    /// concrete grid happen in [`PsiFunction::validate_on_grid`]).
    pub fn validated(self) -> Result<Self> {
        match self {
            PsiFunction::Affine { slope, .. } if slope <= T::zero() => Err(Error::Parameter(
                "affine weight needs a positive slope".into(),
            )),
            PsiFunction::Power { exponent } if exponent <= T::zero() => Err(Error::Parameter(
                "power weight needs a positive exponent".into(),
            )),
            PsiFunction::ExpAffine { rate, scale, .. } if rate * scale <= T::zero() => Err(
                Error::Parameter("exponential weight needs rate * scale > 0".into()),
            ),
            other => Ok(other),
        }
    }

    pub fn eval(&self, x: T) -> T {
        match *self {
            PsiFunction::Identity => x,
            PsiFunction::Affine { slope, offset } => slope * x + offset,
            PsiFunction::Power { exponent } => x.powf(exponent),
            PsiFunction::ExpAffine {
                rate,
                scale,
                offset,
            } => scale * (rate * x).exp() + offset,
            PsiFunction::LogShifted { shift } => (x + shift).ln(),
        }
    }

    /// Classical pointwise derivative `psi'`.
    pub fn deriv(&self, x: T) -> T {
        match *self {
            PsiFunction::Identity => T::one(),
            PsiFunction::Affine { slope, .. } => slope,
            PsiFunction::Power { exponent } => exponent * x.powf(exponent - T::one()),
            PsiFunction::ExpAffine { rate, scale, .. } => scale * rate * (rate * x).exp(),
            PsiFunction::LogShifted { shift } => (x + shift).recip(),
        }
    }

    /// Closed-form inverse on the increasing branch.
    pub fn invert(&self, y: T) -> T {
        match *self {
            PsiFunction::Identity => y,
            PsiFunction::Affine { slope, offset } => (y - offset) / slope,
            PsiFunction::Power { exponent } => y.powf(exponent.recip()),
            PsiFunction::ExpAffine {
                rate,
                scale,
                offset,
            } => ((y - offset) / scale).ln() / rate,
            PsiFunction::LogShifted { shift } => y.exp() - shift,
        }
    }

    pub fn label(&self) -> String {
        match *self {
            PsiFunction::Identity => "identity".into(),
            PsiFunction::Affine { slope, offset } => format!("affine({slope}, {offset})"),
            PsiFunction::Power { exponent } => format!("power({exponent})"),
            PsiFunction::ExpAffine {
                rate,
                scale,
                offset,
            } => format!("exp-affine({rate}, {scale}, {offset})"),
            PsiFunction::LogShifted { shift } => format!("log-shifted({shift})"),
        }
    }

    /// Delta derivative of the weight at grid node `i`: the jump quotient
    /// at right-scattered nodes, the classical derivative at right-dense
    /// ones.
    pub fn delta_deriv(&self, grid: &Grid<T>, i: usize) -> T {
        let t = grid.node(i);
        let mu = grid.mu(i);
        if mu > T::zero() {
            (self.eval(grid.sigma(i)) - self.eval(t)) / mu
        } else {
            self.deriv(t)
        }
    }

    /// Checks strict monotonicity of the weight over the grid nodes and
    /// positivity of the classical derivative at panel nodes interior to
    /// an interval. Endpoint nodes may have a vanishing slope (e.g. a
    /// power weight at zero); the difference quotients used by the
    /// operators stay finite there.
    pub fn validate_on_grid(&self, grid: &Grid<T>) -> Result<()> {
        let nodes = grid.nodes();
        for i in 0..nodes.len() {
            let v = self.eval(nodes[i]);
            if !v.is_finite() {
                return Err(Error::Parameter(format!(
                    "weight {} is not finite at t = {}",
                    self.label(),
                    as_f64(nodes[i])
                )));
            }
            if i + 1 < nodes.len() && self.eval(nodes[i + 1]) <= v {
                return Err(Error::Parameter(format!(
                    "weight {} is not strictly increasing between t = {} and t = {}",
                    self.label(),
                    as_f64(nodes[i]),
                    as_f64(nodes[i + 1])
                )));
            }
            if grid.has_panel_left(i) && grid.is_panel_start(i) {
                let d = self.deriv(nodes[i]);
                if !(d > T::zero()) || !d.is_finite() {
                    return Err(Error::Parameter(format!(
                        "weight {} has a non-positive derivative at interior node t = {}",
                        self.label(),
                        as_f64(nodes[i])
                    )));
                }
            }
        }
        Ok(())
    }
}

/// `psi(x) = x^2` helper used across tests.
pub fn square<T: Real>() -> PsiFunction<T> {
    PsiFunction::Power {
        exponent: real(2.0),
    }
}

/// `psi(x) = e^x - 1` helper used across tests.
pub fn exp_minus_one<T: Real>() -> PsiFunction<T> {
    PsiFunction::ExpAffine {
        rate: T::one(),
        scale: T::one(),
        offset: -T::one(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::timescale::TimeScale;

    #[test]
    fn derivative_matches_finite_differences() {
        let forms: Vec<PsiFunction<f64>> = vec![
            PsiFunction::Identity,
            PsiFunction::Affine {
                slope: 2.0,
                offset: -1.0,
            },
            PsiFunction::Power { exponent: 2.5 },
            exp_minus_one(),
            PsiFunction::LogShifted { shift: 1.5 },
        ];
        let h = 1e-6;
        for psi in forms {
            for &x in &[0.3, 0.7, 1.1] {
                let fd = (psi.eval(x + h) - psi.eval(x - h)) / (2.0 * h);
                assert!(
                    (fd - psi.deriv(x)).abs() < 1e-6 * (1.0 + psi.deriv(x).abs()),
                    "{} at {x}",
                    psi.label()
                );
            }
        }
    }

    #[test]
    fn inverse_round_trips() {
        let forms: Vec<PsiFunction<f64>> = vec![
            PsiFunction::Affine {
                slope: 3.0,
                offset: 0.5,
            },
            PsiFunction::Power { exponent: 2.0 },
            exp_minus_one(),
            PsiFunction::LogShifted { shift: 2.0 },
        ];
        for psi in forms {
            for &x in &[0.1, 0.5, 0.9] {
                let back = psi.invert(psi.eval(x));
                assert!((back - x).abs() < 1e-12, "{}", psi.label());
            }
        }
    }

    #[test]
    fn delta_derivative_uses_jump_quotient_when_scattered() {
        let z = TimeScale::<f64>::integers(0, 4).unwrap();
        let g = z.build_grid(1).unwrap();
        let psi = PsiFunction::Affine {
            slope: 2.0,
            offset: 0.0,
        };
        // (psi(sigma) - psi(t)) / mu = 2 on the integers.
        assert_eq!(psi.delta_deriv(&g, 1), 2.0);
        let cont = TimeScale::interval(0.0, 1.0).unwrap();
        let g = cont.build_grid(4).unwrap();
        assert_eq!(psi.delta_deriv(&g, 2), 2.0);
    }

    #[test]
    fn square_weight_passes_grid_validation_at_zero() {
        let cont = TimeScale::interval(0.0, 1.0).unwrap();
        let g = cont.build_grid(16).unwrap();
        square::<f64>().validate_on_grid(&g).unwrap();
    }

    #[test]
    fn decreasing_weight_is_rejected() {
        let cont = TimeScale::interval(0.0, 1.0).unwrap();
        let g = cont.build_grid(4).unwrap();
        let bad = PsiFunction::Affine {
            slope: -1.0,
            offset: 0.0,
        };
        assert!(bad.validated().is_err());
        assert!(bad.validate_on_grid(&g).is_err());
    }

    #[test]
    fn log_weight_rejects_bad_domain() {
        let cont = TimeScale::interval(0.0, 1.0).unwrap();
        let g = cont.build_grid(4).unwrap();
        let bad = PsiFunction::LogShifted { shift: 0.0 };
        assert!(bad.validate_on_grid(&g).is_err());
    }
}
