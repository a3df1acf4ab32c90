//! JSON and CSV schemas for problems, reports and grid functions.
//!
//! All numbers cross the boundary as `f64`. Documents reject unknown
//! keys. CSV floats are printed with 17 significant digits so repeated
//! runs are byte-identical.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gridfn::GridFunction;
use crate::psi::PsiFunction;
use crate::real::{as_f64, real, Real};
use crate::timescale::{Component, TimeScale};

/// 17-significant-digit float formatting used by every CSV emitter.
pub fn format_sig17(x: f64) -> String {
    format!("{x:.16e}")
}

/// One component of a time-scale document.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub enum ComponentDoc {
    #[serde(rename = "interval")]
    Interval([f64; 2]),
    #[serde(rename = "point")]
    Point(f64),
}

/// Document form of a time scale:
/// `{"components": [{"interval": [lo, hi]}, {"point": x}, ...]}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeScaleDoc {
    pub components: Vec<ComponentDoc>,
}

impl TimeScaleDoc {
    pub fn to_scale<T: Real>(&self) -> Result<TimeScale<T>> {
        let comps = self
            .components
            .iter()
            .map(|c| match *c {
                ComponentDoc::Interval([lo, hi]) => Component::Interval {
                    lo: real(lo),
                    hi: real(hi),
                },
                ComponentDoc::Point(x) => Component::Point(real(x)),
            })
            .collect();
        TimeScale::new(comps)
    }

    pub fn from_scale<T: Real>(ts: &TimeScale<T>) -> Self {
        Self {
            components: ts
                .components()
                .iter()
                .map(|c| match *c {
                    Component::Interval { lo, hi } => {
                        ComponentDoc::Interval([as_f64(lo), as_f64(hi)])
                    }
                    Component::Point(x) => ComponentDoc::Point(as_f64(x)),
                })
                .collect(),
        }
    }
}

/// Named weight function document.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "name", deny_unknown_fields)]
pub enum PsiSpec {
    #[serde(rename = "identity")]
    Identity,
    #[serde(rename = "affine")]
    Affine { slope: f64, offset: f64 },
    #[serde(rename = "power")]
    Power { exponent: f64 },
    #[serde(rename = "exp-affine")]
    ExpAffine { rate: f64, scale: f64, offset: f64 },
    #[serde(rename = "log-shifted")]
    LogShifted { shift: f64 },
}

impl PsiSpec {
    pub fn to_psi<T: Real>(&self) -> Result<PsiFunction<T>> {
        match *self {
            PsiSpec::Identity => Ok(PsiFunction::Identity),
            PsiSpec::Affine { slope, offset } => PsiFunction::Affine {
                slope: real(slope),
                offset: real(offset),
            }
            .validated(),
            PsiSpec::Power { exponent } => PsiFunction::Power {
                exponent: real(exponent),
            }
            .validated(),
            PsiSpec::ExpAffine {
                rate,
                scale,
                offset,
            } => PsiFunction::ExpAffine {
                rate: real(rate),
                scale: real(scale),
                offset: real(offset),
            }
            .validated(),
            PsiSpec::LogShifted { shift } => {
                PsiFunction::LogShifted { shift: real(shift) }.validated()
            }
        }
    }

    /// Parses the compact flag syntax: `identity`, `affine:slope,offset`,
    /// `power:exponent`, `exp-affine:rate,scale,offset`,
    /// `log-shifted:shift`.
    pub fn parse_flag(s: &str) -> Result<Self> {
        let (name, args) = match s.split_once(':') {
            Some((n, a)) => (n, a),
            None => (s, ""),
        };
        let nums: Vec<f64> = if args.is_empty() {
            Vec::new()
        } else {
            args.split(',')
                .map(|p| {
                    p.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::Validation(format!("bad weight parameter '{p}'")))
                })
                .collect::<Result<_>>()?
        };
        let expect = |n: usize| -> Result<()> {
            if nums.len() == n {
                Ok(())
            } else {
                Err(Error::Validation(format!(
                    "weight '{name}' expects {n} parameter(s), got {}",
                    nums.len()
                )))
            }
        };
        match name {
            "identity" => {
                expect(0)?;
                Ok(PsiSpec::Identity)
            }
            "affine" => {
                expect(2)?;
                Ok(PsiSpec::Affine {
                    slope: nums[0],
                    offset: nums[1],
                })
            }
            "power" => {
                expect(1)?;
                Ok(PsiSpec::Power { exponent: nums[0] })
            }
            "exp-affine" => {
                expect(3)?;
                Ok(PsiSpec::ExpAffine {
                    rate: nums[0],
                    scale: nums[1],
                    offset: nums[2],
                })
            }
            "log-shifted" => {
                expect(1)?;
                Ok(PsiSpec::LogShifted { shift: nums[0] })
            }
            other => Err(Error::Validation(format!("unknown weight form '{other}'"))),
        }
    }
}

/// Named scalar function of `t`, used as the integrand of the operator
/// commands and by the audit catalog.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "name", deny_unknown_fields)]
pub enum FuncSpec {
    #[serde(rename = "constant")]
    Constant { value: f64 },
    #[serde(rename = "polynomial")]
    Polynomial { coeffs: Vec<f64> },
    #[serde(rename = "cosine")]
    Cosine { freq: f64 },
    /// `(psi(t) - psi(a))^(delta - 1)` for the power-rule oracles.
    #[serde(rename = "psi-power")]
    PsiPower { delta: f64 },
}

impl FuncSpec {
    /// Materializes the function; `psi` and `a` give psi-power its
    /// context and are ignored by the other forms.
    pub fn to_fn<T: Real>(&self, psi: &PsiFunction<T>, a: T) -> impl Fn(T) -> T + use<T> {
        let spec = self.clone();
        let psi = *psi;
        move |t: T| match &spec {
            FuncSpec::Constant { value } => real(*value),
            FuncSpec::Polynomial { coeffs } => {
                let mut acc = T::zero();
                for &c in coeffs.iter().rev() {
                    acc = acc * t + real(c);
                }
                acc
            }
            FuncSpec::Cosine { freq } => (real::<T>(*freq) * t).cos(),
            FuncSpec::PsiPower { delta } => {
                (psi.eval(t) - psi.eval(a)).powf(real::<T>(*delta) - T::one())
            }
        }
    }
}

/// Named right-hand side `f(t, y)` for the initial value problem.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "name", deny_unknown_fields)]
pub enum RhsSpec {
    #[serde(rename = "constant")]
    Constant { value: f64 },
    /// `intercept + slope_t * t + slope_y * y`.
    #[serde(rename = "linear")]
    Linear {
        intercept: f64,
        slope_t: f64,
        slope_y: f64,
    },
    /// `factor * cos(y)`.
    #[serde(rename = "scaled-cosine")]
    ScaledCosine { factor: f64 },
    /// `rate * y * (1 - y / capacity)`.
    #[serde(rename = "logistic")]
    Logistic { rate: f64, capacity: f64 },
}

impl RhsSpec {
    pub fn to_fn<T: Real>(&self) -> impl Fn(T, T) -> T + Send + Sync + use<T> {
        let spec = self.clone();
        move |t: T, y: T| match &spec {
            RhsSpec::Constant { value } => real(*value),
            RhsSpec::Linear {
                intercept,
                slope_t,
                slope_y,
            } => real::<T>(*intercept) + real::<T>(*slope_t) * t + real::<T>(*slope_y) * y,
            RhsSpec::ScaledCosine { factor } => real::<T>(*factor) * y.cos(),
            RhsSpec::Logistic { rate, capacity } => {
                real::<T>(*rate) * y * (T::one() - y / real(*capacity))
            }
        }
    }
}

/// Input document of the operator commands (`fracint`, `fracderiv`).
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorDoc {
    pub timescale: TimeScaleDoc,
    #[serde(default)]
    pub psi: Option<PsiSpec>,
    #[serde(default)]
    pub f: Option<FuncSpec>,
}

/// Input document of `solve-ivp`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemDoc {
    pub timescale: TimeScaleDoc,
    pub psi: PsiSpec,
    pub alpha: f64,
    pub beta: f64,
    pub rhs: RhsSpec,
    #[serde(rename = "L", default)]
    pub lipschitz: Option<f64>,
    #[serde(rename = "M", default)]
    pub bound: Option<f64>,
}

/// Input document of `synthesize-control`: the solver schema plus the
/// gain, the target and the inverse-functional bound.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControlDoc {
    pub timescale: TimeScaleDoc,
    pub psi: PsiSpec,
    pub alpha: f64,
    pub beta: f64,
    pub rhs: RhsSpec,
    #[serde(rename = "L", default)]
    pub lipschitz: Option<f64>,
    #[serde(rename = "M", default)]
    pub bound: Option<f64>,
    pub b_gain: f64,
    pub y1: f64,
    #[serde(rename = "M_W", default)]
    pub inverse_bound: Option<f64>,
}

/// JSON form of an integration-by-parts audit, including the quadrature
/// conventions in force.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct IbpCheckDoc {
    pub lhs: f64,
    pub rhs: f64,
    pub abs_diff: f64,
    pub rel_diff: f64,
    pub convention_flags: Vec<String>,
}

impl IbpCheckDoc {
    pub fn from_check<T: Real>(chk: &crate::operators::IbpCheck<T>) -> Self {
        Self {
            lhs: as_f64(chk.lhs),
            rhs: as_f64(chk.rhs),
            abs_diff: as_f64(chk.abs_diff),
            rel_diff: as_f64(chk.rel_diff),
            convention_flags: vec![
                "left integral over [a, b)".into(),
                "right integral over (t, b), point mass at s = t excluded".into(),
            ],
        }
    }
}

/// JSON form of a solver report.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SolverReportDoc {
    pub converged: bool,
    pub iterations: usize,
    pub residual: f64,
    pub initial_defect: f64,
    pub contraction_constant: Option<f64>,
    pub radius_rho: Option<f64>,
    pub g_rhs_factor: f64,
    pub g_equation_factor: f64,
    pub diff_history: Vec<f64>,
    pub warnings: Vec<String>,
}

impl SolverReportDoc {
    pub fn from_report<T: Real>(rep: &crate::solver::SolverReport<T>) -> Self {
        Self {
            converged: rep.converged,
            iterations: rep.iterations,
            residual: as_f64(rep.residual),
            initial_defect: as_f64(rep.initial_defect),
            contraction_constant: rep.contraction_constant.map(as_f64),
            radius_rho: rep.radius_rho.map(as_f64),
            g_rhs_factor: as_f64(rep.g_rhs_factor),
            g_equation_factor: as_f64(rep.g_equation_factor),
            diff_history: rep.diff_history.iter().map(|&d| as_f64(d)).collect(),
            warnings: rep.warnings.clone(),
        }
    }
}

/// JSON form of a synthesized control law.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ControlLawDoc {
    pub converged: bool,
    pub rounds: usize,
    pub terminal_value: f64,
    pub terminal_error: f64,
    pub control_sup_norm: f64,
    pub bound: Option<f64>,
    pub warnings: Vec<String>,
}

impl ControlLawDoc {
    pub fn from_law<T: Real>(law: &crate::control::ControlLaw<T>) -> Self {
        Self {
            converged: law.converged,
            rounds: law.rounds,
            terminal_value: as_f64(law.terminal_value),
            terminal_error: as_f64(law.terminal_error),
            control_sup_norm: as_f64(law.control.sup_norm()),
            bound: law.bound.map(as_f64),
            warnings: law.warnings.clone(),
        }
    }
}

/// Writes a grid function as CSV with the fixed float format.
pub fn grid_function_to_csv<T: Real>(f: &GridFunction<T>, value_header: &str) -> String {
    let mut out = String::from("t,");
    out.push_str(value_header);
    out.push('\n');
    for (i, &t) in f.grid().nodes().iter().enumerate() {
        let v = as_f64(f.value(i));
        if v.is_finite() {
            out.push_str(&format_sig17(as_f64(t)));
            out.push(',');
            out.push_str(&format_sig17(v));
            out.push('\n');
        }
    }
    out
}

/// Reads a `t,value` CSV produced by [`grid_function_to_csv`] back onto
/// the grid of the given scale, validating node alignment.
pub fn grid_function_from_csv<T: Real>(
    csv: &str,
    ts: &TimeScale<T>,
    panels: usize,
) -> Result<GridFunction<T>> {
    let grid = Arc::new(ts.build_grid(panels)?);
    let mut values = vec![T::nan(); grid.len()];
    let mut seen = vec![false; grid.len()];
    for (lineno, line) in csv.lines().enumerate() {
        if lineno == 0 {
            if !line.starts_with("t,") {
                return Err(Error::Validation(format!(
                    "CSV header must start with 't,', got '{line}'"
                )));
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let (ts_str, v_str) = line
            .split_once(',')
            .ok_or_else(|| Error::Validation(format!("line {} is not 't,value'", lineno + 1)))?;
        let t: f64 = ts_str
            .trim()
            .parse()
            .map_err(|_| Error::Validation(format!("bad t on line {}", lineno + 1)))?;
        let v: f64 = v_str
            .trim()
            .parse()
            .map_err(|_| Error::Validation(format!("bad value on line {}", lineno + 1)))?;
        let idx = grid.find(real(t)).ok_or_else(|| {
            Error::Validation(format!("t = {t} on line {} is not a grid node", lineno + 1))
        })?;
        values[idx] = real(v);
        seen[idx] = true;
    }
    if let Some(i) = seen.iter().position(|&s| !s) {
        return Err(Error::Validation(format!(
            "grid node t = {} missing from the CSV",
            as_f64(grid.node(i))
        )));
    }
    GridFunction::from_values(&grid, values)
}

/// Strictly-validating JSON decode used by all readers.
pub fn from_json_strict<'a, D: Deserialize<'a>>(s: &'a str) -> Result<D> {
    serde_json::from_str(s).map_err(|e| Error::Validation(e.to_string()))
}
