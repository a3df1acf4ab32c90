//! Picard fixed-point solver for the integral equation equivalent to the
//! fractional initial value problem on `[0, 1]`, with contraction
//! certification, a-priori radius and residual reporting.

use std::sync::Arc;

use crate::beta::{g_factor_with_mode, GFactorPolicy};
use crate::calculus::{kernel_weights, psi_nodes, weighted_norm, KernelSide};
use crate::error::{Error, Result};
use crate::gridfn::GridFunction;
use crate::operators::{rl_integral_left, FracParams};
use crate::psi::PsiFunction;
use crate::real::{as_f64, kahan_dot, real, Real};
use crate::special::gamma_fn;
use crate::timescale::{Grid, TimeScale};

/// Right-hand side `f(t, y)`, shared so derived problems (e.g. a
/// controlled variant) can reuse it.
pub type Rhs<T> = std::sync::Arc<dyn Fn(T, T) -> T + Send + Sync>;

/// The initial value problem on the part of the scale inside `[0, 1]`:
/// a derivative of order `alpha in (0,1)` and type `beta` driven by
/// `rhs`, with the weighted initial condition at 0.
pub struct IVProblem<T> {
    pub scale: TimeScale<T>,
    pub psi: PsiFunction<T>,
    pub params: FracParams<T>,
    pub rhs: Rhs<T>,
    /// Lipschitz constant of `rhs` in `y`, when known.
    pub lipschitz: Option<T>,
    /// Uniform bound on `|rhs|`, when known.
    pub bound: Option<T>,
}

impl<T: Real> IVProblem<T> {
    pub fn new(
        scale: TimeScale<T>,
        psi: PsiFunction<T>,
        params: FracParams<T>,
        rhs: Rhs<T>,
    ) -> Result<Self> {
        if params.n() != 1 {
            return Err(Error::Parameter(
                "the initial value problem uses the order-one family (0 < alpha < 1)".into(),
            ));
        }
        if !(scale.contains(T::zero()) && scale.contains(T::one())) {
            return Err(Error::MissingUnitHull);
        }
        Ok(Self {
            scale,
            psi,
            params,
            rhs,
            lipschitz: None,
            bound: None,
        })
    }

    pub fn with_lipschitz(mut self, l: T) -> Self {
        self.lipschitz = Some(l);
        self
    }

    pub fn with_bound(mut self, m: T) -> Self {
        self.bound = Some(m);
        self
    }
}

/// Discretization and stopping parameters of one solve.
#[derive(Clone, Copy, Debug)]
pub struct SolverConfig<T> {
    pub grid_n: usize,
    pub max_iters: usize,
    /// Weighted sup-norm threshold on the iterate difference.
    pub tol: T,
    /// Damping `d in (0, 1]`: `y <- (1-d) y + d Theta(y)`.
    pub damping: T,
}

impl<T: Real> Default for SolverConfig<T> {
    fn default() -> Self {
        Self {
            grid_n: 512,
            max_iters: 200,
            tol: real(1e-10),
            damping: T::one(),
        }
    }
}

impl<T: Real> SolverConfig<T> {
    fn validate(&self) -> Result<()> {
        if self.grid_n == 0 || self.grid_n > 4096 {
            return Err(Error::Parameter(
                "solver grid resolution must be in 1..=4096".into(),
            ));
        }
        if self.max_iters == 0 {
            return Err(Error::Parameter("max_iters must be at least 1".into()));
        }
        if !(self.tol > T::zero()) {
            return Err(Error::Parameter("tolerance must be positive".into()));
        }
        if !(self.damping > T::zero() && self.damping <= T::one()) {
            return Err(Error::Parameter("damping must lie in (0, 1]".into()));
        }
        Ok(())
    }
}

/// Certified output of a Picard solve.
#[derive(Clone, Debug)]
pub struct SolverReport<T> {
    pub solution: GridFunction<T>,
    /// Fixed-point applications performed.
    pub iterations: usize,
    /// `L (psi(1)-psi(0))^alpha / (g Gamma(alpha+1))`, when `L` is known.
    pub contraction_constant: Option<T>,
    /// A-priori weighted-norm radius, when `M` is known.
    pub radius_rho: Option<T>,
    /// Weighted norm of `y - Theta(y)` at the returned iterate.
    pub residual: T,
    pub converged: bool,
    /// Numerical value of the weighted initial condition at the first
    /// node after zero.
    pub initial_defect: T,
    /// Reported g-factor scaling the right-hand side in the problem
    /// statement.
    pub g_rhs_factor: T,
    /// g-factor dividing the integral equation (unit fallback).
    pub g_equation_factor: T,
    /// Weighted iterate differences, one per iteration.
    pub diff_history: Vec<T>,
    pub warnings: Vec<String>,
}

/// Kernel rows for every evaluation node: row `j` holds the quadrature
/// weights of the integral up to node `j`, truncated at its own length.
struct PicardKernel<T> {
    rows: Vec<Vec<T>>,
    norm: T,
}

impl<T: Real> PicardKernel<T> {
    fn build(grid: &Grid<T>, psi: &PsiFunction<T>, alpha: T, g_eq: T) -> Result<Self> {
        let u = psi_nodes(grid, psi);
        let mut rows = Vec::with_capacity(grid.len());
        let mut buf = Vec::new();
        for j in 0..grid.len() {
            kernel_weights(grid, &u, KernelSide::Left, j, 0, alpha, &mut buf)?;
            let mut row = buf.clone();
            row.truncate(j + 1);
            rows.push(row);
        }
        let norm = g_eq * gamma_fn(alpha)?;
        Ok(Self { rows, norm })
    }

    /// One Picard application: maps nodal rhs values to the next iterate.
    fn apply(&self, rhs_values: &[T], out: &mut [T]) {
        for (j, row) in self.rows.iter().enumerate() {
            out[j] = kahan_dot(row, &rhs_values[..row.len()]) / self.norm;
        }
    }
}

fn weighted_diff<T: Real>(grid: &Grid<T>, u: &[T], gamma: T, a_val: &[T], b_val: &[T]) -> T {
    let e = T::one() - gamma;
    let u0 = u[0];
    let mut sup = if gamma == T::one() {
        (a_val[0] - b_val[0]).abs()
    } else {
        T::zero()
    };
    for i in 1..grid.len() {
        let w = (u[i] - u0).powf(e);
        sup = sup.max((w * (a_val[i] - b_val[i])).abs());
    }
    sup
}

/// Contraction constant of the fixed-point map:
/// `L (psi(1) - psi(0))^alpha / (g Gamma(alpha + 1))`.
pub fn contraction_constant<T: Real>(prob: &IVProblem<T>) -> Result<T> {
    let l = prob.lipschitz.ok_or_else(|| {
        Error::Parameter("contraction constant needs the Lipschitz bound L".into())
    })?;
    let policy = GFactorPolicy::new();
    let (g_eq, _) = equation_g_factor(prob, &policy)?;
    let width = prob.psi.eval(T::one()) - prob.psi.eval(T::zero());
    Ok(l * width.powf(prob.params.alpha()) / (g_eq * gamma_fn(prob.params.alpha() + T::one())?))
}

/// A-priori radius of the invariant ball:
/// `M (psi(1) - psi(0))^(1 - beta(1 - alpha)) / (g Gamma(alpha + 1))`.
pub fn solution_radius<T: Real>(prob: &IVProblem<T>) -> Result<T> {
    let m = prob
        .bound
        .ok_or_else(|| Error::Parameter("solution radius needs the uniform bound M".into()))?;
    let policy = GFactorPolicy::new();
    let (g_eq, _) = equation_g_factor(prob, &policy)?;
    let width = prob.psi.eval(T::one()) - prob.psi.eval(T::zero());
    let expo = T::one() - prob.params.outer_order();
    Ok(m * width.powf(expo) / (g_eq * gamma_fn(prob.params.alpha() + T::one())?))
}

fn equation_g_factor<T: Real>(prob: &IVProblem<T>, policy: &GFactorPolicy) -> Result<(T, T)> {
    let gamma = prob.params.gamma_exponent();
    let (g_eq, _) =
        g_factor_with_mode(&prob.scale, gamma - T::one(), T::one() - gamma, 64, policy)?;
    let (g_rhs, _) = g_factor_with_mode(
        &prob.scale,
        prob.params.alpha(),
        prob.params.outer_order(),
        64,
        policy,
    )?;
    Ok((g_eq, g_rhs))
}

/// Solves the fixed-point equation
/// `y(t) = (1/(g Gamma(alpha))) integral_0^t psi^Delta (psi(t)-psi(s))^(alpha-1) f(s, y(s)) Delta s`
/// by damped Picard iteration from `y = 0`.
pub fn picard_solve<T: Real>(
    prob: &IVProblem<T>,
    cfg: &SolverConfig<T>,
) -> Result<SolverReport<T>> {
    cfg.validate()?;
    let policy = GFactorPolicy::new();
    let (g_eq, g_rhs) = equation_g_factor(prob, &policy)?;
    let domain = prob.scale.clipped(T::zero(), T::one())?;
    let grid = Arc::new(domain.build_grid(cfg.grid_n)?);
    prob.psi.validate_on_grid(&grid)?;
    let kernel = PicardKernel::build(&grid, &prob.psi, prob.params.alpha(), g_eq)?;
    let u = psi_nodes(&grid, &prob.psi);
    let gamma = prob.params.gamma_exponent();

    let n = grid.len();
    let mut y = vec![T::zero(); n];
    let mut rhs_values = vec![T::zero(); n];
    let mut next = vec![T::zero(); n];
    let mut diff_history = Vec::new();
    let mut converged = false;
    let mut iterations = 0;

    while iterations < cfg.max_iters {
        for i in 0..n {
            let v = (prob.rhs)(grid.node(i), y[i]);
            if !v.is_finite() {
                return Err(Error::NonFinite {
                    stage: "rhs",
                    t: as_f64(grid.node(i)),
                });
            }
            rhs_values[i] = v;
        }
        kernel.apply(&rhs_values, &mut next);
        let diff = weighted_diff(&grid, &u, gamma, &next, &y);
        diff_history.push(diff);
        iterations += 1;
        let d = cfg.damping;
        for i in 0..n {
            y[i] = (T::one() - d) * y[i] + d * next[i];
        }
        if diff <= cfg.tol {
            converged = true;
            break;
        }
    }

    let solution = GridFunction::from_values(&grid, y.clone())?;

    // Residual: one more application at the accepted iterate.
    for i in 0..n {
        rhs_values[i] = (prob.rhs)(grid.node(i), y[i]);
    }
    kernel.apply(&rhs_values, &mut next);
    let residual = weighted_diff(&grid, &u, gamma, &y, &next);

    // Weighted initial condition, checked just after the origin.
    let inner = prob.params.inner_order();
    let initial_defect = if n < 2 {
        T::zero()
    } else if inner == T::zero() {
        solution.value(0).abs()
    } else {
        rl_integral_left(&solution, &prob.psi, inner, grid.node(0), grid.node(1))?.abs()
    };

    let mut warnings = policy.take_warnings();
    if !converged {
        warnings.push(format!(
            "no convergence within {} iterations (last difference {:e})",
            cfg.max_iters,
            as_f64(*diff_history.last().unwrap())
        ));
    }

    let contraction = prob
        .lipschitz
        .map(|_| contraction_constant(prob))
        .transpose()?;
    let radius = prob.bound.map(|_| solution_radius(prob)).transpose()?;

    Ok(SolverReport {
        solution,
        iterations,
        contraction_constant: contraction,
        radius_rho: radius,
        residual,
        converged,
        initial_defect,
        g_rhs_factor: g_rhs,
        g_equation_factor: g_eq,
        diff_history,
        warnings,
    })
}

/// Fixed-point defect of a candidate solution: the weighted norm of
/// `y - Theta(y)` on the candidate's own grid.
pub fn residual<T: Real>(prob: &IVProblem<T>, y: &GridFunction<T>) -> Result<T> {
    let policy = GFactorPolicy::new();
    let (g_eq, _) = equation_g_factor(prob, &policy)?;
    let grid = y.grid();
    let kernel = PicardKernel::build(grid, &prob.psi, prob.params.alpha(), g_eq)?;
    let rhs_values: Vec<T> = (0..grid.len())
        .map(|i| (prob.rhs)(grid.node(i), y.value(i)))
        .collect();
    let mut theta = vec![T::zero(); grid.len()];
    kernel.apply(&rhs_values, &mut theta);
    let theta = GridFunction::from_values(grid, theta)?;
    let diff = y.zip_with(&theta, |a, b| a - b);
    weighted_norm(&diff, &prob.psi, prob.params.gamma_exponent(), grid.node(0))
}
