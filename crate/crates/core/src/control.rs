//! Explicit control synthesis for the controlled problem: minimum-norm
//! inversion of the rank-one terminal functional, drift coupling through
//! the solver, terminal verification and the controllability check.

use std::sync::Arc;

use crate::beta::GFactorPolicy;
use crate::calculus::{delta_measure_weights, kernel_weights, psi_nodes, KernelSide};
use crate::error::{Error, Result};
use crate::gridfn::GridFunction;
use crate::psi::PsiFunction;
use crate::real::{kahan_dot, Real};
use crate::solver::{picard_solve, solution_radius, IVProblem, SolverConfig, SolverReport};
use crate::special::gamma_fn;
use crate::timescale::Grid;

/// The controlled problem: the base dynamics plus a scalar input gain,
/// a terminal target and an optional bound on the inverse functional.
pub struct ControlProblem<T> {
    pub base: IVProblem<T>,
    /// Scalar gain of the input operator; its magnitude is the bound
    /// `M_B`.
    pub b_gain: T,
    /// Prescribed terminal value at t = 1.
    pub target: T,
    /// Bound `M_W` on the inverse of the terminal functional.
    pub inverse_bound: Option<T>,
}

/// Synthesized control with its certificates.
#[derive(Clone, Debug)]
pub struct ControlLaw<T> {
    pub control: GridFunction<T>,
    /// Magnitude bound from [`control_bound`], when computable.
    pub bound: Option<T>,
    /// Terminal value of the re-solved controlled trajectory.
    pub terminal_value: T,
    pub terminal_error: T,
    /// Drift/synthesis coupling rounds performed.
    pub rounds: usize,
    pub converged: bool,
    pub warnings: Vec<String>,
}

/// Verdict of the controllability condition.
#[derive(Clone, Copy, Debug)]
pub struct ControllabilityCheck<T> {
    /// `M (psi(1)-psi(0))^(1-beta(1-alpha)) / (g Gamma(alpha+1))`.
    pub value: T,
    /// Strict inequality `value < 1`.
    pub satisfied: bool,
}

fn equation_g<T: Real>(prob: &ControlProblem<T>) -> Result<T> {
    let policy = GFactorPolicy::new();
    let gamma = prob.base.params.gamma_exponent();
    let (g, _) = crate::beta::g_factor_with_mode(
        &prob.base.scale,
        gamma - T::one(),
        T::one() - gamma,
        64,
        &policy,
    )?;
    Ok(g)
}

/// Quadrature coefficients of the terminal functional on a grid: the
/// functional applied to nodal values `u` is `dot(coeffs, u)`. Also
/// returns the terminal node index.
fn terminal_coefficients<T: Real>(
    grid: &Grid<T>,
    psi: &PsiFunction<T>,
    alpha: T,
    g_eq: T,
    b_gain: T,
) -> Result<(Vec<T>, usize)> {
    let it = grid.len() - 1;
    let u = psi_nodes(grid, psi);
    let mut w = Vec::new();
    kernel_weights(grid, &u, KernelSide::Left, it, 0, alpha, &mut w)?;
    let scale = b_gain / (g_eq * gamma_fn(alpha)?);
    for wi in &mut w {
        *wi = *wi * scale;
    }
    Ok((w, it))
}

/// The terminal functional at `t = 1`:
/// `(1/(g Gamma(alpha))) integral_0^1 psi^Delta (psi(1)-psi(s))^(alpha-1) (b u)(s) Delta s`.
pub fn w_functional<T: Real>(prob: &ControlProblem<T>, u: &GridFunction<T>) -> Result<T> {
    let g_eq = equation_g(prob)?;
    let grid = u.grid();
    let one = grid.find(T::one()).ok_or(Error::MissingUnitHull)?;
    if one != grid.len() - 1 {
        return Err(Error::Validation(
            "control grid must end at the terminal point 1".into(),
        ));
    }
    let (coeffs, _) = terminal_coefficients(
        grid,
        &prob.base.psi,
        prob.base.params.alpha(),
        g_eq,
        prob.b_gain,
    )?;
    Ok(kahan_dot(&coeffs, u.values()))
}

/// The minimum-norm inversion kernel: nodal direction `w_hat` such that
/// the least-`L^2(Delta)`-norm solution of `W u = d` is `u = w_hat * d`,
/// plus the squared norm `<w_hat, w_hat>` under the Delta measure.
/// Published for the optimality and bound-soundness audits.
pub fn min_norm_kernel<T: Real>(prob: &ControlProblem<T>, grid: &Grid<T>) -> Result<(Vec<T>, T)> {
    if prob.b_gain == T::zero() {
        return Err(Error::Parameter(
            "terminal functional is not invertible with zero gain".into(),
        ));
    }
    let g_eq = equation_g(prob)?;
    let (coeffs, it) = terminal_coefficients(
        grid,
        &prob.base.psi,
        prob.base.params.alpha(),
        g_eq,
        prob.b_gain,
    )?;
    let mut measure = Vec::new();
    delta_measure_weights(grid, 0, it, &mut measure);
    // Minimize sum m_i u_i^2 subject to sum c_i u_i = d:
    // u_i = (c_i / m_i) d / S with S = sum c_j^2 / m_j.
    let mut s = T::zero();
    let mut dir = vec![T::zero(); grid.len()];
    for i in 0..grid.len() {
        if measure[i] > T::zero() && coeffs[i] != T::zero() {
            s = s + coeffs[i] * coeffs[i] / measure[i];
            dir[i] = coeffs[i] / measure[i];
        }
    }
    if s <= T::zero() {
        return Err(Error::Parameter(
            "terminal functional vanishes on the grid; cannot invert".into(),
        ));
    }
    for v in &mut dir {
        *v = *v / s;
    }
    // Squared Delta-L2 norm of dir equals 1/S.
    Ok((dir, s.recip()))
}

/// Synthesizes the steering control by coupling the minimum-norm
/// inversion with the solver: alternate solve-with-current-control and
/// re-synthesize until the control stabilizes, then verify the terminal
/// value by one final controlled solve.
pub fn synthesize_control<T: Real>(
    prob: &ControlProblem<T>,
    cfg: &SolverConfig<T>,
) -> Result<ControlLaw<T>> {
    if prob.b_gain == T::zero() {
        return Err(Error::Parameter(
            "terminal functional is not invertible with zero gain".into(),
        ));
    }
    let g_eq = equation_g(prob)?;
    let domain = prob.base.scale.clipped(T::zero(), T::one())?;
    let grid = Arc::new(domain.build_grid(cfg.grid_n)?);
    prob.base.psi.validate_on_grid(&grid)?;
    let (dir, _) = min_norm_kernel(prob, &grid)?;
    let (raw_kernel, it) = {
        let u = psi_nodes(&grid, &prob.base.psi);
        let it = grid.len() - 1;
        let mut w = Vec::new();
        kernel_weights(
            &grid,
            &u,
            KernelSide::Left,
            it,
            0,
            prob.base.params.alpha(),
            &mut w,
        )?;
        (w, it)
    };
    if grid.find(T::one()) != Some(it) {
        return Err(Error::MissingUnitHull);
    }
    let drift_norm = g_eq * gamma_fn(prob.base.params.alpha())?;

    let mut warnings = Vec::new();
    let mut u_now = vec![T::zero(); grid.len()];
    let mut rounds = 0usize;
    let mut converged = false;
    let mut last_report: Option<SolverReport<T>> = None;
    const MAX_ROUNDS: usize = 50;

    while rounds < MAX_ROUNDS {
        rounds += 1;
        let report = solve_with_control(prob, cfg, &grid, &u_now)?;
        if !report.converged {
            warnings.push(format!("inner solve did not converge in round {rounds}"));
        }
        // Drift of the uncontrolled part along the current trajectory.
        let y = &report.solution;
        let fv: Vec<T> = (0..grid.len())
            .map(|i| (prob.base.rhs)(grid.node(i), y.value(i)))
            .collect();
        let drift = kahan_dot(&raw_kernel, &fv) / drift_norm;
        let d = prob.target - drift;
        let u_next: Vec<T> = dir.iter().map(|&w| w * d).collect();
        let delta = u_next
            .iter()
            .zip(&u_now)
            .fold(T::zero(), |m, (&a, &b)| m.max((a - b).abs()));
        let scale = u_now.iter().fold(T::one(), |m, &v| m.max(v.abs()));
        u_now = u_next;
        last_report = Some(report);
        if delta <= cfg.tol * scale {
            converged = true;
            break;
        }
    }
    if !converged {
        warnings.push(format!(
            "control synthesis did not stabilize within {MAX_ROUNDS} rounds"
        ));
    }

    // Final verification with the synthesized control.
    let final_report = solve_with_control(prob, cfg, &grid, &u_now)?;
    if !final_report.converged {
        warnings.push("verification solve did not converge".into());
    }
    let terminal_value = final_report.solution.value(it);
    let terminal_error = (terminal_value - prob.target).abs();
    drop(last_report);

    let bound = match (prob.inverse_bound, prob.base.bound) {
        (Some(_), Some(_)) => Some(control_bound_value(prob, g_eq)?),
        _ => None,
    };

    Ok(ControlLaw {
        control: GridFunction::from_values(&grid, u_now)?,
        bound,
        terminal_value,
        terminal_error,
        rounds,
        converged,
        warnings,
    })
}

/// Solves the base problem with the rhs augmented by `b * u` at the
/// nodes of the synthesis grid.
fn solve_with_control<T: Real>(
    prob: &ControlProblem<T>,
    cfg: &SolverConfig<T>,
    grid: &Arc<Grid<T>>,
    u_values: &[T],
) -> Result<SolverReport<T>> {
    let grid_ref = Arc::clone(grid);
    let u_owned = u_values.to_vec();
    let b = prob.b_gain;
    let base_rhs = Arc::clone(&prob.base.rhs);
    let rhs: crate::solver::Rhs<T> = Arc::new(move |t: T, y: T| {
        let i = grid_ref.find(t).expect("rhs evaluated off the grid");
        base_rhs(t, y) + b * u_owned[i]
    });
    let controlled = IVProblem {
        scale: prob.base.scale.clone(),
        psi: prob.base.psi,
        params: prob.base.params,
        rhs,
        lipschitz: prob.base.lipschitz,
        bound: None,
    };
    picard_solve(&controlled, cfg)
}

fn control_bound_value<T: Real>(prob: &ControlProblem<T>, g_eq: T) -> Result<T> {
    let m_w = prob
        .inverse_bound
        .ok_or_else(|| Error::Parameter("control bound needs M_W".into()))?;
    let m = prob
        .base
        .bound
        .ok_or_else(|| Error::Parameter("control bound needs the rhs bound M".into()))?;
    let psi = &prob.base.psi;
    let width = psi.eval(T::one()) - psi.eval(T::zero());
    let alpha = prob.base.params.alpha();
    Ok(m_w * (prob.target.abs() + m * width.powf(alpha) / (g_eq * gamma_fn(alpha + T::one())?)))
}

/// Magnitude estimate for the synthesized control:
/// `M_W (|y1| + M (psi(1)-psi(0))^alpha / (g Gamma(alpha+1)))`.
pub fn control_bound<T: Real>(prob: &ControlProblem<T>, _law: &ControlLaw<T>) -> Result<T> {
    let g_eq = equation_g(prob)?;
    control_bound_value(prob, g_eq)
}

/// Evaluates the controllability condition
/// `M (psi(1)-psi(0))^(1-beta(1-alpha)) / (g Gamma(alpha+1)) < 1`.
pub fn controllability_condition<T: Real>(
    prob: &ControlProblem<T>,
) -> Result<ControllabilityCheck<T>> {
    if prob.base.bound.is_none() {
        return Err(Error::Parameter(
            "controllability condition needs the rhs bound M".into(),
        ));
    }
    let value = solution_radius(&prob.base)?;
    Ok(ControllabilityCheck {
        value,
        satisfied: value < T::one(),
    })
}
