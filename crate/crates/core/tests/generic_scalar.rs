//! The numeric kernels are generic over the scalar type; exercise the
//! f32 instantiation end to end on a small problem.

use std::sync::Arc;

use tsfrac::gridfn::GridFunction;
use tsfrac::operators::{hilfer_derivative, rl_integral_left, FracParams};
use tsfrac::psi::PsiFunction;
use tsfrac::solver::{picard_solve, IVProblem, SolverConfig};
use tsfrac::timescale::TimeScale;

#[test]
fn single_precision_integral_tracks_the_closed_form() {
    let ts = TimeScale::<f32>::interval(0.0, 1.0).unwrap();
    let grid = Arc::new(ts.build_grid(128).unwrap());
    let one = GridFunction::sample(&grid, |_| 1.0f32);
    let v = rl_integral_left(&one, &PsiFunction::Identity, 0.5f32, 0.0, 1.0).unwrap();
    // t^alpha / Gamma(alpha + 1) at single precision.
    assert!((v - 1.128_379_2f32).abs() < 1e-4, "got {v}");

    let f = GridFunction::sample(&grid, |t: f32| t);
    let p = FracParams::<f32>::order_one(0.5, 0.5).unwrap();
    let d = hilfer_derivative(&f, &PsiFunction::Identity, &p, 0.0, 1.0).unwrap();
    assert!((d - 1.128_379_2f32).abs() < 1e-3, "got {d}");
}

#[test]
fn single_precision_solver_converges() {
    let prob = IVProblem::<f32>::new(
        TimeScale::interval(0.0f32, 1.0).unwrap(),
        PsiFunction::Identity,
        FracParams::order_one(0.5f32, 1.0).unwrap(),
        Arc::new(|_, y: f32| 0.5 * y.cos()),
    )
    .unwrap()
    .with_lipschitz(0.5);
    let cfg = SolverConfig::<f32> {
        grid_n: 64,
        tol: 1e-5,
        ..SolverConfig::default()
    };
    let rep = picard_solve(&prob, &cfg).unwrap();
    assert!(rep.converged);
    assert!(rep.residual <= 1e-4);
    // Same problem at double precision stays within f32 tolerance.
    let prob64 = IVProblem::<f64>::new(
        TimeScale::interval(0.0f64, 1.0).unwrap(),
        PsiFunction::Identity,
        FracParams::order_one(0.5f64, 1.0).unwrap(),
        Arc::new(|_, y: f64| 0.5 * y.cos()),
    )
    .unwrap();
    let cfg64 = SolverConfig::<f64> {
        grid_n: 64,
        ..SolverConfig::default()
    };
    let rep64 = picard_solve(&prob64, &cfg64).unwrap();
    let y32 = rep.solution.value_at(1.0).unwrap() as f64;
    let y64 = rep64.solution.value_at(1.0).unwrap();
    assert!((y32 - y64).abs() < 1e-4, "f32 {y32} vs f64 {y64}");
}
