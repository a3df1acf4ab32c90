//! Delta derivatives, delta integrals, weighted norms, and the
//! singular-kernel product quadrature reused by every fractional
//! operator.
//!
//! Quadrature is organized around per-node weight vectors: an integral is
//! the compensated dot product of a weight vector with the nodal values.
//! On purely scattered parts the weights reproduce the defining finite
//! sums term by term; on continuous panels the integrand is interpolated
//! linearly in the `psi` coordinate and the kernel moments are integrated
//! in closed form, so the weak singularity at the evaluation point never
//! meets a sampled value.

use crate::error::{Error, Result};
use crate::gridfn::GridFunction;
use crate::psi::PsiFunction;
use crate::real::{as_f64, kahan_dot, real, Real};
use crate::timescale::Grid;

/// `hi^e - lo^e` for `hi >= lo >= 0`, computed without cancellation.
#[inline]
fn pow_diff<T: Real>(hi: T, lo: T, e: T) -> T {
    if lo == T::zero() {
        return hi.powf(e);
    }
    if hi == lo {
        return T::zero();
    }
    // hi^e - lo^e = -hi^e * expm1(e * ln(lo / hi))
    -hi.powf(e) * (e * (lo / hi).ln()).exp_m1()
}

/// Three-point Lagrange derivative at `x` from samples `(xs, vs)`.
fn lagrange3_deriv<T: Real>(x: T, xs: [T; 3], vs: [T; 3]) -> T {
    let [x0, x1, x2] = xs;
    let [v0, v1, v2] = vs;
    let two = real::<T>(2.0);
    v0 * (two * x - x1 - x2) / ((x0 - x1) * (x0 - x2))
        + v1 * (two * x - x0 - x2) / ((x1 - x0) * (x1 - x2))
        + v2 * (two * x - x0 - x1) / ((x2 - x0) * (x2 - x1))
}

/// Derivative of nodal data with respect to a coordinate map at node `i`.
///
/// Right-scattered nodes use the forward jump quotient; right-dense nodes
/// use a three-point stencil inside the panel run (two-point when the
/// interval has a single panel). The coordinate map is the identity for
/// the plain delta derivative and `psi` for the weighted one.
fn node_derivative<T: Real>(
    grid: &Grid<T>,
    values: &[T],
    coord: impl Fn(T) -> T,
    i: usize,
) -> Result<T> {
    let t = grid.node(i);
    if grid.outside_kappa(i) {
        return Err(Error::OutsideKappa { t: as_f64(t) });
    }
    if grid.is_right_scattered(i) {
        let num = values[i + 1] - values[i];
        let den = coord(grid.node(i + 1)) - coord(t);
        debug_assert!(grid.node(i + 1) == grid.sigma(i));
        if den == T::zero() {
            return Err(Error::SingularWeight { t: as_f64(t) });
        }
        return Ok(num / den);
    }
    // Right-dense: node i starts or ends a panel run.
    let left = grid.has_panel_left(i);
    let right = grid.is_panel_start(i);
    let x = coord(t);
    let pick = |j: usize| (coord(grid.node(j)), values[j]);
    let (xs, vs) = if left && right {
        let (xa, va) = pick(i - 1);
        let (xb, vb) = pick(i);
        let (xc, vc) = pick(i + 1);
        ([xa, xb, xc], [va, vb, vc])
    } else if right {
        if grid.is_panel_start(i + 1) {
            let (xa, va) = pick(i);
            let (xb, vb) = pick(i + 1);
            let (xc, vc) = pick(i + 2);
            ([xa, xb, xc], [va, vb, vc])
        } else {
            let (xa, va) = pick(i);
            let (xb, vb) = pick(i + 1);
            let den = xb - xa;
            if den == T::zero() {
                return Err(Error::SingularWeight { t: as_f64(t) });
            }
            return Ok((vb - va) / den);
        }
    } else if left {
        if i >= 2 && grid.is_panel_start(i - 2) {
            let (xa, va) = pick(i - 2);
            let (xb, vb) = pick(i - 1);
            let (xc, vc) = pick(i);
            ([xa, xb, xc], [va, vb, vc])
        } else {
            let (xa, va) = pick(i - 1);
            let (xb, vb) = pick(i);
            let den = xb - xa;
            if den == T::zero() {
                return Err(Error::SingularWeight { t: as_f64(t) });
            }
            return Ok((vb - va) / den);
        }
    } else {
        return Err(Error::Resolution { t: as_f64(t) });
    };
    if xs[0] == xs[1] || xs[1] == xs[2] {
        return Err(Error::SingularWeight { t: as_f64(t) });
    }
    Ok(lagrange3_deriv(x, xs, vs))
}

/// Delta derivative of `f` at a grid node.
///
/// Right-scattered: `(f(sigma(t)) - f(t)) / mu(t)`. Right-dense: finite
/// differences on the panel grid, one-sided at component boundaries.
pub fn delta_derivative<T: Real>(f: &GridFunction<T>, t: T) -> Result<T> {
    let i = f.grid().require(t)?;
    node_derivative(f.grid(), f.values(), |x| x, i)
}

/// Weighted delta derivative `(Delta f / Delta psi)` at a grid node.
///
/// Difference quotients are taken in the `psi` coordinate, which agrees
/// with `delta_derivative / psi_delta` wherever the latter is defined and
/// stays finite when the classical slope of `psi` vanishes at a panel
/// edge.
pub fn psi_delta_derivative<T: Real>(f: &GridFunction<T>, psi: &PsiFunction<T>, t: T) -> Result<T> {
    let i = f.grid().require(t)?;
    node_derivative(f.grid(), f.values(), |x| psi.eval(x), i)
}

/// Applies the weighted delta derivative at every node where it is
/// defined, producing the next stage of a nested operator. The value at a
/// left-scattered maximum is undefined and stored as NaN; integration
/// ranges never consume it.
pub fn psi_delta_stage<T: Real>(
    f: &GridFunction<T>,
    psi: &PsiFunction<T>,
) -> Result<GridFunction<T>> {
    let grid = f.grid();
    let mut out = Vec::with_capacity(grid.len());
    for i in 0..grid.len() {
        if grid.outside_kappa(i) {
            out.push(T::nan());
        } else {
            out.push(node_derivative(grid, f.values(), |x| psi.eval(x), i)?);
        }
    }
    GridFunction::from_values(grid, out)
}

/// Quadrature weights of the delta integral over `[a, b)` on the nodes of
/// `grid`: point masses `mu` at scattered nodes, composite trapezoid over
/// panels. Weights accumulate into `out`, which is cleared first.
pub fn delta_measure_weights<T: Real>(grid: &Grid<T>, ia: usize, ib: usize, out: &mut Vec<T>) {
    out.clear();
    out.resize(grid.len(), T::zero());
    let half = real::<T>(0.5);
    for i in ia..ib {
        if grid.is_right_scattered(i) {
            out[i] = out[i] + grid.mu(i);
        } else if grid.is_panel_start(i) {
            let h = grid.node(i + 1) - grid.node(i);
            out[i] = out[i] + h * half;
            out[i + 1] = out[i + 1] + h * half;
        }
    }
}

/// Delta integral of `f` over `[a, b)`; both bounds must be grid nodes.
pub fn delta_integral<T: Real>(f: &GridFunction<T>, a: T, b: T) -> Result<T> {
    let grid = f.grid();
    let ia = grid.require(a)?;
    let ib = grid.require(b)?;
    if ia > ib {
        return Err(Error::BoundsOrder {
            a: as_f64(a),
            b: as_f64(b),
        });
    }
    let mut w = Vec::new();
    delta_measure_weights(grid, ia, ib, &mut w);
    Ok(kahan_dot(&w, f.values()))
}

/// Weighted-space norm: `sup over nodes t > origin` of
/// `|(psi(t) - psi(origin))^(1 - gamma) * f(t)|`. The node at the origin
/// contributes `|f(origin)|` exactly when `gamma = 1`.
pub fn weighted_norm<T: Real>(
    f: &GridFunction<T>,
    psi: &PsiFunction<T>,
    gamma: T,
    origin: T,
) -> Result<T> {
    if gamma < T::zero() || gamma > T::one() {
        return Err(Error::Parameter(format!(
            "weight exponent gamma = {} must lie in [0, 1]",
            as_f64(gamma)
        )));
    }
    let grid = f.grid();
    let i0 = grid.require(origin)?;
    let u0 = psi.eval(grid.node(i0));
    let e = T::one() - gamma;
    let mut sup = if gamma == T::one() {
        f.value(i0).abs()
    } else {
        T::zero()
    };
    for i in (i0 + 1)..grid.len() {
        let w = (psi.eval(grid.node(i)) - u0).powf(e);
        sup = sup.max((w * f.value(i)).abs());
    }
    Ok(sup)
}

/// Side of the weakly singular kernel.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KernelSide {
    /// Kernel `(psi(t) - psi(s))^(alpha-1)` integrated over `s in [a, t)`.
    Left,
    /// Kernel `(psi(s) - psi(t))^(alpha-1)` integrated over `s in (t, b)`.
    Right,
}

/// Precomputed weight-coordinate values `psi(node)` for a grid; passing
/// them explicitly keeps repeated weight assembly free of transcendental
/// calls.
pub fn psi_nodes<T: Real>(grid: &Grid<T>, psi: &PsiFunction<T>) -> Vec<T> {
    grid.nodes().iter().map(|&t| psi.eval(t)).collect()
}

/// Builds the quadrature weights of the raw kernel integral
/// `integral psi^Delta(s) (psi(.) - psi(.))^(alpha-1) f(s) Delta s`
/// on the nodes of `grid`, accumulating into `out`. `u` holds the
/// weight-coordinate node values from [`psi_nodes`].
///
/// Scattered contribution at node `s`: `(psi(sigma(s)) - psi(s)) *
/// kernel(s)`, which is finite because the kernel argument is a positive
/// jump. Panel contribution: exact moments of the kernel against the
/// linear interpolant in the `psi` coordinate.
pub fn kernel_weights<T: Real>(
    grid: &Grid<T>,
    u: &[T],
    side: KernelSide,
    i_eval: usize,
    i_bound: usize,
    alpha: T,
    out: &mut Vec<T>,
) -> Result<()> {
    if alpha <= T::zero() {
        return Err(Error::Parameter(format!(
            "kernel order alpha = {} must be positive",
            as_f64(alpha)
        )));
    }
    out.clear();
    out.resize(grid.len(), T::zero());
    let u_eval = u[i_eval];
    let am1 = alpha - T::one();
    let ap1 = alpha + T::one();
    let (lo, hi) = match side {
        KernelSide::Left => (i_bound, i_eval),
        KernelSide::Right => (i_eval, i_bound),
    };
    for i in lo..hi {
        if grid.is_right_scattered(i) {
            if side == KernelSide::Right && i == i_eval {
                // The scattered term at s = t is excluded; its kernel
                // argument would be zero.
                continue;
            }
            let jump = u[i + 1] - u[i];
            let kern = match side {
                KernelSide::Left => (u_eval - u[i]).powf(am1),
                KernelSide::Right => (u[i] - u_eval).powf(am1),
            };
            out[i] = out[i] + jump * kern;
        } else if grid.is_panel_start(i) {
            let u0 = u[i];
            let u1 = u[i + 1];
            let du = u1 - u0;
            let (m0, m1) = match side {
                KernelSide::Left => {
                    // v = u_eval - u decreases across the panel.
                    let v0 = u_eval - u0;
                    let v1 = (u_eval - u1).max(T::zero());
                    let d_alpha = pow_diff(v0, v1, alpha);
                    let d_ap1 = pow_diff(v0, v1, ap1);
                    (d_alpha / alpha, v0 * d_alpha / alpha - d_ap1 / ap1)
                }
                KernelSide::Right => {
                    // v = u - u_eval increases across the panel.
                    let v0 = (u0 - u_eval).max(T::zero());
                    let v1 = u1 - u_eval;
                    let d_alpha = pow_diff(v1, v0, alpha);
                    let d_ap1 = pow_diff(v1, v0, ap1);
                    (d_alpha / alpha, d_ap1 / ap1 - v0 * d_alpha / alpha)
                }
            };
            out[i] = out[i] + (m0 - m1 / du);
            out[i + 1] = out[i + 1] + m1 / du;
        }
    }
    Ok(())
}

/// Raw singular kernel integral
/// `integral_a^t psi^Delta(s) (psi(t) - psi(s))^(alpha-1) f(s) Delta s`
/// (no gamma-function normalization).
pub fn singular_kernel_integral<T: Real>(
    f: &GridFunction<T>,
    psi: &PsiFunction<T>,
    t: T,
    alpha: T,
    a: T,
) -> Result<T> {
    let grid = f.grid();
    let ia = grid.require(a)?;
    let it = grid.require(t)?;
    if ia > it {
        return Err(Error::BoundsOrder {
            a: as_f64(a),
            b: as_f64(t),
        });
    }
    let mut w = Vec::new();
    let u = psi_nodes(grid, psi);
    kernel_weights(grid, &u, KernelSide::Left, it, ia, alpha, &mut w)?;
    Ok(kahan_dot(&w, f.values()))
}

/// Raw right-sided kernel integral
/// `integral_t^b psi^Delta(s) (psi(s) - psi(t))^(alpha-1) f(s) Delta s`,
/// the mirror of [`singular_kernel_integral`] with the scattered term at
/// `s = t` excluded.
pub fn singular_kernel_integral_right<T: Real>(
    f: &GridFunction<T>,
    psi: &PsiFunction<T>,
    t: T,
    alpha: T,
    b: T,
) -> Result<T> {
    let grid = f.grid();
    let it = grid.require(t)?;
    let ib = grid.require(b)?;
    if it > ib {
        return Err(Error::BoundsOrder {
            a: as_f64(t),
            b: as_f64(b),
        });
    }
    let mut w = Vec::new();
    let u = psi_nodes(grid, psi);
    kernel_weights(grid, &u, KernelSide::Right, it, ib, alpha, &mut w)?;
    Ok(kahan_dot(&w, f.values()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::psi::square;
    use crate::timescale::{Component, TimeScale};
    use std::sync::Arc;

    fn grid_of(ts: &TimeScale<f64>, n: usize) -> Arc<Grid<f64>> {
        Arc::new(ts.build_grid(n).unwrap())
    }

    #[test]
    fn delta_derivative_examples() {
        let z = TimeScale::<f64>::integers(0, 10).unwrap();
        let g = grid_of(&z, 1);
        let f = GridFunction::sample(&g, |t| t * t);
        // Forward difference (16 - 9) / 1.
        assert_eq!(delta_derivative(&f, 3.0).unwrap(), 7.0);

        let cont = TimeScale::interval(0.0, 1.0).unwrap();
        let g = grid_of(&cont, 512);
        let f = GridFunction::sample(&g, |t| t * t);
        assert!((delta_derivative(&f, 0.5).unwrap() - 1.0).abs() < 1e-6);

        let g = grid_of(&z, 1);
        let c = GridFunction::sample(&g, |_| 4.0);
        assert_eq!(delta_derivative(&c, 5.0).unwrap(), 0.0);
    }

    #[test]
    fn delta_derivative_domain_errors() {
        let z = TimeScale::<f64>::integers(0, 3).unwrap();
        let g = grid_of(&z, 1);
        let f = GridFunction::sample(&g, |t| t);
        assert!(matches!(
            delta_derivative(&f, 3.0),
            Err(Error::OutsideKappa { .. })
        ));
        assert!(matches!(
            delta_derivative(&f, 0.5),
            Err(Error::NotAGridNode { .. })
        ));
    }

    #[test]
    fn psi_delta_derivative_examples() {
        // Unit weight reduces to the delta derivative.
        let z = TimeScale::<f64>::integers(0, 5).unwrap();
        let g = grid_of(&z, 1);
        let f = GridFunction::sample(&g, |t| t * t);
        assert_eq!(
            psi_delta_derivative(&f, &PsiFunction::Identity, 2.0).unwrap(),
            delta_derivative(&f, 2.0).unwrap()
        );

        // d(t^4)/d(t^2) = 2 t^2 = 0.5 at t = 0.5.
        let cont = TimeScale::interval(0.0, 1.0).unwrap();
        let g = grid_of(&cont, 256);
        let f = GridFunction::sample(&g, |t| t.powi(4));
        let d = psi_delta_derivative(&f, &square(), 0.5).unwrap();
        assert!((d - 0.5).abs() < 1e-6, "got {d}");

        // On the integers with psi = 2x: slope 1/2.
        let g = grid_of(&z, 1);
        let f = GridFunction::sample(&g, |t| t);
        let psi = PsiFunction::Affine {
            slope: 2.0,
            offset: 0.0,
        };
        assert_eq!(psi_delta_derivative(&f, &psi, 1.0).unwrap(), 0.5);
    }

    #[test]
    fn delta_integral_examples() {
        let z = TimeScale::<f64>::integers(0, 5).unwrap();
        let g = grid_of(&z, 1);
        let one = GridFunction::sample(&g, |_| 1.0);
        assert_eq!(delta_integral(&one, 0.0, 5.0).unwrap(), 5.0);

        let cont = TimeScale::interval(0.0, 1.0).unwrap();
        let g = grid_of(&cont, 128);
        let f = GridFunction::sample(&g, |t| t);
        assert!((delta_integral(&f, 0.0, 1.0).unwrap() - 0.5).abs() < 1e-12);

        let mixed = TimeScale::new(vec![
            Component::Point(0.0),
            Component::Interval { lo: 1.0, hi: 2.0 },
        ])
        .unwrap();
        let g = grid_of(&mixed, 8);
        let one = GridFunction::sample(&g, |_| 1.0);
        assert!((delta_integral(&one, 0.0, 2.0).unwrap() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn delta_integral_split_identity_is_exact_on_discrete_scales() {
        let pts = [0.0, 0.7, 1.3, 2.9, 4.0];
        let ts = TimeScale::from_points(&pts).unwrap();
        let g = grid_of(&ts, 1);
        let f = GridFunction::sample(&g, |t| (1.3 * t).sin() + 2.0);
        let a = 0.0;
        let b = 4.0;
        let sigma_a = ts.sigma(a).unwrap();
        let whole = delta_integral(&f, a, b).unwrap();
        let split =
            (sigma_a - a) * f.value_at(a).unwrap() + delta_integral(&f, sigma_a, b).unwrap();
        assert_eq!(whole, split);
    }

    #[test]
    fn delta_integral_additivity() {
        let mixed = TimeScale::new(vec![
            Component::Point(0.0),
            Component::Interval { lo: 0.5, hi: 1.5 },
            Component::Point(2.0),
            Component::Point(2.25),
        ])
        .unwrap();
        let g = grid_of(&mixed, 6);
        let f = GridFunction::sample(&g, |t| t * t - 0.3 * t);
        let whole = delta_integral(&f, 0.0, 2.25).unwrap();
        let parts = delta_integral(&f, 0.0, 1.0).unwrap() + delta_integral(&f, 1.0, 2.25).unwrap();
        assert!((whole - parts).abs() < 1e-14);
    }

    #[test]
    fn monotone_extension_inequality_on_discrete_scale() {
        // For increasing f on a discrete scale the delta integral equals
        // the classical integral of the left-value step extension and
        // underestimates the classical integral of f itself.
        let pts = [0.0, 0.4, 1.1, 1.9, 3.0];
        let ts = TimeScale::from_points(&pts).unwrap();
        let g = grid_of(&ts, 1);
        let f = GridFunction::sample(&g, |t| t.exp());
        let lhs = delta_integral(&f, 0.0, 3.0).unwrap();
        let step: f64 = pts.windows(2).map(|w| w[0].exp() * (w[1] - w[0])).sum();
        assert!((lhs - step).abs() < 1e-12);
        let classical = 3.0f64.exp() - 1.0;
        assert!(lhs <= classical + 1e-12);
    }

    #[test]
    fn weighted_norm_examples() {
        let cont = TimeScale::interval(0.0, 1.0).unwrap();
        let g = grid_of(&cont, 64);
        let f = GridFunction::sample(&g, |t| (2.0 * t).cos());
        // gamma = 1 is the plain sup norm.
        let n1 = weighted_norm(&f, &PsiFunction::Identity, 1.0, 0.0).unwrap();
        assert!((n1 - f.sup_norm()).abs() < 1e-15);

        // The weight cancels f = (psi - psi(0))^(gamma - 1).
        let gamma = 0.4;
        let f = GridFunction::sample(&g, |t| t.powf(gamma - 1.0));
        let n = weighted_norm(&f, &PsiFunction::Identity, gamma, 0.0).unwrap();
        assert!((n - 1.0).abs() < 1e-12);

        // f = 2 with gamma = 0.5: sup of 2 sqrt(t) on [0, 1] is 2.
        let f = GridFunction::sample(&g, |_| 2.0);
        let n = weighted_norm(&f, &PsiFunction::Identity, 0.5, 0.0).unwrap();
        assert!((n - 2.0).abs() < 1e-12);
    }

    #[test]
    fn singular_kernel_examples() {
        // Two-term finite sum on the integers.
        let z = TimeScale::<f64>::integers(0, 4).unwrap();
        let g = grid_of(&z, 1);
        let one = GridFunction::sample(&g, |_| 1.0);
        let v = singular_kernel_integral(&one, &PsiFunction::Identity, 2.0, 0.5, 0.0).unwrap();
        let expect = 1.0 + 1.0 / 2.0f64.sqrt();
        assert!((v - expect).abs() < 1e-15, "got {v}");

        // alpha = 1 is the plain length.
        let cont = TimeScale::interval(0.0, 1.0).unwrap();
        let g = grid_of(&cont, 32);
        let one = GridFunction::sample(&g, |_| 1.0);
        let v = singular_kernel_integral(&one, &PsiFunction::Identity, 1.0, 1.0, 0.0).unwrap();
        assert!((v - 1.0).abs() < 1e-13);

        // integral_0^1 (1-s)^(-1/2) ds = 2, handled analytically.
        let v = singular_kernel_integral(&one, &PsiFunction::Identity, 1.0, 0.5, 0.0).unwrap();
        assert!((v - 2.0).abs() < 1e-12, "got {v}");
    }

    #[test]
    fn singular_kernel_rejects_bad_parameters() {
        let z = TimeScale::<f64>::integers(0, 4).unwrap();
        let g = grid_of(&z, 1);
        let one = GridFunction::sample(&g, |_| 1.0);
        assert!(matches!(
            singular_kernel_integral(&one, &PsiFunction::Identity, 2.0, -0.5, 0.0),
            Err(Error::Parameter(_))
        ));
        assert!(matches!(
            singular_kernel_integral(&one, &PsiFunction::Identity, 1.0, 0.5, 3.0),
            Err(Error::BoundsOrder { .. })
        ));
    }

    #[test]
    fn quadrature_is_linear_in_the_integrand() {
        let mixed = TimeScale::new(vec![
            Component::Point(0.0),
            Component::Point(0.3),
            Component::Interval { lo: 0.8, hi: 1.7 },
        ])
        .unwrap();
        let g = grid_of(&mixed, 8);
        let f1 = GridFunction::sample(&g, |t| (t + 0.2).sin());
        let f2 = GridFunction::sample(&g, |t| t * t);
        let combo = f1.zip_with(&f2, |a, b| 2.5 * a - 1.25 * b);
        for alpha in [0.4, 1.0, 1.7] {
            let lhs =
                singular_kernel_integral(&combo, &PsiFunction::Identity, 1.7, alpha, 0.0).unwrap();
            let r1 =
                singular_kernel_integral(&f1, &PsiFunction::Identity, 1.7, alpha, 0.0).unwrap();
            let r2 =
                singular_kernel_integral(&f2, &PsiFunction::Identity, 1.7, alpha, 0.0).unwrap();
            assert!((lhs - (2.5 * r1 - 1.25 * r2)).abs() < 1e-12);
        }
    }

    #[test]
    fn kernel_weights_reproduce_closed_forms_for_unit_integrands() {
        // Product integration is exact (up to roundoff) when f is
        // constant: the kernel moments have closed antiderivatives.
        let cont = TimeScale::interval(0.0, 1.0).unwrap();
        let g = grid_of(&cont, 64);
        let one = GridFunction::sample(&g, |_| 1.0);
        for alpha in [0.25f64, 0.5, 0.8, 1.3] {
            // Left: (psi(t) - psi(a))^alpha / alpha at t = 1.
            let v =
                singular_kernel_integral(&one, &PsiFunction::Identity, 1.0, alpha, 0.0).unwrap();
            assert!((v - 1.0 / alpha).abs() < 1e-12, "alpha {alpha}: {v}");
            // Right: (psi(b) - psi(t))^alpha / alpha at t = 0.
            let v = singular_kernel_integral_right(&one, &PsiFunction::Identity, 0.0, alpha, 1.0)
                .unwrap();
            assert!((v - 1.0 / alpha).abs() < 1e-12, "alpha {alpha}: {v}");
        }

        // Weighted coordinate: substituting u = psi(s) leaves
        // (psi(t) - psi(a))^alpha / alpha, exactly integrated per panel.
        let psi = square::<f64>();
        let v = singular_kernel_integral(&one, &psi, 1.0, 0.5, 0.0).unwrap();
        assert!((v - 2.0).abs() < 1e-12, "got {v}");
    }

    proptest::proptest! {
        #[test]
        fn split_identity_and_additivity_on_random_discrete_scales(
            raw in proptest::collection::vec(0.02f64..0.8, 3..14),
            seedling in 0u64..1000
        ) {
            let mut pts = vec![0.0f64];
            let mut x = 0.0;
            for gap in &raw {
                x += gap;
                pts.push(x);
            }
            let ts = TimeScale::from_points(&pts).unwrap();
            let g = Arc::new(ts.build_grid(1).unwrap());
            let s = seedling as f64 * 0.01;
            let f = GridFunction::sample(&g, |t| (t + s).sin() - 0.3 * t);
            let a = pts[0];
            let b = *pts.last().unwrap();
            // Split identity at the left endpoint, exact on finite sums.
            let sigma_a = ts.sigma(a).unwrap();
            let whole = delta_integral(&f, a, b).unwrap();
            let split = (sigma_a - a) * f.value_at(a).unwrap()
                + delta_integral(&f, sigma_a, b).unwrap();
            proptest::prop_assert!((whole - split).abs() <= 1e-13 * whole.abs().max(1.0));
            // Additivity at an interior point.
            let mid = pts[pts.len() / 2];
            let parts = delta_integral(&f, a, mid).unwrap()
                + delta_integral(&f, mid, b).unwrap();
            proptest::prop_assert!((whole - parts).abs() <= 1e-13 * whole.abs().max(1.0));
        }
    }

    #[test]
    fn product_quadrature_converges_quadratically() {
        // Halving the panel width should shrink the error about 4x for a
        // smooth integrand against the weak kernel.
        let cont = TimeScale::interval(0.0, 1.0).unwrap();
        let exact = 0.351_500_040_757_920_4; // integral_0^1 (1-s)^(-1/2) cos(2s) ds
        let mut errs = Vec::new();
        for n in [64, 128, 256] {
            let g = grid_of(&cont, n);
            let f = GridFunction::sample(&g, |t| (2.0 * t).cos());
            let v = singular_kernel_integral(&f, &PsiFunction::Identity, 1.0, 0.5, 0.0).unwrap();
            errs.push((v - exact).abs());
        }
        assert!(errs[0] / errs[1] > 3.0, "{errs:?}");
        assert!(errs[1] / errs[2] > 3.0, "{errs:?}");
    }
}
