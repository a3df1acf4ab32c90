//! Sampled functions on a time-scale discretization.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::psi::PsiFunction;
use crate::real::{as_f64, Real};
use crate::timescale::Grid;

/// A function known by its values at the nodes of a [`Grid`].
///
/// This is the common currency of every operator in the crate. Between
/// panel nodes the function is understood as linear in the weight
/// coordinate `psi(t)`; off the scale it is undefined.
#[derive(Clone, Debug)]
pub struct GridFunction<T> {
    grid: Arc<Grid<T>>,
    values: Vec<T>,
}

impl<T: Real> GridFunction<T> {
    /// Samples a callable at every grid node.
    pub fn sample(grid: &Arc<Grid<T>>, f: impl Fn(T) -> T) -> Self {
        let values = grid.nodes().iter().map(|&t| f(t)).collect();
        Self {
            grid: Arc::clone(grid),
            values,
        }
    }

    /// Wraps precomputed nodal values.
    pub fn from_values(grid: &Arc<Grid<T>>, values: Vec<T>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Validation(format!(
                "value count {} does not match grid size {}",
                values.len(),
                grid.len()
            )));
        }
        Ok(Self {
            grid: Arc::clone(grid),
            values,
        })
    }

    pub fn grid(&self) -> &Arc<Grid<T>> {
        &self.grid
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn value(&self, i: usize) -> T {
        self.values[i]
    }

    /// Value at a node given by coordinate.
    pub fn value_at(&self, t: T) -> Result<T> {
        Ok(self.values[self.grid.require(t)?])
    }

    /// Evaluates at an arbitrary scale point: exact at nodes, linear in
    /// the `psi` coordinate inside panels, an error off the scale.
    pub fn eval(&self, psi: &PsiFunction<T>, s: T) -> Result<T> {
        if let Some(i) = self.grid.find(s) {
            return Ok(self.values[i]);
        }
        let nodes = self.grid.nodes();
        let idx = nodes.partition_point(|&x| x < s);
        if idx == 0 || idx >= nodes.len() {
            return Err(Error::OffScale { t: as_f64(s) });
        }
        let i = idx - 1;
        if !self.grid.is_panel_start(i) {
            return Err(Error::OffScale { t: as_f64(s) });
        }
        let u0 = psi.eval(nodes[i]);
        let u1 = psi.eval(nodes[i + 1]);
        let lam = (psi.eval(s) - u0) / (u1 - u0);
        Ok(self.values[i] + lam * (self.values[i + 1] - self.values[i]))
    }

    /// Pointwise map onto the same grid.
    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self {
            grid: Arc::clone(&self.grid),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Pointwise combination of two functions on the same grid.
    pub fn zip_with(&self, other: &Self, f: impl Fn(T, T) -> T) -> Self {
        debug_assert_eq!(self.grid.len(), other.grid.len());
        Self {
            grid: Arc::clone(&self.grid),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    /// Supremum norm over the nodes.
    pub fn sup_norm(&self) -> T {
        self.values.iter().fold(T::zero(), |m, &v| m.max(v.abs()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::psi::{square, PsiFunction};
    use crate::timescale::TimeScale;

    #[test]
    fn interpolation_is_linear_in_psi_coordinate() {
        let ts = TimeScale::interval(0.0, 1.0).unwrap();
        let grid = Arc::new(ts.build_grid(4).unwrap());
        let psi = square::<f64>();
        // Linear in psi: f(t) = 3 t^2 + 1, exactly reproduced between nodes.
        let f = GridFunction::sample(&grid, |t| 3.0 * t * t + 1.0);
        let v = f.eval(&psi, 0.6).unwrap();
        assert!((v - (3.0 * 0.36 + 1.0)).abs() < 1e-14);
    }

    #[test]
    fn evaluation_off_scale_fails() {
        let ts = TimeScale::new(vec![
            crate::timescale::Component::Point(0.0),
            crate::timescale::Component::Interval { lo: 1.0, hi: 2.0 },
        ])
        .unwrap();
        let grid = Arc::new(ts.build_grid(2).unwrap());
        let f = GridFunction::sample(&grid, |t| t);
        assert!(f.eval(&PsiFunction::Identity, 0.5).is_err());
        assert!(f.eval(&PsiFunction::Identity, 1.25).is_ok());
        assert!(f.eval(&PsiFunction::Identity, 2.5).is_err());
    }

    #[test]
    fn core_types_are_shareable_across_threads() {
        fn assert_send_sync<T: Send + Sync>() {}
        assert_send_sync::<TimeScale<f64>>();
        assert_send_sync::<crate::timescale::Grid<f64>>();
        assert_send_sync::<GridFunction<f64>>();
        assert_send_sync::<PsiFunction<f64>>();
        assert_send_sync::<crate::beta::GFactorPolicy>();
    }

    #[test]
    fn from_values_checks_length() {
        let ts = TimeScale::interval(0.0, 1.0).unwrap();
        let grid = Arc::new(ts.build_grid(2).unwrap());
        assert!(GridFunction::from_values(&grid, vec![1.0, 2.0]).is_err());
        assert!(GridFunction::from_values(&grid, vec![1.0, 2.0, 3.0]).is_ok());
    }
}
