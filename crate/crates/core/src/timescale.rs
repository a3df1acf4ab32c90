//! Exact representation of a time scale and its structural operators.
//!
//! A time scale is stored as an ordered list of disjoint components, each a
//! closed interval or an isolated point. This finite decomposition is what
//! every quadrature and stencil in the crate walks over; fully general
//! closed sets are out of scope.

use crate::error::{Error, Result};
use crate::real::{as_f64, real, Real};

/// Absolute snap tolerance used to classify query points onto components.
/// Grid nodes are produced in floating point, so membership tests accept
/// points within this distance of the set.
pub const SNAP_EPS: f64 = 1e-12;

/// One maximal piece of the scale.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Component<T> {
    /// Closed interval `[lo, hi]` with `lo < hi`.
    Interval { lo: T, hi: T },
    /// Isolated point.
    Point(T),
}

impl<T: Real> Component<T> {
    fn start(&self) -> T {
        match *self {
            Component::Interval { lo, .. } => lo,
            Component::Point(x) => x,
        }
    }

    fn end(&self) -> T {
        match *self {
            Component::Interval { hi, .. } => hi,
            Component::Point(x) => x,
        }
    }
}

/// A nonempty closed subset of the reals with finitely many components.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeScale<T> {
    components: Vec<Component<T>>,
}

/// Where a resolved query point sits inside its component.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Place {
    AtPoint,
    AtLo,
    Interior,
    AtHi,
}

#[derive(Clone, Copy, Debug)]
struct Resolved<T> {
    comp: usize,
    /// Canonical representative of the query (snapped onto the set).
    t: T,
    place: Place,
}

impl<T: Real> TimeScale<T> {
    /// Builds a scale from ordered components, checking the invariants:
    /// strictly ascending, positive gaps, intervals with `lo < hi`.
    pub fn new(components: Vec<Component<T>>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::Construction("scale must be nonempty".into()));
        }
        let eps = real::<T>(SNAP_EPS);
        for c in &components {
            match *c {
                Component::Interval { lo, hi } => {
                    if !(lo.is_finite() && hi.is_finite()) || lo >= hi {
                        return Err(Error::Construction(format!(
                            "interval [{}, {}] must satisfy lo < hi",
                            as_f64(lo),
                            as_f64(hi)
                        )));
                    }
                }
                Component::Point(x) => {
                    if !x.is_finite() {
                        return Err(Error::Construction("point must be finite".into()));
                    }
                }
            }
        }
        for w in components.windows(2) {
            if w[1].start() - w[0].end() <= eps {
                return Err(Error::Construction(format!(
                    "components must be separated by a positive gap (got end {} then start {})",
                    as_f64(w[0].end()),
                    as_f64(w[1].start())
                )));
            }
        }
        Ok(Self { components })
    }

    /// Single closed interval `[lo, hi]`.
    pub fn interval(lo: T, hi: T) -> Result<Self> {
        Self::new(vec![Component::Interval { lo, hi }])
    }

    /// Purely discrete scale from strictly increasing points.
    pub fn from_points(points: &[T]) -> Result<Self> {
        Self::new(points.iter().map(|&x| Component::Point(x)).collect())
    }

    /// Integer scale `{lo, lo+1, ..., hi}`.
    pub fn integers(lo: i64, hi: i64) -> Result<Self> {
        if lo > hi {
            return Err(Error::Construction("integer range out of order".into()));
        }
        let pts: Vec<T> = (lo..=hi).map(|k| real(k as f64)).collect();
        Self::from_points(&pts)
    }

    /// Quantum scale `{1, q, q^2, ...}` materialized up to `n_points`
    /// points, ordered ascending. Requires `q > 1`.
    pub fn quantum(q: T, n_points: usize) -> Result<Self> {
        if q <= T::one() {
            return Err(Error::Construction("quantum base must exceed 1".into()));
        }
        if n_points == 0 {
            return Err(Error::Construction("scale must be nonempty".into()));
        }
        let mut pts = Vec::with_capacity(n_points);
        let mut x = T::one();
        for _ in 0..n_points {
            pts.push(x);
            x = x * q;
        }
        Self::from_points(&pts)
    }

    pub fn components(&self) -> &[Component<T>] {
        &self.components
    }

    pub fn min(&self) -> T {
        self.components[0].start()
    }

    pub fn max(&self) -> T {
        self.components[self.components.len() - 1].end()
    }

    /// True when every component is an isolated point.
    pub fn is_discrete(&self) -> bool {
        self.components
            .iter()
            .all(|c| matches!(c, Component::Point(_)))
    }

    /// The isolated points of a purely discrete scale.
    pub fn discrete_points(&self) -> Result<Vec<T>> {
        self.components
            .iter()
            .map(|c| match *c {
                Component::Point(x) => Ok(x),
                Component::Interval { lo, .. } => Err(Error::Construction(format!(
                    "scale has a continuous component starting at {}",
                    as_f64(lo)
                ))),
            })
            .collect()
    }

    fn resolve(&self, t: T) -> Option<Resolved<T>> {
        let eps = real::<T>(SNAP_EPS);
        // Components are few in typical scales; partition_point keeps large
        // materialized quantum scales cheap.
        let idx = self.components.partition_point(|c| c.end() < t - eps);
        if idx >= self.components.len() {
            return None;
        }
        match self.components[idx] {
            Component::Point(x) => {
                if (t - x).abs() <= eps {
                    Some(Resolved {
                        comp: idx,
                        t: x,
                        place: Place::AtPoint,
                    })
                } else {
                    None
                }
            }
            Component::Interval { lo, hi } => {
                if t < lo - eps {
                    None
                } else if (t - lo).abs() <= eps {
                    Some(Resolved {
                        comp: idx,
                        t: lo,
                        place: Place::AtLo,
                    })
                } else if (t - hi).abs() <= eps {
                    Some(Resolved {
                        comp: idx,
                        t: hi,
                        place: Place::AtHi,
                    })
                } else if t < hi {
                    Some(Resolved {
                        comp: idx,
                        t,
                        place: Place::Interior,
                    })
                } else {
                    None
                }
            }
        }
    }

    /// Membership test with the snap tolerance.
    pub fn contains(&self, t: T) -> bool {
        self.resolve(t).is_some()
    }

    /// Forward jump operator. `sigma(max) = max`.
    pub fn sigma(&self, t: T) -> Result<T> {
        let r = self.resolve(t).ok_or(Error::OffScale { t: as_f64(t) })?;
        match r.place {
            Place::Interior | Place::AtLo => Ok(r.t),
            Place::AtPoint | Place::AtHi => {
                if r.comp + 1 < self.components.len() {
                    Ok(self.components[r.comp + 1].start())
                } else {
                    Ok(r.t)
                }
            }
        }
    }

    /// Backward jump operator. `rho(min) = min`.
    pub fn rho(&self, t: T) -> Result<T> {
        let r = self.resolve(t).ok_or(Error::OffScale { t: as_f64(t) })?;
        match r.place {
            Place::Interior | Place::AtHi => Ok(r.t),
            Place::AtPoint | Place::AtLo => {
                if r.comp > 0 {
                    Ok(self.components[r.comp - 1].end())
                } else {
                    Ok(r.t)
                }
            }
        }
    }

    /// Graininess `sigma(t) - t`, zero exactly at right-dense points.
    pub fn graininess(&self, t: T) -> Result<T> {
        let r = self.resolve(t).ok_or(Error::OffScale { t: as_f64(t) })?;
        Ok(self.sigma(r.t)? - r.t)
    }

    /// Removes the maximum when it is left-scattered, otherwise returns
    /// the scale unchanged.
    pub fn kappa_restrict(&self) -> Self {
        let n = self.components.len();
        if n >= 2 {
            if let Component::Point(_) = self.components[n - 1] {
                return Self {
                    components: self.components[..n - 1].to_vec(),
                };
            }
        }
        self.clone()
    }

    /// The part of the scale inside `[a, b]`; both bounds must belong to
    /// the scale.
    pub fn clipped(&self, a: T, b: T) -> Result<Self> {
        if !self.contains(a) {
            return Err(Error::OffScale { t: as_f64(a) });
        }
        if !self.contains(b) {
            return Err(Error::OffScale { t: as_f64(b) });
        }
        if a >= b {
            return Err(Error::BoundsOrder {
                a: as_f64(a),
                b: as_f64(b),
            });
        }
        let a = self.resolve(a).unwrap().t;
        let b = self.resolve(b).unwrap().t;
        let mut out = Vec::new();
        for c in &self.components {
            match *c {
                Component::Point(x) => {
                    if x >= a && x <= b {
                        out.push(Component::Point(x));
                    }
                }
                Component::Interval { lo, hi } => {
                    let lo_c = lo.max(a);
                    let hi_c = hi.min(b);
                    if lo_c < hi_c {
                        out.push(Component::Interval { lo: lo_c, hi: hi_c });
                    } else if lo_c == hi_c && lo_c >= a && lo_c <= b {
                        out.push(Component::Point(lo_c));
                    }
                }
            }
        }
        Self::new(out)
    }

    /// Discretizes the scale: every continuous interval is split into
    /// `panels` equal panels, every isolated point becomes one node.
    pub fn build_grid(&self, panels: usize) -> Result<Grid<T>> {
        if panels == 0 {
            return Err(Error::Parameter("panel count must be at least 1".into()));
        }
        let mut nodes = Vec::new();
        let mut kind = Vec::new();
        let mut comp = Vec::new();
        for (ci, c) in self.components.iter().enumerate() {
            match *c {
                Component::Point(x) => {
                    nodes.push(x);
                    kind.push(NodeKind::Isolated);
                    comp.push(ci as u32);
                }
                Component::Interval { lo, hi } => {
                    let width = hi - lo;
                    let np = real::<T>(panels as f64);
                    for k in 0..=panels {
                        let t = if k == panels {
                            hi
                        } else {
                            lo + width * real::<T>(k as f64) / np
                        };
                        nodes.push(t);
                        kind.push(NodeKind::Panel);
                        comp.push(ci as u32);
                    }
                }
            }
        }
        for w in nodes.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::Construction(
                    "grid nodes collapsed; interval too small for the panel count".into(),
                ));
            }
        }
        let sigma = nodes
            .iter()
            .map(|&t| self.sigma(t))
            .collect::<Result<Vec<_>>>()?;
        Ok(Grid {
            nodes,
            kind,
            comp,
            sigma,
            panels,
        })
    }
}

/// Node classification inside a [`Grid`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NodeKind {
    /// An isolated point of the scale.
    Isolated,
    /// A node subdividing a continuous interval (endpoints included).
    Panel,
}

/// Deterministic discretization of a time scale.
///
/// Nodes are strictly increasing; every isolated point appears exactly
/// once and interval endpoints are always included. The forward jump of
/// each node in the *scale* is cached so quadrature never needs the
/// originating [`TimeScale`].
#[derive(Clone, Debug)]
pub struct Grid<T> {
    nodes: Vec<T>,
    kind: Vec<NodeKind>,
    comp: Vec<u32>,
    sigma: Vec<T>,
    panels: usize,
}

impl<T: Real> Grid<T> {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[T] {
        &self.nodes
    }

    pub fn node(&self, i: usize) -> T {
        self.nodes[i]
    }

    pub fn kind(&self, i: usize) -> NodeKind {
        self.kind[i]
    }

    pub fn panels_per_interval(&self) -> usize {
        self.panels
    }

    /// Forward jump of node `i` within the scale.
    pub fn sigma(&self, i: usize) -> T {
        self.sigma[i]
    }

    /// Graininess of node `i` within the scale.
    pub fn mu(&self, i: usize) -> T {
        self.sigma[i] - self.nodes[i]
    }

    /// True when the scale jumps at node `i`.
    pub fn is_right_scattered(&self, i: usize) -> bool {
        self.sigma[i] > self.nodes[i]
    }

    /// True when nodes `i` and `i + 1` bound a panel of the same interval.
    pub fn is_panel_start(&self, i: usize) -> bool {
        i + 1 < self.nodes.len()
            && self.kind[i] == NodeKind::Panel
            && self.kind[i + 1] == NodeKind::Panel
            && self.comp[i] == self.comp[i + 1]
    }

    /// True when nodes `i - 1` and `i` lie in the same interval.
    pub fn has_panel_left(&self, i: usize) -> bool {
        i > 0 && self.is_panel_start(i - 1)
    }

    /// Locates a value among the nodes, within the snap tolerance.
    pub fn find(&self, t: T) -> Option<usize> {
        let eps = real::<T>(SNAP_EPS);
        let idx = self.nodes.partition_point(|&x| x < t - eps);
        if idx < self.nodes.len() && (self.nodes[idx] - t).abs() <= eps {
            Some(idx)
        } else {
            None
        }
    }

    pub fn require(&self, t: T) -> Result<usize> {
        self.find(t).ok_or(Error::NotAGridNode { t: as_f64(t) })
    }

    /// True when node `i` is outside the kappa restriction, i.e. it is a
    /// left-scattered maximum of the scale.
    pub fn outside_kappa(&self, i: usize) -> bool {
        i == self.nodes.len() - 1 && self.kind[i] == NodeKind::Isolated && self.nodes.len() > 1
    }
}
