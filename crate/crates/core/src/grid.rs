//! Graded radial meshes and sampled radial fields with high-order
//! derivative reconstruction and C¹ interpolation.

use crate::error::{Error, Result};
use crate::numerics::diff;
use crate::Real;

/// Inner boundary handling of a radial domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InnerMode {
    /// Domain reaches the origin; regularity f'(0) = 0 is imposed there.
    /// (The first node is a small positive radius to avoid the coordinate
    /// singularity; the regularity row uses a one-sided stencil.)
    OriginRegular,
    /// Domain starts at an anchor radius with Dirichlet data.
    Anchored,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Profile {
    /// Node spacing grows geometrically by `gamma` per cell.
    Graded { gamma: Real },
    /// Nodes geometric in r (uniform in log r).
    Log,
    /// Caller-supplied nodes (refinement inserts midpoints).
    Explicit,
}

/// Strictly increasing radial mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialGrid {
    nodes: Vec<Real>,
    inner_mode: InnerMode,
    profile: Profile,
}

impl RadialGrid {
    /// Mesh on [r_in, r_out] with `cells` cells whose widths grow
    /// geometrically by `gamma` (gamma = 1 gives a uniform mesh). Doubling
    /// `cells` with grading √gamma keeps the coarse nodes embedded.
    pub fn graded(
        r_in: Real,
        r_out: Real,
        cells: usize,
        gamma: Real,
        inner_mode: InnerMode,
    ) -> Result<Self> {
        if !(r_out > r_in && r_in >= 0.0) {
            return Err(Error::Config(format!("invalid radial interval [{r_in}, {r_out}]")));
        }
        if cells < 64 {
            return Err(Error::Config(format!("need at least 64 cells, got {cells}")));
        }
        if gamma <= 0.0 {
            return Err(Error::Config("grading factor must be positive".into()));
        }
        let n = cells as Real;
        let frac = |i: Real| -> Real {
            if (gamma - 1.0).abs() < 1e-13 {
                i / n
            } else {
                (gamma.powf(i) - 1.0) / (gamma.powf(n) - 1.0)
            }
        };
        let mut nodes = Vec::with_capacity(cells + 1);
        for i in 0..=cells {
            nodes.push(r_in + (r_out - r_in) * frac(i as Real));
        }
        *nodes.last_mut().unwrap() = r_out;
        Ok(Self { nodes, inner_mode, profile: Profile::Graded { gamma } })
    }

    /// Mesh with nodes geometric in r (uniform in log r); requires r_in > 0.
    pub fn log_spaced(r_in: Real, r_out: Real, cells: usize, inner_mode: InnerMode) -> Result<Self> {
        if !(r_out > r_in && r_in > 0.0) {
            return Err(Error::Config(format!("invalid log interval [{r_in}, {r_out}]")));
        }
        if cells < 64 {
            return Err(Error::Config(format!("need at least 64 cells, got {cells}")));
        }
        let (la, lb) = (r_in.ln(), r_out.ln());
        let mut nodes: Vec<Real> = (0..=cells)
            .map(|i| (la + (lb - la) * i as Real / cells as Real).exp())
            .collect();
        nodes[0] = r_in;
        *nodes.last_mut().unwrap() = r_out;
        Ok(Self { nodes, inner_mode, profile: Profile::Log })
    }

    /// Mesh over caller-supplied strictly increasing nodes.
    pub fn from_nodes(nodes: Vec<Real>, inner_mode: InnerMode) -> Result<Self> {
        if nodes.len() < 8 {
            return Err(Error::Config(format!("need at least 8 nodes, got {}", nodes.len())));
        }
        if nodes[0] < 0.0 || nodes.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config("nodes must be nonnegative and strictly increasing".into()));
        }
        Ok(Self { nodes, inner_mode, profile: Profile::Explicit })
    }

    /// Doubled mesh with the same endpoints and node nesting: every node of
    /// `self` is a node of the refinement.
    pub fn refine_double(&self) -> Self {
        if self.profile == Profile::Explicit {
            let mut nodes = Vec::with_capacity(2 * self.nodes.len() - 1);
            for w in self.nodes.windows(2) {
                nodes.push(w[0]);
                nodes.push(0.5 * (w[0] + w[1]));
            }
            nodes.push(*self.nodes.last().unwrap());
            return Self { nodes, inner_mode: self.inner_mode, profile: Profile::Explicit };
        }
        let cells = 2 * (self.nodes.len() - 1);
        match self.profile {
            Profile::Graded { gamma } => Self::graded(
                self.r_in(),
                self.r_out(),
                cells,
                gamma.sqrt(),
                self.inner_mode,
            )
            .expect("refinement of a valid grid is valid"),
            Profile::Log => Self::log_spaced(self.r_in(), self.r_out(), cells, self.inner_mode)
                .expect("refinement of a valid grid is valid"),
            Profile::Explicit => unreachable!("handled above"),
        }
    }

    pub fn nodes(&self) -> &[Real] {
        &self.nodes
    }
    pub fn len(&self) -> usize {
        self.nodes.len()
    }
    pub fn is_empty(&self) -> bool {
        false
    }
    pub fn r_in(&self) -> Real {
        self.nodes[0]
    }
    pub fn r_out(&self) -> Real {
        *self.nodes.last().unwrap()
    }
    pub fn inner_mode(&self) -> InnerMode {
        self.inner_mode
    }

    /// Index of the segment containing r (clamped).
    fn segment(&self, r: Real) -> usize {
        if r <= self.nodes[0] {
            return 0;
        }
        if r >= *self.nodes.last().unwrap() {
            return self.nodes.len() - 2;
        }
        self.nodes.partition_point(|&x| x <= r).max(1) - 1
    }
}

/// Sampled radial function with reconstructed derivatives (five-point
/// local-polynomial stencils; one-sided near the ends).
#[derive(Debug, Clone)]
pub struct RadialField {
    grid: RadialGrid,
    values: Vec<Real>,
    d1: Vec<Real>,
    d2: Vec<Real>,
}

impl RadialField {
    /// Builds from nodal values; derivatives reconstructed from the samples.
    pub fn from_values(grid: RadialGrid, values: Vec<Real>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Config("field/grid length mismatch".into()));
        }
        let (d1, d2) = reconstruct_derivatives(grid.nodes(), &values);
        Ok(Self { grid, values, d1, d2 })
    }

    /// Samples a closure on the grid (stencil-reconstructed derivatives).
    pub fn from_function(grid: RadialGrid, f: impl Fn(Real) -> Real) -> Self {
        let values: Vec<Real> = grid.nodes().iter().map(|&r| f(r)).collect();
        let (d1, d2) = reconstruct_derivatives(grid.nodes(), &values);
        Self { grid, values, d1, d2 }
    }

    /// Builds from nodal values with an analytically known first
    /// derivative; the second derivative is reconstructed from d1.
    pub fn from_values_with_d1(grid: RadialGrid, values: Vec<Real>, d1: Vec<Real>) -> Result<Self> {
        if values.len() != grid.len() || d1.len() != grid.len() {
            return Err(Error::Config("field/grid length mismatch".into()));
        }
        let (d2, _) = reconstruct_derivatives(grid.nodes(), &d1);
        Ok(Self { grid, values, d1, d2 })
    }

    /// Samples a closure together with analytically known derivatives.
    pub fn from_function_with_derivs(
        grid: RadialGrid,
        f: impl Fn(Real) -> Real,
        f1: impl Fn(Real) -> Real,
        f2: impl Fn(Real) -> Real,
    ) -> Self {
        let values = grid.nodes().iter().map(|&r| f(r)).collect();
        let d1 = grid.nodes().iter().map(|&r| f1(r)).collect();
        let d2 = grid.nodes().iter().map(|&r| f2(r)).collect();
        Self { grid, values, d1, d2 }
    }

    pub fn grid(&self) -> &RadialGrid {
        &self.grid
    }
    pub fn values(&self) -> &[Real] {
        &self.values
    }
    pub fn d1(&self) -> &[Real] {
        &self.d1
    }
    pub fn d2(&self) -> &[Real] {
        &self.d2
    }

    /// C¹ cubic-Hermite interpolation of the value at r.
    pub fn value_at(&self, r: Real) -> Real {
        self.hermite(r).0
    }

    /// Derivative of the interpolant at r.
    pub fn deriv_at(&self, r: Real) -> Real {
        self.hermite(r).1
    }

    fn hermite(&self, r: Real) -> (Real, Real) {
        let i = self.grid.segment(r);
        let (x0, x1) = (self.grid.nodes[i], self.grid.nodes[i + 1]);
        let h = x1 - x0;
        let t = ((r - x0) / h).clamp(0.0, 1.0);
        let (y0, y1) = (self.values[i], self.values[i + 1]);
        let (m0, m1) = (self.d1[i] * h, self.d1[i + 1] * h);
        let t2 = t * t;
        let t3 = t2 * t;
        let v = (2.0 * t3 - 3.0 * t2 + 1.0) * y0
            + (t3 - 2.0 * t2 + t) * m0
            + (-2.0 * t3 + 3.0 * t2) * y1
            + (t3 - t2) * m1;
        let dv = ((6.0 * t2 - 6.0 * t) * y0
            + (3.0 * t2 - 4.0 * t + 1.0) * m0
            + (-6.0 * t2 + 6.0 * t) * y1
            + (3.0 * t2 - 2.0 * t) * m1)
            / h;
        (v, dv)
    }

    /// Nodal maximum of |self - other| over a radius window, comparing at
    /// the nodes of `self` (other is interpolated).
    pub fn max_abs_diff(&self, other: &RadialField, window: (Real, Real)) -> Real {
        self.grid
            .nodes()
            .iter()
            .zip(&self.values)
            .filter(|(&r, _)| r >= window.0 && r <= window.1)
            .fold(0.0, |acc, (&r, &v)| acc.max((v - other.value_at(r)).abs()))
    }
}

/// Five-point local polynomial derivative reconstruction on an arbitrary
/// strictly increasing mesh.
fn reconstruct_derivatives(x: &[Real], y: &[Real]) -> (Vec<Real>, Vec<Real>) {
    let n = x.len();
    let m = 5.min(n);
    let mut d1 = vec![0.0; n];
    let mut d2 = vec![0.0; n];
    for i in 0..n {
        let lo = i.saturating_sub(2).min(n - m);
        let xs = &x[lo..lo + m];
        let w = diff::fornberg_weights(xs, x[i], 2);
        let mut s1 = 0.0;
        let mut s2 = 0.0;
        for j in 0..m {
            s1 += w[1][j] * y[lo + j];
            s2 += w[2][j] * y[lo + j];
        }
        d1[i] = s1;
        d2[i] = s2;
    }
    (d1, d2)
}
