//! Uniform 1-D grids and node-sampled functions.
//!
//! The spatial domain is the open interval (0,1) with homogeneous Dirichlet
//! ends. A grid with `n` interior nodes has spacing `h = 1/(n+1)` and carries
//! the discrete inner product
//!
//! ```text
//! <u, v>_h = h * sum_i u_i v_i
//! ```
//!
//! which is the rectangle rule over interior nodes. Functions vanishing at
//! the boundary are integrated to O(h^2) accuracy, which is all the
//! discretized Dirichlet operators need.

use nalgebra::DVector;

use crate::error::{Error, Result};

/// Uniform grid of interior nodes on (0,1).
///
/// Cheap to copy; node coordinates are derived from `h` on demand.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpatialGrid {
    n_interior: usize,
    h: f64,
}

impl SpatialGrid {
    /// Number of interior nodes.
    pub fn n_interior(&self) -> usize {
        self.n_interior
    }

    /// Node spacing `1/(n+1)`.
    pub fn h(&self) -> f64 {
        self.h
    }

    /// Coordinate of the `i`-th interior node (0-based): `x = (i+1) h`.
    pub fn node(&self, i: usize) -> f64 {
        (i + 1) as f64 * self.h
    }

    /// All interior node coordinates, strictly increasing in (0,1).
    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n_interior).map(|i| self.node(i)).collect()
    }

    /// Samples a scalar function at every interior node.
    pub fn sample(&self, f: impl Fn(f64) -> f64) -> DiscreteFunction {
        let values = DVector::from_fn(self.n_interior, |i, _| f(self.node(i)));
        DiscreteFunction { grid: *self, values }
    }

    /// The zero function on this grid.
    pub fn zero_function(&self) -> DiscreteFunction {
        DiscreteFunction {
            grid: *self,
            values: DVector::zeros(self.n_interior),
        }
    }

    /// Wraps raw node values as a function on this grid.
    pub fn function_from_values(&self, values: DVector<f64>) -> Result<DiscreteFunction> {
        if values.len() != self.n_interior {
            return Err(Error::DimensionMismatch(format!(
                "expected {} node values, got {}",
                self.n_interior,
                values.len()
            )));
        }
        Ok(DiscreteFunction { grid: *self, values })
    }
}

/// Builds the uniform interior grid on (0,1).
pub fn build_grid(n_interior: usize) -> Result<SpatialGrid> {
    if n_interior < 2 {
        return Err(Error::InvalidGrid(n_interior));
    }
    Ok(SpatialGrid {
        n_interior,
        h: 1.0 / (n_interior + 1) as f64,
    })
}

/// A function known by its interior node samples.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteFunction {
    grid: SpatialGrid,
    values: DVector<f64>,
}

impl DiscreteFunction {
    pub fn grid(&self) -> SpatialGrid {
        self.grid
    }

    pub fn values(&self) -> &DVector<f64> {
        &self.values
    }

    pub fn into_values(self) -> DVector<f64> {
        self.values
    }

    /// Weighted L2 norm `sqrt(<u,u>_h)`.
    pub fn norm_h(&self) -> f64 {
        (self.grid.h * self.values.norm_squared()).sqrt()
    }
}

/// Discrete inner product `<u,v>_h = h * sum u_i v_i`.
pub fn inner_product(u: &DiscreteFunction, v: &DiscreteFunction) -> Result<f64> {
    if u.grid != v.grid {
        return Err(Error::DimensionMismatch(format!(
            "inner product across grids: {} vs {} interior nodes",
            u.grid.n_interior, v.grid.n_interior
        )));
    }
    Ok(u.grid.h * u.values.dot(&v.values))
}

/// Weighted norm of a raw coefficient vector on `grid`.
pub fn norm_h(grid: &SpatialGrid, values: &DVector<f64>) -> f64 {
    (grid.h() * values.norm_squared()).sqrt()
}
