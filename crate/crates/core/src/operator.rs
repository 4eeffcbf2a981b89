//! Space-tagged operator matrices.
//!
//! Every operator carries tags saying whether its domain and codomain are the
//! weighted function space (`<.,.>_h`) or a plain Euclidean space. The tags
//! drive two things that are easy to get silently wrong:
//!
//! * the Hilbert adjoint, which is *not* the transpose on mixed maps — a
//!   factor `h` (or `1/h`) appears whenever one side is the function space;
//! * induced operator norms, computed as the largest singular value after
//!   rescaling the function-space side by `sqrt(h)`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::grid::{DiscreteFunction, SpatialGrid};

/// Which inner product a vector side of an operator lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Space {
    /// The weighted grid space with `<u,v>_h = h u.v`.
    Function,
    /// Plain Euclidean coordinates.
    Euclidean,
}

/// A dense matrix together with the spaces it maps between.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix {
    matrix: DMatrix<f64>,
    domain: Space,
    codomain: Space,
    /// Grid weight; meaningful whenever either side is the function space.
    h: f64,
}

impl OperatorMatrix {
    /// Function-space endomorphism (N x N on the grid).
    pub fn function_map(grid: &SpatialGrid, matrix: DMatrix<f64>) -> Result<Self> {
        let n = grid.n_interior();
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::DimensionMismatch(format!(
                "function map must be {n}x{n}, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(Self { matrix, domain: Space::Function, codomain: Space::Function, h: grid.h() })
    }

    /// Map from R^m into the function space (N x m).
    pub fn injector(grid: &SpatialGrid, matrix: DMatrix<f64>) -> Result<Self> {
        if matrix.nrows() != grid.n_interior() {
            return Err(Error::DimensionMismatch(format!(
                "injector must have {} rows, got {}",
                grid.n_interior(),
                matrix.nrows()
            )));
        }
        Ok(Self { matrix, domain: Space::Euclidean, codomain: Space::Function, h: grid.h() })
    }

    /// Functional from the function space into R^p (p x N).
    pub fn functional(grid: &SpatialGrid, matrix: DMatrix<f64>) -> Result<Self> {
        if matrix.ncols() != grid.n_interior() {
            return Err(Error::DimensionMismatch(format!(
                "functional must have {} columns, got {}",
                grid.n_interior(),
                matrix.ncols()
            )));
        }
        Ok(Self { matrix, domain: Space::Function, codomain: Space::Euclidean, h: grid.h() })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.matrix
    }

    pub fn domain(&self) -> Space {
        self.domain
    }

    pub fn codomain(&self) -> Space {
        self.codomain
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn nrows(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.matrix.ncols()
    }

    /// Applies the operator to raw coefficients of the domain space.
    pub fn apply(&self, v: &DVector<f64>) -> Result<DVector<f64>> {
        if v.len() != self.matrix.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "operator is {}x{}, input has length {}",
                self.matrix.nrows(),
                self.matrix.ncols(),
                v.len()
            )));
        }
        Ok(&self.matrix * v)
    }

    /// Applies a function-domain operator to a sampled function.
    pub fn apply_function(&self, u: &DiscreteFunction) -> Result<DVector<f64>> {
        if self.domain != Space::Function {
            return Err(Error::SpaceMismatch(
                "operator domain is Euclidean, cannot apply to a function".into(),
            ));
        }
        self.apply(u.values())
    }

    /// Composition `self ∘ other` (apply `other` first).
    pub fn compose(&self, other: &OperatorMatrix) -> Result<OperatorMatrix> {
        if other.codomain != self.domain {
            return Err(Error::SpaceMismatch(format!(
                "composition source codomain {:?} does not match target domain {:?}",
                other.codomain, self.domain
            )));
        }
        if other.matrix.nrows() != self.matrix.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "composition shapes {}x{} . {}x{}",
                self.matrix.nrows(),
                self.matrix.ncols(),
                other.matrix.nrows(),
                other.matrix.ncols()
            )));
        }
        Ok(OperatorMatrix {
            matrix: &self.matrix * &other.matrix,
            domain: other.domain,
            codomain: self.codomain,
            h: self.h,
        })
    }

    /// Hilbert adjoint with respect to the tagged inner products.
    ///
    /// With `W = h I` the weight matrix: a map `K: H -> H` has `K* = K^T`, a
    /// map `K: R^m -> H` has `K* = h K^T`, and a map `K: H -> R^p` has
    /// `K* = K^T / h`. Plain transpose for Euclidean-to-Euclidean.
    pub fn adjoint(&self) -> OperatorMatrix {
        let factor = match (self.domain, self.codomain) {
            (Space::Function, Space::Function) | (Space::Euclidean, Space::Euclidean) => 1.0,
            (Space::Euclidean, Space::Function) => self.h,
            (Space::Function, Space::Euclidean) => 1.0 / self.h,
        };
        OperatorMatrix {
            matrix: self.matrix.transpose() * factor,
            domain: self.codomain,
            codomain: self.domain,
            h: self.h,
        }
    }

    /// Induced operator norm between the tagged spaces.
    ///
    /// Rescaling the function-space side by `sqrt(h)` turns the weighted
    /// norms into Euclidean ones, so the induced norm is the largest singular
    /// value of the rescaled matrix.
    pub fn operator_norm(&self) -> f64 {
        let scale = match (self.domain, self.codomain) {
            (Space::Function, Space::Function) | (Space::Euclidean, Space::Euclidean) => 1.0,
            // K: R^m -> H measures outputs in the weighted norm.
            (Space::Euclidean, Space::Function) => self.h.sqrt(),
            // K: H -> R^p measures inputs in the weighted norm.
            (Space::Function, Space::Euclidean) => 1.0 / self.h.sqrt(),
        };
        spectral_norm(&self.matrix) * scale
    }
}

/// Largest singular value of a dense matrix.
pub fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    let svd = m.clone().svd(false, false);
    svd.singular_values.max()
}

/// Second-order Dirichlet Laplacian on the grid: `(1/h^2) tridiag(1,-2,1)`.
///
/// Boundary rows are eliminated, so the matrix acts on interior node values
/// only. Symmetric and negative definite for every grid.
pub fn discretize_heat(grid: &SpatialGrid) -> OperatorMatrix {
    let n = grid.n_interior();
    let w = 1.0 / (grid.h() * grid.h());
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        m[(i, i)] = -2.0 * w;
        if i + 1 < n {
            m[(i, i + 1)] = w;
            m[(i + 1, i)] = w;
        }
    }
    OperatorMatrix { matrix: m, domain: Space::Function, codomain: Space::Function, h: grid.h() }
}

/// Distributed control injector `u -> b(x) u` from sampled profiles.
///
/// One column per input channel; for a single profile the induced norm is
/// the weighted L2 norm of `b`.
pub fn build_multi_control_injector(profiles: &[DiscreteFunction]) -> Result<OperatorMatrix> {
    let first = profiles
        .first()
        .ok_or_else(|| Error::DimensionMismatch("need at least one control profile".into()))?;
    let grid = first.grid();
    let n = grid.n_interior();
    for p in profiles {
        if p.grid() != grid {
            return Err(Error::DimensionMismatch(
                "control profiles sampled on different grids".into(),
            ));
        }
    }
    let m = DMatrix::from_fn(n, profiles.len(), |i, j| profiles[j].values()[i]);
    OperatorMatrix::injector(&grid, m)
}

/// Single-input control injector.
pub fn build_control_injector(b_samples: &DiscreteFunction) -> Result<OperatorMatrix> {
    build_multi_control_injector(std::slice::from_ref(b_samples))
}

/// Point observation `phi -> phi(ell)` as a row functional.
///
/// Off-grid points are evaluated by linear interpolation between the two
/// bracketing nodes; the homogeneous boundary values absorb the weight when
/// `ell` falls in the first or last cell.
pub fn build_point_observation(ell: f64, grid: &SpatialGrid) -> Result<OperatorMatrix> {
    if !(ell > 0.0 && ell < 1.0) {
        return Err(Error::DomainError(format!(
            "observation point must lie in (0,1), got {ell}"
        )));
    }
    let n = grid.n_interior();
    let h = grid.h();
    let mut row = DMatrix::zeros(1, n);
    // Cell index: ell lies in [x_j, x_{j+1}) with x_0 = 0 the left boundary.
    let j = ((ell / h).floor() as usize).min(n);
    let t = ell / h - j as f64;
    // Interior endpoints of the cell get the hat-function weights; boundary
    // endpoints contribute zero by the Dirichlet condition.
    if j >= 1 {
        row[(0, j - 1)] = 1.0 - t;
    }
    if j < n {
        row[(0, j)] = t;
    }
    // Exactly-on-node case: floor gives t = 0 and weight 1 on node j-1.
    OperatorMatrix::functional(grid, row)
}
