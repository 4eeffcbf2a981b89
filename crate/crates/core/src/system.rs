//! The cascade plant and the numerical verification of its structural
//! assumptions: plant dissipativity, marginal stability and controllability
//! of the ODE, spectral separation, non-resonance, and detectability.
//!
//! All checks are report-style: they return typed pass/fail records with the
//! witness values, and never panic on a failing system.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::SpatialGrid;
use crate::linalg::{
    self, complex_singular_values, controllability_matrix, eigenvalues, lambda_max_symmetric,
    lambda_min_symmetric, numeric_rank, rank_from_singular_values, C64,
};
use crate::operator::{
    build_control_injector, build_point_observation, discretize_heat, OperatorMatrix, Space,
};

/// Relative singular-value threshold for numeric rank decisions.
pub const DEFAULT_RANK_TOL: f64 = 1e-10;
/// Minimum distance between the plant and ODE spectra.
pub const DEFAULT_SEPARATION_TOL: f64 = 1e-8;

/// Marginally stable ODE data `(S, Gamma, Q)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExoSystem {
    s: DMatrix<f64>,
    gamma: DMatrix<f64>,
    q: DMatrix<f64>,
}

impl ExoSystem {
    /// Builds the ODE block. `Q` must be symmetric positive definite; the
    /// marginal-stability inequality `QS + S^T Q <= 0` is left to
    /// [`check_ode_assumption`] so that failing systems can still be
    /// diagnosed.
    pub fn new(s: DMatrix<f64>, gamma: DMatrix<f64>, q: DMatrix<f64>) -> Result<Self> {
        let r = s.nrows();
        if s.ncols() != r {
            return Err(Error::DimensionMismatch("S must be square".into()));
        }
        if gamma.nrows() != r {
            return Err(Error::DimensionMismatch(format!(
                "Gamma must have {r} rows, got {}",
                gamma.nrows()
            )));
        }
        if q.shape() != (r, r) {
            return Err(Error::DimensionMismatch("Q must match the dimension of S".into()));
        }
        if !linalg::is_symmetric(&q, 1e-12) {
            return Err(Error::AssumptionViolation("Q is not symmetric".into()));
        }
        if lambda_min_symmetric(&q) <= 0.0 {
            return Err(Error::AssumptionViolation("Q is not positive definite".into()));
        }
        Ok(Self { s, gamma, q })
    }

    /// Identity-weighted constructor (`Q = I`), the skew-symmetric case.
    pub fn with_identity_weight(s: DMatrix<f64>, gamma: DMatrix<f64>) -> Result<Self> {
        let r = s.nrows();
        Self::new(s, gamma, DMatrix::identity(r, r))
    }

    pub fn s(&self) -> &DMatrix<f64> {
        &self.s
    }

    pub fn gamma(&self) -> &DMatrix<f64> {
        &self.gamma
    }

    pub fn q(&self) -> &DMatrix<f64> {
        &self.q
    }

    /// ODE dimension r.
    pub fn dim(&self) -> usize {
        self.s.nrows()
    }

    /// Number of plant outputs entering the ODE.
    pub fn n_outputs(&self) -> usize {
        self.gamma.ncols()
    }
}

/// The assembled cascade: plant `(A, B, C)`, ODE block, and the plant
/// Lyapunov pair `(P, mu)` with `mu` measured from the discretized operator.
#[derive(Debug, Clone)]
pub struct CascadeSystem {
    grid: SpatialGrid,
    a: OperatorMatrix,
    b: OperatorMatrix,
    c: OperatorMatrix,
    exo: ExoSystem,
    p: OperatorMatrix,
    mu: f64,
}

impl CascadeSystem {
    /// Assembles and validates a cascade. `p` defaults to the identity on
    /// the function space. The dissipation rate is measured here once.
    pub fn new(
        grid: SpatialGrid,
        a: OperatorMatrix,
        b: OperatorMatrix,
        c: OperatorMatrix,
        exo: ExoSystem,
        p: Option<OperatorMatrix>,
    ) -> Result<Self> {
        let n = grid.n_interior();
        let expect = |cond: bool, what: &str| -> Result<()> {
            if cond {
                Ok(())
            } else {
                Err(Error::SpaceMismatch(what.into()))
            }
        };
        expect(
            a.domain() == Space::Function && a.codomain() == Space::Function,
            "A must map the function space to itself",
        )?;
        expect(
            b.domain() == Space::Euclidean && b.codomain() == Space::Function,
            "B must map R^m into the function space",
        )?;
        expect(
            c.domain() == Space::Function && c.codomain() == Space::Euclidean,
            "C must map the function space into R^p",
        )?;
        if a.nrows() != n || b.nrows() != n || c.ncols() != n {
            return Err(Error::DimensionMismatch("operators do not match the grid size".into()));
        }
        if exo.n_outputs() != c.nrows() {
            return Err(Error::DimensionMismatch(format!(
                "Gamma has {} columns but C produces {} outputs",
                exo.n_outputs(),
                c.nrows()
            )));
        }
        let p = match p {
            Some(p) => {
                expect(
                    p.domain() == Space::Function && p.codomain() == Space::Function,
                    "P must map the function space to itself",
                )?;
                if p.nrows() != n {
                    return Err(Error::DimensionMismatch("P does not match the grid size".into()));
                }
                p
            }
            None => OperatorMatrix::function_map(&grid, DMatrix::identity(n, n))?,
        };
        let mu = measure_dissipation(&a, &p)?;
        Ok(Self { grid, a, b, c, exo, p, mu })
    }

    pub fn grid(&self) -> SpatialGrid {
        self.grid
    }

    pub fn a(&self) -> &OperatorMatrix {
        &self.a
    }

    pub fn b(&self) -> &OperatorMatrix {
        &self.b
    }

    pub fn c(&self) -> &OperatorMatrix {
        &self.c
    }

    pub fn exo(&self) -> &ExoSystem {
        &self.exo
    }

    pub fn p_op(&self) -> &OperatorMatrix {
        &self.p
    }

    /// Measured dissipation rate of the plant in the `P`-weighted metric.
    pub fn mu(&self) -> f64 {
        self.mu
    }

    /// Grid dimension N.
    pub fn n(&self) -> usize {
        self.grid.n_interior()
    }

    /// Number of control inputs m.
    pub fn n_inputs(&self) -> usize {
        self.b.ncols()
    }

    /// Number of outputs p.
    pub fn n_outputs(&self) -> usize {
        self.c.nrows()
    }

    /// ODE dimension r.
    pub fn r(&self) -> usize {
        self.exo.dim()
    }
}

/// Builds the reference parabolic plant on `grid`: Dirichlet Laplacian,
/// distributed control through `b_profile`, point observation at `ell`.
pub fn build_heat_cascade(
    grid: SpatialGrid,
    ell: f64,
    b_profile: &crate::grid::DiscreteFunction,
    exo: ExoSystem,
) -> Result<CascadeSystem> {
    let a = discretize_heat(&grid);
    let b = build_control_injector(b_profile)?;
    let c = build_point_observation(ell, &grid)?;
    CascadeSystem::new(grid, a, b, c, exo, None)
}

/// Largest `mu` with `<PA phi, phi>_h + <P phi, A phi>_h <= -mu ||phi||_h^2`
/// on the discrete space, i.e. `-lambda_max(PA + A^T P)`.
///
/// The weight `h` cancels in the Rayleigh quotient, so this is a plain
/// symmetric eigenvalue problem.
pub fn measure_dissipation(a: &OperatorMatrix, p: &OperatorMatrix) -> Result<f64> {
    if a.nrows() != a.ncols() || p.nrows() != p.ncols() || a.nrows() != p.nrows() {
        return Err(Error::DimensionMismatch(
            "dissipation check needs square matching operators".into(),
        ));
    }
    if !linalg::is_symmetric(p.matrix(), 1e-10) {
        return Err(Error::AssumptionViolation("P is not symmetric".into()));
    }
    if lambda_min_symmetric(p.matrix()) <= 0.0 {
        return Err(Error::AssumptionViolation("P is not positive definite".into()));
    }
    let pa = p.matrix() * a.matrix();
    let sym = &pa + pa.transpose();
    Ok(-lambda_max_symmetric(&sym))
}

/// Plant dissipativity record.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DissipationReport {
    /// Measured decay rate; positive iff the discretized plant is
    /// exponentially dissipative in the P-metric.
    pub mu: f64,
    /// Optional externally supplied nominal value for comparison.
    pub mu_nominal: Option<f64>,
    pub pass: bool,
}

/// Checks exponential dissipativity of the plant (the measured `mu` must be
/// strictly positive).
pub fn check_dissipation(sys: &CascadeSystem, mu_nominal: Option<f64>) -> DissipationReport {
    DissipationReport { mu: sys.mu(), mu_nominal, pass: sys.mu() > 0.0 }
}

/// ODE-side record: controllability and marginal stability.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OdeAssumptionReport {
    pub kalman_rank: usize,
    pub dim: usize,
    pub controllable: bool,
    /// Largest eigenvalue of `QS + S^T Q`; must be <= 0 up to roundoff.
    pub lambda_max_qs: f64,
    pub marginally_stable: bool,
    pub pass: bool,
}

/// Kalman rank test on `(S, Gamma)` plus the eigenvalue test on
/// `QS + S^T Q`.
pub fn check_ode_assumption(exo: &ExoSystem) -> OdeAssumptionReport {
    let r = exo.dim();
    let kalman = controllability_matrix(exo.s(), exo.gamma());
    let kalman_rank = numeric_rank(&kalman, DEFAULT_RANK_TOL);
    let controllable = kalman_rank == r;

    let qs = exo.q() * exo.s();
    let sym = &qs + qs.transpose();
    let lambda_max_qs = lambda_max_symmetric(&sym);
    let scale = 1.0 + crate::operator::spectral_norm(&sym);
    let marginally_stable = lambda_max_qs <= 1e-9 * scale;

    OdeAssumptionReport {
        kalman_rank,
        dim: r,
        controllable,
        lambda_max_qs,
        marginally_stable,
        pass: controllable && marginally_stable,
    }
}

/// Spectral separation record.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectraReport {
    pub min_separation: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Compares the spectra of the (discretized) plant operator and `S`.
pub fn check_spectra_disjoint(a: &OperatorMatrix, s: &DMatrix<f64>) -> SpectraReport {
    check_spectra_disjoint_with_tol(a, s, DEFAULT_SEPARATION_TOL)
}

pub fn check_spectra_disjoint_with_tol(
    a: &OperatorMatrix,
    s: &DMatrix<f64>,
    tolerance: f64,
) -> SpectraReport {
    let a_eigs: Vec<C64> = if linalg::is_symmetric(a.matrix(), 1e-12) {
        linalg::symmetric_eigenvalues(a.matrix())
            .iter()
            .map(|&v| C64::new(v, 0.0))
            .collect()
    } else {
        eigenvalues(a.matrix())
    };
    let s_eigs = eigenvalues(s);
    let mut min_separation = f64::INFINITY;
    for la in &a_eigs {
        for ls in &s_eigs {
            min_separation = min_separation.min((la - ls).norm());
        }
    }
    SpectraReport { min_separation, tolerance, pass: min_separation > tolerance }
}

/// Rank evaluation of the non-resonance block matrix at one eigenvalue.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NonResonanceEvaluation {
    pub lambda_re: f64,
    pub lambda_im: f64,
    pub rank: usize,
    pub required: usize,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NonResonanceReport {
    pub evaluations: Vec<NonResonanceEvaluation>,
    pub pass: bool,
}

/// Surjectivity of `[[A - lambda I, B], [C, 0]]` at every eigenvalue of `S`.
///
/// Requires `m >= p`; rank is measured through singular values of the
/// complex block matrix.
pub fn check_nonresonance(sys: &CascadeSystem) -> Result<NonResonanceReport> {
    check_nonresonance_with_tol(sys, DEFAULT_RANK_TOL)
}

pub fn check_nonresonance_with_tol(sys: &CascadeSystem, tol: f64) -> Result<NonResonanceReport> {
    let (n, m, p) = (sys.n(), sys.n_inputs(), sys.n_outputs());
    if m < p {
        return Err(Error::TooFewInputs { m, p });
    }
    let required = n + p;
    let mut evaluations = Vec::new();
    for lam in eigenvalues(sys.exo().s()) {
        let mut re = DMatrix::zeros(n + p, n + m);
        let mut im = DMatrix::zeros(n + p, n + m);
        re.view_mut((0, 0), (n, n)).copy_from(sys.a().matrix());
        for i in 0..n {
            re[(i, i)] -= lam.re;
            im[(i, i)] = -lam.im;
        }
        re.view_mut((0, n), (n, m)).copy_from(sys.b().matrix());
        re.view_mut((n, 0), (p, n)).copy_from(sys.c().matrix());
        let sv = complex_singular_values(&re, &im)?;
        let rank = rank_from_singular_values(&sv, tol);
        evaluations.push(NonResonanceEvaluation {
            lambda_re: lam.re,
            lambda_im: lam.im,
            rank,
            required,
            pass: rank >= required,
        });
    }
    let pass = evaluations.iter().all(|e| e.pass);
    Ok(NonResonanceReport { evaluations, pass })
}

/// Detectability record (PBH test).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DetectabilityReport {
    pub pass: bool,
    /// Eigenvalue failing the PBH rank test, if any.
    pub offending_re: Option<f64>,
    pub offending_im: Option<f64>,
}

/// PBH detectability of `(S, HQ)`: full column rank of `[S - lambda I; HQ]`
/// at every eigenvalue with nonnegative real part.
pub fn check_detectability(s: &DMatrix<f64>, hq: &DMatrix<f64>) -> Result<DetectabilityReport> {
    let r = s.nrows();
    if hq.ncols() != r {
        return Err(Error::DimensionMismatch(format!(
            "HQ must have {r} columns, got {}",
            hq.ncols()
        )));
    }
    let m = hq.nrows();
    for lam in eigenvalues(s) {
        if lam.re < -1e-9 {
            continue;
        }
        let mut re = DMatrix::zeros(r + m, r);
        let mut im = DMatrix::zeros(r + m, r);
        re.view_mut((0, 0), (r, r)).copy_from(s);
        for i in 0..r {
            re[(i, i)] -= lam.re;
            im[(i, i)] = -lam.im;
        }
        re.view_mut((r, 0), (m, r)).copy_from(hq);
        let sv = complex_singular_values(&re, &im)?;
        if rank_from_singular_values(&sv, DEFAULT_RANK_TOL) < r {
            return Ok(DetectabilityReport {
                pass: false,
                offending_re: Some(lam.re),
                offending_im: Some(lam.im),
            });
        }
    }
    Ok(DetectabilityReport { pass: true, offending_re: None, offending_im: None })
}

/// Stacks a plant coefficient vector and an ODE vector into one state.
pub fn stack_state(phi: &DVector<f64>, z: &DVector<f64>) -> DVector<f64> {
    let mut w = DVector::zeros(phi.len() + z.len());
    w.rows_mut(0, phi.len()).copy_from(phi);
    w.rows_mut(phi.len(), z.len()).copy_from(z);
    w
}
