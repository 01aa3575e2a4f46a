//! Discrete Lyapunov equations and controllability Gramians.
//!
//! For a stable plant the identifying-complexity bound needs two Gramians:
//! the input-driven `psi1` solving `A X A' - X + B B' = 0` and the
//! noise-driven `psi2` solving `A X A' - X + I = 0`. Both are the limits
//! of the series `sum_k A^k Q (A^k)'`, which the solver accumulates by
//! Smith squaring: each step doubles the number of summed terms, so
//! convergence is quadratic for any spectral radius below one.

use nalgebra::DMatrix;
use thiserror::Error;

use crate::model::{self, LinearSystem, ModelError};

/// Margin below one that the spectral radius must clear before the solver
/// accepts the equation as well posed.
const STABILITY_MARGIN: f64 = 1e-9;
/// Relative Frobenius tolerance at which Smith squaring stops.
const CONVERGENCE_TOL: f64 = 1e-14;
/// Each doubling squares the propagator, so 64 rounds cover 2^64 series
/// terms; in practice the propagator underflows to zero long before that.
const MAX_DOUBLINGS: usize = 64;

#[derive(Debug, Error)]
pub enum GramianError {
    #[error(
        "system is not stable enough for a Lyapunov solution (spectral radius {spectral_radius})"
    )]
    Unstable { spectral_radius: f64 },
    #[error("right-hand side is asymmetric beyond tolerance (max deviation {deviation})")]
    AsymmetricInput { deviation: f64 },
    #[error("right-hand side is {q_rows}x{q_cols} but the system matrix is {a_dim}x{a_dim}")]
    ShapeMismatch {
        a_dim: usize,
        q_rows: usize,
        q_cols: usize,
    },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// The two controllability Gramians of a stable plant and their traces.
#[derive(Debug, Clone)]
pub struct GramianPair {
    /// Input-driven Gramian: solution of `A X A' - X + B B' = 0`.
    pub psi1: DMatrix<f64>,
    /// Noise-driven Gramian: solution of `A X A' - X + I = 0`.
    pub psi2: DMatrix<f64>,
    pub tr_psi1: f64,
    pub tr_psi2: f64,
}

/// Solves the discrete Lyapunov equation `A X A' - X + Q = 0` for
/// symmetric PSD `Q` and stable `A`.
///
/// The result is symmetrized and satisfies the residual bound
/// `||A X A' - X + Q||_F <= 1e-10 * max(1, ||Q||_F)`.
pub fn solve_dlyap(a: &DMatrix<f64>, q: &DMatrix<f64>) -> Result<DMatrix<f64>, GramianError> {
    let rho = model::spectral_radius(a)?;
    if rho >= 1.0 - STABILITY_MARGIN {
        return Err(GramianError::Unstable {
            spectral_radius: rho,
        });
    }
    let n = a.nrows();
    if q.nrows() != n || q.ncols() != n {
        return Err(GramianError::ShapeMismatch {
            a_dim: n,
            q_rows: q.nrows(),
            q_cols: q.ncols(),
        });
    }
    if q.iter().any(|v| !v.is_finite()) {
        return Err(ModelError::NonFinite {
            context: "right-hand side",
        }
        .into());
    }
    let deviation = (q - q.transpose()).amax();
    if deviation > 1e-10 * q.amax().max(1.0) {
        return Err(GramianError::AsymmetricInput { deviation });
    }

    // Smith squaring: X_{k+1} = X_k + M_k X_k M_k', M_{k+1} = M_k^2 with
    // M_0 = A, X_0 = Q sums the whole series in O(log) matrix products.
    let mut x = (q + q.transpose()) * 0.5;
    let mut propagator = a.clone();
    for _ in 0..MAX_DOUBLINGS {
        let update = &propagator * &x * propagator.transpose();
        x += &update;
        x = (&x + x.transpose()) * 0.5; // suppress asymmetry drift
        if update.norm() <= CONVERGENCE_TOL * x.norm() {
            break;
        }
        propagator = &propagator * &propagator;
    }
    Ok(x)
}

/// Computes both controllability Gramians of a stable plant.
pub fn gramians(sys: &LinearSystem) -> Result<GramianPair, GramianError> {
    if !sys.is_stable() {
        return Err(GramianError::Unstable {
            spectral_radius: sys.spectral_radius(),
        });
    }
    let bbt = sys.b() * sys.b().transpose();
    let psi1 = solve_dlyap(sys.a(), &bbt)?;
    let psi2 = solve_dlyap(
        sys.a(),
        &DMatrix::identity(sys.state_dim(), sys.state_dim()),
    )?;
    Ok(GramianPair {
        tr_psi1: psi1.trace(),
        tr_psi2: psi2.trace(),
        psi1,
        psi2,
    })
}
