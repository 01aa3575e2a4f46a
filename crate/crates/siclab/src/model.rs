//! Plant, noise and feedback-gain types.
//!
//! The plant is the discrete-time linear system
//! `x_{t+1} = A x_t + B u_t + w_{t+1}` with `A` n-by-n and `B` n-by-m.
//! Stability (spectral radius of `A` below one) is computed at
//! construction and carried on the value; downstream bound computations
//! refuse unstable systems instead of trusting a caller-supplied flag.
//!
//! All types are immutable after construction and can be shared freely
//! across threads.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Errors from plant construction, generation and file parsing.
#[derive(Debug, Error)]
pub enum ModelError {
    #[error("matrix must be square, got {rows}x{cols}")]
    NonSquare { rows: usize, cols: usize },
    #[error("{context} contains a non-finite entry")]
    NonFinite { context: &'static str },
    #[error("{context} must have at least one row and one column")]
    EmptyMatrix { context: &'static str },
    #[error("dimension mismatch: {context}")]
    DimensionMismatch { context: String },
    #[error("target spectral radius must lie in (0, 1), got {value}")]
    SpectralTargetOutOfRange { value: f64 },
    #[error("variances must be non-negative, got ({sigma_w_sq}, {sigma_u_sq})")]
    NegativeVariance { sigma_w_sq: f64, sigma_u_sq: f64 },
    #[error("random plant generation drew {attempts} near-nilpotent matrices in a row")]
    DegenerateDraw { attempts: usize },
    #[error("matrix rows have inconsistent lengths")]
    RaggedRows,
    #[error("invalid plant JSON: {0}")]
    Json(#[from] serde_json::Error),
}

/// Largest magnitude among the eigenvalues of a square matrix.
///
/// Deterministic for fixed input; accurate to about 1e-9 relative for the
/// well-conditioned, small matrices this crate works with.
pub fn spectral_radius(matrix: &DMatrix<f64>) -> Result<f64, ModelError> {
    if matrix.nrows() == 0 || matrix.ncols() == 0 {
        return Err(ModelError::EmptyMatrix { context: "matrix" });
    }
    if matrix.nrows() != matrix.ncols() {
        return Err(ModelError::NonSquare {
            rows: matrix.nrows(),
            cols: matrix.ncols(),
        });
    }
    if matrix.iter().any(|v| !v.is_finite()) {
        return Err(ModelError::NonFinite { context: "matrix" });
    }
    Ok(matrix
        .complex_eigenvalues()
        .iter()
        .map(|ev| ev.norm())
        .fold(0.0, f64::max))
}

/// A discrete-time linear plant `x_{t+1} = A x_t + B u_t + w_{t+1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSystem {
    a: DMatrix<f64>,
    b: DMatrix<f64>,
    spectral_radius: f64,
}

impl LinearSystem {
    /// Builds a plant from its transition matrix `A` (n-by-n) and input
    /// matrix `B` (n-by-m), verifying dimensions and finiteness and
    /// computing the spectral radius once.
    pub fn new(a: DMatrix<f64>, b: DMatrix<f64>) -> Result<Self, ModelError> {
        let rho = spectral_radius(&a)?;
        if b.nrows() == 0 || b.ncols() == 0 {
            return Err(ModelError::EmptyMatrix {
                context: "input matrix",
            });
        }
        if b.nrows() != a.nrows() {
            return Err(ModelError::DimensionMismatch {
                context: format!(
                    "input matrix has {} rows but the state dimension is {}",
                    b.nrows(),
                    a.nrows()
                ),
            });
        }
        if b.iter().any(|v| !v.is_finite()) {
            return Err(ModelError::NonFinite {
                context: "input matrix",
            });
        }
        Ok(Self {
            a,
            b,
            spectral_radius: rho,
        })
    }

    /// State dimension n.
    pub fn state_dim(&self) -> usize {
        self.a.nrows()
    }

    /// Input dimension m.
    pub fn input_dim(&self) -> usize {
        self.b.ncols()
    }

    /// Transition matrix `A`.
    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    /// Input matrix `B`.
    pub fn b(&self) -> &DMatrix<f64> {
        &self.b
    }

    /// Spectral radius of `A`, computed at construction.
    pub fn spectral_radius(&self) -> f64 {
        self.spectral_radius
    }

    /// Whether the plant is (Schur) stable, i.e. the spectral radius is
    /// strictly below one.
    pub fn is_stable(&self) -> bool {
        self.spectral_radius < 1.0
    }

    /// Closes the loop with state feedback `u_t = F x_t + r_t`, returning
    /// the system `x_{t+1} = (A + B F) x_t + B r_t + w_{t+1}`.
    ///
    /// Stability of the result is re-verified on construction; an unstable
    /// closed loop is representable, it just cannot be fed to the Gramian
    /// and bound computations.
    pub fn close_loop(&self, gain: &FeedbackGain) -> Result<LinearSystem, ModelError> {
        let f = gain.matrix();
        if f.nrows() != self.input_dim() || f.ncols() != self.state_dim() {
            return Err(ModelError::DimensionMismatch {
                context: format!(
                    "gain is {}x{} but the plant needs {}x{}",
                    f.nrows(),
                    f.ncols(),
                    self.input_dim(),
                    self.state_dim()
                ),
            });
        }
        let a_closed = &self.a + &self.b * f;
        LinearSystem::new(a_closed, self.b.clone())
    }

    /// The built-in 4-state, 2-input reference plant used by the CLI's
    /// `--plant paper` shorthand and the stock experiments.
    pub fn reference_plant() -> LinearSystem {
        let a = DMatrix::from_row_slice(
            4,
            4,
            &[
                0.23, 0.45, -0.04, -0.04, //
                0.45, -0.46, -0.12, 0.15, //
                -0.04, -0.12, 0.43, -0.02, //
                -0.04, 0.15, -0.02, 0.20,
            ],
        );
        let b = DMatrix::from_row_slice(
            4,
            2,
            &[
                0.27, -1.32, //
                -0.29, -0.31, //
                -0.64, 0.75, //
                -0.13, -0.97,
            ],
        );
        LinearSystem::new(a, b).expect("reference plant is well formed")
    }

    /// Parses the plant file format: `{"A": [[..], ..], "B": [[..], ..]}`
    /// with row-major numeric arrays. Ragged rows are rejected.
    pub fn from_json_str(text: &str) -> Result<Self, ModelError> {
        let file: PlantFile = serde_json::from_str(text)?;
        let a = matrix_from_rows(&file.a)?;
        let b = matrix_from_rows(&file.b)?;
        LinearSystem::new(a, b)
    }

    /// Serializes the plant in the same JSON format `from_json_str`
    /// accepts; numbers round-trip exactly.
    pub fn to_json_string(&self) -> String {
        let file = PlantFile {
            a: matrix_to_rows(&self.a),
            b: matrix_to_rows(&self.b),
        };
        serde_json::to_string_pretty(&file).expect("plant serializes")
    }
}

#[derive(Serialize, Deserialize)]
struct PlantFile {
    #[serde(rename = "A")]
    a: Vec<Vec<f64>>,
    #[serde(rename = "B")]
    b: Vec<Vec<f64>>,
}

fn matrix_from_rows(rows: &[Vec<f64>]) -> Result<DMatrix<f64>, ModelError> {
    if rows.is_empty() || rows[0].is_empty() {
        return Err(ModelError::EmptyMatrix { context: "matrix" });
    }
    let ncols = rows[0].len();
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(ModelError::RaggedRows);
    }
    Ok(DMatrix::from_fn(rows.len(), ncols, |i, j| rows[i][j]))
}

fn matrix_to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

/// Per-coordinate variances of the process noise (`sigma_w_sq`) and of the
/// adversary's Gaussian probing input (`sigma_u_sq`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseConfig {
    sigma_w_sq: f64,
    sigma_u_sq: f64,
}

impl NoiseConfig {
    pub fn new(sigma_w_sq: f64, sigma_u_sq: f64) -> Result<Self, ModelError> {
        if !sigma_w_sq.is_finite() || !sigma_u_sq.is_finite() {
            return Err(ModelError::NonFinite {
                context: "noise variance",
            });
        }
        if sigma_w_sq < 0.0 || sigma_u_sq < 0.0 {
            return Err(ModelError::NegativeVariance {
                sigma_w_sq,
                sigma_u_sq,
            });
        }
        Ok(Self {
            sigma_w_sq,
            sigma_u_sq,
        })
    }

    pub fn sigma_w_sq(&self) -> f64 {
        self.sigma_w_sq
    }

    pub fn sigma_u_sq(&self) -> f64 {
        self.sigma_u_sq
    }

    /// Input-to-noise variance ratio; undefined when the process noise
    /// variance is zero.
    pub fn variance_ratio(&self) -> Option<f64> {
        (self.sigma_w_sq > 0.0).then(|| self.sigma_u_sq / self.sigma_w_sq)
    }
}

/// A state-feedback gain `F` (m-by-n).
#[derive(Debug, Clone, PartialEq)]
pub struct FeedbackGain {
    f: DMatrix<f64>,
}

impl FeedbackGain {
    pub fn new(f: DMatrix<f64>) -> Result<Self, ModelError> {
        if f.nrows() == 0 || f.ncols() == 0 {
            return Err(ModelError::EmptyMatrix { context: "gain" });
        }
        if f.iter().any(|v| !v.is_finite()) {
            return Err(ModelError::NonFinite { context: "gain" });
        }
        Ok(Self { f })
    }

    /// The all-zero gain conforming to `sys` (closing with it is a no-op).
    pub fn zero(sys: &LinearSystem) -> FeedbackGain {
        FeedbackGain {
            f: DMatrix::zeros(sys.input_dim(), sys.state_dim()),
        }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.f
    }

    /// Parses the gain file format `{"F": [[..], ..]}`.
    pub fn from_json_str(text: &str) -> Result<Self, ModelError> {
        #[derive(Deserialize)]
        struct GainFile {
            #[serde(rename = "F")]
            f: Vec<Vec<f64>>,
        }
        let file: GainFile = serde_json::from_str(text)?;
        FeedbackGain::new(matrix_from_rows(&file.f)?)
    }
}

const MAX_REDRAWS: usize = 16;

/// Draws a random plant with i.i.d. standard-normal entries, rescaling `A`
/// so its spectral radius equals `rho_target`. Deterministic in
/// `(n, m, rho_target, seed)`.
///
/// A draw whose raw spectral radius is below 1e-12 cannot be rescaled
/// meaningfully and is redrawn, up to 16 times.
pub fn random_stable_plant(
    n: usize,
    m: usize,
    rho_target: f64,
    seed: u64,
) -> Result<LinearSystem, ModelError> {
    if n == 0 || m == 0 {
        return Err(ModelError::EmptyMatrix {
            context: "requested plant",
        });
    }
    if !(rho_target > 0.0 && rho_target < 1.0) {
        return Err(ModelError::SpectralTargetOutOfRange { value: rho_target });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = |rows: usize, cols: usize| {
        DMatrix::from_fn(rows, cols, |_, _| rng.sample::<f64, _>(StandardNormal))
    };
    let mut scaled = None;
    for _ in 0..MAX_REDRAWS {
        let candidate = draw(n, n);
        let rho = spectral_radius(&candidate)?;
        if rho >= 1e-12 {
            scaled = Some(candidate * (rho_target / rho));
            break;
        }
    }
    let a = scaled.ok_or(ModelError::DegenerateDraw {
        attempts: MAX_REDRAWS,
    })?;
    let b = draw(n, m);
    LinearSystem::new(a, b)
}

/// Target spectral radii for the stock random-plant ladder, covering the
/// stable range in steps of 0.05.
pub const LADDER_RHO_GRID: [f64; 19] = [
    0.05, 0.10, 0.15, 0.20, 0.25, 0.30, 0.35, 0.40, 0.45, 0.50, 0.55, 0.60, 0.65, 0.70, 0.75, 0.80,
    0.85, 0.90, 0.95,
];

/// The deterministic ladder of random stable plants used by the sweep
/// experiments: plant `i` is generated with seed `i` and target radius
/// `LADDER_RHO_GRID[i % 19]`, so a 20-plant ladder spans Gramian traces
/// across the whole stable range.
pub fn plant_ladder(count: usize, n: usize, m: usize) -> Result<Vec<LinearSystem>, ModelError> {
    (0..count)
        .map(|i| random_stable_plant(n, m, LADDER_RHO_GRID[i % LADDER_RHO_GRID.len()], i as u64))
        .collect()
}

#[cfg(test)]
// frozen oracle values keep their full 17-digit form
#[allow(clippy::excessive_precision)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    #[test]
    fn spectral_radius_of_zero_matrix() {
        let z = DMatrix::<f64>::zeros(4, 4);
        assert_eq!(spectral_radius(&z).unwrap(), 0.0);
    }

    #[test]
    fn spectral_radius_of_identity() {
        let i = DMatrix::<f64>::identity(3, 3);
        assert!((spectral_radius(&i).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn spectral_radius_rejects_bad_input() {
        let rect = DMatrix::<f64>::zeros(2, 3);
        assert!(matches!(
            spectral_radius(&rect),
            Err(ModelError::NonSquare { rows: 2, cols: 3 })
        ));
        let nan = DMatrix::from_row_slice(1, 1, &[f64::NAN]);
        assert!(matches!(
            spectral_radius(&nan),
            Err(ModelError::NonFinite { .. })
        ));
    }

    #[test]
    fn spectral_radius_scales_with_scalar_multiples() {
        let sys = LinearSystem::reference_plant();
        let rho = sys.spectral_radius();
        for c in [-2.0, 0.5] {
            let scaled = spectral_radius(&(sys.a() * c)).unwrap();
            assert!(
                (scaled - c.abs() * rho).abs() <= 1e-9 * rho.max(1.0),
                "c = {c}: {scaled} vs {}",
                c.abs() * rho
            );
        }
    }

    #[test]
    fn reference_plant_is_stable() {
        let sys = LinearSystem::reference_plant();
        // frozen from an independent eigenvalue computation
        assert!((sys.spectral_radius() - 0.71405489718930015).abs() < 1e-9);
        assert!(sys.is_stable());
        // cross-check against the matrix-power limit ||A^k||^(1/k)
        let mut power = sys.a().clone();
        for _ in 0..6 {
            power = &power * &power; // A^64
        }
        let norm_root = power.norm().powf(1.0 / 64.0);
        assert!((norm_root - sys.spectral_radius()).abs() < 1e-3);
    }

    #[test]
    fn close_loop_with_zero_gain_is_identity() {
        let sys = LinearSystem::reference_plant();
        let closed = sys.close_loop(&FeedbackGain::zero(&sys)).unwrap();
        assert_eq!(closed.a(), sys.a());
        assert_eq!(closed.b(), sys.b());
    }

    #[test]
    fn close_loop_deadbeat_cancellation() {
        // n = m, B = I, F = -A gives A_F = 0.
        let a = DMatrix::from_row_slice(2, 2, &[0.3, 0.1, -0.2, 0.4]);
        let sys = LinearSystem::new(a.clone(), DMatrix::identity(2, 2)).unwrap();
        let gain = FeedbackGain::new(-a).unwrap();
        let closed = sys.close_loop(&gain).unwrap();
        assert!(closed.a().amax() < 1e-15);
        assert_eq!(closed.spectral_radius(), 0.0);
    }

    #[test]
    fn close_loop_rejects_mismatched_gain() {
        let sys = LinearSystem::reference_plant();
        let gain = FeedbackGain::new(DMatrix::zeros(3, 4)).unwrap();
        assert!(matches!(
            sys.close_loop(&gain),
            Err(ModelError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn random_plant_is_deterministic_and_hits_target() {
        let first = random_stable_plant(4, 2, 0.5, 7).unwrap();
        let second = random_stable_plant(4, 2, 0.5, 7).unwrap();
        assert_eq!(first.a(), second.a());
        assert_eq!(first.b(), second.b());
        for seed in 0..10 {
            let sys = random_stable_plant(4, 2, 0.5, seed).unwrap();
            assert!(
                (sys.spectral_radius() - 0.5).abs() <= 1e-6,
                "seed {seed}: rho = {}",
                sys.spectral_radius()
            );
        }
    }

    #[test]
    fn random_plant_rejects_bad_target() {
        assert!(matches!(
            random_stable_plant(2, 1, 1.0, 0),
            Err(ModelError::SpectralTargetOutOfRange { .. })
        ));
        assert!(matches!(
            random_stable_plant(2, 1, 0.0, 0),
            Err(ModelError::SpectralTargetOutOfRange { .. })
        ));
    }

    #[test]
    fn ladder_is_stable_and_deterministic() {
        let ladder = plant_ladder(20, 4, 2).unwrap();
        let again = plant_ladder(20, 4, 2).unwrap();
        assert_eq!(ladder.len(), 20);
        for (i, (p, q)) in ladder.iter().zip(&again).enumerate() {
            assert!(p.is_stable(), "plant {i}");
            assert_eq!(p.a(), q.a());
            let target = LADDER_RHO_GRID[i % LADDER_RHO_GRID.len()];
            assert!((p.spectral_radius() - target).abs() <= 1e-6);
        }
    }

    #[test]
    fn plant_json_round_trips() {
        let sys = LinearSystem::reference_plant();
        let text = sys.to_json_string();
        let parsed = LinearSystem::from_json_str(&text).unwrap();
        assert_eq!(parsed.a(), sys.a());
        assert_eq!(parsed.b(), sys.b());
    }

    #[test]
    fn plant_json_rejects_ragged_rows() {
        let text = r#"{"A": [[0.1, 0.0], [0.0]], "B": [[1.0], [1.0]]}"#;
        assert!(matches!(
            LinearSystem::from_json_str(text),
            Err(ModelError::RaggedRows)
        ));
    }

    #[test]
    fn noise_config_validates() {
        let noise = NoiseConfig::new(1.0, 4.0).unwrap();
        assert_eq!(noise.variance_ratio(), Some(4.0));
        let degenerate = NoiseConfig::new(0.0, 1.0).unwrap();
        assert_eq!(degenerate.variance_ratio(), None);
        assert!(NoiseConfig::new(-1.0, 1.0).is_err());
        assert!(NoiseConfig::new(f64::NAN, 1.0).is_err());
    }
}
