//! Deterministic Monte Carlo sweep harnesses.
//!
//! Three stock studies, all pure functions of `(spec, master seed, tool
//! version)`:
//!
//! * **error sweep** — empirical mean identification error against the
//!   bound over a grid of sample counts, for one plant;
//! * **variance grid** — the same comparison over a ladder of random
//!   plants and a grid of noise/input variance combinations;
//! * **gramian sweep** — the large-`j` bound against the input Gramian
//!   trace across the plant ladder.
//!
//! Results are emitted as CSV (UTF-8, LF, header row, 17-significant-digit
//! numbers) plus a JSON sidecar recording the spec, seed and version.
//! Every row with an empirical mean is validated against the bound at
//! emission; a violation aborts the run rather than silently emitting a
//! row that contradicts the theory.

use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{self, FeedbackGain, LinearSystem, ModelError, NoiseConfig};
use crate::numfmt::g17;
use crate::security::{ComplexityBound, SecurityError};
use crate::seed::derive_seed;
use crate::sysid::{self, SysIdError};

/// Ladder plants share the reference plant's shape.
pub const LADDER_STATE_DIM: usize = 4;
pub const LADDER_INPUT_DIM: usize = 2;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("invalid experiment spec: {reason}")]
    InvalidSpec { reason: String },
    #[error("plant is unstable (spectral radius {spectral_radius})")]
    UnstablePlant { spectral_radius: f64 },
    #[error("plant {plant_id}: {source}")]
    PlantTrial {
        plant_id: usize,
        #[source]
        source: SysIdError,
    },
    #[error(
        "bound violated at plant {plant_id}, N={n_samples}: mean epsilon {mean} < gamma {gamma} - 3*{std_error}"
    )]
    BoundViolated {
        plant_id: usize,
        n_samples: u64,
        mean: f64,
        gamma: f64,
        std_error: f64,
    },
    #[error("derived trial seeds collide; choose a different master seed")]
    SeedCollision,
    #[error("gamma is not strictly decreasing in the Gramian trace at j={j}")]
    MonotonicityViolated { j: u64 },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Security(#[from] SecurityError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    ErrorSweep,
    VarianceGrid,
    GramianSweep,
}

/// Where the plant(s) of a run come from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PlantSpec {
    /// The built-in reference plant.
    Builtin,
    /// A plant JSON file.
    File(PathBuf),
    /// The deterministic random ladder (seeds `0..count`).
    Ladder { count: usize },
}

/// Full description of a sweep; the metadata sidecar serializes this
/// verbatim so a run can be reproduced from its output alone.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub kind: ExperimentKind,
    pub plant: PlantSpec,
    /// Optional state-feedback gain file closing the loop before the sweep.
    pub gain_file: Option<PathBuf>,
    /// Sample-count grid (error sweep, variance grid).
    pub n_grid: Vec<u64>,
    /// Regression-length grid (gramian sweep).
    pub j_grid: Vec<u64>,
    pub trials: usize,
    pub sigma_w_sq_set: Vec<f64>,
    pub sigma_u_sq_set: Vec<f64>,
    pub master_seed: u64,
}

impl ExperimentSpec {
    /// Stock error sweep: N in {200, 400, .., 2000}, 50 trials per cell,
    /// unit variances.
    pub fn error_sweep(plant: PlantSpec, master_seed: u64) -> Self {
        Self {
            kind: ExperimentKind::ErrorSweep,
            plant,
            gain_file: None,
            n_grid: (1..=10).map(|k| 200 * k).collect(),
            j_grid: Vec::new(),
            trials: 50,
            sigma_w_sq_set: vec![1.0],
            sigma_u_sq_set: vec![1.0],
            master_seed,
        }
    }

    /// Stock variance grid: 20-plant ladder, all nine combinations of
    /// variances in {0.1, 1, 10}, N in {250, 500, 1000, 2000}.
    pub fn variance_grid(master_seed: u64) -> Self {
        Self {
            kind: ExperimentKind::VarianceGrid,
            plant: PlantSpec::Ladder { count: 20 },
            gain_file: None,
            n_grid: vec![250, 500, 1000, 2000],
            j_grid: Vec::new(),
            trials: 50,
            sigma_w_sq_set: vec![0.1, 1.0, 10.0],
            sigma_u_sq_set: vec![0.1, 1.0, 10.0],
            master_seed,
        }
    }

    /// Stock gramian sweep: 20-plant ladder at variance ratio 100
    /// (process 0.1, probing 10), j in {1000, 3000, 5000}.
    pub fn gramian_sweep() -> Self {
        Self {
            kind: ExperimentKind::GramianSweep,
            plant: PlantSpec::Ladder { count: 20 },
            gain_file: None,
            n_grid: Vec::new(),
            j_grid: vec![1000, 3000, 5000],
            trials: 1,
            sigma_w_sq_set: vec![0.1],
            sigma_u_sq_set: vec![10.0],
            master_seed: 0,
        }
    }
}

/// Provenance recorded next to every result file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunMetadata {
    pub tool_version: String,
    pub master_seed: u64,
    pub spec_digest: String,
    pub spec: ExperimentSpec,
}

impl RunMetadata {
    fn for_spec(spec: &ExperimentSpec) -> Self {
        Self {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            master_seed: spec.master_seed,
            spec_digest: spec_digest(spec),
            spec: spec.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("metadata serializes")
    }
}

/// Order-sensitive 64-bit digest of the canonical spec serialization.
pub fn spec_digest(spec: &ExperimentSpec) -> String {
    let canonical = serde_json::to_string(spec).expect("spec serializes");
    let mut state = 0u64;
    for byte in canonical.bytes() {
        state = crate::seed::splitmix64(state ^ u64::from(byte));
    }
    format!("{state:016x}")
}

/// One Monte Carlo trial outcome.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialRow {
    pub plant_id: usize,
    pub sigma_w_sq: f64,
    pub sigma_u_sq: f64,
    pub n_samples: u64,
    pub trial: usize,
    pub epsilon: f64,
}

/// Aggregated cell of an error sweep or variance grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SummaryRow {
    pub plant_id: usize,
    pub sigma_w_sq: f64,
    pub sigma_u_sq: f64,
    pub n_samples: u64,
    pub mean_epsilon: f64,
    pub std_error: f64,
    pub gamma_exact: f64,
    pub gamma_approx: f64,
}

/// Variance-grid cell averaged across the plant ladder.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellRow {
    pub sigma_w_sq: f64,
    pub sigma_u_sq: f64,
    pub n_samples: u64,
    pub mean_epsilon: f64,
    pub mean_gamma_exact: f64,
    pub mean_gamma_approx: f64,
}

/// Gramian-sweep row: the large-`j` bound at one regression length.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GramianRow {
    pub plant_id: usize,
    pub tr_psi1: f64,
    pub j: u64,
    pub gamma: f64,
}

#[derive(Debug, Clone)]
pub struct ErrorSweepResult {
    pub raw: Vec<TrialRow>,
    pub summary: Vec<SummaryRow>,
    pub metadata: RunMetadata,
}

#[derive(Debug, Clone)]
pub struct VarianceGridResult {
    pub raw: Vec<TrialRow>,
    pub summary: Vec<SummaryRow>,
    pub cells: Vec<CellRow>,
    pub metadata: RunMetadata,
}

#[derive(Debug, Clone)]
pub struct GramianSweepResult {
    pub rows: Vec<GramianRow>,
    pub metadata: RunMetadata,
}

/// Runs the single-plant error sweep: for every N in the grid, `trials`
/// identification runs against the bound. Rows are ordered by N.
pub fn run_error_sweep(spec: &ExperimentSpec) -> Result<ErrorSweepResult, ExperimentError> {
    expect_kind(spec, ExperimentKind::ErrorSweep)?;
    check_grid(&spec.n_grid, "n_grid")?;
    check_trials(spec.trials)?;
    let noise = single_noise(spec)?;
    let sys = resolve_single_plant(&spec.plant, spec.gain_file.as_deref())?;
    if !sys.is_stable() {
        return Err(ExperimentError::UnstablePlant {
            spectral_radius: sys.spectral_radius(),
        });
    }
    check_seed_disjointness(spec, 1)?;
    let bound = ComplexityBound::for_system(&sys)?;

    let mut raw = Vec::with_capacity(spec.n_grid.len() * spec.trials);
    let mut summary = Vec::with_capacity(spec.n_grid.len());
    for (cell, &n_samples) in spec.n_grid.iter().enumerate() {
        let row = run_cell(&sys, &noise, &bound, spec, 0, cell, n_samples)?;
        for (trial, &epsilon) in row.0.iter().enumerate() {
            raw.push(TrialRow {
                plant_id: 0,
                sigma_w_sq: noise.sigma_w_sq(),
                sigma_u_sq: noise.sigma_u_sq(),
                n_samples,
                trial,
                epsilon,
            });
        }
        summary.push(row.1);
    }
    Ok(ErrorSweepResult {
        raw,
        summary,
        metadata: RunMetadata::for_spec(spec),
    })
}

/// Runs the variance grid over the plant ladder. Raw and summary rows are
/// ordered by (plant, variance cell, N); the cross-plant averages by
/// (variance cell, N).
pub fn run_variance_grid(spec: &ExperimentSpec) -> Result<VarianceGridResult, ExperimentError> {
    expect_kind(spec, ExperimentKind::VarianceGrid)?;
    check_grid(&spec.n_grid, "n_grid")?;
    check_trials(spec.trials)?;
    check_variances(spec)?;
    let plants = resolve_ladder(spec)?;
    check_seed_disjointness(spec, plants.len())?;

    let cells = variance_cells(spec);
    let mut raw = Vec::new();
    let mut summary = Vec::new();
    for (plant_id, sys) in plants.iter().enumerate() {
        let bound = ComplexityBound::for_system(sys)?;
        for (cell_index, &(sigma_w_sq, sigma_u_sq, n_samples)) in cells.iter().enumerate() {
            let noise = NoiseConfig::new(sigma_w_sq, sigma_u_sq)?;
            let (per_trial, row) =
                run_cell(sys, &noise, &bound, spec, plant_id, cell_index, n_samples)?;
            for (trial, &epsilon) in per_trial.iter().enumerate() {
                raw.push(TrialRow {
                    plant_id,
                    sigma_w_sq,
                    sigma_u_sq,
                    n_samples,
                    trial,
                    epsilon,
                });
            }
            summary.push(row);
        }
    }

    let plant_count = plants.len() as f64;
    let cell_rows = cells
        .iter()
        .enumerate()
        .map(|(cell_index, &(sigma_w_sq, sigma_u_sq, n_samples))| {
            let over_plants = summary
                .iter()
                .skip(cell_index)
                .step_by(cells.len())
                .collect::<Vec<_>>();
            CellRow {
                sigma_w_sq,
                sigma_u_sq,
                n_samples,
                mean_epsilon: over_plants.iter().map(|r| r.mean_epsilon).sum::<f64>() / plant_count,
                mean_gamma_exact: over_plants.iter().map(|r| r.gamma_exact).sum::<f64>()
                    / plant_count,
                mean_gamma_approx: over_plants.iter().map(|r| r.gamma_approx).sum::<f64>()
                    / plant_count,
            }
        })
        .collect();

    Ok(VarianceGridResult {
        raw,
        summary,
        cells: cell_rows,
        metadata: RunMetadata::for_spec(spec),
    })
}

/// Evaluates the large-`j` bound against the input Gramian trace across
/// the ladder. Rows are sorted by trace; for each `j` the bound must be
/// strictly decreasing along that order.
pub fn run_gramian_sweep(spec: &ExperimentSpec) -> Result<GramianSweepResult, ExperimentError> {
    expect_kind(spec, ExperimentKind::GramianSweep)?;
    check_grid(&spec.j_grid, "j_grid")?;
    check_variances(spec)?;
    let noise = single_noise(spec)?;
    let plants = resolve_ladder(spec)?;

    let mut traced: Vec<(usize, f64, ComplexityBound)> = Vec::with_capacity(plants.len());
    for (plant_id, sys) in plants.iter().enumerate() {
        let bound = ComplexityBound::for_system(sys)?;
        traced.push((plant_id, bound.tr_psi1(), bound));
    }
    traced.sort_by(|a, b| a.1.total_cmp(&b.1));

    let mut rows = Vec::with_capacity(traced.len() * spec.j_grid.len());
    for &(plant_id, tr_psi1, ref bound) in &traced {
        for &j in &spec.j_grid {
            rows.push(GramianRow {
                plant_id,
                tr_psi1,
                j,
                gamma: bound.gamma_approx(&noise, j + 1)?,
            });
        }
    }
    for &j in &spec.j_grid {
        let along_trace: Vec<f64> = rows.iter().filter(|r| r.j == j).map(|r| r.gamma).collect();
        if !along_trace.windows(2).all(|w| w[0] > w[1]) {
            return Err(ExperimentError::MonotonicityViolated { j });
        }
    }
    Ok(GramianSweepResult {
        rows,
        metadata: RunMetadata::for_spec(spec),
    })
}

/// One Monte Carlo cell: seeds derive from
/// `(master_seed, plant index, cell index, trial index)` through
/// [`derive_seed`], and the mean must respect the bound.
fn run_cell(
    sys: &LinearSystem,
    noise: &NoiseConfig,
    bound: &ComplexityBound,
    spec: &ExperimentSpec,
    plant_id: usize,
    cell_index: usize,
    n_samples: u64,
) -> Result<(Vec<f64>, SummaryRow), ExperimentError> {
    let cell_seed = derive_seed(spec.master_seed, &[plant_id as u64, cell_index as u64]);
    let outcome = sysid::mean_error(sys, noise, n_samples as usize, spec.trials, cell_seed)
        .map_err(|source| ExperimentError::PlantTrial { plant_id, source })?;
    let gamma_exact = bound.gamma_exact(noise, n_samples)?;
    let gamma_approx = bound.gamma_approx(noise, n_samples)?;
    if outcome.mean < gamma_exact - 3.0 * outcome.std_error {
        return Err(ExperimentError::BoundViolated {
            plant_id,
            n_samples,
            mean: outcome.mean,
            gamma: gamma_exact,
            std_error: outcome.std_error,
        });
    }
    let row = SummaryRow {
        plant_id,
        sigma_w_sq: noise.sigma_w_sq(),
        sigma_u_sq: noise.sigma_u_sq(),
        n_samples,
        mean_epsilon: outcome.mean,
        std_error: outcome.std_error,
        gamma_exact,
        gamma_approx,
    };
    Ok((outcome.per_trial, row))
}

fn expect_kind(spec: &ExperimentSpec, kind: ExperimentKind) -> Result<(), ExperimentError> {
    if spec.kind != kind {
        return Err(ExperimentError::InvalidSpec {
            reason: format!(
                "spec kind {:?} does not match the runner ({kind:?})",
                spec.kind
            ),
        });
    }
    Ok(())
}

fn check_grid(grid: &[u64], name: &str) -> Result<(), ExperimentError> {
    if grid.is_empty() {
        return Err(ExperimentError::InvalidSpec {
            reason: format!("{name} must not be empty"),
        });
    }
    if !grid.windows(2).all(|w| w[0] < w[1]) {
        return Err(ExperimentError::InvalidSpec {
            reason: format!("{name} must be strictly ascending"),
        });
    }
    if grid[0] < 2 && name == "n_grid" {
        return Err(ExperimentError::InvalidSpec {
            reason: "sample counts must be at least 2".to_string(),
        });
    }
    Ok(())
}

fn check_trials(trials: usize) -> Result<(), ExperimentError> {
    if trials == 0 {
        return Err(ExperimentError::InvalidSpec {
            reason: "trials must be at least 1".to_string(),
        });
    }
    Ok(())
}

fn check_variances(spec: &ExperimentSpec) -> Result<(), ExperimentError> {
    for (name, set) in [
        ("sigma_w_sq_set", &spec.sigma_w_sq_set),
        ("sigma_u_sq_set", &spec.sigma_u_sq_set),
    ] {
        if set.is_empty() {
            return Err(ExperimentError::InvalidSpec {
                reason: format!("{name} must not be empty"),
            });
        }
    }
    if spec.sigma_w_sq_set.iter().any(|&v| v.is_nan() || v <= 0.0) {
        return Err(ExperimentError::InvalidSpec {
            reason: "process-noise variances must be positive (the bound is undefined at zero)"
                .to_string(),
        });
    }
    if spec
        .sigma_u_sq_set
        .iter()
        .any(|&v| !v.is_finite() || v < 0.0)
    {
        return Err(ExperimentError::InvalidSpec {
            reason: "probing variances must be non-negative".to_string(),
        });
    }
    Ok(())
}

fn single_noise(spec: &ExperimentSpec) -> Result<NoiseConfig, ExperimentError> {
    check_variances(spec)?;
    if spec.sigma_w_sq_set.len() != 1 || spec.sigma_u_sq_set.len() != 1 {
        return Err(ExperimentError::InvalidSpec {
            reason: "this sweep takes exactly one variance per set".to_string(),
        });
    }
    Ok(NoiseConfig::new(
        spec.sigma_w_sq_set[0],
        spec.sigma_u_sq_set[0],
    )?)
}

fn resolve_single_plant(
    plant: &PlantSpec,
    gain_file: Option<&Path>,
) -> Result<LinearSystem, ExperimentError> {
    let sys = match plant {
        PlantSpec::Builtin => LinearSystem::reference_plant(),
        PlantSpec::File(path) => LinearSystem::from_json_str(&fs::read_to_string(path)?)?,
        PlantSpec::Ladder { .. } => {
            return Err(ExperimentError::InvalidSpec {
                reason: "this sweep needs a single plant, not a ladder".to_string(),
            })
        }
    };
    match gain_file {
        Some(path) => {
            let gain = FeedbackGain::from_json_str(&fs::read_to_string(path)?)?;
            Ok(sys.close_loop(&gain)?)
        }
        None => Ok(sys),
    }
}

fn resolve_ladder(spec: &ExperimentSpec) -> Result<Vec<LinearSystem>, ExperimentError> {
    if spec.gain_file.is_some() {
        return Err(ExperimentError::InvalidSpec {
            reason: "ladder sweeps do not take a gain file".to_string(),
        });
    }
    match &spec.plant {
        PlantSpec::Ladder { count } if *count >= 1 => Ok(model::plant_ladder(
            *count,
            LADDER_STATE_DIM,
            LADDER_INPUT_DIM,
        )?),
        PlantSpec::Ladder { .. } => Err(ExperimentError::InvalidSpec {
            reason: "ladder must contain at least one plant".to_string(),
        }),
        _ => Err(ExperimentError::InvalidSpec {
            reason: "this sweep runs on the random plant ladder".to_string(),
        }),
    }
}

fn variance_cells(spec: &ExperimentSpec) -> Vec<(f64, f64, u64)> {
    let mut cells = Vec::new();
    for &sigma_w_sq in &spec.sigma_w_sq_set {
        for &sigma_u_sq in &spec.sigma_u_sq_set {
            for &n_samples in &spec.n_grid {
                cells.push((sigma_w_sq, sigma_u_sq, n_samples));
            }
        }
    }
    cells
}

/// Verifies that the derived trial seeds are pairwise distinct across the
/// whole experiment before any cell runs.
fn check_seed_disjointness(spec: &ExperimentSpec, plants: usize) -> Result<(), ExperimentError> {
    let cell_count = match spec.kind {
        ExperimentKind::ErrorSweep => spec.n_grid.len(),
        ExperimentKind::VarianceGrid => variance_cells(spec).len(),
        ExperimentKind::GramianSweep => 0,
    };
    let mut seen = HashSet::with_capacity(plants * cell_count * spec.trials);
    for plant in 0..plants as u64 {
        for cell in 0..cell_count as u64 {
            let cell_seed = derive_seed(spec.master_seed, &[plant, cell]);
            for trial in 0..spec.trials as u64 {
                if !seen.insert(derive_seed(cell_seed, &[trial])) {
                    return Err(ExperimentError::SeedCollision);
                }
            }
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// CSV emission

fn raw_csv(rows: &[TrialRow], with_plant_columns: bool) -> String {
    let mut out = String::new();
    if with_plant_columns {
        out.push_str("plant_id,sigma_w_sq,sigma_u_sq,N,trial,epsilon\n");
    } else {
        out.push_str("N,trial,epsilon\n");
    }
    for row in rows {
        if with_plant_columns {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                row.plant_id,
                g17(row.sigma_w_sq),
                g17(row.sigma_u_sq),
                row.n_samples,
                row.trial,
                g17(row.epsilon)
            ));
        } else {
            out.push_str(&format!(
                "{},{},{}\n",
                row.n_samples,
                row.trial,
                g17(row.epsilon)
            ));
        }
    }
    out
}

fn summary_csv(rows: &[SummaryRow], with_plant_columns: bool) -> String {
    let mut out = String::new();
    if with_plant_columns {
        out.push_str(
            "plant_id,sigma_w_sq,sigma_u_sq,N,mean_epsilon,stderr,gamma_exact,gamma_approx\n",
        );
    } else {
        out.push_str("N,mean_epsilon,stderr,gamma_exact,gamma_approx\n");
    }
    for row in rows {
        if with_plant_columns {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                row.plant_id,
                g17(row.sigma_w_sq),
                g17(row.sigma_u_sq),
                row.n_samples,
                g17(row.mean_epsilon),
                g17(row.std_error),
                g17(row.gamma_exact),
                g17(row.gamma_approx)
            ));
        } else {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                row.n_samples,
                g17(row.mean_epsilon),
                g17(row.std_error),
                g17(row.gamma_exact),
                g17(row.gamma_approx)
            ));
        }
    }
    out
}

impl ErrorSweepResult {
    pub fn raw_csv(&self) -> String {
        raw_csv(&self.raw, false)
    }

    pub fn summary_csv(&self) -> String {
        summary_csv(&self.summary, false)
    }

    /// Writes `error_sweep_raw.csv`, `error_sweep_summary.csv` and
    /// `error_sweep_meta.json` under `dir`, returning the paths.
    pub fn write_to_dir(&self, dir: &Path) -> Result<Vec<PathBuf>, ExperimentError> {
        write_files(
            dir,
            &[
                ("error_sweep_raw.csv", self.raw_csv()),
                ("error_sweep_summary.csv", self.summary_csv()),
                ("error_sweep_meta.json", self.metadata.to_json()),
            ],
        )
    }
}

impl VarianceGridResult {
    pub fn raw_csv(&self) -> String {
        raw_csv(&self.raw, true)
    }

    pub fn summary_csv(&self) -> String {
        summary_csv(&self.summary, true)
    }

    /// Per-cell averages across the ladder.
    pub fn cells_csv(&self) -> String {
        let mut out = String::from(
            "sigma_w_sq,sigma_u_sq,N,mean_epsilon,mean_gamma_exact,mean_gamma_approx\n",
        );
        for row in &self.cells {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                g17(row.sigma_w_sq),
                g17(row.sigma_u_sq),
                row.n_samples,
                g17(row.mean_epsilon),
                g17(row.mean_gamma_exact),
                g17(row.mean_gamma_approx)
            ));
        }
        out
    }

    pub fn write_to_dir(&self, dir: &Path) -> Result<Vec<PathBuf>, ExperimentError> {
        write_files(
            dir,
            &[
                ("variance_grid_raw.csv", self.raw_csv()),
                ("variance_grid_summary.csv", self.summary_csv()),
                ("variance_grid_cells.csv", self.cells_csv()),
                ("variance_grid_meta.json", self.metadata.to_json()),
            ],
        )
    }
}

impl GramianSweepResult {
    pub fn rows_csv(&self) -> String {
        let mut out = String::from("plant_id,tr_psi1,j,gamma\n");
        for row in &self.rows {
            out.push_str(&format!(
                "{},{},{},{}\n",
                row.plant_id,
                g17(row.tr_psi1),
                row.j,
                g17(row.gamma)
            ));
        }
        out
    }

    pub fn write_to_dir(&self, dir: &Path) -> Result<Vec<PathBuf>, ExperimentError> {
        write_files(
            dir,
            &[
                ("gramian_sweep.csv", self.rows_csv()),
                ("gramian_sweep_meta.json", self.metadata.to_json()),
            ],
        )
    }
}

fn write_files(dir: &Path, files: &[(&str, String)]) -> Result<Vec<PathBuf>, ExperimentError> {
    fs::create_dir_all(dir)?;
    let mut paths = Vec::with_capacity(files.len());
    for (name, contents) in files {
        let path = dir.join(name);
        fs::write(&path, contents)?;
        paths.push(path);
    }
    Ok(paths)
}
