//! Identifying-complexity bounds and security verdicts.
//!
//! For a stable plant probed with Gaussian inputs, the expected per-entry
//! identification error is bounded below by
//!
//! ```text
//! gamma(N) = (m + n) sigma_w^2
//!            -----------------------------------------------------------
//!            j (m + tr psi1) sigma_u^2 + (j n + tr psi2) sigma_w^2
//! ```
//!
//! with `j = N - 1` and the Gramian traces from [`crate::gramian`]. For
//! large `j` this collapses to the variance-ratio form
//! `gamma(N) = (m + n) / (j [(m + tr psi1) R + n])` with
//! `R = sigma_u^2 / sigma_w^2`.
//!
//! Breaking `N` ciphertexts of a `lambda`-bit scheme by brute force costs
//! `tau(N, lambda) = 2^lambda N / Upsilon` seconds on an
//! `Upsilon`-FLOPS machine (one break suffices under a static key). A
//! configuration is secure when no sample count is simultaneously
//! informative enough (`gamma(N) < gamma_c`) and affordable to decipher
//! within the plant's life span (`tau <= tau_c`).

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gramian::{self, GramianError};
use crate::model::{LinearSystem, NoiseConfig};

/// Above this security-parameter level, `2^lambda` comparisons run in
/// log2 space; the linear value may not be representable.
const LOG_SPACE_LAMBDA: u32 = 900;
/// Sanity cap on the security parameter.
pub const LAMBDA_CAP: u32 = 1024;

#[derive(Debug, Error)]
pub enum SecurityError {
    #[error(
        "system is unstable (spectral radius {spectral_radius}); the bound requires a stable plant"
    )]
    UnstableSystem { spectral_radius: f64 },
    #[error("bound undefined for zero process noise")]
    ZeroProcessNoise,
    #[error("N must be >= 2, got {got}")]
    SampleCountTooSmall { got: u64 },
    #[error("{name} must be positive and finite, got {value}")]
    InvalidThreshold { name: &'static str, value: f64 },
    #[error("security parameter exceeds the sanity cap of {LAMBDA_CAP} bits")]
    LambdaCapExceeded,
    #[error("no security parameter up to {LAMBDA_CAP} bits satisfies the requirement")]
    DesignInfeasible,
    #[error("required sample size overflows the supported range")]
    SampleSizeOverflow,
    #[error(transparent)]
    Gramian(#[from] GramianError),
}

/// Key handling of the encryption scheme: dynamic keys rotate every step,
/// so each of the `N` samples must be broken separately; a static key
/// falls with a single break.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KeyMode {
    Dynamic,
    Static,
}

impl std::str::FromStr for KeyMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "dynamic" => Ok(KeyMode::Dynamic),
            "static" => Ok(KeyMode::Static),
            other => Err(format!(
                "key mode must be 'dynamic' or 'static', got '{other}'"
            )),
        }
    }
}

impl std::fmt::Display for KeyMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            KeyMode::Dynamic => "dynamic",
            KeyMode::Static => "static",
        })
    }
}

/// What the defender demands: estimation errors below `gamma_c` must not
/// be reachable within the plant life span `tau_c` by an adversary with
/// `upsilon` FLOPS against `lambda`-bit encryption.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SecurityRequirement {
    pub gamma_c: f64,
    /// Plant life span in seconds.
    pub tau_c: f64,
    /// Adversary compute budget in FLOPS.
    pub upsilon: f64,
    /// Security parameter in bits.
    pub lambda: u32,
    pub key_mode: KeyMode,
}

impl SecurityRequirement {
    pub fn new(
        gamma_c: f64,
        tau_c: f64,
        upsilon: f64,
        lambda: u32,
        key_mode: KeyMode,
    ) -> Result<Self, SecurityError> {
        for (name, value) in [("gamma_c", gamma_c), ("tau_c", tau_c), ("upsilon", upsilon)] {
            if !(value > 0.0 && value.is_finite()) {
                return Err(SecurityError::InvalidThreshold { name, value });
            }
        }
        if lambda > LAMBDA_CAP {
            return Err(SecurityError::LambdaCapExceeded);
        }
        Ok(Self {
            gamma_c,
            tau_c,
            upsilon,
            lambda,
            key_mode,
        })
    }
}

/// The security decision together with its witness.
///
/// `secure` is false exactly when `witness_n` carries a sample count that
/// both identifies well enough and deciphers in time. `n_star` is the
/// smallest sample count beating `gamma_c` regardless of the verdict.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SecurityVerdict {
    pub secure: bool,
    #[serde(rename = "witness_N")]
    pub witness_n: Option<u64>,
    pub n_star: u64,
    #[serde(rename = "tau_at_n_star_seconds")]
    pub tau_at_n_star: f64,
}

/// Cached plant facts needed to evaluate the bound at any sample count:
/// evaluating `gamma` becomes O(1) after one Gramian solve.
#[derive(Debug, Clone, Copy)]
pub struct ComplexityBound {
    state_dim: usize,
    input_dim: usize,
    tr_psi1: f64,
    tr_psi2: f64,
}

impl ComplexityBound {
    pub fn for_system(sys: &LinearSystem) -> Result<Self, SecurityError> {
        if !sys.is_stable() {
            return Err(SecurityError::UnstableSystem {
                spectral_radius: sys.spectral_radius(),
            });
        }
        let pair = gramian::gramians(sys)?;
        Ok(Self {
            state_dim: sys.state_dim(),
            input_dim: sys.input_dim(),
            tr_psi1: pair.tr_psi1,
            tr_psi2: pair.tr_psi2,
        })
    }

    pub fn tr_psi1(&self) -> f64 {
        self.tr_psi1
    }

    pub fn tr_psi2(&self) -> f64 {
        self.tr_psi2
    }

    /// The exact lower bound on the expected identification error at
    /// sample count `n_samples`.
    pub fn gamma_exact(&self, noise: &NoiseConfig, n_samples: u64) -> Result<f64, SecurityError> {
        self.check_gamma_inputs(noise, n_samples)?;
        let j = (n_samples - 1) as f64;
        let n = self.state_dim as f64;
        let m = self.input_dim as f64;
        let sw2 = noise.sigma_w_sq();
        let su2 = noise.sigma_u_sq();
        Ok((m + n) * sw2 / (j * (m + self.tr_psi1) * su2 + (j * n + self.tr_psi2) * sw2))
    }

    /// The large-`j` form of the bound, a function of the variance ratio
    /// alone.
    pub fn gamma_approx(&self, noise: &NoiseConfig, n_samples: u64) -> Result<f64, SecurityError> {
        self.check_gamma_inputs(noise, n_samples)?;
        let j = (n_samples - 1) as f64;
        let n = self.state_dim as f64;
        let m = self.input_dim as f64;
        let ratio = noise.variance_ratio().expect("checked sigma_w_sq > 0");
        Ok((m + n) / (j * ((m + self.tr_psi1) * ratio + n)))
    }

    /// Smallest sample count `N` with `gamma_exact(N) < gamma_c`.
    ///
    /// The bound is strictly decreasing in `N` and tends to zero, so the
    /// minimum always exists; it is found by inverting the bound in `j`
    /// and confirming with a local integer scan against rounding.
    pub fn min_sample_size(&self, noise: &NoiseConfig, gamma_c: f64) -> Result<u64, SecurityError> {
        if !(gamma_c > 0.0 && gamma_c.is_finite()) {
            return Err(SecurityError::InvalidThreshold {
                name: "gamma_c",
                value: gamma_c,
            });
        }
        if self.gamma_exact(noise, 2)? < gamma_c {
            return Ok(2);
        }
        let n = self.state_dim as f64;
        let m = self.input_dim as f64;
        let sw2 = noise.sigma_w_sq();
        let su2 = noise.sigma_u_sq();
        // gamma(j+1) < gamma_c  <=>  j > sw2 ((m+n)/gamma_c - tr_psi2) / slope
        let slope = (m + self.tr_psi1) * su2 + n * sw2;
        let crossing = sw2 * ((m + n) / gamma_c - self.tr_psi2) / slope;
        if crossing.is_nan() || crossing >= 9.0e18 {
            return Err(SecurityError::SampleSizeOverflow);
        }
        let mut j = (crossing.floor() as i128 - 1).max(1) as u64;
        loop {
            if self.gamma_exact(noise, j + 1)? < gamma_c {
                return Ok(j + 1);
            }
            j += 1;
        }
    }

    fn check_gamma_inputs(&self, noise: &NoiseConfig, n_samples: u64) -> Result<(), SecurityError> {
        if n_samples < 2 {
            return Err(SecurityError::SampleCountTooSmall { got: n_samples });
        }
        if noise.sigma_w_sq() <= 0.0 {
            return Err(SecurityError::ZeroProcessNoise);
        }
        Ok(())
    }
}

/// Exact bound `gamma(N)` for a stable plant. See
/// [`ComplexityBound::gamma_exact`]; prefer the cached form when
/// evaluating many sample counts.
pub fn gamma_exact(
    sys: &LinearSystem,
    noise: &NoiseConfig,
    n_samples: u64,
) -> Result<f64, SecurityError> {
    ComplexityBound::for_system(sys)?.gamma_exact(noise, n_samples)
}

/// Large-`j` bound. See [`ComplexityBound::gamma_approx`].
pub fn gamma_approx(
    sys: &LinearSystem,
    noise: &NoiseConfig,
    n_samples: u64,
) -> Result<f64, SecurityError> {
    ComplexityBound::for_system(sys)?.gamma_approx(noise, n_samples)
}

/// Smallest `N` with `gamma_exact(N) < gamma_c`. See
/// [`ComplexityBound::min_sample_size`].
pub fn min_sample_size(
    sys: &LinearSystem,
    noise: &NoiseConfig,
    gamma_c: f64,
) -> Result<u64, SecurityError> {
    ComplexityBound::for_system(sys)?.min_sample_size(noise, gamma_c)
}

/// Seconds to brute-force the samples needed for the attack:
/// `2^lambda N / Upsilon` under a dynamic key, `2^lambda / Upsilon`
/// regardless of `N` under a static key.
///
/// May overflow to infinity for `lambda` near the cap; decisions at such
/// levels go through [`deciphering_time_log2`].
pub fn deciphering_time(n_samples: u64, req: &SecurityRequirement) -> f64 {
    let n_eff = effective_samples(n_samples, req.key_mode) as f64;
    (req.lambda as f64).exp2() * n_eff / req.upsilon
}

/// Base-2 logarithm of the deciphering time; exact even where the linear
/// value overflows.
pub fn deciphering_time_log2(n_samples: u64, req: &SecurityRequirement) -> f64 {
    let n_eff = effective_samples(n_samples, req.key_mode) as f64;
    req.lambda as f64 + n_eff.log2() - req.upsilon.log2()
}

fn effective_samples(n_samples: u64, key_mode: KeyMode) -> u64 {
    match key_mode {
        KeyMode::Dynamic => n_samples,
        KeyMode::Static => 1,
    }
}

/// Decides the security predicate.
///
/// `gamma` is strictly decreasing and `tau` non-decreasing in `N`, so the
/// only sample count that can witness a breach is the smallest one
/// beating `gamma_c`: any smaller `N` fails the error condition, any
/// larger one only costs more to decipher.
pub fn is_secure(
    sys: &LinearSystem,
    noise: &NoiseConfig,
    req: &SecurityRequirement,
) -> Result<SecurityVerdict, SecurityError> {
    let bound = ComplexityBound::for_system(sys)?;
    let n_star = bound.min_sample_size(noise, req.gamma_c)?;
    let tau = deciphering_time(n_star, req);
    let breached = if req.lambda > LOG_SPACE_LAMBDA {
        deciphering_time_log2(n_star, req) <= req.tau_c.log2()
    } else {
        tau <= req.tau_c
    };
    Ok(SecurityVerdict {
        secure: !breached,
        witness_n: breached.then_some(n_star),
        n_star,
        tau_at_n_star: tau,
    })
}

/// Smallest security parameter (in bits, at least 1) making the
/// configuration secure, from the closed form
/// `floor(log2(tau_c Upsilon / N*)) + 1` confirmed against the verdict.
pub fn min_lambda(
    sys: &LinearSystem,
    noise: &NoiseConfig,
    gamma_c: f64,
    tau_c: f64,
    upsilon: f64,
    key_mode: KeyMode,
) -> Result<u32, SecurityError> {
    for (name, value) in [("tau_c", tau_c), ("upsilon", upsilon)] {
        if !(value > 0.0 && value.is_finite()) {
            return Err(SecurityError::InvalidThreshold { name, value });
        }
    }
    let bound = ComplexityBound::for_system(sys)?;
    let n_star = bound.min_sample_size(noise, gamma_c)?;
    let n_eff = effective_samples(n_star, key_mode) as f64;
    let ratio = tau_c * upsilon / n_eff;
    let guess = if ratio >= 1.0 {
        (ratio.log2().floor() as i64 + 1).max(1)
    } else {
        1
    };

    let secure_at = |lambda: i64| -> Result<bool, SecurityError> {
        let req = SecurityRequirement::new(gamma_c, tau_c, upsilon, lambda as u32, key_mode)?;
        Ok(is_secure(sys, noise, &req)?.secure)
    };
    let mut lambda = guess;
    while lambda <= LAMBDA_CAP as i64 && !secure_at(lambda)? {
        lambda += 1;
    }
    if lambda > LAMBDA_CAP as i64 {
        return Err(SecurityError::DesignInfeasible);
    }
    while lambda > 1 && secure_at(lambda - 1)? {
        lambda -= 1;
    }
    Ok(lambda as u32)
}

/// One grid point of a complexity profile.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ProfileRow {
    #[serde(rename = "N")]
    pub n_samples: u64,
    pub gamma_exact: f64,
    pub gamma_approx: f64,
}

/// `gamma` evaluated over a grid of sample counts, together with the
/// plant facts the values came from.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ComplexityProfile {
    pub state_dim: usize,
    pub input_dim: usize,
    pub spectral_radius: f64,
    pub tr_psi1: f64,
    pub tr_psi2: f64,
    pub sigma_w_sq: f64,
    pub sigma_u_sq: f64,
    pub variance_ratio: f64,
    pub rows: Vec<ProfileRow>,
}

/// Evaluates both bound forms over `grid`.
pub fn complexity_profile(
    sys: &LinearSystem,
    noise: &NoiseConfig,
    grid: &[u64],
) -> Result<ComplexityProfile, SecurityError> {
    let bound = ComplexityBound::for_system(sys)?;
    let rows = grid
        .iter()
        .map(|&n_samples| {
            Ok(ProfileRow {
                n_samples,
                gamma_exact: bound.gamma_exact(noise, n_samples)?,
                gamma_approx: bound.gamma_approx(noise, n_samples)?,
            })
        })
        .collect::<Result<Vec<_>, SecurityError>>()?;
    Ok(ComplexityProfile {
        state_dim: sys.state_dim(),
        input_dim: sys.input_dim(),
        spectral_radius: sys.spectral_radius(),
        tr_psi1: bound.tr_psi1,
        tr_psi2: bound.tr_psi2,
        sigma_w_sq: noise.sigma_w_sq(),
        sigma_u_sq: noise.sigma_u_sq(),
        variance_ratio: noise.variance_ratio().unwrap_or(f64::NAN),
        rows,
    })
}
