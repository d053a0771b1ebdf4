//! Two-mode Gaussian state numerics.
//!
//! All covariance entries are in shot-noise units (vacuum quadrature
//! variance = 1). The covariance matrix handled here has the symmetric form
//!
//! ```text
//!   [ x·I₂    z·σ_z ]
//!   [ z·σ_z   y·I₂  ]
//! ```
//!
//! which is what rotation symmetrization leaves behind, so three numbers
//! describe it completely.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Slack below 1 that is clamped to 1 instead of being rejected.
pub const NU_TOLERANCE: f64 = 1e-9;

/// Relative tolerance on the discriminant Δ² − 4·det Γ.
pub const DISCRIMINANT_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoModeCovariance {
    /// Alice's quadrature variance.
    pub x: f64,
    /// Bob's quadrature variance.
    pub y: f64,
    /// Correlation, entering with sign +z on x-quadratures and −z on p.
    pub z: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CovarianceViolation {
    /// x < 1.
    SubVacuumA,
    /// y < 1.
    SubVacuumB,
    /// z² > x·y.
    NotPositiveSemidefinite,
    /// Some entry is NaN or infinite.
    NotFinite,
}

/// Result of [`validate_covariance`]; empty `violations` means valid.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CovarianceDiagnostics {
    pub violations: Vec<CovarianceViolation>,
}

impl CovarianceDiagnostics {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl TwoModeCovariance {
    /// Builds a covariance and rejects it unless [`validate_covariance`] passes.
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        let cov = Self { x, y, z };
        let diag = validate_covariance(&cov);
        if diag.is_valid() {
            Ok(cov)
        } else {
            Err(Error::NonPhysicalCovariance(format!(
                "(x={x}, y={y}, z={z}) violates {:?}",
                diag.violations
            )))
        }
    }

    /// det Γ = (xy − z²)².
    pub fn determinant(&self) -> f64 {
        let d = self.x * self.y - self.z * self.z;
        d * d
    }

    /// Second symplectic invariant Δ = x² + y² − 2z².
    pub fn delta(&self) -> f64 {
        self.x * self.x + self.y * self.y - 2.0 * self.z * self.z
    }

    /// Full 4×4 matrix in (x_A, p_A, x_B, p_B) ordering.
    pub fn to_matrix(&self) -> [[f64; 4]; 4] {
        let (x, y, z) = (self.x, self.y, self.z);
        [
            [x, 0.0, z, 0.0],
            [0.0, x, 0.0, -z],
            [z, 0.0, y, 0.0],
            [0.0, -z, 0.0, y],
        ]
    }
}

/// Checks the type invariants without mutating anything.
pub fn validate_covariance(cov: &TwoModeCovariance) -> CovarianceDiagnostics {
    let mut violations = Vec::new();
    if !(cov.x.is_finite() && cov.y.is_finite() && cov.z.is_finite()) {
        violations.push(CovarianceViolation::NotFinite);
        return CovarianceDiagnostics { violations };
    }
    if cov.x < 1.0 {
        violations.push(CovarianceViolation::SubVacuumA);
    }
    if cov.y < 1.0 {
        violations.push(CovarianceViolation::SubVacuumB);
    }
    if cov.z * cov.z > cov.x * cov.y {
        violations.push(CovarianceViolation::NotPositiveSemidefinite);
    }
    CovarianceDiagnostics { violations }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SymplecticSpectrum {
    pub nu1: f64,
    pub nu2: f64,
    /// Alice's conditional eigenvalue after Bob heterodynes.
    pub nu3: f64,
}

fn clamp_nu(name: &str, nu: f64) -> Result<f64> {
    if !nu.is_finite() {
        return Err(Error::NonPhysicalCovariance(format!("{name} is not finite")));
    }
    if nu < 1.0 - NU_TOLERANCE {
        return Err(Error::NonPhysicalCovariance(format!(
            "{name} = {nu} violates the uncertainty principle"
        )));
    }
    Ok(nu.max(1.0))
}

/// Symplectic eigenvalues from the two invariants Δ and det Γ.
///
/// ν²₁,₂ = ½[Δ ± √(Δ² − 4 det Γ)], ν₃ = x − z²/(1 + y).
pub fn symplectic_eigenvalues(cov: &TwoModeCovariance) -> Result<SymplecticSpectrum> {
    let diag = validate_covariance(cov);
    if !diag.is_valid() {
        return Err(Error::NonPhysicalCovariance(format!(
            "{cov:?} violates {:?}",
            diag.violations
        )));
    }
    let TwoModeCovariance { x, y, z } = *cov;
    let delta = cov.delta();

    // Δ² − 4 det Γ factors as (x − y)²·((x + y)² − 4z²); the factored form
    // avoids cancellation near the pure-state boundary.
    let disc = (x - y) * (x - y) * ((x + y) * (x + y) - 4.0 * z * z);
    let disc = if disc < 0.0 {
        if disc < -DISCRIMINANT_TOLERANCE * delta.abs().max(1.0).powi(2) {
            return Err(Error::NonPhysicalCovariance(format!(
                "negative discriminant {disc:e} for {cov:?}"
            )));
        }
        0.0
    } else {
        disc
    };

    let nu1_sq = 0.5 * (delta + disc.sqrt());
    if nu1_sq <= 0.0 {
        return Err(Error::NonPhysicalCovariance(format!(
            "non-positive ν₁² for {cov:?}"
        )));
    }
    let nu1 = nu1_sq.sqrt();
    // ν₁ν₂ = |xy − z²| is better conditioned than the minus root.
    let nu2 = (x * y - z * z).abs() / nu1;
    let nu3 = x - z * z / (1.0 + y);

    Ok(SymplecticSpectrum {
        nu1: clamp_nu("nu1", nu1)?,
        nu2: clamp_nu("nu2", nu2)?,
        nu3: clamp_nu("nu3", nu3)?,
    })
}

fn xlog2x(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else {
        t * t.log2()
    }
}

/// Von Neumann entropy (bits) of a thermal mode with symplectic eigenvalue `x`.
pub fn g_entropy(x: f64) -> Result<f64> {
    if !x.is_finite() || x < 1.0 - 1e-12 {
        return Err(Error::Domain(format!("g(x) requires x ≥ 1, got {x}")));
    }
    if x <= 1.0 {
        return Ok(0.0);
    }
    Ok(xlog2x(0.5 * (x + 1.0)) - xlog2x(0.5 * (x - 1.0)))
}

/// Holevo bound f(Σ_a, Σ_b, Σ_c) = g(ν₁) + g(ν₂) − g(ν₃), in bits per mode.
pub fn holevo_f(sigma_a: f64, sigma_b: f64, sigma_c: f64) -> Result<f64> {
    holevo_f_cov(&TwoModeCovariance::new(sigma_a, sigma_b, sigma_c)?)
}

pub fn holevo_f_cov(cov: &TwoModeCovariance) -> Result<f64> {
    let s = symplectic_eigenvalues(cov)?;
    Ok(g_entropy(s.nu1)? + g_entropy(s.nu2)? - g_entropy(s.nu3)?)
}
