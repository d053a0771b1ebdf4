//! Four-state (QPSK) constellation constants.
//!
//! Alice sends |α e^{i(2k+1)π/4}⟩, k ∈ {0,1,2,3}, with equal probability.
//! The averaged state is diagonal in the four Fock-residue classes
//! n ≡ k (mod 4); its eigenvalues λ_k and the EPR-like correlation Z of a
//! purification fix the expected covariance matrix after the channel.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::gaussian::TwoModeCovariance;

/// Default Fock cutoff.
pub const DEFAULT_N_MAX: usize = 60;
/// Largest tolerated probability mass beyond the cutoff.
pub const TAIL_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstellationParams {
    pub alpha: f64,
}

impl ConstellationParams {
    pub fn new(alpha: f64) -> Result<Self> {
        if !alpha.is_finite() || alpha < 0.0 {
            return Err(domain(format!("alpha must be ≥ 0, got {alpha}")));
        }
        Ok(Self { alpha })
    }

    /// V_A = 2α².
    pub fn modulation_variance(&self) -> f64 {
        2.0 * self.alpha * self.alpha
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LambdaWeights(pub [f64; 4]);

impl LambdaWeights {
    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }

    /// Σ_k λ_k^{3/2} / λ_{k+1}^{1/2} with cyclic index.
    pub fn correlation_sum(&self) -> f64 {
        let l = &self.0;
        (0..4)
            .map(|k| l[k].powf(1.5) / l[(k + 1) % 4].sqrt())
            .sum()
    }
}

/// Residue-class sums S_k = Σ_{n ≡ k mod 4} a^n / n!, by direct series.
fn residue_sums(a: f64) -> [f64; 4] {
    let mut sums = [0.0; 4];
    let mut term = 1.0;
    let mut n = 0usize;
    loop {
        sums[n % 4] += term;
        n += 1;
        term *= a / n as f64;
        if n as f64 > a && term < 1e-18 * sums.iter().sum::<f64>() {
            break;
        }
    }
    sums
}

/// λ_{0,2} = ½e^{−α²}[cosh α² ± cos α²], λ_{1,3} = ½e^{−α²}[sinh α² ± sin α²].
pub fn lambda_weights(alpha: f64) -> Result<LambdaWeights> {
    let a = ConstellationParams::new(alpha)?.alpha.powi(2);
    if a == 0.0 {
        return Ok(LambdaWeights([1.0, 0.0, 0.0, 0.0]));
    }
    // The closed forms lose relative precision for λ₂, λ₃ at small α
    // (cosh − cos ~ a²); the residue series is exact term by term.
    let l = if a <= 30.0 {
        let s = residue_sums(a);
        let e = (-a).exp();
        [e * s[0], e * s[1], e * s[2], e * s[3]]
    } else {
        let e = (-a).exp();
        [
            0.5 * e * (a.cosh() + a.cos()),
            0.5 * e * (a.sinh() + a.sin()),
            0.5 * e * (a.cosh() - a.cos()),
            0.5 * e * (a.sinh() - a.sin()),
        ]
    };
    Ok(LambdaWeights(l))
}

/// Z = V_A Σ_k λ_k^{3/2}/λ_{k+1}^{1/2}.
pub fn correlation_z(alpha: f64) -> Result<f64> {
    if !(alpha > 0.0) {
        return Err(domain(format!(
            "Z requires alpha > 0 (all four weights nonzero), got {alpha}"
        )));
    }
    let w = lambda_weights(alpha)?;
    if w.0.iter().any(|&l| l <= 0.0) {
        return Err(domain(format!("weight underflow at alpha = {alpha}")));
    }
    let va = ConstellationParams { alpha }.modulation_variance();
    Ok(va * w.correlation_sum())
}

/// Correlation of a two-mode squeezed vacuum with the same modulation
/// variance, √(V_A² + 2V_A). Z is strictly below it.
pub fn gaussian_epr_correlation(va: f64) -> f64 {
    (va * va + 2.0 * va).sqrt()
}

/// Fock amplitudes of the eigenvector |φ_k⟩, indices 0..=n_max.
///
/// ⟨4j+k|φ_k⟩ = e^{−α²/2}/√λ_k · α^{4j+k}/√((4j+k)!) · (−1)^j.
pub fn fock_state_vector(alpha: f64, k: usize, n_max: usize) -> Result<Vec<f64>> {
    if k > 3 {
        return Err(domain(format!("k must be in 0..=3, got {k}")));
    }
    if n_max < 4 {
        return Err(domain(format!("n_max must be ≥ 4, got {n_max}")));
    }
    let w = lambda_weights(alpha)?;
    let lambda = w.0[k];
    if lambda <= 0.0 {
        return Err(domain(format!("λ_{k} vanishes at alpha = {alpha}")));
    }
    let mut coeffs = vec![0.0; n_max + 1];
    let mut amp = (-0.5 * alpha * alpha).exp();
    let norm = lambda.sqrt();
    for n in 0..=n_max {
        if n > 0 {
            amp *= alpha / (n as f64).sqrt();
        }
        if n % 4 == k {
            let sign = if (n / 4) % 2 == 0 { 1.0 } else { -1.0 };
            coeffs[n] = sign * amp / norm;
        }
    }
    let mass: f64 = coeffs.iter().map(|c| c * c).sum();
    let tail = 1.0 - mass;
    if tail > TAIL_TOLERANCE {
        return Err(Error::Truncation { n_max, tail_mass: tail });
    }
    Ok(coeffs)
}

/// Γ_AB after a channel with transmittance `t` and excess noise `xi`:
/// x = V_A + 1, y = T V_A + 1 + T ξ, z = √T Z.
pub fn expected_covariance(alpha: f64, t: f64, xi: f64) -> Result<TwoModeCovariance> {
    if !(t > 0.0 && t <= 1.0) {
        return Err(domain(format!("transmittance must lie in (0, 1], got {t}")));
    }
    if !(xi >= 0.0) || !xi.is_finite() {
        return Err(domain(format!("excess noise must be ≥ 0, got {xi}")));
    }
    let va = ConstellationParams::new(alpha)?.modulation_variance();
    let z = t.sqrt() * correlation_z(alpha)?;
    TwoModeCovariance::new(va + 1.0, t * va + 1.0 + t * xi, z)
}
