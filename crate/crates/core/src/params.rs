use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::modulation;

/// Physical channel and constellation parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelParams {
    /// Coherent-state amplitude α (shot-noise units).
    pub alpha: f64,
    /// Channel transmittance T ∈ (0, 1].
    pub transmittance: f64,
    /// Excess noise ξ referred to the channel input.
    pub excess_noise: f64,
}

impl ChannelParams {
    pub fn new(alpha: f64, transmittance: f64, excess_noise: f64) -> Result<Self> {
        let p = Self { alpha, transmittance, excess_noise };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0) || !self.alpha.is_finite() {
            return Err(domain(format!("alpha must be > 0, got {}", self.alpha)));
        }
        if !(self.transmittance > 0.0 && self.transmittance <= 1.0) {
            return Err(domain(format!(
                "transmittance must lie in (0, 1], got {}",
                self.transmittance
            )));
        }
        if !(self.excess_noise >= 0.0) || !self.excess_noise.is_finite() {
            return Err(domain(format!(
                "excess noise must be ≥ 0, got {}",
                self.excess_noise
            )));
        }
        Ok(())
    }

    /// V_A = 2α².
    pub fn modulation_variance(&self) -> f64 {
        2.0 * self.alpha * self.alpha
    }

    /// V = V_A + 1, Alice's EPR-mode variance.
    pub fn alice_variance(&self) -> f64 {
        self.modulation_variance() + 1.0
    }

    /// y = T V_A + 1 + T ξ.
    pub fn bob_variance(&self) -> f64 {
        let t = self.transmittance;
        t * self.modulation_variance() + 1.0 + t * self.excess_noise
    }

    /// Heterodyne noise variance on one real quadrature of Bob's outcome:
    /// (2 + Tξ)/2.
    pub fn heterodyne_noise_variance(&self) -> f64 {
        0.5 * (2.0 + self.transmittance * self.excess_noise)
    }

    /// Four-state correlation √T·Z.
    pub fn four_state_correlation(&self) -> Result<f64> {
        Ok(self.transmittance.sqrt() * modulation::correlation_z(self.alpha)?)
    }

    /// Gaussian-modulation correlation √T·√(V² − 1).
    pub fn gaussian_correlation(&self) -> f64 {
        self.transmittance.sqrt() * modulation::gaussian_epr_correlation(self.modulation_variance())
    }
}

/// Mode counts: the batch holds 2n key, 2m decoy and 2k Gaussian modes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundCounts {
    pub n: u64,
    pub m: u64,
    pub k: u64,
}

impl RoundCounts {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.m == 0 || self.k == 0 {
            return Err(Error::Config(format!(
                "round counts must be positive, got n={}, m={}, k={}",
                self.n, self.m, self.k
            )));
        }
        Ok(())
    }

    pub fn total_modes(&self) -> u64 {
        2 * (self.n + self.m + self.k)
    }
}

/// Everything the key-length calculation needs about the physical run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProtocolParams {
    pub channel: ChannelParams,
    pub counts: RoundCounts,
    /// Reconciliation efficiency β ∈ (0, 1].
    pub beta: f64,
}

impl ProtocolParams {
    pub fn validate(&self) -> Result<()> {
        self.channel.validate()?;
        self.counts.validate()?;
        if !(self.beta > 0.0 && self.beta <= 1.0) {
            return Err(domain(format!("beta must lie in (0, 1], got {}", self.beta)));
        }
        Ok(())
    }
}
