//! Reduction from general to collective attacks.

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// dim of the symmetric subspace with at most K photons: C(K + 4, 4).
pub fn symmetric_dim(k: u64) -> Result<u128> {
    let k = k as u128;
    let overflow = || Error::Overflow(format!("C({} + 4, 4) exceeds u128", k));
    let p = (k + 1)
        .checked_mul(k + 2)
        .and_then(|p| p.checked_mul(k + 3))
        .and_then(|p| p.checked_mul(k + 4))
        .ok_or_else(overflow)?;
    Ok(p / 24)
}

/// ⌈2·log₂ C(K + 4, 4)⌉, exactly: the bit length of d² − 1.
pub fn key_reduction_bits(k: u64) -> Result<u64> {
    let d = BigUint::from(symmetric_dim(k)?);
    let sq = &d * &d - 1u32;
    Ok(sq.bits())
}

/// Truncation error of the finite-energy reduction, N = n − 5:
/// 2(N + K)⁷/N³·exp(−2N³/((N + K)² ln 2)), clamped to [0, 1].
pub fn truncation_epsilon(n: u64, k: u64, eta: f64) -> Result<f64> {
    if n < 6 {
        return Err(domain(format!("n must be ≥ 6, got {n}")));
    }
    if !(0.0..1.0).contains(&eta) {
        return Err(domain(format!("eta must lie in [0, 1), got {eta}")));
    }
    let big_n = (n - 5) as f64;
    let kf = k as f64;
    let limit = eta / (1.0 - eta) * big_n;
    if kf > limit * (1.0 + 1e-12) {
        return Err(Error::Regime(format!(
            "K = {k} exceeds η/(1−η)(n−5) = {limit} (n = {n}, η = {eta})"
        )));
    }
    let s = big_n + kf;
    let ln_eps = std::f64::consts::LN_2 + 7.0 * s.ln() - 3.0 * big_n.ln()
        - 2.0 * big_n.powi(3) / (s * s * std::f64::consts::LN_2);
    Ok(ln_eps.min(0.0).exp())
}

/// Smallest η for which K photons fit: K/(K + n − 5).
pub fn minimal_eta(n: u64, k: u64) -> Result<f64> {
    if n < 6 {
        return Err(domain(format!("n must be ≥ 6, got {n}")));
    }
    Ok(k as f64 / (k as f64 + (n - 5) as f64))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VolumeT {
    /// (n−1)(n−2)²(n−3)/(12(1−η)⁴).
    pub t: f64,
    /// K⁴/12 at K = n/(1−η).
    pub k4_bound: f64,
}

pub fn volume_t(n: u64, eta: f64) -> Result<VolumeT> {
    if n == 0 {
        return Err(domain("n must be ≥ 1"));
    }
    if !(0.0..1.0).contains(&eta) {
        return Err(domain(format!("eta must lie in [0, 1), got {eta}")));
    }
    let m = n as i128;
    let num = (m - 1) * (m - 2) * (m - 2) * (m - 3);
    let den = 12.0 * (1.0 - eta).powi(4);
    let k = n as f64 / (1.0 - eta);
    Ok(VolumeT { t: num as f64 / den, k4_bound: k.powi(4) / 12.0 })
}

/// g(n, k, ε) = (1 + 2√(L/n) + 2L/n)/(1 − 2√(L/k)), L = ln(2/ε).
pub fn energy_scaling(n: f64, k: f64, eps: f64) -> Result<f64> {
    if !(n > 0.0 && k > 0.0) {
        return Err(domain(format!("n and k must be > 0, got {n}, {k}")));
    }
    crate::error::ensure_probability("eps", eps)?;
    let l = (2.0 / eps).ln();
    let den = 1.0 - 2.0 * (l / k).sqrt();
    if den <= 1e-12 {
        return Err(Error::Regime(format!(
            "k = {k} must exceed 4·ln(2/ε) = {} for the energy test",
            4.0 * l
        )));
    }
    Ok((1.0 + 2.0 * (l / n).sqrt() + 2.0 * l / n) / den)
}

/// K = max{1, ⌈n(d_A + d_B)(1 + 2√(L/2n) + L/n)/(1 − 2√(L/2k))⌉}, L = ln(8/ε).
pub fn photon_cutoff(n: u64, k: u64, d_a: f64, d_b: f64, eps: f64) -> Result<u64> {
    if n == 0 || k == 0 {
        return Err(domain("n and k must be ≥ 1"));
    }
    if !(d_a >= 0.0 && d_b >= 0.0) {
        return Err(domain(format!("thresholds must be ≥ 0, got {d_a}, {d_b}")));
    }
    crate::error::ensure_probability("eps", eps)?;
    let (nf, kf) = (n as f64, k as f64);
    let l = (8.0 / eps).ln();
    let den = 1.0 - 2.0 * (l / (2.0 * kf)).sqrt();
    if den <= 1e-12 {
        return Err(Error::Regime(format!("k = {k} too small for ε = {eps:e} in the photon cutoff")));
    }
    let raw = nf * (d_a + d_b) * (1.0 + 2.0 * (l / (2.0 * nf)).sqrt() + l / nf) / den;
    if raw >= u64::MAX as f64 {
        return Err(Error::Overflow(format!("photon cutoff {raw:e}")));
    }
    Ok((raw.ceil() as u64).max(1))
}

/// (2 + K⁴/6)·ε and whether the result is vacuous (≥ 1).
pub fn general_attack_epsilon(eps_collective: f64, k: u64) -> (f64, bool) {
    let e = (2.0 + (k as f64).powi(4) / 6.0) * eps_collective;
    (e, e >= 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyTestConfig {
    pub k_test: usize,
    pub d_a: f64,
    pub d_b: f64,
    pub eps_test: f64,
}

impl EnergyTestConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k_test == 0 {
            return Err(Error::Config("k_test must be ≥ 1".into()));
        }
        if !(self.d_a >= 0.0 && self.d_b >= 0.0) {
            return Err(Error::Config(format!(
                "energy thresholds must be ≥ 0, got {} and {}",
                self.d_a, self.d_b
            )));
        }
        crate::error::ensure_probability("eps_test", self.eps_test)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyTestOutcome {
    pub energy_a: f64,
    pub energy_b: f64,
    pub limit_a: f64,
    pub limit_b: f64,
    pub pass: bool,
}

/// Per-mode state energy from a heterodyne outcome: (x² + p²)/2 − 1.
pub fn mode_energy(x: f64, p: f64) -> f64 {
    0.5 * (x * x + p * p) - 1.0
}

/// Passes iff Σ energy ≤ k·d on both sides. Inputs are heterodyne outcomes
/// (x, p) per mode.
pub fn energy_test(
    alice: &[(f64, f64)],
    bob: &[(f64, f64)],
    config: &EnergyTestConfig,
) -> Result<EnergyTestOutcome> {
    config.validate()?;
    for side in [alice, bob] {
        if side.len() != config.k_test {
            return Err(Error::DimensionMismatch { expected: config.k_test, found: side.len() });
        }
    }
    let energy_a: f64 = alice.iter().map(|&(x, p)| mode_energy(x, p)).sum();
    let energy_b: f64 = bob.iter().map(|&(x, p)| mode_energy(x, p)).sum();
    let k = config.k_test as f64;
    let (limit_a, limit_b) = (k * config.d_a, k * config.d_b);
    Ok(EnergyTestOutcome {
        energy_a,
        energy_b,
        limit_a,
        limit_b,
        pass: energy_a <= limit_a && energy_b <= limit_b,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReductionReport {
    pub n: u64,
    pub k: u64,
    pub d_a: f64,
    pub d_b: f64,
    pub eta: f64,
    pub photon_cutoff: u64,
    pub t_n_eta: f64,
    pub t_k4_bound: f64,
    pub truncation_eps: f64,
    pub eps_collective: f64,
    pub eps_general: f64,
    pub vacuous: bool,
    pub key_reduction: u64,
}

impl ReductionReport {
    pub fn audit(&self) -> f64 {
        general_attack_epsilon(self.eps_collective, self.photon_cutoff).0
    }
}

/// Full reduction for `n` protected modes and `k` tested modes. With
/// `eta = None` the smallest η admitting the cutoff is used.
pub fn reduction_report(
    n: u64,
    k: u64,
    d_a: f64,
    d_b: f64,
    eta: Option<f64>,
    eps_test: f64,
    eps_collective: f64,
) -> Result<ReductionReport> {
    let cutoff = photon_cutoff(n, k, d_a, d_b, eps_test)?;
    let eta = match eta {
        Some(e) => e,
        None => minimal_eta(n, cutoff)?,
    };
    let truncation_eps = truncation_epsilon(n, cutoff, eta)?;
    let vol = volume_t(n, eta)?;
    let (eps_general, vacuous) = general_attack_epsilon(eps_collective, cutoff);
    Ok(ReductionReport {
        n,
        k,
        d_a,
        d_b,
        eta,
        photon_cutoff: cutoff,
        t_n_eta: vol.t,
        t_k4_bound: vol.k4_bound,
        truncation_eps,
        eps_collective,
        eps_general,
        vacuous,
        key_reduction: key_reduction_bits(cutoff)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dims() {
        assert_eq!(symmetric_dim(0).unwrap(), 1);
        assert_eq!(key_reduction_bits(0).unwrap(), 0);
        assert_eq!(symmetric_dim(4).unwrap(), 70);
        assert_eq!(key_reduction_bits(4).unwrap(), 13);
        assert!(symmetric_dim(1_000_000).is_ok());
        assert!(matches!(symmetric_dim(u64::MAX / 2), Err(Error::Overflow(_))));
    }

    #[test]
    fn volume_examples() {
        assert_eq!(volume_t(3, 0.3).unwrap().t, 0.0);
        assert_eq!(volume_t(5, 0.0).unwrap().t, 6.0);
        assert!(volume_t(5, 1.0).is_err());
    }

    #[test]
    fn truncation() {
        assert!(truncation_epsilon(200, 0, 0.0).unwrap() < 1e-15);
        // Boundary K = η/(1−η)(n−5) with η = 1/2.
        assert!(truncation_epsilon(105, 100, 0.5).is_ok());
        assert!(matches!(truncation_epsilon(105, 101, 0.5), Err(Error::Regime(_))));
    }

    #[test]
    fn scaling_edge() {
        let eps: f64 = 1e-6;
        let k = 4.0 * (2.0 / eps).ln();
        assert!(matches!(energy_scaling(1e4, k, eps), Err(Error::Regime(_))));
        assert!(energy_scaling(1e12, 1e12, eps).unwrap() - 1.0 < 1e-4);
    }

    #[test]
    fn energy_test_single_bright_mode() {
        let cfg = EnergyTestConfig { k_test: 1, d_a: 1.0, d_b: 1.0, eps_test: 1e-6 };
        // (x² + p²)/2 − 1 = 10.
        let bright = (22f64.sqrt(), 0.0);
        let out = energy_test(&[bright], &[(0.0, 0.0)], &cfg).unwrap();
        assert!(!out.pass);
        assert!(matches!(
            energy_test(&[], &[(0.0, 0.0)], &cfg),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn general_epsilon() {
        assert_eq!(general_attack_epsilon(6e-10, 1).0, (2.0 + 1.0 / 6.0) * 6e-10);
        let (e, vacuous) = general_attack_epsilon(1e-20, 100);
        assert_eq!(e, (2.0 + 1e8 / 6.0) * 1e-20);
        assert!(!vacuous);
    }
}
