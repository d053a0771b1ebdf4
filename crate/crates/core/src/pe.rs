//! Parameter estimation: chi-square tails, split-vector confidence bounds,
//! the bad-event thresholds and the accept/abort decision.
//!
//! Throughout, `k` is the number of modes in each half of the Gaussian
//! parameter-estimation set, so the full vectors X and Y hold 2k modes
//! (4k real entries) and E‖X‖²/2k = Σ_a + 1.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::channel::{dot, norm2, PeSets};
use crate::error::{domain, Error, Result};
use crate::params::ChannelParams;

/// Logarithm used inside the cross-half lemma, the threshold theorem and
/// the final estimates. The projection lemma always uses ln.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LogBase {
    #[default]
    Natural,
    /// Base 2.
    PaperLiteral,
}

impl LogBase {
    pub fn log(self, x: f64) -> f64 {
        match self {
            LogBase::Natural => x.ln(),
            LogBase::PaperLiteral => x.log2(),
        }
    }
}

fn check_k(k: f64) -> Result<()> {
    if !(k >= 1.0) || !k.is_finite() {
        return Err(domain(format!("k must be ≥ 1, got {k}")));
    }
    Ok(())
}

fn check_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(domain(format!("epsilon must lie in (0, 1), got {eps}")));
    }
    Ok(())
}

/// Deviations (2√(kx) + 2x, 2√(kx)) for the upper and lower χ²(k) tails,
/// each exceeded with probability at most e^{−x}.
pub fn chi2_tail_thresholds(k: f64, x: f64) -> Result<(f64, f64)> {
    check_k(k)?;
    if !(x >= 0.0) || !x.is_finite() {
        return Err(domain(format!("x must be ≥ 0, got {x}")));
    }
    let s = 2.0 * (k * x).sqrt();
    Ok((s + 2.0 * x, s))
}

/// Interval for ‖X₁‖² when X₁ is a random half of X:
/// ½[1 − (11/5)γ]‖X‖² and ½[1 + (5/2)γ]‖X‖² with γ = √(ln(2/ε)/k).
/// Each side fails with probability at most ε.
pub fn projection_bounds(norm_x2: f64, k: f64, eps: f64) -> Result<(f64, f64)> {
    check_k(k)?;
    check_eps(eps)?;
    let floor = 2.0 * (-k / 2.0).exp();
    if eps < floor {
        return Err(Error::EpsilonTooSmall { epsilon: eps, floor });
    }
    let g = ((2.0 / eps).ln() / k).sqrt();
    Ok((0.5 * (1.0 - 2.2 * g) * norm_x2, 0.5 * (1.0 + 2.5 * g) * norm_x2))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InnerProductBounds {
    /// Two-sided interval for ⟨X₁,Y₁⟩, failure probability 8e^{−x}.
    pub lower: f64,
    pub upper: f64,
    /// One-sided lower bound, failure probability 4e^{−x}.
    pub one_sided_lower: f64,
}

/// Bounds on ⟨X₁,Y₁⟩ from the full ⟨X,Y⟩. The two-sided interval uses the
/// coefficient 47/10 reached at the end of the derivation.
pub fn inner_product_bounds(
    norm_x2: f64,
    norm_y2: f64,
    ip_xy: f64,
    k: f64,
    x: f64,
) -> Result<InnerProductBounds> {
    check_k(k)?;
    if !(x >= 0.0) {
        return Err(domain(format!("x must be ≥ 0, got {x}")));
    }
    if x > k / 2.0 {
        return Err(domain(format!("x = {x} exceeds k/2 = {}", k / 2.0)));
    }
    let s = (x / k).sqrt() * (norm_x2 + norm_y2);
    Ok(InnerProductBounds {
        lower: 0.5 * (ip_xy - 4.7 * s),
        upper: 0.5 * (ip_xy + 4.7 * s),
        one_sided_lower: 0.5 * ip_xy - 2.5 * s,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrossHalfBounds {
    /// ‖X₂‖² ≤ upper_other, failure probability ε.
    pub upper_other: f64,
    /// ‖X₂‖² ≥ lower_other, failure probability ε.
    pub lower_other: f64,
    /// ⟨X₂,Y₂⟩ ≥ ip_lower, failure probability 4ε.
    pub ip_lower: f64,
}

/// Largest value of log(2/ε)/2k for which [`cross_half_bounds`] applies.
pub const CROSS_HALF_LIMIT: f64 = 0.05;

/// Bounds on the second half from the first: factor 1 ± 4√(log(2/ε)/2k).
pub fn cross_half_bounds(
    norm_x1: f64,
    norm_y1: f64,
    ip_1: f64,
    k: f64,
    eps: f64,
    base: LogBase,
) -> Result<CrossHalfBounds> {
    check_k(k)?;
    check_eps(eps)?;
    let r = base.log(2.0 / eps) / (2.0 * k);
    if r > CROSS_HALF_LIMIT {
        return Err(Error::ValidityRange(format!(
            "log(2/ε)/2k = {r:.4} exceeds {CROSS_HALF_LIMIT} (k = {k}, ε = {eps:e})"
        )));
    }
    let f = 4.0 * r.sqrt();
    Ok(CrossHalfBounds {
        upper_other: (1.0 + f) * norm_x1,
        lower_other: (1.0 - f) * norm_x1,
        ip_lower: ip_1 - f * (norm_x1 + norm_y1),
    })
}

/// Sufficient statistics of the parameter-estimation vectors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeStatistics {
    pub norm_x2: f64,
    pub norm_y2: f64,
    pub ip_xy: f64,
    /// Modes per half.
    pub k: f64,
}

impl PeStatistics {
    pub fn from_sets(sets: &PeSets) -> Self {
        let (x, y) = sets.joined();
        Self { norm_x2: norm2(&x), norm_y2: norm2(&y), ip_xy: dot(&x, &y), k: sets.x1.len() as f64 / 2.0 }
    }
}

fn regime_check(k: f64, eps: f64, base: LogBase) -> Result<f64> {
    check_k(k)?;
    check_eps(eps)?;
    let r36 = (base.log(36.0 / eps) / k).sqrt();
    let lhs = (1.0 + 2.5 * r36) * (1.0 + (360.0 / eps) * (-k / 16.0).exp());
    let rhs = 1.0 + 3.0 * r36;
    if !(lhs <= rhs) {
        return Err(Error::Regime(format!(
            "k = {k} too small for ε = {eps:e}: {lhs:.6} > {rhs:.6}"
        )));
    }
    Ok(r36)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeThresholds {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

/// The thresholds a, b, c, d of the bad events. `a` is given for ‖X‖²; the
/// ‖Y‖² version is the same expression with `norm_y2`.
pub fn pe_thresholds(stats: &PeStatistics, eps: f64, base: LogBase) -> Result<PeThresholds> {
    let PeStatistics { norm_x2, norm_y2, ip_xy, k } = *stats;
    let r36 = regime_check(k, eps, base)?;
    let sum = norm_x2 + norm_y2;
    let a = 0.5 * (1.0 + 2.5 * r36) * norm_x2;
    let b = a * (1.0 + (432.0 / eps) * (-k / 16.0).exp());
    let c = 0.5 * ip_xy - 2.5 * (base.log(72.0 / eps) / k).sqrt() * sum;
    let d = c - 2.0 * sum * (base.log(144.0 / eps) / k).sqrt();
    Ok(PeThresholds { a, b, c, d })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaEstimates {
    pub gamma_a: f64,
    pub gamma_b: f64,
    pub gamma_c: f64,
}

/// γ_a = (1/2k)[1 + 3√(log(36/ε)/k)]‖X‖² − 1, γ_b likewise with ‖Y‖²,
/// γ_c = (1/2k)⟨X,Y⟩ − 6√(log(144/ε)/k³)(‖X‖² + ‖Y‖²).
pub fn gamma_estimates(stats: &PeStatistics, eps_pe: f64, base: LogBase) -> Result<GammaEstimates> {
    let PeStatistics { norm_x2, norm_y2, ip_xy, k } = *stats;
    let r36 = regime_check(k, eps_pe, base)?;
    let scale = (1.0 + 3.0 * r36) / (2.0 * k);
    Ok(GammaEstimates {
        gamma_a: scale * norm_x2 - 1.0,
        gamma_b: scale * norm_y2 - 1.0,
        gamma_c: ip_xy / (2.0 * k)
            - 6.0 * (base.log(144.0 / eps_pe) / k.powi(3)).sqrt() * (norm_x2 + norm_y2),
    })
}

/// Margins added to (or subtracted from) the expected covariance entries.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Deltas {
    pub delta_a: f64,
    pub delta_b: f64,
    pub delta_c: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Abort,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceRegion {
    pub gamma_a: f64,
    pub gamma_b: f64,
    pub gamma_c: f64,
    pub sigma_a_max: f64,
    pub sigma_b_max: f64,
    pub sigma_c_min: f64,
    pub epsilon_pe: f64,
    pub verdict: Verdict,
}

/// (Σ_a^max, Σ_b^max, Σ_c^min) = (V + δ_a, y + δ_b, √T·Z − δ_c).
pub fn region_thresholds(channel: &ChannelParams, deltas: &Deltas) -> Result<(f64, f64, f64)> {
    Ok((
        channel.alice_variance() + deltas.delta_a,
        channel.bob_variance() + deltas.delta_b,
        channel.four_state_correlation()? - deltas.delta_c,
    ))
}

/// Accepts iff γ_a ≤ Σ_a^max, γ_b ≤ Σ_b^max and γ_c ≥ Σ_c^min.
pub fn pe_decision(
    gammas: &GammaEstimates,
    channel: &ChannelParams,
    deltas: &Deltas,
    epsilon_pe: f64,
) -> Result<ConfidenceRegion> {
    if deltas.delta_a < 0.0 || deltas.delta_b < 0.0 || deltas.delta_c < 0.0 {
        return Err(domain(format!("deltas must be ≥ 0, got {deltas:?}")));
    }
    let (sa, sb, sc) = region_thresholds(channel, deltas)?;
    let pass = gammas.gamma_a <= sa && gammas.gamma_b <= sb && gammas.gamma_c >= sc;
    Ok(ConfidenceRegion {
        gamma_a: gammas.gamma_a,
        gamma_b: gammas.gamma_b,
        gamma_c: gammas.gamma_c,
        sigma_a_max: sa,
        sigma_b_max: sb,
        sigma_c_min: sc,
        epsilon_pe,
        verdict: if pass { Verdict::Pass } else { Verdict::Abort },
    })
}

/// Margins chosen so an honest channel aborts with probability about
/// `eps_rob`: each statistic is pushed q = Φ⁻¹(1 − ε_rob/3) standard
/// deviations towards failure and the estimate is evaluated there.
///
/// Model: X and Y have 4k independent real entries with variances
/// (V + 1)/2 and (y + 1)/2 and per-entry covariance √T·Z/2.
pub fn calibrate_deltas(
    channel: &ChannelParams,
    k: f64,
    eps_pe: f64,
    eps_rob: f64,
    base: LogBase,
) -> Result<Deltas> {
    check_eps(eps_rob)?;
    let q = Normal::new(0.0, 1.0)
        .map_err(|e| domain(e.to_string()))?
        .inverse_cdf(1.0 - eps_rob / 3.0);
    let v = channel.alice_variance();
    let y = channel.bob_variance();
    let z = channel.four_state_correlation()?;
    let (sa2, sb2) = ((v + 1.0) / 2.0, (y + 1.0) / 2.0);
    let ex = 2.0 * k * (v + 1.0);
    let ey = 2.0 * k * (y + 1.0);
    let eip = 2.0 * k * z;
    let sx = sa2 * (8.0 * k).sqrt();
    let sy = sb2 * (8.0 * k).sqrt();
    let sip = (4.0 * k * (sa2 * sb2 + z * z / 4.0)).sqrt();

    let high = gamma_estimates(
        &PeStatistics { norm_x2: ex + q * sx, norm_y2: ey + q * sy, ip_xy: eip - q * sip, k },
        eps_pe,
        base,
    )?;
    Ok(Deltas {
        delta_a: (high.gamma_a - v).max(0.0),
        delta_b: (high.gamma_b - y).max(0.0),
        delta_c: (z - high.gamma_c).max(0.0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chi2_examples() {
        assert_eq!(chi2_tail_thresholds(100.0, 0.0).unwrap(), (0.0, 0.0));
        assert_eq!(chi2_tail_thresholds(100.0, 4.0).unwrap(), (48.0, 40.0));
        assert!(chi2_tail_thresholds(0.5, 1.0).is_err());
    }

    #[test]
    fn projection_edge() {
        let k = 100.0;
        let edge = 2.0 * (-k / 2.0f64).exp();
        let (lo, hi) = projection_bounds(200.0, k, edge).unwrap();
        assert!(lo < hi);
        assert!(matches!(
            projection_bounds(200.0, k, edge * 0.5),
            Err(Error::EpsilonTooSmall { .. })
        ));
    }

    #[test]
    fn inner_product_symmetric_case() {
        let b = inner_product_bounds(200.0, 200.0, 200.0, 100.0, 4.0).unwrap();
        assert!(b.lower <= 100.0 && 100.0 <= b.upper);
        assert!(b.one_sided_lower <= 100.0);
        assert!(inner_product_bounds(1.0, 1.0, 1.0, 100.0, 50.1).is_err());
    }

    #[test]
    fn cross_half_edge() {
        // log(2/ε) = 0.1k exactly.
        let k: f64 = 100.0;
        let eps = 2.0 / (0.1 * k).exp();
        let b = cross_half_bounds(1.0, 0.0, 0.0, k, eps * (1.0 + 1e-12), LogBase::Natural).unwrap();
        assert!((b.upper_other - (1.0 + 4.0 * 0.05f64.sqrt())).abs() < 1e-9);
        assert!(matches!(
            cross_half_bounds(1.0, 0.0, 0.0, k, eps * 0.9, LogBase::Natural),
            Err(Error::ValidityRange(_))
        ));
    }

    #[test]
    fn gamma_at_unit_norm() {
        let k = 1e4;
        let eps = 1e-5;
        let stats = PeStatistics { norm_x2: 2.0 * k, norm_y2: 2.0 * k, ip_xy: 0.0, k };
        let g = gamma_estimates(&stats, eps, LogBase::Natural).unwrap();
        assert!((g.gamma_a - 3.0 * ((36.0 / eps).ln() / k).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn regime_error_for_small_k() {
        let stats = PeStatistics { norm_x2: 200.0, norm_y2: 200.0, ip_xy: 100.0, k: 100.0 };
        assert!(matches!(
            pe_thresholds(&stats, 1e-5, LogBase::Natural),
            Err(Error::Regime(_))
        ));
    }

    #[test]
    fn boundary_passes() {
        let ch = ChannelParams::new(0.5, 0.6, 0.05).unwrap();
        let zero = Deltas { delta_a: 0.0, delta_b: 0.0, delta_c: 0.0 };
        let (sa, sb, sc) = region_thresholds(&ch, &zero).unwrap();
        let g = GammaEstimates { gamma_a: sa, gamma_b: sb, gamma_c: sc };
        assert_eq!(pe_decision(&g, &ch, &zero, 1e-10).unwrap().verdict, Verdict::Pass);
        let g = GammaEstimates { gamma_c: sc - 1e-12, ..g };
        assert_eq!(pe_decision(&g, &ch, &zero, 1e-10).unwrap().verdict, Verdict::Abort);
    }
}
