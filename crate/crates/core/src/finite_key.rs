//! Composable finite-size key length.

use serde::{Deserialize, Serialize};

use crate::error::{domain, ensure_probability, Result};
use crate::gaussian::holevo_f;

/// The four composable failure probabilities plus the error-correction
/// success probability and the robustness target.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SecurityBudget {
    pub eps_pe: f64,
    pub eps_sm: f64,
    pub eps_ent: f64,
    pub eps_cor: f64,
    pub p_ec: f64,
    pub eps_rob: f64,
}

impl SecurityBudget {
    /// Splits `eps_total` equally; p_ec = 1 − ε_rob.
    pub fn split(eps_total: f64, eps_rob: f64) -> Result<Self> {
        let e = eps_total / 4.0;
        let b = Self { eps_pe: e, eps_sm: e, eps_ent: e, eps_cor: e, p_ec: 1.0 - eps_rob, eps_rob };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<()> {
        ensure_probability("eps_pe", self.eps_pe)?;
        ensure_probability("eps_sm", self.eps_sm)?;
        ensure_probability("eps_ent", self.eps_ent)?;
        ensure_probability("eps_cor", self.eps_cor)?;
        ensure_probability("eps_rob", self.eps_rob)?;
        if !(self.p_ec > 0.0 && self.p_ec <= 1.0) {
            return Err(domain(format!("p_ec must lie in (0, 1], got {}", self.p_ec)));
        }
        let total = self.eps_total();
        if !(total < 1.0) {
            return Err(domain(format!("total epsilon {total} must be < 1")));
        }
        Ok(())
    }

    /// ε = ε_PE + ε_sm + ε_ent + ε_cor.
    pub fn eps_total(&self) -> f64 {
        self.eps_pe + self.eps_sm + self.eps_ent + self.eps_cor
    }
}

/// Δ_AEP = √n(16 + log₂(2/ε²) + 8√log₂(2/ε²)) + 4ε/p + log₂(2/p²).
pub fn delta_aep(n: f64, eps_sm: f64, p_ec: f64) -> Result<f64> {
    if !(n >= 1.0) || !n.is_finite() {
        return Err(domain(format!("n must be ≥ 1, got {n}")));
    }
    ensure_probability("eps_sm", eps_sm)?;
    if !(p_ec > 0.0 && p_ec <= 1.0) {
        return Err(domain(format!("p must lie in (0, 1], got {p_ec}")));
    }
    let l = (2.0 / (eps_sm * eps_sm)).log2();
    Ok(n.sqrt() * (16.0 + l + 8.0 * l.sqrt()) + 4.0 * eps_sm / p_ec + (2.0 / (p_ec * p_ec)).log2())
}

/// Plug-in entropy (bits) of the four quadrant frequencies.
pub fn mle_entropy(counts: &[u64; 4]) -> Result<f64> {
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return Err(domain("quadrant counts are all zero"));
    }
    let t = total as f64;
    Ok(counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / t;
            -p * p.log2()
        })
        .sum::<f64>()
        .clamp(0.0, 2.0))
}

/// Reading of the n in the entropy-estimation penalty.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DeltaEntMode {
    /// n·log₂n·√(2log₂(2/ε)) with n the key-length n.
    #[default]
    Paper,
    /// The same expression with n = 4, the alphabet size.
    Alphabet,
    /// N·t with N = 2n samples and t = log₂N·√(2ln(2/ε)/N).
    Derived,
}

pub fn delta_ent(n: f64, eps_ent: f64, mode: DeltaEntMode) -> Result<f64> {
    if !(n >= 1.0) || !n.is_finite() {
        return Err(domain(format!("n must be ≥ 1, got {n}")));
    }
    ensure_probability("eps_ent", eps_ent)?;
    let literal = |m: f64| m * m.log2() * (2.0 * (2.0 / eps_ent).log2()).sqrt();
    Ok(match mode {
        DeltaEntMode::Paper => literal(n),
        DeltaEntMode::Alphabet => literal(4.0),
        DeltaEntMode::Derived => {
            let big_n = 2.0 * n;
            big_n * big_n.log2() * (2.0 * (2.0 / eps_ent).ln() / big_n).sqrt()
        }
    })
}

/// Key length with every term kept for auditing. Bits are real-valued;
/// only [`KeyLengthReport::final_length`] floors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KeyLengthReport {
    pub n: u64,
    /// 4n quadrant bits from the 2n key modes.
    pub raw_bits: f64,
    pub h_mle: f64,
    pub holevo_f: f64,
    pub entropy_term: f64,
    pub holevo_term: f64,
    pub leak_ec: f64,
    pub delta_aep: f64,
    pub delta_ent: f64,
    pub l: f64,
    pub eps_total: f64,
    pub feasible: bool,
}

impl KeyLengthReport {
    /// Recomputes l from the stored terms.
    pub fn audit(&self) -> f64 {
        self.entropy_term - self.holevo_term - self.leak_ec - self.delta_aep - self.delta_ent
    }

    /// Bits kept after privacy amplification.
    pub fn final_length(&self) -> u64 {
        if self.l > 0.0 {
            self.l.floor() as u64
        } else {
            0
        }
    }
}

/// l = 2n[2Ĥ − f(Σ_a^max, Σ_b^max, Σ_c^min)] − leak − Δ_AEP − Δ_ent.
///
/// `h_mle` is the quadrant entropy in bits (0..=2), so 2n·h_mle is the
/// entropy of the 2n key modes. Σ_c^min is clamped at 0: the region always
/// contains Σ_c = 0 when the lower bound is negative, and f decreases in Σ_c.
pub fn key_length(
    n: u64,
    budget: &SecurityBudget,
    h_mle: f64,
    region: (f64, f64, f64),
    leak_ec: f64,
    mode: DeltaEntMode,
) -> Result<KeyLengthReport> {
    budget.validate()?;
    if n == 0 {
        return Err(domain("n must be ≥ 1"));
    }
    if !(0.0..=2.0).contains(&h_mle) {
        return Err(domain(format!("quadrant entropy must lie in [0, 2], got {h_mle}")));
    }
    if !(leak_ec >= 0.0) {
        return Err(domain(format!("leak must be ≥ 0, got {leak_ec}")));
    }
    let nf = n as f64;
    let f = holevo_f(region.0, region.1, region.2.max(0.0))?;
    let entropy_term = 2.0 * nf * h_mle;
    let holevo_term = 2.0 * nf * f;
    let aep = delta_aep(nf, budget.eps_sm, budget.p_ec)?;
    let ent = delta_ent(nf, budget.eps_ent, mode)?;
    let l = entropy_term - holevo_term - leak_ec - aep - ent;
    Ok(KeyLengthReport {
        n,
        raw_bits: 4.0 * nf,
        h_mle,
        holevo_f: f,
        entropy_term,
        holevo_term,
        leak_ec,
        delta_aep: aep,
        delta_ent: ent,
        l,
        eps_total: budget.eps_total(),
        feasible: l > 0.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn entropy_examples() {
        assert_eq!(mle_entropy(&[5, 5, 5, 5]).unwrap(), 2.0);
        assert_eq!(mle_entropy(&[9, 0, 0, 0]).unwrap(), 0.0);
        let p: [f64; 4] = [3.0 / 8.0, 1.0 / 8.0, 1.0 / 8.0, 3.0 / 8.0];
        let h: f64 = p.iter().map(|q| -q * q.log2()).sum();
        assert!((mle_entropy(&[3, 1, 1, 3]).unwrap() - h).abs() < 1e-15);
        assert!(mle_entropy(&[0; 4]).is_err());
    }

    #[test]
    fn aep_tail_limit() {
        let a = delta_aep(1.0, 1e-300f64.sqrt(), 1.0).unwrap();
        let l = (2.0 / 1e-300f64).log2();
        assert!((a - (16.0 + l + 8.0 * l.sqrt()) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn aep_scaling() {
        let r = delta_aep(4e12, 1e-10, 0.9).unwrap() / delta_aep(1e12, 1e-10, 0.9).unwrap();
        assert!((r - 2.0).abs() < 1e-5);
    }

    #[test]
    fn budget_split() {
        let b = SecurityBudget::split(4e-10, 0.01).unwrap();
        assert_eq!(b.eps_pe, 1e-10);
        assert_eq!(b.eps_total(), b.eps_pe + b.eps_sm + b.eps_ent + b.eps_cor);
        assert_eq!(b.p_ec, 0.99);
        assert!(SecurityBudget::split(4.0, 0.01).is_err());
    }

    #[test]
    fn audit_identity() {
        let b = SecurityBudget::split(4e-10, 0.01).unwrap();
        let r = key_length(1000, &b, 2.0, (1.5, 1.3, 0.5), 100.0, DeltaEntMode::Derived).unwrap();
        assert_eq!(r.l, r.audit());
        assert!(!r.feasible);
        assert_eq!(r.final_length(), 0);
    }
}
