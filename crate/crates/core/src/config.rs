//! Run configuration: one flat JSON object.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::definetti::EnergyTestConfig;
use crate::error::{Error, Result};
use crate::finite_key::{DeltaEntMode, SecurityBudget};
use crate::params::{ChannelParams, ProtocolParams, RoundCounts};
use crate::pe::{Deltas, LogBase};

fn default_eps_total() -> f64 {
    4e-10
}
fn default_eps_rob() -> f64 {
    1e-2
}
fn default_k_test() -> u64 {
    1000
}
fn default_k_rep() -> u32 {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub alpha: f64,
    pub transmittance: f64,
    pub excess_noise: f64,
    pub beta: f64,
    pub n: u64,
    pub m: u64,
    pub k: u64,

    #[serde(default = "default_eps_total")]
    pub eps_total: f64,
    #[serde(default)]
    pub eps_pe: Option<f64>,
    #[serde(default)]
    pub eps_sm: Option<f64>,
    #[serde(default)]
    pub eps_ent: Option<f64>,
    #[serde(default)]
    pub eps_cor: Option<f64>,
    #[serde(default = "default_eps_rob")]
    pub eps_rob: f64,
    #[serde(default)]
    pub p_ec: Option<f64>,

    #[serde(default)]
    pub delta_a: Option<f64>,
    #[serde(default)]
    pub delta_b: Option<f64>,
    #[serde(default)]
    pub delta_c: Option<f64>,

    #[serde(default = "default_k_test")]
    pub k_test: u64,
    #[serde(default)]
    pub d_a: Option<f64>,
    #[serde(default)]
    pub d_b: Option<f64>,
    #[serde(default)]
    pub eta: Option<f64>,
    #[serde(default)]
    pub eps_test: Option<f64>,

    #[serde(default = "default_k_rep")]
    pub k_rep: u32,
    /// Excess noise actually applied by `simulate`; defaults to `excess_noise`.
    #[serde(default)]
    pub sim_excess_noise: Option<f64>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub log_base: LogBase,
    #[serde(default)]
    pub delta_ent_mode: DeltaEntMode,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn channel(&self) -> Result<ChannelParams> {
        ChannelParams::new(self.alpha, self.transmittance, self.excess_noise)
    }

    pub fn sim_channel(&self) -> Result<ChannelParams> {
        ChannelParams::new(
            self.alpha,
            self.transmittance,
            self.sim_excess_noise.unwrap_or(self.excess_noise),
        )
    }

    pub fn counts(&self) -> RoundCounts {
        RoundCounts { n: self.n, m: self.m, k: self.k }
    }

    pub fn protocol(&self) -> Result<ProtocolParams> {
        let p = ProtocolParams { channel: self.channel()?, counts: self.counts(), beta: self.beta };
        p.validate()?;
        Ok(p)
    }

    pub fn budget(&self) -> Result<SecurityBudget> {
        let e = self.eps_total / 4.0;
        let b = SecurityBudget {
            eps_pe: self.eps_pe.unwrap_or(e),
            eps_sm: self.eps_sm.unwrap_or(e),
            eps_ent: self.eps_ent.unwrap_or(e),
            eps_cor: self.eps_cor.unwrap_or(e),
            p_ec: self.p_ec.unwrap_or(1.0 - self.eps_rob),
            eps_rob: self.eps_rob,
        };
        b.validate()?;
        Ok(b)
    }

    /// Explicit margins if all three are set.
    pub fn delta_override(&self) -> Option<Deltas> {
        Some(Deltas { delta_a: self.delta_a?, delta_b: self.delta_b?, delta_c: self.delta_c? })
    }

    /// Thresholds default to three times the expected per-mode energy:
    /// α² for Alice and T(V_A + ξ)/2 for Bob.
    pub fn energy_test(&self) -> Result<EnergyTestConfig> {
        let ch = self.channel()?;
        let cfg = EnergyTestConfig {
            k_test: usize::try_from(self.k_test).map_err(|_| Error::Config("k_test too large".into()))?,
            d_a: self.d_a.unwrap_or(3.0 * ch.alpha * ch.alpha),
            d_b: self.d_b.unwrap_or(
                3.0 * ch.transmittance * (ch.modulation_variance() + ch.excess_noise) / 2.0,
            ),
            eps_test: self.eps_test.unwrap_or(self.eps_total / 4.0),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Rejects out-of-domain values before any computation.
    pub fn validate(&self) -> Result<()> {
        let wrap = |e: Error| match e {
            Error::Config(m) => Error::Config(m),
            other => Error::Config(other.to_string()),
        };
        self.protocol().map_err(wrap)?;
        self.budget().map_err(wrap)?;
        self.energy_test().map_err(wrap)?;
        if self.k_rep == 0 {
            return Err(Error::Config("k_rep must be ≥ 1".into()));
        }
        if let Some(xi) = self.sim_excess_noise {
            if !(xi >= 0.0) {
                return Err(Error::Config(format!("sim_excess_noise must be ≥ 0, got {xi}")));
            }
        }
        if let Some(eta) = self.eta {
            if !(0.0..1.0).contains(&eta) {
                return Err(Error::Config(format!("eta must lie in [0, 1), got {eta}")));
            }
        }
        for (name, d) in [("delta_a", self.delta_a), ("delta_b", self.delta_b), ("delta_c", self.delta_c)] {
            if let Some(d) = d {
                if !(d >= 0.0) {
                    return Err(Error::Config(format!("{name} must be ≥ 0, got {d}")));
                }
            }
        }
        Ok(())
    }

    /// Names of the numeric fields accepted by [`RunConfig::set_field`].
    pub fn numeric_fields() -> Vec<&'static str> {
        vec![
            "alpha", "transmittance", "excess_noise", "beta", "n", "m", "k", "eps_total",
            "eps_pe", "eps_sm", "eps_ent", "eps_cor", "eps_rob", "p_ec", "delta_a", "delta_b",
            "delta_c", "k_test", "d_a", "d_b", "eta", "eps_test", "k_rep", "sim_excess_noise",
            "seed",
        ]
    }

    /// Returns a copy with one numeric field replaced and revalidated.
    pub fn with_field(&self, name: &str, value: f64) -> Result<Self> {
        if !Self::numeric_fields().contains(&name) {
            return Err(Error::UnknownAxis(name.to_string()));
        }
        let mut map: Map<String, Value> = match serde_json::to_value(self)? {
            Value::Object(m) => m,
            _ => unreachable!("config serializes to an object"),
        };
        let v = if value.fract() == 0.0 && value >= 0.0 && value < 2f64.powi(63) {
            Value::from(value as u64)
        } else {
            serde_json::Number::from_f64(value)
                .map(Value::Number)
                .ok_or_else(|| Error::Config(format!("{name} = {value} is not finite")))?
        };
        map.insert(name.to_string(), v);
        let cfg: Self = serde_json::from_value(Value::Object(map))
            .map_err(|e| Error::Config(format!("{name} = {value}: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }
}
