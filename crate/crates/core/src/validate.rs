//! Monte Carlo checks of the concentration bounds used in parameter
//! estimation. Each row counts how often a bound's bad event occurs and
//! compares the frequency with the claimed failure probability.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::channel::{dot, norm2};
use crate::error::{Error, Result};
use crate::params::ChannelParams;
use crate::pe::{
    chi2_tail_thresholds, cross_half_bounds, gamma_estimates, inner_product_bounds,
    projection_bounds, LogBase, PeStatistics,
};
use crate::report::fmt_f64;
use crate::rng::fill_normals;

#[derive(Debug, Clone, PartialEq)]
pub struct BoundCheck {
    pub lemma: String,
    pub k: u64,
    /// "x" or "eps".
    pub parameter: &'static str,
    pub value: f64,
    pub claimed: f64,
    pub violations: u64,
    pub trials: u64,
}

impl BoundCheck {
    pub fn observed(&self) -> f64 {
        self.violations as f64 / self.trials as f64
    }

    /// claimed + 3 binomial standard errors.
    pub fn allowance(&self) -> f64 {
        let p = self.claimed.min(1.0);
        p + 3.0 * (p * (1.0 - p) / self.trials as f64).sqrt()
    }

    pub fn pass(&self) -> bool {
        self.observed() <= self.allowance()
    }

    pub fn verdict(&self) -> &'static str {
        if self.pass() {
            "pass"
        } else {
            "fail"
        }
    }
}

pub const CHECK_COLUMNS: [&str; 8] =
    ["lemma", "k", "parameter", "value", "claimed", "observed", "trials", "verdict"];

pub fn check_fields(c: &BoundCheck) -> Vec<String> {
    vec![
        c.lemma.clone(),
        c.k.to_string(),
        c.parameter.to_string(),
        fmt_f64(c.value),
        fmt_f64(c.claimed),
        fmt_f64(c.observed()),
        c.trials.to_string(),
        c.verdict().to_string(),
    ]
}

/// Counts trials for which `bad` returns true. Trial `t` of row `row` draws
/// from its own ChaCha stream, so counts do not depend on the thread count.
fn count<F>(seed: u64, row: u64, trials: u64, bad: F) -> u64
where
    F: Fn(&mut ChaCha8Rng) -> bool + Sync,
{
    (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream((row << 40) | t);
            u64::from(bad(&mut rng))
        })
        .sum()
}

fn chi2(rng: &mut ChaCha8Rng, buf: &mut [f64]) -> f64 {
    fill_normals(rng, buf);
    norm2(buf)
}

/// Random 2-frame (u, v) of R^dim, Haar distributed.
fn haar_frame(rng: &mut ChaCha8Rng, dim: usize) -> (Vec<f64>, Vec<f64>) {
    let mut u = vec![0.0; dim];
    let mut v = vec![0.0; dim];
    fill_normals(rng, &mut u);
    fill_normals(rng, &mut v);
    let nu = norm2(&u).sqrt();
    u.iter_mut().for_each(|e| *e /= nu);
    let p = dot(&u, &v);
    v.iter_mut().zip(&u).for_each(|(e, ue)| *e -= p * ue);
    let nv = norm2(&v).sqrt();
    v.iter_mut().for_each(|e| *e /= nv);
    (u, v)
}

fn lemma1(seed: u64, trials: u64) -> Result<Vec<BoundCheck>> {
    let k = 100usize;
    let mut rows = Vec::new();
    for (i, x) in [1.0, 2.0, 4.0].into_iter().enumerate() {
        let (up, low) = chi2_tail_thresholds(k as f64, x)?;
        for (j, upper) in [true, false].into_iter().enumerate() {
            let row = 10 + 2 * i as u64 + j as u64;
            let violations = count(seed, row, trials, |rng| {
                let mut buf = vec![0.0; k];
                let u = chi2(rng, &mut buf) - k as f64;
                if upper {
                    u >= up
                } else {
                    -u >= low
                }
            });
            rows.push(BoundCheck {
                lemma: format!("chi2-{}", if upper { "upper" } else { "lower" }),
                k: k as u64,
                parameter: "x",
                value: x,
                claimed: (-x).exp(),
                violations,
                trials,
            });
        }
    }
    Ok(rows)
}

/// Projection of a rotation-symmetric X ∈ R^{4k} onto a random half:
/// ‖X₁‖²/‖X‖² is distributed as U₁/(U₁ + U₂) with U₁, U₂ ~ χ²(2k)
/// in real dimensions, i.e. χ²(k) per half in complex ones.
fn lemma2(seed: u64, trials: u64) -> Result<Vec<BoundCheck>> {
    let k = 100usize;
    let eps = 0.05;
    // ‖X‖² is scale-free here; evaluate the bounds at ‖X‖² = 1.
    let (lo, hi) = projection_bounds(1.0, k as f64, eps)?;
    let mut rows = Vec::new();
    for (j, (name, claimed)) in
        [("projection-upper", eps), ("projection-lower", eps), ("projection-interval", 2.0 * eps)]
            .into_iter()
            .enumerate()
    {
        let violations = count(seed, 20 + j as u64, trials, |rng| {
            let mut buf = vec![0.0; 2 * k];
            let u1 = chi2(rng, &mut buf);
            let u2 = chi2(rng, &mut buf);
            let r = u1 / (u1 + u2);
            match j {
                0 => r >= hi,
                1 => r <= lo,
                _ => r >= hi || r <= lo,
            }
        });
        rows.push(BoundCheck {
            lemma: name.into(),
            k: k as u64,
            parameter: "eps",
            value: eps,
            claimed,
            violations,
            trials,
        });
    }
    Ok(rows)
}

/// Fixed X, Y ∈ R^{4k} with ‖X‖² = ‖Y‖² = 4k and correlation ρ, projected
/// on a Haar-random subspace of dimension 2k.
fn lemma3(seed: u64, trials: u64) -> Result<Vec<BoundCheck>> {
    let k = 200usize;
    let dim = 4 * k;
    let rho: f64 = 0.8;
    let n2 = dim as f64;
    let (ax, ay, by) = (n2.sqrt(), rho * n2.sqrt(), (1.0 - rho * rho).sqrt() * n2.sqrt());
    let ip = rho * n2;
    let half_ip = move |u: &[f64], v: &[f64]| {
        let h = dim / 2;
        let uu: f64 = u[..h].iter().map(|e| e * e).sum();
        let uv: f64 = u[..h].iter().zip(&v[..h]).map(|(a, b)| a * b).sum();
        // X = ax·u, Y = ay·u + by·v.
        ax * (ay * uu + by * uv)
    };
    let mut rows = Vec::new();
    for (j, x) in [(0u64, 2.0), (1, 4.0)] {
        let b = inner_product_bounds(n2, n2, ip, k as f64, x)?;
        let one_sided = j == 0;
        let violations = count(seed, 30 + j, trials, |rng| {
            let (u, v) = haar_frame(rng, dim);
            let h = half_ip(&u, &v);
            if one_sided {
                h <= b.one_sided_lower
            } else {
                h < b.lower || h > b.upper
            }
        });
        rows.push(BoundCheck {
            lemma: if one_sided { "inner-product-one-sided" } else { "inner-product-two-sided" }.into(),
            k: k as u64,
            parameter: "x",
            value: x,
            claimed: if one_sided { 4.0 } else { 8.0 } * (-x).exp(),
            violations,
            trials,
        });
    }
    Ok(rows)
}

/// Rotation-symmetric Gaussian data: 4k entry pairs with unit variances and
/// correlation ρ, halves of 2k entries each.
fn lemma4(seed: u64, trials: u64) -> Result<Vec<BoundCheck>> {
    let k = 500usize;
    let eps = 0.05;
    let rho: f64 = 0.8;
    let mut rows = Vec::new();
    let names = [("cross-half-upper", eps), ("cross-half-lower", eps), ("cross-half-inner-product", 4.0 * eps)];
    for (j, (name, claimed)) in names.into_iter().enumerate() {
        let violations = count(seed, 40 + j as u64, trials, |rng| {
            let h = 2 * k;
            let mut g = vec![0.0; 8 * k];
            fill_normals(rng, &mut g);
            let (gx, gy) = g.split_at(4 * k);
            let s = (1.0 - rho * rho).sqrt();
            let y: Vec<f64> = gx.iter().zip(gy).map(|(a, b)| rho * a + s * b).collect();
            let (x1, x2) = gx.split_at(h);
            let (y1, y2) = y.split_at(h);
            let b = cross_half_bounds(norm2(x1), norm2(y1), dot(x1, y1), k as f64, eps, LogBase::Natural)
                .expect("validity range checked at k = 500");
            match j {
                0 => norm2(x2) >= b.upper_other,
                1 => norm2(x2) <= b.lower_other,
                _ => dot(x2, y2) <= b.ip_lower,
            }
        });
        rows.push(BoundCheck {
            lemma: name.into(),
            k: k as u64,
            parameter: "eps",
            value: eps,
            claimed,
            violations,
            trials,
        });
    }
    Ok(rows)
}

/// The final estimates bound the true covariance entries: a violation is
/// γ_a < Σ_a, γ_b < Σ_b or γ_c > Σ_c for data drawn with known Σ.
fn pe_theorem(seed: u64, trials: u64) -> Result<BoundCheck> {
    let k = 1000usize;
    let eps = 0.05;
    let ch = ChannelParams::new(0.5, 0.6, 0.05)?;
    let (v, y) = (ch.alice_variance(), ch.bob_variance());
    let z = ch.four_state_correlation()?;
    // Per real entry: Var X = (V+1)/2, Var Y = (y+1)/2, Cov = z/2.
    let sx = ((v + 1.0) / 2.0).sqrt();
    let sy = ((y + 1.0) / 2.0).sqrt();
    let rho = (z / 2.0) / (sx * sy);
    let s = (1.0 - rho * rho).sqrt();
    gamma_estimates(
        &PeStatistics { norm_x2: 4.0 * k as f64, norm_y2: 4.0 * k as f64, ip_xy: 0.0, k: k as f64 },
        eps,
        LogBase::Natural,
    )?;
    let violations = count(seed, 50, trials, |rng| {
        let mut g = vec![0.0; 8 * k];
        fill_normals(rng, &mut g);
        let (gx, gy) = g.split_at(4 * k);
        let x: Vec<f64> = gx.iter().map(|a| sx * a).collect();
        let yv: Vec<f64> = gx.iter().zip(gy).map(|(a, b)| sy * (rho * a + s * b)).collect();
        let stats = PeStatistics { norm_x2: norm2(&x), norm_y2: norm2(&yv), ip_xy: dot(&x, &yv), k: k as f64 };
        let g = gamma_estimates(&stats, eps, LogBase::Natural).expect("regime checked");
        g.gamma_a < v || g.gamma_b < y || g.gamma_c > z
    });
    Ok(BoundCheck {
        lemma: "pe-theorem".into(),
        k: k as u64,
        parameter: "eps",
        value: eps,
        claimed: eps,
        violations,
        trials,
    })
}

/// All bound checks. The end-to-end theorem row is capped at 10⁴ trials.
pub fn validate_bounds(seed: u64, trials: u64) -> Result<Vec<BoundCheck>> {
    if trials == 0 {
        return Err(Error::Config("trials must be ≥ 1".into()));
    }
    let mut rows = lemma1(seed, trials)?;
    rows.extend(lemma2(seed, trials)?);
    rows.extend(lemma3(seed, trials)?);
    rows.extend(lemma4(seed, trials)?);
    rows.push(pe_theorem(seed, trials.min(10_000))?);
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn allowance_and_verdict() {
        let c = BoundCheck {
            lemma: "t".into(),
            k: 1,
            parameter: "x",
            value: 1.0,
            claimed: 0.01,
            violations: 12,
            trials: 1000,
        };
        assert!((c.allowance() - (0.01 + 3.0 * (0.0099f64 / 1000.0).sqrt())).abs() < 1e-15);
        assert!(c.pass());
        assert!(!BoundCheck { violations: 25, ..c }.pass());
    }

    #[test]
    fn haar_frame_is_orthonormal() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (u, v) = haar_frame(&mut rng, 64);
        assert!((norm2(&u) - 1.0).abs() < 1e-12);
        assert!((norm2(&v) - 1.0).abs() < 1e-12);
        assert!(dot(&u, &v).abs() < 1e-12);
    }

    #[test]
    fn counts_are_thread_independent() {
        let f = |r: &mut ChaCha8Rng| crate::rng::uniform(r) < 0.3;
        let a = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap().install(|| count(3, 1, 500, f));
        let b = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap().install(|| count(3, 1, 500, f));
        assert_eq!(a, b);
    }
}
