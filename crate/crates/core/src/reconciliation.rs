//! Error-correction accounting: AWGN capacities, leakage, the repetition
//! side-information scheme and hash verification.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::hash::toeplitz_hash;

/// Absolute tolerance of the binary-input capacity quadrature.
pub const QUADRATURE_TOLERANCE: f64 = 1e-10;

/// s = T·V_A/(2 + Tξ).
pub fn snr(va: f64, t: f64, xi: f64) -> Result<f64> {
    if !(va > 0.0) || !va.is_finite() {
        return Err(domain(format!("V_A must be > 0, got {va}")));
    }
    if !(t > 0.0 && t <= 1.0) {
        return Err(domain(format!("transmittance must lie in (0, 1], got {t}")));
    }
    if !(xi >= 0.0) || !xi.is_finite() {
        return Err(domain(format!("excess noise must be ≥ 0, got {xi}")));
    }
    Ok(t * va / (2.0 + t * xi))
}

fn check_snr(s: f64) -> Result<()> {
    if !(s > 0.0) || !s.is_finite() {
        return Err(domain(format!("SNR must be > 0, got {s}")));
    }
    Ok(())
}

/// ½·log₂(1 + s).
pub fn capacity_gauss(s: f64) -> Result<f64> {
    check_snr(s)?;
    Ok(0.5 * s.ln_1p() / std::f64::consts::LN_2)
}

/// −φ_s(x)·log₂φ_s(x) for the BPSK output density
/// φ_s(x) = √(s/8π)(e^{−s(x+1)²/2} + e^{−s(x−1)²/2}).
#[cfg(test)]
fn neg_phi_log_phi(s: f64, x: f64) -> f64 {
    let u = -0.5 * s * (x + 1.0).powi(2);
    let v = -0.5 * s * (x - 1.0).powi(2);
    let m = u.max(v);
    let ln_phi = 0.5 * (s / (8.0 * std::f64::consts::PI)).ln() + m + ((u - m).exp() + (v - m).exp()).ln();
    let phi = ln_phi.exp();
    if phi == 0.0 {
        0.0
    } else {
        -phi * ln_phi / std::f64::consts::LN_2
    }
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

fn adaptive(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let diff = left + right - whole;
    if depth == 0 || diff.abs() <= 15.0 * tol {
        return left + right + diff / 15.0;
    }
    adaptive(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + adaptive(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Adaptive Simpson quadrature on [a, b], started from `pieces` equal panels.
fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, pieces: usize, tol: f64) -> f64 {
    let h = (b - a) / pieces as f64;
    (0..pieces)
        .map(|i| {
            let (lo, hi) = (a + i as f64 * h, a + (i + 1) as f64 * h);
            let (flo, fmid, fhi) = (f(lo), f(0.5 * (lo + hi)), f(hi));
            let whole = simpson(lo, hi, flo, fmid, fhi);
            adaptive(f, lo, hi, flo, fmid, fhi, whole, tol / pieces as f64, 40)
        })
        .sum()
}

/// 1 − C_BIAWGN(s) = E[log₂(1 + e^{−2sY})] with Y ~ N(1, 1/s).
///
/// Positive for every s, but below f64 resolution next to 1 once s is
/// above about 70, so strictness checks should use this directly.
pub fn biawgn_deficit(s: f64) -> Result<f64> {
    check_snr(s)?;
    let sd = 1.0 / s.sqrt();
    // Mass beyond 40 standard deviations is below e^{−800}.
    let (lo, hi) = (1.0 - 40.0 * sd, 1.0 + 40.0 * sd);
    let norm = (s / (2.0 * std::f64::consts::PI)).sqrt();
    let f = |y: f64| {
        let t = -2.0 * s * y;
        let softplus = if t > 30.0 { t + (-t).exp().ln_1p() } else { t.exp().ln_1p() };
        norm * (-0.5 * s * (y - 1.0).powi(2)).exp() * softplus / std::f64::consts::LN_2
    };
    // Relative tolerance: the deficit itself can be far below 1e-10.
    let scale = integrate(&f, lo, hi, 64, 1e-3).abs().max(f64::MIN_POSITIVE);
    Ok(integrate(&f, lo, hi, 64, QUADRATURE_TOLERANCE.min(1e-8 * scale)))
}

/// Binary-input AWGN capacity, h(φ_s) − ½log₂(2πe/s), evaluated as
/// 1 − [`biawgn_deficit`].
pub fn capacity_biawgn(s: f64) -> Result<f64> {
    Ok((1.0 - biawgn_deficit(s)?).clamp(0.0, 1.0))
}

/// The same capacity from the output differential entropy, kept as a
/// cross-check of the quadrature.
#[cfg(test)]
fn capacity_biawgn_entropy_form(s: f64) -> Result<f64> {
    check_snr(s)?;
    // φ_s is even; mass beyond 1 + 40/√s is below e^{−800}.
    let upper = 1.0 + 40.0 / s.sqrt();
    let pieces = (upper * s.sqrt()).ceil().clamp(16.0, 4096.0) as usize;
    let f = |x: f64| neg_phi_log_phi(s, x);
    let h = 2.0 * integrate(&f, 0.0, upper, pieces, 0.5 * QUADRATURE_TOLERANCE);
    let noise = 0.5 * (2.0 * std::f64::consts::PI * std::f64::consts::E / s).log2();
    Ok(h - noise)
}

/// (C_Gauss, C_BIAWGN).
pub fn capacities(s: f64) -> Result<(f64, f64)> {
    Ok((capacity_gauss(s)?, capacity_biawgn(s)?))
}

/// C_BIAWGN/C_Gauss, so that β_mod·(R/C_BIAWGN) = R/C_Gauss.
pub fn beta_modulation(s: f64) -> Result<f64> {
    let (g, b) = capacities(s)?;
    Ok(b / g)
}

/// ⌈log₂(1/ε_cor)⌉.
pub fn hash_bits(eps_cor: f64) -> Result<u32> {
    if !(eps_cor > 0.0 && eps_cor <= 1.0) {
        return Err(domain(format!("eps_cor must lie in (0, 1], got {eps_cor}")));
    }
    Ok((1.0 / eps_cor).log2().ceil().max(0.0) as u32)
}

fn check_beta(beta: f64) -> Result<()> {
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(domain(format!("beta must lie in (0, 1], got {beta}")));
    }
    Ok(())
}

/// Leaked bits for `n_pairs` key modes, one binary symbol per quadrature
/// corrected at rate β·C_BIAWGN(s), plus the verification hash.
pub fn leak_model(n_pairs: f64, beta: f64, s: f64, eps_cor: f64) -> Result<f64> {
    check_beta(beta)?;
    if !(n_pairs >= 0.0) {
        return Err(domain(format!("n_pairs must be ≥ 0, got {n_pairs}")));
    }
    let c = capacity_biawgn(s)?;
    Ok(2.0 * n_pairs * (1.0 - beta * c) + hash_bits(eps_cor)? as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReconciliationPlan {
    pub snr: f64,
    /// Secret-carrying bits per raw binary symbol.
    pub rate: f64,
    pub beta: f64,
    pub k_rep: u32,
    pub leak_total: f64,
}

/// Leak for `n_symbols` binary symbols with repetition length `k_rep`: the
/// sign products disclose (k − 1) bits per block and the block bits are
/// corrected at the boosted SNR k·s.
pub fn plan(n_symbols: u64, beta: f64, s: f64, k_rep: u32, eps_cor: f64) -> Result<ReconciliationPlan> {
    check_beta(beta)?;
    if k_rep == 0 {
        return Err(domain("k_rep must be ≥ 1"));
    }
    let k = k_rep as f64;
    let n = n_symbols as f64;
    let c = capacity_biawgn(k * s)?;
    let leak = n * (k - 1.0) / k + (n / k) * (1.0 - beta * c) + hash_bits(eps_cor)? as f64;
    Ok(ReconciliationPlan { snr: s, rate: beta * c / k, beta, k_rep, leak_total: leak })
}

/// Bob's side of the repetition scheme.
#[derive(Debug, Clone, PartialEq)]
pub struct RepetitionOutput {
    /// Y_i = sign(first value of block i), ±1.
    pub y_hard: Vec<i8>,
    /// |y_j| for every input value.
    pub magnitudes: Vec<f64>,
    /// Per block (1, s₂, …, s_k) with s_j = sign(y₁)·sign(y_j).
    pub sign_products: Vec<Vec<i8>>,
    /// Binary side information actually disclosed, (k − 1) bits per block.
    pub disclosed_bits: u64,
}

fn sign(v: f64) -> i8 {
    if v >= 0.0 {
        1
    } else {
        -1
    }
}

pub fn repetition_reconcile(y: &[f64], k_rep: usize) -> Result<RepetitionOutput> {
    if k_rep == 0 || y.len() % k_rep != 0 {
        return Err(Error::Length(format!(
            "input length {} is not a multiple of k_rep = {k_rep}",
            y.len()
        )));
    }
    let blocks = y.len() / k_rep;
    let mut y_hard = Vec::with_capacity(blocks);
    let mut sign_products = Vec::with_capacity(blocks);
    for block in y.chunks_exact(k_rep) {
        let lead = sign(block[0]);
        y_hard.push(lead);
        sign_products.push(block.iter().map(|&v| lead * sign(v)).collect());
    }
    Ok(RepetitionOutput {
        y_hard,
        magnitudes: y.iter().map(|v| v.abs()).collect(),
        sign_products,
        disclosed_bits: ((k_rep - 1) * blocks) as u64,
    })
}

/// Alice's estimate Ŷ_i = sign(Σ_j x_j·s_j·|y_j|).
pub fn repetition_decode(x: &[f64], side: &RepetitionOutput) -> Result<Vec<i8>> {
    if x.len() != side.magnitudes.len() {
        return Err(Error::Length(format!(
            "Alice holds {} values, side information covers {}",
            x.len(),
            side.magnitudes.len()
        )));
    }
    let k = if side.sign_products.is_empty() { 1 } else { side.sign_products[0].len() };
    Ok(side
        .sign_products
        .iter()
        .enumerate()
        .map(|(i, signs)| {
            let acc: f64 = signs
                .iter()
                .enumerate()
                .map(|(j, &s)| x[i * k + j] * s as f64 * side.magnitudes[i * k + j])
                .sum();
            sign(acc)
        })
        .collect())
}

/// Compares ⌈log₂(1/ε_cor)⌉-bit Toeplitz hashes of both strings. Strings
/// shorter than the hash are compared directly.
pub fn verify_hash(a: &[bool], b: &[bool], eps_cor: f64, seed: u64) -> Result<bool> {
    if a.len() != b.len() {
        return Err(Error::Length(format!("strings differ in length: {} vs {}", a.len(), b.len())));
    }
    let h = hash_bits(eps_cor)? as usize;
    if h >= a.len() {
        return Ok(a == b);
    }
    Ok(toeplitz_hash(a, seed, h)? == toeplitz_hash(b, seed, h)?)
}
