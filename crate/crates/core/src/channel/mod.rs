//! Monte Carlo protocol rounds: state preparation, a linear Gaussian
//! channel, heterodyne detection and the bookkeeping around them.
//!
//! Record conventions (shot-noise units):
//!
//! * `alice_x`, `alice_p` are the means of the prepared coherent state,
//!   `√2·Re α`, `√2·Im α`. A key round sending α·e^{iπ/4} records (α, α).
//! * Gaussian rounds draw each of `alice_x`, `alice_p` from N(0, V_A/2).
//! * Decoy rounds send the key radius with a uniformly random phase.
//! * Bob's outcome on each quadrature is `√T·alice + N(0, (2 + Tξ)/2)`,
//!   so the per-complex-symbol SNR is T·V_A/(2 + Tξ).
//!
//! Covariance estimates are reported in the entanglement-based picture: the
//! prepare-and-measure means are scaled by c = √((V_A + 2)/V_A) and one
//! vacuum unit of heterodyne noise is removed from each diagonal entry.

mod batch;
mod transform;

pub use batch::{
    quadrant_bits, read_batch_csv, simulate_rounds, write_batch_csv, BatchRecord,
    QuadratureBatch, Role,
};
pub use transform::{gaussian_vector, OrthogonalTransform};

use crate::error::{Error, Result};

/// Which half of the protocol applies a transform.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Alice,
    Bob,
}

/// Scale from recorded prepare-and-measure means to the entanglement-based
/// quadratures of Alice's kept mode.
pub fn eb_scale(va: f64) -> Result<f64> {
    if !(va > 0.0) || !va.is_finite() {
        return Err(Error::Domain(format!("modulation variance must be > 0, got {va}")));
    }
    Ok(((va + 2.0) / va).sqrt())
}

fn selected(batch: &QuadratureBatch, role: Option<Role>) -> Vec<usize> {
    (0..batch.len())
        .filter(|&i| role.map_or(true, |r| batch.roles[i] == r))
        .collect()
}

/// Applies the symmetrizing rotation to one side of the selected modes.
///
/// The selected modes form an interleaved vector (x₀, p₀, x₁, p₁, …) of
/// length `transform.dim()`. In the entanglement-based frame Alice applies
/// R and Bob applies its p-conjugate S·R·S. Alice's recorded means carry
/// the opposite p sign to her kept mode, so on the stored records both sides
/// end up applying S·R·S, and ⟨alice, bob⟩ is preserved.
pub fn apply_symmetrization(
    batch: &QuadratureBatch,
    transform: &OrthogonalTransform,
    side: Side,
    role: Option<Role>,
) -> Result<QuadratureBatch> {
    let idx = selected(batch, role);
    if transform.dim() != 2 * idx.len() {
        return Err(Error::DimensionMismatch {
            expected: transform.dim(),
            found: 2 * idx.len(),
        });
    }
    let mut out = batch.clone();
    let (xs, ps) = match side {
        Side::Alice => (&mut out.alice_x, &mut out.alice_p),
        Side::Bob => (&mut out.bob_x, &mut out.bob_p),
    };
    let mut v: Vec<f64> = idx.iter().flat_map(|&i| [xs[i], ps[i]]).collect();
    transform.apply_conjugate(&mut v)?;
    for (j, &i) in idx.iter().enumerate() {
        xs[i] = v[2 * j];
        ps[i] = v[2 * j + 1];
    }
    Ok(out)
}

/// Symmetrizes both sides with the same transform.
pub fn symmetrize(
    batch: &QuadratureBatch,
    transform: &OrthogonalTransform,
    role: Option<Role>,
) -> Result<QuadratureBatch> {
    let a = apply_symmetrization(batch, transform, Side::Alice, role)?;
    apply_symmetrization(&a, transform, Side::Bob, role)
}

/// Raw per-mode second moments of the selected records:
/// (mean(ax² + ap²), mean(bx² + bp²), mean(ax·bx + ap·bp)).
pub fn raw_second_moments(batch: &QuadratureBatch, role: Option<Role>) -> Result<(f64, f64, f64)> {
    let idx = selected(batch, role);
    if idx.is_empty() {
        return Err(Error::EmptySelection(format!("no rounds with role {role:?}")));
    }
    let (mut aa, mut bb, mut ab) = (0.0, 0.0, 0.0);
    for &i in &idx {
        let (ax, ap, bx, bp) = (batch.alice_x[i], batch.alice_p[i], batch.bob_x[i], batch.bob_p[i]);
        aa += ax * ax + ap * ap;
        bb += bx * bx + bp * bp;
        ab += ax * bx + ap * bp;
    }
    let n = idx.len() as f64;
    Ok((aa / n, bb / n, ab / n))
}

/// Sample estimates (Σ̂_a, Σ̂_b, Σ̂_c) in state-variance units.
///
/// Σ̂_a = c²·mean(ax² + ap²) − 1, Σ̂_b = mean(bx² + bp²) − 1,
/// Σ̂_c = c·mean(ax·bx + ap·bp). The last is ⟨X_A X_B⟩ − ⟨P_A P_B⟩ in the
/// entanglement-based frame, where Alice's p carries the opposite sign.
pub fn empirical_sigma(
    batch: &QuadratureBatch,
    role: Option<Role>,
    va: f64,
) -> Result<(f64, f64, f64)> {
    let c = eb_scale(va)?;
    let (aa, bb, ab) = raw_second_moments(batch, role)?;
    Ok((c * c * aa - 1.0, bb - 1.0, c * ab))
}

/// Parameter-estimation vectors for the two halves of the Gaussian rounds.
#[derive(Debug, Clone, PartialEq)]
pub struct PeSets {
    pub x1: Vec<f64>,
    pub y1: Vec<f64>,
    pub x2: Vec<f64>,
    pub y2: Vec<f64>,
}

impl PeSets {
    /// Full vectors X = X₁ ⊕ X₂ and Y = Y₁ ⊕ Y₂.
    pub fn joined(&self) -> (Vec<f64>, Vec<f64>) {
        let x = self.x1.iter().chain(&self.x2).copied().collect();
        let y = self.y1.iter().chain(&self.y2).copied().collect();
        (x, y)
    }
}

/// Splits the first 2k Gaussian-role modes by position parity: even
/// positions go to set 1, odd to set 2. Each vector has length 2k with x, p
/// interleaved. Alice's entries are scaled to the entanglement-based frame.
pub fn split_pe_sets(batch: &QuadratureBatch, k: usize, va: f64) -> Result<PeSets> {
    let c = eb_scale(va)?;
    let idx = selected(batch, Some(Role::Gaussian));
    if k == 0 || idx.len() < 2 * k {
        return Err(Error::InsufficientRounds { needed: 2 * k, available: idx.len() });
    }
    let mut sets = PeSets {
        x1: Vec::with_capacity(2 * k),
        y1: Vec::with_capacity(2 * k),
        x2: Vec::with_capacity(2 * k),
        y2: Vec::with_capacity(2 * k),
    };
    for (pos, &i) in idx[..2 * k].iter().enumerate() {
        let (x, y) = if pos % 2 == 0 {
            (&mut sets.x1, &mut sets.y1)
        } else {
            (&mut sets.x2, &mut sets.y2)
        };
        x.extend([c * batch.alice_x[i], c * batch.alice_p[i]]);
        y.extend([batch.bob_x[i], batch.bob_p[i]]);
    }
    Ok(sets)
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm2(a: &[f64]) -> f64 {
    dot(a, a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{ChannelParams, RoundCounts};

    fn small_batch() -> QuadratureBatch {
        let ch = ChannelParams::new(0.5, 0.6, 0.05).unwrap();
        simulate_rounds(&ch, 11, RoundCounts { n: 20, m: 5, k: 30 }).unwrap()
    }

    #[test]
    fn split_partitions_exactly() {
        let b = small_batch();
        let s = split_pe_sets(&b, 2, 0.5).unwrap();
        assert_eq!((s.x1.len(), s.y1.len(), s.x2.len(), s.y2.len()), (4, 4, 4, 4));
        let (x, y) = s.joined();
        assert!((norm2(&s.x1) + norm2(&s.x2) - norm2(&x)).abs() <= 1e-12 * norm2(&x));
        let whole = dot(&x, &y);
        let parts = dot(&s.x1, &s.y1) + dot(&s.x2, &s.y2);
        assert!((whole - parts).abs() <= 1e-12 * whole.abs().max(1.0));
        assert!(matches!(
            split_pe_sets(&b, 31, 0.5),
            Err(Error::InsufficientRounds { needed: 62, available: 60 })
        ));
    }

    #[test]
    fn symmetrization_preserves_norms_and_overlap() {
        let b = small_batch();
        let t = OrthogonalTransform::random(120, 4);
        let s = symmetrize(&b, &t, Some(Role::Gaussian)).unwrap();
        let before = raw_second_moments(&b, Some(Role::Gaussian)).unwrap();
        let after = raw_second_moments(&s, Some(Role::Gaussian)).unwrap();
        assert!((before.0 - after.0).abs() < 1e-9 * before.0);
        assert!((before.1 - after.1).abs() < 1e-9 * before.1);
        assert!((before.2 - after.2).abs() < 1e-9 * before.2.abs().max(1.0));
        let key_before = raw_second_moments(&b, Some(Role::Key)).unwrap();
        assert_eq!(key_before, raw_second_moments(&s, Some(Role::Key)).unwrap());

        let id = OrthogonalTransform::identity(120);
        assert_eq!(symmetrize(&b, &id, Some(Role::Gaussian)).unwrap(), b);
        let bad = OrthogonalTransform::identity(10);
        assert!(matches!(
            apply_symmetrization(&b, &bad, Side::Alice, Some(Role::Gaussian)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn empty_selection() {
        let b = QuadratureBatch::default();
        assert!(matches!(
            empirical_sigma(&b, None, 0.5),
            Err(Error::EmptySelection(_))
        ));
    }
}
