use std::io::{Read, Write};

use rand::seq::SliceRandom;
use rand::RngCore;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{ChannelParams, RoundCounts};
use crate::rng::{self, stream, StreamRng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Key,
    Decoy,
    Gaussian,
}

/// Struct-of-arrays record of one protocol run; the round index is the
/// position in the arrays.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct QuadratureBatch {
    pub alice_x: Vec<f64>,
    pub alice_p: Vec<f64>,
    pub bob_x: Vec<f64>,
    pub bob_p: Vec<f64>,
    pub roles: Vec<Role>,
}

/// One CSV row.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BatchRecord {
    pub round: u64,
    pub role: Role,
    pub ax: f64,
    pub ap: f64,
    pub bx: f64,
    pub bp: f64,
}

impl QuadratureBatch {
    pub fn len(&self) -> usize {
        self.roles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.roles.is_empty()
    }

    pub fn count(&self, role: Role) -> usize {
        self.roles.iter().filter(|&&r| r == role).count()
    }

    pub fn indices(&self, role: Role) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.roles[i] == role).collect()
    }

    pub fn record(&self, i: usize) -> BatchRecord {
        BatchRecord {
            round: i as u64,
            role: self.roles[i],
            ax: self.alice_x[i],
            ap: self.alice_p[i],
            bx: self.bob_x[i],
            bp: self.bob_p[i],
        }
    }

    fn push(&mut self, r: &BatchRecord) {
        self.alice_x.push(r.ax);
        self.alice_p.push(r.ap);
        self.bob_x.push(r.bx);
        self.bob_p.push(r.bp);
        self.roles.push(r.role);
    }

    /// Checks the shared-length invariant.
    pub fn check(&self) -> Result<()> {
        let n = self.roles.len();
        for len in [self.alice_x.len(), self.alice_p.len(), self.bob_x.len(), self.bob_p.len()] {
            if len != n {
                return Err(Error::DimensionMismatch { expected: n, found: len });
            }
        }
        Ok(())
    }
}

/// Two raw-key bits from the signs of (x, p): bit 1 is x ≥ 0, bit 0 is
/// p ≥ 0. Zero counts as positive.
pub fn quadrant_bits(x: f64, p: f64) -> u8 {
    (u8::from(x >= 0.0) << 1) | u8::from(p >= 0.0)
}

/// Role of every mode: 2n key, 2m decoy, 2k Gaussian, in seeded random order.
fn assign_roles(seed: u64, counts: RoundCounts) -> Vec<Role> {
    let mut roles = Vec::with_capacity(counts.total_modes() as usize);
    roles.extend(std::iter::repeat(Role::Key).take(2 * counts.n as usize));
    roles.extend(std::iter::repeat(Role::Decoy).take(2 * counts.m as usize));
    roles.extend(std::iter::repeat(Role::Gaussian).take(2 * counts.k as usize));
    let mut rng = StreamRng::new(seed, stream::ROLES).sequential();
    roles.shuffle(&mut rng);
    roles
}

/// Generates one full batch. Every mode's randomness comes from its own
/// counter block, so the output does not depend on the rayon pool size.
pub fn simulate_rounds(
    channel: &ChannelParams,
    seed: u64,
    counts: RoundCounts,
) -> Result<QuadratureBatch> {
    channel.validate()?;
    counts.validate()?;
    let roles = assign_roles(seed, counts);
    let alpha = channel.alpha;
    let sqrt_t = channel.transmittance.sqrt();
    let noise_sd = channel.heterodyne_noise_variance().sqrt();
    let radius = std::f64::consts::SQRT_2 * alpha;
    let base = StreamRng::new(seed, stream::ROUNDS);

    let rows: Vec<[f64; 4]> = roles
        .par_iter()
        .enumerate()
        .map(|(i, role)| {
            let mut r = base.at(i as u64);
            let (ax, ap) = match role {
                Role::Key => {
                    // Symbol s ↦ α·e^{i(2s+1)π/4}; both means are ±α.
                    let s = r.next_u32() & 3;
                    let sx = if s == 0 || s == 3 { alpha } else { -alpha };
                    let sp = if s < 2 { alpha } else { -alpha };
                    (sx, sp)
                }
                Role::Decoy => {
                    let phi = std::f64::consts::TAU * rng::uniform(&mut r);
                    (radius * phi.cos(), radius * phi.sin())
                }
                Role::Gaussian => {
                    let (gx, gp) = rng::normal_pair(&mut r);
                    (alpha * gx, alpha * gp)
                }
            };
            let (nx, np) = rng::normal_pair(&mut r);
            [ax, ap, sqrt_t * ax + noise_sd * nx, sqrt_t * ap + noise_sd * np]
        })
        .collect();

    let mut batch = QuadratureBatch {
        alice_x: Vec::with_capacity(rows.len()),
        alice_p: Vec::with_capacity(rows.len()),
        bob_x: Vec::with_capacity(rows.len()),
        bob_p: Vec::with_capacity(rows.len()),
        roles,
    };
    for [ax, ap, bx, bp] in rows {
        batch.alice_x.push(ax);
        batch.alice_p.push(ap);
        batch.bob_x.push(bx);
        batch.bob_p.push(bp);
    }
    Ok(batch)
}

/// Writes `round,role,ax,ap,bx,bp` rows with a header.
pub fn write_batch_csv<W: Write>(batch: &QuadratureBatch, out: W) -> Result<()> {
    batch.check()?;
    let mut w = csv::Writer::from_writer(out);
    for i in 0..batch.len() {
        w.serialize(batch.record(i))?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a batch written by [`write_batch_csv`]. Rows must be in round order.
pub fn read_batch_csv<R: Read>(input: R) -> Result<QuadratureBatch> {
    let mut rdr = csv::Reader::from_reader(input);
    let mut batch = QuadratureBatch::default();
    for (i, row) in rdr.deserialize::<BatchRecord>().enumerate() {
        let row = row.map_err(|e| Error::Parse(e.to_string()))?;
        if row.round != i as u64 {
            return Err(Error::Parse(format!("expected round {i}, found {}", row.round)));
        }
        batch.push(&row);
    }
    Ok(batch)
}
