//! Random orthogonal transforms built from butterfly layers of Givens
//! rotations.
//!
//! Layer j rotates coordinate pairs (i, i + 2^j) for every i with bit j
//! clear; ⌈log₂ dim⌉ layers mix every coordinate with every other. When
//! `dim` is not a power of two, pairs whose partner would fall past the end
//! are skipped, which is the same as padding with zeros that stay zero.
//! Description size is O(dim log dim) angles, application is O(dim log dim).

use rand::RngCore;

use crate::error::{Error, Result};
use crate::rng::{self, stream, StreamRng};

#[derive(Debug, Clone, PartialEq)]
pub struct OrthogonalTransform {
    dim: usize,
    seed: u64,
    /// `layers[j][c]`: angle for the c-th pair of layer j.
    layers: Vec<Vec<f64>>,
}

fn layer_count(dim: usize) -> usize {
    if dim <= 1 {
        0
    } else {
        (usize::BITS - (dim - 1).leading_zeros()) as usize
    }
}

/// Compact index of the pair starting at `i` (bit j of i clear).
#[inline]
fn pair_slot(i: usize, j: usize) -> usize {
    ((i >> (j + 1)) << j) | (i & ((1 << j) - 1))
}

impl OrthogonalTransform {
    /// Draws uniformly random angles in [0, 2π) for every rotation.
    pub fn random(dim: usize, seed: u64) -> Self {
        let mut rng = StreamRng::new(seed, stream::TRANSFORM).sequential();
        Self::build(dim, seed, |_, _| std::f64::consts::TAU * rng::uniform(&mut rng))
    }

    pub fn identity(dim: usize) -> Self {
        Self::build(dim, 0, |_, _| 0.0)
    }

    fn build(dim: usize, seed: u64, mut angle: impl FnMut(usize, usize) -> f64) -> Self {
        let padded = dim.next_power_of_two();
        let layers = (0..layer_count(dim))
            .map(|j| (0..padded / 2).map(|c| angle(j, c)).collect())
            .collect();
        Self { dim, seed, layers }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn layer_count(&self) -> usize {
        self.layers.len()
    }

    fn check(&self, v: &[f64]) -> Result<()> {
        if v.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: v.len() });
        }
        Ok(())
    }

    fn rotate_layer(&self, v: &mut [f64], j: usize, sign: f64) {
        let stride = 1usize << j;
        let angles = &self.layers[j];
        for i in 0..self.dim {
            if i & stride != 0 || i + stride >= self.dim {
                continue;
            }
            let (s, c) = (sign * angles[pair_slot(i, j)]).sin_cos();
            let (a, b) = (v[i], v[i + stride]);
            v[i] = c * a - s * b;
            v[i + stride] = s * a + c * b;
        }
    }

    /// v ← R v.
    pub fn apply(&self, v: &mut [f64]) -> Result<()> {
        self.check(v)?;
        for j in 0..self.layers.len() {
            self.rotate_layer(v, j, 1.0);
        }
        Ok(())
    }

    /// v ← R⁻¹ v = Rᵀ v.
    pub fn apply_inverse(&self, v: &mut [f64]) -> Result<()> {
        self.check(v)?;
        for j in (0..self.layers.len()).rev() {
            self.rotate_layer(v, j, -1.0);
        }
        Ok(())
    }

    /// v ← S R S v, where S flips the sign of every p-quadrature slot
    /// (odd index in an interleaved x, p vector).
    pub fn apply_conjugate(&self, v: &mut [f64]) -> Result<()> {
        self.check(v)?;
        flip_p(v);
        self.apply(v)?;
        flip_p(v);
        Ok(())
    }

    pub fn apply_conjugate_inverse(&self, v: &mut [f64]) -> Result<()> {
        self.check(v)?;
        flip_p(v);
        self.apply_inverse(v)?;
        flip_p(v);
        Ok(())
    }
}

fn flip_p(v: &mut [f64]) {
    v.iter_mut().skip(1).step_by(2).for_each(|p| *p = -*p);
}

/// Random unit-free test helper: a reproducible Gaussian vector.
pub fn gaussian_vector(dim: usize, seed: u64) -> Vec<f64> {
    let mut rng = StreamRng::new(seed, stream::VALIDATION).sequential();
    let mut v = vec![0.0; dim];
    rng::fill_normals(&mut rng, &mut v);
    let _ = rng.next_u32();
    v
}
