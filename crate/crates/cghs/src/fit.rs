//! Storage for retained precision-matrix draws.
//!
//! Draws are exactly symmetric, so only the upper triangle (diagonal
//! included) is kept, draw-major. This bounds memory at desk scale while
//! leaving every per-entry chain addressable.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::model::PrecisionDraw;

#[derive(Debug, Clone)]
pub struct PosteriorDraws {
    p: usize,
    packed: Vec<f64>,
}

impl PosteriorDraws {
    pub fn new(p: usize) -> Self {
        PosteriorDraws {
            p,
            packed: Vec::new(),
        }
    }

    pub fn with_capacity(p: usize, draws: usize) -> Self {
        PosteriorDraws {
            p,
            packed: Vec::with_capacity(draws * tri_len(p)),
        }
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn len(&self) -> usize {
        if self.p == 0 {
            0
        } else {
            self.packed.len() / tri_len(self.p)
        }
    }

    pub fn is_empty(&self) -> bool {
        self.packed.is_empty()
    }

    pub fn push(&mut self, draw: &PrecisionDraw) {
        debug_assert_eq!(draw.p(), self.p);
        for i in 0..self.p {
            for j in i..self.p {
                self.packed.push(draw.omega[(i, j)]);
            }
        }
    }

    /// Value of entry `(i, j)` in retained draw `t`.
    pub fn entry(&self, t: usize, i: usize, j: usize) -> f64 {
        self.packed[t * tri_len(self.p) + tri_index(self.p, i, j)]
    }

    /// The retained chain of a single (symmetric) entry.
    pub fn entry_chain(&self, i: usize, j: usize) -> Vec<f64> {
        let tri = tri_len(self.p);
        let off = tri_index(self.p, i, j);
        (0..self.len()).map(|t| self.packed[t * tri + off]).collect()
    }

    /// Materializes retained draw `t` as a full symmetric matrix.
    pub fn matrix(&self, t: usize) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.p, self.p);
        for i in 0..self.p {
            for j in i..self.p {
                let v = self.entry(t, i, j);
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        m
    }

    pub fn require_nonempty(&self) -> Result<()> {
        if self.is_empty() {
            return Err(Error::InvalidInput("no retained draws".into()));
        }
        Ok(())
    }
}

#[inline]
fn tri_len(p: usize) -> usize {
    p * (p + 1) / 2
}

/// Packed offset of `(i, j)` with `i <= j` in an upper-triangle layout.
#[inline]
fn tri_index(p: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    i * (2 * p - i + 1) / 2 + (j - i)
}
