//! Finite truncations of ℓ_q, 1 < q ≤ 2: vectors, norms, norming functionals
//! and the modulus of smoothness.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Residual norms at or below this are treated as exact convergence.
pub const ZERO_RESIDUAL: f64 = 1e-13;

/// A finite real coefficient vector in the ambient truncation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SeqVector(Vec<f64>);

impl SeqVector {
    /// Wraps `coords`, rejecting NaN and infinite entries.
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if let Some(i) = coords.iter().position(|c| !c.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(Self(coords))
    }

    pub fn zeros(dim: usize) -> Self {
        Self(vec![0.0; dim])
    }

    /// Canonical basis vector with a one at zero-based position `k`.
    pub fn basis(dim: usize, k: usize) -> Self {
        let mut v = Self::zeros(dim);
        v.0[k] = 1.0;
        v
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn dot(&self, other: &SeqVector) -> f64 {
        dot(&self.0, &other.0)
    }

    pub fn scaled(&self, c: f64) -> SeqVector {
        SeqVector(self.0.iter().map(|x| c * x).collect())
    }

    /// `self += c * other`
    pub fn add_scaled(&mut self, c: f64, other: &SeqVector) {
        debug_assert_eq!(self.dim(), other.dim());
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a += c * b;
        }
    }

    pub fn sub(&self, other: &SeqVector) -> SeqVector {
        debug_assert_eq!(self.dim(), other.dim());
        SeqVector(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn add(&self, other: &SeqVector) -> SeqVector {
        debug_assert_eq!(self.dim(), other.dim());
        SeqVector(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&x| x == 0.0)
    }
}

impl std::ops::Index<usize> for SeqVector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// ℓ_q norm of a slice, scaled by the largest entry to avoid under/overflow.
pub(crate) fn lq_norm(v: &[f64], q: f64) -> f64 {
    let max = v.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    if max == 0.0 {
        return 0.0;
    }
    if q == 2.0 {
        let s: f64 = v.iter().map(|x| (x / max) * (x / max)).sum();
        return max * s.sqrt();
    }
    let s: f64 = v.iter().map(|x| (x.abs() / max).powf(q)).sum();
    max * s.powf(1.0 / q)
}

/// Geometry of the ambient space: exponent, dual exponent and the power-type
/// smoothness constant `gamma` in `rho(u) <= gamma * u^q`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LqSpace {
    q: f64,
    p: f64,
    gamma: f64,
    dim: usize,
}

impl LqSpace {
    /// Space with the default smoothness constant `gamma = 1/q`.
    pub fn new(q: f64, dim: usize) -> Result<Self> {
        if !(q > 1.0 && q <= 2.0) {
            return Err(invalid("q", format!("{q} is outside (1, 2]")));
        }
        if dim == 0 {
            return Err(invalid("dim", "ambient dimension must be positive"));
        }
        Ok(Self {
            q,
            p: q / (q - 1.0),
            gamma: 1.0 / q,
            dim,
        })
    }

    pub fn hilbert(dim: usize) -> Result<Self> {
        Self::new(2.0, dim)
    }

    /// Overrides the smoothness constant. Any valid modulus has
    /// `rho(2) >= 1`, so `gamma * 2^q < 1` is rejected.
    pub fn with_gamma(mut self, gamma: f64) -> Result<Self> {
        if !(gamma.is_finite() && gamma > 0.0) {
            return Err(invalid("gamma", format!("{gamma} is not a positive real")));
        }
        if gamma * 2f64.powf(self.q) < 1.0 {
            return Err(invalid(
                "gamma",
                format!("gamma * 2^q = {} < 1", gamma * 2f64.powf(self.q)),
            ));
        }
        self.gamma = gamma;
        Ok(self)
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_hilbert(&self) -> bool {
        self.q == 2.0
    }

    pub(crate) fn check_dim(&self, v: &SeqVector) -> Result<()> {
        if v.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: v.dim(),
            });
        }
        Ok(())
    }

    /// `(sum |v_i|^q)^(1/q)`
    pub fn norm(&self, v: &SeqVector) -> Result<f64> {
        self.check_dim(v)?;
        Ok(lq_norm(v.as_slice(), self.q))
    }

    /// The unique norming functional of `f`:
    /// `w_i = sign(f_i) |f_i|^(q-1) / ||f||^(q-1)`.
    pub fn norming_functional(&self, f: &SeqVector) -> Result<DualFunctional> {
        let norm = self.norm(f)?;
        if norm == 0.0 {
            return Err(Error::ZeroVector);
        }
        Ok(DualFunctional {
            weights: norming_weights(f.as_slice(), norm, self.q),
        })
    }

    /// Empirical lower estimate of the modulus of smoothness at `u`, taken as
    /// the maximum over `samples` random unit pairs. Deterministic in `seed`.
    pub fn estimate_modulus(&self, u: f64, samples: usize, seed: u64) -> Result<f64> {
        if !(u.is_finite() && u > 0.0) {
            return Err(invalid("u", format!("{u} is not a positive real")));
        }
        if samples == 0 {
            return Err(invalid("samples", "at least one sample is required"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut best = 0.0_f64;
        let mut drawn = 0;
        while drawn < samples {
            let x = self.random_unit(&mut rng);
            let y = self.random_unit(&mut rng);
            let (Some(x), Some(y)) = (x, y) else { continue };
            best = best.max(self.modulus_at(&x, &y, u)?);
            drawn += 1;
        }
        Ok(best)
    }

    /// `(||x + u y|| + ||x - u y||) / 2 - 1` for a single pair.
    pub fn modulus_at(&self, x: &SeqVector, y: &SeqVector, u: f64) -> Result<f64> {
        self.check_dim(x)?;
        self.check_dim(y)?;
        let mut plus = x.clone();
        plus.add_scaled(u, y);
        let mut minus = x.clone();
        minus.add_scaled(-u, y);
        Ok((self.norm(&plus)? + self.norm(&minus)?) / 2.0 - 1.0)
    }

    fn random_unit(&self, rng: &mut ChaCha8Rng) -> Option<SeqVector> {
        let v: Vec<f64> = (0..self.dim).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        let n = lq_norm(&v, self.q);
        (n > 1e-12).then(|| SeqVector(v.into_iter().map(|x| x / n).collect()))
    }
}

pub(crate) fn norming_weights(f: &[f64], norm: f64, q: f64) -> Vec<f64> {
    if q == 2.0 {
        return f.iter().map(|x| x / norm).collect();
    }
    f.iter()
        .map(|x| {
            let r = x.abs() / norm;
            if r == 0.0 {
                0.0
            } else {
                x.signum() * r.powf(q - 1.0)
            }
        })
        .collect()
}

/// A linear functional `F(x) = sum weights_i * x_i` on the ambient space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualFunctional {
    pub weights: Vec<f64>,
}

impl DualFunctional {
    pub fn apply(&self, x: &SeqVector) -> f64 {
        dot(&self.weights, x.as_slice())
    }

    /// Dual-space (ℓ_p) norm of the functional.
    pub fn norm(&self, space: &LqSpace) -> f64 {
        lq_norm(&self.weights, space.p())
    }
}
