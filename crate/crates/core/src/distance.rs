//! Distance measures between feature vectors.

use std::fmt;
use std::str::FromStr;

use crate::{Error, FeatureVector, Result};

pub const DEFAULT_KL_EPSILON: f64 = 1e-10;

/// Which distance the sampler uses to compare records.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DistanceKind {
    /// `KL(p||q) + KL(q||p)` after smoothing each vector by `epsilon` and
    /// normalizing it to sum to one. Natural logarithm.
    SymmetricKl {
        epsilon: f64,
    },
    Euclidean,
    /// `1 - cos(a, b)`. Two zero vectors are at distance 0, a zero vector
    /// and a non-zero one at distance 1.
    Cosine,
}

impl Default for DistanceKind {
    fn default() -> Self {
        DistanceKind::SymmetricKl {
            epsilon: DEFAULT_KL_EPSILON,
        }
    }
}

impl DistanceKind {
    pub fn symmetric_kl(epsilon: f64) -> Result<Self> {
        if !(epsilon.is_finite() && epsilon > 0.0) {
            return Err(Error::InvalidParam(format!(
                "KL epsilon must be a positive number, got {epsilon}"
            )));
        }
        Ok(DistanceKind::SymmetricKl { epsilon })
    }

    /// Distance between two vectors of equal dimension.
    pub fn distance(&self, a: &FeatureVector, b: &FeatureVector) -> Result<f64> {
        if a.dim() != b.dim() {
            return Err(Error::DimMismatch {
                expected: a.dim(),
                got: b.dim(),
            });
        }
        match *self {
            DistanceKind::SymmetricKl { epsilon } => symmetric_kl(a, b, epsilon),
            DistanceKind::Euclidean => Ok(euclidean(a, b)),
            DistanceKind::Cosine => Ok(cosine(a, b)),
        }
    }
}

fn symmetric_kl(a: &FeatureVector, b: &FeatureVector, epsilon: f64) -> Result<f64> {
    let sum_a: f64 = a.iter_f64().map(|v| v + epsilon).sum();
    let sum_b: f64 = b.iter_f64().map(|v| v + epsilon).sum();
    if !(sum_a.is_finite() && sum_b.is_finite()) {
        return Err(Error::InvalidParam(
            "smoothed feature mass is not finite".into(),
        ));
    }
    let mut kl_pq = 0.0;
    let mut kl_qp = 0.0;
    for (x, y) in a.iter_f64().zip(b.iter_f64()) {
        let p = (x + epsilon) / sum_a;
        let q = (y + epsilon) / sum_b;
        kl_pq += p * (p / q).ln();
        kl_qp += q * (q / p).ln();
    }
    // Each term is non-negative in exact arithmetic; rounding can leave -1e-17.
    Ok((kl_pq + kl_qp).max(0.0))
}

fn euclidean(a: &FeatureVector, b: &FeatureVector) -> f64 {
    a.iter_f64()
        .zip(b.iter_f64())
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

fn cosine(a: &FeatureVector, b: &FeatureVector) -> f64 {
    let (mut dot, mut na, mut nb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter_f64().zip(b.iter_f64()) {
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    match (na > 0.0, nb > 0.0) {
        (false, false) => 0.0,
        (true, true) if a == b => 0.0,
        (true, true) => (1.0 - dot / (na.sqrt() * nb.sqrt())).max(0.0),
        _ => 1.0,
    }
}

impl fmt::Display for DistanceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DistanceKind::SymmetricKl { .. } => f.write_str("symmetric-kl"),
            DistanceKind::Euclidean => f.write_str("euclidean"),
            DistanceKind::Cosine => f.write_str("cosine"),
        }
    }
}

impl FromStr for DistanceKind {
    type Err = Error;

    /// Parses the CLI spelling. `symmetric-kl` gets the default epsilon.
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('_', "-").as_str() {
            "symmetric-kl" => Ok(DistanceKind::default()),
            "euclidean" => Ok(DistanceKind::Euclidean),
            "cosine" => Ok(DistanceKind::Cosine),
            other => Err(Error::InvalidParam(format!(
                "unknown distance kind `{other}`"
            ))),
        }
    }
}
