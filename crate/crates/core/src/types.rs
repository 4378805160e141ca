//! Shared domain types and the feature normalization contract.
//!
//! Feature values are stored as `f32` (the on-disk width) and widened to
//! `f64` for every computation.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Default feature width of the detection-transformer encoder.
pub const DEFAULT_DIM: usize = 256;

/// A fixed-width vector of non-negative activations for one stream record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f32>", into = "Vec<f32>")]
pub struct FeatureVector {
    values: Vec<f32>,
}

impl FeatureVector {
    /// Wraps already-prepared values. Every value must be finite and `>= 0`.
    pub fn new(values: Vec<f32>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Malformed {
                position: 0,
                reason: "feature vector must have at least one value".into(),
            });
        }
        if let Some((position, v)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !v.is_finite() || **v < 0.0)
        {
            return Err(Error::Malformed {
                position,
                reason: format!("feature value {v} is not a finite non-negative number"),
            });
        }
        Ok(Self { values })
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            values: vec![0.0; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f32] {
        &self.values
    }

    /// Values widened to `f64`.
    pub fn iter_f64(&self) -> impl Iterator<Item = f64> + '_ {
        self.values.iter().map(|&v| f64::from(v))
    }

    pub fn max_value(&self) -> f32 {
        self.values.iter().copied().fold(0.0, f32::max)
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }
}

impl TryFrom<Vec<f32>> for FeatureVector {
    type Error = Error;

    fn try_from(values: Vec<f32>) -> Result<Self> {
        Self::new(values)
    }
}

impl From<FeatureVector> for Vec<f32> {
    fn from(v: FeatureVector) -> Self {
        v.values
    }
}

/// One element of a feature stream.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameRecord {
    pub frame_index: u64,
    pub timestamp_s: Option<f32>,
    pub features: FeatureVector,
}

impl FrameRecord {
    pub fn new(frame_index: u64, features: FeatureVector) -> Self {
        Self {
            frame_index,
            timestamp_s: None,
            features,
        }
    }

    pub fn with_timestamp(mut self, timestamp_s: f32) -> Self {
        self.timestamp_s = Some(timestamp_s);
        self
    }
}

/// Stream-level metadata. The record count is unknown for live streams.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StreamHeader {
    pub dim: u32,
    pub fps: f32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub record_count_hint: Option<u64>,
}

impl StreamHeader {
    pub fn new(dim: u32, fps: f32) -> Result<Self> {
        let header = Self {
            dim,
            fps,
            record_count_hint: None,
        };
        header.validate()?;
        Ok(header)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::InvalidParam("stream dim must be positive".into()));
        }
        if !(self.fps.is_finite() && self.fps > 0.0) {
            return Err(Error::InvalidParam(format!(
                "stream fps must be a positive number, got {}",
                self.fps
            )));
        }
        Ok(())
    }
}

/// Divides every value by the maximum, so the result lies in `[0, 1]`.
///
/// Negative activations are clamped to zero first. An all-zero input is
/// returned unchanged.
pub fn max_normalize(raw: &[f64]) -> Result<FeatureVector> {
    if let Some(position) = raw.iter().position(|v| !v.is_finite()) {
        return Err(Error::Malformed {
            position,
            reason: format!("non-finite activation {}", raw[position]),
        });
    }
    let max = raw.iter().copied().fold(0.0_f64, f64::max);
    let values = if max > 0.0 {
        raw.iter().map(|&v| (v.max(0.0) / max) as f32).collect()
    } else {
        vec![0.0; raw.len()]
    };
    FeatureVector::new(values)
}

/// Channel-wise mean over all spatial positions of a feature map.
///
/// `positions` holds one channel vector per spatial cell (row-major `m x n`
/// flattened); every cell must have the same channel count.
pub fn average_pool<P: AsRef<[f64]>>(positions: &[P]) -> Result<Vec<f64>> {
    let first = positions.first().ok_or_else(|| Error::Malformed {
        position: 0,
        reason: "feature map has no spatial positions".into(),
    })?;
    let channels = first.as_ref().len();
    if channels == 0 {
        return Err(Error::Malformed {
            position: 0,
            reason: "feature map has no channels".into(),
        });
    }
    let mut sums = vec![0.0_f64; channels];
    for (position, cell) in positions.iter().enumerate() {
        let cell = cell.as_ref();
        if cell.len() != channels {
            return Err(Error::Malformed {
                position,
                reason: format!("expected {channels} channels, found {}", cell.len()),
            });
        }
        for (acc, v) in sums.iter_mut().zip(cell) {
            *acc += v;
        }
    }
    let count = positions.len() as f64;
    Ok(sums.into_iter().map(|s| s / count).collect())
}
