//! Seeded clustered feature streams for tests and demos.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::StreamFile;
use crate::{max_normalize, Error, FrameRecord, Result, StreamHeader};

/// Recipe for a synthetic stream: records are drawn around cluster centers
/// following `schedule`, a list of `(cluster_id, run_length)` runs that is
/// played `repeat` times.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub dim: u32,
    #[serde(default = "default_fps")]
    pub fps: f32,
    pub cluster_centers: Vec<Vec<f64>>,
    pub intra_sd: f64,
    pub schedule: Vec<(usize, u64)>,
    pub seed: u64,
    #[serde(default = "one")]
    pub repeat: u64,
    #[serde(default = "yes")]
    pub timestamps: bool,
}

fn default_fps() -> f32 {
    30.0
}

fn one() -> u64 {
    1
}

fn yes() -> bool {
    true
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        StreamHeader::new(self.dim, self.fps)?;
        if self.cluster_centers.is_empty() {
            return Err(Error::InvalidParam(
                "at least one cluster center is required".into(),
            ));
        }
        for (i, c) in self.cluster_centers.iter().enumerate() {
            if c.len() != self.dim as usize {
                return Err(Error::InvalidParam(format!(
                    "cluster center {i} has {} values, expected {}",
                    c.len(),
                    self.dim
                )));
            }
            if c.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidParam(format!(
                    "cluster center {i} is not finite"
                )));
            }
        }
        if !(self.intra_sd.is_finite() && self.intra_sd >= 0.0) {
            return Err(Error::InvalidParam(format!(
                "intra_sd must be a non-negative number, got {}",
                self.intra_sd
            )));
        }
        if self.schedule.is_empty() {
            return Err(Error::InvalidParam("schedule is empty".into()));
        }
        for &(cluster, run) in &self.schedule {
            if cluster >= self.cluster_centers.len() {
                return Err(Error::InvalidParam(format!(
                    "schedule refers to unknown cluster {cluster}"
                )));
            }
            if run == 0 {
                return Err(Error::InvalidParam(
                    "schedule run lengths must be at least 1".into(),
                ));
            }
        }
        Ok(())
    }

    pub fn header(&self) -> StreamHeader {
        StreamHeader {
            dim: self.dim,
            fps: self.fps,
            record_count_hint: Some(self.len()),
        }
    }

    /// Total number of records the spec produces.
    pub fn len(&self) -> u64 {
        self.schedule.iter().map(|&(_, run)| run).sum::<u64>() * self.repeat
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Lazily generated records, in frame order.
    pub fn records(&self) -> Result<SyntheticStream<'_>> {
        self.validate()?;
        Ok(SyntheticStream {
            spec: self,
            rng: ChaCha8Rng::seed_from_u64(self.seed),
            next_index: 0,
            run: 0,
            left_in_run: self.schedule[0].1,
            pass: 0,
            raw: vec![0.0; self.dim as usize],
        })
    }

    /// Cluster id of every record, in frame order.
    pub fn labels(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.repeat).flat_map(move |_| {
            self.schedule
                .iter()
                .flat_map(|&(cluster, run)| std::iter::repeat_n(cluster, run as usize))
        })
    }
}

pub struct SyntheticStream<'a> {
    spec: &'a SyntheticSpec,
    rng: ChaCha8Rng,
    next_index: u64,
    run: usize,
    left_in_run: u64,
    pass: u64,
    raw: Vec<f64>,
}

impl Iterator for SyntheticStream<'_> {
    type Item = FrameRecord;

    fn next(&mut self) -> Option<FrameRecord> {
        while self.left_in_run == 0 {
            self.run += 1;
            if self.run == self.spec.schedule.len() {
                self.run = 0;
                self.pass += 1;
            }
            if self.pass >= self.spec.repeat {
                return None;
            }
            self.left_in_run = self.spec.schedule[self.run].1;
        }
        if self.pass >= self.spec.repeat {
            return None;
        }
        self.left_in_run -= 1;

        let center = &self.spec.cluster_centers[self.spec.schedule[self.run].0];
        for (out, &c) in self.raw.iter_mut().zip(center) {
            let z: f64 = StandardNormal.sample(&mut self.rng);
            *out = (c + self.spec.intra_sd * z).max(0.0);
        }
        let features = max_normalize(&self.raw).expect("finite synthetic features");
        let index = self.next_index;
        self.next_index += 1;
        let mut record = FrameRecord::new(index, features);
        if self.spec.timestamps {
            record.timestamp_s = Some((index as f64 / f64::from(self.spec.fps)) as f32);
        }
        Some(record)
    }
}

pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<StreamFile> {
    let records = spec.records()?.collect();
    Ok(StreamFile {
        header: StreamHeader {
            record_count_hint: None,
            ..spec.header()
        },
        records,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(intra_sd: f64, seed: u64) -> SyntheticSpec {
        SyntheticSpec {
            dim: 3,
            fps: 10.0,
            cluster_centers: vec![vec![2.0, 0.5, 0.0], vec![0.0, 1.0, 4.0]],
            intra_sd,
            schedule: vec![(0, 3), (1, 2)],
            seed,
            repeat: 2,
            timestamps: true,
        }
    }

    #[test]
    fn zero_noise_gives_normalized_centers() {
        let s = generate_synthetic(&spec(0.0, 1)).unwrap();
        assert_eq!(s.records.len(), 10);
        let a = [1.0, 0.25, 0.0];
        let b = [0.0, 0.25, 1.0];
        let expected = [a, a, a, b, b, a, a, a, b, b];
        for (r, e) in s.records.iter().zip(expected) {
            assert_eq!(r.features.values(), e);
        }
        assert_eq!(s.records[9].frame_index, 9);
        assert_eq!(s.records[5].timestamp_s, Some(0.5));
    }

    #[test]
    fn seeded_and_deterministic() {
        let a = generate_synthetic(&spec(0.3, 7)).unwrap();
        let b = generate_synthetic(&spec(0.3, 7)).unwrap();
        let c = generate_synthetic(&spec(0.3, 8)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn output_satisfies_feature_invariants() {
        let s = generate_synthetic(&spec(2.0, 3)).unwrap();
        for r in &s.records {
            assert!(r.features.values().iter().all(|v| (0.0..=1.0).contains(v)));
            assert!(r.features.is_zero() || r.features.max_value() == 1.0);
        }
    }

    #[test]
    fn labels_follow_schedule() {
        let sp = spec(0.0, 0);
        assert_eq!(
            sp.labels().collect::<Vec<_>>(),
            [0, 0, 0, 1, 1, 0, 0, 0, 1, 1]
        );
        assert_eq!(sp.len(), 10);
    }

    #[test]
    fn invalid_specs() {
        let mut s = spec(0.1, 0);
        s.schedule.push((5, 1));
        assert!(s.validate().is_err());
        let mut s = spec(0.1, 0);
        s.schedule[0].1 = 0;
        assert!(s.validate().is_err());
        let mut s = spec(0.1, 0);
        s.cluster_centers[1].pop();
        assert!(s.validate().is_err());
        let mut s = spec(0.1, 0);
        s.intra_sd = -1.0;
        assert!(s.validate().is_err());
        let mut s = spec(0.1, 0);
        s.cluster_centers.clear();
        assert!(s.validate().is_err());
    }

    #[test]
    fn parses_from_json() {
        let s: SyntheticSpec = serde_json::from_str(
            r#"{"dim": 2, "cluster_centers": [[1, 0]], "intra_sd": 0.1,
                "schedule": [[0, 4]], "seed": 9}"#,
        )
        .unwrap();
        assert_eq!(s.repeat, 1);
        assert_eq!(s.fps, 30.0);
        assert_eq!(generate_synthetic(&s).unwrap().records.len(), 4);
    }
}
