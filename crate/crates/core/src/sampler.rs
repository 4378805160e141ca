//! The online informative sampler.
//!
//! Records arrive one at a time. The first `k` fill the sample set
//! unconditionally. After that, a record's surprise is its distance to the
//! nearest member; it is admitted when the surprise is strictly above the
//! threshold, the mean nearest-neighbour distance inside the set. An
//! admission that overflows the set is followed by a greedy k-center pass
//! that evicts the one member it does not pick.

use serde::Serialize;

use crate::kcenter::greedy_centers;
use crate::{DistanceKind, Error, FrameRecord, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplerConfig {
    k: usize,
    pub distance: DistanceKind,
}

impl SamplerConfig {
    pub const DEFAULT_K: usize = 6;

    pub fn new(k: usize, distance: DistanceKind) -> Result<Self> {
        if k < 2 {
            return Err(Error::InvalidParam(format!(
                "sample size k must be at least 2, got {k}"
            )));
        }
        Ok(Self { k, distance })
    }

    pub fn k(&self) -> usize {
        self.k
    }
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self {
            k: Self::DEFAULT_K,
            distance: DistanceKind::default(),
        }
    }
}

/// What happened to one observed record.
///
/// During warm-up `surprise` is the distance to the nearest existing member
/// (0 when the set is empty) and `threshold` is the current mean
/// nearest-neighbour distance (0 with fewer than two members).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StepOutcome {
    pub frame_index: u64,
    pub surprise: f64,
    pub threshold: f64,
    pub admitted: bool,
    pub evicted_frame_index: Option<u64>,
}

/// The bounded working set plus its pairwise distance cache.
#[derive(Debug, Clone)]
pub struct Sampler {
    config: SamplerConfig,
    dim: Option<usize>,
    last_index: Option<u64>,
    members: Vec<FrameRecord>,
    // pair_dist[i][j] == distance(members[i], members[j])
    pair_dist: Vec<Vec<f64>>,
}

impl Sampler {
    pub fn new(config: SamplerConfig) -> Self {
        Self {
            config,
            dim: None,
            last_index: None,
            members: Vec::with_capacity(config.k + 1),
            pair_dist: Vec::with_capacity(config.k + 1),
        }
    }

    pub fn config(&self) -> &SamplerConfig {
        &self.config
    }

    /// Current members in ascending frame order.
    pub fn members(&self) -> &[FrameRecord] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn is_warm(&self) -> bool {
        self.members.len() >= self.config.k
    }

    /// Mean over members of the distance to their nearest other member.
    pub fn threshold(&self) -> f64 {
        let n = self.members.len();
        if n < 2 {
            return 0.0;
        }
        let total: f64 = self
            .pair_dist
            .iter()
            .enumerate()
            .map(|(i, row)| {
                row.iter()
                    .enumerate()
                    .filter(|&(j, _)| j != i)
                    .map(|(_, &d)| d)
                    .fold(f64::INFINITY, f64::min)
            })
            .sum();
        total / n as f64
    }

    /// Feeds one record. On error the sampler is left unchanged.
    pub fn observe(&mut self, frame: FrameRecord) -> Result<StepOutcome> {
        if let Some(previous) = self.last_index {
            if frame.frame_index <= previous {
                return Err(Error::NonMonotone {
                    previous,
                    got: frame.frame_index,
                });
            }
        }
        if let Some(dim) = self.dim {
            if frame.features.dim() != dim {
                return Err(Error::DimMismatch {
                    expected: dim,
                    got: frame.features.dim(),
                });
            }
        }

        let to_members = self
            .members
            .iter()
            .map(|m| self.config.distance.distance(&frame.features, &m.features))
            .collect::<Result<Vec<f64>>>()?;
        let surprise = to_members.iter().copied().fold(f64::INFINITY, f64::min);
        let surprise = if surprise.is_finite() { surprise } else { 0.0 };
        let threshold = self.threshold();

        self.dim = Some(frame.features.dim());
        self.last_index = Some(frame.frame_index);
        let frame_index = frame.frame_index;

        let warm = self.is_warm();
        let admitted = !warm || surprise > threshold;
        let mut evicted_frame_index = None;
        if admitted {
            self.push(frame, to_members);
            if self.members.len() > self.config.k {
                evicted_frame_index = Some(self.evict_one().frame_index);
            }
        }
        log::debug!(
            "frame {frame_index}: surprise {surprise:.6} threshold {threshold:.6} admitted {admitted}"
        );
        Ok(StepOutcome {
            frame_index,
            surprise,
            threshold,
            admitted,
            evicted_frame_index,
        })
    }

    /// Feeds every record of an iterator, stopping at the first error.
    pub fn observe_all<I>(&mut self, frames: I) -> Result<Vec<StepOutcome>>
    where
        I: IntoIterator<Item = FrameRecord>,
    {
        frames.into_iter().map(|f| self.observe(f)).collect()
    }

    /// Ends the stream and returns the sample in ascending frame order.
    pub fn finalize(self) -> Vec<FrameRecord> {
        self.members
    }

    fn push(&mut self, frame: FrameRecord, to_members: Vec<f64>) {
        for (row, &d) in self.pair_dist.iter_mut().zip(&to_members) {
            row.push(d);
        }
        let mut own = to_members;
        own.push(0.0);
        self.pair_dist.push(own);
        self.members.push(frame);
    }

    fn evict_one(&mut self) -> FrameRecord {
        let n = self.members.len();
        let kept = greedy_centers(n, self.config.k, |i, j| self.pair_dist[i][j]);
        let victim = unchosen(n, &kept);
        self.pair_dist.remove(victim);
        for row in &mut self.pair_dist {
            row.remove(victim);
        }
        self.members.remove(victim)
    }
}

fn unchosen(n: usize, kept: &[usize]) -> usize {
    (0..n)
        .find(|i| !kept.contains(i))
        .expect("greedy selection covers fewer points than given")
}

/// Reduces `k + 1` members to `k` with one greedy k-center pass.
///
/// `members` must be in ascending frame order. Returns the kept members (still
/// in frame order) and the evicted one.
pub fn trim_to_k(
    mut members: Vec<FrameRecord>,
    config: &SamplerConfig,
) -> Result<(Vec<FrameRecord>, FrameRecord)> {
    if members.len() != config.k + 1 {
        return Err(Error::InvalidParam(format!(
            "trim expects exactly {} members, got {}",
            config.k + 1,
            members.len()
        )));
    }
    if let Some(w) = members
        .windows(2)
        .find(|w| w[1].frame_index <= w[0].frame_index)
    {
        return Err(Error::NonMonotone {
            previous: w[0].frame_index,
            got: w[1].frame_index,
        });
    }
    let n = members.len();
    let mut dist = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let d = config
                .distance
                .distance(&members[i].features, &members[j].features)?;
            dist[i][j] = d;
            dist[j][i] = d;
        }
    }
    let kept = greedy_centers(n, config.k, |i, j| dist[i][j]);
    let evicted = members.remove(unchosen(n, &kept));
    Ok((members, evicted))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::FeatureVector;

    fn rec(index: u64, values: &[f32]) -> FrameRecord {
        FrameRecord::new(index, FeatureVector::new(values.to_vec()).unwrap())
    }

    fn euclid(k: usize) -> SamplerConfig {
        SamplerConfig::new(k, DistanceKind::Euclidean).unwrap()
    }

    fn features(s: &Sampler) -> Vec<f32> {
        s.members().iter().map(|m| m.features.values()[0]).collect()
    }

    fn assert_cache_coherent(s: &Sampler) {
        let n = s.members.len();
        assert_eq!(s.pair_dist.len(), n);
        for i in 0..n {
            assert_eq!(s.pair_dist[i].len(), n);
            for j in 0..n {
                let d = s
                    .config
                    .distance
                    .distance(&s.members[i].features, &s.members[j].features)
                    .unwrap();
                assert_eq!(s.pair_dist[i][j], d);
            }
        }
    }

    #[test]
    fn one_dimensional_hand_trace() {
        let mut s = Sampler::new(euclid(2));
        let a = s.observe(rec(0, &[0.0])).unwrap();
        let b = s.observe(rec(1, &[1.0])).unwrap();
        assert!(a.admitted && b.admitted);
        assert_eq!(s.threshold(), 1.0);

        let c = s.observe(rec(2, &[0.5])).unwrap();
        assert_eq!((c.surprise, c.threshold, c.admitted), (0.5, 1.0, false));
        assert_eq!(features(&s), [0.0, 1.0]);

        let d = s.observe(rec(3, &[3.0])).unwrap();
        assert_eq!((d.surprise, d.threshold, d.admitted), (2.0, 1.0, true));
        assert_eq!(d.evicted_frame_index, Some(1));
        assert_eq!(features(&s), [0.0, 3.0]);
        assert_cache_coherent(&s);

        let out = s.finalize();
        assert_eq!(
            out.iter().map(|r| r.frame_index).collect::<Vec<_>>(),
            [0, 3]
        );
    }

    #[test]
    fn duplicate_of_member_is_rejected() {
        let mut s = Sampler::new(euclid(2));
        s.observe(rec(0, &[0.0])).unwrap();
        s.observe(rec(1, &[1.0])).unwrap();
        let out = s.observe(rec(2, &[1.0])).unwrap();
        assert_eq!(out.surprise, 0.0);
        assert!(!out.admitted);
    }

    #[test]
    fn warm_up_admits_duplicates() {
        let mut s = Sampler::new(euclid(3));
        for i in 0..3 {
            assert!(s.observe(rec(i, &[0.5])).unwrap().admitted);
        }
        assert_eq!(s.len(), 3);
        assert_eq!(s.threshold(), 0.0);
    }

    #[test]
    fn short_and_empty_streams() {
        let s = Sampler::new(euclid(4));
        assert!(s.finalize().is_empty());
        let mut s = Sampler::new(euclid(4));
        s.observe(rec(5, &[0.1])).unwrap();
        s.observe(rec(9, &[0.2])).unwrap();
        let out = s.finalize();
        assert_eq!(
            out.iter().map(|r| r.frame_index).collect::<Vec<_>>(),
            [5, 9]
        );
    }

    #[test]
    fn rejects_bad_frames_without_mutating() {
        let mut s = Sampler::new(euclid(2));
        s.observe(rec(3, &[0.0, 1.0])).unwrap();
        assert!(matches!(
            s.observe(rec(3, &[1.0, 0.0])),
            Err(Error::NonMonotone {
                previous: 3,
                got: 3
            })
        ));
        assert!(matches!(
            s.observe(rec(4, &[1.0])),
            Err(Error::DimMismatch {
                expected: 2,
                got: 1
            })
        ));
        assert_eq!(s.len(), 1);
        assert!(s.observe(rec(4, &[1.0, 0.0])).is_ok());
    }

    #[test]
    fn k_below_two_rejected() {
        assert!(SamplerConfig::new(1, DistanceKind::Euclidean).is_err());
        assert!(SamplerConfig::new(0, DistanceKind::Euclidean).is_err());
        assert_eq!(SamplerConfig::default().k(), 6);
    }

    #[test]
    fn trim_hand_trace() {
        let members = vec![rec(0, &[0.0]), rec(1, &[1.0]), rec(2, &[3.0])];
        let (kept, evicted) = trim_to_k(members, &euclid(2)).unwrap();
        assert_eq!(evicted.frame_index, 1);
        assert_eq!(
            kept.iter().map(|r| r.frame_index).collect::<Vec<_>>(),
            [0, 2]
        );
    }

    #[test]
    fn trim_evicts_later_duplicate() {
        let members = vec![rec(0, &[0.2]), rec(1, &[0.9]), rec(2, &[0.9])];
        let (_, evicted) = trim_to_k(members, &euclid(2)).unwrap();
        assert_eq!(evicted.frame_index, 2);

        let members = vec![rec(0, &[0.2]), rec(1, &[0.2]), rec(2, &[0.9])];
        let (_, evicted) = trim_to_k(members, &euclid(2)).unwrap();
        assert_eq!(evicted.frame_index, 1);
    }

    #[test]
    fn trim_checks_structure() {
        assert!(trim_to_k(vec![rec(0, &[0.0]), rec(1, &[1.0])], &euclid(2)).is_err());
        let unordered = vec![rec(2, &[0.0]), rec(1, &[1.0]), rec(3, &[2.0])];
        assert!(trim_to_k(unordered, &euclid(2)).is_err());
    }

    #[test]
    fn cache_stays_coherent_under_kl() {
        let mut s = Sampler::new(SamplerConfig::new(3, DistanceKind::default()).unwrap());
        let stream = [
            [1.0, 0.1, 0.1],
            [0.1, 1.0, 0.1],
            [0.2, 0.2, 1.0],
            [1.0, 1.0, 0.0],
            [0.0, 0.1, 1.0],
            [0.5, 0.5, 0.5],
            [1.0, 0.0, 0.0],
        ];
        for (i, v) in stream.iter().enumerate() {
            s.observe(rec(i as u64, v)).unwrap();
            assert!(s.len() <= 3);
            assert_cache_coherent(&s);
        }
    }
}
