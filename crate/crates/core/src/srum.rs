//! Semantic Representative Uniqueness Metric.
//!
//! Scores an automated sample against a human-picked one. Every human frame
//! looks for automated frames sharing at least one semantic label; each
//! match scores `srum_alpha * 1 + (1 - srum_alpha) * representative_score`
//! and the human frame keeps its best match (0 without any). The sample
//! score is the mean over human frames, so many human frames may match one
//! automated frame but never the other way round.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Label that marks a frame with no visible target. It never matches.
pub const NONE_LABEL: &str = "none";

/// Frame index to semantic labels. Labels are stored lowercased and trimmed.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LabelMap {
    entries: BTreeMap<u64, Vec<String>>,
}

impl LabelMap {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds or replaces the labels of one frame. An empty list is rejected;
    /// use `["none"]` for frames without targets.
    pub fn insert<I, S>(&mut self, frame: u64, labels: I) -> Result<()>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let labels: Vec<String> = labels
            .into_iter()
            .map(|l| l.as_ref().trim().to_lowercase())
            .collect();
        if labels.is_empty() {
            return Err(Error::InvalidParam(format!(
                "frame {frame} has an empty label list; use [\"{NONE_LABEL}\"]"
            )));
        }
        if labels.iter().any(|l| l.is_empty()) {
            return Err(Error::InvalidParam(format!(
                "frame {frame} has a blank label"
            )));
        }
        self.entries.insert(frame, labels);
        Ok(())
    }

    pub fn get(&self, frame: u64) -> Result<&[String]> {
        self.entries
            .get(&frame)
            .map(Vec::as_slice)
            .ok_or(Error::MissingLabel(frame))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Parses `{"538": ["clownfish", "eel"], "600": ["none"]}`.
    pub fn from_json(text: &str) -> Result<Self> {
        let raw: BTreeMap<String, Vec<String>> = serde_json::from_str(text)?;
        let mut map = Self::new();
        for (key, labels) in raw {
            let frame = key.trim().parse::<u64>().map_err(|_| {
                Error::InvalidParam(format!("label key `{key}` is not a frame index"))
            })?;
            map.insert(frame, labels)?;
        }
        Ok(map)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::file(path, e))?;
        Self::from_json(&text)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SrumParams {
    pub srum_alpha: f64,
    pub fps: f64,
}

impl SrumParams {
    pub fn new(srum_alpha: f64, fps: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&srum_alpha) {
            return Err(Error::InvalidParam(format!(
                "srum alpha must lie in [0, 1], got {srum_alpha}"
            )));
        }
        if !(fps.is_finite() && fps > 0.0) {
            return Err(Error::InvalidParam(format!(
                "fps must be positive, got {fps}"
            )));
        }
        Ok(Self { srum_alpha, fps })
    }
}

/// Best match found for one human-picked frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FrameMatch {
    pub human_frame: u64,
    pub auto_frame: Option<u64>,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SrumReport {
    pub per_human_frame: Vec<FrameMatch>,
    pub score: f64,
    pub params: SrumParams,
}

/// Temporal proximity score: 1 within two seconds, then `exp(2 - |dt|)`.
pub fn representative_score(human: u64, auto: u64, fps: f64) -> f64 {
    let seconds = human.abs_diff(auto) as f64 / fps;
    if seconds <= 2.0 {
        1.0
    } else {
        (2.0 - seconds).exp()
    }
}

/// Scores one automated sample against one human sample.
pub fn srum(
    auto: &[u64],
    human: &[u64],
    labels: &LabelMap,
    params: &SrumParams,
) -> Result<SrumReport> {
    if human.is_empty() {
        return Err(Error::EmptyHumanSample);
    }
    let auto_labels = auto
        .iter()
        .map(|&a| labels.get(a).map(|l| (a, l)))
        .collect::<Result<Vec<_>>>()?;

    let mut per_human_frame = Vec::with_capacity(human.len());
    for &h in human {
        let human_labels = labels.get(h)?;
        let mut best: Option<(u64, f64)> = None;
        for &(a, candidates) in &auto_labels {
            let matched = candidates
                .iter()
                .any(|l| l != NONE_LABEL && human_labels.contains(l));
            if !matched {
                continue;
            }
            let score = params.srum_alpha
                + (1.0 - params.srum_alpha) * representative_score(h, a, params.fps);
            if best.is_none_or(|(_, s)| score > s) {
                best = Some((a, score));
            }
        }
        per_human_frame.push(FrameMatch {
            human_frame: h,
            auto_frame: best.map(|(a, _)| a),
            score: best.map_or(0.0, |(_, s)| s),
        });
    }
    let score = per_human_frame.iter().map(|m| m.score).sum::<f64>() / human.len() as f64;
    Ok(SrumReport {
        per_human_frame,
        score,
        params: *params,
    })
}

/// Mean SRUM score of `auto` over several human samples.
pub fn srum_average<H: AsRef<[u64]>>(
    auto: &[u64],
    humans: &[H],
    labels: &LabelMap,
    params: &SrumParams,
) -> Result<f64> {
    if humans.is_empty() {
        return Err(Error::InvalidParam(
            "at least one human sample is required".into(),
        ));
    }
    let mut total = 0.0;
    for h in humans {
        total += srum(auto, h.as_ref(), labels, params)?.score;
    }
    Ok(total / humans.len() as f64)
}

/// Leave-one-out human baseline: each human sample is scored as if it were
/// automated against all the others, and those averages are averaged.
pub fn human_benchmark<H: AsRef<[u64]>>(
    humans: &[H],
    labels: &LabelMap,
    params: &SrumParams,
) -> Result<f64> {
    if humans.len() < 2 {
        return Err(Error::InvalidParam(
            "the human benchmark needs at least two human samples".into(),
        ));
    }
    let mut total = 0.0;
    for (i, candidate) in humans.iter().enumerate() {
        let rest: Vec<&[u64]> = humans
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, h)| h.as_ref())
            .collect();
        total += srum_average(candidate.as_ref(), &rest, labels, params)?;
    }
    Ok(total / humans.len() as f64)
}

/// A score expressed relative to the human benchmark, in percent.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
#[serde(transparent)]
pub struct Percentage(pub f64);

impl Percentage {
    /// Value rounded to one decimal place, as reported.
    pub fn rounded(self) -> f64 {
        (self.0 * 10.0).round() / 10.0
    }
}

impl fmt::Display for Percentage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.1}%", self.0)
    }
}

pub fn percent_of_human(auto_score: f64, benchmark: f64) -> Result<Percentage> {
    if !(benchmark.is_finite() && benchmark > 0.0) {
        return Err(Error::InvalidParam(format!(
            "human benchmark must be positive, got {benchmark}"
        )));
    }
    Ok(Percentage(100.0 * auto_score / benchmark))
}
