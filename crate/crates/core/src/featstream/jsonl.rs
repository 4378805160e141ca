//! JSON-lines stream layout: a header object on the first line, then one
//! record object per line.
//!
//! ```text
//! {"dim":3,"fps":30.0}
//! {"frame_index":0,"timestamp_s":0.0,"features":[0.1,1.0,0.0]}
//! ```

use std::io::{BufRead, Lines, Write};

use serde::{Deserialize, Serialize};

use crate::{Error, FeatureVector, FrameRecord, Result, StreamHeader};

#[derive(Deserialize)]
struct RecordLine {
    frame_index: u64,
    #[serde(default)]
    timestamp_s: Option<f32>,
    features: Vec<f32>,
}

#[derive(Serialize)]
struct RecordLineRef<'a> {
    frame_index: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    timestamp_s: Option<f32>,
    features: &'a [f32],
}

pub struct JsonlReader<R> {
    lines: Lines<R>,
    header: StreamHeader,
    line_no: usize,
    last_index: Option<u64>,
    done: bool,
}

impl<R: BufRead> JsonlReader<R> {
    pub fn new(inner: R) -> Result<Self> {
        let mut lines = inner.lines();
        let mut line_no = 0;
        let header_line = loop {
            line_no += 1;
            match lines.next().transpose()? {
                Some(l) if l.trim().is_empty() => continue,
                Some(l) => break l,
                None => {
                    return Err(Error::InvalidLine {
                        line: line_no,
                        reason: "missing header line".into(),
                    })
                }
            }
        };
        let header: StreamHeader =
            serde_json::from_str(&header_line).map_err(|e| Error::InvalidLine {
                line: line_no,
                reason: format!("bad header: {e}"),
            })?;
        header.validate().map_err(|e| Error::InvalidLine {
            line: line_no,
            reason: e.to_string(),
        })?;
        Ok(Self {
            lines,
            header,
            line_no,
            last_index: None,
            done: false,
        })
    }

    pub fn header(&self) -> &StreamHeader {
        &self.header
    }

    fn invalid(&self, reason: impl Into<String>) -> Error {
        Error::InvalidLine {
            line: self.line_no,
            reason: reason.into(),
        }
    }

    fn next_record(&mut self) -> Result<Option<FrameRecord>> {
        let line = loop {
            self.line_no += 1;
            match self.lines.next().transpose()? {
                Some(l) if l.trim().is_empty() => continue,
                Some(l) => break l,
                None => return Ok(None),
            }
        };
        let raw: RecordLine =
            serde_json::from_str(&line).map_err(|e| self.invalid(e.to_string()))?;
        if raw.features.len() != self.header.dim as usize {
            return Err(self.invalid(format!(
                "expected {} features, found {}",
                self.header.dim,
                raw.features.len()
            )));
        }
        if let Some(previous) = self.last_index {
            if raw.frame_index <= previous {
                return Err(Error::NonMonotone {
                    previous,
                    got: raw.frame_index,
                });
            }
        }
        let features = FeatureVector::new(raw.features).map_err(|e| self.invalid(e.to_string()))?;
        self.last_index = Some(raw.frame_index);
        Ok(Some(FrameRecord {
            frame_index: raw.frame_index,
            timestamp_s: raw.timestamp_s,
            features,
        }))
    }
}

impl<R: BufRead> Iterator for JsonlReader<R> {
    type Item = Result<FrameRecord>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        let item = self.next_record().transpose();
        if !matches!(item, Some(Ok(_))) {
            self.done = true;
        }
        item
    }
}

pub struct JsonlWriter<W: Write> {
    inner: W,
    dim: usize,
    last_index: Option<u64>,
}

impl<W: Write> JsonlWriter<W> {
    pub fn new(mut inner: W, header: &StreamHeader) -> Result<Self> {
        header.validate()?;
        serde_json::to_writer(&mut inner, header)?;
        inner.write_all(b"\n")?;
        Ok(Self {
            inner,
            dim: header.dim as usize,
            last_index: None,
        })
    }

    pub fn write(&mut self, record: &FrameRecord) -> Result<()> {
        if record.features.dim() != self.dim {
            return Err(Error::DimMismatch {
                expected: self.dim,
                got: record.features.dim(),
            });
        }
        if let Some(previous) = self.last_index {
            if record.frame_index <= previous {
                return Err(Error::NonMonotone {
                    previous,
                    got: record.frame_index,
                });
            }
        }
        let line = RecordLineRef {
            frame_index: record.frame_index,
            timestamp_s: record.timestamp_s,
            features: record.features.values(),
        };
        serde_json::to_writer(&mut self.inner, &line)?;
        self.inner.write_all(b"\n")?;
        self.last_index = Some(record.frame_index);
        Ok(())
    }

    pub fn finish(mut self) -> Result<W> {
        self.inner.flush()?;
        Ok(self.inner)
    }
}
