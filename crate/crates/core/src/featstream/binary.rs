//! Little-endian binary stream layout.
//!
//! ```text
//! magic      4 bytes  "ONIS"
//! version    u32      1
//! dim        u32
//! fps        f32
//! records, each:
//!   frame_index        u64
//!   timestamp_present  u8   (0 or 1)
//!   timestamp          f32  (only when present)
//!   features           dim x f32
//! ```

use std::io::{self, Read, Write};

use crate::{Error, FeatureVector, FrameRecord, Result, StreamHeader};

pub const MAGIC: [u8; 4] = *b"ONIS";
pub const VERSION: u32 = 1;
pub const HEADER_LEN: u64 = 16;

/// Reads until `buf` is full or the source is exhausted.
fn read_full<R: Read>(reader: &mut R, buf: &mut [u8]) -> io::Result<usize> {
    let mut filled = 0;
    while filled < buf.len() {
        match reader.read(&mut buf[filled..]) {
            Ok(0) => break,
            Ok(n) => filled += n,
            Err(e) if e.kind() == io::ErrorKind::Interrupted => {}
            Err(e) => return Err(e),
        }
    }
    Ok(filled)
}

/// Streaming reader; yields records one by one without buffering the stream.
pub struct BinaryReader<R> {
    inner: R,
    header: StreamHeader,
    offset: u64,
    last_index: Option<u64>,
    buf: Vec<u8>,
    done: bool,
}

impl<R: Read> BinaryReader<R> {
    pub fn new(mut inner: R) -> Result<Self> {
        let mut head = [0u8; HEADER_LEN as usize];
        let got = read_full(&mut inner, &mut head)?;
        if got >= 4 && head[..4] != MAGIC {
            return Err(Error::BadMagic {
                found: [head[0], head[1], head[2], head[3]],
            });
        }
        if got < head.len() {
            return Err(Error::Truncated {
                what: "header",
                offset: got as u64,
            });
        }
        let version = u32::from_le_bytes(head[4..8].try_into().unwrap());
        if version != VERSION {
            return Err(Error::UnsupportedVersion(version));
        }
        let dim = u32::from_le_bytes(head[8..12].try_into().unwrap());
        let fps = f32::from_le_bytes(head[12..16].try_into().unwrap());
        let header = StreamHeader {
            dim,
            fps,
            record_count_hint: None,
        };
        header.validate().map_err(|e| Error::InvalidData {
            offset: 8,
            reason: e.to_string(),
        })?;
        Ok(Self {
            inner,
            header,
            offset: HEADER_LEN,
            last_index: None,
            buf: Vec::with_capacity(dim as usize * 4),
            done: false,
        })
    }

    pub fn header(&self) -> &StreamHeader {
        &self.header
    }

    /// Byte offset of the next unread record.
    pub fn offset(&self) -> u64 {
        self.offset
    }

    fn truncated(&self) -> Error {
        Error::Truncated {
            what: "record",
            offset: self.offset,
        }
    }

    fn next_record(&mut self) -> Result<Option<FrameRecord>> {
        let start = self.offset;
        let mut prefix = [0u8; 9];
        match read_full(&mut self.inner, &mut prefix)? {
            0 => return Ok(None),
            9 => {}
            _ => return Err(self.truncated()),
        }
        let frame_index = u64::from_le_bytes(prefix[..8].try_into().unwrap());
        let mut consumed = 9u64;
        let timestamp_s = match prefix[8] {
            0 => None,
            1 => {
                let mut ts = [0u8; 4];
                if read_full(&mut self.inner, &mut ts)? < 4 {
                    return Err(self.truncated());
                }
                consumed += 4;
                Some(f32::from_le_bytes(ts))
            }
            flag => {
                return Err(Error::InvalidData {
                    offset: start + 8,
                    reason: format!("timestamp flag must be 0 or 1, found {flag}"),
                })
            }
        };
        self.buf.resize(self.header.dim as usize * 4, 0);
        if read_full(&mut self.inner, &mut self.buf)? < self.buf.len() {
            return Err(self.truncated());
        }
        consumed += self.buf.len() as u64;

        if let Some(previous) = self.last_index {
            if frame_index <= previous {
                return Err(Error::NonMonotone {
                    previous,
                    got: frame_index,
                });
            }
        }
        let values = self
            .buf
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
            .collect();
        let features = FeatureVector::new(values).map_err(|e| Error::InvalidData {
            offset: start,
            reason: e.to_string(),
        })?;
        self.offset += consumed;
        self.last_index = Some(frame_index);
        Ok(Some(FrameRecord {
            frame_index,
            timestamp_s,
            features,
        }))
    }
}

impl<R: Read> Iterator for BinaryReader<R> {
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

/// Streaming writer. Checks dimension and frame order as records arrive.
pub struct BinaryWriter<W: Write> {
    inner: W,
    dim: usize,
    last_index: Option<u64>,
}

impl<W: Write> BinaryWriter<W> {
    pub fn new(mut inner: W, header: &StreamHeader) -> Result<Self> {
        header.validate()?;
        inner.write_all(&MAGIC)?;
        inner.write_all(&VERSION.to_le_bytes())?;
        inner.write_all(&header.dim.to_le_bytes())?;
        inner.write_all(&header.fps.to_le_bytes())?;
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
        self.inner.write_all(&record.frame_index.to_le_bytes())?;
        match record.timestamp_s {
            Some(ts) => {
                self.inner.write_all(&[1])?;
                self.inner.write_all(&ts.to_le_bytes())?;
            }
            None => self.inner.write_all(&[0])?,
        }
        for v in record.features.values() {
            self.inner.write_all(&v.to_le_bytes())?;
        }
        self.last_index = Some(record.frame_index);
        Ok(())
    }

    pub fn finish(mut self) -> Result<W> {
        self.inner.flush()?;
        Ok(self.inner)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_bytes() -> Vec<u8> {
        let header = StreamHeader::new(2, 25.0).unwrap();
        let mut w = BinaryWriter::new(Vec::new(), &header).unwrap();
        let fv = |a: f32, b: f32| FeatureVector::new(vec![a, b]).unwrap();
        w.write(&FrameRecord::new(0, fv(1.0, 0.5)).with_timestamp(0.0))
            .unwrap();
        w.write(&FrameRecord::new(4, fv(0.0, 1.0))).unwrap();
        w.finish().unwrap()
    }

    #[test]
    fn layout_is_little_endian() {
        let bytes = sample_bytes();
        assert_eq!(&bytes[..4], b"ONIS");
        assert_eq!(&bytes[4..8], &[1, 0, 0, 0]);
        assert_eq!(&bytes[8..12], &[2, 0, 0, 0]);
        assert_eq!(&bytes[12..16], &25.0f32.to_le_bytes());
        // 16 header + (8 + 1 + 4 + 8) + (8 + 1 + 8)
        assert_eq!(bytes.len(), 16 + 21 + 17);
    }

    #[test]
    fn reads_back() {
        let bytes = sample_bytes();
        let reader = BinaryReader::new(bytes.as_slice()).unwrap();
        assert_eq!(reader.header().fps, 25.0);
        let records: Vec<_> = reader.collect::<Result<_>>().unwrap();
        assert_eq!(records.len(), 2);
        assert_eq!(records[0].timestamp_s, Some(0.0));
        assert_eq!(records[1].frame_index, 4);
        assert_eq!(records[1].timestamp_s, None);
    }

    #[test]
    fn bad_magic() {
        let mut bytes = sample_bytes();
        bytes[..4].copy_from_slice(b"XXXX");
        assert!(matches!(
            BinaryReader::new(bytes.as_slice()),
            Err(Error::BadMagic { found }) if &found == b"XXXX"
        ));
    }

    #[test]
    fn version_mismatch() {
        let mut bytes = sample_bytes();
        bytes[4] = 2;
        assert!(matches!(
            BinaryReader::new(bytes.as_slice()),
            Err(Error::UnsupportedVersion(2))
        ));
    }

    #[test]
    fn truncated_header() {
        let bytes = sample_bytes();
        assert!(matches!(
            BinaryReader::new(&bytes[..10]),
            Err(Error::Truncated {
                what: "header",
                offset: 10
            })
        ));
    }

    #[test]
    fn truncated_final_record_names_offset() {
        let bytes = sample_bytes();
        let cut = &bytes[..bytes.len() - 3];
        let results: Vec<_> = BinaryReader::new(cut).unwrap().collect();
        assert_eq!(results.len(), 2);
        assert!(results[0].is_ok());
        match &results[1] {
            Err(Error::Truncated {
                what: "record",
                offset,
            }) => assert_eq!(*offset, 37),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn non_monotone_index() {
        let mut bytes = sample_bytes();
        // second record's frame index starts right after the first record
        bytes[37..45].copy_from_slice(&0u64.to_le_bytes());
        let results: Vec<_> = BinaryReader::new(bytes.as_slice()).unwrap().collect();
        assert!(matches!(
            results[1],
            Err(Error::NonMonotone {
                previous: 0,
                got: 0
            })
        ));
    }

    #[test]
    fn negative_feature_rejected() {
        let mut bytes = sample_bytes();
        let at = bytes.len() - 4;
        bytes[at..].copy_from_slice(&(-1.0f32).to_le_bytes());
        let results: Vec<_> = BinaryReader::new(bytes.as_slice()).unwrap().collect();
        assert!(matches!(
            results[1],
            Err(Error::InvalidData { offset: 37, .. })
        ));
    }

    #[test]
    fn writer_checks_order_and_dim() {
        let header = StreamHeader::new(1, 10.0).unwrap();
        let mut w = BinaryWriter::new(Vec::new(), &header).unwrap();
        let one = FeatureVector::new(vec![1.0]).unwrap();
        w.write(&FrameRecord::new(3, one.clone())).unwrap();
        assert!(w.write(&FrameRecord::new(3, one)).is_err());
        let two = FeatureVector::new(vec![1.0, 1.0]).unwrap();
        assert!(w.write(&FrameRecord::new(4, two)).is_err());
    }
}
