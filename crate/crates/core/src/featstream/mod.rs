//! Feature-stream files: a bit-exact binary layout, a JSON-lines variant,
//! plus synthetic and histogram-based stream sources.

mod binary;
mod histogram;
mod jsonl;
mod synthetic;

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read};
use std::path::Path;

pub use binary::{BinaryReader, BinaryWriter, MAGIC, VERSION};
pub use histogram::{histogram_features, rgb_histogram};
pub use jsonl::{JsonlReader, JsonlWriter};
pub use synthetic::{generate_synthetic, SyntheticSpec, SyntheticStream};

use crate::{Error, FrameRecord, Result, StreamHeader};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Binary,
    Jsonl,
}

impl Format {
    /// `.jsonl` / `.ndjson` paths are JSON-lines, everything else binary.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("jsonl") | Some("ndjson") => Format::Jsonl,
            _ => Format::Binary,
        }
    }
}

/// A whole stream held in memory.
#[derive(Debug, Clone, PartialEq)]
pub struct StreamFile {
    pub header: StreamHeader,
    pub records: Vec<FrameRecord>,
}

impl StreamFile {
    pub fn validate(&self) -> Result<()> {
        self.header.validate()?;
        let dim = self.header.dim as usize;
        let mut last = None;
        for r in &self.records {
            if r.features.dim() != dim {
                return Err(Error::DimMismatch {
                    expected: dim,
                    got: r.features.dim(),
                });
            }
            if let Some(previous) = last {
                if r.frame_index <= previous {
                    return Err(Error::NonMonotone {
                        previous,
                        got: r.frame_index,
                    });
                }
            }
            last = Some(r.frame_index);
        }
        Ok(())
    }

    pub fn to_bytes(&self, format: Format) -> Result<Vec<u8>> {
        let mut out = Vec::new();
        write_records(
            &mut out,
            &self.header,
            self.records.iter().cloned().map(Ok),
            format,
        )?;
        Ok(out)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let reader = StreamReader::new(bytes)?;
        let header = *reader.header();
        let records = reader.collect::<Result<_>>()?;
        Ok(Self { header, records })
    }
}

/// Reads either layout; the format is sniffed from the first bytes.
pub enum StreamReader<R: BufRead> {
    Binary(BinaryReader<R>),
    Jsonl(JsonlReader<R>),
}

impl<R: BufRead> StreamReader<R> {
    pub fn new(mut inner: R) -> Result<Self> {
        let head = inner.fill_buf()?;
        let first = head.iter().find(|b| !b.is_ascii_whitespace());
        if !head.starts_with(&MAGIC) && first == Some(&b'{') {
            Ok(StreamReader::Jsonl(JsonlReader::new(inner)?))
        } else {
            Ok(StreamReader::Binary(BinaryReader::new(inner)?))
        }
    }

    pub fn header(&self) -> &StreamHeader {
        match self {
            StreamReader::Binary(r) => r.header(),
            StreamReader::Jsonl(r) => r.header(),
        }
    }

    pub fn format(&self) -> Format {
        match self {
            StreamReader::Binary(_) => Format::Binary,
            StreamReader::Jsonl(_) => Format::Jsonl,
        }
    }
}

impl<R: BufRead> Iterator for StreamReader<R> {
    type Item = Result<FrameRecord>;

    fn next(&mut self) -> Option<Self::Item> {
        match self {
            StreamReader::Binary(r) => r.next(),
            StreamReader::Jsonl(r) => r.next(),
        }
    }
}

pub fn open_stream(path: impl AsRef<Path>) -> Result<StreamReader<BufReader<File>>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::file(path, e))?;
    StreamReader::new(BufReader::new(file))
}

pub fn read_stream(path: impl AsRef<Path>) -> Result<StreamFile> {
    let reader = open_stream(path)?;
    let header = *reader.header();
    let records = reader.collect::<Result<_>>()?;
    Ok(StreamFile { header, records })
}

pub fn write_stream(path: impl AsRef<Path>, stream: &StreamFile, format: Format) -> Result<()> {
    write_stream_from(
        path,
        &stream.header,
        stream.records.iter().cloned().map(Ok),
        format,
    )
    .map(|_| ())
}

/// Writes records as they are produced, so a large stream never sits in
/// memory. Returns the number of records written.
pub fn write_stream_from<I>(
    path: impl AsRef<Path>,
    header: &StreamHeader,
    records: I,
    format: Format,
) -> Result<u64>
where
    I: IntoIterator<Item = Result<FrameRecord>>,
{
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::file(path, e))?;
    write_records(BufWriter::new(file), header, records, format)
}

fn write_records<W, I>(out: W, header: &StreamHeader, records: I, format: Format) -> Result<u64>
where
    W: std::io::Write,
    I: IntoIterator<Item = Result<FrameRecord>>,
{
    let mut count = 0;
    match format {
        Format::Binary => {
            let mut w = BinaryWriter::new(out, header)?;
            for r in records {
                w.write(&r?)?;
                count += 1;
            }
            w.finish()?;
        }
        Format::Jsonl => {
            let mut w = JsonlWriter::new(out, header)?;
            for r in records {
                w.write(&r?)?;
                count += 1;
            }
            w.finish()?;
        }
    }
    Ok(count)
}

/// Drains a reader without keeping records, e.g. to validate a file.
pub fn count_records<R: Read + BufRead>(reader: StreamReader<R>) -> Result<u64> {
    let mut n = 0;
    for r in reader {
        r?;
        n += 1;
    }
    Ok(n)
}
