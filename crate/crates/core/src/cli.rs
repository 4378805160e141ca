//! The `onis` command line.
//!
//! Exit codes: 0 success, 1 usage error, 2 malformed or unreadable input,
//! 3 internal failure (broken invariant or unwritable output).

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::distance::DEFAULT_KL_EPSILON;
use crate::featstream::{self, Format, StreamFile, SyntheticSpec};
use crate::srum::{self, LabelMap, Percentage, SrumParams, SrumReport};
use crate::{DistanceKind, Error, FrameRecord, Sampler, SamplerConfig, StreamHeader};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_INTERNAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "onis",
    version,
    about = "Online informative sampling of feature streams"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the online sampler over a feature stream.
    Sample(SampleArgs),
    /// Score an automated sample against human-picked samples.
    Evaluate(EvaluateArgs),
    /// Generate a synthetic clustered stream from a JSON recipe.
    Gen(GenArgs),
    /// Print the header and a per-record summary of a stream file.
    Inspect(InspectArgs),
    /// Convert a stream between the binary and JSON-lines layouts.
    Convert(ConvertArgs),
    /// Build a stream of colour-histogram features from image files.
    Hist(HistArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DistanceArg {
    SymmetricKl,
    Euclidean,
    Cosine,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Binary,
    Jsonl,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Binary => Format::Binary,
            FormatArg::Jsonl => Format::Jsonl,
        }
    }
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Sample size (the CLI requires it; the library default is 6).
    #[arg(long)]
    pub k: usize,
    #[arg(long, value_enum, default_value = "symmetric-kl")]
    pub distance: DistanceArg,
    #[arg(long, default_value_t = DEFAULT_KL_EPSILON)]
    pub kl_epsilon: f64,
    #[arg(long)]
    pub output: PathBuf,
    /// CSV log with one row per frame.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// Frame rate written to the sample file instead of the stream's.
    #[arg(long)]
    pub fps: Option<f64>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub auto: PathBuf,
    #[arg(long, num_args = 1.., required = true)]
    pub human: Vec<PathBuf>,
    #[arg(long)]
    pub labels: PathBuf,
    /// Weight of the semantic score.
    #[arg(long, default_value_t = 0.75)]
    pub alpha: f64,
    /// Frame rate for the temporal score instead of the automated sample's.
    #[arg(long)]
    pub fps: Option<f64>,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long)]
    pub spec: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
    /// Output layout; defaults to JSON-lines for `.jsonl` paths, else binary.
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
}

#[derive(Debug, Args)]
pub struct InspectArgs {
    pub path: PathBuf,
}

#[derive(Debug, Args)]
pub struct ConvertArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
    #[arg(long, value_enum)]
    pub to: FormatArg,
}

#[derive(Debug, Args)]
pub struct HistArgs {
    #[arg(required = true)]
    pub images: Vec<PathBuf>,
    #[arg(long, default_value_t = 8)]
    pub bins: usize,
    #[arg(long, default_value_t = 1.0)]
    pub fps: f32,
    #[arg(long)]
    pub output: PathBuf,
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
}

/// A sampled frame list: `{"frames": [...], "fps": 30.0}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleFile {
    pub frames: Vec<u64>,
    pub fps: f64,
}

impl SampleFile {
    pub fn load(path: &Path) -> Result<Self, Error> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::file(path, e))?;
        let sample: SampleFile = serde_json::from_str(&text)?;
        if !(sample.fps.is_finite() && sample.fps > 0.0) {
            return Err(Error::InvalidParam(format!(
                "{}: fps must be positive",
                path.display()
            )));
        }
        Ok(sample)
    }
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Input(Error),
    Internal(String),
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Usage(_) => EXIT_USAGE,
            Failure::Input(_) => EXIT_INPUT,
            Failure::Internal(_) => EXIT_INTERNAL,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Usage(m) => write!(f, "usage error: {m}"),
            Failure::Input(e) => write!(f, "input error: {e}"),
            Failure::Internal(m) => write!(f, "internal error: {m}"),
        }
    }
}

fn input(e: Error) -> Failure {
    Failure::Input(e)
}

fn usage(e: Error) -> Failure {
    Failure::Usage(e.to_string())
}

fn output_err(path: &Path) -> impl Fn(Error) -> Failure + '_ {
    move |e| Failure::Internal(format!("writing {}: {e}", path.display()))
}

fn init_logging() {
    let env = env_logger::Env::new().filter_or("ONIS_LOG", "error");
    let _ = env_logger::Builder::from_env(env)
        .format_timestamp(None)
        .target(env_logger::Target::Stderr)
        .try_init();
}

/// Parses `argv` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    init_logging();
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let result = match cli.command {
        Command::Sample(args) => sample(&args),
        Command::Evaluate(args) => evaluate(&args),
        Command::Gen(args) => gen(&args),
        Command::Inspect(args) => inspect(&args),
        Command::Convert(args) => convert(&args),
        Command::Hist(args) => hist(&args),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(failure) => {
            eprintln!("onis: {failure}");
            failure.code()
        }
    }
}

fn distance_kind(arg: DistanceArg, epsilon: f64) -> Result<DistanceKind, Error> {
    match arg {
        DistanceArg::SymmetricKl => DistanceKind::symmetric_kl(epsilon),
        DistanceArg::Euclidean => Ok(DistanceKind::Euclidean),
        DistanceArg::Cosine => Ok(DistanceKind::Cosine),
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), Error> {
    let file = File::create(path).map_err(|e| Error::file(path, e))?;
    let mut out = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut out, value)?;
    out.write_all(b"\n")?;
    out.flush()?;
    Ok(())
}

fn sample(args: &SampleArgs) -> Result<(), Failure> {
    let kind = distance_kind(args.distance, args.kl_epsilon).map_err(usage)?;
    let config = SamplerConfig::new(args.k, kind).map_err(usage)?;
    if let Some(fps) = args.fps {
        if !(fps.is_finite() && fps > 0.0) {
            return Err(Failure::Usage(format!("--fps must be positive, got {fps}")));
        }
    }
    let reader = featstream::open_stream(&args.input).map_err(input)?;
    let fps = args.fps.unwrap_or(f64::from(reader.header().fps));

    let mut trace = match &args.trace {
        Some(path) => {
            let file = File::create(path)
                .map_err(|e| Error::file(path, e))
                .map_err(output_err(path))?;
            let mut w = csv::Writer::from_writer(BufWriter::new(file));
            w.write_record([
                "frame_index",
                "surprise",
                "threshold",
                "admitted",
                "evicted_frame_index",
            ])
            .map_err(|e| Failure::Internal(e.to_string()))?;
            Some(w)
        }
        None => None,
    };

    let mut sampler = Sampler::new(config);
    let mut seen = 0u64;
    for record in reader {
        let record = record.map_err(input)?;
        let step = sampler.observe(record).map_err(input)?;
        seen += 1;
        if sampler.len() > config.k() {
            return Err(Failure::Internal(format!(
                "sample set grew to {} members (k = {})",
                sampler.len(),
                config.k()
            )));
        }
        if let Some(w) = trace.as_mut() {
            w.write_record([
                step.frame_index.to_string(),
                step.surprise.to_string(),
                step.threshold.to_string(),
                step.admitted.to_string(),
                step.evicted_frame_index
                    .map(|i| i.to_string())
                    .unwrap_or_default(),
            ])
            .map_err(|e| Failure::Internal(e.to_string()))?;
        }
    }
    if let Some(mut w) = trace {
        w.flush().map_err(|e| Failure::Internal(e.to_string()))?;
    }
    let frames: Vec<u64> = sampler.finalize().iter().map(|r| r.frame_index).collect();
    log::info!("sampled {} of {seen} records", frames.len());
    write_json(&args.output, &SampleFile { frames, fps }).map_err(output_err(&args.output))
}

#[derive(Debug, Serialize)]
struct AnnotatorScore {
    sample: String,
    #[serde(flatten)]
    report: SrumReport,
}

#[derive(Debug, Serialize)]
struct EvaluationReport {
    auto: String,
    srum_alpha: f64,
    fps: f64,
    annotators: Vec<AnnotatorScore>,
    average: f64,
    human_benchmark: Option<f64>,
    percent_of_human: Option<Percentage>,
}

fn evaluate(args: &EvaluateArgs) -> Result<(), Failure> {
    let auto = SampleFile::load(&args.auto).map_err(input)?;
    let humans = args
        .human
        .iter()
        .map(|p| SampleFile::load(p))
        .collect::<Result<Vec<_>, _>>()
        .map_err(input)?;
    let labels = LabelMap::load(&args.labels).map_err(input)?;
    let fps = args.fps.unwrap_or(auto.fps);
    let params = SrumParams::new(args.alpha, fps).map_err(usage)?;
    for (path, h) in args.human.iter().zip(&humans) {
        if h.fps != fps {
            log::warn!(
                "{} declares fps {}, scoring with {fps}",
                path.display(),
                h.fps
            );
        }
    }

    let mut annotators = Vec::with_capacity(humans.len());
    for (path, h) in args.human.iter().zip(&humans) {
        let report = srum::srum(&auto.frames, &h.frames, &labels, &params).map_err(input)?;
        annotators.push(AnnotatorScore {
            sample: path.display().to_string(),
            report,
        });
    }
    let average = annotators.iter().map(|a| a.report.score).sum::<f64>() / annotators.len() as f64;
    let human_frames: Vec<&[u64]> = humans.iter().map(|h| h.frames.as_slice()).collect();
    let human_benchmark = if human_frames.len() >= 2 {
        Some(srum::human_benchmark(&human_frames, &labels, &params).map_err(input)?)
    } else {
        None
    };
    let percent_of_human = human_benchmark
        .filter(|&b| b > 0.0)
        .map(|b| srum::percent_of_human(average, b))
        .transpose()
        .map_err(|e| Failure::Internal(e.to_string()))?;

    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    let print = |out: &mut dyn Write| -> std::io::Result<()> {
        writeln!(out, "srum_alpha {}  fps {}", params.srum_alpha, params.fps)?;
        writeln!(out, "{:<40} {:>8}", "human sample", "srum")?;
        for a in &annotators {
            writeln!(out, "{:<40} {:>8.3}", a.sample, a.report.score)?;
        }
        writeln!(out, "{:<40} {:>8.3}", "average", average)?;
        if let Some(b) = human_benchmark {
            writeln!(out, "{:<40} {:>8.3}", "human benchmark (leave-one-out)", b)?;
        }
        if let Some(p) = percent_of_human {
            writeln!(out, "{:<40} {:>8}", "percent of human", p.to_string())?;
        }
        Ok(())
    };
    print(&mut out).map_err(|e| Failure::Internal(e.to_string()))?;

    if let Some(path) = &args.report {
        let report = EvaluationReport {
            auto: args.auto.display().to_string(),
            srum_alpha: params.srum_alpha,
            fps: params.fps,
            annotators,
            average,
            human_benchmark,
            percent_of_human,
        };
        write_json(path, &report).map_err(output_err(path))?;
    }
    Ok(())
}

fn output_format(path: &Path, explicit: Option<FormatArg>) -> Format {
    explicit
        .map(Format::from)
        .unwrap_or_else(|| Format::from_path(path))
}

fn gen(args: &GenArgs) -> Result<(), Failure> {
    let text = std::fs::read_to_string(&args.spec)
        .map_err(|e| Error::file(&args.spec, e))
        .map_err(input)?;
    let spec: SyntheticSpec = serde_json::from_str(&text).map_err(|e| input(e.into()))?;
    let records = spec.records().map_err(input)?;
    let header = StreamHeader {
        record_count_hint: None,
        ..spec.header()
    };
    let format = output_format(&args.output, args.format);
    let n = featstream::write_stream_from(&args.output, &header, records.map(Ok), format)
        .map_err(output_err(&args.output))?;
    log::info!("wrote {n} records to {}", args.output.display());
    Ok(())
}

fn inspect(args: &InspectArgs) -> Result<(), Failure> {
    let reader = featstream::open_stream(&args.path).map_err(input)?;
    let header = *reader.header();
    let stdout = std::io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    let io = |e: std::io::Error| Failure::Internal(e.to_string());
    writeln!(
        out,
        "format {:?}  dim {}  fps {}",
        reader.format(),
        header.dim,
        header.fps
    )
    .map_err(io)?;
    writeln!(out, "frame_index\ttimestamp_s\tmin\tmax\tmean\targmax").map_err(io)?;
    let mut count = 0u64;
    for record in reader {
        let r = record.map_err(input)?;
        let values = r.features.values();
        let (argmax, max) =
            values
                .iter()
                .copied()
                .enumerate()
                .fold(
                    (0, f32::MIN),
                    |best, (i, v)| if v > best.1 { (i, v) } else { best },
                );
        let min = values.iter().copied().fold(f32::INFINITY, f32::min);
        let mean = r.features.iter_f64().sum::<f64>() / values.len() as f64;
        let ts = r
            .timestamp_s
            .map(|t| t.to_string())
            .unwrap_or_else(|| "-".into());
        writeln!(
            out,
            "{}\t{ts}\t{min}\t{max}\t{mean:.6}\t{argmax}",
            r.frame_index
        )
        .map_err(io)?;
        count += 1;
    }
    writeln!(out, "records {count}").map_err(io)?;
    out.flush().map_err(io)
}

fn convert(args: &ConvertArgs) -> Result<(), Failure> {
    let reader = featstream::open_stream(&args.input).map_err(input)?;
    let header = *reader.header();
    // Read errors surface through the iterator; keep them apart from write errors.
    let mut read_error = None;
    let records = reader.map_while(|r| match r {
        Ok(r) => Some(Ok(r)),
        Err(e) => {
            read_error = Some(e);
            None
        }
    });
    let written = featstream::write_stream_from(&args.output, &header, records, args.to.into());
    if let Some(e) = read_error {
        return Err(input(e));
    }
    written.map(|_| ()).map_err(output_err(&args.output))
}

fn hist(args: &HistArgs) -> Result<(), Failure> {
    let header = StreamHeader::new((3 * args.bins) as u32, args.fps).map_err(usage)?;
    let mut records = Vec::with_capacity(args.images.len());
    for (i, path) in args.images.iter().enumerate() {
        let features = featstream::histogram_features(path, args.bins).map_err(|e| match e {
            Error::InvalidParam(_) => usage(e),
            other => Failure::Input(other),
        })?;
        let record = FrameRecord::new(i as u64, features).with_timestamp(i as f32 / args.fps);
        records.push(record);
    }
    let stream = StreamFile { header, records };
    let format = output_format(&args.output, args.format);
    featstream::write_stream(&args.output, &stream, format).map_err(output_err(&args.output))
}
