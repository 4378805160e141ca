use image::{Rgb, RgbImage};
use onis::featstream::{
    generate_synthetic, histogram_features, open_stream, read_stream, write_stream, Format,
    StreamFile, SyntheticSpec,
};
use onis::{Error, FeatureVector, FrameRecord, StreamHeader};
use proptest::prelude::*;

fn value() -> impl Strategy<Value = f32> {
    prop_oneof![
        Just(0.0f32),
        Just(1.0f32),
        0.0f32..=1.0,
        (0u32..0x7f80_0000).prop_map(f32::from_bits),
    ]
}

fn stream_file() -> impl Strategy<Value = StreamFile> {
    (1usize..10, 0.5f32..240.0).prop_flat_map(|(dim, fps)| {
        prop::collection::vec(
            (
                1u64..1_000_000,
                prop::option::of(0.0f32..1e6),
                prop::collection::vec(value(), dim),
            ),
            0..20,
        )
        .prop_map(move |rows| {
            let mut index = 0u64;
            let records = rows
                .into_iter()
                .map(|(gap, ts, values)| {
                    index += gap;
                    FrameRecord {
                        frame_index: index,
                        timestamp_s: ts,
                        features: FeatureVector::new(values).unwrap(),
                    }
                })
                .collect();
            StreamFile {
                header: StreamHeader::new(dim as u32, fps).unwrap(),
                records,
            }
        })
    })
}

proptest! {
    #[test]
    fn binary_round_trip(s in stream_file()) {
        let bytes = s.to_bytes(Format::Binary).unwrap();
        let back = StreamFile::from_bytes(&bytes).unwrap();
        prop_assert_eq!(&back, &s);
        prop_assert_eq!(back.to_bytes(Format::Binary).unwrap(), bytes);
    }

    #[test]
    fn jsonl_round_trip(s in stream_file()) {
        let bytes = s.to_bytes(Format::Jsonl).unwrap();
        let back = StreamFile::from_bytes(&bytes).unwrap();
        prop_assert_eq!(&back, &s);
        prop_assert_eq!(back.to_bytes(Format::Jsonl).unwrap(), bytes);
    }

    #[test]
    fn truncation_anywhere_is_reported(s in stream_file(), cut in 0.0f64..1.0) {
        let bytes = s.to_bytes(Format::Binary).unwrap();
        let at = ((bytes.len() - 1) as f64 * cut) as usize;
        match StreamFile::from_bytes(&bytes[..at]) {
            Ok(partial) => {
                // cut fell exactly on a record boundary
                prop_assert!(partial.records.len() <= s.records.len());
                prop_assert_eq!(&partial.records[..], &s.records[..partial.records.len()]);
            }
            Err(Error::Truncated { offset, .. }) => prop_assert!(offset <= at as u64),
            Err(e) => prop_assert!(false, "unexpected error {e}"),
        }
    }
}

#[test]
fn files_on_disk_round_trip_in_both_formats() {
    let dir = tempfile::tempdir().unwrap();
    let spec = SyntheticSpec {
        dim: 4,
        fps: 12.5,
        cluster_centers: vec![vec![1.0, 0.0, 0.2, 0.1], vec![0.0, 0.5, 1.0, 0.3]],
        intra_sd: 0.1,
        schedule: vec![(0, 2), (1, 1)],
        seed: 5,
        repeat: 1,
        timestamps: true,
    };
    let stream = generate_synthetic(&spec).unwrap();
    assert_eq!(stream.records.len(), 3);

    let bin = dir.path().join("s.onis");
    let jsonl = dir.path().join("s.jsonl");
    write_stream(&bin, &stream, Format::Binary).unwrap();
    write_stream(&jsonl, &stream, Format::Jsonl).unwrap();
    assert_eq!(read_stream(&bin).unwrap(), stream);
    assert_eq!(read_stream(&jsonl).unwrap(), stream);
    assert_eq!(open_stream(&jsonl).unwrap().format(), Format::Jsonl);

    // re-writing what was read gives identical bytes
    let again = dir.path().join("again.onis");
    write_stream(&again, &read_stream(&bin).unwrap(), Format::Binary).unwrap();
    assert_eq!(std::fs::read(&bin).unwrap(), std::fs::read(&again).unwrap());
}

#[test]
fn missing_file_names_path() {
    let err = read_stream("/nonexistent/stream.onis").unwrap_err();
    assert!(err.to_string().contains("/nonexistent/stream.onis"));
}

#[test]
fn histogram_features_from_files() {
    let dir = tempfile::tempdir().unwrap();
    let solid = dir.path().join("solid.png");
    let same = dir.path().join("same.png");
    let tones = dir.path().join("tones.bmp");
    RgbImage::from_pixel(16, 9, Rgb([30, 140, 250]))
        .save(&solid)
        .unwrap();
    RgbImage::from_pixel(16, 9, Rgb([30, 140, 250]))
        .save(&same)
        .unwrap();
    RgbImage::from_fn(10, 10, |_, y| {
        if y < 5 {
            Rgb([0, 0, 0])
        } else {
            Rgb([255, 255, 255])
        }
    })
    .save(&tones)
    .unwrap();

    let a = histogram_features(&solid, 16).unwrap();
    assert_eq!(a.dim(), 48);
    for channel in a.values().chunks(16) {
        assert_eq!(channel.iter().filter(|&&v| v > 0.0).count(), 1);
        assert!(channel.contains(&1.0));
    }
    assert_eq!(a, histogram_features(&same, 16).unwrap());

    let t = histogram_features(&tones, 4).unwrap();
    for channel in t.values().chunks(4) {
        assert_eq!(channel, [1.0, 0.0, 0.0, 1.0]);
    }

    let junk = dir.path().join("junk.png");
    std::fs::write(&junk, b"not an image").unwrap();
    assert!(matches!(histogram_features(&junk, 4), Err(Error::Image(_))));
}
