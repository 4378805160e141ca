//! Colour-histogram features, a non-neural stand-in for encoder features.

use std::path::Path;

use image::RgbImage;

use crate::{max_normalize, Error, FeatureVector, Result};

/// Concatenated R, G, B intensity histograms of an image file, max-normalized.
/// The vector has `3 * bins_per_channel` entries.
pub fn histogram_features(
    path: impl AsRef<Path>,
    bins_per_channel: usize,
) -> Result<FeatureVector> {
    check_bins(bins_per_channel)?;
    let img = image::open(path.as_ref())?.to_rgb8();
    rgb_histogram(&img, bins_per_channel)
}

pub fn rgb_histogram(img: &RgbImage, bins_per_channel: usize) -> Result<FeatureVector> {
    check_bins(bins_per_channel)?;
    let mut counts = vec![0.0_f64; 3 * bins_per_channel];
    for pixel in img.pixels() {
        for (channel, &v) in pixel.0.iter().enumerate() {
            let bin = usize::from(v) * bins_per_channel / 256;
            counts[channel * bins_per_channel + bin] += 1.0;
        }
    }
    max_normalize(&counts)
}

fn check_bins(bins_per_channel: usize) -> Result<()> {
    if !(1..=256).contains(&bins_per_channel) {
        return Err(Error::InvalidParam(format!(
            "bins per channel must be in 1..=256, got {bins_per_channel}"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use image::Rgb;

    #[test]
    fn solid_colour_has_one_bin_per_channel() {
        let img = RgbImage::from_pixel(8, 5, Rgb([200, 10, 128]));
        let v = rgb_histogram(&img, 4).unwrap();
        assert_eq!(v.dim(), 12);
        for channel in v.values().chunks(4) {
            assert_eq!(channel.iter().filter(|&&x| x > 0.0).count(), 1);
            assert_eq!(channel.iter().copied().fold(0.0, f32::max), 1.0);
        }
        assert_eq!(v.values()[3], 1.0); // 200 -> bin 3
        assert_eq!(v.values()[4], 1.0); // 10 -> bin 0
        assert_eq!(v.values()[10], 1.0); // 128 -> bin 2
    }

    #[test]
    fn two_tone_equal_areas() {
        let img = RgbImage::from_fn(6, 4, |x, _| {
            if x < 3 {
                Rgb([10, 250, 10])
            } else {
                Rgb([250, 10, 250])
            }
        });
        let v = rgb_histogram(&img, 8).unwrap();
        for channel in v.values().chunks(8) {
            let ones: Vec<_> = channel.iter().filter(|&&x| x > 0.0).collect();
            assert_eq!(ones, [&1.0, &1.0]);
        }
    }

    #[test]
    fn bins_out_of_range() {
        let img = RgbImage::from_pixel(1, 1, Rgb([0, 0, 0]));
        assert!(rgb_histogram(&img, 0).is_err());
        assert!(rgb_histogram(&img, 257).is_err());
    }
}
