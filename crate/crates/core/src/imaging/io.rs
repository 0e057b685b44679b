//! PNG / PGM reading and writing.
//!
//! Color rasters are 8-bit RGB PNG. Label rasters are single channel: 8- or
//! 16-bit PNG, or binary PGM, where the pixel value is the label id.

use std::path::Path;

use image::{DynamicImage, GrayImage, ImageBuffer, ImageFormat, Luma, RgbImage};
use thiserror::Error;

use super::{ColorImage, LabelMap, Raster};

#[derive(Debug, Error)]
pub enum ImageIoError {
    #[error("{path}: {source}")]
    Image {
        path: String,
        #[source]
        source: image::ImageError,
    },
    #[error("{path}: label maps must be single-channel, found {color:?}")]
    NotSingleChannel { path: String, color: image::ColorType },
    #[error("{path}: label id {label} does not fit in 16 bits")]
    LabelRange { path: String, label: u32 },
}

fn open(path: &Path) -> Result<DynamicImage, ImageIoError> {
    image::open(path).map_err(|source| ImageIoError::Image {
        path: path.display().to_string(),
        source,
    })
}

pub fn read_color(path: impl AsRef<Path>) -> Result<ColorImage, ImageIoError> {
    let img = open(path.as_ref())?.into_rgb8();
    let (w, h) = img.dimensions();
    let data = img.pixels().map(|p| p.0).collect();
    Ok(Raster::new(w as usize, h as usize, data).expect("buffer matches dimensions"))
}

pub fn write_color(path: impl AsRef<Path>, raster: &ColorImage) -> Result<(), ImageIoError> {
    let path = path.as_ref();
    let flat: Vec<u8> = raster.pixels().iter().flatten().copied().collect();
    let img = RgbImage::from_raw(raster.width() as u32, raster.height() as u32, flat).expect("buffer matches dimensions");
    img.save_with_format(path, ImageFormat::Png).map_err(|source| ImageIoError::Image {
        path: path.display().to_string(),
        source,
    })
}

pub fn read_labels(path: impl AsRef<Path>) -> Result<LabelMap, ImageIoError> {
    let path = path.as_ref();
    let img = open(path)?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    let data: Vec<u32> = match img {
        DynamicImage::ImageLuma8(g) => g.pixels().map(|p| p.0[0] as u32).collect(),
        DynamicImage::ImageLuma16(g) => g.pixels().map(|p| p.0[0] as u32).collect(),
        other => {
            return Err(ImageIoError::NotSingleChannel {
                path: path.display().to_string(),
                color: other.color(),
            })
        }
    };
    Ok(Raster::new(w, h, data).expect("buffer matches dimensions"))
}

/// Writes a label map as PNG (8-bit when every id fits, 16-bit otherwise) or
/// as PGM when the extension is `.pgm`.
pub fn write_labels(path: impl AsRef<Path>, labels: &LabelMap) -> Result<(), ImageIoError> {
    let path = path.as_ref();
    let name = path.display().to_string();
    let max = labels.pixels().iter().copied().max().unwrap_or(0);
    if max > u16::MAX as u32 {
        return Err(ImageIoError::LabelRange { path: name, label: max });
    }
    let is_pgm = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("pgm"));
    let (w, h) = (labels.width() as u32, labels.height() as u32);
    let format = if is_pgm { ImageFormat::Pnm } else { ImageFormat::Png };
    let result = if max <= u8::MAX as u32 {
        let buf: Vec<u8> = labels.pixels().iter().map(|&l| l as u8).collect();
        GrayImage::from_raw(w, h, buf).expect("buffer matches dimensions").save_with_format(path, format)
    } else {
        let buf: Vec<u16> = labels.pixels().iter().map(|&l| l as u16).collect();
        ImageBuffer::<Luma<u16>, _>::from_raw(w, h, buf)
            .expect("buffer matches dimensions")
            .save_with_format(path, format)
    };
    result.map_err(|source| ImageIoError::Image { path: name, source })
}
