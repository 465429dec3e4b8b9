//! PNG / PNM image loading and saving.
//!
//! Images become `(1, 3, H, W)` tensors with values in `[0, 255]`. Grayscale
//! inputs are promoted to three identical channels and alpha is dropped.

use std::fs;
use std::path::{Path, PathBuf};

use image::{ImageFormat, ImageReader, RgbImage};
use rfdn_core::{Shape, Tensor};

use crate::error::{CliError, Result};

const EXTENSIONS: [&str; 4] = ["png", "ppm", "pgm", "pnm"];

pub fn load_image(path: &Path) -> Result<Tensor<f32>> {
    let image_err = |source| CliError::Image { path: path.to_path_buf(), source };
    let reader = ImageReader::open(path).map_err(CliError::io(path))?.with_guessed_format().map_err(CliError::io(path))?;
    let rgb = reader.decode().map_err(image_err)?.to_rgb8();
    Ok(from_rgb(&rgb))
}

pub fn from_rgb(img: &RgbImage) -> Tensor<f32> {
    let (w, h) = img.dimensions();
    Tensor::from_fn(Shape::new(1, 3, h as usize, w as usize), |_, c, y, x| f32::from(img.get_pixel(x as u32, y as u32)[c]))
}

/// Clamps to `[0, 255]` and rounds to the nearest level.
pub fn to_rgb(t: &Tensor<f32>) -> Result<RgbImage> {
    let s = t.shape();
    if s.n != 1 || s.c != 3 {
        return Err(rfdn_core::Error::Shape(format!("expected one RGB image, got {s}")).into());
    }
    let to_u8 = |v: f32| v.clamp(0.0, 255.0).round() as u8;
    Ok(RgbImage::from_fn(s.w as u32, s.h as u32, |x, y| {
        let (x, y) = (x as usize, y as usize);
        image::Rgb([to_u8(t.at(0, 0, y, x)), to_u8(t.at(0, 1, y, x)), to_u8(t.at(0, 2, y, x))])
    }))
}

/// Writes PNG unless the extension names a PNM variant.
pub fn save_image(path: &Path, t: &Tensor<f32>) -> Result<()> {
    let format = match extension(path).as_deref() {
        Some("ppm" | "pnm" | "pgm") => ImageFormat::Pnm,
        _ => ImageFormat::Png,
    };
    to_rgb(t)?.save_with_format(path, format).map_err(|source| CliError::Image { path: path.to_path_buf(), source })
}

fn extension(path: &Path) -> Option<String> {
    path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase)
}

/// Image files directly inside `dir`, sorted by file name.
pub fn list_images(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for entry in fs::read_dir(dir).map_err(CliError::io(dir))? {
        let path = entry.map_err(CliError::io(dir))?.path();
        if path.is_file() && extension(&path).is_some_and(|e| EXTENSIONS.contains(&e.as_str())) {
            out.push(path);
        }
    }
    out.sort();
    if out.is_empty() {
        return Err(CliError::NotFound(format!("no images found in {}", dir.display())));
    }
    Ok(out)
}

/// File name without extension, for output naming and reports.
pub fn stem(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}
