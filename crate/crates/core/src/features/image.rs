use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// 8-bit single-channel image, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 || width.checked_mul(height) != Some(pixels.len()) {
            return Err(Error::arg(format!(
                "gray image {width}x{height} needs {} pixels, got {}",
                width.saturating_mul(height),
                pixels.len()
            )));
        }
        Ok(GrayImage {
            width,
            height,
            pixels,
        })
    }

    pub fn from_fn(width: usize, height: usize, f: impl Fn(usize, usize) -> u8) -> Result<Self> {
        let pixels = (0..height)
            .flat_map(|y| (0..width).map(move |x| (x, y)))
            .map(|(x, y)| f(x, y))
            .collect();
        GrayImage::new(width, height, pixels)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.pixels[y * self.width + x]
    }
}

/// 8-bit RGB image, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RgbImage {
    width: usize,
    height: usize,
    pixels: Vec<[u8; 3]>,
}

impl RgbImage {
    pub fn new(width: usize, height: usize, pixels: Vec<[u8; 3]>) -> Result<Self> {
        if width == 0 || height == 0 || width.checked_mul(height) != Some(pixels.len()) {
            return Err(Error::arg(format!(
                "rgb image {width}x{height} needs {} pixels, got {}",
                width.saturating_mul(height),
                pixels.len()
            )));
        }
        Ok(RgbImage {
            width,
            height,
            pixels,
        })
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        f: impl Fn(usize, usize) -> [u8; 3],
    ) -> Result<Self> {
        let pixels = (0..height)
            .flat_map(|y| (0..width).map(move |x| (x, y)))
            .map(|(x, y)| f(x, y))
            .collect();
        RgbImage::new(width, height, pixels)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[[u8; 3]] {
        &self.pixels
    }

    /// Channel `u` (0 = R, 1 = G, 2 = B) as reals in `[0, 255]`.
    pub fn channel(&self, u: usize) -> Vec<f64> {
        self.pixels.iter().map(|p| f64::from(p[u])).collect()
    }

    /// Integer BT.601 luma, `(299 R + 587 G + 114 B + 500) / 1000`.
    /// Gray inputs stored as RGB (R = G = B) map back to their own value.
    pub fn to_gray(&self) -> GrayImage {
        let pixels = self
            .pixels
            .iter()
            .map(|&[r, g, b]| {
                let y = 299 * u32::from(r) + 587 * u32::from(g) + 114 * u32::from(b) + 500;
                (y / 1000) as u8
            })
            .collect();
        GrayImage {
            width: self.width,
            height: self.height,
            pixels,
        }
    }
}

/// Lossless container formats accepted for image input.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ImageFormat {
    Png,
    Pnm,
    Bmp,
}

impl ImageFormat {
    pub fn from_path(path: &Path) -> Option<Self> {
        let ext = path.extension()?.to_str()?.to_ascii_lowercase();
        match ext.as_str() {
            "png" => Some(ImageFormat::Png),
            "ppm" | "pgm" | "pnm" | "pbm" => Some(ImageFormat::Pnm),
            "bmp" => Some(ImageFormat::Bmp),
            _ => None,
        }
    }
}

/// Decodes a PNG, PPM/PGM or BMP file into RGB. Gray sources are expanded
/// with R = G = B.
pub fn load_rgb(path: &Path) -> Result<RgbImage> {
    let img = image::open(path).map_err(|e| Error::Image {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    let rgb = img.to_rgb8();
    let (w, h) = (rgb.width() as usize, rgb.height() as usize);
    let pixels = rgb.pixels().map(|p| p.0).collect();
    RgbImage::new(w, h, pixels).map_err(|e| Error::Image {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

/// Writes an RGB image; the container follows the file extension.
pub fn save_rgb(image: &RgbImage, path: &Path) -> Result<()> {
    let flat: Vec<u8> = image
        .pixels
        .iter()
        .flat_map(|p| p.iter().copied())
        .collect();
    let buf = image::RgbImage::from_raw(image.width as u32, image.height as u32, flat)
        .ok_or_else(|| Error::arg("image buffer size mismatch"))?;
    buf.save(path).map_err(|e| Error::Image {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn size_is_checked() {
        assert!(GrayImage::new(2, 2, vec![0; 3]).is_err());
        assert!(RgbImage::new(0, 2, vec![]).is_err());
    }

    #[test]
    fn gray_from_replicated_rgb_is_exact() {
        let img = RgbImage::from_fn(16, 1, |x, _| {
            let v = (x * 17) as u8;
            [v, v, v]
        })
        .unwrap();
        let g = img.to_gray();
        for x in 0..16 {
            assert_eq!(g.get(x, 0), (x * 17) as u8);
        }
    }

    #[test]
    fn png_and_ppm_round_trip_bit_exactly() {
        let dir = tempfile::tempdir().unwrap();
        let img = RgbImage::from_fn(7, 5, |x, y| [(x * 31) as u8, (y * 47) as u8, (x * y) as u8])
            .unwrap();
        for name in ["a.png", "a.ppm", "a.bmp"] {
            let path = dir.path().join(name);
            save_rgb(&img, &path).unwrap();
            assert_eq!(load_rgb(&path).unwrap(), img, "{name}");
        }
    }

    #[test]
    fn undecodable_file_is_an_image_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.png");
        std::fs::write(&path, b"not a png").unwrap();
        assert_eq!(load_rgb(&path).unwrap_err().kind(), "image");
    }
}
