//! Aspect-preserving resize with padding, and seeded augmentation.
//!
//! Pixel values are 8-bit and all resampling is bilinear with pixel
//! centers at half-integer positions. Intermediate values stay in `f64` and
//! are rounded (half away from zero) and clamped only when written back.

pub mod pnm;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

pub const MAX_ROTATION_DEGREES: f64 = 45.0;
pub const CONTRAST_RANGE: (f64, f64) = (0.7, 1.3);
pub const DEFAULT_PAD_RGB: [u8; 3] = [128, 128, 128];

/// Row-major 8-bit raster with 1 (gray) or 3 (RGB) interleaved channels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RasterImage {
    width: usize,
    height: usize,
    channels: usize,
    pixels: Vec<u8>,
}

impl RasterImage {
    pub fn new(width: usize, height: usize, channels: usize, pixels: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Validation(format!("image size {width}×{height}")));
        }
        if channels != 1 && channels != 3 {
            return Err(Error::Validation(format!("{channels} channels; expected 1 or 3")));
        }
        if pixels.len() != width * height * channels {
            return Err(Error::Shape(format!(
                "{} bytes for a {width}×{height}×{channels} image",
                pixels.len()
            )));
        }
        Ok(RasterImage {
            width,
            height,
            channels,
            pixels,
        })
    }

    /// An image filled with one color (`fill` is trimmed to the channel count).
    pub fn filled(width: usize, height: usize, channels: usize, fill: &[u8]) -> Result<Self> {
        let px = &fill[..channels.min(fill.len())];
        let pixels = px.iter().copied().cycle().take(width * height * channels).collect();
        RasterImage::new(width, height, channels, pixels)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn pixel(&self, x: usize, y: usize) -> &[u8] {
        let i = (y * self.width + x) * self.channels;
        &self.pixels[i..i + self.channels]
    }

    fn at(&self, x: usize, y: usize, c: usize) -> f64 {
        f64::from(self.pixels[(y * self.width + x) * self.channels + c])
    }

    /// Pad color expressed in this image's channels.
    fn pad_value(&self, pad_rgb: [u8; 3]) -> Vec<u8> {
        if self.channels == 3 {
            pad_rgb.to_vec()
        } else {
            let sum: u32 = pad_rgb.iter().map(|&v| u32::from(v)).sum();
            vec![((sum as f64) / 3.0).round() as u8]
        }
    }
}

fn to_byte(v: f64) -> u8 {
    v.round().clamp(0.0, 255.0) as u8
}

fn bilinear_resize(img: &RasterImage, out_w: usize, out_h: usize) -> RasterImage {
    let sx = img.width as f64 / out_w as f64;
    let sy = img.height as f64 / out_h as f64;
    let coord = |o: usize, scale: f64, len: usize| {
        let s = ((o as f64 + 0.5) * scale - 0.5).clamp(0.0, (len - 1) as f64);
        let i0 = s.floor() as usize;
        (i0, (i0 + 1).min(len - 1), s - i0 as f64)
    };
    let mut pixels = Vec::with_capacity(out_w * out_h * img.channels);
    for y in 0..out_h {
        let (y0, y1, fy) = coord(y, sy, img.height);
        for x in 0..out_w {
            let (x0, x1, fx) = coord(x, sx, img.width);
            for c in 0..img.channels {
                let top = img.at(x0, y0, c) * (1.0 - fx) + img.at(x1, y0, c) * fx;
                let bottom = img.at(x0, y1, c) * (1.0 - fx) + img.at(x1, y1, c) * fx;
                pixels.push(to_byte(top * (1.0 - fy) + bottom * fy));
            }
        }
    }
    RasterImage {
        width: out_w,
        height: out_h,
        channels: img.channels,
        pixels,
    }
}

/// Size of the scaled content inside an `target × target` canvas.
pub fn scaled_dims(width: usize, height: usize, target: usize) -> (usize, usize) {
    let factor = target as f64 / width.max(height) as f64;
    let scale = |d: usize| ((d as f64 * factor).round() as usize).clamp(1, target);
    if width >= height {
        (target, scale(height))
    } else {
        (scale(width), target)
    }
}

/// Scales the longer side to `target`, keeping the aspect ratio, and centers
/// the result on a `target × target` canvas of `pad_rgb`. Odd padding puts
/// the extra pixel at the bottom/right.
pub fn resize_pad(img: &RasterImage, target: usize, pad_rgb: [u8; 3]) -> Result<RasterImage> {
    if target == 0 {
        return Err(Error::Config("target size must be positive".into()));
    }
    let (sw, sh) = scaled_dims(img.width, img.height, target);
    let scaled = bilinear_resize(img, sw, sh);
    let mut canvas = RasterImage::filled(target, target, img.channels, &img.pad_value(pad_rgb))?;
    let (left, top) = ((target - sw) / 2, (target - sh) / 2);
    let ch = img.channels;
    for y in 0..sh {
        let dst = ((top + y) * target + left) * ch;
        let src = y * sw * ch;
        canvas.pixels[dst..dst + sw * ch].copy_from_slice(&scaled.pixels[src..src + sw * ch]);
    }
    Ok(canvas)
}

pub fn flip_h(img: &RasterImage) -> RasterImage {
    let ch = img.channels;
    let mut pixels = Vec::with_capacity(img.pixels.len());
    for y in 0..img.height {
        for x in (0..img.width).rev() {
            pixels.extend_from_slice(img.pixel(x, y));
        }
    }
    RasterImage {
        pixels,
        channels: ch,
        ..*img
    }
}

/// Rotates about the image center by `degrees` (counter-clockwise on
/// screen). Samples falling outside the source take `pad_rgb`.
pub fn rotate(img: &RasterImage, degrees: f64, pad_rgb: [u8; 3]) -> Result<RasterImage> {
    if degrees.is_nan() || degrees.abs() > MAX_ROTATION_DEGREES {
        return Err(Error::Config(format!(
            "rotation {degrees}° outside ±{MAX_ROTATION_DEGREES}°"
        )));
    }
    if degrees == 0.0 {
        return Ok(img.clone());
    }
    let pad: Vec<f64> = img.pad_value(pad_rgb).into_iter().map(f64::from).collect();
    let (sin, cos) = degrees.to_radians().sin_cos();
    let cx = (img.width as f64 - 1.0) / 2.0;
    let cy = (img.height as f64 - 1.0) / 2.0;
    let tap = |x: i64, y: i64, c: usize| {
        if x < 0 || y < 0 || x >= img.width as i64 || y >= img.height as i64 {
            pad[c]
        } else {
            img.at(x as usize, y as usize, c)
        }
    };
    let mut pixels = Vec::with_capacity(img.pixels.len());
    for y in 0..img.height {
        for x in 0..img.width {
            let (dx, dy) = (x as f64 - cx, y as f64 - cy);
            let src_x = cx + dx * cos - dy * sin;
            let src_y = cy + dx * sin + dy * cos;
            let (x0, y0) = (src_x.floor(), src_y.floor());
            let (fx, fy) = (src_x - x0, src_y - y0);
            let (x0, y0) = (x0 as i64, y0 as i64);
            for c in 0..img.channels {
                let top = tap(x0, y0, c) * (1.0 - fx) + tap(x0 + 1, y0, c) * fx;
                let bottom = tap(x0, y0 + 1, c) * (1.0 - fx) + tap(x0 + 1, y0 + 1, c) * fx;
                pixels.push(to_byte(top * (1.0 - fy) + bottom * fy));
            }
        }
    }
    Ok(RasterImage {
        pixels,
        ..*img
    })
}

/// Scales each channel's deviation from its image-wide mean by `factor`.
pub fn adjust_contrast(img: &RasterImage, factor: f64) -> Result<RasterImage> {
    let (lo, hi) = CONTRAST_RANGE;
    if !(lo..=hi).contains(&factor) {
        return Err(Error::Config(format!("contrast factor {factor} outside [{lo}, {hi}]")));
    }
    let ch = img.channels;
    let n = (img.width * img.height) as f64;
    let means: Vec<f64> = (0..ch)
        .map(|c| {
            img.pixels
                .iter()
                .skip(c)
                .step_by(ch)
                .map(|&v| f64::from(v))
                .sum::<f64>()
                / n
        })
        .collect();
    let pixels = img
        .pixels
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let m = means[i % ch];
            to_byte(m + factor * (f64::from(v) - m))
        })
        .collect();
    Ok(RasterImage {
        pixels,
        ..*img
    })
}

fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    let radius = (3.0 * sigma).ceil() as i64;
    let raw: Vec<f64> = (-radius..=radius)
        .map(|i| (-(i * i) as f64 / (2.0 * sigma * sigma)).exp())
        .collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|w| w / total).collect()
}

/// Separable Gaussian blur, kernel radius `ceil(3σ)`, clamped borders.
pub fn gaussian_blur(img: &RasterImage, sigma: f64) -> Result<RasterImage> {
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(Error::Config(format!("blur sigma {sigma} must be finite and ≥ 0")));
    }
    if sigma == 0.0 {
        return Ok(img.clone());
    }
    let kernel = gaussian_kernel(sigma);
    let radius = (kernel.len() / 2) as i64;
    let (w, h, ch) = (img.width as i64, img.height as i64, img.channels);
    let idx = |x: i64, y: i64, c: usize| ((y * w + x) as usize) * ch + c;

    let mut horizontal = vec![0.0; img.pixels.len()];
    for y in 0..h {
        for x in 0..w {
            for c in 0..ch {
                horizontal[idx(x, y, c)] = kernel
                    .iter()
                    .zip(-radius..=radius)
                    .map(|(k, d)| k * f64::from(img.pixels[idx((x + d).clamp(0, w - 1), y, c)]))
                    .sum();
            }
        }
    }
    let mut pixels = vec![0u8; img.pixels.len()];
    for y in 0..h {
        for x in 0..w {
            for c in 0..ch {
                let v: f64 = kernel
                    .iter()
                    .zip(-radius..=radius)
                    .map(|(k, d)| k * horizontal[idx(x, (y + d).clamp(0, h - 1), c)])
                    .sum();
                pixels[idx(x, y, c)] = to_byte(v);
            }
        }
    }
    Ok(RasterImage {
        pixels,
        ..*img
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AugmentConfig {
    pub flip_prob: f64,
    /// Degrees, within ±45.
    pub rotation_range: (f64, f64),
    pub contrast_range: (f64, f64),
    pub blur_sigma_max: f64,
    pub pad_rgb: [u8; 3],
    pub seed: u64,
}

impl Default for AugmentConfig {
    fn default() -> Self {
        AugmentConfig {
            flip_prob: 0.5,
            rotation_range: (-MAX_ROTATION_DEGREES, MAX_ROTATION_DEGREES),
            contrast_range: CONTRAST_RANGE,
            blur_sigma_max: 1.5,
            pad_rgb: DEFAULT_PAD_RGB,
            seed: 0,
        }
    }
}

impl AugmentConfig {
    /// A config under which [`augment`] returns its input unchanged.
    pub fn identity() -> Self {
        AugmentConfig {
            flip_prob: 0.0,
            rotation_range: (0.0, 0.0),
            contrast_range: (1.0, 1.0),
            blur_sigma_max: 0.0,
            ..AugmentConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.flip_prob) {
            return Err(Error::Config(format!("flip_prob {} outside [0, 1]", self.flip_prob)));
        }
        let (rlo, rhi) = self.rotation_range;
        if !(rlo <= rhi && rlo >= -MAX_ROTATION_DEGREES && rhi <= MAX_ROTATION_DEGREES) {
            return Err(Error::Config(format!("rotation range ({rlo}, {rhi}) outside ±45°")));
        }
        let (clo, chi) = self.contrast_range;
        if !(clo <= chi && clo >= CONTRAST_RANGE.0 && chi <= CONTRAST_RANGE.1) {
            return Err(Error::Config(format!("contrast range ({clo}, {chi}) outside [0.7, 1.3]")));
        }
        if !(self.blur_sigma_max >= 0.0 && self.blur_sigma_max.is_finite()) {
            return Err(Error::Config("blur_sigma_max must be finite and ≥ 0".into()));
        }
        Ok(())
    }
}

/// Parameters drawn for one augmentation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AugmentDraw {
    pub flip: bool,
    pub degrees: f64,
    pub contrast: f64,
    pub blur_sigma: f64,
}

fn lerp((lo, hi): (f64, f64), u: f64) -> f64 {
    if lo == hi {
        lo
    } else {
        lo + (hi - lo) * u
    }
}

pub fn draw_augmentation(config: &AugmentConfig, seed: u64) -> AugmentDraw {
    let mut r = rng::seeded(seed);
    let flip = r.gen::<f64>() < config.flip_prob;
    let degrees = lerp(config.rotation_range, r.gen());
    let contrast = lerp(config.contrast_range, r.gen());
    let blur_sigma = lerp((0.0, config.blur_sigma_max), r.gen());
    AugmentDraw {
        flip,
        degrees,
        contrast,
        blur_sigma,
    }
}

/// Random flip, rotation, contrast and blur, applied in that order.
pub fn augment(img: &RasterImage, config: &AugmentConfig, seed: u64) -> Result<RasterImage> {
    config.validate()?;
    let d = draw_augmentation(config, seed);
    let img = if d.flip { flip_h(img) } else { img.clone() };
    let img = rotate(&img, d.degrees, config.pad_rgb)?;
    let img = adjust_contrast(&img, d.contrast)?;
    gaussian_blur(&img, d.blur_sigma)
}
