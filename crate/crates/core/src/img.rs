//! Square RGB image tensors in [-1, 1] plus PNG round-tripping.

use crate::nn::Tensor;
use std::fs::File;
use std::io::BufWriter;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ImgError {
    #[error("image must be square, got {h}x{w}")]
    NotSquare { h: usize, w: usize },
    #[error("image values must lie in [-1, 1]")]
    OutOfRange,
    #[error("expected 3 channels, got {0}")]
    BadChannels(usize),
    #[error("png: {0}")]
    Png(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

/// Square H x H x 3 image with every element in [-1, 1], stored CHW.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageTensor {
    data: Tensor,
}

impl ImageTensor {
    pub fn new(data: Tensor) -> Result<Self, ImgError> {
        let (c, h, w) = data.dims3();
        if c != 3 {
            return Err(ImgError::BadChannels(c));
        }
        if h != w {
            return Err(ImgError::NotSquare { h, w });
        }
        if !data.data().iter().all(|v| v.is_finite() && (-1.0..=1.0).contains(v)) {
            return Err(ImgError::OutOfRange);
        }
        Ok(ImageTensor { data })
    }

    /// Build from a tensor whose values may drift slightly outside the unit
    /// range (e.g. accumulated float error), clamping into [-1, 1].
    pub fn from_clamped(mut data: Tensor) -> Result<Self, ImgError> {
        for v in data.data_mut() {
            *v = v.clamp(-1.0, 1.0);
        }
        ImageTensor::new(data)
    }

    pub fn resolution(&self) -> usize {
        self.data.shape()[1]
    }

    pub fn tensor(&self) -> &Tensor {
        &self.data
    }

    pub fn into_tensor(self) -> Tensor {
        self.data
    }

    /// 8-bit pixels map to [-1, 1] via v / 127.5 - 1.
    pub fn from_rgb8(resolution: usize, pixels: &[u8]) -> Result<Self, ImgError> {
        if pixels.len() != resolution * resolution * 3 {
            return Err(ImgError::BadChannels(pixels.len() / (resolution * resolution)));
        }
        let mut t = Tensor::zeros(vec![3, resolution, resolution]);
        for y in 0..resolution {
            for x in 0..resolution {
                for c in 0..3 {
                    let p = pixels[(y * resolution + x) * 3 + c] as f64;
                    t.set3(c, y, x, p / 127.5 - 1.0);
                }
            }
        }
        ImageTensor::new(t)
    }

    pub fn to_rgb8(&self) -> Vec<u8> {
        let r = self.resolution();
        let mut out = vec![0u8; r * r * 3];
        for y in 0..r {
            for x in 0..r {
                for c in 0..3 {
                    let v = (self.data.at3(c, y, x) + 1.0) * 127.5;
                    out[(y * r + x) * 3 + c] = v.round().clamp(0.0, 255.0) as u8;
                }
            }
        }
        out
    }

    pub fn save_png(&self, path: &Path) -> Result<(), ImgError> {
        save_rgb8_png(path, self.resolution(), self.resolution(), &self.to_rgb8())
    }

    pub fn load_png(path: &Path) -> Result<Self, ImgError> {
        let file = File::open(path)?;
        let decoder = png::Decoder::new(file);
        let mut reader = decoder.read_info().map_err(|e| ImgError::Png(e.to_string()))?;
        let mut buf = vec![0u8; reader.output_buffer_size()];
        let info = reader.next_frame(&mut buf).map_err(|e| ImgError::Png(e.to_string()))?;
        let (w, h) = (info.width as usize, info.height as usize);
        if w != h {
            return Err(ImgError::NotSquare { h, w });
        }
        let rgb: Vec<u8> = match info.color_type {
            png::ColorType::Rgb => buf[..w * h * 3].to_vec(),
            png::ColorType::Rgba => {
                let mut v = Vec::with_capacity(w * h * 3);
                for px in buf[..w * h * 4].chunks(4) {
                    v.extend_from_slice(&px[..3]);
                }
                v
            }
            png::ColorType::Grayscale => {
                let mut v = Vec::with_capacity(w * h * 3);
                for &g in &buf[..w * h] {
                    v.extend_from_slice(&[g, g, g]);
                }
                v
            }
            other => return Err(ImgError::Png(format!("unsupported color type {other:?}"))),
        };
        ImageTensor::from_rgb8(w, &rgb)
    }
}

/// Write raw RGB8 rows to a PNG file.
pub fn save_rgb8_png(path: &Path, width: usize, height: usize, rgb: &[u8]) -> Result<(), ImgError> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    let file = File::create(path)?;
    let w = BufWriter::new(file);
    let mut encoder = png::Encoder::new(w, width as u32, height as u32);
    encoder.set_color(png::ColorType::Rgb);
    encoder.set_depth(png::BitDepth::Eight);
    let mut writer = encoder.write_header().map_err(|e| ImgError::Png(e.to_string()))?;
    writer.write_image_data(rgb).map_err(|e| ImgError::Png(e.to_string()))?;
    Ok(())
}

/// Area-average a CHW tensor down to `target` x `target`, weighting source
/// pixels by their fractional overlap with each destination cell.
pub fn area_downsample(src: &Tensor, target: usize) -> Tensor {
    let (c, h, w) = src.dims3();
    assert_eq!(h, w, "area_downsample expects square input");
    if h == target {
        return src.clone();
    }
    let scale = h as f64 / target as f64;
    let mut out = Tensor::zeros(vec![c, target, target]);
    for oy in 0..target {
        let y0 = oy as f64 * scale;
        let y1 = (oy + 1) as f64 * scale;
        for ox in 0..target {
            let x0 = ox as f64 * scale;
            let x1 = (ox + 1) as f64 * scale;
            let mut weight_sum = 0.0;
            let mut acc = [0.0; 8];
            let sy0 = y0.floor() as usize;
            let sy1 = (y1.ceil() as usize).min(h);
            let sx0 = x0.floor() as usize;
            let sx1 = (x1.ceil() as usize).min(w);
            for sy in sy0..sy1 {
                let wy = (y1.min((sy + 1) as f64) - y0.max(sy as f64)).max(0.0);
                for sx in sx0..sx1 {
                    let wx = (x1.min((sx + 1) as f64) - x0.max(sx as f64)).max(0.0);
                    let wgt = wy * wx;
                    if wgt == 0.0 {
                        continue;
                    }
                    weight_sum += wgt;
                    for ch in 0..c {
                        acc[ch] += wgt * src.at3(ch, sy, sx);
                    }
                }
            }
            for ch in 0..c {
                out.set3(ch, oy, ox, acc[ch] / weight_sum);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rgb8_roundtrip_extremes() {
        let img = ImageTensor::from_rgb8(2, &[0, 255, 128, 0, 255, 128, 0, 255, 128, 0, 255, 128])
            .unwrap();
        assert_eq!(img.tensor().at3(0, 0, 0), -1.0);
        assert_eq!(img.tensor().at3(1, 0, 0), 1.0);
        let back = img.to_rgb8();
        assert_eq!(back[0], 0);
        assert_eq!(back[1], 255);
        assert_eq!(back[2], 128);
    }

    #[test]
    fn rejects_rectangular() {
        let t = Tensor::zeros(vec![3, 4, 5]);
        assert!(ImageTensor::new(t).is_err());
    }

    #[test]
    fn downsample_constant_stays_constant() {
        let src = Tensor::from_vec(vec![3, 7, 7], vec![0.25; 3 * 49]);
        let out = area_downsample(&src, 4);
        assert_eq!(out.shape(), &[3, 4, 4]);
        for v in out.data() {
            assert!((v - 0.25).abs() < 1e-12);
        }
    }

    #[test]
    fn downsample_preserves_mean_for_integer_ratio() {
        let src = Tensor::from_fn(vec![3, 8, 8], |i| ((i % 17) as f64) / 10.0);
        let out = area_downsample(&src, 4);
        assert!((out.mean() - src.mean()).abs() < 1e-12);
    }
}
