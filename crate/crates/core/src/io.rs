//! `.rtex` float textures and 8-bit PNG export.

use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::metrics::Lightmap;
use crate::uvraster::Resolution;

const RTEX_MAGIC: &[u8; 4] = b"RTEX";

/// Row-major float texture with interleaved channels.
#[derive(Debug, Clone, PartialEq)]
pub struct RtexImage {
    pub width: u32,
    pub height: u32,
    pub channels: u32,
    pub data: Vec<f32>,
}

impl RtexImage {
    pub fn new(width: u32, height: u32, channels: u32, data: Vec<f32>) -> Result<Self> {
        let expected = width as usize * height as usize * channels as usize;
        if data.len() != expected {
            return Err(Error::Format(format!(
                "{width}x{height}x{channels} texture needs {expected} floats, got {}",
                data.len()
            )));
        }
        Ok(Self {
            width,
            height,
            channels,
            data,
        })
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(16 + 4 * self.data.len());
        out.extend_from_slice(RTEX_MAGIC);
        for v in [self.width, self.height, self.channels] {
            out.extend_from_slice(&v.to_le_bytes());
        }
        for v in &self.data {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < 16 {
            return Err(Error::Truncated {
                expected: 16,
                found: bytes.len(),
            });
        }
        if &bytes[..4] != RTEX_MAGIC {
            return Err(Error::Format("not an RTEX file (bad magic)".into()));
        }
        let word = |k: usize| u32::from_le_bytes(bytes[4 + 4 * k..8 + 4 * k].try_into().unwrap());
        let (width, height, channels) = (word(0), word(1), word(2));
        let count = (width as u64) * (height as u64) * (channels as u64);
        let expected = 16 + 4 * count;
        if (bytes.len() as u64) < expected {
            return Err(Error::Truncated {
                expected: expected as usize,
                found: bytes.len(),
            });
        }
        let data = bytes[16..expected as usize]
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
            .collect();
        Self::new(width, height, channels, data)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_bytes()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes)
    }
}

/// Lightmap as a 4-channel texture: RGB plus occupancy.
pub fn lightmap_to_rtex(map: &Lightmap) -> RtexImage {
    let data = map
        .rgb
        .iter()
        .zip(&map.mask)
        .flat_map(|(c, &m)| [c[0], c[1], c[2], if m { 1.0 } else { 0.0 }])
        .collect();
    RtexImage {
        width: map.resolution.width,
        height: map.resolution.height,
        channels: 4,
        data,
    }
}

/// Reads a lightmap from a 3- or 4-channel texture. Without a fourth channel
/// every texel counts as occupied.
pub fn rtex_to_lightmap(img: &RtexImage) -> Result<Lightmap> {
    let c = img.channels as usize;
    if c != 3 && c != 4 && img.data.is_empty() {
        return Ok(Lightmap::new(Resolution::new(img.width, img.height)));
    }
    if c != 3 && c != 4 {
        return Err(Error::Format(format!("lightmap needs 3 or 4 channels, got {c}")));
    }
    let res = Resolution::new(img.width, img.height);
    let mut map = Lightmap::new(res);
    for (i, px) in img.data.chunks_exact(c).enumerate() {
        map.rgb[i] = [px[0], px[1], px[2]];
        map.mask[i] = c == 3 || px[3] > 0.0;
    }
    Ok(map)
}

pub fn export_rtex(map: &Lightmap, path: impl AsRef<Path>) -> Result<()> {
    lightmap_to_rtex(map).save(path)
}

pub fn import_rtex(path: impl AsRef<Path>) -> Result<Lightmap> {
    rtex_to_lightmap(&RtexImage::load(path)?)
}

/// `round(255 min(v / clamp_to, 1))`, halves rounded up, negatives to 0.
#[inline]
pub fn quantize(v: f32, clamp_to: f64) -> u8 {
    let x = (v as f64 / clamp_to).clamp(0.0, 1.0) * 255.0;
    (x + 0.5).floor() as u8
}

/// Writes 8-bit RGB data as PNG.
pub fn write_png_rgb8(path: impl AsRef<Path>, width: u32, height: u32, data: &[u8]) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = std::io::BufWriter::new(file);
    let mut enc = png::Encoder::new(&mut w, width, height);
    enc.set_color(png::ColorType::Rgb);
    enc.set_depth(png::BitDepth::Eight);
    let img_err = |e: png::EncodingError| Error::Image(format!("{}: {e}", path.display()));
    enc.write_header()
        .and_then(|mut wr| wr.write_image_data(data))
        .map_err(img_err)?;
    w.flush().map_err(|e| Error::io(path, e))
}

/// Bilinear magnification by an integer factor, sampling at texel centers
/// with edge clamping.
pub fn upscale_bilinear(rgb: &[[f32; 3]], res: Resolution, factor: u32) -> (Resolution, Vec<[f32; 3]>) {
    if factor <= 1 {
        return (res, rgb.to_vec());
    }
    let out_res = Resolution::new(res.width * factor, res.height * factor);
    let mut out = Vec::with_capacity(out_res.texel_count());
    let at = |x: i64, y: i64| {
        let x = x.clamp(0, res.width as i64 - 1) as u32;
        let y = y.clamp(0, res.height as i64 - 1) as u32;
        rgb[res.linear(x, y)]
    };
    for oy in 0..out_res.height {
        let fy = (oy as f64 + 0.5) / factor as f64 - 0.5;
        let (y0, ty) = (fy.floor() as i64, fy - fy.floor());
        for ox in 0..out_res.width {
            let fx = (ox as f64 + 0.5) / factor as f64 - 0.5;
            let (x0, tx) = (fx.floor() as i64, fx - fx.floor());
            let (a, b, c, d) = (at(x0, y0), at(x0 + 1, y0), at(x0, y0 + 1), at(x0 + 1, y0 + 1));
            let mut px = [0.0f32; 3];
            for k in 0..3 {
                let top = a[k] as f64 * (1.0 - tx) + b[k] as f64 * tx;
                let bot = c[k] as f64 * (1.0 - tx) + d[k] as f64 * tx;
                px[k] = (top * (1.0 - ty) + bot * ty) as f32;
            }
            out.push(px);
        }
    }
    (out_res, out)
}

/// 8-bit PNG of a lightmap, linearly clamped at `clamp_to`, optionally
/// magnified by `upscale`.
pub fn export_png(map: &Lightmap, path: impl AsRef<Path>, clamp_to: f64, upscale: u32) -> Result<()> {
    if !(clamp_to > 0.0) {
        return Err(Error::Config(format!("clamp_to must be positive, got {clamp_to}")));
    }
    let (res, rgb) = upscale_bilinear(&map.rgb, map.resolution, upscale);
    let bytes: Vec<u8> = rgb.iter().flat_map(|c| c.map(|v| quantize(v, clamp_to))).collect();
    write_png_rgb8(path, res.width, res.height, &bytes)
}
