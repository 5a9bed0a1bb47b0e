//! Lightmaps, the deviation metric and per-pass reports.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::solver::{Mode, SolverConfig};
use crate::uvraster::{Resolution, TextureGroup};

#[derive(Debug, Clone, PartialEq)]
pub struct Lightmap {
    pub resolution: Resolution,
    pub rgb: Vec<[f32; 3]>,
    /// True where a patch exists.
    pub mask: Vec<bool>,
}

impl Lightmap {
    pub fn new(resolution: Resolution) -> Self {
        let n = resolution.texel_count();
        Self {
            resolution,
            rgb: vec![[0.0; 3]; n],
            mask: vec![false; n],
        }
    }

    /// Uniform map with every texel occupied.
    pub fn uniform(resolution: Resolution, c: [f32; 3]) -> Self {
        let n = resolution.texel_count();
        Self {
            resolution,
            rgb: vec![c; n],
            mask: vec![true; n],
        }
    }

    /// RGB of `lighting` with the texture group's occupancy.
    pub fn from_lighting(tg: &TextureGroup, lighting: &[[f32; 4]]) -> Self {
        Self {
            resolution: tg.resolution,
            rgb: lighting.iter().map(|l| [l[0], l[1], l[2]]).collect(),
            mask: tg.pos.iter().map(|p| p[3] == 1.0).collect(),
        }
    }

    pub fn from_rgb_f64(tg: &TextureGroup, rgb: &[[f64; 3]]) -> Self {
        Self {
            resolution: tg.resolution,
            rgb: rgb.iter().map(|c| c.map(|v| v as f32)).collect(),
            mask: tg.pos.iter().map(|p| p[3] == 1.0).collect(),
        }
    }

    /// Sum of all channels over occupied texels.
    pub fn energy(&self) -> f64 {
        self.rgb
            .iter()
            .zip(&self.mask)
            .filter(|(_, &m)| m)
            .map(|(c, _)| c.iter().map(|&v| v as f64).sum::<f64>())
            .sum()
    }
}

fn check_same(a: &Lightmap, b: &Lightmap) -> Result<()> {
    if a.resolution != b.resolution {
        return Err(Error::ResolutionMismatch {
            left: a.resolution.as_tuple(),
            right: b.resolution.as_tuple(),
        });
    }
    Ok(())
}

fn texel_distance(a: [f32; 3], b: [f32; 3]) -> f64 {
    (0..3)
        .map(|k| (a[k] as f64 - b[k] as f64).powi(2))
        .sum::<f64>()
        .sqrt()
}

/// Deviation from a reference: mean Euclidean RGB distance over all texels.
pub fn dfpr(candidate: &Lightmap, reference: &Lightmap) -> Result<f64> {
    check_same(candidate, reference)?;
    let n = candidate.rgb.len();
    if n == 0 {
        return Ok(0.0);
    }
    let sum: f64 = candidate
        .rgb
        .iter()
        .zip(&reference.rgb)
        .map(|(&a, &b)| texel_distance(a, b))
        .sum();
    Ok(sum / n as f64)
}

/// As [`dfpr`], averaged only over texels occupied in the reference.
pub fn dfpr_masked(candidate: &Lightmap, reference: &Lightmap) -> Result<f64> {
    check_same(candidate, reference)?;
    let (sum, count) = candidate
        .rgb
        .iter()
        .zip(&reference.rgb)
        .zip(&reference.mask)
        .filter(|(_, &m)| m)
        .fold((0.0, 0usize), |(s, c), ((&a, &b), _)| (s + texel_distance(a, b), c + 1));
    Ok(if count == 0 { 0.0 } else { sum / count as f64 })
}

/// Counters and timing of one pass, with the configuration that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PassReport {
    pub pass: u32,
    pub mode: Mode,
    pub rays_traced: u64,
    pub raymarches: u64,
    pub cache_hits: u64,
    pub wall_ms: f64,
    pub energy_sum: f64,
    pub batches: usize,
    pub resolution: [u32; 2],
    pub epsilon: f64,
    pub config: SolverConfig,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn white_vs_black() {
        let r = Resolution::square(4);
        let w = Lightmap::uniform(r, [1.0; 3]);
        let b = Lightmap::uniform(r, [0.0; 3]);
        assert!((dfpr(&w, &b).unwrap() - 3f64.sqrt()).abs() < 1e-12);
        assert_eq!(dfpr(&w, &w).unwrap(), 0.0);
    }

    #[test]
    fn mismatch_rejected() {
        let a = Lightmap::new(Resolution::square(4));
        let b = Lightmap::new(Resolution::square(8));
        assert!(matches!(dfpr(&a, &b), Err(Error::ResolutionMismatch { .. })));
    }

    #[test]
    fn masked_ignores_empty_texels() {
        let r = Resolution::new(2, 1);
        let mut a = Lightmap::uniform(r, [1.0, 0.0, 0.0]);
        let mut b = Lightmap::uniform(r, [0.0; 3]);
        b.mask[1] = false;
        a.rgb[1] = [5.0; 3];
        assert_eq!(dfpr_masked(&a, &b).unwrap(), 1.0);
    }
}
