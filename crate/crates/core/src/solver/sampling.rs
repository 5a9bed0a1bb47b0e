//! Contributor selection and lighting mipmaps.

use crate::error::{Error, Result};
use crate::uvraster::{PatchId, TextureGroup};

use super::config::{Mode, SolverConfig};

/// A sample gathered by every receiver in a pass.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Contributor {
    /// Texel supplying position, normal and area.
    pub patch: usize,
    /// Number of patches the sample stands for.
    pub weight: f64,
    /// Lighting carried by the sample.
    pub lig: [f64; 3],
}

/// One level of an occupancy-weighted lighting pyramid.
#[derive(Debug, Clone, PartialEq)]
pub struct MipLevel {
    pub width: u32,
    pub height: u32,
    pub rgb: Vec<[f64; 3]>,
    /// Number of occupied base texels below each texel.
    pub occupancy: Vec<f64>,
}

impl MipLevel {
    #[inline]
    pub fn index(&self, x: u32, y: u32) -> usize {
        x as usize + y as usize * self.width as usize
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MipPyramid {
    pub levels: Vec<MipLevel>,
}

impl MipPyramid {
    pub fn level(&self, l: usize) -> &MipLevel {
        &self.levels[l]
    }

    /// Lighting of base texel `(x, y)` as seen from level `l`.
    pub fn sample(&self, l: usize, x: u32, y: u32) -> [f64; 3] {
        let lv = &self.levels[l];
        lv.rgb[lv.index(x >> l, y >> l)]
    }
}

/// Builds `levels` minified copies of `lig_in`. Each parent is the
/// occupancy-weighted mean of its (up to four) children and carries their
/// summed occupancy; unoccupied children contribute nothing.
pub fn build_lig_mipmaps(tg: &TextureGroup, levels: u32) -> Result<MipPyramid> {
    let res = tg.resolution;
    let max_levels = res.width.min(res.height).max(1).ilog2();
    if levels > max_levels {
        return Err(Error::Config(format!(
            "{levels} mip levels requested, at most {max_levels} fit {res}"
        )));
    }
    let base = MipLevel {
        width: res.width,
        height: res.height,
        rgb: tg
            .lig_in
            .iter()
            .map(|l| [l[0] as f64, l[1] as f64, l[2] as f64])
            .collect(),
        occupancy: tg.pos.iter().map(|p| p[3] as f64).collect(),
    };
    let mut out = vec![base];
    for _ in 0..levels {
        let prev = out.last().unwrap();
        let (w, h) = (prev.width.div_ceil(2), prev.height.div_ceil(2));
        let mut rgb = vec![[0.0; 3]; (w * h) as usize];
        let mut occupancy = vec![0.0; (w * h) as usize];
        for y in 0..h {
            for x in 0..w {
                let mut sum = [0.0; 3];
                let mut occ = 0.0;
                for (dx, dy) in [(0, 0), (1, 0), (0, 1), (1, 1)] {
                    let (cx, cy) = (2 * x + dx, 2 * y + dy);
                    if cx >= prev.width || cy >= prev.height {
                        continue;
                    }
                    let c = prev.index(cx, cy);
                    let o = prev.occupancy[c];
                    for k in 0..3 {
                        sum[k] += o * prev.rgb[c][k];
                    }
                    occ += o;
                }
                let i = (x + y * w) as usize;
                if occ > 0.0 {
                    rgb[i] = sum.map(|s| s / occ);
                }
                occupancy[i] = occ;
            }
        }
        out.push(MipLevel {
            width: w,
            height: h,
            rgb,
            occupancy,
        });
    }
    Ok(MipPyramid { levels: out })
}

pub(crate) fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Counter-based hash of `(window, pass, seed)`.
pub fn window_hash(window: u64, pass_index: u64, seed: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(window) ^ pass_index) ^ seed)
}

fn lig_rgb(tg: &TextureGroup, i: usize) -> [f64; 3] {
    let l = tg.lig_in[i];
    [l[0] as f64, l[1] as f64, l[2] as f64]
}

/// Occupied texels of window `(wx, wy)` in row-major order.
fn window_patches(tg: &TextureGroup, side: u32, wx: u32, wy: u32, buf: &mut Vec<usize>) {
    buf.clear();
    let res = tg.resolution;
    for y in wy * side..((wy + 1) * side).min(res.height) {
        for x in wx * side..((wx + 1) * side).min(res.width) {
            let i = res.linear(x, y);
            if tg.is_occupied(i) {
                buf.push(i);
            }
        }
    }
}

/// The pass's contributor list, independent of the receiver. Receivers skip
/// the entry whose `patch` is their own.
///
/// `mips` must hold at least `log2(window side)` levels in mipmapped mode.
pub fn contributors(
    tg: &TextureGroup,
    cfg: &SolverConfig,
    pass_index: u64,
    mips: Option<&MipPyramid>,
) -> Vec<Contributor> {
    let res = tg.resolution;
    match cfg.mode {
        Mode::Full => tg
            .occupied_indices()
            .into_iter()
            .map(|patch| Contributor {
                patch,
                weight: 1.0,
                lig: lig_rgb(tg, patch),
            })
            .collect(),
        Mode::Subdiv => tg
            .occupied_indices()
            .into_iter()
            .filter(|&i| tg.lig_in[i][3] > 0.0)
            .map(|patch| Contributor {
                patch,
                weight: tg.lig_in[patch][3] as f64,
                lig: lig_rgb(tg, patch),
            })
            .collect(),
        Mode::Stride | Mode::MonteCarlo | Mode::Mipmapped => {
            let side = cfg.window_side().max(1);
            let (nx, ny) = (res.width.div_ceil(side), res.height.div_ceil(side));
            let level = side.ilog2() as usize;
            let mut out = Vec::with_capacity((nx * ny) as usize);
            let mut buf = Vec::new();
            for wy in 0..ny {
                for wx in 0..nx {
                    window_patches(tg, side, wx, wy, &mut buf);
                    if buf.is_empty() {
                        continue;
                    }
                    let window = wx as u64 + wy as u64 * nx as u64;
                    out.push(match cfg.mode {
                        Mode::Stride => Contributor {
                            patch: buf[0],
                            weight: cfg.window_m as f64,
                            lig: lig_rgb(tg, buf[0]),
                        },
                        Mode::MonteCarlo => {
                            let h = window_hash(window, pass_index, cfg.seed);
                            let patch = buf[(h % buf.len() as u64) as usize];
                            Contributor {
                                patch,
                                weight: cfg.window_m as f64,
                                lig: lig_rgb(tg, patch),
                            }
                        }
                        _ => {
                            let lv = mips
                                .expect("mipmapped sampling needs a pyramid")
                                .level(level);
                            let k = lv.index(wx, wy);
                            Contributor {
                                patch: buf[0],
                                weight: lv.occupancy[k],
                                lig: lv.rgb[k],
                            }
                        }
                    });
                }
            }
            out
        }
        Mode::Directional => Vec::new(),
    }
}

/// Contributors seen by `shooter`: the pass list minus the shooter itself.
pub fn select_contributors(
    tg: &TextureGroup,
    cfg: &SolverConfig,
    shooter: PatchId,
    pass_index: u64,
    mips: Option<&MipPyramid>,
) -> Vec<(PatchId, f64)> {
    contributors(tg, cfg, pass_index, mips)
        .into_iter()
        .filter(|c| c.patch != shooter.linear)
        .map(|c| (PatchId::from_linear(c.patch, tg.resolution), c.weight))
        .collect()
}
