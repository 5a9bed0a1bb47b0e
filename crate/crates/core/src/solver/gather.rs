//! Form factors, visibility dispatch and the gathering pass.

use std::sync::atomic::Ordering;

use rayon::prelude::*;

use crate::math::Vec3;
use crate::tracer::Bvh;
use crate::uvraster::{PatchId, TextureGroup};
use crate::voxel::{raymarch_occluded, VoxelMap};

use super::config::{SolverConfig, Visibility};
use super::sampling::{contributors, Contributor, MipPyramid};
use super::viscache::{cached_visibility, traced_visibility, VisCache};
use super::Counters;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FormFactorSample {
    pub f: f64,
    pub cos_i: f64,
    pub cos_j: f64,
    pub r: f64,
}

/// Point-to-patch form factor `A_j cos_i cos_j / (pi r²)`, zero for pairs
/// facing away from each other, capped at `f_max`. `r` is scaled by
/// `distance_factor`.
#[inline]
pub fn form_factor_between(
    pi: Vec3,
    ni: Vec3,
    pj: Vec3,
    nj: Vec3,
    area_j: f64,
    distance_factor: f64,
    f_max: f64,
) -> FormFactorSample {
    let d = pj - pi;
    let len = d.length();
    if len == 0.0 {
        return FormFactorSample {
            f: 0.0,
            cos_i: 0.0,
            cos_j: 0.0,
            r: 0.0,
        };
    }
    let dir = d / len;
    let cos_i = ni.dot(dir);
    let cos_j = -nj.dot(dir);
    let r = len * distance_factor;
    let f = if cos_i <= 0.0 || cos_j <= 0.0 {
        0.0
    } else {
        (area_j * cos_i * cos_j / (std::f64::consts::PI * r * r)).min(f_max)
    };
    FormFactorSample { f, cos_i, cos_j, r }
}

/// Form factor from patch `i` to patch `j` of the texture group.
pub fn form_factor(tg: &TextureGroup, i: PatchId, j: PatchId, cfg: &SolverConfig) -> FormFactorSample {
    form_factor_between(
        tg.position(i.linear),
        tg.normal(i.linear),
        tg.position(j.linear),
        tg.normal(j.linear),
        tg.arf[j.linear] as f64,
        cfg.distance_factor,
        cfg.form_factor_max,
    )
}

/// Read-only state needed to answer visibility queries during a pass.
#[derive(Clone, Copy)]
pub struct VisibilityContext<'a> {
    pub bvh: &'a Bvh,
    pub voxels: Option<&'a VoxelMap>,
    /// Populated cache, or `None` to trace.
    pub cache: Option<&'a VisCache>,
    pub visibility: Visibility,
    pub epsilon: f64,
    pub step_scale: f64,
}

impl VisibilityContext<'_> {
    fn march(&self, tg: &TextureGroup, i: usize, j: usize, counters: &Counters) -> bool {
        counters.raymarches.fetch_add(1, Ordering::Relaxed);
        let vm = self.voxels.expect("voxel visibility needs a voxel map");
        let (lo, hi) = if i < j { (i, j) } else { (j, i) };
        !raymarch_occluded(vm, tg.position(lo), tg.position(hi), self.step_scale)
    }

    fn trace(&self, tg: &TextureGroup, i: usize, j: usize, counters: &Counters) -> bool {
        counters.rays_traced.fetch_add(1, Ordering::Relaxed);
        traced_visibility(tg, self.bvh, i, j, self.epsilon)
    }

    /// Mutual visibility of receiver `i` and contributor `j`.
    #[inline]
    pub fn visible(&self, tg: &TextureGroup, i: usize, j: usize, counters: &Counters) -> bool {
        match self.visibility {
            Visibility::Traced => self.trace(tg, i, j, counters),
            Visibility::Voxel => self.march(tg, i, j, counters),
            Visibility::Hybrid { ratio } => {
                if ((j % 100) as f64) < 100.0 * ratio {
                    self.march(tg, i, j, counters)
                } else {
                    self.trace(tg, i, j, counters)
                }
            }
            Visibility::Cached => match self.cache {
                Some(c) => cached_visibility(c, self.bvh, i, j, tg, false, self.epsilon, counters),
                None => self.trace(tg, i, j, counters),
            },
        }
    }
}

struct Source {
    c: Contributor,
    pos: Vec3,
    nrm: Vec3,
    area: f64,
}

fn gather_patch(
    tg: &TextureGroup,
    i: usize,
    sources: &[Source],
    ctx: &VisibilityContext<'_>,
    cfg: &SolverConfig,
    counters: &Counters,
) -> [f32; 4] {
    let pi = tg.position(i);
    let ni = tg.normal(i);
    let mat = tg.mat[i].map(|m| m as f64);
    let rho = cfg.reflectivity;
    let mut sum = [0.0f64; 3];
    for s in sources {
        let j = s.c.patch;
        if j == i {
            continue;
        }
        if cfg.skip_dark && s.c.lig == [0.0; 3] {
            continue;
        }
        let ff = form_factor_between(pi, ni, s.pos, s.nrm, s.area, cfg.distance_factor, cfg.form_factor_max);
        if cfg.cull_backfacing && ff.f == 0.0 {
            continue;
        }
        if !ctx.visible(tg, i, j, counters) || ff.f == 0.0 {
            continue;
        }
        for k in 0..3 {
            let mut add = s.c.weight * s.c.lig[k] * mat[k] * rho * ff.f;
            if let Some(cap) = cfg.contribution_clamp {
                add = add.min(cap);
            }
            sum[k] += add;
        }
    }
    let e = tg.emission[i];
    [
        (e[0] as f64 + sum[0]) as f32,
        (e[1] as f64 + sum[1]) as f32,
        (e[2] as f64 + sum[2]) as f32,
        1.0,
    ]
}

/// Texel ranges processed per batch: row strips when a whole row fits the ray
/// budget, shorter runs otherwise.
pub fn batch_ranges(tg: &TextureGroup, contributor_count: usize, ray_limit: u64) -> Vec<std::ops::Range<usize>> {
    let n = tg.resolution.texel_count();
    let width = tg.resolution.width as usize;
    let per = (ray_limit / contributor_count.max(1) as u64).max(1) as usize;
    let size = if per >= width { per - per % width } else { per };
    (0..n).step_by(size.max(1)).map(|s| s..(s + size).min(n)).collect()
}

/// One gathering pass: writes `lig_out` for every patch from `lig_in`.
/// Runs on the current rayon pool; returns the number of batches.
pub fn gather_pass(
    tg: &mut TextureGroup,
    ctx: &VisibilityContext<'_>,
    cfg: &SolverConfig,
    pass_index: u64,
    mips: Option<&MipPyramid>,
    counters: &Counters,
) -> usize {
    let sources: Vec<Source> = contributors(tg, cfg, pass_index, mips)
        .into_iter()
        .map(|c| Source {
            c,
            pos: tg.position(c.patch),
            nrm: tg.normal(c.patch),
            area: tg.arf[c.patch] as f64,
        })
        .collect();
    let batches = batch_ranges(tg, sources.len(), cfg.batch_ray_limit);
    let mut out = vec![[0.0f32; 4]; tg.resolution.texel_count()];
    for range in &batches {
        let view: &TextureGroup = tg;
        let results: Vec<(usize, [f32; 4])> = range
            .clone()
            .into_par_iter()
            .filter(|&i| view.is_occupied(i))
            .map(|i| (i, gather_patch(view, i, &sources, ctx, cfg, counters)))
            .collect();
        for (i, v) in results {
            out[i] = v;
        }
    }
    tg.lig_out = out;
    batches.len()
}
