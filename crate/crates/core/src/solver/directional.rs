//! Gathering along a fixed set of hemisphere directions with closest-hit
//! queries.

use std::sync::atomic::Ordering;

use rayon::prelude::*;

use crate::hemisampler::DirectionSet;
use crate::math::orthonormal_basis;
use crate::scene::Scene;
use crate::tracer::{Bvh, Ray};
use crate::uvraster::{first_occupied_neighbor, TextureGroup};

use super::config::{DirectionalWeighting, SolverConfig};
use super::sampling::MipPyramid;
use super::Counters;

/// Texel hit by a closest-hit query: the texel under the hit point's UV, or
/// its first occupied neighbor when that texel holds no patch.
pub fn resolve_hit_texel(tg: &TextureGroup, scene: &Scene, triangle: usize, u: f64, v: f64) -> Option<usize> {
    let tri = &scene.triangles()[triangle];
    let w = 1.0 - u - v;
    let uv = [0, 1].map(|k| w * tri.vertices[0].uv[k] + u * tri.vertices[1].uv[k] + v * tri.vertices[2].uv[k]);
    let res = tg.resolution;
    let x = ((uv[0] * res.width as f64).floor().max(0.0) as u32).min(res.width - 1);
    let y = ((uv[1] * res.height as f64).floor().max(0.0) as u32).min(res.height - 1);
    let i = res.linear(x, y);
    if tg.is_occupied(i) {
        Some(i)
    } else {
        first_occupied_neighbor(res, &tg.pos, x, y)
    }
}

/// One directional pass over every patch: `|dirs|` closest-hit rays each.
/// `mips` supplies blurred lighting when `cfg.blur_level > 0`.
#[allow(clippy::too_many_arguments)]
pub fn directional_pass(
    tg: &mut TextureGroup,
    scene: &Scene,
    bvh: &Bvh,
    dirs: &DirectionSet,
    cfg: &SolverConfig,
    epsilon: f64,
    mips: Option<&MipPyramid>,
    counters: &Counters,
) {
    let view: &TextureGroup = tg;
    let count = dirs.len() as f64;
    let rho = cfg.reflectivity;
    let level = cfg.blur_level as usize;
    let t_max = 4.0 * scene.bounds().diagonal().max(epsilon) + 1.0;
    let lig_of = |j: usize| -> [f64; 3] {
        match mips {
            Some(m) if level > 0 => {
                let (x, y) = view.resolution.coords(j);
                m.sample(level, x, y)
            }
            _ => {
                let l = view.lig_in[j];
                [l[0] as f64, l[1] as f64, l[2] as f64]
            }
        }
    };
    let results: Vec<(usize, [f32; 4])> = view
        .occupied_indices()
        .into_par_iter()
        .map(|i| {
            let p = view.position(i);
            let n = view.normal(i);
            let (t, b) = orthonormal_basis(n);
            let mat = view.mat[i].map(|m| m as f64);
            let mut sum = [0.0f64; 3];
            for d in &dirs.directions {
                let w = t * d.x + b * d.y + n * d.z;
                counters.rays_traced.fetch_add(1, Ordering::Relaxed);
                let Some(hit) = bvh.closest_hit(&Ray::new(p, w, epsilon, t_max)) else {
                    continue;
                };
                let Some(j) = resolve_hit_texel(view, scene, hit.triangle_index, hit.u, hit.v) else {
                    continue;
                };
                let lig = lig_of(j);
                let scale = match cfg.directional_weighting {
                    DirectionalWeighting::Verbatim => {
                        let r2 = (p - view.position(j)).length_squared() * cfg.distance_factor.powi(2);
                        let cos = if cfg.drop_cosine { 1.0 } else { w.dot(n) };
                        let mut g = if r2 > 0.0 { cos / r2 } else { 0.0 };
                        if let Some(cap) = cfg.contribution_clamp {
                            g = g.min(cap);
                        }
                        g * rho / (std::f64::consts::PI * count)
                    }
                    DirectionalWeighting::Radiometric => rho / count,
                };
                for k in 0..3 {
                    sum[k] += scale * mat[k] * lig[k];
                }
            }
            let e = view.emission[i];
            (
                i,
                [
                    (e[0] as f64 + sum[0]) as f32,
                    (e[1] as f64 + sum[1]) as f32,
                    (e[2] as f64 + sum[2]) as f32,
                    1.0,
                ],
            )
        })
        .collect();
    let mut out = vec![[0.0f32; 4]; view.resolution.texel_count()];
    for (i, v) in results {
        out[i] = v;
    }
    tg.lig_out = out;
}
