//! Dense matrix radiosity, used as a reference for small lightmaps.

use crate::error::{Error, Result};
use crate::tracer::Bvh;
use crate::uvraster::TextureGroup;

use super::config::SolverConfig;
use super::viscache::traced_visibility;

pub const MAX_DENSE_PATCHES: usize = 4096;

/// Row-major `k × k` matrix of `F(i, j) V(i, j)` over the occupied patches,
/// in row-major texel order. Each unordered pair is traced once; the
/// mirrored entry follows from reciprocity (`F(j, i) = F(i, j) A_i / A_j`,
/// taken before the form-factor cap).
pub fn form_factor_matrix(tg: &TextureGroup, bvh: &Bvh, cfg: &SolverConfig, epsilon: f64) -> Result<(Vec<usize>, Vec<f64>)> {
    let occ = tg.occupied_indices();
    let k = occ.len();
    if k > MAX_DENSE_PATCHES {
        return Err(Error::TooManyPatches {
            count: k,
            limit: MAX_DENSE_PATCHES,
        });
    }
    let mut m = vec![0.0; k * k];
    for a in 0..k {
        let (ia, pa, na) = (occ[a], tg.position(occ[a]), tg.normal(occ[a]));
        let area_a = tg.arf[ia] as f64;
        for b in a + 1..k {
            let ib = occ[b];
            let d = tg.position(ib) - pa;
            let len = d.length();
            if len == 0.0 {
                continue;
            }
            let dir = d / len;
            let cos_a = na.dot(dir);
            let cos_b = -tg.normal(ib).dot(dir);
            if cos_a <= 0.0 || cos_b <= 0.0 {
                continue;
            }
            if !traced_visibility(tg, bvh, ia, ib, epsilon) {
                continue;
            }
            let r = len * cfg.distance_factor;
            let g = cos_a * cos_b / (std::f64::consts::PI * r * r);
            m[a * k + b] = (g * tg.arf[ib] as f64).min(cfg.form_factor_max);
            m[b * k + a] = (g * area_a).min(cfg.form_factor_max);
        }
    }
    Ok((occ, m))
}

/// Truncated Neumann series `L_k = L_e + rho diag(mat) (F V) L_{k-1}`,
/// `L_0 = L_e`, evaluated for `bounces` steps. Returns RGB per texel; texels
/// without a patch are zero. The contribution clamp does not apply.
pub fn classical_solve(
    tg: &TextureGroup,
    bvh: &Bvh,
    bounces: u32,
    cfg: &SolverConfig,
    epsilon: f64,
) -> Result<Vec<[f64; 3]>> {
    let (occ, m) = form_factor_matrix(tg, bvh, cfg, epsilon)?;
    let k = occ.len();
    let emission: Vec<[f64; 3]> = occ.iter().map(|&i| tg.emission[i].map(|e| e as f64)).collect();
    let mut l = emission.clone();
    for _ in 0..bounces {
        let mut next = emission.clone();
        for a in 0..k {
            let row = &m[a * k..(a + 1) * k];
            let mut acc = [0.0; 3];
            for (f, lb) in row.iter().zip(&l) {
                for c in 0..3 {
                    acc[c] += f * lb[c];
                }
            }
            let mat = tg.mat[occ[a]];
            for c in 0..3 {
                next[a][c] += cfg.reflectivity * mat[c] as f64 * acc[c];
            }
        }
        l = next;
    }
    let mut out = vec![[0.0; 3]; tg.resolution.texel_count()];
    for (a, &i) in occ.iter().enumerate() {
        out[i] = l[a];
    }
    Ok(out)
}
