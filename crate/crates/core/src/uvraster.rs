//! UV-space rasterization of a scene into a [`TextureGroup`].
//!
//! A texel belongs to a triangle when its center lies inside the triangle's
//! UV footprint. Centers exactly on an edge follow the top-left fill rule
//! (rows grow with `v`), so texels on an edge shared by two triangles are
//! claimed exactly once.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::Vec3;
use crate::scene::{Scene, Triangle};

/// Lightmap size in texels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Resolution {
    pub width: u32,
    pub height: u32,
}

impl Resolution {
    pub const fn new(width: u32, height: u32) -> Self {
        Self { width, height }
    }

    pub const fn square(n: u32) -> Self {
        Self::new(n, n)
    }

    #[inline]
    pub fn texel_count(&self) -> usize {
        self.width as usize * self.height as usize
    }

    #[inline]
    pub fn linear(&self, x: u32, y: u32) -> usize {
        x as usize + y as usize * self.width as usize
    }

    #[inline]
    pub fn coords(&self, linear: usize) -> (u32, u32) {
        let w = self.width as usize;
        ((linear % w) as u32, (linear / w) as u32)
    }

    /// UV coordinate of the texel center.
    #[inline]
    pub fn texel_center_uv(&self, x: u32, y: u32) -> [f64; 2] {
        [
            (x as f64 + 0.5) / self.width as f64,
            (y as f64 + 0.5) / self.height as f64,
        ]
    }

    pub fn as_tuple(&self) -> (u32, u32) {
        (self.width, self.height)
    }
}

impl std::fmt::Display for Resolution {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}x{}", self.width, self.height)
    }
}

/// A lightmap texel addressed both ways.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PatchId {
    pub x: u32,
    pub y: u32,
    pub linear: usize,
}

impl PatchId {
    pub fn new(x: u32, y: u32, res: Resolution) -> Self {
        Self {
            x,
            y,
            linear: res.linear(x, y),
        }
    }

    pub fn from_linear(linear: usize, res: Resolution) -> Self {
        let (x, y) = res.coords(linear);
        Self { x, y, linear }
    }
}

/// Marker in [`TextureGroup::owner`] for texels no triangle covers.
pub const NO_OWNER: u32 = u32::MAX;

/// Co-registered UV-space maps describing every patch.
#[derive(Debug, Clone, PartialEq)]
pub struct TextureGroup {
    pub resolution: Resolution,
    /// World position; alpha is 1 for patches, 0 elsewhere.
    pub pos: Vec<[f32; 4]>,
    pub nrm: Vec<[f32; 3]>,
    pub mat: Vec<[f32; 3]>,
    /// World-space patch area.
    pub arf: Vec<f32>,
    pub emission: Vec<[f32; 3]>,
    pub lig_in: Vec<[f32; 4]>,
    pub lig_out: Vec<[f32; 4]>,
    /// Triangle that rasterized each texel, or [`NO_OWNER`].
    pub owner: Vec<u32>,
}

impl TextureGroup {
    /// All-zero maps: no patches.
    pub fn blank(resolution: Resolution) -> Self {
        let n = resolution.texel_count();
        Self {
            resolution,
            pos: vec![[0.0; 4]; n],
            nrm: vec![[0.0; 3]; n],
            mat: vec![[0.0; 3]; n],
            arf: vec![0.0; n],
            emission: vec![[0.0; 3]; n],
            lig_in: vec![[0.0; 4]; n],
            lig_out: vec![[0.0; 4]; n],
            owner: vec![NO_OWNER; n],
        }
    }

    #[inline]
    pub fn is_occupied(&self, linear: usize) -> bool {
        self.pos[linear][3] == 1.0
    }

    pub fn occupied_count(&self) -> usize {
        self.pos.iter().filter(|p| p[3] == 1.0).count()
    }

    /// Linear indices of all patches in row-major order.
    pub fn occupied_indices(&self) -> Vec<usize> {
        (0..self.pos.len()).filter(|&i| self.is_occupied(i)).collect()
    }

    #[inline]
    pub fn position(&self, linear: usize) -> Vec3 {
        let p = self.pos[linear];
        Vec3::new(p[0] as f64, p[1] as f64, p[2] as f64)
    }

    #[inline]
    pub fn normal(&self, linear: usize) -> Vec3 {
        Vec3::from_f32(self.nrm[linear])
    }

    /// Writes a patch by hand. Used to set up synthetic configurations.
    pub fn set_patch(
        &mut self,
        linear: usize,
        position: Vec3,
        normal: Vec3,
        albedo: [f32; 3],
        emission: [f32; 3],
        area: f32,
    ) {
        let p = position.to_f32();
        self.pos[linear] = [p[0], p[1], p[2], 1.0];
        self.nrm[linear] = normal.normalize().to_f32();
        self.mat[linear] = albedo;
        self.emission[linear] = emission;
        self.arf[linear] = area;
        self.lig_in[linear] = [emission[0], emission[1], emission[2], 1.0];
        self.lig_out[linear] = self.lig_in[linear];
    }

    /// Resets both lighting maps to the emission map (alpha = occupancy).
    pub fn reset_lighting(&mut self) {
        for i in 0..self.pos.len() {
            let e = self.emission[i];
            let a = self.pos[i][3];
            self.lig_in[i] = [e[0], e[1], e[2], a];
            self.lig_out[i] = self.lig_in[i];
        }
    }

    pub fn swap_lighting(&mut self) {
        std::mem::swap(&mut self.lig_in, &mut self.lig_out);
    }

    /// `lig_out` with seams sewn, for export.
    pub fn sewn_lig_out(&self) -> Vec<[f32; 4]> {
        sew_seams(self.resolution, &self.pos, &self.lig_out)
    }
}

/// Edge function with a canonical endpoint order, so the value for the edge
/// `b -> a` is exactly the negation of `a -> b`.
#[inline]
fn edge_fn(a: [f64; 2], b: [f64; 2], p: [f64; 2]) -> f64 {
    let cross = |o: [f64; 2], d: [f64; 2], q: [f64; 2]| {
        (d[0] - o[0]) * (q[1] - o[1]) - (d[1] - o[1]) * (q[0] - o[0])
    };
    if (a[0], a[1]) <= (b[0], b[1]) {
        cross(a, b, p)
    } else {
        -cross(b, a, p)
    }
}

/// Calls `f(x, y, barycentrics)` for each texel center covered by the
/// triangle's UV footprint. Barycentrics refer to the triangle's own vertex
/// order. Zero-UV-area triangles cover nothing.
pub fn rasterize_uv<F: FnMut(u32, u32, [f64; 3])>(tri: &Triangle, res: Resolution, mut f: F) {
    let w = res.width as f64;
    let h = res.height as f64;
    let mut v = tri.vertices.map(|vx| [vx.uv[0] * w, vx.uv[1] * h]);
    let mut order = [0usize, 1, 2];
    let mut area = edge_fn(v[0], v[1], v[2]);
    if area == 0.0 || !area.is_finite() {
        return;
    }
    if area < 0.0 {
        v.swap(1, 2);
        order.swap(1, 2);
        area = -area;
    }
    // Edge k is opposite vertex k.
    let edges = [(v[1], v[2]), (v[2], v[0]), (v[0], v[1])];
    let top_left = edges.map(|(a, b)| {
        // Inward normal of a counter-clockwise edge a -> b.
        let nx = -(b[1] - a[1]);
        let ny = b[0] - a[0];
        nx > 0.0 || (nx == 0.0 && ny > 0.0)
    });

    let min_x = v.iter().map(|p| p[0]).fold(f64::INFINITY, f64::min);
    let max_x = v.iter().map(|p| p[0]).fold(f64::NEG_INFINITY, f64::max);
    let min_y = v.iter().map(|p| p[1]).fold(f64::INFINITY, f64::min);
    let max_y = v.iter().map(|p| p[1]).fold(f64::NEG_INFINITY, f64::max);
    let x0 = ((min_x - 0.5).floor().max(0.0)) as u32;
    let y0 = ((min_y - 0.5).floor().max(0.0)) as u32;
    let x1 = ((max_x - 0.5).ceil().min(w - 1.0)).max(0.0) as u32;
    let y1 = ((max_y - 0.5).ceil().min(h - 1.0)).max(0.0) as u32;

    for y in y0..=y1 {
        for x in x0..=x1 {
            let p = [x as f64 + 0.5, y as f64 + 0.5];
            let mut weights = [0.0; 3];
            let mut inside = true;
            for k in 0..3 {
                let e = edge_fn(edges[k].0, edges[k].1, p);
                if e < 0.0 || (e == 0.0 && !top_left[k]) {
                    inside = false;
                    break;
                }
                weights[k] = e / area;
            }
            if inside {
                let mut bary = [0.0; 3];
                for k in 0..3 {
                    bary[order[k]] = weights[k];
                }
                f(x, y, bary);
            }
        }
    }
}

/// Approximate world area of one patch of `triangle`: its world area spread
/// evenly over the texels its UV area accounts for. Zero for zero-UV-area
/// triangles.
pub fn patch_area(triangle: &Triangle, resolution: Resolution) -> f64 {
    let uv_area = triangle.uv_area();
    if uv_area <= 0.0 {
        return 0.0;
    }
    triangle.world_area() / (uv_area * resolution.texel_count() as f64)
}

/// Rasterizes the scene into a fresh texture group. Fails if two triangles
/// claim the same texel.
pub fn build_texture_group(scene: &Scene, resolution: Resolution) -> Result<TextureGroup> {
    let mut tg = TextureGroup::blank(resolution);
    for (index, tri) in scene.triangles().iter().enumerate() {
        let area = patch_area(tri, resolution) as f32;
        if area <= 0.0 {
            continue;
        }
        let material = scene.material_of(tri);
        let albedo = material.albedo.map(|a| a as f32);
        let emission = material.emission.map(|e| e as f32);
        let mut overlap = None;
        rasterize_uv(tri, resolution, |x, y, b| {
            let i = resolution.linear(x, y);
            if tg.owner[i] != NO_OWNER {
                overlap.get_or_insert(Error::UvOverlap {
                    first: tg.owner[i] as usize,
                    second: index,
                    x,
                    y,
                });
                return;
            }
            let [v0, v1, v2] = tri.vertices;
            let p = (v0.position * b[0] + v1.position * b[1] + v2.position * b[2]).to_f32();
            let n = (v0.normal * b[0] + v1.normal * b[1] + v2.normal * b[2]).normalize();
            tg.owner[i] = index as u32;
            tg.pos[i] = [p[0], p[1], p[2], 1.0];
            tg.nrm[i] = n.to_f32();
            tg.mat[i] = albedo;
            tg.emission[i] = emission;
            tg.arf[i] = area;
        });
        if let Some(err) = overlap {
            return Err(err);
        }
    }
    tg.reset_lighting();
    Ok(tg)
}

const NEIGHBORS: [(i32, i32); 8] = [
    (-1, -1),
    (0, -1),
    (1, -1),
    (-1, 0),
    (1, 0),
    (-1, 1),
    (0, 1),
    (1, 1),
];

/// First occupied 8-neighbor of `(x, y)` in row-major neighbor order.
pub fn first_occupied_neighbor(
    res: Resolution,
    pos: &[[f32; 4]],
    x: u32,
    y: u32,
) -> Option<usize> {
    NEIGHBORS.iter().find_map(|&(dx, dy)| {
        let nx = x as i64 + dx as i64;
        let ny = y as i64 + dy as i64;
        if nx < 0 || ny < 0 || nx >= res.width as i64 || ny >= res.height as i64 {
            return None;
        }
        let j = res.linear(nx as u32, ny as u32);
        (pos[j][3] == 1.0).then_some(j)
    })
}

/// Copies lighting onto every non-patch texel that borders a patch. Patches
/// and all alpha values are left untouched; the input is not modified.
pub fn sew_seams(res: Resolution, pos: &[[f32; 4]], lig: &[[f32; 4]]) -> Vec<[f32; 4]> {
    let mut out = lig.to_vec();
    for y in 0..res.height {
        for x in 0..res.width {
            let i = res.linear(x, y);
            if pos[i][3] == 1.0 {
                continue;
            }
            if let Some(j) = first_occupied_neighbor(res, pos, x, y) {
                let src = lig[j];
                out[i] = [src[0], src[1], src[2], lig[i][3]];
            }
        }
    }
    out
}
