//! Independent reference implementations used as test oracles.
#![allow(dead_code)]

use std::path::{Path, PathBuf};

use radbake::math::Vec3;
use radbake::scene::{save_scene, Scene, Triangle};

/// Ray/plane intersection followed by area-ratio barycentrics. Returns
/// `(t, u, v)` with `u`, `v` the weights of the 2nd and 3rd vertex, or `None`
/// for rays parallel to the plane and points outside the triangle. No
/// interval test.
pub fn plane_hit(tri: &Triangle, o: Vec3, d: Vec3) -> Option<(f64, f64, f64)> {
    let [p0, p1, p2] = tri.positions();
    let n = (p1 - p0).cross(p2 - p0);
    let nn = n.dot(n);
    let denom = n.dot(d);
    if denom.abs() < 1e-12 * nn.sqrt() {
        return None;
    }
    let t = n.dot(p0 - o) / denom;
    let q = o + d * t;
    let u = n.dot((q - p0).cross(p2 - p0)) / nn;
    let v = n.dot((p1 - p0).cross(q - p0)) / nn;
    if u < 0.0 || v < 0.0 || u + v > 1.0 {
        return None;
    }
    Some((t, u, v))
}

/// Smallest barycentric coordinate of the plane hit point; small values
/// mark rays grazing an edge, where floating-point outcomes may legitimately
/// differ between methods.
pub fn edge_margin(tri: &Triangle, o: Vec3, d: Vec3) -> f64 {
    let [p0, p1, p2] = tri.positions();
    let n = (p1 - p0).cross(p2 - p0);
    let nn = n.dot(n);
    let denom = n.dot(d);
    if denom.abs() < 1e-9 * nn.sqrt() {
        return 0.0;
    }
    let t = n.dot(p0 - o) / denom;
    let q = o + d * t;
    let u = n.dot((q - p0).cross(p2 - p0)) / nn;
    let v = n.dot((p1 - p0).cross(q - p0)) / nn;
    u.abs().min(v.abs()).min((1.0 - u - v).abs())
}

/// Linear-scan nearest hit in `[t_min, t_max]`, ties to the lower index.
pub fn linear_closest(tris: &[Triangle], o: Vec3, d: Vec3, t_min: f64, t_max: f64) -> Option<(f64, usize)> {
    let mut best: Option<(f64, usize)> = None;
    for (i, tri) in tris.iter().enumerate() {
        if let Some((t, _, _)) = plane_hit(tri, o, d) {
            if t >= t_min && t <= t_max && best.is_none_or(|(bt, _)| t < bt) {
                best = Some((t, i));
            }
        }
    }
    best
}

/// Linear-scan segment occlusion with the tracer's interval convention.
pub fn linear_occluded(tris: &[Triangle], a: Vec3, b: Vec3, eps: f64) -> bool {
    let delta = b - a;
    let dist = delta.length();
    if dist <= 2.0 * eps {
        return false;
    }
    linear_closest(tris, a, delta / dist, eps, dist - 2.0 * eps).is_some()
}

/// True when the query sits on a decision boundary: some plane crossing
/// within `band` of an interval endpoint, or within `edge` (barycentric) of
/// a triangle edge.
pub fn is_boundary_case(tris: &[Triangle], o: Vec3, d: Vec3, t_min: f64, t_max: f64, band: f64, edge: f64) -> bool {
    tris.iter().any(|tri| {
        let [p0, p1, p2] = tri.positions();
        let n = (p1 - p0).cross(p2 - p0);
        let denom = n.dot(d);
        if denom.abs() < 1e-9 * n.length() {
            return false;
        }
        let t = n.dot(p0 - o) / denom;
        let near_end = (t - t_min).abs() <= band || (t - t_max).abs() <= band;
        let in_range = t >= t_min - band && t <= t_max + band;
        near_end || (in_range && edge_margin(tri, o, d) <= edge)
    })
}

/// Per-texel mean Euclidean distance, written without the library.
pub fn mean_rgb_distance(a: &[[f32; 3]], b: &[[f32; 3]]) -> f64 {
    let mut sum = 0.0;
    for (x, y) in a.iter().zip(b) {
        let mut s = 0.0;
        for k in 0..3 {
            let d = x[k] as f64 - y[k] as f64;
            s += d * d;
        }
        sum += s.sqrt();
    }
    sum / a.len() as f64
}

/// Cantor pairing written out directly in 128-bit arithmetic.
pub fn cantor_reference(x: u64, y: u64) -> u128 {
    let (x, y) = (x as u128, y as u128);
    x + (x + y) * (x + y + 1) / 2
}

/// Writes `scene` into `dir` and returns the OBJ path.
pub fn write_scene(scene: &Scene, dir: &Path, name: &str) -> PathBuf {
    let path = dir.join(format!("{name}.obj"));
    save_scene(scene, &path).unwrap();
    path
}

/// Dense point-sampling voxelizer over the clip-space mapping with the
/// dominant-axis swizzle skipped: cells are indexed in world axis order.
pub fn reference_voxel_cells(scene: &Scene, r: u32, samples_per_cell: u32) -> Vec<[u32; 3]> {
    let b = scene.bounds();
    let ext = b.extent();
    let mut cells = std::collections::BTreeSet::new();
    for tri in scene.triangles() {
        let [p0, p1, p2] = tri.positions();
        let longest = [(p1 - p0).length(), (p2 - p1).length(), (p0 - p2).length()]
            .into_iter()
            .fold(0.0, f64::max);
        let min_cell = [ext.x, ext.y, ext.z]
            .into_iter()
            .filter(|&e| e > 0.0)
            .fold(f64::INFINITY, f64::min)
            / r as f64;
        let steps = ((longest / min_cell).ceil() as u32 * samples_per_cell).max(1);
        for i in 0..=steps {
            for j in 0..=steps - i {
                let (u, v) = (i as f64 / steps as f64, j as f64 / steps as f64);
                let p = p0 + (p1 - p0) * u + (p2 - p0) * v;
                let cell = [0, 1, 2].map(|k| {
                    let e = ext[k];
                    if e <= 0.0 {
                        return 0;
                    }
                    let g = (p[k] - b.min[k]) / e * r as f64;
                    (g.floor().max(0.0) as u32).min(r - 1)
                });
                cells.insert(cell);
            }
        }
    }
    cells.into_iter().collect()
}
