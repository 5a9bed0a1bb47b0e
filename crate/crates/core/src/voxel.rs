//! Binary occupancy grid of the scene and approximate visibility by
//! raymarching through it.

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::math::{Aabb, Vec3};
use crate::scene::{Scene, Triangle};

pub const MIN_RESOLUTION: u32 = 2;
pub const MAX_RESOLUTION: u32 = 512;
pub const DEFAULT_STEP_SCALE: f64 = 0.5;
const MAGIC: &[u8; 4] = b"RVOX";

/// Dense `r × r × r` occupancy bits, x-fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct VoxelMap {
    resolution: u32,
    bits: Vec<u64>,
    bounds: Aabb,
}

impl VoxelMap {
    pub fn empty(resolution: u32, bounds: Aabb) -> Self {
        let cells = (resolution as usize).pow(3);
        Self {
            resolution,
            bits: vec![0; cells.div_ceil(64)],
            bounds,
        }
    }

    pub fn resolution(&self) -> u32 {
        self.resolution
    }

    pub fn bounds(&self) -> Aabb {
        self.bounds
    }

    #[inline]
    fn index(&self, x: u32, y: u32, z: u32) -> usize {
        let r = self.resolution as usize;
        x as usize + r * (y as usize + r * z as usize)
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32, z: u32) -> bool {
        let i = self.index(x, y, z);
        self.bits[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn set(&mut self, x: u32, y: u32, z: u32) {
        let i = self.index(x, y, z);
        self.bits[i / 64] |= 1 << (i % 64);
    }

    pub fn count_set(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Scene position to clip space `[-1, 1]³`. Axes of zero extent map to 0.
    pub fn world_to_clip(&self, v: Vec3) -> Vec3 {
        let ext = self.bounds.extent();
        let c = |p: f64, lo: f64, e: f64| if e > 0.0 { 2.0 * (p - lo) / e - 1.0 } else { 0.0 };
        Vec3::new(
            c(v.x, self.bounds.min.x, ext.x),
            c(v.y, self.bounds.min.y, ext.y),
            c(v.z, self.bounds.min.z, ext.z),
        )
    }

    /// Scene position to continuous grid coordinates: `P_min -> 0`, `P_max -> r`.
    pub fn world_to_grid(&self, v: Vec3) -> Vec3 {
        let g = self.world_to_clip(v);
        (g + Vec3::ONE) * (0.5 * self.resolution as f64)
    }

    /// Cell containing a grid-space point, clamped into the grid.
    #[inline]
    pub fn cell_of(&self, g: Vec3) -> [u32; 3] {
        let hi = self.resolution as f64 - 1.0;
        let c = |v: f64| v.floor().clamp(0.0, hi) as u32;
        [c(g.x), c(g.y), c(g.z)]
    }

    /// Cell containing a scene position.
    pub fn cell_of_world(&self, v: Vec3) -> [u32; 3] {
        self.cell_of(self.world_to_grid(v))
    }

    /// World-space edge lengths of one cell.
    pub fn cell_size(&self) -> Vec3 {
        self.bounds.extent() / self.resolution as f64
    }

    pub fn write_to(&self, mut w: impl Write) -> std::io::Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&self.resolution.to_le_bytes())?;
        let nbytes = (self.resolution as usize).pow(3).div_ceil(8);
        let bytes: Vec<u8> = self.bits.iter().flat_map(|w| w.to_le_bytes()).take(nbytes).collect();
        w.write_all(&bytes)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = std::io::BufWriter::new(file);
        self.write_to(&mut w)
            .and_then(|_| w.flush())
            .map_err(|e| Error::io(path, e))
    }

    /// Reads an `RVOX` dump. The file carries no bounds; `bounds` is attached
    /// to the result.
    pub fn read_from(mut r: impl Read, bounds: Aabb) -> Result<Self> {
        let mut data = Vec::new();
        r.read_to_end(&mut data)
            .map_err(|e| Error::Format(format!("voxel dump: {e}")))?;
        if data.len() < 8 {
            return Err(Error::Truncated {
                expected: 8,
                found: data.len(),
            });
        }
        if &data[..4] != MAGIC {
            return Err(Error::Format("voxel dump: bad magic".into()));
        }
        let res = u32::from_le_bytes(data[4..8].try_into().unwrap());
        if res > MAX_RESOLUTION {
            return Err(Error::Format(format!("voxel dump: resolution {res} too large")));
        }
        let nbytes = (res as usize).pow(3).div_ceil(8);
        if data.len() < 8 + nbytes {
            return Err(Error::Truncated {
                expected: 8 + nbytes,
                found: data.len(),
            });
        }
        let mut vm = VoxelMap::empty(res, bounds);
        for (i, &b) in data[8..8 + nbytes].iter().enumerate() {
            vm.bits[i / 8] |= (b as u64) << (8 * (i % 8));
        }
        Ok(vm)
    }
}

/// Permutation putting the dominant axis of `n` last. Self-inverse.
fn swizzle_for(n: Vec3) -> [usize; 3] {
    let a = n.abs();
    if a.x >= a.y && a.x >= a.z {
        [2, 1, 0]
    } else if a.y >= a.z {
        [0, 2, 1]
    } else {
        [0, 1, 2]
    }
}

#[inline]
fn swz(v: Vec3, p: [usize; 3]) -> Vec3 {
    Vec3::new(v[p[0]], v[p[1]], v[p[2]])
}

fn edge(a: Vec3, b: Vec3, px: f64, py: f64) -> f64 {
    (b.x - a.x) * (py - a.y) - (b.y - a.y) * (px - a.x)
}

fn mark_triangle(vm: &mut VoxelMap, tri: &Triangle) {
    let r = vm.resolution as f64;
    let g = tri.positions().map(|p| vm.world_to_grid(p));
    let mut mark = |p: Vec3| {
        let c = vm.cell_of(p);
        vm.set(c[0], c[1], c[2]);
    };

    // Vertices and edges at half-cell steps, so slivers and sub-cell
    // triangles still leave a footprint.
    for k in 0..3 {
        let (a, b) = (g[k], g[(k + 1) % 3]);
        let steps = ((b - a).length() * 2.0).ceil().max(1.0) as usize;
        for s in 0..=steps {
            mark(a + (b - a) * (s as f64 / steps as f64));
        }
    }

    let n = (g[1] - g[0]).cross(g[2] - g[0]);
    if n.length_squared() == 0.0 {
        return;
    }
    let perm = swizzle_for(n);
    let q = g.map(|p| swz(p, perm));
    let qn = swz(n, perm);
    let area = edge(q[0], q[1], q[2].x, q[2].y);
    if area == 0.0 || qn.z == 0.0 {
        return;
    }
    let lo = q[0].min(q[1]).min(q[2]);
    let hi = q[0].max(q[1]).max(q[2]);
    let x0 = (lo.x - 0.5).ceil().max(0.0) as i64;
    let x1 = (hi.x - 0.5).floor().min(r - 1.0) as i64;
    let y0 = (lo.y - 0.5).ceil().max(0.0) as i64;
    let y1 = (hi.y - 0.5).floor().min(r - 1.0) as i64;
    let sign = area.signum();
    for cy in y0..=y1 {
        let py = cy as f64 + 0.5;
        for cx in x0..=x1 {
            let px = cx as f64 + 0.5;
            let w0 = edge(q[1], q[2], px, py) * sign;
            let w1 = edge(q[2], q[0], px, py) * sign;
            let w2 = edge(q[0], q[1], px, py) * sign;
            if w0 < 0.0 || w1 < 0.0 || w2 < 0.0 {
                continue;
            }
            // depth from the plane through q[0]
            let z = q[0].z - (qn.x * (px - q[0].x) + qn.y * (py - q[0].y)) / qn.z;
            let frag = Vec3::new(px, py, z.clamp(0.0, r - 1e-9));
            mark(swz(frag, perm));
        }
    }
}

/// Voxelizes every triangle of `scene` into an `r³` grid spanning the scene
/// bounds. Each triangle is swizzled so its dominant normal axis becomes z,
/// rasterized at cell centers over x/y, and the fragments are written back
/// in the original axis order.
pub fn voxelize(scene: &Scene, resolution: u32) -> Result<VoxelMap> {
    if !(MIN_RESOLUTION..=MAX_RESOLUTION).contains(&resolution) {
        return Err(Error::Config(format!(
            "voxel resolution {resolution} outside [{MIN_RESOLUTION}, {MAX_RESOLUTION}]"
        )));
    }
    let mut vm = VoxelMap::empty(resolution, scene.bounds());
    for tri in scene.triangles() {
        mark_triangle(&mut vm, tri);
    }
    Ok(vm)
}

/// True iff a sample strictly between `a` and `b` falls in an occupied cell.
/// Samples are spaced `step_scale` cells apart, placed symmetrically around
/// the midpoint, and any sample within one cell of either endpoint is
/// skipped.
pub fn raymarch_occluded(vm: &VoxelMap, a: Vec3, b: Vec3, step_scale: f64) -> bool {
    let ga = vm.world_to_grid(a);
    let gb = vm.world_to_grid(b);
    let d = gb - ga;
    let len = d.length();
    if len <= 2.0 {
        return false;
    }
    let mid = (ga + gb) * 0.5;
    let half = 0.5 * len;
    let r = vm.resolution as f64;
    let inside = |p: Vec3| p.x >= 0.0 && p.y >= 0.0 && p.z >= 0.0 && p.x < r && p.y < r && p.z < r;
    let test = |p: Vec3| {
        if !inside(p) || (p - ga).length() < 1.0 || (p - gb).length() < 1.0 {
            return false;
        }
        let c = vm.cell_of(p);
        vm.get(c[0], c[1], c[2])
    };
    if test(mid) {
        return true;
    }
    let mut k = 1.0;
    loop {
        let s = k * step_scale;
        if s >= half {
            return false;
        }
        let off = d * (s / len);
        if test(mid + off) || test(mid - off) {
            return true;
        }
        k += 1.0;
    }
}
