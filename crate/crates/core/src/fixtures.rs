//! Hand-built scenes used by the tests, the acceptance suite and the CLI demos.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::math::Vec3;
use crate::scene::{Material, Scene, Triangle, Vertex};

/// Side length of one atlas cell in the box fixture (4×4 grid).
pub const BOX_ATLAS_CELL: f64 = 0.25;
/// UV margin on each side of every island in the box fixture.
pub const BOX_ATLAS_PAD: f64 = 1.0 / 128.0;
/// Number of quads (islands) in the box fixture.
pub const BOX_QUADS: usize = 7;

/// Fraction of the UV square covered by the box fixture's islands.
pub fn box_atlas_coverage() -> f64 {
    let side = BOX_ATLAS_CELL - 2.0 * BOX_ATLAS_PAD;
    BOX_QUADS as f64 * side * side
}

/// Emission of the box fixture's light quad (per channel).
pub const BOX_EMISSION: f64 = 8.0;
pub const BOX_ALBEDO: f64 = 0.75;

struct Quad {
    origin: Vec3,
    e1: Vec3,
    e2: Vec3,
    normal: Vec3,
    cell: (u32, u32),
    material: usize,
}

fn quad_triangles(q: &Quad) -> [Triangle; 2] {
    let side = BOX_ATLAS_CELL - 2.0 * BOX_ATLAS_PAD;
    let u0 = q.cell.0 as f64 * BOX_ATLAS_CELL + BOX_ATLAS_PAD;
    let v0 = q.cell.1 as f64 * BOX_ATLAS_CELL + BOX_ATLAS_PAD;
    let corner = |s: f64, t: f64| Vertex {
        position: q.origin + q.e1 * s + q.e2 * t,
        normal: q.normal,
        uv: [u0 + s * side, v0 + t * side],
    };
    let c = [
        corner(0.0, 0.0),
        corner(1.0, 0.0),
        corner(1.0, 1.0),
        corner(0.0, 1.0),
    ];
    [
        Triangle {
            vertices: [c[0], c[1], c[2]],
            material: q.material,
        },
        Triangle {
            vertices: [c[0], c[2], c[3]],
            material: q.material,
        },
    ]
}

fn box_quads(light_material: usize, wall_material: usize) -> Vec<Quad> {
    let x = Vec3::new(1.0, 0.0, 0.0);
    let y = Vec3::new(0.0, 1.0, 0.0);
    let z = Vec3::new(0.0, 0.0, 1.0);
    let w = wall_material;
    vec![
        // floor, ceiling
        Quad { origin: Vec3::ZERO, e1: x, e2: y, normal: z, cell: (0, 0), material: w },
        Quad { origin: z, e1: x, e2: y, normal: -z, cell: (1, 0), material: w },
        // x = 0, x = 1
        Quad { origin: Vec3::ZERO, e1: y, e2: z, normal: x, cell: (2, 0), material: w },
        Quad { origin: x, e1: y, e2: z, normal: -x, cell: (3, 0), material: w },
        // y = 0, y = 1
        Quad { origin: Vec3::ZERO, e1: x, e2: z, normal: y, cell: (0, 1), material: w },
        Quad { origin: y, e1: x, e2: z, normal: -y, cell: (1, 1), material: w },
        // downward-facing light just below the ceiling
        Quad {
            origin: Vec3::new(0.3, 0.3, 0.98),
            e1: x * 0.4,
            e2: y * 0.4,
            normal: -z,
            cell: (2, 1),
            material: light_material,
        },
    ]
}

fn build(quads: &[Quad], materials: Vec<Material>) -> Scene {
    let triangles = quads.iter().flat_map(quad_triangles).collect();
    Scene::new(triangles, materials).expect("fixture scene is valid")
}

/// Closed unit box (z up, inward normals) with a square emitter hanging under
/// the ceiling: 14 triangles, 2 materials, 7 UV islands on a 4×4 atlas grid.
pub fn box_scene() -> Scene {
    let materials = vec![
        Material::new("white", [BOX_ALBEDO; 3], [0.0; 3]),
        Material::new("light", [BOX_ALBEDO; 3], [BOX_EMISSION; 3]),
    ];
    build(&box_quads(1, 0), materials)
}

/// The box with every surface emitting `emission` (a "furnace").
pub fn furnace_box_scene(albedo: f64, emission: f64) -> Scene {
    let materials = vec![Material::new("glow", [albedo; 3], [emission; 3])];
    build(&box_quads(0, 0), materials)
}

/// Island names of the box fixture; island `k` owns triangles `2k` and `2k + 1`.
pub const BOX_WALL_NAMES: [&str; 7] = [
    "floor", "ceiling", "wall_x0", "wall_x1", "wall_y0", "wall_y1", "light",
];

/// Single upward-facing unit quad whose UVs cover the whole map.
pub fn full_cover_plane() -> Scene {
    let x = Vec3::new(1.0, 0.0, 0.0);
    let y = Vec3::new(0.0, 1.0, 0.0);
    let v = |p: Vec3, uv: [f64; 2]| Vertex {
        position: p,
        normal: Vec3::new(0.0, 0.0, 1.0),
        uv,
    };
    let c = [
        v(Vec3::ZERO, [0.0, 0.0]),
        v(x, [1.0, 0.0]),
        v(x + y, [1.0, 1.0]),
        v(y, [0.0, 1.0]),
    ];
    let triangles = vec![
        Triangle { vertices: [c[0], c[1], c[2]], material: 0 },
        Triangle { vertices: [c[0], c[2], c[3]], material: 0 },
    ];
    Scene::new(triangles, vec![Material::new("white", [0.5; 3], [1.0; 3])])
        .expect("fixture scene is valid")
}

/// Flat triangle at height `z` whose world xy coordinates equal its UVs.
pub fn uv_triangle(uv: [[f64; 2]; 3], z: f64) -> Triangle {
    let vertices = uv.map(|t| Vertex {
        position: Vec3::new(t[0], t[1], z),
        normal: Vec3::new(0.0, 0.0, 1.0),
        uv: t,
    });
    Triangle { vertices, material: 0 }
}

/// `count` random, non-degenerate triangles inside the unit cube. UVs are
/// arbitrary; these scenes are for visibility tests only.
pub fn random_triangle_scene(count: usize, seed: u64) -> Scene {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut triangles = Vec::with_capacity(count);
    while triangles.len() < count {
        let center = Vec3::new(rng.random(), rng.random(), rng.random());
        let size: f64 = rng.random_range(0.02..0.25);
        let mut corner = || {
            center
                + Vec3::new(
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                ) * size
        };
        let p = [corner(), corner(), corner()];
        let n = (p[1] - p[0]).cross(p[2] - p[0]);
        if n.length() < 1e-6 {
            continue;
        }
        let n = n.normalize();
        let uv = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
        let vertices = [0, 1, 2].map(|k| Vertex {
            position: p[k],
            normal: n,
            uv: uv[k],
        });
        triangles.push(Triangle { vertices, material: 0 });
    }
    Scene::new(triangles, vec![Material::new("grey", [0.5; 3], [0.0; 3])])
        .expect("random scene is valid")
}
