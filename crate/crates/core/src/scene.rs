//! Triangle scenes with per-vertex UVs and flat emissive materials.
//!
//! The on-disk format is a restricted OBJ (`v`, `vt`, `vn`, `f a/b/c ...`,
//! `usemtl`, `mtllib`) plus a JSON material table. When the OBJ has no
//! `mtllib` line the table is looked up next to it as `<stem>.json`.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::{Aabb, Vec3};
use crate::uvraster::{self, Resolution};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Vertex {
    pub position: Vec3,
    pub normal: Vec3,
    pub uv: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Material {
    pub name: String,
    pub albedo: [f64; 3],
    pub emission: [f64; 3],
}

impl Material {
    pub fn new(name: impl Into<String>, albedo: [f64; 3], emission: [f64; 3]) -> Self {
        Self {
            name: name.into(),
            albedo,
            emission,
        }
    }

    fn validate(&self) -> Result<()> {
        let bad = |reason: &str| Error::InvalidMaterial {
            name: self.name.clone(),
            reason: reason.to_string(),
        };
        if self.albedo.iter().any(|a| !(0.0..=1.0).contains(a)) {
            return Err(bad("albedo must lie in [0, 1]"));
        }
        if self.emission.iter().any(|e| !e.is_finite() || *e < 0.0) {
            return Err(bad("emission must be finite and non-negative"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Triangle {
    pub vertices: [Vertex; 3],
    pub material: usize,
}

impl Triangle {
    pub fn positions(&self) -> [Vec3; 3] {
        [
            self.vertices[0].position,
            self.vertices[1].position,
            self.vertices[2].position,
        ]
    }

    pub fn world_area(&self) -> f64 {
        let [a, b, c] = self.positions();
        0.5 * (b - a).cross(c - a).length()
    }

    /// Area of the triangle in the unit UV square.
    pub fn uv_area(&self) -> f64 {
        let [a, b, c] = self.vertices.map(|v| v.uv);
        0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])).abs()
    }

    pub fn bounds(&self) -> Aabb {
        Aabb::from_points(self.positions())
    }

    pub fn centroid(&self) -> Vec3 {
        let [a, b, c] = self.positions();
        (a + b + c) / 3.0
    }
}

/// Immutable triangle soup. Construct through [`Scene::new`] or [`load_scene`].
#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    triangles: Vec<Triangle>,
    materials: Vec<Material>,
    bounds: Aabb,
}

impl Scene {
    /// Validates and normalizes the input. Empty triangle lists are allowed
    /// here; only file loading rejects them.
    pub fn new(mut triangles: Vec<Triangle>, materials: Vec<Material>) -> Result<Self> {
        for m in &materials {
            m.validate()?;
        }
        for (index, tri) in triangles.iter_mut().enumerate() {
            if tri.material >= materials.len() {
                return Err(Error::Config(format!(
                    "triangle {index} references material {} but only {} exist",
                    tri.material,
                    materials.len()
                )));
            }
            for v in &mut tri.vertices {
                if !v.position.is_finite() || !v.normal.is_finite() {
                    return Err(Error::Config(format!("triangle {index} has non-finite data")));
                }
                if v.uv.iter().any(|c| !(0.0..=1.0).contains(c)) {
                    return Err(Error::Config(format!(
                        "triangle {index} has uv {:?} outside [0, 1]",
                        v.uv
                    )));
                }
                let len2 = v.normal.length_squared();
                if len2 == 0.0 {
                    return Err(Error::Config(format!("triangle {index} has a zero normal")));
                }
                // Already-unit normals are left alone so save/load is an identity.
                if (len2 - 1.0).abs() > 4.0 * f64::EPSILON {
                    v.normal = v.normal / len2.sqrt();
                }
            }
            if !(tri.world_area() > 0.0) {
                return Err(Error::DegenerateTriangle { index });
            }
        }
        let bounds = Aabb::from_points(triangles.iter().flat_map(|t| t.positions()));
        Ok(Self {
            triangles,
            materials,
            bounds,
        })
    }

    pub fn triangles(&self) -> &[Triangle] {
        &self.triangles
    }

    pub fn materials(&self) -> &[Material] {
        &self.materials
    }

    /// World AABB; `Aabb::EMPTY` for an empty scene.
    pub fn bounds(&self) -> Aabb {
        self.bounds
    }

    pub fn is_empty(&self) -> bool {
        self.triangles.is_empty()
    }

    pub fn material_of(&self, tri: &Triangle) -> &Material {
        &self.materials[tri.material]
    }
}

/// A texel claimed by more than one triangle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct OverlapReport {
    pub x: u32,
    pub y: u32,
    pub first: usize,
    pub second: usize,
}

/// Lists every texel that two or more triangles rasterize to at `resolution`.
pub fn validate_uv_layout(scene: &Scene, resolution: Resolution) -> Vec<OverlapReport> {
    let mut owner = vec![u32::MAX; resolution.texel_count()];
    let mut reports = Vec::new();
    for (index, tri) in scene.triangles().iter().enumerate() {
        uvraster::rasterize_uv(tri, resolution, |x, y, _| {
            let slot = &mut owner[resolution.linear(x, y)];
            if *slot == u32::MAX {
                *slot = index as u32;
            } else {
                reports.push(OverlapReport {
                    x,
                    y,
                    first: *slot as usize,
                    second: index,
                });
            }
        });
    }
    reports
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SceneFormat {
    ObjSubset,
}

pub fn load_scene(path: impl AsRef<Path>, format: SceneFormat) -> Result<Scene> {
    match format {
        SceneFormat::ObjSubset => load_obj(path.as_ref()),
    }
}

fn parse_floats<const N: usize>(path: &Path, line: usize, parts: &[&str]) -> Result<[f64; N]> {
    if parts.len() < N {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            line,
            message: format!("expected {N} numbers"),
        });
    }
    let mut out = [0.0; N];
    for (o, p) in out.iter_mut().zip(parts) {
        *o = p.parse().map_err(|_| Error::Parse {
            path: path.to_path_buf(),
            line,
            message: format!("bad number {p:?}"),
        })?;
    }
    Ok(out)
}

fn resolve_index(path: &Path, line: usize, raw: &str, len: usize) -> Result<usize> {
    let parse_err = || Error::Parse {
        path: path.to_path_buf(),
        line,
        message: format!("bad index {raw:?}"),
    };
    let i: i64 = raw.parse().map_err(|_| parse_err())?;
    let resolved = if i > 0 {
        i - 1
    } else if i < 0 {
        len as i64 + i
    } else {
        return Err(parse_err());
    };
    if resolved < 0 || resolved as usize >= len {
        return Err(parse_err());
    }
    Ok(resolved as usize)
}

fn load_obj(path: &Path) -> Result<Scene> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;

    let mut positions = Vec::new();
    let mut uvs = Vec::new();
    let mut normals = Vec::new();
    // (line, material name, [(v, vt, vn); 3])
    let mut faces: Vec<(usize, Option<String>, [(usize, usize, usize); 3])> = Vec::new();
    let mut current_material: Option<String> = None;
    let mut mtllib: Option<PathBuf> = None;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split_whitespace();
        let keyword = parts.next().unwrap_or("");
        let rest: Vec<&str> = parts.collect();
        match keyword {
            "v" => positions.push(Vec3::from_array(parse_floats::<3>(path, line_no, &rest)?)),
            "vt" => uvs.push(parse_floats::<2>(path, line_no, &rest)?),
            "vn" => normals.push(Vec3::from_array(parse_floats::<3>(path, line_no, &rest)?)),
            "usemtl" => current_material = Some(rest.join(" ")),
            "mtllib" => mtllib = Some(PathBuf::from(rest.join(" "))),
            "f" => {
                if rest.len() != 3 {
                    return Err(Error::NonTriangleFace {
                        path: path.to_path_buf(),
                        line: line_no,
                        count: rest.len(),
                    });
                }
                let mut corners = [(0, 0, 0); 3];
                for (corner, token) in corners.iter_mut().zip(&rest) {
                    let fields: Vec<&str> = token.split('/').collect();
                    let vt = fields.get(1).copied().unwrap_or("");
                    if vt.is_empty() {
                        return Err(Error::MissingUv {
                            path: path.to_path_buf(),
                            line: line_no,
                        });
                    }
                    let vn = fields.get(2).copied().unwrap_or("");
                    if vn.is_empty() {
                        return Err(Error::MissingNormal {
                            path: path.to_path_buf(),
                            line: line_no,
                        });
                    }
                    *corner = (
                        resolve_index(path, line_no, fields[0], positions.len())?,
                        resolve_index(path, line_no, vt, uvs.len())?,
                        resolve_index(path, line_no, vn, normals.len())?,
                    );
                }
                faces.push((line_no, current_material.clone(), corners));
            }
            // Object/group/smoothing records carry nothing we use.
            "o" | "g" | "s" => {}
            other => {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    line: line_no,
                    message: format!("unsupported record {other:?}"),
                })
            }
        }
    }

    if faces.is_empty() {
        return Err(Error::EmptyScene);
    }

    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    let material_path = match mtllib {
        Some(p) => dir.join(p),
        None => path.with_extension("json"),
    };
    let materials = load_materials(&material_path)?;
    if materials.is_empty() {
        return Err(Error::InvalidMaterial {
            name: material_path.display().to_string(),
            reason: "material table is empty".into(),
        });
    }

    let mut triangles = Vec::with_capacity(faces.len());
    for (_, material, corners) in faces {
        let material = match material {
            None => 0,
            Some(name) => materials
                .iter()
                .position(|m| m.name == name)
                .ok_or(Error::UnknownMaterial { name })?,
        };
        let vertices = corners.map(|(v, t, n)| Vertex {
            position: positions[v],
            normal: normals[n],
            uv: uvs[t],
        });
        triangles.push(Triangle { vertices, material });
    }
    Scene::new(triangles, materials)
}

pub fn load_materials(path: &Path) -> Result<Vec<Material>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        line: e.line(),
        message: e.to_string(),
    })
}

/// Writes `scene` as `<path>` plus a `<stem>.json` material table, referenced
/// through `mtllib`. Floats use the shortest round-tripping representation.
pub fn save_scene(scene: &Scene, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let material_path = path.with_extension("json");
    let material_name = material_path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();

    let mut out = String::new();
    let _ = writeln!(out, "mtllib {material_name}");
    for tri in scene.triangles() {
        for v in &tri.vertices {
            let _ = writeln!(out, "v {} {} {}", v.position.x, v.position.y, v.position.z);
            let _ = writeln!(out, "vt {} {}", v.uv[0], v.uv[1]);
            let _ = writeln!(out, "vn {} {} {}", v.normal.x, v.normal.y, v.normal.z);
        }
    }
    let mut current = None;
    for (i, tri) in scene.triangles().iter().enumerate() {
        if current != Some(tri.material) {
            let _ = writeln!(out, "usemtl {}", scene.materials()[tri.material].name);
            current = Some(tri.material);
        }
        let base = 3 * i + 1;
        let _ = writeln!(
            out,
            "f {0}/{0}/{0} {1}/{1}/{1} {2}/{2}/{2}",
            base,
            base + 1,
            base + 2
        );
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))?;
    let json = serde_json::to_string_pretty(scene.materials())
        .map_err(|e| Error::Format(e.to_string()))?;
    fs::write(&material_path, json).map_err(|e| Error::io(&material_path, e))?;
    Ok(())
}
