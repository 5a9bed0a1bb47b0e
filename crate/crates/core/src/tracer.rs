//! Software ray tracing over a binary BVH: occlusion (any-hit) and
//! closest-hit queries.

use crate::math::{Aabb, Vec3};
use crate::scene::{Scene, Triangle};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ray {
    pub origin: Vec3,
    /// Unit length.
    pub direction: Vec3,
    pub t_min: f64,
    pub t_max: f64,
}

impl Ray {
    /// Builds a ray, normalizing `direction`.
    pub fn new(origin: Vec3, direction: Vec3, t_min: f64, t_max: f64) -> Self {
        Self {
            origin,
            direction: direction.normalize(),
            t_min,
            t_max,
        }
    }

    #[inline]
    pub fn at(&self, t: f64) -> Vec3 {
        self.origin + self.direction * t
    }

    pub fn is_valid(&self) -> bool {
        self.t_min >= 0.0
            && self.t_min < self.t_max
            && (self.direction.length() - 1.0).abs() < 1e-9
            && self.origin.is_finite()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hit {
    pub t: f64,
    pub u: f64,
    pub v: f64,
    pub triangle_index: usize,
}

/// Triangle in the form Möller-Trumbore wants.
#[derive(Debug, Clone, Copy)]
struct TriData {
    v0: Vec3,
    e1: Vec3,
    e2: Vec3,
    /// Unnormalized plane normal `e1 × e2` and its offset `n · v0`.
    n: Vec3,
    nd: f64,
    /// Parallel-ray threshold on the determinant, scaled by `|e1 × e2|`.
    det_eps: f64,
}

impl TriData {
    fn new(p: [Vec3; 3]) -> Self {
        let e1 = p[1] - p[0];
        let e2 = p[2] - p[0];
        let n = e1.cross(e2);
        Self {
            v0: p[0],
            e1,
            e2,
            n,
            nd: n.dot(p[0]),
            det_eps: 1e-12 * n.length(),
        }
    }

    /// Cheap rejection by the plane crossing distance. Conservative: the
    /// slack keeps every hit the full test would accept.
    #[inline(always)]
    fn plane_rejects(&self, origin: Vec3, dir: Vec3, t_min: f64, t_max: f64) -> bool {
        let denom = self.n.dot(dir);
        let t = (self.nd - self.n.dot(origin)) / denom;
        let slack = 1e-6 * (t_max.abs() + t.abs() + 1.0);
        // NaN (parallel ray) falls through to the full test.
        t < t_min - slack || t > t_max + slack
    }

    /// Returns `(t, u, v)` for a hit inside `[t_min, t_max]`.
    #[inline(always)]
    fn intersect(&self, origin: Vec3, dir: Vec3, t_min: f64, t_max: f64) -> Option<(f64, f64, f64)> {
        let pvec = dir.cross(self.e2);
        let det = self.e1.dot(pvec);
        if det.abs() <= self.det_eps {
            return None;
        }
        let inv_det = 1.0 / det;
        let tvec = origin - self.v0;
        let u = tvec.dot(pvec) * inv_det;
        if !(0.0..=1.0).contains(&u) {
            return None;
        }
        let qvec = tvec.cross(self.e1);
        let v = dir.dot(qvec) * inv_det;
        if v < 0.0 || u + v > 1.0 {
            return None;
        }
        let t = self.e2.dot(qvec) * inv_det;
        if t < t_min || t > t_max {
            return None;
        }
        Some((t, u, v))
    }
}

/// Möller-Trumbore ray/triangle test. Rays parallel to the triangle's plane
/// miss. Barycentrics weight the triangle's 2nd (`u`) and 3rd (`v`) vertices.
pub fn intersect_triangle(ray: &Ray, triangle: &Triangle) -> Option<Hit> {
    TriData::new(triangle.positions())
        .intersect(ray.origin, ray.direction, ray.t_min, ray.t_max)
        .map(|(t, u, v)| Hit {
            t,
            u,
            v,
            triangle_index: 0,
        })
}

#[derive(Debug, Clone, Copy)]
struct Node {
    bounds: Aabb,
    /// Leaf: index of the first primitive. Interior: index of the right child
    /// (the left child follows immediately).
    offset: u32,
    /// Number of primitives; 0 for interior nodes.
    count: u32,
    axis: u8,
}

/// Bounding volume hierarchy over a scene's triangles. Immutable after build.
#[derive(Debug, Clone)]
pub struct Bvh {
    nodes: Vec<Node>,
    /// Scene triangle index of each leaf primitive slot.
    prim_index: Vec<u32>,
    prims: Vec<TriData>,
    max_leaf_size: usize,
}

pub const DEFAULT_MAX_LEAF_SIZE: usize = 8;
const STACK_SIZE: usize = 96;

impl Bvh {
    /// Median split along the longest axis of the centroid bounds.
    /// Deterministic for a given scene.
    pub fn build(scene: &Scene, max_leaf_size: usize) -> Bvh {
        Self::from_triangles(scene.triangles(), max_leaf_size)
    }

    pub fn from_triangles(triangles: &[Triangle], max_leaf_size: usize) -> Bvh {
        let max_leaf_size = max_leaf_size.max(1);
        let bounds: Vec<Aabb> = triangles.iter().map(|t| t.bounds()).collect();
        let centroids: Vec<Vec3> = triangles.iter().map(|t| t.centroid()).collect();
        let mut order: Vec<u32> = (0..triangles.len() as u32).collect();
        let mut nodes = Vec::with_capacity(2 * triangles.len().max(1));
        if !triangles.is_empty() {
            build_recursive(&mut nodes, &mut order, 0, &bounds, &centroids, max_leaf_size);
        }
        let prims = order
            .iter()
            .map(|&i| TriData::new(triangles[i as usize].positions()))
            .collect();
        Bvh {
            nodes,
            prim_index: order,
            prims,
            max_leaf_size,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn triangle_count(&self) -> usize {
        self.prims.len()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn max_leaf_size(&self) -> usize {
        self.max_leaf_size
    }

    pub fn root_bounds(&self) -> Option<Aabb> {
        self.nodes.first().map(|n| n.bounds)
    }

    /// Longest root-to-leaf path, counting the root as depth 1.
    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], i: usize) -> usize {
            let n = &nodes[i];
            if n.count > 0 {
                1
            } else {
                1 + walk(nodes, i + 1).max(walk(nodes, n.offset as usize))
            }
        }
        if self.nodes.is_empty() {
            0
        } else {
            walk(&self.nodes, 0)
        }
    }

    /// Checks the structural invariants: each triangle in exactly one leaf and
    /// every node box enclosing its children. Returns a description of the
    /// first violation.
    pub fn validate(&self, triangles: &[Triangle]) -> Result<(), String> {
        if self.nodes.is_empty() {
            return if triangles.is_empty() {
                Ok(())
            } else {
                Err("empty tree for non-empty scene".into())
            };
        }
        let mut seen = vec![0u32; triangles.len()];
        let mut stack = vec![0usize];
        while let Some(i) = stack.pop() {
            let n = &self.nodes[i];
            if n.count > 0 {
                for slot in n.offset..n.offset + n.count {
                    let tri = self.prim_index[slot as usize] as usize;
                    seen[tri] += 1;
                    if !n.bounds.contains_box(&triangles[tri].bounds()) {
                        return Err(format!("leaf {i} does not enclose triangle {tri}"));
                    }
                }
            } else {
                for c in [i + 1, n.offset as usize] {
                    if !n.bounds.contains_box(&self.nodes[c].bounds) {
                        return Err(format!("node {i} does not enclose child {c}"));
                    }
                    stack.push(c);
                }
            }
        }
        match seen.iter().position(|&c| c != 1) {
            Some(t) => Err(format!("triangle {t} appears in {} leaves", seen[t])),
            None => Ok(()),
        }
    }

    /// Any-hit test over `[t_min, t_max]` along a unit direction. Stops at the
    /// first confirmed hit. Backfaces are not culled.
    #[inline]
    pub fn any_hit(&self, origin: Vec3, dir: Vec3, t_min: f64, t_max: f64) -> bool {
        if self.nodes.is_empty() {
            return false;
        }
        let inv = Vec3::new(1.0 / dir.x, 1.0 / dir.y, 1.0 / dir.z);
        let mut stack = [0u32; STACK_SIZE];
        let mut sp = 1;
        while sp > 0 {
            sp -= 1;
            let node = &self.nodes[stack[sp] as usize];
            if !node.bounds.hit_interval(origin, inv, t_min, t_max) {
                continue;
            }
            if node.count > 0 {
                let start = node.offset as usize;
                for prim in &self.prims[start..start + node.count as usize] {
                    if !prim.plane_rejects(origin, dir, t_min, t_max)
                        && prim.intersect(origin, dir, t_min, t_max).is_some()
                    {
                        return true;
                    }
                }
            } else {
                let idx = stack[sp] + 1;
                stack[sp] = node.offset;
                stack[sp + 1] = idx;
                sp += 2;
            }
        }
        false
    }

    /// Nearest hit of `ray` inside its interval.
    pub fn closest_hit(&self, ray: &Ray) -> Option<Hit> {
        if self.nodes.is_empty() {
            return None;
        }
        let (origin, dir) = (ray.origin, ray.direction);
        let inv = Vec3::new(1.0 / dir.x, 1.0 / dir.y, 1.0 / dir.z);
        let mut t_max = ray.t_max;
        let mut best: Option<Hit> = None;
        let mut stack = [0u32; STACK_SIZE];
        let mut sp = 1;
        while sp > 0 {
            sp -= 1;
            let index = stack[sp];
            let node = &self.nodes[index as usize];
            if !node.bounds.hit_interval(origin, inv, ray.t_min, t_max) {
                continue;
            }
            if node.count > 0 {
                let start = node.offset as usize;
                for slot in start..start + node.count as usize {
                    if let Some((t, u, v)) = self.prims[slot].intersect(origin, dir, ray.t_min, t_max) {
                        let triangle_index = self.prim_index[slot] as usize;
                        let better = match best {
                            None => true,
                            Some(b) => t < b.t || (t == b.t && triangle_index < b.triangle_index),
                        };
                        if better {
                            t_max = t;
                            best = Some(Hit { t, u, v, triangle_index });
                        }
                    }
                }
            } else {
                // Push the far child first so the near one is visited next.
                let left = index + 1;
                let right = node.offset;
                let (near, far) = if dir[node.axis as usize] >= 0.0 {
                    (left, right)
                } else {
                    (right, left)
                };
                stack[sp] = far;
                stack[sp + 1] = near;
                sp += 2;
            }
        }
        best
    }
}

fn build_recursive(
    nodes: &mut Vec<Node>,
    order: &mut [u32],
    offset: usize,
    bounds: &[Aabb],
    centroids: &[Vec3],
    max_leaf: usize,
) -> usize {
    let node_bounds = order
        .iter()
        .fold(Aabb::EMPTY, |b, &i| b.union(bounds[i as usize]));
    let index = nodes.len();
    nodes.push(Node {
        bounds: node_bounds,
        offset: offset as u32,
        count: order.len() as u32,
        axis: 0,
    });
    if order.len() <= max_leaf {
        return index;
    }
    let cb = Aabb::from_points(order.iter().map(|&i| centroids[i as usize]));
    let axis = cb.extent().max_axis();
    order.sort_unstable_by(|&a, &b| {
        centroids[a as usize][axis]
            .total_cmp(&centroids[b as usize][axis])
            .then(a.cmp(&b))
    });
    let mid = order.len() / 2;
    let (lo, hi) = order.split_at_mut(mid);
    build_recursive(nodes, lo, offset, bounds, centroids, max_leaf);
    let right = build_recursive(nodes, hi, offset + mid, bounds, centroids, max_leaf);
    let n = &mut nodes[index];
    n.offset = right as u32;
    n.count = 0;
    n.axis = axis as u8;
    index
}

/// Default ray offset: 1e-4 of the scene diagonal.
pub fn default_epsilon(scene: &Scene) -> f64 {
    let d = scene.bounds().diagonal();
    if d > 0.0 {
        1e-4 * d
    } else {
        1e-6
    }
}

/// True iff geometry blocks the segment `a -> b`. The tested interval is
/// `[epsilon, |b - a| - 2 epsilon]`; pairs closer than `2 epsilon` count as
/// mutually visible.
#[inline]
pub fn occluded(bvh: &Bvh, a: Vec3, b: Vec3, epsilon: f64) -> bool {
    let delta = b - a;
    let dist = delta.length();
    if dist <= 2.0 * epsilon {
        return false;
    }
    bvh.any_hit(a, delta / dist, epsilon, dist - 2.0 * epsilon)
}

pub fn closest_hit(bvh: &Bvh, ray: &Ray) -> Option<Hit> {
    bvh.closest_hit(ray)
}
