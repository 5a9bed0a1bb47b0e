//! Evenly spread hemisphere directions grown one point at a time: each new
//! point goes to the center of the largest empty circle inside the unit disk,
//! and disk points are lifted onto the hemisphere.

use std::io::{BufRead, Write};
use std::path::Path;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spade::{DelaunayTriangulation, Point2, Triangulation};

use crate::error::{Error, Result};
use crate::math::Vec3;

pub const MIN_DIRECTIONS: usize = 4;
pub const MAX_DIRECTIONS: usize = 1024;
const HEADER: &str = "rtdirs";

/// Lifts a point of the unit disk onto the upper hemisphere.
pub fn project_to_hemisphere(p: [f64; 2]) -> Result<Vec3> {
    let r2 = p[0] * p[0] + p[1] * p[1];
    if !(r2 <= 1.0 + 1e-9) {
        return Err(Error::Config(format!("point ({}, {}) lies outside the unit disk", p[0], p[1])));
    }
    Ok(Vec3::new(p[0], p[1], (1.0 - r2).max(0.0).sqrt()))
}

/// One insertion step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Insertion {
    pub point: [f64; 2],
    /// Distance to the nearest point present before the insertion.
    pub clearance: f64,
    /// Candidate sites examined in this step.
    pub candidates: usize,
    /// Best clearance among the other candidates.
    pub runner_up: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DirectionSet {
    pub points: Vec<[f64; 2]>,
    pub directions: Vec<Vec3>,
    /// One entry per point beyond the initial four.
    pub log: Vec<Insertion>,
}

impl DirectionSet {
    pub fn len(&self) -> usize {
        self.directions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.directions.is_empty()
    }

    /// Set made of directions only (e.g. read from a table).
    pub fn from_directions(directions: Vec<Vec3>) -> Result<Self> {
        if directions.is_empty() || directions.len() > MAX_DIRECTIONS {
            return Err(Error::Format(format!("direction count {} out of range", directions.len())));
        }
        for d in &directions {
            if !d.is_finite() || (d.length() - 1.0).abs() > 1e-6 || d.z < -1e-9 {
                return Err(Error::Format(format!("not an upper-hemisphere unit vector: {d:?}")));
            }
        }
        Ok(Self {
            points: directions.iter().map(|d| [d.x, d.y]).collect(),
            directions,
            log: Vec::new(),
        })
    }

    /// The first `n` directions.
    pub fn prefix(&self, n: usize) -> DirectionSet {
        let n = n.min(self.len());
        DirectionSet {
            points: self.points[..n.min(self.points.len())].to_vec(),
            directions: self.directions[..n].to_vec(),
            log: self.log[..n.saturating_sub(MIN_DIRECTIONS).min(self.log.len())].to_vec(),
        }
    }

    pub fn write_table(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "{HEADER} {}", self.len())?;
        for d in &self.directions {
            writeln!(w, "{} {} {}", sig9(d.x), sig9(d.y), sig9(d.z))?;
        }
        Ok(())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut buf = Vec::new();
        self.write_table(&mut buf).expect("write to memory");
        std::fs::write(path, buf).map_err(|e| Error::io(path, e))
    }

    pub fn read_table(r: impl BufRead) -> Result<Self> {
        let mut lines = r.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Format("empty direction table".into()))?
            .map_err(|e| Error::Format(e.to_string()))?;
        let count: usize = header
            .strip_prefix(HEADER)
            .and_then(|c| c.trim().parse().ok())
            .ok_or_else(|| Error::Format(format!("bad direction table header {header:?}")))?;
        let mut dirs = Vec::with_capacity(count);
        for line in lines {
            let line = line.map_err(|e| Error::Format(e.to_string()))?;
            if line.trim().is_empty() {
                continue;
            }
            let v: Vec<f64> = line
                .split_whitespace()
                .map(|t| t.parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Format(format!("bad direction {line:?}: {e}")))?;
            if v.len() != 3 {
                return Err(Error::Format(format!("bad direction {line:?}")));
            }
            dirs.push(Vec3::new(v[0], v[1], v[2]).normalize());
        }
        if dirs.len() != count {
            return Err(Error::Format(format!("header says {count} directions, found {}", dirs.len())));
        }
        Self::from_directions(dirs)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_table(std::io::BufReader::new(f))
    }
}

/// Formats with 9 significant digits.
fn sig9(v: f64) -> String {
    let s = format!("{:.8e}", v);
    let (m, e) = s.split_once('e').unwrap();
    let e: i32 = e.parse().unwrap();
    if (-5..9).contains(&e) {
        let decimals = (8 - e).max(0) as usize;
        format!("{:.*}", decimals, v)
    } else {
        format!("{m}e{e}")
    }
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

/// Points `c + t d` on the unit circle with `t` in `[t0, t1]`.
fn circle_hits(c: [f64; 2], d: [f64; 2], t0: f64, t1: f64, out: &mut Vec<[f64; 2]>) {
    let a = d[0] * d[0] + d[1] * d[1];
    if a == 0.0 {
        return;
    }
    let b = 2.0 * (c[0] * d[0] + c[1] * d[1]);
    let cc = c[0] * c[0] + c[1] * c[1] - 1.0;
    let disc = b * b - 4.0 * a * cc;
    if disc < 0.0 {
        return;
    }
    let sq = disc.sqrt();
    for t in [(-b - sq) / (2.0 * a), (-b + sq) / (2.0 * a)] {
        if t >= t0 && t <= t1 {
            let p = [c[0] + t * d[0], c[1] + t * d[1]];
            // snap onto the circle
            let n = p[0].hypot(p[1]);
            out.push([p[0] / n, p[1] / n]);
        }
    }
}

fn circumcenter(p: [[f64; 2]; 3]) -> Option<[f64; 2]> {
    let (ax, ay) = (p[0][0], p[0][1]);
    let (bx, by) = (p[1][0] - ax, p[1][1] - ay);
    let (cx, cy) = (p[2][0] - ax, p[2][1] - ay);
    let d = 2.0 * (bx * cy - by * cx);
    if d == 0.0 {
        return None;
    }
    let b2 = bx * bx + by * by;
    let c2 = cx * cx + cy * cy;
    Some([ax + (cy * b2 - by * c2) / d, ay + (bx * c2 - cx * b2) / d])
}

/// Candidate centers (with clearance) for the current point set: Voronoi
/// vertices inside the disk and crossings of Voronoi edges with the circle.
fn candidates(tri: &DelaunayTriangulation<Point2<f64>>) -> Vec<([f64; 2], f64)> {
    let pos = |p: Point2<f64>| [p.x, p.y];
    let mut out = Vec::new();
    for f in tri.inner_faces() {
        let v = f.positions().map(pos);
        if let Some(c) = circumcenter(v) {
            if c[0] * c[0] + c[1] * c[1] <= 1.0 {
                out.push((c, dist(c, v[0])));
            }
        }
    }
    let mut hits = Vec::new();
    for e in tri.undirected_edges() {
        let d = e.as_directed();
        let [a, b] = d.positions().map(pos);
        let mid = [(a[0] + b[0]) / 2.0, (a[1] + b[1]) / 2.0];
        let normal = [-(b[1] - a[1]), b[0] - a[0]];
        let inner = |h: spade::handles::DirectedEdgeHandle<'_, Point2<f64>, (), (), ()>| {
            h.face().as_inner().and_then(|f| circumcenter(f.positions().map(pos)))
        };
        let (c1, c2) = (inner(d), inner(d.rev()));
        hits.clear();
        match (c1, c2) {
            (Some(p), Some(q)) => circle_hits(p, [q[0] - p[0], q[1] - p[1]], 0.0, 1.0, &mut hits),
            (Some(p), None) | (None, Some(p)) => {
                // unbounded edge: leaves the inner face's circumcenter away
                // from that face's third vertex
                let h = if c1.is_some() { d } else { d.rev() };
                let w = pos(h.opposite_vertex().expect("inner face has a third vertex").position());
                let side = normal[0] * (w[0] - mid[0]) + normal[1] * (w[1] - mid[1]);
                let dir = if side > 0.0 { [-normal[0], -normal[1]] } else { normal };
                circle_hits(p, dir, 0.0, f64::INFINITY, &mut hits);
            }
            (None, None) => circle_hits(mid, normal, f64::NEG_INFINITY, f64::INFINITY, &mut hits),
        }
        for &h in &hits {
            out.push((h, dist(h, a)));
        }
    }
    out
}

fn initial_points(seed: u64) -> Vec<[f64; 2]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pts = Vec::with_capacity(MIN_DIRECTIONS);
    while pts.len() < MIN_DIRECTIONS {
        let p = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
        if p[0] * p[0] + p[1] * p[1] <= 1.0 {
            pts.push(p);
        }
    }
    pts
}

/// Generates `count` directions from four seeded uniform disk points, adding
/// the largest-empty-circle center one at a time.
pub fn generate_directions(count: usize, seed: u64) -> Result<DirectionSet> {
    if !(MIN_DIRECTIONS..=MAX_DIRECTIONS).contains(&count) {
        return Err(Error::Config(format!(
            "direction count must be in [{MIN_DIRECTIONS}, {MAX_DIRECTIONS}], got {count}"
        )));
    }
    let mut points = initial_points(seed);
    let mut tri = DelaunayTriangulation::<Point2<f64>>::new();
    for p in &points {
        tri.insert(Point2::new(p[0], p[1]))
            .map_err(|e| Error::Config(format!("triangulation failed: {e:?}")))?;
    }
    let mut log = Vec::with_capacity(count - MIN_DIRECTIONS);
    while points.len() < count {
        let cands = candidates(&tri);
        let mut best: Option<([f64; 2], f64)> = None;
        let mut runner_up = 0.0f64;
        for &(p, c) in &cands {
            match best {
                Some((_, bc)) if c <= bc => runner_up = runner_up.max(c),
                _ => {
                    if let Some((_, bc)) = best {
                        runner_up = runner_up.max(bc);
                    }
                    best = Some((p, c));
                }
            }
        }
        let (p, clearance) =
            best.ok_or_else(|| Error::Config("no candidate site found".into()))?;
        tri.insert(Point2::new(p[0], p[1]))
            .map_err(|e| Error::Config(format!("triangulation failed: {e:?}")))?;
        points.push(p);
        log.push(Insertion {
            point: p,
            clearance,
            candidates: cands.len(),
            runner_up,
        });
    }
    let directions = points
        .iter()
        .map(|&p| project_to_hemisphere(p))
        .collect::<Result<Vec<_>>>()?;
    Ok(DirectionSet {
        points,
        directions,
        log,
    })
}

/// Nearest-neighbor distance of every point.
pub fn nearest_neighbor_distances(points: &[[f64; 2]]) -> Vec<f64> {
    points
        .iter()
        .enumerate()
        .map(|(i, &p)| {
            points
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, &q)| dist(p, q))
                .fold(f64::INFINITY, f64::min)
        })
        .collect()
}
