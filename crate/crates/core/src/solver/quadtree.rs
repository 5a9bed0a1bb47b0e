//! Quad-tree refinement stored in the alpha channel of `lig_in`: each texel's
//! alpha is the number of patches it stands for when sampled.

use crate::math::Vec3;
use crate::uvraster::TextureGroup;

fn dist(a: [f64; 3], b: [f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

fn mean(v: &[[f64; 3]; 4]) -> [f64; 3] {
    let mut m = [0.0; 3];
    for c in v {
        for k in 0..3 {
            m[k] += c[k] / 4.0;
        }
    }
    m
}

/// Half the distance of the first child's lighting from the mean lighting plus
/// half the same for normals.
pub fn gradient(lig: [[f64; 3]; 4], nrm: [Vec3; 4]) -> f64 {
    let n = nrm.map(|v| v.to_array());
    0.5 * dist(lig[0], mean(&lig)) + 0.5 * dist(n[0], mean(&n))
}

/// Rebuilds the alpha channel of `lig_in` bottom-up. Occupied texels start
/// at 1, the rest at 0. For each `step` up to `max_node`, every aligned
/// `step × step` block whose four children are unmerged-but-complete nodes
/// (alpha = (step/2)²) and whose gradient is below `threshold` moves all its
/// alpha to the top-left child.
pub fn build_alpha_quadtree(tg: &mut TextureGroup, threshold: f64, max_node: u32) {
    let res = tg.resolution;
    for i in 0..res.texel_count() {
        tg.lig_in[i][3] = if tg.is_occupied(i) { 1.0 } else { 0.0 };
    }
    let mut step = 2;
    while step <= max_node {
        let half = step / 2;
        let full = (half * half) as f32;
        for y in (0..res.height).step_by(step as usize) {
            for x in (0..res.width).step_by(step as usize) {
                if x + half >= res.width || y + half >= res.height {
                    continue;
                }
                let kids = [
                    res.linear(x, y),
                    res.linear(x + half, y),
                    res.linear(x, y + half),
                    res.linear(x + half, y + half),
                ];
                if kids.iter().any(|&k| tg.lig_in[k][3] != full) {
                    continue;
                }
                let lig = kids.map(|k| {
                    let l = tg.lig_in[k];
                    [l[0] as f64, l[1] as f64, l[2] as f64]
                });
                let nrm = kids.map(|k| tg.normal(k));
                if gradient(lig, nrm) < threshold {
                    tg.lig_in[kids[0]][3] = 4.0 * full;
                    for &k in &kids[1..] {
                        tg.lig_in[k][3] = 0.0;
                    }
                }
            }
        }
        step *= 2;
    }
}

/// Sum of alpha over the map.
pub fn alpha_sum(tg: &TextureGroup) -> f64 {
    tg.lig_in.iter().map(|l| l[3] as f64).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::uvraster::Resolution;

    fn filled(n: u32, color: impl Fn(u32, u32) -> [f32; 3]) -> TextureGroup {
        let res = Resolution::square(n);
        let mut tg = TextureGroup::blank(res);
        for i in 0..res.texel_count() {
            let (x, y) = res.coords(i);
            tg.set_patch(i, Vec3::new(x as f64, y as f64, 0.0), Vec3::new(0.0, 0.0, 1.0), [0.5; 3], color(x, y), 1.0);
        }
        tg
    }

    #[test]
    fn gradient_examples() {
        let n = [Vec3::new(0.0, 0.0, 1.0); 4];
        assert_eq!(gradient([[0.2; 3]; 4], n), 0.0);
        let g = gradient([[1.0, 0.0, 0.0], [0.0; 3], [0.0; 3], [0.0; 3]], n);
        assert!((g - 0.375).abs() < 1e-15);
    }

    #[test]
    fn uniform_block_collapses() {
        let mut tg = filled(16, |_, _| [0.4, 0.4, 0.4]);
        build_alpha_quadtree(&mut tg, 0.2, 16);
        assert_eq!(tg.lig_in[0][3], 256.0);
        assert_eq!(alpha_sum(&tg), 256.0);
        assert_eq!(tg.lig_in.iter().filter(|l| l[3] > 0.0).count(), 1);
    }

    #[test]
    fn checkerboard_never_merges() {
        let mut tg = filled(16, |x, y| if (x + y) % 2 == 0 { [1.0; 3] } else { [0.0; 3] });
        build_alpha_quadtree(&mut tg, 0.2, 16);
        assert!(tg.lig_in.iter().all(|l| l[3] == 1.0));
    }

    #[test]
    fn hole_blocks_merge() {
        let mut tg = filled(4, |_, _| [0.1; 3]);
        tg.pos[5][3] = 0.0;
        build_alpha_quadtree(&mut tg, 0.2, 4);
        assert_eq!(alpha_sum(&tg), 15.0);
        assert_eq!(tg.lig_in[0][3], 1.0);
        assert_eq!(tg.lig_in[2][3], 4.0);
    }
}
