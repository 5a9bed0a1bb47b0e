mod common;

use proptest::prelude::*;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use radbake::fixtures;
use radbake::math::Vec3;
use radbake::tracer::{default_epsilon, occluded, Bvh, DEFAULT_MAX_LEAF_SIZE};
use radbake::voxel::{raymarch_occluded, voxelize, VoxelMap};

fn set_cells(vm: &VoxelMap) -> Vec<[u32; 3]> {
    let r = vm.resolution();
    let mut out = Vec::new();
    for z in 0..r {
        for y in 0..r {
            for x in 0..r {
                if vm.get(x, y, z) {
                    out.push([x, y, z]);
                }
            }
        }
    }
    out.sort();
    out
}

#[test]
fn box_matches_point_sampling_reference() {
    let scene = fixtures::box_scene();
    for r in [8, 16, 32] {
        let vm = voxelize(&scene, r).unwrap();
        let mut reference = common::reference_voxel_cells(&scene, r, 4);
        reference.sort();
        assert_eq!(set_cells(&vm), reference, "r = {r}");
    }
}

fn within_one_cell(a: [u32; 3], b: [u32; 3]) -> bool {
    (0..3).all(|k| a[k].abs_diff(b[k]) <= 1)
}

#[test]
fn random_triangles_stay_near_their_samples() {
    // One fragment per column in the dominant projection: the surface may
    // step past a cell in depth, but never by more than one.
    for seed in 0..8 {
        let scene = fixtures::random_triangle_scene(20, seed);
        let vm = voxelize(&scene, 24).unwrap();
        let marked = set_cells(&vm);
        let reference = common::reference_voxel_cells(&scene, 24, 4);
        for c in &reference {
            assert!(marked.iter().any(|&m| within_one_cell(m, *c)), "seed {seed}: {c:?} has no marked neighbor");
        }
        for m in &marked {
            assert!(reference.iter().any(|&c| within_one_cell(*m, c)), "seed {seed}: stray cell {m:?}");
        }
    }
}

#[test]
fn voxelization_is_deterministic_and_round_trips() {
    let scene = fixtures::random_triangle_scene(200, 3);
    let a = voxelize(&scene, 32).unwrap();
    let b = voxelize(&scene, 32).unwrap();
    assert_eq!(a, b);
    let mut buf = Vec::new();
    a.write_to(&mut buf).unwrap();
    assert_eq!(&buf[..4], b"RVOX");
    assert_eq!(buf.len(), 8 + (32usize.pow(3)).div_ceil(8));
    let back = VoxelMap::read_from(&buf[..], scene.bounds()).unwrap();
    assert_eq!(back, a);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn raymarch_is_symmetric(seed in any::<u64>(), r in 4u32..40, step in prop::sample::select(vec![0.25, 0.5, 1.0])) {
        let scene = fixtures::random_triangle_scene(30, seed);
        let vm = voxelize(&scene, r).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..100 {
            let a = Vec3::new(rng.random(), rng.random(), rng.random());
            let b = Vec3::new(rng.random(), rng.random(), rng.random());
            prop_assert_eq!(raymarch_occluded(&vm, a, b, step), raymarch_occluded(&vm, b, a, step));
        }
    }
}

/// Fraction of random point pairs inside the box on which raymarching and
/// tracing agree.
fn agreement(r: u32, pairs: usize, seed: u64) -> f64 {
    let scene = fixtures::box_scene();
    let bvh = Bvh::build(&scene, DEFAULT_MAX_LEAF_SIZE);
    let eps = default_epsilon(&scene);
    let vm = voxelize(&scene, r).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut same = 0;
    for _ in 0..pairs {
        let a = Vec3::new(rng.random(), rng.random(), rng.random());
        let b = Vec3::new(rng.random(), rng.random(), rng.random());
        same += (occluded(&bvh, a, b, eps) == raymarch_occluded(&vm, a, b, 0.5)) as usize;
    }
    same as f64 / pairs as f64
}

#[test]
fn voxel_agreement_is_high_but_not_perfect() {
    let a = agreement(64, 10_000, 11);
    println!("voxel/traced agreement at r=64: {a:.4}");
    assert!(a > 0.9, "{a}");
    assert!(a < 1.0, "{a}");
}

#[test]
fn agreement_does_not_drop_with_resolution() {
    let rates: Vec<f64> = [16, 32, 64].iter().map(|&r| agreement(r, 10_000, 11)).collect();
    println!("agreement at r = 16, 32, 64: {rates:.4?}");
    for w in rates.windows(2) {
        assert!(w[1] >= w[0] - 0.01, "{rates:?}");
    }
}

#[test]
fn empty_map_never_occludes() {
    let vm = VoxelMap::empty(16, fixtures::box_scene().bounds());
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..1000 {
        let a = Vec3::new(rng.random(), rng.random(), rng.random());
        let b = Vec3::new(rng.random(), rng.random(), rng.random());
        assert!(!raymarch_occluded(&vm, a, b, 0.5));
    }
}
