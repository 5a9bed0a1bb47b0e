use proptest::prelude::*;

use radbake::hemisampler::{generate_directions, nearest_neighbor_distances, project_to_hemisphere, DirectionSet};

fn min_pairwise(points: &[[f64; 2]]) -> f64 {
    nearest_neighbor_distances(points).into_iter().fold(f64::INFINITY, f64::min)
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Largest distance to the nearest point over a dense polar grid of the disk.
fn grid_clearance(points: &[[f64; 2]], rings: usize) -> (f64, f64) {
    let mut best = 0.0f64;
    let mut spacing = 0.0f64;
    for i in 0..=rings {
        let r = i as f64 / rings as f64;
        let around = (2.0 * std::f64::consts::PI * r * rings as f64).ceil().max(1.0) as usize;
        spacing = spacing.max(2.0 * std::f64::consts::PI * r / around as f64);
        for k in 0..around {
            let a = 2.0 * std::f64::consts::PI * k as f64 / around as f64;
            let q = [r * a.cos(), r * a.sin()];
            let c = points
                .iter()
                .map(|p| (p[0] - q[0]).hypot(p[1] - q[1]))
                .fold(f64::INFINITY, f64::min);
            best = best.max(c);
        }
    }
    // any disk point lies within this distance of a grid sample
    (best, (spacing.max(1.0 / rings as f64)) * 0.75)
}

#[test]
fn each_insertion_is_the_largest_empty_circle() {
    let set = generate_directions(40, 7).unwrap();
    for (step, ins) in set.log.iter().enumerate() {
        let before = &set.points[..4 + step];
        let (grid, slack) = grid_clearance(before, 400);
        assert!(grid <= ins.clearance + 1e-9, "step {step}: grid found {grid} > {}", ins.clearance);
        assert!(ins.clearance - grid <= slack, "step {step}: {} vs grid {grid}", ins.clearance);
        assert!(ins.runner_up <= ins.clearance);
        let nearest = before
            .iter()
            .map(|p| (p[0] - ins.point[0]).hypot(p[1] - ins.point[1]))
            .fold(f64::INFINITY, f64::min);
        assert!((nearest - ins.clearance).abs() < 1e-9);
    }
}

#[test]
fn clearance_never_grows() {
    for seed in 0..4 {
        let set = generate_directions(300, seed).unwrap();
        for w in set.log.windows(2) {
            // equal-radius ties may differ in the last bits
            assert!(w[1].clearance <= w[0].clearance * (1.0 + 1e-12), "seed {seed}");
        }
    }
}

#[test]
fn hundred_points_are_evenly_spread() {
    for seed in 0..8 {
        let set = generate_directions(100, seed).unwrap();
        let m = median(nearest_neighbor_distances(&set.points));
        let min = min_pairwise(&set.points);
        assert!(min >= 0.5 * m, "seed {seed}: min {min} median {m}");
    }
}

#[test]
fn prefixes_are_the_smaller_sets() {
    let big = generate_directions(256, 3).unwrap();
    for n in [4, 16, 64, 256] {
        let small = generate_directions(n, 3).unwrap();
        assert_eq!(big.prefix(n), small);
        if n >= 16 {
            let p = &small.points;
            assert!(min_pairwise(p) >= 0.5 * median(nearest_neighbor_distances(p)), "prefix {n}");
        }
    }
}

#[test]
fn seeds_change_the_set_and_repeats_do_not() {
    let a = generate_directions(64, 1).unwrap();
    assert_eq!(a, generate_directions(64, 1).unwrap());
    assert_ne!(a.points, generate_directions(64, 2).unwrap().points);
}

#[test]
fn table_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("d.txt");
    let set = generate_directions(33, 4).unwrap();
    set.save(&path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().count(), 34);
    let back = DirectionSet::load(&path).unwrap();
    assert_eq!(back.len(), 33);
    for (a, b) in back.directions.iter().zip(&set.directions) {
        assert!((*a - *b).length() < 1e-8);
    }
    std::fs::write(&path, "rtdirs 3\n0 0 1\n").unwrap();
    assert!(DirectionSet::load(&path).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn directions_are_unit_and_upward(count in 4usize..200, seed in any::<u64>()) {
        let set = generate_directions(count, seed).unwrap();
        prop_assert_eq!(set.len(), count);
        for (p, d) in set.points.iter().zip(&set.directions) {
            prop_assert!((d.length() - 1.0).abs() < 1e-9);
            prop_assert!(d.z >= 0.0);
            prop_assert_eq!(d.x, p[0]);
            prop_assert_eq!(d.y, p[1]);
        }
    }

    #[test]
    fn projection_is_unit_inside_the_disk(r in 0.0f64..=1.0, a in 0.0f64..std::f64::consts::TAU) {
        let v = project_to_hemisphere([r * a.cos(), r * a.sin()]).unwrap();
        prop_assert!((v.length() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn projection_rejects_points_outside(r in 1.001f64..5.0, a in 0.0f64..std::f64::consts::TAU) {
        prop_assert!(project_to_hemisphere([r * a.cos(), r * a.sin()]).is_err());
    }
}
