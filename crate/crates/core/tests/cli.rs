mod common;

use std::collections::HashSet;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use radbake::fixtures;
use radbake::io::{export_rtex, import_rtex, RtexImage};
use radbake::metrics::{dfpr, Lightmap, PassReport};
use radbake::uvraster::{build_texture_group, Resolution};

fn radbake(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_radbake")).args(args).output().unwrap()
}

fn box_obj() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenes/box.obj")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn reports(dir: &Path) -> Vec<PassReport> {
    std::fs::read_to_string(dir.join("report.jsonl"))
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect()
}

#[test]
fn bake_writes_one_map_and_report_per_pass() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = radbake(&["bake", "--scene", s(&box_obj()), "--res", "64", "--passes", "2", "--out", s(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let mut names: Vec<String> = std::fs::read_dir(&out)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert_eq!(
        names,
        ["lightmap_pass1.png", "lightmap_pass1.rtex", "lightmap_pass2.png", "lightmap_pass2.rtex", "report.jsonl"]
    );
    let r = reports(&out);
    assert_eq!(r.len(), 2);
    assert_eq!(stdout(&o).lines().count(), 2);
    assert_eq!((r[0].pass, r[1].pass), (1, 2));
    // the full resolved configuration travels with every report
    let line: serde_json::Value = serde_json::from_str(stdout(&o).lines().next().unwrap()).unwrap();
    for key in ["pass", "mode", "rays_traced", "raymarches", "cache_hits", "wall_ms", "energy_sum"] {
        assert!(line.get(key).is_some(), "report lacks {key}");
    }
    let cfg = &line["config"];
    assert_eq!(cfg["reflectivity"], 0.9);
    assert_eq!(cfg["contribution_clamp"], 0.05);
    assert_eq!(cfg["window_m"], 1);
    assert!(cfg.get("seed").is_some() && cfg.get("batch_ray_limit").is_some());
}

#[test]
fn usage_and_data_errors_have_distinct_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = s(dir.path());
    let bad_mode = radbake(&["bake", "--scene", s(&box_obj()), "--mode", "sideways", "--out", out]);
    assert_eq!(bad_mode.status.code(), Some(1));
    let bad_window = radbake(&["bake", "--scene", s(&box_obj()), "--window", "4", "--out", out]);
    assert_eq!(bad_window.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&bad_window.stderr).contains("config"));
    let missing = radbake(&["bake", "--scene", "/no/such/scene.obj", "--out", out]);
    assert_eq!(missing.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&missing.stderr).contains("load"));
    assert_eq!(radbake(&["frobnicate"]).status.code(), Some(1));
    let help = radbake(&["--help"]);
    assert_eq!(help.status.code(), Some(0));
    assert!(stdout(&help).contains("Usage") && help.stderr.is_empty());
    assert_eq!(radbake(&["gen-dirs", "--count", "3", "--out", &format!("{out}/d.txt")]).status.code(), Some(1));
}

#[test]
fn config_file_values_yield_to_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("bake.json");
    let out = dir.path().join("out");
    let cfg = serde_json::json!({
        "scene": box_obj(),
        "resolution": "16x16",
        "out_dir": out,
        "solver": {"mode": "monte_carlo", "window_m": 4, "passes": 3, "seed": 5}
    });
    std::fs::write(&cfg_path, cfg.to_string()).unwrap();
    let o = radbake(&["bake", "--config", s(&cfg_path), "--passes", "1"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r = reports(&out);
    assert_eq!(r.len(), 1);
    assert_eq!(r[0].config.seed, 5);
    assert_eq!(r[0].config.window_m, 4);
    assert_eq!(r[0].resolution, [16, 16]);

    std::fs::write(&cfg_path, r#"{"solver": {"colour": 3}}"#).unwrap();
    assert_eq!(radbake(&["bake", "--config", s(&cfg_path)]).status.code(), Some(1));
}

#[test]
fn monte_carlo_ray_count_follows_occupancy() {
    let dir = tempfile::tempdir().unwrap();
    let o = radbake(&[
        "bake", "--scene", s(&box_obj()), "--res", "256", "--mode", "monte_carlo", "--window", "4",
        "--passes", "1", "--out", s(dir.path()),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r = &reports(dir.path())[0];
    let tg = build_texture_group(&fixtures::box_scene(), Resolution::square(256)).unwrap();
    let occ = tg.occupied_indices();
    let windows: HashSet<(u32, u32)> = occ
        .iter()
        .map(|&i| {
            let (x, y) = tg.resolution.coords(i);
            (x / 2, y / 2)
        })
        .collect();
    let (k, w) = (occ.len() as u64, windows.len() as u64);
    assert_eq!(r.rays_traced, k * w - w);
    let quarter = (k * k) as f64 / 4.0;
    assert!((r.rays_traced as f64 - quarter).abs() <= 0.02 * quarter);
}

#[test]
fn identical_runs_give_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, workers: &str| {
        let out = dir.path().join(name);
        let o = radbake(&[
            "bake", "--scene", s(&box_obj()), "--res", "32", "--passes", "2", "--mode", "subdiv",
            "--workers", workers, "--out", s(&out),
        ]);
        assert!(o.status.success());
        out
    };
    let (a, b) = (run("a", "1"), run("b", "4"));
    for f in ["lightmap_pass1.rtex", "lightmap_pass2.rtex", "lightmap_pass1.png", "lightmap_pass2.png"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{f}");
    }
    let strip = |mut r: PassReport| {
        r.wall_ms = 0.0;
        r.config.workers = 0;
        r
    };
    let (ra, rb): (Vec<_>, Vec<_>) = (reports(&a).into_iter().map(strip).collect(), reports(&b).into_iter().map(strip).collect());
    assert_eq!(ra, rb);
}

#[test]
fn dfpr_command_examples() {
    let dir = tempfile::tempdir().unwrap();
    let res = Resolution::square(8);
    let (white, black) = (dir.path().join("w.rtex"), dir.path().join("b.rtex"));
    export_rtex(&Lightmap::uniform(res, [1.0; 3]), &white).unwrap();
    export_rtex(&Lightmap::uniform(res, [0.0; 3]), &black).unwrap();
    assert_eq!(stdout(&radbake(&["dfpr", s(&white), s(&white)])).trim(), "0.000000");
    assert_eq!(stdout(&radbake(&["dfpr", s(&white), s(&black)])).trim(), "1.732051");

    let small = dir.path().join("s.rtex");
    export_rtex(&Lightmap::uniform(Resolution::square(4), [1.0; 3]), &small).unwrap();
    assert_eq!(radbake(&["dfpr", s(&white), s(&small)]).status.code(), Some(2));
}

#[test]
fn dfpr_command_matches_the_library_on_bakes() {
    let dir = tempfile::tempdir().unwrap();
    let scene = box_obj();
    let bake = |name: &str, extra: &[&str]| {
        let out = dir.path().join(name);
        let mut args = vec!["bake", "--scene", s(&scene), "--res", "32", "--passes", "1", "--out", s(&out)];
        args.extend_from_slice(extra);
        assert!(radbake(&args).status.success());
        out.join("lightmap_pass1.rtex")
    };
    let pure = bake("pure", &[]);
    let mc = bake("mc", &["--mode", "monte_carlo", "--window", "16"]);
    let printed: f64 = stdout(&radbake(&["dfpr", s(&mc), s(&pure)])).trim().parse().unwrap();
    let lib = dfpr(&import_rtex(&mc).unwrap(), &import_rtex(&pure).unwrap()).unwrap();
    assert!(printed > 0.0);
    assert!((printed - lib).abs() <= 5e-7);
}

#[test]
fn gen_dirs_writes_a_table() {
    let dir = tempfile::tempdir().unwrap();
    let gen = |name: &str, seed: &str| {
        let p = dir.path().join(name);
        let o = radbake(&["gen-dirs", "--count", "50", "--seed", seed, "--out", s(&p)]);
        assert!(o.status.success());
        assert!(stdout(&o).starts_with("directions 50 min_nn "));
        std::fs::read_to_string(p).unwrap()
    };
    let a = gen("a.txt", "3");
    assert_eq!(a.lines().count(), 51);
    assert!(a.starts_with("rtdirs 50\n"));
    assert_eq!(a, gen("b.txt", "3"));
    assert_ne!(a, gen("c.txt", "4"));
}

#[test]
fn directional_bake_with_a_table() {
    let dir = tempfile::tempdir().unwrap();
    let table = dir.path().join("d.txt");
    assert!(radbake(&["gen-dirs", "--count", "16", "--out", s(&table)]).status.success());
    let out = dir.path().join("out");
    let o = radbake(&[
        "bake", "--scene", s(&box_obj()), "--res", "16", "--passes", "1", "--mode", "directional",
        "--dirs", s(&table), "--out", s(&out),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let k = build_texture_group(&fixtures::box_scene(), Resolution::square(16)).unwrap().occupied_count() as u64;
    assert_eq!(reports(&out)[0].rays_traced, k * 16);
}

#[test]
fn inspect_dumps_the_texture_group() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("tg");
    let o = radbake(&["inspect", "--scene", s(&box_obj()), "--res", "64", "--out", s(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let tg = build_texture_group(&fixtures::box_scene(), Resolution::square(64)).unwrap();
    assert_eq!(stdout(&o).trim(), format!("patches {}", tg.occupied_count()));
    for name in ["pos", "nrm", "mat", "arf", "emission"] {
        assert!(out.join(format!("{name}.rtex")).exists() && out.join(format!("{name}.png")).exists(), "{name}");
    }
    assert_eq!(std::fs::read_dir(&out).unwrap().count(), 10);

    // floor texels face up: normal (0, 0, 1) remaps to (128, 128, 255)
    let dec = png::Decoder::new(std::io::BufReader::new(std::fs::File::open(out.join("nrm.png")).unwrap()));
    let mut reader = dec.read_info().unwrap();
    let mut px = vec![0; reader.output_buffer_size().unwrap()];
    reader.next_frame(&mut px).unwrap();
    let floor: Vec<usize> = (0..tg.resolution.texel_count()).filter(|&i| tg.owner[i] < 2).collect();
    assert!(!floor.is_empty());
    for &i in &floor {
        assert_eq!(&px[3 * i..3 * i + 3], &[128, 128, 255]);
    }

    // arf sums per wall match the analytic unit area
    let arf = RtexImage::load(out.join("arf.rtex")).unwrap();
    assert_eq!(arf.channels, 1);
    for wall in 0..6u32 {
        let sum: f64 = (0..arf.data.len())
            .filter(|&i| tg.owner[i] == 2 * wall || tg.owner[i] == 2 * wall + 1)
            .map(|i| arf.data[i] as f64)
            .sum();
        assert!((sum - 1.0).abs() < 0.1, "wall {wall}: {sum}");
    }
}

#[test]
fn saved_fixture_matches_the_builtin_box() {
    let dir = tempfile::tempdir().unwrap();
    let written = common::write_scene(&fixtures::box_scene(), dir.path(), "box");
    let a = radbake::scene::load_scene(&written, radbake::scene::SceneFormat::ObjSubset).unwrap();
    let b = radbake::scene::load_scene(box_obj(), radbake::scene::SceneFormat::ObjSubset).unwrap();
    assert_eq!(a.triangles(), b.triangles());
    assert_eq!(a.materials(), b.materials());
}
