use std::ffi::{CStr, CString};
use std::path::Path;
use std::ptr;

use radbake_ffi::*;

fn last_error() -> String {
    let p = rb_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn box_scene() -> *mut RbScene {
    let mut scene = ptr::null_mut();
    assert_eq!(unsafe { rb_scene_box(&mut scene) }, RbStatus::Ok);
    scene
}

#[test]
fn bake_and_export_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let scene = box_scene();
    assert_eq!(unsafe { rb_scene_triangle_count(scene) }, 14);

    let mut baker = ptr::null_mut();
    let cfg = CString::new(r#"{"mode": "monte_carlo", "window_m": 4, "seed": 3}"#).unwrap();
    let st = unsafe { rb_baker_new(scene, 16, 16, cfg.as_ptr(), 0, &mut baker) };
    assert_eq!(st, RbStatus::Ok);

    let mut stats = RbPassStats::default();
    assert_eq!(unsafe { rb_baker_run_pass(baker, &mut stats) }, RbStatus::Ok);
    assert_eq!(stats.pass, 1);
    assert!(stats.rays_traced > 0);
    assert!(stats.energy_sum > 0.0);

    let mut map = ptr::null_mut();
    assert_eq!(unsafe { rb_baker_lightmap(baker, true, &mut map) }, RbStatus::Ok);
    let (w, h) = unsafe { (rb_lightmap_width(map), rb_lightmap_height(map)) };
    assert_eq!((w, h), (16, 16));
    let mut rgb = vec![0f32; 3 * 256];
    assert_eq!(unsafe { rb_lightmap_copy_rgb(map, rgb.as_mut_ptr(), rgb.len()) }, RbStatus::Ok);
    assert!(rgb.iter().any(|&v| v > 0.0));

    let rtex = CString::new(dir.path().join("m.rtex").to_str().unwrap()).unwrap();
    let png = CString::new(dir.path().join("m.png").to_str().unwrap()).unwrap();
    assert_eq!(unsafe { rb_lightmap_save_rtex(map, rtex.as_ptr()) }, RbStatus::Ok);
    assert_eq!(unsafe { rb_lightmap_save_png(map, png.as_ptr(), 1.0) }, RbStatus::Ok);
    assert!(Path::new(png.to_str().unwrap()).exists());

    let mut back = ptr::null_mut();
    assert_eq!(unsafe { rb_lightmap_load_rtex(rtex.as_ptr(), &mut back) }, RbStatus::Ok);
    let mut d = -1.0;
    assert_eq!(unsafe { rb_dfpr(map, back, &mut d) }, RbStatus::Ok);
    assert_eq!(d, 0.0);

    unsafe {
        rb_lightmap_free(back);
        rb_lightmap_free(map);
        rb_baker_free(baker);
        rb_scene_free(scene);
    }
}

#[test]
fn errors_set_status_and_message() {
    let mut scene = ptr::null_mut();
    let missing = CString::new("/nonexistent/scene.obj").unwrap();
    assert_eq!(unsafe { rb_scene_load(missing.as_ptr(), &mut scene) }, RbStatus::Io);
    assert!(scene.is_null());
    assert!(last_error().contains("nonexistent"));

    assert_eq!(unsafe { rb_scene_load(ptr::null(), &mut scene) }, RbStatus::NullPointer);

    let scene = box_scene();
    let mut baker = ptr::null_mut();
    let bad = CString::new(r#"{"mode": "stride", "window_m": 3}"#).unwrap();
    assert_eq!(unsafe { rb_baker_new(scene, 16, 16, bad.as_ptr(), 0, &mut baker) }, RbStatus::Config);
    let unknown = CString::new(r#"{"colour": 1}"#).unwrap();
    assert_eq!(unsafe { rb_baker_new(scene, 16, 16, unknown.as_ptr(), 0, &mut baker) }, RbStatus::Config);
    assert_eq!(unsafe { rb_baker_new(scene, 0, 16, ptr::null(), 0, &mut baker) }, RbStatus::InvalidArgument);
    assert!(baker.is_null());

    assert_eq!(unsafe { rb_baker_new(scene, 8, 8, ptr::null(), 0, &mut baker) }, RbStatus::Ok);
    let mut map = ptr::null_mut();
    assert_eq!(unsafe { rb_baker_lightmap(baker, false, &mut map) }, RbStatus::Ok);
    let mut small = [0f32; 4];
    assert_eq!(
        unsafe { rb_lightmap_copy_rgb(map, small.as_mut_ptr(), small.len()) },
        RbStatus::InvalidArgument
    );
    unsafe {
        rb_lightmap_free(map);
        rb_baker_free(baker);
        rb_scene_free(scene);
        rb_scene_free(ptr::null_mut());
    }
}

#[test]
fn directional_baker_counts_rays() {
    let scene = box_scene();
    let mut baker = ptr::null_mut();
    let cfg = CString::new(r#"{"mode": "directional"}"#).unwrap();
    assert_eq!(unsafe { rb_baker_new(scene, 16, 16, cfg.as_ptr(), 16, &mut baker) }, RbStatus::Ok);
    let mut stats = RbPassStats::default();
    assert_eq!(unsafe { rb_baker_run_pass(baker, &mut stats) }, RbStatus::Ok);
    let mut map = ptr::null_mut();
    assert_eq!(unsafe { rb_baker_lightmap(baker, false, &mut map) }, RbStatus::Ok);
    let rtex_dir = tempfile::tempdir().unwrap();
    let p = CString::new(rtex_dir.path().join("d.rtex").to_str().unwrap()).unwrap();
    assert_eq!(unsafe { rb_lightmap_save_rtex(map, p.as_ptr()) }, RbStatus::Ok);
    let occupied = radbake::io::import_rtex(p.to_str().unwrap())
        .unwrap()
        .mask
        .iter()
        .filter(|&&m| m)
        .count() as u64;
    assert_eq!(stats.rays_traced, occupied * 16);
    unsafe {
        rb_lightmap_free(map);
        rb_baker_free(baker);
        rb_scene_free(scene);
    }
}

#[test]
fn version_is_nul_terminated() {
    let v = unsafe { CStr::from_ptr(rb_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_is_valid_c() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/radbake.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for sym in ["rb_baker_new", "rb_dfpr", "RB_STATUS_OK", "typedef struct RbBaker RbBaker"] {
        assert!(text.contains(sym), "header lacks {sym}");
    }
    let Ok(out) = std::process::Command::new("cc")
        .args(["-fsyntax-only", "-x", "c", "-std=c99"])
        .arg(&header)
        .output()
    else {
        eprintln!("no C compiler; skipped syntax check");
        return;
    };
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn c_program_links_and_runs() {
    let manifest = Path::new(env!("CARGO_MANIFEST_DIR"));
    // target/<profile>/deps/<test binary>
    let exe = std::env::current_exe().unwrap();
    let profile_dir = exe.parent().and_then(Path::parent).unwrap();
    let lib = profile_dir.join("libradbake_ffi.a");
    if !lib.exists() {
        eprintln!("static library not built; skipped");
        return;
    }
    let out_dir = tempfile::tempdir().unwrap();
    let bin = out_dir.path().join("smoke");
    let Ok(build) = std::process::Command::new("cc")
        .arg(manifest.join("tests/c/smoke.c"))
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .output()
    else {
        eprintln!("no C compiler; skipped");
        return;
    };
    assert!(build.status.success(), "{}", String::from_utf8_lossy(&build.stderr));
    let run = std::process::Command::new(&bin).output().unwrap();
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    assert!(String::from_utf8_lossy(&run.stdout).starts_with("pass 1 rays "));
}
