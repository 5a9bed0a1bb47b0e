//! C ABI over the `radbake` library.
//!
//! Objects are opaque heap handles created by `rb_*_new`/`rb_*_load` calls
//! and released with the matching `rb_*_free`. Every fallible call returns an
//! [`RbStatus`]; on failure a message is kept per thread and can be read with
//! [`rb_last_error_message`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;

use radbake::hemisampler::generate_directions;
use radbake::io::{export_png, export_rtex, import_rtex};
use radbake::metrics::{dfpr, Lightmap};
use radbake::scene::{load_scene, Scene, SceneFormat};
use radbake::solver::{Baker, Mode, SolverConfig};
use radbake::uvraster::Resolution;
use radbake::Error;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RbStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Io = 3,
    Parse = 4,
    Config = 5,
    Format = 6,
    Internal = 7,
}

/// Loaded scene.
pub struct RbScene(Scene);

/// Baking session over one scene and lightmap resolution.
pub struct RbBaker(Baker);

/// RGB lightmap with occupancy.
pub struct RbLightmap(Lightmap);

/// Counters of one finished pass.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct RbPassStats {
    pub pass: u32,
    pub rays_traced: u64,
    pub raymarches: u64,
    pub cache_hits: u64,
    pub wall_ms: f64,
    pub energy_sum: f64,
}

const DEFAULT_DIRECTION_COUNT: usize = 64;

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn status_of(e: &Error) -> RbStatus {
    match e {
        Error::Io { .. } => RbStatus::Io,
        Error::Parse { .. }
        | Error::NonTriangleFace { .. }
        | Error::MissingUv { .. }
        | Error::MissingNormal { .. } => RbStatus::Parse,
        Error::Config(_) => RbStatus::Config,
        Error::Overflow(_) => RbStatus::Internal,
        _ => RbStatus::Format,
    }
}

fn fail(status: RbStatus, msg: impl Into<String>) -> RbStatus {
    set_error(msg);
    status
}

trait IntoStatus<T> {
    fn or_status(self) -> Result<T, RbStatus>;
}

impl<T> IntoStatus<T> for radbake::Result<T> {
    fn or_status(self) -> Result<T, RbStatus> {
        self.map_err(|e| fail(status_of(&e), e.to_string()))
    }
}

/// Runs `f`, turning panics into [`RbStatus::Internal`].
fn guard(f: impl FnOnce() -> Result<(), RbStatus>) -> RbStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => RbStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => fail(RbStatus::Internal, "internal panic"),
    }
}

unsafe fn arg<'a, T>(p: *const T, name: &str) -> Result<&'a T, RbStatus> {
    p.as_ref().ok_or_else(|| fail(RbStatus::NullPointer, format!("{name} is null")))
}

unsafe fn arg_mut<'a, T>(p: *mut T, name: &str) -> Result<&'a mut T, RbStatus> {
    p.as_mut().ok_or_else(|| fail(RbStatus::NullPointer, format!("{name} is null")))
}

unsafe fn path_arg(p: *const c_char, name: &str) -> Result<PathBuf, RbStatus> {
    if p.is_null() {
        return Err(fail(RbStatus::NullPointer, format!("{name} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map(PathBuf::from)
        .map_err(|_| fail(RbStatus::InvalidArgument, format!("{name} is not UTF-8")))
}

unsafe fn put<T>(out: *mut *mut T, value: T) -> Result<(), RbStatus> {
    let slot = arg_mut(out, "out")?;
    *slot = Box::into_raw(Box::new(value));
    Ok(())
}

unsafe fn free<T>(p: *mut T) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn rb_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failure on this thread, or NULL. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn rb_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |s| s.as_ptr()))
}

/// Loads an OBJ scene with its JSON material table.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rb_scene_load(path: *const c_char, out: *mut *mut RbScene) -> RbStatus {
    guard(|| {
        let path = path_arg(path, "path")?;
        let scene = load_scene(path, SceneFormat::ObjSubset).or_status()?;
        put(out, RbScene(scene))
    })
}

/// The built-in Cornell-style box: unit cube with a ceiling light.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rb_scene_box(out: *mut *mut RbScene) -> RbStatus {
    guard(|| put(out, RbScene(radbake::fixtures::box_scene())))
}

/// Number of triangles, or 0 for NULL.
///
/// # Safety
/// `scene` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn rb_scene_triangle_count(scene: *const RbScene) -> usize {
    scene.as_ref().map_or(0, |s| s.0.triangles().len())
}

/// # Safety
/// `scene` must be NULL or a handle not freed before.
#[no_mangle]
pub unsafe extern "C" fn rb_scene_free(scene: *mut RbScene) {
    free(scene)
}

/// Creates a baker for `scene` at `width × height`. `config_json` holds
/// solver settings as a JSON object and may be NULL for the defaults.
/// `direction_count` sizes the generated direction set in directional mode
/// (0 picks 64); other modes ignore it. The scene is copied.
///
/// # Safety
/// `scene` must be a live handle, `config_json` NULL or NUL-terminated, and
/// `out` writable.
#[no_mangle]
pub unsafe extern "C" fn rb_baker_new(
    scene: *const RbScene,
    width: u32,
    height: u32,
    config_json: *const c_char,
    direction_count: usize,
    out: *mut *mut RbBaker,
) -> RbStatus {
    guard(|| {
        let scene = arg(scene, "scene")?;
        if width == 0 || height == 0 {
            return Err(fail(RbStatus::InvalidArgument, "resolution must be positive"));
        }
        let cfg: SolverConfig = if config_json.is_null() {
            SolverConfig::default()
        } else {
            let text = CStr::from_ptr(config_json)
                .to_str()
                .map_err(|_| fail(RbStatus::InvalidArgument, "config is not UTF-8"))?;
            serde_json::from_str(text).map_err(|e| fail(RbStatus::Config, e.to_string()))?
        };
        let dirs = if cfg.mode == Mode::Directional {
            let count = if direction_count == 0 {
                DEFAULT_DIRECTION_COUNT
            } else {
                direction_count
            };
            Some(generate_directions(count, cfg.seed).or_status()?)
        } else {
            None
        };
        let baker = Baker::new(scene.0.clone(), Resolution::new(width, height), cfg, dirs).or_status()?;
        put(out, RbBaker(baker))
    })
}

/// Runs one pass. `stats` may be NULL.
///
/// # Safety
/// `baker` must be a live handle; `stats` NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn rb_baker_run_pass(baker: *mut RbBaker, stats: *mut RbPassStats) -> RbStatus {
    guard(|| {
        let baker = arg_mut(baker, "baker")?;
        let r = baker.0.run_pass().or_status()?;
        if let Some(s) = stats.as_mut() {
            *s = RbPassStats {
                pass: r.pass,
                rays_traced: r.rays_traced,
                raymarches: r.raymarches,
                cache_hits: r.cache_hits,
                wall_ms: r.wall_ms,
                energy_sum: r.energy_sum,
            };
        }
        Ok(())
    })
}

/// Snapshot of the latest result. With `sewn` set, empty texels bordering
/// patches carry their neighbor's lighting, as in exported files.
///
/// # Safety
/// `baker` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn rb_baker_lightmap(baker: *const RbBaker, sewn: bool, out: *mut *mut RbLightmap) -> RbStatus {
    guard(|| {
        let baker = arg(baker, "baker")?;
        let map = if sewn {
            baker.0.export_lightmap()
        } else {
            baker.0.lightmap()
        };
        put(out, RbLightmap(map))
    })
}

/// # Safety
/// `baker` must be NULL or a handle not freed before.
#[no_mangle]
pub unsafe extern "C" fn rb_baker_free(baker: *mut RbBaker) {
    free(baker)
}

/// # Safety
/// `path` must be NUL-terminated; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn rb_lightmap_load_rtex(path: *const c_char, out: *mut *mut RbLightmap) -> RbStatus {
    guard(|| {
        let path = path_arg(path, "path")?;
        put(out, RbLightmap(import_rtex(path).or_status()?))
    })
}

/// # Safety
/// `map` must be a live handle; `path` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn rb_lightmap_save_rtex(map: *const RbLightmap, path: *const c_char) -> RbStatus {
    guard(|| {
        let map = arg(map, "map")?;
        export_rtex(&map.0, path_arg(path, "path")?).or_status()
    })
}

/// 8-bit PNG with `clamp_to` mapped to white.
///
/// # Safety
/// `map` must be a live handle; `path` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn rb_lightmap_save_png(map: *const RbLightmap, path: *const c_char, clamp_to: f64) -> RbStatus {
    guard(|| {
        let map = arg(map, "map")?;
        export_png(&map.0, path_arg(path, "path")?, clamp_to, 1).or_status()
    })
}

/// # Safety
/// `map` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn rb_lightmap_width(map: *const RbLightmap) -> u32 {
    map.as_ref().map_or(0, |m| m.0.resolution.width)
}

/// # Safety
/// `map` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn rb_lightmap_height(map: *const RbLightmap) -> u32 {
    map.as_ref().map_or(0, |m| m.0.resolution.height)
}

/// Copies interleaved RGB floats, row-major, into `buf`, which must hold at
/// least `3 · width · height` values.
///
/// # Safety
/// `map` must be a live handle and `buf` valid for `len` floats.
#[no_mangle]
pub unsafe extern "C" fn rb_lightmap_copy_rgb(map: *const RbLightmap, buf: *mut f32, len: usize) -> RbStatus {
    guard(|| {
        let map = arg(map, "map")?;
        let need = 3 * map.0.rgb.len();
        if buf.is_null() {
            return Err(fail(RbStatus::NullPointer, "buf is null"));
        }
        if len < need {
            return Err(fail(RbStatus::InvalidArgument, format!("buffer holds {len} floats, need {need}")));
        }
        let dst = std::slice::from_raw_parts_mut(buf, need);
        for (d, s) in dst.chunks_exact_mut(3).zip(&map.0.rgb) {
            d.copy_from_slice(s);
        }
        Ok(())
    })
}

/// Mean per-texel RGB distance between `candidate` and `reference`.
///
/// # Safety
/// Both maps must be live handles; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn rb_dfpr(candidate: *const RbLightmap, reference: *const RbLightmap, out: *mut f64) -> RbStatus {
    guard(|| {
        let (a, b) = (arg(candidate, "candidate")?, arg(reference, "reference")?);
        let out = arg_mut(out, "out")?;
        *out = dfpr(&a.0, &b.0).or_status()?;
        Ok(())
    })
}

/// # Safety
/// `map` must be NULL or a handle not freed before.
#[no_mangle]
pub unsafe extern "C" fn rb_lightmap_free(map: *mut RbLightmap) {
    free(map)
}
