//! Command-line front end.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::hemisampler::{generate_directions, nearest_neighbor_distances, DirectionSet};
use crate::io::{export_png, export_rtex, import_rtex, write_png_rgb8, RtexImage};
use crate::metrics::{dfpr, dfpr_masked};
use crate::scene::{load_scene, SceneFormat};
use crate::solver::{Baker, DirectionalWeighting, Mode, SolverConfig, Visibility};
use crate::uvraster::{build_texture_group, Resolution, TextureGroup};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_INTERNAL: i32 = 3;

/// Error tagged with the pipeline stage it came from.
#[derive(Debug)]
pub struct CliError {
    pub stage: &'static str,
    pub error: Error,
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self.error {
            Error::Config(_) => EXIT_USAGE,
            Error::Overflow(_) => EXIT_INTERNAL,
            _ => EXIT_DATA,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.stage, self.error)
    }
}

trait Stage<T> {
    fn stage(self, stage: &'static str) -> Result<T, CliError>;
}

impl<T> Stage<T> for crate::Result<T> {
    fn stage(self, stage: &'static str) -> Result<T, CliError> {
        self.map_err(|error| CliError { stage, error })
    }
}

/// `N` for a square map or `WxH`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ResArg(pub Resolution);

impl FromStr for ResArg {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let parse = |t: &str| -> Result<u32, String> {
            let v: u32 = t.trim().parse().map_err(|_| format!("bad resolution {s:?}"))?;
            if v == 0 {
                return Err("resolution must be positive".into());
            }
            Ok(v)
        };
        match s.split_once(['x', 'X']) {
            Some((w, h)) => Ok(ResArg(Resolution::new(parse(w)?, parse(h)?))),
            None => parse(s).map(|n| ResArg(Resolution::square(n))),
        }
    }
}

impl Serialize for ResArg {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format!("{}x{}", self.0.width, self.0.height))
    }
}

impl<'de> Deserialize<'de> for ResArg {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            N(u32),
            S(String),
        }
        match Raw::deserialize(d)? {
            Raw::N(n) => format!("{n}").parse(),
            Raw::S(s) => s.parse(),
        }
        .map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Parser)]
#[command(name = "radbake", version, about = "Progressive radiosity lightmap baker")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Bake a lightmap for an OBJ scene.
    Bake(BakeArgs),
    /// Generate a hemisphere direction table.
    GenDirs(GenDirsArgs),
    /// Deviation between two `.rtex` lightmaps.
    Dfpr(DfprArgs),
    /// Dump the rasterized texture group.
    Inspect(InspectArgs),
}

#[derive(Debug, Args)]
pub struct BakeArgs {
    /// JSON bake configuration; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub scene: Option<PathBuf>,
    /// `N` or `WxH`.
    #[arg(long)]
    pub res: Option<ResArg>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Report path; defaults to `report.jsonl` in the output directory.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Direction table for directional mode.
    #[arg(long)]
    pub dirs: Option<PathBuf>,
    /// Generate this many directions when no table is given.
    #[arg(long)]
    pub dir_count: Option<usize>,
    #[arg(long)]
    pub mode: Option<Mode>,
    /// Contributor window size m (1, 4, 16, 64 or 256).
    #[arg(long)]
    pub window: Option<u32>,
    #[arg(long)]
    pub passes: Option<u32>,
    /// traced, voxel, cached or hybrid:<ratio>.
    #[arg(long)]
    pub visibility: Option<Visibility>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads; 0 uses every core.
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long)]
    pub reflectivity: Option<f64>,
    #[arg(long)]
    pub contribution_clamp: Option<f64>,
    /// Disable the per-contribution clamp.
    #[arg(long, conflicts_with = "contribution_clamp")]
    pub no_clamp: bool,
    #[arg(long)]
    pub form_factor_max: Option<f64>,
    #[arg(long)]
    pub distance_factor: Option<f64>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub batch_ray_limit: Option<u64>,
    #[arg(long)]
    pub gradient_threshold: Option<f64>,
    #[arg(long)]
    pub max_node: Option<u32>,
    #[arg(long)]
    pub voxel_resolution: Option<u32>,
    #[arg(long)]
    pub step_scale: Option<f64>,
    #[arg(long)]
    pub cache_capacity_bits: Option<u64>,
    #[arg(long)]
    pub blur_level: Option<u32>,
    #[arg(long)]
    pub drop_cosine: bool,
    /// verbatim or radiometric.
    #[arg(long)]
    pub directional_weighting: Option<DirectionalWeighting>,
    #[arg(long)]
    pub cull_backfacing: bool,
    #[arg(long)]
    pub skip_dark: bool,
    /// Lighting value mapped to white in PNG output.
    #[arg(long)]
    pub png_clamp: Option<f64>,
    /// Integer bilinear magnification of PNG output.
    #[arg(long)]
    pub upscale: Option<u32>,
}

#[derive(Debug, Args)]
pub struct GenDirsArgs {
    #[arg(long)]
    pub count: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct DfprArgs {
    pub candidate: PathBuf,
    pub reference: PathBuf,
    /// Average only over texels occupied in the reference.
    #[arg(long)]
    pub masked: bool,
}

#[derive(Debug, Args)]
pub struct InspectArgs {
    #[arg(long)]
    pub scene: PathBuf,
    #[arg(long)]
    pub res: ResArg,
    #[arg(long)]
    pub out: PathBuf,
}

/// Bake settings as read from a JSON file.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BakeConfig {
    pub scene: Option<PathBuf>,
    pub resolution: ResArg,
    pub out_dir: PathBuf,
    pub report: Option<PathBuf>,
    pub dirs: Option<PathBuf>,
    pub dir_count: usize,
    pub png_clamp: f64,
    pub upscale: u32,
    pub solver: SolverConfig,
}

impl Default for BakeConfig {
    fn default() -> Self {
        Self {
            scene: None,
            resolution: ResArg(Resolution::square(64)),
            out_dir: PathBuf::from("out"),
            report: None,
            dirs: None,
            dir_count: 64,
            png_clamp: 1.0,
            upscale: 1,
            solver: SolverConfig::default(),
        }
    }
}

impl BakeConfig {
    pub fn load(path: &Path) -> crate::Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    /// Applies command-line overrides.
    pub fn apply(&mut self, a: &BakeArgs) {
        fn set<T: Clone>(dst: &mut T, v: &Option<T>) {
            if let Some(v) = v {
                *dst = v.clone();
            }
        }
        if a.scene.is_some() {
            self.scene = a.scene.clone();
        }
        set(&mut self.resolution, &a.res);
        set(&mut self.out_dir, &a.out);
        if a.report.is_some() {
            self.report = a.report.clone();
        }
        if a.dirs.is_some() {
            self.dirs = a.dirs.clone();
        }
        set(&mut self.dir_count, &a.dir_count);
        set(&mut self.png_clamp, &a.png_clamp);
        set(&mut self.upscale, &a.upscale);
        let s = &mut self.solver;
        set(&mut s.mode, &a.mode);
        set(&mut s.window_m, &a.window);
        set(&mut s.passes, &a.passes);
        set(&mut s.visibility, &a.visibility);
        set(&mut s.seed, &a.seed);
        set(&mut s.workers, &a.workers);
        set(&mut s.reflectivity, &a.reflectivity);
        if a.contribution_clamp.is_some() {
            s.contribution_clamp = a.contribution_clamp;
        }
        if a.no_clamp {
            s.contribution_clamp = None;
        }
        set(&mut s.form_factor_max, &a.form_factor_max);
        set(&mut s.distance_factor, &a.distance_factor);
        if a.epsilon.is_some() {
            s.epsilon = a.epsilon;
        }
        set(&mut s.batch_ray_limit, &a.batch_ray_limit);
        set(&mut s.gradient_threshold, &a.gradient_threshold);
        set(&mut s.max_node, &a.max_node);
        set(&mut s.voxel_resolution, &a.voxel_resolution);
        set(&mut s.step_scale, &a.step_scale);
        set(&mut s.cache_capacity_bits, &a.cache_capacity_bits);
        set(&mut s.blur_level, &a.blur_level);
        set(&mut s.directional_weighting, &a.directional_weighting);
        s.drop_cosine |= a.drop_cosine;
        s.cull_backfacing |= a.cull_backfacing;
        s.skip_dark |= a.skip_dark;
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> crate::Result<()> {
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

fn create_dir(path: &Path) -> crate::Result<()> {
    fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}

pub fn cmd_bake(args: &BakeArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let mut cfg = match &args.config {
        Some(p) => BakeConfig::load(p).stage("config")?,
        None => BakeConfig::default(),
    };
    cfg.apply(args);
    let scene_path = cfg
        .scene
        .clone()
        .ok_or_else(|| Error::Config("no scene given".into()))
        .stage("config")?;
    if cfg.upscale == 0 {
        return Err(Error::Config("upscale must be at least 1".into())).stage("config");
    }
    let res = cfg.resolution.0;
    cfg.solver.validate(res).stage("config")?;

    let scene = load_scene(&scene_path, SceneFormat::ObjSubset).stage("load")?;
    let dirs = if cfg.solver.mode == Mode::Directional {
        Some(match &cfg.dirs {
            Some(p) => DirectionSet::load(p).stage("directions")?,
            None => generate_directions(cfg.dir_count, cfg.solver.seed).stage("directions")?,
        })
    } else {
        None
    };
    let mut baker = Baker::new(scene, res, cfg.solver.clone(), dirs).stage("setup")?;

    create_dir(&cfg.out_dir).stage("output")?;
    let report_path = cfg.report.clone().unwrap_or_else(|| cfg.out_dir.join("report.jsonl"));
    let mut report = String::new();
    for _ in 0..cfg.solver.passes {
        let r = baker.run_pass().stage("pass")?;
        let map = baker.export_lightmap();
        let stem = cfg.out_dir.join(format!("lightmap_pass{}", r.pass));
        export_rtex(&map, stem.with_extension("rtex")).stage("export")?;
        export_png(&map, stem.with_extension("png"), cfg.png_clamp, cfg.upscale).stage("export")?;
        let line = serde_json::to_string(&r).map_err(|e| CliError {
            stage: "report",
            error: Error::Format(e.to_string()),
        })?;
        let _ = writeln!(stdout, "{line}");
        report.push_str(&line);
        report.push('\n');
        write_file(&report_path, report.as_bytes()).stage("report")?;
    }
    Ok(())
}

pub fn cmd_gen_dirs(args: &GenDirsArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let set = generate_directions(args.count, args.seed).stage("directions")?;
    set.save(&args.out).stage("output")?;
    let mut nn = nearest_neighbor_distances(&set.points);
    nn.sort_by(f64::total_cmp);
    let median = if nn.len() % 2 == 1 {
        nn[nn.len() / 2]
    } else {
        0.5 * (nn[nn.len() / 2 - 1] + nn[nn.len() / 2])
    };
    let _ = writeln!(stdout, "directions {} min_nn {:.6} median_nn {:.6}", set.len(), nn[0], median);
    Ok(())
}

pub fn cmd_dfpr(args: &DfprArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let a = import_rtex(&args.candidate).stage("read")?;
    let b = import_rtex(&args.reference).stage("read")?;
    let d = if args.masked { dfpr_masked(&a, &b) } else { dfpr(&a, &b) }.stage("compare")?;
    let _ = writeln!(stdout, "{d:.6}");
    Ok(())
}

/// One inspectable map: raw floats and their 8-bit preview.
struct Dump {
    name: &'static str,
    channels: u32,
    data: Vec<f32>,
    preview: Vec<u8>,
}

fn to_byte(v: f64) -> u8 {
    crate::io::quantize(v as f32, 1.0)
}

fn max_or_one(it: impl Iterator<Item = f32>) -> f64 {
    let m = it.fold(0.0f32, f32::max) as f64;
    if m > 0.0 {
        m
    } else {
        1.0
    }
}

fn inspect_dumps(tg: &TextureGroup, scene_bounds: crate::math::Aabb) -> Vec<Dump> {
    let ext = scene_bounds.extent();
    let norm = |v: f32, axis: usize| {
        let (lo, e) = (scene_bounds.min[axis], ext[axis]);
        if e > 0.0 {
            (v as f64 - lo) / e
        } else {
            0.0
        }
    };
    let occ = |i: usize| tg.is_occupied(i);
    let n = tg.resolution.texel_count();
    let arf_max = max_or_one(tg.arf.iter().copied());
    let em_max = max_or_one(tg.emission.iter().flatten().copied());
    let mut pos_preview = Vec::with_capacity(3 * n);
    let mut nrm_preview = Vec::with_capacity(3 * n);
    let mut mat_preview = Vec::with_capacity(3 * n);
    let mut arf_preview = Vec::with_capacity(3 * n);
    let mut em_preview = Vec::with_capacity(3 * n);
    for i in 0..n {
        let o = occ(i);
        for k in 0..3 {
            pos_preview.push(if o { to_byte(norm(tg.pos[i][k], k)) } else { 0 });
            nrm_preview.push(if o { to_byte(tg.nrm[i][k] as f64 * 0.5 + 0.5) } else { 0 });
            mat_preview.push(to_byte(tg.mat[i][k] as f64));
            arf_preview.push(to_byte(tg.arf[i] as f64 / arf_max));
            em_preview.push(to_byte(tg.emission[i][k] as f64 / em_max));
        }
    }
    vec![
        Dump {
            name: "pos",
            channels: 4,
            data: tg.pos.iter().flatten().copied().collect(),
            preview: pos_preview,
        },
        Dump {
            name: "nrm",
            channels: 3,
            data: tg.nrm.iter().flatten().copied().collect(),
            preview: nrm_preview,
        },
        Dump {
            name: "mat",
            channels: 3,
            data: tg.mat.iter().flatten().copied().collect(),
            preview: mat_preview,
        },
        Dump {
            name: "arf",
            channels: 1,
            data: tg.arf.clone(),
            preview: arf_preview,
        },
        Dump {
            name: "emission",
            channels: 3,
            data: tg.emission.iter().flatten().copied().collect(),
            preview: em_preview,
        },
    ]
}

pub fn cmd_inspect(args: &InspectArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let scene = load_scene(&args.scene, SceneFormat::ObjSubset).stage("load")?;
    let res = args.res.0;
    let tg = build_texture_group(&scene, res).stage("rasterize")?;
    create_dir(&args.out).stage("output")?;
    for d in inspect_dumps(&tg, scene.bounds()) {
        let img = RtexImage::new(res.width, res.height, d.channels, d.data).stage("export")?;
        img.save(args.out.join(format!("{}.rtex", d.name))).stage("export")?;
        write_png_rgb8(args.out.join(format!("{}.png", d.name)), res.width, res.height, &d.preview)
            .stage("export")?;
    }
    let _ = writeln!(stdout, "patches {}", tg.occupied_count());
    Ok(())
}

/// Runs the CLI on `argv` and returns the process exit code.
pub fn run<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{e}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(stderr, "{e}");
                    EXIT_USAGE
                }
            };
        }
    };
    let result = std::panic::catch_unwind(std::panic::AssertUnwindSafe(|| match &cli.command {
        Command::Bake(a) => cmd_bake(a, stdout),
        Command::GenDirs(a) => cmd_gen_dirs(a, stdout),
        Command::Dfpr(a) => cmd_dfpr(a, stdout),
        Command::Inspect(a) => cmd_inspect(a, stdout),
    }));
    match result {
        Ok(Ok(())) => EXIT_OK,
        Ok(Err(e)) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
        Err(_) => {
            let _ = writeln!(stderr, "error: internal failure");
            EXIT_INTERNAL
        }
    }
}
