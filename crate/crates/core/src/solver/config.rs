use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::uvraster::Resolution;

/// Contributor selection strategy for a pass.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Full,
    Stride,
    MonteCarlo,
    Mipmapped,
    Subdiv,
    Directional,
}

impl Mode {
    pub const ALL: [Mode; 6] = [
        Mode::Full,
        Mode::Stride,
        Mode::MonteCarlo,
        Mode::Mipmapped,
        Mode::Subdiv,
        Mode::Directional,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Full => "full",
            Mode::Stride => "stride",
            Mode::MonteCarlo => "monte_carlo",
            Mode::Mipmapped => "mipmapped",
            Mode::Subdiv => "subdiv",
            Mode::Directional => "directional",
        }
    }

    /// Modes that sample one contributor per window.
    pub fn uses_window(self) -> bool {
        matches!(self, Mode::Stride | Mode::MonteCarlo | Mode::Mipmapped)
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Mode::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown mode {s:?}")))
    }
}

/// Visibility backend.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Visibility {
    Traced,
    Voxel,
    /// Replace the fraction `ratio` of traces with voxel raymarches.
    Hybrid { ratio: f64 },
    Cached,
}

impl Visibility {
    pub fn needs_voxels(self) -> bool {
        matches!(self, Visibility::Voxel | Visibility::Hybrid { .. })
    }
}

impl fmt::Display for Visibility {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Visibility::Traced => f.write_str("traced"),
            Visibility::Voxel => f.write_str("voxel"),
            Visibility::Hybrid { ratio } => write!(f, "hybrid:{ratio}"),
            Visibility::Cached => f.write_str("cached"),
        }
    }
}

impl FromStr for Visibility {
    type Err = Error;

    /// `traced`, `voxel`, `cached` or `hybrid:<ratio>`.
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "traced" => Ok(Visibility::Traced),
            "voxel" => Ok(Visibility::Voxel),
            "cached" => Ok(Visibility::Cached),
            _ => {
                let ratio = s
                    .strip_prefix("hybrid:")
                    .and_then(|r| r.parse::<f64>().ok())
                    .ok_or_else(|| Error::Config(format!("unknown visibility {s:?}")))?;
                Ok(Visibility::Hybrid { ratio })
            }
        }
    }
}

/// How a directional sample is weighted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DirectionalWeighting {
    /// `g = cos / r²` clamped, times `rho / (pi |dirs|)`.
    Verbatim,
    /// Each sample carries `rho / |dirs|`; the disk-projected direction set
    /// already has a cosine density.
    Radiometric,
}

impl FromStr for DirectionalWeighting {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "verbatim" => Ok(Self::Verbatim),
            "radiometric" => Ok(Self::Radiometric),
            _ => Err(Error::Config(format!("unknown directional weighting {s:?}"))),
        }
    }
}

pub const WINDOW_SIZES: [u32; 5] = [1, 4, 16, 64, 256];
pub const DEFAULT_BATCH_RAY_LIMIT: u64 = 128 * 128 * 128 * 128;
pub const DEFAULT_CACHE_CAPACITY_BITS: u64 = 8 << 32;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub mode: Mode,
    /// Patches per sample for windowed modes.
    pub window_m: u32,
    pub gradient_threshold: f64,
    pub max_node: u32,
    /// Reflectivity factor rho.
    pub reflectivity: f64,
    /// Per-channel cap on each added contribution; `None` disables it.
    pub contribution_clamp: Option<f64>,
    pub form_factor_max: f64,
    pub distance_factor: f64,
    /// Ray offset; `None` means 1e-4 of the scene diagonal.
    pub epsilon: Option<f64>,
    pub batch_ray_limit: u64,
    pub visibility: Visibility,
    pub passes: u32,
    pub voxel_resolution: u32,
    pub step_scale: f64,
    pub cache_capacity_bits: u64,
    pub seed: u64,
    /// Worker threads; 0 uses every available core.
    pub workers: usize,
    /// Mip level sampled at directional hits.
    pub blur_level: u32,
    pub drop_cosine: bool,
    pub directional_weighting: DirectionalWeighting,
    /// Skip the trace for pairs facing away from each other.
    pub cull_backfacing: bool,
    /// Skip contributors whose lighting is zero.
    pub skip_dark: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            mode: Mode::Full,
            window_m: 1,
            gradient_threshold: 0.05,
            max_node: 16,
            reflectivity: 0.9,
            contribution_clamp: Some(0.05),
            form_factor_max: 1.0,
            distance_factor: 1.0,
            epsilon: None,
            batch_ray_limit: DEFAULT_BATCH_RAY_LIMIT,
            visibility: Visibility::Traced,
            passes: 2,
            voxel_resolution: 64,
            step_scale: crate::voxel::DEFAULT_STEP_SCALE,
            cache_capacity_bits: DEFAULT_CACHE_CAPACITY_BITS,
            seed: 0,
            workers: 0,
            blur_level: 0,
            drop_cosine: false,
            directional_weighting: DirectionalWeighting::Verbatim,
            cull_backfacing: false,
            skip_dark: false,
        }
    }
}

impl SolverConfig {
    pub fn with_mode(mode: Mode) -> Self {
        Self {
            mode,
            ..Self::default()
        }
    }

    /// Side length of a sampling window.
    pub fn window_side(&self) -> u32 {
        (self.window_m as f64).sqrt().round() as u32
    }

    pub fn validate(&self, res: Resolution) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if !WINDOW_SIZES.contains(&self.window_m) {
            return bad(format!("window_m must be one of {WINDOW_SIZES:?}, got {}", self.window_m));
        }
        if !self.mode.uses_window() && self.window_m != 1 {
            return bad(format!("mode {} does not take a sampling window", self.mode));
        }
        if self.mode.uses_window() && self.window_side() > res.width.min(res.height) {
            return bad(format!("window {} larger than the lightmap", self.window_m));
        }
        if ![2, 4, 8, 16].contains(&self.max_node) {
            return bad(format!("max_node must be 2, 4, 8 or 16, got {}", self.max_node));
        }
        if let Some(c) = self.contribution_clamp {
            if !(c > 0.0) {
                return bad(format!("contribution_clamp must be positive, got {c}"));
            }
        }
        if !(self.form_factor_max > 0.0) {
            return bad("form_factor_max must be positive".into());
        }
        if !(self.reflectivity >= 0.0 && self.reflectivity.is_finite()) {
            return bad("reflectivity must be finite and non-negative".into());
        }
        if !(self.distance_factor > 0.0 && self.distance_factor.is_finite()) {
            return bad("distance_factor must be positive".into());
        }
        if let Some(e) = self.epsilon {
            if !(e > 0.0 && e.is_finite()) {
                return bad(format!("epsilon must be positive, got {e}"));
            }
        }
        if self.batch_ray_limit < res.texel_count() as u64 {
            return bad(format!(
                "batch_ray_limit {} below the texel count {}",
                self.batch_ray_limit,
                res.texel_count()
            ));
        }
        if let Visibility::Hybrid { ratio } = self.visibility {
            if !(0.0..=1.0).contains(&ratio) {
                return bad(format!("hybrid ratio must be in [0, 1], got {ratio}"));
            }
        }
        if self.visibility.needs_voxels()
            && !(crate::voxel::MIN_RESOLUTION..=crate::voxel::MAX_RESOLUTION)
                .contains(&self.voxel_resolution)
        {
            return bad(format!("voxel_resolution {} out of range", self.voxel_resolution));
        }
        if !(self.step_scale > 0.0 && self.step_scale <= 1.0) {
            return bad(format!("step_scale must be in (0, 1], got {}", self.step_scale));
        }
        if self.blur_level > 0 && self.mode != Mode::Directional {
            return bad("blur_level only applies to directional mode".into());
        }
        if self.blur_level >= 16 || (1u32 << self.blur_level) > res.width.min(res.height) {
            return bad(format!("blur_level {} too large", self.blur_level));
        }
        if !(self.gradient_threshold >= 0.0) {
            return bad("gradient_threshold must be non-negative".into());
        }
        Ok(())
    }
}
