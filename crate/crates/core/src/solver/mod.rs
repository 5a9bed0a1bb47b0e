//! Progressive gathering solver.

pub mod classical;
pub mod config;
pub mod directional;
pub mod gather;
pub mod quadtree;
pub mod sampling;
pub mod viscache;

use std::sync::atomic::{AtomicU64, Ordering};
use std::time::Instant;

pub use classical::{classical_solve, form_factor_matrix, MAX_DENSE_PATCHES};
pub use config::{
    DirectionalWeighting, Mode, SolverConfig, Visibility, DEFAULT_BATCH_RAY_LIMIT,
    DEFAULT_CACHE_CAPACITY_BITS, WINDOW_SIZES,
};
pub use directional::{directional_pass, resolve_hit_texel};
pub use gather::{batch_ranges, form_factor, form_factor_between, gather_pass, FormFactorSample, VisibilityContext};
pub use quadtree::{alpha_sum, build_alpha_quadtree, gradient};
pub use sampling::{build_lig_mipmaps, contributors, select_contributors, window_hash, Contributor, MipPyramid};
pub use viscache::{cantor, pair_address, pair_address_of, VisCache};

use crate::error::{Error, Result};
use crate::hemisampler::DirectionSet;
use crate::metrics::{Lightmap, PassReport};
use crate::scene::Scene;
use crate::tracer::{default_epsilon, Bvh, DEFAULT_MAX_LEAF_SIZE};
use crate::uvraster::{build_texture_group, Resolution, TextureGroup};
use crate::voxel::{voxelize, VoxelMap};

/// Work counters shared by the threads of a pass.
#[derive(Debug, Default)]
pub struct Counters {
    pub rays_traced: AtomicU64,
    pub raymarches: AtomicU64,
    pub cache_hits: AtomicU64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CounterSnapshot {
    pub rays_traced: u64,
    pub raymarches: u64,
    pub cache_hits: u64,
}

impl Counters {
    pub fn snapshot(&self) -> CounterSnapshot {
        CounterSnapshot {
            rays_traced: self.rays_traced.load(Ordering::Relaxed),
            raymarches: self.raymarches.load(Ordering::Relaxed),
            cache_hits: self.cache_hits.load(Ordering::Relaxed),
        }
    }
}

/// A scene rasterized into a lightmap plus everything needed to run passes.
pub struct Baker {
    scene: Scene,
    tg: TextureGroup,
    bvh: Bvh,
    voxels: Option<VoxelMap>,
    cache: Option<VisCache>,
    dirs: Option<DirectionSet>,
    cfg: SolverConfig,
    epsilon: f64,
    passes_done: u32,
    pool: rayon::ThreadPool,
}

impl Baker {
    /// Directional mode needs `dirs`; other modes ignore it.
    pub fn new(scene: Scene, resolution: Resolution, cfg: SolverConfig, dirs: Option<DirectionSet>) -> Result<Self> {
        cfg.validate(resolution)?;
        if cfg.mode == Mode::Directional && dirs.as_ref().is_none_or(|d| d.is_empty()) {
            return Err(Error::Config("directional mode needs a direction set".into()));
        }
        let mut tg = build_texture_group(&scene, resolution)?;
        tg.reset_lighting();
        let bvh = Bvh::build(&scene, DEFAULT_MAX_LEAF_SIZE);
        let epsilon = cfg.epsilon.unwrap_or_else(|| default_epsilon(&scene));
        let voxels = if cfg.visibility.needs_voxels() {
            Some(voxelize(&scene, cfg.voxel_resolution)?)
        } else {
            None
        };
        let cache = if cfg.visibility == Visibility::Cached {
            VisCache::for_texture_group(&tg, cfg.cache_capacity_bits)?
        } else {
            None
        };
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.workers)
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
        Ok(Self {
            scene,
            tg,
            bvh,
            voxels,
            cache,
            dirs,
            cfg,
            epsilon,
            passes_done: 0,
            pool,
        })
    }

    pub fn config(&self) -> &SolverConfig {
        &self.cfg
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn scene(&self) -> &Scene {
        &self.scene
    }

    pub fn bvh(&self) -> &Bvh {
        &self.bvh
    }

    pub fn voxels(&self) -> Option<&VoxelMap> {
        self.voxels.as_ref()
    }

    pub fn texture_group(&self) -> &TextureGroup {
        &self.tg
    }

    pub fn passes_done(&self) -> u32 {
        self.passes_done
    }

    /// True when cached visibility was requested and the lightmap fits.
    pub fn has_cache(&self) -> bool {
        self.cache.is_some()
    }

    /// Runs one pass. The previous output becomes the input; the new result
    /// lands in `lig_out`.
    pub fn run_pass(&mut self) -> Result<PassReport> {
        let start = Instant::now();
        let counters = Counters::default();
        let pass_index = self.passes_done as u64;
        if self.passes_done > 0 {
            self.tg.swap_lighting();
        }
        let cfg = &self.cfg;
        let tg = &mut self.tg;
        let mut batches = 1;
        self.pool.install(|| -> Result<()> {
            match cfg.mode {
                Mode::Directional => {
                    let mips = if cfg.blur_level > 0 {
                        Some(build_lig_mipmaps(tg, cfg.blur_level)?)
                    } else {
                        None
                    };
                    let dirs = self.dirs.as_ref().expect("checked in new");
                    directional_pass(tg, &self.scene, &self.bvh, dirs, cfg, self.epsilon, mips.as_ref(), &counters);
                }
                mode => {
                    if mode == Mode::Subdiv {
                        build_alpha_quadtree(tg, cfg.gradient_threshold, cfg.max_node);
                    }
                    let mips = if mode == Mode::Mipmapped {
                        Some(build_lig_mipmaps(tg, cfg.window_side().ilog2())?)
                    } else {
                        None
                    };
                    if let Some(cache) = self.cache.as_mut() {
                        if !cache.is_populated() {
                            cache.populate(tg, &self.bvh, self.epsilon, &counters);
                        }
                    }
                    let ctx = VisibilityContext {
                        bvh: &self.bvh,
                        voxels: self.voxels.as_ref(),
                        cache: self.cache.as_ref(),
                        visibility: cfg.visibility,
                        epsilon: self.epsilon,
                        step_scale: cfg.step_scale,
                    };
                    batches = gather_pass(tg, &ctx, cfg, pass_index, mips.as_ref(), &counters);
                }
            }
            Ok(())
        })?;
        self.passes_done += 1;
        let c = counters.snapshot();
        let energy_sum = self.lightmap().energy();
        Ok(PassReport {
            pass: self.passes_done,
            mode: self.cfg.mode,
            rays_traced: c.rays_traced,
            raymarches: c.raymarches,
            cache_hits: c.cache_hits,
            wall_ms: start.elapsed().as_secs_f64() * 1e3,
            energy_sum,
            batches,
            resolution: [self.tg.resolution.width, self.tg.resolution.height],
            epsilon: self.epsilon,
            config: self.cfg.clone(),
        })
    }

    /// Runs `cfg.passes` passes.
    pub fn run(&mut self) -> Result<Vec<PassReport>> {
        (0..self.cfg.passes).map(|_| self.run_pass()).collect()
    }

    /// Latest lighting, seams not sewn.
    pub fn lightmap(&self) -> Lightmap {
        Lightmap::from_lighting(&self.tg, &self.tg.lig_out)
    }

    /// Latest lighting with seams sewn, for export.
    pub fn export_lightmap(&self) -> Lightmap {
        Lightmap::from_lighting(&self.tg, &self.tg.sewn_lig_out())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn first_pass_adds_light_to_the_floor() {
        let mut b = Baker::new(fixtures::box_scene(), Resolution::square(16), SolverConfig::default(), None).unwrap();
        let before = b.lightmap().energy();
        let r = b.run_pass().unwrap();
        assert_eq!(r.pass, 1);
        assert!(r.rays_traced > 0);
        assert!(r.energy_sum > before);
    }

    #[test]
    fn directional_requires_directions() {
        let cfg = SolverConfig::with_mode(Mode::Directional);
        assert!(matches!(
            Baker::new(fixtures::box_scene(), Resolution::square(8), cfg, None),
            Err(Error::Config(_))
        ));
    }
}
