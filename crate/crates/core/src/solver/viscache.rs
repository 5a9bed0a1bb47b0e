//! Pairwise visibility cache addressed by a mirrored Cantor pairing.

use std::sync::atomic::{AtomicU64, Ordering};

use crate::error::{Error, Result};
use crate::tracer::{occluded, Bvh};
use crate::uvraster::{PatchId, TextureGroup};

use super::Counters;

/// `x + (x + y)(x + y + 1) / 2`, checked.
pub fn cantor(x: u64, y: u64) -> Result<u64> {
    let s = x.checked_add(y).ok_or(Error::Overflow("cantor"))?;
    let t = s.checked_add(1).ok_or(Error::Overflow("cantor"))?;
    // one of s, s + 1 is even
    let tri = if s % 2 == 0 {
        (s / 2).checked_mul(t)
    } else {
        s.checked_mul(t / 2)
    }
    .ok_or(Error::Overflow("cantor"))?;
    tri.checked_add(x).ok_or(Error::Overflow("cantor"))
}

/// Address of the unordered pair `{a, b}` among `n` patches:
/// `cantor(n - 1 - min, max)`.
pub fn pair_address(a: usize, b: usize, n: usize) -> Result<u64> {
    if a == b || a >= n || b >= n {
        return Err(Error::Config(format!("invalid pair ({a}, {b}) for n = {n}")));
    }
    let (lo, hi) = if a < b { (a, b) } else { (b, a) };
    cantor((n - 1 - lo) as u64, hi as u64)
}

/// One bit per unordered patch pair, set when the pair is mutually visible.
#[derive(Debug)]
pub struct VisCache {
    n: usize,
    /// Smallest address stored; bit `k` of the buffer holds address `base + k`.
    base: u64,
    words: Vec<AtomicU64>,
    populated: bool,
}

impl VisCache {
    /// Allocates a cache covering every pair of occupied texels of `tg`.
    /// Returns `None` when the largest address reaches `capacity_bits`; such
    /// lightmaps are traced without caching.
    pub fn for_texture_group(tg: &TextureGroup, capacity_bits: u64) -> Result<Option<Self>> {
        let n = tg.resolution.texel_count();
        let occ = tg.occupied_indices();
        if occ.len() < 2 {
            return Ok(Some(Self::with_range(n, 0, 0)));
        }
        let (first, last) = (occ[0], *occ.last().unwrap());
        // cantor grows in both arguments, so the extreme pairs bound the range
        let max = pair_address(first, last, n)?;
        if max >= capacity_bits {
            return Ok(None);
        }
        // and for a fixed lower index the smallest address uses the next patch
        let min = occ
            .windows(2)
            .map(|w| pair_address(w[0], w[1], n))
            .try_fold(u64::MAX, |m, a| a.map(|a| m.min(a)))?;
        Ok(Some(Self::with_range(n, min, max)))
    }

    fn with_range(n: usize, min: u64, max: u64) -> Self {
        let bits = max - min + 1;
        let words = (0..bits.div_ceil(64)).map(|_| AtomicU64::new(0)).collect();
        Self {
            n,
            base: min,
            words,
            populated: false,
        }
    }

    pub fn is_populated(&self) -> bool {
        self.populated
    }

    pub fn size_bytes(&self) -> usize {
        self.words.len() * 8
    }

    fn slot(&self, a: usize, b: usize) -> Option<(usize, u64)> {
        let addr = pair_address(a, b, self.n).ok()?;
        let k = addr.checked_sub(self.base)?;
        let word = (k / 64) as usize;
        (word < self.words.len()).then_some((word, 1 << (k % 64)))
    }

    pub fn store(&self, a: usize, b: usize, visible: bool) {
        if let Some((w, bit)) = self.slot(a, b) {
            if visible {
                self.words[w].fetch_or(bit, Ordering::Relaxed);
            } else {
                self.words[w].fetch_and(!bit, Ordering::Relaxed);
            }
        }
    }

    /// Stored bit, or `None` for pairs outside the cache.
    pub fn load(&self, a: usize, b: usize) -> Option<bool> {
        self.slot(a, b)
            .map(|(w, bit)| self.words[w].load(Ordering::Relaxed) & bit != 0)
    }

    /// Traces every unordered pair of occupied texels once and stores the
    /// results. Runs on the current rayon pool.
    pub fn populate(&mut self, tg: &TextureGroup, bvh: &Bvh, epsilon: f64, counters: &Counters) {
        use rayon::prelude::*;
        let occ = tg.occupied_indices();
        let this = &*self;
        occ.par_iter().enumerate().for_each(|(k, &a)| {
            for &b in &occ[k + 1..] {
                cached_visibility(this, bvh, a, b, tg, true, epsilon, counters);
            }
        });
        self.populated = true;
    }
}

/// Visibility of the pair `(a, b)` traced from the lower index to the higher,
/// so the answer does not depend on argument order.
#[inline]
pub fn traced_visibility(tg: &TextureGroup, bvh: &Bvh, a: usize, b: usize, epsilon: f64) -> bool {
    let (lo, hi) = if a < b { (a, b) } else { (b, a) };
    !occluded(bvh, tg.position(lo), tg.position(hi), epsilon)
}

/// First pass: trace, store and return. Later passes: return the stored bit.
/// Pairs the cache cannot address are always traced.
#[allow(clippy::too_many_arguments)]
pub fn cached_visibility(
    cache: &VisCache,
    bvh: &Bvh,
    a: usize,
    b: usize,
    tg: &TextureGroup,
    first_pass: bool,
    epsilon: f64,
    counters: &Counters,
) -> bool {
    if !first_pass {
        if let Some(v) = cache.load(a, b) {
            counters.cache_hits.fetch_add(1, Ordering::Relaxed);
            return v;
        }
    }
    counters.rays_traced.fetch_add(1, Ordering::Relaxed);
    let v = traced_visibility(tg, bvh, a, b, epsilon);
    if first_pass {
        cache.store(a, b, v);
    }
    v
}

/// Convenience for callers holding [`PatchId`]s.
pub fn pair_address_of(a: PatchId, b: PatchId, n: usize) -> Result<u64> {
    pair_address(a.linear, b.linear, n)
}
