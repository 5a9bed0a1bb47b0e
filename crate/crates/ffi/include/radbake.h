#ifndef RADBAKE_H
#define RADBAKE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result code of every fallible call.
typedef enum RbStatus {
  RB_STATUS_OK = 0,
  RB_STATUS_NULL_POINTER = 1,
  RB_STATUS_INVALID_ARGUMENT = 2,
  RB_STATUS_IO = 3,
  RB_STATUS_PARSE = 4,
  RB_STATUS_CONFIG = 5,
  RB_STATUS_FORMAT = 6,
  RB_STATUS_INTERNAL = 7,
} RbStatus;

// Baking session over one scene and lightmap resolution.
typedef struct RbBaker RbBaker;

// RGB lightmap with occupancy.
typedef struct RbLightmap RbLightmap;

// Loaded scene.
typedef struct RbScene RbScene;

// Counters of one finished pass.
typedef struct RbPassStats {
  uint32_t pass;
  uint64_t rays_traced;
  uint64_t raymarches;
  uint64_t cache_hits;
  double wall_ms;
  double energy_sum;
} RbPassStats;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *rb_version(void);

// Message of the last failure on this thread, or NULL. The pointer stays
// valid until the next failing call on the same thread.
const char *rb_last_error_message(void);

// Loads an OBJ scene with its JSON material table.
//
// # Safety
// `path` must be a NUL-terminated string; `out` must be writable.
enum RbStatus rb_scene_load(const char *path, struct RbScene **out);

// The built-in Cornell-style box: unit cube with a ceiling light.
//
// # Safety
// `out` must be writable.
enum RbStatus rb_scene_box(struct RbScene **out);

// Number of triangles, or 0 for NULL.
//
// # Safety
// `scene` must be NULL or a live handle.
size_t rb_scene_triangle_count(const struct RbScene *scene);

// # Safety
// `scene` must be NULL or a handle not freed before.
void rb_scene_free(struct RbScene *scene);

// Creates a baker for `scene` at `width × height`. `config_json` holds
// solver settings as a JSON object and may be NULL for the defaults.
// `direction_count` sizes the generated direction set in directional mode
// (0 picks 64); other modes ignore it. The scene is copied.
//
// # Safety
// `scene` must be a live handle, `config_json` NULL or NUL-terminated, and
// `out` writable.
enum RbStatus rb_baker_new(const struct RbScene *scene,
                           uint32_t width,
                           uint32_t height,
                           const char *config_json,
                           size_t direction_count,
                           struct RbBaker **out);

// Runs one pass. `stats` may be NULL.
//
// # Safety
// `baker` must be a live handle; `stats` NULL or writable.
enum RbStatus rb_baker_run_pass(struct RbBaker *baker, struct RbPassStats *stats);

// Snapshot of the latest result. With `sewn` set, empty texels bordering
// patches carry their neighbor's lighting, as in exported files.
//
// # Safety
// `baker` must be a live handle; `out` writable.
enum RbStatus rb_baker_lightmap(const struct RbBaker *baker, bool sewn, struct RbLightmap **out);

// # Safety
// `baker` must be NULL or a handle not freed before.
void rb_baker_free(struct RbBaker *baker);

// # Safety
// `path` must be NUL-terminated; `out` writable.
enum RbStatus rb_lightmap_load_rtex(const char *path, struct RbLightmap **out);

// # Safety
// `map` must be a live handle; `path` NUL-terminated.
enum RbStatus rb_lightmap_save_rtex(const struct RbLightmap *map, const char *path);

// 8-bit PNG with `clamp_to` mapped to white.
//
// # Safety
// `map` must be a live handle; `path` NUL-terminated.
enum RbStatus rb_lightmap_save_png(const struct RbLightmap *map, const char *path, double clamp_to);

// # Safety
// `map` must be NULL or a live handle.
uint32_t rb_lightmap_width(const struct RbLightmap *map);

// # Safety
// `map` must be NULL or a live handle.
uint32_t rb_lightmap_height(const struct RbLightmap *map);

// Copies interleaved RGB floats, row-major, into `buf`, which must hold at
// least `3 · width · height` values.
//
// # Safety
// `map` must be a live handle and `buf` valid for `len` floats.
enum RbStatus rb_lightmap_copy_rgb(const struct RbLightmap *map, float *buf, size_t len);

// Mean per-texel RGB distance between `candidate` and `reference`.
//
// # Safety
// Both maps must be live handles; `out` writable.
enum RbStatus rb_dfpr(const struct RbLightmap *candidate,
                      const struct RbLightmap *reference,
                      double *out);

// # Safety
// `map` must be NULL or a handle not freed before.
void rb_lightmap_free(struct RbLightmap *map);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RADBAKE_H */
