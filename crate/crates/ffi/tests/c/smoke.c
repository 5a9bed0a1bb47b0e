#include <stdio.h>
#include <stdlib.h>
#include "radbake.h"

#define CHECK(call)                                                         \
    do {                                                                    \
        RbStatus st_ = (call);                                              \
        if (st_ != RB_STATUS_OK) {                                          \
            const char *msg = rb_last_error_message();                      \
            fprintf(stderr, "%s failed: %d %s\n", #call, (int)st_, msg ? msg : ""); \
            return 1;                                                       \
        }                                                                   \
    } while (0)

int main(void) {
    RbScene *scene = NULL;
    RbBaker *baker = NULL;
    RbLightmap *map = NULL;
    RbPassStats stats;
    CHECK(rb_scene_box(&scene));
    CHECK(rb_baker_new(scene, 16, 16, "{\"passes\": 1}", 0, &baker));
    CHECK(rb_baker_run_pass(baker, &stats));
    CHECK(rb_baker_lightmap(baker, true, &map));
    size_t n = 3u * rb_lightmap_width(map) * rb_lightmap_height(map);
    float *rgb = malloc(n * sizeof *rgb);
    CHECK(rb_lightmap_copy_rgb(map, rgb, n));
    double sum = 0.0;
    for (size_t i = 0; i < n; i++) sum += rgb[i];
    if (rb_baker_new(scene, 16, 16, "{\"mode\": \"nope\"}", 0, &baker) != RB_STATUS_CONFIG) return 2;
    printf("pass %u rays %llu sum %.3f\n", stats.pass, (unsigned long long)stats.rays_traced, sum);
    free(rgb);
    rb_lightmap_free(map);
    rb_baker_free(baker);
    rb_scene_free(scene);
    return sum > 0.0 ? 0 : 3;
}
