#include <stdio.h>
#include <stdlib.h>
#include <string.h>

#include "kcolor.h"

#define CHECK(expr)                                                          \
  do {                                                                       \
    if (!(expr)) {                                                           \
      const char *e = kc_last_error();                                       \
      fprintf(stderr, "%s:%d: %s failed (%s)\n", __FILE__, __LINE__, #expr,  \
              e ? e : "no error");                                           \
      return 1;                                                              \
    }                                                                        \
  } while (0)

int main(void) {
  KcCsp *csp = NULL;
  char *assignment = NULL;
  CHECK(kc_csp_generate_planted(7, 3, 3, 3, 4, &csp, &assignment) == KC_STATUS_OK);

  KcReduction *red = NULL;
  CHECK(kc_reduce_3color(csp, &red) == KC_STATUS_OK);
  KcGraph *g = NULL;
  CHECK(kc_reduction_graph(red, &g) == KC_STATUS_OK);

  KcRational w;
  CHECK(kc_graph_total_weight(g, &w) == KC_STATUS_OK);
  CHECK(w.num == 66 && w.den == 1);

  size_t n = 0;
  CHECK(kc_graph_vertex_count(g, &n) == KC_STATUS_OK);
  uint32_t *colors = calloc(n, sizeof *colors);
  CHECK(kc_reduction_encode(red, assignment, colors, n) == KC_STATUS_OK);
  size_t satisfied = 0;
  CHECK(kc_reduction_decode(red, colors, n, &satisfied) == KC_STATUS_OK);
  CHECK(satisfied == 4);

  CHECK(kc_reduction_encode(red, assignment, colors, n + 1) == KC_STATUS_INVALID_INPUT);
  CHECK(strstr(kc_last_error(), "buffer") != NULL);

  bool colorable = false;
  CHECK(kc_graph_is_k_colorable(g, 3, 0, &colorable) == KC_STATUS_BUDGET);

  double radius = 0.0;
  CHECK(kc_dmr_spectral_radius(6, &radius) == KC_STATUS_OK);
  CHECK(radius > 0.0 && radius <= 0.8 + 1e-9);

  printf("kcolor %s: %zu vertices, radius(q=6) = %.6f\n", kc_version(), n, radius);

  free(colors);
  kc_string_free(assignment);
  kc_graph_free(g);
  kc_reduction_free(red);
  kc_csp_free(csp);
  return 0;
}
