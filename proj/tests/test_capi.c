/* Exercises the shared library through its C interface only. */
#include <math.h>
#include <stdio.h>
#include <stdlib.h>
#include <string.h>

#include "knotmorse/knotmorse.h"

static int failures = 0;

#define EXPECT(cond)                                                   \
  do {                                                                 \
    if (!(cond)) {                                                     \
      fprintf(stderr, "%s:%d: expectation failed: %s (last error: %s)\n", \
              __FILE__, __LINE__, #cond, km_last_error());            \
      ++failures;                                                      \
    }                                                                  \
  } while (0)

static const double kPi = 3.14159265358979323846;

static void test_curves(void) {
  km_curve* c = NULL;
  double p[3], v[3], speed = 0.0;
  char* text = NULL;

  EXPECT(km_curve_parse("(sin(t) + 2*sin(2*t), cos(t) - 2*cos(2*t), -sin(3*t))", &c) == KM_OK);
  EXPECT(km_curve_eval(c, 0.0, p, v, &speed) == KM_OK);
  EXPECT(fabs(p[0]) < 1e-15 && fabs(p[1] + 1.0) < 1e-15 && fabs(p[2]) < 1e-15);
  EXPECT(speed > 0.0);
  EXPECT(km_curve_to_string(c, &text) == KM_OK);
  EXPECT(text != NULL && strstr(text, "sin") != NULL);
  km_string_free(text);
  km_curve_free(c);

  EXPECT(km_curve_parse("(cos(t), sin(t)", &c) == KM_ERR_SYNTAX);
  EXPECT(strstr(km_last_error(), "offset") != NULL);
  EXPECT(km_curve_parse("(t, 0, 0)", &c) == KM_ERR_OPEN_CURVE);
  EXPECT(km_curve_parse("(cos(u), sin(t), 0)", &c) == KM_ERR_UNKNOWN_IDENTIFIER);
  EXPECT(strcmp(km_status_name(KM_ERR_OPEN_CURVE), "open_curve") == 0);
  EXPECT(km_curve_parse(NULL, &c) == KM_ERR_INVALID_ARGUMENT);

  {
    const double params[] = {2.0};
    km_curve* circle = NULL;
    km_curve* moved = NULL;
    EXPECT(km_curve_builtin("circle", params, 1, &circle) == KM_OK);
    EXPECT(km_curve_eval(circle, kPi / 2, p, NULL, &speed) == KM_OK);
    EXPECT(fabs(p[1] - 2.0) < 1e-14 && fabs(speed - 2.0) < 1e-14);
    EXPECT(km_curve_perturb(circle, 0.01, 7, &moved) == KM_OK);
    EXPECT(km_curve_eval(moved, kPi / 2, p, NULL, NULL) == KM_OK);
    EXPECT(fabs(p[1] - 2.0) <= 0.01);
    EXPECT(km_curve_perturb(circle, -1.0, 7, &moved) == KM_ERR_INVALID_ARGUMENT);
    km_curve_free(moved);
    km_curve_free(circle);
  }
  EXPECT(km_curve_builtin("unknot", NULL, 0, &c) == KM_ERR_INVALID_ARGUMENT);
  km_curve_free(NULL);
}

static void test_field(void) {
  km_curve* c = NULL;
  km_field* f = NULL;
  const double origin[3] = {0, 0, 0}, axis[3] = {0, 0, 1}, on_knot[3] = {1, 0, 0};
  double phi = 0, g[3], h[9], length = 0;

  EXPECT(km_curve_builtin("circle", NULL, 0, &c) == KM_OK);
  EXPECT(km_field_create(c, 0, 0, 0.0, &f) == KM_OK);
  km_curve_free(c); /* the field keeps its own copy */
  EXPECT(km_field_potential(f, origin, &phi) == KM_OK);
  EXPECT(fabs(phi - 2 * kPi) < 1e-12);
  EXPECT(km_field_gradient(f, axis, g) == KM_OK);
  EXPECT(fabs(g[2] + kPi / sqrt(2.0)) < 1e-8);
  EXPECT(km_field_hessian(f, origin, h) == KM_OK);
  EXPECT(fabs(h[0] + h[4] + h[8]) < 1e-8);
  EXPECT(fabs(h[8] + 2 * kPi) < 1e-9);
  EXPECT(km_field_knot_length(f, &length) == KM_OK);
  EXPECT(fabs(length - 2 * kPi) < 1e-12);
  EXPECT(km_field_potential(f, on_knot, &phi) == KM_ERR_TOO_CLOSE_TO_KNOT);
  EXPECT(strlen(km_last_error()) > 0);
  km_field_free(f);
}

static void test_runs(void) {
  km_config* cfg = NULL;
  km_config* moved = NULL;
  char* table = NULL;
  char* json = NULL;
  char* path = NULL;
  char* toml = NULL;
  int passed = 0;
  const double levels[] = {6.0};
  const double bad_level[] = {2 * kPi};

  EXPECT(km_config_parse("[knot\n", &cfg) == KM_ERR_CONFIG);
  EXPECT(strstr(km_last_error(), ":1:") != NULL);

  EXPECT(km_config_parse("[knot]\nbuiltin = \"circle\"\n[surface]\nstability_check = false\n",
                         &cfg) == KM_OK);
  EXPECT(km_config_set_output_dir(cfg, "capi_out") == KM_OK);
  EXPECT(km_config_set_threads(cfg, 2) == KM_OK);

  EXPECT(km_run_critical(cfg, &table, &json) == KM_OK);
  EXPECT(table && strstr(table, "6.28318530") != NULL);
  EXPECT(json && strstr(json, "\"critical_points\"") != NULL);
  km_string_free(table);
  km_string_free(json);

  EXPECT(km_run_surfaces(cfg, levels, 1, &table, NULL) == KM_OK);
  EXPECT(table && strstr(table, "level_00.obj") != NULL);
  km_string_free(table);
  EXPECT(km_run_surfaces(cfg, bad_level, 1, NULL, NULL) == KM_ERR_LEVEL_NOT_REGULAR);

  EXPECT(km_config_set_write_meshes(cfg, 0) == KM_OK);
  EXPECT(km_run_analyze(cfg, &json, &path, &passed) == KM_OK);
  EXPECT(passed == 1);
  EXPECT(json && strstr(json, "\"genera\"") != NULL);
  EXPECT(path && strstr(path, "report.json") != NULL);
  {
    FILE* fp = path ? fopen(path, "r") : NULL;
    EXPECT(fp != NULL);
    if (fp) fclose(fp);
  }
  km_string_free(json);
  km_string_free(path);

  EXPECT(km_run_perturb(cfg, 0.01, 3, &moved) == KM_OK);
  EXPECT(km_config_to_toml(moved, &toml) == KM_OK);
  EXPECT(toml && strstr(toml, "expression = ") != NULL);
  km_string_free(toml);
  km_config_free(moved);
  EXPECT(km_run_perturb(cfg, -1.0, 3, &moved) == KM_ERR_INVALID_ARGUMENT);

  EXPECT(km_run_analyze(NULL, NULL, NULL, &passed) == KM_ERR_INVALID_ARGUMENT);
  km_config_free(cfg);
  EXPECT(km_config_load("definitely/missing.toml", &cfg) == KM_ERR_CONFIG);
}

int main(void) {
  EXPECT(strlen(km_version()) > 0);
  test_curves();
  test_field();
  test_runs();
  if (failures) {
    fprintf(stderr, "%d expectation(s) failed\n", failures);
    return 1;
  }
  printf("C API: all expectations met\n");
  return 0;
}
