#include "knotmorse/knotmorse.h"

#include <cstdlib>
#include <cstring>
#include <new>
#include <string>

#include "error.hpp"
#include "pipeline.hpp"

struct km_curve {
  knotmorse::KnotCurve curve;
};

struct km_field {
  knotmorse::FieldEvaluator field;
};

struct km_config {
  knotmorse::RunConfig config;
};

namespace {

thread_local std::string last_error;

km_status fail(km_status status, const std::string& message) {
  last_error = message;
  return status;
}

// Runs fn, translating exceptions into status codes.
template <class Fn>
km_status guarded(Fn&& fn) {
  try {
    last_error.clear();
    fn();
    return KM_OK;
  } catch (const knotmorse::Error& e) {
    return fail(static_cast<km_status>(static_cast<int>(e.code())), e.what());
  } catch (const std::bad_alloc&) {
    return fail(KM_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(KM_ERR_INTERNAL, e.what());
  }
}

char* dup(const std::string& s) {
  char* p = static_cast<char*>(std::malloc(s.size() + 1));
  if (!p) throw std::bad_alloc();
  std::memcpy(p, s.c_str(), s.size() + 1);
  return p;
}

km_status null_argument(const char* what) {
  return fail(KM_ERR_INVALID_ARGUMENT, std::string(what) + " must not be NULL");
}

}  // namespace

extern "C" {

const char* km_version(void) { return KNOTMORSE_VERSION; }

const char* km_status_name(km_status status) {
  if (status == KM_OK) return "ok";
  if (status == KM_ERR_INTERNAL) return "internal";
  if (status >= KM_ERR_SYNTAX && status <= KM_ERR_CONFIG)
    return knotmorse::error_code_name(static_cast<knotmorse::ErrorCode>(static_cast<int>(status)));
  return "unknown";
}

const char* km_last_error(void) { return last_error.c_str(); }

void km_string_free(char* s) { std::free(s); }

km_status km_curve_parse(const char* source, km_curve** out) {
  if (!source || !out) return null_argument("source and out");
  return guarded([&] { *out = new km_curve{knotmorse::parse_curve(source)}; });
}

km_status km_curve_builtin(const char* name, const double* params, size_t n_params,
                           km_curve** out) {
  if (!name || !out || (n_params > 0 && !params)) return null_argument("name, params and out");
  return guarded([&] {
    *out = new km_curve{knotmorse::builtin_curve(name, std::span<const double>(params, n_params))};
  });
}

km_status km_curve_perturb(const km_curve* curve, double amplitude, uint64_t seed,
                           km_curve** out) {
  if (!curve || !out) return null_argument("curve and out");
  return guarded([&] { *out = new km_curve{knotmorse::perturb(curve->curve, amplitude, seed)}; });
}

km_status km_curve_eval(const km_curve* curve, double t, double point[3], double velocity[3],
                        double* speed) {
  if (!curve) return null_argument("curve");
  return guarded([&] {
    const knotmorse::CurveSample s = curve->curve.sample(t);
    for (int i = 0; i < 3; ++i) {
      if (point) point[i] = s.point[i];
      if (velocity) velocity[i] = s.velocity[i];
    }
    if (speed) *speed = s.speed;
  });
}

km_status km_curve_to_string(const km_curve* curve, char** out) {
  if (!curve || !out) return null_argument("curve and out");
  return guarded([&] { *out = dup(curve->curve.to_string()); });
}

void km_curve_free(km_curve* curve) { delete curve; }

km_status km_field_create(const km_curve* curve, int panels, int nodes_per_panel,
                          double min_distance, km_field** out) {
  if (!curve || !out) return null_argument("curve and out");
  return guarded([&] {
    knotmorse::FieldOptions opt;
    if (panels > 0) opt.panels = panels;
    if (nodes_per_panel > 0) opt.nodes_per_panel = nodes_per_panel;
    if (min_distance > 0.0) opt.min_distance = min_distance;
    *out = new km_field{knotmorse::FieldEvaluator(curve->curve, opt)};
  });
}

km_status km_field_potential(const km_field* field, const double x[3], double* out) {
  if (!field || !x || !out) return null_argument("field, x and out");
  return guarded([&] { *out = field->field.potential(knotmorse::Vec3(x[0], x[1], x[2])); });
}

km_status km_field_gradient(const km_field* field, const double x[3], double out[3]) {
  if (!field || !x || !out) return null_argument("field, x and out");
  return guarded([&] {
    const knotmorse::Vec3 g = field->field.gradient(knotmorse::Vec3(x[0], x[1], x[2]));
    for (int i = 0; i < 3; ++i) out[i] = g[i];
  });
}

km_status km_field_hessian(const km_field* field, const double x[3], double out[9]) {
  if (!field || !x || !out) return null_argument("field, x and out");
  return guarded([&] {
    const knotmorse::Mat3 h = field->field.hessian(knotmorse::Vec3(x[0], x[1], x[2]));
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) out[3 * r + c] = h(r, c);
  });
}

km_status km_field_knot_length(const km_field* field, double* out) {
  if (!field || !out) return null_argument("field and out");
  *out = field->field.knot_length();
  return KM_OK;
}

void km_field_free(km_field* field) { delete field; }

km_status km_config_load(const char* path, km_config** out) {
  if (!path || !out) return null_argument("path and out");
  return guarded([&] { *out = new km_config{knotmorse::load_config(path)}; });
}

km_status km_config_parse(const char* text, km_config** out) {
  if (!text || !out) return null_argument("text and out");
  return guarded([&] { *out = new km_config{knotmorse::parse_config(text, "<string>")}; });
}

km_status km_config_set_threads(km_config* config, unsigned threads) {
  if (!config) return null_argument("config");
  config->config.threads = threads;
  return KM_OK;
}

km_status km_config_set_output_dir(km_config* config, const char* dir) {
  if (!config || !dir) return null_argument("config and dir");
  config->config.output.dir = dir;
  return KM_OK;
}

km_status km_config_set_write_meshes(km_config* config, int enabled) {
  if (!config) return null_argument("config");
  config->config.output.write_meshes = enabled != 0;
  return KM_OK;
}

km_status km_config_to_toml(const km_config* config, char** out) {
  if (!config || !out) return null_argument("config and out");
  return guarded([&] { *out = dup(knotmorse::to_toml(config->config)); });
}

void km_config_free(km_config* config) { delete config; }

km_status km_run_analyze(const km_config* config, char** report_json, char** report_path,
                         int* all_passed) {
  if (!config || !all_passed) return null_argument("config and all_passed");
  return guarded([&] {
    const knotmorse::AnalyzeResult r = knotmorse::analyze(config->config);
    char* json = report_json ? dup(r.report.dump(2)) : nullptr;
    char* path = nullptr;
    try {
      if (report_path) path = dup(r.report_path.string());
    } catch (...) {
      std::free(json);
      throw;
    }
    if (report_json) *report_json = json;
    if (report_path) *report_path = path;
    *all_passed = r.all_passed ? 1 : 0;
  });
}

km_status km_run_critical(const km_config* config, char** table, char** json) {
  if (!config) return null_argument("config");
  return guarded([&] {
    const knotmorse::TableResult r = knotmorse::critical(config->config);
    char* t = table ? dup(r.text) : nullptr;
    char* j = nullptr;
    try {
      if (json) j = dup(r.json.dump(2));
    } catch (...) {
      std::free(t);
      throw;
    }
    if (table) *table = t;
    if (json) *json = j;
  });
}

km_status km_run_surfaces(const km_config* config, const double* levels, size_t n_levels,
                          char** summary, char** json) {
  if (!config || (n_levels > 0 && !levels)) return null_argument("config and levels");
  return guarded([&] {
    const knotmorse::TableResult r =
        knotmorse::surfaces(config->config, std::vector<double>(levels, levels + n_levels));
    char* t = summary ? dup(r.text) : nullptr;
    char* j = nullptr;
    try {
      if (json) j = dup(r.json.dump(2));
    } catch (...) {
      std::free(t);
      throw;
    }
    if (summary) *summary = t;
    if (json) *json = j;
  });
}

km_status km_run_perturb(const km_config* config, double amplitude, uint64_t seed,
                         km_config** out) {
  if (!config || !out) return null_argument("config and out");
  return guarded([&] {
    *out = new km_config{knotmorse::perturbed_config(config->config, amplitude, seed)};
  });
}

}  // extern "C"
