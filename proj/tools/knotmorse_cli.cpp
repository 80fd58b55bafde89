// Command-line front end. Talks to the library only through the C API.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "knotmorse/knotmorse.h"

namespace {

enum Exit { kOk = 0, kChecksFailed = 1, kConfigError = 2, kNumericalError = 3 };

int report_failure(km_status status) {
  std::fprintf(stderr, "knotmorse: %s error: %s\n", km_status_name(status), km_last_error());
  return status == KM_ERR_CONFIG ? kConfigError : kNumericalError;
}

struct ConfigHandle {
  km_config* ptr = nullptr;
  ~ConfigHandle() { km_config_free(ptr); }
};

struct Options {
  std::string config;
  std::vector<double> levels;
  double amplitude = 0.05;
  std::uint64_t seed = 42;
  std::string out;
  bool no_mesh = false;
  unsigned threads = 0;
};

km_status load(const Options& o, ConfigHandle& h) {
  km_status s = km_config_load(o.config.c_str(), &h.ptr);
  if (s != KM_OK) return s;
  if (o.threads > 0) km_config_set_threads(h.ptr, o.threads);
  if (!o.out.empty()) km_config_set_output_dir(h.ptr, o.out.c_str());
  if (o.no_mesh) km_config_set_write_meshes(h.ptr, 0);
  return KM_OK;
}

int cmd_analyze(const Options& o) {
  ConfigHandle h;
  if (km_status s = load(o, h); s != KM_OK) return report_failure(s);
  char* path = nullptr;
  int passed = 0;
  if (km_status s = km_run_analyze(h.ptr, nullptr, &path, &passed); s != KM_OK)
    return report_failure(s);
  std::printf("report written to %s\n", path);
  std::printf("verification %s\n", passed ? "passed" : "FAILED (see report)");
  km_string_free(path);
  return passed ? kOk : kChecksFailed;
}

int cmd_critical(const Options& o) {
  ConfigHandle h;
  if (km_status s = load(o, h); s != KM_OK) return report_failure(s);
  char* table = nullptr;
  if (km_status s = km_run_critical(h.ptr, &table, nullptr); s != KM_OK) return report_failure(s);
  std::fputs(table, stdout);
  km_string_free(table);
  return kOk;
}

int cmd_surfaces(const Options& o) {
  ConfigHandle h;
  if (km_status s = load(o, h); s != KM_OK) return report_failure(s);
  char* summary = nullptr;
  if (km_status s = km_run_surfaces(h.ptr, o.levels.data(), o.levels.size(), &summary, nullptr);
      s != KM_OK)
    return report_failure(s);
  std::fputs(summary, stdout);
  km_string_free(summary);
  return kOk;
}

int cmd_perturb(const Options& o) {
  ConfigHandle h;
  if (km_status s = load(o, h); s != KM_OK) return report_failure(s);
  ConfigHandle perturbed;
  if (km_status s = km_run_perturb(h.ptr, o.amplitude, o.seed, &perturbed.ptr); s != KM_OK)
    return report_failure(s);
  char* text = nullptr;
  if (km_status s = km_config_to_toml(perturbed.ptr, &text); s != KM_OK) return report_failure(s);
  const std::string body = text;
  km_string_free(text);

  namespace fs = std::filesystem;
  const fs::path dir = o.out.empty() ? fs::path(".") : fs::path(o.out);
  const fs::path target = dir / (fs::path(o.config).stem().string() + "_perturbed.toml");
  std::error_code ec;
  fs::create_directories(dir, ec);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary);
    os << "# amplitude " << o.amplitude << ", seed " << o.seed << "\n" << body;
    if (!os) {
      std::fprintf(stderr, "knotmorse: io error: cannot write %s\n", tmp.string().c_str());
      return kNumericalError;
    }
  }
  fs::rename(tmp, target, ec);
  if (ec) {
    std::fprintf(stderr, "knotmorse: io error: %s\n", ec.message().c_str());
    return kNumericalError;
  }
  std::printf("%s\n", target.string().c_str());
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Critical points, equipotential surfaces and Morse codes of charged knots"};
  app.set_version_flag("--version", std::string(km_version()));
  app.require_subcommand(1);
  Options o;

  auto common = [&o](CLI::App* sub) {
    sub->add_option("--config", o.config, "TOML run configuration")->required();
    sub->add_option("--out", o.out, "output directory (overrides [output].dir)");
    sub->add_option("--threads", o.threads, "worker threads, 0 = all cores");
  };

  CLI::App* analyze = app.add_subcommand("analyze", "full pipeline and verification report");
  common(analyze);
  analyze->add_flag("--no-mesh", o.no_mesh, "skip OBJ export");

  CLI::App* critical = app.add_subcommand("critical", "print the critical points");
  common(critical);

  CLI::App* surfaces = app.add_subcommand("surfaces", "extract equipotential surfaces at given levels");
  common(surfaces);
  surfaces->add_option("--levels", o.levels, "potential values, space or comma separated")
      ->required()
      ->delimiter(',');
  surfaces->add_flag("--no-mesh", o.no_mesh, "skip OBJ export");

  CLI::App* perturb = app.add_subcommand("perturb", "write a config for a perturbed knot");
  common(perturb);
  perturb->add_option("--amplitude", o.amplitude, "maximum displacement")->capture_default_str();
  perturb->add_option("--seed", o.seed, "perturbation seed")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  if (*analyze) return cmd_analyze(o);
  if (*critical) return cmd_critical(o);
  if (*surfaces) return cmd_surfaces(o);
  return cmd_perturb(o);
}
