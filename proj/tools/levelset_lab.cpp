#include <cstdio>
#include <exception>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "lsl/errors.hpp"
#include "lsl/flow.hpp"
#include "lsl/harness.hpp"
#include "lsl/parallel.hpp"

namespace {

// exit codes: 0 checks passed, 1 a check failed, 2 bad configuration, 3 runtime failure
constexpr int kOk = 0;
constexpr int kCheckFailed = 1;
constexpr int kConfigError = 2;
constexpr int kRuntimeError = 3;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw lsl::ParseError("cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

lsl::RunConfig resolve_config(const std::string& preset, const std::string& config_path,
                              const std::vector<std::string>& overrides, long seed) {
  std::string text;
  if (!config_path.empty()) text = read_file(config_path);
  if (!preset.empty()) text = "preset = " + preset + "\n" + text;
  if (text.empty()) throw lsl::ValidationError("need --preset or --config");
  for (const std::string& o : overrides) text += o + "\n";
  if (seed >= 0) text += "seed = " + std::to_string(seed) + "\n";
  return lsl::parse_config(text);
}

int cmd_run(const lsl::RunConfig& cfg, const std::string& out_dir, int threads) {
  lsl::ExperimentResult res = lsl::run_experiment(cfg, threads);
  for (const lsl::CheckResult& c : res.checks)
    std::printf("%-22s %s  measured %.6e  threshold %.6e\n", c.name.c_str(),
                c.passed ? "PASS" : "FAIL", c.measured, c.threshold);
  if (!out_dir.empty()) {
    std::vector<std::string> files = lsl::write_outputs(res, out_dir);
    std::printf("wrote %zu files to %s\n", files.size(), out_dir.c_str());
  }
  std::printf("%s: %s (%.1fs, %ld grid steps, %zu markers)\n", cfg.run_id.c_str(),
              res.all_passed ? "all checks passed" : "CHECKS FAILED", res.wall_seconds,
              res.grid.steps, res.tube.trajectories.size());
  return res.all_passed ? kOk : kCheckFailed;
}

int cmd_check(int dim, int samples) {
  lsl::DomainSpec domain = lsl::DomainSpec::unit_box(dim);
  bool ok = true;
  for (const lsl::VelocityFieldModel& field : lsl::builtin_fields(dim)) {
    bool field_ok = true;
    for (int s = 0; s < samples; ++s) {
      // deterministic boundary sweep: walk each face
      lsl::Vec x = lsl::vec0();
      double u = (s + 0.5) / samples;
      int face = s % (2 * dim);
      for (int i = 0; i < dim; ++i) x[i] = u;
      x[face / 2] = face % 2 ? 1.0 : 0.0;
      lsl::SubtangentialReport rep = lsl::check_subtangential(field, domain, 0.37, x);
      if (!rep.verdict) field_ok = false;
    }
    std::printf("%-18s %s\n", field.id.c_str(), field_ok ? "subtangential" : "VIOLATES");
    ok = ok && field_ok;
  }
  return ok ? kOk : kCheckFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cross-validation laboratory for gradient-controlled level-set transport"};
  app.require_subcommand(1);

  std::string preset, config_path, out_dir;
  std::vector<std::string> overrides;
  int threads = 0;
  long seed = -1;

  CLI::App* run = app.add_subcommand("run", "run one experiment and its checks");
  run->add_option("--preset", preset, "preset name (see `presets`)");
  run->add_option("--config", config_path, "config file (key = value lines)");
  run->add_option("--out-dir", out_dir, "output directory (must not exist)");
  run->add_option("--override", overrides, "extra `key=value` applied after the config");
  run->add_option("--threads", threads, "worker threads (0: env LEVELSET_LAB_THREADS or 1)");
  run->add_option("--seed", seed, "RNG seed override");

  CLI::App* presets = app.add_subcommand("presets", "list the builtin presets");

  int check_dim = 2, check_samples = 50;
  CLI::App* check = app.add_subcommand("check", "verify boundary subtangentiality of the fields");
  check->add_option("--dimension", check_dim, "2 or 3")->check(CLI::IsMember({2, 3}));
  check->add_option("--samples", check_samples, "boundary points per field");

  CLI11_PARSE(app, argc, argv);

  try {
    if (presets->parsed()) {
      for (const lsl::PresetInfo& p : lsl::list_presets())
        std::printf("%-20s %s\n", p.name.c_str(), p.description.c_str());
      return kOk;
    }
    if (check->parsed()) return cmd_check(check_dim, check_samples);
    lsl::RunConfig cfg = resolve_config(preset, config_path, overrides, seed);
    return cmd_run(cfg, out_dir, lsl::resolve_threads(threads));
  } catch (const lsl::ParseError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kConfigError;
  } catch (const lsl::UnknownKey& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kConfigError;
  } catch (const lsl::ValidationError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kConfigError;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "runtime error: %s\n", e.what());
    return kRuntimeError;
  }
}
