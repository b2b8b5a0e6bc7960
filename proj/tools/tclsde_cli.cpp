// Command-line front end. Talks to the library only through the C API.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "tclsde/tclsde.h"

namespace {

struct GlobalOptions {
  std::string seed;
  int threads = 0;
  std::string out;
  std::string format = "csv";
};

int fail(tclsde_status status) {
  std::cerr << "error (" << tclsde_status_name(status) << "): " << tclsde_last_error() << "\n";
  return 1;
}

// Config handle from an optional file plus flag overrides.
tclsde_status make_config(const std::string& path,
                          const std::vector<std::pair<std::string, std::string>>& overrides,
                          tclsde_config** out) {
  tclsde_status st;
  if (!path.empty()) {
    st = tclsde_config_load_file(path.c_str(), out);
    if (st != TCLSDE_OK) return st;
    for (const auto& [key, value] : overrides) {
      st = tclsde_config_set(*out, key.c_str(), value.c_str());
      if (st != TCLSDE_OK) return st;
    }
    return TCLSDE_OK;
  }
  std::string text;
  for (const auto& [key, value] : overrides) text += key + " = " + value + "\n";
  if (text.empty()) text = "model = ou\n";
  return tclsde_config_load_text(text.c_str(), out);
}

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

bool parse_seed(const std::string& text, std::uint64_t& seed) {
  if (text.empty()) return true;
  if (text.find_first_not_of("0123456789") == std::string::npos) {
    try {
      seed = std::stoull(text);
      return true;
    } catch (const std::exception&) {
    }
  }
  std::cerr << "error: --seed must be a decimal 64-bit integer\n";
  return false;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stochastic theta method for SDEs driven by time-changed Levy noise"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(tclsde_version()));

  GlobalOptions global;
  app.add_option("--seed", global.seed, "Master seed (decimal 64-bit)");
  app.add_option("--threads", global.threads, "Worker threads (fallback: TCLSDE_THREADS, then 1)");
  app.add_option("--out", global.out, "Output path ('-' for stdout)");
  app.add_option("--format", global.format, "Report format: csv or json")
      ->check(CLI::IsMember({"csv", "json"}));
  app.fallthrough();

  // simulate-path
  auto* sim = app.add_subcommand("simulate-path", "Simulate one time-changed path, CSV t,x1[,x2]");
  std::string sim_config, sim_model, sim_clock;
  double sim_theta = 0, sim_delta = 0, sim_T = 0, sim_alpha = 0;
  sim->add_option("--config", sim_config, "Configuration file");
  sim->add_option("--model", sim_model, "ou or kubo");
  sim->add_option("--theta", sim_theta, "Theta in [0, 1]");
  sim->add_option("--delta", sim_delta, "Operational step size");
  sim->add_option("--T", sim_T, "Physical horizon");
  sim->add_option("--alpha", sim_alpha, "Stability index of the subordinator");
  sim->add_option("--clock", sim_clock, "subordinator or identity");

  // weak-order
  auto* weak = app.add_subcommand("weak-order", "Monte Carlo weak-error study over a step-size ladder");
  std::string weak_config, weak_manifest;
  weak->add_option("--config", weak_config, "Plan file (key = value, or a run manifest)")->required();
  weak->add_option("--manifest", weak_manifest, "Manifest path (default: <out>.manifest.json)");

  // subordinator-check
  auto* sub = app.add_subcommand("subordinator-check", "Laplace-transform diagnostic of the subordinator");
  double sub_alpha = 0.8;
  std::vector<double> sub_lambdas{0.5, 1.0, 2.0, 4.0};
  std::uint64_t sub_paths = 100000;
  int sub_terms = 1000;
  sub->add_option("--alpha", sub_alpha, "Stability index in (0, 1)");
  sub->add_option("--lambda", sub_lambdas, "Laplace arguments")->delimiter(',');
  sub->add_option("--paths", sub_paths, "Monte Carlo paths");
  sub->add_option("--terms", sub_terms, "LePage truncation K");

  // validate-model
  auto* val = app.add_subcommand("validate-model", "Spot-check drift Lipschitz constant and Jacobian");
  std::string val_config, val_model;
  int val_probes = 100;
  val->add_option("--config", val_config, "Configuration file");
  val->add_option("--model", val_model, "ou or kubo");
  val->add_option("--probes", val_probes, "Random probe points");

  CLI11_PARSE(app, argc, argv);

  const int threads = tclsde_resolve_threads(global.threads);

  if (*sim) {
    std::vector<std::pair<std::string, std::string>> ov;
    if (sim->count("--model")) ov.emplace_back("model", sim_model);
    if (sim->count("--theta")) ov.emplace_back("theta", fmt17(sim_theta));
    if (sim->count("--delta")) ov.emplace_back("delta", fmt17(sim_delta));
    if (sim->count("--T")) ov.emplace_back("T", fmt17(sim_T));
    if (sim->count("--alpha")) ov.emplace_back("alpha", fmt17(sim_alpha));
    if (sim->count("--clock")) ov.emplace_back("clock", sim_clock);
    if (!global.seed.empty()) ov.emplace_back("seed", global.seed);
    tclsde_config* cfg = nullptr;
    tclsde_status st = make_config(sim_config, ov, &cfg);
    if (st == TCLSDE_OK) st = tclsde_simulate_path(cfg, global.out.c_str());
    tclsde_config_destroy(cfg);
    return st == TCLSDE_OK ? 0 : fail(st);
  }

  if (*weak) {
    std::vector<std::pair<std::string, std::string>> ov;
    if (!global.seed.empty()) ov.emplace_back("seed", global.seed);
    tclsde_config* cfg = nullptr;
    tclsde_status st = make_config(weak_config, ov, &cfg);
    tclsde_report* report = nullptr;
    if (st == TCLSDE_OK) st = tclsde_weak_order_run(cfg, threads, &report);
    tclsde_config_destroy(cfg);
    if (st != TCLSDE_OK) return fail(st);

    const auto format = global.format == "json" ? TCLSDE_FORMAT_JSON : TCLSDE_FORMAT_CSV;
    st = tclsde_report_write(report, format, global.out.c_str());
    if (st == TCLSDE_OK) {
      std::string manifest = weak_manifest;
      if (manifest.empty()) {
        manifest = (global.out.empty() || global.out == "-") ? "weak-order.manifest.json"
                                                             : global.out + ".manifest.json";
      }
      st = tclsde_report_write_manifest(report, manifest.c_str());
    }
    const bool noise_floor = tclsde_report_noise_floor(report) != 0;
    tclsde_report_destroy(report);
    if (st != TCLSDE_OK) return fail(st);
    if (noise_floor) {
      std::cerr << "warning: fewer than three deltas clear the 3-sigma noise floor\n";
      return 2;
    }
    return 0;
  }

  if (*sub) {
    std::uint64_t seed = 0;
    if (!parse_seed(global.seed, seed)) return 1;
    std::vector<tclsde_laplace_row> rows(sub_lambdas.size());
    const auto st = tclsde_subordinator_check(sub_alpha, sub_terms, sub_lambdas.data(),
                                              sub_lambdas.size(), sub_paths, seed, threads, rows.data());
    if (st != TCLSDE_OK) return fail(st);
    std::string csv = "lambda,estimate,target,stderr\n";
    for (const auto& r : rows) {
      csv += fmt17(r.lambda) + "," + fmt17(r.estimate) + "," + fmt17(r.target) + "," +
             fmt17(r.std_error) + "\n";
    }
    if (global.out.empty() || global.out == "-") {
      std::cout << csv;
    } else {
      std::FILE* f = std::fopen(global.out.c_str(), "wb");
      if (!f || std::fputs(csv.c_str(), f) < 0) {
        if (f) std::fclose(f);
        std::cerr << "error: cannot write " << global.out << "\n";
        return 1;
      }
      std::fclose(f);
    }
    return 0;
  }

  if (*val) {
    std::vector<std::pair<std::string, std::string>> ov;
    if (val->count("--model")) ov.emplace_back("model", val_model);
    tclsde_config* cfg = nullptr;
    tclsde_status st = make_config(val_config, ov, &cfg);
    tclsde_validation result{};
    std::uint64_t seed = 0;
    if (!parse_seed(global.seed, seed)) {
      tclsde_config_destroy(cfg);
      return 1;
    }
    if (st == TCLSDE_OK) st = tclsde_validate_model(cfg, val_probes, seed, &result);
    tclsde_config_destroy(cfg);
    if (st != TCLSDE_OK) return fail(st);
    std::cout << "probes=" << result.probes << "\n"
              << "declared_L=" << fmt17(result.declared_L) << "\n"
              << "max_lipschitz_ratio=" << fmt17(result.max_lipschitz_ratio) << "\n"
              << "max_jacobian_norm=" << fmt17(result.max_jacobian_norm) << "\n"
              << "max_jacobian_rel_error=" << fmt17(result.max_jacobian_rel_error) << "\n"
              << "jacobian=" << (result.jacobian_fallback ? "finite-difference fallback" : "analytic")
              << "\n"
              << "violations=" << result.violations << "\n";
    for (int i = 0; i < result.violations; ++i) {
      std::cout << "  " << tclsde_validation_message(static_cast<std::size_t>(i)) << "\n";
    }
    return result.violations == 0 ? 0 : 1;
  }
  return 0;
}
