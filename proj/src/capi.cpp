#include "tclsde/tclsde.h"

#include <chrono>
#include <cstdlib>
#include <new>
#include <string>
#include <vector>

#include "tclsde/composer.hpp"
#include "tclsde/config.hpp"
#include "tclsde/error.hpp"
#include "tclsde/experiment.hpp"
#include "tclsde/report.hpp"

struct tclsde_config {
  tclsde::ConfigDocument doc;
};

struct tclsde_report {
  tclsde::RunManifest manifest;
};

namespace {

thread_local std::string g_last_error;
thread_local std::vector<std::string> g_validation_messages;

tclsde_status to_status(tclsde::ErrorCode code) {
  using tclsde::ErrorCode;
  switch (code) {
    case ErrorCode::InvalidArgument: return TCLSDE_ERR_INVALID_ARGUMENT;
    case ErrorCode::HorizonTooShort: return TCLSDE_ERR_HORIZON_TOO_SHORT;
    case ErrorCode::QuadratureFailure: return TCLSDE_ERR_QUADRATURE_FAILURE;
    case ErrorCode::NewtonDivergence: return TCLSDE_ERR_NEWTON_DIVERGENCE;
    case ErrorCode::LengthMismatch: return TCLSDE_ERR_LENGTH_MISMATCH;
    case ErrorCode::InsufficientData: return TCLSDE_ERR_INSUFFICIENT_DATA;
    case ErrorCode::ParseError: return TCLSDE_ERR_PARSE;
    case ErrorCode::ValidationError: return TCLSDE_ERR_VALIDATION;
    case ErrorCode::IoError: return TCLSDE_ERR_IO;
    case ErrorCode::TooManyFailures: return TCLSDE_ERR_TOO_MANY_FAILURES;
  }
  return TCLSDE_ERR_INTERNAL;
}

template <typename Body>
tclsde_status guarded(Body&& body) {
  try {
    body();
    g_last_error.clear();
    return TCLSDE_OK;
  } catch (const tclsde::Error& e) {
    g_last_error = e.what();
    return to_status(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return TCLSDE_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return TCLSDE_ERR_INTERNAL;
  }
}

tclsde_status null_argument(const char* name) {
  g_last_error = std::string("null argument: ") + name;
  return TCLSDE_ERR_INVALID_ARGUMENT;
}

}  // namespace

extern "C" {

const char* tclsde_version(void) { return tclsde::library_version(); }

const char* tclsde_last_error(void) { return g_last_error.c_str(); }

const char* tclsde_status_name(tclsde_status status) {
  switch (status) {
    case TCLSDE_OK: return "ok";
    case TCLSDE_ERR_INVALID_ARGUMENT: return "invalid_argument";
    case TCLSDE_ERR_HORIZON_TOO_SHORT: return "horizon_too_short";
    case TCLSDE_ERR_QUADRATURE_FAILURE: return "quadrature_failure";
    case TCLSDE_ERR_NEWTON_DIVERGENCE: return "newton_divergence";
    case TCLSDE_ERR_LENGTH_MISMATCH: return "length_mismatch";
    case TCLSDE_ERR_INSUFFICIENT_DATA: return "insufficient_data";
    case TCLSDE_ERR_PARSE: return "parse_error";
    case TCLSDE_ERR_VALIDATION: return "validation_error";
    case TCLSDE_ERR_IO: return "io_error";
    case TCLSDE_ERR_TOO_MANY_FAILURES: return "too_many_failures";
    case TCLSDE_ERR_INTERNAL: return "internal_error";
  }
  return "unknown";
}

int tclsde_resolve_threads(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("TCLSDE_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0 && v < 4096) return static_cast<int>(v);
  }
  return 1;
}

tclsde_status tclsde_config_load_file(const char* path, tclsde_config** out) {
  if (!path) return null_argument("path");
  if (!out) return null_argument("out");
  *out = nullptr;
  return guarded([&] { *out = new tclsde_config{tclsde::ConfigDocument::load_file(path)}; });
}

tclsde_status tclsde_config_load_text(const char* text, tclsde_config** out) {
  if (!text) return null_argument("text");
  if (!out) return null_argument("out");
  *out = nullptr;
  return guarded([&] { *out = new tclsde_config{tclsde::ConfigDocument::parse(text)}; });
}

tclsde_status tclsde_config_set(tclsde_config* config, const char* key, const char* value) {
  if (!config) return null_argument("config");
  if (!key || !value) return null_argument("key/value");
  return guarded([&] { config->doc.set(key, value); });
}

tclsde_status tclsde_config_validate_experiment(const tclsde_config* config) {
  if (!config) return null_argument("config");
  return guarded([&] { tclsde::load_experiment_plan(config->doc); });
}

void tclsde_config_destroy(tclsde_config* config) { delete config; }

tclsde_status tclsde_weak_order_run(const tclsde_config* config, int threads, tclsde_report** out) {
  if (!config) return null_argument("config");
  if (!out) return null_argument("out");
  *out = nullptr;
  return guarded([&] {
    const auto plan = tclsde::load_experiment_plan(config->doc);
    const int workers = tclsde_resolve_threads(threads);
    const auto start = std::chrono::steady_clock::now();
    auto report = tclsde::run_order_study(plan, workers);
    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
    *out = new tclsde_report{
        tclsde::RunManifest{plan, tclsde::library_version(), elapsed.count(), workers, std::move(report)}};
  });
}

size_t tclsde_report_row_count(const tclsde_report* report) {
  return report ? report->manifest.report.rows.size() : 0;
}

tclsde_status tclsde_report_get_row(const tclsde_report* report, size_t index, tclsde_report_row* out) {
  if (!report) return null_argument("report");
  if (!out) return null_argument("out");
  const auto& rows = report->manifest.report.rows;
  if (index >= rows.size()) {
    g_last_error = "row index out of range";
    return TCLSDE_ERR_INVALID_ARGUMENT;
  }
  const auto& r = rows[index];
  *out = {r.delta, r.estimate, r.reference, r.abs_error, r.std_error, r.paths_failed};
  g_last_error.clear();
  return TCLSDE_OK;
}

double tclsde_report_fitted_order(const tclsde_report* report) {
  return report ? report->manifest.report.fitted_order : 0.0;
}

int tclsde_report_noise_floor(const tclsde_report* report) {
  return report && report->manifest.report.noise_floor ? 1 : 0;
}

double tclsde_report_max_residual(const tclsde_report* report) {
  return report ? report->manifest.report.diagnostics.max_residual : 0.0;
}

uint64_t tclsde_report_newton_count(const tclsde_report* report, int iterations) {
  if (!report) return 0;
  const auto& hist = report->manifest.report.diagnostics.iteration_histogram;
  const auto it = hist.find(iterations);
  return it == hist.end() ? 0 : it->second;
}

tclsde_status tclsde_report_write(const tclsde_report* report, tclsde_format format, const char* path) {
  if (!report) return null_argument("report");
  return guarded([&] {
    const auto fmt = format == TCLSDE_FORMAT_JSON ? tclsde::ReportFormat::json : tclsde::ReportFormat::csv;
    tclsde::emit_report(report->manifest.report, fmt, path ? path : "");
  });
}

tclsde_status tclsde_report_write_manifest(const tclsde_report* report, const char* path) {
  if (!report) return null_argument("report");
  if (!path) return null_argument("path");
  return guarded([&] { tclsde::write_text_file(path, tclsde::manifest_to_json(report->manifest)); });
}

void tclsde_report_destroy(tclsde_report* report) { delete report; }

tclsde_status tclsde_simulate_path(const tclsde_config* config, const char* csv_path) {
  if (!config) return null_argument("config");
  return guarded([&] {
    const auto plan = tclsde::load_path_plan(config->doc);
    const auto model = tclsde::build_model(plan.model);
    const auto path = tclsde::simulate_time_changed_path(model, plan.path);
    std::string csv = model.dim_d == 1 ? "t,x1\n" : "t,x1,x2\n";
    for (std::size_t i = 0; i < path.composed.physical_times.size(); ++i) {
      csv += tclsde::format_double(path.composed.physical_times[i]);
      for (Eigen::Index j = 0; j < path.composed.states[i].size(); ++j) {
        csv += "," + tclsde::format_double(path.composed.states[i][j]);
      }
      csv += "\n";
    }
    tclsde::write_text_file(csv_path ? csv_path : "", csv);
  });
}

tclsde_status tclsde_subordinator_check(double alpha, int lepage_terms, const double* lambdas,
                                        size_t n, uint64_t paths, uint64_t seed, int threads,
                                        tclsde_laplace_row* out_rows) {
  if (n > 0 && (!lambdas || !out_rows)) return null_argument("lambdas/out_rows");
  return guarded([&] {
    const auto rows = tclsde::laplace_diagnostic(alpha, lepage_terms, {lambdas, n}, paths, seed,
                                                 tclsde_resolve_threads(threads));
    for (std::size_t i = 0; i < rows.size(); ++i) {
      out_rows[i] = {rows[i].lambda, rows[i].estimate, rows[i].target, rows[i].std_error};
    }
  });
}

tclsde_status tclsde_validate_model(const tclsde_config* config, int probes, uint64_t seed,
                                    tclsde_validation* out) {
  if (!config) return null_argument("config");
  if (!out) return null_argument("out");
  return guarded([&] {
    const auto model = tclsde::build_model(tclsde::load_model_config(config->doc));
    const auto report = tclsde::validate_model(model, probes, seed);
    g_validation_messages = report.violations;
    *out = {report.probes,
            static_cast<int>(report.violations.size()),
            report.jacobian_fallback ? 1 : 0,
            report.declared_L,
            report.max_lipschitz_ratio,
            report.max_jacobian_norm,
            report.max_jacobian_rel_error};
  });
}

const char* tclsde_validation_message(size_t index) {
  return index < g_validation_messages.size() ? g_validation_messages[index].c_str() : "";
}

}  // extern "C"
