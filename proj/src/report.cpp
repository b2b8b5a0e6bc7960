#include "tclsde/report.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>

#include "tclsde/config.hpp"
#include "tclsde/error.hpp"

namespace tclsde {

namespace {

using nlohmann::json;

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double number_from(const json& j, const char* key) {
  const auto& v = j.at(key);
  return v.is_null() ? std::numeric_limits<double>::quiet_NaN() : v.get<double>();
}

json diagnostics_json(const NewtonDiagnostics& d) {
  json hist = json::object();
  for (const auto& [iters, count] : d.iteration_histogram) hist[std::to_string(iters)] = count;
  return {{"newton_iteration_histogram", hist},
          {"max_residual", d.max_residual},
          {"steps", d.steps}};
}

json report_json(const WeakErrorReport& r) {
  json rows = json::array();
  for (const auto& row : r.rows) {
    rows.push_back({{"delta", row.delta},
                    {"estimate", number_or_null(row.estimate)},
                    {"reference", number_or_null(row.reference)},
                    {"abs_error", number_or_null(row.abs_error)},
                    {"std_error", number_or_null(row.std_error)},
                    {"paths_failed", row.paths_failed}});
  }
  return {{"reference_delta", r.reference_delta},
          {"reference_estimate", number_or_null(r.reference_estimate)},
          {"reference_std_error", number_or_null(r.reference_std_error)},
          {"reference_paths_failed", r.reference_paths_failed},
          {"rows", rows},
          {"fitted_order", number_or_null(r.fitted_order)},
          {"noise_floor", r.noise_floor},
          {"diagnostics", diagnostics_json(r.diagnostics)}};
}

}  // namespace

const char* library_version() { return "0.1.0"; }

ReportFormat report_format_from_string(const std::string& s) {
  if (s == "csv") return ReportFormat::csv;
  if (s == "json") return ReportFormat::json;
  throw Error(ErrorCode::InvalidArgument, "unknown report format '" + s + "'");
}

std::string report_to_csv(const WeakErrorReport& report) {
  std::string out = "delta,estimate,reference,abs_error,std_error,paths_failed\n";
  for (const auto& row : report.rows) {
    out += format_double(row.delta) + "," + format_double(row.estimate) + "," +
           format_double(row.reference) + "," + format_double(row.abs_error) + "," +
           format_double(row.std_error) + "," + std::to_string(row.paths_failed) + "\n";
  }
  out += "# fitted_order=" + format_double(report.fitted_order) + "\n";
  return out;
}

std::string report_to_json(const WeakErrorReport& report) { return report_json(report).dump(2) + "\n"; }

WeakErrorReport report_from_json(const std::string& text) {
  WeakErrorReport r;
  try {
    const json j = json::parse(text);
    r.reference_delta = j.at("reference_delta").get<double>();
    r.reference_estimate = number_from(j, "reference_estimate");
    r.reference_std_error = number_from(j, "reference_std_error");
    r.reference_paths_failed = j.at("reference_paths_failed").get<std::size_t>();
    for (const auto& row : j.at("rows")) {
      WeakErrorRow w;
      w.delta = row.at("delta").get<double>();
      w.estimate = number_from(row, "estimate");
      w.reference = number_from(row, "reference");
      w.abs_error = number_from(row, "abs_error");
      w.std_error = number_from(row, "std_error");
      w.paths_failed = row.at("paths_failed").get<std::size_t>();
      r.rows.push_back(w);
    }
    r.fitted_order = number_from(j, "fitted_order");
    r.noise_floor = j.at("noise_floor").get<bool>();
    const auto& d = j.at("diagnostics");
    for (const auto& [iters, count] : d.at("newton_iteration_histogram").items()) {
      r.diagnostics.iteration_histogram[std::stoi(iters)] = count.get<std::uint64_t>();
    }
    r.diagnostics.max_residual = d.at("max_residual").get<double>();
    r.diagnostics.steps = d.at("steps").get<std::uint64_t>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("invalid report JSON: ") + e.what());
  }
  return r;
}

void write_text_file(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::cout << content << std::flush;
    if (!std::cout) throw Error(ErrorCode::IoError, "failed writing to stdout");
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot open '" + path + "' for writing");
  out << content;
  out.close();
  if (!out) throw Error(ErrorCode::IoError, "failed writing '" + path + "'");
}

void emit_report(const WeakErrorReport& report, ReportFormat format, const std::string& path) {
  write_text_file(path, format == ReportFormat::csv ? report_to_csv(report) : report_to_json(report));
}

std::string manifest_to_json(const RunManifest& m) {
  json config = json::object();
  const ExperimentPlan& p = m.plan;
  config["model"] = to_string(p.model.id);
  if (p.model.id == ModelId::ou) {
    config["ou.a1"] = p.model.ou.a1;
    config["ou.a2"] = p.model.ou.a2;
    config["ou.a3"] = p.model.ou.a3;
    config["ou.a4"] = p.model.ou.a4;
    config["ou.x0"] = p.model.ou.x0;
  } else {
    config["kubo.a"] = p.model.kubo.a;
    config["kubo.sigma"] = p.model.kubo.sigma;
    config["kubo.gamma"] = p.model.kubo.gamma;
    config["kubo.x1_0"] = p.model.kubo.x1_0;
    config["kubo.x2_0"] = p.model.kubo.x2_0;
  }
  config["jump.kind"] = to_string(p.model.jump_kind);
  config["jump.c"] = p.model.jump_c;
  config["theta"] = p.theta;
  config["T"] = p.T;
  config["deltas"] = p.delta_ladder;
  config["delta_ref"] = p.delta_reference;
  config["paths"] = p.paths;
  config["phi"] = p.phi;
  config["seed"] = p.seed;
  config["coupling"] = to_string(p.coupling);
  config["clock"] = p.identity_clock ? "identity" : "subordinator";
  config["alpha"] = p.alpha;
  config["lepage_terms"] = p.lepage_terms;
  config["lepage_drift"] = p.lepage_drift;
  config["newton.tol"] = p.newton_tol;
  config["newton.max_iter"] = p.newton_max_iter;

  json failed = json::object();
  failed[format_double(m.report.reference_delta)] = m.report.reference_paths_failed;
  for (const auto& row : m.report.rows) failed[format_double(row.delta)] = row.paths_failed;

  json diagnostics = diagnostics_json(m.report.diagnostics);
  diagnostics["paths_failed"] = failed;

  const json manifest = {{"tool", "tclsde"},
                         {"library_version", m.library_version},
                         {"master_seed", p.seed},
                         {"threads", m.threads},
                         {"duration_seconds", m.duration_seconds},
                         {"config", config},
                         {"diagnostics", diagnostics},
                         {"report", report_json(m.report)}};
  return manifest.dump(2) + "\n";
}

}  // namespace tclsde
