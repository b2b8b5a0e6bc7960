#pragma once

#include <string>

#include "tclsde/experiment.hpp"

namespace tclsde {

enum class ReportFormat { csv, json };

ReportFormat report_format_from_string(const std::string& s);

/// Header, one row per ladder delta, then "# fitted_order=<value>".
std::string report_to_csv(const WeakErrorReport& report);
std::string report_to_json(const WeakErrorReport& report);
WeakErrorReport report_from_json(const std::string& text);

/// Writes to path, or to stdout when path is "-" or empty.
void emit_report(const WeakErrorReport& report, ReportFormat format, const std::string& path);

struct RunManifest {
  ExperimentPlan plan;
  std::string library_version;
  double duration_seconds = 0.0;
  int threads = 1;
  WeakErrorReport report;
};

/// JSON manifest; its "config" object is a loadable configuration.
std::string manifest_to_json(const RunManifest& manifest);

void write_text_file(const std::string& path, const std::string& content);

const char* library_version();

}  // namespace tclsde
