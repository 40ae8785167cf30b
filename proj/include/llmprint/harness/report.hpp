#pragma once

#include <filesystem>
#include <string>

#include "llmprint/harness/experiment.hpp"

namespace llmprint::harness {

enum class ReportFormat { kJson, kCsv, kMarkdown };
ReportFormat parse_report_format(const std::string& text);

nlohmann::json to_json(const DetectionReport& report);
DetectionReport report_from_json(const nlohmann::json& doc);

/// One record per line: config, fingerprints, mode, rate, suspect, sweep.
/// Structured values travel as JSON in the `payload` column, so the CSV
/// holds the whole report.
std::string to_csv(const DetectionReport& report);
DetectionReport report_from_csv(const std::string& text);

/// Table-2 style summary: one row per suspect family with gray-box and
/// black-box TPR/FPR, then one row per verification mode, then sweeps.
std::string to_markdown(const DetectionReport& report);

std::string render(const DetectionReport& report, ReportFormat format);
/// Throws Error when the path cannot be written.
void emit_report(const DetectionReport& report, ReportFormat format,
                 const std::filesystem::path& path);

}  // namespace llmprint::harness
